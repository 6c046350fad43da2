//! Observables in spectral form: single-particle spin directions, complete
//! commuting pairs, and degenerate functions of a pair together with their
//! eigenspace projectors.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{check_orthonormal, dot, project, Projector, StateVector, PROB_ZERO};

/// Minimum separation between distinct eigenvalues (and between distinct
/// function values when clustering).
pub const EIG_SEP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenGroup {
    pub value: f64,
    pub vectors: Vec<StateVector>,
}

/// A Hermitian observable given by its eigenvalues and an orthonormal
/// eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralObservable {
    dim: usize,
    groups: Vec<EigenGroup>,
}

impl SpectralObservable {
    pub fn new(groups: Vec<EigenGroup>) -> Result<Self> {
        let vectors: Vec<StateVector> = groups.iter().flat_map(|g| g.vectors.iter().cloned()).collect();
        let dim = vectors.first().map(StateVector::dim).ok_or(Error::EmptyState)?;
        if vectors.len() != dim {
            return Err(Error::IncompleteBasis {
                expected: dim,
                found: vectors.len(),
            });
        }
        check_orthonormal(&vectors)?;
        for (i, g) in groups.iter().enumerate() {
            if g.vectors.is_empty() {
                return Err(Error::IncompleteBasis { expected: 1, found: 0 });
            }
            if let Some(h) = groups[i + 1..].iter().find(|h| (h.value - g.value).abs() <= EIG_SEP) {
                return Err(Error::EigenvalueCollision {
                    first: g.value,
                    second: h.value,
                });
            }
        }
        Ok(Self { dim, groups })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn groups(&self) -> &[EigenGroup] {
        &self.groups
    }
}

/// Spin component along the direction at angle `theta` from z towards x:
/// `cos θ σ_z + sin θ σ_x`.
pub fn pauli_direction(theta: f64) -> SpectralObservable {
    let (s, c) = (theta / 2.0).sin_cos();
    let up = StateVector::from_unit(vec![Complex64::new(c, 0.0), Complex64::new(s, 0.0)]);
    let down = StateVector::from_unit(vec![Complex64::new(-s, 0.0), Complex64::new(c, 0.0)]);
    SpectralObservable {
        dim: 2,
        groups: vec![
            EigenGroup {
                value: 1.0,
                vectors: vec![up],
            },
            EigenGroup {
                value: -1.0,
                vectors: vec![down],
            },
        ],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointEigenvector {
    pub a: f64,
    pub b: f64,
    pub vector: StateVector,
}

/// A complete set of two commuting observables: a joint orthonormal
/// eigenbasis in which every eigenvalue pair `(a, b)` occurs once.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutingPair {
    dim: usize,
    joint: Vec<JointEigenvector>,
}

impl CommutingPair {
    pub fn new(joint: Vec<JointEigenvector>) -> Result<Self> {
        let dim = joint.first().map(|j| j.vector.dim()).ok_or(Error::EmptyState)?;
        if joint.len() != dim {
            return Err(Error::IncompleteBasis {
                expected: dim,
                found: joint.len(),
            });
        }
        let vectors: Vec<StateVector> = joint.iter().map(|j| j.vector.clone()).collect();
        check_orthonormal(&vectors)?;
        for (i, p) in joint.iter().enumerate() {
            if let Some(q) = joint[i + 1..]
                .iter()
                .find(|q| (q.a - p.a).abs() <= EIG_SEP && (q.b - p.b).abs() <= EIG_SEP)
            {
                return Err(Error::NotComplete(format!(
                    "eigenvalue pair ({}, {}) repeats as ({}, {})",
                    p.a, p.b, q.a, q.b
                )));
            }
        }
        Ok(Self { dim, joint })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn joint(&self) -> &[JointEigenvector] {
        &self.joint
    }
}

/// Joint eigenbasis of `A ⊗ id` and `id ⊗ B` for two non-degenerate local
/// observables, ordered row-major over (A-group, B-group).
pub fn pair_from_locals(obs_a: &SpectralObservable, obs_b: &SpectralObservable) -> Result<CommutingPair> {
    for (name, obs) in [("A", obs_a), ("B", obs_b)] {
        if let Some(g) = obs.groups.iter().find(|g| g.vectors.len() != 1) {
            return Err(Error::NotComplete(format!(
                "local observable {name} is degenerate at eigenvalue {}",
                g.value
            )));
        }
    }
    let joint = obs_a
        .groups
        .iter()
        .flat_map(|ga| {
            obs_b.groups.iter().map(move |gb| JointEigenvector {
                a: ga.value,
                b: gb.value,
                vector: crate::hilbert::tensor(&ga.vectors[0], &gb.vectors[0]),
            })
        })
        .collect();
    CommutingPair::new(joint)
}

/// Convenience: the joint eigenbasis of spins measured along `theta` (A) and
/// `phi` (B).
pub fn pauli_pair(theta: f64, phi: f64) -> CommutingPair {
    pair_from_locals(&pauli_direction(theta), &pauli_direction(phi)).expect("spin directions are non-degenerate")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableEntry {
    pub a: f64,
    pub b: f64,
    pub value: f64,
}

/// A real function of the joint eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub enum JointFunction {
    /// `f(a, b) = a · b`.
    Product,
    /// Explicit values; lookups match `(a, b)` within [`EIG_SEP`].
    Table(Vec<TableEntry>),
}

impl JointFunction {
    pub fn eval(&self, a: f64, b: f64) -> Option<f64> {
        match self {
            JointFunction::Product => Some(a * b),
            JointFunction::Table(entries) => entries
                .iter()
                .find(|e| (e.a - a).abs() <= EIG_SEP && (e.b - b).abs() <= EIG_SEP)
                .map(|e| e.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace {
    pub value: f64,
    /// Indices into the pair's joint eigenbasis, ascending.
    pub members: Vec<usize>,
    pub projector: Projector,
}

/// `f(A, B)` for a commuting pair, grouped into eigenspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionObservable {
    pair: CommutingPair,
    function: JointFunction,
    fvalues: Vec<f64>,
    eigenspaces: Vec<Eigenspace>,
}

impl FunctionObservable {
    pub fn pair(&self) -> &CommutingPair {
        &self.pair
    }

    /// The function this observable was built from. Observables built from
    /// a closure report their values as a table.
    pub fn function(&self) -> &JointFunction {
        &self.function
    }

    pub fn fvalues(&self) -> &[f64] {
        &self.fvalues
    }

    pub fn eigenspaces(&self) -> &[Eigenspace] {
        &self.eigenspaces
    }

    pub fn is_degenerate(&self) -> bool {
        self.eigenspaces.len() < self.pair.dim
    }
}

pub fn function_observable(pair: &CommutingPair, f: &JointFunction) -> Result<FunctionObservable> {
    let mut fo = function_observable_with(pair, |a, b| f.eval(a, b), EIG_SEP)?;
    fo.function = f.clone();
    Ok(fo)
}

/// Groups the joint eigenvectors by `f(a, b)`. A value joins an existing
/// eigenspace when it lies within `sep` of that eigenspace's representative
/// (the value at its lowest member index); eigenspaces are ordered by their
/// lowest member index.
pub fn function_observable_with<F>(pair: &CommutingPair, f: F, sep: f64) -> Result<FunctionObservable>
where
    F: Fn(f64, f64) -> Option<f64>,
{
    if !(sep >= 0.0 && sep.is_finite()) {
        return Err(Error::InvalidArgument(format!("clustering threshold {sep}")));
    }
    let mut fvalues = Vec::with_capacity(pair.dim);
    for j in &pair.joint {
        match f(j.a, j.b) {
            Some(v) if v.is_finite() => fvalues.push(v),
            _ => return Err(Error::FunctionDomain { a: j.a, b: j.b }),
        }
    }

    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (k, &v) in fvalues.iter().enumerate() {
        let mut hits = groups.iter_mut().filter(|(rep, _)| (v - *rep).abs() <= sep);
        match (hits.next(), hits.next()) {
            (Some(group), None) => group.1.push(k),
            (None, _) => groups.push((v, vec![k])),
            (Some(_), Some(_)) => return Err(Error::AmbiguousGrouping { value: v }),
        }
    }

    let eigenspaces = groups
        .into_iter()
        .map(|(value, members)| {
            let basis = members.iter().map(|&k| pair.joint[k].vector.clone()).collect();
            Ok(Eigenspace {
                value,
                members,
                projector: Projector::new(basis)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let function = JointFunction::Table(
        pair.joint
            .iter()
            .zip(&fvalues)
            .map(|(j, &value)| TableEntry { a: j.a, b: j.b, value })
            .collect(),
    );
    Ok(FunctionObservable {
        pair: pair.clone(),
        function,
        fvalues,
        eigenspaces,
    })
}

pub fn eigenspace_projectors(fo: &FunctionObservable) -> Vec<(f64, Projector)> {
    fo.eigenspaces.iter().map(|e| (e.value, e.projector.clone())).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoMeasurementBlock {
    pub value: f64,
    pub vectors: Vec<StateVector>,
}

/// A degeneracy-lifting orthonormal basis adapted to `state`.
///
/// In every eigenspace the state overlaps, the first vector is the
/// normalized projection of `state` (the collapse target of the coarse
/// measurement) and the rest complete it to a basis of the eigenspace.
/// Eigenspaces without support keep their joint eigenvectors.
pub fn co_measurement_basis(state: &StateVector, fo: &FunctionObservable) -> Result<Vec<CoMeasurementBlock>> {
    if state.dim() != fo.pair.dim {
        return Err(Error::Dimension {
            expected: fo.pair.dim,
            found: state.dim(),
        });
    }
    fo.eigenspaces
        .iter()
        .map(|space| {
            let members: Vec<&StateVector> = space.members.iter().map(|&k| &fo.pair.joint[k].vector).collect();
            let projection = project(state, &space.projector)?;
            let vectors = match projection.post {
                Some(seed) if projection.prob > PROB_ZERO => complete_from_seed(seed, &members),
                _ => members.into_iter().cloned().collect(),
            };
            Ok(CoMeasurementBlock {
                value: space.value,
                vectors,
            })
        })
        .collect()
}

/// Orthonormal basis of span(members) whose first vector is `seed`, which
/// must lie in that span.
///
/// The member with the largest overlap with the seed is the one dropped; the
/// remaining members are orthogonalized against the seed in index order.
/// Dropping the largest-overlap member keeps the Gram determinant of the
/// retained set at least `1 / rank`.
fn complete_from_seed(seed: StateVector, members: &[&StateVector]) -> Vec<StateVector> {
    let dropped = members
        .iter()
        .enumerate()
        .map(|(k, m)| (k, dot(m.amps(), seed.amps()).norm()))
        .fold(
            (0, f64::NEG_INFINITY),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        )
        .0;

    let mut basis = vec![seed];
    for (k, m) in members.iter().enumerate() {
        if k == dropped {
            continue;
        }
        let mut v = m.amps().to_vec();
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q.amps(), &v);
                v.iter_mut().zip(q.amps()).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(StateVector::from_unit(v));
    }
    basis
}
