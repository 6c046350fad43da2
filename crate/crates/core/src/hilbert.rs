//! Finite-dimensional complex vector spaces: normalized states, inner
//! products, tensor products, and projectors held as orthonormal spanning
//! sets.
//!
//! Two-particle states use the row-major convention: the amplitude of
//! `|i⟩ ⊗ |j⟩` lives at index `i * dim_b + j`, so particle A is the slow
//! index.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Amplitude = Complex64;

/// Tolerance for normalization and orthonormality invariants.
pub const TOL_NORM: f64 = 1e-12;

/// Outcomes with probability at or below this are treated as impossible.
pub const PROB_ZERO: f64 = 1e-14;

/// Amplitudes below this modulus are skipped when fixing the global phase.
pub const PHASE_ANCHOR: f64 = 1e-9;

/// A normalized pure state.
#[derive(Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Amplitude>,
}

impl StateVector {
    /// Builds a state from amplitudes that must already be normalized to
    /// within [`TOL_NORM`].
    pub fn new(amps: Vec<Amplitude>) -> Result<Self> {
        check_amplitudes(&amps)?;
        let norm_sqr = norm_sqr(&amps);
        if (norm_sqr - 1.0).abs() > TOL_NORM {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amps })
    }

    /// Builds a state by rescaling arbitrary nonzero amplitudes.
    pub fn normalized(amps: Vec<Amplitude>) -> Result<Self> {
        check_amplitudes(&amps)?;
        let norm = norm_sqr(&amps).sqrt();
        if norm <= f64::MIN_POSITIVE {
            return Err(Error::NotNormalized { norm_sqr: 0.0 });
        }
        Ok(Self::from_unit(amps.into_iter().map(|a| a / norm).collect()))
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Amplitude::new(x, 0.0)).collect())
    }

    /// The computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyState);
        }
        if index >= dim {
            return Err(Error::Dimension {
                expected: dim,
                found: index + 1,
            });
        }
        let mut amps = vec![Amplitude::new(0.0, 0.0); dim];
        amps[index] = Amplitude::new(1.0, 0.0);
        Ok(Self { amps })
    }

    /// Internal constructor for vectors that are unit length by construction.
    pub(crate) fn from_unit(amps: Vec<Amplitude>) -> Self {
        debug_assert!((norm_sqr(&amps) - 1.0).abs() < 1e-9);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<Amplitude> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// Returns the same ray with the first amplitude of modulus above
    /// [`PHASE_ANCHOR`] made real and positive.
    pub fn canonical_phase(&self) -> Self {
        match self.amps.iter().find(|a| a.norm() > PHASE_ANCHOR) {
            Some(anchor) => {
                let phase = anchor.conj() / anchor.norm();
                Self {
                    amps: self.amps.iter().map(|a| a * phase).collect(),
                }
            }
            None => self.clone(),
        }
    }

    /// Largest componentwise deviation between `self` and `other` after
    /// aligning `other`'s global phase to `self`.
    pub fn phase_distance(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        let overlap: Amplitude = self.amps.iter().zip(&other.amps).map(|(u, v)| u.conj() * v).sum();
        let phase = if overlap.norm() > 0.0 {
            overlap.conj() / overlap.norm()
        } else {
            Amplitude::new(1.0, 0.0)
        };
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(u, v)| (u - v * phase).norm())
            .fold(0.0, f64::max)
    }

    pub fn equals_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        self.phase_distance(other) <= tol
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.amps.iter().map(|a| (a.re, a.im))).finish()
    }
}

fn check_amplitudes(amps: &[Amplitude]) -> Result<()> {
    if amps.is_empty() {
        return Err(Error::EmptyState);
    }
    if let Some(index) = amps.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

fn norm_sqr(amps: &[Amplitude]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// `⟨u|v⟩`, conjugate-linear in `u`.
pub fn inner_product(u: &StateVector, v: &StateVector) -> Result<Amplitude> {
    check_dims(u.dim(), v.dim())?;
    Ok(dot(&u.amps, &v.amps))
}

pub(crate) fn dot(u: &[Amplitude], v: &[Amplitude]) -> Amplitude {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Dimension { expected, found });
    }
    Ok(())
}

/// Kronecker product `u ⊗ v` with `u` as the slow index.
pub fn tensor(u: &StateVector, v: &StateVector) -> StateVector {
    let amps = u.amps.iter().flat_map(|a| v.amps.iter().map(move |b| a * b)).collect();
    StateVector { amps }
}

/// Orthogonal projector represented by an orthonormal basis of its range.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    dim: usize,
    basis: Vec<StateVector>,
}

impl Projector {
    pub fn new(basis: Vec<StateVector>) -> Result<Self> {
        let dim = basis
            .first()
            .map(StateVector::dim)
            .ok_or(Error::IncompleteBasis { expected: 1, found: 0 })?;
        if basis.len() > dim {
            return Err(Error::IncompleteBasis {
                expected: dim,
                found: basis.len(),
            });
        }
        check_orthonormal(&basis)?;
        Ok(Self { dim, basis })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[StateVector] {
        &self.basis
    }
}

/// Verifies pairwise `|⟨v_i, v_j⟩ − δ_ij| ≤ TOL_NORM` and equal dimensions.
pub fn check_orthonormal(vectors: &[StateVector]) -> Result<()> {
    let Some(first) = vectors.first() else {
        return Ok(());
    };
    for (i, u) in vectors.iter().enumerate() {
        check_dims(first.dim(), u.dim())?;
        for (j, v) in vectors.iter().enumerate().skip(i) {
            let delta = if i == j { 1.0 } else { 0.0 };
            let deviation = (dot(&u.amps, &v.amps) - delta).norm();
            if deviation > TOL_NORM {
                return Err(Error::NotOrthonormal { i, j, deviation });
            }
        }
    }
    Ok(())
}

/// Result of applying a projector to a state.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub prob: f64,
    /// Normalized, phase-canonical post-measurement state; `None` when
    /// `prob <= PROB_ZERO`.
    pub post: Option<StateVector>,
}

pub fn project(state: &StateVector, projector: &Projector) -> Result<Projection> {
    check_dims(projector.dim, state.dim())?;
    let coeffs: Vec<Amplitude> = projector.basis.iter().map(|b| dot(&b.amps, &state.amps)).collect();
    let prob: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if prob <= PROB_ZERO {
        return Ok(Projection { prob, post: None });
    }
    let mut image = vec![Amplitude::new(0.0, 0.0); state.dim()];
    for (c, b) in coeffs.iter().zip(&projector.basis) {
        for (slot, amp) in image.iter_mut().zip(&b.amps) {
            *slot += c * amp;
        }
    }
    let norm = norm_sqr(&image).sqrt();
    image.iter_mut().for_each(|a| *a /= norm);
    let post = StateVector { amps: image }.canonical_phase();
    Ok(Projection { prob, post: Some(post) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Amplitude {
        Amplitude::new(re, im)
    }

    fn real(values: &[f64]) -> StateVector {
        StateVector::from_real(values).unwrap()
    }

    fn bell() -> StateVector {
        real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2])
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(
            inner_product(&real(&[1.0, 0.0]), &real(&[1.0, 0.0])).unwrap(),
            c(1.0, 0.0)
        );
        assert_eq!(
            inner_product(&real(&[1.0, 0.0]), &real(&[0.0, 1.0])).unwrap(),
            c(0.0, 0.0)
        );

        let u = StateVector::new(vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)]).unwrap();
        let v = real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        // conj(u0)v0 + conj(u1)v1 = 1/2 - i/2
        let mut oracle = c(0.0, 0.0);
        for k in 0..2 {
            oracle += u.amps()[k].conj() * v.amps()[k];
        }
        let got = inner_product(&u, &v).unwrap();
        assert!((got - c(0.5, -0.5)).norm() < 1e-15);
        assert!((got - oracle).norm() < 1e-15);
    }

    #[test]
    fn inner_product_dimension_mismatch() {
        let err = inner_product(&real(&[1.0, 0.0]), &real(&[1.0, 0.0, 0.0])).unwrap_err();
        assert_eq!(err, Error::Dimension { expected: 2, found: 3 });
    }

    #[test]
    fn tensor_examples() {
        assert_eq!(
            tensor(&real(&[1.0, 0.0]), &real(&[1.0, 0.0])),
            real(&[1.0, 0.0, 0.0, 0.0])
        );
        assert_eq!(
            tensor(&real(&[1.0, 0.0]), &real(&[0.0, 1.0])),
            real(&[0.0, 1.0, 0.0, 0.0])
        );
        let t = tensor(&real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]), &real(&[1.0, 0.0]));
        assert_eq!(t, real(&[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0]));
    }

    #[test]
    fn project_examples() {
        let p = Projector::new(vec![real(&[1.0, 0.0, 0.0, 0.0]), real(&[0.0, 0.0, 0.0, 1.0])]).unwrap();
        let r = project(&real(&[1.0, 0.0, 0.0, 0.0]), &p).unwrap();
        assert!((r.prob - 1.0).abs() < 1e-15);
        assert_eq!(r.post.unwrap(), real(&[1.0, 0.0, 0.0, 0.0]));

        let r = project(&bell(), &p).unwrap();
        assert!((r.prob - 1.0).abs() < 1e-15);
        assert!(r.post.unwrap().phase_distance(&bell()) < 1e-15);

        let odd = Projector::new(vec![real(&[0.0, 1.0, 0.0, 0.0]), real(&[0.0, 0.0, 1.0, 0.0])]).unwrap();
        let r = project(&bell(), &odd).unwrap();
        assert_eq!(r.prob, 0.0);
        assert!(r.post.is_none());
    }

    #[test]
    fn project_dimension_mismatch() {
        let p = Projector::new(vec![real(&[1.0, 0.0])]).unwrap();
        assert!(matches!(project(&bell(), &p), Err(Error::Dimension { .. })));
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(StateVector::new(vec![]), Err(Error::EmptyState));
        assert!(matches!(
            StateVector::from_real(&[1.0, 1.0]),
            Err(Error::NotNormalized { .. })
        ));
        assert_eq!(
            StateVector::from_real(&[f64::NAN, 1.0]),
            Err(Error::NonFinite { index: 0 })
        );
        assert!(StateVector::from_real(&[1.0 + 1e-6, 0.0]).is_err());
        assert!(matches!(
            Projector::new(vec![real(&[1.0, 0.0]), real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2])]),
            Err(Error::NotOrthonormal { .. })
        ));
        assert!(Projector::new(vec![]).is_err());
    }

    #[test]
    fn canonical_phase_anchors_first_significant_amplitude() {
        let s = StateVector::new(vec![c(0.0, 0.0), c(0.0, -FRAC_1_SQRT_2), c(FRAC_1_SQRT_2, 0.0)]).unwrap();
        let canon = s.canonical_phase();
        assert!((canon.amps()[1] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((canon.amps()[2] - c(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!(s.equals_up_to_phase(&canon, 1e-15));
    }
}
