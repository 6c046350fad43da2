//! Test support: a dense-matrix reference implementation of measurement
//! chains and seeded generators for random states, pairs, and scenarios.
//!
//! The oracle only reads the eigenvectors, eigenvalue labels and raw
//! function values out of a scenario; projection, branching and
//! normalization are redone here with explicit matrices.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use erasetest_core::{
    pauli_pair, CommutingPair, FunctionObservable, JointEigenvector, JointFunction, Label, MeasurementStep,
    OutcomeDistribution, OutcomeSequence, Scenario, StateVector, TableEntry,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// dense oracle

struct DenseOutcome {
    label: Label,
    projector: DMatrix<Complex64>,
}

fn column(v: &StateVector) -> DVector<Complex64> {
    DVector::from_column_slice(v.amps())
}

fn rank_one(v: &StateVector) -> DMatrix<Complex64> {
    let c = column(v);
    &c * c.adjoint()
}

fn dense_outcomes(step: &MeasurementStep) -> Option<Vec<DenseOutcome>> {
    match step {
        MeasurementStep::Skip => None,
        MeasurementStep::Separate(pair) => Some(
            pair.joint()
                .iter()
                .map(|j| DenseOutcome {
                    label: Label::pair(j.a, j.b),
                    projector: rank_one(&j.vector),
                })
                .collect(),
        ),
        MeasurementStep::Functional(fo) => Some(dense_function_outcomes(fo)),
    }
}

fn dense_function_outcomes(fo: &FunctionObservable) -> Vec<DenseOutcome> {
    let joint = fo.pair().joint();
    let dim = fo.pair().dim();
    let mut out: Vec<(f64, DMatrix<Complex64>)> = Vec::new();
    for (j, &value) in joint.iter().zip(fo.fvalues()) {
        match out.iter_mut().find(|(rep, _)| (rep - value).abs() <= 1e-9) {
            Some((_, p)) => *p += rank_one(&j.vector),
            None => out.push((value, rank_one(&j.vector))),
        }
    }
    debug_assert!(out.iter().all(|(_, p)| p.nrows() == dim));
    out.into_iter()
        .map(|(value, projector)| DenseOutcome {
            label: Label::value(value),
            projector,
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct OracleEntry {
    pub prob: f64,
    pub final_state: DVector<Complex64>,
}

/// Outcome-sequence probabilities by explicit projector-matrix products.
pub fn dense_chain(scn: &Scenario) -> BTreeMap<OutcomeSequence, OracleEntry> {
    let steps: Vec<Vec<DenseOutcome>> = scn.steps().iter().filter_map(dense_outcomes).collect();
    let mut out = BTreeMap::new();
    let psi = column(scn.initial());
    recurse(&steps, psi, 1.0, &mut Vec::new(), &mut out);
    out
}

fn recurse(
    steps: &[Vec<DenseOutcome>],
    psi: DVector<Complex64>,
    weight: f64,
    path: &mut Vec<Label>,
    out: &mut BTreeMap<OutcomeSequence, OracleEntry>,
) {
    let Some((first, rest)) = steps.split_first() else {
        out.insert(
            OutcomeSequence(path.clone()),
            OracleEntry {
                prob: weight,
                final_state: psi,
            },
        );
        return;
    };
    for outcome in first {
        let image = &outcome.projector * &psi;
        let prob = image.norm_squared();
        if prob < 1e-30 {
            continue;
        }
        path.push(outcome.label);
        recurse(rest, image.unscale(prob.sqrt()), weight * prob, path, out);
        path.pop();
    }
}

/// Largest probability discrepancy over the union of outcome sequences and
/// largest phase-aligned final-state discrepancy over sequences both sides
/// give a state for.
pub fn compare_with_oracle(dist: &OutcomeDistribution, oracle: &BTreeMap<OutcomeSequence, OracleEntry>) -> (f64, f64) {
    let mut prob_err: f64 = 0.0;
    let mut state_err: f64 = 0.0;
    for (seq, entry) in dist.entries() {
        let want = oracle.get(seq);
        prob_err = prob_err.max((entry.prob - want.map_or(0.0, |w| w.prob)).abs());
        if let (Some(state), Some(want)) = (&entry.final_state, want) {
            if entry.prob > 1e-10 {
                let want = StateVector::normalized(want.final_state.iter().copied().collect()).unwrap();
                state_err = state_err.max(state.phase_distance(&want));
            }
        }
    }
    for (seq, want) in oracle {
        if !dist.entries().contains_key(seq) {
            prob_err = prob_err.max(want.prob);
        }
    }
    (prob_err, state_err)
}

// ---------------------------------------------------------------------------
// closed forms for the two-spin z-then-x experiment; amplitudes are
// indexed [α(1,1), α(1,-1), α(-1,1), α(-1,-1)]

/// Probabilities of "same" (+1) and "opposite" (−1) for the product of z spins.
pub fn closed_form_product_probs(alpha: &[Complex64]) -> (f64, f64) {
    (
        alpha[0].norm_sqr() + alpha[3].norm_sqr(),
        alpha[1].norm_sqr() + alpha[2].norm_sqr(),
    )
}

/// P(|1,1⟩ₓ) after a functional z-product step.
pub fn closed_form_functional_then_x(alpha: &[Complex64]) -> f64 {
    0.25 * ((alpha[0] + alpha[3]).norm_sqr() + (alpha[1] + alpha[2]).norm_sqr())
}

/// P(|1,1⟩ₓ) with no prior step.
pub fn closed_form_direct_x(alpha: &[Complex64]) -> f64 {
    0.25 * (alpha[0] + alpha[1] + alpha[2] + alpha[3]).norm_sqr()
}

// ---------------------------------------------------------------------------
// random fixtures

pub fn random_state<R: Rng>(rng: &mut R, dim: usize) -> StateVector {
    loop {
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(s) = StateVector::normalized(amps) {
            return s;
        }
    }
}

pub fn random_real_state<R: Rng>(rng: &mut R, dim: usize) -> StateVector {
    loop {
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), 0.0))
            .collect();
        if let Ok(s) = StateVector::normalized(amps) {
            return s;
        }
    }
}

pub fn random_angle<R: Rng>(rng: &mut R) -> f64 {
    rng.random_range(0.0..2.0 * PI)
}

/// Random orthonormal basis by Gram-Schmidt on Gaussian vectors, labeled
/// with all four sign pairs.
pub fn random_custom_pair<R: Rng>(rng: &mut R) -> CommutingPair {
    let labels = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    while basis.len() < 4 {
        let mut v: Vec<Complex64> = (0..4)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        for _ in 0..2 {
            for q in &basis {
                let c: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let joint = basis
        .into_iter()
        .zip(labels)
        .map(|(amps, (a, b))| JointEigenvector {
            a,
            b,
            vector: StateVector::normalized(amps).unwrap(),
        })
        .collect();
    CommutingPair::new(joint).unwrap()
}

pub fn random_pair<R: Rng>(rng: &mut R) -> CommutingPair {
    if rng.random_bool(0.25) {
        random_custom_pair(rng)
    } else {
        pauli_pair(random_angle(rng), random_angle(rng))
    }
}

/// Injective on the four sign pairs.
pub fn injective_table<R: Rng>(rng: &mut R) -> JointFunction {
    let mut values = [0.0, 1.0, 2.0, 3.0];
    for i in (1..4).rev() {
        values.swap(i, rng.random_range(0..=i));
    }
    sign_table(|k| values[k] * 1.5 - 0.25)
}

fn sign_table(value: impl Fn(usize) -> f64) -> JointFunction {
    let pairs = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    JointFunction::Table(
        pairs
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| TableEntry { a, b, value: value(k) })
            .collect(),
    )
}

pub fn random_function<R: Rng>(rng: &mut R) -> JointFunction {
    match rng.random_range(0..5) {
        0 | 1 => JointFunction::Product,
        2 => sign_table(|k| if k < 2 { 1.0 } else { -1.0 }),
        3 => injective_table(rng),
        _ => {
            let values: Vec<f64> = (0..4).map(|_| *[0.0, 1.0, 2.0].choose(rng).unwrap()).collect();
            sign_table(|k| values[k])
        }
    }
}

pub fn random_step<R: Rng>(rng: &mut R) -> MeasurementStep {
    match rng.random_range(0..5) {
        0 => MeasurementStep::Skip,
        1 | 2 => MeasurementStep::Separate(random_pair(rng)),
        _ => MeasurementStep::functional(&random_pair(rng), &random_function(rng)).unwrap(),
    }
}

/// Two-qubit scenario of one to three steps, at least one of them labeled.
pub fn random_scenario<R: Rng>(rng: &mut R) -> Scenario {
    let len = rng.random_range(1..=3);
    loop {
        let steps: Vec<MeasurementStep> = (0..len).map(|_| random_step(rng)).collect();
        if steps.iter().any(MeasurementStep::is_labeled) {
            return Scenario::new(random_state(rng, 4), steps).unwrap();
        }
    }
}
