//! Built-in reproduction suite for the two-spin experiment: closed-form
//! probabilities against the engine, agreement of the two models on a single
//! step, the degeneracy-lifting basis, and the Bell discrimination numbers.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt::Write;

use erasetest_core::{
    co_measurement_basis, function_observable, marginal, pauli_pair, required_samples, run_chain_analytic,
    step_outcomes, Amplitude, CommutingPair, Decision, Discriminator, Hypothesis, JointEigenvector, JointFunction,
    Label, MeasurementStep, Scenario, StateVector, TableEntry,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::render::sig12;

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    /// Amplitudes of the entangled initial state, z basis, `[α(1,1), α(1,-1), α(-1,1), α(-1,-1)]`.
    pub bell: [f64; 4],
    pub seed: u64,
    /// Random states per randomized item.
    pub trials: usize,
}

impl Default for Fixture {
    fn default() -> Self {
        Self {
            bell: [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2],
            seed: 0,
            trials: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

type Outcome = Result<(bool, String), String>;
type Check = fn(&Fixture) -> Outcome;

pub fn run(fixture: &Fixture) -> Vec<CheckResult> {
    let items: [(&'static str, Check); 9] = [
        ("fixture-normalization", fixture_normalization),
        ("bell-headline", bell_headline),
        ("product-probabilities", product_probabilities),
        ("functional-then-x", functional_then_x),
        ("direct-x", direct_x),
        ("compatibility", compatibility),
        ("co-measurement", co_measurement),
        ("injective-collapse", injective_collapse),
        ("bell-discrimination", bell_discrimination),
    ];
    items
        .into_iter()
        .map(|(name, check)| match check(fixture) {
            Ok((pass, detail)) => CheckResult { name, pass, detail },
            Err(detail) => CheckResult {
                name,
                pass: false,
                detail,
            },
        })
        .collect()
}

pub fn render(results: &[CheckResult]) -> String {
    let mut out = String::new();
    for r in results {
        writeln!(
            out,
            "{} {:<22} {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        )
        .unwrap();
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.pass).map(|r| r.name).collect();
    if failed.is_empty() {
        writeln!(out, "all {} checks passed", results.len()).unwrap();
    } else {
        writeln!(
            out,
            "{} of {} checks failed: {}",
            failed.len(),
            results.len(),
            failed.join(", ")
        )
        .unwrap();
    }
    out
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn bell_state(fixture: &Fixture) -> Result<StateVector, String> {
    StateVector::from_real(&fixture.bell).map_err(err)
}

fn rng(fixture: &Fixture, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(fixture.seed);
    rng.set_stream(stream);
    rng
}

fn random_state(rng: &mut ChaCha8Rng) -> StateVector {
    let amps = (0..4)
        .map(|_| Amplitude::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::normalized(amps).expect("gaussian vector is nonzero")
}

fn z_pair() -> CommutingPair {
    pauli_pair(0.0, 0.0)
}

fn z_product() -> MeasurementStep {
    MeasurementStep::functional(&z_pair(), &JointFunction::Product).expect("product is defined on spins")
}

/// P(|1,1⟩ in x) after `first`.
fn final_up_up(initial: &StateVector, first: MeasurementStep) -> Result<f64, String> {
    let scn = Scenario::new(
        initial.clone(),
        vec![first, MeasurementStep::Separate(pauli_pair(FRAC_PI_2, FRAC_PI_2))],
    )
    .map_err(err)?;
    let dist = run_chain_analytic(&scn).map_err(err)?;
    let m = marginal(&dist, dist.labeled_steps() - 1).map_err(err)?;
    Ok(m.get(&Label::pair(1.0, 1.0)).copied().unwrap_or(0.0))
}

fn fixture_normalization(fixture: &Fixture) -> Outcome {
    let norm: f64 = fixture.bell.iter().map(|a| a * a).sum();
    match StateVector::from_real(&fixture.bell) {
        Ok(_) => Ok((true, format!("squared norm {}", sig12(norm)))),
        Err(e) => Ok((false, e.to_string())),
    }
}

fn bell_headline(fixture: &Fixture) -> Outcome {
    let bell = bell_state(fixture)?;
    let separate = final_up_up(&bell, MeasurementStep::Separate(z_pair()))?;
    let functional = final_up_up(&bell, z_product())?;
    let skipped = final_up_up(&bell, MeasurementStep::Skip)?;
    let pass = (separate - 0.25).abs() <= TOL && (functional - 0.5).abs() <= TOL && (skipped - 0.5).abs() <= TOL;
    Ok((
        pass,
        format!(
            "separate={} functional={} skip={}",
            sig12(separate),
            sig12(functional),
            sig12(skipped)
        ),
    ))
}

/// Worst deviation of `engine` from `closed` over the fixture's random states.
fn closed_form_sweep(
    fixture: &Fixture,
    stream: u64,
    engine: impl Fn(&StateVector) -> Result<Vec<f64>, String>,
    closed: impl Fn(&[Amplitude]) -> Vec<f64>,
) -> Outcome {
    let mut r = rng(fixture, stream);
    let mut worst: f64 = 0.0;
    for _ in 0..fixture.trials {
        let state = random_state(&mut r);
        for (e, c) in engine(&state)?.into_iter().zip(closed(state.amps())) {
            worst = worst.max((e - c).abs());
        }
    }
    Ok((
        worst <= TOL,
        format!("{} states, max deviation {worst:.2e}", fixture.trials),
    ))
}

fn product_probabilities(fixture: &Fixture) -> Outcome {
    closed_form_sweep(
        fixture,
        1,
        |s| {
            let branches = step_outcomes(s, &z_product()).map_err(err)?;
            let same = branches
                .iter()
                .find(|b| b.label == Some(Label::value(1.0)))
                .map_or(0.0, |b| b.prob);
            let opposite = branches
                .iter()
                .find(|b| b.label == Some(Label::value(-1.0)))
                .map_or(0.0, |b| b.prob);
            Ok(vec![same, opposite])
        },
        |a| vec![a[0].norm_sqr() + a[3].norm_sqr(), a[1].norm_sqr() + a[2].norm_sqr()],
    )
}

fn functional_then_x(fixture: &Fixture) -> Outcome {
    closed_form_sweep(
        fixture,
        2,
        |s| Ok(vec![final_up_up(s, z_product())?]),
        |a| vec![0.25 * ((a[0] + a[3]).norm_sqr() + (a[1] + a[2]).norm_sqr())],
    )
}

fn direct_x(fixture: &Fixture) -> Outcome {
    closed_form_sweep(
        fixture,
        3,
        |s| Ok(vec![final_up_up(s, MeasurementStep::Skip)?]),
        |a| vec![0.25 * (a[0] + a[1] + a[2] + a[3]).norm_sqr()],
    )
}

fn compatibility(fixture: &Fixture) -> Outcome {
    let mut r = rng(fixture, 4);
    let cases = 200;
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let state = random_state(&mut r);
        let pair = pauli_pair(
            r.random_range(0.0..std::f64::consts::TAU),
            r.random_range(0.0..std::f64::consts::TAU),
        );
        let mut same_opposite: BTreeMap<Label, f64> = BTreeMap::new();
        for b in step_outcomes(&state, &MeasurementStep::Separate(pair.clone())).map_err(err)? {
            if let Some(Label::Pair { a, b: bv }) = b.label {
                *same_opposite.entry(Label::value(a * bv)).or_default() += b.prob;
            }
        }
        let functional = MeasurementStep::functional(&pair, &JointFunction::Product).map_err(err)?;
        let mut coarse: BTreeMap<Label, f64> = BTreeMap::new();
        for b in step_outcomes(&state, &functional).map_err(err)? {
            coarse.insert(b.label.expect("functional steps are labeled"), b.prob);
        }
        for key in same_opposite.keys().chain(coarse.keys()) {
            let d = same_opposite.get(key).unwrap_or(&0.0) - coarse.get(key).unwrap_or(&0.0);
            worst = worst.max(d.abs());
        }
    }
    Ok((
        worst <= TOL,
        format!("{cases} states and angle pairs, max same/opposite deviation {worst:.2e}"),
    ))
}

/// The orthogonal supplements written out for the z-product case: for the
/// "same" block `(-conj α(-1,-1) |1,1⟩ + conj α(1,1) |-1,-1⟩) / √p`, for the
/// "opposite" block `(-conj α(-1,1) |1,-1⟩ + conj α(1,-1) |-1,1⟩) / √p`.
fn explicit_supplements(a: &[Amplitude]) -> [Option<StateVector>; 2] {
    let zero = Amplitude::new(0.0, 0.0);
    let block = |i: usize, j: usize| {
        let p = a[i].norm_sqr() + a[j].norm_sqr();
        if p <= 1e-14 {
            return None;
        }
        let mut v = [zero; 4];
        v[i] = -a[j].conj();
        v[j] = a[i].conj();
        StateVector::normalized(v.to_vec()).ok()
    };
    [block(0, 3), block(1, 2)]
}

fn co_measurement(fixture: &Fixture) -> Outcome {
    let mut r = rng(fixture, 5);
    let cases = 200;
    let fo = function_observable(&z_pair(), &JointFunction::Product).map_err(err)?;
    let (mut prob_dev, mut state_dev, mut supp_dev): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..cases {
        let state = random_state(&mut r);
        let blocks = co_measurement_basis(&state, &fo).map_err(err)?;
        let joint = blocks
            .iter()
            .flat_map(|bl| {
                bl.vectors.iter().enumerate().map(|(k, v)| JointEigenvector {
                    a: bl.value,
                    b: k as f64,
                    vector: v.clone(),
                })
            })
            .collect();
        let lifted = MeasurementStep::Separate(CommutingPair::new(joint).map_err(err)?);

        let coarse = step_outcomes(&state, &z_product()).map_err(err)?;
        let mut fine: BTreeMap<Label, (f64, Vec<StateVector>)> = BTreeMap::new();
        for b in step_outcomes(&state, &lifted).map_err(err)? {
            if let Some(Label::Pair { a, .. }) = b.label {
                let e = fine.entry(Label::value(a)).or_default();
                e.0 += b.prob;
                e.1.push(b.post);
            }
        }
        if fine.len() != coarse.len() {
            return Ok((false, "lifted measurement has a different outcome set".into()));
        }
        for c in &coarse {
            let (p, posts) = &fine[&c.label.expect("labeled")];
            prob_dev = prob_dev.max((p - c.prob).abs());
            // only the seed vector of each block carries weight
            if posts.len() != 1 {
                return Ok((false, "lifted block has more than one reachable outcome".into()));
            }
            state_dev = state_dev.max(posts[0].phase_distance(&c.post));
        }

        for (block, want) in blocks.iter().zip(explicit_supplements(state.amps())) {
            if let Some(want) = want {
                supp_dev = supp_dev.max(block.vectors[1].phase_distance(&want));
            }
        }
    }
    let pass = prob_dev <= TOL && state_dev <= TOL && supp_dev <= TOL;
    Ok((
        pass,
        format!(
            "{cases} states, max deviation prob {prob_dev:.2e} post-state {state_dev:.2e} supplement {supp_dev:.2e}"
        ),
    ))
}

fn injective_collapse(fixture: &Fixture) -> Outcome {
    let mut r = rng(fixture, 6);
    let cases = 100;
    let signs = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let state = random_state(&mut r);
        let tau = std::f64::consts::TAU;
        let first = pauli_pair(r.random_range(0.0..tau), r.random_range(0.0..tau));
        let second = MeasurementStep::Separate(pauli_pair(r.random_range(0.0..tau), r.random_range(0.0..tau)));
        let offset: f64 = r.random_range(-1.0..1.0);
        let table: Vec<TableEntry> = signs
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| TableEntry {
                a,
                b,
                value: offset + k as f64,
            })
            .collect();
        let f = JointFunction::Table(table);
        let sep = Scenario::new(
            state.clone(),
            vec![MeasurementStep::Separate(first.clone()), second.clone()],
        )
        .map_err(err)?;
        let fun = Scenario::new(
            state,
            vec![MeasurementStep::functional(&first, &f).map_err(err)?, second],
        )
        .map_err(err)?;
        let ds = run_chain_analytic(&sep).map_err(err)?;
        let df = run_chain_analytic(&fun).map_err(err)?;
        if ds.entries().len() != df.entries().len() {
            return Ok((false, "outcome sets differ".into()));
        }
        for (seq, entry) in ds.entries() {
            let mut mapped = seq.clone();
            if let Label::Pair { a, b } = seq.0[0] {
                mapped.0[0] = Label::value(f.eval(a, b).ok_or("table lookup failed")?);
            }
            worst = worst.max((entry.prob - df.prob(&mapped)).abs());
        }
    }
    Ok((
        worst <= TOL,
        format!("{cases} random injective functions, max deviation {worst:.2e}"),
    ))
}

fn bell_discrimination(fixture: &Fixture) -> Outcome {
    let bell = bell_state(fixture)?;
    let chain = |first| {
        Scenario::new(
            bell.clone(),
            vec![first, MeasurementStep::Separate(pauli_pair(FRAC_PI_2, FRAC_PI_2))],
        )
        .map_err(err)
    };
    let separate = chain(MeasurementStep::Separate(z_pair()))?;
    let functional = chain(z_product())?;
    let disc = Discriminator::new(&separate, &functional, 1e-6).map_err(err)?;
    let n = required_samples(0.5, 1e-6).map_err(err)?;
    let report = disc.run(Hypothesis::B, fixture.seed).map_err(err)?;
    let pass = (disc.tv_distance() - 0.5).abs() <= TOL
        && disc.n_required() == 28
        && n == 28
        && matches!(report.decision, Decision::FavorsB | Decision::CertainB);
    Ok((
        pass,
        format!(
            "tv={} n_required={} decision(truth=functional)={}",
            sig12(disc.tv_distance()),
            disc.n_required(),
            report.decision
        ),
    ))
}
