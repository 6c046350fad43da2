//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use erasetest_core::{
    co_measurement_basis, function_observable, marginal, pauli_pair, required_samples, run_chain_analytic,
    sample_chain, step_outcomes, Amplitude, CommutingPair, Discriminator, Execution, Hypothesis, JointEigenvector,
    JointFunction, Label, MeasurementStep, Scenario, StateVector,
};
use erasetest_testkit::{
    closed_form_direct_x, closed_form_functional_then_x, closed_form_product_probs, compare_with_oracle, dense_chain,
    injective_table, random_angle, random_pair, random_real_state, random_scenario, random_state, rng,
};

const TOL: f64 = 1e-12;

type Verdict = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Verdict);

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bell() -> StateVector {
    StateVector::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap()
}

fn z_pair() -> CommutingPair {
    pauli_pair(0.0, 0.0)
}

fn z_product() -> MeasurementStep {
    MeasurementStep::functional(&z_pair(), &JointFunction::Product).unwrap()
}

fn z_then_x(initial: StateVector, first: MeasurementStep) -> Scenario {
    Scenario::new(
        initial,
        vec![first, MeasurementStep::Separate(pauli_pair(FRAC_PI_2, FRAC_PI_2))],
    )
    .unwrap()
}

fn final_up_up(initial: &StateVector, first: MeasurementStep) -> f64 {
    let dist = run_chain_analytic(&z_then_x(initial.clone(), first)).unwrap();
    marginal(&dist, dist.labeled_steps() - 1)
        .unwrap()
        .get(&Label::pair(1.0, 1.0))
        .copied()
        .unwrap_or(0.0)
}

fn bell_headline() -> Verdict {
    let b = bell();
    let got = [
        final_up_up(&b, MeasurementStep::Separate(z_pair())),
        final_up_up(&b, z_product()),
        final_up_up(&b, MeasurementStep::Skip),
    ];
    let ok = got.iter().zip([0.25, 0.5, 0.5]).all(|(g, w)| (g - w).abs() <= TOL);
    check(ok, format!("separate={} functional={} skip={}", got[0], got[1], got[2]))
}

fn closed_forms() -> Verdict {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let s = random_state(&mut r, 4);
        let (same, opposite) = closed_form_product_probs(s.amps());
        for b in step_outcomes(&s, &z_product()).unwrap() {
            let want = if b.label == Some(Label::value(1.0)) {
                same
            } else {
                opposite
            };
            worst = worst.max((b.prob - want).abs());
        }
        worst = worst.max((final_up_up(&s, z_product()) - closed_form_functional_then_x(s.amps())).abs());
        worst = worst.max((final_up_up(&s, MeasurementStep::Skip) - closed_form_direct_x(s.amps())).abs());
    }
    check(worst <= TOL, format!("1000 states, max deviation {worst:.2e}"))
}

fn dense_oracle() -> Verdict {
    let mut r = rng(2);
    let (mut prob_worst, mut state_worst): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let scn = random_scenario(&mut r);
        let dist = run_chain_analytic(&scn).unwrap();
        let (p, s) = compare_with_oracle(&dist, &dense_chain(&scn));
        prob_worst = prob_worst.max(p);
        state_worst = state_worst.max(s);
    }
    check(
        prob_worst <= TOL && state_worst <= TOL,
        format!("1000 scenarios, max probability deviation {prob_worst:.2e}, max state deviation {state_worst:.2e}"),
    )
}

fn compatibility() -> Verdict {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let s = random_state(&mut r, 4);
        let pair = pauli_pair(random_angle(&mut r), random_angle(&mut r));
        let mut separate: BTreeMap<Label, f64> = BTreeMap::new();
        for b in step_outcomes(&s, &MeasurementStep::Separate(pair.clone())).unwrap() {
            let Some(Label::Pair { a, b: bv }) = b.label else {
                return Err("unlabeled separate outcome".into());
            };
            *separate.entry(Label::value(a * bv)).or_default() += b.prob;
        }
        let functional = MeasurementStep::functional(&pair, &JointFunction::Product).unwrap();
        let mut coarse: BTreeMap<Label, f64> = BTreeMap::new();
        for b in step_outcomes(&s, &functional).unwrap() {
            coarse.insert(b.label.unwrap(), b.prob);
        }
        for key in separate.keys().chain(coarse.keys()) {
            worst = worst.max((separate.get(key).unwrap_or(&0.0) - coarse.get(key).unwrap_or(&0.0)).abs());
        }
    }
    check(
        worst <= TOL,
        format!("200 states and angle pairs, max deviation {worst:.2e}"),
    )
}

/// Supplement of the block spanned by basis states `i` and `j`, written out
/// directly from the amplitudes.
fn supplement(a: &[Amplitude], i: usize, j: usize, conjugate: bool) -> Option<StateVector> {
    let p = a[i].norm_sqr() + a[j].norm_sqr();
    if p <= 1e-14 {
        return None;
    }
    let c = |z: Amplitude| if conjugate { z.conj() } else { z };
    let mut v = vec![Amplitude::new(0.0, 0.0); 4];
    v[i] = -c(a[j]);
    v[j] = c(a[i]);
    StateVector::normalized(v).ok()
}

fn co_measurement() -> Verdict {
    let mut r = rng(4);
    let fo = function_observable(&z_pair(), &JointFunction::Product).unwrap();
    let (mut prob_dev, mut state_dev, mut supp_dev): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for case in 0..200 {
        // half real states, checked against the literal supplements; half
        // complex, checked against the conjugated form
        let real = case % 2 == 0;
        let s = if real {
            random_real_state(&mut r, 4)
        } else {
            random_state(&mut r, 4)
        };
        let blocks = co_measurement_basis(&s, &fo).unwrap();
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
        let lifted = MeasurementStep::Separate(CommutingPair::new(joint).unwrap());
        let coarse = step_outcomes(&s, &z_product()).unwrap();
        let fine = step_outcomes(&s, &lifted).unwrap();
        if coarse.len() != fine.len() {
            return Err(format!(
                "case {case}: {} coarse vs {} lifted outcomes",
                coarse.len(),
                fine.len()
            ));
        }
        for (c, f) in coarse.iter().zip(&fine) {
            let Some(Label::Pair { a, .. }) = f.label else {
                return Err("unlabeled lifted outcome".into());
            };
            if c.label != Some(Label::value(a)) {
                return Err(format!("case {case}: label mismatch"));
            }
            prob_dev = prob_dev.max((c.prob - f.prob).abs());
            state_dev = state_dev.max(c.post.phase_distance(&f.post));
        }
        for (block, (i, j)) in blocks.iter().zip([(0, 3), (1, 2)]) {
            let value = if i == 0 { 1.0 } else { -1.0 };
            if block.value != value {
                return Err(format!("case {case}: unexpected block order"));
            }
            if let Some(want) = supplement(s.amps(), i, j, !real) {
                supp_dev = supp_dev.max(block.vectors[1].phase_distance(&want));
            }
        }
    }
    let want = StateVector::from_real(&[-FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
    let bell_supp = co_measurement_basis(&bell(), &fo).unwrap()[0].vectors[1].phase_distance(&want);
    supp_dev = supp_dev.max(bell_supp);
    check(
        prob_dev <= TOL && state_dev <= TOL && supp_dev <= TOL,
        format!("200 states, max deviation prob {prob_dev:.2e} post-state {state_dev:.2e} supplement {supp_dev:.2e}"),
    )
}

fn injective_collapse() -> Verdict {
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let pair = random_pair(&mut r);
        let table = injective_table(&mut r);
        let initial = random_state(&mut r, 4);
        let second = MeasurementStep::Separate(random_pair(&mut r));
        let sep = Scenario::new(
            initial.clone(),
            vec![MeasurementStep::Separate(pair.clone()), second.clone()],
        )
        .unwrap();
        let fun = Scenario::new(
            initial,
            vec![MeasurementStep::functional(&pair, &table).unwrap(), second],
        )
        .unwrap();
        let ds = run_chain_analytic(&sep).unwrap();
        let df = run_chain_analytic(&fun).unwrap();
        if ds.entries().len() != df.entries().len() {
            return Err("outcome sets differ".into());
        }
        for (seq, entry) in ds.entries() {
            let Label::Pair { a, b } = seq.0[0] else {
                return Err("unlabeled first step".into());
            };
            let mut mapped = seq.clone();
            mapped.0[0] = Label::value(table.eval(a, b).unwrap());
            worst = worst.max((entry.prob - df.prob(&mapped)).abs());
        }
    }
    check(worst <= TOL, format!("100 cases, max deviation {worst:.2e}"))
}

fn monte_carlo() -> Verdict {
    let scn = z_then_x(bell(), z_product());
    let n = 100_000u64;
    let dist = run_chain_analytic(&scn).unwrap();
    let counts = sample_chain(&scn, 42, n).unwrap();
    if sample_chain(&scn, 42, n).unwrap() != counts {
        return Err("rerun with the same seed differs".into());
    }
    let mut worst_sigmas: f64 = 0.0;
    for step in 0..dist.labeled_steps() {
        let probs = marginal(&dist, step).unwrap();
        let observed = erasetest_core::sampling::marginal_counts(&counts, step).unwrap();
        for key in probs.keys().chain(observed.keys()) {
            let p = probs.get(key).copied().unwrap_or(0.0);
            let freq = observed.get(key).copied().unwrap_or(0) as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            let dev = (freq - p).abs();
            if sigma == 0.0 {
                if dev > TOL {
                    return Err(format!("impossible outcome {key} observed"));
                }
            } else {
                worst_sigmas = worst_sigmas.max(dev / sigma);
            }
        }
    }
    check(
        worst_sigmas <= 4.0,
        format!("n={n}, worst deviation {worst_sigmas:.2} sigma, reruns bit-identical"),
    )
}

fn discrimination() -> Verdict {
    let n28 = required_samples(0.5, 1e-6).map_err(|e| e.to_string())?;
    if n28 != 28 {
        return Err(format!("required_samples(0.5, 1e-6) = {n28}"));
    }
    let separate = z_then_x(bell(), MeasurementStep::Separate(z_pair()));
    let functional = z_then_x(bell(), z_product());
    let disc = Discriminator::new(&separate, &functional, 0.01).unwrap();
    let reps = 10_000u64;
    let mut rates = Vec::new();
    for (truth, seed) in [(Hypothesis::A, 0), (Hypothesis::B, 1_000_000)] {
        let tally = disc.repeat(truth, seed, reps, Execution::default()).unwrap();
        // an inconclusive verdict counts as wrong
        let right: u64 = tally
            .iter()
            .filter(|(d, _)| d.favored() == Some(truth))
            .map(|(_, c)| c)
            .sum();
        rates.push((reps - right) as f64 / reps as f64);
    }
    let ok = rates.iter().all(|&r| r <= 0.02);
    check(
        ok,
        format!(
            "required_samples=28, n_required(alpha=0.01)={}, wrong-decision rate A={:.4} B={:.4} over {reps} repeats",
            disc.n_required(),
            rates[0],
            rates[1]
        ),
    )
}

fn paper_check() -> Verdict {
    let out = Command::new(env!("CARGO_BIN_EXE_erasetest"))
        .arg("paper-check")
        .output()
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&out.stdout);
    let items = ["PASS bell-headline", "PASS compatibility", "PASS co-measurement"];
    let missing: Vec<&str> = items.iter().copied().filter(|i| !text.contains(i)).collect();
    check(
        out.status.code() == Some(0) && missing.is_empty(),
        format!("exit {:?}, missing report items {missing:?}", out.status.code()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("bell headline", Duration::from_secs(1), bell_headline),
        ("closed forms", Duration::from_secs(5), closed_forms),
        ("dense oracle", Duration::from_secs(30), dense_oracle),
        ("compatibility", Duration::MAX, compatibility),
        ("co-measurement", Duration::MAX, co_measurement),
        ("injective collapse", Duration::MAX, injective_collapse),
        ("monte carlo", Duration::from_secs(10), monte_carlo),
        ("discrimination", Duration::from_secs(60), discrimination),
        ("paper-check", Duration::MAX, paper_check),
    ];
    let mut failed = 0;
    for (k, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let (pass, mut detail) = match verdict {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        let in_time = elapsed <= budget;
        if !in_time {
            detail.push_str(&format!("; over the {budget:?} budget"));
        }
        let pass = pass && in_time;
        failed += usize::from(!pass);
        println!(
            "criterion {}: {} {name} ({:.2}s) {detail}",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
