//! Deciding between the two measurement models from finite samples.
//!
//! The predictions under each hypothesis are exact, so the test is a
//! fixed-sample likelihood ratio between two known distributions. Sample
//! sizes come from the Hoeffding bound `ceil(ln(1/alpha) / (2 tv^2))`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::exec::{fold_indices, Execution};
use crate::hilbert::{PROB_ZERO, TOL_NORM};
use crate::measurement::{marginal, Label, OutcomeTree, Scenario};
use crate::sampling::{marginal_counts, sample_tree};

/// Total variation distances at or below this are treated as zero.
pub const TV_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Decision {
    FavorsA,
    FavorsB,
    Inconclusive,
    CertainA,
    CertainB,
}

impl Decision {
    /// The hypothesis this decision supports, if any.
    pub fn favored(self) -> Option<Hypothesis> {
        match self {
            Decision::FavorsA | Decision::CertainA => Some(Hypothesis::A),
            Decision::FavorsB | Decision::CertainB => Some(Hypothesis::B),
            Decision::Inconclusive => None,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Decision::FavorsA => "FavorsA",
            Decision::FavorsB => "FavorsB",
            Decision::Inconclusive => "Inconclusive",
            Decision::CertainA => "CertainA",
            Decision::CertainB => "CertainB",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisTestReport {
    pub tv_distance: f64,
    /// `None` when the two predictions coincide.
    pub n_required: Option<u64>,
    /// `ln L_A − ln L_B`; infinite when an observation rules one side out.
    pub log_odds: f64,
    pub decision: Decision,
    pub alpha: f64,
}

/// Half the L1 distance; labels missing from one side count as zero.
pub fn total_variation<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let mut sum = 0.0;
    for (k, &pk) in p {
        sum += (pk - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, &qk) in q {
        if !p.contains_key(k) {
            sum += qk.abs();
        }
    }
    (0.5 * sum).clamp(0.0, 1.0)
}

pub fn required_samples(tv: f64, alpha: f64) -> Result<u64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} outside (0, 1)")));
    }
    if tv.is_nan() || tv > 1.0 + TOL_NORM {
        return Err(Error::InvalidArgument(format!("total variation {tv} outside (0, 1]")));
    }
    if tv <= TV_ZERO {
        return Err(Error::Indistinguishable { tv });
    }
    let tv = tv.min(1.0);
    let n = ((1.0 / alpha).ln() / (2.0 * tv * tv)).ceil();
    Ok((n as u64).max(1))
}

pub fn likelihood_ratio_test<K: Ord + fmt::Display>(
    counts: &BTreeMap<K, u64>,
    p_a: &BTreeMap<K, f64>,
    p_b: &BTreeMap<K, f64>,
    alpha: f64,
) -> Result<HypothesisTestReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} outside (0, 1)")));
    }
    if counts.values().all(|&c| c == 0) {
        return Err(Error::InvalidArgument("no observations".into()));
    }
    let tv = total_variation(p_a, p_b);
    let n_required = required_samples(tv, alpha).ok();

    let mut log_odds = 0.0;
    let (mut rules_out_a, mut rules_out_b) = (None, None);
    for (label, &count) in counts.iter().filter(|(_, &c)| c > 0) {
        let pa = p_a.get(label).copied().unwrap_or(0.0);
        let pb = p_b.get(label).copied().unwrap_or(0.0);
        match (pa > PROB_ZERO, pb > PROB_ZERO) {
            (true, true) => log_odds += count as f64 * (pa.ln() - pb.ln()),
            (true, false) => rules_out_b = Some(label),
            (false, true) => rules_out_a = Some(label),
            (false, false) => {
                return Err(Error::ModelMismatch {
                    label: label.to_string(),
                })
            }
        }
    }

    let threshold = (1.0 / alpha).ln();
    let (decision, log_odds) = match (rules_out_a, rules_out_b) {
        (Some(a), Some(b)) => {
            return Err(Error::ModelMismatch {
                label: format!("{a} together with {b}"),
            });
        }
        (None, Some(_)) => (Decision::CertainA, f64::INFINITY),
        (Some(_), None) => (Decision::CertainB, f64::NEG_INFINITY),
        (None, None) if log_odds > threshold => (Decision::FavorsA, log_odds),
        (None, None) if log_odds < -threshold => (Decision::FavorsB, log_odds),
        (None, None) => (Decision::Inconclusive, log_odds),
    };
    Ok(HypothesisTestReport {
        tv_distance: tv,
        n_required,
        log_odds,
        decision,
        alpha,
    })
}

/// Precomputed predictions for a pair of rival scenarios, compared on the
/// final labeled step of each.
#[derive(Debug, Clone)]
pub struct Discriminator {
    trees: [OutcomeTree; 2],
    last: [usize; 2],
    predictions: [BTreeMap<Label, f64>; 2],
    tv: f64,
    n_required: u64,
    alpha: f64,
}

impl Discriminator {
    pub fn new(scn_a: &Scenario, scn_b: &Scenario, alpha: f64) -> Result<Self> {
        check_comparable(scn_a, scn_b)?;
        let build = |scn: &Scenario| -> Result<(OutcomeTree, usize, BTreeMap<Label, f64>)> {
            let tree = OutcomeTree::build(scn)?;
            let last = scn.labeled_steps() - 1;
            let prediction = marginal(&tree.distribution(), last)?;
            Ok((tree, last, prediction))
        };
        let (tree_a, last_a, pred_a) = build(scn_a)?;
        let (tree_b, last_b, pred_b) = build(scn_b)?;
        let tv = total_variation(&pred_a, &pred_b);
        let n_required = required_samples(tv, alpha)?;
        Ok(Self {
            trees: [tree_a, tree_b],
            last: [last_a, last_b],
            predictions: [pred_a, pred_b],
            tv,
            n_required,
            alpha,
        })
    }

    pub fn tv_distance(&self) -> f64 {
        self.tv
    }

    pub fn n_required(&self) -> u64 {
        self.n_required
    }

    pub fn prediction(&self, h: Hypothesis) -> &BTreeMap<Label, f64> {
        &self.predictions[index(h)]
    }

    /// Samples `n_required` trials from the `truth` scenario and tests them.
    pub fn run(&self, truth: Hypothesis, seed: u64) -> Result<HypothesisTestReport> {
        self.run_with(truth, seed, Execution::Sequential)
    }

    pub fn run_with(&self, truth: Hypothesis, seed: u64, exec: Execution) -> Result<HypothesisTestReport> {
        let i = index(truth);
        let counts = sample_tree(&self.trees[i], seed, self.n_required, exec)?;
        let observed = marginal_counts(&counts, self.last[i])?;
        let mut report = likelihood_ratio_test(&observed, &self.predictions[0], &self.predictions[1], self.alpha)?;
        report.n_required = Some(self.n_required);
        Ok(report)
    }

    /// Runs `repetitions` independent discriminations with seeds
    /// `base_seed, base_seed + 1, ...` and tallies the decisions.
    pub fn repeat(
        &self,
        truth: Hypothesis,
        base_seed: u64,
        repetitions: u64,
        exec: Execution,
    ) -> Result<BTreeMap<Decision, u64>> {
        fold_indices(
            repetitions,
            exec,
            || Ok(BTreeMap::new()),
            |acc: Result<BTreeMap<Decision, u64>>, r| {
                let mut tally = acc?;
                let report = self.run(truth, base_seed.wrapping_add(r))?;
                *tally.entry(report.decision).or_insert(0) += 1;
                Ok(tally)
            },
            |a, b| {
                let (mut a, b) = (a?, b?);
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                Ok(a)
            },
        )
    }
}

fn index(h: Hypothesis) -> usize {
    match h {
        Hypothesis::A => 0,
        Hypothesis::B => 1,
    }
}

/// Rival scenarios share the initial state and step count and differ only in
/// how each step is measured.
fn check_comparable(a: &Scenario, b: &Scenario) -> Result<()> {
    if a.initial().dim() != b.initial().dim() {
        return Err(Error::Dimension {
            expected: a.initial().dim(),
            found: b.initial().dim(),
        });
    }
    if a.initial().phase_distance(b.initial()) > TOL_NORM {
        return Err(Error::InvalidScenario("scenarios start from different states".into()));
    }
    if a.steps().len() != b.steps().len() {
        return Err(Error::InvalidScenario(format!(
            "scenarios have {} and {} steps",
            a.steps().len(),
            b.steps().len()
        )));
    }
    Ok(())
}

pub fn run_discrimination(
    scn_a: &Scenario,
    scn_b: &Scenario,
    truth: Hypothesis,
    seed: u64,
    alpha: f64,
) -> Result<HypothesisTestReport> {
    Discriminator::new(scn_a, scn_b, alpha)?.run(truth, seed)
}
