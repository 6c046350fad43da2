//! Subcommand implementations. Each returns the rendered stdout text or a
//! [`CliError`] carrying the process exit code.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use clap::ValueEnum;
use erasetest_core::{
    marginal, run_chain_analytic, sample_chain, Discriminator, Error, Hypothesis, Label, OutcomeSequence, Scenario,
};
use serde_json::{json, Value};

use crate::render::{self, label_json, sequence_json, sig12, sig12_json, Format, Table};
use crate::scenario_file::{parse_scenario, FileErrorKind, LoadedScenario};

pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_INDISTINGUISHABLE: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Indistinguishable { .. } => EXIT_INDISTINGUISHABLE,
            Error::Index { .. } | Error::InvalidArgument(_) => EXIT_PARSE,
            _ => EXIT_INVARIANT,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

pub fn load(path: &Path) -> Result<LoadedScenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError {
        code: EXIT_PARSE,
        message: format!("{}: {e}", path.display()),
    })?;
    parse_scenario(&text).map_err(|e| CliError {
        code: match e.kind {
            FileErrorKind::Parse => EXIT_PARSE,
            FileErrorKind::Invariant => EXIT_INVARIANT,
        },
        message: format!("{}: {e}", path.display()),
    })
}

/// Which labeled step to marginalize onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepSelector {
    Index(usize),
    Last,
}

impl StepSelector {
    fn resolve(self, scn: &Scenario) -> usize {
        match self {
            StepSelector::Index(i) => i,
            StepSelector::Last => scn.labeled_steps() - 1,
        }
    }
}

impl FromStr for StepSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "last" {
            return Ok(StepSelector::Last);
        }
        s.parse()
            .map(StepSelector::Index)
            .map_err(|_| format!("expected a step index or `last`, got `{s}`"))
    }
}

pub fn analytic(scn: &Scenario, select: Option<StepSelector>, format: Format) -> Result<String, CliError> {
    let dist = run_chain_analytic(scn)?;
    match select {
        None => Ok(render::distribution(&dist, format)),
        Some(sel) => {
            let step = sel.resolve(scn);
            Ok(render::marginal(step, &marginal(&dist, step)?, format))
        }
    }
}

/// Four binomial standard deviations around `p` for `n` trials.
pub fn four_sigma(p: f64, n: u64) -> f64 {
    4.0 * (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

fn within_band(freq: f64, p: f64, n: u64) -> bool {
    (freq - p).abs() <= four_sigma(p, n).max(1e-12)
}

struct SampleRow<K> {
    key: K,
    count: u64,
    prob: f64,
}

fn sample_rows<K: Ord + Clone>(counts: &BTreeMap<K, u64>, probs: &BTreeMap<K, f64>) -> Vec<SampleRow<K>> {
    let mut keys: Vec<&K> = probs.keys().chain(counts.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|k| SampleRow {
            key: k.clone(),
            count: counts.get(k).copied().unwrap_or(0),
            prob: probs.get(k).copied().unwrap_or(0.0),
        })
        .collect()
}

pub fn sample(
    scn: &Scenario,
    seed: u64,
    n: u64,
    select: Option<StepSelector>,
    format: Format,
) -> Result<String, CliError> {
    let dist = run_chain_analytic(scn)?;
    let counts = sample_chain(scn, seed, n)?;
    match select {
        None => {
            let probs: BTreeMap<OutcomeSequence, f64> =
                dist.entries().iter().map(|(s, e)| (s.clone(), e.prob)).collect();
            let rows = sample_rows(&counts, &probs);
            Ok(render_samples(
                &rows,
                seed,
                n,
                None,
                format,
                |s| s.to_string(),
                sequence_json,
            ))
        }
        Some(sel) => {
            let step = sel.resolve(scn);
            let probs = marginal(&dist, step)?;
            let counts = erasetest_core::sampling::marginal_counts(&counts, step)?;
            let rows = sample_rows(&counts, &probs);
            Ok(render_samples(
                &rows,
                seed,
                n,
                Some(step),
                format,
                Label::to_string,
                label_json,
            ))
        }
    }
}

fn render_samples<K>(
    rows: &[SampleRow<K>],
    seed: u64,
    n: u64,
    step: Option<usize>,
    format: Format,
    text: impl Fn(&K) -> String,
    to_json: impl Fn(&K) -> Value,
) -> String {
    let all_pass = rows.iter().all(|r| within_band(r.count as f64 / n as f64, r.prob, n));
    let status = |pass: bool| if pass { "PASS" } else { "FAIL" };
    match format {
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let freq = r.count as f64 / n as f64;
                    json!({
                        "outcome": to_json(&r.key),
                        "text": text(&r.key),
                        "count": r.count,
                        "frequency": sig12_json(freq),
                        "analytic": sig12_json(r.prob),
                        "tolerance": sig12_json(four_sigma(r.prob, n)),
                        "status": status(within_band(freq, r.prob, n)),
                    })
                })
                .collect();
            let doc = json!({ "seed": seed, "n": n, "step": step, "rows": items, "status": status(all_pass) });
            format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
        }
        _ => {
            let mut table = Table::new(&["outcome", "count", "frequency", "analytic", "tolerance", "status"]);
            for r in rows {
                let freq = r.count as f64 / n as f64;
                table.push(vec![
                    text(&r.key),
                    r.count.to_string(),
                    sig12(freq),
                    sig12(r.prob),
                    sig12(four_sigma(r.prob, n)),
                    status(within_band(freq, r.prob, n)).to_string(),
                ]);
            }
            let mut out = table.render(format);
            if format == Format::Table {
                out.push_str(&format!("# seed={seed} n={n} overall={}\n", status(all_pass)));
            }
            out
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Truth {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
}

impl From<Truth> for Hypothesis {
    fn from(t: Truth) -> Self {
        match t {
            Truth::A => Hypothesis::A,
            Truth::B => Hypothesis::B,
        }
    }
}

pub fn discriminate(
    scn_a: &Scenario,
    scn_b: &Scenario,
    truth: Truth,
    alpha: f64,
    seed: u64,
    format: Format,
) -> Result<String, CliError> {
    let disc = Discriminator::new(scn_a, scn_b, alpha)?;
    let report = disc.run(truth.into(), seed)?;
    let n_required = report.n_required.expect("discriminator always sizes the sample");
    let truth_name = if truth == Truth::A { "A" } else { "B" };
    match format {
        Format::Json => {
            let prediction = |h| -> Vec<Value> {
                disc.prediction(h)
                    .iter()
                    .map(|(l, p)| json!({ "label": label_json(l), "prob": sig12_json(*p) }))
                    .collect()
            };
            let doc = json!({
                "tv_distance": sig12_json(report.tv_distance),
                "n_required": n_required,
                "log_odds": sig12_json(report.log_odds),
                "decision": report.decision.to_string(),
                "alpha": report.alpha,
                "truth": truth_name,
                "seed": seed,
                "prediction_a": prediction(Hypothesis::A),
                "prediction_b": prediction(Hypothesis::B),
            });
            Ok(format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()))
        }
        _ => {
            let mut table = Table::new(&["field", "value"]);
            for (k, v) in [
                ("tv_distance", sig12(report.tv_distance)),
                ("n_required", n_required.to_string()),
                ("log_odds", sig12(report.log_odds)),
                ("decision", report.decision.to_string()),
                ("alpha", report.alpha.to_string()),
                ("truth", truth_name.to_string()),
                ("seed", seed.to_string()),
            ] {
                table.push(vec![k.to_string(), v]);
            }
            Ok(table.render(format))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_selector_parsing() {
        assert_eq!("last".parse::<StepSelector>(), Ok(StepSelector::Last));
        assert_eq!("2".parse::<StepSelector>(), Ok(StepSelector::Index(2)));
        assert!("-1".parse::<StepSelector>().is_err());
    }

    #[test]
    fn band_edges() {
        assert!(within_band(0.5, 0.5, 100));
        assert!(within_band(0.0, 0.0, 100));
        assert!(!within_band(0.01, 0.0, 100));
        assert!((four_sigma(0.5, 100_000) - 0.006_324_555_320_336_759).abs() < 1e-15);
    }

    #[test]
    fn error_codes() {
        assert_eq!(
            CliError::from(Error::Indistinguishable { tv: 0.0 }).code,
            EXIT_INDISTINGUISHABLE
        );
        assert_eq!(CliError::from(Error::Index { index: 3, len: 2 }).code, EXIT_PARSE);
        assert_eq!(CliError::from(Error::EmptyState).code, EXIT_INVARIANT);
    }
}
