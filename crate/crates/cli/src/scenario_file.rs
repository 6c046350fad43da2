//! JSON scenario files.
//!
//! ```json
//! {
//!   "dim_a": 2, "dim_b": 2,
//!   "initial": [[0.7071067811865476, 0], [0, 0], [0, 0], [0.7071067811865476, 0]],
//!   "steps": [
//!     {"model": "functional", "observable": {"kind": "pauli_pair", "theta": 0, "phi": 0}, "f": "product"},
//!     {"model": "separate", "observable": {"kind": "pauli_pair", "theta": 1.5707963267948966, "phi": 1.5707963267948966}}
//!   ]
//! }
//! ```
//!
//! Amplitudes are `[re, im]` pairs in row-major order with particle A as the
//! slow index. Custom observables list their joint eigenvectors with the
//! eigenvalue pair of each.

use std::fmt;

use erasetest_core::{
    pauli_pair, Amplitude, CommutingPair, FunctionObservable, JointEigenvector, JointFunction, MeasurementStep,
    Scenario, StateVector, TableEntry,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub dim_a: usize,
    pub dim_b: usize,
    pub initial: Vec<[f64; 2]>,
    pub steps: Vec<StepRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Separate,
    Functional,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRecord {
    pub model: ModelName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<ObservableSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<FunctionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    PauliPair { theta: f64, phi: f64 },
    Custom { joint: Vec<JointRecord> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointRecord {
    pub a: f64,
    pub b: f64,
    pub vector: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Named(FunctionName),
    Table { table: Vec<TableRecord> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionName {
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRecord {
    pub a: f64,
    pub b: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileErrorKind {
    /// Not valid JSON or does not match the schema.
    Parse,
    /// Well-formed, but describes an invalid scenario.
    Invariant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FileError {
    pub kind: FileErrorKind,
    pub path: String,
    pub reason: String,
}

impl FileError {
    fn parse(path: impl Into<String>, reason: impl fmt::Display) -> Self {
        Self {
            kind: FileErrorKind::Parse,
            path: path.into(),
            reason: reason.to_string(),
        }
    }

    fn invariant(path: impl Into<String>, reason: impl fmt::Display) -> Self {
        Self {
            kind: FileErrorKind::Invariant,
            path: path.into(),
            reason: reason.to_string(),
        }
    }
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.reason)
        } else {
            write!(f, "{}: {}", self.path, self.reason)
        }
    }
}

impl std::error::Error for FileError {}

/// A scenario together with its two-particle factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub dim_a: usize,
    pub dim_b: usize,
    pub scenario: Scenario,
}

pub fn parse_scenario(text: &str) -> Result<LoadedScenario, FileError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| FileError::parse("", e))?;
    file.to_scenario()
}

fn amplitudes(values: &[[f64; 2]]) -> Vec<Amplitude> {
    values.iter().map(|&[re, im]| Amplitude::new(re, im)).collect()
}

fn pairs(amps: &[Amplitude]) -> Vec<[f64; 2]> {
    amps.iter().map(|a| [a.re, a.im]).collect()
}

impl ScenarioFile {
    pub fn to_scenario(&self) -> Result<LoadedScenario, FileError> {
        if self.dim_a == 0 || self.dim_b == 0 {
            return Err(FileError::invariant("dim_a", "dimensions must be positive"));
        }
        let dim = self.dim_a * self.dim_b;
        if self.initial.len() != dim {
            return Err(FileError::invariant(
                "initial",
                format!(
                    "expected {dim} amplitudes (dim_a * dim_b), found {}",
                    self.initial.len()
                ),
            ));
        }
        let initial = StateVector::new(amplitudes(&self.initial)).map_err(|e| FileError::invariant("initial", e))?;
        let steps = self
            .steps
            .iter()
            .enumerate()
            .map(|(i, step)| self.step(i, step))
            .collect::<Result<Vec<_>, _>>()?;
        let scenario = Scenario::new(initial, steps).map_err(|e| FileError::invariant("steps", e))?;
        Ok(LoadedScenario {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            scenario,
        })
    }

    fn step(&self, i: usize, step: &StepRecord) -> Result<MeasurementStep, FileError> {
        let at = |key: &str| format!("steps[{i}].{key}");
        if step.model == ModelName::Skip {
            if step.observable.is_some() || step.f.is_some() {
                return Err(FileError::parse(at("model"), "skip steps take no observable or f"));
            }
            return Ok(MeasurementStep::Skip);
        }
        let spec = step
            .observable
            .as_ref()
            .ok_or_else(|| FileError::parse(at("observable"), "missing"))?;
        let pair = self.pair(spec, &at("observable"))?;
        match (step.model, &step.f) {
            (ModelName::Separate, None) => Ok(MeasurementStep::Separate(pair)),
            (ModelName::Separate, Some(_)) => Err(FileError::parse(at("f"), "only functional steps take f")),
            (ModelName::Functional, None) => Err(FileError::parse(at("f"), "missing")),
            (ModelName::Functional, Some(spec)) => {
                let f = match spec {
                    FunctionSpec::Named(FunctionName::Product) => JointFunction::Product,
                    FunctionSpec::Table { table } => JointFunction::Table(
                        table
                            .iter()
                            .map(|t| TableEntry {
                                a: t.a,
                                b: t.b,
                                value: t.value,
                            })
                            .collect(),
                    ),
                };
                MeasurementStep::functional(&pair, &f).map_err(|e| FileError::invariant(at("f"), e))
            }
            (ModelName::Skip, _) => unreachable!(),
        }
    }

    fn pair(&self, spec: &ObservableSpec, at: &str) -> Result<CommutingPair, FileError> {
        match spec {
            ObservableSpec::PauliPair { theta, phi } => {
                if (self.dim_a, self.dim_b) != (2, 2) {
                    return Err(FileError::invariant(at, "pauli_pair requires dim_a = dim_b = 2"));
                }
                if !theta.is_finite() || !phi.is_finite() {
                    return Err(FileError::invariant(at, "angles must be finite"));
                }
                Ok(pauli_pair(*theta, *phi))
            }
            ObservableSpec::Custom { joint } => {
                let vectors = joint
                    .iter()
                    .enumerate()
                    .map(|(k, j)| {
                        let vector = StateVector::new(amplitudes(&j.vector))
                            .map_err(|e| FileError::invariant(format!("{at}.joint[{k}].vector"), e))?;
                        Ok(JointEigenvector { a: j.a, b: j.b, vector })
                    })
                    .collect::<Result<Vec<_>, FileError>>()?;
                CommutingPair::new(vectors).map_err(|e| FileError::invariant(format!("{at}.joint"), e))
            }
        }
    }

    /// Serializes a scenario. Observables are written as explicit joint
    /// eigenbases so that reparsing reproduces every amplitude exactly.
    pub fn from_scenario(dim_a: usize, dim_b: usize, scn: &Scenario) -> Self {
        let custom = |pair: &CommutingPair| ObservableSpec::Custom {
            joint: pair
                .joint()
                .iter()
                .map(|j| JointRecord {
                    a: j.a,
                    b: j.b,
                    vector: pairs(j.vector.amps()),
                })
                .collect(),
        };
        let function = |fo: &FunctionObservable| match fo.function() {
            JointFunction::Product => FunctionSpec::Named(FunctionName::Product),
            JointFunction::Table(entries) => FunctionSpec::Table {
                table: entries
                    .iter()
                    .map(|e| TableRecord {
                        a: e.a,
                        b: e.b,
                        value: e.value,
                    })
                    .collect(),
            },
        };
        let steps = scn
            .steps()
            .iter()
            .map(|step| match step {
                MeasurementStep::Skip => StepRecord {
                    model: ModelName::Skip,
                    observable: None,
                    f: None,
                },
                MeasurementStep::Separate(pair) => StepRecord {
                    model: ModelName::Separate,
                    observable: Some(custom(pair)),
                    f: None,
                },
                MeasurementStep::Functional(fo) => StepRecord {
                    model: ModelName::Functional,
                    observable: Some(custom(fo.pair())),
                    f: Some(function(fo)),
                },
            })
            .collect();
        ScenarioFile {
            dim_a,
            dim_b,
            initial: pairs(scn.initial().amps()),
            steps,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario files serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BELL: &str = r#"{
        "dim_a": 2, "dim_b": 2,
        "initial": [[0.7071067811865476, 0], [0, 0], [0, 0], [0.7071067811865476, 0]],
        "steps": [
            {"model": "functional", "observable": {"kind": "pauli_pair", "theta": 0, "phi": 0}, "f": "product"},
            {"model": "separate", "observable": {"kind": "pauli_pair", "theta": 1.5707963267948966, "phi": 1.5707963267948966}}
        ]
    }"#;

    #[test]
    fn parses_bell_file() {
        let loaded = parse_scenario(BELL).unwrap();
        assert_eq!(loaded.scenario.steps().len(), 2);
        assert_eq!(loaded.scenario.steps()[0].model(), erasetest_core::Model::Functional);
    }

    #[test]
    fn round_trip_is_exact() {
        let loaded = parse_scenario(BELL).unwrap();
        let text = ScenarioFile::from_scenario(2, 2, &loaded.scenario).to_json();
        let again = parse_scenario(&text).unwrap();
        assert_eq!(again.scenario, loaded.scenario);
    }

    #[test]
    fn schema_errors_are_parse_errors() {
        for bad in [
            "not json",
            r#"{"dim_a": 2, "dim_b": 2, "initial": [], "steps": [], "extra": 1}"#,
            r#"{"dim_a": 2, "dim_b": 2, "initial": [[1,0],[0,0],[0,0],[0,0]], "steps": [{"model": "weak"}]}"#,
            r#"{"dim_a": 2, "dim_b": 2, "initial": [[1,0],[0,0],[0,0],[0,0]], "steps": [{"model": "functional", "observable": {"kind": "pauli_pair", "theta": 0, "phi": 0}}]}"#,
            r#"{"dim_a": 2, "dim_b": 2, "initial": [[1,0],[0,0],[0,0],[0,0]], "steps": [{"model": "separate"}]}"#,
        ] {
            assert_eq!(parse_scenario(bad).unwrap_err().kind, FileErrorKind::Parse, "{bad}");
        }
    }

    #[test]
    fn invariant_errors_carry_key_paths() {
        let unnormalized = BELL.replace("[0.7071067811865476, 0], [0, 0]", "[0.7071077811865476, 0], [0, 0]");
        let err = parse_scenario(&unnormalized).unwrap_err();
        assert_eq!(err.kind, FileErrorKind::Invariant);
        assert_eq!(err.path, "initial");

        let custom = r#"{"dim_a": 1, "dim_b": 2, "initial": [[1,0],[0,0]], "steps": [
            {"model": "separate", "observable": {"kind": "custom", "joint": [
                {"a": 1, "b": 0, "vector": [[1,0],[0,0]]},
                {"a": 2, "b": 0, "vector": [[1,0],[0,0]]}]}}]}"#;
        let err = parse_scenario(custom).unwrap_err();
        assert_eq!(err.kind, FileErrorKind::Invariant);
        assert_eq!(err.path, "steps[0].observable.joint");

        let partial = BELL.replace(r#""f": "product""#, r#""f": {"table": [{"a": 1, "b": 1, "value": 1}]}"#);
        let err = parse_scenario(&partial).unwrap_err();
        assert_eq!((err.kind, err.path.as_str()), (FileErrorKind::Invariant, "steps[0].f"));

        let wrong_len = BELL.replace(r#""dim_b": 2"#, r#""dim_b": 3"#);
        assert_eq!(parse_scenario(&wrong_len).unwrap_err().path, "initial");
    }
}
