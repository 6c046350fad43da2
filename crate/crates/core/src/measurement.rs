//! Sequential measurement chains under the two competing models.
//!
//! A *separate* step measures both members of a commuting pair and collapses
//! onto a single joint eigenvector. A *functional* step records only
//! `f(a, b)` and collapses onto the normalized projection into the
//! corresponding (possibly degenerate) eigenspace. A *skip* step leaves the
//! state untouched and records nothing.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::hilbert::{dot, project, StateVector, PROB_ZERO, TOL_NORM};
use crate::observables::{function_observable, CommutingPair, FunctionObservable, JointFunction};

/// The recorded result of one measurement step.
#[derive(Debug, Clone, Copy)]
pub enum Label {
    /// Both eigenvalues of a separate measurement.
    Pair { a: f64, b: f64 },
    /// The function value of a functional measurement.
    Value(f64),
}

impl Label {
    pub fn pair(a: f64, b: f64) -> Self {
        Label::Pair {
            a: clean_zero(a),
            b: clean_zero(b),
        }
    }

    pub fn value(v: f64) -> Self {
        Label::Value(clean_zero(v))
    }

    fn key(&self) -> (u8, f64, f64) {
        match *self {
            Label::Pair { a, b } => (0, a, b),
            Label::Value(v) => (1, v, 0.0),
        }
    }
}

fn clean_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

impl PartialEq for Label {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Label {}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        let (ka, a1, a2) = self.key();
        let (kb, b1, b2) = other.key();
        ka.cmp(&kb).then(a1.total_cmp(&b1)).then(a2.total_cmp(&b2))
    }
}

impl Hash for Label {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let (k, x, y) = self.key();
        k.hash(state);
        x.to_bits().hash(state);
        y.to_bits().hash(state);
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Pair { a, b } => write!(f, "({a},{b})"),
            Label::Value(v) => write!(f, "{v}"),
        }
    }
}

/// One label per non-skip step, in step order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OutcomeSequence(pub Vec<Label>);

impl OutcomeSequence {
    pub fn labels(&self) -> &[Label] {
        &self.0
    }
}

impl fmt::Display for OutcomeSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, label) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{label}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Separate,
    Functional,
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasurementStep {
    Separate(CommutingPair),
    Functional(FunctionObservable),
    Skip,
}

impl MeasurementStep {
    pub fn functional(pair: &CommutingPair, f: &JointFunction) -> Result<Self> {
        Ok(MeasurementStep::Functional(function_observable(pair, f)?))
    }

    pub fn model(&self) -> Model {
        match self {
            MeasurementStep::Separate(_) => Model::Separate,
            MeasurementStep::Functional(_) => Model::Functional,
            MeasurementStep::Skip => Model::Skip,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            MeasurementStep::Separate(pair) => Some(pair.dim()),
            MeasurementStep::Functional(fo) => Some(fo.pair().dim()),
            MeasurementStep::Skip => None,
        }
    }

    pub fn is_labeled(&self) -> bool {
        !matches!(self, MeasurementStep::Skip)
    }
}

/// An initial state followed by an ordered list of measurement steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    initial: StateVector,
    steps: Vec<MeasurementStep>,
}

impl Scenario {
    pub fn new(initial: StateVector, steps: Vec<MeasurementStep>) -> Result<Self> {
        for step in &steps {
            if let Some(dim) = step.dim() {
                if dim != initial.dim() {
                    return Err(Error::Dimension {
                        expected: initial.dim(),
                        found: dim,
                    });
                }
            }
        }
        if !steps.iter().any(MeasurementStep::is_labeled) {
            return Err(Error::InvalidScenario(
                "at least one step must measure something".into(),
            ));
        }
        Ok(Self { initial, steps })
    }

    pub fn initial(&self) -> &StateVector {
        &self.initial
    }

    pub fn steps(&self) -> &[MeasurementStep] {
        &self.steps
    }

    pub fn labeled_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.is_labeled()).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// `None` only for skip steps.
    pub label: Option<Label>,
    pub prob: f64,
    pub post: StateVector,
}

/// All outcomes of one step with probability above [`PROB_ZERO`].
pub fn step_outcomes(state: &StateVector, step: &MeasurementStep) -> Result<Vec<Branch>> {
    if let Some(dim) = step.dim() {
        if dim != state.dim() {
            return Err(Error::Dimension {
                expected: dim,
                found: state.dim(),
            });
        }
    }
    let mut branches = Vec::new();
    match step {
        MeasurementStep::Skip => branches.push(Branch {
            label: None,
            prob: 1.0,
            post: state.clone(),
        }),
        MeasurementStep::Separate(pair) => {
            for j in pair.joint() {
                let prob = dot(j.vector.amps(), state.amps()).norm_sqr();
                if prob > PROB_ZERO {
                    branches.push(Branch {
                        label: Some(Label::pair(j.a, j.b)),
                        prob,
                        post: j.vector.canonical_phase(),
                    });
                }
            }
        }
        MeasurementStep::Functional(fo) => {
            for space in fo.eigenspaces() {
                let projection = project(state, &space.projector)?;
                if let Some(post) = projection.post {
                    branches.push(Branch {
                        label: Some(Label::value(space.value)),
                        prob: projection.prob,
                        post,
                    });
                }
            }
        }
    }
    Ok(branches)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeEntry {
    pub prob: f64,
    /// Absent when `prob <= PROB_ZERO`.
    pub final_state: Option<StateVector>,
}

/// Exact probabilities of every outcome sequence of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    labeled_steps: usize,
    entries: BTreeMap<OutcomeSequence, OutcomeEntry>,
}

impl OutcomeDistribution {
    pub fn entries(&self) -> &BTreeMap<OutcomeSequence, OutcomeEntry> {
        &self.entries
    }

    pub fn labeled_steps(&self) -> usize {
        self.labeled_steps
    }

    pub fn prob(&self, seq: &OutcomeSequence) -> f64 {
        self.entries.get(seq).map_or(0.0, |e| e.prob)
    }

    pub fn total(&self) -> f64 {
        self.entries.values().map(|e| e.prob).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total() - 1.0).abs() <= TOL_NORM
    }
}

/// Branching structure of a scenario with skip steps folded away. Leaves are
/// numbered depth-first so samples can be tallied in a flat array.
#[derive(Debug, Clone)]
pub struct OutcomeTree {
    root: Node,
    leaves: Vec<(OutcomeSequence, f64, StateVector)>,
    labeled_steps: usize,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(usize),
    Split(Vec<Edge>),
}

#[derive(Debug, Clone)]
struct Edge {
    prob: f64,
    child: Node,
}

impl OutcomeTree {
    pub fn build(scn: &Scenario) -> Result<Self> {
        let mut leaves = Vec::new();
        let mut path = Vec::new();
        let root = expand(scn.initial.clone(), 1.0, &scn.steps, &mut path, &mut leaves)?;
        Ok(Self {
            root,
            leaves,
            labeled_steps: scn.labeled_steps(),
        })
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn leaf_sequence(&self, leaf: usize) -> &OutcomeSequence {
        &self.leaves[leaf].0
    }

    pub fn distribution(&self) -> OutcomeDistribution {
        let entries = self
            .leaves
            .iter()
            .map(|(seq, prob, state)| {
                let final_state = (*prob > PROB_ZERO).then(|| state.clone());
                (
                    seq.clone(),
                    OutcomeEntry {
                        prob: *prob,
                        final_state,
                    },
                )
            })
            .collect();
        OutcomeDistribution {
            labeled_steps: self.labeled_steps,
            entries,
        }
    }

    /// Walks from the root choosing each branch by inverse CDF over the
    /// branch probabilities; `uniform` supplies draws in `[0, 1)`.
    pub fn sample_leaf(&self, mut uniform: impl FnMut() -> f64) -> usize {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(id) => return *id,
                Node::Split(edges) => {
                    let total: f64 = edges.iter().map(|e| e.prob).sum();
                    let target = uniform() * total;
                    let mut acc = 0.0;
                    node = &edges[edges.len() - 1].child;
                    for edge in edges {
                        acc += edge.prob;
                        if target < acc {
                            node = &edge.child;
                            break;
                        }
                    }
                }
            }
        }
    }
}

fn expand(
    state: StateVector,
    weight: f64,
    steps: &[MeasurementStep],
    path: &mut Vec<Label>,
    leaves: &mut Vec<(OutcomeSequence, f64, StateVector)>,
) -> Result<Node> {
    let Some(next) = steps.iter().position(MeasurementStep::is_labeled) else {
        leaves.push((OutcomeSequence(path.clone()), weight, state));
        return Ok(Node::Leaf(leaves.len() - 1));
    };
    let step = &steps[next];
    let rest = &steps[next + 1..];
    let mut edges = Vec::new();
    for branch in step_outcomes(&state, step)? {
        path.push(branch.label.expect("labeled step"));
        let child = expand(branch.post, weight * branch.prob, rest, path, leaves)?;
        path.pop();
        edges.push(Edge {
            prob: branch.prob,
            child,
        });
    }
    Ok(Node::Split(edges))
}

/// Exact outcome-sequence distribution by full expansion of the branch tree.
pub fn run_chain_analytic(scn: &Scenario) -> Result<OutcomeDistribution> {
    Ok(OutcomeTree::build(scn)?.distribution())
}

/// Probability of each label at labeled step `step_index` (skip steps are
/// not counted), summed over all other steps.
pub fn marginal(dist: &OutcomeDistribution, step_index: usize) -> Result<BTreeMap<Label, f64>> {
    if step_index >= dist.labeled_steps {
        return Err(Error::Index {
            index: step_index,
            len: dist.labeled_steps,
        });
    }
    let mut out = BTreeMap::new();
    for (seq, entry) in &dist.entries {
        *out.entry(seq.0[step_index]).or_insert(0.0) += entry.prob;
    }
    Ok(out)
}
