//! Seeded Born-rule Monte Carlo over a scenario's outcome tree.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{fold_indices, Execution};
use crate::measurement::{Label, OutcomeSequence, OutcomeTree, Scenario};

pub type SampleCounts = BTreeMap<OutcomeSequence, u64>;

/// Random stream for trial `trial` under `seed`. Each trial owns a distinct
/// ChaCha stream, so counts do not depend on evaluation order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn sample_chain(scn: &Scenario, seed: u64, n: u64) -> Result<SampleCounts> {
    sample_chain_with(scn, seed, n, Execution::default())
}

pub fn sample_chain_with(scn: &Scenario, seed: u64, n: u64, exec: Execution) -> Result<SampleCounts> {
    let tree = OutcomeTree::build(scn)?;
    sample_tree(&tree, seed, n, exec)
}

/// Draws `n` trials from a prebuilt tree.
pub fn sample_tree(tree: &OutcomeTree, seed: u64, n: u64, exec: Execution) -> Result<SampleCounts> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let leaves = tree.leaf_count();
    let tally = fold_indices(
        n,
        exec,
        || vec![0u64; leaves],
        |mut acc, t| {
            let mut rng = trial_rng(seed, t);
            acc[tree.sample_leaf(|| rng.random::<f64>())] += 1;
            acc
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    );
    Ok(tally
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(leaf, c)| (tree.leaf_sequence(leaf).clone(), c))
        .collect())
}

/// Counts of each label at labeled step `step_index`.
pub fn marginal_counts(counts: &SampleCounts, step_index: usize) -> Result<BTreeMap<Label, u64>> {
    let mut out = BTreeMap::new();
    for (seq, &c) in counts {
        let label = seq.0.get(step_index).ok_or(Error::Index {
            index: step_index,
            len: seq.0.len(),
        })?;
        *out.entry(*label).or_insert(0) += c;
    }
    Ok(out)
}
