//! Simulation results and the sharded sampling loop shared by the urn and
//! tower models.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{shard_plan, SplitMix64};
use crate::tower::CoordinateTower;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum SimModel {
    Urn {
        #[serde(rename = "N")]
        n: u64,
        #[serde(rename = "M")]
        m: u64,
    },
    Tower {
        #[serde(rename = "N")]
        n: u64,
        coords: Vec<CoordinateTower>,
    },
}

impl SimModel {
    /// Largest possible avalanche size.
    pub fn bound(&self) -> u64 {
        match self {
            SimModel::Urn { n, m } => (*n).min(*m),
            SimModel::Tower { n, .. } => *n,
        }
    }
}

/// Histogram of a sampled statistic together with everything needed to
/// reproduce it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimResult {
    #[serde(flatten)]
    pub model: SimModel,
    pub trials: u64,
    pub seed: u64,
    pub shards: u32,
    pub histogram: BTreeMap<u64, u64>,
}

impl SimResult {
    pub fn total_count(&self) -> u64 {
        self.histogram.values().sum()
    }

    pub fn count(&self, a: u64) -> u64 {
        self.histogram.get(&a).copied().unwrap_or(0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("SimResult serializes")
    }

    pub fn from_json(doc: &serde_json::Value) -> Result<Self> {
        let res: SimResult = serde_json::from_value(doc.clone())
            .map_err(|e| Error::domain(format!("bad simulation JSON: {e}")))?;
        if res.total_count() != res.trials {
            return Err(Error::domain(format!(
                "histogram holds {} samples but trials = {}",
                res.total_count(),
                res.trials
            )));
        }
        Ok(res)
    }

    /// `a,count` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,count\n");
        for (a, c) in &self.histogram {
            writeln!(out, "{a},{c}").expect("writing to a String");
        }
        out
    }
}

/// Histogram of `draw` over `trials` samples split across `shards` streams.
///
/// Shard `i` runs `shard_plan(trials, shards)[i]` draws on
/// `SplitMix64::for_shard(seed, i)`; shard histograms are summed. The result
/// depends only on `(trials, seed, shards)`, not on thread scheduling.
pub fn sample_sharded<F>(trials: u64, seed: u64, shards: u32, draw: F) -> BTreeMap<u64, u64>
where
    F: Fn(&mut SplitMix64) -> u64 + Sync,
{
    let plan = shard_plan(trials, shards);
    plan.par_iter()
        .enumerate()
        .map(|(i, &count)| sample_shard(count, seed, i as u64, &draw))
        .reduce(BTreeMap::new, merge_histograms)
}

/// One shard's histogram.
pub fn sample_shard<F>(count: u64, seed: u64, shard: u64, draw: F) -> BTreeMap<u64, u64>
where
    F: Fn(&mut SplitMix64) -> u64,
{
    let mut rng = SplitMix64::for_shard(seed, shard);
    let mut hist = BTreeMap::new();
    for _ in 0..count {
        *hist.entry(draw(&mut rng)).or_insert(0) += 1;
    }
    hist
}

pub fn merge_histograms(
    mut acc: BTreeMap<u64, u64>,
    other: BTreeMap<u64, u64>,
) -> BTreeMap<u64, u64> {
    for (k, v) in other {
        *acc.entry(k).or_insert(0) += v;
    }
    acc
}
