//! Urn model: `N` distinguishable balls dropped uniformly into `M` numbered
//! urns.
//!
//! The statistic `X` is the largest `r` in `1..=M` such that for every
//! `k <= r` urns `1..=k` together hold at least `k` balls (`X = 0` if urn 1 is
//! empty). Its law is
//!
//! ```text
//!   P(X = a) = C(N,a) (a+1)^{a-1} M^{-a} (1 - (a+1)/M)^{N-a},
//! ```
//!
//! the avalanche law at `p = 1/M`.

use num_traits::One;
use rand::Rng;

use crate::distributions::{avalanche_pmf, AvalancheParams};
use crate::error::{Error, Result};
use crate::exact::{int, ipow, ExactRational};
use crate::pmf::Pmf;
use crate::rng::SplitMix64;
use crate::sim::{sample_sharded, SimModel, SimResult};
use crate::Limits;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UrnConfig {
    n: u64,
    m: u64,
}

impl UrnConfig {
    pub fn new(n: u64, m: u64) -> Result<Self> {
        if n < 1 || m < 1 {
            return Err(Error::domain(format!(
                "urn model needs N >= 1 and M >= 1, got N={n}, M={m}"
            )));
        }
        Ok(UrnConfig { n, m })
    }

    pub fn balls(&self) -> u64 {
        self.n
    }

    pub fn urns(&self) -> u64 {
        self.m
    }
}

/// Urn (1-based) receiving each ball.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    urn_of: Vec<u64>,
}

impl Assignment {
    pub fn new(urn_of: Vec<u64>, m: u64) -> Result<Self> {
        if let Some(&bad) = urn_of.iter().find(|&&u| u < 1 || u > m) {
            return Err(Error::domain(format!("urn {bad} is outside 1..={m}")));
        }
        Ok(Assignment { urn_of })
    }

    pub fn urn_of(&self) -> &[u64] {
        &self.urn_of
    }

    /// Ball count per urn, index 0 holding urn 1.
    pub fn occupancy(&self, m: u64) -> Vec<u64> {
        let mut counts = vec![0; m as usize];
        for &u in &self.urn_of {
            counts[(u - 1) as usize] += 1;
        }
        counts
    }
}

/// `X` from per-urn ball counts (index 0 is urn 1), by one cumulative scan.
pub fn statistic_from_occupancy(counts: &[u64]) -> u64 {
    let mut cumulative = 0;
    for (k, &c) in counts.iter().enumerate() {
        cumulative += c;
        if cumulative < k as u64 + 1 {
            return k as u64;
        }
    }
    counts.len() as u64
}

pub fn urn_statistic(a: &Assignment, m: u64) -> u64 {
    statistic_from_occupancy(&a.occupancy(m))
}

/// Closed-form law of `X`; needs `M >= N + 1` so every factor raised to a
/// positive power is nonnegative.
pub fn urn_pmf_formula(cfg: &UrnConfig) -> Result<Pmf> {
    if cfg.m < cfg.n + 1 {
        return Err(Error::domain(format!(
            "the closed form needs M >= N + 1, got N={}, M={}",
            cfg.n, cfg.m
        )));
    }
    let (n, m) = (cfg.n, cfg.m);
    let urns = ExactRational::from_integer(int(m));
    let probs = (0..=n)
        .map(|a| {
            let lead = if a == 0 {
                ExactRational::one()
            } else {
                ExactRational::from_integer(ipow(a + 1, a - 1))
            };
            let empty = ExactRational::one() - ExactRational::from_integer(int(a + 1)) / &urns;
            lead * ExactRational::from_integer(crate::exact::binomial(n, a))
                / ExactRational::from_integer(ipow(m, a))
                * crate::exact::rpow(&empty, n - a)
        })
        .collect();
    Pmf::exact(format!("urn(N={n}, M={m})"), (0..=n).collect(), probs)
}

/// Law of `X` by enumerating all `M^N` placements. Support `0..=N`.
pub fn urn_pmf_bruteforce(cfg: &UrnConfig, limits: &Limits) -> Result<Pmf> {
    let (n, m) = (cfg.n, cfg.m);
    let total = m
        .checked_pow(n as u32)
        .filter(|&t| t <= limits.urn_assignments)
        .ok_or_else(|| {
            Error::resource(format!(
                "{m}^{n} placements exceed the cap of {}",
                limits.urn_assignments
            ))
        })?;
    let mut counts = vec![0u64; n as usize + 1];
    let mut urn_of = vec![1u64; n as usize];
    let mut occupancy = vec![0u64; m as usize];
    occupancy[0] = n;
    for _ in 0..total {
        counts[statistic_from_occupancy(&occupancy) as usize] += 1;
        // Odometer step over urn_of, keeping occupancy in sync.
        for slot in urn_of.iter_mut() {
            occupancy[(*slot - 1) as usize] -= 1;
            if *slot < m {
                *slot += 1;
                occupancy[(*slot - 1) as usize] += 1;
                break;
            }
            *slot = 1;
            occupancy[0] += 1;
        }
    }
    let denom = ExactRational::from_integer(int(total));
    let probs = counts
        .into_iter()
        .map(|c| ExactRational::from_integer(int(c)) / &denom)
        .collect();
    Pmf::exact(
        format!("urn-bruteforce(N={n}, M={m})"),
        (0..=n).collect(),
        probs,
    )
}

/// One uniform placement.
pub fn sample_assignment(cfg: &UrnConfig, rng: &mut SplitMix64) -> Assignment {
    Assignment {
        urn_of: (0..cfg.n).map(|_| rng.random_range(1..=cfg.m)).collect(),
    }
}

/// One draw of `X` under uniform placement.
pub fn sample_statistic(cfg: &UrnConfig, rng: &mut SplitMix64, scratch: &mut Vec<u64>) -> u64 {
    scratch.clear();
    scratch.resize(cfg.m as usize, 0);
    for _ in 0..cfg.n {
        scratch[rng.random_range(0..cfg.m) as usize] += 1;
    }
    statistic_from_occupancy(scratch)
}

/// Histogram of `X` over `trials` seeded placements.
pub fn simulate_urns(cfg: &UrnConfig, trials: u64, seed: u64, shards: u32) -> Result<SimResult> {
    if trials < 1 || shards < 1 {
        return Err(Error::domain(
            "simulation needs trials >= 1 and shards >= 1",
        ));
    }
    let histogram = sample_sharded(trials, seed, shards, |rng| {
        let mut scratch = Vec::with_capacity(cfg.m as usize);
        sample_statistic(cfg, rng, &mut scratch)
    });
    Ok(SimResult {
        model: SimModel::Urn { n: cfg.n, m: cfg.m },
        trials,
        seed,
        shards,
        histogram,
    })
}

/// `urn_pmf_formula(N, M)` and `avalanche_pmf(N, 1/M)` agree entry for entry.
pub fn formula_matches_avalanche(cfg: &UrnConfig) -> Result<bool> {
    let urn = urn_pmf_formula(cfg)?;
    let params = AvalancheParams::new(cfg.n, ExactRational::new(int(1), int(cfg.m)))?;
    Ok(urn.exact_probs() == avalanche_pmf(&params).exact_probs())
}
