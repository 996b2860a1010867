//! Product of discrete cyclic towers and its avalanche-size function.
//!
//! Coordinate `i` lives on `Z_L` with uniform measure and the shift
//! `S(x) = x + w mod L`. The base is `B = {0, .., w-1}`, the levels
//! `S^k(B) = {k w, .., k w + w - 1}` for `k = 0..=height` are pairwise disjoint
//! when `(height + 1) w <= L`, and the excited set is the top level
//! `U = S^height(B)`, of measure `p = w / L`.
//!
//! The avalanche size at `x` is the fixed point of
//!
//! ```text
//!   A(x,1)   = #{ i : x_i in U_i }
//!   A(x,k+1) = #{ i : S_i^l(x_i) in U_i for some 0 <= l <= A(x,k) }
//! ```
//!
//! which is reached after at most `N` steps when every tower is taller than
//! `N`.

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{avalanche_pmf, AvalancheParams};
use crate::error::{Error, Result};
use crate::exact::{format_rational, int, rational_from_int, ExactRational};
use crate::pmf::Pmf;
use crate::rng::SplitMix64;
use crate::sim::{sample_sharded, SimModel, SimResult};
use crate::Limits;

/// One cyclic tower: state space `Z_L`, shift step and base width `w`, and
/// the index `height` of the excited level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoordinateTower {
    #[serde(rename = "L")]
    pub len: u64,
    pub w: u64,
    pub height: u64,
}

impl CoordinateTower {
    pub fn new(len: u64, w: u64, height: u64) -> Self {
        CoordinateTower { len, w, height }
    }

    /// `m(U) = w / L`.
    pub fn excitation_probability(&self) -> ExactRational {
        ExactRational::new(int(self.w), int(self.len))
    }

    /// `S^l(x)`
    pub fn shift(&self, x: u64, l: u64) -> u64 {
        ((x as u128 + l as u128 * self.w as u128) % self.len as u128) as u64
    }

    pub fn is_excited(&self, y: u64) -> bool {
        let top = self.height * self.w;
        (top..top + self.w).contains(&y)
    }

    /// Smallest `l` in `0..=horizon` with `S^l(x)` in `U`, by iterating the map.
    pub fn excitation_delay(&self, x: u64, horizon: u64) -> Option<u64> {
        let mut y = x;
        for l in 0..=horizon {
            if self.is_excited(y) {
                return Some(l);
            }
            y = self.shift(y, 1);
        }
        None
    }

    /// Number of `l` in `0..=horizon` with `S^l(x)` in `U`.
    pub fn passes(&self, x: u64, horizon: u64) -> usize {
        (0..=horizon)
            .filter(|&l| self.is_excited(self.shift(x, l)))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerSystem {
    coords: Vec<CoordinateTower>,
}

/// Validates the towers: `w >= 1`, `(height + 1) w <= L` and `height + 1 > N`.
pub fn make_tower_system(specs: &[CoordinateTower]) -> Result<TowerSystem> {
    let n = specs.len() as u64;
    if n == 0 {
        return Err(Error::domain(
            "a tower system needs at least one coordinate",
        ));
    }
    for (i, t) in specs.iter().enumerate() {
        if t.w < 1 || t.len < 1 {
            return Err(Error::domain(format!(
                "coordinate {i}: need L >= 1 and w >= 1, got L={}, w={}",
                t.len, t.w
            )));
        }
        let span = (t.height as u128 + 1) * t.w as u128;
        if span > t.len as u128 {
            return Err(Error::domain(format!(
                "coordinate {i}: levels overlap, (height+1)*w = {span} > L = {}",
                t.len
            )));
        }
        if t.height < n {
            return Err(Error::domain(format!(
                "coordinate {i}: tower height+1 = {} must exceed N = {n}",
                t.height + 1
            )));
        }
    }
    Ok(TowerSystem {
        coords: specs.to_vec(),
    })
}

impl TowerSystem {
    /// `N` copies of the same tower.
    pub fn uniform(tower: CoordinateTower, n: usize) -> Result<Self> {
        make_tower_system(&vec![tower; n])
    }

    pub fn coords(&self) -> &[CoordinateTower] {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn probabilities(&self) -> Vec<ExactRational> {
        self.coords
            .iter()
            .map(|t| t.excitation_probability())
            .collect()
    }

    /// The common tower when all coordinates share `(L, w, height)`.
    pub fn homogeneous_tower(&self) -> Option<CoordinateTower> {
        let first = self.coords[0];
        self.coords.iter().all(|t| *t == first).then_some(first)
    }

    pub fn state_count(&self) -> Option<u64> {
        self.coords
            .iter()
            .try_fold(1u64, |acc, t| acc.checked_mul(t.len))
    }

    pub fn model(&self) -> SimModel {
        SimModel::Tower {
            n: self.n() as u64,
            coords: self.coords.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerState {
    x: Vec<u64>,
}

impl TowerState {
    pub fn new(x: Vec<u64>, sys: &TowerSystem) -> Result<Self> {
        if x.len() != sys.n() {
            return Err(Error::domain(format!(
                "state has {} coordinates, system has {}",
                x.len(),
                sys.n()
            )));
        }
        for (i, (&xi, t)) in x.iter().zip(sys.coords()).enumerate() {
            if xi >= t.len {
                return Err(Error::domain(format!(
                    "coordinate {i}: {xi} is outside 0..{}",
                    t.len
                )));
            }
        }
        Ok(TowerState { x })
    }

    pub fn coords(&self) -> &[u64] {
        &self.x
    }
}

/// The recursion's values `A(x,1), A(x,2), ..`, ending with the first
/// repeated value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AvalancheTrace {
    pub sequence: Vec<u64>,
}

impl AvalancheTrace {
    pub fn size(&self) -> u64 {
        *self.sequence.last().expect("trace is never empty")
    }

    /// The minimal `k` with `A(x,k+1) = A(x,k)`.
    pub fn steps(&self) -> usize {
        self.sequence.len() - 1
    }
}

fn trace_from_coords(x: &[u64], sys: &TowerSystem) -> AvalancheTrace {
    let horizon = sys.n() as u64;
    let delays: Vec<Option<u64>> = sys
        .coords()
        .iter()
        .zip(x)
        .map(|(t, &xi)| t.excitation_delay(xi, horizon))
        .collect();
    let reached = |bound: u64| {
        delays
            .iter()
            .filter(|d| matches!(d, Some(l) if *l <= bound))
            .count() as u64
    };
    let mut sequence = vec![reached(0)];
    loop {
        let current = *sequence.last().expect("nonempty");
        let next = reached(current);
        sequence.push(next);
        if next == current {
            return AvalancheTrace { sequence };
        }
    }
}

pub fn avalanche_trace(state: &TowerState, sys: &TowerSystem) -> AvalancheTrace {
    trace_from_coords(&state.x, sys)
}

pub fn avalanche_size(state: &TowerState, sys: &TowerSystem) -> u64 {
    avalanche_trace(state, sys).size()
}

pub fn sample_state(sys: &TowerSystem, rng: &mut SplitMix64) -> TowerState {
    TowerState {
        x: sys
            .coords()
            .iter()
            .map(|t| rng.random_range(0..t.len))
            .collect(),
    }
}

/// Histogram of `A` over `trials` states drawn from the product of uniform
/// measures.
pub fn simulate_tower(sys: &TowerSystem, trials: u64, seed: u64, shards: u32) -> Result<SimResult> {
    if trials < 1 || shards < 1 {
        return Err(Error::domain(
            "simulation needs trials >= 1 and shards >= 1",
        ));
    }
    let histogram = sample_sharded(trials, seed, shards, |rng| {
        avalanche_size(&sample_state(sys, rng), sys)
    });
    Ok(SimResult {
        model: sys.model(),
        trials,
        seed,
        shards,
        histogram,
    })
}

/// Exact law of `A` by evaluating it on every state. Support `0..=N`.
pub fn tower_pmf_bruteforce(sys: &TowerSystem, limits: &Limits) -> Result<Pmf> {
    let total = sys
        .state_count()
        .filter(|&t| t <= limits.tower_states)
        .ok_or_else(|| {
            Error::resource(format!(
                "state space exceeds the cap of {} states",
                limits.tower_states
            ))
        })?;
    let n = sys.n();
    let mut counts = vec![0u64; n + 1];
    let mut x = vec![0u64; n];
    for _ in 0..total {
        counts[trace_from_coords(&x, sys).size() as usize] += 1;
        for (xi, t) in x.iter_mut().zip(sys.coords()) {
            *xi += 1;
            if *xi < t.len {
                break;
            }
            *xi = 0;
        }
    }
    let denom = ExactRational::from_integer(int(total));
    let probs = counts
        .into_iter()
        .map(|c| ExactRational::from_integer(int(c)) / &denom)
        .collect();
    Pmf::exact(
        format!("tower-bruteforce(N={n})"),
        (0..=n as u64).collect(),
        probs,
    )
}

/// Exact law of `A` for per-coordinate excitation probabilities `p_i`:
///
/// ```text
/// P(A = a) = sum over compositions (k_1..k_r) of a, and ordered partitions
///            (I_1, .., I_r, I_{r+1}) of {1..N} with |I_l| = k_l, |I_{r+1}| = N - a,
///            of  prod_{I_1} p_i * prod_{l=2..r} prod_{I_l} k_{l-1} p_i
///                * prod_{I_{r+1}} (1 - (a+1) p_i)
/// ```
///
/// with `P(A = 0) = prod_i (1 - p_i)`. `I_{r+1}` holds the coordinates that never
/// fire.
///
/// The sum over ordered partitions is accumulated block by block over
/// subsets: `chains[S][k]` is the total weight of all sequences of firing
/// blocks covering exactly `S` whose last block has size `k`. That is
/// `O(N 3^N)` exact operations instead of one per ordered partition.
pub fn avalanche_pmf_general(ps: &[ExactRational], limits: &Limits) -> Result<Pmf> {
    let n = ps.len();
    if n == 0 {
        return Err(Error::domain("need at least one coordinate"));
    }
    if n > limits.general_coordinates {
        return Err(Error::resource(format!(
            "{n} coordinates exceed the cap of {} for the partition sum",
            limits.general_coordinates
        )));
    }
    let n_rat = rational_from_int(n as u64);
    for (i, p) in ps.iter().enumerate() {
        if p.is_negative() || p * &n_rat >= ExactRational::one() {
            return Err(Error::domain(format!(
                "p_{i} = {} must lie in [0, 1/N)",
                format_rational(p)
            )));
        }
    }

    let full = 1usize << n;
    let mut subset_prob = vec![ExactRational::one(); full];
    for mask in 1..full {
        let low = mask.trailing_zeros() as usize;
        subset_prob[mask] = &subset_prob[mask & (mask - 1)] * &ps[low];
    }

    // chains[mask][k], k = size of the most recent block (index 0 unused).
    let mut chains = vec![vec![ExactRational::zero(); n + 1]; full];
    for mask in 1..full {
        chains[mask][mask.count_ones() as usize] = subset_prob[mask].clone();
    }
    for mask in 1..full {
        let rest = (full - 1) & !mask;
        for last in 1..=n {
            if chains[mask][last].is_zero() {
                continue;
            }
            let base = chains[mask][last].clone();
            let mut next = rest;
            while next != 0 {
                let size = next.count_ones() as usize;
                let factor =
                    ExactRational::from_integer(crate::exact::ipow(last as u64, size as u64));
                let add = &base * factor * &subset_prob[next];
                chains[mask | next][size] += add;
                next = (next - 1) & rest;
            }
        }
    }

    let mut probs = vec![ExactRational::zero(); n + 1];
    probs[0] = ps.iter().map(|p| ExactRational::one() - p).product();
    for (mask, row) in chains.iter().enumerate().skip(1) {
        let a = mask.count_ones() as u64;
        let silent: ExactRational = (0..n)
            .filter(|i| mask & (1 << i) == 0)
            .map(|i| ExactRational::one() - rational_from_int(a + 1) * &ps[i])
            .product();
        let firing: ExactRational = row.iter().sum();
        probs[a as usize] += firing * silent;
    }
    let label = format!(
        "avalanche-general(p=[{}])",
        ps.iter().map(format_rational).collect::<Vec<_>>().join(",")
    );
    Pmf::exact(label, (0..=n as u64).collect(), probs)
}

/// The exact law the system's avalanche size should follow: the homogeneous
/// closed form when all towers agree, the partition sum otherwise.
pub fn exact_pmf_for(sys: &TowerSystem, limits: &Limits) -> Result<Pmf> {
    match sys.homogeneous_tower() {
        Some(t) => Ok(avalanche_pmf(&AvalancheParams::new(
            sys.n() as u64,
            t.excitation_probability(),
        )?)),
        None => avalanche_pmf_general(&sys.probabilities(), limits),
    }
}
