//! Comparing simulation histograms with exact laws.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::checked_gamma_ur;

use crate::error::{Error, Result};
use crate::pmf::Pmf;
use crate::sim::SimResult;

pub const DEFAULT_MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    #[serde(rename = "tv")]
    pub tv_distance: f64,
    #[serde(rename = "chi2")]
    pub chi_square: f64,
    pub dof: u64,
    #[serde(rename = "p")]
    pub approx_p_value: f64,
    pub trials: u64,
}

/// Histogram frequencies on `0..=max(observed, bound)`.
pub fn empirical_pmf(res: &SimResult, bound: Option<u64>) -> Result<Pmf> {
    if res.trials < 1 || res.total_count() != res.trials {
        return Err(Error::domain(
            "empirical PMF needs trials >= 1 and a histogram summing to trials",
        ));
    }
    let observed_max = res.histogram.keys().next_back().copied().unwrap_or(0);
    let top = bound.map_or(observed_max, |b| b.max(observed_max));
    let trials = res.trials as f64;
    let probs: Vec<f64> = (0..=top).map(|a| res.count(a) as f64 / trials).collect();
    // Division rounding can leave the sum a few ulps off one.
    let deficit = 1.0 - probs.iter().sum::<f64>();
    Pmf::float_truncated(
        format!("empirical({} trials)", res.trials),
        (0..=top).collect(),
        probs,
        (deficit != 0.0).then_some(deficit),
    )
}

/// `(1/2) sum |p(a) - q(a)|` over the union of supports.
pub fn tv_distance(p: &Pmf, q: &Pmf) -> f64 {
    let mut points: Vec<u64> = p.support().iter().chain(q.support()).copied().collect();
    points.sort_unstable();
    points.dedup();
    0.5 * points
        .into_iter()
        .map(|a| (p.get_f64(a) - q.get_f64(a)).abs())
        .sum::<f64>()
}

/// Groups adjacent bins, scanning from the largest support point down, so
/// that every group's expected count reaches `min_expected`. A short leftover
/// group at the low end joins its right neighbor. Returns `(observed,
/// expected)` per group.
fn merge_bins(bins: &[(f64, f64)], min_expected: f64) -> Vec<(f64, f64)> {
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    let mut pending = false;
    for &(obs, exp) in bins.iter().rev() {
        acc.0 += obs;
        acc.1 += exp;
        pending = true;
        if acc.1 >= min_expected {
            groups.push(acc);
            acc = (0.0, 0.0);
            pending = false;
        }
    }
    if pending {
        match groups.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => groups.push(acc),
        }
    }
    groups.reverse();
    groups
}

/// Pearson chi-square of the histogram against `expected`, with sparse bins
/// merged (see [`DEFAULT_MIN_EXPECTED`]).
///
/// The p-value is the chi-square survival function, evaluated as the
/// regularized upper incomplete gamma `Q(dof/2, chi2/2)` (series and continued
/// fraction, about 1e-15 relative accuracy in double precision).
pub fn chi_square_gof(res: &SimResult, expected: &Pmf, min_expected: f64) -> Result<GofReport> {
    if res.trials < 1 {
        return Err(Error::domain("goodness of fit needs trials >= 1"));
    }
    if min_expected.is_nan() || min_expected <= 0.0 {
        return Err(Error::domain("min_expected must be positive"));
    }
    let trials = res.trials as f64;
    let mut points: Vec<u64> = expected
        .support()
        .iter()
        .chain(res.histogram.keys())
        .copied()
        .collect();
    points.sort_unstable();
    points.dedup();
    let bins: Vec<(f64, f64)> = points
        .iter()
        .map(|&a| (res.count(a) as f64, trials * expected.get_f64(a)))
        .collect();
    let groups = merge_bins(&bins, min_expected);
    if groups.len() < 2 {
        return Err(Error::Degenerate(
            "all expected mass falls in a single merged bin".into(),
        ));
    }
    let chi_square: f64 = groups
        .iter()
        .map(|&(obs, exp)| (obs - exp) * (obs - exp) / exp)
        .sum();
    let dof = groups.len() as u64 - 1;
    let approx_p_value = if chi_square <= 0.0 {
        1.0
    } else if !chi_square.is_finite() {
        0.0
    } else {
        checked_gamma_ur(dof as f64 / 2.0, chi_square / 2.0)
            .map_err(|e| Error::domain(format!("p-value evaluation failed: {e}")))?
    };
    let empirical = empirical_pmf(res, None)?;
    Ok(GofReport {
        tv_distance: tv_distance(&empirical, expected),
        chi_square,
        dof,
        approx_p_value,
        trials: res.trials,
    })
}

/// Sample mean and `z * s / sqrt(trials)` with the unbiased sample deviation.
pub fn mean_ci(res: &SimResult, z: f64) -> Result<(f64, f64)> {
    if res.trials < 2 {
        return Err(Error::domain(
            "a confidence interval needs at least two trials",
        ));
    }
    let n = res.trials as f64;
    let mean = res
        .histogram
        .iter()
        .map(|(&a, &c)| a as f64 * c as f64)
        .sum::<f64>()
        / n;
    let ss: f64 = res
        .histogram
        .iter()
        .map(|(&a, &c)| c as f64 * (a as f64 - mean).powi(2))
        .sum();
    let sd = (ss / (n - 1.0)).sqrt();
    Ok((mean, z * sd / n.sqrt()))
}
