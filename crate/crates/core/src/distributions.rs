//! Closed-form avalanche-size laws and tools for reading their shape.
//!
//! All finite-`N` laws are evaluated exactly. Conventions: `x^0 = 1` for every
//! `x` (so the boundary factor `(1 - (N+1)p)^0` is 1 even when its base is
//! negative) and `k^{k-2} = 1` at `k = 1`.

use num_traits::{One, Signed, Zero};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::exact::{binomial, format_rational, ipow, rational_from_int, rpow, ExactRational};
use crate::pmf::Pmf;

pub use crate::pmf::pmf_mean;

/// Number of coordinates `N` and per-coordinate excitation probability `p`,
/// with `0 <= p < 1/N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AvalancheParams {
    n: u64,
    p: ExactRational,
}

impl AvalancheParams {
    pub fn new(n: u64, p: ExactRational) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("N must be a positive integer"));
        }
        if p.is_negative() || &p * rational_from_int(n) >= ExactRational::one() {
            return Err(Error::domain(format!(
                "p must lie in [0, 1/N); got p = {} with N = {n}",
                format_rational(&p)
            )));
        }
        Ok(AvalancheParams { n, p })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn p(&self) -> &ExactRational {
        &self.p
    }

    /// `1 - k p`
    fn one_minus(&self, k: u64) -> ExactRational {
        ExactRational::one() - &self.p * rational_from_int(k)
    }
}

/// `k^e` as a rational, allowing `e = -1` (only reached at `k = 1`).
fn power_signed(k: u64, e: i64) -> ExactRational {
    if e >= 0 {
        ExactRational::from_integer(ipow(k, e as u64))
    } else {
        ExactRational::from_integer(ipow(k, (-e) as u64)).recip()
    }
}

/// `P(A = a) = (a+1)^{a-1} C(N,a) p^a (1-(a+1)p)^{N-a}`.
pub fn avalanche_prob(params: &AvalancheParams, a: u64) -> ExactRational {
    avalanche_term(params.n, &params.p, a)
}

/// [`avalanche_prob`] on the closed range `0 <= p <= 1/N`.
///
/// The closed form is a polynomial in `p` and still a probability law at the
/// critical point `p = 1/N`, where every base `1-(a+1)p` with `a < N` is
/// nonnegative.
pub fn avalanche_prob_closed(n: u64, p: &ExactRational, a: u64) -> Result<ExactRational> {
    if n < 1 {
        return Err(Error::domain("N must be a positive integer"));
    }
    if p.is_negative() || p * rational_from_int(n) > ExactRational::one() {
        return Err(Error::domain(format!(
            "p must lie in [0, 1/N]; got p = {} with N = {n}",
            format_rational(p)
        )));
    }
    Ok(avalanche_term(n, p, a))
}

fn avalanche_term(n: u64, p: &ExactRational, a: u64) -> ExactRational {
    if a > n {
        return ExactRational::zero();
    }
    let base = ExactRational::one() - p * rational_from_int(a + 1);
    power_signed(a + 1, a as i64 - 1)
        * ExactRational::from_integer(binomial(n, a))
        * rpow(p, a)
        * rpow(&base, n - a)
}

/// Avalanche-size law on `0..=N`; sums to exactly one.
pub fn avalanche_pmf(params: &AvalancheParams) -> Pmf {
    let probs = (0..=params.n).map(|a| avalanche_prob(params, a)).collect();
    Pmf::exact(
        format!(
            "avalanche(N={}, p={})",
            params.n,
            format_rational(&params.p)
        ),
        (0..=params.n).collect(),
        probs,
    )
    .expect("avalanche law is normalized on its domain")
}

/// Abelian law on `1..=N`:
/// `(1-Np)/(1-(N-1)p) * k^{k-2} C(N-1,k-1) p^{k-1} (1-kp)^{N-k-1}`.
pub fn abelian_pmf(params: &AvalancheParams) -> Pmf {
    let n = params.n;
    let prefactor = params.one_minus(n) / params.one_minus(n - 1);
    let probs = (1..=n)
        .map(|k| {
            // Exponent N-k-1 is -1 at k = N; 1 - Np > 0 on the domain.
            let tail = if k == n {
                params.one_minus(k).recip()
            } else {
                rpow(&params.one_minus(k), n - k - 1)
            };
            &prefactor
                * power_signed(k, k as i64 - 2)
                * ExactRational::from_integer(binomial(n - 1, k - 1))
                * rpow(&params.p, k - 1)
                * tail
        })
        .collect();
    Pmf::exact(
        format!("abelian(N={}, p={})", n, format_rational(&params.p)),
        (1..=n).collect(),
        probs,
    )
    .expect("Abelian law is normalized on its domain")
}

/// Avalanche size conditioned on one given coordinate firing, on `1..=N`:
/// `a^{a-2} C(N-1,a-1) p^{a-1} (1-ap)^{N-a}`. Differs from the Abelian law in
/// the exponent of the last factor.
pub fn conditional_pmf(params: &AvalancheParams) -> Pmf {
    let n = params.n;
    let probs = (1..=n)
        .map(|a| {
            power_signed(a, a as i64 - 2)
                * ExactRational::from_integer(binomial(n - 1, a - 1))
                * rpow(&params.p, a - 1)
                * rpow(&params.one_minus(a), n - a)
        })
        .collect();
    Pmf::exact(
        format!("conditional(N={}, p={})", n, format_rational(&params.p)),
        (1..=n).collect(),
        probs,
    )
    .expect("conditional law is normalized on its domain")
}

/// `1 / (1 - (N-1)p)`
pub fn abelian_mean_closed_form(params: &AvalancheParams) -> ExactRational {
    params.one_minus(params.n - 1).recip()
}

/// Checks, exactly,
///
/// ```text
/// (1-Np)/(1-(N-1)p) * sum_{k=1..N} k^{k-1} C(N-1,k-1) p^{k-1} (1-kp)^{N-k-1}
///     = 1/(1-(N-1)p)
/// ```
///
/// evaluating the left side directly rather than through [`abelian_pmf`].
pub fn expectation_identity_check(params: &AvalancheParams) -> bool {
    let n = params.n;
    let sum: ExactRational = (1..=n)
        .map(|k| {
            let tail = if k == n {
                params.one_minus(k).recip()
            } else {
                rpow(&params.one_minus(k), n - k - 1)
            };
            ExactRational::from_integer(ipow(k, k - 1) * binomial(n - 1, k - 1))
                * rpow(&params.p, k - 1)
                * tail
        })
        .sum();
    let lhs = params.one_minus(n) / params.one_minus(n - 1) * sum;
    lhs == abelian_mean_closed_form(params)
}

/// Large-`N` limit at `p = alpha / N`, truncated to `0..=a_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitParams {
    alpha: f64,
    a_max: u64,
}

impl LimitParams {
    pub fn new(alpha: f64, a_max: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::domain(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        Ok(LimitParams { alpha, a_max })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a_max(&self) -> u64 {
        self.a_max
    }
}

/// `ln P(a)` for `P(a) = e^{-alpha(a+1)} alpha^a (a+1)^{a-1} / a!`.
pub fn limit_log_prob(alpha: f64, a: u64) -> f64 {
    if alpha == 0.0 {
        return if a == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let af = a as f64;
    -alpha * (af + 1.0) + af * alpha.ln() + (af - 1.0) * (af + 1.0).ln() - ln_gamma(af + 1.0)
}

/// The limit law on `0..=a_max`, evaluated in log space; the truncated mass
/// `1 - sum` is carried as the PMF's deficit.
pub fn limit_pmf(params: &LimitParams) -> Pmf {
    let probs: Vec<f64> = (0..=params.a_max)
        .map(|a| limit_log_prob(params.alpha, a).exp())
        .collect();
    let deficit = 1.0 - probs.iter().sum::<f64>();
    Pmf::float_truncated(
        format!("limit(alpha={}, amax={})", params.alpha, params.a_max),
        (0..=params.a_max).collect(),
        probs,
        Some(deficit),
    )
    .expect("log-space probabilities are finite and nonnegative")
}

/// `ln(P(a) / P(a+1))`.
pub fn tail_log_ratio(pmf: &Pmf, a: u64) -> Result<f64> {
    let (i, j) = match (pmf.index_of(a), pmf.index_of(a + 1)) {
        (Some(i), Some(j)) => (i, j),
        _ => {
            return Err(Error::domain(format!(
                "both {a} and {} must be in the support",
                a + 1
            )))
        }
    };
    if !pmf.is_positive_at(j) {
        return Err(Error::domain(format!("P({}) is zero", a + 1)));
    }
    if !pmf.is_positive_at(i) {
        return Err(Error::domain(format!("P({a}) is zero")));
    }
    Ok(
        match (pmf.prob_at(i).as_exact(), pmf.prob_at(j).as_exact()) {
            (Some(p), Some(q)) => crate::exact::to_f64(&(p / q)).ln(),
            _ => pmf.prob_f64_at(i).ln() - pmf.prob_f64_at(j).ln(),
        },
    )
}

/// Least-squares slope of `ln P(a)` against `ln a` over the support points in
/// `[a_min, a_max]`.
pub fn powerlaw_slope(pmf: &Pmf, a_min: u64, a_max: u64) -> Result<f64> {
    if a_min >= a_max {
        return Err(Error::domain(format!(
            "fit window needs a_min < a_max, got [{a_min}, {a_max}]"
        )));
    }
    if a_min == 0 {
        return Err(Error::domain("fit window must start at a >= 1"));
    }
    let last = *pmf.support().last().expect("nonempty support");
    if a_max > last || a_min < pmf.support()[0] {
        return Err(Error::domain(format!(
            "fit window [{a_min}, {a_max}] lies outside the support"
        )));
    }
    let mut points = Vec::new();
    for (i, &a) in pmf.support().iter().enumerate() {
        if a < a_min || a > a_max {
            continue;
        }
        if !pmf.is_positive_at(i) {
            return Err(Error::domain(format!("P({a}) is not positive")));
        }
        points.push(((a as f64).ln(), pmf.prob_f64_at(i).ln()));
    }
    if points.len() < 2 {
        return Err(Error::domain("fit window holds fewer than two points"));
    }
    if points.iter().any(|(_, y)| !y.is_finite()) {
        return Err(Error::domain("probability underflows in the fit window"));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Support points whose mass strictly exceeds every existing neighbor's.
pub fn local_maxima(pmf: &Pmf) -> Vec<u64> {
    use std::cmp::Ordering::Greater;
    let len = pmf.len();
    (0..len)
        .filter(|&i| {
            (i == 0 || pmf.cmp_at(i, i - 1) == Greater)
                && (i + 1 == len || pmf.cmp_at(i, i + 1) == Greater)
        })
        .map(|i| pmf.support()[i])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;
    use crate::pmf::Scalar;

    fn params(n: u64, num: i64, den: i64) -> AvalancheParams {
        AvalancheParams::new(n, ratio(num, den)).unwrap()
    }

    fn exact(pmf: &Pmf) -> Vec<ExactRational> {
        pmf.exact_probs().unwrap().to_vec()
    }

    #[test]
    fn closed_range_includes_critical_point() {
        let half = ratio(1, 2);
        let got: Vec<_> = (0..=2)
            .map(|a| avalanche_prob_closed(2, &half, a).unwrap())
            .collect();
        assert_eq!(got, [ratio(1, 4), ratio(0, 1), ratio(3, 4)]);
        for n in 1..=30u64 {
            let p = ratio(1, n as i64);
            let total: ExactRational = (0..=n)
                .map(|a| avalanche_prob_closed(n, &p, a).unwrap())
                .sum();
            assert!(total.is_one(), "N={n}");
        }
        assert!(avalanche_prob_closed(3, &ratio(1, 2), 0).is_err());
        assert!(avalanche_prob_closed(3, &ratio(-1, 9), 0).is_err());
    }

    #[test]
    fn closed_range_agrees_below_critical_point() {
        let pr = params(7, 1, 9);
        for a in 0..=8 {
            assert_eq!(
                avalanche_prob_closed(7, pr.p(), a).unwrap(),
                avalanche_prob(&pr, a)
            );
        }
    }

    #[test]
    fn params_domain() {
        assert!(AvalancheParams::new(2, ratio(1, 2)).is_err());
        assert!(AvalancheParams::new(2, ratio(-1, 8)).is_err());
        assert!(AvalancheParams::new(0, ratio(0, 1)).is_err());
        assert!(AvalancheParams::new(2, ratio(0, 1)).is_ok());
        assert!(AvalancheParams::new(2, ratio(49, 100)).is_ok());
        let err = AvalancheParams::new(4, ratio(1, 4)).unwrap_err();
        assert!(err.to_string().contains("[0, 1/N)"));
    }

    #[test]
    fn avalanche_examples() {
        assert_eq!(
            exact(&avalanche_pmf(&params(1, 1, 3))),
            vec![ratio(2, 3), ratio(1, 3)]
        );
        assert_eq!(
            exact(&avalanche_pmf(&params(2, 1, 4))),
            vec![ratio(9, 16), ratio(4, 16), ratio(3, 16)]
        );
        let big = avalanche_pmf(&params(50, 1, 100));
        assert_eq!(big.len(), 51);
    }

    #[test]
    fn avalanche_boundary_region_stays_nonnegative() {
        // 1/(N+1) < p < 1/N: 1 - (N+1)p < 0 but only ever raised to the 0th power.
        let pm = avalanche_pmf(&params(3, 3, 10));
        assert!(pm.exact_probs().unwrap().iter().all(|p| !p.is_negative()));
    }

    #[test]
    fn abelian_examples() {
        assert_eq!(exact(&abelian_pmf(&params(1, 0, 1))), vec![ratio(1, 1)]);
        assert_eq!(exact(&abelian_pmf(&params(1, 1, 2))), vec![ratio(1, 1)]);
        let two = abelian_pmf(&params(2, 1, 4));
        assert_eq!(exact(&two), vec![ratio(2, 3), ratio(1, 3)]);
        assert_eq!(pmf_mean(&two), Scalar::Exact(ratio(4, 3)));
        assert_eq!(abelian_mean_closed_form(&params(2, 1, 4)), ratio(4, 3));
    }

    #[test]
    fn conditional_examples() {
        assert_eq!(
            exact(&conditional_pmf(&params(2, 1, 3))),
            vec![ratio(2, 3), ratio(1, 3)]
        );
        assert_eq!(
            exact(&conditional_pmf(&params(3, 1, 5))),
            vec![ratio(16, 25), ratio(6, 25), ratio(3, 25)]
        );
        assert_eq!(exact(&conditional_pmf(&params(1, 1, 2))), vec![ratio(1, 1)]);
    }

    #[test]
    fn mean_examples() {
        assert_eq!(
            pmf_mean(&avalanche_pmf(&params(1, 2, 7))),
            Scalar::Exact(ratio(2, 7))
        );
        assert_eq!(abelian_mean_closed_form(&params(1, 0, 1)), ratio(1, 1));
        assert_eq!(
            abelian_mean_closed_form(&params(100, 1, 200)),
            ratio(200, 101)
        );
    }

    #[test]
    fn expectation_identity_examples() {
        assert!(expectation_identity_check(&params(2, 1, 4)));
        assert!(expectation_identity_check(&params(1, 0, 1)));
        assert!(expectation_identity_check(&params(30, 1, 60)));
    }

    #[test]
    fn limit_examples() {
        let zero = limit_pmf(&LimitParams::new(0.0, 5).unwrap());
        assert_eq!(zero.get_f64(0), 1.0);
        assert!((1..=5).all(|a| zero.get_f64(a) == 0.0));

        let one = limit_pmf(&LimitParams::new(1.0, 10).unwrap());
        assert!((one.get_f64(0) - 0.367_879_441_171_442_3).abs() < 1e-15);
        assert!((one.get_f64(1) - 0.135_335_283_236_612_7).abs() < 1e-15);

        let half = limit_pmf(&LimitParams::new(0.5, 200).unwrap());
        assert!(half.deficit().unwrap().abs() <= 1e-12);

        assert!(LimitParams::new(1.5, 10).is_err());
        assert!(LimitParams::new(-0.1, 10).is_err());
    }

    #[test]
    fn tail_ratio_matches_expansion() {
        // Oracle: a * (1 + a ln((a+1)/(a+2))), evaluated to 40 digits.
        let one = limit_pmf(&LimitParams::new(1.0, 600).unwrap());
        let at = |a: u64| a as f64 * tail_log_ratio(&one, a).unwrap();
        assert!((at(100) - 1.477_035_569_883_698).abs() < 1e-8);
        assert!((at(500) - 1.495_348_283_900_755).abs() < 1e-8);

        let uniform = Pmf::float("u", vec![0, 1], vec![0.5, 0.5]).unwrap();
        assert_eq!(tail_log_ratio(&uniform, 0).unwrap(), 0.0);
        assert!(tail_log_ratio(&uniform, 1).is_err());

        let zero = limit_pmf(&LimitParams::new(0.0, 5).unwrap());
        assert!(tail_log_ratio(&zero, 0).is_err());
    }

    #[test]
    fn tail_ratio_on_exact_pmf() {
        let pm = avalanche_pmf(&params(2, 1, 4));
        assert!((tail_log_ratio(&pm, 0).unwrap() - (9.0f64 / 4.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn slope_examples() {
        let weights: Vec<f64> = (1..=100).map(|a| (a as f64).powi(-2)).collect();
        let z: f64 = weights.iter().sum();
        let synthetic = Pmf::float(
            "pow2",
            (1..=100).collect(),
            weights.iter().map(|w| w / z).collect(),
        )
        .unwrap();
        assert!((powerlaw_slope(&synthetic, 1, 100).unwrap() + 2.0).abs() < 1e-6);

        let one = limit_pmf(&LimitParams::new(1.0, 600).unwrap());
        let s = powerlaw_slope(&one, 50, 500).unwrap();
        assert!((s + 1.5).abs() <= 0.05, "slope {s}");

        let half = limit_pmf(&LimitParams::new(0.5, 200).unwrap());
        assert!(powerlaw_slope(&half, 10, 100).unwrap() < -3.0);

        assert!(powerlaw_slope(&one, 500, 50).is_err());
        assert!(powerlaw_slope(&one, 0, 50).is_err());
        assert!(powerlaw_slope(&one, 50, 601).is_err());
    }

    #[test]
    fn local_maxima_examples() {
        let dec = Pmf::float("d", vec![0, 1, 2], vec![0.5, 0.3, 0.2]).unwrap();
        assert_eq!(local_maxima(&dec), vec![0]);
        let hump = Pmf::float("h", vec![0, 1, 2], vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(local_maxima(&hump), vec![1]);
        let single = Pmf::float("s", vec![4], vec![1.0]).unwrap();
        assert_eq!(local_maxima(&single), vec![4]);
        let flat = Pmf::float("f", vec![0, 1], vec![0.5, 0.5]).unwrap();
        assert!(local_maxima(&flat).is_empty());
    }

    #[test]
    fn local_maxima_golden_near_critical() {
        // Recorded from an independent exact scan; the a = N spike comes from
        // the (1-(N+1)p)^0 boundary term.
        let pm = avalanche_pmf(&params(100, 99, 10_000));
        assert_eq!(local_maxima(&pm), vec![0, 100]);
    }
}
