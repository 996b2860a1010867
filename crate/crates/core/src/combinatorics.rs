//! Integer compositions and the composition-weighted identities that count
//! rooted labeled trees.
//!
//! The central identity is
//!
//! ```text
//!   sum over compositions (k_1,...,k_r) of n of
//!       n! / (k_1! ... k_r!) * k_1^{k_2} * k_2^{k_3} * ... * k_{r-1}^{k_r}
//!   = (n+1)^{n-1}
//! ```
//!
//! Each term counts the rooted trees on `n + 1` labeled vertices whose BFS
//! level sizes from the root are `(k_1, ..., k_r)`; see [`crate::trees`] for the
//! enumeration that checks this term by term.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{factorial, int, ipow, ExactInteger};

/// An ordered tuple of positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Composition {
    parts: Vec<u64>,
}

impl Composition {
    pub fn new(parts: Vec<u64>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::domain("a composition needs at least one part"));
        }
        if parts.contains(&0) {
            return Err(Error::domain(format!(
                "composition parts must be positive, got {parts:?}"
            )));
        }
        Ok(Composition { parts })
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    /// Sum of the parts.
    pub fn n(&self) -> u64 {
        self.parts.iter().sum()
    }

    /// Number of parts.
    pub fn r(&self) -> usize {
        self.parts.len()
    }
}

impl TryFrom<Vec<u64>> for Composition {
    type Error = Error;

    fn try_from(parts: Vec<u64>) -> Result<Self> {
        Composition::new(parts)
    }
}

impl From<Composition> for Vec<u64> {
    fn from(c: Composition) -> Self {
        c.parts
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// Compositions of `n` into exactly `r` parts, lexicographic on parts.
#[derive(Debug, Clone)]
pub struct FixedLengthCompositions {
    n: u64,
    current: Option<Vec<u64>>,
}

impl FixedLengthCompositions {
    pub fn new(n: u64, r: usize) -> Self {
        let current = if r == 0 || (r as u64) > n {
            None
        } else {
            let mut first = vec![1; r];
            first[r - 1] = n - (r as u64 - 1);
            Some(first)
        };
        FixedLengthCompositions { n, current }
    }

    fn advance(parts: &mut [u64]) -> bool {
        let r = parts.len();
        // Rightmost position (excluding the last) whose tail can give up a unit.
        let mut tail_sum = parts[r - 1];
        for i in (0..r.saturating_sub(1)).rev() {
            let tail_len = (r - 1 - i) as u64;
            if tail_sum > tail_len {
                parts[i] += 1;
                for p in parts[i + 1..r - 1].iter_mut() {
                    *p = 1;
                }
                parts[r - 1] = tail_sum - 1 - (tail_len - 1);
                return true;
            }
            tail_sum += parts[i];
        }
        false
    }
}

impl Iterator for FixedLengthCompositions {
    type Item = Composition;

    fn next(&mut self) -> Option<Composition> {
        let current = self.current.as_mut()?;
        let out = Composition {
            parts: current.clone(),
        };
        debug_assert_eq!(out.n(), self.n);
        if !Self::advance(current) {
            self.current = None;
        }
        Some(out)
    }
}

/// Every composition of `n`, ordered by ascending number of parts and then
/// lexicographically. There are `2^(n-1)` of them.
pub fn compositions(n: u64) -> Result<impl Iterator<Item = Composition>> {
    if n < 1 {
        return Err(Error::domain("compositions require n >= 1"));
    }
    Ok((1..=n as usize).flat_map(move |r| FixedLengthCompositions::new(n, r)))
}

/// `n! / (k_1! ... k_r!)`; zero parts are allowed.
pub fn multinomial(n: u64, parts: &[u64]) -> Result<ExactInteger> {
    let total: u64 = parts.iter().sum();
    if total != n {
        return Err(Error::domain(format!(
            "parts {parts:?} sum to {total}, expected {n}"
        )));
    }
    let denom = parts
        .iter()
        .fold(ExactInteger::one(), |acc, &k| acc * factorial(k));
    Ok(factorial(n) / denom)
}

/// `k_1^{k_2} * k_2^{k_3} * ... * k_{r-1}^{k_r}`; 1 for a single part.
pub fn cascade_weight(c: &Composition) -> ExactInteger {
    c.parts
        .windows(2)
        .fold(ExactInteger::one(), |acc, w| acc * ipow(w[0], w[1]))
}

/// `multinomial(n, c) * cascade_weight(c)`, the number of rooted trees with
/// level profile `c`.
pub fn profile_weight(c: &Composition) -> ExactInteger {
    multinomial(c.n(), c.parts()).expect("parts sum to n by construction") * cascade_weight(c)
}

pub fn identity_lhs(n: u64) -> Result<ExactInteger> {
    Ok(compositions(n)?.map(|c| profile_weight(&c)).sum())
}

/// `(n+1)^(n-1)`.
pub fn identity_rhs(n: u64) -> Result<ExactInteger> {
    if n < 1 {
        return Err(Error::domain("identity requires n >= 1"));
    }
    Ok(ipow(n + 1, n - 1))
}

/// The two halves of the induction invariant at stage `s`: compositions with
/// at most `s` parts, and the residual that accounts for everything longer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InductionStep {
    pub partial: ExactInteger,
    pub remainder: ExactInteger,
}

impl InductionStep {
    pub fn total(&self) -> ExactInteger {
        &self.partial + &self.remainder
    }
}

/// Evaluates both sides of the stage-`s` induction invariant.
///
/// `partial` sums the identity's terms over compositions with at most `s`
/// parts. `remainder` sums, over `k_1..k_s >= 1` with `K = k_1 + ... + k_s < n`,
///
/// ```text
///   n! / (k_1! ... k_s! (n-K)!) * k_s * k_1^{k_2} ... k_{s-1}^{k_s}
///       * (n - k_1 - ... - k_{s-1})^{n-K-1}
/// ```
///
/// and `partial + remainder` must equal `(n+1)^(n-1)` for every `s`.
pub fn induction_step_check(n: u64, s: u64) -> Result<InductionStep> {
    if n < 1 || s < 1 || s > n {
        return Err(Error::domain(format!(
            "induction stage requires 1 <= s <= n, got n={n}, s={s}"
        )));
    }
    let partial = compositions(n)?
        .take_while(|c| c.r() as u64 <= s)
        .map(|c| profile_weight(&c))
        .sum();

    let n_fact = factorial(n);
    let mut remainder = ExactInteger::zero();
    // Prefixes (k_1..k_s) with sum K < n are exactly the s-part compositions
    // of K for K in s..n-1.
    for total in s..n {
        for prefix in FixedLengthCompositions::new(total, s as usize) {
            let ks = prefix.parts();
            let head_sum: u64 = ks[..ks.len() - 1].iter().sum();
            let last = ks[ks.len() - 1];
            let denom = ks
                .iter()
                .fold(factorial(n - total), |acc, &k| acc * factorial(k));
            let term = &n_fact / denom
                * last
                * cascade_weight(&prefix)
                * ipow(n - head_sum, n - total - 1);
            remainder += term;
        }
    }
    Ok(InductionStep { partial, remainder })
}

/// Sum over `r` of the `r`-part terms `multinomial(n, c) * prod k_l^{k_l - 1}`,
/// each divided by `r!` when `unordered` is set.
fn forest_sum(n: u64, unordered: bool) -> Result<ExactInteger> {
    if n < 1 {
        return Err(Error::domain("forest identity requires n >= 1"));
    }
    let mut total = ExactInteger::zero();
    for r in 1..=n as usize {
        let inner: ExactInteger = FixedLengthCompositions::new(n, r)
            .map(|c| {
                let rooted = c
                    .parts()
                    .iter()
                    .fold(ExactInteger::one(), |acc, &k| acc * ipow(k, k - 1));
                multinomial(n, c.parts()).expect("valid composition") * rooted
            })
            .sum();
        if unordered {
            let r_fact = factorial(r as u64);
            let (q, rem) = inner.div_rem(&r_fact);
            assert!(
                rem.is_zero(),
                "r-part forest sum {inner} not divisible by {r}! at n={n}"
            );
            total += q;
        } else {
            total += inner;
        }
    }
    Ok(total)
}

/// Counts rooted forests on `n` labeled vertices by splitting the vertex set
/// into `r` unordered blocks, each carrying a rooted tree (`k^{k-1}` choices).
///
/// The sum runs over ordered compositions, so each `r`-part block sum is
/// divided by `r!` to undo the `r!` orderings of the same set partition.
/// Without that factor the total overshoots `(n+1)^(n-1)` for every `n >= 2`;
/// [`ordered_forest_sum`] keeps the uncorrected value for comparison.
pub fn forest_identity_lhs(n: u64) -> Result<ExactInteger> {
    forest_sum(n, true)
}

/// The forest sum without the `1/r!` correction (e.g. 4 instead of 3 at n=2).
pub fn ordered_forest_sum(n: u64) -> Result<ExactInteger> {
    forest_sum(n, false)
}

/// Number of compositions of `n`, `2^(n-1)`.
pub fn composition_count(n: u64) -> ExactInteger {
    if n == 0 {
        return int(0);
    }
    ipow(2, n - 1)
}
