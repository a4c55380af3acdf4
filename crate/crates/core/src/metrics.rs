//! Pair-conflict scores and polarization metrics, all in exact arithmetic.
//!
//! Conventions for a pair `{a, b}` over a profile with total voter weight `n`
//! and `m` candidates, writing `d_v = rank(b) - rank(a)` in vote `v`:
//!
//! * `conf_sum` / `conf_nash`: aggregate pairwise conflict over unordered
//!   voter pairs, computed through the equivalent group closed forms.
//! * `swap_score`: minimum number of adjacent swaps that make the pair
//!   non-conflicting.
//! * `alpha`: `2/n * min(|V_a|, |V_b|)` — how evenly the electorate splits.
//! * `beta`: average `|d_v| / (m-1)` — how far apart the pair sits.
//! * `gamma`: ratio of the smaller to the larger per-group mean distance.
//! * `phi`: `|sum d_v| / sum |d_v|` — imbalance of the two groups' total
//!   discrepancy.
//!
//! Everything is multiplicity-weighted, and metric values are exact
//! `i128`-backed rationals; convert to floats only for presentation.

use num_rational::Ratio;
use num_traits::Zero;

use crate::profile::{Ballot, Pair, Profile};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Exact rational value used throughout metrics and rule scores.
pub type Rational = Ratio<i128>;

/// Float rendering of an exact metric, for serialization boundaries.
pub fn to_f64(value: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(value).unwrap_or(f64::NAN)
}

/// Aggregation used by the pairwise conflict score: `+` or `×`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConflictMode {
    Sum,
    Nash,
}

/// Conflict induced by `pair` between two single votes: zero when they agree
/// on the pair's order, otherwise `|d_v| + |d_w|` or `|d_v| * |d_w|`.
pub fn pairwise_conflict(v: &Ballot, w: &Ballot, pair: Pair, mode: ConflictMode) -> i128 {
    let dv = v.signed_distance(pair) as i128;
    let dw = w.signed_distance(pair) as i128;
    if dv.signum() == dw.signum() {
        return 0;
    }
    match mode {
        ConflictMode::Sum => dv.abs() + dw.abs(),
        ConflictMode::Nash => dv.abs() * dw.abs(),
    }
}

/// Multiplicity-weighted group sums of `|d_v|` on each side of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupSums {
    /// Weight of voters preferring `pair.a()`.
    pub weight_a: u64,
    /// Weight of voters preferring `pair.b()`.
    pub weight_b: u64,
    /// Sum of distances within the `a` group (each term positive).
    pub sum_a: i128,
    /// Sum of distances within the `b` group (each term positive).
    pub sum_b: i128,
}

impl GroupSums {
    pub fn compute(p: &Profile, pair: Pair) -> GroupSums {
        let mut g = GroupSums {
            weight_a: 0,
            weight_b: 0,
            sum_a: 0,
            sum_b: 0,
        };
        for (ballot, mult) in p.ballots() {
            let d = ballot.signed_distance(pair) as i128;
            let w = *mult as i128;
            if d > 0 {
                g.weight_a += *mult;
                g.sum_a += w * d;
            } else {
                g.weight_b += *mult;
                g.sum_b += w * (-d);
            }
        }
        g
    }

    /// `sum |d_v|` over all votes.
    pub fn abs_total(&self) -> i128 {
        self.sum_a + self.sum_b
    }

    /// `sum d_v` over all votes (oriented from `pair.a()`).
    pub fn signed_total(&self) -> i128 {
        self.sum_a - self.sum_b
    }

    pub fn is_conflicting(&self) -> bool {
        self.weight_a > 0 && self.weight_b > 0
    }
}

/// Aggregate pairwise conflict over all unordered voter pairs, via the group
/// closed forms: `|V_b| * sum_a + |V_a| * sum_b` for `Sum` and
/// `sum_a * sum_b` for `Nash`. Zero exactly when the pair is non-conflicting.
pub fn conflict_score(p: &Profile, pair: Pair, mode: ConflictMode) -> i128 {
    conflict_score_from(&GroupSums::compute(p, pair), mode)
}

fn conflict_score_from(g: &GroupSums, mode: ConflictMode) -> i128 {
    match mode {
        ConflictMode::Sum => g.weight_b as i128 * g.sum_a + g.weight_a as i128 * g.sum_b,
        ConflictMode::Nash => g.sum_a * g.sum_b,
    }
}

/// Minimum number of adjacent swaps needed to make the pair non-conflicting:
/// the smaller of the two group distance sums.
pub fn swap_score(p: &Profile, pair: Pair) -> i128 {
    let g = GroupSums::compute(p, pair);
    g.sum_a.min(g.sum_b)
}

/// Partitioning ratio in `[0, 1]`: 1 at an even split, 0 under unanimity.
pub fn alpha(p: &Profile, pair: Pair) -> Rational {
    let g = GroupSums::compute(p, pair);
    alpha_from(&g, p.total_weight())
}

fn alpha_from(g: &GroupSums, n: u64) -> Rational {
    Ratio::new(2 * g.weight_a.min(g.weight_b) as i128, n as i128)
}

/// Discrepancy in `(0, 1]`: average absolute rank distance over `m - 1`.
pub fn beta(p: &Profile, pair: Pair) -> Rational {
    let g = GroupSums::compute(p, pair);
    beta_from(&g, p.total_weight(), p.m())
}

fn beta_from(g: &GroupSums, n: u64, m: usize) -> Rational {
    Ratio::new(g.abs_total(), n as i128 * (m as i128 - 1))
}

/// Per-group mean distances `(mu_ab, mu_ba)`; a side is `None` when its group
/// is empty.
pub fn group_mu(p: &Profile, pair: Pair) -> (Option<Rational>, Option<Rational>) {
    let g = GroupSums::compute(p, pair);
    mu_from(&g)
}

fn mu_from(g: &GroupSums) -> (Option<Rational>, Option<Rational>) {
    let mu_a = (g.weight_a > 0).then(|| Ratio::new(g.sum_a, g.weight_a as i128));
    let mu_b = (g.weight_b > 0).then(|| Ratio::new(g.sum_b, g.weight_b as i128));
    (mu_a, mu_b)
}

/// Discrepancy balance in `[0, 1]`: ratio of the smaller to the larger group
/// mean. Zero by convention when either group is empty.
pub fn gamma(p: &Profile, pair: Pair) -> Rational {
    gamma_from(&GroupSums::compute(p, pair))
}

fn gamma_from(g: &GroupSums) -> Rational {
    match mu_from(g) {
        (Some(mu_a), Some(mu_b)) => (mu_a / mu_b).min(mu_b / mu_a),
        _ => Rational::zero(),
    }
}

/// Group discrepancy imbalance in `[0, 1]`: 0 when the two groups' total
/// discrepancies match, 1 under unanimity.
pub fn phi(p: &Profile, pair: Pair) -> Rational {
    phi_from(&GroupSums::compute(p, pair))
}

fn phi_from(g: &GroupSums) -> Rational {
    Ratio::new(g.signed_total().abs(), g.abs_total())
}

/// Every conflict score and polarization metric of one pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairAssessment {
    pub pair: Pair,
    pub conf_sum: i128,
    pub conf_nash: i128,
    pub swap_score: i128,
    pub alpha: Rational,
    pub beta: Rational,
    pub gamma: Rational,
    pub phi: Rational,
    pub mu_ab: Option<Rational>,
    pub mu_ba: Option<Rational>,
}

impl PairAssessment {
    pub fn is_conflicting(&self) -> bool {
        !self.alpha.is_zero()
    }
}

/// Computes all metrics of one pair in a single pass over the ballots.
pub fn assess_pair(p: &Profile, pair: Pair) -> PairAssessment {
    let g = GroupSums::compute(p, pair);
    let n = p.total_weight();
    let (mu_ab, mu_ba) = mu_from(&g);
    PairAssessment {
        pair,
        conf_sum: conflict_score_from(&g, ConflictMode::Sum),
        conf_nash: conflict_score_from(&g, ConflictMode::Nash),
        swap_score: g.sum_a.min(g.sum_b),
        alpha: alpha_from(&g, n),
        beta: beta_from(&g, n, p.m()),
        gamma: gamma_from(&g),
        phi: phi_from(&g),
        mu_ab,
        mu_ba,
    }
}

/// Assesses every unordered pair, in lexicographic pair order.
pub fn assess_all_pairs(p: &Profile) -> Vec<PairAssessment> {
    #[cfg(feature = "parallel")]
    {
        let pairs: Vec<Pair> = p.pairs().collect();
        pairs
            .into_par_iter()
            .map(|pair| assess_pair(p, pair))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    assess_all_pairs_seq(p)
}

/// Sequential twin of [`assess_all_pairs`]; always available and used as the
/// baseline in the benchmark suite.
pub fn assess_all_pairs_seq(p: &Profile) -> Vec<PairAssessment> {
    p.pairs().map(|pair| assess_pair(p, pair)).collect()
}
