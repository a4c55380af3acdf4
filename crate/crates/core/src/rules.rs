//! Pair-selection voting rules: the four conflictual rules plus the Borda and
//! Chamberlin-Courant (committee size 2) baselines, all behind one
//! pair-scoring interface with full tie reporting.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::metrics::{self, ConflictMode, GroupSums, Rational};
use crate::profile::{Pair, Profile};

/// Relative margin under which floating-point rule scores are considered
/// tied (only non-integer MaxPolar exponents take this path).
pub const APPROX_SCORE_MARGIN: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule selection needs at least two candidates")]
    TooFewCandidates,
    #[error("MaxPolar exponent must be positive")]
    NonPositiveExponent,
}

/// Positive rational exponent of a MaxPolar rule, kept reduced.
///
/// Integer exponents score in exact rational arithmetic; fractional ones fall
/// back to `f64` comparisons with [`APPROX_SCORE_MARGIN`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PolarExponent {
    num: u32,
    den: u32,
}

impl PolarExponent {
    pub fn new(num: u32, den: u32) -> Result<PolarExponent, RuleError> {
        if num == 0 || den == 0 {
            return Err(RuleError::NonPositiveExponent);
        }
        let g = num.gcd(&den);
        Ok(PolarExponent {
            num: num / g,
            den: den / g,
        })
    }

    pub fn integer(p: u32) -> Result<PolarExponent, RuleError> {
        PolarExponent::new(p, 1)
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn as_f64(&self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }
}

impl fmt::Display for PolarExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Identifier of a pair-selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    /// Maximize the additive pairwise conflict.
    MaxSum,
    /// Maximize the product of the two groups' distance sums.
    MaxNash,
    /// Maximize the minimum number of swaps removing the conflict.
    MaxSwap,
    /// Maximize `alpha * beta^p`.
    MaxPolar(PolarExponent),
    /// Sum of the two candidates' Borda scores.
    Borda2,
    /// Chamberlin-Courant for a committee of two: each voter scores the pair
    /// by its better-placed member.
    Cc2,
}

impl RuleId {
    /// The four rules designed to seek conflict (as opposed to the baselines).
    pub fn is_conflictual(&self) -> bool {
        !matches!(self, RuleId::Borda2 | RuleId::Cc2)
    }

    /// The canonical audit set: three fixed rules plus 2-MaxPolar.
    pub fn conflictual_four() -> [RuleId; 4] {
        [
            RuleId::MaxSum,
            RuleId::MaxNash,
            RuleId::MaxSwap,
            RuleId::MaxPolar(PolarExponent::integer(2).expect("2 > 0")),
        ]
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleId::MaxSum => write!(f, "maxsum"),
            RuleId::MaxNash => write!(f, "maxnash"),
            RuleId::MaxSwap => write!(f, "maxswap"),
            RuleId::MaxPolar(p) => write!(f, "maxpolar:{p}"),
            RuleId::Borda2 => write!(f, "borda"),
            RuleId::Cc2 => write!(f, "cc"),
        }
    }
}

impl FromStr for RuleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "maxsum" => return Ok(RuleId::MaxSum),
            "maxnash" => return Ok(RuleId::MaxNash),
            "maxswap" => return Ok(RuleId::MaxSwap),
            "borda" => return Ok(RuleId::Borda2),
            "cc" => return Ok(RuleId::Cc2),
            _ => {}
        }
        if let Some(exp) = lower.strip_prefix("maxpolar:") {
            let (num, den) = match exp.split_once('/') {
                Some((n, d)) => (
                    n.parse::<u32>().map_err(|e| e.to_string())?,
                    d.parse::<u32>().map_err(|e| e.to_string())?,
                ),
                None => (exp.parse::<u32>().map_err(|e| e.to_string())?, 1),
            };
            return PolarExponent::new(num, den)
                .map(RuleId::MaxPolar)
                .map_err(|e| e.to_string());
        }
        Err(format!(
            "unknown rule {s:?} (expected maxsum, maxnash, maxswap, maxpolar:P, borda, cc)"
        ))
    }
}

/// An exact or floating rule score. A single rule always produces one kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Score {
    Exact(Rational),
    Approx(f64),
}

impl Score {
    pub fn as_f64(&self) -> f64 {
        match self {
            Score::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Score::Approx(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<Rational> {
        match self {
            Score::Exact(r) => Some(*r),
            Score::Approx(_) => None,
        }
    }

    fn ties_with(&self, other: &Score) -> bool {
        match (self, other) {
            (Score::Exact(a), Score::Exact(b)) => a == b,
            (a, b) => {
                let (a, b) = (a.as_f64(), b.as_f64());
                (a - b).abs() <= APPROX_SCORE_MARGIN * a.abs().max(b.abs()).max(1.0)
            }
        }
    }

    fn beats(&self, other: &Score) -> bool {
        match (self, other) {
            (Score::Exact(a), Score::Exact(b)) => a > b,
            (a, b) => a.as_f64() > b.as_f64() && !a.ties_with(b),
        }
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Score::Exact(r) => write!(f, "{r}"),
            Score::Approx(v) => write!(f, "{v}"),
        }
    }
}

/// Outcome of one rule on one profile: every pair scored, all co-winners kept.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleOutcome {
    pub rule: RuleId,
    /// All pairs attaining the maximal score, in lexicographic order.
    pub winners: Vec<Pair>,
    pub scores: BTreeMap<Pair, Score>,
    /// True when winner determination relied on the floating-point margin.
    pub margin_ties: bool,
    /// False when the profile has no conflicting pair at all (every
    /// conflictual score is then zero).
    pub any_conflicting: bool,
}

impl RuleOutcome {
    pub fn is_winner(&self, pair: Pair) -> bool {
        self.winners.binary_search(&pair).is_ok()
    }

    pub fn max_score(&self) -> &Score {
        &self.scores[&self.winners[0]]
    }
}

/// Scores one pair under one rule. Conflictual scores are zero exactly when
/// the pair is non-conflicting.
pub fn score(rule: RuleId, p: &Profile, pair: Pair) -> Score {
    match rule {
        RuleId::MaxSum => Score::Exact(Ratio::from_integer(metrics::conflict_score(
            p,
            pair,
            ConflictMode::Sum,
        ))),
        RuleId::MaxNash => Score::Exact(Ratio::from_integer(metrics::conflict_score(
            p,
            pair,
            ConflictMode::Nash,
        ))),
        RuleId::MaxSwap => Score::Exact(Ratio::from_integer(metrics::swap_score(p, pair))),
        RuleId::MaxPolar(exp) => polar_score(p, pair, exp),
        RuleId::Borda2 => {
            let scores = borda_scores(p);
            Score::Exact(Ratio::from_integer(
                scores[pair.a().0] + scores[pair.b().0],
            ))
        }
        RuleId::Cc2 => Score::Exact(Ratio::from_integer(cc2_score(p, pair))),
    }
}

fn polar_score(p: &Profile, pair: Pair, exp: PolarExponent) -> Score {
    let alpha = metrics::alpha(p, pair);
    let beta = metrics::beta(p, pair);
    if exp.is_integer() {
        Score::Exact(alpha * beta.pow(exp.num as i32))
    } else {
        let alpha = alpha.to_f64().expect("alpha in [0,1]");
        let beta = beta.to_f64().expect("beta in (0,1]");
        Score::Approx(alpha * beta.powf(exp.as_f64()))
    }
}

/// Borda score of every candidate: a voter grants `m - rank` points.
pub fn borda_scores(p: &Profile) -> Vec<i128> {
    let m = p.m();
    let mut scores = vec![0i128; m];
    for (ballot, mult) in p.ballots() {
        let w = *mult as i128;
        for (pos, c) in ballot.order().iter().enumerate() {
            scores[c.0] += w * (m - 1 - pos) as i128;
        }
    }
    scores
}

fn cc2_score(p: &Profile, pair: Pair) -> i128 {
    let m = p.m() as i128;
    p.ballots()
        .iter()
        .map(|(ballot, mult)| {
            let best = ballot
                .position(pair.a())
                .expect("pair within roster")
                .min(ballot.position(pair.b()).expect("pair within roster"));
            *mult as i128 * (m - i128::from(best))
        })
        .sum()
}

/// Scores every pair under `rule` with shared per-profile precomputation.
pub fn score_all(rule: RuleId, p: &Profile) -> Vec<(Pair, Score)> {
    match rule {
        RuleId::Borda2 => {
            let scores = borda_scores(p);
            p.pairs()
                .map(|pair| {
                    let s = scores[pair.a().0] + scores[pair.b().0];
                    (pair, Score::Exact(Ratio::from_integer(s)))
                })
                .collect()
        }
        RuleId::MaxSum | RuleId::MaxNash | RuleId::MaxSwap | RuleId::MaxPolar(_) => {
            let n = p.total_weight();
            let m = p.m();
            p.pairs()
                .map(|pair| {
                    let g = GroupSums::compute(p, pair);
                    let s = match rule {
                        RuleId::MaxSum => Score::Exact(Ratio::from_integer(
                            g.weight_b as i128 * g.sum_a + g.weight_a as i128 * g.sum_b,
                        )),
                        RuleId::MaxNash => {
                            Score::Exact(Ratio::from_integer(g.sum_a * g.sum_b))
                        }
                        RuleId::MaxSwap => {
                            Score::Exact(Ratio::from_integer(g.sum_a.min(g.sum_b)))
                        }
                        RuleId::MaxPolar(exp) => {
                            let alpha =
                                Ratio::new(2 * g.weight_a.min(g.weight_b) as i128, n as i128);
                            let beta =
                                Ratio::new(g.sum_a + g.sum_b, n as i128 * (m as i128 - 1));
                            if exp.is_integer() {
                                Score::Exact(alpha * beta.pow(exp.num as i32))
                            } else {
                                Score::Approx(
                                    alpha.to_f64().expect("alpha in [0,1]")
                                        * beta.to_f64().expect("beta in (0,1]").powf(exp.as_f64()),
                                )
                            }
                        }
                        _ => unreachable!(),
                    };
                    (pair, s)
                })
                .collect()
        }
        RuleId::Cc2 => p
            .pairs()
            .map(|pair| (pair, Score::Exact(Ratio::from_integer(cc2_score(p, pair)))))
            .collect(),
    }
}

/// Runs a rule: every pair scored, winners = all pairs attaining the maximum.
pub fn select(rule: RuleId, p: &Profile) -> Result<RuleOutcome, RuleError> {
    if p.m() < 2 {
        return Err(RuleError::TooFewCandidates);
    }
    let scored = score_all(rule, p);
    let mut best: &Score = &scored[0].1;
    for (_, s) in &scored[1..] {
        if s.beats(best) {
            best = s;
        }
    }
    let best = *best;
    let mut winners = Vec::new();
    let mut margin_ties = false;
    for (pair, s) in &scored {
        if s.ties_with(&best) {
            winners.push(*pair);
            if let (Score::Approx(a), Score::Approx(b)) = (s, &best) {
                if a.to_bits() != b.to_bits() {
                    margin_ties = true;
                }
            }
        }
    }
    let any_conflicting = p.has_conflicting_pair();
    Ok(RuleOutcome {
        rule,
        winners,
        scores: scored.into_iter().collect(),
        margin_ties,
        any_conflicting,
    })
}

/// Winner sets of several rules at once.
pub fn select_many(rules: &[RuleId], p: &Profile) -> Result<Vec<RuleOutcome>, RuleError> {
    rules.iter().map(|r| select(*r, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, pair};
    use crate::profile::default_names;
    use proptest::prelude::*;

    fn polar2() -> RuleId {
        RuleId::MaxPolar(PolarExponent::integer(2).unwrap())
    }

    fn winner_names(p: &Profile, out: &RuleOutcome) -> Vec<(String, String)> {
        out.winners
            .iter()
            .map(|q| {
                (
                    p.name_of(q.a()).to_owned(),
                    p.name_of(q.b()).to_owned(),
                )
            })
            .collect()
    }

    #[test]
    fn six_candidate_demo_winner_sets() {
        let p = fixtures::six_candidate_demo();
        let ab = pair(&p, "a", "b");
        let xy = pair(&p, "x", "y");

        let sum = select(RuleId::MaxSum, &p).unwrap();
        assert!(sum.is_winner(ab) && sum.is_winner(xy));
        assert_eq!(sum.scores[&ab], sum.scores[&xy]);
        assert_eq!(sum.scores[&ab].as_f64(), 6.0);
        // Under the distance definition two further pairs reach the same
        // additive score on this profile.
        assert_eq!(
            winner_names(&p, &sum),
            [
                ("a".into(), "b".into()),
                ("a".into(), "y".into()),
                ("b".into(), "x".into()),
                ("x".into(), "y".into())
            ]
        );

        let nash = select(RuleId::MaxNash, &p).unwrap();
        assert_eq!(nash.winners, vec![xy]);
        assert_eq!(nash.scores[&xy].as_f64(), 9.0);
        assert_eq!(nash.scores[&ab].as_f64(), 5.0);

        let swap = select(RuleId::MaxSwap, &p).unwrap();
        assert_eq!(swap.winners, vec![xy]);
    }

    #[test]
    fn cc2_on_six_candidate_demo() {
        let p = fixtures::six_candidate_demo();
        let xy = pair(&p, "x", "y");
        assert_eq!(score(RuleId::Cc2, &p, xy).as_f64(), 8.0);
    }

    #[test]
    fn balance_contrast_winner_split() {
        let p = fixtures::balance_contrast();
        let ab = pair(&p, "a", "b");
        let xy = pair(&p, "x", "y");

        assert_eq!(select(RuleId::MaxSwap, &p).unwrap().winners, vec![ab]);
        assert_eq!(select(RuleId::MaxNash, &p).unwrap().winners, vec![ab]);
        assert_eq!(select(RuleId::MaxSum, &p).unwrap().winners, vec![xy]);
        let polar = select(polar2(), &p).unwrap();
        assert_eq!(polar.winners, vec![xy]);
        assert_eq!(
            polar.scores[&xy].as_exact().unwrap(),
            Ratio::new(4, 9)
        );
        assert_eq!(
            polar.scores[&ab].as_exact().unwrap(),
            Ratio::new(2, 9)
        );
    }

    #[test]
    fn swap_dominated_tie_keeps_all_maximal_pairs() {
        let p = fixtures::swap_dominated_tie();
        let out = select(RuleId::MaxSwap, &p).unwrap();
        assert!(out.is_winner(pair(&p, "a", "b")));
        assert!(out.is_winner(pair(&p, "c", "d")));
        assert!(out.is_winner(pair(&p, "a", "d")));
        assert!(out.is_winner(pair(&p, "b", "c")));
        assert_eq!(out.winners.len(), 4);
        assert_eq!(out.max_score().as_f64(), 4.0);
    }

    #[test]
    fn unanimous_top_conflict_selects_the_conflict() {
        let p = fixtures::unanimous_top_conflict();
        let bc = pair(&p, "b", "c");
        for rule in RuleId::conflictual_four() {
            let out = select(rule, &p).unwrap();
            assert_eq!(out.winners, vec![bc], "{rule}");
        }
    }

    #[test]
    fn borda_on_identity_selects_top_two() {
        let p = fixtures::profile(&["a", "b", "c", "d"], &[("b d a c", 4)]);
        let out = select(RuleId::Borda2, &p).unwrap();
        assert_eq!(out.winners, vec![pair(&p, "b", "d")]);
        assert!(!out.any_conflicting);
    }

    #[test]
    fn no_conflict_flag_and_all_zero_scores() {
        let p = fixtures::profile(&["a", "b", "c"], &[("a b c", 1)]);
        let out = select(RuleId::MaxSwap, &p).unwrap();
        assert!(!out.any_conflicting);
        assert_eq!(out.winners.len(), 3); // every pair ties at zero
        assert!(out.scores.values().all(|s| s.as_f64() == 0.0));
    }

    #[test]
    fn too_few_candidates_is_an_error() {
        let p = fixtures::profile(&["a"], &[("a", 1)]);
        assert_eq!(
            select(RuleId::MaxSum, &p),
            Err(RuleError::TooFewCandidates)
        );
    }

    #[test]
    fn exponent_validation_and_parsing() {
        assert!(PolarExponent::new(0, 1).is_err());
        assert!(PolarExponent::new(1, 0).is_err());
        assert_eq!(PolarExponent::new(4, 2).unwrap(), PolarExponent::integer(2).unwrap());
        assert_eq!("maxpolar:2".parse::<RuleId>().unwrap(), polar2());
        assert_eq!(
            "maxpolar:3/2".parse::<RuleId>().unwrap(),
            RuleId::MaxPolar(PolarExponent::new(3, 2).unwrap())
        );
        assert_eq!("borda".parse::<RuleId>().unwrap(), RuleId::Borda2);
        assert!("maxpolar:0".parse::<RuleId>().is_err());
        assert!("plurality".parse::<RuleId>().is_err());
        for rule in [
            RuleId::MaxSum,
            RuleId::MaxNash,
            RuleId::MaxSwap,
            polar2(),
            RuleId::Borda2,
            RuleId::Cc2,
        ] {
            assert_eq!(rule.to_string().parse::<RuleId>().unwrap(), rule);
        }
    }

    #[test]
    fn fractional_exponent_takes_float_path() {
        let p = fixtures::balance_contrast();
        let rule = RuleId::MaxPolar(PolarExponent::new(3, 2).unwrap());
        let out = select(rule, &p).unwrap();
        assert_eq!(out.winners, vec![pair(&p, "x", "y")]);
        assert!(matches!(out.scores[&out.winners[0]], Score::Approx(_)));
    }

    fn arb_profile() -> impl Strategy<Value = Profile> {
        (2usize..=5, 1usize..=5).prop_flat_map(|(m, lines)| {
            let ballot = Just((0..m).collect::<Vec<usize>>()).prop_shuffle();
            (proptest::collection::vec((ballot, 1u64..=4), lines), Just(m)).prop_map(
                |(orders, m)| Profile::from_orders(default_names(m), &orders).unwrap(),
            )
        })
    }

    proptest! {
        #[test]
        fn score_is_symmetric_in_the_pair(p in arb_profile()) {
            // Pair storage is canonical, so build the swapped pair explicitly.
            for q in p.pairs() {
                let swapped = Pair::new(q.b(), q.a()).unwrap();
                for rule in RuleId::conflictual_four() {
                    prop_assert_eq!(score(rule, &p, q), score(rule, &p, swapped));
                }
            }
        }

        #[test]
        fn scaling_multiplicities_keeps_winners(p in arb_profile(), k in 2u64..=4) {
            let scaled = p.scaled(k).unwrap();
            for rule in RuleId::conflictual_four() {
                let orig = select(rule, &p).unwrap();
                let big = select(rule, &scaled).unwrap();
                prop_assert_eq!(&orig.winners, &big.winners, "{}", rule);
            }
        }

        #[test]
        fn conflictual_rules_are_reverse_stable(p in arb_profile()) {
            let rev = p.reversed();
            for rule in RuleId::conflictual_four() {
                let fwd = select(rule, &p).unwrap();
                let bwd = select(rule, &rev).unwrap();
                prop_assert_eq!(&fwd.winners, &bwd.winners, "{}", rule);
            }
        }

        #[test]
        fn conflictual_winners_are_conflicting_when_possible(p in arb_profile()) {
            let any = p.has_conflicting_pair();
            for rule in RuleId::conflictual_four() {
                let out = select(rule, &p).unwrap();
                if any {
                    for w in &out.winners {
                        prop_assert!(p.is_conflicting(*w), "{}", rule);
                    }
                }
            }
        }
    }
}
