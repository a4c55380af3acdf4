//! Preference-profile data model: candidate ids, ballots, weighted profiles,
//! and the elementary rank operations every other module consumes.

use std::fmt;

use thiserror::Error;

/// Dense index of a candidate within one profile's roster.
///
/// Display names live in [`Profile`]; everything computational works on
/// indices so a ballot can answer position queries in O(1) via an inverse
/// permutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateId(pub usize);

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProfileError {
    #[error("candidate {0} is outside a roster of {1} candidates")]
    UnknownCandidate(CandidateId, usize),
    #[error("operation requires two distinct candidates")]
    IdenticalCandidates,
    #[error("ballot is not a permutation of the roster")]
    NotAPermutation,
    #[error("ballot multiplicity must be positive")]
    ZeroMultiplicity,
    #[error("profile needs at least one ballot")]
    EmptyProfile,
    #[error("roster needs at least one candidate")]
    EmptyRoster,
    #[error("candidate names must be unique and non-empty")]
    BadNames,
    #[error("ballots must all rank the same roster")]
    RosterMismatch,
    #[error("no candidate is named {0:?}")]
    NoSuchName(String),
}

/// An unordered pair of distinct candidates, stored canonically (`a < b`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    a: CandidateId,
    b: CandidateId,
}

impl Pair {
    /// Builds the canonical pair `{x, y}`; rejects `x == y`.
    pub fn new(x: CandidateId, y: CandidateId) -> Result<Pair, ProfileError> {
        if x == y {
            return Err(ProfileError::IdenticalCandidates);
        }
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        Ok(Pair { a, b })
    }

    /// Lower candidate index of the pair.
    pub fn a(&self) -> CandidateId {
        self.a
    }

    /// Higher candidate index of the pair.
    pub fn b(&self) -> CandidateId {
        self.b
    }

    pub fn contains(&self, c: CandidateId) -> bool {
        self.a == c || self.b == c
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// A strict total order over the roster.
///
/// Stores both the ranked candidate sequence and its inverse permutation, so
/// `position` is an array lookup.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ballot {
    order: Vec<CandidateId>,
    rank: Vec<u32>, // rank[c] = 1-based position of candidate c
}

impl Ballot {
    /// Builds a ballot from a ranked candidate sequence, best first.
    /// The sequence must be a permutation of `0..order.len()`.
    pub fn from_order(order: Vec<CandidateId>) -> Result<Ballot, ProfileError> {
        let m = order.len();
        if m == 0 {
            return Err(ProfileError::EmptyRoster);
        }
        let mut rank = vec![0u32; m];
        for (pos, c) in order.iter().enumerate() {
            if c.0 >= m {
                return Err(ProfileError::NotAPermutation);
            }
            if rank[c.0] != 0 {
                return Err(ProfileError::NotAPermutation);
            }
            rank[c.0] = pos as u32 + 1;
        }
        Ok(Ballot { order, rank })
    }

    /// Convenience constructor from raw indices.
    pub fn from_indices(order: &[usize]) -> Result<Ballot, ProfileError> {
        Self::from_order(order.iter().copied().map(CandidateId).collect())
    }

    /// Roster size.
    pub fn m(&self) -> usize {
        self.order.len()
    }

    /// Ranked candidates, best first.
    pub fn order(&self) -> &[CandidateId] {
        &self.order
    }

    /// 1-based rank of `c` (1 = most preferred).
    pub fn position(&self, c: CandidateId) -> Result<u32, ProfileError> {
        self.rank
            .get(c.0)
            .copied()
            .ok_or(ProfileError::UnknownCandidate(c, self.m()))
    }

    /// Signed rank distance `position(b) - position(a)`: positive when the
    /// voter prefers `a` to `b`.
    pub fn rank_distance(&self, a: CandidateId, b: CandidateId) -> Result<i64, ProfileError> {
        if a == b {
            return Err(ProfileError::IdenticalCandidates);
        }
        let pa = self.position(a)?;
        let pb = self.position(b)?;
        Ok(i64::from(pb) - i64::from(pa))
    }

    /// Signed rank distance for a canonical pair, oriented from `pair.a()`.
    ///
    /// Panics if the pair lies outside this ballot's roster.
    pub fn signed_distance(&self, pair: Pair) -> i64 {
        i64::from(self.rank[pair.b().0]) - i64::from(self.rank[pair.a().0])
    }

    /// True when this voter ranks `pair.a()` above `pair.b()`.
    pub fn prefers_a(&self, pair: Pair) -> bool {
        self.signed_distance(pair) > 0
    }

    /// The same ballot read back to front.
    pub fn reversed(&self) -> Ballot {
        let order: Vec<CandidateId> = self.order.iter().rev().copied().collect();
        Ballot::from_order(order).expect("reversal preserves permutations")
    }
}

/// Multiplicity-weighted split of a profile's voters around one pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceSplit {
    /// Total weight of voters preferring `pair.a()` to `pair.b()`.
    pub weight_for_a: u64,
    /// Total weight of voters preferring `pair.b()` to `pair.a()`.
    pub weight_for_b: u64,
    /// Ballot indices (into `Profile::ballots`) and multiplicities on the `a` side.
    pub ballots_for_a: Vec<(usize, u64)>,
    /// Ballot indices and multiplicities on the `b` side.
    pub ballots_for_b: Vec<(usize, u64)>,
}

/// A candidate roster plus a multiset of ballots with positive integer
/// multiplicities. Immutable after construction; all operations are pure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    names: Vec<String>,
    ballots: Vec<(Ballot, u64)>,
    total_weight: u64,
}

/// Default roster names `c0, c1, ...` used by generators.
pub fn default_names(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("c{i}")).collect()
}

impl Profile {
    pub fn new(names: Vec<String>, ballots: Vec<(Ballot, u64)>) -> Result<Profile, ProfileError> {
        let m = names.len();
        if m == 0 {
            return Err(ProfileError::EmptyRoster);
        }
        if ballots.is_empty() {
            return Err(ProfileError::EmptyProfile);
        }
        {
            let mut seen = names.iter().map(String::as_str).collect::<Vec<_>>();
            seen.sort_unstable();
            if names.iter().any(|n| n.is_empty()) || seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(ProfileError::BadNames);
            }
        }
        let mut total: u64 = 0;
        for (ballot, mult) in &ballots {
            if ballot.m() != m {
                return Err(ProfileError::RosterMismatch);
            }
            if *mult == 0 {
                return Err(ProfileError::ZeroMultiplicity);
            }
            total = total
                .checked_add(*mult)
                .expect("total voter weight overflows u64");
        }
        Ok(Profile {
            names,
            ballots,
            total_weight: total,
        })
    }

    /// Builds a profile from raw index orders with default validation.
    pub fn from_orders(
        names: Vec<String>,
        orders: &[(Vec<usize>, u64)],
    ) -> Result<Profile, ProfileError> {
        let ballots = orders
            .iter()
            .map(|(order, mult)| Ok((Ballot::from_indices(order)?, *mult)))
            .collect::<Result<Vec<_>, ProfileError>>()?;
        Profile::new(names, ballots)
    }

    /// Number of candidates.
    pub fn m(&self) -> usize {
        self.names.len()
    }

    /// Total voter weight `n` (the sum of multiplicities).
    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    /// Distinct ballot lines with their multiplicities.
    pub fn ballots(&self) -> &[(Ballot, u64)] {
        &self.ballots
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name_of(&self, c: CandidateId) -> &str {
        &self.names[c.0]
    }

    pub fn candidate_named(&self, name: &str) -> Result<CandidateId, ProfileError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(CandidateId)
            .ok_or_else(|| ProfileError::NoSuchName(name.to_owned()))
    }

    /// All unordered candidate pairs in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        let m = self.m();
        (0..m).flat_map(move |a| {
            (a + 1..m).map(move |b| {
                Pair::new(CandidateId(a), CandidateId(b)).expect("indices are distinct")
            })
        })
    }

    /// Splits the electorate by its preference on `pair`.
    pub fn partition_by_preference(&self, pair: Pair) -> PreferenceSplit {
        let mut split = PreferenceSplit {
            weight_for_a: 0,
            weight_for_b: 0,
            ballots_for_a: Vec::new(),
            ballots_for_b: Vec::new(),
        };
        for (idx, (ballot, mult)) in self.ballots.iter().enumerate() {
            if ballot.prefers_a(pair) {
                split.weight_for_a += *mult;
                split.ballots_for_a.push((idx, *mult));
            } else {
                split.weight_for_b += *mult;
                split.ballots_for_b.push((idx, *mult));
            }
        }
        split
    }

    /// A pair is conflicting when its ordering is not unanimous.
    pub fn is_conflicting(&self, pair: Pair) -> bool {
        let mut seen_a = false;
        let mut seen_b = false;
        for (ballot, _) in &self.ballots {
            if ballot.prefers_a(pair) {
                seen_a = true;
            } else {
                seen_b = true;
            }
            if seen_a && seen_b {
                return true;
            }
        }
        false
    }

    /// True when at least one pair of candidates is conflicting.
    pub fn has_conflicting_pair(&self) -> bool {
        self.pairs().any(|p| self.is_conflicting(p))
    }

    /// The profile with every ballot reversed. An involution.
    pub fn reversed(&self) -> Profile {
        let ballots = self
            .ballots
            .iter()
            .map(|(b, mult)| (b.reversed(), *mult))
            .collect();
        Profile {
            names: self.names.clone(),
            ballots,
            total_weight: self.total_weight,
        }
    }

    /// Pushes, in every ballot, the preferred candidate of `pair` to the top
    /// and the other to the bottom, keeping all remaining candidates in their
    /// relative order. Idempotent.
    pub fn antagonized(&self, pair: Pair) -> Profile {
        let ballots = self
            .ballots
            .iter()
            .map(|(ballot, mult)| {
                let (top, bottom) = if ballot.prefers_a(pair) {
                    (pair.a(), pair.b())
                } else {
                    (pair.b(), pair.a())
                };
                let mut order = Vec::with_capacity(ballot.m());
                order.push(top);
                order.extend(ballot.order().iter().copied().filter(|c| !pair.contains(*c)));
                order.push(bottom);
                (
                    Ballot::from_order(order).expect("shift preserves permutations"),
                    *mult,
                )
            })
            .collect();
        Profile {
            names: self.names.clone(),
            ballots,
            total_weight: self.total_weight,
        }
    }

    /// The same profile with every multiplicity scaled by `k > 0`.
    pub fn scaled(&self, k: u64) -> Result<Profile, ProfileError> {
        if k == 0 {
            return Err(ProfileError::ZeroMultiplicity);
        }
        let ballots = self
            .ballots
            .iter()
            .map(|(b, mult)| (b.clone(), mult * k))
            .collect();
        Profile::new(self.names.clone(), ballots)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    fn abcde() -> Ballot {
        Ballot::from_indices(&[0, 1, 2, 3, 4]).unwrap()
    }

    #[test]
    fn position_is_one_based() {
        let b = abcde();
        assert_eq!(b.position(CandidateId(1)).unwrap(), 2);
        assert_eq!(b.position(CandidateId(4)).unwrap(), 5);
        assert_eq!(b.position(b.order()[0]).unwrap(), 1);
    }

    #[test]
    fn position_rejects_unknown_candidate() {
        let b = abcde();
        assert_eq!(
            b.position(CandidateId(7)),
            Err(ProfileError::UnknownCandidate(CandidateId(7), 5))
        );
    }

    #[test]
    fn rank_distance_matches_definition() {
        // a > b > c > d > e: distance(b, e) = 5 - 2 = 3.
        let b = abcde();
        assert_eq!(b.rank_distance(CandidateId(1), CandidateId(4)).unwrap(), 3);
        assert_eq!(b.rank_distance(CandidateId(4), CandidateId(1)).unwrap(), -3);
        assert_eq!(b.rank_distance(CandidateId(2), CandidateId(3)).unwrap(), 1);
        assert_eq!(
            b.rank_distance(CandidateId(2), CandidateId(2)),
            Err(ProfileError::IdenticalCandidates)
        );
    }

    #[test]
    fn ballot_rejects_non_permutations() {
        assert!(Ballot::from_indices(&[0, 0, 1]).is_err());
        assert!(Ballot::from_indices(&[0, 1, 3]).is_err());
        assert!(Ballot::from_indices(&[]).is_err());
    }

    #[test]
    fn pair_is_canonical() {
        let p = Pair::new(CandidateId(3), CandidateId(1)).unwrap();
        assert_eq!(p.a(), CandidateId(1));
        assert_eq!(p.b(), CandidateId(3));
        assert!(Pair::new(CandidateId(2), CandidateId(2)).is_err());
    }

    #[test]
    fn partition_on_six_candidate_demo() {
        let p = fixtures::six_candidate_demo();
        let pair = fixtures::pair(&p, "a", "b");
        let split = p.partition_by_preference(pair);
        assert_eq!((split.weight_for_a, split.weight_for_b), (1, 1));
    }

    #[test]
    fn partition_on_balance_contrast() {
        let p = fixtures::balance_contrast();
        let pair = fixtures::pair(&p, "x", "y");
        let split = p.partition_by_preference(pair);
        assert_eq!((split.weight_for_a, split.weight_for_b), (2, 2));
        let pair = fixtures::pair(&p, "a", "b");
        let split = p.partition_by_preference(pair);
        assert_eq!(split.weight_for_a + split.weight_for_b, 4);
    }

    #[test]
    fn identity_profile_is_unanimous_everywhere() {
        let p = fixtures::profile(&["a", "b", "c"], &[("a b c", 5)]);
        for pair in p.pairs() {
            let split = p.partition_by_preference(pair);
            assert_eq!(split.weight_for_a + split.weight_for_b, 5);
            assert_eq!(split.weight_for_a.min(split.weight_for_b), 0);
            assert!(!p.is_conflicting(pair));
        }
    }

    #[test]
    fn conflicting_pairs_of_unanimous_top_conflict() {
        let p = fixtures::unanimous_top_conflict();
        let bc = fixtures::pair(&p, "b", "c");
        let ab = fixtures::pair(&p, "a", "b");
        assert!(p.is_conflicting(bc));
        assert!(!p.is_conflicting(ab));
        let conflicting: Vec<Pair> = p.pairs().filter(|q| p.is_conflicting(*q)).collect();
        assert_eq!(conflicting, vec![bc]);
    }

    #[test]
    fn reversal_reverses_each_ballot() {
        let p = fixtures::six_candidate_demo();
        let rev = p.reversed();
        let first = &rev.ballots()[0].0;
        let names: Vec<&str> = first.order().iter().map(|c| rev.name_of(*c)).collect();
        assert_eq!(names, ["b", "y", "d", "c", "x", "a"]);
    }

    #[test]
    fn antagonize_moves_pair_to_extremes() {
        let p = fixtures::profile(&["x", "a", "b", "y"], &[("x a b y", 1)]);
        let pair = fixtures::pair(&p, "a", "b");
        let ant = p.antagonized(pair);
        let names: Vec<&str> = ant.ballots()[0]
            .0
            .order()
            .iter()
            .map(|c| ant.name_of(*c))
            .collect();
        assert_eq!(names, ["a", "x", "y", "b"]);
    }

    #[test]
    fn antagonize_fixed_point() {
        let p = fixtures::profile(&["a", "b", "c", "d"], &[("a c d b", 2)]);
        let pair = fixtures::pair(&p, "a", "b");
        assert_eq!(p.antagonized(pair), p);
    }

    fn arb_profile() -> impl Strategy<Value = Profile> {
        (2usize..6, 1usize..5).prop_flat_map(|(m, lines)| {
            let ballot = Just((0..m).collect::<Vec<usize>>())
                .prop_shuffle()
                .prop_map(move |order| order);
            (
                proptest::collection::vec((ballot, 1u64..4), lines),
                Just(m),
            )
                .prop_map(|(orders, m)| {
                    Profile::from_orders(default_names(m), &orders).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn positions_form_a_permutation(p in arb_profile()) {
            for (ballot, _) in p.ballots() {
                let mut seen: Vec<u32> = (0..p.m())
                    .map(|c| ballot.position(CandidateId(c)).unwrap())
                    .collect();
                seen.sort_unstable();
                let expect: Vec<u32> = (1..=p.m() as u32).collect();
                prop_assert_eq!(seen, expect);
            }
        }

        #[test]
        fn rank_distance_is_antisymmetric(p in arb_profile()) {
            for (ballot, _) in p.ballots() {
                for pair in p.pairs() {
                    let d = ballot.rank_distance(pair.a(), pair.b()).unwrap();
                    let r = ballot.rank_distance(pair.b(), pair.a()).unwrap();
                    prop_assert_eq!(d + r, 0);
                    prop_assert!(d.unsigned_abs() >= 1);
                    prop_assert!(d.unsigned_abs() < p.m() as u64);
                }
            }
        }

        #[test]
        fn partition_weights_sum_to_n(p in arb_profile()) {
            for pair in p.pairs() {
                let split = p.partition_by_preference(pair);
                prop_assert_eq!(split.weight_for_a + split.weight_for_b, p.total_weight());
            }
        }

        #[test]
        fn reversal_is_an_involution_and_swaps_partitions(p in arb_profile()) {
            let rev = p.reversed();
            prop_assert_eq!(rev.reversed(), p.clone());
            for pair in p.pairs() {
                let s = p.partition_by_preference(pair);
                let r = rev.partition_by_preference(pair);
                prop_assert_eq!(s.weight_for_a, r.weight_for_b);
                prop_assert_eq!(s.weight_for_b, r.weight_for_a);
            }
        }

        #[test]
        fn antagonize_preserves_structure(p in arb_profile()) {
            for pair in p.pairs() {
                let ant = p.antagonized(pair);
                prop_assert_eq!(ant.total_weight(), p.total_weight());
                prop_assert_eq!(ant.m(), p.m());
                // Partition weights of the antagonized pair survive.
                let before = p.partition_by_preference(pair);
                let after = ant.partition_by_preference(pair);
                prop_assert_eq!(before.weight_for_a, after.weight_for_a);
                prop_assert_eq!(before.weight_for_b, after.weight_for_b);
                // Idempotence.
                prop_assert_eq!(ant.antagonized(pair), ant.clone());
                for ((orig, _), (moved, _)) in p.ballots().iter().zip(ant.ballots()) {
                    // Maximal separation in every ballot.
                    prop_assert_eq!(
                        moved.signed_distance(pair).unsigned_abs(),
                        p.m() as u64 - 1
                    );
                    // Relative order of everything else is untouched.
                    let rest_before: Vec<CandidateId> = orig
                        .order()
                        .iter()
                        .copied()
                        .filter(|c| !pair.contains(*c))
                        .collect();
                    let rest_after: Vec<CandidateId> = moved
                        .order()
                        .iter()
                        .copied()
                        .filter(|c| !pair.contains(*c))
                        .collect();
                    prop_assert_eq!(rest_before, rest_after);
                }
            }
        }
    }
}
