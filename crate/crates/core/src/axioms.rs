//! Decision procedures for the axioms of conflictual pair selection, plus a
//! seeded randomized counterexample search.
//!
//! Each check runs a rule on a concrete profile and verifies one property of
//! the winner set; failures carry a replayable witness (the profile, the
//! offending pairs, and a description of the violation).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::generators::{generate_stream, GeneratorConfig, GeneratorError};
use crate::profile::{Ballot, CandidateId, Pair, Profile};
use crate::rules::{select, RuleError, RuleId};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AxiomError {
    #[error("matching domination is defined only between conflicting pairs")]
    NonConflictingPair,
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
}

/// The checkable axioms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AxiomId {
    /// Winner sets agree on a profile and its full reversal.
    ReverseStability,
    /// Never pick a non-conflicting pair while a conflicting one exists.
    ConflictConsistency,
    /// A candidate topping every ballot sits in the winning committee.
    Unanimity,
    /// A selected pair stays selected after being pushed to the extremes of
    /// every ballot.
    AntagonizationConsistency,
    /// Matching-dominated pairs are never selected.
    MatchingDomination,
    /// Widening a winner's rank gap in one vote never unseats it.
    ConflictMonotonicity,
    /// Among pairs with identical distance multisets, more balanced group
    /// totals win.
    BalancePreference,
}

impl AxiomId {
    pub fn all() -> [AxiomId; 7] {
        [
            AxiomId::ReverseStability,
            AxiomId::ConflictConsistency,
            AxiomId::Unanimity,
            AxiomId::AntagonizationConsistency,
            AxiomId::MatchingDomination,
            AxiomId::ConflictMonotonicity,
            AxiomId::BalancePreference,
        ]
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            AxiomId::ReverseStability => "reverse-stability",
            AxiomId::ConflictConsistency => "conflict-consistency",
            AxiomId::Unanimity => "unanimity",
            AxiomId::AntagonizationConsistency => "antagonization-consistency",
            AxiomId::MatchingDomination => "matching-domination",
            AxiomId::ConflictMonotonicity => "conflict-monotonicity",
            AxiomId::BalancePreference => "balance-preference",
        };
        write!(f, "{name}")
    }
}

impl FromStr for AxiomId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reverse-stability" => Ok(AxiomId::ReverseStability),
            "conflict-consistency" => Ok(AxiomId::ConflictConsistency),
            "unanimity" => Ok(AxiomId::Unanimity),
            "antagonization-consistency" => Ok(AxiomId::AntagonizationConsistency),
            "matching-domination" => Ok(AxiomId::MatchingDomination),
            "conflict-monotonicity" => Ok(AxiomId::ConflictMonotonicity),
            "balance-preference" => Ok(AxiomId::BalancePreference),
            other => Err(format!("unknown axiom {other:?}")),
        }
    }
}

/// A replayable failure: re-running the same check on `profile` reproduces it.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub profile: Profile,
    /// Pairs involved in the violation (offender first).
    pub pairs: Vec<Pair>,
    pub description: String,
}

/// Verdict of one axiom check on one (rule, profile) instance.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub axiom: AxiomId,
    pub rule: RuleId,
    pub holds: bool,
    /// Present exactly when `holds` is false.
    pub witness: Option<Witness>,
    /// Extra observations that do not affect the verdict (e.g. the weak
    /// unanimity reading).
    pub notes: Vec<String>,
}

impl AxiomReport {
    fn pass(axiom: AxiomId, rule: RuleId) -> AxiomReport {
        AxiomReport {
            axiom,
            rule,
            holds: true,
            witness: None,
            notes: Vec::new(),
        }
    }

    fn fail(axiom: AxiomId, rule: RuleId, witness: Witness) -> AxiomReport {
        AxiomReport {
            axiom,
            rule,
            holds: false,
            witness: Some(witness),
            notes: Vec::new(),
        }
    }
}

fn show_pair(p: &Profile, q: Pair) -> String {
    format!("{{{},{}}}", p.name_of(q.a()), p.name_of(q.b()))
}

// --- matching domination ---------------------------------------------------

/// Absolute rank distances of one preference group, as a descending
/// run-length vector plus total weight and total distance.
#[derive(Debug, Clone, PartialEq, Eq)]
struct GroupVector {
    runs: Vec<(i128, u64)>, // (distance value, multiplicity), descending
    weight: u64,
    total: i128,
}

fn group_vectors(p: &Profile, q: Pair) -> (GroupVector, GroupVector) {
    let mut side_a: Vec<(i128, u64)> = Vec::new();
    let mut side_b: Vec<(i128, u64)> = Vec::new();
    for (ballot, mult) in p.ballots() {
        let d = ballot.signed_distance(q) as i128;
        if d > 0 {
            side_a.push((d, *mult));
        } else {
            side_b.push((-d, *mult));
        }
    }
    (pack_runs(side_a), pack_runs(side_b))
}

fn pack_runs(mut values: Vec<(i128, u64)>) -> GroupVector {
    values.sort_unstable_by_key(|(v, _)| std::cmp::Reverse(*v));
    let mut runs: Vec<(i128, u64)> = Vec::with_capacity(values.len());
    let mut weight = 0u64;
    let mut total = 0i128;
    for (v, c) in values {
        weight += c;
        total += v * c as i128;
        match runs.last_mut() {
            Some((last, count)) if *last == v => *count += c,
            _ => runs.push((v, c)),
        }
    }
    GroupVector {
        runs,
        weight,
        total,
    }
}

/// Element-wise `>=` between two descending multisets of equal cardinality,
/// compared run by run without expansion.
fn runs_dominate(dom: &GroupVector, sub: &GroupVector) -> bool {
    debug_assert_eq!(dom.weight, sub.weight);
    let (mut i, mut j) = (0usize, 0usize);
    let (mut left_i, mut left_j) = (0u64, 0u64);
    loop {
        if i == dom.runs.len() && j == sub.runs.len() {
            return true;
        }
        if i == dom.runs.len() || j == sub.runs.len() {
            return false; // unequal weights; guarded by the debug assert
        }
        let (dv, dc) = dom.runs[i];
        let (sv, sc) = sub.runs[j];
        if dv < sv {
            return false;
        }
        let remaining_d = dc - left_i;
        let remaining_s = sc - left_j;
        let step = remaining_d.min(remaining_s);
        left_i += step;
        left_j += step;
        if left_i == dc {
            i += 1;
            left_i = 0;
        }
        if left_j == sc {
            j += 1;
            left_j = 0;
        }
    }
}

/// Whether `dominator` matching-dominates `dominated`: some group-respecting
/// voter bijection makes the dominator's absolute rank distances weakly larger
/// everywhere and strictly larger somewhere.
///
/// Decision procedure: after aligning the two preference groups (both
/// orientations of the unordered pairs are tried), a pointwise-`>=` bijection
/// exists within a group exactly when the descending distance vectors dominate
/// element-wise, and strictness is equivalent to a strict gap in the grand
/// totals. The brute-force bijection oracle in the test suites guards this.
pub fn matching_dominates(
    p: &Profile,
    dominator: Pair,
    dominated: Pair,
) -> Result<bool, AxiomError> {
    if !p.is_conflicting(dominator) || !p.is_conflicting(dominated) {
        return Err(AxiomError::NonConflictingPair);
    }
    if dominator == dominated {
        return Ok(false);
    }
    let (dom_a, dom_b) = group_vectors(p, dominator);
    let (sub_a, sub_b) = group_vectors(p, dominated);
    if dom_a.total + dom_b.total <= sub_a.total + sub_b.total {
        // No strict inequality is possible anywhere.
        return Ok(false);
    }
    let straight = dom_a.weight == sub_a.weight
        && dom_b.weight == sub_b.weight
        && runs_dominate(&dom_a, &sub_a)
        && runs_dominate(&dom_b, &sub_b);
    if straight {
        return Ok(true);
    }
    let crossed = dom_a.weight == sub_b.weight
        && dom_b.weight == sub_a.weight
        && runs_dominate(&dom_a, &sub_b)
        && runs_dominate(&dom_b, &sub_a);
    Ok(crossed)
}

// --- axiom checks ------------------------------------------------------------

/// Runs one axiom check for `rule` on `p`. Total for every axiom/rule
/// combination; failures carry a witness.
pub fn check_axiom(axiom: AxiomId, rule: RuleId, p: &Profile) -> Result<AxiomReport, RuleError> {
    match axiom {
        AxiomId::ReverseStability => check_reverse_stability(rule, p),
        AxiomId::ConflictConsistency => check_conflict_consistency(rule, p),
        AxiomId::Unanimity => check_unanimity(rule, p),
        AxiomId::AntagonizationConsistency => check_antagonization(rule, p),
        AxiomId::MatchingDomination => check_matching_domination(rule, p),
        AxiomId::ConflictMonotonicity => check_conflict_monotonicity(rule, p),
        AxiomId::BalancePreference => check_balance_preference(rule, p),
    }
}

fn check_reverse_stability(rule: RuleId, p: &Profile) -> Result<AxiomReport, RuleError> {
    let fwd = select(rule, p)?;
    let bwd = select(rule, &p.reversed())?;
    if fwd.winners == bwd.winners {
        return Ok(AxiomReport::pass(AxiomId::ReverseStability, rule));
    }
    let fwd_names: Vec<String> = fwd.winners.iter().map(|q| show_pair(p, *q)).collect();
    let bwd_names: Vec<String> = bwd.winners.iter().map(|q| show_pair(p, *q)).collect();
    Ok(AxiomReport::fail(
        AxiomId::ReverseStability,
        rule,
        Witness {
            profile: p.clone(),
            pairs: fwd.winners.clone(),
            description: format!(
                "winners {} become {} after reversing every ballot",
                fwd_names.join(" "),
                bwd_names.join(" ")
            ),
        },
    ))
}

fn check_conflict_consistency(rule: RuleId, p: &Profile) -> Result<AxiomReport, RuleError> {
    let out = select(rule, p)?;
    if !p.has_conflicting_pair() {
        return Ok(AxiomReport::pass(AxiomId::ConflictConsistency, rule));
    }
    for w in &out.winners {
        if !p.is_conflicting(*w) {
            return Ok(AxiomReport::fail(
                AxiomId::ConflictConsistency,
                rule,
                Witness {
                    profile: p.clone(),
                    pairs: vec![*w],
                    description: format!(
                        "non-conflicting winner {} although a conflicting pair exists",
                        show_pair(p, *w)
                    ),
                },
            ));
        }
    }
    Ok(AxiomReport::pass(AxiomId::ConflictConsistency, rule))
}

/// The unanimous top candidate, when one exists.
fn unanimous_top(p: &Profile) -> Option<CandidateId> {
    let first = p.ballots()[0].0.order()[0];
    p.ballots()
        .iter()
        .all(|(b, _)| b.order()[0] == first)
        .then_some(first)
}

fn check_unanimity(rule: RuleId, p: &Profile) -> Result<AxiomReport, RuleError> {
    let Some(top) = unanimous_top(p) else {
        return Ok(AxiomReport::pass(AxiomId::Unanimity, rule));
    };
    let out = select(rule, p)?;
    let in_some = out.winners.iter().any(|w| w.contains(top));
    let in_every = out.winners.iter().all(|w| w.contains(top));
    // Two readings against set-valued output: membership in every winning
    // committee (strict, used for the verdict) and in at least one (weak,
    // reported alongside).
    let note = format!(
        "unanimous top {}: in every winning committee = {in_every}, in some = {in_some}",
        p.name_of(top)
    );
    let mut report = if in_every {
        AxiomReport::pass(AxiomId::Unanimity, rule)
    } else {
        AxiomReport::fail(
            AxiomId::Unanimity,
            rule,
            Witness {
                profile: p.clone(),
                pairs: out.winners.clone(),
                description: format!(
                    "candidate {} tops every ballot but misses a winning committee",
                    p.name_of(top)
                ),
            },
        )
    };
    report.notes.push(note);
    Ok(report)
}

fn check_antagonization(rule: RuleId, p: &Profile) -> Result<AxiomReport, RuleError> {
    let out = select(rule, p)?;
    for w in &out.winners {
        let pushed = p.antagonized(*w);
        let after = select(rule, &pushed)?;
        if !after.is_winner(*w) {
            return Ok(AxiomReport::fail(
                AxiomId::AntagonizationConsistency,
                rule,
                Witness {
                    profile: p.clone(),
                    pairs: vec![*w],
                    description: format!(
                        "winner {} is dropped after antagonizing it",
                        show_pair(p, *w)
                    ),
                },
            ));
        }
    }
    Ok(AxiomReport::pass(AxiomId::AntagonizationConsistency, rule))
}

fn check_matching_domination(rule: RuleId, p: &Profile) -> Result<AxiomReport, RuleError> {
    let out = select(rule, p)?;
    let conflicting: Vec<Pair> = p.pairs().filter(|q| p.is_conflicting(*q)).collect();
    for w in &out.winners {
        if !p.is_conflicting(*w) {
            continue; // domination is only defined between conflicting pairs
        }
        for q in &conflicting {
            if q == w {
                continue;
            }
            let dominated = matching_dominates(p, *q, *w)
                .expect("both pairs verified conflicting");
            if dominated {
                return Ok(AxiomReport::fail(
                    AxiomId::MatchingDomination,
                    rule,
                    Witness {
                        profile: p.clone(),
                        pairs: vec![*w, *q],
                        description: format!(
                            "winner {} is matching-dominated by {}",
                            show_pair(p, *w),
                            show_pair(p, *q)
                        ),
                    },
                ));
            }
        }
    }
    Ok(AxiomReport::pass(AxiomId::MatchingDomination, rule))
}

/// Profile with one copy of ballot `idx` replaced by `mutated`.
fn with_one_copy_mutated(p: &Profile, idx: usize, mutated: Ballot) -> Profile {
    let mut ballots: Vec<(Ballot, u64)> = p.ballots().to_vec();
    if ballots[idx].1 == 1 {
        ballots[idx].0 = mutated;
    } else {
        ballots[idx].1 -= 1;
        ballots.push((mutated, 1));
    }
    Profile::new(p.names().to_vec(), ballots).expect("mutation keeps the profile valid")
}

fn check_conflict_monotonicity(rule: RuleId, p: &Profile) -> Result<AxiomReport, RuleError> {
    let out = select(rule, p)?;
    for w in &out.winners {
        for (idx, (ballot, _)) in p.ballots().iter().enumerate() {
            let before = ballot.signed_distance(*w).unsigned_abs();
            for site in 0..p.m() - 1 {
                let (x, y) = (ballot.order()[site], ballot.order()[site + 1]);
                if !w.contains(x) && !w.contains(y) {
                    continue;
                }
                let mut order = ballot.order().to_vec();
                order.swap(site, site + 1);
                let swapped = Ballot::from_order(order).expect("swap keeps a permutation");
                if swapped.signed_distance(*w).unsigned_abs() <= before {
                    continue;
                }
                let mutated = with_one_copy_mutated(p, idx, swapped);
                let after = select(rule, &mutated)?;
                if !after.is_winner(*w) {
                    return Ok(AxiomReport::fail(
                        AxiomId::ConflictMonotonicity,
                        rule,
                        Witness {
                            profile: p.clone(),
                            pairs: vec![*w],
                            description: format!(
                                "widening {} by swapping ranks {}-{} of one copy of ballot #{} unseats it",
                                show_pair(p, *w),
                                site + 1,
                                site + 2,
                                idx
                            ),
                        },
                    ));
                }
            }
        }
    }
    Ok(AxiomReport::pass(AxiomId::ConflictMonotonicity, rule))
}

fn check_balance_preference(rule: RuleId, p: &Profile) -> Result<AxiomReport, RuleError> {
    let out = select(rule, p)?;
    let pairs: Vec<Pair> = p.pairs().collect();
    // Absolute-distance multiset (as packed runs over both groups) and the
    // absolute signed total per pair.
    let data: Vec<(Vec<(i128, u64)>, i128)> = pairs
        .iter()
        .map(|q| {
            let all: Vec<(i128, u64)> = p
                .ballots()
                .iter()
                .map(|(b, mult)| (b.signed_distance(*q).unsigned_abs() as i128, *mult))
                .collect();
            let signed: i128 = p
                .ballots()
                .iter()
                .map(|(b, mult)| b.signed_distance(*q) as i128 * *mult as i128)
                .sum();
            (pack_runs(all).runs, signed.abs())
        })
        .collect();
    for (i, balanced) in pairs.iter().enumerate() {
        for (j, skewed) in pairs.iter().enumerate() {
            if i == j || data[i].0 != data[j].0 || data[i].1 >= data[j].1 {
                continue;
            }
            // Same distance multiset, strictly more balanced totals at i:
            // pair j must not be selected.
            if out.is_winner(*skewed) {
                return Ok(AxiomReport::fail(
                    AxiomId::BalancePreference,
                    rule,
                    Witness {
                        profile: p.clone(),
                        pairs: vec![*skewed, *balanced],
                        description: format!(
                            "{} wins although {} has the same distance multiset and more balanced group totals",
                            show_pair(p, *skewed),
                            show_pair(p, *balanced)
                        ),
                    },
                ));
            }
        }
    }
    Ok(AxiomReport::pass(AxiomId::BalancePreference, rule))
}

// --- randomized counterexample search ----------------------------------------

/// A failing trial found by the search.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleHit {
    /// Index of the failing trial; the search returns the smallest one.
    pub trial: u64,
    pub report: AxiomReport,
}

/// Samples `budget` profiles from `gen` (seed overridden by `seed`, stream =
/// trial index) and returns the earliest failing witness, if any.
pub fn search_counterexample(
    axiom: AxiomId,
    rule: RuleId,
    gen: &GeneratorConfig,
    budget: u64,
    seed: u64,
) -> Result<Option<CounterexampleHit>, AxiomError> {
    let cfg = GeneratorConfig {
        seed,
        ..gen.clone()
    };
    // Surface configuration problems before fanning out.
    generate_stream(&cfg, 0)?;
    search_counterexample_with(axiom, rule, budget, |trial| {
        generate_stream(&cfg, trial).expect("configuration validated")
    })
}

/// Like [`search_counterexample`] but with an arbitrary profile sampler
/// (trial index -> profile).
pub fn search_counterexample_with<F>(
    axiom: AxiomId,
    rule: RuleId,
    budget: u64,
    sampler: F,
) -> Result<Option<CounterexampleHit>, AxiomError>
where
    F: Fn(u64) -> Profile + Sync,
{
    #[cfg(feature = "parallel")]
    {
        (0..budget)
            .into_par_iter()
            .find_map_first(|trial| run_trial(axiom, rule, trial, &sampler))
            .transpose()
    }
    #[cfg(not(feature = "parallel"))]
    search_counterexample_seq(axiom, rule, budget, sampler)
}

/// Sequential twin of [`search_counterexample_with`].
pub fn search_counterexample_seq<F>(
    axiom: AxiomId,
    rule: RuleId,
    budget: u64,
    sampler: F,
) -> Result<Option<CounterexampleHit>, AxiomError>
where
    F: Fn(u64) -> Profile,
{
    for trial in 0..budget {
        if let Some(outcome) = run_trial(axiom, rule, trial, &sampler) {
            return outcome.map(Some);
        }
    }
    Ok(None)
}

fn run_trial<F>(
    axiom: AxiomId,
    rule: RuleId,
    trial: u64,
    sampler: &F,
) -> Option<Result<CounterexampleHit, AxiomError>>
where
    F: Fn(u64) -> Profile,
{
    let profile = sampler(trial);
    match check_axiom(axiom, rule, &profile) {
        Ok(report) if !report.holds => Some(Ok(CounterexampleHit { trial, report })),
        Ok(_) => None,
        Err(e) => Some(Err(AxiomError::from(e))),
    }
}
