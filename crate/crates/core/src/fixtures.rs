//! Small hand-built profiles used across the test suites and exposed by the
//! CLI for inspection. Each one exercises a specific behavior of the rules or
//! axioms.

use crate::profile::{Pair, Profile};

/// Builds a profile from whitespace- or `>`-separated ballot strings.
///
/// Panics on malformed input; intended for fixtures and tests.
pub fn profile(names: &[&str], ballots: &[(&str, u64)]) -> Profile {
    let owned: Vec<String> = names.iter().map(|s| (*s).to_owned()).collect();
    let orders: Vec<(Vec<usize>, u64)> = ballots
        .iter()
        .map(|(text, mult)| {
            let order: Vec<usize> = text
                .split(|ch: char| ch.is_whitespace() || ch == '>')
                .filter(|tok| !tok.is_empty())
                .map(|tok| {
                    names
                        .iter()
                        .position(|n| *n == tok)
                        .unwrap_or_else(|| panic!("unknown candidate {tok:?} in fixture"))
                })
                .collect();
            (order, *mult)
        })
        .collect();
    Profile::from_orders(owned, &orders).expect("fixture profiles are valid")
}

/// Looks up a pair by candidate names. Panics on unknown names.
pub fn pair(p: &Profile, a: &str, b: &str) -> Pair {
    Pair::new(
        p.candidate_named(a).expect("known candidate"),
        p.candidate_named(b).expect("known candidate"),
    )
    .expect("distinct candidates")
}

/// Two voters over six candidates. The additive conflict score ties several
/// pairs while the multiplicative one singles out `{x,y}`; `{a,b}` has a very
/// lopsided discrepancy split (one extreme supporter, one near-indifferent).
pub fn six_candidate_demo() -> Profile {
    profile(
        &["a", "b", "c", "d", "x", "y"],
        &[("a x c d y b", 1), ("c y b a x d", 1)],
    )
}

/// Four voters over four candidates. `{x,y}` splits the electorate evenly but
/// with one extreme and one indifferent camp; `{a,b}` splits it 3:1 with
/// balanced per-group intensity. Separates the balance-sensitive rules from
/// the rest.
pub fn balance_contrast() -> Profile {
    profile(
        &["a", "b", "x", "y"],
        &[("x a b y", 2), ("a y x b", 1), ("b y x a", 1)],
    )
}

/// Twelve voters over four candidates. `{a,b}` and `{c,d}` need the same
/// minimal number of swaps to become non-conflicting, yet `{c,d}`'s distance
/// vector dominates `{a,b}`'s under the identity matching.
pub fn swap_dominated_tie() -> Profile {
    profile(
        &["a", "b", "c", "d"],
        &[("d b a c", 10), ("a c b d", 1), ("c a d b", 1)],
    )
}

/// Two voters who agree that `a` is best and disagree only on `{b,c}`: the
/// unanimous favorite cannot sit in the single conflicting pair.
pub fn unanimous_top_conflict() -> Profile {
    profile(&["a", "b", "c"], &[("a b c", 1), ("a c b", 1)])
}

/// Four voters over four candidates; `{a,b}` matching-dominates `{x,y}`
/// through a crossed (non-identity) voter matching.
pub fn matched_quartet() -> Profile {
    profile(
        &["a", "b", "x", "y"],
        &[
            ("a x y b", 1),
            ("a y x b", 1),
            ("b x a y", 1),
            ("b y a x", 1),
        ],
    )
}

/// Two-voter profile where `{a,b}` and `{c,d}` are the only conflicting pairs;
/// raising the `{a,b}` distance in one vote hands the lead to a pair that
/// dominates it. Base profile of the monotonicity trap.
pub fn monotonicity_trap() -> Profile {
    profile(&["a", "b", "c", "d"], &[("a b c d", 1), ("b a d c", 1)])
}

/// The trap profile after pushing `a` to the bottom of the second vote.
pub fn monotonicity_trap_shifted() -> Profile {
    profile(&["a", "b", "c", "d"], &[("a b c d", 1), ("b d c a", 1)])
}

/// Small instances of the three characteristic elections.
fn characteristic(kind: crate::generators::GeneratorKind, n: u64, m: usize) -> Profile {
    crate::generators::generate(&crate::generators::GeneratorConfig {
        kind,
        n,
        m,
        seed: 0,
    })
    .expect("characteristic configs are valid")
}

/// Everything the CLI materializes under `fixtures`, with stable names.
pub fn all() -> Vec<(&'static str, Profile)> {
    use crate::generators::GeneratorKind;
    vec![
        ("six_candidate_demo", six_candidate_demo()),
        ("balance_contrast", balance_contrast()),
        ("swap_dominated_tie", swap_dominated_tie()),
        ("unanimous_top_conflict", unanimous_top_conflict()),
        ("matched_quartet", matched_quartet()),
        ("monotonicity_trap", monotonicity_trap()),
        ("monotonicity_trap_shifted", monotonicity_trap_shifted()),
        ("identity_4x4", characteristic(GeneratorKind::Identity, 4, 4)),
        ("antagonism_4x4", characteristic(GeneratorKind::Antagonism, 4, 4)),
        ("uniformity_3", characteristic(GeneratorKind::Uniformity, 6, 3)),
    ]
}
