//! Ingestion of PrefLib-style ordinal election files — strict, tied, or
//! truncated orders with fractional weights — and the artifact's native
//! plain-text profile document.
//!
//! Two input layouts are accepted: the metadata header style (`# NUMBER
//! ALTERNATIVES: ...`, `# ALTERNATIVE NAME i: ...`) and a bare layout (first
//! line the candidate count, then one name per line). Ranking lines read
//! `weight: 3,1,{2,4}` with 1-based candidate ids, `{}` tie groups, and
//! missing candidates left unranked. Weights may be integers, decimals, or
//! fractions.

use num_rational::Ratio;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::metrics::Rational;
use crate::profile::{Profile, ProfileError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PreflibError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: candidate id {candidate} appears twice in one ranking")]
    DuplicateCandidate { line: usize, candidate: usize },
    #[error("entry {entry} is incomplete and the policy forbids dropping it")]
    IncompleteEntry { entry: usize },
    #[error("weight scale must be at least 1")]
    BadWeightScale,
    #[error("candidate subset is empty, out of range, or repeats a candidate")]
    BadSubset,
    #[error("subsample size must be at least 1")]
    BadSubsample,
    #[error("no ballots remain after applying the ingest policy")]
    EmptyResult,
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

fn parse_err(line: usize, message: impl Into<String>) -> PreflibError {
    PreflibError::Parse {
        line,
        message: message.into(),
    }
}

/// One weighted ranking: ordered tie groups of 0-based candidate ids,
/// possibly truncated.
#[derive(Debug, Clone, PartialEq)]
pub struct RawEntry {
    pub weight: Rational,
    pub groups: Vec<Vec<usize>>,
}

impl RawEntry {
    pub fn ranked_count(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn has_ties(&self) -> bool {
        self.groups.iter().any(|g| g.len() > 1)
    }
}

/// Faithful in-memory form of an ingested election file.
#[derive(Debug, Clone, PartialEq)]
pub struct RawElection {
    pub names: Vec<String>,
    pub entries: Vec<RawEntry>,
}

impl RawElection {
    pub fn m(&self) -> usize {
        self.names.len()
    }
}

/// Parses an election file; see the module docs for the accepted layouts.
pub fn parse(text: &str) -> Result<RawElection, PreflibError> {
    let mut names: Vec<String> = Vec::new();
    let mut declared_m: Option<usize> = None;
    let mut entries: Vec<RawEntry> = Vec::new();
    let mut bare_names_expected: Option<usize> = None;
    let mut alt_names: Vec<(usize, String)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let meta = meta.trim();
            if let Some(rest) = meta.strip_prefix("NUMBER ALTERNATIVES:") {
                let m: usize = rest
                    .trim()
                    .parse()
                    .map_err(|e| parse_err(line_no, format!("bad candidate count: {e}")))?;
                declared_m = Some(m);
            } else if let Some(rest) = meta.strip_prefix("ALTERNATIVE NAME") {
                let (id, name) = rest
                    .split_once(':')
                    .ok_or_else(|| parse_err(line_no, "expected `ALTERNATIVE NAME i: name`"))?;
                let id: usize = id
                    .trim()
                    .parse()
                    .map_err(|e| parse_err(line_no, format!("bad alternative id: {e}")))?;
                if id == 0 {
                    return Err(parse_err(line_no, "alternative ids are 1-based"));
                }
                alt_names.push((id - 1, name.trim().to_owned()));
            }
            continue; // other metadata is ignored
        }
        if declared_m.is_none() && bare_names_expected.is_none() && entries.is_empty() {
            // Bare layout: first significant line is the candidate count.
            if let Ok(m) = line.parse::<usize>() {
                if m == 0 {
                    return Err(parse_err(line_no, "candidate count must be positive"));
                }
                bare_names_expected = Some(m);
                continue;
            }
            return Err(parse_err(
                line_no,
                "expected a candidate count or a `# NUMBER ALTERNATIVES:` header",
            ));
        }
        if let Some(expected) = bare_names_expected {
            if names.len() < expected {
                names.push(line.to_owned());
                continue;
            }
        }
        // From here on: `weight: ranking` lines.
        let m = finalized_m(&declared_m, &bare_names_expected, &alt_names, line_no)?;
        ensure_names(&mut names, &alt_names, m);
        let (weight_text, ranking_text) = line
            .split_once(':')
            .ok_or_else(|| parse_err(line_no, "expected `weight: ranking`"))?;
        let weight = parse_weight(weight_text.trim(), line_no)?;
        if weight <= Rational::zero() {
            return Err(parse_err(line_no, "weights must be positive"));
        }
        let groups = parse_ranking(ranking_text, m, line_no)?;
        entries.push(RawEntry { weight, groups });
    }

    let m = match (declared_m, bare_names_expected) {
        (Some(m), _) | (None, Some(m)) => m,
        (None, None) => return Err(parse_err(1, "empty election file")),
    };
    ensure_names(&mut names, &alt_names, m);
    if names.len() != m {
        return Err(parse_err(
            1,
            format!("expected {m} candidate names, found {}", names.len()),
        ));
    }
    Ok(RawElection { names, entries })
}

fn finalized_m(
    declared: &Option<usize>,
    bare: &Option<usize>,
    _alt_names: &[(usize, String)],
    line_no: usize,
) -> Result<usize, PreflibError> {
    declared
        .or(*bare)
        .ok_or_else(|| parse_err(line_no, "ranking line before the candidate count"))
}

fn ensure_names(names: &mut Vec<String>, alt_names: &[(usize, String)], m: usize) {
    if !names.is_empty() {
        return;
    }
    let mut table: Vec<String> = (0..m).map(|i| format!("c{i}")).collect();
    for (idx, name) in alt_names {
        if *idx < m {
            table[*idx] = name.clone();
        }
    }
    *names = table;
}

fn parse_weight(text: &str, line_no: usize) -> Result<Rational, PreflibError> {
    if let Some((num, den)) = text.split_once('/') {
        let num: i128 = num
            .trim()
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad weight: {e}")))?;
        let den: i128 = den
            .trim()
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad weight: {e}")))?;
        if den == 0 {
            return Err(parse_err(line_no, "weight denominator is zero"));
        }
        return Ok(Ratio::new(num, den));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        let whole: i128 = if whole.is_empty() {
            0
        } else {
            whole
                .parse()
                .map_err(|e| parse_err(line_no, format!("bad weight: {e}")))?
        };
        let digits = frac.len() as u32;
        let frac: i128 = frac
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad weight: {e}")))?;
        let scale = 10i128.pow(digits);
        return Ok(Ratio::new(whole * scale + frac, scale));
    }
    let value: i128 = text
        .parse()
        .map_err(|e| parse_err(line_no, format!("bad weight: {e}")))?;
    Ok(Ratio::from_integer(value))
}

fn parse_ranking(text: &str, m: usize, line_no: usize) -> Result<Vec<Vec<usize>>, PreflibError> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut in_tie = false;
    let mut seen = vec![false; m];
    let push = |id_text: &str, group: &mut Vec<usize>, seen: &mut Vec<bool>| {
        let id_text = id_text.trim();
        if id_text.is_empty() {
            return Ok(());
        }
        let id: usize = id_text
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad candidate id {id_text:?}: {e}")))?;
        if id == 0 || id > m {
            return Err(parse_err(
                line_no,
                format!("candidate id {id} outside 1..={m}"),
            ));
        }
        if seen[id - 1] {
            return Err(PreflibError::DuplicateCandidate {
                line: line_no,
                candidate: id,
            });
        }
        seen[id - 1] = true;
        group.push(id - 1);
        Ok(())
    };
    let mut token_start = 0;
    let bytes = text.as_bytes();
    for (i, &ch) in bytes.iter().enumerate() {
        match ch {
            b'{' => {
                if in_tie {
                    return Err(parse_err(line_no, "nested tie group"));
                }
                in_tie = true;
                token_start = i + 1;
            }
            b'}' => {
                if !in_tie {
                    return Err(parse_err(line_no, "unmatched `}`"));
                }
                push(&text[token_start..i], &mut current, &mut seen)?;
                if current.is_empty() {
                    return Err(parse_err(line_no, "empty tie group"));
                }
                groups.push(std::mem::take(&mut current));
                in_tie = false;
                token_start = i + 1;
            }
            b',' => {
                let token = &text[token_start..i];
                if in_tie {
                    push(token, &mut current, &mut seen)?;
                } else {
                    let mut single = Vec::new();
                    push(token, &mut single, &mut seen)?;
                    if !single.is_empty() {
                        groups.push(single);
                    }
                }
                token_start = i + 1;
            }
            _ => {}
        }
    }
    if in_tie {
        return Err(parse_err(line_no, "unterminated tie group"));
    }
    let mut single = Vec::new();
    push(&text[token_start..], &mut single, &mut seen)?;
    if !single.is_empty() {
        groups.push(single);
    }
    if groups.is_empty() {
        return Err(parse_err(line_no, "empty ranking"));
    }
    Ok(groups)
}

/// Renders a [`RawElection`] in the bare layout; `parse` inverts it.
pub fn serialize(raw: &RawElection) -> String {
    let mut out = String::new();
    out.push_str(&format!("{}\n", raw.m()));
    for name in &raw.names {
        out.push_str(name);
        out.push('\n');
    }
    for entry in &raw.entries {
        let weight = if entry.weight.is_integer() {
            entry.weight.numer().to_string()
        } else {
            format!("{}/{}", entry.weight.numer(), entry.weight.denom())
        };
        let groups: Vec<String> = entry
            .groups
            .iter()
            .map(|g| {
                let ids: Vec<String> = g.iter().map(|c| (c + 1).to_string()).collect();
                if g.len() == 1 {
                    ids[0].clone()
                } else {
                    format!("{{{}}}", ids.join(","))
                }
            })
            .collect();
        out.push_str(&format!("{weight}: {}\n", groups.join(",")));
    }
    out
}

/// How ties inside a ranking entry are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    /// Shuffle each tie group with the materialization seed (deterministic).
    SeededRandom,
    /// Ascending candidate index.
    ByCandidateIndex,
}

/// What to do with entries that do not rank the whole roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncompletePolicy {
    Drop,
    Error,
}

/// Weighted subsampling request: draw `n` ballots with probability
/// proportional to weight, using a dedicated seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Subsample {
    pub n: u64,
    pub seed: u64,
}

/// Knobs applied when turning a [`RawElection`] into an exact [`Profile`].
#[derive(Debug, Clone, PartialEq)]
pub struct IngestPolicy {
    pub tie_break: TieBreak,
    pub incomplete: IncompletePolicy,
    /// Multiplicity = round(weight * weight_scale); raise to keep more of a
    /// fractional weight distribution.
    pub weight_scale: u64,
    /// Restrict ballots to these candidates (0-based), preserving relative
    /// order.
    pub candidate_subset: Option<Vec<usize>>,
    pub subsample: Option<Subsample>,
}

impl Default for IngestPolicy {
    fn default() -> Self {
        IngestPolicy {
            tie_break: TieBreak::SeededRandom,
            incomplete: IncompletePolicy::Drop,
            weight_scale: 1,
            candidate_subset: None,
            subsample: None,
        }
    }
}

/// A materialized profile plus counts of entries the policy discarded.
#[derive(Debug, Clone, PartialEq)]
pub struct Materialized {
    pub profile: Profile,
    pub dropped_incomplete: usize,
    pub dropped_zero_weight: usize,
}

/// Applies `policy` to `raw`: resolves ties, enforces the completeness
/// policy, converts weights to integer multiplicities, projects onto the
/// candidate subset, and subsamples. Deterministic given `(raw, policy, seed)`.
pub fn materialize(
    raw: &RawElection,
    policy: &IngestPolicy,
    seed: u64,
) -> Result<Materialized, PreflibError> {
    if policy.weight_scale == 0 {
        return Err(PreflibError::BadWeightScale);
    }
    let m = raw.m();
    let subset: Vec<usize> = match &policy.candidate_subset {
        Some(ids) => {
            let mut sorted = ids.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.is_empty() || sorted.len() != ids.len() || *sorted.last().unwrap() >= m {
                return Err(PreflibError::BadSubset);
            }
            sorted
        }
        None => (0..m).collect(),
    };
    if policy.subsample.is_some_and(|s| s.n == 0) {
        return Err(PreflibError::BadSubsample);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dropped_incomplete = 0usize;
    let mut dropped_zero_weight = 0usize;
    let mut kept: Vec<(Vec<usize>, u64)> = Vec::new();
    for (entry_idx, entry) in raw.entries.iter().enumerate() {
        // Tie resolution first, so the RNG stream is consumed identically
        // regardless of later filtering.
        let mut flat: Vec<usize> = Vec::with_capacity(entry.ranked_count());
        for group in &entry.groups {
            let mut group = group.clone();
            match policy.tie_break {
                TieBreak::ByCandidateIndex => group.sort_unstable(),
                TieBreak::SeededRandom => {
                    if group.len() > 1 {
                        group.shuffle(&mut rng);
                    }
                }
            }
            flat.extend(group);
        }
        if flat.len() < m {
            match policy.incomplete {
                IncompletePolicy::Drop => {
                    dropped_incomplete += 1;
                    continue;
                }
                IncompletePolicy::Error => {
                    return Err(PreflibError::IncompleteEntry { entry: entry_idx })
                }
            }
        }
        let scaled = entry.weight * Ratio::from_integer(policy.weight_scale as i128);
        let mult = scaled.round().to_integer();
        if mult <= 0 {
            dropped_zero_weight += 1;
            continue;
        }
        kept.push((flat, mult as u64));
    }

    // Project onto the subset, re-indexing densely.
    let position_in_subset: Vec<Option<usize>> = {
        let mut table = vec![None; m];
        for (new_idx, old) in subset.iter().enumerate() {
            table[*old] = Some(new_idx);
        }
        table
    };
    let mut ballots: Vec<(Vec<usize>, u64)> = kept
        .into_iter()
        .map(|(flat, mult)| {
            let projected: Vec<usize> = flat
                .into_iter()
                .filter_map(|c| position_in_subset[c])
                .collect();
            (projected, mult)
        })
        .collect();

    if let Some(sub) = policy.subsample {
        ballots = subsample_ballots(&ballots, sub)?;
    }
    if ballots.is_empty() {
        return Err(PreflibError::EmptyResult);
    }
    let names: Vec<String> = subset.iter().map(|c| raw.names[*c].clone()).collect();
    let profile = Profile::from_orders(names, &ballots)?;
    Ok(Materialized {
        profile,
        dropped_incomplete,
        dropped_zero_weight,
    })
}

fn subsample_ballots(
    ballots: &[(Vec<usize>, u64)],
    sub: Subsample,
) -> Result<Vec<(Vec<usize>, u64)>, PreflibError> {
    if ballots.is_empty() {
        return Err(PreflibError::EmptyResult);
    }
    let mut cumulative: Vec<u64> = Vec::with_capacity(ballots.len());
    let mut total = 0u64;
    for (_, mult) in ballots {
        total += mult;
        cumulative.push(total);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sub.seed);
    let mut counts = vec![0u64; ballots.len()];
    for _ in 0..sub.n {
        let draw = rng.random_range(0..total);
        let idx = cumulative.partition_point(|&c| c <= draw);
        counts[idx] += 1;
    }
    Ok(ballots
        .iter()
        .zip(counts)
        .filter(|(_, count)| *count > 0)
        .map(|((order, _), count)| (order.clone(), count))
        .collect())
}

// --- native profile document --------------------------------------------

/// Renders a profile as the native document: `m n` header, candidate name
/// lines, then `multiplicity: index,index,...` lines with 0-based indices.
pub fn write_profile_document(p: &Profile) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", p.m(), p.total_weight()));
    for name in p.names() {
        out.push_str(name);
        out.push('\n');
    }
    for (ballot, mult) in p.ballots() {
        let ids: Vec<String> = ballot.order().iter().map(|c| c.0.to_string()).collect();
        out.push_str(&format!("{mult}: {}\n", ids.join(",")));
    }
    out
}

/// Parses the native profile document. `#` lines and blank lines are ignored,
/// so replayable witness files can carry commentary.
pub fn parse_profile_document(text: &str) -> Result<Profile, PreflibError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line_no, header) = lines.next().ok_or_else(|| parse_err(1, "empty document"))?;
    let (m_text, n_text) = header
        .split_once(' ')
        .ok_or_else(|| parse_err(line_no, "expected `m n` header"))?;
    let m: usize = m_text
        .trim()
        .parse()
        .map_err(|e| parse_err(line_no, format!("bad candidate count: {e}")))?;
    let n: u64 = n_text
        .trim()
        .parse()
        .map_err(|e| parse_err(line_no, format!("bad voter count: {e}")))?;
    let mut names = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, name) = lines
            .next()
            .ok_or_else(|| parse_err(line_no, "truncated name table"))?;
        if name.contains(':') {
            return Err(parse_err(ln, "candidate name may not contain `:`"));
        }
        names.push(name.to_owned());
    }
    let mut orders: Vec<(Vec<usize>, u64)> = Vec::new();
    for (ln, line) in lines {
        let (mult_text, ids_text) = line
            .split_once(':')
            .ok_or_else(|| parse_err(ln, "expected `multiplicity: indices`"))?;
        let mult: u64 = mult_text
            .trim()
            .parse()
            .map_err(|e| parse_err(ln, format!("bad multiplicity: {e}")))?;
        let order: Vec<usize> = ids_text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| parse_err(ln, format!("bad candidate index: {e}")))
            })
            .collect::<Result<_, _>>()?;
        if order.len() != m || order.iter().any(|c| *c >= m) {
            return Err(parse_err(ln, "ballot is not a permutation of the roster"));
        }
        orders.push((order, mult));
    }
    let profile = Profile::from_orders(names, &orders)?;
    if profile.total_weight() != n {
        return Err(parse_err(
            1,
            format!(
                "header claims {n} voters but ballots sum to {}",
                profile.total_weight()
            ),
        ));
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    const MINI: &str = "3\nred\ngreen\nblue\n2: 1,2,3\n1: 1,{2,3}\n1: 1,2\n";

    #[test]
    fn parse_bare_layout() {
        let raw = parse(MINI).unwrap();
        assert_eq!(raw.names, ["red", "green", "blue"]);
        assert_eq!(raw.entries.len(), 3);
        assert_eq!(raw.entries[0].weight, Ratio::from_integer(2));
        assert_eq!(raw.entries[0].groups, vec![vec![0], vec![1], vec![2]]);
        assert!(raw.entries[1].has_ties());
        assert_eq!(raw.entries[1].groups, vec![vec![0], vec![1, 2]]);
        assert_eq!(raw.entries[2].ranked_count(), 2); // truncated
    }

    #[test]
    fn parse_metadata_layout() {
        let text = "# FILE NAME: mini.soc\n# NUMBER ALTERNATIVES: 2\n# ALTERNATIVE NAME 1: left\n# ALTERNATIVE NAME 2: right\n3: 1,2\n1: 2,1\n";
        let raw = parse(text).unwrap();
        assert_eq!(raw.names, ["left", "right"]);
        assert_eq!(raw.entries.len(), 2);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dup = "2\na\nb\n1: 1,1\n";
        assert_eq!(
            parse(dup),
            Err(PreflibError::DuplicateCandidate {
                line: 4,
                candidate: 1
            })
        );
        let bad_id = "2\na\nb\n1: 1,5\n";
        match parse(bad_id) {
            Err(PreflibError::Parse { line: 4, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let bad_weight = "2\na\nb\nx: 1,2\n";
        match parse(bad_weight) {
            Err(PreflibError::Parse { line: 4, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let zero_weight = "2\na\nb\n0: 1,2\n";
        assert!(parse(zero_weight).is_err());
    }

    #[test]
    fn weights_parse_in_three_shapes() {
        let text = "2\na\nb\n2: 1,2\n2.5: 1,2\n5/2: 2,1\n";
        let raw = parse(text).unwrap();
        assert_eq!(raw.entries[0].weight, Ratio::from_integer(2));
        assert_eq!(raw.entries[1].weight, Ratio::new(5, 2));
        assert_eq!(raw.entries[2].weight, Ratio::new(5, 2));
    }

    #[test]
    fn serialize_parse_round_trip() {
        let raw = parse(MINI).unwrap();
        let text = serialize(&raw);
        assert_eq!(parse(&text).unwrap(), raw);
        // Fractional weights survive the trip.
        let raw = parse("2\na\nb\n2.5: 1,2\n").unwrap();
        assert_eq!(parse(&serialize(&raw)).unwrap(), raw);
    }

    #[test]
    fn materialize_scales_weights() {
        let raw = parse("2\na\nb\n2.5: 1,2\n").unwrap();
        let policy = IngestPolicy {
            weight_scale: 2,
            ..IngestPolicy::default()
        };
        let out = materialize(&raw, &policy, 0).unwrap();
        assert_eq!(out.profile.ballots()[0].1, 5);
    }

    #[test]
    fn materialize_drops_zero_rounded_entries() {
        let raw = parse("2\na\nb\n0.2: 1,2\n1: 2,1\n").unwrap();
        let out = materialize(&raw, &IngestPolicy::default(), 0).unwrap();
        assert_eq!(out.dropped_zero_weight, 1);
        assert_eq!(out.profile.total_weight(), 1);
    }

    #[test]
    fn tie_break_by_index_is_ascending() {
        let raw = parse("3\na\nb\nc\n1: 1,{3,2}\n").unwrap();
        let policy = IngestPolicy {
            tie_break: TieBreak::ByCandidateIndex,
            ..IngestPolicy::default()
        };
        let out = materialize(&raw, &policy, 0).unwrap();
        let order: Vec<usize> = out.profile.ballots()[0]
            .0
            .order()
            .iter()
            .map(|c| c.0)
            .collect();
        assert_eq!(order, vec![0, 1, 2]);
    }

    #[test]
    fn seeded_tie_break_is_deterministic() {
        let raw = parse("4\na\nb\nc\nd\n1: {1,2,3,4}\n2: 1,{2,3},4\n").unwrap();
        let a = materialize(&raw, &IngestPolicy::default(), 7).unwrap();
        let b = materialize(&raw, &IngestPolicy::default(), 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn incomplete_policy_drop_vs_error() {
        let raw = parse("3\na\nb\nc\n1: 1,2\n1: 3,2,1\n").unwrap();
        let dropped = materialize(&raw, &IngestPolicy::default(), 0).unwrap();
        assert_eq!(dropped.dropped_incomplete, 1);
        assert_eq!(dropped.profile.total_weight(), 1);
        let strict = IngestPolicy {
            incomplete: IncompletePolicy::Error,
            ..IngestPolicy::default()
        };
        assert_eq!(
            materialize(&raw, &strict, 0),
            Err(PreflibError::IncompleteEntry { entry: 0 })
        );
    }

    #[test]
    fn empty_result_is_an_error() {
        let raw = parse("3\na\nb\nc\n1: 1,2\n").unwrap();
        assert_eq!(
            materialize(&raw, &IngestPolicy::default(), 0),
            Err(PreflibError::EmptyResult)
        );
    }

    #[test]
    fn subset_projection_keeps_relative_order() {
        // First ballot of the six-candidate demo restricted to {a, b, x, y}.
        let p = fixtures::six_candidate_demo();
        let doc = write_profile_document(&p);
        // Rebuild as a raw election through the preflib layout.
        let raw = RawElection {
            names: p.names().to_vec(),
            entries: p
                .ballots()
                .iter()
                .map(|(ballot, mult)| RawEntry {
                    weight: Ratio::from_integer(*mult as i128),
                    groups: ballot.order().iter().map(|c| vec![c.0]).collect(),
                })
                .collect(),
        };
        let subset: Vec<usize> = ["a", "b", "x", "y"]
            .iter()
            .map(|n| p.candidate_named(n).unwrap().0)
            .collect();
        let policy = IngestPolicy {
            candidate_subset: Some(subset),
            ..IngestPolicy::default()
        };
        let out = materialize(&raw, &policy, 0).unwrap();
        let first = &out.profile.ballots()[0].0;
        let names: Vec<&str> = first
            .order()
            .iter()
            .map(|c| out.profile.name_of(*c))
            .collect();
        assert_eq!(names, ["a", "x", "y", "b"]);
        drop(doc);
    }

    #[test]
    fn subsample_draws_exactly_n() {
        let raw = parse("2\na\nb\n10: 1,2\n10: 2,1\n").unwrap();
        let policy = IngestPolicy {
            subsample: Some(Subsample { n: 7, seed: 3 }),
            ..IngestPolicy::default()
        };
        let out = materialize(&raw, &policy, 0).unwrap();
        assert_eq!(out.profile.total_weight(), 7);
        let again = materialize(&raw, &policy, 0).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn weight_conversion_stays_within_one_rounding_unit_per_entry() {
        let raw = parse("2\na\nb\n2.4: 1,2\n0.7: 2,1\n1/3: 1,2\n5: 2,1\n").unwrap();
        for scale in [1u64, 3, 7, 100] {
            let policy = IngestPolicy {
                weight_scale: scale,
                ..IngestPolicy::default()
            };
            let out = materialize(&raw, &policy, 0).unwrap();
            let exact: f64 = raw
                .entries
                .iter()
                .map(|e| crate::metrics::to_f64(&e.weight) * scale as f64)
                .sum();
            let total = out.profile.total_weight() as f64;
            assert!(
                (total - exact).abs() <= raw.entries.len() as f64 * 0.5,
                "scale {scale}: total {total} vs exact {exact}"
            );
        }
    }

    #[test]
    fn profile_document_round_trips() {
        for (_, p) in fixtures::all() {
            let doc = write_profile_document(&p);
            let back = parse_profile_document(&doc).unwrap();
            assert_eq!(back, p);
            // Byte-stable rendering.
            assert_eq!(write_profile_document(&back), doc);
        }
    }

    #[test]
    fn profile_document_checks_header_totals() {
        let text = "2 5\na\nb\n1: 0,1\n";
        assert!(parse_profile_document(text).is_err());
        let ok = "2 3\na\nb\n# a witness comment\n3: 1,0\n";
        assert_eq!(parse_profile_document(ok).unwrap().total_weight(), 3);
    }

    proptest! {
        // Projection never flips the relative order of retained candidates.
        #[test]
        fn projection_preserves_pairwise_signs(
            order in Just((0usize..6).collect::<Vec<_>>()).prop_shuffle(),
            keep in proptest::collection::btree_set(0usize..6, 2..=4),
        ) {
            let raw = RawElection {
                names: (0..6).map(|i| format!("c{i}")).collect(),
                entries: vec![RawEntry {
                    weight: Ratio::from_integer(1),
                    groups: order.iter().map(|c| vec![*c]).collect(),
                }],
            };
            let subset: Vec<usize> = keep.iter().copied().collect();
            let policy = IngestPolicy {
                candidate_subset: Some(subset.clone()),
                ..IngestPolicy::default()
            };
            let out = materialize(&raw, &policy, 0).unwrap();
            let projected = &out.profile.ballots()[0].0;
            for (i, &x) in subset.iter().enumerate() {
                for &y in &subset[i + 1..] {
                    let before = order.iter().position(|c| *c == x).unwrap()
                        < order.iter().position(|c| *c == y).unwrap();
                    let xi = out.profile.candidate_named(&format!("c{x}")).unwrap();
                    let yi = out.profile.candidate_named(&format!("c{y}")).unwrap();
                    let after = projected.position(xi).unwrap() < projected.position(yi).unwrap();
                    prop_assert_eq!(before, after);
                }
            }
        }
    }
}
