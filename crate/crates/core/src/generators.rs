//! Synthetic profile sampling: the characteristic profiles (identity,
//! antagonism, uniformity), impartial culture, Mallows models via repeated
//! insertion, and 2D-Euclidean elections.
//!
//! Every sampled artifact is a pure function of `(seed, stream)`: one
//! `GeneratorConfig` can drive many reproducible trials by varying the stream
//! id, including from parallel workers.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::profile::{default_names, Ballot, CandidateId, Profile, ProfileError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("generator needs at least one voter")]
    NoVoters,
    #[error("generator needs at least two candidates")]
    TooFewCandidates,
    #[error("antagonism needs an even number of voters")]
    OddAntagonism,
    #[error("uniformity needs a voter count divisible by m! (got n = {n}, m = {m})")]
    IndivisibleUniformity { n: u64, m: usize },
    #[error("uniformity over {0} candidates is too large to enumerate")]
    UniformityTooLarge(usize),
    #[error("dispersion must lie in [0, 1]")]
    BadDispersion,
    #[error("mallows needs one or two center ballots")]
    BadCenterCount,
    #[error("bad center ballot: {0}")]
    BadCenterBallot(#[from] ProfileError),
    #[error("gaussian sigma must be positive and finite")]
    BadSigma,
    #[error("bad generator document: {0}")]
    BadDocument(String),
}

/// Point distribution for the 2D-Euclidean model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointDist {
    /// Uniform over the unit square.
    Uniform,
    /// Gaussian centered at (0.5, 0.5), independent coordinates.
    Gaussian,
}

impl fmt::Display for PointDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointDist::Uniform => write!(f, "uniform"),
            PointDist::Gaussian => write!(f, "gaussian"),
        }
    }
}

impl std::str::FromStr for PointDist {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(PointDist::Uniform),
            "gaussian" | "normal" => Ok(PointDist::Gaussian),
            other => Err(format!("unknown point distribution {other:?}")),
        }
    }
}

/// Center ballots of a Mallows mixture.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MallowsCenters {
    /// One center: the roster order.
    Identity,
    /// Two maximally opposed centers: the roster order and its reverse.
    IdentityAndReverse,
    /// One or two explicit center orders (candidate indices, best first).
    Explicit(Vec<Vec<usize>>),
}

impl MallowsCenters {
    fn resolve(&self, m: usize) -> Result<Vec<Ballot>, GeneratorError> {
        let identity: Vec<usize> = (0..m).collect();
        let orders: Vec<Vec<usize>> = match self {
            MallowsCenters::Identity => vec![identity],
            MallowsCenters::IdentityAndReverse => {
                let mut rev = identity.clone();
                rev.reverse();
                vec![identity, rev]
            }
            MallowsCenters::Explicit(orders) => orders.clone(),
        };
        if orders.is_empty() || orders.len() > 2 {
            return Err(GeneratorError::BadCenterCount);
        }
        orders
            .iter()
            .map(|o| {
                if o.len() != m {
                    return Err(GeneratorError::BadCenterBallot(
                        ProfileError::RosterMismatch,
                    ));
                }
                Ballot::from_indices(o).map_err(GeneratorError::from)
            })
            .collect()
    }

    pub fn count(&self) -> usize {
        match self {
            MallowsCenters::Identity => 1,
            MallowsCenters::IdentityAndReverse => 2,
            MallowsCenters::Explicit(o) => o.len(),
        }
    }
}

/// What to sample.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    /// `n` copies of the roster order.
    Identity,
    /// `n/2` copies of the roster order and `n/2` of its reverse.
    Antagonism,
    /// Every one of the `m!` ballots with equal multiplicity `n / m!`.
    Uniformity,
    /// `n` independent uniform ballots.
    ImpartialCulture,
    /// Ballots drawn with probability proportional to
    /// `psi^(kendall_tau(center, ballot))`; with two centers each ballot picks
    /// its center uniformly.
    Mallows { psi: f64, centers: MallowsCenters },
    /// Voters and candidates as points in the plane; each voter ranks
    /// candidates by distance, ties broken by candidate index.
    Euclidean2D {
        voter_dist: PointDist,
        cand_dist: PointDist,
        /// Standard deviation of the gaussian distributions.
        sigma: f64,
    },
}

/// Default sigma of the gaussian point distributions.
pub const DEFAULT_SIGMA: f64 = 0.2;

/// A reproducible sampling request.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    pub n: u64,
    pub m: usize,
    pub seed: u64,
}

impl GeneratorConfig {
    fn validate(&self) -> Result<(), GeneratorError> {
        if self.n == 0 {
            return Err(GeneratorError::NoVoters);
        }
        if self.m < 2 {
            return Err(GeneratorError::TooFewCandidates);
        }
        match &self.kind {
            GeneratorKind::Antagonism if !self.n.is_multiple_of(2) => {
                Err(GeneratorError::OddAntagonism)
            }
            GeneratorKind::Uniformity => {
                let total = factorial(self.m).ok_or(GeneratorError::UniformityTooLarge(self.m))?;
                if !self.n.is_multiple_of(total) {
                    return Err(GeneratorError::IndivisibleUniformity {
                        n: self.n,
                        m: self.m,
                    });
                }
                Ok(())
            }
            GeneratorKind::Mallows { psi, centers } => {
                if !(0.0..=1.0).contains(psi) {
                    return Err(GeneratorError::BadDispersion);
                }
                centers.resolve(self.m).map(|_| ())
            }
            GeneratorKind::Euclidean2D { sigma, .. } => {
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(GeneratorError::BadSigma);
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn factorial(m: usize) -> Option<u64> {
    if m > 20 {
        return None;
    }
    (1..=m as u64).try_fold(1u64, |acc, k| acc.checked_mul(k))
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Samples the profile of `config` at stream 0.
pub fn generate(config: &GeneratorConfig) -> Result<Profile, GeneratorError> {
    generate_stream(config, 0)
}

/// Samples the profile determined by `(config.seed, stream)`.
pub fn generate_stream(config: &GeneratorConfig, stream: u64) -> Result<Profile, GeneratorError> {
    config.validate()?;
    let names = default_names(config.m);
    let m = config.m;
    let n = config.n;
    let mut rng = rng_for(config.seed, stream);
    let ballots: Vec<(Ballot, u64)> = match &config.kind {
        GeneratorKind::Identity => {
            vec![(identity_ballot(m), n)]
        }
        GeneratorKind::Antagonism => {
            let fwd = identity_ballot(m);
            let rev = fwd.reversed();
            vec![(fwd, n / 2), (rev, n / 2)]
        }
        GeneratorKind::Uniformity => {
            let total = factorial(m).expect("validated");
            let mult = n / total;
            all_permutations(m)
                .into_iter()
                .map(|order| {
                    (
                        Ballot::from_indices(&order).expect("permutation"),
                        mult,
                    )
                })
                .collect()
        }
        GeneratorKind::ImpartialCulture => (0..n)
            .map(|_| (uniform_ballot(m, &mut rng), 1))
            .collect(),
        GeneratorKind::Mallows { psi, centers } => {
            let centers = centers.resolve(m)?;
            let powers: Vec<f64> = (0..m).map(|k| psi.powi(k as i32)).collect();
            (0..n)
                .map(|_| {
                    let center = if centers.len() == 1 {
                        &centers[0]
                    } else {
                        &centers[rng.random_range(0..centers.len())]
                    };
                    (mallows_ballot(center, *psi, &powers, &mut rng), 1)
                })
                .collect()
        }
        GeneratorKind::Euclidean2D { .. } => {
            return Ok(generate_euclidean(config, stream)?.profile)
        }
    };
    Ok(Profile::new(names, ballots).expect("generated profiles are valid"))
}

/// A 2D-Euclidean election together with the sampled point positions.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanElection {
    pub profile: Profile,
    pub voters: Vec<[f64; 2]>,
    pub candidates: Vec<[f64; 2]>,
}

/// Samples a Euclidean election, exposing the underlying geometry.
/// `config.kind` must be [`GeneratorKind::Euclidean2D`].
pub fn generate_euclidean(
    config: &GeneratorConfig,
    stream: u64,
) -> Result<EuclideanElection, GeneratorError> {
    config.validate()?;
    let GeneratorKind::Euclidean2D {
        voter_dist,
        cand_dist,
        sigma,
    } = &config.kind
    else {
        return Err(GeneratorError::BadDocument(
            "generate_euclidean needs a euclidean kind".into(),
        ));
    };
    let mut rng = rng_for(config.seed, stream);
    let candidates = sample_points(config.m, *cand_dist, *sigma, &mut rng);
    let voters = sample_points(config.n as usize, *voter_dist, *sigma, &mut rng);
    let ballots = voters
        .iter()
        .map(|v| {
            let mut order: Vec<usize> = (0..config.m).collect();
            order.sort_by(|&i, &j| {
                let di = dist2(*v, candidates[i]);
                let dj = dist2(*v, candidates[j]);
                di.partial_cmp(&dj)
                    .expect("finite distances")
                    .then(i.cmp(&j))
            });
            (
                Ballot::from_indices(&order).expect("permutation"),
                1u64,
            )
        })
        .collect();
    let profile =
        Profile::new(default_names(config.m), ballots).expect("generated profiles are valid");
    Ok(EuclideanElection {
        profile,
        voters,
        candidates,
    })
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

fn sample_points(count: usize, dist: PointDist, sigma: f64, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    match dist {
        PointDist::Uniform => (0..count)
            .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
            .collect(),
        PointDist::Gaussian => {
            let normal = Normal::new(0.5, sigma).expect("validated sigma");
            (0..count)
                .map(|_| [normal.sample(rng), normal.sample(rng)])
                .collect()
        }
    }
}

fn identity_ballot(m: usize) -> Ballot {
    Ballot::from_order((0..m).map(CandidateId).collect()).expect("identity is a permutation")
}

fn uniform_ballot(m: usize, rng: &mut ChaCha8Rng) -> Ballot {
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    Ballot::from_indices(&order).expect("permutation")
}

/// One repeated-insertion draw: item `j` of the center enters at position
/// `i <= j` with probability proportional to `psi^(j-i)`.
fn mallows_ballot(center: &Ballot, psi: f64, powers: &[f64], rng: &mut ChaCha8Rng) -> Ballot {
    let m = center.m();
    let mut order: Vec<CandidateId> = Vec::with_capacity(m);
    for (j, c) in center.order().iter().enumerate() {
        let pos = if psi <= 0.0 {
            j
        } else {
            let total: f64 = powers[..=j].iter().sum();
            let mut u = rng.random::<f64>() * total;
            // Walk offsets k = j - i upward; k = 0 is the center position.
            let mut k = 0;
            while k < j {
                u -= powers[k];
                if u < 0.0 {
                    break;
                }
                k += 1;
            }
            j - k
        };
        order.insert(pos, *c);
    }
    Ballot::from_order(order).expect("insertion keeps a permutation")
}

/// All permutations of `0..m` in lexicographic order.
fn all_permutations(m: usize) -> Vec<Vec<usize>> {
    let mut result = Vec::new();
    let mut current: Vec<usize> = (0..m).collect();
    loop {
        result.push(current.clone());
        // next_permutation
        let Some(i) = (0..m.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
            break;
        };
        let j = (i + 1..m).rev().find(|&j| current[j] > current[i]).expect("exists");
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    result
}

/// Number of discordant candidate pairs between two ballots.
pub fn kendall_tau(b1: &Ballot, b2: &Ballot) -> Result<u64, ProfileError> {
    if b1.m() != b2.m() {
        return Err(ProfileError::RosterMismatch);
    }
    let m = b1.m();
    let mut discordant = 0;
    for i in 0..m {
        for j in i + 1..m {
            let (ci, cj) = (CandidateId(i), CandidateId(j));
            let first = b1.position(ci)? < b1.position(cj)?;
            let second = b2.position(ci)? < b2.position(cj)?;
            if first != second {
                discordant += 1;
            }
        }
    }
    Ok(discordant)
}

// --- plain-text key/value round trip -------------------------------------

impl GeneratorConfig {
    /// Renders the config as the `key = value` document the CLI consumes.
    pub fn to_kv(&self) -> String {
        let mut lines = Vec::new();
        let kind = match &self.kind {
            GeneratorKind::Identity => "identity",
            GeneratorKind::Antagonism => "antagonism",
            GeneratorKind::Uniformity => "uniformity",
            GeneratorKind::ImpartialCulture => "ic",
            GeneratorKind::Mallows { .. } => "mallows",
            GeneratorKind::Euclidean2D { .. } => "euclidean",
        };
        lines.push(format!("kind = {kind}"));
        lines.push(format!("n = {}", self.n));
        lines.push(format!("m = {}", self.m));
        lines.push(format!("seed = {}", self.seed));
        match &self.kind {
            GeneratorKind::Mallows { psi, centers } => {
                lines.push(format!("psi = {psi}"));
                lines.push(format!("centers = {}", centers.count()));
                if let MallowsCenters::Explicit(orders) = centers {
                    for (i, order) in orders.iter().enumerate() {
                        let items: Vec<String> =
                            order.iter().map(|c| c.to_string()).collect();
                        lines.push(format!("center.{i} = {}", items.join(",")));
                    }
                }
            }
            GeneratorKind::Euclidean2D {
                voter_dist,
                cand_dist,
                sigma,
            } => {
                lines.push(format!("voters = {voter_dist}"));
                lines.push(format!("candidates = {cand_dist}"));
                lines.push(format!("sigma = {sigma}"));
            }
            _ => {}
        }
        lines.join("\n") + "\n"
    }

    /// Parses the `key = value` document produced by [`Self::to_kv`].
    pub fn from_kv(text: &str) -> Result<GeneratorConfig, GeneratorError> {
        let mut kv = std::collections::BTreeMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| GeneratorError::BadDocument(format!("expected key = value, got {line:?}")))?;
            kv.insert(key.trim().to_owned(), value.trim().to_owned());
        }
        let field = |k: &str| {
            kv.get(k)
                .cloned()
                .ok_or_else(|| GeneratorError::BadDocument(format!("missing key {k:?}")))
        };
        let parse_u64 = |k: &str| -> Result<u64, GeneratorError> {
            field(k)?
                .parse()
                .map_err(|e| GeneratorError::BadDocument(format!("bad {k}: {e}")))
        };
        let n = parse_u64("n")?;
        let m = parse_u64("m")? as usize;
        let seed = parse_u64("seed")?;
        let kind = match field("kind")?.as_str() {
            "identity" => GeneratorKind::Identity,
            "antagonism" => GeneratorKind::Antagonism,
            "uniformity" => GeneratorKind::Uniformity,
            "ic" | "impartial" => GeneratorKind::ImpartialCulture,
            "mallows" => {
                let psi: f64 = field("psi")?
                    .parse()
                    .map_err(|e| GeneratorError::BadDocument(format!("bad psi: {e}")))?;
                let mut explicit = Vec::new();
                for i in 0.. {
                    match kv.get(&format!("center.{i}")) {
                        Some(items) => {
                            let order = items
                                .split(',')
                                .map(|t| t.trim().parse::<usize>())
                                .collect::<Result<Vec<_>, _>>()
                                .map_err(|e| {
                                    GeneratorError::BadDocument(format!("bad center.{i}: {e}"))
                                })?;
                            explicit.push(order);
                        }
                        None => break,
                    }
                }
                let centers = if !explicit.is_empty() {
                    MallowsCenters::Explicit(explicit)
                } else {
                    match field("centers")?.as_str() {
                        "1" => MallowsCenters::Identity,
                        "2" => MallowsCenters::IdentityAndReverse,
                        other => {
                            return Err(GeneratorError::BadDocument(format!(
                                "centers must be 1 or 2, got {other:?}"
                            )))
                        }
                    }
                };
                GeneratorKind::Mallows { psi, centers }
            }
            "euclidean" => {
                let voter_dist = field("voters")?
                    .parse()
                    .map_err(GeneratorError::BadDocument)?;
                let cand_dist = field("candidates")?
                    .parse()
                    .map_err(GeneratorError::BadDocument)?;
                let sigma = match kv.get("sigma") {
                    Some(s) => s
                        .parse()
                        .map_err(|e| GeneratorError::BadDocument(format!("bad sigma: {e}")))?,
                    None => DEFAULT_SIGMA,
                };
                GeneratorKind::Euclidean2D {
                    voter_dist,
                    cand_dist,
                    sigma,
                }
            }
            other => {
                return Err(GeneratorError::BadDocument(format!(
                    "unknown kind {other:?}"
                )))
            }
        };
        let config = GeneratorConfig { kind, n, m, seed };
        config.validate()?;
        Ok(config)
    }
}
