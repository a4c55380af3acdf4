//! Implementations of the CLI subcommands: loading profiles, running the
//! library, and rendering tables / CSV files.

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use conflict_core::axioms::{check_axiom, search_counterexample, AxiomId, AxiomReport, Witness};
use conflict_core::experiments::{
    self, BaselineRow, ExperimentOutput, ExperimentSpec, PositionRow, RuleSummary, TrialSource,
    WinnerRow,
};
use conflict_core::fixtures;
use conflict_core::generators::{
    generate, GeneratorConfig, GeneratorKind, MallowsCenters, PointDist,
};
use conflict_core::metrics::{assess_pair, PairAssessment};
use conflict_core::preflib::{
    self, IncompletePolicy, IngestPolicy, Materialized, RawElection, Subsample, TieBreak,
};
use conflict_core::profile::{Pair, Profile};
use conflict_core::rules::{select, RuleId};

use crate::{
    AxiomsArgs, ExperimentArgs, FixturesArgs, GeneratorArg, GeneratorArgs, IncompleteArg,
    IngestArgs, MetricsArgs, PointDistArg, ProfileSourceArgs, SampleArgs, TieBreakArg,
    WinnersArgs,
};

// --- sources ---------------------------------------------------------------

impl ProfileSourceArgs {
    fn is_set(&self) -> bool {
        self.profile.is_some() || self.preflib.is_some()
    }

    fn policy(&self, raw: &RawElection) -> Result<IngestPolicy> {
        let candidate_subset = match &self.subset {
            None => None,
            Some(names) => {
                let ids = names
                    .split(',')
                    .map(|name| {
                        let name = name.trim();
                        raw.names
                            .iter()
                            .position(|n| n == name)
                            .ok_or_else(|| anyhow!("no candidate named {name:?} in the file"))
                    })
                    .collect::<Result<Vec<usize>>>()?;
                Some(ids)
            }
        };
        Ok(IngestPolicy {
            tie_break: match self.tie_break {
                TieBreakArg::Seeded => TieBreak::SeededRandom,
                TieBreakArg::Index => TieBreak::ByCandidateIndex,
            },
            incomplete: match self.incomplete {
                IncompleteArg::Drop => IncompletePolicy::Drop,
                IncompleteArg::Error => IncompletePolicy::Error,
            },
            weight_scale: self.weight_scale,
            candidate_subset,
            subsample: self.subsample.map(|n| Subsample {
                n,
                seed: self.ingest_seed,
            }),
        })
    }

    fn load_materialized(&self) -> Result<Materialized> {
        if let Some(path) = &self.profile {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let profile = preflib::parse_profile_document(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            return Ok(Materialized {
                profile,
                dropped_incomplete: 0,
                dropped_zero_weight: 0,
            });
        }
        if let Some(path) = &self.preflib {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let raw = preflib::parse(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            let policy = self.policy(&raw)?;
            let materialized = preflib::materialize(&raw, &policy, self.ingest_seed)
                .with_context(|| format!("materializing {}", path.display()))?;
            if materialized.dropped_incomplete > 0 {
                eprintln!(
                    "note: dropped {} incomplete entr{}",
                    materialized.dropped_incomplete,
                    if materialized.dropped_incomplete == 1 { "y" } else { "ies" }
                );
            }
            if materialized.dropped_zero_weight > 0 {
                eprintln!(
                    "note: dropped {} entr{} whose weight rounded to zero (raise --weight-scale to keep them)",
                    materialized.dropped_zero_weight,
                    if materialized.dropped_zero_weight == 1 { "y" } else { "ies" }
                );
            }
            return Ok(materialized);
        }
        bail!("no profile source: pass --profile FILE or --preflib FILE")
    }

    fn load(&self) -> Result<Profile> {
        Ok(self.load_materialized()?.profile)
    }
}

impl GeneratorArgs {
    fn to_config(&self) -> Result<GeneratorConfig> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            return GeneratorConfig::from_kv(&text)
                .with_context(|| format!("parsing {}", path.display()));
        }
        let Some(kind) = self.generator else {
            bail!("no generator: pass --generator KIND or --config FILE");
        };
        let kind = match kind {
            GeneratorArg::Identity => GeneratorKind::Identity,
            GeneratorArg::Antagonism => GeneratorKind::Antagonism,
            GeneratorArg::Uniformity => GeneratorKind::Uniformity,
            GeneratorArg::Ic => GeneratorKind::ImpartialCulture,
            GeneratorArg::Mallows => GeneratorKind::Mallows {
                psi: self.psi,
                centers: self.centers_spec()?,
            },
            GeneratorArg::Euclidean => GeneratorKind::Euclidean2D {
                voter_dist: point_dist(self.voter_dist),
                cand_dist: point_dist(self.cand_dist),
                sigma: self.sigma,
            },
        };
        let n = self.n.unwrap_or_else(|| match kind {
            GeneratorKind::Uniformity => (1..=self.m as u64).product(),
            _ => 100,
        });
        Ok(GeneratorConfig {
            kind,
            n,
            m: self.m,
            seed: self.seed,
        })
    }

    fn centers_spec(&self) -> Result<MallowsCenters> {
        match self.centers {
            1 => Ok(MallowsCenters::Identity),
            2 => Ok(MallowsCenters::IdentityAndReverse),
            other => bail!("--centers must be 1 or 2, got {other}"),
        }
    }
}

fn point_dist(arg: PointDistArg) -> PointDist {
    match arg {
        PointDistArg::Uniform => PointDist::Uniform,
        PointDistArg::Gaussian => PointDist::Gaussian,
    }
}

// --- rendering helpers -------------------------------------------------------

fn show_pair(p: &Profile, q: Pair) -> String {
    format!("{{{},{}}}", p.name_of(q.a()), p.name_of(q.b()))
}

fn metric(v: &conflict_core::Rational) -> String {
    format!("{:.4}", conflict_core::metrics::to_f64(v))
}

// --- winners -----------------------------------------------------------------

pub fn winners(args: WinnersArgs) -> Result<ExitCode> {
    let profile = args.source.load()?;
    println!("{:<12} {:<18} {:<12} note", "rule", "pair", "score");
    for rule in &args.rules {
        let outcome = select(*rule, &profile)?;
        let note = if !outcome.any_conflicting {
            "no conflicting pair"
        } else if outcome.margin_ties {
            "float-margin tie"
        } else {
            ""
        };
        for pair in &outcome.winners {
            println!(
                "{:<12} {:<18} {:<12} {}",
                rule.to_string(),
                show_pair(&profile, *pair),
                outcome.scores[pair].to_string(),
                note
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

// --- metrics ------------------------------------------------------------------

fn parse_pairs(profile: &Profile, spec: &str) -> Result<Vec<Pair>> {
    spec.split(',')
        .map(|token| {
            let (a, b) = token
                .trim()
                .split_once(':')
                .ok_or_else(|| anyhow!("pair {token:?} is not of the form nameA:nameB"))?;
            let a = profile.candidate_named(a.trim())?;
            let b = profile.candidate_named(b.trim())?;
            Ok(Pair::new(a, b)?)
        })
        .collect()
}

pub fn metrics(args: MetricsArgs) -> Result<ExitCode> {
    let profile = args.source.load()?;
    let pairs: Vec<Pair> = match &args.pairs {
        Some(spec) => parse_pairs(&profile, spec)?,
        None => profile.pairs().collect(),
    };
    println!(
        "{:<18} {:>8} {:>8} {:>8} {:>8} {:>10} {:>10} {:>10}",
        "pair", "alpha", "beta", "gamma", "phi", "conf_sum", "conf_nash", "swap"
    );
    for pair in pairs {
        let a: PairAssessment = assess_pair(&profile, pair);
        println!(
            "{:<18} {:>8} {:>8} {:>8} {:>8} {:>10} {:>10} {:>10}",
            show_pair(&profile, pair),
            metric(&a.alpha),
            metric(&a.beta),
            metric(&a.gamma),
            metric(&a.phi),
            a.conf_sum,
            a.conf_nash,
            a.swap_score
        );
    }
    Ok(ExitCode::SUCCESS)
}

// --- axioms ---------------------------------------------------------------------

fn witness_path(dir: &Path, rule: RuleId, axiom: AxiomId) -> std::path::PathBuf {
    let tag = format!("{rule}_{axiom}").replace([':', '/'], "-");
    dir.join(format!("witness_{tag}.profile"))
}

fn write_witness(path: &Path, report: &AxiomReport, witness: &Witness) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    let mut doc = String::new();
    doc.push_str(&format!("# axiom: {}\n", report.axiom));
    doc.push_str(&format!("# rule: {}\n", report.rule));
    doc.push_str(&format!("# violation: {}\n", witness.description));
    let pairs: Vec<String> = witness
        .pairs
        .iter()
        .map(|q| show_pair(&witness.profile, *q))
        .collect();
    doc.push_str(&format!("# pairs: {}\n", pairs.join(" ")));
    for note in &report.notes {
        doc.push_str(&format!("# note: {note}\n"));
    }
    doc.push_str(&preflib::write_profile_document(&witness.profile));
    fs::write(path, doc).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn axioms(args: AxiomsArgs) -> Result<ExitCode> {
    let mut any_failure = false;
    println!("{:<12} {:<28} {:<14} detail", "rule", "axiom", "verdict");
    if args.source.is_set() {
        let profile = args.source.load()?;
        for rule in &args.rules {
            for axiom in &args.axioms {
                let report = check_axiom(*axiom, *rule, &profile)?;
                if report.holds {
                    println!("{:<12} {:<28} PASS", rule.to_string(), axiom.to_string());
                } else {
                    any_failure = true;
                    let witness = report.witness.as_ref().expect("failures carry witnesses");
                    let path = witness_path(&args.witness_dir, *rule, *axiom);
                    write_witness(&path, &report, witness)?;
                    println!(
                        "{:<12} {:<28} {:<14} {} [{}]",
                        rule.to_string(),
                        axiom.to_string(),
                        "FAIL",
                        witness.description,
                        path.display()
                    );
                }
            }
        }
    } else {
        // Search mode over random profiles; small impartial-culture profiles
        // unless a generator is configured explicitly.
        let gen = if args.generator.generator.is_some() || args.generator.config.is_some() {
            args.generator.to_config()?
        } else {
            GeneratorConfig {
                kind: GeneratorKind::ImpartialCulture,
                n: args.generator.n.unwrap_or(5),
                m: if args.generator.m == 10 { 4 } else { args.generator.m },
                seed: args.generator.seed,
            }
        };
        for rule in &args.rules {
            for axiom in &args.axioms {
                let hit =
                    search_counterexample(*axiom, *rule, &gen, args.trials, args.generator.seed)?;
                match hit {
                    None => println!(
                        "{:<12} {:<28} PASS ({})",
                        rule.to_string(),
                        axiom.to_string(),
                        args.trials
                    ),
                    Some(hit) => {
                        any_failure = true;
                        let witness = hit
                            .report
                            .witness
                            .as_ref()
                            .expect("failures carry witnesses");
                        let path = witness_path(&args.witness_dir, *rule, *axiom);
                        write_witness(&path, &hit.report, witness)?;
                        println!(
                            "{:<12} {:<28} {:<14} {} [{}]",
                            rule.to_string(),
                            axiom.to_string(),
                            format!("FAIL (trial {})", hit.trial),
                            witness.description,
                            path.display()
                        );
                    }
                }
            }
        }
    }
    Ok(if any_failure {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

// --- experiment -------------------------------------------------------------------

fn write_winner_rows(path: &Path, rows: &[WinnerRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "trial", "rule", "pair_a", "pair_b", "alpha", "beta", "gamma", "phi", "score", "ties",
    ])?;
    for r in rows {
        w.write_record([
            r.trial.to_string(),
            r.rule.to_string(),
            r.pair_names.0.clone(),
            r.pair_names.1.clone(),
            rational_field(&r.assessment.alpha),
            rational_field(&r.assessment.beta),
            rational_field(&r.assessment.gamma),
            rational_field(&r.assessment.phi),
            r.score.as_f64().to_string(),
            r.ties.to_string(),
        ])?;
    }
    Ok(w.flush()?)
}

fn write_baseline_rows(path: &Path, rows: &[BaselineRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["trial", "pair_a", "pair_b", "alpha", "beta", "gamma", "phi"])?;
    for r in rows {
        w.write_record([
            r.trial.to_string(),
            r.pair_names.0.clone(),
            r.pair_names.1.clone(),
            rational_field(&r.assessment.alpha),
            rational_field(&r.assessment.beta),
            rational_field(&r.assessment.gamma),
            rational_field(&r.assessment.phi),
        ])?;
    }
    Ok(w.flush()?)
}

fn write_position_rows(path: &Path, rows: &[PositionRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "trial",
        "rule",
        "pair_a",
        "pair_b",
        "ax",
        "ay",
        "bx",
        "by",
        "center_dist",
    ])?;
    for r in rows {
        w.write_record([
            r.trial.to_string(),
            r.rule.to_string(),
            r.pair_names.0.clone(),
            r.pair_names.1.clone(),
            r.a_pos[0].to_string(),
            r.a_pos[1].to_string(),
            r.b_pos[0].to_string(),
            r.b_pos[1].to_string(),
            r.center_dist.to_string(),
        ])?;
    }
    Ok(w.flush()?)
}

fn write_summaries(path: &Path, rows: &[RuleSummary]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "rule",
        "winner_rows",
        "mean_alpha",
        "sd_alpha",
        "mean_beta",
        "sd_beta",
        "mean_gamma",
        "sd_gamma",
        "mean_phi",
        "sd_phi",
        "mean_center_dist",
    ])?;
    for s in rows {
        w.write_record([
            s.rule.to_string(),
            s.winner_rows.to_string(),
            s.mean_alpha.to_string(),
            s.sd_alpha.to_string(),
            s.mean_beta.to_string(),
            s.sd_beta.to_string(),
            s.mean_gamma.to_string(),
            s.sd_gamma.to_string(),
            s.mean_phi.to_string(),
            s.sd_phi.to_string(),
            s.mean_center_dist.map_or(String::new(), |d| d.to_string()),
        ])?;
    }
    Ok(w.flush()?)
}

fn rational_field(v: &conflict_core::Rational) -> String {
    conflict_core::metrics::to_f64(v).to_string()
}

pub fn experiment(args: ExperimentArgs) -> Result<ExitCode> {
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    if !args.sweep_psi.is_empty() {
        // Dispersion sweep: per-profile metric aggregates, averaged per point.
        let centers = args.generator.centers_spec()?;
        let n = args.generator.n.unwrap_or(1000);
        let points = experiments::mallows_sweep(
            &args.sweep_psi,
            centers,
            n,
            args.generator.m,
            args.trials,
            args.generator.seed,
        )?;
        let path = args.out.join("sweep.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record([
            "psi",
            "centers",
            "profiles",
            "mean_alpha",
            "max_beta",
            "mean_gamma",
            "mean_phi",
        ])?;
        println!(
            "{:>6} {:>12} {:>12} {:>12} {:>12}",
            "psi", "mean_alpha", "max_beta", "mean_gamma", "mean_phi"
        );
        for p in &points {
            w.write_record([
                p.psi.to_string(),
                p.centers.to_string(),
                p.profiles.to_string(),
                p.mean_alpha.to_string(),
                p.max_beta.to_string(),
                p.mean_gamma.to_string(),
                p.mean_phi.to_string(),
            ])?;
            println!(
                "{:>6} {:>12.4} {:>12.4} {:>12.4} {:>12.4}",
                p.psi, p.mean_alpha, p.max_beta, p.mean_gamma, p.mean_phi
            );
        }
        w.flush()?;
        println!("wrote {}", path.display());
        return Ok(ExitCode::SUCCESS);
    }

    let source = if args.source.is_set() {
        let base = args.source.load()?;
        let n = args.generator.n.unwrap_or(100);
        TrialSource::Dataset {
            base,
            n,
            m: args.generator.m,
        }
    } else {
        TrialSource::Generator(args.generator.to_config()?)
    };
    let spec = ExperimentSpec {
        source,
        rules: args.rules.clone(),
        trials: args.trials,
        seed: args.generator.seed,
    };
    let out: ExperimentOutput = experiments::run(&spec)?;

    write_winner_rows(&args.out.join("winners.csv"), &out.winners)?;
    write_baseline_rows(&args.out.join("baseline.csv"), &out.baseline)?;
    write_summaries(&args.out.join("summary.csv"), &out.summaries)?;
    if !out.positions.is_empty() {
        write_position_rows(&args.out.join("positions.csv"), &out.positions)?;
    }

    println!(
        "{:<12} {:>10} {:>10} {:>10} {:>10} {:>10} {:>12}",
        "rule", "rows", "mean_a", "mean_b", "mean_g", "mean_phi", "center_dist"
    );
    for s in &out.summaries {
        println!(
            "{:<12} {:>10} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>12}",
            s.rule.to_string(),
            s.winner_rows,
            s.mean_alpha,
            s.mean_beta,
            s.mean_gamma,
            s.mean_phi,
            s.mean_center_dist
                .map_or_else(|| "-".to_string(), |d| format!("{d:.4}")),
        );
    }
    println!("wrote CSV files to {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

// --- sample / ingest / fixtures ------------------------------------------------------

pub fn sample(args: SampleArgs) -> Result<ExitCode> {
    let config = args.generator.to_config()?;
    let profile = generate(&config)?;
    let doc = preflib::write_profile_document(&profile);
    fs::write(&args.out, doc).with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} ({} candidates, {} voters)",
        args.out.display(),
        profile.m(),
        profile.total_weight()
    );
    Ok(ExitCode::SUCCESS)
}

pub fn ingest(args: IngestArgs) -> Result<ExitCode> {
    let materialized = args.source.load_materialized()?;
    let doc = preflib::write_profile_document(&materialized.profile);
    fs::write(&args.out, doc).with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} ({} candidates, {} voters)",
        args.out.display(),
        materialized.profile.m(),
        materialized.profile.total_weight()
    );
    Ok(ExitCode::SUCCESS)
}

pub fn fixtures(args: FixturesArgs) -> Result<ExitCode> {
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    for (name, profile) in fixtures::all() {
        let path = args.out.join(format!("{name}.profile"));
        fs::write(&path, preflib::write_profile_document(&profile))
            .with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}
