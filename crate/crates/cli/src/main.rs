//! Command-line surface: point classification, scans, branch loci, and
//! focal spectra. JSON goes to stdout (versioned schema), the human summary
//! to stderr. Exit codes: 0 success, 2 parse/config, 3 numerical failure,
//! 4 certification failure.

use clap::{Args, Parser, Subcommand};
use monodromy_core::classify::{candidate_points, classify_point, scan, MonodromyReport, Verdict};
use monodromy_core::focal::{focal_poly, parse_family};
use monodromy_core::pencil::{branch_points, build_pencil, make_center, Form, HPoint};
use monodromy_core::poly::{parse_hypersurface, parse_point};
use monodromy_core::{Config, Error};
use num_complex::Complex64;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "monodromy", version, about = "Monodromy classification of hypersurface projections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Master RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Root cluster tolerance (relative).
    #[arg(long = "tol-cluster")]
    tol_cluster: Option<f64>,
    /// Number of independent plane sections per center (dim >= 2).
    #[arg(long)]
    sections: Option<usize>,
    /// Worker threads (0 = library default).
    #[arg(long, default_value_t = 0)]
    parallelism: usize,
    /// Also write the JSON report to this path.
    #[arg(long = "json-out")]
    json_out: Option<PathBuf>,
}

impl CommonOpts {
    fn config(&self) -> Result<Config, Error> {
        let mut cfg = Config { seed: self.seed, ..Config::default() };
        if let Some(t) = self.tol_cluster {
            cfg.cluster_tol = t;
        }
        if let Some(s) = self.sections {
            cfg.sections = s;
        }
        cfg.parallelism = self.parallelism;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify one exterior point by its projection monodromy.
    AnalyzePoint {
        /// Polynomial file (variables x0..x9).
        f_file: PathBuf,
        /// Homogeneous coordinates, e.g. `1,0,0`.
        #[arg(long)]
        point: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Classify a list of candidate points.
    Scan {
        f_file: PathBuf,
        /// Candidate file: one point per line.
        #[arg(long, conflicts_with = "auto")]
        candidates: Option<PathBuf>,
        /// Generate candidates from coordinate points and tangent cones.
        #[arg(long)]
        auto: bool,
        /// Cap for generated candidates.
        #[arg(long, default_value_t = 16)]
        auto_limit: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Branch points of the projection from a point.
    BranchLocus {
        f_file: PathBuf,
        #[arg(long)]
        point: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Focal spectrum of a line family at a parameter sample.
    Focal {
        family_file: PathBuf,
        /// Parameter values, e.g. `0.3,0.7` (complex entries like 1+2i allowed).
        #[arg(long)]
        u: String,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Config(_) | Error::DimensionMismatch { .. } => 2,
        Error::CertificationMismatch { .. } | Error::ProductNotIdentity => 4,
        _ => 3,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::AnalyzePoint { f_file, point, common } => {
            let cfg = common.config()?;
            init_threads(&cfg);
            let f = load_form(&f_file)?;
            let p = HPoint::Exact(parse_point(&point)?);
            let report = classify_point(&f, &p, &cfg)?;
            summarize_point(&report);
            emit(&common, &Envelope::new("analyze-point", &cfg, report))
        }
        Command::Scan { f_file, candidates, auto, auto_limit, common } => {
            let cfg = common.config()?;
            init_threads(&cfg);
            let f = load_form(&f_file)?;
            let cands: Vec<HPoint> = if auto {
                let fe = f.exact().ok_or_else(|| {
                    Error::ExactRequired("--auto candidate generation".into())
                })?;
                candidate_points(fe, &[], auto_limit).into_iter().map(HPoint::Exact).collect()
            } else {
                let path = candidates
                    .ok_or_else(|| Error::Config("provide --candidates FILE or --auto".into()))?;
                load_candidates(&path)?
            };
            let report = scan(&f, &cands, &cfg);
            eprintln!(
                "scan: {} candidates; uniform {}, non-uniform {}, galois {}, decomposable {}, inconclusive {}, failed {}",
                report.entries.len(),
                report.summary.n_uniform,
                report.summary.n_non_uniform,
                report.summary.n_galois,
                report.summary.n_decomposable,
                report.summary.n_inconclusive,
                report.summary.n_failed,
            );
            emit(&common, &Envelope::new("scan", &cfg, report))
        }
        Command::BranchLocus { f_file, point, common } => {
            let cfg = common.config()?;
            init_threads(&cfg);
            let f = load_form(&f_file)?;
            let p = HPoint::Exact(parse_point(&point)?);
            let center = make_center(&f, &p, &cfg)?;
            let chart = build_pencil(&f, &center, cfg.seed, &cfg)?;
            let branch = branch_points(&chart, &cfg)?;
            let payload = BranchLocusJson::build(&branch, chart.d, cfg.seed);
            eprintln!(
                "branch locus: {} finite branch points ({} with multiplicity), infinity branched: {}",
                payload.branch_points.len(),
                payload.count_with_multiplicity,
                payload.infinity.is_some(),
            );
            emit(&common, &Envelope::new("branch-locus", &cfg, payload))
        }
        Command::Focal { family_file, u, common } => {
            let cfg = common.config()?;
            init_threads(&cfg);
            let text = read_file(&family_file)?;
            let fam = parse_family(&text)?;
            let sample = parse_complex_list(&u)?;
            let spec = focal_poly(&fam, &sample, &cfg)?;
            let payload = FocalJson {
                n: fam.n,
                u: sample.iter().map(|c| [c.re, c.im]).collect(),
                focal_degree: spec.focal_coeffs.len().saturating_sub(1),
                degree_drop: spec.degree_drop,
                roots: spec
                    .clusters
                    .iter()
                    .map(|cl| FocalRoot {
                        re: cl.center.re,
                        im: cl.center.im,
                        multiplicity: cl.multiplicity,
                    })
                    .collect(),
                focal_coeffs: spec.focal_coeffs.clone(),
            };
            eprintln!(
                "focal spectrum: degree {} + drop {} = n = {}; {} root cluster(s)",
                payload.focal_degree,
                payload.degree_drop,
                fam.n,
                payload.roots.len(),
            );
            emit(&common, &Envelope::new("focal", &cfg, payload))
        }
    }
}

fn init_threads(cfg: &Config) {
    if cfg.parallelism > 0 {
        // Ignore failure: the global pool can only be set once.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.parallelism).build_global();
    }
}

fn read_file(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn load_form(path: &PathBuf) -> Result<Form, Error> {
    let text = read_file(path)?;
    // Optional `vars: N` header pins the ambient variable count (needed for
    // cones, whose forms omit the vertex coordinates).
    let mut declared_vars: Option<usize> = None;
    let mut body_lines: Vec<&str> = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("vars:") {
            declared_vars = Some(rest.trim().parse().map_err(|_| {
                Error::Config("vars: must declare a small integer".into())
            })?);
            continue;
        }
        body_lines.push(line);
    }
    let body = body_lines.join("\n");
    let p = match declared_vars {
        Some(n) => monodromy_core::poly::parse_poly(
            body.trim(),
            monodromy_core::poly::VarScheme::HYPERSURFACE,
            n,
        )?,
        None => parse_hypersurface(body.trim())?,
    };
    if !p.is_homogeneous() {
        return Err(Error::Config("the defining polynomial must be homogeneous".into()));
    }
    Ok(Form::Exact(p))
}

fn load_candidates(path: &PathBuf) -> Result<Vec<HPoint>, Error> {
    let text = read_file(path)?;
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(HPoint::Exact(parse_point(line)?));
    }
    Ok(out)
}

fn parse_complex_list(text: &str) -> Result<Vec<Complex64>, Error> {
    use monodromy_core::num::Coeff;
    let parts = parse_point(text)?;
    Ok(parts.iter().map(|c| c.to_c64()).collect())
}

fn summarize_point(report: &MonodromyReport) {
    let verdict = match report.verdict {
        Verdict::Uniform => "uniform",
        Verdict::NonUniform => "non-uniform",
        Verdict::Inconclusive => "inconclusive",
    };
    eprintln!(
        "verdict: {verdict} (degree {}, {} section(s))",
        report.degree,
        report.sections.len()
    );
    for s in &report.sections {
        eprintln!(
            "  section seed {}: order {}, transitive {}, full symmetric {}, regular {}, primitive {}",
            s.seed, s.order, s.flags.is_transitive, s.flags.is_full_symmetric, s.flags.is_regular, s.flags.is_primitive
        );
    }
    if report.verdict == Verdict::NonUniform {
        eprintln!(
            "  galois: {}, decomposable: {}, contains transposition: {}",
            report.galois,
            report.decomposable,
            report
                .contains_transposition
                .map(|b| b.to_string())
                .unwrap_or_else(|| "unknown".into())
        );
    }
    if !report.failures.is_empty() {
        eprintln!("  failures: {}", report.failures.join("; "));
    }
}

/// Versioned JSON envelope shared by all commands.
#[derive(Serialize)]
struct Envelope<T: Serialize> {
    schema: u32,
    command: &'static str,
    seed: u64,
    result: T,
}

impl<T: Serialize> Envelope<T> {
    fn new(command: &'static str, cfg: &Config, result: T) -> Self {
        Envelope { schema: 1, command, seed: cfg.seed, result }
    }
}

fn emit<T: Serialize>(common: &CommonOpts, value: &T) -> Result<(), Error> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    println!("{json}");
    if let Some(path) = &common.json_out {
        std::fs::write(path, &json)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct BranchPointJson {
    t_re: f64,
    t_im: f64,
    profile: Vec<usize>,
    b: usize,
    simple: bool,
    meets_singular: bool,
    isolation: f64,
    t_multiplicity: usize,
    class: monodromy_core::pencil::LineClass,
}

#[derive(Serialize)]
struct BranchLocusJson {
    degree: usize,
    chart_seed: u64,
    branch_points: Vec<BranchPointJson>,
    infinity: Option<BranchInfinityJson>,
    count_with_multiplicity: usize,
    disc_degree: usize,
}

#[derive(Serialize)]
struct BranchInfinityJson {
    profile: Vec<usize>,
    b: usize,
    simple: bool,
    meets_singular: bool,
}

impl BranchLocusJson {
    fn build(branch: &monodromy_core::pencil::BranchSet, degree: usize, chart_seed: u64) -> Self {
        BranchLocusJson {
            degree,
            chart_seed,
            branch_points: branch
                .finite
                .iter()
                .map(|b| BranchPointJson {
                    t_re: b.t.re,
                    t_im: b.t.im,
                    profile: b.profile.multiplicities(),
                    b: b.profile.branching_weight,
                    simple: b.is_simple,
                    meets_singular: b.profile.meets_singular,
                    isolation: b.isolation,
                    t_multiplicity: b.t_multiplicity,
                    class: b.profile.class,
                })
                .collect(),
            infinity: branch.infinity.as_ref().map(|p| BranchInfinityJson {
                profile: p.multiplicities(),
                b: p.branching_weight,
                simple: p.branching_weight == 1,
                meets_singular: p.meets_singular,
            }),
            count_with_multiplicity: branch.total_with_multiplicity(),
            disc_degree: branch.disc_degree,
        }
    }
}

#[derive(Serialize)]
struct FocalRoot {
    re: f64,
    im: f64,
    multiplicity: usize,
}

#[derive(Serialize)]
struct FocalJson {
    n: usize,
    u: Vec<[f64; 2]>,
    focal_degree: usize,
    degree_drop: usize,
    roots: Vec<FocalRoot>,
    focal_coeffs: Vec<[f64; 2]>,
}
