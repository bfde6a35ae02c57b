//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::covering::{
    besicovich_cover, build_calibrated_covering, calibration_error, cell_points, Covering, CoveringDocument, DEFAULT_RTOL,
};
use crate::domain::{DomainMask, MaskPreset};
use crate::error::{Error, Result};
use crate::orlicz::{orlicz_norm, orlicz_norm_indicator, MeasuredField, OrliczNormResult};
use crate::par;
use crate::potential::PotentialSpec;
use crate::report::RunReport;
use crate::spectral::certificate::{bound_corpus, certificate_verify, standard_corpus, CertificateConstants};
use crate::spectral::inertia::count_negative;
use crate::spectral::operator::{dirichlet_laplacian, schrodinger};
use crate::spectral::trudinger::{trudinger_constant, trudinger_root};
use crate::spectral::weyl::weyl_sweep;
use crate::young::{ExpLog, YoungPair};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "ORLICZ_SPECTRAL_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_ASSERTION: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "orlicz-spectral", version, about = "Orlicz norms, coverings and bound-state counts on 2D domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Orlicz norm of the negative part of the potential.
    Norm(CommonArgs),
    /// Calibrated Besicovitch covering of the negative part.
    Cover(CoverArgs),
    /// Number of negative eigenvalues of -Laplacian + alpha V.
    Count(CountArgs),
    /// Counts over a sweep of coupling constants.
    Weyl(WeylArgs),
    /// N against the norm of V_-, for one instance or the built-in corpus.
    Bound(BoundArgs),
    /// Checks N against a calibrated covering.
    VerifyCert(CertArgs),
    /// Runs the built-in invariant suite.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Preset name or path to a PGM (P2) or CSV mask.
    #[arg(long, default_value = "square")]
    pub domain: String,
    /// `name:params` preset or path to a CSV of grid values.
    #[arg(long, default_value = "constant-well:1")]
    pub potential: String,
    /// Cells per side for preset domains.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(16..=4096))]
    pub grid: u64,
    /// Physical side length of the bounding box.
    #[arg(long)]
    pub side: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct CoverArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Norm carried by every cube.
    #[arg(long)]
    pub level: f64,
    #[arg(long, default_value_t = DEFAULT_RTOL)]
    pub rtol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CountArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Args)]
pub struct WeylArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Increasing, comma-separated coupling constants.
    #[arg(long, value_delimiter = ',', required = true)]
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Run every preset domain against the built-in potential family.
    #[arg(long)]
    pub corpus: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CertArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Covering level; defaults to min(S2'/4, S2).
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_RTOL)]
    pub rtol: f64,
    /// Mean-zero Trudinger constant S2' (not a proven value).
    #[arg(long, default_value_t = crate::spectral::certificate::DEFAULT_S2_PRIME)]
    pub s2_prime: f64,
    /// Covering JSON to verify instead of building one.
    #[arg(long)]
    pub covering: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Text produced by a command and whether its invariants held.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub ok: bool,
}

struct Instance {
    domain_id: String,
    mask: DomainMask,
    potential: MeasuredField,
    notes: Vec<String>,
}

/// Preset name or mask file.
pub fn ingest_mask(source: &str, n: usize, side: Option<f64>) -> Result<DomainMask> {
    match MaskPreset::parse(source) {
        Some(p) => match side {
            Some(s) => DomainMask::preset_with_side(p, n, s),
            None => DomainMask::preset(p, n),
        },
        None if Path::new(source).is_file() => DomainMask::load(Path::new(source), side),
        None => Err(Error::InvalidArgument(format!("'{source}' is neither a preset nor a mask file"))),
    }
}

fn instance(args: &CommonArgs) -> Result<Instance> {
    if let Some(s) = args.side {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidArgument(format!("side must be positive, got {s}")));
        }
    }
    let mask = ingest_mask(&args.domain, args.grid as usize, args.side)?;
    let (potential, notes) = PotentialSpec::parse(&args.potential)?.sample(&mask)?;
    Ok(Instance { domain_id: args.domain.clone(), mask, potential, notes })
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn json_only(args: &CommonArgs, command: &str) -> Result<()> {
    match args.format {
        Format::Json => Ok(()),
        Format::Csv => Err(Error::InvalidArgument(format!("{command} has no CSV output"))),
    }
}

fn csv_table<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [String; N]>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii csv"))
}

#[derive(Serialize)]
struct NormReport<'a> {
    domain_id: &'a str,
    grid_n: usize,
    h: f64,
    measure: f64,
    #[serde(rename = "norm_B")]
    norm_b: f64,
    #[serde(flatten)]
    result: OrliczNormResult,
    warnings: &'a [String],
    seed: u64,
}

fn norm(args: &CommonArgs) -> Result<Outcome> {
    json_only(args, "norm")?;
    let inst = instance(args)?;
    let result = orlicz_norm(&inst.potential.negative_part())?;
    let output = json(&NormReport {
        domain_id: &inst.domain_id,
        grid_n: inst.mask.n(),
        h: inst.mask.h(),
        measure: inst.mask.measure(),
        norm_b: result.norm,
        result,
        warnings: &inst.notes,
        seed: args.seed,
    })?;
    Ok(Outcome { output, ok: true })
}

fn cover(args: &CoverArgs) -> Result<Outcome> {
    let inst = instance(&args.common)?;
    let covering = build_calibrated_covering(&inst.potential.negative_part(), &inst.mask, args.level, args.rtol)?;
    let cert = covering.certify(&cell_points(&inst.mask));
    let doc = covering.to_document();
    let output = match args.common.format {
        Format::Json => json(&doc)?,
        Format::Csv => csv_table(
            ["cx", "cy", "side", "color", "norm"],
            doc.cubes.iter().map(|c| {
                [c.cx.to_string(), c.cy.to_string(), c.side.to_string(), c.color.to_string(), c.norm.unwrap_or(f64::NAN).to_string()]
            }),
        )?,
    };
    let chain = doc.m_bound_rhs.is_none_or(|rhs| covering.len() as f64 <= rhs * (1.0 + args.rtol));
    Ok(Outcome { output, ok: cert.ok() && chain })
}

fn count(args: &CountArgs) -> Result<Outcome> {
    json_only(&args.common, "count")?;
    if !(args.alpha.is_finite() && args.alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {}", args.alpha)));
    }
    let inst = instance(&args.common)?;
    let mut report = RunReport::compute(&inst.domain_id, &inst.mask, &inst.potential, args.alpha, args.common.seed)?;
    report.warnings.extend(inst.notes);
    Ok(Outcome { output: json(&report)?, ok: true })
}

#[derive(Serialize)]
struct WeylReport<'a> {
    domain_id: &'a str,
    grid_n: usize,
    h: f64,
    #[serde(flatten)]
    sweep: &'a crate::spectral::weyl::WeylSweep,
    seed: u64,
}

fn weyl(args: &WeylArgs) -> Result<Outcome> {
    let mut inst = instance(&args.common)?;
    let mut sweep = weyl_sweep(&inst.mask, &inst.potential, &args.alphas)?;
    sweep.warnings.append(&mut inst.notes);
    let output = match args.common.format {
        Format::Json => json(&WeylReport {
            domain_id: &inst.domain_id,
            grid_n: inst.mask.n(),
            h: inst.mask.h(),
            sweep: &sweep,
            seed: args.common.seed,
        })?,
        Format::Csv => sweep.to_csv()?,
    };
    Ok(Outcome { output, ok: true })
}

fn bound(args: &BoundArgs) -> Result<Outcome> {
    if !args.corpus {
        json_only(&args.common, "bound")?;
        let inst = instance(&args.common)?;
        let mut report = RunReport::compute(&inst.domain_id, &inst.mask, &inst.potential, 1.0, args.common.seed)?;
        report.warnings.extend(inst.notes);
        return Ok(Outcome { output: json(&report)?, ok: true });
    }
    let summary = bound_corpus(&standard_corpus(args.common.grid as usize)?)?;
    let output = match args.common.format {
        Format::Json => json(&summary)?,
        Format::Csv => csv_table(
            ["id", "N", "n_zero", "norm_B", "ratio"],
            summary.rows.iter().map(|r| {
                [
                    r.id.clone(),
                    r.check.n.to_string(),
                    r.check.n_zero.to_string(),
                    r.check.norm_b.to_string(),
                    r.check.ratio.map_or(String::new(), |x| x.to_string()),
                ]
            }),
        )?,
    };
    Ok(Outcome { output, ok: summary.c_hat.is_finite() })
}

fn verify_cert(args: &CertArgs) -> Result<Outcome> {
    json_only(&args.common, "verify-cert")?;
    if !(args.s2_prime.is_finite() && args.s2_prime > 0.0) {
        return Err(Error::InvalidArgument(format!("s2-prime must be positive, got {}", args.s2_prime)));
    }
    let inst = instance(&args.common)?;
    let constants = CertificateConstants { s2_prime: args.s2_prime, ..CertificateConstants::default() };
    let covering = match (&args.covering, args.level) {
        (Some(path), _) => {
            let doc: CoveringDocument = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            Some(Covering::from_document(&doc)?)
        }
        (None, Some(level)) => {
            Some(build_calibrated_covering(&inst.potential.negative_part(), &inst.mask, level, args.rtol)?)
        }
        (None, None) => None,
    };
    let report = certificate_verify(&inst.mask, &inst.potential, covering.as_ref(), &constants, args.rtol)?;
    Ok(Outcome { output: json(&report)?, ok: report.holds() })
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestCheck {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<SelftestCheck>,
}

fn check(name: &'static str, body: impl FnOnce() -> Result<(bool, String)>) -> SelftestCheck {
    match body() {
        Ok((pass, detail)) => SelftestCheck { name, pass, detail },
        Err(e) => SelftestCheck { name, pass: false, detail: e.to_string() },
    }
}

/// Quick invariant suite over every module.
pub fn selftest(seed: u64) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(f64, f64)> = (0..20).map(|_| (rng.gen_range(0.01..1.0), rng.gen_range(1.0..3.0))).collect();
    let young: Vec<(f64, f64)> = (0..200).map(|_| (rng.gen_range(0.0..8.0), rng.gen_range(0.0..50.0))).collect();
    let points: Vec<Vec<f64>> = (0..150).map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
    let checks = vec![
        check("young-inequality", || {
            let worst = young.iter().map(|&(t, s)| s * t - ExpLog.a(t) - ExpLog.b(s)).fold(f64::NEG_INFINITY, f64::max);
            Ok((worst <= 1e-9, format!("max st - A(t) - B(s) = {worst:e}")))
        }),
        check("indicator-closed-form", || {
            let mut worst = 0.0_f64;
            for &(f, ratio) in &pairs {
                let x = f * ratio;
                let g = MeasuredField::new(vec![1.0, 0.0], vec![f, x - f])?;
                let exact = orlicz_norm_indicator(f, x)?;
                worst = worst.max((orlicz_norm(&g)?.norm - exact).abs() / exact);
            }
            Ok((worst <= 1e-6, format!("max relative error {worst:e}")))
        }),
        check("besicovitch-certificate", || {
            let cov = besicovich_cover(&points, |p| 0.05 + 0.2 * p[0])?;
            let cert = cov.certify(&points);
            Ok((cert.ok(), format!("{} cubes, depth {}, {} colours", cov.len(), cert.max_depth, cert.colors_used)))
        }),
        check("calibrated-covering", || {
            let mask = DomainMask::preset(MaskPreset::Disk, 24)?;
            let w = MeasuredField::sample(&mask, |x, y| 40.0 * (-8.0 * ((x - 0.5).powi(2) + (y - 0.5).powi(2))).exp())?;
            let cov = build_calibrated_covering(&w, &mask, 0.25, DEFAULT_RTOL)?;
            let err = calibration_error(&cov).unwrap_or(f64::NAN);
            let rhs = cov.m_bound_rhs().unwrap_or(f64::NAN);
            let ok = cov.certify(&cell_points(&mask)).ok() && err <= DEFAULT_RTOL && cov.len() as f64 <= rhs * (1.0 + DEFAULT_RTOL);
            Ok((ok, format!("M = {}, bound {rhs:.1}, calibration error {err:e}", cov.len())))
        }),
        check("laplacian-positive", || {
            let mask = DomainMask::preset(MaskPreset::LShape, 32)?;
            let r = count_negative(&dirichlet_laplacian(&mask)?, 0.0)?;
            Ok((r.n_negative == 0 && r.n_zero == 0, format!("inertia ({}, {}, {})", r.n_negative, r.n_zero, r.n_positive)))
        }),
        check("square-well", || {
            let mask = DomainMask::preset(MaskPreset::Square, 64)?;
            let v = MeasuredField::on_mask(&mask, vec![-50.0; mask.num_inside()])?;
            let r = count_negative(&schrodinger(&mask, &v)?, 0.0)?;
            Ok((r.n_negative == 3, format!("N(-Laplacian - 50) = {}", r.n_negative)))
        }),
        check("weyl-monotone", || {
            let mask = DomainMask::preset(MaskPreset::Disk, 32)?;
            let v = MeasuredField::on_mask(&mask, vec![-1.0; mask.num_inside()])?;
            let s = weyl_sweep(&mask, &v, &[10.0, 50.0, 100.0, 200.0])?;
            let counts: Vec<usize> = s.rows.iter().map(|r| r.n).collect();
            Ok((counts.windows(2).all(|w| w[0] <= w[1]), format!("N = {counts:?}")))
        }),
        check("trudinger-root", || {
            let s2 = trudinger_root();
            let c = trudinger_constant(s2)?;
            Ok(((c - 1.0).abs() < 1e-9, format!("S2 = {s2}, C(S2) = {c}")))
        }),
        check("mask-round-trip", || {
            let mut ok = true;
            for p in MaskPreset::ALL {
                let m = DomainMask::preset(p, 40)?;
                ok &= DomainMask::from_pgm(&m.to_pgm(), None, p.name())? == m;
            }
            Ok((ok, "PGM round trip of every preset".into()))
        }),
    ];
    SelftestReport { seed, passed: checks.iter().all(|c| c.pass), checks }
}

/// Runs one command and returns its output.
pub fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::Norm(a) => norm(a),
        Command::Cover(a) => cover(a),
        Command::Count(a) => count(a),
        Command::Weyl(a) => weyl(a),
        Command::Bound(a) => bound(a),
        Command::VerifyCert(a) => verify_cert(a),
        Command::Selftest(a) => {
            let r = selftest(a.seed);
            Ok(Outcome { output: json(&r)?, ok: r.passed })
        }
    }
}

fn out_path(command: &Command) -> Option<&Path> {
    match command {
        Command::Norm(a) => a.out.as_deref(),
        Command::Cover(a) => a.common.out.as_deref(),
        Command::Count(a) => a.common.out.as_deref(),
        Command::Weyl(a) => a.common.out.as_deref(),
        Command::Bound(a) => a.common.out.as_deref(),
        Command::VerifyCert(a) => a.common.out.as_deref(),
        Command::Selftest(a) => a.out.as_deref(),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    par::init_global_pool(threads);
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code:
/// 0 on success, 1 on an input error, 2 when an invariant fails.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads().and_then(|()| execute(&cli.command)).and_then(|outcome| {
        match out_path(&cli.command) {
            Some(path) => std::fs::write(path, &outcome.output)?,
            None => print!("{}", outcome.output),
        }
        Ok(outcome.ok)
    });
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("error: invariant violated; see the report");
            EXIT_ASSERTION
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
