//! Command-line front end: runs verification suites, positivity scans, and
//! self-tests; reads an optional JSON config; writes machine-readable
//! reports.
//!
//! Exit codes: 0 = all checks passed, 1 = residual/oracle failure,
//! 2 = configuration or precondition error.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qlattice::engine::{bilateral_sum, circle_quadrature};
use qlattice::qkernel::{gamma_fn, qpoch_inf, qpoch_ln, QContext};
use qlattice::suite::{run_identity, IdentityTag, RunOptions, VerifyRecord};
use qlattice::weights::SignConvention;
use qlattice::identities;

#[derive(Parser)]
#[command(
    name = "qlattice",
    version,
    about = "Numerical verification suite for a basic-hypergeometric lattice model"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify one identity over a (seed x q) grid and emit one report record
    /// per instance.
    Verify(VerifyArgs),
    /// Scan the pair weight over a coordinate/spectral grid and report
    /// positivity and phase statistics.
    Scan(ScanArgs),
    /// Run the kernel oracle suite and engine sanity checks.
    Selftest,
}

#[derive(Args, Default)]
struct VerifyArgs {
    /// JSON config file mirroring these flags; explicit flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Identity tag (star-triangle, sum-integral, we7, v-consistency,
    /// star-star, irf-ybe, classical-limit).
    #[arg(long)]
    identity: Option<String>,
    /// Seed range "a..b" (half-open) or comma list "0,3,7".
    #[arg(long)]
    seeds: Option<String>,
    /// Comma list of nome values in (0, 1).
    #[arg(long)]
    q: Option<String>,
    /// Relative tolerance override.
    #[arg(long)]
    tol: Option<f64>,
    /// Contour quadrature node count override.
    #[arg(long)]
    nodes: Option<usize>,
    /// Bilateral truncation override.
    #[arg(long)]
    mmax: Option<i64>,
    /// Sign convention: eta-minus-alpha (default) or alpha-minus-eta.
    #[arg(long)]
    sign: Option<String>,
    /// Rank for the transformation identity.
    #[arg(long)]
    n: Option<usize>,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format: json (canonical, one record per line) or csv (lossy).
    #[arg(long)]
    format: Option<String>,
    /// Worker pool size (default: number of processors).
    #[arg(long)]
    workers: Option<usize>,
}

/// File-config mirror of the verify flags.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    identity: Option<String>,
    seeds: Option<String>,
    q: Option<String>,
    tol: Option<f64>,
    nodes: Option<usize>,
    mmax: Option<i64>,
    sign: Option<String>,
    n: Option<usize>,
    out: Option<PathBuf>,
    format: Option<String>,
    workers: Option<usize>,
}

#[derive(Args)]
struct ScanArgs {
    /// Grid spec: semicolon-separated fields
    /// "q=0.3,0.5;thetas=10;alphas=5;charges=0:0,1:-1;sign=eta-minus-alpha".
    /// Omitted fields take the documented defaults (q=0.5, 10x10 angles,
    /// 5 spectral values, zero-charge sector).
    #[arg(long)]
    grid: Option<String>,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Cmd::Verify(args) => run_verify(args),
        Cmd::Scan(args) => run_scan(args),
        Cmd::Selftest => run_selftest(),
    };
    std::process::exit(match code {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    });
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>, String> {
    if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| format!("bad seed '{a}': {e}"))?;
        let b: u64 = b.trim().parse().map_err(|e| format!("bad seed '{b}': {e}"))?;
        if a >= b {
            return Err(format!("empty seed range {a}..{b}"));
        }
        return Ok((a..b).collect());
    }
    let seeds: Result<Vec<u64>, _> = spec
        .split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|e| format!("bad seed '{s}': {e}")))
        .collect();
    let seeds = seeds?;
    if seeds.is_empty() {
        return Err("need at least one seed".into());
    }
    Ok(seeds)
}

fn parse_q_list(spec: &str) -> Result<Vec<f64>, String> {
    let qs: Result<Vec<f64>, _> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("bad q '{s}': {e}")))
        .collect();
    let qs = qs?;
    if qs.is_empty() {
        return Err("need at least one q value".into());
    }
    for &q in &qs {
        if !(q > 0.0 && q < 1.0) {
            return Err(format!("q = {q} must lie in (0, 1)"));
        }
    }
    Ok(qs)
}

fn parse_sign(spec: &str) -> Result<SignConvention, String> {
    match spec {
        "eta-minus-alpha" => Ok(SignConvention::EtaMinusAlpha),
        "alpha-minus-eta" => Ok(SignConvention::AlphaMinusEta),
        other => Err(format!(
            "unknown sign convention '{other}'; expected eta-minus-alpha or alpha-minus-eta"
        )),
    }
}

/// One verify output line: either a residual record or a per-instance error.
#[derive(Serialize)]
#[serde(untagged)]
enum OutRecord {
    Ok(VerifyRecord),
    Err {
        identity: String,
        seed: u64,
        q: f64,
        error: String,
        pass: bool,
    },
}

fn run_verify(args: VerifyArgs) -> Result<i32, String> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            serde_json::from_str(&text)
                .map_err(|e| format!("bad config {}: {e}", path.display()))?
        }
        None => FileConfig::default(),
    };
    // Flags override file values.
    let identity = args
        .identity
        .or(file.identity)
        .ok_or("missing --identity")?;
    let tag = IdentityTag::parse(&identity).map_err(|e| e.to_string())?;
    let seeds = parse_seeds(&args.seeds.or(file.seeds).ok_or("missing --seeds")?)?;
    let qs = parse_q_list(&args.q.or(file.q).ok_or("missing --q")?)?;
    let sign = match args.sign.or(file.sign) {
        Some(s) => parse_sign(&s)?,
        None => SignConvention::EtaMinusAlpha,
    };
    let format = args.format.or(file.format).unwrap_or_else(|| "json".into());
    if format != "json" && format != "csv" {
        return Err(format!("unknown format '{format}'; expected json or csv"));
    }
    let out_path = args.out.or(file.out);
    let opts = RunOptions {
        sign,
        n: args.n.or(file.n).unwrap_or(1),
        nodes: args.nodes.or(file.nodes),
        mmax: args.mmax.or(file.mmax),
        tol: args.tol.or(file.tol),
        budget: None,
        h_max: RunOptions::default().h_max,
    };
    // Validate the grid before spending any compute.
    for &q in &qs {
        qlattice::suite::build_context(q, &opts).map_err(|e| e.to_string())?;
    }
    let workers = args
        .workers
        .or(file.workers)
        .unwrap_or_else(num_cpus_like);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| format!("cannot build worker pool: {e}"))?;

    // Deterministic (seed, q) order; the parallel map preserves it.
    let grid: Vec<(u64, f64)> = seeds
        .iter()
        .flat_map(|&s| qs.iter().map(move |&q| (s, q)))
        .collect();
    let records: Vec<OutRecord> = pool.install(|| {
        use rayon::prelude::*;
        grid.par_iter()
            .map(|&(seed, q)| match run_identity(tag, seed, q, &opts) {
                Ok(rec) => OutRecord::Ok(rec),
                Err(e) => OutRecord::Err {
                    identity: tag.as_str().into(),
                    seed,
                    q,
                    error: e.to_string(),
                    pass: false,
                },
            })
            .collect()
    });

    let all_pass = records.iter().all(|r| match r {
        OutRecord::Ok(rec) => rec.report.pass,
        OutRecord::Err { .. } => false,
    });
    let body = match format.as_str() {
        "json" => {
            let mut s = String::new();
            for r in &records {
                s.push_str(&serde_json::to_string(r).map_err(|e| e.to_string())?);
                s.push('\n');
            }
            s
        }
        _ => verify_csv(&records)?,
    };
    write_output(out_path.as_deref(), &body)?;
    Ok(if all_pass { 0 } else { 1 })
}

/// Lossy CSV projection of the verify records: complex values split into
/// _re/_im columns, flags joined by ';', flavor parameters serialized as
/// modulus:phase:charge triples joined by ';'.
fn verify_csv(records: &[OutRecord]) -> Result<String, String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "identity",
        "seed",
        "q",
        "params",
        "lhs_re",
        "lhs_im",
        "rhs_re",
        "rhs_im",
        "abs_residual",
        "rel_residual",
        "convention_flags",
        "runtime_ms",
        "pass",
        "error",
    ])
    .map_err(|e| e.to_string())?;
    for r in records {
        match r {
            OutRecord::Ok(rec) => {
                let params = rec
                    .params
                    .iter()
                    .map(|p| format!("{}:{}:{}", p.modulus, p.phase, p.charge))
                    .collect::<Vec<_>>()
                    .join(";");
                wtr.write_record([
                    rec.identity.clone(),
                    rec.seed.to_string(),
                    rec.q.to_string(),
                    params,
                    rec.report.lhs_re.to_string(),
                    rec.report.lhs_im.to_string(),
                    rec.report.rhs_re.to_string(),
                    rec.report.rhs_im.to_string(),
                    rec.report.abs_residual.to_string(),
                    rec.report.rel_residual.to_string(),
                    rec.report.convention_flags.join(";"),
                    rec.report.runtime_ms.to_string(),
                    rec.report.pass.to_string(),
                    String::new(),
                ])
                .map_err(|e| e.to_string())?;
            }
            OutRecord::Err {
                identity,
                seed,
                q,
                error,
                ..
            } => {
                let mut row = vec![identity.clone(), seed.to_string(), q.to_string()];
                row.extend(std::iter::repeat(String::new()).take(9));
                row.push("false".into());
                row.push(error.clone());
                wtr.write_record(&row).map_err(|e| e.to_string())?;
            }
        }
    }
    String::from_utf8(wtr.into_inner().map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())
}

fn num_cpus_like() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn write_output(path: Option<&std::path::Path>, body: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, body).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .map_err(|e| format!("cannot write stdout: {e}"))
        }
    }
}

struct GridSpec {
    qs: Vec<f64>,
    thetas: usize,
    alphas: usize,
    charges: Vec<(i64, i64)>,
    sign: SignConvention,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            qs: vec![0.5],
            thetas: 10,
            alphas: 5,
            charges: vec![(0, 0)],
            sign: SignConvention::EtaMinusAlpha,
        }
    }
}

fn parse_grid(spec: &str) -> Result<GridSpec, String> {
    let mut grid = GridSpec::default();
    for field in spec.split(';').filter(|f| !f.trim().is_empty()) {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| format!("bad grid field '{field}'; expected key=value"))?;
        match key.trim() {
            "q" => grid.qs = parse_q_list(value)?,
            "thetas" => {
                grid.thetas = value
                    .trim()
                    .parse()
                    .map_err(|e| format!("bad thetas '{value}': {e}"))?
            }
            "alphas" => {
                grid.alphas = value
                    .trim()
                    .parse()
                    .map_err(|e| format!("bad alphas '{value}': {e}"))?
            }
            "charges" => {
                grid.charges = value
                    .split(',')
                    .map(|pair| {
                        let (a, b) = pair
                            .split_once(':')
                            .ok_or_else(|| format!("bad charge pair '{pair}'; expected mi:mj"))?;
                        Ok((
                            a.trim().parse().map_err(|e| format!("bad charge '{a}': {e}"))?,
                            b.trim().parse().map_err(|e| format!("bad charge '{b}': {e}"))?,
                        ))
                    })
                    .collect::<Result<Vec<_>, String>>()?;
            }
            "sign" => grid.sign = parse_sign(value.trim())?,
            other => return Err(format!("unknown grid field '{other}'")),
        }
        if grid.thetas == 0 || grid.alphas == 0 || grid.charges.is_empty() {
            return Err("grid dimensions must be nonzero".into());
        }
    }
    Ok(grid)
}

fn run_scan(args: ScanArgs) -> Result<i32, String> {
    let spec = match &args.grid {
        Some(s) => parse_grid(s)?,
        None => GridSpec::default(),
    };
    let eta = spec.sign.eta();
    // Angles avoid the endpoints (theta = 0 duplicates theta = 2 pi);
    // spectral values stay strictly inside the kernel domain.
    let thetas: Vec<f64> = (0..spec.thetas)
        .map(|i| std::f64::consts::TAU * (i as f64 + 0.5) / spec.thetas as f64)
        .collect();
    let alphas: Vec<f64> = (0..spec.alphas)
        .map(|i| eta * (0.15 + 0.7 * i as f64 / (spec.alphas.max(2) - 1) as f64))
        .collect();
    let mut body = String::new();
    body.push_str("q,theta_i,theta_j,alpha,mi,mj,re,im,phase,positive,error\n");
    let mut all_zero_charge_positive = true;
    for &q in &spec.qs {
        let ctx = QContext::new(q).map_err(|e| e.to_string())?;
        let grid = identities::PositivityGrid {
            thetas_i: thetas.clone(),
            thetas_j: thetas.clone(),
            alphas: alphas.clone(),
            charge_sectors: spec.charges.clone(),
        };
        let report = identities::positivity_scan(&grid, spec.sign, &ctx);
        if report.zero_charge_positive < report.zero_charge_total {
            all_zero_charge_positive = false;
        }
        for row in &report.rows {
            body.push_str(&format!(
                "{q},{},{},{},{},{},{},{},{},{},{}\n",
                row.theta_i,
                row.theta_j,
                row.alpha,
                row.mi,
                row.mj,
                row.re,
                row.im,
                row.phase,
                row.positive,
                row.error.clone().unwrap_or_default(),
            ));
        }
    }
    write_output(args.out.as_deref(), &body)?;
    Ok(if all_zero_charge_positive { 0 } else { 1 })
}

fn run_selftest() -> Result<i32, String> {
    let started = Instant::now();
    let mut failures: Vec<String> = Vec::new();
    let mut check = |name: &str, result: Result<(), String>| {
        match result {
            Ok(()) => println!("selftest {name}: ok"),
            Err(msg) => {
                println!("selftest {name}: FAIL ({msg})");
                failures.push(name.to_string());
            }
        }
    };

    check("pentagonal-series", selftest_pentagonal());
    check("gamma-recurrence", selftest_gamma_recurrence());
    check("qpoch-telescoping", selftest_telescoping());
    check("quadrature-orthogonality", selftest_orthogonality());
    check("bilateral-geometric", selftest_bilateral());

    let elapsed = started.elapsed().as_secs_f64();
    println!(
        "selftest: {} checks, {} failed, {elapsed:.2} s",
        5,
        failures.len()
    );
    Ok(if failures.is_empty() { 0 } else { 1 })
}

/// Euler function phi(q) = (q; q)_inf against the pentagonal-number series.
fn selftest_pentagonal() -> Result<(), String> {
    for &q in &[0.2, 0.5, 0.8] {
        let ctx = QContext::new(q).map_err(|e| e.to_string())?;
        let lhs = qpoch_inf(Complex64::new(q, 0.0), &ctx).map_err(|e| e.to_string())?;
        let mut series = 1.0f64;
        for k in 1..200i64 {
            let g1 = (k * (3 * k - 1) / 2) as f64;
            let g2 = (k * (3 * k + 1) / 2) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            series += sign * (q.powf(g1) + q.powf(g2));
        }
        let rel = (lhs.re - series).abs() / series.abs();
        if rel > 1e-12 || lhs.im.abs() > 1e-14 {
            return Err(format!("q = {q}: rel = {rel:.3e}"));
        }
    }
    Ok(())
}

/// Gamma(z + 1) = z Gamma(z) on a small complex sample.
fn selftest_gamma_recurrence() -> Result<(), String> {
    for &(re, im) in &[(0.7, 0.3), (1.4, -0.8), (2.3, 1.1)] {
        let z = Complex64::new(re, im);
        let lhs = gamma_fn(z + 1.0).map_err(|e| e.to_string())?;
        let rhs = z * gamma_fn(z).map_err(|e| e.to_string())?;
        let rel = (lhs - rhs).norm() / rhs.norm();
        if rel > 1e-12 {
            return Err(format!("z = {z}: rel = {rel:.3e}"));
        }
    }
    Ok(())
}

/// (w; q)_inf = (1 - w)(qw; q)_inf.
fn selftest_telescoping() -> Result<(), String> {
    let ctx = QContext::new(0.45).map_err(|e| e.to_string())?;
    for &(re, im) in &[(0.3, 0.4), (-0.6, 0.1), (0.0, -0.7)] {
        let w = Complex64::new(re, im);
        let lhs = qpoch_ln(w, &ctx).map_err(|e| e.to_string())?.to_complex();
        let rhs = (Complex64::new(1.0, 0.0) - w)
            * qpoch_ln(ctx.q * w, &ctx)
                .map_err(|e| e.to_string())?
                .to_complex();
        let rel = (lhs - rhs).norm() / rhs.norm();
        if rel > 1e-12 {
            return Err(format!("w = {w}: rel = {rel:.3e}"));
        }
    }
    Ok(())
}

/// Contour quadrature integrates z^k to delta_{k,0} exactly for |k| < n.
fn selftest_orthogonality() -> Result<(), String> {
    for k in -5i32..=5 {
        let val = circle_quadrature(
            |z| Ok(z.powi(k)),
            64,
        )
        .map_err(|e| e.to_string())?;
        let expect = if k == 0 { 1.0 } else { 0.0 };
        if (val - expect).norm() > 1e-13 {
            return Err(format!("k = {k}: got {val}"));
        }
    }
    Ok(())
}

/// Bilateral geometric sum sum_m q^{|m|} = (1 + q) / (1 - q).
fn selftest_bilateral() -> Result<(), String> {
    let ctx = QContext::new(0.3).map_err(|e| e.to_string())?;
    let val = bilateral_sum(
        |m| Ok(Complex64::new(ctx.q.powi(m.unsigned_abs() as i32), 0.0)),
        &ctx,
    )
    .map_err(|e| e.to_string())?;
    let expect = (1.0 + ctx.q) / (1.0 - ctx.q);
    let rel = (val.re - expect).abs() / expect;
    if rel > 1e-12 {
        return Err(format!("rel = {rel:.3e}"));
    }
    Ok(())
}
