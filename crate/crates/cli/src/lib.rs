//! Command-line front end. Every subcommand parses its inputs, calls one
//! library entry point and serializes the result.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use psl2trop::certifier::{certify_no_lines, cross_check, genericity_report};
use psl2trop::lines::{quadric_intersections, val_image, LineK};
use psl2trop::mat2::PuiseuxMat2;
use psl2trop::puiseux::DEFAULT_DEPTH;
use psl2trop::surfaces::{sample_points, strata_describe, stratum_membership, SamplePoint, SurfaceFamily};
use psl2trop::valuation::{cone_distance, numeric_limit, val_point, ConeDistanceParams, ConePoint};
use psl2trop::{Error, Tolerances};

/// Samples are drawn in chunks of this size, each from its own stream, so
/// output does not depend on the number of workers.
const CHUNK: usize = 8;

/// Absolute slack when comparing successive oracle distances; monomial
/// inputs have exact limits and their distances are rounding noise.
const SCALING_SLACK: f64 = 1e-12;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUSED: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "psl2trop", version, about = "PSL2 phase tropicalization toolkit")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Seed for all randomness; falls back to PSL2TROP_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Truncation depth for series operations (at least 2).
    #[arg(long, global = true, default_value_t = DEFAULT_DEPTH)]
    depth: usize,
    /// Tolerance for projective classes [default: 1e-9].
    #[arg(long, global = true)]
    tol_proj: Option<f64>,
    /// Tolerance for curve membership [default: 1e-6].
    #[arg(long, global = true)]
    tol_curve: Option<f64>,
    /// Comma-separated evaluation points, each a number or `e^K`.
    #[arg(long, global = true, value_delimiter = ',')]
    t_grid: Option<Vec<String>>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sampling drivers.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Valuations of points and lines.
    #[command(subcommand)]
    Val(ValCmd),
    /// Surface families.
    #[command(subcommand)]
    Surface(SurfaceCmd),
    /// Lines on surfaces.
    #[command(subcommand)]
    Lines(LinesCmd),
    /// Numeric oracles.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Data export.
    #[command(subcommand)]
    Export(ExportCmd),
}

#[derive(Subcommand, Debug)]
enum ValCmd {
    /// VAL of a matrix over the Puiseux field.
    Point {
        /// Matrix JSON, or `@path`.
        #[arg(short, long)]
        matrix: String,
    },
    /// Symbolic VAL image of the line through two matrices.
    Line {
        #[arg(long)]
        p1: String,
        #[arg(long)]
        p2: String,
    },
}

#[derive(Subcommand, Debug)]
enum SurfaceCmd {
    /// Strata of the image of a family.
    Strata {
        #[arg(long)]
        family: PathBuf,
    },
    /// Stratum of VAL of a matrix.
    Check {
        #[arg(long)]
        family: PathBuf,
        #[arg(short, long)]
        matrix: String,
    },
    /// Random points of the surface with their valuations and strata.
    Sample {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, default_value_t = 16)]
        count: usize,
    },
}

#[derive(Subcommand, Debug)]
enum LinesCmd {
    /// No-lines certificate for a family of degree at least 4.
    Certify {
        #[arg(long)]
        family: PathBuf,
        /// Expected degree; rejected if the family has another.
        #[arg(long)]
        degree: Option<u32>,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// Distance from the numeric scaling limit to VAL across the t grid.
    Scaling {
        #[arg(short, long)]
        matrix: String,
    },
}

#[derive(Subcommand, Debug)]
enum ExportCmd {
    /// CSV of VAL points of random surface points.
    Cloud {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, default_value_t = 64)]
        count: usize,
    },
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    kind: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::PrecisionInsufficient(_) | Error::Overflow(_) | Error::ClusterAmbiguity(_) => EXIT_PRECISION,
            Error::GenericityFailure(_) => EXIT_REFUSED,
            _ => EXIT_MALFORMED,
        };
        Failure { code, kind: e.kind().to_string(), message: e.to_string() }
    }
}

fn malformed(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_MALFORMED, kind: "invalid_input".into(), message: message.into() }
}

/// Output of a subcommand: a document and an exit code.
enum Output {
    Json(Value, i32),
    Csv(String),
}

struct Config {
    seed: u64,
    depth: usize,
    tol: Tolerances,
    t_grid: Vec<f64>,
    workers: usize,
}

fn parse_t(s: &str) -> Result<f64, Failure> {
    let s = s.trim();
    let v = match s.strip_prefix("e^") {
        Some(k) => k.parse::<f64>().map(f64::exp),
        None => s.parse::<f64>(),
    }
    .map_err(|_| malformed(format!("bad t-grid entry {s:?}")))?;
    if !(v > std::f64::consts::E) || !v.is_finite() {
        return Err(malformed(format!("t-grid entries must be finite and exceed e, got {s}")));
    }
    Ok(v)
}

fn config(g: &GlobalOpts) -> Result<Config, Failure> {
    let seed = match g.seed {
        Some(s) => s,
        None => match std::env::var("PSL2TROP_SEED") {
            Ok(v) => v.trim().parse().map_err(|_| malformed(format!("PSL2TROP_SEED is not an integer: {v:?}")))?,
            Err(_) => 0,
        },
    };
    if g.depth < 2 {
        return Err(malformed("--depth must be at least 2"));
    }
    let mut tol = Tolerances::default();
    for (flag, v, slot) in [("--tol-proj", g.tol_proj, &mut tol.proj), ("--tol-curve", g.tol_curve, &mut tol.curve)] {
        if let Some(v) = v {
            if !(v > 0.0 && v.is_finite()) {
                return Err(malformed(format!("{flag} must be positive")));
            }
            *slot = v;
        }
    }
    let t_grid = match &g.t_grid {
        Some(list) => list.iter().map(|s| parse_t(s)).collect::<Result<_, _>>()?,
        None => vec![10f64.exp(), 20f64.exp(), 30f64.exp()],
    };
    if g.workers == 0 {
        return Err(malformed("--workers must be at least 1"));
    }
    Ok(Config { seed, depth: g.depth, tol, t_grid, workers: g.workers })
}

fn read_json_arg(arg: &str) -> Result<Value, Failure> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| malformed(format!("cannot read {path}: {e}")))?,
        None => arg.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| Failure { code: EXIT_MALFORMED, kind: "parse".into(), message: format!("invalid JSON: {e}") })
}

fn read_matrix(arg: &str) -> Result<PuiseuxMat2, Failure> {
    Ok(PuiseuxMat2::from_json(&read_json_arg(arg)?)?)
}

fn read_family(path: &PathBuf) -> Result<SurfaceFamily, Failure> {
    let text = fs::read_to_string(path).map_err(|e| malformed(format!("cannot read {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| Failure { code: EXIT_MALFORMED, kind: "parse".into(), message: format!("invalid JSON: {e}") })?;
    Ok(SurfaceFamily::from_json(&v)?)
}

/// Seed of chunk `k`: the `k`-th stream of the master generator.
fn chunk_seed(seed: u64, k: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng.next_u64()
}

fn samples(s: &SurfaceFamily, count: usize, cfg: &Config) -> Result<Vec<SamplePoint>, Failure> {
    if count == 0 {
        return Err(malformed("--count must be at least 1"));
    }
    let chunks: Vec<(usize, usize)> = (0..count.div_ceil(CHUNK)).map(|k| (k, CHUNK.min(count - k * CHUNK))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| malformed(format!("cannot start workers: {e}")))?;
    let parts: Vec<_> = pool.install(|| {
        chunks
            .par_iter()
            .map(|&(k, n)| sample_points(s, n, cfg.depth, chunk_seed(cfg.seed, k)))
            .collect()
    });
    let mut out = Vec::with_capacity(count);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn cone_csv_row(p: &ConePoint) -> Vec<String> {
    let height = match p {
        ConePoint::Base(_) => "inf".to_string(),
        _ => p.height().to_string(),
    };
    let mut row = vec![height, p.layer().as_str().to_string()];
    for e in p.rep().entries() {
        // Adding zero folds -0 into 0.
        row.push((e.re + 0.0).to_string());
        row.push((e.im + 0.0).to_string());
    }
    row
}

fn execute(cmd: Command, cfg: &Config) -> Result<Output, Failure> {
    let ok = |v: Value| Ok(Output::Json(v, EXIT_OK));
    match cmd {
        Command::Val(ValCmd::Point { matrix }) => ok(val_point(&read_matrix(&matrix)?)?.to_json()),
        Command::Val(ValCmd::Line { p1, p2 }) => {
            let line = LineK::new(read_matrix(&p1)?, read_matrix(&p2)?)?;
            let profile = quadric_intersections(&line, cfg.depth)?;
            let mut v = val_image(&line, cfg.depth)?.to_json();
            v["profile"] = json!(profile.kind.as_str());
            ok(v)
        }
        Command::Surface(SurfaceCmd::Strata { family }) => {
            let s = read_family(&family)?;
            ok(strata_describe(&s).to_json(&s))
        }
        Command::Surface(SurfaceCmd::Check { family, matrix }) => {
            let s = read_family(&family)?;
            let a = read_matrix(&matrix)?;
            let p = val_point(&a)?;
            let verdict = stratum_membership(&s, &p, &cfg.tol);
            ok(json!({"val": p.to_json(), "verdict": verdict.to_json()}))
        }
        Command::Surface(SurfaceCmd::Sample { family, count }) => {
            let s = read_family(&family)?;
            let pts = samples(&s, count, cfg)?;
            let rows = pts
                .iter()
                .map(|sp| {
                    let p = val_point(&sp.point)?;
                    Ok(json!({
                        "point": sp.point.to_json(),
                        "val": p.to_json(),
                        "verdict": stratum_membership(&s, &p, &cfg.tol).to_json(),
                        "residual_order": sp.residual_order.map(|r| r.to_string()),
                    }))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            ok(json!({"seed": cfg.seed, "depth": cfg.depth, "samples": rows}))
        }
        Command::Lines(LinesCmd::Certify { family, degree }) => {
            let s = read_family(&family)?;
            if let Some(d) = degree {
                if d != s.degree() {
                    return Err(malformed(format!("family has degree {}, not {d}", s.degree())));
                }
            }
            match certify_no_lines(&s) {
                Ok(cert) => {
                    let check = cross_check(&s, &cert, &cfg.tol)?;
                    let certified = cert.is_valid() && check.ok();
                    let mut v = cert.to_json();
                    v["certified"] = json!(certified);
                    v["cross_check"] = json!({
                        "candidates": check.candidates,
                        "passed": check.passed,
                        "failures": check.failures,
                    });
                    Ok(Output::Json(v, if certified { EXIT_OK } else { EXIT_REFUSED }))
                }
                Err(Error::GenericityFailure(flags)) => {
                    let report = genericity_report(&s);
                    let v = json!({
                        "certified": false,
                        "refused": true,
                        "failed_flags": flags.split(',').collect::<Vec<_>>(),
                        "genericity_report": report.to_json(),
                    });
                    Ok(Output::Json(v, EXIT_REFUSED))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Verify(VerifyCmd::Scaling { matrix }) => {
            let a = read_matrix(&matrix)?;
            let target = val_point(&a)?;
            let params = ConeDistanceParams::default();
            let mut rows = Vec::with_capacity(cfg.t_grid.len());
            let mut dists = Vec::with_capacity(cfg.t_grid.len());
            for &t in &cfg.t_grid {
                let p = numeric_limit(&a, t, cfg.tol.tip)?;
                let d = cone_distance(&p, &target, &params);
                dists.push(d);
                rows.push(json!({"t": t, "log_t": t.ln(), "numeric": p.to_json(), "distance": d}));
            }
            let nonincreasing = dists.windows(2).all(|w| w[1] <= w[0] + SCALING_SLACK);
            ok(json!({"val": target.to_json(), "grid": rows, "nonincreasing": nonincreasing}))
        }
        Command::Export(ExportCmd::Cloud { family, count }) => {
            let s = read_family(&family)?;
            let pts = samples(&s, count, cfg)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| malformed(format!("csv: {e}"));
            w.write_record(["height", "layer", "re11", "im11", "re12", "im12", "re21", "im21", "re22", "im22"]).map_err(io)?;
            for sp in &pts {
                w.write_record(cone_csv_row(&val_point(&sp.point)?)).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| malformed(format!("csv: {e}")))?;
            Ok(Output::Csv(String::from_utf8(bytes).expect("csv output is utf-8")))
        }
    }
}

fn error_json(f: &Failure) -> String {
    json!({"error": f.kind, "message": f.message, "exit_code": f.code}).to_string()
}

/// Runs the command line `args` (program name first), writing the main
/// output to `out` (or the `--out` file) and errors as JSON to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let f = malformed(e.to_string().trim().to_string());
            let _ = writeln!(err, "{}", error_json(&f));
            return f.code;
        }
    };
    let result = config(&cli.global).and_then(|cfg| execute(cli.command, &cfg));
    let (text, code) = match result {
        Ok(Output::Json(v, code)) => (format!("{v}\n"), code),
        Ok(Output::Csv(s)) => (s, EXIT_OK),
        Err(f) => {
            let _ = writeln!(err, "{}", error_json(&f));
            return f.code;
        }
    };
    let written = match &cli.global.out {
        Some(path) => fs::write(path, &text).map_err(|e| malformed(format!("cannot write {}: {e}", path.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| malformed(format!("cannot write output: {e}"))),
    };
    match written {
        Ok(()) => code,
        Err(f) => {
            let _ = writeln!(err, "{}", error_json(&f));
            f.code
        }
    }
}
