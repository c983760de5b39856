use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use besicovitch::classify::{classify_multi_dim, classify_projected_sieve, classify_system, Branch, ClassifyOptions};
use besicovitch::fourier::{decay_scan, limsup_probe, mu_hat, Frequency};
use besicovitch::geometry::{direction_range, raster_b, sample_directions};
use besicovitch::measure::{box_dim_series, cover_at_depth, progression_scan};
use besicovitch::selftest;
use besicovitch::{DigitLattice, DigitSystem, Error, Fraction, LevelSummary, Limits, Param, RationalParam};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "besicovitch",
    version,
    about = "Exact enumeration and measurement of Cantor sumsets E + uE'"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether E_u contains an interval, with enumeration witnesses.
    Classify(ClassifyArgs),
    /// Enumerate V_n and list its multiple points.
    Vn(VnArgs),
    /// Find the first level with a multiple point.
    Collide(CollideArgs),
    /// Interval covers, union measure and box-dimension estimates.
    Cover(CoverArgs),
    /// Evaluate the Fourier transform of the canonical measure.
    Fourier(FourierArgs),
    /// Rasterize the planar set, or report its direction range.
    Raster(RasterArgs),
    /// Classify every reduced p/q in a box and cross-check against enumeration.
    Sweep(SweepArgs),
    /// Run the built-in worked examples.
    Selftest(CommonArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pgm,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Digit system: base4, square:R or mixed:R,S.
    #[arg(long, default_value = "base4")]
    system: String,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to the number of CPUs). Output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Largest level whose points are materialized.
    #[arg(long, default_value_t = Limits::default().max_level)]
    max_level: u32,
    /// Largest level for streaming distinct counts.
    #[arg(long, default_value_t = Limits::default().max_stream_level)]
    max_stream_level: u32,
    /// Largest number of materialized lattice points.
    #[arg(long, default_value_t = Limits::default().max_points)]
    max_points: u64,
    /// Largest resolution * alphabet^depth for rasterization.
    #[arg(long, default_value_t = Limits::default().max_raster_work)]
    max_raster_work: u64,
}

impl CommonArgs {
    fn limits(&self) -> Limits {
        Limits {
            max_level: self.max_level,
            max_stream_level: self.max_stream_level,
            max_points: self.max_points,
            max_raster_work: self.max_raster_work,
        }
    }

    fn system(&self) -> Result<DigitSystem, Error> {
        DigitSystem::parse(&self.system)
    }
}

#[derive(Args, Clone)]
struct UArg {
    /// Parameter u as p/q, or a decimal together with --irrational.
    #[arg(long)]
    u: String,
    /// Treat --u as an irrational number given by its decimal expansion.
    #[arg(long)]
    irrational: bool,
}

impl UArg {
    fn param(&self) -> Result<Param, Error> {
        Param::parse(&self.u, self.irrational)
    }

    fn rational(&self) -> Result<Fraction, Failure> {
        match self.param()? {
            Param::Rational(f) => Ok(f),
            Param::Irrational(_) => Err(Failure::Usage("this mode needs a rational --u".into())),
        }
    }
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    u: UArg,
    /// Search levels for a multiple point in the thin branch (0 skips the search).
    #[arg(long, default_value_t = 8)]
    witness_levels: u32,
    /// Classify the product set (E_u)^d (base-4 model only).
    #[arg(long)]
    dim: Option<u32>,
    /// Classify the projected sieve with digits {0, 1, u} in base 3 instead.
    #[arg(long)]
    sieve: bool,
}

#[derive(Args)]
struct RationalU {
    /// Parameter u as p/q.
    #[arg(long)]
    u: String,
}

impl RationalU {
    fn fraction(&self) -> Result<Fraction, Error> {
        Fraction::parse(&self.u)
    }
}

#[derive(Args)]
struct VnArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    u: RationalU,
    #[arg(long)]
    n: u32,
    /// How many colliding pairs to list.
    #[arg(long, default_value_t = 16)]
    max_collisions: usize,
    /// Only count distinct points, without materializing V_n.
    #[arg(long)]
    streaming: bool,
}

#[derive(Args)]
struct CollideArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    u: RationalU,
    #[arg(long, default_value_t = 8)]
    nmax: u32,
}

#[derive(Args)]
struct CoverArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    u: UArg,
    #[arg(long, default_value_t = 8)]
    nmax: u32,
    /// Include the merged intervals of the deepest level (JSON only).
    #[arg(long)]
    intervals: bool,
    /// Look for an arithmetic-progression structure in V instead.
    #[arg(long)]
    progression: bool,
}

#[derive(Args)]
struct FourierArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    u: UArg,
    /// Evaluate at these frequencies (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    t: Vec<f64>,
    /// Evaluate at t = X pi for these exact rationals X (comma separated).
    #[arg(long, value_delimiter = ',')]
    t_pi: Vec<String>,
    /// Probe |mu_hat(2 q b^n pi)| for n in nmin..=nmax.
    #[arg(long)]
    probe: bool,
    #[arg(long, default_value_t = 2)]
    nmin: u32,
    #[arg(long, default_value_t = 6)]
    nmax: u32,
    /// Scan band maxima over [b^k, b^(k+1)], k = 2..bands+1.
    #[arg(long)]
    bands: Option<u32>,
    #[arg(long, default_value_t = 4096)]
    samples: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
}

#[derive(Args)]
struct RasterArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Image side lengths in pixels (comma separated; PGM output takes one).
    #[arg(long, value_delimiter = ',', default_value = "512")]
    resolution: Vec<u32>,
    /// Cover depth; defaults to the smallest d with base^d >= resolution.
    #[arg(long)]
    depth: Option<u32>,
    /// Report the exact direction range and a Monte Carlo check instead.
    #[arg(long)]
    directions: bool,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 20)]
    pmax: u64,
    #[arg(long, default_value_t = 20)]
    qmax: u64,
    #[arg(long, default_value_t = 6)]
    nmax: u32,
}

enum Failure {
    Usage(String),
    Core(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(io::Error::other(e))
    }
}

type Outcome = Result<(), Failure>;

fn emit(common: &CommonArgs, bytes: &[u8]) -> Outcome {
    match &common.out {
        Some(path) => fs::write(path, bytes)?,
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn emit_json(common: &CommonArgs, value: &impl serde::Serialize) -> Outcome {
    let mut s = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    s.push('\n');
    emit(common, s.as_bytes())
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Failure::Io(io::Error::other(e.to_string())))
}

fn only(common: &CommonArgs, allowed: &[Format]) -> Outcome {
    if allowed.contains(&common.format) {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "--format {} is not supported by this subcommand",
            common.format.to_possible_value().expect("named").get_name()
        )))
    }
}

fn classify(a: &ClassifyArgs) -> Outcome {
    only(&a.common, &[Format::Json])?;
    if a.sieve {
        let f = a.u.rational()?;
        let (p, q) = f
            .to_u64_pair()
            .ok_or_else(|| Failure::Usage("--u must fit in 64-bit integers for --sieve".into()))?;
        let class = classify_projected_sieve(p, q)?;
        return emit_json(&a.common, &json!({ "u": f, "class": class }));
    }
    let u = a.u.param()?;
    let opts = ClassifyOptions {
        witness_levels: (a.witness_levels > 0).then_some(a.witness_levels),
        limits: a.common.limits(),
    };
    let c = match a.dim {
        Some(d) => {
            if a.common.system()? != DigitSystem::base4() {
                return Err(Failure::Usage("--dim is only defined for the base4 system".into()));
            }
            classify_multi_dim(d, &u, &opts)?
        }
        None => classify_system(&a.common.system()?, &u, &opts)?,
    };
    emit_json(&a.common, &c)
}

fn vn(a: &VnArgs) -> Outcome {
    only(&a.common, &[Format::Json])?;
    let u = a.u.fraction()?;
    let lattice = DigitLattice::new(&a.common.system()?, &u)?;
    if a.streaming {
        let nu = lattice.count_distinct_streaming(a.n, &a.common.limits())?;
        return emit_json(
            &a.common,
            &json!({ "u": u, "base": lattice.base(), "level": a.n, "nu": nu }),
        );
    }
    let summary = LevelSummary::compute(&lattice, &u, a.n, a.max_collisions, &a.common.limits())?;
    emit_json(&a.common, &summary)
}

fn collide(a: &CollideArgs) -> Outcome {
    only(&a.common, &[Format::Json])?;
    let u = a.u.fraction()?;
    let report = DigitLattice::new(&a.common.system()?, &u)?.first_collision(a.nmax, &a.common.limits())?;
    emit_json(&a.common, &report)
}

fn cover(a: &CoverArgs) -> Outcome {
    let system = a.common.system()?;
    let limits = a.common.limits();
    let u = a.u.param()?;
    if a.progression {
        only(&a.common, &[Format::Json])?;
        let f = a.u.rational()?;
        let prog = progression_scan(&system, &f, a.nmax, &limits)?;
        return emit_json(&a.common, &json!({ "u": f, "nMax": a.nmax, "progression": prog }));
    }
    only(&a.common, &[Format::Json, Format::Csv])?;
    let mut series = box_dim_series(&system, &u, a.nmax, &limits)?;
    match a.common.format {
        Format::Csv => {
            let rows = series.iter().map(|c| {
                vec![
                    c.level.to_string(),
                    c.distinct_count.to_string(),
                    c.union_measure.to_string(),
                    format!("{:e}", c.union_measure.to_f64()),
                    c.box_dim_estimate.to_string(),
                ]
            });
            let bytes = csv_bytes(&["n", "nu_n", "union_measure", "union_measure_float", "boxdim"], rows)?;
            emit(&a.common, &bytes)
        }
        _ => {
            if a.intervals {
                if let Some(last) = series.last_mut() {
                    *last = cover_at_depth(&system, &u, last.level, true, &limits)?;
                }
            }
            emit_json(&a.common, &json!({ "u": u, "base": system.base(), "series": series }))
        }
    }
}

fn fourier(a: &FourierArgs) -> Outcome {
    only(&a.common, &[Format::Json, Format::Csv])?;
    let system = a.common.system()?;
    let u = a.u.param()?;
    let csv_out = a.common.format == Format::Csv;
    if a.probe {
        let f = a.u.rational()?;
        let probe = limsup_probe(&system, &f, a.nmin..=a.nmax, a.tolerance)?;
        if csv_out {
            let rows = probe.values.iter().map(|v| {
                vec![
                    v.n.to_string(),
                    v.t.to_string(),
                    v.abs_value.to_string(),
                    v.tail_bound.to_string(),
                ]
            });
            return emit(&a.common, &csv_bytes(&["n", "t", "abs_value", "tail_bound"], rows)?);
        }
        return emit_json(&a.common, &probe);
    }
    if let Some(bands) = a.bands {
        let scan = decay_scan(&system, &u, bands, a.samples, a.tolerance, a.seed)?;
        if csv_out {
            let rows = scan.iter().map(|b| {
                vec![
                    b.k.to_string(),
                    b.lo.to_string(),
                    b.hi.to_string(),
                    b.sup_abs.to_string(),
                    b.argmax.to_string(),
                ]
            });
            return emit(&a.common, &csv_bytes(&["k", "lo", "hi", "sup_abs", "argmax"], rows)?);
        }
        return emit_json(&a.common, &scan);
    }
    let mut freqs: Vec<Frequency> = a.t.iter().map(|&t| Frequency::Real(t)).collect();
    for x in &a.t_pi {
        let (neg, body) = match x.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, x.as_str()),
        };
        let f = if body == "0" {
            None
        } else {
            Some(Fraction::parse(body)?)
        };
        let r = f.map(|f| f.to_big_rational()).unwrap_or_default();
        freqs.push(Frequency::PiMultiple(if neg { -r } else { r }));
    }
    if freqs.is_empty() {
        return Err(Failure::Usage("give --t, --t-pi, --probe or --bands".into()));
    }
    let evals = freqs
        .iter()
        .map(|t| mu_hat(&system, &u, t, a.tolerance))
        .collect::<Result<Vec<_>, _>>()?;
    if csv_out {
        let rows = evals.iter().map(|e| {
            vec![
                e.t.to_string(),
                e.truncation.to_string(),
                e.abs_value.to_string(),
                e.tail_bound.to_string(),
            ]
        });
        return emit(&a.common, &csv_bytes(&["t", "J", "abs_value", "tail_bound"], rows)?);
    }
    emit_json(&a.common, &evals)
}

fn raster(a: &RasterArgs) -> Outcome {
    let system = a.common.system()?;
    let limits = a.common.limits();
    if a.directions {
        only(&a.common, &[Format::Json])?;
        let range = direction_range(&system);
        let sample = sample_directions(&system, a.samples, a.seed)?;
        return emit_json(&a.common, &json!({ "range": range, "sample": sample }));
    }
    if a.common.format == Format::Pgm {
        let [res] = a.resolution[..] else {
            return Err(Failure::Usage("PGM output takes exactly one --resolution".into()));
        };
        let img = raster_b(&system, res, a.depth, &limits)?;
        return emit(&a.common, &besicovitch::pgm::encode(&img));
    }
    let images = a
        .resolution
        .iter()
        .map(|&r| raster_b(&system, r, a.depth, &limits))
        .collect::<Result<Vec<_>, _>>()?;
    if a.common.format == Format::Csv {
        let rows = images.iter().map(|i| {
            vec![
                i.width.to_string(),
                i.depth.to_string(),
                i.occupied_fraction.to_string(),
            ]
        });
        return emit(
            &a.common,
            &csv_bytes(&["resolution", "depth", "occupied_fraction"], rows)?,
        );
    }
    emit_json(&a.common, &images)
}

fn sweep(a: &SweepArgs) -> Outcome {
    only(&a.common, &[Format::Csv, Format::Json])?;
    let system = a.common.system()?;
    let limits = a.common.limits();
    let opts = ClassifyOptions::branch_only();
    let pairs: Vec<(u64, u64)> = (1..=a.pmax)
        .flat_map(|p| (1..=a.qmax).map(move |q| (p, q)))
        .filter(|&(p, q)| gcd(p, q) == 1)
        .collect();
    let rows = pairs
        .iter()
        .map(|&(p, q)| {
            let f = Fraction::from_u64(p, q)?;
            let rp = RationalParam::new(&f, system.base())?;
            let branch = classify_system(&system, &Param::Rational(f.clone()), &opts)?.branch;
            let report = DigitLattice::new(&system, &f)?.first_collision(a.nmax, &limits)?;
            let coherent = match branch {
                Branch::IntervalCase => !report.found,
                _ => report.found,
            };
            Ok((p, q, rp.p_star(), rp.q_star(), branch, report, coherent))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let violations = rows.iter().filter(|r| !r.6).count();
    eprintln!("sweep: {} parameters, {} coherence violations", rows.len(), violations);
    let opt = |x: Option<u64>| x.map(|v| v.to_string()).unwrap_or_default();
    if a.common.format == Format::Json {
        let out: Vec<_> = rows
            .iter()
            .map(|(p, q, ps, qs, b, r, c)| {
                json!({ "p": p, "q": q, "pStar": ps, "qStar": qs, "branch": b,
                        "n0": r.first_level, "nu": r.nu, "coherent": c })
            })
            .collect();
        return emit_json(&a.common, &out);
    }
    let records = rows.iter().map(|(p, q, ps, qs, b, r, c)| {
        vec![
            p.to_string(),
            q.to_string(),
            ps.to_string(),
            qs.to_string(),
            b.to_string(),
            opt(r.first_level.map(u64::from)),
            opt(r.nu),
            c.to_string(),
        ]
    });
    let bytes = csv_bytes(
        &["p", "q", "p_star", "q_star", "branch", "n0", "nu", "coherent"],
        records,
    )?;
    emit(&a.common, &bytes)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn run_selftest(common: &CommonArgs) -> Outcome {
    only(common, &[Format::Json, Format::Csv])?;
    let checks = selftest::run_all(&common.limits());
    let failed = checks.iter().filter(|c| !c.passed).count();
    if common.format == Format::Json {
        emit_json(common, &checks)?;
    } else {
        let rows = checks.iter().map(|c| {
            vec![
                c.name.to_string(),
                if c.passed { "pass" } else { "fail" }.to_string(),
                c.detail.clone(),
            ]
        });
        emit(common, &csv_bytes(&["check", "result", "detail"], rows)?)?;
    }
    eprintln!("selftest: {} checks, {} failed", checks.len(), failed);
    if failed > 0 {
        return Err(Failure::Usage(format!("{failed} selftest checks failed")));
    }
    Ok(())
}

fn common(cmd: &Command) -> &CommonArgs {
    match cmd {
        Command::Classify(a) => &a.common,
        Command::Vn(a) => &a.common,
        Command::Collide(a) => &a.common,
        Command::Cover(a) => &a.common,
        Command::Fourier(a) => &a.common,
        Command::Raster(a) => &a.common,
        Command::Sweep(a) => &a.common,
        Command::Selftest(a) => a,
    }
}

fn dispatch(cmd: &Command) -> Outcome {
    match cmd {
        Command::Classify(a) => classify(a),
        Command::Vn(a) => vn(a),
        Command::Collide(a) => collide(a),
        Command::Cover(a) => cover(a),
        Command::Fourier(a) => fourier(a),
        Command::Raster(a) => raster(a),
        Command::Sweep(a) => sweep(a),
        Command::Selftest(a) => run_selftest(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    let threads = common(&cli.command).threads;
    let result = match threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command)),
            Err(e) => Err(Failure::Io(io::Error::other(e))),
        },
        None => dispatch(&cli.command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_resource_limit() { 2 } else { 1 })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
