//! The `overlap-ifs` command line.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use rayon::prelude::*;

use crate::address::{classify_point, ClassificationReport, FeasibilityMode, SearchOptions};
use crate::conditions::{
    certify_no_holes, no_holes_sufficient, osc_failure_sufficient, vertex_overlap_witness,
    wn_coverage_series,
};
use crate::deleted_digits::{attractor_interval, count_expansions, DigitSet};
use crate::error::{Error, Result};
use crate::geometry::Membership;
use crate::ifs::{IfsFile, IfsSystem};
use crate::measure::{box_dim_estimate, dyadic_scales, matched_depth, uniqueness_grid, MeasureSampler};
use crate::render::render_attractor;
use crate::scalar::parse_rational;
use crate::triangle::{golden_ratio, inv_sqrt2, lambda0};
use crate::conditions::pedicini_holds;

#[derive(Debug, Parser)]
#[command(name = "overlap-ifs", version, about = "Address analysis for overlapping self-similar attractors")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify the addresses of one point.
    AnalyzePoint(AnalyzePoint),
    /// Classify cell centres of a grid over Ω and write CSV.
    ClassifyGrid(ClassifyGrid),
    /// Report the sufficient conditions that hold for a system.
    CheckConditions(IfsArg),
    /// Print λ₀, the golden ratio and 1/√2.
    TriangleConstants,
    /// Expansions of a real number in a deleted-digit system.
    DeletedDigits(DeletedDigits),
    /// Estimate the measure of Ω outside W_n for n = 0..N.
    WnCoverage(WnCoverage),
    /// Draw points from a Bernoulli measure on the attractor.
    SampleMeasure(SampleMeasure),
    /// Box-counting dimension estimate.
    BoxDim(BoxDim),
    /// Chaos-game rendering to ASCII PGM.
    RenderAttractor(RenderAttractor),
}

#[derive(Debug, Args)]
struct IfsArg {
    #[arg(long)]
    ifs: PathBuf,
}

#[derive(Debug, Args)]
struct AnalyzePoint {
    #[arg(long)]
    ifs: PathBuf,
    /// Cartesian coordinates, or one weight per anchor point.
    #[arg(long, conflicts_with = "bary", required_unless_present = "bary")]
    point: Option<String>,
    /// Barycentric weights over the anchor points.
    #[arg(long)]
    bary: Option<String>,
    #[arg(long, default_value_t = 40)]
    depth: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Run on exact rationals.
    #[arg(long)]
    exact: bool,
}

#[derive(Debug, Args)]
struct ClassifyGrid {
    #[arg(long)]
    ifs: PathBuf,
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    #[arg(long, default_value_t = 30)]
    depth: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DeletedDigits {
    #[arg(long)]
    digits: String,
    #[arg(long)]
    lambda: String,
    #[arg(long)]
    point: String,
    #[arg(long, default_value_t = 60)]
    depth: usize,
}

#[derive(Debug, Args)]
struct WnCoverage {
    #[arg(long)]
    ifs: PathBuf,
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SampleMeasure {
    #[arg(long)]
    ifs: PathBuf,
    /// Comma-separated probabilities; defaults to the file's, then uniform.
    #[arg(long)]
    probs: Option<String>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Address length used for the projection.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PointSet {
    Attractor,
    Uniqueness,
}

#[derive(Debug, Args)]
struct BoxDim {
    #[arg(long)]
    ifs: PathBuf,
    #[arg(long, value_enum, default_value_t = PointSet::Attractor)]
    set: PointSet,
    /// Comma-separated decreasing scales (default 2^-3..2^-7).
    #[arg(long)]
    eps: Option<String>,
    /// Cylinder depth for the attractor, search depth for the uniqueness set.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RenderAttractor {
    #[arg(long)]
    ifs: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    iters: usize,
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    #[arg(long, default_value_t = 512)]
    resolution: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 2 on input errors and 3 when a node budget is exhausted.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut io::stdout().lock(), &mut io::stderr().lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            let _ = writeln!(err, "error: --threads must be at least 1");
            return 2;
        }
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let mut buf: Vec<u8> = Vec::new();
    let result = pool.install(|| dispatch(cli.command, &mut buf));
    if out.write_all(&buf).and_then(|_| out.flush()).is_err() {
        let _ = writeln!(err, "error: cannot write output");
        return 2;
    }
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::BudgetExceeded(_) => 3,
                _ => 2,
            }
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::AnalyzePoint(a) => analyze_point(a, out),
        Command::ClassifyGrid(a) => classify_grid(a, out),
        Command::CheckConditions(a) => check_conditions(a, out),
        Command::TriangleConstants => {
            let text = format!(
                "lambda0={:.12}\ng={:.12}\ninv_sqrt2={:.12}\n",
                lambda0(),
                golden_ratio(),
                inv_sqrt2()
            );
            emit(out, &text)
        }
        Command::DeletedDigits(a) => deleted_digits(a, out),
        Command::WnCoverage(a) => wn_coverage(a, out),
        Command::SampleMeasure(a) => sample_measure(a, out),
        Command::BoxDim(a) => box_dim(a, out),
        Command::RenderAttractor(a) => render(a, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::InvalidInput(format!("cannot write output: {e}")))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

fn read_ifs(path: &Path) -> Result<IfsFile> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    IfsFile::parse(&text)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<usize>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn split_list(text: &str) -> Vec<&str> {
    text.split(',').map(str::trim).collect()
}

fn parse_floats(text: &str, what: &str) -> Result<Vec<f64>> {
    split_list(text)
        .into_iter()
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidInput(format!("{what}: cannot parse {s:?}")))
        })
        .collect()
}

fn parse_rationals(text: &str) -> Result<Vec<BigRational>> {
    split_list(text).into_iter().map(parse_rational).collect()
}

fn coord_header(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("x{i}")).collect()
}

fn report_fields(r: &ClassificationReport) -> Vec<String> {
    vec![
        r.verdict.as_str().to_string(),
        r.explored_depth.to_string(),
        opt(r.first_bifurcation),
        opt(r.dead_end),
        opt(r.certificate.as_ref().map(|c| c.period())),
        r.prefix_counts.last().copied().unwrap_or(0).to_string(),
    ]
}

const REPORT_HEADER: &str = "verdict,explored_depth,first_bifurcation,dead_end,cycle_period,leaves";

/// Weights over the anchor points turned into a point of `Ω`.
fn from_weights<S: crate::scalar::Scalar>(points: &[Vec<S>], w: &[S]) -> Result<Vec<S>> {
    if w.len() != points.len() {
        return Err(Error::DimensionMismatch { expected: points.len(), got: w.len() });
    }
    if w.iter().any(|v| *v < S::zero()) {
        return Err(Error::PointOutsideOmega);
    }
    let sum = w.iter().fold(S::zero(), |a, b| a + b.clone());
    let dev = (sum - S::one()).abs();
    if dev > S::from_f64(1e-9).unwrap_or_else(S::zero) {
        return Err(Error::InvalidInput("weights must sum to 1".into()));
    }
    let d = points[0].len();
    Ok((0..d)
        .map(|c| {
            points
                .iter()
                .zip(w)
                .fold(S::zero(), |a, (p, wi)| a + p[c].clone() * wi.clone())
        })
        .collect())
}

fn resolve_point<S: crate::scalar::Scalar>(
    sys: &IfsSystem<S>,
    point: Option<&[S]>,
    bary: Option<&[S]>,
) -> Result<Vec<S>> {
    match (point, bary) {
        (Some(p), _) if p.len() == sys.d() => Ok(p.to_vec()),
        (Some(p), _) if p.len() == sys.m() => from_weights(sys.points(), p),
        (Some(p), _) => Err(Error::DimensionMismatch { expected: sys.d(), got: p.len() }),
        (None, Some(b)) => from_weights(sys.points(), b),
        (None, None) => Err(Error::InvalidInput("--point or --bary is required".into())),
    }
}

fn mode_for<S: crate::scalar::Scalar>(sys: &IfsSystem<S>) -> FeasibilityMode {
    match certify_no_holes(sys) {
        Some(c) => FeasibilityMode::ExactNoHoles(c),
        None => FeasibilityMode::RelaxedOmega,
    }
}

fn analyze_point(a: AnalyzePoint, out: &mut dyn Write) -> Result<()> {
    if a.tol.is_nan() || a.tol <= 0.0 {
        return Err(Error::InvalidInput("--tol must be positive".into()));
    }
    let file = read_ifs(&a.ifs)?;
    let opts = SearchOptions::default();
    let (coords, report) = if a.exact {
        let sys = file.to_exact()?;
        let p = a.point.as_deref().map(parse_rationals).transpose()?;
        let b = a.bary.as_deref().map(parse_rationals).transpose()?;
        let x = resolve_point(&sys, p.as_deref(), b.as_deref())?;
        let report = classify_point(&sys, &x, a.depth, &mode_for(&sys), &opts)?;
        (x.iter().map(crate::scalar::Scalar::to_f64_lossy).collect::<Vec<_>>(), report)
    } else {
        let sys = file.to_float()?.with_tolerance(a.tol);
        let opts = SearchOptions { certify_margin: a.tol, ..opts };
        let p = a.point.as_deref().map(|s| parse_floats(s, "--point")).transpose()?;
        let b = a.bary.as_deref().map(|s| parse_floats(s, "--bary")).transpose()?;
        let x = resolve_point(&sys, p.as_deref(), b.as_deref())?;
        let report = classify_point(&sys, &x, a.depth, &mode_for(&sys), &opts)?;
        (x, report)
    };
    let mut text = format!("{},{REPORT_HEADER}\n", coord_header(coords.len()).join(","));
    let mut row: Vec<String> = coords.iter().map(|v| num(*v)).collect();
    row.extend(report_fields(&report));
    text.push_str(&row.join(","));
    text.push('\n');
    emit(out, &text)
}

fn grid_points(sys: &IfsSystem<f64>, resolution: usize) -> Result<Vec<Vec<f64>>> {
    if resolution == 0 {
        return Err(Error::InvalidInput("--resolution must be positive".into()));
    }
    let d = sys.d();
    let total = resolution
        .checked_pow(d as u32)
        .ok_or_else(|| Error::InvalidInput("grid too large".into()))?;
    let (lo, hi) = sys.omega().bounding_box();
    Ok((0..total)
        .filter_map(|mut idx| {
            let mut p = vec![0.0; d];
            for (c, pc) in p.iter_mut().enumerate() {
                let k = idx % resolution;
                idx /= resolution;
                *pc = lo[c] + (hi[c] - lo[c]) * (k as f64 + 0.5) / resolution as f64;
            }
            sys.omega().contains_unchecked(&p, &Membership::Closed).then_some(p)
        })
        .collect())
}

fn classify_grid(a: ClassifyGrid, out: &mut dyn Write) -> Result<()> {
    let sys = read_ifs(&a.ifs)?.to_float()?;
    let mode = mode_for(&sys);
    let opts = SearchOptions::default();
    let points = grid_points(&sys, a.resolution)?;
    let reports = points
        .par_iter()
        .map(|x| classify_point(&sys, x, a.depth, &mode, &opts))
        .collect::<Result<Vec<_>>>()?;
    let mut text = format!("{},{REPORT_HEADER}\n", coord_header(sys.d()).join(","));
    for (x, r) in points.iter().zip(&reports) {
        let mut row: Vec<String> = x.iter().map(|v| num(*v)).collect();
        row.extend(report_fields(r));
        text.push_str(&row.join(","));
        text.push('\n');
    }
    match a.out {
        Some(path) => write_file(&path, &text),
        None => emit(out, &text),
    }
}

fn check_conditions(a: IfsArg, out: &mut dyn Write) -> Result<()> {
    let file = read_ifs(&a.ifs)?;
    let sys = file.to_exact()?;
    let osc = osc_failure_sufficient(&sys);
    let nh = no_holes_sufficient(&sys);
    let mut text = format!(
        "lambda={}\nm={}\nd={}\nosc_failure={} threshold={:.5}\nno_holes={} threshold={:.5}\n",
        file.lambda.0,
        sys.m(),
        sys.d(),
        osc.holds,
        osc.threshold,
        nh.holds,
        nh.threshold
    );
    match vertex_overlap_witness(&sys)? {
        Some(w) => text.push_str(&format!(
            "overlap_witness=found i={} k={} j={} ell={} block={} strictly_interior={}\n",
            w.i,
            w.k,
            w.j,
            w.ell,
            w.block(),
            w.strictly_interior
        )),
        None => text.push_str("overlap_witness=none\n"),
    }
    emit(out, &text)
}

fn deleted_digits(a: DeletedDigits, out: &mut dyn Write) -> Result<()> {
    let digits = DigitSet::parse(&a.digits)?;
    let lambda = parse_floats(&a.lambda, "--lambda")?;
    let [lambda] = lambda[..] else {
        return Err(Error::InvalidInput("--lambda takes one number".into()));
    };
    let x = parse_floats(&a.point, "--point")?;
    let [x] = x[..] else {
        return Err(Error::InvalidInput("--point takes one number".into()));
    };
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    let ped = pedicini_holds(&digits, lambda);
    let (lo, hi) = attractor_interval(&digits, lambda);
    let report = count_expansions(&digits, lambda, x, a.depth, &SearchOptions::default())?;
    let mut text = format!("x,interval_lo,interval_hi,pedicini,max_gap,bound,{REPORT_HEADER}\n");
    let mut row = vec![
        num(x),
        num(lo),
        num(hi),
        ped.holds.to_string(),
        num(ped.max_gap),
        num(ped.bound),
    ];
    row.extend(report_fields(&report));
    text.push_str(&row.join(","));
    text.push('\n');
    emit(out, &text)
}

fn wn_coverage(a: WnCoverage, out: &mut dyn Write) -> Result<()> {
    if a.samples == 0 {
        return Err(Error::InvalidInput("--samples must be at least 1".into()));
    }
    let sys = read_ifs(&a.ifs)?.to_float()?;
    let cert = certify_no_holes(&sys)
        .ok_or_else(|| Error::InvalidInput("W_n coverage needs lambda >= d/(d+1)".into()))?;
    let witness = vertex_overlap_witness(&sys)?
        .ok_or_else(|| Error::InvalidInput("no overlap witness for this system".into()))?;
    let fam = witness.family(sys.m());
    let series = wn_coverage_series(&sys, &fam, a.n, a.samples, a.seed, &cert)?;
    let mut text = String::from("n,fraction_outside,stderr,samples\n");
    for (n, e) in series.iter().enumerate() {
        text.push_str(&format!("{n},{},{},{}\n", num(e.fraction), num(e.stderr), e.samples));
    }
    emit(out, &text)
}

fn sample_measure(a: SampleMeasure, out: &mut dyn Write) -> Result<()> {
    if a.samples == 0 {
        return Err(Error::InvalidInput("--samples must be at least 1".into()));
    }
    let file = read_ifs(&a.ifs)?;
    let sys = file.to_float()?;
    let m = sys.m();
    let probs = match (&a.probs, &file.probs) {
        (Some(text), _) => parse_floats(text, "--probs")
            .map_err(|e| Error::BadProbabilityVector(e.to_string()))?,
        (None, Some(p)) => p.clone(),
        (None, None) => vec![1.0 / m as f64; m],
    };
    let d = sys.d();
    let sampler = MeasureSampler::new(sys, probs, a.seed, a.depth)?;
    let samples = sampler.sample(a.samples);
    let sep = if m <= 10 { "" } else { "." };
    let mut text = format!("{},address\n", coord_header(d).join(","));
    for s in &samples {
        let mut row: Vec<String> = s.point.iter().map(|v| num(*v)).collect();
        row.push(s.address.digits().iter().map(usize::to_string).collect::<Vec<_>>().join(sep));
        text.push_str(&row.join(","));
        text.push('\n');
    }
    emit(out, &text)
}

/// Images of the centroid under every word of length `depth`.
fn cylinder_points(sys: &IfsSystem<f64>, depth: usize) -> Result<Vec<Vec<f64>>> {
    let total = (sys.m() as u128).checked_pow(depth as u32).unwrap_or(u128::MAX);
    if total > 20_000_000 {
        return Err(Error::InvalidInput("--depth gives too many cylinders".into()));
    }
    let mut pts = vec![sys.centroid()];
    for _ in 0..depth {
        pts = pts
            .iter()
            .flat_map(|p| (0..sys.m()).map(move |j| sys.apply_map(j, p)))
            .collect::<Result<Vec<_>>>()?;
    }
    Ok(pts)
}

fn box_dim(a: BoxDim, out: &mut dyn Write) -> Result<()> {
    let sys = read_ifs(&a.ifs)?.to_float()?;
    let eps = match &a.eps {
        Some(text) => parse_floats(text, "--eps")?,
        None => dyadic_scales(3, 7),
    };
    let finest = eps.iter().copied().fold(f64::INFINITY, f64::min);
    if finest.is_nan() || finest <= 0.0 {
        return Err(Error::InvalidInput("--eps must be positive".into()));
    }
    let points = match a.set {
        PointSet::Attractor => {
            let depth = a.depth.unwrap_or_else(|| {
                // cylinders of diameter about the finest scale / 4
                let target = finest / (4.0 * sys.diameter());
                (target.ln() / sys.lambda().ln()).ceil().max(1.0) as usize
            });
            cylinder_points(&sys, depth)?
        }
        PointSet::Uniqueness => {
            let resolution = ((8.0 * sys.diameter() / finest).ceil() as usize).max(8);
            let depth = a.depth.unwrap_or_else(|| matched_depth(*sys.lambda(), finest));
            uniqueness_grid(&sys, resolution, depth, &mode_for(&sys))?
        }
    };
    let bd = box_dim_estimate(&points, &eps)?;
    let mut text = String::from("epsilon,count\n");
    for (e, n) in &bd.table {
        text.push_str(&format!("{},{n}\n", num(*e)));
    }
    let summary = format!("slope={}\nfit_residual={}\npoints={}\n", num(bd.slope), num(bd.fit_residual), points.len());
    match a.out {
        Some(path) => {
            write_file(&path, &text)?;
            emit(out, &summary)
        }
        None => emit(out, &format!("{text}{summary}")),
    }
}

fn render(a: RenderAttractor, out: &mut dyn Write) -> Result<()> {
    let sys = read_ifs(&a.ifs)?.to_float()?;
    let r = render_attractor(&sys, a.iters, a.burn_in, a.resolution, a.seed)?;
    write_file(&a.out, &r.image.to_pgm())?;
    emit(
        out,
        &format!(
            "width={}\nheight={}\noccupied={}\n",
            r.image.width,
            r.image.height,
            r.image.black_count()
        ),
    )
}

