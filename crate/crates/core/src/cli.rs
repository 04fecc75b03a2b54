//! Command-line front end.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::asymptotics::{
    bounds, check_bounds, four_limits, run_family, BoundExtras, BoundReport, BoundSource, Family,
    FamilyOptions, LengthSchedule,
};
use crate::error::GeometryError;
use crate::hypersurfaces::{spectrum, tube_spectrum_at, CurvatureSpectrum, HypersurfaceKind};
use crate::measure::{
    ball_area, ball_normalization, ball_volume, modified_tube, radial_measures, tube_ball_radial_fn,
    tube_boundary_area, tube_volume_fermi, tube_volume_gray, TubeSpec,
};
use crate::model::SpaceParams;
use crate::quadrature::QuadratureRule;

/// Environment variable with the default number of worker threads.
pub const WORKERS_ENV: &str = "CHN_WORKERS";

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_ACCURACY: u8 = 3;
pub const EXIT_VIOLATION: u8 = 4;
pub const EXIT_INFEASIBLE: u8 = 5;

#[derive(Debug, Parser, Serialize)]
#[command(name = "chn", version, about = "Volumes, areas and curvature bounds in complex hyperbolic space")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalOpts {
    /// Complex dimension.
    #[arg(long, global = true, default_value_t = 2)]
    pub n: usize,
    /// Curvature scale: holomorphic curvature is -4k^2.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub k: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Seed for randomized quadrature rules.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    /// Worker threads (defaults to $CHN_WORKERS, then the number of CPUs).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Principal curvatures of a model hypersurface.
    Curvature(CurvatureArgs),
    /// Volume, boundary area and their quotient for one domain.
    Measure(MeasureArgs),
    /// Quotient vol/area along an expanding family, checked against bounds.
    Sweep(SweepArgs),
    /// Ratios between tube and ball volumes and areas along a radius grid.
    Limits(LimitsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureKind {
    Sphere,
    Horosphere,
    EquidistantChp,
    EquidistantRhn,
    Tube,
}

#[derive(Debug, Args, Serialize)]
pub struct CurvatureArgs {
    #[arg(long, value_enum)]
    pub kind: CurvatureKind,
    #[arg(long)]
    pub r: Option<f64>,
    /// Complex dimension of the totally geodesic core (equidistant-chp).
    #[arg(long)]
    pub p: Option<usize>,
    /// `J`-angle `g(gamma', J N)` at the boundary point (tube).
    #[arg(long)]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Ball,
    Tube,
    ModifiedTube,
    TubeCapBall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleChoice {
    Bizonal,
    Product,
    Mc,
    Qmc,
}

#[derive(Debug, Args, Serialize)]
pub struct MeasureArgs {
    #[arg(long, value_enum)]
    pub shape: Shape,
    #[arg(long)]
    pub r: f64,
    /// Segment length (tube, modified-tube).
    #[arg(long = "L")]
    pub length: Option<f64>,
    /// Ball radius (tube-cap-ball).
    #[arg(long = "R")]
    pub big_r: Option<f64>,
    /// Sphere rule for radial integration (tube-cap-ball).
    #[arg(long, value_enum, default_value_t = RuleChoice::Bizonal)]
    pub rule: RuleChoice,
    /// Nodes per cell (bizonal, product) or samples (mc, qmc).
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Fail with exit code 3 when a relative error estimate exceeds this.
    #[arg(long)]
    pub rtol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyChoice {
    Balls,
    ModifiedTubes,
    TubeCapBall,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub family: FamilyChoice,
    /// Parameter grid: `start:stop:step` (inclusive) or a comma list.
    #[arg(long = "t")]
    pub grid: String,
    #[arg(long, value_enum, default_value_t = BoundsChoice::Theorem2)]
    pub bounds: BoundsChoice,
    /// Convexity level for the bounds (defaults to the family's tail value).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Segment length `t^alpha` (modified-tubes).
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Ball radius over tube radius (tube-cap-ball).
    #[arg(long, default_value_t = 2.0)]
    pub ratio: f64,
    #[arg(long, default_value_t = crate::asymptotics::DEFAULT_WINDOW)]
    pub window: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Division algebra dimension (theoremB).
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub k1: Option<f64>,
    #[arg(long)]
    pub k2: Option<f64>,
    /// Also write the verdict to this file.
    #[arg(long)]
    #[serde(skip)]
    pub verdict: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum BoundsChoice {
    #[value(name = "theorem2")]
    #[serde(rename = "theorem2")]
    Theorem2,
    #[value(name = "corollary_chn", alias = "corollary-chn")]
    #[serde(rename = "corollary_chn")]
    CorollaryChn,
    #[value(name = "hadamard")]
    #[serde(rename = "hadamard")]
    Hadamard,
    #[value(name = "theoremB", alias = "theoremb")]
    #[serde(rename = "theoremB")]
    TheoremB,
}

impl From<BoundsChoice> for BoundSource {
    fn from(b: BoundsChoice) -> Self {
        match b {
            BoundsChoice::Theorem2 => Self::Theorem2,
            BoundsChoice::CorollaryChn => Self::CorollaryChn,
            BoundsChoice::Hadamard => Self::Hadamard,
            BoundsChoice::TheoremB => Self::TheoremB,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct LimitsArgs {
    /// Radius grid: `start:stop:step` (inclusive) or a comma list.
    #[arg(long = "r")]
    pub grid: String,
    /// Fixed segment length; the default grows as `exp(kr)/k`.
    #[arg(long = "L")]
    pub length: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Io(_) => EXIT_FAILURE,
            Self::Geometry(e) => geometry_exit_code(e),
        }
    }
}

fn geometry_exit_code(e: &GeometryError) -> u8 {
    match e {
        GeometryError::Sample { source, .. } => geometry_exit_code(source),
        GeometryError::Infeasible { .. } => EXIT_INFEASIBLE,
        GeometryError::Accuracy { .. } | GeometryError::IllConditioned { .. } | GeometryError::NotANumber { .. } => {
            EXIT_ACCURACY
        }
        _ => EXIT_USAGE,
    }
}

/// Rendered output of a command and its exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub exit: u8,
    /// Extra files to write next to the main output.
    pub extra: Vec<(PathBuf, String)>,
}

/// C-style `%.12e`: mantissa with 12 decimals, signed exponent of at least
/// two digits.
pub fn fmt_e12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn opt_e12(x: Option<f64>) -> String {
    x.map(fmt_e12).unwrap_or_default()
}

/// Parses `start:stop:step` (inclusive) or `a,b,c`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("invalid grid {s:?}"));
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
    let grid = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let (a, b, h) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(h > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
            return Err(bad());
        }
        let count = ((b - a) / h + 1e-9).floor() as usize + 1;
        (0..count).map(|i| a + h * i as f64).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(bad());
    }
    Ok(grid)
}

#[derive(Serialize)]
struct Metadata<'a> {
    artifact: &'static str,
    version: &'static str,
    n: usize,
    k: f64,
    seed: u64,
    /// `ball_volume / (pi^n/n! formula)`; differs from 1 when the displayed
    /// ball formulas disagree with the polar-coordinate ones.
    ball_normalization_factor: f64,
    ball_normalization_discrepancy: bool,
    config: &'a Cli,
    #[serde(skip_serializing_if = "Vec::is_empty", serialize_with = "pairs_as_map")]
    flags: Vec<(String, String)>,
}

fn pairs_as_map<S: serde::Serializer>(pairs: &[(String, String)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(pairs.iter().map(|(k, v)| (k, v)))
}

fn metadata<'a>(cli: &'a Cli, params: &SpaceParams, flags: Vec<(String, String)>) -> Result<Metadata<'a>, CliError> {
    let norm = ball_normalization(1.0, params)?;
    Ok(Metadata {
        artifact: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        n: params.n(),
        k: params.k(),
        seed: cli.global.seed,
        ball_normalization_factor: norm.volume_factor,
        ball_normalization_discrepancy: norm.discrepancy,
        config: cli,
        flags,
    })
}

fn json_string<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable output")
}

fn csv_header(meta: &Metadata<'_>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {} {}", meta.artifact, meta.version);
    let _ = writeln!(s, "# params: n={} k={}", meta.n, fmt_e12(meta.k));
    let _ = writeln!(s, "# seed: {}", meta.seed);
    let _ = writeln!(
        s,
        "# ball_normalization: factor={} discrepancy={}",
        fmt_e12(meta.ball_normalization_factor),
        meta.ball_normalization_discrepancy
    );
    for (key, value) in &meta.flags {
        let _ = writeln!(s, "# {key}: {value}");
    }
    let _ = writeln!(s, "# config: {}", json_string(meta.config));
    s
}

fn render(meta: &Metadata<'_>, format: Format, columns: &[&str], rows: &[Vec<String>], json_rows: serde_json::Value, trailer: Option<serde_json::Value>) -> String {
    match format {
        Format::Csv => {
            let mut s = csv_header(meta);
            s.push_str(&columns.join(","));
            s.push('\n');
            for row in rows {
                s.push_str(&row.join(","));
                s.push('\n');
            }
            if let Some(t) = trailer {
                let _ = writeln!(s, "# verdict: {}", json_string(&t));
            }
            s
        }
        Format::Json => {
            let mut doc = serde_json::Map::new();
            doc.insert("metadata".into(), serde_json::to_value(meta).expect("metadata"));
            doc.insert("rows".into(), json_rows);
            if let Some(t) = trailer {
                doc.insert("verdict".into(), t);
            }
            let mut s = serde_json::to_string_pretty(&doc).expect("json output");
            s.push('\n');
            s
        }
    }
}

fn params_of(cli: &Cli) -> Result<SpaceParams, CliError> {
    SpaceParams::new(cli.global.n, cli.global.k).map_err(|e| CliError::Usage(e.to_string()))
}

fn require(x: Option<f64>, flag: &str, what: &str) -> Result<f64, CliError> {
    x.ok_or_else(|| CliError::Usage(format!("--{flag} is required for {what}")))
}

fn cmd_curvature(cli: &Cli, a: &CurvatureArgs) -> Result<Outcome, CliError> {
    let params = params_of(cli)?;
    let what = format!("{:?}", a.kind).to_lowercase();
    let spec: CurvatureSpectrum = match a.kind {
        CurvatureKind::Sphere => spectrum(HypersurfaceKind::Sphere { r: require(a.r, "r", &what)? }, &params)?,
        CurvatureKind::Horosphere => spectrum(HypersurfaceKind::Horosphere, &params)?,
        CurvatureKind::EquidistantChp => {
            let p = a
                .p
                .ok_or_else(|| CliError::Usage("--p is required for equidistant-chp".into()))?;
            spectrum(HypersurfaceKind::EquidistantToCHp { r: require(a.r, "r", &what)?, p }, &params)?
        }
        CurvatureKind::EquidistantRhn => {
            spectrum(HypersurfaceKind::EquidistantToRHn { r: require(a.r, "r", &what)? }, &params)?
        }
        CurvatureKind::Tube => {
            let r = require(a.r, "r", &what)?;
            match a.c {
                Some(c) => tube_spectrum_at(&params, r, c)?,
                None => spectrum(HypersurfaceKind::TubeAboutGeodesic { r }, &params)?,
            }
        }
    };
    let lambda = spec.lambda();
    let rows: Vec<Vec<String>> = spec
        .entries
        .iter()
        .map(|e| {
            vec![
                fmt_e12(e.value),
                e.multiplicity.to_string(),
                e.direction_class.to_string(),
                fmt_e12(lambda),
            ]
        })
        .collect();
    let json_rows = serde_json::json!({ "entries": spec.entries, "lambda": lambda });
    let meta = metadata(cli, &params, vec![])?;
    Ok(Outcome {
        text: render(&meta, cli.global.format, &["value", "multiplicity", "direction_class", "lambda"], &rows, json_rows, None),
        exit: EXIT_PASS,
        extra: vec![],
    })
}

#[derive(Serialize)]
struct MeasureRecord {
    shape: Shape,
    n: usize,
    k: f64,
    r: f64,
    #[serde(rename = "L")]
    length: Option<f64>,
    #[serde(rename = "R")]
    big_r: Option<f64>,
    volume: f64,
    area: f64,
    quotient: f64,
    volume_error: f64,
    area_error: f64,
}

fn sphere_rule(cli: &Cli, a: &MeasureArgs, params: &SpaceParams, extent: f64) -> Result<QuadratureRule, CliError> {
    let n = params.n();
    let mut axis = vec![0.0; params.real_dim()];
    axis[0] = 1.0;
    Ok(match a.rule {
        RuleChoice::Bizonal => {
            let depth = (params.k() * extent / std::f64::consts::LN_2).ceil() as usize + 8;
            QuadratureRule::bizonal_even(n, &axis, 4, depth.max(12), a.nodes.unwrap_or(6))?
        }
        RuleChoice::Product => QuadratureRule::product(n, a.nodes.unwrap_or(16))?,
        RuleChoice::Mc => QuadratureRule::monte_carlo(n, a.nodes.unwrap_or(1 << 16), cli.global.seed)?,
        RuleChoice::Qmc => QuadratureRule::qmc(n, a.nodes.unwrap_or(crate::quadrature::DEFAULT_QMC_SAMPLES), cli.global.seed)?,
    })
}

fn cmd_measure(cli: &Cli, a: &MeasureArgs) -> Result<Outcome, CliError> {
    let params = params_of(cli)?;
    let r = a.r;
    let mut flags = vec![];
    let mut record = MeasureRecord {
        shape: a.shape,
        n: params.n(),
        k: params.k(),
        r,
        length: a.length,
        big_r: a.big_r,
        volume: 0.0,
        area: 0.0,
        quotient: 0.0,
        volume_error: 0.0,
        area_error: 0.0,
    };
    match a.shape {
        Shape::Ball => {
            record.volume = ball_volume(r, &params)?;
            record.area = ball_area(r, &params)?;
        }
        Shape::Tube | Shape::ModifiedTube => {
            let len = require(a.length, "L", "tube shapes")?;
            let spec = TubeSpec::standard(&params, r, Some(len))?;
            if len > 0.0 {
                let gray = tube_volume_gray(&spec, &params)? / tube_volume_fermi(&spec, &params)?;
                flags.push(("gray_fermi_ratio".into(), fmt_e12(gray)));
            }
            if a.shape == Shape::Tube {
                record.volume = tube_volume_fermi(&spec, &params)?;
                let area = tube_boundary_area(&spec, &params)?;
                record.area = area.value;
                record.area_error = area.error;
            } else {
                let (v, ar) = modified_tube(&spec, &params)?;
                record.volume = v;
                record.area = ar;
            }
        }
        Shape::TubeCapBall => {
            let big_r = require(a.big_r, "R", "tube-cap-ball")?;
            let spec = TubeSpec::standard(&params, r, None)?;
            let d = tube_ball_radial_fn(&spec, big_r, &params)?;
            let m = radial_measures(&d, &sphere_rule(cli, a, &params, big_r)?)?;
            record.volume = m.volume.value;
            record.area = m.area.value;
            record.volume_error = m.volume.error;
            record.area_error = m.area.error;
            record.quotient = m.quotient;
            flags.push(("min_cos_phi".into(), fmt_e12(m.min_cos_phi)));
        }
    }
    if a.shape != Shape::TubeCapBall {
        record.quotient = record.volume / record.area;
    }
    if let Some(rtol) = a.rtol {
        for (what, err, value) in [
            ("volume", record.volume_error, record.volume),
            ("area", record.area_error, record.area),
        ] {
            let achieved = err / value.abs();
            if !(achieved <= rtol) {
                return Err(GeometryError::Accuracy {
                    what: format!("{what} quadrature"),
                    achieved,
                    required: rtol,
                }
                .into());
            }
        }
    }
    let shape = serde_json::to_value(record.shape).expect("shape");
    let row = vec![
        shape.as_str().unwrap_or_default().to_string(),
        record.n.to_string(),
        fmt_e12(record.k),
        fmt_e12(record.r),
        opt_e12(record.length),
        opt_e12(record.big_r),
        fmt_e12(record.volume),
        fmt_e12(record.area),
        fmt_e12(record.quotient),
        fmt_e12(record.volume_error),
        fmt_e12(record.area_error),
    ];
    let json_rows = serde_json::to_value(vec![&record]).expect("record");
    let meta = metadata(cli, &params, flags)?;
    let columns = [
        "shape", "n", "k", "r", "L", "R", "volume", "area", "quotient", "volume_error", "area_error",
    ];
    Ok(Outcome {
        text: render(&meta, cli.global.format, &columns, &[row], json_rows, None),
        exit: EXIT_PASS,
        extra: vec![],
    })
}

/// Verdict of a sweep, with keys in a fixed order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub liminf_est: f64,
    pub limsup_est: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
    pub sharpness_gap: f64,
}

impl From<&BoundReport> for Verdict {
    fn from(r: &BoundReport) -> Self {
        Self {
            liminf_est: r.liminf_est,
            limsup_est: r.limsup_est,
            lower: r.lower,
            upper: r.upper,
            pass: r.pass,
            sharpness_gap: r.sharpness_gap,
        }
    }
}

fn cmd_sweep(cli: &Cli, a: &SweepArgs) -> Result<Outcome, CliError> {
    let params = params_of(cli)?;
    let grid = parse_grid(&a.grid)?;
    let extras = BoundExtras {
        k1: a.k1,
        k2: a.k2,
        dim: None,
        d: a.d,
    };
    // An explicit lambda is validated before any measurement.
    if let Some(l) = a.lambda {
        bounds(a.bounds.into(), l, &params, extras)?;
    }
    let family = match a.family {
        FamilyChoice::Balls => Family::Balls,
        FamilyChoice::ModifiedTubes => Family::ModifiedTubes { alpha: a.alpha },
        FamilyChoice::TubeCapBall => Family::TubeCapBall { ratio: a.ratio },
    };
    let options = FamilyOptions {
        window: a.window,
        ..Default::default()
    };
    if a.window == 0 {
        return Err(CliError::Usage("--window must be positive".into()));
    }
    let series = run_family(&family, &grid, &params, &options)?;
    let lambda = a.lambda.unwrap_or_else(|| series.tail_lambda(&params));
    let bset = bounds(a.bounds.into(), lambda, &params, extras)?;
    let report = check_bounds(&series, &bset, a.tol)?;
    let verdict = Verdict::from(&report);
    let rows: Vec<Vec<String>> = series
        .samples
        .iter()
        .map(|s| vec![fmt_e12(s.t), fmt_e12(s.volume), fmt_e12(s.area), fmt_e12(s.quotient)])
        .collect();
    let flags = vec![
        ("family".into(), series.family_id.clone()),
        ("bounds".into(), json_string(&bset)),
        ("window".into(), series.window.to_string()),
    ];
    let meta = metadata(cli, &params, flags)?;
    let verdict_json = serde_json::to_value(&verdict).expect("verdict");
    let json_rows = serde_json::to_value(&series.samples).expect("samples");
    let text = render(&meta, cli.global.format, &["t", "volume", "area", "quotient"], &rows, json_rows, Some(verdict_json));
    let extra = match &a.verdict {
        Some(p) => vec![(p.clone(), format!("{}\n", serde_json::to_string_pretty(&verdict).expect("verdict")))],
        None => vec![],
    };
    Ok(Outcome {
        text,
        exit: if report.pass { EXIT_PASS } else { EXIT_VIOLATION },
        extra,
    })
}

fn cmd_limits(cli: &Cli, a: &LimitsArgs) -> Result<Outcome, CliError> {
    let params = params_of(cli)?;
    let grid = parse_grid(&a.grid)?;
    let schedule = match a.length {
        Some(l) => LengthSchedule::Fixed(l),
        None => LengthSchedule::Exponential,
    };
    let limits = four_limits(&params, &grid, schedule)?;
    let rows: Vec<Vec<String>> = limits
        .rows
        .iter()
        .map(|row| {
            let mut v = vec![fmt_e12(row.r), fmt_e12(row.length)];
            v.extend(row.ratios().iter().map(|x| fmt_e12(*x)));
            v
        })
        .collect();
    let flags = vec![
        ("threshold".into(), fmt_e12(limits.threshold)),
        ("third_diverges".into(), limits.third_diverges.to_string()),
    ];
    let meta = metadata(cli, &params, flags)?;
    let columns = [
        "r",
        "L",
        "tube_area_over_tube_volume",
        "ball_area_over_tube_volume",
        "tube_area_over_ball_volume",
        "ball_area_over_ball_volume",
    ];
    let json_rows = serde_json::to_value(&limits.rows).expect("limits");
    Ok(Outcome {
        text: render(&meta, cli.global.format, &columns, &rows, json_rows, None),
        exit: EXIT_PASS,
        extra: vec![],
    })
}

/// Runs a parsed command without touching the filesystem.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Curvature(a) => cmd_curvature(cli, a),
        Command::Measure(a) => cmd_measure(cli, a),
        Command::Sweep(a) => cmd_sweep(cli, a),
        Command::Limits(a) => cmd_limits(cli, a),
    }
}

fn worker_count(cli: &Cli) -> Result<Option<usize>, CliError> {
    if let Some(w) = cli.global.workers {
        return Ok(Some(w));
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn write_outputs(cli: &Cli, out: &Outcome) -> Result<(), CliError> {
    match &cli.global.output {
        Some(p) => std::fs::write(p, &out.text)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(out.text.as_bytes())?;
        }
    }
    for (p, text) in &out.extra {
        std::fs::write(p, text)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    if let Some(w) = worker_count(cli)? {
        if w == 0 {
            return Err(CliError::Usage("worker count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let out = execute(cli)?;
    write_outputs(cli, &out)?;
    Ok(out.exit)
}

/// Entry point of the `chn` binary.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("chn: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponent() {
        assert_eq!(fmt_e12(1.0), "1.000000000000e+00");
        assert_eq!(fmt_e12(-0.00123), "-1.230000000000e-03");
        assert_eq!(fmt_e12(6.02e123), "6.020000000000e+123");
        assert_eq!(fmt_e12(0.0), "0.000000000000e+00");
        assert_eq!(fmt_e12(f64::NAN), "nan");
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1:2:0.5").unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(parse_grid("1:15:0.5").unwrap().len(), 29);
        assert_eq!(parse_grid("3,5").unwrap(), vec![3.0, 5.0]);
        assert!(parse_grid("2,1").is_err());
        assert!(parse_grid("1:2:0").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn sphere_curvature_rows() {
        let cli = Cli::try_parse_from(["chn", "curvature", "--kind", "sphere", "--r", "1"]).unwrap();
        let out = execute(&cli).unwrap();
        let rows: Vec<&str> = out.text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0], "value,multiplicity,direction_class,lambda");
        assert!(rows[1].ends_with(&fmt_e12(1f64 / 1f64.tanh())));
        let missing = Cli::try_parse_from(["chn", "curvature", "--kind", "sphere"]).unwrap();
        assert_eq!(execute(&missing).unwrap_err().exit_code(), EXIT_USAGE);
    }
}
