//! Theoretical bounds on `vol / area` for expanding families of convex
//! domains, and a driver that measures the quotient along such families.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, GeometryError, Result};
use crate::hypersurfaces::cos_phi_branch_point;
use crate::measure::{
    ball_area, ball_volume, min_cos_phi, modified_tube, modified_tube_radial_fn, radial_measures,
    tube_ball_radial_fn, tube_boundary_area, tube_volume_fermi, RadialDomain, TubeSpec,
};
use crate::model::SpaceParams;
use crate::quadrature::QuadratureRule;

/// Trailing-window length for tail estimates.
pub const DEFAULT_WINDOW: usize = 5;

/// Proxy for an infinite limit.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

/// Beyond this `k l` the radial cos(phi) audit of modified tubes is skipped:
/// ambient hyperbolic functions of `k l` would overflow.
const AUDIT_MAX_KL: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSource {
    Theorem2,
    CorollaryChn,
    Hadamard,
    #[serde(rename = "theoremB")]
    TheoremB,
}

impl fmt::Display for BoundSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Theorem2 => "theorem2",
            Self::CorollaryChn => "corollary_chn",
            Self::Hadamard => "hadamard",
            Self::TheoremB => "theoremB",
        })
    }
}

impl std::str::FromStr for BoundSource {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem2" => Ok(Self::Theorem2),
            "corollary_chn" | "corollary-chn" => Ok(Self::CorollaryChn),
            "hadamard" => Ok(Self::Hadamard),
            "theoremB" | "theoremb" | "theorem-b" => Ok(Self::TheoremB),
            other => domain(format!("unknown bound source {other:?}")),
        }
    }
}

/// Extra parameters for the pinched Hadamard bound and the rank-one
/// symmetric space bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct BoundExtras {
    /// Curvature pinching `-k2^2 <= K <= -k1^2`; defaults to `k1 = k`, `k2 = 2k`.
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    /// Real dimension for the Hadamard bound; defaults to `2n`.
    pub dim: Option<usize>,
    /// Real dimension of the division algebra (2, 4 or 8).
    pub d: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSet {
    pub lower: f64,
    pub upper: f64,
    pub source: BoundSource,
    pub lambda: f64,
    pub n: usize,
    pub k: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
}

fn feasible(lambda: f64, max: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return domain(format!("lambda must be nonnegative and finite, got {lambda}"));
    }
    if lambda > max {
        return Err(GeometryError::Infeasible { lambda, max });
    }
    Ok(())
}

/// `[lambda / (a k_lo^2), 1 / (b k_hi)]`.
fn pair(lambda: f64, a: f64, k_lo: f64, b: f64, k_hi: f64) -> (f64, f64) {
    (lambda / (a * k_lo * k_lo), 1.0 / (b * k_hi))
}

/// Bounds on the liminf and limsup of `vol / area` for families of
/// `lambda`-convex domains expanding over the whole space.
///
/// * `theorem2`: `[lambda/(4nk^2), 1/(2nk)]` in `CH^n(-4k^2)`.
/// * `corollary_chn`: `[lambda/(4(2n-1)k^2), 1/((2n-1)k)]`, the pinched
///   Hadamard bound specialised to `CH^n`.
/// * `hadamard`: `[lambda/((m-1)k2^2), 1/((m-1)k1)]` in real dimension `m`.
/// * `theoremB`: `[lambda/(2dnk^2), 1/((dn+d-2)k)]` for the rank-one symmetric
///   space over the algebra of real dimension `d`.
pub fn bounds(source: BoundSource, lambda: f64, params: &SpaceParams, extras: BoundExtras) -> Result<BoundSet> {
    let n = params.n();
    let k = params.k();
    let mut set = BoundSet {
        lower: 0.0,
        upper: 0.0,
        source,
        lambda,
        n,
        k,
        k1: None,
        k2: None,
        d: None,
    };
    let nf = n as f64;
    let (lower, upper) = match source {
        BoundSource::Theorem2 => {
            feasible(lambda, k)?;
            pair(lambda, 4.0 * nf, k, 2.0 * nf, k)
        }
        BoundSource::CorollaryChn => {
            feasible(lambda, 2.0 * k)?;
            let m = 2.0 * nf - 1.0;
            pair(lambda, 4.0 * m, k, m, k)
        }
        BoundSource::Hadamard => {
            let k1 = extras.k1.unwrap_or(k);
            let k2 = extras.k2.unwrap_or(2.0 * k);
            if !(k1 > 0.0 && k2 >= k1) {
                return domain(format!("pinching needs 0 < k1 <= k2, got k1 = {k1}, k2 = {k2}"));
            }
            let m = extras.dim.unwrap_or(2 * n);
            if m < 2 {
                return domain(format!("dimension must be at least 2, got {m}"));
            }
            feasible(lambda, k2)?;
            set.k1 = Some(k1);
            set.k2 = Some(k2);
            let m = (m - 1) as f64;
            // lambda / ((m-1) k2^2) and 1 / ((m-1) k1).
            (lambda / (m * k2 * k2), 1.0 / (m * k1))
        }
        BoundSource::TheoremB => {
            let d = extras.d.unwrap_or(2);
            if ![2, 4, 8].contains(&d) {
                return domain(format!("d must be 2, 4 or 8, got {d}"));
            }
            feasible(lambda, k)?;
            set.d = Some(d);
            let du = d as usize;
            pair(lambda, (2 * du * n) as f64, k, (du * n + du - 2) as f64, k)
        }
    };
    set.lower = lower;
    set.upper = upper;
    Ok(set)
}

/// Expanding families of convex domains indexed by a parameter `t`.
#[derive(Clone)]
pub enum Family {
    /// Geodesic balls of radius `t`.
    Balls,
    /// Tubes of radius `t` about segments of length `t^alpha`, with caps.
    ModifiedTubes { alpha: f64 },
    /// Tubes of radius `t` about a geodesic, cut by the ball of radius
    /// `ratio * t` about a point of the axis.
    TubeCapBall { ratio: f64 },
    /// A user schedule `t -> domain`, with its convexity level.
    Custom {
        id: String,
        schedule: Arc<dyn Fn(f64) -> Result<RadialDomain> + Send + Sync>,
        lambda: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        rule: Arc<QuadratureRule>,
    },
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl Family {
    pub fn id(&self) -> String {
        match self {
            Self::Balls => "balls".into(),
            Self::ModifiedTubes { alpha } => format!("modified-tubes(alpha={alpha})"),
            Self::TubeCapBall { ratio } => format!("tube-cap-ball(R={ratio}r)"),
            Self::Custom { id, .. } => id.clone(),
        }
    }

    /// Convexity level of the member at `t`, before clamping to `k`.
    pub fn lambda(&self, t: f64, params: &SpaceParams) -> f64 {
        let k = params.k();
        match self {
            Self::Balls => k / (k * t).tanh(),
            Self::ModifiedTubes { .. } => k * (k * t).tanh(),
            Self::TubeCapBall { ratio } => (k * (k * t).tanh()).min(k / (k * ratio * t).tanh()),
            Self::Custom { lambda, .. } => lambda(t),
        }
    }
}

/// Quadrature settings for families measured through radial functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyOptions {
    pub window: usize,
    pub panels: usize,
    /// Grading depth toward the axis; `None` picks one from the domain size.
    pub depth: Option<usize>,
    pub nodes: usize,
    /// Also measure the smallest `cos(phi)` over a radial rule for modified tubes.
    pub audit_cos_phi: bool,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            panels: 4,
            depth: None,
            nodes: 6,
            audit_cos_phi: false,
        }
    }
}

impl FamilyOptions {
    fn rule(&self, params: &SpaceParams, extent: f64) -> Result<QuadratureRule> {
        let depth = self
            .depth
            .unwrap_or_else(|| ((params.k() * extent / std::f64::consts::LN_2).ceil() as usize + 8).max(12));
        let mut axis = vec![0.0; params.real_dim()];
        axis[0] = 1.0;
        QuadratureRule::bizonal_even(params.n(), &axis, self.panels, depth, self.nodes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientSample {
    pub t: f64,
    pub volume: f64,
    pub area: f64,
    pub quotient: f64,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_cos_phi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientSeries {
    pub family_id: String,
    pub samples: Vec<QuotientSample>,
    pub window: usize,
    pub tail_liminf_est: f64,
    pub tail_limsup_est: f64,
}

impl QuotientSeries {
    pub fn new(family_id: String, samples: Vec<QuotientSample>, window: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(GeometryError::Degenerate("empty quotient series".into()));
        }
        if window == 0 {
            return Err(GeometryError::Degenerate("tail window must be positive".into()));
        }
        let tail = &samples[samples.len().saturating_sub(window)..];
        let tail_liminf_est = tail.iter().map(|s| s.quotient).fold(f64::INFINITY, f64::min);
        let tail_limsup_est = tail.iter().map(|s| s.quotient).fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            family_id,
            samples,
            window,
            tail_liminf_est,
            tail_limsup_est,
        })
    }

    /// Convexity level of the family over the tail, clamped to `k`.
    pub fn tail_lambda(&self, params: &SpaceParams) -> f64 {
        let tail = &self.samples[self.samples.len().saturating_sub(self.window)..];
        tail.iter()
            .map(|s| s.lambda)
            .fold(f64::INFINITY, f64::min)
            .min(params.k())
    }
}

fn measure_member(
    family: &Family,
    t: f64,
    params: &SpaceParams,
    options: &FamilyOptions,
) -> Result<QuotientSample> {
    let k = params.k();
    let lambda = family.lambda(t, params);
    let sample = |volume: f64, area: f64, quotient: f64, min_cos_phi| QuotientSample {
        t,
        volume,
        area,
        quotient,
        lambda,
        min_cos_phi,
    };
    match family {
        Family::Balls => {
            let (v, a) = (ball_volume(t, params)?, ball_area(t, params)?);
            Ok(sample(v, a, v / a, None))
        }
        Family::ModifiedTubes { alpha } => {
            let len = t.powf(*alpha);
            let spec = TubeSpec::standard(params, t, Some(len))?;
            let (v, a) = modified_tube(&spec, params)?;
            let audit = if options.audit_cos_phi && k * (t + 0.5 * len) <= AUDIT_MAX_KL {
                let d = modified_tube_radial_fn(&spec, params)?;
                Some(min_cos_phi(&d, &options.rule(params, t)?)?)
            } else {
                None
            };
            Ok(sample(v, a, v / a, audit))
        }
        Family::TubeCapBall { ratio } => {
            let spec = TubeSpec::standard(params, t, None)?;
            let big_r = ratio * t;
            let d = tube_ball_radial_fn(&spec, big_r, params)?;
            let m = radial_measures(&d, &options.rule(params, big_r)?)?;
            Ok(sample(m.volume.value, m.area.value, m.quotient, Some(m.min_cos_phi)))
        }
        Family::Custom { schedule, rule, .. } => {
            let m = radial_measures(&schedule(t)?, rule)?;
            Ok(sample(m.volume.value, m.area.value, m.quotient, Some(m.min_cos_phi)))
        }
    }
}

/// Measures each member of `family` on `t_grid` (concurrently) and estimates
/// the tail liminf and limsup of `vol / area` over the last `window` samples.
pub fn run_family(
    family: &Family,
    t_grid: &[f64],
    params: &SpaceParams,
    options: &FamilyOptions,
) -> Result<QuotientSeries> {
    if t_grid.is_empty() {
        return Err(GeometryError::Degenerate("empty parameter grid".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || !(t_grid[0] > 0.0) {
        return domain("parameter grid must be positive and strictly increasing");
    }
    match family {
        Family::ModifiedTubes { alpha } if !alpha.is_finite() => {
            return domain(format!("coupling exponent must be finite, got {alpha}"));
        }
        Family::TubeCapBall { ratio } if !(*ratio > 1.0) => {
            return domain(format!("ball-to-tube radius ratio must exceed 1, got {ratio}"));
        }
        Family::Custom { rule, .. } if rule.n() != params.n() => {
            return Err(GeometryError::Dimension {
                expected: params.n(),
                got: rule.n(),
            });
        }
        _ => {}
    }
    let samples = t_grid
        .par_iter()
        .enumerate()
        .map(|(index, &t)| {
            measure_member(family, t, params, options).map_err(|e| GeometryError::Sample {
                index,
                t,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    QuotientSeries::new(family.id(), samples, options.window)
}

/// A sample outside the bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstSample {
    pub index: usize,
    pub t: f64,
    pub quotient: f64,
    /// Distance outside the bounds (positive when violated).
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub liminf_est: f64,
    pub limsup_est: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
    pub sharpness_gap: f64,
    /// Largest excess of any sample over `upper`, which bounds every member.
    pub worst_sample: Option<WorstSample>,
}

/// Checks the tail estimates against `bset` with tolerance `tol`, and every
/// sample against the upper bound.
pub fn check_bounds(series: &QuotientSeries, bset: &BoundSet, tol: f64) -> Result<BoundReport> {
    if series.samples.is_empty() {
        return Err(GeometryError::Degenerate("empty quotient series".into()));
    }
    let worst = series
        .samples
        .iter()
        .enumerate()
        .map(|(index, s)| WorstSample {
            index,
            t: s.t,
            quotient: s.quotient,
            excess: s.quotient - bset.upper,
        })
        .max_by(|a, b| a.excess.total_cmp(&b.excess))
        .expect("nonempty");
    let tail_ok = bset.lower - tol <= series.tail_liminf_est && series.tail_limsup_est <= bset.upper + tol;
    let samples_ok = worst.excess <= tol;
    let pass = tail_ok && samples_ok;
    let worst_sample = if pass {
        None
    } else if !samples_ok {
        Some(worst)
    } else {
        let tail_start = series.samples.len().saturating_sub(series.window);
        let (index, s) = series
            .samples
            .iter()
            .enumerate()
            .skip(tail_start)
            .min_by(|a, b| a.1.quotient.total_cmp(&b.1.quotient))
            .expect("nonempty tail");
        Some(WorstSample {
            index,
            t: s.t,
            quotient: s.quotient,
            excess: bset.lower - s.quotient,
        })
    };
    Ok(BoundReport {
        liminf_est: series.tail_liminf_est,
        limsup_est: series.tail_limsup_est,
        lower: bset.lower,
        upper: bset.upper,
        pass,
        sharpness_gap: bset.upper - series.tail_limsup_est,
        worst_sample,
    })
}

/// How the segment length of the tube grows with its radius in
/// [`four_limits`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthSchedule {
    Fixed(f64),
    /// `L(r) = exp(k r) / k`.
    Exponential,
}

impl LengthSchedule {
    pub fn length(&self, r: f64, params: &SpaceParams) -> f64 {
        match *self {
            Self::Fixed(l) => l,
            Self::Exponential => (params.k() * r).exp() / params.k(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourLimitRow {
    pub r: f64,
    pub length: f64,
    /// `area(tube) / vol(tube)`.
    pub tube_area_over_tube_volume: f64,
    /// `area(ball) / vol(tube)`.
    pub ball_area_over_tube_volume: f64,
    /// `area(tube) / vol(ball)`.
    pub tube_area_over_ball_volume: f64,
    /// `area(ball) / vol(ball)`.
    pub ball_area_over_ball_volume: f64,
}

impl FourLimitRow {
    pub fn ratios(&self) -> [f64; 4] {
        [
            self.tube_area_over_tube_volume,
            self.ball_area_over_tube_volume,
            self.tube_area_over_ball_volume,
            self.ball_area_over_ball_volume,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourLimits {
    pub rows: Vec<FourLimitRow>,
    pub threshold: f64,
    /// Whether the third ratio exceeds `threshold` at the terminal radius.
    pub third_diverges: bool,
}

impl FourLimits {
    pub fn terminal(&self) -> &FourLimitRow {
        self.rows.last().expect("nonempty grid")
    }
}

/// The four ratios between the tube (without caps) of radius `r` about a
/// segment and the ball of radius `r`, along `r_grid`.
pub fn four_limits(params: &SpaceParams, r_grid: &[f64], schedule: LengthSchedule) -> Result<FourLimits> {
    if r_grid.is_empty() || r_grid.windows(2).any(|w| !(w[1] > w[0])) || !(r_grid[0] > 0.0) {
        return domain("radius grid must be nonempty, positive and strictly increasing");
    }
    let rows = r_grid
        .par_iter()
        .map(|&r| {
            let length = schedule.length(r, params);
            if !(length > 0.0) || !length.is_finite() {
                return domain(format!("segment length must be positive and finite, got {length}"));
            }
            let spec = TubeSpec::standard(params, r, Some(length))?;
            let tv = tube_volume_fermi(&spec, params)?;
            let ta = tube_boundary_area(&spec, params)?.value;
            let bv = ball_volume(r, params)?;
            let ba = ball_area(r, params)?;
            Ok(FourLimitRow {
                r,
                length,
                tube_area_over_tube_volume: ta / tv,
                ball_area_over_tube_volume: ba / tv,
                tube_area_over_ball_volume: ta / bv,
                ball_area_over_ball_volume: ba / bv,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let third = rows.last().expect("nonempty").tube_area_over_ball_volume;
    Ok(FourLimits {
        rows,
        threshold: DIVERGENCE_THRESHOLD,
        third_diverges: third > DIVERGENCE_THRESHOLD,
    })
}

/// Outcome of comparing measured boundary angles with `lambda / (2k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CosPhiAudit {
    pub t: f64,
    pub lambda: f64,
    /// `lambda / (2k)`.
    pub bound: f64,
    pub inradius: f64,
    pub branch_point: f64,
    /// The bound is only asserted once the inradius exceeds the branch point.
    pub applies: bool,
    pub min_cos_phi: f64,
    pub pass: bool,
}

/// Compares the smallest measured `cos(phi)` of each audited member of a
/// series with `lambda / (2k)`.
pub fn audit_cos_phi(series: &QuotientSeries, params: &SpaceParams, tol: f64) -> Vec<CosPhiAudit> {
    let k2 = 2.0 * params.k();
    series
        .samples
        .iter()
        .filter_map(|s| {
            let min_cos_phi = s.min_cos_phi?;
            let lambda = s.lambda.min(params.k());
            let bound = lambda / k2;
            let branch_point = cos_phi_branch_point(lambda, k2);
            let applies = s.t > branch_point;
            Some(CosPhiAudit {
                t: s.t,
                lambda,
                bound,
                inradius: s.t,
                branch_point,
                applies,
                min_cos_phi,
                pass: !applies || min_cos_phi >= bound - tol,
            })
        })
        .collect()
}
