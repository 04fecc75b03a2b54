use crate::error::{domain, GeometryError, Result};
use crate::jacobi::{Geodesic, JacobiField};
use crate::model::{SpaceParams, SpacePoint, TangentVector, COMPARE_TOL};
use crate::quadrature::{composite, gauss_jacobi, graded_breakpoints, Estimate};
use crate::special::{compensated_sum, sinh_cosh_pow, sphere_volume};

use super::radial::{Differential, RadialDomain};
use super::{ball_area, ball_volume};

/// Absolute tolerance on exit times along radial geodesics.
pub const BISECTION_TOL: f64 = 1e-12;

/// Largest relative gap allowed between the fixed-radius area integral and a
/// central difference of the volume.
pub const AREA_FD_TOL: f64 = 1e-6;

/// Largest `2nkr` for which tube volumes stay finite.
const MAX_GROWTH: f64 = 700.0;

/// Gauss-Legendre points per radial panel.
const RADIAL_NODES: usize = 16;
/// Gauss-Jacobi points in the `J`-angle.
const ANGLE_NODES: usize = 8;

/// Tube of radius `r` about the geodesic through `axis_base` with unit
/// direction `axis_dir`, restricted to the segment `|s| <= length/2` when a
/// length is given.
#[derive(Debug, Clone)]
pub struct TubeSpec {
    pub axis_base: SpacePoint,
    pub axis_dir: TangentVector,
    pub r: f64,
    pub length: Option<f64>,
}

impl TubeSpec {
    pub fn new(
        params: &SpaceParams,
        axis_base: SpacePoint,
        axis_dir: TangentVector,
        r: f64,
        length: Option<f64>,
    ) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return domain(format!("tube radius must be positive, got {r}"));
        }
        if let Some(l) = length {
            if !(l >= 0.0) || !l.is_finite() {
                return domain(format!("segment length must be nonnegative, got {l}"));
            }
        }
        if !axis_dir.base().same_representative(&axis_base) {
            return Err(GeometryError::BaseMismatch);
        }
        let norm = params.norm(&axis_dir);
        if (norm - 1.0).abs() > COMPARE_TOL {
            return domain(format!("axis direction must be unit, got norm {norm}"));
        }
        Ok(Self {
            axis_base,
            axis_dir,
            r,
            length,
        })
    }

    /// Tube about the geodesic through the origin along the first frame axis.
    pub fn standard(params: &SpaceParams, r: f64, length: Option<f64>) -> Result<Self> {
        let p = params.origin();
        let dir = params.frame(&p, None)?.axis(0);
        Self::new(params, p, dir, r, length)
    }

    fn require_length(&self) -> Result<f64> {
        self.length
            .ok_or_else(|| GeometryError::Domain("operation needs a finite segment length".into()))
    }

    pub fn with_radius(&self, r: f64) -> Self {
        Self { r, ..self.clone() }
    }
}

fn radial_panels(params: &SpaceParams, r: f64) -> usize {
    let rate = 2.0 * params.n() as f64 * params.k() * r;
    (rate.ceil() as usize).max(1)
}

/// Jacobi fields along the normal geodesic leaving the axis in direction
/// `v0`, at a point where the axis has `J`-angle `x = g(gamma', J v0)`: the
/// axial field `(gamma', 0)` and `(0, e)` for an orthonormal basis `e` of the
/// directions orthogonal to `v0` and `gamma'`.
fn fermi_fields(params: &SpaceParams, x: f64) -> Result<Vec<JacobiField>> {
    let p = params.origin();
    let v0 = params.frame(&p, None)?.axis(0);
    let g = Geodesic::new(*params, p, v0)?;
    let dim = params.real_dim() - 1;
    let s = (1.0 - x * x).max(0.0).sqrt();
    let zero = vec![0.0; dim];
    let mut axial = vec![0.0; dim];
    axial[0] = x;
    axial[1] = s;
    let mut fields = vec![JacobiField::from_coords(g.clone(), &axial, &zero)?];
    let mut e = vec![0.0; dim];
    e[0] = s;
    e[1] = -x;
    fields.push(JacobiField::from_coords(g.clone(), &zero, &e)?);
    for m in 2..dim {
        let mut e = vec![0.0; dim];
        e[m] = 1.0;
        fields.push(JacobiField::from_coords(g.clone(), &zero, &e)?);
    }
    Ok(fields)
}

fn fields_determinant(fields: &[JacobiField], t: f64) -> f64 {
    let m = fields.len();
    let mut mat = nalgebra::DMatrix::<f64>::zeros(m, m);
    for (j, f) in fields.iter().enumerate() {
        for (i, v) in f.propagate_split(t).value_coords().into_iter().enumerate() {
            mat[(i, j)] = v;
        }
    }
    mat.determinant().abs()
}

/// Volume density of Fermi coordinates about a geodesic: the determinant of
/// the propagated Jacobi frame at distance `t`, for `J`-angle `x`.
pub fn tube_fermi_density(params: &SpaceParams, t: f64, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return domain(format!("J-angle must lie in [-1, 1], got {x}"));
    }
    Ok(fields_determinant(&fermi_fields(params, x)?, t))
}

/// `(x nodes, weights)` for the zonal measure on the normal sphere `S^{2n-2}`.
fn angle_rule(params: &SpaceParams) -> Result<Vec<(f64, f64)>> {
    let n = params.n();
    let scale = sphere_volume(2 * n - 3);
    Ok(gauss_jacobi(ANGLE_NODES, n as f64 - 2.0)?
        .into_iter()
        .map(|(x, w)| (x, w * scale))
        .collect())
}

/// Integral of the Fermi density over the normal sphere, at each `t`.
fn sphere_integrals(params: &SpaceParams, ts: &[f64]) -> Result<Vec<f64>> {
    let angles = angle_rule(params)?;
    let per_angle: Vec<(Vec<JacobiField>, f64)> = angles
        .iter()
        .map(|&(x, w)| Ok((fermi_fields(params, x)?, w)))
        .collect::<Result<_>>()?;
    Ok(ts
        .iter()
        .map(|&t| compensated_sum(per_angle.iter().map(|(f, w)| w * fields_determinant(f, t))))
        .collect())
}

fn fermi_volume_per_length(params: &SpaceParams, r: f64) -> Result<f64> {
    let growth = 2.0 * params.n() as f64 * params.k() * r;
    if growth > MAX_GROWTH {
        return domain(format!("tube radius {r} overflows the Fermi density (2nkr = {growth})"));
    }
    let gl = gauss_quad::GaussLegendre::new(std::num::NonZeroUsize::new(RADIAL_NODES).unwrap());
    let nodes = composite(&graded_breakpoints(0.0, r, radial_panels(params, r), 0, &[]), &gl);
    let ts: Vec<f64> = nodes.iter().map(|p| p.0).collect();
    let inner = sphere_integrals(params, &ts)?;
    Ok(compensated_sum(nodes.iter().zip(&inner).map(|((_, w), v)| w * v)))
}

/// Volume of the tube about a segment of length `L`, excluding the caps:
/// `L` times the integral of the Fermi density over the normal ball.
pub fn tube_volume_fermi(spec: &TubeSpec, params: &SpaceParams) -> Result<f64> {
    let len = spec.require_length()?;
    Ok(len * fermi_volume_per_length(params, spec.r)?)
}

/// Area of the cylindrical part of the tube boundary: the Fermi density
/// integrated over the normal sphere at distance exactly `r`. The error field
/// holds the gap to a central difference of [`tube_volume_fermi`]; a gap above
/// [`AREA_FD_TOL`] (relative) is an accuracy error.
pub fn tube_boundary_area(spec: &TubeSpec, params: &SpaceParams) -> Result<Estimate> {
    let len = spec.require_length()?;
    let r = spec.r;
    let area = len * sphere_integrals(params, &[r])?[0];
    if len == 0.0 {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let h = 1e-4 * r.min(1.0 / params.k());
    let fd = len * (fermi_volume_per_length(params, r + h)? - fermi_volume_per_length(params, r - h)?)
        / (2.0 * h);
    let gap = (area - fd).abs();
    if gap > AREA_FD_TOL * area {
        return Err(GeometryError::Accuracy {
            what: "tube boundary area vs central difference of volume".into(),
            achieved: gap / area,
            required: AREA_FD_TOL,
        });
    }
    Ok(Estimate {
        value: area,
        error: gap,
    })
}

/// `sinh^{2n-2}(ks) (1 + (2n/(2n-1)) sinh^2(ks))`.
pub fn gray_integrand(s: f64, params: &SpaceParams) -> f64 {
    let m = 2.0 * params.n() as f64;
    let x = params.k() * s;
    sinh_cosh_pow(x, m as i32 - 2, 0) * (1.0 + m / (m - 1.0) * x.sinh().powi(2))
}

/// Tube volume from the closed-form density
/// `L vol(S^{2n-2}) / (4k^2)^{n-1} * integral_0^r gray_integrand`.
pub fn tube_volume_gray(spec: &TubeSpec, params: &SpaceParams) -> Result<f64> {
    let len = spec.require_length()?;
    let n = params.n() as i32;
    let k = params.k();
    let gl = gauss_quad::GaussLegendre::new(std::num::NonZeroUsize::new(RADIAL_NODES).unwrap());
    let nodes = composite(&graded_breakpoints(0.0, spec.r, radial_panels(params, spec.r), 0, &[]), &gl);
    let integral = compensated_sum(nodes.iter().map(|(s, w)| w * gray_integrand(*s, params)));
    Ok(len * sphere_volume(2 * n as usize - 2) / (4.0 * k * k).powi(n - 1) * integral)
}

/// Tube about a segment with both spherical caps: the caps together make one
/// ball of radius `r`.
pub fn modified_tube(spec: &TubeSpec, params: &SpaceParams) -> Result<(f64, f64)> {
    let len = spec.require_length()?;
    let bv = ball_volume(spec.r, params)?;
    let ba = ball_area(spec.r, params)?;
    if len == 0.0 {
        return Ok((bv, ba));
    }
    Ok((
        tube_volume_fermi(spec, params)? + bv,
        tube_boundary_area(spec, params)?.value + ba,
    ))
}

/// Closest point on an axis: distance and arc parameter of the foot.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AxisFoot {
    pub distance: f64,
    pub s: f64,
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Minimizes a convex function on `[lo, hi]` by golden section down to
/// `tol`, then polishes with safeguarded Newton steps.
fn minimize_convex(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> (f64, f64),
    a: f64,
    b: f64,
    tol: f64,
) -> f64 {
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut x = 0.5 * (lo + hi);
    let mut fx = f(x);
    for _ in 0..8 {
        let (d1, d2) = df(x);
        if !(d2 > 0.0) {
            break;
        }
        let y = (x - d1 / d2).clamp(a, b);
        let fy = f(y);
        if fy > fx || y == x {
            break;
        }
        x = y;
        fx = fy;
    }
    for end in [a, b] {
        if f(end) <= fx {
            x = end;
            fx = f(end);
        }
    }
    x
}

/// Distance from `x` to the geodesic `s -> exp(s v)` from `p`, restricted to
/// `s in [lo, hi]`. Minimizes `cosh^2(k d) = |cosh(ks)<x,p> + sinh(ks)<x,v/k>|^2`.
fn distance_to_axis_range(
    params: &SpaceParams,
    x: &SpacePoint,
    p: &SpacePoint,
    v: &TangentVector,
    range: Option<(f64, f64)>,
) -> Result<AxisFoot> {
    let k = params.k();
    params.distance(x, p)?;
    if !v.base().same_representative(p) {
        return Err(GeometryError::BaseMismatch);
    }
    let vhat = v.rep().scale_real(1.0 / k);
    let a = x.rep().hermitian(p.rep());
    let b = x.rep().hermitian(&vhat);
    let (aa, bb, ab) = (a.norm_sqr(), b.norm_sqr(), (a * b.conj()).re);
    let h = |s: f64| (a * (k * s).cosh() + b * (k * s).sinh()).norm_sqr();
    let dh = |s: f64| {
        let (sh, ch) = ((2.0 * k * s).sinh(), (2.0 * k * s).cosh());
        (k * ((aa + bb) * sh + 2.0 * ab * ch), 2.0 * k * k * ((aa + bb) * ch + 2.0 * ab * sh))
    };
    let (lo, hi) = match range {
        Some(r) => r,
        None => {
            // Expand a bracket around 0 until h rises on both sides.
            let mut step = 1.0 / k;
            let h0 = h(0.0);
            let (mut lo, mut hi) = (-step, step);
            if h(step) < h0 {
                while h(hi + step) < h(hi) {
                    step *= 2.0;
                    hi += step;
                }
                lo = 0.0;
                hi += step;
            } else if h(-step) < h0 {
                while h(lo - step) < h(lo) {
                    step *= 2.0;
                    lo -= step;
                }
                hi = 0.0;
                lo -= step;
            }
            (lo, hi)
        }
    };
    let s = if hi > lo {
        minimize_convex(h, dh, lo, hi, 1e-9 * (1.0 / k).max(hi - lo))
    } else {
        lo
    };
    let foot = params.exp_map(p, v, s)?;
    Ok(AxisFoot {
        distance: params.distance(x, &foot)?,
        s,
    })
}

pub fn distance_to_geodesic(
    params: &SpaceParams,
    x: &SpacePoint,
    axis_base: &SpacePoint,
    axis_dir: &TangentVector,
) -> Result<AxisFoot> {
    distance_to_axis_range(params, x, axis_base, axis_dir, None)
}

/// Distance to the segment `|s| <= length/2`.
pub fn distance_to_segment(
    params: &SpaceParams,
    x: &SpacePoint,
    axis_base: &SpacePoint,
    axis_dir: &TangentVector,
    length: f64,
) -> Result<AxisFoot> {
    if !(length >= 0.0) {
        return domain(format!("segment length must be nonnegative, got {length}"));
    }
    distance_to_axis_range(params, x, axis_base, axis_dir, Some((-0.5 * length, 0.5 * length)))
}

/// Distance to an axis along the ray `t -> exp_p(t u)` from a point `p` on the
/// axis, in terms of `a = |g(u, gamma')|`, `b = |g(u, J gamma')|` and
/// `q^2 = 1 - a^2 - b^2`, without forming ambient coordinates.
///
/// With `T = kt`, `S = ks`, `eps = 1 - a`:
/// `sinh^2(k d) = (X - 1)(X + 1) + b^2 sinh^2 T sinh^2 S` where
/// `X - 1 = 2 sinh^2((T - S)/2) + eps sinh T sinh S`.
#[derive(Debug, Clone, Copy)]
pub struct RayAxisGeometry {
    k: f64,
    b: f64,
    q2: f64,
    eps: f64,
    /// Half-length of the axis segment (infinite for a full geodesic).
    half_length: f64,
}

struct FootState {
    s: f64,
    g: f64,
    x: f64,
}

impl RayAxisGeometry {
    /// `u` in coordinates of a frame whose first two axes are `gamma'` and
    /// `J gamma'`.
    pub fn new(params: &SpaceParams, u: &[f64], half_length: Option<f64>) -> Result<Self> {
        if u.len() != params.real_dim() {
            return Err(GeometryError::Dimension {
                expected: params.real_dim(),
                got: u.len(),
            });
        }
        let norm2: f64 = u.iter().map(|x| x * x).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return domain(format!("direction must be a unit vector, got |u|^2 = {norm2}"));
        }
        let a = u[0].abs().min(1.0);
        let b = u[1].abs();
        let q2: f64 = u[2..].iter().map(|x| x * x).sum();
        Ok(Self {
            k: params.k(),
            b,
            q2,
            eps: (b * b + q2) / (1.0 + a),
            half_length: half_length.unwrap_or(f64::INFINITY),
        })
    }

    fn x_minus_one(&self, tt: f64, ss: f64) -> f64 {
        2.0 * (0.5 * (tt - ss)).sinh().powi(2) + self.eps * tt.sinh() * ss.sinh()
    }

    /// `sinh^2(k d(t, s))` in scaled variables.
    fn g(&self, tt: f64, ss: f64) -> f64 {
        let xm1 = self.x_minus_one(tt, ss);
        xm1 * (xm1 + 2.0) + (self.b * tt.sinh() * ss.sinh()).powi(2)
    }

    fn foot_state(&self, t: f64) -> FootState {
        let tt = self.k * t;
        let smax = tt.min(self.k * self.half_length);
        let ss = if smax <= 0.0 {
            0.0
        } else {
            let dg = |ss: f64| {
                let x = 1.0 + self.x_minus_one(tt, ss);
                let xs = -(tt - ss).sinh() + self.eps * tt.sinh() * ss.cosh();
                let bs = self.b * tt.sinh();
                (
                    2.0 * x * xs + bs * bs * (2.0 * ss).sinh(),
                    2.0 * xs * xs + 2.0 * x * x + 2.0 * bs * bs * (2.0 * ss).cosh(),
                )
            };
            minimize_convex(|ss| self.g(tt, ss), dg, 0.0, smax, 1e-3 * smax.max(1e-3))
        };
        FootState {
            s: ss / self.k,
            g: self.g(tt, ss),
            x: 1.0 + self.x_minus_one(tt, ss),
        }
    }

    /// Distance to the axis from `exp_p(t u)` and the foot parameter.
    pub fn foot(&self, t: f64) -> AxisFoot {
        let st = self.foot_state(t);
        AxisFoot {
            distance: st.g.sqrt().asinh() / self.k,
            s: st.s,
        }
    }

    /// `d/dT g` at fixed foot, and the partials in `a` and `b`.
    fn partials(&self, t: f64, st: &FootState) -> (f64, f64, f64) {
        let tt = self.k * t;
        let ss = self.k * st.s;
        let (sht, cht, shs) = (tt.sinh(), tt.cosh(), ss.sinh());
        let xt = (tt - ss).sinh() + self.eps * cht * shs;
        let g_t = 2.0 * st.x * xt + 2.0 * self.b * self.b * sht * cht * shs * shs;
        let g_a = -2.0 * st.x * sht * shs;
        let g_b = 2.0 * self.b * (sht * shs).powi(2);
        (g_t, g_a, g_b)
    }

    /// First `t` in `(0, t_max]` at distance `r` from the axis, or `t_max`.
    pub fn exit_time(&self, r: f64, t_max: f64) -> f64 {
        let target = (self.k * r).sinh().powi(2);
        if self.foot_state(t_max).g <= target {
            return t_max;
        }
        let (mut lo, mut hi) = (0.0, t_max);
        let mut t = r.min(0.5 * t_max);
        for _ in 0..200 {
            if hi - lo <= BISECTION_TOL {
                break;
            }
            let st = self.foot_state(t);
            if st.g > target {
                hi = t;
            } else {
                lo = t;
            }
            // Newton step on sinh^2(k d) - sinh^2(k r); bisect when it leaves the bracket.
            let (g_t, _, _) = self.partials(t, &st);
            let next = t - (st.g - target) / (self.k * g_t);
            let newton_ok = g_t > 0.0 && next > lo && next < hi;
            if newton_ok && (next - t).abs() <= 0.25 * BISECTION_TOL {
                return next;
            }
            t = if newton_ok && (next - t).abs() < 0.5 * (hi - lo) {
                next
            } else {
                0.5 * (lo + hi)
            };
        }
        t.clamp(lo, hi)
    }

    /// `cos(phi)` between the ray and the tube normal at `exp_p(t u)`, and the
    /// gradient `(dl/da, dl/db)` of the exit time, by the implicit function theorem.
    pub fn exit_geometry(&self, t: f64) -> (f64, f64, f64) {
        let st = self.foot_state(t);
        let (g_t, g_a, g_b) = self.partials(t, &st);
        let cos_phi = g_t / (2.0 * st.g.sqrt() * (1.0 + st.g).sqrt());
        (cos_phi, -g_a / (self.k * g_t), -g_b / (self.k * g_t))
    }

    /// Split differential of the exit time at a direction with signed
    /// coordinates `(u0, u1)`.
    fn differential(&self, t: f64, u0: f64, u1: f64) -> Differential {
        let (_, la, lb) = self.exit_geometry(t);
        let g0 = la * u0.signum();
        let g1 = lb * u1.signum();
        Differential::Split {
            reeb: g1 * u0 - g0 * u1,
            transverse_sqr: (g0 * g0 + g1 * g1) * self.q2,
        }
    }
}

/// Distance to the axis from `exp_p(t u)`, `u` in axis-adapted coordinates.
pub fn ray_axis_distance(
    params: &SpaceParams,
    u: &[f64],
    t: f64,
    half_length: Option<f64>,
) -> Result<AxisFoot> {
    Ok(RayAxisGeometry::new(params, u, half_length)?.foot(t))
}

fn tube_domain(
    params: &SpaceParams,
    spec: &TubeSpec,
    half_length: Option<f64>,
    t_max: f64,
) -> Result<RadialDomain> {
    let frame = params.frame(&spec.axis_base, Some(&spec.axis_dir))?;
    let (pl, pd) = (*params, *params);
    let r = spec.r;
    let normalized = |u: &[f64]| -> Vec<f64> {
        let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        u.iter().map(|x| x / n).collect()
    };
    Ok(RadialDomain::new(*params, frame, move |u| {
        let u = normalized(u);
        Ok(RayAxisGeometry::new(&pl, &u, half_length)?.exit_time(r, t_max))
    })?
    .with_boundary(move |u| {
        let u = normalized(u);
        let ray = RayAxisGeometry::new(&pd, &u, half_length)?;
        let t = ray.exit_time(r, t_max);
        if t >= t_max {
            return Ok((
                t,
                Differential::Split {
                    reeb: 0.0,
                    transverse_sqr: 0.0,
                },
            ));
        }
        Ok((t, ray.differential(t, u[0], u[1])))
    }))
}

/// The intersection of the tube with the ball of radius `ball_radius` about
/// the axis base, as a radial domain about that point. The radial function
/// depends only on `|g(u, gamma')|` and `|g(u, J gamma')|`.
pub fn tube_ball_radial_fn(spec: &TubeSpec, ball_radius: f64, params: &SpaceParams) -> Result<RadialDomain> {
    if !(ball_radius > spec.r) {
        return domain(format!(
            "ball radius {ball_radius} must exceed the tube radius {}",
            spec.r
        ));
    }
    tube_domain(params, spec, spec.length.map(|l| 0.5 * l), ball_radius)
}

/// The modified tube (tube about a segment with spherical caps) as a radial
/// domain about the segment midpoint.
pub fn modified_tube_radial_fn(spec: &TubeSpec, params: &SpaceParams) -> Result<RadialDomain> {
    let len = spec.require_length()?;
    tube_domain(params, spec, Some(0.5 * len), spec.r + 0.5 * len)
}

/// Euclidean cylinder volume `L vol(B^{2n-1}(r))`, the flat limit of the tube.
pub fn flat_cylinder_volume(params: &SpaceParams, r: f64, len: f64) -> f64 {
    let m = 2 * params.n() - 1;
    len * sphere_volume(m - 1) * r.powi(m as i32) / m as f64
}
