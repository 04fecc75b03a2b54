use std::fmt;
use std::sync::Arc;

use crate::error::{domain, GeometryError, Result};
use crate::jacobi::{sphere_field_norm, DirectionClass, Geodesic};
use crate::model::{j_coords, SpaceParams, SpacePoint, TangentFrame, TangentVector};
use crate::quadrature::{Estimate, QuadratureRule};
use crate::special::{ln_cosh, ln_sinh};

/// Below this `cos(phi)` the radial direction is treated as tangent to the
/// boundary.
pub const MIN_COS_PHI: f64 = 1e-6;

/// Great-circle step for finite-difference differentials.
pub const FD_STEP: f64 = 1e-5;

/// Beyond this `k l` outward normals are not assembled in ambient coordinates.
const NORMAL_MAX_KL: f64 = 20.0;

/// Tangential differential of the radial function at a direction `u`.
#[derive(Debug, Clone, PartialEq)]
pub enum Differential {
    /// Gradient of any extension of `l` to `R^{2n}`, in frame coordinates.
    /// Only its component tangent to the sphere is used.
    Ambient(Vec<f64>),
    /// Derivative along `Ju` and the sum of squared derivatives over the
    /// remaining `2n - 2` orthonormal directions tangent to the sphere.
    Split { reeb: f64, transverse_sqr: f64 },
}

pub type RadialFn = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;
pub type DifferentialFn = Arc<dyn Fn(&[f64]) -> Result<Differential> + Send + Sync>;
pub type BoundaryFn = Arc<dyn Fn(&[f64]) -> Result<(f64, Differential)> + Send + Sync>;

/// A star-shaped domain `{exp_p(t u) : 0 <= t <= l(u)}` given by its radial
/// function on the unit sphere of `T_p`, in the coordinates of `frame`.
#[derive(Clone)]
pub struct RadialDomain {
    params: SpaceParams,
    frame: TangentFrame,
    radial_fn: RadialFn,
    differential: Option<DifferentialFn>,
    boundary: Option<BoundaryFn>,
}

impl fmt::Debug for RadialDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialDomain")
            .field("params", &self.params)
            .field("basepoint", self.frame.base())
            .field("differential", &self.differential.is_some())
            .finish()
    }
}

impl RadialDomain {
    pub fn new(
        params: SpaceParams,
        frame: TangentFrame,
        radial_fn: impl Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if frame.real_dim() != params.real_dim() {
            return Err(GeometryError::Dimension {
                expected: params.real_dim(),
                got: frame.real_dim(),
            });
        }
        Ok(Self {
            params,
            frame,
            radial_fn: Arc::new(radial_fn),
            differential: None,
            boundary: None,
        })
    }

    /// The ball of radius `r` about `p`.
    pub fn ball(params: SpaceParams, p: &SpacePoint, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return domain(format!("radius must be positive, got {r}"));
        }
        let frame = params.frame(p, None)?;
        Ok(Self::new(params, frame, move |_| Ok(r))?
            .with_differential(|u| Ok(Differential::Ambient(vec![0.0; u.len()]))))
    }

    pub fn with_differential(
        mut self,
        d: impl Fn(&[f64]) -> Result<Differential> + Send + Sync + 'static,
    ) -> Self {
        self.differential = Some(Arc::new(d));
        self
    }

    /// Radial function and differential from one evaluation, for domains
    /// where both come out of the same computation.
    pub fn with_boundary(
        mut self,
        b: impl Fn(&[f64]) -> Result<(f64, Differential)> + Send + Sync + 'static,
    ) -> Self {
        let b: BoundaryFn = Arc::new(b);
        let (fr, fd) = (b.clone(), b.clone());
        self.radial_fn = Arc::new(move |u| Ok(fr(u)?.0));
        self.differential = Some(Arc::new(move |u| Ok(fd(u)?.1)));
        self.boundary = Some(b);
        self
    }

    pub fn params(&self) -> &SpaceParams {
        &self.params
    }

    pub fn basepoint(&self) -> &SpacePoint {
        self.frame.base()
    }

    pub fn frame(&self) -> &TangentFrame {
        &self.frame
    }

    pub fn has_differential(&self) -> bool {
        self.differential.is_some()
    }

    /// `l(u)`, checked to be positive and finite.
    pub fn radius(&self, u: &[f64]) -> Result<f64> {
        self.check_dim(u)?;
        Self::check_radius((self.radial_fn)(u)?)
    }

    fn check_dim(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.params.real_dim() {
            return Err(GeometryError::Dimension {
                expected: self.params.real_dim(),
                got: u.len(),
            });
        }
        Ok(())
    }

    fn check_radius(l: f64) -> Result<f64> {
        if l.is_nan() {
            return Err(GeometryError::NotANumber { node: 0 });
        }
        if !(l > 0.0) || !l.is_finite() {
            return domain(format!("radial function must be positive and finite, got {l}"));
        }
        Ok(l)
    }

    /// `l` at a unit tangent vector at the basepoint.
    pub fn radius_at(&self, v: &TangentVector) -> Result<f64> {
        let x = self.frame.coords(v)?;
        self.radius(&x)
    }

    pub fn direction(&self, u: &[f64]) -> Result<TangentVector> {
        self.params.unit_vector(&self.frame, u)
    }
}

/// Orthonormal basis of the complement of `{u, Ju}` in `R^{2n}`.
fn transverse_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let dim = u.len();
    let ju = j_coords(u);
    let mut basis: Vec<Vec<f64>> = vec![u.to_vec(), ju];
    // Candidates ordered by how little they overlap u.
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| u[a].abs().partial_cmp(&u[b].abs()).unwrap());
    for j in order {
        if basis.len() == dim {
            break;
        }
        let mut v = vec![0.0; dim];
        v[j] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.iter().map(|x| x / norm).collect());
        }
    }
    basis.split_off(2)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Differential components at `u`: derivative along `Ju` and along each
/// transverse basis vector (when available).
struct Components {
    reeb: f64,
    transverse: Option<Vec<f64>>,
    transverse_sqr: f64,
    finite_difference: bool,
}

/// `l(u)` and its differential components, sharing work when the domain
/// provides a combined boundary function.
fn radius_and_components(d: &RadialDomain, u: &[f64]) -> Result<(f64, Components)> {
    match &d.boundary {
        Some(b) => {
            d.check_dim(u)?;
            let (l, diff) = b(u)?;
            Ok((RadialDomain::check_radius(l)?, split_components(u, diff)?))
        }
        None => Ok((d.radius(u)?, components(d, u)?)),
    }
}

fn split_components(u: &[f64], diff: Differential) -> Result<Components> {
    match diff {
        Differential::Ambient(g) => {
            if g.len() != u.len() {
                return Err(GeometryError::Dimension {
                    expected: u.len(),
                    got: g.len(),
                });
            }
            let t: Vec<f64> = transverse_basis(u).iter().map(|e| dot(&g, e)).collect();
            Ok(Components {
                reeb: dot(&g, &j_coords(u)),
                transverse_sqr: t.iter().map(|x| x * x).sum(),
                transverse: Some(t),
                finite_difference: false,
            })
        }
        Differential::Split {
            reeb,
            transverse_sqr,
        } => Ok(Components {
            reeb,
            transverse: None,
            transverse_sqr,
            finite_difference: false,
        }),
    }
}

fn components(d: &RadialDomain, u: &[f64]) -> Result<Components> {
    if let Some(f) = &d.differential {
        return split_components(u, f(u)?);
    }
    let ju = j_coords(u);
    let basis = transverse_basis(u);
    let (c, s) = (FD_STEP.cos(), FD_STEP.sin());
    let deriv = |e: &[f64]| -> Result<f64> {
        let plus: Vec<f64> = u.iter().zip(e).map(|(a, b)| c * a + s * b).collect();
        let minus: Vec<f64> = u.iter().zip(e).map(|(a, b)| c * a - s * b).collect();
        Ok((d.radius(&plus)? - d.radius(&minus)?) / (2.0 * FD_STEP))
    };
    let reeb = deriv(&ju)?;
    let t = basis.iter().map(|e| deriv(e)).collect::<Result<Vec<_>>>()?;
    Ok(Components {
        reeb,
        transverse_sqr: t.iter().map(|x| x * x).sum(),
        transverse: Some(t),
        finite_difference: true,
    })
}

/// The boundary point `exp_p(l(u) u)` with the angle between the outward
/// normal and the radial direction.
#[derive(Debug, Clone)]
pub struct RadialBoundaryPoint {
    /// Unit direction in frame coordinates.
    pub direction: Vec<f64>,
    pub l: f64,
    pub cos_phi: f64,
    /// Derivative of `l` along `Ju`.
    pub reeb_derivative: f64,
    /// Sum of squared derivatives of `l` along the other tangent directions.
    pub transverse_sqr: f64,
    /// `|grad l|^2` in the metric induced on the distance sphere of radius `l`.
    pub gradient_sqr: f64,
    pub finite_difference: bool,
    /// Outward unit normal at the boundary point; present when the full
    /// differential is known and `k l` is moderate.
    pub outward_normal: Option<TangentVector>,
}

fn cos_phi_from(params: &SpaceParams, l: f64, c: &Components) -> (f64, f64) {
    let yj = sphere_field_norm(params, l, DirectionClass::J);
    let yr = sphere_field_norm(params, l, DirectionClass::TotallyReal);
    let grad = (c.reeb / yj).powi(2) + c.transverse_sqr / (yr * yr);
    (1.0 / (1.0 + grad).sqrt(), grad)
}

/// Boundary geometry in direction `u` (frame coordinates, normalized here).
///
/// `cos(phi) = (1 + |grad l|^2)^{-1/2}` where the gradient is taken in the
/// distance sphere of radius `l`, whose metric scales the `Ju` direction by
/// `sinh(2kl)/(2k)` and the others by `sinh(kl)/k`.
pub fn boundary_geometry(d: &RadialDomain, u: &[f64]) -> Result<RadialBoundaryPoint> {
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(GeometryError::Degenerate("zero direction".into()));
    }
    let u: Vec<f64> = u.iter().map(|x| x / norm).collect();
    let (l, comps) = radius_and_components(d, &u)?;
    let (cos_phi, gradient_sqr) = cos_phi_from(&d.params, l, &comps);
    let outward_normal = match &comps.transverse {
        Some(t) if d.params.k() * l <= NORMAL_MAX_KL => Some(outward_normal(d, &u, l, comps.reeb, t)?),
        _ => None,
    };
    Ok(RadialBoundaryPoint {
        direction: u,
        l,
        cos_phi,
        reeb_derivative: comps.reeb,
        transverse_sqr: comps.transverse_sqr,
        gradient_sqr,
        finite_difference: comps.finite_difference,
        outward_normal,
    })
}

/// `N = (d_t - grad l) / sqrt(1 + |grad l|^2)` assembled from the parallel
/// frame along the radial geodesic.
fn outward_normal(d: &RadialDomain, u: &[f64], l: f64, reeb: f64, transverse: &[f64]) -> Result<TangentVector> {
    let params = &d.params;
    let g = Geodesic::new(*params, d.basepoint().clone(), d.direction(u)?)?;
    let radial = g.velocity(l)?;
    let yj = sphere_field_norm(params, l, DirectionClass::J);
    let yr = sphere_field_norm(params, l, DirectionClass::TotallyReal);
    let mut grad = radial.j().scale(reeb / yj);
    for (e, c) in transverse_basis(u).iter().zip(transverse) {
        let e0 = d.frame.vector(e)?;
        let el = g.transport(&e0, l)?;
        grad = grad.add_scaled(c / yr, &el)?;
    }
    let gsq = params.metric(&grad, &grad)?;
    Ok(radial.add_scaled(-1.0, &grad)?.scale(1.0 / (1.0 + gsq).sqrt()))
}

/// Volume, area and their quotient for a radial domain, from one pass over
/// the rule's nodes.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RadialMeasures {
    pub volume: Estimate,
    pub area: Estimate,
    /// `volume / area`, computed from rescaled integrals so it stays finite
    /// when the measures themselves overflow.
    pub quotient: f64,
    pub min_cos_phi: f64,
    pub max_l: f64,
    pub finite_difference: bool,
}

struct NodeValues {
    ln_sinh: Vec<f64>,
    ln_cosh: Vec<f64>,
    cos_phi: Vec<f64>,
    max_l: f64,
    fd: bool,
}

fn node_values(d: &RadialDomain, rule: &QuadratureRule, with_cos: bool) -> Result<NodeValues> {
    if rule.n() != d.params.n() {
        return Err(GeometryError::Dimension {
            expected: d.params.n(),
            got: rule.n(),
        });
    }
    let k = d.params.k();
    let vals = rule.evaluate(|i, u| -> Result<(f64, f64, bool)> {
        let tag = |e: GeometryError| match e {
            GeometryError::NotANumber { .. } => GeometryError::NotANumber { node: i },
            other => other,
        };
        if with_cos {
            let (l, c) = radius_and_components(d, u).map_err(tag)?;
            let (cos_phi, _) = cos_phi_from(&d.params, l, &c);
            if cos_phi.is_nan() {
                return Err(GeometryError::NotANumber { node: i });
            }
            if cos_phi < MIN_COS_PHI {
                return Err(GeometryError::IllConditioned { node: i, cos_phi });
            }
            Ok((l, cos_phi, c.finite_difference))
        } else {
            Ok((d.radius(u).map_err(tag)?, 1.0, false))
        }
    });
    let vals: Vec<(f64, f64, bool)> = vals.into_iter().collect::<Result<_>>()?;
    let max_l = vals.iter().map(|v| v.0).fold(0.0, f64::max);
    Ok(NodeValues {
        ln_sinh: vals.iter().map(|v| ln_sinh(k * v.0)).collect(),
        ln_cosh: vals.iter().map(|v| ln_cosh(k * v.0)).collect(),
        cos_phi: vals.iter().map(|v| v.1).collect(),
        max_l,
        fd: vals.iter().any(|v| v.2),
    })
}

/// Integrals of `sinh^{2n}(kl)` and `sinh^{2n-1}(kl)cosh(kl)/cos(phi)`, both
/// multiplied by `exp(-2n k shift)`, with sampling errors for Monte Carlo rules.
fn scaled_integrals(
    rule: &QuadratureRule,
    v: &NodeValues,
    n: f64,
    k: f64,
    shift: f64,
) -> Result<(f64, f64, (Option<f64>, Option<f64>))> {
    let s = 2.0 * n * k * shift;
    let vol: Vec<f64> = v.ln_sinh.iter().map(|ls| (2.0 * n * ls - s).exp()).collect();
    let area: Vec<f64> = v
        .ln_sinh
        .iter()
        .zip(&v.ln_cosh)
        .zip(&v.cos_phi)
        .map(|((ls, lc), c)| ((2.0 * n - 1.0) * ls + lc - s).exp() / c)
        .collect();
    let errors = (rule.sampling_error(&vol), rule.sampling_error(&area));
    Ok((rule.sum(&vol)?, rule.sum(&area)?, errors))
}

fn measures_inner(d: &RadialDomain, rule: &QuadratureRule, with_area: bool) -> Result<RadialMeasures> {
    let n = d.params.n() as f64;
    let k = d.params.k();
    let main = node_values(d, rule, with_area)?;
    let shift = main.max_l;
    let (v0, a0, sampling) = scaled_integrals(rule, &main, n, k, shift)?;
    let (ev, ea) = match (rule.companion(), sampling) {
        (_, (Some(ev), Some(ea))) => (ev, ea),
        (Some(c), _) => {
            let cv = node_values(d, c, with_area)?;
            let (v1, a1, _) = scaled_integrals(c, &cv, n, k, shift)?;
            ((v0 - v1).abs(), (a0 - a1).abs())
        }
        (None, _) => (0.0, 0.0),
    };
    let unscale = (2.0 * n * k * shift).exp();
    let vol_c = unscale / (2.0 * n * k.powf(2.0 * n));
    let area_c = unscale / k.powf(2.0 * n - 1.0);
    let min_cos_phi = main.cos_phi.iter().cloned().fold(1.0, f64::min);
    Ok(RadialMeasures {
        volume: Estimate {
            value: v0 * vol_c,
            error: ev * vol_c,
        },
        area: Estimate {
            value: a0 * area_c,
            error: ea * area_c,
        },
        quotient: v0 / (2.0 * n * k * a0),
        min_cos_phi,
        max_l: main.max_l,
        finite_difference: main.fd,
    })
}

/// Smallest `cos(phi)` over the nodes of `rule`.
pub fn min_cos_phi(d: &RadialDomain, rule: &QuadratureRule) -> Result<f64> {
    let vals = rule.evaluate(|_, u| -> Result<f64> {
        let (l, c) = radius_and_components(d, u)?;
        Ok(cos_phi_from(&d.params, l, &c).0)
    });
    vals.into_iter().try_fold(1.0, |m, c| Ok(f64::min(m, c?)))
}

/// `(1/(2n k^{2n})) * integral over S^{2n-1} of sinh^{2n}(k l(u))`.
pub fn radial_volume(d: &RadialDomain, rule: &QuadratureRule) -> Result<Estimate> {
    Ok(measures_inner(d, rule, false)?.volume)
}

/// `integral over S^{2n-1} of sinh^{2n-1}(kl) cosh(kl) / (k^{2n-1} cos(phi))`.
pub fn radial_area(d: &RadialDomain, rule: &QuadratureRule) -> Result<Estimate> {
    Ok(measures_inner(d, rule, true)?.area)
}

pub fn radial_measures(d: &RadialDomain, rule: &QuadratureRule) -> Result<RadialMeasures> {
    measures_inner(d, rule, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{ball_area, ball_volume};

    fn p(n: usize, k: f64) -> SpaceParams {
        SpaceParams::new(n, k).unwrap()
    }

    #[test]
    fn constant_radius_reproduces_ball() {
        for n in 2..4 {
            let s = p(n, 1.0);
            let d = RadialDomain::ball(s, &s.origin(), 2.0).unwrap();
            let rule = QuadratureRule::constant_exact(n).unwrap();
            let m = radial_measures(&d, &rule).unwrap();
            let bv = ball_volume(2.0, &s).unwrap();
            let ba = ball_area(2.0, &s).unwrap();
            assert!((m.volume.value / bv - 1.0).abs() < 1e-13);
            assert!((m.area.value / ba - 1.0).abs() < 1e-13);
            assert_eq!(m.min_cos_phi, 1.0);
        }
    }

    #[test]
    fn transverse_basis_is_orthonormal_complement() {
        let u = [0.5, -0.5, 0.5, 0.5, 0.0, 0.0];
        let ju = j_coords(&u);
        let b = transverse_basis(&u);
        assert_eq!(b.len(), 4);
        for (i, e) in b.iter().enumerate() {
            assert!(dot(e, &u).abs() < 1e-14 && dot(e, &ju).abs() < 1e-14);
            for (j, f) in b.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(e, f) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn finite_difference_matches_ambient_gradient() {
        let s = p(2, 1.0);
        let frame = s.frame(&s.origin(), None).unwrap();
        let f = |u: &[f64]| 1.0 + 0.2 * u[0] + 0.1 * u[1] * u[2];
        let fd = RadialDomain::new(s, frame.clone(), move |u| Ok(f(u))).unwrap();
        let exact = RadialDomain::new(s, frame, move |u| Ok(f(u)))
            .unwrap()
            .with_differential(|u| Ok(Differential::Ambient(vec![0.2, 0.1 * u[2], 0.1 * u[1], 0.0])));
        let u = [0.3, 0.4, 0.5, (1.0f64 - 0.5).sqrt()];
        let a = boundary_geometry(&fd, &u).unwrap();
        let b = boundary_geometry(&exact, &u).unwrap();
        assert!(a.finite_difference && !b.finite_difference);
        assert!((a.cos_phi - b.cos_phi).abs() < 1e-9);
        let na = a.outward_normal.unwrap();
        let nb = b.outward_normal.unwrap();
        assert!(s.norm(&na.add_scaled(-1.0, &nb).unwrap()) < 1e-8);
        assert!((s.norm(&nb) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tangential_boundary_is_rejected() {
        let s = p(2, 1.0);
        let frame = s.frame(&s.origin(), None).unwrap();
        let d = RadialDomain::new(s, frame, |_| Ok(1.0))
            .unwrap()
            .with_differential(|_| Ok(Differential::Split { reeb: 0.0, transverse_sqr: 1e20 }));
        let rule = QuadratureRule::product(2, 2).unwrap();
        assert!(matches!(
            radial_area(&d, &rule),
            Err(GeometryError::IllConditioned { .. })
        ));
    }
}
