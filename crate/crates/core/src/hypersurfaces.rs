//! Principal curvatures and lambda-convexity for spheres, horospheres,
//! equidistants and tubes, plus the pinching and feasibility bounds that
//! limit how convex an expanding family can be.

use std::fmt;

use crate::error::{domain, Result};
use crate::jacobi::{self, DirectionClass, FieldStart, TubeField};
use crate::model::SpaceParams;
use crate::special::coth;

/// Principal direction of a spectrum entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum PrincipalClass {
    /// `-JN`, the Reeb direction of the hypersurface.
    MinusJN,
    TotallyReal,
    /// Tangent to the axis of a tube.
    Axial,
    /// A combination of the above (tubes at intermediate `J`-angle).
    Mixed,
}

impl fmt::Display for PrincipalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrincipalClass::MinusJN => "-JN",
            PrincipalClass::TotallyReal => "totally-real",
            PrincipalClass::Axial => "axial",
            PrincipalClass::Mixed => "mixed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SpectrumEntry {
    pub value: f64,
    pub multiplicity: usize,
    pub direction_class: PrincipalClass,
    /// Set when the value comes from a Jacobi-field computation rather than a
    /// closed form.
    pub derived: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CurvatureSpectrum {
    pub entries: Vec<SpectrumEntry>,
}

impl CurvatureSpectrum {
    fn new(entries: Vec<SpectrumEntry>) -> Self {
        Self {
            entries: entries.into_iter().filter(|e| e.multiplicity > 0).collect(),
        }
    }

    pub fn total_multiplicity(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    pub fn min(&self) -> f64 {
        self.entries.iter().map(|e| e.value).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.value)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The certified lambda-convexity: the smallest principal curvature.
    pub fn lambda(&self) -> f64 {
        self.min()
    }
}

fn entry(value: f64, multiplicity: usize, class: PrincipalClass, derived: bool) -> SpectrumEntry {
    SpectrumEntry {
        value,
        multiplicity,
        direction_class: class,
        derived,
    }
}

/// Catalog of hypersurfaces with known principal curvatures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HypersurfaceKind {
    Sphere { r: f64 },
    Horosphere,
    /// Distance-`r` hypersurface about a totally geodesic `CH^p`, `1 <= p < n`.
    EquidistantToCHp { r: f64, p: usize },
    /// Distance-`r` hypersurface about a totally real totally geodesic `RH^n`.
    EquidistantToRHn { r: f64 },
    /// Boundary of the tube of radius `r` about a geodesic, at a point where
    /// the axis is orthogonal to `J v0` (where the minimum is attained).
    TubeAboutGeodesic { r: f64 },
}

fn positive_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return domain(format!("radius must be positive and finite, got {r}"));
    }
    Ok(())
}

/// Principal curvatures with multiplicities, with respect to the inward normal.
pub fn spectrum(kind: HypersurfaceKind, params: &SpaceParams) -> Result<CurvatureSpectrum> {
    use PrincipalClass::*;
    let n = params.n();
    let k = params.k();
    let spec = match kind {
        HypersurfaceKind::Sphere { r } => {
            positive_radius(r)?;
            CurvatureSpectrum::new(vec![
                entry(2.0 * k * coth(2.0 * k * r), 1, MinusJN, false),
                entry(k * coth(k * r), 2 * n - 2, TotallyReal, false),
            ])
        }
        HypersurfaceKind::Horosphere => CurvatureSpectrum::new(vec![
            entry(2.0 * k, 1, MinusJN, false),
            entry(k, 2 * n - 2, TotallyReal, false),
        ]),
        HypersurfaceKind::EquidistantToCHp { r, p } => {
            positive_radius(r)?;
            if p == 0 || p >= n {
                return domain(format!("complex submanifold dimension must satisfy 1 <= p < {n}, got {p}"));
            }
            let tangent = jacobi::field_normal_curvature(params, r, FieldStart::Value, DirectionClass::TotallyReal)?;
            let reeb = jacobi::field_normal_curvature(params, r, FieldStart::Derivative, DirectionClass::J)?;
            let normal = jacobi::field_normal_curvature(params, r, FieldStart::Derivative, DirectionClass::TotallyReal)?;
            CurvatureSpectrum::new(vec![
                entry(tangent, 2 * p, TotallyReal, false),
                entry(reeb, 1, MinusJN, true),
                entry(normal, 2 * (n - p - 1), TotallyReal, true),
            ])
        }
        HypersurfaceKind::EquidistantToRHn { r } => {
            positive_radius(r)?;
            // J v0 is tangent to the totally real submanifold.
            let reeb = jacobi::field_normal_curvature(params, r, FieldStart::Value, DirectionClass::J)?;
            let tangent = jacobi::field_normal_curvature(params, r, FieldStart::Value, DirectionClass::TotallyReal)?;
            let normal = jacobi::field_normal_curvature(params, r, FieldStart::Derivative, DirectionClass::TotallyReal)?;
            CurvatureSpectrum::new(vec![
                entry(reeb, 1, MinusJN, true),
                entry(tangent, n - 1, TotallyReal, false),
                entry(normal, n - 1, TotallyReal, true),
            ])
        }
        HypersurfaceKind::TubeAboutGeodesic { r } => {
            positive_radius(r)?;
            let axial = jacobi::tube_normal_curvature(params, r, TubeField::Axial { j_angle: 0.0 })?;
            let reeb = jacobi::tube_normal_curvature(params, r, TubeField::SphereLike { j_angle: 1.0 })?;
            let rest = jacobi::tube_normal_curvature(params, r, TubeField::SphereLike { j_angle: 0.0 })?;
            CurvatureSpectrum::new(vec![
                entry(axial, 1, Axial, true),
                entry(reeb, 1, MinusJN, true),
                entry(rest, 2 * n - 3, TotallyReal, true),
            ])
        }
    };
    Ok(spec)
}

/// Spectrum of the tube boundary at a point where the axis has `J`-angle `c`
/// with respect to the outward normal.
pub fn tube_spectrum_at(params: &SpaceParams, r: f64, c: f64) -> Result<CurvatureSpectrum> {
    positive_radius(r)?;
    let n = params.n();
    let [lo, hi] = jacobi::tube_shape_block(params, r, c)?;
    let rest = jacobi::tube_normal_curvature(params, r, TubeField::SphereLike { j_angle: 0.0 })?;
    let (lo_class, hi_class) = if c == 0.0 {
        (PrincipalClass::Axial, PrincipalClass::MinusJN)
    } else {
        (PrincipalClass::Mixed, PrincipalClass::Mixed)
    };
    Ok(CurvatureSpectrum::new(vec![
        entry(lo, 1, lo_class, true),
        entry(hi, 1, hi_class, true),
        entry(rest, 2 * n - 3, PrincipalClass::TotallyReal, true),
    ]))
}

/// Normal-curvature pinching of a convex boundary between its inscribed
/// sphere (radius `r`) and circumscribed sphere (radius `R`).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PinchingBounds {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub totally_real_interval: (f64, f64),
    pub jn_interval: (f64, f64),
}

pub fn pinching(r: f64, big_r: f64, params: &SpaceParams) -> Result<PinchingBounds> {
    positive_radius(r)?;
    positive_radius(big_r)?;
    if r > big_r {
        return domain(format!("inscribed radius {r} exceeds circumscribed radius {big_r}"));
    }
    let k = params.k();
    Ok(PinchingBounds {
        r,
        big_r,
        totally_real_interval: (k * coth(k * big_r), k * coth(k * r)),
        jn_interval: (2.0 * k * coth(2.0 * k * big_r), 2.0 * k * coth(2.0 * k * r)),
    })
}

/// Largest lambda a convex domain with inscribed radius `r` can certify in
/// every direction: `k coth(kr)`. Decreases to `k` as `r -> infinity`.
pub fn feasibility_threshold(r: f64, params: &SpaceParams) -> Result<f64> {
    positive_radius(r)?;
    let k = params.k();
    Ok(k * coth(k * r))
}

/// Rejects `lambda` above the level expanding families can sustain (`k`).
pub fn check_feasible(lambda: f64, params: &SpaceParams) -> Result<()> {
    let k = params.k();
    if !(lambda >= 0.0) {
        return domain(format!("lambda must be nonnegative, got {lambda}"));
    }
    if lambda > k {
        return Err(crate::GeometryError::Infeasible { lambda, max: k });
    }
    Ok(())
}

/// Lower bound on `cos(phi)`, the cosine of the angle between the outward
/// normal of a lambda-convex boundary and the radial direction from an
/// interior point at distance `s` from the boundary. Curvature is pinched in
/// `[-k2^2, -k1^2]`; `k2` defaults to `2k`.
///
/// For `s < atanh(lambda/k2)/k2` the bound is
/// `sqrt(lambda^2 cosh^2(k2 s) - k2^2 sinh^2(k2 s)) / k2`, otherwise `lambda/k2`.
/// The first branch vanishes at the branch point, so the bound jumps there.
pub fn cos_phi_lower_bound(lambda: f64, s: f64, params: &SpaceParams, k2: Option<f64>) -> Result<f64> {
    let k2 = k2.unwrap_or(2.0 * params.k());
    if !(k2 > 0.0) {
        return domain(format!("k2 must be positive, got {k2}"));
    }
    if !(lambda >= 0.0) || lambda > k2 {
        return domain(format!("lambda must lie in [0, k2 = {k2}], got {lambda}"));
    }
    if !(s >= 0.0) {
        return domain(format!("distance to the boundary must be nonnegative, got {s}"));
    }
    if s >= cos_phi_branch_point(lambda, k2) {
        return Ok(lambda / k2);
    }
    let x = k2 * s;
    let inner = (lambda * x.cosh()).powi(2) - (k2 * x.sinh()).powi(2);
    Ok(inner.max(0.0).sqrt() / k2)
}

/// `atanh(lambda/k2)/k2`; infinite when `lambda = k2`.
pub fn cos_phi_branch_point(lambda: f64, k2: f64) -> f64 {
    (lambda / k2).atanh() / k2
}
