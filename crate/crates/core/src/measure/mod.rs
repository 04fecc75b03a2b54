//! Volumes and boundary areas: the Jacobian of the exponential map, geodesic
//! balls, star-shaped domains in geodesic polar coordinates, tubes about
//! geodesic segments and their capped and ball-truncated variants.

mod radial;
mod tube;

pub use radial::{
    boundary_geometry, min_cos_phi, radial_area, radial_measures, radial_volume, Differential,
    RadialBoundaryPoint, RadialDomain, RadialMeasures, FD_STEP, MIN_COS_PHI,
};
pub use tube::{
    distance_to_geodesic, distance_to_segment, flat_cylinder_volume, gray_integrand, modified_tube,
    modified_tube_radial_fn, ray_axis_distance, tube_ball_radial_fn, tube_boundary_area,
    tube_fermi_density, tube_volume_fermi, tube_volume_gray, AxisFoot, RayAxisGeometry,
    TubeSpec, AREA_FD_TOL, BISECTION_TOL,
};

use crate::error::{domain, Result};
use crate::model::SpaceParams;
use crate::special::{factorial, ln_cosh, ln_sinh, sinh_cosh_pow, sphere_volume};

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("{name} must be positive and finite, got {x}"));
    }
    Ok(())
}

/// `vol(S^{2n-1}) = 2 pi^n / (n-1)!`.
pub fn unit_sphere_volume(params: &SpaceParams) -> f64 {
    sphere_volume(2 * params.n() - 1)
}

/// Jacobian of `exp_p` in geodesic polar coordinates relative to the flat one:
/// `sinh^{2n-1}(kt) cosh(kt) / (kt)^{2n-1}`.
pub fn exp_jacobian(t: f64, params: &SpaceParams) -> Result<f64> {
    positive("t", t)?;
    let x = params.k() * t;
    if x > crate::special::LOG_SPACE_THRESHOLD {
        return Ok(ln_exp_jacobian(t, params)?.exp());
    }
    let m = 2 * params.n() as i32 - 1;
    let ratio = if x < 1e-8 { 1.0 + x * x / 6.0 } else { x.sinh() / x };
    Ok(ratio.powi(m) * x.cosh())
}

pub fn ln_exp_jacobian(t: f64, params: &SpaceParams) -> Result<f64> {
    positive("t", t)?;
    let x = params.k() * t;
    let m = 2.0 * params.n() as f64 - 1.0;
    let ln_ratio = if x < 1e-8 { x * x / 6.0 } else { ln_sinh(x) - x.ln() };
    Ok(m * ln_ratio + ln_cosh(x))
}

/// `sinh^{2n}(kr) vol(S^{2n-1}) / (2n k^{2n})`.
pub fn ball_volume(r: f64, params: &SpaceParams) -> Result<f64> {
    positive("radius", r)?;
    let (n, k) = (params.n() as i32, params.k());
    Ok(sinh_cosh_pow(k * r, 2 * n, 0) * unit_sphere_volume(params) / (2.0 * n as f64 * k.powi(2 * n)))
}

/// `sinh^{2n-1}(kr) cosh(kr) vol(S^{2n-1}) / k^{2n-1}`.
pub fn ball_area(r: f64, params: &SpaceParams) -> Result<f64> {
    positive("radius", r)?;
    let (n, k) = (params.n() as i32, params.k());
    Ok(sinh_cosh_pow(k * r, 2 * n - 1, 1) * unit_sphere_volume(params) / k.powi(2 * n - 1))
}

pub fn ln_ball_volume(r: f64, params: &SpaceParams) -> Result<f64> {
    positive("radius", r)?;
    let (n, k) = (params.n() as f64, params.k());
    Ok(2.0 * n * ln_sinh(k * r) + unit_sphere_volume(params).ln() - (2.0 * n).ln() - 2.0 * n * k.ln())
}

pub fn ln_ball_area(r: f64, params: &SpaceParams) -> Result<f64> {
    positive("radius", r)?;
    let (n, k) = (params.n() as f64, params.k());
    Ok((2.0 * n - 1.0) * ln_sinh(k * r) + ln_cosh(k * r) + unit_sphere_volume(params).ln()
        - (2.0 * n - 1.0) * k.ln())
}

/// `tanh(kr) / (2nk)`.
pub fn ball_quotient(r: f64, params: &SpaceParams) -> Result<f64> {
    positive("radius", r)?;
    let (n, k) = (params.n() as f64, params.k());
    Ok((k * r).tanh() / (2.0 * n * k))
}

/// Ball formulas written with the constant `pi^n / n!` in place of the round
/// sphere volume, as they are often displayed.
pub fn ball_volume_displayed(r: f64, params: &SpaceParams) -> Result<f64> {
    positive("radius", r)?;
    let (n, k) = (params.n(), params.k());
    let c = std::f64::consts::PI.powi(n as i32) / factorial(n);
    Ok(sinh_cosh_pow(k * r, 2 * n as i32, 0) * c / (2.0 * n as f64 * k.powi(2 * n as i32)))
}

pub fn ball_area_displayed(r: f64, params: &SpaceParams) -> Result<f64> {
    positive("radius", r)?;
    let (n, k) = (params.n(), params.k());
    let c = std::f64::consts::PI.powi(n as i32) / factorial(n);
    Ok(sinh_cosh_pow(k * r, 2 * n as i32 - 1, 1) * c / k.powi(2 * n as i32 - 1))
}

/// Comparison of the displayed ball formulas with the polar-coordinate ones.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BallNormalization {
    /// `ball_volume / ball_volume_displayed` (equals `2n`).
    pub volume_factor: f64,
    pub area_factor: f64,
    /// Set when the two conventions disagree.
    pub discrepancy: bool,
    /// Largest difference between the two volume/area quotients.
    pub quotient_difference: f64,
}

pub fn ball_normalization(r: f64, params: &SpaceParams) -> Result<BallNormalization> {
    let volume_factor = ball_volume(r, params)? / ball_volume_displayed(r, params)?;
    let area_factor = ball_area(r, params)? / ball_area_displayed(r, params)?;
    let q = ball_volume(r, params)? / ball_area(r, params)?;
    let qd = ball_volume_displayed(r, params)? / ball_area_displayed(r, params)?;
    Ok(BallNormalization {
        volume_factor,
        area_factor,
        discrepancy: (volume_factor - 1.0).abs() > 1e-12 || (area_factor - 1.0).abs() > 1e-12,
        quotient_difference: (q - qd).abs(),
    })
}
