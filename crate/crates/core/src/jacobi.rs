//! Jacobi fields along geodesics of `CH^n(-4k^2)`.
//!
//! Along a unit-speed geodesic `sigma`, the curvature operator `R(., sigma')sigma'`
//! is diagonal in a parallel frame: it acts as `-4k^2` on `J sigma'` and as `-k^2`
//! on the `2n-2` totally real directions orthogonal to `sigma'` and `J sigma'`.
//! A normal Jacobi field therefore splits into scalar components solving
//! `y'' = 4k^2 y` (the `J sigma'` part) and `y'' = k^2 y` (the rest).

use crate::error::{domain, GeometryError, Result};
use crate::model::{SpaceParams, SpacePoint, TangentFrame, TangentVector, COMPARE_TOL};
use crate::special::{coth, richardson_to_zero};

/// A unit-speed geodesic given by a base point and unit direction.
#[derive(Debug, Clone)]
pub struct Geodesic {
    params: SpaceParams,
    base: SpacePoint,
    direction: TangentVector,
    frame: TangentFrame,
}

impl Geodesic {
    pub fn new(params: SpaceParams, base: SpacePoint, direction: TangentVector) -> Result<Self> {
        if !direction.base().same_representative(&base) {
            return Err(GeometryError::BaseMismatch);
        }
        if direction.is_zero() {
            return Err(GeometryError::Degenerate("zero geodesic direction".into()));
        }
        let norm = params.norm(&direction);
        if (norm - 1.0).abs() > COMPARE_TOL {
            return domain(format!("geodesic direction must be unit, got norm {norm}"));
        }
        // Axes: 0 = sigma', 1 = J sigma', 2.. = totally real normal directions.
        let frame = params.frame(&base, Some(&direction))?;
        Ok(Self {
            params,
            base,
            direction,
            frame,
        })
    }

    pub fn params(&self) -> &SpaceParams {
        &self.params
    }

    pub fn base(&self) -> &SpacePoint {
        &self.base
    }

    pub fn direction(&self) -> &TangentVector {
        &self.direction
    }

    /// Frame at the base adapted to the geodesic: axis 0 is the direction,
    /// axis 1 its image under `J`.
    pub fn frame(&self) -> &TangentFrame {
        &self.frame
    }

    pub fn point(&self, t: f64) -> Result<SpacePoint> {
        self.params.exp_map(&self.base, &self.direction, t)
    }

    pub fn velocity(&self, t: f64) -> Result<TangentVector> {
        self.params.geodesic_velocity(&self.base, &self.direction, t)
    }

    pub fn transport(&self, w: &TangentVector, t: f64) -> Result<TangentVector> {
        self.params
            .parallel_transport(&self.base, &self.direction, w, t)
    }

    /// Number of totally real normal directions, `2n - 2`.
    pub fn real_normal_dim(&self) -> usize {
        self.params.real_dim() - 2
    }
}

/// Components of a normal vector pair (value, derivative) in the parallel
/// frame `{J sigma', e_2, ..., e_{2n-1}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct JComponentSplit {
    pub j_part: (f64, f64),
    pub real_part: Vec<(f64, f64)>,
}

impl JComponentSplit {
    /// `g(Y, Y)` of the value component.
    pub fn value_norm_sqr(&self) -> f64 {
        self.j_part.0 * self.j_part.0 + self.real_part.iter().map(|p| p.0 * p.0).sum::<f64>()
    }

    /// `g(Y', Y)`.
    pub fn value_dot_derivative(&self) -> f64 {
        self.j_part.0 * self.j_part.1 + self.real_part.iter().map(|p| p.0 * p.1).sum::<f64>()
    }

    /// Normal curvature `g(Y', Y) / g(Y, Y)` of the hypersurface swept by the
    /// family generating `Y`, in direction `Y`.
    pub fn normal_curvature(&self) -> f64 {
        self.value_dot_derivative() / self.value_norm_sqr()
    }

    /// Value coordinates `(j, real...)` in the normal frame.
    pub fn value_coords(&self) -> Vec<f64> {
        std::iter::once(self.j_part.0)
            .chain(self.real_part.iter().map(|p| p.0))
            .collect()
    }

    pub fn derivative_coords(&self) -> Vec<f64> {
        std::iter::once(self.j_part.1)
            .chain(self.real_part.iter().map(|p| p.1))
            .collect()
    }
}

/// Scalar solution of `y'' = (mk)^2 y` with `y(0) = a`, `y'(0) = b`.
fn evolve(a: f64, b: f64, rate: f64, t: f64) -> (f64, f64) {
    let x = rate * t;
    let (s, c) = (x.sinh(), x.cosh());
    (a * c + b * s / rate, a * rate * s + b * c)
}

/// Norm at time `t` of the Jacobi field with `Y(0) = 0`, `Y'(0) = e` for a
/// unit normal `e`: `sinh(2kt)/(2k)` when `e = J sigma'`, `sinh(kt)/k` when `e`
/// is totally real.
pub fn sphere_field_norm(params: &SpaceParams, t: f64, class: DirectionClass) -> f64 {
    let k = params.k();
    let rate = match class {
        DirectionClass::J => 2.0 * k,
        DirectionClass::TotallyReal => k,
    };
    evolve(0.0, 1.0, rate, t).0
}

/// Which block of the curvature operator a normal direction belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionClass {
    /// Along `J sigma'`: curvature `-4k^2`.
    J,
    /// Orthogonal to `sigma'` and `J sigma'`: curvature `-k^2`.
    TotallyReal,
}

/// A normal Jacobi field given by initial data at the geodesic's base.
#[derive(Debug, Clone)]
pub struct JacobiField {
    geodesic: Geodesic,
    initial_value: TangentVector,
    initial_derivative: TangentVector,
    split: JComponentSplit,
}

impl JacobiField {
    pub fn new(
        geodesic: Geodesic,
        initial_value: TangentVector,
        initial_derivative: TangentVector,
    ) -> Result<Self> {
        let params = geodesic.params;
        let dir = &geodesic.direction;
        let along = params
            .metric(&initial_value, dir)?
            .abs()
            .max(params.metric(&initial_derivative, dir)?.abs());
        if along > COMPARE_TOL * (1.0 + params.norm(&initial_value) + params.norm(&initial_derivative)) {
            return domain(format!(
                "Jacobi initial data must be normal to the geodesic (tangential part {along:e})"
            ));
        }
        let split = Self::split_pair(&geodesic, &initial_value, &initial_derivative);
        Ok(Self {
            geodesic,
            initial_value,
            initial_derivative,
            split,
        })
    }

    /// Field from frame coordinates `(j, real...)` of value and derivative.
    pub fn from_coords(geodesic: Geodesic, value: &[f64], derivative: &[f64]) -> Result<Self> {
        let value = normal_vector(&geodesic, value)?;
        let derivative = normal_vector(&geodesic, derivative)?;
        Self::new(geodesic, value, derivative)
    }

    fn split_pair(g: &Geodesic, y: &TangentVector, dy: &TangentVector) -> JComponentSplit {
        let params = g.params;
        let comp = |axis: usize| {
            let e = g.frame.axis(axis);
            (
                params.metric_unchecked(y, &e),
                params.metric_unchecked(dy, &e),
            )
        };
        JComponentSplit {
            j_part: comp(1),
            real_part: (2..params.real_dim()).map(comp).collect(),
        }
    }

    pub fn geodesic(&self) -> &Geodesic {
        &self.geodesic
    }

    pub fn initial_value(&self) -> &TangentVector {
        &self.initial_value
    }

    pub fn initial_derivative(&self) -> &TangentVector {
        &self.initial_derivative
    }

    /// The initial data split along `J sigma'` and the totally real frame.
    pub fn split(&self) -> &JComponentSplit {
        &self.split
    }

    /// Frame components at time `t`: the `J sigma'` part evolves with rate `2k`,
    /// each totally real part with rate `k`.
    pub fn propagate_split(&self, t: f64) -> JComponentSplit {
        let k = self.geodesic.params.k();
        let (a, b) = self.split.j_part;
        JComponentSplit {
            j_part: evolve(a, b, 2.0 * k, t),
            real_part: self
                .split
                .real_part
                .iter()
                .map(|&(a, b)| evolve(a, b, k, t))
                .collect(),
        }
    }

    /// Value and covariant derivative at time `t` as tangent vectors at `sigma(t)`.
    pub fn propagate(&self, t: f64) -> Result<(TangentVector, TangentVector)> {
        let state = self.propagate_split(t);
        reassemble(&self.geodesic, &state, t)
    }
}

/// Tangent vector at the base with normal-frame coordinates `(j, real...)`.
pub fn normal_vector(g: &Geodesic, coords: &[f64]) -> Result<TangentVector> {
    let dim = g.params.real_dim();
    if coords.len() != dim - 1 {
        return Err(GeometryError::Dimension {
            expected: dim - 1,
            got: coords.len(),
        });
    }
    let mut full = vec![0.0; dim];
    full[1..].copy_from_slice(coords);
    g.frame.vector(&full)
}

/// Rebuilds value and derivative at `sigma(t)` from frame components, using
/// `J sigma'(t)` and the parallel-transported totally real frame.
pub fn reassemble(
    g: &Geodesic,
    state: &JComponentSplit,
    t: f64,
) -> Result<(TangentVector, TangentVector)> {
    let ej = g.velocity(t)?.j();
    let mut value = ej.scale(state.j_part.0);
    let mut deriv = ej.scale(state.j_part.1);
    for (m, &(y, dy)) in state.real_part.iter().enumerate() {
        let e = g.transport(&g.frame.axis(m + 2), t)?;
        value = value.add_scaled(y, &e)?;
        deriv = deriv.add_scaled(dy, &e)?;
    }
    Ok((value, deriv))
}

fn standard_geodesic(params: &SpaceParams) -> Result<Geodesic> {
    let p = params.origin();
    let frame = params.frame(&p, None)?;
    Geodesic::new(*params, p, frame.axis(0))
}

/// How a field starts at the foot of the normal geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldStart {
    /// `Y(0) = e`, `Y'(0) = 0`: a parallel displacement of the foot point.
    Value,
    /// `Y(0) = 0`, `Y'(0) = e`: a rotation of the normal direction.
    Derivative,
}

/// Normal curvature at distance `r` of the hypersurface swept by the field
/// starting in a unit normal direction of the given class.
pub fn field_normal_curvature(
    params: &SpaceParams,
    r: f64,
    start: FieldStart,
    class: DirectionClass,
) -> Result<f64> {
    let g = standard_geodesic(params)?;
    let mut e = vec![0.0; params.real_dim() - 1];
    match class {
        DirectionClass::J => e[0] = 1.0,
        DirectionClass::TotallyReal => e[1] = 1.0,
    }
    let zero = vec![0.0; e.len()];
    let field = match start {
        FieldStart::Value => JacobiField::from_coords(g, &e, &zero)?,
        FieldStart::Derivative => JacobiField::from_coords(g, &zero, &e)?,
    };
    Ok(field.propagate_split(r).normal_curvature())
}

/// Normal curvature of the geodesic sphere of radius `r`, from the Jacobi field
/// vanishing at the centre. Equals `2k coth(2kr)` for `J` and `k coth(kr)` for
/// totally real directions.
pub fn sphere_normal_curvature_jacobi(
    params: &SpaceParams,
    r: f64,
    class: DirectionClass,
) -> Result<f64> {
    if !(r > 0.0) {
        return domain(format!("sphere radius must be positive, got {r}"));
    }
    field_normal_curvature(params, r, FieldStart::Derivative, class)
}

/// Normal curvature of a geodesic sphere along a direction with `J`-angle
/// `c = |g(v, -JN)|`, i.e. `v = c (-JN) + sqrt(1-c^2) e` for totally real `e`.
pub fn sphere_normal_curvature_at_angle(params: &SpaceParams, r: f64, c: f64) -> Result<f64> {
    if !(r > 0.0) {
        return domain(format!("sphere radius must be positive, got {r}"));
    }
    check_angle(c)?;
    let g = standard_geodesic(params)?;
    // Y(r) has components f_J d0, f_R d1, so scale d to land on v.
    let mut d = vec![0.0; params.real_dim() - 1];
    d[0] = c / sphere_field_norm(params, r, DirectionClass::J);
    d[1] = (1.0 - c * c).sqrt() / sphere_field_norm(params, r, DirectionClass::TotallyReal);
    let field = JacobiField::from_coords(g, &vec![0.0; d.len()], &d)?;
    Ok(field.propagate_split(r).normal_curvature())
}

fn check_angle(c: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&c) {
        return domain(format!("J-angle must lie in [0, 1], got {c}"));
    }
    Ok(())
}

/// Fields on the boundary of a tube about a geodesic `gamma`, carried along the
/// normal geodesic from `gamma` through the boundary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TubeField {
    /// `T(0) = gamma'`, `T'(0) = 0`, where `j_angle = |g(gamma', J v0)|` and `v0`
    /// is the outward direction from the axis.
    Axial { j_angle: f64 },
    /// `T(0) = 0`, `T'(0) = v_j` for a unit `v_j` orthogonal to `v0` with
    /// `J`-angle `|g(v_j, J v0)|`.
    SphereLike { j_angle: f64 },
}

impl TubeField {
    fn field(&self, params: &SpaceParams) -> Result<JacobiField> {
        let g = standard_geodesic(params)?;
        let (c, start) = match *self {
            TubeField::Axial { j_angle } => (j_angle, FieldStart::Value),
            TubeField::SphereLike { j_angle } => (j_angle, FieldStart::Derivative),
        };
        check_angle(c)?;
        let mut e = vec![0.0; params.real_dim() - 1];
        e[0] = c;
        e[1] = (1.0 - c * c).sqrt();
        let zero = vec![0.0; e.len()];
        match start {
            FieldStart::Value => JacobiField::from_coords(g, &e, &zero),
            FieldStart::Derivative => JacobiField::from_coords(g, &zero, &e),
        }
    }
}

/// Normal curvature `<-nabla_T N, T>/|T|^2 = (d/dr |T|^2) / (2|T|^2)` of the
/// tube boundary at radius `r`, along the given field.
pub fn tube_normal_curvature(params: &SpaceParams, r: f64, field: TubeField) -> Result<f64> {
    if !(r > 0.0) {
        return domain(format!("tube radius must be positive, got {r}"));
    }
    Ok(field.field(params)?.propagate_split(r).normal_curvature())
}

/// `-N<T,T> = d/dr g(T(r), T(r))` for the given tube field.
pub fn tube_norm_growth(params: &SpaceParams, r: f64, field: TubeField) -> Result<f64> {
    Ok(2.0 * field.field(params)?.propagate_split(r).value_dot_derivative())
}

/// Outcome of [`tube_monotonicity_check`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MonotonicityReport {
    pub pass: bool,
    pub nonnegative: bool,
    pub nondecreasing: bool,
    /// Richardson extrapolation of `-N<T,T>` to `r -> 0`.
    pub limit_at_zero: f64,
    /// Smallest slack across the three checks (negative when failing).
    pub worst_margin: f64,
    pub values: Vec<f64>,
}

/// Tolerance on the extrapolated `r -> 0` limit of `-N<T,T>`.
pub const ZERO_LIMIT_TOL: f64 = 1e-6;

/// Checks that `-N<T(r),T(r)>` is nonnegative, nondecreasing along the grid and
/// tends to zero as `r -> 0` (extrapolated from `r = 1e-2, 1e-3, 1e-4`).
pub fn tube_monotonicity_check(
    params: &SpaceParams,
    r_grid: &[f64],
    field: TubeField,
) -> Result<MonotonicityReport> {
    if r_grid.is_empty() {
        return Err(GeometryError::Degenerate("empty radius grid".into()));
    }
    if r_grid[0] <= 0.0 || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("radius grid must be positive and strictly increasing");
    }
    let jf = field.field(params)?;
    let growth = |r: f64| 2.0 * jf.propagate_split(r).value_dot_derivative();
    let values: Vec<f64> = r_grid.iter().map(|&r| growth(r)).collect();

    let min_value = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let step_margin = values
        .windows(2)
        .map(|w| w[1] - w[0] + 1e-12 * w[1].abs().max(1.0))
        .fold(f64::INFINITY, f64::min);
    let limit_at_zero = richardson_to_zero(growth(1e-2), growth(1e-3), growth(1e-4));
    let limit_margin = ZERO_LIMIT_TOL - limit_at_zero.abs();

    let nonnegative = min_value >= 0.0;
    let nondecreasing = step_margin >= 0.0;
    let worst_margin = min_value.min(step_margin).min(limit_margin);
    Ok(MonotonicityReport {
        pass: nonnegative && nondecreasing && limit_margin >= 0.0,
        nonnegative,
        nondecreasing,
        limit_at_zero,
        worst_margin,
        values,
    })
}

/// Eigenvalues (ascending) of the shape operator of the tube of radius `r`
/// about a geodesic, restricted to the plane spanned by the axial direction and
/// `J v0`, at a boundary point with `J`-angle `c = |g(gamma', J v0)|`.
///
/// Built from the two Jacobi fields `(gamma', 0)` and `(0, n1)` with
/// `n1 = sqrt(1-c^2) J v0 - c e` as `S = Y' Y^{-1}`.
pub fn tube_shape_block(params: &SpaceParams, r: f64, c: f64) -> Result<[f64; 2]> {
    if !(r > 0.0) {
        return domain(format!("tube radius must be positive, got {r}"));
    }
    check_angle(c)?;
    let s = (1.0 - c * c).sqrt();
    let g = standard_geodesic(params)?;
    let dim = params.real_dim() - 1;
    let mut axial = vec![0.0; dim];
    axial[0] = c;
    axial[1] = s;
    let mut n1 = vec![0.0; dim];
    n1[0] = s;
    n1[1] = -c;
    let zero = vec![0.0; dim];
    let fa = JacobiField::from_coords(g.clone(), &axial, &zero)?.propagate_split(r);
    let fb = JacobiField::from_coords(g, &zero, &n1)?.propagate_split(r);
    // Columns are fields, rows the (J v0, e) components.
    let y = nalgebra::Matrix2::new(fa.j_part.0, fb.j_part.0, fa.real_part[0].0, fb.real_part[0].0);
    let dy = nalgebra::Matrix2::new(fa.j_part.1, fb.j_part.1, fa.real_part[0].1, fb.real_part[0].1);
    let inv = y
        .try_inverse()
        .ok_or_else(|| GeometryError::Degenerate("singular Jacobi matrix".into()))?;
    let shape = dy * inv;
    let sym = (shape + shape.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    let (a, b) = (eig[0], eig[1]);
    Ok(if a <= b { [a, b] } else { [b, a] })
}

/// Closed forms from the principal curvatures of geodesic spheres, for
/// comparison with the Jacobi-field route.
pub fn sphere_principal_curvatures(params: &SpaceParams, r: f64) -> (f64, f64) {
    let k = params.k();
    (2.0 * k * coth(2.0 * k * r), k * coth(k * r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, k: f64) -> SpaceParams {
        SpaceParams::new(n, k).unwrap()
    }

    #[test]
    fn sphere_curvatures_match_closed_forms() {
        let s = p(2, 1.0);
        let tr = sphere_normal_curvature_jacobi(&s, 1.0, DirectionClass::TotallyReal).unwrap();
        let j = sphere_normal_curvature_jacobi(&s, 1.0, DirectionClass::J).unwrap();
        assert!((tr - coth(1.0)).abs() < 1e-14);
        assert!((j - 2.0 * coth(2.0)).abs() < 1e-14);
        let far = sphere_normal_curvature_jacobi(&s, 40.0, DirectionClass::J).unwrap();
        assert!((far - 2.0).abs() < 1e-12);
        assert!(sphere_normal_curvature_jacobi(&s, 0.0, DirectionClass::J).is_err());
    }

    #[test]
    fn tube_curvature_extremes() {
        for &k in &[0.5, 1.0, 2.0] {
            let s = p(3, k);
            for &r in &[0.1, 1.0, 3.0] {
                let a0 = tube_normal_curvature(&s, r, TubeField::Axial { j_angle: 0.0 }).unwrap();
                let a1 = tube_normal_curvature(&s, r, TubeField::Axial { j_angle: 1.0 }).unwrap();
                let s0 =
                    tube_normal_curvature(&s, r, TubeField::SphereLike { j_angle: 0.0 }).unwrap();
                assert!((a0 - k * (k * r).tanh()).abs() < 1e-13);
                assert!((a1 - 2.0 * k * (2.0 * k * r).tanh()).abs() < 1e-13);
                assert!((s0 - k * coth(k * r)).abs() < 1e-12);
            }
        }
        assert!(tube_normal_curvature(&p(2, 1.0), 1.0, TubeField::Axial { j_angle: 1.5 }).is_err());
    }

    #[test]
    fn axial_formula_for_intermediate_angle() {
        let s = p(2, 0.8);
        let (k, r, c) = (0.8_f64, 1.3_f64, 0.6_f64);
        let num = 2.0 * k * c * c * (2.0 * k * r).cosh() * (2.0 * k * r).sinh()
            + k * (1.0 - c * c) * (k * r).cosh() * (k * r).sinh();
        let den = c * c * (2.0 * k * r).cosh().powi(2) + (1.0 - c * c) * (k * r).cosh().powi(2);
        let got = tube_normal_curvature(&s, r, TubeField::Axial { j_angle: c }).unwrap();
        assert!((got - num / den).abs() < 1e-13);
    }

    #[test]
    fn reassembly_reproduces_initial_data() {
        let s = p(3, 1.3);
        let g = standard_geodesic(&s).unwrap();
        let v = [0.3, -0.2, 0.5, 0.1, 0.7];
        let d = [-0.4, 0.25, 0.0, 0.9, -0.1];
        let f = JacobiField::from_coords(g.clone(), &v, &d).unwrap();
        let (y, dy) = reassemble(&g, f.split(), 0.0).unwrap();
        assert!((&y.rep().clone() - f.initial_value().rep()).euclidean_norm() < 1e-12);
        assert!((&dy.rep().clone() - f.initial_derivative().rep()).euclidean_norm() < 1e-12);
        let (y0, dy0) = f.propagate(0.0).unwrap();
        assert!(s.norm(&y0.add_scaled(-1.0, &y).unwrap()) < 1e-12);
        assert!(s.norm(&dy0.add_scaled(-1.0, &dy).unwrap()) < 1e-12);
    }

    #[test]
    fn tangential_initial_data_rejected() {
        let s = p(2, 1.0);
        let g = standard_geodesic(&s).unwrap();
        let tangential = g.direction().clone();
        let zero = tangential.scale(0.0);
        assert!(JacobiField::new(g, tangential, zero).is_err());
    }

    #[test]
    fn monotonicity_grid_edge_cases() {
        let s = p(2, 1.0);
        assert!(tube_monotonicity_check(&s, &[], TubeField::Axial { j_angle: 0.0 }).is_err());
        assert!(tube_monotonicity_check(&s, &[1.0, 0.5], TubeField::Axial { j_angle: 0.0 }).is_err());
        let single = tube_monotonicity_check(&s, &[1.0], TubeField::Axial { j_angle: 0.0 }).unwrap();
        assert!(single.pass);
        let grid: Vec<f64> = (0..=60).map(|i| 1e-4 * (5.0f64 / 1e-4).powf(i as f64 / 60.0)).collect();
        let rep = tube_monotonicity_check(&s, &grid, TubeField::Axial { j_angle: 0.0 }).unwrap();
        assert!(rep.pass);
        assert!(rep.values[0] < 1e-3);
        let rep1 = tube_monotonicity_check(&s, &grid, TubeField::Axial { j_angle: 1.0 }).unwrap();
        assert!(rep1.pass);
        // d/dr cosh^2(2kr) = 2k sinh(4kr)
        for (r, v) in grid.iter().zip(&rep1.values) {
            assert!((v - 2.0 * (4.0 * r).sinh()).abs() < 1e-9 * v.max(1.0));
        }
    }

    #[test]
    fn shape_block_is_bounded_below_by_axial_minimum() {
        let s = p(2, 1.0);
        for &r in &[0.2, 1.0, 4.0] {
            let at0 = tube_shape_block(&s, r, 0.0).unwrap();
            assert!((at0[0] - r.tanh()).abs() < 1e-12);
            assert!((at0[1] - 2.0 * coth(2.0 * r)).abs() < 1e-12);
            let at1 = tube_shape_block(&s, r, 1.0).unwrap();
            let (ax, rot) = (2.0 * (2.0 * r).tanh(), coth(r));
            assert!((at1[0] - ax.min(rot)).abs() < 1e-12);
            assert!((at1[1] - ax.max(rot)).abs() < 1e-12);
            for i in 0..=20 {
                let c = i as f64 / 20.0;
                let ev = tube_shape_block(&s, r, c).unwrap();
                assert!(ev[0] >= r.tanh() - 1e-12);
            }
        }
    }
}
