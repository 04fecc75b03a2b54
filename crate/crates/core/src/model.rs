//! Hyperboloid model of complex hyperbolic space `CH^n(-4k^2)`.
//!
//! Points are vectors `z` of `C^{n+1}` with `<z,z> = -1` for the Hermitian form
//! `<z,w> = -z_0 conj(w_0) + sum_j z_j conj(w_j)`, taken up to a unit complex
//! phase. A tangent vector at `p` is represented by its horizontal lift
//! `w` with `<p,w> = 0`.
//!
//! Scaling convention (used everywhere in the crate): the Riemannian metric
//! is `g(u,v) = Re<u,v> / k^2`. A unit tangent vector therefore has an
//! ambient representative with `Re<w,w> = k^2`, the unit-speed geodesic is
//! `cosh(kt) p + sinh(kt) w / k`, and `cosh(k d(p,q)) = |<p,q>|`.
//! The complex structure `J` acts on representatives as multiplication by `i`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{GeometryError, Result};

/// Points whose `<z,z>` is further than this from `-1` are re-projected.
pub const REPROJECT_TOL: f64 = 1e-12;
/// Points whose `<z,z>` is further than this from `-1` are rejected.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Default absolute tolerance for metric comparisons.
pub const COMPARE_TOL: f64 = 1e-9;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Complex dimension `n` and curvature scale `k` of `CH^n(-4k^2)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SpaceParams {
    n: usize,
    k: f64,
}

/// A vector of `C^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientVector(pub Vec<Complex64>);

/// A normalized representative of a point of `CH^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacePoint {
    rep: AmbientVector,
}

/// A tangent vector given by its horizontal lift at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: SpacePoint,
    rep: AmbientVector,
}

impl AmbientVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn basis(len: usize, j: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[j] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `<self, other> = -z_0 conj(w_0) + sum_{j>=1} z_j conj(w_j)`.
    pub fn hermitian(&self, other: &Self) -> Complex64 {
        let mut acc = -self.0[0] * other.0[0].conj();
        for (z, w) in self.0[1..].iter().zip(&other.0[1..]) {
            acc += z * w.conj();
        }
        acc
    }

    /// Plain Euclidean norm of the coordinates, used for tolerance scaling.
    pub fn euclidean_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self(self.0.iter().map(|z| z * c).collect())
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self(self.0.iter().map(|z| z * c).collect())
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: Complex64, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + c * b).collect())
    }
}

impl Add for &AmbientVector {
    type Output = AmbientVector;
    fn add(self, rhs: Self) -> AmbientVector {
        AmbientVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &AmbientVector {
    type Output = AmbientVector;
    fn sub(self, rhs: Self) -> AmbientVector {
        AmbientVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &AmbientVector {
    type Output = AmbientVector;
    fn neg(self) -> AmbientVector {
        AmbientVector(self.0.iter().map(|a| -a).collect())
    }
}

impl Mul<f64> for &AmbientVector {
    type Output = AmbientVector;
    fn mul(self, rhs: f64) -> AmbientVector {
        self.scale_real(rhs)
    }
}

/// `|<z,z> + 1|` within [`NORMALIZATION_TOL`] relative to `max(1, |z|^2)`, the
/// scale of the rounding error of the form.
fn normalized(rep: &AmbientVector, value: f64) -> bool {
    (value + 1.0).abs() <= NORMALIZATION_TOL * rep.euclidean_norm().powi(2).max(1.0)
}

impl SpacePoint {
    /// Accepts a representative with `<z,z> = -1` up to [`NORMALIZATION_TOL`],
    /// re-projecting drift larger than [`REPROJECT_TOL`].
    pub fn new(rep: AmbientVector) -> Result<Self> {
        let value = rep.hermitian(&rep).re;
        if value >= 0.0 || !value.is_finite() {
            return Err(GeometryError::NotTimelike { value });
        }
        if !normalized(&rep, value) {
            return Err(GeometryError::Normalization { value });
        }
        Ok(Self::from_timelike(rep, value))
    }

    /// Normalizes any timelike vector onto the `<z,z> = -1` sheet.
    pub fn normalize(rep: AmbientVector) -> Result<Self> {
        let value = rep.hermitian(&rep).re;
        if value >= 0.0 || !value.is_finite() {
            return Err(GeometryError::NotTimelike { value });
        }
        Ok(Self::from_timelike(rep, value))
    }

    fn from_timelike(rep: AmbientVector, value: f64) -> Self {
        if (value + 1.0).abs() > REPROJECT_TOL * rep.euclidean_norm().powi(2).max(1.0) {
            Self {
                rep: rep.scale_real(1.0 / (-value).sqrt()),
            }
        } else {
            Self { rep }
        }
    }

    pub fn rep(&self) -> &AmbientVector {
        &self.rep
    }

    /// Same representative (not merely the same projective class).
    pub fn same_representative(&self, other: &Self) -> bool {
        if self.rep.len() != other.rep.len() {
            return false;
        }
        let scale = 1.0 + self.rep.euclidean_norm();
        (&self.rep - &other.rep).euclidean_norm() <= 1e-10 * scale
    }
}

impl TangentVector {
    /// Wraps a representative, checking horizontality `<base, rep> = 0`.
    pub fn new(base: SpacePoint, rep: AmbientVector) -> Result<Self> {
        if rep.len() != base.rep.len() {
            return Err(GeometryError::Dimension {
                expected: base.rep.len(),
                got: rep.len(),
            });
        }
        let defect = rep.hermitian(&base.rep).norm();
        let scale = 1.0 + rep.euclidean_norm() * base.rep.euclidean_norm();
        if defect > 1e-9 * scale {
            return Err(GeometryError::Horizontality { defect });
        }
        Ok(Self { base, rep })
    }

    /// Horizontal projection `rep + <rep, p> p` of an arbitrary ambient vector.
    pub fn project(base: SpacePoint, rep: &AmbientVector) -> Self {
        let c = rep.hermitian(&base.rep);
        let rep = rep.axpy(c, &base.rep);
        Self { base, rep }
    }

    pub(crate) fn from_parts(base: SpacePoint, rep: AmbientVector) -> Self {
        Self { base, rep }
    }

    pub fn base(&self) -> &SpacePoint {
        &self.base
    }

    pub fn rep(&self) -> &AmbientVector {
        &self.rep
    }

    /// Complex structure `J`.
    pub fn j(&self) -> Self {
        Self {
            base: self.base.clone(),
            rep: self.rep.scale(I),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            base: self.base.clone(),
            rep: self.rep.scale_real(c),
        }
    }

    /// `self + c * other`; both must share the base point.
    pub fn add_scaled(&self, c: f64, other: &Self) -> Result<Self> {
        check_same_base(self, other)?;
        Ok(Self {
            base: self.base.clone(),
            rep: self.rep.axpy(Complex64::new(c, 0.0), &other.rep),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.rep.0.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }
}

fn check_same_base(u: &TangentVector, v: &TangentVector) -> Result<()> {
    if u.base.same_representative(&v.base) {
        Ok(())
    } else {
        Err(GeometryError::BaseMismatch)
    }
}

/// Orthonormal real frame `{k f_1, i k f_1, ..., k f_n, i k f_n}` of a
/// tangent space, built from a complex-orthonormal basis `f_j` of `p^perp`.
///
/// In frame coordinates `x in R^{2n}` the complex structure acts pairwise as
/// `(x_{2j}, x_{2j+1}) -> (-x_{2j+1}, x_{2j})`.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    base: SpacePoint,
    complex_basis: Vec<AmbientVector>,
    k: f64,
}

impl TangentFrame {
    pub fn base(&self) -> &SpacePoint {
        &self.base
    }

    pub fn real_dim(&self) -> usize {
        2 * self.complex_basis.len()
    }

    /// Tangent vector with frame coordinates `x`.
    pub fn vector(&self, x: &[f64]) -> Result<TangentVector> {
        if x.len() != self.real_dim() {
            return Err(GeometryError::Dimension {
                expected: self.real_dim(),
                got: x.len(),
            });
        }
        let mut rep = AmbientVector::zeros(self.base.rep.len());
        for (j, f) in self.complex_basis.iter().enumerate() {
            let c = Complex64::new(x[2 * j], x[2 * j + 1]) * self.k;
            rep = rep.axpy(c, f);
        }
        Ok(TangentVector::from_parts(self.base.clone(), rep))
    }

    /// Frame coordinates of a tangent vector at the frame's base.
    pub fn coords(&self, v: &TangentVector) -> Result<Vec<f64>> {
        if !self.base.same_representative(&v.base) {
            return Err(GeometryError::BaseMismatch);
        }
        let mut out = Vec::with_capacity(self.real_dim());
        for f in &self.complex_basis {
            let z = v.rep.hermitian(f) / self.k;
            out.push(z.re);
            out.push(z.im);
        }
        Ok(out)
    }

    /// The `j`-th real frame vector.
    pub fn axis(&self, j: usize) -> TangentVector {
        let f = &self.complex_basis[j / 2];
        let c = if j % 2 == 0 {
            Complex64::new(self.k, 0.0)
        } else {
            Complex64::new(0.0, self.k)
        };
        TangentVector::from_parts(self.base.clone(), f.scale(c))
    }
}

/// Applies `J` to frame coordinates.
pub fn j_coords(x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for j in 0..x.len() / 2 {
        out[2 * j] = -x[2 * j + 1];
        out[2 * j + 1] = x[2 * j];
    }
    out
}

impl SpaceParams {
    pub fn new(n: usize, k: f64) -> Result<Self> {
        if n < 2 {
            return Err(GeometryError::Domain(format!(
                "complex dimension must be at least 2, got {n}"
            )));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(GeometryError::Domain(format!(
                "curvature scale must be positive, got {k}"
            )));
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn real_dim(&self) -> usize {
        2 * self.n
    }

    pub fn holomorphic_curvature(&self) -> f64 {
        -4.0 * self.k * self.k
    }

    /// `[-4k^2, -k^2]`.
    pub fn sectional_range(&self) -> (f64, f64) {
        (-4.0 * self.k * self.k, -self.k * self.k)
    }

    /// The point `(1, 0, ..., 0)`.
    pub fn origin(&self) -> SpacePoint {
        SpacePoint {
            rep: AmbientVector::basis(self.n + 1, 0),
        }
    }

    fn check_point(&self, p: &SpacePoint) -> Result<()> {
        if p.rep.len() != self.n + 1 {
            return Err(GeometryError::Dimension {
                expected: self.n + 1,
                got: p.rep.len(),
            });
        }
        Ok(())
    }

    /// `g(u,v) = Re<u,v> / k^2`.
    pub fn metric(&self, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        check_same_base(u, v)?;
        Ok(self.metric_unchecked(u, v))
    }

    pub(crate) fn metric_unchecked(&self, u: &TangentVector, v: &TangentVector) -> f64 {
        u.rep.hermitian(&v.rep).re / (self.k * self.k)
    }

    pub fn norm(&self, v: &TangentVector) -> f64 {
        self.metric_unchecked(v, v).max(0.0).sqrt()
    }

    /// Geodesic distance; symmetric and zero exactly on the projective class.
    pub fn distance(&self, p: &SpacePoint, q: &SpacePoint) -> Result<f64> {
        self.check_point(p)?;
        self.check_point(q)?;
        for pt in [p, q] {
            let value = pt.rep.hermitian(&pt.rep).re;
            if !normalized(&pt.rep, value) {
                return Err(GeometryError::Normalization { value });
            }
        }
        let w = p.rep.hermitian(&q.rep);
        let modulus = w.norm();
        if modulus < 2.0 {
            // Half-chord form: align phases so that <p, q'> = -|<p,q>|, then
            // <p - q', p - q'> = 4 sinh^2(k d / 2). Accurate for nearby points.
            let phase = if modulus > 0.0 { -w / modulus } else { Complex64::new(1.0, 0.0) };
            let aligned = q.rep.scale(phase);
            let diff = &p.rep - &aligned;
            let chord2 = diff.hermitian(&diff).re.max(0.0);
            Ok(2.0 * (chord2.sqrt() / 2.0).asinh() / self.k)
        } else {
            Ok(modulus.acosh() / self.k)
        }
    }

    fn unit_direction(&self, p: &SpacePoint, v: &TangentVector) -> Result<AmbientVector> {
        self.check_point(p)?;
        if !v.base.same_representative(p) {
            return Err(GeometryError::BaseMismatch);
        }
        if v.is_zero() {
            return Err(GeometryError::Degenerate("zero tangent vector".into()));
        }
        let norm = self.norm(v);
        if (norm - 1.0).abs() > COMPARE_TOL {
            return Err(GeometryError::Domain(format!(
                "geodesic direction must be a unit vector, got norm {norm}"
            )));
        }
        Ok(v.rep.scale_real(1.0 / self.k))
    }

    fn geodesic_point(&self, p: &SpacePoint, vhat: &AmbientVector, t: f64) -> SpacePoint {
        let kt = self.k * t;
        let rep = &p.rep.scale_real(kt.cosh()) + &vhat.scale_real(kt.sinh());
        let value = rep.hermitian(&rep).re;
        SpacePoint::from_timelike(rep, value)
    }

    /// Unit-speed geodesic `gamma(t) = cosh(kt) p + sinh(kt) v/k`.
    pub fn exp_map(&self, p: &SpacePoint, v: &TangentVector, t: f64) -> Result<SpacePoint> {
        let vhat = self.unit_direction(p, v)?;
        Ok(self.geodesic_point(p, &vhat, t))
    }

    /// Velocity `gamma'(t)` of the unit-speed geodesic.
    pub fn geodesic_velocity(
        &self,
        p: &SpacePoint,
        v: &TangentVector,
        t: f64,
    ) -> Result<TangentVector> {
        let vhat = self.unit_direction(p, v)?;
        let kt = self.k * t;
        let base = self.geodesic_point(p, &vhat, t);
        let rep = &p.rep.scale_real(kt.sinh()) + &vhat.scale_real(kt.cosh());
        Ok(TangentVector::from_parts(base, rep.scale_real(self.k)))
    }

    /// Parallel transport of `w` along the geodesic from `p` with unit
    /// direction `v`, to parameter `t`.
    ///
    /// With `vhat = v/k`, `w = c vhat + w_perp` where `c = <w, vhat>` is complex;
    /// the `vhat` part rotates with the geodesic and `w_perp` is constant.
    pub fn parallel_transport(
        &self,
        p: &SpacePoint,
        v: &TangentVector,
        w: &TangentVector,
        t: f64,
    ) -> Result<TangentVector> {
        let vhat = self.unit_direction(p, v)?;
        if !w.base.same_representative(p) {
            return Err(GeometryError::BaseMismatch);
        }
        let defect = w.rep.hermitian(&p.rep).norm();
        if defect > 1e-9 * (1.0 + w.rep.euclidean_norm() * p.rep.euclidean_norm()) {
            return Err(GeometryError::Horizontality { defect });
        }
        let c = w.rep.hermitian(&vhat);
        let perp = w.rep.axpy(-c, &vhat);
        let kt = self.k * t;
        let moving = &p.rep.scale_real(kt.sinh()) + &vhat.scale_real(kt.cosh());
        let rep = perp.axpy(c, &moving);
        Ok(TangentVector::from_parts(self.geodesic_point(p, &vhat, t), rep))
    }

    /// Curvature tensor of constant holomorphic curvature `-4k^2`:
    /// `R(u,v)w = -k^2 (g(v,w)u - g(u,w)v + g(Jv,w)Ju - g(Ju,w)Jv + 2 g(Jv,u)Jw)`.
    pub fn curvature_tensor(
        &self,
        u: &TangentVector,
        v: &TangentVector,
        w: &TangentVector,
    ) -> Result<TangentVector> {
        check_same_base(u, v)?;
        check_same_base(u, w)?;
        let g = |a: &TangentVector, b: &TangentVector| self.metric_unchecked(a, b);
        let (ju, jv, jw) = (u.j(), v.j(), w.j());
        let k2 = self.k * self.k;
        let terms = [
            (g(v, w), &u.rep),
            (-g(u, w), &v.rep),
            (g(&jv, w), &ju.rep),
            (-g(&ju, w), &jv.rep),
            (2.0 * g(&jv, u), &jw.rep),
        ];
        let mut rep = AmbientVector::zeros(u.rep.len());
        for (c, vec) in terms {
            rep = rep.axpy(Complex64::new(-k2 * c, 0.0), vec);
        }
        Ok(TangentVector::from_parts(u.base.clone(), rep))
    }

    /// `-k^2 (1 + 3 g(u, Jv)^2)` for an orthonormal pair.
    pub fn sectional_curvature(&self, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        check_same_base(u, v)?;
        let g = |a: &TangentVector, b: &TangentVector| self.metric_unchecked(a, b);
        let defect = (g(u, u) - 1.0)
            .abs()
            .max((g(v, v) - 1.0).abs())
            .max(g(u, v).abs());
        if defect > COMPARE_TOL {
            return Err(GeometryError::Domain(format!(
                "sectional curvature needs an orthonormal pair (defect {defect:e})"
            )));
        }
        let c = g(u, &v.j());
        Ok(-self.k * self.k * (1.0 + 3.0 * c * c))
    }

    /// Orthonormal frame at `p`; the first complex direction is `lead` when given.
    pub fn frame(&self, p: &SpacePoint, lead: Option<&TangentVector>) -> Result<TangentFrame> {
        self.check_point(p)?;
        let mut basis: Vec<AmbientVector> = Vec::with_capacity(self.n);
        let dim = self.n + 1;
        let mut candidates: Vec<AmbientVector> = Vec::new();
        if let Some(v) = lead {
            if !v.base.same_representative(p) {
                return Err(GeometryError::BaseMismatch);
            }
            if v.is_zero() {
                return Err(GeometryError::Degenerate("zero lead vector".into()));
            }
            candidates.push(v.rep.clone());
        }
        candidates.extend((0..dim).map(|j| AmbientVector::basis(dim, j)));
        for c in candidates {
            if basis.len() == self.n {
                break;
            }
            let mut w = c.axpy(c.hermitian(&p.rep), &p.rep);
            for f in &basis {
                let coef = w.hermitian(f);
                w = w.axpy(-coef, f);
            }
            // second pass for stability
            for f in &basis {
                let coef = w.hermitian(f);
                w = w.axpy(-coef, f);
            }
            let norm2 = w.hermitian(&w).re;
            if norm2 > 1e-8 * (1.0 + c.euclidean_norm().powi(2)) {
                basis.push(w.scale_real(1.0 / norm2.sqrt()));
            }
        }
        if basis.len() != self.n {
            return Err(GeometryError::Degenerate("could not complete tangent frame".into()));
        }
        Ok(TangentFrame {
            base: p.clone(),
            complex_basis: basis,
            k: self.k,
        })
    }

    /// Unit tangent vector at `p` from frame coordinates (normalized).
    pub fn unit_vector(&self, frame: &TangentFrame, x: &[f64]) -> Result<TangentVector> {
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(GeometryError::Degenerate("zero direction".into()));
        }
        let xs: Vec<f64> = x.iter().map(|a| a / norm).collect();
        frame.vector(&xs)
    }
}
