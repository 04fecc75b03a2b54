//! Integration over the unit sphere `S^{2n-1}` of a tangent space, with the
//! round measure. Points are given in real orthonormal frame coordinates, with
//! the complex structure acting as in [`crate::model::j_coords`].

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::{GaussJacobi, GaussLegendre};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{domain, GeometryError, Result};
use crate::model::j_coords;
use crate::special::{compensated_sum, sphere_volume};

/// Default node count for the zonal rule.
pub const DEFAULT_ZONAL_NODES: usize = 64;
/// Default sample count for (quasi) Monte Carlo.
pub const DEFAULT_QMC_SAMPLES: usize = 1 << 16;

/// Which family of rule, with its defining parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum RuleKind {
    /// One node carrying the whole sphere volume; exact for constants.
    ConstantExact,
    /// Functions of `<u, axis>` only: Gauss-Jacobi in that coordinate.
    Zonal { axis: Vec<f64>, nodes: usize },
    /// Functions of the complex coordinate `z = <u,axis> + i<u,J axis>` only.
    /// Product of composite Gauss-Legendre rules in `(1 - |z|^2, arg z)`,
    /// graded geometrically toward `|z| = 1` and toward `arg z in {0, pi}`.
    /// With `even` set, only `arg z in [0, pi/2]` is sampled, which is valid
    /// for functions even in both `Re z` and `Im z`.
    Bizonal {
        axis: Vec<f64>,
        panels: usize,
        depth: usize,
        nodes: usize,
        even: bool,
    },
    /// Tensor rule in hyperspherical coordinates.
    Product { nodes: usize },
    MonteCarlo { samples: usize, seed: u64 },
    /// Halton points pushed to the sphere through the normal quantile.
    /// A nonzero sequence id applies a seeded random shift.
    Qmc { samples: usize, sequence: u64 },
}

/// A value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    n: usize,
    kind: RuleKind,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    companion: Option<Box<QuadratureRule>>,
}

fn nz(v: usize) -> Result<NonZeroUsize> {
    NonZeroUsize::new(v).ok_or_else(|| GeometryError::Degenerate("rule needs at least one node".into()))
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return domain(format!("complex dimension must be at least 2, got {n}"));
    }
    Ok(())
}

fn unit_axis(axis: &[f64], dim: usize) -> Result<Vec<f64>> {
    if axis.len() != dim {
        return Err(GeometryError::Dimension {
            expected: dim,
            got: axis.len(),
        });
    }
    let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(GeometryError::Degenerate("zero axis".into()));
    }
    Ok(axis.iter().map(|x| x / norm).collect())
}

/// A unit vector orthogonal to all of `span`, from Gram-Schmidt on the
/// standard basis.
fn orthogonal_unit(span: &[&[f64]], dim: usize) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for j in 0..dim {
        let mut v = vec![0.0; dim];
        v[j] = 1.0;
        for s in span {
            let d: f64 = v.iter().zip(s.iter()).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(s.iter()) {
                *x -= d * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if best.as_ref().is_none_or(|(b, _)| norm > *b + 1e-12) {
            best = Some((norm, v.iter().map(|x| x / norm).collect()));
        }
    }
    best.expect("dimension is positive").1
}

pub(crate) fn gauss_jacobi(nodes: usize, alpha: f64) -> Result<Vec<(f64, f64)>> {
    let a = alpha
        .try_into()
        .map_err(|_| GeometryError::Domain(format!("invalid Jacobi exponent {alpha}")))?;
    let rule = GaussJacobi::new(nz(nodes)?, a, a);
    Ok(rule.iter().map(|(x, w)| (*x, *w)).collect())
}

/// Gauss-Legendre nodes and weights mapped to `[a, b]`.
fn legendre_on(rule: &GaussLegendre, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    rule.iter().map(move |(x, w)| (mid + half * x, half * w))
}

/// Breakpoints of `[a, b]`: a uniform grid of `panels` cells plus, around each
/// attractor, points at geometric distances `h/2, h/4, ..., h/2^depth`.
pub(crate) fn graded_breakpoints(a: f64, b: f64, panels: usize, depth: usize, attractors: &[f64]) -> Vec<f64> {
    let h = (b - a) / panels as f64;
    let mut pts: Vec<f64> = (0..=panels).map(|j| a + h * j as f64).collect();
    for &c in attractors {
        let mut step = h;
        for _ in 0..depth {
            step *= 0.5;
            for p in [c - step, c + step] {
                if p > a && p < b {
                    pts.push(p);
                }
            }
        }
    }
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-300_f64.max(1e-15 * y.abs()));
    pts
}

pub(crate) fn composite(breaks: &[f64], rule: &GaussLegendre) -> Vec<(f64, f64)> {
    breaks
        .windows(2)
        .flat_map(|w| legendre_on(rule, w[0], w[1]).collect::<Vec<_>>())
        .collect()
}

/// Tensor nodes on the unit sphere of `R^dim` (`dim >= 2`).
fn product_nodes(dim: usize, nodes: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    if dim == 2 {
        let m = 2 * nodes;
        let w = 2.0 * PI / m as f64;
        return Ok((0..m)
            .map(|j| {
                let th = 2.0 * PI * (j as f64 + 0.5) / m as f64;
                (vec![th.cos(), th.sin()], w)
            })
            .collect());
    }
    // dS_{dim-1} = (1-x^2)^{(dim-3)/2} dx dS_{dim-2}
    let outer = gauss_jacobi(nodes, (dim as f64 - 3.0) / 2.0)?;
    let inner = product_nodes(dim - 1, nodes)?;
    let mut out = Vec::with_capacity(outer.len() * inner.len());
    for &(x, wx) in &outer {
        let s = (1.0 - x * x).max(0.0).sqrt();
        for (v, wv) in &inner {
            let mut p = Vec::with_capacity(dim);
            p.push(x);
            p.extend(v.iter().map(|c| s * c));
            out.push((p, wx * wv));
        }
    }
    Ok(out)
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while i > 0 {
        f /= b;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut c = 2u64;
    while primes.len() < count {
        if primes.iter().all(|p| c % p != 0) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

fn standard_normal_quantile(u: f64) -> f64 {
    -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * u)
}

impl QuadratureRule {
    fn from_nodes(n: usize, kind: RuleKind, nodes: Vec<(Vec<f64>, f64)>) -> Self {
        let (points, weights) = nodes.into_iter().unzip();
        Self {
            n,
            kind,
            points,
            weights,
            companion: None,
        }
    }

    fn with_companion(mut self, companion: Option<QuadratureRule>) -> Self {
        self.companion = companion.map(Box::new);
        self
    }

    pub fn constant_exact(n: usize) -> Result<Self> {
        check_n(n)?;
        let mut e = vec![0.0; 2 * n];
        e[0] = 1.0;
        Ok(Self::from_nodes(
            n,
            RuleKind::ConstantExact,
            vec![(e, sphere_volume(2 * n - 1))],
        ))
    }

    /// Zonal rule about `axis`, exact for polynomials in `<u, axis>` of degree
    /// below `2 * nodes`.
    pub fn zonal(n: usize, axis: &[f64], nodes: usize) -> Result<Self> {
        Self::zonal_inner(n, axis, nodes, true)
    }

    fn zonal_inner(n: usize, axis: &[f64], nodes: usize, companion: bool) -> Result<Self> {
        check_n(n)?;
        let dim = 2 * n;
        let a = unit_axis(axis, dim)?;
        let w = orthogonal_unit(&[&a], dim);
        let scale = sphere_volume(dim - 2);
        let pts = gauss_jacobi(nodes, (dim as f64 - 3.0) / 2.0)?
            .into_iter()
            .map(|(x, wt)| {
                let s = (1.0 - x * x).max(0.0).sqrt();
                let p: Vec<f64> = a.iter().zip(&w).map(|(ai, wi)| x * ai + s * wi).collect();
                (p, scale * wt)
            })
            .collect();
        let comp = if companion && nodes > 1 {
            Some(Self::zonal_inner(n, axis, nodes / 2, false)?)
        } else {
            None
        };
        Ok(Self::from_nodes(
            n,
            RuleKind::Zonal {
                axis: a,
                nodes,
            },
            pts,
        )
        .with_companion(comp))
    }

    /// Rule for functions of the complex coordinate along `axis`.
    ///
    /// `panels` uniform cells in each coordinate, refined `depth` times
    /// geometrically toward the complex line and the real axis, with `nodes`
    /// Gauss-Legendre points per cell.
    pub fn bizonal(n: usize, axis: &[f64], panels: usize, depth: usize, nodes: usize) -> Result<Self> {
        Self::bizonal_inner(n, axis, panels, depth, nodes, false, true)
    }

    /// As [`bizonal`](Self::bizonal) for functions even in `Re z` and in
    /// `Im z`; the eligibility is the caller's responsibility.
    pub fn bizonal_even(n: usize, axis: &[f64], panels: usize, depth: usize, nodes: usize) -> Result<Self> {
        Self::bizonal_inner(n, axis, panels, depth, nodes, true, true)
    }

    fn bizonal_inner(
        n: usize,
        axis: &[f64],
        panels: usize,
        depth: usize,
        nodes: usize,
        even: bool,
        companion: bool,
    ) -> Result<Self> {
        check_n(n)?;
        if panels == 0 {
            return Err(GeometryError::Degenerate("bizonal rule needs panels".into()));
        }
        let dim = 2 * n;
        let a = unit_axis(axis, dim)?;
        let ja = j_coords(&a);
        let w = orthogonal_unit(&[&a, &ja], dim);
        let gl = GaussLegendre::new(nz(nodes)?);
        // sigma = 1 - |z|^2; the measure is omega_{2n-3} sigma^{n-2}/2 dsigma dpsi.
        let sig = composite(&graded_breakpoints(0.0, 1.0, panels, depth, &[0.0]), &gl);
        let psi = if even {
            let quarter = composite(&graded_breakpoints(0.0, 0.5 * PI, panels, depth, &[0.0]), &gl);
            quarter.into_iter().map(|(x, w)| (x, 4.0 * w)).collect()
        } else {
            composite(
                &graded_breakpoints(0.0, 2.0 * PI, 2 * panels, depth, &[0.0, PI, 2.0 * PI]),
                &gl,
            )
        };
        let scale = if n == 2 { 2.0 * PI } else { sphere_volume(2 * n - 3) };
        let mut pts = Vec::with_capacity(sig.len() * psi.len());
        for &(s, ws) in &sig {
            let rho = (1.0 - s).max(0.0).sqrt();
            let ws = ws * 0.5 * s.powi(n as i32 - 2) * scale;
            let t = s.max(0.0).sqrt();
            for &(ps, wp) in &psi {
                let (ca, cb) = (rho * ps.cos(), rho * ps.sin());
                let p: Vec<f64> = (0..dim).map(|i| ca * a[i] + cb * ja[i] + t * w[i]).collect();
                pts.push((p, ws * wp));
            }
        }
        let comp = if companion && nodes > 1 {
            Some(Self::bizonal_inner(n, axis, panels, depth, nodes / 2, even, false)?)
        } else {
            None
        };
        Ok(Self::from_nodes(
            n,
            RuleKind::Bizonal {
                axis: a,
                panels,
                depth,
                nodes,
                even,
            },
            pts,
        )
        .with_companion(comp))
    }

    /// Tensor-product rule with `nodes` Gauss-Jacobi points per polar angle and
    /// `2 * nodes` trapezoid points on the last circle.
    pub fn product(n: usize, nodes: usize) -> Result<Self> {
        Self::product_inner(n, nodes, true)
    }

    fn product_inner(n: usize, nodes: usize, companion: bool) -> Result<Self> {
        check_n(n)?;
        let pts = product_nodes(2 * n, nodes)?;
        let comp = if companion && nodes > 1 {
            Some(Self::product_inner(n, nodes / 2, false)?)
        } else {
            None
        };
        Ok(Self::from_nodes(n, RuleKind::Product { nodes }, pts).with_companion(comp))
    }

    pub fn monte_carlo(n: usize, samples: usize, seed: u64) -> Result<Self> {
        check_n(n)?;
        if samples < 2 {
            return Err(GeometryError::Degenerate("Monte Carlo needs at least two samples".into()));
        }
        let dim = 2 * n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = sphere_volume(dim - 1) / samples as f64;
        let pts = (0..samples)
            .map(|_| {
                let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                (normalize(v), w)
            })
            .collect();
        Ok(Self::from_nodes(n, RuleKind::MonteCarlo { samples, seed }, pts))
    }

    pub fn qmc(n: usize, samples: usize, sequence: u64) -> Result<Self> {
        Self::qmc_inner(n, samples, sequence, true)
    }

    fn qmc_inner(n: usize, samples: usize, sequence: u64, companion: bool) -> Result<Self> {
        check_n(n)?;
        if samples < 2 {
            return Err(GeometryError::Degenerate("QMC needs at least two samples".into()));
        }
        let dim = 2 * n;
        let primes = first_primes(dim);
        let shift: Vec<f64> = if sequence == 0 {
            vec![0.0; dim]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(sequence);
            (0..dim).map(|_| rng.random::<f64>()).collect()
        };
        let w = sphere_volume(dim - 1) / samples as f64;
        let pts = (1..=samples as u64)
            .map(|i| {
                let v: Vec<f64> = primes
                    .iter()
                    .zip(&shift)
                    .map(|(&b, &s)| {
                        let u = (radical_inverse(i, b) + s).fract().clamp(1e-300, 1.0 - 1e-16);
                        standard_normal_quantile(u)
                    })
                    .collect();
                (normalize(v), w)
            })
            .collect();
        let comp = if companion {
            Some(Self::qmc_inner(n, samples / 2, sequence, false)?)
        } else {
            None
        };
        Ok(Self::from_nodes(n, RuleKind::Qmc { samples, sequence }, pts).with_companion(comp))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &RuleKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The coarser rule used for the error estimate of deterministic rules.
    pub fn companion(&self) -> Option<&QuadratureRule> {
        self.companion.as_deref()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Evaluates `f` at every node (in parallel, in node order).
    pub fn evaluate<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, &[f64]) -> T + Sync,
    {
        self.points
            .par_iter()
            .enumerate()
            .map(|(i, p)| f(i, p))
            .collect()
    }

    /// Weighted sum of precomputed node values.
    pub fn sum(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(GeometryError::Dimension {
                expected: self.len(),
                got: values.len(),
            });
        }
        if let Some(node) = values.iter().position(|v| v.is_nan()) {
            return Err(GeometryError::NotANumber { node });
        }
        Ok(compensated_sum(
            self.weights.iter().zip(values).map(|(w, v)| w * v),
        ))
    }

    /// Standard error of the sample mean for Monte Carlo rules.
    pub fn sampling_error(&self, values: &[f64]) -> Option<f64> {
        match &self.kind {
            RuleKind::MonteCarlo { samples, .. } => {
                let n = *samples as f64;
                let mean = values.iter().sum::<f64>() / n;
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                Some(sphere_volume(2 * self.n - 1) * (var / n).sqrt())
            }
            _ => None,
        }
    }

    fn error_from(&self, value: f64, values: &[f64], companion: Option<f64>) -> f64 {
        if let Some(e) = self.sampling_error(values) {
            return e;
        }
        match (&self.kind, companion) {
            (RuleKind::ConstantExact, _) => 0.0,
            (_, Some(c)) => (value - c).abs(),
            (_, None) => f64::NAN,
        }
    }

    /// Integral of `f` over the sphere with an error estimate.
    pub fn integrate<F>(&self, f: F) -> Result<Estimate>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        self.try_integrate(|u| Ok(f(u)))
    }

    /// As [`integrate`](Self::integrate) for fallible integrands; the first
    /// failing node (in node order) determines the error.
    pub fn try_integrate<F>(&self, f: F) -> Result<Estimate>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let values: Vec<f64> = self
            .evaluate(|_, u| f(u))
            .into_iter()
            .collect::<Result<_>>()?;
        let value = self.sum(&values)?;
        let companion = match &self.companion {
            Some(c) => {
                let cv: Vec<f64> = c.evaluate(|_, u| f(u)).into_iter().collect::<Result<_>>()?;
                Some(c.sum(&cv)?)
            }
            None => None,
        };
        Ok(Estimate {
            value,
            error: self.error_from(value, &values, companion),
        })
    }
}
