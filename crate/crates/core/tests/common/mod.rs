//! Independent oracles: they work in their own hyperboloid coordinates and
//! integrate or sample directly, sharing no code paths with the library.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn herm(a: &[C], b: &[C]) -> C {
    let mut s = -a[0] * b[0].conj();
    for j in 1..a.len() {
        s += a[j] * b[j].conj();
    }
    s
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Complex structure on `R^{2n}` with `z_j = x_{2j} + i x_{2j+1}`.
pub fn jmul(x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for j in 0..x.len() / 2 {
        out[2 * j] = -x[2 * j + 1];
        out[2 * j + 1] = x[2 * j];
    }
    out
}

/// `R(x,y)z` of constant holomorphic curvature `-4k^2` on `R^{2n}`.
pub fn curvature(k: f64, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
    let (jx, jy, jz) = (jmul(x), jmul(y), jmul(z));
    let c = [dot(y, z), -dot(x, z), dot(&jy, z), -dot(&jx, z), 2.0 * dot(x, &jy)];
    (0..x.len())
        .map(|i| -k * k * (c[0] * x[i] + c[1] * y[i] + c[2] * jx[i] + c[3] * jy[i] + c[4] * jz[i]))
        .collect()
}

fn jacobi_rhs(k: f64, t_dir: &[f64], y: &[f64]) -> Vec<f64> {
    curvature(k, y, t_dir, t_dir).iter().map(|v| -v).collect()
}

fn rk4(k: f64, t_dir: &[f64], y0: &[f64], dy0: &[f64], t: f64, steps: usize) -> (Vec<f64>, Vec<f64>) {
    let h = t / steps as f64;
    let (mut y, mut dy) = (y0.to_vec(), dy0.to_vec());
    let axpy = |a: &[f64], c: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, z)| x + c * z).collect() };
    for _ in 0..steps {
        let k1y = dy.clone();
        let k1v = jacobi_rhs(k, t_dir, &y);
        let k2y = axpy(&dy, 0.5 * h, &k1v);
        let k2v = jacobi_rhs(k, t_dir, &axpy(&y, 0.5 * h, &k1y));
        let k3y = axpy(&dy, 0.5 * h, &k2v);
        let k3v = jacobi_rhs(k, t_dir, &axpy(&y, 0.5 * h, &k2y));
        let k4y = axpy(&dy, h, &k3v);
        let k4v = jacobi_rhs(k, t_dir, &axpy(&y, h, &k3y));
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i]);
            dy[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
    }
    (y, dy)
}

/// Solves `Y'' + R(Y, T)T = 0` in a parallel orthonormal frame by RK4 with one
/// Richardson step.
pub fn jacobi_ode(k: f64, t_dir: &[f64], y0: &[f64], dy0: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
    let steps = ((400.0 * k * t).ceil() as usize).max(50);
    let (a, da) = rk4(k, t_dir, y0, dy0, t, steps);
    let (b, db) = rk4(k, t_dir, y0, dy0, t, 2 * steps);
    let rich = |c: &[f64], f: &[f64]| c.iter().zip(f).map(|(x, y)| (16.0 * y - x) / 15.0).collect();
    (rich(&a, &b), rich(&da, &db))
}

pub fn origin(n: usize) -> Vec<C> {
    let mut o = vec![C::new(0.0, 0.0); n + 1];
    o[0] = C::new(1.0, 0.0);
    o
}

/// `exp_o(t u)` for a unit `u` in `R^{2n}`.
pub fn polar_point(k: f64, t: f64, u: &[f64]) -> Vec<C> {
    let (c, s) = ((k * t).cosh(), (k * t).sinh());
    let mut x = vec![C::new(c, 0.0)];
    for j in 0..u.len() / 2 {
        x.push(C::new(s * u[2 * j], s * u[2 * j + 1]));
    }
    x
}

pub fn distance(k: f64, x: &[C], y: &[C]) -> f64 {
    herm(x, y).norm().max(1.0).acosh() / k
}

/// Distance from `x` to the geodesic `s -> (cosh ks, sinh ks, 0, ...)`,
/// restricted to `|s| <= half` when given, and the foot parameter.
///
/// `cosh^2(k d(s)) = a cosh 2ks + b sinh 2ks + c` is minimized where
/// `tanh 2ks = -b/a`.
pub fn distance_to_axis(k: f64, x: &[C], half: Option<f64>) -> (f64, f64) {
    let n = x.len() - 1;
    let o = origin(n);
    let mut e = vec![C::new(0.0, 0.0); n + 1];
    e[1] = C::new(1.0, 0.0);
    let (aa, bb) = (herm(x, &o), herm(x, &e));
    let a = 0.5 * (aa.norm_sqr() + bb.norm_sqr());
    let b = (aa * bb.conj()).re;
    let c = 0.5 * (aa.norm_sqr() - bb.norm_sqr());
    let mut s = (-b / a).atanh() / (2.0 * k);
    if let Some(h) = half {
        s = s.clamp(-h, h);
    }
    let h = a * (2.0 * k * s).cosh() + b * (2.0 * k * s).sinh() + c;
    (h.max(1.0).sqrt().acosh() / k, s)
}

pub fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-3 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

/// Uniform point of the geodesic ball of radius `big_r` about the origin:
/// the radial law has CDF `sinh^{2n}(kt) / sinh^{2n}(kR)`.
pub fn uniform_in_ball(rng: &mut ChaCha8Rng, n: usize, k: f64, big_r: f64) -> Vec<C> {
    let u: f64 = rng.random();
    let t = ((k * big_r).sinh() * u.powf(1.0 / (2 * n) as f64)).asinh() / k;
    let dir = random_unit(rng, 2 * n);
    polar_point(k, t, &dir)
}

/// Closed-form ball volume used to scale hit fractions:
/// `vol(S^{2n-1}) sinh^{2n}(kR) / (2n k^{2n})`.
pub fn ball_volume(n: usize, k: f64, big_r: f64) -> f64 {
    let m = 2 * n;
    let sphere = 2.0 * std::f64::consts::PI.powi(n as i32) / (1..n).map(|i| i as f64).product::<f64>();
    sphere * (k * big_r).sinh().powi(m as i32) / (m as f64 * k.powi(m as i32))
}

pub struct McEstimate {
    pub value: f64,
    pub sigma: f64,
}

/// Rejection sampling of a region inside the ball of radius `big_r`.
pub fn mc_volume(
    n: usize,
    k: f64,
    big_r: f64,
    samples: usize,
    seed: u64,
    inside: impl Fn(&[C]) -> bool,
) -> McEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        if inside(&uniform_in_ball(&mut rng, n, k, big_r)) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let vol = ball_volume(n, k, big_r);
    McEstimate {
        value: vol * p,
        sigma: vol * (p * (1.0 - p) / samples as f64).sqrt(),
    }
}

/// Point of `S^{2n-1}` from hyperspherical angles.
fn hyperspherical(theta: &[f64]) -> Vec<f64> {
    let m = theta.len() + 1;
    let mut u = vec![0.0; m];
    let mut s = 1.0;
    for i in 0..theta.len() {
        u[i] = s * theta[i].cos();
        s *= theta[i].sin();
    }
    u[m - 1] = s;
    u
}

/// Area of `{exp_o(l(u) u)}` as the integral of the Gram determinant of the
/// embedded parametrization by hyperspherical angles, tangent vectors from
/// horizontal parts of central differences of ambient coordinates.
pub fn gram_area(n: usize, k: f64, l: impl Fn(&[f64]) -> f64, nodes: usize) -> f64 {
    use gauss_quad::GaussLegendre;
    let m = 2 * n;
    let dims = m - 1;
    let gl = GaussLegendre::new(std::num::NonZeroUsize::new(nodes).unwrap());
    let (xs, ws): (Vec<f64>, Vec<f64>) = gl.iter().map(|(x, w)| (*x, *w)).unzip();
    let ranges: Vec<(f64, f64)> = (0..dims)
        .map(|i| (0.0, if i + 1 == dims { 2.0 * std::f64::consts::PI } else { std::f64::consts::PI }))
        .collect();
    let embed = |theta: &[f64]| -> Vec<C> {
        let u = hyperspherical(theta);
        polar_point(k, l(&u), &u)
    };
    let h = 1e-6;
    let mut total = 0.0;
    let mut idx = vec![0usize; dims];
    loop {
        let mut theta = vec![0.0; dims];
        let mut w = 1.0;
        for i in 0..dims {
            let (a, b) = ranges[i];
            theta[i] = 0.5 * (a + b) + 0.5 * (b - a) * xs[idx[i]];
            w *= 0.5 * (b - a) * ws[idx[i]];
        }
        let tangents: Vec<Vec<C>> = (0..dims)
            .map(|i| {
                let mut p = theta.clone();
                let mut q = theta.clone();
                p[i] += h;
                q[i] -= h;
                let (xp, xq) = (embed(&p), embed(&q));
                let z = embed(&theta);
                let w: Vec<C> = xp.iter().zip(&xq).map(|(a, b)| (a - b) / (2.0 * h)).collect();
                // Horizontal part: drop the component along the fibre.
                let c = herm(&w, &z);
                w.iter().zip(&z).map(|(a, b)| a + c * b).collect()
            })
            .collect();
        let gram = nalgebra::DMatrix::from_fn(dims, dims, |i, j| herm(&tangents[i], &tangents[j]).re / (k * k));
        total += w * gram.determinant().max(0.0).sqrt();
        let mut d = 0;
        loop {
            idx[d] += 1;
            if idx[d] < nodes {
                break;
            }
            idx[d] = 0;
            d += 1;
            if d == dims {
                return total;
            }
        }
    }
}
