//! Acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use chn_core::asymptotics::{
    audit_cos_phi, bounds, check_bounds, four_limits, run_family, BoundExtras, BoundSource, Family, FamilyOptions,
    LengthSchedule, QuotientSeries,
};
use chn_core::hypersurfaces::{check_feasible, feasibility_threshold};
use chn_core::jacobi::{
    sphere_normal_curvature_at_angle, sphere_normal_curvature_jacobi, tube_monotonicity_check, DirectionClass,
    Geodesic, JacobiField, TubeField,
};
use chn_core::measure::{
    ball_area, ball_normalization, ball_volume, radial_measures, tube_boundary_area, tube_volume_fermi,
    tube_volume_gray, RadialDomain, TubeSpec,
};
use chn_core::quadrature::QuadratureRule;
use chn_core::{GeometryError, SpaceParams, TangentFrame};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PINCH_TOL: f64 = 1e-9;
const HOLOMORPHIC_TOL: f64 = 1e-10;
const SPHERE_TOL: f64 = 1e-9;
const JACOBI_TOL: f64 = 1e-8;
const ZERO_LIMIT_TOL: f64 = 1e-6;
const CLOSED_FORM_TOL: f64 = 1e-10;
const FLAT_TOL: f64 = 1e-6;
const QUOTIENT_TOL: f64 = 1e-12;
const MC_SIGMAS: f64 = 3.0;
const MC_SAMPLES: usize = 1_000_000;
const AREA_TOL: f64 = 1e-6;
const GRAY_SPREAD: f64 = 0.01;
const BALL_TOL: f64 = 1e-10;
const LIMIT_TOL: f64 = 1e-3;
const UPPER_TOL: f64 = 1e-9;
const LOWER_TOL: f64 = 1e-6;
const SMALL_LIMIT: f64 = 1e-5;
const LARGE_LIMIT: f64 = 1e6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn all_params() -> Vec<SpaceParams> {
    let mut v = vec![];
    for n in [2, 3] {
        for k in [0.5, 1.0, 2.0] {
            v.push(SpaceParams::new(n, k).unwrap());
        }
    }
    v
}

fn random_frame(params: &SpaceParams, rng: &mut ChaCha8Rng) -> TangentFrame {
    let o = params.origin();
    let f = params.frame(&o, None).unwrap();
    let v = params.unit_vector(&f, &common::random_unit(rng, params.real_dim())).unwrap();
    let p = params.exp_map(&o, &v, rng.random::<f64>() / params.k()).unwrap();
    params.frame(&p, None).unwrap()
}

fn log_grid(a: f64, b: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

fn curvature_pinching() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let params = all_params();
    let (mut worst_out, mut worst_hol, mut worst_real) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..10_000 {
        let p = &params[i % params.len()];
        let k2 = p.k() * p.k();
        let frame = random_frame(p, &mut rng);
        let dim = p.real_dim();
        let a = common::random_unit(&mut rng, dim);
        let mut b = common::random_unit(&mut rng, dim);
        let c = common::dot(&a, &b);
        b.iter_mut().zip(&a).for_each(|(x, y)| *x -= c * y);
        let nb = common::dot(&b, &b).sqrt();
        b.iter_mut().for_each(|x| *x /= nb);
        let (u, v) = (frame.vector(&a).unwrap(), frame.vector(&b).unwrap());
        let s = p.sectional_curvature(&u, &v).unwrap();
        worst_out = worst_out.max(-4.0 * k2 - s).max(s + k2);
        worst_hol = worst_hol.max((p.sectional_curvature(&u, &u.j()).unwrap() + 4.0 * k2).abs());
        let mut e0 = vec![0.0; dim];
        let mut e2 = vec![0.0; dim];
        e0[0] = 1.0;
        e2[2] = 1.0;
        let real = p
            .sectional_curvature(&frame.vector(&e0).unwrap(), &frame.vector(&e2).unwrap())
            .unwrap();
        worst_real = worst_real.max((real + k2).abs());
    }
    outcome(
        worst_out <= PINCH_TOL && worst_hol <= HOLOMORPHIC_TOL && worst_real <= HOLOMORPHIC_TOL,
        format!("10^4 pairs; max excursion {worst_out:.1e}, |K(u,Ju)+4k^2| {worst_hol:.1e}, |K_real+k^2| {worst_real:.1e}"),
    )
}

fn sphere_spectra() -> Outcome {
    let mut worst = 0.0f64;
    let mut inside = true;
    for p in all_params() {
        let k = p.k();
        for r in log_grid(1e-2, 50.0, 60) {
            let (hi, lo) = (2.0 * k * coth(2.0 * k * r), k * coth(k * r));
            let jn = sphere_normal_curvature_jacobi(&p, r, DirectionClass::J).unwrap();
            let tr = sphere_normal_curvature_jacobi(&p, r, DirectionClass::TotallyReal).unwrap();
            worst = worst.max((jn - hi).abs() / hi).max((tr - lo).abs() / lo);
            for c in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let v = sphere_normal_curvature_at_angle(&p, r, c).unwrap();
                inside &= v >= lo * (1.0 - SPHERE_TOL) && v <= hi * (1.0 + SPHERE_TOL);
            }
        }
    }
    outcome(
        worst <= SPHERE_TOL && inside,
        format!("r in [1e-2, 50]; max relative deviation {worst:.1e}; all angles inside [k coth kr, 2k coth 2kr]: {inside}"),
    )
}

fn jacobi_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let params = SpaceParams::new(2 + i % 2, [0.5, 1.0, 2.0][i % 3]).unwrap();
        let k = params.k();
        let frame = random_frame(&params, &mut rng);
        let dir = params.unit_vector(&frame, &common::random_unit(&mut rng, params.real_dim())).unwrap();
        let g = Geodesic::new(params, frame.base().clone(), dir).unwrap();
        let dim = params.real_dim() - 1;
        let y0: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
        let dy0: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
        let t = 5.0 * rng.random::<f64>();
        let state = JacobiField::from_coords(g, &y0, &dy0).unwrap().propagate_split(t);
        let full = |v: &[f64]| std::iter::once(0.0).chain(v.iter().cloned()).collect::<Vec<f64>>();
        let mut e0 = vec![0.0; dim + 1];
        e0[0] = 1.0;
        let (y, dy) = common::jacobi_ode(k, &e0, &full(&y0), &full(&dy0), t);
        let rel = |a: &[f64], b: &[f64]| {
            let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            d / b.iter().map(|x| x * x).sum::<f64>().sqrt()
        };
        worst = worst.max(rel(&state.value_coords(), &y[1..])).max(rel(&state.derivative_coords(), &dy[1..]));
    }
    outcome(worst <= JACOBI_TOL, format!("100 initial conditions, t <= 5; max relative error {worst:.1e}"))
}

fn tube_convexity() -> Outcome {
    let grid = log_grid(1e-4, 5.0, 200);
    let mut failures = vec![];
    let mut worst_limit = 0.0f64;
    for p in all_params() {
        for c in [0.0, 0.25, 0.5, 0.75, 1.0] {
            for field in [TubeField::Axial { j_angle: c }, TubeField::SphereLike { j_angle: c }] {
                let rep = tube_monotonicity_check(&p, &grid, field).unwrap();
                worst_limit = worst_limit.max(rep.limit_at_zero.abs());
                if !rep.pass || rep.limit_at_zero.abs() > ZERO_LIMIT_TOL {
                    failures.push(format!("{field:?} n={} k={}", p.n(), p.k()));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("60 field/param cases; max |limit at 0| {worst_limit:.1e}; failures {failures:?}"),
    )
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn volume_consistency() -> Outcome {
    let mut worst_closed = 0.0f64;
    let mut worst_q = 0.0f64;
    for p in all_params() {
        let rule = QuadratureRule::constant_exact(p.n()).unwrap();
        let nf = p.n() as f64;
        for r in [0.1, 1.0, 3.0, 7.5] {
            let m = radial_measures(&RadialDomain::ball(p, &p.origin(), r).unwrap(), &rule).unwrap();
            worst_closed = worst_closed
                .max((m.volume.value / ball_volume(r, &p).unwrap() - 1.0).abs())
                .max((m.area.value / ball_area(r, &p).unwrap() - 1.0).abs());
            worst_q = worst_q.max((m.quotient - (p.k() * r).tanh() / (2.0 * nf * p.k())).abs());
            let b = ball_normalization(r, &p).unwrap();
            worst_q = worst_q.max(b.quotient_difference);
        }
    }
    let mut worst_flat = 0.0f64;
    let mut flagged = true;
    for n in [2usize, 3] {
        let p = SpaceParams::new(n, 1e-4).unwrap();
        let m = 2 * n;
        for r in [0.5f64, 1.0, 2.0] {
            let flat_ball = std::f64::consts::PI.powi(n as i32) * r.powi(m as i32) / factorial(n);
            worst_flat = worst_flat.max((ball_volume(r, &p).unwrap() / flat_ball - 1.0).abs());
            let len = 3.0;
            // |B^{2n-1}| = 2 pi^{n-1/2} / ((2n-1) Gamma(n - 1/2)), Gamma(n-1/2) by recursion.
            let mut g = std::f64::consts::PI.sqrt();
            for j in 1..n {
                g *= j as f64 - 0.5;
            }
            let unit = 2.0 * std::f64::consts::PI.powf(n as f64 - 0.5) / ((m - 1) as f64 * g);
            let flat_cyl = unit * r.powi(m as i32 - 1) * len;
            let spec = TubeSpec::standard(&p, r, Some(len)).unwrap();
            worst_flat = worst_flat.max((tube_volume_fermi(&spec, &p).unwrap() / flat_cyl - 1.0).abs());
            let b = ball_normalization(r, &p).unwrap();
            flagged &= b.discrepancy && (b.volume_factor - m as f64).abs() < 1e-9;
        }
    }
    outcome(
        worst_closed <= CLOSED_FORM_TOL && worst_flat <= FLAT_TOL && worst_q <= QUOTIENT_TOL && flagged,
        format!(
            "closed forms {worst_closed:.1e}; flat limits {worst_flat:.1e}; 2n factor flagged: {flagged}; quotient deviation {worst_q:.1e}"
        ),
    )
}

fn tube_oracles() -> Outcome {
    let (n, k, r, len) = (2, 1.0, 1.0, 2.0);
    let p = SpaceParams::new(n, k).unwrap();
    let spec = TubeSpec::standard(&p, r, Some(len)).unwrap();
    let half = 0.5 * len;
    let started = Instant::now();
    let mc = common::mc_volume(n, k, r + half, MC_SAMPLES, 2024, |x| {
        let (d, s) = common::distance_to_axis(k, x, None);
        d <= r && s.abs() <= half
    });
    let mc_secs = started.elapsed().as_secs_f64();
    let v = tube_volume_fermi(&spec, &p).unwrap();
    let sigmas = (v - mc.value).abs() / mc.sigma;

    let mut worst_area = 0.0f64;
    for r in [0.5, 1.0, 2.0, 3.0] {
        let h = 1e-4;
        let vol = |r: f64| tube_volume_fermi(&TubeSpec::standard(&p, r, Some(len)).unwrap(), &p).unwrap();
        let deriv = (vol(r + h) - vol(r - h)) / (2.0 * h);
        let area = tube_boundary_area(&TubeSpec::standard(&p, r, Some(len)).unwrap(), &p).unwrap().value;
        worst_area = worst_area.max((area / deriv - 1.0).abs());
    }
    let ratios: Vec<f64> = (0..=10)
        .map(|i| {
            let s = TubeSpec::standard(&p, 0.5 + 0.25 * i as f64, Some(1.0)).unwrap();
            tube_volume_gray(&s, &p).unwrap() / tube_volume_fermi(&s, &p).unwrap()
        })
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let spread = hi / lo - 1.0;
    outcome(
        sigmas <= MC_SIGMAS && worst_area <= AREA_TOL && spread <= GRAY_SPREAD,
        format!(
            "fermi {v:.6} vs MC {:.6} ± {:.1e} ({sigmas:.2} sigma, {mc_secs:.1}s); area vs d/dr volume {worst_area:.1e}; gray/fermi = {:.6} spread {spread:.1e}",
            mc.value, mc.sigma, ratios[0]
        ),
    )
}

fn feasibility() -> Outcome {
    let mut decreasing = true;
    let mut worst_ratio = 0.0f64;
    let mut rejected = true;
    for p in all_params() {
        let k = p.k();
        let grid = log_grid(1e-2, 2.0 / k, 100)
            .into_iter()
            .chain(log_grid(2.0 / k, 12.0 / k, 100).into_iter().skip(1))
            .collect::<Vec<_>>();
        let values: Vec<f64> = grid.iter().map(|&r| feasibility_threshold(r, &p).unwrap()).collect();
        decreasing &= values.windows(2).all(|w| w[1] < w[0]);
        for (&r, &v) in grid.iter().zip(&values) {
            if k * r >= 2.0 {
                worst_ratio = worst_ratio.max((v - k).abs() / (2.0 * k * (-2.0 * k * r).exp()));
            }
        }
        rejected &= matches!(check_feasible(1.01 * k, &p), Err(GeometryError::Infeasible { .. }))
            && matches!(
                bounds(BoundSource::Theorem2, 1.01 * k, &p, BoundExtras::default()),
                Err(GeometryError::Infeasible { .. })
            );
    }
    let within = worst_ratio <= 1.0;
    outcome(
        decreasing && within && rejected,
        format!(
            "strictly decreasing: {decreasing}; max |threshold-k| / (2k e^(-2kr)) over kr >= 2 = {worst_ratio:.6} (exact excess is 2k e^(-2kr)/(1-e^(-2kr))); lambda = 1.01k rejected: {rejected}"
        ),
    )
}

struct Families {
    balls: QuotientSeries,
    modified: Vec<(f64, QuotientSeries)>,
    audited: QuotientSeries,
    cap_ball: QuotientSeries,
}

fn run_families(p: &SpaceParams) -> Families {
    let opts = FamilyOptions::default();
    let ball_grid: Vec<f64> = (2..=30).map(|i| 0.5 * i as f64).collect();
    let balls = run_family(&Family::Balls, &ball_grid, p, &opts).unwrap();
    let grid: Vec<f64> = (1..=15).map(|i| i as f64).collect();
    let modified = [0.5, 1.0, 2.0]
        .iter()
        .map(|&alpha| (alpha, run_family(&Family::ModifiedTubes { alpha }, &grid, p, &opts).unwrap()))
        .collect();
    let audit_grid: Vec<f64> = vec![0.5, 1.0, 2.0, 3.0, 4.0, 5.0];
    let audited = run_family(
        &Family::ModifiedTubes { alpha: 1.0 },
        &audit_grid,
        p,
        &FamilyOptions { audit_cos_phi: true, ..opts },
    )
    .unwrap();
    let cap_ball = run_family(&Family::TubeCapBall { ratio: 2.0 }, &[13.0, 14.0, 15.0], p, &opts).unwrap();
    Families {
        balls,
        modified,
        audited,
        cap_ball,
    }
}

fn upper_bound(fam: &Families, p: &SpaceParams) -> Outcome {
    let k = p.k();
    let nf = p.n() as f64;
    let exact = fam
        .balls
        .samples
        .iter()
        .map(|s| (s.quotient - (k * s.t).tanh() / (2.0 * nf * k)).abs())
        .fold(0.0, f64::max);
    let at15 = fam.balls.samples.iter().find(|s| s.t == 15.0).unwrap().quotient;
    let cap = 1.0 / (2.0 * nf * k);
    let mut series: Vec<&QuotientSeries> = vec![&fam.balls, &fam.audited, &fam.cap_ball];
    series.extend(fam.modified.iter().map(|(_, s)| s));
    let worst = series
        .iter()
        .flat_map(|s| s.samples.iter())
        .map(|s| s.quotient - cap)
        .fold(f64::NEG_INFINITY, f64::max);
    let bset = bounds(BoundSource::Theorem2, fam.balls.tail_lambda(p), p, BoundExtras::default()).unwrap();
    let report = check_bounds(&fam.balls, &bset, UPPER_TOL).unwrap();
    outcome(
        exact <= BALL_TOL && (at15 - 0.25).abs() < LIMIT_TOL && worst <= UPPER_TOL && report.pass,
        format!(
            "balls: max |q - tanh(t)/4| {exact:.1e}, q(15) = {at15:.12}; max sample excess over 1/(2nk) across {} series {worst:.2e}",
            series.len()
        ),
    )
}

fn lower_bound(fam: &Families, p: &SpaceParams) -> Outcome {
    let k = p.k();
    let nf = p.n() as f64;
    let mut tail_ok = true;
    let mut worst_tail = f64::INFINITY;
    for (_, s) in &fam.modified {
        let lambda = s.tail_lambda(p);
        let margin = s.tail_liminf_est - lambda / (4.0 * nf * k * k);
        worst_tail = worst_tail.min(margin);
        tail_ok &= margin >= -LOWER_TOL;
    }
    let audits = audit_cos_phi(&fam.audited, p, LOWER_TOL);
    let applied: Vec<_> = audits.iter().filter(|a| a.applies).collect();
    let cos_ok = !applied.is_empty() && applied.iter().all(|a| a.pass);
    let worst_cos = applied
        .iter()
        .map(|a| a.min_cos_phi - a.bound)
        .fold(f64::INFINITY, f64::min);
    outcome(
        tail_ok && cos_ok,
        format!(
            "tail quotient - lambda/(4nk^2) >= {worst_tail:.4}; min cos phi - lambda/(2k) >= {worst_cos:.4} on {} of {} audited members past the branch point",
            applied.len(),
            audits.len()
        ),
    )
}

fn limits(fam: &Families, p: &SpaceParams) -> Outcome {
    let fl = four_limits(p, &[5.0, 10.0, 15.0], LengthSchedule::Exponential).unwrap();
    let [a, b, c, d] = fl.terminal().ratios();
    let four_ok = (a - 4.0).abs() < LIMIT_TOL && b < SMALL_LIMIT && c > LARGE_LIMIT && (d - 4.0).abs() < LIMIT_TOL;
    let q15 = |s: &QuotientSeries| s.samples.last().unwrap().quotient;
    let mod_dev = fam.modified.iter().map(|(_, s)| (q15(s) - 0.25).abs()).fold(0.0, f64::max);
    let cap_dev = (q15(&fam.cap_ball) - 0.25).abs();
    outcome(
        four_ok && mod_dev < LIMIT_TOL && cap_dev < LIMIT_TOL,
        format!(
            "four limits at r=15 (L = e^r): ({a:.6}, {b:.2e}, {c:.2e}, {d:.6}); modified tubes alpha in {{0.5,1,2}} max |q(15)-0.25| {mod_dev:.1e}; tube-cap-ball q(15) = {:.9}",
            q15(&fam.cap_ball)
        ),
    )
}

fn theorem_b() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let mut equal = true;
    let mut inside = true;
    for _ in 0..100 {
        let n = rng.random_range(2..8usize);
        let k = 0.05 + 5.0 * rng.random::<f64>();
        let p = SpaceParams::new(n, k).unwrap();
        let lambda = k * (1.0 - rng.random::<f64>());
        let t2 = bounds(BoundSource::Theorem2, lambda, &p, BoundExtras::default()).unwrap();
        let tb = bounds(BoundSource::TheoremB, lambda, &p, BoundExtras { d: Some(2), ..Default::default() }).unwrap();
        let c = bounds(BoundSource::CorollaryChn, lambda, &p, BoundExtras::default()).unwrap();
        equal &= t2.lower.to_bits() == tb.lower.to_bits() && t2.upper.to_bits() == tb.upper.to_bits();
        inside &= c.lower < t2.lower && t2.upper < c.upper;
    }
    outcome(equal && inside, format!("100 draws; bitwise equal: {equal}; strictly inside corollary: {inside}"))
}

fn determinism() -> Outcome {
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_chn"))
            .args(args)
            .env_remove("CHN_WORKERS")
            .output()
            .expect("run chn")
    };
    let csv = ["sweep", "--family", "tube-cap-ball", "--t", "1:4:1", "--seed", "3"];
    let json = ["sweep", "--family", "modified-tubes", "--t", "1:8:1", "--alpha", "2", "--format", "json"];
    let mc = ["measure", "--shape", "tube-cap-ball", "--r", "1", "--R", "2", "--rule", "mc", "--seed", "9"];
    let mut same = true;
    for args in [&csv[..], &json[..], &mc[..]] {
        let (a, b) = (run(args), run(args));
        same &= a.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout;
    }
    outcome(same, format!("csv, json and seeded MC runs byte-identical: {same}"))
}

fn main() -> ExitCode {
    let p = SpaceParams::new(2, 1.0).unwrap();
    let started = Instant::now();
    let fam = run_families(&p);
    let family_secs = started.elapsed().as_secs_f64();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("curvature pinching", Box::new(curvature_pinching)),
        ("sphere spectra", Box::new(sphere_spectra)),
        ("jacobi oracle", Box::new(jacobi_oracle)),
        ("tube convexity", Box::new(tube_convexity)),
        ("volume consistency", Box::new(volume_consistency)),
        ("tube oracles", Box::new(tube_oracles)),
        ("feasibility", Box::new(feasibility)),
        ("upper bound and sharpness", Box::new(|| upper_bound(&fam, &p))),
        ("lower bound", Box::new(|| lower_bound(&fam, &p))),
        ("limits", Box::new(|| limits(&fam, &p))),
        ("theoremB consistency", Box::new(theorem_b)),
        ("determinism", Box::new(determinism)),
    ];
    // Criterion 7's inequality is below the exact excess of k coth(kr) over k.
    let unattainable = [7];
    let mut blocking = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && unattainable.contains(&id) { " [unattainable as stated]" } else { "" };
        println!("{tag} {id:>2} {name}: {}{note}", o.detail);
        if !o.pass && !unattainable.contains(&id) {
            blocking += 1;
        }
    }
    println!("family sweeps: {family_secs:.1}s");
    if blocking > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
