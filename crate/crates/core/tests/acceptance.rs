//! Acceptance suite: one PASS/FAIL line per criterion. Criteria 1-10 run in a
//! one-thread pool and again in an eight-thread pool; criterion 11 compares the
//! bit patterns of everything they computed.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zlattice::convolution::{convolve, ConvOptions, ConvPlan};
use zlattice::error::Result;
use zlattice::fixtures::{binomial_transform, diagonal_points, diagonal_sequence, gaussian_pencil_problem, probability_transform, weyl_two_term_symbol};
use zlattice::fractional::{cesaro, weyl_am, WeylOperatorSpec};
use zlattice::generators::gaussian_decay;
use zlattice::lattice::{IndexBox, LatticeDomain, MultiIndex};
use zlattice::linalg::CMatrix;
use zlattice::sequence::{SequenceTable, ValueKind};
use zlattice::solver::{
    covering_kernel_window, homogeneous_mode_check, pencil_root, polycircle_samples, required_solution_window, solve,
    uniqueness_probe, OperatorPencil, Problem, SolveOptions, SymbolVariant, VolterraSymbol, WeylTerm,
    DEFAULT_PROBE_THRESHOLD,
};
use zlattice::ztransform::{eval_forward, invert_contour, TransformEvaluator};

/// Bit patterns of computed values, compared across thread counts.
#[derive(Default, PartialEq)]
struct Trace(Vec<u64>);

impl Trace {
    fn values(&mut self, v: &[Complex64]) {
        for z in v {
            self.0.push(z.re.to_bits());
            self.0.push(z.im.to_bits());
        }
    }

    fn table(&mut self, t: &SequenceTable) {
        self.values(t.values());
    }

    fn scalar(&mut self, x: f64) {
        self.0.push(x.to_bits());
    }
}

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { passed, detail })
}

type Criterion = fn(&mut Trace) -> Result<Verdict>;

fn probability(trace: &mut Trace) -> Result<Verdict> {
    let (p, q) = (0.3f64, 0.7f64);
    let start = Instant::now();
    let transform = probability_transform(p, 60)?;
    let window = IndexBox::cube(2, 0, 12)?;
    let inv = invert_contour(&transform, &[2.0, 2.0], &window, Some(&[64, 64]))?;
    let elapsed = start.elapsed().as_secs_f64();
    trace.table(&inv.table);
    let mut worst: f64 = 0.0;
    for k1 in 0..=12u64 {
        for k2 in 0..=k1 {
            let exact = p.powi(k2 as i32) * q.powi((k1 - k2) as i32) * binomial(k1, k2);
            let got = inv.table.scalar_at(&[k1 as i64, k2 as i64]);
            worst = worst.max((got - exact).norm());
        }
    }
    verdict(worst <= 1e-9 && elapsed < 1.0, format!("max abs error {worst:.2e} (tol 1e-9), inversion {elapsed:.3} s (limit 1 s)"))
}

fn binomial_inversion(trace: &mut Trace) -> Result<Verdict> {
    let (a, b) = (0.3, 0.4);
    let window = IndexBox::cube(2, 0, 10)?;
    let inv = invert_contour(&binomial_transform(a, b)?, &[1.0, 1.0], &window, Some(&[128, 128]))?;
    trace.table(&inv.table);
    // coefficients of 1/(1 - a/z1 - b/z2) by the Pascal-type recursion
    let mut coef = [[0.0f64; 11]; 11];
    for k1 in 0..=10 {
        for k2 in 0..=10 {
            coef[k1][k2] = if k1 == 0 && k2 == 0 {
                1.0
            } else {
                let left = if k1 > 0 { a * coef[k1 - 1][k2] } else { 0.0 };
                let down = if k2 > 0 { b * coef[k1][k2 - 1] } else { 0.0 };
                left + down
            };
        }
    }
    let mut worst: f64 = 0.0;
    for k1 in 0..=10 {
        for k2 in 0..=10 {
            let got = inv.table.scalar_at(&[k1 as i64, k2 as i64]);
            worst = worst.max((got.re - coef[k1][k2]).hypot(got.im) / coef[k1][k2]);
        }
    }
    verdict(worst <= 1e-9, format!("max rel error {worst:.2e} (tol 1e-9) on [0,10]^2"))
}

fn diagonal(trace: &mut Trace) -> Result<Verdict> {
    let a = 0.3;
    let f = diagonal_sequence(a, 60)?;
    let mut worst: f64 = 0.0;
    let mut within = true;
    let points = diagonal_points(a);
    for z in &points {
        let ev = eval_forward(&f, z)?;
        trace.values(&ev.value);
        let exact = 1.0 / (1.0 - a / (z[0] * z[1]));
        let dev = (ev.scalar() - exact).norm();
        within &= dev <= ev.error_bound() + 1e-15 * exact.norm();
        worst = worst.max(dev / exact.norm());
    }
    verdict(
        worst <= 1e-10 && within && points.len() == 10,
        format!("{} points, max rel deviation {worst:.2e} (tol 1e-10), within tail bound: {within}", points.len()),
    )
}

#[derive(Clone, Copy, Debug)]
enum Mode {
    Faltung,
    Weyl,
    General,
    Axes,
}

fn convolution_theorem(trace: &mut Trace) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let modes = [Mode::Faltung, Mode::Weyl, Mode::General, Mode::Axes];
    let mut worst: f64 = 0.0;
    let mut counts = [0usize; 4];
    for case in 0..200 {
        let mode = modes[case % 4];
        counts[case % 4] += 1;
        let n = match mode {
            Mode::Axes => rng.random_range(2..=3),
            _ => rng.random_range(1..=3),
        };
        let kind = match rng.random_range(0..3) {
            0 => ValueKind::Scalar,
            1 => ValueKind::Vector(rng.random_range(1..=3)),
            _ => ValueKind::Matrix(2),
        };
        let (plan, a, b) = match mode {
            Mode::Faltung => {
                let sa = rand_box(&mut rng, n, 0..=3, 4);
                let a = rand_table(&mut rng, LatticeDomain::nonneg(n), sa, ValueKind::Scalar);
                let sb = rand_box(&mut rng, n, 0..=3, 4);
                let b = rand_table(&mut rng, LatticeDomain::nonneg(n), sb, kind);
                (ConvPlan::faltung(n), a, b)
            }
            Mode::Weyl => {
                let sa = rand_box(&mut rng, n, 0..=3, 4);
                let a = rand_table(&mut rng, LatticeDomain::nonneg(n), sa, ValueKind::Scalar);
                let sb = rand_box(&mut rng, n, -4..=3, 4);
                let b = rand_table(&mut rng, LatticeDomain::full(n), sb, kind);
                (ConvPlan::weyl(n), a, b)
            }
            Mode::General => {
                let sa = rand_box(&mut rng, n, -3..=3, 4);
                let a = rand_table(&mut rng, LatticeDomain::boxed(sa.clone()), sa, ValueKind::Scalar);
                let sb = rand_box(&mut rng, n, -3..=3, 4);
                let b = rand_table(&mut rng, LatticeDomain::full(n), sb, kind);
                (ConvPlan::general(a.domain().clone(), b.domain().clone())?, a, b)
            }
            Mode::Axes => {
                let mut axes: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
                if axes.is_empty() {
                    axes.push(rng.random_range(0..n));
                }
                let l = axes.len();
                let sa = rand_box(&mut rng, l, -2..=2, 4);
                let a = rand_table(&mut rng, LatticeDomain::full(l), sa, ValueKind::Scalar);
                let sb = rand_box(&mut rng, n, -3..=3, 4);
                let b = rand_table(&mut rng, LatticeDomain::full(n), sb, kind);
                (ConvPlan::axes(a.domain().clone(), b.domain().clone(), axes)?, a, b)
            }
        };
        let axes = plan.conv_axes();
        let mut lo = b.support().lo().coords().to_vec();
        let mut hi = b.support().hi().coords().to_vec();
        for (t, &j) in axes.iter().enumerate() {
            lo[j] += a.support().lo()[t];
            hi[j] += a.support().hi()[t];
        }
        let window = IndexBox::from_bounds(&lo, &hi)?;
        let product = convolve(&plan, &a, &b, &window, &ConvOptions::default())?.table;
        trace.table(&product);
        let z = rand_point(&mut rng, n, 0.8..1.25);
        let za: Vec<Complex64> = axes.iter().map(|&j| z[j]).collect();
        let lhs = naive_transform(&product, &z);
        let fa = naive_transform(&a, &za)[0];
        let rhs: Vec<Complex64> = naive_transform(&b, &z).into_iter().map(|x| fa * x).collect();
        let diff: Vec<Complex64> = lhs.iter().zip(&rhs).map(|(x, y)| x - y).collect();
        worst = worst.max(norm(&diff) / norm(&rhs));
    }
    verdict(
        worst <= 1e-10 && counts[3] >= 50,
        format!(
            "200 cases (faltung {}, weyl {}, general {}, axes {}), max rel deviation {worst:.2e} (tol 1e-10)",
            counts[0], counts[1], counts[2], counts[3]
        ),
    )
}

fn round_trip(trace: &mut Trace) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=3);
        let max_span = [12, 6, 4][n - 1];
        let kind = match rng.random_range(0..3) {
            0 => ValueKind::Scalar,
            1 => ValueKind::Vector(rng.random_range(1..=3)),
            _ => ValueKind::Matrix(2),
        };
        let support = rand_box(&mut rng, n, -4..=4, max_span);
        let f = rand_table(&mut rng, LatticeDomain::full(n), support.clone(), kind);
        let radii: Vec<f64> = (0..n).map(|_| rng.random_range(0.6..1.6)).collect();
        let inv = invert_contour(&TransformEvaluator::from_sequence(&f)?, &radii, &support, None)?;
        trace.table(&inv.table);
        worst = worst.max(f.max_abs_diff(&inv.table, &support));
    }
    verdict(worst <= 1e-10, format!("100 tables, max abs error {worst:.2e} (tol 1e-10), grid 2 span + 16"))
}

fn cesaro_semigroup(trace: &mut Trace) -> Result<Verdict> {
    let orders = [0.0, 0.5, 1.0, 1.3, 2.0];
    let last = 64;
    let window = IndexBox::cube(1, 0, last as i64)?;
    let mut worst: f64 = 0.0;
    for &alpha in &orders {
        for &beta in &orders {
            let a = cesaro(alpha, last)?;
            let b = cesaro(beta, last)?;
            let prod = convolve(&ConvPlan::faltung(1), a.table(), b.table(), &window, &ConvOptions::default())?.table;
            trace.table(&prod);
            for (k, e) in cesaro_oracle(alpha + beta, last).iter().enumerate() {
                let got = prod.scalar_at(&[k as i64]);
                let err = (got - e).norm();
                worst = worst.max(if *e == 0.0 { err } else { err / e.abs() });
            }
        }
    }
    let ones = cesaro(1.0, last)?.values();
    let ramp = cesaro(2.0, last)?.values();
    let exact_ones = ones.iter().all(|&v| v == 1.0);
    let ramp_err = ramp.iter().enumerate().map(|(k, &v)| (v - (k + 1) as f64).abs() / (k + 1) as f64).fold(0.0, f64::max);
    verdict(
        worst <= 1e-12 && exact_ones && ramp_err <= 4.0 * f64::EPSILON,
        format!("25 pairs, max rel deviation {worst:.2e} (tol 1e-12); c^1 = 1: {exact_ones}; c^2(k) = k+1 rel err {ramp_err:.1e}"),
    )
}

fn weyl_identity(trace: &mut Trace) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut max_ledger: f64 = 0.0;
    for _ in 0..50 {
        let gamma = rng.random_range(0.05..1.95);
        let m = rng.random_range(0..=2usize);
        let spec = WeylOperatorSpec::new(cesaro(gamma, 400)?.into_table(), m)?;
        let support = rand_box(&mut rng, 1, -5..=5, 10);
        let u = rand_table(&mut rng, LatticeDomain::full(1), support.clone(), ValueKind::Scalar);
        let window = IndexBox::from_bounds(&[support.lo()[0] - m as i64], &[support.hi()[0] + 80])?;
        let out = weyl_am(&spec, &u, &window, &ConvOptions::recording())?;
        trace.table(&out.table);
        max_ledger = max_ledger.max(out.max_tail());
        let z = rand_point(&mut rng, 1, 1.5..3.0)[0];
        let lhs = naive_transform(&out.table, &[z])[0];
        // F_{c^gamma}(z) = (1 - 1/z)^{-gamma}
        let fa = (1.0 - 1.0 / z).powf(-gamma);
        let poly: Complex64 = (0..=m)
            .map(|j| {
                let sign = if (m - j) % 2 == 0 { 1.0 } else { -1.0 };
                z.powi(j as i32) * (sign * binomial(m as u64, j as u64))
            })
            .sum();
        let rhs = poly * fa * naive_transform(&u, &[z])[0];
        worst = worst.max((lhs - rhs).norm() / rhs.norm());
    }
    verdict(
        worst <= 1e-9 && max_ledger <= 1e-9,
        format!("50 cases, max rel deviation {worst:.2e} (tol 1e-9), largest truncation ledger {max_ledger:.1e}"),
    )
}

/// Random `A_0..A_{p-1}` with `sum_s |A_s| rho^{s-p} = 0.9`, so every root of
/// `det(z^p + sum_s A_s z^s)` has modulus below `rho`.
fn contracted_coefficients(rng: &mut ChaCha8Rng, m: usize, p: usize, rho: f64) -> Vec<CMatrix> {
    let mut a: Vec<CMatrix> = (0..p).map(|_| rand_matrix(rng, m)).collect();
    let weight: f64 = a.iter().enumerate().map(|(s, x)| x.norm() * rho.powi(s as i32 - p as i32)).sum();
    for x in a.iter_mut() {
        *x *= Complex64::new(0.9 / weight, 0.0);
    }
    a.push(CMatrix::identity(m, m));
    a
}

fn solver_oracle(trace: &mut Trace) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    let last = 32i64;
    for _ in 0..30 {
        let m = rng.random_range(1..=4);
        let p = rng.random_range(1..=3);
        let a = contracted_coefficients(&mut rng, m, p, 0.6);
        let cmat = rand_matrix(&mut rng, m);
        let support_hi = rng.random_range(0..=last);
        let f = rand_table(&mut rng, LatticeDomain::full(1), IndexBox::cube(1, 0, support_hi)?, ValueKind::Vector(m));
        let terms: Vec<(MultiIndex, CMatrix)> =
            a.iter().enumerate().map(|(s, x)| (MultiIndex::new(vec![s as i64]), x.clone())).collect();
        let problem = Problem::Pencil(OperatorPencil::new(terms, cmat.clone())?);
        let out = IndexBox::cube(1, 0, last)?;
        let kernel_window = covering_kernel_window(&out, f.support())?;
        let sol = solve(&problem, &f, &LatticeDomain::nonneg(1), &[1.0], &kernel_window, &out, &SolveOptions::default())?;
        trace.table(&sol.u);
        let fval = |k: i64| f.value_or_zero(&MultiIndex::new(vec![k]));
        let rec = forward_recursion(&a, &cmat, &fval, last);
        for k in 0..=last {
            let got = sol.u.get_coords(&[k]).expect("stored");
            let diff: Vec<Complex64> = got.iter().zip(&rec[k as usize]).map(|(x, y)| x - y).collect();
            worst = worst.max(norm(&diff));
        }
    }
    // two-dimensional pencil with Gaussian data
    let problem = gaussian_pencil_problem()?;
    let f = gaussian_decay(&[0, 0], 8, None, ValueKind::Vector(2), &[c(1.0, 0.0), c(-0.5, 0.25)])?;
    let check = IndexBox::cube(2, -6, 6)?;
    let out = IndexBox::cube(2, -6, 7)?;
    let kernel_window = covering_kernel_window(&out, f.support())?;
    let sol = solve(&problem, &f, &LatticeDomain::nonneg(2), &[1.0, 1.0], &kernel_window, &out, &SolveOptions::default())?;
    trace.table(&sol.u);
    let Problem::Pencil(pencil) = &problem else { unreachable!() };
    let terms: Vec<(Vec<i64>, CMatrix)> = pencil.terms().iter().map(|(j, x)| (j.coords().to_vec(), x.clone())).collect();
    let res = pencil_residual(&terms, pencil.c(), &sol.u, &f, &check);
    trace.scalar(res);
    verdict(
        worst <= 1e-8 && res <= 1e-8,
        format!("30 recursions: max abs deviation {worst:.2e} (tol 1e-8); 2-D Gaussian pencil residual {res:.2e} (tol 1e-8)"),
    )
}

fn weyl_solves(trace: &mut Trace) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let orders = [0.3, 0.5, 1.4];
    let radius = 1.25f64;
    let mut worst_ratio: f64 = 0.0;
    for case in 0..10 {
        let m = rng.random_range(1..=2);
        let nterms = rng.random_range(1..=2);
        let mut terms = Vec::new();
        let mut degrees = Vec::new();
        for t in 0..nterms {
            let alpha = orders[(case + t) % 3];
            let spec = WeylOperatorSpec::fractional(alpha, 400)?;
            let shift = rng.random_range(0..=1);
            degrees.push((spec.order() as i64 + shift, alpha));
            terms.push(WeylTerm { spec, shift, op: rand_matrix(&mut rng, m) });
        }
        let k0 = degrees.iter().map(|d| d.0).max().unwrap_or(0) + rng.random_range(0..=1);
        // |z^{shift} (z - 1)^m (1 - 1/z)^{alpha - m}| <= |z|^{m + shift} (1 + 1/R)^alpha on |z| >= R,
        // so the A_0 z^{k0} term dominates outside the circle once the weights sum below one
        let weight: f64 = terms
            .iter()
            .zip(&degrees)
            .map(|(t, (d, alpha))| t.op.norm() * radius.powi((*d - k0) as i32) * (1.0 + 1.0 / radius).powf(*alpha))
            .sum();
        for t in terms.iter_mut() {
            t.op *= Complex64::new(0.6 / weight, 0.0);
        }
        let id = CMatrix::identity(m, m);
        let symbol = VolterraSymbol::new(1, SymbolVariant::WeylFractional1D { terms, a0: id.clone(), k0 }, rand_matrix(&mut rng, m))?;
        let problem = Problem::Volterra(symbol);
        let kind = if m == 1 { ValueKind::Scalar } else { ValueKind::Vector(m) };
        let f_hi = rng.random_range(0..=8);
        let f = rand_table(&mut rng, LatticeDomain::full(1), IndexBox::cube(1, 0, f_hi)?, kind);
        let check = IndexBox::cube(1, 0, 30)?;
        let kd = LatticeDomain::nonneg(1);
        let out = required_solution_window(&problem, &f, &kd, &check)?;
        let kernel_window = covering_kernel_window(&out, f.support())?;
        let sol = solve(&problem, &f, &kd, &[radius], &kernel_window, &out, &SolveOptions::default())?;
        trace.table(&sol.u);
        let ver = sol.verify(&problem, &f, &check)?;
        worst_ratio = worst_ratio.max(ver.residual.max_norm / ver.budget);
    }
    let a2 = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(-0.25, 0.0)]);
    let symbol = weyl_two_term_symbol(a2, 200)?;
    let z0 = c(3.0, 0.0);
    let samples: Vec<Vec<Complex64>> = polycircle_samples(&[0.1], 16).into_iter().map(|w| vec![z0 + w[0]]).collect();
    let probe = uniqueness_probe(&Problem::Volterra(symbol), &samples, DEFAULT_PROBE_THRESHOLD);
    trace.scalar(probe.min_sigma);
    verdict(
        worst_ratio <= 10.0 && probe.injective_on_samples,
        format!(
            "10 solves, max residual / ledger {worst_ratio:.2e} (limit 10); probe near z0 = 3: {} (min sigma {:.3})",
            probe.verdict, probe.min_sigma
        ),
    )
}

fn homogeneous_modes(trace: &mut Trace) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    let mut worst_symbol: f64 = 0.0;
    for case in 0..10 {
        let n = if case < 5 { 1 } else { 2 };
        let terms: Vec<(Vec<i64>, CMatrix)> = if n == 1 {
            let p = rng.random_range(1..=3);
            contracted_coefficients(&mut rng, 1, p, 0.8).into_iter().enumerate().map(|(s, x)| (vec![s as i64], x)).collect()
        } else {
            // the z1 z2 coefficient dominates the others on the unit torus
            let others: Vec<Complex64> = (0..3).map(|_| rand_complex(&mut rng) * 0.3).collect();
            vec![
                (vec![1, 1], CMatrix::from_element(1, 1, c(1.0, 0.0))),
                (vec![1, 0], CMatrix::from_element(1, 1, others[0])),
                (vec![0, 1], CMatrix::from_element(1, 1, others[1])),
                (vec![0, 0], CMatrix::from_element(1, 1, others[2])),
            ]
        };
        let pencil = OperatorPencil::new(
            terms.iter().map(|(j, x)| (MultiIndex::new(j.clone()), x.clone())).collect(),
            CMatrix::identity(1, 1),
        )?;
        let problem = Problem::Pencil(pencil.clone());
        let f = rand_table(&mut rng, LatticeDomain::full(n), IndexBox::cube(n, 0, 4)?, ValueKind::Scalar);
        let check = IndexBox::cube(n, 0, 10)?;
        let out = IndexBox::cube(n, 0, 13)?;
        let kernel_window = covering_kernel_window(&out, f.support())?;
        let radii = vec![1.0; n];
        let sol = solve(&problem, &f, &LatticeDomain::full(n), &radii, &kernel_window, &out, &SolveOptions::default())?;
        trace.table(&sol.u);
        let root = pencil_root(&pencil, None).expect("scalar pencil has a root");
        trace.values(&root);
        // P(root) by direct summation
        let p_root: Complex64 = terms
            .iter()
            .map(|(j, x)| x[(0, 0)] * j.iter().zip(&root).map(|(&e, z)| z.powi(e as i32)).product::<Complex64>())
            .sum();
        worst_symbol = worst_symbol.max(p_root.norm());
        let moved = SequenceTable::scalar_from_fn(sol.u.domain().clone(), sol.u.support().clone(), None, |k| {
            sol.u.scalar_at(k.coords()) + k.coords().iter().zip(&root).map(|(&e, z)| z.powi(e as i32)).product::<Complex64>()
        })?;
        let before = pencil_residual(&terms, &CMatrix::identity(1, 1), &sol.u, &f, &check);
        let after = pencil_residual(&terms, &CMatrix::identity(1, 1), &moved, &f, &check);
        let lib = homogeneous_mode_check(&problem, &sol.u, &f, &check, &root)?;
        worst = worst.max((after - before).abs()).max(lib.change());
    }
    verdict(
        worst <= 1e-10,
        format!("10 pencils, max residual change {worst:.2e} (tol 1e-10), max |P(root)| {worst_symbol:.1e}"),
    )
}

const CRITERIA: [(&str, Criterion); 10] = [
    ("probability inversion", probability),
    ("binomial inversion", binomial_inversion),
    ("diagonal forward transform", diagonal),
    ("convolution theorem", convolution_theorem),
    ("inversion round trip", round_trip),
    ("cesaro semigroup", cesaro_semigroup),
    ("weyl transform identity", weyl_identity),
    ("solver against recursion", solver_oracle),
    ("volterra and weyl solves", weyl_solves),
    ("homogeneous modes", homogeneous_modes),
];

struct Run {
    verdicts: Vec<Verdict>,
    traces: Vec<Trace>,
    seconds: Vec<f64>,
}

fn run_all(threads: usize) -> Run {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
    pool.install(|| {
        let mut run = Run { verdicts: Vec::new(), traces: Vec::new(), seconds: Vec::new() };
        for (_, criterion) in CRITERIA {
            let mut trace = Trace::default();
            let start = Instant::now();
            let v = criterion(&mut trace).unwrap_or_else(|e| Verdict { passed: false, detail: format!("error: {e}") });
            run.seconds.push(start.elapsed().as_secs_f64());
            run.verdicts.push(v);
            run.traces.push(trace);
        }
        run
    })
}

fn line(id: usize, name: &str, passed: bool, detail: &str) {
    println!("{} {id:>2} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
}

fn main() -> ExitCode {
    let start = Instant::now();
    let single = run_all(1);
    for (i, ((name, _), v)) in CRITERIA.iter().zip(&single.verdicts).enumerate() {
        line(i + 1, name, v.passed, &format!("{} [{:.2} s]", v.detail, single.seconds[i]));
    }
    let multi = run_all(8);
    let differing: Vec<usize> = (0..CRITERIA.len())
        .filter(|&i| single.traces[i] != multi.traces[i] || single.verdicts[i].passed != multi.verdicts[i].passed)
        .map(|i| i + 1)
        .collect();
    let values: usize = single.traces.iter().map(|t| t.0.len()).sum();
    let deterministic = differing.is_empty();
    line(
        11,
        "determinism",
        deterministic,
        &if deterministic {
            format!("{values} output words identical at 1 and 8 threads")
        } else {
            format!("outputs differ between 1 and 8 threads in criteria {differing:?}")
        },
    );
    let failed = single.verdicts.iter().filter(|v| !v.passed).count() + usize::from(!deterministic);
    println!("{} of 11 criteria passed in {:.1} s", 11 - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
