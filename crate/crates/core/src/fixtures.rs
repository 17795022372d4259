//! Named, versioned test vectors built from closed-form examples.
//!
//! Each fixture runs the library end to end and compares against a closed form,
//! returning a report with the measured error and the tolerance it must meet.

use num_complex::Complex64;
use serde::Serialize;

use crate::convolution::{conv_general_with, ConvOptions};
use crate::error::{Error, Result};
use crate::fractional::{cesaro, cesaro_values, WeylOperatorSpec};
use crate::generators::gaussian_decay;
use crate::lattice::{IndexBox, LatticeDomain, MultiIndex};
use crate::linalg::CMatrix;
use crate::sequence::{Envelope, SequenceTable, ValueKind};
use crate::solver::{
    covering_kernel_window, polycircle_samples, solve, uniqueness_probe, OperatorPencil, Problem, SolveOptions,
    SymbolVariant, VolterraSymbol, WeylTerm, DEFAULT_PROBE_THRESHOLD,
};
use crate::ztransform::{eval_forward, invert_contour, Evaluation, PolyAnnulus, TransformEvaluator};

pub const FIXTURE_VERSION: u32 = 1;

pub const FIXTURE_NAMES: &[&str] =
    &["probability", "binomial", "diagonal", "cesaro-semigroup", "gaussian-pencil", "weyl-uniqueness"];

#[derive(Clone, Debug, Serialize)]
pub struct FixtureReport {
    pub name: String,
    pub version: u32,
    pub passed: bool,
    /// What `max_error` measures.
    pub metric: String,
    pub max_error: f64,
    pub tolerance: f64,
    /// Error ledger or other diagnostics of the run.
    pub ledger: serde_json::Value,
    #[serde(skip)]
    pub table: Option<SequenceTable>,
}

impl FixtureReport {
    fn new(name: &str, metric: &str, max_error: f64, tolerance: f64, ledger: serde_json::Value) -> Self {
        FixtureReport {
            name: name.to_string(),
            version: FIXTURE_VERSION,
            passed: max_error <= tolerance,
            metric: metric.to_string(),
            max_error,
            tolerance,
            ledger,
            table: None,
        }
    }
}

/// Parameters shared by the fixtures; each fixture reads the ones it uses.
#[derive(Clone, Debug)]
pub struct FixtureParams {
    pub p: f64,
    pub a: f64,
    pub b: f64,
    /// Largest index of the checked window; each fixture has its own default.
    pub window: Option<i64>,
    pub radii: Option<Vec<f64>>,
    pub grid: Option<Vec<usize>>,
    pub truncation: usize,
}

impl Default for FixtureParams {
    fn default() -> Self {
        FixtureParams { p: 0.3, a: 0.3, b: 0.4, window: None, radii: None, grid: None, truncation: 60 }
    }
}

pub fn run_fixture(name: &str, params: &FixtureParams) -> Result<FixtureReport> {
    match name {
        "probability" => probability(params),
        "binomial" => binomial(params),
        "diagonal" => diagonal(params),
        "cesaro-semigroup" => cesaro_semigroup(params),
        "gaussian-pencil" => gaussian_pencil(params),
        "weyl-uniqueness" => weyl_uniqueness(params),
        other => Err(Error::InvalidProblem(format!("unknown fixture {other:?}; known: {}", FIXTURE_NAMES.join(", ")))),
    }
}

/// `1/(1 - p z_2^{-1} (z_1 - q)^{-1}) * sum_{s=0}^{S} (q/z_1)^s`, the generating
/// function of `p^{k_2} q^{k_1 - k_2} C(k_1, k_2)` with a truncated geometric factor.
pub fn probability_transform(p: f64, truncation: usize) -> Result<TransformEvaluator> {
    let q = 1.0 - p;
    let region = PolyAnnulus::custom(2, "|z1| > q, |z2| (|z1| - q) > p", move |m| m[0] > q && m[1] * (m[0] - q) > p);
    let ev = TransformEvaluator::new(2, ValueKind::Scalar, region, move |z| {
        let (z1, z2) = (z[0], z[1]);
        let first = 1.0 / (1.0 - p / (z2 * (z1 - q)));
        let x = q / z1;
        let mut geo = Complex64::ZERO;
        let mut t = Complex64::new(1.0, 0.0);
        for _ in 0..=truncation {
            geo += t;
            t *= x;
        }
        let rest = x.norm().powi(truncation as i32 + 1) / (1.0 - x.norm());
        Ok(Evaluation {
            value: vec![first * geo],
            tail_bound: first.norm() * rest,
            rounding_bound: 4.0 * (truncation as f64 + 4.0) * f64::EPSILON * first.norm() * geo.norm(),
        })
    })?;
    // 0 <= f <= (p + q)^{k_1} = 1 and f vanishes for k_2 > k_1
    ev.with_source(LatticeDomain::nonneg(2), Envelope::new(1.0, vec![1.0, 1.0])?)
}

fn binom(n: i64, k: i64) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64)
}

fn probability(params: &FixtureParams) -> Result<FixtureReport> {
    let p = params.p;
    let q = 1.0 - p;
    let radii = params.radii.clone().unwrap_or_else(|| vec![2.0, 2.0]);
    let grid = params.grid.clone().unwrap_or_else(|| vec![64, 64]);
    let window = IndexBox::cube(2, 0, params.window.unwrap_or(12))?;
    let ev = probability_transform(p, params.truncation)?;
    let inv = invert_contour(&ev, &radii, &window, Some(&grid))?;
    let mut worst: f64 = 0.0;
    for k in window.iter() {
        if k[1] <= k[0] {
            let exact = p.powi(k[1] as i32) * q.powi((k[0] - k[1]) as i32) * binom(k[0], k[1]);
            worst = worst.max((inv.table.scalar_at(k.coords()) - exact).norm());
        }
    }
    let mut report = FixtureReport::new(
        "probability",
        "max |f - p^k2 q^(k1-k2) C(k1,k2)| over 0 <= k2 <= k1 <= window",
        worst,
        1e-9,
        serde_json::json!({
            "radii": radii, "grid": inv.grid, "aliasing_bound": inv.aliasing_bound,
            "node_error_bound": inv.node_error_bound, "p": p, "truncation": params.truncation,
        }),
    );
    report.table = Some(inv.table);
    Ok(report)
}

/// `z_1 z_2 / (z_1 z_2 - a z_2 - b z_1)` on `|a|/|z_1| + |b|/|z_2| < 1`.
pub fn binomial_transform(a: f64, b: f64) -> Result<TransformEvaluator> {
    let region = PolyAnnulus::custom(2, "|a|/|z1| + |b|/|z2| < 1", move |m| a.abs() / m[0] + b.abs() / m[1] < 1.0);
    let ev = TransformEvaluator::new(2, ValueKind::Scalar, region, move |z| {
        let (z1, z2) = (z[0], z[1]);
        let den = z1 * z2 - a * z2 - b * z1;
        let v = z1 * z2 / den;
        Ok(Evaluation { value: vec![v], tail_bound: 0.0, rounding_bound: 8.0 * f64::EPSILON * v.norm() })
    })?;
    // C(k1 + k2, k1) |a|^k1 |b|^k2 <= (|a| + |b|)^(k1 + k2)
    let s = a.abs() + b.abs();
    ev.with_source(LatticeDomain::nonneg(2), Envelope::new(1.0, vec![s, s])?)
}

fn binomial(params: &FixtureParams) -> Result<FixtureReport> {
    let (a, b) = (params.a, params.b);
    let radii = params.radii.clone().unwrap_or_else(|| vec![1.0, 1.0]);
    let grid = params.grid.clone().unwrap_or_else(|| vec![128, 128]);
    let window = IndexBox::cube(2, 0, params.window.unwrap_or(10))?;
    let ev = binomial_transform(a, b)?;
    let inv = invert_contour(&ev, &radii, &window, Some(&grid))?;
    let mut worst: f64 = 0.0;
    for k in window.iter() {
        let exact = binom(k[0] + k[1], k[0]) * a.powi(k[0] as i32) * b.powi(k[1] as i32);
        let got = inv.table.scalar_at(k.coords());
        worst = worst.max((got - exact).norm() / exact.abs().max(f64::MIN_POSITIVE));
    }
    let mut report = FixtureReport::new(
        "binomial",
        "max relative deviation from C(k1+k2,k1) a^k1 b^k2",
        worst,
        1e-9,
        serde_json::json!({
            "radii": radii, "grid": inv.grid, "aliasing_bound": inv.aliasing_bound,
            "node_error_bound": inv.node_error_bound, "a": a, "b": b,
        }),
    );
    report.table = Some(inv.table);
    Ok(report)
}

/// `f(k, k) = a^k` for `k >= 0`, zero off the diagonal, stored on `[0, last]^2`.
pub fn diagonal_sequence(a: f64, last: i64) -> Result<SequenceTable> {
    let r = a.abs().sqrt();
    let env = Envelope::new(1.0, vec![r, r])?;
    SequenceTable::scalar_from_fn(LatticeDomain::nonneg(2), IndexBox::cube(2, 0, last)?, Some(env), |k| {
        if k[0] == k[1] {
            Complex64::new(a.powi(k[0] as i32), 0.0)
        } else {
            Complex64::ZERO
        }
    })
}

/// Ten fixed points with `|z_1|, |z_2| > sqrt(a)` and varied arguments.
pub fn diagonal_points(a: f64) -> Vec<[Complex64; 2]> {
    let base = a.abs().sqrt();
    (0..10)
        .map(|t| {
            let t = t as f64;
            [
                Complex64::from_polar(base * (1.3 + 0.1 * t), 0.4 + 0.61 * t),
                Complex64::from_polar(base * (1.5 + 0.07 * t), -1.1 + 0.37 * t),
            ]
        })
        .collect()
}

fn diagonal(params: &FixtureParams) -> Result<FixtureReport> {
    let a = params.a;
    let f = diagonal_sequence(a, 60)?;
    let mut worst: f64 = 0.0;
    let mut within = true;
    for z in diagonal_points(a) {
        let ev = eval_forward(&f, &z)?;
        let exact = 1.0 / (1.0 - a / (z[0] * z[1]));
        let dev = (ev.scalar() - exact).norm();
        within &= dev <= ev.error_bound() + 4.0 * f64::EPSILON * exact.norm();
        worst = worst.max(dev / exact.norm());
    }
    let mut report = FixtureReport::new(
        "diagonal",
        "max relative deviation from 1/(1 - a/(z1 z2)) at ten points",
        worst,
        1e-10,
        serde_json::json!({ "a": a, "stored_last": 60, "within_tail_bound": within }),
    );
    report.passed &= within;
    Ok(report)
}

fn cesaro_semigroup(params: &FixtureParams) -> Result<FixtureReport> {
    let last = params.window.unwrap_or(64).max(1) as usize;
    let pairs = [(0.3, 0.5), (0.5, 0.5), (1.2, 0.7), (2.5, 0.25)];
    let window = IndexBox::from_bounds(&[0], &[last as i64])?;
    let mut worst: f64 = 0.0;
    for (alpha, beta) in pairs {
        let a = cesaro(alpha, last)?;
        let b = cesaro(beta, last)?;
        let out = conv_general_with(a.table(), b.table(), &window, &ConvOptions::recording())?;
        let exact = cesaro_values(alpha + beta, last);
        for (k, e) in exact.iter().enumerate() {
            let got = out.table.scalar_at(&[k as i64]);
            worst = worst.max((got.re - e).abs() / e.abs());
        }
    }
    Ok(FixtureReport::new(
        "cesaro-semigroup",
        "max relative deviation of c^a * c^b from c^(a+b)",
        worst,
        1e-12,
        serde_json::json!({ "pairs": pairs, "last": last }),
    ))
}

/// `A u(k + (1,1)) - u(k) = f(k)` with `A = diag(2, 3)`.
pub fn gaussian_pencil_problem() -> Result<Problem> {
    let a = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)]));
    let minus_i = -CMatrix::identity(2, 2);
    Ok(Problem::Pencil(OperatorPencil::new(
        vec![(MultiIndex::new(vec![1, 1]), a), (MultiIndex::new(vec![0, 0]), minus_i)],
        CMatrix::identity(2, 2),
    )?))
}

fn gaussian_pencil(_params: &FixtureParams) -> Result<FixtureReport> {
    let problem = gaussian_pencil_problem()?;
    let v = [Complex64::new(1.0, 0.0), Complex64::new(-0.5, 0.25)];
    let f = gaussian_decay(&[0, 0], 8, None, ValueKind::Vector(2), &v)?;
    let check = IndexBox::cube(2, -6, 6)?;
    let out = IndexBox::cube(2, -6, 7)?;
    let kernel_window = covering_kernel_window(&out, f.support())?;
    let sol = solve(&problem, &f, &LatticeDomain::nonneg(2), &[1.0, 1.0], &kernel_window, &out, &SolveOptions::default())?;
    let ver = sol.verify(&problem, &f, &check)?;
    let mut report = FixtureReport::new(
        "gaussian-pencil",
        "max residual of A u(k+(1,1)) - u(k) - f(k) on [-6,6]^2",
        ver.residual.max_norm,
        1e-8,
        serde_json::json!({ "ledger": sol.ledger, "residual": ver.residual, "budget": ver.budget }),
    );
    report.table = Some(sol.u);
    Ok(report)
}

/// Two Weyl fractional terms of orders 0.5 and 1.5 with `A_0 = A_1 = I`,
/// `k_0 = k_2 + 1`, and the given `A_2`.
pub fn weyl_two_term_symbol(a2: CMatrix, kernel_last: usize) -> Result<VolterraSymbol> {
    let m = a2.nrows();
    let id = CMatrix::identity(m, m);
    let t1 = WeylTerm { spec: WeylOperatorSpec::fractional(0.5, kernel_last)?, shift: 0, op: id.clone() };
    let t2 = WeylTerm { spec: WeylOperatorSpec::fractional(1.5, kernel_last)?, shift: 0, op: a2 };
    VolterraSymbol::new(1, SymbolVariant::WeylFractional1D { terms: vec![t2, t1], a0: id.clone(), k0: 1 }, id)
}

fn weyl_uniqueness(_params: &FixtureParams) -> Result<FixtureReport> {
    let a2 = CMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(0.5, 0.0), Complex64::new(1.0, 0.0), Complex64::ZERO, Complex64::new(-0.25, 0.0)],
    );
    let symbol = weyl_two_term_symbol(a2, 200)?;
    let z0 = Complex64::new(3.0, 0.0);
    let samples: Vec<Vec<Complex64>> = polycircle_samples(&[0.1], 16).into_iter().map(|w| vec![z0 + w[0]]).collect();
    let report = uniqueness_probe(&Problem::Volterra(symbol), &samples, DEFAULT_PROBE_THRESHOLD);
    let mut out = FixtureReport::new(
        "weyl-uniqueness",
        "threshold over smallest singular value near z0 = 3 (passes below 1)",
        DEFAULT_PROBE_THRESHOLD / report.min_sigma.max(f64::MIN_POSITIVE),
        1.0,
        serde_json::json!({ "verdict": report.verdict, "min_sigma": report.min_sigma, "z0": [3.0, 0.0] }),
    );
    out.passed &= report.injective_on_samples;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_named_fixture_passes() {
        for name in FIXTURE_NAMES {
            let r = run_fixture(name, &FixtureParams::default()).unwrap();
            assert!(r.passed, "{name}: {} > {}", r.max_error, r.tolerance);
        }
    }
}
