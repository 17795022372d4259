//! Injectivity probes of the symbol and homogeneous modes of scalar pencils.

use std::f64::consts::PI;

use nalgebra::Schur;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{IndexBox, LatticeDomain, MultiIndex};
use crate::linalg::{singular_range, CMatrix};
use crate::sequence::{SequenceTable, ValueKind};

use super::problem::{monomial, OperatorPencil, Problem};
use super::solve::residual;

pub const DEFAULT_PROBE_THRESHOLD: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct ProbeSample {
    pub z: Vec<(f64, f64)>,
    /// Smallest singular value of the symbol; `None` when it could not be evaluated.
    pub sigma_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Residual change when a homogeneous mode `lambda^k` is added to a solution.
#[derive(Clone, Debug, Serialize)]
pub struct ModeCheck {
    pub root: Vec<(f64, f64)>,
    /// `|P(lambda)|`.
    pub symbol_value: f64,
    pub residual_before: f64,
    pub residual_after: f64,
}

impl ModeCheck {
    pub fn change(&self) -> f64 {
        (self.residual_after - self.residual_before).abs()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub samples: Vec<ProbeSample>,
    pub threshold: f64,
    pub min_sigma: f64,
    pub injective_on_samples: bool,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeCheck>,
}

fn pair(z: Complex64) -> (f64, f64) {
    (z.re, z.im)
}

/// `per_axis^n` points on the polycircle `|z_i| = radii_i`, offset from the real axis.
pub fn polycircle_samples(radii: &[f64], per_axis: usize) -> Vec<Vec<Complex64>> {
    let n = radii.len();
    let per_axis = per_axis.max(1);
    let total = per_axis.pow(n as u32);
    (0..total)
        .map(|mut t| {
            let mut z = vec![Complex64::ZERO; n];
            for i in (0..n).rev() {
                let idx = t % per_axis;
                t /= per_axis;
                let theta = 2.0 * PI * (idx as f64 + 0.5) / per_axis as f64;
                z[i] = Complex64::from_polar(radii[i], theta);
            }
            z
        })
        .collect()
}

/// Report `sigma_min` of the symbol at each sample; for scalar pencils also
/// check that a root `lambda` gives a homogeneous mode.
pub fn uniqueness_probe(problem: &Problem, samples: &[Vec<Complex64>], threshold: f64) -> ProbeReport {
    let mut out = Vec::with_capacity(samples.len());
    let mut min_sigma = f64::INFINITY;
    let mut worst: Option<usize> = None;
    for (s, z) in samples.iter().enumerate() {
        let sample = match problem.symbol(z) {
            Ok(v) => {
                let (lo, _) = singular_range(&v.matrix);
                if lo < min_sigma || worst.is_none() {
                    min_sigma = min_sigma.min(lo);
                    worst = Some(s);
                }
                ProbeSample { z: z.iter().copied().map(pair).collect(), sigma_min: Some(lo), error: None }
            }
            Err(e) => {
                min_sigma = 0.0;
                worst = Some(s);
                ProbeSample { z: z.iter().copied().map(pair).collect(), sigma_min: None, error: Some(e.to_string()) }
            }
        };
        out.push(sample);
    }
    let injective = !samples.is_empty() && min_sigma > threshold;
    let verdict = if injective {
        "injectivity witnessed on samples".to_string()
    } else if samples.is_empty() {
        "no samples".to_string()
    } else {
        let z = &out[worst.unwrap_or(0)].z;
        format!("injectivity not witnessed: sigma_min = {min_sigma:e} at z = {z:?}")
    };
    let mode = match problem {
        Problem::Pencil(p) if p.state() == 1 => pencil_root(p, None).and_then(|root| default_mode_check(problem, &root).ok()),
        _ => None,
    };
    ProbeReport { samples: out, threshold, min_sigma: if samples.is_empty() { 0.0 } else { min_sigma }, injective_on_samples: injective, verdict, mode }
}

fn default_mode_check(problem: &Problem, root: &[Complex64]) -> Result<ModeCheck> {
    let n = problem.dim();
    let check = IndexBox::cube(n, 0, 3)?;
    let (lo, hi) = shift_extent(problem);
    let ubox = IndexBox::from_bounds(
        &lo.iter().map(|&x| x.min(0)).collect::<Vec<_>>(),
        &hi.iter().map(|&x| x.max(0) + 3).collect::<Vec<_>>(),
    )?;
    let u = SequenceTable::zeros(LatticeDomain::full(n), ubox.clone(), ValueKind::Scalar)?;
    let f = SequenceTable::zeros(LatticeDomain::full(n), check.clone(), ValueKind::Scalar)?;
    homogeneous_mode_check(problem, &u, &f, &check, root)
}

fn shift_extent(problem: &Problem) -> (Vec<i64>, Vec<i64>) {
    let n = problem.dim();
    let mut lo = vec![0i64; n];
    let mut hi = vec![0i64; n];
    if let Problem::Pencil(p) = problem {
        for (j, _) in p.terms() {
            for i in 0..n {
                lo[i] = lo[i].min(j[i]);
                hi[i] = hi[i].max(j[i]);
            }
        }
    }
    (lo, hi)
}

/// Residual of `u` and of `u + lambda^k` on `check`.
pub fn homogeneous_mode_check(
    problem: &Problem,
    u: &SequenceTable,
    f: &SequenceTable,
    check: &IndexBox,
    root: &[Complex64],
) -> Result<ModeCheck> {
    let Problem::Pencil(p) = problem else {
        return Err(Error::Unsupported("homogeneous modes are checked for scalar pencils".into()));
    };
    if p.state() != 1 {
        return Err(Error::Unsupported("homogeneous modes are checked for scalar pencils".into()));
    }
    Error::check_dim(p.dim(), root.len())?;
    let before = residual(problem, u, f, check)?;
    let u_scalar = u.as_scalar()?;
    let moved = SequenceTable::scalar_from_fn(u.domain().clone(), u.support().clone(), None, |k| {
        u_scalar.scalar_at(k.coords()) + monomial(root, k.coords()).unwrap_or(Complex64::ZERO)
    })?;
    let after = residual(problem, &moved, f, check)?;
    let symbol_value = p.eval(root)?[(0, 0)].norm();
    Ok(ModeCheck {
        root: root.iter().copied().map(pair).collect(),
        symbol_value,
        residual_before: before.max_norm,
        residual_after: after.max_norm,
    })
}

fn poly_eval(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    // Horner for value and derivative, coefficients by ascending degree
    let mut v = Complex64::ZERO;
    let mut d = Complex64::ZERO;
    for &c in coeffs.iter().rev() {
        d = d * x + v;
        v = v * x + c;
    }
    (v, d)
}

/// Roots of `sum_d coeffs[d] x^d` from the companion matrix, polished by Newton steps.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let Some(deg) = coeffs.iter().rposition(|c| c.norm() > 1e-14 * scale) else {
        return Vec::new();
    };
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let mut comp = CMatrix::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    let t = Schur::new(comp).unpack().1;
    let mut roots: Vec<Complex64> = (0..deg).map(|i| t[(i, i)]).collect();
    for r in roots.iter_mut() {
        for _ in 0..8 {
            let (v, d) = poly_eval(&coeffs[..=deg], *r);
            if d == Complex64::ZERO {
                break;
            }
            let step = v / d;
            *r -= step;
            if step.norm() <= f64::EPSILON * r.norm() {
                break;
            }
        }
    }
    roots
}

/// A root of a scalar pencil: every coordinate but the last non-constant one is
/// fixed on the unit circle (or taken from `fixed`), the remaining one solves a
/// polynomial. The root with modulus closest to 1 is returned.
pub fn pencil_root(p: &OperatorPencil, fixed: Option<&[Complex64]>) -> Option<Vec<Complex64>> {
    if p.state() != 1 {
        return None;
    }
    let n = p.dim();
    let axis = (0..n).rev().find(|&i| {
        let lo = p.terms().iter().map(|(j, _)| j[i]).min().unwrap_or(0);
        let hi = p.terms().iter().map(|(j, _)| j[i]).max().unwrap_or(0);
        hi > lo
    })?;
    let mut point: Vec<Complex64> = match fixed {
        Some(f) if f.len() == n => f.to_vec(),
        _ => (0..n).map(|i| Complex64::from_polar(1.0, 0.3 + 0.7 * i as f64)).collect(),
    };
    let lo = p.terms().iter().map(|(j, _)| j[axis]).min()?;
    let hi = p.terms().iter().map(|(j, _)| j[axis]).max()?;
    let mut coeffs = vec![Complex64::ZERO; (hi - lo + 1) as usize];
    for (j, a) in p.terms() {
        let mut rest = j.clone().into_vec();
        rest[axis] = 0;
        let w = monomial(&point, &rest).ok()?;
        coeffs[(j[axis] - lo) as usize] += a[(0, 0)] * w;
    }
    let best = polynomial_roots(&coeffs)
        .into_iter()
        .filter(|r| r.norm() > 0.0 && r.is_finite())
        .min_by(|a, b| a.norm().ln().abs().total_cmp(&b.norm().ln().abs()))?;
    point[axis] = best;
    Some(point)
}

/// Multi-index helper for callers assembling modes by hand.
pub fn mode_value(root: &[Complex64], k: &MultiIndex) -> Complex64 {
    monomial(root, k.coords()).unwrap_or(Complex64::ZERO)
}
