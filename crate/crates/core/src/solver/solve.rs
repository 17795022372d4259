//! Solution assembly `u = K * f`, the error ledger, and residual checks.

use num_complex::Complex64;
use serde::Serialize;

use crate::convolution::{convolve_on_axes, ConvOptions};
use crate::error::{Error, Result};
use crate::fractional::weyl_am;
use crate::lattice::{IndexBox, LatticeDomain, MultiIndex};
use crate::linalg::{apply, norm2, vec_norm, CMatrix};
use crate::sequence::{SequenceTable, ValueKind};
use crate::ztransform::eval_forward;

use super::kernel::{problem_kernel, restrict_kernel, Kernel, KernelOptions};
use super::problem::{Problem, SymbolVariant};

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub kernel: KernelOptions,
    pub conv: ConvOptions,
    /// Check the staircase initial conditions when the data lives on the
    /// non-negative orthant and every pencil index is non-negative.
    pub check_initial_conditions: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { kernel: KernelOptions::default(), conv: ConvOptions::recording(), check_initial_conditions: true }
    }
}

/// Error budget of a computed solution.
#[derive(Clone, Debug, Serialize)]
pub struct ErrorLedger {
    pub grid: Vec<usize>,
    pub aliasing: f64,
    pub node_error: f64,
    pub min_rcond: f64,
    /// Largest convolution tail bound (unstored kernel or data values).
    pub truncation: f64,
    pub rounding: f64,
    /// `sum |f(l)|` including the envelope tail of the data.
    pub data_mass: f64,
    /// Bound on `sup_k |u(k) - u_exact(k)|` over the output window.
    pub solution_error: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub u: SequenceTable,
    pub kernel: Kernel,
    pub ledger: ErrorLedger,
}

/// Residual of a candidate solution.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub max_norm: f64,
    pub argmax: Option<Vec<i64>>,
    /// Contribution of unstored kernel or data values to the evaluated residual.
    pub truncation_bound: f64,
    pub rounding_bound: f64,
}

/// Residual compared with the propagated solution error.
#[derive(Clone, Debug, Serialize)]
pub struct Verification {
    pub residual: ResidualReport,
    pub budget: f64,
}

impl Solution {
    /// Residual on `check` together with the budget it should respect.
    pub fn verify(&self, problem: &Problem, f: &SequenceTable, check: &IndexBox) -> Result<Verification> {
        let residual = residual(problem, &self.u, f, check)?;
        let gain = problem.operator_gain(check, self.u.support())?;
        let budget = gain * self.ledger.solution_error + residual.truncation_bound + residual.rounding_bound;
        Ok(Verification { residual, budget })
    }
}

fn vector_view(t: &SequenceTable, m: usize, what: &str) -> Result<SequenceTable> {
    match t.kind() {
        ValueKind::Scalar if m == 1 => Ok(t.as_vector()),
        ValueKind::Vector(p) if p == m => Ok(t.clone()),
        k => Err(Error::KindMismatch(format!(
            "{what} is {} of order {}, expected vectors of length {m}",
            k.name(),
            k.order()
        ))),
    }
}

/// `sum |f(l)|` over stored values plus the envelope tail.
fn data_mass(f: &SequenceTable) -> f64 {
    let stored: f64 = f.norms().iter().sum();
    match f.envelope() {
        None => stored,
        Some(_) => {
            let ones = vec![Complex64::new(1.0, 0.0); f.dim()];
            eval_forward(f, &ones).map_or(f64::INFINITY, |e| stored + e.tail_bound)
        }
    }
}

/// The staircase `N_0^n \ (j + N_0^n)` for each pencil index `j`, intersected with
/// the stored data window, must carry zero data.
fn check_initial_conditions(problem: &Problem, f: &SequenceTable) -> Result<()> {
    let Problem::Pencil(p) = problem else {
        return Ok(());
    };
    let n = p.dim();
    if f.domain() != &LatticeDomain::nonneg(n) || !p.nonneg_shifts() {
        return Ok(());
    }
    for (j, _) in p.terms() {
        for k in f.support().iter() {
            let in_staircase = k.coords().iter().all(|&x| x >= 0) && (0..n).any(|i| k[i] < j[i]);
            if in_staircase && f.get(&k).is_some_and(|v| v.iter().any(|c| *c != Complex64::ZERO)) {
                return Err(Error::InitialConditionViolated { index: k.into_vec() });
            }
        }
    }
    Ok(())
}

/// Smallest box for `u` on which the residual can be evaluated over `check`.
/// Terms with causal convolutions need `u` back to the first index where it can
/// be non-zero, which is bounded by the kernel domain plus the data support.
pub fn required_solution_window(
    problem: &Problem,
    f: &SequenceTable,
    kernel_domain: &LatticeDomain,
    check: &IndexBox,
) -> Result<IndexBox> {
    let n = problem.dim();
    Error::check_dim(n, check.dim())?;
    Error::check_dim(n, f.dim())?;
    Error::check_dim(n, kernel_domain.dim())?;
    let reaches = problem.reaches()?;
    let kd = kernel_domain.bounding_intervals();
    let fd = f.domain().bounding_intervals();
    let mut lo = check.lo().coords().to_vec();
    let mut hi = check.hi().coords().to_vec();
    for i in 0..n {
        let mut lo_i = i64::MAX;
        let mut hi_i = i64::MIN;
        for r in &reaches {
            hi_i = hi_i.max(check.hi()[i] + r.hi[i]);
            match r.lo[i] {
                Some(o) => lo_i = lo_i.min(check.lo()[i] + o),
                None => {
                    let data_lo = if f.envelope().is_some() { fd[i].lo } else { Some(f.support().lo()[i]) };
                    let start = match (kd[i].lo, data_lo) {
                        (Some(a), Some(b)) => a + b,
                        _ => {
                            return Err(Error::InsufficientWindow(format!(
                                "the solution has no lower bound on axis {}",
                                i + 1
                            )))
                        }
                    };
                    lo_i = lo_i.min(start.min(check.lo()[i]));
                }
            }
        }
        lo[i] = lo_i;
        hi[i] = hi_i;
    }
    IndexBox::from_bounds(&lo, &hi)
}

/// Solve by convolving the contour kernel, restricted to `kernel_domain`, with `f`.
#[allow(clippy::too_many_arguments)]
pub fn solve(
    problem: &Problem,
    f: &SequenceTable,
    kernel_domain: &LatticeDomain,
    radii: &[f64],
    kernel_window: &IndexBox,
    out_window: &IndexBox,
    opts: &SolveOptions,
) -> Result<Solution> {
    let n = problem.dim();
    let m = problem.state();
    Error::check_dim(n, f.dim())?;
    Error::check_dim(n, kernel_domain.dim())?;
    Error::check_dim(n, out_window.dim())?;
    let scalar_data = f.kind() == ValueKind::Scalar;
    let fv = vector_view(f, m, "the data")?;
    if opts.check_initial_conditions {
        check_initial_conditions(problem, &fv)?;
    }
    let kernel = problem_kernel(problem, radii, kernel_window, &opts.kernel)?;
    let g = restrict_kernel(&kernel, kernel_domain)?;
    let result_domain = kernel_domain.minkowski_sum(fv.domain()).unwrap_or_else(|_| LatticeDomain::full(n));
    let axes: Vec<usize> = (0..n).collect();
    let out = convolve_on_axes(&g, &fv, &axes, &result_domain, out_window, &opts.conv)?;
    let mass = data_mass(&fv);
    let truncation = out.max_tail();
    let rounding = 8.0 * f64::EPSILON * out.max_mass();
    let coefficient = kernel.ledger.coefficient_error();
    let propagated = if coefficient == 0.0 { 0.0 } else { coefficient * mass };
    let ledger = ErrorLedger {
        grid: kernel.ledger.grid.clone(),
        aliasing: kernel.ledger.aliasing,
        node_error: kernel.ledger.node_error,
        min_rcond: kernel.ledger.min_rcond,
        truncation,
        rounding,
        data_mass: mass,
        solution_error: propagated + truncation + rounding,
    };
    let u = if scalar_data { out.table.as_scalar()? } else { out.table };
    Ok(Solution { u, kernel, ledger })
}

/// Per-point residual accumulator.
struct Acc {
    value: Vec<Complex64>,
    trunc: f64,
    magnitude: f64,
}

impl Acc {
    fn new(m: usize) -> Self {
        Acc { value: vec![Complex64::ZERO; m], trunc: 0.0, magnitude: 0.0 }
    }

    fn add_op(&mut self, a: &CMatrix, a_norm: f64, x: &[Complex64], x_mag: f64, x_tail: f64) {
        for (s, y) in self.value.iter_mut().zip(apply(a, x)) {
            *s += y;
        }
        self.magnitude += a_norm * x_mag;
        self.trunc += a_norm * x_tail;
    }
}

fn u_at(u: &SequenceTable, k: &MultiIndex) -> Result<Vec<Complex64>> {
    if !u.support().contains(k) {
        return Err(Error::InsufficientWindow(format!("u is not stored at {k}")));
    }
    Ok(u.value_or_zero(k))
}

/// Evaluate `a * u` (scalar kernel on `axes`) on `window`.
fn kernel_apply(a: &SequenceTable, u: &SequenceTable, axes: &[usize], window: &IndexBox) -> Result<(SequenceTable, Vec<f64>, Vec<f64>)> {
    let dom = a.domain().clone();
    let result_domain = if axes.len() == u.dim() {
        dom.minkowski_sum(u.domain()).unwrap_or_else(|_| LatticeDomain::full(u.dim()))
    } else {
        LatticeDomain::full(u.dim())
    };
    let out = convolve_on_axes(a, u, axes, &result_domain, window, &ConvOptions::recording())?;
    Ok((out.table, out.tail_bounds, out.abs_mass))
}

/// `max_k |LHS(u)(k) - C f(k)|` over `check`.
pub fn residual(problem: &Problem, u: &SequenceTable, f: &SequenceTable, check: &IndexBox) -> Result<ResidualReport> {
    let n = problem.dim();
    let m = problem.state();
    Error::check_dim(n, u.dim())?;
    Error::check_dim(n, f.dim())?;
    Error::check_dim(n, check.dim())?;
    let u = vector_view(u, m, "the solution")?;
    let f = vector_view(f, m, "the data")?;
    let mut acc: Vec<Acc> = (0..check.len()).map(|_| Acc::new(m)).collect();
    let all_axes: Vec<usize> = (0..n).collect();

    // contribution of a convolution table evaluated on `check + shift`
    let add_conv = |acc: &mut [Acc], op: &CMatrix, table: &SequenceTable, tails: &[f64], masses: &[f64]| {
        let a_norm = norm2(op);
        for (o, a) in acc.iter_mut().enumerate() {
            a.add_op(op, a_norm, table.value_at_offset(o), masses[o], tails[o]);
        }
    };
    let shifted = |s: &[i64]| check.translate(&MultiIndex::from(s));

    match problem {
        Problem::Pencil(p) => {
            for (j, a) in p.terms() {
                let a_norm = norm2(a);
                for (o, k) in check.iter().enumerate() {
                    let v = u_at(&u, &(&k + j))?;
                    let mag = vec_norm(&v);
                    acc[o].add_op(a, a_norm, &v, mag, 0.0);
                }
            }
        }
        Problem::Volterra(s) => match s.variant() {
            SymbolVariant::MultiTermZn { b, terms } => {
                let b_norm = norm2(b);
                for (o, k) in check.iter().enumerate() {
                    let v = u_at(&u, &k)?;
                    let mag = vec_norm(&v);
                    acc[o].add_op(b, b_norm, &v, mag, 0.0);
                }
                for t in terms {
                    let (table, tails, masses) = kernel_apply(&t.kernel, &u, &all_axes, &shifted(t.shift.coords()))?;
                    add_conv(&mut acc, &t.op, &table, &tails, &masses);
                }
            }
            SymbolVariant::WeylFractional1D { terms, a0, k0 } => {
                let a_norm = norm2(a0);
                for (o, k) in check.iter().enumerate() {
                    let v = u_at(&u, &(&k + &MultiIndex::from(vec![*k0])))?;
                    let mag = vec_norm(&v);
                    acc[o].add_op(a0, a_norm, &v, mag, 0.0);
                }
                for t in terms {
                    let window = shifted(&[t.shift]);
                    let top = window.hi()[0] + t.spec.order() as i64;
                    if top > u.support().hi()[0] {
                        return Err(Error::InsufficientWindow(format!("u is not stored at {top}")));
                    }
                    let out = weyl_am(&t.spec, &u, &window, &ConvOptions::recording())?;
                    add_conv(&mut acc, &t.op, &out.table, &out.tail_bounds, &out.abs_mass);
                }
            }
            SymbolVariant::MixedAxes { terms } => {
                for t in terms {
                    let (table, tails, masses) = kernel_apply(&t.kernel, &u, &t.axes, check)?;
                    add_conv(&mut acc, &t.op, &table, &tails, &masses);
                }
            }
        },
    }

    let c = problem.c();
    let c_norm = norm2(c);
    let mut report = ResidualReport { max_norm: 0.0, argmax: None, truncation_bound: 0.0, rounding_bound: 0.0 };
    for (o, k) in check.iter().enumerate() {
        let (fv, f_tail) = match f.get(&k) {
            Some(v) => (v.to_vec(), 0.0),
            None => {
                let tail = match f.envelope() {
                    Some(env) if f.domain().contains(&k) => env.at(&k),
                    _ => 0.0,
                };
                (vec![Complex64::ZERO; m], tail)
            }
        };
        let a = &mut acc[o];
        let cf = apply(c, &fv);
        for (s, y) in a.value.iter_mut().zip(cf) {
            *s -= y;
        }
        a.magnitude += c_norm * vec_norm(&fv);
        a.trunc += c_norm * f_tail;
        let r = vec_norm(&a.value);
        if r > report.max_norm || report.argmax.is_none() {
            report.max_norm = r;
            report.argmax = Some(k.into_vec());
        }
        report.truncation_bound = report.truncation_bound.max(a.trunc);
        report.rounding_bound = report.rounding_bound.max(8.0 * m as f64 * f64::EPSILON * a.magnitude);
    }
    if !report.max_norm.is_finite() {
        return Err(Error::NonFinite(0));
    }
    Ok(report)
}
