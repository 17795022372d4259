//! Green functions and resolvent kernels by contour inversion of the symbol.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{IndexBox, LatticeDomain};
use crate::linalg::{norm2, solve_checked, to_row_major, vec_norm};
use crate::sequence::{Envelope, SequenceTable, ValueKind};
use crate::ztransform::{default_grid, grid_node, invert_contour, Evaluation, TransformEvaluator};

use super::problem::{OperatorPencil, Problem, VolterraSymbol};

/// Reciprocal condition number below which a contour node is rejected.
pub const DEFAULT_RCOND_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct KernelOptions {
    /// Nodes per axis; `None` uses `2 span + 16`.
    pub grid: Option<Vec<usize>>,
    pub rcond_threshold: f64,
    /// Compare against a run on the doubled grid to estimate aliasing.
    pub estimate_aliasing: bool,
    /// Radii `(positive side, negative side)` of the polycircles used for the
    /// Cauchy envelope of the kernel. Defaults to the inversion radii.
    pub envelope_radii: Option<(Vec<f64>, Vec<f64>)>,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions { grid: None, rcond_threshold: DEFAULT_RCOND_THRESHOLD, estimate_aliasing: true, envelope_radii: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelLedger {
    pub grid: Vec<usize>,
    /// `max |G_N - G_2N|` over the window, or 0 when not estimated.
    pub aliasing: f64,
    /// Node errors (symbol truncation, conditioning, rounding) carried to the coefficients.
    pub node_error: f64,
    pub min_rcond: f64,
    pub max_node_norm: f64,
}

impl KernelLedger {
    pub fn coefficient_error(&self) -> f64 {
        self.aliasing + self.node_error
    }
}

/// Matrix-valued kernel on the full lattice, tabulated on the requested window.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub table: SequenceTable,
    pub ledger: KernelLedger,
}

fn inverse_evaluator(problem: &Problem, threshold: f64, min_rcond: Arc<AtomicU64>) -> Result<TransformEvaluator> {
    let p = problem.clone();
    let m = problem.state();
    let c = problem.c().clone();
    TransformEvaluator::new(problem.dim(), ValueKind::Matrix(m), problem.region()?, move |z| {
        let sv = p.symbol(z)?;
        let solved = solve_checked(&sv.matrix, &c, threshold, z)?;
        // positive floats order like their bit patterns
        min_rcond.fetch_min(solved.rcond.to_bits(), Ordering::Relaxed);
        let xn = norm2(&solved.x);
        let pert = solved.inverse_norm * sv.error_radius;
        let tail_bound = if pert < 0.5 { pert * xn / (1.0 - pert) } else { f64::INFINITY };
        let rounding_bound = 4.0 * m as f64 * f64::EPSILON * xn / solved.rcond;
        Ok(Evaluation { value: to_row_major(&solved.x), tail_bound, rounding_bound })
    })
}

/// Singular nodes surface as `SingularSymbol` rather than wrapped evaluator failures.
fn unwrap_singular(e: Error) -> Error {
    match e {
        Error::EvaluatorFailure { source, node } => match *source {
            s @ Error::SingularSymbol { .. } => s,
            other => Error::EvaluatorFailure { node, source: Box::new(other) },
        },
        other => other,
    }
}

fn sup_on_polycircle(ev: &TransformEvaluator, radii: &[f64], grid: &[usize]) -> Result<f64> {
    let total: usize = grid.iter().product();
    let norms: Vec<Result<f64>> = (0..total)
        .into_par_iter()
        .map(|t| {
            let (_, z) = grid_node(radii, grid, t);
            ev.evaluate(&z).map(|e| vec_norm(&e.value))
        })
        .collect();
    let mut sup: f64 = 0.0;
    for r in norms {
        sup = sup.max(r.map_err(unwrap_singular)?);
    }
    Ok(sup)
}

fn cauchy_envelope(
    ev: &TransformEvaluator,
    radii: &[f64],
    grid: &[usize],
    max_node_norm: f64,
    opts: &KernelOptions,
) -> Result<Envelope> {
    let n = radii.len();
    match &opts.envelope_radii {
        None => Envelope::two_sided(1.1 * max_node_norm, radii.to_vec(), radii.to_vec()),
        Some((pos, neg)) => {
            Error::check_dim(n, pos.len())?;
            Error::check_dim(n, neg.len())?;
            // one polycircle per sign pattern of k
            let mut sup: f64 = 0.0;
            for mask in 0..(1usize << n) {
                let r: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { neg[i] } else { pos[i] }).collect();
                for (i, &ri) in r.iter().enumerate() {
                    if !ev.region().contains_moduli(&r) || !(ri > 0.0 && ri.is_finite()) {
                        return Err(Error::CircleOutsideRegion { axis: i, radius: ri });
                    }
                }
                sup = sup.max(sup_on_polycircle(ev, &r, grid)?);
            }
            Envelope::two_sided(1.1 * sup, pos.clone(), neg.clone())
        }
    }
}

fn contour_kernel(problem: &Problem, radii: &[f64], window: &IndexBox, opts: &KernelOptions) -> Result<Kernel> {
    let n = problem.dim();
    Error::check_dim(n, radii.len())?;
    Error::check_dim(n, window.dim())?;
    let min_rcond = Arc::new(AtomicU64::new(f64::INFINITY.to_bits()));
    let ev = inverse_evaluator(problem, opts.rcond_threshold, min_rcond.clone())?;
    let grid = opts.grid.clone().unwrap_or_else(|| default_grid(window));
    let inv = invert_contour(&ev, radii, window, Some(&grid)).map_err(unwrap_singular)?;
    let aliasing = if opts.estimate_aliasing {
        let doubled: Vec<usize> = grid.iter().map(|g| 2 * g).collect();
        let fine = invert_contour(&ev, radii, window, Some(&doubled)).map_err(unwrap_singular)?;
        inv.table.max_abs_diff(&fine.table, window)
    } else {
        0.0
    };
    let envelope = cauchy_envelope(&ev, radii, &grid, inv.max_node_norm, opts)?;
    let table = inv.table.with_envelope(Some(envelope))?;
    Ok(Kernel {
        table,
        ledger: KernelLedger {
            grid: inv.grid,
            aliasing,
            node_error: inv.node_error_bound,
            min_rcond: f64::from_bits(min_rcond.load(Ordering::Relaxed)),
            max_node_norm: inv.max_node_norm,
        },
    })
}

/// `G(k) = (2 pi i)^{-n} oint z^{k-1} P(z)^{-1} C dz` on `window`.
pub fn green_function(p: &OperatorPencil, radii: &[f64], window: &IndexBox, opts: &KernelOptions) -> Result<Kernel> {
    contour_kernel(&Problem::Pencil(p.clone()), radii, window, opts)
}

/// Resolvent kernel of a Volterra symbol, `(2 pi i)^{-n} oint z^{k-1} M(z)^{-1} C dz`.
pub fn resolvent_kernel(s: &VolterraSymbol, radii: &[f64], window: &IndexBox, opts: &KernelOptions) -> Result<Kernel> {
    contour_kernel(&Problem::Volterra(s.clone()), radii, window, opts)
}

/// Kernel for either problem type.
pub fn problem_kernel(problem: &Problem, radii: &[f64], window: &IndexBox, opts: &KernelOptions) -> Result<Kernel> {
    contour_kernel(problem, radii, window, opts)
}

/// Kernel window covering every difference `k - l` with `k` in `out` and `l` in
/// `data`, so that stored data never meets an unstored kernel value.
pub fn covering_kernel_window(out: &IndexBox, data: &IndexBox) -> Result<IndexBox> {
    Error::check_dim(out.dim(), data.dim())?;
    let lo: Vec<i64> = (0..out.dim()).map(|i| out.lo()[i] - data.hi()[i]).collect();
    let hi: Vec<i64> = (0..out.dim()).map(|i| out.hi()[i] - data.lo()[i]).collect();
    IndexBox::from_bounds(&lo, &hi)
}

/// Kernel restricted to `D'`: values outside are zeroed and the domain is replaced.
pub fn restrict_kernel(kernel: &Kernel, domain: &LatticeDomain) -> Result<SequenceTable> {
    kernel.table.restrict_domain(domain.clone())
}
