//! Lattice convolutions `a *_D b` and the partial-axes products `a *_D^{l,j} b`.
//!
//! All products are evaluated on a caller-supplied output window. Infinite sums
//! are truncated to the stored supports and the neglected part is bounded with
//! the envelopes of the factors, entry by entry.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{AxisInterval, IndexBox, LatticeDomain, MultiIndex};
use crate::linalg::{from_row_major, norm2, vec_norm, CompensatedSum};
use crate::sequence::{Envelope, SequenceTable, ValueKind};
use crate::series::{geo_sum, pow, product_excess};
use crate::ztransform::{eval_forward, natural_region};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConvMode {
    /// `D' = D'' = N0^n`
    Faltung,
    /// `D' = N0^n`, `D'' = Z^n`
    Weyl,
    General,
    /// Convolution along the listed axes (0-based, strictly increasing).
    Axes(Vec<usize>),
}

/// Domains and mode of a convolution product, with the domain of the result.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvPlan {
    pub left: LatticeDomain,
    pub right: LatticeDomain,
    pub mode: ConvMode,
    pub result_domain: LatticeDomain,
}

fn validate_axes(axes: &[usize], n: usize) -> Result<()> {
    if axes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidAxes(format!("{axes:?} is not strictly increasing")));
    }
    if axes.iter().any(|&a| a >= n) {
        return Err(Error::InvalidAxes(format!("{axes:?} out of range for dimension {n}")));
    }
    Ok(())
}

/// Domain of `a *^{l,j} b`: sums on the convolution axes, `D''` elsewhere.
fn axes_result_domain(left: &LatticeDomain, right: &LatticeDomain, axes: &[usize]) -> Result<LatticeDomain> {
    let unrepresentable = || Error::UnrepresentableSum {
        left: left.kind_name().to_string(),
        right: right.kind_name().to_string(),
    };
    if let (Some(a), Some(b)) = (left.axis_intervals(), right.axis_intervals()) {
        let mut ivs = b.clone();
        for (t, &j) in axes.iter().enumerate() {
            ivs[j] = a[t].minkowski(&b[j]);
        }
        return LatticeDomain::from_intervals(&ivs).ok_or_else(unrepresentable);
    }
    if let (Some(pa), Some(pb)) = (left.finite_points(), right.finite_points()) {
        let pts = pb.iter().flat_map(|q| {
            pa.iter().map(move |p| {
                let mut k = q.clone().into_vec();
                for (t, &j) in axes.iter().enumerate() {
                    k[j] += p[t];
                }
                MultiIndex::new(k)
            })
        });
        return LatticeDomain::finite(right.dim(), pts);
    }
    Err(unrepresentable())
}

impl ConvPlan {
    pub fn new(mode: ConvMode, left: LatticeDomain, right: LatticeDomain) -> Result<Self> {
        let n = right.dim();
        let result_domain = match &mode {
            ConvMode::Faltung => {
                if left != LatticeDomain::nonneg(n) || right != LatticeDomain::nonneg(n) {
                    return Err(Error::UnsupportedDomain("Faltung needs both factors on the non-negative orthant".into()));
                }
                LatticeDomain::nonneg(n)
            }
            ConvMode::Weyl => {
                if left != LatticeDomain::nonneg(n) || right != LatticeDomain::full(n) {
                    return Err(Error::UnsupportedDomain(
                        "Weyl product needs the kernel on the non-negative orthant and the sequence on the full lattice".into(),
                    ));
                }
                LatticeDomain::full(n)
            }
            ConvMode::General => {
                Error::check_dim(n, left.dim())?;
                left.minkowski_sum(&right)?
            }
            ConvMode::Axes(axes) => {
                validate_axes(axes, n)?;
                if axes.is_empty() {
                    return Err(Error::InvalidAxes("empty axis set; the l = 0 product is the identity".into()));
                }
                Error::check_dim(axes.len(), left.dim())?;
                axes_result_domain(&left, &right, axes)?
            }
        };
        Ok(ConvPlan { left, right, mode, result_domain })
    }

    pub fn faltung(n: usize) -> Self {
        Self::new(ConvMode::Faltung, LatticeDomain::nonneg(n), LatticeDomain::nonneg(n)).expect("valid Faltung plan")
    }

    pub fn weyl(n: usize) -> Self {
        Self::new(ConvMode::Weyl, LatticeDomain::nonneg(n), LatticeDomain::full(n)).expect("valid Weyl plan")
    }

    pub fn general(left: LatticeDomain, right: LatticeDomain) -> Result<Self> {
        Self::new(ConvMode::General, left, right)
    }

    pub fn axes(left: LatticeDomain, right: LatticeDomain, axes: Vec<usize>) -> Result<Self> {
        Self::new(ConvMode::Axes(axes), left, right)
    }

    /// Axes along which the product convolves.
    pub fn conv_axes(&self) -> Vec<usize> {
        match &self.mode {
            ConvMode::Axes(a) => a.clone(),
            _ => (0..self.right.dim()).collect(),
        }
    }
}

/// Truncation tolerance for infinite sums.
#[derive(Clone, Copy, Debug)]
pub struct ConvOptions {
    pub tail_rel_tol: f64,
    pub tail_abs_floor: f64,
    /// Fail when a tail bound exceeds the tolerance (otherwise only record it).
    pub enforce_tolerance: bool,
}

impl Default for ConvOptions {
    fn default() -> Self {
        ConvOptions { tail_rel_tol: 1e-12, tail_abs_floor: 1e-14, enforce_tolerance: true }
    }
}

impl ConvOptions {
    pub fn recording() -> Self {
        ConvOptions { enforce_tolerance: false, ..Self::default() }
    }
}

/// Product table plus per-entry ledgers, both in window order.
#[derive(Clone, Debug)]
pub struct ConvOutput {
    pub table: SequenceTable,
    /// Bound on the neglected part of each sum.
    pub tail_bounds: Vec<f64>,
    /// `sum ||a|| ||b||` over the terms actually summed.
    pub abs_mass: Vec<f64>,
}

impl ConvOutput {
    pub fn max_tail(&self) -> f64 {
        self.tail_bounds.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_mass(&self) -> f64 {
        self.abs_mass.iter().copied().fold(0.0, f64::max)
    }
}

/// `sum_{w in iv} phi_a(k - w) phi_b(w)` for two one-axis envelope weights.
fn pair_sum(k: i64, iv: AxisInterval, a: (f64, f64), b: (f64, f64)) -> f64 {
    if iv.is_empty() {
        return 0.0;
    }
    let mut s = 0.0;
    // pieces by the sign of w (b) and of k - w (a)
    for (bw, b_iv) in [(b.0, AxisInterval { lo: Some(0), hi: None }), (b.1, AxisInterval { lo: None, hi: Some(-1) })] {
        for (aw, a_iv) in [(a.0, AxisInterval { lo: None, hi: Some(k) }), (a.1, AxisInterval { lo: Some(k + 1), hi: None })] {
            let piece = iv.intersect(&b_iv).intersect(&a_iv);
            if piece.is_empty() {
                continue;
            }
            // aw^{k-w} bw^{w} = aw^k (bw/aw)^w
            let g = geo_sum(bw / aw, piece.lo, piece.hi);
            if g == 0.0 {
                continue;
            }
            s += pow(aw, k) * g;
        }
    }
    s
}

fn env_pair(env: &Envelope, axis: usize) -> (f64, f64) {
    (env.rates()[axis], env.negative_rate(axis))
}

fn result_kind(a: ValueKind, b: ValueKind) -> Result<ValueKind> {
    match (a, b) {
        (ValueKind::Scalar, k) => Ok(k),
        (ValueKind::Matrix(m), ValueKind::Vector(p)) if m == p => Ok(ValueKind::Vector(m)),
        (ValueKind::Matrix(m), ValueKind::Matrix(p)) if m == p => Ok(ValueKind::Matrix(m)),
        (ValueKind::Matrix(1), ValueKind::Scalar) => Ok(ValueKind::Scalar),
        (x, y) => Err(Error::KindMismatch(format!(
            "cannot multiply {} of order {} with {} of order {}",
            x.name(),
            x.order(),
            y.name(),
            y.order()
        ))),
    }
}

/// `acc += a * b` for the supported value shapes.
fn accumulate(acc: &mut [CompensatedSum], a: &[Complex64], a_kind: ValueKind, b: &[Complex64], b_kind: ValueKind) {
    match (a_kind, b_kind) {
        (ValueKind::Scalar, _) | (ValueKind::Matrix(1), _) => {
            for (s, x) in acc.iter_mut().zip(b) {
                s.add(a[0] * x);
            }
        }
        (ValueKind::Matrix(m), ValueKind::Vector(_)) => {
            for i in 0..m {
                for j in 0..m {
                    acc[i].add(a[i * m + j] * b[j]);
                }
            }
        }
        (ValueKind::Matrix(m), ValueKind::Matrix(_)) => {
            for i in 0..m {
                for j in 0..m {
                    for t in 0..m {
                        acc[i * m + j].add(a[i * m + t] * b[t * m + j]);
                    }
                }
            }
        }
        _ => unreachable!("shape checked by result_kind"),
    }
}

struct Factor<'a> {
    table: &'a SequenceTable,
    norms: Vec<f64>,
    ivs: Vec<AxisInterval>,
    product: bool,
}

impl<'a> Factor<'a> {
    fn new(table: &'a SequenceTable) -> Self {
        let norms = match table.kind() {
            ValueKind::Matrix(m) if m > 1 => (0..table.support().len())
                .map(|o| norm2(&from_row_major(m, table.value_at_offset(o))))
                .collect(),
            _ => (0..table.support().len()).map(|o| vec_norm(table.value_at_offset(o))).collect(),
        };
        Factor { table, norms, ivs: table.domain().bounding_intervals(), product: table.domain().is_product() }
    }

    fn in_domain(&self, k: &[i64]) -> bool {
        if self.product {
            k.iter().zip(&self.ivs).all(|(&c, iv)| iv.contains(c))
        } else {
            self.table.domain().contains(&MultiIndex::from(k))
        }
    }
}

struct Entry {
    value: Vec<Complex64>,
    tail: f64,
    mass: f64,
}

#[allow(clippy::too_many_arguments)]
fn entry(
    k: &MultiIndex,
    a: &Factor,
    b: &Factor,
    axes: &[usize],
    out_kind: ValueKind,
    result_domain: &LatticeDomain,
) -> Result<Entry> {
    let e = out_kind.entries();
    if !result_domain.contains(k) {
        return Ok(Entry { value: vec![Complex64::ZERO; e], tail: 0.0, mass: 0.0 });
    }
    let n = k.dim();
    let l = axes.len();
    let bt = b.table;
    let at = a.table;
    let bsup = bt.support();
    let asup = at.support();
    // admissible w per convolution axis: w in D''_j and k_j - w in D'_t
    let ranges: Vec<AxisInterval> = axes
        .iter()
        .enumerate()
        .map(|(t, &j)| b.ivs[j].intersect(&a.ivs[t].reflect_from(k[j])))
        .collect();
    if ranges.iter().any(|r| r.is_empty()) {
        return Ok(Entry { value: vec![Complex64::ZERO; e], tail: 0.0, mass: 0.0 });
    }
    let mut is_axis = vec![false; n];
    for &j in axes {
        is_axis[j] = true;
    }
    let off_axis_stored = (0..n).filter(|&i| !is_axis[i]).all(|i| bsup.axis(i).contains(k[i]));

    let mut acc = vec![CompensatedSum::new(); e];
    let mut tail = 0.0;
    let mut mass = 0.0;

    // terms with b stored
    if off_axis_stored {
        let mut iter_ranges = Vec::with_capacity(l);
        for (t, &j) in axes.iter().enumerate() {
            let mut r = ranges[t].intersect(&bsup.axis(j));
            if at.envelope().is_none() {
                r = r.intersect(&asup.axis(t).reflect_from(k[j]));
            }
            iter_ranges.push(r);
        }
        if let Some(wbox) = IndexBox::from_intervals(&iter_ranges) {
            let mut bidx = k.coords().to_vec();
            let mut aidx = vec![0i64; l];
            for w in wbox.iter() {
                for (t, &j) in axes.iter().enumerate() {
                    bidx[j] = w[t];
                    aidx[t] = k[j] - w[t];
                }
                if !b.product && !b.in_domain(&bidx) || !a.product && !a.in_domain(&aidx) {
                    continue;
                }
                let bo = bsup.offset_of(&bidx).expect("inside stored range");
                match asup.offset_of(&aidx) {
                    Some(ao) => {
                        let an = a.norms[ao];
                        if an == 0.0 {
                            continue;
                        }
                        accumulate(&mut acc, at.value_at_offset(ao), at.kind(), bt.value_at_offset(bo), bt.kind());
                        mass += an * b.norms[bo];
                    }
                    None => {
                        if let Some(env) = at.envelope() {
                            tail += env.at_coords(&aidx) * b.norms[bo];
                        }
                    }
                }
            }
        }
    }

    // terms with b outside its stored support
    if let Some(env_b) = bt.envelope() {
        match at.envelope() {
            None => {
                let mut bidx = k.coords().to_vec();
                for (ao, s) in asup.iter().enumerate() {
                    let an = a.norms[ao];
                    if an == 0.0 || !a.in_domain(s.coords()) {
                        continue;
                    }
                    for (t, &j) in axes.iter().enumerate() {
                        bidx[j] = k[j] - s[t];
                    }
                    if b.in_domain(&bidx) && bsup.offset_of(&bidx).is_none() {
                        tail += an * env_b.at_coords(&bidx);
                    }
                }
            }
            Some(env_a) => {
                if !a.product || !b.product {
                    return Err(Error::UnsupportedDomain("envelope tails need product-form domains".into()));
                }
                let mut inner = Vec::with_capacity(l);
                let mut extra = Vec::with_capacity(l);
                for (t, &j) in axes.iter().enumerate() {
                    let pa = env_pair(env_a, t);
                    let pb = env_pair(env_b, j);
                    let stored = ranges[t].intersect(&bsup.axis(j));
                    let below = ranges[t].intersect(&AxisInterval { lo: None, hi: Some(bsup.lo()[j] - 1) });
                    let above = ranges[t].intersect(&AxisInterval { lo: Some(bsup.hi()[j] + 1), hi: None });
                    inner.push(pair_sum(k[j], stored, pa, pb));
                    extra.push(pair_sum(k[j], below, pa, pb) + pair_sum(k[j], above, pa, pb));
                }
                let off: f64 = (0..n).filter(|&i| !is_axis[i]).map(|i| env_b.axis_weight(i, k[i])).product();
                let scale = env_a.bound() * env_b.bound() * off;
                let part = if off_axis_stored {
                    product_excess(&inner, &extra)
                } else {
                    inner.iter().zip(&extra).map(|(x, y)| x + y).product()
                };
                tail += scale * part;
            }
        }
    }
    if !tail.is_finite() {
        return Err(Error::DivergentConvolution { index: k.coords().to_vec() });
    }
    Ok(Entry { value: acc.iter().map(|s| s.value()).collect(), tail, mass })
}

/// Evaluate `a *_D^{l,j} b` on `window`. `a` may be scalar or matrix valued; matrix
/// values act on vector or matrix values of `b`.
pub fn convolve_on_axes(
    a: &SequenceTable,
    b: &SequenceTable,
    axes: &[usize],
    result_domain: &LatticeDomain,
    window: &IndexBox,
    opts: &ConvOptions,
) -> Result<ConvOutput> {
    let n = b.dim();
    Error::check_dim(n, window.dim())?;
    Error::check_dim(axes.len(), a.dim())?;
    validate_axes(axes, n)?;
    let out_kind = result_kind(a.kind(), b.kind())?;
    let fa = Factor::new(a);
    let fb = Factor::new(b);
    let entries: Vec<Result<Entry>> = (0..window.len())
        .into_par_iter()
        .map(|o| entry(&window.index_at(o), &fa, &fb, axes, out_kind, result_domain))
        .collect();
    let e = out_kind.entries();
    let mut values = Vec::with_capacity(window.len() * e);
    let mut tails = Vec::with_capacity(window.len());
    let mut masses = Vec::with_capacity(window.len());
    for (o, r) in entries.into_iter().enumerate() {
        let ent = r?;
        if opts.enforce_tolerance {
            let mag = vec_norm(&ent.value);
            let tol = opts.tail_rel_tol * mag + opts.tail_abs_floor;
            if ent.tail > tol {
                return Err(Error::TruncationExceedsTolerance {
                    index: window.index_at(o).into_vec(),
                    bound: ent.tail,
                    tolerance: tol,
                });
            }
        }
        values.extend(ent.value);
        tails.push(ent.tail);
        masses.push(ent.mass);
    }
    let table = SequenceTable::new(result_domain.clone(), window.clone(), out_kind, values, None)?;
    Ok(ConvOutput { table, tail_bounds: tails, abs_mass: masses })
}

/// Evaluate a planned product on `window`.
pub fn convolve(plan: &ConvPlan, a: &SequenceTable, b: &SequenceTable, window: &IndexBox, opts: &ConvOptions) -> Result<ConvOutput> {
    if a.domain() != &plan.left || b.domain() != &plan.right {
        return Err(Error::UnsupportedDomain("factor domains differ from the plan".into()));
    }
    if a.kind() != ValueKind::Scalar {
        return Err(Error::KindMismatch("the left factor must be scalar".into()));
    }
    convolve_on_axes(a, b, &plan.conv_axes(), &plan.result_domain, window, opts)
}

/// `(a *_D b)(k) = sum_{l in D'', k - l in D'} a(k - l) b(l)` with `D' = domain(a)`,
/// `D'' = domain(b)`.
pub fn conv_general(a: &SequenceTable, b: &SequenceTable, window: &IndexBox) -> Result<SequenceTable> {
    Ok(conv_general_with(a, b, window, &ConvOptions::default())?.table)
}

pub fn conv_general_with(a: &SequenceTable, b: &SequenceTable, window: &IndexBox, opts: &ConvOptions) -> Result<ConvOutput> {
    Error::check_dim(b.dim(), a.dim())?;
    let plan = ConvPlan::general(a.domain().clone(), b.domain().clone())?;
    convolve(&plan, a, b, window, opts)
}

/// Product along `axes` (0-based, strictly increasing); an empty axis set returns `b`.
pub fn conv_axes(a: &SequenceTable, b: &SequenceTable, axes: &[usize], window: &IndexBox) -> Result<SequenceTable> {
    Ok(conv_axes_with(a, b, axes, window, &ConvOptions::default())?.table)
}

pub fn conv_axes_with(
    a: &SequenceTable,
    b: &SequenceTable,
    axes: &[usize],
    window: &IndexBox,
    opts: &ConvOptions,
) -> Result<ConvOutput> {
    if axes.is_empty() {
        validate_axes(axes, b.dim())?;
        let table = b.with_support(window.clone())?.with_envelope(None)?;
        let len = window.len();
        return Ok(ConvOutput { table, tail_bounds: vec![0.0; len], abs_mass: vec![0.0; len] });
    }
    let plan = ConvPlan::axes(a.domain().clone(), b.domain().clone(), axes.to_vec())?;
    convolve(&plan, a, b, window, opts)
}

/// Outcome of comparing `F_{a*b}(z)` with `F_a(z_J) F_b(z)`.
#[derive(Clone, Debug)]
pub struct TheoremReport {
    pub deviations: Vec<f64>,
    pub max_rel_deviation: f64,
}

/// Check the convolution theorem at the given points for finite-support factors.
pub fn conv_theorem_check(a: &SequenceTable, b: &SequenceTable, plan: &ConvPlan, points: &[Vec<Complex64>]) -> Result<TheoremReport> {
    if !a.has_finite_support() || !b.has_finite_support() {
        return Err(Error::Unsupported("the theorem check needs finite-support factors".into()));
    }
    let axes = plan.conv_axes();
    let n = b.dim();
    let mut ivs = b.support().intervals();
    for (t, &j) in axes.iter().enumerate() {
        ivs[j] = a.support().axis(t).minkowski(&b.support().axis(j));
    }
    let window = IndexBox::from_intervals(&ivs).expect("finite supports");
    let product = convolve(plan, a, b, &window, &ConvOptions::recording())?.table;
    let ra = natural_region(a)?;
    let rb = natural_region(b)?;
    let mut deviations = Vec::with_capacity(points.len());
    for z in points {
        Error::check_dim(n, z.len())?;
        let za: Vec<Complex64> = axes.iter().map(|&j| z[j]).collect();
        if !ra.contains(&za) || !rb.contains(z) {
            return Err(Error::PointOutsideRegion);
        }
        let lhs = eval_forward(&product, z)?.value;
        let fa = eval_forward(a, &za)?.scalar();
        let fb = eval_forward(b, z)?.value;
        let rhs: Vec<Complex64> = fb.iter().map(|x| fa * x).collect();
        let diff: Vec<Complex64> = lhs.iter().zip(&rhs).map(|(x, y)| x - y).collect();
        deviations.push(vec_norm(&diff) / vec_norm(&rhs).max(f64::MIN_POSITIVE));
    }
    let max_rel_deviation = deviations.iter().copied().fold(0.0, f64::max);
    Ok(TheoremReport { deviations, max_rel_deviation })
}
