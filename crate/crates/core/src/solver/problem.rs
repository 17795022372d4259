//! Operator pencils and Volterra symbols.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fractional::{difference_weights, WeylOperatorSpec};
use crate::lattice::{AxisInterval, IndexBox, MultiIndex};
use crate::linalg::{norm2, CMatrix};
use crate::sequence::{SequenceTable, ValueKind};
use crate::ztransform::{eval_forward, natural_region, PolyAnnulus};

/// Relative size of the kernel-transform error radius tolerated by [`symbol_eval`].
pub const SYMBOL_TAIL_TOL: f64 = 1e-6;

fn check_square(a: &CMatrix, m: usize, what: &str) -> Result<()> {
    if a.nrows() != m || a.ncols() != m {
        return Err(Error::InvalidProblem(format!(
            "{what} is {}x{}, expected {m}x{m}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

fn check_finite(a: &CMatrix, what: &str) -> Result<()> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidProblem(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// `z^j` for a multi-index `j`.
pub fn monomial(z: &[Complex64], j: &[i64]) -> Result<Complex64> {
    let mut p = Complex64::new(1.0, 0.0);
    for (axis, (&zi, &ji)) in z.iter().zip(j).enumerate() {
        if ji == 0 {
            continue;
        }
        if zi == Complex64::ZERO {
            if ji < 0 {
                return Err(Error::ZeroCoordinate { axis });
            }
            return Ok(Complex64::ZERO);
        }
        p *= zi.powi(ji as i32);
    }
    Ok(p)
}

/// `P(z) = sum_j z^j A_j` together with the data operator `C`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorPencil {
    dim: usize,
    state: usize,
    terms: Vec<(MultiIndex, CMatrix)>,
    c: CMatrix,
}

impl OperatorPencil {
    pub fn new(terms: Vec<(MultiIndex, CMatrix)>, c: CMatrix) -> Result<Self> {
        let Some((first, a0)) = terms.first() else {
            return Err(Error::InvalidProblem("a pencil needs at least one term".into()));
        };
        let dim = first.dim();
        let state = a0.nrows();
        if dim == 0 || state == 0 {
            return Err(Error::InvalidProblem("empty lattice dimension or state".into()));
        }
        check_square(&c, state, "C")?;
        check_finite(&c, "C")?;
        for (i, (j, a)) in terms.iter().enumerate() {
            Error::check_dim(dim, j.dim())?;
            check_square(a, state, "pencil coefficient")?;
            check_finite(a, "pencil coefficient")?;
            if terms[..i].iter().any(|(k, _)| k == j) {
                return Err(Error::InvalidProblem(format!("repeated pencil index {j}")));
            }
        }
        Ok(OperatorPencil { dim, state, terms, c })
    }

    /// Scalar pencil from `(j, a_j)` pairs with `C = 1`.
    pub fn scalar(terms: Vec<(MultiIndex, Complex64)>) -> Result<Self> {
        let terms = terms.into_iter().map(|(j, a)| (j, CMatrix::from_element(1, 1, a))).collect();
        Self::new(terms, CMatrix::identity(1, 1))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn terms(&self) -> &[(MultiIndex, CMatrix)] {
        &self.terms
    }

    pub fn c(&self) -> &CMatrix {
        &self.c
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<CMatrix> {
        pencil_eval(self, z)
    }

    /// True when every term index is coordinatewise non-negative.
    pub fn nonneg_shifts(&self) -> bool {
        self.terms.iter().all(|(j, _)| j.coords().iter().all(|&x| x >= 0))
    }
}

/// `sum_j z^j A_j`.
pub fn pencil_eval(p: &OperatorPencil, z: &[Complex64]) -> Result<CMatrix> {
    Error::check_dim(p.dim, z.len())?;
    let mut out = CMatrix::zeros(p.state, p.state);
    for (j, a) in &p.terms {
        let w = monomial(z, j.coords())?;
        out += a * w;
    }
    Ok(out)
}

/// `z^shift F_a(z) A` in a multi-term equation on the full lattice.
#[derive(Clone, Debug)]
pub struct KernelTerm {
    pub kernel: SequenceTable,
    pub shift: MultiIndex,
    pub op: CMatrix,
}

/// `Delta^m Delta_{W,a}` shifted by `shift` and followed by `op`.
#[derive(Clone, Debug)]
pub struct WeylTerm {
    pub spec: WeylOperatorSpec,
    pub shift: i64,
    pub op: CMatrix,
}

/// Partial convolution of `kernel` along `axes`, followed by `op`.
#[derive(Clone, Debug)]
pub struct AxesTerm {
    pub kernel: SequenceTable,
    pub axes: Vec<usize>,
    pub op: CMatrix,
}

#[derive(Clone, Debug)]
pub enum SymbolVariant {
    /// `M(z) = B + sum_w z^{k_w} F_{a_w}(z) A_w`.
    MultiTermZn { b: CMatrix, terms: Vec<KernelTerm> },
    /// `M(z) = sum_w sum_j (-1)^{m_w - j} C(m_w, j) z^{k_w + j} F_{a_w}(z) A_w + z^{k_0} A_0`.
    WeylFractional1D { terms: Vec<WeylTerm>, a0: CMatrix, k0: i64 },
    /// `M(z) = sum F_a(z_{j_1}, ..., z_{j_l}) A`.
    MixedAxes { terms: Vec<AxesTerm> },
}

/// Symbol of a Volterra-type equation with its data operator `C`.
#[derive(Clone, Debug)]
pub struct VolterraSymbol {
    dim: usize,
    state: usize,
    variant: SymbolVariant,
    c: CMatrix,
    op_norms: Vec<f64>,
}

/// Symbol value with a bound on the error from kernel-transform truncation and rounding.
#[derive(Clone, Debug)]
pub struct SymbolValue {
    pub matrix: CMatrix,
    pub error_radius: f64,
}

fn check_kernel(a: &SequenceTable, dim: usize) -> Result<()> {
    Error::check_dim(dim, a.dim())?;
    if a.kind() != ValueKind::Scalar {
        return Err(Error::KindMismatch("kernels are scalar sequences".into()));
    }
    if a.envelope().is_none() && !a.domain().is_finite() && !a.has_finite_support() {
        return Err(Error::NoEnvelope);
    }
    Ok(())
}

impl VolterraSymbol {
    pub fn new(dim: usize, variant: SymbolVariant, c: CMatrix) -> Result<Self> {
        let state = c.nrows();
        if dim == 0 || state == 0 {
            return Err(Error::InvalidProblem("empty lattice dimension or state".into()));
        }
        check_square(&c, state, "C")?;
        check_finite(&c, "C")?;
        let mut ops: Vec<&CMatrix> = Vec::new();
        match &variant {
            SymbolVariant::MultiTermZn { b, terms } => {
                ops.push(b);
                for t in terms {
                    check_kernel(&t.kernel, dim)?;
                    Error::check_dim(dim, t.shift.dim())?;
                    ops.push(&t.op);
                }
            }
            SymbolVariant::WeylFractional1D { terms, a0, .. } => {
                if dim != 1 {
                    return Err(Error::InvalidProblem("the Weyl variant is one-dimensional".into()));
                }
                ops.push(a0);
                for t in terms {
                    ops.push(&t.op);
                }
            }
            SymbolVariant::MixedAxes { terms } => {
                if terms.is_empty() {
                    return Err(Error::InvalidProblem("mixed-axes symbol without terms".into()));
                }
                for t in terms {
                    if t.axes.is_empty() {
                        return Err(Error::InvalidAxes("a mixed-axes term needs at least one axis".into()));
                    }
                    for (i, &j) in t.axes.iter().enumerate() {
                        if j >= dim || t.axes[..i].contains(&j) {
                            return Err(Error::InvalidAxes(format!("{:?} is not a set of axes below {dim}", t.axes)));
                        }
                    }
                    check_kernel(&t.kernel, t.axes.len())?;
                    ops.push(&t.op);
                }
            }
        }
        for a in &ops {
            check_square(a, state, "operator coefficient")?;
            check_finite(a, "operator coefficient")?;
        }
        let op_norms = ops.iter().map(|a| norm2(a)).collect();
        Ok(VolterraSymbol { dim, state, variant, c, op_norms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn variant(&self) -> &SymbolVariant {
        &self.variant
    }

    pub fn c(&self) -> &CMatrix {
        &self.c
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<SymbolValue> {
        symbol_eval(self, z)
    }

    /// Moduli on which every kernel transform converges.
    pub fn region(&self) -> Result<PolyAnnulus> {
        let mut region = PolyAnnulus::punctured(self.dim);
        match &self.variant {
            SymbolVariant::MultiTermZn { terms, .. } => {
                for t in terms {
                    region = region.intersect(&natural_region(&t.kernel)?);
                }
            }
            SymbolVariant::WeylFractional1D { terms, .. } => {
                for t in terms {
                    region = region.intersect(&natural_region(t.spec.kernel())?);
                }
            }
            SymbolVariant::MixedAxes { terms } => {
                for t in terms {
                    region = region.intersect(&natural_region(&t.kernel)?.embed(self.dim, &t.axes));
                }
            }
        }
        Ok(region)
    }
}

fn kernel_transform(a: &SequenceTable, z: &[Complex64]) -> Result<(Complex64, f64)> {
    let ev = eval_forward(a, z)?;
    Ok((ev.scalar(), ev.error_bound()))
}

/// Evaluate the symbol matrix at `z`, folding kernel-transform error bounds into
/// the reported radius.
pub fn symbol_eval(s: &VolterraSymbol, z: &[Complex64]) -> Result<SymbolValue> {
    Error::check_dim(s.dim, z.len())?;
    let m = s.state;
    let mut out = CMatrix::zeros(m, m);
    let mut radius = 0.0;
    let mut magnitude = 0.0;
    let norms = &s.op_norms;
    match &s.variant {
        SymbolVariant::MultiTermZn { b, terms } => {
            out += b;
            magnitude += norms[0];
            for (t, term) in terms.iter().enumerate() {
                let (fa, err) = kernel_transform(&term.kernel, z)?;
                let w = monomial(z, term.shift.coords())?;
                out += &term.op * (w * fa);
                radius += w.norm() * err * norms[t + 1];
                magnitude += (w * fa).norm() * norms[t + 1];
            }
        }
        SymbolVariant::WeylFractional1D { terms, a0, k0 } => {
            let w0 = monomial(z, &[*k0])?;
            out += a0 * w0;
            magnitude += w0.norm() * norms[0];
            for (t, term) in terms.iter().enumerate() {
                let (fa, err) = kernel_transform(term.spec.kernel(), z)?;
                let order = term.spec.order();
                let mut poly = Complex64::ZERO;
                let mut poly_abs = 0.0;
                for (j, c) in difference_weights(order).into_iter().enumerate() {
                    let w = monomial(z, &[term.shift + j as i64])?;
                    poly += w * c;
                    poly_abs += w.norm() * c.abs();
                }
                out += &term.op * (poly * fa);
                radius += poly_abs * err * norms[t + 1];
                magnitude += poly_abs * fa.norm() * norms[t + 1];
            }
        }
        SymbolVariant::MixedAxes { terms } => {
            for (t, term) in terms.iter().enumerate() {
                let sub: Vec<Complex64> = term.axes.iter().map(|&j| z[j]).collect();
                let (fa, err) = kernel_transform(&term.kernel, &sub)?;
                out += &term.op * fa;
                radius += err * norms[t];
                magnitude += fa.norm() * norms[t];
            }
        }
    }
    let radius = radius + 8.0 * f64::EPSILON * magnitude;
    let tol = SYMBOL_TAIL_TOL * (norm2(&out) + f64::MIN_POSITIVE);
    if !(radius <= tol) {
        return Err(Error::TruncationExceedsTolerance { index: Vec::new(), bound: radius, tolerance: tol });
    }
    Ok(SymbolValue { matrix: out, error_radius: radius })
}

/// Offsets, relative to `k`, at which one term of the left-hand side reads `u`.
/// `lo = None` means the term reaches arbitrarily far down (a causal convolution).
#[derive(Clone, Debug, PartialEq)]
pub struct Reach {
    pub lo: Vec<Option<i64>>,
    pub hi: Vec<i64>,
}

/// Offsets `k - s` for `s` in the kernel's effective support, per axis.
fn kernel_reach(a: &SequenceTable, shift: &[i64]) -> Result<Reach> {
    let l = a.dim();
    let ivs = if a.envelope().is_none() {
        a.support().intervals()
    } else {
        a.domain().bounding_intervals()
    };
    let mut lo = Vec::with_capacity(l);
    let mut hi = Vec::with_capacity(l);
    for i in 0..l {
        let AxisInterval { lo: slo, hi: shi } = ivs[i];
        let Some(slo) = slo else {
            return Err(Error::InsufficientWindow(format!(
                "the kernel on axis {} reaches arbitrarily far ahead",
                i + 1
            )));
        };
        hi.push(shift[i] - slo);
        lo.push(shi.map(|h| shift[i] - h));
    }
    Ok(Reach { lo, hi })
}

/// A problem given either by a pencil or by a Volterra symbol.
#[derive(Clone, Debug)]
pub enum Problem {
    Pencil(OperatorPencil),
    Volterra(VolterraSymbol),
}

impl From<OperatorPencil> for Problem {
    fn from(p: OperatorPencil) -> Self {
        Problem::Pencil(p)
    }
}

impl From<VolterraSymbol> for Problem {
    fn from(s: VolterraSymbol) -> Self {
        Problem::Volterra(s)
    }
}

impl Problem {
    pub fn dim(&self) -> usize {
        match self {
            Problem::Pencil(p) => p.dim,
            Problem::Volterra(s) => s.dim,
        }
    }

    pub fn state(&self) -> usize {
        match self {
            Problem::Pencil(p) => p.state,
            Problem::Volterra(s) => s.state,
        }
    }

    pub fn c(&self) -> &CMatrix {
        match self {
            Problem::Pencil(p) => &p.c,
            Problem::Volterra(s) => &s.c,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Problem::Pencil(_) => "pencil",
            Problem::Volterra(s) => match s.variant {
                SymbolVariant::MultiTermZn { .. } => "volterra_zn",
                SymbolVariant::WeylFractional1D { .. } => "weyl_1d",
                SymbolVariant::MixedAxes { .. } => "mixed_axes",
            },
        }
    }

    /// Symbol matrix at `z`; exact for pencils.
    pub fn symbol(&self, z: &[Complex64]) -> Result<SymbolValue> {
        match self {
            Problem::Pencil(p) => {
                let matrix = pencil_eval(p, z)?;
                let mag: f64 = p
                    .terms
                    .iter()
                    .map(|(j, a)| monomial(z, j.coords()).map(|w| w.norm()).unwrap_or(0.0) * norm2(a))
                    .sum();
                Ok(SymbolValue { matrix, error_radius: 4.0 * f64::EPSILON * mag })
            }
            Problem::Volterra(s) => symbol_eval(s, z),
        }
    }

    pub fn region(&self) -> Result<PolyAnnulus> {
        match self {
            Problem::Pencil(p) => Ok(PolyAnnulus::punctured(p.dim)),
            Problem::Volterra(s) => s.region(),
        }
    }

    /// Where each left-hand-side term reads `u`, relative to the evaluation point.
    pub fn reaches(&self) -> Result<Vec<Reach>> {
        let n = self.dim();
        let point = |j: &[i64]| Reach { lo: j.iter().map(|&x| Some(x)).collect(), hi: j.to_vec() };
        let mut out = Vec::new();
        match self {
            Problem::Pencil(p) => {
                for (j, _) in &p.terms {
                    out.push(point(j.coords()));
                }
            }
            Problem::Volterra(s) => match &s.variant {
                SymbolVariant::MultiTermZn { terms, .. } => {
                    out.push(point(&vec![0; n]));
                    for t in terms {
                        out.push(kernel_reach(&t.kernel, t.shift.coords())?);
                    }
                }
                SymbolVariant::WeylFractional1D { terms, k0, .. } => {
                    out.push(point(&[*k0]));
                    for t in terms {
                        let r = kernel_reach(t.spec.kernel(), &[t.shift])?;
                        let m = t.spec.order() as i64;
                        out.push(Reach { lo: r.lo, hi: vec![r.hi[0] + m] });
                    }
                }
                SymbolVariant::MixedAxes { terms } => {
                    for t in terms {
                        let r = kernel_reach(&t.kernel, &vec![0; t.axes.len()])?;
                        let mut lo = vec![Some(0); n];
                        let mut hi = vec![0; n];
                        for (i, &j) in t.axes.iter().enumerate() {
                            lo[j] = r.lo[i];
                            hi[j] = r.hi[i];
                        }
                        out.push(Reach { lo, hi });
                    }
                }
            },
        }
        Ok(out)
    }

    /// Bound on `sup_k |LHS(v)(k)|` over `check` for `v` supported in `u_box` with
    /// `sup |v| <= 1`.
    pub fn operator_gain(&self, check: &IndexBox, u_box: &IndexBox) -> Result<f64> {
        Error::check_dim(self.dim(), check.dim())?;
        Error::check_dim(self.dim(), u_box.dim())?;
        let n = self.dim();
        match self {
            Problem::Pencil(p) => Ok(p.terms.iter().map(|(_, a)| norm2(a)).sum()),
            Problem::Volterra(s) => {
                let norms = &s.op_norms;
                let mut gain = 0.0;
                match &s.variant {
                    SymbolVariant::MultiTermZn { terms, .. } => {
                        gain += norms[0];
                        for (t, term) in terms.iter().enumerate() {
                            // s ranges over k + shift - u_box
                            let ivs: Vec<AxisInterval> = (0..n)
                                .map(|i| {
                                    let sh = term.shift[i];
                                    AxisInterval::finite(check.lo()[i] + sh - u_box.hi()[i], check.hi()[i] + sh - u_box.lo()[i])
                                })
                                .collect();
                            gain += norms[t + 1] * kernel_mass(&term.kernel, &ivs);
                        }
                    }
                    SymbolVariant::WeylFractional1D { terms, .. } => {
                        gain += norms[0];
                        for (t, term) in terms.iter().enumerate() {
                            let m = term.spec.order();
                            let top = check.hi()[0] + term.shift + m as i64 - u_box.lo()[0];
                            let iv = AxisInterval::finite(0, top.max(0));
                            gain += norms[t + 1] * 2f64.powi(m as i32) * kernel_mass(term.spec.kernel(), &[iv]);
                        }
                    }
                    SymbolVariant::MixedAxes { terms } => {
                        for (t, term) in terms.iter().enumerate() {
                            let ivs: Vec<AxisInterval> = term
                                .axes
                                .iter()
                                .map(|&j| AxisInterval::finite(check.lo()[j] - u_box.hi()[j], check.hi()[j] - u_box.lo()[j]))
                                .collect();
                            gain += norms[t] * kernel_mass(&term.kernel, &ivs);
                        }
                    }
                }
                Ok(gain)
            }
        }
    }
}

/// Upper bound on `sum |a(s)|` over the box `ivs` intersected with the domain of `a`.
fn kernel_mass(a: &SequenceTable, ivs: &[AxisInterval]) -> f64 {
    let dom = a.domain().bounding_intervals();
    let clipped: Vec<AxisInterval> = ivs.iter().zip(&dom).map(|(x, d)| x.intersect(d)).collect();
    if clipped.iter().any(|iv| iv.is_empty()) {
        return 0.0;
    }
    let mut stored = 0.0;
    if let Some(b) = IndexBox::from_intervals(&clipped).and_then(|b| b.intersect(a.support())) {
        for k in b.iter() {
            if a.domain().contains(&k) {
                stored += a.norm_of(a.get(&k).expect("inside the stored box"));
            }
        }
    }
    match a.envelope() {
        None => stored,
        Some(env) => {
            let outer: f64 = (0..a.dim()).map(|i| env.axis_series(i, clipped[i], 1.0)).product();
            stored + env.bound() * outer
        }
    }
}
