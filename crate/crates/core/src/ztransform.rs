//! Forward Z-transform evaluation, convergence regions, transform identities and
//! contour inversion by the trapezoid rule on polycircles.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::document::parse_complex;
use crate::error::{Error, Result};
use crate::lattice::{AxisInterval, IndexBox, LatticeDomain, MultiIndex, Sign};
use crate::linalg::{vec_norm, CompensatedSum};
use crate::sequence::{Envelope, SequenceTable, ValueKind};
use crate::series::{pow, product_excess, rising_geo_sum};

/// Admissible moduli on one axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AxisRegion {
    /// `|z| > r`
    Outside(f64),
    /// `|z| < r`
    Inside(f64),
    /// `r' < |z| < r''`
    Ring(f64, f64),
    /// `|z| > 0`
    Punctured,
    Empty,
}

impl AxisRegion {
    pub fn contains(&self, m: f64) -> bool {
        match *self {
            AxisRegion::Outside(r) => m > r,
            AxisRegion::Inside(r) => m < r && m > 0.0,
            AxisRegion::Ring(a, b) => m > a && m < b,
            AxisRegion::Punctured => m > 0.0,
            AxisRegion::Empty => false,
        }
    }

    fn bounds(&self) -> (f64, f64) {
        match *self {
            AxisRegion::Outside(r) => (r, f64::INFINITY),
            AxisRegion::Inside(r) => (0.0, r),
            AxisRegion::Ring(a, b) => (a, b),
            AxisRegion::Punctured => (0.0, f64::INFINITY),
            AxisRegion::Empty => (1.0, 0.0),
        }
    }

    fn from_bounds(lo: f64, hi: f64) -> AxisRegion {
        if lo >= hi {
            AxisRegion::Empty
        } else if lo <= 0.0 && hi == f64::INFINITY {
            AxisRegion::Punctured
        } else if hi == f64::INFINITY {
            AxisRegion::Outside(lo)
        } else if lo <= 0.0 {
            AxisRegion::Inside(hi)
        } else {
            AxisRegion::Ring(lo, hi)
        }
    }

    pub fn intersect(&self, other: &AxisRegion) -> AxisRegion {
        let (a, b) = self.bounds();
        let (c, d) = other.bounds();
        AxisRegion::from_bounds(a.max(c), b.min(d))
    }
}

pub type ModulusPredicate = dyn Fn(&[f64]) -> bool + Send + Sync;

/// Region of validity of a transform, decided by the moduli `|z_i|` only.
#[derive(Clone)]
pub enum PolyAnnulus {
    Product(Vec<AxisRegion>),
    /// Non-product regions such as `|z1 z2| > a`.
    Custom { dim: usize, label: String, predicate: Arc<ModulusPredicate> },
}

impl fmt::Debug for PolyAnnulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyAnnulus::Product(ax) => f.debug_tuple("Product").field(ax).finish(),
            PolyAnnulus::Custom { dim, label, .. } => {
                f.debug_struct("Custom").field("dim", dim).field("label", label).finish()
            }
        }
    }
}

impl PolyAnnulus {
    pub fn punctured(n: usize) -> Self {
        PolyAnnulus::Product(vec![AxisRegion::Punctured; n])
    }

    pub fn custom<F>(dim: usize, label: &str, predicate: F) -> Self
    where
        F: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        PolyAnnulus::Custom { dim, label: label.to_string(), predicate: Arc::new(predicate) }
    }

    pub fn dim(&self) -> usize {
        match self {
            PolyAnnulus::Product(ax) => ax.len(),
            PolyAnnulus::Custom { dim, .. } => *dim,
        }
    }

    pub fn contains_moduli(&self, m: &[f64]) -> bool {
        if m.len() != self.dim() {
            return false;
        }
        match self {
            PolyAnnulus::Product(ax) => ax.iter().zip(m).all(|(a, &r)| a.contains(r)),
            PolyAnnulus::Custom { predicate, .. } => m.iter().all(|&r| r > 0.0) && predicate(m),
        }
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        let m: Vec<f64> = z.iter().map(|c| c.norm()).collect();
        self.contains_moduli(&m)
    }

    pub fn intersect(&self, other: &PolyAnnulus) -> PolyAnnulus {
        match (self, other) {
            (PolyAnnulus::Product(a), PolyAnnulus::Product(b)) => {
                PolyAnnulus::Product(a.iter().zip(b).map(|(x, y)| x.intersect(y)).collect())
            }
            _ => {
                let (a, b) = (self.clone(), other.clone());
                PolyAnnulus::custom(self.dim(), "intersection", move |m| a.contains_moduli(m) && b.contains_moduli(m))
            }
        }
    }

    /// Region restricted to a subset of axes (product regions only).
    pub fn select(&self, axes: &[usize]) -> Option<PolyAnnulus> {
        match self {
            PolyAnnulus::Product(ax) => Some(PolyAnnulus::Product(axes.iter().map(|&i| ax[i]).collect())),
            PolyAnnulus::Custom { .. } => None,
        }
    }

    /// Embed a region on `axes` into dimension `n`; other axes are unconstrained.
    pub fn embed(&self, n: usize, axes: &[usize]) -> PolyAnnulus {
        match self {
            PolyAnnulus::Product(ax) => {
                let mut out = vec![AxisRegion::Punctured; n];
                for (t, &i) in axes.iter().enumerate() {
                    out[i] = ax[t];
                }
                PolyAnnulus::Product(out)
            }
            PolyAnnulus::Custom { .. } => {
                let inner = self.clone();
                let axes = axes.to_vec();
                PolyAnnulus::custom(n, "embedded", move |m| {
                    let sub: Vec<f64> = axes.iter().map(|&i| m[i]).collect();
                    inner.contains_moduli(&sub)
                })
            }
        }
    }
}

/// A transform value with a bound on its error.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub value: Vec<Complex64>,
    /// Bound on the contribution of unstored terms.
    pub tail_bound: f64,
    /// Bound on floating-point error in the stored part.
    pub rounding_bound: f64,
}

impl Evaluation {
    pub fn exact(value: Vec<Complex64>) -> Self {
        Evaluation { value, tail_bound: 0.0, rounding_bound: 0.0 }
    }

    pub fn error_bound(&self) -> f64 {
        self.tail_bound + self.rounding_bound
    }

    pub fn scalar(&self) -> Complex64 {
        self.value[0]
    }
}

pub type EvalFn = dyn Fn(&[Complex64]) -> Result<Evaluation> + Send + Sync;

/// A function of `z` with a declared region of validity.
#[derive(Clone)]
pub struct TransformEvaluator {
    dim: usize,
    kind: ValueKind,
    region: PolyAnnulus,
    func: Arc<EvalFn>,
    source: Option<(LatticeDomain, Envelope)>,
}

impl fmt::Debug for TransformEvaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransformEvaluator")
            .field("dim", &self.dim)
            .field("kind", &self.kind)
            .field("region", &self.region)
            .finish()
    }
}

impl TransformEvaluator {
    pub fn new<F>(dim: usize, kind: ValueKind, region: PolyAnnulus, func: F) -> Result<Self>
    where
        F: Fn(&[Complex64]) -> Result<Evaluation> + Send + Sync + 'static,
    {
        Error::check_dim(dim, region.dim())?;
        Ok(TransformEvaluator { dim, kind, region, func: Arc::new(func), source: None })
    }

    pub fn constant(dim: usize, kind: ValueKind, value: Vec<Complex64>) -> Result<Self> {
        if value.len() != kind.entries() {
            return Err(Error::LengthMismatch { expected: kind.entries(), found: value.len() });
        }
        Self::new(dim, kind, PolyAnnulus::punctured(dim), move |_| Ok(Evaluation::exact(value.clone())))
    }

    /// Evaluator of the transform of a table.
    pub fn from_sequence(f: &SequenceTable) -> Result<Self> {
        let region = natural_region(f)?;
        let table = Arc::new(f.clone());
        let mut ev = Self::new(f.dim(), f.kind(), region, move |z| eval_forward(&table, z))?;
        if let Some(env) = f.envelope() {
            ev.source = Some((f.domain().clone(), env.clone()));
        }
        Ok(ev)
    }

    /// Attach the domain and envelope of the underlying sequence, enabling
    /// aliasing bounds in [`invert_contour`].
    pub fn with_source(mut self, domain: LatticeDomain, envelope: Envelope) -> Result<Self> {
        Error::check_dim(self.dim, domain.dim())?;
        Error::check_dim(self.dim, envelope.dim())?;
        self.source = Some((domain, envelope));
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn region(&self) -> &PolyAnnulus {
        &self.region
    }

    pub fn source(&self) -> Option<&(LatticeDomain, Envelope)> {
        self.source.as_ref()
    }

    pub fn evaluate(&self, z: &[Complex64]) -> Result<Evaluation> {
        Error::check_dim(self.dim, z.len())?;
        let ev = (self.func)(z)?;
        if ev.value.len() != self.kind.entries() {
            return Err(Error::LengthMismatch { expected: self.kind.entries(), found: ev.value.len() });
        }
        Ok(ev)
    }
}

/// `z_i^{-k}` for `k` in `[lo, hi]`.
fn inverse_powers(z: Complex64, lo: i64, hi: i64) -> Vec<Complex64> {
    (lo..=hi)
        .map(|k| {
            if z == Complex64::ZERO {
                if k == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::ZERO
                }
            } else {
                z.powi(-(k as i32))
            }
        })
        .collect()
}

fn check_zero_coordinates(f: &SequenceTable, z: &[Complex64]) -> Result<()> {
    let ivs = f.domain().bounding_intervals();
    for (i, zi) in z.iter().enumerate() {
        if *zi == Complex64::ZERO && ivs[i].hi.is_none_or(|h| h > 0) {
            return Err(Error::ZeroCoordinate { axis: i });
        }
    }
    Ok(())
}

/// Weighted sum `sum_k w(k) f(k) prod_i p_i(k_i)` over the stored support,
/// returning the value and the sum of term magnitudes.
fn weighted_sum(f: &SequenceTable, axis_factors: &[Vec<Complex64>]) -> (Vec<Complex64>, f64) {
    let e = f.entries();
    let mut acc = vec![CompensatedSum::new(); e];
    let mut mass = 0.0;
    let lo = f.support().lo().clone();
    for (o, k) in f.support().iter().enumerate() {
        if !f.domain().contains(&k) {
            continue;
        }
        let mut w = Complex64::new(1.0, 0.0);
        for (i, &c) in k.coords().iter().enumerate() {
            w *= axis_factors[i][(c - lo[i]) as usize];
        }
        if w == Complex64::ZERO {
            continue;
        }
        let v = f.value_at_offset(o);
        mass += w.norm() * vec_norm(v);
        for (a, x) in acc.iter_mut().zip(v) {
            a.add(x * w);
        }
    }
    (acc.iter().map(|a| a.value()).collect(), mass)
}

/// Product-form tail bound `M (prod T_i - prod S_i)` for per-axis weight sums.
fn product_tail<F>(f: &SequenceTable, env: &Envelope, axis_sum: F) -> Result<f64>
where
    F: Fn(usize, AxisInterval) -> f64,
{
    let ivs = f.domain().axis_intervals().ok_or_else(|| {
        Error::UnsupportedDomain("tail bounds need a product-form domain".into())
    })?;
    let n = f.dim();
    let mut inner = Vec::with_capacity(n);
    let mut extra = Vec::with_capacity(n);
    for i in 0..n {
        let iv = ivs[i];
        let stored = iv.intersect(&f.support().axis(i));
        let below = iv.intersect(&AxisInterval { lo: None, hi: Some(f.support().lo()[i] - 1) });
        let above = iv.intersect(&AxisInterval { lo: Some(f.support().hi()[i] + 1), hi: None });
        inner.push(axis_sum(i, stored));
        extra.push(axis_sum(i, below) + axis_sum(i, above));
    }
    if inner.iter().chain(&extra).any(|x| !x.is_finite()) {
        return Err(Error::PointOutsideRegion);
    }
    Ok(env.bound() * product_excess(&inner, &extra))
}

/// `F_f(z) = sum_{k in D} f(k) z^{-k}` over the stored support, with a tail bound
/// when `f` carries an envelope.
pub fn eval_forward(f: &SequenceTable, z: &[Complex64]) -> Result<Evaluation> {
    Error::check_dim(f.dim(), z.len())?;
    check_zero_coordinates(f, z)?;
    let sup = f.support();
    let factors: Vec<Vec<Complex64>> =
        (0..f.dim()).map(|i| inverse_powers(z[i], sup.lo()[i], sup.hi()[i])).collect();
    let (value, mass) = weighted_sum(f, &factors);
    let tail_bound = match f.envelope() {
        None => 0.0,
        Some(env) => {
            if z.contains(&Complex64::ZERO) {
                return Err(Error::PointOutsideRegion);
            }
            product_tail(f, env, |i, iv| env.axis_series(i, iv, 1.0 / z[i].norm()))?
        }
    };
    let count = sup.len().max(1) as f64;
    Ok(Evaluation { value, tail_bound, rounding_bound: 4.0 * f64::EPSILON * count.log2().max(1.0) * mass })
}

/// Region where the envelope guarantees absolute convergence.
pub fn convergence_region(f: &SequenceTable) -> Result<PolyAnnulus> {
    let env = f.envelope().ok_or(Error::NoEnvelope)?;
    let base = match f.domain() {
        LatticeDomain::Shifted { base, .. } => base.as_ref(),
        d => d,
    };
    let axes = match base {
        LatticeDomain::Full { dim } => (0..*dim)
            .map(|i| match env.negative_rates() {
                Some(neg) => Ok(AxisRegion::from_bounds(env.rates()[i], neg[i])),
                None => Err(Error::TwoSidedAxisWithoutRingRates { axis: i }),
            })
            .collect::<Result<Vec<_>>>()?,
        LatticeDomain::Orthant { signs } => signs
            .iter()
            .enumerate()
            .map(|(i, s)| match s {
                Sign::Plus => AxisRegion::Outside(env.rates()[i]),
                Sign::Minus => AxisRegion::Inside(env.negative_rate(i)),
            })
            .collect(),
        other => {
            return Err(Error::UnsupportedDomain(format!(
                "convergence region needs an orthant or the full lattice, got {}",
                other.kind_name()
            )))
        }
    };
    Ok(PolyAnnulus::Product(axes))
}

/// Convergence region for envelope-tailed tables; finite tables converge on the punctured polydisc.
pub fn natural_region(f: &SequenceTable) -> Result<PolyAnnulus> {
    if f.envelope().is_none() || f.domain().is_finite() {
        return Ok(PolyAnnulus::punctured(f.dim()));
    }
    convergence_region(f)
}

/// Evaluator of `z^a [F(z) - sum_{k in D \ (a + D)} f(k) z^{-k}]`, the transform of
/// the shifted sequence `k -> f(k + a)`.
pub fn shift_identity(transform: &TransformEvaluator, f_window: &SequenceTable, a: &MultiIndex) -> Result<TransformEvaluator> {
    Error::check_dim(transform.dim(), a.dim())?;
    Error::check_dim(transform.dim(), f_window.dim())?;
    let domain = f_window.domain().clone();
    if !domain.shift_preserves(a) {
        return Err(Error::ShiftLeavesDomain { shift: a.coords().to_vec() });
    }
    // boundary points where f can be non-zero
    let boundary: Vec<MultiIndex> = if f_window.has_finite_support() {
        f_window
            .support()
            .iter()
            .filter(|k| domain.contains(k) && !domain.contains(&(k - a)))
            .collect()
    } else {
        let ivs = domain.axis_intervals().ok_or(Error::BoundaryNotFinite)?;
        // D \ (a + D) is finite only if every axis with a_i != 0 is bounded on
        // the side the shift moves away from, and the other axes are bounded.
        let mut pts = Vec::new();
        let all_bounded = ivs.iter().all(|iv| iv.is_finite());
        if !all_bounded && a.coords().iter().any(|&c| c != 0) {
            let n_shifted = a.coords().iter().filter(|&&c| c != 0).count();
            if n_shifted > 1 || ivs.iter().enumerate().any(|(i, iv)| a[i] == 0 && !iv.is_finite()) {
                return Err(Error::BoundaryNotFinite);
            }
        }
        if a.coords().iter().any(|&c| c != 0) {
            // enumerate over the bounded slab next to the domain edge
            let slab: Vec<AxisInterval> = ivs
                .iter()
                .enumerate()
                .map(|(i, iv)| {
                    if a[i] > 0 {
                        AxisInterval { lo: iv.lo, hi: iv.lo.map(|l| l + a[i] - 1) }
                    } else if a[i] < 0 {
                        AxisInterval { lo: iv.hi.map(|h| h + a[i] + 1), hi: iv.hi }
                    } else {
                        *iv
                    }
                })
                .collect();
            let b = IndexBox::from_intervals(&slab).ok_or(Error::BoundaryNotFinite)?;
            for k in b.iter() {
                if domain.contains(&k) && !domain.contains(&(&k - a)) {
                    if !f_window.support().contains(&k) {
                        return Err(Error::BoundaryNotFinite);
                    }
                    pts.push(k);
                }
            }
        }
        pts
    };
    let correction: Vec<(Vec<i64>, Vec<Complex64>)> =
        boundary.iter().map(|k| (k.coords().to_vec(), f_window.value_or_zero(k))).collect();
    let inner = transform.clone();
    let a = a.coords().to_vec();
    let e = transform.kind().entries();
    let mut out = TransformEvaluator::new(transform.dim(), transform.kind(), transform.region().clone(), move |z| {
        let base = inner.evaluate(z)?;
        let mut acc: Vec<CompensatedSum> = base
            .value
            .iter()
            .map(|v| {
                let mut s = CompensatedSum::new();
                s.add(*v);
                s
            })
            .collect();
        let mut mass = 0.0;
        for (k, v) in &correction {
            let w: Complex64 = k.iter().zip(z).map(|(&ki, zi)| zi.powi(-(ki as i32))).product();
            mass += w.norm() * vec_norm(v);
            for (s, x) in acc.iter_mut().zip(v) {
                s.add(-(x * w));
            }
        }
        let za: Complex64 = a.iter().zip(z).map(|(&ai, zi)| zi.powi(ai as i32)).product();
        let value: Vec<Complex64> = acc.iter().take(e).map(|s| s.value() * za).collect();
        let scale = za.norm();
        Ok(Evaluation {
            value,
            tail_bound: base.tail_bound * scale,
            rounding_bound: (base.rounding_bound + 2.0 * f64::EPSILON * mass) * scale,
        })
    })?;
    out.source = None;
    Ok(out)
}

/// `g(k) = (prod_i a_i^{k_i}) f(k)`.
pub fn modulation(f: &SequenceTable, a: &[Complex64]) -> Result<SequenceTable> {
    Error::check_dim(f.dim(), a.len())?;
    if let Some(axis) = a.iter().position(|c| *c == Complex64::ZERO || !c.is_finite()) {
        return Err(Error::ZeroModulation { axis });
    }
    let envelope = match f.envelope() {
        None => None,
        Some(env) => {
            let rates: Vec<f64> = env.rates().iter().zip(a).map(|(r, c)| r * c.norm()).collect();
            Some(match env.negative_rates() {
                None => Envelope::new(env.bound(), rates)?,
                Some(neg) => Envelope::two_sided(
                    env.bound(),
                    rates,
                    neg.iter().zip(a).map(|(r, c)| r * c.norm()).collect(),
                )?,
            })
        }
    };
    let e = f.entries();
    SequenceTable::from_fn(f.domain().clone(), f.support().clone(), f.kind(), envelope, |k| {
        let w: Complex64 = k.coords().iter().zip(a).map(|(&ki, ai)| ai.powi(ki as i32)).product();
        f.get(k).map_or_else(|| vec![Complex64::ZERO; e], |v| v.iter().map(|x| x * w).collect())
    })
}

/// Evaluator of `prod_i F_{f_i}(z_i)` for one-dimensional factors.
pub fn separable_transform(factors: &[SequenceTable]) -> Result<TransformEvaluator> {
    let n = factors.len();
    if n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    let mut kind = ValueKind::Scalar;
    let mut axes = Vec::with_capacity(n);
    for f in factors {
        Error::check_dim(1, f.dim())?;
        if f.kind() != ValueKind::Scalar {
            if kind != ValueKind::Scalar {
                return Err(Error::MultipleNonScalarFactors);
            }
            kind = f.kind();
        }
        match natural_region(f)? {
            PolyAnnulus::Product(ax) => axes.push(ax[0]),
            PolyAnnulus::Custom { .. } => unreachable!("one-dimensional regions are products"),
        }
    }
    let tables: Arc<Vec<SequenceTable>> = Arc::new(factors.to_vec());
    TransformEvaluator::new(n, kind, PolyAnnulus::Product(axes), move |z| {
        let mut value = vec![Complex64::new(1.0, 0.0)];
        let mut norm_exact = 1.0;
        let mut norm_upper = 1.0;
        let mut rounding = 0.0;
        for (i, f) in tables.iter().enumerate() {
            let ev = eval_forward(f, &z[i..i + 1])?;
            let nv = vec_norm(&ev.value);
            norm_exact *= nv;
            norm_upper *= nv + ev.tail_bound;
            rounding += ev.rounding_bound / nv.max(f64::MIN_POSITIVE);
            value = if value.len() == 1 {
                ev.value.iter().map(|x| x * value[0]).collect()
            } else {
                value.iter().map(|x| x * ev.value[0]).collect()
            };
        }
        Ok(Evaluation {
            value,
            tail_bound: (norm_upper - norm_exact).max(0.0),
            rounding_bound: norm_exact * (rounding + 2.0 * n as f64 * f64::EPSILON),
        })
    })
}

/// `sum_k [prod_i (-k_i)(-k_i-1)...(-k_i-v_i+1)] f(k) prod_i z_i^{-k_i-v_i}`, the
/// mixed partial derivative `d^v F_f / dz^v`.
pub fn derivative_series(f: &SequenceTable, v: &[u32], z: &[Complex64]) -> Result<Evaluation> {
    Error::check_dim(f.dim(), v.len())?;
    Error::check_dim(f.dim(), z.len())?;
    check_zero_coordinates(f, z)?;
    let sup = f.support();
    let factors: Vec<Vec<Complex64>> = (0..f.dim())
        .map(|i| {
            (sup.lo()[i]..=sup.hi()[i])
                .map(|k| {
                    let c: f64 = (0..v[i] as i64).map(|t| (-k - t) as f64).product();
                    c * z[i].powi(-(k as i32) - v[i] as i32)
                })
                .collect()
        })
        .collect();
    let (value, mass) = weighted_sum(f, &factors);
    let tail_bound = match f.envelope() {
        None => 0.0,
        Some(env) => product_tail(f, env, |i, iv| {
            let m = z[i].norm();
            let scale = pow(1.0 / m, v[i] as i64);
            let pos = iv.intersect(&AxisInterval { lo: Some(0), hi: None });
            let neg = iv.intersect(&AxisInterval { lo: None, hi: Some(-1) });
            let mut s = 0.0;
            if !pos.is_empty() {
                s += rising_geo_sum(env.rates()[i] / m, v[i], pos.lo, pos.hi);
            }
            if !neg.is_empty() {
                s += rising_geo_sum(env.negative_rate(i) / m, v[i], neg.lo, neg.hi);
            }
            s * scale
        })?,
    };
    Ok(Evaluation { value, tail_bound, rounding_bound: 8.0 * f64::EPSILON * mass })
}

/// Result of a contour inversion.
#[derive(Clone, Debug)]
pub struct Inversion {
    pub table: SequenceTable,
    pub grid: Vec<usize>,
    /// Bound on the aliasing term over the window, when the evaluator knows its
    /// underlying envelope.
    pub aliasing_bound: Option<f64>,
    /// Node evaluation errors propagated to the coefficients.
    pub node_error_bound: f64,
    /// Largest node value norm seen on the polycircle.
    pub max_node_norm: f64,
}

/// Default grid `N_i = 2 span_i + 16`.
pub fn default_grid(window: &IndexBox) -> Vec<usize> {
    window.spans().iter().map(|s| 2 * s + 16).collect()
}

fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n).map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64)).collect()
}

/// Polycircle node for flat grid index `t`.
pub fn grid_node(radii: &[f64], grid: &[usize], mut t: usize) -> (Vec<usize>, Vec<Complex64>) {
    let n = grid.len();
    let mut idx = vec![0usize; n];
    for i in (0..n).rev() {
        idx[i] = t % grid[i];
        t /= grid[i];
    }
    let z = (0..n)
        .map(|i| Complex64::from_polar(radii[i], 2.0 * PI * idx[i] as f64 / grid[i] as f64))
        .collect();
    (idx, z)
}

/// Aliasing sum on one axis, split into the `m = 0` term and the rest.
fn alias_axis(k: i64, n: usize, radius: f64, iv: AxisInterval, env: &Envelope, axis: usize) -> (f64, f64) {
    let nn = n as i64;
    let m0 = if iv.contains(k) { env.axis_weight(axis, k) } else { 0.0 };
    let m_lo = iv.lo.map(|lo| (lo - k).div_euclid(nn) + i64::from((lo - k).rem_euclid(nn) != 0));
    let m_hi = iv.hi.map(|hi| (hi - k).div_euclid(nn));
    // j = k + m N >= 0  <=>  m >= m_split
    let m_split = (-k).div_euclid(nn) + i64::from((-k).rem_euclid(nn) != 0);
    let x = pow(env.rates()[axis] / radius, nn);
    let y = pow(env.negative_rate(axis) / radius, nn);
    let cp = pow(env.rates()[axis], k);
    let cn = pow(env.negative_rate(axis), k);
    let range_sum = |c: f64, base: f64, lo: Option<i64>, hi: Option<i64>| -> f64 {
        let (lo, hi) = (lo, hi);
        if let (Some(a), Some(b)) = (lo, hi) {
            if a > b {
                return 0.0;
            }
        }
        c * crate::series::geo_sum(base, lo, hi)
    };
    let clamp_lo = |a: Option<i64>, b: i64| Some(a.map_or(b, |a| a.max(b)));
    let clamp_hi = |a: Option<i64>, b: i64| Some(a.map_or(b, |a| a.min(b)));
    let mut s = 0.0;
    // positive m
    let pos_lo = clamp_lo(m_lo, 1);
    s += range_sum(cp, x, Some(pos_lo.unwrap().max(m_split)), m_hi);
    s += range_sum(cn, y, pos_lo, clamp_hi(m_hi, m_split - 1));
    // negative m
    let neg_hi = clamp_hi(m_hi, -1);
    s += range_sum(cp, x, clamp_lo(m_lo, m_split), neg_hi);
    s += range_sum(cn, y, m_lo, Some(neg_hi.unwrap().min(m_split - 1)));
    (m0, s)
}

/// Bound on the aliasing term `sum_{m != 0} f(k + m N) prod_i r_i^{-m_i N_i}`.
pub fn aliasing_bound_at(k: &MultiIndex, radii: &[f64], grid: &[usize], domain: &LatticeDomain, env: &Envelope) -> f64 {
    let ivs = domain.bounding_intervals();
    let mut inner = Vec::with_capacity(k.dim());
    let mut extra = Vec::with_capacity(k.dim());
    for i in 0..k.dim() {
        let (m0, rest) = alias_axis(k[i], grid[i], radii[i], ivs[i], env, i);
        inner.push(m0);
        extra.push(rest);
    }
    if extra.iter().any(|x| !x.is_finite()) {
        return f64::INFINITY;
    }
    env.bound() * product_excess(&inner, &extra)
}

/// One axis pass of the inverse DFT: shape `dims` with axis `axis` of length `N`
/// becomes length `span`, output index `lo + j`, weighted by `r^{lo + j}`.
fn axis_pass(data: &[Complex64], dims: &[usize], axis: usize, lo: i64, span: usize, radius: f64) -> Vec<Complex64> {
    let nax = dims[axis];
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    let tw = twiddles(nax);
    let scale: Vec<f64> = (0..span).map(|j| pow(radius, lo + j as i64) / nax as f64).collect();
    let lines: Vec<Vec<Complex64>> = (0..outer * inner)
        .into_par_iter()
        .map(|line| {
            let (o, i) = (line / inner, line % inner);
            let base = o * nax * inner + i;
            (0..span)
                .map(|j| {
                    let k = lo + j as i64;
                    let mut acc = CompensatedSum::new();
                    for t in 0..nax {
                        let m = (k.rem_euclid(nax as i64) as usize * t) % nax;
                        acc.add(data[base + t * inner] * tw[m]);
                    }
                    acc.value() * scale[j]
                })
                .collect()
        })
        .collect();
    let mut out = vec![Complex64::ZERO; outer * span * inner];
    for (line, vals) in lines.into_iter().enumerate() {
        let (o, i) = (line / inner, line % inner);
        for (j, v) in vals.into_iter().enumerate() {
            out[o * span * inner + j * inner + i] = v;
        }
    }
    out
}

/// Recover Laurent coefficients on `window` from values of `F` on the polycircle
/// `|z_i| = radii_i` by the trapezoid rule with `grid[i]` nodes per axis.
pub fn invert_contour(
    transform: &TransformEvaluator,
    radii: &[f64],
    window: &IndexBox,
    grid: Option<&[usize]>,
) -> Result<Inversion> {
    let n = transform.dim();
    Error::check_dim(n, radii.len())?;
    Error::check_dim(n, window.dim())?;
    let grid: Vec<usize> = match grid {
        Some(g) => {
            Error::check_dim(n, g.len())?;
            g.to_vec()
        }
        None => default_grid(window),
    };
    for i in 0..n {
        if !(radii[i] > 0.0 && radii[i].is_finite()) {
            return Err(Error::CircleOutsideRegion { axis: i, radius: radii[i] });
        }
        if grid[i] < window.span(i) {
            return Err(Error::InsufficientGrid { axis: i, grid: grid[i], span: window.span(i) });
        }
    }
    if !transform.region().contains_moduli(radii) {
        let axis = match transform.region() {
            PolyAnnulus::Product(ax) => ax.iter().zip(radii).position(|(a, &r)| !a.contains(r)).unwrap_or(0),
            PolyAnnulus::Custom { .. } => 0,
        };
        return Err(Error::CircleOutsideRegion { axis, radius: radii[axis] });
    }
    let total: usize = grid.iter().product();
    let evals: Vec<Result<Evaluation>> = (0..total)
        .into_par_iter()
        .map(|t| {
            let (_, z) = grid_node(radii, &grid, t);
            transform.evaluate(&z)
        })
        .collect();
    let e = transform.kind().entries();
    let mut data = Vec::with_capacity(total * e);
    let mut max_err: f64 = 0.0;
    let mut max_norm: f64 = 0.0;
    for (t, r) in evals.into_iter().enumerate() {
        match r {
            Ok(ev) => {
                if ev.value.iter().any(|v| !v.is_finite()) {
                    let (idx, _) = grid_node(radii, &grid, t);
                    return Err(Error::EvaluatorFailure { node: idx, source: Box::new(Error::NonFinite(t)) });
                }
                max_err = max_err.max(ev.error_bound());
                max_norm = max_norm.max(vec_norm(&ev.value));
                data.extend(ev.value);
            }
            Err(err) => {
                let (idx, _) = grid_node(radii, &grid, t);
                return Err(Error::EvaluatorFailure { node: idx, source: Box::new(err) });
            }
        }
    }
    let mut dims: Vec<usize> = grid.clone();
    dims.push(e);
    for axis in 0..n {
        data = axis_pass(&data, &dims, axis, window.lo()[axis], window.span(axis), radii[axis]);
        dims[axis] = window.span(axis);
    }
    let weight_max = window
        .iter()
        .map(|k| (0..n).map(|i| pow(radii[i], k[i])).product::<f64>())
        .fold(0.0, f64::max);
    let aliasing_bound = transform.source().map(|(domain, env)| {
        window
            .iter()
            .map(|k| aliasing_bound_at(&k, radii, &grid, domain, env))
            .fold(0.0, f64::max)
    });
    let table = SequenceTable::new(LatticeDomain::full(n), window.clone(), transform.kind(), data, None)?;
    Ok(Inversion {
        table,
        grid,
        aliasing_bound,
        node_error_bound: weight_max * (max_err + 8.0 * f64::EPSILON * max_norm),
        max_node_norm: max_norm,
    })
}

/// One term `c z^k` of a Laurent polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialDoc {
    pub k: Vec<i64>,
    /// Coefficient in `a+bi` text form.
    pub c: String,
}

/// Quotient of two Laurent polynomials, the rational-expression document of the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalDoc {
    pub n: usize,
    pub numerator: Vec<MonomialDoc>,
    pub denominator: Vec<MonomialDoc>,
    /// Optional region: per-axis `[lo, hi]` modulus bounds (`hi` may be null for infinity).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Vec<(f64, Option<f64>)>>,
}

impl RationalDoc {
    pub fn evaluator(&self) -> Result<TransformEvaluator> {
        let n = self.n;
        let parse = |terms: &[MonomialDoc]| -> Result<Vec<(Vec<i64>, Complex64)>> {
            terms
                .iter()
                .map(|t| {
                    if t.k.len() != n {
                        return Err(Error::Schema(format!("monomial exponent {:?} does not have length {n}", t.k)));
                    }
                    Ok((t.k.clone(), parse_complex(&t.c)?))
                })
                .collect()
        };
        let num = parse(&self.numerator)?;
        let den = parse(&self.denominator)?;
        if den.is_empty() {
            return Err(Error::Schema("denominator has no terms".into()));
        }
        let region = match &self.region {
            None => PolyAnnulus::punctured(n),
            Some(b) => {
                if b.len() != n {
                    return Err(Error::Schema("region must list one bound pair per axis".into()));
                }
                PolyAnnulus::Product(b.iter().map(|(lo, hi)| AxisRegion::from_bounds(*lo, hi.unwrap_or(f64::INFINITY))).collect())
            }
        };
        let poly = |terms: &[(Vec<i64>, Complex64)], z: &[Complex64]| -> (Complex64, f64) {
            let mut s = CompensatedSum::new();
            let mut mass = 0.0;
            for (k, c) in terms {
                let t: Complex64 = c * k.iter().zip(z).map(|(&ki, zi)| zi.powi(ki as i32)).product::<Complex64>();
                mass += t.norm();
                s.add(t);
            }
            (s.value(), mass)
        };
        TransformEvaluator::new(n, ValueKind::Scalar, region, move |z| {
            let (p, pm) = poly(&num, z);
            let (q, qm) = poly(&den, z);
            if q.norm() <= 1e-14 * qm.max(f64::MIN_POSITIVE) {
                return Err(Error::SingularSymbol { z: z.to_vec(), rcond: q.norm() / qm.max(f64::MIN_POSITIVE) });
            }
            let v = p / q;
            let rounding = 4.0 * f64::EPSILON * (pm / q.norm() + v.norm() * qm / q.norm());
            Ok(Evaluation { value: vec![v], tail_bound: 0.0, rounding_bound: rounding })
        })
    }
}
