//! Finite tables of lattice sequences with optional exponential envelopes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{AxisInterval, IndexBox, LatticeDomain, MultiIndex};
use crate::linalg::entry_norm;
use crate::series::{geo_sum, pow};

/// Shape of each sequence value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Scalar,
    Vector(usize),
    Matrix(usize),
}

impl ValueKind {
    /// Number of complex components per value.
    pub fn entries(self) -> usize {
        match self {
            ValueKind::Scalar => 1,
            ValueKind::Vector(m) => m,
            ValueKind::Matrix(m) => m * m,
        }
    }

    pub fn order(self) -> usize {
        match self {
            ValueKind::Scalar => 1,
            ValueKind::Vector(m) | ValueKind::Matrix(m) => m,
        }
    }

    pub fn matrix_order(self) -> Option<usize> {
        match self {
            ValueKind::Matrix(m) => Some(m),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ValueKind::Scalar => "scalar",
            ValueKind::Vector(_) => "vector",
            ValueKind::Matrix(_) => "matrix",
        }
    }
}

/// Bound `||f(k)|| <= M * prod_i phi_i(k_i)` with `phi_i(k) = r_i^k` for `k >= 0`
/// and `phi_i(k) = rho_i^k` for `k < 0`. Without negative-side rates `rho_i = r_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    bound: f64,
    rates: Vec<f64>,
    negative_rates: Option<Vec<f64>>,
}

impl Envelope {
    pub fn new(bound: f64, rates: Vec<f64>) -> Result<Self> {
        Self::build(bound, rates, None)
    }

    /// Envelope for sequences extending in both directions; requires `r_i <= rho_i`.
    pub fn two_sided(bound: f64, rates: Vec<f64>, negative_rates: Vec<f64>) -> Result<Self> {
        Self::build(bound, rates, Some(negative_rates))
    }

    fn build(bound: f64, rates: Vec<f64>, negative_rates: Option<Vec<f64>>) -> Result<Self> {
        if !(bound >= 0.0 && bound.is_finite()) {
            return Err(Error::InvalidEnvelope(format!("bound {bound} must be finite and non-negative")));
        }
        if rates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidEnvelope("rates must be finite and positive".into()));
        }
        if let Some(neg) = &negative_rates {
            Error::check_dim(rates.len(), neg.len())?;
            for (r, p) in rates.iter().zip(neg) {
                if !(*p > 0.0 && p.is_finite()) || p < r {
                    return Err(Error::InvalidEnvelope(format!(
                        "negative-side rate {p} must be finite and at least the positive-side rate {r}"
                    )));
                }
            }
        }
        Ok(Envelope { bound, rates, negative_rates })
    }

    pub fn dim(&self) -> usize {
        self.rates.len()
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn negative_rates(&self) -> Option<&[f64]> {
        self.negative_rates.as_deref()
    }

    pub fn negative_rate(&self, axis: usize) -> f64 {
        self.negative_rates.as_ref().map_or(self.rates[axis], |n| n[axis])
    }

    pub fn axis_weight(&self, axis: usize, k: i64) -> f64 {
        if k >= 0 {
            pow(self.rates[axis], k)
        } else {
            pow(self.negative_rate(axis), k)
        }
    }

    pub fn at(&self, k: &MultiIndex) -> f64 {
        self.at_coords(k.coords())
    }

    pub fn at_coords(&self, k: &[i64]) -> f64 {
        k.iter().enumerate().fold(self.bound, |acc, (i, &c)| acc * self.axis_weight(i, c))
    }

    /// `sum_{k in iv} phi_axis(k) * x^k`.
    pub fn axis_series(&self, axis: usize, iv: AxisInterval, x: f64) -> f64 {
        if iv.is_empty() {
            return 0.0;
        }
        let pos = iv.intersect(&AxisInterval { lo: Some(0), hi: None });
        let neg = iv.intersect(&AxisInterval { lo: None, hi: Some(-1) });
        let mut s = 0.0;
        if !pos.is_empty() {
            s += geo_sum(self.rates[axis] * x, pos.lo, pos.hi);
        }
        if !neg.is_empty() {
            s += geo_sum(self.negative_rate(axis) * x, neg.lo, neg.hi);
        }
        s
    }

    pub fn scaled(&self, factor: f64) -> Envelope {
        Envelope { bound: self.bound * factor.abs(), ..self.clone() }
    }
}

/// A sequence on a lattice domain, stored on a finite support box.
///
/// Without an envelope the sequence is zero outside the box. With an envelope
/// the values outside the box are unknown but bounded by it.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceTable {
    domain: LatticeDomain,
    support: IndexBox,
    kind: ValueKind,
    values: Vec<Complex64>,
    envelope: Option<Envelope>,
}

impl SequenceTable {
    pub fn new(
        domain: LatticeDomain,
        support: IndexBox,
        kind: ValueKind,
        values: Vec<Complex64>,
        envelope: Option<Envelope>,
    ) -> Result<Self> {
        Error::check_dim(domain.dim(), support.dim())?;
        if let Some(env) = &envelope {
            Error::check_dim(domain.dim(), env.dim())?;
        }
        let e = kind.entries();
        if e == 0 {
            return Err(Error::KindMismatch("value kind with zero components".into()));
        }
        let expected = support.len() * e;
        if values.len() != expected {
            return Err(Error::LengthMismatch { expected, found: values.len() });
        }
        if let Some(pos) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        for (o, k) in support.iter().enumerate() {
            if !domain.contains(&k) && values[o * e..(o + 1) * e].iter().any(|v| *v != Complex64::ZERO) {
                return Err(Error::SupportOutsideDomain { index: k.into_vec() });
            }
        }
        Ok(SequenceTable { domain, support, kind, values, envelope })
    }

    pub fn zeros(domain: LatticeDomain, support: IndexBox, kind: ValueKind) -> Result<Self> {
        let n = support.len() * kind.entries();
        Self::new(domain, support, kind, vec![Complex64::ZERO; n], None)
    }

    /// Tabulate `f` over the support box; points outside the domain stay zero.
    pub fn from_fn<F>(
        domain: LatticeDomain,
        support: IndexBox,
        kind: ValueKind,
        envelope: Option<Envelope>,
        mut f: F,
    ) -> Result<Self>
    where
        F: FnMut(&MultiIndex) -> Vec<Complex64>,
    {
        let e = kind.entries();
        let mut values = Vec::with_capacity(support.len() * e);
        for k in support.iter() {
            if domain.contains(&k) {
                let v = f(&k);
                if v.len() != e {
                    return Err(Error::LengthMismatch { expected: e, found: v.len() });
                }
                values.extend(v);
            } else {
                values.extend(std::iter::repeat_n(Complex64::ZERO, e));
            }
        }
        Self::new(domain, support, kind, values, envelope)
    }

    pub fn scalar_from_fn<F>(domain: LatticeDomain, support: IndexBox, envelope: Option<Envelope>, mut f: F) -> Result<Self>
    where
        F: FnMut(&MultiIndex) -> Complex64,
    {
        Self::from_fn(domain, support, ValueKind::Scalar, envelope, |k| vec![f(k)])
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    pub fn support(&self) -> &IndexBox {
        &self.support
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn envelope(&self) -> Option<&Envelope> {
        self.envelope.as_ref()
    }

    pub fn has_finite_support(&self) -> bool {
        self.envelope.is_none()
    }

    pub fn entries(&self) -> usize {
        self.kind.entries()
    }

    pub fn with_envelope(mut self, envelope: Option<Envelope>) -> Result<Self> {
        if let Some(env) = &envelope {
            Error::check_dim(self.dim(), env.dim())?;
        }
        self.envelope = envelope;
        Ok(self)
    }

    /// Stored value at `k`. `None` outside the support box or the domain.
    pub fn get(&self, k: &MultiIndex) -> Option<&[Complex64]> {
        self.get_coords(k.coords())
    }

    pub fn get_coords(&self, k: &[i64]) -> Option<&[Complex64]> {
        let o = self.support.offset_of(k)?;
        let e = self.entries();
        Some(&self.values[o * e..(o + 1) * e])
    }

    /// Value at `k`, treating unstored points as zero.
    pub fn value_or_zero(&self, k: &MultiIndex) -> Vec<Complex64> {
        self.get(k).map_or_else(|| vec![Complex64::ZERO; self.entries()], |v| v.to_vec())
    }

    /// Scalar value at `k` (first component), zero when unstored.
    pub fn scalar_at(&self, k: &[i64]) -> Complex64 {
        self.get_coords(k).map_or(Complex64::ZERO, |v| v[0])
    }

    pub fn value_at_offset(&self, offset: usize) -> &[Complex64] {
        let e = self.entries();
        &self.values[offset * e..(offset + 1) * e]
    }

    pub fn norm_of(&self, v: &[Complex64]) -> f64 {
        entry_norm(v, self.kind.matrix_order())
    }

    /// Norm of every stored value in support order.
    pub fn norms(&self) -> Vec<f64> {
        (0..self.support.len()).map(|o| self.norm_of(self.value_at_offset(o))).collect()
    }

    /// First stored point whose norm exceeds the envelope, if any.
    pub fn envelope_violation(&self, rel_tol: f64) -> Option<(MultiIndex, f64, f64)> {
        let env = self.envelope.as_ref()?;
        for (o, k) in self.support.iter().enumerate() {
            let nv = self.norm_of(self.value_at_offset(o));
            let b = env.at(&k);
            if nv > b * (1.0 + rel_tol) + 1e-300 {
                return Some((k, nv, b));
            }
        }
        None
    }

    /// `g(k) = f(k + beta)` where `k + beta` lies in the domain, else zero.
    pub fn beta_shift(&self, beta: &MultiIndex) -> Result<SequenceTable> {
        Error::check_dim(self.dim(), beta.dim())?;
        let moved = self.support.translate(&-beta);
        let bounds = self.domain.bounding_intervals();
        let clipped = IndexBox::from_intervals(
            &moved
                .intervals()
                .iter()
                .zip(&bounds)
                .map(|(a, b)| a.intersect(b))
                .collect::<Vec<_>>(),
        )
        .unwrap_or(moved);
        let envelope = self.envelope.as_ref().map(|env| {
            let factor: f64 = (0..self.dim())
                .map(|i| pow(env.rates()[i], beta[i]).max(pow(env.negative_rate(i), beta[i])))
                .product();
            env.scaled(factor)
        });
        let e = self.entries();
        let src = self;
        SequenceTable::from_fn(self.domain.clone(), clipped, self.kind, envelope, |k| {
            let j = k + beta;
            if src.domain.contains(&j) {
                src.get(&j).map_or_else(|| vec![Complex64::ZERO; e], |v| v.to_vec())
            } else {
                vec![Complex64::ZERO; e]
            }
        })
    }

    /// Copy of the table with every value outside `domain` set to zero.
    pub fn restrict_domain(&self, domain: LatticeDomain) -> Result<SequenceTable> {
        Error::check_dim(self.dim(), domain.dim())?;
        let e = self.entries();
        let mut values = self.values.clone();
        for (o, k) in self.support.iter().enumerate() {
            if !domain.contains(&k) {
                values[o * e..(o + 1) * e].fill(Complex64::ZERO);
            }
        }
        SequenceTable::new(domain, self.support.clone(), self.kind, values, self.envelope.clone())
    }

    /// Re-tabulate on another box; new points are zero (or unknown when an envelope is present).
    pub fn with_support(&self, support: IndexBox) -> Result<SequenceTable> {
        let e = self.entries();
        SequenceTable::from_fn(self.domain.clone(), support, self.kind, self.envelope.clone(), |k| {
            self.get(k).map_or_else(|| vec![Complex64::ZERO; e], |v| v.to_vec())
        })
    }

    pub fn map_values<F: Fn(&[Complex64]) -> Vec<Complex64>>(&self, kind: ValueKind, f: F) -> Result<SequenceTable> {
        let e = self.entries();
        let mut values = Vec::with_capacity(self.support.len() * kind.entries());
        for o in 0..self.support.len() {
            values.extend(f(&self.values[o * e..(o + 1) * e]));
        }
        SequenceTable::new(self.domain.clone(), self.support.clone(), kind, values, None)
    }

    pub fn scale(&self, c: Complex64) -> SequenceTable {
        SequenceTable {
            values: self.values.iter().map(|v| v * c).collect(),
            envelope: self.envelope.as_ref().map(|e| e.scaled(c.norm())),
            ..self.clone()
        }
    }

    /// `alpha f + beta g` for finite-support tables of the same domain and kind.
    pub fn linear_combination(alpha: Complex64, f: &SequenceTable, beta: Complex64, g: &SequenceTable) -> Result<SequenceTable> {
        if f.domain != g.domain {
            return Err(Error::UnsupportedDomain("linear combination needs equal domains".into()));
        }
        if f.kind != g.kind {
            return Err(Error::KindMismatch(format!("{} vs {}", f.kind.name(), g.kind.name())));
        }
        if f.envelope.is_some() || g.envelope.is_some() {
            return Err(Error::Unsupported("linear combination of envelope-tailed tables".into()));
        }
        let support = f.support.hull(&g.support);
        let e = f.entries();
        SequenceTable::from_fn(f.domain.clone(), support, f.kind, None, |k| {
            let a = f.value_or_zero(k);
            let b = g.value_or_zero(k);
            (0..e).map(|i| alpha * a[i] + beta * b[i]).collect()
        })
    }

    /// Largest componentwise distance to `other` over `window` (unstored = zero).
    pub fn max_abs_diff(&self, other: &SequenceTable, window: &IndexBox) -> f64 {
        let mut worst: f64 = 0.0;
        for k in window.iter() {
            let a = self.value_or_zero(&k);
            let b = other.value_or_zero(&k);
            let d: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(d);
        }
        worst
    }

    /// Turn a scalar table into a one-component vector table and back.
    pub fn as_vector(&self) -> SequenceTable {
        match self.kind {
            ValueKind::Scalar => SequenceTable { kind: ValueKind::Vector(1), ..self.clone() },
            _ => self.clone(),
        }
    }

    pub fn as_scalar(&self) -> Result<SequenceTable> {
        match self.kind {
            ValueKind::Scalar => Ok(self.clone()),
            ValueKind::Vector(1) | ValueKind::Matrix(1) => Ok(SequenceTable { kind: ValueKind::Scalar, ..self.clone() }),
            k => Err(Error::KindMismatch(format!("cannot view {} of order {} as scalar", k.name(), k.order()))),
        }
    }
}
