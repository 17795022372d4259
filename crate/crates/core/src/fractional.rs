//! Cesàro kernels, forward differences and Weyl-type fractional differences.

use num_complex::Complex64;

use crate::convolution::{convolve_on_axes, ConvOptions, ConvOutput};
use crate::error::{Error, Result};
use crate::lattice::{IndexBox, LatticeDomain, MultiIndex};
use crate::linalg::vec_norm;
use crate::sequence::{Envelope, SequenceTable};
use crate::series::geo_sum;
use crate::ztransform::eval_forward;

/// `c^alpha(k) = Gamma(k + alpha) / (Gamma(alpha) k!)` stored on `0..=K`.
#[derive(Clone, Debug)]
pub struct CesaroKernel {
    alpha: f64,
    table: SequenceTable,
}

/// Values `c^alpha(0..=last)` by the ratio recurrence.
pub fn cesaro_values(alpha: f64, last: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(last + 1);
    if alpha == 0.0 {
        v.push(1.0);
        v.resize(last + 1, 0.0);
        return v;
    }
    let mut c = 1.0;
    v.push(c);
    for k in 1..=last {
        // multiply before dividing so integer orders stay exact
        c = c * (k as f64 - 1.0 + alpha) / k as f64;
        v.push(c);
    }
    v
}

/// Envelope `M (1 + eps)^k` with `eps = ln 2 / K`, so the bound is within a factor
/// two of the stored values for `alpha <= 1`.
fn cesaro_envelope(alpha: f64, last: usize) -> Result<Option<Envelope>> {
    if alpha == 0.0 {
        return Ok(None);
    }
    let eps = std::f64::consts::LN_2 / last.max(1) as f64;
    let rate = 1.0 + eps;
    let bound = if alpha <= 1.0 {
        1.0
    } else {
        // c(k)/(1+eps)^k grows while (k + alpha)/(k + 1) > 1 + eps
        let mut best: f64 = 1.0;
        let mut scaled = 1.0;
        let mut k = 0usize;
        loop {
            let ratio = (k as f64 + alpha) / (k as f64 + 1.0);
            if ratio <= rate {
                break;
            }
            scaled = scaled * ratio / rate;
            best = best.max(scaled);
            k += 1;
            if k > 100_000_000 {
                return Err(Error::InvalidEnvelope(format!("no envelope found for alpha = {alpha}")));
            }
        }
        best * (1.0 + 1e-12)
    };
    Envelope::new(bound, vec![rate]).map(Some)
}

impl CesaroKernel {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn table(&self) -> &SequenceTable {
        &self.table
    }

    pub fn into_table(self) -> SequenceTable {
        self.table
    }

    pub fn values(&self) -> Vec<f64> {
        self.table.values().iter().map(|c| c.re).collect()
    }
}

/// Cesàro kernel of order `alpha` on `0..=last`.
pub fn cesaro(alpha: f64, last: usize) -> Result<CesaroKernel> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::NegativeOrder(alpha));
    }
    let values: Vec<Complex64> = cesaro_values(alpha, last).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    let table = SequenceTable::new(
        LatticeDomain::nonneg(1),
        IndexBox::from_bounds(&[0], &[last as i64])?,
        crate::sequence::ValueKind::Scalar,
        values,
        cesaro_envelope(alpha, last)?,
    )?;
    Ok(CesaroKernel { alpha, table })
}

fn binomial(m: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, t| acc * (m - t) as f64 / (t + 1) as f64)
}

/// `(-1)^{m-j} C(m, j)` for `j = 0..=m`.
pub fn difference_weights(m: usize) -> Vec<f64> {
    (0..=m)
        .map(|j| if (m - j).is_multiple_of(2) { binomial(m, j) } else { -binomial(m, j) })
        .collect()
}

/// `Delta^m f(k) = sum_j (-1)^{m-j} C(m, j) f(k + j)` on a one-dimensional window.
pub fn forward_difference(f: &SequenceTable, m: usize, window: &IndexBox) -> Result<SequenceTable> {
    Error::check_dim(1, f.dim())?;
    Error::check_dim(1, window.dim())?;
    let w = difference_weights(m);
    let e = f.entries();
    for k in window.lo()[0]..=window.hi()[0] {
        for j in 0..=m as i64 {
            let idx = MultiIndex::new(vec![k + j]);
            if f.envelope().is_some() && f.domain().contains(&idx) && f.get(&idx).is_none() {
                return Err(Error::WindowOutsideData { index: idx.into_vec() });
            }
        }
    }
    SequenceTable::from_fn(f.domain().clone(), window.clone(), f.kind(), None, |k| {
        let mut acc = vec![crate::linalg::CompensatedSum::new(); e];
        for (j, wj) in w.iter().enumerate() {
            if let Some(v) = f.get_coords(&[k[0] + j as i64]) {
                for (s, x) in acc.iter_mut().zip(v) {
                    s.add(x * *wj);
                }
            }
        }
        acc.iter().map(|s| s.value()).collect()
    })
}

/// Kernel `a` on the non-negative integers with a difference order `m`, defining
/// `Delta_{W,a,m} = Delta^m Delta_{W,a}`.
#[derive(Clone, Debug)]
pub struct WeylOperatorSpec {
    kernel: SequenceTable,
    order: usize,
}

impl WeylOperatorSpec {
    pub fn new(kernel: SequenceTable, order: usize) -> Result<Self> {
        Error::check_dim(1, kernel.dim())?;
        if kernel.domain() != &LatticeDomain::nonneg(1) {
            return Err(Error::UnsupportedDomain("Weyl kernels live on the non-negative integers".into()));
        }
        if kernel.kind() != crate::sequence::ValueKind::Scalar {
            return Err(Error::KindMismatch("Weyl kernels are scalar".into()));
        }
        Ok(WeylOperatorSpec { kernel, order })
    }

    /// The Weyl fractional difference of order `alpha`: `a = c^{m - alpha}`, `m = ceil(alpha)`.
    pub fn fractional(alpha: f64, kernel_last: usize) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::NegativeOrder(alpha));
        }
        let m = alpha.ceil() as usize;
        Self::new(cesaro(m as f64 - alpha, kernel_last)?.into_table(), m)
    }

    pub fn with_order(kernel: &CesaroKernel, order: usize) -> Result<Self> {
        Self::new(kernel.table().clone(), order)
    }

    pub fn kernel(&self) -> &SequenceTable {
        &self.kernel
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

/// `Delta_{W,a} f(k) = sum_{s >= 0} a(s) f(k - s)` on `window`, with tail ledger.
pub fn weyl_derivative(a: &SequenceTable, f: &SequenceTable, window: &IndexBox, opts: &ConvOptions) -> Result<ConvOutput> {
    Error::check_dim(1, a.dim())?;
    Error::check_dim(1, f.dim())?;
    let result_domain = a.domain().minkowski_sum(f.domain())?;
    convolve_on_axes(a, f, &[0], &result_domain, window, opts)
}

/// `Delta^m Delta_{W,a} f` on `window`; `tail_bounds` combine the convolution tails
/// through the difference weights.
pub fn weyl_am(spec: &WeylOperatorSpec, f: &SequenceTable, window: &IndexBox, opts: &ConvOptions) -> Result<ConvOutput> {
    Error::check_dim(1, window.dim())?;
    let m = spec.order;
    let wide = window.expand(&[0], &[m as i64])?;
    let g = weyl_derivative(&spec.kernel, f, &wide, opts)?;
    let table = forward_difference(&g.table, m, window)?;
    let weights = difference_weights(m);
    let mut tails = Vec::with_capacity(window.len());
    let mut masses = Vec::with_capacity(window.len());
    for k in window.lo()[0]..=window.hi()[0] {
        let base = (k - wide.lo()[0]) as usize;
        tails.push((0..=m).map(|j| weights[j].abs() * g.tail_bounds[base + j]).sum());
        masses.push((0..=m).map(|j| weights[j].abs() * g.abs_mass[base + j]).sum());
    }
    Ok(ConvOutput { table, tail_bounds: tails, abs_mass: masses })
}

/// Comparison of both sides of the transform identity for `Delta_{W,a,m}`.
#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub deviations: Vec<f64>,
    pub max_rel_deviation: f64,
    /// Relative error budget from truncation on either side.
    pub max_rel_ledger: f64,
}

/// Compare `F_{Delta_{W,a,m} u}(z)` with `sum_j (-1)^{m-j} C(m,j) z^j F_a(z) F_u(z)`
/// for finitely supported `u`.
pub fn weyl_transform_identity_check(spec: &WeylOperatorSpec, u: &SequenceTable, points: &[Complex64]) -> Result<IdentityReport> {
    Error::check_dim(1, u.dim())?;
    if !u.has_finite_support() {
        return Err(Error::Unsupported("the identity check needs a finitely supported sequence".into()));
    }
    let m = spec.order;
    let a = &spec.kernel;
    let lo = u.support().lo()[0] - m as i64;
    let hi = u.support().hi()[0] + a.support().hi()[0];
    let window = IndexBox::from_bounds(&[lo], &[hi])?;
    let lhs_out = weyl_am(spec, u, &window, &ConvOptions::recording())?;
    let h = lhs_out.table.with_envelope(None)?;
    // |Delta_{W,a} u(k)| <= M sigma^k S with S = sum_l |u(l)| sigma^{-l}
    let beyond = a.envelope().map(|env| {
        let sigma = env.rates()[0];
        let s: f64 = u
            .support()
            .iter()
            .map(|l| vec_norm(&u.value_or_zero(&l)) * sigma.powi(-(l[0] as i32)))
            .sum();
        (env.bound() * s * (1.0 + sigma).powi(m as i32), sigma)
    });
    let weights = difference_weights(m);
    let mut deviations = Vec::with_capacity(points.len());
    let mut ledger: f64 = 0.0;
    for &z in points {
        if z == Complex64::ZERO {
            return Err(Error::PointOutsideRegion);
        }
        let lhs_eval = eval_forward(&h, &[z])?;
        let modulus = z.norm();
        let mut lhs_err = lhs_eval.rounding_bound;
        for (t, k) in (lo..=hi).enumerate() {
            lhs_err += lhs_out.tail_bounds[t] * modulus.powi(-(k as i32));
        }
        if let Some((scale, sigma)) = beyond {
            let g = geo_sum(sigma / modulus, Some(hi + 1), None);
            if !g.is_finite() {
                return Err(Error::PointOutsideRegion);
            }
            lhs_err += scale * g;
        }
        let fa = eval_forward(a, &[z])?;
        let fu = eval_forward(u, &[z])?;
        let poly: Complex64 = weights.iter().enumerate().map(|(j, w)| *w * z.powi(j as i32)).sum();
        let rhs: Vec<Complex64> = fu.value.iter().map(|x| poly * fa.scalar() * x).collect();
        let rhs_err = poly.norm() * (fa.error_bound() * vec_norm(&fu.value) + fa.scalar().norm() * fu.error_bound());
        let diff: Vec<Complex64> = lhs_eval.value.iter().zip(&rhs).map(|(x, y)| x - y).collect();
        let scale = vec_norm(&rhs).max(f64::MIN_POSITIVE);
        deviations.push(vec_norm(&diff) / scale);
        ledger = ledger.max((lhs_err + rhs_err) / scale);
    }
    let max_rel_deviation = deviations.iter().copied().fold(0.0, f64::max);
    Ok(IdentityReport { deviations, max_rel_deviation, max_rel_ledger: ledger })
}
