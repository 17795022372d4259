//! Standard data sequences: deltas, geometric sequences and Gaussian bumps, each
//! with an envelope when the support is not finite.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::document::{domain_from_doc, parse_complex, DomainDoc};
use crate::error::{Error, Result};
use crate::lattice::{IndexBox, LatticeDomain, MultiIndex};
use crate::linalg::vec_norm;
use crate::sequence::{Envelope, SequenceTable, ValueKind};

fn check_direction(kind: ValueKind, v: &[Complex64]) -> Result<()> {
    if v.len() != kind.entries() {
        return Err(Error::LengthMismatch { expected: kind.entries(), found: v.len() });
    }
    Ok(())
}

/// `v` at `at`, zero elsewhere.
pub fn delta(domain: LatticeDomain, at: &MultiIndex, kind: ValueKind, v: &[Complex64]) -> Result<SequenceTable> {
    check_direction(kind, v)?;
    if !domain.contains(at) {
        return Err(Error::SupportOutsideDomain { index: at.coords().to_vec() });
    }
    let support = IndexBox::new(at.clone(), at.clone())?;
    SequenceTable::new(domain, support, kind, v.to_vec(), None)
}

/// `f(k) = prod_i ratio_i^{k_i} v` on the non-negative orthant, stored on `[0, last]^n`.
pub fn geometric(ratio: &[Complex64], last: i64, kind: ValueKind, v: &[Complex64]) -> Result<SequenceTable> {
    check_direction(kind, v)?;
    let n = ratio.len();
    let support = IndexBox::cube(n, 0, last)?;
    let env = Envelope::new(vec_norm(v), ratio.iter().map(|r| r.norm()).collect())?;
    SequenceTable::from_fn(LatticeDomain::nonneg(n), support, kind, Some(env), |k| {
        let w: Complex64 = k.coords().iter().zip(ratio).map(|(&x, r)| r.powi(x as i32)).product();
        v.iter().map(|c| c * w).collect()
    })
}

/// `f(k) = exp(-|k - c|^2) v` on the full lattice, stored on `c + [-W, W]^n`.
///
/// From `x^2 >= beta |x| - beta^2 / 4` the envelope is
/// `|v| prod_i exp(beta^2/4 + beta |c_i|) exp(-beta |k_i|)`.
pub fn gaussian_decay(center: &[i64], width: i64, beta: Option<f64>, kind: ValueKind, v: &[Complex64]) -> Result<SequenceTable> {
    check_direction(kind, v)?;
    let n = center.len();
    if width < 0 {
        return Err(Error::InvalidProblem("negative Gaussian width".into()));
    }
    let beta = beta.unwrap_or(2.0 * (width + 1) as f64 / n as f64);
    if !(beta > 0.0) {
        return Err(Error::InvalidEnvelope("the decay rate must be positive".into()));
    }
    let lo: Vec<i64> = center.iter().map(|c| c - width).collect();
    let hi: Vec<i64> = center.iter().map(|c| c + width).collect();
    let support = IndexBox::from_bounds(&lo, &hi)?;
    let log_m: f64 = center.iter().map(|&c| beta * beta / 4.0 + beta * c.abs() as f64).sum();
    let env = Envelope::two_sided(vec_norm(v) * log_m.exp(), vec![(-beta).exp(); n], vec![beta.exp(); n])?;
    SequenceTable::from_fn(LatticeDomain::full(n), support, kind, Some(env), |k| {
        let r2: f64 = k.coords().iter().zip(center).map(|(&x, &c)| ((x - c) as f64).powi(2)).sum();
        let w = (-r2).exp();
        v.iter().map(|c| c * w).collect()
    })
}

/// `{"generator": name, "params": {...}}` in problem documents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDoc {
    pub generator: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct GeneratorParams {
    #[serde(default)]
    at: Option<Vec<i64>>,
    #[serde(default)]
    domain: Option<DomainDoc>,
    #[serde(default)]
    value: Option<Vec<String>>,
    #[serde(default)]
    ratio: Option<Vec<String>>,
    #[serde(default)]
    last: Option<i64>,
    #[serde(default)]
    center: Option<Vec<i64>>,
    #[serde(default)]
    width: Option<i64>,
    #[serde(default)]
    beta: Option<f64>,
}

impl GeneratorDoc {
    /// Build the sequence for lattice dimension `n` and value shape `kind`. The
    /// default direction is the first basis vector.
    pub fn build(&self, n: usize, kind: ValueKind) -> Result<SequenceTable> {
        let p: GeneratorParams = if self.params.is_null() {
            GeneratorParams::default()
        } else {
            serde_json::from_value(self.params.clone()).map_err(|e| Error::Schema(e.to_string()))?
        };
        let v: Vec<Complex64> = match &p.value {
            Some(vals) => vals.iter().map(|s| parse_complex(s)).collect::<Result<_>>()?,
            None => {
                let mut e = vec![Complex64::ZERO; kind.entries()];
                e[0] = Complex64::new(1.0, 0.0);
                e
            }
        };
        let len_check = |what: &str, len: usize| {
            if len == n {
                Ok(())
            } else {
                Err(Error::Schema(format!("{what} has length {len}, expected n = {n}")))
            }
        };
        match self.generator.as_str() {
            "delta" => {
                let at = p.at.unwrap_or_else(|| vec![0; n]);
                len_check("at", at.len())?;
                let domain = match &p.domain {
                    Some(d) => domain_from_doc(d, n)?,
                    None => LatticeDomain::full(n),
                };
                delta(domain, &MultiIndex::new(at), kind, &v)
            }
            "geometric" => {
                let ratio: Vec<Complex64> = match &p.ratio {
                    Some(r) if r.len() == 1 => vec![parse_complex(&r[0])?; n],
                    Some(r) => r.iter().map(|s| parse_complex(s)).collect::<Result<_>>()?,
                    None => vec![Complex64::new(0.5, 0.0); n],
                };
                len_check("ratio", ratio.len())?;
                geometric(&ratio, p.last.unwrap_or(32), kind, &v)
            }
            "gaussian_decay" => {
                let center = p.center.unwrap_or_else(|| vec![0; n]);
                len_check("center", center.len())?;
                gaussian_decay(&center, p.width.unwrap_or(8), p.beta, kind, &v)
            }
            other => Err(Error::Schema(format!("unknown generator {other:?}"))),
        }
    }
}
