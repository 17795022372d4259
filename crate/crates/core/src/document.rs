//! JSON interchange format for sequence tables, plus complex-number text syntax.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{IndexBox, LatticeDomain, MultiIndex, Sign};
use crate::sequence::{Envelope, SequenceTable, ValueKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum DomainDoc {
    Full {},
    Orthant { signs: Vec<Sign> },
    Box { lo: Vec<i64>, hi: Vec<i64> },
    Shifted { base: Box<DomainDoc>, offset: Vec<i64> },
    Finite { points: Vec<Vec<i64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeDoc {
    #[serde(rename = "M")]
    pub bound: f64,
    pub rates: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates_neg: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceDoc {
    pub n: usize,
    pub value_kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub domain: DomainDoc,
    pub support_lo: Vec<i64>,
    pub support_hi: Vec<i64>,
    pub values: Vec<[f64; 2]>,
    pub envelope: Option<EnvelopeDoc>,
}

pub fn domain_to_doc(d: &LatticeDomain) -> DomainDoc {
    match d {
        LatticeDomain::Full { .. } => DomainDoc::Full {},
        LatticeDomain::Orthant { signs } => DomainDoc::Orthant { signs: signs.clone() },
        LatticeDomain::Box(b) => DomainDoc::Box { lo: b.lo().coords().to_vec(), hi: b.hi().coords().to_vec() },
        LatticeDomain::Shifted { base, offset } => {
            DomainDoc::Shifted { base: Box::new(domain_to_doc(base)), offset: offset.coords().to_vec() }
        }
        LatticeDomain::FiniteSet { points, .. } => {
            DomainDoc::Finite { points: points.iter().map(|p| p.coords().to_vec()).collect() }
        }
    }
}

pub fn domain_from_doc(doc: &DomainDoc, n: usize) -> Result<LatticeDomain> {
    let check = |len: usize| {
        if len == n {
            Ok(())
        } else {
            Err(Error::Schema(format!("domain parameter has length {len}, expected n = {n}")))
        }
    };
    Ok(match doc {
        DomainDoc::Full {} => LatticeDomain::full(n),
        DomainDoc::Orthant { signs } => {
            check(signs.len())?;
            LatticeDomain::orthant(signs.clone())
        }
        DomainDoc::Box { lo, hi } => {
            check(lo.len())?;
            check(hi.len())?;
            LatticeDomain::boxed(IndexBox::from_bounds(lo, hi)?)
        }
        DomainDoc::Shifted { base, offset } => {
            check(offset.len())?;
            LatticeDomain::shifted(domain_from_doc(base, n)?, offset.clone().into())?
        }
        DomainDoc::Finite { points } => {
            for p in points {
                check(p.len())?;
            }
            LatticeDomain::finite(n, points.iter().map(|p| MultiIndex::from(p.as_slice())))?
        }
    })
}

pub fn kind_from_parts(value_kind: &str, m: Option<usize>) -> Result<ValueKind> {
    match (value_kind, m) {
        ("scalar", None) | ("scalar", Some(1)) => Ok(ValueKind::Scalar),
        ("vector", Some(m)) if m > 0 => Ok(ValueKind::Vector(m)),
        ("matrix", Some(m)) if m > 0 => Ok(ValueKind::Matrix(m)),
        ("vector" | "matrix", _) => Err(Error::Schema(format!("value_kind {value_kind} needs a positive m"))),
        (other, _) => Err(Error::Schema(format!("unknown value_kind {other:?}"))),
    }
}

pub fn to_doc(t: &SequenceTable) -> SequenceDoc {
    let (value_kind, m) = match t.kind() {
        ValueKind::Scalar => ("scalar", None),
        ValueKind::Vector(m) => ("vector", Some(m)),
        ValueKind::Matrix(m) => ("matrix", Some(m)),
    };
    SequenceDoc {
        n: t.dim(),
        value_kind: value_kind.to_string(),
        m,
        domain: domain_to_doc(t.domain()),
        support_lo: t.support().lo().coords().to_vec(),
        support_hi: t.support().hi().coords().to_vec(),
        values: t.values().iter().map(|c| [c.re, c.im]).collect(),
        envelope: t.envelope().map(|e| EnvelopeDoc {
            bound: e.bound(),
            rates: e.rates().to_vec(),
            rates_neg: e.negative_rates().map(|r| r.to_vec()),
        }),
    }
}

pub fn from_doc(doc: &SequenceDoc) -> Result<SequenceTable> {
    let n = doc.n;
    if n == 0 {
        return Err(Error::Schema("n must be positive".into()));
    }
    if doc.support_lo.len() != n || doc.support_hi.len() != n {
        return Err(Error::Schema("support corners must have length n".into()));
    }
    let kind = kind_from_parts(&doc.value_kind, doc.m)?;
    let domain = domain_from_doc(&doc.domain, n)?;
    let support = IndexBox::from_bounds(&doc.support_lo, &doc.support_hi)?;
    let envelope = match &doc.envelope {
        None => None,
        Some(e) => {
            if e.rates.len() != n {
                return Err(Error::Schema("envelope rates must have length n".into()));
            }
            Some(match &e.rates_neg {
                None => Envelope::new(e.bound, e.rates.clone())?,
                Some(neg) => Envelope::two_sided(e.bound, e.rates.clone(), neg.clone())?,
            })
        }
    };
    let values = doc.values.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
    SequenceTable::new(domain, support, kind, values, envelope)
}

/// Parse a sequence document from JSON text.
pub fn ingest(json: &str) -> Result<SequenceTable> {
    let doc: SequenceDoc = serde_json::from_str(json).map_err(|e| Error::Schema(e.to_string()))?;
    from_doc(&doc)
}

pub fn ingest_value(v: &serde_json::Value) -> Result<SequenceTable> {
    let doc: SequenceDoc = serde_json::from_value(v.clone()).map_err(|e| Error::Schema(e.to_string()))?;
    from_doc(&doc)
}

/// Serialize a table as pretty-printed JSON.
pub fn emit(t: &SequenceTable) -> String {
    serde_json::to_string_pretty(&to_doc(t)).expect("sequence documents always serialize")
}

/// CSV rendering: one row per stored point and component.
pub fn emit_csv(t: &SequenceTable) -> String {
    let n = t.dim();
    let mut out = String::new();
    for i in 0..n {
        out.push_str(&format!("k{},", i + 1));
    }
    out.push_str("component,re,im\n");
    let e = t.entries();
    for (o, k) in t.support().iter().enumerate() {
        let v = t.value_at_offset(o);
        for (c, z) in v.iter().enumerate().take(e) {
            for x in k.coords() {
                out.push_str(&format!("{x},"));
            }
            out.push_str(&format!("{c},{:e},{:e}\n", z.re, z.im));
        }
    }
    out
}

/// Parse `a+bi`, `a-bi`, `a`, `bi` (also `i`, `-i`, and `j` for the imaginary unit).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Schema(format!("cannot parse complex number {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let parse_f = |x: &str| x.parse::<f64>().map_err(|_| bad());
    let imag_part = |x: &str| -> Result<f64> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => parse_f(x),
        }
    };
    if let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) {
        // find the sign separating real and imaginary parts (not an exponent sign)
        let bytes = body.as_bytes();
        let mut split = None;
        for p in (1..bytes.len()).rev() {
            if (bytes[p] == b'+' || bytes[p] == b'-') && !matches!(bytes[p - 1], b'e' | b'E') {
                split = Some(p);
                break;
            }
        }
        return match split {
            Some(p) => Ok(Complex64::new(parse_f(&body[..p])?, imag_part(&body[p..])?)),
            None => Ok(Complex64::new(0.0, imag_part(body)?)),
        };
    }
    Ok(Complex64::new(parse_f(&t)?, 0.0))
}

pub fn format_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Comma-separated list of complex numbers.
pub fn parse_complex_list(s: &str) -> Result<Vec<Complex64>> {
    s.split(',').map(parse_complex).collect()
}
