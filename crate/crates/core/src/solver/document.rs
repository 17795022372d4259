//! JSON problem documents.
//!
//! ```json
//! { "kind": "pencil", "n": 1, "m": 1,
//!   "terms": [ {"j": [1], "A": [["1"]]}, {"j": [0], "A": [["-0.5"]]} ],
//!   "C": [["1"]],
//!   "data": {"generator": "delta", "params": {"at": [0]}} }
//! ```
//!
//! Matrix entries may be numbers, `"a+bi"` strings or `[re, im]` pairs. Axes in
//! `mixed_axes` terms are 1-based.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::document::{domain_from_doc, from_doc, parse_complex, DomainDoc, SequenceDoc};
use crate::error::{Error, Result};
use crate::fractional::{cesaro, WeylOperatorSpec};
use crate::generators::GeneratorDoc;
use crate::lattice::{LatticeDomain, MultiIndex};
use crate::linalg::CMatrix;
use crate::sequence::{SequenceTable, ValueKind};

use super::problem::{AxesTerm, KernelTerm, OperatorPencil, Problem, SymbolVariant, VolterraSymbol, WeylTerm};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CesaroDoc {
    pub alpha: f64,
    pub last: usize,
}

/// A scalar kernel: a Cesàro sequence, a generated sequence or an explicit table.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelDoc {
    Cesaro { cesaro: CesaroDoc },
    Generator(GeneratorDoc),
    Table(Box<SequenceDoc>),
}

/// Explicit table or generator for the right-hand side.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataDoc {
    Generator(GeneratorDoc),
    Table(Box<SequenceDoc>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    /// Pencil index.
    #[serde(default)]
    pub j: Option<Vec<i64>>,
    #[serde(default)]
    pub kernel: Option<KernelDoc>,
    #[serde(default)]
    pub shift: Option<Value>,
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub axes: Option<Vec<usize>>,
    #[serde(rename = "A")]
    pub a: Value,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub kind: String,
    pub n: usize,
    pub m: usize,
    pub terms: Vec<TermDoc>,
    #[serde(rename = "C", default)]
    pub c: Option<Value>,
    #[serde(rename = "B", default)]
    pub b: Option<Value>,
    #[serde(rename = "A0", default)]
    pub a0: Option<Value>,
    #[serde(default)]
    pub k0: Option<i64>,
    #[serde(default)]
    pub data: Option<DataDoc>,
    /// Domain `D'` of the kernel in the solution convolution; full lattice by default.
    #[serde(default)]
    pub kernel_domain: Option<DomainDoc>,
}

/// A parsed problem together with its optional data and kernel domain.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub problem: Problem,
    pub data: Option<SequenceTable>,
    pub kernel_domain: LatticeDomain,
}

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

fn parse_entry(v: &Value) -> Result<Complex64> {
    match v {
        Value::Number(x) => Ok(Complex64::new(x.as_f64().ok_or_else(|| schema("bad number"))?, 0.0)),
        Value::String(s) => parse_complex(s),
        Value::Array(p) if p.len() == 2 => {
            let re = p[0].as_f64().ok_or_else(|| schema("bad real part"))?;
            let im = p[1].as_f64().ok_or_else(|| schema("bad imaginary part"))?;
            Ok(Complex64::new(re, im))
        }
        other => Err(schema(format!("cannot read matrix entry {other}"))),
    }
}

/// An `m x m` matrix as an array of rows; a bare entry is accepted when `m = 1`.
pub fn parse_matrix(v: &Value, m: usize) -> Result<CMatrix> {
    if m == 1 && !matches!(v, Value::Array(rows) if rows.first().is_some_and(|r| r.is_array())) {
        return Ok(CMatrix::from_element(1, 1, parse_entry(v)?));
    }
    let rows = v.as_array().ok_or_else(|| schema("a matrix is an array of rows"))?;
    if rows.len() != m {
        return Err(schema(format!("matrix has {} rows, expected {m}", rows.len())));
    }
    let mut a = CMatrix::zeros(m, m);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| schema("a matrix row is an array"))?;
        if row.len() != m {
            return Err(schema(format!("matrix row {i} has {} entries, expected {m}", row.len())));
        }
        for (j, e) in row.iter().enumerate() {
            a[(i, j)] = parse_entry(e)?;
        }
    }
    Ok(a)
}

fn kernel_table(doc: &KernelDoc, dim: usize) -> Result<SequenceTable> {
    let t = match doc {
        KernelDoc::Cesaro { cesaro: c } => {
            if dim != 1 {
                return Err(schema("Cesàro kernels are one-dimensional"));
            }
            cesaro(c.alpha, c.last)?.into_table()
        }
        KernelDoc::Generator(g) => g.build(dim, ValueKind::Scalar)?,
        KernelDoc::Table(t) => from_doc(t)?,
    };
    Error::check_dim(dim, t.dim())?;
    Ok(t)
}

fn shift_vec(v: &Option<Value>, n: usize) -> Result<Vec<i64>> {
    match v {
        None => Ok(vec![0; n]),
        Some(Value::Number(x)) if n == 1 => Ok(vec![x.as_i64().ok_or_else(|| schema("shift must be an integer"))?]),
        Some(v) => {
            let s: Vec<i64> = serde_json::from_value(v.clone()).map_err(|e| schema(e.to_string()))?;
            if s.len() != n {
                return Err(schema(format!("shift has length {}, expected n = {n}", s.len())));
            }
            Ok(s)
        }
    }
}

impl ProblemDoc {
    pub fn to_spec(&self) -> Result<ProblemSpec> {
        let (n, m) = (self.n, self.m);
        if n == 0 || m == 0 {
            return Err(schema("n and m must be positive"));
        }
        let c = match &self.c {
            Some(v) => parse_matrix(v, m)?,
            None => CMatrix::identity(m, m),
        };
        let zero = CMatrix::zeros(m, m);
        let problem = match self.kind.as_str() {
            "pencil" => {
                let mut terms = Vec::with_capacity(self.terms.len());
                for t in &self.terms {
                    let j = t.j.clone().ok_or_else(|| schema("pencil terms need an index j"))?;
                    if j.len() != n {
                        return Err(schema(format!("term index has length {}, expected n = {n}", j.len())));
                    }
                    terms.push((MultiIndex::new(j), parse_matrix(&t.a, m)?));
                }
                Problem::Pencil(OperatorPencil::new(terms, c)?)
            }
            "volterra_zn" => {
                let b = match &self.b {
                    Some(v) => parse_matrix(v, m)?,
                    None => zero,
                };
                let mut terms = Vec::new();
                for t in &self.terms {
                    let k = t.kernel.as_ref().ok_or_else(|| schema("volterra_zn terms need a kernel"))?;
                    terms.push(KernelTerm {
                        kernel: kernel_table(k, n)?,
                        shift: MultiIndex::new(shift_vec(&t.shift, n)?),
                        op: parse_matrix(&t.a, m)?,
                    });
                }
                Problem::Volterra(VolterraSymbol::new(n, SymbolVariant::MultiTermZn { b, terms }, c)?)
            }
            "weyl_1d" => {
                if n != 1 {
                    return Err(schema("weyl_1d problems have n = 1"));
                }
                let a0 = match &self.a0 {
                    Some(v) => parse_matrix(v, m)?,
                    None => zero,
                };
                let mut terms = Vec::new();
                for t in &self.terms {
                    let k = t.kernel.as_ref().ok_or_else(|| schema("weyl_1d terms need a kernel"))?;
                    let spec = WeylOperatorSpec::new(kernel_table(k, 1)?, t.order.unwrap_or(0))?;
                    terms.push(WeylTerm { spec, shift: shift_vec(&t.shift, 1)?[0], op: parse_matrix(&t.a, m)? });
                }
                Problem::Volterra(VolterraSymbol::new(1, SymbolVariant::WeylFractional1D { terms, a0, k0: self.k0.unwrap_or(0) }, c)?)
            }
            "mixed_axes" => {
                let mut terms = Vec::new();
                for t in &self.terms {
                    let k = t.kernel.as_ref().ok_or_else(|| schema("mixed_axes terms need a kernel"))?;
                    let axes = t.axes.clone().ok_or_else(|| schema("mixed_axes terms need axes"))?;
                    if axes.iter().any(|&a| a == 0 || a > n) {
                        return Err(schema(format!("axes {axes:?} must lie in 1..={n}")));
                    }
                    let axes: Vec<usize> = axes.iter().map(|a| a - 1).collect();
                    terms.push(AxesTerm { kernel: kernel_table(k, axes.len())?, axes, op: parse_matrix(&t.a, m)? });
                }
                Problem::Volterra(VolterraSymbol::new(n, SymbolVariant::MixedAxes { terms }, c)?)
            }
            other => return Err(schema(format!("unknown problem kind {other:?}"))),
        };
        let kind = if m == 1 { ValueKind::Scalar } else { ValueKind::Vector(m) };
        let data = match &self.data {
            None => None,
            Some(DataDoc::Generator(g)) => Some(g.build(n, kind)?),
            Some(DataDoc::Table(t)) => Some(from_doc(t)?),
        };
        let kernel_domain = match &self.kernel_domain {
            Some(d) => domain_from_doc(d, n)?,
            None => LatticeDomain::full(n),
        };
        Ok(ProblemSpec { problem, data, kernel_domain })
    }
}

/// Parse a problem document from JSON text.
pub fn parse_problem(json: &str) -> Result<ProblemSpec> {
    let doc: ProblemDoc = serde_json::from_str(json).map_err(|e| schema(e.to_string()))?;
    doc.to_spec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pencil_document() {
        let spec = parse_problem(
            r#"{"kind":"pencil","n":1,"m":2,
                "terms":[{"j":[1],"A":[[1,0],[0,1]]},{"j":[0],"A":[["-0.5",0],[0,[0,-0.5]]]}],
                "data":{"generator":"delta"}}"#,
        )
        .unwrap();
        let Problem::Pencil(p) = &spec.problem else { panic!("expected a pencil") };
        assert_eq!(p.terms().len(), 2);
        assert_eq!(p.terms()[1].1[(1, 1)], Complex64::new(0.0, -0.5));
        assert_eq!(spec.data.unwrap().kind(), ValueKind::Vector(2));
    }

    #[test]
    fn weyl_document() {
        let spec = parse_problem(
            r#"{"kind":"weyl_1d","n":1,"m":1,
                "terms":[{"kernel":{"cesaro":{"alpha":0.5,"last":50}},"order":1,"shift":0,"A":1}]}"#,
        )
        .unwrap();
        assert_eq!(spec.problem.kind_name(), "weyl_1d");
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(parse_problem(r#"{"kind":"nope","n":1,"m":1,"terms":[]}"#), Err(Error::Schema(_))));
        assert!(matches!(
            parse_problem(r#"{"kind":"pencil","n":1,"m":2,"terms":[{"j":[0],"A":[[1,0]]}]}"#),
            Err(Error::Schema(_))
        ));
    }
}
