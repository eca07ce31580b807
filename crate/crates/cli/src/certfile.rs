//! Certificate documents: the endpoint matrices A and B plus the list of
//! elementary-factor steps witnessing B = A · Π product(G_i).
//!
//! Factorization commands emit the same document with A = I, B = target and
//! a single step, so one verifier covers everything.

use std::path::Path;
use std::sync::Arc;

use serde_json::{json, Value};
use transvect::{Domain, FactorList, RingElement, SLMatrix};

use crate::problem::{parse_domain, parse_factor_list, parse_matrix};
use crate::value::CoeffCodec;
use crate::CliError;

#[derive(Debug)]
pub struct CertDoc<K: CoeffCodec> {
    pub n: usize,
    pub domain: Option<Arc<Domain<K>>>,
    pub a: SLMatrix<K>,
    pub b: SLMatrix<K>,
    pub steps: Vec<FactorList<K>>,
}

fn element_json<K: CoeffCodec>(e: &RingElement<K>) -> Value {
    match e {
        RingElement::Scalar(v) => json!({ "scalar": v.to_json() }),
        RingElement::Grid(g) => {
            let vals: Vec<Value> = g.values().iter().map(|v| v.to_json()).collect();
            json!({ "grid": vals })
        }
        RingElement::Poly(p) => json!({ "poly": poly_json(p.poly()) }),
        RingElement::PolyFrac(n, d) => json!({
            "polyfrac": { "num": poly_json(n.poly()), "den": poly_json(d.poly()) }
        }),
    }
}

fn poly_json<K: CoeffCodec>(p: &transvect::MultiPoly<K>) -> Value {
    let terms: Vec<Value> = p
        .terms()
        .map(|(exp, coef)| json!({ "exp": exp, "coef": coef.to_json() }))
        .collect();
    Value::Array(terms)
}

fn matrix_json<K: CoeffCodec>(m: &SLMatrix<K>) -> Value {
    let n = m.n();
    let rows: Vec<Value> = (0..n)
        .map(|r| Value::Array((0..n).map(|c| element_json(m.at(r, c))).collect()))
        .collect();
    Value::Array(rows)
}

fn factor_list_json<K: CoeffCodec>(fl: &FactorList<K>) -> Value {
    let factors: Vec<Value> = fl
        .iter()
        .map(|f| json!({ "i": f.i(), "j": f.j(), "r": element_json(f.coeff()) }))
        .collect();
    Value::Array(factors)
}

fn domain_json<K: CoeffCodec>(d: &Domain<K>) -> Value {
    let boxes: Vec<Value> = d
        .axes()
        .iter()
        .map(|a| json!([a.lo.to_json(), a.hi.to_json()]))
        .collect();
    let res: Vec<Value> = d.axes().iter().map(|a| json!(a.res)).collect();
    let mask: Value = match d.mask() {
        Some(m) => Value::Array(m.iter().map(|&p| json!(p)).collect()),
        None => Value::Null,
    };
    json!({ "box": boxes, "resolution": res, "mask": mask })
}

impl<K: CoeffCodec> CertDoc<K> {
    pub fn new(
        domain: Option<Arc<Domain<K>>>,
        a: SLMatrix<K>,
        b: SLMatrix<K>,
        steps: Vec<FactorList<K>>,
    ) -> Self {
        CertDoc {
            n: a.n(),
            domain,
            a,
            b,
            steps,
        }
    }

    /// Single-list document for a plain factorization: target = I · Π list.
    pub fn for_factorization(
        domain: Option<Arc<Domain<K>>>,
        target: SLMatrix<K>,
        list: FactorList<K>,
    ) -> Self {
        let n = target.n();
        CertDoc {
            n,
            domain,
            a: SLMatrix::identity(n),
            b: target,
            steps: vec![list],
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "version": 1,
            "backend": K::BACKEND,
            "n": self.n,
            "domain": self.domain.as_ref().map(|d| domain_json(d)).unwrap_or(Value::Null),
            "a": matrix_json(&self.a),
            "b": matrix_json(&self.b),
            "steps": Value::Array(self.steps.iter().map(factor_list_json).collect()),
        })
    }

    pub fn parse(root: &Value) -> Result<Self, CliError> {
        let version = root.get("version").and_then(Value::as_u64).unwrap_or(0);
        if version != 1 {
            return Err(CliError::Parse(format!(
                "unsupported certificate version {version}"
            )));
        }
        let backend = root
            .get("backend")
            .and_then(Value::as_str)
            .ok_or_else(|| CliError::Parse("missing 'backend'".into()))?;
        if backend != K::BACKEND {
            return Err(CliError::Parse("backend mismatch".into()));
        }
        let n = root
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| CliError::Parse("missing 'n'".into()))? as usize;
        let domain = match root.get("domain").filter(|d| !d.is_null()) {
            Some(d) => Some(parse_domain::<K>(d)?),
            None => None,
        };
        let wrap = |v: &Value| json!({ "entries": v });
        let a = parse_matrix(
            &wrap(
                root.get("a")
                    .ok_or_else(|| CliError::Parse("missing 'a'".into()))?,
            ),
            n,
            domain.as_ref(),
        )?;
        let b = parse_matrix(
            &wrap(
                root.get("b")
                    .ok_or_else(|| CliError::Parse("missing 'b'".into()))?,
            ),
            n,
            domain.as_ref(),
        )?;
        let steps_raw = root
            .get("steps")
            .and_then(Value::as_array)
            .ok_or_else(|| CliError::Parse("missing 'steps'".into()))?;
        let steps = steps_raw
            .iter()
            .map(|s| parse_factor_list(s, n, domain.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CertDoc {
            n,
            domain,
            a,
            b,
            steps,
        })
    }
}

/// Writes a JSON value atomically (temp file + rename).
pub fn write_atomic(path: &Path, value: &Value) -> Result<(), CliError> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Io(format!("serialize: {e}")))?;
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text.as_bytes())
        .map_err(|e| CliError::Io(format!("write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Io(format!("rename to {}: {e}", path.display())))?;
    Ok(())
}
