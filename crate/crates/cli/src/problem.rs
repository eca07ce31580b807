//! Problem-file schema: domain, matrix or homotopy payload, parameters.
//!
//! Entries are JSON objects with exactly one of:
//!   {"scalar": v} | {"grid": [v, ...]} | {"poly": [{"exp": [..], "coef": v}]}
//!   | {"polyfrac": {"num": [...], "den": [...]}}
//! Grids are dense row-major over the declared grid (last axis fastest);
//! polynomial exponents refer to normalized per-axis coordinates in [-1, 1].

use std::sync::Arc;

use serde_json::Value;
use transvect::homotopy::HomotopyMatrix;
use transvect::poly::MultiPoly;
use transvect::ring::PolyFn;
use transvect::{Axis, Domain, ElementaryFactor, FactorList, RingElement, SLMatrix};

use crate::value::CoeffCodec;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    NearIdentity,
    Gauss,
    SmoothLift,
    Representative,
    Homotopy,
    Contractible,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "near-identity" => Mode::NearIdentity,
            "gauss" => Mode::Gauss,
            "smooth-lift" => Mode::SmoothLift,
            "representative" => Mode::Representative,
            "homotopy" => Mode::Homotopy,
            "contractible" => Mode::Contractible,
            other => return Err(CliError::Parse(format!("unknown mode '{other}'"))),
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::NearIdentity => "near-identity",
            Mode::Gauss => "gauss",
            Mode::SmoothLift => "smooth-lift",
            Mode::Representative => "representative",
            Mode::Homotopy => "homotopy",
            Mode::Contractible => "contractible",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Params {
    pub tol_recon: f64,
    pub tol_det: f64,
    pub tol_cert: f64,
    pub pivot_floor: f64,
    pub max_degree: u32,
    pub t_res: usize,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            tol_recon: transvect::DEFAULT_TOL_RECON,
            tol_det: transvect::DEFAULT_TOL_DET,
            tol_cert: transvect::DEFAULT_TOL_CERT,
            pivot_floor: transvect::DEFAULT_PIVOT_FLOOR,
            max_degree: transvect::DEFAULT_MAX_DEGREE,
            t_res: transvect::DEFAULT_T_RES,
            seed: 0,
        }
    }
}

/// Command-line overrides applied on top of the file's params.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tol_recon: Option<f64>,
    pub tol_det: Option<f64>,
    pub tol_cert: Option<f64>,
    pub pivot_floor: Option<f64>,
    pub max_degree: Option<u32>,
    pub t_res: Option<usize>,
    pub seed: Option<u64>,
}

impl Params {
    pub fn apply(&mut self, ov: &Overrides) {
        if let Some(v) = ov.tol_recon {
            self.tol_recon = v;
        }
        if let Some(v) = ov.tol_det {
            self.tol_det = v;
        }
        if let Some(v) = ov.tol_cert {
            self.tol_cert = v;
        }
        if let Some(v) = ov.pivot_floor {
            self.pivot_floor = v;
        }
        if let Some(v) = ov.max_degree {
            self.max_degree = v;
        }
        if let Some(v) = ov.t_res {
            self.t_res = v;
        }
        if let Some(v) = ov.seed {
            self.seed = v;
        }
    }
}

#[derive(Debug)]
pub struct Problem<K: CoeffCodec> {
    pub mode: Mode,
    pub n: usize,
    pub domain: Option<Arc<Domain<K>>>,
    pub matrix: Option<SLMatrix<K>>,
    pub homotopy: Option<HomotopyMatrix<K>>,
    pub factor_list: Option<FactorList<K>>,
    pub basepoint: Option<Vec<usize>>,
    pub params: Params,
}

pub fn backend_of(root: &Value) -> Result<&str, CliError> {
    root.get("backend")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::Parse("missing 'backend' (rational | float64)".into()))
}

fn field<'a>(root: &'a Value, name: &str) -> Result<&'a Value, CliError> {
    root.get(name)
        .ok_or_else(|| CliError::Parse(format!("missing field '{name}'")))
}

fn as_usize(v: &Value, name: &str) -> Result<usize, CliError> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| CliError::Parse(format!("field '{name}' must be a nonnegative integer")))
}

pub fn parse_params(root: &Value) -> Result<Params, CliError> {
    let mut p = Params::default();
    let Some(obj) = root.get("params") else {
        return Ok(p);
    };
    if obj.is_null() {
        return Ok(p);
    }
    let obj = obj
        .as_object()
        .ok_or_else(|| CliError::Parse("'params' must be an object".into()))?;
    for (k, v) in obj {
        match k.as_str() {
            "tol_recon" => p.tol_recon = f64_param(v, k)?,
            "tol_det" => p.tol_det = f64_param(v, k)?,
            "tol_cert" => p.tol_cert = f64_param(v, k)?,
            "pivot_floor" => p.pivot_floor = f64_param(v, k)?,
            "max_degree" => p.max_degree = as_usize(v, k)? as u32,
            "t_res" => p.t_res = as_usize(v, k)?,
            "seed" => p.seed = v.as_u64().unwrap_or(0),
            other => return Err(CliError::Parse(format!("unknown param '{other}'"))),
        }
    }
    Ok(p)
}

fn f64_param(v: &Value, name: &str) -> Result<f64, CliError> {
    v.as_f64()
        .filter(|x| x.is_finite() && *x >= 0.0)
        .ok_or_else(|| CliError::Parse(format!("param '{name}' must be a nonnegative number")))
}

pub fn parse_domain<K: CoeffCodec>(v: &Value) -> Result<Arc<Domain<K>>, CliError> {
    let boxes = field(v, "box")?
        .as_array()
        .ok_or_else(|| CliError::Parse("'box' must be an array of [lo, hi]".into()))?;
    let res = field(v, "resolution")?
        .as_array()
        .ok_or_else(|| CliError::Parse("'resolution' must be an array".into()))?;
    if boxes.len() != res.len() {
        return Err(CliError::Parse("box and resolution lengths differ".into()));
    }
    let mut axes = Vec::with_capacity(boxes.len());
    for (b, r) in boxes.iter().zip(res) {
        let pair = b
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| CliError::Parse("each box entry must be [lo, hi]".into()))?;
        let lo = K::parse_json(&pair[0])?;
        let hi = K::parse_json(&pair[1])?;
        axes.push(Axis::new(lo, hi, as_usize(r, "resolution")?));
    }
    let mut dom = Domain::new(axes).map_err(CliError::Math)?;
    if let Some(mask) = v.get("mask").filter(|m| !m.is_null()) {
        let arr = mask
            .as_array()
            .ok_or_else(|| CliError::Parse("'mask' must be an array of flat indices".into()))?;
        let set = arr
            .iter()
            .map(|x| as_usize(x, "mask"))
            .collect::<Result<_, _>>()?;
        dom = dom.with_mask(set).map_err(CliError::Math)?;
    }
    Ok(Arc::new(dom))
}

fn parse_poly_terms<K: CoeffCodec>(
    v: &Value,
    dom: &Arc<Domain<K>>,
) -> Result<MultiPoly<K>, CliError> {
    let arr = v
        .as_array()
        .ok_or_else(|| CliError::Parse("'poly' must be an array of terms".into()))?;
    let mut poly = MultiPoly::zero(dom.dim());
    for term in arr {
        let exp = field(term, "exp")?
            .as_array()
            .ok_or_else(|| CliError::Parse("'exp' must be an array".into()))?;
        if exp.len() != dom.dim() {
            return Err(CliError::Parse(format!(
                "exponent arity {} does not match domain dimension {}",
                exp.len(),
                dom.dim()
            )));
        }
        let exps = exp
            .iter()
            .map(|e| as_usize(e, "exp").map(|x| x as u32))
            .collect::<Result<Vec<_>, _>>()?;
        let coef = K::parse_json(field(term, "coef")?)?;
        poly = poly.add(&MultiPoly::monomial(dom.dim(), exps, coef));
    }
    Ok(poly)
}

pub fn parse_element<K: CoeffCodec>(
    v: &Value,
    dom: Option<&Arc<Domain<K>>>,
) -> Result<RingElement<K>, CliError> {
    let obj = v
        .as_object()
        .ok_or_else(|| CliError::Parse(format!("element must be an object, got {v}")))?;
    if obj.len() != 1 {
        return Err(CliError::Parse(
            "element must have exactly one of scalar/grid/poly/polyfrac".into(),
        ));
    }
    let need_dom = || {
        dom.cloned()
            .ok_or_else(|| CliError::Parse("function element needs a domain".into()))
    };
    let (kind, payload) = obj.iter().next().expect("one key");
    match kind.as_str() {
        "scalar" => Ok(RingElement::scalar(K::parse_json(payload)?)),
        "grid" => {
            let d = need_dom()?;
            let arr = payload
                .as_array()
                .ok_or_else(|| CliError::Parse("'grid' must be an array".into()))?;
            let values = arr
                .iter()
                .map(K::parse_json)
                .collect::<Result<Vec<_>, _>>()?;
            RingElement::grid_from_values(&d, values).map_err(CliError::Math)
        }
        "poly" => {
            let d = need_dom()?;
            let poly = parse_poly_terms(payload, &d)?;
            RingElement::poly(&d, poly).map_err(CliError::Math)
        }
        "polyfrac" => {
            let d = need_dom()?;
            let num = parse_poly_terms(field(payload, "num")?, &d)?;
            let den = parse_poly_terms(field(payload, "den")?, &d)?;
            let num = PolyFn::new(d.clone(), num).map_err(CliError::Math)?;
            let den = PolyFn::new(d.clone(), den).map_err(CliError::Math)?;
            RingElement::poly_frac(num, den).map_err(CliError::Math)
        }
        other => Err(CliError::Parse(format!("unknown element kind '{other}'"))),
    }
}

pub fn parse_factor<K: CoeffCodec>(
    v: &Value,
    dom: Option<&Arc<Domain<K>>>,
) -> Result<ElementaryFactor<K>, CliError> {
    let i = as_usize(field(v, "i")?, "i")?;
    let j = as_usize(field(v, "j")?, "j")?;
    let r = parse_element(field(v, "r")?, dom)?;
    ElementaryFactor::new(i, j, r).map_err(CliError::Math)
}

pub fn parse_factor_list<K: CoeffCodec>(
    v: &Value,
    n: usize,
    dom: Option<&Arc<Domain<K>>>,
) -> Result<FactorList<K>, CliError> {
    let arr = v
        .as_array()
        .ok_or_else(|| CliError::Parse("factor list must be an array".into()))?;
    let mut fl = FactorList::empty(n);
    for f in arr {
        fl.push(parse_factor(f, dom)?).map_err(CliError::Math)?;
    }
    Ok(fl)
}

pub fn parse_matrix<K: CoeffCodec>(
    v: &Value,
    n: usize,
    dom: Option<&Arc<Domain<K>>>,
) -> Result<SLMatrix<K>, CliError> {
    if let Some(entries) = v.get("entries") {
        let rows = entries
            .as_array()
            .ok_or_else(|| CliError::Parse("'entries' must be an array of rows".into()))?;
        if rows.len() != n {
            return Err(CliError::Parse(format!(
                "expected {n} rows, got {}",
                rows.len()
            )));
        }
        let mut flat = Vec::with_capacity(n * n);
        for row in rows {
            let cols = row
                .as_array()
                .filter(|r| r.len() == n)
                .ok_or_else(|| CliError::Parse(format!("each row must have {n} entries")))?;
            for e in cols {
                flat.push(parse_element(e, dom)?);
            }
        }
        return SLMatrix::from_entries(n, flat).map_err(CliError::Math);
    }
    if let Some(factors) = v.get("factors") {
        let fl = parse_factor_list(factors, n, dom)?;
        return fl.product().map_err(CliError::Math);
    }
    Err(CliError::Parse(
        "matrix needs 'entries' or 'factors'".into(),
    ))
}

pub fn parse_problem<K: CoeffCodec>(root: &Value, ov: &Overrides) -> Result<Problem<K>, CliError> {
    let version = as_usize(field(root, "version")?, "version")?;
    if version != 1 {
        return Err(CliError::Parse(format!("unsupported version {version}")));
    }
    if backend_of(root)? != K::BACKEND {
        return Err(CliError::Parse("backend mismatch".into()));
    }
    let mode = Mode::parse(
        field(root, "mode")?
            .as_str()
            .ok_or_else(|| CliError::Parse("'mode' must be a string".into()))?,
    )?;
    let n = as_usize(field(root, "n")?, "n")?;
    if n == 0 {
        return Err(CliError::Parse("'n' must be positive".into()));
    }
    let mut params = parse_params(root)?;
    if let Some(t) = root.get("homotopy").and_then(|h| h.get("t_res")) {
        params.t_res = as_usize(t, "t_res")?;
    }
    // command-line overrides take effect before any payload is built, so
    // they also govern homotopy sampling and validation
    params.apply(ov);
    let domain = match root.get("domain").filter(|d| !d.is_null()) {
        Some(d) => Some(parse_domain::<K>(d)?),
        None => None,
    };

    let matrix = match root.get("matrix").filter(|m| !m.is_null()) {
        Some(m) => Some(parse_matrix(m, n, domain.as_ref())?),
        None => None,
    };

    let homotopy = match root.get("homotopy").filter(|h| !h.is_null()) {
        Some(h) => {
            let base = domain
                .clone()
                .ok_or_else(|| CliError::Parse("homotopy needs a domain".into()))?;
            let grid =
                transvect::TimeGrid::new(base.clone(), params.t_res).map_err(CliError::Math)?;
            let mat = parse_matrix(h, n, Some(grid.product()))?;
            Some(
                HomotopyMatrix::new(base, params.t_res, mat, params.tol_det)
                    .map_err(CliError::Math)?,
            )
        }
        None => None,
    };

    let factor_list = match root.get("factor_list").filter(|f| !f.is_null()) {
        Some(f) => Some(parse_factor_list(f, n, domain.as_ref())?),
        None => None,
    };

    let basepoint = match root.get("basepoint").filter(|b| !b.is_null()) {
        Some(b) => {
            let arr = b
                .as_array()
                .ok_or_else(|| CliError::Parse("'basepoint' must be an array".into()))?;
            Some(
                arr.iter()
                    .map(|x| as_usize(x, "basepoint"))
                    .collect::<Result<Vec<_>, _>>()?,
            )
        }
        None => None,
    };

    Ok(Problem {
        mode,
        n,
        domain,
        matrix,
        homotopy,
        factor_list,
        basepoint,
        params,
    })
}

pub fn load_json(path: &std::path::Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("invalid JSON: {e}")))
}
