//! The four commands: factor, lift, certify, verify.
//!
//! Every producing command re-verifies its own output through the
//! independent re-multiplication route before reporting ok, and can write
//! the certificate document for later `verify` runs.

use std::path::Path;

use num_rational::BigRational;
use serde_json::{json, Value};
use transvect::gauss::GaussOptions;
use transvect::homotopy::CertOptions;
use transvect::lifting::LiftOptions;
use transvect::near_identity::{
    factor_near_identity, EliminationTrace, NearIdentityInput, NearIdentityOptions,
};
use transvect::{contractible_factorization, factor_pointwise, smooth_lift, smooth_representative};

use crate::certfile::{write_atomic, CertDoc};
use crate::problem::{backend_of, load_json, parse_problem, Mode, Overrides, Problem};
use crate::report::Report;
use crate::value::CoeffCodec;
use crate::verify::verify_certificate;
use crate::CliError;

fn trace_json<K: CoeffCodec>(trace: &EliminationTrace<K>) -> Value {
    Value::Array(
        trace
            .stages
            .iter()
            .map(|s| {
                json!({
                    "stage": s.stage,
                    "pivot_min": s.pivot_min.to_f64(),
                    "residual": s.residual.to_f64(),
                    "bound": s.residual_bound.as_ref().map(|b| b.to_f64()),
                })
            })
            .collect(),
    )
}

fn finish<K: CoeffCodec>(
    mut report: Report,
    doc: CertDoc<K>,
    tol_verify: f64,
    cert_out: Option<&Path>,
) -> Result<Report, CliError> {
    let outcome = verify_certificate(&doc, tol_verify)?;
    report.residual("verification", outcome.residual);
    report.factor_count = Some(outcome.factor_count);
    report.step_factor_counts = Some(doc.steps.iter().map(|s| s.len()).collect());
    let payload = doc.to_json();
    if let Some(path) = cert_out {
        write_atomic(path, &payload)?;
    }
    report.certificate = Some(payload);
    Ok(report)
}

fn require_matrix<K: CoeffCodec>(p: &Problem<K>) -> Result<&transvect::SLMatrix<K>, CliError> {
    p.matrix
        .as_ref()
        .ok_or_else(|| CliError::Parse("problem needs a 'matrix'".into()))
}

fn run_factor<K: CoeffCodec>(
    root: &Value,
    ov: &Overrides,
    cert_out: Option<&Path>,
) -> Result<Report, CliError> {
    let problem = parse_problem::<K>(root, ov)?;
    let params = &problem.params;
    let mut report = Report::new("factor");
    report.mode = Some(problem.mode.as_str().into());
    report.backend = Some(K::BACKEND.into());
    report.n = Some(problem.n);
    report.seed = Some(params.seed);

    let matrix = require_matrix(&problem)?;
    let list = match problem.mode {
        Mode::NearIdentity => {
            let opts = NearIdentityOptions {
                tol_det: params.tol_det,
            };
            let input = NearIdentityInput::validated(matrix.clone(), &opts)?;
            let (list, trace) = factor_near_identity(&input, &opts)?;
            report.stages = Some(trace_json(&trace));
            list
        }
        Mode::Gauss => {
            let opts = GaussOptions {
                tol_det: params.tol_det,
                tol_recon: params.tol_recon,
            };
            factor_pointwise(matrix, &opts)?
        }
        other => {
            return Err(CliError::Parse(format!(
                "mode '{}' is not a factor mode",
                other.as_str()
            )))
        }
    };
    let (recon, _) = list.reconstruction_dev(matrix)?;
    report.residual("reconstruction", recon);
    let doc = CertDoc::for_factorization(problem.domain.clone(), matrix.clone(), list);
    finish(report, doc, params.tol_recon, cert_out)
}

fn run_lift<K: CoeffCodec>(
    root: &Value,
    ov: &Overrides,
    cert_out: Option<&Path>,
) -> Result<Report, CliError> {
    let problem = parse_problem::<K>(root, ov)?;
    let params = problem.params.clone();
    let opts = LiftOptions {
        tol_recon: params.tol_recon,
        tol_det: params.tol_det,
        max_degree: params.max_degree,
        ..Default::default()
    };
    let mut report = Report::new("lift");
    report.mode = Some(problem.mode.as_str().into());
    report.backend = Some(K::BACKEND.into());
    report.n = Some(problem.n);
    report.seed = Some(params.seed);

    let matrix = require_matrix(&problem)?;
    match problem.mode {
        Mode::SmoothLift => {
            let factors = problem
                .factor_list
                .as_ref()
                .ok_or_else(|| CliError::Parse("smooth-lift needs 'factor_list'".into()))?;
            let out = smooth_lift(matrix, factors, &opts)?;
            report.residual("reconstruction", out.residual);
            report.residual("correction_dev", out.correction_dev.to_f64());
            report.stages = Some(trace_json(&out.trace));
            let doc =
                CertDoc::for_factorization(problem.domain.clone(), matrix.clone(), out.factors);
            finish(report, doc, params.tol_recon, cert_out)
        }
        Mode::Representative => {
            let out = smooth_representative(matrix, &opts)?;
            report.residual("reconstruction", out.residual);
            report.residual("fit_dev", out.fit_dev.to_f64());
            report.residual("correction_dev", out.correction_dev.to_f64());
            report.stages = Some(trace_json(&out.trace));
            let doc = CertDoc::new(
                problem.domain.clone(),
                matrix.clone(),
                out.b,
                vec![out.factors],
            );
            finish(report, doc, params.tol_recon, cert_out)
        }
        other => Err(CliError::Parse(format!(
            "mode '{}' is not a lift mode",
            other.as_str()
        ))),
    }
}

fn run_certify<K: CoeffCodec>(
    root: &Value,
    ov: &Overrides,
    cert_out: Option<&Path>,
) -> Result<Report, CliError> {
    let problem = parse_problem::<K>(root, ov)?;
    let params = problem.params.clone();
    let opts = CertOptions {
        pivot_floor: params.pivot_floor,
        tol_recon: params.tol_recon,
        tol_cert: params.tol_cert,
        tol_det: params.tol_det,
    };
    let mut report = Report::new("certify");
    report.mode = Some(problem.mode.as_str().into());
    report.backend = Some(K::BACKEND.into());
    report.n = Some(problem.n);
    report.seed = Some(params.seed);

    match problem.mode {
        Mode::Homotopy => {
            let h = problem
                .homotopy
                .as_ref()
                .ok_or_else(|| CliError::Parse("homotopy mode needs 'homotopy'".into()))?;
            let (cert, stats) = transvect::homotopy_certificate(h, &opts)?;
            report.residual("certificate", stats.certificate_residual);
            report.stages = Some(json!({
                "patch_count": stats.patch_count,
                "sliced_count": stats.sliced_count,
                "kept_count": stats.kept_count,
                "step_residuals": stats.step_residuals,
            }));
            let doc = CertDoc::new(problem.domain.clone(), cert.a, cert.b, cert.steps);
            finish(report, doc, params.tol_cert, cert_out)
        }
        Mode::Contractible => {
            let matrix = require_matrix(&problem)?;
            let dom = problem
                .domain
                .clone()
                .ok_or_else(|| CliError::Parse("contractible mode needs a domain".into()))?;
            let basepoint = problem
                .basepoint
                .clone()
                .unwrap_or_else(|| dom.axes().iter().map(|a| a.res / 2).collect());
            let out = contractible_factorization(matrix, &dom, &basepoint, params.t_res, &opts)?;
            report.residual("reconstruction", out.residual);
            report.stages = Some(json!({
                "patch_count": out.stats.patch_count,
                "sliced_count": out.stats.sliced_count,
                "kept_count": out.stats.kept_count,
                "step_residuals": out.stats.step_residuals,
            }));
            let doc = CertDoc::for_factorization(Some(dom), matrix.clone(), out.factors);
            finish(report, doc, params.tol_cert, cert_out)
        }
        other => Err(CliError::Parse(format!(
            "mode '{}' is not a certify mode",
            other.as_str()
        ))),
    }
}

fn dispatch<F, G, T>(root: &Value, float_run: F, rational_run: G) -> Result<T, CliError>
where
    F: FnOnce(&Value) -> Result<T, CliError>,
    G: FnOnce(&Value) -> Result<T, CliError>,
{
    match backend_of(root)? {
        "float64" => float_run(root),
        "rational" => rational_run(root),
        other => Err(CliError::Parse(format!("unknown backend '{other}'"))),
    }
}

pub fn cmd_factor(
    path: &Path,
    ov: &Overrides,
    cert_out: Option<&Path>,
) -> Result<Report, CliError> {
    let root = load_json(path)?;
    dispatch(
        &root,
        |r| run_factor::<f64>(r, ov, cert_out),
        |r| run_factor::<BigRational>(r, ov, cert_out),
    )
}

pub fn cmd_lift(path: &Path, ov: &Overrides, cert_out: Option<&Path>) -> Result<Report, CliError> {
    let root = load_json(path)?;
    dispatch(
        &root,
        |r| run_lift::<f64>(r, ov, cert_out),
        |r| run_lift::<BigRational>(r, ov, cert_out),
    )
}

pub fn cmd_certify(
    path: &Path,
    ov: &Overrides,
    cert_out: Option<&Path>,
) -> Result<Report, CliError> {
    let root = load_json(path)?;
    dispatch(
        &root,
        |r| run_certify::<f64>(r, ov, cert_out),
        |r| run_certify::<BigRational>(r, ov, cert_out),
    )
}

pub fn cmd_verify(path: &Path, tol_cert: Option<f64>) -> Result<Report, CliError> {
    let root = load_json(path)?;
    let tol = tol_cert.unwrap_or(transvect::DEFAULT_TOL_CERT);
    let (mut report, residual): (Report, f64) = match backend_of(&root)? {
        "float64" => {
            let doc = CertDoc::<f64>::parse(&root)?;
            let mut rep = Report::new("verify");
            rep.backend = Some("float64".into());
            rep.n = Some(doc.n);
            let out = verify_certificate(&doc, tol)?;
            rep.factor_count = Some(out.factor_count);
            rep.step_factor_counts = Some(doc.steps.iter().map(|s| s.len()).collect());
            rep.residuals
                .insert("points_checked".into(), json!(out.points_checked));
            (rep, out.residual)
        }
        "rational" => {
            let doc = CertDoc::<BigRational>::parse(&root)?;
            let mut rep = Report::new("verify");
            rep.backend = Some("rational".into());
            rep.n = Some(doc.n);
            let out = verify_certificate(&doc, tol)?;
            rep.factor_count = Some(out.factor_count);
            rep.step_factor_counts = Some(doc.steps.iter().map(|s| s.len()).collect());
            rep.residuals
                .insert("points_checked".into(), json!(out.points_checked));
            (rep, out.residual)
        }
        other => return Err(CliError::Parse(format!("unknown backend '{other}'"))),
    };
    report.residual("verification", residual);
    Ok(report)
}
