use num_complex::Complex64;
use seqpd::fock::{equivalence_suite, OracleReport};
use seqpd::gaussian::seqpd_single_mode;
use seqpd::optimize::{maximize_chsh_from, SweepPoint};
use seqpd::{chsh_value, sweep_eta, sweep_r, BellResult, Branch, Error, OptResult};
use serde::Serialize;
use serde_json::json;

use crate::config::{linspace, Format, Grid, RunConfig};
use crate::output::{Output, Table};
use crate::CliError;

/// Oracle agreement required for `oracle-check` to succeed.
pub const ORACLE_TOLERANCE: f64 = 1e-6;

fn eval_err(e: Error) -> CliError {
    CliError::Eval(e.to_string())
}

fn json_only(cfg: &RunConfig, cmd: &str) -> Result<(), CliError> {
    match cfg.format(Format::Json) {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::Config(format!("{cmd} writes JSON only"))),
    }
}

#[derive(Serialize)]
struct EvalRecord<'a> {
    #[serde(rename = "B")]
    b: f64,
    branch: Branch,
    s_prime: f64,
    terms: seqpd::bell::BellTerms,
    config: &'a RunConfig,
}

pub fn eval(cfg: &RunConfig) -> Result<Output, CliError> {
    cfg.single_point()?;
    json_only(cfg, "eval")?;
    let sigma = cfg.covariance()?;
    let (s, det) = (cfg.order()?, cfg.detector()?);
    let q = cfg.settings()?.ok_or_else(|| CliError::Config("eval needs explicit settings".into()))?;
    let BellResult { value, branch, s_prime, terms } = chsh_value(&sigma, &q, s, det).map_err(eval_err)?;
    if !value.is_finite() {
        return Err(CliError::Eval(format!("B evaluated to {value}")));
    }
    Ok(Output::json(&EvalRecord { b: value, branch, s_prime, terms, config: cfg }))
}

#[derive(Serialize)]
struct OptimizeRecord<'a> {
    value: f64,
    settings: seqpd::SettingsQuad,
    scheme: seqpd::SchemeTag,
    restarts_converged: usize,
    restarts: usize,
    evaluations: usize,
    seed: u64,
    config: &'a RunConfig,
}

pub fn optimize(cfg: &RunConfig) -> Result<Output, CliError> {
    cfg.single_point()?;
    json_only(cfg, "optimize")?;
    let sigma = cfg.covariance()?;
    let (s, det) = (cfg.order()?, cfg.detector()?);
    let opt = cfg.optimizer()?;
    let warm: Vec<_> = cfg.settings()?.into_iter().collect();
    let res = maximize_chsh_from(&sigma, cfg.scheme(), s, det, opt, &warm).map_err(eval_err)?;
    Ok(Output::json(&OptimizeRecord {
        value: res.best_value,
        settings: res.best_settings,
        scheme: res.scheme.tag,
        restarts_converged: res.restarts_converged,
        restarts: res.restarts,
        evaluations: res.evaluations,
        seed: opt.seed,
        config: cfg,
    }))
}

pub const SWEEP_HEADER: [&str; 14] = [
    "r", "eta", "scheme", "s", "B", "alpha", "alpha_prime", "beta", "beta_prime", "u", "u_prime", "v",
    "v_prime", "converged",
];

/// Sweep rows use real displacements; with complex displacements enabled
/// the imaginary parts are not in the table (use JSON output).
fn sweep_row(cfg: &RunConfig, p: &SweepPoint) -> (Vec<String>, serde_json::Value) {
    let num = |v: f64| format!("{v:.16e}");
    let (b, vals, converged) = match &p.outcome {
        Ok(OptResult { best_value, best_settings: q, restarts_converged, .. }) => (
            *best_value,
            [
                q.a.alpha.re, q.a_prime.alpha.re, q.b.alpha.re, q.b_prime.alpha.re, q.a.u,
                q.a_prime.u, q.b.u, q.b_prime.u,
            ],
            *restarts_converged > 0,
        ),
        Err(_) => (f64::NAN, [f64::NAN; 8], false),
    };
    let mut row = vec![num(p.r), num(p.eta), cfg.scheme.name().to_string(), num(cfg.s), num(b)];
    row.extend(vals.iter().map(|&v| num(v)));
    row.push(converged.to_string());

    let mut obj = json!({
        "r": p.r, "eta": p.eta, "scheme": cfg.scheme, "s": cfg.s, "B": b, "converged": converged,
    });
    if let Ok(res) = &p.outcome {
        obj["settings"] = json!(res.best_settings);
    }
    if let Err(e) = &p.outcome {
        obj["error"] = json!(e.to_string());
    }
    (row, obj)
}

pub fn sweep(cfg: &RunConfig) -> Result<Output, CliError> {
    if cfg.settings.is_some() {
        return Err(CliError::Config("sweep takes a grid, not explicit settings".into()));
    }
    let s = cfg.order()?;
    let opt = cfg.optimizer()?;
    let points = match &cfg.grid {
        Some(Grid::R(g)) => {
            let spec = cfg.tmsts()?;
            let det = cfg.detector()?;
            let grid = linspace("r", g.r_min, g.r_max, g.steps)?;
            if grid[0] < 0.0 {
                return Err(CliError::Config("r grid must be non-negative".into()));
            }
            sweep_r(spec.nu1, spec.nu2, &grid, cfg.scheme(), s, det, opt).map_err(eval_err)?
        }
        Some(Grid::Eta(g)) => {
            let sigma = cfg.covariance()?;
            let r = cfg.tmsts().map(|t| t.r).unwrap_or(f64::NAN);
            let grid = linspace("eta", g.eta_min, g.eta_max, g.steps)?;
            if grid[0] <= 0.0 || grid[grid.len() - 1] > 1.0 {
                return Err(CliError::Config("eta grid must lie in (0, 1]".into()));
            }
            sweep_eta(&sigma, r, &grid, cfg.scheme(), s, opt).map_err(eval_err)?
        }
        _ => return Err(CliError::Config("sweep needs an r or eta grid".into())),
    };

    let (rows, records): (Vec<_>, Vec<_>) = points.iter().map(|p| sweep_row(cfg, p)).unzip();
    let failed: Vec<String> = points
        .iter()
        .filter_map(|p| p.outcome.as_ref().err().map(|e| format!("r = {}, eta = {}: {e}", p.r, p.eta)))
        .collect();
    let out = match cfg.format(Format::Csv) {
        Format::Csv => Output::Table(Table { header: SWEEP_HEADER.to_vec(), rows }),
        Format::Json => Output::json(&records),
    };
    if failed.is_empty() {
        Ok(out)
    } else {
        Err(CliError::Partial(out, format!("{} grid points failed: {}", failed.len(), failed.join("; "))))
    }
}

pub fn qpd(cfg: &RunConfig) -> Result<Output, CliError> {
    let Some(Grid::Phase(g)) = cfg.grid else {
        return Err(CliError::Config(
            "qpd needs a {re_min, re_max, im_min, im_max, steps} grid".into(),
        ));
    };
    let sigma = cfg.covariance()?;
    let s = cfg.order()?;
    if !(g.u > 0.0 && g.u.is_finite()) {
        return Err(CliError::Config(format!("compression u = {} must be positive", g.u)));
    }
    let res = linspace("re_alpha", g.re_min, g.re_max, g.steps)?;
    let ims = linspace("im_alpha", g.im_min, g.im_max, g.steps)?;
    let mut points = Vec::with_capacity(res.len() * ims.len());
    for &re in &res {
        for &im in &ims {
            let w = seqpd_single_mode(&sigma, g.party, g.u, Complex64::new(re, im), s).map_err(eval_err)?;
            points.push((re, im, w));
        }
    }
    Ok(match cfg.format(Format::Csv) {
        Format::Csv => Output::Table(Table {
            header: vec!["re_alpha", "im_alpha", "w"],
            rows: points
                .iter()
                .map(|(re, im, w)| vec![format!("{re:.16e}"), format!("{im:.16e}"), format!("{w:.16e}")])
                .collect(),
        }),
        Format::Json => Output::json(
            &points
                .iter()
                .map(|&(re_alpha, im_alpha, w)| json!({"re_alpha": re_alpha, "im_alpha": im_alpha, "w": w}))
                .collect::<Vec<_>>(),
        ),
    })
}

#[derive(Serialize)]
struct OracleRecord<'a> {
    #[serde(flatten)]
    report: OracleReport,
    tolerance: f64,
    config: &'a RunConfig,
}

pub fn oracle_check(cfg: &RunConfig) -> Result<Output, CliError> {
    cfg.single_point()?;
    json_only(cfg, "oracle-check")?;
    let spec = cfg.tmsts()?;
    let report = equivalence_suite(&[spec], &cfg.oracle).map_err(|e| match e {
        Error::OutsideEnvelope(_) | Error::NotConverged(_) => CliError::Oracle(e.to_string()),
        Error::InvalidParameter(_) => CliError::Config(e.to_string()),
        e => eval_err(e),
    })?;
    let worst = report.max_abs_error;
    let out = Output::json(&OracleRecord { report, tolerance: ORACLE_TOLERANCE, config: cfg });
    if worst < ORACLE_TOLERANCE {
        Ok(out)
    } else {
        Err(CliError::OracleMismatch(out, format!("max abs error {worst:e} >= {ORACLE_TOLERANCE:e}")))
    }
}
