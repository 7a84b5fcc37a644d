use anyhow::Result;
use serde::Deserialize;
use serde_json::json;
use wlab_core::jets::{derivative_bound_check, uniform_ellipticity_lambda, ThetaBox};
use wlab_core::relation::{certify_ellipticity, RelationSpec, TGrid};

use crate::config::RunContext;
use crate::output::{write_summary, Check};
use crate::Status;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridConfig {
    t_max: f64,
    samples: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    relation: RelationSpec,
    grid: Option<GridConfig>,
    /// Random jets for the principal-symbol estimate; 0 skips it.
    #[serde(default)]
    lambda_samples: usize,
    #[serde(default)]
    theta: ThetaBox,
}

pub fn run(ctx: &RunContext) -> Result<Status> {
    let cfg: Config = ctx.parse()?;
    let grid = match &cfg.grid {
        Some(g) => TGrid::log_spaced(g.t_max, g.samples),
        None => cfg.relation.default_grid(),
    };
    let report = certify_ellipticity(&cfg.relation, &grid)?;
    let mut checks = vec![Check::holds(
        "ellipticity",
        "sup_t 4 t g'(t)^2 < 1",
        report.sup_4tgp2,
        report.is_elliptic,
    )];
    let bound = if report.is_elliptic {
        let b = derivative_bound_check(&cfg.relation, &grid)?;
        checks.push(Check::holds(
            "derivative_bound",
            "sup_t sqrt(t) |g'(t)| < 1/2",
            b.sup,
            b.holds,
        ));
        Some(b)
    } else {
        None
    };
    let lambda = if report.is_elliptic && cfg.lambda_samples > 0 {
        let est = uniform_ellipticity_lambda(&cfg.relation, &cfg.theta, cfg.lambda_samples, ctx.seed)?;
        checks.push(Check::holds(
            "principal_symbol",
            "min over Theta of the smallest eigenvalue of [[F_r, F_s/2], [F_s/2, F_t]] > 0",
            est.lambda,
            est.lambda > 0.0,
        ));
        Some(est)
    } else {
        None
    };
    let verdict = match (report.is_elliptic, report.uniform_constant_lambda) {
        (false, _) => "not elliptic".to_string(),
        (true, Some(l)) => format!("uniformly elliptic (Lambda = {l})"),
        (true, None) => "elliptic, not uniformly elliptic".to_string(),
    };
    write_summary(
        ctx,
        json!({
            "verdict": verdict,
            "report": report,
            "derivative_bound": bound,
            "lambda_estimate": lambda,
            "checks": checks,
        }),
    )?;
    Ok(if report.is_elliptic {
        Status::Ok
    } else {
        Status::CertificationFailure
    })
}
