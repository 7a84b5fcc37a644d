use anyhow::{Context, Result};
use serde::Deserialize;
use serde_json::json;
use wlab_core::diagram::{qc_classify, CurvatureDiagram};
use wlab_core::geometry::{
    cmc_first_integral, detect_period, meridian_curvature_fd, rotational_profile, ProfileCurve, DEFAULT_STEP,
};
use wlab_core::relation::RelationSpec;

use crate::config::RunContext;
use crate::output::{write_file, write_summary, Check};
use crate::Status;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Start {
    r0: f64,
    #[serde(default)]
    z0: f64,
    theta0: f64,
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

fn default_period_tol() -> f64 {
    1e-6
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    relation: RelationSpec,
    start: Start,
    #[serde(default = "default_step")]
    step: f64,
    s_max: f64,
    #[serde(default = "default_period_tol")]
    period_tol: f64,
}

/// `sup |theta'_fd - f(sin(theta)/r)|` over samples with a full stencil.
fn relation_residual(rel: &RelationSpec, profile: &ProfileCurve) -> Result<f64> {
    let f = rel.f_function().context("relation has no explicit f")?;
    let mut sup = 0.0_f64;
    for (p, km) in profile.samples.iter().zip(meridian_curvature_fd(profile)) {
        if let Some(km) = km {
            sup = sup.max((km - f.eval(p.kappa_p)?).abs());
        }
    }
    Ok(sup)
}

pub fn run(ctx: &RunContext) -> Result<Status> {
    let cfg: Config = ctx.parse()?;
    let seed = (cfg.start.r0, cfg.start.z0, cfg.start.theta0);
    let profile = rotational_profile(&cfg.relation, seed, cfg.step, cfg.s_max)?;
    write_file(ctx, "profile.csv", &profile.to_csv())?;

    let residual = relation_residual(&cfg.relation, &profile)?;
    let mut checks = vec![Check::holds(
        "relation_residual",
        "sup |d theta/ds - f(sin(theta)/r)| with five-point d/ds",
        residual,
        residual <= 1e-6,
    )];
    if let RelationSpec::Cmc { h0 } = cfg.relation {
        let fd = meridian_curvature_fd(&profile);
        let mean = profile
            .samples
            .iter()
            .zip(&fd)
            .filter_map(|(p, km)| km.map(|km| (km + p.kappa_p - 2.0 * h0).abs()))
            .fold(0.0, f64::max);
        checks.push(Check::holds(
            "mean_curvature",
            "sup |kappa_m + kappa_p - 2 H0|",
            mean,
            mean <= 1e-6,
        ));
        let integral = cmc_first_integral(&profile, h0);
        let drift = integral.iter().map(|v| (v - integral[0]).abs()).fold(0.0, f64::max);
        checks.push(Check::holds(
            "first_integral_drift",
            "sup |I(s) - I(0)| with I = r sin(theta) - H0 r^2",
            drift,
            drift <= 1e-8,
        ));
    }

    let period = detect_period(&profile, cfg.period_tol);
    let mut period_info = json!({ "period": period });
    if let Some(p) = period {
        let fine = rotational_profile(&cfg.relation, seed, 0.5 * cfg.step, cfg.s_max)?;
        let p_fine = detect_period(&fine, cfg.period_tol);
        period_info["period_half_step"] = json!(p_fine);
        if let Some(q) = p_fine {
            checks.push(Check::holds(
                "period_step_halving",
                "|P(step) - P(step/2)|",
                (p - q).abs(),
                (p - q).abs() <= 1e-6 * p.max(1.0),
            ));
        }
    }

    let diagram = qc_classify(&CurvatureDiagram::from_profile(&profile));
    let last = profile.samples.last().context("empty profile")?;
    write_summary(
        ctx,
        json!({
            "samples": profile.samples.len(),
            "s_end": last.s,
            "truncation": profile.truncation,
            "period": period_info,
            "curvature_diagram": diagram,
            "checks": checks,
        }),
    )?;
    Ok(Status::Ok)
}
