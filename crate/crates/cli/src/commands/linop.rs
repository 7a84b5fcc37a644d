use std::f64::consts::FRAC_PI_2;

use anyhow::{bail, Result};
use serde::Deserialize;
use serde_json::json;
use wlab_core::linop::{
    apply_lg_on_grid, bump, critical_square_size, cylinder_graph, cylinder_operator, cylinder_test_function,
    default_tau, perturbation_threshold, sample_on_grid, sup_difference, varied_weingarten_residual,
    weingarten_variation, CylinderOperator,
};
use wlab_core::patch::GraphPatch;
use wlab_core::relation::RelationSpec;

use crate::config::RunContext;
use crate::output::{write_file, write_summary, Check};
use crate::Status;

fn one() -> f64 {
    1.0
}

fn default_n() -> usize {
    81
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    relation: RelationSpec,
    #[serde(default = "one")]
    r0: f64,
    /// Half-sides of the rectangle `|s| <= L`, `|t| <= r` on the cylinder.
    #[serde(rename = "L")]
    l: f64,
    r: f64,
    /// Nodes per side of the square chart `[-r0, r0]^2`.
    #[serde(default = "default_n")]
    n: usize,
    tau: Option<f64>,
}

fn chart(r0: f64, n: usize) -> Result<GraphPatch> {
    let h = 2.0 * r0 / (n - 1) as f64;
    Ok(GraphPatch::square(n, -r0, -r0, h, cylinder_graph(r0))?)
}

/// `sup |L_g phi - lambda phi|` over nodes at least two cells inside the
/// rectangle, where `phi` is smooth.
fn eigen_error(rel: &RelationSpec, op: &CylinderOperator, cfg: &Config, n: usize) -> Result<(f64, GraphPatch, Vec<f64>, Vec<Option<f64>>)> {
    let p = chart(cfg.r0, n)?;
    let phi = sample_on_grid(&p, cylinder_test_function(cfg.r0, cfg.l, cfg.r));
    let lg = apply_lg_on_grid(rel, &p, &phi)?;
    let lam = perturbation_threshold(op, cfg.l, cfg.r);
    let h = p.grid.h;
    let mut err = 0.0_f64;
    for c in p.interior_nodes() {
        let (x, y) = p.grid.xy(c);
        let s = cfg.r0 * (x / cfg.r0).asin();
        if let Some(v) = lg[c] {
            if s.abs() < cfg.l - 2.0 * h && y.abs() < cfg.r - 2.0 * h {
                err = err.max((v - lam * phi[c]).abs());
            }
        }
    }
    Ok((err, p, phi, lg))
}

pub fn run(ctx: &RunContext) -> Result<Status> {
    let cfg: Config = ctx.parse()?;
    if !(cfg.l > 0.0 && cfg.l < FRAC_PI_2 * cfg.r0 && cfg.r > 0.0 && cfg.r < cfg.r0) {
        bail!("need 0 < L < pi r0 / 2 and 0 < r < r0 for the rectangle to fit the chart");
    }
    if cfg.n < 9 {
        bail!("n = {} is too small", cfg.n);
    }
    let op = cylinder_operator(&cfg.relation, cfg.r0)?;
    let lam = perturbation_threshold(&op, cfg.l, cfg.r);
    let l_crit = critical_square_size(&op);

    let (err, p, phi, lg) = eigen_error(&cfg.relation, &op, &cfg, cfg.n)?;
    let (err_fine, ..) = eigen_error(&cfg.relation, &op, &cfg, 2 * cfg.n - 1)?;
    let scale = lam.abs().max(1.0);
    let mut checks = vec![
        Check::holds(
            "threshold_eigenfunction",
            "L_g[phi] = (-A (pi/2L)^2 - B (pi/2r)^2 + C) phi, phi = cos(pi s/2L) cos(pi t/2r)",
            err,
            err <= 1e-2 * scale,
        ),
        Check::holds(
            "threshold_convergence_ratio",
            "error(h) / error(h/2) for the eigenfunction identity",
            err / err_fine,
            err / err_fine > 3.0,
        ),
    ];

    let tau = cfg.tau.unwrap_or_else(|| default_tau(&p));
    let smooth = sample_on_grid(&p, bump(0.0, 0.0, cfg.l.min(cfg.r)));
    let w_prime = weingarten_variation(&cfg.relation, &p, &smooth, tau)?;
    let lg_smooth = apply_lg_on_grid(&cfg.relation, &p, &smooth)?;
    let lg_scale = lg_smooth.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    let w_err = sup_difference(&w_prime, &lg_smooth);
    checks.push(Check::holds(
        "weingarten_variation",
        "d/dtau [H - g(H^2 - K)](X + tau phi N) at tau = 0 equals L_g[phi]",
        w_err,
        w_err <= 1e-3 * lg_scale.max(1e-12),
    ));

    // sign of the perturbed residual at the rectangle's centre
    let c = p.grid.nearest(0.0, 0.0);
    let w0 = varied_weingarten_residual(&cfg.relation, &p, &phi, 0.0)?[c];
    let wt = varied_weingarten_residual(&cfg.relation, &p, &phi, tau)?[c];
    let (w0, wt) = match (w0, wt) {
        (Some(a), Some(b)) => (a, b),
        _ => bail!("centre node has no residual"),
    };
    let slope = (wt - w0) / tau;
    checks.push(Check::holds(
        "perturbation_sign",
        "sign((W(tau) - W(0)) / tau) = sign(threshold) at the centre",
        slope,
        slope.signum() == lam.signum(),
    ));

    let mut csv = String::from("x,y,phi,lg_phi,threshold_phi\n");
    for k in p.interior_nodes() {
        if let Some(v) = lg[k] {
            let (x, y) = p.grid.xy(k);
            csv.push_str(&format!("{x},{y},{},{v},{}\n", phi[k], lam * phi[k]));
        }
    }
    write_file(ctx, "linop.csv", &csv)?;
    write_summary(
        ctx,
        json!({
            "operator": op,
            "threshold": lam,
            "critical_square_half_side": l_crit,
            "h": p.grid.h,
            "tau": tau,
            "eigen_error": { "h": err, "h_half": err_fine },
            "residual_at_centre": {
                "W(0)": w0,
                "W(tau)": wt,
                "W(tau)_sign": wt.signum(),
                "difference_quotient": slope,
            },
            "checks": checks,
        }),
    )?;
    Ok(Status::Ok)
}
