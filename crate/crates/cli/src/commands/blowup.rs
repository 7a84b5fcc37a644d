use anyhow::{bail, Result};
use serde::Deserialize;
use serde_json::json;
use wlab_core::relation::{certify_ellipticity, umbilical_constant};
use wlab_core::solver::{
    blowup_select_with_field, h_field_brute_force, newton_solve, rescale_grid, rescale_patch, rescale_relation,
    second_fundamental_norm_field, SolveStatus,
};

use super::solve::ProblemConfig;
use crate::config::RunContext;
use crate::output::{write_file, write_summary, Check};
use crate::Status;

/// Gaussian bump added to the computed `|sigma|` field.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Spike {
    x: f64,
    y: f64,
    amplitude: f64,
    width: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    problem: ProblemConfig,
    center: (f64, f64),
    radius: f64,
    spike: Option<Spike>,
    /// Scale for the joint-rescaling invariance check.
    #[serde(default = "two")]
    rescale: f64,
}

fn two() -> f64 {
    2.0
}

pub fn run(ctx: &RunContext) -> Result<Status> {
    let cfg: Config = ctx.parse()?;
    let rel = &cfg.problem.relation;
    let outcome = newton_solve(rel, &cfg.problem.initial_patch()?, &cfg.problem.newton)?;
    if outcome.status() != SolveStatus::Converged {
        write_summary(ctx, json!({ "solve": outcome.summary }))?;
        return Ok(Status::NotConverged);
    }
    let patch = &outcome.final_patch;
    let mut sigma = second_fundamental_norm_field(patch);
    if let Some(s) = &cfg.spike {
        for (k, v) in sigma.iter_mut().enumerate() {
            if let Some(v) = v {
                let (x, y) = patch.grid.xy(k);
                let d2 = (x - s.x).powi(2) + (y - s.y).powi(2);
                *v += s.amplitude * (-d2 / (2.0 * s.width * s.width)).exp();
            }
        }
    }

    let sel = blowup_select_with_field(patch, &sigma, cfg.center, cfg.radius)?;
    let brute = h_field_brute_force(patch, &sigma, cfg.center, cfg.radius);
    let (brute_max, brute_arg) = brute
        .iter()
        .enumerate()
        .filter_map(|(k, v)| v.map(|v| (v, k)))
        .fold((f64::NEG_INFINITY, usize::MAX), |a, b| if b.0 > a.0 { b } else { a });
    let mut csv = String::from("x,y,sigma,h\n");
    for (k, h) in brute.iter().enumerate() {
        if let (Some(h), Some(s)) = (h, sigma[k]) {
            let (x, y) = patch.grid.xy(k);
            csv.push_str(&format!("{x},{y},{s},{h}\n"));
        }
    }
    write_file(ctx, "blowup.csv", &csv)?;

    let mut checks = vec![
        Check::close(
            "h_max_brute_force",
            "max_q |sigma(q)| d(q, boundary of D) against an exhaustive scan",
            sel.h_max,
            brute_max,
            1e-12 * brute_max.abs().max(1.0),
        ),
        Check::holds(
            "maximizer_brute_force",
            "selected node attains the exhaustive maximum",
            (sel.h_max - brute[patch.grid.index(sel.q_n.0, sel.q_n.1)].unwrap_or(f64::NAN)).abs(),
            sel.q_n == patch.grid.ij(brute_arg)
                || brute[patch.grid.index(sel.q_n.0, sel.q_n.1)] == Some(brute_max),
        ),
    ];

    // joint rescaling: coordinates by lambda, |sigma| by 1/lambda
    let lam = cfg.rescale;
    let scaled = rescale_patch(patch, lam)?;
    let scaled_sigma: Vec<Option<f64>> = sigma.iter().map(|v| v.map(|s| s / lam)).collect();
    let scaled_sel =
        blowup_select_with_field(&scaled, &scaled_sigma, (lam * cfg.center.0, lam * cfg.center.1), lam * cfg.radius)?;
    checks.push(Check::close(
        "h_rescaling_invariance",
        "h(lambda S) = h(S) under x -> lambda x, |sigma| -> |sigma| / lambda",
        scaled_sel.h_max,
        sel.h_max,
        1e-10 * sel.h_max.abs().max(1.0),
    ));

    if !(sel.lambda_n > 0.0) {
        bail!("selected point has |sigma| = 0; nothing to rescale");
    }
    let grid = rel.default_grid();
    let rescaled = rescale_relation(rel, sel.lambda_n)?;
    let before = certify_ellipticity(rel, &grid)?;
    let after = certify_ellipticity(&rescaled, &rescale_grid(&grid, sel.lambda_n))?;
    checks.push(Check::close(
        "ellipticity_constant_rescaling",
        "sup_t 4 t G'(t)^2 = sup_t 4 t g'(t)^2 for G(t) = g(lambda^2 t) / lambda",
        after.sup_4tgp2,
        before.sup_4tgp2,
        1e-10,
    ));
    let (alpha, alpha_n) = (umbilical_constant(rel), umbilical_constant(&rescaled));
    if let (Some(a), Some(an)) = (alpha, alpha_n) {
        checks.push(Check::close(
            "umbilical_constant_rescaling",
            "alpha_n = alpha / lambda_n",
            an,
            a / sel.lambda_n,
            1e-12 * a.abs().max(1.0),
        ));
    }

    write_summary(
        ctx,
        json!({
            "solve": outcome.summary,
            "selection": sel,
            "brute_force": { "h_max": brute_max, "q_n": patch.grid.ij(brute_arg) },
            "rescaled_relation": rescaled,
            "uniform_constant_Lambda": {
                "before": before.uniform_constant_lambda,
                "after": after.uniform_constant_lambda,
            },
            "umbilical_constant": { "before": alpha, "after": alpha_n },
            "checks": checks,
        }),
    )?;
    Ok(Status::Ok)
}
