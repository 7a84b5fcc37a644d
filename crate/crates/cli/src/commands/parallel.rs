use anyhow::{Context, Result};
use serde::Deserialize;
use serde_json::json;
use wlab_core::geometry::{
    conjugate_relation, discrete_profile_curvatures, offset_profile, parallel_curvatures, rotational_profile,
    CurvaturePair, ParallelParams, DEFAULT_STEP,
};
use wlab_core::relation::RelationSpec;

use crate::config::RunContext;
use crate::output::{write_file, write_summary, Check};
use crate::Status;

fn default_epsilon() -> f64 {
    1e-3
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Samples {
    from: f64,
    to: f64,
    n: usize,
}

/// A rotational profile whose offset is differentiated numerically.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileConfig {
    r0: f64,
    theta0: f64,
    #[serde(default = "default_step")]
    step: f64,
    s_max: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    relation: RelationSpec,
    a: f64,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    /// Abscissae `x` for the pairs `(x, f(x))` that are offset and tested
    /// against the conjugated relation.
    x: Samples,
    profile: Option<ProfileConfig>,
}

/// `|k2 - f(k1)|` or `|k1 - f(k2)|`, whichever argument lies in the domain.
fn relation_gap(f: &wlab_core::function::ScalarFunction, p: &CurvaturePair) -> Option<f64> {
    let a = f.eval(p.k1).ok().map(|v| (v - p.k2).abs());
    let b = f.eval(p.k2).ok().map(|v| (v - p.k1).abs());
    match (a, b) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

pub fn run(ctx: &RunContext) -> Result<Status> {
    let cfg: Config = ctx.parse()?;
    let params = ParallelParams {
        a: cfg.a,
        epsilon: cfg.epsilon,
    };
    let conj = conjugate_relation(&cfg.relation, cfg.a)?;
    let back = conjugate_relation(&conj, -cfg.a)?;
    let f = cfg.relation.f_function().context("relation has no explicit f")?;
    let f_conj = conj.f_function().context("conjugated relation has no explicit f")?;
    let f_back = back.f_function().context("composite relation has no explicit f")?;

    let n = cfg.x.n.max(2);
    let xs: Vec<f64> = (0..n)
        .map(|i| cfg.x.from + (cfg.x.to - cfg.x.from) * i as f64 / (n - 1) as f64)
        .collect();
    let mut csv = String::from("x,f_x,k1_parallel,k2_parallel,stretch1,stretch2\n");
    let (mut roundtrip, mut conj_gap) = (0.0_f64, 0.0_f64);
    let (mut used, mut rejected) = (0usize, 0usize);
    for &x in &xs {
        let Ok(y) = f.eval(x) else { continue };
        if let Ok(yb) = f_back.eval(x) {
            roundtrip = roundtrip.max((y - yb).abs());
        }
        let pair = CurvaturePair::new(x, y);
        if !params.admits(&pair) {
            rejected += 1;
            continue;
        }
        let par = parallel_curvatures(&pair, cfg.a)?;
        if let Some(g) = relation_gap(&f_conj, &par.pair) {
            conj_gap = conj_gap.max(g);
            used += 1;
        }
        csv.push_str(&format!(
            "{x},{y},{},{},{},{}\n",
            par.pair.k1, par.pair.k2, par.metric_factors.0, par.metric_factors.1
        ));
    }
    write_file(ctx, "parallel.csv", &csv)?;

    let mut checks = vec![
        Check::holds(
            "conjugation_roundtrip",
            "sup |F_-a . (F_a . f . F_-a) . F_a - f|",
            roundtrip,
            roundtrip <= 1e-10,
        ),
        Check::holds(
            "offset_satisfies_conjugate",
            "parallel pairs (F_a(k1), F_a(k2)) satisfy F_a . f . F_-a",
            conj_gap,
            used > 0 && conj_gap <= 1e-10,
        ),
    ];

    let mut profile_info = None;
    if let Some(p) = &cfg.profile {
        let prof = rotational_profile(&cfg.relation, (p.r0, 0.0, p.theta0), p.step, p.s_max)?;
        let pts = offset_profile(&prof, cfg.a);
        let fd = discrete_profile_curvatures(&pts, prof.step);
        let mut err = 0.0_f64;
        let mut compared = 0usize;
        for (s, d) in prof.samples.iter().zip(&fd) {
            let Some((km, kp)) = *d else { continue };
            let base = CurvaturePair {
                k1: s.kappa_m,
                k2: s.kappa_p,
            };
            let (m, q) = (
                wlab_core::geometry::f_a(base.k1, cfg.a)?,
                wlab_core::geometry::f_a(base.k2, cfg.a)?,
            );
            err = err.max((km - m).abs()).max((kp - q).abs());
            compared += 1;
        }
        checks.push(Check::holds(
            "geometric_offset",
            "curvatures of X + a N equal k_i / (1 - a k_i)",
            err,
            compared > 0 && err <= 1e-6,
        ));
        profile_info = Some(json!({
            "samples": prof.samples.len(),
            "compared": compared,
            "truncation": prof.truncation,
        }));
    }

    write_summary(
        ctx,
        json!({
            "t0": params.t0(),
            "conjugated_relation": conj,
            "pairs_offset": used,
            "pairs_rejected": rejected,
            "profile": profile_info,
            "checks": checks,
        }),
    )?;
    Ok(Status::Ok)
}
