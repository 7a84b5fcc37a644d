use anyhow::Result;
use serde::Deserialize;
use serde_json::json;
use wlab_core::patch::{DiskBoundary, GraphPatch, NodeKind};
use wlab_core::relation::RelationSpec;
use wlab_core::solver::{cmc_cap, harmonic_extension, newton_solve, NewtonOptions, SolveStatus};

use crate::config::RunContext;
use crate::output::{write_file, write_summary, Check};
use crate::Status;

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Disk { cx: f64, cy: f64, radius: f64 },
    Square { x0: f64, y0: f64, n: usize },
}

/// Dirichlet data.
#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryConfig {
    #[default]
    Zero,
    /// `u = a + b x + c y`
    Affine { a: f64, b: f64, c: f64 },
}

impl BoundaryConfig {
    fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            BoundaryConfig::Zero => 0.0,
            BoundaryConfig::Affine { a, b, c } => a + b * x + c * y,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    #[default]
    Zero,
    Harmonic,
    /// Interior values equal to the boundary function.
    Boundary,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub relation: RelationSpec,
    pub domain: DomainConfig,
    pub h: f64,
    #[serde(default)]
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub initial_guess: InitialGuess,
    #[serde(default)]
    pub disk_boundary: DiskBoundary,
    #[serde(default)]
    pub newton: NewtonOptions,
}

impl ProblemConfig {
    pub fn initial_patch(&self) -> Result<GraphPatch> {
        let data = |x: f64, y: f64| self.boundary.eval(x, y);
        let mut patch = match self.domain {
            DomainConfig::Disk { cx, cy, radius } => {
                GraphPatch::disk(cx, cy, radius, self.h, self.disk_boundary, data)?
            }
            DomainConfig::Square { x0, y0, n } => GraphPatch::square(n, x0, y0, self.h, data)?,
        };
        match self.initial_guess {
            InitialGuess::Zero => patch.set_interior(|_, _| 0.0),
            InitialGuess::Harmonic => patch = harmonic_extension(&patch)?,
            InitialGuess::Boundary => {}
        }
        Ok(patch)
    }
}

/// Checks against the closed-form spherical cap for CMC relations on disks
/// with zero data.
fn cap_checks(cfg: &ProblemConfig, patch: &GraphPatch) -> Option<(serde_json::Value, Vec<Check>)> {
    let (RelationSpec::Cmc { h0 }, DomainConfig::Disk { cx, cy, radius }, BoundaryConfig::Zero) =
        (&cfg.relation, cfg.domain, cfg.boundary)
    else {
        return None;
    };
    let exists = *h0 > 0.0 && radius < 1.0 / h0;
    let mut info = json!({
        "cap_exists": exists,
        "cap_existence_condition": "R < 1/H0",
    });
    let cap = cmc_cap(*h0, radius)?;
    let c = patch.grid.nearest(cx, cy);
    let exact_center = cap(0.0);
    let center = patch.value(c);
    let rel_err = ((center - exact_center) / exact_center).abs();
    let mut sup_err = 0.0_f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in patch.interior_nodes() {
        let (x, y) = patch.grid.xy(k);
        let u = patch.value(k);
        sup_err = sup_err.max((u - cap((x - cx).hypot(y - cy))).abs());
        lo = lo.min(u);
        hi = hi.max(u);
    }
    let h2 = cfg.h * cfg.h;
    info["center_value"] = json!(center);
    info["center_exact"] = json!(exact_center);
    info["sup_error"] = json!(sup_err);
    let checks = vec![
        Check::holds(
            "cap_center_relative_error",
            "u(0) = sqrt(1/H0^2 - R^2) - 1/H0",
            rel_err,
            rel_err <= 0.02,
        ),
        Check::holds(
            "cap_sup_error",
            "u(rho) = sqrt(1/H0^2 - R^2) - sqrt(1/H0^2 - rho^2)",
            sup_err,
            sup_err.is_finite(),
        ),
        Check::holds(
            "maximum_principle",
            "u(0)_cap - O(h^2) <= u <= 0",
            lo,
            lo >= exact_center - 10.0 * h2 && hi <= 10.0 * h2,
        ),
    ];
    Some((info, checks))
}

fn affine_check(cfg: &ProblemConfig, patch: &GraphPatch) -> Option<Check> {
    let BoundaryConfig::Affine { .. } = cfg.boundary else {
        return None;
    };
    if cfg.relation.g(0.0).ok()? != 0.0 {
        return None;
    }
    let err = patch
        .interior_nodes()
        .into_iter()
        .map(|k| {
            let (x, y) = patch.grid.xy(k);
            (patch.value(k) - cfg.boundary.eval(x, y)).abs()
        })
        .fold(0.0, f64::max);
    Some(Check::holds(
        "affine_solution",
        "planes solve relations with g(0) = 0",
        err,
        err <= 1e-8,
    ))
}

pub fn run(ctx: &RunContext) -> Result<Status> {
    let cfg: ProblemConfig = ctx.parse()?;
    let patch0 = cfg.initial_patch()?;
    let outcome = newton_solve(&cfg.relation, &patch0, &cfg.newton)?;
    let sol = &outcome.final_patch;
    write_file(ctx, "solution.csv", &sol.to_csv())?;
    write_file(ctx, "patch.json", &(serde_json::to_string_pretty(&sol.header())? + "\n"))?;
    let converged = outcome.status() == SolveStatus::Converged;
    let mut checks = vec![Check::holds(
        "residual",
        "sup over interior nodes of |H - g(H^2 - K)|",
        outcome.residual_sup(),
        converged,
    )];
    let mut body = json!({
        "summary": outcome.summary,
        "interior_nodes": sol.kinds().iter().filter(|k| **k == NodeKind::Interior).count(),
    });
    if converged {
        if let Some((info, c)) = cap_checks(&cfg, sol) {
            body["cap"] = info;
            checks.extend(c);
        }
        checks.extend(affine_check(&cfg, sol));
    } else if let DomainConfig::Disk { radius, .. } = cfg.domain {
        if let RelationSpec::Cmc { h0 } = cfg.relation {
            body["cap"] = json!({
                "cap_exists": h0 > 0.0 && radius < 1.0 / h0,
                "cap_existence_condition": "R < 1/H0",
            });
        }
    }
    body["checks"] = json!(checks);
    write_summary(ctx, body)?;
    Ok(if converged { Status::Ok } else { Status::NotConverged })
}
