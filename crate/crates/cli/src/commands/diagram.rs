use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Deserialize;
use serde_json::json;
use wlab_core::diagram::{qc_classify, region_membership, CurvatureDiagram, PhiRegion};
use wlab_core::function::ScalarFunction;
use wlab_core::mesh::{cylinder_mesh, flat_grid_mesh, icosphere, mesh_diagram, parse_obj};
use wlab_core::relation::RelationSpec;

use crate::config::RunContext;
use crate::output::{write_file, write_summary, Check};
use crate::Status;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Samples {
    from: f64,
    to: f64,
    n: usize,
}

impl Samples {
    fn points(&self) -> Vec<f64> {
        let n = self.n.max(2);
        (0..n)
            .map(|i| self.from + (self.to - self.from) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum Source {
    /// Triangle mesh read from a Wavefront OBJ file.
    Obj { path: PathBuf },
    Icosphere { radius: f64, level: usize },
    Cylinder { radius: f64, height: f64, around: usize, along: usize },
    Flat { n: usize, h: f64 },
    /// `{(x, f(x))}` for a relation in `k2 = f(k1)` form.
    Relation { relation: RelationSpec, x: Samples },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Region {
    phi1: ScalarFunction,
    phi2: ScalarFunction,
    #[serde(default)]
    starred: bool,
    /// Lower bound for the ordering check; unbounded when absent.
    s0: Option<f64>,
    /// Abscissae for the ordering and monotonicity checks.
    #[serde(default)]
    validate_at: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Expected {
    k1: f64,
    k2: f64,
    /// Relative to `max(|k1|, |k2|, 1)`.
    rel_tol: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    source: Source,
    region: Option<Region>,
    expected: Option<Expected>,
}

pub fn run(ctx: &RunContext) -> Result<Status> {
    let cfg: Config = ctx.parse()?;
    let mut info = json!({});
    let mesh = match &cfg.source {
        Source::Obj { path } => {
            let path = ctx.resolve(path);
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let parsed = parse_obj(&text)?;
            info["obj_warnings"] = json!(parsed.warnings);
            Some(parsed.mesh)
        }
        Source::Icosphere { radius, level } => Some(icosphere(*radius, *level)),
        Source::Cylinder {
            radius,
            height,
            around,
            along,
        } => Some(cylinder_mesh(*radius, *height, *around, *along)),
        Source::Flat { n, h } => Some(flat_grid_mesh(*n, *h)),
        Source::Relation { .. } => None,
    };
    let diagram = match (&mesh, &cfg.source) {
        (Some(m), _) => {
            let md = mesh_diagram(m)?;
            info["vertices"] = json!(m.vertices.len());
            info["faces"] = json!(m.faces.len());
            info["skipped_boundary"] = json!(md.skipped_boundary);
            info["skipped_degenerate"] = json!(md.skipped_degenerate);
            md.diagram
        }
        (None, Source::Relation { relation, x }) => {
            let f = relation.f_function().context("relation has no explicit f")?;
            CurvatureDiagram::from_relation(&f, &x.points())
        }
        (None, _) => unreachable!("only relation sources lack a mesh"),
    };
    write_file(ctx, "diagram.csv", &diagram.to_csv())?;
    let qc = qc_classify(&diagram);
    let mut checks = vec![Check::holds(
        "quasiconformality",
        "gamma* = extremal (k1^2 + k2^2) / (2 k1 k2) over the diagram",
        qc.gamma_star.unwrap_or(f64::NAN),
        qc.gamma_star.is_some(),
    )];
    let mut status = Status::Ok;

    if let Some(e) = &cfg.expected {
        let scale = e.k1.abs().max(e.k2.abs()).max(1.0);
        let worst = diagram
            .samples
            .iter()
            .map(|p| (p.k1 - e.k1).abs().max((p.k2 - e.k2).abs()) / scale)
            .fold(0.0, f64::max);
        checks.push(Check::holds(
            "expected_curvatures",
            "sup max(|k1 - k1_exact|, |k2 - k2_exact|) / max(|k1_exact|, |k2_exact|, 1)",
            worst,
            worst <= e.rel_tol,
        ));
    }

    let mut membership = None;
    if let Some(r) = cfg.region {
        let region = PhiRegion {
            phi1: r.phi1,
            phi2: r.phi2,
            starred: r.starred,
        };
        region.validate(r.s0.unwrap_or(f64::NEG_INFINITY), &r.validate_at)?;
        let m = region_membership(&diagram, &region);
        checks.push(Check::holds(
            "region_membership",
            "phi1(x) <= y <= phi2(x) for every sample (x, y)",
            m.worst.as_ref().map_or(0.0, |o| o.violation),
            m.contained,
        ));
        if !m.contained {
            status = Status::CertificationFailure;
        }
        membership = Some(m);
    }

    info["samples"] = json!(diagram.samples.len());
    write_summary(
        ctx,
        json!({
            "source": diagram.source,
            "diagram": info,
            "qc": qc,
            "region": membership,
            "checks": checks,
        }),
    )?;
    Ok(status)
}
