//! Damped Newton solver for the Dirichlet problem `H = g(H^2 - K)` on a
//! [`GraphPatch`], and the blow-up bookkeeping built on top of it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{Expr, ScalarFunction};
use crate::jets::{curvatures_of_jet, residual_gradient_analytic, weingarten_residual, Jet2};
use crate::patch::{GraphPatch, NodeKind};
use crate::relation::{RelationSpec, TGrid};

/// Residual at every interior node, `None` elsewhere.
pub fn residual_field(rel: &RelationSpec, patch: &GraphPatch) -> Result<Vec<Option<f64>>> {
    (0..patch.grid.len())
        .into_par_iter()
        .map(|k| {
            if patch.kind(k) != NodeKind::Interior {
                return Ok(None);
            }
            let (i, j) = patch.grid.ij(k);
            weingarten_residual(rel, &patch.jet_at(k))
                .map(Some)
                .map_err(|e| e.at_node(i, j))
        })
        .collect()
}

/// `|sigma| = sqrt(k1^2 + k2^2) = sqrt(4 H^2 - 2 K)` at interior nodes.
pub fn second_fundamental_norm_field(patch: &GraphPatch) -> Vec<Option<f64>> {
    (0..patch.grid.len())
        .map(|k| {
            (patch.kind(k) == NodeKind::Interior).then(|| {
                let (h, kk) = curvatures_of_jet(&patch.jet_at(k));
                (4.0 * h * h - 2.0 * kk).max(0.0).sqrt()
            })
        })
        .collect()
}

pub fn sup_norm(field: &[Option<f64>]) -> f64 {
    field.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    Diverged,
    MaxIterations,
    LineSearchFailure,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonOptions {
    pub tol_res: f64,
    pub max_iter: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo_c: f64,
    pub min_step: f64,
    /// Accepted steps of consecutive residual growth that count as divergence.
    pub growth_limit: usize,
    pub slope_limit: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol_res: 1e-10,
            max_iter: 50,
            armijo_c: 1e-4,
            min_step: 2f64.powi(-20),
            growth_limit: 5,
            slope_limit: 1e6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub status: SolveStatus,
    pub residual_sup: f64,
    pub iterations: usize,
    /// Sup residual before each iteration and after the last.
    pub history: Vec<f64>,
    pub step_lengths: Vec<f64>,
    pub max_slope: f64,
    /// Largest slope among nodes next to the boundary.
    pub boundary_slope: f64,
    pub message: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub summary: SolveSummary,
    pub final_patch: GraphPatch,
}

impl SolveOutcome {
    pub fn status(&self) -> SolveStatus {
        self.summary.status
    }

    pub fn residual_sup(&self) -> f64 {
        self.summary.residual_sup
    }

    pub fn iterations(&self) -> usize {
        self.summary.iterations
    }
}

/// Raw residuals `H - g` over `nodes` together with the scaled residuals
/// `2 W^{3/2} (H - g)` that Newton iterates on.
fn residual_vectors(
    rel: &RelationSpec,
    patch: &GraphPatch,
    nodes: &[usize],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let pairs: Vec<(f64, f64)> = nodes
        .par_iter()
        .map(|&k| {
            let (i, j) = patch.grid.ij(k);
            let jet = patch.jet_at(k);
            let r = weingarten_residual(rel, &jet).map_err(|e| e.at_node(i, j))?;
            Ok((r, r * scale_factor(&jet).0))
        })
        .collect::<Result<_>>()?;
    Ok(pairs.into_iter().unzip())
}

/// `2 W^{3/2}` and its derivatives in `p` and `q`.
fn scale_factor(j: &Jet2) -> (f64, f64, f64) {
    let w = 1.0 + j.p * j.p + j.q * j.q;
    let root = w.sqrt();
    (2.0 * w * root, 6.0 * root * j.p, 6.0 * root * j.q)
}

fn slopes(patch: &GraphPatch, nodes: &[usize]) -> (f64, f64) {
    let mut all = 0.0_f64;
    let mut edge = 0.0_f64;
    for &k in nodes {
        let j = patch.jet_at(k);
        let s = j.p.hypot(j.q);
        all = all.max(s);
        if patch
            .grid
            .neighbours(k)
            .any(|m| patch.kind(m) == NodeKind::Boundary)
        {
            edge = edge.max(s);
        }
    }
    (all, edge)
}

/// Derivative of the jet in `(p, q, r, s, t)` order with respect to the value
/// at each stencil offset `(di, dj)`.
fn stencil_weights(h: f64) -> [((i64, i64), [f64; 5]); 9] {
    let a = 1.0 / (2.0 * h);
    let b = 1.0 / (h * h);
    let c = 1.0 / (4.0 * h * h);
    [
        ((0, 0), [0.0, 0.0, -2.0 * b, 0.0, -2.0 * b]),
        ((1, 0), [a, 0.0, b, 0.0, 0.0]),
        ((-1, 0), [-a, 0.0, b, 0.0, 0.0]),
        ((0, 1), [0.0, a, 0.0, 0.0, b]),
        ((0, -1), [0.0, -a, 0.0, 0.0, b]),
        ((1, 1), [0.0, 0.0, 0.0, c, 0.0]),
        ((-1, 1), [0.0, 0.0, 0.0, -c, 0.0]),
        ((1, -1), [0.0, 0.0, 0.0, -c, 0.0]),
        ((-1, -1), [0.0, 0.0, 0.0, c, 0.0]),
    ]
}

/// Jacobian of the scaled residual as `(row, col, value)` with ghost boundary values expanded
/// through their extrapolation weights.
fn jacobian_triplets(
    rel: &RelationSpec,
    patch: &GraphPatch,
    nodes: &[usize],
    unknown: &[Option<usize>],
) -> Result<Vec<Triplet<usize, usize, f64>>> {
    let weights = stencil_weights(patch.grid.h);
    let nx = patch.grid.nx as i64;
    let rows: Vec<Vec<Triplet<usize, usize, f64>>> = nodes
        .par_iter()
        .enumerate()
        .map(|(row, &k)| {
            let (i, j) = patch.grid.ij(k);
            let jet = patch.jet_at(k);
            let mut grad = residual_gradient_analytic(rel, &jet).map_err(|e| e.at_node(i, j))?;
            let r = weingarten_residual(rel, &jet).map_err(|e| e.at_node(i, j))?;
            let (sc, sp, sq) = scale_factor(&jet);
            for g in grad.iter_mut() {
                *g *= sc;
            }
            grad[0] += r * sp;
            grad[1] += r * sq;
            let mut out = Vec::with_capacity(16);
            for &((di, dj), w) in &weights {
                let d: f64 = (0..5).map(|c| grad[c] * w[c]).sum();
                if d == 0.0 {
                    continue;
                }
                let m = (k as i64 + dj * nx + di) as usize;
                if let Some(col) = unknown[m] {
                    out.push(Triplet::new(row, col, d));
                } else if let Some(gh) = patch.ghost(m) {
                    for &(src, wt) in &gh.stencil {
                        let col = unknown[src].expect("ghost stencil is interior");
                        out.push(Triplet::new(row, col, -d * gh.ratio * wt));
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton iteration on the interior values of `patch0`.
pub fn newton_solve(
    rel: &RelationSpec,
    patch0: &GraphPatch,
    opts: &NewtonOptions,
) -> Result<SolveOutcome> {
    rel.validate()?;
    let mut patch = patch0.clone();
    patch.refresh_ghosts();
    let nodes = patch.interior_nodes();
    if nodes.is_empty() {
        return Err(Error::Invalid("patch has no interior nodes".into()));
    }
    let mut unknown = vec![None; patch.grid.len()];
    for (c, &k) in nodes.iter().enumerate() {
        unknown[k] = Some(c);
    }
    let n = nodes.len();
    let mut u: Vec<f64> = nodes.iter().map(|&k| patch.value(k)).collect();
    let (raw, mut res) = residual_vectors(rel, &patch, &nodes)?;
    let mut history = vec![sup(&raw)];
    let mut step_lengths = Vec::new();
    let mut growth = 0usize;
    let mut iterations = 0usize;

    let finish = |status: SolveStatus,
                  patch: GraphPatch,
                  history: Vec<f64>,
                  step_lengths: Vec<f64>,
                  iterations: usize,
                  message: Option<String>| {
        let (max_slope, boundary_slope) = slopes(&patch, &nodes);
        SolveOutcome {
            summary: SolveSummary {
                status,
                residual_sup: *history.last().expect("non-empty"),
                iterations,
                history,
                step_lengths,
                max_slope,
                boundary_slope,
                message,
            },
            final_patch: patch,
        }
    };

    loop {
        let current = *history.last().expect("non-empty");
        if current <= opts.tol_res {
            return Ok(finish(SolveStatus::Converged, patch, history, step_lengths, iterations, None));
        }
        if iterations >= opts.max_iter {
            return Ok(finish(
                SolveStatus::MaxIterations,
                patch,
                history,
                step_lengths,
                iterations,
                None,
            ));
        }
        iterations += 1;

        let trips = jacobian_triplets(rel, &patch, &nodes, &unknown)?;
        let jac = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trips)
            .map_err(|e| Error::Invalid(format!("jacobian assembly: {e:?}")))?;
        let delta = match jac.sp_lu() {
            Ok(lu) => {
                let rhs = Col::<f64>::from_fn(n, |c| -res[c]);
                let sol = lu.solve(&rhs);
                let v: Vec<f64> = (0..n).map(|c| sol[c]).collect();
                if v.iter().all(|x| x.is_finite()) {
                    Some(v)
                } else {
                    None
                }
            }
            Err(_) => None,
        };
        let Some(delta) = delta else {
            return Ok(finish(
                SolveStatus::Diverged,
                patch,
                history,
                step_lengths,
                iterations,
                Some("singular linearization".into()),
            ));
        };

        let phi0 = 0.5 * sq_norm(&res);
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha >= opts.min_step {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + alpha * d).collect();
            let mut tp = patch.clone();
            tp.set_interior_values(&nodes, &trial);
            if let Ok((raw, r)) = residual_vectors(rel, &tp, &nodes) {
                // the directional derivative of phi along delta is -2 phi0
                if 0.5 * sq_norm(&r) <= (1.0 - 2.0 * opts.armijo_c * alpha) * phi0 {
                    accepted = Some((trial, tp, raw, r));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((trial, tp, raw, r)) = accepted else {
            return Ok(finish(
                SolveStatus::LineSearchFailure,
                patch,
                history,
                step_lengths,
                iterations,
                Some(format!("no sufficient decrease down to step {}", opts.min_step)),
            ));
        };
        u = trial;
        patch = tp;
        res = r;
        step_lengths.push(alpha);
        let s = sup(&raw);
        growth = if s > current { growth + 1 } else { 0 };
        history.push(s);
        let (max_slope, _) = slopes(&patch, &nodes);
        if growth >= opts.growth_limit || max_slope > opts.slope_limit {
            let why = if growth >= opts.growth_limit {
                format!("sup residual grew over {growth} consecutive steps")
            } else {
                format!("slope {max_slope:e} exceeds {:e}", opts.slope_limit)
            };
            return Ok(finish(SolveStatus::Diverged, patch, history, step_lengths, iterations, Some(why)));
        }
    }
}

/// Discrete harmonic function with the patch's boundary data, a cheap
/// starting guess for Newton.
pub fn harmonic_extension(patch: &GraphPatch) -> Result<GraphPatch> {
    let mut out = patch.clone();
    let nodes = out.interior_nodes();
    let n = nodes.len();
    if n == 0 {
        return Ok(out);
    }
    let mut unknown = vec![None; out.grid.len()];
    for (c, &k) in nodes.iter().enumerate() {
        unknown[k] = Some(c);
    }
    // zero interior values make the ghost values equal their constant part
    out.set_interior_values(&nodes, &vec![0.0; n]);
    let nx = out.grid.nx as i64;
    let mut trips = Vec::with_capacity(5 * n);
    let mut rhs = vec![0.0; n];
    for (row, &k) in nodes.iter().enumerate() {
        trips.push(Triplet::new(row, row, -4.0));
        for (di, dj) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
            let m = (k as i64 + dj * nx + di) as usize;
            if let Some(col) = unknown[m] {
                trips.push(Triplet::new(row, col, 1.0));
            } else {
                rhs[row] -= out.value(m);
                if let Some(gh) = out.ghost(m) {
                    for &(src, wt) in &gh.stencil {
                        let col = unknown[src].expect("ghost stencil is interior");
                        trips.push(Triplet::new(row, col, -gh.ratio * wt));
                    }
                }
            }
        }
    }
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trips)
        .map_err(|e| Error::Invalid(format!("laplacian assembly: {e:?}")))?;
    let lu = mat
        .sp_lu()
        .map_err(|e| Error::Invalid(format!("laplacian factorization: {e:?}")))?;
    let sol = lu.solve(&Col::<f64>::from_fn(n, |c| rhs[c]));
    let u: Vec<f64> = (0..n).map(|c| sol[c]).collect();
    out.set_interior_values(&nodes, &u);
    Ok(out)
}

/// Relation satisfied by `lambda * u` when `u` satisfies `rel`:
/// `G(t) = g(lambda^2 t) / lambda`.
pub fn rescale_relation(rel: &RelationSpec, lambda: f64) -> Result<RelationSpec> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Invalid(format!("lambda = {lambda} must be positive")));
    }
    Ok(match rel {
        RelationSpec::Cmc { h0 } => RelationSpec::Cmc { h0: h0 / lambda },
        RelationSpec::Linear { alpha, beta, delta } => RelationSpec::Linear {
            alpha: *alpha,
            beta: beta * lambda,
            delta: delta / lambda,
        },
        RelationSpec::G { g } => RelationSpec::G {
            g: ScalarFunction::closed(
                Expr::Scaled {
                    inner: Box::new(g.clone()),
                    input_scale: lambda * lambda,
                    output_scale: 1.0 / lambda,
                },
                g.domain.scaled(1.0 / (lambda * lambda)),
            ),
        },
        // curvatures scale by 1/lambda, so f becomes f(lambda x) / lambda
        RelationSpec::F { f } => RelationSpec::F {
            f: ScalarFunction::closed(
                Expr::Scaled {
                    inner: Box::new(f.clone()),
                    input_scale: lambda,
                    output_scale: 1.0 / lambda,
                },
                f.domain.scaled(1.0 / lambda),
            ),
        },
    })
}

/// The certification grid matching [`rescale_relation`].
pub fn rescale_grid(grid: &TGrid, lambda: f64) -> TGrid {
    grid.scaled(1.0 / (lambda * lambda))
}

/// `lambda * u(x / lambda)`: coordinates and values scaled together.
pub fn rescale_patch(patch: &GraphPatch, lambda: f64) -> Result<GraphPatch> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Invalid(format!("lambda = {lambda} must be positive")));
    }
    Ok(patch.scaled(lambda))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupSelection {
    /// Grid indices `(i, j)` of the selected node.
    pub q_n: (usize, usize),
    pub x: f64,
    pub y: f64,
    /// `|sigma|` at the node.
    pub lambda_n: f64,
    /// Intrinsic distance from the node to the disk boundary.
    pub r_n: f64,
    pub h_max: f64,
    pub disk_nodes: usize,
}

#[derive(PartialEq)]
struct Visit(f64, usize);

impl Eq for Visit {}

impl Ord for Visit {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Visit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Length of the graph edge between neighbouring nodes `a` and `b`.
pub fn edge_length(patch: &GraphPatch, a: usize, b: usize) -> f64 {
    let (xa, ya) = patch.grid.xy(a);
    let (xb, yb) = patch.grid.xy(b);
    let du = patch.value(a) - patch.value(b);
    ((xa - xb).powi(2) + (ya - yb).powi(2) + du * du).sqrt()
}

/// Shortest-path distances on the 8-neighbour graph restricted to `allowed`.
pub fn graph_distances(patch: &GraphPatch, sources: &[usize], allowed: &[bool]) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; patch.grid.len()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0.0;
        heap.push(Visit(0.0, s));
    }
    while let Some(Visit(d, k)) = heap.pop() {
        if d > dist[k] {
            continue;
        }
        for m in patch.grid.neighbours(k) {
            if !allowed[m] {
                continue;
            }
            let nd = d + edge_length(patch, k, m);
            if nd < dist[m] {
                dist[m] = nd;
                heap.push(Visit(nd, m));
            }
        }
    }
    dist
}

/// Maximizes `h(q) = |sigma(q)| d(q, boundary of D)` over the intrinsic disk
/// `D` of `radius` around the node nearest `center`, using the patch's own
/// `|sigma|`.
pub fn blowup_select(patch: &GraphPatch, center: (f64, f64), radius: f64) -> Result<BlowupSelection> {
    let sigma = second_fundamental_norm_field(patch);
    blowup_select_with_field(patch, &sigma, center, radius)
}

/// As [`blowup_select`] with a supplied `|sigma|` field (`None` marks nodes
/// outside the usable region).
pub fn blowup_select_with_field(
    patch: &GraphPatch,
    sigma: &[Option<f64>],
    center: (f64, f64),
    radius: f64,
) -> Result<BlowupSelection> {
    if sigma.len() != patch.grid.len() {
        return Err(Error::Invalid("sigma field does not match the grid".into()));
    }
    let c = patch.grid.nearest(center.0, center.1);
    let usable: Vec<bool> = sigma.iter().map(Option::is_some).collect();
    if !usable[c] || !(radius > 0.0) {
        return Err(Error::Invalid("blow-up disk is empty".into()));
    }
    let from_center = graph_distances(patch, &[c], &usable);
    let in_disk: Vec<bool> = from_center.iter().map(|&d| d <= radius).collect();
    let disk: Vec<usize> = (0..in_disk.len()).filter(|&k| in_disk[k]).collect();
    // boundary nodes of D: members with a neighbour outside D, or on the
    // grid edge
    let edge: Vec<usize> = disk
        .iter()
        .copied()
        .filter(|&k| patch.grid.neighbours(k).count() < 8 || patch.grid.neighbours(k).any(|m| !in_disk[m]))
        .collect();
    if edge.is_empty() {
        return Err(Error::Invalid("blow-up disk has no boundary".into()));
    }
    let to_edge = graph_distances(patch, &edge, &in_disk);
    let mut best: Option<(f64, usize)> = None;
    for &k in &disk {
        let h = sigma[k].expect("usable") * to_edge[k];
        if best.is_none_or(|(b, _)| h > b) {
            best = Some((h, k));
        }
    }
    let (h_max, mut q) = best.expect("disk is nonempty");
    if h_max == 0.0 {
        q = c;
    }
    let (x, y) = patch.grid.xy(q);
    Ok(BlowupSelection {
        q_n: patch.grid.ij(q),
        x,
        y,
        lambda_n: sigma[q].expect("usable"),
        r_n: to_edge[q],
        h_max,
        disk_nodes: disk.len(),
    })
}

/// `h(q)` at every node of the intrinsic disk by brute force: one
/// single-source search per boundary node.
#[doc(hidden)]
pub fn h_field_brute_force(
    patch: &GraphPatch,
    sigma: &[Option<f64>],
    center: (f64, f64),
    radius: f64,
) -> Vec<Option<f64>> {
    let c = patch.grid.nearest(center.0, center.1);
    let usable: Vec<bool> = sigma.iter().map(Option::is_some).collect();
    let from_center = graph_distances(patch, &[c], &usable);
    let in_disk: Vec<bool> = from_center.iter().map(|&d| d <= radius).collect();
    let mut best = vec![f64::INFINITY; in_disk.len()];
    for e in 0..in_disk.len() {
        if !in_disk[e] {
            continue;
        }
        let on_edge = patch.grid.neighbours(e).count() < 8 || patch.grid.neighbours(e).any(|m| !in_disk[m]);
        if !on_edge {
            continue;
        }
        let d = graph_distances(patch, &[e], &in_disk);
        for k in 0..d.len() {
            best[k] = best[k].min(d[k]);
        }
    }
    (0..in_disk.len())
        .map(|k| in_disk[k].then(|| sigma[k].expect("usable") * best[k]))
        .collect()
}

/// Closed-form spherical cap over a disk of radius `r` with `H = h0 > 0`
/// (upward normal) and zero boundary values.
pub fn cmc_cap(h0: f64, r: f64) -> Option<impl Fn(f64) -> f64> {
    let rs = 1.0 / h0;
    (h0 > 0.0 && r < rs).then(move || {
        let top = (rs * rs - r * r).sqrt();
        move |rho: f64| top - (rs * rs - rho * rho).sqrt()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patch::DiskBoundary;
    use crate::relation::{certify_ellipticity, umbilical_constant};
    use approx::assert_relative_eq;

    #[test]
    fn affine_patch_is_minimal() {
        let p = GraphPatch::square(11, 0.0, 0.0, 0.1, |x, y| 1.0 + 2.0 * x - 0.5 * y).unwrap();
        let r = residual_field(&RelationSpec::minimal(), &p).unwrap();
        assert!(sup_norm(&r) < 1e-12);
        let r = residual_field(&RelationSpec::Cmc { h0: 1.0 }, &GraphPatch::square(5, 0.0, 0.0, 0.1, |_, _| 0.0).unwrap())
            .unwrap();
        assert!(r.iter().flatten().all(|&v| v == -1.0));
    }

    #[test]
    fn minimal_solve_recovers_affine_data() {
        let f = |x: f64, y: f64| 0.2 - x + 0.3 * y;
        let mut p = GraphPatch::square(17, -1.0, -1.0, 0.125, f).unwrap();
        p.set_interior(|_, _| 0.0);
        let out = newton_solve(&RelationSpec::minimal(), &p, &NewtonOptions::default()).unwrap();
        assert_eq!(out.status(), SolveStatus::Converged, "{:?}", out.summary);
        assert!(out.iterations() <= 8, "{:?}", out.summary);
        for k in out.final_patch.interior_nodes() {
            let (x, y) = out.final_patch.grid.xy(k);
            assert!((out.final_patch.value(k) - f(x, y)).abs() < 1e-10);
        }
    }

    #[test]
    fn harmonic_start_for_affine_data_is_exact() {
        let f = |x: f64, y: f64| 0.2 - x + 0.3 * y;
        let mut p = GraphPatch::disk(0.0, 0.0, 1.0, 0.1, DiskBoundary::Extrapolated, f).unwrap();
        p.set_interior(|_, _| 0.0);
        let q = harmonic_extension(&p).unwrap();
        for k in q.interior_nodes() {
            let (x, y) = q.grid.xy(k);
            assert!((q.value(k) - f(x, y)).abs() < 1e-12);
        }
        let out = newton_solve(&RelationSpec::minimal(), &q, &NewtonOptions::default()).unwrap();
        assert_eq!(out.status(), SolveStatus::Converged);
        assert!(out.iterations() <= 1);
    }

    #[test]
    fn cap_residual_is_second_order() {
        let cap = cmc_cap(0.5, 1.0).unwrap();
        let mut errs = Vec::new();
        for h in [0.1f64, 0.05, 0.025] {
            let n = (1.6 / h).round() as usize + 1;
            let p = GraphPatch::square(n, -0.8, -0.8, h, |x, y| cap(x.hypot(y))).unwrap();
            errs.push(sup_norm(&residual_field(&RelationSpec::Cmc { h0: 0.5 }, &p).unwrap()));
        }
        assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5, "{errs:?}");
    }

    #[test]
    fn small_cap_solve() {
        let p = GraphPatch::disk(0.0, 0.0, 1.0, 1.0 / 16.0, DiskBoundary::Extrapolated, |_, _| 0.0).unwrap();
        let out = newton_solve(&RelationSpec::Cmc { h0: 0.5 }, &p, &NewtonOptions::default()).unwrap();
        assert_eq!(out.status(), SolveStatus::Converged);
        let c = out.final_patch.grid.nearest(0.0, 0.0);
        let exact = 3f64.sqrt() - 2.0;
        assert!((out.final_patch.value(c) - exact).abs() < 5e-3);
        for k in out.final_patch.interior_nodes() {
            assert!(out.final_patch.value(k) <= 1e-12);
        }
    }

    #[test]
    fn sigma_of_sphere_and_cylinder() {
        let p = GraphPatch::square(41, -0.5, -0.5, 0.025, |x, y| 1.0 - (1.0 - x * x - y * y).sqrt()).unwrap();
        let s = second_fundamental_norm_field(&p);
        let c = p.grid.nearest(0.0, 0.0);
        assert!((s[c].unwrap() - 2f64.sqrt()).abs() < 1e-3);
        let p = GraphPatch::square(41, -0.5, -0.5, 0.025, |x, _| 1.0 - (1.0 - x * x).sqrt()).unwrap();
        let s = second_fundamental_norm_field(&p);
        assert!((s[c].unwrap() - 1.0).abs() < 1e-3);
        let p = GraphPatch::square(9, 0.0, 0.0, 0.1, |_, _| 0.0).unwrap();
        assert_eq!(sup_norm(&second_fundamental_norm_field(&p)), 0.0);
    }

    #[test]
    fn jacobian_matches_differences() {
        let rel = RelationSpec::Linear {
            alpha: 1.0,
            beta: 0.5,
            delta: 1.0,
        };
        for mut p in [
            GraphPatch::square(7, -0.3, -0.3, 0.1, |x, y| 0.2 * x - 0.4 * y).unwrap(),
            GraphPatch::disk(0.0, 0.0, 0.5, 0.1, DiskBoundary::Extrapolated, |x, _| 0.3 * x).unwrap(),
        ] {
            p.set_interior(|x, y| 0.5 * x * x + 0.3 * x * y * y - 0.2 * y);
            let nodes = p.interior_nodes();
            let mut unknown = vec![None; p.grid.len()];
            for (c, &k) in nodes.iter().enumerate() {
                unknown[k] = Some(c);
            }
            let trips = jacobian_triplets(&rel, &p, &nodes, &unknown).unwrap();
            let n = nodes.len();
            let mut dense = vec![vec![0.0; n]; n];
            for t in &trips {
                dense[t.row][t.col] += t.val;
            }
            let u: Vec<f64> = nodes.iter().map(|&k| p.value(k)).collect();
            for c in 0..n {
                let eps = 1e-6;
                let mut up = u.clone();
                up[c] += eps;
                let mut dn = u.clone();
                dn[c] -= eps;
                let mut pp = p.clone();
                pp.set_interior_values(&nodes, &up);
                let rp = residual_vectors(&rel, &pp, &nodes).unwrap().1;
                pp.set_interior_values(&nodes, &dn);
                let rm = residual_vectors(&rel, &pp, &nodes).unwrap().1;
                for r in 0..n {
                    let fd = (rp[r] - rm[r]) / (2.0 * eps);
                    assert!((fd - dense[r][c]).abs() < 1e-4 * (1.0 + fd.abs()), "({r}, {c}): {fd} vs {}", dense[r][c]);
                }
            }
        }
    }

    #[test]
    fn blowup_on_plane_returns_center() {
        let p = GraphPatch::square(21, -1.0, -1.0, 0.1, |_, _| 0.0).unwrap();
        let sel = blowup_select(&p, (0.0, 0.0), 0.55).unwrap();
        assert_eq!(sel.h_max, 0.0);
        assert_eq!(sel.q_n, (10, 10));
    }

    #[test]
    fn blowup_on_constant_sigma_picks_center() {
        let p = GraphPatch::square(21, -1.0, -1.0, 0.1, |_, _| 0.0).unwrap();
        let sigma: Vec<Option<f64>> = (0..p.grid.len())
            .map(|k| (p.kind(k) == NodeKind::Interior).then_some(2.0))
            .collect();
        let sel = blowup_select_with_field(&p, &sigma, (0.0, 0.0), 0.55).unwrap();
        assert_eq!(sel.q_n, (10, 10));
        assert_relative_eq!(sel.lambda_n * sel.r_n, sel.h_max, max_relative = 1e-15);
    }

    #[test]
    fn blowup_matches_brute_force_with_spike() {
        let p = GraphPatch::square(31, -1.5, -1.5, 0.1, |x, y| 0.1 * x * y).unwrap();
        let spike = p.grid.index(18, 13);
        let sigma: Vec<Option<f64>> = (0..p.grid.len())
            .map(|k| {
                (p.kind(k) == NodeKind::Interior).then(|| {
                    let (x, y) = p.grid.xy(k);
                    let (sx, sy) = p.grid.xy(spike);
                    1.0 + 5.0 * (-((x - sx).powi(2) + (y - sy).powi(2)) / 0.02).exp()
                })
            })
            .collect();
        let sel = blowup_select_with_field(&p, &sigma, (0.0, 0.0), 1.0).unwrap();
        let brute = h_field_brute_force(&p, &sigma, (0.0, 0.0), 1.0);
        let (mut bk, mut bh) = (usize::MAX, f64::NEG_INFINITY);
        for (k, h) in brute.iter().enumerate() {
            if let Some(h) = *h {
                if h > bh {
                    bh = h;
                    bk = k;
                }
            }
        }
        assert_eq!(sel.q_n, p.grid.ij(bk));
        assert_relative_eq!(sel.h_max, bh, max_relative = 1e-14);
        assert_eq!(sel.q_n, (18, 13));
    }

    #[test]
    fn rescaling_scales_residual_and_sigma() {
        let rel = RelationSpec::Linear {
            alpha: 1.0,
            beta: 0.4,
            delta: 1.2,
        };
        let p = GraphPatch::square(15, -0.4, -0.4, 0.05, |x, y| 0.3 * x * x + 0.2 * x * y - 0.1 * y * y).unwrap();
        for &lambda in &[0.5, 1.0, 3.0] {
            let q = rescale_patch(&p, lambda).unwrap();
            let r0 = residual_field(&rel, &p).unwrap();
            let r1 = residual_field(&rescale_relation(&rel, lambda).unwrap(), &q).unwrap();
            for (a, b) in r0.iter().zip(&r1) {
                if let (Some(a), Some(b)) = (a, b) {
                    assert!((b - a / lambda).abs() < 1e-12 * (1.0 + a.abs()));
                }
            }
            let s0 = second_fundamental_norm_field(&p);
            let s1 = second_fundamental_norm_field(&q);
            for (a, b) in s0.iter().zip(&s1) {
                if let (Some(a), Some(b)) = (a, b) {
                    assert!((b - a / lambda).abs() < 1e-12 * (1.0 + a));
                }
            }
        }
    }

    #[test]
    fn rescaled_relations() {
        assert_eq!(
            rescale_relation(&RelationSpec::Cmc { h0: 2.0 }, 4.0).unwrap(),
            RelationSpec::Cmc { h0: 0.5 }
        );
        let g = RelationSpec::G {
            g: ScalarFunction::closed(
                Expr::SqrtAffine {
                    scale: 0.5,
                    a: 1.0,
                    b: 1.0,
                    offset: 0.1,
                },
                crate::function::Interval::HALF_LINE,
            ),
        };
        let lambda = 2.5;
        let r = rescale_relation(&g, lambda).unwrap();
        let grid = TGrid::default();
        let a = certify_ellipticity(&g, &grid).unwrap();
        let b = certify_ellipticity(&r, &rescale_grid(&grid, lambda)).unwrap();
        assert_relative_eq!(
            a.uniform_constant_lambda.unwrap(),
            b.uniform_constant_lambda.unwrap(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            umbilical_constant(&r).unwrap(),
            umbilical_constant(&g).unwrap() / lambda,
            max_relative = 1e-14
        );
        for &t in &[0.0, 0.3, 7.0] {
            assert_relative_eq!(r.g(t).unwrap(), g.g(lambda * lambda * t).unwrap() / lambda, max_relative = 1e-14);
        }
        let same = rescale_relation(&g, 1.0).unwrap();
        assert_eq!(same.g(2.0).unwrap(), g.g(2.0).unwrap());
    }
}
