//! The linearized Weingarten operator
//! `L_g[phi] = (1 - 2 g g')/2 Lap(phi) + g' div(T1 grad phi) + q phi`,
//! its constant-coefficient form on cylinders, and finite-difference checks
//! through normal variations of graph patches.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::curvatures_of_jet;
use crate::patch::{GraphPatch, NodeKind};
use crate::relation::RelationSpec;
use crate::solver::{second_fundamental_norm_field, sup_norm};

/// Coefficients of `L_g` at one point, with `g, g'` taken at `H^2 - K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearizedCoeffs {
    /// `(1 - 2 g g') / 2`
    pub principal_laplacian_weight: f64,
    /// `g'`
    pub t1_weight: f64,
    /// `2 g^2 (1 - 2 g g') - (1 - 4 g g') K`
    pub zeroth_order_q: f64,
}

pub fn linearized_coeffs(rel: &RelationSpec, h: f64, k: f64) -> Result<LinearizedCoeffs> {
    let t = (h * h - k).max(0.0);
    let (g, dg) = rel.g_and_derivative(t)?;
    Ok(LinearizedCoeffs {
        principal_laplacian_weight: 0.5 * (1.0 - 2.0 * g * dg),
        t1_weight: dg,
        zeroth_order_q: 2.0 * g * g * (1.0 - 2.0 * g * dg) - (1.0 - 4.0 * g * dg) * k,
    })
}

/// `L_g = A d_ss + B d_tt + C` on a cylinder of radius `r0` in flat
/// coordinates, `s` along the circles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderOperator {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "H0")]
    pub h0: f64,
    pub r0: f64,
}

/// Largest accepted `|g(H0^2) - H0|` for the cylinder of radius `r0`.
pub const CYLINDER_TOL: f64 = 1e-10;

pub fn cylinder_operator(rel: &RelationSpec, r0: f64) -> Result<CylinderOperator> {
    if !(r0 > 0.0) {
        return Err(Error::Invalid(format!("cylinder radius {r0} must be positive")));
    }
    let h0 = 0.5 / r0;
    let (g, dg) = rel.g_and_derivative(h0 * h0)?;
    if (g - h0).abs() > CYLINDER_TOL {
        return Err(Error::Invalid(format!(
            "the cylinder of radius {r0} does not satisfy the relation: g(H0^2) = {g}, H0 = {h0}"
        )));
    }
    if !dg.is_finite() {
        return Err(Error::Invalid(format!("g is not differentiable at {}", h0 * h0)));
    }
    let a = 0.5 * (1.0 - 2.0 * g * dg);
    Ok(CylinderOperator {
        a,
        b: a + 2.0 * h0 * dg,
        c: 4.0 * a * h0 * h0,
        h0,
        r0,
    })
}

/// `-A (pi / 2L)^2 - B (pi / 2r)^2 + C`, the eigenvalue of `L_g` on
/// `cos(pi s / 2L) cos(pi t / 2r)`.
pub fn perturbation_threshold(op: &CylinderOperator, l: f64, r: f64) -> f64 {
    -op.a * (PI / (2.0 * l)).powi(2) - op.b * (PI / (2.0 * r)).powi(2) + op.c
}

/// Half-side `L` of the square `[-L, L]^2` at which the threshold changes
/// sign.
pub fn critical_square_size(op: &CylinderOperator) -> f64 {
    0.5 * PI * ((op.a + op.b) / op.c).sqrt()
}

/// Graph of the lower half of the cylinder of radius `r0` with axis
/// `{x = 0, z = r0}`; the upward normal points to the axis.
pub fn cylinder_graph(r0: f64) -> impl Fn(f64, f64) -> f64 {
    move |x, _| r0 - (r0 * r0 - x * x).sqrt()
}

/// Lower cap of the sphere of radius `r0` centred at `(0, 0, r0)`.
pub fn sphere_graph(r0: f64) -> impl Fn(f64, f64) -> f64 {
    move |x, y| r0 - (r0 * r0 - x * x - y * y).sqrt()
}

/// `cos(pi s / 2L) cos(pi t / 2r)` on the graph [`cylinder_graph`], with
/// `s = r0 asin(x / r0)` and `t = y`; zero outside the rectangle.
pub fn cylinder_test_function(r0: f64, l: f64, r: f64) -> impl Fn(f64, f64) -> f64 {
    move |x, y| {
        if x.abs() >= r0 {
            return 0.0;
        }
        let s = r0 * (x / r0).asin();
        if s.abs() > l || y.abs() > r {
            return 0.0;
        }
        (PI * s / (2.0 * l)).cos() * (PI * y / (2.0 * r)).cos()
    }
}

/// Smooth bump `exp(1 - 1 / (1 - rho^2 / R^2))` supported in the disk of
/// radius `R` about `(cx, cy)`.
pub fn bump(cx: f64, cy: f64, radius: f64) -> impl Fn(f64, f64) -> f64 {
    move |x, y| {
        let u = ((x - cx).powi(2) + (y - cy).powi(2)) / (radius * radius);
        if u >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - u)).exp()
        }
    }
}

/// Samples a test function at every node of the patch grid.
pub fn sample_on_grid(patch: &GraphPatch, phi: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    (0..patch.grid.len())
        .map(|k| {
            let (x, y) = patch.grid.xy(k);
            phi(x, y)
        })
        .collect()
}

/// Geometry of the graph chart at an interior node.
struct ChartData {
    w: f64,
    h: f64,
    k: f64,
    /// `sqrt(det g) g^{-1}`
    lap: Matrix2<f64>,
    /// `sqrt(det g) (2H g^{-1} - g^{-1} II g^{-1})`
    t1: Matrix2<f64>,
}

fn chart_data(patch: &GraphPatch) -> Vec<Option<ChartData>> {
    (0..patch.grid.len())
        .map(|k| {
            (patch.kind(k) == NodeKind::Interior).then(|| {
                let j = patch.jet_at(k);
                let (h, kk) = curvatures_of_jet(&j);
                let w2 = 1.0 + j.p * j.p + j.q * j.q;
                let w = w2.sqrt();
                let ginv = Matrix2::new(1.0 + j.q * j.q, -j.p * j.q, -j.p * j.q, 1.0 + j.p * j.p) / w2;
                let second = Matrix2::new(j.r, j.s, j.s, j.t) / w;
                ChartData {
                    w,
                    h,
                    k: kk,
                    lap: ginv * w,
                    t1: (ginv * (2.0 * h) - ginv * second * ginv) * w,
                }
            })
        })
        .collect()
}

/// Offsets `(di, dj)` of the 3x3 stencil.
const STENCIL: [(i64, i64); 9] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (0, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

fn neighbour(patch: &GraphPatch, k: usize, di: i64, dj: i64) -> Option<usize> {
    let (i, j) = patch.grid.ij(k);
    let (i, j) = (i as i64 + di, j as i64 + dj);
    (i >= 0 && j >= 0 && (i as usize) < patch.grid.nx && (j as usize) < patch.grid.ny)
        .then(|| patch.grid.index(i as usize, j as usize))
}

fn support_error(k: usize) -> Error {
    Error::Invalid(format!("test function must vanish near the boundary (node {k})"))
}

/// `(1 / sqrt(det g)) div(M grad phi)` in the chart at node `c`, with the
/// tensor field `m` sampled at nodes and averaged to half nodes.
fn divergence_form(
    patch: &GraphPatch,
    data: &[Option<ChartData>],
    m: impl Fn(&ChartData) -> Matrix2<f64>,
    phi: &[f64],
    c: usize,
) -> Result<f64> {
    let h = patch.grid.h;
    let mut nb = [0usize; 9];
    for (slot, &(di, dj)) in nb.iter_mut().zip(&STENCIL) {
        *slot = neighbour(patch, c, di, dj).ok_or_else(|| support_error(c))?;
    }
    let [sw, s, se, w, _, e, nw, n, ne] = nb;
    let coef = |node: usize, used: bool| -> Result<Matrix2<f64>> {
        if !used {
            return Ok(Matrix2::zeros());
        }
        data[node].as_ref().map(&m).ok_or_else(|| support_error(node))
    };
    let mc = coef(c, true)?;
    let me = coef(e, phi[e] != phi[c] || phi[ne] != phi[se])?;
    let mw = coef(w, phi[w] != phi[c] || phi[nw] != phi[sw])?;
    let mn = coef(n, phi[n] != phi[c] || phi[ne] != phi[nw])?;
    let ms = coef(s, phi[s] != phi[c] || phi[se] != phi[sw])?;
    let xx = 0.5 * (me[(0, 0)] + mc[(0, 0)]) * (phi[e] - phi[c]) - 0.5 * (mc[(0, 0)] + mw[(0, 0)]) * (phi[c] - phi[w]);
    let yy = 0.5 * (mn[(1, 1)] + mc[(1, 1)]) * (phi[n] - phi[c]) - 0.5 * (mc[(1, 1)] + ms[(1, 1)]) * (phi[c] - phi[s]);
    let xy = 0.25 * (me[(0, 1)] * (phi[ne] - phi[se]) - mw[(0, 1)] * (phi[nw] - phi[sw]));
    let yx = 0.25 * (mn[(1, 0)] * (phi[ne] - phi[nw]) - ms[(1, 0)] * (phi[se] - phi[sw]));
    Ok((xx + yy + xy + yx) / (h * h * data[c].as_ref().expect("interior").w))
}

fn vanishes_near(patch: &GraphPatch, phi: &[f64], k: usize) -> bool {
    STENCIL
        .iter()
        .all(|&(di, dj)| neighbour(patch, k, di, dj).is_none_or(|m| phi[m] == 0.0))
}

fn check_len(patch: &GraphPatch, phi: &[f64]) -> Result<()> {
    if phi.len() != patch.grid.len() {
        return Err(Error::Invalid(format!(
            "test function has {} values for {} nodes",
            phi.len(),
            patch.grid.len()
        )));
    }
    Ok(())
}

/// Applies `per_node(c, lap, div_t1)` at interior nodes; non-interior nodes
/// give `None` and require `phi` to vanish around them.
fn grid_operator(
    patch: &GraphPatch,
    phi: &[f64],
    mut per_node: impl FnMut(usize, &ChartData, f64, f64) -> Result<f64>,
) -> Result<Vec<Option<f64>>> {
    check_len(patch, phi)?;
    let data = chart_data(patch);
    (0..patch.grid.len())
        .map(|c| match &data[c] {
            None if vanishes_near(patch, phi, c) => Ok(None),
            None => Err(support_error(c)),
            Some(_) if vanishes_near(patch, phi, c) => Ok(Some(0.0)),
            Some(d) => {
                let lap = divergence_form(patch, &data, |d| d.lap, phi, c)?;
                let div = divergence_form(patch, &data, |d| d.t1, phi, c)?;
                per_node(c, d, lap, div).map(Some)
            }
        })
        .collect()
}

/// Laplace-Beltrami operator of the induced metric.
pub fn laplace_beltrami(patch: &GraphPatch, phi: &[f64]) -> Result<Vec<Option<f64>>> {
    grid_operator(patch, phi, |_, _, lap, _| Ok(lap))
}

/// `div(T1 grad phi)` with `T1 = 2H Id - S`.
pub fn div_t1_grad(patch: &GraphPatch, phi: &[f64]) -> Result<Vec<Option<f64>>> {
    grid_operator(patch, phi, |_, _, _, div| Ok(div))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationFields {
    /// `H'(0)`
    pub dh: Vec<Option<f64>>,
    /// `K'(0)`
    pub dk: Vec<Option<f64>>,
}

/// Right-hand sides of the first-variation formulas:
/// `H'(0) = (Lap(phi) + (4H^2 - 2K) phi) / 2`,
/// `K'(0) = div(T1 grad phi) + 2HK phi`.
pub fn variation_formulas(patch: &GraphPatch, phi: &[f64]) -> Result<VariationFields> {
    let dh = grid_operator(patch, phi, |c, d, lap, _| Ok(0.5 * (lap + (4.0 * d.h * d.h - 2.0 * d.k) * phi[c])))?;
    let dk = grid_operator(patch, phi, |c, d, _, div| Ok(div + 2.0 * d.h * d.k * phi[c]))?;
    Ok(VariationFields { dh, dk })
}

/// `L_g[phi]` at interior nodes, all terms discretized in the graph chart.
pub fn apply_lg_on_grid(rel: &RelationSpec, patch: &GraphPatch, phi: &[f64]) -> Result<Vec<Option<f64>>> {
    grid_operator(patch, phi, |c, d, lap, div| {
        let co = linearized_coeffs(rel, d.h, d.k).map_err(|e| e.at_node(patch.grid.ij(c).0, patch.grid.ij(c).1))?;
        Ok(co.principal_laplacian_weight * lap + co.t1_weight * div + co.zeroth_order_q * phi[c])
    })
}

/// Default variation step `1e-4 min(1, 1 / sup |II|)`.
pub fn default_tau(patch: &GraphPatch) -> f64 {
    let sigma = sup_norm(&second_fundamental_norm_field(patch));
    1e-4 * if sigma > 1.0 { 1.0 / sigma } else { 1.0 }
}

/// Mean and Gauss curvature of `X + tau phi N` at nodes whose 3x3
/// neighbourhood lies in the grid, by centered differences of the varied
/// positions.
fn varied_curvatures(patch: &GraphPatch, phi: &[f64], tau: f64) -> Result<Vec<Option<(f64, f64)>>> {
    let n = patch.grid.len();
    let h = patch.grid.h;
    let mut pos = Vec::with_capacity(n);
    for k in 0..n {
        let (x, y) = patch.grid.xy(k);
        let base = Vector3::new(x, y, patch.value(k));
        if phi[k] == 0.0 {
            pos.push(base);
            continue;
        }
        if patch.kind(k) != NodeKind::Interior {
            return Err(support_error(k));
        }
        let j = patch.jet_at(k);
        let nrm = Vector3::new(-j.p, -j.q, 1.0) / (1.0 + j.p * j.p + j.q * j.q).sqrt();
        pos.push(base + tau * phi[k] * nrm);
    }
    (0..n)
        .map(|c| {
            if patch.kind(c) != NodeKind::Interior {
                return Ok(None);
            }
            let mut nb = [0usize; 9];
            for (slot, &(di, dj)) in nb.iter_mut().zip(&STENCIL) {
                match neighbour(patch, c, di, dj) {
                    Some(m) => *slot = m,
                    None => return Ok(None),
                }
            }
            let [sw, s, se, w, _, e, nw, nn, ne] = nb.map(|m| pos[m]);
            let xc = pos[c];
            let xu = (e - w) / (2.0 * h);
            let xv = (nn - s) / (2.0 * h);
            let xuu = (e - 2.0 * xc + w) / (h * h);
            let xvv = (nn - 2.0 * xc + s) / (h * h);
            let xuv = (ne - nw - se + sw) / (4.0 * h * h);
            let normal = xu.cross(&xv);
            if !(normal.z > 0.0) {
                let (i, j) = patch.grid.ij(c);
                return Err(Error::Invalid(format!(
                    "varied surface leaves graph form at node ({i}, {j}); reduce tau"
                )));
            }
            let normal = normal / normal.norm();
            let (ee, ff, gg) = (xu.dot(&xu), xu.dot(&xv), xv.dot(&xv));
            let (l, m, nn2) = (xuu.dot(&normal), xuv.dot(&normal), xvv.dot(&normal));
            let det = ee * gg - ff * ff;
            Ok(Some(((ee * nn2 - 2.0 * ff * m + gg * l) / (2.0 * det), (l * nn2 - m * m) / det)))
        })
        .collect()
}

/// `H'(0)` and `K'(0)` by centered differences in `tau` of the varied
/// surfaces `X +- tau phi N`.
pub fn variation_derivatives(patch: &GraphPatch, phi: &[f64], tau: f64) -> Result<VariationFields> {
    check_len(patch, phi)?;
    if !(tau > 0.0) {
        return Err(Error::Invalid(format!("tau = {tau} must be positive")));
    }
    let plus = varied_curvatures(patch, phi, tau)?;
    let minus = varied_curvatures(patch, phi, -tau)?;
    let (dh, dk) = plus
        .iter()
        .zip(&minus)
        .map(|(p, m)| match (p, m) {
            (Some(p), Some(m)) => (Some((p.0 - m.0) / (2.0 * tau)), Some((p.1 - m.1) / (2.0 * tau))),
            _ => (None, None),
        })
        .unzip();
    Ok(VariationFields { dh, dk })
}

/// `W(tau) = H(tau) - g(H(tau)^2 - K(tau))` on the varied surface
/// `X + tau phi N`.
pub fn varied_weingarten_residual(
    rel: &RelationSpec,
    patch: &GraphPatch,
    phi: &[f64],
    tau: f64,
) -> Result<Vec<Option<f64>>> {
    check_len(patch, phi)?;
    varied_curvatures(patch, phi, tau)?
        .into_iter()
        .map(|hk| {
            hk.map(|(h, k)| rel.g_and_derivative((h * h - k).max(0.0)).map(|(g, _)| h - g))
                .transpose()
        })
        .collect()
}

/// `W'(0)` by centered differences in `tau`.
pub fn weingarten_variation(rel: &RelationSpec, patch: &GraphPatch, phi: &[f64], tau: f64) -> Result<Vec<Option<f64>>> {
    let p = varied_weingarten_residual(rel, patch, phi, tau)?;
    let m = varied_weingarten_residual(rel, patch, phi, -tau)?;
    Ok(p.iter()
        .zip(&m)
        .map(|(p, m)| Some((p.as_ref()? - m.as_ref()?) / (2.0 * tau)))
        .collect())
}

/// Largest `|a - b|` over nodes where both fields are defined.
pub fn sup_difference(a: &[Option<f64>], b: &[Option<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .filter_map(|(x, y)| Some((x.as_ref()? - y.as_ref()?).abs()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn centred(n: usize, h: f64, f: impl Fn(f64, f64) -> f64) -> GraphPatch {
        let x0 = -0.5 * (n - 1) as f64 * h;
        GraphPatch::square(n, x0, x0, h, f).unwrap()
    }

    #[test]
    fn cmc_cylinder_constants() {
        let op = cylinder_operator(&RelationSpec::Cmc { h0: 0.5 }, 1.0).unwrap();
        assert_eq!((op.a, op.b, op.c), (0.5, 0.5, 0.5));
        assert_relative_eq!(critical_square_size(&op), 0.5 * PI * 2f64.sqrt(), epsilon = 1e-15);
        assert!(cylinder_operator(&RelationSpec::Cmc { h0: 0.5 }, 2.0).is_err());
    }

    #[test]
    fn linear_cylinder_constants() {
        let rel = RelationSpec::Linear {
            alpha: 1.0,
            beta: 1.0,
            delta: 1.0,
        };
        let op = cylinder_operator(&rel, 1.0).unwrap();
        assert_relative_eq!(op.a, 1.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(op.b, 2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(op.c, 1.0 / 3.0, epsilon = 1e-14);
        assert_eq!(op.c, 4.0 * op.a * op.h0 * op.h0);
        let json = serde_json::to_value(op).unwrap();
        assert!(json.get("A").is_some() && json.get("r0").is_some());
    }

    #[test]
    fn threshold_limits() {
        let op = cylinder_operator(&RelationSpec::Cmc { h0: 0.5 }, 1.0).unwrap();
        assert!(perturbation_threshold(&op, 1e8, 1e8) - op.c < 1e-12);
        assert!(perturbation_threshold(&op, 1e-3, 1e-3) < -1e5);
        let lc = critical_square_size(&op);
        assert!(perturbation_threshold(&op, lc, lc).abs() < 1e-10);
        assert!(perturbation_threshold(&op, lc * 1.01, lc * 1.01) > 0.0);
    }

    #[test]
    fn plane_patch_reduces_to_half_laplacian() {
        let p = centred(41, 0.025, |_, _| 0.0);
        let phi = sample_on_grid(&p, bump(0.0, 0.0, 0.3));
        let lg = apply_lg_on_grid(&RelationSpec::minimal(), &p, &phi).unwrap();
        let h = p.grid.h;
        for c in p.interior_nodes() {
            let (i, j) = p.grid.ij(c);
            let five = (phi[p.grid.index(i + 1, j)] + phi[p.grid.index(i - 1, j)] + phi[p.grid.index(i, j + 1)]
                + phi[p.grid.index(i, j - 1)]
                - 4.0 * phi[c])
                / (h * h);
            assert!((lg[c].unwrap() - 0.5 * five).abs() < 1e-9);
        }
        let zero = vec![0.0; p.grid.len()];
        assert!(apply_lg_on_grid(&RelationSpec::minimal(), &p, &zero)
            .unwrap()
            .iter()
            .all(|v| v.is_none_or(|v| v == 0.0)));
    }

    #[test]
    fn support_touching_the_boundary_is_rejected() {
        let p = centred(11, 0.1, |_, _| 0.0);
        let phi = vec![1.0; p.grid.len()];
        assert!(apply_lg_on_grid(&RelationSpec::minimal(), &p, &phi).is_err());
    }

    #[test]
    fn cylinder_patch_matches_constant_coefficients() {
        let rel = RelationSpec::Linear {
            alpha: 1.0,
            beta: 1.0,
            delta: 1.0,
        };
        let op = cylinder_operator(&rel, 1.0).unwrap();
        let (l, r) = (0.7, 0.8);
        let phi_f = cylinder_test_function(1.0, l, r);
        let mut errs = Vec::new();
        for n in [41usize, 81] {
            let h = 2.0 / (n - 1) as f64;
            let p = centred(n, h, cylinder_graph(1.0));
            let phi = sample_on_grid(&p, &phi_f);
            let lg = apply_lg_on_grid(&rel, &p, &phi).unwrap();
            let lam = perturbation_threshold(&op, l, r);
            let mut err = 0.0_f64;
            for c in p.interior_nodes() {
                let (x, y) = p.grid.xy(c);
                let s = x.asin();
                if s.abs() < l - 2.0 * h && y.abs() < r - 2.0 * h {
                    err = err.max((lg[c].unwrap() - lam * phi[c]).abs());
                }
            }
            errs.push(err);
        }
        assert!(errs[1] < 5e-3 && errs[0] / errs[1] > 3.0, "{errs:?}");
    }

    #[test]
    fn sphere_variation_is_second_order() {
        let mut errs = Vec::new();
        for (n, h) in [(121usize, 0.01), (241, 0.005)] {
            let x0 = -0.5 * (n - 1) as f64 * h;
            let p = GraphPatch::square(n, x0, x0, h, sphere_graph(1.0)).unwrap();
            let phi = sample_on_grid(&p, bump(0.1, 0.05, 0.4));
            let fd = variation_derivatives(&p, &phi, default_tau(&p)).unwrap();
            let formula = variation_formulas(&p, &phi).unwrap();
            errs.push((sup_difference(&fd.dh, &formula.dh), sup_difference(&fd.dk, &formula.dk)));
            let lap = laplace_beltrami(&p, &phi).unwrap();
            let c = p.grid.nearest(0.0, 0.0);
            assert_relative_eq!(2.0 * fd.dh[c].unwrap(), lap[c].unwrap() + 2.0 * phi[c], max_relative = 5e-3);
        }
        assert!(errs[0].0 / errs[1].0 > 3.0 && errs[0].1 / errs[1].1 > 3.0, "{errs:?}");
    }

    #[test]
    fn w_prime_matches_operator_on_cylinder() {
        let rel = RelationSpec::Linear {
            alpha: 1.0,
            beta: 1.0,
            delta: 1.0,
        };
        let p = centred(81, 0.02, cylinder_graph(1.0));
        let phi = sample_on_grid(&p, bump(0.0, 0.0, 0.5));
        let w = weingarten_variation(&rel, &p, &phi, default_tau(&p)).unwrap();
        let lg = apply_lg_on_grid(&rel, &p, &phi).unwrap();
        let scale = lg.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(sup_difference(&w, &lg) < 1e-3 * scale, "{}", sup_difference(&w, &lg));
    }
}
