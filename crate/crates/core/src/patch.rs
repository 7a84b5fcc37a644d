//! Gridded graphs `z = u(x, y)` over rectangles and disks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::Jet2;

/// Uniform grid. Node `(i, j)` sits at `(x0 + i h, y0 + j h)` and has linear
/// index `j * nx + i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn xy(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.ij(k);
        (self.x0 + i as f64 * self.h, self.y0 + j as f64 * self.h)
    }

    /// Node nearest to `(x, y)`, clamped to the grid.
    pub fn nearest(&self, x: f64, y: f64) -> usize {
        let i = ((x - self.x0) / self.h).round().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = ((y - self.y0) / self.h).round().clamp(0.0, (self.ny - 1) as f64) as usize;
        self.index(i, j)
    }

    /// Linear indices of the 8 neighbours that exist.
    pub fn neighbours(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.ij(k);
        (-1i64..=1)
            .flat_map(move |dj| (-1i64..=1).map(move |di| (di, dj)))
            .filter(|&(di, dj)| di != 0 || dj != 0)
            .filter_map(move |(di, dj)| {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                (a >= 0 && b >= 0 && (a as usize) < self.nx && (b as usize) < self.ny)
                    .then(|| self.index(a as usize, b as usize))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Domain {
    Rectangle,
    Disk { cx: f64, cy: f64, radius: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Interior,
    Boundary,
    Exterior,
}

/// How disk boundary nodes, which lie just outside the circle, get values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiskBoundary {
    /// Dirichlet data at the nearest circle point, held fixed. First order.
    Cut,
    /// Linear extrapolation along the radius through the Dirichlet value on
    /// the circle and an interpolated interior value. Second order.
    #[default]
    Extrapolated,
}

/// Extrapolated boundary value `(1 + ratio) anchor - ratio * sum w_k u_k`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Ghost {
    pub anchor: f64,
    pub ratio: f64,
    pub stencil: [(usize, f64); 4],
}

impl Ghost {
    fn value(&self, u: &[f64]) -> f64 {
        let interp: f64 = self.stencil.iter().map(|&(k, w)| w * u[k]).sum();
        (1.0 + self.ratio) * self.anchor - self.ratio * interp
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphPatch {
    pub grid: Grid,
    pub domain: Domain,
    pub disk_boundary: DiskBoundary,
    kinds: Vec<NodeKind>,
    /// `u` at every node; exterior nodes hold 0.
    values: Vec<f64>,
    /// Dirichlet data, meaningful on boundary nodes.
    boundary_data: Vec<f64>,
    ghosts: Vec<Option<Ghost>>,
}

/// JSON header accompanying the CSV values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatchHeader {
    pub grid: Grid,
    pub domain: Domain,
    #[serde(default)]
    pub disk_boundary: DiskBoundary,
    /// `(node index, Dirichlet value)` for every boundary node.
    pub boundary: Vec<(usize, f64)>,
}

impl GraphPatch {
    /// Rectangle covered by `grid`, with `u = data` everywhere.
    pub fn rectangle(grid: Grid, data: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_grid(&grid)?;
        if grid.nx < 3 || grid.ny < 3 {
            return Err(Error::Invalid("rectangle needs at least 3x3 nodes".into()));
        }
        let n = grid.len();
        let mut kinds = vec![NodeKind::Interior; n];
        let mut values = vec![0.0; n];
        for k in 0..n {
            let (i, j) = grid.ij(k);
            if i == 0 || j == 0 || i == grid.nx - 1 || j == grid.ny - 1 {
                kinds[k] = NodeKind::Boundary;
            }
            let (x, y) = grid.xy(k);
            values[k] = data(x, y);
        }
        let boundary_data = values.clone();
        Ok(GraphPatch {
            grid,
            domain: Domain::Rectangle,
            disk_boundary: DiskBoundary::Cut,
            kinds,
            values,
            boundary_data,
            ghosts: vec![None; n],
        })
    }

    /// Square grid `[x0, x0 + (n-1) h] x [y0, ...]`.
    pub fn square(n: usize, x0: f64, y0: f64, h: f64, data: impl Fn(f64, f64) -> f64) -> Result<Self> {
        GraphPatch::rectangle(
            Grid {
                nx: n,
                ny: n,
                x0,
                y0,
                h,
            },
            data,
        )
    }

    /// Disk of `radius` around `(cx, cy)` with the centre on a node.
    /// Dirichlet data is `data` on the circle; interior values start at `data`
    /// too.
    pub fn disk(
        cx: f64,
        cy: f64,
        radius: f64,
        h: f64,
        mode: DiskBoundary,
        data: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        if !(radius > 4.0 * h) || !(h > 0.0) {
            return Err(Error::Invalid(format!(
                "disk radius {radius} must exceed 4 grid spacings (h = {h})"
            )));
        }
        let m = (radius / h).ceil() as usize + 2;
        let grid = Grid {
            nx: 2 * m + 1,
            ny: 2 * m + 1,
            x0: cx - m as f64 * h,
            y0: cy - m as f64 * h,
            h,
        };
        let domain = Domain::Disk { cx, cy, radius };
        let mut patch = GraphPatch::with_domain(grid, domain, mode)?;
        for k in 0..grid.len() {
            let (x, y) = grid.xy(k);
            let (bx, by) = patch.circle_point(x, y);
            patch.boundary_data[k] = data(bx, by);
            if patch.kinds[k] != NodeKind::Exterior {
                patch.values[k] = if patch.kinds[k] == NodeKind::Interior {
                    data(x, y)
                } else {
                    patch.boundary_data[k]
                };
            }
        }
        patch.build_ghosts()?;
        patch.refresh_ghosts();
        Ok(patch)
    }

    fn with_domain(grid: Grid, domain: Domain, mode: DiskBoundary) -> Result<Self> {
        check_grid(&grid)?;
        let n = grid.len();
        let mut kinds = vec![NodeKind::Exterior; n];
        match domain {
            Domain::Rectangle => {
                for (k, kind) in kinds.iter_mut().enumerate() {
                    let (i, j) = grid.ij(k);
                    *kind = if i == 0 || j == 0 || i == grid.nx - 1 || j == grid.ny - 1 {
                        NodeKind::Boundary
                    } else {
                        NodeKind::Interior
                    };
                }
            }
            Domain::Disk { cx, cy, radius } => {
                for (k, kind) in kinds.iter_mut().enumerate() {
                    let (x, y) = grid.xy(k);
                    let (i, j) = grid.ij(k);
                    let edge = i == 0 || j == 0 || i == grid.nx - 1 || j == grid.ny - 1;
                    if !edge && (x - cx).hypot(y - cy) < radius {
                        *kind = NodeKind::Interior;
                    }
                }
                for k in 0..n {
                    if kinds[k] == NodeKind::Exterior
                        && grid.neighbours(k).any(|m| kinds[m] == NodeKind::Interior)
                    {
                        kinds[k] = NodeKind::Boundary;
                    }
                }
            }
        }
        Ok(GraphPatch {
            grid,
            domain,
            disk_boundary: if matches!(domain, Domain::Rectangle) {
                DiskBoundary::Cut
            } else {
                mode
            },
            kinds,
            values: vec![0.0; n],
            boundary_data: vec![0.0; n],
            ghosts: vec![None; n],
        })
    }

    fn circle_point(&self, x: f64, y: f64) -> (f64, f64) {
        match self.domain {
            Domain::Rectangle => (x, y),
            Domain::Disk { cx, cy, radius } => {
                let rho = (x - cx).hypot(y - cy);
                if rho == 0.0 {
                    (cx + radius, cy)
                } else {
                    (cx + radius * (x - cx) / rho, cy + radius * (y - cy) / rho)
                }
            }
        }
    }

    fn build_ghosts(&mut self) -> Result<()> {
        let Domain::Disk { cx, cy, radius } = self.domain else {
            return Ok(());
        };
        if self.disk_boundary != DiskBoundary::Extrapolated {
            return Ok(());
        }
        let g = self.grid;
        let depth = 2.5 * g.h;
        for k in 0..g.len() {
            if self.kinds[k] != NodeKind::Boundary {
                continue;
            }
            let (x, y) = g.xy(k);
            let rho = (x - cx).hypot(y - cy);
            let (ux, uy) = ((x - cx) / rho, (y - cy) / rho);
            let (px, py) = (cx + (radius - depth) * ux, cy + (radius - depth) * uy);
            let fi = (px - g.x0) / g.h;
            let fj = (py - g.y0) / g.h;
            let (i0, j0) = (fi.floor() as usize, fj.floor() as usize);
            let (a, b) = (fi - i0 as f64, fj - j0 as f64);
            let stencil = [
                (g.index(i0, j0), (1.0 - a) * (1.0 - b)),
                (g.index(i0 + 1, j0), a * (1.0 - b)),
                (g.index(i0, j0 + 1), (1.0 - a) * b),
                (g.index(i0 + 1, j0 + 1), a * b),
            ];
            if stencil.iter().any(|&(m, _)| self.kinds[m] != NodeKind::Interior) {
                return Err(Error::Invalid(format!(
                    "extrapolation stencil for boundary node {k} leaves the interior"
                )));
            }
            self.ghosts[k] = Some(Ghost {
                anchor: self.boundary_data[k],
                ratio: (rho - radius) / depth,
                stencil,
            });
        }
        Ok(())
    }

    /// Recomputes extrapolated boundary values from the interior.
    pub fn refresh_ghosts(&mut self) {
        for k in 0..self.values.len() {
            if let Some(gh) = &self.ghosts[k] {
                self.values[k] = gh.value(&self.values);
            }
        }
    }

    pub fn kind(&self, k: usize) -> NodeKind {
        self.kinds[k]
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub(crate) fn ghost(&self, k: usize) -> Option<&Ghost> {
        self.ghosts[k].as_ref()
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.kinds.len())
            .filter(|&k| self.kinds[k] == NodeKind::Interior)
            .collect()
    }

    /// Overwrites interior values; boundary nodes keep their data.
    pub fn set_interior(&mut self, f: impl Fn(f64, f64) -> f64) {
        for k in 0..self.values.len() {
            if self.kinds[k] == NodeKind::Interior {
                let (x, y) = self.grid.xy(k);
                self.values[k] = f(x, y);
            }
        }
        self.refresh_ghosts();
    }

    /// Sets interior values from a slice indexed like [`Self::interior_nodes`].
    pub(crate) fn set_interior_values(&mut self, nodes: &[usize], u: &[f64]) {
        for (&k, &v) in nodes.iter().zip(u) {
            self.values[k] = v;
        }
        self.refresh_ghosts();
    }

    /// Central-difference jet at an interior node.
    pub fn jet_at(&self, k: usize) -> Jet2 {
        let g = &self.grid;
        let (nx, h) = (g.nx, g.h);
        let u = &self.values;
        let c = u[k];
        let (e, w, n, s) = (u[k + 1], u[k - 1], u[k + nx], u[k - nx]);
        let (ne, nw, se, sw) = (u[k + nx + 1], u[k + nx - 1], u[k - nx + 1], u[k - nx - 1]);
        Jet2::new(
            (e - w) / (2.0 * h),
            (n - s) / (2.0 * h),
            (e - 2.0 * c + w) / (h * h),
            (ne - nw - se + sw) / (4.0 * h * h),
            (n - 2.0 * c + s) / (h * h),
        )
    }

    /// Coordinates and values scaled by `lambda`.
    pub fn scaled(&self, lambda: f64) -> GraphPatch {
        let mut out = self.clone();
        out.grid.x0 *= lambda;
        out.grid.y0 *= lambda;
        out.grid.h *= lambda;
        if let Domain::Disk { cx, cy, radius } = self.domain {
            out.domain = Domain::Disk {
                cx: cx * lambda,
                cy: cy * lambda,
                radius: radius * lambda,
            };
        }
        for v in out.values.iter_mut() {
            *v *= lambda;
        }
        for v in out.boundary_data.iter_mut() {
            *v *= lambda;
        }
        for gh in out.ghosts.iter_mut().flatten() {
            gh.anchor *= lambda;
        }
        out
    }

    pub fn header(&self) -> PatchHeader {
        PatchHeader {
            grid: self.grid,
            domain: self.domain,
            disk_boundary: self.disk_boundary,
            boundary: (0..self.kinds.len())
                .filter(|&k| self.kinds[k] == NodeKind::Boundary)
                .map(|k| (k, self.boundary_data[k]))
                .collect(),
        }
    }

    /// `x,y,u` rows for every non-exterior node in row-major order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,u\n");
        for k in 0..self.values.len() {
            if self.kinds[k] == NodeKind::Exterior {
                continue;
            }
            let (x, y) = self.grid.xy(k);
            out.push_str(&format!("{x},{y},{}\n", self.values[k]));
        }
        out
    }

    pub fn from_parts(header: &PatchHeader, csv: &str) -> Result<Self> {
        let mut patch = GraphPatch::with_domain(header.grid, header.domain, header.disk_boundary)?;
        for &(k, v) in &header.boundary {
            if k >= patch.kinds.len() || patch.kinds[k] != NodeKind::Boundary {
                return Err(Error::Invalid(format!("header lists node {k} as boundary")));
            }
            patch.boundary_data[k] = v;
            patch.values[k] = v;
        }
        let g = header.grid;
        for (line_no, line) in csv.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Invalid(format!("csv line {}: {e}", line_no + 1)))?;
            if cols.len() != 3 {
                return Err(Error::Invalid(format!(
                    "csv line {} has {} columns, expected 3",
                    line_no + 1,
                    cols.len()
                )));
            }
            let k = g.nearest(cols[0], cols[1]);
            let (x, y) = g.xy(k);
            if (x - cols[0]).abs() > 1e-6 * g.h || (y - cols[1]).abs() > 1e-6 * g.h {
                return Err(Error::Invalid(format!(
                    "csv line {} is not on a grid node",
                    line_no + 1
                )));
            }
            if patch.kinds[k] == NodeKind::Interior {
                patch.values[k] = cols[2];
            }
        }
        patch.build_ghosts()?;
        patch.refresh_ghosts();
        Ok(patch)
    }
}

fn check_grid(g: &Grid) -> Result<()> {
    if g.nx == 0 || g.ny == 0 || !(g.h > 0.0) || !g.x0.is_finite() || !g.y0.is_finite() {
        return Err(Error::Invalid(format!("bad grid {g:?}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_nodes_have_full_stencils() {
        let p = GraphPatch::disk(0.0, 0.0, 1.0, 0.1, DiskBoundary::Extrapolated, |_, _| 0.0).unwrap();
        for k in p.interior_nodes() {
            assert!(p.grid.neighbours(k).count() == 8);
            for m in p.grid.neighbours(k) {
                assert_ne!(p.kind(m), NodeKind::Exterior);
            }
        }
    }

    #[test]
    fn extrapolation_is_exact_for_affine_data() {
        let f = |x: f64, y: f64| 0.3 + 2.0 * x - y;
        let mut p = GraphPatch::disk(0.1, -0.2, 0.8, 0.05, DiskBoundary::Extrapolated, f).unwrap();
        p.set_interior(f);
        for k in 0..p.grid.len() {
            if p.kind(k) == NodeKind::Boundary {
                let (x, y) = p.grid.xy(k);
                assert!((p.value(k) - f(x, y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jet_of_quadratic_is_exact() {
        let f = |x: f64, y: f64| 1.0 + 0.5 * x - y + 0.7 * x * x - 0.3 * x * y + 1.1 * y * y;
        let p = GraphPatch::square(9, -1.0, -1.0, 0.25, f).unwrap();
        let j = p.jet_at(p.grid.index(3, 5));
        let (x, y) = p.grid.xy(p.grid.index(3, 5));
        assert!((j.p - (0.5 + 1.4 * x - 0.3 * y)).abs() < 1e-12);
        assert!((j.q - (-1.0 - 0.3 * x + 2.2 * y)).abs() < 1e-12);
        assert!((j.r - 1.4).abs() < 1e-12);
        assert!((j.s + 0.3).abs() < 1e-12);
        assert!((j.t - 2.2).abs() < 1e-12);
    }

    #[test]
    fn csv_roundtrip() {
        let mut p = GraphPatch::disk(0.0, 0.0, 1.0, 0.1, DiskBoundary::Extrapolated, |x, _| x).unwrap();
        p.set_interior(|x, y| x * y);
        let back = GraphPatch::from_parts(&p.header(), &p.to_csv()).unwrap();
        for k in 0..p.grid.len() {
            assert!((back.value(k) - p.value(k)).abs() < 1e-14);
        }
        let text = serde_json::to_string(&p.header()).unwrap();
        let h: PatchHeader = serde_json::from_str(&text).unwrap();
        assert_eq!(h, p.header());
    }
}
