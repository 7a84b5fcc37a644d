//! Triangle meshes: a small OBJ reader and writer, reference mesh
//! generators and per-vertex principal curvatures by local quadric fits.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagram::{CurvatureDiagram, DiagramSource};
use crate::error::{Error, Result};
use crate::geometry::CurvaturePair;
use crate::jets::{curvatures_of_jet, Jet2};

/// Fits with a worse condition number are skipped.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedObj {
    pub mesh: TriMesh,
    pub warnings: Vec<String>,
}

/// Reads `v` and triangular `f` records. Face entries may carry
/// `/vt/vn` suffixes and negative indices; other records are skipped with
/// a warning.
pub fn parse_obj(text: &str) -> Result<ParsedObj> {
    let mut out = ParsedObj::default();
    let mut skipped: BTreeMap<String, usize> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let tag = it.next().unwrap_or_default();
        let bad = |what: &str| Error::Mesh(format!("line {}: {what}", lineno + 1));
        match tag {
            "v" => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(|s| s.parse::<f64>().map_err(|_| bad("bad coordinate")))
                    .collect::<Result<_>>()?;
                if c.len() != 3 {
                    return Err(bad("vertex needs three coordinates"));
                }
                out.mesh.vertices.push([c[0], c[1], c[2]]);
            }
            "f" => {
                let refs: Vec<&str> = it.collect();
                if refs.len() != 3 {
                    return Err(bad("only triangular faces are supported"));
                }
                let nv = out.mesh.vertices.len() as i64;
                let mut face = [0usize; 3];
                for (slot, r) in face.iter_mut().zip(&refs) {
                    let head = r.split('/').next().unwrap_or_default();
                    let idx: i64 = head.parse().map_err(|_| bad("bad vertex index"))?;
                    let resolved = if idx > 0 { idx - 1 } else { nv + idx };
                    if resolved < 0 || resolved >= nv {
                        return Err(bad("vertex index out of range"));
                    }
                    *slot = resolved as usize;
                }
                out.mesh.faces.push(face);
            }
            other => *skipped.entry(other.to_string()).or_default() += 1,
        }
    }
    out.warnings = skipped
        .into_iter()
        .map(|(tag, n)| format!("ignored {n} '{tag}' record(s)"))
        .collect();
    Ok(out)
}

impl TriMesh {
    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            s.push_str(&format!("v {} {} {}\n", v[0], v[1], v[2]));
        }
        for f in &self.faces {
            s.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
        }
        s
    }

    fn vertex(&self, i: usize) -> Vector3<f64> {
        Vector3::from(self.vertices[i])
    }

    /// Face use count of every undirected edge.
    fn edge_counts(&self) -> BTreeMap<(usize, usize), usize> {
        let mut m = BTreeMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *m.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        m
    }
}

/// Icosahedron subdivided `level` times and projected to the sphere of the
/// given radius; faces are counter-clockwise seen from outside.
pub fn icosphere(radius: f64, level: usize) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vector3<f64>> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|v| Vector3::from(*v).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vector3<f64>>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriMesh {
        vertices: verts.iter().map(|v| (v * radius).into()).collect(),
        faces,
    }
}

/// Open cylinder `x^2 + y^2 = radius^2`, `0 <= z <= height`, with outward
/// faces.
pub fn cylinder_mesh(radius: f64, height: f64, around: usize, along: usize) -> TriMesh {
    let mut vertices = Vec::with_capacity(around * (along + 1));
    for j in 0..=along {
        let z = height * j as f64 / along as f64;
        for i in 0..around {
            let a = 2.0 * PI * i as f64 / around as f64;
            vertices.push([radius * a.cos(), radius * a.sin(), z]);
        }
    }
    let idx = |i: usize, j: usize| j * around + i % around;
    let mut faces = Vec::with_capacity(2 * around * along);
    for j in 0..along {
        for i in 0..around {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriMesh { vertices, faces }
}

/// `n x n` vertex grid of spacing `h` in the plane `z = 0`, faces
/// counter-clockwise seen from `+z`.
pub fn flat_grid_mesh(n: usize, h: f64) -> TriMesh {
    let mut vertices = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            vertices.push([h * i as f64, h * j as f64, 0.0]);
        }
    }
    let mut faces = Vec::new();
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let a = j * n + i;
            faces.push([a, a + 1, a + n + 1]);
            faces.push([a, a + n + 1, a + n]);
        }
    }
    TriMesh { vertices, faces }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshDiagram {
    pub diagram: CurvatureDiagram,
    /// Vertex index of each sample.
    pub vertices: Vec<usize>,
    pub skipped_boundary: usize,
    pub skipped_degenerate: usize,
}

/// Per-vertex principal curvatures from a least-squares fit of
/// `w = a x + b y + (r x^2 + 2 s x y + t y^2) / 2` over the 2-ring, in a
/// frame whose normal is the negated area-weighted face normal. Closed
/// convex meshes with outward faces therefore get positive curvatures.
pub fn mesh_diagram(mesh: &TriMesh) -> Result<MeshDiagram> {
    let n = mesh.vertices.len();
    let edges = mesh.edge_counts();
    if let Some((e, c)) = edges.iter().find(|(_, &c)| c > 2) {
        return Err(Error::Mesh(format!("edge {e:?} is shared by {c} faces")));
    }
    let mut boundary = vec![false; n];
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (&(a, b), &c) in &edges {
        if c == 1 {
            boundary[a] = true;
            boundary[b] = true;
        }
        adj[a].insert(b);
        adj[b].insert(a);
    }
    let mut normals = vec![Vector3::zeros(); n];
    for f in &mesh.faces {
        let (a, b, c) = (mesh.vertex(f[0]), mesh.vertex(f[1]), mesh.vertex(f[2]));
        let w = (b - a).cross(&(c - a));
        for &v in f {
            normals[v] += w;
        }
    }
    enum Fit {
        Boundary,
        Degenerate,
        Pair(CurvaturePair),
    }
    let fits: Vec<Fit> = (0..n)
        .into_par_iter()
        .map(|v| {
            if boundary[v] {
                return Fit::Boundary;
            }
            let nrm = -normals[v];
            if !(nrm.norm() > 0.0) {
                return Fit::Degenerate;
            }
            let nrm = nrm.normalize();
            let mut ring: BTreeSet<usize> = adj[v].clone();
            for &u in &adj[v] {
                ring.extend(adj[u].iter().copied());
            }
            ring.remove(&v);
            match quadric_fit(mesh, v, &nrm, &ring) {
                Some(p) => Fit::Pair(p),
                None => Fit::Degenerate,
            }
        })
        .collect();
    let mut out = MeshDiagram {
        diagram: CurvatureDiagram::new(Vec::new(), DiagramSource::Mesh),
        vertices: Vec::new(),
        skipped_boundary: 0,
        skipped_degenerate: 0,
    };
    for (v, fit) in fits.into_iter().enumerate() {
        match fit {
            Fit::Boundary => out.skipped_boundary += 1,
            Fit::Degenerate => out.skipped_degenerate += 1,
            Fit::Pair(p) => {
                out.diagram.samples.push(p);
                out.vertices.push(v);
            }
        }
    }
    Ok(out)
}

fn quadric_fit(mesh: &TriMesh, v: usize, nrm: &Vector3<f64>, ring: &BTreeSet<usize>) -> Option<CurvaturePair> {
    if ring.len() < 5 {
        return None;
    }
    let seed = if nrm.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = (seed - nrm * nrm.dot(&seed)).normalize();
    let e2 = nrm.cross(&e1);
    let p = mesh.vertex(v);
    let pts: Vec<(f64, f64, f64)> = ring
        .iter()
        .map(|&u| {
            let d = mesh.vertex(u) - p;
            (d.dot(&e1), d.dot(&e2), d.dot(nrm))
        })
        .collect();
    // columns scaled by the ring size keep the conditioning independent of
    // the mesh resolution
    let scale = pts.iter().map(|q| q.0.hypot(q.1)).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return None;
    }
    let m = pts.len();
    let mut a = DMatrix::zeros(m, 5);
    let mut b = DVector::zeros(m);
    for (k, &(x, y, w)) in pts.iter().enumerate() {
        let (x, y) = (x / scale, y / scale);
        a[(k, 0)] = x;
        a[(k, 1)] = y;
        a[(k, 2)] = 0.5 * x * x;
        a[(k, 3)] = x * y;
        a[(k, 4)] = 0.5 * y * y;
        b[k] = w / scale;
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 0.0) || smax / smin > MAX_CONDITION {
        return None;
    }
    let c = svd.solve(&b, 0.0).ok()?;
    let jet = Jet2 {
        p: c[0],
        q: c[1],
        r: c[2] / scale,
        s: c[3] / scale,
        t: c[4] / scale,
    };
    let (h, k) = curvatures_of_jet(&jet);
    let root = (h * h - k).max(0.0).sqrt();
    Some(CurvaturePair::new(h + root, h - root))
}
