//! Pointwise quantities on second-order jets `(p, q, r, s, t)` of a graph
//! `z = u(x, y)`, with the upward unit normal.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relation::{RelationSpec, TGrid};

/// `(u_x, u_y, u_xx, u_xy, u_yy)`. Serialized as a 5-element array.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 5]", into = "[f64; 5]")]
pub struct Jet2 {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
    pub t: f64,
}

impl From<[f64; 5]> for Jet2 {
    fn from(a: [f64; 5]) -> Self {
        Jet2::new(a[0], a[1], a[2], a[3], a[4])
    }
}

impl From<Jet2> for [f64; 5] {
    fn from(j: Jet2) -> Self {
        j.to_array()
    }
}

impl Jet2 {
    pub const fn new(p: f64, q: f64, r: f64, s: f64, t: f64) -> Self {
        Jet2 { p, q, r, s, t }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.p, self.q, self.r, self.s, self.t]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    fn with(self, k: usize, v: f64) -> Jet2 {
        let mut a = self.to_array();
        a[k] = v;
        Jet2::from(a)
    }
}

/// Mean and Gauss curvature of the graph with the given jet.
pub fn curvatures_of_jet(j: &Jet2) -> (f64, f64) {
    let Jet2 { p, q, r, s, t } = *j;
    let w = 1.0 + p * p + q * q;
    let h = ((1.0 + q * q) * r - 2.0 * p * q * s + (1.0 + p * p) * t) / (2.0 * w * w.sqrt());
    let k = (r * t - s * s) / (w * w);
    (h, k)
}

/// `H^2 - K` with roundoff below zero clamped away.
///
/// The clamp threshold is relative to the size of the inputs; anything more
/// negative is a genuine error.
pub fn discriminant(h: f64, k: f64) -> Result<f64> {
    let d = h * h - k;
    if d >= 0.0 {
        return Ok(d);
    }
    if d > -1e-14 * (1.0 + h * h + k.abs()) {
        Ok(0.0)
    } else {
        Err(Error::NegativeDiscriminant { value: d })
    }
}

/// `(k1, k2)` with `k1 >= k2`.
pub fn principal_curvatures(j: &Jet2) -> Result<(f64, f64)> {
    let (h, k) = curvatures_of_jet(j);
    let root = discriminant(h, k)?.sqrt();
    Ok((h + root, h - root))
}

/// `H - g(H^2 - K)`.
pub fn weingarten_residual(rel: &RelationSpec, j: &Jet2) -> Result<f64> {
    let (h, k) = curvatures_of_jet(j);
    let t = discriminant(h, k)?;
    Ok(h - rel.g(t)?)
}

/// Gradient of the residual in `(p, q, r, s, t)` by central differences.
pub fn residual_gradient(rel: &RelationSpec, j: &Jet2) -> Result<[f64; 5]> {
    let a = j.to_array();
    let mut out = [0.0; 5];
    for k in 0..5 {
        let h = 1e-6 * (1.0 + a[k].abs());
        let plus = weingarten_residual(rel, &j.with(k, a[k] + h))?;
        let minus = weingarten_residual(rel, &j.with(k, a[k] - h))?;
        out[k] = (plus - minus) / (2.0 * h);
    }
    Ok(out)
}

/// `(H, K)` and their gradients in `(p, q, r, s, t)`.
pub fn curvature_gradients(j: &Jet2) -> ((f64, f64), [f64; 5], [f64; 5]) {
    let Jet2 { p, q, r, s, t } = *j;
    let w = 1.0 + p * p + q * q;
    let w32 = w * w.sqrt();
    let w52 = w32 * w;
    let n = (1.0 + q * q) * r - 2.0 * p * q * s + (1.0 + p * p) * t;
    let det = r * t - s * s;
    let h = n / (2.0 * w32);
    let k = det / (w * w);
    let dh = [
        (p * t - q * s) / w32 - 1.5 * p * n / w52,
        (q * r - p * s) / w32 - 1.5 * q * n / w52,
        (1.0 + q * q) / (2.0 * w32),
        -p * q / w32,
        (1.0 + p * p) / (2.0 * w32),
    ];
    let w3 = w * w * w;
    let dk = [
        -4.0 * p * det / w3,
        -4.0 * q * det / w3,
        t / (w * w),
        -2.0 * s / (w * w),
        r / (w * w),
    ];
    ((h, k), dh, dk)
}

/// Exact gradient `F_w = H_w - g'(H^2 - K) (2 H H_w - K_w)`.
pub fn residual_gradient_analytic(rel: &RelationSpec, j: &Jet2) -> Result<[f64; 5]> {
    let ((h, k), dh, dk) = curvature_gradients(j);
    let t = discriminant(h, k)?;
    let (_, gp) = rel.g_and_derivative(t)?;
    let mut out = [0.0; 5];
    for w in 0..5 {
        let dt = 2.0 * h * dh[w] - dk[w];
        out[w] = dh[w] - if dt == 0.0 { 0.0 } else { gp * dt };
    }
    Ok(out)
}

/// The closed formula for the two nonzero eigenvalues of the quadratic form
/// `(r, s, t) -> H^2 - K` at fixed `(p, q)`, returned as
/// `(lambda1^2, lambda2^2, 0)`.
///
/// This evaluates the formula as written. It agrees with the spectrum of the
/// form only at `p = q = 0`; in general it equals `(1 + p^2 + q^2)^2` times
/// that spectrum. See [`h2k_eigenvalues_normalized`].
pub fn h2k_eigenvalues(p: f64, q: f64) -> (f64, f64, f64) {
    let (x, y) = (p * p, q * q);
    let base = 6.0 + x * x + 6.0 * y + y * y + x * (6.0 + 4.0 * y);
    let root = q4(x, y).max(0.0).sqrt();
    let den = 8.0 * (1.0 + x + y);
    ((base + root) / den, (base - root) / den, 0.0)
}

/// [`h2k_eigenvalues`] divided by `(1 + p^2 + q^2)^2`: the actual nonzero
/// eigenvalues of the form.
pub fn h2k_eigenvalues_normalized(p: f64, q: f64) -> (f64, f64, f64) {
    let w = 1.0 + p * p + q * q;
    let (a, b, c) = h2k_eigenvalues(p, q);
    (a / (w * w), b / (w * w), c)
}

/// Symmetric matrix of the quadratic form `(r, s, t) -> H^2 - K`.
pub fn h2k_form_matrix(p: f64, q: f64) -> [[f64; 3]; 3] {
    let w = 1.0 + p * p + q * q;
    let c = 1.0 / (2.0 * w * w.sqrt());
    let a = [(1.0 + q * q) * c, -2.0 * p * q * c, (1.0 + p * p) * c];
    let b = 1.0 / (w * w);
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            m[i][k] = a[i] * a[k];
        }
    }
    // subtract the matrix of (r t - s^2) / W^2
    m[0][2] -= 0.5 * b;
    m[2][0] -= 0.5 * b;
    m[1][1] += b;
    m
}

/// The discriminant polynomial whose zero set is where the two nonzero
/// eigenvalues coincide.
pub fn q4(x: f64, y: f64) -> f64 {
    let x2 = x * x;
    let y2 = y * y;
    x2 * x2
        + x2 * x * (8.0 * y - 4.0)
        + 2.0 * x2 * y * (14.0 + 9.0 * y)
        + (y2 - 2.0 * y - 2.0).powi(2)
        + 4.0 * x * (2.0 + 10.0 * y + 7.0 * y2 + 2.0 * y2 * y)
}

/// The same polynomial grouped as a square plus `4 x y (...)`.
pub fn q4_rewritten(x: f64, y: f64) -> f64 {
    let s = x + y;
    (s * s - 2.0 * s - 2.0).powi(2) + 4.0 * x * y * (10.0 + x * x + 10.0 * y + y * y + x * (10.0 + 3.0 * y))
}

/// Compact jet set `p^2 + q^2 <= slope_bound`, `|p|+|q|+|r|+|s|+|t| <= l1_bound`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThetaBox {
    pub slope_bound: f64,
    pub l1_bound: f64,
}

impl Default for ThetaBox {
    fn default() -> Self {
        ThetaBox {
            slope_bound: 9.0 / 4.0,
            l1_bound: 10.0,
        }
    }
}

impl ThetaBox {
    pub fn contains(&self, j: &Jet2) -> bool {
        let l1: f64 = j.to_array().iter().map(|v| v.abs()).sum();
        j.p * j.p + j.q * j.q <= self.slope_bound && l1 <= self.l1_bound
    }

    /// Uniform rejection sample.
    pub fn sample(&self, rng: &mut impl Rng) -> Jet2 {
        let m = self.l1_bound;
        let ps = self.slope_bound.sqrt().min(m);
        loop {
            let j = Jet2::new(
                rng.random_range(-ps..=ps),
                rng.random_range(-ps..=ps),
                rng.random_range(-m..=m),
                rng.random_range(-m..=m),
                rng.random_range(-m..=m),
            );
            if self.contains(&j) {
                return j;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub lambda: f64,
    pub worst_jet: Jet2,
    pub samples: usize,
    pub seed: u64,
}

/// Smallest eigenvalue of `[[F_r, F_s/2], [F_s/2, F_t]]`.
pub fn symbol_min_eigenvalue(grad: &[f64; 5]) -> f64 {
    let (a, b, c) = (grad[2], 0.5 * grad[3], grad[4]);
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    mean - rad
}

/// Infimum over sampled jets in `theta` of the ellipticity constant of the
/// residual's principal symbol.
pub fn uniform_ellipticity_lambda(
    rel: &RelationSpec,
    theta: &ThetaBox,
    sample_count: usize,
    seed: u64,
) -> Result<LambdaEstimate> {
    if sample_count == 0 {
        return Err(Error::Invalid("sample_count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (f64::INFINITY, Jet2::default());
    for _ in 0..sample_count {
        let j = theta.sample(&mut rng);
        let grad = residual_gradient_analytic(rel, &j)?;
        let m = symbol_min_eigenvalue(&grad);
        if m < best.0 {
            best = (m, j);
        }
    }
    if !(best.0 > 0.0) {
        return Err(Error::NotElliptic(format!(
            "principal symbol has eigenvalue {} at jet {:?}",
            best.0,
            best.1.to_array()
        )));
    }
    Ok(LambdaEstimate {
        lambda: best.0,
        worst_jet: best.1,
        samples: sample_count,
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeBound {
    pub holds: bool,
    /// `sup sqrt(t) |g'(t)|` over the grid.
    pub sup: f64,
    pub worst_t: f64,
}

/// Checks `sqrt(t) |g'(t)| < 1/2` on the grid.
pub fn derivative_bound_check(rel: &RelationSpec, grid: &TGrid) -> Result<DerivativeBound> {
    let mut sup = 0.0_f64;
    let mut worst_t = 0.0;
    for &t in &grid.points {
        let (_, gp) = rel.g_and_derivative(t).map_err(|e| e.at_sample(t))?;
        if t == 0.0 && !gp.is_finite() {
            continue;
        }
        let v = t.sqrt() * gp.abs();
        if v > sup || v.is_nan() {
            sup = v;
            worst_t = t;
        }
    }
    Ok(DerivativeBound {
        holds: sup < 0.5,
        sup,
        worst_t,
    })
}
