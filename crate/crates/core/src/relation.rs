//! Weingarten relations `H = g(H^2 - K)` and `k2 = f(k1)`.
//!
//! A relation can be given as a named family (constant mean curvature,
//! linear Weingarten) or directly by one of its two functions. Conversions
//! between the forms are sampled; certification is always done on a finite
//! grid of `t = H^2 - K` values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{Expr, HermiteSamples, Interval, ScalarFunction};

/// Tolerance for `f(f(x)) = x`.
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Consecutive samples of a strictly monotone branch must differ by this.
pub const MONOTONE_MARGIN: f64 = 1e-12;
/// `sup 4 t g'^2` must stay this far below 1 to report a uniform constant.
pub const UNIFORM_MARGIN: f64 = 1e-3;
/// `|g(0)|` below this counts as minimal type.
pub const MINIMAL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RelationSpec {
    /// `H = h0`
    Cmc { h0: f64 },
    /// `2 alpha H + beta K = delta`
    Linear { alpha: f64, beta: f64, delta: f64 },
    /// `H = g(H^2 - K)`
    G { g: ScalarFunction },
    /// `k2 = f(k1)`
    F { f: ScalarFunction },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundedBranch {
    TPlusGBounded,
    TMinusGBounded,
    Neither,
}

/// Log-spaced sampling of `[0, t_max]`, always containing `t = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TGrid {
    pub t_max: f64,
    pub points: Vec<f64>,
}

impl Default for TGrid {
    fn default() -> Self {
        TGrid::log_spaced(1e4, 10_000)
    }
}

impl TGrid {
    /// `0` followed by `n - 1` geometric samples from `1e-10 t_max` to `t_max`.
    pub fn log_spaced(t_max: f64, n: usize) -> Self {
        let n = n.max(2);
        let lo = 1e-10 * t_max;
        let ratio = (t_max / lo).ln();
        let mut points = Vec::with_capacity(n);
        points.push(0.0);
        for k in 0..n - 1 {
            let s = if n == 2 { 1.0 } else { k as f64 / (n - 2) as f64 };
            points.push(lo * (ratio * s).exp());
        }
        *points.last_mut().expect("non-empty") = t_max;
        TGrid { t_max, points }
    }

    /// Keep every existing sample and append geometric samples up to `t_max`.
    pub fn extended(&self, t_max: f64, extra: usize) -> Self {
        if t_max <= self.t_max || extra == 0 {
            return self.clone();
        }
        let mut points = self.points.clone();
        let step = (t_max / self.t_max).ln() / extra as f64;
        for k in 1..=extra {
            points.push(self.t_max * (step * k as f64).exp());
        }
        *points.last_mut().expect("non-empty") = t_max;
        TGrid { t_max, points }
    }

    /// The same grid with every sample multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        TGrid {
            t_max: self.t_max * factor,
            points: self.points.iter().map(|t| t * factor).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.points.is_empty() || !(self.t_max > 0.0) {
            return Err(Error::Invalid(
                "t grid must be nonempty with t_max > 0".into(),
            ));
        }
        if self.points.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(Error::Invalid("t grid samples must be finite and >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub t_max: f64,
    pub samples: usize,
    pub spacing: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticityReport {
    pub is_elliptic: bool,
    pub sup_4tgp2: f64,
    /// `t` at which the supremum was attained.
    pub worst_t: f64,
    #[serde(rename = "uniform_constant_Lambda")]
    pub uniform_constant_lambda: Option<f64>,
    pub f_slope_bounds: Option<(f64, f64)>,
    pub umbilical_alpha: Option<f64>,
    /// True when `g(0) < 0` and the reported constant is for the flipped
    /// orientation.
    pub orientation_flipped: bool,
    pub minimal_type: bool,
    #[serde(rename = "If_domain")]
    pub if_domain: Interval,
    pub bounded_branch: BoundedBranch,
    pub grid: GridInfo,
}

impl RelationSpec {
    pub fn minimal() -> Self {
        RelationSpec::Cmc { h0: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RelationSpec::Cmc { h0 } if !h0.is_finite() => {
                Err(Error::Invalid(format!("h0 = {h0} is not finite")))
            }
            RelationSpec::Linear { alpha, beta, delta } => {
                let det = alpha * alpha + beta * delta;
                if !(det > 0.0) {
                    return Err(Error::NotElliptic(format!(
                        "alpha^2 + beta delta = {det} must be positive"
                    )));
                }
                Ok(())
            }
            RelationSpec::G { g } if !g.domain.contains(0.0) => Err(Error::Invalid(format!(
                "g must be defined at t = 0, domain is {}",
                g.domain
            ))),
            _ => Ok(()),
        }
    }

    /// `(g(t), g'(t))`.
    pub fn g_and_derivative(&self, t: f64) -> Result<(f64, f64)> {
        if !(t >= 0.0) {
            return Err(Error::OutOfDomain {
                x: t,
                domain: Interval::HALF_LINE,
            });
        }
        match self {
            RelationSpec::Cmc { h0 } => Ok((*h0, 0.0)),
            RelationSpec::Linear { alpha, beta, delta } => ScalarFunction::closed(
                Expr::LinearWeingartenG {
                    alpha: *alpha,
                    beta: *beta,
                    delta: *delta,
                },
                Interval::HALF_LINE,
            )
            .eval_with_derivative(t),
            RelationSpec::G { g } => g.eval_with_derivative(t),
            RelationSpec::F { f } => {
                let alpha = fixed_point(f).ok_or_else(|| {
                    Error::NotElliptic("f has no fixed point in its domain".into())
                })?;
                g_from_f(f, alpha, t)
            }
        }
    }

    pub fn g(&self, t: f64) -> Result<f64> {
        self.g_and_derivative(t).map(|(g, _)| g)
    }

    /// `g` as a standalone function when one exists without sampling.
    pub fn g_function(&self) -> Option<ScalarFunction> {
        match self {
            RelationSpec::Cmc { h0 } => Some(ScalarFunction::constant(*h0, Interval::HALF_LINE)),
            RelationSpec::Linear { alpha, beta, delta } => Some(ScalarFunction::closed(
                Expr::LinearWeingartenG {
                    alpha: *alpha,
                    beta: *beta,
                    delta: *delta,
                },
                Interval::HALF_LINE,
            )),
            RelationSpec::G { g } => Some(g.clone()),
            RelationSpec::F { .. } => None,
        }
    }

    /// Closed-form `f` for the analytic families and the stored `f` of an
    /// f-form relation. g-forms need [`g_to_f`].
    pub fn f_function(&self) -> Option<ScalarFunction> {
        match *self {
            RelationSpec::Cmc { h0 } => Some(ScalarFunction::closed(
                Expr::Affine {
                    slope: -1.0,
                    intercept: 2.0 * h0,
                },
                Interval::REAL_LINE,
            )),
            RelationSpec::Linear { alpha, beta, delta } => {
                if beta == 0.0 {
                    Some(ScalarFunction::closed(
                        Expr::Affine {
                            slope: -1.0,
                            intercept: delta / alpha,
                        },
                        Interval::REAL_LINE,
                    ))
                } else {
                    Some(ScalarFunction::closed(
                        Expr::Mobius {
                            a: -alpha,
                            b: delta,
                            c: beta,
                            d: alpha,
                        },
                        linear_f_domain(alpha, beta),
                    ))
                }
            }
            RelationSpec::G { .. } => None,
            RelationSpec::F { ref f } => Some(f.clone()),
        }
    }

    /// The relation describing the same surfaces with the opposite normal.
    pub fn flipped(&self) -> RelationSpec {
        match *self {
            RelationSpec::Cmc { h0 } => RelationSpec::Cmc { h0: -h0 },
            RelationSpec::Linear { alpha, beta, delta } => {
                if alpha != 0.0 {
                    RelationSpec::Linear {
                        alpha: -alpha,
                        beta,
                        delta,
                    }
                } else {
                    RelationSpec::Linear {
                        alpha: 0.0,
                        beta: -beta,
                        delta: -delta,
                    }
                }
            }
            RelationSpec::G { ref g } => RelationSpec::G {
                g: ScalarFunction::closed(
                    Expr::Scaled {
                        inner: Box::new(g.clone()),
                        input_scale: 1.0,
                        output_scale: -1.0,
                    },
                    g.domain,
                ),
            },
            RelationSpec::F { ref f } => RelationSpec::F {
                f: ScalarFunction::closed(
                    Expr::Scaled {
                        inner: Box::new(f.clone()),
                        input_scale: -1.0,
                        output_scale: -1.0,
                    },
                    f.domain.scaled(-1.0),
                ),
            },
        }
    }

    /// Orientation with `g(0) >= 0`, and whether a flip was needed.
    pub fn normalized_orientation(&self) -> Result<(RelationSpec, bool)> {
        let g0 = self.g(0.0)?;
        if g0 < 0.0 {
            Ok((self.flipped(), true))
        } else {
            Ok((self.clone(), false))
        }
    }

    /// Largest `t` at which `g` can be evaluated, if finite.
    pub fn t_limit(&self) -> Option<f64> {
        match self {
            RelationSpec::G { g } => g.domain.hi,
            RelationSpec::F { f } => {
                let hi = f.domain.hi?;
                if !f.domain.hi_closed {
                    return Some(hi);
                }
                let fh = f.eval(hi).ok()?;
                Some((hi - fh).powi(2) / 4.0)
            }
            _ => None,
        }
    }

    /// The default certification grid, clipped to where `g` is defined.
    pub fn default_grid(&self) -> TGrid {
        match self.t_limit() {
            Some(limit) if limit < 1e4 => TGrid::log_spaced(limit, 10_000),
            _ => TGrid::default(),
        }
    }
}

/// The side of the pole `-alpha/beta` on which the chosen `g` branch lives.
fn linear_f_domain(alpha: f64, beta: f64) -> Interval {
    let pole = -alpha / beta;
    let sign = if alpha < 0.0 { -1.0 } else { 1.0 };
    // alpha + beta x has the sign of `sign` on the domain
    if sign * beta > 0.0 {
        Interval::open(Some(pole), None)
    } else {
        Interval::open(None, Some(pole))
    }
}

/// Solves `f(x) = x`. `x - f(x)` is increasing, so this is a bracketed
/// root search.
pub fn fixed_point(f: &ScalarFunction) -> Option<f64> {
    let d = f.domain;
    let psi = |x: f64| f.eval(x).ok().map(|v| x - v);
    let inner = |v: f64, closed: bool, toward: f64| {
        if closed {
            v
        } else {
            v + toward * 1e-12 * (1.0 + v.abs())
        }
    };
    let start = if d.contains(0.0) {
        0.0
    } else {
        match (d.lo, d.hi) {
            (Some(lo), Some(hi)) => 0.5 * (lo + hi),
            (Some(lo), None) => lo + 1.0,
            (None, Some(hi)) => hi - 1.0,
            (None, None) => 0.0,
        }
    };
    let p0 = psi(start)?;
    if p0 == 0.0 {
        return Some(start);
    }
    let dir = if p0 < 0.0 { 1.0 } else { -1.0 };
    let edge = if dir > 0.0 {
        d.hi.map(|h| inner(h, d.hi_closed, -1.0))
    } else {
        d.lo.map(|l| inner(l, d.lo_closed, 1.0))
    };
    let (mut a, mut b) = (start, start);
    let mut step = 1.0;
    let mut found = false;
    for _ in 0..200 {
        let mut x = start + dir * step;
        if let Some(e) = edge {
            if (x - e) * dir >= 0.0 {
                x = 0.5 * (a + e);
                if (x - a).abs() <= 1e-15 * (1.0 + x.abs()) {
                    x = e;
                }
            }
        }
        let p = psi(x)?;
        if p * dir >= 0.0 {
            b = x;
            found = true;
            break;
        }
        a = x;
        step *= 2.0;
        if edge.is_some_and(|e| x == e) {
            return None;
        }
    }
    if !found {
        return None;
    }
    let (mut lo, mut hi) = if dir > 0.0 { (a, b) } else { (b, a) };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if psi(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (plo, phi) = (psi(lo)?, psi(hi)?);
    Some(if plo.abs() <= phi.abs() { lo } else { hi })
}

/// `g(t)` from `f`: solve `x - f(x) = 2 sqrt(t)` on the upper branch.
fn g_from_f(f: &ScalarFunction, alpha: f64, t: f64) -> Result<(f64, f64)> {
    if t == 0.0 {
        return Ok((alpha, f.second_derivative(alpha)? / 4.0));
    }
    let target = 2.0 * t.sqrt();
    let phi = |x: f64| -> Result<(f64, f64)> {
        let (v, d) = f.eval_with_derivative(x)?;
        Ok((x - v - target, 1.0 - d))
    };
    let lo0 = alpha;
    // f(x) <= alpha for x >= alpha, so x - f(x) >= x - alpha.
    let mut hi = alpha + target;
    if !f.domain.contains(hi) {
        let edge = f.domain.hi.ok_or(Error::OutOfDomain {
            x: hi,
            domain: f.domain,
        })?;
        hi = if f.domain.hi_closed {
            edge
        } else {
            edge - 1e-12 * (1.0 + edge.abs())
        };
        if phi(hi)?.0 < 0.0 {
            return Err(Error::OutOfDomain {
                x: t,
                domain: Interval {
                    lo: Some(0.0),
                    hi: Some(((hi - f.eval(hi)?) / 2.0).powi(2)),
                    lo_closed: true,
                    hi_closed: f.domain.hi_closed,
                },
            });
        }
    }
    let mut lo = lo0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (v, dv) = phi(x)?;
        if v.abs() <= 4.0 * f64::EPSILON * (1.0 + target + x.abs()) {
            break;
        }
        if v < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - v / dv;
        x = if newton > lo && newton < hi && dv.is_finite() {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 2.0 * f64::EPSILON * (1.0 + x.abs()) {
            break;
        }
    }
    let (fx, dfx) = f.eval_with_derivative(x)?;
    let g = 0.5 * (x + fx);
    let gp = (1.0 + dfx) / ((x - fx) * (1.0 - dfx));
    Ok((g, gp))
}

/// Certifies ellipticity of `rel` on `grid`.
pub fn certify_ellipticity(rel: &RelationSpec, grid: &TGrid) -> Result<EllipticityReport> {
    rel.validate()?;
    grid.validate()?;
    let mut sup = 0.0_f64;
    let mut worst_t = 0.0;
    for &t in &grid.points {
        let (_, gp) = rel.g_and_derivative(t).map_err(|e| e.at_sample(t))?;
        if t == 0.0 && !gp.is_finite() {
            continue;
        }
        let v = 4.0 * t * gp * gp;
        if v.is_nan() {
            return Err(Error::NotElliptic(format!("4 t g'(t)^2 is NaN at t = {t}")).at_sample(t));
        }
        if v > sup {
            sup = v;
            worst_t = t;
        }
    }
    let is_elliptic = sup < 1.0;
    let uniform = sup <= 1.0 - UNIFORM_MARGIN;
    let f_slope_bounds = uniform.then(|| {
        let m = sup.sqrt();
        let l1 = (1.0 - m) / (1.0 + m);
        (l1, 1.0 / l1)
    });
    let g0 = rel.g(0.0).ok();
    let minimal_type = g0.is_some_and(|v| v.abs() <= MINIMAL_TOL);
    let (if_domain, bounded_branch) = domain_and_branch(rel, grid)?;
    Ok(EllipticityReport {
        is_elliptic,
        sup_4tgp2: sup.min(1.0),
        worst_t,
        uniform_constant_lambda: uniform.then_some(sup),
        f_slope_bounds,
        umbilical_alpha: g0.map(f64::abs),
        orientation_flipped: g0.is_some_and(|v| v < 0.0),
        minimal_type,
        if_domain,
        bounded_branch,
        grid: GridInfo {
            t_max: grid.t_max,
            samples: grid.points.len(),
            spacing: "log".into(),
        },
    })
}

fn branch_of_domain(d: &Interval) -> BoundedBranch {
    match (d.lo, d.hi) {
        (_, Some(_)) if d.lo.is_none() => BoundedBranch::TPlusGBounded,
        (Some(_), None) => BoundedBranch::TMinusGBounded,
        _ => BoundedBranch::Neither,
    }
}

/// Decade-increment test on `v(T/100), v(T/10), v(T)`. Returns the
/// extrapolated limit when the increments shrink geometrically.
fn bounded_limit(v: impl Fn(f64) -> Result<f64>, t_max: f64) -> Result<Option<f64>> {
    let (a, b, c) = (v(t_max / 100.0)?, v(t_max / 10.0)?, v(t_max)?);
    let (d1, d2) = (b - a, c - b);
    if d2.abs() > 0.5 * d1.abs() + 1e-12 {
        return Ok(None);
    }
    if d1 == 0.0 {
        return Ok(Some(c));
    }
    let r = d2 / d1;
    Ok(Some(c + d2 * r / (1.0 - r)))
}

fn domain_and_branch(rel: &RelationSpec, grid: &TGrid) -> Result<(Interval, BoundedBranch)> {
    if let Some(f) = rel.f_function() {
        let d = f.domain;
        return Ok((d, branch_of_domain(&d)));
    }
    let plus = |t: f64| rel.g(t).map(|g| g + t.sqrt());
    let minus = |t: f64| rel.g(t).map(|g| g - t.sqrt());
    let hi = bounded_limit(plus, grid.t_max)?;
    let lo = bounded_limit(minus, grid.t_max)?;
    let d = Interval::open(lo, hi);
    Ok((d, branch_of_domain(&d)))
}

/// Samples the diagram curve `{g(t) +- sqrt(t)}` of a g-form relation into
/// an f-form with `f(g + sqrt t) = g - sqrt t`.
pub fn g_to_f(rel: &RelationSpec, grid: &TGrid) -> Result<RelationSpec> {
    grid.validate()?;
    let mut ts: Vec<f64> = grid.points.clone();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    if ts[0] != 0.0 {
        ts.insert(0, 0.0);
    }
    let mut plus = Vec::with_capacity(ts.len());
    let mut minus = Vec::with_capacity(ts.len());
    for &t in &ts {
        let (g, gp) = rel.g_and_derivative(t).map_err(|e| e.at_sample(t))?;
        let root = t.sqrt();
        let u = if t == 0.0 { 0.0 } else { 2.0 * root * gp };
        if !(u.abs() < 1.0) {
            return Err(Error::NotElliptic(format!(
                "2 sqrt(t) g'(t) = {u} at t = {t}, branch monotonicity fails"
            )));
        }
        plus.push((g + root, (u - 1.0) / (u + 1.0)));
        minus.push((g - root, (u + 1.0) / (u - 1.0)));
    }
    for k in 1..ts.len() {
        if !(plus[k].0 - plus[k - 1].0 > MONOTONE_MARGIN) {
            return Err(Error::NotElliptic(format!(
                "g(t) + sqrt(t) not strictly increasing between t = {} and t = {}",
                ts[k - 1],
                ts[k]
            )));
        }
        if !(minus[k - 1].0 - minus[k].0 > MONOTONE_MARGIN) {
            return Err(Error::NotElliptic(format!(
                "g(t) - sqrt(t) not strictly decreasing between t = {} and t = {}",
                ts[k - 1],
                ts[k]
            )));
        }
    }
    let n = ts.len();
    let mut xs = Vec::with_capacity(2 * n - 1);
    let mut vs = Vec::with_capacity(2 * n - 1);
    let mut ds = Vec::with_capacity(2 * n - 1);
    for k in (1..n).rev() {
        xs.push(minus[k].0);
        vs.push(plus[k].0);
        ds.push(minus[k].1);
    }
    xs.push(plus[0].0);
    vs.push(plus[0].0);
    ds.push(-1.0);
    for k in 1..n {
        xs.push(plus[k].0);
        vs.push(minus[k].0);
        ds.push(plus[k].1);
    }
    Ok(RelationSpec::F {
        f: ScalarFunction::sampled(HermiteSamples::new(xs, vs, ds)?),
    })
}

/// Samples `t = (x - f)^2 / 4`, `g = (x + f) / 2` over `x_grid` into a
/// g-form relation.
pub fn f_to_g(rel: &RelationSpec, x_grid: &[f64]) -> Result<RelationSpec> {
    let f = rel
        .f_function()
        .ok_or_else(|| Error::Invalid("f_to_g needs a relation with a known f".into()))?;
    let alpha = fixed_point(&f)
        .ok_or_else(|| Error::NotElliptic("f has no fixed point in its domain".into()))?;
    let mut worst = (alpha, 0.0_f64);
    let mut samples: Vec<(f64, f64, f64)> = Vec::with_capacity(x_grid.len() + 1);
    samples.push((0.0, alpha, f.second_derivative(alpha)? / 4.0));
    for &x in x_grid {
        let (fx, dfx) = f.eval_with_derivative(x).map_err(|e| e.at_sample(x))?;
        if !(dfx < 0.0) {
            return Err(Error::NotElliptic(format!("f'({x}) = {dfx} is not negative")));
        }
        let back = f.eval(fx).map_err(|e| e.at_sample(fx))?;
        let dev = (back - x).abs();
        if dev > worst.1 {
            worst = (x, dev);
        }
        let gap = x - fx;
        if gap.abs() <= 1e-12 * (1.0 + x.abs()) {
            continue;
        }
        let t = gap * gap / 4.0;
        let g = 0.5 * (x + fx);
        let gp = (1.0 + dfx) / (gap * (1.0 - dfx));
        samples.push((t, g, gp));
    }
    if worst.1 > SYMMETRY_TOL {
        return Err(Error::Symmetry {
            x: worst.0,
            deviation: worst.1,
        });
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ts = Vec::with_capacity(samples.len());
    let mut gs = Vec::with_capacity(samples.len());
    let mut gps = Vec::with_capacity(samples.len());
    for (t, g, gp) in samples {
        if let Some(&last) = ts.last() {
            if t - last <= 1e-12 * t.max(1e-300) {
                continue;
            }
        }
        ts.push(t);
        gs.push(g);
        gps.push(gp);
    }
    Ok(RelationSpec::G {
        g: ScalarFunction::sampled(HermiteSamples::new(ts, gs, gps)?),
    })
}

/// `g(0)`, the common value of both principal curvatures at umbilics,
/// reported for the orientation in which it is nonnegative.
pub fn umbilical_constant(rel: &RelationSpec) -> Option<f64> {
    match rel {
        RelationSpec::F { f } => fixed_point(f).map(f64::abs),
        _ => rel.g(0.0).ok().map(f64::abs),
    }
}

/// Wedge `m1 x <= y <= m2 x` containing the graph of `f` for a uniformly
/// elliptic relation of minimal type, with `m1 = -Lambda2`, `m2 = -Lambda1`.
pub fn wedge_for_uniform_minimal(rel: &RelationSpec) -> Result<(f64, f64)> {
    let grid = rel.default_grid();
    let report = certify_ellipticity(rel, &grid)?;
    if !report.minimal_type {
        return Err(Error::Invalid(format!(
            "relation is not of minimal type (g(0) = {:?})",
            report.umbilical_alpha
        )));
    }
    let (l1, l2) = report.f_slope_bounds.ok_or_else(|| {
        Error::NotElliptic(format!(
            "relation is not uniformly elliptic (sup 4tg'^2 = {})",
            report.sup_4tgp2
        ))
    })?;
    let (m1, m2) = (-l2, -l1);
    let f = match rel.f_function() {
        Some(f) => f,
        None => match g_to_f(rel, &grid)? {
            RelationSpec::F { f } => f,
            _ => unreachable!(),
        },
    };
    for x in wedge_probe_points(&f.domain) {
        let y = f.eval(x)?;
        let ratio = y / x;
        if ratio < m1 - 1e-9 || ratio > m2 + 1e-9 {
            return Err(Error::Invalid(format!(
                "f({x})/{x} = {ratio} escapes the wedge [{m1}, {m2}]"
            )));
        }
    }
    Ok((m1, m2))
}

fn wedge_probe_points(d: &Interval) -> Vec<f64> {
    let mut out = Vec::new();
    for k in -40..=40 {
        let mag = 10f64.powf(k as f64 / 8.0);
        for x in [mag, -mag] {
            if d.contains(x) {
                out.push(x);
            }
        }
    }
    out
}
