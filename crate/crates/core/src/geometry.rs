//! Test surfaces: parallel surfaces and the curvature map `F_a`, relation
//! conjugation, rotational profiles, parametric curvature evaluation and
//! angle functions.

use nalgebra::{Matrix2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{mobius_shift, Expr, Interval, ScalarFunction};
use crate::jets::curvatures_of_jet;
use crate::patch::{GraphPatch, NodeKind};
use crate::relation::{g_to_f, RelationSpec};

/// Principal curvatures with `k1 >= k2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvaturePair {
    pub k1: f64,
    pub k2: f64,
}

impl CurvaturePair {
    pub fn new(a: f64, b: f64) -> Self {
        if a >= b {
            CurvaturePair { k1: a, k2: b }
        } else {
            CurvaturePair { k1: b, k2: a }
        }
    }

    pub fn mean(&self) -> f64 {
        0.5 * (self.k1 + self.k2)
    }

    pub fn gauss(&self) -> f64 {
        self.k1 * self.k2
    }
}

/// `F_a(t) = t / (1 - a t)`.
pub fn f_a(t: f64, a: f64) -> Result<f64> {
    mobius_shift(t, a).map(|(v, _)| v)
}

/// `F_{-a}`, the inverse of [`f_a`].
pub fn f_a_inverse(t: f64, a: f64) -> Result<f64> {
    f_a(t, -a)
}

/// Distance and regularity margin of a parallel surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParallelParams {
    pub a: f64,
    pub epsilon: f64,
}

impl ParallelParams {
    /// `t0 = 1 / a`, the curvature value at which the offset degenerates.
    pub fn t0(&self) -> f64 {
        1.0 / self.a
    }

    /// `|k_i - t0| >= epsilon` for both curvatures.
    pub fn admits(&self, pair: &CurvaturePair) -> bool {
        let t0 = self.t0();
        (pair.k1 - t0).abs() >= self.epsilon && (pair.k2 - t0).abs() >= self.epsilon
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParallelPair {
    pub pair: CurvaturePair,
    /// `(1 - a k1)^2` and `(1 - a k2)^2`, the metric stretch along each
    /// principal direction.
    pub metric_factors: (f64, f64),
}

/// Principal curvatures of the parallel surface at signed distance `a`.
pub fn parallel_curvatures(pair: &CurvaturePair, a: f64) -> Result<ParallelPair> {
    let k1 = f_a(pair.k1, a).map_err(|_| Error::Pole {
        x: pair.k1,
        what: format!("k1 = {} hits 1 - a k1 = 0 for a = {a}", pair.k1),
    })?;
    let k2 = f_a(pair.k2, a).map_err(|_| Error::Pole {
        x: pair.k2,
        what: format!("k2 = {} hits 1 - a k2 = 0 for a = {a}", pair.k2),
    })?;
    Ok(ParallelPair {
        pair: CurvaturePair::new(k1, k2),
        metric_factors: ((1.0 - a * pair.k1).powi(2), (1.0 - a * pair.k2).powi(2)),
    })
}

/// Coefficients of `2 alpha H + beta K = delta` after offsetting by `a`,
/// from the product `[[1,0],[-a,1]] [[-alpha,delta],[beta,alpha]] [[1,0],[a,1]]`.
pub fn conjugate_linear(alpha: f64, beta: f64, delta: f64, a: f64) -> (f64, f64, f64) {
    let m = Matrix2::new(-alpha, delta, beta, alpha);
    let left = Matrix2::new(1.0, 0.0, -a, 1.0);
    let right = Matrix2::new(1.0, 0.0, a, 1.0);
    let p = left * m * right;
    // p = [[-alpha', delta'], [beta', alpha']]
    (p[(1, 1)], p[(1, 0)], p[(0, 1)])
}

/// Image of an interval under `F_a`, provided the pole `1/a` is not in its
/// closure.
fn image_under_f_a(d: &Interval, a: f64) -> Result<Interval> {
    if a == 0.0 {
        return Ok(*d);
    }
    let pole = 1.0 / a;
    let below = d.hi.is_some_and(|h| h < pole);
    let above = d.lo.is_some_and(|l| l > pole);
    if !below && !above {
        return Err(Error::Pole {
            x: pole,
            what: format!("1/a = {pole} lies in the closure of {d}"),
        });
    }
    let map = |v: Option<f64>| match v {
        Some(x) => f_a(x, a),
        None => Ok(-1.0 / a),
    };
    Ok(Interval {
        lo: Some(map(d.lo)?),
        hi: Some(map(d.hi)?),
        lo_closed: d.lo_closed && d.lo.is_some(),
        hi_closed: d.hi_closed && d.hi.is_some(),
    })
}

/// The relation satisfied by parallel surfaces at distance `a` of surfaces
/// satisfying `rel`: `f -> F_a . f . F_{-a}`.
pub fn conjugate_relation(rel: &RelationSpec, a: f64) -> Result<RelationSpec> {
    if a == 0.0 {
        return Ok(rel.clone());
    }
    match *rel {
        RelationSpec::Cmc { h0 } => {
            let (al, be, de) = conjugate_linear(1.0, 0.0, 2.0 * h0, a);
            Ok(linear_or_cmc(al, be, de))
        }
        RelationSpec::Linear { alpha, beta, delta } => {
            let (al, be, de) = conjugate_linear(alpha, beta, delta, a);
            Ok(RelationSpec::Linear {
                alpha: al,
                beta: be,
                delta: de,
            })
        }
        RelationSpec::F { ref f } => Ok(RelationSpec::F {
            f: ScalarFunction::closed(
                Expr::Conjugated {
                    inner: Box::new(f.clone()),
                    a,
                },
                image_under_f_a(&f.domain, a)?,
            ),
        }),
        RelationSpec::G { .. } => conjugate_relation(&g_to_f(rel, &rel.default_grid())?, a),
    }
}

fn linear_or_cmc(alpha: f64, beta: f64, delta: f64) -> RelationSpec {
    if beta == 0.0 && alpha != 0.0 {
        RelationSpec::Cmc {
            h0: delta / (2.0 * alpha),
        }
    } else {
        RelationSpec::Linear { alpha, beta, delta }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub s: f64,
    pub r: f64,
    pub z: f64,
    pub theta: f64,
    /// `theta'`
    pub kappa_m: f64,
    /// `sin(theta) / r`
    pub kappa_p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Truncation {
    ReachedEnd,
    Axis,
    DomainExit { message: String },
}

/// Meridian of a rotational surface, `(r(s), z(s))` with tangent angle
/// `theta(s)` and unit normal `(-sin theta, cos theta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub samples: Vec<ProfileSample>,
    pub step: f64,
    pub truncation: Truncation,
}

pub const R_MIN: f64 = 1e-6;
pub const DEFAULT_STEP: f64 = 1e-3;

impl ProfileCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,r,z,theta,kappa_m,kappa_p\n");
        for p in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.s, p.r, p.z, p.theta, p.kappa_m, p.kappa_p
            ));
        }
        out
    }

    /// Angle function `<N, e3> = cos(theta)` along the meridian.
    pub fn angle_function(&self) -> Vec<f64> {
        self.samples.iter().map(|p| p.theta.cos()).collect()
    }
}

/// Integrates `r' = cos th`, `z' = sin th`, `th' = f(sin th / r)` with
/// classical fixed-step RK4 from `seed = (r0, z0, theta0)`.
pub fn rotational_profile(
    rel: &RelationSpec,
    seed: (f64, f64, f64),
    step: f64,
    s_max: f64,
) -> Result<ProfileCurve> {
    let f = rel
        .f_function()
        .ok_or_else(|| Error::Invalid("rotational profiles need a relation with an explicit f".into()))?;
    if !(step > 0.0) || !(s_max > 0.0) {
        return Err(Error::Invalid("step and s_max must be positive".into()));
    }
    if !(seed.0 > 0.0) {
        return Err(Error::Invalid(format!("seed radius {} must be positive", seed.0)));
    }
    let rhs = |y: [f64; 3]| -> Result<([f64; 3], f64)> {
        let [r, _, th] = y;
        if !(r > 0.0) {
            return Err(Error::Invalid("profile reached the axis".into()));
        }
        let kp = th.sin() / r;
        let km = f.eval(kp)?;
        Ok(([th.cos(), th.sin(), km], kp))
    };
    let mut y = [seed.0, seed.1, seed.2];
    let mut s = 0.0;
    let (d0, kp0) = match rhs(y) {
        Ok(v) => v,
        Err(e) => {
            return Err(Error::Invalid(format!("seed is outside the domain of f: {e}")));
        }
    };
    let mut samples = vec![ProfileSample {
        s,
        r: y[0],
        z: y[1],
        theta: y[2],
        kappa_m: d0[2],
        kappa_p: kp0,
    }];
    let steps = (s_max / step).round() as usize;
    let mut truncation = Truncation::ReachedEnd;
    let add = |y: [f64; 3], k: [f64; 3], c: f64| [y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2]];
    for _ in 0..steps {
        let attempt = (|| -> Result<[f64; 3]> {
            let (k1, _) = rhs(y)?;
            let (k2, _) = rhs(add(y, k1, 0.5 * step))?;
            let (k3, _) = rhs(add(y, k2, 0.5 * step))?;
            let (k4, _) = rhs(add(y, k3, step))?;
            Ok([
                y[0] + step / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                y[1] + step / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
                y[2] + step / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
            ])
        })();
        let next = match attempt {
            Ok(v) => v,
            Err(e) => {
                truncation = if y[0] < 10.0 * step {
                    Truncation::Axis
                } else {
                    Truncation::DomainExit {
                        message: e.to_string(),
                    }
                };
                break;
            }
        };
        if next[0] < R_MIN {
            truncation = Truncation::Axis;
            break;
        }
        let (d, kp) = match rhs(next) {
            Ok(v) => v,
            Err(e) => {
                truncation = Truncation::DomainExit {
                    message: e.to_string(),
                };
                break;
            }
        };
        y = next;
        s += step;
        samples.push(ProfileSample {
            s,
            r: y[0],
            z: y[1],
            theta: y[2],
            kappa_m: d[2],
            kappa_p: kp,
        });
    }
    Ok(ProfileCurve {
        samples,
        step,
        truncation,
    })
}

/// Five-point first derivative of uniformly spaced samples; `None` within
/// two samples of either end.
fn five_point_derivative(v: &[f64], h: f64) -> Vec<Option<f64>> {
    (0..v.len())
        .map(|k| {
            (k >= 2 && k + 2 < v.len())
                .then(|| (v[k - 2] - 8.0 * v[k - 1] + 8.0 * v[k + 1] - v[k + 2]) / (12.0 * h))
        })
        .collect()
}

/// Meridian curvature `d theta / ds` by five-point differences of the
/// stored angles.
pub fn meridian_curvature_fd(profile: &ProfileCurve) -> Vec<Option<f64>> {
    let th: Vec<f64> = profile.samples.iter().map(|p| p.theta).collect();
    five_point_derivative(&th, profile.step)
}

/// `r sin(theta) - h0 r^2`, constant along CMC profiles.
pub fn cmc_first_integral(profile: &ProfileCurve, h0: f64) -> Vec<f64> {
    profile
        .samples
        .iter()
        .map(|p| p.r * p.theta.sin() - h0 * p.r * p.r)
        .collect()
}

/// Arclength of the first return of `(r, theta)` to its initial value,
/// refined by golden-section search on the cubic Hermite interpolant.
pub fn detect_period(profile: &ProfileCurve, tol: f64) -> Option<f64> {
    let smp = &profile.samples;
    let first = smp.first()?;
    let dist = |p: &ProfileSample| (p.r - first.r).powi(2) + (p.theta - first.theta).powi(2);
    let d: Vec<f64> = smp.iter().map(dist).collect();
    let leave = d.iter().position(|&v| v > 1e-2)?;
    let k = (leave.max(1)..d.len() - 1).find(|&k| d[k] <= d[k - 1] && d[k] <= d[k + 1] && d[k] < 1e-2)?;
    let interp = |s: f64| -> (f64, f64) {
        let idx = if s < smp[k].s { k - 1 } else { k };
        let (a, b) = (&smp[idx], &smp[idx + 1]);
        let h = b.s - a.s;
        let u = (s - a.s) / h;
        let h00 = 2.0 * u.powi(3) - 3.0 * u * u + 1.0;
        let h10 = u.powi(3) - 2.0 * u * u + u;
        let h01 = -2.0 * u.powi(3) + 3.0 * u * u;
        let h11 = u.powi(3) - u * u;
        let r = h00 * a.r + h10 * h * a.theta.cos() + h01 * b.r + h11 * h * b.theta.cos();
        let th = h00 * a.theta + h10 * h * a.kappa_m + h01 * b.theta + h11 * h * b.kappa_m;
        (r, th)
    };
    let obj = |s: f64| {
        let (r, th) = interp(s);
        (r - first.r).powi(2) + (th - first.theta).powi(2)
    };
    let (mut lo, mut hi) = (smp[k - 1].s, smp[k + 1].s);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut e = lo + g * (hi - lo);
    for _ in 0..100 {
        if obj(c) < obj(e) {
            hi = e;
        } else {
            lo = c;
        }
        c = hi - g * (hi - lo);
        e = lo + g * (hi - lo);
    }
    let s = 0.5 * (lo + hi);
    (obj(s).sqrt() <= tol).then_some(s)
}

/// Parallel curve `X + a N` of a meridian, sampled at the profile's
/// arclength parameter.
pub fn offset_profile(profile: &ProfileCurve, a: f64) -> Vec<(f64, f64)> {
    profile
        .samples
        .iter()
        .map(|p| (p.r - a * p.theta.sin(), p.z + a * p.theta.cos()))
        .collect()
}

/// Meridian and parallel curvatures of a sampled curve `(r, z)` on a
/// uniform parameter grid of spacing `h`, with the normal on the same side
/// as the base profile's. Differences are five-point.
pub fn discrete_profile_curvatures(points: &[(f64, f64)], h: f64) -> Vec<Option<(f64, f64)>> {
    let r: Vec<f64> = points.iter().map(|p| p.0).collect();
    let z: Vec<f64> = points.iter().map(|p| p.1).collect();
    let dr = five_point_derivative(&r, h);
    let dz = five_point_derivative(&z, h);
    let n = points.len();
    let mut ddr = vec![None; n];
    let mut ddz = vec![None; n];
    for k in 2..n.saturating_sub(2) {
        ddr[k] = Some((-r[k - 2] + 16.0 * r[k - 1] - 30.0 * r[k] + 16.0 * r[k + 1] - r[k + 2]) / (12.0 * h * h));
        ddz[k] = Some((-z[k - 2] + 16.0 * z[k - 1] - 30.0 * z[k] + 16.0 * z[k + 1] - z[k + 2]) / (12.0 * h * h));
    }
    (0..n)
        .map(|k| {
            let (xr, xz, yr, yz) = (dr[k]?, dz[k]?, ddr[k]?, ddz[k]?);
            let speed = xr.hypot(xz);
            let km = (xr * yz - xz * yr) / speed.powi(3);
            let kp = (xz / speed) / r[k];
            Some((km, kp))
        })
        .collect()
}

/// Principal curvatures of a parametric surface at `(u, v)` by five-point
/// differences of step `h`, for the normal `X_u x X_v / |X_u x X_v|`.
pub fn parametric_curvatures(
    x: &dyn Fn(f64, f64) -> Vector3<f64>,
    u: f64,
    v: f64,
    h: f64,
) -> Result<CurvaturePair> {
    let (hh, kk) = parametric_hk(x, u, v, h)?;
    let disc = (hh * hh - kk).max(0.0).sqrt();
    Ok(CurvaturePair::new(hh + disc, hh - disc))
}

/// Mean and Gauss curvature of a parametric surface, same conventions as
/// [`parametric_curvatures`].
pub fn parametric_hk(
    x: &dyn Fn(f64, f64) -> Vector3<f64>,
    u: f64,
    v: f64,
    h: f64,
) -> Result<(f64, f64)> {
    let d1 = |f: &dyn Fn(f64) -> Vector3<f64>| {
        (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h)
    };
    let d2 = |f: &dyn Fn(f64) -> Vector3<f64>| {
        (-f(-2.0 * h) + 16.0 * f(-h) - 30.0 * f(0.0) + 16.0 * f(h) - f(2.0 * h)) / (12.0 * h * h)
    };
    let xu = d1(&|e| x(u + e, v));
    let xv = d1(&|e| x(u, v + e));
    let xuu = d2(&|e| x(u + e, v));
    let xvv = d2(&|e| x(u, v + e));
    let xuv = d1(&|e| d1(&|f| x(u + e, v + f)));
    let n = xu.cross(&xv);
    let norm = n.norm();
    if !(norm > 0.0) {
        return Err(Error::Invalid(format!("degenerate parametrization at ({u}, {v})")));
    }
    let n = n / norm;
    let (e, f, g) = (xu.dot(&xu), xu.dot(&xv), xv.dot(&xv));
    let (l, m, nn) = (xuu.dot(&n), xuv.dot(&n), xvv.dot(&n));
    let det = e * g - f * f;
    let kk = (l * nn - m * m) / det;
    let hh = (e * nn - 2.0 * f * m + g * l) / (2.0 * det);
    Ok((hh, kk))
}

/// `<N, e3> = 1 / sqrt(1 + p^2 + q^2)` at interior nodes of a graph.
pub fn angle_function_patch(patch: &GraphPatch) -> Vec<Option<f64>> {
    (0..patch.grid.len())
        .map(|k| {
            (patch.kind(k) == NodeKind::Interior).then(|| {
                let j = patch.jet_at(k);
                1.0 / (1.0 + j.p * j.p + j.q * j.q).sqrt()
            })
        })
        .collect()
}

/// Curvature pairs at interior nodes of a graph patch.
pub fn patch_curvature_pairs(patch: &GraphPatch) -> Vec<CurvaturePair> {
    patch
        .interior_nodes()
        .into_iter()
        .map(|k| {
            let (h, kk) = curvatures_of_jet(&patch.jet_at(k));
            let root = (h * h - kk).max(0.0).sqrt();
            CurvaturePair::new(h + root, h - root)
        })
        .collect()
}
