//! Curvature diagrams: quasiconformality constants, wedges, `R_phi`
//! regions, Beltrami coefficients and Gauss-map ratios.

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::geometry::{patch_curvature_pairs, CurvaturePair, ProfileCurve};
use crate::patch::GraphPatch;

/// Curvatures below this magnitude count as exact zeros.
pub const ZERO_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagramSource {
    Patch,
    Profile,
    Mesh,
    Synthetic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureDiagram {
    pub samples: Vec<CurvaturePair>,
    pub source: DiagramSource,
}

impl CurvatureDiagram {
    pub fn new(samples: Vec<CurvaturePair>, source: DiagramSource) -> Self {
        CurvatureDiagram { samples, source }
    }

    /// Pairs at the interior nodes of a graph patch.
    pub fn from_patch(patch: &GraphPatch) -> Self {
        CurvatureDiagram::new(patch_curvature_pairs(patch), DiagramSource::Patch)
    }

    pub fn from_profile(profile: &ProfileCurve) -> Self {
        let samples = profile
            .samples
            .iter()
            .map(|p| CurvaturePair::new(p.kappa_m, p.kappa_p))
            .collect();
        CurvatureDiagram::new(samples, DiagramSource::Profile)
    }

    /// `{(x, f(x))}` for the given abscissae; points outside the domain of
    /// `f` are dropped.
    pub fn from_relation(f: &ScalarFunction, xs: &[f64]) -> Self {
        let samples = xs
            .iter()
            .filter_map(|&x| f.eval(x).ok().map(|y| CurvaturePair::new(x, y)))
            .collect();
        CurvatureDiagram::new(samples, DiagramSource::Synthetic)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        CurvatureDiagram {
            samples: self
                .samples
                .iter()
                .map(|p| CurvaturePair::new(lambda * p.k1, lambda * p.k2))
                .collect(),
            source: self.source,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k1,k2\n");
        for p in &self.samples {
            out.push_str(&format!("{},{}\n", p.k1, p.k2));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QcClass {
    PlaneLike,
    NegativeBranch,
    PositiveBranch,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QcReport {
    pub classification: QcClass,
    pub gamma_star: Option<f64>,
    pub mu: Option<f64>,
    pub wedge_slopes: Option<(f64, f64)>,
    /// Samples at the origin, compatible with every branch.
    pub neutral: usize,
    /// Umbilic samples left out because the rest of the diagram lies on
    /// the negative branch.
    pub umbilics_exempted: usize,
    /// Samples with exactly one vanishing curvature; no `gamma` admits them.
    pub degenerate: usize,
}

/// `(k1^2 + k2^2) / (2 k1 k2)`; `None` when the product vanishes.
pub fn feasibility_ratio(p: &CurvaturePair) -> Option<f64> {
    let prod = p.k1 * p.k2;
    (prod != 0.0).then(|| (p.k1 * p.k1 + p.k2 * p.k2) / (2.0 * prod))
}

/// Smallest `gamma` on each branch for which `k1^2 + k2^2 <= 2 gamma k1 k2`
/// holds at every sample.
pub fn qc_classify(d: &CurvatureDiagram) -> QcReport {
    let mut neutral = 0;
    let mut degenerate = 0;
    let mut neg: Option<f64> = None;
    let mut pos: Option<f64> = None;
    let mut umbilics = 0;
    let mut non_umbilic_pos = false;
    for p in &d.samples {
        let z1 = p.k1.abs() <= ZERO_TOL;
        let z2 = p.k2.abs() <= ZERO_TOL;
        if z1 && z2 {
            neutral += 1;
            continue;
        }
        if z1 || z2 {
            degenerate += 1;
            continue;
        }
        let r = feasibility_ratio(p).expect("nonzero product");
        if r < 0.0 {
            // gamma <= r for every negative-product sample
            neg = Some(neg.map_or(r, |g: f64| g.min(r)));
        } else {
            pos = Some(pos.map_or(r, |g: f64| g.max(r)));
            if (p.k1 - p.k2).abs() <= ZERO_TOL * (1.0 + p.k1.abs()) {
                umbilics += 1;
            } else {
                non_umbilic_pos = true;
            }
        }
    }
    let mut report = QcReport {
        classification: QcClass::Infeasible,
        gamma_star: None,
        mu: None,
        wedge_slopes: None,
        neutral,
        umbilics_exempted: 0,
        degenerate,
    };
    if degenerate > 0 {
        return report;
    }
    match (neg, pos) {
        (None, None) => report.classification = QcClass::PlaneLike,
        (Some(g), None) => set_negative(&mut report, g),
        (Some(g), Some(_)) if !non_umbilic_pos => {
            set_negative(&mut report, g);
            report.umbilics_exempted = umbilics;
        }
        (None, Some(g)) => {
            report.classification = QcClass::PositiveBranch;
            report.gamma_star = Some(g);
        }
        (Some(_), Some(_)) => {}
    }
    report
}

fn set_negative(report: &mut QcReport, g: f64) {
    report.classification = QcClass::NegativeBranch;
    report.gamma_star = Some(g);
    report.mu = gamma_mu(g).ok();
    report.wedge_slopes = gamma_to_wedge(g).ok();
}

/// `mu = sqrt((gamma + 1) / (gamma - 1))` for `gamma <= -1`.
pub fn gamma_mu(gamma: f64) -> Result<f64> {
    if !(gamma <= -1.0) {
        return Err(Error::Invalid(format!("gamma = {gamma} must be <= -1")));
    }
    Ok(((gamma + 1.0) / (gamma - 1.0)).sqrt())
}

/// `gamma = (mu^2 + 1) / (mu^2 - 1)` for `mu` in `[0, 1)`.
pub fn mu_gamma(mu: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::Invalid(format!("mu = {mu} must lie in [0, 1)")));
    }
    let m2 = mu * mu;
    Ok((m2 + 1.0) / (m2 - 1.0))
}

/// Slopes `gamma -+ sqrt(gamma^2 - 1)` of the lines bounding the wedge
/// where equality holds; `m1 <= m2 < 0` and `m1 m2 = 1`.
pub fn gamma_to_wedge(gamma: f64) -> Result<(f64, f64)> {
    if !(gamma <= -1.0) {
        return Err(Error::Invalid(format!("gamma = {gamma} must be <= -1")));
    }
    let m1 = gamma - ((gamma - 1.0) * (gamma + 1.0)).sqrt();
    Ok((m1, 1.0 / m1))
}

/// `R_phi = {x >= 0, phi1(x) <= y <= phi2(x)}`, or its reflection
/// `R_phi* = {(-y, -x) : (x, y) in R_phi}` when `starred`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiRegion {
    pub phi1: ScalarFunction,
    pub phi2: ScalarFunction,
    pub starred: bool,
}

impl PhiRegion {
    /// Checks `s0 <= phi1 <= phi2 <= 0`, `phi_i(0) = 0` and monotone
    /// decrease on the given abscissae.
    pub fn validate(&self, s0: f64, xs: &[f64]) -> Result<()> {
        for phi in [&self.phi1, &self.phi2] {
            if phi.eval(0.0)?.abs() > ZERO_TOL {
                return Err(Error::Invalid("phi(0) must vanish".into()));
            }
        }
        let mut prev: Option<(f64, f64)> = None;
        for &x in xs {
            let (a, b) = (self.phi1.eval(x)?, self.phi2.eval(x)?);
            if !(s0 <= a && a <= b && b <= 0.0) {
                return Err(Error::Invalid(format!("ordering s0 <= phi1 <= phi2 <= 0 fails at x = {x}")));
            }
            if let Some((pa, pb)) = prev {
                if a > pa || b > pb {
                    return Err(Error::Invalid(format!("phi increases near x = {x}")));
                }
            }
            prev = Some((a, b));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Offender {
    pub index: usize,
    pub pair: CurvaturePair,
    pub violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub contained: bool,
    pub worst: Option<Offender>,
}

/// Membership of every sample in the region, with the worst violation.
pub fn region_membership(d: &CurvatureDiagram, reg: &PhiRegion) -> Membership {
    let mut worst: Option<Offender> = None;
    for (index, p) in d.samples.iter().enumerate() {
        let (x, y) = if reg.starred { (-p.k2, -p.k1) } else { (p.k1, p.k2) };
        let violation = match (reg.phi1.eval(x), reg.phi2.eval(x)) {
            _ if x < 0.0 => -x,
            (Ok(lo), Ok(hi)) => (lo - y).max(y - hi),
            _ => f64::INFINITY,
        };
        if violation > 0.0 && worst.as_ref().is_none_or(|w| violation > w.violation) {
            worst = Some(Offender {
                index,
                pair: *p,
                violation,
            });
        }
    }
    Membership {
        contained: worst.is_none(),
        worst,
    }
}

/// Conformal factor and Beltrami coefficient of `E dx^2 + 2F dx dy + G dy^2`.
pub fn beltrami_of_metric(e: f64, f: f64, g: f64) -> Result<(f64, Complex64)> {
    let det = e * g - f * f;
    if !(e > 0.0 && g > 0.0 && det > 0.0) {
        return Err(Error::Invalid(format!("metric ({e}, {f}, {g}) is not positive definite")));
    }
    let rho = (e + g + 2.0 * det.sqrt()) / 4.0;
    let mu = Complex64::new(e - g, 2.0 * f) / (4.0 * rho);
    if !(mu.norm() < 1.0) {
        return Err(Error::Invalid(format!("|mu| = {} is not below 1", mu.norm())));
    }
    Ok((rho, mu))
}

/// `((k1 + k2) / (k1 - k2))^2`, infinite at umbilics.
pub fn gauss_beltrami_ratio(pair: &CurvaturePair) -> f64 {
    let diff = pair.k1 - pair.k2;
    if diff == 0.0 {
        return f64::INFINITY;
    }
    ((pair.k1 + pair.k2) / diff).powi(2)
}

/// `|g_zbar|^2 / |g_z|^2` for the stereographic projection
/// `g = (N1 + i N2) / (1 - N3)` of the normal `X_u x X_v / |X_u x X_v|`,
/// with `z = u + i v`, by centered differences of step `h`.
pub fn discrete_gauss_beltrami_ratio(x: &dyn Fn(f64, f64) -> Vector3<f64>, u: f64, v: f64, h: f64) -> Result<f64> {
    let eps = 1e-4 * h;
    let gauss = |u: f64, v: f64| -> Result<Complex64> {
        let xu = (x(u + eps, v) - x(u - eps, v)) / (2.0 * eps);
        let xv = (x(u, v + eps) - x(u, v - eps)) / (2.0 * eps);
        let n = xu.cross(&xv);
        let norm = n.norm();
        if !(norm > 0.0) {
            return Err(Error::Invalid(format!("degenerate parametrization at ({u}, {v})")));
        }
        let n = n / norm;
        if n.z >= 1.0 - 1e-12 {
            return Err(Error::Pole {
                x: n.z,
                what: "normal at the projection pole".into(),
            });
        }
        Ok(Complex64::new(n.x, n.y) / (1.0 - n.z))
    };
    let gu = (gauss(u + h, v)? - gauss(u - h, v)?) / (2.0 * h);
    let gv = (gauss(u, v + h)? - gauss(u, v - h)?) / (2.0 * h);
    let i = Complex64::i();
    let gz = 0.5 * (gu - i * gv);
    let gzb = 0.5 * (gu + i * gv);
    Ok(gzb.norm_sqr() / gz.norm_sqr())
}
