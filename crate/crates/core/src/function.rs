//! Scalar functions of one variable used to carry the `g` and `f` of a
//! Weingarten relation.
//!
//! Two representations exist: a small closed-form expression language that
//! covers the analytic families the lab works with, and C¹ cubic Hermite
//! sampling for everything else. Evaluation outside the declared domain is
//! always an error.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An interval of the real line. `None` endpoints are unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    #[serde(default)]
    pub lo_closed: bool,
    #[serde(default)]
    pub hi_closed: bool,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: None,
        hi: None,
        lo_closed: false,
        hi_closed: false,
    };

    /// `[0, ∞)`, the domain of every `g`.
    pub const HALF_LINE: Interval = Interval {
        lo: Some(0.0),
        hi: None,
        lo_closed: true,
        hi_closed: false,
    };

    pub fn open(lo: Option<f64>, hi: Option<f64>) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo: Some(lo),
            hi: Some(hi),
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        let above = match self.lo {
            None => true,
            Some(lo) if self.lo_closed => x >= lo,
            Some(lo) => x > lo,
        };
        let below = match self.hi {
            None => true,
            Some(hi) if self.hi_closed => x <= hi,
            Some(hi) => x < hi,
        };
        above && below
    }

    pub fn is_real_line(&self) -> bool {
        self.lo.is_none() && self.hi.is_none()
    }

    fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { x, domain: *self })
        }
    }

    /// Image under `x ↦ scale * x`.
    pub fn scaled(&self, scale: f64) -> Interval {
        let lo = self.lo.map(|v| v * scale);
        let hi = self.hi.map(|v| v * scale);
        if scale >= 0.0 {
            Interval {
                lo,
                hi,
                ..*self
            }
        } else {
            Interval {
                lo: hi,
                hi: lo,
                lo_closed: self.hi_closed,
                hi_closed: self.lo_closed,
            }
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        match self.lo {
            Some(v) => write!(f, "{open}{v}, ")?,
            None => write!(f, "(-inf, ")?,
        }
        match self.hi {
            Some(v) => write!(f, "{v}{close}"),
            None => write!(f, "inf)"),
        }
    }
}

/// Closed-form expressions. Every variant knows its exact first derivative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "expr", rename_all = "snake_case")]
pub enum Expr {
    Constant {
        value: f64,
    },
    /// `slope * x + intercept`
    Affine { slope: f64, intercept: f64 },
    /// `(a x + b) / (c x + d)`
    Mobius { a: f64, b: f64, c: f64, d: f64 },
    /// `scale * sqrt(a x + b) + offset`
    SqrtAffine {
        scale: f64,
        a: f64,
        b: f64,
        offset: f64,
    },
    /// The mean curvature branch `H(t)` of `2 alpha H + beta K = delta`
    /// written as `H = g(H^2 - K)`; the branch continuous in `beta -> 0`.
    LinearWeingartenG { alpha: f64, beta: f64, delta: f64 },
    /// `output_scale * inner(input_scale * x)`
    Scaled {
        inner: Box<ScalarFunction>,
        input_scale: f64,
        output_scale: f64,
    },
    /// `F_a ∘ inner ∘ F_{-a}` with `F_a(t) = t / (1 - a t)`.
    Conjugated { inner: Box<ScalarFunction>, a: f64 },
}

/// Cubic Hermite data: three parallel arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermiteSamples {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
}

impl HermiteSamples {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, derivatives: Vec<f64>) -> Result<Self> {
        let n = breakpoints.len();
        if n < 2 || values.len() != n || derivatives.len() != n {
            return Err(Error::Invalid(format!(
                "hermite samples need >= 2 points and equal lengths (got {}, {}, {})",
                n,
                values.len(),
                derivatives.len()
            )));
        }
        if let Some(w) = breakpoints.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid(format!(
                "breakpoints not strictly increasing at index {w}: {} then {}",
                breakpoints[w],
                breakpoints[w + 1]
            )));
        }
        if breakpoints
            .iter()
            .chain(&values)
            .chain(&derivatives)
            .any(|v| !v.is_finite())
        {
            return Err(Error::Invalid("hermite samples must be finite".into()));
        }
        Ok(HermiteSamples {
            breakpoints,
            values,
            derivatives,
        })
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.breakpoints.len();
        let k = self.breakpoints.partition_point(|&b| b <= x);
        k.clamp(1, n - 1) - 1
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        let k = self.segment(x);
        let (x0, x1) = (self.breakpoints[k], self.breakpoints[k + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.derivatives[k] * h, self.derivatives[k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let value = h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1;
        let dh00 = 6.0 * s2 - 6.0 * s;
        let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
        let dh01 = -6.0 * s2 + 6.0 * s;
        let dh11 = 3.0 * s2 - 2.0 * s;
        let deriv = (dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1) / h;
        (value, deriv)
    }

    /// Slope of the stored derivatives across the segment containing `x`.
    fn second_derivative(&self, x: f64) -> f64 {
        let k = self.segment(x);
        (self.derivatives[k + 1] - self.derivatives[k])
            / (self.breakpoints[k + 1] - self.breakpoints[k])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    ClosedForm(Expr),
    SampledHermite(HermiteSamples),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarFunction {
    pub representation: Representation,
    pub domain: Interval,
}

impl ScalarFunction {
    pub fn closed(expr: Expr, domain: Interval) -> Self {
        ScalarFunction {
            representation: Representation::ClosedForm(expr),
            domain,
        }
    }

    pub fn constant(value: f64, domain: Interval) -> Self {
        Self::closed(Expr::Constant { value }, domain)
    }

    pub fn sampled(samples: HermiteSamples) -> Self {
        let domain = Interval::closed(
            samples.breakpoints[0],
            *samples.breakpoints.last().expect("non-empty"),
        );
        ScalarFunction {
            representation: Representation::SampledHermite(samples),
            domain,
        }
    }

    pub fn is_closed_form(&self) -> bool {
        match &self.representation {
            Representation::ClosedForm(Expr::Scaled { inner, .. })
            | Representation::ClosedForm(Expr::Conjugated { inner, .. }) => inner.is_closed_form(),
            Representation::ClosedForm(_) => true,
            Representation::SampledHermite(_) => false,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.eval_with_derivative(x).map(|(v, _)| v)
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.eval_with_derivative(x).map(|(_, d)| d)
    }

    pub fn eval_with_derivative(&self, x: f64) -> Result<(f64, f64)> {
        self.domain.check(x)?;
        match &self.representation {
            Representation::SampledHermite(s) => Ok(s.eval(x)),
            Representation::ClosedForm(e) => eval_expr(e, x),
        }
    }

    /// Second derivative. Sampled functions difference their stored first
    /// derivatives; closed forms use a central difference of the exact
    /// derivative.
    pub fn second_derivative(&self, x: f64) -> Result<f64> {
        self.domain.check(x)?;
        match &self.representation {
            Representation::SampledHermite(s) => Ok(s.second_derivative(x)),
            Representation::ClosedForm(_) => {
                let h = 1e-5 * (1.0 + x.abs());
                let (lo, hi) = (x - h, x + h);
                match (self.derivative(lo), self.derivative(hi)) {
                    (Ok(a), Ok(b)) => Ok((b - a) / (2.0 * h)),
                    _ => {
                        // one-sided at a domain edge
                        let d0 = self.derivative(x)?;
                        match self.derivative(hi) {
                            Ok(b) => Ok((b - d0) / h),
                            Err(_) => Ok((d0 - self.derivative(lo)?) / h),
                        }
                    }
                }
            }
        }
    }
}

/// `F_a(t) = t / (1 - a t)`.
pub(crate) fn mobius_shift(t: f64, a: f64) -> Result<(f64, f64)> {
    let den = 1.0 - a * t;
    if den == 0.0 || !den.is_finite() {
        return Err(Error::Pole {
            x: t,
            what: format!("1 - a t = 0 for a = {a}"),
        });
    }
    Ok((t / den, 1.0 / (den * den)))
}

fn eval_expr(e: &Expr, x: f64) -> Result<(f64, f64)> {
    match *e {
        Expr::Constant { value } => Ok((value, 0.0)),
        Expr::Affine { slope, intercept } => Ok((slope * x + intercept, slope)),
        Expr::Mobius { a, b, c, d } => {
            let den = c * x + d;
            if den == 0.0 {
                return Err(Error::Pole {
                    x,
                    what: "mobius denominator vanishes".into(),
                });
            }
            Ok(((a * x + b) / den, (a * d - b * c) / (den * den)))
        }
        Expr::SqrtAffine {
            scale,
            a,
            b,
            offset,
        } => {
            let arg = a * x + b;
            if arg < 0.0 {
                return Err(Error::OutOfDomain {
                    x,
                    domain: Interval::open(None, None),
                });
            }
            let root = arg.sqrt();
            let deriv = if root > 0.0 {
                scale * a / (2.0 * root)
            } else if scale * a == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(scale * a)
            };
            Ok((scale * root + offset, deriv))
        }
        Expr::LinearWeingartenG { alpha, beta, delta } => {
            let disc = alpha * alpha + beta * delta + beta * beta * x;
            if disc <= 0.0 {
                return Err(Error::NotElliptic(format!(
                    "alpha^2 + beta delta + beta^2 t = {disc} <= 0 at t = {x}"
                )));
            }
            let sign = if alpha < 0.0 { -1.0 } else { 1.0 };
            let root = disc.sqrt();
            let value = (delta + beta * x) / (alpha + sign * root);
            Ok((value, sign * beta / (2.0 * root)))
        }
        Expr::Scaled {
            ref inner,
            input_scale,
            output_scale,
        } => {
            let (v, d) = inner.eval_with_derivative(input_scale * x)?;
            Ok((output_scale * v, output_scale * input_scale * d))
        }
        Expr::Conjugated { ref inner, a } => {
            let (w, dw) = mobius_shift(x, -a)?;
            let (y, dy) = inner.eval_with_derivative(w)?;
            let (v, dv) = mobius_shift(y, a)?;
            Ok((v, dv * dy * dw))
        }
    }
}
