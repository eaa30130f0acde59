//! Orlicz functions with derivatives up to order three, and the growth
//! constants (K, C(l), alpha(eps)) measured on log-spaced grids.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{OrliczError, Result};
use crate::grid::GridSpec;
use crate::magnitude::Magnitude;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied closed form. Missing derivatives fall back to central differences.
#[derive(Clone)]
pub struct CustomFunction {
    pub name: String,
    pub eval: ScalarFn,
    pub derivs: [Option<ScalarFn>; 3],
}

#[derive(Clone)]
enum Kind {
    Power(f64),
    ExpWeighted(f64),
    Custom(Arc<CustomFunction>),
}

#[derive(Clone)]
pub struct OrliczFunction {
    kind: Kind,
}

/// Serializable identifier of an Orlicz function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    Power { p: f64 },
    ExpWeighted { p: f64 },
    Custom { name: String },
}

impl FamilySpec {
    pub fn build(&self) -> Result<OrliczFunction> {
        match self {
            FamilySpec::Power { p } => OrliczFunction::power(*p),
            FamilySpec::ExpWeighted { p } => OrliczFunction::exp_weighted(*p),
            FamilySpec::Custom { name } => {
                Err(OrliczError::InvalidParameter(format!("custom family '{name}' cannot be rebuilt from its tag")))
            }
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Power { p } => write!(f, "t^{p}"),
            FamilySpec::ExpWeighted { p } => write!(f, "t^{p}*e^(t-1)"),
            FamilySpec::Custom { name } => write!(f, "{name}"),
        }
    }
}

impl fmt::Debug for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OrliczFunction({})", self.tag())
    }
}

/// p (p-1) ... (p-j+1)
fn falling(p: f64, j: usize) -> f64 {
    (0..j).map(|i| p - i as f64).product()
}

/// d^j/dt^j t^p
fn power_deriv(p: f64, j: usize, t: f64) -> f64 {
    let c = falling(p, j);
    if c == 0.0 {
        return 0.0;
    }
    let e = p - j as f64;
    if t == 0.0 {
        return if e > 0.0 {
            0.0
        } else if e == 0.0 {
            c
        } else {
            f64::INFINITY
        };
    }
    c * t.powf(e)
}

const BINOM: [[f64; 4]; 4] = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]];

impl OrliczFunction {
    /// `M(t) = t^p`.
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(OrliczError::InvalidParameter(format!("power family needs p > 1, got {p}")));
        }
        Ok(OrliczFunction { kind: Kind::Power(p) })
    }

    /// `M(t) = t^p e^(t-1)`.
    pub fn exp_weighted(p: f64) -> Result<Self> {
        if !(p > 3.0 && p.is_finite()) {
            return Err(OrliczError::InvalidParameter(format!("exp-weighted family needs p > 3, got {p}")));
        }
        Ok(OrliczFunction { kind: Kind::ExpWeighted(p) })
    }

    pub fn custom(custom: CustomFunction) -> Self {
        OrliczFunction { kind: Kind::Custom(Arc::new(custom)) }
    }

    pub fn tag(&self) -> FamilySpec {
        match &self.kind {
            Kind::Power(p) => FamilySpec::Power { p: *p },
            Kind::ExpWeighted(p) => FamilySpec::ExpWeighted { p: *p },
            Kind::Custom(c) => FamilySpec::Custom { name: c.name.clone() },
        }
    }

    /// Exponent of the leading power, when the family has one.
    pub fn exponent(&self) -> Option<f64> {
        match self.kind {
            Kind::Power(p) | Kind::ExpWeighted(p) => Some(p),
            Kind::Custom(_) => None,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.deriv(0, t)
    }

    pub fn deriv1(&self, t: f64) -> f64 {
        self.deriv(1, t)
    }

    pub fn deriv2(&self, t: f64) -> f64 {
        self.deriv(2, t)
    }

    pub fn deriv3(&self, t: f64) -> f64 {
        self.deriv(3, t)
    }

    /// `M^(order)(t)` for `order <= 3` and `t >= 0`.
    pub fn deriv(&self, order: usize, t: f64) -> f64 {
        assert!(order <= 3, "derivatives are available up to order 3");
        match &self.kind {
            Kind::Power(p) => power_deriv(*p, order, t),
            Kind::ExpWeighted(p) => {
                // Leibniz rule on t^p * e^(t-1); every derivative of the exponential is itself.
                let s: f64 = (0..=order).map(|i| BINOM[order][i] * power_deriv(*p, i, t)).sum();
                if s == 0.0 {
                    0.0
                } else {
                    s * (t - 1.0).exp()
                }
            }
            Kind::Custom(c) => custom_deriv(c, order, t),
        }
    }

    /// `ln M(t)`.
    pub fn ln_eval(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Power(p) => p * t.ln(),
            Kind::ExpWeighted(p) => p * t.ln() + t - 1.0,
            Kind::Custom(c) => (c.eval)(t).ln(),
        }
    }

    /// `ln M(e^s)`, exact for the built-in families even when `M(e^s)` underflows.
    pub fn ln_eval_at_ln(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Power(p) => p * s,
            Kind::ExpWeighted(p) => p * s + s.exp() - 1.0,
            Kind::Custom(c) => (c.eval)(s.exp()).ln(),
        }
    }

    /// `ln (M(tu) / (M(t) M(u)))`.
    pub fn ln_product_ratio(&self, t: f64, u: f64) -> f64 {
        match &self.kind {
            Kind::Power(_) => 0.0,
            Kind::ExpWeighted(_) => (1.0 - t) * (1.0 - u),
            Kind::Custom(c) => ((c.eval)(t * u) / ((c.eval)(t) * (c.eval)(u))).ln(),
        }
    }

    /// `ln (M(st) / (M(s) t^q))` at `x = ln s`, `y = ln t`; exact cancellation for the
    /// built-in families.
    pub fn ln_dilation_ratio(&self, x: f64, y: f64, q: f64) -> f64 {
        match &self.kind {
            Kind::Power(p) => (p - q) * y,
            Kind::ExpWeighted(p) => (p - q) * y + x.exp() * y.exp_m1(),
            Kind::Custom(_) => self.ln_eval_at_ln(x + y) - self.ln_eval_at_ln(x) - q * y,
        }
    }

    /// `M(1) - M(1 - x)` for `x` in `[0, 1]`, without cancellation for small `x`.
    pub fn complement_at_one(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Power(p) => -(p * (-x).ln_1p()).exp_m1(),
            Kind::ExpWeighted(p) => -(p * (-x).ln_1p() - x).exp_m1(),
            Kind::Custom(c) => (c.eval)(1.0) - (c.eval)(1.0 - x),
        }
    }

    /// `ln C(l)` in closed form: `p ln l` (power) or `p ln l + l - 1` (exp-weighted),
    /// the latter bounded above when `l` exceeds the `f64` range.
    pub fn ln_delta2_closed(&self, l: Magnitude) -> Option<Magnitude> {
        let p = self.exponent()?;
        let ln_l = l.ln();
        if !ln_l.is_finite() || ln_l < 0.0 {
            return None;
        }
        let power_part = Magnitude::from_f64(p * ln_l);
        match self.kind {
            Kind::Power(_) => Some(power_part),
            Kind::ExpWeighted(_) => {
                let lf = l.to_f64();
                if lf.is_finite() {
                    Some(Magnitude::from_f64(p * ln_l + lf - 1.0))
                } else {
                    Some(l + power_part)
                }
            }
            Kind::Custom(_) => None,
        }
    }

    /// `ln alpha(eps)` in closed form: 0 (power) or `eps^2` (exp-weighted, attained
    /// at the corner `t = u = 1 - eps`).
    pub fn ln_submult_closed(&self, eps: Magnitude) -> Option<Magnitude> {
        match self.kind {
            Kind::Power(_) => Some(Magnitude::ZERO),
            Kind::ExpWeighted(_) => Some(eps.powf(2.0)),
            Kind::Custom(_) => None,
        }
    }

    pub fn has_closed_forms(&self) -> bool {
        !matches!(self.kind, Kind::Custom(_))
    }
}

fn custom_deriv(c: &CustomFunction, order: usize, t: f64) -> f64 {
    if order == 0 {
        return (c.eval)(t.abs());
    }
    if let Some(d) = &c.derivs[order - 1] {
        return d(t);
    }
    // Difference the highest supplied lower derivative directly; nesting
    // differences would amplify rounding by h^-order.
    let base = (0..order).rev().find(|j| *j == 0 || c.derivs[j - 1].is_some()).unwrap_or(0);
    let gap = order - base;
    // Continued to x < 0 as the derivative of the even extension M(|x|).
    let ext = |x: f64| {
        let v = custom_deriv(c, base, x.abs());
        if x < 0.0 && base % 2 == 1 {
            -v
        } else {
            v
        }
    };
    let h = f64::EPSILON.powf(1.0 / (gap as f64 + 2.0)) * t.abs().max(1.0);
    match gap {
        1 => (ext(t + h) - ext(t - h)) / (2.0 * h),
        2 => (ext(t + h) - 2.0 * ext(t) + ext(t - h)) / (h * h),
        _ => (ext(t + 2.0 * h) - 2.0 * ext(t + h) + 2.0 * ext(t - h) - ext(t - 2.0 * h)) / (2.0 * h * h * h),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GoodnessReport {
    pub is_good: bool,
    pub violations: Vec<String>,
    /// Grid sup of `t M^(i)(t) / M^(i-1)(t)` for i = 1, 2, 3.
    pub ratio_sups: [f64; 3],
    /// Candidate K: the largest of `ratio_sups`.
    pub k: f64,
    pub grid: GridSpec,
}

/// Checks the regularity hypotheses on a grid covering (0, 15].
pub fn check_good(m: &OrliczFunction, grid: &GridSpec) -> Result<GoodnessReport> {
    if grid.hi < 15.0 || grid.points < 1000 {
        return Err(OrliczError::InvalidParameter(format!(
            "goodness grid must cover (0, 15] with at least 1000 points, got [{}, {}] x {}",
            grid.lo, grid.hi, grid.points
        )));
    }
    let ts = grid.to_vec();
    let vals: Vec<[f64; 4]> = ts.par_iter().map(|&t| [m.eval(t), m.deriv1(t), m.deriv2(t), m.deriv3(t)]).collect();
    for (t, v) in ts.iter().zip(&vals) {
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(OrliczError::Evaluation { what: format!("M^({i})"), t: *t });
        }
    }

    let mut violations = Vec::new();
    let m0 = m.eval(0.0);
    if m0 != 0.0 {
        violations.push(format!("M(0) = {m0}, expected 0"));
    }
    for i in 0..4 {
        if let Some((t, v)) = ts.iter().zip(&vals).find(|(_, v)| v[i] <= 0.0) {
            violations.push(format!("M^({i}) not positive at t = {t:e} (value {:e})", v[i]));
        }
    }
    let slopes: Vec<f64> =
        ts.windows(2).zip(vals.windows(2)).map(|(t, v)| (v[1][0] - v[0][0]) / (t[1] - t[0])).collect();
    if slopes.iter().any(|s| *s < 0.0) {
        violations.push("M decreasing on the grid".into());
    }
    if let Some(j) = slopes.windows(2).position(|s| s[1] < s[0] * (1.0 - 1e-9)) {
        violations.push(format!("finite-difference convexity fails near t = {:e}", ts[j + 1]));
    }
    if let Some(j) = vals.windows(2).position(|v| v[1][3] < v[0][3] * (1.0 - 1e-10)) {
        violations.push(format!("M''' not increasing near t = {:e}", ts[j + 1]));
    }
    // M(t)/t^3 must decrease strictly as t falls through the smallest decade.
    let decade: Vec<f64> = ts.iter().filter(|&&t| t <= 10.0 * grid.lo).map(|&t| m.ln_eval(t) - 3.0 * t.ln()).collect();
    if decade.windows(2).any(|w| !(w[1] > w[0])) {
        violations.push("M(t) = o(t^3) fails: M(t)/t^3 does not decrease to 0 on the smallest decade".into());
    }

    let mut ratio_sups = [0.0f64; 3];
    for (t, v) in ts.iter().zip(&vals).filter(|(t, _)| **t <= 15.0) {
        for i in 0..3 {
            if v[i] > 0.0 {
                ratio_sups[i] = ratio_sups[i].max(t * v[i + 1] / v[i]);
            }
        }
    }
    if let Some(i) = ratio_sups.iter().position(|r| !r.is_finite()) {
        violations.push(format!("growth ratio t M^({})/M^({}) unbounded on the grid", i + 1, i));
    }
    let k = ratio_sups.iter().cloned().fold(0.0, f64::max);
    if !(k > 1.0) {
        violations.push(format!("candidate K = {k} is not > 1"));
    }
    Ok(GoodnessReport { is_good: violations.is_empty(), violations, ratio_sups, k, grid: *grid })
}

/// A grid-measured constant together with the grid that produced it.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridConstant {
    pub value: f64,
    pub ln_value: f64,
    pub grid: GridSpec,
}

/// `C(l) = sup_x M(l x) / M(x)` over the grid on (0, 1].
pub fn delta2_constant(m: &OrliczFunction, l: f64, grid: &GridSpec) -> Result<GridConstant> {
    if !(l > 1.0) || !l.is_finite() {
        return Err(OrliczError::InvalidParameter(format!("delta2 constant needs l > 1, got {l}")));
    }
    if grid.hi > 1.0 {
        return Err(OrliczError::InvalidParameter("delta2 grid must lie in (0, 1]".into()));
    }
    let ln_l = l.ln();
    let xs: Vec<f64> = grid.ln_points().collect();
    let ln_value =
        xs.par_iter().map(|&s| m.ln_eval_at_ln(s + ln_l) - m.ln_eval_at_ln(s)).reduce(|| f64::NEG_INFINITY, f64::max);
    if !ln_value.is_finite() {
        return Err(OrliczError::Evaluation { what: format!("M(l x)/M(x) with l = {l}"), t: grid.lo });
    }
    Ok(GridConstant { value: ln_value.exp(), ln_value, grid: *grid })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SubmultConstant {
    pub alpha: f64,
    pub ln_alpha: f64,
    /// Whether the infimum exceeds 1.
    pub hypothesis_holds: bool,
    pub grid: GridSpec,
}

/// `alpha(eps) = inf M(tu) / (M(t) M(u))` over the square grid on (0, 1 - eps]^2.
pub fn submult_constant(m: &OrliczFunction, eps: f64, grid: &GridSpec) -> Result<SubmultConstant> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(OrliczError::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    if (m.eval(1.0) - 1.0).abs() > 1e-12 {
        return Err(OrliczError::violation(format!("M(1) = {} but M(1) = 1 is required", m.eval(1.0))));
    }
    let g = grid.with_hi(1.0 - eps)?;
    let ts = g.to_vec();
    // Symmetric in (t, u): scan the upper triangle only.
    let ln_alpha = (0..ts.len())
        .into_par_iter()
        .map(|i| ts[i..].iter().map(|&u| m.ln_product_ratio(ts[i], u)).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min);
    if ln_alpha.is_nan() {
        return Err(OrliczError::Evaluation { what: "M(tu)/(M(t)M(u))".into(), t: g.lo });
    }
    Ok(SubmultConstant { alpha: ln_alpha.exp(), ln_alpha, hypothesis_holds: ln_alpha > 0.0, grid: g })
}

/// K together with the grids used for C(l) and alpha(eps).
#[derive(Clone, Debug, Serialize)]
pub struct GrowthConstants {
    #[serde(skip)]
    m: Option<OrliczFunction>,
    pub k: f64,
    pub ratio_sups: [f64; 3],
    pub k_grid: GridSpec,
    pub unit_grid: GridSpec,
}

impl GrowthConstants {
    pub fn compute(m: &OrliczFunction, k_grid: &GridSpec, unit_grid: &GridSpec) -> Result<Self> {
        let report = check_good(m, k_grid)?;
        Ok(GrowthConstants {
            m: Some(m.clone()),
            k: report.k,
            ratio_sups: report.ratio_sups,
            k_grid: *k_grid,
            unit_grid: *unit_grid,
        })
    }

    fn function(&self) -> &OrliczFunction {
        self.m.as_ref().expect("growth constants carry their function")
    }

    pub fn delta2(&self, l: f64) -> Result<f64> {
        Ok(delta2_constant(self.function(), l, &self.unit_grid)?.value)
    }

    pub fn submult(&self, eps: f64) -> Result<SubmultConstant> {
        submult_constant(self.function(), eps, &self.unit_grid)
    }
}
