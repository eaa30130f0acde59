//! The surface `F(alpha, eta) = sum_k M(|f(k) + alpha g(k)| / eta) - 1` and the
//! norm curve `N(alpha) = ||f + alpha g||` it defines implicitly.

use serde::{Deserialize, Serialize};

use crate::error::{OrliczError, Result};
use crate::luxemburg::{LuxemburgSpace, OrliczVector};
use crate::orlicz_core::OrliczFunction;

/// Orders of differentiation in alpha and eta.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    pub d_alpha: u8,
    pub d_eta: u8,
}

impl MultiIndex {
    pub const fn new(d_alpha: u8, d_eta: u8) -> Self {
        MultiIndex { d_alpha, d_eta }
    }

    pub fn order(&self) -> u8 {
        self.d_alpha + self.d_eta
    }

    /// Every multi-index of order at most 3, starting with (0, 0).
    pub fn all() -> impl Iterator<Item = MultiIndex> {
        (0u8..=3).flat_map(|total| (0..=total).rev().map(move |a| MultiIndex::new(a, total - a)))
    }
}

pub const ALPHA_HALF_WIDTH: f64 = 0.5;
pub const ETA_RANGE: (f64, f64) = (0.125, 2.0);

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// A pair (f, g) with norms in [4/5, 5/4].
#[derive(Clone, Debug)]
pub struct NormSurface {
    space: LuxemburgSpace,
    f: OrliczVector,
    g: OrliczVector,
}

impl NormSurface {
    pub fn new(space: &LuxemburgSpace, f: OrliczVector, g: OrliczVector) -> Result<Self> {
        let slack = 10.0 * space.tol();
        for (name, v) in [("f", &f), ("g", &g)] {
            let n = space.norm(v)?;
            if !(n >= 0.8 - slack && n <= 1.25 + slack) {
                return Err(OrliczError::PreconditionFailed(format!("||{name}|| = {n} outside [4/5, 5/4]")));
            }
        }
        Ok(NormSurface { space: space.clone(), f, g })
    }

    pub fn space(&self) -> &LuxemburgSpace {
        &self.space
    }

    pub fn function(&self) -> &OrliczFunction {
        self.space.function()
    }

    pub fn f(&self) -> &OrliczVector {
        &self.f
    }

    pub fn g(&self) -> &OrliczVector {
        &self.g
    }

    pub fn value(&self, alpha: f64, eta: f64) -> Result<f64> {
        self.partial(alpha, eta, MultiIndex::new(0, 0))
    }

    /// `d^beta F(alpha, eta)` summed from the closed-form term derivatives, with sgn(0) = 0.
    pub fn partial(&self, alpha: f64, eta: f64, beta: MultiIndex) -> Result<f64> {
        if !(alpha.abs() < ALPHA_HALF_WIDTH && eta > ETA_RANGE.0 && eta < ETA_RANGE.1) {
            return Err(OrliczError::Domain { alpha, eta });
        }
        if beta.order() > 3 {
            return Err(OrliczError::InvalidParameter(format!("multi-index {beta:?} has order above 3")));
        }
        let m = self.function();
        let total: f64 =
            self.f.coords().iter().zip(self.g.coords()).map(|(&fk, &g)| term(m, fk + alpha * g, g, eta, beta)).sum();
        Ok(if beta == MultiIndex::new(0, 0) { total - 1.0 } else { total })
    }
}

/// `d^beta a_k` for `a_k = M(|x| / eta)`, `x = f(k) + alpha g(k)`.
fn term(m: &OrliczFunction, x: f64, g: f64, eta: f64, beta: MultiIndex) -> f64 {
    let a = x.abs();
    let s = sgn(x);
    let y = a / eta;
    let e = eta;
    let d = |order: usize| m.deriv(order, y);
    // At x = 0 every term carrying |x|, x or sgn(x) vanishes; skip them so that
    // derivatives which blow up at 0 are never multiplied by 0.
    let nz = x != 0.0;
    match (beta.d_alpha, beta.d_eta) {
        (0, 0) => m.eval(y),
        (1, 0) => {
            if nz {
                g / e * s * d(1)
            } else {
                0.0
            }
        }
        (0, 1) => {
            if nz {
                -a / (e * e) * d(1)
            } else {
                0.0
            }
        }
        (1, 1) => {
            if nz {
                -g / (e * e) * s * d(1) - g * x / e.powi(3) * d(2)
            } else {
                0.0
            }
        }
        (2, 0) => {
            if g == 0.0 {
                0.0
            } else {
                g * g / (e * e) * d(2)
            }
        }
        (0, 2) => {
            if nz {
                2.0 * a / e.powi(3) * d(1) + a * a / e.powi(4) * d(2)
            } else {
                0.0
            }
        }
        (3, 0) => {
            if nz {
                g.powi(3) / e.powi(3) * s * d(3)
            } else {
                0.0
            }
        }
        (2, 1) => {
            if g == 0.0 {
                0.0
            } else if nz {
                -2.0 * g * g / e.powi(3) * d(2) - g * g * a / e.powi(4) * d(3)
            } else {
                -2.0 * g * g / e.powi(3) * d(2)
            }
        }
        (1, 2) => {
            if nz {
                2.0 * g * s / e.powi(3) * d(1) + 4.0 * g * x / e.powi(4) * d(2) + g * a * a * s / e.powi(5) * d(3)
            } else {
                0.0
            }
        }
        (0, 3) => {
            if nz {
                -6.0 * a / e.powi(4) * d(1) - 6.0 * a * a / e.powi(5) * d(2) - a.powi(3) / e.powi(6) * d(3)
            } else {
                0.0
            }
        }
        _ => unreachable!("order checked by caller"),
    }
}

/// `N(alpha) = ||f + alpha g||` on (-1/2, 1/2).
#[derive(Clone, Debug)]
pub struct NormCurve {
    surface: NormSurface,
}

impl NormCurve {
    pub fn new(surface: NormSurface) -> Self {
        NormCurve { surface }
    }

    pub fn surface(&self) -> &NormSurface {
        &self.surface
    }

    fn check(alpha: f64) -> Result<()> {
        if !(alpha.abs() < ALPHA_HALF_WIDTH) {
            return Err(OrliczError::Domain { alpha, eta: f64::NAN });
        }
        Ok(())
    }

    pub fn value(&self, alpha: f64) -> Result<f64> {
        Self::check(alpha)?;
        let s = &self.surface;
        s.space.norm(&s.f.axpy(alpha, &s.g)?)
    }

    fn eta_partial(&self, alpha: f64, n: f64) -> Result<f64> {
        let fe = self.surface.partial(alpha, n, MultiIndex::new(0, 1))?;
        if !(fe < -0.5) {
            return Err(OrliczError::NumericalDegeneracy(format!(
                "dF/deta = {fe} at alpha = {alpha} is not below -1/2"
            )));
        }
        Ok(fe)
    }

    /// `N'(alpha) = -F_alpha / F_eta` at `(alpha, N(alpha))`.
    pub fn prime(&self, alpha: f64) -> Result<f64> {
        let n = self.value(alpha)?;
        let fe = self.eta_partial(alpha, n)?;
        Ok(-self.surface.partial(alpha, n, MultiIndex::new(1, 0))? / fe)
    }

    /// `N''` from `F_aa + 2 N' F_ae + N'^2 F_ee + N'' F_e = 0`.
    pub fn second(&self, alpha: f64) -> Result<f64> {
        let n = self.value(alpha)?;
        let fe = self.eta_partial(alpha, n)?;
        let s = &self.surface;
        let np = -s.partial(alpha, n, MultiIndex::new(1, 0))? / fe;
        let faa = s.partial(alpha, n, MultiIndex::new(2, 0))?;
        let fae = s.partial(alpha, n, MultiIndex::new(1, 1))?;
        let fee = s.partial(alpha, n, MultiIndex::new(0, 2))?;
        Ok(-(faa + 2.0 * np * fae + np * np * fee) / fe)
    }

    /// `|N(alpha) - N(0) - alpha N'(0) - alpha^2 N''(0) / 2|`.
    pub fn taylor_defect(&self, alpha: f64) -> Result<f64> {
        let n0 = self.value(0.0)?;
        let p0 = self.prime(0.0)?;
        let s0 = self.second(0.0)?;
        Ok((self.value(alpha)? - n0 - alpha * p0 - 0.5 * alpha * alpha * s0).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(dim: usize) -> LuxemburgSpace {
        LuxemburgSpace::new(OrliczFunction::exp_weighted(4.0).unwrap(), dim).unwrap()
    }

    fn curve(f: Vec<f64>, g: Vec<f64>) -> NormCurve {
        let s = space(f.len());
        let f = s.normalize(&f.into()).unwrap();
        let g = s.normalize(&g.into()).unwrap();
        NormCurve::new(NormSurface::new(&s, f, g).unwrap())
    }

    #[test]
    fn multi_indices_cover_order_three() {
        let all: Vec<_> = MultiIndex::all().collect();
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], MultiIndex::new(0, 0));
    }

    #[test]
    fn surface_vanishes_at_the_norm() {
        let c = curve(vec![0.7, -0.4, 0.2], vec![0.1, 0.5, -0.6]);
        let n = c.value(0.0).unwrap();
        assert!(c.surface().value(0.0, n).unwrap().abs() < 1e-12);
        assert!(c.surface().partial(0.6, n, MultiIndex::new(1, 0)).is_err());
        assert!(c.surface().partial(0.0, 2.0, MultiIndex::new(1, 0)).is_err());
    }

    #[test]
    fn disjoint_pair_has_flat_curve_at_zero() {
        let s = space(3);
        let f = s.normalize(&vec![0.8, 0.0, 0.3].into()).unwrap();
        let g = s.normalize(&vec![0.0, 1.0, 0.0].into()).unwrap();
        let c = NormCurve::new(NormSurface::new(&s, f.clone(), g).unwrap());
        let n = c.value(0.0).unwrap();
        assert_eq!(c.surface().partial(0.0, n, MultiIndex::new(1, 0)).unwrap(), 0.0);
        assert_eq!(c.surface().partial(0.0, n, MultiIndex::new(2, 0)).unwrap(), 0.0);
        assert_eq!(c.prime(0.0).unwrap(), 0.0);
        assert_eq!(c.second(0.0).unwrap(), 0.0);
    }

    #[test]
    fn collinear_pair_is_affine() {
        let c = curve(vec![1.0, 0.0], vec![1.0, 0.0]);
        assert!((c.value(0.1).unwrap() - 1.1).abs() < 1e-13);
        assert!((c.prime(0.1).unwrap() - 1.0).abs() < 1e-12);
        assert!(c.second(0.1).unwrap().abs() < 1e-11);
        assert!(c.taylor_defect(0.3).unwrap() < 1e-12);
        assert_eq!(c.taylor_defect(0.0).unwrap(), 0.0);
    }

    #[test]
    fn second_alpha_partial_matches_closed_sum() {
        let m = OrliczFunction::exp_weighted(4.0).unwrap();
        let c = curve(vec![0.9, 0.2, -0.1], vec![0.3, -0.7, 0.5]);
        let s = c.surface();
        let n = c.value(0.0).unwrap();
        let expected: f64 =
            s.f().coords().iter().zip(s.g().coords()).map(|(f, g)| g * g / (n * n) * m.deriv2(f.abs() / n)).sum();
        let got = s.partial(0.0, n, MultiIndex::new(2, 0)).unwrap();
        assert!((got - expected).abs() < 1e-14 * expected.abs().max(1.0));
    }
}
