//! Finite Orlicz sequences, the modular and the Luxemburg norm.

use serde::{Deserialize, Serialize};

use crate::error::{OrliczError, Result};
use crate::orlicz_core::OrliczFunction;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Coordinates of a vector in the canonical basis of a finite-dimensional space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrliczVector {
    coords: Vec<f64>,
}

impl OrliczVector {
    pub fn new(coords: Vec<f64>) -> Self {
        OrliczVector { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        OrliczVector { coords: vec![0.0; dim] }
    }

    /// `sign * e_index`.
    pub fn basis(dim: usize, index: usize, sign: f64) -> Self {
        let mut v = Self::zeros(dim);
        v.coords[index] = sign;
        v
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coords.iter().enumerate().filter(|(_, x)| **x != 0.0).map(|(i, _)| i)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|x| *x == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        OrliczVector { coords: self.coords.iter().map(|x| s * x).collect() }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        check_dims(self, other)?;
        Ok(OrliczVector { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + s * b).collect() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// Coordinates outside `mask` set to zero.
    pub fn restricted(&self, mask: &[bool]) -> Self {
        OrliczVector { coords: self.coords.iter().zip(mask).map(|(x, keep)| if *keep { *x } else { 0.0 }).collect() }
    }
}

impl From<Vec<f64>> for OrliczVector {
    fn from(coords: Vec<f64>) -> Self {
        OrliczVector::new(coords)
    }
}

fn check_dims(f: &OrliczVector, g: &OrliczVector) -> Result<()> {
    if f.dim() != g.dim() {
        return Err(OrliczError::DimensionMismatch { expected: f.dim(), got: g.dim() });
    }
    Ok(())
}

/// True iff no coordinate is nonzero in both vectors.
pub fn disjoint(f: &OrliczVector, g: &OrliczVector) -> Result<bool> {
    check_dims(f, g)?;
    Ok(f.coords.iter().zip(&g.coords).all(|(a, b)| *a == 0.0 || *b == 0.0))
}

/// `l_M^n` with the tolerance threaded through downstream computations.
#[derive(Clone, Debug)]
pub struct LuxemburgSpace {
    m: OrliczFunction,
    dim: usize,
    tol: f64,
}

impl LuxemburgSpace {
    pub fn new(m: OrliczFunction, dim: usize) -> Result<Self> {
        Self::with_tol(m, dim, DEFAULT_TOL)
    }

    pub fn with_tol(m: OrliczFunction, dim: usize, tol: f64) -> Result<Self> {
        if dim == 0 {
            return Err(OrliczError::InvalidParameter("space dimension must be at least 1".into()));
        }
        if !(tol > 0.0) {
            return Err(OrliczError::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        Ok(LuxemburgSpace { m, dim, tol })
    }

    pub fn function(&self) -> &OrliczFunction {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Same function and tolerance, another dimension.
    pub fn resized(&self, dim: usize) -> Result<Self> {
        Self::with_tol(self.m.clone(), dim, self.tol)
    }

    fn check(&self, f: &OrliczVector) -> Result<()> {
        if f.dim() != self.dim {
            return Err(OrliczError::DimensionMismatch { expected: self.dim, got: f.dim() });
        }
        Ok(())
    }

    /// `sum_k M(|f(k)| / rho)`.
    pub fn modular(&self, f: &OrliczVector, rho: f64) -> Result<f64> {
        self.check(f)?;
        if !(rho > 0.0) {
            return Err(OrliczError::InvalidParameter(format!("rho must be positive, got {rho}")));
        }
        Ok(f.coords.iter().map(|x| self.m.eval(x.abs() / rho)).sum())
    }

    pub fn norm(&self, f: &OrliczVector) -> Result<f64> {
        self.check(f)?;
        luxemburg_norm(&self.m, f.coords(), self.tol)
    }

    pub fn normalize(&self, f: &OrliczVector) -> Result<OrliczVector> {
        let n = self.norm(f)?;
        if n == 0.0 {
            return Err(OrliczError::InvalidInput("cannot normalize the zero vector".into()));
        }
        Ok(f.scaled(1.0 / n))
    }

    pub fn distance(&self, f: &OrliczVector, g: &OrliczVector) -> Result<f64> {
        self.norm(&f.sub(g)?)
    }
}

/// Luxemburg norm of a coordinate slice of any length.
pub fn luxemburg_norm(m: &OrliczFunction, coords: &[f64], tol: f64) -> Result<f64> {
    if let Some(x) = coords.iter().find(|x| !x.is_finite()) {
        return Err(OrliczError::InvalidInput(format!("non-finite coordinate {x}")));
    }
    let profile: Vec<(f64, f64)> = coords.iter().filter(|x| **x != 0.0).map(|x| (x.abs(), 1.0)).collect();
    weighted_norm(m, profile, tol)
}

/// Norm of a vector given as (absolute value, multiplicity) pairs; multiplicities
/// may be huge, which keeps long constant blocks cheap.
pub fn norm_of_profile(m: &OrliczFunction, profile: &[(f64, f64)], tol: f64) -> Result<f64> {
    if profile.iter().any(|(v, w)| !v.is_finite() || !(w.is_finite() && *w >= 0.0)) {
        return Err(OrliczError::InvalidInput("profile entries must be finite with non-negative weights".into()));
    }
    let p = profile.iter().filter(|(v, w)| *v != 0.0 && *w > 0.0).map(|(v, w)| (v.abs(), *w)).collect();
    weighted_norm(m, p, tol)
}

fn weighted_norm(m: &OrliczFunction, mut profile: Vec<(f64, f64)>, tol: f64) -> Result<f64> {
    if profile.is_empty() {
        return Ok(0.0);
    }
    // Ascending order makes the sum independent of coordinate order, so signed
    // permutations give bit-identical norms.
    profile.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = profile.last().map(|p| p.0).unwrap_or(1.0);
    let b: Vec<(f64, f64)> = profile.iter().map(|(v, w)| (v / scale, *w)).collect();
    let phi = |rho: f64| b.iter().map(|(v, w)| w * m.eval(v / rho)).sum::<f64>() - 1.0;
    let dphi = |rho: f64| -b.iter().map(|(v, w)| w * v / (rho * rho) * m.deriv1(v / rho)).sum::<f64>();

    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    let mut guard = 0;
    while phi(lo) < 0.0 {
        lo *= 0.5;
        guard += 1;
        if guard > 2100 {
            return Err(OrliczError::NotConverged("could not bracket the norm from below".into()));
        }
    }
    while phi(hi) > 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 2100 || !hi.is_finite() {
            return Err(OrliczError::NotConverged("could not bracket the norm from above".into()));
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let v = phi(mid);
        if v > 0.0 {
            lo = mid;
        } else if v < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
        }
    }
    let mut rho = 0.5 * (lo + hi);
    let mut best = (phi(rho).abs(), rho);
    for _ in 0..3 {
        let d = dphi(rho);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = rho - phi(rho) / d;
        if !(next >= lo && next <= hi) {
            break;
        }
        rho = next;
        let r = phi(rho).abs();
        if r < best.0 {
            best = (r, rho);
        }
    }
    if best.0 > tol {
        return Err(OrliczError::NotConverged(format!("modular residual {:e} exceeds tolerance {tol:e}", best.0)));
    }
    Ok(best.1 * scale)
}
