use serde::{Deserialize, Serialize};

use crate::error::{OrliczError, Result};

/// Log-spaced sample points on `[lo, hi]`, both endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) || points < 2 {
            return Err(OrliczError::InvalidParameter(format!(
                "grid needs 0 < lo < hi < inf and at least 2 points, got [{lo}, {hi}] x {points}"
            )));
        }
        Ok(GridSpec { lo, hi, points })
    }

    /// Default grid for the growth constant K on (0, 15].
    pub fn growth_default() -> Self {
        GridSpec { lo: 1e-6, hi: 15.0, points: 4096 }
    }

    /// Default grid on (0, 1] for dilation ratios.
    pub fn unit_default() -> Self {
        GridSpec { lo: 1e-8, hi: 1.0, points: 4096 }
    }

    pub fn with_hi(self, hi: f64) -> Result<Self> {
        GridSpec::new(self.lo.min(hi / 2.0), hi, self.points)
    }

    /// Natural logarithms of the sample points.
    pub fn ln_points(&self) -> impl Iterator<Item = f64> + '_ {
        let (a, b) = (self.lo.ln(), self.hi.ln());
        let last = self.points - 1;
        (0..self.points).map(move |i| if i == last { b } else { a + (b - a) * i as f64 / last as f64 })
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        let last = self.points - 1;
        self.ln_points().enumerate().map(move |(i, l)| {
            if i == last {
                self.hi
            } else if i == 0 {
                self.lo
            } else {
                l.exp()
            }
        })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.iter().collect()
    }
}
