//! Non-negative reals far outside the `f64` exponent range.
//!
//! Rigidity budgets chain reciprocals of growth constants through squares and
//! exponentials, so their values routinely land below `1e-300` and sometimes
//! below `exp(-exp(700))`. A [`Magnitude`] stores `x >= 0` through its logarithm
//! `L = ln x`, and `L` itself as a sign together with `ln |L|`. Multiplication,
//! powers and `exp` then become additions on the inner level.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// `x = exp(sign * exp(log_abs))`, with `sign == 0` encoding `x = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Magnitude {
    sign: i8,
    log_abs: f64,
}

/// Signed number `s * exp(a)` added to another one, result in the same form.
fn add_signed((s1, a1): (i8, f64), (s2, a2): (i8, f64)) -> (i8, f64) {
    if s1 == 0 {
        return (s2, a2);
    }
    if s2 == 0 {
        return (s1, a1);
    }
    let (big, small) = if a1 >= a2 { ((s1, a1), (s2, a2)) } else { ((s2, a2), (s1, a1)) };
    if big.1 == f64::INFINITY {
        return big;
    }
    let d = small.1 - big.1;
    if big.0 == small.0 {
        (big.0, big.1 + d.exp().ln_1p())
    } else if d == 0.0 {
        (0, f64::NEG_INFINITY)
    } else {
        (big.0, big.1 + (-d.exp_m1()).ln())
    }
}

impl Magnitude {
    pub const ZERO: Magnitude = Magnitude { sign: -1, log_abs: f64::INFINITY };
    pub const ONE: Magnitude = Magnitude { sign: 0, log_abs: f64::NEG_INFINITY };
    pub const INFINITY: Magnitude = Magnitude { sign: 1, log_abs: f64::INFINITY };

    /// Panics on negative or NaN input.
    pub fn from_f64(x: f64) -> Self {
        assert!(x >= 0.0, "Magnitude::from_f64 needs a non-negative number, got {x}");
        Self::from_ln(x.ln())
    }

    /// The number whose natural logarithm is `l` (may be infinite).
    pub fn from_ln(l: f64) -> Self {
        assert!(!l.is_nan(), "Magnitude::from_ln got NaN");
        if l == 0.0 {
            Self::ONE
        } else {
            Magnitude { sign: if l > 0.0 { 1 } else { -1 }, log_abs: l.abs().ln() }
        }
    }

    /// `exp(y)`.
    pub fn exp(y: Magnitude) -> Self {
        if y.is_zero() {
            return Self::ONE;
        }
        Magnitude { sign: 1, log_abs: y.ln() }
    }

    /// `exp(-y)`.
    pub fn exp_neg(y: Magnitude) -> Self {
        if y.is_zero() {
            return Self::ONE;
        }
        Magnitude { sign: -1, log_abs: y.ln() }
    }

    /// Natural logarithm as an `f64`; infinite once `|ln x| > f64::MAX`.
    pub fn ln(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_abs.exp(),
        }
    }

    /// `ln x` as a magnitude, defined for `x >= 1`.
    pub fn ln_magnitude(&self) -> Option<Magnitude> {
        match self.sign {
            0 => Some(Self::ZERO),
            1 => Some(Self::from_ln(self.log_abs)),
            _ => None,
        }
    }

    /// Nearest `f64`; underflows to 0 and overflows to infinity.
    pub fn to_f64(&self) -> f64 {
        self.ln().exp()
    }

    pub fn is_zero(&self) -> bool {
        self.sign < 0 && self.log_abs == f64::INFINITY
    }

    /// True when the value is a normal positive `f64`.
    pub fn is_representable(&self) -> bool {
        let x = self.to_f64();
        x.is_normal()
    }

    /// `(sign of ln x, ln |ln x|)`, the stored representation.
    pub fn parts(&self) -> (i8, f64) {
        (self.sign, self.log_abs)
    }

    pub fn recip(self) -> Self {
        Magnitude { sign: -self.sign, log_abs: self.log_abs }
    }

    pub fn powf(self, k: f64) -> Self {
        if k == 0.0 || self.sign == 0 {
            return Self::ONE;
        }
        let sign = if k > 0.0 { self.sign } else { -self.sign };
        Magnitude { sign, log_abs: self.log_abs + k.abs().ln() }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Ordering::Equal,
                1 => self.log_abs.total_cmp(&other.log_abs),
                _ => other.log_abs.total_cmp(&self.log_abs),
            },
            o => o,
        }
    }
}

impl From<f64> for Magnitude {
    fn from(x: f64) -> Self {
        Magnitude::from_f64(x)
    }
}

impl PartialOrd for Magnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.key_cmp(other))
    }
}

impl Mul for Magnitude {
    type Output = Magnitude;

    fn mul(self, rhs: Magnitude) -> Magnitude {
        if self.is_zero() || rhs.is_zero() {
            return Magnitude::ZERO;
        }
        let (sign, log_abs) = add_signed((self.sign, self.log_abs), (rhs.sign, rhs.log_abs));
        Magnitude { sign, log_abs }
    }
}

impl Div for Magnitude {
    type Output = Magnitude;

    fn div(self, rhs: Magnitude) -> Magnitude {
        self * rhs.recip()
    }
}

impl Add for Magnitude {
    type Output = Magnitude;

    fn add(self, rhs: Magnitude) -> Magnitude {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self >= rhs { (self, rhs) } else { (rhs, self) };
        // ln(hi + lo) = ln hi + ln(1 + exp(-(ln hi - ln lo)))
        let (ds, da) = add_signed((hi.sign, hi.log_abs), (-lo.sign, lo.log_abs));
        let gap = if ds == 0 { 0.0 } else { da.exp() };
        let bump = (-gap).exp().ln_1p();
        let (sign, log_abs) = add_signed((hi.sign, hi.log_abs), (1, bump.ln()));
        Magnitude { sign, log_abs }
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let x = self.to_f64();
        if x.is_normal() {
            return write!(f, "{x:.6e}");
        }
        let l = self.ln();
        if l.is_finite() {
            let decimal = l / std::f64::consts::LN_10;
            let e = decimal.floor();
            write!(f, "{:.6}e{}", 10f64.powf(decimal - e), e as i64)
        } else {
            let sign = if self.sign < 0 { "-" } else { "" };
            write!(f, "exp({sign}exp({:.6e}))", self.log_abs)
        }
    }
}

impl Serialize for Magnitude {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Magnitude", 4)?;
        s.serialize_field("ln_sign", &self.sign)?;
        s.serialize_field("ln_abs_ln", &finite_or_none(self.log_abs))?;
        s.serialize_field("approx", &finite_or_none(self.to_f64()))?;
        s.serialize_field("text", &self.to_string())?;
        s.end()
    }
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs())
    }

    #[test]
    fn round_trips_ordinary_values() {
        for x in [1e-300, 1e-5, 0.3, 1.0, 2.5, 1e200] {
            assert!(close(Magnitude::from_f64(x).to_f64(), x, 1e-12), "{x}");
        }
        assert!(Magnitude::from_f64(0.0).is_zero());
        assert_eq!(Magnitude::from_f64(1.0), Magnitude::ONE);
    }

    #[test]
    fn arithmetic_matches_f64() {
        let pairs = [(3.0, 0.25), (1e-100, 1e50), (0.5, 0.5), (7.0, 1.0), (2.0, 2.0)];
        for (a, b) in pairs {
            let (ma, mb) = (Magnitude::from_f64(a), Magnitude::from_f64(b));
            assert!(close((ma * mb).to_f64(), a * b, 1e-12));
            assert!(close((ma / mb).to_f64(), a / b, 1e-12));
            assert!(close((ma + mb).to_f64(), a + b, 1e-12));
            assert!(close(ma.powf(2.5).to_f64(), a.powf(2.5), 1e-12));
            assert_eq!(ma < mb, a < b);
        }
    }

    #[test]
    fn exp_reaches_beyond_f64() {
        let y = Magnitude::from_f64(1e5);
        let tiny = Magnitude::exp_neg(y);
        assert_eq!(tiny.to_f64(), 0.0);
        assert!(!tiny.is_zero());
        assert!(close(tiny.ln(), -1e5, 1e-14));
        let tinier = Magnitude::exp_neg(Magnitude::from_f64(1e300).powf(3.0));
        assert!(tinier < tiny);
        assert!(tinier > Magnitude::ZERO);
        assert!(tinier.to_string().starts_with("exp(-exp("));
    }

    #[test]
    fn ordering_handles_the_encoding_edges() {
        let xs = [
            Magnitude::ZERO,
            Magnitude::from_f64(1e-30),
            Magnitude::ONE,
            Magnitude::from_f64(4.0),
            Magnitude::INFINITY,
        ];
        for w in xs.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(close(Magnitude::from_f64(std::f64::consts::E).ln_magnitude().unwrap().to_f64(), 1.0, 1e-14));
    }
}
