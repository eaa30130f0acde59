//! Boyd indices, the ratio hypothesis behind isometric non-embedding of `l_p^2`,
//! and equal-coordinate block copies of `l_p^2` with small distortion.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embeddings::{ratio_extrema, SampleBudget};
use crate::error::{OrliczError, Result};
use crate::luxemburg::{disjoint, norm_of_profile, LuxemburgSpace, OrliczVector, DEFAULT_TOL};
use crate::orlicz_core::OrliczFunction;
use crate::seeds::rng_for;

/// Smallest `|ln t|` on the grid axes.
const AXIS_FLOOR: f64 = 1e-6;
/// Required gap below 0 of `ln C_high` for functions without exact cancellation.
const CUSTOM_STRICTNESS: f64 = 1e-12;

/// Log grid on `(0, 1]^2` for dilation ratios, with the extension used to decide finiteness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoydGrid {
    /// Base grid covers `s, t >= e^-ln_range`.
    pub ln_range: f64,
    pub points: usize,
    /// The extended grid reaches `e^-(refine * ln_range)`.
    pub refine: f64,
    /// Relative change of the extremum tolerated under extension.
    pub stability: f64,
    /// Bisection stops once the q-bracket is this narrow.
    pub resolution: f64,
}

impl Default for BoydGrid {
    fn default() -> Self {
        BoydGrid {
            ln_range: 75.0 * std::f64::consts::LN_10,
            points: 160,
            refine: 4.0,
            stability: 0.01,
            resolution: 1e-4,
        }
    }
}

impl BoydGrid {
    fn validate(&self) -> Result<()> {
        let ok = self.ln_range > AXIS_FLOOR
            && self.points >= 8
            && self.refine > 1.0
            && self.stability > 0.0
            && self.resolution > 0.0;
        if !ok || self.refine * self.ln_range > 700.0 {
            return Err(OrliczError::InvalidParameter(format!("invalid Boyd grid {self:?}")));
        }
        Ok(())
    }

    /// Values of `ln t`: log-spaced magnitudes from `AXIS_FLOOR` to `range`.
    fn axis(&self, range: f64) -> Vec<f64> {
        let n = self.points;
        let (a, b) = (AXIS_FLOOR.ln(), range.ln());
        (0..n).map(|i| -(a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
    }

    /// Base axis followed by the points that only the extension adds.
    fn axes(&self) -> (Vec<f64>, Vec<f64>) {
        let base = self.axis(self.ln_range);
        let top = self.refine * self.ln_range;
        let n = self.points;
        let extra = (1..=n).map(|i| -(self.ln_range + (top - self.ln_range) * i as f64 / n as f64)).collect();
        (base, extra)
    }
}

#[derive(Clone, Copy, Debug)]
struct Extremes {
    ln_min: f64,
    ln_max: f64,
}

/// Extremes of `ln (M(st) / (M(s) t^q))` on the base grid and on the extended grid.
fn ratio_extremes(m: &OrliczFunction, q: f64, grid: &BoydGrid) -> (Extremes, Extremes) {
    let (base, extra) = grid.axes();
    // s ranges over (0, 1], so x = ln s also takes the value 0.
    let xs_base: Vec<f64> = std::iter::once(0.0).chain(base.iter().copied()).collect();
    let scan = |xs: &[f64], ys: &[f64]| {
        xs.par_iter()
            .map(|&x| {
                ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
                    let v = m.ln_dilation_ratio(x, y, q);
                    (lo.min(v), hi.max(v))
                })
            })
            .reduce(|| (f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1)))
    };
    let b = scan(&xs_base, &base);
    let xs_all: Vec<f64> = xs_base.iter().chain(&extra).copied().collect();
    let ys_all: Vec<f64> = base.iter().chain(&extra).copied().collect();
    // The extension adds every pair with x or y outside the base range.
    let e1 = scan(&extra, &ys_all);
    let e2 = scan(&xs_all, &extra);
    let base = Extremes { ln_min: b.0, ln_max: b.1 };
    let ext = Extremes { ln_min: b.0.min(e1.0).min(e2.0), ln_max: b.1.max(e1.1).max(e2.1) };
    (base, ext)
}

/// Whether `sup M(st) / (M(s) t^q)` looks finite: stable within `stability` under extension.
fn sup_is_finite(m: &OrliczFunction, q: f64, grid: &BoydGrid) -> bool {
    let (b, e) = ratio_extremes(m, q, grid);
    e.ln_max.is_finite() && e.ln_max - b.ln_max <= grid.stability.ln_1p()
}

/// Whether `inf M(st) / (M(s) t^q)` looks positive.
fn inf_is_positive(m: &OrliczFunction, q: f64, grid: &BoydGrid) -> bool {
    let (b, e) = ratio_extremes(m, q, grid);
    e.ln_min.is_finite() && b.ln_min - e.ln_min <= grid.stability.ln_1p()
}

/// Bisection for the threshold where `pred` switches from true (below) to false (above).
fn threshold(mut lo: f64, mut hi: f64, resolution: f64, pred: impl Fn(f64) -> bool) -> (f64, f64) {
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

const Q_CEILING: f64 = 1024.0;

#[derive(Clone, Debug, Serialize)]
pub struct BoydIndices {
    pub alpha: f64,
    pub beta: f64,
    /// `[q verified finite, q verified infinite]` for the sup defining alpha.
    pub alpha_bracket: (f64, f64),
    /// `[q verified zero, q verified positive]` for the inf defining beta.
    pub beta_bracket: (f64, f64),
    /// The raw estimates came out with alpha above beta and were merged to their midpoint.
    pub crossed: bool,
    /// Estimate rounded to the 1e-3 resolution; the exponent tested by `ratio_bounds`.
    pub p: f64,
    pub ratio_bounds: RatioBounds,
    pub grid: BoydGrid,
}

pub fn boyd_indices(m: &OrliczFunction, grid: &BoydGrid) -> Result<BoydIndices> {
    grid.validate()?;
    let mut hi = 2.0;
    while sup_is_finite(m, hi, grid) {
        hi *= 2.0;
        if hi > Q_CEILING {
            return Err(OrliczError::NotConverged(format!("upper Boyd bracket exceeds q = {Q_CEILING}")));
        }
    }
    let alpha_bracket = threshold(1.0, hi, grid.resolution, |q| sup_is_finite(m, q, grid));

    let (mut lo, mut hi) = (1.0, hi.max(2.0));
    if inf_is_positive(m, lo, grid) {
        hi = lo;
        lo = 1.0 - grid.resolution;
    } else {
        while !inf_is_positive(m, hi, grid) {
            lo = hi;
            hi *= 2.0;
            if hi > Q_CEILING {
                return Err(OrliczError::NotConverged(format!("lower Boyd bracket exceeds q = {Q_CEILING}")));
            }
        }
    }
    let beta_bracket = threshold(lo, hi, grid.resolution, |q| !inf_is_positive(m, q, grid));

    let mut alpha = 0.5 * (alpha_bracket.0 + alpha_bracket.1);
    let mut beta = 0.5 * (beta_bracket.0 + beta_bracket.1);
    let crossed = alpha > beta;
    if crossed {
        let mid = 0.5 * (alpha + beta);
        alpha = mid;
        beta = mid;
    }
    let p = (500.0 * (alpha + beta)).round() / 1000.0;
    let ratio_bounds = ratio_bounds(m, p, grid)?;
    Ok(BoydIndices { alpha, beta, alpha_bracket, beta_bracket, crossed, p, ratio_bounds, grid: *grid })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RatioBounds {
    pub p: f64,
    /// Grid inf of `M(st) / (M(s) t^p)` over `s in (0, 1]`, `t in (0, 1)`.
    pub c_low: f64,
    /// Grid sup of the same ratio.
    pub c_high: f64,
    pub ln_low: f64,
    pub ln_high: f64,
    pub low_positive: bool,
    pub high_below_one: bool,
    pub holds: bool,
}

/// Grid extremes of `M(st) / (M(s) t^p)` and whether `0 < C_low` and `C_high < 1`.
pub fn ratio_bounds(m: &OrliczFunction, p: f64, grid: &BoydGrid) -> Result<RatioBounds> {
    grid.validate()?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(OrliczError::InvalidParameter(format!("p must be at least 1, got {p}")));
    }
    let (b, e) = ratio_extremes(m, p, grid);
    let low_positive = e.ln_min.is_finite() && b.ln_min - e.ln_min <= grid.stability.ln_1p();
    let margin = if m.exponent().is_some() { 0.0 } else { CUSTOM_STRICTNESS };
    let high_below_one = e.ln_max < -margin;
    Ok(RatioBounds {
        p,
        c_low: e.ln_min.exp(),
        c_high: e.ln_max.exp(),
        ln_low: e.ln_min,
        ln_high: e.ln_max,
        low_positive,
        high_below_one,
        holds: low_positive && high_below_one,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NonEmbeddingCertificate {
    pub p: f64,
    /// `2^(-1/p)`.
    pub a: f64,
    /// `1 - sum_k M(a |x1(k) + x2(k)|)`.
    pub margin: f64,
    /// Margin above the norm tolerance.
    pub conclusive: bool,
}

/// Margin by which `a (x1 + x2)` falls inside the unit ball, `a = 2^(-1/p)`; positive
/// margin rules out `x1, x2` being the images of an isometric copy of `l_p^2`.
pub fn non_embedding_certificate(
    space: &LuxemburgSpace,
    p: f64,
    x1: &OrliczVector,
    x2: &OrliczVector,
) -> Result<NonEmbeddingCertificate> {
    if !disjoint(x1, x2)? {
        return Err(OrliczError::PreconditionFailed("images must be disjointly supported".into()));
    }
    let slack = 10.0 * space.tol();
    for (name, x) in [("x1", x1), ("x2", x2)] {
        let n = space.norm(x)?;
        if (n - 1.0).abs() > slack {
            return Err(OrliczError::PreconditionFailed(format!("||{name}|| = {n}, expected 1")));
        }
    }
    let a = 0.5f64.powf(1.0 / p);
    let m = space.function();
    let sum: f64 = x1.coords().iter().zip(x2.coords()).map(|(u, v)| m.eval(a * (u + v).abs())).sum();
    let margin = 1.0 - sum;
    Ok(NonEmbeddingCertificate { p, a, margin, conclusive: margin > space.tol() })
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockCopy {
    pub block: usize,
    /// Common coordinate of each block, `N M(lambda) = 1`.
    pub lambda: f64,
    pub distortion: f64,
    pub norm_estimate: f64,
    pub inverse_norm_estimate: f64,
}

/// Distortion of `l_p^2 -> l_M^(2N)`, `e_i -> u_i`, with `u_1, u_2` equal-coordinate unit
/// vectors on consecutive blocks of length N.
pub fn block_copy_distortion(m: &OrliczFunction, p: f64, block: usize, sampling: &SampleBudget) -> Result<BlockCopy> {
    if block == 0 {
        return Err(OrliczError::InvalidParameter("block size must be at least 1".into()));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(OrliczError::InvalidParameter(format!("p must be at least 1, got {p}")));
    }
    let n = block as f64;
    let lambda = solve_level(m, 1.0 / n)?;
    let e = ratio_extrema(2, sampling, |x| {
        let image = norm_of_profile(m, &[(lambda * x[0].abs(), n), (lambda * x[1].abs(), n)], DEFAULT_TOL)?;
        let lp = (x[0].abs().powf(p) + x[1].abs().powf(p)).powf(1.0 / p);
        Ok(image / lp)
    })?;
    Ok(BlockCopy {
        block,
        lambda,
        distortion: e.max.max(1.0 / e.min),
        norm_estimate: e.max,
        inverse_norm_estimate: 1.0 / e.min,
    })
}

/// `t` in `(0, 1]` with `M(t) = level`, assuming `M(1) = 1`.
fn solve_level(m: &OrliczFunction, level: f64) -> Result<f64> {
    if level >= 1.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if m.eval(hi) < level {
        return Err(OrliczError::InvalidParameter("M(1) lies below the requested level".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if m.eval(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Debug, Serialize)]
pub struct AgeReport {
    pub boyd: BoydIndices,
    pub basis_margin: NonEmbeddingCertificate,
    pub random_margins: Vec<f64>,
    pub min_random_margin: f64,
    pub block_copies: Vec<BlockCopy>,
    /// Block-copy distortion strictly decreases along the block sizes given.
    pub monotone: bool,
}

/// Non-embedding margins on the basis pair and on random disjoint unit pairs, plus the
/// block-copy distortion sweep.
pub fn age_experiment(
    m: &OrliczFunction,
    grid: &BoydGrid,
    pairs: usize,
    dim: usize,
    blocks: &[usize],
    seed: u64,
    sampling: &SampleBudget,
) -> Result<AgeReport> {
    if dim < 2 {
        return Err(OrliczError::InvalidParameter("random pairs need dimension at least 2".into()));
    }
    let boyd = boyd_indices(m, grid)?;
    let p = boyd.p;
    let space = LuxemburgSpace::new(m.clone(), dim)?;
    let basis_margin =
        non_embedding_certificate(&space, p, &OrliczVector::basis(dim, 0, 1.0), &OrliczVector::basis(dim, 1, 1.0))?;
    let random_margins = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let (x1, x2) = random_disjoint_pair(&space, seed, i as u64)?;
            Ok(non_embedding_certificate(&space, p, &x1, &x2)?.margin)
        })
        .collect::<Result<Vec<f64>>>()?;
    let min_random_margin = random_margins.iter().copied().fold(f64::INFINITY, f64::min);
    let block_copies = blocks.iter().map(|&n| block_copy_distortion(m, p, n, sampling)).collect::<Result<Vec<_>>>()?;
    let monotone = block_copies.windows(2).all(|w| w[1].distortion < w[0].distortion);
    Ok(AgeReport { boyd, basis_margin, random_margins, min_random_margin, block_copies, monotone })
}

/// Unit vectors on a random split of the coordinates.
pub fn random_disjoint_pair(space: &LuxemburgSpace, seed: u64, index: u64) -> Result<(OrliczVector, OrliczVector)> {
    let n = space.dim();
    let mut rng = rng_for(seed, 0xA9E, index);
    let cut = rng.random_range(1..n);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for (j, &k) in order.iter().enumerate() {
        let v: f64 = rng.sample(StandardNormal);
        if j < cut {
            a[k] = v;
        } else {
            b[k] = v;
        }
    }
    Ok((space.normalize(&a.into())?, space.normalize(&b.into())?))
}
