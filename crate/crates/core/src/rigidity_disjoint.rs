//! Constant cascade, witness split and the delta(eps) budget guaranteeing that
//! near-isometric embeddings keep disjoint vectors nearly disjoint.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embeddings::{perturb, random_disjoint_isometry, IsometryMode, SampleBudget};
use crate::error::{OrliczError, Result};
use crate::grid::GridSpec;
use crate::luxemburg::{disjoint, LuxemburgSpace, OrliczVector};
use crate::magnitude::Magnitude;
use crate::norm_geometry::{MultiIndex, NormCurve, NormSurface, ETA_RANGE};
use crate::orlicz_core::{check_good, delta2_constant, FamilySpec, OrliczFunction};
use crate::seeds::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BudgetMode {
    #[default]
    Certified,
    Empirical,
}

/// How a constant was obtained.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub quantity: String,
    pub route: Route,
    pub grid: Option<GridSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Grid,
    ClosedForm,
    LinearBound,
    Bisection,
    Sampled,
    Exact,
}

impl Provenance {
    pub fn new(quantity: impl Into<String>, route: Route, grid: Option<GridSpec>) -> Self {
        Provenance { quantity: quantity.into(), route, grid }
    }
}

/// Grids for the growth constants.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConstantGrids {
    pub k_grid: GridSpec,
    pub unit_grid: GridSpec,
}

impl Default for ConstantGrids {
    fn default() -> Self {
        ConstantGrids { k_grid: GridSpec::growth_default(), unit_grid: GridSpec::unit_default() }
    }
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct Cascade {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// `C1 = 2 C0`, `C2 = 2 C0 (1 + 2 C1 + C1^2)`,
/// `C3 = 2 C0 (1 + 4 C1 + 3 C2 + 3 C1^2 + 2 C1 C2 + C1^3)`.
pub fn compute_cascade(c0: f64) -> Result<Cascade> {
    if !(c0 > 0.0 && c0.is_finite()) {
        return Err(OrliczError::InvalidParameter(format!("C0 must be positive and finite, got {c0}")));
    }
    let c1 = 2.0 * c0;
    let c2 = 2.0 * c0 * (1.0 + 2.0 * c1 + c1 * c1);
    let c3 = 2.0 * c0 * (1.0 + 4.0 * c1 + 3.0 * c2 + 3.0 * c1 * c1 + 2.0 * c1 * c2 + c1 * c1 * c1);
    if !c3.is_finite() {
        return Err(OrliczError::Unrepresentable(format!("C3 overflows for C0 = {c0:e}")));
    }
    Ok(Cascade { c1, c2, c3 })
}

/// Per-function constants feeding the budget.
#[derive(Clone, Debug, Serialize)]
pub struct FunctionConstants {
    pub family: FamilySpec,
    pub mode: BudgetMode,
    pub k: f64,
    pub c_5_4: f64,
    pub c_15: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Taylor remainder coefficient `C3 / 6`.
    pub taylor: f64,
    pub grids: ConstantGrids,
    /// Sample count and seed for empirical constants.
    pub sampling: Option<(usize, u64)>,
}

/// Certified constants; fails with the violation list when M is not good.
pub fn function_constants(m: &OrliczFunction, grids: &ConstantGrids) -> Result<FunctionConstants> {
    let report = check_good(m, &grids.k_grid)?;
    if !report.is_good {
        return Err(OrliczError::HypothesisViolation(report.violations));
    }
    let c_5_4 = delta2_constant(m, 1.25, &grids.unit_grid)?.value;
    let c_15 = delta2_constant(m, 15.0, &grids.unit_grid)?.value;
    let c0 = 3584.0 * report.k.powi(3) * (c_5_4 + c_15);
    let cascade = compute_cascade(c0)?;
    Ok(FunctionConstants {
        family: m.tag(),
        mode: BudgetMode::Certified,
        k: report.k,
        c_5_4,
        c_15,
        c0,
        c1: cascade.c1,
        c2: cascade.c2,
        c3: cascade.c3,
        taylor: cascade.c3 / 6.0,
        grids: *grids,
        sampling: None,
    })
}

/// `C0 = 3584 K^3 (C(5/4) + C(15))`.
pub fn compute_c0(m: &OrliczFunction, grids: &ConstantGrids) -> Result<f64> {
    Ok(function_constants(m, grids)?.c0)
}

/// Replaces C0 and C3 by sampled suprema over random admissible surfaces.
pub fn empirical_constants(
    m: &OrliczFunction,
    grids: &ConstantGrids,
    samples: usize,
    seed: u64,
) -> Result<FunctionConstants> {
    let certified = function_constants(m, grids)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut c0, mut c3) = (0.0f64, 0.0f64);
    let betas: Vec<MultiIndex> = MultiIndex::all().collect();
    for _ in 0..samples.max(1) {
        let surface = random_surface(m, &mut rng, 2..=6)?;
        let alpha = rng.random_range(-0.49..0.49);
        let eta = rng.random_range(ETA_RANGE.0 * 1.001..ETA_RANGE.1 * 0.999);
        for beta in &betas {
            c0 = c0.max(surface.partial(alpha, eta, *beta)?.abs());
        }
        let curve = NormCurve::new(surface);
        let a: f64 = rng.random_range(0.05..0.45) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        c3 = c3.max(6.0 * curve.taylor_defect(a)? / a.abs().powi(3));
    }
    let c1 = 2.0 * c0;
    Ok(FunctionConstants {
        mode: BudgetMode::Empirical,
        c0,
        c1,
        c2: 2.0 * c0 * (1.0 + 2.0 * c1 + c1 * c1),
        c3,
        taylor: c3 / 6.0,
        sampling: Some((samples, seed)),
        ..certified
    })
}

/// Random pair (f, g) with norms drawn uniformly from [4/5, 5/4].
pub fn random_surface(
    m: &OrliczFunction,
    rng: &mut ChaCha8Rng,
    dims: std::ops::RangeInclusive<usize>,
) -> Result<NormSurface> {
    let dim = rng.random_range(dims);
    let space = LuxemburgSpace::new(m.clone(), dim)?;
    let draw = |rng: &mut ChaCha8Rng| -> Result<OrliczVector> {
        loop {
            let v: OrliczVector = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect::<Vec<_>>().into();
            if !v.is_zero() {
                let target = rng.random_range(0.8..1.25);
                return Ok(space.normalize(&v)?.scaled(target));
            }
        }
    };
    let f = draw(rng)?;
    let g = draw(rng)?;
    NormSurface::new(&space, f, g)
}

/// `h_M(eps) = 1 / C(5 / (4 eps))`, equal to 1 when `5 / (4 eps) <= 1`.
pub fn h_m(m: &OrliczFunction, eps: Magnitude, grid: &GridSpec) -> Result<(Magnitude, Provenance)> {
    let l = Magnitude::from_f64(1.25) / eps;
    if l <= Magnitude::ONE {
        return Ok((Magnitude::ONE, Provenance::new("h_M", Route::Exact, None)));
    }
    let lf = l.to_f64();
    if lf.is_finite() && lf < 1e300 {
        let c = delta2_constant(m, lf, grid)?;
        return Ok((Magnitude::from_ln(-c.ln_value), Provenance::new("h_M", Route::Grid, Some(*grid))));
    }
    let ln_c = m
        .ln_delta2_closed(l)
        .ok_or_else(|| OrliczError::Unrepresentable(format!("C({l}) for a function without closed form")))?;
    Ok((Magnitude::exp_neg(ln_c), Provenance::new("h_M", Route::ClosedForm, None)))
}

/// Disjoint truncations `f 1_A`, `g 1_B` with `A = {k : |f(k)| >= |g(k)|}`.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessPair {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub f_tilde: OrliczVector,
    pub g_tilde: OrliczVector,
    pub err_f: f64,
    pub err_g: f64,
}

impl WitnessPair {
    pub fn max_err(&self) -> f64 {
        self.err_f.max(self.err_g)
    }
}

pub fn witness_split(space: &LuxemburgSpace, f: &OrliczVector, g: &OrliczVector) -> Result<WitnessPair> {
    disjoint(f, g)?;
    let in_a: Vec<bool> = f.coords().iter().zip(g.coords()).map(|(x, y)| x.abs() >= y.abs()).collect();
    let in_b: Vec<bool> = in_a.iter().map(|x| !x).collect();
    let f_tilde = f.restricted(&in_a);
    let g_tilde = g.restricted(&in_b);
    let err_f = space.norm(&f.restricted(&in_b))?;
    let err_g = space.norm(&g.restricted(&in_a))?;
    let idx = |mask: &[bool]| mask.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| i).collect();
    Ok(WitnessPair { a: idx(&in_a), b: idx(&in_b), f_tilde, g_tilde, err_f, err_g })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SecondDerivativeCriterion {
    pub value: f64,
    pub h_m: f64,
    pub holds: bool,
}

/// Whether `d^2F/dalpha^2 (0, N(0)) >= h_M(eps)`.
pub fn criterion_second_derivative(
    surface: &NormSurface,
    eps: f64,
    grid: &GridSpec,
) -> Result<SecondDerivativeCriterion> {
    let n0 = surface.space().norm(surface.f())?;
    let value = surface.partial(0.0, n0, MultiIndex::new(2, 0))?;
    let h = h_m(surface.function(), Magnitude::from_f64(eps), grid)?.0.to_f64();
    Ok(SecondDerivativeCriterion { value, h_m: h, holds: value >= h })
}

#[derive(Clone, Debug, Serialize)]
pub struct RigidityBudget {
    pub eps: Magnitude,
    pub mode: BudgetMode,
    pub source: FunctionConstants,
    pub target: FunctionConstants,
    /// `C = max(C3^{M1}, C3^{M2}) / 6`.
    pub taylor_constant: f64,
    pub h_m: Magnitude,
    pub h1: Magnitude,
    pub alpha0: Magnitude,
    pub alpha0_clamped: bool,
    /// `alpha0^2 h1 / 4`.
    pub q: Magnitude,
    pub delta1: Magnitude,
    pub delta2: Magnitude,
    pub delta: Magnitude,
    pub provenance: Vec<Provenance>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct BudgetOptions {
    pub grids: ConstantGrids,
    pub mode: BudgetMode,
    pub samples: usize,
    pub seed: u64,
}

impl BudgetOptions {
    pub fn constants(&self, m: &OrliczFunction) -> Result<FunctionConstants> {
        match self.mode {
            BudgetMode::Certified => function_constants(m, &self.grids),
            BudgetMode::Empirical => empirical_constants(m, &self.grids, self.samples.max(1), self.seed),
        }
    }
}

pub fn delta_of_eps(
    m1: &OrliczFunction,
    m2: &OrliczFunction,
    eps: f64,
    opts: &BudgetOptions,
) -> Result<RigidityBudget> {
    if !(eps > 0.0) {
        return Err(OrliczError::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let c1 = opts.constants(m1)?;
    let c2 = opts.constants(m2)?;
    budget_from_constants(m2, &c1, &c2, Magnitude::from_f64(eps))
}

/// The delta(eps) chain from precomputed constants; `eps` may lie far below `f64` range.
pub fn budget_from_constants(
    m2: &OrliczFunction,
    source: &FunctionConstants,
    target: &FunctionConstants,
    eps: Magnitude,
) -> Result<RigidityBudget> {
    if eps.is_zero() {
        return Err(OrliczError::InvalidParameter("eps must be positive".into()));
    }
    let mode = if source.mode == BudgetMode::Empirical || target.mode == BudgetMode::Empirical {
        BudgetMode::Empirical
    } else {
        BudgetMode::Certified
    };
    let mut provenance = vec![
        Provenance::new("K", Route::Grid, Some(target.grids.k_grid)),
        Provenance::new("C(5/4), C(15)", Route::Grid, Some(target.grids.unit_grid)),
    ];
    if mode == BudgetMode::Empirical {
        provenance.push(Provenance::new("C0, C3", Route::Sampled, None));
    }
    let taylor_constant = source.taylor.max(target.taylor);
    let (h, prov) = h_m(m2, eps, &target.grids.unit_grid)?;
    provenance.push(prov);
    let h1 = h / Magnitude::from_f64(6.0 * target.c0);
    let mut alpha0 = h1 / Magnitude::from_f64(8.0 * taylor_constant);
    let eighth = Magnitude::from_f64(0.125);
    let alpha0_clamped = alpha0 >= eighth;
    if alpha0_clamped {
        if mode == BudgetMode::Certified {
            return Err(OrliczError::DegenerateBudget(format!("alpha0 = {alpha0} is not below 1/8")));
        }
        alpha0 = Magnitude::from_f64(0.124);
    }
    let q = alpha0.powf(2.0) * h1 / Magnitude::from_f64(4.0);
    let qf = q.to_f64();
    if !(qf < 1.0) {
        return Err(OrliczError::DegenerateBudget(format!("alpha0^2 h1 / 4 = {q} is not below 1")));
    }
    // delta1 = 1/(1-q) - 1 = q/(1-q), delta2 = (1+q)/(1+q/2) - 1 = (q/2)/(1+q/2);
    // the quotient forms avoid cancellation when q is tiny.
    let delta1 = q / Magnitude::from_f64(1.0 - qf);
    let half = q / Magnitude::from_f64(2.0);
    let delta2 = half / Magnitude::from_f64(1.0 + qf / 2.0);
    let delta = Magnitude::from_f64(0.25).min(delta1).min(delta2);
    Ok(RigidityBudget {
        eps,
        mode,
        source: source.clone(),
        target: target.clone(),
        taylor_constant,
        h_m: h,
        h1,
        alpha0,
        alpha0_clamped,
        q,
        delta1,
        delta2,
        delta,
        provenance,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub alpha: f64,
    /// `||f + alpha g||` as computed.
    pub lhs: f64,
    /// `(1 + delta) ||u + alpha v||` as computed.
    pub rhs: f64,
    pub direct_holds: bool,
    /// Lower bound on `||f + alpha g|| - ||f||` from the Taylor expansion.
    pub lower_excess: f64,
    /// Upper bound on `||u + alpha v|| - 1`.
    pub upper_excess: f64,
    /// `lower_excess - upper_excess - delta (1 + upper_excess) - delta / (1 + delta)`.
    pub margin: f64,
    pub n_prime: f64,
    pub n_second: f64,
    pub n_prime_uv: f64,
    pub n_second_uv: f64,
}

/// Finds `alpha = +-alpha0` with `||f + alpha g|| > (1 + delta) ||u + alpha v||`.
///
/// The direct comparison of the two norms cannot resolve increments of size
/// `alpha0`, so the decision rests on the second-order expansions of both curves
/// with remainder `C |alpha|^3`, using `||f|| >= 1 / (1 + delta)`.
pub fn discriminating_alpha(
    budget: &RigidityBudget,
    source: &LuxemburgSpace,
    target: &LuxemburgSpace,
    u: &OrliczVector,
    v: &OrliczVector,
    f: &OrliczVector,
    g: &OrliczVector,
) -> Result<Certificate> {
    let delta = budget.delta.to_f64();
    let slack = 10.0 * source.tol().max(target.tol());
    if !disjoint(u, v)? {
        return Err(OrliczError::PreconditionFailed("u and v are not disjoint".into()));
    }
    for (name, x) in [("u", u), ("v", v)] {
        let n = source.norm(x)?;
        if (n - 1.0).abs() > slack {
            return Err(OrliczError::PreconditionFailed(format!("||{name}|| = {n}, expected 1")));
        }
    }
    for (name, x) in [("f", f), ("g", g)] {
        let n = target.norm(x)?;
        if n < 1.0 / (1.0 + delta) - slack || n > 1.0 + delta + slack {
            return Err(OrliczError::PreconditionFailed(format!("||{name}|| = {n} outside [1/(1+delta), 1+delta]")));
        }
    }
    let split = witness_split(target, f, g)?;
    if Magnitude::from_f64(split.max_err()) <= budget.eps {
        return Err(OrliczError::PreconditionFailed(format!(
            "(f, g) has an eps-witness: split errors {:e}, {:e}",
            split.err_f, split.err_g
        )));
    }
    let alpha0 = budget.alpha0.to_f64();
    if !(alpha0 >= 1e-150) {
        return Err(OrliczError::Unrepresentable(format!(
            "alpha0 = {} is below the certificate's f64 range",
            budget.alpha0
        )));
    }
    let fg = NormCurve::new(NormSurface::new(target, f.clone(), g.clone())?);
    let uv = NormCurve::new(NormSurface::new(source, u.clone(), v.clone())?);
    let (np, ns) = (fg.prime(0.0)?, fg.second(0.0)?);
    let (np_uv, ns_uv) = (uv.prime(0.0)?, uv.second(0.0)?);
    let cubic = budget.taylor_constant * alpha0.powi(3);

    let attempt = |alpha: f64| -> Result<Certificate> {
        let lower_excess = alpha * np + 0.5 * alpha * alpha * ns - cubic;
        let upper_excess = alpha * np_uv + 0.5 * alpha * alpha * ns_uv + cubic;
        let margin = lower_excess - upper_excess - delta * (1.0 + upper_excess) - delta / (1.0 + delta);
        let lhs = fg.value(alpha)?;
        let rhs = (1.0 + delta) * uv.value(alpha)?;
        Ok(Certificate {
            alpha,
            lhs,
            rhs,
            direct_holds: lhs > rhs,
            lower_excess,
            upper_excess,
            margin,
            n_prime: np,
            n_second: ns,
            n_prime_uv: np_uv,
            n_second_uv: ns_uv,
        })
    };
    let first = if np >= 0.0 { alpha0 } else { -alpha0 };
    let c = attempt(first)?;
    if c.margin > 0.0 {
        return Ok(c);
    }
    let other = attempt(-first)?;
    if other.margin > 0.0 {
        return Ok(other);
    }
    Err(OrliczError::Counterexample(format!(
        "margins {:e} at alpha = {first:e} and {:e} at alpha = {:e}",
        c.margin, other.margin, -first
    )))
}

#[derive(Clone, Debug, Serialize)]
pub struct DisjointnessTrial {
    pub trial: usize,
    pub seed: u64,
    pub achieved_distortion: f64,
    pub perturbation_scale: f64,
    pub err_f: f64,
    pub err_g: f64,
    pub within_eps: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DisjointnessReport {
    pub eps: f64,
    pub delta: f64,
    pub dim: usize,
    pub trials: Vec<DisjointnessTrial>,
    pub max_err: f64,
    pub failures: usize,
}

/// Images of `e_1, e_2` under seeded `(1 + delta)`-embeddings of `l_M^2` into `space`,
/// split into disjoint witnesses; each trial records whether both errors stay within eps.
pub fn disjointness_experiment(
    space: &LuxemburgSpace,
    eps: f64,
    delta: f64,
    trials: usize,
    seed: u64,
    sampling: &SampleBudget,
) -> Result<DisjointnessReport> {
    let source = space.resized(2)?;
    let records = (0..trials)
        .into_par_iter()
        .map(|i| {
            let trial_seed = derive_seed(seed, 0xD15, i as u64);
            let t = random_disjoint_isometry(&source, space, trial_seed, IsometryMode::SignedInjection)?;
            let budget = SampleBudget { seed: trial_seed, ..*sampling };
            let (t, rec) = perturb(&t, delta, trial_seed, &budget)?;
            let w = witness_split(space, &t.columns()[0], &t.columns()[1])?;
            Ok(DisjointnessTrial {
                trial: i,
                seed: trial_seed,
                achieved_distortion: rec.achieved,
                perturbation_scale: rec.scale,
                err_f: w.err_f,
                err_g: w.err_g,
                within_eps: w.max_err() <= eps,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_err = records.iter().map(|r| r.err_f.max(r.err_g)).fold(0.0, f64::max);
    let failures = records.iter().filter(|r| !r.within_eps).count();
    Ok(DisjointnessReport { eps, delta, dim: space.dim(), trials: records, max_err, failures })
}
