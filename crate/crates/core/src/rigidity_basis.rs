//! Snapping near-extreme unit vectors to signed basis vectors, and the budget
//! under which near-isometries send basis vectors close to basis vectors.

use serde::Serialize;

use crate::error::{OrliczError, Result};
use crate::grid::GridSpec;
use crate::luxemburg::{LuxemburgSpace, OrliczVector};
use crate::magnitude::Magnitude;
use crate::orlicz_core::{delta2_constant, submult_constant, OrliczFunction};
use crate::rigidity_disjoint::{
    budget_from_constants, function_constants, witness_split, ConstantGrids, FunctionConstants, Provenance,
    RigidityBudget, Route,
};

/// Values this close to the `f64` floor go through closed forms or linear bounds.
const REPRESENTABLE_FLOOR: f64 = 1e-280;
/// Below this argument the grid for alpha(eps) cannot resolve `1 - eps`.
const SUBMULT_GRID_FLOOR: f64 = 1e-6;
/// Strictness factor applied where a constant must stay strictly below a bound.
const SHRINK: f64 = 1.0 - 1e-6;

fn check_unit_at_one(m: &OrliczFunction) -> Result<()> {
    let m1 = m.eval(1.0);
    if (m1 - 1.0).abs() > 1e-12 {
        return Err(OrliczError::violation(format!("M(1) = {m1} but M(1) = 1 is required")));
    }
    Ok(())
}

/// `r > 1` with `M(1/r) = 1/2`, the norm of `e_1 - e_2`.
pub fn compute_r(m: &OrliczFunction) -> Result<f64> {
    check_unit_at_one(m)?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if !(m.eval(hi) > 0.5) {
        return Err(OrliczError::InvalidParameter("M(s) = 1/2 has no root in (0, 1)".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if m.eval(mid) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(1.0 / (0.5 * (lo + hi)))
}

/// `ln C(l)` through the grid when `l` fits in `f64`, the closed form otherwise.
fn ln_delta2(m: &OrliczFunction, l: Magnitude, grid: &GridSpec) -> Result<(Magnitude, Route)> {
    let lf = l.to_f64();
    if lf.is_finite() && lf < 1e300 {
        return Ok((Magnitude::from_f64(delta2_constant(m, lf, grid)?.ln_value.max(0.0)), Route::Grid));
    }
    let v = m
        .ln_delta2_closed(l)
        .ok_or_else(|| OrliczError::Unrepresentable(format!("C({l}) for a function without closed form")))?;
    Ok((v, Route::ClosedForm))
}

/// `ln alpha(eps)` through the grid when `1 - eps` is resolvable, the closed form otherwise.
fn ln_submult(m: &OrliczFunction, eps: Magnitude, grid: &GridSpec) -> Result<(Magnitude, Route)> {
    let ef = eps.to_f64();
    if (SUBMULT_GRID_FLOOR..1.0).contains(&ef) {
        let s = submult_constant(m, ef, &GridSpec::new(grid.lo, grid.hi, grid.points.min(2048))?)?;
        return Ok((Magnitude::from_f64(s.ln_alpha.max(0.0)), Route::Grid));
    }
    let v = m
        .ln_submult_closed(eps)
        .ok_or_else(|| OrliczError::Unrepresentable(format!("alpha({eps}) for a function without closed form")))?;
    Ok((v, Route::ClosedForm))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SnapThreshold {
    /// h with `M(t) + 1 - M(1 - t) < 1/C(1/eps)` for `0 <= t < h`.
    pub value: Magnitude,
    /// `1 / C(1/eps)`.
    pub target: Magnitude,
    pub route: Route,
}

/// Largest t (to bisection resolution) where `M(t) + 1 - M(1 - t)` stays below `1/C(1/eps)`.
pub fn compute_h(m: &OrliczFunction, eps: Magnitude, grid: &GridSpec) -> Result<SnapThreshold> {
    if !(eps > Magnitude::ZERO && eps < Magnitude::ONE) {
        return Err(OrliczError::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    check_unit_at_one(m)?;
    let (ln_c, _) = ln_delta2(m, eps.recip(), grid)?;
    let target = Magnitude::exp_neg(ln_c);
    let tf = target.to_f64();
    if tf >= REPRESENTABLE_FLOOR {
        let phi = |t: f64| m.eval(t) + m.complement_at_one(t);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) < tf {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        return Ok(SnapThreshold { value: Magnitude::from_f64(lo), target, route: Route::Bisection });
    }
    // M(t) <= t and M(1) - M(1-t) <= M'(1) t on [0, 1] by convexity.
    let value = target / Magnitude::from_f64(1.0 + m.deriv1(1.0));
    Ok(SnapThreshold { value, target, route: Route::LinearBound })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Snap {
    pub index: usize,
    pub sign: i8,
    /// More than one coordinate cleared the threshold.
    pub ambiguous: bool,
}

/// First index with `|x(i)| > 1 - h`, compared as `1 - |x(i)| < h` so that tiny h still works.
pub fn snap_to_basis(space: &LuxemburgSpace, x: &OrliczVector, h: Magnitude) -> Result<Option<Snap>> {
    let n = space.norm(x)?;
    if n > 1.0 + 10.0 * space.tol() {
        return Err(OrliczError::PreconditionFailed(format!("||x|| = {n} exceeds 1")));
    }
    let qualifies = |v: f64| {
        let deficit = 1.0 - v.abs();
        deficit < 0.0 || Magnitude::from_f64(deficit) < h
    };
    let mut hits = x.coords().iter().enumerate().filter(|(_, v)| qualifies(**v));
    Ok(hits.next().map(|(i, v)| Snap {
        index: i,
        sign: if *v < 0.0 { -1 } else { 1 },
        ambiguous: hits.next().is_some(),
    }))
}

/// `eps'` below `eps` with `1 - M(1/(1 + 2 eps')) < gap`; `gap_exact` is used when
/// representable, `gap_lower` (a lower bound on the gap) otherwise.
fn solve_eps_prime(
    m: &OrliczFunction,
    eps: Magnitude,
    gap_exact: Option<f64>,
    gap_lower: Magnitude,
) -> (Magnitude, Route) {
    let ef = eps.to_f64();
    if let Some(gap) = gap_exact.filter(|g| *g >= 1e-12 && ef >= 1e-12) {
        let loss = |e: f64| m.complement_at_one(2.0 * e / (1.0 + 2.0 * e));
        let hi0 = ef * SHRINK;
        if loss(hi0) < gap {
            return (Magnitude::from_f64(hi0), Route::Bisection);
        }
        let (mut lo, mut hi) = (0.0f64, hi0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if loss(mid) < gap {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-10 * hi {
                break;
            }
        }
        // lo is the last point verified feasible.
        return (Magnitude::from_f64(lo), Route::Bisection);
    }
    // 1 - M(1/(1+2e)) = M(1) - M(1 - 2e/(1+2e)) <= 2 M'(1) e; halve for strictness.
    let linear = gap_lower / Magnitude::from_f64(4.0 * m.deriv1(1.0));
    (linear.min(eps * Magnitude::from_f64(0.5)), Route::LinearBound)
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaBudget {
    pub eps: Magnitude,
    pub h: Magnitude,
    pub h_route: Route,
    pub ln_alpha: Magnitude,
    pub alpha_route: Route,
    pub eps_prime: Magnitude,
    pub eps_prime_route: Route,
    pub disjoint: RigidityBudget,
    pub delta: Magnitude,
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisBudget {
    pub eps: f64,
    pub r: f64,
    /// `h(eps/2)` clamped to `1 - 1/r`; the snapping threshold.
    pub h: Magnitude,
    pub h_clamped: bool,
    pub h_route: Route,
    pub ln_alpha: Magnitude,
    pub alpha_route: Route,
    pub eps_prime: Magnitude,
    pub eps_prime_route: Route,
    pub lemma: LemmaBudget,
    pub delta: Magnitude,
    pub provenance: Vec<Provenance>,
}

fn clamped_h(m: &OrliczFunction, eps: Magnitude, r: f64, grid: &GridSpec) -> Result<(Magnitude, bool, Route)> {
    let h = compute_h(m, eps / Magnitude::from_f64(2.0), grid)?;
    let cap = Magnitude::from_f64(1.0 - 1.0 / r);
    Ok(if h.value > cap { (cap, true, h.route) } else { (h.value, false, h.route) })
}

fn lemma_budget(
    m: &OrliczFunction,
    constants: &FunctionConstants,
    eps: Magnitude,
    r: f64,
    grid: &GridSpec,
) -> Result<LemmaBudget> {
    let (h, _, h_route) = clamped_h(m, eps, r, grid)?;
    let (ln_alpha, alpha_route) = ln_submult(m, h, grid)?;
    if ln_alpha.is_zero() {
        return Err(OrliczError::violation(format!("alpha(h) = 1 at h = {h}: M is not strictly supermultiplicative")));
    }
    // M(1/(1+2e')) > 1/alpha  <=>  1 - M(1/(1+2e')) < 1 - 1/alpha = -expm1(-ln alpha) >= l/(1+l)
    let lf = ln_alpha.to_f64();
    let exact = (lf.is_normal()).then(|| -(-lf).exp_m1());
    let lower = ln_alpha / Magnitude::from_f64(1.0 + lf);
    let (eps_prime, eps_prime_route) = solve_eps_prime(m, eps, exact, lower);
    let sixth = eps_prime / Magnitude::from_f64(6.0);
    let disjoint = budget_from_constants(m, constants, constants, sixth)?;
    let delta = disjoint.delta.min(sixth * Magnitude::from_f64(SHRINK));
    Ok(LemmaBudget { eps, h, h_route, ln_alpha, alpha_route, eps_prime, eps_prime_route, disjoint, delta })
}

/// delta such that every `(1 + delta)`-embedding of `l_M^2` sends each basis vector
/// within `eps` of a signed basis vector.
pub fn basis_delta_of_eps(m: &OrliczFunction, eps: f64, grids: &ConstantGrids) -> Result<BasisBudget> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(OrliczError::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    let constants = function_constants(m, grids)?;
    let grid = &grids.unit_grid;
    let r = compute_r(m)?;
    let e = Magnitude::from_f64(eps);
    let (h, h_clamped, h_route) = clamped_h(m, e, r, grid)?;
    let (ln_alpha, alpha_route) = ln_submult(m, h, grid)?;
    if ln_alpha.is_zero() {
        return Err(OrliczError::violation(format!(
            "alpha(h(eps/2)) = 1 at h = {h}: M is not strictly supermultiplicative"
        )));
    }
    // M(1/(1+2e')) > 2/(1+alpha)  <=>  1 - M(1/(1+2e')) < tanh(ln alpha / 2) >= l/(2+l)
    let lf = ln_alpha.to_f64();
    let exact = lf.is_normal().then(|| (0.5 * lf).tanh());
    let lower = ln_alpha / Magnitude::from_f64(2.0 + lf);
    let (eps_prime, eps_prime_route) = solve_eps_prime(m, e, exact, lower);
    let lemma = lemma_budget(m, &constants, eps_prime / Magnitude::from_f64(2.0), r, grid)?;
    let delta = lemma.delta.min(eps_prime) * Magnitude::from_f64(SHRINK);
    let provenance = vec![
        Provenance::new("r", Route::Bisection, None),
        Provenance::new("h(eps/2)", h_route, Some(*grid)),
        Provenance::new("alpha(h(eps/2))", alpha_route, Some(*grid)),
        Provenance::new("eps'", eps_prime_route, None),
        Provenance::new("lemma h", lemma.h_route, Some(*grid)),
        Provenance::new("lemma alpha", lemma.alpha_route, Some(*grid)),
        Provenance::new("lemma eps'", lemma.eps_prime_route, None),
    ];
    Ok(BasisBudget {
        eps,
        r,
        h,
        h_clamped,
        h_route,
        ln_alpha,
        alpha_route,
        eps_prime,
        eps_prime_route,
        lemma,
        delta,
        provenance,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessRoute {
    /// The normalized image itself snapped.
    Direct,
    /// Its disjoint truncation against another image snapped.
    Split,
    /// Nothing cleared the threshold; the largest coordinate was taken.
    Dominant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BasisWitness {
    pub index: usize,
    pub sign: i8,
    /// `||x - sign e_index||`.
    pub error: f64,
    pub route: WitnessRoute,
    pub certified: bool,
}

/// Signed basis vectors close to each image, with distinct indices.
pub fn extract_basis_witnesses(
    space: &LuxemburgSpace,
    h: Magnitude,
    images: &[OrliczVector],
) -> Result<Vec<BasisWitness>> {
    let mut out: Vec<BasisWitness> = Vec::with_capacity(images.len());
    for (i, x) in images.iter().enumerate() {
        let xhat = space.normalize(x)?;
        let mut found = snap_to_basis(space, &xhat, h)?.map(|s| (s, WitnessRoute::Direct));
        if found.is_none() {
            for (j, y) in images.iter().enumerate().filter(|(j, _)| *j != i) {
                let split = witness_split(space, x, y)?;
                if split.f_tilde.is_zero() {
                    continue;
                }
                let fhat = space.normalize(&split.f_tilde)?;
                if let Some(s) = snap_to_basis(space, &fhat, h)? {
                    found = Some((s, WitnessRoute::Split));
                    break;
                }
                let _ = j;
            }
        }
        let (index, sign, route) = match found {
            Some((s, route)) => (s.index, s.sign, route),
            None => {
                let (idx, v) = xhat.coords().iter().enumerate().fold((0, 0.0f64), |best, (k, v)| {
                    if v.abs() > best.1.abs() {
                        (k, *v)
                    } else {
                        best
                    }
                });
                (idx, if v < 0.0 { -1 } else { 1 }, WitnessRoute::Dominant)
            }
        };
        if out.iter().any(|w| w.index == index) {
            return Err(OrliczError::DistinctnessViolation { index });
        }
        let error = space.distance(x, &OrliczVector::basis(space.dim(), index, f64::from(sign)))?;
        out.push(BasisWitness { index, sign, error, route, certified: route != WitnessRoute::Dominant });
    }
    Ok(out)
}

/// `sum_k M(|f1(k) - g1(k)| / (eps' + (1 + delta) r))` with the lemma's constants;
/// exceeds 1 whenever f1, g1 are disjoint unit vectors with coordinates below `1 - h`.
pub fn lemma_contradiction_modular(
    space: &LuxemburgSpace,
    budget: &BasisBudget,
    f1: &OrliczVector,
    g1: &OrliczVector,
) -> Result<f64> {
    let l = &budget.lemma;
    let rho = l.eps_prime.to_f64() + (1.0 + l.delta.to_f64()) * budget.r;
    space.modular(&f1.sub(g1)?, rho)
}
