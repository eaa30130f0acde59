use proptest::prelude::*;

use orlicz::embeddings::{
    distortion, random_disjoint_isometry, EmbeddingMap, IsometryMode, SampleBudget, SignedPermutation,
};
use orlicz::grid::GridSpec;
use orlicz::luxemburg::DEFAULT_TOL;
use orlicz::norm_geometry::{MultiIndex, NormCurve, NormSurface};
use orlicz::orlicz_core::{delta2_constant, CustomFunction};
use orlicz::{LuxemburgSpace, Magnitude, OrliczFunction, OrliczVector};

fn function() -> impl Strategy<Value = OrliczFunction> {
    prop_oneof![
        (1.2f64..8.0).prop_map(|p| OrliczFunction::power(p).unwrap()),
        (3.2f64..8.0).prop_map(|p| OrliczFunction::exp_weighted(p).unwrap()),
    ]
}

fn coords(max_dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 1..=max_dim)
}

fn nonzero(max_dim: usize) -> impl Strategy<Value = Vec<f64>> {
    coords(max_dim).prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

fn pair(max_dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max_dim).prop_flat_map(|n| (prop::collection::vec(-5.0f64..5.0, n), prop::collection::vec(-5.0f64..5.0, n)))
}

fn space(m: &OrliczFunction, dim: usize) -> LuxemburgSpace {
    LuxemburgSpace::new(m.clone(), dim).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn norm_is_homogeneous(m in function(), x in coords(12), lambda in -20.0f64..20.0) {
        let s = space(&m, x.len());
        let f: OrliczVector = x.into();
        let n = s.norm(&f).unwrap();
        let scaled = s.norm(&f.scaled(lambda)).unwrap();
        prop_assert!((scaled - lambda.abs() * n).abs() <= 10.0 * DEFAULT_TOL * (1.0 + lambda.abs() * n));
    }

    #[test]
    fn triangle_inequality(m in function(), (x, y) in pair(12)) {
        let s = space(&m, x.len());
        let (f, g): (OrliczVector, OrliczVector) = (x.into(), y.into());
        let lhs = s.norm(&f.axpy(1.0, &g).unwrap()).unwrap();
        prop_assert!(lhs <= s.norm(&f).unwrap() + s.norm(&g).unwrap() + 10.0 * DEFAULT_TOL);
    }

    #[test]
    fn sign_flips_preserve_the_norm(m in function(), x in coords(12), mask in prop::collection::vec(any::<bool>(), 12)) {
        let s = space(&m, x.len());
        let flipped: Vec<f64> = x.iter().zip(&mask).map(|(v, f)| if *f { -v } else { *v }).collect();
        let a = s.norm(&x.into()).unwrap();
        let b = s.norm(&flipped.into()).unwrap();
        prop_assert!((a - b).abs() <= DEFAULT_TOL * a.max(1.0));
    }

    #[test]
    fn modular_is_additive_on_disjoint_vectors(m in function(), x in nonzero(10), split in 1usize..10, rho in 0.1f64..10.0) {
        let split = split.min(x.len());
        let s = space(&m, x.len());
        let f: OrliczVector = x.iter().enumerate().map(|(i, v)| if i < split { *v } else { 0.0 }).collect::<Vec<_>>().into();
        let g: OrliczVector = x.iter().enumerate().map(|(i, v)| if i >= split { *v } else { 0.0 }).collect::<Vec<_>>().into();
        let whole = s.modular(&f.axpy(1.0, &g).unwrap(), rho).unwrap();
        let parts = s.modular(&f, rho).unwrap() + s.modular(&g, rho).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-14 * whole.max(1.0));
    }

    #[test]
    fn modular_decreases_in_rho(m in function(), x in nonzero(10), rho in 0.05f64..5.0) {
        let s = space(&m, x.len());
        let f: OrliczVector = x.into();
        let ladder: Vec<f64> = (0..8).map(|i| s.modular(&f, rho * 1.5f64.powi(i)).unwrap()).collect();
        prop_assert!(ladder.windows(2).all(|w| w[1] < w[0] || w[0] == 0.0));
    }

    #[test]
    fn modular_is_one_at_the_norm(m in function(), x in nonzero(20)) {
        let s = space(&m, x.len());
        let f: OrliczVector = x.into();
        prop_assert!((s.modular(&f, s.norm(&f).unwrap()).unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn norm_is_a_lattice_norm(m in function(), x in coords(10), shrink in prop::collection::vec(0.0f64..=1.0, 10)) {
        let s = space(&m, x.len());
        let y: Vec<f64> = x.iter().zip(&shrink).map(|(v, t)| v * t).collect();
        prop_assert!(s.norm(&y.into()).unwrap() <= s.norm(&x.into()).unwrap() + DEFAULT_TOL);
    }

    #[test]
    fn power_norm_is_the_p_norm(p in 1.2f64..9.0, x in coords(30)) {
        let m = OrliczFunction::power(p).unwrap();
        let oracle = x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
        prop_assert!((space(&m, x.len()).norm(&x.into()).unwrap() - oracle).abs() <= 1e-10 * oracle.max(1.0));
    }

    #[test]
    fn power_is_multiplicative(p in 1.2f64..9.0, t in 1e-6f64..=1.0, u in 1e-6f64..=1.0) {
        let m = OrliczFunction::power(p).unwrap();
        let (a, b) = (m.eval(t * u), m.eval(t) * m.eval(u));
        prop_assert!((a - b).abs() <= 1e-14 * b);
    }

    #[test]
    fn derivatives_match_forward_differences(m in function(), t in 0.05f64..10.0) {
        // Forward differences converge at rate O(h).
        let errs: Vec<f64> = [1e-3, 1e-4].iter().map(|h| {
            (1..=3).map(|k| {
                let fd = (m.deriv(k - 1, t + h) - m.deriv(k - 1, t)) / h;
                (fd - m.deriv(k, t)).abs() / m.deriv(k, t).abs().max(1.0)
            }).fold(0.0, f64::max)
        }).collect();
        prop_assert!(errs[1] <= 0.2 * errs[0] + 1e-9, "errors {errs:?}");
    }

    #[test]
    fn custom_fallback_matches_closed_form(p in 3.2f64..7.0, t in 0.05f64..5.0) {
        let exact = OrliczFunction::exp_weighted(p).unwrap();
        let f = move |t: f64| t.abs().powf(p) * (t.abs() - 1.0).exp();
        let custom = OrliczFunction::custom(CustomFunction { name: "fd".into(), eval: std::sync::Arc::new(f), derivs: [None, None, None] });
        for k in 1..=3 {
            let tol = [1e-8, 1e-5, 1e-2][k - 1];
            let (a, b) = (custom.deriv(k, t), exact.deriv(k, t));
            prop_assert!((a - b).abs() <= tol * b.abs().max(1.0), "order {k}: {a} vs {b}");
        }
    }

    #[test]
    fn magnitude_tracks_f64(x in 1e-200f64..1e200, y in 1e-200f64..1e200, k in -3.0f64..3.0) {
        let (a, b) = (Magnitude::from_f64(x), Magnitude::from_f64(y));
        // Compare logarithms so that products outside the f64 range are covered.
        let close = |m: Magnitude, ln_v: f64| (m.ln() - ln_v).abs() <= 1e-12 * (1.0 + ln_v.abs());
        prop_assert!(close(a * b, x.ln() + y.ln()));
        prop_assert!(close(a / b, x.ln() - y.ln()));
        prop_assert!(close(a + b, (x + y).ln()));
        prop_assert!(close(a.powf(k), k * x.ln()));
        prop_assert!(close(a.recip(), -x.ln()));
        prop_assert_eq!(a < b, x < y);
        if (x * y).is_normal() {
            prop_assert!(((a * b).to_f64() - x * y).abs() <= 1e-10 * x * y);
        }
    }

    #[test]
    fn signed_permutations_are_isometries(m in function(), x in coords(8), seed in any::<u64>()) {
        let n = x.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut state = seed;
        let mut next = || { state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); state >> 33 };
        for i in (1..n).rev() {
            perm.swap(i, (next() as usize) % (i + 1));
        }
        let signs: Vec<i8> = (0..n).map(|_| if next() % 2 == 0 { 1 } else { -1 }).collect();
        let u = SignedPermutation::new(perm, signs).unwrap();
        let s = space(&m, n);
        let f: OrliczVector = x.into();
        let a = s.norm(&f).unwrap();
        prop_assert!((s.norm(&u.apply(&f).unwrap()).unwrap() - a).abs() <= DEFAULT_TOL * a.max(1.0));
    }

    #[test]
    fn surface_vanishes_along_the_norm_curve(m in function(), (x, y) in pair(6), alpha in -0.45f64..0.45) {
        let s = space(&m, x.len());
        let (f, g): (OrliczVector, OrliczVector) = (x.into(), y.into());
        prop_assume!(!f.is_zero() && !g.is_zero());
        let (f, g) = (s.normalize(&f).unwrap(), s.normalize(&g).unwrap());
        let c = NormCurve::new(NormSurface::new(&s, f, g).unwrap());
        let n = c.value(alpha).unwrap();
        prop_assume!(n > 0.13);
        prop_assert!(c.surface().value(alpha, n).unwrap().abs() <= 1e-9);
        prop_assert!(c.surface().partial(alpha, n, MultiIndex::new(0, 1)).unwrap() < -0.5);
    }

    #[test]
    fn norm_curve_is_convex(m in function(), (x, y) in pair(6), a1 in -0.45f64..0.45, a2 in -0.45f64..0.45) {
        let s = space(&m, x.len());
        let (f, g): (OrliczVector, OrliczVector) = (x.into(), y.into());
        prop_assume!(!f.is_zero() && !g.is_zero());
        let c = NormCurve::new(NormSurface::new(&s, s.normalize(&f).unwrap(), s.normalize(&g).unwrap()).unwrap());
        let mid = c.value(0.5 * (a1 + a2)).unwrap();
        prop_assert!(mid <= 0.5 * (c.value(a1).unwrap() + c.value(a2).unwrap()) + DEFAULT_TOL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn partials_match_central_differences(p in 3.5f64..7.0, (x, y) in pair(5), alpha in -0.4f64..0.4, eta in 0.3f64..1.8) {
        let m = OrliczFunction::exp_weighted(p).unwrap();
        let s = space(&m, x.len());
        let (f, g): (OrliczVector, OrliczVector) = (x.into(), y.into());
        prop_assume!(!f.is_zero() && !g.is_zero());
        let surf = NormSurface::new(&s, s.normalize(&f).unwrap(), s.normalize(&g).unwrap()).unwrap();
        // Kinks of |f + alpha g| at zero spoil central differences.
        let near_kink = surf.f().coords().iter().zip(surf.g().coords())
            .any(|(a, b)| (a + alpha * b).abs() < 1e-2 && b.abs() > 0.0);
        prop_assume!(!near_kink);
        for beta in MultiIndex::all().filter(|b| b.order() > 0) {
            let h = if beta.order() == 1 { 1e-5 } else { 1e-4 };
            // Difference the lower-order partial in whichever variable beta still needs.
            let (lower, da) = if beta.d_alpha > 0 {
                (MultiIndex::new(beta.d_alpha - 1, beta.d_eta), true)
            } else {
                (MultiIndex::new(0, beta.d_eta - 1), false)
            };
            let at = |d: f64| if da { surf.partial(alpha + d, eta, lower) } else { surf.partial(alpha, eta + d, lower) };
            let fd = (at(h).unwrap() - at(-h).unwrap()) / (2.0 * h);
            let exact = surf.partial(alpha, eta, beta).unwrap();
            prop_assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1.0), "{beta:?}: {fd} vs {exact}");
        }
    }

    #[test]
    fn distortion_is_invariant_under_signed_permutations(seed in any::<u64>(), flip in any::<bool>()) {
        let m = OrliczFunction::exp_weighted(4.0).unwrap();
        let (src, tgt) = (space(&m, 2), space(&m, 5));
        let iso = random_disjoint_isometry(&src, &tgt, seed, IsometryMode::SignedInjection).unwrap();
        let cols: Vec<OrliczVector> = iso.columns().iter().enumerate()
            .map(|(j, c)| c.axpy(0.05, &OrliczVector::basis(5, (j + 2) % 5, 1.0)).unwrap())
            .collect();
        let t = EmbeddingMap::new(&src, &tgt, cols).unwrap();
        let u = SignedPermutation::new(vec![4, 2, 0, 1, 3], vec![1, -1, if flip { -1 } else { 1 }, 1, -1]).unwrap();
        let budget = SampleBudget::default();
        let a = distortion(&t, &budget).unwrap().distortion;
        let b = distortion(&u.compose(&t).unwrap(), &budget).unwrap().distortion;
        prop_assert!((a - b).abs() <= 1e-9 * a);
    }
}

#[test]
fn delta2_constant_is_submultiplicative_for_powers() {
    let grid = GridSpec::unit_default();
    for p in [1.5, 4.0, 7.0] {
        let m = OrliczFunction::power(p).unwrap();
        for (l1, l2) in [(1.5, 2.0), (3.0, 7.0), (10.0, 1.01)] {
            let c = |l: f64| delta2_constant(&m, l, &grid).unwrap().value;
            assert!(c(l1 * l2) <= c(l1) * c(l2) * (1.0 + 1e-12));
        }
    }
}

/// With the supremum taken over (0, 1] only, the exp-weighted family exceeds the product
/// by exactly `e^((l1 - 1)(l2 - 1))`.
#[test]
fn delta2_constant_of_exp_weighted_exceeds_product_on_unit_grid() {
    let grid = GridSpec::unit_default();
    let m = OrliczFunction::exp_weighted(4.0).unwrap();
    for (l1, l2) in [(1.5, 2.0), (3.0, 1.25)] {
        let c = |l: f64| delta2_constant(&m, l, &grid).unwrap().ln_value;
        let gap = c(l1 * l2) - c(l1) - c(l2);
        assert!((gap - (l1 - 1.0) * (l2 - 1.0)).abs() < 1e-9, "gap {gap}");
    }
}
