//! Acceptance suite: thirteen numbered criteria, one PASS/FAIL line each.
//! Run with `cargo test --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::StandardNormal;

use orlicz::embeddings::{
    align, column_defect, eps_transitivity_experiment, perturbed_pair, transitivity_budget, trial_seeds, DeltaSource,
    SampleBudget, SignedPermutation,
};
use orlicz::luxemburg::{luxemburg_norm, DEFAULT_TOL};
use orlicz::norm_geometry::{MultiIndex, NormCurve, ETA_RANGE};
use orlicz::rigidity_basis::extract_basis_witnesses;
use orlicz::rigidity_disjoint::{
    delta_of_eps, disjointness_experiment, function_constants, random_surface, BudgetOptions, ConstantGrids,
};
use orlicz::seeds::rng_for;
use orlicz::spectra_age::{
    block_copy_distortion, boyd_indices, non_embedding_certificate, random_disjoint_pair, BoydGrid,
};
use orlicz::{LuxemburgSpace, OrliczFunction, OrliczVector, Result};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn exp4() -> OrliczFunction {
    OrliczFunction::exp_weighted(4.0).unwrap()
}

fn gaussian(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn norm_matches_p_norm() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (j, p) in [2.0, 4.0, 7.0].into_iter().enumerate() {
        let m = OrliczFunction::power(p)?;
        let mut rng = rng_for(1, 1, j as u64);
        for _ in 0..500 {
            let dim = rng.random_range(1..=50);
            let x = gaussian(&mut rng, dim);
            let oracle = x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
            worst = worst.max((luxemburg_norm(&m, &x, DEFAULT_TOL)? - oracle).abs());
        }
    }
    let t = start.elapsed();
    Ok(outcome(worst <= 1e-10 && within(t, 5), format!("max |norm - p-norm| = {worst:.2e}, {t:.2?}")))
}

fn random_good_function(rng: &mut impl Rng) -> Result<OrliczFunction> {
    if rng.random::<bool>() {
        OrliczFunction::exp_weighted(rng.random_range(3.5..8.0))
    } else {
        OrliczFunction::power(rng.random_range(4.0..8.0))
    }
}

fn modular_at_norm_is_one() -> Result<Outcome> {
    let mut rng = rng_for(1, 2, 0);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let m = random_good_function(&mut rng)?;
        let dim = rng.random_range(1..=30);
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let f: OrliczVector = gaussian(&mut rng, dim).iter().map(|v| v * scale).collect::<Vec<_>>().into();
        if f.is_zero() {
            continue;
        }
        let s = LuxemburgSpace::new(m, dim)?;
        worst = worst.max((s.modular(&f, s.norm(&f)?)? - 1.0).abs());
    }
    Ok(outcome(worst <= 1e-9, format!("max |modular(f, ||f||) - 1| = {worst:.2e}")))
}

fn implicit_derivatives_match_differences() -> Result<Outcome> {
    let start = Instant::now();
    let mut rng = rng_for(1, 3, 0);
    let (h1, h2) = (1e-5, 1e-4);
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let m = random_good_function(&mut rng)?;
        let c = NormCurve::new(random_surface(&m, &mut rng, 2..=8)?);
        for _ in 0..20 {
            let a = rng.random_range(-0.4..0.4);
            let (lo, mid, hi) = (c.value(a - h1)?, c.value(a)?, c.value(a + h1)?);
            let fd1 = (hi - lo) / (2.0 * h1);
            let fd2 = (c.value(a + h2)? - 2.0 * mid + c.value(a - h2)?) / (h2 * h2);
            let (d1, d2) = (c.prime(a)?, c.second(a)?);
            e1 = e1.max((d1 - fd1).abs() / d1.abs().max(1.0));
            e2 = e2.max((d2 - fd2).abs() / d2.abs().max(1.0));
        }
    }
    let t = start.elapsed();
    Ok(outcome(e1 <= 1e-6 && e2 <= 1e-5 && within(t, 30), format!("N' error {e1:.2e}, N'' error {e2:.2e}, {t:.2?}")))
}

fn partials_bounded_by_c0() -> Result<Outcome> {
    let m = exp4();
    let c0 = function_constants(&m, &ConstantGrids::default())?.c0;
    let mut rng = rng_for(1, 4, 0);
    let betas: Vec<MultiIndex> = MultiIndex::all().filter(|b| b.order() > 0).collect();
    let (mut worst, mut violations) = (0.0f64, 0);
    for _ in 0..1000 {
        let s = random_surface(&m, &mut rng, 1..=8)?;
        let a = rng.random_range(-0.499..0.499);
        let eta = rng.random_range(ETA_RANGE.0 * 1.0001..ETA_RANGE.1);
        for b in &betas {
            let v = s.partial(a, eta, *b)?.abs();
            worst = worst.max(v);
            violations += usize::from(v > c0);
        }
    }
    Ok(outcome(violations == 0, format!("{} partials x 1000 points, max {worst:.3e} vs C0 = {c0:.3e}", betas.len())))
}

fn taylor_bound_holds() -> Result<Outcome> {
    let m = exp4();
    let taylor = function_constants(&m, &ConstantGrids::default())?.taylor;
    let mut rng = rng_for(1, 5, 0);
    let (mut violations, mut worst_ratio) = (0, 0.0f64);
    for _ in 0..1000 {
        let c = NormCurve::new(random_surface(&m, &mut rng, 1..=8)?);
        let a: f64 = rng.random_range(-0.49..0.49);
        let d = c.taylor_defect(a)?;
        let bound = taylor * a.abs().powi(3);
        violations += usize::from(d > bound);
        if a != 0.0 {
            worst_ratio = worst_ratio.max(d / a.abs().powi(3));
        }
    }
    Ok(outcome(
        violations == 0,
        format!("{violations} violations; max defect/|a|^3 = {worst_ratio:.3e} vs C3/6 = {taylor:.3e}"),
    ))
}

fn disjoint_expansion_holds() -> Result<Outcome> {
    let m = exp4();
    let budget = delta_of_eps(&m, &m, 0.2, &BudgetOptions::default())?;
    let (alpha0, c) = (budget.alpha0.to_f64(), budget.taylor_constant);
    let mut rng = rng_for(1, 6, 0);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..100 {
        let dim = rng.random_range(2..=8);
        let s = LuxemburgSpace::new(m.clone(), dim)?;
        let (u, v) = random_disjoint_pair(&s, 6, i)?;
        for _ in 0..10 {
            let a = alpha0 * rng.random_range(-1.0..=1.0);
            let n = s.norm(&u.axpy(a, &v)?)?;
            // Norms are resolved to the solver tolerance only.
            let excess = n - (1.0 + c * a.abs().powi(3)) - 10.0 * s.tol();
            worst = worst.max(excess);
            violations += usize::from(excess > 0.0);
        }
    }
    Ok(outcome(violations == 0, format!("alpha0 = {alpha0:.3e}, worst excess {worst:.2e}")))
}

fn disjointness_end_to_end() -> Result<Outcome> {
    let start = Instant::now();
    let m = exp4();
    let budget = delta_of_eps(&m, &m, 0.2, &BudgetOptions::default())?;
    let space = LuxemburgSpace::new(m, 6)?;
    let r = disjointness_experiment(&space, 0.2, budget.delta.to_f64(), 100, 7, &SampleBudget::default())?;
    let t = start.elapsed();
    Ok(outcome(
        r.failures == 0 && r.max_err <= 0.2 && within(t, 120),
        format!("delta = {}, max witness error {:.3e}, {} failures, {t:.2?}", budget.delta, r.max_err, r.failures),
    ))
}

fn basis_end_to_end() -> Result<Outcome> {
    let eps = 0.2;
    let space = LuxemburgSpace::new(exp4(), 6)?;
    let r =
        eps_transitivity_experiment(&space, 2, eps, 100, 7, None, &ConstantGrids::default(), &SampleBudget::default())?;
    let mut ok = r.failures == 0 && r.max_defect <= eps;
    let mut worst_snap = 0.0f64;
    for t in &r.trials {
        match &t.witnesses {
            Some(ws) => {
                for w in ws {
                    let mut idx: Vec<usize> = w.iter().map(|x| x.index).collect();
                    idx.sort_unstable();
                    idx.dedup();
                    ok &= idx.len() == w.len();
                    ok &= w.iter().all(|x| x.certified && x.error <= eps);
                    worst_snap = w.iter().fold(worst_snap, |a, x| a.max(x.error));
                }
            }
            None => ok = false,
        }
        ok &= t.defect_bound.is_some_and(|d| d <= eps);
    }
    let delta = match &r.delta_source {
        DeltaSource::Budget { budget } => budget.delta.to_string(),
        DeltaSource::Override { delta } => delta.to_string(),
    };
    Ok(outcome(
        ok,
        format!(
            "delta = {delta}, max snap error {worst_snap:.2e}, max defect {:.2e}, {} failures",
            r.max_defect, r.failures
        ),
    ))
}

fn alignment_matches_exhaustive_search() -> Result<Outcome> {
    let m = exp4();
    let grids = ConstantGrids::default();
    let sampling = SampleBudget::default();
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for n in [3usize, 4] {
        let space = LuxemburgSpace::new(m.clone(), n)?;
        let source = space.resized(2)?;
        let (delta, h, _) = transitivity_budget(&m, 2, 0.2, Some(1e-11), &grids)?;
        for i in 0..25 {
            let (maps, _) = perturbed_pair(&source, &space, delta, trial_seeds(90 + n as u64, i), &sampling)?;
            let w1 = extract_basis_witnesses(&space, h, maps[0].columns())?;
            let w2 = extract_basis_witnesses(&space, h, maps[1].columns())?;
            let a = align(&maps[0], &maps[1], &w1, &w2, &sampling)?;
            let mut best = f64::INFINITY;
            for u in SignedPermutation::all(n)? {
                best = best.min(column_defect(&u, &maps[0], &maps[1])?.1);
            }
            worst = worst.max(a.defect_bound - best);
            pairs += 1;
        }
    }
    Ok(outcome(worst <= 1e-9, format!("{pairs} pairs, max gap to exhaustive minimum {worst:.2e}")))
}

fn boyd_indices_of_exp_family() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut lines = Vec::new();
    for p in [4.0, 5.0, 7.5] {
        let b = boyd_indices(&OrliczFunction::exp_weighted(p)?, &BoydGrid::default())?;
        worst = worst.max((b.alpha - p).abs()).max((b.beta - p).abs());
        lines.push(format!("p={p}: [{:.5}, {:.5}]", b.alpha, b.beta));
    }
    Ok(outcome(worst <= 1e-3, format!("{}; max deviation {worst:.2e}", lines.join(", "))))
}

fn age_not_closed() -> Result<Outcome> {
    let start = Instant::now();
    let m = exp4();
    let s = LuxemburgSpace::new(m.clone(), 2)?;
    let cert = non_embedding_certificate(&s, 4.0, &OrliczVector::basis(2, 0, 1.0), &OrliczVector::basis(2, 1, 1.0))?;
    let closed = 1.0 - 2.0 * m.eval(2f64.powf(-0.25));
    let sampling = SampleBudget::default();
    let ds = [10, 100, 1000, 10000]
        .into_iter()
        .map(|n| Ok(block_copy_distortion(&m, 4.0, n, &sampling)?.distortion))
        .collect::<Result<Vec<f64>>>()?;
    let monotone = ds.windows(2).all(|w| w[1] < w[0]);
    let t = start.elapsed();
    let ok = cert.margin > 0.01 && (cert.margin - closed).abs() < 1e-12 && monotone && ds[3] <= 1.005 && within(t, 60);
    Ok(outcome(
        ok,
        format!(
            "margin {:.5}, distortions {}, {t:.2?}",
            cert.margin,
            ds.iter().map(|d| format!("{d:.6}")).collect::<Vec<_>>().join(" > ")
        ),
    ))
}

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_orlicz")
}

fn exit_code(args: &[&str], dir: &Path) -> Result<i32> {
    let out = Command::new(binary()).args(args).arg("--out-dir").arg(dir).output()?;
    Ok(out.status.code().unwrap_or(-1))
}

fn hypothesis_gates() -> Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let good = exit_code(&["check-good", "--family", "exp_weighted", "--p", "4"], dir.path())?;
    let square = exit_code(&["check-good", "--family", "power", "--p", "2"], dir.path())?;
    let basis = exit_code(&["delta", "--family", "power", "--p", "4", "--eps", "0.2", "--basis"], dir.path())?;
    Ok(outcome(
        good == 0 && square == 3 && basis == 3,
        format!("exit codes: exp4 {good}, t^2 {square}, t^4 basis {basis}"),
    ))
}

fn reports_are_deterministic() -> Result<Outcome> {
    let run = |dir: &Path| -> Result<(Vec<u8>, Vec<u8>)> {
        let args = ["delta", "--eps", "0.2", "--verify", "--trials", "100", "--n", "6", "--seed", "7"];
        let code = exit_code(&args, dir)?;
        if code != 0 {
            return Err(orlicz::OrliczError::InvalidInput(format!("delta run exited with {code}")));
        }
        Ok((std::fs::read(dir.join("rigidity-report.json"))?, std::fs::read(dir.join("rigidity-trials.csv"))?))
    };
    let (a, b) = (tempfile::tempdir()?, tempfile::tempdir()?);
    let first = run(a.path())?;
    let second = run(b.path())?;
    Ok(outcome(first == second, format!("report {} bytes, csv {} bytes", first.0.len(), first.1.len())))
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 13] = [
        ("norm equals p-norm for power functions", norm_matches_p_norm),
        ("modular equals one at the norm", modular_at_norm_is_one),
        ("implicit derivatives match finite differences", implicit_derivatives_match_differences),
        ("derivative bound C0", partials_bounded_by_c0),
        ("Taylor remainder bound", taylor_bound_holds),
        ("disjoint expansion bound", disjoint_expansion_holds),
        ("disjointness end to end", disjointness_end_to_end),
        ("basis witnesses and alignment end to end", basis_end_to_end),
        ("alignment vs exhaustive search", alignment_matches_exhaustive_search),
        ("Boyd indices", boyd_indices_of_exp_family),
        ("age not closed", age_not_closed),
        ("hypothesis gates", hypothesis_gates),
        ("deterministic reports", reports_are_deterministic),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        println!("criterion {:>2} {}: {name} ({detail})", i + 1, if passed { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
