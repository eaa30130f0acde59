//! Linear maps between finite-dimensional Orlicz spaces: distortion estimates,
//! random near-isometries, signed permutations and isometry alignment.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{OrliczError, Result};
use crate::luxemburg::{LuxemburgSpace, OrliczVector};
use crate::magnitude::Magnitude;
use crate::rigidity_basis::{basis_delta_of_eps, compute_h, extract_basis_witnesses, BasisBudget, BasisWitness};
use crate::rigidity_disjoint::ConstantGrids;
use crate::seeds::{derive_seed, rng_for};

/// Sampling effort for sphere searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleBudget {
    pub samples: usize,
    pub polish_iters: usize,
    pub seed: u64,
}

impl Default for SampleBudget {
    fn default() -> Self {
        SampleBudget { samples: 256, polish_iters: 40, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistortionEstimate {
    /// `max(||T||, ||T^-1||)` over the points examined.
    pub distortion: f64,
    pub norm_estimate: f64,
    pub inverse_norm_estimate: f64,
    pub samples: usize,
    pub method: String,
}

impl DistortionEstimate {
    pub fn exact_isometry() -> Self {
        DistortionEstimate {
            distortion: 1.0,
            norm_estimate: 1.0,
            inverse_norm_estimate: 1.0,
            samples: 0,
            method: "exact isometry by construction".into(),
        }
    }
}

/// Columns are the images of the source basis vectors.
#[derive(Clone, Debug)]
pub struct EmbeddingMap {
    columns: Vec<OrliczVector>,
    source: LuxemburgSpace,
    target: LuxemburgSpace,
    distortion: Option<DistortionEstimate>,
}

#[derive(Serialize)]
struct EmbeddingRecord<'a> {
    source_dim: usize,
    target_dim: usize,
    columns: &'a [OrliczVector],
    distortion: &'a Option<DistortionEstimate>,
}

impl Serialize for EmbeddingMap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        EmbeddingRecord {
            source_dim: self.source.dim(),
            target_dim: self.target.dim(),
            columns: &self.columns,
            distortion: &self.distortion,
        }
        .serialize(serializer)
    }
}

impl EmbeddingMap {
    pub fn new(source: &LuxemburgSpace, target: &LuxemburgSpace, columns: Vec<OrliczVector>) -> Result<Self> {
        if columns.len() != source.dim() {
            return Err(OrliczError::DimensionMismatch { expected: source.dim(), got: columns.len() });
        }
        if let Some(c) = columns.iter().find(|c| c.dim() != target.dim()) {
            return Err(OrliczError::DimensionMismatch { expected: target.dim(), got: c.dim() });
        }
        Ok(EmbeddingMap { columns, source: source.clone(), target: target.clone(), distortion: None })
    }

    pub fn columns(&self) -> &[OrliczVector] {
        &self.columns
    }

    pub fn source(&self) -> &LuxemburgSpace {
        &self.source
    }

    pub fn target(&self) -> &LuxemburgSpace {
        &self.target
    }

    pub fn distortion_estimate(&self) -> Option<&DistortionEstimate> {
        self.distortion.as_ref()
    }

    pub fn with_distortion(mut self, d: DistortionEstimate) -> Self {
        self.distortion = Some(d);
        self
    }

    pub fn apply(&self, x: &[f64]) -> OrliczVector {
        let mut out = vec![0.0; self.target.dim()];
        for (xj, col) in x.iter().zip(&self.columns) {
            if *xj != 0.0 {
                for (o, c) in out.iter_mut().zip(col.coords()) {
                    *o += xj * c;
                }
            }
        }
        out.into()
    }

    /// `self - other` column by column.
    pub fn difference(&self, other: &EmbeddingMap) -> Result<EmbeddingMap> {
        let cols = self.columns.iter().zip(&other.columns).map(|(a, b)| a.sub(b)).collect::<Result<Vec<_>>>()?;
        EmbeddingMap::new(&self.source, &self.target, cols)
    }
}

/// Modified Gram-Schmidt in the Euclidean inner product.
pub fn has_full_rank(columns: &[OrliczVector]) -> bool {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for c in columns {
        let mut v = c.coords().to_vec();
        let original = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(n > 1e-12 * original) {
            return false;
        }
        basis.push(v.into_iter().map(|x| x / n).collect());
    }
    true
}

#[derive(Clone, Debug)]
pub struct Extrema {
    pub min: f64,
    pub max: f64,
    pub evaluations: usize,
}

fn directions(k: usize, budget: &SampleBudget) -> Vec<Vec<f64>> {
    match k {
        1 => vec![vec![1.0]],
        2 => {
            let n = budget.samples.max(4);
            (0..n)
                .map(|j| {
                    let t = std::f64::consts::PI * j as f64 / n as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect()
        }
        _ => {
            let mut rng = rng_for(budget.seed, 0xD1, k as u64);
            let mut dirs: Vec<Vec<f64>> =
                (0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
            while dirs.len() < budget.samples.max(k) {
                dirs.push((0..k).map(|_| rng.sample(StandardNormal)).collect());
            }
            dirs
        }
    }
}

fn polish<F>(start: &[f64], better: impl Fn(f64, f64) -> bool, ratio: &F, iters: usize) -> Result<(f64, usize)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut x = start.to_vec();
    let mut best = ratio(&x)?;
    let mut evals = 1;
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut step = 0.25 * scale;
    for _ in 0..iters {
        let mut improved = false;
        for i in 0..x.len() {
            for s in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += s * step;
                if y.iter().all(|v| *v == 0.0) {
                    continue;
                }
                let r = ratio(&y)?;
                evals += 1;
                if better(r, best) {
                    best = r;
                    x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((best, evals))
}

/// Extremes of a homogeneous ratio over the unit sphere of R^k: dense angles
/// for k = 2, seeded Gaussian directions otherwise, then coordinate polish.
pub fn ratio_extrema<F>(k: usize, budget: &SampleBudget, ratio: F) -> Result<Extrema>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let dirs = directions(k, budget);
    let values = dirs.par_iter().map(|d| ratio(d)).collect::<Result<Vec<f64>>>()?;
    let (mut imin, mut imax) = (0, 0);
    for (i, v) in values.iter().enumerate() {
        if *v < values[imin] {
            imin = i;
        }
        if *v > values[imax] {
            imax = i;
        }
    }
    let mut evaluations = values.len();
    let (max, e1) = polish(&dirs[imax], |a, b| a > b, &ratio, budget.polish_iters)?;
    let (min, e2) = polish(&dirs[imin], |a, b| a < b, &ratio, budget.polish_iters)?;
    evaluations += e1 + e2;
    Ok(Extrema { min, max, evaluations })
}

/// Sampled lower bound on `max(||T||, ||T^-1||)`.
pub fn distortion(t: &EmbeddingMap, budget: &SampleBudget) -> Result<DistortionEstimate> {
    if !has_full_rank(&t.columns) {
        return Err(OrliczError::NotAnEmbedding("columns are linearly dependent".into()));
    }
    let src = &t.source;
    let tgt = &t.target;
    let e = ratio_extrema(src.dim(), budget, |x| Ok(tgt.norm(&t.apply(x))? / src.norm(&x.to_vec().into())?))?;
    let method =
        if src.dim() == 2 { "angular grid + coordinate polish" } else { "gaussian directions + coordinate polish" };
    Ok(DistortionEstimate {
        distortion: e.max.max(1.0 / e.min),
        norm_estimate: e.max,
        inverse_norm_estimate: 1.0 / e.min,
        samples: e.evaluations,
        method: method.into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IsometryMode {
    /// `e_i -> +-e_sigma(i)`.
    #[default]
    SignedInjection,
    /// Disjoint normalized blocks; an isometry only for power functions.
    PowerBlocks,
}

pub fn random_disjoint_isometry(
    source: &LuxemburgSpace,
    target: &LuxemburgSpace,
    seed: u64,
    mode: IsometryMode,
) -> Result<EmbeddingMap> {
    let (k, n) = (source.dim(), target.dim());
    if n < k {
        return Err(OrliczError::InvalidParameter(format!("target dimension {n} is below source dimension {k}")));
    }
    let mut rng = rng_for(seed, 0x150, 0);
    let columns = match mode {
        IsometryMode::SignedInjection => sample(&mut rng, n, k)
            .into_iter()
            .map(|i| OrliczVector::basis(n, i, if rng.random::<bool>() { 1.0 } else { -1.0 }))
            .collect(),
        IsometryMode::PowerBlocks => {
            if !matches!(target.function().tag(), crate::orlicz_core::FamilySpec::Power { .. }) {
                return Err(OrliczError::InvalidParameter("block isometries need a power function".into()));
            }
            let mut cuts: Vec<usize> = sample(&mut rng, n - 1, k - 1).into_iter().map(|c| c + 1).collect();
            cuts.sort_unstable();
            let mut bounds = vec![0];
            bounds.extend(cuts);
            bounds.push(n);
            bounds
                .windows(2)
                .map(|w| {
                    let mut v = vec![0.0; n];
                    for x in &mut v[w[0]..w[1]] {
                        *x = rng.sample::<f64, _>(StandardNormal);
                    }
                    target.normalize(&v.into())
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(EmbeddingMap::new(source, target, columns)?.with_distortion(DistortionEstimate::exact_isometry()))
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationRecord {
    pub delta: f64,
    pub seed: u64,
    pub scale: f64,
    pub halvings: usize,
    pub achieved: f64,
}

/// `T + s P` with Gaussian `P`, halving `s` until the estimated distortion is within `1 + delta`.
pub fn perturb(
    t: &EmbeddingMap,
    delta: f64,
    seed: u64,
    budget: &SampleBudget,
) -> Result<(EmbeddingMap, PerturbationRecord)> {
    if !(delta >= 0.0) {
        return Err(OrliczError::InvalidParameter(format!("delta must be non-negative, got {delta}")));
    }
    let base = t.distortion.clone().map(Ok).unwrap_or_else(|| distortion(t, budget))?;
    if delta == 0.0 {
        let record = PerturbationRecord { delta, seed, scale: 0.0, halvings: 0, achieved: base.distortion };
        return Ok((t.clone().with_distortion(base), record));
    }
    let mut rng = rng_for(seed, 0x9E, 0);
    let n = t.target.dim();
    let p: Vec<OrliczVector> = t
        .columns
        .iter()
        .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect::<Vec<f64>>().into())
        .collect();
    let kappa = t.columns.len() as f64
        * p.iter().map(|c| t.target.norm(c)).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
    // For an isometry T and |x_j| <= ||x||, this scale already keeps the distortion within 1 + delta.
    let mut scale = 0.9 * delta / ((1.0 + delta) * kappa);
    for halvings in 0..=60 {
        let cols = t.columns.iter().zip(&p).map(|(c, q)| c.axpy(scale, q)).collect::<Result<Vec<_>>>()?;
        let candidate = EmbeddingMap::new(&t.source, &t.target, cols)?;
        if let Ok(est) = distortion(&candidate, budget) {
            if est.distortion - 1.0 <= delta {
                let achieved = est.distortion;
                return Ok((
                    candidate.with_distortion(est),
                    PerturbationRecord { delta, seed, scale, halvings, achieved },
                ));
            }
        }
        scale *= 0.5;
    }
    let record = PerturbationRecord { delta, seed, scale: 0.0, halvings: 61, achieved: base.distortion };
    Ok((t.clone().with_distortion(base), record))
}

/// `U e_i = signs[i] e_{perm[i]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

impl SignedPermutation {
    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        let n = perm.len();
        if signs.len() != n {
            return Err(OrliczError::DimensionMismatch { expected: n, got: signs.len() });
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(OrliczError::InvalidInput(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(OrliczError::InvalidInput("signs must be +1 or -1".into()));
        }
        Ok(SignedPermutation { perm, signs })
    }

    pub fn identity(n: usize) -> Self {
        SignedPermutation { perm: (0..n).collect(), signs: vec![1; n] }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn apply(&self, x: &OrliczVector) -> Result<OrliczVector> {
        if x.dim() != self.dim() {
            return Err(OrliczError::DimensionMismatch { expected: self.dim(), got: x.dim() });
        }
        let mut y = vec![0.0; self.dim()];
        for (i, v) in x.coords().iter().enumerate() {
            y[self.perm[i]] = f64::from(self.signs[i]) * v;
        }
        Ok(y.into())
    }

    /// `U o T`.
    pub fn compose(&self, t: &EmbeddingMap) -> Result<EmbeddingMap> {
        let cols = t.columns.iter().map(|c| self.apply(c)).collect::<Result<Vec<_>>>()?;
        let mut out = EmbeddingMap::new(&t.source, &t.target, cols)?;
        out.distortion = t.distortion.clone();
        Ok(out)
    }

    /// All `n! 2^n` signed permutations, for `n <= 8`.
    pub fn all(n: usize) -> Result<impl Iterator<Item = SignedPermutation>> {
        if n > 8 {
            return Err(OrliczError::InvalidParameter(format!("exhaustive enumeration is limited to n <= 8, got {n}")));
        }
        let perms = permutations(n);
        Ok(perms.into_iter().flat_map(move |perm| {
            (0u32..1 << n).map(move |mask| SignedPermutation {
                perm: perm.clone(),
                signs: (0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect(),
            })
        }))
    }
}

/// Heap's algorithm.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = vec![a.clone()];
    let mut c = vec![0; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct Alignment {
    pub u: SignedPermutation,
    /// `||U T1 e_k - T2 e_k||` per source basis vector.
    pub column_errors: Vec<f64>,
    /// Sum of the column errors; bounds the operator defect under 1-unconditionality.
    pub defect_bound: f64,
    /// Sampled lower estimate of `||U T1 - T2||`.
    pub defect_sampled: f64,
}

/// Sum over columns of `||U T1 e_k - T2 e_k||`.
pub fn column_defect(u: &SignedPermutation, t1: &EmbeddingMap, t2: &EmbeddingMap) -> Result<(Vec<f64>, f64)> {
    let errs = t1
        .columns
        .iter()
        .zip(&t2.columns)
        .map(|(a, b)| t2.target.norm(&u.apply(a)?.sub(b)?))
        .collect::<Result<Vec<f64>>>()?;
    let total = errs.iter().sum();
    Ok((errs, total))
}

/// Signed permutation sending each witness of T1 onto the matching witness of T2.
pub fn align(
    t1: &EmbeddingMap,
    t2: &EmbeddingMap,
    w1: &[BasisWitness],
    w2: &[BasisWitness],
    budget: &SampleBudget,
) -> Result<Alignment> {
    let k = t1.source.dim();
    let n = t1.target.dim();
    if t2.source.dim() != k || t2.target.dim() != n {
        return Err(OrliczError::AlignmentImpossible("embeddings act between different spaces".into()));
    }
    if w1.len() != k || w2.len() != k {
        return Err(OrliczError::AlignmentImpossible(format!("expected {k} witnesses per embedding")));
    }
    let mut tau: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    let mut signs = vec![1i8; n];
    for (a, b) in w1.iter().zip(w2) {
        if tau[a.index].is_some() || used[b.index] {
            return Err(OrliczError::AlignmentImpossible(format!(
                "witness index collision at {} -> {}",
                a.index, b.index
            )));
        }
        tau[a.index] = Some(b.index);
        used[b.index] = true;
        signs[a.index] = a.sign * b.sign;
    }
    let mut free_targets = (0..n).filter(|j| !used[*j]);
    let perm: Vec<usize> = tau
        .into_iter()
        .map(|t| t.unwrap_or_else(|| free_targets.next().expect("counts of free sources and targets agree")))
        .collect();
    let u = SignedPermutation::new(perm, signs)?;
    let (column_errors, defect_bound) = column_defect(&u, t1, t2)?;
    let d = u.compose(t1)?.difference(t2)?;
    let defect_sampled = if d.columns.iter().all(|c| c.is_zero()) {
        0.0
    } else {
        let src = &d.source;
        ratio_extrema(k, budget, |x| Ok(d.target.norm(&d.apply(x))? / src.norm(&x.to_vec().into())?))?.max
    };
    Ok(Alignment { u, column_errors, defect_bound, defect_sampled })
}

/// Where the transitivity experiment takes its delta from.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DeltaSource {
    /// Basis budget at `eps / (2k)`, so each column error is within `eps / (2k)`.
    Budget {
        budget: Box<BasisBudget>,
    },
    Override {
        delta: f64,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitivityTrial {
    pub trial: usize,
    pub seeds: [u64; 2],
    pub achieved: [f64; 2],
    pub witnesses: Option<[Vec<BasisWitness>; 2]>,
    pub defect_bound: Option<f64>,
    pub defect_sampled: Option<f64>,
    /// Set when the pipeline broke down or the defect exceeded eps.
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitivityReport {
    pub eps: f64,
    pub k: usize,
    pub n: usize,
    pub delta: f64,
    pub snap_threshold: Magnitude,
    pub delta_source: DeltaSource,
    pub trials: Vec<TransitivityTrial>,
    pub max_defect: f64,
    pub failures: usize,
}

/// Pairs of seeded `(1 + delta)`-embeddings `l_M^k -> space`, aligned by a signed
/// permutation built from their basis witnesses.
#[allow(clippy::too_many_arguments)]
pub fn eps_transitivity_experiment(
    space: &LuxemburgSpace,
    k: usize,
    eps: f64,
    trials: usize,
    seed: u64,
    delta_override: Option<f64>,
    grids: &ConstantGrids,
    sampling: &SampleBudget,
) -> Result<TransitivityReport> {
    if k == 0 || k > space.dim() {
        return Err(OrliczError::InvalidParameter(format!("need 1 <= k <= n, got k = {k}, n = {}", space.dim())));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(OrliczError::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    let (delta, h, delta_source) = transitivity_budget(space.function(), k, eps, delta_override, grids)?;
    let source = space.resized(k)?;
    let records: Vec<TransitivityTrial> = (0..trials)
        .into_par_iter()
        .map(|i| transitivity_trial(space, &source, i, seed, delta, h, eps, sampling))
        .collect::<Result<_>>()?;
    let max_defect = records.iter().filter_map(|r| r.defect_bound).fold(0.0, f64::max);
    let failures = records.iter().filter(|r| r.failure.is_some()).count();
    Ok(TransitivityReport {
        eps,
        k,
        n: space.dim(),
        delta,
        snap_threshold: h,
        delta_source,
        trials: records,
        max_defect,
        failures,
    })
}

/// delta and snap threshold for aligning `l_M^k` embeddings to within eps.
pub fn transitivity_budget(
    m: &crate::orlicz_core::OrliczFunction,
    k: usize,
    eps: f64,
    delta_override: Option<f64>,
    grids: &ConstantGrids,
) -> Result<(f64, Magnitude, DeltaSource)> {
    let per_column = eps / (2.0 * k as f64);
    Ok(match delta_override {
        Some(d) => {
            let h = compute_h(m, Magnitude::from_f64(per_column / 2.0), &grids.unit_grid)?.value;
            (d, h, DeltaSource::Override { delta: d })
        }
        None => {
            let b = basis_delta_of_eps(m, per_column, grids)?;
            (b.delta.to_f64(), b.h, DeltaSource::Budget { budget: Box::new(b) })
        }
    })
}

/// Seeds of the two embeddings in trial `i`.
pub fn trial_seeds(seed: u64, i: usize) -> [u64; 2] {
    [derive_seed(seed, 0x7A, 2 * i as u64), derive_seed(seed, 0x7A, 2 * i as u64 + 1)]
}

/// Two seeded signed injections `source -> space`, each perturbed within `1 + delta`;
/// returns the maps and their achieved distortions.
pub fn perturbed_pair(
    source: &LuxemburgSpace,
    space: &LuxemburgSpace,
    delta: f64,
    seeds: [u64; 2],
    sampling: &SampleBudget,
) -> Result<([EmbeddingMap; 2], [f64; 2])> {
    let draw = |s: u64| {
        let t = random_disjoint_isometry(source, space, s, IsometryMode::SignedInjection)?;
        perturb(&t, delta, s, &SampleBudget { seed: s, ..*sampling })
    };
    let (t1, r1) = draw(seeds[0])?;
    let (t2, r2) = draw(seeds[1])?;
    Ok(([t1, t2], [r1.achieved, r2.achieved]))
}

#[allow(clippy::too_many_arguments)]
fn transitivity_trial(
    space: &LuxemburgSpace,
    source: &LuxemburgSpace,
    i: usize,
    seed: u64,
    delta: f64,
    h: Magnitude,
    eps: f64,
    sampling: &SampleBudget,
) -> Result<TransitivityTrial> {
    let seeds = trial_seeds(seed, i);
    let (maps, achieved) = perturbed_pair(source, space, delta, seeds, sampling)?;
    let mut trial = TransitivityTrial {
        trial: i,
        seeds,
        achieved,
        witnesses: None,
        defect_bound: None,
        defect_sampled: None,
        failure: None,
    };
    let w1 = extract_basis_witnesses(space, h, &maps[0].columns);
    let w2 = extract_basis_witnesses(space, h, &maps[1].columns);
    let (w1, w2) = match (w1, w2) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            trial.failure = Some(e.to_string());
            return Ok(trial);
        }
    };
    let sampling = SampleBudget { seed: seeds[0] ^ seeds[1], ..*sampling };
    match align(&maps[0], &maps[1], &w1, &w2, &sampling) {
        Ok(a) => {
            if a.defect_bound > eps {
                trial.failure = Some(format!("defect {} exceeds eps {eps}", a.defect_bound));
            }
            trial.defect_bound = Some(a.defect_bound);
            trial.defect_sampled = Some(a.defect_sampled);
        }
        Err(e) => trial.failure = Some(e.to_string()),
    }
    trial.witnesses = Some([w1, w2]);
    Ok(trial)
}
