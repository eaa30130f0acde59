//! Command-line front end: configuration merging, subcommands and exit codes.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::embeddings::{
    align, eps_transitivity_experiment, perturbed_pair, transitivity_budget, trial_seeds, Alignment, DeltaSource,
    SampleBudget,
};
use crate::error::{OrliczError, Result};
use crate::grid::GridSpec;
use crate::luxemburg::{luxemburg_norm, LuxemburgSpace, OrliczVector, DEFAULT_TOL};
use crate::magnitude::Magnitude;
use crate::norm_geometry::NormSurface;
use crate::orlicz_core::{check_good, FamilySpec, OrliczFunction};
use crate::report::{to_json, write_csv, write_json, Report};
use crate::rigidity_basis::{
    basis_delta_of_eps, compute_h, compute_r, extract_basis_witnesses, snap_to_basis, BasisWitness,
};
use crate::rigidity_disjoint::{
    criterion_second_derivative, delta_of_eps, disjointness_experiment, witness_split, BudgetMode, BudgetOptions,
    ConstantGrids,
};
use crate::spectra_age::{age_experiment, boyd_indices, BoydGrid};

pub const OUT_DIR_ENV: &str = "ORLICZ_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "orlicz", version, about = "Numerical toolkit for finite-dimensional Orlicz sequence spaces")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Power,
    #[value(name = "exp_weighted", alias = "exp-weighted")]
    ExpWeighted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Certified,
    Empirical,
}

impl From<ModeArg> for BudgetMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Certified => BudgetMode::Certified,
            ModeArg::Empirical => BudgetMode::Empirical,
        }
    }
}

/// Options shared by every subcommand; each overrides the matching config-file field.
#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// JSON file with any of the fields below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Replaces the derived delta in experiments.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub pairs: Option<usize>,
    /// Comma-separated block sizes for the age sweep.
    #[arg(long, global = true, value_delimiter = ',')]
    pub blocks: Option<Vec<usize>>,
    /// Sphere samples for distortion estimates and empirical constants.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Points of the grids behind K, C(l) and alpha(eps).
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,
    /// Output directory; falls back to the config file, then the environment.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Luxemburg norm of a vector and the modular at that norm.
    Norm(VectorArgs),
    /// Check the regularity hypotheses on M.
    CheckGood,
    /// Growth constants and the derivative-bound cascade.
    Constants,
    /// delta(eps) budgets; writes rigidity-report.json and, with --basis, basis-report.json.
    Delta {
        /// Also run the basis-vector budget.
        #[arg(long)]
        basis: bool,
        /// Verify the disjointness budget on seeded embeddings of l_M^2 into l_M^n.
        #[arg(long)]
        verify: bool,
    },
    /// Disjoint witness split of a pair and the second-derivative criterion.
    Witness {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        g: String,
    },
    /// Snap a vector of norm at most 1 to a signed basis vector.
    Snap(VectorArgs),
    /// Align one seeded pair of near-isometric embeddings by a signed permutation.
    Align,
    /// Transitivity experiment; writes transitivity-report.json and transitivity.csv.
    Transitivity,
    /// Boyd indices and the ratio hypothesis.
    Boyd,
    /// Non-embedding margins and block-copy distortions; writes age-report.json and age-blocks.csv.
    Age,
}

#[derive(Args, Debug)]
pub struct VectorArgs {
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "vec_file")]
    pub vec: Option<String>,
    /// File holding a JSON array or separated coordinates.
    #[arg(long)]
    pub vec_file: Option<PathBuf>,
}

/// Contents of a `--config` file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: Option<FamilySpec>,
    pub mode: Option<BudgetMode>,
    pub seed: Option<u64>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub pairs: Option<usize>,
    pub blocks: Option<Vec<usize>>,
    pub samples: Option<usize>,
    pub grid_points: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| OrliczError::InvalidInput(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved settings; embedded verbatim in every report.
#[derive(Clone, Debug, Serialize)]
pub struct Settings {
    pub family: FamilySpec,
    pub mode: BudgetMode,
    pub seed: u64,
    pub eps: f64,
    pub delta: Option<f64>,
    pub k: usize,
    pub n: usize,
    pub trials: usize,
    pub pairs: usize,
    pub blocks: Vec<usize>,
    pub samples: usize,
    pub grid_points: Option<usize>,
}

impl Settings {
    pub fn resolve(args: &CommonArgs, file: RunConfig) -> Result<(Self, PathBuf)> {
        let family = match (args.family, args.p, file.family) {
            (Some(f), p, prev) => {
                let p = p.or(prev.and_then(|s| family_exponent(&s))).unwrap_or(4.0);
                match f {
                    FamilyArg::Power => FamilySpec::Power { p },
                    FamilyArg::ExpWeighted => FamilySpec::ExpWeighted { p },
                }
            }
            (None, Some(p), Some(FamilySpec::Power { .. })) => FamilySpec::Power { p },
            (None, Some(p), Some(FamilySpec::ExpWeighted { .. }) | None) => FamilySpec::ExpWeighted { p },
            (None, _, Some(spec)) => spec,
            (None, None, None) => FamilySpec::ExpWeighted { p: 4.0 },
        };
        let out_dir = args
            .out_dir
            .clone()
            .or(file.out_dir)
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let s = Settings {
            family,
            mode: args.mode.map(Into::into).or(file.mode).unwrap_or_default(),
            seed: args.seed.or(file.seed).unwrap_or(0),
            eps: args.eps.or(file.eps).unwrap_or(0.2),
            delta: args.delta.or(file.delta),
            k: args.k.or(file.k).unwrap_or(2),
            n: args.n.or(file.n).unwrap_or(6),
            trials: args.trials.or(file.trials).unwrap_or(100),
            pairs: args.pairs.or(file.pairs).unwrap_or(100),
            blocks: args.blocks.clone().or(file.blocks).unwrap_or_else(|| vec![10, 100, 1000, 10000]),
            samples: args.samples.or(file.samples).unwrap_or(256),
            grid_points: args.grid_points.or(file.grid_points),
        };
        Ok((s, out_dir))
    }

    fn function(&self) -> Result<OrliczFunction> {
        self.family.build()
    }

    fn grids(&self) -> Result<ConstantGrids> {
        let d = ConstantGrids::default();
        Ok(match self.grid_points {
            None => d,
            Some(points) => ConstantGrids {
                k_grid: GridSpec::new(d.k_grid.lo, d.k_grid.hi, points)?,
                unit_grid: GridSpec::new(d.unit_grid.lo, d.unit_grid.hi, points)?,
            },
        })
    }

    fn sampling(&self) -> SampleBudget {
        SampleBudget { samples: self.samples, seed: self.seed, ..SampleBudget::default() }
    }

    fn budget_options(&self, mode: BudgetMode) -> Result<BudgetOptions> {
        Ok(BudgetOptions { grids: self.grids()?, mode, samples: self.samples, seed: self.seed })
    }
}

fn family_exponent(s: &FamilySpec) -> Option<f64> {
    match s {
        FamilySpec::Power { p } | FamilySpec::ExpWeighted { p } => Some(*p),
        FamilySpec::Custom { .. } => None,
    }
}

/// Exit code for an error: 2 input, 3 hypothesis, 4 I/O, 1 anything else.
pub fn exit_code(e: &OrliczError) -> u8 {
    match e {
        OrliczError::InvalidParameter(_)
        | OrliczError::InvalidInput(_)
        | OrliczError::DimensionMismatch { .. }
        | OrliczError::Json(_) => 2,
        OrliczError::HypothesisViolation(_) | OrliczError::PreconditionFailed(_) => 3,
        OrliczError::Io(_) | OrliczError::Csv(_) => 4,
        _ => 1,
    }
}

/// Whether every certified-mode check of the run held.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    AssertionFailed,
}

pub fn run() -> ExitCode {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(Outcome::Passed) => ExitCode::SUCCESS,
        Ok(Outcome::AssertionFailed) => ExitCode::from(1),
        Err(e) => {
            if let OrliczError::HypothesisViolation(list) = &e {
                eprintln!("hypothesis violated:");
                for v in list {
                    eprintln!("  - {v}");
                }
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let file = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let (settings, out_dir) = Settings::resolve(&cli.common, file)?;
    let ctx = Context { settings, out_dir };
    match &cli.command {
        Command::Norm(v) => ctx.norm(v),
        Command::CheckGood => ctx.check_good(),
        Command::Constants => ctx.constants(),
        Command::Delta { basis, verify } => ctx.delta(*basis, *verify),
        Command::Witness { f, g } => ctx.witness(f, g),
        Command::Snap(v) => ctx.snap(v),
        Command::Align => ctx.align(),
        Command::Transitivity => ctx.transitivity(),
        Command::Boyd => ctx.boyd(),
        Command::Age => ctx.age(),
    }
}

/// Coordinates separated by commas, whitespace or semicolons; an empty string is the empty vector.
pub fn parse_coords(text: &str) -> Result<Vec<f64>> {
    let t = text.trim();
    if t.starts_with('[') {
        return serde_json::from_str(t).map_err(|e| OrliczError::InvalidInput(format!("vector: {e}")));
    }
    t.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| OrliczError::InvalidInput(format!("not a number: '{s}'"))))
        .map(|r| {
            r.and_then(|x| {
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(OrliczError::InvalidInput(format!("non-finite coordinate {x}")))
                }
            })
        })
        .collect()
}

fn read_vector(v: &VectorArgs) -> Result<Vec<f64>> {
    match (&v.vec, &v.vec_file) {
        (Some(s), _) => parse_coords(s),
        (None, Some(path)) => parse_coords(&fs::read_to_string(path)?),
        (None, None) => Err(OrliczError::InvalidInput("give --vec or --vec-file".into())),
    }
}

#[derive(Serialize)]
struct RigidityResult<B: Serialize, E: Serialize> {
    budget: B,
    empirical_budget: Option<B>,
    verification: Option<E>,
}

#[derive(Serialize)]
struct TrialRow {
    trial: usize,
    delta_achieved: f64,
    defect: Option<f64>,
}

#[derive(Serialize)]
struct DisjointRow {
    trial: usize,
    delta_achieved: f64,
    err_f: f64,
    err_g: f64,
}

#[derive(Serialize)]
struct BlockRow {
    block: usize,
    lambda: f64,
    distortion: f64,
}

#[derive(Serialize)]
struct AlignResult<'a> {
    delta: f64,
    snap_threshold: Magnitude,
    seeds: [u64; 2],
    achieved: [f64; 2],
    witnesses: [&'a [BasisWitness]; 2],
    alignment: &'a Alignment,
}

struct Context {
    settings: Settings,
    out_dir: PathBuf,
}

impl Context {
    fn print_json<T: Serialize>(&self, command: &str, value: T) -> Result<()> {
        print!("{}", to_json(&Report::new(command, &self.settings, value))?);
        Ok(())
    }

    fn norm(&self, v: &VectorArgs) -> Result<Outcome> {
        let m = self.settings.function()?;
        let coords = read_vector(v)?;
        let norm = luxemburg_norm(&m, &coords, DEFAULT_TOL)?;
        let modular =
            if norm > 0.0 { LuxemburgSpace::new(m, coords.len())?.modular(&coords.into(), norm)? } else { 0.0 };
        println!("norm: {norm}");
        println!("modular_at_norm: {modular}");
        Ok(Outcome::Passed)
    }

    fn check_good(&self) -> Result<Outcome> {
        let m = self.settings.function()?;
        let d = GridSpec::growth_default();
        let grid = GridSpec::new(d.lo, d.hi, self.settings.grid_points.unwrap_or(d.points))?;
        let report = check_good(&m, &grid)?;
        self.print_json("check-good", &report)?;
        if !report.is_good {
            return Err(OrliczError::HypothesisViolation(report.violations));
        }
        Ok(Outcome::Passed)
    }

    fn constants(&self) -> Result<Outcome> {
        let m = self.settings.function()?;
        let c = self.settings.budget_options(self.settings.mode)?.constants(&m)?;
        self.print_json("constants", &c)?;
        Ok(Outcome::Passed)
    }

    fn delta(&self, basis: bool, verify: bool) -> Result<Outcome> {
        let s = &self.settings;
        let m = s.function()?;
        let certified = delta_of_eps(&m, &m, s.eps, &s.budget_options(BudgetMode::Certified)?)?;
        let empirical = match s.mode {
            BudgetMode::Empirical => Some(delta_of_eps(&m, &m, s.eps, &s.budget_options(BudgetMode::Empirical)?)?),
            BudgetMode::Certified => None,
        };
        let active = empirical.as_ref().unwrap_or(&certified);
        println!("delta: {}", active.delta);
        let mut outcome = Outcome::Passed;
        let verification = if verify {
            let space = LuxemburgSpace::new(m.clone(), s.n)?;
            let delta = s.delta.unwrap_or_else(|| active.delta.to_f64());
            let r = disjointness_experiment(&space, s.eps, delta, s.trials, s.seed, &s.sampling())?;
            println!("max_witness_error: {:e}", r.max_err);
            println!("failures: {}", r.failures);
            if r.failures > 0 && s.mode == BudgetMode::Certified && s.delta.is_none() {
                outcome = Outcome::AssertionFailed;
            }
            let rows = r.trials.iter().map(|t| DisjointRow {
                trial: t.trial,
                delta_achieved: t.achieved_distortion - 1.0,
                err_f: t.err_f,
                err_g: t.err_g,
            });
            write_csv(&self.out_dir, "rigidity-trials.csv", rows)?;
            Some(r)
        } else {
            None
        };
        let result = RigidityResult { budget: &certified, empirical_budget: empirical.as_ref(), verification };
        write_json(&self.out_dir, "rigidity-report.json", &Report::new("delta", s, result))?;
        if basis {
            let b = basis_delta_of_eps(&m, s.eps, &s.grids()?)?;
            println!("basis_delta: {}", b.delta);
            write_json(&self.out_dir, "basis-report.json", &Report::new("delta", s, &b))?;
        }
        Ok(outcome)
    }

    fn witness(&self, f: &str, g: &str) -> Result<Outcome> {
        let m = self.settings.function()?;
        let (f, g): (OrliczVector, OrliczVector) = (parse_coords(f)?.into(), parse_coords(g)?.into());
        if f.dim() != g.dim() {
            return Err(OrliczError::DimensionMismatch { expected: f.dim(), got: g.dim() });
        }
        let space = LuxemburgSpace::new(m, f.dim())?;
        let split = witness_split(&space, &f, &g)?;
        // The criterion needs both norms in [4/5, 5/4]; outside the band it is omitted.
        let criterion = match NormSurface::new(&space, f, g) {
            Ok(surface) => {
                Some(criterion_second_derivative(&surface, self.settings.eps, &self.settings.grids()?.unit_grid)?)
            }
            Err(OrliczError::PreconditionFailed(_)) => None,
            Err(e) => return Err(e),
        };
        #[derive(Serialize)]
        struct Out<A, B> {
            split: A,
            criterion: B,
        }
        self.print_json("witness", Out { split, criterion })?;
        Ok(Outcome::Passed)
    }

    fn snap(&self, v: &VectorArgs) -> Result<Outcome> {
        let m = self.settings.function()?;
        let x: OrliczVector = read_vector(v)?.into();
        let space = LuxemburgSpace::new(m.clone(), x.dim())?;
        let r = compute_r(&m)?;
        let h = compute_h(&m, Magnitude::from_f64(self.settings.eps), &self.settings.grids()?.unit_grid)?;
        let h = h.value.min(Magnitude::from_f64(1.0 - 1.0 / r));
        let snap = snap_to_basis(&space, &x, h)?;
        let distance = snap
            .map(|sn| space.distance(&x, &OrliczVector::basis(x.dim(), sn.index, f64::from(sn.sign))))
            .transpose()?;
        #[derive(Serialize)]
        struct Out<S> {
            h: Magnitude,
            snap: S,
            distance: Option<f64>,
        }
        self.print_json("snap", Out { h, snap, distance })?;
        Ok(Outcome::Passed)
    }

    fn align(&self) -> Result<Outcome> {
        let s = &self.settings;
        let m = s.function()?;
        let space = LuxemburgSpace::new(m.clone(), s.n)?;
        let source = space.resized(s.k)?;
        let (delta, h, _) = transitivity_budget(&m, s.k, s.eps, s.delta, &s.grids()?)?;
        let seeds = trial_seeds(s.seed, 0);
        let (maps, achieved) = perturbed_pair(&source, &space, delta, seeds, &s.sampling())?;
        let w1 = extract_basis_witnesses(&space, h, maps[0].columns())?;
        let w2 = extract_basis_witnesses(&space, h, maps[1].columns())?;
        let a = align(&maps[0], &maps[1], &w1, &w2, &s.sampling())?;
        println!("defect_bound: {}", a.defect_bound);
        let out = AlignResult { delta, snap_threshold: h, seeds, achieved, witnesses: [&w1, &w2], alignment: &a };
        self.print_json("align", out)?;
        Ok(Outcome::Passed)
    }

    fn transitivity(&self) -> Result<Outcome> {
        let s = &self.settings;
        let space = LuxemburgSpace::new(s.function()?, s.n)?;
        let r = eps_transitivity_experiment(&space, s.k, s.eps, s.trials, s.seed, s.delta, &s.grids()?, &s.sampling())?;
        match &r.delta_source {
            DeltaSource::Budget { budget } => println!("delta: {} (used as {:e})", budget.delta, r.delta),
            DeltaSource::Override { delta } => println!("delta: {delta}"),
        }
        println!("max_defect: {:e}", r.max_defect);
        println!("failures: {}", r.failures);
        let rows = r.trials.iter().map(|t| TrialRow {
            trial: t.trial,
            delta_achieved: t.achieved.iter().fold(1.0f64, |a, b| a.max(*b)) - 1.0,
            defect: t.defect_bound,
        });
        write_csv(&self.out_dir, "transitivity.csv", rows)?;
        write_json(&self.out_dir, "transitivity-report.json", &Report::new("transitivity", s, &r))?;
        let certified = s.mode == BudgetMode::Certified && s.delta.is_none();
        Ok(if certified && r.failures > 0 { Outcome::AssertionFailed } else { Outcome::Passed })
    }

    fn boyd(&self) -> Result<Outcome> {
        let b = boyd_indices(&self.settings.function()?, &BoydGrid::default())?;
        self.print_json("boyd", &b)?;
        Ok(Outcome::Passed)
    }

    fn age(&self) -> Result<Outcome> {
        let s = &self.settings;
        let r = age_experiment(&s.function()?, &BoydGrid::default(), s.pairs, s.n, &s.blocks, s.seed, &s.sampling())?;
        println!("p: {}", r.boyd.p);
        println!("ratio_hypothesis: {}", r.boyd.ratio_bounds.holds);
        println!("basis_margin: {}", r.basis_margin.margin);
        println!("min_random_margin: {}", r.min_random_margin);
        for b in &r.block_copies {
            println!("block {}: distortion {}", b.block, b.distortion);
        }
        let rows =
            r.block_copies.iter().map(|b| BlockRow { block: b.block, lambda: b.lambda, distortion: b.distortion });
        write_csv(&self.out_dir, "age-blocks.csv", rows)?;
        write_json(&self.out_dir, "age-report.json", &Report::new("age", s, &r))?;
        // Positive margins are only guaranteed under the ratio hypothesis.
        let failed = s.mode == BudgetMode::Certified
            && r.boyd.ratio_bounds.holds
            && !(r.basis_margin.conclusive && r.min_random_margin > 0.0);
        Ok(if failed { Outcome::AssertionFailed } else { Outcome::Passed })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_parse() {
        assert_eq!(parse_coords("1, -2.5;3").unwrap(), vec![1.0, -2.5, 3.0]);
        assert_eq!(parse_coords("[0.5, 1]").unwrap(), vec![0.5, 1.0]);
        assert!(parse_coords("").unwrap().is_empty());
        assert!(parse_coords("1,x").is_err());
        assert!(parse_coords("nan").is_err());
    }

    #[test]
    fn flags_override_config() {
        let file: RunConfig =
            serde_json::from_str(r#"{"family": {"family": "power", "p": 3}, "eps": 0.1, "seed": 9}"#).unwrap();
        let args = CommonArgs { eps: Some(0.3), ..CommonArgs::default() };
        let (s, _) = Settings::resolve(&args, file.clone()).unwrap();
        assert_eq!(s.family, FamilySpec::Power { p: 3.0 });
        assert_eq!((s.eps, s.seed), (0.3, 9));
        let args = CommonArgs { p: Some(5.0), ..CommonArgs::default() };
        assert_eq!(Settings::resolve(&args, file).unwrap().0.family, FamilySpec::Power { p: 5.0 });
        let args = CommonArgs { family: Some(FamilyArg::ExpWeighted), ..CommonArgs::default() };
        assert_eq!(
            Settings::resolve(&args, RunConfig::default()).unwrap().0.family,
            FamilySpec::ExpWeighted { p: 4.0 }
        );
    }

    #[test]
    fn unknown_config_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"epsilon": 0.1}"#).is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&OrliczError::violation("x")), 3);
        assert_eq!(exit_code(&OrliczError::InvalidInput("x".into())), 2);
        assert_eq!(exit_code(&OrliczError::Io(std::io::Error::other("x"))), 4);
        assert_eq!(exit_code(&OrliczError::NotConverged("x".into())), 1);
    }
}
