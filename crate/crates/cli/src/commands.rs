//! Subcommand arguments and their library entry points.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use distrust_core::analytic;
use distrust_core::classical::{self, LocalSearch};
use distrust_core::hierarchy::{self, MonomialList};
use distrust_core::quantum;
use distrust_core::randomness::{self, GuessingModel, RandomnessQuery, WRule};
use distrust_core::seesaw::{self, SeesawOptions};
use distrust_core::{Functional, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cache::{self, BasisCache};
use crate::error::{CliError, CoreContext, Result};
use crate::io::{self, RealizationDoc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Two-state discrimination; needs --theta.
    Sd,
    /// Three qubit targets with the witness ending in -E31.
    #[value(name = "322")]
    W322,
    /// Three qubit targets with the witness ending in -E32.
    #[value(name = "322-alt")]
    W322Alt,
    /// 2 -> 1 random access code.
    Rac,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ScenarioArgs {
    /// Named scenario.
    #[arg(long, value_enum, conflicts_with = "scenario", required_unless_present = "scenario")]
    pub preset: Option<Preset>,
    /// Scenario JSON file (fields n, m, k, targets, epsilons, coefficients).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Bloch angle of the `sd` preset in radians.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
}

/// A scenario with the preset it came from.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub scenario: Scenario,
    pub functional: Functional,
    pub preset: Option<Preset>,
    pub theta: Option<f64>,
}

impl ScenarioArgs {
    pub fn preset(p: Preset) -> Self {
        Self { preset: Some(p), ..Self::default() }
    }

    pub fn sd(theta: f64) -> Self {
        Self { preset: Some(Preset::Sd), scenario: None, theta: Some(theta) }
    }

    pub fn load(&self) -> Result<Loaded> {
        let (scn, f) = match (self.preset, &self.scenario) {
            (Some(Preset::Sd), _) => {
                let th = self.theta.ok_or_else(|| CliError::config("the sd preset needs --theta"))?;
                analytic::build_sd(th).ctx("sd preset")?
            }
            (Some(Preset::W322), _) => analytic::build_322(),
            (Some(Preset::W322Alt), _) => analytic::build_322_alt(),
            (Some(Preset::Rac), _) => analytic::build_rac(),
            (None, Some(path)) => io::read_scenario(path)?,
            (None, None) => return Err(CliError::config("give --preset or --scenario")),
        };
        Ok(Loaded { scenario: scn, functional: f, preset: self.preset, theta: self.theta })
    }
}

impl Loaded {
    /// Quantum value of the witness at zero distrust: closed form for the
    /// presets, hierarchy bound otherwise.
    pub fn ideal(&self, level: usize, d: usize, seed: u64) -> Result<f64> {
        match self.preset {
            Some(Preset::W322) | Some(Preset::W322Alt) => Ok(analytic::W322_QUANTUM),
            Some(Preset::Rac) => Ok(analytic::rac_quantum()),
            Some(Preset::Sd) => analytic::sd_optimal(self.theta.unwrap_or_default(), 0.0).ctx("ideal value"),
            None => {
                let scn = self.scenario.with_uniform_epsilon(0.0).ctx("ideal value")?;
                let mono = hierarchy::default_monomials(&scn, level).ctx("monomials")?;
                let bases = hierarchy::profile_bases(&scn, &self.functional, &mono, d, seed);
                let ub = hierarchy::upper_bound_from_bases(bases, &self.functional, scn.epsilons());
                Ok(ub.ctx("ideal value")?.value)
            }
        }
    }
}

/// Working dimension: `n`, `2n` or a number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimArg {
    N,
    TwoN,
    Fixed(usize),
}

impl DimArg {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            DimArg::N => n,
            DimArg::TwoN => 2 * n,
            DimArg::Fixed(d) => d,
        }
    }
}

impl FromStr for DimArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "n" => Ok(DimArg::N),
            "2n" => Ok(DimArg::TwoN),
            _ => match s.parse::<usize>() {
                Ok(d) if d > 0 => Ok(DimArg::Fixed(d)),
                _ => Err(format!("expected n, 2n or a positive integer, got {s:?}")),
            },
        }
    }
}

fn round12(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

/// `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || CliError::config(format!("cannot parse grid {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let grid = if parts.len() == 3 {
        let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        let (a, b, h) = (v[0], v[1], v[2]);
        if !(h > 0.0) || b < a {
            return Err(bad());
        }
        let count = ((b - a) / h + 1e-9).floor() as usize + 1;
        (0..count).map(|i| round12(a + h * i as f64)).collect()
    } else {
        parse_list(s)?
    };
    if grid.is_empty() {
        return Err(bad());
    }
    Ok(grid)
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::config(format!("not a number: {t:?}"))))
        .collect()
}

/// One value for every input, or one value per input.
pub fn apply_eps(scn: &Scenario, eps: Option<&str>) -> Result<Scenario> {
    let Some(s) = eps else { return Ok(scn.clone()) };
    let v = parse_list(s)?;
    let v = if v.len() == 1 { vec![v[0]; scn.n] } else { v };
    scn.with_epsilons(v).ctx("--eps")
}

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn open_cache(dir: Option<&Path>) -> Result<Option<BasisCache>> {
    dir.map(BasisCache::new).transpose()
}

#[derive(Args, Debug, Clone)]
pub struct BoundArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Distrust: one value for all inputs or a comma-separated value per input.
    #[arg(long)]
    pub eps: Option<String>,
    /// Working dimension (n, 2n or a number).
    #[arg(long, default_value = "n")]
    pub dim: DimArg,
    /// Hierarchy level of the monomial list.
    #[arg(long, default_value_t = 2)]
    pub level: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// See-saw restarts.
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    /// Where to write the best see-saw realization.
    #[arg(long, default_value = "realization.json")]
    pub realization: PathBuf,
    /// Directory for cached moment bases.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub epsilons: Vec<f64>,
    pub dim: usize,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub best_profile: String,
    pub realization: PathBuf,
    pub seesaw_warning: bool,
}

pub fn bound(args: &BoundArgs) -> Result<BoundReport> {
    let loaded = args.scenario.load()?;
    let scn = apply_eps(&loaded.scenario, args.eps.as_deref())?;
    let f = &loaded.functional;
    let d = args.dim.resolve(scn.n);
    let opts = SeesawOptions::default().with_dim(d).with_restarts(args.restarts);
    let lower = seesaw::seesaw(&scn, f, &opts, &mut seeded(args.seed)).ctx("seesaw")?;
    let mono = hierarchy::default_monomials(&scn, args.level).ctx("monomials")?;
    let cache = open_cache(args.cache.as_deref())?;
    let bases = cache::profile_bases(&scn, f, &mono, d, args.seed, cache.as_ref());
    let upper = hierarchy::upper_bound_from_bases(bases, f, scn.epsilons()).ctx("hierarchy")?;
    io::write_json(&args.realization, &RealizationDoc::new(&lower.realization, Some(lower.value)))?;
    Ok(BoundReport {
        epsilons: scn.epsilons().to_vec(),
        dim: d,
        lower: lower.value,
        upper: upper.value,
        gap: upper.value - lower.value,
        best_profile: upper.best.to_string(),
        realization: args.realization.clone(),
        seesaw_warning: lower.warning,
    })
}

#[derive(Args, Debug, Clone)]
pub struct ClassicalArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Uniform distrust values: start:stop:step or a comma-separated list.
    #[arg(long, default_value = "0:0.1:0.01")]
    pub eps_grid: String,
    /// Dimension of the basis measurement (n, 2n or a number).
    #[arg(long, default_value = "n")]
    pub dim: DimArg,
    #[arg(long, default_value_t = 2)]
    pub level: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Add a column with the local-search lower bound.
    #[arg(long)]
    pub lower: bool,
    /// Local-search restarts for --lower.
    #[arg(long, default_value_t = 10)]
    pub lower_restarts: usize,
    /// Add a column with the unrestricted quantum upper bound.
    #[arg(long)]
    pub quantum: bool,
    /// Working dimension of the quantum column.
    #[arg(long, default_value = "n")]
    pub quantum_dim: DimArg,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalRow {
    pub epsilon: f64,
    pub classical_upper: f64,
    pub classical_lower: Option<f64>,
    pub quantum_upper: Option<f64>,
}

pub fn classical_bound_at(loaded: &Loaded, eps: f64, d: usize, level: usize, seed: u64) -> Result<f64> {
    let scn = loaded.scenario.with_uniform_epsilon(eps).ctx("--eps-grid")?;
    let mono = MonomialList::classical(scn.n, d, level).ctx("classical monomials")?;
    let b = classical::classical_upper_bound(&scn, &loaded.functional, &mono, d, &mut seeded(seed))
        .ctx(&format!("classical bound at distrust {eps}"))?;
    Ok(b.value)
}

pub fn quantum_bound_at(loaded: &Loaded, eps: f64, d: usize, level: usize, seed: u64) -> Result<f64> {
    let scn = loaded.scenario.with_uniform_epsilon(eps).ctx("--eps-grid")?;
    let mono = hierarchy::default_monomials(&scn, level).ctx("monomials")?;
    let bases = hierarchy::profile_bases(&scn, &loaded.functional, &mono, d, seed);
    let ub = hierarchy::upper_bound_from_bases(bases, &loaded.functional, scn.epsilons());
    Ok(ub.ctx(&format!("quantum bound at distrust {eps}"))?.value)
}

pub fn classical(args: &ClassicalArgs) -> Result<Vec<ClassicalRow>> {
    let loaded = args.scenario.load()?;
    let grid = parse_grid(&args.eps_grid)?;
    let n = loaded.scenario.n;
    let d = args.dim.resolve(n);
    let search = LocalSearch { restarts: args.lower_restarts, ..LocalSearch::default() };
    let mut rows = Vec::with_capacity(grid.len());
    for &eps in &grid {
        let classical_upper = classical_bound_at(&loaded, eps, d, args.level, args.seed)?;
        let classical_lower = if args.lower {
            let scn = loaded.scenario.with_uniform_epsilon(eps).ctx("--eps-grid")?;
            let r = classical::classical_lower_bound(&scn, &loaded.functional, d, &search, &mut seeded(args.seed))
                .ctx(&format!("classical lower bound at distrust {eps}"))?;
            Some(r.value)
        } else {
            None
        };
        let quantum_upper = if args.quantum {
            Some(quantum_bound_at(&loaded, eps, args.quantum_dim.resolve(n), args.level, args.seed)?)
        } else {
            None
        };
        rows.push(ClassicalRow { epsilon: eps, classical_upper, classical_lower, quantum_upper });
    }
    Ok(rows)
}

pub fn classical_csv(args: &ClassicalArgs, rows: &[ClassicalRow]) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let mut header = vec!["epsilon", "classical_upper"];
    if args.lower {
        header.push("classical_lower");
    }
    if args.quantum {
        header.push("quantum_upper");
    }
    let body = rows
        .iter()
        .map(|r| {
            let mut v = vec![r.epsilon.to_string(), r.classical_upper.to_string()];
            if args.lower {
                v.push(io::fmt_opt(r.classical_lower));
            }
            if args.quantum {
                v.push(io::fmt_opt(r.quantum_upper));
            }
            v
        })
        .collect();
    (header, body)
}

#[derive(Args, Debug, Clone)]
pub struct RandomnessArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Extraction input, counted from 1 (preset default: 3 for 322, else 1).
    #[arg(long)]
    pub xstar: Option<usize>,
    /// Extraction measurement, counted from 1 (preset default: 2 for 322, else 1).
    #[arg(long)]
    pub ystar: Option<usize>,
    /// Uniform distrust values: start:stop:step or a comma-separated list.
    #[arg(long, default_value = "0:0.05:0.005")]
    pub eps_grid: String,
    /// Comma-separated witness rules: a factor of the ideal value, `fixed:W`,
    /// or `sd` for the discrimination optimum. Default `1,0.99,0.97`, or `sd`
    /// for the sd preset.
    #[arg(long)]
    pub w_rule: Option<String>,
    /// Ideal witness value used by factor rules.
    #[arg(long)]
    pub ideal: Option<f64>,
    /// Observed witness value; replaces the rules with `fixed:W`.
    #[arg(long)]
    pub w_obs: Option<f64>,
    /// With --w-obs: attribute the deficit to white noise and use the implied
    /// distrust instead of --eps-grid.
    #[arg(long, requires = "w_obs")]
    pub white_noise: bool,
    #[arg(long, default_value = "n")]
    pub dim: DimArg,
    #[arg(long, default_value_t = 2)]
    pub level: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for cached moment bases.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RandomnessArgs {
    pub fn new(scenario: ScenarioArgs) -> Self {
        Self {
            scenario,
            xstar: None,
            ystar: None,
            eps_grid: "0".into(),
            w_rule: None,
            ideal: None,
            w_obs: None,
            white_noise: false,
            dim: DimArg::N,
            level: 2,
            seed: 0,
            cache: None,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomnessRow {
    pub epsilon: f64,
    pub w: f64,
    pub g_raw: Option<f64>,
    pub g_hull: Option<f64>,
    pub hmin_bits: Option<f64>,
}

pub const RANDOMNESS_HEADER: [&str; 5] = ["epsilon", "w", "g_raw", "g_hull", "hmin_bits"];

fn parse_rules(text: &str, ideal: impl Fn() -> Result<f64>, theta: Option<f64>) -> Result<Vec<WRule>> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            if t == "sd" {
                let theta = theta.ok_or_else(|| CliError::config("rule sd needs --theta"))?;
                Ok(WRule::Discrimination { theta })
            } else if let Some(w) = t.strip_prefix("fixed:") {
                w.parse().map(WRule::Fixed).map_err(|_| CliError::config(format!("bad rule {t:?}")))
            } else {
                let factor: f64 = t.parse().map_err(|_| CliError::config(format!("bad rule {t:?}")))?;
                Ok(WRule::Scaled { ideal: ideal()?, factor })
            }
        })
        .collect()
}

fn extraction_pair(args: &RandomnessArgs, preset: Option<Preset>) -> Result<(usize, usize)> {
    let (dx, dy) = match preset {
        Some(Preset::W322) | Some(Preset::W322Alt) => (3, 2),
        _ => (1, 1),
    };
    let (x, y) = (args.xstar.unwrap_or(dx), args.ystar.unwrap_or(dy));
    if x == 0 || y == 0 {
        return Err(CliError::config("--xstar and --ystar count from 1"));
    }
    Ok((x - 1, y - 1))
}

pub fn randomness(args: &RandomnessArgs) -> Result<Vec<RandomnessRow>> {
    let loaded = args.scenario.load()?;
    let n = loaded.scenario.n;
    let d = args.dim.resolve(n);
    let (x, y) = extraction_pair(args, loaded.preset)?;
    let query = RandomnessQuery::new(loaded.scenario.clone(), loaded.functional.clone(), x, y).ctx("query")?;
    let ideal = || args.ideal.map_or_else(|| loaded.ideal(args.level, d, args.seed), Ok);
    let (grid, rules) = match args.w_obs {
        Some(w) if args.white_noise => {
            let eps = randomness::white_noise_epsilon(w, ideal()?).ctx("white-noise attribution")?;
            (vec![eps], vec![WRule::Fixed(w)])
        }
        Some(w) => (parse_grid(&args.eps_grid)?, vec![WRule::Fixed(w)]),
        None => {
            let default = if loaded.preset == Some(Preset::Sd) { "sd" } else { "1,0.99,0.97" };
            let text = args.w_rule.as_deref().unwrap_or(default);
            (parse_grid(&args.eps_grid)?, parse_rules(text, ideal, loaded.theta)?)
        }
    };
    let cache = open_cache(args.cache.as_deref())?;
    let mut rows = Vec::with_capacity(grid.len() * rules.len());
    for &eps in &grid {
        let q = query.with_uniform_epsilon(eps).ctx("--eps-grid")?;
        let mono = hierarchy::default_monomials(&q.scenario, args.level).ctx("monomials")?;
        let bases = cache::profile_bases(&q.scenario, &q.functional, &mono, d, args.seed, cache.as_ref());
        let context = format!("guessing model at distrust {eps}");
        let model = GuessingModel::from_bases(&q, &mono, bases).ctx(&context)?;
        let curve = model.curve(&model.default_grid()).ctx(&context)?;
        for rule in &rules {
            let w = rule.value(eps).ctx("witness rule")?;
            let (g_raw, g_hull) = model.guess_at(&curve, w);
            let hmin_bits = g_hull.map(|g| randomness::hmin(g.max(f64::MIN_POSITIVE))).transpose().ctx("entropy")?;
            rows.push(RandomnessRow { epsilon: eps, w, g_raw, g_hull, hmin_bits });
        }
    }
    Ok(rows)
}

pub fn randomness_csv(rows: &[RandomnessRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![r.epsilon.to_string(), r.w.to_string(), io::fmt_opt(r.g_raw), io::fmt_opt(r.g_hull), io::fmt_opt(r.hmin_bits)]
        })
        .collect()
}

pub const DEFAULT_STUDY: &str = "2,1,2;2,1,3;3,2,2";
pub const LONG_STUDY: &str = "4,2,2;5,4,2";

#[derive(Args, Debug, Clone)]
pub struct DimensionArgs {
    /// Semicolon-separated `n,m,k` triples.
    #[arg(long, default_value = DEFAULT_STUDY)]
    pub scenarios: String,
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
    /// Also run the larger scenarios at --long-cases cases each.
    #[arg(long)]
    pub long: bool,
    #[arg(long, default_value_t = 20)]
    pub long_cases: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// See-saw restarts per dimension.
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    /// See-saw stopping tolerance.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Default for DimensionArgs {
    fn default() -> Self {
        Self {
            scenarios: DEFAULT_STUDY.into(),
            cases: 100,
            long: false,
            long_cases: 20,
            seed: 0,
            restarts: 20,
            tol: 1e-7,
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionRow {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub cases: usize,
    pub failures: usize,
    pub max_discrepancy: f64,
    pub mean_discrepancy: f64,
}

pub const DIMENSION_HEADER: [&str; 7] = ["n", "m", "k", "cases", "failures", "max_discrepancy", "mean_discrepancy"];

/// Random targets in `C^n`, distrust uniform in [0, 1] and coefficients
/// uniform in [0, 1].
pub fn random_case<R: Rng + ?Sized>(n: usize, m: usize, k: usize, rng: &mut R) -> Result<(Scenario, Functional)> {
    let targets = (0..n).map(|_| quantum::random_pure_state(n, rng)).collect();
    let eps = (0..n).map(|_| rng.gen::<f64>()).collect();
    let scn = Scenario::new(n, m, k, targets, eps).ctx("random case")?;
    let coefficients = (0..k * n * m).map(|_| rng.gen::<f64>()).collect();
    let f = Functional::from_flat(k, n, m, coefficients).ctx("random case")?;
    Ok((scn, f))
}

/// See-saw values at `D = n` and `D = 2n`.
pub fn dimension_case<R: Rng + ?Sized>(
    scn: &Scenario,
    f: &Functional,
    restarts: usize,
    tol: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let opts = SeesawOptions { tol, ..SeesawOptions::default().with_restarts(restarts) };
    let small = seesaw::seesaw(scn, f, &opts.with_dim(scn.n), rng).ctx("seesaw at D = n")?;
    let large = seesaw::seesaw(scn, f, &opts.with_dim(2 * scn.n), rng).ctx("seesaw at D = 2n")?;
    Ok((small.value, large.value))
}

fn parse_triples(s: &str) -> Result<Vec<(usize, usize, usize)>> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let v: Vec<usize> = t.split(',').map(|x| x.trim().parse()).collect::<std::result::Result<_, _>>()
                .map_err(|_| CliError::config(format!("bad scenario triple {t:?}")))?;
            match v[..] {
                [n, m, k] if n > 0 && m > 0 && k > 0 => Ok((n, m, k)),
                _ => Err(CliError::config(format!("bad scenario triple {t:?}"))),
            }
        })
        .collect()
}

pub fn study_scenario(
    (n, m, k): (usize, usize, usize),
    index: usize,
    cases: usize,
    args: &DimensionArgs,
) -> Result<DimensionRow> {
    let results: Vec<Option<f64>> = (0..cases)
        .into_par_iter()
        .map(|case| {
            let mut rng = seeded(args.seed);
            rng.set_stream(((index as u64) << 32) | case as u64);
            for attempt in 0..2 {
                let out = random_case(n, m, k, &mut rng)
                    .and_then(|(scn, f)| dimension_case(&scn, &f, args.restarts, args.tol, &mut rng));
                match out {
                    Ok((a, b)) => return Some((b - a).abs()),
                    Err(e) => eprintln!("({n},{m},{k}) case {case} attempt {}: {e}", attempt + 1),
                }
            }
            None
        })
        .collect();
    let ok: Vec<f64> = results.iter().flatten().copied().collect();
    if ok.is_empty() {
        return Err(CliError::Core {
            context: format!("dimension study ({n},{m},{k})"),
            source: distrust_core::Error::Numerical("every case failed".into()),
        });
    }
    Ok(DimensionRow {
        n,
        m,
        k,
        cases: ok.len(),
        failures: cases - ok.len(),
        max_discrepancy: ok.iter().copied().fold(0.0, f64::max),
        mean_discrepancy: ok.iter().sum::<f64>() / ok.len() as f64,
    })
}

pub fn dimension_study(args: &DimensionArgs) -> Result<Vec<DimensionRow>> {
    let mut jobs: Vec<((usize, usize, usize), usize)> =
        parse_triples(&args.scenarios)?.into_iter().map(|t| (t, args.cases)).collect();
    if args.long {
        jobs.extend(parse_triples(LONG_STUDY)?.into_iter().map(|t| (t, args.long_cases)));
    }
    jobs.iter().enumerate().map(|(i, &(t, cases))| study_scenario(t, i, cases, args)).collect()
}

pub fn dimension_csv(rows: &[DimensionRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.m.to_string(),
                r.k.to_string(),
                r.cases.to_string(),
                r.failures.to_string(),
                r.max_discrepancy.to_string(),
                r.mean_discrepancy.to_string(),
            ]
        })
        .collect()
}

#[derive(Args, Debug, Clone)]
pub struct CertifyArgs {
    /// Bloch angle between the two targets in radians.
    #[arg(long, default_value_t = 5.0 * PI / 6.0)]
    pub theta: f64,
    /// Distrust for --w-obs.
    #[arg(long, requires = "w_obs")]
    pub eps: Option<f64>,
    /// Observed success probability.
    #[arg(long, conflicts_with = "model", required_unless_present = "model")]
    pub w_obs: Option<f64>,
    /// Preparation model `v,delta_degrees[,eta_true]`.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifyReport {
    pub theta: f64,
    pub eps: f64,
    /// Certified efficiency, or its ratio to the true one in model mode.
    pub eta: f64,
    pub relative: bool,
}

impl CertifyReport {
    pub fn line(&self) -> String {
        if self.relative {
            format!("η ≥ {:.3} η_true", self.eta)
        } else {
            format!("η ≥ {:.3}", self.eta)
        }
    }
}

pub fn certify_eta(args: &CertifyArgs) -> Result<CertifyReport> {
    if let Some(model) = &args.model {
        let v = parse_list(model)?;
        let (vis, delta, eta_true) = match v[..] {
            [a, b] => (a, b, 1.0),
            [a, b, c] => (a, b, c),
            _ => return Err(CliError::config("--model takes v,delta_degrees[,eta_true]")),
        };
        if eta_true <= 0.0 {
            return Err(CliError::config("eta_true must be positive"));
        }
        let eta = analytic::eta_model_bound(args.theta, vis, delta.to_radians(), eta_true).ctx("model bound")?;
        let eps = analytic::white_noise_to_eps(vis).ctx("model bound")?;
        return Ok(CertifyReport { theta: args.theta, eps, eta: eta / eta_true, relative: true });
    }
    let w = args.w_obs.ok_or_else(|| CliError::config("give --w-obs or --model"))?;
    let eps = args.eps.unwrap_or(0.0);
    let eta = analytic::eta_certified(w, args.theta, eps).ctx("certified efficiency")?;
    Ok(CertifyReport { theta: args.theta, eps, eta, relative: false })
}

#[derive(Args, Debug, Clone)]
pub struct DiscriminateArgs {
    /// Bloch angle between the two targets in radians.
    #[arg(long)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    /// Also run see-saw and the hierarchy at D = 2.
    #[arg(long)]
    pub numeric: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the optimal qubit realization here.
    #[arg(long)]
    pub realization: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscriminateReport {
    pub theta: f64,
    pub eps: f64,
    pub threshold: f64,
    pub optimal: f64,
    pub seesaw: Option<f64>,
    pub upper: Option<f64>,
}

pub fn discriminate(args: &DiscriminateArgs) -> Result<DiscriminateReport> {
    let optimal = analytic::sd_optimal(args.theta, args.eps).ctx("discrimination")?;
    let threshold = analytic::sd_threshold(args.theta);
    if let Some(path) = &args.realization {
        let r = analytic::sd_optimal_realization(args.theta, args.eps).ctx("optimal realization")?;
        io::write_json(path, &RealizationDoc::new(&r, Some(optimal)))?;
    }
    let (mut seesaw_v, mut upper) = (None, None);
    if args.numeric {
        let (scn, f) = analytic::build_sd(args.theta).ctx("sd preset")?;
        let scn = scn.with_uniform_epsilon(args.eps).ctx("--eps")?;
        let opts = SeesawOptions::default().with_dim(2);
        seesaw_v = Some(seesaw::seesaw(&scn, &f, &opts, &mut seeded(args.seed)).ctx("seesaw")?.value);
        let loaded = Loaded { scenario: scn, functional: f, preset: Some(Preset::Sd), theta: Some(args.theta) };
        upper = Some(quantum_bound_at(&loaded, args.eps, 2, 2, args.seed)?);
    }
    Ok(DiscriminateReport { theta: args.theta, eps: args.eps, threshold, optimal, seesaw: seesaw_v, upper })
}
