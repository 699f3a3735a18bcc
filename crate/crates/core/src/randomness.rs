//! Guessing-probability bounds and min-entropy from witness values.
//!
//! `G'(w)` is the largest relaxation value of `p(b|x*,y*)` (maximized over
//! `b` and rank profiles) among moment matrices with witness value `w`. Its
//! upper concave envelope bounds the guessing probability of an adversary
//! who may mix strategies, and `H_min = -log2 G`.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::analytic;
use crate::error::{Error, Result};
use crate::hierarchy::{self, EntryConstraint, EntryForm, MomentBasis, MonomialList, RankProfile, Sense};
use crate::scenario::{Functional, Scenario};

/// Points in the hull grid.
pub const GRID_POINTS: usize = 41;
/// Slack used when a requested witness value sits on the edge of a
/// profile's range.
pub const BOUNDARY_SLACK: f64 = 1e-7;

pub fn hmin(g: f64) -> Result<f64> {
    if !(g > 0.0) || g > 1.0 + 1e-9 {
        return Err(Error::invalid(format!("guessing probability {g} outside (0, 1]")));
    }
    Ok(-g.min(1.0).log2())
}

/// Upper concave envelope of a point set, evaluated by linear interpolation
/// between hull vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveEnvelope {
    vertices: Vec<(f64, f64)>,
}

impl ConcaveEnvelope {
    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.vertices[0].0, self.vertices[self.vertices.len() - 1].0)
    }

    /// `None` outside the domain.
    pub fn eval(&self, w: f64) -> Option<f64> {
        let (lo, hi) = self.domain();
        let tol = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if w < lo - tol || w > hi + tol {
            return None;
        }
        let w = w.clamp(lo, hi);
        let i = self.vertices.partition_point(|v| v.0 < w);
        if i == 0 {
            return Some(self.vertices[0].1);
        }
        let (a, b) = (self.vertices[i - 1], self.vertices[i.min(self.vertices.len() - 1)]);
        if b.0 == a.0 {
            return Some(a.1.max(b.1));
        }
        Some(a.1 + (b.1 - a.1) * (w - a.0) / (b.0 - a.0))
    }
}

/// Points must have strictly increasing abscissae.
pub fn concave_envelope(points: &[(f64, f64)]) -> Result<ConcaveEnvelope> {
    if points.len() < 2 {
        return Err(Error::invalid("the envelope needs at least two points"));
    }
    for p in points.windows(2) {
        if p[1].0 == p[0].0 {
            return Err(Error::invalid(format!("duplicate abscissa {}", p[0].0)));
        }
        if p[1].0 < p[0].0 {
            return Err(Error::invalid("abscissae must be increasing"));
        }
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop b when it lies on or below the chord from a to p.
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    Ok(ConcaveEnvelope { vertices: hull })
}

/// Scenario, witness and the input pair whose outcome is extracted.
#[derive(Debug, Clone)]
pub struct RandomnessQuery {
    pub scenario: Scenario,
    pub functional: Functional,
    pub x_star: usize,
    pub y_star: usize,
}

impl RandomnessQuery {
    pub fn new(scenario: Scenario, functional: Functional, x_star: usize, y_star: usize) -> Result<Self> {
        functional.check_shape(&scenario)?;
        if x_star >= scenario.n || y_star >= scenario.m {
            return Err(Error::invalid(format!("extraction pair ({x_star}, {y_star}) outside the scenario")));
        }
        Ok(Self { scenario, functional, x_star, y_star })
    }

    pub fn with_uniform_epsilon(&self, eps: f64) -> Result<Self> {
        Ok(Self { scenario: self.scenario.with_uniform_epsilon(eps)?, ..self.clone() })
    }
}

struct ProfileModel {
    basis: MomentBasis,
    /// Largest witness value in this profile's relaxation.
    w_max: f64,
}

/// Per-profile bases at one distrust setting, reused across witness values.
pub struct GuessingModel {
    query: RandomnessQuery,
    witness: EntryForm,
    targets: Vec<EntryForm>,
    profiles: Vec<ProfileModel>,
    w_max: f64,
}

impl GuessingModel {
    pub fn new(query: &RandomnessQuery, mono: &MonomialList, d: usize, seed: u64) -> Result<Self> {
        let bases = hierarchy::profile_bases(&query.scenario, &query.functional, mono, d, seed);
        Self::from_bases(query, mono, bases)
    }

    /// Model over prepared per-profile bases; failed profiles are skipped.
    pub fn from_bases(
        query: &RandomnessQuery,
        mono: &MonomialList,
        bases: Vec<(RankProfile, Result<MomentBasis>)>,
    ) -> Result<Self> {
        let q = query.clone();
        let witness = hierarchy::functional_form(mono, &q.functional)?;
        let targets = (0..q.scenario.k)
            .map(|b| mono.probability_entry(b, q.x_star, q.y_star).map(|(p, r)| EntryForm::single(p, r)))
            .collect::<Result<Vec<_>>>()?;
        let eps = q.scenario.epsilons().to_vec();
        let models = crate::par::map(bases, |(_, b)| {
            let b = b.ok()?;
            let r = hierarchy::solve_entries(&b, &witness, &eps, &[]).ok()?;
            Some(ProfileModel { basis: b, w_max: r.value })
        });
        let profiles: Vec<ProfileModel> = models.into_iter().flatten().collect();
        if profiles.is_empty() {
            return Err(Error::Numerical("no rank profile produced a usable relaxation".into()));
        }
        let w_max = profiles.iter().map(|p| p.w_max).fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { query: q, witness, targets, profiles, w_max })
    }

    pub fn epsilons(&self) -> &[f64] {
        self.query.scenario.epsilons()
    }

    /// Largest witness value of the relaxation.
    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    pub fn profiles(&self) -> Vec<RankProfile> {
        self.profiles.iter().map(|p| p.basis.profile().clone()).collect()
    }

    fn witness_constraint(&self, p: &ProfileModel, w: f64) -> Option<EntryConstraint> {
        if w > p.w_max + BOUNDARY_SLACK {
            return None;
        }
        let (sense, rhs) =
            if w >= p.w_max - BOUNDARY_SLACK { (Sense::Ge, p.w_max - BOUNDARY_SLACK) } else { (Sense::Eq, w) };
        Some(EntryConstraint { form: self.witness.clone(), sense, rhs })
    }

    /// Largest witness value compatible with a deterministic outcome at
    /// `(x*, y*)`; below it `G' = 1`.
    pub fn w_trivial(&self) -> f64 {
        let eps = self.epsilons().to_vec();
        let jobs: Vec<(usize, usize)> =
            (0..self.profiles.len()).flat_map(|i| (0..self.targets.len()).map(move |b| (i, b))).collect();
        let vals = crate::par::map(jobs, |(i, b)| {
            let con = EntryConstraint { form: self.targets[b].clone(), sense: Sense::Ge, rhs: 1.0 - BOUNDARY_SLACK };
            hierarchy::solve_entries(&self.profiles[i].basis, &self.witness, &eps, &[con]).ok().map(|r| r.value)
        });
        vals.into_iter().flatten().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `G'(w)`, or `None` when no profile reaches `w`.
    pub fn g_prime(&self, w: f64) -> Option<f64> {
        let eps = self.epsilons().to_vec();
        let jobs: Vec<(usize, usize)> = (0..self.profiles.len())
            .filter(|&i| w <= self.profiles[i].w_max + BOUNDARY_SLACK)
            .flat_map(|i| (0..self.targets.len()).map(move |b| (i, b)))
            .collect();
        let vals = crate::par::map(jobs, |(i, b)| {
            let p = &self.profiles[i];
            let con = self.witness_constraint(p, w)?;
            hierarchy::solve_entries(&p.basis, &self.targets[b], &eps, &[con]).ok().map(|r| r.value)
        });
        vals.into_iter().flatten().reduce(f64::max).map(|g| g.clamp(0.0, 1.0))
    }

    /// `GRID_POINTS` equally spaced values from [`Self::w_trivial`] to the maximum.
    pub fn default_grid(&self) -> Vec<f64> {
        let lo = self.w_trivial().min(self.w_max);
        let hi = self.w_max;
        let mut grid: Vec<f64> =
            (0..GRID_POINTS).map(|i| lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64).collect();
        grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        grid
    }

    /// Raw `G'(w)` and the envelope value at `w`, never below the raw point.
    /// Values within the boundary slack above the maximum are evaluated at
    /// the maximum; feasible values below the grid give 1.
    pub fn guess_at(&self, curve: &GuessingCurve, w: f64) -> (Option<f64>, Option<f64>) {
        let w = if w > self.w_max && w <= self.w_max + BOUNDARY_SLACK * (1.0 + w.abs()) { self.w_max } else { w };
        let raw = self.g_prime(w);
        let hull = match curve.guess(w) {
            Some(g) => Some(raw.map_or(g, |r| g.max(r))),
            None if raw.is_some() && w < curve.envelope.domain().0 => Some(1.0),
            None => None,
        };
        (raw, hull)
    }

    pub fn curve(&self, grid: &[f64]) -> Result<GuessingCurve> {
        let points: Vec<GuessPoint> = grid.iter().map(|&w| GuessPoint { w, g: self.g_prime(w) }).collect();
        GuessingCurve::from_points(points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuessPoint {
    pub w: f64,
    /// `None` when the point is infeasible.
    pub g: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct GuessingCurve {
    pub points: Vec<GuessPoint>,
    pub envelope: ConcaveEnvelope,
}

impl GuessingCurve {
    pub fn from_points(points: Vec<GuessPoint>) -> Result<Self> {
        let feasible: Vec<(f64, f64)> = points.iter().filter_map(|p| p.g.map(|g| (p.w, g))).collect();
        let envelope = concave_envelope(&feasible)?;
        Ok(Self { points, envelope })
    }

    /// Envelope value at `w`.
    pub fn guess(&self, w: f64) -> Option<f64> {
        self.envelope.eval(w)
    }
}

/// Raw `G'` on `grid` and its concave envelope.
pub fn guessing_curve(
    q: &RandomnessQuery,
    grid: &[f64],
    mono: &MonomialList,
    d: usize,
    seed: u64,
) -> Result<GuessingCurve> {
    GuessingModel::new(q, mono, d, seed)?.curve(grid)
}

/// Witness value queried at each distrust level of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WRule {
    Fixed(f64),
    /// `factor * ideal`.
    Scaled { ideal: f64, factor: f64 },
    /// Two-state discrimination optimum at angle `theta` and the current distrust.
    Discrimination { theta: f64 },
}

impl WRule {
    pub fn value(&self, eps: f64) -> Result<f64> {
        match *self {
            WRule::Fixed(w) => Ok(w),
            WRule::Scaled { ideal, factor } => Ok(ideal * factor),
            WRule::Discrimination { theta } => analytic::sd_optimal(theta, eps),
        }
    }
}

/// One CSV row: `epsilon, w, g_raw, g_hull, hmin_bits`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub rule: usize,
    pub epsilon: f64,
    pub w: f64,
    pub g_raw: Option<f64>,
    pub g_hull: Option<f64>,
    pub hmin_bits: Option<f64>,
}

/// Min-entropy at the queried witness value of every rule, for every
/// uniform distrust level in `eps_grid`.
pub fn randomness_sweep(
    q: &RandomnessQuery,
    eps_grid: &[f64],
    rules: &[WRule],
    mono: &MonomialList,
    d: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(eps_grid.len() * rules.len());
    for &eps in eps_grid {
        let qe = q.with_uniform_epsilon(eps)?;
        let model = GuessingModel::new(&qe, mono, d, seed).map_err(|e| e.context(format!("distrust {eps}")))?;
        let ws: Vec<f64> = rules.iter().map(|r| r.value(eps)).collect::<Result<_>>()?;
        let curve = model.curve(&model.default_grid())?;
        for (i, &w) in ws.iter().enumerate() {
            let (g_raw, g_hull) = model.guess_at(&curve, w);
            let hmin_bits = g_hull.map(|g| hmin(g.max(1e-300))).transpose()?;
            rows.push(SweepRow { rule: i, epsilon: eps, w, g_raw, g_hull, hmin_bits });
        }
    }
    Ok(rows)
}

/// Distrust obtained by attributing the gap between an observed and an
/// ideal witness value to white noise.
pub fn white_noise_epsilon(w_obs: f64, w_ideal: f64) -> Result<f64> {
    let v = analytic::witness_to_visibility(w_obs, w_ideal)?;
    analytic::white_noise_to_eps(v.clamp(0.0, 1.0))
}

/// Envelope value at `w` from a curve on the default grid at one setting.
pub fn certified_guess(q: &RandomnessQuery, w: f64, mono: &MonomialList, d: usize, seed: u64) -> Result<f64> {
    let model = GuessingModel::new(q, mono, d, seed)?;
    let curve = model.curve(&model.default_grid())?;
    model.guess_at(&curve, w).1.ok_or(Error::Infeasible)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hmin_values() {
        assert_eq!(hmin(1.0).unwrap(), 0.0);
        assert_eq!(hmin(0.5).unwrap(), 1.0);
        assert_eq!(hmin(0.25).unwrap(), 2.0);
        assert!(hmin(0.0).is_err());
        assert!(hmin(-0.1).is_err());
    }

    #[test]
    fn envelope_basics() {
        let pts = [(0.0, 1.0), (1.0, 0.9), (2.0, 0.6)];
        let e = concave_envelope(&pts).unwrap();
        assert_eq!(e.vertices(), &pts);
        let dip = [(0.0, 1.0), (1.0, 0.5), (2.0, 0.8)];
        let e = concave_envelope(&dip).unwrap();
        assert!((e.eval(1.0).unwrap() - 0.9).abs() < 1e-15);
        assert!(e.eval(2.5).is_none());
        assert!(concave_envelope(&[(0.0, 1.0), (0.0, 0.5)]).is_err());
        assert!(concave_envelope(&[(0.0, 1.0)]).is_err());
    }

    #[test]
    fn rules() {
        assert_eq!(WRule::Scaled { ideal: 2.0, factor: 0.99 }.value(0.3).unwrap(), 1.98);
        let th = core::f64::consts::PI / 5.0;
        let w = WRule::Discrimination { theta: th }.value(0.01).unwrap();
        assert_eq!(w, analytic::sd_optimal(th, 0.01).unwrap());
    }
}
