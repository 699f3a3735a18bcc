//! Hybrid models whose measurement device is one basis measurement
//! `{E_k}` followed by a deterministic post-processing `f(y, k) -> b`.
//!
//! Basis indices are exchangeable (the basis is itself optimized), so a
//! strategy is identified with the multiset of its per-index tuples
//! `(f(0,k), ..., f(m-1,k))`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hierarchy::{self, MonomialList, RankProfile};
use crate::linalg::{self, c, ComplexMatrix};
use crate::quantum::{self, Measurement, MeasurementKind};
use crate::scenario::{Functional, Realization, Scenario};
use crate::sdp;

pub const STRATEGY_LIMIT: u128 = 1_000_000;

/// Outcome `f(y, k)` for every measurement `y` and basis index `k`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeterministicStrategy {
    m: usize,
    d: usize,
    /// Index-major: entry `k * m + y`.
    assignment: Vec<usize>,
}

impl DeterministicStrategy {
    pub fn new(m: usize, d: usize, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != m * d {
            return Err(Error::shape(format!("{} assignments for m = {m}, D = {d}", assignment.len())));
        }
        Ok(Self { m, d, assignment })
    }

    pub fn outcome(&self, y: usize, k: usize) -> usize {
        self.assignment[k * self.m + y]
    }

    pub fn tuple(&self, k: usize) -> &[usize] {
        &self.assignment[k * self.m..(k + 1) * self.m]
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.d)
    }

    /// Representative with tuples sorted by basis index.
    pub fn canonical(&self) -> Self {
        let mut tuples: Vec<&[usize]> = (0..self.d).map(|k| self.tuple(k)).collect();
        tuples.sort();
        Self { m: self.m, d: self.d, assignment: tuples.concat() }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// Number of canonical strategies, `C(k^m + D - 1, D)`.
pub fn canonical_count(m: usize, d: usize, k_out: usize) -> u128 {
    let t = (k_out as u128).checked_pow(m as u32).unwrap_or(u128::MAX / 4);
    if d == 0 {
        return 1;
    }
    binomial(t + d as u128 - 1, d as u128)
}

/// One canonical strategy per multiset of per-index tuples.
pub fn enumerate_strategies(m: usize, d: usize, k_out: usize) -> Result<Vec<DeterministicStrategy>> {
    let count = canonical_count(m, d, k_out);
    if count > STRATEGY_LIMIT {
        return Err(Error::EnumerationGuard { count, limit: STRATEGY_LIMIT });
    }
    let t = k_out.pow(m as u32);
    let tuple = |i: usize| -> Vec<usize> {
        let mut v = vec![0; m];
        let mut r = i;
        for y in (0..m).rev() {
            v[y] = r % k_out;
            r /= k_out;
        }
        v
    };
    let tuples: Vec<Vec<usize>> = (0..t).map(tuple).collect();
    let mut out = Vec::with_capacity(count as usize);
    let mut idx = vec![0usize; d];
    loop {
        let assignment: Vec<usize> = idx.iter().flat_map(|&i| tuples[i].iter().copied()).collect();
        out.push(DeterministicStrategy { m, d, assignment });
        // Next non-decreasing index sequence.
        let mut p = d;
        while p > 0 && idx[p - 1] == t - 1 {
            p -= 1;
        }
        if p == 0 {
            break;
        }
        idx[p - 1] += 1;
        let v = idx[p - 1];
        for q in idx.iter_mut().skip(p) {
            *q = v;
        }
    }
    Ok(out)
}

/// Every raw assignment (no deduplication); small instances only.
pub fn enumerate_raw(m: usize, d: usize, k_out: usize) -> Result<Vec<DeterministicStrategy>> {
    let len = (m * d) as u32;
    let count = (k_out as u128).checked_pow(len).unwrap_or(u128::MAX);
    if count > STRATEGY_LIMIT {
        return Err(Error::EnumerationGuard { count, limit: STRATEGY_LIMIT });
    }
    Ok((0..count as usize)
        .map(|mut i| {
            let mut a = vec![0; m * d];
            for v in a.iter_mut().rev() {
                *v = i % k_out;
                i /= k_out;
            }
            DeterministicStrategy { m, d, assignment: a }
        })
        .collect())
}

/// Functional on the basis outcomes: `c'(k, x) = sum_y c_{f(y,k), x, y}`,
/// shaped `(D, n, 1)`.
pub fn induced_functional(f: &Functional, s: &DeterministicStrategy) -> Result<Functional> {
    let (_, n, m) = f.shape();
    let (sm, d) = s.dims();
    if sm != m {
        return Err(Error::shape(format!("strategy covers {sm} measurements, functional has {m}")));
    }
    Ok(Functional::from_fn(d, n, 1, |k, x, _| (0..m).map(|y| f.get(s.outcome(y, k), x, y)).sum()))
}

/// Measurements `M_{b|y} = sum_{k: f(y,k) = b} E_k` for basis columns `u`.
pub fn post_processed_measurements(u: &ComplexMatrix, s: &DeterministicStrategy, k_out: usize) -> Vec<Measurement> {
    let (m, d) = s.dims();
    (0..m)
        .map(|y| {
            let mut eff = vec![linalg::zeros(u.nrows()); k_out];
            for k in 0..d {
                let v = u.column(k).into_owned();
                eff[s.outcome(y, k)] += linalg::projector(&v);
            }
            Measurement::new_unchecked(eff, MeasurementKind::Projective)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct StrategyBound {
    pub strategy: DeterministicStrategy,
    pub value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ClassicalBound {
    pub value: f64,
    pub best: DeterministicStrategy,
    pub basis_rank: usize,
    pub strategies: Vec<StrategyBound>,
}

/// Classical-list hierarchy bound maximized over canonical strategies.
/// `mono` must be a list over one `D`-outcome measurement
/// ([`MonomialList::classical`]); one moment basis serves every strategy.
pub fn classical_upper_bound<R: Rng + ?Sized>(
    scn: &Scenario,
    f: &Functional,
    mono: &MonomialList,
    d: usize,
    rng: &mut R,
) -> Result<ClassicalBound> {
    f.check_shape(scn)?;
    let (_, mm, kk) = mono.alphabet();
    if mm != 1 || kk != d {
        return Err(Error::shape(format!("classical list must have one {d}-outcome measurement")));
    }
    let strategies = enumerate_strategies(scn.m, d, scn.k)?;
    let profile = RankProfile::new(vec![vec![1; d]]);
    let basis = hierarchy::build_basis(scn, mono, &profile, d, rng)?;
    let eps = scn.epsilons().to_vec();
    let results = crate::par::map(strategies, |s| {
        let out = induced_functional(f, &s).and_then(|g| hierarchy::solve_relaxation(&basis, &g, &eps, &[], None));
        match out {
            Ok(r) => StrategyBound { strategy: s, value: Some(r.value), error: None },
            Err(e) => StrategyBound { strategy: s, value: None, error: Some(format!("{e}")) },
        }
    });
    let mut best: Option<(f64, &DeterministicStrategy)> = None;
    for r in &results {
        if let Some(v) = r.value {
            if best.map_or(true, |b| v > b.0) {
                best = Some((v, &r.strategy));
            }
        }
    }
    match best {
        Some((value, s)) => Ok(ClassicalBound { value, best: s.clone(), basis_rank: basis.rank(), strategies: results.clone() }),
        None => {
            let msg = results.iter().filter_map(|r| r.error.clone()).next().unwrap_or_default();
            Err(Error::Numerical(format!("every strategy failed; first error: {msg}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalSearch {
    pub restarts: usize,
    /// Rotation trials per restart.
    pub trials: usize,
    pub initial_step: f64,
    pub min_step: f64,
}

impl Default for LocalSearch {
    fn default() -> Self {
        Self { restarts: 10, trials: 300, initial_step: 0.3, min_step: 1e-4 }
    }
}

#[derive(Debug, Clone)]
pub struct ClassicalLower {
    pub value: f64,
    /// Basis vectors as columns.
    pub basis: ComplexMatrix,
    pub strategy: DeterministicStrategy,
    pub realization: Realization,
}

/// Greedy `f(y,k) = argmax_b sum_x c_{bxy} <e_k|rho_x|e_k>`.
fn greedy_strategy(f: &Functional, u: &ComplexMatrix, states: &[ComplexMatrix]) -> DeterministicStrategy {
    let (k_out, n, m) = f.shape();
    let d = u.ncols();
    let pops: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            let e = u.column(k).into_owned();
            (0..n).map(|x| (e.adjoint() * &states[x] * &e)[(0, 0)].re).collect()
        })
        .collect();
    let mut a = vec![0; m * d];
    for k in 0..d {
        for y in 0..m {
            let mut best = (f64::NEG_INFINITY, 0);
            for b in 0..k_out {
                let v: f64 = (0..n).map(|x| f.get(b, x, y) * pops[k][x]).sum();
                if v > best.0 + 1e-15 {
                    best = (v, b);
                }
            }
            a[k * m + y] = best.1;
        }
    }
    DeterministicStrategy { m, d, assignment: a }
}

/// Best states for a fixed basis and strategy.
fn state_step(
    scn: &Scenario,
    f: &Functional,
    u: &ComplexMatrix,
    s: &DeterministicStrategy,
) -> Result<(f64, Vec<ComplexMatrix>)> {
    let g = induced_functional(f, s)?;
    let d = u.nrows();
    let mut total = 0.0;
    let mut states = Vec::with_capacity(scn.n);
    for x in 0..scn.n {
        let mut a = linalg::zeros(d);
        for k in 0..u.ncols() {
            let w = g.get(k, x, 0);
            if w != 0.0 {
                a += linalg::projector(&u.column(k).into_owned()).scale(w);
            }
        }
        let r = sdp::maximize_inner_product(&a, &scn.targets()[x].padded(d), scn.epsilons()[x])
            .map_err(|e| e.context(format!("state step for input {x}")))?;
        total += r.value;
        states.push(r.state);
    }
    Ok((total, states))
}

/// Alternates greedy strategies and state steps at a fixed basis.
fn evaluate_basis(
    scn: &Scenario,
    f: &Functional,
    u: &ComplexMatrix,
    start: &[ComplexMatrix],
) -> Result<(f64, DeterministicStrategy, Vec<ComplexMatrix>)> {
    let mut states = start.to_vec();
    let mut strat = greedy_strategy(f, u, &states);
    let (mut value, st) = state_step(scn, f, u, &strat)?;
    states = st;
    for _ in 0..100 {
        let next = greedy_strategy(f, u, &states);
        let (v, st) = state_step(scn, f, u, &next)?;
        if v <= value + 1e-12 {
            break;
        }
        value = v;
        strat = next;
        states = st;
    }
    Ok((value, strat, states))
}

fn small_rotation<R: Rng + ?Sized>(d: usize, step: f64, rng: &mut R) -> ComplexMatrix {
    let h = ComplexMatrix::from_fn(d, d, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let h = linalg::hermitize(&h);
    let e = linalg::eigh(&h);
    // exp(i step H)
    let mut out = linalg::zeros(d);
    for j in 0..d {
        let v = e.column(j);
        let ph = c((step * e.values[j]).cos(), (step * e.values[j]).sin());
        out += linalg::projector(&v) * ph;
    }
    out
}

/// Local search over bases from a given starting basis and states.
pub fn classical_lower_bound_from<R: Rng + ?Sized>(
    scn: &Scenario,
    f: &Functional,
    basis: &ComplexMatrix,
    states: &[ComplexMatrix],
    search: &LocalSearch,
    rng: &mut R,
) -> Result<ClassicalLower> {
    f.check_shape(scn)?;
    let d = basis.nrows();
    if basis.ncols() != d || states.len() != scn.n || states.iter().any(|s| s.nrows() != d) {
        return Err(Error::shape("basis and states must share the working dimension"));
    }
    let mut u = basis.clone();
    let (mut value, mut strat, mut st) = evaluate_basis(scn, f, &u, states)?;
    let mut step = search.initial_step;
    let mut fails = 0;
    for _ in 0..search.trials {
        if step < search.min_step {
            break;
        }
        let mut cand = &u * small_rotation(d, step, rng);
        linalg::gram_schmidt(&mut cand);
        let (v, s2, st2) = evaluate_basis(scn, f, &cand, &st)?;
        if v > value + 1e-12 {
            value = v;
            u = cand;
            strat = s2;
            st = st2;
            fails = 0;
        } else {
            fails += 1;
            if fails >= 10 {
                step *= 0.5;
                fails = 0;
            }
        }
    }
    let measurements = post_processed_measurements(&u, &strat, scn.k);
    let realization = Realization::new(st, measurements)?;
    Ok(ClassicalLower { value, basis: u, strategy: strat, realization })
}

/// Random-restart search for an explicit classical-measurement realization.
pub fn classical_lower_bound<R: Rng + ?Sized>(
    scn: &Scenario,
    f: &Functional,
    d: usize,
    search: &LocalSearch,
    rng: &mut R,
) -> Result<ClassicalLower> {
    if scn.target_dim() > d {
        return Err(Error::DimensionMismatch { expected: d, found: scn.target_dim() });
    }
    let targets: Vec<ComplexMatrix> = scn.targets().iter().map(|t| t.projector(d)).collect();
    let mut best: Option<ClassicalLower> = None;
    for _ in 0..search.restarts.max(1) {
        let u = quantum::random_unitary(d, rng);
        let r = classical_lower_bound_from(scn, f, &u, &targets, search, rng)?;
        if best.as_ref().map_or(true, |b| r.value > b.value) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Fourier basis as columns, with the Fourier states as starting states.
pub fn fourier_start(n: usize) -> (ComplexMatrix, Vec<ComplexMatrix>) {
    let states = quantum::fourier_states(n);
    let u = ComplexMatrix::from_fn(n, n, |i, j| states[j].amplitudes()[i]);
    (u, states.iter().map(|s| s.projector(n)).collect())
}
