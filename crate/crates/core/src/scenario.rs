//! Scenarios, witnesses, correlation tables and explicit realizations.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::quantum::{self, Measurement, PureState};

pub const STATE_TRACE_TOL: f64 = 1e-10;
pub const STATE_PSD_TOL: f64 = 1e-9;
pub const FIDELITY_TOL: f64 = 1e-8;

/// Prepare-and-measure scenario with target states and distrust levels.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    targets: Vec<PureState>,
    epsilons: Vec<f64>,
}

impl Scenario {
    pub fn new(n: usize, m: usize, k: usize, targets: Vec<PureState>, epsilons: Vec<f64>) -> Result<Self> {
        if n == 0 || m == 0 || k == 0 {
            return Err(Error::invalid("n, m and k must be positive"));
        }
        if targets.len() != n {
            return Err(Error::shape(format!("{} targets for n = {n}", targets.len())));
        }
        let s = Self { n, m, k, targets, epsilons: vec![0.0; n] };
        s.check_targets()?;
        s.with_epsilons(epsilons)
    }

    fn check_targets(&self) -> Result<()> {
        let d = self.targets[0].dim();
        if d > self.n {
            return Err(Error::invalid(format!("target dimension {d} exceeds n = {}", self.n)));
        }
        for t in &self.targets {
            if t.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: t.dim() });
            }
        }
        Ok(())
    }

    /// Same scenario with new distrust parameters.
    pub fn with_epsilons(&self, epsilons: Vec<f64>) -> Result<Self> {
        if epsilons.len() != self.n {
            return Err(Error::shape(format!("{} distrust values for n = {}", epsilons.len(), self.n)));
        }
        if let Some(e) = epsilons.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::invalid(format!("distrust {e} outside [0, 1]")));
        }
        Ok(Self { epsilons, ..self.clone() })
    }

    /// Same scenario with every distrust parameter set to `eps`.
    pub fn with_uniform_epsilon(&self, eps: f64) -> Result<Self> {
        self.with_epsilons(vec![eps; self.n])
    }

    pub fn targets(&self) -> &[PureState] {
        &self.targets
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn target_dim(&self) -> usize {
        self.targets[0].dim()
    }

    pub fn targets_real(&self) -> bool {
        self.targets.iter().all(PureState::is_real)
    }
}

/// Real coefficients `c[b][x][y]` of a linear witness.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    k: usize,
    n: usize,
    m: usize,
    coefficients: Vec<f64>,
}

impl Functional {
    pub fn zeros(k: usize, n: usize, m: usize) -> Self {
        Self { k, n, m, coefficients: vec![0.0; k * n * m] }
    }

    pub fn for_scenario(scn: &Scenario) -> Self {
        Self::zeros(scn.k, scn.n, scn.m)
    }

    /// From a flat array in `[b][x][y]` order.
    pub fn from_flat(k: usize, n: usize, m: usize, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != k * n * m {
            return Err(Error::shape(format!("{} coefficients for shape ({k}, {n}, {m})", coefficients.len())));
        }
        Ok(Self { k, n, m, coefficients })
    }

    pub fn from_fn(k: usize, n: usize, m: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(k, n, m);
        for b in 0..k {
            for x in 0..n {
                for y in 0..m {
                    out.set(b, x, y, f(b, x, y));
                }
            }
        }
        out
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.k, self.n, self.m)
    }

    #[inline]
    fn idx(&self, b: usize, x: usize, y: usize) -> usize {
        (b * self.n + x) * self.m + y
    }

    #[inline]
    pub fn get(&self, b: usize, x: usize, y: usize) -> f64 {
        self.coefficients[self.idx(b, x, y)]
    }

    pub fn set(&mut self, b: usize, x: usize, y: usize, v: f64) {
        let i = self.idx(b, x, y);
        self.coefficients[i] = v;
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn check_shape(&self, scn: &Scenario) -> Result<()> {
        if self.shape() != (scn.k, scn.n, scn.m) {
            return Err(Error::shape(format!(
                "functional shape {:?} does not match scenario ({}, {}, {})",
                self.shape(),
                scn.k,
                scn.n,
                scn.m
            )));
        }
        Ok(())
    }

    /// `sum_{x,y} max_b c[b][x][y]`.
    pub fn algebraic_max(&self) -> f64 {
        let mut s = 0.0;
        for x in 0..self.n {
            for y in 0..self.m {
                s += (0..self.k).map(|b| self.get(b, x, y)).fold(f64::NEG_INFINITY, f64::max);
            }
        }
        s
    }

    pub fn algebraic_min(&self) -> f64 {
        let mut s = 0.0;
        for x in 0..self.n {
            for y in 0..self.m {
                s += (0..self.k).map(|b| self.get(b, x, y)).fold(f64::INFINITY, f64::min);
            }
        }
        s
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { coefficients: self.coefficients.iter().map(|c| c * s).collect(), ..self.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0.0)
    }
}

/// Table of probabilities `p[b][x][y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    k: usize,
    n: usize,
    m: usize,
    p: Vec<f64>,
}

impl CorrelationTable {
    pub fn from_fn(k: usize, n: usize, m: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut p = Vec::with_capacity(k * n * m);
        for b in 0..k {
            for x in 0..n {
                for y in 0..m {
                    p.push(f(b, x, y));
                }
            }
        }
        Self { k, n, m, p }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.k, self.n, self.m)
    }

    #[inline]
    pub fn get(&self, b: usize, x: usize, y: usize) -> f64 {
        self.p[(b * self.n + x) * self.m + y]
    }

    /// Largest deviation of a column sum `sum_b p(b|x,y)` from 1.
    pub fn normalization_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for x in 0..self.n {
            for y in 0..self.m {
                let s: f64 = (0..self.k).map(|b| self.get(b, x, y)).sum();
                worst = worst.max((s - 1.0).abs());
            }
        }
        worst
    }
}

/// Explicit states and measurements in a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub states: Vec<ComplexMatrix>,
    pub measurements: Vec<Measurement>,
}

impl Realization {
    pub fn new(states: Vec<ComplexMatrix>, measurements: Vec<Measurement>) -> Result<Self> {
        let r = Self { states, measurements };
        r.check_states()?;
        for m in &r.measurements {
            m.validate()?;
        }
        Ok(r)
    }

    pub fn dim(&self) -> usize {
        self.states.first().map(|s| s.nrows()).unwrap_or(0)
    }

    fn check_states(&self) -> Result<()> {
        let d = self.dim();
        if self.states.is_empty() {
            return Err(Error::invalid("realization has no states"));
        }
        for (x, rho) in self.states.iter().enumerate() {
            if rho.nrows() != d || rho.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: rho.nrows() });
            }
            let defect = linalg::hermitian_defect(rho);
            if defect > linalg::HERMITIAN_TOL {
                return Err(Error::NotHermitian(defect).context(format!("state {x}")));
            }
            let tr = linalg::trace(rho).re;
            if (tr - 1.0).abs() > STATE_TRACE_TOL {
                return Err(Error::invalid(format!("state {x} has trace {tr}")));
            }
            let lo = linalg::min_eigenvalue(rho);
            if lo < -STATE_PSD_TOL {
                return Err(Error::invalid(format!("state {x} has eigenvalue {lo:.3e}")));
            }
        }
        Ok(())
    }

    /// Checks the realization invariants against a scenario, including the
    /// fidelity floors.
    pub fn validate(&self, scn: &Scenario) -> Result<()> {
        self.check_states()?;
        if self.states.len() != scn.n {
            return Err(Error::shape(format!("{} states for n = {}", self.states.len(), scn.n)));
        }
        if self.measurements.len() != scn.m {
            return Err(Error::shape(format!("{} measurements for m = {}", self.measurements.len(), scn.m)));
        }
        for (y, meas) in self.measurements.iter().enumerate() {
            meas.validate().map_err(|e| e.context(format!("measurement {y}")))?;
            if meas.dim() != self.dim() {
                return Err(Error::DimensionMismatch { expected: self.dim(), found: meas.dim() });
            }
            if meas.outcomes() != scn.k {
                return Err(Error::shape(format!("measurement {y} has {} outcomes", meas.outcomes())));
            }
        }
        for (x, f) in self.fidelities(scn)?.iter().enumerate() {
            let floor = 1.0 - scn.epsilons()[x];
            if *f < floor - FIDELITY_TOL {
                return Err(Error::invalid(format!("state {x} has fidelity {f} below {floor}")));
            }
        }
        Ok(())
    }

    pub fn fidelities(&self, scn: &Scenario) -> Result<Vec<f64>> {
        self.states.iter().zip(scn.targets()).map(|(rho, t)| quantum::fidelity(rho, t)).collect()
    }
}

/// `p(b|x,y) = Tr(rho_x M_{b|y})`.
pub fn born_table(real: &Realization) -> Result<CorrelationTable> {
    let d = real.dim();
    let meas = &real.measurements;
    let k = meas.first().map(|m| m.outcomes()).ok_or_else(|| Error::invalid("no measurements"))?;
    for m in meas {
        if m.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: m.dim() });
        }
        if m.outcomes() != k {
            return Err(Error::shape("measurements have different outcome counts"));
        }
    }
    let n = real.states.len();
    let mut p = Vec::with_capacity(k * n * meas.len());
    for b in 0..k {
        for rho in &real.states {
            for m in meas {
                let z = linalg::trace(&(rho * m.effect(b)));
                if z.im.abs() > 1e-10 {
                    return Err(Error::Numerical(format!("probability has imaginary part {:.3e}", z.im)));
                }
                p.push(z.re);
            }
        }
    }
    Ok(CorrelationTable { k, n, m: meas.len(), p })
}

/// `W = sum c_{bxy} p(b|x,y)`.
pub fn functional_value(f: &Functional, p: &CorrelationTable) -> Result<f64> {
    if f.shape() != p.shape() {
        return Err(Error::shape(format!("functional {:?} vs table {:?}", f.shape(), p.shape())));
    }
    Ok(f.coefficients.iter().zip(&p.p).map(|(c, q)| c * q).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{MeasurementKind, PureState};

    fn z_measurement() -> Measurement {
        Measurement::new(
            vec![PureState::basis(2, 0).projector(2), PureState::basis(2, 1).projector(2)],
            MeasurementKind::Projective,
        )
        .unwrap()
    }

    #[test]
    fn eigenstate_and_mixed_tables() {
        let r = Realization::new(vec![PureState::basis(2, 0).projector(2)], vec![z_measurement()]).unwrap();
        let p = born_table(&r).unwrap();
        assert_eq!((p.get(0, 0, 0), p.get(1, 0, 0)), (1.0, 0.0));
        let r = Realization::new(vec![linalg::identity(2).scale(0.5)], vec![z_measurement()]).unwrap();
        let p = born_table(&r).unwrap();
        assert!((p.get(0, 0, 0) - 0.5).abs() < 1e-15 && (p.get(1, 0, 0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn functional_value_examples() {
        let f = Functional::zeros(2, 3, 2);
        let uniform = CorrelationTable::from_fn(2, 3, 2, |_, _, _| 0.5);
        assert_eq!(functional_value(&f, &uniform).unwrap(), 0.0);
        let g = Functional::from_fn(3, 2, 2, |b, _, _| if b == 1 { 0.25 } else { 0.0 });
        let p = CorrelationTable::from_fn(3, 2, 2, |_, _, _| 1.0 / 3.0);
        assert!((functional_value(&g, &p).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(functional_value(&g, &uniform).is_err());
    }

    #[test]
    fn scenario_validation() {
        let t = vec![PureState::basis(2, 0), PureState::basis(2, 1)];
        assert!(Scenario::new(2, 1, 2, t.clone(), vec![0.0, 1.0]).is_ok());
        assert!(Scenario::new(2, 1, 2, t.clone(), vec![0.0, 1.5]).is_err());
        assert!(Scenario::new(1, 1, 2, vec![PureState::basis(2, 0)], vec![0.0]).is_err());
        assert!(Scenario::new(3, 1, 2, t, vec![0.0; 3]).is_err());
    }

    #[test]
    fn fidelity_floor_is_enforced() {
        let scn = Scenario::new(2, 1, 2, vec![PureState::basis(2, 0); 2], vec![0.1; 2]).unwrap();
        let mixed = linalg::identity(2).scale(0.5);
        let ok = Realization::new(vec![mixed.clone(), mixed], vec![z_measurement()]).unwrap();
        assert!(ok.validate(&scn).is_err());
        let scn = scn.with_uniform_epsilon(0.5).unwrap();
        ok.validate(&scn).unwrap();
    }
}
