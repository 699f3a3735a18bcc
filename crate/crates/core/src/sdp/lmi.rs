//! Problems in free variables `t`: maximize an affine objective subject to
//! `F0 + sum_j t_j F_j >= 0` (PSD), affine inequalities and equalities.
//!
//! Equalities are removed by substitution before the interior-point solve,
//! so the remaining problem keeps a strictly feasible point whenever the
//! inequality part has one.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::ipm::{self, RawStatus, RealConstraint, RealProblem, Settings, SparseSym};
use super::SdpStatus;
use crate::error::{Error, Result};

/// `constant + sum coeffs[i].1 * t[coeffs[i].0]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Affine {
    pub constant: f64,
    pub coeffs: Vec<(usize, f64)>,
}

impl Affine {
    pub fn new(constant: f64, coeffs: Vec<(usize, f64)>) -> Self {
        Self { constant, coeffs }
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().map(|&(j, c)| c * t[j]).sum::<f64>()
    }

    /// Same form minus `rhs`, for writing `form >= rhs` as `form - rhs >= 0`.
    pub fn shifted(&self, rhs: f64) -> Self {
        Self { constant: self.constant - rhs, coeffs: self.coeffs.clone() }
    }

    pub fn negated(&self) -> Self {
        Self { constant: -self.constant, coeffs: self.coeffs.iter().map(|&(j, c)| (j, -c)).collect() }
    }
}

/// `constant + sum_j t_j coeffs_j` constrained PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiBlock {
    pub dim: usize,
    pub constant: SparseSym,
    pub coeffs: Vec<(usize, SparseSym)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmiProblem {
    pub nvars: usize,
    pub objective: Affine,
    pub blocks: Vec<LmiBlock>,
    /// Each form must be `>= 0`.
    pub inequalities: Vec<Affine>,
    /// Each form must be `= 0`.
    pub equalities: Vec<Affine>,
}

#[derive(Debug, Clone)]
pub struct LmiSolution {
    pub status: SdpStatus,
    pub value: f64,
    /// Objective bound from the dual certificate.
    pub bound: f64,
    pub t: Vec<f64>,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

/// Column view: everything variable `j` multiplies.
#[derive(Debug, Clone, Default)]
struct Column {
    blocks: BTreeMap<usize, SparseSym>,
    ineq: BTreeMap<usize, f64>,
    eq: BTreeMap<usize, f64>,
    obj: f64,
}

impl Column {
    fn add_scaled(&mut self, s: f64, other: &Column, dims: &[usize]) {
        for (blk, m) in &other.blocks {
            let cur = self.blocks.remove(blk).unwrap_or_else(|| SparseSym::zeros(dims[*blk]));
            let sum = cur.axpy(s, m);
            if !sum.is_empty() {
                self.blocks.insert(*blk, sum);
            }
        }
        for (l, v) in &other.ineq {
            *self.ineq.entry(*l).or_insert(0.0) += s * v;
        }
        for (e, v) in &other.eq {
            *self.eq.entry(*e).or_insert(0.0) += s * v;
        }
        self.obj += s * other.obj;
    }

    fn nnz(&self) -> usize {
        self.blocks.values().map(|m| m.nnz()).sum()
    }

    fn is_structurally_zero(&self, tol: f64) -> bool {
        self.blocks.values().all(|m| m.entries.iter().all(|e| e.2.abs() <= tol))
            && self.ineq.values().all(|v| v.abs() <= tol)
    }
}

struct Elimination {
    var: usize,
    pivot: f64,
    constant: f64,
    others: Vec<(usize, f64)>,
}

pub fn solve_lmi(p: &LmiProblem) -> Result<LmiSolution> {
    solve_lmi_with(p, &Settings::default())
}

pub fn solve_lmi_with(p: &LmiProblem, settings: &Settings) -> Result<LmiSolution> {
    let nv = p.nvars;
    let dims: Vec<usize> = p.blocks.iter().map(|b| b.dim).collect();
    let mut cols = vec![Column::default(); nv];
    let mut cst = Column::default();
    for (bi, blk) in p.blocks.iter().enumerate() {
        if blk.constant.dim != blk.dim {
            return Err(Error::DimensionMismatch { expected: blk.dim, found: blk.constant.dim });
        }
        cst.blocks.insert(bi, blk.constant.clone());
        for (j, f) in &blk.coeffs {
            if *j >= nv {
                return Err(Error::invalid("LMI coefficient refers to a missing variable"));
            }
            if f.dim != blk.dim {
                return Err(Error::DimensionMismatch { expected: blk.dim, found: f.dim });
            }
            let cur = cols[*j].blocks.remove(&bi).unwrap_or_else(|| SparseSym::zeros(blk.dim));
            cols[*j].blocks.insert(bi, cur.axpy(1.0, f));
        }
    }
    for (l, g) in p.inequalities.iter().enumerate() {
        cst.ineq.insert(l, g.constant);
        for &(j, v) in &g.coeffs {
            *cols[j].ineq.entry(l).or_insert(0.0) += v;
        }
    }
    for (e, h) in p.equalities.iter().enumerate() {
        cst.eq.insert(e, h.constant);
        for &(j, v) in &h.coeffs {
            *cols[j].eq.entry(e).or_insert(0.0) += v;
        }
    }
    cst.obj = p.objective.constant;
    for &(j, v) in &p.objective.coeffs {
        cols[j].obj += v;
    }

    // Substitute equalities one at a time.
    let mut alive = vec![true; nv];
    let mut elim: Vec<Elimination> = Vec::new();
    for e in 0..p.equalities.len() {
        let row: Vec<(usize, f64)> = (0..nv)
            .filter(|&j| alive[j])
            .filter_map(|j| cols[j].eq.get(&e).map(|&v| (j, v)))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        let hmax = row.iter().fold(0.0f64, |a, &(_, v)| a.max(v.abs()));
        let h0 = cst.eq.get(&e).copied().unwrap_or(0.0);
        if hmax <= 1e-12 {
            if h0.abs() > 1e-9 {
                return Ok(infeasible(nv));
            }
            continue;
        }
        let &(j, hj) = row
            .iter()
            .filter(|&&(_, v)| v.abs() >= 0.1 * hmax)
            .min_by_key(|&&(j, _)| cols[j].nnz())
            .expect("nonempty pivot candidates");
        let colj = cols[j].clone();
        for &(i, hi) in &row {
            if i != j {
                cols[i].add_scaled(-hi / hj, &colj, &dims);
            }
        }
        cst.add_scaled(-h0 / hj, &colj, &dims);
        alive[j] = false;
        elim.push(Elimination {
            var: j,
            pivot: hj,
            constant: h0,
            others: row.into_iter().filter(|&(i, _)| i != j).collect(),
        });
    }

    // Free variables that touch no cone constraint.
    let scale = cols
        .iter()
        .flat_map(|c| c.blocks.values().flat_map(|m| m.entries.iter().map(|e| e.2.abs())))
        .fold(1e-300f64, f64::max);
    let mut free = Vec::new();
    for j in 0..nv {
        if !alive[j] {
            continue;
        }
        if cols[j].is_structurally_zero(1e-14 * scale) {
            if cols[j].obj.abs() > 1e-12 {
                return Ok(LmiSolution {
                    status: SdpStatus::Unbounded,
                    value: f64::INFINITY,
                    bound: f64::INFINITY,
                    t: vec![0.0; nv],
                    gap: f64::NAN,
                    primal_residual: f64::NAN,
                    dual_residual: f64::NAN,
                    iterations: 0,
                });
            }
            continue;
        }
        free.push(j);
    }

    // Inequalities that no longer depend on any free variable.
    let mut ineq_dep = vec![false; p.inequalities.len()];
    for &j in &free {
        for (l, v) in &cols[j].ineq {
            if v.abs() > 1e-13 {
                ineq_dep[*l] = true;
            }
        }
    }
    let mut lp_index = vec![usize::MAX; p.inequalities.len()];
    let mut lp_dim = 0;
    for l in 0..p.inequalities.len() {
        let g0 = cst.ineq.get(&l).copied().unwrap_or(0.0);
        if ineq_dep[l] {
            lp_index[l] = lp_dim;
            lp_dim += 1;
        } else if g0 < -1e-9 {
            return Ok(infeasible(nv));
        }
    }

    if free.is_empty() {
        let psd = cst.blocks.values().all(|m| super::min_eig(&m.to_dense()) >= -1e-9);
        if !psd {
            return Ok(infeasible(nv));
        }
        let mut t = vec![0.0; nv];
        for el in elim.iter().rev() {
            let s: f64 = el.others.iter().map(|&(i, h)| h * t[i]).sum();
            t[el.var] = -(el.constant + s) / el.pivot;
        }
        return Ok(LmiSolution {
            status: SdpStatus::Optimal,
            value: cst.obj,
            bound: cst.obj,
            t,
            gap: 0.0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            iterations: 0,
        });
    }

    let mut c_lp = vec![0.0; lp_dim];
    for (l, &g0) in &cst.ineq {
        if lp_index[*l] != usize::MAX {
            c_lp[lp_index[*l]] = -g0;
        }
    }
    let c_psd: Vec<SparseSym> = (0..dims.len())
        .map(|bi| cst.blocks.get(&bi).map(|m| m.scaled(-1.0)).unwrap_or_else(|| SparseSym::zeros(dims[bi])))
        .collect();
    let mut cons = Vec::with_capacity(free.len());
    let mut b = Vec::with_capacity(free.len());
    for &j in &free {
        let col = &cols[j];
        cons.push(RealConstraint {
            psd: col.blocks.iter().map(|(bi, m)| (*bi, m.clone())).collect(),
            lp: col
                .ineq
                .iter()
                .filter(|(l, v)| lp_index[**l] != usize::MAX && v.abs() > 0.0)
                .map(|(l, v)| (lp_index[*l], *v))
                .collect(),
        });
        b.push(-col.obj);
    }
    let rp = RealProblem { psd_dims: dims, lp_dim, c_psd, c_lp, cons, b };
    let raw = ipm::solve(&rp, settings);

    let mut t = vec![0.0; nv];
    for (i, &j) in free.iter().enumerate() {
        t[j] = raw.y[i];
    }
    for el in elim.iter().rev() {
        let s: f64 = el.others.iter().map(|&(i, h)| h * t[i]).sum();
        t[el.var] = -(el.constant + s) / el.pivot;
    }
    let status = match raw.status {
        RawStatus::Optimal => SdpStatus::Optimal,
        RawStatus::PrimalInfeasible => SdpStatus::Unbounded,
        RawStatus::DualInfeasible => SdpStatus::Infeasible,
        RawStatus::Failed => SdpStatus::NumericalFailure,
    };
    Ok(LmiSolution {
        status,
        value: cst.obj - raw.dobj,
        bound: cst.obj - raw.pobj,
        t,
        gap: raw.gap,
        primal_residual: raw.dinf,
        dual_residual: raw.pinf,
        iterations: raw.iterations,
    })
}

fn infeasible(nv: usize) -> LmiSolution {
    LmiSolution {
        status: SdpStatus::Infeasible,
        value: f64::NEG_INFINITY,
        bound: f64::NEG_INFINITY,
        t: vec![0.0; nv],
        gap: f64::NAN,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        iterations: 0,
    }
}
