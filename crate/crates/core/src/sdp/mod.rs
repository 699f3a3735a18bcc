//! Small dense semidefinite programs with Hermitian blocks.
//!
//! [`solve`] takes an [`SdpProblem`] over Hermitian PSD blocks, embeds each
//! complex block as a real symmetric block of twice the size and runs the
//! interior-point core. [`solve_lmi`] handles problems stated as linear
//! matrix inequalities in free variables. [`maximize_inner_product`] solves
//! the single-state problem `max Tr(rho A)` under a fidelity floor without
//! an interior-point solve.

mod inner;
pub mod ipm;
mod lmi;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, RealMatrix};

pub use inner::{maximize_inner_product, InnerProductOptimum};
pub use ipm::{Settings, SparseSym};
pub use lmi::{solve_lmi, Affine, LmiBlock, LmiProblem, LmiSolution};

pub const COEFFICIENT_HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

/// One linear row `sum_j Re Tr(A_j X_j)` compared against `rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, ComplexMatrix)>,
    pub rhs: f64,
}

/// `maximize sum_j Re Tr(C_j X_j)` over Hermitian PSD blocks `X_j`, subject
/// to equalities and `>=` inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    pub objective: Vec<ComplexMatrix>,
    pub equalities: Vec<LinearConstraint>,
    pub inequalities: Vec<LinearConstraint>,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// Primal objective value.
    pub value: f64,
    pub blocks: Vec<ComplexMatrix>,
    pub dual_value: f64,
    /// Relative duality gap.
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }
}

impl SdpProblem {
    pub fn new(block_dims: Vec<usize>) -> Self {
        let objective = block_dims.iter().map(|&d| linalg::zeros(d)).collect();
        Self { block_dims, objective, equalities: Vec::new(), inequalities: Vec::new() }
    }

    pub fn set_objective(&mut self, block: usize, c: ComplexMatrix) {
        self.objective[block] = c;
    }

    pub fn add_equality(&mut self, terms: Vec<(usize, ComplexMatrix)>, rhs: f64) {
        self.equalities.push(LinearConstraint { terms, rhs });
    }

    pub fn add_inequality(&mut self, terms: Vec<(usize, ComplexMatrix)>, rhs: f64) {
        self.inequalities.push(LinearConstraint { terms, rhs });
    }

    /// Adds the Hermitian matrix equality `sum_j terms_j X_j = rhs` as
    /// real scalar rows, where each term multiplies its block by a real scalar.
    pub fn add_matrix_equality(&mut self, terms: &[(usize, f64)], rhs: &ComplexMatrix) {
        let d = rhs.nrows();
        for p in 0..d {
            for q in p..d {
                // Re X_pq
                let mut e = linalg::zeros(d);
                if p == q {
                    e[(p, p)] = linalg::c(1.0, 0.0);
                } else {
                    e[(p, q)] = linalg::c(0.5, 0.0);
                    e[(q, p)] = linalg::c(0.5, 0.0);
                }
                let t = terms.iter().map(|&(blk, s)| (blk, e.scale(s))).collect();
                self.add_equality(t, rhs[(p, q)].re);
                if p != q {
                    // Im X_pq
                    let mut e = linalg::zeros(d);
                    e[(p, q)] = linalg::c(0.0, -0.5);
                    e[(q, p)] = linalg::c(0.0, 0.5);
                    let t = terms.iter().map(|&(blk, s)| (blk, e.scale(s))).collect();
                    self.add_equality(t, rhs[(p, q)].im);
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.block_dims.is_empty() {
            return Err(Error::invalid("SDP needs at least one block"));
        }
        if self.objective.len() != self.block_dims.len() {
            return Err(Error::shape("one objective matrix per block is required"));
        }
        let check = |blk: usize, m: &ComplexMatrix| -> Result<()> {
            let d = *self
                .block_dims
                .get(blk)
                .ok_or_else(|| Error::invalid(format!("block index {blk} out of range")))?;
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: m.nrows() });
            }
            let defect = linalg::hermitian_defect(m);
            if defect > COEFFICIENT_HERMITIAN_TOL * (1.0 + linalg::frobenius(m)) {
                return Err(Error::NotHermitian(defect));
            }
            Ok(())
        };
        for (j, c) in self.objective.iter().enumerate() {
            check(j, c)?;
        }
        for con in self.equalities.iter().chain(&self.inequalities) {
            for (blk, a) in &con.terms {
                check(*blk, a)?;
            }
        }
        Ok(())
    }
}

fn is_real(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Real image of a Hermitian coefficient: itself for real blocks, half the
/// embedding otherwise so that inner products are preserved.
fn real_coefficient(m: &ComplexMatrix, complex_block: bool) -> SparseSym {
    if complex_block {
        SparseSym::from_dense(&linalg::embed(m).scale(0.5), 0.0)
    } else {
        SparseSym::from_dense(&m.map(|z| z.re), 0.0)
    }
}

/// Solves a Hermitian SDP with the default settings.
pub fn solve(p: &SdpProblem) -> Result<SdpSolution> {
    solve_with(p, &Settings::default())
}

pub fn solve_with(p: &SdpProblem, settings: &Settings) -> Result<SdpSolution> {
    p.validate()?;
    let nb = p.block_dims.len();
    let mut complex = vec![false; nb];
    for (j, c) in p.objective.iter().enumerate() {
        complex[j] |= !is_real(c);
    }
    for con in p.equalities.iter().chain(&p.inequalities) {
        for (blk, a) in &con.terms {
            complex[*blk] |= !is_real(a);
        }
    }
    let dims: Vec<usize> = p.block_dims.iter().zip(&complex).map(|(&d, &c)| if c { 2 * d } else { d }).collect();
    let c_psd = p.objective.iter().enumerate().map(|(j, c)| real_coefficient(c, complex[j])).collect();
    let mut cons = Vec::with_capacity(p.equalities.len() + p.inequalities.len());
    let mut b = Vec::with_capacity(cons.capacity());
    for con in &p.equalities {
        cons.push(ipm::RealConstraint {
            psd: con.terms.iter().map(|(blk, a)| (*blk, real_coefficient(a, complex[*blk]))).collect(),
            lp: Vec::new(),
        });
        b.push(con.rhs);
    }
    for (l, con) in p.inequalities.iter().enumerate() {
        cons.push(ipm::RealConstraint {
            psd: con.terms.iter().map(|(blk, a)| (*blk, real_coefficient(a, complex[*blk]))).collect(),
            lp: vec![(l, -1.0)],
        });
        b.push(con.rhs);
    }
    let rp = ipm::RealProblem {
        psd_dims: dims,
        lp_dim: p.inequalities.len(),
        c_psd,
        c_lp: vec![0.0; p.inequalities.len()],
        cons,
        b,
    };
    let raw = ipm::solve(&rp, settings);
    let blocks = raw
        .x_psd
        .iter()
        .zip(&complex)
        .map(|(x, &c)| if c { linalg::deembed(x) } else { linalg::to_complex(&linalg::symmetrize(x)) })
        .collect();
    Ok(SdpSolution {
        status: map_status(raw.status),
        value: raw.pobj,
        blocks,
        dual_value: raw.dobj,
        gap: raw.gap,
        primal_residual: raw.pinf,
        dual_residual: raw.dinf,
        iterations: raw.iterations,
    })
}

fn map_status(s: ipm::RawStatus) -> SdpStatus {
    match s {
        ipm::RawStatus::Optimal => SdpStatus::Optimal,
        ipm::RawStatus::PrimalInfeasible => SdpStatus::Infeasible,
        ipm::RawStatus::DualInfeasible => SdpStatus::Unbounded,
        ipm::RawStatus::Failed => SdpStatus::NumericalFailure,
    }
}

/// Minimum eigenvalue of a real symmetric matrix, exposed for tests.
pub fn min_eig(m: &RealMatrix) -> f64 {
    linalg::min_eigenvalue_real(m)
}

#[cfg(test)]
mod tests;
