//! `max Tr(rho A)` over density matrices with `<psi|rho|psi> >= 1 - eps`.
//!
//! The Lagrange dual is the one-dimensional convex problem
//! `min_{mu >= 0} lambda_max(A + mu |psi><psi|) - mu (1 - eps)`. Bisection
//! on `mu` locates the multiplier; the optimum is attained by a pure state
//! in the top eigenspace of `A + mu |psi><psi|` whose fidelity is exactly
//! the floor (or above it when `mu = 0`).

use alloc::format;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{self, c, ComplexMatrix, ComplexVector};

#[derive(Debug, Clone)]
pub struct InnerProductOptimum {
    /// `Tr(rho A)` at the returned state.
    pub value: f64,
    /// `lambda_max(A + mu Psi) - mu (1 - eps)`, an upper bound on the optimum.
    pub dual_value: f64,
    pub multiplier: f64,
    /// Optimal pure state.
    pub vector: ComplexVector,
    pub state: ComplexMatrix,
}

/// Top eigenspace of `h` and the normalised projection of `psi` onto it,
/// together with the squared norm of that projection.
fn top_space(h: &ComplexMatrix, psi: &ComplexVector) -> (f64, ComplexMatrix, ComplexVector, f64) {
    let e = linalg::eigh(h);
    let n = h.nrows();
    let top = e.max();
    let scale = e.values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let tol = 1e-11 * scale;
    let first = e.values.iter().position(|&v| v >= top - tol).unwrap_or(n - 1);
    let basis = e.vectors.columns(first, n - first).into_owned();
    let coeffs = basis.adjoint() * psi;
    let w = coeffs.norm_squared();
    let v = if w > 1e-28 {
        &basis * coeffs.unscale(w.sqrt())
    } else {
        basis.column(basis.ncols() - 1).into_owned()
    };
    (top, basis, v, w)
}

pub fn maximize_inner_product(a: &ComplexMatrix, psi: &ComplexVector, eps: f64) -> Result<InnerProductOptimum> {
    let d = a.nrows();
    if a.ncols() != d || psi.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: psi.len() });
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::invalid(format!("distrust {eps} outside [0, 1]")));
    }
    let defect = linalg::hermitian_defect(a);
    if defect > 1e-10 * (1.0 + linalg::frobenius(a)) {
        return Err(Error::NotHermitian(defect));
    }
    let a = linalg::hermitize(a);
    let psi = psi.unscale(psi.norm());
    let floor = 1.0 - eps;
    let proj = linalg::projector(&psi);

    let finish = |v: ComplexVector, mu: f64, dual: f64| {
        let v = v.unscale(v.norm());
        let value = (v.adjoint() * &a * &v)[(0, 0)].re;
        InnerProductOptimum { value, dual_value: dual, multiplier: mu, state: linalg::projector(&v), vector: v }
    };

    if eps == 0.0 {
        let value = (psi.adjoint() * &a * &psi)[(0, 0)].re;
        // Any large multiplier certifies the value up to O(1/mu).
        return Ok(InnerProductOptimum {
            value,
            dual_value: value,
            multiplier: f64::INFINITY,
            state: proj,
            vector: psi,
        });
    }

    // mu = 0: the unconstrained top eigenvector may already be feasible.
    let (top, _, v0, w0) = top_space(&a, &psi);
    if w0 >= floor {
        return Ok(finish(v0, 0.0, top));
    }

    let fid_at = |mu: f64| {
        let h = &a + proj.scale(mu);
        let (_, _, _, w) = top_space(&h, &psi);
        w
    };
    let spread = {
        let e = linalg::eigh(&a);
        (e.max() - e.min()).max(1e-300)
    };
    let mut hi = spread;
    let mut guard = 0;
    while fid_at(hi) < floor {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::Numerical("fidelity multiplier did not bracket".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if fid_at(mid) >= floor {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mu = hi;
    let h = &a + proj.scale(mu);
    let (top, basis, p_hat, w) = top_space(&h, &psi);
    let dual = top - mu * floor;
    if basis.ncols() == 1 || w <= floor {
        return Ok(finish(p_hat, mu, dual));
    }
    // Degenerate top eigenspace: mix the projection of psi with an
    // orthogonal direction inside the eigenspace to land on the floor.
    let coeffs = basis.adjoint() * &psi;
    let mut q = None;
    for j in 0..basis.ncols() {
        let mut e = ComplexVector::zeros(basis.ncols());
        e[j] = c(1.0, 0.0);
        let cn = coeffs.unscale(coeffs.norm());
        let r = &e - &cn * cn.dotc(&e);
        if r.norm() > 1e-6 {
            q = Some(&basis * r.unscale(r.norm()));
            break;
        }
    }
    let q = match q {
        Some(q) => q,
        None => return Ok(finish(p_hat, mu, dual)),
    };
    let alpha = (floor / w).sqrt();
    let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
    let v = p_hat.scale(alpha) + q.scale(beta);
    Ok(finish(v, mu, dual))
}
