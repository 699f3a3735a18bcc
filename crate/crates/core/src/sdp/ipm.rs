//! Primal-dual interior-point method for real block SDPs.
//!
//! Primal: maximize <C, X> s.t. <A_i, X> = b_i, X in the cone.
//! Dual:   minimize b^T y  s.t. Z = sum_i y_i A_i - C in the cone.
//!
//! The cone is a product of PSD blocks and one nonnegative orthant. Search
//! direction is HKM with Mehrotra predictor-corrector, infeasible start.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::RealMatrix;

/// Sparse symmetric matrix with both triangles stored, no duplicates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseSym {
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    /// Builds from upper-triangle entries `(p, q, v)` with `p <= q`;
    /// repeated positions are summed.
    pub fn from_upper(dim: usize, upper: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (p, q, v) in upper {
            let key = if p <= q { (p, q) } else { (q, p) };
            *acc.entry(key).or_insert(0.0) += v;
        }
        let mut entries = Vec::with_capacity(2 * acc.len());
        for ((p, q), v) in acc {
            if v == 0.0 {
                continue;
            }
            entries.push((p, q, v));
            if p != q {
                entries.push((q, p, v));
            }
        }
        Self { dim, entries }
    }

    pub fn from_dense(m: &RealMatrix, tol: f64) -> Self {
        let n = m.nrows();
        let mut entries = Vec::new();
        for q in 0..n {
            for p in 0..n {
                let v = 0.5 * (m[(p, q)] + m[(q, p)]);
                if v.abs() > tol {
                    entries.push((p, q, v));
                }
            }
        }
        Self { dim: n, entries }
    }

    pub fn to_dense(&self) -> RealMatrix {
        let mut m = RealMatrix::zeros(self.dim, self.dim);
        self.add_to(&mut m, 1.0);
        m
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Tr(self * m)` for any square `m`.
    #[inline]
    pub fn dot_dense(&self, m: &RealMatrix) -> f64 {
        self.entries.iter().map(|&(p, q, v)| v * m[(q, p)]).sum()
    }

    #[inline]
    pub fn add_to(&self, m: &mut RealMatrix, scale: f64) {
        for &(p, q, v) in &self.entries {
            m[(p, q)] += scale * v;
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&(p, q, v)| (p, q, v * s)).collect() }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &SparseSym) -> Self {
        let upper = self
            .entries
            .iter()
            .filter(|e| e.0 <= e.1)
            .copied()
            .chain(other.entries.iter().filter(|e| e.0 <= e.1).map(|&(p, q, v)| (p, q, s * v)));
        let mut out = Self::from_upper(self.dim, upper);
        out.entries.retain(|e| e.2.abs() > 1e-15);
        out
    }

    fn rows(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.entries.iter().map(|e| e.0).collect();
        r.sort_unstable();
        r.dedup();
        r
    }
}

/// One equality row: its parts in each PSD block and in the orthant.
#[derive(Debug, Clone, Default)]
pub struct RealConstraint {
    pub psd: Vec<(usize, SparseSym)>,
    pub lp: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct RealProblem {
    pub psd_dims: Vec<usize>,
    pub lp_dim: usize,
    pub c_psd: Vec<SparseSym>,
    pub c_lp: Vec<f64>,
    pub cons: Vec<RealConstraint>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub tol: f64,
    pub report_tol: f64,
    pub max_iter: usize,
    pub step_fraction: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self { tol: 1e-8, report_tol: 1e-7, max_iter: 200, step_fraction: 0.98 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RawStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    Failed,
}

#[derive(Debug, Clone)]
pub struct RealSolution {
    pub status: RawStatus,
    pub pobj: f64,
    pub dobj: f64,
    pub x_psd: Vec<RealMatrix>,
    pub x_lp: Vec<f64>,
    pub y: Vec<f64>,
    pub z_psd: Vec<RealMatrix>,
    pub z_lp: Vec<f64>,
    pub iterations: usize,
    pub pinf: f64,
    pub dinf: f64,
    pub gap: f64,
}

struct Layout {
    /// Per PSD block: (constraint index, matrix).
    per_block: Vec<Vec<(usize, SparseSym)>>,
    /// Per orthant coordinate: (constraint index, coefficient).
    per_lp: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<Vec<usize>>>,
}

fn layout(p: &RealProblem, row_scale: &[f64]) -> Layout {
    let mut per_block = vec![Vec::new(); p.psd_dims.len()];
    let mut per_lp = vec![Vec::new(); p.lp_dim];
    for (i, con) in p.cons.iter().enumerate() {
        for (blk, a) in &con.psd {
            if !a.is_empty() {
                per_block[*blk].push((i, a.scaled(row_scale[i])));
            }
        }
        for &(l, v) in &con.lp {
            if v != 0.0 {
                per_lp[l].push((i, v * row_scale[i]));
            }
        }
    }
    let rows = per_block.iter().map(|items| items.iter().map(|(_, a)| a.rows()).collect()).collect();
    Layout { per_block, per_lp, rows }
}

struct State {
    x: Vec<RealMatrix>,
    z: Vec<RealMatrix>,
    xl: Vec<f64>,
    zl: Vec<f64>,
    y: Vec<f64>,
}

fn apply_a(lay: &Layout, m: usize, mats: &[RealMatrix], lp: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m];
    for (blk, items) in lay.per_block.iter().enumerate() {
        for (i, a) in items {
            out[*i] += a.dot_dense(&mats[blk]);
        }
    }
    for (l, items) in lay.per_lp.iter().enumerate() {
        for &(i, v) in items {
            out[i] += v * lp[l];
        }
    }
    out
}

fn apply_at(lay: &Layout, dims: &[usize], lp_dim: usize, y: &[f64]) -> (Vec<RealMatrix>, Vec<f64>) {
    let mut mats: Vec<RealMatrix> = dims.iter().map(|&n| RealMatrix::zeros(n, n)).collect();
    for (blk, items) in lay.per_block.iter().enumerate() {
        for (i, a) in items {
            if y[*i] != 0.0 {
                a.add_to(&mut mats[blk], y[*i]);
            }
        }
    }
    let mut lp = vec![0.0; lp_dim];
    for (l, items) in lay.per_lp.iter().enumerate() {
        for &(i, v) in items {
            lp[l] += v * y[i];
        }
    }
    (mats, lp)
}

fn dot(a: &RealMatrix, b: &RealMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest `alpha` with `x + alpha dx` still PSD, given the Cholesky factor of `x`.
fn max_step_psd(chol: &Cholesky<f64, nalgebra::Dyn>, dx: &RealMatrix) -> f64 {
    let l = chol.l_dirty();
    let mut m = dx.clone();
    l.solve_lower_triangular_mut(&mut m);
    let mut mt = m.transpose();
    l.solve_lower_triangular_mut(&mut mt);
    let lo = crate::linalg::min_eigenvalue_real(&mt);
    if lo < 0.0 {
        -1.0 / lo
    } else {
        f64::INFINITY
    }
}

fn max_step_lp(x: &[f64], dx: &[f64]) -> f64 {
    let mut a = f64::INFINITY;
    for (xi, di) in x.iter().zip(dx) {
        if *di < 0.0 {
            a = a.min(-xi / di);
        }
    }
    a
}

/// Schur complement `O_ij = Tr(A_i X A_j Z^{-1}) + sum_l a_il a_jl x_l / z_l`.
fn schur(lay: &Layout, m: usize, st: &State, zinv: &[RealMatrix]) -> DMatrix<f64> {
    let mut o = DMatrix::<f64>::zeros(m, m);
    for (blk, items) in lay.per_block.iter().enumerate() {
        let x = &st.x[blk];
        let zi = &zinv[blk];
        let n = x.nrows();
        let nnz: Vec<usize> = items.iter().map(|(_, a)| a.nnz()).collect();
        let total: usize = nnz.iter().sum();
        let mut prefix = 0usize;
        for (jj, (j, aj)) in items.iter().enumerate() {
            prefix += nnz[jj];
            let rows = &lay.rows[blk][jj];
            let pair_cost = nnz[jj] * prefix;
            let dense_cost = nnz[jj] * n + rows.len() * n * n + total;
            if pair_cost <= dense_cost {
                for (i, ai) in items.iter().take(jj + 1) {
                    let mut s = 0.0;
                    for &(p, q, v) in &ai.entries {
                        let mut inner = 0.0;
                        for &(ss, t, u) in &aj.entries {
                            inner += u * x[(q, ss)] * zi[(t, p)];
                        }
                        s += v * inner;
                    }
                    let (a, b) = if i <= j { (*i, *j) } else { (*j, *i) };
                    o[(a, b)] += s;
                }
            } else {
                // G = X A_j Z^{-1}, built from the rows touched by A_j.
                let mut bm = RealMatrix::zeros(n, n);
                for &(s_row, t, u) in &aj.entries {
                    for c in 0..n {
                        bm[(s_row, c)] += u * zi[(t, c)];
                    }
                }
                let mut g = RealMatrix::zeros(n, n);
                for &r in rows {
                    let xcol = x.column(r);
                    for c in 0..n {
                        let br = bm[(r, c)];
                        if br != 0.0 {
                            let mut gc = g.column_mut(c);
                            gc.axpy(br, &xcol, 1.0);
                        }
                    }
                }
                for (i, ai) in items.iter().take(jj + 1) {
                    let s = ai.dot_dense(&g);
                    let (a, b) = if *i <= *j { (*i, *j) } else { (*j, *i) };
                    o[(a, b)] += s;
                }
            }
        }
    }
    for (l, items) in lay.per_lp.iter().enumerate() {
        let w = st.xl[l] / st.zl[l];
        for (jj, &(j, aj)) in items.iter().enumerate() {
            for &(i, ai) in items.iter().take(jj + 1) {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                o[(a, b)] += w * ai * aj;
            }
        }
    }
    for j in 0..m {
        for i in 0..j {
            o[(j, i)] = o[(i, j)];
        }
    }
    o
}

enum SchurFactor {
    Chol(Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurFactor {
    fn new(mut o: DMatrix<f64>) -> Option<Self> {
        if let Some(c) = Cholesky::new(o.clone()) {
            return Some(SchurFactor::Chol(c));
        }
        let scale = o.diagonal().iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
        for i in 0..o.nrows() {
            o[(i, i)] += 1e-13 * scale;
        }
        if let Some(c) = Cholesky::new(o.clone()) {
            return Some(SchurFactor::Chol(c));
        }
        let lu = o.lu();
        if lu.is_invertible() {
            Some(SchurFactor::Lu(lu))
        } else {
            None
        }
    }

    fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let r = DVector::from_column_slice(rhs);
        let s = match self {
            SchurFactor::Chol(c) => c.solve(&r),
            SchurFactor::Lu(lu) => lu.solve(&r)?,
        };
        if s.iter().all(|v| v.is_finite()) {
            Some(s.iter().copied().collect())
        } else {
            None
        }
    }
}

pub fn solve(p: &RealProblem, settings: &Settings) -> RealSolution {
    let m = p.cons.len();
    let dims = &p.psd_dims;
    let nl = p.lp_dim;
    let big_n = (dims.iter().sum::<usize>() + nl).max(1) as f64;

    // Row scaling: each constraint normalised to unit Frobenius norm.
    let row_scale: Vec<f64> = p
        .cons
        .iter()
        .map(|c| {
            let s2: f64 = c.psd.iter().map(|(_, a)| a.frobenius().powi(2)).sum::<f64>()
                + c.lp.iter().map(|(_, v)| v * v).sum::<f64>();
            if s2 > 0.0 {
                1.0 / s2.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let lay = layout(p, &row_scale);
    let b: Vec<f64> = p.b.iter().zip(&row_scale).map(|(b, s)| b * s).collect();
    let c_norm = (p.c_psd.iter().map(|c| c.frobenius().powi(2)).sum::<f64>()
        + p.c_lp.iter().map(|v| v * v).sum::<f64>())
    .sqrt();
    let obj_scale = if c_norm > 0.0 { 1.0 / c_norm.max(1e-12) } else { 1.0 };
    let c_dense: Vec<RealMatrix> = p.c_psd.iter().map(|c| c.to_dense().scale(obj_scale)).collect();
    let c_lp: Vec<f64> = p.c_lp.iter().map(|v| v * obj_scale).collect();
    let b_norm = norm2(&b);
    let cn = if c_norm > 0.0 { 1.0 } else { 0.0 };

    // Starting point in the spirit of SDPT3's defaults.
    let mut xi = (10.0f64).max(big_n.sqrt());
    for bi in &b {
        // rows have unit norm
        xi = xi.max(big_n * (1.0 + bi.abs()) / 2.0);
    }
    let zeta = (10.0f64).max(big_n.sqrt()).max(1.0 + cn);
    let mut st = State {
        x: dims.iter().map(|&n| RealMatrix::identity(n, n).scale(xi)).collect(),
        z: dims.iter().map(|&n| RealMatrix::identity(n, n).scale(zeta)).collect(),
        xl: vec![xi; nl],
        zl: vec![zeta; nl],
        y: vec![0.0; m],
    };

    let mut status = RawStatus::Failed;
    let mut iterations = 0;
    let (mut pinf, mut dinf, mut gap) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let (mut pobj, mut dobj) = (0.0, 0.0);
    let mut best: Option<(f64, State)> = None;
    let mut stall = 0;

    for it in 0..=settings.max_iter {
        iterations = it;
        // Residuals.
        let ax = apply_a(&lay, m, &st.x, &st.xl);
        let rp: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let (aty, aty_l) = apply_at(&lay, dims, nl, &st.y);
        let rd: Vec<RealMatrix> =
            (0..dims.len()).map(|k| &aty[k] - &c_dense[k] - &st.z[k]).collect();
        let rd_l: Vec<f64> = (0..nl).map(|l| aty_l[l] - c_lp[l] - st.zl[l]).collect();
        pobj = (0..dims.len()).map(|k| dot(&c_dense[k], &st.x[k])).sum::<f64>()
            + (0..nl).map(|l| c_lp[l] * st.xl[l]).sum::<f64>();
        dobj = b.iter().zip(&st.y).map(|(b, y)| b * y).sum();
        let xz = (0..dims.len()).map(|k| dot(&st.x[k], &st.z[k])).sum::<f64>()
            + (0..nl).map(|l| st.xl[l] * st.zl[l]).sum::<f64>();
        let mu = xz / big_n;
        let rd_norm = ((rd.iter().map(|r| dot(r, r)).sum::<f64>()) + rd_l.iter().map(|v| v * v).sum::<f64>()).sqrt();
        pinf = norm2(&rp) / (1.0 + b_norm);
        dinf = rd_norm / (1.0 + cn);
        let denom = 1.0 + pobj.abs() + dobj.abs();
        gap = ((pobj - dobj).abs().max(xz.abs())) / denom;
        let merit = pinf.max(dinf).max(gap);
        if !merit.is_finite() {
            break;
        }
        if best.as_ref().map_or(true, |(bm, _)| merit < *bm) {
            best = Some((merit, State { x: st.x.clone(), z: st.z.clone(), xl: st.xl.clone(), zl: st.zl.clone(), y: st.y.clone() }));
        }
        if merit <= settings.tol {
            status = RawStatus::Optimal;
            break;
        }
        // Infeasibility certificates.
        if dobj < 0.0 {
            let t = -dobj;
            if (1.0 + cn + rd_norm) / t < 1e-8 && pinf > settings.tol {
                status = RawStatus::PrimalInfeasible;
                break;
            }
        }
        if pobj > 0.0 {
            let axn = norm2(&ax);
            if axn / pobj < 1e-8 && pobj > 1e8 && dinf > settings.tol {
                status = RawStatus::DualInfeasible;
                break;
            }
        }
        if it == settings.max_iter {
            break;
        }

        // Factorisations.
        let mut zinv = Vec::with_capacity(dims.len());
        let mut xchol = Vec::with_capacity(dims.len());
        let mut zchol = Vec::with_capacity(dims.len());
        let mut ok = true;
        for k in 0..dims.len() {
            match (Cholesky::new(st.z[k].clone()), Cholesky::new(st.x[k].clone())) {
                (Some(zc), Some(xc)) => {
                    let zi = crate::linalg::symmetrize(&zc.inverse());
                    zinv.push(zi);
                    zchol.push(zc);
                    xchol.push(xc);
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        let o = schur(&lay, m, &st, &zinv);
        let fac = match SchurFactor::new(o) {
            Some(f) => f,
            None => break,
        };

        // X Rd Z^{-1} and Z^{-1}, shared by predictor and corrector.
        let xrdz: Vec<RealMatrix> = (0..dims.len()).map(|k| &st.x[k] * &rd[k] * &zinv[k]).collect();
        let xrdz_l: Vec<f64> = (0..nl).map(|l| st.xl[l] * rd_l[l] / st.zl[l]).collect();
        let zinv_l: Vec<f64> = st.zl.iter().map(|z| 1.0 / z).collect();
        let a_zinv = apply_a(&lay, m, &zinv, &zinv_l);
        let a_xrdz = apply_a(&lay, m, &xrdz, &xrdz_l);

        let direction = |sigma_mu: f64,
                         corr: Option<(&[RealMatrix], &[f64])>|
         -> Option<(Vec<f64>, Vec<RealMatrix>, Vec<f64>, Vec<RealMatrix>, Vec<f64>)> {
            let mut rhs: Vec<f64> = (0..m).map(|i| sigma_mu * a_zinv[i] - b[i] - a_xrdz[i]).collect();
            if let Some((cm, cl)) = corr {
                let a_corr = apply_a(&lay, m, cm, cl);
                for i in 0..m {
                    rhs[i] -= a_corr[i];
                }
            }
            let dy = if m > 0 { fac.solve(&rhs)? } else { Vec::new() };
            let (atdy, atdy_l) = apply_at(&lay, dims, nl, &dy);
            let dz: Vec<RealMatrix> = (0..dims.len()).map(|k| &atdy[k] + &rd[k]).collect();
            let dz_l: Vec<f64> = (0..nl).map(|l| atdy_l[l] + rd_l[l]).collect();
            let mut dx = Vec::with_capacity(dims.len());
            for k in 0..dims.len() {
                let mut t = &st.x[k] * &dz[k] * &zinv[k];
                if let Some((cm, _)) = corr {
                    t += &cm[k];
                }
                let raw = zinv[k].scale(sigma_mu) - &st.x[k] - t;
                dx.push(crate::linalg::symmetrize(&raw));
            }
            let dx_l: Vec<f64> = (0..nl)
                .map(|l| {
                    let extra = corr.map_or(0.0, |(_, cl)| cl[l] * st.zl[l]);
                    (sigma_mu - st.xl[l] * st.zl[l] - st.xl[l] * dz_l[l] - extra) / st.zl[l]
                })
                .collect();
            Some((dy, dx, dx_l, dz, dz_l))
        };

        let steps = |dx: &[RealMatrix], dxl: &[f64], dz: &[RealMatrix], dzl: &[f64]| -> (f64, f64) {
            let mut ap = max_step_lp(&st.xl, dxl);
            let mut ad = max_step_lp(&st.zl, dzl);
            for k in 0..dims.len() {
                ap = ap.min(max_step_psd(&xchol[k], &dx[k]));
                ad = ad.min(max_step_psd(&zchol[k], &dz[k]));
            }
            (ap, ad)
        };

        // Predictor.
        let (_, dxa, dxa_l, dza, dza_l) = match direction(0.0, None) {
            Some(d) => d,
            None => break,
        };
        let (apm, adm) = steps(&dxa, &dxa_l, &dza, &dza_l);
        let ap = apm.min(1.0);
        let ad = adm.min(1.0);
        let mut xz_aff = 0.0;
        for k in 0..dims.len() {
            let xa = &st.x[k] + dxa[k].scale(ap);
            let za = &st.z[k] + dza[k].scale(ad);
            xz_aff += dot(&xa, &za);
        }
        for l in 0..nl {
            xz_aff += (st.xl[l] + ap * dxa_l[l]) * (st.zl[l] + ad * dza_l[l]);
        }
        let mu_aff = (xz_aff / big_n).max(0.0);
        let expon = (3.0 * ap.min(ad).powi(2)).max(1.0);
        let sigma = if mu > 0.0 { (mu_aff / mu).powf(expon).min(1.0) } else { 0.0 };

        // Corrector.
        let corr: Vec<RealMatrix> = (0..dims.len()).map(|k| &dxa[k] * &dza[k] * &zinv[k]).collect();
        let corr_l: Vec<f64> = (0..nl).map(|l| dxa_l[l] * dza_l[l] / st.zl[l]).collect();
        let (dy, dx, dx_l, dz, dz_l) = match direction(sigma * mu, Some((&corr, &corr_l))) {
            Some(d) => d,
            None => break,
        };
        let (apm, adm) = steps(&dx, &dx_l, &dz, &dz_l);
        let gamma = settings.step_fraction;
        let ap = (gamma * apm).min(1.0);
        let ad = (gamma * adm).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            stall += 1;
            if stall > 3 {
                break;
            }
        } else {
            stall = 0;
        }
        for k in 0..dims.len() {
            st.x[k] += dx[k].scale(ap);
            st.z[k] += dz[k].scale(ad);
            st.x[k] = crate::linalg::symmetrize(&st.x[k]);
            st.z[k] = crate::linalg::symmetrize(&st.z[k]);
        }
        for l in 0..nl {
            st.xl[l] += ap * dx_l[l];
            st.zl[l] += ad * dz_l[l];
        }
        for i in 0..m {
            st.y[i] += ad * dy[i];
        }
    }

    if status == RawStatus::Failed {
        if let Some((bm, bs)) = best {
            if bm <= settings.report_tol {
                status = RawStatus::Optimal;
            }
            // Report the best iterate seen.
            st = bs;
            let ax = apply_a(&lay, m, &st.x, &st.xl);
            let (aty, aty_l) = apply_at(&lay, dims, nl, &st.y);
            let rdn = ((0..dims.len())
                .map(|k| {
                    let r = &aty[k] - &c_dense[k] - &st.z[k];
                    dot(&r, &r)
                })
                .sum::<f64>()
                + (0..nl).map(|l| (aty_l[l] - c_lp[l] - st.zl[l]).powi(2)).sum::<f64>())
            .sqrt();
            pinf = norm2(&b.iter().zip(&ax).map(|(b, a)| b - a).collect::<Vec<_>>()) / (1.0 + b_norm);
            dinf = rdn / (1.0 + cn);
            pobj = (0..dims.len()).map(|k| dot(&c_dense[k], &st.x[k])).sum::<f64>()
                + (0..nl).map(|l| c_lp[l] * st.xl[l]).sum::<f64>();
            dobj = b.iter().zip(&st.y).map(|(b, y)| b * y).sum();
            let xz = (0..dims.len()).map(|k| dot(&st.x[k], &st.z[k])).sum::<f64>()
                + (0..nl).map(|l| st.xl[l] * st.zl[l]).sum::<f64>();
            gap = (pobj - dobj).abs().max(xz.abs()) / (1.0 + pobj.abs() + dobj.abs());
        }
    }

    // Undo scalings: y was computed for scaled rows and objective.
    let inv = 1.0 / obj_scale;
    let y: Vec<f64> = st.y.iter().zip(&row_scale).map(|(y, s)| y * s * inv).collect();
    RealSolution {
        status,
        pobj: pobj * inv,
        dobj: dobj * inv,
        x_psd: st.x,
        x_lp: st.xl,
        y,
        z_psd: st.z.iter().map(|z| z.scale(inv)).collect(),
        z_lp: st.zl.iter().map(|z| z * inv).collect(),
        iterations,
        pinf,
        dinf,
        gap,
    }
}
