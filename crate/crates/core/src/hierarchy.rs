//! Sampled moment-matrix relaxations.
//!
//! For a list of operator words `S_i` over the alphabet
//! `{phi_x, psi_x, M_{b|y}}` the moment matrix is `Gamma_ij = Tr(S_i S_j^dag)`.
//! Sampling random states and rank-constrained projective measurements
//! spans the affine space of moment matrices reachable at dimension `D`;
//! maximizing a linear functional over the PSD part of that space, with the
//! fidelity floors imposed on the entries `Tr(phi_x psi_x)`, upper-bounds
//! the quantum value for that rank profile.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, c, ComplexMatrix, RealMatrix};
use crate::quantum;
use crate::scenario::{Functional, Scenario};
use crate::sdp::{self, Affine, LmiBlock, LmiProblem, SdpStatus, SparseSym};
use crate::seesaw::compositions;

/// Consecutive dependent samples that end basis growth.
pub const DEPENDENT_RUN: usize = 25;
/// Relative residual below which a sample counts as dependent.
pub const DEPENDENCE_TOL: f64 = 1e-9;
pub const MAX_BASIS: usize = 20_000;

/// One letter of a word. The identity is the empty word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// Projector onto the optimized state for input `x`.
    Phi(usize),
    /// Projector onto the (padded) target for input `x`.
    Psi(usize),
    Effect { b: usize, y: usize },
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Phi(x) => write!(f, "phi{x}"),
            Symbol::Psi(x) => write!(f, "psi{x}"),
            Symbol::Effect { b, y } => write!(f, "M{b}|{y}"),
        }
    }
}

pub type Word = Vec<Symbol>;

/// Words indexing the rows of a moment matrix.
///
/// `m` and `k` describe the measurement alphabet, which need not match the
/// scenario (the classical lists use one `D`-outcome basis measurement).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialList {
    n: usize,
    m: usize,
    k: usize,
    words: Vec<Word>,
}

impl MonomialList {
    fn letters(n: usize, m: usize, k: usize) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = (0..n).map(Symbol::Phi).collect();
        out.extend((0..n).map(Symbol::Psi));
        for y in 0..m {
            out.extend((0..k).map(|b| Symbol::Effect { b, y }));
        }
        out
    }

    fn build(n: usize, m: usize, k: usize, level: usize, with_mm: bool) -> Result<Self> {
        if !(1..=2).contains(&level) {
            return Err(Error::invalid(format!("unsupported level {level}; use 1, 2 or a custom list")));
        }
        let mut words: Vec<Word> = vec![Vec::new()];
        words.extend(Self::letters(n, m, k).into_iter().map(|s| vec![s]));
        if level == 2 {
            let phi: Vec<Symbol> = (0..n).map(Symbol::Phi).collect();
            let psi: Vec<Symbol> = (0..n).map(Symbol::Psi).collect();
            let eff: Vec<Symbol> = (0..m).flat_map(|y| (0..k).map(move |b| Symbol::Effect { b, y })).collect();
            for a in &phi {
                words.extend(phi.iter().map(|b| vec![*a, *b]));
            }
            for a in &phi {
                words.extend(psi.iter().map(|b| vec![*a, *b]));
            }
            for a in &phi {
                words.extend(eff.iter().map(|b| vec![*a, *b]));
            }
            if with_mm {
                for a in &eff {
                    words.extend(eff.iter().map(|b| vec![*a, *b]));
                }
            }
        }
        Self::custom(n, m, k, words)
    }

    /// Level 1: identity and every letter. Level 2 adds the products
    /// `phi phi'`, `phi psi`, `phi M` and `M M'`.
    pub fn level(n: usize, m: usize, k: usize, level: usize) -> Result<Self> {
        Self::build(n, m, k, level, true)
    }

    /// List for a single `d`-outcome basis measurement: effects are the basis
    /// projectors `E_1..E_d` and products of two effects are left out.
    pub fn classical(n: usize, d: usize, level: usize) -> Result<Self> {
        Self::build(n, 1, d, level, false)
    }

    /// Arbitrary word list. The identity and the letters are prepended when
    /// missing; duplicates are dropped keeping the first occurrence.
    pub fn custom(n: usize, m: usize, k: usize, words: Vec<Word>) -> Result<Self> {
        for w in &words {
            for s in w {
                let ok = match *s {
                    Symbol::Phi(x) | Symbol::Psi(x) => x < n,
                    Symbol::Effect { b, y } => b < k && y < m,
                };
                if !ok {
                    return Err(Error::invalid(format!("symbol {s} outside the alphabet")));
                }
            }
        }
        let mut all: Vec<Word> = vec![Vec::new()];
        all.extend(Self::letters(n, m, k).into_iter().map(|s| vec![s]));
        all.extend(words);
        let mut seen = BTreeSet::new();
        let words = all.into_iter().filter(|w| seen.insert(w.clone())).collect();
        Ok(Self { n, m, k, words })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    /// `(n, m, k)` of the alphabet.
    pub fn alphabet(&self) -> (usize, usize, usize) {
        (self.n, self.m, self.k)
    }

    pub fn position(&self, word: &[Symbol]) -> Option<usize> {
        self.words.iter().position(|w| w.as_slice() == word)
    }

    fn letter(&self, s: Symbol) -> Result<usize> {
        self.position(&[s]).ok_or_else(|| Error::invalid(format!("letter {s} missing from the list")))
    }

    /// Entry holding `Tr(phi_x M_{b|y})`.
    pub fn probability_entry(&self, b: usize, x: usize, y: usize) -> Result<(usize, usize)> {
        Ok((self.letter(Symbol::Phi(x))?, self.letter(Symbol::Effect { b, y })?))
    }

    /// Entry holding `|<phi_x|psi_x>|^2`.
    pub fn fidelity_entry(&self, x: usize) -> Result<(usize, usize)> {
        Ok((self.letter(Symbol::Phi(x))?, self.letter(Symbol::Psi(x))?))
    }
}

pub fn default_monomials(scn: &Scenario, level: usize) -> Result<MonomialList> {
    MonomialList::level(scn.n, scn.m, scn.k, level)
}

/// Ranks of the projective effects of every measurement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RankProfile {
    pub ranks: Vec<Vec<usize>>,
}

impl RankProfile {
    pub fn new(ranks: Vec<Vec<usize>>) -> Self {
        Self { ranks }
    }

    pub fn validate(&self, m: usize, k: usize, d: usize) -> Result<()> {
        if self.ranks.len() != m {
            return Err(Error::shape(format!("{} rank lists for {m} measurements", self.ranks.len())));
        }
        for (y, r) in self.ranks.iter().enumerate() {
            if r.len() != k {
                return Err(Error::shape(format!("measurement {y} has {} ranks, expected {k}", r.len())));
            }
            let s: usize = r.iter().sum();
            if s != d {
                return Err(Error::invalid(format!("ranks of measurement {y} sum to {s}, dimension is {d}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for RankProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (y, r) in self.ranks.iter().enumerate() {
            if y > 0 {
                write!(f, "/")?;
            }
            for (i, v) in r.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
        }
        Ok(())
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Outcome relabelings of measurement `y` that leave `f` unchanged.
fn preserving_relabelings(f: &Functional, y: usize) -> Vec<Vec<usize>> {
    let (k, n, _) = f.shape();
    if k > 7 {
        return vec![(0..k).collect()];
    }
    permutations(k)
        .into_iter()
        .filter(|p| (0..k).all(|b| (0..n).all(|x| f.get(p[b], x, y) == f.get(b, x, y))))
        .collect()
}

/// All rank profiles for `m` measurements with `k` outcomes at dimension
/// `d`. With a functional, profiles related by an outcome relabeling that
/// preserves it are merged.
pub fn rank_profiles(f: Option<&Functional>, m: usize, k: usize, d: usize) -> Vec<RankProfile> {
    let comps = compositions(d, k);
    let per_y: Vec<Vec<Vec<usize>>> = (0..m)
        .map(|y| {
            let perms = match f {
                Some(f) => preserving_relabelings(f, y),
                None => vec![(0..k).collect()],
            };
            let canon: BTreeSet<Vec<usize>> = comps
                .iter()
                .map(|r| {
                    perms
                        .iter()
                        .map(|p| {
                            let mut img = vec![0; k];
                            for b in 0..k {
                                img[p[b]] = r[b];
                            }
                            img
                        })
                        .max()
                        .expect("identity is always present")
                })
                .collect();
            canon.into_iter().rev().collect()
        })
        .collect();
    let mut out = vec![Vec::new()];
    for choices in per_y {
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for prefix in &out {
            for r in &choices {
                let mut p: Vec<Vec<usize>> = prefix.clone();
                p.push(r.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter().map(RankProfile::new).collect()
}

/// Inputs with zero distrust have their state fixed to the target while
/// sampling, which keeps the relaxation strictly feasible.
fn pinned_inputs(scn: &Scenario) -> Vec<bool> {
    scn.epsilons().iter().map(|&e| e == 0.0).collect()
}

fn sample_with<R: Rng + ?Sized>(
    scn: &Scenario,
    mono: &MonomialList,
    profile: &RankProfile,
    d: usize,
    pinned: &[bool],
    rng: &mut R,
) -> Result<ComplexMatrix> {
    let (n, m, k) = mono.alphabet();
    if n != scn.n {
        return Err(Error::shape(format!("list built for {n} inputs, scenario has {}", scn.n)));
    }
    if scn.target_dim() > d {
        return Err(Error::DimensionMismatch { expected: d, found: scn.target_dim() });
    }
    profile.validate(m, k, d)?;
    let psi: Vec<ComplexMatrix> = scn.targets().iter().map(|t| t.projector(d)).collect();
    let phi: Vec<ComplexMatrix> = (0..n)
        .map(|x| if pinned[x] { psi[x].clone() } else { quantum::random_pure_state(d, rng).projector(d) })
        .collect();
    let mut eff: Vec<Vec<ComplexMatrix>> = Vec::with_capacity(m);
    for y in 0..m {
        let meas = quantum::random_projective_measurement(d, &profile.ranks[y], rng)?;
        eff.push(meas.effects().to_vec());
    }
    let op = |s: &Symbol| -> &ComplexMatrix {
        match *s {
            Symbol::Phi(x) => &phi[x],
            Symbol::Psi(x) => &psi[x],
            Symbol::Effect { b, y } => &eff[y][b],
        }
    };
    let nw = mono.len();
    let mut v = ComplexMatrix::zeros(nw, d * d);
    for (i, w) in mono.words().iter().enumerate() {
        let s = match w.split_first() {
            None => linalg::identity(d),
            Some((first, rest)) => rest.iter().fold(op(first).clone(), |acc, s| acc * op(s)),
        };
        for a in 0..d {
            for b in 0..d {
                v[(i, a * d + b)] = s[(a, b)];
            }
        }
    }
    let g = &v * v.adjoint();
    Ok(linalg::hermitize(&g))
}

/// One moment matrix `Tr(S_i S_j^dag)` from Haar-random states and
/// measurements with the given ranks. Inputs with zero distrust use their
/// target state.
pub fn sample_moment_matrix<R: Rng + ?Sized>(
    scn: &Scenario,
    mono: &MonomialList,
    profile: &RankProfile,
    d: usize,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    sample_with(scn, mono, profile, d, &pinned_inputs(scn), rng)
}

fn vectorize(g: &ComplexMatrix, real: bool) -> Vec<f64> {
    let n = g.nrows();
    let mut v = Vec::with_capacity(if real { n * (n + 1) / 2 } else { n * n });
    for i in 0..n {
        for j in i..n {
            v.push(g[(i, j)].re);
        }
    }
    if !real {
        for i in 0..n {
            for j in (i + 1)..n {
                v.push(g[(i, j)].im);
            }
        }
    }
    v
}

fn unvectorize(v: &[f64], n: usize, real: bool) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(n, n);
    let mut p = 0;
    for i in 0..n {
        for j in i..n {
            g[(i, j)].re = v[p];
            g[(j, i)].re = v[p];
            p += 1;
        }
    }
    if !real {
        for i in 0..n {
            for j in (i + 1)..n {
                g[(i, j)].im = v[p];
                g[(j, i)].im = -v[p];
                p += 1;
            }
        }
    }
    g
}

/// Affine description of the span: `Gamma = D * B_0 + sum_j t_j B_j` with
/// free real `t_j`, plus the rows on which the PSD constraint is imposed.
#[derive(Debug, Clone)]
struct Parametrization {
    generators: Vec<ComplexMatrix>,
    kept: Vec<usize>,
}

/// Reduced row echelon form of the stacked sample vectors. The `(0,0)`
/// entry is the first column, so the first row carries the normalization.
fn rref(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let r = rows.len();
    if r == 0 {
        return Vec::new();
    }
    let len = rows[0].len();
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let scale = a.iter().flat_map(|row| row.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let mut rank = 0;
    let mut used = vec![false; len];
    for &tol in &[1e-6, 1e-9, 1e-12] {
        for col in 0..len {
            if rank == r {
                break;
            }
            if used[col] {
                continue;
            }
            let (piv, best) = (rank..r)
                .map(|i| (i, a[i][col].abs()))
                .fold((rank, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= tol * scale {
                continue;
            }
            a.swap(rank, piv);
            let p = a[rank][col];
            for v in a[rank].iter_mut() {
                *v /= p;
            }
            let pivot_row = a[rank].clone();
            for (i, row) in a.iter_mut().enumerate() {
                if i == rank {
                    continue;
                }
                let f = row[col];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
            used[col] = true;
            rank += 1;
        }
    }
    a.truncate(rank);
    for row in a.iter_mut() {
        for v in row.iter_mut() {
            if v.abs() < 1e-10 {
                *v = 0.0;
            }
        }
    }
    a
}

/// Indices whose rows of the PSD matrix `g` are linearly independent
/// (pivoted Cholesky with relative threshold `tol`).
fn independent_rows(g: &ComplexMatrix, tol: f64) -> Vec<usize> {
    let n = g.nrows();
    let mut r = g.clone();
    let top = (0..n).map(|i| g[(i, i)].re).fold(0.0f64, f64::max);
    let mut kept = Vec::new();
    let mut done = vec![false; n];
    loop {
        let (p, dmax) = (0..n)
            .filter(|&i| !done[i])
            .map(|i| (i, r[(i, i)].re))
            .fold((usize::MAX, 0.0f64), |acc, x| if x.1 > acc.1 { x } else { acc });
        if p == usize::MAX || dmax <= tol * top {
            break;
        }
        done[p] = true;
        kept.push(p);
        let col = r.column(p).into_owned();
        let upd = (&col * col.adjoint()).unscale(dmax);
        r -= upd;
    }
    kept.sort_unstable();
    kept
}

/// Sampled moment matrices spanning the reachable moment space of one rank
/// profile.
#[derive(Debug, Clone)]
pub struct MomentBasis {
    monomials: MonomialList,
    profile: RankProfile,
    dim: usize,
    real: bool,
    pinned: Vec<bool>,
    matrices: Vec<ComplexMatrix>,
    param: Parametrization,
}

impl MomentBasis {
    /// Rebuilds a basis from stored samples (for instance a cached one).
    pub fn from_samples(
        monomials: MonomialList,
        profile: RankProfile,
        dim: usize,
        real: bool,
        pinned: Vec<bool>,
        matrices: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        let (n, m, k) = monomials.alphabet();
        profile.validate(m, k, dim)?;
        if pinned.len() != n {
            return Err(Error::shape(format!("{} pin flags for {n} inputs", pinned.len())));
        }
        if matrices.is_empty() {
            return Err(Error::invalid("a moment basis needs at least one matrix"));
        }
        let nw = monomials.len();
        for g in &matrices {
            if g.nrows() != nw || g.ncols() != nw {
                return Err(Error::DimensionMismatch { expected: nw, found: g.nrows() });
            }
            if !linalg::is_hermitian(g, linalg::HERMITIAN_TOL * (1.0 + linalg::frobenius(g))) {
                return Err(Error::NotHermitian(linalg::hermitian_defect(g)));
            }
        }
        let rows: Vec<Vec<f64>> = matrices.iter().map(|g| vectorize(g, real)).collect();
        let generators: Vec<ComplexMatrix> = rref(&rows).iter().map(|v| unvectorize(v, nw, real)).collect();
        if (generators[0][(0, 0)].re - 1.0).abs() > 1e-12 {
            return Err(Error::Numerical("identity entry is not a pivot of the sample span".into()));
        }
        let mut mean = linalg::zeros(nw);
        for g in &matrices {
            mean += g;
        }
        let mean = mean.unscale(matrices.len() as f64);
        let mean = if real { mean.map(|z| c(z.re, 0.0)) } else { mean };
        let kept = independent_rows(&mean, 1e-9);
        Ok(Self { monomials, profile, dim, real, pinned, matrices, param: Parametrization { generators, kept } })
    }

    pub fn monomials(&self) -> &MonomialList {
        &self.monomials
    }

    pub fn profile(&self) -> &RankProfile {
        &self.profile
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether only real parts of the samples are used.
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn pinned(&self) -> &[bool] {
        &self.pinned
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    pub fn rank(&self) -> usize {
        self.matrices.len()
    }

    /// Size of the block left after removing the common kernel of the samples.
    pub fn reduced_size(&self) -> usize {
        self.param.kept.len()
    }

    /// `D * B_0 + sum_j t_j B_{j+1}`.
    pub fn moment_matrix(&self, t: &[f64]) -> ComplexMatrix {
        let g = &self.param.generators;
        let mut out = g[0].scale(self.dim as f64);
        for (j, tj) in t.iter().enumerate() {
            out += g[j + 1].scale(*tj);
        }
        out
    }

    /// `Re Gamma_pq` as an affine form in the free parameters.
    fn entry(&self, p: usize, q: usize, scale: f64, acc: &mut Affine) {
        let g = &self.param.generators;
        acc.constant += scale * self.dim as f64 * g[0][(p, q)].re;
        for (j, gj) in g.iter().enumerate().skip(1) {
            let v = gj[(p, q)].re;
            if v != 0.0 {
                acc.coeffs.push((j - 1, scale * v));
            }
        }
    }

    fn form(&self, f: &EntryForm) -> Affine {
        let mut acc = Affine::default();
        for &(p, q, s) in &f.terms {
            self.entry(p, q, s, &mut acc);
        }
        merge(acc)
    }

    fn psd_block(&self) -> LmiBlock {
        let g = &self.param.generators;
        let kept = &self.param.kept;
        let nk = kept.len();
        let restrict = |m: &ComplexMatrix, s: f64| -> SparseSym {
            let sub = ComplexMatrix::from_fn(nk, nk, |i, j| m[(kept[i], kept[j])] * s);
            if self.real {
                let re = RealMatrix::from_fn(nk, nk, |i, j| sub[(i, j)].re);
                SparseSym::from_dense(&re, 0.0)
            } else {
                SparseSym::from_dense(&linalg::embed(&sub), 0.0)
            }
        };
        let dim = if self.real { nk } else { 2 * nk };
        let coeffs = g
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, gj)| (j - 1, restrict(gj, 1.0)))
            .filter(|(_, s)| !s.is_empty())
            .collect();
        LmiBlock { dim, constant: restrict(&g[0], self.dim as f64), coeffs }
    }
}

fn merge(mut a: Affine) -> Affine {
    a.coeffs.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(a.coeffs.len());
    for (j, v) in a.coeffs {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += v,
            _ => out.push((j, v)),
        }
    }
    out.retain(|e| e.1 != 0.0);
    Affine { constant: a.constant, coeffs: out }
}

/// Samples until [`DEPENDENT_RUN`] consecutive candidates lie in the span of
/// the retained ones.
pub fn build_basis<R: Rng + ?Sized>(
    scn: &Scenario,
    mono: &MonomialList,
    profile: &RankProfile,
    d: usize,
    rng: &mut R,
) -> Result<MomentBasis> {
    let real = scn.targets_real();
    let pinned = pinned_inputs(scn);
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut kept: Vec<ComplexMatrix> = Vec::new();
    let mut misses = 0;
    while misses < DEPENDENT_RUN {
        let g = sample_with(scn, mono, profile, d, &pinned, rng)?;
        let g = if real { g.map(|z| c(z.re, 0.0)) } else { g };
        let mut v = vectorize(&g, real);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for _ in 0..2 {
            for b in &q {
                let dot: f64 = b.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= dot * bi;
                }
            }
        }
        let res = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if res > DEPENDENCE_TOL * norm {
            for vi in v.iter_mut() {
                *vi /= res;
            }
            q.push(v);
            kept.push(g);
            misses = 0;
            if kept.len() > MAX_BASIS {
                return Err(Error::BasisGuard(MAX_BASIS));
            }
        } else {
            misses += 1;
        }
    }
    MomentBasis::from_samples(mono.clone(), profile.clone(), d, real, pinned, kept)
}

/// `sum c Re Gamma_pq` over `(p, q, c)` terms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EntryForm {
    pub terms: Vec<(usize, usize, f64)>,
}

impl EntryForm {
    pub fn single(p: usize, q: usize) -> Self {
        Self { terms: vec![(p, q, 1.0)] }
    }

    pub fn eval(&self, g: &ComplexMatrix) -> f64 {
        self.terms.iter().map(|&(p, q, s)| s * g[(p, q)].re).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Ge,
    Le,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryConstraint {
    pub form: EntryForm,
    pub sense: Sense,
    pub rhs: f64,
}

/// `sum_{b,x,y} c_{bxy} Gamma_{bxy}` on the entries of `mono`.
pub fn functional_form(mono: &MonomialList, f: &Functional) -> Result<EntryForm> {
    let (k, n, m) = f.shape();
    let mut terms = Vec::new();
    for b in 0..k {
        for x in 0..n {
            for y in 0..m {
                let cf = f.get(b, x, y);
                if cf != 0.0 {
                    let (p, q) = mono.probability_entry(b, x, y)?;
                    terms.push((p, q, cf));
                }
            }
        }
    }
    Ok(EntryForm { terms })
}

#[derive(Debug, Clone)]
pub struct Relaxation {
    /// Objective at the returned moment matrix.
    pub value: f64,
    /// Dual bound on the objective.
    pub bound: f64,
    pub gamma: ComplexMatrix,
    pub gap: f64,
    pub iterations: usize,
}

/// Maximizes `objective` over PSD moment matrices in the span of `basis`
/// subject to `Gamma_x >= 1 - eps_x` and the extra constraints.
pub fn solve_entries(
    basis: &MomentBasis,
    objective: &EntryForm,
    eps: &[f64],
    extra: &[EntryConstraint],
) -> Result<Relaxation> {
    let (n, _, _) = basis.monomials.alphabet();
    if eps.len() != n {
        return Err(Error::shape(format!("{} distrust values for {n} inputs", eps.len())));
    }
    for (x, &e) in eps.iter().enumerate() {
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::invalid(format!("distrust {e} outside [0, 1]")));
        }
        if basis.pinned[x] && e > 0.0 {
            return Err(Error::invalid(format!("input {x} was sampled at its target; rebuild the basis for eps > 0")));
        }
    }
    let nvars = basis.param.generators.len() - 1;
    let mut inequalities = Vec::new();
    let mut equalities = Vec::new();
    for (x, &e) in eps.iter().enumerate() {
        let (p, q) = basis.monomials.fidelity_entry(x)?;
        inequalities.push(basis.form(&EntryForm::single(p, q)).shifted(1.0 - e));
    }
    for con in extra {
        let a = basis.form(&con.form).shifted(con.rhs);
        match con.sense {
            Sense::Eq => equalities.push(a),
            Sense::Ge => inequalities.push(a),
            Sense::Le => inequalities.push(a.negated()),
        }
    }
    let problem = LmiProblem {
        nvars,
        objective: basis.form(objective),
        blocks: vec![basis.psd_block()],
        inequalities,
        equalities,
    };
    let sol = sdp::solve_lmi(&problem)?;
    match sol.status {
        SdpStatus::Optimal => {}
        SdpStatus::Infeasible => return Err(Error::Infeasible),
        SdpStatus::Unbounded => return Err(Error::Unbounded),
        SdpStatus::NumericalFailure => {
            return Err(Error::Numerical(format!("relaxation stalled with gap {:e}", sol.gap)));
        }
    }
    Ok(Relaxation {
        value: sol.value,
        bound: sol.bound,
        gamma: basis.moment_matrix(&sol.t),
        gap: sol.gap,
        iterations: sol.iterations,
    })
}

/// Upper bound on `f` for one basis, with optional extra constraints and
/// an optional objective replacing the functional.
pub fn solve_relaxation(
    basis: &MomentBasis,
    f: &Functional,
    eps: &[f64],
    extra: &[EntryConstraint],
    objective: Option<&EntryForm>,
) -> Result<Relaxation> {
    let form;
    let obj = match objective {
        Some(o) => o,
        None => {
            form = functional_form(&basis.monomials, f)?;
            &form
        }
    };
    solve_entries(basis, obj, eps, extra)
}

/// Outcome for one rank profile.
#[derive(Debug, Clone)]
pub struct ProfileBound {
    pub profile: RankProfile,
    pub basis_rank: usize,
    pub value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct UpperBound {
    pub value: f64,
    pub best: RankProfile,
    pub profiles: Vec<ProfileBound>,
}

/// Generator for profile `index` of a run seeded with `seed`.
pub fn profile_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Bases for every deduplicated rank profile, each drawn from its own
/// stream of `seed`.
pub fn profile_bases(
    scn: &Scenario,
    f: &Functional,
    mono: &MonomialList,
    d: usize,
    seed: u64,
) -> Vec<(RankProfile, Result<MomentBasis>)> {
    let (_, m, k) = mono.alphabet();
    let profiles = rank_profiles(Some(f), m, k, d);
    let jobs: Vec<(usize, RankProfile)> = profiles.into_iter().enumerate().collect();
    crate::par::map(jobs, |(i, p)| {
        let b = build_basis(scn, mono, &p, d, &mut profile_rng(seed, i));
        (p, b)
    })
}

/// Largest relaxation value over prepared per-profile bases.
pub fn upper_bound_from_bases(
    bases: Vec<(RankProfile, Result<MomentBasis>)>,
    f: &Functional,
    eps: &[f64],
) -> Result<UpperBound> {
    let results = crate::par::map(bases, |(p, b)| {
        let out = b.and_then(|b| solve_relaxation(&b, f, eps, &[], None).map(|r| (b.rank(), r.value)));
        match out {
            Ok((rank, v)) => ProfileBound { profile: p, basis_rank: rank, value: Some(v), error: None },
            Err(e) => ProfileBound { profile: p, basis_rank: 0, value: None, error: Some(format!("{e}")) },
        }
    });
    let mut best: Option<(f64, &RankProfile)> = None;
    for r in &results {
        if let Some(v) = r.value {
            if best.map_or(true, |b| v > b.0) {
                best = Some((v, &r.profile));
            }
        }
    }
    match best {
        Some((value, p)) => Ok(UpperBound { value, best: p.clone(), profiles: results.clone() }),
        None => {
            let msg = results.iter().filter_map(|r| r.error.clone()).next().unwrap_or_default();
            Err(Error::Numerical(format!("every rank profile failed; first error: {msg}")))
        }
    }
}

/// Largest relaxation value over all rank profiles.
pub fn quantum_upper_bound<R: Rng + ?Sized>(
    scn: &Scenario,
    f: &Functional,
    mono: &MonomialList,
    d: usize,
    rng: &mut R,
) -> Result<UpperBound> {
    f.check_shape(scn)?;
    let (_, m, k) = mono.alphabet();
    if (m, k) != (scn.m, scn.k) {
        return Err(Error::shape(format!("list has {m} measurements with {k} outcomes")));
    }
    let seed = rng.gen::<u64>();
    upper_bound_from_bases(profile_bases(scn, f, mono, d, seed), f, scn.epsilons())
}
