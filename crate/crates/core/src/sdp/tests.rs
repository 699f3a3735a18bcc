use super::*;
use crate::linalg::{c, C64};
use crate::quantum::{bloch_to_state, random_unitary};
use alloc::vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_herm(d: usize, rng: &mut ChaCha8Rng, complex: bool) -> ComplexMatrix {
    let m = ComplexMatrix::from_fn(d, d, |_, _| {
        c(rng.gen_range(-1.0..1.0), if complex { rng.gen_range(-1.0..1.0) } else { 0.0 })
    });
    linalg::hermitize(&m)
}

#[test]
fn trace_one_maximum() {
    let mut p = SdpProblem::new(vec![3]);
    p.set_objective(0, linalg::identity(3));
    p.add_equality(vec![(0, linalg::identity(3))], 1.0);
    let s = solve(&p).unwrap();
    assert_eq!(s.status, SdpStatus::Optimal);
    assert!((s.value - 1.0).abs() < 1e-7);
}

#[test]
fn helstrom_as_sdp() {
    let th = core::f64::consts::FRAC_PI_2;
    let r1 = bloch_to_state([0.0, 0.0, 1.0]).unwrap().projector(2);
    let r2 = bloch_to_state([th.sin(), 0.0, th.cos()]).unwrap().projector(2);
    // Blocks: M and I - M.
    let mut p = SdpProblem::new(vec![2, 2]);
    p.set_objective(0, (&r1 - &r2).scale(0.5));
    p.add_matrix_equality(&[(0, 1.0), (1, 1.0)], &linalg::identity(2));
    let s = solve(&p).unwrap();
    assert!(s.is_optimal());
    let expected = 0.5 * (1.0 + (th / 2.0).sin());
    assert!((0.5 + s.value - expected).abs() < 1e-7, "{}", s.value);
}

/// Builds an instance with a planted primal-dual optimal pair.
fn planted(d: usize, m: usize, complex: bool, seed: u64) -> (SdpProblem, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_unitary(d, &mut rng);
    let u = if complex { u } else { u.map(|z| c(z.re, 0.0)) };
    let mut uq = u.clone();
    linalg::gram_schmidt(&mut uq);
    let r = d / 2;
    let mut x = linalg::zeros(d);
    let mut z = linalg::zeros(d);
    for k in 0..d {
        let v = uq.column(k).into_owned();
        let w = rng.gen_range(0.5..2.0);
        if k < r {
            x += linalg::projector(&v).scale(w);
        } else {
            z += linalg::projector(&v).scale(w);
        }
    }
    let mut p = SdpProblem::new(vec![d]);
    let mut cmat = -z.clone();
    let mut opt = 0.0;
    for _ in 0..m {
        let a = random_herm(d, &mut rng, complex);
        let y: f64 = rng.gen_range(-1.0..1.0);
        let bi = linalg::inner(&a, &x);
        cmat += a.scale(y);
        opt += y * bi;
        p.add_equality(vec![(0, a)], bi);
    }
    p.set_objective(0, linalg::hermitize(&cmat));
    (p, opt)
}

#[test]
fn planted_optimum_is_recovered() {
    for (seed, complex) in [(1, false), (2, true), (3, true)] {
        let (p, opt) = planted(5, 8, complex, seed);
        let s = solve(&p).unwrap();
        assert!(s.is_optimal(), "{:?}", s.status);
        assert!((s.value - opt).abs() < 1e-7 * (1.0 + opt.abs()), "{} vs {}", s.value, opt);
        assert!(s.value <= s.dual_value + 1e-7);
        let lo = linalg::min_eigenvalue(&s.blocks[0]);
        assert!(lo >= -1e-7);
        assert!(linalg::hermitian_defect(&s.blocks[0]) < 1e-9);
    }
}

#[test]
fn objective_scaling() {
    let (p, _) = planted(4, 5, true, 11);
    let s1 = solve(&p).unwrap();
    let mut q = p.clone();
    q.objective[0] = q.objective[0].scale(7.5);
    let s2 = solve(&q).unwrap();
    assert!((s2.value - 7.5 * s1.value).abs() <= 1e-9 * (1.0 + s2.value.abs()) + 1e-7);
    assert!(linalg::frobenius(&(&s1.blocks[0] - &s2.blocks[0])) < 1e-6);
}

#[test]
fn inequality_rows() {
    // maximize -Tr(X) s.t. X_00 >= 2 (dim 2): optimum -2.
    let mut p = SdpProblem::new(vec![2]);
    p.set_objective(0, -linalg::identity(2));
    let mut e = linalg::zeros(2);
    e[(0, 0)] = C64::new(1.0, 0.0);
    p.add_inequality(vec![(0, e)], 2.0);
    let s = solve(&p).unwrap();
    assert!(s.is_optimal());
    assert!((s.value + 2.0).abs() < 1e-7);
}

#[test]
fn infeasible_and_unbounded() {
    let mut p = SdpProblem::new(vec![2]);
    p.add_equality(vec![(0, linalg::identity(2))], -1.0);
    assert_eq!(solve(&p).unwrap().status, SdpStatus::Infeasible);

    let mut q = SdpProblem::new(vec![2]);
    q.set_objective(0, linalg::identity(2));
    let mut e = linalg::zeros(2);
    e[(0, 1)] = C64::new(1.0, 0.0);
    e[(1, 0)] = C64::new(1.0, 0.0);
    q.add_equality(vec![(0, e)], 0.0);
    assert_eq!(solve(&q).unwrap().status, SdpStatus::Unbounded);
}

#[test]
fn rejects_bad_input() {
    let mut p = SdpProblem::new(vec![2]);
    let mut a = linalg::zeros(2);
    a[(0, 1)] = C64::new(1.0, 0.0);
    p.set_objective(0, a);
    assert!(matches!(solve(&p), Err(Error::NotHermitian(_))));
    let mut q = SdpProblem::new(vec![2]);
    q.add_equality(vec![(0, linalg::identity(3))], 1.0);
    assert!(solve(&q).is_err());
}

#[test]
fn lmi_disk() {
    // maximize t1 s.t. [[1, t1], [t1, 1 - t2]] >= 0 and t2 = 0.
    let f0 = SparseSym::from_upper(2, [(0, 0, 1.0), (1, 1, 1.0)]);
    let f1 = SparseSym::from_upper(2, [(0, 1, 1.0)]);
    let f2 = SparseSym::from_upper(2, [(1, 1, -1.0)]);
    let p = LmiProblem {
        nvars: 2,
        objective: Affine::new(0.0, vec![(0, 1.0)]),
        blocks: vec![LmiBlock { dim: 2, constant: f0, coeffs: vec![(0, f1), (1, f2)] }],
        inequalities: vec![Affine::new(0.5, vec![(0, -1.0)])],
        equalities: vec![Affine::new(0.0, vec![(1, 1.0)])],
    };
    let s = solve_lmi(&p).unwrap();
    assert_eq!(s.status, SdpStatus::Optimal);
    // The inequality t1 <= 0.5 binds before the disk does.
    assert!((s.value - 0.5).abs() < 1e-7, "{}", s.value);
    assert!(s.t[1].abs() < 1e-12);
}
