//! Closed-form results for two-state discrimination and detection
//! efficiency, white-noise conversions and the named scenario presets.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg;
use crate::quantum::{bloch_density, bloch_to_state, Measurement, MeasurementKind, PureState};
use crate::scenario::{Functional, Realization, Scenario};

use core::f64::consts::{FRAC_1_SQRT_2, PI};

fn check_sd_domain(theta: f64, eps: f64) -> Result<()> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::invalid(format!("angle {theta} outside [0, pi]")));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::invalid(format!("distrust {eps} outside [0, 1]")));
    }
    Ok(())
}

/// Largest distrust for which the discrimination bound stays below 1.
pub fn sd_threshold(theta: f64) -> f64 {
    0.5 * (1.0 - (theta / 2.0).sin())
}

/// Optimal success probability for discriminating two pure qubit targets at
/// Bloch angle `theta` when each preparation has distrust `eps`.
pub fn sd_optimal(theta: f64, eps: f64) -> Result<f64> {
    check_sd_domain(theta, eps)?;
    if eps > sd_threshold(theta) {
        return Ok(1.0);
    }
    let (s, c) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    Ok(0.5 * (1.0 + s) + (eps * (1.0 - eps)).sqrt() * c - eps * s)
}

/// Qubit realization attaining [`sd_optimal`].
pub fn sd_optimal_realization(theta: f64, eps: f64) -> Result<Realization> {
    check_sd_domain(theta, eps)?;
    if eps > sd_threshold(theta) {
        return Err(Error::invalid(format!("distrust {eps} beyond the threshold {}", sd_threshold(theta))));
    }
    let a = (1.0 - 2.0 * eps).clamp(-1.0, 1.0).acos();
    let (nu1, nu2) = (-a, theta + a);
    let rho1 = bloch_density([nu1.sin(), 0.0, nu1.cos()]);
    let rho2 = bloch_density([nu2.sin(), 0.0, nu2.cos()]);
    let p = linalg::positive_projector(&(&rho1 - &rho2), 0.0);
    let q = linalg::hermitize(&(linalg::identity(2) - &p));
    let meas = Measurement::new(vec![p, q], MeasurementKind::Projective)?;
    Realization::new(vec![rho1, rho2], vec![meas])
}

/// Certified detection efficiency `(2 w - 1) / (2 W_sd - 1)`, clamped to [0, 1].
pub fn eta_certified(w_obs: f64, theta: f64, eps: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&w_obs) {
        return Err(Error::invalid(format!("observed value {w_obs} outside [1/2, 1]")));
    }
    let wq = sd_optimal(theta, eps)?;
    if (2.0 * wq - 1.0).abs() < 1e-15 {
        return Err(Error::Uninformative);
    }
    Ok(((2.0 * w_obs - 1.0) / (2.0 * wq - 1.0)).clamp(0.0, 1.0))
}

/// Efficiency bound for targets at angle `theta` prepared with visibility
/// `v` and misalignment `delta`, as a multiple of the true efficiency.
pub fn eta_model_bound(theta: f64, v: f64, delta: f64, eta_true: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::invalid(format!("visibility {v} outside [0, 1]")));
    }
    if !(0.0..=1.0).contains(&eta_true) {
        return Err(Error::invalid(format!("efficiency {eta_true} outside [0, 1]")));
    }
    let s = (theta / 2.0).sin();
    if v >= s {
        if theta == 0.0 {
            return Err(Error::invalid("theta = 0 has no finite cotangent"));
        }
        let cot = (theta / 2.0).cos() / s;
        Ok(v * eta_true * delta.cos() / (v + (1.0 - v * v).sqrt() * cot))
    } else {
        Ok(v * eta_true * delta.cos() * s)
    }
}

/// Distrust implied by attributing imperfections to white noise of visibility `v`.
pub fn white_noise_to_eps(v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::invalid(format!("visibility {v} outside [0, 1]")));
    }
    Ok((1.0 - v) / 2.0)
}

/// Visibility `w_obs / w_ideal` for a witness without constant offset.
pub fn witness_to_visibility(w_obs: f64, w_ideal: f64) -> Result<f64> {
    if w_ideal == 0.0 {
        return Err(Error::invalid("ideal witness value is zero"));
    }
    Ok(w_obs / w_ideal)
}

/// Adds `sign * E_{xy}` with `E = p(0|x,y) - p(1|x,y)`.
fn add_correlator(f: &mut Functional, x: usize, y: usize, sign: f64) {
    f.set(0, x, y, f.get(0, x, y) + sign);
    f.set(1, x, y, f.get(1, x, y) - sign);
}

fn targets_322() -> Vec<PureState> {
    let s = FRAC_1_SQRT_2;
    vec![
        bloch_to_state([0.0, 0.0, 1.0]).expect("unit vector"),
        bloch_to_state([1.0, 0.0, 0.0]).expect("unit vector"),
        bloch_to_state([-s, 0.0, -s]).expect("unit vector"),
    ]
}

/// Three qubit targets (isosceles triangle in the xz-plane), two binary
/// measurements and the witness `E11 + E12 + E21 - E22 - E31`.
///
/// This is the witness whose quantum maximum for these targets is
/// `1 + 2 sqrt 2`; see [`build_322_alt`] for the variant with `-E32`.
pub fn build_322() -> (Scenario, Functional) {
    let scn = Scenario::new(3, 2, 2, targets_322(), vec![0.0; 3]).expect("valid preset");
    let mut f = Functional::for_scenario(&scn);
    for (x, y, s) in [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0), (2, 0, -1.0)] {
        add_correlator(&mut f, x, y, s);
    }
    (scn, f)
}

/// Same targets with the witness `E11 + E12 + E21 - E22 - E32`.
pub fn build_322_alt() -> (Scenario, Functional) {
    let (scn, _) = build_322();
    let mut f = Functional::for_scenario(&scn);
    for (x, y, s) in [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0), (2, 1, -1.0)] {
        add_correlator(&mut f, x, y, s);
    }
    (scn, f)
}

/// 2 -> 1 random access code: four qubit targets on a square in the
/// xz-plane, input `x = 2 x0 + x1`, success averaged over `x` and `y`.
pub fn build_rac() -> (Scenario, Functional) {
    let h = FRAC_1_SQRT_2;
    let amp = |a: f64, b: f64| PureState::from_slice(&[linalg::c(a, 0.0), linalg::c(b, 0.0)]).expect("unit vector");
    let targets = vec![amp(1.0, 0.0), amp(h, h), amp(h, -h), amp(0.0, 1.0)];
    let scn = Scenario::new(4, 2, 2, targets, vec![0.0; 4]).expect("valid preset");
    let f = Functional::from_fn(2, 4, 2, |b, x, y| {
        let bit = if y == 0 { x >> 1 } else { x & 1 };
        if b == bit {
            0.125
        } else {
            0.0
        }
    });
    (scn, f)
}

/// Two qubit targets at Bloch angle `theta`, success probability witness.
pub fn build_sd(theta: f64) -> Result<(Scenario, Functional)> {
    check_sd_domain(theta, 0.0)?;
    let t = vec![bloch_to_state([0.0, 0.0, 1.0])?, bloch_to_state([theta.sin(), 0.0, theta.cos()])?];
    let scn = Scenario::new(2, 1, 2, t, vec![0.0; 2])?;
    let f = Functional::from_fn(2, 2, 1, |b, x, _| if b == x { 0.5 } else { 0.0 });
    Ok((scn, f))
}

pub const W322_QUANTUM: f64 = 1.0 + 2.0 * core::f64::consts::SQRT_2;

pub fn rac_quantum() -> f64 {
    0.5 * (1.0 + FRAC_1_SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::pauli_x;
    use crate::quantum::pauli_z;
    use crate::scenario::{born_table, functional_value, CorrelationTable};

    #[test]
    fn sd_closed_form_examples() {
        for i in 0..=20 {
            let th = PI * i as f64 / 20.0;
            assert!((sd_optimal(th, 0.0).unwrap() - 0.5 * (1.0 + (th / 2.0).sin())).abs() < 1e-15);
            assert!((sd_optimal(th, sd_threshold(th)).unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(sd_optimal(PI, 0.3).unwrap(), 1.0);
        assert!(sd_optimal(4.0, 0.1).is_err());
    }

    #[test]
    fn sd_realization_matches() {
        let r = sd_optimal_realization(PI / 2.0, 0.05).unwrap();
        let (scn, f) = build_sd(PI / 2.0).unwrap();
        let scn = scn.with_uniform_epsilon(0.05).unwrap();
        r.validate(&scn).unwrap();
        let v = functional_value(&f, &born_table(&r).unwrap()).unwrap();
        assert!((v - sd_optimal(PI / 2.0, 0.05).unwrap()).abs() < 1e-10);
        for fid in r.fidelities(&scn).unwrap() {
            assert!((fid - 0.95).abs() < 1e-10);
        }
    }

    #[test]
    fn eta_examples() {
        let (th, eps) = (1.2, 0.02);
        let wq = sd_optimal(th, eps).unwrap();
        assert!((eta_certified(wq, th, eps).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(eta_certified(0.5, th, eps).unwrap(), 0.0);
        let eta = 0.73;
        assert!((eta_certified(eta * wq + (1.0 - eta) / 2.0, th, eps).unwrap() - eta).abs() < 1e-12);
        assert!(matches!(eta_certified(0.5, 0.0, 0.0), Err(Error::Uninformative)));
    }

    #[test]
    fn model_bound_examples() {
        let th = 5.0 * PI / 6.0;
        let deg = PI / 180.0;
        let a = eta_model_bound(th, 0.99, deg, 1.0).unwrap();
        let b = eta_model_bound(th, 0.9, 10.0 * deg, 1.0).unwrap();
        assert!((a - 0.963).abs() < 1e-3, "{a}");
        // Branch 2 (v < sin(theta/2)): the Helstrom measurement, rotated by
        // delta, on white-noise states saturates the certified bound.
        let w = 0.5 * (1.0 + 0.9 * (th / 2.0).sin() * (10.0 * deg).cos());
        let oracle = eta_certified(w, th, white_noise_to_eps(0.9).unwrap()).unwrap();
        assert!((b - oracle).abs() < 1e-12, "{b} vs {oracle}");
        assert!((b - 0.856126).abs() < 1e-6, "{b}");
        assert_eq!(eta_model_bound(1.0, 1.0, 0.0, 0.6).unwrap(), 0.6);
        let s = (th / 2.0).sin();
        let lo = eta_model_bound(th, s - 1e-12, 0.3, 1.0).unwrap();
        let hi = eta_model_bound(th, s, 0.3, 1.0).unwrap();
        assert!((lo - hi).abs() < 1e-9);
    }

    #[test]
    fn white_noise_examples() {
        assert!((white_noise_to_eps(0.99).unwrap() - 0.005).abs() < 1e-15);
        assert_eq!(white_noise_to_eps(1.0).unwrap(), 0.0);
        let v = witness_to_visibility(3.7815, W322_QUANTUM).unwrap();
        assert!((v - 0.98775).abs() < 1e-5);
        assert!((white_noise_to_eps(v).unwrap() - 0.0061).abs() < 1e-4);
        assert!(witness_to_visibility(1.0, 0.0).is_err());
    }

    #[test]
    fn preset_322() {
        let (scn, f) = build_322();
        assert_eq!(f.algebraic_max(), 5.0);
        let det = CorrelationTable::from_fn(2, 3, 2, |b, _, _| if b == 0 { 1.0 } else { 0.0 });
        assert_eq!(functional_value(&f, &det).unwrap(), 1.0);
        assert_eq!(scn.target_dim(), 2);
    }

    #[test]
    fn rac_ideal_value() {
        let (scn, f) = build_rac();
        let h = FRAC_1_SQRT_2;
        let obs = [(pauli_z() + pauli_x()).scale(h), (pauli_z() - pauli_x()).scale(h)];
        let meas: Vec<Measurement> = obs
            .iter()
            .map(|o| {
                let p = (linalg::identity(2) + o).scale(0.5);
                let q = (linalg::identity(2) - o).scale(0.5);
                Measurement::new(vec![p, q], MeasurementKind::Projective).unwrap()
            })
            .collect();
        let states = scn.targets().iter().map(|t| t.projector(2)).collect();
        let r = Realization::new(states, meas).unwrap();
        let v = functional_value(&f, &born_table(&r).unwrap()).unwrap();
        assert!((v - rac_quantum()).abs() < 1e-12);
        let uniform = CorrelationTable::from_fn(2, 4, 2, |_, _, _| 0.5);
        assert!((functional_value(&f, &uniform).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(f.algebraic_max(), 1.0);
    }
}
