//! Pure states, measurements and their random generators.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, c, ComplexMatrix, ComplexVector, C64};

pub const NORM_TOL: f64 = 1e-12;
pub const EFFECT_TOL: f64 = 1e-9;

/// Unit vector with the first nonzero amplitude real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: ComplexVector,
}

impl PureState {
    /// Checks the norm and applies the phase convention.
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::invalid("pure state needs at least one amplitude"));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { amplitudes: fix_phase(amplitudes) })
    }

    /// Normalises an arbitrary nonzero vector.
    pub fn normalized(amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::invalid("cannot normalise a zero vector"));
        }
        Ok(Self { amplitudes: fix_phase(amplitudes.unscale(norm)) })
    }

    pub fn from_slice(amps: &[C64]) -> Result<Self> {
        Self::new(ComplexVector::from_column_slice(amps))
    }

    /// Computational basis state `|index>` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = ComplexVector::zeros(dim);
        v[index] = c(1.0, 0.0);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    /// Amplitudes zero-padded to dimension `dim`.
    pub fn padded(&self, dim: usize) -> ComplexVector {
        linalg::zero_pad(&self.amplitudes, dim)
    }

    /// `|psi><psi|` in dimension `dim`.
    pub fn projector(&self, dim: usize) -> ComplexMatrix {
        linalg::projector(&self.padded(dim))
    }

    pub fn overlap(&self, other: &PureState) -> C64 {
        let d = self.dim().max(other.dim());
        self.padded(d).dotc(&other.padded(d))
    }

    pub fn is_real(&self) -> bool {
        self.amplitudes.iter().all(|z| z.im.abs() <= 1e-14)
    }
}

fn fix_phase(mut v: ComplexVector) -> ComplexVector {
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-12).copied() {
        let phase = z.conj() / z.norm();
        for a in v.iter_mut() {
            *a *= phase;
        }
        for a in v.iter_mut() {
            if a.im.abs() < 1e-17 {
                a.im = 0.0;
            }
        }
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementKind {
    Povm,
    Projective,
}

/// A measurement given by its effect operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    effects: Vec<ComplexMatrix>,
    kind: MeasurementKind,
}

impl Measurement {
    pub fn new(effects: Vec<ComplexMatrix>, kind: MeasurementKind) -> Result<Self> {
        let m = Self { effects, kind };
        m.validate()?;
        Ok(m)
    }

    /// Skips validation. Used for iterates that are valid by construction.
    pub fn new_unchecked(effects: Vec<ComplexMatrix>, kind: MeasurementKind) -> Self {
        Self { effects, kind }
    }

    pub fn validate(&self) -> Result<()> {
        let first = self.effects.first().ok_or_else(|| Error::invalid("measurement has no effects"))?;
        let d = first.nrows();
        let mut total = linalg::zeros(d);
        for (b, e) in self.effects.iter().enumerate() {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: e.nrows() });
            }
            let defect = linalg::hermitian_defect(e);
            if defect > linalg::HERMITIAN_TOL {
                return Err(Error::NotHermitian(defect));
            }
            let lo = linalg::min_eigenvalue(e);
            if lo < -EFFECT_TOL {
                return Err(Error::invalid(format!("effect {b} has eigenvalue {lo:.3e}")));
            }
            total += e;
        }
        let dev = linalg::frobenius(&(total - linalg::identity(d)));
        if dev > EFFECT_TOL {
            return Err(Error::invalid(format!("effects sum to identity only within {dev:.3e}")));
        }
        if self.kind == MeasurementKind::Projective {
            for (b, e) in self.effects.iter().enumerate() {
                if linalg::frobenius(&(e * e - e)) > EFFECT_TOL {
                    return Err(Error::invalid(format!("effect {b} is not a projector")));
                }
                for f in self.effects.iter().skip(b + 1) {
                    if linalg::frobenius(&(e * f)) > EFFECT_TOL {
                        return Err(Error::invalid("projective effects are not orthogonal"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn effect(&self, b: usize) -> &ComplexMatrix {
        &self.effects[b]
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }

    pub fn kind(&self) -> MeasurementKind {
        self.kind
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn from_basis(u: &ComplexMatrix) -> Self {
        let effects = (0..u.ncols()).map(|k| linalg::projector(&u.column(k).into_owned())).collect();
        Self { effects, kind: MeasurementKind::Projective }
    }
}

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    assert!(dim >= 1, "dimension must be positive");
    loop {
        let v = ComplexVector::from_fn(dim, |_, _| gaussian_c64(rng));
        if let Ok(s) = PureState::normalized(v) {
            return s;
        }
    }
}

/// Haar-random unitary (Gram-Schmidt on a complex Gaussian matrix).
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    loop {
        let mut m = ComplexMatrix::from_fn(dim, dim, |_, _| gaussian_c64(rng));
        if linalg::gram_schmidt(&mut m) {
            return m;
        }
    }
}

/// Projective measurement whose effects project onto consecutive column
/// blocks of a Haar-random unitary, with block sizes `ranks`.
pub fn random_projective_measurement<R: Rng + ?Sized>(
    dim: usize,
    ranks: &[usize],
    rng: &mut R,
) -> Result<Measurement> {
    let total: usize = ranks.iter().sum();
    if total != dim {
        return Err(Error::invalid(format!("ranks sum to {total}, dimension is {dim}")));
    }
    let u = random_unitary(dim, rng);
    Ok(Measurement::new_unchecked(block_projectors(&u, ranks), MeasurementKind::Projective))
}

pub(crate) fn block_projectors(u: &ComplexMatrix, ranks: &[usize]) -> Vec<ComplexMatrix> {
    let dim = u.nrows();
    let mut start = 0;
    ranks
        .iter()
        .map(|&r| {
            let v = u.columns(start, r);
            start += r;
            if r == 0 {
                linalg::zeros(dim)
            } else {
                v * v.adjoint()
            }
        })
        .collect()
}

/// Fourier basis of `C^n`: amplitudes `exp(2 pi i j x / n) / sqrt(n)`.
pub fn fourier_states(n: usize) -> Vec<PureState> {
    assert!(n >= 1);
    let norm = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|x| {
            let v = ComplexVector::from_fn(n, |j, _| {
                let angle = 2.0 * core::f64::consts::PI * (j * x % n) as f64 / n as f64;
                c(norm * angle.cos(), norm * angle.sin())
            });
            PureState { amplitudes: fix_phase(v) }
        })
        .collect()
}

/// Qubit state with the given unit Bloch vector.
pub fn bloch_to_state(v: [f64; 3]) -> Result<PureState> {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("Bloch vector has norm {norm}")));
    }
    let [x, y, z] = v;
    // |psi> = (cos(t/2), e^{i phi} sin(t/2)) with the sign choice that
    // stays accurate near the south pole.
    let amps = if z > -0.5 {
        let a = ((1.0 + z) / 2.0).sqrt();
        [c(a, 0.0), c(x, y) / (2.0 * a)]
    } else {
        let b = ((1.0 - z) / 2.0).sqrt();
        [c(x, -y) / (2.0 * b), c(b, 0.0)]
    };
    PureState::normalized(ComplexVector::from_column_slice(&amps))
}

/// `<psi|rho|psi>` with the target padded to the state's dimension.
pub fn fidelity(state: &ComplexMatrix, target: &PureState) -> Result<f64> {
    let d = state.nrows();
    if target.dim() > d {
        return Err(Error::DimensionMismatch { expected: d, found: target.dim() });
    }
    let t = target.padded(d);
    Ok((t.adjoint() * state * &t)[(0, 0)].re)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// `(I + v . sigma) / 2`.
pub fn bloch_density(v: [f64; 3]) -> ComplexMatrix {
    (linalg::identity(2) + pauli_x().scale(v[0]) + pauli_y().scale(v[1]) + pauli_z().scale(v[2])).scale(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bloch_examples() {
        let s = bloch_to_state([0.0, 0.0, 1.0]).unwrap();
        assert!((s.amplitudes()[0] - c(1.0, 0.0)).norm() < 1e-15);
        let s = bloch_to_state([1.0, 0.0, 0.0]).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0].re - h).abs() < 1e-15 && (s.amplitudes()[1].re - h).abs() < 1e-15);
        let th = 5.0 * core::f64::consts::PI / 6.0;
        let s = bloch_to_state([th.sin(), 0.0, th.cos()]).unwrap();
        assert!((s.amplitudes()[0].re - (th / 2.0).cos()).abs() < 1e-14);
        assert!((s.amplitudes()[1].re - (th / 2.0).sin()).abs() < 1e-14);
        let s = bloch_to_state([0.0, 0.0, -1.0]).unwrap();
        assert!((s.amplitudes()[1] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(bloch_to_state([1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn bloch_state_is_eigenvector() {
        let v = [0.3, -0.5, (1.0f64 - 0.34).sqrt()];
        let s = bloch_to_state(v).unwrap();
        let f = fidelity(&bloch_density(v), &s).unwrap();
        assert!((f - 1.0).abs() < 1e-13);
    }

    #[test]
    fn random_state_is_reproducible() {
        let a = random_pure_state(4, &mut ChaCha8Rng::seed_from_u64(9));
        let b = random_pure_state(4, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        assert!((a.amplitudes().norm() - 1.0).abs() < 1e-12);
        let one = random_pure_state(1, &mut ChaCha8Rng::seed_from_u64(1));
        assert!((one.amplitudes()[0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn projective_measurement_ranks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_projective_measurement(5, &[2, 0, 3], &mut rng).unwrap();
        m.validate().unwrap();
        let traces: Vec<f64> = m.effects().iter().map(|e| linalg::trace(e).re).collect();
        assert!((traces[0] - 2.0).abs() < 1e-12 && traces[1].abs() < 1e-12 && (traces[2] - 3.0).abs() < 1e-12);
        let full = random_projective_measurement(3, &[3, 0], &mut rng).unwrap();
        assert!(linalg::frobenius(&(full.effect(0) - linalg::identity(3))) < 1e-12);
        assert!(random_projective_measurement(3, &[1, 1], &mut rng).is_err());
    }

    #[test]
    fn fourier_examples() {
        let f1 = fourier_states(1);
        assert_eq!(f1[0], PureState::basis(1, 0));
        let f2 = fourier_states(2);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((f2[1].amplitudes()[1].re + h).abs() < 1e-15);
        let zero = PureState::basis(4, 0);
        for s in fourier_states(4) {
            assert!((s.overlap(&zero).norm_sqr() - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn fidelity_examples() {
        let psi = bloch_to_state([1.0, 0.0, 0.0]).unwrap();
        assert!((fidelity(&psi.projector(2), &psi).unwrap() - 1.0).abs() < 1e-15);
        assert!((fidelity(&linalg::identity(3).scale(1.0 / 3.0), &psi).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let v = 0.9;
        let rho = psi.projector(2).scale(v) + linalg::identity(2).scale((1.0 - v) / 2.0);
        assert!((fidelity(&rho, &psi).unwrap() - (1.0 + v) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_measurements_are_rejected() {
        let p0 = PureState::basis(2, 0).projector(2);
        assert!(Measurement::new(alloc::vec![p0.clone()], MeasurementKind::Povm).is_err());
        let half = linalg::identity(2).scale(0.5);
        assert!(Measurement::new(alloc::vec![half.clone(), half.clone()], MeasurementKind::Povm).is_ok());
        assert!(Measurement::new(alloc::vec![half.clone(), half], MeasurementKind::Projective).is_err());
    }
}
