//! Per-qubit amplitude damping, exact (Kraus) and unraveled (jump/no-jump).
//!
//! Each qubit decays toward `|0⟩` with rate `Γ` per elementary gate. The
//! per-gate damping probability is `p = 1 − e^{−Γ}` in both engines, so the
//! trajectory average equals the exact channel in expectation rather than to
//! `O(Γ²)`. All-qubits-down states are exact fixed points.

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::state::{DensityMatrix, StateVector};

/// Amplitude-damping strength shared by all qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    gamma: f64,
    p_jump: f64,
}

impl NoiseModel {
    /// Per-gate, per-qubit rate `Γ ≥ 0`; derives `p = 1 − e^{−Γ}`.
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidParams(format!("Γ must be finite and ≥ 0, got {gamma}")));
        }
        Ok(Self { gamma, p_jump: -(-gamma).exp_m1() })
    }

    pub fn off() -> Self {
        Self { gamma: 0.0, p_jump: 0.0 }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Per-gate damping probability `p = 1 − e^{−Γ}`.
    pub fn p_jump(&self) -> f64 {
        self.p_jump
    }

    pub fn is_off(&self) -> bool {
        self.p_jump == 0.0
    }
}

/// Uniform double in `[0, 1)` from the top 53 bits of one `u64` draw.
#[inline]
pub(crate) fn uniform_f64<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn check_qubit(qubit: usize, qubits: usize) -> Result<()> {
    if qubit >= qubits {
        return Err(Error::QubitOutOfRange { qubit, qubits });
    }
    Ok(())
}

/// Exact single-qubit damping channel on `ρ`: Kraus pair
/// `K₀ = diag(1, √(1−p))`, `K₁ = √p |0⟩⟨1|` on the given qubit.
pub fn apply_channel_exact(rho: &mut DensityMatrix, qubit: usize, model: &NoiseModel) -> Result<()> {
    check_qubit(qubit, rho.qubits())?;
    if model.is_off() {
        return Ok(());
    }
    let p = model.p_jump();
    let keep = (1.0 - p).sqrt();
    let dim = rho.dim();
    let mask = 1usize << qubit;
    let data = rho.as_mut_slice();
    let mut rbase = 0;
    while rbase < dim {
        for r0 in rbase..rbase + mask {
            let r1 = r0 + mask;
            let mut cbase = 0;
            while cbase < dim {
                for c0 in cbase..cbase + mask {
                    let c1 = c0 + mask;
                    let up = data[r1 * dim + c1];
                    data[r0 * dim + c0] += up * p;
                    data[r1 * dim + c1] = up * (1.0 - p);
                    data[r0 * dim + c1] *= keep;
                    data[r1 * dim + c0] *= keep;
                }
                cbase += 2 * mask;
            }
        }
        rbase += 2 * mask;
    }
    Ok(())
}

/// One jump/no-jump step on a pure state for one qubit.
///
/// With probability `p·P_up` (one uniform draw) the lowering operator is
/// applied and the state renormalized; otherwise the excited amplitudes are
/// scaled by `√(1−p)` and the state renormalized. The norm is 1 afterwards
/// either way.
pub fn stochastic_step<R: RngCore>(
    state: &mut StateVector,
    qubit: usize,
    model: &NoiseModel,
    rng: &mut R,
) -> Result<()> {
    check_qubit(qubit, state.qubits())?;
    if model.is_off() {
        return Ok(());
    }
    let p = model.p_jump();
    let mask = 1usize << qubit;
    let amps = state.as_mut_slice();
    let p_up: f64 =
        amps.iter().enumerate().filter(|(i, _)| i & mask != 0).map(|(_, a)| a.norm_sqr()).sum();
    let u = uniform_f64(rng);
    if u < p * p_up {
        // Jump: lower the qubit and renormalize (norm² of a†ψ is P_up).
        let inv = 1.0 / p_up.sqrt();
        let dim = amps.len();
        let mut base = 0;
        while base < dim {
            for i0 in base..base + mask {
                amps[i0] = amps[i0 + mask] * inv;
                amps[i0 + mask] = num_complex::Complex64::ZERO;
            }
            base += 2 * mask;
        }
    } else {
        // No-jump drift: damp excited amplitudes, renormalize.
        let keep = (1.0 - p).sqrt();
        let inv = 1.0 / (1.0 - p * p_up).sqrt();
        for (i, a) in amps.iter_mut().enumerate() {
            if i & mask != 0 {
                *a *= keep * inv;
            } else {
                *a *= inv;
            }
        }
    }
    Ok(())
}

/// Stochastic damping on every qubit in ascending order (one per-gate step).
pub fn apply_noise_after_gate_state<R: RngCore>(
    state: &mut StateVector,
    model: &NoiseModel,
    rng: &mut R,
) -> Result<()> {
    if model.is_off() {
        return Ok(());
    }
    for qubit in 0..state.qubits() {
        stochastic_step(state, qubit, model, rng)?;
    }
    Ok(())
}

/// Exact damping channel on every qubit in ascending order.
pub fn apply_noise_after_gate_density(rho: &mut DensityMatrix, model: &NoiseModel) -> Result<()> {
    if model.is_off() {
        return Ok(());
    }
    for qubit in 0..rho.qubits() {
        apply_channel_exact(rho, qubit, model)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn qubit_state(a0: Complex64, a1: Complex64) -> StateVector {
        let mut s = StateVector::from_amplitudes(vec![a0, a1]).unwrap();
        s.normalize();
        s
    }

    /// Random density matrix via a normalized positive combination of
    /// random projectors.
    fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let mut rho = DensityMatrix::zeros(dim);
        for w in [0.5, 0.3, 0.2] {
            let amps: Vec<Complex64> = (0..dim)
                .map(|_| c(uniform_f64(rng) - 0.5, uniform_f64(rng) - 0.5))
                .collect();
            let mut s = StateVector::from_amplitudes(amps).unwrap();
            s.normalize();
            rho.add_scaled_projector(&s, w);
        }
        rho
    }

    #[test]
    fn probability_convention() {
        let m = NoiseModel::new(0.0).unwrap();
        assert_eq!(m.p_jump(), 0.0);
        let m = NoiseModel::new(0.05).unwrap();
        assert!((m.p_jump() - (1.0 - (-0.05f64).exp())).abs() < 1e-16);
        assert!(m.p_jump() > 0.0 && m.p_jump() < 1.0);
        assert!(NoiseModel::new(-0.1).is_err());
        assert!(NoiseModel::new(f64::NAN).is_err());
    }

    #[test]
    fn excited_qubit_decays_exactly() {
        // ρ = |1⟩⟨1| → diag(p, 1−p), the closed-form channel output.
        let gamma = 0.3;
        let model = NoiseModel::new(gamma).unwrap();
        let mut rho = DensityMatrix::from_pure(&qubit_state(c(0.0, 0.0), c(1.0, 0.0)));
        apply_channel_exact(&mut rho, 0, &model).unwrap();
        let p = 1.0 - (-gamma.to_owned()).exp();
        assert!((rho.entry(0, 0).re - p).abs() < 1e-15);
        assert!((rho.entry(1, 1).re - (1.0 - p)).abs() < 1e-15);
        assert!(rho.entry(0, 1).norm() < 1e-15);
    }

    #[test]
    fn zero_rate_channel_is_identity() {
        let model = NoiseModel::off();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut rho = random_density(4, &mut rng);
        let before = rho.clone();
        apply_channel_exact(&mut rho, 1, &model).unwrap();
        assert_eq!(rho, before);

        let mut s = qubit_state(c(0.6, 0.1), c(0.7, -0.2));
        let before = s.clone();
        stochastic_step(&mut s, 0, &model, &mut rng).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn coherences_scale_by_sqrt_keep() {
        let model = NoiseModel::new(0.2).unwrap();
        let mut rho =
            DensityMatrix::from_pure(&qubit_state(c(1.0, 0.0), c(1.0, 0.0)));
        let off = rho.entry(0, 1);
        apply_channel_exact(&mut rho, 0, &model).unwrap();
        let keep = (1.0 - model.p_jump()).sqrt();
        assert!((rho.entry(0, 1) - off * keep).norm() < 1e-15);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ground_qubit_is_untouched_by_stochastic_step() {
        let model = NoiseModel::new(0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // Qubit 1 in |0⟩; superposition on qubit 0.
        let mut s = StateVector::from_amplitudes(vec![
            c(0.6, 0.0),
            c(0.0, 0.8),
            Complex64::ZERO,
            Complex64::ZERO,
        ])
        .unwrap();
        let before = s.clone();
        for _ in 0..32 {
            stochastic_step(&mut s, 1, &model, &mut rng).unwrap();
        }
        assert_eq!(s, before);
    }

    #[test]
    fn all_down_state_is_exact_fixed_point() {
        let model = NoiseModel::new(0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = StateVector::momentum_basis(8, 0).unwrap();
        let before = s.clone();
        for _ in 0..64 {
            apply_noise_after_gate_state(&mut s, &model, &mut rng).unwrap();
        }
        assert_eq!(s, before);

        let mut rho = DensityMatrix::from_pure(&before);
        let rho_before = rho.clone();
        for _ in 0..64 {
            apply_noise_after_gate_density(&mut rho, &model).unwrap();
        }
        assert_eq!(rho, rho_before);
    }

    #[test]
    fn trajectory_mean_matches_exact_channel_single_qubit() {
        // |1⟩ damped once; Monte Carlo mean of the projector vs the exact
        // channel, within three standard errors of the jump estimator.
        let gamma = 0.15;
        let model = NoiseModel::new(gamma).unwrap();
        let p = model.p_jump();
        let mut rng = ChaCha8Rng::seed_from_u64(12345);
        let trials = 100_000usize;
        let mut mean = DensityMatrix::zeros(2);
        for _ in 0..trials {
            let mut s = qubit_state(c(0.0, 0.0), c(1.0, 0.0));
            stochastic_step(&mut s, 0, &model, &mut rng).unwrap();
            mean.add_scaled_projector(&s, 1.0 / trials as f64);
        }
        let mut exact = DensityMatrix::from_pure(&qubit_state(c(0.0, 0.0), c(1.0, 0.0)));
        apply_channel_exact(&mut exact, 0, &model).unwrap();
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((mean.entry(0, 0).re - exact.entry(0, 0).re).abs() <= 3.0 * se);
        assert!((mean.entry(1, 1).re - exact.entry(1, 1).re).abs() <= 3.0 * se);
    }

    #[test]
    fn trajectory_mean_error_scales_as_inverse_sqrt_m() {
        // Fixed single-qubit superposition damped over 10 steps; the max
        // element error of the reconstructed density should shrink like
        // M^{−1/2} within a factor of 3 between decades.
        let model = NoiseModel::new(0.1).unwrap();
        let psi0 = qubit_state(c(0.6, 0.0), c(0.0, 0.8));
        let mut exact = DensityMatrix::from_pure(&psi0);
        for _ in 0..10 {
            apply_channel_exact(&mut exact, 0, &model).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(777);
        // A single max-element error is noisy; average it over replicas.
        let mut err_at = |m: usize| {
            let reps = 20;
            let mut acc = 0.0;
            for _ in 0..reps {
                let mut mean = DensityMatrix::zeros(2);
                for _ in 0..m {
                    let mut s = psi0.clone();
                    for _ in 0..10 {
                        stochastic_step(&mut s, 0, &model, &mut rng).unwrap();
                    }
                    mean.add_scaled_projector(&s, 1.0 / m as f64);
                }
                acc += mean
                    .as_slice()
                    .iter()
                    .zip(exact.as_slice())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
            }
            acc / reps as f64
        };
        let e2 = err_at(100);
        let e3 = err_at(1000);
        let e4 = err_at(10_000);
        let root10 = 10f64.sqrt();
        for (coarse, fine, expect) in [(e2, e3, root10), (e3, e4, root10), (e2, e4, 10.0)] {
            let ratio = coarse / fine;
            assert!(
                ratio > expect / 3.0 && ratio < expect * 3.0,
                "error ratio {ratio} outside M^-1/2 band (expected ~{expect})"
            );
        }
    }

    #[test]
    fn per_gate_noise_composes_and_preserves_trace() {
        let model = NoiseModel::new(0.07).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut rho = random_density(4, &mut rng);
        let tr = rho.trace().re;
        apply_noise_after_gate_density(&mut rho, &model).unwrap();
        assert!((rho.trace().re - tr).abs() < 1e-12);
        assert!(rho.hermiticity_error() < 1e-12);

        // Channels on distinct qubits commute.
        let mut a = random_density(4, &mut rng);
        let mut b = a.clone();
        apply_channel_exact(&mut a, 0, &model).unwrap();
        apply_channel_exact(&mut a, 1, &model).unwrap();
        apply_channel_exact(&mut b, 1, &model).unwrap();
        apply_channel_exact(&mut b, 0, &model).unwrap();
        let worst = a
            .as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12);
    }

    #[test]
    fn two_qubit_trajectory_mean_close_to_exact_after_ten_gates() {
        // Pure noise (identity gates): MC average over 10⁴ trajectories vs
        // the exact channel composition, element-wise L1 distance ≤ 0.03.
        let model = NoiseModel::new(0.05).unwrap();
        let amps = vec![c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)];
        let psi0 = StateVector::from_amplitudes(amps).unwrap();
        let mut exact = DensityMatrix::from_pure(&psi0);
        for _ in 0..10 {
            apply_noise_after_gate_density(&mut exact, &model).unwrap();
        }
        let trials = 10_000usize;
        let mut mean = DensityMatrix::zeros(4);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..trials {
            let mut s = psi0.clone();
            for _ in 0..10 {
                apply_noise_after_gate_state(&mut s, &model, &mut rng).unwrap();
            }
            mean.add_scaled_projector(&s, 1.0 / trials as f64);
        }
        let l1: f64 = mean
            .as_slice()
            .iter()
            .zip(exact.as_slice())
            .map(|(a, b)| (a - b).norm())
            .sum();
        assert!(l1 <= 0.03, "element-wise L1 distance {l1}");
    }

    #[test]
    fn channel_preserves_positivity() {
        let model = NoiseModel::new(0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let mut rho = random_density(16, &mut rng);
            for _ in 0..4 {
                apply_noise_after_gate_density(&mut rho, &model).unwrap();
            }
            assert!(rho.min_eigenvalue() >= -1e-8);
            assert!((rho.trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_qubit_rejected() {
        let model = NoiseModel::new(0.1).unwrap();
        let mut rho = DensityMatrix::maximally_mixed(4);
        assert!(apply_channel_exact(&mut rho, 2, &model).is_err());
        let mut s = StateVector::momentum_basis(4, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert!(stochastic_step(&mut s, 2, &model, &mut rng).is_err());
    }

    proptest! {
        // Stochastic steps always return unit-norm states.
        #[test]
        fn stochastic_step_preserves_norm(
            seed in 0u64..1000,
            gamma in 0.0f64..0.5,
            parts in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
        ) {
            let amps: Vec<Complex64> = parts.iter().map(|&(re, im)| c(re, im)).collect();
            prop_assume!(amps.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-3);
            let mut s = StateVector::from_amplitudes(amps).unwrap();
            s.normalize();
            let model = NoiseModel::new(gamma).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..20 {
                apply_noise_after_gate_state(&mut s, &model, &mut rng).unwrap();
                prop_assert!((s.norm() - 1.0).abs() < 1e-10);
            }
        }
    }
}
