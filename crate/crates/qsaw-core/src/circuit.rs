//! Elementary-gate decomposition of one sawtooth-map iteration and the
//! split-operator reference propagator.
//!
//! One iteration applies `e^{−iT n̂²/2} e^{−ik V(θ)}` with
//! `V(θ) = −(θ−π)²/2` on the `2π`-periodic angle grid `θ_j = 2πj/N`. The
//! circuit realizes it in exactly `3 n_q² + n_q` gates:
//!
//! 1. forward Fourier ladder, `n_q(n_q+1)/2` gates (momentum → angle, output
//!    bit-reversed; the reversal is absorbed into the kick-phase weights
//!    instead of swap gates),
//! 2. kick block, `n_q²` diagonal phase gates encoding `k(θ−π)²/2` through
//!    the pairwise bit expansion of `(j − N/2)²`,
//! 3. inverse Fourier ladder, `n_q(n_q+1)/2` gates,
//! 4. rotation block, `n_q²` diagonal phase gates encoding `−T n²/2` with
//!    two's-complement momentum weights.
//!
//! Quadratic forms expand as `Σ_{a≠b} c_ab·bit_a·bit_b + Σ_a c_a·bit_a + c`;
//! ordered bit pairs become controlled-phase gates, linear terms one-qubit
//! phase gates, and the constant a tracked global phase.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::params::{momentum_of_index, MapParams};
use crate::state::{DensityMatrix, StateVector};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// An elementary gate: Hadamard, diagonal phases, or swap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Hadamard { qubit: usize },
    Phase { qubit: usize, angle: f64 },
    ControlledPhase { control: usize, target: usize, angle: f64 },
    Swap { a: usize, b: usize },
}

impl Gate {
    /// The inverse gate (Hadamard and swap are involutions).
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Hadamard { qubit } => Gate::Hadamard { qubit },
            Gate::Phase { qubit, angle } => Gate::Phase { qubit, angle: -angle },
            Gate::ControlledPhase { control, target, angle } => {
                Gate::ControlledPhase { control, target, angle: -angle }
            }
            Gate::Swap { a, b } => Gate::Swap { a, b },
        }
    }

    fn check(&self, qubits: usize) -> Result<()> {
        let bad = |q: usize| Error::QubitOutOfRange { qubit: q, qubits };
        match *self {
            Gate::Hadamard { qubit } | Gate::Phase { qubit, .. } => {
                if qubit >= qubits {
                    return Err(bad(qubit));
                }
            }
            Gate::ControlledPhase { control, target, .. } => {
                if control >= qubits {
                    return Err(bad(control));
                }
                if target >= qubits {
                    return Err(bad(target));
                }
                if control == target {
                    return Err(Error::InvalidParams(
                        "controlled phase needs two distinct qubits".into(),
                    ));
                }
            }
            Gate::Swap { a, b } => {
                if a >= qubits {
                    return Err(bad(a));
                }
                if b >= qubits {
                    return Err(bad(b));
                }
                if a == b {
                    return Err(Error::InvalidParams("swap needs two distinct qubits".into()));
                }
            }
        }
        Ok(())
    }
}

/// Ordered gate list realizing one map iteration, plus the global phase
/// accumulated from the constant terms of the diagonal blocks.
#[derive(Debug, Clone)]
pub struct GateSequence {
    qubits: usize,
    gates: Vec<Gate>,
    global_phase: f64,
}

impl GateSequence {
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Global phase `φ` such that the gate product times `e^{iφ}` equals the
    /// split-operator map exactly.
    pub fn global_phase(&self) -> f64 {
        self.global_phase
    }

    /// Applies all gates followed by the global phase.
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        for gate in &self.gates {
            apply_gate(state, gate)?;
        }
        state.apply_global_phase(self.global_phase);
        Ok(())
    }

    /// Conjugates `ρ` by the full sequence (the global phase cancels).
    pub fn apply_to_density(&self, rho: &mut DensityMatrix) -> Result<()> {
        for gate in &self.gates {
            apply_gate_to_density(rho, gate)?;
        }
        Ok(())
    }

    /// Randomly permutes the kick-block gates (diagonal, so the unitary is
    /// unchanged; only the interleaving with per-gate noise differs).
    #[doc(hidden)]
    pub fn shuffle_kick_block(&mut self, seed: u64) {
        use rand_core::{RngCore, SeedableRng};
        let n = self.qubits;
        let start = n * (n + 1) / 2;
        let block = &mut self.gates[start..start + n * n];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for i in (1..block.len()).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            block.swap(i, j);
        }
    }
}

/// Builds the `3 n_q² + n_q` gate sequence for one map iteration.
pub fn build_map_sequence(p: &MapParams) -> GateSequence {
    let n = p.qubits();
    let dim = p.dim() as f64;
    let mut gates = Vec::with_capacity(p.gates_per_iteration());

    let ladder = fourier_ladder(n);
    gates.extend_from_slice(&ladder);

    // Kick block. After the ladder the angle index is bit-reversed, so the
    // qubit carrying angle-bit a is n−1−a: weight u_a = 2^(n−1−a).
    // Phase: (k/2)(2π/N)² (l − N/2)² with l = Σ u_a·bit_a.
    let c_kick = 0.5 * p.kick() * (2.0 * PI / dim).powi(2);
    let u = |a: usize| (1u64 << (n - 1 - a)) as f64;
    let mut global_phase = push_quadratic_block(&mut gates, n, c_kick, u, -dim / 2.0);

    gates.extend(ladder.iter().rev().map(Gate::inverse));

    // Rotation block: −(T/2) n² with two's-complement momentum weights.
    let w = |a: usize| {
        if a == n - 1 {
            -(dim / 2.0)
        } else {
            (1u64 << a) as f64
        }
    };
    global_phase += push_quadratic_block(&mut gates, n, -0.5 * p.planck(), w, 0.0);

    debug_assert_eq!(gates.len(), p.gates_per_iteration());
    GateSequence { qubits: n, gates, global_phase }
}

/// Emits `n²` diagonal gates realizing `coeff·(Σ_a w(a)·bit_a + shift)²`:
/// one controlled phase per ordered bit pair and one phase gate per bit.
/// Returns the constant term `coeff·shift²` as a global phase contribution.
fn push_quadratic_block(
    gates: &mut Vec<Gate>,
    qubits: usize,
    coeff: f64,
    w: impl Fn(usize) -> f64,
    shift: f64,
) -> f64 {
    for a in 0..qubits {
        for b in 0..qubits {
            if a != b {
                gates.push(Gate::ControlledPhase {
                    control: a,
                    target: b,
                    angle: coeff * w(a) * w(b),
                });
            }
        }
    }
    for a in 0..qubits {
        gates.push(Gate::Phase { qubit: a, angle: coeff * (w(a) * w(a) + 2.0 * shift * w(a)) });
    }
    coeff * shift * shift
}

/// Hadamard + controlled-phase ladder mapping momentum to the angle grid
/// with bit-reversed output order, `n_q(n_q+1)/2` gates.
fn fourier_ladder(qubits: usize) -> Vec<Gate> {
    let mut gates = Vec::with_capacity(qubits * (qubits + 1) / 2);
    for q in (0..qubits).rev() {
        gates.push(Gate::Hadamard { qubit: q });
        for m in (0..q).rev() {
            gates.push(Gate::ControlledPhase {
                control: m,
                target: q,
                angle: PI / (1u64 << (q - m)) as f64,
            });
        }
    }
    gates
}

/// Applies one gate to a state vector in place. Norm-preserving.
pub fn apply_gate(state: &mut StateVector, gate: &Gate) -> Result<()> {
    let qubits = state.qubits();
    gate.check(qubits)?;
    let dim = state.dim();
    let amps = state.as_mut_slice();
    match *gate {
        Gate::Hadamard { qubit } => {
            let mask = 1usize << qubit;
            let mut base = 0;
            while base < dim {
                for i in base..base + mask {
                    let x = amps[i];
                    let y = amps[i + mask];
                    amps[i] = (x + y) * FRAC_1_SQRT_2;
                    amps[i + mask] = (x - y) * FRAC_1_SQRT_2;
                }
                base += 2 * mask;
            }
        }
        Gate::Phase { qubit, angle } => {
            let mask = 1usize << qubit;
            let f = Complex64::from_polar(1.0, angle);
            for (i, a) in amps.iter_mut().enumerate() {
                if i & mask != 0 {
                    *a *= f;
                }
            }
        }
        Gate::ControlledPhase { control, target, angle } => {
            let mask = (1usize << control) | (1usize << target);
            let f = Complex64::from_polar(1.0, angle);
            for (i, a) in amps.iter_mut().enumerate() {
                if i & mask == mask {
                    *a *= f;
                }
            }
        }
        Gate::Swap { a, b } => {
            let ma = 1usize << a;
            let mb = 1usize << b;
            for i in 0..dim {
                if i & ma != 0 && i & mb == 0 {
                    amps.swap(i, (i & !ma) | mb);
                }
            }
        }
    }
    Ok(())
}

/// Conjugates `ρ → U ρ U†` by one gate, as a structured row/column update.
pub fn apply_gate_to_density(rho: &mut DensityMatrix, gate: &Gate) -> Result<()> {
    let qubits = rho.qubits();
    gate.check(qubits)?;
    let dim = rho.dim();
    match *gate {
        Gate::Hadamard { qubit } => {
            let mask = 1usize << qubit;
            let data = rho.as_mut_slice();
            // Rows: R = H ρ.
            let mut base = 0;
            while base < dim {
                for r in base..base + mask {
                    let (r0, r1) = (r * dim, (r + mask) * dim);
                    for c in 0..dim {
                        let x = data[r0 + c];
                        let y = data[r1 + c];
                        data[r0 + c] = (x + y) * FRAC_1_SQRT_2;
                        data[r1 + c] = (x - y) * FRAC_1_SQRT_2;
                    }
                }
                base += 2 * mask;
            }
            // Columns: R H† (H is real symmetric).
            for r in 0..dim {
                let row = r * dim;
                let mut base = 0;
                while base < dim {
                    for c in base..base + mask {
                        let x = data[row + c];
                        let y = data[row + c + mask];
                        data[row + c] = (x + y) * FRAC_1_SQRT_2;
                        data[row + c + mask] = (x - y) * FRAC_1_SQRT_2;
                    }
                    base += 2 * mask;
                }
            }
        }
        Gate::Phase { .. } | Gate::ControlledPhase { .. } => {
            let (mask, angle) = match *gate {
                Gate::Phase { qubit, angle } => (1usize << qubit, angle),
                Gate::ControlledPhase { control, target, angle } => {
                    ((1usize << control) | (1usize << target), angle)
                }
                _ => unreachable!(),
            };
            let f = Complex64::from_polar(1.0, angle);
            let fc = f.conj();
            let data = rho.as_mut_slice();
            for r in 0..dim {
                let row_set = r & mask == mask;
                let row = r * dim;
                for c in 0..dim {
                    let col_set = c & mask == mask;
                    match (row_set, col_set) {
                        (true, false) => data[row + c] *= f,
                        (false, true) => data[row + c] *= fc,
                        _ => {}
                    }
                }
            }
        }
        Gate::Swap { a, b } => {
            let ma = 1usize << a;
            let mb = 1usize << b;
            let perm = |i: usize| {
                let (ba, bb) = (i & ma != 0, i & mb != 0);
                if ba != bb {
                    (i & !(ma | mb)) | if ba { mb } else { ma }
                } else {
                    i
                }
            };
            let data = rho.as_mut_slice();
            for r in 0..dim {
                if perm(r) > r {
                    for c in 0..dim {
                        data.swap(r * dim + c, perm(r) * dim + c);
                    }
                }
            }
            for c in 0..dim {
                if perm(c) > c {
                    for r in 0..dim {
                        data.swap(r * dim + c, r * dim + perm(c));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Split-operator propagator: FFT to the angle grid, kick phase, inverse
/// FFT, rotation phase. The noise-free reference for the gate sequence.
pub struct MapOracle {
    dim: usize,
    to_angle: Arc<dyn Fft<f64>>,
    to_momentum: Arc<dyn Fft<f64>>,
    kick_phase: Vec<Complex64>,
    rotation_phase: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl MapOracle {
    pub fn new(p: &MapParams) -> Self {
        let dim = p.dim();
        let mut planner = FftPlanner::new();
        // Momentum → angle is the unnormalized e^{+2πi jl/N} transform.
        let to_angle = planner.plan_fft_inverse(dim);
        let to_momentum = planner.plan_fft_forward(dim);
        let kick_phase = (0..dim)
            .map(|l| {
                let theta = 2.0 * PI * l as f64 / dim as f64;
                // e^{−ik V(θ)} with V(θ) = −(θ−π)²/2.
                Complex64::from_polar(1.0, 0.5 * p.kick() * (theta - PI).powi(2))
            })
            .collect();
        let rotation_phase = (0..dim)
            .map(|j| {
                let n = momentum_of_index(dim, j) as f64;
                Complex64::from_polar(1.0, -0.5 * p.planck() * n * n)
            })
            .collect();
        let scratch =
            vec![Complex64::ZERO; to_angle.get_inplace_scratch_len().max(to_momentum.get_inplace_scratch_len())];
        Self { dim, to_angle, to_momentum, kick_phase, rotation_phase, scratch }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// One noise-free map iteration in place.
    pub fn apply(&mut self, state: &mut StateVector) -> Result<()> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch { left: state.dim(), right: self.dim });
        }
        let inv_dim = 1.0 / self.dim as f64;
        let amps = state.as_mut_slice();
        self.to_angle.process_with_scratch(amps, &mut self.scratch);
        for (a, f) in amps.iter_mut().zip(&self.kick_phase) {
            *a *= f;
        }
        self.to_momentum.process_with_scratch(amps, &mut self.scratch);
        for (a, f) in amps.iter_mut().zip(&self.rotation_phase) {
            *a *= f * inv_dim;
        }
        Ok(())
    }
}

/// One noise-free map iteration via the split-operator route.
pub fn apply_map_oracle(state: &mut StateVector, p: &MapParams) -> Result<()> {
    MapOracle::new(p).apply(state)
}
