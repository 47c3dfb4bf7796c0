//! Map parameters and the momentum index convention.
//!
//! States are stored in FFT-natural momentum order: storage index
//! `j ∈ {0, …, N−1}` carries physical momentum `n = j` for `j < N/2` and
//! `n = j − N` for `j ≥ N/2`. Qubit `m` is bit `m` of the storage index
//! (bit 0 least significant). Distributions are displayed in symmetric
//! order `n = −N/2, …, N/2−1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Relative tolerance for the `K = k·T` consistency invariant.
pub const CHAOS_CONSISTENCY_TOL: f64 = 1e-12;

/// Parameters of one sawtooth-map configuration on `N = 2^n_q` levels.
///
/// `kick` is the kick strength `k`, `planck` the effective Planck constant
/// `T`, and `chaos` the classical chaos parameter `K = k·T`. `cells` is the
/// torus length in classical cells (`L`); the resonant "one classical cell"
/// configuration uses `T = 2π/N` with `L = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapParams {
    qubits: usize,
    dim: usize,
    kick: f64,
    planck: f64,
    chaos: f64,
    cells: u32,
}

impl MapParams {
    /// One classical cell on the torus: `T = 2π/N`, `k = K·N/(2π)`, `L = 1`.
    pub fn one_cell(qubits: usize, chaos: f64) -> Result<Self> {
        let dim = check_qubits(qubits)?;
        if !chaos.is_finite() {
            return Err(Error::InvalidParams(format!("K must be finite, got {chaos}")));
        }
        let planck = 2.0 * PI / dim as f64;
        Self::build(qubits, dim, chaos / planck, planck, chaos, 1)
    }

    /// Explicit kick strength; `K` fixes the Planck constant via `T = K/k`.
    pub fn with_kick(qubits: usize, kick: f64, chaos: f64) -> Result<Self> {
        let dim = check_qubits(qubits)?;
        if !kick.is_finite() || kick == 0.0 {
            return Err(Error::InvalidParams(format!(
                "k must be finite and nonzero, got {kick}"
            )));
        }
        if !chaos.is_finite() {
            return Err(Error::InvalidParams(format!("K must be finite, got {chaos}")));
        }
        let planck = chaos / kick;
        Self::build(qubits, dim, kick, planck, chaos, 1)
    }

    fn build(
        qubits: usize,
        dim: usize,
        kick: f64,
        planck: f64,
        chaos: f64,
        cells: u32,
    ) -> Result<Self> {
        if !(planck.is_finite() && planck > 0.0) {
            return Err(Error::InvalidParams(format!("T must be positive, got {planck}")));
        }
        let p = Self { qubits, dim, kick, planck, chaos, cells };
        debug_assert!(
            (p.chaos - p.kick * p.planck).abs() <= CHAOS_CONSISTENCY_TOL * p.chaos.abs().max(1.0)
        );
        Ok(p)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    /// Hilbert-space dimension `N = 2^n_q`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Kick strength `k`.
    pub fn kick(&self) -> f64 {
        self.kick
    }

    /// Effective Planck constant `T`.
    pub fn planck(&self) -> f64 {
        self.planck
    }

    /// Chaos parameter `K = k·T`.
    pub fn chaos(&self) -> f64 {
        self.chaos
    }

    /// Torus length in classical cells (`L`).
    pub fn cells(&self) -> u32 {
        self.cells
    }

    /// Gates per map iteration, `3 n_q² + n_q`.
    pub fn gates_per_iteration(&self) -> usize {
        3 * self.qubits * self.qubits + self.qubits
    }

    /// Physical momentum of a storage index under this map's convention.
    pub fn momentum_of_index(&self, index: usize) -> i64 {
        momentum_of_index(self.dim, index)
    }

    /// Storage index of a physical momentum, if in range.
    pub fn index_of_momentum(&self, momentum: i64) -> Result<usize> {
        index_of_momentum(self.dim, momentum)
    }
}

fn check_qubits(qubits: usize) -> Result<usize> {
    if qubits < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 qubits, got {qubits}")));
    }
    if qubits > 30 {
        return Err(Error::InvalidParams(format!("{qubits} qubits exceeds supported size")));
    }
    Ok(1usize << qubits)
}

/// FFT-natural storage index → physical momentum: `n = j` below `N/2`, else `j − N`.
pub fn momentum_of_index(dim: usize, index: usize) -> i64 {
    debug_assert!(index < dim);
    if index < dim / 2 {
        index as i64
    } else {
        index as i64 - dim as i64
    }
}

/// Physical momentum `n ∈ [−N/2, N/2)` → storage index.
pub fn index_of_momentum(dim: usize, momentum: i64) -> Result<usize> {
    let half = (dim / 2) as i64;
    if momentum < -half || momentum >= half {
        return Err(Error::MomentumOutOfRange { momentum, half });
    }
    Ok(if momentum >= 0 { momentum as usize } else { (momentum + dim as i64) as usize })
}

/// Position of a storage index on the symmetric display axis `−N/2 … N/2−1`.
pub fn display_position(dim: usize, index: usize) -> usize {
    (index + dim / 2) % dim
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_cell_matches_direct_arithmetic() {
        // T = 2π/N and k = K/T, evaluated independently.
        let p = MapParams::one_cell(6, 2f64.sqrt()).unwrap();
        assert_eq!(p.dim(), 64);
        let t = 2.0 * PI / 64.0;
        assert!((p.planck() - t).abs() < 1e-15);
        let k = 2f64.sqrt() * 64.0 / (2.0 * PI);
        assert!((p.kick() - k).abs() / k.abs() < 1e-14);
        assert!((p.kick() - 14.40).abs() < 0.01);
    }

    #[test]
    fn one_cell_negative_chaos() {
        let p = MapParams::one_cell(8, -0.5).unwrap();
        let k = 256.0 * (-0.5) / (2.0 * PI);
        assert!((p.kick() - k).abs() < 1e-12);
        assert!(p.kick() < 0.0);
        assert!(p.planck() > 0.0);
    }

    #[test]
    fn explicit_kick_fixes_planck() {
        let p = MapParams::with_kick(6, 3f64.sqrt(), 2f64.sqrt()).unwrap();
        assert!((p.planck() - 2f64.sqrt() / 3f64.sqrt()).abs() < 1e-15);
        let rel = (p.chaos() - p.kick() * p.planck()).abs() / p.chaos().abs();
        assert!(rel < CHAOS_CONSISTENCY_TOL);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(MapParams::one_cell(1, 1.0).is_err());
        assert!(MapParams::one_cell(4, f64::NAN).is_err());
        assert!(MapParams::with_kick(4, 0.0, 1.0).is_err());
        assert!(MapParams::with_kick(4, -1.0, 1.0).is_err()); // T = K/k < 0
        assert!(MapParams::with_kick(4, f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn gate_count_formula() {
        assert_eq!(MapParams::one_cell(6, 1.0).unwrap().gates_per_iteration(), 114);
        assert_eq!(MapParams::one_cell(8, 1.0).unwrap().gates_per_iteration(), 200);
    }

    #[test]
    fn momentum_map_spans_symmetric_range() {
        let dim = 16;
        let momenta: Vec<i64> = (0..dim).map(|j| momentum_of_index(dim, j)).collect();
        let mut sorted = momenta.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (-8..8).collect::<Vec<i64>>());
    }

    proptest! {
        #[test]
        fn momentum_map_round_trips(qubits in 2usize..=10, j in 0usize..1024) {
            let dim = 1usize << qubits;
            let j = j % dim;
            let n = momentum_of_index(dim, j);
            prop_assert_eq!(index_of_momentum(dim, n).unwrap(), j);
        }
    }
}
