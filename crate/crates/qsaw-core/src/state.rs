//! State vectors and density matrices in the momentum basis.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{self, MapParams};

/// Norm / trace drift allowed for states emitted by the engines.
pub const STATE_TOL: f64 = 1e-10;

/// A pure state: `N` complex amplitudes indexed by storage momentum index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wraps raw amplitudes; the dimension must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "state dimension must be a power of two ≥ 2, got {dim}"
            )));
        }
        Ok(Self { amps })
    }

    /// The momentum eigenstate `|n⟩` for the given map dimension.
    pub fn momentum_basis(dim: usize, momentum: i64) -> Result<Self> {
        let j = params::index_of_momentum(dim, momentum)?;
        let mut amps = vec![Complex64::ZERO; dim];
        amps[j] = Complex64::ONE;
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Number of qubits carried by this state.
    pub fn qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            for a in &mut self.amps {
                *a *= inv;
            }
        }
    }

    /// `|ψ_j|²` per storage index.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Multiplies every amplitude by `e^{iφ}`.
    pub fn apply_global_phase(&mut self, phase: f64) {
        if phase != 0.0 {
            let f = Complex64::from_polar(1.0, phase);
            for a in &mut self.amps {
                *a *= f;
            }
        }
    }
}

/// `⟨a|b⟩`, conjugating `a`.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// The momentum eigenstate `|n⟩` for the given parameters.
pub fn basis_state(p: &MapParams, momentum: i64) -> Result<StateVector> {
    StateVector::momentum_basis(p.dim(), momentum)
}

/// Dense density matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex64::ZERO; dim * dim] }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(state: &StateVector) -> Self {
        let mut rho = Self::zeros(state.dim());
        rho.add_scaled_projector(state, 1.0);
        rho
    }

    /// `I/N`.
    pub fn maximally_mixed(dim: usize) -> Self {
        let mut rho = Self::zeros(dim);
        let w = Complex64::new(1.0 / dim as f64, 0.0);
        for i in 0..dim {
            rho.data[i * dim + i] = w;
        }
        rho
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn entry_mut(&mut self, row: usize, col: usize) -> &mut Complex64 {
        &mut self.data[row * self.dim + col]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    /// `Tr ρ²`, real for Hermitian input.
    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ_{ij} ρ_ij ρ_ji = Σ_{ij} |ρ_ij|² for Hermitian ρ.
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `max_{ij} |ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self.entry(i, j) - self.entry(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `ρ += w·|ψ⟩⟨ψ|`.
    pub fn add_scaled_projector(&mut self, state: &StateVector, w: f64) {
        debug_assert_eq!(self.dim, state.dim());
        let amps = state.as_slice();
        for i in 0..self.dim {
            let row = i * self.dim;
            let ai = amps[i] * w;
            for j in 0..self.dim {
                self.data[row + j] += ai * amps[j].conj();
            }
        }
    }

    pub fn scale(&mut self, w: f64) {
        for z in &mut self.data {
            *z *= w;
        }
    }

    /// Diagonal `ρ_jj` as real probabilities (storage order).
    pub fn diagonal_probabilities(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.entry(i, i).re).collect()
    }

    /// Checks trace-1 and Hermiticity within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        if self.hermiticity_error() > tol {
            return Err(Error::InvalidState("matrix is not Hermitian".into()));
        }
        Ok(())
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |r, c| self.entry(r, c))
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = self.to_nalgebra();
        let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

/// Trace distance `½ Σ |eig(ρ − σ)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    let mut diff = a.clone();
    for (d, s) in diff.as_mut_slice().iter_mut().zip(b.as_slice()) {
        *d -= s;
    }
    Ok(0.5 * diff.eigenvalues().iter().map(|e| e.abs()).sum::<f64>())
}
