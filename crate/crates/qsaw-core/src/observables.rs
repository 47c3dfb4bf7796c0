//! Observables: momentum distributions, fidelity and its decay rate,
//! inverse participation ratio, and Husimi phase-space distributions.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::engines::{reconstruct_density, RunRecord, TrajectoryEnsemble};
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::params::MapParams;
use crate::state::{inner, DensityMatrix, StateVector};

/// Default iteration window for decay-rate fits.
pub const DEFAULT_FIT_WINDOW: (usize, usize) = (1, 50);
/// Fidelity floor below which points are excluded from decay fits, to stay
/// clear of the `f ~ 1/N` saturation plateau.
pub const FIT_FIDELITY_FLOOR: f64 = 0.05;

/// Either a density matrix or a trajectory ensemble.
#[derive(Clone, Copy)]
pub enum DensitySource<'a> {
    Density(&'a DensityMatrix),
    Ensemble(&'a TrajectoryEnsemble),
}

impl<'a> From<&'a DensityMatrix> for DensitySource<'a> {
    fn from(rho: &'a DensityMatrix) -> Self {
        DensitySource::Density(rho)
    }
}

impl<'a> From<&'a TrajectoryEnsemble> for DensitySource<'a> {
    fn from(e: &'a TrajectoryEnsemble) -> Self {
        DensitySource::Ensemble(e)
    }
}

/// Probability over physical momenta `n = −N/2 … N/2−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumDistribution {
    dim: usize,
    /// Weights in symmetric display order.
    w: Vec<f64>,
}

impl MomentumDistribution {
    /// Re-indexes storage-order probabilities to the symmetric axis.
    pub fn from_storage_probs(probs: &[f64]) -> Self {
        let dim = probs.len();
        let mut w = vec![0.0; dim];
        for (j, &p) in probs.iter().enumerate() {
            w[crate::params::display_position(dim, j)] = p;
        }
        Self { dim, w }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Weights in display order; entry `i` belongs to momentum `i − N/2`.
    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn momentum_at(&self, position: usize) -> i64 {
        position as i64 - (self.dim / 2) as i64
    }

    pub fn value(&self, momentum: i64) -> Result<f64> {
        let half = (self.dim / 2) as i64;
        if momentum < -half || momentum >= half {
            return Err(Error::MomentumOutOfRange { momentum, half });
        }
        Ok(self.w[(momentum + half) as usize])
    }

    pub fn mass(&self) -> f64 {
        self.w.iter().sum()
    }

    /// Inverse participation ratio `ξ = 1/Σ W_n²`.
    pub fn ipr(&self) -> f64 {
        1.0 / self.w.iter().map(|w| w * w).sum::<f64>()
    }

    /// `Σ_n |W_n − V_n|`.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(self.w.iter().zip(&other.w).map(|(a, b)| (a - b).abs()).sum())
    }
}

/// Fidelity per iteration, `f(0)` first.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelitySeries {
    values: Vec<f64>,
}

impl FidelitySeries {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, t: usize) -> Option<f64> {
        self.values.get(t).copied()
    }
}

/// Momentum distribution of a density matrix or ensemble average.
pub fn momentum_distribution<'a>(source: impl Into<DensitySource<'a>>) -> MomentumDistribution {
    match source.into() {
        DensitySource::Density(rho) => {
            MomentumDistribution::from_storage_probs(&rho.diagonal_probabilities())
        }
        DensitySource::Ensemble(e) => {
            let dim = e.members().first().map_or(0, StateVector::dim);
            let mut probs = vec![0.0f64; dim];
            for member in e.members() {
                for (p, a) in probs.iter_mut().zip(member.as_slice()) {
                    *p += a.norm_sqr();
                }
            }
            let inv = 1.0 / e.len().max(1) as f64;
            for p in &mut probs {
                *p *= inv;
            }
            MomentumDistribution::from_storage_probs(&probs)
        }
    }
}

/// `⟨ψ₀|ρ|ψ₀⟩`, or the ensemble average `(1/M) Σ |⟨ψ₀|ψ^α⟩|²`.
pub fn fidelity<'a>(ideal: &StateVector, source: impl Into<DensitySource<'a>>) -> Result<f64> {
    match source.into() {
        DensitySource::Density(rho) => {
            if rho.dim() != ideal.dim() {
                return Err(Error::DimensionMismatch { left: rho.dim(), right: ideal.dim() });
            }
            let dim = rho.dim();
            let amps = ideal.as_slice();
            let mut acc = Complex64::ZERO;
            for i in 0..dim {
                let ai = amps[i].conj();
                let row = i * dim;
                for j in 0..dim {
                    acc += ai * rho.as_slice()[row + j] * amps[j];
                }
            }
            Ok(acc.re)
        }
        DensitySource::Ensemble(e) => {
            let mut acc = 0.0;
            for member in e.members() {
                acc += inner(ideal, member)?.norm_sqr();
            }
            Ok(acc / e.len().max(1) as f64)
        }
    }
}

/// Inverse participation ratio of the (ensemble-averaged) momentum
/// distribution, `ξ = 1/Σ_n ⟨W_n⟩²`.
pub fn ipr<'a>(source: impl Into<DensitySource<'a>>) -> f64 {
    momentum_distribution(source).ipr()
}

/// A fitted exponential decay rate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Least-squares slope of `−ln f(t)` against `t`.
    pub rate: f64,
    pub stderr: f64,
    /// Number of points used by the fit.
    pub points: usize,
}

/// Fits `f(t) ≈ e^{−γt}` on the inclusive iteration window, ignoring
/// points at or below [`FIT_FIDELITY_FLOOR`]. Needs at least five points.
pub fn fit_decay_rate(series: &FidelitySeries, window: (usize, usize)) -> Result<DecayFit> {
    let (w0, w1) = window;
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for t in w0..=w1.min(series.len().saturating_sub(1)) {
        let f = series.values()[t];
        if f > FIT_FIDELITY_FLOOR {
            ts.push(t as f64);
            ys.push(-f.ln());
        }
    }
    let n = ts.len();
    if n < 5 {
        return Err(Error::InsufficientData(format!(
            "{n} usable fidelity points in {w0}..={w1}, need 5"
        )));
    }
    let nf = n as f64;
    let t_mean = ts.iter().sum::<f64>() / nf;
    let y_mean = ys.iter().sum::<f64>() / nf;
    let stt: f64 = ts.iter().map(|t| (t - t_mean).powi(2)).sum();
    let sty: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - t_mean) * (y - y_mean)).sum();
    let rate = sty / stt;
    let intercept = y_mean - rate * t_mean;
    let ss_res: f64 =
        ts.iter().zip(&ys).map(|(t, y)| (y - intercept - rate * t).powi(2)).sum();
    let stderr = if n > 2 { (ss_res / (nf - 2.0) / stt).sqrt() } else { 0.0 };
    Ok(DecayFit { rate, stderr, points: n })
}

/// Reliable-computation scales for a given dissipation rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityTimescale {
    /// Iterations with high fidelity, `t_f = 1/(n_q n_g Γ)`.
    pub iterations: f64,
    /// Total gate budget, `N_g = 1/(n_q Γ)`.
    pub gates: f64,
}

/// `t_f = 1/(n_q n_g Γ)` and `N_g = 1/(n_q Γ)`; infinite at `Γ = 0`.
pub fn fidelity_timescale(params: &MapParams, model: &NoiseModel) -> FidelityTimescale {
    let nq = params.qubits() as f64;
    let ng = params.gates_per_iteration() as f64;
    let gamma = model.gamma();
    if gamma == 0.0 {
        FidelityTimescale { iterations: f64::INFINITY, gates: f64::INFINITY }
    } else {
        FidelityTimescale { iterations: 1.0 / (nq * ng * gamma), gates: 1.0 / (nq * gamma) }
    }
}

/// Time-averaged `ξ/ξ₀` between a noisy and an ideal run over an inclusive
/// iteration window.
pub fn ipr_ratio(noisy: &RunRecord, ideal: &RunRecord, window: (usize, usize)) -> Result<f64> {
    if noisy.params != ideal.params {
        return Err(Error::InvalidParams("runs have different map parameters".into()));
    }
    let (w0, w1) = window;
    if w1 >= noisy.ipr.len() || w1 >= ideal.ipr.len() || w0 > w1 {
        return Err(Error::InvalidParams(format!(
            "window {w0}..{w1} outside recorded iterations"
        )));
    }
    let avg = |xs: &[f64]| xs[w0..=w1].iter().sum::<f64>() / (w1 - w0 + 1) as f64;
    Ok(avg(&noisy.ipr) / avg(&ideal.ipr))
}

/// Packet widths of the quantum cell: `(Δθ, Δn)` with `Δn = √(1/2T)` and
/// `Δθ = 1/(2Δn)`, symmetric in the rescaled coordinates `(θ, Tn)`.
pub fn quantum_cell_widths(planck: f64) -> (f64, f64) {
    let dn = (1.0 / (2.0 * planck)).sqrt();
    (0.5 / dn, dn)
}

/// Nonnegative phase-space grid over `θ ∈ [0, 2π) × n ∈ [−N/2, N/2)`,
/// normalized to unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceDistribution {
    n_theta: usize,
    n_n: usize,
    /// Row-major over θ rows: `values[iθ * n_n + in]`.
    values: Vec<f64>,
    theta_step: f64,
    n_min: f64,
    n_step: f64,
    sigma_theta: f64,
    sigma_n: f64,
    /// Total mass before normalization.
    norm_const: f64,
}

impl PhaseSpaceDistribution {
    pub(crate) fn from_raw(
        n_theta: usize,
        n_n: usize,
        mut values: Vec<f64>,
        n_min: f64,
        n_step: f64,
        sigma_theta: f64,
        sigma_n: f64,
    ) -> Result<Self> {
        debug_assert_eq!(values.len(), n_theta * n_n);
        let total: f64 = values.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidState(format!("phase-space mass {total} not positive")));
        }
        let inv = 1.0 / total;
        for v in &mut values {
            *v *= inv;
        }
        Ok(Self {
            n_theta,
            n_n,
            values,
            theta_step: 2.0 * PI / n_theta as f64,
            n_min,
            n_step,
            sigma_theta,
            sigma_n,
            norm_const: total,
        })
    }

    /// Rebuilds a distribution from values already normalized on disk.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_saved(
        n_theta: usize,
        n_n: usize,
        values: Vec<f64>,
        n_min: f64,
        n_step: f64,
        sigma_theta: f64,
        sigma_n: f64,
        norm_const: f64,
    ) -> Self {
        Self {
            n_theta,
            n_n,
            values,
            theta_step: 2.0 * PI / n_theta as f64,
            n_min,
            n_step,
            sigma_theta,
            sigma_n,
            norm_const,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_theta, self.n_n)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i_theta: usize, i_n: usize) -> f64 {
        self.values[i_theta * self.n_n + i_n]
    }

    pub fn theta_at(&self, i_theta: usize) -> f64 {
        i_theta as f64 * self.theta_step
    }

    pub fn momentum_at(&self, i_n: usize) -> f64 {
        self.n_min + i_n as f64 * self.n_step
    }

    pub fn sigma(&self) -> (f64, f64) {
        (self.sigma_theta, self.sigma_n)
    }

    /// Total mass before normalization.
    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `Σ |a − b|` over cells; grids must match.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum())
    }

    /// Pearson correlation between two grids of identical shape.
    pub fn correlation(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        let n = self.values.len() as f64;
        let ma = self.mass() / n;
        let mb = other.mass() / n;
        let mut cov = 0.0;
        let mut va = 0.0;
        let mut vb = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            cov += (a - ma) * (b - mb);
            va += (a - ma).powi(2);
            vb += (b - mb).powi(2);
        }
        if va == 0.0 || vb == 0.0 {
            return Err(Error::InvalidState("constant grid has no correlation".into()));
        }
        Ok(cov / (va * vb).sqrt())
    }

    /// Mass-weighted mean `|n|`.
    pub fn mean_abs_momentum(&self) -> f64 {
        let mut acc = 0.0;
        for it in 0..self.n_theta {
            for i in 0..self.n_n {
                acc += self.value(it, i) * self.momentum_at(i).abs();
            }
        }
        acc
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.n_theta != other.n_theta || self.n_n != other.n_n {
            return Err(Error::DimensionMismatch {
                left: self.values.len(),
                right: other.values.len(),
            });
        }
        Ok(())
    }
}

/// A state or a trajectory ensemble, for Husimi evaluation.
pub enum HusimiSource<'a> {
    State(&'a StateVector),
    Ensemble(&'a TrajectoryEnsemble),
}

impl<'a> From<&'a StateVector> for HusimiSource<'a> {
    fn from(s: &'a StateVector) -> Self {
        HusimiSource::State(s)
    }
}

impl<'a> From<&'a TrajectoryEnsemble> for HusimiSource<'a> {
    fn from(e: &'a TrajectoryEnsemble) -> Self {
        HusimiSource::Ensemble(e)
    }
}

/// Gaussian packet around momentum `center` (fractional allowed), truncated
/// to a wrapped window of `width` consecutive momenta and periodized over
/// neighbor images, then normalized to unit norm. Returns the amplitudes
/// and the storage index of each window slot.
struct Packet {
    amps: Vec<f64>,
    indices: Vec<usize>,
    offsets: Vec<i64>,
}

fn packet(dim: usize, center: f64, sigma: f64) -> Packet {
    let width = (2 * (8.0 * sigma).ceil() as usize + 1).min(dim);
    let c = center.round() as i64;
    let d_lo = -((width / 2) as i64);
    let mut amps = Vec::with_capacity(width);
    let mut indices = Vec::with_capacity(width);
    let mut offsets = Vec::with_capacity(width);
    let inv4s2 = 1.0 / (4.0 * sigma * sigma);
    let nn = dim as i64;
    for step in 0..width as i64 {
        let d = d_lo + step;
        let n = c + d;
        let j = n.rem_euclid(nn) as usize;
        let x = n as f64 - center;
        let mut g = 0.0;
        for image in -1..=1i64 {
            let y = x + (image * nn) as f64;
            g += (-y * y * inv4s2).exp();
        }
        amps.push(g);
        indices.push(j);
        offsets.push(d);
    }
    let z: f64 = amps.iter().map(|g| g * g).sum::<f64>().sqrt();
    for g in &mut amps {
        *g /= z;
    }
    Packet { amps, indices, offsets }
}

/// Husimi distribution of a density matrix: `h(θ₀, n₀) = ⟨coh|ρ|coh⟩` on an
/// `n_theta × n_n` grid, normalized to unit mass.
pub fn husimi_of_density(
    rho: &DensityMatrix,
    planck: f64,
    n_theta: usize,
    n_n: usize,
) -> Result<PhaseSpaceDistribution> {
    if n_theta < 2 || n_n < 2 {
        return Err(Error::InvalidParams(format!("degenerate Husimi grid {n_theta}x{n_n}")));
    }
    let dim = rho.dim();
    let (sigma_theta, sigma_n) = quantum_cell_widths(planck);
    let n_min = -((dim / 2) as f64);
    let n_step = dim as f64 / n_n as f64;

    let mut values = vec![0.0f64; n_theta * n_n];
    // Rows over n₀ are independent; each writes a disjoint set of cells.
    let rows: Vec<Vec<f64>> = (0..n_n)
        .into_par_iter()
        .map(|i| {
            let center = n_min + i as f64 * n_step;
            let pk = packet(dim, center, sigma_n);
            let w = pk.amps.len();
            // Collapse ρ onto relative-offset diagonals:
            // C_δ = Σ_a g[a+δ] g[a] ρ[j(a+δ), j(a)].
            let mut diag = vec![Complex64::ZERO; w];
            for delta in 0..w {
                let mut acc = Complex64::ZERO;
                for a in 0..w - delta {
                    acc += pk.amps[a + delta]
                        * pk.amps[a]
                        * rho.entry(pk.indices[a + delta], pk.indices[a]);
                }
                diag[delta] = acc;
            }
            (0..n_theta)
                .map(|it| {
                    let theta = 2.0 * PI * it as f64 / n_theta as f64;
                    let rot = Complex64::from_polar(1.0, theta);
                    let mut phase = Complex64::ONE;
                    let mut h = diag[0].re;
                    for d in diag.iter().skip(1) {
                        phase *= rot;
                        h += 2.0 * (d * phase).re;
                    }
                    h.max(0.0)
                })
                .collect()
        })
        .collect();
    for (i, row) in rows.into_iter().enumerate() {
        for (it, h) in row.into_iter().enumerate() {
            values[it * n_n + i] = h;
        }
    }
    PhaseSpaceDistribution::from_raw(n_theta, n_n, values, n_min, n_step, sigma_theta, sigma_n)
}

/// Husimi distribution of a pure state or a trajectory ensemble
/// (trajectory-averaged, which coincides with the reconstructed-density
/// form since `h` is linear in `ρ`).
pub fn husimi<'a>(
    params: &MapParams,
    source: impl Into<HusimiSource<'a>>,
    n_theta: usize,
    n_n: usize,
) -> Result<PhaseSpaceDistribution> {
    match source.into() {
        HusimiSource::State(psi) => husimi_of_state(psi, params.planck(), n_theta, n_n),
        HusimiSource::Ensemble(e) => {
            let rho = reconstruct_density(e)?;
            husimi_of_density(&rho, params.planck(), n_theta, n_n)
        }
    }
}

fn husimi_of_state(
    psi: &StateVector,
    planck: f64,
    n_theta: usize,
    n_n: usize,
) -> Result<PhaseSpaceDistribution> {
    if n_theta < 2 || n_n < 2 {
        return Err(Error::InvalidParams(format!("degenerate Husimi grid {n_theta}x{n_n}")));
    }
    let dim = psi.dim();
    let (sigma_theta, sigma_n) = quantum_cell_widths(planck);
    let n_min = -((dim / 2) as f64);
    let n_step = dim as f64 / n_n as f64;
    let amps = psi.as_slice();

    let mut values = vec![0.0f64; n_theta * n_n];
    let rows: Vec<Vec<f64>> = (0..n_n)
        .into_par_iter()
        .map(|i| {
            let center = n_min + i as f64 * n_step;
            let pk = packet(dim, center, sigma_n);
            let windowed: Vec<Complex64> = pk
                .amps
                .iter()
                .zip(&pk.indices)
                .map(|(g, &j)| g * amps[j])
                .collect();
            (0..n_theta)
                .map(|it| {
                    let theta = 2.0 * PI * it as f64 / n_theta as f64;
                    let rot = Complex64::from_polar(1.0, theta);
                    // amp = Σ_d g_d ψ_{j(d)} e^{i d θ}; start at the lowest offset.
                    let mut phase = Complex64::from_polar(1.0, pk.offsets[0] as f64 * theta);
                    let mut acc = Complex64::ZERO;
                    for y in &windowed {
                        acc += y * phase;
                        phase *= rot;
                    }
                    acc.norm_sqr()
                })
                .collect()
        })
        .collect();
    for (i, row) in rows.into_iter().enumerate() {
        for (it, h) in row.into_iter().enumerate() {
            values[it * n_n + i] = h;
        }
    }
    PhaseSpaceDistribution::from_raw(n_theta, n_n, values, n_min, n_step, sigma_theta, sigma_n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::{run_trajectories, RunPlan};
    use crate::state::basis_state;

    #[test]
    fn momentum_distribution_of_basis_state_is_delta() {
        let rho = DensityMatrix::from_pure(&StateVector::momentum_basis(64, 0).unwrap());
        let w = momentum_distribution(&rho);
        assert!((w.value(0).unwrap() - 1.0).abs() < 1e-15);
        assert!((w.mass() - 1.0).abs() < 1e-12);
        assert!((w.ipr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn momentum_distribution_of_mixed_state_is_uniform() {
        let rho = DensityMatrix::maximally_mixed(16);
        let w = momentum_distribution(&rho);
        for i in 0..16 {
            assert!((w.weights()[i] - 1.0 / 16.0).abs() < 1e-15);
        }
        assert!((w.ipr() - 16.0).abs() < 1e-10);
    }

    #[test]
    fn fidelity_identities() {
        let psi = StateVector::momentum_basis(16, 3).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        assert!((fidelity(&psi, &rho).unwrap() - 1.0).abs() < 1e-14);
        let mixed = DensityMatrix::maximally_mixed(16);
        assert!((fidelity(&psi, &mixed).unwrap() - 1.0 / 16.0).abs() < 1e-14);
        let other = StateVector::momentum_basis(32, 0).unwrap();
        assert!(fidelity(&other, &rho).is_err());
    }

    #[test]
    fn decay_fit_recovers_exact_exponential() {
        let series =
            FidelitySeries::new((0..=60).map(|t| (-0.1 * t as f64).exp()).collect());
        let fit = fit_decay_rate(&series, DEFAULT_FIT_WINDOW).unwrap();
        assert!((fit.rate - 0.1).abs() < 1e-12, "rate {}", fit.rate);
        assert!(fit.stderr < 1e-12);
    }

    #[test]
    fn decay_fit_of_constant_fidelity_is_zero() {
        let series = FidelitySeries::new(vec![1.0; 40]);
        let fit = fit_decay_rate(&series, DEFAULT_FIT_WINDOW).unwrap();
        assert!(fit.rate.abs() < 1e-14);
    }

    #[test]
    fn decay_fit_needs_points_above_floor() {
        let series = FidelitySeries::new(vec![0.01; 40]);
        assert!(fit_decay_rate(&series, DEFAULT_FIT_WINDOW).is_err());
        let short = FidelitySeries::new(vec![1.0, 0.9, 0.8]);
        assert!(fit_decay_rate(&short, DEFAULT_FIT_WINDOW).is_err());
    }

    #[test]
    fn timescale_formulas() {
        let p = MapParams::one_cell(8, -0.5).unwrap();
        let ts = fidelity_timescale(&p, &NoiseModel::new(0.001).unwrap());
        assert!((ts.iterations - 0.625).abs() < 1e-12);
        let p6 = MapParams::one_cell(6, -0.5).unwrap();
        let ts6 = fidelity_timescale(&p6, &NoiseModel::new(0.001).unwrap());
        assert!((ts6.gates - 1.0 / 0.006).abs() < 1e-9);
        // Doubling Γ halves t_f.
        let double = fidelity_timescale(&p, &NoiseModel::new(0.002).unwrap());
        assert!((ts.iterations / double.iterations - 2.0).abs() < 1e-12);
        let off = fidelity_timescale(&p, &NoiseModel::off());
        assert!(off.iterations.is_infinite() && off.gates.is_infinite());
    }

    #[test]
    fn ipr_bounds_hold_for_engine_output() {
        let params = MapParams::with_kick(4, 3f64.sqrt(), 2f64.sqrt()).unwrap();
        let psi0 = basis_state(&params, 0).unwrap();
        let record = run_trajectories(
            &params,
            &NoiseModel::new(0.01).unwrap(),
            &psi0,
            15,
            16,
            3,
            &RunPlan::default(),
        )
        .unwrap();
        for xi in &record.ipr {
            assert!(*xi >= 1.0 - 1e-12 && *xi <= 16.0 + 1e-9);
        }
    }

    #[test]
    fn husimi_of_momentum_eigenstate_matches_packet() {
        let params = MapParams::one_cell(6, 1.0).unwrap();
        let psi = basis_state(&params, 10).unwrap();
        let dist = husimi(&params, &psi, 64, 64).unwrap();
        assert!((dist.mass() - 1.0).abs() < 1e-8);

        // Uniform ridge in θ: every θ row carries the same mass.
        let (n_theta, n_n) = dist.dims();
        let row_mass: Vec<f64> = (0..n_theta)
            .map(|it| (0..n_n).map(|i| dist.value(it, i)).sum::<f64>())
            .collect();
        let mean = row_mass.iter().sum::<f64>() / n_theta as f64;
        for m in &row_mass {
            assert!((m - mean).abs() < 1e-10 * mean.max(1.0));
        }

        // Gaussian profile in n, centered at 10 with variance Δn².
        let (_, dn) = quantum_cell_widths(params.planck());
        let mut mean_n = 0.0;
        let mut var_n = 0.0;
        for it in 0..n_theta {
            for i in 0..n_n {
                mean_n += dist.value(it, i) * dist.momentum_at(i);
            }
        }
        for it in 0..n_theta {
            for i in 0..n_n {
                var_n += dist.value(it, i) * (dist.momentum_at(i) - mean_n).powi(2);
            }
        }
        assert!((mean_n - 10.0).abs() < 0.05, "mean momentum {mean_n}");
        assert!(
            (var_n - dn * dn).abs() / (dn * dn) < 0.1,
            "variance {var_n} vs packet {expected}",
            expected = dn * dn
        );
    }

    #[test]
    fn husimi_of_state_and_projector_agree() {
        let params = MapParams::one_cell(4, -0.5).unwrap();
        let mut psi = basis_state(&params, 1).unwrap();
        crate::circuit::apply_map_oracle(&mut psi, &params).unwrap();
        let via_state = husimi(&params, &psi, 24, 20).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let via_rho = husimi_of_density(&rho, params.planck(), 24, 20).unwrap();
        let worst = via_state
            .values()
            .iter()
            .zip(via_rho.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "routes deviate by {worst}");
    }

    #[test]
    fn husimi_rejects_degenerate_grid() {
        let params = MapParams::one_cell(4, 1.0).unwrap();
        let psi = basis_state(&params, 0).unwrap();
        assert!(husimi(&params, &psi, 1, 16).is_err());
    }

    #[test]
    fn ipr_ratio_checks_window_and_params() {
        let params = MapParams::with_kick(3, 1.0, 0.5).unwrap();
        let psi0 = basis_state(&params, 0).unwrap();
        let plan = RunPlan::default();
        let a = run_trajectories(&params, &NoiseModel::off(), &psi0, 10, 2, 0, &plan).unwrap();
        let b = run_trajectories(&params, &NoiseModel::off(), &psi0, 10, 2, 0, &plan).unwrap();
        let r = ipr_ratio(&a, &b, (3, 8)).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(ipr_ratio(&a, &b, (3, 30)).is_err());
    }
}
