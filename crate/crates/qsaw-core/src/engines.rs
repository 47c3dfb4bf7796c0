//! Time-evolution drivers: exact density-matrix propagation and the
//! deterministic, trajectory-parallel Monte Carlo wave-function engine.
//!
//! Both engines interleave the per-gate damping channel with the elementary
//! gates of [`crate::circuit::build_map_sequence`] and snapshot observables
//! once per map iteration (including `t = 0`).
//!
//! Reproducibility contract: trajectory `α` draws from a ChaCha8 stream
//! constructed as `(seed, stream) = (master_seed, α)`, and ensemble
//! reductions always sum in ascending trajectory order, so results are
//! bit-identical for a fixed master seed regardless of thread count.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rayon::prelude::*;

use crate::circuit::{build_map_sequence, MapOracle};
use crate::error::{Error, Result};
use crate::noise::{apply_noise_after_gate_density, apply_noise_after_gate_state, NoiseModel};
use crate::observables::{
    husimi_of_density, FidelitySeries, MomentumDistribution, PhaseSpaceDistribution,
};
use crate::params::MapParams;
use crate::state::{inner, DensityMatrix, StateVector};

/// Default Hilbert-space cap for the exact engine (`n_q = 8`).
pub const DEFAULT_EXACT_DIM_CAP: usize = 256;

/// Phase-space grids accumulated over iteration windows.
#[derive(Debug, Clone, PartialEq)]
pub struct HusimiPlan {
    pub n_theta: usize,
    pub n_n: usize,
    /// Inclusive iteration windows `(t0, t1)`.
    pub windows: Vec<(usize, usize)>,
}

/// What a run should record beyond per-iteration momentum distributions.
#[derive(Debug, Clone, Default)]
pub struct RunPlan {
    /// Reference state for fidelity; co-evolved with the noise-free map.
    pub fidelity_reference: Option<StateVector>,
    /// Optional window-averaged Husimi distributions.
    pub husimi: Option<HusimiPlan>,
    /// Override of the exact-engine dimension cap.
    pub exact_dim_cap: Option<usize>,
}

impl RunPlan {
    /// Records fidelity against the given initial state.
    pub fn with_fidelity(reference: StateVector) -> Self {
        Self { fidelity_reference: Some(reference), ..Self::default() }
    }
}

/// Which engine produced a record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EngineKind {
    Exact,
    Trajectories { count: usize, master_seed: u64 },
}

impl EngineKind {
    /// Short label for file headers and summaries.
    pub fn label(&self) -> String {
        match self {
            EngineKind::Exact => "exact".into(),
            EngineKind::Trajectories { count, .. } => format!("M={count}"),
        }
    }
}

/// A window-averaged Husimi distribution.
#[derive(Debug, Clone)]
pub struct HusimiWindow {
    pub window: (usize, usize),
    pub dist: PhaseSpaceDistribution,
}

/// An ensemble of trajectory end states.
#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    members: Vec<StateVector>,
    master_seed: u64,
}

impl TrajectoryEnsemble {
    pub fn new(members: Vec<StateVector>, master_seed: u64) -> Self {
        Self { members, master_seed }
    }

    pub fn members(&self) -> &[StateVector] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }
}

/// `(1/M) Σ_α |ψ^α⟩⟨ψ^α|`.
pub fn reconstruct_density(ensemble: &TrajectoryEnsemble) -> Result<DensityMatrix> {
    if ensemble.is_empty() {
        return Err(Error::InvalidState("empty trajectory ensemble".into()));
    }
    let dim = ensemble.members[0].dim();
    let w = 1.0 / ensemble.len() as f64;
    let mut rho = DensityMatrix::zeros(dim);
    for member in &ensemble.members {
        if member.dim() != dim {
            return Err(Error::DimensionMismatch { left: member.dim(), right: dim });
        }
        rho.add_scaled_projector(member, w);
    }
    Ok(rho)
}

/// Everything one run records: per-iteration snapshots plus final objects.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub params: MapParams,
    pub gamma: f64,
    pub engine: EngineKind,
    pub t_max: usize,
    /// `⟨ψ₀(t)|ρ(t)|ψ₀(t)⟩` per iteration, when a reference was supplied.
    pub fidelity: Option<FidelitySeries>,
    /// Momentum distribution per iteration (`t_max + 1` snapshots).
    pub momentum: Vec<MomentumDistribution>,
    /// Inverse participation ratio per iteration.
    pub ipr: Vec<f64>,
    /// Window-averaged Husimi distributions, one per requested window.
    pub husimi: Vec<HusimiWindow>,
    /// Final density matrix (exact engine only).
    pub final_density: Option<DensityMatrix>,
    /// Final trajectory ensemble (Monte Carlo engine only).
    pub final_ensemble: Option<TrajectoryEnsemble>,
}

impl RunRecord {
    /// Snapshots recorded, `t_max + 1`.
    pub fn snapshots(&self) -> usize {
        self.momentum.len()
    }
}

fn validate_windows(plan: &HusimiPlan, t_max: usize) -> Result<()> {
    if plan.n_theta < 2 || plan.n_n < 2 {
        return Err(Error::InvalidParams(format!(
            "degenerate Husimi grid {}x{}",
            plan.n_theta, plan.n_n
        )));
    }
    for &(t0, t1) in &plan.windows {
        if t0 > t1 || t1 > t_max {
            return Err(Error::InvalidParams(format!(
                "Husimi window {t0}..{t1} outside 0..{t_max}"
            )));
        }
    }
    Ok(())
}

/// Per-window accumulator for the ensemble- and time-averaged density.
struct WindowAccum {
    window: (usize, usize),
    rho: DensityMatrix,
    weight: f64,
}

fn window_accums(plan: Option<&HusimiPlan>, dim: usize) -> Vec<WindowAccum> {
    plan.map(|h| {
        h.windows
            .iter()
            .map(|&window| WindowAccum { window, rho: DensityMatrix::zeros(dim), weight: 0.0 })
            .collect()
    })
    .unwrap_or_default()
}

fn finish_husimi(
    accums: Vec<WindowAccum>,
    plan: Option<&HusimiPlan>,
    params: &MapParams,
) -> Result<Vec<HusimiWindow>> {
    let Some(plan) = plan else {
        return Ok(Vec::new());
    };
    accums
        .into_iter()
        .map(|mut acc| {
            acc.rho.scale(1.0 / acc.weight);
            let dist = husimi_of_density(&acc.rho, params.planck(), plan.n_theta, plan.n_n)?;
            Ok(HusimiWindow { window: acc.window, dist })
        })
        .collect()
}

/// Evolves the noise-free reference through every snapshot, when requested.
fn ideal_states(
    reference: Option<&StateVector>,
    params: &MapParams,
    t_max: usize,
) -> Result<Option<Vec<StateVector>>> {
    let Some(psi) = reference else {
        return Ok(None);
    };
    if psi.dim() != params.dim() {
        return Err(Error::DimensionMismatch { left: psi.dim(), right: params.dim() });
    }
    let mut oracle = MapOracle::new(params);
    let mut states = Vec::with_capacity(t_max + 1);
    let mut current = psi.clone();
    states.push(current.clone());
    for _ in 0..t_max {
        oracle.apply(&mut current)?;
        states.push(current.clone());
    }
    Ok(Some(states))
}

/// Exact evolution: per elementary gate, a unitary conjugation of `ρ`
/// followed by the damping channel on every qubit.
pub fn run_exact(
    params: &MapParams,
    model: &NoiseModel,
    rho0: &DensityMatrix,
    t_max: usize,
    plan: &RunPlan,
) -> Result<RunRecord> {
    let cap = plan.exact_dim_cap.unwrap_or(DEFAULT_EXACT_DIM_CAP);
    if params.dim() > cap {
        return Err(Error::ExactCapExceeded { dim: params.dim(), cap });
    }
    if rho0.dim() != params.dim() {
        return Err(Error::DimensionMismatch { left: rho0.dim(), right: params.dim() });
    }
    rho0.validate(1e-8)?;
    if let Some(h) = &plan.husimi {
        validate_windows(h, t_max)?;
    }

    let seq = build_map_sequence(params);
    let ideal = ideal_states(plan.fidelity_reference.as_ref(), params, t_max)?;
    let mut rho = rho0.clone();
    let mut accums = window_accums(plan.husimi.as_ref(), params.dim());

    let mut fidelity = ideal.as_ref().map(|_| Vec::with_capacity(t_max + 1));
    let mut momentum = Vec::with_capacity(t_max + 1);
    let mut ipr = Vec::with_capacity(t_max + 1);

    let mut snapshot = |t: usize, rho: &DensityMatrix, fidelity: &mut Option<Vec<f64>>,
                        accums: &mut Vec<WindowAccum>| {
        let dist = MomentumDistribution::from_storage_probs(&rho.diagonal_probabilities());
        ipr.push(dist.ipr());
        momentum.push(dist);
        if let (Some(f), Some(states)) = (fidelity.as_mut(), ideal.as_ref()) {
            f.push(expectation_in_state(rho, &states[t]));
        }
        for acc in accums.iter_mut() {
            if t >= acc.window.0 && t <= acc.window.1 {
                for (d, s) in acc.rho.as_mut_slice().iter_mut().zip(rho.as_slice()) {
                    *d += s;
                }
                acc.weight += 1.0;
            }
        }
    };

    snapshot(0, &rho, &mut fidelity, &mut accums);
    for t in 1..=t_max {
        for gate in seq.gates() {
            crate::circuit::apply_gate_to_density(&mut rho, gate)?;
            apply_noise_after_gate_density(&mut rho, model)?;
        }
        snapshot(t, &rho, &mut fidelity, &mut accums);
    }

    let husimi = finish_husimi(accums, plan.husimi.as_ref(), params)?;
    Ok(RunRecord {
        params: *params,
        gamma: model.gamma(),
        engine: EngineKind::Exact,
        t_max,
        fidelity: fidelity.map(FidelitySeries::new),
        momentum,
        ipr,
        husimi,
        final_density: Some(rho),
        final_ensemble: None,
    })
}

/// `⟨ψ|ρ|ψ⟩` (real part; imaginary part vanishes for Hermitian `ρ`).
fn expectation_in_state(rho: &DensityMatrix, psi: &StateVector) -> f64 {
    let dim = rho.dim();
    let amps = psi.as_slice();
    let mut acc = num_complex::Complex64::ZERO;
    for i in 0..dim {
        let row = i * dim;
        let ai = amps[i].conj();
        for j in 0..dim {
            acc += ai * rho.as_slice()[row + j] * amps[j];
        }
    }
    acc.re
}

/// Per-trajectory payload collected before the deterministic reduction.
struct TrajResult {
    /// `|ψ_j|²` per snapshot, flattened `(t_max+1) × N`.
    weights: Vec<f64>,
    /// `|⟨ψ₀(t)|ψ⟩|²` per snapshot when fidelity is recorded.
    overlaps: Vec<f64>,
    /// Per-window projector sums.
    window_rho: Vec<DensityMatrix>,
    final_state: StateVector,
}

/// Monte Carlo evolution of `M` independent trajectories: per elementary
/// gate, the unitary followed by a stochastic damping step on every qubit.
pub fn run_trajectories(
    params: &MapParams,
    model: &NoiseModel,
    psi0: &StateVector,
    t_max: usize,
    count: usize,
    master_seed: u64,
    plan: &RunPlan,
) -> Result<RunRecord> {
    if count == 0 {
        return Err(Error::InvalidParams("need at least one trajectory".into()));
    }
    if psi0.dim() != params.dim() {
        return Err(Error::DimensionMismatch { left: psi0.dim(), right: params.dim() });
    }
    if (psi0.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState("initial state is not normalized".into()));
    }
    if let Some(h) = &plan.husimi {
        validate_windows(h, t_max)?;
    }

    let seq = build_map_sequence(params);
    let ideal = ideal_states(plan.fidelity_reference.as_ref(), params, t_max)?;
    let dim = params.dim();
    let snapshots = t_max + 1;
    let windows: Vec<(usize, usize)> =
        plan.husimi.as_ref().map(|h| h.windows.clone()).unwrap_or_default();

    let run_one = |traj: usize| -> Result<TrajResult> {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(traj as u64);
        let mut state = psi0.clone();
        let mut weights = Vec::with_capacity(snapshots * dim);
        let mut overlaps = Vec::with_capacity(if ideal.is_some() { snapshots } else { 0 });
        let mut window_rho: Vec<DensityMatrix> =
            windows.iter().map(|_| DensityMatrix::zeros(dim)).collect();
        let mut record = |t: usize, state: &StateVector, window_rho: &mut Vec<DensityMatrix>,
                          overlaps: &mut Vec<f64>|
         -> Result<()> {
            weights.extend(state.as_slice().iter().map(|a| a.norm_sqr()));
            if let Some(states) = ideal.as_ref() {
                overlaps.push(inner(&states[t], state)?.norm_sqr());
            }
            for (w, acc) in windows.iter().zip(window_rho.iter_mut()) {
                if t >= w.0 && t <= w.1 {
                    acc.add_scaled_projector(state, 1.0);
                }
            }
            Ok(())
        };
        record(0, &state, &mut window_rho, &mut overlaps)?;
        for t in 1..=t_max {
            for gate in seq.gates() {
                crate::circuit::apply_gate(&mut state, gate)?;
                apply_noise_after_gate_state(&mut state, model, &mut rng)?;
            }
            state.apply_global_phase(seq.global_phase());
            record(t, &state, &mut window_rho, &mut overlaps)?;
        }
        Ok(TrajResult { weights, overlaps, window_rho, final_state: state })
    };

    // Chunked parallel execution with a sequential, index-ordered reduction:
    // the floating-point accumulation order is fixed by trajectory index, so
    // the result does not depend on thread count or chunk size.
    let payload = snapshots * dim * 8
        + windows.len() * dim * dim * 16
        + dim * 16
        + snapshots * 8;
    let chunk = (256 * 1024 * 1024 / payload.max(1)).clamp(1, 64);

    let mut weight_sum = vec![0.0f64; snapshots * dim];
    let mut overlap_sum = vec![0.0f64; if ideal.is_some() { snapshots } else { 0 }];
    let mut accums = window_accums(plan.husimi.as_ref(), dim);
    let mut members = Vec::with_capacity(count);

    let mut start = 0usize;
    while start < count {
        let end = (start + chunk).min(count);
        let results: Vec<Result<TrajResult>> = (start..end).into_par_iter().map(run_one).collect();
        for result in results {
            let r = result?;
            for (sum, w) in weight_sum.iter_mut().zip(&r.weights) {
                *sum += w;
            }
            for (sum, f) in overlap_sum.iter_mut().zip(&r.overlaps) {
                *sum += f;
            }
            for (acc, rho) in accums.iter_mut().zip(&r.window_rho) {
                for (d, s) in acc.rho.as_mut_slice().iter_mut().zip(rho.as_slice()) {
                    *d += s;
                }
            }
            members.push(r.final_state);
        }
        start = end;
    }

    let inv_m = 1.0 / count as f64;
    let mut momentum = Vec::with_capacity(snapshots);
    let mut ipr = Vec::with_capacity(snapshots);
    for t in 0..snapshots {
        let probs: Vec<f64> =
            weight_sum[t * dim..(t + 1) * dim].iter().map(|w| w * inv_m).collect();
        let dist = MomentumDistribution::from_storage_probs(&probs);
        ipr.push(dist.ipr());
        momentum.push(dist);
    }
    let fidelity = ideal
        .as_ref()
        .map(|_| FidelitySeries::new(overlap_sum.iter().map(|f| f * inv_m).collect()));

    for (&(t0, t1), acc) in windows.iter().zip(accums.iter_mut()) {
        acc.weight = (count * (t1 - t0 + 1)) as f64;
    }
    let husimi = finish_husimi(accums, plan.husimi.as_ref(), params)?;

    Ok(RunRecord {
        params: *params,
        gamma: model.gamma(),
        engine: EngineKind::Trajectories { count, master_seed },
        t_max,
        fidelity,
        momentum,
        ipr,
        husimi,
        final_density: None,
        final_ensemble: Some(TrajectoryEnsemble::new(members, master_seed)),
    })
}
