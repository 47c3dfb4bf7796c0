//! Classical sawtooth map and quantum-cell-smoothed phase-space densities.
//!
//! In the rescaled momentum `p = Tn` the map is `p̄ = p + K(θ−π)`,
//! `θ̄ = θ + p̄`, with `θ` wrapped to `[0, 2π)` and `p` to the torus
//! `[−πL, πL)`; the dynamics depends only on the chaos parameter `K`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::observables::PhaseSpaceDistribution;

/// One map step in rescaled coordinates, wrapped onto the torus.
pub fn classical_step(theta: f64, p: f64, chaos: f64, cells: u32) -> (f64, f64) {
    let p_new = p + chaos * (theta - PI);
    let theta_new = theta + p_new;
    (wrap(theta_new, 2.0 * PI), wrap_signed(p_new, PI * cells as f64))
}

fn wrap(x: f64, period: f64) -> f64 {
    let y = x.rem_euclid(period);
    if y == period {
        0.0
    } else {
        y
    }
}

/// Wraps into `[−half, half)`.
fn wrap_signed(x: f64, half: f64) -> f64 {
    let y = (x + half).rem_euclid(2.0 * half) - half;
    if y == half {
        -half
    } else {
        y
    }
}

/// A cloud of phase-space points on the torus.
#[derive(Debug, Clone)]
pub struct ClassicalEnsemble {
    points: Vec<(f64, f64)>,
    chaos: f64,
    cells: u32,
}

impl ClassicalEnsemble {
    /// `n_pts` points evenly spaced in `θ`, all at momentum `p0`, mirroring
    /// a momentum eigenstate (θ-uniform, sharp in p).
    pub fn theta_uniform(n_pts: usize, p0: f64, chaos: f64, cells: u32) -> Result<Self> {
        if n_pts == 0 {
            return Err(Error::InvalidParams("need at least one classical point".into()));
        }
        let half = PI * cells as f64;
        let points = (0..n_pts)
            .map(|i| ((i as f64 + 0.5) * 2.0 * PI / n_pts as f64, wrap_signed(p0, half)))
            .collect();
        Ok(Self { points, chaos, cells })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn step(&mut self) {
        for pt in &mut self.points {
            *pt = classical_step(pt.0, pt.1, self.chaos, self.cells);
        }
    }
}

/// Inputs for a smoothed classical density matched to a quantum run.
#[derive(Debug, Clone, Copy)]
pub struct ClassicalDensityConfig {
    pub chaos: f64,
    pub cells: u32,
    /// Quantum dimension fixing the momentum axis (`N` cells over `[−N/2, N/2)`
    /// in units of `n = p/T` with `T = 2πL/N`).
    pub dim: usize,
    /// Initial momentum in rescaled units (`p0 = T·n0`).
    pub p0: f64,
    pub n_pts: usize,
    /// Inclusive iteration window to accumulate.
    pub window: (usize, usize),
    /// Gaussian smoothing widths `(σ_θ, σ_n)`; zero disables an axis.
    pub sigma_theta: f64,
    pub sigma_n: f64,
    pub n_theta: usize,
    pub n_n: usize,
}

/// Iterates a θ-uniform ensemble, histograms `(θ, n)` over the window, and
/// convolves with the periodic Gaussian of the quantum cell.
pub fn classical_density(cfg: &ClassicalDensityConfig) -> Result<PhaseSpaceDistribution> {
    if cfg.window.0 > cfg.window.1 {
        return Err(Error::InvalidParams(format!(
            "empty classical window {:?}",
            cfg.window
        )));
    }
    if cfg.n_theta < 2 || cfg.n_n < 2 {
        return Err(Error::InvalidParams(format!(
            "degenerate grid {}x{}",
            cfg.n_theta, cfg.n_n
        )));
    }
    if cfg.dim < 2 {
        return Err(Error::InvalidParams("dimension must be at least 2".into()));
    }
    let planck = 2.0 * PI * cfg.cells as f64 / cfg.dim as f64;
    let mut ensemble = ClassicalEnsemble::theta_uniform(cfg.n_pts, cfg.p0, cfg.chaos, cfg.cells)?;

    let n_min = -((cfg.dim / 2) as f64);
    let n_step = cfg.dim as f64 / cfg.n_n as f64;
    let theta_step = 2.0 * PI / cfg.n_theta as f64;
    let mut hist = vec![0.0f64; cfg.n_theta * cfg.n_n];

    // Bins are centered on the grid sample points (θ_i = i·Δθ, n_i = n_min + i·Δn).
    let deposit = |points: &[(f64, f64)], hist: &mut [f64]| {
        for &(theta, p) in points {
            let n = p / planck;
            let it = ((theta / theta_step).round() as i64).rem_euclid(cfg.n_theta as i64) as usize;
            let ii = (((n - n_min) / n_step).round() as i64).rem_euclid(cfg.n_n as i64) as usize;
            hist[it * cfg.n_n + ii] += 1.0;
        }
    };

    for t in 0..=cfg.window.1 {
        if t >= cfg.window.0 {
            deposit(ensemble.points(), &mut hist);
        }
        if t < cfg.window.1 {
            ensemble.step();
        }
    }

    if cfg.sigma_theta > 0.0 {
        smooth_periodic_axis(&mut hist, cfg.n_theta, cfg.n_n, cfg.sigma_theta / theta_step, true);
    }
    if cfg.sigma_n > 0.0 {
        smooth_periodic_axis(&mut hist, cfg.n_theta, cfg.n_n, cfg.sigma_n / n_step, false);
    }

    PhaseSpaceDistribution::from_raw(
        cfg.n_theta,
        cfg.n_n,
        hist,
        n_min,
        n_step,
        cfg.sigma_theta,
        cfg.sigma_n,
    )
}

/// Separable periodic Gaussian convolution along one axis, σ in cells.
fn smooth_periodic_axis(
    values: &mut [f64],
    n_theta: usize,
    n_n: usize,
    sigma_cells: f64,
    along_theta: bool,
) {
    let len = if along_theta { n_theta } else { n_n };
    let reach = ((6.0 * sigma_cells).ceil() as usize).min(len / 2);
    let kernel: Vec<f64> = (0..=reach)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma_cells * sigma_cells)).exp())
        .collect();
    let norm: f64 = kernel[0] + 2.0 * kernel[1..].iter().sum::<f64>();

    let mut line = vec![0.0f64; len];
    let lanes = if along_theta { n_n } else { n_theta };
    for lane in 0..lanes {
        let at = |i: usize| if along_theta { i * n_n + lane } else { lane * n_n + i };
        for (i, slot) in line.iter_mut().enumerate() {
            let mut acc = values[at(i)] * kernel[0];
            for (d, k) in kernel.iter().enumerate().skip(1) {
                let fwd = (i + d) % len;
                let bwd = (i + len - d % len) % len;
                acc += (values[at(fwd)] + values[at(bwd)]) * k;
            }
            *slot = acc / norm;
        }
        for (i, v) in line.iter().enumerate() {
            values[at(i)] = *v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kick_vanishes_at_theta_pi() {
        for p in [-1.0, 0.0, 0.5, 2.0] {
            let (theta, p_new) = classical_step(PI, p, -0.5, 1);
            assert!((p_new - wrap_signed(p, PI)).abs() < 1e-15);
            assert!((theta - wrap(PI + p, 2.0 * PI)).abs() < 1e-12);
        }
    }

    #[test]
    fn step_matches_direct_arithmetic() {
        // K = −0.5 at (π + 0.1, 0): p̄ = −0.05, θ̄ = π + 0.05.
        let (theta, p) = classical_step(PI + 0.1, 0.0, -0.5, 1);
        assert!((p - (-0.05)).abs() < 1e-12);
        assert!((theta - (PI + 0.05)).abs() < 1e-12);
    }

    #[test]
    fn finite_difference_jacobian_is_area_preserving() {
        // The map is piecewise linear; central differences away from the
        // θ = 0 seam recover the Jacobian exactly.
        let chaos = 0.83;
        let h = 1e-6;
        let mut lcg = 0x2545F4914F6CDD1Du64;
        let mut unit = || {
            lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (lcg >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let theta = 0.01 + unit() * (2.0 * PI - 0.02);
            let p = -PI + unit() * 2.0 * PI;
            let step = |th: f64, pp: f64| classical_step(th, pp, chaos, 1);
            let diff = |a: f64, b: f64, period: f64| {
                let mut d = a - b;
                while d > period / 2.0 {
                    d -= period;
                }
                while d < -period / 2.0 {
                    d += period;
                }
                d
            };
            let (t1, p1) = step(theta + h, p);
            let (t2, p2) = step(theta - h, p);
            let (t3, p3) = step(theta, p + h);
            let (t4, p4) = step(theta, p - h);
            let dt_dth = diff(t1, t2, 2.0 * PI) / (2.0 * h);
            let dp_dth = diff(p1, p2, 2.0 * PI) / (2.0 * h);
            let dt_dp = diff(t3, t4, 2.0 * PI) / (2.0 * h);
            let dp_dp = diff(p3, p4, 2.0 * PI) / (2.0 * h);
            let det = dt_dth * dp_dp - dt_dp * dp_dth;
            assert!((det - 1.0).abs() < 1e-6, "Jacobian determinant {det}");
        }
    }

    #[test]
    fn stable_regime_keeps_orbits_bounded() {
        // K = −0.5 lies in the stable band; a point near the elliptic fixed
        // point (θ = π, p = 0) stays nearby for a long time.
        let (mut theta, mut p) = (PI + 0.01, 0.0);
        let mut max_dev: f64 = 0.0;
        for _ in 0..10_000 {
            let next = classical_step(theta, p, -0.5, 1);
            theta = next.0;
            p = next.1;
            max_dev = max_dev.max((theta - PI).abs().max(p.abs()));
        }
        assert!(max_dev < 0.1, "stable orbit wandered to {max_dev}");
    }

    #[test]
    fn chaotic_regime_separates_nearby_points_exponentially() {
        // K = 0.5: the tangent map has eigenvalue 2, so λ = ln 2 per step.
        let chaos = 0.5;
        let d0 = 1e-8;
        let (mut t1, mut p1) = (1.0, 0.3);
        let (mut t2, mut p2) = (1.0 + d0, 0.3);
        let steps = 20;
        for _ in 0..steps {
            let a = classical_step(t1, p1, chaos, 1);
            let b = classical_step(t2, p2, chaos, 1);
            t1 = a.0;
            p1 = a.1;
            t2 = b.0;
            p2 = b.1;
        }
        let mut dt = (t1 - t2).abs();
        if dt > PI {
            dt = 2.0 * PI - dt;
        }
        let dist = (dt * dt + (p1 - p2).powi(2)).sqrt();
        let lyapunov = (dist / d0).ln() / steps as f64;
        assert!(
            (lyapunov - std::f64::consts::LN_2).abs() < 0.05,
            "measured exponent {lyapunov}"
        );
    }

    #[test]
    fn zero_kick_density_stays_on_initial_momentum_line() {
        let dim = 64;
        let planck = 2.0 * PI / dim as f64;
        let n0 = 10.0;
        let cfg = ClassicalDensityConfig {
            chaos: 0.0,
            cells: 1,
            dim,
            p0: planck * n0,
            n_pts: 10_000,
            window: (0, 9),
            sigma_theta: 0.1,
            sigma_n: 1.5,
            n_theta: 64,
            n_n: 64,
        };
        let dist = classical_density(&cfg).unwrap();
        assert!((dist.mass() - 1.0).abs() < 1e-8);
        let mut off_line = 0.0;
        for it in 0..64 {
            for i in 0..64 {
                if (dist.momentum_at(i) - n0).abs() > 4.0 * 1.5 {
                    off_line += dist.value(it, i);
                }
            }
        }
        assert!(off_line < 1e-3, "mass {off_line} escaped the free-rotation line");
    }

    #[test]
    fn unsmoothed_single_point_single_step_is_a_delta() {
        let dim = 32;
        let planck = 2.0 * PI / dim as f64;
        let cfg = ClassicalDensityConfig {
            chaos: -0.5,
            cells: 1,
            dim,
            p0: 0.0,
            n_pts: 1,
            window: (1, 1),
            sigma_theta: 0.0,
            sigma_n: 0.0,
            n_theta: 32,
            n_n: 32,
        };
        let dist = classical_density(&cfg).unwrap();
        // The single point starts at θ = π (midpoint of one sample) and stays
        // at p = 0; after one step θ = π + 0 = π.
        let (theta, p) = classical_step(PI, 0.0, -0.5, 1);
        let it = (theta / (2.0 * PI / 32.0)).round() as usize % 32;
        let ii = (((p / planck) + 16.0) / 1.0).round() as usize % 32;
        let mut found = 0;
        for t in 0..32 {
            for i in 0..32 {
                if dist.value(t, i) > 0.0 {
                    assert_eq!((t, i), (it, ii));
                    assert!((dist.value(t, i) - 1.0).abs() < 1e-12);
                    found += 1;
                }
            }
        }
        assert_eq!(found, 1);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let cfg = ClassicalDensityConfig {
            chaos: 1.0,
            cells: 1,
            dim: 16,
            p0: 0.0,
            n_pts: 10,
            window: (5, 2),
            sigma_theta: 0.0,
            sigma_n: 0.0,
            n_theta: 8,
            n_n: 8,
        };
        assert!(classical_density(&cfg).is_err());
        assert!(ClassicalEnsemble::theta_uniform(0, 0.0, 1.0, 1).is_err());
    }
}
