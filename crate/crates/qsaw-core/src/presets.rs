//! Built-in experiment presets.
//!
//! Each preset bundles the runs behind one published figure of the map's
//! dissipative phenomenology: localization under weak damping, phase-space
//! structure and its washout, the fidelity decay law, IPR growth, the
//! non-monotonic `ξ/ξ₀` ratio, and strong-damping attractors.

use crate::config::{
    EngineChoice, ExperimentConfig, InitialState, ObservableChoice,
};

/// Aggregate output written after a preset's runs complete.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PresetPost {
    None,
    /// Fit `−ln f` slopes and tabulate them against `Γ_eff = n_q n_g Γ`.
    DecayTable { window: (usize, usize) },
    /// Tabulate window-averaged `ξ/ξ₀` per `(n_q, Γ)`.
    IprRatioTable { window: (usize, usize) },
}

/// A named bundle of runs plus optional post-processing.
pub struct Preset {
    pub name: &'static str,
    pub figure: &'static str,
    pub summary: &'static str,
    pub runs: Vec<ExperimentConfig>,
    pub post: PresetPost,
}

const DEFAULT_SEED: u64 = 1;
const SQRT2: f64 = std::f64::consts::SQRT_2;

fn sqrt3() -> f64 {
    3f64.sqrt()
}

fn localization_run(name: &str, qubits: usize, gamma: f64, m: usize, t_max: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(name, EngineChoice::Trajectories, qubits, SQRT2);
    cfg.kick = Some(sqrt3());
    cfg.gamma = gamma;
    cfg.trajectories = Some(m);
    cfg.t_max = t_max;
    cfg.seed = DEFAULT_SEED;
    cfg
}

fn fig1() -> Preset {
    let mut runs = Vec::new();
    let mut exact = ExperimentConfig::new("fig1-exact", EngineChoice::Exact, 6, SQRT2);
    exact.kick = Some(sqrt3());
    exact.gamma = 0.001;
    exact.t_max = 30;
    exact.seed = DEFAULT_SEED;
    runs.push(exact);
    for m in [20usize, 50, 200, 1000] {
        runs.push(localization_run(&format!("fig1-m{m}"), 6, 0.001, m, 30));
    }
    Preset {
        name: "fig1",
        figure: "momentum distributions with weak damping",
        summary: "n_q=6, k=sqrt3, K=sqrt2, gamma=0.001, t=30: exact engine vs M in {20,50,200,1000}",
        runs,
        post: PresetPost::None,
    }
}

fn fig2() -> Preset {
    let windows = [(0usize, 9usize), (40, 49), (90, 99)];
    let mut runs = Vec::new();
    for (t0, t1) in windows {
        let mut cfg =
            ExperimentConfig::new(&format!("fig2-classical-{t0}-{t1}"), EngineChoice::Classical, 8, -0.5);
        cfg.observables = Vec::new();
        cfg.t_max = 99;
        cfg.classical_window = Some((t0, t1));
        cfg.classical_points = Some(200_000);
        cfg.grid_n_theta = Some(512);
        cfg.grid_n_n = Some(256);
        cfg.initial = InitialState::FractionOfDim(0.1);
        runs.push(cfg);
    }
    let quantum = |name: &str, qubits: usize, gamma: f64, m: usize, grid: (usize, usize)| {
        let mut cfg = ExperimentConfig::new(name, EngineChoice::Trajectories, qubits, -0.5);
        cfg.gamma = gamma;
        cfg.trajectories = Some(m);
        cfg.t_max = 99;
        cfg.seed = DEFAULT_SEED;
        cfg.initial = InitialState::FractionOfDim(0.1);
        cfg.observables = vec![ObservableChoice::Series, ObservableChoice::Husimi];
        cfg.grid_n_theta = Some(grid.0);
        cfg.grid_n_n = Some(grid.1);
        cfg.husimi_windows = windows.to_vec();
        cfg
    };
    runs.push(quantum("fig2-ideal", 8, 0.0, 1, (512, 256)));
    runs.push(quantum("fig2-noisy-nq8", 8, 0.0005, 50, (512, 256)));
    runs.push(quantum("fig2-noisy-nq10", 10, 0.0005, 50, (512, 512)));
    Preset {
        name: "fig2",
        figure: "phase-space structure and its washout",
        summary: "K=-0.5 one cell: smoothed classical density vs Husimi rows at gamma=0 and 5e-4, windows 0-9/40-49/90-99",
        runs,
        post: PresetPost::None,
    }
}

fn one_cell_run(name: &str, qubits: usize, chaos: f64, gamma: f64, m: usize, t_max: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(name, EngineChoice::Trajectories, qubits, chaos);
    cfg.gamma = gamma;
    cfg.trajectories = Some(m);
    cfg.t_max = t_max;
    cfg.seed = DEFAULT_SEED;
    cfg.observables = vec![ObservableChoice::Series];
    cfg
}

fn fig3() -> Preset {
    let mut runs = Vec::new();
    for chaos in [-0.5, 0.5] {
        for gamma in [0.0005, 0.001] {
            let tag = if chaos < 0.0 { "Kneg" } else { "Kpos" };
            runs.push(one_cell_run(
                &format!("fig3-{tag}-g{gamma}"),
                8,
                chaos,
                gamma,
                50,
                100,
            ));
        }
    }
    Preset {
        name: "fig3",
        figure: "fidelity decay curves",
        summary: "n_q=8, one cell, K=+/-0.5, gamma in {5e-4, 1e-3}, M=50, t=100",
        runs,
        post: PresetPost::None,
    }
}

fn fig3_inset() -> Preset {
    let mut runs = Vec::new();
    for qubits in [4usize, 6, 8] {
        for gamma in [2.5e-4, 5e-4, 1e-3] {
            for chaos in [-0.5, 0.5] {
                let tag = if chaos < 0.0 { "Kneg" } else { "Kpos" };
                runs.push(one_cell_run(
                    &format!("fig3-inset-nq{qubits}-g{gamma}-{tag}"),
                    qubits,
                    chaos,
                    gamma,
                    50,
                    50,
                ));
            }
        }
    }
    Preset {
        name: "fig3-inset",
        figure: "decay rate vs effective dissipation",
        summary: "sweep n_q in {4,6,8} x gamma in {2.5e-4,5e-4,1e-3} x K=+/-0.5; fits gamma against gamma_eff = n_q*n_g*gamma",
        runs,
        post: PresetPost::DecayTable { window: (1, 50) },
    }
}

fn fig4() -> Preset {
    let mut runs = Vec::new();
    for qubits in [4usize, 6, 8] {
        runs.push(localization_run(&format!("fig4-nq{qubits}"), qubits, 0.001, 50, 100));
        runs.push(localization_run(&format!("fig4-nq{qubits}-ideal"), qubits, 0.0, 1, 100));
    }
    Preset {
        name: "fig4",
        figure: "IPR growth under dissipation",
        summary: "k=sqrt3, K=sqrt2, gamma=0.001, M=50, n_q in {4,6,8} with gamma=0 baselines, t=100",
        runs,
        post: PresetPost::None,
    }
}

/// Dissipation grid for the `ξ/ξ₀` scan.
pub const FIG5_GAMMAS: [f64; 6] = [1e-4, 5e-4, 2e-3, 1e-2, 5e-2, 0.2];

fn fig5() -> Preset {
    let mut runs = Vec::new();
    for qubits in [4usize, 6, 8] {
        runs.push(localization_run(&format!("fig5-nq{qubits}-ideal"), qubits, 0.0, 1, 40));
        for gamma in FIG5_GAMMAS {
            runs.push(localization_run(
                &format!("fig5-nq{qubits}-g{gamma}"),
                qubits,
                gamma,
                50,
                40,
            ));
        }
    }
    Preset {
        name: "fig5",
        figure: "non-monotonic IPR ratio",
        summary: "k=sqrt3, K=sqrt2, M=50: xi/xi0 averaged over t in [30,40] across gamma in {1e-4..0.2}",
        runs,
        post: PresetPost::IprRatioTable { window: (30, 40) },
    }
}

/// Dissipation rates probed by the attractor preset.
pub const FIG6_GAMMAS: [f64; 3] = [0.01, 0.05, 0.1];
/// Initial momentum of the primary attractor rows.
pub const FIG6_INITIAL_N: i64 = 60;

fn fig6() -> Preset {
    let mut runs = Vec::new();
    let base = |name: &str, gamma: f64, initial: i64, windows: Vec<(usize, usize)>| {
        let mut cfg = ExperimentConfig::new(name, EngineChoice::Trajectories, 8, 1.0);
        cfg.gamma = gamma;
        cfg.trajectories = Some(50);
        cfg.t_max = 99;
        cfg.seed = DEFAULT_SEED;
        cfg.initial = InitialState::Momentum(initial);
        cfg.observables = vec![ObservableChoice::Series, ObservableChoice::Husimi];
        cfg.grid_n_theta = Some(512);
        cfg.grid_n_n = Some(256);
        cfg.husimi_windows = windows;
        cfg
    };
    for gamma in FIG6_GAMMAS {
        runs.push(base(
            &format!("fig6-g{gamma}-n60"),
            gamma,
            FIG6_INITIAL_N,
            vec![(0, 9), (40, 49), (90, 99)],
        ));
    }
    for gamma in FIG6_GAMMAS {
        runs.push(base(&format!("fig6-g{gamma}-n0"), gamma, 0, vec![(90, 99)]));
    }
    Preset {
        name: "fig6",
        figure: "strong-damping attractors",
        summary: "K=1, n_q=8, M=50, gamma in {0.01,0.05,0.1}, initial n=60 and n=0, windows 0-9/40-49/90-99",
        runs,
        post: PresetPost::None,
    }
}

/// All built-in presets.
pub fn catalog() -> Vec<Preset> {
    vec![fig1(), fig2(), fig3(), fig3_inset(), fig4(), fig5(), fig6()]
}

/// Looks up one preset by name.
pub fn find(name: &str) -> Option<Preset> {
    catalog().into_iter().find(|p| p.name == name)
}

/// Human-readable catalog: every preset with its full parameter sets.
pub fn describe_catalog() -> String {
    let mut out = String::new();
    for preset in catalog() {
        out.push_str(&format!("{}  ({})\n", preset.name, preset.figure));
        out.push_str(&format!("  {}\n", preset.summary));
        for run in &preset.runs {
            let mut line = format!(
                "  - {}: engine={} n_q={} K={}",
                run.name,
                run.engine.token(),
                run.qubits,
                crate::config::format_f64(run.chaos)
            );
            if let Some(k) = run.kick {
                line.push_str(&format!(" k={}", crate::config::format_f64(k)));
            }
            if run.engine != EngineChoice::Classical {
                line.push_str(&format!(" gamma={}", crate::config::format_f64(run.gamma)));
            }
            if let Some(m) = run.trajectories {
                line.push_str(&format!(" M={m}"));
            }
            line.push_str(&format!(" t_max={}", run.t_max));
            match run.initial {
                InitialState::Momentum(n) => line.push_str(&format!(" initial_n={n}")),
                InitialState::FractionOfDim(f) => line.push_str(&format!(" initial_n_frac={f}")),
            }
            out.push_str(&line);
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_covers_all_figures() {
        let presets = catalog();
        assert!(presets.len() >= 6);
        for name in ["fig1", "fig2", "fig3", "fig3-inset", "fig4", "fig5", "fig6"] {
            assert!(presets.iter().any(|p| p.name == name), "missing {name}");
        }
    }

    #[test]
    fn fig6_parameters() {
        let preset = find("fig6").unwrap();
        assert_eq!(FIG6_GAMMAS, [0.01, 0.05, 0.1]);
        let n60: Vec<_> = preset
            .runs
            .iter()
            .filter(|r| r.initial == InitialState::Momentum(60))
            .collect();
        assert_eq!(n60.len(), 3);
        for run in &preset.runs {
            assert_eq!(run.qubits, 8);
            assert_eq!(run.chaos, 1.0);
            assert_eq!(run.kick, None);
            assert_eq!(run.trajectories, Some(50));
        }
        let gammas: Vec<f64> = n60.iter().map(|r| r.gamma).collect();
        assert_eq!(gammas, vec![0.01, 0.05, 0.1]);
    }

    #[test]
    fn fig4_parameters() {
        let preset = find("fig4").unwrap();
        for run in &preset.runs {
            assert_eq!(run.kick, Some(3f64.sqrt()));
            assert_eq!(run.chaos, std::f64::consts::SQRT_2);
        }
        assert!(preset
            .runs
            .iter()
            .any(|r| r.gamma == 0.001 && r.trajectories == Some(50)));
    }

    #[test]
    fn every_preset_run_parses_back() {
        for preset in catalog() {
            for run in &preset.runs {
                let text = run.serialize();
                let back = crate::config::parse_config(&text).unwrap();
                assert_eq!(&back, run, "round trip failed for {}", run.name);
            }
        }
    }

    #[test]
    fn catalog_description_mentions_presets() {
        let text = describe_catalog();
        assert!(text.contains("fig6"));
        assert!(text.contains("fig3-inset"));
    }
}
