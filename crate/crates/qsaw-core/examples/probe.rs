//! Scratch numerical scout for acceptance thresholds. Not part of the crate.

use qsaw_core::classical::{classical_density, ClassicalDensityConfig};
use qsaw_core::engines::{
    reconstruct_density, run_exact, run_trajectories, HusimiPlan, RunPlan,
};
use qsaw_core::noise::NoiseModel;
use qsaw_core::observables::{
    fit_decay_rate, quantum_cell_widths, DEFAULT_FIT_WINDOW,
};
use qsaw_core::state::{basis_state, trace_distance, DensityMatrix};
use qsaw_core::MapParams;

fn main() {
    let which: Vec<String> = std::env::args().skip(1).collect();
    let want = |name: &str| which.is_empty() || which.iter().any(|w| w == name);

    if want("fig1") {
        let params = MapParams::with_kick(6, 3f64.sqrt(), 2f64.sqrt()).unwrap();
        let model = NoiseModel::new(0.001).unwrap();
        let psi0 = basis_state(&params, 0).unwrap();
        let rho0 = DensityMatrix::from_pure(&psi0);
        let plan = RunPlan::with_fidelity(psi0.clone());
        let exact = run_exact(&params, &model, &rho0, 30, &plan).unwrap();
        let w_exact = exact.momentum.last().unwrap();
        println!("fig1 exact: xi(30)={:.3}", exact.ipr.last().unwrap());
        for seed in [1u64, 2, 3, 77] {
            for m in [20usize, 1000] {
                let mc = run_trajectories(&params, &model, &psi0, 30, m, seed, &plan).unwrap();
                let l1 = mc.momentum.last().unwrap().l1_distance(w_exact).unwrap();
                println!("  seed={seed} M={m}: L1={l1:.4} xi={:.3}", mc.ipr.last().unwrap());
            }
        }
        let ideal = run_trajectories(&params, &NoiseModel::off(), &psi0, 30, 1, 1, &plan).unwrap();
        println!("  ideal xi(30)={:.3} (N/4={})", ideal.ipr.last().unwrap(), params.dim() / 4);

        // Shape details for the M=20 qualitative check.
        let shape = |label: &str, w: &qsaw_core::observables::MomentumDistribution| {
            let peak_n = (-32i64..32)
                .max_by(|a, b| w.value(*a).unwrap().partial_cmp(&w.value(*b).unwrap()).unwrap())
                .unwrap();
            let center: f64 = (-4i64..=4).map(|n| w.value(n).unwrap()).sum();
            let far: f64 = (-32i64..=-24)
                .chain(24..32)
                .map(|n| w.value(n).unwrap())
                .sum();
            println!("  {label}: peak_n={peak_n} mass|n|<=4 {center:.4} mass|n|>=24 {far:.4}");
        };
        shape("exact", w_exact);
        for seed in [1u64, 2, 3] {
            let mc = run_trajectories(&params, &model, &psi0, 30, 20, seed, &plan).unwrap();
            shape(&format!("M=20 seed={seed}"), mc.momentum.last().unwrap());
        }
    }

    if want("decay") {
        println!("decay-law sweep (M=50, t=50, window 1..50):");
        let mut num = 0.0;
        let mut den = 0.0;
        let mut per_k = std::collections::BTreeMap::new();
        for qubits in [4usize, 6, 8] {
            for gamma in [2.5e-4, 5e-4, 1e-3] {
                for chaos in [-0.5f64, 0.5] {
                    let params = MapParams::one_cell(qubits, chaos).unwrap();
                    let model = NoiseModel::new(gamma).unwrap();
                    let psi0 = basis_state(&params, 0).unwrap();
                    let plan = RunPlan::with_fidelity(psi0.clone());
                    let rec =
                        run_trajectories(&params, &model, &psi0, 50, 50, 1, &plan).unwrap();
                    let Ok(fit) =
                        fit_decay_rate(rec.fidelity.as_ref().unwrap(), DEFAULT_FIT_WINDOW)
                    else {
                        println!("  nq={qubits} K={chaos:+.1} gamma={gamma:.1e}: fit failed (fast decay)");
                        continue;
                    };
                    let geff = qubits as f64 * params.gates_per_iteration() as f64 * gamma;
                    let c = fit.rate / geff;
                    println!(
                        "  nq={qubits} K={chaos:+.1} gamma={gamma:.1e}: rate={:.5} (se {:.5}) geff={geff:.4} C={c:.4}",
                        fit.rate, fit.stderr
                    );
                    num += fit.rate * geff;
                    den += geff * geff;
                    let e = per_k.entry(format!("{chaos:+.1}")).or_insert((0.0, 0.0));
                    e.0 += fit.rate * geff;
                    e.1 += geff * geff;
                }
            }
        }
        println!("  overall C = {:.4}", num / den);
        for (k, (n, d)) in per_k {
            println!("  K={k}: C = {:.4}", n / d);
        }
    }

    if want("exactg") {
        // Cross-check: γ from the exact density-matrix engine, independent
        // of the trajectory unraveling.
        for (qubits, gamma) in [(4usize, 1e-3f64), (6, 1e-3)] {
            let params = MapParams::one_cell(qubits, -0.5).unwrap();
            let model = NoiseModel::new(gamma).unwrap();
            let psi0 = basis_state(&params, 0).unwrap();
            let plan = RunPlan::with_fidelity(psi0.clone());
            let rho0 = DensityMatrix::from_pure(&psi0);
            let rec = run_exact(&params, &model, &rho0, 50, &plan).unwrap();
            match fit_decay_rate(rec.fidelity.as_ref().unwrap(), DEFAULT_FIT_WINDOW) {
                Ok(fit) => {
                    let geff = qubits as f64 * params.gates_per_iteration() as f64 * gamma;
                    println!(
                        "exactg nq={qubits} gamma={gamma:.0e}: rate={:.5} C={:.4}",
                        fit.rate,
                        fit.rate / geff
                    );
                }
                Err(e) => println!("exactg nq={qubits}: {e}"),
            }
        }
    }

    if want("nup") {
        // Mean excited population per gate slot over one late iteration.
        use qsaw_core::circuit::{apply_gate, build_map_sequence};
        for chaos in [-0.5f64, 0.5] {
            let params = MapParams::one_cell(8, chaos).unwrap();
            let mut psi = basis_state(&params, 0).unwrap();
            let seq = build_map_sequence(&params);
            for _ in 0..20 {
                for g in seq.gates() {
                    apply_gate(&mut psi, g).unwrap();
                }
            }
            let mut acc = 0.0;
            let mut slots = 0.0;
            for g in seq.gates() {
                apply_gate(&mut psi, g).unwrap();
                let probs: Vec<f64> = psi.as_slice().iter().map(|a| a.norm_sqr()).collect();
                let mut nup = 0.0;
                for (j, p) in probs.iter().enumerate() {
                    nup += *p * (j.count_ones() as f64);
                }
                acc += nup;
                slots += 1.0;
            }
            println!("nup K={chaos:+.1}: mean excited qubits per gate slot = {:.3}", acc / slots);
        }
    }

    if want("touched") {
        // Diagnostic: damping applied only to the qubits acted on by each
        // gate, instead of all qubits. Not the shipped model.
        use qsaw_core::circuit::{apply_gate, build_map_sequence, Gate};
        use qsaw_core::noise::stochastic_step;
        use qsaw_core::state::inner;
        use rand_chacha::ChaCha8Rng;
        use rand_core::SeedableRng;
        let mut num = 0.0;
        let mut den = 0.0;
        for qubits in [4usize, 6, 8] {
            for gamma in [5e-4, 1e-3] {
                for chaos in [-0.5f64, 0.5] {
                    let params = MapParams::one_cell(qubits, chaos).unwrap();
                    let model = NoiseModel::new(gamma).unwrap();
                    let psi0 = basis_state(&params, 0).unwrap();
                    let seq = build_map_sequence(&params);
                    let t_max = 50usize;
                    let count = 50usize;
                    let mut ideal = vec![psi0.clone()];
                    {
                        let mut cur = psi0.clone();
                        let mut oracle = qsaw_core::circuit::MapOracle::new(&params);
                        for _ in 0..t_max {
                            oracle.apply(&mut cur).unwrap();
                            ideal.push(cur.clone());
                        }
                    }
                    let mut sums = vec![0.0f64; t_max + 1];
                    for traj in 0..count {
                        let mut rng = ChaCha8Rng::seed_from_u64(1);
                        rng.set_stream(traj as u64);
                        let mut state = psi0.clone();
                        sums[0] += 1.0;
                        for t in 1..=t_max {
                            for g in seq.gates() {
                                apply_gate(&mut state, g).unwrap();
                                match *g {
                                    Gate::Hadamard { qubit } | Gate::Phase { qubit, .. } => {
                                        stochastic_step(&mut state, qubit, &model, &mut rng)
                                            .unwrap();
                                    }
                                    Gate::ControlledPhase { control, target, .. } => {
                                        stochastic_step(&mut state, control, &model, &mut rng)
                                            .unwrap();
                                        stochastic_step(&mut state, target, &model, &mut rng)
                                            .unwrap();
                                    }
                                    Gate::Swap { a, b } => {
                                        stochastic_step(&mut state, a, &model, &mut rng).unwrap();
                                        stochastic_step(&mut state, b, &model, &mut rng).unwrap();
                                    }
                                }
                            }
                            sums[t] += inner(&ideal[t], &state).unwrap().norm_sqr();
                        }
                    }
                    let series = qsaw_core::observables::FidelitySeries::new(
                        sums.iter().map(|s| s / count as f64).collect(),
                    );
                    if let Ok(fit) = fit_decay_rate(&series, DEFAULT_FIT_WINDOW) {
                        let geff = qubits as f64 * params.gates_per_iteration() as f64 * gamma;
                        println!(
                            "touched nq={qubits} K={chaos:+.1} gamma={gamma:.0e}: rate={:.5} C={:.4}",
                            fit.rate,
                            fit.rate / geff
                        );
                        num += fit.rate * geff;
                        den += geff * geff;
                    }
                }
            }
        }
        println!("touched overall C = {:.4}", num / den);
    }

    if want("mc") {
        let params = MapParams::one_cell(4, -0.5).unwrap();
        let model = NoiseModel::new(0.005).unwrap();
        let psi0 = basis_state(&params, 0).unwrap();
        let rho0 = DensityMatrix::from_pure(&psi0);
        let exact = run_exact(&params, &model, &rho0, 20, &RunPlan::default()).unwrap();
        let exact_rho = exact.final_density.unwrap();
        for seed in [1u64, 2, 9] {
            let td_at = |m: usize| {
                let rec = run_trajectories(
                    &params,
                    &model,
                    &psi0,
                    20,
                    m,
                    seed,
                    &RunPlan::default(),
                )
                .unwrap();
                let rho = reconstruct_density(rec.final_ensemble.as_ref().unwrap()).unwrap();
                trace_distance(&rho, &exact_rho).unwrap()
            };
            let t2000 = td_at(2000);
            let t8000 = td_at(8000);
            println!(
                "mc seed={seed}: TD(2000)={t2000:.4} TD(8000)={t8000:.4} ratio={:.3}",
                t2000 / t8000
            );
        }
    }

    if want("fig4") {
        println!("late-time IPR (window 90..100, t=100):");
        for gamma in [0.001, 0.0] {
            for qubits in [4usize, 6, 8] {
                let params = MapParams::with_kick(qubits, 3f64.sqrt(), 2f64.sqrt()).unwrap();
                let model = NoiseModel::new(gamma).unwrap();
                let psi0 = basis_state(&params, 0).unwrap();
                let m = if gamma > 0.0 { 50 } else { 1 };
                let rec = run_trajectories(
                    &params,
                    &model,
                    &psi0,
                    100,
                    m,
                    1,
                    &RunPlan::default(),
                )
                .unwrap();
                let late: f64 = rec.ipr[90..=100].iter().sum::<f64>() / 11.0;
                println!("  gamma={gamma:.0e} nq={qubits}: xi_late={late:.3}");
            }
        }
    }

    if want("fig5") {
        println!("xi/xi0 over t in [30,40], n_q=6:");
        let params = MapParams::with_kick(6, 3f64.sqrt(), 2f64.sqrt()).unwrap();
        let psi0 = basis_state(&params, 0).unwrap();
        let ideal = run_trajectories(
            &params,
            &NoiseModel::off(),
            &psi0,
            40,
            1,
            1,
            &RunPlan::default(),
        )
        .unwrap();
        let xi0: f64 = ideal.ipr[30..=40].iter().sum::<f64>() / 11.0;
        for gamma in [1e-4, 5e-4, 2e-3, 1e-2, 5e-2, 0.2] {
            let rec = run_trajectories(
                &params,
                &NoiseModel::new(gamma).unwrap(),
                &psi0,
                40,
                50,
                1,
                &RunPlan::default(),
            )
            .unwrap();
            let xi: f64 = rec.ipr[30..=40].iter().sum::<f64>() / 11.0;
            println!("  gamma={gamma:.1e}: xi={xi:.3} ratio={:.3}", xi / xi0);
        }
        println!("  xi0={xi0:.3}");
    }

    if want("fig6") {
        println!("attractor runs (K=1, n_q=8, M=50, window 90..99):");
        let params = MapParams::one_cell(8, 1.0).unwrap();
        let husimi = HusimiPlan { n_theta: 128, n_n: 128, windows: vec![(90, 99)] };
        let mut grids = std::collections::BTreeMap::new();
        for gamma in [0.01, 0.05, 0.1] {
            for n0 in [60i64, 0] {
                let psi0 = basis_state(&params, n0).unwrap();
                let plan = RunPlan { husimi: Some(husimi.clone()), ..Default::default() };
                // Distinct seeds per initial state, so late-time agreement is
                // attractor statistics rather than trajectory synchronization.
                let seed = if n0 == 0 { 2 } else { 1 };
                let rec = run_trajectories(
                    &params,
                    &NoiseModel::new(gamma).unwrap(),
                    &psi0,
                    99,
                    50,
                    seed,
                    &plan,
                )
                .unwrap();
                let dist = rec.husimi[0].dist.clone();
                println!(
                    "  gamma={gamma} n0={n0}: mean|n|={:.2} (N/16={})",
                    dist.mean_abs_momentum(),
                    params.dim() / 16
                );
                grids.insert((format!("{gamma}"), n0), dist);
            }
        }
        for gamma in ["0.01", "0.05", "0.1"] {
            let a = &grids[&(gamma.to_string(), 60)];
            let b = &grids[&(gamma.to_string(), 0)];
            println!("  gamma={gamma}: L1(n60, n0) = {:.4}", a.l1_distance(b).unwrap());
        }
    }

    if want("tf") {
        let params = MapParams::one_cell(6, -0.5).unwrap();
        let model = NoiseModel::new(1e-3).unwrap();
        let psi0 = basis_state(&params, 0).unwrap();
        let plan = RunPlan::with_fidelity(psi0.clone());
        let rec = run_trajectories(&params, &model, &psi0, 10, 200, 1, &plan).unwrap();
        let f = rec.fidelity.as_ref().unwrap().values();
        let c_rate = 0.08 * 6.0 * params.gates_per_iteration() as f64 * 1e-3;
        let predicted = -(0.9f64.ln()) / c_rate;
        let crossing = f.windows(2).position(|w| w[0] >= 0.9 && w[1] < 0.9).map(|t| {
            t as f64 + (f[t] - 0.9) / (f[t] - f[t + 1])
        });
        println!("tf: predicted={predicted:.3} crossing={crossing:?} f={f:?}");
    }

    if want("fig2") {
        let params = MapParams::one_cell(8, -0.5).unwrap();
        let n0 = (0.1 * 256f64).round();
        let psi0 = basis_state(&params, n0 as i64).unwrap();
        let plan = RunPlan {
            husimi: Some(HusimiPlan { n_theta: 256, n_n: 256, windows: vec![(0, 9)] }),
            ..Default::default()
        };
        let rec = run_trajectories(
            &params,
            &NoiseModel::off(),
            &psi0,
            9,
            1,
            1,
            &plan,
        )
        .unwrap();
        let husimi = &rec.husimi[0].dist;
        let (sigma_theta, sigma_n) = quantum_cell_widths(params.planck());
        let classical = classical_density(&ClassicalDensityConfig {
            chaos: -0.5,
            cells: 1,
            dim: 256,
            p0: params.planck() * n0,
            n_pts: 200_000,
            window: (0, 9),
            sigma_theta,
            sigma_n,
            n_theta: 256,
            n_n: 256,
        })
        .unwrap();
        println!(
            "fig2: corr(classical, husimi) = {:.4}",
            classical.correlation(husimi).unwrap()
        );
    }
}
