//! Experiment configuration: flat `key = value` text, fail-closed.
//!
//! Values are integers, decimals, or exact irrational tokens parsed to full
//! double precision: `pi`, `<c>pi`, `<c>pi/<d>`, `sqrt2`, `sqrt3` (each with
//! optional leading `-` and optional `/<d>` divisor). Truncating `sqrt3` to
//! a few decimals measurably shifts localization lengths, hence the tokens.
//!
//! Unknown or duplicate keys are rejected with the offending key named, as
//! are keys that do not apply to the selected engine.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Which engine a run drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineChoice {
    Exact,
    Trajectories,
    Classical,
}

impl EngineChoice {
    pub fn token(&self) -> &'static str {
        match self {
            EngineChoice::Exact => "exact",
            EngineChoice::Trajectories => "trajectories",
            EngineChoice::Classical => "classical",
        }
    }
}

/// Initial momentum state: an integer `n`, or a fraction of `N` rounded to
/// the nearest level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Momentum(i64),
    FractionOfDim(f64),
}

impl InitialState {
    pub fn resolve(&self, dim: usize) -> i64 {
        match *self {
            InitialState::Momentum(n) => n,
            InitialState::FractionOfDim(f) => (f * dim as f64).round() as i64,
        }
    }
}

/// Output families a run can write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ObservableChoice {
    /// Fidelity and IPR time series.
    Series,
    /// Momentum distribution snapshots.
    Momentum,
    /// Window-averaged Husimi grids.
    Husimi,
}

impl ObservableChoice {
    pub fn token(&self) -> &'static str {
        match self {
            ObservableChoice::Series => "series",
            ObservableChoice::Momentum => "wn",
            ObservableChoice::Husimi => "husimi",
        }
    }
}

/// One experiment: engine, map parameters, noise, run length and outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub engine: EngineChoice,
    pub qubits: usize,
    /// Chaos parameter `K`.
    pub chaos: f64,
    /// Kick strength `k`; absent selects the one-cell mode `T = 2π/N`.
    pub kick: Option<f64>,
    /// Torus length in classical cells.
    pub cells: u32,
    pub gamma: f64,
    /// Trajectory count (Monte Carlo engine).
    pub trajectories: Option<usize>,
    pub t_max: usize,
    pub seed: u64,
    pub initial: InitialState,
    pub observables: Vec<ObservableChoice>,
    pub grid_n_theta: Option<usize>,
    pub grid_n_n: Option<usize>,
    /// Inclusive Husimi accumulation windows.
    pub husimi_windows: Vec<(usize, usize)>,
    pub classical_points: Option<usize>,
    pub classical_window: Option<(usize, usize)>,
    pub threads: Option<usize>,
    pub out_dir: Option<String>,
    pub exact_cap: Option<usize>,
}

impl ExperimentConfig {
    /// A minimal quantum configuration; fields default as in [`parse_config`].
    pub fn new(name: &str, engine: EngineChoice, qubits: usize, chaos: f64) -> Self {
        Self {
            name: name.to_string(),
            engine,
            qubits,
            chaos,
            kick: None,
            cells: 1,
            gamma: 0.0,
            trajectories: None,
            t_max: 0,
            seed: 0,
            initial: InitialState::Momentum(0),
            observables: vec![ObservableChoice::Series, ObservableChoice::Momentum],
            grid_n_theta: None,
            grid_n_n: None,
            husimi_windows: Vec::new(),
            classical_points: None,
            classical_window: None,
            threads: None,
            out_dir: None,
            exact_cap: None,
        }
    }

    /// Map parameters implied by this configuration.
    pub fn map_params(&self) -> Result<crate::params::MapParams> {
        match self.kick {
            Some(k) => crate::params::MapParams::with_kick(self.qubits, k, self.chaos),
            None => crate::params::MapParams::one_cell(self.qubits, self.chaos),
        }
    }

    /// Canonical `key = value` form; reparses to an equal configuration.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        push("name", self.name.clone());
        push("engine", self.engine.token().to_string());
        push("n_q", self.qubits.to_string());
        push("K", format_f64(self.chaos));
        if let Some(k) = self.kick {
            push("k", format_f64(k));
        }
        push("L", self.cells.to_string());
        if self.engine != EngineChoice::Classical {
            push("gamma", format_f64(self.gamma));
        }
        if let Some(m) = self.trajectories {
            push("m", m.to_string());
        }
        push("t_max", self.t_max.to_string());
        push("seed", self.seed.to_string());
        match self.initial {
            InitialState::Momentum(n) => push("initial_n", n.to_string()),
            InitialState::FractionOfDim(f) => push("initial_n_frac", format_f64(f)),
        }
        if self.engine != EngineChoice::Classical {
            let tokens: Vec<&str> = self.observables.iter().map(|o| o.token()).collect();
            push("observables", tokens.join(","));
        }
        if let Some(v) = self.grid_n_theta {
            push("grid_n_theta", v.to_string());
        }
        if let Some(v) = self.grid_n_n {
            push("grid_n_n", v.to_string());
        }
        if !self.husimi_windows.is_empty() {
            push("husimi_windows", format_windows(&self.husimi_windows));
        }
        if let Some(v) = self.classical_points {
            push("classical_points", v.to_string());
        }
        if let Some(w) = self.classical_window {
            push("classical_window", format_windows(&[w]));
        }
        if let Some(v) = self.threads {
            push("threads", v.to_string());
        }
        if let Some(v) = &self.out_dir {
            push("out_dir", v.clone());
        }
        if let Some(v) = self.exact_cap {
            push("exact_cap", v.to_string());
        }
        out
    }
}

/// Shortest decimal that round-trips to the same `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x}")
}

fn format_windows(windows: &[(usize, usize)]) -> String {
    windows.iter().map(|(a, b)| format!("{a}:{b}")).collect::<Vec<_>>().join(",")
}

const KNOWN_KEYS: &[&str] = &[
    "name",
    "engine",
    "n_q",
    "K",
    "k",
    "L",
    "gamma",
    "m",
    "t_max",
    "seed",
    "initial_n",
    "initial_n_frac",
    "observables",
    "grid_n_theta",
    "grid_n_n",
    "husimi_windows",
    "classical_points",
    "classical_window",
    "threads",
    "out_dir",
    "exact_cap",
];

/// Parses a configuration, rejecting unknown keys, duplicates, malformed
/// values and engine-inapplicable keys.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut seen = BTreeSet::new();
    let mut fields: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got `{line}`",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown key \"{key}\"")));
        }
        if !seen.insert(key.clone()) {
            return Err(Error::Config(format!("duplicate key \"{key}\"")));
        }
        fields.push((key, value));
    }

    let lookup = |key: &str| fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let bad = |key: &str, value: &str, what: &str| {
        Error::Config(format!("key \"{key}\": cannot parse `{value}` as {what}"))
    };

    let engine = match lookup("engine") {
        Some("exact") => EngineChoice::Exact,
        Some("trajectories") => EngineChoice::Trajectories,
        Some("classical") => EngineChoice::Classical,
        Some(other) => {
            return Err(Error::Config(format!(
                "key \"engine\": `{other}` is not exact|trajectories|classical"
            )))
        }
        None => return Err(Error::Config("missing required key \"engine\"".into())),
    };

    let parse_usize = |key: &str| -> Result<Option<usize>> {
        lookup(key)
            .map(|v| v.parse::<usize>().map_err(|_| bad(key, v, "a nonnegative integer")))
            .transpose()
    };
    let parse_u64 = |key: &str| -> Result<Option<u64>> {
        lookup(key)
            .map(|v| v.parse::<u64>().map_err(|_| bad(key, v, "an unsigned integer")))
            .transpose()
    };
    let parse_value = |key: &str| -> Result<Option<f64>> {
        lookup(key).map(|v| parse_number_expr(v).map_err(|_| bad(key, v, "a number"))).transpose()
    };

    let qubits = parse_usize("n_q")?
        .ok_or_else(|| Error::Config("missing required key \"n_q\"".into()))?;
    let chaos =
        parse_value("K")?.ok_or_else(|| Error::Config("missing required key \"K\"".into()))?;
    let t_max = parse_usize("t_max")?
        .ok_or_else(|| Error::Config("missing required key \"t_max\"".into()))?;

    let reject_for_engine = |key: &str, allowed: bool| -> Result<()> {
        if lookup(key).is_some() && !allowed {
            return Err(Error::Config(format!(
                "key \"{key}\" does not apply to engine {}",
                engine.token()
            )));
        }
        Ok(())
    };
    let quantum = engine != EngineChoice::Classical;
    reject_for_engine("gamma", quantum)?;
    reject_for_engine("m", engine == EngineChoice::Trajectories)?;
    reject_for_engine("observables", quantum)?;
    reject_for_engine("husimi_windows", quantum)?;
    reject_for_engine("classical_points", !quantum)?;
    reject_for_engine("classical_window", !quantum)?;
    reject_for_engine("exact_cap", engine == EngineChoice::Exact)?;

    let trajectories = parse_usize("m")?;
    if engine == EngineChoice::Trajectories {
        match trajectories {
            Some(m) if m >= 1 => {}
            Some(_) => return Err(Error::Config("key \"m\": need at least 1 trajectory".into())),
            None => return Err(Error::Config("missing required key \"m\"".into())),
        }
    }

    let initial = match (lookup("initial_n"), lookup("initial_n_frac")) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "keys \"initial_n\" and \"initial_n_frac\" are mutually exclusive".into(),
            ))
        }
        (Some(v), None) => InitialState::Momentum(
            v.parse::<i64>().map_err(|_| bad("initial_n", v, "an integer"))?,
        ),
        (None, Some(v)) => InitialState::FractionOfDim(
            parse_number_expr(v).map_err(|_| bad("initial_n_frac", v, "a number"))?,
        ),
        (None, None) => InitialState::Momentum(0),
    };

    let observables = match lookup("observables") {
        None if quantum => vec![ObservableChoice::Series, ObservableChoice::Momentum],
        None => Vec::new(),
        Some(list) => {
            let mut out = Vec::new();
            for token in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let choice = match token {
                    "series" => ObservableChoice::Series,
                    "wn" => ObservableChoice::Momentum,
                    "husimi" => ObservableChoice::Husimi,
                    other => {
                        return Err(Error::Config(format!(
                            "key \"observables\": `{other}` is not series|wn|husimi"
                        )))
                    }
                };
                if !out.contains(&choice) {
                    out.push(choice);
                }
            }
            if out.is_empty() {
                return Err(Error::Config("key \"observables\": empty list".into()));
            }
            out
        }
    };

    let husimi_windows = match lookup("husimi_windows") {
        Some(v) => parse_windows(v).map_err(|_| bad("husimi_windows", v, "t0:t1 windows"))?,
        None => Vec::new(),
    };
    let classical_window = match lookup("classical_window") {
        Some(v) => Some(
            parse_windows(v)
                .ok()
                .filter(|w| w.len() == 1)
                .map(|w| w[0])
                .ok_or_else(|| bad("classical_window", v, "a single t0:t1 window"))?,
        ),
        None => None,
    };

    let cells = match lookup("L") {
        Some(v) => {
            let l = v.parse::<u32>().map_err(|_| bad("L", v, "a positive integer"))?;
            if l == 0 {
                return Err(Error::Config("key \"L\": must be at least 1".into()));
            }
            l
        }
        None => 1,
    };

    let gamma = parse_value("gamma")?.unwrap_or(0.0);
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(Error::Config(format!("key \"gamma\": {gamma} must be finite and ≥ 0")));
    }

    let threads = parse_usize("threads")?;
    if threads == Some(0) {
        return Err(Error::Config("key \"threads\": must be at least 1".into()));
    }

    let cfg = ExperimentConfig {
        name: lookup("name").unwrap_or("run").to_string(),
        engine,
        qubits,
        chaos,
        kick: parse_value("k")?,
        cells,
        gamma,
        trajectories,
        t_max,
        seed: parse_u64("seed")?.unwrap_or(0),
        initial,
        observables,
        grid_n_theta: parse_usize("grid_n_theta")?,
        grid_n_n: parse_usize("grid_n_n")?,
        husimi_windows,
        classical_points: parse_usize("classical_points")?,
        classical_window,
        threads,
        out_dir: lookup("out_dir").map(str::to_string),
        exact_cap: parse_usize("exact_cap")?,
    };
    cfg.map_params()?;
    Ok(cfg)
}

fn parse_windows(text: &str) -> std::result::Result<Vec<(usize, usize)>, ()> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (a, b) = part.split_once(':').ok_or(())?;
        let a = a.trim().parse::<usize>().map_err(|_| ())?;
        let b = b.trim().parse::<usize>().map_err(|_| ())?;
        if a > b {
            return Err(());
        }
        out.push((a, b));
    }
    if out.is_empty() {
        return Err(());
    }
    Ok(out)
}

/// Parses a numeric literal or irrational token to full double precision.
pub fn parse_number_expr(text: &str) -> Result<f64> {
    let err = || Error::Config(format!("cannot parse value `{text}`"));
    let s = text.trim();
    let (sign, s) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, s),
    };
    if s.is_empty() {
        return Err(err());
    }
    // Plain decimal first (also covers exponent notation).
    if let Ok(v) = s.parse::<f64>() {
        return Ok(sign * v);
    }
    let (body, divisor) = match s.split_once('/') {
        Some((b, d)) => {
            let d: f64 = d.trim().parse().map_err(|_| err())?;
            if d == 0.0 {
                return Err(err());
            }
            (b.trim(), d)
        }
        None => (s, 1.0),
    };
    let base = if body == "sqrt2" {
        2f64.sqrt()
    } else if body == "sqrt3" {
        3f64.sqrt()
    } else if let Some(coef) = body.strip_suffix("pi") {
        let coef = coef.trim();
        let c: f64 = if coef.is_empty() { 1.0 } else { coef.parse().map_err(|_| err())? };
        c * PI
    } else {
        return Err(err());
    };
    Ok(sign * base / divisor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn irrational_tokens_parse_to_full_precision() {
        assert_eq!(parse_number_expr("sqrt2").unwrap(), 2f64.sqrt());
        assert_eq!(parse_number_expr("sqrt3").unwrap(), 3f64.sqrt());
        assert_eq!(parse_number_expr("-sqrt2").unwrap(), -2f64.sqrt());
        assert_eq!(parse_number_expr("pi").unwrap(), PI);
        assert_eq!(parse_number_expr("2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_number_expr("2pi/64").unwrap(), 2.0 * PI / 64.0);
        assert_eq!(parse_number_expr("pi/4").unwrap(), PI / 4.0);
        assert_eq!(parse_number_expr("sqrt2/2").unwrap(), 2f64.sqrt() / 2.0);
        assert_eq!(parse_number_expr("-0.5").unwrap(), -0.5);
        assert_eq!(parse_number_expr("1e-3").unwrap(), 1e-3);
        assert!(parse_number_expr("sqrt5").is_err());
        assert!(parse_number_expr("pi/0").is_err());
        assert!(parse_number_expr("").is_err());
    }

    fn sample_text() -> &'static str {
        "\
# comment line
name = demo
engine = trajectories
n_q = 6
k = sqrt3
K = sqrt2
gamma = 0.001
m = 50
t_max = 30
seed = 7
initial_n = 0
observables = series,wn
"
    }

    #[test]
    fn parses_a_full_example() {
        let cfg = parse_config(sample_text()).unwrap();
        assert_eq!(cfg.name, "demo");
        assert_eq!(cfg.engine, EngineChoice::Trajectories);
        assert_eq!(cfg.qubits, 6);
        assert_eq!(cfg.kick, Some(3f64.sqrt()));
        assert_eq!(cfg.chaos, 2f64.sqrt());
        assert_eq!(cfg.trajectories, Some(50));
        assert_eq!(cfg.initial, InitialState::Momentum(0));
        let params = cfg.map_params().unwrap();
        assert_eq!(params.dim(), 64);
    }

    #[test]
    fn unknown_key_is_named() {
        let text = sample_text().replace("gamma", "gama");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("gama"), "{err}");
    }

    #[test]
    fn duplicate_and_malformed_keys_are_rejected() {
        let text = format!("{}seed = 8\n", sample_text());
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");

        let text = sample_text().replace("m = 50", "m = fifty");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("\"m\""), "{err}");
    }

    #[test]
    fn engine_specific_keys_are_fenced() {
        let text = sample_text().replace("engine = trajectories", "engine = exact");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("\"m\""), "{err}");

        let classical = "\
engine = classical
n_q = 8
K = -0.5
t_max = 9
classical_window = 0:9
";
        let cfg = parse_config(classical).unwrap();
        assert_eq!(cfg.classical_window, Some((0, 9)));
        let with_gamma = format!("{classical}gamma = 0.1\n");
        assert!(parse_config(&with_gamma).is_err());
    }

    #[test]
    fn missing_required_keys_are_reported() {
        for key in ["engine", "n_q", "K", "t_max"] {
            let text: String = sample_text()
                .lines()
                .filter(|l| !l.starts_with(key))
                .map(|l| format!("{l}\n"))
                .collect();
            let err = parse_config(&text).unwrap_err();
            assert!(err.to_string().contains(key), "{key}: {err}");
        }
    }

    #[test]
    fn windows_syntax() {
        let text = format!(
            "{}husimi_windows = 0:9, 40:49,90:99\ngrid_n_theta = 128\ngrid_n_n = 64\n",
            sample_text().replace("observables = series,wn", "observables = husimi")
        );
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.husimi_windows, vec![(0, 9), (40, 49), (90, 99)]);
        let bad = format!("{}husimi_windows = 9:0\n", sample_text());
        assert!(parse_config(&bad).is_err());
    }

    fn config_strategy() -> impl Strategy<Value = ExperimentConfig> {
        let engine = prop_oneof![
            Just(EngineChoice::Exact),
            Just(EngineChoice::Trajectories),
            Just(EngineChoice::Classical)
        ];
        (
            engine,
            2usize..8,
            -2.0f64..2.0,
            proptest::option::of(0.5f64..3.0),
            0.0f64..0.2,
            1usize..64,
            1usize..40,
            any::<u64>(),
            prop_oneof![
                (-4i64..4).prop_map(InitialState::Momentum),
                (0.0f64..0.9).prop_map(InitialState::FractionOfDim)
            ],
            "[a-z][a-z0-9_-]{0,10}",
        )
            .prop_map(
                |(engine, qubits, chaos, kick, gamma, m, t_max, seed, initial, name)| {
                    let mut cfg = ExperimentConfig::new(&name, engine, qubits, chaos.max(0.01));
                    if let Some(k) = kick {
                        cfg.kick = Some(k);
                        cfg.chaos = chaos.abs().max(0.01); // keep T = K/k positive
                    }
                    cfg.t_max = t_max;
                    cfg.seed = seed;
                    cfg.initial = initial;
                    match engine {
                        EngineChoice::Trajectories => {
                            cfg.gamma = gamma;
                            cfg.trajectories = Some(m);
                        }
                        EngineChoice::Exact => {
                            cfg.gamma = gamma;
                            cfg.exact_cap = Some(256);
                        }
                        EngineChoice::Classical => {
                            cfg.observables = Vec::new();
                            cfg.classical_points = Some(1000);
                            cfg.classical_window = Some((0, t_max));
                        }
                    }
                    cfg
                },
            )
    }

    proptest! {
        // Serialization round-trips to an identical configuration.
        #[test]
        fn serialize_parse_round_trip(cfg in config_strategy()) {
            let text = cfg.serialize();
            let back = parse_config(&text).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
