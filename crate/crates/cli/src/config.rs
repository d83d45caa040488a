//! Experiment configuration: a nested key-value file (TOML dialect) binding
//! an operator, a noise model, a solver setup, and per-command blocks.
//!
//! Parsing is not fail-fast: every problem found is reported, each naming
//! the offending key. A parsed config re-serializes to a canonical form that
//! parses back to the same config.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use viergo_core::operators::{
    make_linear, make_logistic_game, make_quadratic_quartic_game, make_quasi_bilinear, OperatorSpec,
};
use viergo_core::oracle::NoiseModel;
use viergo_core::solvers::{max_step_size, Algorithm, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorConfig {
    Linear {
        mu: f64,
        dimension: u64,
    },
    QuadraticQuarticGame {
        block_dim: u64,
        op_seed: u64,
        conditioning: f64,
    },
    LogisticGame,
    QuasiBilinear {
        epsilon: f64,
    },
}

impl OperatorConfig {
    pub fn kind_str(&self) -> &'static str {
        match self {
            OperatorConfig::Linear { .. } => "linear",
            OperatorConfig::QuadraticQuarticGame { .. } => "quadratic_quartic_game",
            OperatorConfig::LogisticGame => "logistic_game",
            OperatorConfig::QuasiBilinear { .. } => "quasi_bilinear",
        }
    }

    /// Instantiates the operator. Games also return their `GameSpec`.
    pub fn build(&self) -> (OperatorSpec, Option<viergo_core::operators::GameSpec>) {
        match self {
            OperatorConfig::Linear { mu, dimension } => {
                (make_linear(*mu, *dimension as usize), None)
            }
            OperatorConfig::QuadraticQuarticGame {
                block_dim,
                op_seed,
                conditioning,
            } => {
                let game =
                    make_quadratic_quartic_game(*block_dim as usize, *op_seed, *conditioning)
                        .expect("validated at parse time");
                (game.operator().clone(), Some(game))
            }
            OperatorConfig::LogisticGame => {
                let game = make_logistic_game();
                (game.operator().clone(), Some(game))
            }
            OperatorConfig::QuasiBilinear { epsilon } => {
                let game = make_quasi_bilinear(*epsilon);
                (game.operator().clone(), Some(game))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum X0Spec {
    Zero,
    Ones,
}

#[derive(Debug, Clone, PartialEq)]
pub enum X0Config {
    Named(X0Spec),
    Literal(Vec<f64>),
}

impl X0Config {
    pub fn resolve(&self, dimension: usize) -> Result<Vec<f64>, String> {
        match self {
            X0Config::Named(X0Spec::Zero) => Ok(vec![0.0; dimension]),
            X0Config::Named(X0Spec::Ones) => Ok(vec![1.0; dimension]),
            X0Config::Literal(v) => {
                if v.len() != dimension {
                    Err(format!(
                        "solver.x0 has {} entries but the operator dimension is {}",
                        v.len(),
                        dimension
                    ))
                } else {
                    Ok(v.clone())
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSection {
    pub algorithm: Algorithm,
    pub gamma: f64,
    pub alpha: f64,
    pub horizon: u64,
    pub burn_in: u64,
    pub record_stride: u64,
    pub x0: X0Config,
    pub allow_inadmissible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasSweepSection {
    pub gammas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterMode {
    /// No centering; reproduces the uncentered histograms.
    Zero,
    /// Center at the estimated stationary mean of the test function.
    PiHat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunctionConfig {
    GameValue,
    Coordinate(u64),
    SquaredError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CltSection {
    pub n_reps: u64,
    pub center_mode: CenterMode,
    pub horizons: Vec<u64>,
    pub gammas: Vec<f64>,
    pub test_function: TestFunctionConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RrSection {
    pub coupling: viergo_core::refinement::Coupling,
    pub n_reps: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateSection {
    pub n_samples: u64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub dir: String,
    pub emit_svg: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub operator: OperatorConfig,
    pub noise: NoiseModel,
    pub solver: SolverSection,
    pub bias_sweep: Option<BiasSweepSection>,
    pub clt: Option<CltSection>,
    pub rr: Option<RrSection>,
    pub validate: Option<ValidateSection>,
    pub output: OutputSection,
}

impl ExperimentConfig {
    /// Builds the solver config for a given step size and start point.
    pub fn solver_config(&self, op: &OperatorSpec) -> Result<SolverConfig, String> {
        let x0 = self.solver.x0.resolve(op.dimension)?;
        let mut cfg = SolverConfig::new(
            self.solver.algorithm,
            self.solver.gamma,
            self.solver.horizon,
            x0,
            self.seed,
        )
        .with_alpha(self.solver.alpha)
        .with_burn_in(self.solver.burn_in)
        .with_record_stride(self.solver.record_stride);
        cfg.allow_inadmissible = self.solver.allow_inadmissible;
        Ok(cfg)
    }
}

struct Walker {
    errors: Vec<String>,
}

impl Walker {
    fn check_keys(&mut self, table: &toml::Table, path: &str, known: &[&str]) {
        let known: BTreeSet<&str> = known.iter().copied().collect();
        for key in table.keys() {
            if !known.contains(key.as_str()) {
                self.errors.push(format!(
                    "unknown key `{}{}{}`",
                    path,
                    if path.is_empty() { "" } else { "." },
                    key
                ));
            }
        }
    }

    fn table<'t>(&mut self, v: &'t toml::Value, path: &str) -> Option<&'t toml::Table> {
        match v.as_table() {
            Some(t) => Some(t),
            None => {
                self.errors.push(format!("`{}` must be a table", path));
                None
            }
        }
    }

    fn f64(&mut self, t: &toml::Table, path: &str, key: &str) -> Option<f64> {
        match t.get(key) {
            Some(toml::Value::Float(f)) => Some(*f),
            Some(toml::Value::Integer(i)) => Some(*i as f64),
            Some(_) => {
                self.errors
                    .push(format!("`{}.{}` must be a number", path, key));
                None
            }
            None => {
                self.errors.push(format!("missing key `{}.{}`", path, key));
                None
            }
        }
    }

    fn f64_or(&mut self, t: &toml::Table, path: &str, key: &str, default: f64) -> Option<f64> {
        match t.get(key) {
            None => Some(default),
            Some(toml::Value::Float(f)) => Some(*f),
            Some(toml::Value::Integer(i)) => Some(*i as f64),
            Some(_) => {
                self.errors
                    .push(format!("`{}.{}` must be a number", path, key));
                None
            }
        }
    }

    fn u64(&mut self, t: &toml::Table, path: &str, key: &str) -> Option<u64> {
        match t.get(key) {
            Some(toml::Value::Integer(i)) if *i >= 0 => Some(*i as u64),
            Some(_) => {
                self.errors
                    .push(format!("`{}.{}` must be a nonnegative integer", path, key));
                None
            }
            None => {
                self.errors.push(format!("missing key `{}.{}`", path, key));
                None
            }
        }
    }

    fn u64_or(&mut self, t: &toml::Table, path: &str, key: &str, default: u64) -> Option<u64> {
        if t.contains_key(key) {
            self.u64(t, path, key)
        } else {
            Some(default)
        }
    }

    fn bool_or(&mut self, t: &toml::Table, path: &str, key: &str, default: bool) -> Option<bool> {
        match t.get(key) {
            None => Some(default),
            Some(toml::Value::Boolean(b)) => Some(*b),
            Some(_) => {
                self.errors
                    .push(format!("`{}.{}` must be a boolean", path, key));
                None
            }
        }
    }

    fn string<'t>(&mut self, t: &'t toml::Table, path: &str, key: &str) -> Option<&'t str> {
        match t.get(key) {
            Some(toml::Value::String(s)) => Some(s.as_str()),
            Some(_) => {
                self.errors
                    .push(format!("`{}.{}` must be a string", path, key));
                None
            }
            None => {
                self.errors.push(format!("missing key `{}.{}`", path, key));
                None
            }
        }
    }

    fn f64_list(&mut self, t: &toml::Table, path: &str, key: &str) -> Option<Vec<f64>> {
        match t.get(key) {
            Some(toml::Value::Array(a)) => {
                let mut out = Vec::with_capacity(a.len());
                for (i, v) in a.iter().enumerate() {
                    match v {
                        toml::Value::Float(f) => out.push(*f),
                        toml::Value::Integer(n) => out.push(*n as f64),
                        _ => {
                            self.errors
                                .push(format!("`{}.{}[{}]` must be a number", path, key, i));
                            return None;
                        }
                    }
                }
                Some(out)
            }
            Some(_) => {
                self.errors
                    .push(format!("`{}.{}` must be an array", path, key));
                None
            }
            None => {
                self.errors.push(format!("missing key `{}.{}`", path, key));
                None
            }
        }
    }

    fn u64_list_or(
        &mut self,
        t: &toml::Table,
        path: &str,
        key: &str,
        default: Vec<u64>,
    ) -> Option<Vec<u64>> {
        match t.get(key) {
            None => Some(default),
            Some(toml::Value::Array(a)) => {
                let mut out = Vec::with_capacity(a.len());
                for (i, v) in a.iter().enumerate() {
                    match v {
                        toml::Value::Integer(n) if *n > 0 => out.push(*n as u64),
                        _ => {
                            self.errors.push(format!(
                                "`{}.{}[{}]` must be a positive integer",
                                path, key, i
                            ));
                            return None;
                        }
                    }
                }
                Some(out)
            }
            Some(_) => {
                self.errors
                    .push(format!("`{}.{}` must be an array", path, key));
                None
            }
        }
    }
}

/// Parses and fully validates a config file. All problems found are
/// returned together.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| vec![format!("cannot read {}: {}", path.display(), e)])?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, Vec<String>> {
    let root: toml::Table = text
        .parse()
        .map_err(|e| vec![format!("config is not well-formed: {}", e)])?;
    let mut w = Walker { errors: Vec::new() };

    w.check_keys(
        &root,
        "",
        &[
            "seed",
            "operator",
            "noise",
            "solver",
            "bias_sweep",
            "clt",
            "rr",
            "validate",
            "output",
        ],
    );

    let seed = w.u64_or(&root, "", "seed", 0);

    // [operator]
    let operator = match root.get("operator") {
        None => {
            w.errors.push("missing section `operator`".into());
            None
        }
        Some(v) => (|w: &mut Walker| {
            let t = w.table(v, "operator")?;
            let kind = w.string(t, "operator", "kind")?;
            match kind {
                "linear" => {
                    w.check_keys(t, "operator", &["kind", "mu", "dimension"]);
                    let mu = w.f64(t, "operator", "mu")?;
                    let dimension = w.u64_or(t, "operator", "dimension", 1)?;
                    if mu.is_nan() || mu <= 0.0 {
                        w.errors.push("`operator.mu` must be positive".into());
                        return None;
                    }
                    if dimension == 0 {
                        w.errors
                            .push("`operator.dimension` must be at least 1".into());
                        return None;
                    }
                    Some(OperatorConfig::Linear { mu, dimension })
                }
                "quadratic_quartic_game" => {
                    w.check_keys(
                        t,
                        "operator",
                        &["kind", "block_dim", "op_seed", "conditioning"],
                    );
                    let block_dim = w.u64(t, "operator", "block_dim")?;
                    let op_seed = w.u64_or(t, "operator", "op_seed", 0)?;
                    let conditioning = w.f64_or(t, "operator", "conditioning", 0.1)?;
                    if block_dim == 0 {
                        w.errors
                            .push("`operator.block_dim` must be at least 1".into());
                        return None;
                    }
                    if conditioning.is_nan() || conditioning <= 0.0 {
                        w.errors
                            .push("`operator.conditioning` must be positive".into());
                        return None;
                    }
                    Some(OperatorConfig::QuadraticQuarticGame {
                        block_dim,
                        op_seed,
                        conditioning,
                    })
                }
                "logistic_game" => {
                    w.check_keys(t, "operator", &["kind"]);
                    Some(OperatorConfig::LogisticGame)
                }
                "quasi_bilinear" => {
                    w.check_keys(t, "operator", &["kind", "epsilon"]);
                    let epsilon = w.f64_or(t, "operator", "epsilon", 0.0)?;
                    if epsilon < 0.0 {
                        w.errors
                            .push("`operator.epsilon` must be nonnegative".into());
                        return None;
                    }
                    Some(OperatorConfig::QuasiBilinear { epsilon })
                }
                "custom" => {
                    w.errors.push(
                        "`operator.kind = \"custom\"` cannot be built from a config file; custom operators are a code-level extension point".into(),
                    );
                    None
                }
                other => {
                    w.errors.push(format!("unknown operator kind `{}`", other));
                    None
                }
            }
        })(&mut w),
    };

    // [noise]
    let noise = match root.get("noise") {
        None => Some(NoiseModel::gaussian(0.0)),
        Some(v) => (|w: &mut Walker| {
            let t = w.table(v, "noise")?;
            w.check_keys(t, "noise", &["kind", "sigma"]);
            match t.get("kind") {
                None | Some(toml::Value::String(_)) => {}
                Some(_) => {
                    w.errors.push("`noise.kind` must be a string".into());
                    return None;
                }
            }
            if let Some(toml::Value::String(k)) = t.get("kind") {
                if k != "gaussian_isotropic" {
                    w.errors.push(format!("unknown noise kind `{}`", k));
                    return None;
                }
            }
            let sigma = w.f64_or(t, "noise", "sigma", 0.0)?;
            if sigma < 0.0 {
                w.errors.push("`noise.sigma` must be nonnegative".into());
                return None;
            }
            Some(NoiseModel::gaussian(sigma))
        })(&mut w),
    };

    // [solver]
    let solver = match root.get("solver") {
        None => {
            w.errors.push("missing section `solver`".into());
            None
        }
        Some(v) => (|w: &mut Walker| {
            let t = w.table(v, "solver")?;
            w.check_keys(
                t,
                "solver",
                &[
                    "algorithm",
                    "gamma",
                    "alpha",
                    "horizon",
                    "burn_in",
                    "record_stride",
                    "x0",
                    "allow_inadmissible",
                ],
            );
            let algorithm = match w.string(t, "solver", "algorithm") {
                Some("sgda") | Some("SGDA") => Some(Algorithm::Sgda),
                Some("seg") | Some("SEG") => Some(Algorithm::Seg),
                Some(other) => {
                    w.errors.push(format!("unknown algorithm `{}`", other));
                    None
                }
                None => None,
            };
            let gamma = w.f64(t, "solver", "gamma")?;
            let alpha = w.f64_or(t, "solver", "alpha", 0.5)?;
            let horizon = w.u64(t, "solver", "horizon")?;
            let burn_in = w.u64_or(
                t,
                "solver",
                "burn_in",
                SolverConfig::default_burn_in(horizon),
            )?;
            let record_stride = w.u64_or(t, "solver", "record_stride", 1)?;
            let allow_inadmissible = w.bool_or(t, "solver", "allow_inadmissible", false)?;
            let x0 = match t.get("x0") {
                None => X0Config::Named(X0Spec::Zero),
                Some(toml::Value::String(s)) => match s.as_str() {
                    "zero" => X0Config::Named(X0Spec::Zero),
                    "ones" => X0Config::Named(X0Spec::Ones),
                    other => {
                        w.errors.push(format!(
                            "`solver.x0` must be \"zero\", \"ones\", or a vector; got \"{}\"",
                            other
                        ));
                        return None;
                    }
                },
                Some(toml::Value::Array(_)) => X0Config::Literal(w.f64_list(t, "solver", "x0")?),
                Some(_) => {
                    w.errors
                        .push("`solver.x0` must be a string or an array".into());
                    return None;
                }
            };
            if gamma.is_nan() || gamma <= 0.0 {
                w.errors.push("`solver.gamma` must be positive".into());
            }
            if horizon == 0 {
                w.errors.push("`solver.horizon` must be at least 1".into());
            } else if burn_in >= horizon {
                w.errors.push(format!(
                    "`solver.burn_in` ({}) must be smaller than `solver.horizon` ({})",
                    burn_in, horizon
                ));
            }
            if record_stride == 0 {
                w.errors
                    .push("`solver.record_stride` must be at least 1".into());
            }
            if algorithm == Some(Algorithm::Seg) && !(alpha > 0.0 && alpha < 1.0) {
                let eg_override = allow_inadmissible && alpha == 1.0;
                if !eg_override {
                    w.errors.push(format!(
                        "`solver.alpha` must lie in (0,1) for SEG (alpha = 1 needs allow_inadmissible), got {}",
                        alpha
                    ));
                }
            }
            Some(SolverSection {
                algorithm: algorithm?,
                gamma,
                alpha,
                horizon,
                burn_in,
                record_stride,
                x0,
                allow_inadmissible,
            })
        })(&mut w),
    };

    // [bias_sweep]
    let bias_sweep = match root.get("bias_sweep") {
        None => None,
        Some(v) => w.table(v, "bias_sweep").and_then(|t| {
            w.check_keys(t, "bias_sweep", &["gammas"]);
            let gammas = w.f64_list(t, "bias_sweep", "gammas")?;
            if gammas.is_empty() {
                w.errors
                    .push("`bias_sweep.gammas` must be non-empty".into());
                return None;
            }
            Some(BiasSweepSection { gammas })
        }),
    };

    // [clt]
    let clt = match root.get("clt") {
        None => None,
        Some(v) => w.table(v, "clt").and_then(|t| {
            w.check_keys(
                t,
                "clt",
                &[
                    "n_reps",
                    "center_mode",
                    "horizons",
                    "gammas",
                    "test_function",
                    "coordinate",
                ],
            );
            let n_reps = w.u64(t, "clt", "n_reps")?;
            if n_reps == 0 {
                w.errors.push("`clt.n_reps` must be at least 1".into());
            }
            let center_mode = match t.get("center_mode") {
                None => CenterMode::Zero,
                Some(toml::Value::String(s)) => match s.as_str() {
                    "zero" => CenterMode::Zero,
                    "pi_hat" => CenterMode::PiHat,
                    other => {
                        w.errors
                            .push(format!("unknown `clt.center_mode` `{}`", other));
                        return None;
                    }
                },
                Some(_) => {
                    w.errors.push("`clt.center_mode` must be a string".into());
                    return None;
                }
            };
            let default_h = solver.as_ref().map(|s| s.horizon).unwrap_or(1);
            let horizons = w.u64_list_or(t, "clt", "horizons", vec![default_h])?;
            let gammas = match t.get("gammas") {
                None => vec![],
                Some(_) => w.f64_list(t, "clt", "gammas")?,
            };
            let test_function = match t.get("test_function") {
                None => TestFunctionConfig::GameValue,
                Some(toml::Value::String(s)) => match s.as_str() {
                    "game_value" => TestFunctionConfig::GameValue,
                    "squared_error" => TestFunctionConfig::SquaredError,
                    "coordinate" => {
                        TestFunctionConfig::Coordinate(w.u64_or(t, "clt", "coordinate", 0)?)
                    }
                    other => {
                        w.errors
                            .push(format!("unknown `clt.test_function` `{}`", other));
                        return None;
                    }
                },
                Some(_) => {
                    w.errors.push("`clt.test_function` must be a string".into());
                    return None;
                }
            };
            Some(CltSection {
                n_reps,
                center_mode,
                horizons,
                gammas,
                test_function,
            })
        }),
    };

    // [rr]
    let rr = match root.get("rr") {
        None => None,
        Some(v) => w.table(v, "rr").and_then(|t| {
            w.check_keys(t, "rr", &["coupling", "n_reps"]);
            let coupling = match t.get("coupling") {
                None => viergo_core::refinement::Coupling::Independent,
                Some(toml::Value::String(s)) => match s.as_str() {
                    "independent" => viergo_core::refinement::Coupling::Independent,
                    "common_random_numbers" => {
                        viergo_core::refinement::Coupling::CommonRandomNumbers
                    }
                    other => {
                        w.errors.push(format!("unknown `rr.coupling` `{}`", other));
                        return None;
                    }
                },
                Some(_) => {
                    w.errors.push("`rr.coupling` must be a string".into());
                    return None;
                }
            };
            let n_reps = w.u64_or(t, "rr", "n_reps", 20)?;
            if n_reps == 0 {
                w.errors.push("`rr.n_reps` must be at least 1".into());
            }
            Some(RrSection { coupling, n_reps })
        }),
    };

    // [validate]
    let validate = match root.get("validate") {
        None => None,
        Some(v) => w.table(v, "validate").and_then(|t| {
            w.check_keys(t, "validate", &["n_samples", "radius"]);
            let n_samples = w.u64_or(t, "validate", "n_samples", 1000)?;
            let radius = w.f64_or(t, "validate", "radius", 2.0)?;
            if n_samples == 0 {
                w.errors
                    .push("`validate.n_samples` must be at least 1".into());
            }
            if radius.is_nan() || radius <= 0.0 {
                w.errors.push("`validate.radius` must be positive".into());
            }
            Some(ValidateSection { n_samples, radius })
        }),
    };

    // [output]
    let output = match root.get("output") {
        None => Some(OutputSection {
            dir: "out".into(),
            emit_svg: false,
        }),
        Some(v) => w.table(v, "output").and_then(|t| {
            w.check_keys(t, "output", &["dir", "emit_svg"]);
            let dir = match t.get("dir") {
                None => "out".to_string(),
                Some(toml::Value::String(s)) => s.clone(),
                Some(_) => {
                    w.errors.push("`output.dir` must be a string".into());
                    return None;
                }
            };
            let emit_svg = w.bool_or(t, "output", "emit_svg", false)?;
            Some(OutputSection { dir, emit_svg })
        }),
    };

    // Step-size admissibility against the configured operator.
    if let (Some(op_cfg), Some(sv)) = (operator.as_ref(), solver.as_ref()) {
        if !sv.allow_inadmissible {
            let (op, _) = op_cfg.build();
            if let Ok(bound) = max_step_size(sv.algorithm, &op.params) {
                let mut labeled: Vec<(String, f64)> =
                    vec![("`solver.gamma`".to_string(), sv.gamma)];
                if let Some(bs) = bias_sweep.as_ref() {
                    for (i, g) in bs.gammas.iter().enumerate() {
                        labeled.push((format!("`bias_sweep.gammas[{}]`", i), *g));
                    }
                }
                if let Some(c) = clt.as_ref() {
                    for (i, g) in c.gammas.iter().enumerate() {
                        labeled.push((format!("`clt.gammas[{}]`", i), *g));
                    }
                }
                for (label, gamma) in labeled {
                    if gamma >= bound {
                        w.errors.push(format!(
                            "{}: step size {} is not admissible for {}: the bound requires gamma < {} (set solver.allow_inadmissible = true to override)",
                            label,
                            gamma,
                            sv.algorithm.as_str(),
                            bound
                        ));
                    }
                }
            }
        }
    }

    if !w.errors.is_empty() {
        return Err(w.errors);
    }
    Ok(ExperimentConfig {
        seed: seed.unwrap(),
        operator: operator.unwrap(),
        noise: noise.unwrap(),
        solver: solver.unwrap(),
        bias_sweep,
        clt,
        rr,
        validate,
        output: output.unwrap(),
    })
}

fn fmt_f64(v: f64) -> String {
    // Keep floats recognizable as floats in the TOML output.
    let s = format!("{}", v);
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{}.0", s)
    }
}

/// Canonical re-serialization. Parsing the result yields the same config,
/// and serializing again is byte-identical.
pub fn to_toml_string(cfg: &ExperimentConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "seed = {}", cfg.seed);
    let _ = writeln!(s);
    let _ = writeln!(s, "[operator]");
    match &cfg.operator {
        OperatorConfig::Linear { mu, dimension } => {
            let _ = writeln!(s, "kind = \"linear\"");
            let _ = writeln!(s, "mu = {}", fmt_f64(*mu));
            let _ = writeln!(s, "dimension = {}", dimension);
        }
        OperatorConfig::QuadraticQuarticGame {
            block_dim,
            op_seed,
            conditioning,
        } => {
            let _ = writeln!(s, "kind = \"quadratic_quartic_game\"");
            let _ = writeln!(s, "block_dim = {}", block_dim);
            let _ = writeln!(s, "op_seed = {}", op_seed);
            let _ = writeln!(s, "conditioning = {}", fmt_f64(*conditioning));
        }
        OperatorConfig::LogisticGame => {
            let _ = writeln!(s, "kind = \"logistic_game\"");
        }
        OperatorConfig::QuasiBilinear { epsilon } => {
            let _ = writeln!(s, "kind = \"quasi_bilinear\"");
            let _ = writeln!(s, "epsilon = {}", fmt_f64(*epsilon));
        }
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "[noise]");
    let _ = writeln!(s, "kind = \"gaussian_isotropic\"");
    let _ = writeln!(s, "sigma = {}", fmt_f64(cfg.noise.sigma));
    let _ = writeln!(s);
    let _ = writeln!(s, "[solver]");
    let _ = writeln!(
        s,
        "algorithm = \"{}\"",
        match cfg.solver.algorithm {
            Algorithm::Sgda => "sgda",
            Algorithm::Seg => "seg",
        }
    );
    let _ = writeln!(s, "gamma = {}", fmt_f64(cfg.solver.gamma));
    let _ = writeln!(s, "alpha = {}", fmt_f64(cfg.solver.alpha));
    let _ = writeln!(s, "horizon = {}", cfg.solver.horizon);
    let _ = writeln!(s, "burn_in = {}", cfg.solver.burn_in);
    let _ = writeln!(s, "record_stride = {}", cfg.solver.record_stride);
    match &cfg.solver.x0 {
        X0Config::Named(X0Spec::Zero) => {
            let _ = writeln!(s, "x0 = \"zero\"");
        }
        X0Config::Named(X0Spec::Ones) => {
            let _ = writeln!(s, "x0 = \"ones\"");
        }
        X0Config::Literal(v) => {
            let items: Vec<String> = v.iter().map(|x| fmt_f64(*x)).collect();
            let _ = writeln!(s, "x0 = [{}]", items.join(", "));
        }
    }
    let _ = writeln!(s, "allow_inadmissible = {}", cfg.solver.allow_inadmissible);
    if let Some(bs) = &cfg.bias_sweep {
        let _ = writeln!(s);
        let _ = writeln!(s, "[bias_sweep]");
        let items: Vec<String> = bs.gammas.iter().map(|x| fmt_f64(*x)).collect();
        let _ = writeln!(s, "gammas = [{}]", items.join(", "));
    }
    if let Some(c) = &cfg.clt {
        let _ = writeln!(s);
        let _ = writeln!(s, "[clt]");
        let _ = writeln!(s, "n_reps = {}", c.n_reps);
        let _ = writeln!(
            s,
            "center_mode = \"{}\"",
            match c.center_mode {
                CenterMode::Zero => "zero",
                CenterMode::PiHat => "pi_hat",
            }
        );
        let items: Vec<String> = c.horizons.iter().map(|h| h.to_string()).collect();
        let _ = writeln!(s, "horizons = [{}]", items.join(", "));
        if !c.gammas.is_empty() {
            let items: Vec<String> = c.gammas.iter().map(|x| fmt_f64(*x)).collect();
            let _ = writeln!(s, "gammas = [{}]", items.join(", "));
        }
        match c.test_function {
            TestFunctionConfig::GameValue => {
                let _ = writeln!(s, "test_function = \"game_value\"");
            }
            TestFunctionConfig::SquaredError => {
                let _ = writeln!(s, "test_function = \"squared_error\"");
            }
            TestFunctionConfig::Coordinate(i) => {
                let _ = writeln!(s, "test_function = \"coordinate\"");
                let _ = writeln!(s, "coordinate = {}", i);
            }
        }
    }
    if let Some(r) = &cfg.rr {
        let _ = writeln!(s);
        let _ = writeln!(s, "[rr]");
        let _ = writeln!(
            s,
            "coupling = \"{}\"",
            match r.coupling {
                viergo_core::refinement::Coupling::Independent => "independent",
                viergo_core::refinement::Coupling::CommonRandomNumbers => "common_random_numbers",
            }
        );
        let _ = writeln!(s, "n_reps = {}", r.n_reps);
    }
    if let Some(v) = &cfg.validate {
        let _ = writeln!(s);
        let _ = writeln!(s, "[validate]");
        let _ = writeln!(s, "n_samples = {}", v.n_samples);
        let _ = writeln!(s, "radius = {}", fmt_f64(v.radius));
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "[output]");
    let _ = writeln!(s, "dir = \"{}\"", cfg.output.dir);
    let _ = writeln!(s, "emit_svg = {}", cfg.output.emit_svg);
    s
}

/// Hex-truncated SHA-256 binding an artifact to the config and command that
/// produced it. The `[output]` section is not hashed: where results are
/// written does not change what they are.
pub fn config_hash(cfg: &ExperimentConfig, command: &str) -> String {
    use sha2::{Digest, Sha256};
    let canonical = to_toml_string(cfg);
    let experiment = canonical.split("\n[output]\n").next().unwrap_or(&canonical);
    let mut hasher = Sha256::new();
    hasher.update(experiment.as_bytes());
    hasher.update(command.as_bytes());
    let digest = hasher.finalize();
    let mut out = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        let _ = write!(out, "{:02x}", byte);
    }
    out
}
