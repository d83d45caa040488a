//! Command execution: binds a parsed config to the chain machinery and
//! emits CSV (and optionally SVG) artifacts plus a manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use viergo_core::diagnostics::{drift_check, stationary_gap, steady_state_mse};
use viergo_core::ergodics::{clt_replicates, sample_stats, TestFunction};
use viergo_core::linalg::dist_sq;
use viergo_core::operators::{
    ball_probes, gradient_consistency, verify_assumptions, GameSpec, OperatorSpec,
};
use viergo_core::oracle::{oracle_factory, Phase, StochasticOracle, StreamKey};
use viergo_core::refinement::{rr_replicates, summarize};
use viergo_core::solvers::{convergence_envelope, run_with_observer, SolverConfig};

use crate::config::{config_hash, CenterMode, ExperimentConfig, TestFunctionConfig};
use crate::csv::CsvTable;
use crate::error::CliError;
use crate::svg::{emit_svg, PlotKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    BiasSweep,
    Clt,
    Rr,
    Validate,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::BiasSweep => "bias-sweep",
            Command::Clt => "clt",
            Command::Rr => "rr",
            Command::Validate => "validate",
        }
    }
}

/// What a command produced: artifact paths, summary scalars, and any
/// divergence or assumption violations.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub outputs: Vec<PathBuf>,
    pub summary: BTreeMap<String, f64>,
    pub divergence: Option<(u64, f64)>,
    pub violations: u64,
}

impl Manifest {
    fn new(command: Command, hash: &str) -> Self {
        Manifest {
            command: command.as_str().to_string(),
            config_hash: hash.to_string(),
            outputs: Vec::new(),
            summary: BTreeMap::new(),
            divergence: None,
            violations: 0,
        }
    }

    /// Deterministic TOML rendering of the manifest.
    pub fn to_toml_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command = \"{}\"", self.command);
        let _ = writeln!(s, "config_hash = \"{}\"", self.config_hash);
        let _ = writeln!(s, "violations = {}", self.violations);
        if let Some((iter, norm)) = self.divergence {
            let _ = writeln!(s, "divergence_iteration = {}", iter);
            let _ = writeln!(s, "divergence_norm = {}", norm);
        }
        let _ = writeln!(s, "outputs = [");
        for p in &self.outputs {
            let _ = writeln!(s, "  \"{}\",", p.display());
        }
        let _ = writeln!(s, "]");
        let _ = writeln!(s);
        let _ = writeln!(s, "[summary]");
        for (k, v) in &self.summary {
            let _ = writeln!(s, "{} = {}", k, v);
        }
        s
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join("manifest.toml");
        std::fs::write(&path, self.to_toml_string())?;
        Ok(path)
    }
}

fn fmt_gamma(gamma: f64) -> String {
    format!("{}", gamma).replace('.', "p").replace('-', "m")
}

struct Ctx {
    op: OperatorSpec,
    game: Option<GameSpec>,
    solver: SolverConfig,
    hash: String,
    out_dir: PathBuf,
    emit_svg: bool,
}

fn build_ctx(command: Command, config: &ExperimentConfig) -> Result<Ctx, CliError> {
    let (op, game) = config.operator.build();
    let solver = config
        .solver_config(&op)
        .map_err(|e| CliError::Config(vec![e]))?;
    let out_dir = PathBuf::from(&config.output.dir);
    std::fs::create_dir_all(&out_dir)?;
    Ok(Ctx {
        op,
        game,
        solver,
        hash: config_hash(config, command.as_str()),
        out_dir,
        emit_svg: config.output.emit_svg,
    })
}

/// Executes one subcommand against a validated config.
pub fn execute(command: Command, config: &ExperimentConfig) -> Result<Manifest, CliError> {
    match command {
        Command::Run => cmd_run(config),
        Command::BiasSweep => cmd_bias_sweep(config),
        Command::Clt => cmd_clt(config),
        Command::Rr => cmd_rr(config),
        Command::Validate => cmd_validate(config),
    }
}

fn cmd_run(config: &ExperimentConfig) -> Result<Manifest, CliError> {
    let ctx = build_ctx(Command::Run, config)?;
    let mut manifest = Manifest::new(Command::Run, &ctx.hash);
    let mut oracle = StochasticOracle::new(
        ctx.op.clone(),
        config.noise,
        StreamKey::new(config.seed, 0, Phase::Main),
    );
    let x_star = ctx.op.solution.clone();
    let horizon = ctx.solver.horizon;
    let tail_start = horizon - (horizon / 2).max(1) + 1;
    let burn_in = ctx.solver.burn_in;
    let mut tail: Vec<f64> = Vec::new();
    // Running squared-error Cesaro mean probed at doubling checkpoints.
    let mut lln: Vec<(u64, f64)> = Vec::new();
    let mut sq_sum = 0.0;
    let mut next_checkpoint = 1u64;
    let outcome = run_with_observer(&ctx.solver, &mut oracle, |t, x| {
        if let Some(star) = &x_star {
            if t >= tail_start {
                tail.push(dist_sq(x, star));
            }
            if t > burn_in {
                let k = t - burn_in;
                sq_sum += dist_sq(x, star);
                if k == next_checkpoint {
                    lln.push((k, sq_sum / k as f64));
                    next_checkpoint *= 2;
                }
            }
        }
    })?;

    let traj = outcome.trajectory();
    let mut table = CsvTable::new(&["iteration", "sq_err"]);
    for (i, x) in traj.iterates.iter().enumerate() {
        let iter = ctx.solver.burn_in + 1 + i as u64 * ctx.solver.record_stride;
        let err = match &x_star {
            Some(star) => dist_sq(x, star),
            None => dist_sq(x, &vec![0.0; x.len()]),
        };
        table.push(vec![iter as f64, err]);
    }

    let diverged = outcome.divergence().copied();
    let csv_name = if diverged.is_some() {
        "trajectory.csv.partial"
    } else {
        "trajectory.csv"
    };
    let csv_path = ctx.out_dir.join(csv_name);
    table.write(&csv_path, &ctx.hash)?;
    manifest.outputs.push(csv_path.clone());

    if let Some(report) = diverged {
        manifest.divergence = Some((report.iteration, report.norm));
        manifest
            .summary
            .insert("divergence_iteration".into(), report.iteration as f64);
        return Ok(manifest);
    }

    if ctx.emit_svg && !table.rows.is_empty() {
        manifest
            .outputs
            .push(emit_svg(&csv_path, PlotKind::TrajectoryLogLog)?);
    }

    let traj = outcome.trajectory();
    if x_star.is_some() && !tail.is_empty() {
        let n = tail.len();
        let mse = tail.iter().sum::<f64>() / n as f64;
        let ci = if n >= 4 {
            let lrv = viergo_core::ergodics::batch_means_variance(
                &tail,
                viergo_core::ergodics::default_batch_count(n),
            )?;
            3.0 * (lrv / n as f64).sqrt()
        } else {
            f64::INFINITY
        };
        manifest.summary.insert("steady_state_mse".into(), mse);
        manifest.summary.insert("steady_state_ci".into(), ci);
    }
    if let Ok(m2) = traj.mean_sq_err() {
        manifest.summary.insert("mom2".into(), m2);
    }
    if !lln.is_empty() {
        let mut table = CsvTable::new(&["checkpoint", "cesaro"]);
        for (k, v) in &lln {
            table.push(vec![*k as f64, *v]);
        }
        let p = ctx.out_dir.join("lln.csv");
        table.write(&p, &ctx.hash)?;
        manifest.outputs.push(p);
    }
    // Moments CSV: k = 2 always, the others when the full chain is stored.
    let mut moments = CsvTable::new(&["k", "estimate"]);
    for k in 1..=4u32 {
        if let Ok(v) = viergo_core::diagnostics::moment_estimate(traj, k) {
            moments.push(vec![k as f64, v]);
        }
    }
    if !moments.rows.is_empty() {
        let p = ctx.out_dir.join("moments.csv");
        moments.write(&p, &ctx.hash)?;
        manifest.outputs.push(p);
    }
    let sigma2 = config.noise.second_moment_bound(ctx.op.dimension);
    if let Ok(env) = convergence_envelope(
        ctx.solver.algorithm,
        &ctx.op.params,
        ctx.solver.gamma,
        ctx.solver.alpha,
        sigma2,
    ) {
        manifest.summary.insert("envelope_c1".into(), env.c1);
        manifest.summary.insert("envelope_c2".into(), env.c2);
    }
    Ok(manifest)
}

fn cmd_bias_sweep(config: &ExperimentConfig) -> Result<Manifest, CliError> {
    let ctx = build_ctx(Command::BiasSweep, config)?;
    let sweep = config
        .bias_sweep
        .as_ref()
        .ok_or_else(|| CliError::Validation("bias-sweep needs a [bias_sweep] section".into()))?;
    let mut manifest = Manifest::new(Command::BiasSweep, &ctx.hash);
    let x_star = ctx.op.solution.clone();

    let mut mse_table = CsvTable::new(&["gamma", "mse", "ci_halfwidth", "bias_norm"]);
    let mut gap_table = CsvTable::new(&["gamma", "avg_gap", "ci"]);
    for (i, &gamma) in sweep.gammas.iter().enumerate() {
        let mut cfg = ctx.solver.clone();
        cfg.gamma = gamma;
        cfg.record_stride = u64::MAX / 2; // online accumulators only
        let mut oracle = StochasticOracle::new(
            ctx.op.clone(),
            config.noise,
            StreamKey::new(config.seed, i as u64, Phase::Main),
        );
        let est = steady_state_mse(&cfg, &mut oracle, 0.5)?;
        let mut oracle = StochasticOracle::new(
            ctx.op.clone(),
            config.noise,
            StreamKey::new(config.seed, i as u64, Phase::Main),
        );
        let outcome = viergo_core::solvers::run(&cfg, &mut oracle)?;
        let traj = outcome.completed()?;
        let bias_norm = match &x_star {
            Some(star) => {
                let cesaro = traj.cesaro_vector()?;
                dist_sq(&cesaro, star).sqrt()
            }
            None => f64::NAN,
        };
        mse_table.push(vec![gamma, est.mse, est.ci_halfwidth, bias_norm]);

        if x_star.is_some() {
            let mut oracle = StochasticOracle::new(
                ctx.op.clone(),
                config.noise,
                StreamKey::new(config.seed, i as u64, Phase::Main),
            );
            let gap = stationary_gap(&cfg, &mut oracle)?;
            gap_table.push(vec![gamma, gap.avg_gap, gap.ci_halfwidth]);
        }
        manifest
            .summary
            .insert(format!("mse_gamma_{}", fmt_gamma(gamma)), est.mse);
    }
    let mse_path = ctx.out_dir.join("bias_sweep.csv");
    mse_table.write(&mse_path, &ctx.hash)?;
    manifest.outputs.push(mse_path.clone());
    if !gap_table.rows.is_empty() {
        let gap_path = ctx.out_dir.join("gap_sweep.csv");
        gap_table.write(&gap_path, &ctx.hash)?;
        manifest.outputs.push(gap_path);
    }
    if ctx.emit_svg {
        manifest
            .outputs
            .push(emit_svg(&mse_path, PlotKind::BarErrors)?);
    }
    Ok(manifest)
}

fn test_function_for(
    cfg: &ExperimentConfig,
    op: &OperatorSpec,
    game: Option<&GameSpec>,
) -> Result<TestFunction, CliError> {
    let spec = cfg
        .clt
        .as_ref()
        .map(|c| c.test_function)
        .unwrap_or(TestFunctionConfig::GameValue);
    match spec {
        TestFunctionConfig::GameValue => match game {
            Some(g) => Ok(TestFunction::GameValue { game: g.clone() }),
            None => Err(CliError::Validation(
                "clt.test_function = \"game_value\" needs a game operator".into(),
            )),
        },
        TestFunctionConfig::Coordinate(i) => {
            if (i as usize) < op.dimension {
                Ok(TestFunction::Coordinate(i as usize))
            } else {
                Err(CliError::Validation(format!(
                    "clt.coordinate {} is out of range for dimension {}",
                    i, op.dimension
                )))
            }
        }
        TestFunctionConfig::SquaredError => match &op.solution {
            Some(star) => Ok(TestFunction::SquaredError {
                x_star: star.clone(),
            }),
            None => Err(CliError::Validation(
                "clt.test_function = \"squared_error\" needs a known solution".into(),
            )),
        },
    }
}

fn cmd_clt(config: &ExperimentConfig) -> Result<Manifest, CliError> {
    let ctx = build_ctx(Command::Clt, config)?;
    let clt = config
        .clt
        .as_ref()
        .ok_or_else(|| CliError::Validation("clt needs a [clt] section".into()))?;
    let mut manifest = Manifest::new(Command::Clt, &ctx.hash);
    let f = test_function_for(config, &ctx.op, ctx.game.as_ref())?;

    let gammas = if clt.gammas.is_empty() {
        vec![ctx.solver.gamma]
    } else {
        clt.gammas.clone()
    };

    let center = match clt.center_mode {
        CenterMode::Zero => 0.0,
        CenterMode::PiHat => {
            // One long auxiliary chain at the solver settings.
            let mut cfg = ctx.solver.clone();
            cfg.record_stride = 1;
            let mut oracle = StochasticOracle::new(
                ctx.op.clone(),
                config.noise,
                StreamKey::new(config.seed, 0, Phase::Aux),
            );
            let traj = viergo_core::solvers::run(&cfg, &mut oracle)?.completed()?;
            viergo_core::ergodics::cesaro_mean(&traj, &f)?
        }
    };
    manifest.summary.insert("center".into(), center);

    for &gamma in &gammas {
        for &horizon in &clt.horizons {
            let mut cfg = ctx.solver.clone();
            cfg.gamma = gamma;
            cfg.horizon = horizon;
            cfg.burn_in = cfg.burn_in.min(horizon.saturating_sub(1));
            cfg.record_stride = u64::MAX / 2;
            let factory = oracle_factory(ctx.op.clone(), config.noise, config.seed, Phase::Main);
            let values = clt_replicates(&cfg, &factory, &f, clt.n_reps as usize, center)?;
            let mut table = CsvTable::new(&["rep_index", "value"]);
            for (i, v) in values.iter().enumerate() {
                table.push(vec![i as f64, *v]);
            }
            let name = format!("clt_h{}_g{}.csv", horizon, fmt_gamma(gamma));
            let path = ctx.out_dir.join(name);
            table.write(&path, &ctx.hash)?;
            manifest.outputs.push(path.clone());
            let stats = sample_stats(&values);
            manifest.summary.insert(
                format!("clt_h{}_g{}_mean", horizon, fmt_gamma(gamma)),
                stats.mean,
            );
            manifest.summary.insert(
                format!("clt_h{}_g{}_sd", horizon, fmt_gamma(gamma)),
                stats.variance.sqrt(),
            );
            if ctx.emit_svg {
                manifest.outputs.push(emit_svg(&path, PlotKind::Histogram)?);
            }
        }
    }
    Ok(manifest)
}

fn cmd_rr(config: &ExperimentConfig) -> Result<Manifest, CliError> {
    let ctx = build_ctx(Command::Rr, config)?;
    let rr = config
        .rr
        .as_ref()
        .ok_or_else(|| CliError::Validation("rr needs an [rr] section".into()))?;
    let mut manifest = Manifest::new(Command::Rr, &ctx.hash);
    let mut cfg = ctx.solver.clone();
    cfg.record_stride = u64::MAX / 2;
    let results = rr_replicates(
        &cfg,
        &ctx.op,
        &config.noise,
        rr.coupling,
        rr.n_reps as usize,
    )?;

    let mut pairs = CsvTable::new(&["pair_index", "err_gamma", "err_2gamma", "err_rr"]);
    for (i, r) in results.iter().enumerate() {
        if let Some(e) = &r.errors {
            pairs.push(vec![i as f64, e.err_gamma, e.err_2gamma, e.err_rr]);
        }
    }
    if !pairs.rows.is_empty() {
        let p = ctx.out_dir.join("rr_pairs.csv");
        pairs.write(&p, &ctx.hash)?;
        manifest.outputs.push(p);
    }

    let summary = summarize(&results)?;
    let mut table = CsvTable::new(&["gamma", "err_gamma", "err_2gamma", "err_rr", "ci_halfwidth"]);
    table.push(vec![
        cfg.gamma,
        summary.mean_err_gamma,
        summary.mean_err_2gamma,
        summary.mean_err_rr,
        3.0 * summary.se_err_rr,
    ]);
    let path = ctx.out_dir.join("rr.csv");
    table.write(&path, &ctx.hash)?;
    manifest.outputs.push(path.clone());
    manifest
        .summary
        .insert("err_gamma".into(), summary.mean_err_gamma);
    manifest
        .summary
        .insert("err_2gamma".into(), summary.mean_err_2gamma);
    manifest
        .summary
        .insert("err_rr".into(), summary.mean_err_rr);
    manifest.summary.insert(
        "rr_improvement".into(),
        summary.mean_err_gamma / summary.mean_err_rr.max(f64::MIN_POSITIVE),
    );
    if ctx.emit_svg {
        manifest.outputs.push(emit_svg(&path, PlotKind::BarErrors)?);
    }
    Ok(manifest)
}

fn cmd_validate(config: &ExperimentConfig) -> Result<Manifest, CliError> {
    let ctx = build_ctx(Command::Validate, config)?;
    let v = config
        .validate
        .as_ref()
        .ok_or_else(|| CliError::Validation("validate needs a [validate] section".into()))?;
    let mut manifest = Manifest::new(Command::Validate, &ctx.hash);

    let report = verify_assumptions(&ctx.op, v.n_samples as usize, v.radius, config.seed)?;
    let mut table = CsvTable::new(&["check", "value", "threshold", "violation"]);
    // check ids: 0 = wqsm slack, 1 = growth, 2 = lipschitz, 3 = gradient
    // consistency, 4.. = drift margin minimum.
    table.push(vec![
        0.0,
        report.wqsm_min_slack,
        -1e-10,
        report.wqsm_violation as u64 as f64,
    ]);
    table.push(vec![
        1.0,
        report.growth_lower_bound,
        ctx.op.params.growth.unwrap_or(f64::NAN),
        report.growth_violation.unwrap_or(false) as u64 as f64,
    ]);
    table.push(vec![
        2.0,
        report.lipschitz_lower_bound,
        ctx.op.params.lipschitz.unwrap_or(f64::NAN),
        report.lipschitz_violation.unwrap_or(false) as u64 as f64,
    ]);
    let mut violations = report.wqsm_violation as u64
        + report.growth_violation.unwrap_or(false) as u64
        + report.lipschitz_violation.unwrap_or(false) as u64;

    if let Some(game) = &ctx.game {
        let worst = gradient_consistency_probe(game, config.seed);
        let bad = worst > 1e-4;
        table.push(vec![3.0, worst, 1e-4, bad as u64 as f64]);
        violations += bad as u64;
    }

    // Drift check when the configured step is inside the admissible range.
    let sigma2 = config.noise.second_moment_bound(ctx.op.dimension);
    let env_ok = convergence_envelope(
        ctx.solver.algorithm,
        &ctx.op.params,
        ctx.solver.gamma,
        ctx.solver.alpha,
        sigma2,
    )
    .is_ok();
    if let (true, Some(star)) = (env_ok, ctx.op.solution.as_ref()) {
        let probes = ball_probes(star, v.radius, 50, config.seed);
        let out = drift_check(&ctx.op, &config.noise, &ctx.solver, &probes, 2000)?;
        let mut drift = CsvTable::new(&["x_index", "lhs", "rhs", "margin_sigmas"]);
        let mut worst = f64::INFINITY;
        for (i, p) in out.iter().enumerate() {
            drift.push(vec![i as f64, p.lhs_estimate, p.rhs_bound, p.margin_sigmas]);
            worst = worst.min(p.margin_sigmas);
        }
        let p = ctx.out_dir.join("drift.csv");
        drift.write(&p, &ctx.hash)?;
        manifest.outputs.push(p);
        let bad = worst <= -3.0;
        table.push(vec![4.0, worst, -3.0, bad as u64 as f64]);
        violations += bad as u64;
        manifest.summary.insert("drift_worst_margin".into(), worst);
    }

    let path = ctx.out_dir.join("validate.csv");
    table.write(&path, &ctx.hash)?;
    manifest.outputs.push(path);
    manifest.violations = violations;
    manifest
        .summary
        .insert("violations".into(), violations as f64);
    manifest
        .summary
        .insert("wqsm_min_slack".into(), report.wqsm_min_slack);
    manifest
        .summary
        .insert("growth_lower_bound".into(), report.growth_lower_bound);
    manifest
        .summary
        .insert("lipschitz_lower_bound".into(), report.lipschitz_lower_bound);
    Ok(manifest)
}

fn gradient_consistency_probe(game: &GameSpec, seed: u64) -> f64 {
    let probes = ball_probes(&vec![0.0; game.joint_dimension()], 2.0, 20, seed ^ 0x9e37);
    probes
        .iter()
        .map(|x| gradient_consistency(game, x, 1e-6))
        .fold(0.0, f64::max)
}
