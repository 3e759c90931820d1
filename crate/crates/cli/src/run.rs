//! Scenario execution and artifact writing.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use bohm_rotor::classical::{classical_energy_series, lyapunov_exponent_with_interval, map_trajectory};
use bohm_rotor::diagnostics::{divergence_report, linear_fit, poincare_section, quantum_energy_series};
use bohm_rotor::ode::StepControl;
use bohm_rotor::{
    bohm_velocity, integrate_bohm_trajectory, integrate_newton_trajectory, DivergenceCriteria, DivergenceReport,
    EvolutionTimeline, MapState, MomentumInit, PoincareSection, RotorParams, Trajectory, TrajectoryConfig,
    TruncationPolicy, Verdict,
};
use serde::{Deserialize, Serialize};

use crate::config::{DynamicsMode, MomentumMode, ScenarioConfig, StateSpec};
use crate::error::CliError;

pub const TRAJECTORY_HEADER: &str = "t,kick,theta_wrapped,theta_unwrapped,p_theta";
pub const ENERGY_HEADER: &str = "kick,mean_energy";
pub const SECTION_HEADER: &str = "kick,theta,p_theta";
pub const DIVERGENCE_HEADER: &str = "t,separation";

/// Everything a scenario computes, before anything is written.
#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub params: RotorParams<f64>,
    /// Number of kicks the run covers.
    pub n_kicks: usize,
    pub t_end: f64,
    pub trajectories: Vec<Trajectory<f64>>,
    pub sections: Vec<Option<PoincareSection<f64>>>,
    pub divergence: Vec<([usize; 2], DivergenceReport<f64>)>,
    pub quantum_energy: Option<Vec<f64>>,
    pub classical_energy: Option<Vec<f64>>,
    pub lyapunov: Option<f64>,
    /// Worst per-kick norm defect over all timelines that were built.
    pub max_norm_defect: Option<f64>,
}

/// The run summary document written as `summary.toml`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: ScenarioConfig,
    pub results: SummaryResults,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryResults {
    pub k: f64,
    pub tau: f64,
    pub big_k: f64,
    pub n_kicks: usize,
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_norm_defect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_quantum_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalResults>,
    pub files: Vec<String>,
    #[serde(default)]
    pub trajectories: Vec<TrajectoryResult>,
    #[serde(default)]
    pub divergence: Vec<DivergenceResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalResults {
    pub final_energy: f64,
    pub energy_slope: f64,
    pub energy_r_squared: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryResult {
    pub index: usize,
    pub theta0: f64,
    pub samples: usize,
    pub final_theta_unwrapped: f64,
    pub final_p_theta: f64,
    pub steps: usize,
    pub rejections: usize,
    pub node_halvings: usize,
    /// Smallest density met by the integrator; absent for map orbits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_density: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceResult {
    pub pair: [usize; 2],
    pub log_fit_rate: f64,
    pub rate_per_period: f64,
    pub growth: f64,
    pub max_separation: f64,
    pub fit_window: [f64; 2],
    pub verdict: String,
}

/// Files written by [`run_scenario`] together with the computed results.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: RunSummary,
    pub output: ScenarioOutput,
}

/// Compute a scenario without touching the file system.
pub fn execute(config: &ScenarioConfig) -> Result<ScenarioOutput, CliError> {
    config.validate()?;
    let params = config.params.rotor()?;
    let policy = TruncationPolicy {
        band_cap: config.band.cap,
        norm_tolerance: config.band.norm_tolerance,
        ..TruncationPolicy::default()
    };
    let (n_kicks, t_end) = match (config.run.n_kicks, config.run.t_max) {
        (Some(n), _) => (n, n as f64 * params.period),
        (None, Some(t)) => ((t / params.period).ceil() as usize, t),
        (None, None) => unreachable!("validated"),
    };
    let traj_config = TrajectoryConfig {
        control: StepControl {
            rtol: config.integrator.rtol,
            atol: config.integrator.atol,
            max_halvings: config.integrator.max_halvings,
            ..StepControl::default()
        },
        node_floor_factor: config.integrator.node_floor_factor,
        cadence: config.run.cadence,
    };

    // One timeline per distinct initial state, built on first use.
    let mut timelines: Vec<(StateSpec, EvolutionTimeline<f64>)> = Vec::new();
    let mut timeline_for = |spec: &StateSpec| -> Result<usize, CliError> {
        if let Some(i) = timelines.iter().position(|(s, _)| s == spec) {
            return Ok(i);
        }
        let initial = spec.build().map_err(CliError::model("initial state"))?;
        let tl = EvolutionTimeline::build(params, initial, n_kicks, policy)
            .map_err(CliError::model(format!("building timeline for {spec:?}")))?;
        timelines.push((spec.clone(), tl));
        Ok(timelines.len() - 1)
    };

    let mode = config.run.dynamics;
    let mut trajectory_timeline = Vec::new();
    if mode != DynamicsMode::ClassicalMap {
        for tr in &config.trajectories {
            trajectory_timeline.push(timeline_for(tr.state.as_ref().unwrap_or(&config.state))?);
        }
    }
    let quantum_idx = if config.energy.quantum {
        Some(timeline_for(&config.state)?)
    } else {
        None
    };

    let mut trajectories = Vec::with_capacity(config.trajectories.len());
    for (i, tr) in config.trajectories.iter().enumerate() {
        let theta0 = tr.theta0();
        let ctx = format!("trajectory {i} (theta0 = {theta0} rad)");
        let path = match mode {
            DynamicsMode::ClassicalMap => {
                let p0 = tr.p0.unwrap_or(0.0);
                map_trajectory(&params, MapState::new(theta0, p0), n_kicks).map_err(CliError::model(ctx))?
            }
            _ => {
                let tl = &timelines[trajectory_timeline[i]].1;
                let span = (0.0, t_end);
                match mode {
                    DynamicsMode::BohmVelocity => integrate_bohm_trajectory(tl, theta0, span, &traj_config),
                    DynamicsMode::NewtonConstrained => bohm_velocity(tl, theta0, 0.0).and_then(|omega0| {
                        integrate_newton_trajectory(tl, theta0, omega0, span, &traj_config)
                    }),
                    DynamicsMode::NewtonRelaxed => integrate_newton_trajectory(
                        tl,
                        theta0,
                        tr.omega0.expect("validated"),
                        span,
                        &traj_config,
                    ),
                    DynamicsMode::ClassicalMap => unreachable!(),
                }
                .map_err(CliError::model(ctx))?
            }
        };
        trajectories.push(path);
    }

    let sections = trajectories
        .iter()
        .map(|t| {
            if t.last().kick == 0 {
                None
            } else {
                poincare_section(t, params.period).ok()
            }
        })
        .collect();

    let criteria = DivergenceCriteria {
        period: params.period,
        rate_per_period: config.divergence.rate_per_period,
        min_growth: config.divergence.min_growth,
        min_samples: config.divergence.min_samples,
    };
    let mut divergence = Vec::new();
    for pair in config.divergence_pairs() {
        let report = divergence_report(&trajectories[pair[0]], &trajectories[pair[1]], &criteria)
            .map_err(CliError::model(format!("divergence of pair {pair:?}")))?;
        divergence.push((pair, report));
    }

    let quantum_energy = quantum_idx.map(|i| quantum_energy_series(&timelines[i].1));

    let (classical_energy, lyapunov) = match &config.classical {
        None => (None, None),
        Some(c) => {
            let init = match c.momentum {
                MomentumMode::Zero => MomentumInit::Fixed(c.momentum_offset),
                MomentumMode::Uniform => MomentumInit::Uniform {
                    offset: c.momentum_offset,
                },
            };
            let series = classical_energy_series(params.big_k, c.ensemble_size, n_kicks, config.run.seed, init)
                .map_err(CliError::model("classical ensemble"))?;
            let lyap = match &c.lyapunov {
                None => None,
                Some(l) => Some(
                    lyapunov_exponent_with_interval(
                        params.big_k,
                        l.n_iter,
                        MapState::new(l.theta0, l.p0),
                        l.renorm_interval,
                    )
                    .map_err(CliError::model("Lyapunov exponent"))?,
                ),
            };
            (Some(series), lyap)
        }
    };

    let max_norm_defect = timelines
        .iter()
        .flat_map(|(_, tl)| tl.norm_history().iter().copied())
        .reduce(f64::max);

    Ok(ScenarioOutput {
        params,
        n_kicks,
        t_end,
        trajectories,
        sections,
        divergence,
        quantum_energy,
        classical_energy,
        lyapunov,
        max_norm_defect,
    })
}

/// Run a scenario and write its CSV files and `summary.toml` into
/// `config.run.out_dir`. Files are staged in a scratch directory and only
/// moved into place once every one of them has been written, so a failed run
/// leaves no partial outputs.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunArtifacts, CliError> {
    let output = execute(config)?;
    let out_dir = config.run.out_dir.clone();
    let created = !out_dir.exists();
    fs::create_dir_all(&out_dir).map_err(CliError::io(&out_dir))?;
    match write_outputs(config, &output, &out_dir) {
        Ok((files, summary)) => Ok(RunArtifacts {
            out_dir,
            files,
            summary,
            output,
        }),
        Err(e) => {
            if created {
                let _ = fs::remove_dir(&out_dir);
            }
            Err(e)
        }
    }
}

fn write_outputs(
    config: &ScenarioConfig,
    output: &ScenarioOutput,
    out_dir: &Path,
) -> Result<(Vec<PathBuf>, RunSummary), CliError> {
    let staging = tempfile::Builder::new()
        .prefix(".partial-")
        .tempdir_in(out_dir)
        .map_err(CliError::io(out_dir))?;
    let mut names: Vec<String> = Vec::new();
    let mut emit = |name: String, body: String| -> Result<(), CliError> {
        let path = staging.path().join(&name);
        let mut f = fs::File::create(&path).map_err(CliError::io(&path))?;
        f.write_all(body.as_bytes()).map_err(CliError::io(&path))?;
        names.push(name);
        Ok(())
    };

    for (i, tr) in output.trajectories.iter().enumerate() {
        emit(format!("trajectory_{i}.csv"), trajectory_csv(tr))?;
    }
    for (i, sec) in output.sections.iter().enumerate() {
        if let Some(sec) = sec {
            emit(format!("section_{i}.csv"), section_csv(sec))?;
        }
    }
    for ([a, b], report) in &output.divergence {
        emit(format!("divergence_{a}_{b}.csv"), divergence_csv(report))?;
    }
    if let Some(e) = &output.quantum_energy {
        emit("energy_quantum.csv".into(), energy_csv(e))?;
    }
    if let Some(e) = &output.classical_energy {
        emit("energy_classical.csv".into(), energy_csv(e))?;
    }
    names.push("summary.toml".into());
    let summary = summarize(config, output, names.clone());
    let summary_text = toml::to_string(&summary).expect("summary serializes");
    let summary_path = staging.path().join("summary.toml");
    fs::write(&summary_path, summary_text).map_err(CliError::io(&summary_path))?;

    let mut files = Vec::with_capacity(names.len());
    for name in &names {
        let from = staging.path().join(name);
        let to = out_dir.join(name);
        fs::rename(&from, &to).map_err(CliError::io(&to))?;
        files.push(to);
    }
    Ok((files, summary))
}

fn summarize(config: &ScenarioConfig, output: &ScenarioOutput, files: Vec<String>) -> RunSummary {
    let classical = output.classical_energy.as_ref().map(|series| {
        let xs: Vec<f64> = (0..series.len()).map(|n| n as f64).collect();
        let fit = linear_fit(&xs, series).ok();
        ClassicalResults {
            final_energy: *series.last().expect("series includes kick 0"),
            energy_slope: fit.map_or(0.0, |f| f.slope),
            energy_r_squared: fit.map_or(0.0, |f| f.r_squared),
            lyapunov: output.lyapunov,
        }
    });
    let trajectories = output
        .trajectories
        .iter()
        .enumerate()
        .map(|(index, t)| TrajectoryResult {
            index,
            theta0: t.meta.theta0,
            samples: t.samples().len(),
            final_theta_unwrapped: t.last().angle.unwrapped,
            final_p_theta: t.last().p_theta,
            steps: t.meta.stats.steps,
            rejections: t.meta.stats.rejections,
            node_halvings: t.meta.stats.node_halvings,
            min_density: Some(t.meta.stats.min_density).filter(|d| d.is_finite()),
        })
        .collect();
    let divergence = output
        .divergence
        .iter()
        .map(|(pair, r)| DivergenceResult {
            pair: *pair,
            log_fit_rate: r.log_fit_rate,
            rate_per_period: r.log_fit_rate * output.params.period,
            growth: r.growth,
            max_separation: r.max_separation(),
            fit_window: [r.fit_window.0, r.fit_window.1],
            verdict: match r.verdict {
                Verdict::Bounded => "bounded".into(),
                Verdict::Divergent => "divergent".into(),
            },
        })
        .collect();
    RunSummary {
        config: config.clone(),
        results: SummaryResults {
            k: output.params.k,
            tau: output.params.tau,
            big_k: output.params.big_k,
            n_kicks: output.n_kicks,
            t_end: output.t_end,
            max_norm_defect: output.max_norm_defect,
            final_quantum_energy: output.quantum_energy.as_ref().and_then(|e| e.last().copied()),
            classical,
            files,
            trajectories,
            divergence,
        },
    }
}

/// Seventeen significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trajectory_csv(t: &Trajectory<f64>) -> String {
    let mut s = String::with_capacity(96 * (t.samples().len() + 1));
    s.push_str(TRAJECTORY_HEADER);
    s.push('\n');
    for p in t.samples() {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            num(p.t),
            p.kick,
            num(p.angle.wrapped),
            num(p.angle.unwrapped),
            num(p.p_theta)
        ));
    }
    s
}

pub fn energy_csv(series: &[f64]) -> String {
    let mut s = format!("{ENERGY_HEADER}\n");
    for (n, e) in series.iter().enumerate() {
        s.push_str(&format!("{n},{}\n", num(*e)));
    }
    s
}

pub fn section_csv(sec: &PoincareSection<f64>) -> String {
    let mut s = format!("{SECTION_HEADER}\n");
    for p in &sec.points {
        s.push_str(&format!("{},{},{}\n", p.kick, num(p.theta), num(p.p_theta)));
    }
    s
}

pub fn divergence_csv(r: &DivergenceReport<f64>) -> String {
    let mut s = format!("{DIVERGENCE_HEADER}\n");
    for (t, d) in r.times.iter().zip(&r.separations) {
        s.push_str(&format!("{},{}\n", num(*t), num(*d)));
    }
    s
}
