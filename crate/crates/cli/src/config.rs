//! Scenario documents.
//!
//! Scenarios are TOML. A document may name a `preset`; the preset is loaded
//! first and the document's own tables are merged over it key by key (arrays,
//! such as `trajectories`, are replaced whole).

use std::path::PathBuf;

use bohm_rotor::{
    make_cosine_superposition, make_eigenstate, make_gaussian_packet, make_two_mode, RotorParams, SpectralState,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::presets;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub params: ParamsSpec,
    #[serde(default)]
    pub state: StateSpec,
    #[serde(default)]
    pub trajectories: Vec<TrajectorySpec>,
    pub run: RunSpec,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub band: BandSpec,
    #[serde(default)]
    pub energy: EnergySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalSpec>,
    #[serde(default)]
    pub divergence: DivergenceSpec,
}

/// Either `(omega0, period)` or `(k, tau)`, never both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub inertia: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Eigenstate {
        n0: i64,
    },
    CosineSuperposition {
        a: f64,
    },
    TwoMode {
        a0: f64,
        a1: f64,
    },
    Gaussian {
        p_mean: f64,
        p_halfwidth: f64,
        #[serde(default)]
        theta_center_deg: f64,
    },
}

impl Default for StateSpec {
    fn default() -> Self {
        Self::Eigenstate { n0: 0 }
    }
}

impl StateSpec {
    pub fn build(&self) -> bohm_rotor::Result<SpectralState<f64>> {
        match *self {
            Self::Eigenstate { n0 } => Ok(make_eigenstate(n0)),
            Self::CosineSuperposition { a } => Ok(make_cosine_superposition(a)),
            Self::TwoMode { a0, a1 } => make_two_mode(a0, a1),
            Self::Gaussian {
                p_mean,
                p_halfwidth,
                theta_center_deg,
            } => make_gaussian_packet(p_mean, p_halfwidth, theta_center_deg.to_radians()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0_rad: Option<f64>,
    /// Initial angular velocity, required by (and only by) `newton_relaxed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    /// Dimensionless map momentum for `classical_map`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    /// Per-trajectory initial state replacing `[state]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
}

impl TrajectorySpec {
    /// Initial angle in radians. Valid only after validation.
    pub fn theta0(&self) -> f64 {
        self.theta0_rad
            .or(self.theta0_deg.map(f64::to_radians))
            .expect("validated trajectory has an angle")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsMode {
    #[default]
    BohmVelocity,
    NewtonConstrained,
    NewtonRelaxed,
    ClassicalMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default)]
    pub dynamics: DynamicsMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_kicks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Trajectory samples per kick period.
    #[serde(default = "default_cadence")]
    pub cadence: usize,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSpec {
    pub rtol: f64,
    pub atol: f64,
    /// Node floor in units of the mean density `1/2π`.
    pub node_floor_factor: f64,
    pub max_halvings: u32,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-9,
            node_floor_factor: bohm_rotor::bohm::DEFAULT_NODE_FLOOR_FACTOR,
            max_halvings: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandSpec {
    /// Largest `|n|` the momentum band may reach.
    pub cap: i64,
    pub norm_tolerance: f64,
}

impl Default for BandSpec {
    fn default() -> Self {
        let p = bohm_rotor::TruncationPolicy::<f64>::default();
        Self {
            cap: p.band_cap,
            norm_tolerance: p.norm_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EnergySpec {
    /// Emit the quantum `⟨E⟩` per kick.
    #[serde(default)]
    pub quantum: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MomentumMode {
    #[default]
    Zero,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSpec {
    #[serde(default = "default_ensemble")]
    pub ensemble_size: usize,
    #[serde(default)]
    pub momentum: MomentumMode,
    /// Fixed momentum (`zero`) or lower end of the uniform range.
    #[serde(default)]
    pub momentum_offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<LyapunovSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovSpec {
    pub n_iter: usize,
    pub theta0: f64,
    pub p0: f64,
    #[serde(default = "one_usize")]
    pub renorm_interval: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DivergenceSpec {
    pub rate_per_period: f64,
    pub min_growth: f64,
    pub min_samples: usize,
    /// Trajectory index pairs to compare; defaults to `[0, 1]` when there are
    /// two or more trajectories.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[usize; 2]>>,
}

impl Default for DivergenceSpec {
    fn default() -> Self {
        Self {
            rate_per_period: 0.05,
            min_growth: 20.0,
            min_samples: 10,
            pairs: None,
        }
    }
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn default_cadence() -> usize {
    20
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_ensemble() -> usize {
    10_000
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

impl ParamsSpec {
    pub fn rotor(&self) -> Result<RotorParams<f64>, CliError> {
        let domain = |e: bohm_rotor::Error| invalid("params", e.to_string());
        match (self.omega0, self.period, self.k, self.tau) {
            (Some(omega0), Some(period), None, None) => {
                RotorParams::new(self.hbar, self.inertia, omega0, period).map_err(domain)
            }
            (None, None, Some(k), Some(tau)) => {
                if self.hbar == 1.0 && self.inertia == 1.0 {
                    return RotorParams::from_dimensionless(k, tau).map_err(domain);
                }
                if !(k >= 0.0) || !(tau > 0.0) {
                    return Err(invalid("params", "k must be >= 0 and tau > 0"));
                }
                let period = tau * self.inertia / self.hbar;
                let omega0 = (k * self.hbar / (self.inertia * period)).sqrt();
                let mut p = RotorParams::new(self.hbar, self.inertia, omega0, period).map_err(domain)?;
                p.k = k;
                p.tau = tau;
                p.big_k = k * tau;
                Ok(p)
            }
            _ => Err(invalid(
                "params",
                "give exactly one of the pairs (omega0, period) or (k, tau), both members present",
            )),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.params.rotor()?;
        self.state.build().map_err(|e| invalid("state", e.to_string()))?;

        let run = &self.run;
        match (run.n_kicks, run.t_max) {
            (Some(_), None) => {}
            (None, Some(t)) if t > 0.0 && t.is_finite() => {}
            (None, Some(_)) => return Err(invalid("run.t_max", "must be finite and > 0")),
            _ => return Err(invalid("run", "give exactly one of n_kicks or t_max")),
        }
        if run.cadence == 0 {
            return Err(invalid("run.cadence", "must be >= 1"));
        }

        for (i, tr) in self.trajectories.iter().enumerate() {
            let at = |f: &str| format!("trajectories[{i}].{f}");
            match (tr.theta0_deg, tr.theta0_rad) {
                (Some(v), None) | (None, Some(v)) if v.is_finite() => {}
                (Some(_), None) | (None, Some(_)) => return Err(invalid(&at("theta0"), "must be finite")),
                _ => return Err(invalid(&at("theta0"), "give exactly one of theta0_deg or theta0_rad")),
            }
            let relaxed = run.dynamics == DynamicsMode::NewtonRelaxed;
            match (relaxed, tr.omega0) {
                (true, None) => return Err(invalid(&at("omega0"), "required for newton_relaxed")),
                (false, Some(_)) => return Err(invalid(&at("omega0"), "only allowed for newton_relaxed")),
                _ => {}
            }
            if tr.p0.is_some() && run.dynamics != DynamicsMode::ClassicalMap {
                return Err(invalid(&at("p0"), "only allowed for classical_map"));
            }
            if let Some(s) = &tr.state {
                if run.dynamics == DynamicsMode::ClassicalMap {
                    return Err(invalid(&at("state"), "not used by classical_map"));
                }
                s.build().map_err(|e| invalid(&at("state"), e.to_string()))?;
            }
        }

        let ig = &self.integrator;
        if !(ig.rtol > 0.0) || !(ig.atol > 0.0) {
            return Err(invalid("integrator", "rtol and atol must be > 0"));
        }
        if !(ig.node_floor_factor >= 0.0) {
            return Err(invalid("integrator.node_floor_factor", "must be >= 0"));
        }
        if self.band.cap < 1 {
            return Err(invalid("band.cap", "must be >= 1"));
        }
        if !(self.band.norm_tolerance > 0.0) {
            return Err(invalid("band.norm_tolerance", "must be > 0"));
        }
        if let Some(c) = &self.classical {
            if c.ensemble_size < bohm_rotor::classical::MIN_ENSEMBLE_SIZE {
                return Err(invalid("classical.ensemble_size", "must be >= 100"));
            }
            if let Some(l) = &c.lyapunov {
                if l.n_iter < bohm_rotor::classical::MIN_LYAPUNOV_ITERATIONS {
                    return Err(invalid("classical.lyapunov.n_iter", "must be >= 1000"));
                }
                if l.renorm_interval == 0 {
                    return Err(invalid("classical.lyapunov.renorm_interval", "must be >= 1"));
                }
            }
        }
        for pair in self.divergence_pairs() {
            if pair[0] >= self.trajectories.len() || pair[1] >= self.trajectories.len() || pair[0] == pair[1] {
                return Err(invalid(
                    "divergence.pairs",
                    format!("pair {pair:?} does not name two distinct trajectories"),
                ));
            }
        }
        if self.trajectories.is_empty() && !self.energy.quantum && self.classical.is_none() {
            return Err(invalid(
                "trajectories",
                "nothing to run: add trajectories, energy.quantum or [classical]",
            ));
        }
        Ok(())
    }

    pub fn divergence_pairs(&self) -> Vec<[usize; 2]> {
        match &self.divergence.pairs {
            Some(p) => p.clone(),
            None if self.trajectories.len() >= 2 => vec![[0, 1]],
            None => Vec::new(),
        }
    }

    /// Serialize back to a document that [`parse_config`] accepts.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }
}

/// Parse, expand a `preset` reference, fill defaults and validate.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    let table = parse_table(text)?;
    resolve(table)
}

/// A document merged over a named preset.
pub fn config_with_preset(preset: &str, overlay: Option<&str>) -> Result<ScenarioConfig, CliError> {
    let mut table = match overlay {
        Some(text) => parse_table(text)?,
        None => toml::Table::new(),
    };
    table.insert("preset".into(), toml::Value::String(preset.into()));
    resolve(table)
}

fn resolve(mut table: toml::Table) -> Result<ScenarioConfig, CliError> {
    if let Some(preset) = table.remove("preset") {
        let name = preset
            .as_str()
            .ok_or_else(|| invalid("preset", "must be a string"))?
            .to_string();
        let base_text = presets::preset_source(&name).ok_or_else(|| CliError::UnknownPreset(name.clone()))?;
        let mut base = parse_table(base_text)?;
        merge(&mut base, table);
        table = base;
    }
    let config: ScenarioConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| invalid("document", e.message().to_string()))?;
    config.validate()?;
    Ok(config)
}

fn parse_table(text: &str) -> Result<toml::Table, CliError> {
    text.parse::<toml::Table>().map_err(|e| {
        let (line, column) = e
            .span()
            .map(|s| line_column(text, s.start))
            .unwrap_or((0, 0));
        CliError::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

/// One-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Merge `overlay` into `base`: tables recursively, everything else replaced.
fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_column_is_one_based() {
        assert_eq!(line_column("ab\ncd", 0), (1, 1));
        assert_eq!(line_column("ab\ncd", 4), (2, 2));
    }

    #[test]
    fn partial_tables_keep_defaults() {
        let c = parse_config("[params]\nk = 1.0\ntau = 1.0\n[[trajectories]]\ntheta0_deg = 1.0\n[run]\nn_kicks = 1\n[band]\ncap = 64\n[integrator]\nrtol = 1e-7\n[divergence]\nmin_growth = 5.0\n").unwrap();
        assert_eq!(c.band.cap, 64);
        assert_eq!(c.band.norm_tolerance, BandSpec::default().norm_tolerance);
        assert_eq!(c.integrator.atol, 1e-9);
        assert_eq!(c.divergence.min_samples, 10);
    }

    #[test]
    fn merge_replaces_arrays_and_descends_tables() {
        let mut base: toml::Table = "x = [1, 2]\n[t]\na = 1\nb = 2\n".parse().unwrap();
        let over: toml::Table = "x = [3]\n[t]\nb = 5\n".parse().unwrap();
        merge(&mut base, over);
        assert_eq!(base["x"].as_array().unwrap().len(), 1);
        assert_eq!(base["t"]["a"].as_integer(), Some(1));
        assert_eq!(base["t"]["b"].as_integer(), Some(5));
    }
}
