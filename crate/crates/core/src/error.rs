use thiserror::Error;

/// Closest approach to a node of the wavefunction, recorded when the velocity
/// field or quantum potential can no longer be evaluated reliably.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeEvent {
    pub time: f64,
    pub angle: f64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` out of domain: {value} ({requirement})")]
    ParameterDomain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("degenerate state: {0}")]
    DegenerateState(&'static str),

    #[error("negative argument {value} passed to {what}")]
    NegativeArgument { what: &'static str, value: f64 },

    #[error("band truncation failed at kick {kick}: norm defect {defect:e} exceeds tolerance with band [{n_min}, {n_max}]")]
    TruncationFailure {
        kick: usize,
        defect: f64,
        n_min: i64,
        n_max: i64,
    },

    #[error("time {t} outside timeline horizon [0, {horizon}]")]
    Horizon { t: f64, horizon: f64 },

    #[error("node proximity at t = {}, theta = {}: density {:e} below floor", .0.time, .0.angle, .0.density)]
    NodeProximity(NodeEvent),

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("sampling contract violated: {0}")]
    SamplingContract(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad inputs).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TruncationFailure { .. } | Error::NodeProximity(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
