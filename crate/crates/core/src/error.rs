use thiserror::Error;

/// Errors raised by the simulator.
///
/// Variants split into two families: configuration problems (bad input that
/// the caller should fix) and regime problems (valid input for which a
/// formula, a truncation or an iteration breaks down). [`Error::is_regime`]
/// tells them apart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series truncation needs index {needed} but the hard cap is {cap}; thermal weights too large")]
    Truncation { needed: usize, cap: usize },

    #[error("decay spectrum is negative at omega = {omega} (value {value}, threshold {threshold})")]
    NegativeSpectrum {
        omega: f64,
        value: f64,
        threshold: f64,
    },

    #[error("fixed point did not converge after {iterations} iterations at n = {n} (last relative change {residual:e})")]
    NotConverged {
        n: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("dead chain: every excitation, relaxation and photon rate vanishes at n = {n}")]
    DeadChain { n: usize },

    #[error("tail mass {tail_mass:e} at n_max = {n_max} exceeds bound {bound:e}; increase n_max (try {suggested})")]
    TailMass {
        n_max: usize,
        tail_mass: f64,
        bound: f64,
        suggested: usize,
    },

    #[error("joint generator has {closed_classes} closed communicating classes (first states: {representatives:?}); stationary state is not unique")]
    Disconnected {
        closed_classes: usize,
        representatives: Vec<(char, usize)>,
    },

    #[error("outside the regime of the closed form: {0}")]
    Regime(String),
}

impl Error {
    /// True for failures caused by the physical regime or numerical
    /// convergence rather than by malformed input.
    pub fn is_regime(&self) -> bool {
        !matches!(
            self,
            Error::InvalidParameter { .. } | Error::InvalidArgument(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
