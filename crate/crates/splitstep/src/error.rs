use thiserror::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by numerical contracts across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate state: norm {norm:.3e} too small to renormalize")]
    DegenerateState { norm: f64 },

    #[error("singular coin: |cos(theta2)| = {0:.3e}, decay rate undefined")]
    SingularCoin(f64),

    #[error("chiral eigenvector vanishes for theta2 = {theta2}, chi = {chi}")]
    ZeroEigenvector { theta2: f64, chi: f64 },

    #[error("gap closed: min |c(k)| = {0:.3e}, winding undefined")]
    GapClosed(f64),

    #[error("winding did not converge: rounding residual {0:.3e}; raise k_samples")]
    NonConvergence(f64),

    #[error("planning infeasible: {0}")]
    PlanningInfeasible(String),

    #[error("isolation violated: foreign amplitude {foreign:.3e} in detection bin")]
    IsolationViolation { foreign: f64 },

    #[error(
        "vanishing component: i_w * i_r = {:.3e} at or below noise floor {noise_floor:.3e}",
        i_w * i_r
    )]
    VanishingComponent {
        i_h: f64,
        i_v: f64,
        i_w: f64,
        i_r: f64,
        noise_floor: f64,
    },

    #[error("invalid setting: {0}")]
    InvalidSetting(String),
}
