//! Numerical tolerances shared by every solver stage.

/// All thresholds used by the solvers and their self-checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Residual bound for dense inverses, `||A X - I||_inf`.
    pub solve_residual: f64,
    /// Contract identities: binding participation, two-way profit, first-order residual.
    pub identity: f64,
    /// Largest tolerated asymmetry of W before it is symmetrized.
    pub symmetry: f64,
    /// Smallest entry accepted for effort or influence terms that must be non-negative.
    pub nonnegative: f64,
    /// Derivative magnitude above which an effect counts as strict.
    pub strict: f64,
    /// Derivative magnitude below which an effect counts as zero.
    pub zero: f64,
    /// Relative analytic/finite-difference disagreement that raises an error.
    pub fd_flag: f64,
    /// Agreement required between the two printed forms of the marginal-effect constant.
    pub kappa_forms: f64,
    /// Agreement flagged between the marginal-effect slope and its finite difference.
    pub marginal_fd: f64,
    /// Relative accuracy target for spectral radii.
    pub spectral: f64,
    /// Iteration cap for the power-iteration fallback.
    pub power_iterations: usize,
    /// Smallest finite-difference step used when a perturbation must shrink.
    pub fd_step_floor: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    solve_residual: 1e-10,
    identity: 1e-9,
    symmetry: 1e-9,
    nonnegative: 1e-12,
    strict: 1e-9,
    zero: 1e-12,
    fd_flag: 1e-4,
    kappa_forms: 1e-12,
    marginal_fd: 1e-6,
    spectral: 1e-10,
    power_iterations: 10_000,
    fd_step_floor: 1e-8,
};

/// Default relative finite-difference step.
pub const FD_REL_STEP: f64 = 1e-5;

/// Step size `1e-5 * max(1, |x|)`.
pub fn default_step(x: f64) -> f64 {
    FD_REL_STEP * x.abs().max(1.0)
}
