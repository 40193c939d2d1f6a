//! Independent numerical checks of the closed forms: Crank–Nicolson
//! propagation, finite-difference residuals and the two overlap kernels
//! between invariant eigenfunctions.

mod inner_product;
mod propagate;
mod residual;

pub use inner_product::{
    eta_overlap, gaussian_test_function, inner_product_report, pt_inner_product, pt_inner_product_regularized,
    pt_smeared, InnerProductReport, RegularizedValue, DELTA_TOLERANCE, EPSILON_LADDER, NON_DELTA_THRESHOLD,
};
pub use propagate::{
    covering_grid, dt_convergence, eta_norm, free_gaussian, hermitian_samples, propagate_tdse, ConvergenceReport,
    PropagatorConfig, INSTABILITY_DRIFT,
};
pub use residual::{tdse_residual, ResidualReport, RESIDUAL_STEP};
