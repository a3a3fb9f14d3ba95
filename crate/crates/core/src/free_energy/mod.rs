//! Free energy of the spherical model: the contour exponent, its saddle point,
//! the phase split and several evaluations of `log Z_n`.

pub mod bessel;
pub mod limits;
pub mod partition;
pub mod saddle;

pub use limits::{high_temp_residual, low_temp_limit};
pub use partition::{log_c_n, log_z_bessel_n2, log_z_laplace, log_z_quadrature, log_z_sphere_mc, LogZMethod, LogZResult};
pub use saddle::{
    classify_phase, g_value, saddle_derivative, solve_gamma, Phase, SaddleContext, SaddleResult, SADDLE_RESIDUAL_TOL,
};
