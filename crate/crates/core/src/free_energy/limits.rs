//! Closed-form pieces of the large-`n` picture.

use crate::error::{Error, Result};

/// `x/2 - (n/2) log(1 + x/n)`, the correction that vanishes in the high-temperature phase.
pub fn high_temp_residual(x_n: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    if !(x_n > -nf) {
        return Err(Error::domain(format!("residual needs X_n > -n, got {x_n} with n = {n}")));
    }
    Ok(0.5 * x_n - 0.5 * nf * (x_n / nf).ln_1p())
}

/// Low-temperature limit map `beta x - log(2 e beta x) / 2` on `x > 1/(2 beta)`.
///
/// Strictly increasing there (derivative `beta - 1/(2x)`), zero at the edge.
pub fn low_temp_limit(x: f64, beta: f64) -> Result<f64> {
    let edge = 1.0 / (2.0 * beta);
    if !(x > edge) {
        return Err(Error::domain(format!("low-temperature limit needs x > {edge}, got {x}")));
    }
    Ok(beta * x - 0.5 * (1.0 + (2.0 * beta * x).ln()))
}
