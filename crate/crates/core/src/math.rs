//! Float math shims for `no_std` builds.

pub use libm::{cos, exp, fabs, sin, sqrt};

/// Wrap an angle into [0, 2π).
pub fn wrap_angle(phi: f64) -> f64 {
    let tau = 2.0 * core::f64::consts::PI;
    let mut x = phi % tau;
    if x < 0.0 {
        x += tau;
    }
    // The remainder can land exactly on tau after the correction.
    if x >= tau {
        x -= tau;
    }
    x
}
