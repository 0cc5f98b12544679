//! Ring and sphere references. Positions on the ring are arc lengths in
//! `[-pi r, pi r)`; on the sphere they are colatitudes.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::spherical_harmonic_sq;

fn positive(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("radius {r} must be positive")))
    }
}

/// Per-node probability of the ring plane wave.
pub fn ring_plane_wave(r: f64) -> Result<f64> {
    positive(r)?;
    Ok(1.0 / ((2.0 * PI * r).floor() + 1.0))
}

/// Stationary ring density of level `n` per unit arc length at arc `s`.
pub fn ring_stationary(s: f64, n: i64, r: f64) -> Result<f64> {
    positive(r)?;
    if s.abs() > PI * r {
        return Err(Error::Domain(format!("arc {s} is off the ring of radius {r}")));
    }
    let phi = n as f64 * s / r;
    let f = if n.rem_euclid(2) == 1 { phi.sin() } else { phi.cos() };
    Ok(f * f / (PI * r))
}

/// Momentum eigenvalue of ring level `m`.
pub fn ring_peak(m: i64, r: f64) -> f64 {
    m as f64 / (PI * r)
}

/// `|Y_lm|²` per unit solid angle.
pub fn sphere_stationary(theta: f64, l: usize, m: usize) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("colatitude {theta} outside [0, pi]")));
    }
    if m > l {
        return Err(Error::Domain(format!("m = {m} exceeds l = {l}")));
    }
    Ok(spherical_harmonic_sq(l, m, theta))
}

/// Density over colatitude after integrating out the azimuth.
pub fn sphere_meridian_density(theta: f64, l: usize, m: usize) -> Result<f64> {
    Ok(2.0 * PI * sphere_stationary(theta, l, m)? * theta.sin())
}

/// Latitudinal momentum peak at colatitude `theta_hat`.
pub fn sphere_theta_peak(l: usize, m: usize, theta_hat: f64, r: f64) -> Result<f64> {
    positive(r)?;
    let s = theta_hat.sin();
    let q = (l * (l + 1)) as f64 - if m == 0 { 0.0 } else { (m * m) as f64 / (s * s) };
    if q < 0.0 {
        return Err(Error::Domain(format!("no latitudinal peak at colatitude {theta_hat}")));
    }
    Ok(q.sqrt() / (PI * r))
}

/// Azimuthal momentum peak at colatitude `theta_hat`.
pub fn sphere_phi_peak(m: usize, theta_hat: f64, r: f64) -> Result<f64> {
    positive(r)?;
    Ok(m as f64 / (PI * r * theta_hat.sin().powi(2)))
}

pub fn sphere_energy(l: usize, r: f64) -> f64 {
    (l * (l + 1)) as f64 / (2.0 * PI * PI * r * r)
}

/// Peak of the z component of the angular momentum.
pub fn sphere_jz(m: usize) -> f64 {
    m as f64 / PI
}
