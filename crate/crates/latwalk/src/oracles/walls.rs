//! Infinite walls and the Delta barrier.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::integrate;
use crate::error::{Error, Result};
use crate::special::erfcx;

/// Normalized box eigenfunction of level `n` on `[-a, a]`.
pub fn box_eigenfunction(n: usize, a: f64, x: f64) -> f64 {
    if x.abs() > a {
        return 0.0;
    }
    let k = n as f64 * PI * x / (2.0 * a);
    let f = if n % 2 == 1 { k.cos() } else { k.sin() };
    f / a.sqrt()
}

/// Stationary density of box level `n`.
pub fn box_stationary(x: f64, n: usize, a: f64) -> f64 {
    box_eigenfunction(n, a, x).powi(2)
}

pub fn box_energy(n: usize, a: f64) -> f64 {
    (n * n) as f64 / (8.0 * a * a)
}

/// Positive momentum eigenvalue of level `n`; the other one is its negative.
pub fn box_momentum_peak(n: usize, a: f64) -> f64 {
    n as f64 / (2.0 * a)
}

fn damped(t: Complex64) -> Result<()> {
    if t.im < 0.0 && t.re.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "box kernel sums converge only for Im t < 0, got {t}"
        )))
    }
}

/// Box kernel as an eigenfunction sum at complex time `t` with `Im t < 0`.
pub fn box_propagator_eigen(x: f64, x0: f64, t: Complex64, a: f64) -> Result<Complex64> {
    damped(t)?;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut n = 1usize;
    loop {
        let phase = Complex64::new(0.0, -PI * box_energy(n, a)) * t;
        sum += phase.exp() * box_eigenfunction(n, a, x0) * box_eigenfunction(n, a, x);
        let bound = (PI * box_energy(n + 1, a) * t.im).exp() / a;
        if n > 2 && bound < 1e-10 * sum.norm().max(1e-300) {
            return Ok(sum);
        }
        n += 1;
        if n > 10_000_000 {
            return Err(Error::Solver("eigen sum did not converge".into()));
        }
    }
}

/// Box kernel as a signed image sum at complex time `t` with `Im t < 0`.
pub fn box_propagator_images(x: f64, x0: f64, t: Complex64, a: f64) -> Result<Complex64> {
    damped(t)?;
    let i = Complex64::i();
    let term = |l: i64| {
        let sign = if l.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let r = x - 2.0 * l as f64 * a - sign * x0;
        sign * (i * PI * r * r / (2.0 * t)).exp()
    };
    let mut sum = term(0);
    let mut l = 1i64;
    loop {
        let pair = term(l) + term(-l);
        sum += pair;
        if l > 2 && pair.norm() < 1e-10 * sum.norm().max(1e-300) {
            break;
        }
        l += 1;
        if l > 10_000_000 {
            return Err(Error::Solver("image sum did not converge".into()));
        }
    }
    Ok(sum / (2.0 * i * t).sqrt())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("barrier strength {lambda} must be non-negative")))
    }
}

/// Density after time `t` for a single source at `x0` facing a Delta
/// barrier at the origin, with the virtual sources lumped at their mean.
/// The side holding the source carries the reflected mass.
pub fn delta_single_pdf(x: f64, t: f64, x0: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if (x - x0).abs() > t {
        return Ok(0.0);
    }
    let c = lambda * PI * t;
    if c == 0.0 {
        return Ok(1.0 / (2.0 * t));
    }
    let side = if x0 >= 0.0 { 1.0 } else { -1.0 };
    let ratio = if x * side < 0.0 {
        let r = (x - x0).powi(2);
        r / (c * c + r)
    } else {
        let r = (x + x0).powi(2);
        (r + 2.0 * c * c) / (r + c * c)
    };
    Ok(ratio / (2.0 * t))
}

/// Transmitted fraction for a single source close to the barrier.
pub fn tra_single(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let k = lambda * PI;
    if k == 0.0 {
        return Ok(0.5);
    }
    Ok(0.5 - 0.5 * k * (1.0 / k).atan())
}

/// Plane-wave transmission coefficient.
pub fn tra_plane(lambda: f64, v_phi: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if v_phi == 0.0 {
        return Err(Error::Domain("plane wave needs a non-zero velocity".into()));
    }
    Ok(1.0 / (1.0 + (PI * lambda / v_phi).powi(2)))
}

/// Amplitude of a Gaussian packet (centre `a`, width `d`, velocity `v_phi`)
/// scattered by a Delta barrier at the origin.
pub fn delta_gaussian_amplitude(x: f64, t: f64, a: f64, d: f64, v_phi: f64, lambda: f64) -> Result<Complex64> {
    check_lambda(lambda)?;
    if !(d > 0.0) {
        return Err(Error::Domain("packet width must be positive".into()));
    }
    let i = Complex64::i();
    let mu = Complex64::new(d * d, t / PI);
    let centre = x - a - v_phi * t;
    let psi0 = (d / (PI.sqrt() * mu)).sqrt()
        * (-(centre * centre) / (2.0 * mu) + i * PI * v_phi * x - i * PI * v_phi * v_phi * t / 2.0).exp();
    if lambda == 0.0 {
        return Ok(psi0);
    }
    let kick = i * PI * v_phi * d * d;
    let dd = (PI * PI * lambda * mu + a + x.abs() + kick) / (2.0 * mu).sqrt();
    let tail = (x + x.abs()) / mu * (-kick - a);
    let psi1 = 1.0 - PI * PI * lambda * (PI * mu / 2.0).sqrt() * erfcx(dd) * tail.exp();
    Ok(psi0 * psi1)
}

/// Probability mass `(x < 0, x > 0)` of the scattered Gaussian packet.
pub fn delta_gaussian_split(t: f64, a: f64, d: f64, v_phi: f64, lambda: f64) -> Result<(f64, f64)> {
    let width = (d * d * (1.0 + t * t / (PI * PI * d.powi(4))) / 2.0).sqrt();
    let reach = a.abs() + v_phi.abs() * t + 14.0 * width + 10.0;
    let n = ((reach / width.min(1.0)) as usize * 40).max(20_000);
    let mut failed = None;
    let mut density = |x: f64| match delta_gaussian_amplitude(x, t, a, d, v_phi, lambda) {
        Ok(p) => p.norm_sqr(),
        Err(e) => {
            failed = Some(e);
            0.0
        }
    };
    let left = integrate(&mut density, -reach, 0.0, n);
    let right = integrate(&mut density, 0.0, reach, n);
    match failed {
        Some(e) => Err(e),
        None => Ok((left, right)),
    }
}
