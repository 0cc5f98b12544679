//! Closed-form reference densities the simulator is tested against.
//!
//! Everything here is a pure function of its arguments. Positions are in
//! lattice units, momenta in units of the maximum speed, and amplitudes use
//! the convention `hbar = 1/pi`, unit mass.

mod curved;
mod propagate;
mod walls;
mod wigner;

pub use curved::{
    ring_peak, ring_plane_wave, ring_stationary, sphere_energy, sphere_jz, sphere_meridian_density, sphere_phi_peak,
    sphere_stationary, sphere_theta_peak,
};
pub use propagate::{
    accessible, amplitude, amplitude_nd, gaussian_faller, gaussian_free, gaussian_ho, ho_momentum, ho_position,
    momentum_amplitude, momentum_peaks, pdf_born, pdf_free, pdf_free_nd, pdf_momentum, pdf_momentum_cosine,
    pdf_momentum_propagated, pdf_quadratic, position_from_momentum, single_source_pmf,
};
pub use walls::{
    box_eigenfunction, box_energy, box_momentum_peak, box_propagator_eigen, box_propagator_images, box_stationary,
    delta_gaussian_amplitude, delta_gaussian_split, delta_single_pdf, tra_plane, tra_single,
};
pub use wigner::{binomial_kernel, wigner};

/// Closed interval of accessible positions or momenta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Composite Simpson rule with `n` (rounded up to even) panels.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, n: usize) -> f64 {
    let n = (n.max(2) + 1) & !1;
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + k as f64 * h);
    }
    s * h / 3.0
}
