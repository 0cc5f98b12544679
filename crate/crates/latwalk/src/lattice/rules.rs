use super::store::{LatticeBoson, LatticeCell, ParticleBoson};
use super::Node;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Transition probabilities `(p+, p0, p-)` for momentum propensity `v`.
pub fn step_probabilities<S: Scalar>(v: &S) -> Result<(S, S, S)> {
    if v.abs() > S::one() {
        return Err(Error::Domain(format!(
            "momentum propensity {:?} outside [-1, 1]",
            v.to_f64()
        )));
    }
    let two = S::from_int(2);
    let e = (S::one() + v.clone() * v.clone()) / two.clone();
    let p_plus = (e.clone() + v.clone()) / two.clone();
    let p_minus = (e.clone() - v.clone()) / two;
    let p_zero = S::one() - e;
    Ok((p_plus, p_zero, p_minus))
}

/// True iff the cell exists and its trace differs from the span.
pub fn reset_condition<S>(span: &Node, cell: Option<&LatticeCell<S>>) -> bool {
    match cell {
        Some(c) => c.trace != *span,
        None => false,
    }
}

/// One lifetime step of a particle boson: `k += 1`, momentum scaled by
/// `1 - 1/(2k)`.
pub fn pb_decay<S: Scalar>(b: &mut ParticleBoson<S>) {
    b.k += 1;
    let factor = S::one() - S::one() / S::from_int(2 * b.k as i64);
    b.momentum = b.momentum.clone() * factor;
}

/// One lifetime step of a lattice boson: `kappa += 1`, momentum scaled by
/// `1 - (omega_bar/kappa)^2`.
pub fn lb_decay<S: Scalar>(b: &mut LatticeBoson<S>) {
    b.kappa += 1;
    let r = b.omega_bar.clone() / S::from_int(b.kappa as i64);
    b.omega = b.omega.clone() * (S::one() - r.clone() * r);
}
