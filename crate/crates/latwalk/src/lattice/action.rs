use statrs::function::factorial::ln_binomial;

use crate::scalar::{Rational, Scalar};

/// Action of a 1-d trajectory: number of nonzero steps.
pub fn particle_action(positions: &[i64]) -> u64 {
    positions.windows(2).map(|w| (w[1] - w[0]).unsigned_abs()).sum()
}

/// Expected action at node `(x, t)` for a free single source at `x0`.
pub fn expected_action(x: i64, t: u64, x0: i64) -> Rational {
    let d = x - x0;
    let t = t as i64;
    Rational::ratio(d * d + t * t - t, 2 * t - 1)
}

/// Probability that a free walk seen at `(x, t)` carries action `sigma`.
/// Zero outside the admissible set `|x-x0|, |x-x0|+2, ..., <= t`.
pub fn action_pmf(sigma: u64, x: i64, t: u64, x0: i64) -> f64 {
    let d = (x - x0).unsigned_abs();
    if d > t || sigma < d || sigma > t || (sigma - d) % 2 != 0 {
        return 0.0;
    }
    let n_plus = (sigma as i64 + (x - x0)) / 2;
    let n_plus = n_plus as u64;
    let ln = (t - sigma) as f64 * std::f64::consts::LN_2 + ln_binomial(t, n_plus) + ln_binomial(t - n_plus, t - sigma)
        - ln_binomial(2 * t, (t as i64 + x - x0) as u64);
    ln.exp()
}
