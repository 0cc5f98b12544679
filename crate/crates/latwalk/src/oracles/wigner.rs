//! Positive phase-space density for free sources.

use statrs::distribution::{Binomial, Discrete};

use super::propagate::pdf_momentum;
use crate::sources::SourceEnsemble;

/// Probability of sitting at `x` after `t` steps from `x0` with constant
/// momentum `v`: a binomial over `2t` half-steps with success `(1 + v)/2`.
pub fn binomial_kernel(x: i64, v: f64, t: u64, x0: i64) -> f64 {
    let k = t as i64 + x - x0;
    if k < 0 || k > 2 * t as i64 {
        return 0.0;
    }
    let p = ((1.0 + v) / 2.0).clamp(0.0, 1.0);
    Binomial::new(p, 2 * t).map(|b| b.pmf(k as u64)).unwrap_or(0.0)
}

/// Phase-space density at node `x` and momentum `v`.
pub fn wigner(x: i64, v: f64, t: u64, e: &SourceEnsemble) -> f64 {
    let kernel: f64 = e.sources.iter().map(|s| s.p * binomial_kernel(x, v, t, s.x[0])).sum();
    kernel * pdf_momentum(v, e)
}

#[cfg(test)]
mod tests {
    use super::super::{integrate, pdf_free};
    use super::*;
    use crate::sources::{Family, DEFAULT_PRUNE};

    #[test]
    fn kernel_moments() {
        let (t, v) = (50u64, 0.3);
        let mass: f64 = (-60..=60).map(|x| binomial_kernel(x, v, t, 0)).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        let mean: f64 = (-60..=60).map(|x| x as f64 * binomial_kernel(x, v, t, 0)).sum();
        assert!((mean - v * t as f64).abs() < 1e-9);
        let var: f64 = (-60..=60)
            .map(|x| (x as f64 - mean).powi(2) * binomial_kernel(x, v, t, 0))
            .sum();
        assert!((var - t as f64 * (1.0 - v * v) / 2.0).abs() < 1e-9);
        assert_eq!(binomial_kernel(1, 0.0, 1, 0), 0.25);
        assert_eq!(binomial_kernel(0, 0.0, 1, 0), 0.5);
    }

    #[test]
    fn marginals_reproduce_both_densities() {
        let e = Family::TwoSlit { d: 1, p: [0.5, 0.5] }.prepare(DEFAULT_PRUNE).unwrap();
        let t = 500u64;
        for x in [-450, -250, -120, 0, 77, 300] {
            let m = integrate(|v| wigner(x, v, t, &e), -1.0, 1.0, 8000);
            let rho = pdf_free(x as f64, t as f64, &e).unwrap();
            assert!((m - rho).abs() < 1e-4, "x={x}: {m} vs {rho}");
        }
        for v in [-0.7, -0.25, 0.0, 0.5] {
            let m: f64 = (-520..=520).map(|x| wigner(x, v, t, &e)).sum();
            assert!((m - pdf_momentum(v, &e)).abs() < 1e-4);
        }
        for x in (-500..=500).step_by(50) {
            for k in 0..21 {
                assert!(wigner(x, -1.0 + 0.1 * k as f64, t, &e) >= 0.0);
            }
        }
    }
}
