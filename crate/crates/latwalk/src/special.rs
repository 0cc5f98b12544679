//! Special functions used by the source families and oracles.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Normalized Hermite function `H_n(y) e^{-y²/2} / sqrt(2^n n! sqrt(pi))`,
/// evaluated by the stable three-term recurrence.
pub fn hermite_function(n: usize, y: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * y * y).exp();
    for k in 0..n {
        let k = k as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * y * cur - (k / (k + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Physicists' Hermite polynomial `H_n(y)`.
pub fn hermite(n: usize, y: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let next = 2.0 * y * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Associated Legendre function `P_l^m(x)` without the Condon-Shortley phase.
pub fn assoc_legendre(l: usize, m: usize, x: f64) -> f64 {
    if m > l {
        return 0.0;
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    for k in 0..m {
        pmm *= (2 * k + 1) as f64 * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    for ll in (m + 2)..=l {
        let next = ((2 * ll - 1) as f64 * x * pm1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pm1;
        pm1 = next;
    }
    pm1
}

/// `|Y_lm(theta, .)|²`, independent of the azimuth.
pub fn spherical_harmonic_sq(l: usize, m: usize, theta: f64) -> f64 {
    let mut ratio = 1.0;
    for k in (l - m + 1)..=(l + m) {
        ratio /= k as f64;
    }
    let p = assoc_legendre(l, m, theta.cos());
    (2 * l + 1) as f64 / (4.0 * PI) * ratio * p * p
}

const WEIDEMAN_N: usize = 64;

fn weideman_coeffs() -> &'static (f64, Vec<f64>) {
    static C: OnceLock<(f64, Vec<f64>)> = OnceLock::new();
    C.get_or_init(|| {
        let n = WEIDEMAN_N;
        let m = 2 * n;
        let m2 = 2 * m;
        let l = (n as f64 / 2f64.sqrt()).sqrt();
        // f over k = -M+1..M-1 with a leading zero, then fftshift and DFT.
        let mut f = vec![0.0; m2];
        for (idx, k) in (-(m as i64) + 1..m as i64).enumerate() {
            let theta = k as f64 * PI / m as f64;
            let t = l * (theta / 2.0).tan();
            f[idx + 1] = (-t * t).exp() * (l * l + t * t);
        }
        let mut g = vec![0.0; m2];
        for i in 0..m2 {
            g[i] = f[(i + m2 / 2) % m2];
        }
        let mut a = vec![0.0; n + 1];
        for (kk, ak) in a.iter_mut().enumerate() {
            let mut re = 0.0;
            for (i, gi) in g.iter().enumerate() {
                re += gi * (-2.0 * PI * (i * kk) as f64 / m2 as f64).cos();
            }
            *ak = re / m2 as f64;
        }
        // polynomial coefficients a_1..a_N, lowest degree first
        (l, a[1..].to_vec())
    })
}

/// Faddeeva function `w(z) = exp(-z²) erfc(-i z)`.
pub fn faddeeva(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return 2.0 * (-z * z).exp() - faddeeva(-z);
    }
    let (l, a) = weideman_coeffs();
    let i = Complex64::i();
    let den = *l - i * z;
    let zz = (*l + i * z) / den;
    let mut p = Complex64::new(0.0, 0.0);
    for c in a.iter().rev() {
        p = p * zz + c;
    }
    2.0 * p / (den * den) + (1.0 / PI.sqrt()) / den
}

/// Scaled complementary error function `exp(z²) erfc(z)`.
pub fn erfcx(z: Complex64) -> Complex64 {
    faddeeva(Complex64::i() * z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_function_matches_polynomial_form() {
        let mut fact = 1.0;
        for n in 0..12usize {
            if n > 0 {
                fact *= n as f64;
            }
            for &y in &[-2.5, -0.3, 0.0, 0.7, 3.1] {
                let direct = hermite(n, y) * (-y * y / 2.0).exp() / (2f64.powi(n as i32) * fact * PI.sqrt()).sqrt();
                assert!((hermite_function(n, y) - direct).abs() < 1e-12, "n={n} y={y}");
            }
        }
    }

    #[test]
    fn legendre_examples() {
        let x: f64 = 0.3;
        assert!((assoc_legendre(4, 0, x) - (35.0 * x.powi(4) - 30.0 * x * x + 3.0) / 8.0).abs() < 1e-14);
        assert!((assoc_legendre(2, 1, x) - 3.0 * x * (1.0 - x * x).sqrt()).abs() < 1e-14);
        assert!((assoc_legendre(2, 2, x) - 3.0 * (1.0 - x * x)).abs() < 1e-14);
    }

    #[test]
    fn spherical_harmonics_are_normalized() {
        for (l, m) in [(0, 0), (4, 0), (4, 2), (7, 3)] {
            let n = 20000;
            let h = PI / n as f64;
            let s: f64 = (0..n)
                .map(|k| {
                    let th = (k as f64 + 0.5) * h;
                    spherical_harmonic_sq(l, m, th) * th.sin() * h * 2.0 * PI
                })
                .sum();
            assert!((s - 1.0).abs() < 1e-6, "l={l} m={m} s={s}");
        }
    }

    #[test]
    fn faddeeva_reference_values() {
        let w = faddeeva(Complex64::new(0.0, 0.0));
        assert!((w - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let w = faddeeva(Complex64::new(0.0, 1.0));
        assert!((w.re - 0.427_583_576_155_807_0).abs() < 1e-12);
        let w = faddeeva(Complex64::new(1.0, 1.0));
        assert!((w - Complex64::new(0.304_744_205_256_912_6, 0.208_218_938_202_831_6)).norm() < 1e-12);
    }

    #[test]
    fn erfcx_matches_real_reference() {
        let table = [
            (-2.0, 108.940_904_389_977_97),
            (-0.5, 1.952_360_489_182_557),
            (0.0, 1.0),
            (0.4, 0.670_787_785_294_761_5),
            (1.7, 0.291_663_297_075_343_4),
            (4.0, 0.136_999_457_625_061_4),
        ];
        for (x, expect) in table {
            let w = erfcx(Complex64::new(x, 0.0));
            assert!((w.re - expect).abs() < 1e-12 * expect.max(1.0), "x={x}");
            assert!(w.im.abs() < 1e-12);
        }
    }
}
