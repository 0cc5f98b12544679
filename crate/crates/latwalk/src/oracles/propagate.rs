//! Free and quadratic-potential propagation of a source ensemble.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::Interval;
use crate::error::{Error, Result};
use crate::forces::ClassicalCoefficients;
use crate::sources::SourceEnsemble;
use crate::special::hermite_function;

fn free() -> ClassicalCoefficients {
    ClassicalCoefficients { alpha: 0.0, beta: 0.0 }
}

fn check_time(b: f64, t: f64) -> Result<()> {
    if b == 0.0 {
        Err(Error::Singular { t })
    } else {
        Ok(())
    }
}

/// Exact pmf of a single free source: uniform over the `2t + 1` reachable
/// nodes.
pub fn single_source_pmf(x: i64, t: u64, x0: i64) -> f64 {
    if (x - x0).unsigned_abs() <= t {
        1.0 / (2 * t + 1) as f64
    } else {
        0.0
    }
}

/// Accessible interval of length `2|B|` centred on the image of the
/// ensemble's midpoint. For a single source this is exact; for several it
/// is the window over which the interference terms integrate to zero.
pub fn accessible(e: &SourceEnsemble, coeffs: &ClassicalCoefficients, t: f64) -> Result<Interval> {
    let k = coeffs.eval(t);
    check_time(k.b, t)?;
    let lo = e.sources.iter().map(|s| s.x[0]).min().unwrap_or(0) as f64;
    let hi = e.sources.iter().map(|s| s.x[0]).max().unwrap_or(0) as f64;
    let c = k.a * 0.5 * (lo + hi) + k.c;
    Ok(Interval {
        lo: c - k.b.abs(),
        hi: c + k.b.abs(),
    })
}

/// Cosine-sum density under a quadratic field.
pub fn pdf_quadratic(x: f64, t: f64, e: &SourceEnsemble, coeffs: &ClassicalCoefficients) -> Result<f64> {
    if !accessible(e, coeffs, t)?.contains(x) {
        return Ok(0.0);
    }
    let k = coeffs.eval(t);
    let mut s = 1.0;
    for (i, a) in e.sources.iter().enumerate() {
        for b in &e.sources[i + 1..] {
            let d = (a.x[0] - b.x[0]) as f64;
            let mid = 0.5 * (a.x[0] + b.x[0]) as f64;
            let arg = PI * d * (x - k.a * mid - k.c) / k.b - PI * (a.eps - b.eps);
            s += 2.0 * (a.p * b.p).sqrt() * arg.cos();
        }
    }
    Ok(s / (2.0 * k.b.abs()))
}

pub fn pdf_free(x: f64, t: f64, e: &SourceEnsemble) -> Result<f64> {
    pdf_quadratic(x, t, e, &free())
}

/// Sum of the per-source amplitudes built from the classical action.
pub fn amplitude(x: f64, t: f64, e: &SourceEnsemble, coeffs: &ClassicalCoefficients) -> Result<Complex64> {
    let k = coeffs.eval(t);
    check_time(k.b, t)?;
    let norm = 1.0 / (2.0 * k.b.abs());
    let mut psi = Complex64::new(0.0, 0.0);
    for s in &e.sources {
        let x0 = s.x[0] as f64;
        let action = (k.a * x0 * x0 - 2.0 * x * x0
            + 2.0 * k.c * x0
            + k.b_dot * x * x
            + (2.0 * k.c_dot * k.b - 2.0 * k.b_dot * k.c) * x
            + 2.0 * k.c * k.c * k.b_dot)
            / (2.0 * k.b)
            + s.eps;
        psi += (s.p * norm).sqrt() * Complex64::from_polar(1.0, PI * action);
    }
    Ok(psi)
}

/// `|psi|²` on the same accessible interval as [`pdf_quadratic`].
pub fn pdf_born(x: f64, t: f64, e: &SourceEnsemble, coeffs: &ClassicalCoefficients) -> Result<f64> {
    if !accessible(e, coeffs, t)?.contains(x) {
        return Ok(0.0);
    }
    Ok(amplitude(x, t, e, coeffs)?.norm_sqr())
}

/// Free cosine-sum density in `e.dims` dimensions.
pub fn pdf_free_nd(x: &[f64], t: f64, e: &SourceEnsemble) -> Result<f64> {
    check_time(t, t)?;
    let dims = e.dims;
    if x.len() != dims {
        return Err(Error::Domain(format!("expected {dims} coordinates, got {}", x.len())));
    }
    let mut s = 1.0;
    for (i, a) in e.sources.iter().enumerate() {
        for b in &e.sources[i + 1..] {
            let mut arg = -PI * (a.eps - b.eps);
            for d in 0..dims {
                let disp = (a.x[d] - b.x[d]) as f64;
                let mid = 0.5 * (a.x[d] + b.x[d]) as f64;
                arg += PI * disp * (x[d] - mid) / t;
            }
            s += 2.0 * (a.p * b.p).sqrt() * arg.cos();
        }
    }
    Ok(s / (2.0 * t).powi(dims as i32))
}

/// Free amplitude in `e.dims` dimensions: a product of one-dimensional
/// kernels per source.
pub fn amplitude_nd(x: &[f64], t: f64, e: &SourceEnsemble) -> Result<Complex64> {
    check_time(t, t)?;
    let dims = e.dims;
    let norm = (2.0 * t).powi(-(dims as i32));
    let mut psi = Complex64::new(0.0, 0.0);
    for s in &e.sources {
        let mut action = s.eps;
        for d in 0..dims {
            let r = x[d] - s.x[d] as f64;
            action += r * r / (2.0 * t);
        }
        psi += (s.p * norm).sqrt() * Complex64::from_polar(1.0, PI * action);
    }
    Ok(psi)
}

/// Momentum amplitude `sum sqrt(P) e^{i pi (x v - eps)}`.
pub fn momentum_amplitude(v: f64, e: &SourceEnsemble) -> Complex64 {
    e.sources
        .iter()
        .map(|s| s.p.sqrt() * Complex64::from_polar(1.0, PI * (s.x[0] as f64 * v - s.eps)))
        .sum()
}

/// Steady-state momentum density on `[-1, 1)`.
pub fn pdf_momentum(v: f64, e: &SourceEnsemble) -> f64 {
    0.5 * momentum_amplitude(v, e).norm_sqr()
}

/// The same density written as an explicit pair sum.
pub fn pdf_momentum_cosine(v: f64, e: &SourceEnsemble) -> f64 {
    let mut s = 1.0;
    for (i, a) in e.sources.iter().enumerate() {
        for b in &e.sources[i + 1..] {
            let d = (a.x[0] - b.x[0]) as f64;
            s += 2.0 * (a.p * b.p).sqrt() * (PI * d * v - PI * (a.eps - b.eps)).cos();
        }
    }
    0.5 * s
}

/// Momentum density at time `t` obtained by pulling the position density
/// back along each source's trajectory.
pub fn pdf_momentum_propagated(v: f64, t: f64, e: &SourceEnsemble, coeffs: &ClassicalCoefficients) -> Result<f64> {
    let k = coeffs.eval(t);
    check_time(k.b, t)?;
    let mut s = 0.0;
    for src in &e.sources {
        let x = k.a * src.x[0] as f64 + k.b * v + k.c;
        s += src.p * pdf_quadratic(x, t, e, coeffs)?;
    }
    Ok(k.b.abs() * s)
}

/// Position density rebuilt from the steady momentum density.
pub fn position_from_momentum(x: f64, t: f64, e: &SourceEnsemble, coeffs: &ClassicalCoefficients) -> Result<f64> {
    let k = coeffs.eval(t);
    check_time(k.b, t)?;
    let mut s = 0.0;
    for src in &e.sources {
        let v = (x - k.a * src.x[0] as f64 - k.c) / k.b;
        if v.abs() <= 1.0 {
            s += src.p * pdf_momentum(v, e);
        }
    }
    Ok(s / k.b.abs())
}

/// Local maxima of the steady momentum density on a uniform grid over
/// `[lo, hi]`, refined by golden-section search.
pub fn momentum_peaks(e: &SourceEnsemble, lo: f64, hi: f64, grid: usize) -> Vec<f64> {
    let f = |v: f64| pdf_momentum(v, e);
    let h = (hi - lo) / grid as f64;
    let vals: Vec<f64> = (0..=grid).map(|k| f(lo + k as f64 * h)).collect();
    let mut out = Vec::new();
    for k in 1..grid {
        if vals[k] > vals[k - 1] && vals[k] >= vals[k + 1] {
            let (mut a, mut b) = (lo + (k - 1) as f64 * h, lo + (k + 1) as f64 * h);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                let c = b - g * (b - a);
                let d = a + g * (b - a);
                if f(c) > f(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            out.push(0.5 * (a + b));
        }
    }
    out
}

fn gaussian(x: f64, centre: f64, width_sq: f64) -> f64 {
    (-(x - centre).powi(2) / width_sq).exp() / (PI * width_sq).sqrt()
}

/// Spreading free Gaussian packet prepared with centre `a`, width `d` and
/// phase velocity `v_phi`.
pub fn gaussian_free(x: f64, t: f64, a: f64, d: f64, v_phi: f64) -> f64 {
    gaussian(x, a + v_phi * t, d * d * (1.0 + t * t / (PI * PI * d.powi(4))))
}

/// Gaussian packet under a constant force `phi`.
pub fn gaussian_faller(x: f64, t: f64, a: f64, d: f64, v_phi: f64, phi: f64) -> f64 {
    gaussian(
        x,
        a + v_phi * t + phi * t * t / 2.0,
        d * d * (1.0 + t * t / (PI * PI * d.powi(4))),
    )
}

/// Gaussian packet in a harmonic well of frequency `omega`.
pub fn gaussian_ho(x: f64, t: f64, a: f64, d: f64, v_phi: f64, omega: f64) -> f64 {
    let (s, c) = (omega * t).sin_cos();
    let w = d * d * c * c + (s / (PI * omega * d)).powi(2);
    gaussian(x, a * c + v_phi * s / omega, w)
}

/// Stationary position density of harmonic level `n`.
pub fn ho_position(x: f64, n: usize, omega: f64) -> f64 {
    let y = (PI * omega).sqrt() * x;
    (PI * omega).sqrt() * hermite_function(n, y).powi(2)
}

/// Momentum density of harmonic level `n`.
pub fn ho_momentum(v: f64, n: usize, omega: f64) -> f64 {
    let y = (PI / omega).sqrt() * v;
    (PI / omega).sqrt() * hermite_function(n, y).powi(2)
}

#[cfg(test)]
mod tests {
    use super::super::integrate;
    use super::*;
    use crate::forces::{quadratic_abc, ForceField};
    use crate::sources::{Family, Source, DEFAULT_PRUNE};
    use crate::special::hermite;
    use proptest::prelude::*;

    fn two(d: i64, p: f64) -> SourceEnsemble {
        Family::TwoSlit { d, p: [p, 1.0 - p] }.prepare(DEFAULT_PRUNE).unwrap()
    }

    #[test]
    fn single_source_examples() {
        assert_eq!(single_source_pmf(0, 500, 0), 1.0 / 1001.0);
        assert_eq!(single_source_pmf(501, 500, 0), 0.0);
        let total: f64 = (-600..=600).map(|x| single_source_pmf(x, 500, 3)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let e = SourceEnsemble::single([0; 3], 1).unwrap();
        assert_eq!(pdf_free(17.0, 500.0, &e).unwrap(), 1.0 / 1000.0);
    }

    #[test]
    fn faller_and_oscillator_envelopes() {
        let e = SourceEnsemble::single([0; 3], 1).unwrap();
        let fall = quadratic_abc(&ForceField::Constant { phi: 0.002 }).unwrap();
        let iv = accessible(&e, &fall, 200.0).unwrap();
        assert!((iv.lo + 160.0).abs() < 1e-9 && (iv.hi - 240.0).abs() < 1e-9);
        assert!((pdf_quadratic(0.0, 200.0, &e, &fall).unwrap() - 1.0 / 400.0).abs() < 1e-15);
        let ho = quadratic_abc(&ForceField::Harmonic { omega: 0.005 }).unwrap();
        let iv = accessible(&e, &ho, 200.0).unwrap();
        assert!((iv.hi - 1f64.sin() / 0.005).abs() < 1e-9);
        assert!((iv.hi - 168.294).abs() < 1e-3);
        let expect = 0.005 / (2.0 * 1f64.sin());
        assert!((pdf_quadratic(100.0, 200.0, &e, &ho).unwrap() - expect).abs() < 1e-15);
        assert!(pdf_quadratic(200.0, 200.0, &e, &ho).unwrap() == 0.0);
    }

    #[test]
    fn two_source_fringe() {
        let e = two(1, 0.5);
        for x in [-300.0, -10.0, 0.0, 125.0, 499.0] {
            let expect = (1.0 + (2.0 * PI * x / 500.0).cos()) / 1000.0;
            assert!((pdf_free(x, 500.0, &e).unwrap() - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn cosine_sum_equals_born_rule() {
        let fields = [
            ForceField::None,
            ForceField::Constant { phi: 0.002 },
            ForceField::Harmonic { omega: 0.005 },
        ];
        let ensembles = [
            two(1, 0.5),
            two(3, 0.1),
            Family::Comb { n: 3, a: 2, p: vec![] }.prepare(DEFAULT_PRUNE).unwrap(),
            Family::Gaussian {
                a: 0.0,
                d: 5.0,
                v_phi: 0.1,
            }
            .prepare(DEFAULT_PRUNE)
            .unwrap(),
            Family::PlaneWave { l: 20, v_phi: -0.3 }.prepare(DEFAULT_PRUNE).unwrap(),
        ];
        for f in &fields {
            let c = quadratic_abc(f).unwrap();
            for e in &ensembles {
                for t in [37.0, 200.0, 500.0] {
                    let iv = accessible(e, &c, t).unwrap();
                    for k in 0..41 {
                        let x = iv.lo + iv.width() * k as f64 / 40.0;
                        let a = pdf_quadratic(x, t, e, &c).unwrap();
                        let b = pdf_born(x, t, e, &c).unwrap();
                        assert!((a - b).abs() < 1e-12, "{f:?} t={t} x={x}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn multidimensional_born_rule() {
        let e = SourceEnsemble::new(
            2,
            vec![
                Source {
                    x: [-2, 1, 0],
                    p: 0.2,
                    eps: 0.0,
                },
                Source {
                    x: [0, 0, 0],
                    p: 0.5,
                    eps: 0.3,
                },
                Source {
                    x: [2, -1, 0],
                    p: 0.3,
                    eps: -0.7,
                },
            ],
        )
        .unwrap();
        for k in 0..50 {
            let x = [-90.0 + 3.7 * k as f64, 40.0 - 1.9 * k as f64];
            let a = pdf_free_nd(&x, 100.0, &e).unwrap();
            let b = amplitude_nd(&x, 100.0, &e).unwrap().norm_sqr();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn densities_normalize() {
        let c = quadratic_abc(&ForceField::None).unwrap();
        for e in [two(1, 0.5), two(1, 0.1), two(4, 0.3)] {
            let iv = accessible(&e, &c, 500.0).unwrap();
            let s = integrate(|x| pdf_free(x, 500.0, &e).unwrap(), iv.lo, iv.hi, 20_000);
            assert!((s - 1.0).abs() < 1e-6, "{s}");
            let m = integrate(|v| pdf_momentum(v, &e), -1.0, 1.0, 20_000);
            assert!((m - 1.0).abs() < 1e-6);
        }
        for (t, a, d, v) in [(500.0, 0.0, 5.0, 0.1), (3000.0, 10.0, 10.0, -0.3)] {
            let s = integrate(|x| gaussian_free(x, t, a, d, v), -4000.0, 4000.0, 200_000);
            assert!((s - 1.0).abs() < 1e-6);
        }
        let s = integrate(|x| gaussian_ho(x, 200.0, 5.0, 5.0, 0.1, 0.005), -400.0, 400.0, 100_000);
        assert!((s - 1.0).abs() < 1e-6);
        for n in [0, 1, 2, 4, 5] {
            let s = integrate(|x| ho_position(x, n, 0.005), -200.0, 200.0, 40_000);
            assert!((s - 1.0).abs() < 1e-6);
            let s = integrate(|v| ho_momentum(v, n, 0.005), -1.0, 1.0, 40_000);
            assert!((s - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn oscillator_levels_match_hermite_polynomials() {
        let om: f64 = 0.005;
        let mut fact = 1.0;
        for n in 0..6usize {
            if n > 0 {
                fact *= n as f64;
            }
            for x in [-30.0, -4.0, 0.0, 11.0] {
                let y = (PI * om).sqrt() * x;
                let direct =
                    om.sqrt() / (2f64.powi(n as i32) * fact) * hermite(n, y).powi(2) * (-PI * om * x * x).exp();
                assert!((ho_position(x, n, om) - direct).abs() < 1e-14);
            }
        }
        let e0 = (0.5f64) * om / PI;
        let m2 = integrate(|v| v * v * ho_momentum(v, 0, om), -1.0, 1.0, 20_000);
        assert!((m2 - e0).abs() < 1e-9);
    }

    #[test]
    fn momentum_forms_agree_and_peak() {
        let e = Family::Comb { n: 3, a: 2, p: vec![] }.prepare(DEFAULT_PRUNE).unwrap();
        for k in 0..100 {
            let v = -1.0 + 0.02 * k as f64;
            assert!((pdf_momentum(v, &e) - pdf_momentum_cosine(v, &e)).abs() < 1e-12);
        }
        let top = pdf_momentum(0.0, &e);
        let peaks: Vec<f64> = momentum_peaks(&e, -0.99, 0.99, 400)
            .into_iter()
            .filter(|v| pdf_momentum(*v, &e) > 0.5 * top)
            .collect();
        assert_eq!(peaks.len(), 1);
        assert!(peaks[0].abs() < 1e-6);
        let wide = Family::Comb { n: 5, a: 4, p: vec![] }.prepare(DEFAULT_PRUNE).unwrap();
        let top = pdf_momentum(0.0, &wide);
        let peaks: Vec<f64> = momentum_peaks(&wide, -0.99, 0.99, 800)
            .into_iter()
            .filter(|v| pdf_momentum(*v, &wide) > 0.5 * top)
            .collect();
        assert_eq!(peaks.len(), 3);
        for (p, expect) in peaks.iter().zip([-0.5, 0.0, 0.5]) {
            assert!((p - expect).abs() < 1e-6, "{peaks:?}");
        }
        let pw = Family::PlaneWave { l: 100, v_phi: 0.1 }.prepare(DEFAULT_PRUNE).unwrap();
        let peaks = momentum_peaks(&pw, -0.99, 0.99, 4000);
        let best = peaks
            .iter()
            .copied()
            .max_by(|a, b| pdf_momentum(*a, &pw).total_cmp(&pdf_momentum(*b, &pw)))
            .unwrap();
        assert!((best - 0.1).abs() < 1e-6);
    }

    #[test]
    fn momentum_and_position_round_trip() {
        let e = two(1, 0.5);
        let c = quadratic_abc(&ForceField::None).unwrap();
        for x in [-400.0, -3.0, 0.0, 250.0] {
            let a = position_from_momentum(x, 500.0, &e, &c).unwrap();
            let b = pdf_free(x, 500.0, &e).unwrap();
            assert!((a - b).abs() < 2e-6, "x={x}");
        }
        for v in [-0.8, 0.0, 0.33] {
            let a = pdf_momentum_propagated(v, 500.0, &e, &c).unwrap();
            assert!((a - pdf_momentum(v, &e)).abs() < 1e-2);
        }
    }

    #[test]
    fn focal_time_is_singular() {
        let ho = quadratic_abc(&ForceField::Harmonic { omega: 0.5 }).unwrap();
        let e = SourceEnsemble::single([0; 3], 1).unwrap();
        assert_eq!(pdf_quadratic(0.0, 0.0, &e, &ho), Err(Error::Singular { t: 0.0 }));
    }

    proptest! {
        #[test]
        fn gauge_shift_leaves_densities_unchanged(shift in -3.0f64..3.0, x in -400.0f64..400.0, v in -1.0f64..1.0) {
            let e = Family::Gaussian { a: 3.0, d: 4.0, v_phi: 0.2 }.prepare(DEFAULT_PRUNE).unwrap();
            let mut moved = e.clone();
            for s in moved.sources.iter_mut() {
                s.eps += shift;
            }
            let c = quadratic_abc(&ForceField::Constant { phi: 0.001 }).unwrap();
            prop_assert!((pdf_quadratic(x, 400.0, &e, &c).unwrap() - pdf_quadratic(x, 400.0, &moved, &c).unwrap()).abs() < 1e-12);
            prop_assert!((pdf_born(x, 400.0, &e, &c).unwrap() - pdf_born(x, 400.0, &moved, &c).unwrap()).abs() < 1e-12);
            prop_assert!((pdf_momentum(v, &e) - pdf_momentum(v, &moved)).abs() < 1e-12);
        }
    }
}
