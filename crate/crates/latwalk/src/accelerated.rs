//! Accelerated codes: the trained walk, where lattice and particle are
//! assumed to have converged, and the expected-value integrator.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forces::{ClassicalCoefficients, ForceField};
use crate::lattice::{node1, pair_orientation, step_probabilities, Node};
use crate::scalar::{clamp_unit, wrap};
use crate::sources::{PairEntry, SourceEnsemble};

/// One-dimensional pair terms grouped by path difference. The coefficient
/// for `delta` collects `sqrt(P) e^{-i pi eps}` over pairs with displacement
/// `+delta` and the conjugate phase over `-delta`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompressedPairs {
    terms: Vec<(i64, Complex64)>,
}

impl CompressedPairs {
    pub fn from_ensemble(e: &SourceEnsemble) -> Result<Self> {
        if e.dims != 1 {
            return Err(Error::Unsupported("compressed pairs are one-dimensional".into()));
        }
        Self::from_pairs(&e.pair_table())
    }

    pub fn from_pairs(pairs: &[PairEntry]) -> Result<Self> {
        let mut dense: Vec<Complex64> = Vec::new();
        for pr in pairs {
            if pr.p == 0.0 {
                continue;
            }
            let d = pr.disp[0];
            if d == 0 {
                return Err(Error::Inconsistent(format!(
                    "sources {} and {} share a node",
                    pr.i, pr.j
                )));
            }
            let k = d.unsigned_abs() as usize;
            if dense.len() <= k {
                dense.resize(k + 1, Complex64::new(0.0, 0.0));
            }
            let sign = d.signum() as f64;
            dense[k] += pr.p.sqrt() * Complex64::from_polar(1.0, -sign * PI * pr.eps);
        }
        let terms = dense
            .into_iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(k, c)| (k as i64, c))
            .collect();
        Ok(CompressedPairs { terms })
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of distinct path differences.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Total particle-boson momentum at smoothed momentum `q`, with its
    /// derivative.
    pub fn force_and_slope(&self, q: f64) -> (f64, f64) {
        let z = Complex64::from_polar(1.0, PI * q);
        let mut zk = Complex64::new(1.0, 0.0);
        let mut last = 0i64;
        let (mut f, mut df) = (0.0, 0.0);
        for (delta, c) in &self.terms {
            let gap = delta - last;
            zk *= if gap == 1 { z } else { z.powi(gap as i32) };
            last = *delta;
            let w = c * zk;
            f += w.im / (PI * *delta as f64);
            df += w.re;
        }
        (f, df)
    }

    pub fn force(&self, q: f64) -> f64 {
        self.force_and_slope(q).0
    }

    /// Steady-state momentum density on `[-1, 1)`.
    pub fn momentum_pdf(&self, v: f64) -> f64 {
        0.5 * (1.0 + self.force_and_slope(v).1)
    }
}

/// Root of `vQ + F(vQ) = v0`, reported on `[-1, 1)`.
///
/// The map `v -> v + F(v)` is non-decreasing and advances by exactly 2 over
/// a period, so a bracket always exists.
pub fn solve_vq(v0: f64, pairs: &CompressedPairs) -> Result<f64> {
    if !(-1.0..=1.0).contains(&v0) {
        return Err(Error::Domain(format!("source momentum {v0} outside [-1, 1]")));
    }
    if pairs.is_empty() {
        return Ok(v0);
    }
    let h = |v: f64| v + pairs.force(v) - v0;
    let (mut lo, mut hi) = (v0 - 1.0, v0 + 1.0);
    let mut guard = 0;
    while h(lo) > 0.0 {
        lo -= 2.0;
        guard += 1;
        if guard > 64 {
            return Err(Error::Solver(format!("no lower bracket for v0={v0}")));
        }
    }
    while h(hi) < 0.0 {
        hi += 2.0;
        guard += 1;
        if guard > 128 {
            return Err(Error::Solver(format!("no upper bracket for v0={v0}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    let mut v = 0.5 * (lo + hi);
    for _ in 0..8 {
        let (f, df) = pairs.force_and_slope(v);
        let r = v + f - v0;
        if r.abs() < 1e-13 {
            break;
        }
        let slope = 1.0 + df;
        if slope <= 1e-8 {
            break;
        }
        let next = v - r / slope;
        if next < lo || next > hi {
            break;
        }
        v = next;
    }
    let r = v + pairs.force(v) - v0;
    if !r.is_finite() || r.abs() > 1e-9 {
        return Err(Error::Solver(format!("residual {r:e} at v0={v0}")));
    }
    Ok(wrap(&v))
}

/// Initial smoothed momentum of a trained particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QInit {
    /// Start from the source momentum and relax with the lag.
    SourceMomentum,
    /// Start at the converged momentum, i.e. a fully trained particle.
    #[default]
    Trained,
}

/// Walls seen by the trained walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Walls {
    None,
    /// Reflecting box `[-a, a]`.
    Box(i64),
}

/// State of a particle under the trained code.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedState {
    pub t: u64,
    pub x: i64,
    pub x0: i64,
    pub v0: f64,
    pub q: f64,
    pub vq: f64,
    pub vf: f64,
    pub action: u64,
    pub wall_hits: u64,
}

/// The one-dimensional trained code.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub pairs: CompressedPairs,
    pub n_tau: f64,
    pub init: QInit,
}

impl TrainedModel {
    pub fn new(pairs: CompressedPairs, n_tau: f64, init: QInit) -> Result<Self> {
        if !(n_tau >= 1.0) {
            return Err(Error::Domain(format!("lag {n_tau} must be at least 1")));
        }
        Ok(TrainedModel { pairs, n_tau, init })
    }

    pub fn emit(&self, x0: i64, v0: f64) -> Result<TrainedState> {
        let q = match self.init {
            QInit::SourceMomentum => v0,
            QInit::Trained => solve_vq(v0, &self.pairs)?,
        };
        let vq = v0 - self.pairs.force(q);
        Ok(TrainedState {
            t: 0,
            x: x0,
            x0,
            v0,
            q,
            vq,
            vf: 0.0,
            action: 0,
            wall_hits: 0,
        })
    }

    /// One iteration.
    pub fn step<R: Rng>(&self, s: &mut TrainedState, field: &ForceField, walls: Walls, rng: &mut R) -> Result<()> {
        let (pp, pz, _) = step_probabilities(&clamp_unit(s.vq + s.vf))?;
        let u: f64 = rng.gen();
        let v = if u < pp {
            1
        } else if u < pp + pz {
            0
        } else {
            -1
        };
        s.x += v;
        s.action += v.unsigned_abs();
        s.t += 1;
        if let Walls::Box(a) = walls {
            s.x = crate::lattice::fold_into_box(s.x, a);
            let outward = (s.x >= a && s.vq > 0.0) || (s.x <= -a && s.vq < 0.0);
            if outward {
                s.v0 = -s.v0;
                s.q = -s.q;
                s.wall_hits += 1;
            }
        }
        s.vf += field.at(&node1(s.x), s.t, 1)[0];
        s.q += (s.vq - s.q) / self.n_tau;
        s.vq = s.v0 - self.pairs.force(s.q);
        Ok(())
    }

    pub fn run<R: Rng>(
        &self,
        x0: i64,
        v0: f64,
        field: &ForceField,
        walls: Walls,
        n_t: u64,
        rng: &mut R,
    ) -> Result<TrainedState> {
        let mut s = self.emit(x0, v0)?;
        while s.t < n_t {
            self.step(&mut s, field, walls, rng)?;
        }
        Ok(s)
    }
}

/// Multi-dimensional trained code with per-particle split weights.
#[derive(Debug, Clone)]
pub struct TrainedModelNd {
    pub dims: usize,
    /// Unordered pairs `(disp, eps, sqrt P)` with `disp` oriented positive.
    pairs: Vec<(Node, f64, f64)>,
    pub n_tau: f64,
}

/// State of a particle under the multi-dimensional trained code.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedStateNd {
    pub t: u64,
    pub x: Node,
    pub v0: Vec<f64>,
    pub q: Vec<f64>,
    pub vq: Vec<f64>,
    pub vf: Vec<f64>,
    pub rho: Vec<f64>,
}

impl TrainedModelNd {
    pub fn new(e: &SourceEnsemble, n_tau: f64) -> Result<Self> {
        if !(n_tau >= 1.0) {
            return Err(Error::Domain(format!("lag {n_tau} must be at least 1")));
        }
        let mut pairs = Vec::new();
        for pr in e.pair_table() {
            if pr.p == 0.0 {
                continue;
            }
            let o = pair_orientation(&e.sources[pr.i].x, &e.sources[pr.j].x);
            if o == 0 {
                return Err(Error::Inconsistent(format!(
                    "sources {} and {} share a node",
                    pr.i, pr.j
                )));
            }
            if o > 0 {
                pairs.push((pr.disp, pr.eps, pr.p.sqrt()));
            }
        }
        Ok(TrainedModelNd {
            dims: e.dims,
            pairs,
            n_tau,
        })
    }

    /// Sum of the scalar boson momenta at smoothed momentum `q`.
    pub fn boson_sum(&self, q: &[f64], rho: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (disp, eps, amp) in &self.pairs {
            let mut proj = 0.0;
            let mut weight = 0.0;
            for d in 0..self.dims {
                proj += disp[d] as f64 * q[d];
                weight += rho[d] * disp[d].abs() as f64;
            }
            // both orientations of the pair contribute the same term
            sum += 2.0 * amp * (PI * (proj - eps)).sin() / (PI * weight);
        }
        sum
    }

    fn momentum(&self, v0: &[f64], q: &[f64], rho: &[f64]) -> Vec<f64> {
        let s = self.boson_sum(q, rho);
        (0..self.dims).map(|d| wrap(&(v0[d] - rho[d] * s))).collect()
    }

    /// Emit with uniform split weights on the simplex.
    pub fn emit<R: Rng>(&self, x0: Node, v0: Vec<f64>, rng: &mut R) -> TrainedStateNd {
        let mut cuts: Vec<f64> = (0..self.dims - 1).map(|_| rng.gen()).collect();
        cuts.push(0.0);
        cuts.push(1.0);
        cuts.sort_by(|a, b| a.total_cmp(b));
        let rho: Vec<f64> = cuts.windows(2).map(|w| w[1] - w[0]).collect();
        let q = v0.clone();
        let vq = self.momentum(&v0, &q, &rho);
        TrainedStateNd {
            t: 0,
            x: x0,
            v0,
            q,
            vq,
            vf: vec![0.0; self.dims],
            rho,
        }
    }

    pub fn step<R: Rng>(&self, s: &mut TrainedStateNd, field: &ForceField, rng: &mut R) -> Result<()> {
        for d in 0..self.dims {
            let (pp, pz, _) = step_probabilities(&clamp_unit(s.vq[d] + s.vf[d]))?;
            let u: f64 = rng.gen();
            s.x[d] += if u < pp {
                1
            } else if u < pp + pz {
                0
            } else {
                -1
            };
        }
        s.t += 1;
        let f = field.at(&s.x, s.t, self.dims);
        for d in 0..self.dims {
            s.vf[d] += f[d];
            s.q[d] += (s.vq[d] - s.q[d]) / self.n_tau;
        }
        s.vq = self.momentum(&s.v0, &s.q, &s.rho);
        Ok(())
    }
}

/// Geometry of the expected-value integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    Line,
    /// Reflecting box `[-a, a]`.
    Box(i64),
    /// Arc coordinate on a ring of radius `r`, periodic in `2 pi r`.
    Ring(i64),
    /// Arc coordinate along a great circle of a sphere of radius `r`,
    /// reported as colatitude arc `r theta` in `[0, pi r]`.
    Meridian(i64),
}

/// Expected position after time `t` for a particle with converged momentum
/// `vq` starting at `x0`.
pub fn expected_trajectory(geometry: Geometry, coeffs: &ClassicalCoefficients, x0: f64, vq: f64, t: f64) -> f64 {
    let free = coeffs.position(x0, vq, t);
    match geometry {
        Geometry::Line => free,
        Geometry::Box(a) => {
            let a = a as f64;
            let u = (free + a).rem_euclid(4.0 * a);
            if u <= 2.0 * a {
                u - a
            } else {
                3.0 * a - u
            }
        }
        Geometry::Ring(r) => {
            let c = 2.0 * PI * r as f64;
            (free + c / 2.0).rem_euclid(c) - c / 2.0
        }
        Geometry::Meridian(r) => {
            let c = 2.0 * PI * r as f64;
            let s = (free + c / 2.0).rem_euclid(c) - c / 2.0;
            s.abs()
        }
    }
}

/// The expected-value code: deterministic motion with a momentum fixed at
/// preparation.
#[derive(Debug, Clone)]
pub struct ExpectedModel {
    pub pairs: CompressedPairs,
    pub coeffs: ClassicalCoefficients,
    pub geometry: Geometry,
}

impl ExpectedModel {
    /// Returns `(position, vQ)`.
    pub fn run(&self, x0: f64, v0: f64, t: f64) -> Result<(f64, f64)> {
        let vq = solve_vq(v0, &self.pairs)?;
        Ok((expected_trajectory(self.geometry, &self.coeffs, x0, vq, t), vq))
    }
}

/// Multi-dimensional expected-value momentum: the fixed point of the trained
/// relaxation. The boson sum acts along `rho`, so the root is found in the
/// scalar `s` with `vQ = v0 - rho s`, where `s - S(v0 - rho s)` is
/// non-decreasing.
pub fn solve_vq_nd(model: &TrainedModelNd, v0: &[f64], rho: &[f64]) -> Result<Vec<f64>> {
    let at = |s: f64| -> Vec<f64> { (0..model.dims).map(|d| v0[d] - rho[d] * s).collect() };
    let g = |s: f64| s - model.boson_sum(&at(s), rho);
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut guard = 0;
    while g(lo) > 0.0 || g(hi) < 0.0 {
        lo *= 2.0;
        hi *= 2.0;
        guard += 1;
        if guard > 64 {
            return Err(Error::Solver("no bracket for the multi-dimensional root".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo < 1e-15 {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    Ok(at(s).iter().map(wrap).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forces::quadratic_abc;
    use crate::rng::{substream, Stream};
    use crate::sources::{Family, DEFAULT_PRUNE};
    use proptest::prelude::*;

    fn two_slit(p: [f64; 2]) -> CompressedPairs {
        let e = Family::TwoSlit { d: 1, p }.prepare(DEFAULT_PRUNE).unwrap();
        CompressedPairs::from_ensemble(&e).unwrap()
    }

    #[test]
    fn empty_table_keeps_source_momentum() {
        let c = CompressedPairs::default();
        assert_eq!(solve_vq(0.37, &c).unwrap(), 0.37);
        let m = TrainedModel::new(c, 500.0, QInit::SourceMomentum).unwrap();
        let mut rng = substream(1, Stream::Emission, 0);
        let s = m.run(0, -0.2, &ForceField::None, Walls::None, 50, &mut rng).unwrap();
        assert_eq!(s.vq, -0.2);
    }

    #[test]
    fn two_slit_fixed_point() {
        let c = two_slit([0.5, 0.5]);
        assert_eq!(solve_vq(0.0, &c).unwrap(), 0.0);
        for k in 0..40 {
            let v0 = -0.975 + 0.05 * k as f64;
            let vq = solve_vq(v0, &c).unwrap();
            let back = vq + 0.5 / PI * (2.0 * PI * vq).sin();
            assert!((wrap(&(back - v0))).abs() < 1e-12, "v0={v0}");
        }
        let c = two_slit([0.1, 0.9]);
        let vq = solve_vq(0.3, &c).unwrap();
        assert!((vq + 0.09f64.sqrt() / PI * (2.0 * PI * vq).sin() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn slope_matches_fringe() {
        let c = two_slit([0.5, 0.5]);
        for k in 0..50 {
            let v = -0.98 + 0.04 * k as f64;
            let h = 1e-6;
            let fd = ((v + h + c.force(v + h)) - (v - h + c.force(v - h))) / (2.0 * h);
            assert!((fd - (1.0 + (2.0 * PI * v).cos())).abs() < 1e-6);
            assert!((c.momentum_pdf(v) - 0.5 * (1.0 + (2.0 * PI * v).cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn single_source_expected_model_is_classical() {
        for field in [
            ForceField::None,
            ForceField::Constant { phi: 0.002 },
            ForceField::Harmonic { omega: 0.005 },
        ] {
            let coeffs = quadratic_abc(&field).unwrap();
            let m = ExpectedModel {
                pairs: CompressedPairs::default(),
                coeffs,
                geometry: Geometry::Line,
            };
            for (x0, v0, t) in [(0.0, 1.0, 200.0), (3.0, -0.4, 77.0), (-5.0, 0.25, 500.0)] {
                let (x, vq) = m.run(x0, v0, t).unwrap();
                assert_eq!(vq, v0);
                assert_eq!(x, coeffs.position(x0, v0, t));
            }
        }
        let ho = quadratic_abc(&ForceField::Harmonic { omega: 0.005 }).unwrap();
        let x = expected_trajectory(Geometry::Line, &ho, 0.0, 1.0, 200.0);
        assert!((x - 1f64.sin() / 0.005).abs() < 1e-9);
        let free = quadratic_abc(&ForceField::None).unwrap();
        assert_eq!(expected_trajectory(Geometry::Line, &free, 7.0, 0.1, 500.0), 57.0);
    }

    #[test]
    fn box_motion_is_a_triangle_wave() {
        let free = quadratic_abc(&ForceField::None).unwrap();
        let (a, v) = (10, 0.25);
        let period = 4.0 * a as f64 / v;
        for k in 0..100 {
            let t = k as f64 * 7.3;
            let x = expected_trajectory(Geometry::Box(a), &free, 0.0, v, t);
            assert!(x.abs() <= a as f64 + 1e-12);
            let y = expected_trajectory(Geometry::Box(a), &free, 0.0, v, t + period);
            assert!((x - y).abs() < 1e-9);
        }
        assert!((expected_trajectory(Geometry::Box(a), &free, 0.0, v, 40.0) - 10.0).abs() < 1e-12);
        assert!((expected_trajectory(Geometry::Box(a), &free, 0.0, v, 80.0)).abs() < 1e-12);
    }

    #[test]
    fn lagged_start_relaxes_to_trained_momentum() {
        let c = two_slit([0.5, 0.5]);
        let slow = TrainedModel::new(c.clone(), 5.0, QInit::SourceMomentum).unwrap();
        let mut rng = substream(3, Stream::Emission, 0);
        for v0 in [-0.7, -0.2, 0.05, 0.45, 0.9] {
            let s = slow.run(0, v0, &ForceField::None, Walls::None, 400, &mut rng).unwrap();
            let root = solve_vq(v0, &c).unwrap();
            assert!((s.vq - root).abs() < 1e-9, "v0={v0}: {} vs {root}", s.vq);
        }
    }

    #[test]
    fn box_walls_keep_the_particle_inside() {
        let e = Family::BoxStationary { n: 3, a: 10, images: 7 }
            .prepare(DEFAULT_PRUNE)
            .unwrap();
        let m = TrainedModel::new(CompressedPairs::from_ensemble(&e).unwrap(), 500.0, QInit::Trained).unwrap();
        let mut rng = substream(8, Stream::Emission, 0);
        let mut s = m.emit(0, 0.6).unwrap();
        let mut far = 0;
        for _ in 0..500 {
            m.step(&mut s, &ForceField::None, Walls::Box(10), &mut rng).unwrap();
            far = far.max(s.x.abs());
        }
        assert!(s.wall_hits > 0);
        assert!(far <= 10);
    }

    #[test]
    fn nd_relaxation_matches_one_dimensional_root() {
        let e = Family::TwoSlit { d: 1, p: [0.5, 0.5] }.prepare(DEFAULT_PRUNE).unwrap();
        let nd = TrainedModelNd::new(&e, 3.0).unwrap();
        let c = CompressedPairs::from_ensemble(&e).unwrap();
        for v0 in [-0.6, 0.1, 0.8] {
            let v = solve_vq_nd(&nd, &[v0], &[1.0]).unwrap();
            assert!((v[0] - solve_vq(v0, &c).unwrap()).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn root_residual_and_range(v0 in -1.0f64..1.0, p in 0.01f64..0.99, d in 1i64..6, eps in -1.0f64..1.0) {
            let e = SourceEnsemble::new(1, vec![
                crate::sources::Source { x: [-d, 0, 0], p, eps: 0.0 },
                crate::sources::Source { x: [d + 1, 0, 0], p: 1.0 - p, eps },
            ]).unwrap();
            let c = CompressedPairs::from_ensemble(&e).unwrap();
            let v = solve_vq(v0, &c).unwrap();
            prop_assert!((-1.0..1.0).contains(&v));
            let r = wrap(&(v + c.force(v) - v0));
            prop_assert!(r.abs() < 1e-12);
        }

        #[test]
        fn momentum_pdf_is_non_negative(v in -1.0f64..1.0) {
            let e = Family::Gaussian { a: 0.0, d: 5.0, v_phi: 0.1 }.prepare(DEFAULT_PRUNE).unwrap();
            let c = CompressedPairs::from_ensemble(&e).unwrap();
            prop_assert!(c.momentum_pdf(v) >= -1e-12);
        }
    }
}
