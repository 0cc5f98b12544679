//! Source ensembles: where particles are emitted, with which probability and
//! phase, and the derived table of ordered source pairs.

use std::f64::consts::PI;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forces::ClassicalCoefficients;
use crate::lattice::{Node, MAX_DIMS};
use crate::special::{assoc_legendre, hermite_function, spherical_harmonic_sq};

/// Default absolute pruning threshold on source probabilities.
pub const DEFAULT_PRUNE: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    pub x: Node,
    pub p: f64,
    /// Phase of the initial amplitude divided by pi.
    pub eps: f64,
}

/// Ordered pair `(i, j)` of sources.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEntry {
    pub i: usize,
    pub j: usize,
    /// Signed displacement `x_i - x_j`.
    pub disp: Node,
    /// Per-dimension path difference `|x_i - x_j|`.
    pub delta: Node,
    /// Phase difference `eps_i - eps_j`.
    pub eps: f64,
    /// Joint probability `P_i P_j`.
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceEnsemble {
    pub dims: usize,
    pub sources: Vec<Source>,
    /// Number of candidate sources dropped below the pruning threshold.
    pub pruned: usize,
}

/// Draw from [`SourceEnsemble::sample`].
#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    pub index: usize,
    pub x0: Node,
    pub v0: Vec<f64>,
    pub eps: f64,
}

impl SourceEnsemble {
    /// Build an ensemble, renormalizing the probabilities to sum to one.
    pub fn new(dims: usize, mut sources: Vec<Source>) -> Result<Self> {
        if !(1..=MAX_DIMS).contains(&dims) {
            return Err(Error::Domain(format!("dimension {dims} not in 1..=3")));
        }
        if sources.is_empty() {
            return Err(Error::Domain("empty source ensemble".into()));
        }
        if sources
            .iter()
            .any(|s| !(s.p >= 0.0) || !s.p.is_finite() || !s.eps.is_finite())
        {
            return Err(Error::Domain(
                "source probabilities must be finite and non-negative".into(),
            ));
        }
        let total: f64 = sources.iter().map(|s| s.p).sum();
        if !(total > 0.0) {
            return Err(Error::Domain("source probabilities are not normalizable".into()));
        }
        for s in sources.iter_mut() {
            s.p /= total;
        }
        Ok(SourceEnsemble {
            dims,
            sources,
            pruned: 0,
        })
    }

    pub fn single(x0: Node, dims: usize) -> Result<Self> {
        Self::new(
            dims,
            vec![Source {
                x: x0,
                p: 1.0,
                eps: 0.0,
            }],
        )
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    /// Drop sources with probability below `threshold`, then renormalize.
    pub fn prune(mut self, threshold: f64) -> Result<Self> {
        let before = self.sources.len();
        self.sources.retain(|s| s.p >= threshold);
        let pruned = self.pruned + before - self.sources.len();
        let mut out = Self::new(self.dims, self.sources)?;
        out.pruned = pruned;
        Ok(out)
    }

    /// All `N(N-1)` ordered pairs.
    pub fn pair_table(&self) -> Vec<PairEntry> {
        let n = self.sources.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1));
        for (i, a) in self.sources.iter().enumerate() {
            for (j, b) in self.sources.iter().enumerate() {
                if i == j {
                    continue;
                }
                let mut disp = [0i64; MAX_DIMS];
                let mut delta = [0i64; MAX_DIMS];
                for d in 0..MAX_DIMS {
                    disp[d] = a.x[d] - b.x[d];
                    delta[d] = disp[d].abs();
                }
                out.push(PairEntry {
                    i,
                    j,
                    disp,
                    delta,
                    eps: a.eps - b.eps,
                    p: a.p * b.p,
                });
            }
        }
        out
    }

    /// Pick a source by probability and a uniform source momentum per
    /// dimension.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Emission {
        let index = if self.sources.len() == 1 {
            0
        } else {
            // weights were validated in `new`
            let w = WeightedIndex::new(self.sources.iter().map(|s| s.p)).expect("valid weights");
            w.sample(rng)
        };
        let v0 = (0..self.dims).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = &self.sources[index];
        Emission {
            index,
            x0: s.x,
            v0,
            eps: s.eps,
        }
    }

    /// Reusable sampler for many draws.
    pub fn sampler(&self) -> SourceSampler<'_> {
        SourceSampler {
            ensemble: self,
            weights: WeightedIndex::new(self.sources.iter().map(|s| s.p)).expect("valid weights"),
        }
    }

    /// Mirror images for a box `[-a, a]`: image `l` sits at
    /// `2la + (-1)^l x` with phase shifted by `l` and weight `1/(2L+1)`.
    pub fn with_box_images(&self, a: i64, images: i64) -> Result<Self> {
        if self.dims != 1 {
            return Err(Error::Unsupported("box images are one-dimensional".into()));
        }
        let mut out = Vec::new();
        for l in -images..=images {
            let sign = if l.rem_euclid(2) == 0 { 1 } else { -1 };
            for s in &self.sources {
                out.push(Source {
                    x: [2 * l * a + sign * s.x[0], 0, 0],
                    p: s.p,
                    eps: s.eps + l as f64,
                });
            }
        }
        let mut e = Self::new(1, out)?;
        e.pruned = self.pruned;
        Ok(e)
    }

    /// Right-hand side of the stationarity condition at `x`: the pdf that
    /// the ensemble propagates to after time `t` under a quadratic field.
    /// Only sources whose accessible interval covers `x` contribute.
    pub fn propagated_density(&self, x: f64, coeffs: &ClassicalCoefficients, t: f64) -> Result<f64> {
        let abc = coeffs.eval(t);
        if abc.b == 0.0 {
            return Err(Error::Singular { t });
        }
        let (mut re, mut im) = (0.0, 0.0);
        for s in &self.sources {
            let x0 = s.x[0] as f64;
            if (x - abc.a * x0 - abc.c).abs() > abc.b.abs() {
                continue;
            }
            let ph = PI * (abc.a * x0 * x0 / (2.0 * abc.b) - (x - abc.c) * x0 / abc.b + s.eps);
            let amp = s.p.sqrt();
            re += amp * ph.cos();
            im += amp * ph.sin();
        }
        Ok((re * re + im * im) / (2.0 * abc.b.abs()))
    }

    /// Largest deviation between the source probabilities and the density
    /// they propagate to, over the source nodes.
    pub fn stationary_check(&self, coeffs: &ClassicalCoefficients, t: f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for s in &self.sources {
            let rhs = self.propagated_density(s.x[0] as f64, coeffs, t)?;
            worst = worst.max((s.p - rhs).abs());
        }
        Ok(worst)
    }
}

pub struct SourceSampler<'a> {
    ensemble: &'a SourceEnsemble,
    weights: WeightedIndex<f64>,
}

impl SourceSampler<'_> {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Emission {
        let index = self.weights.sample(rng);
        let v0 = (0..self.ensemble.dims).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = &self.ensemble.sources[index];
        Emission {
            index,
            x0: s.x,
            v0,
            eps: s.eps,
        }
    }
}

/// Source preparations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    Single {
        #[serde(default)]
        x0: Vec<i64>,
    },
    /// Sources at `-d` and `+d` with probabilities `p = [P(-d), P(+d)]`.
    TwoSlit {
        d: i64,
        #[serde(default = "half_half")]
        p: [f64; 2],
    },
    /// `n` sources spaced `a`, centered on the origin.
    Comb {
        n: usize,
        a: i64,
        #[serde(default)]
        p: Vec<f64>,
    },
    /// `l + 1` equiprobable nodes on `[-l/2, l/2]` with phase `k v_phi`.
    PlaneWave {
        l: i64,
        v_phi: f64,
    },
    Gaussian {
        a: f64,
        d: f64,
        v_phi: f64,
    },
    HoStationary {
        n: usize,
        omega: f64,
    },
    BoxStationary {
        n: usize,
        a: i64,
        #[serde(default = "default_images")]
        images: i64,
    },
    RingPlaneWave {
        r: i64,
        m: i64,
    },
    RingStationary {
        r: i64,
        n: i64,
    },
    /// Sources on one half-meridian of a sphere, at unit arc spacing.
    SphereStationary {
        r: i64,
        l: usize,
        m: usize,
    },
    Explicit {
        sources: Vec<ExplicitSource>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSource {
    pub x: Vec<i64>,
    pub p: f64,
    #[serde(default)]
    pub eps: f64,
}

fn half_half() -> [f64; 2] {
    [0.5, 0.5]
}

fn default_images() -> i64 {
    7
}

fn node_from(v: &[i64]) -> Result<Node> {
    if v.len() > MAX_DIMS {
        return Err(Error::Domain(format!("{} coordinates given, at most 3", v.len())));
    }
    let mut n = [0; MAX_DIMS];
    n[..v.len()].copy_from_slice(v);
    Ok(n)
}

fn sign_phase(amp: f64) -> f64 {
    if amp < 0.0 {
        1.0
    } else {
        0.0
    }
}

impl Family {
    /// Spatial dimensionality of the ensemble this family produces.
    pub fn dims(&self) -> usize {
        match self {
            Family::Single { x0 } => x0.len().max(1),
            Family::Explicit { sources } => sources.first().map(|s| s.x.len().max(1)).unwrap_or(1),
            _ => 1,
        }
    }

    /// Build the ensemble; tails below `threshold` are pruned where the
    /// family has unbounded support.
    pub fn prepare(&self, threshold: f64) -> Result<SourceEnsemble> {
        let one = |x: i64, p: f64, eps: f64| Source { x: [x, 0, 0], p, eps };
        match self {
            Family::Single { x0 } => SourceEnsemble::single(node_from(x0)?, self.dims()),
            Family::TwoSlit { d, p } => {
                if *d <= 0 {
                    return Err(Error::Domain("two-slit half separation must be positive".into()));
                }
                SourceEnsemble::new(1, vec![one(-d, p[0], 0.0), one(*d, p[1], 0.0)])
            }
            Family::Comb { n, a, p } => {
                if *n == 0 || *a <= 0 {
                    return Err(Error::Domain("comb needs n >= 1 and a > 0".into()));
                }
                if *n % 2 == 0 && a % 2 != 0 {
                    return Err(Error::Domain("even comb with odd spacing is off-lattice".into()));
                }
                if !p.is_empty() && p.len() != *n {
                    return Err(Error::Domain(format!(
                        "comb has {n} sources but {} probabilities",
                        p.len()
                    )));
                }
                let srcs = (0..*n)
                    .map(|k| {
                        let x = (2 * k as i64 - (*n as i64 - 1)) * a / 2;
                        let w = if p.is_empty() { 1.0 } else { p[k] };
                        one(x, w, 0.0)
                    })
                    .collect();
                SourceEnsemble::new(1, srcs)
            }
            Family::PlaneWave { l, v_phi } => {
                if *l < 0 || l % 2 != 0 {
                    return Err(Error::Domain("plane wave width must be even and non-negative".into()));
                }
                let srcs = (-l / 2..=l / 2).map(|k| one(k, 1.0, k as f64 * v_phi)).collect();
                SourceEnsemble::new(1, srcs)
            }
            Family::Gaussian { a, d, v_phi } => {
                if !(*d > 0.0) {
                    return Err(Error::Domain("gaussian width must be positive".into()));
                }
                let reach = (d * (-(threshold * d * PI.sqrt()).ln()).max(0.0).sqrt()).ceil() as i64 + 2;
                let c = a.round() as i64;
                let srcs: Vec<Source> = (c - reach..=c + reach)
                    .map(|k| {
                        let u = k as f64 - a;
                        one(k, (-u * u / (d * d)).exp() / (PI.sqrt() * d), u * v_phi)
                    })
                    .collect();
                prune_absolute(srcs, threshold)
            }
            Family::HoStationary { n, omega } => {
                if !(*omega > 0.0) {
                    return Err(Error::Domain("oscillator frequency must be positive".into()));
                }
                let s = (PI * omega).sqrt();
                let reach = ((2.0 * *n as f64 + 1.0 + 40.0).sqrt() / s).ceil() as i64;
                let srcs: Vec<Source> = (-reach..=reach)
                    .map(|k| {
                        let h = hermite_function(*n, s * k as f64);
                        one(k, s * h * h, sign_phase(h))
                    })
                    .collect();
                prune_absolute(srcs, threshold)
            }
            Family::BoxStationary { n, a, images } => {
                if *n == 0 || *a <= 0 || *images < 0 {
                    return Err(Error::Domain("box state needs n >= 1, a > 0, images >= 0".into()));
                }
                let k = *n as f64 * PI / (2.0 * *a as f64);
                let srcs = (-a..=*a)
                    .map(|x| {
                        let psi = if x.abs() == *a {
                            0.0
                        } else if n % 2 == 1 {
                            (k * x as f64).cos()
                        } else {
                            (k * x as f64).sin()
                        };
                        one(x, psi * psi, sign_phase(psi))
                    })
                    .collect();
                SourceEnsemble::new(1, srcs)?.with_box_images(*a, *images)
            }
            Family::RingPlaneWave { r, m } => {
                if *r <= 0 {
                    return Err(Error::Domain("ring radius must be positive".into()));
                }
                let h = (PI * *r as f64).floor() as i64;
                let srcs = (-h..=h)
                    .map(|k| one(k, 1.0, *m as f64 * k as f64 / (PI * *r as f64)))
                    .collect();
                SourceEnsemble::new(1, srcs)
            }
            Family::RingStationary { r, n } => {
                if *r <= 0 {
                    return Err(Error::Domain("ring radius must be positive".into()));
                }
                let h = (PI * *r as f64).floor() as i64;
                let srcs: Vec<Source> = (-h..=h)
                    .map(|k| {
                        let phi = k as f64 / *r as f64;
                        let psi = if n.rem_euclid(2) == 1 {
                            (*n as f64 * phi).sin()
                        } else {
                            (*n as f64 * phi).cos()
                        };
                        one(k, psi * psi, sign_phase(psi))
                    })
                    .collect();
                prune_absolute(srcs, threshold * 1e-3)
            }
            Family::SphereStationary { r, l, m } => {
                if *r <= 0 || m > l {
                    return Err(Error::Domain("sphere state needs r > 0 and m <= l".into()));
                }
                let h = (PI * *r as f64).floor() as i64;
                let srcs: Vec<Source> = (1..=h)
                    .map(|k| {
                        let theta = k as f64 / *r as f64;
                        let y2 = spherical_harmonic_sq(*l, *m, theta);
                        let sgn = assoc_legendre(*l, *m, theta.cos());
                        one(k, y2 * theta.sin(), sign_phase(sgn))
                    })
                    .collect();
                prune_absolute(srcs, threshold * 1e-3)
            }
            Family::Explicit { sources } => {
                let dims = self.dims();
                let srcs = sources
                    .iter()
                    .map(|s| {
                        if s.x.len().max(1) != dims {
                            return Err(Error::Domain("explicit sources disagree on dimension".into()));
                        }
                        Ok(Source {
                            x: node_from(&s.x)?,
                            p: s.p,
                            eps: s.eps,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                SourceEnsemble::new(dims, srcs)
            }
        }
    }
}

fn prune_absolute(srcs: Vec<Source>, threshold: f64) -> Result<SourceEnsemble> {
    let before = srcs.len();
    let kept: Vec<Source> = srcs.into_iter().filter(|s| s.p >= threshold).collect();
    let mut e = SourceEnsemble::new(1, kept)?;
    e.pruned = before - e.sources.len();
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forces::{quadratic_abc, ForceField};
    use crate::rng::{substream, Stream};
    use proptest::prelude::*;

    fn gaussian(d: f64) -> Family {
        Family::Gaussian { a: 0.0, d, v_phi: 0.1 }
    }

    #[test]
    fn family_source_counts() {
        assert_eq!(gaussian(5.0).prepare(DEFAULT_PRUNE).unwrap().len(), 31);
        let comb = Family::Comb { n: 3, a: 2, p: vec![] }.prepare(DEFAULT_PRUNE).unwrap();
        assert_eq!(comb.pair_table().len() / 2, 3);
        assert_eq!(comb.sources.iter().map(|s| s.x[0]).collect::<Vec<_>>(), vec![-2, 0, 2]);
        let pw = Family::PlaneWave { l: 100, v_phi: 0.1 }.prepare(DEFAULT_PRUNE).unwrap();
        assert_eq!(pw.len(), 101);
        assert_eq!(pw.pair_table().len() / 2, 5050);
        let bx = Family::BoxStationary { n: 3, a: 10, images: 7 }
            .prepare(DEFAULT_PRUNE)
            .unwrap();
        assert_eq!(bx.len(), 315);
        assert_eq!(bx.pair_table().len() / 2, 49455);
        let sp = Family::SphereStationary { r: 100, l: 4, m: 0 }
            .prepare(DEFAULT_PRUNE)
            .unwrap();
        assert_eq!(sp.len(), 314);
        let ring = Family::RingPlaneWave { r: 10, m: 4 }.prepare(DEFAULT_PRUNE).unwrap();
        assert_eq!(ring.len(), 63);
    }

    #[test]
    fn stricter_threshold_keeps_more_gaussian_sources() {
        assert_eq!(gaussian(5.0).prepare(1e-8).unwrap().len(), 41);
    }

    #[test]
    fn bad_parameters_are_rejected() {
        assert!(gaussian(0.0).prepare(DEFAULT_PRUNE).is_err());
        assert!(Family::Comb { n: 2, a: 3, p: vec![] }.prepare(DEFAULT_PRUNE).is_err());
        assert!(SourceEnsemble::new(1, vec![]).is_err());
        assert!(SourceEnsemble::new(
            1,
            vec![Source {
                x: [0; 3],
                p: 0.0,
                eps: 0.0
            }]
        )
        .is_err());
    }

    #[test]
    fn sampling_frequencies() {
        let e = Family::TwoSlit { d: 1, p: [0.1, 0.9] }.prepare(DEFAULT_PRUNE).unwrap();
        let s = e.sampler();
        let mut rng = substream(11, Stream::Auxiliary, 0);
        let n = 100_000;
        let (mut first, mut sum, mut sq) = (0usize, 0.0, 0.0);
        for _ in 0..n {
            let em = s.sample(&mut rng);
            first += (em.index == 0) as usize;
            sum += em.v0[0];
            sq += em.v0[0] * em.v0[0];
        }
        let f = first as f64 / n as f64;
        let sigma = (0.1 * 0.9 / n as f64).sqrt();
        assert!((f - 0.1).abs() < 3.0 * sigma);
        let mean = sum / n as f64;
        assert!(mean.abs() < 3.0 * (1.0 / 3.0 / n as f64).sqrt());
        assert!((sq / n as f64 - 1.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn wide_gaussian_approaches_uniform_comb() {
        let e = gaussian(1e3).prepare(DEFAULT_PRUNE).unwrap();
        let window: Vec<f64> = e.sources.iter().filter(|s| s.x[0].abs() <= 10).map(|s| s.p).collect();
        assert_eq!(window.len(), 21);
        let mean = window.iter().sum::<f64>() / 21.0;
        for p in window {
            assert!((p / mean - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn ho_ground_state_is_stationary() {
        let omega = 1e-4;
        let e = Family::HoStationary { n: 0, omega }.prepare(0.0).unwrap();
        let c = quadratic_abc(&ForceField::Harmonic { omega }).unwrap();
        for t in [1000.0, 3000.0, 10000.0] {
            let r = e.stationary_check(&c, t).unwrap();
            assert!(r < 1e-3, "t={t} residual={r}");
        }
        let single = SourceEnsemble::single([0; 3], 1).unwrap();
        assert!(single.stationary_check(&c, 200.0).unwrap() > 1e-3);
    }

    #[test]
    fn box_state_is_stationary_with_images() {
        let e = Family::BoxStationary {
            n: 3,
            a: 10,
            images: 10,
        }
        .prepare(DEFAULT_PRUNE)
        .unwrap();
        let c = quadratic_abc(&ForceField::None).unwrap();
        let mut worst: f64 = 0.0;
        for x in -10..=10 {
            let p = (3.0 * PI * x as f64 / 20.0).cos().powi(2) / 10.0;
            // fold the 21 image cells back into the box
            let folded = 21.0 * e.propagated_density(x as f64, &c, 150.0).unwrap();
            worst = worst.max((folded - p).abs());
        }
        assert!(worst < 1e-2, "residual {worst}");
    }

    proptest! {
        #[test]
        fn pair_table_is_symmetric(xs in proptest::collection::vec((-50i64..50, 0.01f64..1.0, -1.0f64..1.0), 2..8)) {
            let mut seen = std::collections::HashSet::new();
            let srcs: Vec<Source> = xs.into_iter().filter(|(x, _, _)| seen.insert(*x))
                .map(|(x, p, eps)| Source { x: [x, 0, 0], p, eps }).collect();
            prop_assume!(srcs.len() >= 2);
            let e = SourceEnsemble::new(1, srcs).unwrap();
            let total: f64 = e.sources.iter().map(|s| s.p).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            let t = e.pair_table();
            prop_assert_eq!(t.len(), e.len() * (e.len() - 1));
            for a in &t {
                let b = t.iter().find(|b| b.i == a.j && b.j == a.i).unwrap();
                prop_assert_eq!(a.delta, b.delta);
                prop_assert_eq!(a.p, b.p);
                prop_assert!((a.eps + b.eps).abs() < 1e-15);
                prop_assert_eq!(a.disp[0], -b.disp[0]);
            }
        }
    }
}
