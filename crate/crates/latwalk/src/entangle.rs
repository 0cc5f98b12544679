//! Momentum-entangled pairs and the two-slit coincidence experiment.
//!
//! A pair is emitted from sources at `±D`: particle I leaves one source,
//! particle II the other, with opposite source momenta and a shared phase
//! `phi`. Each branch then evolves on its own, never seeing the other
//! branch's lattice or random stream.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accelerated::QInit;
use crate::error::{Error, Result};
use crate::forces::ForceField;
use crate::lattice::{
    node1, run_emission, step_probabilities, BranchCoupling, Dynamics, LatticeStore, MoveSource, ParticleState,
    RandomMoves,
};
use crate::rng::{substream, Stream};
use crate::scalar::{clamp_unit, wrap};
use crate::stats::Histogram;

/// Number of particles sharing the hidden phase.
pub const N_R: i64 = 2;

/// Interferometer settings in radians. Branch I sees the slit phase
/// difference `alpha / pi`, branch II `beta / pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub alpha: f64,
    pub beta: f64,
}

impl Settings {
    pub fn eps_one(&self) -> f64 {
        self.alpha / PI
    }

    pub fn eps_two(&self) -> f64 {
        self.beta / PI
    }
}

/// One branch of a pair as seen by its own dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub x0: i64,
    pub v0: f64,
    /// Phase difference between the `+D` and `-D` slits.
    pub eps: f64,
    pub phi: f64,
    /// Slit separation `2D`.
    pub delta: f64,
}

impl Branch {
    /// `sin(2 pi (delta q - eps + phi)) / (2 pi delta)`.
    pub fn boson_term(&self, q: f64) -> f64 {
        let k = 2.0 * PI * self.delta;
        (k * q - 2.0 * PI * (self.eps - self.phi)).sin() / k
    }

    /// Momentum the branch relaxes to for a given lag variable `q`.
    pub fn momentum(&self, q: f64) -> f64 {
        wrap(&(self.v0 + (self.eps - self.phi) / self.delta - self.boson_term(q)))
    }

    /// Fixed point of [`Branch::momentum`], wrapped into `[-1, 1)`.
    pub fn converged_momentum(&self) -> f64 {
        let target = self.v0 + (self.eps - self.phi) / self.delta;
        let k = 2.0 * PI * self.delta;
        let shift = 2.0 * PI * (self.eps - self.phi);
        // v + boson_term(v) is non-decreasing and within 1/k of v
        let (mut lo, mut hi) = (target - 1.0 / k - 1e-12, target + 1.0 / k + 1e-12);
        let mut v = target;
        for _ in 0..100 {
            let h = v + (k * v - shift).sin() / k - target;
            if h.abs() < 1e-14 {
                break;
            }
            if h > 0.0 {
                hi = v;
            } else {
                lo = v;
            }
            let slope = 1.0 + (k * v - shift).cos();
            let next = v - h / slope;
            v = if slope > 1e-3 && next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo < 1e-15 {
                break;
            }
        }
        wrap(&v)
    }

    /// Residual of the expected-value condition for arrival `x` at time `t`.
    pub fn residual(&self, x: f64, t: f64) -> f64 {
        let u = (x - self.x0 as f64) / t;
        self.v0 - u + (self.eps - self.phi) / self.delta - self.boson_term(u)
    }

    /// Phase carried by the particle: the slit phase if it left `+D`.
    fn source_phase(&self) -> f64 {
        if self.x0 > 0 {
            self.eps
        } else {
            0.0
        }
    }
}

/// Source quantities imprinted on a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntangledPair {
    pub phi: f64,
    pub one: Branch,
    pub two: Branch,
}

/// Draw a pair for sources at `±d` (`d > 0`).
pub fn emit_pair<R: Rng>(d: i64, settings: &Settings, rng: &mut R) -> Result<EntangledPair> {
    if d <= 0 {
        return Err(Error::Domain(format!("half slit separation {d} must be positive")));
    }
    let v0: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(-1.0..1.0);
    let x0 = if rng.gen_bool(0.5) { d } else { -d };
    let delta = 2.0 * d as f64;
    Ok(EntangledPair {
        phi,
        one: Branch {
            x0,
            v0,
            eps: settings.eps_one(),
            phi,
            delta,
        },
        two: Branch {
            x0: -x0,
            v0: -v0,
            eps: settings.eps_two(),
            phi,
            delta,
        },
    })
}

/// How a branch is evolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BranchModel {
    /// Full lattice with per-branch boson stores.
    Lattice,
    /// Trained walk with lag `n_tau`.
    Trained { n_tau: f64, init: QInit },
    /// Expected values only: straight flight at the converged momentum.
    Expected,
}

/// Arrival of one branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub x: i64,
    pub vq: f64,
}

pub fn expected_branch(b: &Branch, t: u64) -> Arrival {
    let vq = b.converged_momentum();
    Arrival {
        x: (b.x0 as f64 + vq * t as f64).round() as i64,
        vq,
    }
}

pub fn trained_branch<R: Rng>(b: &Branch, t: u64, n_tau: f64, init: QInit, rng: &mut R) -> Result<Arrival> {
    if !(n_tau >= 1.0) {
        return Err(Error::Domain(format!("lag {n_tau} must be at least 1")));
    }
    let mut q = match init {
        QInit::SourceMomentum => b.v0,
        QInit::Trained => b.converged_momentum(),
    };
    let mut vq = b.momentum(q);
    let mut moves = RandomMoves(rng);
    let mut x = b.x0;
    for _ in 0..t {
        let (pp, pz, _) = step_probabilities(&clamp_unit(vq))?;
        x += moves.draw(pp, pz);
        q += wrap(&(vq - q)) / n_tau;
        vq = b.momentum(q);
    }
    Ok(Arrival { x, vq })
}

/// One branch through the full model on the branch's own lattice.
pub fn lattice_branch<R: Rng>(
    b: &Branch,
    t: u64,
    n_r: i64,
    lattice: &mut LatticeStore<f64>,
    rng: &mut R,
) -> Result<Arrival> {
    let field = ForceField::None;
    let dynamics = Dynamics {
        field: &field,
        constraint: None,
        coupling: Some(BranchCoupling {
            n_r,
            phi: b.phi,
            eps_branch: b.eps,
            delta: b.delta,
        }),
    };
    let p = ParticleState::emit(node1(b.x0), vec![b.v0], b.source_phase());
    let rec = run_emission(p, lattice, &dynamics, &mut RandomMoves(rng), t, |_, _| {})?;
    Ok(Arrival {
        x: rec.x[0],
        vq: rec.vq[0],
    })
}

/// Joint arrival density of the two branches.
pub fn joint_pdf(x1: f64, x2: f64, t: f64, delta: f64, eps_one: f64, eps_two: f64) -> f64 {
    (1.0 + (PI * (eps_two - eps_one) + PI * delta * (x1 - x2) / t).cos()) / (4.0 * t * t)
}

/// Single-particle density at the detector `x+` (`plus`) or `x-` for the
/// slit phase `alpha` in radians.
pub fn detector_pdf(plus: bool, alpha: f64, t: f64) -> f64 {
    let s = if plus { 1.0 } else { -1.0 };
    (1.0 + s * alpha.sin()) / (2.0 * t)
}

pub fn correlation_theory(s: &Settings) -> f64 {
    (s.beta - s.alpha).cos()
}

pub fn s_max_theory(theta: f64) -> f64 {
    3.0 * theta.cos() - (3.0 * theta).cos()
}

/// Configuration of a coincidence run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceConfig {
    /// Half slit separation `D`.
    pub d: i64,
    pub t: u64,
    pub n_pairs: u64,
    /// Detector half-width in nodes; 0 counts exact hits only.
    #[serde(default)]
    pub window: i64,
    pub model: BranchModel,
    pub seed: u64,
}

impl CoincidenceConfig {
    /// Detector position `x+ = t / (4D)`, rounded to a node.
    pub fn detector(&self) -> i64 {
        (self.t as f64 / (4.0 * self.d as f64)).round() as i64
    }

    fn classify(&self, x: i64) -> Option<bool> {
        let xp = self.detector();
        if (x - xp).abs() <= self.window {
            Some(true)
        } else if (x + xp).abs() <= self.window {
            Some(false)
        } else {
            None
        }
    }

    fn validate(&self) -> Result<()> {
        if self.d <= 0 {
            return Err(Error::Domain(format!(
                "half slit separation {} must be positive",
                self.d
            )));
        }
        if self.t == 0 {
            return Err(Error::Domain("coincidence time must be positive".into()));
        }
        if self.window < 0 || 2 * self.window >= 2 * self.detector() {
            return Err(Error::Domain(format!(
                "detector window {} overlaps the two detectors at ±{}",
                self.window,
                self.detector()
            )));
        }
        Ok(())
    }
}

/// Coincidence table plus single-branch arrival histograms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Coincidences {
    /// Counts indexed `[I at x+?][II at x+?]`, i.e. `[[mm, mp], [pm, pp]]`.
    pub counts: [[u64; 2]; 2],
    pub singles_one: Histogram,
    pub singles_two: Histogram,
    pub pairs: u64,
}

impl Coincidences {
    fn record(&mut self, cfg: &CoincidenceConfig, a: Arrival, b: Arrival) {
        self.pairs += 1;
        self.singles_one.add(a.x);
        self.singles_two.add(b.x);
        if let (Some(i), Some(j)) = (cfg.classify(a.x), cfg.classify(b.x)) {
            self.counts[i as usize][j as usize] += 1;
        }
    }

    fn merge(&mut self, other: &Coincidences) {
        for i in 0..2 {
            for j in 0..2 {
                self.counts[i][j] += other.counts[i][j];
            }
        }
        self.singles_one.merge(&other.singles_one);
        self.singles_two.merge(&other.singles_two);
        self.pairs += other.pairs;
    }

    pub fn pp(&self) -> u64 {
        self.counts[1][1]
    }
    pub fn mm(&self) -> u64 {
        self.counts[0][0]
    }
    pub fn pm(&self) -> u64 {
        self.counts[1][0]
    }
    pub fn mp(&self) -> u64 {
        self.counts[0][1]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// `(N_same - N_opp) / (N_same + N_opp)`.
    pub fn correlation(&self) -> Result<f64> {
        let same = (self.pp() + self.mm()) as f64;
        let opp = (self.pm() + self.mp()) as f64;
        if same + opp == 0.0 {
            return Err(Error::Statistics(format!(
                "no coincidences among {} pairs; raise the number of pairs or the detector window",
                self.pairs
            )));
        }
        Ok((same - opp) / (same + opp))
    }

    /// Fractions `[pp, mm, pm, mp]` of all coincidences.
    pub fn fractions(&self) -> Result<[f64; 4]> {
        let n = self.total();
        if n == 0 {
            return Err(Error::Statistics(format!("no coincidences among {} pairs", self.pairs)));
        }
        let n = n as f64;
        Ok([self.pp(), self.mm(), self.pm(), self.mp()].map(|c| c as f64 / n))
    }
}

/// Normalized coincidence fractions `[pp, mm, pm, mp]` expected for `s`.
pub fn fractions_theory(s: &Settings) -> [f64; 4] {
    let c = correlation_theory(s);
    let same = (1.0 + c) / 4.0;
    let opp = (1.0 - c) / 4.0;
    [same, same, opp, opp]
}

const CHUNK: u64 = 4096;

fn run_chunk(cfg: &CoincidenceConfig, s: &Settings, lo: u64, hi: u64) -> Result<Coincidences> {
    let mut out = Coincidences::default();
    for k in lo..hi {
        let pair = emit_pair(cfg.d, s, &mut substream(cfg.seed, Stream::Emission, k))?;
        let mut r1 = substream(cfg.seed, Stream::BranchOne, k);
        let mut r2 = substream(cfg.seed, Stream::BranchTwo, k);
        let (a, b) = match cfg.model {
            BranchModel::Expected => (expected_branch(&pair.one, cfg.t), expected_branch(&pair.two, cfg.t)),
            BranchModel::Trained { n_tau, init } => (
                trained_branch(&pair.one, cfg.t, n_tau, init, &mut r1)?,
                trained_branch(&pair.two, cfg.t, n_tau, init, &mut r2)?,
            ),
            BranchModel::Lattice => unreachable!("lattice branches run sequentially"),
        };
        out.record(cfg, a, b);
    }
    Ok(out)
}

/// Emit `cfg.n_pairs` pairs under settings `s` and count coincidences.
/// Pair `k` always draws from the substreams with index `k`, so the result
/// does not depend on the thread count.
pub fn run_pairs(cfg: &CoincidenceConfig, s: &Settings) -> Result<Coincidences> {
    cfg.validate()?;
    if let BranchModel::Lattice = cfg.model {
        let cells = 4 * (cfg.t as usize + 1).pow(2);
        let mut lat_one = LatticeStore::new(cells, 64);
        let mut lat_two = LatticeStore::new(cells, 64);
        let mut out = Coincidences::default();
        for k in 0..cfg.n_pairs {
            let pair = emit_pair(cfg.d, s, &mut substream(cfg.seed, Stream::Emission, k))?;
            let a = lattice_branch(
                &pair.one,
                cfg.t,
                N_R,
                &mut lat_one,
                &mut substream(cfg.seed, Stream::BranchOne, k),
            )?;
            let b = lattice_branch(
                &pair.two,
                cfg.t,
                N_R,
                &mut lat_two,
                &mut substream(cfg.seed, Stream::BranchTwo, k),
            )?;
            out.record(cfg, a, b);
        }
        return Ok(out);
    }
    let chunks: Vec<(u64, u64)> = (0..cfg.n_pairs.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(cfg.n_pairs)))
        .collect();
    let parts: Vec<Coincidences> = chunks
        .into_par_iter()
        .map(|(lo, hi)| run_chunk(cfg, s, lo, hi))
        .collect::<Result<_>>()?;
    let mut out = Coincidences::default();
    for p in &parts {
        out.merge(p);
    }
    Ok(out)
}

/// Outcome of the two runs behind one CHSH value.
#[derive(Debug, Clone)]
pub struct ChshResult {
    pub theta: f64,
    pub c_theta: f64,
    pub c_three: f64,
    pub s_max: f64,
    /// Runs at `alpha = theta` and `alpha = 3 theta`, both with `beta = 0`.
    pub runs: [Coincidences; 2],
}

/// `S = 3 C(theta) - C(3 theta)` from two runs with `beta = 0`.
pub fn chsh_experiment(cfg: &CoincidenceConfig, theta: f64) -> Result<ChshResult> {
    let one = run_pairs(
        cfg,
        &Settings {
            alpha: theta,
            beta: 0.0,
        },
    )?;
    let three = run_pairs(
        cfg,
        &Settings {
            alpha: 3.0 * theta,
            beta: 0.0,
        },
    )?;
    let c_theta = one.correlation()?;
    let c_three = three.correlation()?;
    Ok(ChshResult {
        theta,
        c_theta,
        c_three,
        s_max: 3.0 * c_theta - c_three,
        runs: [one, three],
    })
}
