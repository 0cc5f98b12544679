//! Scenario execution and artifact writing.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::accelerated::{solve_vq_nd, CompressedPairs, ExpectedModel, Geometry, TrainedModel, TrainedModelNd, Walls};
use crate::entangle::{chsh_experiment, correlation_theory, run_pairs, s_max_theory, CoincidenceConfig, Settings};
use crate::error::{Error, Result};
use crate::forces::{quadratic_abc, ClassicalCoefficients, Constraint, ForceField};
use crate::lattice::{run_emission, Dynamics, LatticeStore, Node, ParticleState, RandomMoves, MAX_DIMS};
use crate::oracles::{
    accessible, box_stationary, delta_gaussian_amplitude, delta_single_pdf, gaussian_faller, gaussian_free,
    gaussian_ho, ho_position, integrate, pdf_free_nd, pdf_momentum, pdf_quadratic, ring_plane_wave, ring_stationary,
    single_source_pmf, sphere_meridian_density, tra_plane, tra_single,
};
use crate::output::{
    format_node, write_coincidences, write_momentum, write_positions, CoincidenceRow, MomentumRow, PositionRow,
    Provenance, Summary,
};
use crate::rng::{substream, Stream};
use crate::scenario::{ChshSpec, ConstraintSpec, ForceSpec, ModelKind, ScenarioSpec};
use crate::sources::{Family, SourceEnsemble};
use crate::stats::{
    chi_square, fringe_visibility, peak_detect, reflection_ratio, tv_histogram, Binning, EnsembleStats, Histogram,
};

const CHUNK: u64 = 1024;

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub spec: ScenarioSpec,
    pub hash: String,
    /// Ensemble statistics; first axis only for multi-dimensional runs.
    pub stats: Option<EnsembleStats>,
    /// Full arrival nodes of multi-dimensional runs.
    pub nodes: BTreeMap<Node, u64>,
    pub positions: Vec<PositionRow>,
    pub momentum: Vec<MomentumRow>,
    pub coincidences: Vec<CoincidenceRow>,
    pub summary: Summary,
}

impl RunOutput {
    fn provenance(&self) -> Provenance {
        Provenance {
            scenario: self.hash.clone(),
            seed: self.spec.seed,
        }
    }

    /// Write the artifacts into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let mut files: Vec<(&str, String)> = Vec::new();
        let p = self.provenance();
        if self.stats.is_some() {
            files.push(("positions.csv", write_positions(&p, &self.positions)?));
            files.push(("momentum.csv", write_momentum(&p, &self.momentum)?));
        }
        if !self.coincidences.is_empty() {
            files.push(("coincidences.csv", write_coincidences(&p, &self.coincidences)?));
        }
        files.push(("summary.txt", self.summary.render()));
        let mut out = Vec::new();
        for (name, body) in files {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            out.push(path);
        }
        Ok(out)
    }
}

/// Per-emission outcome.
#[derive(Debug, Clone, Copy)]
struct Sample {
    x: Node,
    vq: f64,
    energy: f64,
}

struct Setup {
    spec: ScenarioSpec,
    dims: usize,
    /// Sources particles are emitted from.
    emit: SourceEnsemble,
    /// Sources whose pairs drive the quantum momentum (box images included).
    pairs: SourceEnsemble,
    field: ForceField,
    constraint: Option<Constraint>,
    coeffs: Option<ClassicalCoefficients>,
    omega: f64,
}

fn source_error(e: Error) -> Error {
    Error::Config {
        key: "source".into(),
        msg: e.to_string(),
    }
}

impl Setup {
    fn new(spec: &ScenarioSpec) -> Result<Self> {
        let family = spec.source.as_ref().ok_or_else(|| Error::Config {
            key: "source".into(),
            msg: "missing".into(),
        })?;
        let pairs = family.prepare(spec.prune).map_err(source_error)?;
        let emit = match family {
            Family::BoxStationary { n, a, .. } => Family::BoxStationary {
                n: *n,
                a: *a,
                images: 0,
            }
            .prepare(spec.prune)
            .map_err(source_error)?,
            _ => pairs.clone(),
        };
        let field = spec.force.field();
        let omega = match spec.force {
            ForceSpec::Harmonic { omega } => omega,
            _ => 0.0,
        };
        Ok(Setup {
            spec: spec.clone(),
            dims: spec.dims(),
            emit,
            pairs,
            coeffs: quadratic_abc(&field).ok(),
            field,
            constraint: spec.constraint.as_ref().map(ConstraintSpec::constraint),
            omega,
        })
    }

    fn energy(&self, x: f64, v: f64) -> f64 {
        0.5 * (v * v + self.omega * self.omega * x * x)
    }

    fn compressed(&self) -> Result<CompressedPairs> {
        if self.spec.quantum_forces {
            CompressedPairs::from_ensemble(&self.pairs)
        } else {
            Ok(CompressedPairs::default())
        }
    }

    fn geometry(&self) -> Geometry {
        match self.spec.constraint {
            Some(ConstraintSpec::Box { a }) => Geometry::Box(a),
            Some(ConstraintSpec::Ring { r }) => Geometry::Ring(r),
            Some(ConstraintSpec::Sphere { r }) => Geometry::Meridian(r),
            _ => Geometry::Line,
        }
    }

    fn walls(&self) -> Walls {
        match self.spec.constraint {
            Some(ConstraintSpec::Box { a }) => Walls::Box(a),
            _ => Walls::None,
        }
    }

    fn samples_trained(&self, lo: u64, hi: u64) -> Result<Vec<Sample>> {
        let sampler = self.emit.sampler();
        let n_t = self.spec.n_t;
        if self.dims == 1 {
            let model = TrainedModel::new(self.compressed()?, self.spec.n_tau(), self.spec.q_init)?;
            let walls = self.walls();
            (lo..hi)
                .map(|k| {
                    let mut rng = substream(self.spec.seed, Stream::Emission, k);
                    let em = sampler.sample(&mut rng);
                    let s = model.run(em.x0[0], em.v0[0], &self.field, walls, n_t, &mut rng)?;
                    let v = s.vq + s.vf;
                    Ok(Sample {
                        x: em_node(s.x),
                        vq: s.vq,
                        energy: self.energy(s.x as f64, v),
                    })
                })
                .collect()
        } else {
            let model = TrainedModelNd::new(&self.pairs, self.spec.n_tau())?;
            (lo..hi)
                .map(|k| {
                    let mut rng = substream(self.spec.seed, Stream::Emission, k);
                    let em = sampler.sample(&mut rng);
                    let mut s = model.emit(em.x0, em.v0, &mut rng);
                    while s.t < n_t {
                        model.step(&mut s, &self.field, &mut rng)?;
                    }
                    let v2: f64 = (0..self.dims).map(|d| (s.vq[d] + s.vf[d]).powi(2)).sum();
                    Ok(Sample {
                        x: s.x,
                        vq: s.vq[0],
                        energy: 0.5 * v2,
                    })
                })
                .collect()
        }
    }

    fn samples_expected(&self, lo: u64, hi: u64) -> Result<Vec<Sample>> {
        let sampler = self.emit.sampler();
        let t = self.spec.n_t as f64;
        if self.dims == 1 {
            let coeffs = self.coeffs.ok_or_else(|| Error::Config {
                key: "force".into(),
                msg: "the expected-value code needs a quadratic potential".into(),
            })?;
            let model = ExpectedModel {
                pairs: self.compressed()?,
                coeffs,
                geometry: self.geometry(),
            };
            let k_t = coeffs.eval(t);
            (lo..hi)
                .map(|k| {
                    let mut rng = substream(self.spec.seed, Stream::Emission, k);
                    let em = sampler.sample(&mut rng);
                    let x0 = em.x0[0] as f64;
                    let (pos, vq) = model.run(x0, em.v0[0], t)?;
                    let v = k_t.a_dot * x0 + k_t.b_dot * vq + k_t.c_dot;
                    Ok(Sample {
                        x: em_node(pos.round() as i64),
                        vq,
                        energy: self.energy(pos, v),
                    })
                })
                .collect()
        } else {
            let model = TrainedModelNd::new(&self.pairs, self.spec.n_tau())?;
            (lo..hi)
                .map(|k| {
                    let mut rng = substream(self.spec.seed, Stream::Emission, k);
                    let em = sampler.sample(&mut rng);
                    let s = model.emit(em.x0, em.v0.clone(), &mut rng);
                    let vq = if self.spec.quantum_forces {
                        solve_vq_nd(&model, &em.v0, &s.rho)?
                    } else {
                        em.v0.clone()
                    };
                    let mut x = [0; MAX_DIMS];
                    for d in 0..self.dims {
                        x[d] = (em.x0[d] as f64 + vq[d] * t).round() as i64;
                    }
                    Ok(Sample {
                        x,
                        vq: vq[0],
                        energy: 0.5 * vq.iter().map(|v| v * v).sum::<f64>(),
                    })
                })
                .collect()
        }
    }

    fn samples_lattice(&self, lo: u64, hi: u64) -> Result<Vec<Sample>> {
        let sampler = self.emit.sampler();
        let mut lattice = LatticeStore::new(self.spec.cell_cap, self.spec.boson_cap);
        let dynamics = Dynamics {
            field: &self.field,
            constraint: self.constraint.as_ref(),
            coupling: None,
        };
        let mut out = Vec::with_capacity((hi - lo) as usize);
        for k in lo..hi {
            let mut rng = substream(self.spec.seed, Stream::Emission, k);
            let em = sampler.sample(&mut rng);
            let p = ParticleState::emit(em.x0, em.v0.clone(), em.eps);
            let mut v2 = 0.0;
            let rec = run_emission(
                p,
                &mut lattice,
                &dynamics,
                &mut RandomMoves(&mut rng),
                self.spec.n_t,
                |s, _| {
                    v2 = (0..s.dims).map(|d| (s.vq[d] + s.vf[d]).powi(2)).sum();
                },
            )?;
            let x = rec.x[0] as f64;
            out.push(Sample {
                x: rec.x,
                vq: rec.vq[0],
                energy: 0.5 * (v2 + self.omega * self.omega * x * x),
            });
        }
        Ok(out)
    }

    fn collect(&self) -> Result<Vec<Sample>> {
        let n = self.spec.n_p;
        let blocks: Vec<(u64, u64)> = match self.spec.model {
            ModelKind::M => {
                let r = self.spec.replicas;
                (0..r).map(|i| (i * n / r, (i + 1) * n / r)).collect()
            }
            _ => (0..n.div_ceil(CHUNK))
                .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(n)))
                .collect(),
        };
        let parts: Vec<Vec<Sample>> = blocks
            .into_par_iter()
            .map(|(lo, hi)| match self.spec.model {
                ModelKind::M => self.samples_lattice(lo, hi),
                ModelKind::Mstar => self.samples_trained(lo, hi),
                ModelKind::Mstarstar => self.samples_expected(lo, hi),
            })
            .collect::<Result<_>>()?;
        Ok(parts.into_iter().flatten().collect())
    }

    fn single_source(&self) -> Option<i64> {
        (self.pairs.sources.len() == 1).then(|| self.pairs.sources[0].x[0])
    }

    /// Per-node probability expected at the end of the run, where an oracle
    /// applies, together with the node range it covers.
    fn theory(&self) -> Option<(Box<dyn Fn(i64) -> f64 + Sync + '_>, i64, i64)> {
        if self.dims != 1 {
            return None;
        }
        let spec = &self.spec;
        let t = spec.n_t as f64;
        let family = spec.source.as_ref()?;
        match (spec.constraint, spec.force) {
            (None, ForceSpec::Delta { lambda, .. }) => match family {
                Family::Single { .. } => {
                    let x0 = self.single_source()?;
                    let reach = spec.n_t as i64;
                    Some((
                        Box::new(move |x| delta_single_pdf(x as f64, t, x0 as f64, lambda).unwrap_or(0.0)),
                        x0 - reach,
                        x0 + reach,
                    ))
                }
                Family::Gaussian { a, d, v_phi } => {
                    let (a, d, v_phi) = (*a, *d, *v_phi);
                    let reach = (a.abs() + t + 10.0 * d) as i64;
                    Some((
                        Box::new(move |x| {
                            delta_gaussian_amplitude(x as f64, t, a, d, v_phi, lambda)
                                .map(|p| p.norm_sqr())
                                .unwrap_or(0.0)
                        }),
                        -reach,
                        reach,
                    ))
                }
                _ => None,
            },
            (_, ForceSpec::Delta { .. }) => None,
            (Some(ConstraintSpec::Box { a }), ForceSpec::None) => match family {
                Family::BoxStationary { n, .. } => {
                    let n = *n;
                    Some((Box::new(move |x| box_stationary(x as f64, n, a as f64)), -a, a))
                }
                _ => None,
            },
            (Some(ConstraintSpec::Ring { r }), _) => {
                let h = (PI * r as f64).floor() as i64;
                match family {
                    Family::RingStationary { n, .. } => {
                        let n = *n;
                        Some((
                            Box::new(move |x| ring_stationary(x as f64, n, r as f64).unwrap_or(0.0)),
                            -h,
                            h,
                        ))
                    }
                    Family::RingPlaneWave { .. } => {
                        Some((Box::new(move |_| ring_plane_wave(r as f64).unwrap_or(0.0)), -h, h))
                    }
                    _ => None,
                }
            }
            (Some(ConstraintSpec::Sphere { r }), _) => match family {
                Family::SphereStationary { l, m, .. } => {
                    let (l, m, rf) = (*l, *m, r as f64);
                    let h = (PI * rf).floor() as i64;
                    Some((
                        Box::new(move |x| {
                            let theta = x as f64 / rf;
                            sphere_meridian_density(theta, l, m).map(|d| d / rf).unwrap_or(0.0)
                        }),
                        0,
                        h,
                    ))
                }
                _ => None,
            },
            (Some(_), _) => None,
            (None, ForceSpec::Harmonic { omega }) if matches!(family, Family::HoStationary { .. }) => {
                let Family::HoStationary { n, .. } = family else {
                    unreachable!()
                };
                let n = *n;
                let reach = ((2.0 * n as f64 + 1.0) / (PI * omega)).sqrt() * 1.5 + 10.0;
                let reach = reach as i64;
                Some((Box::new(move |x| ho_position(x as f64, n, omega)), -reach, reach))
            }
            (None, force) if matches!(family, Family::Gaussian { .. }) => {
                let Family::Gaussian { a, d, v_phi } = *family else {
                    unreachable!()
                };
                let centre = match force {
                    ForceSpec::Constant { phi } => a + v_phi * t + phi * t * t / 2.0,
                    ForceSpec::Harmonic { omega } => a * (omega * t).cos() + v_phi * (omega * t).sin() / omega,
                    _ => a + v_phi * t,
                };
                let width = (d * d * (1.0 + t * t / (PI * PI * d.powi(4)))).sqrt();
                let (lo, hi) = (
                    (centre - 8.0 * width).floor() as i64,
                    (centre + 8.0 * width).ceil() as i64,
                );
                let f: Box<dyn Fn(i64) -> f64 + Sync> = match force {
                    ForceSpec::Constant { phi } => Box::new(move |x| gaussian_faller(x as f64, t, a, d, v_phi, phi)),
                    ForceSpec::Harmonic { omega } => Box::new(move |x| gaussian_ho(x as f64, t, a, d, v_phi, omega)),
                    _ => Box::new(move |x| gaussian_free(x as f64, t, a, d, v_phi)),
                };
                Some((f, lo, hi))
            }
            (None, _) => {
                if !spec.quantum_forces && self.pairs.sources.len() > 1 {
                    return None;
                }
                let coeffs = self.coeffs?;
                let iv = accessible(&self.pairs, &coeffs, t).ok()?;
                let (lo, hi) = (iv.lo.floor() as i64, iv.hi.ceil() as i64);
                let free = matches!(spec.force, ForceSpec::None);
                match self.single_source() {
                    Some(x0) if free && spec.model != ModelKind::Mstarstar => {
                        Some((Box::new(move |x| single_source_pmf(x, spec.n_t, x0)), lo, hi))
                    }
                    _ => Some((
                        Box::new(move |x| pdf_quadratic(x as f64, t, &self.pairs, &coeffs).unwrap_or(0.0)),
                        lo,
                        hi,
                    )),
                }
            }
        }
    }

    /// Probability of each momentum bin for the quantum momentum.
    fn momentum_theory(&self, b: &Binning) -> Option<Vec<f64>> {
        if self.dims != 1 {
            return None;
        }
        let w = b.width();
        let steady = self.spec.quantum_forces;
        Some(
            (0..b.bins)
                .map(|i| {
                    let c = b.centre(i);
                    if steady {
                        integrate(|v| pdf_momentum(v, &self.pairs), c - w / 2.0, c + w / 2.0, 8)
                    } else {
                        0.5 * w
                    }
                })
                .collect(),
        )
    }
}

fn em_node(x: i64) -> Node {
    [x, 0, 0]
}

fn fmt_f(v: f64) -> String {
    format!("{v:.6}")
}

/// Execute a validated scenario.
pub fn run(spec: &ScenarioSpec) -> Result<RunOutput> {
    spec.validate()?;
    let hash = spec.hash();
    let mut summary = Summary::default();
    summary.push("name", &spec.name);
    summary.push("scenario", &hash);
    summary.push("seed", spec.seed);
    summary.push("model", spec.model);
    summary.push("n_p", spec.n_p);
    summary.push("n_t", spec.n_t);
    if let Some(c) = &spec.chsh {
        let coincidences = run_chsh(spec, c, &mut summary)?;
        return Ok(RunOutput {
            spec: spec.clone(),
            hash,
            stats: None,
            nodes: BTreeMap::new(),
            positions: Vec::new(),
            momentum: Vec::new(),
            coincidences,
            summary,
        });
    }
    let setup = Setup::new(spec)?;
    summary.push("sources", setup.pairs.sources.len());
    let samples = setup.collect()?;
    let binning = Binning::new(-1.0, 1.0, spec.momentum_bins)?;
    let mut stats = EnsembleStats::new(binning, Binning::new(0.0, 1.0, 200)?, hash.clone(), spec.seed);
    let mut nodes = BTreeMap::new();
    for s in &samples {
        stats.record(s.x[0], s.vq, s.energy);
        if setup.dims > 1 {
            *nodes.entry(s.x).or_insert(0u64) += 1;
        }
    }

    let theory = setup.theory();
    let mut positions = Vec::new();
    if setup.dims == 1 {
        let (mut lo, mut hi) = stats.positions.range().unwrap_or((0, 0));
        if let Some((f, tlo, thi)) = &theory {
            lo = lo.min(*tlo);
            hi = hi.max(*thi);
            let tv = tv_histogram(&stats.positions, f, *tlo, *thi)?;
            summary.push("position_tv", fmt_f(tv));
            let observed: Vec<u64> = (lo..=hi).map(|x| stats.positions.count(x)).collect();
            let probs: Vec<f64> = (lo..=hi).map(|x| f(x)).collect();
            if let Ok(c) = chi_square(&observed, &probs) {
                summary.push("position_chi2", fmt_f(c.statistic));
                summary.push("position_chi2_dof", c.dof);
                summary.push("position_chi2_p", fmt_f(c.p_value));
            }
        }
        for x in lo..=hi {
            positions.push(PositionRow {
                node: x.to_string(),
                count: stats.positions.count(x),
                theory: theory.as_ref().map(|(f, _, _)| f(x)),
            });
        }
    } else {
        let t = spec.n_t as f64;
        let free = matches!(spec.force, ForceSpec::None) && spec.quantum_forces;
        if free && setup.dims == 2 {
            let h = spec.n_t as i64;
            let n = spec.n_p as f64;
            let mut tv = 0.0;
            let mut inside = 0.0;
            for a in -h..=h {
                for b in -h..=h {
                    let p = pdf_free_nd(&[a as f64, b as f64], t, &setup.pairs)?;
                    let c = nodes.get(&[a, b, 0]).copied().unwrap_or(0) as f64 / n;
                    inside += c;
                    tv += (c - p).abs();
                }
            }
            summary.push("position_tv", fmt_f(0.5 * (tv + 1.0 - inside)));
        }
        for (x, c) in &nodes {
            let xs: Vec<f64> = x[..setup.dims].iter().map(|&v| v as f64).collect();
            positions.push(PositionRow {
                node: format_node(&x[..setup.dims]),
                count: *c,
                theory: if free {
                    pdf_free_nd(&xs, t, &setup.pairs).ok()
                } else {
                    None
                },
            });
        }
    }

    let m_theory = setup.momentum_theory(&stats.momentum.binning);
    let momentum: Vec<MomentumRow> = (0..stats.momentum.binning.bins)
        .map(|i| MomentumRow {
            bin_center: stats.momentum.binning.centre(i),
            count: stats.momentum.counts[i],
            theory: m_theory.as_ref().map(|p| p[i]),
        })
        .collect();
    if let Some(p) = &m_theory {
        if let Ok(c) = chi_square(&stats.momentum.counts, p) {
            summary.push("momentum_chi2", fmt_f(c.statistic));
            summary.push("momentum_chi2_p", fmt_f(c.p_value));
        }
    }
    let peaks: Vec<String> = peak_detect(&stats.momentum).iter().take(6).map(|v| fmt_f(*v)).collect();
    summary.push("momentum_peaks", peaks.join(";"));

    derived_figures(&setup, &stats, &mut summary)?;

    Ok(RunOutput {
        spec: spec.clone(),
        hash,
        stats: Some(stats),
        nodes,
        positions,
        momentum,
        coincidences: Vec::new(),
        summary,
    })
}

fn derived_figures(setup: &Setup, stats: &EnsembleStats, summary: &mut Summary) -> Result<()> {
    let spec = &setup.spec;
    if setup.dims != 1 {
        return Ok(());
    }
    if let Some(Family::TwoSlit { d, p }) = &spec.source {
        let period = spec.n_t as i64 / d;
        if period > 0 && spec.n_t as i64 % d == 0 {
            let bin = (1..=(period / 20).max(1)).rev().find(|b| period % b == 0).unwrap_or(1);
            if let Ok(v) = fringe_visibility(&stats.positions, period, bin) {
                summary.push("visibility", fmt_f(v));
                summary.push("visibility_theory", fmt_f(2.0 * (p[0] * p[1]).sqrt() / (p[0] + p[1])));
            }
        }
    }
    if let ForceSpec::Delta { lambda, .. } = spec.force {
        let x0 = match &spec.source {
            Some(Family::Gaussian { a, .. }) => a.round() as i64,
            _ => setup.single_source().unwrap_or(1),
        };
        let r = reflection_ratio(&stats.positions, 0, x0)?;
        summary.push("ref", fmt_f(r));
        summary.push("tra", fmt_f(1.0 - r));
        match &spec.source {
            Some(Family::Single { .. }) => summary.push("ref_theory", fmt_f(1.0 - tra_single(lambda)?)),
            Some(Family::Gaussian { v_phi, .. }) => summary.push("ref_theory", fmt_f(1.0 - tra_plane(lambda, *v_phi)?)),
            _ => {}
        }
    }
    if let ForceSpec::Harmonic { omega } = spec.force {
        summary.push("energy_mean", format!("{:.6e}", stats.energy_mean()?));
        if let Some(Family::HoStationary { n, .. }) = &spec.source {
            summary.push("energy_theory", format!("{:.6e}", (*n as f64 + 0.5) * omega / PI));
        }
    }
    Ok(())
}

fn run_chsh(spec: &ScenarioSpec, c: &ChshSpec, summary: &mut Summary) -> Result<Vec<CoincidenceRow>> {
    let cfg = CoincidenceConfig {
        d: c.d,
        t: spec.n_t,
        n_pairs: spec.n_p,
        window: c.window,
        model: spec.branch_model(),
        seed: spec.seed,
    };
    summary.push("detector", cfg.detector());
    summary.push("window", c.window);
    let mut rows = Vec::new();
    let row = |s: Settings, r: &crate::entangle::Coincidences| CoincidenceRow {
        alpha: s.alpha,
        beta: s.beta,
        pp: r.pp(),
        mm: r.mm(),
        pm: r.pm(),
        mp: r.mp(),
        correlation: r.correlation().ok(),
        theory: correlation_theory(&s),
    };
    for &alpha in &c.alphas {
        let s = Settings { alpha, beta: c.beta };
        rows.push(row(s, &run_pairs(&cfg, &s)?));
    }
    for (i, &theta) in c.thetas.iter().enumerate() {
        let r = chsh_experiment(&cfg, theta)?;
        rows.push(row(
            Settings {
                alpha: theta,
                beta: 0.0,
            },
            &r.runs[0],
        ));
        rows.push(row(
            Settings {
                alpha: 3.0 * theta,
                beta: 0.0,
            },
            &r.runs[1],
        ));
        summary.push(&format!("chsh_{i}_theta"), fmt_f(theta));
        summary.push(&format!("chsh_{i}_s"), fmt_f(r.s_max));
        summary.push(&format!("chsh_{i}_theory"), fmt_f(s_max_theory(theta)));
    }
    Ok(rows)
}

/// Validate a scenario including its source ensemble.
pub fn check(spec: &ScenarioSpec) -> Result<()> {
    spec.validate()?;
    if spec.chsh.is_none() {
        Setup::new(spec)?;
    }
    Ok(())
}

/// Oracle position pmf over its support, when the scenario has one.
pub fn theory_table(spec: &ScenarioSpec) -> Result<Option<Vec<(i64, f64)>>> {
    check(spec)?;
    if spec.chsh.is_some() {
        return Ok(None);
    }
    let setup = Setup::new(spec)?;
    Ok(setup.theory().map(|(f, lo, hi)| (lo..=hi).map(|x| (x, f(x))).collect()))
}

/// Histogram of the first axis from a run, or an error for CHSH runs.
pub fn positions(out: &RunOutput) -> Result<&Histogram> {
    out.stats
        .as_ref()
        .map(|s| &s.positions)
        .ok_or_else(|| Error::Unsupported("coincidence runs have no position histogram".into()))
}
