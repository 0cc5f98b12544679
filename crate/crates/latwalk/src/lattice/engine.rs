use rand::Rng;

use super::rules::{lb_decay, pb_decay, reset_condition, step_probabilities};
use super::store::{LatticeBoson, LatticeCell, LatticeStore, ParticleBoson, ParticleState};
use super::{pair_orientation, Node, PairLabel, MAX_DIMS};
use crate::error::{Error, Result};
use crate::forces::{barrier_kick_2d, Constraint, ForceField};
use crate::scalar::{wrap, Scalar};

/// Supplier of the per-dimension step `v ∈ {-1, 0, 1}`.
pub trait MoveSource {
    fn draw(&mut self, p_plus: f64, p_zero: f64) -> i64;
}

/// Steps drawn from a random generator.
pub struct RandomMoves<'r, R: Rng>(pub &'r mut R);

impl<R: Rng> MoveSource for RandomMoves<'_, R> {
    fn draw(&mut self, p_plus: f64, p_zero: f64) -> i64 {
        let u: f64 = self.0.gen();
        if u < p_plus {
            1
        } else if u < p_plus + p_zero {
            0
        } else {
            -1
        }
    }
}

/// Prescribed step sequence, consumed one entry per dimension per iteration.
#[derive(Debug, Clone)]
pub struct ForcedMoves {
    moves: Vec<i64>,
    next: usize,
}

impl ForcedMoves {
    pub fn new(moves: Vec<i64>) -> Self {
        ForcedMoves { moves, next: 0 }
    }
}

impl MoveSource for ForcedMoves {
    fn draw(&mut self, _p_plus: f64, _p_zero: f64) -> i64 {
        let v = self.moves.get(self.next).copied().unwrap_or(0);
        self.next += 1;
        v
    }
}

/// Extra rules for one branch of an entangled pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchCoupling<S> {
    /// Multiplicity of the lattice-boson creation (2 for a pair).
    pub n_r: i64,
    /// Shared hidden phase.
    pub phi: S,
    /// Phase difference between the two slits seen by this branch.
    pub eps_branch: S,
    /// Slit separation.
    pub delta: S,
}

/// Everything besides the lattice that shapes an iteration.
#[derive(Debug, Clone)]
pub struct Dynamics<'a, S> {
    pub field: &'a ForceField,
    pub constraint: Option<&'a Constraint>,
    pub coupling: Option<BranchCoupling<S>>,
}

impl<'a, S> Dynamics<'a, S> {
    pub fn free(field: &'a ForceField) -> Self {
        Dynamics {
            field,
            constraint: None,
            coupling: None,
        }
    }
}

/// What happened during one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub reset: Option<PairLabel>,
    pub wall_hit: bool,
}

/// Outcome of one emission.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionRecord<S> {
    pub x: Node,
    pub vq: Vec<S>,
    pub action: u64,
    pub resets: u64,
    pub wall_hits: u64,
}

fn clamp_unit<S: Scalar>(v: S) -> S {
    if v > S::one() {
        S::one()
    } else if v < -S::one() {
        -S::one()
    } else {
        v
    }
}

/// Mirror a position that stepped past a box wall back inside `[-a, a]`.
pub(crate) fn fold_into_box(x: i64, a: i64) -> i64 {
    if x > a {
        2 * a - x
    } else if x < -a {
        -2 * a - x
    } else {
        x
    }
}

/// Apply a wall hit at the current node, if any. Returns whether it fired.
fn wall<S: Scalar>(p: &mut ParticleState<S>, cand: &mut Node, constraint: Option<&Constraint>) -> Result<bool> {
    match constraint {
        Some(Constraint::Box { a }) => {
            let x = p.x[0];
            let outward = (x >= *a && p.vq[0] > S::zero()) || (x <= -*a && p.vq[0] < S::zero());
            if x.abs() >= *a && outward {
                p.v0[0] = -p.v0[0].clone();
                for (_, b) in p.bosons.iter_mut() {
                    b.momentum = -b.momentum.clone();
                }
                cand[0] = -cand[0];
                return Ok(true);
            }
            Ok(false)
        }
        Some(Constraint::Line { a1, a2, a0 }) => {
            let (a1, a2) = (*a1, *a2);
            let side = a1 * p.x[0] as f64 - a2 * p.x[1] as f64 + a0;
            let normal_speed = a1 * p.vq[0].to_f64() - a2 * p.vq[1].to_f64();
            if side >= 0.0 && normal_speed > 0.0 {
                let vq = [p.vq[0].to_f64(), p.vq[1].to_f64()];
                let k = barrier_kick_2d(vq, [cand[0], cand[1]], a1, a2)?;
                let sum = p.boson_sum();
                for d in 0..2 {
                    let target = S::from_f64(vq[d] + k.f[d]);
                    p.v0[d] = target + p.rho[d].clone() * sum.clone();
                }
                cand[0] = k.span[0];
                cand[1] = k.span[1];
                return Ok(true);
            }
            Ok(false)
        }
        Some(c @ (Constraint::Ring { .. } | Constraint::Sphere { .. })) => Err(Error::Unsupported(format!(
            "constraint {c:?} is simulated through the expected-value code"
        ))),
        None => Ok(false),
    }
}

fn recompute_vq<S: Scalar>(p: &mut ParticleState<S>, coupling: Option<&BranchCoupling<S>>) {
    let sum = p.boson_sum();
    if let Some(c) = coupling {
        let shift = wrap(&(sum - (c.eps_branch.clone() - c.phi.clone()) / c.delta.clone()));
        p.vq[0] = p.v0[0].clone() - shift;
        return;
    }
    if p.dims == 1 {
        p.vq[0] = p.v0[0].clone() - sum;
    } else {
        for d in 0..p.dims {
            p.vq[d] = wrap(&(p.v0[d].clone() - p.rho[d].clone() * sum.clone()));
        }
    }
}

/// One iteration of the full model.
pub fn advance_particle<S: Scalar, M: MoveSource>(
    p: &mut ParticleState<S>,
    lattice: &mut LatticeStore<S>,
    dynamics: &Dynamics<'_, S>,
    mover: &mut M,
) -> Result<StepReport> {
    let dims = p.dims;

    // (1) sample the step
    let mut v = [0i64; MAX_DIMS];
    for d in 0..dims {
        let prop = clamp_unit(p.vq[d].clone() + p.vf[d].clone());
        let (pp, pz, _) = step_probabilities(&prop)?;
        v[d] = mover.draw(pp.to_f64(), pz.to_f64());
    }

    // (2) move
    for d in 0..dims {
        p.x[d] += v[d];
        p.action += v[d].unsigned_abs();
    }
    if let Some(Constraint::Box { a }) = dynamics.constraint {
        p.x[0] = fold_into_box(p.x[0], *a);
    }
    p.t += 1;

    // (3) candidate span, wall rule
    let mut cand = p.span;
    for d in 0..dims {
        cand[d] += v[d];
    }
    let wall_hit = wall(p, &mut cand, dynamics.constraint)?;

    // (4) reset condition
    let (node, t) = (p.x, p.t);
    let cap = lattice.boson_cap();
    let cell = lattice.get_mut(&node, t);
    let reset = reset_condition(&cand, cell.as_deref());
    let mut created = false;

    // (5) interchange and boson creation, or decay
    let mut label_out = None;
    match cell {
        Some(cell) if reset => {
            let mut i = [0i64; MAX_DIMS];
            let mut j = [0i64; MAX_DIMS];
            for d in 0..dims {
                i[d] = node[d] - cand[d];
                j[d] = node[d] - cell.trace[d];
            }
            let label = (i, j);
            let orient = pair_orientation(&i, &j);
            if orient == 0 {
                return Err(Error::Inconsistent("reset with zero path difference".into()));
            }
            let eps = S::from_int(orient) * (p.phase.clone() - cell.phase_trace.clone());
            let mut proj = S::zero();
            let mut weight = S::zero();
            for d in 0..dims {
                let delta = S::from_int((i[d] - j[d]).abs());
                proj = proj + delta.clone() * p.vq[d].clone();
                weight = weight + p.rho[d].clone() * delta;
            }
            let (n_r, phi) = match &dynamics.coupling {
                Some(c) => (S::from_int(c.n_r), c.phi.clone()),
                None => (S::one(), S::zero()),
            };
            let omega_bar = wrap(&(n_r.clone() * (proj - eps + phi)));

            let mut displaced = None;
            cell.bosons.retain_mut(|(l, b)| {
                if *l == label {
                    displaced = Some(b.omega.clone());
                    false
                } else {
                    lb_decay(b);
                    true
                }
            });
            if cell.bosons.len() + 1 > cap {
                return Err(Error::BosonTableOverflow {
                    size: cell.bosons.len() + 1,
                    cap,
                });
            }
            cell.bosons.push((
                label,
                LatticeBoson {
                    omega: omega_bar.clone(),
                    omega_bar,
                    kappa: 0,
                },
            ));
            let pb = displaced.unwrap_or_else(S::zero) / (n_r * weight);

            let mut found = false;
            for (l, b) in p.bosons.iter_mut() {
                if *l == label {
                    *b = ParticleBoson {
                        momentum: pb.clone(),
                        k: 0,
                    };
                    found = true;
                } else {
                    pb_decay(b);
                }
            }
            if !found {
                p.bosons.push((label, ParticleBoson { momentum: pb, k: 0 }));
            }

            p.span = cell.trace;
            cell.trace = cand;
            std::mem::swap(&mut p.phase, &mut cell.phase_trace);
            created = true;
            label_out = Some(label);
        }
        Some(cell) => {
            for (_, b) in cell.bosons.iter_mut() {
                lb_decay(b);
            }
            for (_, b) in p.bosons.iter_mut() {
                pb_decay(b);
            }
            p.span = cand;
        }
        None => {
            for (_, b) in p.bosons.iter_mut() {
                pb_decay(b);
            }
            p.span = cand;
            lattice.insert(node, t, LatticeCell::new(cand, p.phase.clone()))?;
        }
    }
    if created {
        lattice.note_created();
    }

    // (6) external boson capture
    let f = dynamics.field.at(&p.x, p.t, dims);
    for d in 0..dims {
        if f[d] != 0.0 {
            p.vf[d] = p.vf[d].clone() + S::from_f64(f[d]);
        }
    }

    // (7) quantum momentum
    recompute_vq(p, dynamics.coupling.as_ref());

    Ok(StepReport {
        reset: label_out,
        wall_hit,
    })
}

/// Run one emission for `n_t` iterations. `observe` sees the particle after
/// every iteration.
pub fn run_emission<S: Scalar, M: MoveSource>(
    mut p: ParticleState<S>,
    lattice: &mut LatticeStore<S>,
    dynamics: &Dynamics<'_, S>,
    mover: &mut M,
    n_t: u64,
    mut observe: impl FnMut(&ParticleState<S>, &StepReport),
) -> Result<EmissionRecord<S>> {
    recompute_vq(&mut p, dynamics.coupling.as_ref());
    let mut resets = 0;
    let mut wall_hits = 0;
    while p.t < n_t {
        let r = advance_particle(&mut p, lattice, dynamics, mover)?;
        resets += r.reset.is_some() as u64;
        wall_hits += r.wall_hit as u64;
        debug_assert!(p.x.iter().zip(p.x0.iter()).all(|(a, b)| (a - b).unsigned_abs() <= p.t));
        observe(&p, &r);
    }
    Ok(EmissionRecord {
        x: p.x,
        vq: p.vq,
        action: p.action,
        resets,
        wall_hits,
    })
}
