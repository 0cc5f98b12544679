use std::collections::HashMap;

use super::{Node, PairLabel, MAX_DIMS};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Momentum record attached to a particle after a reset event.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleBoson<S> {
    pub momentum: S,
    pub k: u64,
}

/// Momentum record stored at a lattice cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBoson<S> {
    pub omega: S,
    pub omega_bar: S,
    pub kappa: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeCell<S> {
    pub trace: Node,
    pub phase_trace: S,
    pub bosons: Vec<(PairLabel, LatticeBoson<S>)>,
}

impl<S: Scalar> LatticeCell<S> {
    pub fn new(trace: Node, phase_trace: S) -> Self {
        LatticeCell {
            trace,
            phase_trace,
            bosons: Vec::new(),
        }
    }

    pub fn boson(&self, label: &PairLabel) -> Option<&LatticeBoson<S>> {
        self.bosons.iter().find(|(l, _)| l == label).map(|(_, b)| b)
    }
}

/// Sparse store of visited cells keyed by `(node, lifetime)`.
#[derive(Debug, Clone)]
pub struct LatticeStore<S> {
    cells: HashMap<(Node, u64), LatticeCell<S>>,
    cell_cap: usize,
    boson_cap: usize,
    bosons_created: u64,
}

impl<S: Scalar> LatticeStore<S> {
    /// `cell_cap` bounds the number of stored cells, `boson_cap` the number of
    /// lattice bosons per cell.
    pub fn new(cell_cap: usize, boson_cap: usize) -> Self {
        LatticeStore {
            cells: HashMap::new(),
            cell_cap,
            boson_cap,
            bosons_created: 0,
        }
    }

    pub fn get(&self, node: &Node, t: u64) -> Option<&LatticeCell<S>> {
        self.cells.get(&(*node, t))
    }

    pub fn get_mut(&mut self, node: &Node, t: u64) -> Option<&mut LatticeCell<S>> {
        self.cells.get_mut(&(*node, t))
    }

    /// Insert or overwrite a cell. Used by the engine on first visits and by
    /// callers that seed a pre-trained lattice.
    pub fn insert(&mut self, node: Node, t: u64, cell: LatticeCell<S>) -> Result<()> {
        if cell.bosons.len() > self.boson_cap {
            return Err(Error::BosonTableOverflow {
                size: cell.bosons.len(),
                cap: self.boson_cap,
            });
        }
        if !self.cells.contains_key(&(node, t)) && self.cells.len() >= self.cell_cap {
            return Err(Error::LatticeOverflow {
                cells: self.cells.len() + 1,
                cap: self.cell_cap,
            });
        }
        self.cells.insert((node, t), cell);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn boson_cap(&self) -> usize {
        self.boson_cap
    }

    /// Lattice bosons created since construction.
    pub fn bosons_created(&self) -> u64 {
        self.bosons_created
    }

    pub(crate) fn note_created(&mut self) {
        self.bosons_created += 1;
    }

    pub fn total_bosons(&self) -> usize {
        self.cells.values().map(|c| c.bosons.len()).sum()
    }
}

/// State of one particle in flight.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState<S> {
    pub dims: usize,
    pub t: u64,
    pub x: Node,
    pub x0: Node,
    pub span: Node,
    pub phase: S,
    pub v0: Vec<S>,
    pub vq: Vec<S>,
    pub vf: Vec<S>,
    pub action: u64,
    pub bosons: Vec<(PairLabel, ParticleBoson<S>)>,
    pub rho: Vec<S>,
}

impl<S: Scalar> ParticleState<S> {
    /// Freshly emitted particle at `x0` with source momentum `v0`.
    pub fn emit(x0: Node, v0: Vec<S>, phase: S) -> Self {
        let dims = v0.len();
        assert!((1..=MAX_DIMS).contains(&dims), "dimensionality out of range");
        let rho = vec![S::one() / S::from_int(dims as i64); dims];
        ParticleState {
            dims,
            t: 0,
            x: x0,
            x0,
            span: [0; MAX_DIMS],
            phase,
            vq: v0.clone(),
            v0,
            vf: vec![S::zero(); dims],
            action: 0,
            bosons: Vec::new(),
            rho,
        }
    }

    pub fn boson(&self, label: &PairLabel) -> Option<&ParticleBoson<S>> {
        self.bosons.iter().find(|(l, _)| l == label).map(|(_, b)| b)
    }

    pub fn boson_sum(&self) -> S {
        self.bosons
            .iter()
            .fold(S::zero(), |acc, (_, b)| acc + b.momentum.clone())
    }
}
