//! The full microscopic model: particles walking on a sparse, stateful
//! lattice that remembers the last visitor of every `(node, lifetime)` cell.

mod action;
mod engine;
mod rules;
mod store;

pub use action::{action_pmf, expected_action, particle_action};
pub(crate) use engine::fold_into_box;
pub use engine::{
    advance_particle, run_emission, BranchCoupling, Dynamics, EmissionRecord, ForcedMoves, MoveSource, RandomMoves,
    StepReport,
};
pub use rules::{lb_decay, pb_decay, reset_condition, step_probabilities};
pub use store::{LatticeBoson, LatticeCell, LatticeStore, ParticleBoson, ParticleState};

/// Maximum supported dimensionality.
pub const MAX_DIMS: usize = 3;

/// Integer lattice coordinates; unused trailing entries stay zero.
pub type Node = [i64; MAX_DIMS];

/// Ordered source-pair label `(i, j)`: image source of the visitor and of the
/// previous visitor, both as lattice nodes.
pub type PairLabel = (Node, Node);

/// Node from a 1-d coordinate.
pub fn node1(x: i64) -> Node {
    [x, 0, 0]
}

/// Orientation of a pair: sign of the first nonzero component of `i - j`.
pub fn pair_orientation(i: &Node, j: &Node) -> i64 {
    for d in 0..MAX_DIMS {
        let c = i[d] - j[d];
        if c != 0 {
            return c.signum();
        }
    }
    0
}
