//! Reconstruction of restriction maps from enhanced double digest data.
//!
//! Two enzymes cut a linear DNA molecule separately; each single-digest
//! fragment is then re-digested with the other enzyme. Given the fragment
//! lengths of both single digests plus the per-fragment cross-digest
//! multisets, this crate recovers every ordering of the fragments that is
//! consistent with the data.
//!
//! The pipeline is:
//!
//! 1. [`instance`]: parse and validate the length data, and label equal-valued
//!    subfragments so they can be told apart.
//! 2. [`digestgraph`]: build the membership graph over all fragments and decide
//!    whether it is a tree whose diameter carries only two-node danglers.
//! 3. [`solver`]: walk the diameter and report all solutions compactly as a
//!    [`solver::SolutionFamily`].
//!
//! [`verifier`] plots candidate orderings on a line and checks them directly;
//! it also holds a brute-force oracle that shares no code with the solver.
//! [`generator`] simulates digests of random molecules, and [`reduction`]
//! builds instances from undirected graphs (Hamiltonian path encoding).

pub mod digestgraph;
pub mod generator;
pub mod instance;
pub mod reduction;
pub mod solver;
pub mod verifier;

pub use digestgraph::{
    build_graph, check_structure, DigestGraph, NodeId, NodeKind, StructureVerdict,
};
pub use instance::{
    label_distinct, label_duplicates, parse_instance, serialize_instance, validate_consistency,
    ConsistencyReport, EddInstance, LabeledInstance, LabeledLength,
};
pub use solver::{solve, solve_labeled, solve_solutions, SolutionFamily, SolveConfig};
pub use verifier::{brute_force_solve, layout, verify_permutation, Solution, SolutionKey};
