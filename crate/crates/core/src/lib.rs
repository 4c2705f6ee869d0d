//! Invariant multi-sets for discrete-time linear switching systems whose
//! switching is constrained by a labeled graph.
//!
//! * [`geometry`]: polytopes, LPs, Minkowski sums, pre-images.
//! * [`automaton`]: labeled graphs, walks, unavoidable sets, reductions, lifts.
//! * [`system`]: the switched system value and its reachability maps.
//! * [`engine`]: minimal, maximal and safe sets, certificates, recovery maps.

pub mod automaton;
pub mod engine;
pub mod exec;
pub mod geometry;
pub mod system;
