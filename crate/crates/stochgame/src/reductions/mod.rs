//! Constructions mapping games and combinatorial objects to games.

pub mod discount;
pub mod gadgets;
pub mod hamiltonian;
pub mod ossg;

pub use discount::{average_to_discounted, discounted_to_absorbing, mixing_time, AverageAdvice, AbsorbingMap};
pub use gadgets::{
    circuit_assignment, gate_interval, gcircuit_build, CircuitAssignment, CircuitSpec, CompiledGate, GadgetMap, GadgetParams,
    Gate, GateCheck, GateKind,
};
pub use hamiltonian::{hamiltonian_delta, hamiltonian_game_build, induced_subgraph, DirectedGraph, HamiltonianMap};
pub use ossg::{simsg_to_ossg, CopyMap};
