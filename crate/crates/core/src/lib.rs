//! Scheduling of multi-depot drone fleets that both deliver and collect parcels.
//!
//! Solving runs in two interleaved phases under a simulated-annealing schedule: tasks are
//! (re)allocated to depots by a variable neighbourhood descent, and each depot's task
//! sequence is turned into drone sorties, which a sortie-merging local search then
//! tightens.

pub mod allocation;
pub mod bench;
pub mod instances;
pub mod model;
pub mod routing;
pub mod solver;
