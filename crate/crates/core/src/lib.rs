//! Platonic dynamical decoupling: point groups, Cayley-graph sequences, spin symmetrization
//! and exact propagator simulation.

pub mod cayley;
pub mod error;
pub mod io;
pub mod majorana;
pub mod multispin;
pub mod rng;
pub mod rotations;
pub mod simulate;
pub mod spin_algebra;
pub mod symmetrize;

pub use cayley::{CayleyGraph, DcgPath, SequenceWord};
pub use error::{Error, Result};
pub use majorana::{Constellation, GroupReport};
pub use multispin::{InteractionTensor, SpinEnsemble};
pub use rotations::{PointGroup, Rotation};
pub use simulate::{ErrorModel, Pulse, PulseSequence, ScanConfig, Step};
pub use spin_algebra::{CMat, MultipoleVector, Spin, SpinOperator};
pub use symmetrize::SymmetrizedResult;
