//! Correlation quantifiers that need a closed form or an optimization:
//! entanglement entropy, concurrence, entanglement of formation, classical
//! correlation and the tripartite entropy decomposition built from them.

pub mod classical;
pub mod entanglement;
pub mod formation;
pub mod koashi;
pub mod optimize;

pub use classical::{classical_correlation, measured_conditional_entropy, Side};
pub use entanglement::{
    binary_entropy, concurrence, entanglement_entropy, entanglement_of_formation_two_qubit,
    formation_from_concurrence, jaeger_measure, spin_flip, spin_flip_overlap,
};
pub use formation::entanglement_of_formation;
pub use koashi::{koashi_winter_residual, koashi_winter_terms, KoashiTerms};
pub use optimize::{MeasurementClass, OptResult, OptimizerConfig};
