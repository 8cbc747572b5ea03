//! Continued fractions, the irrational shift `γ`, and non-Liouville witnesses.

pub mod cf;
pub mod shift;
pub mod witness;

pub use cf::{cf_expand, make_liouville, CFExpansion, Period};
pub use shift::IrrationalShift;
pub use witness::{
    fit_witness, fit_witness_with, vanish_threshold, FitReport, NonLiouvilleWitness, PsiBound,
    WitnessFailure, WitnessFit, WitnessRange, WitnessSummary,
};
