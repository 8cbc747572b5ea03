//! Exact and fixed-precision arithmetic kernels.

pub mod exact;
pub mod fixed;
pub mod rational;
pub mod rng;
pub mod surd;
pub mod word;

pub use fixed::{dist_nearest_int, FixedPoint, DEFAULT_SCALE_BITS, MIN_SCALE_BITS};
pub use rng::{sample_torus_point, RngStream, RNG_ALGORITHM_ID};
pub use surd::{surd_eval, FracFloor, QuadraticSurd};
pub use word::TorusWord;
