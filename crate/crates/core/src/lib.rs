pub mod entropy;
pub mod error;
pub mod io;
pub mod landauer;
pub mod linalg;
pub mod maxent;
pub mod operator;
pub mod passivity;
pub mod random;
pub mod state;
pub mod thermal_ops;

pub use entropy::{entropy, mutual_information, relative_entropy};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use operator::{tensor, ChargeSet, HermitianOperator, Tensor};
pub use state::{commutator_norm, expectation, gge_state, partial_trace, DensityMatrix};
