//! Fragment encoding channels, Petz recovery and mutual-information
//! plateaus for one-to-all premeasurement models.

pub mod channels;
pub mod density;
pub mod error;
pub mod experiments;
pub mod hilbert;
pub mod infotheory;
pub mod linalg;
pub mod model;
pub mod petz;
pub mod scalar;

pub use channels::{Compressed, QuantumChannel};
pub use density::DensityMatrix;
pub use error::{Error, Result};
pub use hilbert::{CompositeSpace, Fragment};
pub use infotheory::{LogBase, RelativeEntropy};
pub use linalg::{ComplexMatrix, HermitianEigen};
pub use model::{BlochState, BranchRecord, EnvironmentSpec, SystemObservable};
pub use petz::{PetzMap, Recovery};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;
pub type ComplexMatrix64 = ComplexMatrix<f64>;
pub type ComplexMatrix32 = ComplexMatrix<f32>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type DensityMatrix32 = DensityMatrix<f32>;
