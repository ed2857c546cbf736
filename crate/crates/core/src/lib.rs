//! h-deformations of the Frölicher spectral sequence on finite bigraded complexes.
//!
//! Everything numeric is generic over a real scalar `T: Real` (complex entries
//! are `Complex<T>`); the aliases below fix `T = f64` for ordinary use.

pub mod bicomplex;
pub mod error;
pub mod harmonic;
pub mod linalg;
pub mod models;
pub mod sampling;
pub mod scalar;
pub mod sg;
pub mod spectral;

pub use bicomplex::{Bicomplex, Bigrading, CohomologyKind, CohomologySpace, Form};
pub use error::{Error, Result};
pub use models::{catalog, CatalogEntry, ExteriorModel, FamilySpec, StructureSpec};
pub use scalar::{Real, Tolerances};

pub type BicomplexF64 = Bicomplex<f64>;
pub type FormF64 = Form<f64>;
pub type ExteriorModelF64 = ExteriorModel<f64>;
pub type HarmonicTowerF64 = harmonic::HarmonicTower<f64>;
pub type HermitianComplexF64 = harmonic::HermitianComplex<f64>;
pub type HermitianMetricF64 = sg::HermitianMetric<f64>;
pub type PageTableF64 = spectral::PageTable<f64>;

pub type BicomplexF32 = Bicomplex<f32>;
pub type ExteriorModelF32 = ExteriorModel<f32>;
