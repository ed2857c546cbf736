//! The metric route: adjoints, Laplacians, the harmonic tower `H_1 ⊇ H_2 ⊇ …`,
//! Neumann-type solvers, 3-space decompositions and rank scans.

mod laplacian;
mod metric;
mod neumann;
mod scan;
mod tower;

pub use laplacian::{
    del_laplacian, delbar_laplacian, laplacian_h, tilde_laplacian_2_h, tilde_laplacian_r_h,
};
pub use metric::{HermitianComplex, MetricData};
pub use neumann::{neumann_tower, three_space_decomposition, NeumannSolution, ThreeSpace};
pub use scan::{family_scan, favb_scan, FamilyRow, FamilyScanReport, FavbPoint, FavbScanReport};
pub use tower::HarmonicTower;
