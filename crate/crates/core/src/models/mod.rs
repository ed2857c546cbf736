//! Exterior-algebra models built from structure equations `dφ^i = …`.

mod catalog;
mod exterior;
mod spec;

pub use catalog::{catalog, catalog_names, CatalogEntry};
pub use exterior::{monomials, wedge_sign, Conjugation, ExteriorModel};
pub use spec::{FamilySpec, FamilyTerm, Gen, Poly, StructureSpec, Term};
