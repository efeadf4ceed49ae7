//! Explicit isogenies between Jacobians of variable-separated curves
//! `P(y) = f(x)`, computed from a correspondence factor `A(x1, x2)`.

pub mod field;
pub mod rational;
pub mod poly;
pub mod geometry;
pub mod diffrep;
pub mod lattice;
pub mod catalog;
pub mod verify;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] field::FieldError),
    #[error(transparent)]
    Poly(#[from] poly::PolyError),
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Kernel(#[from] lattice::KernelError),
    #[error(transparent)]
    Catalog(#[from] catalog::CatalogError),
}

pub type Result<T> = std::result::Result<T, Error>;
