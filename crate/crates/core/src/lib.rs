//! Pointwise geometry of almost-product structures on Riemannian manifolds
//! and of the induced metric on their reduced orthonormal frame bundle.

pub mod bundle;
pub mod diffgeo;
pub mod error;
pub mod geometry;
pub mod gstructure;
pub mod jet;
pub mod la;
pub mod report;
pub mod scenarios;
pub mod transfer;

pub use error::{GeomError, Result};
pub use geometry::PointGeometry;
