//! Chart-based Riemannian calculus.

pub mod backend;
pub mod chart;
pub mod connection;
pub mod frame;
pub mod tensor;

pub use backend::{taylor, Backend, DiffSettings};
pub use chart::{Chart, ChartPoint, DomainBox, MatrixExpr, SmoothMap};
pub use connection::{christoffel, riemann, ChristoffelField, RiemannTensor};
pub use frame::{adapted_frame, adapted_frame_from, AdaptedFrame};
pub use tensor::{covariant_derivative, TensorField};
