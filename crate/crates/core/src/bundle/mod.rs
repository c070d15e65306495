//! Geometry of the reduced bundle `P` inside the orthonormal frame bundle.
//!
//! A tangent vector of `SO(M)` at a frame over `x` is written `X^h + α*`
//! with `X ∈ T_xM` and `α ∈ so(T_xM)`, and the metric is
//! `g(X, Y) + B(α, β)`. Tangent vectors of `P` are `X^{h′} + β*` with
//! `X^{h′} = X^h + (ξ_X)*` and `β ∈ g`; normal vectors are spanned by
//! `α⁺ = α* + (ξ·α)^h`, `α ∈ m`.

pub mod connection;
pub mod curvature;
pub mod extrinsic;

use serde::Serialize;

use crate::geometry::PointGeometry;
use crate::la::{b_pair, Mat, Vector};

pub use connection::{nabla_p, nabla_so};
pub use curvature::{curvature_p, CurvatureSummary};
pub use extrinsic::{harmonicity_residuals, minimality_residual, second_fundamental_form, HarmonicityResiduals};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    Generic,
    Tangent,
    Normal,
}

/// `X^h + α*`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBundleVector {
    pub horizontal: Vector,
    pub vertical: Mat,
    pub flavor: Flavor,
}

impl FrameBundleVector {
    pub fn generic(horizontal: Vector, vertical: Mat) -> Self {
        Self { horizontal, vertical, flavor: Flavor::Generic }
    }

    /// `X^h`.
    pub fn horizontal_lift(x: &Vector) -> Self {
        let n = x.len();
        Self::generic(x.clone(), Mat::zeros(n, n))
    }

    /// `α*`.
    pub fn vertical_lift(alpha: &Mat) -> Self {
        Self::generic(Vector::zeros(alpha.nrows()), alpha.clone())
    }

    /// `X^{h′} + β*`.
    pub fn tangent(geo: &PointGeometry, x: &Vector, beta: &Mat) -> Self {
        Self { horizontal: x.clone(), vertical: geo.xi_at(x) + beta, flavor: Flavor::Tangent }
    }

    /// `α⁺` for `α ∈ m`.
    pub fn plus(geo: &PointGeometry, alpha: &Mat) -> Self {
        Self { horizontal: geo.xi_dot(alpha), vertical: alpha.clone(), flavor: Flavor::Normal }
    }

    pub fn inner(&self, geo: &PointGeometry, other: &Self) -> f64 {
        geo.g_inner(&self.horizontal, &other.horizontal) + b_pair(&self.vertical, &other.vertical)
    }

    pub fn add(&self, other: &Self) -> Self {
        let flavor = if self.flavor == other.flavor { self.flavor } else { Flavor::Generic };
        Self { horizontal: &self.horizontal + &other.horizontal, vertical: &self.vertical + &other.vertical, flavor }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let flavor = if self.flavor == other.flavor { self.flavor } else { Flavor::Generic };
        Self { horizontal: &self.horizontal - &other.horizontal, vertical: &self.vertical - &other.vertical, flavor }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { horizontal: &self.horizontal * s, vertical: &self.vertical * s, flavor: self.flavor }
    }

    pub fn max_abs(&self) -> f64 {
        self.horizontal.amax().max(self.vertical.amax())
    }

    /// Reads a `P`-tangent vector back as `(X, β)` with `β = α − ξ_X`.
    pub fn tangent_parts(&self, geo: &PointGeometry) -> TangentP {
        TangentP { x: self.horizontal.clone(), beta: &self.vertical - geo.xi_at(&self.horizontal) }
    }
}

/// `X^{h′} + β*` stored by its `(X, β)` coordinates; `β ∈ g`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentP {
    pub x: Vector,
    pub beta: Mat,
}

impl TangentP {
    pub fn new(x: Vector, beta: Mat) -> Self {
        Self { x, beta }
    }

    pub fn horizontal(x: &Vector) -> Self {
        let n = x.len();
        Self { x: x.clone(), beta: Mat::zeros(n, n) }
    }

    pub fn vertical(beta: &Mat) -> Self {
        Self { x: Vector::zeros(beta.nrows()), beta: beta.clone() }
    }

    pub fn zeros(n: usize) -> Self {
        Self { x: Vector::zeros(n), beta: Mat::zeros(n, n) }
    }

    /// Induced metric `g̃(X, Y) + B(β, γ)`.
    pub fn inner(&self, geo: &PointGeometry, other: &Self) -> f64 {
        geo.gt_inner(&self.x, &other.x) + b_pair(&self.beta, &other.beta)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { x: &self.x + &other.x, beta: &self.beta + &other.beta }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { x: &self.x - &other.x, beta: &self.beta - &other.beta }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { x: &self.x * s, beta: &self.beta * s }
    }

    pub fn max_abs(&self) -> f64 {
        self.x.amax().max(self.beta.amax())
    }

    pub fn to_frame_vector(&self, geo: &PointGeometry) -> FrameBundleVector {
        FrameBundleVector::tangent(geo, &self.x, &self.beta)
    }
}

/// Orthonormal basis of `T P`: the lifted g̃-frame followed by the
/// B-orthonormal basis of `g`.
pub fn tangent_basis(geo: &PointGeometry) -> Vec<TangentP> {
    geo.tilde_frame
        .iter()
        .map(TangentP::horizontal)
        .chain(geo.g_basis.iter().map(TangentP::vertical))
        .collect()
}

/// Orthogonal projection onto `T P`:
/// `X^h ↦ (L⁻¹X)^{h′}`, `α* ↦ α_g* − (L⁻¹(ξ·α_m))^{h′}`.
pub fn project_tangent(geo: &PointGeometry, v: &FrameBundleVector) -> FrameBundleVector {
    let alpha_m = geo.m_part(&v.vertical);
    let y = &geo.l_inv * (&v.horizontal - geo.xi_dot(&alpha_m));
    FrameBundleVector::tangent(geo, &y, &geo.g_part(&v.vertical))
}

/// Orthogonal projection onto the normal bundle:
/// `X^h ↦ −(ξ_{L⁻¹X})* − (ξ·ξ_{L⁻¹X})^h`,
/// `α* ↦ α_m* + (ξ_{L⁻¹(ξ·α_m)})* + (L⁻¹(ξ·α_m))^h`.
pub fn project_normal(geo: &PointGeometry, v: &FrameBundleVector) -> FrameBundleVector {
    let lx = &geo.l_inv * &v.horizontal;
    let xi_lx = geo.xi_at(&lx);
    let alpha_m = geo.m_part(&v.vertical);
    let w = &geo.l_inv * geo.xi_dot(&alpha_m);
    let horizontal = -geo.xi_dot(&xi_lx) + &w;
    let vertical = -xi_lx + alpha_m + geo.xi_at(&w);
    FrameBundleVector { horizontal, vertical, flavor: Flavor::Normal }
}
