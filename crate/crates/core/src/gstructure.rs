//! Almost-product structure given by a g-orthogonal projector `p` onto `E`.
//!
//! Skew endomorphisms split as `A = A_g + A_m` with `A_g = pAp + qAq`
//! (block diagonal, preserves `E` and `F`) and `A_m = pAq + qAp` (exchanges
//! them), `q = id − p`. The intrinsic torsion is `ξ_X = (q − p)∇_X p`, the
//! minimal connection is `∇′ = ∇ − ξ`, and its curvature restricted to `g`
//! is `R′(X,Y) = R(X,Y)_g − [ξ_X, ξ_Y]_g`.

use crate::diffgeo::backend::{taylor, DiffSettings};
use crate::diffgeo::chart::{ChartPoint, SmoothMap};
use crate::diffgeo::connection::{christoffel_jets, invert_metric};
use crate::diffgeo::tensor::{covariant_derivative, TensorField};
use crate::error::{GeomError, Result};
use crate::jet::JetMatrix;
use crate::la::{b_pair, commutator, endo_norm, skewness_defect, Mat, Vector};

/// Field of g-orthogonal projectors of constant rank.
#[derive(Debug, Clone)]
pub struct ProjectorField {
    pub map: SmoothMap,
    pub rank: usize,
}

impl ProjectorField {
    pub fn new(map: SmoothMap, rank: usize) -> Self {
        Self { map, rank }
    }

    /// `(|p² − p|, g-symmetry defect, |tr p − m|)` at a point.
    pub fn invariant_defects(&self, pt: &ChartPoint) -> [f64; 3] {
        let p = self.map.value(pt.coords());
        let g = pt.metric();
        let idem = (&p * &p - &p).amax();
        let gp = &g * &p;
        let sym = (&gp - gp.transpose()).amax();
        let tr = (p.trace() - self.rank as f64).abs();
        [idem, sym, tr]
    }
}

/// Splits endomorphisms into their `g` and `m` parts.
pub trait Splitter {
    fn g_part(&self, a: &Mat) -> Mat;

    fn m_part(&self, a: &Mat) -> Mat {
        a - self.g_part(a)
    }

    fn split(&self, a: &Mat) -> (Mat, Mat) {
        let ag = self.g_part(a);
        let am = a - &ag;
        (ag, am)
    }
}

/// The almost-product splitter at one point.
#[derive(Debug, Clone)]
pub struct ProjectorSplit {
    pub p: Mat,
    pub q: Mat,
}

impl ProjectorSplit {
    pub fn new(p: Mat) -> Self {
        let q = Mat::identity(p.nrows(), p.nrows()) - &p;
        Self { p, q }
    }
}

impl Splitter for ProjectorSplit {
    fn g_part(&self, a: &Mat) -> Mat {
        &self.p * a * &self.p + &self.q * a * &self.q
    }

    fn m_part(&self, a: &Mat) -> Mat {
        &self.p * a * &self.q + &self.q * a * &self.p
    }
}

/// Jet version of the `g`-part.
pub fn g_part_jet(a: &JetMatrix, p: &JetMatrix) -> JetMatrix {
    let n = p.nrows();
    let q = JetMatrix::identity(n).sub(p);
    p.mul(a).mul(p).add(&q.mul(a).mul(&q))
}

/// Jet version of the `m`-part.
pub fn m_part_jet(a: &JetMatrix, p: &JetMatrix) -> JetMatrix {
    let n = p.nrows();
    let q = JetMatrix::identity(n).sub(p);
    p.mul(a).mul(&q).add(&q.mul(a).mul(p))
}

/// Skew endomorphism of a tangent space.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewEndomorphism {
    pub matrix: Mat,
}

impl SkewEndomorphism {
    /// Wraps `matrix` after checking g-skewness to `tol`.
    pub fn new(matrix: Mat, g: &Mat, ginv: &Mat, tol: f64) -> Result<Self> {
        let residual = skewness_defect(&matrix, g, ginv);
        if residual > tol {
            return Err(GeomError::NotSkew { residual });
        }
        Ok(Self { matrix })
    }

    pub fn b(&self, other: &SkewEndomorphism) -> f64 {
        b_pair(&self.matrix, &other.matrix)
    }
}

/// `(A_g, A_m)` for a skew endomorphism.
pub fn split_skew(a: &SkewEndomorphism, p: &Mat) -> (SkewEndomorphism, SkewEndomorphism) {
    let (ag, am) = ProjectorSplit::new(p.clone()).split(&a.matrix);
    (SkewEndomorphism { matrix: ag }, SkewEndomorphism { matrix: am })
}

/// Intrinsic torsion at a point: `xi[i]` is the endomorphism `ξ_{∂_i}`.
#[derive(Debug, Clone)]
pub struct TorsionTensor {
    pub xi: Vec<Mat>,
}

impl TorsionTensor {
    /// `ξ^k_{ij}` with `ξ_{∂_i} ∂_j = ξ^k_{ij} ∂_k`.
    pub fn component(&self, k: usize, i: usize, j: usize) -> f64 {
        self.xi[i][(k, j)]
    }

    pub fn at(&self, x: &Vector) -> Mat {
        let n = self.xi.len();
        let mut out = Mat::zeros(n, n);
        for (i, xi) in self.xi.iter().enumerate() {
            if x[i] != 0.0 {
                out += xi * x[i];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.xi.iter().map(|m| m.amax()).fold(0.0, f64::max)
    }
}

/// `∇_a p = ∂_a p + [Γ_a, p]`.
pub fn nabla_projector_jets(p: &JetMatrix, gamma: &[JetMatrix]) -> Vec<JetMatrix> {
    gamma.iter().enumerate().map(|(a, ga)| p.diff(a).add(&ga.commutator(p))).collect()
}

/// `ξ_a = (q − p) ∇_a p`, written as `q(∇_a p)p − p(∇_a p)q` so that it
/// stays in `m` when `∇p` carries finite-difference error.
pub fn torsion_jets(p: &JetMatrix, nabla_p: &[JetMatrix]) -> Vec<JetMatrix> {
    let n = p.nrows();
    let q = JetMatrix::identity(n).sub(p);
    nabla_p.iter().map(|np| q.mul(np).mul(p).sub(&p.mul(np).mul(&q))).collect()
}

/// Coefficients of `∇′_X Y = p∇_X(pY) + q∇_X(qY)`:
/// `Γ′_a = p∂_a p − q∂_a p + (Γ_a)_g`.
pub fn minimal_connection_jets(p: &JetMatrix, gamma: &[JetMatrix]) -> Vec<JetMatrix> {
    let n = p.nrows();
    let q_minus_p = JetMatrix::identity(n).sub(&p.scale_f(2.0));
    gamma
        .iter()
        .enumerate()
        .map(|(a, ga)| {
            let dp = p.diff(a);
            q_minus_p.mul(&dp).scale_f(-1.0).add(&g_part_jet(ga, p))
        })
        .collect()
}

/// Intrinsic torsion of `projector` at `pt`.
pub fn intrinsic_torsion(pt: &ChartPoint, projector: &ProjectorField, settings: &DiffSettings) -> Result<TorsionTensor> {
    let g = taylor(&pt.chart().metric, pt, 1, settings)?;
    let ginv = invert_metric(&g, pt.coords())?;
    let gamma = christoffel_jets(&g, &ginv);
    let p = taylor(&projector.map, pt, 1, settings)?;
    let np = nabla_projector_jets(&p, &gamma);
    let xi = torsion_jets(&p.truncate_to(0), &np);
    Ok(TorsionTensor { xi: xi.iter().map(|m| m.value()).collect() })
}

/// `∇′_X α = ∇_X α − [ξ_X, α]` for a `(1,1)` field `α` at `pt`.
pub fn minimal_connection_derivative(
    alpha: &TensorField,
    x: &Vector,
    pt: &ChartPoint,
    projector: &ProjectorField,
    settings: &DiffSettings,
) -> Result<Mat> {
    let n = pt.dim();
    if alpha.contravariant != 1 || alpha.covariant != 1 {
        return Err(GeomError::DimensionMismatch { expected: 2, got: alpha.rank() });
    }
    let d = covariant_derivative(alpha, pt, settings)?;
    let mut nabla = Mat::zeros(n, n);
    for k in 0..n {
        for j in 0..n {
            nabla[(k, j)] = (0..n).map(|a| d[(k * n + j) * n + a] * x[a]).sum();
        }
    }
    let a_val = alpha.components.value(pt.coords());
    let a_mat = Mat::from_fn(n, n, |k, j| a_val[(k * n + j, 0)]);
    let xi = intrinsic_torsion(pt, projector, settings)?.at(x);
    Ok(nabla - commutator(&xi, &a_mat))
}

/// `R′(X, Y) = R(X,Y)_g − [ξ_X, ξ_Y]_g`.
pub fn structure_curvature(
    pt: &ChartPoint,
    projector: &ProjectorField,
    x: &Vector,
    y: &Vector,
    settings: &DiffSettings,
) -> Result<Mat> {
    let r = crate::diffgeo::connection::riemann(pt, settings)?;
    let xi = intrinsic_torsion(pt, projector, settings)?;
    let split = ProjectorSplit::new(projector.map.value(pt.coords()));
    let (xx, xy) = (xi.at(x), xi.at(y));
    Ok(split.g_part(&r.endo(x, y)) - split.g_part(&commutator(&xx, &xy)))
}

/// Size of the part of `a` outside `g` (for membership tests).
pub fn m_defect(a: &Mat, split: &ProjectorSplit, g: &Mat, ginv: &Mat) -> f64 {
    endo_norm(&split.m_part(a), g, ginv)
}

/// Size of the part of `a` outside `m`.
pub fn g_defect(a: &Mat, split: &ProjectorSplit, g: &Mat, ginv: &Mat) -> f64 {
    endo_norm(&split.g_part(a), g, ginv)
}
