//! Transfer tensor `L X = X − ξ·ξ_X`, the metric `g̃(X, Y) = g(X, LY)` and
//! the difference tensor `S = ∇̃ − ∇`.

use crate::error::{GeomError, Result};
use crate::geometry::PointGeometry;
use crate::la::{b_pair, endo_norm, g_inner, min_g_eigenvalue, Mat, Vector};

/// `L` and `g̃` at a point.
#[derive(Debug, Clone)]
pub struct TransferTensor {
    pub l: Mat,
    pub gt: Mat,
}

impl TransferTensor {
    /// Smallest eigenvalue of `L` (it is g-symmetric).
    pub fn min_eigenvalue(&self, g: &Mat) -> f64 {
        min_g_eigenvalue(&self.l, g)
    }

    /// `|g(LX, Y) − g(X, LY)|` maximised over coordinate pairs.
    pub fn symmetry_defect(&self, g: &Mat) -> f64 {
        let gl = g * &self.l;
        (&gl - gl.transpose()).amax()
    }
}

/// `S^k_ij` stored as `s[i][(k, j)]`.
#[derive(Debug, Clone)]
pub struct DifferenceTensor {
    pub s: Vec<Mat>,
}

impl DifferenceTensor {
    pub fn apply(&self, x: &Vector, y: &Vector) -> Vector {
        let n = self.s.len();
        let mut out = Vector::zeros(n);
        for (i, si) in self.s.iter().enumerate() {
            if x[i] != 0.0 {
                out += si * y * x[i];
            }
        }
        out
    }

    pub fn symmetry_defect(&self) -> f64 {
        let n = self.s.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst.max((self.s[i][(k, j)] - self.s[j][(k, i)]).abs());
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.s.iter().map(|m| m.amax()).fold(0.0, f64::max)
    }
}

/// `ξ·α` for `α ∈ m`; rejects `α` whose `g`-part exceeds `tol`.
pub fn xi_dot(geo: &PointGeometry, alpha: &Mat, tol: f64) -> Result<Vector> {
    let residual = endo_norm(&geo.g_part(alpha), &geo.g, &geo.ginv);
    if residual > tol {
        return Err(GeomError::NotInM { residual });
    }
    Ok(geo.xi_dot(alpha))
}

pub fn transfer(geo: &PointGeometry) -> TransferTensor {
    TransferTensor { l: geo.l.clone(), gt: geo.gt.clone() }
}

/// Both sides of `g((∇_X L)Y, Z) = B((∇_Xξ)_Y, ξ_Z) + B((∇_Xξ)_Z, ξ_Y)`.
#[derive(Debug, Clone, Copy)]
pub struct NablaLCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

pub fn nabla_l(geo: &PointGeometry, x: &Vector, y: &Vector, z: &Vector) -> NablaLCheck {
    let n = geo.n;
    let mut nl = Mat::zeros(n, n);
    for a in 0..n {
        if x[a] != 0.0 {
            nl += &geo.nabla_l[a] * x[a];
        }
    }
    let lhs = g_inner(&geo.g, &(nl * y), z);
    let rhs = b_pair(&geo.nabla_xi_at(x, y), &geo.xi_at(z)) + b_pair(&geo.nabla_xi_at(x, z), &geo.xi_at(y));
    NablaLCheck { lhs, rhs, residual: (lhs - rhs).abs() }
}

/// `S` from the torsion formula (already solved when the geometry was built).
pub fn difference_tensor(geo: &PointGeometry) -> DifferenceTensor {
    DifferenceTensor { s: geo.s.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffgeo::DiffSettings;
    use crate::scenarios::{find, sample};

    #[test]
    fn flat_transfer_is_identity() {
        let sc = find("flat4-const").unwrap();
        let pt = &sample(&sc, 1, 3).unwrap()[0];
        let geo = PointGeometry::compute(pt, &sc.projector, &DiffSettings::analytic()).unwrap();
        let t = transfer(&geo);
        assert_eq!(t.l, Mat::identity(4, 4));
        assert_eq!(t.gt, Mat::identity(4, 4));
        assert_eq!(difference_tensor(&geo).max_abs(), 0.0);
    }

    #[test]
    fn reeb_transfer_is_symmetric_and_grows() {
        let sc = find("s3-reeb").unwrap();
        for pt in sample(&sc, 5, 11).unwrap() {
            let geo = PointGeometry::compute(&pt, &sc.projector, &DiffSettings::analytic()).unwrap();
            let t = transfer(&geo);
            assert!(t.symmetry_defect(&geo.g) < 1e-12);
            assert!(t.min_eigenvalue(&geo.g) >= 1.0 - 1e-9);
            assert!(t.gt.determinant() >= geo.g.determinant());
            assert!(difference_tensor(&geo).symmetry_defect() < 1e-10);
        }
    }

    #[test]
    fn xi_dot_rejects_g_elements() {
        let sc = find("s3-reeb").unwrap();
        let pt = &sample(&sc, 1, 0).unwrap()[0];
        let geo = PointGeometry::compute(pt, &sc.projector, &DiffSettings::analytic()).unwrap();
        let err = xi_dot(&geo, &geo.g_basis[0], 1e-8).unwrap_err();
        assert!(matches!(err, GeomError::NotInM { .. }));
        assert!(xi_dot(&geo, &geo.m_basis[0], 1e-8).is_ok());
    }
}
