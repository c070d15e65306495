//! Small dense helpers shared across the geometry modules.

use nalgebra::{DMatrix, DVector};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// `B(A, C) = −tr(AC)`.
pub fn b_pair(a: &Mat, c: &Mat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * c[(j, i)];
        }
    }
    -acc
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

pub fn g_inner(g: &Mat, x: &Vector, y: &Vector) -> f64 {
    x.dot(&(g * y))
}

pub fn g_norm(g: &Mat, x: &Vector) -> f64 {
    g_inner(g, x, x).max(0.0).sqrt()
}

/// g-adjoint `g⁻¹ Aᵀ g` of an endomorphism.
pub fn g_adjoint(a: &Mat, g: &Mat, ginv: &Mat) -> Mat {
    ginv * a.transpose() * g
}

/// Norm induced by `⟨A, C⟩ = tr(A* C)` with the g-adjoint; equals
/// `sqrt(B(A, A))` on skew endomorphisms.
pub fn endo_norm(a: &Mat, g: &Mat, ginv: &Mat) -> f64 {
    let adj = g_adjoint(a, g, ginv);
    let mut acc = 0.0;
    let n = a.nrows();
    for i in 0..n {
        for j in 0..n {
            acc += adj[(i, j)] * a[(j, i)];
        }
    }
    acc.max(0.0).sqrt()
}

/// Size of the g-symmetric part of `a`, i.e. how far it is from g-skew.
pub fn skewness_defect(a: &Mat, g: &Mat, ginv: &Mat) -> f64 {
    let sym = a + g_adjoint(a, g, ginv);
    endo_norm(&sym, g, ginv) * 0.5
}

/// Condition number of a symmetric matrix from its eigenvalues.
pub fn symmetric_condition(m: &Mat) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    let ev = sym.symmetric_eigenvalues();
    let (lo, hi) = ev
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v.abs()), hi.max(v.abs())));
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Smallest eigenvalue of the g-symmetric endomorphism `a`, computed from the
/// symmetric matrix `g a`, whitened by the Cholesky factor of `g`.
pub fn min_g_eigenvalue(a: &Mat, g: &Mat) -> f64 {
    let chol = nalgebra::Cholesky::new(g.clone()).expect("metric must be positive definite");
    let l = chol.l();
    let linv = l.clone().try_inverse().expect("Cholesky factor is invertible");
    // g a = L Lᵀ a; the whitened operator Lᵀ a L⁻ᵀ is symmetric for g-symmetric a
    let w = l.transpose() * a * linv.transpose();
    let w = (&w + w.transpose()) * 0.5;
    w.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Endomorphism `Z ↦ g(y, Z) x − g(x, Z) y`.
pub fn wedge_endo(x: &Vector, y: &Vector, g: &Mat) -> Mat {
    let gx = g * x;
    let gy = g * y;
    x * gy.transpose() - y * gx.transpose()
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_of_rotation_generator() {
        let g = Mat::identity(3, 3);
        let e1 = Vector::from_vec(vec![1.0, 0.0, 0.0]);
        let e2 = Vector::from_vec(vec![0.0, 1.0, 0.0]);
        let a = wedge_endo(&e1, &e2, &g);
        assert_eq!(b_pair(&a, &a), 2.0);
        assert!((endo_norm(&a, &g, &g) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(skewness_defect(&a, &g, &g), 0.0);
    }

    #[test]
    fn wedge_is_skew_for_curved_metric() {
        let g = Mat::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let ginv = g.clone().try_inverse().unwrap();
        let x = Vector::from_vec(vec![0.4, -1.0]);
        let y = Vector::from_vec(vec![1.3, 0.2]);
        let a = wedge_endo(&x, &y, &g);
        assert!(skewness_defect(&a, &g, &ginv) < 1e-14);
    }

    #[test]
    fn eigenvalue_helpers() {
        let g = Mat::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let a = Mat::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.5]);
        assert!((min_g_eigenvalue(&a, &g) - 1.5).abs() < 1e-14);
        assert!((symmetric_condition(&g) - 4.0).abs() < 1e-14);
    }
}
