//! Levi-Civita connection and Riemann curvature in coordinates.
//!
//! Christoffel symbols are stored as one matrix per direction:
//! `(Γ_i)[k][j] = Γ^k_{ij}`. The curvature is stored as one endomorphism per
//! ordered pair, `R_ij = R(∂_i, ∂_j)` with `(R_ij)[l][k] = R^l_{kij}`, so that
//! `R_ij = ∂_iΓ_j − ∂_jΓ_i + [Γ_i, Γ_j]`, which is the convention
//! `R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y]`.

use nalgebra::DMatrix;

use super::backend::{taylor, DiffSettings};
use super::chart::ChartPoint;
use crate::error::{GeomError, Result};
use crate::jet::JetMatrix;
use crate::la::{symmetric_condition, Mat, Vector};

/// Metrics with condition number above this are treated as singular.
pub const METRIC_CONDITION_LIMIT: f64 = 1e12;

/// Inverts a metric jet, rejecting near-singular base values.
pub fn invert_metric(g: &JetMatrix, coords: &[f64]) -> Result<JetMatrix> {
    let condition = symmetric_condition(&g.value());
    if !condition.is_finite() || condition > METRIC_CONDITION_LIMIT {
        return Err(GeomError::SingularMetric { coords: coords.to_vec(), condition });
    }
    g.inverse()
        .ok_or(GeomError::SingularMetric { coords: coords.to_vec(), condition })
}

/// Christoffel matrices `Γ_i` from jets of a metric and its inverse. The
/// result carries one order less than the inputs.
pub fn christoffel_jets(g: &JetMatrix, ginv: &JetMatrix) -> Vec<JetMatrix> {
    let n = g.nrows();
    let dg: Vec<JetMatrix> = (0..n).map(|a| g.diff(a)).collect();
    (0..n)
        .map(|i| {
            // C[l][j] = ∂_i g_jl + ∂_j g_il − ∂_l g_ij
            let c = JetMatrix::from_fn(n, n, |l, j| {
                let t = dg[i].get(j, l) + dg[j].get(i, l);
                &t - dg[l].get(i, j)
            });
            ginv.mul(&c).scale_f(0.5)
        })
        .collect()
}

/// Curvature endomorphisms `R_ij` of a connection given by its matrices.
pub fn curvature_jets(gamma: &[JetMatrix]) -> Vec<Vec<JetMatrix>> {
    let n = gamma.len();
    let mut out: Vec<Vec<Option<JetMatrix>>> = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            if j < i {
                let neg = out[j][i].as_ref().expect("filled").scale_f(-1.0);
                out[i][j] = Some(neg);
                continue;
            }
            let r = if i == j {
                JetMatrix::zeros(gamma[i].nrows(), gamma[i].ncols())
            } else {
                gamma[j].diff(i).sub(&gamma[i].diff(j)).add(&gamma[i].commutator(&gamma[j]))
            };
            out[i][j] = Some(r);
        }
    }
    out.into_iter().map(|row| row.into_iter().map(|r| r.expect("filled")).collect()).collect()
}

/// Levi-Civita coefficients at a point.
#[derive(Debug, Clone)]
pub struct ChristoffelField {
    /// `gamma[i][(k, j)] = Γ^k_{ij}`.
    pub gamma: Vec<Mat>,
}

impl ChristoffelField {
    pub fn component(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[i][(k, j)]
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    /// `∇_X Y` for fields with constant coordinate components.
    pub fn apply(&self, x: &Vector, y: &Vector) -> Vector {
        let n = self.dim();
        let mut out = Vector::zeros(n);
        for i in 0..n {
            if x[i] != 0.0 {
                out += &self.gamma[i] * y * x[i];
            }
        }
        out
    }

    /// Max over `i, j, k` of `|Γ^k_ij − Γ^k_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((self.component(k, i, j) - self.component(k, j, i)).abs());
                }
            }
        }
        worst
    }

    /// Max-norm of `∂_i g_jk − Γ^l_ij g_lk − Γ^l_ik g_jl`.
    pub fn compatibility_defect(&self, g: &Mat, dg: &[Mat]) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            let lowered = g * &self.gamma[i]; // [k][j] = g_kl Γ^l_ij
            for j in 0..n {
                for k in 0..n {
                    let r = dg[i][(j, k)] - lowered[(k, j)] - lowered[(j, k)];
                    worst = worst.max(r.abs());
                }
            }
        }
        worst
    }
}

/// Riemann tensor at a point.
#[derive(Debug, Clone)]
pub struct RiemannTensor {
    /// `r[i][j][(l, k)] = R^l_{kij}`.
    pub r: Vec<Vec<Mat>>,
}

impl RiemannTensor {
    pub fn dim(&self) -> usize {
        self.r.len()
    }

    pub fn component(&self, l: usize, k: usize, i: usize, j: usize) -> f64 {
        self.r[i][j][(l, k)]
    }

    /// The endomorphism `R(X, Y)`.
    pub fn endo(&self, x: &Vector, y: &Vector) -> Mat {
        let n = self.dim();
        let mut out = Mat::zeros(n, n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = x[i] * y[j];
                if w != 0.0 && i != j {
                    out += &self.r[i][j] * w;
                }
            }
        }
        out
    }

    /// `R(X, Y) Z`.
    pub fn apply(&self, x: &Vector, y: &Vector, z: &Vector) -> Vector {
        self.endo(x, y) * z
    }

    /// Lowered components `R_{lkij} = g_lm R^m_{kij}`.
    pub fn lowered(&self, g: &Mat) -> Vec<Vec<Mat>> {
        self.r.iter().map(|row| row.iter().map(|m| g * m).collect()).collect()
    }

    /// `g(R(X,Y)Y, X) / (|X|²|Y|² − g(X,Y)²)`.
    pub fn sectional(&self, g: &Mat, x: &Vector, y: &Vector) -> f64 {
        let num = x.dot(&(g * self.apply(x, y, y)));
        let gxx = x.dot(&(g * x));
        let gyy = y.dot(&(g * y));
        let gxy = x.dot(&(g * y));
        num / (gxx * gyy - gxy * gxy)
    }

    /// Ricci tensor `Ric_kj = R^i_{kij}`.
    pub fn ricci(&self) -> Mat {
        let n = self.dim();
        Mat::from_fn(n, n, |k, j| (0..n).map(|i| self.component(i, k, i, j)).sum())
    }

    /// Worst violation of: antisymmetry in `(i,j)`, antisymmetry of the
    /// lowered tensor in `(l,k)`, pair exchange, and the first Bianchi identity.
    pub fn symmetry_defects(&self, g: &Mat) -> [f64; 4] {
        let n = self.dim();
        let low = self.lowered(g);
        let mut d = [0.0f64; 4];
        for l in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let v = low[i][j][(l, k)];
                        d[0] = d[0].max((v + low[j][i][(l, k)]).abs());
                        d[1] = d[1].max((v + low[i][j][(k, l)]).abs());
                        d[2] = d[2].max((v - low[l][k][(i, j)]).abs());
                        let b = self.component(l, k, i, j)
                            + self.component(l, i, j, k)
                            + self.component(l, j, k, i);
                        d[3] = d[3].max(b.abs());
                    }
                }
            }
        }
        d
    }
}

fn metric_jets(pt: &ChartPoint, order: usize, settings: &DiffSettings) -> Result<(JetMatrix, JetMatrix)> {
    let g = taylor(&pt.chart().metric, pt, order, settings)?;
    let ginv = invert_metric(&g, pt.coords())?;
    Ok((g, ginv))
}

/// Christoffel symbols of the chart metric at `pt`.
pub fn christoffel(pt: &ChartPoint, settings: &DiffSettings) -> Result<ChristoffelField> {
    let (g, ginv) = metric_jets(pt, 1, settings)?;
    let gamma = christoffel_jets(&g, &ginv);
    Ok(ChristoffelField { gamma: gamma.iter().map(|m| m.value()).collect() })
}

/// Riemann curvature of the chart metric at `pt`.
pub fn riemann(pt: &ChartPoint, settings: &DiffSettings) -> Result<RiemannTensor> {
    let (g, ginv) = metric_jets(pt, 2, settings)?;
    let gamma = christoffel_jets(&g, &ginv);
    let r = curvature_jets(&gamma);
    Ok(RiemannTensor { r: r.iter().map(|row| row.iter().map(|m| m.value()).collect()).collect() })
}

/// Values of a list of jet matrices.
pub fn values(ms: &[JetMatrix]) -> Vec<DMatrix<f64>> {
    ms.iter().map(|m| m.value()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffgeo::chart::{Chart, DomainBox, MatrixExpr, SmoothMap};
    use crate::jet::Real;
    use std::sync::Arc;

    /// Round unit sphere in stereographic coordinates.
    struct Sphere2;
    impl MatrixExpr for Sphere2 {
        fn shape(&self) -> (usize, usize) {
            (2, 2)
        }
        fn eval<R: Real>(&self, x: &[R]) -> Vec<R> {
            let r2 = x[0].clone() * x[0].clone() + x[1].clone() * x[1].clone();
            let lam = (r2 + 1.0).powi(-2) * 4.0;
            vec![lam.clone(), R::cst(0.0), R::cst(0.0), lam]
        }
    }

    fn sphere() -> Arc<Chart> {
        Arc::new(Chart::new("s2", DomainBox::cube(2, -3.0, 3.0), SmoothMap::from_expr(Sphere2)))
    }

    #[test]
    fn christoffel_vanishes_at_conformal_critical_point() {
        let pt = sphere().point(vec![0.0, 0.0]).unwrap();
        let c = christoffel(&pt, &DiffSettings::analytic()).unwrap();
        for m in &c.gamma {
            assert!(m.abs().max() < 1e-15);
        }
    }

    #[test]
    fn christoffel_of_conformal_metric_matches_log_gradient_formula() {
        // g = e^{2φ} δ ⇒ Γ^k_ij = δ_jk ∂_iφ + δ_ik ∂_jφ − δ_ij ∂_kφ,
        // with φ = ln 2 − ln(1 + u² + v²)
        let (u, v) = (0.3, -0.2);
        let s = 1.0 + u * u + v * v;
        let dphi = [-2.0 * u / s, -2.0 * v / s];
        let pt = sphere().point(vec![u, v]).unwrap();
        let c = christoffel(&pt, &DiffSettings::analytic()).unwrap();
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let want = delta(j, k) * dphi[i] + delta(i, k) * dphi[j] - delta(i, j) * dphi[k];
                    assert!((c.component(k, i, j) - want).abs() < 1e-13);
                }
            }
        }
        let g = pt.metric();
        let g_jet = taylor(&pt.chart().metric, &pt, 1, &DiffSettings::analytic()).unwrap();
        let dg: Vec<Mat> = (0..2).map(|a| g_jet.grad(a)).collect();
        assert!(c.symmetry_defect() < 1e-15);
        assert!(c.compatibility_defect(&g, &dg) < 1e-13);
    }

    #[test]
    fn unit_sphere_has_curvature_one() {
        let pt = sphere().point(vec![0.7, -1.1]).unwrap();
        for settings in [DiffSettings::analytic(), DiffSettings::richardson(1e-4)] {
            let r = riemann(&pt, &settings).unwrap();
            let g = pt.metric();
            let x = Vector::from_vec(vec![1.0, 0.3]);
            let y = Vector::from_vec(vec![-0.2, 0.9]);
            assert!((r.sectional(&g, &x, &y) - 1.0).abs() < 1e-6);
            let d = r.symmetry_defects(&g);
            assert!(d.iter().all(|&v| v < 1e-6), "{d:?}");
            // Ric = (n − 1) g on the unit sphere
            assert!((r.ricci() - &g).abs().max() < 1e-6);
        }
    }

    #[test]
    fn singular_metric_is_reported() {
        let g = JetMatrix::from_matrix(&Mat::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]));
        assert!(matches!(invert_metric(&g, &[0.0, 0.0]), Err(GeomError::SingularMetric { .. })));
    }
}
