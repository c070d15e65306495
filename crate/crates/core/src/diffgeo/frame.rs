use super::chart::ChartPoint;
use crate::error::{GeomError, Result};
use crate::gstructure::ProjectorField;
use crate::la::{g_inner, Mat, Vector};

/// Vectors shorter than this after orthogonalisation are skipped.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// Orthonormal frame whose first `split_rank` vectors span `E`.
#[derive(Debug, Clone)]
pub struct AdaptedFrame {
    pub vectors: Vec<Vector>,
    /// Dual basis: `coframe[i] · vectors[j] = δ_ij`.
    pub coframe: Vec<Vector>,
    pub split_rank: usize,
}

impl AdaptedFrame {
    pub fn from_vectors(vectors: Vec<Vector>, split_rank: usize) -> Self {
        let n = vectors.len();
        let e = Mat::from_fn(n, n, |i, j| vectors[j][i]);
        let inv = e.try_inverse().expect("frame vectors are independent");
        let coframe = (0..n).map(|i| inv.row(i).transpose()).collect();
        Self { vectors, coframe, split_rank }
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Matrix whose columns are the frame vectors.
    pub fn matrix(&self) -> Mat {
        let n = self.dim();
        Mat::from_fn(n, n, |i, j| self.vectors[j][i])
    }

    /// Max deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self, metric: &Mat) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g_inner(metric, &self.vectors[i], &self.vectors[j]) - target).abs());
            }
        }
        worst
    }
}

/// Appends to `basis` the metric-orthonormalised candidates that are
/// independent of it, stopping after `want` additions. Each candidate is
/// orthogonalised twice, which keeps the Gram matrix at rounding level.
pub fn gram_schmidt(metric: &Mat, basis: &mut Vec<Vector>, candidates: &[Vector], want: usize) -> usize {
    let mut added = 0;
    for c in candidates {
        if added == want {
            break;
        }
        let reference = g_inner(metric, c, c).sqrt().max(1.0);
        let mut v = c.clone();
        for _ in 0..2 {
            for b in basis.iter() {
                let coef = g_inner(metric, b, &v);
                v -= b * coef;
            }
        }
        let norm = g_inner(metric, &v, &v).max(0.0).sqrt();
        if norm <= RANK_THRESHOLD * reference {
            continue;
        }
        basis.push(v / norm);
        added += 1;
    }
    added
}

/// Gram–Schmidt on `p ∂_i` then `q ∂_i` in index order.
pub fn adapted_frame_from(metric: &Mat, p: &Mat, m: usize) -> Result<AdaptedFrame> {
    let n = metric.nrows();
    let q = Mat::identity(n, n) - p;
    let e_candidates: Vec<Vector> = (0..n).map(|i| p.column(i).into_owned()).collect();
    let f_candidates: Vec<Vector> = (0..n).map(|i| q.column(i).into_owned()).collect();
    let mut basis = Vec::with_capacity(n);
    let found = gram_schmidt(metric, &mut basis, &e_candidates, m);
    if found < m {
        return Err(GeomError::RankDeficient { part: "E", found, expected: m });
    }
    let found = gram_schmidt(metric, &mut basis, &f_candidates, n - m);
    if found < n - m {
        return Err(GeomError::RankDeficient { part: "F", found, expected: n - m });
    }
    Ok(AdaptedFrame::from_vectors(basis, m))
}

/// Adapted orthonormal frame of the chart metric at `pt`.
pub fn adapted_frame(pt: &ChartPoint, projector: &ProjectorField) -> Result<AdaptedFrame> {
    let g = pt.metric();
    let p = projector.map.value(pt.coords());
    adapted_frame_from(&g, &p, projector.rank)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_frame_at_origin() {
        // coordinates (u, v, t), g = diag(4, 4, 1), E = span{∂_t}
        let g = Mat::from_diagonal(&Vector::from_vec(vec![4.0, 4.0, 1.0]));
        let p = Mat::from_diagonal(&Vector::from_vec(vec![0.0, 0.0, 1.0]));
        let f = adapted_frame_from(&g, &p, 1).unwrap();
        let expect = [[0.0, 0.0, 1.0], [0.5, 0.0, 0.0], [0.0, 0.5, 0.0]];
        for (v, e) in f.vectors.iter().zip(expect) {
            for k in 0..3 {
                assert!((v[k] - e[k]).abs() < 1e-15);
            }
        }
        assert!(f.orthonormality_defect(&g) < 1e-15);
    }

    #[test]
    fn orthonormalising_an_orthonormal_frame_is_identity() {
        let g = Mat::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 1.5]);
        let v = Vector::from_vec(vec![1.0, 0.5, -0.2]);
        let gv = &g * &v;
        let p = &v * gv.transpose() / v.dot(&gv);
        let f = adapted_frame_from(&g, &p, 1).unwrap();
        let mut again = Vec::new();
        gram_schmidt(&g, &mut again, &f.vectors, 3);
        for (a, b) in again.iter().zip(&f.vectors) {
            assert!((a - b).amax() < 1e-14);
        }
        for (i, c) in f.coframe.iter().enumerate() {
            for (j, v) in f.vectors.iter().enumerate() {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((c.dot(v) - t).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_projector_is_rank_deficient() {
        let g = Mat::identity(3, 3);
        let p = Mat::zeros(3, 3);
        assert!(matches!(adapted_frame_from(&g, &p, 1), Err(GeomError::RankDeficient { part: "E", .. })));
    }
}
