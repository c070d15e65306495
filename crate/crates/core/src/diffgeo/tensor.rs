use super::backend::{taylor, DiffSettings};
use super::chart::{ChartPoint, SmoothMap};
use super::connection::christoffel;
use crate::error::{GeomError, Result};

/// Tensor field of valence `(r, s)` with components flattened row-major
/// over `(i_1..i_r, j_1..j_s)`, contravariant indices first.
#[derive(Debug, Clone)]
pub struct TensorField {
    pub contravariant: usize,
    pub covariant: usize,
    /// Column field of length `n^(r+s)`.
    pub components: SmoothMap,
}

impl TensorField {
    pub fn new(contravariant: usize, covariant: usize, components: SmoothMap) -> Self {
        Self { contravariant, covariant, components }
    }

    pub fn rank(&self) -> usize {
        self.contravariant + self.covariant
    }

    pub fn eval(&self, pt: &ChartPoint) -> Vec<f64> {
        self.components.value(pt.coords()).iter().cloned().collect()
    }
}

fn digits(mut flat: usize, n: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for slot in d.iter_mut().rev() {
        *slot = flat % n;
        flat /= n;
    }
    d
}

fn flatten(d: &[usize], n: usize) -> usize {
    d.iter().fold(0, |acc, &v| acc * n + v)
}

/// Levi-Civita covariant derivative. The output has valence `(r, s+1)` with
/// the derivative index last.
pub fn covariant_derivative(field: &TensorField, pt: &ChartPoint, settings: &DiffSettings) -> Result<Vec<f64>> {
    let n = pt.dim();
    let rank = field.rank();
    let len = n.pow(rank as u32);
    if field.components.shape() != (len, 1) {
        return Err(GeomError::DimensionMismatch { expected: len, got: field.components.shape().0 });
    }
    let jet = taylor(&field.components, pt, 1, settings)?;
    let gamma = christoffel(pt, settings)?;
    let value: Vec<f64> = (0..len).map(|c| jet.get(c, 0).value()).collect();
    let mut out = vec![0.0; len * n];
    for c in 0..len {
        let idx = digits(c, n, rank);
        for a in 0..n {
            let mut v = jet.get(c, 0).grad(a);
            for (slot, &ip) in idx.iter().enumerate() {
                let mut moved = idx.clone();
                for l in 0..n {
                    moved[slot] = l;
                    let t = value[flatten(&moved, n)];
                    if t == 0.0 {
                        continue;
                    }
                    if slot < field.contravariant {
                        v += gamma.component(ip, a, l) * t;
                    } else {
                        v -= gamma.component(l, a, ip) * t;
                    }
                }
            }
            out[c * n + a] = v;
        }
    }
    Ok(out)
}
