//! Everything the identity and curvature checks need at one point.
//!
//! The metric and projector enter as third-order jets (exact for the
//! analytic backend, finite-difference Taylor coefficients otherwise). Each
//! derived quantity is then computed in jet arithmetic and keeps exactly the
//! derivatives it still has:
//!
//! | quantity | order |
//! |---|---|
//! | `g`, `g⁻¹`, `p` | 3 |
//! | `Γ`, `∇p`, `ξ`, `Γ′`, `L`, `g̃` | 2 |
//! | `R`, `R′`, `Γ̃`, `Q̂_α` | 1 |
//! | `R̃`, `∇ξ`, `D R′`, `D Q` | 0 |

use nalgebra::SVD;

use crate::diffgeo::backend::{taylor, DiffSettings};
use crate::diffgeo::chart::ChartPoint;
use crate::diffgeo::connection::{christoffel_jets, curvature_jets, invert_metric, RiemannTensor};
use crate::diffgeo::frame::{adapted_frame_from, gram_schmidt, AdaptedFrame};
use crate::error::{GeomError, Result};
use crate::gstructure::{
    g_part_jet, m_part_jet, minimal_connection_jets, nabla_projector_jets, torsion_jets, ProjectorField,
    ProjectorSplit, Splitter,
};
use crate::jet::{Jet, JetMatrix};
use crate::la::{b_pair, commutator, g_inner, wedge_endo, Mat, Vector};

/// L is rejected when its condition number exceeds this.
pub const L_CONDITION_LIMIT: f64 = 1e8;

/// Jets kept for quantities that are differentiated on demand.
#[derive(Debug, Clone)]
struct Jets {
    ginv: JetMatrix,
    p: JetMatrix,
    xi: Vec<JetMatrix>,
    r: Vec<Vec<JetMatrix>>,
    l_inv: JetMatrix,
}

/// Pointwise geometry of an almost-product structure.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub coords: Vec<f64>,
    pub n: usize,
    pub m: usize,
    pub g: Mat,
    pub ginv: Mat,
    /// `∂_a g`.
    pub dg: Vec<Mat>,
    /// Levi-Civita matrices `(Γ_a)[k][j] = Γ^k_{aj}`.
    pub gamma: Vec<Mat>,
    pub riemann: RiemannTensor,
    pub p: Mat,
    pub q: Mat,
    /// `∂_a p`.
    pub dp: Vec<Mat>,
    /// `∇_a p`.
    pub nabla_p: Vec<Mat>,
    /// `ξ_a = ξ_{∂_a}`.
    pub xi: Vec<Mat>,
    /// `dxi[a][j] = ∂_a (ξ_j)`.
    pub dxi: Vec<Vec<Mat>>,
    /// `nabla_xi[a][j] = (∇_{∂_a} ξ)_{∂_j}`.
    pub nabla_xi: Vec<Vec<Mat>>,
    /// Coefficients of the minimal connection, built from `p` and `Γ` only.
    pub gamma_prime: Vec<Mat>,
    pub l: Mat,
    pub l_inv: Mat,
    /// `∇_a L`, differentiated from the jet of `L`.
    pub nabla_l: Vec<Mat>,
    pub gt: Mat,
    pub gt_inv: Mat,
    /// `∂_a g̃`.
    pub dgt: Vec<Mat>,
    /// Levi-Civita matrices of `g̃`.
    pub gamma_t: Vec<Mat>,
    pub riemann_t: RiemannTensor,
    /// `R′_ij = R(∂_i,∂_j)_g − [ξ_i, ξ_j]_g`.
    pub rprime: Vec<Vec<Mat>>,
    /// Curvature of the minimal connection computed from its coefficients.
    pub rprime_direct: Vec<Vec<Mat>>,
    /// `d_rprime[a][i][j] = (D_{∂_a} R′)(∂_i, ∂_j)`.
    pub d_rprime: Vec<Vec<Vec<Mat>>>,
    /// `S^k_ij` from the transfer-tensor formula: `s[i][(k, j)]`.
    pub s: Vec<Mat>,
    pub frame: AdaptedFrame,
    /// g̃-orthonormal frame, Gram–Schmidt over `frame` (E first).
    pub tilde_frame: Vec<Vector>,
    /// B-orthonormal basis of `g` at the point.
    pub g_basis: Vec<Mat>,
    /// B-orthonormal basis of `m` at the point.
    pub m_basis: Vec<Mat>,
    /// `d_q[A][a] = (D_{∂_a} Q)_{α_A}` as an endomorphism.
    pub d_q: Vec<Vec<Mat>>,
    jets: Jets,
}

fn values(ms: &[JetMatrix]) -> Vec<Mat> {
    ms.iter().map(|m| m.value()).collect()
}

fn values2(ms: &[Vec<JetMatrix>]) -> Vec<Vec<Mat>> {
    ms.iter().map(|r| values(r)).collect()
}

/// `B(A, C)` on jets.
fn b_jet(a: &JetMatrix, c: &JetMatrix) -> Jet {
    -a.trace_of_product(c)
}

/// `Σ_{a,k} (β g⁻¹)^{ka} R_ak`, the endomorphism `R_β`.
fn r_op_jet(beta: &JetMatrix, ginv: &JetMatrix, r: &[Vec<JetMatrix>]) -> JetMatrix {
    let n = ginv.nrows();
    let w = beta.mul(ginv);
    let mut acc = JetMatrix::zeros(n, n);
    for a in 0..n {
        for k in (a + 1)..n {
            let c = w.get(k, a) - w.get(a, k);
            acc = acc.add(&r[a][k].scale(&c));
        }
    }
    acc
}

/// `Q̂(β) = L⁻¹(R_{β_g} − ξ·[ξ_·, β_g]_m)` on jets, for a constant or
/// varying endomorphism field `β`.
fn q_hat_jet(beta: &JetMatrix, jets: &Jets) -> JetMatrix {
    let n = jets.p.nrows();
    let bg = g_part_jet(beta, &jets.p);
    let r_beta = r_op_jet(&bg, &jets.ginv, &jets.r);
    // C[l][j] = −B(ξ_l, [ξ_j, β_g]_m); column j of ξ·[ξ_j, β_g]_m is g⁻¹ C[·][j]
    let brackets: Vec<JetMatrix> = jets.xi.iter().map(|x| m_part_jet(&x.commutator(&bg), &jets.p)).collect();
    let c = JetMatrix::from_fn(n, n, |l, j| -b_jet(&jets.xi[l], &brackets[j]));
    jets.l_inv.mul(&r_beta.sub(&jets.ginv.mul(&c)))
}

impl PointGeometry {
    /// Runs the whole pipeline at `pt`.
    pub fn compute(pt: &ChartPoint, projector: &ProjectorField, settings: &DiffSettings) -> Result<Self> {
        let n = pt.dim();
        let m = projector.rank;
        let coords = pt.coords().to_vec();

        let gj = taylor(&pt.chart().metric, pt, 3, settings)?;
        let ginvj = invert_metric(&gj, &coords)?;
        let gammaj = christoffel_jets(&gj, &ginvj);
        let rj = curvature_jets(&gammaj);

        let pj = taylor(&projector.map, pt, 3, settings)?;
        let npj = nabla_projector_jets(&pj, &gammaj);
        let xij = torsion_jets(&pj, &npj);

        let g = gj.value();
        let ginv = ginvj.value();
        let gamma = values(&gammaj);
        let p = pj.value();
        let q = Mat::identity(n, n) - &p;
        let xi = values(&xij);
        let dxi: Vec<Vec<Mat>> = (0..n).map(|a| xij.iter().map(|x| x.grad(a)).collect()).collect();
        let nabla_xi: Vec<Vec<Mat>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|j| {
                        let mut v = &dxi[a][j] + commutator(&gamma[a], &xi[j]);
                        for (mm, xm) in xi.iter().enumerate() {
                            let c = gamma[a][(mm, j)];
                            if c != 0.0 {
                                v -= xm * c;
                            }
                        }
                        v
                    })
                    .collect()
            })
            .collect();

        // transfer tensor and g̃
        let xi2: Vec<JetMatrix> = xij.iter().map(|x| x.truncate_to(2)).collect();
        let bxx = JetMatrix::from_fn(n, n, |i, j| b_jet(&xi2[i], &xi2[j]));
        let gtj = gj.truncate_to(2).add(&bxx);
        let gtinvj = invert_metric(&gtj, &coords)?;
        let lj = ginvj.truncate_to(2).mul(&gtj);
        let l = lj.value();
        let condition = {
            let sv = SVD::new(l.clone(), false, false).singular_values;
            let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            hi / lo
        };
        if !condition.is_finite() || condition > L_CONDITION_LIMIT {
            return Err(GeomError::IllConditionedL { condition });
        }
        let l_invj = lj.inverse().ok_or(GeomError::IllConditionedL { condition })?;
        let nabla_l: Vec<Mat> = (0..n).map(|a| lj.grad(a) + commutator(&gamma[a], &l)).collect();

        let gamma_tj = christoffel_jets(&gtj, &gtinvj);
        let gamma_t = values(&gamma_tj);
        let riemann_t = RiemannTensor { r: values2(&curvature_jets(&gamma_tj)) };

        // curvature of the minimal connection, two ways
        let p1 = pj.truncate_to(1);
        let xi1: Vec<JetMatrix> = xij.iter().map(|x| x.truncate_to(1)).collect();
        let rpj: Vec<Vec<JetMatrix>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            return JetMatrix::zeros(n, n);
                        }
                        let rg = g_part_jet(&rj[i][j], &p1);
                        rg.sub(&g_part_jet(&xi1[i].commutator(&xi1[j]), &p1))
                    })
                    .collect()
            })
            .collect();
        let gamma_primej = minimal_connection_jets(&pj, &gammaj);
        let gamma_prime = values(&gamma_primej);
        let rprime_direct = values2(&curvature_jets(&gamma_primej));
        let rprime = values2(&rpj);

        let d_rprime: Vec<Vec<Vec<Mat>>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                let mut v = rpj[i][j].grad(a) + commutator(&gamma_prime[a], &rprime[i][j]);
                                for mm in 0..n {
                                    let ci = gamma_t[a][(mm, i)];
                                    if ci != 0.0 {
                                        v -= &rprime[mm][j] * ci;
                                    }
                                    let cj = gamma_t[a][(mm, j)];
                                    if cj != 0.0 {
                                        v -= &rprime[i][mm] * cj;
                                    }
                                }
                                v
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();

        // frames and Lie algebra bases
        let frame = adapted_frame_from(&g, &p, m)?;
        let gt = gtj.value();
        let mut tilde_frame = Vec::with_capacity(n);
        let found = gram_schmidt(&gt, &mut tilde_frame, &frame.vectors, n);
        if found < n {
            return Err(GeomError::RankDeficient { part: "g̃-frame", found, expected: n });
        }
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut g_basis = Vec::new();
        let mut m_basis = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                let e = wedge_endo(&frame.vectors[a], &frame.vectors[b], &g) * s2;
                if (a < m) == (b < m) {
                    g_basis.push(e);
                } else {
                    m_basis.push(e);
                }
            }
        }

        let jets = Jets {
            ginv: ginvj.truncate_to(1),
            p: p1,
            xi: xi1,
            r: rj,
            l_inv: l_invj.truncate_to(1),
        };
        let l_inv = jets.l_inv.value();

        let mut geo = PointGeometry {
            coords,
            n,
            m,
            dg: (0..n).map(|a| gj.grad(a)).collect(),
            g,
            ginv,
            gamma,
            riemann: RiemannTensor { r: values2(&jets.r) },
            dp: (0..n).map(|a| pj.grad(a)).collect(),
            nabla_p: values(&npj),
            p,
            q,
            xi,
            dxi,
            nabla_xi,
            gamma_prime,
            l,
            l_inv,
            nabla_l,
            dgt: (0..n).map(|a| gtj.grad(a)).collect(),
            gt,
            gt_inv: gtinvj.value(),
            gamma_t,
            riemann_t,
            rprime,
            rprime_direct,
            d_rprime,
            s: Vec::new(),
            frame,
            tilde_frame,
            g_basis,
            m_basis,
            d_q: Vec::new(),
            jets,
        };
        geo.s = geo.difference_tensor_from_torsion()?;
        geo.d_q = geo.g_basis.iter().map(|alpha| geo.d_q_const(alpha)).collect();
        Ok(geo)
    }

    pub fn split(&self) -> ProjectorSplit {
        ProjectorSplit { p: self.p.clone(), q: self.q.clone() }
    }

    pub fn g_part(&self, a: &Mat) -> Mat {
        &self.p * a * &self.p + &self.q * a * &self.q
    }

    pub fn m_part(&self, a: &Mat) -> Mat {
        &self.p * a * &self.q + &self.q * a * &self.p
    }

    pub fn g_inner(&self, x: &Vector, y: &Vector) -> f64 {
        g_inner(&self.g, x, y)
    }

    pub fn gt_inner(&self, x: &Vector, y: &Vector) -> f64 {
        g_inner(&self.gt, x, y)
    }

    fn combine(ms: &[Mat], x: &Vector) -> Mat {
        let n = ms[0].nrows();
        let mut out = Mat::zeros(n, n);
        for (i, m) in ms.iter().enumerate() {
            if x[i] != 0.0 {
                out += m * x[i];
            }
        }
        out
    }

    fn combine2(ms: &[Vec<Mat>], x: &Vector, y: &Vector) -> Mat {
        let n = ms.len();
        let mut out = Mat::zeros(n, n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = x[i] * y[j];
                if w != 0.0 {
                    out += &ms[i][j] * w;
                }
            }
        }
        out
    }

    /// `ξ_X`.
    pub fn xi_at(&self, x: &Vector) -> Mat {
        Self::combine(&self.xi, x)
    }

    /// `(∇_X ξ)_Y`.
    pub fn nabla_xi_at(&self, x: &Vector, y: &Vector) -> Mat {
        Self::combine2(&self.nabla_xi, x, y)
    }

    /// `R(X, Y)`.
    pub fn r_at(&self, x: &Vector, y: &Vector) -> Mat {
        self.riemann.endo(x, y)
    }

    /// `R′(X, Y)` from the curvature decomposition.
    pub fn rprime_at(&self, x: &Vector, y: &Vector) -> Mat {
        Self::combine2(&self.rprime, x, y)
    }

    /// `R′(X, Y)` as the curvature of `∇′`.
    pub fn rprime_direct_at(&self, x: &Vector, y: &Vector) -> Mat {
        Self::combine2(&self.rprime_direct, x, y)
    }

    /// `R̃(X, Y)`.
    pub fn rt_at(&self, x: &Vector, y: &Vector) -> Mat {
        self.riemann_t.endo(x, y)
    }

    /// `(D_X R′)(Y, Z)`.
    pub fn d_rprime_at(&self, x: &Vector, y: &Vector, z: &Vector) -> Mat {
        let n = self.n;
        let mut out = Mat::zeros(n, n);
        for a in 0..n {
            if x[a] == 0.0 {
                continue;
            }
            out += Self::combine2(&self.d_rprime[a], y, z) * x[a];
        }
        out
    }

    /// Curvature operator `R_α = Σ_i R(e_i, α e_i)` for any endomorphism α.
    pub fn r_op(&self, alpha: &Mat) -> Mat {
        let n = self.n;
        let w = alpha * &self.ginv;
        let mut acc = Mat::zeros(n, n);
        for a in 0..n {
            for k in (a + 1)..n {
                let c = w[(k, a)] - w[(a, k)];
                if c != 0.0 {
                    acc += &self.riemann.r[a][k] * c;
                }
            }
        }
        acc
    }

    /// `ξ·α`, the g-dual of `X ↦ −B(α, ξ_X)`.
    pub fn xi_dot(&self, alpha: &Mat) -> Vector {
        let c = Vector::from_iterator(self.n, self.xi.iter().map(|x| -b_pair(x, alpha)));
        &self.ginv * c
    }

    /// `ξ·α = −Σ_i B(ξ_{e_i}, α) e_i` over the adapted orthonormal frame.
    pub fn xi_dot_frame(&self, alpha: &Mat) -> Vector {
        let mut out = Vector::zeros(self.n);
        for e in &self.frame.vectors {
            out -= e * b_pair(&self.xi_at(e), alpha);
        }
        out
    }

    /// `L X = X − ξ·ξ_X`.
    pub fn l_apply(&self, x: &Vector) -> Vector {
        x - self.xi_dot(&self.xi_at(x))
    }

    /// `Q̂(β) = L⁻¹(R_{β_g} − ξ·[ξ_·, β_g]_m)` as an endomorphism; equals
    /// `Q_β` for `β ∈ g`.
    pub fn q_hat(&self, beta: &Mat) -> Mat {
        let bg = self.g_part(beta);
        let r_beta = self.r_op(&bg);
        let n = self.n;
        let brackets: Vec<Mat> = self.xi.iter().map(|x| self.m_part(&commutator(x, &bg))).collect();
        let c = Mat::from_fn(n, n, |l, j| -b_pair(&self.xi[l], &brackets[j]));
        &self.l_inv * (r_beta - &self.ginv * c)
    }

    /// `Q_α X = L⁻¹(R_α X − ξ·[ξ_X, α]_m)` for `α ∈ g`.
    pub fn q_apply(&self, alpha: &Mat, x: &Vector) -> Vector {
        let bracket = self.m_part(&commutator(&self.xi_at(x), alpha));
        &self.l_inv * (self.r_op(alpha) * x - self.xi_dot(&bracket))
    }

    /// `(D_{∂_a} Q)_α` for a coordinate-constant `α`.
    fn d_q_const(&self, alpha: &Mat) -> Vec<Mat> {
        self.d_q_field(&JetMatrix::from_matrix(alpha))
    }

    /// `(D_{∂_a} Q)_α` for every direction `a`, where `α` is given as a jet
    /// (order ≥ 1) of any endomorphism field whose `g`-part at the point is
    /// the element of interest. Tensoriality makes the result independent of
    /// how `α` is extended.
    pub fn d_q_field(&self, alpha: &JetMatrix) -> Vec<Mat> {
        let q = q_hat_jet(alpha, &self.jets);
        let qv = q.value();
        let field = g_part_jet(alpha, &self.jets.p);
        let fv = field.value();
        (0..self.n)
            .map(|a| {
                let nabla_prime = field.grad(a) + commutator(&self.gamma_prime[a], &fv);
                q.grad(a) + commutator(&self.gamma_t[a], &qv) - self.q_hat(&nabla_prime)
            })
            .collect()
    }

    /// `(D_X Q)_β Y` for `β ∈ g`.
    pub fn d_q_at(&self, x: &Vector, beta: &Mat, y: &Vector) -> Vector {
        let n = self.n;
        let mut acc = Mat::zeros(n, n);
        for (alpha, dq) in self.g_basis.iter().zip(&self.d_q) {
            let c = b_pair(beta, alpha);
            if c == 0.0 {
                continue;
            }
            acc += Self::combine(dq, x) * c;
        }
        acc * y
    }

    /// `∇̃_X Y` for fields with constant coordinate components.
    pub fn nabla_tilde(&self, x: &Vector, y: &Vector) -> Vector {
        Self::combine(&self.gamma_t, x) * y
    }

    /// `∇_X Y` for fields with constant coordinate components.
    pub fn nabla(&self, x: &Vector, y: &Vector) -> Vector {
        Self::combine(&self.gamma, x) * y
    }

    /// `S(X, Y)` from the transfer-tensor formula.
    pub fn s_at(&self, x: &Vector, y: &Vector) -> Vector {
        Self::combine(&self.s, x) * y
    }

    /// `S` assembled from `∇ξ` and `ξ`: the right side of
    /// `2 g(S(X,Y), LZ) = B((∇_Xξ)_Y + (∇_Yξ)_X, ξ_Z) + B((∇_Xξ)_Z − (∇_Zξ)_X, ξ_Y)
    ///  + B((∇_Yξ)_Z − (∇_Zξ)_Y, ξ_X)`, raised with `g` and solved with `L`.
    fn difference_tensor_from_torsion(&self) -> Result<Vec<Mat>> {
        let n = self.n;
        let nx = &self.nabla_xi;
        let lu = self.l.clone().lu();
        let mut s = vec![Mat::zeros(n, n); n];
        for i in 0..n {
            for j in 0..n {
                let cov = Vector::from_fn(n, |c, _| {
                    let t1 = b_pair(&(&nx[i][j] + &nx[j][i]), &self.xi[c]);
                    let t2 = b_pair(&(&nx[i][c] - &nx[c][i]), &self.xi[j]);
                    let t3 = b_pair(&(&nx[j][c] - &nx[c][j]), &self.xi[i]);
                    0.5 * (t1 + t2 + t3)
                });
                let raised = &self.ginv * cov;
                let sol = lu
                    .solve(&raised)
                    .ok_or(GeomError::IllConditionedL { condition: f64::INFINITY })?;
                for k in 0..n {
                    s[i][(k, j)] = sol[k];
                }
            }
        }
        Ok(s)
    }

    /// `Γ̃ − Γ` from the Levi-Civita connection of `g̃`.
    pub fn difference_tensor_from_metric(&self) -> Vec<Mat> {
        self.gamma_t.iter().zip(&self.gamma).map(|(a, b)| a - b).collect()
    }

    /// `∂_X` of the g-projection of a constant endomorphism.
    pub fn d_g_part(&self, x: &Vector, c: &Mat) -> Mat {
        let dp = Self::combine(&self.dp, x);
        let dq = -&dp;
        &dp * c * &self.p + &self.p * c * &dp + &dq * c * &self.q + &self.q * c * &dq
    }

    /// `∇′_X β` for the field `β = (C)_g` with `C` coordinate-constant.
    pub fn nabla_prime_projected(&self, x: &Vector, c: &Mat) -> Mat {
        let beta = self.g_part(c);
        self.d_g_part(x, c) + commutator(&Self::combine(&self.gamma_prime, x), &beta)
    }

    /// `∇_X β` (Levi-Civita) for the field `β = (C)_g`.
    pub fn nabla_projected(&self, x: &Vector, c: &Mat) -> Mat {
        let beta = self.g_part(c);
        self.d_g_part(x, c) + commutator(&Self::combine(&self.gamma, x), &beta)
    }

    /// `∇_X (ξ_Y)` for a coordinate-constant field `Y`.
    pub fn nabla_of_xi_field(&self, x: &Vector, y: &Vector) -> Mat {
        self.nabla_xi_at(x, y) + self.xi_at(&self.nabla(x, y))
    }

    /// `∇′_X (ξ_Y)` for a coordinate-constant field `Y`, using `Γ′`.
    pub fn nabla_prime_of_xi_field(&self, x: &Vector, y: &Vector) -> Mat {
        let d = Self::combine2(&self.dxi, x, y);
        d + commutator(&Self::combine(&self.gamma_prime, x), &self.xi_at(y))
    }

    /// `Σ ξ_a ⊗ ...` magnitude: max absolute component of the torsion.
    pub fn xi_max_abs(&self) -> f64 {
        self.xi.iter().map(|m| m.amax()).fold(0.0, f64::max)
    }
}

/// Value of `g̃` at `pt` (first derivatives of `g` and `p` suffice).
pub fn tilde_metric_value(pt: &ChartPoint, projector: &ProjectorField, settings: &DiffSettings) -> Result<Mat> {
    let n = pt.dim();
    let gj = taylor(&pt.chart().metric, pt, 1, settings)?;
    let ginvj = invert_metric(&gj, pt.coords())?;
    let gammaj = christoffel_jets(&gj, &ginvj);
    let pj = taylor(&projector.map, pt, 1, settings)?;
    let xi = values(&torsion_jets(&pj, &nabla_projector_jets(&pj, &gammaj)));
    let g = gj.value();
    Ok(Mat::from_fn(n, n, |i, j| g[(i, j)] + b_pair(&xi[i], &xi[j])))
}

impl Splitter for PointGeometry {
    fn g_part(&self, a: &Mat) -> Mat {
        PointGeometry::g_part(self, a)
    }
}
