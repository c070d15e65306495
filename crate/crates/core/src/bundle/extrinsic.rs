//! Second fundamental form of `P ⊂ SO(M)`, mean curvature and the
//! harmonicity conditions of the Gauss section.

use serde::Serialize;

use super::connection::{nabla_so, nabla_so_lifted, LiftedField};
use super::FrameBundleVector;
use crate::geometry::PointGeometry;
use crate::la::{b_pair, commutator, endo_norm, g_norm, Mat, Vector};

/// `⟨Π(X′, Y′), α⁺⟩ = ½B((∇_Xξ)_Y + (∇_Yξ)_X − ξ_{R_{ξ_X}Y + R_{ξ_Y}X}, α)`.
pub fn pairing_hh(geo: &PointGeometry, x: &Vector, y: &Vector, alpha: &Mat) -> f64 {
    let (xx, xy) = (geo.xi_at(x), geo.xi_at(y));
    let w = geo.r_op(&xx) * y + geo.r_op(&xy) * x;
    let v = geo.nabla_xi_at(x, y) + geo.nabla_xi_at(y, x) - geo.xi_at(&w);
    0.5 * b_pair(&v, alpha)
}

/// `⟨Π(X′, γ*), α⁺⟩ = ½B([ξ_X, γ]_m − ξ_{R_γ X}, α)`.
pub fn pairing_hv(geo: &PointGeometry, x: &Vector, gamma: &Mat, alpha: &Mat) -> f64 {
    let v = geo.m_part(&commutator(&geo.xi_at(x), gamma)) - geo.xi_at(&(geo.r_op(gamma) * x));
    0.5 * b_pair(&v, alpha)
}

/// Pairings of `Π` with the `α⁺` over the g̃-frame, the `g` basis and the
/// `m` basis: `hh[i][j][a]`, `hv[i][b][a]`, `vv[b][c][a]`.
#[derive(Debug, Clone, Serialize)]
pub struct SecondFundamentalPairing {
    pub hh: Vec<Vec<Vec<f64>>>,
    pub hv: Vec<Vec<Vec<f64>>>,
    pub vv: Vec<Vec<Vec<f64>>>,
    /// Largest difference to the same pairings taken from `∇^{SO(M)}`.
    pub ambient_defect: f64,
    /// Largest `|hh[i][j] − hh[j][i]|`.
    pub symmetry_defect: f64,
}

impl SecondFundamentalPairing {
    pub fn max_abs(&self) -> f64 {
        let m3 = |t: &Vec<Vec<Vec<f64>>>| t.iter().flatten().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        m3(&self.hh).max(m3(&self.hv)).max(m3(&self.vv))
    }

    pub fn max_hh(&self) -> f64 {
        self.hh.iter().flatten().flatten().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn max_vv(&self) -> f64 {
        self.vv.iter().flatten().flatten().fold(0.0f64, |a, v| a.max(v.abs()))
    }
}

pub fn second_fundamental_form(geo: &PointGeometry) -> SecondFundamentalPairing {
    let es = &geo.tilde_frame;
    let gs = &geo.g_basis;
    let ms = &geo.m_basis;
    let n = geo.n;
    let zero = Mat::zeros(n, n);
    let plus: Vec<FrameBundleVector> = ms.iter().map(|a| FrameBundleVector::plus(geo, a)).collect();
    let mut defect = 0.0f64;

    let mut hh = vec![vec![vec![0.0; ms.len()]; n]; n];
    for i in 0..n {
        for j in 0..n {
            let u = LiftedField::new(es[i].clone(), zero.clone());
            let v = LiftedField::new(es[j].clone(), zero.clone());
            let amb = nabla_so_lifted(geo, &u, &v);
            for (a, alpha) in ms.iter().enumerate() {
                hh[i][j][a] = pairing_hh(geo, &es[i], &es[j], alpha);
                defect = defect.max((amb.inner(geo, &plus[a]) - hh[i][j][a]).abs());
            }
        }
    }

    let mut hv = vec![vec![vec![0.0; ms.len()]; gs.len()]; n];
    for i in 0..n {
        for (b, gamma) in gs.iter().enumerate() {
            let u = LiftedField::new(es[i].clone(), zero.clone());
            let v = LiftedField::new(Vector::zeros(n), gamma.clone());
            let amb = nabla_so_lifted(geo, &u, &v);
            // ∇^{SO}_{γ*}(X^h + ξ_X*), the other order
            let x = &es[i];
            let rev = nabla_so(geo, &Vector::zeros(n), gamma, x, &geo.xi_at(x), &Vector::zeros(n), &zero);
            for (a, alpha) in ms.iter().enumerate() {
                hv[i][b][a] = pairing_hv(geo, x, gamma, alpha);
                defect = defect.max((amb.inner(geo, &plus[a]) - hv[i][b][a]).abs());
                defect = defect.max((rev.inner(geo, &plus[a]) - hv[i][b][a]).abs());
            }
        }
    }

    let mut vv = vec![vec![vec![0.0; ms.len()]; gs.len()]; gs.len()];
    for (b, beta) in gs.iter().enumerate() {
        for (c, gamma) in gs.iter().enumerate() {
            let amb = nabla_so(geo, &Vector::zeros(n), beta, &Vector::zeros(n), gamma, &Vector::zeros(n), &zero);
            for a in 0..ms.len() {
                vv[b][c][a] = amb.inner(geo, &plus[a]);
            }
        }
    }

    let mut symmetry = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for a in 0..ms.len() {
                symmetry = symmetry.max((hh[i][j][a] - hh[j][i][a]).abs());
            }
        }
    }
    SecondFundamentalPairing { hh, hv, vv, ambient_defect: defect, symmetry_defect: symmetry }
}

/// `Σ_i (∇_{ẽ_i}ξ)_{ẽ_i} − ξ_{R_{ξ_{ẽ_i}} ẽ_i}`, an element of `m`.
pub fn minimality_residual(geo: &PointGeometry) -> Mat {
    let mut acc = Mat::zeros(geo.n, geo.n);
    for e in &geo.tilde_frame {
        let r = geo.r_op(&geo.xi_at(e)) * e;
        acc += geo.nabla_xi_at(e, e) - geo.xi_at(&r);
    }
    acc
}

/// The two harmonicity conditions and the minimality condition at a point.
#[derive(Debug, Clone, Serialize)]
pub struct HarmonicityResiduals {
    /// B-norm of `Σ (∇_{ẽ_i}ξ)_{ẽ_i} − ξ_{S(ẽ_i,ẽ_i)}`.
    pub h1: f64,
    /// g-norm of `Σ R_{ξ_{ẽ_i}} ẽ_i − S(ẽ_i,ẽ_i)`.
    pub h2: f64,
    /// B-norm of the minimality residual.
    pub min: f64,
    /// `|min − (h1 − ξ_{h2})|` as vectors; zero up to rounding.
    pub split_defect: f64,
    /// `|Σ_i ⟨∇^{SO}_{ẽ_i′} ẽ_i′, α⁺⟩ − B(min, α)|` over the `m` basis.
    pub mean_curvature_defect: f64,
}

pub fn harmonicity_residuals(geo: &PointGeometry) -> HarmonicityResiduals {
    let n = geo.n;
    let mut h1 = Mat::zeros(n, n);
    let mut h2 = Vector::zeros(n);
    for e in &geo.tilde_frame {
        let s = geo.s_at(e, e);
        h1 += geo.nabla_xi_at(e, e) - geo.xi_at(&s);
        h2 += geo.r_op(&geo.xi_at(e)) * e - s;
    }
    let min = minimality_residual(geo);
    let split_defect = (&min - (&h1 - geo.xi_at(&h2))).amax();
    // trace of Π through the ambient connection
    let zero = Mat::zeros(n, n);
    let mut trace = FrameBundleVector::generic(Vector::zeros(n), zero.clone());
    for e in &geo.tilde_frame {
        let f = LiftedField::new(e.clone(), zero.clone());
        trace = trace.add(&nabla_so_lifted(geo, &f, &f));
    }
    let mut mean = 0.0f64;
    for alpha in &geo.m_basis {
        let paired = trace.inner(geo, &FrameBundleVector::plus(geo, alpha));
        mean = mean.max((paired - b_pair(&min, alpha)).abs());
    }
    HarmonicityResiduals {
        h1: endo_norm(&h1, &geo.g, &geo.ginv),
        h2: g_norm(&geo.g, &h2),
        min: endo_norm(&min, &geo.g, &geo.ginv),
        split_defect,
        mean_curvature_defect: mean,
    }
}
