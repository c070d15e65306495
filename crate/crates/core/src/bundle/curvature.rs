//! Curvature of `P` with the induced metric, assembled from its six
//! component formulas, and the Ricci, sectional and scalar curvatures in
//! closed form and as direct traces.

use serde::Serialize;

use super::{tangent_basis, TangentP};
use crate::geometry::PointGeometry;
use crate::la::{b_pair, commutator, Mat, Vector};

fn hor(x: Vector, n: usize) -> TangentP {
    TangentP::new(x, Mat::zeros(n, n))
}

fn ver(beta: Mat) -> TangentP {
    let n = beta.nrows();
    TangentP::new(Vector::zeros(n), beta)
}

/// `R(X′,Y′)Z′`.
fn hhh(geo: &PointGeometry, x: &Vector, y: &Vector, z: &Vector) -> TangentP {
    let q = |a: &Mat, v: &Vector| geo.q_apply(a, v);
    let h = geo.rt_at(x, y) * z
        - (q(&geo.rprime_at(y, z), x) - q(&geo.rprime_at(x, z), y) - q(&geo.rprime_at(x, y), z) * 2.0) * 0.25;
    let v = (geo.d_rprime_at(y, x, z) - geo.d_rprime_at(x, y, z)) * 0.5;
    TangentP::new(h, v)
}

/// `R(X′,Y′)γ*`.
fn hhv(geo: &PointGeometry, x: &Vector, y: &Vector, gamma: &Mat) -> TangentP {
    let h = (geo.d_q_at(x, gamma, y) - geo.d_q_at(y, gamma, x)) * 0.5;
    let qy = geo.q_apply(gamma, y);
    let qx = geo.q_apply(gamma, x);
    let v = commutator(&geo.rprime_at(x, y), gamma) * 0.5 - (geo.rprime_at(x, &qy) - geo.rprime_at(y, &qx)) * 0.25;
    TangentP::new(h, v)
}

/// `R(X′,β*)Z′`.
fn hvh(geo: &PointGeometry, x: &Vector, beta: &Mat, z: &Vector) -> TangentP {
    let h = geo.d_q_at(x, beta, z) * 0.5;
    let qz = geo.q_apply(beta, z);
    let v = (geo.rprime_at(x, &qz) + commutator(beta, &geo.rprime_at(x, z))) * -0.25;
    TangentP::new(h, v)
}

/// `R(X′,β*)γ*`.
fn hvv(geo: &PointGeometry, x: &Vector, beta: &Mat, gamma: &Mat) -> TangentP {
    let qgx = geo.q_apply(gamma, x);
    let h = (geo.q_apply(&commutator(beta, gamma), x) + geo.q_apply(beta, &qgx)) * -0.25;
    hor(h, geo.n)
}

/// `R(α*,β*)Z′`.
fn vvh(geo: &PointGeometry, alpha: &Mat, beta: &Mat, z: &Vector) -> TangentP {
    let qa_qb = geo.q_apply(alpha, &geo.q_apply(beta, z));
    let qb_qa = geo.q_apply(beta, &geo.q_apply(alpha, z));
    let h = (qa_qb - qb_qa) * 0.25 + geo.q_apply(&commutator(alpha, beta), z) * 0.5;
    hor(h, geo.n)
}

/// `R(α*,β*)γ*`.
fn vvv(alpha: &Mat, beta: &Mat, gamma: &Mat) -> TangentP {
    ver(commutator(&commutator(alpha, beta), gamma) * -0.25)
}

/// `R^P(u, v)w` for `P`-tangent vectors, by multilinear expansion.
pub fn curvature_p(geo: &PointGeometry, u: &TangentP, v: &TangentP, w: &TangentP) -> TangentP {
    let (xu, bu) = (&u.x, &u.beta);
    let (xv, bv) = (&v.x, &v.beta);
    let (xw, bw) = (&w.x, &w.beta);
    hhh(geo, xu, xv, xw)
        .add(&hhv(geo, xu, xv, bw))
        .add(&hvh(geo, xu, bv, xw))
        .add(&hvv(geo, xu, bv, bw))
        .sub(&hvh(geo, xv, bu, xw))
        .sub(&hvv(geo, xv, bu, bw))
        .add(&vvh(geo, bu, bv, xw))
        .add(&vvv(bu, bv, bw))
}

/// `⟨R^P(u,v)w, z⟩`.
pub fn lowered(geo: &PointGeometry, u: &TangentP, v: &TangentP, w: &TangentP, z: &TangentP) -> f64 {
    curvature_p(geo, u, v, w).inner(geo, z)
}

/// `[skew(u,v), skew(w,z), pair exchange, Bianchi]` defects.
pub fn symmetry_defects(geo: &PointGeometry, u: &TangentP, v: &TangentP, w: &TangentP, z: &TangentP) -> [f64; 4] {
    let r = lowered(geo, u, v, w, z);
    let skew1 = (r + lowered(geo, v, u, w, z)).abs();
    let skew2 = (r + lowered(geo, u, v, z, w)).abs();
    let pair = (r - lowered(geo, w, z, u, v)).abs();
    let bianchi = curvature_p(geo, u, v, w)
        .add(&curvature_p(geo, v, w, u))
        .add(&curvature_p(geo, w, u, v))
        .max_abs();
    [skew1, skew2, pair, bianchi]
}

/// `Ric̃(X, Y) = Σ_i g̃(R̃(ẽ_i, X)Y, ẽ_i)`.
pub fn ricci_tilde(geo: &PointGeometry, x: &Vector, y: &Vector) -> f64 {
    geo.tilde_frame.iter().map(|e| geo.gt_inner(&(geo.rt_at(e, x) * y), e)).sum()
}

/// Ricci form of `P` over [`tangent_basis`] from the closed formulas.
pub fn ricci_closed(geo: &PointGeometry) -> Mat {
    let n = geo.n;
    let es = &geo.tilde_frame;
    let al = &geo.g_basis;
    let d = n + al.len();
    let mut ric = Mat::zeros(d, d);
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (&es[i], &es[j]);
            let r2: f64 = es.iter().map(|e| b_pair(&geo.rprime_at(x, e), &geo.rprime_at(y, e))).sum();
            let q2: f64 = al.iter().map(|a| geo.gt_inner(&geo.q_apply(a, x), &geo.q_apply(a, y))).sum();
            ric[(i, j)] = ricci_tilde(geo, x, y) - 0.75 * r2 + 0.25 * q2;
        }
        for (b, gamma) in al.iter().enumerate() {
            let x = &es[i];
            let div: f64 = es.iter().map(|e| geo.gt_inner(&geo.d_q_at(e, gamma, x), e)).sum();
            let tr: f64 = es.iter().map(|e| geo.gt_inner(&geo.d_q_at(x, gamma, e), e)).sum();
            ric[(i, n + b)] = 0.5 * (div - tr);
            ric[(n + b, i)] = ric[(i, n + b)];
        }
    }
    for (b, beta) in al.iter().enumerate() {
        for (c, gamma) in al.iter().enumerate() {
            let qq: f64 = es.iter().map(|e| geo.gt_inner(&geo.q_apply(beta, e), &geo.q_apply(gamma, e))).sum();
            let bb: f64 = al.iter().map(|a| b_pair(&commutator(a, beta), &commutator(a, gamma))).sum();
            ric[(n + b, n + c)] = 0.25 * (qq + bb);
        }
    }
    ric
}

/// Ricci form over [`tangent_basis`] as `Σ_e ⟨R^P(e, u)v, e⟩`.
pub fn ricci_direct(geo: &PointGeometry) -> Mat {
    let basis = tangent_basis(geo);
    let d = basis.len();
    Mat::from_fn(d, d, |i, j| basis.iter().map(|e| lowered(geo, e, &basis[i], &basis[j], e)).sum())
}

/// Scalar curvature of `P` from the closed formula.
pub fn scalar_closed(geo: &PointGeometry) -> f64 {
    let es = &geo.tilde_frame;
    let al = &geo.g_basis;
    let s_tilde: f64 = es.iter().map(|e| ricci_tilde(geo, e, e)).sum();
    let mut r2 = 0.0;
    for x in es {
        for y in es {
            let r = geo.rprime_at(x, y);
            r2 += b_pair(&r, &r);
        }
    }
    let mut q2 = 0.0;
    for a in al {
        for e in es {
            let q = geo.q_apply(a, e);
            q2 += geo.gt_inner(&q, &q);
        }
    }
    let mut c2 = 0.0;
    for a in al {
        for b in al {
            let c = commutator(a, b);
            c2 += b_pair(&c, &c);
        }
    }
    s_tilde - 0.75 * r2 + 0.5 * q2 + 0.25 * c2
}

/// Sectional curvature `⟨R^P(u,v)v,u⟩` of an orthonormal pair.
pub fn sectional_direct(geo: &PointGeometry, u: &TangentP, v: &TangentP) -> f64 {
    lowered(geo, u, v, v, u)
}

/// `κ̃(X, Y) − ¾‖R′(X, Y)‖²` for g̃-orthonormal `X, Y`.
pub fn sectional_hh(geo: &PointGeometry, x: &Vector, y: &Vector) -> f64 {
    let r = geo.rprime_at(x, y);
    geo.gt_inner(&(geo.rt_at(x, y) * y), x) - 0.75 * b_pair(&r, &r)
}

/// `¼‖Q_β X‖²_g̃`.
pub fn sectional_hv(geo: &PointGeometry, x: &Vector, beta: &Mat) -> f64 {
    let q = geo.q_apply(beta, x);
    0.25 * geo.gt_inner(&q, &q)
}

/// `¼‖[α, β]‖²`.
pub fn sectional_vv(alpha: &Mat, beta: &Mat) -> f64 {
    let c = commutator(alpha, beta);
    0.25 * b_pair(&c, &c)
}

/// Closed forms against direct traces at one point.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureSummary {
    pub ricci_defect: f64,
    pub scalar_closed: f64,
    pub scalar_direct: f64,
    pub sectional_defect: f64,
    /// Smallest `Ric^P(α*, α*)` over the `g` basis.
    pub min_vertical_ricci: f64,
    /// Smallest sectional curvature over basis planes.
    pub min_sectional: f64,
    /// Largest sectional curvature over basis planes.
    pub max_sectional: f64,
}

pub fn summary(geo: &PointGeometry) -> CurvatureSummary {
    let closed = ricci_closed(geo);
    let direct = ricci_direct(geo);
    let ricci_defect = (&closed - &direct).amax();
    let scalar_direct = direct.trace();
    let basis = tangent_basis(geo);
    let n = geo.n;
    let mut sectional_defect = 0.0f64;
    let mut min_sectional = f64::INFINITY;
    let mut max_sectional = f64::NEG_INFINITY;
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            let direct = sectional_direct(geo, &basis[i], &basis[j]);
            let closed = match (i < n, j < n) {
                (true, true) => sectional_hh(geo, &basis[i].x, &basis[j].x),
                (true, false) => sectional_hv(geo, &basis[i].x, &basis[j].beta),
                _ => sectional_vv(&basis[i].beta, &basis[j].beta),
            };
            sectional_defect = sectional_defect.max((direct - closed).abs());
            min_sectional = min_sectional.min(direct);
            max_sectional = max_sectional.max(direct);
        }
    }
    let min_vertical_ricci = (n..basis.len()).map(|a| direct[(a, a)]).fold(f64::INFINITY, f64::min);
    CurvatureSummary {
        ricci_defect,
        scalar_closed: scalar_closed(geo),
        scalar_direct,
        sectional_defect,
        min_vertical_ricci,
        min_sectional,
        max_sectional,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffgeo::DiffSettings;
    use crate::scenarios::{find, sample};

    #[test]
    fn flat_vertical_sectional_is_one_eighth() {
        let sc = find("flat4-const").unwrap();
        let pt = &sample(&sc, 1, 2).unwrap()[0];
        let geo = PointGeometry::compute(pt, &sc.projector, &DiffSettings::analytic()).unwrap();
        let e = |i: usize| {
            let mut v = Vector::zeros(4);
            v[i] = 1.0;
            v
        };
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = crate::la::wedge_endo(&e(1), &e(2), &geo.g) * s;
        let b = crate::la::wedge_endo(&e(1), &e(3), &geo.g) * s;
        let k = sectional_direct(&geo, &TangentP::vertical(&a), &TangentP::vertical(&b));
        assert!((k - 0.125).abs() < 1e-15);
        assert!((sectional_vv(&a, &b) - 0.125).abs() < 1e-15);
    }
}
