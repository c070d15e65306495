//! Levi-Civita connections of `SO(M)` and of `P`, evaluated on lifted
//! fields with coordinate-constant data.

use super::{project_tangent, FrameBundleVector, TangentP};
use crate::geometry::PointGeometry;
use crate::la::{b_pair, commutator, Mat, Vector};

/// The `P`-tangent field `X′ + β*` with `X` coordinate-constant and
/// `β = (C)_g` for a coordinate-constant endomorphism `C`.
#[derive(Debug, Clone)]
pub struct LiftedField {
    pub x: Vector,
    pub c: Mat,
}

impl LiftedField {
    pub fn new(x: Vector, c: Mat) -> Self {
        Self { x, c }
    }

    pub fn beta(&self, geo: &PointGeometry) -> Mat {
        geo.g_part(&self.c)
    }

    pub fn at(&self, geo: &PointGeometry) -> TangentP {
        TangentP::new(self.x.clone(), self.beta(geo))
    }

    /// `∇′_X β`.
    pub fn nabla_prime_beta(&self, geo: &PointGeometry, x: &Vector) -> Mat {
        geo.nabla_prime_projected(x, &self.c)
    }
}

/// `∇^P_U V` from the connection formulas:
/// `∇_{X′}Y′ = (∇̃_XY)′ − ½R′(X,Y)*`, `∇_{X′}γ* = ½(Q_γX)′ + (∇′_Xγ)*`,
/// `∇_{β*}Y′ = ½(Q_βY)′`, `∇_{β*}γ* = −½[β,γ]*`.
pub fn nabla_p(geo: &PointGeometry, u: &LiftedField, v: &LiftedField) -> TangentP {
    let (x, beta) = (&u.x, u.beta(geo));
    let (y, gamma) = (&v.x, v.beta(geo));
    let hor = geo.nabla_tilde(x, y) + geo.q_apply(&gamma, x) * 0.5 + geo.q_apply(&beta, y) * 0.5;
    let ver = geo.rprime_at(x, y) * -0.5 + v.nabla_prime_beta(geo, x) - commutator(&beta, &gamma) * 0.5;
    TangentP::new(hor, ver)
}

/// `∇^{SO(M)}_{X^h + α*}(Y^h + A*)` for a field whose Levi-Civita
/// derivatives along `X` are `dy = ∇_X Y` and `da = ∇_X A`:
/// `(∇_XY)^h − ½R(X,Y)* + ½R_A(X)^h + (∇_XA)* + ½R_α(Y)^h − ½[α,A]*`.
#[allow(clippy::too_many_arguments)]
pub fn nabla_so(
    geo: &PointGeometry,
    x: &Vector,
    alpha: &Mat,
    y: &Vector,
    a: &Mat,
    dy: &Vector,
    da: &Mat,
) -> FrameBundleVector {
    let hor = dy + geo.r_op(a) * x * 0.5 + geo.r_op(alpha) * y * 0.5;
    let ver = geo.r_at(x, y) * -0.5 + da - commutator(alpha, a) * 0.5;
    FrameBundleVector::generic(hor, ver)
}

/// `∇^{SO(M)}_U V` for lifted `P`-fields, written in `SO(M)` terms:
/// `U = X^h + (ξ_X + β)*` and `V = Y^h + (ξ_Y + γ)*`.
pub fn nabla_so_lifted(geo: &PointGeometry, u: &LiftedField, v: &LiftedField) -> FrameBundleVector {
    let x = &u.x;
    let alpha = geo.xi_at(x) + u.beta(geo);
    let y = &v.x;
    let a = geo.xi_at(y) + v.beta(geo);
    let dy = geo.nabla(x, y);
    let da = geo.nabla_of_xi_field(x, y) + geo.nabla_projected(x, &v.c);
    nabla_so(geo, x, &alpha, y, &a, &dy, &da)
}

/// `|(∇^{SO}_U V)^⊤ − ∇^P_U V|`: the connection formulas against the
/// tangent projection of the ambient connection.
pub fn gauss_defect(geo: &PointGeometry, u: &LiftedField, v: &LiftedField) -> f64 {
    let ambient = project_tangent(geo, &nabla_so_lifted(geo, u, v));
    let intrinsic = nabla_p(geo, u, v).to_frame_vector(geo);
    ambient.sub(&intrinsic).max_abs()
}

/// `U⟨V,W⟩ − ⟨∇_U V, W⟩ − ⟨V, ∇_U W⟩` with the left side differentiated
/// from `∂g̃` and `∂p`.
pub fn compatibility_defect(geo: &PointGeometry, u: &LiftedField, v: &LiftedField, w: &LiftedField) -> f64 {
    let x = &u.x;
    let mut dgt = Mat::zeros(geo.n, geo.n);
    for (a, d) in geo.dgt.iter().enumerate() {
        if x[a] != 0.0 {
            dgt += d * x[a];
        }
    }
    let (gv, gw) = (v.beta(geo), w.beta(geo));
    let lhs = v.x.dot(&(dgt * &w.x)) + b_pair(&geo.d_g_part(x, &v.c), &gw) + b_pair(&gv, &geo.d_g_part(x, &w.c));
    let rhs = nabla_p(geo, u, v).inner(geo, &w.at(geo)) + v.at(geo).inner(geo, &nabla_p(geo, u, w));
    (lhs - rhs).abs()
}

/// `∇_U V − ∇_V U − [U, V]` with
/// `[X′,Y′] = −R′(X,Y)*`, `[X′,γ*] = (∇′_Xγ)*`, `[β*,γ*] = −[β,γ]*`.
pub fn torsion_defect(geo: &PointGeometry, u: &LiftedField, v: &LiftedField) -> f64 {
    let (beta, gamma) = (u.beta(geo), v.beta(geo));
    let bracket = TangentP::new(
        Vector::zeros(geo.n),
        -geo.rprime_at(&u.x, &v.x) + v.nabla_prime_beta(geo, &u.x)
            - u.nabla_prime_beta(geo, &v.x)
            - commutator(&beta, &gamma),
    );
    nabla_p(geo, u, v).sub(&nabla_p(geo, v, u)).sub(&bracket).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffgeo::DiffSettings;
    use crate::scenarios::{find, sample};

    #[test]
    fn flat_vertical_connection_is_half_bracket() {
        let sc = find("flat4-const").unwrap();
        let pt = &sample(&sc, 1, 1).unwrap()[0];
        let geo = PointGeometry::compute(pt, &sc.projector, &DiffSettings::analytic()).unwrap();
        let zero = Vector::zeros(4);
        let (a, b) = (&geo.g_basis[0], &geo.g_basis[1]);
        let u = LiftedField::new(zero.clone(), a.clone());
        let v = LiftedField::new(zero, b.clone());
        let got = nabla_p(&geo, &u, &v);
        let hand = (a * b - b * a) * -0.5;
        assert!((got.beta - hand).amax() < 1e-15);
        assert_eq!(got.x.amax(), 0.0);
    }
}
