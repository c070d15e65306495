//! Names, tolerance classes and descriptions of every reported check.

use serde::{Deserialize, Serialize};

use crate::scenarios::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Identity,
    Curvature,
    Minimality,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Identity => "identity",
            Suite::Curvature => "curvature",
            Suite::Minimality => "minimality",
        }
    }

    pub fn all() -> [Suite; 3] {
        [Suite::Identity, Suite::Curvature, Suite::Minimality]
    }
}

impl std::str::FromStr for Suite {
    type Err = crate::GeomError;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "identity" => Ok(Suite::Identity),
            "curvature" => Ok(Suite::Curvature),
            "minimality" => Ok(Suite::Minimality),
            other => Err(crate::GeomError::Config(format!(
                "unknown suite `{other}` (expected identity, curvature or minimality)"
            ))),
        }
    }
}

/// Where a check takes its threshold from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TolClass {
    Diff,
    Curv,
    Frame,
    Structure,
    /// Ten times the structure tolerance.
    Structure10,
    Gate,
    GateSecond,
    Fixed(f64),
}

impl TolClass {
    pub fn resolve(self, t: &Tolerances) -> f64 {
        match self {
            TolClass::Diff => t.diff,
            TolClass::Curv => t.curv,
            TolClass::Frame => t.frame,
            TolClass::Structure => t.structure,
            TolClass::Structure10 => 10.0 * t.structure,
            TolClass::Gate => t.gate,
            TolClass::GateSecond => t.gate_second,
            TolClass::Fixed(v) => v,
        }
    }

    fn describe(self) -> String {
        match self {
            TolClass::Diff => "diff".into(),
            TolClass::Curv => "curv".into(),
            TolClass::Frame => "frame".into(),
            TolClass::Structure => "structure".into(),
            TolClass::Structure10 => "10 x structure".into(),
            TolClass::Gate => "gate".into(),
            TolClass::GateSecond => "gate_second".into(),
            TolClass::Fixed(v) => format!("fixed {v:e}"),
        }
    }
}

/// Static description of one check.
#[derive(Debug, Clone, Copy)]
pub struct CheckSpec {
    pub name: &'static str,
    pub suite: Suite,
    pub class: TolClass,
    pub summary: &'static str,
    pub formula: &'static str,
}

const fn spec(name: &'static str, suite: Suite, class: TolClass, summary: &'static str, formula: &'static str) -> CheckSpec {
    CheckSpec { name, suite, class, summary, formula }
}

use Suite::{Curvature as C, Identity as I, Minimality as M};

pub const CHECKS: &[CheckSpec] = &[
    spec("metric.christoffel_symmetry", I, TolClass::Diff,
        "Levi-Civita coefficients are symmetric in their lower indices.",
        "max |Γ^k_ij − Γ^k_ji|"),
    spec("metric.compatibility", I, TolClass::Diff,
        "Levi-Civita connection is metric.",
        "max |∂_a g_ij − g_kj Γ^k_ai − g_ik Γ^k_aj|"),
    spec("metric.riemann_symmetries", I, TolClass::Curv,
        "Riemann tensor symmetries and the first Bianchi identity.",
        "R_ijkl = −R_jikl = −R_ijlk = R_klij, R_ijkl + R_jkil + R_kijl = 0"),
    spec("structure.projector", I, TolClass::Frame,
        "The projector onto E is idempotent, g-symmetric and of the declared rank.",
        "|p² − p|, |g p − (g p)ᵀ|, |tr p − m|"),
    spec("structure.frames", I, TolClass::Frame,
        "The adapted frame is g-orthonormal and the transferred frame is g̃-orthonormal.",
        "max |g(e_i, e_j) − δ_ij|, max |g̃(ẽ_i, ẽ_j) − δ_ij|"),
    spec("torsion.in_m", I, TolClass::Structure,
        "The intrinsic torsion takes values in skew endomorphisms swapping E and F.",
        "|(ξ_X)_g|, |ξ_X + ξ_X*|"),
    spec("torsion.defining", I, TolClass::Structure,
        "Intrinsic torsion from its defining formula on random vector fields.",
        "ξ_X Y = (∇_X Y_F)_E + (∇_X Y_E)_F"),
    spec("torsion.minimal_connection", I, TolClass::Structure,
        "The minimal connection differs from Levi-Civita by the intrinsic torsion.",
        "ξ_X Y = ∇_X Y − ∇′_X Y"),
    spec("torsion.nabla_g_part", I, TolClass::Curv,
        "g-part of the covariant derivative of the torsion.",
        "(∇_X ξ_Y)_g = [ξ_X, ξ_Y]_g"),
    spec("torsion.nabla_m_part", I, TolClass::Curv,
        "m-part of the covariant derivative of the torsion.",
        "(∇_X ξ_Y)_m = ∇′_X ξ_Y + [ξ_X, ξ_Y]_m"),
    spec("curvature.g_part", I, TolClass::Curv,
        "g-part of the Riemann curvature against the curvature of the minimal connection.",
        "R(X,Y)_g = R′(X,Y) + [ξ_X, ξ_Y]_g"),
    spec("curvature.m_part", I, TolClass::Curv,
        "m-part of the Riemann curvature for commuting fields.",
        "R(X,Y)_m = ∇′_X ξ_Y − ∇′_Y ξ_X + [ξ_X, ξ_Y]_m"),
    spec("curvature.decomposition", I, TolClass::Curv,
        "Full curvature decomposition through the minimal connection.",
        "R(X,Y) = R′(X,Y) + (∇_X ξ)_Y − (∇_Y ξ)_X − [ξ_X, ξ_Y]"),
    spec("curvature.minimal_routes", I, TolClass::Curv,
        "Curvature of the minimal connection from the decomposition and from its own coefficients.",
        "R(∂_i,∂_j)_g − [ξ_i, ξ_j]_g = ∂_i Γ′_j − ∂_j Γ′_i + [Γ′_i, Γ′_j]"),
    spec("curvature_operator.duality", I, TolClass::Curv,
        "The curvature operator R_α is dual to the curvature endomorphism.",
        "g(R_α X, Y) = B(α, R(X,Y)),  R_α = Σ_i R(e_i, α e_i)"),
    spec("transfer.xi_dot", I, TolClass::Structure,
        "The contraction ξ·α over an orthonormal frame against its dual characterisation.",
        "g(ξ·α, X) = −B(α, ξ_X),  ξ·α = −Σ_i B(ξ_{e_i}, α) e_i"),
    spec("transfer.metric", I, TolClass::Structure,
        "The transfer tensor realises the bundle metric on horizontal lifts and is symmetric positive definite.",
        "g_SO(X^h′, Y^h′) = g(X, L Y),  L = Lᵀ_g > 0"),
    spec("transfer.nabla_l", I, TolClass::Curv,
        "Covariant derivative of the transfer tensor.",
        "g((∇_X L)Y, Z) = B((∇_X ξ)_Y, ξ_Z) + B((∇_X ξ)_Z, ξ_Y)"),
    spec("transfer.difference_tensor", I, TolClass::Curv,
        "The difference of the two Levi-Civita connections, taken from the metric g̃, satisfies the torsion formula.",
        "2 g(∇̃_X Y − ∇_X Y, L Z) = B((∇_Xξ)_Y + (∇_Yξ)_X, ξ_Z) + B((∇_Xξ)_Z − (∇_Zξ)_X, ξ_Y) + B((∇_Yξ)_Z − (∇_Zξ)_Y, ξ_X)"),
    spec("transfer.difference_components", I, TolClass::Curv,
        "S solved from the torsion formula against Γ̃ − Γ, componentwise.",
        "max |S^k_ij − (Γ̃^k_ij − Γ^k_ij)|"),
    spec("q.duality", I, TolClass::Curv,
        "The operator Q_α is dual to the curvature of the minimal connection.",
        "g̃(Q_α X, Y) = B(R′(X,Y), α),  Q_α X = L⁻¹(R_α X − ξ·[ξ_X, α]_m)"),
    spec("q.skew", I, TolClass::Curv,
        "Q_α is g̃-skew.",
        "g̃(Q_α X, Y) + g̃(X, Q_α Y) = 0"),
    spec("q.derivative_tensoriality", I, TolClass::GateSecond,
        "D_X Q evaluated through two different extensions of α agrees.",
        "(D_X Q)_α = ∇̃_X(Q_α) − Q_{∇′_X α} is independent of the extension of α"),
    spec("bundle.projections", I, TolClass::Frame,
        "Tangent and normal projections onto the reduced bundle are complementary, idempotent and orthogonal.",
        "π_T + π_N = id, π_T² = π_T, π_N² = π_N, g_SO(π_T V, π_N V) = 0"),
    spec("bundle.gauss", I, TolClass::Structure10,
        "The connection formulas of the reduced bundle equal the tangent projection of the frame-bundle connection.",
        "(∇^SO_U V)^T = ∇^P_U V"),
    spec("bundle.compatibility", I, TolClass::Structure10,
        "The connection of the reduced bundle is metric.",
        "U⟨V,W⟩ = ⟨∇^P_U V, W⟩ + ⟨V, ∇^P_U W⟩"),
    spec("bundle.torsion_free", I, TolClass::Structure10,
        "The connection of the reduced bundle is torsion free.",
        "∇^P_U V − ∇^P_V U = [U, V]"),
    spec("rp.symmetries", C, TolClass::Structure10,
        "Curvature of the reduced bundle has the Riemannian symmetries.",
        "skew in (U,V), skew in (W,Z) after lowering, pair exchange, first Bianchi"),
    spec("rp.ricci", C, TolClass::Structure10,
        "Closed-form Ricci tensor of the reduced bundle against the trace of its curvature.",
        "Ric^P(u,v) = Σ_e ⟨R^P(e,u)v, e⟩ over {ẽ_i′, α_A*}"),
    spec("rp.scalar", C, TolClass::Structure10,
        "Closed-form scalar curvature of the reduced bundle against the trace of its Ricci tensor.",
        "s^P = s̃ − ¾Σ|R′(ẽ_i,ẽ_j)|² + ½Σ|Q_{α_A} ẽ_i|² + ¼Σ|[α_A,α_B]|²"),
    spec("rp.sectional", C, TolClass::Structure10,
        "Closed-form sectional curvatures of the reduced bundle against its curvature tensor.",
        "κ(X′,Y′) = κ̃(X,Y) − ¾|R′(X,Y)|², κ(X′,β*) = ¼|Q_β X|², κ(α*,β*) = ¼|[α,β]|²"),
    spec("rp.vertical_ricci", C, TolClass::Structure10,
        "Ricci curvature of the reduced bundle is non-negative in vertical directions.",
        "max(0, −Ric^P(α*, α*))"),
    spec("rp.flat_sectional", C, TolClass::Structure10,
        "Integrable structure on a flat manifold: sectional curvatures of the reduced bundle are non-negative.",
        "max(0, −min κ^P) where ξ = 0 and R = 0"),
    spec("rp.scalar_positive", C, TolClass::Fixed(0.0),
        "Flat minimal connection and positive s̃ force positive scalar curvature of the reduced bundle.",
        "s^P > 0 where R′ = 0 and s̃ > 0"),
    spec("rp.sectional_spread", C, TolClass::Fixed(f64::INFINITY),
        "Spread of sectional curvatures over basis planes; positive values witness non-constant curvature.",
        "max κ^P − min κ^P"),
    spec("xi.norm", M, TolClass::Fixed(1e-9),
        "Size of the intrinsic torsion; vanishes for integrable structures.",
        "max |ξ^k_ij|"),
    spec("sff.max_entry", M, TolClass::Fixed(1e-8),
        "Largest entry of the second fundamental form table; vanishes for totally geodesic reductions.",
        "max |g_SO(Π(u,v), α⁺)|"),
    spec("sff.ambient", M, TolClass::Structure10,
        "Second fundamental form formulas against the normal component of the frame-bundle connection.",
        "⟨Π(X′,Y′), α⁺⟩ = ½B((∇_Xξ)_Y + (∇_Yξ)_X − ξ_{R_{ξ_X}Y + R_{ξ_Y}X}, α), ⟨Π(X′,γ*), α⁺⟩ = ½B([ξ_X,γ]_m − ξ_{R_γ X}, α)"),
    spec("sff.symmetry", M, TolClass::Structure10,
        "Second fundamental form is symmetric.",
        "⟨Π(X′,Y′), α⁺⟩ = ⟨Π(Y′,X′), α⁺⟩"),
    spec("min_residual", M, TolClass::Gate,
        "Minimality condition of the reduced bundle (B-norm).",
        "|Σ_i (∇_{ẽ_i} ξ)_{ẽ_i} − ξ_{R_{ξ_{ẽ_i}} ẽ_i}|_B"),
    spec("h1", M, TolClass::Gate,
        "First harmonicity condition of the Gauss section (B-norm).",
        "|Σ_i (∇_{ẽ_i} ξ)_{ẽ_i} − ξ_{S(ẽ_i, ẽ_i)}|_B"),
    spec("h2", M, TolClass::Gate,
        "Second harmonicity condition of the Gauss section (g-norm).",
        "|Σ_i R_{ξ_{ẽ_i}} ẽ_i − S(ẽ_i, ẽ_i)|_g"),
    spec("harmonic.split", M, TolClass::Structure10,
        "The minimality residual splits into the two harmonicity residuals.",
        "min = h1 − ξ_{h2}"),
    spec("harmonic.mean_curvature", M, TolClass::Structure10,
        "Minimality residual against the trace of the frame-bundle connection over the transferred frame.",
        "Σ_i ⟨∇^SO_{ẽ_i′} ẽ_i′, α⁺⟩ = B(min, α)"),
    spec("harmonic.equivalence", M, TolClass::Fixed(0.5),
        "Minimality holds exactly when both harmonicity conditions hold (1 marks a disagreement).",
        "[min ≤ tol] = [h1 ≤ tol and h2 ≤ tol]"),
    spec("harmonic.referee_ratio", M, TolClass::Fixed(f64::INFINITY),
        "Where h1 passes, the constant C with h2 = C·tol.",
        "h2 / tol whenever h1 ≤ tol"),
    spec("expect.non_minimal", M, TolClass::Fixed(1e-3),
        "A scenario expected to be non-minimal has a minimality residual above the threshold somewhere on its sample.",
        "max over points of min_residual > threshold"),
    spec("expect.non_harmonic", M, TolClass::Fixed(1e-3),
        "A scenario expected to be non-minimal has a harmonicity residual above the threshold somewhere on its sample.",
        "max over points of max(h1, h2) > threshold"),
];

pub fn lookup(name: &str) -> Option<&'static CheckSpec> {
    CHECKS.iter().find(|c| c.name == name)
}

/// Text printed by `explain`.
pub fn explain(name: &str) -> Option<String> {
    let c = lookup(name)?;
    Some(format!(
        "{}\n  suite:     {}\n  tolerance: {}\n  {}\n  formula:   {}\n",
        c.name,
        c.suite.as_str(),
        c.class.describe(),
        c.summary,
        c.formula
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_explained() {
        for (i, a) in CHECKS.iter().enumerate() {
            assert!(CHECKS[i + 1..].iter().all(|b| b.name != a.name), "duplicate {}", a.name);
            assert!(explain(a.name).unwrap().contains(a.formula));
        }
        assert!(explain("no.such.check").is_none());
    }
}
