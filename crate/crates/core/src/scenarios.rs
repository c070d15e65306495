//! Built-in catalogue of charts, distributions and expectations.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diffgeo::backend::Backend;
use crate::diffgeo::chart::{Chart, ChartPoint, DomainBox, MatrixExpr, SmoothMap};
use crate::error::{GeomError, Result};
use crate::gstructure::ProjectorField;
use crate::jet::Real;

/// Residual tolerances for one backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Christoffel symmetry and metric compatibility.
    pub diff: f64,
    /// Riemann symmetries and Bianchi.
    pub curv: f64,
    /// Orthonormality and projector algebra.
    pub frame: f64,
    /// Torsion, transfer and operator identities.
    pub structure: f64,
    /// Minimality and harmonicity residuals.
    pub gate: f64,
    /// Quantities built from second derivatives of the torsion (R^P, D Q).
    pub gate_second: f64,
}

impl Tolerances {
    pub fn for_backend(backend: Backend) -> Self {
        if backend.is_fd() {
            Self { diff: 1e-5, curv: 1e-4, frame: 1e-10, structure: 1e-5, gate: 1e-4, gate_second: 1e-3 }
        } else {
            Self { diff: 1e-7, curv: 1e-6, frame: 1e-10, structure: 1e-7, gate: 1e-6, gate_second: 1e-5 }
        }
    }

    /// Sets one tolerance by name.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(GeomError::Config(format!("tolerance `{name}` must be positive, got {value}")));
        }
        let slot = match name {
            "diff" => &mut self.diff,
            "curv" => &mut self.curv,
            "frame" => &mut self.frame,
            "structure" => &mut self.structure,
            "gate" => &mut self.gate,
            "gate_second" => &mut self.gate_second,
            _ => return Err(GeomError::Config(format!("unknown tolerance `{name}`"))),
        };
        *slot = value;
        Ok(())
    }
}

/// What a scenario is expected to show.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Expectations {
    pub xi_zero: bool,
    pub minimal: bool,
    pub non_minimal: bool,
    pub totally_geodesic: bool,
}

impl Expectations {
    pub fn is_consistent(&self) -> bool {
        let integrable_ok = !self.xi_zero || (self.minimal && self.totally_geodesic);
        integrable_ok && !(self.minimal && self.non_minimal)
    }

    pub fn flags(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.xi_zero {
            out.push("xi_zero");
        }
        if self.minimal {
            out.push("minimal");
        }
        if self.non_minimal {
            out.push("non_minimal");
        }
        if self.totally_geodesic {
            out.push("totally_geodesic");
        }
        out
    }
}

/// Chart, distribution and sampling box.
#[derive(Clone)]
pub struct Scenario {
    pub id: &'static str,
    pub description: &'static str,
    pub chart: Arc<Chart>,
    pub projector: ProjectorField,
    pub sample_domain: DomainBox,
    pub backend: Backend,
    pub expectations: Expectations,
    pub default_points: usize,
}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scenario").field("id", &self.id).field("dim", &self.chart.dim).finish()
    }
}

impl Scenario {
    pub fn dim(&self) -> usize {
        self.chart.dim
    }

    pub fn rank(&self) -> usize {
        self.projector.rank
    }

    pub fn tolerances(&self, backend: Backend) -> Tolerances {
        Tolerances::for_backend(backend)
    }

    pub fn point(&self, coords: Vec<f64>) -> Result<ChartPoint> {
        self.chart.point(coords)
    }
}

/// Seeded uniform points inside `sc.sample_domain`, at least the chart
/// margin away from its faces.
pub fn sample(sc: &Scenario, count: usize, seed: u64) -> Result<Vec<ChartPoint>> {
    if count == 0 {
        return Err(GeomError::Config("point count must be at least 1".into()));
    }
    let margin = sc.chart.margin;
    let dom = &sc.sample_domain;
    if dom.lo.iter().zip(&dom.hi).any(|(lo, hi)| hi - lo <= 2.0 * margin) {
        return Err(GeomError::EmptyDomain { scenario: sc.id.to_string() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ id_hash(sc.id));
    (0..count)
        .map(|_| {
            let x = dom
                .lo
                .iter()
                .zip(&dom.hi)
                .map(|(&lo, &hi)| rng.gen_range((lo + margin)..(hi - margin)))
                .collect();
            sc.chart.point(x)
        })
        .collect()
}

/// FNV-1a, so that scenarios sharing a seed still get unrelated points.
fn id_hash(id: &str) -> u64 {
    id.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// All shipped scenarios, in a fixed order.
pub fn catalogue() -> Vec<Scenario> {
    vec![flat4_const(), product_s2xr(), s3_reeb(), s7_hopf(), torus_skew()]
}

pub fn find(id: &str) -> Result<Scenario> {
    catalogue()
        .into_iter()
        .find(|s| s.id == id)
        .ok_or_else(|| GeomError::Config(format!("unknown scenario `{id}`")))
}

pub fn ids() -> Vec<&'static str> {
    catalogue().iter().map(|s| s.id).collect()
}

fn zero<R: Real>() -> R {
    R::cst(0.0)
}

fn sq<R: Real>(x: &R) -> R {
    x.clone() * x.clone()
}

fn norm2<R: Real>(u: &[R]) -> R {
    u.iter().fold(zero(), |acc, x| acc + sq(x))
}

/// `V (gV)ᵀ / g(V, V)` for one vector field, row-major.
fn line_projector<R: Real>(v: &[R], g_diag: &[R]) -> Vec<R> {
    let n = v.len();
    let gv: Vec<R> = v.iter().zip(g_diag).map(|(a, b)| a.clone() * b.clone()).collect();
    let len2 = v.iter().zip(&gv).fold(zero::<R>(), |acc, (a, b)| acc + a.clone() * b.clone());
    let inv = len2.recip();
    let mut out = Vec::with_capacity(n * n);
    for vi in v {
        for gj in &gv {
            out.push(vi.clone() * gj.clone() * inv.clone());
        }
    }
    out
}

/// `Σ_k V_k (g V_k)ᵀ` for fields that are g-orthonormal identically.
fn orthonormal_projector<R: Real>(vs: &[Vec<R>], g_diag: &[R]) -> Vec<R> {
    let n = g_diag.len();
    let mut out = vec![zero::<R>(); n * n];
    for v in vs {
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = out[i * n + j].clone() + v[i].clone() * v[j].clone() * g_diag[j].clone();
            }
        }
    }
    out
}

fn diag<R: Real>(d: &[R]) -> Vec<R> {
    let n = d.len();
    let mut out = vec![zero::<R>(); n * n];
    for (i, v) in d.iter().enumerate() {
        out[i * n + i] = v.clone();
    }
    out
}

/// Inverse stereographic projection from the pole `e_{n+1}` onto the unit
/// sphere in `ℝ^{n+1}`.
pub fn stereographic_embedding<R: Real>(u: &[R]) -> Vec<R> {
    let r2 = norm2(u);
    let inv = (r2.clone() + 1.0).recip();
    let mut x: Vec<R> = u.iter().map(|ui| ui.clone() * inv.clone() * 2.0).collect();
    x.push((r2 - 1.0) * inv);
    x
}

/// Chart components of the sphere-tangent ambient field `v` at `u`:
/// `(1 + |u|²)/2 · (v' + u v_{n+1})`.
pub fn stereographic_pushforward<R: Real>(u: &[R], v: &[R]) -> Vec<R> {
    let n = u.len();
    let half = (norm2(u) + 1.0) * 0.5;
    (0..n).map(|i| (v[i].clone() + u[i].clone() * v[n].clone()) * half.clone()).collect()
}

/// Conformal factor `4/(1 + |u|²)²` of the round metric.
fn round_factor<R: Real>(u: &[R]) -> R {
    (norm2(u) + 1.0).powi(-2) * 4.0
}

/// Left multiplication by `i`, `j`, `k` on each quaternion block of `x`.
pub fn quaternionic_fields<R: Real>(x: &[R]) -> [Vec<R>; 3] {
    let mut fi = Vec::with_capacity(x.len());
    let mut fj = Vec::with_capacity(x.len());
    let mut fk = Vec::with_capacity(x.len());
    for q in x.chunks(4) {
        let (a, b, c, d) = (q[0].clone(), q[1].clone(), q[2].clone(), q[3].clone());
        fi.extend([-b.clone(), a.clone(), -d.clone(), c.clone()]);
        fj.extend([-c.clone(), d.clone(), a.clone(), -b.clone()]);
        fk.extend([-d, -c, b, a]);
    }
    [fi, fj, fk]
}

/// The Reeb field `(−x₂, x₁, −x₄, x₃)` of the round `S³`.
pub fn reeb_field<R: Real>(x: &[R]) -> Vec<R> {
    vec![-x[1].clone(), x[0].clone(), -x[3].clone(), x[2].clone()]
}

struct FlatMetric(usize);
impl MatrixExpr for FlatMetric {
    fn shape(&self) -> (usize, usize) {
        (self.0, self.0)
    }
    fn eval<R: Real>(&self, _x: &[R]) -> Vec<R> {
        diag(&vec![R::cst(1.0); self.0])
    }
}

struct ConstantProjector(Vec<f64>);
impl MatrixExpr for ConstantProjector {
    fn shape(&self) -> (usize, usize) {
        (self.0.len(), self.0.len())
    }
    fn eval<R: Real>(&self, _x: &[R]) -> Vec<R> {
        diag(&self.0.iter().map(|&v| R::cst(v)).collect::<Vec<_>>())
    }
}

fn flat4_const() -> Scenario {
    let tau = 2.0 * std::f64::consts::PI;
    let chart = Chart::new("r4-box", DomainBox::cube(4, -0.5, tau + 0.5), SmoothMap::from_expr(FlatMetric(4)));
    Scenario {
        id: "flat4-const",
        description: "flat R^4 (periodic box), E = span{d1}",
        chart: Arc::new(chart),
        projector: ProjectorField::new(SmoothMap::from_expr(ConstantProjector(vec![1.0, 0.0, 0.0, 0.0])), 1),
        sample_domain: DomainBox::cube(4, 0.0, tau),
        backend: Backend::Analytic,
        expectations: Expectations { xi_zero: true, minimal: true, non_minimal: false, totally_geodesic: true },
        default_points: 100,
    }
}

struct S2xRMetric;
impl MatrixExpr for S2xRMetric {
    fn shape(&self) -> (usize, usize) {
        (3, 3)
    }
    fn eval<R: Real>(&self, x: &[R]) -> Vec<R> {
        let lam = round_factor(&x[..2]);
        diag(&[lam.clone(), lam, R::cst(1.0)])
    }
}

fn product_s2xr() -> Scenario {
    let lo = vec![-2.5, -2.5, -1.5];
    let hi = vec![2.5, 2.5, 1.5];
    let chart = Chart::new("s2-stereo-x-r", DomainBox::new(lo, hi), SmoothMap::from_expr(S2xRMetric));
    Scenario {
        id: "product-s2xr",
        description: "round S^2 x R (stereographic), E = span{dt}",
        chart: Arc::new(chart),
        projector: ProjectorField::new(SmoothMap::from_expr(ConstantProjector(vec![0.0, 0.0, 1.0])), 1),
        sample_domain: DomainBox::new(vec![-1.5, -1.5, -1.0], vec![1.5, 1.5, 1.0]),
        backend: Backend::Analytic,
        expectations: Expectations { xi_zero: true, minimal: true, non_minimal: false, totally_geodesic: true },
        default_points: 100,
    }
}

struct RoundMetric(usize);
impl MatrixExpr for RoundMetric {
    fn shape(&self) -> (usize, usize) {
        (self.0, self.0)
    }
    fn eval<R: Real>(&self, u: &[R]) -> Vec<R> {
        diag(&vec![round_factor(u); self.0])
    }
}

struct ReebProjector;
impl MatrixExpr for ReebProjector {
    fn shape(&self) -> (usize, usize) {
        (3, 3)
    }
    fn eval<R: Real>(&self, u: &[R]) -> Vec<R> {
        let x = stereographic_embedding(u);
        let v = stereographic_pushforward(u, &reeb_field(&x));
        line_projector(&v, &vec![round_factor(u); 3])
    }
}

fn s3_reeb() -> Scenario {
    let chart = Chart::new("s3-stereo", DomainBox::cube(3, -2.0, 2.0), SmoothMap::from_expr(RoundMetric(3)));
    Scenario {
        id: "s3-reeb",
        description: "round S^3 (stereographic), E = Hopf/Reeb line field",
        chart: Arc::new(chart),
        projector: ProjectorField::new(SmoothMap::from_expr(ReebProjector), 1),
        sample_domain: DomainBox::cube(3, -1.2, 1.2),
        backend: Backend::Analytic,
        expectations: Expectations { xi_zero: false, minimal: true, non_minimal: false, totally_geodesic: false },
        default_points: 100,
    }
}

struct HopfProjector;
impl MatrixExpr for HopfProjector {
    fn shape(&self) -> (usize, usize) {
        (7, 7)
    }
    fn eval<R: Real>(&self, u: &[R]) -> Vec<R> {
        let x = stereographic_embedding(u);
        let vs: Vec<Vec<R>> = quaternionic_fields(&x).iter().map(|f| stereographic_pushforward(u, f)).collect();
        orthonormal_projector(&vs, &vec![round_factor(u); 7])
    }
}

fn s7_hopf() -> Scenario {
    let chart = Chart::new("s7-stereo", DomainBox::cube(7, -1.5, 1.5), SmoothMap::from_expr(RoundMetric(7)));
    Scenario {
        id: "s7-hopf",
        description: "round S^7 (stereographic), E = span{IN, JN, KN}",
        chart: Arc::new(chart),
        projector: ProjectorField::new(SmoothMap::from_expr(HopfProjector), 3),
        sample_domain: DomainBox::cube(7, -0.8, 0.8),
        backend: Backend::Analytic,
        expectations: Expectations { xi_zero: false, minimal: true, non_minimal: false, totally_geodesic: false },
        default_points: 20,
    }
}

fn warp<R: Real>(x: &[R]) -> R {
    sq(&x[0].sin()) * 0.5 + 1.0
}

struct WarpedTorusMetric;
impl MatrixExpr for WarpedTorusMetric {
    fn shape(&self) -> (usize, usize) {
        (3, 3)
    }
    fn eval<R: Real>(&self, x: &[R]) -> Vec<R> {
        diag(&[R::cst(1.0), warp(x), R::cst(1.0)])
    }
}

struct TwistedLine;
impl MatrixExpr for TwistedLine {
    fn shape(&self) -> (usize, usize) {
        (3, 3)
    }
    fn eval<R: Real>(&self, x: &[R]) -> Vec<R> {
        let v = [x[2].cos(), x[2].sin(), R::cst(0.0)];
        line_projector(&v, &[R::cst(1.0), warp(x), R::cst(1.0)])
    }
}

fn torus_skew() -> Scenario {
    let tau = 2.0 * std::f64::consts::PI;
    let chart = Chart::new("t3-box", DomainBox::cube(3, -0.5, tau + 0.5), SmoothMap::from_expr(WarpedTorusMetric));
    Scenario {
        id: "torus-skew",
        description: "T^3 with g = diag(1, 1 + sin^2(x1)/2, 1), E = span{cos(x3) d1 + sin(x3) d2}",
        chart: Arc::new(chart),
        projector: ProjectorField::new(SmoothMap::from_expr(TwistedLine), 1),
        sample_domain: DomainBox::cube(3, 0.0, tau),
        backend: Backend::Analytic,
        expectations: Expectations { xi_zero: false, minimal: false, non_minimal: true, totally_geodesic: false },
        default_points: 100,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_ids_and_expectations() {
        assert_eq!(ids(), ["flat4-const", "product-s2xr", "s3-reeb", "s7-hopf", "torus-skew"]);
        for sc in catalogue() {
            assert!(sc.expectations.is_consistent(), "{}", sc.id);
            assert!(sc.chart.domain.lo.iter().zip(&sc.sample_domain.lo).all(|(c, s)| c < s));
        }
        let s3 = find("s3-reeb").unwrap();
        assert!(s3.expectations.minimal && !s3.expectations.xi_zero);
        assert!(find("s7-hopf").unwrap().expectations.minimal);
        assert!(find("nope").is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let sc = find("flat4-const").unwrap();
        let a = sample(&sc, 10, 42).unwrap();
        let b = sample(&sc, 10, 42).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.coords(), q.coords());
        }
        let c = sample(&sc, 10, 43).unwrap();
        assert_ne!(a[0].coords(), c[0].coords());
    }

    #[test]
    fn exhausted_box_is_empty() {
        let mut sc = find("torus-skew").unwrap();
        sc.sample_domain = DomainBox::new(vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 1.0015]);
        assert!(matches!(sample(&sc, 3, 0), Err(GeomError::EmptyDomain { .. })));
    }

    #[test]
    fn stereographic_round_trip() {
        let u = [0.3, -0.7, 1.1];
        let x = stereographic_embedding(&u);
        assert!((x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-15);
        for i in 0..3 {
            assert!((x[i] / (1.0 - x[3]) - u[i]).abs() < 1e-14);
        }
    }
}
