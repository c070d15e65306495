//! Per-point evaluation of the three suites.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::catalog::{lookup, Suite};
use crate::bundle::connection::{compatibility_defect, gauss_defect, torsion_defect, LiftedField};
use crate::bundle::curvature::{ricci_tilde, summary, symmetry_defects};
use crate::bundle::{
    harmonicity_residuals, project_normal, project_tangent, second_fundamental_form, FrameBundleVector, TangentP,
};
use crate::geometry::PointGeometry;
use crate::jet::{Jet, JetLayout, JetMatrix};
use crate::la::{b_pair, commutator, endo_norm, g_inner, min_g_eigenvalue, skewness_defect, Mat, Vector};
use crate::scenarios::{Expectations, Tolerances};
use crate::transfer::nabla_l;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// Passes when `value ≤ tol`.
    AtMost,
    /// Passes when `value > tol`.
    Exceeds,
}

/// One named residual with its threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tol: f64,
    pub relation: Relation,
    pub pass: bool,
    /// Whether a failure counts against the run.
    pub gated: bool,
}

/// What a point evaluation needs besides the geometry.
pub struct PointContext<'a> {
    pub tolerances: &'a Tolerances,
    pub overrides: &'a BTreeMap<String, f64>,
    pub expectations: Expectations,
    pub probes: usize,
    pub suites: &'a [Suite],
}

struct Recorder<'a> {
    ctx: &'a PointContext<'a>,
    out: Vec<Check>,
}

impl Recorder<'_> {
    fn tol(&self, name: &'static str) -> f64 {
        scenario_check(name, 0.0, self.ctx.tolerances, self.ctx.overrides, Relation::AtMost).tol
    }

    fn push(&mut self, name: &'static str, value: f64, relation: Relation, gated: bool) {
        let mut c = scenario_check(name, value, self.ctx.tolerances, self.ctx.overrides, relation);
        c.gated = gated;
        self.out.push(c);
    }

    fn at_most(&mut self, name: &'static str, value: f64) {
        self.push(name, value, Relation::AtMost, true);
    }

    fn info(&mut self, name: &'static str, value: f64) {
        self.push(name, value, Relation::AtMost, false);
    }
}

/// A check built outside a point evaluation.
pub fn scenario_check(
    name: &'static str,
    value: f64,
    tolerances: &Tolerances,
    overrides: &BTreeMap<String, f64>,
    relation: Relation,
) -> Check {
    let tol = overrides.get(name).copied().unwrap_or_else(|| lookup(name).expect("catalogued check").class.resolve(tolerances));
    let pass = match relation {
        Relation::AtMost => value <= tol,
        Relation::Exceeds => value > tol,
    };
    Check { name, value, tol, relation, pass, gated: true }
}

/// Running maximum of absolute residuals.
#[derive(Default)]
struct Max(f64);

impl Max {
    fn add(&mut self, v: f64) {
        // NaN must stick
        if v.is_nan() || v.abs() > self.0 {
            self.0 = v.abs();
        }
    }
}

fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

/// Random g-skew endomorphism `g⁻¹W`, `W` antisymmetric.
fn rand_skew(rng: &mut ChaCha8Rng, geo: &PointGeometry) -> Mat {
    let w = Mat::from_fn(geo.n, geo.n, |_, _| rng.gen_range(-1.0..1.0));
    &geo.ginv * (&w - w.transpose())
}

fn combine(ms: &[Mat], x: &Vector) -> Mat {
    let n = ms[0].nrows();
    ms.iter().enumerate().fold(Mat::zeros(n, n), |acc, (a, m)| acc + m * x[a])
}

/// Runs the selected suites at one point.
pub fn evaluate(geo: &PointGeometry, ctx: &PointContext, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut rec = Recorder { ctx, out: Vec::new() };
    for suite in Suite::all() {
        if !ctx.suites.contains(&suite) {
            continue;
        }
        match suite {
            Suite::Identity => identity(geo, &mut rec, rng),
            Suite::Curvature => curvature(geo, &mut rec, rng),
            Suite::Minimality => minimality(geo, &mut rec),
        }
    }
    rec.out
}

fn identity(geo: &PointGeometry, rec: &mut Recorder, rng: &mut ChaCha8Rng) {
    let n = geo.n;

    let mut sym = Max::default();
    let mut compat = Max::default();
    for a in 0..n {
        for j in 0..n {
            for k in 0..n {
                sym.add(geo.gamma[a][(k, j)] - geo.gamma[j][(k, a)]);
            }
        }
        let d = &geo.dg[a] - geo.gamma[a].transpose() * &geo.g - &geo.g * &geo.gamma[a];
        compat.add(d.amax());
    }
    rec.at_most("metric.christoffel_symmetry", sym.0);
    rec.at_most("metric.compatibility", compat.0);
    let rs = geo.riemann.symmetry_defects(&geo.g);
    rec.at_most("metric.riemann_symmetries", rs.iter().cloned().fold(0.0, f64::max));

    let gp = &geo.g * &geo.p;
    let proj = (&geo.p * &geo.p - &geo.p)
        .amax()
        .max((&gp - gp.transpose()).amax())
        .max((geo.p.trace() - geo.m as f64).abs());
    rec.at_most("structure.projector", proj);
    let mut frames = Max::default();
    frames.add(geo.frame.orthonormality_defect(&geo.g));
    for (i, a) in geo.tilde_frame.iter().enumerate() {
        for (j, b) in geo.tilde_frame.iter().enumerate() {
            frames.add(geo.gt_inner(a, b) - if i == j { 1.0 } else { 0.0 });
        }
    }
    rec.at_most("structure.frames", frames.0);

    let mut in_m = Max::default();
    for x in &geo.xi {
        in_m.add(endo_norm(&geo.g_part(x), &geo.g, &geo.ginv));
        in_m.add(skewness_defect(x, &geo.g, &geo.ginv));
    }
    rec.at_most("torsion.in_m", in_m.0);

    let mut minimal_routes = Max::default();
    for i in 0..n {
        for j in 0..n {
            minimal_routes.add((&geo.rprime[i][j] - &geo.rprime_direct[i][j]).amax());
        }
    }

    let s_metric = geo.difference_tensor_from_metric();
    let mut s_components = Max::default();
    for (a, b) in geo.s.iter().zip(&s_metric) {
        s_components.add((a - b).amax());
    }

    let mut transfer_metric = Max::default();
    let gl = &geo.g * &geo.l;
    transfer_metric.add((&gl - gl.transpose()).amax());
    transfer_metric.add((-min_g_eigenvalue(&geo.l, &geo.g)).max(0.0));

    let names = [
        "torsion.defining",
        "torsion.minimal_connection",
        "torsion.nabla_g_part",
        "torsion.nabla_m_part",
        "curvature.g_part",
        "curvature.m_part",
        "curvature.decomposition",
        "curvature_operator.duality",
        "transfer.xi_dot",
        "transfer.nabla_l",
        "transfer.difference_tensor",
        "q.duality",
        "q.skew",
        "bundle.projections",
        "bundle.gauss",
        "bundle.compatibility",
        "bundle.torsion_free",
    ];
    let mut acc: Vec<Max> = names.iter().map(|_| Max::default()).collect();
    let zero_m = Mat::zeros(n, n);

    for _ in 0..rec.ctx.probes {
        let (x, y, z) = (rand_vec(rng, n), rand_vec(rng, n), rand_vec(rng, n));
        let alpha = rand_skew(rng, geo);
        let (xx, xy, xz) = (geo.xi_at(&x), geo.xi_at(&y), geo.xi_at(&z));
        let br = commutator(&xx, &xy);

        let dp = combine(&geo.dp, &x);
        let (py, qy) = (&geo.p * &y, &geo.q * &y);
        let d_py = &dp * &y + geo.nabla(&x, &py);
        let d_qy = -(&dp * &y) + geo.nabla(&x, &qy);
        acc[0].add((&xx * &y - (&geo.p * d_qy + &geo.q * d_py)).amax());

        let gp_x = combine(&geo.gamma_prime, &x);
        acc[1].add((&xx * &y - (geo.nabla(&x, &y) - &gp_x * &y)).amax());

        let nxy = geo.nabla_of_xi_field(&x, &y);
        acc[2].add((geo.g_part(&nxy) - geo.g_part(&br)).amax());
        let npxy = geo.nabla_prime_of_xi_field(&x, &y);
        acc[3].add((geo.m_part(&nxy) - &npxy - geo.m_part(&br)).amax());

        let r = geo.r_at(&x, &y);
        let rp = geo.rprime_direct_at(&x, &y);
        acc[4].add((geo.g_part(&r) - &rp - geo.g_part(&br)).amax());
        let npyx = geo.nabla_prime_of_xi_field(&y, &x);
        acc[5].add((geo.m_part(&r) - (&npxy - &npyx + geo.m_part(&br))).amax());
        let dec = &rp + geo.nabla_xi_at(&x, &y) - geo.nabla_xi_at(&y, &x) - &br;
        acc[6].add((&r - dec).amax());

        acc[7].add(g_inner(&geo.g, &(geo.r_op(&alpha) * &x), &y) - b_pair(&alpha, &r));

        let am = geo.m_part(&alpha);
        let dot = geo.xi_dot_frame(&am);
        acc[8].add(g_inner(&geo.g, &dot, &x) + b_pair(&am, &xx));
        acc[8].add((&dot - geo.xi_dot(&am)).amax());

        let hx = FrameBundleVector::tangent(geo, &x, &zero_m);
        let hy = FrameBundleVector::tangent(geo, &y, &zero_m);
        transfer_metric.add(hx.inner(geo, &hy) - g_inner(&geo.g, &x, &geo.l_apply(&y)));

        acc[9].add(nabla_l(geo, &x, &y, &z).residual);

        let sm = |u: &Vector, v: &Vector| combine(&s_metric, u) * v;
        let lhs = 2.0 * g_inner(&geo.g, &sm(&x, &y), &(&geo.l * &z));
        let nx = |u: &Vector, v: &Vector| geo.nabla_xi_at(u, v);
        let rhs = b_pair(&(nx(&x, &y) + nx(&y, &x)), &xz)
            + b_pair(&(nx(&x, &z) - nx(&z, &x)), &xy)
            + b_pair(&(nx(&y, &z) - nx(&z, &y)), &xx);
        acc[10].add(lhs - rhs);

        let beta = geo.g_part(&alpha);
        let qx = geo.q_apply(&beta, &x);
        let qy_ = geo.q_apply(&beta, &y);
        acc[11].add(geo.gt_inner(&qx, &y) - b_pair(&rp, &beta));
        acc[12].add(geo.gt_inner(&qx, &y) + geo.gt_inner(&x, &qy_));

        let v = FrameBundleVector::generic(z.clone(), alpha.clone());
        let t = project_tangent(geo, &v);
        let nv = project_normal(geo, &v);
        acc[13].add(t.add(&nv).sub(&v).max_abs());
        acc[13].add(project_tangent(geo, &t).sub(&t).max_abs());
        acc[13].add(project_normal(geo, &nv).sub(&nv).max_abs());
        acc[13].add(t.inner(geo, &nv));

        let u = LiftedField::new(x.clone(), rand_skew(rng, geo));
        let w = LiftedField::new(y.clone(), rand_skew(rng, geo));
        let s = LiftedField::new(z.clone(), alpha.clone());
        acc[14].add(gauss_defect(geo, &u, &w));
        acc[15].add(compatibility_defect(geo, &u, &w, &s));
        acc[16].add(torsion_defect(geo, &u, &w));
    }

    rec.at_most("torsion.defining", acc[0].0);
    rec.at_most("torsion.minimal_connection", acc[1].0);
    rec.at_most("torsion.nabla_g_part", acc[2].0);
    rec.at_most("torsion.nabla_m_part", acc[3].0);
    rec.at_most("curvature.g_part", acc[4].0);
    rec.at_most("curvature.m_part", acc[5].0);
    rec.at_most("curvature.decomposition", acc[6].0);
    rec.at_most("curvature.minimal_routes", minimal_routes.0);
    rec.at_most("curvature_operator.duality", acc[7].0);
    rec.at_most("transfer.xi_dot", acc[8].0);
    rec.at_most("transfer.metric", transfer_metric.0);
    rec.at_most("transfer.nabla_l", acc[9].0);
    rec.at_most("transfer.difference_tensor", acc[10].0);
    rec.at_most("transfer.difference_components", s_components.0);
    rec.at_most("q.duality", acc[11].0);
    rec.at_most("q.skew", acc[12].0);
    rec.at_most("q.derivative_tensoriality", tensoriality(geo, rng));
    for (i, name) in ["bundle.projections", "bundle.gauss", "bundle.compatibility", "bundle.torsion_free"]
        .into_iter()
        .enumerate()
    {
        rec.at_most(name, acc[13 + i].0);
    }
}

/// Largest difference of `D Q` between a coordinate-constant extension of
/// `α` and one with random first-order terms, over two random `α`.
pub fn tensoriality(geo: &PointGeometry, rng: &mut ChaCha8Rng) -> f64 {
    let n = geo.n;
    let layout = JetLayout::shared(n);
    let vars: Vec<Jet> = (0..n).map(|a| Jet::variable(&layout, 1, a, 0.0)).collect();
    let mut worst = Max::default();
    for _ in 0..2 {
        let alpha = rand_skew(rng, geo);
        let slopes: Vec<Mat> = (0..n).map(|_| rand_skew(rng, geo)).collect();
        let varying = JetMatrix::from_fn(n, n, |i, j| {
            let mut e = Jet::constant(alpha[(i, j)]);
            for (a, s) in slopes.iter().enumerate() {
                e += &vars[a].scale(s[(i, j)]);
            }
            e
        });
        let fixed = geo.d_q_field(&JetMatrix::from_matrix(&alpha));
        let moved = geo.d_q_field(&varying);
        for (a, b) in fixed.iter().zip(&moved) {
            worst.add((a - b).amax());
        }
    }
    worst.0
}

fn random_tangent(geo: &PointGeometry, rng: &mut ChaCha8Rng) -> TangentP {
    let x = rand_vec(rng, geo.n);
    TangentP::new(x, geo.g_part(&rand_skew(rng, geo)))
}

fn curvature(geo: &PointGeometry, rec: &mut Recorder, rng: &mut ChaCha8Rng) {
    let mut sym = Max::default();
    for _ in 0..rec.ctx.probes.min(CURVATURE_QUADRUPLES) {
        let (u, v, w, z) =
            (random_tangent(geo, rng), random_tangent(geo, rng), random_tangent(geo, rng), random_tangent(geo, rng));
        for d in symmetry_defects(geo, &u, &v, &w, &z) {
            sym.add(d);
        }
    }
    rec.at_most("rp.symmetries", sym.0);

    let cs = summary(geo);
    rec.at_most("rp.ricci", cs.ricci_defect);
    rec.at_most("rp.scalar", (cs.scalar_closed - cs.scalar_direct).abs());
    rec.at_most("rp.sectional", cs.sectional_defect);
    rec.at_most("rp.vertical_ricci", (-cs.min_vertical_ricci).max(0.0));

    let flat = geo.riemann.r.iter().flatten().map(|m| m.amax()).fold(0.0, f64::max) <= ZERO_LEVEL;
    let integrable = geo.xi_max_abs() <= ZERO_LEVEL;
    if flat && integrable {
        rec.at_most("rp.flat_sectional", (-cs.min_sectional).max(0.0));
    }
    let rprime_flat = geo.rprime.iter().flatten().map(|m| m.amax()).fold(0.0, f64::max) <= ZERO_LEVEL;
    let s_tilde: f64 = geo.tilde_frame.iter().map(|e| ricci_tilde(geo, e, e)).sum();
    if rprime_flat && s_tilde > ZERO_LEVEL {
        rec.push("rp.scalar_positive", cs.scalar_closed, Relation::Exceeds, true);
    }
    rec.info("rp.sectional_spread", cs.max_sectional - cs.min_sectional);
}

/// Random quadruples per point for the curvature symmetries.
const CURVATURE_QUADRUPLES: usize = 25;

/// Below this a tensor counts as zero when deciding which spot checks apply.
const ZERO_LEVEL: f64 = 1e-9;

fn minimality(geo: &PointGeometry, rec: &mut Recorder) {
    let ex = rec.ctx.expectations;
    rec.push("xi.norm", geo.xi_max_abs(), Relation::AtMost, ex.xi_zero);

    let sff = second_fundamental_form(geo);
    rec.push("sff.max_entry", sff.max_abs(), Relation::AtMost, ex.totally_geodesic);
    rec.at_most("sff.ambient", sff.ambient_defect);
    rec.at_most("sff.symmetry", sff.symmetry_defect);

    let h = harmonicity_residuals(geo);
    rec.push("min_residual", h.min, Relation::AtMost, ex.minimal);
    rec.push("h1", h.h1, Relation::AtMost, ex.minimal);
    rec.push("h2", h.h2, Relation::AtMost, ex.minimal);
    rec.at_most("harmonic.split", h.split_defect);
    rec.at_most("harmonic.mean_curvature", h.mean_curvature_defect);

    let (tm, t1, t2) = (rec.tol("min_residual"), rec.tol("h1"), rec.tol("h2"));
    let agree = (h.min <= tm) == (h.h1 <= t1 && h.h2 <= t2);
    rec.at_most("harmonic.equivalence", if agree { 0.0 } else { 1.0 });
    if h.h1 <= t1 {
        rec.info("harmonic.referee_ratio", h.h2 / t2);
    }
}
