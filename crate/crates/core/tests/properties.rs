//! Pointwise invariants over random points of the scenario catalogue.

use gtorsion::diffgeo::DiffSettings;
use gtorsion::la::{b_pair, endo_norm, g_inner, skewness_defect, Mat, Vector};
use gtorsion::scenarios::{catalogue, Scenario};
use gtorsion::PointGeometry;
use proptest::prelude::*;

/// Scenarios cheap enough to evaluate per case; the 7-sphere runs separately.
fn small() -> Vec<Scenario> {
    catalogue().into_iter().filter(|s| s.dim() <= 4).collect()
}

fn geometry(sc: &Scenario, unit: &[f64]) -> PointGeometry {
    let d = &sc.sample_domain;
    let x: Vec<f64> = (0..sc.dim()).map(|i| d.lo[i] + unit[i] * (d.hi[i] - d.lo[i])).collect();
    let pt = sc.point(x).unwrap();
    PointGeometry::compute(&pt, &sc.projector, &DiffSettings::analytic()).unwrap()
}

fn vec_of(n: usize, v: &[f64]) -> Vector {
    Vector::from_iterator(n, v.iter().take(n).cloned())
}

fn skew(geo: &PointGeometry, v: &[f64]) -> Mat {
    let n = geo.n;
    let w = Mat::from_fn(n, n, |i, j| v[(i * n + j) % v.len()]);
    &geo.ginv * (&w - w.transpose())
}

fn case() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
    (0usize..4, prop::collection::vec(0.0..1.0f64, 4), prop::collection::vec(-1.0..1.0f64, 16))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn torsion_is_skew_and_in_m((k, unit, v) in case()) {
        let sc = &small()[k];
        let geo = geometry(sc, &unit);
        let xi = geo.xi_at(&vec_of(geo.n, &v));
        let scale = 1.0 + endo_norm(&xi, &geo.g, &geo.ginv);
        prop_assert!(endo_norm(&geo.g_part(&xi), &geo.g, &geo.ginv) < 1e-12 * scale);
        prop_assert!(skewness_defect(&xi, &geo.g, &geo.ginv) < 1e-12 * scale);
    }

    #[test]
    fn transferred_metric_dominates((k, unit, v) in case()) {
        let sc = &small()[k];
        let geo = geometry(sc, &unit);
        let x = vec_of(geo.n, &v);
        let y = vec_of(geo.n, &v[8..]);
        let lhs = g_inner(&geo.gt, &x, &y);
        let rhs = g_inner(&geo.g, &x, &y) + b_pair(&geo.xi_at(&x), &geo.xi_at(&y));
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
        prop_assert!(g_inner(&geo.gt, &x, &x) >= g_inner(&geo.g, &x, &x) - 1e-12);
        prop_assert!((geo.l_apply(&y) - &geo.l * &y).amax() < 1e-10);
    }

    #[test]
    fn difference_tensor_is_symmetric((k, unit, v) in case()) {
        let sc = &small()[k];
        let geo = geometry(sc, &unit);
        let x = vec_of(geo.n, &v);
        let y = vec_of(geo.n, &v[8..]);
        prop_assert!((geo.s_at(&x, &y) - geo.s_at(&y, &x)).amax() < 1e-10);
    }

    #[test]
    fn minimal_connection_curvature_routes_agree((k, unit, v) in case()) {
        let sc = &small()[k];
        let geo = geometry(sc, &unit);
        let x = vec_of(geo.n, &v);
        let y = vec_of(geo.n, &v[8..]);
        let a = geo.rprime_at(&x, &y);
        let b = geo.rprime_direct_at(&x, &y);
        prop_assert!((&a - &b).amax() < 1e-9 * (1.0 + a.amax()));
        prop_assert!(endo_norm(&geo.m_part(&a), &geo.g, &geo.ginv) < 1e-9 * (1.0 + a.amax()));
    }

    #[test]
    fn q_hat_is_skew_on_g((k, unit, v) in case()) {
        let sc = &small()[k];
        let geo = geometry(sc, &unit);
        let beta = geo.g_part(&skew(&geo, &v));
        let q = geo.q_hat(&beta);
        prop_assert!(skewness_defect(&q, &geo.g, &geo.ginv) < 1e-9 * (1.0 + q.amax()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn seven_sphere_torsion_in_m(unit in prop::collection::vec(0.0..1.0f64, 7), v in prop::collection::vec(-1.0..1.0f64, 7)) {
        let sc = catalogue().into_iter().find(|s| s.id == "s7-hopf").unwrap();
        let geo = geometry(&sc, &unit);
        let xi = geo.xi_at(&vec_of(7, &v));
        prop_assert!(endo_norm(&geo.g_part(&xi), &geo.g, &geo.ginv) < 1e-11);
        prop_assert!(skewness_defect(&xi, &geo.g, &geo.ginv) < 1e-11);
    }
}
