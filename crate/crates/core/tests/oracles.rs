//! Checks against closed forms and independent numerical routes.

use std::f64::consts::PI;
use std::sync::Arc;

use gtorsion::bundle::extrinsic::harmonicity_residuals;
use gtorsion::diffgeo::{christoffel, covariant_derivative, riemann, DiffSettings, SmoothMap, TensorField};
use gtorsion::jet::{Jet, JetMatrix};
use gtorsion::la::{Mat, Vector};
use gtorsion::scenarios::{find, quaternionic_fields, reeb_field, sample, stereographic_embedding, stereographic_pushforward};
use gtorsion::PointGeometry;

fn basis(n: usize, i: usize) -> Vector {
    Vector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 })
}

/// Γ for a conformally flat metric `e^{2φ} δ` with `φ = ln 2 − ln(1 + |u|²)`
/// on the first two coordinates, flat in the rest.
fn conformal_christoffel(x: &[f64], conformal: usize) -> Vec<Mat> {
    let n = x.len();
    let r2: f64 = x[..conformal].iter().map(|v| v * v).sum();
    let dphi = |i: usize| if i < conformal { -2.0 * x[i] / (1.0 + r2) } else { 0.0 };
    (0..n)
        .map(|i| {
            Mat::from_fn(n, n, |k, j| {
                if i >= conformal || j >= conformal || k >= conformal {
                    return 0.0;
                }
                let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                d(i, k) * dphi(j) + d(j, k) * dphi(i) - d(i, j) * dphi(k)
            })
        })
        .collect()
}

#[test]
fn sphere_christoffel_matches_conformal_closed_form() {
    let sc = find("product-s2xr").unwrap();
    for settings in [DiffSettings::analytic(), DiffSettings::fd(1e-5), DiffSettings::richardson(1e-4)] {
        let tol = if settings.backend.is_fd() { 1e-6 } else { 1e-12 };
        for pt in sample(&sc, 20, 3).unwrap() {
            let gamma = christoffel(&pt, &settings).unwrap();
            let expected = conformal_christoffel(pt.coords(), 2);
            for (i, e) in expected.iter().enumerate() {
                for k in 0..3 {
                    for j in 0..3 {
                        let got = gamma.component(k, i, j);
                        assert!((got - e[(k, j)]).abs() < tol, "{:?} Γ^{k}_{i}{j}: {got} vs {}", settings.backend, e[(k, j)]);
                    }
                }
            }
        }
    }
}

#[test]
fn unit_sphere_factor_has_constant_curvature_one() {
    let sc = find("product-s2xr").unwrap();
    for pt in sample(&sc, 20, 4).unwrap() {
        let r = riemann(&pt, &DiffSettings::analytic()).unwrap();
        let g = pt.metric();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    // R(X,Y)Z = g(Y,Z)X − g(X,Z)Y on the sphere factor, zero along t
                    let (x, y, z) = (basis(3, a), basis(3, b), basis(3, c));
                    let mut want = Vector::zeros(3);
                    if a < 2 && b < 2 && c < 2 {
                        want = &x * y.dot(&(&g * &z)) - &y * x.dot(&(&g * &z));
                    }
                    let got = r.apply(&x, &y, &z);
                    assert!((got - want).amax() < 1e-12);
                }
            }
        }
        assert!((r.sectional(&g, &basis(3, 0), &basis(3, 1)) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn nabla_p_matches_tensor_covariant_derivative() {
    for id in ["s3-reeb", "torus-skew", "s7-hopf"] {
        let sc = find(id).unwrap();
        let n = sc.dim();
        let (pv, pj) = (sc.projector.map.clone(), sc.projector.map.clone());
        let column = SmoothMap::new(
            n * n,
            1,
            move |x: &[f64]| {
                let m = pv.value(x);
                Mat::from_fn(n * n, 1, |c, _| m[(c / n, c % n)])
            },
            Some(Arc::new(move |x: &[Jet]| {
                let m = pj.jet(x).unwrap();
                JetMatrix::from_fn(n * n, 1, |c, _| m.get(c / n, c % n).clone())
            })),
        );
        let field = TensorField::new(1, 1, column);
        let settings = DiffSettings::analytic();
        for pt in sample(&sc, 5, 8).unwrap() {
            let geo = PointGeometry::compute(&pt, &sc.projector, &settings).unwrap();
            let d = covariant_derivative(&field, &pt, &settings).unwrap();
            for a in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let want = d[(i * n + j) * n + a];
                        assert!((geo.nabla_p[a][(i, j)] - want).abs() < 1e-11, "{id}");
                    }
                }
            }
        }
    }
}

/// Differential of the stereographic embedding, read off first-order jets.
fn embedding_jacobian(u: &[f64]) -> Mat {
    let n = u.len();
    let x = stereographic_embedding(&Jet::seed(u, 1));
    Mat::from_fn(n + 1, n, |i, a| x[i].grad(a))
}

#[test]
fn pushforward_inverts_the_embedding_differential() {
    let sc = find("s7-hopf").unwrap();
    for pt in sample(&sc, 10, 1).unwrap() {
        let u = pt.coords();
        let x = stereographic_embedding(u);
        let jac = embedding_jacobian(u);
        for f in quaternionic_fields(&x) {
            let v = Vector::from_vec(stereographic_pushforward(u, &f));
            assert!((&jac * v - Vector::from_vec(f)).amax() < 1e-12);
        }
    }
    let sc = find("s3-reeb").unwrap();
    for pt in sample(&sc, 10, 1).unwrap() {
        let u = pt.coords();
        let x = stereographic_embedding(u);
        let f = reeb_field(&x);
        let v = Vector::from_vec(stereographic_pushforward(u, &f));
        assert!((embedding_jacobian(u) * v - Vector::from_vec(f)).amax() < 1e-12);
    }
}

#[test]
fn hopf_fibres_are_geodesic() {
    // E totally geodesic iff q (∇_V p) V = 0 for V in E
    for id in ["s3-reeb", "s7-hopf"] {
        let sc = find(id).unwrap();
        for pt in sample(&sc, 10, 2).unwrap() {
            let geo = PointGeometry::compute(&pt, &sc.projector, &DiffSettings::analytic()).unwrap();
            for v in &geo.frame.vectors[..geo.m] {
                for w in &geo.frame.vectors[..geo.m] {
                    let dp: Mat = (0..geo.n).map(|a| &geo.nabla_p[a] * v[a]).fold(Mat::zeros(geo.n, geo.n), |s, m| s + m);
                    assert!((&geo.q * dp * w).amax() < 1e-10, "{id}");
                }
            }
        }
    }
}

#[test]
fn decomposed_curvature_agrees_with_richardson_differences() {
    for id in ["s3-reeb", "torus-skew"] {
        let sc = find(id).unwrap();
        for pt in sample(&sc, 5, 9).unwrap() {
            let a = PointGeometry::compute(&pt, &sc.projector, &DiffSettings::analytic()).unwrap();
            let f = PointGeometry::compute(&pt, &sc.projector, &DiffSettings::richardson(1e-3)).unwrap();
            for i in 0..a.n {
                for j in 0..a.n {
                    assert!((&a.rprime[i][j] - &f.rprime[i][j]).amax() < 1e-4, "{id}");
                }
            }
        }
    }
}

fn torus_min_residual(x: [f64; 3]) -> f64 {
    let sc = find("torus-skew").unwrap();
    let pt = sc.point(x.to_vec()).unwrap();
    let geo = PointGeometry::compute(&pt, &sc.projector, &DiffSettings::analytic()).unwrap();
    harmonicity_residuals(&geo).min
}

#[test]
fn skew_twist_is_minimal_only_on_quarter_turn_planes() {
    for (x1, x2) in [(0.3, 1.1), (1.9, 4.0), (5.0, 0.2)] {
        for k in 0..4 {
            let on = torus_min_residual([x1, x2, k as f64 * PI / 2.0 + 1e-12]);
            assert!(on < 1e-9, "x3 = {k}π/2: {on}");
        }
        for x3 in [0.4, 1.0, 2.2, 3.9, 5.6] {
            let off = torus_min_residual([x1, x2, x3]);
            assert!(off > 1e-3, "x3 = {x3}: {off}");
        }
    }
}
