use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::chart::{ChartPoint, SmoothMap};
use crate::error::{GeomError, Result};
use crate::jet::{Jet, JetLayout, JetMatrix, MAX_ORDER};

/// Source of coordinate derivatives for the fields fed into the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Closed-form expressions evaluated on Taylor jets.
    Analytic,
    /// Tensor-product central differences.
    Fd,
    /// Central differences with one Richardson extrapolation level.
    FdRichardson,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Analytic => "analytic",
            Backend::Fd => "fd",
            Backend::FdRichardson => "fd-richardson",
        }
    }

    pub fn is_fd(self) -> bool {
        !matches!(self, Backend::Analytic)
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = GeomError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Backend::Analytic),
            "fd" => Ok(Backend::Fd),
            "fd-richardson" => Ok(Backend::FdRichardson),
            other => Err(GeomError::Config(format!(
                "unknown backend `{other}` (expected analytic, fd or fd-richardson)"
            ))),
        }
    }
}

/// Backend plus its step size, relative to the chart scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffSettings {
    pub backend: Backend,
    pub fd_step: f64,
}

impl Default for DiffSettings {
    fn default() -> Self {
        Self { backend: Backend::Analytic, fd_step: 1e-5 }
    }
}

impl DiffSettings {
    pub fn analytic() -> Self {
        Self::default()
    }

    pub fn fd(fd_step: f64) -> Self {
        Self { backend: Backend::Fd, fd_step }
    }

    pub fn richardson(fd_step: f64) -> Self {
        Self { backend: Backend::FdRichardson, fd_step }
    }

    /// Step used for derivatives of total degree `d`. Higher derivatives get
    /// larger steps so that rounding (∝ ε/h^d) stays below truncation error.
    pub fn step_for_degree(&self, d: usize, scale: f64) -> f64 {
        let h = self.fd_step * scale;
        let factor = [1.0, 1.0, 10.0, 100.0][d.min(MAX_ORDER)];
        h.max((h * factor).min(1e-2 * scale))
    }

    /// Largest coordinate offset touched when building jets of `order`.
    pub fn stencil_radius(&self, order: usize, scale: f64) -> f64 {
        if !self.backend.is_fd() {
            return 0.0;
        }
        (1..=order)
            .map(|d| if d == 3 { 2.0 } else { 1.0 } * self.step_for_degree(d, scale))
            .fold(0.0, f64::max)
    }
}

/// 1-D central stencil for the `k`-th derivative: integer offsets and
/// weights, to be divided by `h^k`.
fn central_stencil(k: u8) -> &'static [(i8, f64)] {
    match k {
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        _ => unreachable!("stencils exist for orders 1..=3"),
    }
}

fn factorial(k: u8) -> f64 {
    (1..=k as u32).map(f64::from).product::<f64>().max(1.0)
}

/// Taylor coefficients of `map` at `pt` up to `order` by finite differences
/// with base step scaled by `shrink` (1 or ½ for extrapolation).
fn fd_coefficients(
    map: &SmoothMap,
    pt: &ChartPoint,
    order: usize,
    settings: &DiffSettings,
    shrink: f64,
) -> Vec<DMatrix<f64>> {
    let x = pt.coords();
    let n = x.len();
    let scale = pt.chart().scale;
    let layout = JetLayout::shared(n);
    let (rows, cols) = map.shape();
    let mut cache: HashMap<(usize, Vec<i8>), DMatrix<f64>> = HashMap::new();
    let mut out = Vec::with_capacity(layout.len(order));
    for idx in 0..layout.len(order) {
        let e = layout.exponents(idx).to_vec();
        let d: usize = e.iter().map(|&v| v as usize).sum();
        if d == 0 {
            out.push(map.value(x));
            continue;
        }
        let h = settings.step_for_degree(d, scale) * shrink;
        // tensor product of the per-variable stencils
        let mut terms: Vec<(Vec<i8>, f64)> = vec![(vec![0; n], 1.0)];
        for (v, &ev) in e.iter().enumerate() {
            if ev == 0 {
                continue;
            }
            let mut next = Vec::with_capacity(terms.len() * 4);
            for (off, w) in &terms {
                for &(o, c) in central_stencil(ev) {
                    let mut off2 = off.clone();
                    off2[v] = o;
                    next.push((off2, w * c));
                }
            }
            terms = next;
        }
        let mut acc = DMatrix::<f64>::zeros(rows, cols);
        for (off, w) in terms {
            let val = cache.entry((d, off.clone())).or_insert_with(|| {
                let xs: Vec<f64> = x.iter().zip(&off).map(|(&xi, &o)| xi + o as f64 * h).collect();
                map.value(&xs)
            });
            acc += &*val * w;
        }
        let denom = h.powi(d as i32) * e.iter().map(|&k| factorial(k)).product::<f64>();
        out.push(acc / denom);
    }
    out
}

/// Jet of order `order` of the matrix field `map` at `pt`.
pub fn taylor(map: &SmoothMap, pt: &ChartPoint, order: usize, settings: &DiffSettings) -> Result<JetMatrix> {
    assert!(order <= MAX_ORDER);
    let x = pt.coords();
    let n = x.len();
    if settings.backend == Backend::Analytic {
        let seeds = Jet::seed(x, order);
        return map.jet(&seeds).ok_or_else(|| GeomError::AnalyticUnavailable {
            what: format!("field on chart `{}`", pt.chart().name),
        });
    }
    let chart = pt.chart();
    let radius = settings.stencil_radius(order, chart.scale);
    if chart.domain.clearance(x) <= radius {
        return Err(GeomError::StencilOutOfDomain { chart: chart.name.clone(), coords: x.to_vec(), radius });
    }
    let coarse = fd_coefficients(map, pt, order, settings, 1.0);
    let coeffs = if settings.backend == Backend::FdRichardson {
        let fine = fd_coefficients(map, pt, order, settings, 0.5);
        coarse.iter().zip(&fine).map(|(c, f)| (f * 4.0 - c) / 3.0).collect()
    } else {
        coarse
    };
    let layout = JetLayout::shared(n);
    let (rows, cols) = map.shape();
    Ok(JetMatrix::from_fn(rows, cols, |i, j| {
        let c: Vec<f64> = coeffs.iter().map(|m| m[(i, j)]).collect();
        Jet::from_coefficients(&layout, order, c)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffgeo::chart::{Chart, DomainBox, MatrixExpr};
    use crate::jet::Real;
    use std::sync::Arc;

    struct Wavy;
    impl MatrixExpr for Wavy {
        fn shape(&self) -> (usize, usize) {
            (1, 2)
        }
        fn eval<R: Real>(&self, x: &[R]) -> Vec<R> {
            vec![x[0].sin() * x[1].clone() * x[1].clone(), (x[0].clone() * x[1].clone()).cos()]
        }
    }

    fn chart() -> Arc<Chart> {
        Arc::new(Chart::new("plane", DomainBox::cube(2, -2.0, 2.0), {
            // metric is irrelevant here, reuse the identity
            struct Id;
            impl MatrixExpr for Id {
                fn shape(&self) -> (usize, usize) {
                    (2, 2)
                }
                fn eval<R: Real>(&self, _x: &[R]) -> Vec<R> {
                    vec![R::cst(1.0), R::cst(0.0), R::cst(0.0), R::cst(1.0)]
                }
            }
            SmoothMap::from_expr(Id)
        }))
    }

    #[test]
    fn finite_differences_match_jets() {
        let chart = chart();
        let pt = chart.point(vec![0.4, -0.3]).unwrap();
        let map = SmoothMap::from_expr(Wavy);
        let exact = taylor(&map, &pt, 3, &DiffSettings::analytic()).unwrap();
        let fd = taylor(&map.without_jet(), &pt, 3, &DiffSettings::fd(1e-5)).unwrap();
        let rich = taylor(&map.without_jet(), &pt, 3, &DiffSettings::richardson(1e-5)).unwrap();
        let layout = JetLayout::shared(2);
        for j in 0..2 {
            let (a, b, c) = (exact.get(0, j), fd.get(0, j), rich.get(0, j));
            for k in 0..layout.len(3) {
                let d: usize = layout.exponents(k).iter().map(|&v| v as usize).sum();
                let tol = [1e-14, 1e-9, 1e-7, 2e-5][d];
                let ea = a.coefficients()[k];
                assert!((ea - b.coefficients()[k]).abs() < tol, "fd coeff {k}: {ea} vs {}", b.coefficients()[k]);
                assert!((ea - c.coefficients()[k]).abs() < tol, "richardson coeff {k}");
            }
        }
    }

    #[test]
    fn analytic_without_jet_is_an_error() {
        let chart = chart();
        let pt = chart.point(vec![0.0, 0.0]).unwrap();
        let map = SmoothMap::from_expr(Wavy).without_jet();
        assert!(matches!(
            taylor(&map, &pt, 1, &DiffSettings::analytic()),
            Err(GeomError::AnalyticUnavailable { .. })
        ));
    }

    #[test]
    fn stencil_near_boundary_is_rejected() {
        let chart = chart();
        let pt = chart.point(vec![1.9985, 0.0]).unwrap();
        let map = SmoothMap::from_expr(Wavy);
        assert!(matches!(
            taylor(&map, &pt, 3, &DiffSettings::fd(1e-5)),
            Err(GeomError::StencilOutOfDomain { .. })
        ));
        assert!(taylor(&map, &pt, 3, &DiffSettings::analytic()).is_ok());
    }

    #[test]
    fn backend_names_round_trip() {
        for b in [Backend::Analytic, Backend::Fd, Backend::FdRichardson] {
            assert_eq!(b.as_str().parse::<Backend>().unwrap(), b);
        }
        assert!("spline".parse::<Backend>().is_err());
    }
}
