use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::jet::{Jet, JetMatrix, Real};

/// Closed-form matrix-valued function of the coordinates, written once for
/// any [`Real`] scalar so it can be evaluated pointwise or on jets.
pub trait MatrixExpr: Send + Sync + 'static {
    fn shape(&self) -> (usize, usize);
    /// Row-major entries.
    fn eval<R: Real>(&self, x: &[R]) -> Vec<R>;
}

type ValueFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;
type JetFn = dyn Fn(&[Jet]) -> JetMatrix + Send + Sync;

/// Matrix-valued field on a chart: a pointwise closure and, optionally, a
/// closure evaluating the same expression on Taylor jets.
#[derive(Clone)]
pub struct SmoothMap {
    rows: usize,
    cols: usize,
    eval: Arc<ValueFn>,
    jet: Option<Arc<JetFn>>,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothMap")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("has_jet", &self.jet.is_some())
            .finish()
    }
}

impl SmoothMap {
    pub fn new(
        rows: usize,
        cols: usize,
        eval: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
        jet: Option<Arc<JetFn>>,
    ) -> Self {
        Self { rows, cols, eval: Arc::new(eval), jet }
    }

    /// Both closures from a single generic expression.
    pub fn from_expr<E: MatrixExpr>(expr: E) -> Self {
        let expr = Arc::new(expr);
        let (rows, cols) = expr.shape();
        let e1 = expr.clone();
        let eval = move |x: &[f64]| DMatrix::from_row_slice(rows, cols, &e1.eval::<f64>(x));
        let e2 = expr;
        let jet: Arc<JetFn> = Arc::new(move |x: &[Jet]| JetMatrix::from_vec(rows, cols, e2.eval::<Jet>(x)));
        Self { rows, cols, eval: Arc::new(eval), jet: Some(jet) }
    }

    /// Same pointwise closure, jets removed (forces differencing).
    pub fn without_jet(&self) -> Self {
        Self { jet: None, ..self.clone() }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn has_jet(&self) -> bool {
        self.jet.is_some()
    }

    pub fn value(&self, x: &[f64]) -> DMatrix<f64> {
        (self.eval)(x)
    }

    pub fn jet(&self, x: &[Jet]) -> Option<JetMatrix> {
        self.jet.as_ref().map(|j| j(x))
    }
}

/// Closed coordinate box `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(&hi).all(|(a, b)| a < b), "degenerate box");
        Self { lo, hi }
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Distance from `x` to the box boundary (negative outside).
    pub fn clearance(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&v, (&a, &b))| (v - a).min(b - v))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains_with_margin(&self, x: &[f64], margin: f64) -> bool {
        x.len() == self.dim() && self.clearance(x) > margin
    }
}

/// Coordinate chart carrying the metric.
#[derive(Debug, Clone)]
pub struct Chart {
    pub name: String,
    pub dim: usize,
    pub domain: DomainBox,
    /// Typical coordinate length; finite-difference steps scale with it.
    pub scale: f64,
    /// Minimal distance from the boundary for admissible points.
    pub margin: f64,
    pub metric: SmoothMap,
}

impl Chart {
    pub fn new(name: impl Into<String>, domain: DomainBox, metric: SmoothMap) -> Self {
        let dim = domain.dim();
        assert_eq!(metric.shape(), (dim, dim), "metric shape does not match chart dimension");
        Self { name: name.into(), dim, domain, scale: 1.0, margin: 1e-3, metric }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn point(self: &Arc<Self>, coords: Vec<f64>) -> Result<ChartPoint> {
        ChartPoint::new(self.clone(), coords)
    }
}

/// Point of a chart, guaranteed to respect the domain margin.
#[derive(Debug, Clone)]
pub struct ChartPoint {
    chart: Arc<Chart>,
    coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(chart: Arc<Chart>, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != chart.dim {
            return Err(GeomError::DimensionMismatch { expected: chart.dim, got: coords.len() });
        }
        if !chart.domain.contains_with_margin(&coords, chart.margin) {
            return Err(GeomError::OutOfDomain {
                chart: chart.name.clone(),
                coords,
                margin: chart.margin,
            });
        }
        Ok(Self { chart, coords })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn metric(&self) -> DMatrix<f64> {
        self.chart.metric.value(&self.coords)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Conformal2;
    impl MatrixExpr for Conformal2 {
        fn shape(&self) -> (usize, usize) {
            (2, 2)
        }
        fn eval<R: Real>(&self, x: &[R]) -> Vec<R> {
            let r2 = x[0].clone() * x[0].clone() + x[1].clone() * x[1].clone();
            let lam = (r2 + 1.0).powi(-2) * 4.0;
            vec![lam.clone(), R::cst(0.0), R::cst(0.0), lam]
        }
    }

    #[test]
    fn expression_closures_agree() {
        let map = SmoothMap::from_expr(Conformal2);
        let x = [0.3, -0.2];
        let v = map.value(&x);
        let j = map.jet(&Jet::seed(&x, 2)).unwrap();
        assert!((v - j.value()).abs().max() < 1e-15);
        assert!(!map.without_jet().has_jet());
    }

    #[test]
    fn margin_is_enforced() {
        let chart = Arc::new(Chart::new("disk", DomainBox::cube(2, -1.0, 1.0), SmoothMap::from_expr(Conformal2)));
        assert!(chart.point(vec![0.0, 0.5]).is_ok());
        let err = chart.point(vec![0.9999, 0.0]).unwrap_err();
        assert!(matches!(err, GeomError::OutOfDomain { .. }));
        let err = chart.point(vec![0.0]).unwrap_err();
        assert!(matches!(err, GeomError::DimensionMismatch { .. }));
    }
}
