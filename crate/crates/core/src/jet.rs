//! Truncated multivariate Taylor polynomials ("jets").
//!
//! A [`Jet`] stores the Taylor coefficients of a smooth function of `nvars`
//! variables about a base point, truncated at total degree `order ≤ 3`.
//! Arithmetic on jets is the arithmetic of the underlying functions modulo
//! terms of degree `> order`, so evaluating a closed-form expression on jets
//! yields its exact derivatives (up to rounding). Differentiating a jet with
//! [`Jet::diff`] lowers its order by one, which lets a pipeline of geometric
//! quantities (metric → Christoffel symbols → curvature → ...) be computed
//! with each stage carrying exactly as many derivatives as it still owns.
//!
//! Monomials are stored in graded order, so a jet of order `k` is a prefix
//! of the same jet at order `k + 1`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

/// Highest supported truncation order.
pub const MAX_ORDER: usize = 3;

/// Monomial bookkeeping shared by all jets in `nvars` variables.
#[derive(Debug)]
pub struct JetLayout {
    nvars: usize,
    exps: Vec<Vec<u8>>,
    /// `ends[d]`: number of monomials of degree `≤ d`.
    ends: [usize; MAX_ORDER + 1],
    /// `(i, j, k)` with `x^i · x^j = x^k`, sorted by the degree of `k`.
    mul: Vec<(u32, u32, u32)>,
    mul_ends: [usize; MAX_ORDER + 1],
    /// Per variable: `(src, dst, factor)` with `∂_v x^src = factor · x^dst`,
    /// sorted by the degree of `src`.
    diff: Vec<Vec<(u32, u32, f64)>>,
    diff_ends: Vec<[usize; MAX_ORDER + 1]>,
}

impl JetLayout {
    fn build(nvars: usize) -> Self {
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut ends = [0usize; MAX_ORDER + 1];
        for (d, end) in ends.iter_mut().enumerate() {
            let mut cur = vec![0u8; nvars];
            push_monomials(&mut exps, &mut cur, 0, d as u8);
            *end = exps.len();
        }
        let index: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let degree = |e: &[u8]| e.iter().map(|&v| v as usize).sum::<usize>();

        let mut mul = Vec::new();
        for (i, ei) in exps.iter().enumerate() {
            for (j, ej) in exps.iter().enumerate() {
                if degree(ei) + degree(ej) > MAX_ORDER {
                    continue;
                }
                let ek: Vec<u8> = ei.iter().zip(ej).map(|(a, b)| a + b).collect();
                mul.push((i as u32, j as u32, index[&ek] as u32));
            }
        }
        mul.sort_by_key(|&(_, _, k)| degree(&exps[k as usize]));
        let mut mul_ends = [0usize; MAX_ORDER + 1];
        for (d, end) in mul_ends.iter_mut().enumerate() {
            *end = mul
                .iter()
                .take_while(|&&(_, _, k)| degree(&exps[k as usize]) <= d)
                .count();
        }

        let mut diff = Vec::with_capacity(nvars);
        let mut diff_ends = Vec::with_capacity(nvars);
        for v in 0..nvars {
            let mut table = Vec::new();
            for (s, es) in exps.iter().enumerate() {
                if es[v] == 0 {
                    continue;
                }
                let mut ed = es.clone();
                ed[v] -= 1;
                table.push((s as u32, index[&ed] as u32, es[v] as f64));
            }
            // already sorted by source degree because `exps` is graded
            let mut de = [0usize; MAX_ORDER + 1];
            for (d, end) in de.iter_mut().enumerate() {
                *end = table
                    .iter()
                    .take_while(|&&(s, _, _)| degree(&exps[s as usize]) <= d)
                    .count();
            }
            diff.push(table);
            diff_ends.push(de);
        }

        Self { nvars, exps, ends, mul, mul_ends, diff, diff_ends }
    }

    /// Shared layout for `nvars` variables.
    pub fn shared(nvars: usize) -> Arc<JetLayout> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<JetLayout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet layout cache poisoned");
        guard
            .entry(nvars)
            .or_insert_with(|| Arc::new(JetLayout::build(nvars)))
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Number of coefficients of a jet of the given order.
    pub fn len(&self, order: usize) -> usize {
        self.ends[order]
    }

    /// Exponent vector of monomial `idx`.
    pub fn exponents(&self, idx: usize) -> &[u8] {
        &self.exps[idx]
    }

    /// Index of the monomial with the given exponents, if it is stored.
    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.exps.iter().position(|e| e.as_slice() == exps)
    }
}

fn push_monomials(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, var: usize, left: u8) {
    if var + 1 == cur.len() || cur.is_empty() {
        if cur.is_empty() {
            if left == 0 {
                out.push(Vec::new());
            }
            return;
        }
        cur[var] = left;
        out.push(cur.clone());
        cur[var] = 0;
        return;
    }
    // descending exponent on `var` puts e_0, e_1, ... first among degree one
    for k in (0..=left).rev() {
        cur[var] = k;
        push_monomials(out, cur, var + 1, left - k);
    }
    cur[var] = 0;
}

/// Truncated Taylor polynomial. A jet without a layout is a constant and
/// combines with jets of any layout.
#[derive(Clone)]
pub struct Jet {
    layout: Option<Arc<JetLayout>>,
    order: u8,
    c: Vec<f64>,
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        let same_layout = match (&self.layout, &other.layout) {
            (None, None) => true,
            (Some(a), Some(b)) => Arc::ptr_eq(a, b),
            _ => false,
        };
        same_layout && self.order == other.order && self.c == other.c
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.layout {
            None => write!(f, "Jet({})", self.c[0]),
            Some(_) => write!(f, "Jet[o{}]{:?}", self.order, self.c),
        }
    }
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Self { layout: None, order: MAX_ORDER as u8, c: vec![v] }
    }

    /// The coordinate function `x_var` expanded about `value`.
    pub fn variable(layout: &Arc<JetLayout>, order: usize, var: usize, value: f64) -> Self {
        assert!(order <= MAX_ORDER && var < layout.nvars);
        let mut c = vec![0.0; layout.len(order)];
        c[0] = value;
        if order >= 1 {
            c[1 + var] = 1.0;
        }
        Self { layout: Some(layout.clone()), order: order as u8, c }
    }

    /// Jet seeded at every coordinate of `x`.
    pub fn seed(x: &[f64], order: usize) -> Vec<Jet> {
        let layout = JetLayout::shared(x.len());
        x.iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(&layout, order, i, v))
            .collect()
    }

    /// Builds a jet from raw coefficients (length must match the order).
    pub fn from_coefficients(layout: &Arc<JetLayout>, order: usize, c: Vec<f64>) -> Self {
        assert_eq!(c.len(), layout.len(order), "coefficient count does not match order");
        Self { layout: Some(layout.clone()), order: order as u8, c }
    }

    pub fn is_constant(&self) -> bool {
        self.layout.is_none()
    }

    /// Truncation order; constants report `MAX_ORDER`.
    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    /// First partial derivative `∂_var` at the base point.
    pub fn grad(&self, var: usize) -> f64 {
        match &self.layout {
            None => 0.0,
            Some(_) => {
                assert!(self.order >= 1, "gradient of an order-0 jet");
                self.c[1 + var]
            }
        }
    }

    /// Truncates to a lower order.
    pub fn truncate(&self, order: usize) -> Self {
        match &self.layout {
            None => self.clone(),
            Some(l) => {
                let o = order.min(self.order as usize);
                Self { layout: Some(l.clone()), order: o as u8, c: self.c[..l.len(o)].to_vec() }
            }
        }
    }

    /// Partial derivative with respect to `var`; the order drops by one.
    pub fn diff(&self, var: usize) -> Self {
        match &self.layout {
            None => Jet::constant(0.0),
            Some(l) => {
                assert!(self.order >= 1, "cannot differentiate an order-0 jet");
                let o = self.order as usize - 1;
                let mut c = vec![0.0; l.len(o)];
                for &(s, d, f) in &l.diff[var][..l.diff_ends[var][o + 1]] {
                    c[d as usize] += f * self.c[s as usize];
                }
                Self { layout: Some(l.clone()), order: o as u8, c }
            }
        }
    }

    fn combine_layout(a: &Jet, b: &Jet) -> Option<(Arc<JetLayout>, usize)> {
        match (&a.layout, &b.layout) {
            (None, None) => None,
            (Some(l), None) => Some((l.clone(), a.order as usize)),
            (None, Some(l)) => Some((l.clone(), b.order as usize)),
            (Some(l), Some(m)) => {
                debug_assert_eq!(l.nvars, m.nvars, "mixing jets of different dimension");
                Some((l.clone(), a.order.min(b.order) as usize))
            }
        }
    }

    fn add_ref(&self, other: &Jet, sign: f64) -> Jet {
        match Self::combine_layout(self, other) {
            None => Jet::constant(self.c[0] + sign * other.c[0]),
            Some((l, o)) => {
                let len = l.len(o);
                let mut c = vec![0.0; len];
                for (k, ck) in c.iter_mut().enumerate() {
                    let a = self.c.get(k).copied().unwrap_or(0.0);
                    let b = other.c.get(k).copied().unwrap_or(0.0);
                    *ck = a + sign * b;
                }
                Jet { layout: Some(l), order: o as u8, c }
            }
        }
    }

    fn mul_ref(&self, other: &Jet) -> Jet {
        match (&self.layout, &other.layout) {
            (None, None) => Jet::constant(self.c[0] * other.c[0]),
            (Some(_), None) => self.scale(other.c[0]),
            (None, Some(_)) => other.scale(self.c[0]),
            (Some(l), Some(_)) => {
                let o = self.order.min(other.order) as usize;
                let mut c = vec![0.0; l.len(o)];
                for &(i, j, k) in &l.mul[..l.mul_ends[o]] {
                    c[k as usize] += self.c[i as usize] * other.c[j as usize];
                }
                Jet { layout: Some(l.clone()), order: o as u8, c }
            }
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { layout: self.layout.clone(), order: self.order, c: self.c.iter().map(|v| v * s).collect() }
    }

    /// `f(self)` given `f, f', f'', f'''` at the base value.
    fn compose(&self, d: [f64; MAX_ORDER + 1]) -> Jet {
        if self.layout.is_none() {
            return Jet::constant(d[0]);
        }
        let mut delta = self.clone();
        delta.c[0] = 0.0;
        let mut out = Jet::constant(d[0]);
        let mut power = Jet::constant(1.0);
        let mut fact = 1.0;
        for (k, dk) in d.iter().enumerate().skip(1).take(self.order as usize) {
            power = power.mul_ref(&delta);
            fact *= k as f64;
            out = out.add_ref(&power.scale(dk / fact), 1.0);
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let x = self.c[0];
        self.compose([1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x), -6.0 / (x * x * x * x)])
    }

    pub fn sqrt(&self) -> Jet {
        let x = self.c[0];
        let s = x.sqrt();
        self.compose([s, 0.5 / s, -0.25 / (x * s), 0.375 / (x * x * s)])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn exp(&self) -> Jet {
        let e = self.c[0].exp();
        self.compose([e, e, e, e])
    }

    pub fn ln(&self) -> Jet {
        let x = self.c[0];
        self.compose([x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)])
    }

    pub fn powi(&self, k: i32) -> Jet {
        let x = self.c[0];
        let kf = k as f64;
        let p = |e: i32| if e == 0 { 1.0 } else { x.powi(e) };
        self.compose([
            p(k),
            kf * p(k - 1),
            kf * (kf - 1.0) * p(k - 2),
            kf * (kf - 1.0) * (kf - 2.0) * p(k - 3),
        ])
    }
}

impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, rhs: &'a Jet) -> Jet {
        self.add_ref(rhs, 1.0)
    }
}
impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, rhs: &'a Jet) -> Jet {
        self.add_ref(rhs, -1.0)
    }
}
impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, rhs: &'a Jet) -> Jet {
        self.mul_ref(rhs)
    }
}
impl<'a> Div<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn div(self, rhs: &'a Jet) -> Jet {
        self.mul_ref(&rhs.recip())
    }
}
impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        self.add_ref(&rhs, 1.0)
    }
}
impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self.add_ref(&rhs, -1.0)
    }
}
impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.mul_ref(&rhs)
    }
}
impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        self.mul_ref(&rhs.recip())
    }
}
impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}
impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}
impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}
impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}
impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}
impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        *self = self.add_ref(rhs, 1.0);
    }
}
impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        *self = self.add_ref(rhs, -1.0);
    }
}
impl MulAssign<f64> for Jet {
    fn mul_assign(&mut self, rhs: f64) {
        for v in &mut self.c {
            *v *= rhs;
        }
    }
}

/// Scalar interface shared by `f64` and [`Jet`], so closed-form metrics and
/// distributions can be written once and evaluated either pointwise or on
/// Taylor jets.
pub trait Real:
    Clone
    + fmt::Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn recip(&self) -> Self;
    fn powi(&self, k: i32) -> Self;
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn recip(&self) -> Self {
        1.0 / *self
    }
    fn powi(&self, k: i32) -> Self {
        f64::powi(*self, k)
    }
}

impl Real for Jet {
    fn cst(v: f64) -> Self {
        Jet::constant(v)
    }
    fn value(&self) -> f64 {
        self.c[0]
    }
    fn sqrt(&self) -> Self {
        Jet::sqrt(self)
    }
    fn sin(&self) -> Self {
        Jet::sin(self)
    }
    fn cos(&self) -> Self {
        Jet::cos(self)
    }
    fn recip(&self) -> Self {
        Jet::recip(self)
    }
    fn powi(&self, k: i32) -> Self {
        Jet::powi(self, k)
    }
}

/// Dense row-major matrix of jets.
#[derive(Clone, Debug)]
pub struct JetMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Jet>,
}

impl JetMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Jet>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Jet) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Jet::constant(0.0))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| Jet::constant(if i == j { 1.0 } else { 0.0 }))
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| Jet::constant(m[(i, j)]))
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Jet) {
        self.data[i * self.cols + j] = v;
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn value(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).value())
    }

    /// Matrix of first partials `∂_var` at the base point.
    pub fn grad(&self, var: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).grad(var))
    }

    pub fn diff(&self, var: usize) -> Self {
        self.map(|x| x.diff(var))
    }

    /// Truncates every entry to `order` (constants are kept).
    pub fn truncate_to(&self, order: usize) -> Self {
        self.map(|x| x.truncate(order))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn scale(&self, s: &Jet) -> Self {
        self.map(|x| x * s)
    }

    pub fn scale_f(&self, s: f64) -> Self {
        self.map(|x| x.scale(s))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = Jet::constant(0.0);
            for k in 0..self.cols {
                acc += &(self.get(i, k) * other.get(k, j));
            }
            acc
        })
    }

    /// Product with a constant matrix on the right.
    pub fn mul_f(&self, other: &DMatrix<f64>) -> Self {
        assert_eq!(self.cols, other.nrows());
        Self::from_fn(self.rows, other.ncols(), |i, j| {
            let mut acc = Jet::constant(0.0);
            for k in 0..self.cols {
                let w = other[(k, j)];
                if w != 0.0 {
                    acc += &self.get(i, k).scale(w);
                }
            }
            acc
        })
    }

    /// Product with a constant matrix on the left.
    pub fn left_mul_f(&self, other: &DMatrix<f64>) -> Self {
        assert_eq!(other.ncols(), self.rows);
        Self::from_fn(other.nrows(), self.cols, |i, j| {
            let mut acc = Jet::constant(0.0);
            for k in 0..self.rows {
                let w = other[(i, k)];
                if w != 0.0 {
                    acc += &self.get(k, j).scale(w);
                }
            }
            acc
        })
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn trace(&self) -> Jet {
        let mut acc = Jet::constant(0.0);
        for i in 0..self.rows.min(self.cols) {
            acc += self.get(i, i);
        }
        acc
    }

    /// `Σ_ij a_ij b_ji`, i.e. `tr(AB)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> Jet {
        let mut acc = Jet::constant(0.0);
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += &(self.get(i, j) * other.get(j, i));
            }
        }
        acc
    }

    /// Column `j` as a vector of jets.
    pub fn column(&self, j: usize) -> Vec<Jet> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn mul_vec(&self, v: &[Jet]) -> Vec<Jet> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Jet::constant(0.0);
                for (k, vk) in v.iter().enumerate() {
                    acc += &(self.get(i, k) * vk);
                }
                acc
            })
            .collect()
    }

    /// Inverse by Newton–Schulz refinement of the inverse of the base value.
    /// Each step doubles the number of correct Taylor orders. Returns `None`
    /// when the base matrix is singular.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let base = self.value().try_inverse()?;
        let n = self.rows;
        let two = JetMatrix::identity(n).scale_f(2.0);
        let mut x = JetMatrix::from_matrix(&base);
        // orders 1, 2, 4 after 0, 1, 2 steps
        for _ in 0..2 {
            let ax = self.mul(&x);
            x = x.mul(&two.sub(&ax));
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn layout_counts_and_degree_one_ordering() {
        let l = JetLayout::shared(3);
        assert_eq!(l.len(0), 1);
        assert_eq!(l.len(1), 4);
        assert_eq!(l.len(2), 10);
        assert_eq!(l.len(3), 20);
        for v in 0..3 {
            let e = l.exponents(1 + v);
            assert_eq!(e[v], 1);
            assert_eq!(e.iter().map(|&x| x as usize).sum::<usize>(), 1);
        }
        let l7 = JetLayout::shared(7);
        assert_eq!(l7.len(3), 120);
    }

    #[test]
    fn product_and_derivatives_match_hand_expansion() {
        // f(x, y) = x^2 y + sin(x) at (0.3, -0.7)
        let x0 = [0.3, -0.7];
        let v = Jet::seed(&x0, 3);
        let f = &(&(&v[0] * &v[0]) * &v[1]) + &v[0].sin();
        let (x, y) = (x0[0], x0[1]);
        assert!(approx(f.value(), x * x * y + x.sin(), 1e-15));
        assert!(approx(f.grad(0), 2.0 * x * y + x.cos(), 1e-15));
        assert!(approx(f.grad(1), x * x, 1e-15));
        let fxx = f.diff(0).diff(0).value();
        assert!(approx(fxx, 2.0 * y - x.sin(), 1e-14));
        let fxy = f.diff(0).diff(1).value();
        assert!(approx(fxy, 2.0 * x, 1e-14));
        let fxxx = f.diff(0).diff(0).diff(0).value();
        assert!(approx(fxxx, -x.cos(), 1e-14));
        let fxxy = f.diff(1).diff(0).diff(0).value();
        assert!(approx(fxxy, 2.0, 1e-14));
    }

    #[test]
    fn elementary_functions_third_derivatives() {
        let x0 = 0.8;
        let v = Jet::seed(&[x0], 3);
        let checks: Vec<(Jet, [f64; 4])> = vec![
            (v[0].recip(), [1.0 / x0, -1.0 / x0.powi(2), 2.0 / x0.powi(3), -6.0 / x0.powi(4)]),
            (
                v[0].sqrt(),
                [x0.sqrt(), 0.5 * x0.powf(-0.5), -0.25 * x0.powf(-1.5), 0.375 * x0.powf(-2.5)],
            ),
            (v[0].exp(), [x0.exp(); 4]),
            (v[0].powi(-2), [x0.powi(-2), -2.0 * x0.powi(-3), 6.0 * x0.powi(-4), -24.0 * x0.powi(-5)]),
        ];
        for (jet, d) in checks {
            let mut cur = jet.clone();
            for (k, dk) in d.iter().enumerate() {
                assert!(approx(cur.value(), *dk, 1e-13), "derivative {k}: {} vs {dk}", cur.value());
                if k < 3 {
                    cur = cur.diff(0);
                }
            }
        }
    }

    #[test]
    fn differentiation_lowers_order_and_truncation_is_prefix() {
        let v = Jet::seed(&[1.0, 2.0], 3);
        let f = &v[0] * &v[1];
        assert_eq!(f.order(), 3);
        assert_eq!(f.diff(0).order(), 2);
        let t = f.truncate(1);
        assert_eq!(t.coefficients(), &f.coefficients()[..3]);
    }

    #[test]
    fn matrix_inverse_has_exact_derivatives() {
        // A(t) = [[2 + t, t^2], [sin t, 3]]
        let t = Jet::seed(&[0.4], 3);
        let a = JetMatrix::from_vec(
            2,
            2,
            vec![t[0].clone() + 2.0, &t[0] * &t[0], t[0].sin(), Jet::constant(3.0)],
        );
        let inv = a.inverse().unwrap();
        let prod = a.mul(&inv);
        for i in 0..2 {
            for j in 0..2 {
                let e = prod.get(i, j);
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((e.value() - target).abs() < 1e-14);
                for c in &e.coefficients()[1..] {
                    assert!(c.abs() < 1e-13, "non-identity Taylor coefficient {c}");
                }
            }
        }
    }

    #[test]
    fn constants_mix_with_jets() {
        let v = Jet::seed(&[0.5], 2);
        let c = Jet::constant(3.0);
        let s = &c * &v[0];
        assert_eq!(s.order(), 2);
        assert!(approx(s.grad(0), 3.0, 1e-15));
        let z = &c - &c;
        assert!(z.is_constant() && z.value() == 0.0);
    }
}
