//! Forward-mode jets over chart coordinates.
//!
//! [`Jet2`] carries a value together with its exact gradient and Hessian with
//! respect to the `m` chart coordinates. [`Jet1`] is the first-order
//! truncation; it is what remains after one coordinate derivative has been
//! taken of a `Jet2` (see [`Differentiable::partial`]). Plain `f64` closes the
//! tower. Every tensor calculus routine is written against [`Scalar`] so the
//! same code runs at all three orders.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{check_dim, Error, Result};
use crate::geometry::ChartPoint;

/// Minimal ring interface shared by `f64`, [`Jet1`] and [`Jet2`].
pub trait Scalar: Clone + Debug + Send + Sync + 'static {
    fn constant(c: f64, dim: usize) -> Self;
    fn value(&self) -> f64;
    fn dim(&self) -> usize;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, c: f64) -> Self;
    fn recip(&self) -> Result<Self>;

    fn neg(&self) -> Self {
        self.scale(-1.0)
    }
    fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.recip()?))
    }
    fn zero_like(&self) -> Self {
        Self::constant(0.0, self.dim())
    }
    fn add_const(&self, c: f64) -> Self {
        self.add(&Self::constant(c, self.dim()))
    }
    /// Exactly zero, derivatives included.
    fn is_zero(&self) -> bool;
    /// `self += a b` without temporaries.
    fn mul_acc(&mut self, a: &Self, b: &Self) {
        *self = self.add(&a.mul(b));
    }
}

/// Scalars that can be differentiated once more along a chart coordinate.
pub trait Differentiable: Scalar {
    type Lower: Scalar;
    /// `∂/∂x^k`, one order lower.
    fn partial(&self, k: usize) -> Self::Lower;
    /// Truncation to one order lower.
    fn lower(&self) -> Self::Lower;
}

impl Scalar for f64 {
    fn constant(c: f64, _dim: usize) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn dim(&self) -> usize {
        0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    fn recip(&self) -> Result<Self> {
        if *self == 0.0 {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(1.0 / self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn mul_acc(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

/// Value and gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet1 {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl Jet1 {
    pub fn new(value: f64, grad: Vec<f64>) -> Self {
        Jet1 { value, grad }
    }

    /// `g ∘ self` for a univariate `g` with `g(v) = f0`, `g'(v) = f1`.
    fn chain(&self, f0: f64, f1: f64) -> Jet1 {
        Jet1 {
            value: f0,
            grad: self.grad.iter().map(|g| f1 * g).collect(),
        }
    }

    pub fn ln(&self) -> Result<Jet1> {
        if self.value <= 0.0 {
            return Err(Error::Domain(format!("log of non-positive value {}", self.value)));
        }
        Ok(self.chain(self.value.ln(), 1.0 / self.value))
    }
}

impl Scalar for Jet1 {
    fn constant(c: f64, dim: usize) -> Self {
        Jet1 {
            value: c,
            grad: vec![0.0; dim],
        }
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn dim(&self) -> usize {
        self.grad.len()
    }
    fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.grad.len(), o.grad.len());
        Jet1 {
            value: self.value + o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a + b).collect(),
        }
    }
    fn sub(&self, o: &Self) -> Self {
        debug_assert_eq!(self.grad.len(), o.grad.len());
        Jet1 {
            value: self.value - o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a - b).collect(),
        }
    }
    fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.grad.len(), o.grad.len());
        let (a, b) = (self.value, o.value);
        Jet1 {
            value: a * b,
            grad: self
                .grad
                .iter()
                .zip(&o.grad)
                .map(|(ga, gb)| a * gb + b * ga)
                .collect(),
        }
    }
    fn scale(&self, c: f64) -> Self {
        Jet1 {
            value: self.value * c,
            grad: self.grad.iter().map(|g| g * c).collect(),
        }
    }
    fn recip(&self) -> Result<Self> {
        if self.value == 0.0 {
            return Err(Error::Domain("division by zero".into()));
        }
        let v = self.value;
        Ok(self.chain(1.0 / v, -1.0 / (v * v)))
    }
    fn is_zero(&self) -> bool {
        self.value == 0.0 && self.grad.iter().all(|g| *g == 0.0)
    }
    fn mul_acc(&mut self, a: &Self, b: &Self) {
        debug_assert_eq!(a.grad.len(), b.grad.len());
        let (va, vb) = (a.value, b.value);
        self.value += va * vb;
        for ((g, ga), gb) in self.grad.iter_mut().zip(&a.grad).zip(&b.grad) {
            *g += va * gb + vb * ga;
        }
    }
}

impl Differentiable for Jet1 {
    type Lower = f64;
    fn partial(&self, k: usize) -> f64 {
        self.grad[k]
    }
    fn lower(&self) -> f64 {
        self.value
    }
}

/// Value, gradient and (symmetric, row-major) Hessian.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet2 {
    pub fn constant(c: f64, dim: usize) -> Self {
        Jet2 {
            value: c,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
        }
    }

    /// The coordinate function `x^k` evaluated at `value`.
    pub fn variable(value: f64, k: usize, dim: usize) -> Self {
        let mut j = Jet2::constant(value, dim);
        j.grad[k] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess_at(&self, l: usize, k: usize) -> f64 {
        self.hess[l * self.dim() + k]
    }

    /// `g ∘ self` with `g(v) = f0`, `g'(v) = f1`, `g''(v) = f2`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        let m = self.dim();
        let mut hess = Vec::with_capacity(m * m);
        for l in 0..m {
            for k in 0..m {
                hess.push(f1 * self.hess[l * m + k] + f2 * (self.grad[l] * self.grad[k]));
            }
        }
        Jet2 {
            value: f0,
            grad: self.grad.iter().map(|g| f1 * g).collect(),
            hess,
        }
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Result<Jet2> {
        let v = self.value;
        if v <= 0.0 {
            return Err(Error::Domain(format!("log of non-positive value {v}")));
        }
        Ok(self.chain(v.ln(), 1.0 / v, -1.0 / (v * v)))
    }

    pub fn sqrt(&self) -> Result<Jet2> {
        let v = self.value;
        if v <= 0.0 {
            return Err(Error::Domain(format!("sqrt of non-positive value {v}")));
        }
        let s = v.sqrt();
        Ok(self.chain(s, 0.5 / s, -0.25 / (s * v)))
    }

    pub fn powi(&self, n: i32) -> Result<Jet2> {
        let v = self.value;
        if n < 0 && v == 0.0 {
            return Err(Error::Domain("negative power of zero".into()));
        }
        let nf = n as f64;
        let d1 = if n == 0 { 0.0 } else { nf * v.powi(n - 1) };
        let d2 = if n == 0 || n == 1 {
            0.0
        } else {
            nf * (nf - 1.0) * v.powi(n - 2)
        };
        Ok(self.chain(v.powi(n), d1, d2))
    }

    /// Real power for a strictly positive base.
    pub fn powf(&self, p: f64) -> Result<Jet2> {
        let v = self.value;
        if v <= 0.0 {
            return Err(Error::Domain(format!("real power of non-positive value {v}")));
        }
        Ok(self.chain(v.powf(p), p * v.powf(p - 1.0), p * (p - 1.0) * v.powf(p - 2.0)))
    }

    pub fn try_div(&self, o: &Jet2) -> Result<Jet2> {
        Scalar::div(self, o)
    }
}

impl Scalar for Jet2 {
    fn constant(c: f64, dim: usize) -> Self {
        Jet2::constant(c, dim)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn dim(&self) -> usize {
        self.grad.len()
    }
    fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.grad.len(), o.grad.len());
        Jet2 {
            value: self.value + o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&o.hess).map(|(a, b)| a + b).collect(),
        }
    }
    fn sub(&self, o: &Self) -> Self {
        debug_assert_eq!(self.grad.len(), o.grad.len());
        Jet2 {
            value: self.value - o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a - b).collect(),
            hess: self.hess.iter().zip(&o.hess).map(|(a, b)| a - b).collect(),
        }
    }
    fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.grad.len(), o.grad.len());
        let m = Scalar::dim(self);
        let (a, b) = (self.value, o.value);
        let mut hess = Vec::with_capacity(m * m);
        for l in 0..m {
            for k in 0..m {
                let i = l * m + k;
                hess.push(
                    a * o.hess[i]
                        + b * self.hess[i]
                        + (self.grad[l] * o.grad[k] + o.grad[l] * self.grad[k]),
                );
            }
        }
        Jet2 {
            value: a * b,
            grad: self
                .grad
                .iter()
                .zip(&o.grad)
                .map(|(ga, gb)| a * gb + b * ga)
                .collect(),
            hess,
        }
    }
    fn scale(&self, c: f64) -> Self {
        Jet2 {
            value: self.value * c,
            grad: self.grad.iter().map(|g| g * c).collect(),
            hess: self.hess.iter().map(|h| h * c).collect(),
        }
    }
    fn recip(&self) -> Result<Self> {
        let v = self.value;
        if v == 0.0 {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)))
    }
    fn is_zero(&self) -> bool {
        self.value == 0.0 && self.grad.iter().all(|g| *g == 0.0) && self.hess.iter().all(|h| *h == 0.0)
    }
    fn mul_acc(&mut self, a: &Self, b: &Self) {
        debug_assert_eq!(a.grad.len(), b.grad.len());
        let m = a.grad.len();
        let (va, vb) = (a.value, b.value);
        self.value += va * vb;
        for l in 0..m {
            self.grad[l] += va * b.grad[l] + vb * a.grad[l];
            let (al, bl) = (a.grad[l], b.grad[l]);
            let row = l * m;
            for k in 0..m {
                self.hess[row + k] += va * b.hess[row + k] + vb * a.hess[row + k] + al * b.grad[k] + bl * a.grad[k];
            }
        }
    }
}

impl Differentiable for Jet2 {
    type Lower = Jet1;
    fn partial(&self, k: usize) -> Jet1 {
        let m = self.dim();
        Jet1 {
            value: self.grad[k],
            grad: self.hess[k * m..(k + 1) * m].to_vec(),
        }
    }
    fn lower(&self) -> Jet1 {
        Jet1 {
            value: self.value,
            grad: self.grad.clone(),
        }
    }
}

macro_rules! ring_ops {
    ($t:ty) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                Scalar::add(&self, &o)
            }
        }
        impl<'a> Add<&'a $t> for &'a $t {
            type Output = $t;
            fn add(self, o: &$t) -> $t {
                Scalar::add(self, o)
            }
        }
        impl Add<f64> for $t {
            type Output = $t;
            fn add(self, c: f64) -> $t {
                self.add_const(c)
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                Scalar::sub(&self, &o)
            }
        }
        impl<'a> Sub<&'a $t> for &'a $t {
            type Output = $t;
            fn sub(self, o: &$t) -> $t {
                Scalar::sub(self, o)
            }
        }
        impl Sub<f64> for $t {
            type Output = $t;
            fn sub(self, c: f64) -> $t {
                self.add_const(-c)
            }
        }
        impl Mul for $t {
            type Output = $t;
            fn mul(self, o: $t) -> $t {
                Scalar::mul(&self, &o)
            }
        }
        impl<'a> Mul<&'a $t> for &'a $t {
            type Output = $t;
            fn mul(self, o: &$t) -> $t {
                Scalar::mul(self, o)
            }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, c: f64) -> $t {
                self.scale(c)
            }
        }
        impl Mul<$t> for f64 {
            type Output = $t;
            fn mul(self, j: $t) -> $t {
                j.scale(self)
            }
        }
        impl<'a> Add<&'a $t> for $t {
            type Output = $t;
            fn add(self, o: &$t) -> $t {
                Scalar::add(&self, o)
            }
        }
        impl<'a> Sub<&'a $t> for $t {
            type Output = $t;
            fn sub(self, o: &$t) -> $t {
                Scalar::sub(&self, o)
            }
        }
        impl<'a> Mul<&'a $t> for $t {
            type Output = $t;
            fn mul(self, o: &$t) -> $t {
                Scalar::mul(&self, o)
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                self.scale(-1.0)
            }
        }
        impl<'a> Neg for &'a $t {
            type Output = $t;
            fn neg(self) -> $t {
                self.scale(-1.0)
            }
        }
    };
}

ring_ops!(Jet1);
ring_ops!(Jet2);

/// The chart coordinate functions at `point`, seeded as jets.
pub fn lift(point: &ChartPoint, dim: usize) -> Result<Vec<Jet2>> {
    check_dim(dim, point.coords.len())?;
    Ok(lift_coords(&point.coords))
}

pub fn lift_coords(coords: &[f64]) -> Vec<Jet2> {
    let m = coords.len();
    coords
        .iter()
        .enumerate()
        .map(|(k, &v)| Jet2::variable(v, k, m))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(c: &[f64]) -> ChartPoint {
        ChartPoint::new("test", c.to_vec())
    }

    #[test]
    fn lift_gives_coordinate_functions() {
        let x = lift(&pt(&[1.0, 0.0]), 2).unwrap();
        assert_eq!(x[0].value, 1.0);
        assert_eq!(x[1].value, 0.0);
        assert_eq!(x[0].grad, vec![1.0, 0.0]);
        assert_eq!(x[1].grad, vec![0.0, 1.0]);
        assert!(x.iter().all(|j| j.hess.iter().all(|&h| h == 0.0)));

        let y = lift(&pt(&[3.0]), 1).unwrap();
        assert_eq!((y[0].value, y[0].grad[0], y[0].hess[0]), (3.0, 1.0, 0.0));
    }

    #[test]
    fn lift_rejects_wrong_dimension() {
        assert_eq!(
            lift(&pt(&[1.0, 2.0]), 3),
            Err(Error::Dimension { expected: 3, got: 2 })
        );
    }

    #[test]
    fn product_rule() {
        let x = lift(&pt(&[2.0, 5.0]), 2).unwrap();
        let f = &x[0] * &x[1];
        assert_eq!(f.value, 10.0);
        assert_eq!(f.grad, vec![5.0, 2.0]);
        assert_eq!(f.hess, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn exp_and_log() {
        let x = lift(&pt(&[0.0]), 1).unwrap();
        let e = x[0].exp();
        assert_eq!((e.value, e.grad[0], e.hess[0]), (1.0, 1.0, 1.0));

        let x = lift(&pt(&[2.0]), 1).unwrap();
        let l = x[0].ln().unwrap();
        assert_eq!(l.value, 2f64.ln());
        assert_eq!(l.grad[0], 0.5);
        assert_eq!(l.hess[0], -0.25);
    }

    #[test]
    fn oscillator_energy_jet() {
        // f = (p^2 + q^2)/2 at (q,p) = (1,0)
        let x = lift(&pt(&[1.0, 0.0]), 2).unwrap();
        let f = (&x[0] * &x[0] + &x[1] * &x[1]) * 0.5;
        assert_eq!(f.value, 0.5);
        assert_eq!(f.grad, vec![1.0, 0.0]);
        assert_eq!(f.hess, vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn domain_errors() {
        let x = lift(&pt(&[0.0, -1.0]), 2).unwrap();
        assert!(matches!(x[0].ln(), Err(Error::Domain(_))));
        assert!(matches!(x[1].sqrt(), Err(Error::Domain(_))));
        assert!(matches!(x[1].try_div(&x[0]), Err(Error::Domain(_))));
        assert!(matches!(x[1].powf(0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn quadratic_forms_are_exact() {
        // Q(x) = x^T A x with symmetric A; the Hessian must be 2A bit for bit.
        let a = [[1.5, -0.25, 2.0], [-0.25, 3.0, 0.5], [2.0, 0.5, -1.0]];
        let x = lift(&pt(&[0.3, -1.7, 2.2]), 3).unwrap();
        let mut q = Jet2::constant(0.0, 3);
        for i in 0..3 {
            for j in 0..3 {
                q = q + (&x[i] * &x[j]) * a[i][j];
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(q.hess_at(i, j), 2.0 * a[i][j]);
            }
        }
    }

    #[test]
    fn partial_of_jet2_is_the_jet1_of_the_derivative() {
        let x = lift(&pt(&[0.7, 1.3]), 2).unwrap();
        // f = x^2 y, df/dx = 2xy, d/dx(df/dx) = 2y, d/dy(df/dx) = 2x
        let f = &(&x[0] * &x[0]) * &x[1];
        let fx = f.partial(0);
        assert!((fx.value - 2.0 * 0.7 * 1.3).abs() < 1e-15);
        assert!((fx.grad[0] - 2.0 * 1.3).abs() < 1e-15);
        assert!((fx.grad[1] - 2.0 * 0.7).abs() < 1e-15);
    }

    /// Random smooth composite expressions in three variables, built from a
    /// small grammar, evaluated both on jets and on plain floats.
    #[derive(Clone, Debug)]
    enum Expr {
        Var(usize),
        Const(f64),
        Add(Box<Expr>, Box<Expr>),
        Mul(Box<Expr>, Box<Expr>),
        Exp(Box<Expr>),
        LogSq(Box<Expr>),
        SqrtSq(Box<Expr>),
        Recip(Box<Expr>),
        Pow3(Box<Expr>),
    }

    impl Expr {
        fn eval_f(&self, x: &[f64]) -> f64 {
            match self {
                Expr::Var(i) => x[*i],
                Expr::Const(c) => *c,
                Expr::Add(a, b) => a.eval_f(x) + b.eval_f(x),
                Expr::Mul(a, b) => a.eval_f(x) * b.eval_f(x),
                Expr::Exp(a) => (0.3 * a.eval_f(x)).exp(),
                Expr::LogSq(a) => (1.0 + a.eval_f(x).powi(2)).ln(),
                Expr::SqrtSq(a) => (1.0 + a.eval_f(x).powi(2)).sqrt(),
                Expr::Recip(a) => 1.0 / (2.0 + a.eval_f(x).powi(2)),
                Expr::Pow3(a) => a.eval_f(x).powi(3),
            }
        }

        fn eval_j(&self, x: &[Jet2]) -> Jet2 {
            let m = x.len();
            let one_plus_sq = |a: &Jet2, c: f64| (a * a) + c;
            match self {
                Expr::Var(i) => x[*i].clone(),
                Expr::Const(c) => Jet2::constant(*c, m),
                Expr::Add(a, b) => a.eval_j(x) + b.eval_j(x),
                Expr::Mul(a, b) => a.eval_j(x) * b.eval_j(x),
                Expr::Exp(a) => (a.eval_j(x) * 0.3).exp(),
                Expr::LogSq(a) => one_plus_sq(&a.eval_j(x), 1.0).ln().unwrap(),
                Expr::SqrtSq(a) => one_plus_sq(&a.eval_j(x), 1.0).sqrt().unwrap(),
                Expr::Recip(a) => one_plus_sq(&a.eval_j(x), 2.0).recip().unwrap(),
                Expr::Pow3(a) => a.eval_j(x).powi(3).unwrap(),
            }
        }
    }

    fn expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0usize..3).prop_map(Expr::Var),
            (-1.0f64..1.0).prop_map(Expr::Const),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(a.into(), b.into())),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(a.into(), b.into())),
                inner.clone().prop_map(|a| Expr::Exp(a.into())),
                inner.clone().prop_map(|a| Expr::LogSq(a.into())),
                inner.clone().prop_map(|a| Expr::SqrtSq(a.into())),
                inner.clone().prop_map(|a| Expr::Recip(a.into())),
                inner.prop_map(|a| Expr::Pow3(a.into())),
            ]
        })
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn jets_match_central_differences(e in expr(), x0 in -1.0f64..1.0, x1 in -1.0f64..1.0, x2 in -1.0f64..1.0) {
            let x = [x0, x1, x2];
            let j = e.eval_j(&lift_coords(&x));
            let h = 1e-5;
            let f = |y: &[f64]| e.eval_f(y);
            for l in 0..3 {
                let mut xp = x; xp[l] += h;
                let mut xm = x; xm[l] -= h;
                let fd = (f(&xp) - f(&xm)) / (2.0 * h);
                prop_assert!(close(j.grad[l], fd, 1e-6), "grad {l}: {} vs {}", j.grad[l], fd);
                for k in 0..3 {
                    // derivative of the analytic gradient: isolates the
                    // second-order propagation from FD truncation of the value
                    let gp = e.eval_j(&lift_coords(&{ let mut y = x; y[k] += h; y })).grad[l];
                    let gm = e.eval_j(&lift_coords(&{ let mut y = x; y[k] -= h; y })).grad[l];
                    let fd2 = (gp - gm) / (2.0 * h);
                    prop_assert!(close(j.hess_at(l, k), fd2, 1e-6), "hess {l}{k}: {} vs {}", j.hess_at(l, k), fd2);
                    prop_assert_eq!(j.hess_at(l, k), j.hess_at(k, l));
                }
            }
        }

        #[test]
        fn chain_rule_composition(x0 in 0.1f64..2.0, x1 in 0.1f64..2.0) {
            // f(u) = u ln u applied to g = x0*x1 + 1: the jet of f∘g must equal
            // the second-order chain rule applied by hand to the jet of g.
            let x = lift_coords(&[x0, x1]);
            let g = &x[0] * &x[1] + 1.0;
            let direct = g.ln().unwrap() * g.clone();
            let u = g.value;
            let (f1, f2) = (u.ln() + 1.0, 1.0 / u);
            prop_assert!(close(direct.value, u * u.ln(), 1e-15));
            for l in 0..2 {
                prop_assert!(close(direct.grad[l], f1 * g.grad[l], 1e-15));
                for k in 0..2 {
                    let by_hand = f2 * g.grad[l] * g.grad[k] + f1 * g.hess_at(l, k);
                    prop_assert!(close(direct.hess_at(l, k), by_hand, 1e-15));
                }
            }
        }
    }
}
