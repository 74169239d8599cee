//! Small dense matrices over any [`Scalar`], so that products, solves,
//! determinants and inverses of jet-valued tensors carry exact derivatives.

use crate::ad::Scalar;
use crate::error::{check_dim, Error, Result};

/// Pivots below this fraction of the largest entry count as singular.
pub const SINGULAR_REL_TOL: f64 = 1e-12;
const CONDITION_WARN: f64 = 1e10;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        check_dim(rows * cols, data.len())?;
        Ok(Mat { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize, dim: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![S::constant(0.0, dim); rows * cols],
        }
    }

    pub fn identity(n: usize, dim: usize) -> Self {
        let mut m = Self::zeros(n, n, dim);
        for i in 0..n {
            m.data[i * n + i] = S::constant(1.0, dim);
        }
        m
    }

    /// Jet dimension of the entries.
    pub fn jet_dim(&self) -> usize {
        self.data.first().map_or(0, |s| s.dim())
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn values(&self) -> Mat<f64> {
        self.map(|s| s.value())
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Mat {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn matmul(&self, o: &Self) -> Result<Self> {
        check_dim(self.cols, o.rows)?;
        let d = self.jet_dim().max(o.jet_dim());
        let mut out = Vec::with_capacity(self.rows * o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = S::constant(0.0, d);
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), o.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc.mul_acc(a, b);
                    }
                }
                out.push(acc);
            }
        }
        Ok(Mat {
            rows: self.rows,
            cols: o.cols,
            data: out,
        })
    }

    pub fn matvec(&self, v: &[S]) -> Result<Vec<S>> {
        check_dim(self.cols, v.len())?;
        let d = self.jet_dim();
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = S::constant(0.0, d);
                for (k, vk) in v.iter().enumerate() {
                    let a = self.get(i, k);
                    if !a.is_zero() && !vk.is_zero() {
                        acc.mul_acc(a, vk);
                    }
                }
                acc
            })
            .collect())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        check_dim(self.data.len(), o.data.len())?;
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        check_dim(self.data.len(), o.data.len())?;
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|s| s.scale(c))
    }

    pub fn trace(&self) -> S {
        let d = self.jet_dim();
        (0..self.rows.min(self.cols)).fold(S::constant(0.0, d), |acc, i| acc.add(self.get(i, i)))
    }

    /// `self · c` for a constant matrix `c`.
    pub fn matmul_const(&self, c: &Mat<f64>) -> Result<Self> {
        check_dim(self.cols, c.rows)?;
        let d = self.jet_dim();
        let mut out = Vec::with_capacity(self.rows * c.cols);
        for i in 0..self.rows {
            for j in 0..c.cols {
                let mut acc = S::constant(0.0, d);
                for k in 0..self.cols {
                    let w = *c.get(k, j);
                    if w != 0.0 && !self.get(i, k).is_zero() {
                        acc = acc.add(&self.get(i, k).scale(w));
                    }
                }
                out.push(acc);
            }
        }
        Ok(Mat {
            rows: self.rows,
            cols: c.cols,
            data: out,
        })
    }

    /// `tr(self · o)` without forming the product.
    pub fn trace_of_product(&self, o: &Self) -> Result<S> {
        check_dim(self.cols, o.rows)?;
        check_dim(self.rows, o.cols)?;
        let mut acc = S::constant(0.0, self.jet_dim().max(o.jet_dim()));
        for i in 0..self.rows {
            for k in 0..self.cols {
                let (a, b) = (self.get(i, k), o.get(k, i));
                if !a.is_zero() && !b.is_zero() {
                    acc.mul_acc(a, b);
                }
            }
        }
        Ok(acc)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, s| m.max(s.value().abs()))
    }

    /// LU factorisation with partial pivoting on the value part.
    pub fn lu(&self) -> Result<Lu<S>> {
        check_dim(self.rows, self.cols)?;
        let n = self.rows;
        let scale = self.max_abs();
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let (mut pmax, mut pmin) = (0.0f64, f64::INFINITY);
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| {
                    a.get(i, k)
                        .value()
                        .abs()
                        .total_cmp(&a.get(j, k).value().abs())
                })
                .unwrap();
            let piv = a.get(p, k).value().abs();
            if scale == 0.0 || piv < SINGULAR_REL_TOL * scale {
                return Err(Error::SingularTensor(format!(
                    "pivot {piv:e} below {SINGULAR_REL_TOL:e} x max entry {scale:e}"
                )));
            }
            pmax = pmax.max(piv);
            pmin = pmin.min(piv);
            if p != k {
                for j in 0..n {
                    a.data.swap(p * n + j, k * n + j);
                }
                perm.swap(p, k);
                sign = -sign;
            }
            let inv = a.get(k, k).recip()?;
            for i in k + 1..n {
                if a.get(i, k).is_zero() {
                    continue;
                }
                let f = a.get(i, k).mul(&inv);
                let neg = f.neg();
                for j in k + 1..n {
                    if a.get(k, j).is_zero() {
                        continue;
                    }
                    let mut v = a.get(i, j).clone();
                    v.mul_acc(&neg, a.get(k, j));
                    a.set(i, j, v);
                }
                a.set(i, k, f);
            }
        }
        if pmax / pmin > CONDITION_WARN {
            log::warn!("ill-conditioned solve: pivot ratio {:e}", pmax / pmin);
        }
        Ok(Lu { lu: a, perm, sign })
    }

    pub fn det(&self) -> Result<S> {
        Ok(self.lu()?.det())
    }

    pub fn inverse(&self) -> Result<Self> {
        let lu = self.lu()?;
        let n = self.rows;
        let d = self.jet_dim();
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![S::constant(0.0, d); n];
            e[j] = S::constant(1.0, d);
            cols.push(lu.solve(&e)?);
        }
        let mut out = Self::zeros(n, n, d);
        for (j, c) in cols.into_iter().enumerate() {
            for (i, v) in c.into_iter().enumerate() {
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    /// `self^k` for any integer `k` (negative powers need invertibility).
    pub fn pow(&self, k: i32) -> Result<Self> {
        check_dim(self.rows, self.cols)?;
        if k == 0 {
            return Ok(Self::identity(self.rows, self.jet_dim()));
        }
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut out = base.clone();
        for _ in 1..k.unsigned_abs() {
            out = out.matmul(&base)?;
        }
        Ok(out)
    }
}

pub struct Lu<S> {
    lu: Mat<S>,
    perm: Vec<usize>,
    sign: f64,
}

impl<S: Scalar> Lu<S> {
    pub fn det(&self) -> S {
        let n = self.lu.rows;
        let d = self.lu.jet_dim();
        (0..n).fold(S::constant(self.sign, d), |acc, i| acc.mul(self.lu.get(i, i)))
    }

    pub fn solve(&self, b: &[S]) -> Result<Vec<S>> {
        let n = self.lu.rows;
        check_dim(n, b.len())?;
        let mut y: Vec<S> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for k in 0..i {
                y[i] = y[i].sub(&self.lu.get(i, k).mul(&y[k]));
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] = y[i].sub(&self.lu.get(i, k).mul(&y[k]));
            }
            y[i] = y[i].div(self.lu.get(i, i))?;
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ad::{lift_coords, Jet2};

    fn m(rows: usize, v: &[f64]) -> Mat<f64> {
        Mat::from_vec(rows, v.len() / rows, v.to_vec()).unwrap()
    }

    #[test]
    fn solve_det_inverse() {
        let a = m(3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        assert!((a.det().unwrap() - 18.0).abs() < 1e-14);
        let inv = a.inverse().unwrap();
        let id = a.matmul(&inv).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id.get(i, j) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = m(2, &[0.0, 1.0, 1.0, 0.0]);
        assert!((a.det().unwrap() + 1.0).abs() < 1e-15);
        let x = a.lu().unwrap().solve(&[2.0, 3.0]).unwrap();
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = m(2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(a.det(), Err(Error::SingularTensor(_))));
        let z = Mat::<f64>::zeros(2, 2, 0);
        assert!(matches!(z.inverse(), Err(Error::SingularTensor(_))));
    }

    #[test]
    fn negative_powers() {
        let a = m(2, &[2.0, 1.0, 0.0, 3.0]);
        let p = a.pow(-2).unwrap().matmul(&a.pow(2).unwrap()).unwrap();
        assert!((p.get(0, 0) - 1.0).abs() < 1e-14 && p.get(0, 1).abs() < 1e-14);
    }

    #[test]
    fn determinant_jet_matches_jacobi_formula() {
        // d det A = det A · tr(A^{-1} dA) for A(x) = [[x0, x1], [x0 x1, 2 + x1]]
        let x = lift_coords(&[0.8, -0.3]);
        let a = Mat::from_vec(
            2,
            2,
            vec![x[0].clone(), x[1].clone(), &x[0] * &x[1], x[1].clone() + 2.0],
        )
        .unwrap();
        let det = a.det().unwrap();
        let (x0, x1) = (0.8, -0.3);
        let exact: f64 = x0 * (2.0 + x1) - x1 * x0 * x1;
        assert!((det.value - exact).abs() < 1e-14);
        // ∂/∂x0 = (2 + x1) - x1^2, ∂/∂x1 = x0 - 2 x0 x1
        assert!((det.grad[0] - ((2.0 + x1) - x1 * x1)).abs() < 1e-14);
        assert!((det.grad[1] - (x0 - 2.0 * x0 * x1)).abs() < 1e-14);
        // ∂²/∂x1² = -2 x0, mixed = 1 - 2 x1
        assert!((det.hess_at(1, 1) + 2.0 * x0).abs() < 1e-14);
        assert!((det.hess_at(0, 1) - (1.0 - 2.0 * x1)).abs() < 1e-14);
        let _: &Jet2 = &det;
    }
}
