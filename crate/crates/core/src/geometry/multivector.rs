use crate::ad::{Differentiable, Scalar};
use crate::error::{check_dim, Error, Result};
use crate::linalg::Mat;

/// Highest multivector degree the calculus handles.
pub const MAX_DEGREE: usize = 3;

/// Permutations of `0..c` with their signs, for `c <= 3`.
pub(crate) fn permutations(c: usize) -> &'static [(&'static [usize], f64)] {
    match c {
        0 => &[(&[], 1.0)],
        1 => &[(&[0], 1.0)],
        2 => &[(&[0, 1], 1.0), (&[1, 0], -1.0)],
        3 => &[
            (&[0, 1, 2], 1.0),
            (&[1, 2, 0], 1.0),
            (&[2, 0, 1], 1.0),
            (&[1, 0, 2], -1.0),
            (&[0, 2, 1], -1.0),
            (&[2, 1, 0], -1.0),
        ],
        _ => unreachable!("degree above {MAX_DEGREE}"),
    }
}

/// Strictly increasing index tuples of length `c` in `0..m`.
pub(crate) fn increasing_tuples(c: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, c: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == c {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, c, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, c, m, &mut Vec::with_capacity(c), &mut out);
    out
}

/// Dense components of a totally antisymmetric contravariant tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Multivector<S> {
    pub degree: usize,
    pub dim: usize,
    pub comps: Vec<S>,
}

impl<S: Scalar> Multivector<S> {
    pub fn zeros(degree: usize, dim: usize, jet_dim: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::Degree(degree, 0));
        }
        Ok(Multivector {
            degree,
            dim,
            comps: vec![S::constant(0.0, jet_dim); dim.pow(degree as u32)],
        })
    }

    pub fn scalar(s: S, dim: usize) -> Self {
        Multivector {
            degree: 0,
            dim,
            comps: vec![s],
        }
    }

    pub fn vector(v: Vec<S>) -> Self {
        Multivector {
            degree: 1,
            dim: v.len(),
            comps: v,
        }
    }

    /// Bivector from a square matrix; only the strict upper triangle is read.
    pub fn bivector(m: &Mat<S>) -> Result<Self> {
        check_dim(m.rows, m.cols)?;
        let mut out = Self::zeros(2, m.rows, m.jet_dim())?;
        for i in 0..m.rows {
            for j in i + 1..m.rows {
                out.set_antisym(&[i, j], m.get(i, j).clone());
            }
        }
        Ok(out)
    }

    pub fn jet_dim(&self) -> usize {
        self.comps.first().map_or(0, |s| s.dim())
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> &S {
        &self.comps[self.offset(idx)]
    }

    /// Writes `v` at `idx` and the signed value at every permutation of it.
    pub fn set_antisym(&mut self, idx: &[usize], v: S) {
        for (p, sign) in permutations(idx.len()) {
            let permuted: Vec<usize> = p.iter().map(|&k| idx[k]).collect();
            let o = self.offset(&permuted);
            self.comps[o] = if *sign > 0.0 { v.clone() } else { v.neg() };
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Multivector<T> {
        Multivector {
            degree: self.degree,
            dim: self.dim,
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn values(&self) -> Multivector<f64> {
        self.map(|s| s.value())
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, s| m.max(s.value().abs()))
    }

    fn check_same(&self, o: &Self) -> Result<()> {
        if self.degree != o.degree {
            return Err(Error::Degree(self.degree, o.degree));
        }
        check_dim(self.dim, o.dim)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_same(o)?;
        Ok(Multivector {
            degree: self.degree,
            dim: self.dim,
            comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check_same(o)?;
        Ok(Multivector {
            degree: self.degree,
            dim: self.dim,
            comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.sub(b)).collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|s| s.scale(c))
    }

    pub fn to_mat(&self) -> Result<Mat<S>> {
        if self.degree != 2 {
            return Err(Error::Degree(self.degree, 2));
        }
        Mat::from_vec(self.dim, self.dim, self.comps.clone())
    }

    /// `X ∧ Y` for two vectors.
    pub fn wedge(x: &Self, y: &Self) -> Result<Self> {
        if x.degree != 1 || y.degree != 1 {
            return Err(Error::Degree(x.degree, y.degree));
        }
        check_dim(x.dim, y.dim)?;
        let mut out = Self::zeros(2, x.dim, x.jet_dim())?;
        for i in 0..x.dim {
            for j in i + 1..x.dim {
                let v = x.comps[i].mul(&y.comps[j]).sub(&x.comps[j].mul(&y.comps[i]));
                out.set_antisym(&[i, j], v);
            }
        }
        Ok(out)
    }
}

impl<S: Differentiable> Multivector<S> {
    pub fn lower(&self) -> Multivector<S::Lower> {
        self.map(|s| s.lower())
    }

    /// `∂/∂x^k` of every component.
    pub fn partial(&self, k: usize) -> Multivector<S::Lower> {
        self.map(|s| s.partial(k))
    }
}
