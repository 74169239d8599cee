//! Tensor fields as closures over lifted chart coordinates.
//!
//! Every field is a pure function of the coordinate jets, so evaluating it on
//! [`lift_coords`] yields components together with their exact first and
//! second partials. Fields compose by calling each other on the same jets.

use std::fmt;
use std::sync::Arc;

use crate::ad::{lift_coords, Jet1, Jet2, Scalar};
use crate::error::{check_dim, Result};
use crate::linalg::Mat;

use super::multivector::Multivector;

type Eval<T> = Arc<dyn Fn(&[Jet2]) -> Result<T> + Send + Sync>;

macro_rules! opaque_debug {
    ($t:ident) => {
        impl fmt::Debug for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!(stringify!($t), "(dim {})"), self.dim)
            }
        }
    };
}

#[derive(Clone)]
pub struct ScalarField {
    pub dim: usize,
    f: Eval<Jet2>,
}
opaque_debug!(ScalarField);

impl ScalarField {
    pub fn new(dim: usize, f: impl Fn(&[Jet2]) -> Result<Jet2> + Send + Sync + 'static) -> Self {
        ScalarField { dim, f: Arc::new(f) }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::new(dim, move |_| Ok(Jet2::constant(c, dim)))
    }

    pub fn eval_jets(&self, x: &[Jet2]) -> Result<Jet2> {
        check_dim(self.dim, x.len())?;
        (self.f)(x)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Jet2> {
        self.eval_jets(&lift_coords(x))
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(x)?.value)
    }

    pub fn scale(&self, c: f64) -> Self {
        let g = self.clone();
        Self::new(self.dim, move |x| Ok(g.eval_jets(x)?.scale(c)))
    }
}

#[derive(Clone)]
pub struct VectorField {
    pub dim: usize,
    f: Eval<Vec<Jet2>>,
}
opaque_debug!(VectorField);

impl VectorField {
    pub fn new(dim: usize, f: impl Fn(&[Jet2]) -> Result<Vec<Jet2>> + Send + Sync + 'static) -> Self {
        VectorField { dim, f: Arc::new(f) }
    }

    pub fn constant(v: Vec<f64>) -> Self {
        let dim = v.len();
        Self::new(dim, move |_| Ok(v.iter().map(|&c| Jet2::constant(c, dim)).collect()))
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(vec![0.0; dim])
    }

    pub fn eval_jets(&self, x: &[Jet2]) -> Result<Vec<Jet2>> {
        check_dim(self.dim, x.len())?;
        let v = (self.f)(x)?;
        check_dim(self.dim, v.len())?;
        Ok(v)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Multivector<Jet2>> {
        Ok(Multivector::vector(self.eval_jets(&lift_coords(x))?))
    }

    pub fn values(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval_jets(&lift_coords(x))?.iter().map(|j| j.value).collect())
    }

    /// `N Z` applied pointwise.
    pub fn transformed(&self, n: &OneOneField) -> Self {
        let (z, n) = (self.clone(), n.clone());
        Self::new(self.dim, move |x| n.eval_jets(x)?.matvec(&z.eval_jets(x)?))
    }
}

/// Bivector field; the closure's strict upper triangle is authoritative and
/// the lower triangle is always rebuilt by antisymmetry.
#[derive(Clone)]
pub struct BivectorField {
    pub dim: usize,
    f: Eval<Mat<Jet2>>,
}
opaque_debug!(BivectorField);

impl BivectorField {
    pub fn new(dim: usize, f: impl Fn(&[Jet2]) -> Result<Mat<Jet2>> + Send + Sync + 'static) -> Self {
        BivectorField { dim, f: Arc::new(f) }
    }

    /// Field from its nonzero entries `(i, j, π^{ij})`, one per unordered pair.
    pub fn from_entries(
        dim: usize,
        f: impl Fn(&[Jet2]) -> Result<Vec<(usize, usize, Jet2)>> + Send + Sync + 'static,
    ) -> Self {
        Self::new(dim, move |x| {
            let mut m = Mat::zeros(dim, dim, dim);
            for (i, j, v) in f(x)? {
                m.set(j, i, v.neg());
                m.set(i, j, v);
            }
            Ok(m)
        })
    }

    /// The bivector whose sharp map is `N^k ∘ π♯`, i.e. the matrix `N^k Π`.
    pub fn recursion(&self, n: &OneOneField, k: i32) -> Self {
        if k == 0 {
            return self.clone();
        }
        let (p, n) = (self.clone(), n.clone());
        Self::new(self.dim, move |x| n.eval_jets(x)?.pow(k)?.matmul(&p.eval_jets(x)?))
    }

    pub fn scale(&self, c: f64) -> Self {
        let p = self.clone();
        Self::new(self.dim, move |x| Ok(p.eval_jets(x)?.scale(c)))
    }

    pub fn eval_jets(&self, x: &[Jet2]) -> Result<Mat<Jet2>> {
        check_dim(self.dim, x.len())?;
        let raw = (self.f)(x)?;
        check_dim(self.dim, raw.rows)?;
        Multivector::bivector(&raw)?.to_mat()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Mat<Jet2>> {
        self.eval_jets(&lift_coords(x))
    }

    pub fn eval_multivector(&self, x: &[f64]) -> Result<Multivector<Jet2>> {
        Multivector::bivector(&self.eval(x)?)
    }
}

/// A (1,1) tensor `N^i_j`, row `i`, column `j`.
#[derive(Clone)]
pub struct OneOneField {
    pub dim: usize,
    f: Eval<Mat<Jet2>>,
}
opaque_debug!(OneOneField);

impl OneOneField {
    pub fn new(dim: usize, f: impl Fn(&[Jet2]) -> Result<Mat<Jet2>> + Send + Sync + 'static) -> Self {
        OneOneField { dim, f: Arc::new(f) }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(dim, move |_| Ok(Mat::identity(dim, dim)))
    }

    /// Diagonal tensor from its diagonal entries.
    pub fn diagonal(dim: usize, f: impl Fn(&[Jet2]) -> Result<Vec<Jet2>> + Send + Sync + 'static) -> Self {
        Self::new(dim, move |x| {
            let d = f(x)?;
            check_dim(dim, d.len())?;
            let mut m = Mat::zeros(dim, dim, dim);
            for (i, v) in d.into_iter().enumerate() {
                m.set(i, i, v);
            }
            Ok(m)
        })
    }

    pub fn eval_jets(&self, x: &[Jet2]) -> Result<Mat<Jet2>> {
        check_dim(self.dim, x.len())?;
        let m = (self.f)(x)?;
        check_dim(self.dim * self.dim, m.data.len())?;
        Ok(m)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Mat<Jet2>> {
        self.eval_jets(&lift_coords(x))
    }
}

type FirstOrderEval = Arc<dyn Fn(&[f64]) -> Result<Vec<Jet1>> + Send + Sync>;

/// A vector field known either exactly to second order or, when its
/// components already contain a derivative (hamiltonian and modular fields),
/// to first order.
#[derive(Clone)]
pub enum VectorFieldHandle {
    Exact(VectorField),
    FirstOrder { dim: usize, f: FirstOrderEval },
}

impl fmt::Debug for VectorFieldHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorFieldHandle::Exact(v) => write!(f, "Exact({v:?})"),
            VectorFieldHandle::FirstOrder { dim, .. } => write!(f, "FirstOrder(dim {dim})"),
        }
    }
}

impl VectorFieldHandle {
    pub fn first_order(dim: usize, f: impl Fn(&[f64]) -> Result<Vec<Jet1>> + Send + Sync + 'static) -> Self {
        VectorFieldHandle::FirstOrder { dim, f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        match self {
            VectorFieldHandle::Exact(v) => v.dim,
            VectorFieldHandle::FirstOrder { dim, .. } => *dim,
        }
    }

    pub fn jets(&self, x: &[f64]) -> Result<Vec<Jet1>> {
        check_dim(self.dim(), x.len())?;
        match self {
            VectorFieldHandle::Exact(v) => Ok(v.eval(x)?.lower().comps),
            VectorFieldHandle::FirstOrder { f, .. } => f(x),
        }
    }

    pub fn values(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            VectorFieldHandle::Exact(v) => v.values(x),
            VectorFieldHandle::FirstOrder { .. } => Ok(self.jets(x)?.iter().map(|j| j.value).collect()),
        }
    }
}

impl From<VectorField> for VectorFieldHandle {
    fn from(v: VectorField) -> Self {
        VectorFieldHandle::Exact(v)
    }
}
