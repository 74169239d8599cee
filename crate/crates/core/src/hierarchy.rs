//! The canonical hierarchy `π_i = N^i π₀`, `ĥ_i = (1/2i) tr N^i`,
//! `ĥ₀ = ½ log|det N|`, its flows, and the ladder checks.
//!
//! Hamiltonians are stored with the positive sign; the negated variants
//! `h_i = −ĥ_i` are available through [`Hierarchy::theorem_h`]. Both satisfy
//! the same ladder `π_i♯dh_j = π_j♯dh_i`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::ad::{lift_coords, Differentiable, Jet1, Jet2, Scalar};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{
    lie_bracket, logdet_jets, schouten, sharp, BivectorField, Multivector, OneOneField, ScalarField,
    VectorFieldHandle,
};
use crate::linalg::Mat;
use crate::modular::PNStructure;

pub const MAX_DEPTH: usize = 12;

#[derive(Clone, Debug)]
pub struct HierarchySpec {
    pub pn: PNStructure,
    pub depth: usize,
    /// Lowest index built; negative values need `N` invertible.
    pub min_index: i32,
}

impl HierarchySpec {
    pub fn new(pn: PNStructure, depth: usize) -> Self {
        HierarchySpec { pn, depth, min_index: 0 }
    }

    pub fn with_negative(mut self, min_index: i32) -> Self {
        self.min_index = min_index;
        self
    }
}

#[derive(Clone, Debug)]
pub struct Hierarchy {
    pub pn: PNStructure,
    pub lo: i32,
    pub hi: i32,
}

fn hamiltonian_from(nm: &Mat<Jet2>, npow: &Mat<Jet2>, i: i32) -> Result<Jet2> {
    if i == 0 {
        Ok(logdet_jets(nm)?.scale(0.5))
    } else {
        Ok(npow.trace().scale(1.0 / (2.0 * i as f64)))
    }
}

impl Hierarchy {
    pub fn build(spec: HierarchySpec) -> Result<Self> {
        if spec.depth == 0 || spec.depth > MAX_DEPTH {
            return Err(Error::Config(format!("depth {} outside 1..={MAX_DEPTH}", spec.depth)));
        }
        if spec.min_index > 0 || spec.min_index < -(MAX_DEPTH as i32) {
            return Err(Error::Config(format!("minimum index {} outside -{MAX_DEPTH}..=0", spec.min_index)));
        }
        Ok(Hierarchy {
            pn: spec.pn,
            lo: spec.min_index,
            hi: spec.depth as i32,
        })
    }

    pub fn dim(&self) -> usize {
        self.pn.dim()
    }

    pub fn check_index(&self, i: i32) -> Result<()> {
        if i < self.lo || i > self.hi {
            return Err(Error::Range {
                index: i as i64,
                lo: self.lo as i64,
                hi: self.hi as i64,
            });
        }
        Ok(())
    }

    pub fn pi(&self, i: i32) -> Result<BivectorField> {
        self.check_index(i)?;
        Ok(self.pn.pi0.recursion(&self.pn.nij, i))
    }

    /// `ĥ_i`, positive sign.
    pub fn h(&self, i: i32) -> Result<ScalarField> {
        self.check_index(i)?;
        let n = self.pn.nij.clone();
        Ok(ScalarField::new(self.dim(), move |x| {
            let nm = n.eval_jets(x)?;
            match i {
                0 => Ok(logdet_jets(&nm)?.scale(0.5)),
                i if i > 0 => Ok(nm.pow(i - 1)?.trace_of_product(&nm)?.scale(1.0 / (2.0 * i as f64))),
                i => hamiltonian_from(&nm, &nm.pow(i)?, i),
            }
        }))
    }

    /// `h_i = −ĥ_i`.
    pub fn theorem_h(&self, i: i32) -> Result<ScalarField> {
        Ok(self.h(i)?.scale(-1.0))
    }

    /// `X_k = π_i♯dĥ_{k−i}` with `i = 0` when `k` is in range.
    pub fn flow(&self, k: i32) -> Result<VectorFieldHandle> {
        let (i, j) = if k >= self.lo && k <= self.hi {
            (0, k)
        } else if k > self.hi {
            (k - self.hi, self.hi)
        } else {
            (k - self.lo, self.lo)
        };
        self.check_index(i)?;
        self.check_index(j)?;
        let pi = self.pi(i)?;
        let h = self.h(j)?;
        Ok(crate::geometry::hamiltonian_vf(&pi, &h))
    }

    /// Every tensor of the hierarchy evaluated once at `x`.
    pub fn at(&self, x: &[f64]) -> Result<HierarchyPoint> {
        check_dim(self.dim(), x.len())?;
        let m = self.dim();
        let jets = lift_coords(x);
        let nm = self.pn.nij.eval_jets(&jets)?;
        let p0 = self.pn.pi0.eval_jets(&jets)?;
        let count = (self.hi - self.lo + 1) as usize;
        let mut npow = vec![Mat::identity(m, m); count];
        let base = (-self.lo) as usize;
        for k in 1..=self.hi as usize {
            npow[base + k] = npow[base + k - 1].matmul(&nm)?;
        }
        if self.lo < 0 {
            let inv = nm.inverse()?;
            for k in 1..=base {
                npow[base - k] = npow[base - k + 1].matmul(&inv)?;
            }
        }
        let mut pis = Vec::with_capacity(count);
        let mut hs = Vec::with_capacity(count);
        for (off, p) in npow.iter().enumerate() {
            let i = self.lo + off as i32;
            pis.push(Multivector::bivector(&p.matmul(&p0)?)?.to_mat()?);
            hs.push(hamiltonian_from(&nm, p, i)?);
        }
        Ok(HierarchyPoint {
            lo: self.lo,
            hi: self.hi,
            dim: m,
            npow,
            pis,
            hs,
        })
    }

    pub fn ladder_defect(&self, i: i32, j: i32, x: &[f64]) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        self.at(x)?.ladder_pair(i, j)
    }

    pub fn pairwise_compat_defect(&self, i: i32, j: i32, x: &[f64]) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        self.at(x)?.pairwise_compat(i, j)
    }

    pub fn involution_matrix(&self, k: i32, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_index(k)?;
        self.at(x)?.involution_matrix(k)
    }

    pub fn commuting_flows_defect(&self, i: i32, j: i32, x: &[f64]) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        self.at(x)?.commuting(i, j)
    }
}

/// All hierarchy tensors at one point, indexed `lo..=hi`.
#[derive(Clone, Debug)]
pub struct HierarchyPoint {
    pub lo: i32,
    pub hi: i32,
    pub dim: usize,
    pub npow: Vec<Mat<Jet2>>,
    pub pis: Vec<Mat<Jet2>>,
    pub hs: Vec<Jet2>,
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |w, (u, v)| w.max((u - v).abs()))
}

impl HierarchyPoint {
    fn slot(&self, i: i32) -> Result<usize> {
        if i < self.lo || i > self.hi {
            return Err(Error::Range {
                index: i as i64,
                lo: self.lo as i64,
                hi: self.hi as i64,
            });
        }
        Ok((i - self.lo) as usize)
    }

    pub fn pi(&self, i: i32) -> Result<&Mat<Jet2>> {
        Ok(&self.pis[self.slot(i)?])
    }

    pub fn h(&self, i: i32) -> Result<&Jet2> {
        Ok(&self.hs[self.slot(i)?])
    }

    pub fn n_power(&self, k: i32) -> Result<&Mat<Jet2>> {
        Ok(&self.npow[self.slot(k)?])
    }

    pub fn dh(&self, i: i32) -> Result<Vec<f64>> {
        Ok(self.h(i)?.grad.clone())
    }

    /// `π_i♯dĥ_j` values.
    pub fn sharp_dh(&self, i: i32, j: i32) -> Result<Vec<f64>> {
        sharp(&self.pi(i)?.values(), &self.dh(j)?)
    }

    /// `π_i♯dĥ_j` to first order.
    pub fn sharp_dh_jets(&self, i: i32, j: i32) -> Result<Vec<Jet1>> {
        let p = self.pi(i)?.map(|s| s.lower());
        let h = self.h(j)?;
        let dh: Vec<Jet1> = (0..self.dim).map(|k| h.partial(k)).collect();
        sharp(&p, &dh)
    }

    pub fn ladder_pair(&self, i: i32, j: i32) -> Result<f64> {
        Ok(max_diff(&self.sharp_dh(i, j)?, &self.sharp_dh(j, i)?))
    }

    /// Largest disagreement among all `π_i♯dĥ_j` with `i + j = k` inside the built range.
    pub fn level_defect(&self, k: i32) -> Result<f64> {
        let pairs: Vec<(i32, i32)> = (self.lo..=self.hi)
            .map(|i| (i, k - i))
            .filter(|&(_, j)| j >= self.lo && j <= self.hi)
            .collect();
        let Some(&(i0, j0)) = pairs.first() else {
            return Err(Error::Range {
                index: k as i64,
                lo: 2 * self.lo as i64,
                hi: 2 * self.hi as i64,
            });
        };
        let reference = self.sharp_dh(i0, j0)?;
        let mut worst = 0.0f64;
        for &(i, j) in &pairs[1..] {
            worst = worst.max(max_diff(&reference, &self.sharp_dh(i, j)?));
        }
        Ok(worst)
    }

    pub fn pairwise_compat(&self, i: i32, j: i32) -> Result<f64> {
        let a = Multivector::bivector(self.pi(i)?)?;
        let b = Multivector::bivector(self.pi(j)?)?;
        Ok(schouten(&a, &b)?.max_abs())
    }

    /// `max |[π_i, π_i]|`.
    pub fn jacobi(&self, i: i32) -> Result<f64> {
        self.pairwise_compat(i, i)
    }

    /// `{ĥ_a, ĥ_b}_{π_k}` for `a, b` over the built range.
    pub fn involution_matrix(&self, k: i32) -> Result<Vec<Vec<f64>>> {
        let p = self.pi(k)?.values();
        let grads: Vec<Vec<f64>> = (self.lo..=self.hi).map(|i| self.dh(i)).collect::<Result<_>>()?;
        let mut out = vec![vec![0.0; grads.len()]; grads.len()];
        for (a, ga) in grads.iter().enumerate() {
            let xa = sharp(&p, ga)?;
            for (b, gb) in grads.iter().enumerate() {
                if a != b {
                    // {f, g} = π(df, dg) = (π♯df)(g)
                    out[a][b] = xa.iter().zip(gb).map(|(u, v)| u * v).sum();
                }
            }
        }
        Ok(out)
    }

    /// `‖[X_i, X_j]‖` with `X_k = π₀♯dĥ_k`.
    pub fn commuting(&self, i: i32, j: i32) -> Result<f64> {
        let xi = self.sharp_dh_jets(0, i)?;
        let xj = self.sharp_dh_jets(0, j)?;
        Ok(lie_bracket(&xi, &xj)?.iter().fold(0.0, |w, v| w.max(v.abs())))
    }

    /// `‖N*dĥ_k − dĥ_{k+1}‖`.
    pub fn lenard(&self, k: i32) -> Result<f64> {
        let n = self.n_power(1)?.values();
        let lhs = n.transpose().matvec(&self.dh(k)?)?;
        Ok(max_diff(&lhs, &self.dh(k + 1)?))
    }
}

/// Spectrum of `N` at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralReport {
    /// Real parts, ascending.
    pub eigenvalues: Vec<f64>,
    pub max_imag: f64,
    /// Distinct eigenvalues with multiplicities.
    pub distinct: Vec<(f64, usize)>,
    pub all_doubled: bool,
    pub independent_enough: bool,
}

/// Eigenvalues of `N(x)`, grouped; `N` need not be symmetric.
pub fn eigen_spectral_invariants(n: &OneOneField, x: &[f64], rel_tol: f64) -> Result<SpectralReport> {
    let nv = n.eval(x)?.values();
    let m = nv.rows;
    let dm = DMatrix::from_row_slice(m, m, &nv.data);
    let ev = dm.complex_eigenvalues();
    let mut re: Vec<f64> = ev.iter().map(|c| c.re).collect();
    let max_imag = ev.iter().fold(0.0f64, |w, c| w.max(c.im.abs()));
    re.sort_by(f64::total_cmp);
    let scale = re.iter().fold(1.0f64, |w, v| w.max(v.abs()));
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    for &v in &re {
        match distinct.last_mut() {
            Some((u, c)) if (v - *u).abs() <= rel_tol * scale => *c += 1,
            _ => distinct.push((v, 1)),
        }
    }
    let all_doubled = distinct.iter().all(|(_, c)| c % 2 == 0);
    let independent_enough = distinct.len() >= m / 2;
    if !independent_enough {
        log::warn!(
            "only {} distinct eigenvalues of N for {} degrees of freedom",
            distinct.len(),
            m / 2
        );
    }
    Ok(SpectralReport {
        eigenvalues: re,
        max_imag,
        distinct,
        all_doubled,
        independent_enough,
    })
}
