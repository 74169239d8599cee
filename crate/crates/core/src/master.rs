//! Conformal symmetries, the master symmetries `Z_i = N^i Z₀`, and the
//! scaling relations they satisfy along the hierarchy.
//!
//! Lie derivatives are Schouten brackets: `L_Z π = [Z, π]`, `[Z, f] = Z(f)`.

use serde::Serialize;

use crate::ad::{lift_coords, Differentiable, Jet1, Jet2, Scalar};
use crate::error::{Error, Result};
use crate::geometry::{
    lie_bracket, n_power, schouten, sharp, BivectorField, Multivector, OneOneField, ScalarField, VectorField,
    VectorFieldHandle,
};
use crate::hierarchy::{Hierarchy, HierarchyPoint};
use crate::modular::{koszul, VolumeDensity};

/// Scaling data of the master-symmetry scheme. `anchor` is the index of the
/// hamiltonian that `Z₀` scales by `ν`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OevelCoefficients {
    pub lambda: f64,
    pub mu_c: f64,
    pub nu: f64,
    pub anchor: i32,
}

impl OevelCoefficients {
    /// `L_{Z_i} π_j = c(i,j) π_{i+j}`.
    pub fn c(&self, i: i32, j: i32) -> f64 {
        self.mu_c + (j - i - 1) as f64 * (self.mu_c - self.lambda)
    }

    /// The variant with `j − i − 2`, kept for comparison; it disagrees with
    /// `L_{Z_i} π_j` already at `i = j = 0` unless `μ = λ`.
    pub fn printed_c(&self, i: i32, j: i32) -> f64 {
        self.mu_c + (j - i - 2) as f64 * (self.mu_c - self.lambda)
    }

    /// `Z_i(ĥ_j) = a(i,j) ĥ_{i+j}`; undefined when `i + j = 0` since `ĥ₀`
    /// is logarithmic.
    pub fn a(&self, i: i32, j: i32) -> Option<f64> {
        (i + j != 0).then(|| self.nu + (i + j - self.anchor) as f64 * (self.mu_c - self.lambda))
    }

    /// `[Z_i, Z_j] = b(i,j) Z_{i+j}`.
    pub fn b(&self, i: i32, j: i32) -> f64 {
        (self.mu_c - self.lambda) * (j - i) as f64
    }
}

/// `Z₀` with `L_{Z₀}π₀ = λπ₀`, `L_{Z₀}π₁ = μπ₁`, `Z₀(ĥ_anchor) = ν ĥ_anchor`.
/// `Z₀` must be known to second order since divergences of `Z_i` are
/// differentiated again.
#[derive(Clone, Debug)]
pub struct ConformalSymmetry {
    pub z0: VectorField,
    pub coeffs: OevelCoefficients,
}

impl ConformalSymmetry {
    pub fn new(z0: VectorField, lambda: f64, mu_c: f64, nu: f64, anchor: i32) -> Self {
        ConformalSymmetry {
            z0,
            coeffs: OevelCoefficients {
                lambda,
                mu_c,
                nu,
                anchor,
            },
        }
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |w, x| w.max(x.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |w, (u, v)| w.max((u - v).abs()))
}

fn values(v: &[Jet1]) -> Vec<f64> {
    v.iter().map(|j| j.value).collect()
}

/// `‖L_Z π − c π‖_max` from second-order jets of both.
fn lie_scaling(z: &[Jet2], pi: &Multivector<Jet2>, c: f64) -> Result<f64> {
    let l = schouten(&Multivector::vector(z.to_vec()), pi)?.values();
    Ok(l.sub(&pi.values().scale(c))?.max_abs())
}

/// `(‖L_{Z₀}π₀ − λπ₀‖, ‖L_{Z₀}π₁ − μπ₁‖, |Z₀(h) − νh|)` at `x`.
#[allow(clippy::too_many_arguments)]
pub fn conformal_defects(
    z0: &VectorField,
    pi0: &BivectorField,
    pi1: &BivectorField,
    h: &ScalarField,
    lambda: f64,
    mu_c: f64,
    nu: f64,
    x: &[f64],
) -> Result<(f64, f64, f64)> {
    let jets = lift_coords(x);
    let z = z0.eval_jets(&jets)?;
    let p0 = Multivector::bivector(&pi0.eval_jets(&jets)?)?;
    let p1 = Multivector::bivector(&pi1.eval_jets(&jets)?)?;
    let hv = h.eval_jets(&jets)?;
    let zh: f64 = z.iter().zip(&hv.grad).map(|(a, g)| a.value * g).sum();
    Ok((
        lie_scaling(&z, &p0, lambda)?,
        lie_scaling(&z, &p1, mu_c)?,
        (zh - nu * hv.value).abs(),
    ))
}

/// `Z_k = N^k Z₀`.
pub fn master_chain(z0: &VectorField, n: &OneOneField, k: i32) -> VectorFieldHandle {
    if k == 0 {
        return z0.clone().into();
    }
    z0.transformed(&n_power(n, k)).into()
}

/// Per-relation defects at one point and one index pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OevelDefects {
    /// `‖L_{Z_i}π_j − c(i,j) π_{i+j}‖`
    pub pi: f64,
    /// `|Z_i(ĥ_j) − a(i,j) ĥ_{i+j}|`, absent when `i + j = 0`
    pub hamiltonian: Option<f64>,
    /// `‖[Z_i, Z_j] − b(i,j) Z_{i+j}‖`
    pub z: f64,
}

fn z_at(pt: &HierarchyPoint, z0: &[Jet2], k: i32) -> Result<Vec<Jet2>> {
    pt.n_power(k)?.matvec(z0)
}

/// The three scaling relations for `(i, j)`; needs `i`, `j`, `i + j` in range.
pub fn oevel_relation_defects(
    hier: &Hierarchy,
    sym: &ConformalSymmetry,
    i: i32,
    j: i32,
    x: &[f64],
) -> Result<OevelDefects> {
    for k in [i, j, i + j] {
        hier.check_index(k)?;
    }
    let pt = hier.at(x)?;
    let z0 = sym.z0.eval_jets(&lift_coords(x))?;
    oevel_at(&pt, &z0, &sym.coeffs, i, j)
}

pub(crate) fn oevel_at(
    pt: &HierarchyPoint,
    z0: &[Jet2],
    co: &OevelCoefficients,
    i: i32,
    j: i32,
) -> Result<OevelDefects> {
    let (zi, zj, zk) = (z_at(pt, z0, i)?, z_at(pt, z0, j)?, z_at(pt, z0, i + j)?);
    let pj = Multivector::bivector(pt.pi(j)?)?;
    let lie = schouten(&Multivector::vector(zi.clone()), &pj)?.values();
    let pk = Multivector::bivector(pt.pi(i + j)?)?.values();
    let pi = lie.sub(&pk.scale(co.c(i, j)))?.max_abs();

    let hamiltonian = co.a(i, j).map(|a| -> Result<f64> {
        let hj = pt.h(j)?;
        let zh: f64 = zi.iter().zip(&hj.grad).map(|(z, g)| z.value * g).sum();
        Ok((zh - a * pt.h(i + j)?.value).abs())
    });
    let hamiltonian = hamiltonian.transpose()?;

    let br = lie_bracket(&zi, &zj)?;
    let b = co.b(i, j);
    let z = br
        .iter()
        .zip(&zk)
        .fold(0.0f64, |w, (u, v)| w.max((u.value() - b * v.value).abs()));
    Ok(OevelDefects { pi, hamiltonian, z })
}

/// `‖L_Z π₀ − π₁‖_max`, the precondition of [`deformation_defect`].
pub fn transport_defect(pi0: &BivectorField, pi1: &BivectorField, z: &VectorField, x: &[f64]) -> Result<f64> {
    let jets = lift_coords(x);
    let zv = Multivector::vector(z.eval_jets(&jets)?);
    let l = schouten(&zv, &Multivector::bivector(&pi0.eval_jets(&jets)?)?)?.values();
    let p1 = pi1.eval_jets(&jets)?.values();
    Ok(l.sub(&Multivector::bivector(&p1)?)?.max_abs())
}

/// `‖X¹_μ − [Z, X⁰_μ] − π₀♯d(div_μ Z)‖_max` for `π₁ = L_Z π₀`.
pub fn deformation_defect(
    pi0: &BivectorField,
    pi1: &BivectorField,
    z: &VectorField,
    mu: &VolumeDensity,
    x: &[f64],
) -> Result<f64> {
    let jets = lift_coords(x);
    let lf = mu.log_density(&jets)?;
    let p0 = pi0.eval_jets(&jets)?;
    let x0 = koszul(&Multivector::bivector(&p0)?, &lf)?.comps;
    let x1 = koszul(&Multivector::bivector(&pi1.eval_jets(&jets)?)?, &lf)?.comps;
    let zv = z.eval_jets(&jets)?;
    let div = koszul(&Multivector::vector(zv.clone()), &lf)?.comps.remove(0);
    let zl: Vec<Jet1> = zv.iter().map(|s| s.lower()).collect();
    let br = lie_bracket(&zl, &x0)?;
    let ham = sharp(&p0.values(), &div.grad)?;
    let rhs: Vec<f64> = br.iter().zip(&ham).map(|(a, b)| a + b).collect();
    Ok(max_diff(&values(&x1), &rhs))
}

/// Defects of `[Z_i, X^j_μ] = c(i,j) X^{i+j}_μ − π_j♯d(div_μ Z_i)` and of
/// `L_{X^i_μ}π_j + L_{X^j_μ}π_i = 0`, with `X^k_μ` the modular field of `π_k`.
pub fn modular_hierarchy_defects(
    hier: &Hierarchy,
    sym: &ConformalSymmetry,
    i: i32,
    j: i32,
    mu: &VolumeDensity,
    x: &[f64],
) -> Result<(f64, f64)> {
    for k in [i, j, i + j] {
        hier.check_index(k)?;
    }
    let pt = hier.at(x)?;
    let jets = lift_coords(x);
    let z0 = sym.z0.eval_jets(&jets)?;
    let lf = mu.log_density(&jets)?;
    modular_at(&pt, &z0, &lf, &sym.coeffs, i, j)
}

pub(crate) fn modular_at(
    pt: &HierarchyPoint,
    z0: &[Jet2],
    lf: &Jet2,
    co: &OevelCoefficients,
    i: i32,
    j: i32,
) -> Result<(f64, f64)> {
    let modular = |k: i32| -> Result<Vec<Jet1>> { Ok(koszul(&Multivector::bivector(pt.pi(k)?)?, lf)?.comps) };
    let (xi, xj, xk) = (modular(i)?, modular(j)?, modular(i + j)?);
    let zi = z_at(pt, z0, i)?;
    let fi = koszul(&Multivector::vector(zi.clone()), lf)?.comps.remove(0);
    let zl: Vec<Jet1> = zi.iter().map(|s| s.lower()).collect();
    let br = lie_bracket(&zl, &xj)?;
    let xf = sharp(&pt.pi(j)?.values(), &fi.grad)?;
    let c = co.c(i, j);
    let first = br
        .iter()
        .zip(&xk)
        .zip(&xf)
        .fold(0.0f64, |w, ((b, k), f)| w.max((b - c * k.value + f).abs()));

    let lower = |k: i32| -> Result<Multivector<Jet1>> { Ok(Multivector::bivector(pt.pi(k)?)?.lower()) };
    let a = schouten(&Multivector::vector(xi), &lower(j)?)?;
    let b = schouten(&Multivector::vector(xj), &lower(i)?)?;
    Ok((first, a.add(&b)?.max_abs()))
}

/// `‖[Z_i, X_a] − (c(i,0) + a(i,a)) X_k‖_max` with `a` the anchor,
/// `i = k − a` and `X_m = π₀♯dĥ_m`: how far the flows produced by the
/// master symmetries from the anchor flow are from the canonical ones.
pub fn coincidence_defect(hier: &Hierarchy, sym: &ConformalSymmetry, k: i32, x: &[f64]) -> Result<f64> {
    let co = &sym.coeffs;
    let i = k - co.anchor;
    for m in [i, co.anchor, k] {
        hier.check_index(m)?;
    }
    let a = co
        .a(i, co.anchor)
        .ok_or_else(|| Error::Config(format!("no scaling coefficient for level {k}")))?;
    let pt = hier.at(x)?;
    let z0 = sym.z0.eval_jets(&lift_coords(x))?;
    let zi: Vec<Jet1> = z_at(&pt, &z0, i)?.iter().map(|s| s.lower()).collect();
    let xa = pt.sharp_dh_jets(0, co.anchor)?;
    let br = lie_bracket(&zi, &xa)?;
    let xk = pt.sharp_dh(0, k)?;
    let s = co.c(i, 0) + a;
    Ok(max_abs(&br.iter().zip(&xk).map(|(u, v)| u - s * v).collect::<Vec<_>>()))
}
