//! Koszul operator, modular vector fields, and the modular vector field of a
//! Poisson–Nijenhuis structure.

use crate::ad::{lift_coords, Differentiable, Jet1, Jet2, Scalar};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{
    differential, jacobi_defect, logdet_jets, pn_compatibility_defect, schouten, sharp, torsion_defect,
    BivectorField, Chart, Multivector, OneOneField, ScalarField, VectorFieldHandle,
};

/// Volume form `μ = f dx¹ ∧ … ∧ dx^m` with `f > 0`.
#[derive(Clone, Debug)]
pub struct VolumeDensity {
    pub name: String,
    pub f: ScalarField,
}

impl VolumeDensity {
    pub fn standard(dim: usize) -> Self {
        VolumeDensity {
            name: "standard".into(),
            f: ScalarField::constant(dim, 1.0),
        }
    }

    pub fn new(name: impl Into<String>, f: ScalarField) -> Self {
        VolumeDensity { name: name.into(), f }
    }

    /// `g μ`.
    pub fn rescaled(&self, g: &ScalarField) -> Self {
        let (f, g) = (self.f.clone(), g.clone());
        VolumeDensity {
            name: format!("{}*g", self.name),
            f: ScalarField::new(self.f.dim, move |x| Ok(f.eval_jets(x)?.mul(&g.eval_jets(x)?))),
        }
    }

    /// `log f` as jets; fails where the density is not positive.
    pub fn log_density(&self, x: &[Jet2]) -> Result<Jet2> {
        let f = self.f.eval_jets(x)?;
        if f.value <= 0.0 {
            return Err(Error::Domain(format!("volume density {} is not positive", f.value)));
        }
        f.ln()
    }
}

/// `D_μ A` with `μ = f dx`, given `log f` at the same jet order as `A`:
/// `(D_μ A)^{I} = Σ_j (∂_j A^{I j} + A^{I j} ∂_j log f)`.
/// Degree 1 is the divergence and degree 2 the modular vector field.
pub fn koszul<S: Differentiable>(a: &Multivector<S>, log_f: &S) -> Result<Multivector<S::Lower>> {
    if a.degree == 0 || a.degree > 3 {
        return Err(Error::Degree(a.degree, 0));
    }
    let m = a.dim;
    check_dim(m, log_f.dim())?;
    let jd = log_f.lower().dim();
    let dlog = differential(log_f, m);
    let mut out = Multivector::zeros(a.degree - 1, m, jd)?;
    let mut idx = vec![0usize; a.degree];
    for off in 0..out.comps.len() {
        let mut rest = off;
        for s in (0..a.degree - 1).rev() {
            idx[s] = rest % m;
            rest /= m;
        }
        let mut acc = <S::Lower as Scalar>::constant(0.0, jd);
        for j in 0..m {
            idx[a.degree - 1] = j;
            let c = a.get(&idx);
            acc = acc.add(&c.partial(j)).add(&c.lower().mul(&dlog[j]));
        }
        out.comps[off] = acc;
    }
    Ok(out)
}

/// Modular vector field of `π` with respect to `μ` at `x`, to first order.
pub fn modular_vf_at(pi: &BivectorField, mu: &VolumeDensity, x: &[f64]) -> Result<Vec<Jet1>> {
    let jets = lift_coords(x);
    let p = Multivector::bivector(&pi.eval_jets(&jets)?)?;
    Ok(koszul(&p, &mu.log_density(&jets)?)?.comps)
}

pub fn modular_vf(pi: &BivectorField, mu: &VolumeDensity) -> VectorFieldHandle {
    let (pi, mu) = (pi.clone(), mu.clone());
    VectorFieldHandle::first_order(pi.dim, move |x| modular_vf_at(&pi, &mu, x))
}

/// Divergence `div_μ Z` at `x`, to first order.
pub fn divergence_at(z: &crate::geometry::VectorField, mu: &VolumeDensity, x: &[f64]) -> Result<Jet1> {
    let jets = lift_coords(x);
    let zv = Multivector::vector(z.eval_jets(&jets)?);
    Ok(koszul(&zv, &mu.log_density(&jets)?)?.comps[0].clone())
}

/// Which identities a [`PNStructure`] has been checked against.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Verified {
    pub jacobi: bool,
    pub torsion: bool,
    pub compatibility: bool,
}

#[derive(Clone, Debug)]
pub struct PNStructure {
    pub chart: Chart,
    pub pi0: BivectorField,
    pub nij: OneOneField,
    pub verified: Verified,
}

/// Worst defects found by [`PNStructure::verify`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StructureDefects {
    pub jacobi0: f64,
    pub jacobi1: f64,
    pub torsion: f64,
    pub compatibility: f64,
}

impl PNStructure {
    pub fn new(chart: Chart, pi0: BivectorField, nij: OneOneField) -> Result<Self> {
        check_dim(chart.dim(), pi0.dim)?;
        check_dim(chart.dim(), nij.dim)?;
        Ok(PNStructure {
            chart,
            pi0,
            nij,
            verified: Verified::default(),
        })
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// `π₁ = N π₀` (matrix `N Π₀`).
    pub fn pi1(&self) -> BivectorField {
        self.pi0.recursion(&self.nij, 1)
    }

    /// Checks the defining identities on `points` and records which hold below `tol`.
    pub fn verify(&mut self, points: &[Vec<f64>], tol: f64) -> Result<StructureDefects> {
        let pi1 = self.pi1();
        let mut d = StructureDefects::default();
        for x in points {
            d.jacobi0 = d.jacobi0.max(jacobi_defect(&self.pi0, x)?);
            d.jacobi1 = d.jacobi1.max(jacobi_defect(&pi1, x)?);
            d.torsion = d.torsion.max(torsion_defect(&self.nij, x)?);
            d.compatibility = d.compatibility.max(pn_compatibility_defect(&self.pi0, &self.nij, x)?);
        }
        self.verified = Verified {
            jacobi: d.jacobi0 < tol && d.jacobi1 < tol,
            torsion: d.torsion < tol,
            compatibility: d.compatibility < tol,
        };
        Ok(d)
    }
}

/// `X_N = X¹_μ − N X⁰_μ` at `x`, to first order.
pub fn pn_modular_vf_at(pn: &PNStructure, mu: &VolumeDensity, x: &[f64]) -> Result<Vec<Jet1>> {
    let jets = lift_coords(x);
    let lf = mu.log_density(&jets)?;
    let p0 = pn.pi0.eval_jets(&jets)?;
    let nm = pn.nij.eval_jets(&jets)?;
    let p1 = nm.matmul(&p0)?;
    let x0 = koszul(&Multivector::bivector(&p0)?, &lf)?.comps;
    let x1 = koszul(&Multivector::bivector(&p1)?, &lf)?.comps;
    let nx0 = nm.map(|s| s.lower()).matvec(&x0)?;
    Ok(x1.iter().zip(&nx0).map(|(a, b)| a.sub(b)).collect())
}

pub fn pn_modular_vf(pn: &PNStructure, mu: &VolumeDensity) -> VectorFieldHandle {
    let (pn, mu) = (pn.clone(), mu.clone());
    VectorFieldHandle::first_order(pn.dim(), move |x| pn_modular_vf_at(&pn, &mu, x))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |w, (u, v)| w.max((u - v).abs()))
}

fn vals(v: &[Jet1]) -> Vec<f64> {
    v.iter().map(|j| j.value).collect()
}

/// `‖X_N − π₀♯d(−½ tr N)‖_max` at `x`.
pub fn trace_formula_defect(pn: &PNStructure, mu: &VolumeDensity, x: &[f64]) -> Result<f64> {
    let xn = vals(&pn_modular_vf_at(pn, mu, x)?);
    let jets = lift_coords(x);
    let p0 = pn.pi0.eval_jets(&jets)?.values();
    let tr = pn.nij.eval_jets(&jets)?.trace();
    let d: Vec<f64> = tr.grad.iter().map(|g| -0.5 * g).collect();
    Ok(max_diff(&xn, &sharp(&p0, &d)?))
}

/// `‖X_N − π₁♯d(−½ log|det N|)‖_max` at `x`; needs `N` invertible.
pub fn nondegenerate_defect(pn: &PNStructure, mu: &VolumeDensity, x: &[f64]) -> Result<f64> {
    let xn = vals(&pn_modular_vf_at(pn, mu, x)?);
    let jets = lift_coords(x);
    let nm = pn.nij.eval_jets(&jets)?;
    let p1 = nm.matmul(&pn.pi0.eval_jets(&jets)?)?.values();
    let ld = logdet_jets(&nm)?;
    let d: Vec<f64> = ld.grad.iter().map(|g| -0.5 * g).collect();
    Ok(max_diff(&xn, &sharp(&p1, &d)?))
}

/// Poisson property of `X_N` for `π₁`: `max |[X_N, π₁]|` at `x`.
pub fn pn_modular_poisson_defect(pn: &PNStructure, mu: &VolumeDensity, x: &[f64]) -> Result<f64> {
    let xn = pn_modular_vf_at(pn, mu, x)?;
    let jets = lift_coords(x);
    let p1 = pn.nij.eval_jets(&jets)?.matmul(&pn.pi0.eval_jets(&jets)?)?;
    let p1l = Multivector::bivector(&p1)?.lower();
    Ok(schouten(&Multivector::vector(xn), &p1l)?.max_abs())
}

/// `d(tr N)` at `x`, the canonical representative of the modular class of
/// the deformed algebroid.
pub fn algebroid_modular_rep(n: &OneOneField, x: &[f64]) -> Result<Vec<f64>> {
    Ok(n.eval(x)?.trace().grad)
}

/// `‖X_{gμ} − X_μ + π♯d log g‖_max` at `x`.
pub fn mu_change_defect(pi: &BivectorField, mu: &VolumeDensity, g: &ScalarField, x: &[f64]) -> Result<f64> {
    let a = vals(&modular_vf_at(pi, &mu.rescaled(g), x)?);
    let b = vals(&modular_vf_at(pi, mu, x)?);
    let jets = lift_coords(x);
    let gv = g.eval_jets(&jets)?;
    if gv.value <= 0.0 {
        return Err(Error::Domain(format!("density factor {} is not positive", gv.value)));
    }
    let xg = sharp(&pi.eval_jets(&jets)?.values(), &gv.ln()?.grad)?;
    Ok((0..a.len()).fold(0.0, |w, i| w.max((a[i] - b[i] + xg[i]).abs())))
}

/// Largest spread of `X_N` across several densities at `x`.
pub fn mu_independence_defect(pn: &PNStructure, densities: &[VolumeDensity], x: &[f64]) -> Result<f64> {
    let fields = densities
        .iter()
        .map(|mu| Ok(vals(&pn_modular_vf_at(pn, mu, x)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for f in &fields[1..] {
        worst = worst.max(max_diff(&fields[0], f));
    }
    Ok(worst)
}

/// `D_μ² A` at `x` for a field of degree 2 or 3.
pub fn koszul_square(a: &Multivector<Jet2>, log_f: &Jet2) -> Result<Multivector<f64>> {
    let d1 = koszul(a, log_f)?;
    koszul(&d1, &log_f.lower())
}

/// `‖D_μ[A,B] − [A, D_μB] − (−1)^{b−1}[D_μA, B]‖_max` at one point.
pub fn koszul_derivation_defect(a: &Multivector<Jet2>, b: &Multivector<Jet2>, log_f: &Jet2) -> Result<f64> {
    let lhs = koszul(&schouten(a, b)?, &log_f.lower())?;
    let r1 = schouten(&a.lower(), &koszul(b, log_f)?)?;
    let r2 = schouten(&koszul(a, log_f)?, &b.lower())?;
    let sign = if b.degree % 2 == 1 { 1.0 } else { -1.0 };
    Ok(lhs.sub(&r1)?.sub(&r2.scale(sign))?.max_abs())
}
