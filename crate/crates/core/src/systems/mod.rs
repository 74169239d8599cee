//! Catalog of integrable systems with explicit PN data.
//!
//! Each entry fixes a chart with a sampling box and exclusions, the pair
//! `(π₀, N)`, the hamiltonians in their usual normalisation, and where
//! available a conformal symmetry, a deformation field `Z` with
//! `L_Z π₀ = π₁`, a Lax matrix and a Flaschka map.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::ad::{lift_coords, Jet2, Scalar};
use crate::eigen::symmetric_eigenvalues;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{BivectorField, ScalarField, VectorField};
use crate::linalg::Mat;
use crate::master::ConformalSymmetry;
use crate::modular::PNStructure;

mod calogero_moser;
mod harmonic;
mod identity;
mod toda_an;
mod toda_cn;
mod toda_moser;

pub use calogero_moser::calogero_moser;
pub use harmonic::harmonic_oscillator;
pub use identity::identity;
pub use toda_an::toda_an;
pub use toda_cn::{cn_canonical_hamiltonian, cn_eigen_lenard_defect, cn_printed_flow, toda_cn};
pub use toda_moser::toda_moser;

/// An identity the entry satisfies, in formula form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Anchor {
    pub tag: &'static str,
    pub formula: &'static str,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaxStructure {
    /// Symmetric, zero outside the three central diagonals.
    SymmetricTridiagonal,
    /// `2n × 2n` symmetric tridiagonal with `L_{2n−1−i, 2n−1−j} = −L_{ij}`
    /// away from the central entry `(n−1, n)`.
    SkewReflected,
}

type MatEval = Arc<dyn Fn(&[Jet2]) -> Result<Mat<Jet2>> + Send + Sync>;
type MapEval = Arc<dyn Fn(&[Jet2]) -> Result<Vec<Jet2>> + Send + Sync>;

/// Lax matrix as a function of the chart coordinates.
#[derive(Clone)]
pub struct LaxBuilder {
    pub structure: LaxStructure,
    pub size: usize,
    pub dim: usize,
    f: MatEval,
}

impl fmt::Debug for LaxBuilder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaxBuilder({:?}, {}x{})", self.structure, self.size, self.size)
    }
}

impl LaxBuilder {
    pub fn new(
        structure: LaxStructure,
        size: usize,
        dim: usize,
        f: impl Fn(&[Jet2]) -> Result<Mat<Jet2>> + Send + Sync + 'static,
    ) -> Self {
        LaxBuilder {
            structure,
            size,
            dim,
            f: Arc::new(f),
        }
    }

    pub fn eval_jets(&self, x: &[Jet2]) -> Result<Mat<Jet2>> {
        check_dim(self.dim, x.len())?;
        let l = (self.f)(x)?;
        check_dim(self.size, l.rows)?;
        Ok(l)
    }

    pub fn matrix(&self, x: &[f64]) -> Result<Mat<f64>> {
        Ok(self.eval_jets(&lift_coords(x))?.values())
    }

    pub fn eigenvalues(&self, x: &[f64]) -> Result<Vec<f64>> {
        symmetric_eigenvalues(&self.matrix(x)?)
    }

    /// Checks that `l` has the declared zero pattern and symmetries exactly.
    pub fn check_structure(&self, l: &Mat<f64>) -> Result<()> {
        let k = self.size;
        check_dim(k, l.rows)?;
        check_dim(k, l.cols)?;
        let bad = |what: &str, i: usize, j: usize| {
            Err(Error::Domain(format!("Lax matrix is not {what} at ({i}, {j})")))
        };
        for i in 0..k {
            for j in 0..k {
                if l.get(i, j) != l.get(j, i) {
                    return bad("symmetric", i, j);
                }
                if i.abs_diff(j) > 1 && *l.get(i, j) != 0.0 {
                    return bad("tridiagonal", i, j);
                }
                if self.structure == LaxStructure::SkewReflected {
                    let central = (i.min(j), i.max(j)) == (k / 2 - 1, k / 2);
                    if !central && *l.get(k - 1 - i, k - 1 - j) != -l.get(i, j) {
                        return bad("skew under reflection", i, j);
                    }
                }
            }
        }
        Ok(())
    }
}

/// A coordinate change from canonical `(q, p)` to the chart of an entry's Lax
/// variables.
#[derive(Clone)]
pub struct FlaschkaMap {
    pub source: Vec<String>,
    pub target: Vec<String>,
    /// Box of canonical coordinates whose image is a sensible sample region.
    pub source_box: Vec<(f64, f64)>,
    f: MapEval,
}

impl fmt::Debug for FlaschkaMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FlaschkaMap({:?} -> {:?})", self.source, self.target)
    }
}

impl FlaschkaMap {
    pub fn new(
        source: Vec<String>,
        target: Vec<String>,
        source_box: Vec<(f64, f64)>,
        f: impl Fn(&[Jet2]) -> Result<Vec<Jet2>> + Send + Sync + 'static,
    ) -> Self {
        FlaschkaMap {
            source,
            target,
            source_box,
            f: Arc::new(f),
        }
    }

    pub fn eval_jets(&self, x: &[Jet2]) -> Result<Vec<Jet2>> {
        check_dim(self.source.len(), x.len())?;
        let y = (self.f)(x)?;
        check_dim(self.target.len(), y.len())?;
        Ok(y)
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval_jets(&lift_coords(x))?.iter().map(|v| v.value).collect())
    }

    /// Rows are target coordinates, columns source coordinates.
    pub fn jacobian(&self, x: &[f64]) -> Result<Mat<f64>> {
        let y = self.eval_jets(&lift_coords(x))?;
        let m = x.len();
        Mat::from_vec(y.len(), m, y.iter().flat_map(|v| v.grad.clone()).collect())
    }

    /// `J Π Jᵀ`, the image of the bivector `Π` given at `x`.
    pub fn pushforward(&self, pi: &Mat<f64>, x: &[f64]) -> Result<Mat<f64>> {
        let j = self.jacobian(x)?;
        j.matmul(pi)?.matmul(&j.transpose())
    }

    /// `J v`, the image of a tangent vector at `x`.
    pub fn push_vector(&self, v: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        self.jacobian(x)?.matvec(v)
    }
}

/// `upper♯dh_upper = lower♯dh_lower`, the pair as the system is usually written.
#[derive(Clone, Debug)]
pub struct BiHamiltonian {
    pub upper: BivectorField,
    pub h_upper: ScalarField,
    pub lower: BivectorField,
    pub h_lower: ScalarField,
    pub formula: &'static str,
}

impl BiHamiltonian {
    pub fn defect(&self, x: &[f64]) -> Result<f64> {
        let a = crate::geometry::hamiltonian_vf(&self.upper, &self.h_upper).values(x)?;
        let b = crate::geometry::hamiltonian_vf(&self.lower, &self.h_lower).values(x)?;
        Ok(a.iter().zip(&b).fold(0.0, |w, (u, v)| w.max((u - v).abs())))
    }
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub n: usize,
    pub summary: &'static str,
    pub pn: PNStructure,
    /// Poisson tensors given by their own tables, checked alongside the hierarchy.
    pub extra_poisson: Vec<(String, BivectorField)>,
    pub hamiltonians: Vec<(String, ScalarField)>,
    pub bihamiltonian: Option<BiHamiltonian>,
    /// Lowest hierarchy index checked; below 0 only where `N⁻¹` stays tame on the box.
    pub min_index: i32,
    pub symmetry: Option<ConformalSymmetry>,
    /// `Z` with `L_Z π₀ = π₁`.
    pub deformation: Option<VectorField>,
    pub lax: Option<LaxBuilder>,
    pub flaschka: Option<FlaschkaMap>,
    pub probe: Vec<f64>,
    pub anchors: Vec<Anchor>,
}

impl CatalogEntry {
    pub fn dim(&self) -> usize {
        self.pn.dim()
    }

    pub fn hamiltonian(&self, name: &str) -> Option<&ScalarField> {
        self.hamiltonians.iter().find(|(k, _)| k == name).map(|(_, h)| h)
    }

    fn named(&self, name: &str) -> Result<ScalarField> {
        self.hamiltonian(name)
            .cloned()
            .ok_or_else(|| Error::Config(format!("{} has no hamiltonian {name}", self.id)))
    }

    /// Sets the pair `upper♯d(upper_h) = π₀♯d(lower_h)`; `upper` defaults to `π₁`.
    fn with_pair(
        mut self,
        upper: Option<BivectorField>,
        upper_h: &str,
        lower_h: &str,
        formula: &'static str,
    ) -> Result<Self> {
        self.bihamiltonian = Some(BiHamiltonian {
            upper: upper.unwrap_or_else(|| self.pn.pi1()),
            h_upper: self.named(upper_h)?,
            lower: self.pn.pi0.clone(),
            h_lower: self.named(lower_h)?,
            formula,
        });
        Ok(self)
    }
}

pub const SYSTEM_IDS: [&str; 6] = [
    "harmonic-oscillator",
    "calogero-moser",
    "toda-moser",
    "cn-toda",
    "an-toda",
    "identity",
];

/// Smallest `n` each system accepts.
pub fn min_n(id: &str) -> usize {
    match id {
        "cn-toda" | "an-toda" => 2,
        _ => 1,
    }
}

pub fn build(id: &str, n: usize) -> Result<CatalogEntry> {
    if !SYSTEM_IDS.contains(&id) {
        return Err(Error::UnknownSystem(id.to_string()));
    }
    let lo = min_n(id);
    if n < lo || n > 8 {
        return Err(Error::Config(format!("{id} needs {lo} <= n <= 8, got {n}")));
    }
    match id {
        "harmonic-oscillator" => harmonic_oscillator(n),
        "calogero-moser" => calogero_moser(n),
        "toda-moser" => toda_moser(n),
        "cn-toda" => toda_cn(n),
        "an-toda" => toda_an(n),
        "identity" => identity(n),
        other => Err(Error::UnknownSystem(other.to_string())),
    }
}

fn names(prefixes: &[&str], n: usize) -> Vec<String> {
    prefixes
        .iter()
        .flat_map(|p| (1..=n).map(move |i| format!("{p}{i}")))
        .collect()
}

/// `Σ ∂/∂y_i ∧ ∂/∂x_i` on `(x₁..x_n, y₁..y_n)`, i.e. `π^{y_i x_i} = 1`.
pub(crate) fn canonical(n: usize) -> BivectorField {
    BivectorField::from_entries(2 * n, move |x| {
        Ok((0..n).map(|i| (n + i, i, Jet2::constant(1.0, x.len()))).collect())
    })
}

fn zero(dim: usize) -> Jet2 {
    Jet2::constant(0.0, dim)
}

/// Sorted eigenvalues of a symmetric Lax matrix at `x`.
pub fn lax_spectrum(lax: &LaxBuilder, x: &[f64]) -> Result<Vec<f64>> {
    lax.eigenvalues(x)
}

/// `(1/k) tr L^k` as jets.
pub fn lax_trace(lax: &LaxBuilder, k: i32, x: &[Jet2]) -> Result<Jet2> {
    Ok(lax.eval_jets(x)?.pow(k)?.trace().scale(1.0 / k as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{jacobi_defect, pn_compatibility_defect, torsion_defect};
    use crate::hierarchy::{Hierarchy, HierarchySpec};
    use crate::modular::{trace_formula_defect, VolumeDensity};

    #[test]
    fn every_entry_is_pn_at_its_probe() {
        for id in SYSTEM_IDS {
            for n in min_n(id)..=3 {
                let e = build(id, n).unwrap();
                let x = &e.probe;
                assert_eq!(e.pn.chart.violated(x), None, "{id} {n}");
                assert!(jacobi_defect(&e.pn.pi0, x).unwrap() < 1e-10, "{id} {n}");
                assert!(jacobi_defect(&e.pn.pi1(), x).unwrap() < 1e-10, "{id} {n}");
                assert!(torsion_defect(&e.pn.nij, x).unwrap() < 1e-10, "{id} {n}");
                assert!(pn_compatibility_defect(&e.pn.pi0, &e.pn.nij, x).unwrap() < 1e-10, "{id} {n}");
                assert!(trace_formula_defect(&e.pn, &VolumeDensity::standard(e.dim()), x).unwrap() < 1e-10, "{id} {n}");
                for (name, p) in &e.extra_poisson {
                    assert!(jacobi_defect(p, x).unwrap() < 1e-10, "{id} {n} {name}");
                }
                let h = Hierarchy::build(HierarchySpec::new(e.pn.clone(), 3)).unwrap();
                let pt = h.at(x).unwrap();
                for k in 1..=4 {
                    assert!(pt.level_defect(k).unwrap() < 1e-10, "{id} {n} level {k}");
                }
            }
        }
    }

    #[test]
    fn unknown_and_bad_sizes() {
        assert!(matches!(build("kdv", 2), Err(Error::UnknownSystem(_))));
        assert!(build("cn-toda", 1).is_err());
        assert!(build("toda-moser", 0).is_err());
    }

    #[test]
    fn lax_structures_are_enforced() {
        for (id, n) in [("cn-toda", 3), ("an-toda", 4)] {
            let e = build(id, n).unwrap();
            let lax = e.lax.as_ref().unwrap();
            let l = lax.matrix(&e.probe).unwrap();
            lax.check_structure(&l).unwrap();
            let mut broken = l.clone();
            broken.set(0, 2, 0.1);
            broken.set(2, 0, 0.1);
            assert!(lax.check_structure(&broken).is_err());
        }
    }

}
