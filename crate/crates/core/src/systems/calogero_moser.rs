use crate::ad::Jet2;
use crate::error::Result;
use crate::geometry::{Chart, Exclusion, OneOneField, ScalarField};
use crate::modular::PNStructure;

use super::{canonical, names, Anchor, CatalogEntry};

/// Rational Calogero–Moser in the `(F, G)` chart: `π₀ = Σ ∂F_i ∧ ∂G_i`,
/// `N = diag(F, F)`.
pub fn calogero_moser(n: usize) -> Result<CatalogEntry> {
    let m = 2 * n;
    let mut bx = vec![(0.5, 2.0); n];
    bx.extend(vec![(-1.0, 1.0); n]);
    let chart = Chart::new("calogero-moser", names(&["F", "G"], n), bx)?
        .with_exclusion(Exclusion::new("F_i != 0", move |x| x[..n].iter().all(|f| f.abs() > 1e-12)));
    // π^{F_i G_i} = 1: the canonical form with the roles of the halves swapped
    let pi0 = canonical(n).scale(-1.0);
    let nij = OneOneField::diagonal(m, move |x| Ok((0..m).map(|k| x[k % n].clone()).collect()));
    let pn = PNStructure::new(chart, pi0, nij)?;
    let mut hamiltonians = vec![(
        "h0".to_string(),
        ScalarField::new(m, move |x| {
            let mut s = Jet2::constant(0.0, m);
            for f in &x[..n] {
                s = s + f.ln()?;
            }
            Ok(s)
        }),
    )];
    for j in 1..=n as i32 {
        hamiltonians.push((
            format!("h{j}"),
            ScalarField::new(m, move |x| {
                let mut s = Jet2::constant(0.0, m);
                for f in &x[..n] {
                    s = s + f.powi(j)?;
                }
                Ok(s * (1.0 / j as f64))
            }),
        ));
    }
    CatalogEntry {
        id: "calogero-moser",
        n,
        summary: "rational Calogero-Moser in (F, G) coordinates",
        pn,
        extra_poisson: Vec::new(),
        hamiltonians,
        bihamiltonian: None,
        min_index: 0,
        symmetry: None,
        deformation: None,
        lax: None,
        flaschka: None,
        probe: (0..m).map(|k| if k < n { 1.0 + 0.5 * k as f64 } else { 0.0 }).collect(),
        anchors: vec![
            Anchor { tag: "recursion", formula: "π₁ = Σ F_i ∂F_i ∧ ∂G_i" },
            Anchor { tag: "ladder", formula: "π₀♯dĥ₁ = π₁♯dĥ₀ = Σ ∂G_i" },
            Anchor { tag: "second-flow", formula: "π₀♯dĥ₂ = π₁♯dĥ₁ = Σ F_i ∂G_i" },
        ],
    }
    .with_pair(None, "h0", "h1", "π₁♯dh₀ = π₀♯dh₁")
}
