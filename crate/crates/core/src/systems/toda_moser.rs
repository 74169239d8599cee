use crate::ad::Jet2;
use crate::error::Result;
use crate::geometry::{BivectorField, Chart, Exclusion, OneOneField, ScalarField, VectorField};
use crate::master::ConformalSymmetry;
use crate::modular::PNStructure;

use super::{names, zero, Anchor, CatalogEntry};

/// Toda–Moser on `(λ, r)`: `π₀ = Σ r_i ∂λ_i ∧ ∂r_i`, `N = diag(λ, λ)`, with the
/// conformal symmetry `Z₀ = Σ λ_i ∂λ_i` scaling `ĥ₁`.
pub fn toda_moser(n: usize) -> Result<CatalogEntry> {
    let m = 2 * n;
    let chart = Chart::new("toda-moser", names(&["l", "r"], n), vec![(0.5, 2.0); m])?
        .with_exclusion(Exclusion::new("l_i != 0, r_i != 0", |x| x.iter().all(|v| v.abs() > 1e-12)));
    let pi0 = BivectorField::from_entries(m, move |x| Ok((0..n).map(|i| (i, n + i, x[n + i].clone())).collect()));
    let nij = OneOneField::diagonal(m, move |x| Ok((0..m).map(|k| x[k % n].clone()).collect()));
    let pn = PNStructure::new(chart, pi0, nij)?;
    let sum = move |x: &[Jet2], f: &dyn Fn(&Jet2) -> Result<Jet2>| -> Result<Jet2> {
        let mut s = zero(m);
        for l in &x[..n] {
            s = s + f(l)?;
        }
        Ok(s)
    };
    let hamiltonians = vec![
        ("h0".to_string(), ScalarField::new(m, move |x| sum(x, &|l| l.ln()))),
        ("h1".to_string(), ScalarField::new(m, move |x| sum(x, &|l| Ok(l.clone())))),
        ("h2".to_string(), ScalarField::new(m, move |x| sum(x, &|l| Ok(l * l * 0.5)))),
    ];
    let z0 = VectorField::new(m, move |x| Ok((0..m).map(|k| if k < n { x[k].clone() } else { zero(m) }).collect()));
    let z = VectorField::new(m, move |x| {
        Ok((0..m).map(|k| if k < n { &x[k] * &x[k] * -0.5 } else { zero(m) }).collect())
    });
    let probe = (0..m)
        .map(|k| if k < n && n > 1 { 1.0 + k as f64 / (n - 1) as f64 } else { 1.0 })
        .collect();
    CatalogEntry {
        id: "toda-moser",
        n,
        summary: "Toda-Moser in (lambda, r) coordinates",
        pn,
        extra_poisson: Vec::new(),
        hamiltonians,
        bihamiltonian: None,
        min_index: -2,
        symmetry: Some(ConformalSymmetry::new(z0, -1.0, 0.0, 1.0, 1)),
        deformation: Some(z),
        lax: None,
        flaschka: None,
        probe,
        anchors: vec![
            Anchor { tag: "recursion", formula: "π₁ = Σ λ_i r_i ∂λ_i ∧ ∂r_i" },
            Anchor { tag: "first-flow", formula: "λ̇_i = 0, ṙ_i = r_i" },
            Anchor { tag: "conformal", formula: "L_{Z₀}π₀ = −π₀, L_{Z₀}π₁ = 0, Z₀(h₁) = h₁" },
            Anchor { tag: "modular", formula: "X⁰_μ = Σ ∂λ_i, X¹_μ = Σ λ_i∂λ_i − r_i∂r_i" },
            Anchor { tag: "master", formula: "Z₋₁ = Σ ∂λ_i, Z₁ = −2Z, div Z = −h₁" },
        ],
    }
    .with_pair(None, "h1", "h2", "π₁♯dh₁ = π₀♯dh₂")
}
