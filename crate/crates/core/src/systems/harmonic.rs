use crate::ad::Jet2;
use crate::error::Result;
use crate::geometry::{Chart, Exclusion, OneOneField, ScalarField, VectorField};
use crate::modular::PNStructure;

use super::{canonical, names, Anchor, CatalogEntry};

fn action(x: &[Jet2], n: usize, i: usize) -> Jet2 {
    (&x[i] * &x[i] + &x[n + i] * &x[n + i]) * 0.5
}

/// `n` uncoupled oscillators on `(q, p)` with `N = diag(I, I)`, `I_i = ½(q_i² + p_i²)`.
pub fn harmonic_oscillator(n: usize) -> Result<CatalogEntry> {
    let m = 2 * n;
    let chart = Chart::new("harmonic-oscillator", names(&["q", "p"], n), vec![(0.3, 1.5); m])?.with_exclusion(
        Exclusion::new("I_i != 0", move |x| (0..n).all(|i| x[i] * x[i] + x[n + i] * x[n + i] > 1e-12)),
    );
    let nij = OneOneField::diagonal(m, move |x| Ok((0..m).map(|k| action(x, n, k % n)).collect()));
    let pn = PNStructure::new(chart, canonical(n), nij)?;
    let h0 = ScalarField::new(m, move |x| {
        let mut s = Jet2::constant(0.0, m);
        for i in 0..n {
            s = s + action(x, n, i).ln()?;
        }
        Ok(s)
    });
    let h1 = ScalarField::new(m, move |x| Ok((0..n).fold(Jet2::constant(0.0, m), |s, i| s + action(x, n, i))));
    let z = VectorField::new(m, move |x| Ok((0..m).map(|k| &x[k] * &action(x, n, k % n) * -0.25).collect()));
    CatalogEntry {
        id: "harmonic-oscillator",
        n,
        summary: "uncoupled oscillators, N = diag(I, I)",
        pn,
        extra_poisson: Vec::new(),
        hamiltonians: vec![("h0".into(), h0), ("h1".into(), h1)],
        bihamiltonian: None,
        min_index: 0,
        symmetry: None,
        deformation: Some(z),
        lax: None,
        flaschka: None,
        probe: vec![1.0; m],
        anchors: vec![
            Anchor { tag: "recursion", formula: "π₁ = Σ I_i ∂p_i ∧ ∂q_i" },
            Anchor { tag: "ladder", formula: "X₁ = π₀♯dh₁ = π₁♯dh₀ = Σ p_i∂q_i − q_i∂p_i" },
            Anchor { tag: "log-hamiltonian", formula: "½ log det N = Σ log I_i" },
            Anchor { tag: "divergence", formula: "−div Z = ½ tr N = h₁" },
        ],
    }
    .with_pair(None, "h0", "h1", "π₁♯dh₀ = π₀♯dh₁")
}
