use crate::error::Result;
use crate::geometry::{Chart, OneOneField};
use crate::modular::PNStructure;

use super::{canonical, names, Anchor, CatalogEntry};

/// Canonical `π₀` with `N = Id`; every hierarchy tensor is `π₀` and every flow vanishes.
pub fn identity(n: usize) -> Result<CatalogEntry> {
    let m = 2 * n;
    let chart = Chart::new("identity", names(&["q", "p"], n), vec![(-1.0, 1.0); m])?;
    let pn = PNStructure::new(chart, canonical(n), OneOneField::identity(m))?;
    Ok(CatalogEntry {
        id: "identity",
        n,
        summary: "canonical bracket with N = Id",
        pn,
        extra_poisson: Vec::new(),
        hamiltonians: Vec::new(),
        bihamiltonian: None,
        min_index: 0,
        symmetry: None,
        deformation: None,
        lax: None,
        flaschka: None,
        probe: vec![0.5; m],
        anchors: vec![Anchor { tag: "trivial", formula: "π_i = π₀, ĥ_i = n/i, X_k = 0" }],
    })
}
