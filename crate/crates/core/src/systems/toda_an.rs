use crate::ad::{Jet2, Scalar};
use crate::eigen::symmetric_eigenvalues;
use crate::error::Result;
use crate::geometry::{logdet_jets, BivectorField, Chart, Exclusion, OneOneField, ScalarField};
use crate::linalg::Mat;
use crate::modular::PNStructure;

use super::{canonical, names, zero, Anchor, CatalogEntry, FlaschkaMap, LaxBuilder, LaxStructure};

/// Smallest admissible `|λ|` over the Lax spectrum; `det N = 4ⁿ (det L)²`.
pub const SPECTRAL_FLOOR: f64 = 0.05;

fn flaschka<S: Scalar>(x: &[S], n: usize, exp: impl Fn(&S) -> S) -> Vec<S> {
    let mut y = Vec::with_capacity(2 * n - 1);
    for i in 0..n - 1 {
        y.push(exp(&x[i].sub(&x[i + 1]).scale(0.5)).scale(0.5));
    }
    for i in 0..n {
        y.push(x[n + i].scale(-0.5));
    }
    y
}

/// Symmetric tridiagonal `L` with diagonal `b` and off-diagonal `a`.
fn lax_from_flaschka<S: Scalar>(y: &[S], n: usize) -> Mat<S> {
    let mut l = Mat::zeros(n, n, y[0].dim());
    for i in 0..n {
        l.set(i, i, y[n - 1 + i].clone());
    }
    for i in 0..n - 1 {
        l.set(i, i + 1, y[i].clone());
        l.set(i + 1, i, y[i].clone());
    }
    l
}

/// Non-periodic `A_{n−1}` Toda lattice on canonical `(q, p)` with its
/// quadratic second bracket.
pub fn toda_an(n: usize) -> Result<CatalogEntry> {
    let m = 2 * n;
    let mut bx = vec![(-0.5, 0.5); n];
    bx.extend(vec![(-1.0, 1.0); n]);
    let chart = Chart::new("an-toda", names(&["q", "p"], n), bx)?.with_exclusion(Exclusion::new(
        "Lax spectrum bounded away from 0",
        move |x| {
            let l = lax_from_flaschka(&flaschka(x, n, |v| v.exp()), n);
            symmetric_eigenvalues(&l).is_ok_and(|ev| ev.iter().all(|v| v.abs() >= SPECTRAL_FLOOR))
        },
    ));
    let pi0 = canonical(n);
    let pi1 = BivectorField::from_entries(m, move |x| {
        let mut t = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                t.push((i, j, Jet2::constant(1.0, m)));
            }
            t.push((i, n + i, x[n + i].neg()));
        }
        for i in 0..n - 1 {
            t.push((n + i, n + i + 1, (&x[i] - &x[i + 1]).exp()));
        }
        Ok(t)
    });
    let nij = {
        let (p0, p1) = (pi0.clone(), pi1.clone());
        // π₀ is constant
        let p0inv = p0.eval(&vec![0.0; m])?.values().inverse()?;
        OneOneField::new(m, move |x| p1.eval_jets(x)?.matmul_const(&p0inv))
    };
    let pn = PNStructure::new(chart, pi0, nij.clone())?;
    let hamiltonians = vec![
        (
            "h0".to_string(),
            ScalarField::new(m, move |x| Ok(logdet_jets(&nij.eval_jets(x)?)?.scale(0.5))),
        ),
        (
            "h1".to_string(),
            ScalarField::new(m, move |x| Ok(x[n..].iter().fold(zero(m), |s, p| s + p))),
        ),
        (
            "h2".to_string(),
            ScalarField::new(m, move |x| {
                let mut h = zero(m);
                for p in &x[n..] {
                    h = h + p * p * 0.5;
                }
                for i in 0..n - 1 {
                    h = h + (&x[i] - &x[i + 1]).exp();
                }
                Ok(h)
            }),
        ),
    ];
    let lax = LaxBuilder::new(LaxStructure::SymmetricTridiagonal, n, m, move |x| {
        Ok(lax_from_flaschka(&flaschka(x, n, |v| v.exp()), n))
    });
    let mut target = names(&["a"], n - 1);
    target.extend(names(&["b"], n));
    let fl = FlaschkaMap::new(names(&["q", "p"], n), target, vec![(-0.5, 0.5); m], move |x| {
        Ok(flaschka(x, n, |v| v.exp()))
    });
    let probe = (0..m).map(|k| if k < n { 0.0 } else { 0.9 - 0.6 * (k - n) as f64 }).collect();
    CatalogEntry {
        id: "an-toda",
        n,
        summary: "non-periodic Toda lattice on canonical (q, p)",
        pn,
        extra_poisson: Vec::new(),
        hamiltonians,
        bihamiltonian: None,
        min_index: 0,
        symmetry: None,
        deformation: None,
        lax: Some(lax),
        flaschka: Some(fl),
        probe,
        anchors: vec![
            Anchor { tag: "bi-hamiltonian", formula: "π₀♯dh₂ = π₁♯dh₁, h₁ = Σ p_i" },
            Anchor { tag: "multi-hamiltonian", formula: "π_j♯dh₂ = π_{j+2}♯dh₀" },
            Anchor { tag: "lax", formula: "a_i = ½e^{(q_i − q_{i+1})/2}, b_i = −p_i/2" },
        ],
    }
    .with_pair(None, "h1", "h2", "π₁♯dh₁ = π₀♯dh₂")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{eigen_spectral_invariants, Hierarchy, HierarchySpec};

    #[test]
    fn second_bracket_at_origin() {
        let e = toda_an(2).unwrap();
        let p1 = e.pn.pi1().eval(&[0.0; 4]).unwrap().values();
        assert_eq!(*p1.get(0, 1), 1.0);
        assert_eq!(*p1.get(2, 3), 1.0);
        assert_eq!(*p1.get(0, 2), 0.0);
        assert_eq!(*p1.get(1, 3), 0.0);
    }

    #[test]
    fn hamiltonians_and_ladders() {
        for n in 2..=4 {
            let e = toda_an(n).unwrap();
            let x = &e.probe;
            let h = Hierarchy::build(HierarchySpec::new(e.pn.clone(), 4)).unwrap();
            let pt = h.at(x).unwrap();
            assert!((pt.h(1).unwrap().value - e.hamiltonian("h1").unwrap().value(x).unwrap()).abs() < 1e-13);
            assert!((pt.h(2).unwrap().value - e.hamiltonian("h2").unwrap().value(x).unwrap()).abs() < 1e-12);
            assert!((pt.h(0).unwrap().value - e.hamiltonian("h0").unwrap().value(x).unwrap()).abs() < 1e-12);
            assert!(pt.ladder_pair(1, 2).unwrap() < 1e-12);
            // π_j♯dh₂ = π_{j+2}♯dh₀ for j = 0
            let a = pt.sharp_dh(0, 2).unwrap();
            let b = pt.sharp_dh(2, 0).unwrap();
            assert!(a.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-11));
        }
    }

    #[test]
    fn n_spectrum_is_scaled_lax_spectrum() {
        let e = toda_an(3).unwrap();
        let lam = e.lax.as_ref().unwrap().eigenvalues(&e.probe).unwrap();
        let r = eigen_spectral_invariants(&e.pn.nij, &e.probe, 1e-7).unwrap();
        assert!(r.all_doubled);
        let mut scaled: Vec<f64> = lam.iter().map(|l| -2.0 * l).collect();
        scaled.sort_by(f64::total_cmp);
        for (i, (v, _)) in r.distinct.iter().enumerate() {
            assert!((v - scaled[i]).abs() < 1e-9, "{v} {}", scaled[i]);
        }
    }

    #[test]
    fn symmetric_spectrum_with_zero_diagonal() {
        let e = toda_an(3).unwrap();
        let a = 0.5f64;
        let q1 = 2.0 * (2.0 * a).ln();
        let x = [q1, 0.0, -q1, 0.0, 0.0, 0.0];
        let ev = e.lax.as_ref().unwrap().eigenvalues(&x).unwrap();
        assert!((ev[0] + ev[2]).abs() < 1e-12 && ev[1].abs() < 1e-12);
        assert!(e.pn.chart.violated(&x).is_some());
    }
}
