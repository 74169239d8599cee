use crate::ad::{lift_coords, Jet2, Scalar};
use crate::eigen::symmetric_eigenvalues;
use crate::error::{Error, Result};
use crate::geometry::{sharp, BivectorField, Chart, Exclusion, OneOneField, ScalarField};
use crate::linalg::Mat;
use crate::modular::PNStructure;

use super::{lax_trace, names, zero, Anchor, CatalogEntry, FlaschkaMap, LaxBuilder, LaxStructure};

/// Smallest admissible `|λ_i|` and `|λ_i² − λ_j²|` for the Lax spectrum `±λ_i`.
pub const SPECTRAL_GAP: f64 = 0.05;

fn lax_matrix<S: Scalar>(x: &[S], n: usize) -> Mat<S> {
    let k = 2 * n;
    let mut l = Mat::zeros(k, k, x[0].dim());
    for i in 0..n {
        l.set(i, i, x[n + i].clone());
        l.set(k - 1 - i, k - 1 - i, x[n + i].neg());
    }
    for i in 0..n - 1 {
        l.set(i, i + 1, x[i].clone());
        l.set(i + 1, i, x[i].clone());
        l.set(k - 2 - i, k - 1 - i, x[i].neg());
        l.set(k - 1 - i, k - 2 - i, x[i].neg());
    }
    l.set(n - 1, n, x[n - 1].clone());
    l.set(n, n - 1, x[n - 1].clone());
    l
}

/// Positive half `λ₁ < … < λ_n` of the Lax spectrum `±λ_i`.
fn positive_spectrum(x: &[f64], n: usize) -> Result<Vec<f64>> {
    let ev = symmetric_eigenvalues(&lax_matrix(x, n))?;
    Ok(ev[n..].to_vec())
}

fn spectrum_separated(x: &[f64], n: usize) -> bool {
    let Ok(lam) = positive_spectrum(x, n) else {
        return false;
    };
    let s: Vec<f64> = lam.iter().map(|l| l * l).collect();
    lam.iter().all(|l| *l >= SPECTRAL_GAP) && s.windows(2).all(|w| w[1] - w[0] >= SPECTRAL_GAP)
}

fn linear_table(x: &[Jet2], n: usize) -> Vec<(usize, usize, Jet2)> {
    let (a, b) = (|i: usize| i - 1, |i: usize| n + i - 1);
    let mut t = Vec::new();
    for i in 1..n {
        t.push((a(i), b(i), x[a(i)].neg()));
        t.push((a(i), b(i + 1), x[a(i)].clone()));
    }
    t.push((a(n), b(n), x[a(n)].scale(-2.0)));
    t
}

/// The cubic table; boundary rows come last so they override the generic ones.
fn cubic_table(x: &[Jet2], n: usize) -> Vec<(usize, usize, Jet2)> {
    let (ia, ib) = (|i: usize| i - 1, |i: usize| n + i - 1);
    let a = |i: usize| &x[i - 1];
    let b = |i: usize| &x[n + i - 1];
    let mut t = Vec::new();
    for i in 1..n.saturating_sub(1) {
        t.push((ia(i), ia(i + 1), a(i) * a(i + 1) * b(i + 1)));
    }
    t.push((ia(n - 1), ia(n), a(n - 1) * a(n) * b(n) * 2.0));
    for i in 1..n {
        t.push((ia(i), ib(i), (a(i) * b(i) * b(i) + a(i) * a(i) * a(i)).neg()));
    }
    t.push((ia(n), ib(n), (a(n) * b(n) * b(n) + a(n) * a(n) * a(n)) * -2.0));
    for i in 1..n.saturating_sub(1) {
        t.push((ia(i), ib(i + 2), a(i) * a(i + 1) * a(i + 1)));
    }
    for i in 1..n {
        t.push((ia(i), ib(i + 1), a(i) * b(i + 1) * b(i + 1) + a(i) * a(i) * a(i)));
    }
    t.push((ia(n - 1), ib(n), a(n - 1) * a(n - 1) * a(n - 1) + a(n - 1) * &(b(n) * b(n) - a(n) * a(n))));
    for i in 2..=n {
        t.push((ia(i), ib(i - 1), (a(i - 1) * a(i - 1) * a(i)).neg()));
    }
    t.push((ia(n), ib(n - 1), a(n - 1) * a(n - 1) * a(n) * -2.0));
    for i in 1..n {
        t.push((ib(i), ib(i + 1), a(i) * a(i) * &(b(i) + b(i + 1)) * 2.0));
    }
    t
}

/// `C_n` Toda on `(a, b)`. The hierarchy starts at the linear bracket and
/// `N = Π₃ Π₁⁻¹`, so hierarchy level `k` is the bracket of degree `2k + 1`
/// and `ĥ_k = H_{2k}`.
pub fn toda_cn(n: usize) -> Result<CatalogEntry> {
    let m = 2 * n;
    let mut bx = vec![(0.3, 1.2); n];
    bx.extend(vec![(-1.0, 1.0); n]);
    let chart = Chart::new("cn-toda", names(&["a", "b"], n), bx)?
        .with_exclusion(Exclusion::new("a_i != 0", move |x| x[..n].iter().all(|a| a.abs() > 1e-12)))
        .with_exclusion(Exclusion::new("Lax spectrum nonzero and simple in λ²", move |x| {
            spectrum_separated(x, n)
        }));
    let pi1 = BivectorField::from_entries(m, move |x| Ok(linear_table(x, n)));
    let pi3 = BivectorField::from_entries(m, move |x| Ok(cubic_table(x, n)));
    let nij = {
        let (p1, p3) = (pi1.clone(), pi3.clone());
        OneOneField::new(m, move |x| p3.eval_jets(x)?.matmul(&p1.eval_jets(x)?.inverse()?))
    };
    let pn = PNStructure::new(chart, pi1, nij.clone())?;
    let pi3_pair = pi3.clone();
    let lax = LaxBuilder::new(LaxStructure::SkewReflected, m, m, move |x| Ok(lax_matrix(x, n)));

    let mut hamiltonians = vec![(
        "H0".to_string(),
        ScalarField::new(m, move |x| Ok(crate::geometry::logdet_jets(&nij.eval_jets(x)?)?.scale(0.5))),
    )];
    for k in 1..=n as i32 {
        let l = lax.clone();
        hamiltonians.push((format!("H{}", 2 * k), ScalarField::new(m, move |x| lax_trace(&l, 2 * k, x))));
    }

    let mut src_box = vec![(-0.4, 0.4); n];
    src_box.extend(vec![(-2.0, 2.0); n]);
    let flaschka = FlaschkaMap::new(names(&["q", "p"], n), names(&["a", "b"], n), src_box, move |x| {
        let mut y = Vec::with_capacity(m);
        for i in 0..n - 1 {
            y.push(((&x[i] - &x[i + 1]) * 0.5).exp() * 0.5);
        }
        y.push(x[n - 1].exp() * std::f64::consts::FRAC_1_SQRT_2);
        for i in 0..n {
            y.push(x[n + i].scale(-0.5));
        }
        Ok(y)
    });

    let probe = (0..m)
        .map(|k| if k < n { 0.5 + 0.2 * (k + 1) as f64 } else { 0.3 * (k - n + 1) as f64 - 0.5 })
        .collect();
    CatalogEntry {
        id: "cn-toda",
        n,
        summary: "C_n Toda in Flaschka coordinates (a, b); linear and cubic brackets",
        pn,
        extra_poisson: vec![("pi3".into(), pi3.clone())],
        hamiltonians,
        bihamiltonian: None,
        min_index: 0,
        symmetry: None,
        deformation: None,
        lax: Some(lax),
        flaschka: Some(flaschka),
        probe,
        anchors: vec![
            Anchor { tag: "bi-hamiltonian", formula: "π₃♯dH₀ = π₁♯dH₂" },
            Anchor { tag: "lenard-eigenvalues", formula: "π₃♯dλ_i = λ_i² π₁♯dλ_i" },
            Anchor { tag: "trace", formula: "½ tr N = H₂, det N = (det L)²" },
            Anchor { tag: "equations", formula: "ȧ_i = a_i(b_{i+1} − b_i), ȧ_n = −2a_n b_n, ḃ_i = 2(a_i² − a_{i−1}²)" },
        ],
    }
    .with_pair(Some(pi3_pair), "H0", "H2", "π₃♯dH₀ = π₁♯dH₂")
}

/// The equations of motion in `(a, b)` in their usual form, with `a₀ = 0`.
pub fn cn_printed_flow(x: &[f64]) -> Vec<f64> {
    let n = x.len() / 2;
    let (a, b) = x.split_at(n);
    let mut v = Vec::with_capacity(2 * n);
    for i in 0..n - 1 {
        v.push(a[i] * (b[i + 1] - b[i]));
    }
    v.push(-2.0 * a[n - 1] * b[n - 1]);
    for i in 0..n {
        let prev = if i == 0 { 0.0 } else { a[i - 1] * a[i - 1] };
        v.push(2.0 * (a[i] * a[i] - prev));
    }
    v
}

/// `½ Σ p² + Σ e^{q_i − q_{i+1}} + e^{2q_n}` on canonical `(q, p)`.
pub fn cn_canonical_hamiltonian(n: usize) -> ScalarField {
    let m = 2 * n;
    ScalarField::new(m, move |x| {
        let mut h = zero(m);
        for i in 0..n {
            h = h + &x[n + i] * &x[n + i] * 0.5;
        }
        for i in 0..n - 1 {
            h = h + (&x[i] - &x[i + 1]).exp();
        }
        Ok(h + x[n - 1].scale(2.0).exp())
    })
}

/// `max_i ‖π₃♯dλ_i − λ_i² π₁♯dλ_i‖` with `dλ_i` recovered from
/// `d tr L^{2k} = 4k Σ_i λ_i^{2k−1} dλ_i`, `k = 1..n`.
pub fn cn_eigen_lenard_defect(e: &CatalogEntry, x: &[f64]) -> Result<f64> {
    let n = e.n;
    let m = 2 * n;
    let lax = e
        .lax
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{} has no Lax matrix", e.id)))?;
    let pi3 = &e
        .extra_poisson
        .iter()
        .find(|(k, _)| k == "pi3")
        .ok_or_else(|| Error::Config(format!("{} has no cubic bracket", e.id)))?
        .1;
    let jets = lift_coords(x);
    let l = lax.eval_jets(&jets)?;
    let l2 = l.matmul(&l)?;
    let mut p = l2.clone();
    let mut dp = Vec::with_capacity(n);
    for k in 1..=n {
        if k > 1 {
            p = p.matmul(&l2)?;
        }
        dp.push(p.trace().grad);
    }
    let lam = positive_spectrum(x, n)?;
    let s: Vec<f64> = lam.iter().map(|v| v * v).collect();
    // tr L^{2k} = 2 Σ s_i^k, so d tr L^{2k} = 2k Σ s_i^{k−1} ds_i
    let mut v = Mat::zeros(n, n, 0);
    for k in 1..=n {
        for i in 0..n {
            v.set(k - 1, i, 2.0 * k as f64 * s[i].powi(k as i32 - 1));
        }
    }
    let lu = v.lu()?;
    let mut dlam = vec![vec![0.0; m]; n];
    for c in 0..m {
        let rhs: Vec<f64> = dp.iter().map(|g| g[c]).collect();
        let ds = lu.solve(&rhs)?;
        for i in 0..n {
            dlam[i][c] = ds[i] / (2.0 * lam[i]);
        }
    }
    let p1 = e.pn.pi0.eval_jets(&jets)?.values();
    let p3 = pi3.eval_jets(&jets)?.values();
    let mut worst = 0.0f64;
    for i in 0..n {
        let lhs = sharp(&p3, &dlam[i])?;
        let rhs = sharp(&p1, &dlam[i])?;
        for (u, w) in lhs.iter().zip(&rhs) {
            worst = worst.max((u - s[i] * w).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::hamiltonian_vf;
    use crate::hierarchy::{eigen_spectral_invariants, Hierarchy, HierarchySpec};

    #[test]
    fn boundary_overrides() {
        let e = toda_cn(3).unwrap();
        let x = [0.5, 0.7, 0.9, 0.2, -0.3, 0.4];
        let p3 = e.extra_poisson[0].1.eval(&x).unwrap().values();
        // {a₂, a₃} = 2 a₂ a₃ b₃, {a₂, b₃} = a₂³ + a₂(b₃² − a₃²)
        assert!((p3.get(1, 2) - 2.0 * 0.7 * 0.9 * 0.4).abs() < 1e-15);
        assert!((p3.get(1, 5) - (0.343 + 0.7 * (0.16 - 0.81))).abs() < 1e-15);
        assert!((p3.get(2, 4) + 2.0 * 0.49 * 0.9).abs() < 1e-15);
        assert!((p3.get(4, 3) + 2.0 * 0.25 * (0.2 - 0.3)).abs() < 1e-15);
    }

    #[test]
    fn bi_hamiltonian_pair_and_traces() {
        for n in 2..=3 {
            let e = toda_cn(n).unwrap();
            let x = &e.probe;
            let h = Hierarchy::build(HierarchySpec::new(e.pn.clone(), n)).unwrap();
            for k in 0..=n as i32 {
                let name = format!("H{}", 2 * k);
                let a = e.hamiltonian(&name).unwrap().value(x).unwrap();
                let b = h.h(k).unwrap().value(x).unwrap();
                assert!((a - b).abs() < 1e-12 * a.abs().max(1.0), "{name} {a} {b}");
            }
            let lhs = hamiltonian_vf(&e.extra_poisson[0].1, e.hamiltonian("H0").unwrap()).values(x).unwrap();
            let rhs = hamiltonian_vf(&e.pn.pi0, e.hamiltonian("H2").unwrap()).values(x).unwrap();
            let d = lhs.iter().zip(&rhs).fold(0.0f64, |w, (a, b)| w.max((a - b).abs()));
            assert!(d < 1e-12, "{d}");
            assert!(cn_eigen_lenard_defect(&e, x).unwrap() < 1e-10);
        }
    }

    #[test]
    fn n_spectrum_is_squared_lax_spectrum() {
        let e = toda_cn(3).unwrap();
        let lam = positive_spectrum(&e.probe, 3).unwrap();
        let r = eigen_spectral_invariants(&e.pn.nij, &e.probe, 1e-7).unwrap();
        assert!(r.all_doubled && r.max_imag < 1e-9);
        for (i, (v, c)) in r.distinct.iter().enumerate() {
            assert_eq!(*c, 2);
            assert!((v - lam[i] * lam[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn flaschka_normalisation() {
        let n = 3;
        let e = toda_cn(n).unwrap();
        let f = e.flaschka.as_ref().unwrap();
        let q = [0.1, -0.2, 0.3, 0.5, -1.0, 0.7];
        let y = f.apply(&q).unwrap();
        // the canonical bracket pushes forward to −¼ π₁
        let canonical = super::super::canonical(n).eval(&q).unwrap().values();
        let pushed = f.pushforward(&canonical, &q).unwrap();
        let p1 = e.pn.pi0.eval(&y).unwrap().values().scale(-0.25);
        assert!(pushed.sub(&p1).unwrap().max_abs() < 1e-14);
        // canonical flow in (a, b) is the usual system; π₁♯dH₂ is −2 times it
        let xc = hamiltonian_vf(&super::super::canonical(n), &cn_canonical_hamiltonian(n)).values(&q).unwrap();
        let v = f.push_vector(&xc, &q).unwrap();
        let printed = cn_printed_flow(&y);
        assert!(v.iter().zip(&printed).all(|(a, b)| (a - b).abs() < 1e-13));
        let x2 = hamiltonian_vf(&e.pn.pi0, e.hamiltonian("H2").unwrap()).values(&y).unwrap();
        assert!(x2.iter().zip(&printed).all(|(a, b)| (a + 2.0 * b).abs() < 1e-13));
    }

    #[test]
    fn spectral_exclusion() {
        let e = toda_cn(2).unwrap();
        assert_eq!(e.pn.chart.violated(&e.probe), None);
        assert!(e.pn.chart.violated(&[0.01, 0.01, 0.0, 0.0]).is_some());
    }
}
