//! Pointwise Schouten–Nijenhuis calculus.
//!
//! Conventions: `π^{ij} = π(dx^i, dx^j)`, `{f, g} = π(df, dg)` and the
//! hamiltonian field of `h` is `X_h = {h, ·}`, so
//! `(π♯α)^j = Σ_i α_i π^{ij}`. The Schouten bracket is normalised so that it
//! is the Lie bracket on vectors, `[X, f] = X(f)`, `[X, π] = L_X π`, and
//! `[π, h] = -X_h`.

use crate::ad::{lift_coords, Differentiable, Jet1, Jet2, Scalar};
use crate::error::{check_dim, Error, Result};
use crate::linalg::Mat;

use super::fields::{BivectorField, OneOneField, ScalarField, VectorField, VectorFieldHandle};
use super::multivector::{increasing_tuples, permutations, Multivector, MAX_DEGREE};

fn factorial(n: usize) -> f64 {
    (1..=n).product::<usize>() as f64
}

/// `(π♯α)^j = Σ_i α_i π^{ij}`.
pub fn sharp<S: Scalar>(pi: &Mat<S>, alpha: &[S]) -> Result<Vec<S>> {
    check_dim(pi.rows, alpha.len())?;
    pi.transpose().matvec(alpha)
}

/// Gradient of a scalar jet as a one-form one order lower.
pub fn differential<S: Differentiable>(h: &S, dim: usize) -> Vec<S::Lower> {
    (0..dim).map(|k| h.partial(k)).collect()
}

/// `X_h = π♯dh`.
pub fn hamiltonian_vf(pi: &BivectorField, h: &ScalarField) -> VectorFieldHandle {
    let (pi, h) = (pi.clone(), h.clone());
    let dim = pi.dim;
    VectorFieldHandle::first_order(dim, move |x| {
        let jets = lift_coords(x);
        let p = pi.eval_jets(&jets)?.map(|s| s.lower());
        let dh = differential(&h.eval_jets(&jets)?, dim);
        sharp(&p, &dh)
    })
}

/// Schouten bracket `[A, B]`, one derivative order lower than its arguments.
///
/// Component formula, with `c = a + b - 1` and `L = (l_1..l_c)`:
/// `[A,B]^L = Σ_σ sgn σ ( T1(σL) / ((a-1)! b!) - T2(σL) / (a! (b-1)!) )` where
/// `T1(L) = Σ_k A^{l_1..l_{a-1} k} ∂_k B^{l_a..l_c}` and
/// `T2(L) = Σ_k ∂_k A^{l_1..l_a} B^{k l_{a+1}..l_c}`.
pub fn schouten<S: Differentiable>(a: &Multivector<S>, b: &Multivector<S>) -> Result<Multivector<S::Lower>> {
    check_dim(a.dim, b.dim)?;
    let (p, q, m) = (a.degree, b.degree, a.dim);
    if p + q == 0 || p + q - 1 > MAX_DEGREE {
        return Err(Error::Degree(p, q));
    }
    let c = p + q - 1;
    let jd = a.comps[0].lower().dim();
    let al = a.lower();
    let bl = b.lower();
    let da: Vec<Multivector<S::Lower>> = if q >= 1 { (0..m).map(|k| a.partial(k)).collect() } else { vec![] };
    let db: Vec<Multivector<S::Lower>> = if p >= 1 { (0..m).map(|k| b.partial(k)).collect() } else { vec![] };
    let w1 = if p >= 1 { 1.0 / (factorial(p - 1) * factorial(q)) } else { 0.0 };
    let w2 = if q >= 1 { 1.0 / (factorial(p) * factorial(q - 1)) } else { 0.0 };

    let mut out = Multivector::zeros(c, m, jd)?;
    let mut ia = vec![0usize; p];
    let mut ib = vec![0usize; q];
    for tuple in increasing_tuples(c, m) {
        let mut acc = S::Lower::constant(0.0, jd);
        for (perm, sign) in permutations(c) {
            let l: Vec<usize> = perm.iter().map(|&s| tuple[s]).collect();
            if p >= 1 {
                // T1: A^{l_1..l_{a-1} k} ∂_k B^{l_a..l_c}
                ia[..p - 1].copy_from_slice(&l[..p - 1]);
                ib.copy_from_slice(&l[p - 1..]);
                for k in 0..m {
                    ia[p - 1] = k;
                    let t = al.get(&ia).mul(db[k].get(&ib));
                    acc = acc.add(&t.scale(sign * w1));
                }
            }
            if q >= 1 {
                // T2: ∂_k A^{l_1..l_a} B^{k l_{a+1}..l_c}
                ia.copy_from_slice(&l[..p]);
                ib[1..].copy_from_slice(&l[p..]);
                for k in 0..m {
                    ib[0] = k;
                    let t = da[k].get(&ia).mul(bl.get(&ib));
                    acc = acc.sub(&t.scale(sign * w2));
                }
            }
        }
        out.set_antisym(&tuple, acc);
    }
    Ok(out)
}

/// Lie bracket of two vectors given as component jets.
pub fn lie_bracket<S: Differentiable>(x: &[S], y: &[S]) -> Result<Vec<S::Lower>> {
    Ok(schouten(&Multivector::vector(x.to_vec()), &Multivector::vector(y.to_vec()))?.comps)
}

fn values(v: &[Jet1]) -> Vec<f64> {
    v.iter().map(|j| j.value).collect()
}

struct BracketTerms {
    n: Mat<f64>,
    nx_y: Vec<f64>,
    x_ny: Vec<f64>,
    x_y: Vec<f64>,
    nx_ny: Vec<f64>,
}

fn bracket_terms(nm: &Mat<Jet2>, xv: &[Jet2], yv: &[Jet2]) -> Result<BracketTerms> {
    let nx = nm.matvec(xv)?;
    let ny = nm.matvec(yv)?;
    Ok(BracketTerms {
        n: nm.values(),
        nx_y: values(&lie_bracket(&nx, yv)?),
        x_ny: values(&lie_bracket(xv, &ny)?),
        x_y: values(&lie_bracket(xv, yv)?),
        nx_ny: values(&lie_bracket(&nx, &ny)?),
    })
}

fn torsion_from_terms(t: &BracketTerms) -> Result<Vec<f64>> {
    let a = t.n.matvec(&t.nx_y)?;
    let b = t.n.matvec(&t.x_ny)?;
    let c = t.n.matmul(&t.n)?.matvec(&t.x_y)?;
    Ok((0..a.len()).map(|i| a[i] + b[i] - c[i] - t.nx_ny[i]).collect())
}

/// `T_N(X,Y) = N[NX,Y] + N[X,NY] - N²[X,Y] - [NX,NY]` at `x`.
pub fn nijenhuis_torsion(n: &OneOneField, xf: &VectorField, yf: &VectorField, x: &[f64]) -> Result<Vec<f64>> {
    let jets = lift_coords(x);
    let t = bracket_terms(&n.eval_jets(&jets)?, &xf.eval_jets(&jets)?, &yf.eval_jets(&jets)?)?;
    torsion_from_terms(&t)
}

/// `[X,Y]_N = [NX,Y] + [X,NY] - N[X,Y]` at `x`.
pub fn n_bracket(n: &OneOneField, xf: &VectorField, yf: &VectorField, x: &[f64]) -> Result<Vec<f64>> {
    let jets = lift_coords(x);
    let t = bracket_terms(&n.eval_jets(&jets)?, &xf.eval_jets(&jets)?, &yf.eval_jets(&jets)?)?;
    let c = t.n.matvec(&t.x_y)?;
    Ok((0..c.len()).map(|i| t.nx_y[i] + t.x_ny[i] - c[i]).collect())
}

/// Largest torsion component over all pairs of coordinate basis vectors.
/// Constant fields suffice because the torsion is tensorial.
pub fn torsion_defect(n: &OneOneField, x: &[f64]) -> Result<f64> {
    let m = n.dim;
    let jets = lift_coords(x);
    let nm = n.eval_jets(&jets)?;
    let basis = |i: usize| -> Vec<Jet2> { (0..m).map(|k| Jet2::constant(if k == i { 1.0 } else { 0.0 }, m)).collect() };
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in i + 1..m {
            let t = torsion_from_terms(&bracket_terms(&nm, &basis(i), &basis(j))?)?;
            worst = t.iter().fold(worst, |w, v| w.max(v.abs()));
        }
    }
    Ok(worst)
}

/// `N A`, contracting every index of `A` with `N`:
/// `(NA)(α_1..α_a) = A(N*α_1..N*α_a)`; on bivectors this is `N π Nᵀ`.
pub fn n_act<S: Scalar>(n: &Mat<S>, a: &Multivector<S>) -> Result<Multivector<S>> {
    check_dim(n.rows, a.dim)?;
    let m = a.dim;
    let mut cur = a.clone();
    for slot in 0..a.degree {
        let mut next = Multivector::zeros(a.degree, m, a.jet_dim())?;
        let stride = m.pow((a.degree - 1 - slot) as u32);
        for off in 0..cur.comps.len() {
            let i = (off / stride) % m;
            let base = off - i * stride;
            let mut acc = S::constant(0.0, a.jet_dim());
            for k in 0..m {
                acc = acc.add(&n.get(i, k).mul(&cur.comps[base + k * stride]));
            }
            next.comps[off] = acc;
        }
        cur = next;
    }
    Ok(cur)
}

/// `N^k` as a field; negative `k` needs `N` invertible wherever evaluated.
pub fn n_power(n: &OneOneField, k: i32) -> OneOneField {
    let n = n.clone();
    OneOneField::new(n.dim, move |x| n.eval_jets(x)?.pow(k))
}

/// `tr N^k` at `x`.
pub fn n_trace(n: &OneOneField, k: i32, x: &[f64]) -> Result<Jet2> {
    Ok(n.eval(x)?.pow(k)?.trace())
}

/// `log |det N|` from jets of `N`.
pub fn logdet_jets(nm: &Mat<Jet2>) -> Result<Jet2> {
    let det = nm.det()?;
    let abs = if det.value < 0.0 { det.neg() } else { det };
    abs.ln()
}

/// `log |det N|` at `x`.
pub fn n_logdet(n: &OneOneField, x: &[f64]) -> Result<Jet2> {
    logdet_jets(&n.eval(x)?)
}

/// `[π, π]` at `x`.
pub fn jacobiator(pi: &BivectorField, x: &[f64]) -> Result<Multivector<Jet1>> {
    let p = pi.eval_multivector(x)?;
    schouten(&p, &p)
}

/// `max |[π, π]|` at `x`.
pub fn jacobi_defect(pi: &BivectorField, x: &[f64]) -> Result<f64> {
    Ok(jacobiator(pi, x)?.max_abs())
}

/// Compatibility of `π₀` and `N` at `x`: the larger of `‖NΠ₀ - Π₀Nᵀ‖_max` and
/// the largest component over `(i, j, k)` of
/// `Σ_l (π^{lj} ∂_l N^i_k + π^{il} ∂_l N^j_k - π^{lj} ∂_k N^i_l
///       - N^l_k ∂_l π^{ij} + N^j_l ∂_k π^{il})`.
pub fn pn_compatibility_defect(pi0: &BivectorField, n: &OneOneField, x: &[f64]) -> Result<f64> {
    let jets = lift_coords(x);
    let p = pi0.eval_jets(&jets)?;
    let nm = n.eval_jets(&jets)?;
    let m = p.rows;
    let pv = p.values();
    let nv = nm.values();
    let lhs = nv.matmul(&pv)?;
    let rhs = pv.matmul(&nv.transpose())?;
    let mut worst = lhs.sub(&rhs)?.max_abs();
    let dp = |k: usize, i: usize, j: usize| p.get(i, j).grad[k];
    let dn = |k: usize, i: usize, j: usize| nm.get(i, j).grad[k];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let mut e = 0.0;
                for l in 0..m {
                    e += pv.get(l, j) * dn(l, i, k) + pv.get(i, l) * dn(l, j, k)
                        - pv.get(l, j) * dn(k, i, l)
                        - nv.get(l, k) * dp(l, i, j)
                        + nv.get(j, l) * dp(k, i, l);
                }
                worst = worst.max(e.abs());
            }
        }
    }
    Ok(worst)
}

/// The trace of the compatibility identity:
/// `max_i |Σ_{l,k} (2 π^{lk} ∂_l N^i_k + π^{il} ∂_l N^k_k)|`.
pub fn contracted_compatibility_defect(pi0: &BivectorField, n: &OneOneField, x: &[f64]) -> Result<f64> {
    let jets = lift_coords(x);
    let p = pi0.eval_jets(&jets)?.values();
    let nm = n.eval_jets(&jets)?;
    let m = p.rows;
    let dtr = nm.trace();
    let mut worst = 0.0f64;
    for i in 0..m {
        let mut e = 0.0;
        for l in 0..m {
            for k in 0..m {
                e += 2.0 * p.get(l, k) * nm.get(i, k).grad[l];
            }
            e += p.get(i, l) * dtr.grad[l];
        }
        worst = worst.max(e.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn canonical(n: usize) -> BivectorField {
        // coordinates (q_1..q_n, p_1..p_n), π = Σ ∂p_i ∧ ∂q_i
        let m = 2 * n;
        BivectorField::from_entries(m, move |_| Ok((0..n).map(|i| (n + i, i, Jet2::constant(1.0, m))).collect()))
    }

    fn energy(m: usize) -> ScalarField {
        ScalarField::new(m, |x| Ok(x.iter().fold(Jet2::constant(0.0, x.len()), |a, v| a + v * v) * 0.5))
    }

    fn toda_moser_pi(n: usize, order: usize) -> BivectorField {
        // π^{λ_i r_i} = λ_i^order r_i on (λ, r)
        BivectorField::from_entries(2 * n, move |x| {
            Ok((0..n)
                .map(|i| (i, n + i, x[i].powi(order as i32).unwrap() * x[n + i].clone()))
                .collect())
        })
    }

    #[test]
    fn sharp_gives_oscillator_flow() {
        let x = hamiltonian_vf(&canonical(1), &energy(2)).values(&[1.0, 0.0]).unwrap();
        assert_eq!(x, vec![0.0, -1.0]);
        let zero = sharp(&canonical(1).eval(&[1.0, 0.0]).unwrap().values(), &[0.0, 0.0]).unwrap();
        assert_eq!(zero, vec![0.0, 0.0]);
    }

    #[test]
    fn sharp_gives_toda_moser_second_flow() {
        let h2 = ScalarField::new(4, |x| Ok((&x[0] * &x[0] + &x[1] * &x[1]) * 0.5));
        let v = hamiltonian_vf(&toda_moser_pi(2, 0), &h2).values(&[1.0, 2.0, 1.0, 1.0]).unwrap();
        assert_eq!(v, vec![0.0, 0.0, 1.0, 2.0]);
        let c = ScalarField::constant(2, 3.0);
        assert_eq!(hamiltonian_vf(&canonical(1), &c).values(&[0.3, 0.4]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn bracket_with_function_is_minus_hamiltonian_field() {
        let pi = toda_moser_pi(2, 1);
        let h = ScalarField::new(4, |x| Ok(&x[0] * &x[3] + x[1].exp()));
        let x = [0.7, 1.3, 0.9, 1.6];
        let p = pi.eval_multivector(&x).unwrap();
        let hv = Multivector::scalar(h.eval(&x).unwrap(), 4);
        let ph = schouten(&p, &hv).unwrap();
        let hp = schouten(&hv, &p).unwrap();
        let xh = hamiltonian_vf(&pi, &h).values(&x).unwrap();
        for i in 0..4 {
            assert!((ph.comps[i].value + xh[i]).abs() < 1e-14);
            assert!((hp.comps[i].value + xh[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn coordinate_lie_bracket() {
        // [∂q, q ∂p] = ∂p
        let x = Multivector::vector(vec![Jet2::constant(1.0, 2), Jet2::constant(0.0, 2)]);
        let jets = lift_coords(&[0.4, -0.2]);
        let y = Multivector::vector(vec![Jet2::constant(0.0, 2), jets[0].clone()]);
        let b = schouten(&x, &y).unwrap();
        assert_eq!(b.values().comps, vec![0.0, 1.0]);
    }

    #[test]
    fn vector_on_bivector_is_lie_derivative() {
        // L_Z π₀ = π₁ for Z = -½ Σ λ² ∂λ on Toda–Moser
        let n = 2;
        let z = VectorField::new(4, move |x| {
            let mut v: Vec<Jet2> = (0..n).map(|i| (&x[i] * &x[i]) * -0.5).collect();
            v.extend((0..n).map(|_| Jet2::constant(0.0, 4)));
            Ok(v)
        });
        let x = [0.8, 1.7, 1.1, 0.6];
        let lz = schouten(&z.eval(&x).unwrap(), &toda_moser_pi(n, 0).eval_multivector(&x).unwrap()).unwrap();
        let p1 = toda_moser_pi(n, 1).eval_multivector(&x).unwrap();
        for (a, b) in lz.comps.iter().zip(&p1.comps) {
            assert!((a.value - b.value).abs() < 1e-14);
        }
    }

    #[test]
    fn jacobi_of_constant_and_toda_moser_pairs() {
        assert_eq!(jacobi_defect(&canonical(2), &[0.1, 0.2, 0.3, 0.4]).unwrap(), 0.0);
        let x = [0.8, 1.7, 1.1, 0.6];
        let p0 = toda_moser_pi(2, 0).eval_multivector(&x).unwrap();
        let p1 = toda_moser_pi(2, 1).eval_multivector(&x).unwrap();
        assert!(schouten(&p0, &p1).unwrap().max_abs() < 1e-14);
    }

    /// Jacobiator `{x^a,{x^b,x^c}} + cyclic` from values of π at `x` and
    /// central differences of π.
    fn fd_jacobiator(pi: &BivectorField, x: &[f64], h: f64) -> Vec<f64> {
        let m = x.len();
        let p = pi.eval(x).unwrap().values();
        let dp: Vec<Mat<f64>> = (0..m)
            .map(|l| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[l] += h;
                xm[l] -= h;
                pi.eval(&xp).unwrap().values().sub(&pi.eval(&xm).unwrap().values()).unwrap().scale(0.5 / h)
            })
            .collect();
        let mut out = Vec::new();
        for (a, b, c) in (0..m).flat_map(|a| (0..m).flat_map(move |b| (0..m).map(move |c| (a, b, c)))) {
            // {x^a, π^{bc}} = Σ_l π^{al} ∂_l π^{bc}
            let t = |a: usize, b: usize, c: usize| (0..m).map(|l| p.get(a, l) * dp[l].get(b, c)).sum::<f64>();
            out.push(t(a, b, c) + t(b, c, a) + t(c, a, b));
        }
        out
    }

    fn wild_bivector() -> BivectorField {
        // not Poisson
        BivectorField::from_entries(3, |x| {
            Ok(vec![
                (0, 1, &x[2] * &x[2] + x[0].clone()),
                (0, 2, x[1].exp()),
                (1, 2, &x[0] * &x[1]),
            ])
        })
    }

    #[test]
    fn schouten_of_pi_with_itself_is_twice_the_jacobiator() {
        let pi = wild_bivector();
        let x = [0.3, -0.4, 0.8];
        let s = jacobiator(&pi, &x).unwrap().values();
        let fd = fd_jacobiator(&pi, &x, 1e-5);
        let scale = fd.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(scale > 0.1);
        for (sv, fv) in s.comps.iter().zip(&fd) {
            assert!((sv - 2.0 * fv).abs() < 1e-8, "{sv} vs {fv}");
        }
    }

    #[test]
    fn quadratic_monomial_triple_brackets() {
        // {f,{g,h}} + cyclic for quadratic monomials, from first-order jets of the
        // inner bracket, vanishes exactly when [π,π] does
        let x = [0.9, 1.4];
        let triple = |pi: &BivectorField| {
            let jets = lift_coords(&x);
            let p = pi.eval_jets(&jets).unwrap();
            let mono = [&jets[0] * &jets[0], &jets[0] * &jets[1], &jets[1] * &jets[1]];
            let br1 = |g: &Jet2, h: &Jet2| {
                let mut acc = Jet1::constant(0.0, 2);
                for k in 0..2 {
                    for l in 0..2 {
                        acc = acc.add(&p.get(k, l).lower().mul(&g.partial(k)).mul(&h.partial(l)));
                    }
                }
                acc
            };
            let outer = |f: &Jet2, gh: &Jet1| {
                (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| p.get(i, j).value * f.grad[i] * gh.grad[j]).sum::<f64>()
            };
            let [f, g, h] = &mono;
            (outer(f, &br1(g, h)) + outer(g, &br1(h, f)) + outer(h, &br1(f, g)), br1(f, g).value)
        };
        let (cyc, fg) = triple(&toda_moser_pi(1, 1));
        assert!(jacobi_defect(&toda_moser_pi(1, 1), &x).unwrap() < 1e-14);
        assert!(cyc.abs() < 1e-12, "{cyc}");
        assert!(fg.abs() > 0.1);
        // any 2d bivector is Poisson; in 3d the wild one is not and both tests agree
        let wild = wild_bivector();
        let y = [0.3, -0.4, 0.8];
        assert!(jacobi_defect(&wild, &y).unwrap() > 1e-3);
    }

    fn toda_moser_n(n: usize) -> OneOneField {
        OneOneField::diagonal(2 * n, move |x| Ok((0..2 * n).map(|k| x[k % n].clone()).collect()))
    }

    #[test]
    fn torsion_examples() {
        let x = [0.7, 1.2, 0.9, 1.4];
        assert_eq!(torsion_defect(&OneOneField::identity(4), &x).unwrap(), 0.0);
        assert!(torsion_defect(&toda_moser_n(2), &x).unwrap() < 1e-14);
        let e1 = VectorField::constant(vec![1.0, 0.0]);
        let e2 = VectorField::constant(vec![0.0, 1.0]);
        // diag(x², x¹): T(e₁, e₂) = (x¹ − x², x¹ − x²)
        let bad = OneOneField::diagonal(2, |x| Ok(vec![x[1].clone(), x[0].clone()]));
        let t = nijenhuis_torsion(&bad, &e1, &e2, &[0.6, -1.1]).unwrap();
        assert!((t[0] - 1.7).abs() < 1e-14 && (t[1] - 1.7).abs() < 1e-14);
        let t = nijenhuis_torsion(&bad, &e2, &e1, &[0.6, -1.1]).unwrap();
        assert!((t[0] + 1.7).abs() < 1e-14);
        // the rank-one N^i_j = x^i x^j has vanishing torsion
        let outer = OneOneField::new(2, |x| {
            Mat::from_vec(2, 2, vec![&x[0] * &x[0], &x[0] * &x[1], &x[1] * &x[0], &x[1] * &x[1]])
        });
        assert!(nijenhuis_torsion(&outer, &e1, &e2, &[0.6, -1.1]).unwrap().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn n_bracket_examples() {
        let x = [0.7, 1.2, 0.9, 1.4];
        let id = OneOneField::identity(4);
        let xf = VectorField::constant(vec![1.0, 0.0, 0.0, 0.0]);
        let yf = VectorField::new(4, |x| Ok(vec![Jet2::constant(0.0, 4), Jet2::constant(0.0, 4), x[0].clone(), Jet2::constant(0.0, 4)]));
        let plain = lie_bracket(&xf.eval(&x).unwrap().comps, &yf.eval(&x).unwrap().comps).unwrap();
        let viaid = n_bracket(&id, &xf, &yf, &x).unwrap();
        for i in 0..4 {
            assert!((plain[i].value - viaid[i]).abs() < 1e-15);
        }
        let cn = OneOneField::new(4, |_| Ok(Mat::identity(4, 4).scale(3.0)));
        let c2 = VectorField::constant(vec![0.0, 1.0, 2.0, 0.0]);
        assert_eq!(n_bracket(&cn, &xf, &c2, &x).unwrap(), vec![0.0; 4]);

        // Toda–Moser N, X = ∂λ₁, Y = λ₁ ∂r₁ against central differences
        let n = toda_moser_n(2);
        let got = n_bracket(&n, &xf, &yf, &x).unwrap();
        let fd = fd_n_bracket(&x);
        for i in 0..4 {
            assert!((got[i] - fd[i]).abs() < 1e-8, "{got:?} vs {fd:?}");
        }
    }

    fn fd_n_bracket(x: &[f64]) -> Vec<f64> {
        // fields as plain functions; [U,V]^i = U^k ∂_k V^i - V^k ∂_k U^i
        let nmat = |x: &[f64]| [x[0], x[1], x[0], x[1]];
        let xf = |_: &[f64]| vec![1.0, 0.0, 0.0, 0.0];
        let yf = |x: &[f64]| vec![0.0, 0.0, x[0], 0.0];
        let nx = move |x: &[f64]| {
            let d = nmat(x);
            xf(x).iter().enumerate().map(|(i, v)| d[i] * v).collect::<Vec<_>>()
        };
        let ny = move |x: &[f64]| {
            let d = nmat(x);
            yf(x).iter().enumerate().map(|(i, v)| d[i] * v).collect::<Vec<_>>()
        };
        let h = 1e-5;
        let br = |u: &dyn Fn(&[f64]) -> Vec<f64>, v: &dyn Fn(&[f64]) -> Vec<f64>| {
            let dir = |f: &dyn Fn(&[f64]) -> Vec<f64>, w: &[f64]| {
                let xp: Vec<f64> = x.iter().zip(w).map(|(a, b)| a + h * b).collect();
                let xm: Vec<f64> = x.iter().zip(w).map(|(a, b)| a - h * b).collect();
                f(&xp).iter().zip(f(&xm)).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>()
            };
            let a = dir(v, &u(x));
            let b = dir(u, &v(x));
            a.iter().zip(b).map(|(a, b)| a - b).collect::<Vec<_>>()
        };
        let d = nmat(x);
        let t1 = br(&nx, &yf);
        let t2 = br(&xf, &ny);
        let t3 = br(&xf, &yf);
        (0..4).map(|i| t1[i] + t2[i] - d[i] * t3[i]).collect()
    }

    #[test]
    fn n_act_on_bivector_is_conjugation() {
        let x = [0.7, 1.2, 0.9];
        let p = wild_bivector().eval_multivector(&x).unwrap().values();
        let n = Mat::from_vec(3, 3, vec![1.0, 2.0, 0.0, -1.0, 0.5, 3.0, 0.2, 0.0, 1.5]).unwrap();
        let direct = n.matmul(&p.to_mat().unwrap()).unwrap().matmul(&n.transpose()).unwrap();
        let acted = n_act(&n, &p).unwrap().to_mat().unwrap();
        assert!(direct.sub(&acted).unwrap().max_abs() < 1e-14);
        // sharp(NA, α) = N sharp(A, Nᵀα)
        let alpha = [0.3, -1.0, 2.0];
        let lhs = sharp(&acted, &alpha).unwrap();
        let nta = n.transpose().matvec(&alpha).unwrap();
        let rhs = n.matvec(&sharp(&p.to_mat().unwrap(), &nta).unwrap()).unwrap();
        for i in 0..3 {
            assert!((lhs[i] - rhs[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn oscillator_trace_and_determinant() {
        // I_i = ½(q_i² + p_i²), N = diag(I, I), n = 2
        let n = OneOneField::diagonal(4, |x| {
            let i1 = (&x[0] * &x[0] + &x[2] * &x[2]) * 0.5;
            let i2 = (&x[1] * &x[1] + &x[3] * &x[3]) * 0.5;
            Ok(vec![i1.clone(), i2.clone(), i1, i2])
        });
        let x = [1.0, 0.5, 0.3, 1.2];
        let (i1, i2) = (0.5 * (1.0 + 0.09), 0.5 * (0.25 + 1.44));
        assert!((n_trace(&n, 1, &x).unwrap().value - 2.0 * (i1 + i2)).abs() < 1e-14);
        assert!((n_logdet(&n, &x).unwrap().value - (i1 * i2 * i1 * i2 as f64).ln()).abs() < 1e-14);
        // tr N² = 4 h₂ with h₂ = ½ Σ λ²
        let t2 = n_trace(&toda_moser_n(2), 2, &[1.0, 2.0, 0.5, 0.5]).unwrap();
        assert_eq!(t2.value, 4.0 * 2.5);
        assert!(matches!(n_logdet(&OneOneField::new(2, |_| Ok(Mat::zeros(2, 2, 2))), &[0.0, 0.0]), Err(Error::SingularTensor(_))));
    }

    #[test]
    fn compatibility_examples() {
        let x = [0.8, 1.1];
        let p0 = canonical(1);
        assert_eq!(pn_compatibility_defect(&p0, &OneOneField::identity(2), &x).unwrap(), 0.0);
        let osc = OneOneField::diagonal(2, |x| {
            let i = (&x[0] * &x[0] + &x[1] * &x[1]) * 0.5;
            Ok(vec![i.clone(), i])
        });
        assert!(pn_compatibility_defect(&p0, &osc, &x).unwrap() < 1e-14);
        assert!(contracted_compatibility_defect(&p0, &osc, &x).unwrap() < 1e-14);
        // N = x¹ Id is compatible with any π₀ in two dimensions but not in four
        let scalar = |m: usize| OneOneField::diagonal(m, move |x| Ok(vec![x[0].clone(); m]));
        assert!(pn_compatibility_defect(&p0, &scalar(2), &x).unwrap() < 1e-14);
        let y = [0.8, 1.1, -0.4, 0.3];
        assert!(pn_compatibility_defect(&canonical(2), &scalar(4), &y).unwrap() > 0.1);
    }

    fn poly_field(c: &[f64], x: &[Jet2], salt: usize) -> Jet2 {
        // c0 + c1 x_a + c2 x_b x_c + c3 x_a²  with indices drawn from salt
        let m = x.len();
        let (a, b, cc) = (salt % m, (salt / 3 + 1) % m, (salt / 7 + 2) % m);
        (x[a].clone() * c[1] + (&x[b] * &x[cc]) * c[2] + (&x[a] * &x[a]) * c[3]).add_const(c[0])
    }

    fn random_multivector(deg: usize, m: usize, coeffs: &[f64], x: &[f64]) -> Multivector<Jet2> {
        let jets = lift_coords(x);
        let mut out = Multivector::zeros(deg, m, m).unwrap();
        for (t, idx) in increasing_tuples(deg, m).into_iter().enumerate() {
            let c = &coeffs[(4 * t) % (coeffs.len() - 4)..][..4];
            out.set_antisym(&idx, poly_field(c, &jets, t * 5 + deg));
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn graded_antisymmetry(m in 2usize..=6, da in 0usize..=2, db in 1usize..=2,
                               coeffs in proptest::collection::vec(-1.5f64..1.5, 64),
                               x in proptest::collection::vec(-1.0f64..1.0, 6)) {
            let x = &x[..m];
            let a = random_multivector(da, m, &coeffs, x);
            let b = random_multivector(db, m, &coeffs[7..], x);
            let ab = schouten(&a, &b).unwrap();
            let ba = schouten(&b, &a).unwrap();
            // [A,B] = -(-1)^{(a-1)(b-1)} [B,A]
            let sign = if ((da as i64 - 1) * (db as i64 - 1)).rem_euclid(2) == 0 { -1.0 } else { 1.0 };
            for (u, v) in ab.comps.iter().zip(&ba.comps) {
                prop_assert!((u.value - sign * v.value).abs() < 1e-9);
            }
        }

        #[test]
        fn leibniz_in_second_argument(m in 2usize..=6, da in 1usize..=2,
                                      coeffs in proptest::collection::vec(-1.5f64..1.5, 64),
                                      x in proptest::collection::vec(-1.0f64..1.0, 6)) {
            // [A, fB] = [A,f] ∧ B + f [A,B] for B a vector, f a function
            let x = &x[..m];
            let jets = lift_coords(x);
            let a = random_multivector(da, m, &coeffs, x);
            let b = random_multivector(1, m, &coeffs[3..], x);
            let f = poly_field(&coeffs[40..44], &jets, 11);
            let fb = b.map(|s| s.mul(&f));
            let lhs = schouten(&a, &fb).unwrap();
            let af = schouten(&a, &Multivector::scalar(f.clone(), m)).unwrap();
            let ab = schouten(&a, &b).unwrap();
            let fl = f.lower();
            let bl = b.lower();
            let rhs = if da == 1 {
                ab.map(|s| s.mul(&fl)).add(&Multivector::vector(bl.comps.iter().map(|s| s.mul(&af.comps[0])).collect())).unwrap()
            } else {
                let w = Multivector::wedge(&af, &bl).unwrap();
                ab.map(|s| s.mul(&fl)).add(&w).unwrap()
            };
            for (u, v) in lhs.comps.iter().zip(&rhs.comps) {
                prop_assert!((u.value - v.value).abs() < 1e-9, "{} vs {}", u.value, v.value);
            }
        }

        #[test]
        fn graded_jacobi_for_vectors_and_bivector(m in 2usize..=5,
                                                  coeffs in proptest::collection::vec(-1.5f64..1.5, 64),
                                                  x in proptest::collection::vec(-1.0f64..1.0, 6)) {
            // [X,[Y,P]] = [[X,Y],P] + [Y,[X,P]] with X, Y linear fields, whose
            // bracket is again linear so its first-order jet is exact
            let x = &x[..m];
            let jets = lift_coords(x);
            let lin = |off: usize| -> Vec<Jet2> {
                (0..m).map(|i| (0..m).fold(Jet2::constant(coeffs[off + i], m), |acc, k| acc + jets[k].clone() * coeffs[(off + 3 * i + k) % 60])).collect()
            };
            let (xv, yv) = (lin(0), lin(17));
            let p = random_multivector(2, m, &coeffs[5..], x);
            let xy = lie_bracket(&xv, &yv).unwrap();
            let xp = schouten(&Multivector::vector(xv.clone()), &p).unwrap();
            let yp = schouten(&Multivector::vector(yv.clone()), &p).unwrap();
            let lhs = schouten(&Multivector::vector(xv.iter().map(|s| s.lower()).collect()), &yp).unwrap();
            let r1 = schouten(&Multivector::vector(xy), &p.lower()).unwrap();
            let r2 = schouten(&Multivector::vector(yv.iter().map(|s| s.lower()).collect()), &xp).unwrap();
            for i in 0..lhs.comps.len() {
                prop_assert!((lhs.comps[i] - r1.comps[i] - r2.comps[i]).abs() < 1e-9);
            }
        }
    }
}
