//! Real symmetric eigenvalues: Householder reduction to tridiagonal form
//! followed by QL iteration with implicit Wilkinson shifts.

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Reduces a symmetric matrix to tridiagonal form, returning (diagonal, off-diagonal).
/// `off[i]` couples rows `i` and `i + 1`.
pub fn tridiagonalize(a: &Mat<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows;
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| *a.get(i, j)).collect()).collect();
    for k in 0..n.saturating_sub(2) {
        let alpha_sq: f64 = (k + 1..n).map(|i| m[i][k] * m[i][k]).sum();
        if alpha_sq == 0.0 {
            continue;
        }
        let x0 = m[k + 1][k];
        let alpha = if x0 > 0.0 { -alpha_sq.sqrt() } else { alpha_sq.sqrt() };
        let mut v = vec![0.0; n];
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = m[i][k];
        }
        let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        // m <- H m H with H = I - 2 v v^T / |v|^2
        let p: Vec<f64> = (0..n)
            .map(|i| 2.0 * (0..n).map(|j| m[i][j] * v[j]).sum::<f64>() / vnorm_sq)
            .collect();
        let kcoef = (0..n).map(|i| v[i] * p[i]).sum::<f64>() / vnorm_sq;
        let q: Vec<f64> = (0..n).map(|i| p[i] - kcoef * v[i]).collect();
        for i in 0..n {
            for j in 0..n {
                m[i][j] -= v[i] * q[j] + q[i] * v[j];
            }
        }
    }
    let d = (0..n).map(|i| m[i][i]).collect();
    let e = (0..n.saturating_sub(1)).map(|i| m[i + 1][i]).collect();
    (d, e)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL.
/// `max_iter` bounds the total number of QL sweeps.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64], max_iter: usize) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.resize(n, 0.0);
    let mut iterations = 0usize;
    for l in 0..n {
        loop {
            let mut mm = l;
            while mm + 1 < n {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= f64::EPSILON * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iterations += 1;
            if iterations > max_iter {
                return Err(Error::Convergence { iterations: max_iter });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[mm] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = mm;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[mm] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mm] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Sorted eigenvalues of a real symmetric matrix.
pub fn symmetric_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    let (d, e) = tridiagonalize(a);
    tridiagonal_eigenvalues(&d, &e, 30 * a.rows.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(n: usize, v: Vec<f64>) -> Mat<f64> {
        Mat::from_vec(n, n, v).unwrap()
    }

    #[test]
    fn diagonal_and_swap() {
        let ev = symmetric_eigenvalues(&mat(3, vec![3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]))
            .unwrap();
        assert_eq!(ev, vec![1.0, 2.0, 3.0]);
        let ev = symmetric_eigenvalues(&mat(2, vec![0.0, 1.0, 1.0, 0.0])).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn second_difference_matrix() {
        // tridiag(-1, 2, -1) of size n: eigenvalues 2 - 2 cos(k pi / (n + 1))
        let n = 12;
        let d = vec![2.0; n];
        let e = vec![-1.0; n - 1];
        let ev = tridiagonal_eigenvalues(&d, &e, 30 * n).unwrap();
        for (k, v) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13, "{v} vs {exact}");
        }
    }

    #[test]
    fn convergence_budget_is_enforced() {
        let d = vec![1.0, 2.0, 3.0, 4.0];
        let e = vec![1.0, 1.0, 1.0];
        assert_eq!(
            tridiagonal_eigenvalues(&d, &e, 1),
            Err(Error::Convergence { iterations: 1 })
        );
    }

    proptest! {
        #[test]
        fn trace_and_frobenius_are_preserved(v in proptest::collection::vec(-2.0f64..2.0, 36)) {
            let n = 6;
            let mut a = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    a[i * n + j] = 0.5 * (v[i * n + j] + v[j * n + i]);
                }
            }
            let a = mat(n, a);
            let ev = symmetric_eigenvalues(&a).unwrap();
            let tr: f64 = (0..n).map(|i| a.get(i, i)).sum();
            let fro: f64 = a.data.iter().map(|x| x * x).sum();
            prop_assert!((ev.iter().sum::<f64>() - tr).abs() < 1e-12);
            prop_assert!((ev.iter().map(|x| x * x).sum::<f64>() - fro).abs() < 1e-11);
            prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
