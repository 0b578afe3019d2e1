//! Dense and tridiagonal symmetric eigensolvers.
//!
//! Two independent routes on purpose: cyclic Jacobi rotations for dense
//! matrices and Sturm-sequence bisection for tridiagonal ones. Each is used
//! as an oracle for the other in the test suite.

/// Off-diagonal Frobenius norm at which Jacobi sweeps stop.
pub const JACOBI_OFF_NORM: f64 = 1e-12;
/// Bisection interval width floor.
pub const BISECTION_TOL: f64 = 1e-13;

/// Eigenvalues of a dense symmetric matrix, ascending, by cyclic Jacobi
/// rotations.
pub fn jacobi_eigenvalues(matrix: &[Vec<f64>]) -> Vec<f64> {
    let n = matrix.len();
    if n == 0 {
        return Vec::new();
    }
    let mut a: Vec<f64> = matrix.iter().flat_map(|r| r.iter().copied()).collect();
    let idx = |i: usize, j: usize| i * n + j;

    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[idx(i, j)] * a[idx(i, j)];
            }
        }
        (2.0 * s).sqrt()
    };

    for _sweep in 0..100 {
        if off_norm(&a) <= JACOBI_OFF_NORM {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[idx(p, p)] = app - t * apq;
                a[idx(q, q)] = aqq + t * apq;
                a[idx(p, q)] = 0.0;
                a[idx(q, p)] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[idx(r, p)];
                    let arq = a[idx(r, q)];
                    a[idx(r, p)] = arp - s * (arq + tau * arp);
                    a[idx(p, r)] = a[idx(r, p)];
                    a[idx(r, q)] = arq + s * (arp - tau * arq);
                    a[idx(q, r)] = a[idx(r, q)];
                }
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[idx(i, i)]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

/// Number of eigenvalues of the symmetric tridiagonal matrix strictly below
/// `x`, by counting negative Sturm-sequence pivots.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let n = diag.len();
    if n == 0 {
        return 0;
    }
    let guard = f64::MIN_POSITIVE.sqrt();
    let mut count = 0usize;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let q_safe = if q.abs() < guard {
            if q < 0.0 {
                -guard
            } else {
                guard
            }
        } else {
            q
        };
        q = (diag[i] - x) - off[i - 1] * off[i - 1] / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `count` smallest eigenvalues of a symmetric tridiagonal matrix,
/// ascending, by Sturm bisection.
pub fn sturm_smallest(diag: &[f64], off: &[f64], count: usize) -> Vec<f64> {
    let n = diag.len();
    assert!(count <= n);
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![diag[0]];
    }
    // Gershgorin interval
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    lo -= 1.0;
    hi += 1.0;

    (0..count)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if b - a < BISECTION_TOL.max(4.0 * f64::EPSILON * mid.abs()) {
                    break;
                }
                if sturm_count(diag, off, mid) <= k {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Eigenvector for a known eigenvalue of a symmetric tridiagonal matrix, by
/// inverse iteration with a partially pivoted tridiagonal solve.
pub fn tridiagonal_eigenvector(diag: &[f64], off: &[f64], eigenvalue: f64) -> Vec<f64> {
    let n = diag.len();
    if n == 1 {
        return vec![1.0];
    }
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..4 {
        let mut w = solve_shifted(diag, off, eigenvalue, &v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        for x in &mut w {
            *x /= norm;
        }
        v = w;
    }
    v
}

/// Solve (T - shift I) x = b where T is tridiagonal, with row pivoting.
/// Pivoting fills a second superdiagonal.
fn solve_shifted(diag: &[f64], off: &[f64], shift: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut main: Vec<f64> = diag.iter().map(|d| d - shift).collect();
    let mut sup1 = vec![0.0; n];
    let mut sup2 = vec![0.0; n];
    for i in 0..n - 1 {
        sup1[i] = off[i];
    }
    let mut rhs = b.to_vec();
    let tiny = 1e-300;

    for i in 0..n - 1 {
        // Row i+1 currently holds (below_main, below_sup1, below_sup2) in
        // columns i, i+1, i+2.
        let mut below_main = off[i];
        let mut below_sup1 = main[i + 1];
        let mut below_sup2 = sup1[i + 1];
        let mut below_rhs = rhs[i + 1];
        if below_main.abs() > main[i].abs() {
            std::mem::swap(&mut main[i], &mut below_main);
            std::mem::swap(&mut sup1[i], &mut below_sup1);
            std::mem::swap(&mut sup2[i], &mut below_sup2);
            std::mem::swap(&mut rhs[i], &mut below_rhs);
        }
        let pivot = if main[i].abs() < tiny {
            tiny.copysign(main[i])
        } else {
            main[i]
        };
        let f = below_main / pivot;
        main[i + 1] = below_sup1 - f * sup1[i];
        sup1[i + 1] = below_sup2 - f * sup2[i];
        rhs[i + 1] = below_rhs - f * rhs[i];
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        if i + 1 < n {
            acc -= sup1[i] * x[i + 1];
        }
        if i + 2 < n {
            acc -= sup2[i] * x[i + 2];
        }
        let pivot = if main[i].abs() < tiny {
            tiny.copysign(main[i])
        } else {
            main[i]
        };
        x[i] = acc / pivot;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_closed_form() {
        let eig = sturm_smallest(&[3.0, 3.0], &[-2.0], 2);
        assert!((eig[0] - 1.0).abs() < 1e-12);
        assert!((eig[1] - 5.0).abs() < 1e-12);
        let eig = jacobi_eigenvalues(&[vec![3.0, -2.0], vec![-2.0, 3.0]]);
        assert!((eig[0] - 1.0).abs() < 1e-12);
        assert!((eig[1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn one_by_one() {
        assert_eq!(sturm_smallest(&[7.5], &[], 1), vec![7.5]);
    }

    #[test]
    fn toeplitz_closed_form_m50() {
        let m = 50;
        let diag = vec![4.0; m];
        let off = vec![-2.0; m - 1];
        let eig = sturm_smallest(&diag, &off, m);
        for (k, e) in eig.iter().enumerate() {
            let exact = 4.0 * (1.0 - ((k as f64 + 1.0) * std::f64::consts::PI / (m as f64 + 1.0)).cos());
            assert!((e - exact).abs() < 1e-12, "k={k}: {e} vs {exact}");
        }
    }

    #[test]
    fn jacobi_agrees_with_sturm_on_tridiagonal() {
        let m = 12;
        let diag: Vec<f64> = (0..m).map(|i| 2.0 + (i as f64) * 0.3).collect();
        let off: Vec<f64> = (0..m - 1).map(|i| -1.0 + 0.05 * i as f64).collect();
        let mut dense = vec![vec![0.0; m]; m];
        for i in 0..m {
            dense[i][i] = diag[i];
            if i + 1 < m {
                dense[i][i + 1] = off[i];
                dense[i + 1][i] = off[i];
            }
        }
        let a = jacobi_eigenvalues(&dense);
        let b = sturm_smallest(&diag, &off, m);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenvector_residual_is_small() {
        let m = 20;
        let diag = vec![4.0; m];
        let off = vec![-2.0; m - 1];
        let lambda = sturm_smallest(&diag, &off, 1)[0];
        let v = tridiagonal_eigenvector(&diag, &off, lambda);
        for i in 0..m {
            let mut tv = diag[i] * v[i];
            if i > 0 {
                tv += off[i - 1] * v[i - 1];
            }
            if i + 1 < m {
                tv += off[i] * v[i + 1];
            }
            assert!((tv - lambda * v[i]).abs() < 1e-8, "row {i}");
        }
    }
}
