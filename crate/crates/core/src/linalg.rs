#![allow(clippy::needless_range_loop)]

//! Small dense linear algebra: cyclic Jacobi eigenvalues and least squares.

/// Eigenvalues of a symmetric matrix (row-major, n×n), ascending.
pub fn symmetric_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            diag += m[i][i] * m[i][i];
            for j in (i + 1)..n {
                off += m[i][j] * m[i][j];
            }
        }
        if off <= 1e-32 * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Least-squares solution of `X β ≈ y` by Householder QR. `x` is row-major
/// with one row per observation. Returns `None` when the design is rank deficient.
pub fn least_squares(x: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let m = x.len();
    if m == 0 {
        return None;
    }
    let n = x[0].len();
    if m < n {
        return None;
    }
    // column scaling keeps wildly different regressors (n ln n vs 1/n) comparable
    let scale: Vec<f64> = (0..n)
        .map(|j| x.iter().map(|r| r[j] * r[j]).sum::<f64>().sqrt().max(f64::MIN_POSITIVE))
        .collect();
    let mut a: Vec<Vec<f64>> = x.iter().map(|r| r.iter().zip(&scale).map(|(v, s)| v / s).collect()).collect();
    let mut b = y.to_vec();
    for k in 0..n {
        let norm = (k..m).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if norm < 1e-13 {
            return None;
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z * z).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..n {
            let dot: f64 = (k..m).map(|i| v[i - k] * a[i][j]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                a[i][j] -= f * v[i - k];
            }
        }
        let dot: f64 = (k..m).map(|i| v[i - k] * b[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in k..m {
            b[i] -= f * v[i - k];
        }
    }
    let mut beta = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in (k + 1)..n {
            s -= a[k][j] * beta[j];
        }
        beta[k] = s / a[k][k];
    }
    Some(beta.iter().zip(&scale).map(|(v, s)| v / s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hilbert_three() {
        let h: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| 1.0 / (i + j + 1) as f64).collect()).collect();
        let ev = symmetric_eigenvalues(&h);
        assert!((ev[0] - 2.687_340_355_773_529e-3).abs() < 1e-15);
        assert!((ev[2] - 1.408_318_927_123_654_6).abs() < 1e-13);
    }

    #[test]
    fn two_by_two_indefinite() {
        let ev = symmetric_eigenvalues(&[vec![1.0, 1.0], vec![1.0, 0.1]]);
        assert!(ev[0] < 0.0);
        assert!((ev[0] * ev[1] - (0.1 - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn line_fit() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| 3.0 - 0.5 * i as f64).collect();
        let b = least_squares(&x, &y).unwrap();
        assert!((b[0] - 3.0).abs() < 1e-12 && (b[1] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient() {
        let x: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        assert!(least_squares(&x, &[0.0; 5]).is_none());
    }
}
