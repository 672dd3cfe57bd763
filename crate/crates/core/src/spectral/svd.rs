//! One-sided (Hestenes) Jacobi SVD.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Singular values below `RANK_THRESHOLD · σ_1` are treated as zero.
pub const RANK_THRESHOLD: f64 = 1e-13;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = V diag(σ) Uᵀ` with only the numerically nonzero part kept.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Right singular vectors, `ncols(A) × r`.
    pub u: DMatrix<f64>,
    /// Descending, strictly positive.
    pub sigma: DVector<f64>,
    /// Left singular vectors, `nrows(A) × r`.
    pub v: DMatrix<f64>,
    /// How many singular values fell below the rank threshold.
    pub dropped: usize,
}

pub fn compute_svd(a: &DMatrix<f64>) -> Result<Svd> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::param("cannot decompose an empty matrix"));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("matrix has non-finite entries"));
    }
    if n > m {
        // work on the tall transpose so that surplus columns do not linger
        let t = compute_svd(&a.transpose())?;
        return Ok(Svd { u: t.v, sigma: t.sigma, v: t.u, dropped: t.dropped + (n - m) });
    }
    let mut w = a.clone();
    let mut rot = DMatrix::<f64>::identity(n, n);

    // columns this small are numerically zero and are never rotated
    let floor = (f64::EPSILON * a.norm()).powi(2);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let (wp, wq) = (w[(i, p)], w[(i, q)]);
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if alpha <= floor || beta <= floor || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (wp, wq) = (w[(i, p)], w[(i, q)]);
                    w[(i, p)] = c * wp - s * wq;
                    w[(i, q)] = s * wp + c * wq;
                }
                for i in 0..n {
                    let (rp, rq) = (rot[(i, p)], rot[(i, q)]);
                    rot[(i, p)] = c * rp - s * rq;
                    rot[(i, q)] = s * rp + c * rq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!("Jacobi SVD did not converge in {MAX_SWEEPS} sweeps")));
    }

    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let smax = norms[order[0]];
    if !(smax > 0.0) {
        return Err(Error::Numerical("matrix is identically zero".into()));
    }
    let keep: Vec<usize> = order.into_iter().filter(|&j| norms[j] > RANK_THRESHOLD * smax).collect();
    let r = keep.len();

    let mut u = DMatrix::zeros(n, r);
    let mut v = DMatrix::zeros(m, r);
    let mut sigma = DVector::zeros(r);
    for (k, &j) in keep.iter().enumerate() {
        sigma[k] = norms[j];
        u.set_column(k, &rot.column(j));
        v.set_column(k, &(w.column(j) / norms[j]));
    }
    Ok(Svd { u, sigma, v, dropped: n - r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reconstruct(s: &Svd) -> DMatrix<f64> {
        let mut vs = s.v.clone();
        for j in 0..s.sigma.len() {
            vs.column_mut(j).scale_mut(s.sigma[j]);
        }
        vs * s.u.transpose()
    }

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
    }

    // Cyclic Jacobi eigensolver for symmetric matrices; independent of the SVD path.
    fn jacobi_eigenvalues(mut a: DMatrix<f64>) -> Vec<f64> {
        let n = a.nrows();
        for _ in 0..100 {
            let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[(i, j)].powi(2)).sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if a[(p, q)].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[(k, p)], a[(k, q)]);
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    #[test]
    fn identity_and_diagonal() {
        let s = compute_svd(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(s.sigma.as_slice(), &[1.0, 1.0, 1.0]);

        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let s = compute_svd(&d).unwrap();
        assert_eq!(s.sigma.as_slice(), &[3.0, 2.0, 1.0]);
        for k in 0..3 {
            assert_eq!(s.u[(k, k)].abs(), 1.0);
            assert_eq!(s.v[(k, k)].abs(), 1.0);
        }
    }

    #[test]
    fn random_square_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DMatrix::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0));
        let s = compute_svd(&a).unwrap();
        let s1 = s.sigma[0];
        assert!(max_abs(&(reconstruct(&s) - &a)) <= 1e-10 * s1);
        assert!(max_abs(&(s.u.transpose() * &s.u - DMatrix::identity(5, 5))) <= 1e-12);
        assert!(max_abs(&(s.v.transpose() * &s.v - DMatrix::identity(5, 5))) <= 1e-12);
        assert!(s.sigma.as_slice().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rank_deficient_drops_zero_values() {
        // rank 2: third column = first + second
        let a = DMatrix::from_row_slice(4, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0, -1.0, 1.0]);
        let s = compute_svd(&a).unwrap();
        assert_eq!(s.sigma.len(), 2);
        assert_eq!(s.dropped, 1);
        assert!(max_abs(&(reconstruct(&s) - &a)) <= 1e-12);
    }

    #[test]
    fn wide_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = DMatrix::from_fn(3, 6, |_, _| rng.random_range(-1.0..1.0));
        let s = compute_svd(&a).unwrap();
        assert_eq!(s.sigma.len(), 3);
        assert!(max_abs(&(reconstruct(&s) - &a)) <= 1e-12);
    }

    #[test]
    fn matches_eigenvalues_of_gram_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for &(m, n) in &[(4, 4), (10, 7), (32, 32), (20, 32)] {
            let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
            let s = compute_svd(&a).unwrap();
            let ev = jacobi_eigenvalues(a.transpose() * &a);
            for (k, sv) in s.sigma.iter().enumerate() {
                let expected = ev[k].max(0.0).sqrt();
                assert!((sv - expected).abs() <= 1e-8 * expected, "{m}x{n} k={k}: {sv} vs {expected}");
            }
        }
    }

    #[test]
    fn rejects_non_finite() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, f64::NAN]);
        assert!(compute_svd(&a).is_err());
    }
}
