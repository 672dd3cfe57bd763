//! Exact proximity operator of 1-D total variation, computed with Condat's
//! direct (taut-string type) algorithm in O(n) typical time.

/// `argmin_x ½‖x − v‖² + t·Σ|x_{i+1} − x_i|`.
pub fn tv1d_prox(v: &[f64], t: f64) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    if t <= 0.0 {
        out.copy_from_slice(v);
        return out;
    }
    let lambda = t;
    let (mut k, mut k0, mut kplus, mut kminus) = (0usize, 0usize, 0usize, 0usize);
    let (mut umin, mut umax) = (lambda, -lambda);
    let (mut vmin, mut vmax) = (v[0] - lambda, v[0] + lambda);
    let twolambda = 2.0 * lambda;
    loop {
        while k == n - 1 {
            if umin < 0.0 {
                loop {
                    out[k0] = vmin;
                    k0 += 1;
                    if k0 > kminus {
                        break;
                    }
                }
                k = k0;
                kminus = k0;
                vmin = v[k0];
                umin = lambda;
                umax = vmin + umin - vmax;
            } else if umax > 0.0 {
                loop {
                    out[k0] = vmax;
                    k0 += 1;
                    if k0 > kplus {
                        break;
                    }
                }
                k = k0;
                kplus = k0;
                vmax = v[k0];
                umax = -lambda;
                umin = vmax + umax - vmin;
            } else {
                vmin += umin / (k - k0 + 1) as f64;
                while k0 <= k {
                    out[k0] = vmin;
                    k0 += 1;
                }
                return out;
            }
        }
        umin += v[k + 1] - vmin;
        if umin < -lambda {
            loop {
                out[k0] = vmin;
                k0 += 1;
                if k0 > kminus {
                    break;
                }
            }
            k = k0;
            kminus = k0;
            kplus = k0;
            vmin = v[k0];
            vmax = vmin + twolambda;
            umin = lambda;
            umax = -lambda;
            continue;
        }
        umax += v[k + 1] - vmax;
        if umax > lambda {
            loop {
                out[k0] = vmax;
                k0 += 1;
                if k0 > kplus {
                    break;
                }
            }
            k = k0;
            kminus = k0;
            kplus = k0;
            vmax = v[k0];
            vmin = vmax - twolambda;
            umin = lambda;
            umax = -lambda;
            continue;
        }
        k += 1;
        if umin >= lambda {
            kminus = k;
            vmin += (umin - lambda) / (kminus - k0 + 1) as f64;
            umin = lambda;
        }
        if umax <= -lambda {
            kplus = k;
            vmax += (umax + lambda) / (kplus - k0 + 1) as f64;
            umax = -lambda;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tv_obj(x: &[f64], v: &[f64], t: f64) -> f64 {
        let fid: f64 = x.iter().zip(v).map(|(a, b)| 0.5 * (a - b).powi(2)).sum();
        fid + t * x.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>()
    }

    // Projected gradient on the dual: x = v − Dᵀz, |z_i| ≤ t.
    fn dual_oracle(v: &[f64], t: f64, iters: usize) -> Vec<f64> {
        let n = v.len();
        let mut z = vec![0.0; n.saturating_sub(1)];
        let primal = |z: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let left = if i > 0 { z[i - 1] } else { 0.0 };
                    let right = if i + 1 < n { z[i] } else { 0.0 };
                    // (Dᵀz)_i = z_{i−1} − z_i
                    v[i] - (left - right)
                })
                .collect()
        };
        for _ in 0..iters {
            let x = primal(&z);
            for i in 0..z.len() {
                z[i] = (z[i] + 0.25 * (x[i + 1] - x[i])).clamp(-t, t);
            }
        }
        primal(&z)
    }

    #[test]
    fn two_point_brute_force() {
        let v = [4.0, 0.0];
        let x = tv1d_prox(&v, 1.0);
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=400 {
            for j in 0..=400 {
                let (a, b) = (i as f64 * 0.01, j as f64 * 0.01);
                let f = tv_obj(&[a, b], &v, 1.0);
                if f < best.0 {
                    best = (f, a, b);
                }
            }
        }
        assert!((best.1 - 3.0).abs() < 1e-9 && (best.2 - 1.0).abs() < 1e-9);
        assert!((x[0] - 3.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn large_t_gives_mean() {
        let v = [3.0, -1.0, 4.0, 1.0, -5.0, 9.0];
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        for x in tv1d_prox(&v, 100.0) {
            assert!((x - mean).abs() < 1e-12, "{x} vs {mean}");
        }
    }

    #[test]
    fn edge_cases() {
        assert!(tv1d_prox(&[], 1.0).is_empty());
        assert_eq!(tv1d_prox(&[2.5], 3.0), vec![2.5]);
        assert_eq!(tv1d_prox(&[1.0, 2.0], 0.0), vec![1.0, 2.0]);
        let c = tv1d_prox(&[1.0; 5], 0.7);
        assert!(c.iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn matches_dual_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for trial in 0..40 {
            let n = rng.random_range(2..12);
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let t = rng.random_range(0.01..2.0);
            let x = tv1d_prox(&v, t);
            let o = dual_oracle(&v, t, 200_000);
            let (fx, fo) = (tv_obj(&x, &v, t), tv_obj(&o, &v, t));
            assert!(fx <= fo + 1e-10, "trial {trial}: {fx} vs {fo}");
            for (a, b) in x.iter().zip(&o) {
                assert!((a - b).abs() < 1e-6, "trial {trial}: {x:?} vs {o:?}");
            }
        }
    }
}
