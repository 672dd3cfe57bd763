//! Inverse heat equation on `[0, 1]` as a first-kind Volterra equation.
//!
//! The kernel is `k(t) = t^{-3/2} / (2κ√π) · exp(-1/(4κ²t))` with `κ = 1`,
//! discretized by the midpoint rule, giving a lower-triangular Toeplitz
//! matrix `A[i][j] = h·k((i - j + 1/2)·h)` for `j ≤ i`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::{matrix_problem, SpectralProblem};
use crate::error::{Error, Result};

/// Exact solutions available for the heat operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeatSolution {
    /// Smooth rise, bump and exponential decay on the first half, zero after.
    #[default]
    Sawtooth,
    /// Piecewise constant steps, for total-variation experiments.
    Blocks,
}

pub fn heat_matrix(n: usize) -> DMatrix<f64> {
    let h = 1.0 / n as f64;
    let kappa = 1.0;
    let c = h / (2.0 * kappa * PI.sqrt());
    let d = 1.0 / (4.0 * kappa * kappa);
    let kernel: Vec<f64> = (0..n)
        .map(|m| {
            let t = (m as f64 + 0.5) * h;
            c * t.powf(-1.5) * (-d / t).exp()
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| if j <= i { kernel[i - j] } else { 0.0 })
}

pub fn heat_exact_solution(n: usize, kind: HeatSolution) -> DVector<f64> {
    match kind {
        HeatSolution::Sawtooth => DVector::from_fn(n, |i, _| {
            if i >= n / 2 {
                return 0.0;
            }
            let ti = (i + 1) as f64 * 20.0 / n as f64;
            if ti < 2.0 {
                0.75 * ti * ti / 4.0
            } else if ti < 3.0 {
                0.75 + (ti - 2.0) * (3.0 - ti)
            } else {
                0.75 * (-(ti - 3.0) * 2.0).exp()
            }
        }),
        HeatSolution::Blocks => DVector::from_fn(n, |i, _| {
            let t = (i as f64 + 0.5) / n as f64;
            if t < 0.15 {
                0.0
            } else if t < 0.35 {
                1.0
            } else if t < 0.5 {
                0.4
            } else if t < 0.65 {
                0.8
            } else {
                0.0
            }
        }),
    }
}

pub fn make_heat_problem(n: usize, kind: HeatSolution) -> Result<SpectralProblem> {
    if n < 8 {
        return Err(Error::param(format!("heat problem needs n >= 8 (got {n})")));
    }
    let label = match kind {
        HeatSolution::Sawtooth => format!("heat:n={n}"),
        HeatSolution::Blocks => format!("heat:n={n},solution=blocks"),
    };
    matrix_problem(label, &heat_matrix(n), &heat_exact_solution(n, kind))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_triangular_toeplitz() {
        let a = heat_matrix(10);
        for i in 0..10 {
            for j in 0..10 {
                if j > i {
                    assert_eq!(a[(i, j)], 0.0);
                } else {
                    assert_eq!(a[(i, j)], a[(i - j, 0)]);
                }
            }
        }
    }

    #[test]
    fn normalized_and_decaying() {
        for n in [8, 16, 32] {
            let p = make_heat_problem(n, HeatSolution::Sawtooth).unwrap();
            assert!((p.sigma_max() - 1.0).abs() < 1e-15);
            let s = p.singular_values();
            assert!(s.windows(2).all(|w| w[1] < w[0]));
            let b = p.basis().unwrap();
            assert!((b.xdag.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn severe_decay_n8() {
        let p = make_heat_problem(8, HeatSolution::Sawtooth).unwrap();
        let s = p.singular_values();
        assert_eq!(s.len(), 8);
        assert!(s[7] / s[0] < 1e-3, "sigma_8/sigma_1 = {}", s[7] / s[0]);
    }

    #[test]
    fn reconstruction_n16() {
        let p = make_heat_problem(16, HeatSolution::Sawtooth).unwrap();
        let a = heat_matrix(16);
        let scale = crate::spectral::compute_svd(&a).unwrap().sigma[0];
        let err = (p.dense_operator() - a / scale).abs().max();
        assert!(err <= 1e-8, "reconstruction error {err}");
    }

    #[test]
    fn too_small_rejected() {
        assert!(make_heat_problem(7, HeatSolution::Sawtooth).is_err());
    }
}
