//! Landweber iteration in spectral coordinates with the discrete simple-L
//! functionals `ψ_a(k) = ⟨A x_k, y_δ − A x_k⟩` and
//! `ψ_b(k) = ⟨x_k, x_{2k} − x_k⟩`.

use crate::error::{Error, Result};
use crate::noise::NoisySpectrum;
use crate::rules::{select_extremum, Sense};

/// Extremum of a functional over iteration indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSelection {
    pub k: usize,
    pub interior: bool,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct LandweberRun {
    pub stepsize: f64,
    /// `ψ_a(k)` for `k = 0..=steps`.
    pub psi_residual: Vec<f64>,
    /// `ψ_b(k)` for `k = 0..=steps/2`.
    pub psi_doubling: Vec<f64>,
    /// `‖y_δ − A x_k‖` for `k = 0..=steps`.
    pub residual_norm: Vec<f64>,
    /// `‖x_k − x†‖` for `k = 0..=steps`.
    pub error: Vec<f64>,
    pub selected_residual: Option<StepSelection>,
    pub selected_doubling: Option<StepSelection>,
    iterates: Vec<Vec<f64>>,
}

impl LandweberRun {
    /// Stored iterate `x_k` (spectral coefficients) for `k ≤ steps/2 + 1`.
    pub fn iterate(&self, k: usize) -> Option<&[f64]> {
        self.iterates.get(k).map(Vec::as_slice)
    }
}

/// `1/σ_1²`
pub fn default_stepsize(data: &NoisySpectrum) -> f64 {
    1.0 / data.problem().lambdas()[0]
}

pub fn landweber_run(data: &NoisySpectrum, steps: usize, stepsize: f64) -> Result<LandweberRun> {
    let p = data.problem();
    let limit = 2.0 / p.lambdas()[0];
    if !(stepsize > 0.0 && stepsize < limit) {
        return Err(Error::param(format!("stepsize must lie in (0, {limit}) (got {stepsize})")));
    }
    if steps < 2 {
        return Err(Error::param("Landweber needs at least 2 steps"));
    }
    let sigma = p.singular_values();
    let d = data.data_coeffs();
    let xdag = p.xdag_coeffs();
    let oor2 = p.out_of_range_norm().powi(2);
    let null2 = p.xdag_null_norm().powi(2);
    let keep = steps / 2 + 1;

    let mut x = vec![0.0; p.len()];
    let mut iterates = Vec::with_capacity(keep + 1);
    let mut psi_residual = Vec::with_capacity(steps + 1);
    let mut residual_norm = Vec::with_capacity(steps + 1);
    let mut error = Vec::with_capacity(steps + 1);
    let mut psi_doubling = vec![0.0; keep];

    for k in 0..=steps {
        let (mut psi, mut res2, mut err2) = (0.0, oor2, null2);
        for i in 0..x.len() {
            let ax = sigma[i] * x[i];
            let r = d[i] - ax;
            psi += ax * r;
            res2 += r * r;
            err2 += (x[i] - xdag[i]).powi(2);
        }
        psi_residual.push(psi);
        residual_norm.push(res2.sqrt());
        error.push(err2.sqrt());
        if k < keep + 1 {
            iterates.push(x.clone());
        }
        if k % 2 == 0 && k / 2 < keep {
            let half = &iterates[k / 2];
            psi_doubling[k / 2] = half.iter().zip(&x).map(|(h, x)| h * (x - h)).sum();
        }
        if k < steps {
            for i in 0..x.len() {
                x[i] += stepsize * sigma[i] * (d[i] - sigma[i] * x[i]);
            }
        }
    }

    let pick = |v: &[f64]| {
        let vals: Vec<Option<f64>> = v.iter().map(|&x| Some(x)).collect();
        select_extremum(&vals, Sense::Minimize).map(|(k, interior, value)| StepSelection { k, interior, value })
    };
    Ok(LandweberRun {
        stepsize,
        selected_residual: pick(&psi_residual),
        selected_doubling: pick(&psi_doubling),
        psi_residual,
        psi_doubling,
        residual_norm,
        error,
        iterates,
    })
}
