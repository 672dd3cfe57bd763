//! Ill-posed test problems in singular-value form.
//!
//! A problem stores the singular system `(σ_i, u_i, v_i)` of the forward
//! operator together with the coefficients `⟨x†, u_i⟩` of the exact solution
//! and `⟨y, v_i⟩ = σ_i ⟨x†, u_i⟩` of the exact data. Diagonal problems carry
//! an implicit identity basis; problems built from a dense matrix keep the
//! factors so that solutions can be mapped back to the original domain.

mod heat;
mod io;
mod radon;
mod svd;

pub use heat::{heat_exact_solution, heat_matrix, make_heat_problem, HeatSolution};
pub use io::{read_problem, write_problem};
pub use radon::{make_radon_problem, radon_matrix, radon_phantom};
pub use svd::{compute_svd, Svd, RANK_THRESHOLD};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Decay exponents of a diagonal test problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessSpec {
    /// `σ_i = i^{-s}`
    pub s: f64,
    /// `|⟨x†, u_i⟩| = i^{-p}`
    pub p: f64,
    /// Nominal Hölder index the exponents were derived from.
    pub mu: f64,
}

impl SmoothnessSpec {
    pub fn new(s: f64, p: f64, mu: f64) -> Result<Self> {
        if !(s > 0.0) || !(p > 0.5) || !(mu > 0.0) {
            return Err(Error::param(format!(
                "smoothness needs s > 0, p > 1/2, mu > 0 (got s={s}, p={p}, mu={mu})"
            )));
        }
        Ok(Self { s, p, mu })
    }

    pub fn from_mu(s: f64, mu: f64, margin: f64) -> Result<Self> {
        if !(margin > 0.0) {
            return Err(Error::param("margin must be positive"));
        }
        Self::new(s, mu_to_p(s, mu, margin), mu)
    }
}

/// Solution decay exponent realizing a Hölder source condition of index `mu`
/// for `σ_i = i^{-s}`: `Σ i^{-2p} i^{4sμ}` converges iff `p > 2sμ + 1/2`.
pub fn mu_to_p(s: f64, mu: f64, margin: f64) -> f64 {
    2.0 * s * mu + 0.5 + margin
}

/// Orthonormal factors of a matrix problem, `A = V diag(σ) Uᵀ`.
#[derive(Debug, Clone)]
pub struct DenseBasis {
    /// Right singular vectors `u_i` (domain, columns).
    pub u: DMatrix<f64>,
    /// Left singular vectors `v_i` (data space, columns).
    pub v: DMatrix<f64>,
    /// Exact solution in the original domain coordinates.
    pub xdag: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct SpectralProblem {
    label: String,
    singular_values: Vec<f64>,
    lambdas: Vec<f64>,
    xdag_coeffs: Vec<f64>,
    ydata_coeffs: Vec<f64>,
    out_of_range_norm: f64,
    xdag_null_norm: f64,
    basis: Option<DenseBasis>,
}

impl SpectralProblem {
    /// Builds a problem with an implicit identity basis. Data coefficients are
    /// computed as `σ_i · x̂†_i`.
    pub fn from_coefficients(
        label: impl Into<String>,
        singular_values: Vec<f64>,
        xdag_coeffs: Vec<f64>,
        out_of_range_norm: f64,
    ) -> Result<Self> {
        let ydata = singular_values
            .iter()
            .zip(&xdag_coeffs)
            .map(|(s, x)| s * x)
            .collect();
        Self::from_parts(label, singular_values, xdag_coeffs, ydata, out_of_range_norm, 0.0, None)
    }

    pub(crate) fn from_parts(
        label: impl Into<String>,
        singular_values: Vec<f64>,
        xdag_coeffs: Vec<f64>,
        ydata_coeffs: Vec<f64>,
        out_of_range_norm: f64,
        xdag_null_norm: f64,
        basis: Option<DenseBasis>,
    ) -> Result<Self> {
        let n = singular_values.len();
        if n == 0 {
            return Err(Error::param("problem needs at least one singular value"));
        }
        if xdag_coeffs.len() != n || ydata_coeffs.len() != n {
            return Err(Error::param("coefficient vectors differ in length"));
        }
        if singular_values.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::param("singular values must be positive and finite"));
        }
        if singular_values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::param("singular values must be nonincreasing"));
        }
        if !(out_of_range_norm >= 0.0) || !(xdag_null_norm >= 0.0) {
            return Err(Error::param("norms must be nonnegative"));
        }
        if let Some(b) = &basis {
            if b.u.ncols() != n || b.v.ncols() != n || b.xdag.len() != b.u.nrows() {
                return Err(Error::param("basis dimensions do not match the spectrum"));
            }
        }
        let lambdas = singular_values.iter().map(|s| s * s).collect();
        Ok(Self {
            label: label.into(),
            singular_values,
            lambdas,
            xdag_coeffs,
            ydata_coeffs,
            out_of_range_norm,
            xdag_null_norm,
            basis,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.singular_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.singular_values.is_empty()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// `λ_i = σ_i²`
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn xdag_coeffs(&self) -> &[f64] {
        &self.xdag_coeffs
    }

    pub fn ydata_coeffs(&self) -> &[f64] {
        &self.ydata_coeffs
    }

    pub fn out_of_range_norm(&self) -> f64 {
        self.out_of_range_norm
    }

    /// Norm of the part of the exact solution that lies outside the retained
    /// right singular subspace (zero unless the operator was rank deficient).
    pub fn xdag_null_norm(&self) -> f64 {
        self.xdag_null_norm
    }

    pub fn basis(&self) -> Option<&DenseBasis> {
        self.basis.as_ref()
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values[0]
    }

    pub fn sigma_min(&self) -> f64 {
        self.singular_values[self.len() - 1]
    }

    /// Dimension of the domain the operator acts on.
    pub fn domain_dim(&self) -> usize {
        self.basis.as_ref().map_or(self.len(), |b| b.u.nrows())
    }

    /// Dimension of the data space.
    pub fn range_dim(&self) -> usize {
        self.basis.as_ref().map_or(self.len(), |b| b.v.nrows())
    }

    /// Exact solution in domain coordinates.
    pub fn xdag_domain(&self) -> Vec<f64> {
        match &self.basis {
            Some(b) => b.xdag.iter().copied().collect(),
            None => self.xdag_coeffs.clone(),
        }
    }

    /// Maps spectral coefficients to domain coordinates, `Σ c_i u_i`.
    pub fn to_domain(&self, coeffs: &[f64]) -> Vec<f64> {
        match &self.basis {
            Some(b) => (&b.u * DVector::from_column_slice(coeffs)).iter().copied().collect(),
            None => coeffs.to_vec(),
        }
    }

    /// Maps spectral data coefficients to data-space coordinates, `Σ c_i v_i`.
    pub fn to_range(&self, coeffs: &[f64]) -> Vec<f64> {
        match &self.basis {
            Some(b) => (&b.v * DVector::from_column_slice(coeffs)).iter().copied().collect(),
            None => coeffs.to_vec(),
        }
    }

    /// `A x` for `x` in domain coordinates.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match &self.basis {
            Some(b) => {
                let mut c = b.u.tr_mul(&DVector::from_column_slice(x));
                for (ci, s) in c.iter_mut().zip(&self.singular_values) {
                    *ci *= s;
                }
                (&b.v * c).iter().copied().collect()
            }
            None => x.iter().zip(&self.singular_values).map(|(x, s)| x * s).collect(),
        }
    }

    /// `Aᵀ y` for `y` in data-space coordinates.
    pub fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        match &self.basis {
            Some(b) => {
                let mut c = b.v.tr_mul(&DVector::from_column_slice(y));
                for (ci, s) in c.iter_mut().zip(&self.singular_values) {
                    *ci *= s;
                }
                (&b.u * c).iter().copied().collect()
            }
            None => y.iter().zip(&self.singular_values).map(|(y, s)| y * s).collect(),
        }
    }

    /// Reconstructs `V diag(σ) Uᵀ`, or `diag(σ)` for diagonal problems.
    pub fn dense_operator(&self) -> DMatrix<f64> {
        match &self.basis {
            Some(b) => {
                let mut vs = b.v.clone();
                for (j, s) in self.singular_values.iter().enumerate() {
                    vs.column_mut(j).scale_mut(*s);
                }
                vs * b.u.transpose()
            }
            None => DMatrix::from_diagonal(&DVector::from_column_slice(&self.singular_values)),
        }
    }
}

/// `σ_i = i^{-s}`, `x̂†_i = (−1)^i i^{-p}` (or `i^{-p}`), `ŷ_i = σ_i x̂†_i`.
pub fn make_diagonal_problem(n: usize, s: f64, p: f64, alternate_signs: bool) -> Result<SpectralProblem> {
    if n == 0 {
        return Err(Error::param("diagonal problem needs n >= 1"));
    }
    if !(s > 0.0) || !(p > 0.5) {
        return Err(Error::param(format!("need s > 0 and p > 1/2 (got s={s}, p={p})")));
    }
    let mut sigma = Vec::with_capacity(n);
    let mut xdag = Vec::with_capacity(n);
    for i in 1..=n {
        let fi = i as f64;
        sigma.push(fi.powf(-s));
        let mag = fi.powf(-p);
        xdag.push(if alternate_signs && i % 2 == 1 { -mag } else { mag });
    }
    SpectralProblem::from_coefficients(format!("diag:s={s},p={p},n={n}"), sigma, xdag, 0.0)
}

/// Builds a problem from an explicit matrix and exact solution. The operator
/// is scaled to `‖A‖ = 1` and the solution to `‖x†‖ = 1`.
pub fn matrix_problem(label: impl Into<String>, a: &DMatrix<f64>, x_exact: &DVector<f64>) -> Result<SpectralProblem> {
    if a.ncols() != x_exact.len() {
        return Err(Error::param("solution length does not match matrix columns"));
    }
    let xnorm = x_exact.norm();
    if !(xnorm > 0.0) {
        return Err(Error::param("exact solution must be nonzero"));
    }
    let svd = compute_svd(a)?;
    let scale = svd.sigma[0];
    let sigma: Vec<f64> = svd.sigma.iter().map(|s| s / scale).collect();
    let xdag = x_exact / xnorm;
    let coeffs = svd.u.tr_mul(&xdag);
    let null_part = &xdag - &svd.u * &coeffs;
    let xdag_coeffs: Vec<f64> = coeffs.iter().copied().collect();
    let ydata = sigma.iter().zip(&xdag_coeffs).map(|(s, x)| s * x).collect();
    SpectralProblem::from_parts(
        label,
        sigma,
        xdag_coeffs,
        ydata,
        0.0,
        null_part.norm(),
        Some(DenseBasis { u: svd.u, v: svd.v, xdag }),
    )
}
