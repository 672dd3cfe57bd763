//! Tikhonov regularization path in spectral coordinates.
//!
//! With noisy data coefficients `d_i = ŷ_i + ê_i` and filter `σ_i/(λ_i + α)`:
//!
//! ```text
//! η  = Σ λ/(λ+α)² d²          ρ  = Σ α²/(λ+α)² d² + ‖P⊥ y_δ‖²
//! η′ = −2 Σ λ/(λ+α)³ d²       ρ′ = 2 Σ αλ/(λ+α)³ d²
//! ζ  = ρ/(αη)
//! ```
//!
//! All sums run in ascending index order so results are reproducible.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::noise::NoisySpectrum;
use crate::spectral::SpectralProblem;

pub const DEFAULT_GRID_COUNT: usize = 200;
/// Floor of the default grid relative to `σ_1²`.
pub const DEFAULT_GRID_FLOOR: f64 = 1e-9;

/// Geometric grid `α_k = α_max q^k`, strictly decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaGrid {
    alpha_min: f64,
    alpha_max: f64,
    values: Vec<f64>,
}

impl AlphaGrid {
    pub fn new(alpha_min: f64, alpha_max: f64, count: usize) -> Result<Self> {
        if !(alpha_min > 0.0 && alpha_min < alpha_max && alpha_max.is_finite()) {
            return Err(Error::param(format!(
                "grid needs 0 < alpha_min < alpha_max (got {alpha_min}, {alpha_max})"
            )));
        }
        if count < 3 {
            return Err(Error::param(format!("grid needs at least 3 points (got {count})")));
        }
        let q = (alpha_min / alpha_max).powf(1.0 / (count - 1) as f64);
        let mut values: Vec<f64> = (0..count).map(|k| alpha_max * q.powi(k as i32)).collect();
        values[count - 1] = alpha_min;
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::param("grid too dense to be strictly decreasing"));
        }
        Ok(Self { alpha_min, alpha_max, values })
    }

    /// `[max(σ_min², 10⁻⁹σ_1²), σ_1²]` with 200 points.
    pub fn for_problem(problem: &SpectralProblem) -> Self {
        Self::for_problem_with(problem, DEFAULT_GRID_COUNT)
    }

    pub fn for_problem_with(problem: &SpectralProblem, count: usize) -> Self {
        let amax = problem.sigma_max().powi(2);
        let mut amin = problem.sigma_min().powi(2).max(DEFAULT_GRID_FLOOR * amax);
        if amin >= amax * (1.0 - 1e-9) {
            amin = DEFAULT_GRID_FLOOR * amax;
        }
        Self::new(amin, amax, count.max(3)).expect("default grid is valid")
    }

    pub fn alpha_min(&self) -> f64 {
        self.alpha_min
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    /// Common ratio `q < 1` of consecutive grid values.
    pub fn ratio(&self) -> f64 {
        self.values[1] / self.values[0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Tikhonov solution and (negative) residual coefficients at one α.
#[derive(Debug, Clone, PartialEq)]
pub struct TikhonovCoeffs {
    pub x: Vec<f64>,
    pub residual: Vec<f64>,
}

pub fn tikhonov_coeffs(data: &NoisySpectrum, alpha: f64) -> Result<TikhonovCoeffs> {
    if !(alpha > 0.0) {
        return Err(Error::param(format!("alpha must be positive (got {alpha})")));
    }
    let p = data.problem();
    let (x, residual) = p
        .singular_values()
        .iter()
        .zip(p.lambdas())
        .zip(data.data_coeffs())
        .map(|((s, l), d)| (s / (l + alpha) * d, alpha / (l + alpha) * d))
        .unzip();
    Ok(TikhonovCoeffs { x, residual })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathCurve {
    pub alpha: Vec<f64>,
    pub eta: Vec<f64>,
    pub rho: Vec<f64>,
    pub eta_prime: Vec<f64>,
    pub rho_prime: Vec<f64>,
    pub zeta: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub alpha: f64,
    pub eta: f64,
    pub rho: f64,
    pub eta_prime: f64,
    pub rho_prime: f64,
    pub zeta: f64,
}

pub fn path_point(data: &NoisySpectrum, alpha: f64) -> PathPoint {
    let p = data.problem();
    let (mut eta, mut rho, mut deta, mut drho) = (0.0, 0.0, 0.0, 0.0);
    for (l, d) in p.lambdas().iter().zip(data.data_coeffs()) {
        let d2 = d * d;
        let den = l + alpha;
        let den2 = den * den;
        let den3 = den2 * den;
        eta += l / den2 * d2;
        rho += alpha * alpha / den2 * d2;
        deta -= 2.0 * l / den3 * d2;
        drho += 2.0 * alpha * l / den3 * d2;
    }
    rho += p.out_of_range_norm().powi(2);
    PathPoint { alpha, eta, rho, eta_prime: deta, rho_prime: drho, zeta: rho / (alpha * eta) }
}

pub fn path_quantities(data: &NoisySpectrum, grid: &AlphaGrid) -> PathCurve {
    let pts: Vec<PathPoint> = grid.values().iter().map(|&a| path_point(data, a)).collect();
    PathCurve {
        alpha: pts.iter().map(|q| q.alpha).collect(),
        eta: pts.iter().map(|q| q.eta).collect(),
        rho: pts.iter().map(|q| q.rho).collect(),
        eta_prime: pts.iter().map(|q| q.eta_prime).collect(),
        rho_prime: pts.iter().map(|q| q.rho_prime).collect(),
        zeta: pts.iter().map(|q| q.zeta).collect(),
    }
}

impl PathCurve {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn point(&self, k: usize) -> PathPoint {
        PathPoint {
            alpha: self.alpha[k],
            eta: self.eta[k],
            rho: self.rho[k],
            eta_prime: self.eta_prime[k],
            rho_prime: self.rho_prime[k],
            zeta: self.zeta[k],
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("alpha,eta,rho,eta_prime,rho_prime,zeta\n");
        for k in 0..self.len() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                self.alpha[k], self.eta[k], self.rho[k], self.eta_prime[k], self.rho_prime[k], self.zeta[k]
            );
        }
        s
    }
}

/// `ζ²/(ζ²+1)^{3/2}`, maximal (`2/(3√3)`) at `ζ = √2`.
pub fn curvature_c1(zeta: f64) -> f64 {
    zeta * zeta / (zeta * zeta + 1.0).powf(1.5)
}

/// `ζ(1+ζ)/(ζ²+1)^{3/2}`, maximal (`1/√2`) at `ζ = 1`.
pub fn curvature_c2(zeta: f64) -> f64 {
    zeta * (1.0 + zeta) / (zeta * zeta + 1.0).powf(1.5)
}

/// Signed curvature of the log-log L-curve at grid index `k`, in the split
/// form `η/(α|η′|)·c₁(ζ) − c₂(ζ)`.
pub fn curvature_tikhonov(path: &PathCurve, k: usize) -> Result<f64> {
    let q = path.point(k);
    if q.eta_prime == 0.0 {
        return Err(Error::Singular(format!("eta' vanishes at alpha={}", q.alpha)));
    }
    Ok(q.eta / (q.alpha * q.eta_prime.abs()) * curvature_c1(q.zeta) - curvature_c2(q.zeta))
}

/// The same curvature evaluated from `η, ρ, η′` without the `ζ` splitting.
pub fn curvature_direct(path: &PathCurve, k: usize) -> Result<f64> {
    let q = path.point(k);
    if q.eta_prime == 0.0 {
        return Err(Error::Singular(format!("eta' vanishes at alpha={}", q.alpha)));
    }
    let (a, e, r, de) = (q.alpha, q.eta, q.rho, q.eta_prime);
    let num = r * e + a * de * r + a * a * de * e;
    let den = (r * r + a * a * e * e).powf(1.5);
    Ok(e * r / de.abs() * num / den)
}

/// Signed Menger curvature of each interior point triple of a planar polyline.
/// Endpoints are `None`; collinear or coincident triples give `0`.
pub fn discrete_curvature(xs: &[f64], ys: &[f64]) -> Result<Vec<Option<f64>>> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::param("discrete curvature needs >= 3 points with matching lengths"));
    }
    let inc = xs.windows(2).all(|w| w[1] > w[0]);
    let dec = xs.windows(2).all(|w| w[1] < w[0]);
    if !(inc || dec) {
        return Err(Error::param("abscissae must be strictly monotone"));
    }
    let n = xs.len();
    let mut out = vec![None; n];
    for k in 1..n - 1 {
        let (ax, ay) = (xs[k] - xs[k - 1], ys[k] - ys[k - 1]);
        let (bx, by) = (xs[k + 1] - xs[k], ys[k + 1] - ys[k]);
        let (cx, cy) = (xs[k + 1] - xs[k - 1], ys[k + 1] - ys[k - 1]);
        let cross = ax * by - ay * bx;
        let denom = (ax.hypot(ay)) * (bx.hypot(by)) * (cx.hypot(cy));
        out[k] = Some(if denom == 0.0 || cross == 0.0 { 0.0 } else { 2.0 * cross / denom });
    }
    Ok(out)
}

/// Exact error decomposition along the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub alpha: Vec<f64>,
    /// `‖x_α^δ − x†‖`
    pub total: Vec<f64>,
    /// `‖x_α^δ − x_α‖`
    pub stability: Vec<f64>,
    /// `‖x_α − x†‖`
    pub approx: Vec<f64>,
    pub argmin: usize,
    pub min_total: f64,
}

pub fn error_curve(data: &NoisySpectrum, grid: &AlphaGrid) -> ErrorCurve {
    let p = data.problem();
    let null2 = p.xdag_null_norm().powi(2);
    let mut curve = ErrorCurve {
        alpha: grid.values().to_vec(),
        total: Vec::with_capacity(grid.len()),
        stability: Vec::with_capacity(grid.len()),
        approx: Vec::with_capacity(grid.len()),
        argmin: 0,
        min_total: f64::INFINITY,
    };
    for (k, &alpha) in grid.values().iter().enumerate() {
        let (mut tot, mut stab, mut app) = (0.0, 0.0, 0.0);
        for i in 0..p.len() {
            let (s, l) = (p.singular_values()[i], p.lambdas()[i]);
            let den = l + alpha;
            let xd = p.xdag_coeffs()[i];
            let e = data.noise_coeffs()[i];
            let diff = s / den * data.data_coeffs()[i] - xd;
            tot += diff * diff;
            stab += l / (den * den) * e * e;
            let a = alpha / den * xd;
            app += a * a;
        }
        let total = (tot + null2).sqrt();
        curve.total.push(total);
        curve.stability.push(stab.sqrt());
        curve.approx.push((app + null2).sqrt());
        if total < curve.min_total {
            curve.min_total = total;
            curve.argmin = k;
        }
    }
    curve
}

impl ErrorCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("alpha,stability,approx,total\n");
        for k in 0..self.alpha.len() {
            let _ = writeln!(s, "{},{},{},{}", self.alpha[k], self.stability[k], self.approx[k], self.total[k]);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{add_noise, NoisySpectrum};
    use crate::spectral::{make_diagonal_problem, SpectralProblem};
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn single(lambda: f64, xdag: f64, noise: f64) -> NoisySpectrum {
        let p = SpectralProblem::from_coefficients("one", vec![lambda.sqrt()], vec![xdag], 0.0).unwrap();
        NoisySpectrum::from_noise(Arc::new(p), vec![noise], 0).unwrap()
    }

    fn random_problem(seed: u64, n: usize) -> Arc<SpectralProblem> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-4.0..0.0))).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        let x = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        Arc::new(SpectralProblem::from_coefficients("rand", s, x, 0.0).unwrap())
    }

    #[test]
    fn grid_shape() {
        let g = AlphaGrid::new(1e-6, 1.0, 7).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(g.values()[0], 1.0);
        assert_eq!(g.values()[6], 1e-6);
        assert!((g.ratio() - 0.1).abs() < 1e-12);
        assert!(AlphaGrid::new(1.0, 1.0, 5).is_err());
        assert!(AlphaGrid::new(0.1, 1.0, 2).is_err());
        assert!(AlphaGrid::new(0.0, 1.0, 5).is_err());
    }

    #[test]
    fn default_grid_floor() {
        let p = make_diagonal_problem(1000, 2.0, 1.6, true).unwrap();
        let g = AlphaGrid::for_problem(&p);
        assert_eq!(g.alpha_max(), 1.0);
        assert_eq!(g.alpha_min(), 1e-9);
        assert_eq!(g.len(), 200);
        let p = make_diagonal_problem(10, 1.0, 1.6, true).unwrap();
        assert!((AlphaGrid::for_problem(&p).alpha_min() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn one_component_tikhonov() {
        let d = single(1.0, 1.0, 0.0);
        let t = tikhonov_coeffs(&d, 1.0).unwrap();
        assert_eq!(t.x, vec![0.5]);
        assert_eq!(t.residual, vec![0.5]);
        let t = tikhonov_coeffs(&d, 1e-14).unwrap();
        assert!((t.x[0] - 1.0).abs() < 1e-13);
        assert!(tikhonov_coeffs(&d, 0.0).is_err());
    }

    #[test]
    fn tikhonov_matches_dense_solve() {
        let p = random_problem(3, 10);
        let data = add_noise(&p, 0.05, 0.0, 11).unwrap();
        let a = DMatrix::from_diagonal(&DVector::from_column_slice(p.singular_values()));
        let y = DVector::from_column_slice(data.data_coeffs());
        for alpha in [1e-3, 0.1, 2.0] {
            let lhs = a.transpose() * &a + DMatrix::identity(10, 10) * alpha;
            let rhs = a.transpose() * &y;
            let x = lhs.lu().solve(&rhs).unwrap();
            let t = tikhonov_coeffs(&data, alpha).unwrap();
            for i in 0..10 {
                assert!((x[i] - t.x[i]).abs() <= 1e-10 * (1.0 + x[i].abs()));
            }
        }
    }

    #[test]
    fn one_component_path() {
        let d = single(1.0, 1.0, 0.0);
        let q = path_point(&d, 1.0);
        assert_eq!((q.eta, q.rho, q.eta_prime, q.rho_prime, q.zeta), (0.25, 0.25, -0.25, 0.25, 1.0));
    }

    #[test]
    fn eta_prime_finite_difference() {
        let p = random_problem(21, 40);
        let data = add_noise(&p, 0.01, 0.0, 5).unwrap();
        let grid = AlphaGrid::new(1e-7, 1.0, 50).unwrap();
        let path = path_quantities(&data, &grid);
        let h = 1e-5;
        for (k, &a) in grid.values().iter().enumerate() {
            let fd = (path_point(&data, a * (1.0 + h)).eta - path_point(&data, a * (1.0 - h)).eta) / (2.0 * a * h);
            let rel = (fd - path.eta_prime[k]).abs() / path.eta_prime[k].abs();
            assert!(rel < 1e-5, "alpha={a}: rel {rel}");
        }
    }

    #[test]
    fn curvature_single_component() {
        let d = single(1.0, 1.0, 0.0);
        let grid = AlphaGrid::new(0.5, 1.0, 3).unwrap();
        let path = path_quantities(&d, &grid);
        let g = curvature_tikhonov(&path, 0).unwrap();
        assert!((g - (1.0 - 2.0) / 2f64.powf(1.5)).abs() < 1e-15);
        assert!((curvature_direct(&path, 0).unwrap() - g).abs() < 1e-15);
    }

    #[test]
    fn c1_c2_maxima() {
        let c1max = 2.0 / (3.0 * 3f64.sqrt());
        assert!((curvature_c1(2f64.sqrt()) - c1max).abs() < 1e-15);
        assert!((curvature_c2(1.0) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        for k in 0..2000 {
            let z = 10f64.powf(-6.0 + 12.0 * k as f64 / 1999.0);
            assert!(curvature_c1(z) <= c1max + 1e-15);
            assert!(curvature_c2(z) <= 1.0 / 2f64.sqrt() + 1e-15);
        }
    }

    #[test]
    fn singular_curvature_errors() {
        let path = PathCurve {
            alpha: vec![1.0],
            eta: vec![0.0],
            rho: vec![1.0],
            eta_prime: vec![0.0],
            rho_prime: vec![0.0],
            zeta: vec![f64::INFINITY],
        };
        assert!(matches!(curvature_tikhonov(&path, 0), Err(Error::Singular(_))));
    }

    #[test]
    fn menger_curvature() {
        let line = discrete_curvature(&[0.0, 1.0, 2.0, 3.0], &[1.0, 3.0, 5.0, 7.0]).unwrap();
        assert_eq!(line, vec![None, Some(0.0), Some(0.0), None]);

        let pts = [0.3f64, 1.1, 2.0];
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().map(|t| (t.cos(), t.sin())).unzip();
        // cos is decreasing on these angles and the traversal is counter-clockwise
        let k = discrete_curvature(&xs, &ys).unwrap()[1].unwrap();
        assert!((k - 1.0).abs() < 1e-12, "{k}");

        // Circle through (±h, h²) and the origin has curvature 2/(1+h²);
        // it tends to the parabola's curvature 2 at the vertex.
        for h in [0.1, 0.01] {
            let k = discrete_curvature(&[-h, 0.0, h], &[h * h, 0.0, h * h]).unwrap()[1].unwrap();
            assert!((k - 2.0 / (1.0 + h * h)).abs() < 1e-12);
            if h == 0.01 {
                assert!((k - 2.0).abs() < 1e-3);
            }
        }
        assert!(discrete_curvature(&[0.0, 1.0], &[0.0, 1.0]).is_err());
        assert!(discrete_curvature(&[0.0, 1.0, 0.5], &[0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn error_curve_single_component() {
        let d = single(1.0, 1.0, 0.1);
        let grid = AlphaGrid::new(0.5, 1.0, 3).unwrap();
        let e = error_curve(&d, &grid);
        assert!((e.stability[0] - 0.05).abs() < 1e-15);
        assert!((e.approx[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn error_curve_zero_noise() {
        let p = make_diagonal_problem(50, 1.0, 1.2, true).unwrap();
        let d = NoisySpectrum::from_noise(Arc::new(p), vec![0.0; 50], 0).unwrap();
        let grid = AlphaGrid::new(1e-12, 1.0, 40).unwrap();
        let e = error_curve(&d, &grid);
        assert!(e.stability.iter().all(|&s| s == 0.0));
        for k in 0..40 {
            assert!((e.total[k] - e.approx[k]).abs() <= 1e-15 * (1.0 + e.approx[k]));
        }
        assert!(e.total[39] < 1e-3);
        assert_eq!(e.argmin, 39);
    }

    proptest! {
        #[test]
        fn path_invariants(seed in 0u64..500, level in 1e-4f64..0.5) {
            let p = random_problem(seed, 30);
            let data = add_noise(&p, level, 0.0, seed).unwrap();
            let grid = AlphaGrid::new(1e-9, 1.0, 60).unwrap();
            let path = path_quantities(&data, &grid);
            for k in 0..grid.len() {
                let q = path.point(k);
                prop_assert!(q.eta_prime <= 0.0);
                prop_assert!((q.rho_prime + q.alpha * q.eta_prime).abs() <= 1e-10 * q.rho_prime.abs());
                let g1 = curvature_tikhonov(&path, k).unwrap();
                let g2 = curvature_direct(&path, k).unwrap();
                prop_assert!((g1 - g2).abs() <= 1e-8 * g1.abs().max(g2.abs()).max(1e-300));
            }
            // grid runs in decreasing alpha: eta grows, rho shrinks
            for k in 1..grid.len() {
                prop_assert!(path.eta[k] >= path.eta[k - 1]);
                prop_assert!(path.rho[k] <= path.rho[k - 1]);
            }
            let e = error_curve(&data, &grid);
            for k in 0..grid.len() {
                prop_assert!(e.total[k] <= e.stability[k] + e.approx[k] + 1e-12);
            }
        }
    }
}
