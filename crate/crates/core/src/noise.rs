//! Seeded noise with prescribed relative level, and empirical measurement of
//! the Muckenhoupt-type noise conditions and the solution regularity
//! conditions on a grid of α values.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::path::AlphaGrid;
use crate::spectral::SpectralProblem;

/// Noise coefficients `ê_i = ⟨e, v_i⟩` attached to a problem.
#[derive(Debug, Clone)]
pub struct NoisySpectrum {
    problem: Arc<SpectralProblem>,
    noise_coeffs: Vec<f64>,
    data_coeffs: Vec<f64>,
    rel_level: f64,
    abs_delta: f64,
    seed: u64,
    raw_scale: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Draws `ẽ_i ~ N(0, 1)`, forms `i^{-q} ẽ_i` and rescales so that
/// `‖ê‖ / ‖ŷ‖ = rel_level`.
pub fn add_noise(problem: &Arc<SpectralProblem>, rel_level: f64, decay_q: f64, seed: u64) -> Result<NoisySpectrum> {
    if !(rel_level > 0.0 && rel_level.is_finite()) {
        return Err(Error::param(format!("relative noise level must be positive (got {rel_level})")));
    }
    if !decay_q.is_finite() {
        return Err(Error::param("noise decay exponent must be finite"));
    }
    let ynorm = norm(problem.ydata_coeffs());
    if !(ynorm > 0.0) {
        return Err(Error::param("exact data vanish; relative noise level undefined"));
    }
    let mut used = seed;
    let raw = loop {
        let mut rng = ChaCha8Rng::seed_from_u64(used);
        let raw: Vec<f64> = (1..=problem.len())
            .map(|i| {
                let z: f64 = StandardNormal.sample(&mut rng);
                (i as f64).powf(-decay_q) * z
            })
            .collect();
        if norm(&raw) > 0.0 {
            break raw;
        }
        used = used.wrapping_add(1);
    };
    let raw_scale = rel_level * ynorm / norm(&raw);
    let noise: Vec<f64> = raw.iter().map(|r| r * raw_scale).collect();
    let mut out = NoisySpectrum::from_noise(Arc::clone(problem), noise, used)?;
    out.raw_scale = raw_scale;
    Ok(out)
}

impl NoisySpectrum {
    /// Wraps explicitly given noise coefficients.
    pub fn from_noise(problem: Arc<SpectralProblem>, noise_coeffs: Vec<f64>, seed: u64) -> Result<Self> {
        if noise_coeffs.len() != problem.len() {
            return Err(Error::param("noise length does not match the problem"));
        }
        let abs_delta = norm(&noise_coeffs);
        let ynorm = norm(problem.ydata_coeffs());
        let rel_level = if ynorm > 0.0 { abs_delta / ynorm } else { f64::INFINITY };
        let data_coeffs = problem.ydata_coeffs().iter().zip(&noise_coeffs).map(|(y, e)| y + e).collect();
        Ok(Self { problem, noise_coeffs, data_coeffs, rel_level, abs_delta, seed, raw_scale: 1.0 })
    }

    pub fn problem(&self) -> &SpectralProblem {
        &self.problem
    }

    pub fn problem_arc(&self) -> &Arc<SpectralProblem> {
        &self.problem
    }

    pub fn noise_coeffs(&self) -> &[f64] {
        &self.noise_coeffs
    }

    /// `ŷ_i + ê_i`
    pub fn data_coeffs(&self) -> &[f64] {
        &self.data_coeffs
    }

    pub fn rel_level(&self) -> f64 {
        self.rel_level
    }

    /// `δ = ‖e‖`
    pub fn abs_delta(&self) -> f64 {
        self.abs_delta
    }

    /// Seed that produced the draw (the requested one unless it was all zero).
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Factor applied to the decayed standard normal draw.
    pub fn raw_scale(&self) -> f64 {
        self.raw_scale
    }

    /// Noisy data `y_δ` in data-space coordinates.
    pub fn y_delta(&self) -> Vec<f64> {
        self.problem.to_range(&self.data_coeffs)
    }

    /// Same noise direction, data scaled by `c` (both exact data and noise).
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let p = &self.problem;
        let xs: Vec<f64> = p.xdag_coeffs().iter().map(|x| x * c).collect();
        let ys: Vec<f64> = p.ydata_coeffs().iter().map(|y| y * c).collect();
        let scaled = SpectralProblem::from_parts(
            p.label(),
            p.singular_values().to_vec(),
            xs,
            ys,
            p.out_of_range_norm() * c,
            p.xdag_null_norm() * c,
            None,
        )?;
        Self::from_noise(Arc::new(scaled), self.noise_coeffs.iter().map(|e| e * c).collect(), self.seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConditionVariant {
    /// `Σ_{λ≥α} (α/λ) ê² ≤ C₁ Σ_{λ≤α} ê²`
    Mc1,
    /// `Σ_{λ≥α} (α/λ) ê² ≤ C₂ Σ_{λ≤α} (λ/α) ê²`
    Mc2,
    /// `Σ_{λ≤α} x̂² ≤ D Σ_{λ≥α} (α/λ) x̂²`
    Reg1,
    /// `Σ_{λ≤α} x̂² ≤ D Σ_{λ≥α} (α/λ)² x̂²`
    Reg2,
}

impl ConditionVariant {
    pub const ALL: [ConditionVariant; 4] = [Self::Mc1, Self::Mc2, Self::Reg1, Self::Reg2];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mc1 => "MC1",
            Self::Mc2 => "MC2",
            Self::Reg1 => "REG1",
            Self::Reg2 => "REG2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionPoint {
    pub alpha: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs/rhs`; `None` when both vanish, `+∞` when only `rhs` does.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub variant: ConditionVariant,
    /// Supremum of the ratios; `+∞` marks an unbounded condition.
    pub constant: f64,
    pub argmax_alpha: Option<f64>,
    pub per_alpha: Vec<ConditionPoint>,
}

impl ConditionReport {
    pub fn is_bounded(&self) -> bool {
        self.constant.is_finite()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("alpha,lhs,rhs,ratio\n");
        for p in &self.per_alpha {
            let r = p.ratio.map_or_else(|| "nan".to_string(), |r| r.to_string());
            let _ = writeln!(s, "{},{},{},{}", p.alpha, p.lhs, p.rhs, r);
        }
        s
    }
}

/// Measures one of the conditions on the grid. Indices with `λ_i = α` count
/// on both sides.
pub fn condition_constant(
    coeffs: &[f64],
    lambdas: &[f64],
    grid: &AlphaGrid,
    variant: ConditionVariant,
) -> Result<ConditionReport> {
    if coeffs.len() != lambdas.len() {
        return Err(Error::param("coefficients and lambdas differ in length"));
    }
    if grid.is_empty() {
        return Err(Error::param("empty grid"));
    }
    let mut per_alpha = Vec::with_capacity(grid.len());
    let mut constant = 0.0f64;
    let mut argmax = None;
    for &alpha in grid.values() {
        let (mut lhs, mut rhs) = (0.0, 0.0);
        for (c, &l) in coeffs.iter().zip(lambdas) {
            let c2 = c * c;
            let (upper, lower) = (l >= alpha, l <= alpha);
            match variant {
                ConditionVariant::Mc1 | ConditionVariant::Mc2 => {
                    if upper {
                        lhs += alpha / l * c2;
                    }
                    if lower {
                        rhs += if variant == ConditionVariant::Mc1 { c2 } else { l / alpha * c2 };
                    }
                }
                ConditionVariant::Reg1 | ConditionVariant::Reg2 => {
                    if lower {
                        lhs += c2;
                    }
                    if upper {
                        let w = alpha / l;
                        rhs += if variant == ConditionVariant::Reg1 { w * c2 } else { w * w * c2 };
                    }
                }
            }
        }
        let ratio = if rhs > 0.0 {
            Some(lhs / rhs)
        } else if lhs > 0.0 {
            Some(f64::INFINITY)
        } else {
            None
        };
        if let Some(r) = ratio {
            if r > constant || argmax.is_none() {
                constant = constant.max(r);
                argmax = Some(alpha);
            }
        }
        per_alpha.push(ConditionPoint { alpha, lhs, rhs, ratio });
    }
    Ok(ConditionReport { variant, constant, argmax_alpha: argmax, per_alpha })
}

/// All four constants for one noisy dataset.
pub fn condition_summary(data: &NoisySpectrum, grid: &AlphaGrid) -> Result<[ConditionReport; 4]> {
    let p = data.problem();
    let noise = |v| condition_constant(data.noise_coeffs(), p.lambdas(), grid, v);
    let sol = |v| condition_constant(p.xdag_coeffs(), p.lambdas(), grid, v);
    Ok([
        noise(ConditionVariant::Mc1)?,
        noise(ConditionVariant::Mc2)?,
        sol(ConditionVariant::Reg1)?,
        sol(ConditionVariant::Reg2)?,
    ])
}
