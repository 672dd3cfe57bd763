//! Ray-driven parallel-beam projection matrix on a square pixel grid.
//!
//! Pixels have unit side and cover `[0, n]²`; pixel `(col, row)` maps to
//! unknown `row·n + col`. Angles are spread uniformly over `[0, π)`. For each
//! angle the detector spans the image diagonal `√2·n`, so every pixel is seen
//! from every angle, with `n_rays` equally spaced rays at the centre offsets
//! `(j + 1/2 - n_rays/2)·√2·n/n_rays`. Matrix entries
//! are exact chord lengths of the ray inside each pixel.
//!
//! This is a small analogue of a tomography test operator, not a bit-for-bit
//! reproduction of any toolbox.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::{matrix_problem, SpectralProblem};
use crate::error::{Error, Result};

const AXIS_EPS: f64 = 1e-12;

// Parameter interval of the line p + t·d inside [lo, hi] along one axis.
fn slab(p: f64, d: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    if d.abs() < AXIS_EPS {
        return (lo <= p && p <= hi).then_some((f64::NEG_INFINITY, f64::INFINITY));
    }
    let (a, b) = ((lo - p) / d, (hi - p) / d);
    Some(if a < b { (a, b) } else { (b, a) })
}

fn chord(px: f64, py: f64, dx: f64, dy: f64, col: usize, row: usize) -> f64 {
    let (x0, y0) = (col as f64, row as f64);
    let Some((ax, bx)) = slab(px, dx, x0, x0 + 1.0) else { return 0.0 };
    let Some((ay, by)) = slab(py, dy, y0, y0 + 1.0) else { return 0.0 };
    let len = bx.min(by) - ax.max(ay);
    if len > AXIS_EPS {
        len
    } else {
        0.0
    }
}

pub fn radon_matrix(img_n: usize, n_angles: usize, n_rays: usize) -> Result<DMatrix<f64>> {
    if img_n == 0 || n_angles == 0 || n_rays == 0 {
        return Err(Error::param("radon geometry needs positive image size, angle and ray counts"));
    }
    let n = img_n as f64;
    let spacing = n * 2f64.sqrt() / n_rays as f64;
    let centre = n / 2.0;
    let rows = n_angles * n_rays;
    let mut a = DMatrix::zeros(rows, img_n * img_n);
    for k in 0..n_angles {
        let theta = k as f64 * PI / n_angles as f64;
        let (dx, dy) = (theta.cos(), theta.sin());
        let (nx, ny) = (-dy, dx);
        for j in 0..n_rays {
            let s = (j as f64 + 0.5 - n_rays as f64 / 2.0) * spacing;
            let (px, py) = (centre + s * nx, centre + s * ny);
            let r = k * n_rays + j;
            for row in 0..img_n {
                for col in 0..img_n {
                    let len = chord(px, py, dx, dy, col, row);
                    if len > 0.0 {
                        a[(r, row * img_n + col)] = len;
                    }
                }
            }
        }
    }
    if a.iter().all(|&x| x == 0.0) {
        return Err(Error::param("no ray intersects the pixel grid"));
    }
    Ok(a)
}

/// A sparse blocky phantom: one small square block and two isolated pixels,
/// all unit valued.
pub fn radon_phantom(img_n: usize) -> DVector<f64> {
    let mut x = DVector::zeros(img_n * img_n);
    let b = (img_n / 8).max(1);
    let q = img_n / 4;
    for row in q..q + b {
        for col in q..q + b {
            x[row * img_n + col] = 1.0;
        }
    }
    x[(img_n / 2) * img_n + 3 * img_n / 4] = 1.0;
    x[(3 * img_n / 4) * img_n + img_n / 2] = 1.0;
    x
}

pub fn make_radon_problem(img_n: usize, n_angles: usize, n_rays: usize) -> Result<SpectralProblem> {
    if img_n < 4 {
        return Err(Error::param(format!("radon problem needs img_n >= 4 (got {img_n})")));
    }
    let a = radon_matrix(img_n, n_angles, n_rays)?;
    matrix_problem(
        format!("radon:img={img_n},angles={n_angles},rays={n_rays}"),
        &a,
        &radon_phantom(img_n),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_axis_aligned() {
        let a = radon_matrix(2, 2, 2).unwrap();
        assert_eq!(a.nrows(), 4);
        for r in 0..4 {
            let nz: Vec<f64> = a.row(r).iter().copied().filter(|&x| x != 0.0).collect();
            assert_eq!(nz.len(), 2, "row {r}: {:?}", a.row(r));
            for v in nz {
                assert!((v - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn entries_nonnegative_and_bounded() {
        let a = radon_matrix(8, 7, 11).unwrap();
        assert!(a.iter().all(|&x| (0.0..=2f64.sqrt() + 1e-12).contains(&x)));
    }

    #[test]
    fn chord_sum_is_segment_length() {
        // Rays at 0 degrees either miss or cross the full image width.
        let a = radon_matrix(5, 3, 5).unwrap();
        let sums: Vec<f64> = (0..5).map(|j| a.row(j).sum()).collect();
        assert!(sums.iter().all(|&s| s == 0.0 || (s - 5.0).abs() < 1e-12), "{sums:?}");
        assert_eq!(sums.iter().filter(|&&s| s > 0.0).count(), 3);
    }

    #[test]
    fn ill_conditioned() {
        let p = make_radon_problem(8, 12, 12).unwrap();
        assert!((p.sigma_max() - 1.0).abs() < 1e-15);
        let full = 64;
        let ratio = if p.len() < full { 0.0 } else { p.sigma_min() / p.sigma_max() };
        assert!(ratio < 1e-2, "sigma_min/sigma_1 = {ratio}");
    }

    #[test]
    fn too_small_rejected() {
        assert!(make_radon_problem(3, 4, 4).is_err());
    }

    #[test]
    fn phantom_is_sparse_unit() {
        let x = radon_phantom(16);
        let nz = x.iter().filter(|&&v| v != 0.0).count();
        assert_eq!(nz, 6);
        assert!(x.iter().all(|&v| v == 0.0 || v == 1.0));
    }
}
