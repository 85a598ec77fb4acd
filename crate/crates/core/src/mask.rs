//! Sample masks and (masked) field norms.
//!
//! Formulas that divide by `Ω_x`, `Ω_y` or `f` are only evaluated where the
//! denominator exceeds a relative threshold; every reported norm carries the
//! kept fraction of the mask it was taken over.

use crate::error::{Error, Result};
use crate::field2d::ScalarField2D;
use crate::grid::Grid2D;

/// Fraction below which a mask is flagged as low-coverage in reports.
pub const LOW_COVERAGE_FRACTION: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct Mask2D {
    grid: Grid2D,
    kept: Vec<bool>,
    threshold: f64,
}

impl Mask2D {
    /// Mask keeping every sample.
    pub fn full(grid: Grid2D) -> Self {
        Self {
            grid,
            kept: vec![true; grid.len()],
            threshold: 0.0,
        }
    }

    /// Keep samples where `|f| > eps_rel * max|f|`.
    pub fn from_threshold(f: &ScalarField2D, eps_rel: f64) -> Self {
        let cut = eps_rel * f.max_abs();
        Self {
            grid: f.grid(),
            kept: f.values().iter().map(|v| v.abs() > cut).collect(),
            threshold: eps_rel,
        }
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn kept(&self) -> &[bool] {
        &self.kept
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn kept_count(&self) -> usize {
        self.kept.iter().filter(|&&k| k).count()
    }

    pub fn kept_fraction(&self) -> f64 {
        self.kept_count() as f64 / self.kept.len() as f64
    }

    /// True when coverage is poor enough that reports should warn.
    pub fn low_coverage(&self) -> bool {
        self.kept_fraction() < LOW_COVERAGE_FRACTION
    }

    /// Pointwise AND of two masks on the same grid.
    pub fn intersect(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::grid_mismatch(self.grid, other.grid));
        }
        Ok(Self {
            grid: self.grid,
            kept: self
                .kept
                .iter()
                .zip(&other.kept)
                .map(|(a, b)| *a && *b)
                .collect(),
            threshold: self.threshold.max(other.threshold),
        })
    }

    /// Zero the field outside the mask.
    pub fn apply(&self, f: &ScalarField2D) -> Result<ScalarField2D> {
        if self.grid != f.grid() {
            return Err(Error::grid_mismatch(self.grid, f.grid()));
        }
        let values = f
            .values()
            .iter()
            .zip(&self.kept)
            .map(|(v, k)| if *k { *v } else { 0.0 })
            .collect();
        ScalarField2D::from_values(self.grid, values)
    }
}

/// Max-abs and root-mean-square norms of a field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldNorms {
    pub linf: f64,
    pub l2: f64,
}

/// Norms over the kept samples of `mask`, or over everything when absent.
pub fn norms(f: &ScalarField2D, mask: Option<&Mask2D>) -> Result<FieldNorms> {
    match mask {
        None => Ok(norms_all(f.values())),
        Some(m) => {
            if m.grid() != f.grid() {
                return Err(Error::grid_mismatch(m.grid(), f.grid()));
            }
            let mut linf: f64 = 0.0;
            let mut sum = 0.0;
            let mut count = 0usize;
            for (v, k) in f.values().iter().zip(m.kept()) {
                if *k {
                    linf = linf.max(v.abs());
                    sum += v * v;
                    count += 1;
                }
            }
            if count == 0 {
                return Err(Error::EmptyMask);
            }
            Ok(FieldNorms {
                linf,
                l2: (sum / count as f64).sqrt(),
            })
        }
    }
}

fn norms_all(values: &[f64]) -> FieldNorms {
    let mut linf: f64 = 0.0;
    let mut sum = 0.0;
    for v in values {
        linf = linf.max(v.abs());
        sum += v * v;
    }
    FieldNorms {
        linf,
        l2: (sum / values.len() as f64).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid2D {
        Grid2D::new(n, n).unwrap()
    }

    #[test]
    fn norms_of_zero_field() {
        let f = ScalarField2D::zeros(grid(16));
        let n = norms(&f, None).unwrap();
        assert_eq!((n.linf, n.l2), (0.0, 0.0));
    }

    #[test]
    fn norms_of_sine_match_closed_form() {
        let f = ScalarField2D::from_fn(grid(64), |x, _| x.sin());
        let n = norms(&f, None).unwrap();
        assert!((n.linf - 1.0).abs() < 1e-12);
        assert!((n.l2 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn full_mask_changes_nothing() {
        let g = grid(64);
        let f = ScalarField2D::from_fn(g, |x, _| x.sin());
        let m = Mask2D::full(g);
        assert_eq!(norms(&f, Some(&m)).unwrap(), norms(&f, None).unwrap());
    }

    #[test]
    fn empty_mask_is_an_error() {
        let g = grid(8);
        let f = ScalarField2D::constant(g, 1.0);
        // Threshold above the max keeps nothing.
        let m = Mask2D::from_threshold(&ScalarField2D::zeros(g), 0.5);
        assert!(matches!(norms(&f, Some(&m)), Err(Error::EmptyMask)));
    }

    #[test]
    fn threshold_mask_excludes_nodal_lines() {
        let g = grid(64);
        let f = ScalarField2D::from_fn(g, |x, _| x.sin());
        let m = Mask2D::from_threshold(&f, 1e-3);
        // sin x vanishes on two grid columns.
        assert!(m.kept_fraction() < 1.0);
        assert!(m.kept_fraction() > 0.9);
        assert!(!m.low_coverage());
    }
}
