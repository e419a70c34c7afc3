//! Fourier-side norms on discrete fields.
//!
//! X^s is the |xi|^s-weighted l^1 sum of coefficient magnitudes; L^2 and
//! homogeneous H^s are Fourier-side Plancherel sums without volume factors.
//! All reductions use pairwise summation in fixed lattice order so results
//! are bitwise independent of the worker count.

use crate::error::{Error, Result};
use crate::field::{ScalarSpectralField, SpectralVectorField};
use crate::grid::Grid;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Relative slack applied when asserting the inequality checks.
pub const INEQUALITY_SLACK: f64 = 1e-12;

/// Anything with per-mode coefficient magnitudes on a lattice.
pub trait ModeMagnitudes {
    fn grid(&self) -> &Grid;
    fn magnitude_at(&self, idx: usize) -> f64;
}

impl ModeMagnitudes for SpectralVectorField {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn magnitude_at(&self, idx: usize) -> f64 {
        self.magnitude(idx)
    }
}

impl ModeMagnitudes for ScalarSpectralField {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn magnitude_at(&self, idx: usize) -> f64 {
        self.coeffs[idx].norm()
    }
}

/// Deterministic pairwise (tree) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1..=8 => values.iter().sum(),
        len => {
            let (a, b) = values.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// sum_{xi != 0} |xi|^s |c_xi|, with the xi = 0 term included when s = 0.
pub fn x_norm<F: ModeMagnitudes>(field: &F, s: i32) -> Result<f64> {
    let grid = *field.grid();
    if s == -1 && field.magnitude_at(0) != 0.0 {
        return Err(Error::MeanModePresent);
    }
    let terms: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let mag = field.magnitude_at(idx);
            if idx == 0 {
                return if s == 0 { mag } else { 0.0 };
            }
            let r = grid.xi_sq(idx).sqrt();
            match s {
                -1 => mag / r,
                0 => mag,
                1 => mag * r,
                _ => mag * r.powi(s),
            }
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

pub fn l2_norm<F: ModeMagnitudes>(field: &F) -> f64 {
    let grid = *field.grid();
    let terms: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let m = field.magnitude_at(idx);
            m * m
        })
        .collect();
    pairwise_sum(&terms).sqrt()
}

/// sqrt(sum_{xi != 0} |xi|^{2s} |c_xi|^2); the mean mode contributes only
/// at s = 0.
pub fn hs_norm<F: ModeMagnitudes>(field: &F, s: f64) -> f64 {
    let grid = *field.grid();
    let terms: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let m = field.magnitude_at(idx);
            if idx == 0 {
                return if s == 0.0 { m * m } else { 0.0 };
            }
            let sq = grid.xi_sq(idx);
            m * m * sq.powf(s)
        })
        .collect();
    pairwise_sum(&terms).sqrt()
}

/// l^1 of the coefficients including the mean mode; identical to x_norm(.,0).
pub fn fourier_l1<F: ModeMagnitudes>(field: &F) -> f64 {
    x_norm(field, 0).expect("s = 0 never fails")
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NormReport {
    pub x_m1: f64,
    pub x_0: f64,
    pub x_1: f64,
    pub l2: f64,
    pub hs_s: f64,
    pub s: f64,
}

impl NormReport {
    pub fn compute(field: &SpectralVectorField, s: f64) -> Result<NormReport> {
        Ok(NormReport {
            x_m1: x_norm(field, -1)?,
            x_0: x_norm(field, 0)?,
            x_1: x_norm(field, 1)?,
            l2: l2_norm(field),
            hs_s: hs_norm(field, s),
            s,
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Product bound ||fg||_{X^0} <= ||f||_{X^0} ||g||_{X^0}, with the product
/// evaluated by exact alias-free coefficient convolution.
pub fn check_product_inequality(
    f: &ScalarSpectralField,
    g: &ScalarSpectralField,
) -> Result<InequalityCheck> {
    f.grid.check_same(&g.grid)?;
    let half = f.grid.n as i64 / 2;
    if let (Some(sf), Some(sg)) = (f.support(), g.support()) {
        for a in 0..3 {
            let reach = sf[a] + sg[a];
            if reach > half {
                return Err(Error::SupportTooLarge { reach, limit: half });
            }
        }
    }
    let lhs = {
        let conv = free_convolution(f, g);
        let mags: Vec<f64> = conv.values().map(|z| z.norm()).collect();
        pairwise_sum(&mags)
    };
    let rhs = x_norm(f, 0)? * x_norm(g, 0)?;
    Ok(InequalityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + INEQUALITY_SLACK),
    })
}

/// Sparse free convolution of the coefficient arrays on Z^3 (no wraparound).
pub fn free_convolution(
    f: &ScalarSpectralField,
    g: &ScalarSpectralField,
) -> BTreeMap<[i64; 3], Complex64> {
    let nz = |field: &ScalarSpectralField| -> Vec<([i64; 3], Complex64)> {
        (0..field.grid.len())
            .filter(|&i| field.coeffs[i].norm() != 0.0)
            .map(|i| (field.grid.wavevector(i), field.coeffs[i]))
            .collect()
    };
    let mut out: BTreeMap<[i64; 3], Complex64> = BTreeMap::new();
    for (xi_f, cf) in nz(f) {
        for (xi_g, cg) in nz(g) {
            let key = [xi_f[0] + xi_g[0], xi_f[1] + xi_g[1], xi_f[2] + xi_g[2]];
            *out.entry(key).or_default() += cf * cg;
        }
    }
    out
}

/// Interpolation bound ||f||_{X^0} <= ||f||_{X^{-1}}^{1/2} ||f||_{X^1}^{1/2}.
pub fn check_interpolation(f: &SpectralVectorField) -> Result<InequalityCheck> {
    let lhs = x_norm(f, 0)?;
    let rhs = (x_norm(f, -1)? * x_norm(f, 1)?).sqrt();
    Ok(InequalityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + INEQUALITY_SLACK),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_shell_norms() {
        let g = make_grid(8).unwrap();
        let f = SpectralVectorField::from_modes(
            g,
            &[([1, 0, 0], [c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)])],
        )
        .unwrap();
        // modes +-(1,0,0), each |c| = 0.5
        assert!((x_norm(&f, -1).unwrap() - 1.0).abs() < 1e-15);
        assert!((x_norm(&f, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((x_norm(&f, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((l2_norm(&f) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((hs_norm(&f, 1.0) - l2_norm(&f)).abs() < 1e-15);
    }

    #[test]
    fn high_shell_norms() {
        let g = make_grid(8).unwrap();
        // modes +-(2,2,1), |xi| = 3, total sum |c| = 0.3
        let f = SpectralVectorField::from_modes(
            g,
            &[([2, 2, 1], [c(0.15, 0.0), c(0.0, 0.0), c(0.0, 0.0)])],
        )
        .unwrap();
        assert!((x_norm(&f, -1).unwrap() - 0.1).abs() < 1e-15);
        assert!((x_norm(&f, 1).unwrap() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn zero_field_norms() {
        let g = make_grid(8).unwrap();
        let f = SpectralVectorField::zero(g);
        for s in [-1, 0, 1] {
            assert_eq!(x_norm(&f, s).unwrap(), 0.0);
        }
        assert_eq!(l2_norm(&f), 0.0);
        assert_eq!(fourier_l1(&f), 0.0);
    }

    #[test]
    fn mean_mode_rejected_for_x_m1() {
        let g = make_grid(8).unwrap();
        let mut f = SpectralVectorField::zero(g);
        f.coeffs[0][0] = c(0.5, 0.0);
        assert!(matches!(x_norm(&f, -1), Err(Error::MeanModePresent)));
        // but s = 0 includes it
        assert_eq!(x_norm(&f, 0).unwrap(), 0.5);
        assert_eq!(fourier_l1(&f), 0.5);
    }

    #[test]
    fn fourier_l1_alias() {
        let g = make_grid(16).unwrap();
        let f = SpectralVectorField::random_divfree(g, 1, 2.0, 1.0, 4).unwrap();
        assert_eq!(fourier_l1(&f), x_norm(&f, 0).unwrap());
        // single mode pair, total |c| = 0.4
        let f = SpectralVectorField::from_modes(
            g,
            &[([1, 0, 0], [c(0.0, 0.0), c(0.2, 0.0), c(0.0, 0.0)])],
        )
        .unwrap();
        assert!((fourier_l1(&f) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn product_young_equality_single_modes() {
        let g = make_grid(16).unwrap();
        let f = ScalarSpectralField::from_modes(g, &[([1, 0, 0], c(0.5, 0.0))]).unwrap();
        let r = check_product_inequality(&f, &f).unwrap();
        // (0.5 + 0.5)^2 on both sides: Young equality for nonnegative coeffs
        assert!((r.lhs - 1.0).abs() < 1e-14);
        assert!((r.rhs - 1.0).abs() < 1e-14);
        assert!(r.holds);
    }

    #[test]
    fn product_zero_field() {
        let g = make_grid(16).unwrap();
        let f = ScalarSpectralField::zero(g);
        let gfield = ScalarSpectralField::random_sparse(g, 2, 10, 3);
        let r = check_product_inequality(&f, &gfield).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
        assert!(r.holds);
    }

    #[test]
    fn product_support_too_large() {
        let g = make_grid(8).unwrap();
        let f = ScalarSpectralField::from_modes(g, &[([3, 0, 0], c(1.0, 0.0))]).unwrap();
        assert!(matches!(
            check_product_inequality(&f, &f),
            Err(Error::SupportTooLarge { .. })
        ));
    }

    #[test]
    fn interpolation_two_shell_hand_value() {
        let g = make_grid(8).unwrap();
        // shells |xi| in {1, 3}, total |c| = 0.5 per shell
        let f = SpectralVectorField::from_modes(
            g,
            &[
                ([1, 0, 0], [c(0.0, 0.0), c(0.25, 0.0), c(0.0, 0.0)]),
                ([2, 2, 1], [c(0.25, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
            ],
        )
        .unwrap();
        let r = check_interpolation(&f).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-14);
        let expect = ((0.5_f64 + 0.5 / 3.0) * (0.5 + 1.5)).sqrt();
        assert!((r.rhs - expect).abs() < 1e-14);
        assert!(r.holds);
    }

    #[test]
    fn interpolation_single_shell_equality() {
        let g = make_grid(8).unwrap();
        let f = SpectralVectorField::from_modes(
            g,
            &[
                ([1, 0, 0], [c(0.0, 0.0), c(0.3, 0.1), c(0.0, 0.0)]),
                ([0, 1, 0], [c(0.2, 0.0), c(0.0, 0.0), c(0.1, 0.0)]),
            ],
        )
        .unwrap();
        let r = check_interpolation(&f).unwrap();
        assert!((r.lhs - r.rhs).abs() <= 1e-12 * r.rhs);
    }

    #[test]
    fn interpolation_zero_field() {
        let g = make_grid(8).unwrap();
        let r = check_interpolation(&SpectralVectorField::zero(g)).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
        assert!(r.holds);
    }

    #[test]
    fn report_interpolation_invariant() {
        let g = make_grid(16).unwrap();
        let f = SpectralVectorField::random_divfree(g, 8, 1.0, 0.5, 4).unwrap();
        let rep = NormReport::compute(&f, 1.0).unwrap();
        assert!(rep.x_0 <= (rep.x_m1 * rep.x_1).sqrt() * (1.0 + 1e-12));
    }
}
