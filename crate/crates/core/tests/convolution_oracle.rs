//! Independent brute-force checks of the spectral nonlinearity and of the
//! sparse coefficient convolution. Everything here avoids the FFT path:
//! products are computed as direct double loops over lattice modes.

use num_complex::Complex64;
use nsx_core::dynamics::nonlinear_term;
use nsx_core::norms::free_convolution;
use nsx_core::{make_grid, ScalarSpectralField, SpectralVectorField};
use std::collections::BTreeMap;

/// Direct O(modes^2) convolution over the lattice, written independently of
/// `free_convolution` (iteration over all index pairs, no sparsity tricks).
fn dense_convolution(
    f: &ScalarSpectralField,
    g: &ScalarSpectralField,
) -> BTreeMap<[i64; 3], Complex64> {
    let grid = f.grid;
    let mut out = BTreeMap::new();
    for i in 0..grid.len() {
        if f.coeffs[i] == Complex64::ZERO {
            continue;
        }
        let xi_f = grid.wavevector(i);
        for j in 0..grid.len() {
            if g.coeffs[j] == Complex64::ZERO {
                continue;
            }
            let xi_g = grid.wavevector(j);
            let key = [xi_f[0] + xi_g[0], xi_f[1] + xi_g[1], xi_f[2] + xi_g[2]];
            *out.entry(key).or_insert(Complex64::ZERO) += f.coeffs[i] * g.coeffs[j];
        }
    }
    out.retain(|_, v| v.norm() > 0.0);
    out
}

/// -P div(u (x) u) assembled mode by mode from pairwise convolutions of the
/// velocity components, bypassing the FFT entirely.
fn brute_force_nonlinearity(u: &SpectralVectorField) -> SpectralVectorField {
    let grid = u.grid;
    let component = |c: usize| ScalarSpectralField {
        grid,
        coeffs: u.coeffs[c].clone(),
    };
    let mut conv = Vec::new();
    for i in 0..3 {
        let fi = component(i);
        let mut row = Vec::new();
        for j in 0..3 {
            row.push(free_convolution(&fi, &component(j)));
        }
        conv.push(row);
    }
    let mut out = SpectralVectorField::zero(grid);
    for idx in 0..grid.len() {
        let xi = grid.wavevector(idx);
        let xi_sq = grid.xi_sq(idx) as f64;
        if xi_sq == 0.0 || !grid.in_mask(xi) {
            continue;
        }
        let mut n = [Complex64::ZERO; 3];
        for i in 0..3 {
            for j in 0..3 {
                if let Some(t) = conv[i][j].get(&xi) {
                    n[i] -= Complex64::new(0.0, xi[j] as f64) * t;
                }
            }
        }
        let dot: Complex64 = (0..3).map(|a| n[a] * xi[a] as f64).sum();
        for a in 0..3 {
            out.coeffs[a][idx] = n[a] - dot * xi[a] as f64 / xi_sq;
        }
    }
    out
}

#[test]
fn sparse_convolution_matches_dense_loop() {
    let grid = make_grid(16).unwrap();
    for seed in 0..20 {
        let f = ScalarSpectralField::random_sparse(grid, seed, 12, 3);
        let g = ScalarSpectralField::random_sparse(grid, 1000 + seed, 12, 3);
        let sparse = free_convolution(&f, &g);
        let dense = dense_convolution(&f, &g);
        for (key, v) in &dense {
            let s = sparse.get(key).copied().unwrap_or(Complex64::ZERO);
            assert!((s - v).norm() <= 1e-13, "seed {seed} mode {key:?}");
        }
        for (key, v) in &sparse {
            if !dense.contains_key(key) {
                assert!(v.norm() <= 1e-13, "seed {seed} spurious mode {key:?}");
            }
        }
    }
}

#[test]
fn fft_nonlinearity_matches_brute_force() {
    let grid = make_grid(16).unwrap();
    for seed in 0..10 {
        let u = SpectralVectorField::random_divfree(grid, seed, 1.5, 1.0, 2).unwrap();
        let fast = nonlinear_term(&u).unwrap();
        let slow = brute_force_nonlinearity(&u);
        let err = fast.sub(&slow).max_magnitude();
        assert!(err <= 1e-12, "seed {seed}: max coefficient error {err:e}");
    }
}

#[test]
fn taylor_green_nonlinearity_vanishes_in_brute_force() {
    // the quadratic term is a pure gradient, so the projection removes it;
    // confirmed here without any FFT
    let grid = make_grid(8).unwrap();
    let u = SpectralVectorField::taylor_green(grid);
    let slow = brute_force_nonlinearity(&u);
    assert!(slow.max_magnitude() <= 1e-14);
}

#[test]
fn shear_nonlinearity_vanishes_in_brute_force() {
    let grid = make_grid(8).unwrap();
    let u = SpectralVectorField::shear(grid);
    let slow = brute_force_nonlinearity(&u);
    assert!(slow.max_magnitude() <= 1e-15);
}
