//! Divergence-free vector fields (and scalar test fields) represented by
//! Fourier coefficients on the periodic lattice.
//!
//! Velocity fields are real valued (Hermitian symmetry c_{-xi} = conj(c_xi))
//! and mean free (c_0 = 0); the mean is forced to zero so the |xi|^{-1}
//! weighted norm stays finite. Scalar fields may carry a mean.

use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::grid::Grid;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::{Read, Write};

pub const DIVERGENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField {
    pub grid: Grid,
    /// One coefficient array per velocity component, FFT bin order.
    pub coeffs: [Vec<Complex64>; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSpectralField {
    pub grid: Grid,
    pub coeffs: Vec<Complex64>,
}

impl SpectralVectorField {
    pub fn zero(grid: Grid) -> Self {
        let z = vec![Complex64::default(); grid.len()];
        SpectralVectorField {
            grid,
            coeffs: [z.clone(), z.clone(), z],
        }
    }

    /// Build a field from explicitly listed modes. Conjugate partners are
    /// filled automatically; a nonzero coefficient at xi = 0 is dropped with
    /// a warning.
    pub fn from_modes(grid: Grid, modes: &[([i64; 3], [Complex64; 3])]) -> Result<Self> {
        let mut field = Self::zero(grid);
        let mut assigned = vec![false; grid.len()];
        for &(xi, c) in modes {
            let idx = grid
                .index_of(xi)
                .ok_or(Error::ModeOutOfLattice(xi[0], xi[1], xi[2]))?;
            if xi == [0, 0, 0] {
                if c.iter().any(|z| z.norm() > 0.0) {
                    log::warn!("nonzero mean mode supplied; forcing c_0 = 0");
                }
                continue;
            }
            let conj_idx = grid.conjugate_index(idx);
            if conj_idx == idx {
                // Self-conjugate site: the coefficient must be real.
                if c.iter().any(|z| z.im.abs() > 1e-15 * (1.0 + z.norm())) {
                    return Err(Error::ConjugateConflict(xi[0], xi[1], xi[2]));
                }
            }
            let cc = c.map(|z| z.conj());
            for comp in 0..3 {
                if assigned[idx] && field.coeffs[comp][idx] != c[comp] {
                    return Err(Error::ConjugateConflict(xi[0], xi[1], xi[2]));
                }
                field.coeffs[comp][idx] = Complex64::new(c[comp].re, if conj_idx == idx { 0.0 } else { c[comp].im });
                if conj_idx != idx {
                    field.coeffs[comp][conj_idx] = cc[comp];
                }
            }
            assigned[idx] = true;
            assigned[conj_idx] = true;
        }
        Ok(field)
    }

    /// Per-mode orthogonal projection onto divergence-free fields:
    /// c <- c - (xi . c / |xi|^2) xi.
    pub fn leray_project(&self) -> Self {
        let grid = self.grid;
        let mut out = self.clone();
        let (c0, rest) = out.coeffs.split_at_mut(1);
        let (c1, c2) = rest.split_at_mut(1);
        let (c0, c1, c2) = (&mut c0[0], &mut c1[0], &mut c2[0]);
        c0.par_iter_mut()
            .zip(c1.par_iter_mut())
            .zip(c2.par_iter_mut())
            .enumerate()
            .for_each(|(idx, ((a, b), c))| {
                let xi = grid.wavevector(idx);
                let sq = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]) as f64;
                if sq == 0.0 {
                    return;
                }
                let dot = *a * xi[0] as f64 + *b * xi[1] as f64 + *c * xi[2] as f64;
                let f = dot / sq;
                *a -= f * xi[0] as f64;
                *b -= f * xi[1] as f64;
                *c -= f * xi[2] as f64;
            });
        out
    }

    /// Zero every mode outside the 2/3 mask.
    pub fn dealias(&self) -> Self {
        let grid = self.grid;
        let mut out = self.clone();
        for comp in &mut out.coeffs {
            comp.par_iter_mut().enumerate().for_each(|(idx, c)| {
                if !grid.in_mask(grid.wavevector(idx)) {
                    *c = Complex64::default();
                }
            });
        }
        out
    }

    /// Deterministic random divergence-free field with |c_xi| proportional
    /// to amplitude * |xi|^(-slope) for 0 < |xi| <= k_max.
    pub fn random_divfree(
        grid: Grid,
        seed: u64,
        slope: f64,
        amplitude: f64,
        k_max: usize,
    ) -> Result<Self> {
        if k_max > grid.dealias_limit {
            return Err(Error::KMaxExceedsMask {
                k_max,
                limit: grid.dealias_limit,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut field = Self::zero(grid);
        for idx in 0..grid.len() {
            let conj_idx = grid.conjugate_index(idx);
            if idx >= conj_idx {
                continue; // strict half-lattice; self-conjugate sites stay zero
            }
            let xi = grid.wavevector(idx);
            let sq = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]) as f64;
            if sq == 0.0 || sq.sqrt() > k_max as f64 {
                continue;
            }
            let mut c = [Complex64::default(); 3];
            let mut norm_sq = 0.0;
            for z in &mut c {
                *z = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                norm_sq += z.norm_sqr();
            }
            if norm_sq == 0.0 {
                continue;
            }
            let target = amplitude * sq.sqrt().powf(-slope);
            let scale = target / norm_sq.sqrt();
            for comp in 0..3 {
                let z = c[comp] * scale;
                field.coeffs[comp][idx] = z;
                field.coeffs[comp][conj_idx] = z.conj();
            }
        }
        Ok(field.leray_project())
    }

    /// Physical-space samples on the n^3 collocation grid, one array per
    /// component, x fastest.
    pub fn to_physical(&self) -> [Vec<f64>; 3] {
        let fft = Fft3::get(self.grid.n);
        let mut out: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for comp in 0..3 {
            let mut buf = self.coeffs[comp].clone();
            fft.backward(&mut buf);
            out[comp] = buf.iter().map(|z| z.re).collect();
        }
        out
    }

    pub fn from_physical(grid: Grid, samples: &[Vec<f64>; 3]) -> Result<Self> {
        let fft = Fft3::get(grid.n);
        let mut field = Self::zero(grid);
        for comp in 0..3 {
            if samples[comp].len() != grid.len() {
                return Err(Error::GridMismatch(samples[comp].len(), grid.len()));
            }
            let mut buf: Vec<Complex64> = samples[comp]
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect();
            fft.forward(&mut buf);
            field.coeffs[comp] = buf;
        }
        // Real input guarantees Hermitian symmetry up to rounding; the mean
        // is removed to keep the X^{-1} weight finite.
        for comp in 0..3 {
            field.coeffs[comp][0] = Complex64::default();
        }
        Ok(field)
    }

    /// Euclidean magnitude of the 3-component coefficient at a flat index.
    #[inline]
    pub fn magnitude(&self, idx: usize) -> f64 {
        (self.coeffs[0][idx].norm_sqr()
            + self.coeffs[1][idx].norm_sqr()
            + self.coeffs[2][idx].norm_sqr())
        .sqrt()
    }

    pub fn max_magnitude(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| self.magnitude(i))
            .fold(0.0, f64::max)
    }

    /// max_xi |xi . c_xi| / max_xi |c_xi| (zero for the zero field).
    pub fn divergence_ratio(&self) -> f64 {
        let max_c = self.max_magnitude();
        if max_c == 0.0 {
            return 0.0;
        }
        let mut max_div: f64 = 0.0;
        for idx in 0..self.grid.len() {
            let xi = self.grid.wavevector(idx);
            let dot = self.coeffs[0][idx] * xi[0] as f64
                + self.coeffs[1][idx] * xi[1] as f64
                + self.coeffs[2][idx] * xi[2] as f64;
            max_div = max_div.max(dot.norm());
        }
        max_div / max_c
    }

    pub fn check_divergence_free(&self, tolerance: f64) -> Result<()> {
        let r = self.divergence_ratio();
        if r > tolerance {
            Err(Error::NotDivergenceFree {
                divergence: r,
                tolerance,
            })
        } else {
            Ok(())
        }
    }

    /// Largest deviation from c_{-xi} = conj(c_xi), for invariant tests.
    pub fn hermitian_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for idx in 0..self.grid.len() {
            let conj_idx = self.grid.conjugate_index(idx);
            for comp in 0..3 {
                err = err
                    .max((self.coeffs[comp][idx] - self.coeffs[comp][conj_idx].conj()).norm());
            }
        }
        err
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for comp in &mut out.coeffs {
            for z in comp.iter_mut() {
                *z *= factor;
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.grid.check_same(&other.grid).expect("grid mismatch");
        let mut out = self.clone();
        for comp in 0..3 {
            for (a, b) in out.coeffs[comp].iter_mut().zip(&other.coeffs[comp]) {
                *a += b;
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// Shear flow u = (0, cos x1, 0): a steady-Stokes mode whose
    /// self-advection vanishes identically.
    pub fn shear(grid: Grid) -> Self {
        Self::from_modes(
            grid,
            &[(
                [1, 0, 0],
                [
                    Complex64::default(),
                    Complex64::new(0.5, 0.0),
                    Complex64::default(),
                ],
            )],
        )
        .expect("static mode list")
    }

    /// Taylor-Green vortex u = (sin x1 cos x2, -cos x1 sin x2, 0).
    /// Its nonlinearity is a pure gradient, so u(t) = exp(-2 nu t) u(0).
    pub fn taylor_green(grid: Grid) -> Self {
        let i4 = Complex64::new(0.0, 0.25);
        Self::from_modes(
            grid,
            &[
                ([1, 1, 0], [-i4, i4, Complex64::default()]),
                ([1, -1, 0], [-i4, -i4, Complex64::default()]),
            ],
        )
        .expect("static mode list")
    }

    /// Serialize the non-redundant half-lattice, bit exact.
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<()> {
        let grid = self.grid;
        let mut records: Vec<(usize, [i64; 3])> = Vec::new();
        for idx in 0..grid.len() {
            let conj_idx = grid.conjugate_index(idx);
            if idx > conj_idx {
                continue;
            }
            if self.magnitude(idx) > 0.0 {
                records.push((idx, grid.wavevector(idx)));
            }
        }
        w.write_all(b"NSXCKPT1")?;
        w.write_all(&(grid.n as u32).to_le_bytes())?;
        w.write_all(&(records.len() as u64).to_le_bytes())?;
        for (idx, xi) in records {
            for comp in xi {
                w.write_all(&(comp as i32).to_le_bytes())?;
            }
            for comp in 0..3 {
                let z = self.coeffs[comp][idx];
                w.write_all(&z.re.to_bits().to_le_bytes())?;
                w.write_all(&z.im.to_bits().to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != b"NSXCKPT1" {
            return Err(Error::CheckpointFormat("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let n = u32::from_le_bytes(b4) as usize;
        let grid = Grid::with_fraction(n, crate::grid::DEFAULT_DEALIAS_FRACTION)?;
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let count = u64::from_le_bytes(b8) as usize;
        let mut field = Self::zero(grid);
        for _ in 0..count {
            let mut xi = [0i64; 3];
            for comp in &mut xi {
                r.read_exact(&mut b4)?;
                *comp = i32::from_le_bytes(b4) as i64;
            }
            let idx = grid
                .index_of(xi)
                .ok_or(Error::ModeOutOfLattice(xi[0], xi[1], xi[2]))?;
            let conj_idx = grid.conjugate_index(idx);
            for comp in 0..3 {
                r.read_exact(&mut b8)?;
                let re = f64::from_bits(u64::from_le_bytes(b8));
                r.read_exact(&mut b8)?;
                let im = f64::from_bits(u64::from_le_bytes(b8));
                field.coeffs[comp][idx] = Complex64::new(re, im);
                if conj_idx != idx {
                    field.coeffs[comp][conj_idx] = Complex64::new(re, -im);
                }
            }
        }
        Ok(field)
    }
}

impl ScalarSpectralField {
    pub fn zero(grid: Grid) -> Self {
        ScalarSpectralField {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    /// Scalar analog of `from_modes`; the mean mode is allowed.
    pub fn from_modes(grid: Grid, modes: &[([i64; 3], Complex64)]) -> Result<Self> {
        let mut field = Self::zero(grid);
        for &(xi, c) in modes {
            let idx = grid
                .index_of(xi)
                .ok_or(Error::ModeOutOfLattice(xi[0], xi[1], xi[2]))?;
            let conj_idx = grid.conjugate_index(idx);
            if conj_idx == idx && c.im.abs() > 1e-15 * (1.0 + c.norm()) {
                return Err(Error::ConjugateConflict(xi[0], xi[1], xi[2]));
            }
            field.coeffs[idx] = if conj_idx == idx {
                Complex64::new(c.re, 0.0)
            } else {
                c
            };
            if conj_idx != idx {
                field.coeffs[conj_idx] = c.conj();
            }
        }
        Ok(field)
    }

    /// Deterministic sparse random real scalar field supported in
    /// |xi_i| <= support_limit, with up to max_modes conjugate pairs.
    pub fn random_sparse(grid: Grid, seed: u64, max_modes: usize, support_limit: i64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut field = Self::zero(grid);
        let mut placed = 0;
        while placed < max_modes {
            let draw = |rng: &mut ChaCha8Rng| {
                (rng.random::<f64>() * (2 * support_limit + 1) as f64).floor() as i64
                    - support_limit
            };
            let xi = [draw(&mut rng), draw(&mut rng), draw(&mut rng)];
            let c = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            placed += 1;
            let idx = match grid.index_of(xi) {
                Some(i) => i,
                None => continue,
            };
            let conj_idx = grid.conjugate_index(idx);
            if conj_idx == idx {
                field.coeffs[idx] = Complex64::new(c.re, 0.0);
            } else {
                field.coeffs[idx] = c;
                field.coeffs[conj_idx] = c.conj();
            }
        }
        field
    }

    /// Per-axis maximum |xi_i| over nonzero modes; None for the zero field.
    pub fn support(&self) -> Option<[i64; 3]> {
        let mut out: Option<[i64; 3]> = None;
        for idx in 0..self.grid.len() {
            if self.coeffs[idx].norm() == 0.0 {
                continue;
            }
            let xi = self.grid.wavevector(idx);
            let s = out.get_or_insert([0, 0, 0]);
            for a in 0..3 {
                s[a] = s[a].max(xi[a].abs());
            }
        }
        out
    }
}
