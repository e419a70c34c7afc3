//! Lattice geometry for the 2*pi-periodic box.
//!
//! With period 2*pi the physical wavevectors coincide with the integer
//! lattice, so a mode index along one axis maps to xi in
//! {-n/2+1, ..., n/2}. The dealias mask retains |xi_i| <= floor(f * n/2)
//! per axis (f = 2/3 by default), which removes quadratic aliasing exactly.

use crate::error::{Error, Result};

pub const DEFAULT_DEALIAS_FRACTION: f64 = 2.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    /// Modes per dimension (even, >= 4).
    pub n: usize,
    /// Retained-mode fraction for the 2/3 rule.
    pub dealias_fraction: f64,
    /// Per-axis dealias limit: modes with |xi_i| > limit are zeroed.
    pub dealias_limit: usize,
}

pub fn make_grid(n: usize) -> Result<Grid> {
    Grid::with_fraction(n, DEFAULT_DEALIAS_FRACTION)
}

impl Grid {
    pub fn with_fraction(n: usize, dealias_fraction: f64) -> Result<Grid> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::BadGridSize(n));
        }
        let dealias_limit = (dealias_fraction * (n as f64) / 2.0).floor() as usize;
        Ok(Grid {
            n,
            dealias_fraction,
            dealias_limit,
        })
    }

    /// Total number of lattice points.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// FFT bin -> signed wavevector component.
    #[inline]
    pub fn wavenumber(&self, k: usize) -> i64 {
        let half = self.n / 2;
        if k <= half {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Signed wavevector component -> FFT bin, if on the lattice.
    #[inline]
    pub fn bin(&self, xi: i64) -> Option<usize> {
        let half = self.n as i64 / 2;
        if xi > half || xi <= -half {
            None
        } else if xi >= 0 {
            Some(xi as usize)
        } else {
            Some((xi + self.n as i64) as usize)
        }
    }

    /// Flat index of a lattice site from FFT bins (x fastest).
    #[inline]
    pub fn index(&self, kx: usize, ky: usize, kz: usize) -> usize {
        (kz * self.n + ky) * self.n + kx
    }

    /// Flat index from a signed wavevector, if on the lattice.
    pub fn index_of(&self, xi: [i64; 3]) -> Option<usize> {
        let kx = self.bin(xi[0])?;
        let ky = self.bin(xi[1])?;
        let kz = self.bin(xi[2])?;
        Some(self.index(kx, ky, kz))
    }

    /// Signed wavevector of a flat index.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        let kx = idx % self.n;
        let ky = (idx / self.n) % self.n;
        let kz = idx / (self.n * self.n);
        [
            self.wavenumber(kx),
            self.wavenumber(ky),
            self.wavenumber(kz),
        ]
    }

    /// |xi|^2 of a flat index.
    #[inline]
    pub fn xi_sq(&self, idx: usize) -> f64 {
        let xi = self.wavevector(idx);
        (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]) as f64
    }

    /// True when the mode survives the dealias mask.
    #[inline]
    pub fn in_mask(&self, xi: [i64; 3]) -> bool {
        let l = self.dealias_limit as i64;
        xi[0].abs() <= l && xi[1].abs() <= l && xi[2].abs() <= l
    }

    /// Flat index of the conjugate partner -xi (mod n per axis).
    #[inline]
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let n = self.n;
        let kx = idx % n;
        let ky = (idx / n) % n;
        let kz = idx / (n * n);
        let neg = |k: usize| if k == 0 { 0 } else { n - k };
        self.index(neg(kx), neg(ky), neg(kz))
    }

    /// True when -xi aliases to xi itself (components all 0 or n/2).
    #[inline]
    pub fn is_self_conjugate(&self, idx: usize) -> bool {
        self.conjugate_index(idx) == idx
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self.n != other.n {
            Err(Error::GridMismatch(self.n, other.n))
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_bounds() {
        let g = make_grid(8).unwrap();
        // lattice {-3..4}, mask keeps |xi_i| <= 2
        assert_eq!(g.wavenumber(4), 4);
        assert_eq!(g.wavenumber(5), -3);
        assert_eq!(g.dealias_limit, 2);
        assert_eq!(g.bin(-3), Some(5));
        assert_eq!(g.bin(4), Some(4));
        assert_eq!(g.bin(-4), None);
        assert_eq!(g.bin(5), None);
    }

    #[test]
    fn small_grid() {
        let g = make_grid(4).unwrap();
        // lattice {-1..2}
        assert_eq!(g.wavenumber(2), 2);
        assert_eq!(g.wavenumber(3), -1);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(make_grid(7).is_err());
        assert!(make_grid(2).is_err());
        assert!(make_grid(0).is_err());
    }

    #[test]
    fn wavevector_roundtrip() {
        let g = make_grid(8).unwrap();
        for idx in 0..g.len() {
            let xi = g.wavevector(idx);
            assert_eq!(g.index_of(xi), Some(idx));
        }
    }

    #[test]
    fn conjugate_involution() {
        let g = make_grid(8).unwrap();
        for idx in 0..g.len() {
            let c = g.conjugate_index(idx);
            assert_eq!(g.conjugate_index(c), idx);
        }
    }
}
