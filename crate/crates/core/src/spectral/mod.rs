//! Periodic Fourier basis on `(0, 2π)^d`.
//!
//! Coefficient convention: `u(x) = Σ_k û_k e^{ik·x}` over the retained band
//! `|k_j| ≤ N`. With this convention the constant eigenfunction
//! `φ_1 = (2π)^{-d/2}` has coefficient `c_1 = (2π)^{d/2} û_0`, so the spatial
//! integral is `∫u = (2π)^{d/2} c_1 = (2π)^d û_0`, and Parseval reads
//! `∫u² = (2π)^d Σ_k |û_k|²`.
//!
//! Band storage is x-fastest over per-axis offsets `a = k + N ∈ [0, 2N]`;
//! grid storage is x-fastest over `x_j = 2π i / G`.

mod fft;
mod field;

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{FchError, Result};
use fft::FftNd;

pub use field::{Field, VectorField};

/// Retained wavevectors and collocation grid of a periodic Fourier basis.
#[derive(Debug)]
pub struct Basis {
    dim: usize,
    modes: usize,
    grid: usize,
    /// `|k|²` per band index.
    k_squared: Vec<f64>,
    /// Wavevector per band index (unused axes are 0).
    wavevectors: Vec<[i64; 3]>,
    /// Flat FFT-array position per band index.
    fft_index: Vec<usize>,
    fft: FftNd,
}

pub type BasisRef = Arc<Basis>;

/// Smallest integer `≥ n` whose only prime factors are 2, 3 and 5.
fn next_smooth(n: usize) -> usize {
    (n.max(1)..)
        .find(|&m| {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .expect("smooth numbers are unbounded")
}

impl Basis {
    pub fn new(dim: usize, modes: usize, grid: usize) -> Result<BasisRef> {
        if !(1..=3).contains(&dim) {
            return Err(FchError::Contract(format!("dimension {dim} is not 1, 2 or 3")));
        }
        if modes < 1 {
            return Err(FchError::Contract("need at least one mode per axis".into()));
        }
        if grid < 2 * modes + 1 {
            return Err(FchError::Aliasing {
                grid,
                modes,
                required: 2 * modes + 1,
            });
        }
        let side = 2 * modes + 1;
        let len = side.pow(dim as u32);
        let mut k_squared = Vec::with_capacity(len);
        let mut wavevectors = Vec::with_capacity(len);
        let mut fft_index = Vec::with_capacity(len);
        for idx in 0..len {
            let mut k = [0i64; 3];
            let mut rest = idx;
            let mut flat = 0;
            for (axis, slot) in k.iter_mut().enumerate().take(dim) {
                let a = rest % side;
                rest /= side;
                *slot = a as i64 - modes as i64;
                let wrapped = slot.rem_euclid(grid as i64) as usize;
                flat += wrapped * grid.pow(axis as u32);
            }
            k_squared.push(k.iter().map(|&v| (v * v) as f64).sum());
            wavevectors.push(k);
            fft_index.push(flat);
        }
        Ok(Arc::new(Basis {
            dim,
            modes,
            grid,
            k_squared,
            wavevectors,
            fft_index,
            fft: FftNd::new(dim, grid),
        }))
    }

    /// Basis with the default collocation grid for a potential of the given degree.
    pub fn with_auto_grid(dim: usize, modes: usize, potential_degree: usize) -> Result<BasisRef> {
        Self::new(dim, modes, Self::auto_grid(modes, potential_degree))
    }

    /// Default grid: at least `3N`, and large enough that every polynomial
    /// product appearing in μ, ∇μ and the energy (degree up to `2m-2` in `u`
    /// for `deg W = m`) projects back onto the band without aliasing.
    pub fn auto_grid(modes: usize, potential_degree: usize) -> usize {
        let poly = (2 * potential_degree.max(2) - 2) * modes + 1;
        next_smooth(poly.max(3 * modes).max(2 * modes + 1))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn band_len(&self) -> usize {
        self.k_squared.len()
    }

    pub fn grid_len(&self) -> usize {
        self.grid.pow(self.dim as u32)
    }

    /// `(2π)^d`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32)
    }

    /// Quadrature weight of one grid cell, `(2π/G)^d`.
    pub fn cell_volume(&self) -> f64 {
        (2.0 * PI / self.grid as f64).powi(self.dim as i32)
    }

    pub fn k_squared(&self) -> &[f64] {
        &self.k_squared
    }

    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        self.wavevectors[idx]
    }

    /// Band index of a wavevector, if retained.
    pub fn band_index(&self, k: &[i64]) -> Option<usize> {
        let side = 2 * self.modes as i64 + 1;
        let mut idx = 0i64;
        let mut scale = 1i64;
        for axis in 0..self.dim {
            let kj = k.get(axis).copied().unwrap_or(0);
            if kj.abs() > self.modes as i64 {
                return None;
            }
            idx += (kj + self.modes as i64) * scale;
            scale *= side;
        }
        if k.iter().skip(self.dim).any(|&v| v != 0) {
            return None;
        }
        Some(idx as usize)
    }

    /// Band index of `-k` for the wavevector at `idx`.
    #[inline]
    pub fn mirror(&self, idx: usize) -> usize {
        self.band_len() - 1 - idx
    }

    /// Index of `k = 0`.
    pub fn zero_index(&self) -> usize {
        (self.band_len() - 1) / 2
    }

    /// Spatial coordinates of a flat grid index.
    pub fn grid_point(&self, flat: usize) -> [f64; 3] {
        let h = 2.0 * PI / self.grid as f64;
        let mut x = [0.0; 3];
        let mut rest = flat;
        for slot in x.iter_mut().take(self.dim) {
            *slot = h * (rest % self.grid) as f64;
            rest /= self.grid;
        }
        x
    }

    pub fn same_as(&self, other: &Basis) -> bool {
        self.dim == other.dim && self.modes == other.modes && self.grid == other.grid
    }

    /// Band coefficients to grid values.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.band_len());
        let mut buf = vec![Complex64::new(0.0, 0.0); self.grid_len()];
        for (c, &pos) in coeffs.iter().zip(&self.fft_index) {
            buf[pos] = *c;
        }
        self.fft.inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// Grid values to band coefficients (L² projection onto the band,
    /// exact when the grid resolves the integrand). The result is made
    /// exactly conjugate-symmetric.
    pub fn project(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.grid_len());
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut buf);
        let norm = 1.0 / self.grid_len() as f64;
        let mut coeffs: Vec<Complex64> = self.fft_index.iter().map(|&p| buf[p] * norm).collect();
        self.symmetrize(&mut coeffs);
        coeffs
    }

    /// Replace coefficients by the Hermitian part, `(c_k + conj(c_{-k}))/2`.
    pub fn symmetrize(&self, coeffs: &mut [Complex64]) {
        let zero = self.zero_index();
        for idx in 0..zero {
            let m = self.mirror(idx);
            let avg = (coeffs[idx] + coeffs[m].conj()) * 0.5;
            coeffs[idx] = avg;
            coeffs[m] = avg.conj();
        }
        coeffs[zero] = Complex64::new(coeffs[zero].re, 0.0);
    }

    /// Trapezoidal integral of grid values over the torus.
    pub fn integrate_grid(&self, values: &[f64]) -> f64 {
        self.cell_volume() * values.iter().sum::<f64>()
    }
}

/// Direction of a transform between the two field representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToSpectral,
    ToGrid,
}
