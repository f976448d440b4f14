use std::sync::Arc;

use rustfft::num_complex::Complex64;

use super::{BasisRef, Direction};
use crate::error::{FchError, Result};

/// Real band-limited periodic field, held in both representations.
///
/// The spectral coefficients are authoritative; grid values are always the
/// synthesis of the coefficients, so the two never disagree.
#[derive(Debug, Clone)]
pub struct Field {
    basis: BasisRef,
    coeffs: Vec<Complex64>,
    values: Vec<f64>,
}

/// One field per spatial axis.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub components: Vec<Field>,
}

impl Field {
    pub fn zeros(basis: &BasisRef) -> Self {
        Field {
            basis: Arc::clone(basis),
            coeffs: vec![Complex64::new(0.0, 0.0); basis.band_len()],
            values: vec![0.0; basis.grid_len()],
        }
    }

    pub fn constant(basis: &BasisRef, c: f64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); basis.band_len()];
        coeffs[basis.zero_index()] = Complex64::new(c, 0.0);
        Field {
            basis: Arc::clone(basis),
            coeffs,
            values: vec![c; basis.grid_len()],
        }
    }

    /// Project grid samples onto the band.
    pub fn from_grid(basis: &BasisRef, values: &[f64]) -> Result<Self> {
        if values.len() != basis.grid_len() {
            return Err(FchError::Contract(format!(
                "expected {} grid values, got {}",
                basis.grid_len(),
                values.len()
            )));
        }
        Ok(Self::from_coefficients_unchecked(basis, basis.project(values)))
    }

    /// Build from band coefficients; the Hermitian part is kept so the field is real.
    pub fn from_spectral(basis: &BasisRef, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != basis.band_len() {
            return Err(FchError::Contract(format!(
                "expected {} coefficients, got {}",
                basis.band_len(),
                coeffs.len()
            )));
        }
        let mut coeffs = coeffs;
        basis.symmetrize(&mut coeffs);
        Ok(Self::from_coefficients_unchecked(basis, coeffs))
    }

    pub(crate) fn from_coefficients_unchecked(basis: &BasisRef, coeffs: Vec<Complex64>) -> Self {
        let values = basis.synthesize(&coeffs);
        Field {
            basis: Arc::clone(basis),
            coeffs,
            values,
        }
    }

    /// Sample a function on the grid and project it onto the band.
    pub fn from_fn(basis: &BasisRef, f: impl Fn(&[f64]) -> f64) -> Self {
        let dim = basis.dim();
        let values: Vec<f64> = (0..basis.grid_len())
            .map(|i| f(&basis.grid_point(i)[..dim]))
            .collect();
        Self::from_coefficients_unchecked(basis, basis.project(&values))
    }

    /// Re-derive one representation from the other. Both are always
    /// populated, so this rebuilds the named target from the other side.
    pub fn transform(&self, direction: Direction) -> Self {
        match direction {
            Direction::ToGrid => Self::from_coefficients_unchecked(&self.basis, self.coeffs.clone()),
            Direction::ToSpectral => {
                Self::from_coefficients_unchecked(&self.basis, self.basis.project(&self.values))
            }
        }
    }

    pub fn basis(&self) -> &BasisRef {
        &self.basis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at wavevector `k`, zero outside the band.
    pub fn coefficient(&self, k: &[i64]) -> Complex64 {
        self.basis
            .band_index(k)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    /// Coefficient of the normalized constant eigenfunction `(2π)^{-d/2}`.
    pub fn mean_mode(&self) -> f64 {
        self.coeffs[self.basis.zero_index()].re * self.basis.volume().sqrt()
    }

    /// Multiply every coefficient by `f(k, |k|²)`.
    pub fn map_spectral(&self, f: impl Fn([i64; 3], f64) -> Complex64) -> Self {
        let b = &self.basis;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * f(b.wavevector(i), b.k_squared()[i]))
            .collect();
        Self::from_coefficients_unchecked(b, coeffs)
    }

    /// `Δu`: multiplication by `-|k|²`.
    pub fn laplacian(&self) -> Self {
        self.map_spectral(|_, k2| Complex64::new(-k2, 0.0))
    }

    pub fn gradient(&self) -> VectorField {
        let components = (0..self.basis.dim())
            .map(|axis| self.map_spectral(|k, _| Complex64::new(0.0, k[axis] as f64)))
            .collect();
        VectorField { components }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Field {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Field) -> Result<Self> {
        self.check_basis(other)?;
        Ok(Field {
            basis: Arc::clone(&self.basis),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b * s)
                .collect(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b * s)
                .collect(),
        })
    }

    fn check_basis(&self, other: &Field) -> Result<()> {
        if self.basis.same_as(&other.basis) {
            Ok(())
        } else {
            Err(FchError::Contract("fields live on different bases".into()))
        }
    }

    /// `∫ a b dx` via Parseval.
    pub fn inner(&self, other: &Field) -> Result<f64> {
        self.check_basis(other)?;
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        Ok(self.basis.volume() * s)
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (self.basis.volume() * s).sqrt()
    }

    /// `∫ u dx`.
    pub fn integral(&self) -> f64 {
        self.coeffs[self.basis.zero_index()].re * self.basis.volume()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Same coefficients on a basis with a different grid but identical band.
    pub fn resampled(&self, basis: &BasisRef) -> Result<Self> {
        if basis.dim() != self.basis.dim() || basis.modes() != self.basis.modes() {
            return Err(FchError::Contract("resampling requires the same band".into()));
        }
        Ok(Self::from_coefficients_unchecked(basis, self.coeffs.clone()))
    }
}

impl VectorField {
    pub fn divergence(&self) -> Result<Field> {
        let first = self
            .components
            .first()
            .ok_or_else(|| FchError::Contract("empty vector field".into()))?;
        let basis = first.basis();
        if self.components.len() != basis.dim()
            || self.components.iter().any(|c| !c.basis().same_as(basis))
        {
            return Err(FchError::Contract(
                "vector field components must share one basis, one per axis".into(),
            ));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); basis.band_len()];
        for (axis, comp) in self.components.iter().enumerate() {
            for (i, (acc, c)) in coeffs.iter_mut().zip(comp.coefficients()).enumerate() {
                *acc += c * Complex64::new(0.0, basis.wavevector(i)[axis] as f64);
            }
        }
        Ok(Field::from_coefficients_unchecked(basis, coeffs))
    }

    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `‖self - other‖_{L²}`.
    pub fn distance(&self, other: &VectorField) -> Result<f64> {
        let mut s = 0.0;
        for (a, b) in self.components.iter().zip(&other.components) {
            s += a.axpy(-1.0, b)?.l2_norm().powi(2);
        }
        Ok(s.sqrt())
    }
}
