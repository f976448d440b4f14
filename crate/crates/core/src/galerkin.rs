//! Dense Galerkin assembly of the coefficient ODEs in the real orthonormal
//! eigenbasis of `-Δ`, by explicit quadrature.
//!
//! This is the slow reference that certifies [`crate::dynamics::rhs`]. It
//! never touches an FFT: fields are summed mode by mode at quadrature nodes.
//! Polynomial integrands use an oversampled trapezoidal rule (exact for trig
//! polynomials of the degrees involved). The mobility-weighted stiffness
//! integral is split at the crossings of the mobility cutoff along each
//! x-line and integrated with Gauss-Legendre on every smooth piece.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::dynamics::FchParams;
use crate::error::{FchError, Result};
use crate::spectral::{BasisRef, Field};

/// One-dimensional factor of a tensor-product eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode1d {
    Const,
    Cos(u32),
    Sin(u32),
}

impl Mode1d {
    fn wavenumber(self) -> f64 {
        match self {
            Mode1d::Const => 0.0,
            Mode1d::Cos(k) | Mode1d::Sin(k) => k as f64,
        }
    }

    /// Value and derivative at `x`, `L²(0,2π)`-normalized.
    #[inline]
    fn eval(self, x: f64) -> (f64, f64) {
        let c = 1.0 / PI.sqrt();
        match self {
            Mode1d::Const => (1.0 / (2.0 * PI).sqrt(), 0.0),
            Mode1d::Cos(k) => {
                let (s, co) = (k as f64 * x).sin_cos();
                (c * co, -c * k as f64 * s)
            }
            Mode1d::Sin(k) => {
                let (s, co) = (k as f64 * x).sin_cos();
                (c * s, c * k as f64 * co)
            }
        }
    }

    /// Coefficient of `e^{ikx}` in this function.
    fn fourier(self, k: i64) -> Complex64 {
        let c = 0.5 / PI.sqrt();
        match self {
            Mode1d::Const if k == 0 => Complex64::new(1.0 / (2.0 * PI).sqrt(), 0.0),
            Mode1d::Cos(m) if k.unsigned_abs() == m as u64 && m > 0 => Complex64::new(c, 0.0),
            Mode1d::Sin(m) if k == m as i64 && m > 0 => Complex64::new(0.0, -c),
            Mode1d::Sin(m) if k == -(m as i64) && m > 0 => Complex64::new(0.0, c),
            _ => Complex64::new(0.0, 0.0),
        }
    }
}

/// Real orthonormal eigenbasis `φ_j = Π_axis ψ(x_axis)` of `-Δ` on the torus,
/// for `|k_axis| ≤ N`, ordered by eigenvalue.
#[derive(Debug, Clone)]
pub struct RealBasis {
    dim: usize,
    modes: usize,
    functions: Vec<[Mode1d; 3]>,
    /// Eigenvalues of `-Δ` (nonnegative).
    eigenvalues: Vec<f64>,
}

impl RealBasis {
    pub fn new(dim: usize, modes: usize) -> Self {
        let mut axis = vec![Mode1d::Const];
        for k in 1..=modes as u32 {
            axis.push(Mode1d::Cos(k));
            axis.push(Mode1d::Sin(k));
        }
        let side = axis.len();
        let mut functions: Vec<[Mode1d; 3]> = (0..side.pow(dim as u32))
            .map(|mut idx| {
                let mut f = [Mode1d::Const; 3];
                for slot in f.iter_mut().take(dim) {
                    *slot = axis[idx % side];
                    idx /= side;
                }
                f
            })
            .collect();
        let lambda = |f: &[Mode1d; 3]| f.iter().map(|m| m.wavenumber().powi(2)).sum::<f64>();
        // Stable sort keeps the construction order inside each eigenspace.
        functions.sort_by(|a, b| lambda(a).total_cmp(&lambda(b)));
        let eigenvalues = functions.iter().map(lambda).collect();
        RealBasis {
            dim,
            modes,
            functions,
            eigenvalues,
        }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn functions(&self) -> &[[Mode1d; 3]] {
        &self.functions
    }

    /// `c_j = ∫ u φ_j dx` for a band-limited field on a matching band.
    pub fn coefficients_of(&self, field: &Field) -> Result<Vec<f64>> {
        let b = field.basis();
        if b.dim() != self.dim || b.modes() != self.modes {
            return Err(FchError::Contract("real basis and field band differ".into()));
        }
        Ok(self
            .functions
            .iter()
            .map(|f| {
                let s: Complex64 = field
                    .coefficients()
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c * self.fourier(f, b.wavevector(i)).conj())
                    .sum();
                s.re * b.volume()
            })
            .collect())
    }

    /// Band-limited field `Σ c_j φ_j` on the given Fourier basis.
    pub fn to_field(&self, basis: &BasisRef, coeffs: &[f64]) -> Result<Field> {
        if basis.dim() != self.dim || basis.modes() != self.modes || coeffs.len() != self.len() {
            return Err(FchError::Contract("real basis and field band differ".into()));
        }
        let spectral = (0..basis.band_len())
            .map(|i| {
                let k = basis.wavevector(i);
                self.functions
                    .iter()
                    .zip(coeffs)
                    .map(|(f, &c)| self.fourier(f, k) * c)
                    .sum()
            })
            .collect();
        Field::from_spectral(basis, spectral)
    }

    fn fourier(&self, f: &[Mode1d; 3], k: [i64; 3]) -> Complex64 {
        (0..self.dim).map(|a| f[a].fourier(k[a])).product()
    }

    /// Values and gradients of every basis function at `x`.
    fn eval_all(&self, x: &[f64; 3], values: &mut [f64], grads: &mut [[f64; 3]]) {
        let mut per_axis = [[(0.0, 0.0); 3]; 3];
        for (j, f) in self.functions.iter().enumerate() {
            for a in 0..self.dim {
                per_axis[a][0] = f[a].eval(x[a]);
            }
            let mut v = 1.0;
            for pa in per_axis.iter().take(self.dim) {
                v *= pa[0].0;
            }
            values[j] = v;
            for a in 0..self.dim {
                let mut g = per_axis[a][0].1;
                for (b, pb) in per_axis.iter().enumerate().take(self.dim) {
                    if b != a {
                        g *= pb[0].0;
                    }
                }
                grads[j][a] = g;
            }
        }
    }
}

/// Maximum modes per axis accepted by the dense oracle, for `d = 1, 2, 3`.
pub const ORACLE_CAP: [usize; 3] = [8, 2, 1];

/// Dense reference for the Galerkin coefficient ODEs.
#[derive(Debug, Clone)]
pub struct DenseGalerkin {
    basis: RealBasis,
    params: FchParams,
    /// Trapezoid points per axis for polynomial integrands.
    quad_points: usize,
    gauss: (Vec<f64>, Vec<f64>),
}

impl DenseGalerkin {
    pub fn new(dim: usize, modes: usize, params: FchParams) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(FchError::Contract(format!("dimension {dim} is not 1, 2 or 3")));
        }
        let cap = ORACLE_CAP[dim - 1];
        if modes > cap {
            return Err(FchError::OracleCap { dim, modes, cap });
        }
        let m = params.potential.degree().max(2);
        // W''W'φ_j has band (2m-2)N; oversample that by 2.
        let quad_points = 2 * ((2 * m - 2) * modes + 1) + 8;
        Ok(DenseGalerkin {
            basis: RealBasis::new(dim, modes),
            params,
            quad_points,
            gauss: gauss_legendre(20),
        })
    }

    pub fn basis(&self) -> &RealBasis {
        &self.basis
    }

    fn trapezoid_nodes(&self) -> Vec<[f64; 3]> {
        let q = self.quad_points;
        let dim = self.basis.dim;
        let h = 2.0 * PI / q as f64;
        (0..q.pow(dim as u32))
            .map(|mut idx| {
                let mut x = [0.0; 3];
                for slot in x.iter_mut().take(dim) {
                    *slot = h * (idx % q) as f64;
                    idx /= q;
                }
                x
            })
            .collect()
    }

    fn field_at(&self, coeffs: &[f64], values: &[f64]) -> f64 {
        coeffs.iter().zip(values).map(|(c, v)| c * v).sum()
    }

    /// Chemical-potential coefficients `d_j` of the Galerkin system, term by
    /// term: `(Λ_j² + ηΛ_j)c_j + ∫W″W′φ_j - (Λ_j + η)∫W′φ_j - Σ_k Λ_k c_k ∫W″φ_kφ_j`
    /// with `Λ_j = -λ_j` the eigenvalues of `Δ`.
    pub fn mu_coefficients(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let n = self.basis.len();
        if coeffs.len() != n {
            return Err(FchError::Contract(format!(
                "expected {n} coefficients, got {}",
                coeffs.len()
            )));
        }
        let w = &self.params.potential;
        let eta = self.params.eta;
        let nodes = self.trapezoid_nodes();
        let weight = (2.0 * PI / self.quad_points as f64).powi(self.basis.dim as i32);

        let mut p_w1w2 = vec![0.0; n];
        let mut p_w1 = vec![0.0; n];
        let mut gram = vec![0.0; n * n];
        let mut values = vec![0.0; n];
        let mut grads = vec![[0.0; 3]; n];
        for x in &nodes {
            self.basis.eval_all(x, &mut values, &mut grads);
            let u = self.field_at(coeffs, &values);
            let (w1, w2) = (w.dw(u), w.d2w(u));
            for j in 0..n {
                p_w1w2[j] += weight * w2 * w1 * values[j];
                p_w1[j] += weight * w1 * values[j];
                for k in 0..n {
                    gram[k * n + j] += weight * w2 * values[k] * values[j];
                }
            }
        }
        let lam: Vec<f64> = self.basis.eigenvalues.iter().map(|l| -l).collect();
        Ok((0..n)
            .map(|j| {
                let coupling: f64 = (0..n).map(|k| lam[k] * coeffs[k] * gram[k * n + j]).sum();
                (lam[j] * lam[j] + eta * lam[j]) * coeffs[j] + p_w1w2[j]
                    - (lam[j] + eta) * p_w1[j]
                    - coupling
            })
            .collect())
    }

    /// Mobility-weighted stiffness `K_kj = ∫ M(u) ∇φ_k·∇φ_j dx`.
    pub fn stiffness(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = self.basis.len();
        let dim = self.basis.dim;
        let mobility = self.params.mobility;
        let cutoff = mobility.floor();
        let q = self.quad_points;
        let h = 2.0 * PI / q as f64;
        let line_weight = h.powi(dim as i32 - 1);
        let mut k_mat = vec![0.0; n * n];
        let mut values = vec![0.0; n];
        let mut grads = vec![[0.0; 3]; n];

        // Sample density for locating cutoff crossings along a line.
        let samples = 64 * (2 * self.basis.modes + 1);
        let max_piece = 2.0 * PI / (2 * self.basis.modes + 2) as f64;
        let (gx, gw) = &self.gauss;

        for line in 0..q.pow(dim as u32 - 1) {
            let mut base = [0.0; 3];
            let mut rest = line;
            for slot in base.iter_mut().take(dim).skip(1) {
                *slot = h * (rest % q) as f64;
                rest /= q;
            }
            let u_at = |x: f64, values: &mut [f64], grads: &mut [[f64; 3]]| {
                let mut p = base;
                p[0] = x;
                self.basis.eval_all(&p, values, grads);
                self.field_at(coeffs, values)
            };

            let mut breaks = vec![0.0];
            let step = 2.0 * PI / samples as f64;
            let mut prev = u_at(0.0, &mut values, &mut grads) - cutoff;
            for s in 1..=samples {
                let x = step * s as f64;
                let cur = u_at(x, &mut values, &mut grads) - cutoff;
                if (prev > 0.0) != (cur > 0.0) {
                    let (mut lo, mut hi) = (x - step, x);
                    let lo_positive = prev > 0.0;
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if mid <= lo || mid >= hi {
                            break;
                        }
                        if (u_at(mid, &mut values, &mut grads) - cutoff > 0.0) == lo_positive {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    breaks.push(0.5 * (lo + hi));
                }
                prev = cur;
            }
            breaks.push(2.0 * PI);

            for seg in breaks.windows(2) {
                let (a, b) = (seg[0], seg[1]);
                if b <= a {
                    continue;
                }
                let pieces = ((b - a) / max_piece).ceil().max(1.0) as usize;
                let len = (b - a) / pieces as f64;
                for piece in 0..pieces {
                    let left = a + len * piece as f64;
                    for (xi, wi) in gx.iter().zip(gw) {
                        let x = left + 0.5 * len * (xi + 1.0);
                        let u = u_at(x, &mut values, &mut grads);
                        let m = mobility.eval(u) * wi * 0.5 * len * line_weight;
                        for k in 0..n {
                            for j in 0..n {
                                let dot: f64 = (0..dim).map(|a| grads[k][a] * grads[j][a]).sum();
                                k_mat[k * n + j] += m * dot;
                            }
                        }
                    }
                }
            }
        }
        k_mat
    }

    /// `∂_t c_j = -Σ_k d_k ∫ M(u)∇φ_k·∇φ_j dx`.
    pub fn rhs(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let d = self.mu_coefficients(coeffs)?;
        let k_mat = self.stiffness(coeffs);
        let n = self.basis.len();
        Ok((0..n)
            .map(|j| -(0..n).map(|k| d[k] * k_mat[k * n + j]).sum::<f64>())
            .collect())
    }
}

/// Dense Galerkin right-hand side for a coefficient vector in the real basis
/// of `dim` dimensions with `modes` wavenumbers per axis.
pub fn galerkin_rhs_dense(
    coeffs: &[f64],
    dim: usize,
    modes: usize,
    params: &FchParams,
) -> Result<Vec<f64>> {
    DenseGalerkin::new(dim, modes, params.clone())?.rhs(coeffs)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}
