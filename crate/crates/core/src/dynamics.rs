//! The FCH operator chain evaluated pseudospectrally.
//!
//! Nonlinear terms are formed pointwise on the collocation grid from the
//! *unprojected* `ω = -Δu + W′(u)` and projected back onto the band, which
//! is the Galerkin projection whenever the grid resolves the products
//! (see [`Basis::auto_grid`](crate::spectral::Basis::auto_grid)).

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FchError, Result};
use crate::mobility::MobilitySpec;
use crate::potential::PotentialSpec;
use crate::spectral::{Field, VectorField};

/// Model parameters: functionalization `η`, potential and mobility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FchParams {
    pub eta: f64,
    pub potential: PotentialSpec,
    pub mobility: MobilitySpec,
}

impl FchParams {
    pub fn new(eta: f64, potential: PotentialSpec, mobility: MobilitySpec) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(FchError::Config(format!("eta = {eta} must be positive")));
        }
        Ok(FchParams {
            eta,
            potential,
            mobility,
        })
    }

    /// Example potential with regularized mobility.
    pub fn example(eta: f64, theta: f64) -> Result<Self> {
        Self::new(eta, PotentialSpec::example(), MobilitySpec::regularized(theta)?)
    }
}

/// Everything the time stepper and the diagnostics need at one state.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// `ω = -Δu + W′(u)` on the grid, not projected.
    pub omega_grid: Vec<f64>,
    /// Band projection of `ω`.
    pub omega: Field,
    /// Band projection of `μ`.
    pub mu: Field,
    /// Four-term flux gradient, truncated to the band.
    pub grad_mu: VectorField,
    /// `∇·(M(u)∇μ)` projected onto the band.
    pub rhs: Field,
    /// `∫ M(u)|∇μ|² dx` on the collocation grid.
    pub dissipation: f64,
    /// `∫ ∇μ·∇u dx`.
    pub entropy_flux: f64,
    /// `max_x M(u(x))`.
    pub max_mobility: f64,
}

fn omega_grid(u: &Field, params: &FchParams) -> Vec<f64> {
    let lap = u.laplacian();
    u.values()
        .iter()
        .zip(lap.values())
        .map(|(&v, &l)| params.potential.dw(v) - l)
        .collect()
}

/// `ω = -Δu + W′(u)`, projected onto the band.
pub fn omega(u: &Field, params: &FchParams) -> Field {
    let basis = u.basis();
    Field::from_coefficients_unchecked(basis, basis.project(&omega_grid(u, params)))
}

fn mu_from(u: &Field, params: &FchParams, omega_full: &[f64], omega: &Field) -> Field {
    let basis = u.basis();
    let product: Vec<f64> = u
        .values()
        .iter()
        .zip(omega_full)
        .map(|(&v, &w)| params.potential.d2w(v) * w)
        .collect();
    let projected = basis.project(&product);
    let coeffs = omega
        .coefficients()
        .iter()
        .zip(&projected)
        .zip(basis.k_squared())
        .map(|((w, p), &k2)| w * (k2 - params.eta) + p)
        .collect();
    Field::from_coefficients_unchecked(basis, coeffs)
}

/// `μ = -Δω + W″(u)ω - ηω`, projected onto the band.
pub fn mu(u: &Field, params: &FchParams) -> Field {
    let full = omega_grid(u, params);
    let om = Field::from_coefficients_unchecked(u.basis(), u.basis().project(&full));
    mu_from(u, params, &full, &om)
}

fn flux_from(u: &Field, params: &FchParams, omega_full: &[f64], omega: &Field) -> VectorField {
    let basis = u.basis();
    let w = &params.potential;
    let grad_u = u.gradient();
    let grad_lap_u = u.laplacian().gradient();
    let components = (0..basis.dim())
        .map(|axis| {
            let gu = grad_u.components[axis].values();
            let glu = grad_lap_u.components[axis].values();
            let local: Vec<f64> = u
                .values()
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let w2 = w.d2w(v);
                    let grad_omega = w2 * gu[i] - glu[i];
                    w.d3w(v) * gu[i] * omega_full[i] + (w2 - params.eta) * grad_omega
                })
                .collect();
            let projected = basis.project(&local);
            let coeffs = projected
                .iter()
                .zip(omega.coefficients())
                .enumerate()
                .map(|(i, (p, om))| {
                    let k = basis.wavevector(i)[axis] as f64;
                    p + om * Complex64::new(0.0, k * basis.k_squared()[i])
                })
                .collect();
            Field::from_coefficients_unchecked(basis, coeffs)
        })
        .collect();
    VectorField { components }
}

/// `∇μ = -∇Δω + W‴(u)ω∇u + W″(u)∇ω - η∇ω`, truncated to the band.
pub fn flux_grad_mu(u: &Field, params: &FchParams) -> VectorField {
    let full = omega_grid(u, params);
    let om = Field::from_coefficients_unchecked(u.basis(), u.basis().project(&full));
    flux_from(u, params, &full, &om)
}

/// Full evaluation at `u`: ω, μ, ∇μ, the right-hand side and the grid
/// dissipation, sharing intermediate transforms.
pub fn evaluate(u: &Field, params: &FchParams) -> Evaluation {
    let basis = u.basis();
    let omega_full = omega_grid(u, params);
    let omega = Field::from_coefficients_unchecked(basis, basis.project(&omega_full));
    let mu = mu_from(u, params, &omega_full, &omega);
    let grad_mu = flux_from(u, params, &omega_full, &omega);

    let mobility: Vec<f64> = u.values().iter().map(|&v| params.mobility.eval(v)).collect();
    let max_mobility = mobility.iter().copied().fold(0.0, f64::max);
    let mut rhs = vec![Complex64::new(0.0, 0.0); basis.band_len()];
    let mut dissipation = 0.0;
    for (axis, g) in grad_mu.components.iter().enumerate() {
        let flux: Vec<f64> = g.values().iter().zip(&mobility).map(|(a, m)| a * m).collect();
        dissipation += g.values().iter().zip(&flux).map(|(a, q)| a * q).sum::<f64>();
        let projected = basis.project(&flux);
        for (i, (acc, q)) in rhs.iter_mut().zip(&projected).enumerate() {
            *acc += q * Complex64::new(0.0, basis.wavevector(i)[axis] as f64);
        }
    }
    let rhs = Field::from_coefficients_unchecked(basis, rhs);
    let grad_u = u.gradient();
    let entropy_flux = grad_mu
        .components
        .iter()
        .zip(&grad_u.components)
        .map(|(a, b)| a.inner(b).expect("same basis"))
        .sum();
    Evaluation {
        omega_grid: omega_full,
        omega,
        mu,
        grad_mu,
        rhs,
        dissipation: dissipation * basis.cell_volume(),
        entropy_flux,
        max_mobility,
    }
}

/// Semi-discrete right-hand side `∇·(M(u)∇μ)`.
pub fn rhs(u: &Field, params: &FchParams) -> Field {
    evaluate(u, params).rhs
}

/// Growth rate of a Fourier mode under the dispersion relation
/// `σ(k) = -k²·M(0)·(k²W″(0) - η)·(k² + W″(0))`.
pub fn linear_growth_rate(k_squared: f64, mobility_at_zero: f64, w2_at_zero: f64, eta: f64) -> f64 {
    -k_squared * mobility_at_zero * (k_squared * w2_at_zero - eta) * (k_squared + w2_at_zero)
}

/// Exact growth rate of the linearization of the flow about the constant
/// state `ū` with frozen mobility `M(ū)`:
/// `σ(k) = -k²M(ū)[(k² + W″(ū) - η)(k² + W″(ū)) + W‴(ū)W′(ū)]`.
pub fn linearized_growth_rate(params: &FchParams, ubar: f64, k_squared: f64) -> f64 {
    let w = &params.potential;
    let (w1, w2, w3) = (w.dw(ubar), w.d2w(ubar), w.d3w(ubar));
    -k_squared
        * params.mobility.eval(ubar)
        * ((k_squared + w2 - params.eta) * (k_squared + w2) + w3 * w1)
}
