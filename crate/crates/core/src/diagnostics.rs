//! Scalar functionals along a trajectory and the residuals of the energy and
//! entropy identities.
//!
//! Every grid functional is a trapezoidal sum on the field's collocation
//! grid. Polynomial integrands are exact once the grid resolves their band;
//! integrands built from `M(u)`, `Φ_θ(u)` or `min(u, 0)` are not band-limited
//! and converge with grid refinement.

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, Evaluation, FchParams};
use crate::mobility::regularized_entropy;
use crate::spectral::Field;

/// Time-stamped scalars written once per output time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub dissipation_rate: f64,
    pub cumulative_dissipation: f64,
    pub entropy: f64,
    pub negativity: f64,
    pub min_u: f64,
    pub h2_norm: f64,
    pub omega_l2: f64,
    /// `∫ ∇μ·∇u dx` at `t`.
    pub entropy_flux: f64,
    /// `∫₀ᵗ ∫ ∇μ·∇u dx dτ`, trapezoidal in time.
    pub cumulative_entropy_flux: f64,
}

/// Column names of the time-series CSV, in order.
pub const CSV_HEADER: [&str; 10] = [
    "t",
    "mass",
    "energy",
    "dissipation_rate",
    "cumulative_dissipation",
    "entropy",
    "negativity",
    "min_u",
    "h2_norm",
    "omega_l2",
];

impl DiagnosticsRecord {
    /// Values in [`CSV_HEADER`] order.
    pub fn csv_values(&self) -> [f64; 10] {
        [
            self.t,
            self.mass,
            self.energy,
            self.dissipation_rate,
            self.cumulative_dissipation,
            self.entropy,
            self.negativity,
            self.min_u,
            self.h2_norm,
            self.omega_l2,
        ]
    }
}

/// Per-step statistics gathered by the integrator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest `F(t_{n+1}) - F(t_n)` over accepted steps (may be negative).
    pub max_energy_increase: f64,
    /// Largest `|F_{n+1} - F_n + dt(D_n + D_{n+1})/2|` over accepted steps.
    pub max_step_residual: f64,
    pub min_dt: f64,
    pub max_dt: f64,
}

/// Records of one run plus its step statistics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub records: Vec<DiagnosticsRecord>,
    pub steps: StepStats,
    /// Set when `h2_norm` exceeded the configured growth factor.
    pub stability_warning: bool,
}

/// `F(u) = ∫ ½|-Δu + W′(u)|² - η(½|∇u|² + W(u)) dx`.
pub fn energy(u: &Field, params: &FchParams) -> f64 {
    let lap = u.laplacian();
    let grad = u.gradient();
    energy_with(u, params, &lap, &grad)
}

fn energy_with(
    u: &Field,
    params: &FchParams,
    lap: &Field,
    grad: &crate::spectral::VectorField,
) -> f64 {
    let w = &params.potential;
    let n = u.values().len();
    let mut s = 0.0;
    for i in 0..n {
        let v = u.values()[i];
        let om = w.dw(v) - lap.values()[i];
        let g2: f64 = grad.components.iter().map(|c| c.values()[i].powi(2)).sum();
        s += 0.5 * om * om - params.eta * (0.5 * g2 + w.w(v));
    }
    s * u.basis().cell_volume()
}

/// `∫ M(u)|∇μ|² dx` with `∇μ` from the four-term flux.
pub fn dissipation_rate(u: &Field, params: &FchParams) -> f64 {
    dynamics::evaluate(u, params).dissipation
}

/// `∫ Φ_θ(u) dx`.
pub fn entropy_integral(u: &Field, theta: f64) -> f64 {
    let s: f64 = u.values().iter().map(|&v| regularized_entropy(theta, v)).sum();
    s * u.basis().cell_volume()
}

/// `∫ |min(u, 0) + θ|² dx`.
pub fn negativity(u: &Field, theta: f64) -> f64 {
    let s: f64 = u.values().iter().map(|&v| (v.min(0.0) + theta).powi(2)).sum();
    s * u.basis().cell_volume()
}

/// `∫ |min(u, 0)|² dx`, reported alongside [`negativity`] but not asserted.
pub fn negative_part_l2_squared(u: &Field) -> f64 {
    let s: f64 = u.values().iter().map(|&v| v.min(0.0).powi(2)).sum();
    s * u.basis().cell_volume()
}

/// `∫ u dx`.
pub fn mass(u: &Field) -> f64 {
    u.integral()
}

/// `(‖u‖_{H²}, ‖ω‖_{L²})` with the `H²` weight `1 + |k|² + |k|⁴`.
pub fn monitored_norms(u: &Field, params: &FchParams) -> (f64, f64) {
    let omega = omega_grid_l2(&dynamics::evaluate(u, params).omega_grid, u);
    (h2_norm(u), omega)
}

fn h2_norm(u: &Field) -> f64 {
    let b = u.basis();
    let s: f64 = u
        .coefficients()
        .iter()
        .zip(b.k_squared())
        .map(|(c, &k2)| (1.0 + k2 + k2 * k2) * c.norm_sqr())
        .sum();
    (b.volume() * s).sqrt()
}

fn omega_grid_l2(omega: &[f64], u: &Field) -> f64 {
    (omega.iter().map(|w| w * w).sum::<f64>() * u.basis().cell_volume()).sqrt()
}

/// Assemble a record from a state and its evaluation.
pub fn record(
    t: f64,
    u: &Field,
    params: &FchParams,
    eval: &Evaluation,
    cumulative_dissipation: f64,
    cumulative_entropy_flux: f64,
) -> DiagnosticsRecord {
    let theta = params.mobility.floor();
    DiagnosticsRecord {
        t,
        mass: mass(u),
        energy: energy(u, params),
        dissipation_rate: eval.dissipation,
        cumulative_dissipation,
        entropy: entropy_integral(u, theta),
        negativity: negativity(u, theta),
        min_u: u.min_value(),
        h2_norm: h2_norm(u),
        omega_l2: omega_grid_l2(&eval.omega_grid, u),
        entropy_flux: eval.entropy_flux,
        cumulative_entropy_flux,
    }
}

/// Residuals `r(t) = F(t) + D(0,t) - F(0)` of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyResidual {
    pub residuals: Vec<f64>,
    pub max_abs: f64,
    /// Largest per-step energy increase among accepted steps.
    pub max_energy_increase: f64,
}

pub fn energy_identity_residual(series: &DiagnosticsSeries) -> EnergyResidual {
    let f0 = series.records.first().map_or(0.0, |r| r.energy);
    let residuals: Vec<f64> = series
        .records
        .iter()
        .map(|r| r.energy + r.cumulative_dissipation - f0)
        .collect();
    EnergyResidual {
        max_abs: residuals.iter().fold(0.0, |m, r| m.max(r.abs())),
        residuals,
        max_energy_increase: series.steps.max_energy_increase,
    }
}

/// Residuals of `∫Φ_θ(u(t)) - ∫Φ_θ(u₀) + ∫₀ᵗ∫∇μ·∇u dx dτ` per record.
pub fn entropy_identity_residual(series: &DiagnosticsSeries) -> Vec<f64> {
    let e0 = series.records.first().map_or(0.0, |r| r.entropy);
    series
        .records
        .iter()
        .map(|r| r.entropy - e0 + r.cumulative_entropy_flux)
        .collect()
}

/// `θ² + θ + θ^{1/2}`.
pub fn negativity_scale(theta: f64) -> f64 {
    theta * theta + theta + theta.sqrt()
}

/// Per-θ entry of a negativity report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativityEntry {
    pub theta: f64,
    pub negativity_sup: f64,
    /// `sup_t negativity / (θ² + θ + θ^{1/2})`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativityReport {
    pub entries: Vec<NegativityEntry>,
    pub max_ratio: f64,
    pub cap: f64,
    pub passed: bool,
}

/// Compare `max_θ R(θ)` against a recorded cap.
pub fn negativity_bound_check(runs: &[(f64, &DiagnosticsSeries)], cap: f64) -> NegativityReport {
    let entries: Vec<NegativityEntry> = runs
        .iter()
        .map(|&(theta, series)| {
            let sup = series
                .records
                .iter()
                .map(|r| r.negativity)
                .fold(f64::NEG_INFINITY, f64::max);
            NegativityEntry {
                theta,
                negativity_sup: sup,
                ratio: sup / negativity_scale(theta),
            }
        })
        .collect();
    let max_ratio = entries.iter().map(|e| e.ratio).fold(f64::NEG_INFINITY, f64::max);
    NegativityReport {
        passed: entries.iter().all(|e| e.ratio.is_finite()) && max_ratio <= cap,
        entries,
        max_ratio,
        cap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Basis;
    use std::f64::consts::PI;

    fn params() -> FchParams {
        FchParams::example(1.0, 0.1).unwrap()
    }

    #[test]
    fn constant_field_values() {
        let b = Basis::with_auto_grid(1, 4, 4).unwrap();
        let p = params();
        assert_eq!(energy(&Field::zeros(&b), &p), 0.0);
        assert!((energy(&Field::constant(&b, 1.0), &p) - PI).abs() < 1e-13);
        assert!(entropy_integral(&Field::constant(&b, 1.0), 0.1).abs() < 1e-15);
        assert!((entropy_integral(&Field::zeros(&b), 0.1) - 0.95 * 2.0 * PI).abs() < 1e-13);
        assert!((negativity(&Field::constant(&b, 1.0), 0.1) - 0.01 * 2.0 * PI).abs() < 1e-14);
        assert!((negativity(&Field::constant(&b, -1.0), 0.1) - 0.81 * 2.0 * PI).abs() < 1e-13);
        assert!((mass(&Field::constant(&b, 0.3)) - 0.6 * PI).abs() < 1e-15);
        assert!(dissipation_rate(&Field::constant(&b, 0.3), &p) < 1e-25);
    }

    #[test]
    fn cosine_norms() {
        let b = Basis::with_auto_grid(1, 4, 4).unwrap();
        let u = Field::from_fn(&b, |x| x[0].cos());
        assert!(mass(&u).abs() < 1e-14);
        let (h2, _) = monitored_norms(&u, &params());
        assert!((h2 * h2 - 3.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn negativity_is_exact_for_nonnegative_fields() {
        let b = Basis::with_auto_grid(2, 3, 4).unwrap();
        let u = Field::from_fn(&b, |x| 1.0 + 0.5 * x[0].cos() * x[1].sin());
        let expected = 0.01 * (2.0 * PI).powi(2);
        assert!((negativity(&u, 0.1) - expected).abs() <= 1e-12 * expected);
        assert_eq!(negative_part_l2_squared(&u), 0.0);
    }

    #[test]
    fn bound_scale_arithmetic() {
        assert!((negativity_scale(0.25) - 0.8125).abs() < 1e-15);
    }
}
