//! First-order IMEX integration with sixth-order diagonal stabilization and
//! step control on the discrete energy identity.
//!
//! One step solves `(1 + dt·A|k|⁶) û' = û + dt·(rhŝ(u) + A|k|⁶ û)` with
//! `A = max_x M(u)`. The trial step is accepted when
//! `|F(u') - F(u) + dt(D(u) + D(u'))/2| ≤ tol`; otherwise dt is halved.
//! The state is advanced in spectral space only, so the mean coefficient is
//! carried through unchanged.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, DiagnosticsRecord, DiagnosticsSeries, StepStats};
use crate::dynamics::{self, Evaluation, FchParams};
use crate::error::{FchError, Result};
use crate::spectral::Field;

/// Accepts after which the step size is doubled.
const GROWTH_STREAK: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepControl {
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub energy_residual_tol: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.dt_min) || !ok(self.dt_init) || !ok(self.dt_max) {
            return Err(FchError::Config("step sizes must be positive and finite".into()));
        }
        if !(self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return Err(FchError::Config(
                "step control requires dt_min <= dt_init <= dt_max".into(),
            ));
        }
        if !ok(self.energy_residual_tol) {
            return Err(FchError::Config("energy_residual_tol must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(FchError::Config("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Scalars of the current state that the next step reuses.
#[derive(Debug, Clone)]
struct Cached {
    energy: f64,
    eval: Evaluation,
}

#[derive(Debug, Clone)]
pub struct TrajectoryState {
    pub t: f64,
    pub u: Field,
    /// `∫₀ᵗ ∫ M(u)|∇μ|² dx dτ`.
    pub cumulative_dissipation: f64,
    /// `∫₀ᵗ ∫ ∇μ·∇u dx dτ`.
    pub cumulative_entropy_flux: f64,
    pub step_count: usize,
    /// Step size the controller will try next.
    pub dt: f64,
    pub stats: StepStats,
    streak: usize,
    cached: Cached,
}

impl TrajectoryState {
    pub fn new(u: Field, params: &FchParams, control: &StepControl) -> Result<Self> {
        if !u.is_finite() {
            return Err(FchError::NonFinite { t: 0.0 });
        }
        let cached = Cached {
            energy: diagnostics::energy(&u, params),
            eval: dynamics::evaluate(&u, params),
        };
        Ok(TrajectoryState {
            t: 0.0,
            u,
            cumulative_dissipation: 0.0,
            cumulative_entropy_flux: 0.0,
            step_count: 0,
            dt: control.dt_init,
            stats: StepStats {
                min_dt: f64::INFINITY,
                max_dt: 0.0,
                max_energy_increase: f64::NEG_INFINITY,
                ..StepStats::default()
            },
            streak: 0,
            cached,
        })
    }

    pub fn energy(&self) -> f64 {
        self.cached.energy
    }

    pub fn evaluation(&self) -> &Evaluation {
        &self.cached.eval
    }

    pub fn record(&self, params: &FchParams) -> DiagnosticsRecord {
        diagnostics::record(
            self.t,
            &self.u,
            params,
            &self.cached.eval,
            self.cumulative_dissipation,
            self.cumulative_entropy_flux,
        )
    }
}

/// One stabilized IMEX update of size `dt`, without step control.
pub fn imex_update(u: &Field, eval: &Evaluation, dt: f64) -> Field {
    let basis = u.basis();
    let a = eval.max_mobility;
    let coeffs = u
        .coefficients()
        .iter()
        .zip(eval.rhs.coefficients())
        .zip(basis.k_squared())
        .map(|((c, r), &k2)| {
            let s = a * k2 * k2 * k2;
            (c + (r + c * s) * dt) / (1.0 + dt * s)
        })
        .collect();
    Field::from_spectral(basis, coeffs).expect("same band")
}

/// Advance by one accepted step, never past `t_limit`.
pub fn step_until(
    state: &TrajectoryState,
    params: &FchParams,
    control: &StepControl,
    t_limit: f64,
) -> Result<TrajectoryState> {
    if state.step_count >= control.max_steps {
        return Err(FchError::Contract(format!(
            "max_steps = {} reached at t = {}",
            control.max_steps, state.t
        )));
    }
    let mut dt = state.dt.min(control.dt_max);
    let mut rejected = 0;
    loop {
        let remaining = t_limit - state.t;
        let landing = dt >= remaining - 1e-9 * dt;
        let taken = if landing { remaining } else { dt };
        let u_new = imex_update(&state.u, &state.cached.eval, taken);
        let t_new = if landing { t_limit } else { state.t + taken };
        if !u_new.is_finite() {
            return Err(FchError::NonFinite { t: t_new });
        }
        let eval = dynamics::evaluate(&u_new, params);
        let energy = diagnostics::energy(&u_new, params);
        if !energy.is_finite() || !eval.dissipation.is_finite() {
            return Err(FchError::NonFinite { t: t_new });
        }
        let d_inc = 0.5 * taken * (state.cached.eval.dissipation + eval.dissipation);
        let residual = energy - state.cached.energy + d_inc;
        if residual.abs() <= control.energy_residual_tol {
            let mut stats = state.stats;
            stats.accepted += 1;
            stats.rejected += rejected;
            stats.max_energy_increase = stats.max_energy_increase.max(energy - state.cached.energy);
            stats.max_step_residual = stats.max_step_residual.max(residual.abs());
            stats.min_dt = stats.min_dt.min(taken);
            stats.max_dt = stats.max_dt.max(taken);
            let mut streak = if rejected == 0 { state.streak + 1 } else { 1 };
            if streak >= GROWTH_STREAK {
                dt = (2.0 * dt).min(control.dt_max);
                streak = 0;
            }
            let flux_inc = 0.5 * taken * (state.cached.eval.entropy_flux + eval.entropy_flux);
            return Ok(TrajectoryState {
                t: t_new,
                u: u_new,
                cumulative_dissipation: state.cumulative_dissipation + d_inc,
                cumulative_entropy_flux: state.cumulative_entropy_flux + flux_inc,
                step_count: state.step_count + 1,
                dt,
                stats,
                streak,
                cached: Cached { energy, eval },
            });
        }
        rejected += 1;
        log::debug!("rejected dt = {taken:e} at t = {}: residual {residual:e}", state.t);
        if 0.5 * taken < control.dt_min {
            return Err(FchError::StepFailure {
                t: state.t,
                dt: 0.5 * taken,
                residual,
                tolerance: control.energy_residual_tol,
            });
        }
        dt = 0.5 * taken;
    }
}

/// Advance by one accepted step.
pub fn step(state: &TrajectoryState, params: &FchParams, control: &StepControl) -> Result<TrajectoryState> {
    step_until(state, params, control, f64::INFINITY)
}

/// Output times and monitoring for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub t_end: f64,
    /// Time between records; the final record is always at `t_end`.
    pub cadence: f64,
    /// Flag a stability warning when `h2_norm` exceeds this multiple of its
    /// initial value.
    pub h2_growth_limit: f64,
}

impl Schedule {
    pub fn new(t_end: f64, cadence: f64) -> Self {
        Schedule {
            t_end,
            cadence,
            h2_growth_limit: 1e3,
        }
    }

    /// Record times after `t = 0`.
    pub fn record_times(&self) -> Vec<f64> {
        if !(self.t_end > 0.0) {
            return Vec::new();
        }
        let mut times = Vec::new();
        let mut k = 1u64;
        loop {
            let t = k as f64 * self.cadence;
            if t >= self.t_end * (1.0 - 1e-12) {
                break;
            }
            times.push(t);
            k += 1;
        }
        times.push(self.t_end);
        times
    }
}

/// Callback invoked synchronously at every record, in registration order.
pub trait Observer {
    fn observe(&mut self, record: &DiagnosticsRecord, state: &TrajectoryState) -> Result<()>;
}

impl<F: FnMut(&DiagnosticsRecord, &TrajectoryState) -> Result<()>> Observer for F {
    fn observe(&mut self, record: &DiagnosticsRecord, state: &TrajectoryState) -> Result<()> {
        self(record, state)
    }
}

/// Integrate from `u0` to `schedule.t_end`.
pub fn integrate(
    u0: Field,
    params: &FchParams,
    control: &StepControl,
    schedule: &Schedule,
    observers: &mut [&mut dyn Observer],
) -> Result<(TrajectoryState, DiagnosticsSeries)> {
    control.validate()?;
    if !(schedule.t_end >= 0.0) || !(schedule.cadence > 0.0) {
        return Err(FchError::Config("t_end must be >= 0 and cadence > 0".into()));
    }
    let mut state = TrajectoryState::new(u0, params, control)?;
    let mut series = DiagnosticsSeries::default();
    let emit = |state: &TrajectoryState,
                    series: &mut DiagnosticsSeries,
                    observers: &mut [&mut dyn Observer]|
     -> Result<()> {
        let rec = state.record(params);
        if let Some(first) = series.records.first() {
            if rec.h2_norm > schedule.h2_growth_limit * first.h2_norm && !series.stability_warning {
                log::warn!("h2 norm grew to {:e} at t = {}", rec.h2_norm, rec.t);
                series.stability_warning = true;
            }
        }
        series.steps = state.stats;
        for obs in observers.iter_mut() {
            obs.observe(&rec, state)?;
        }
        series.records.push(rec);
        Ok(())
    };
    emit(&state, &mut series, observers)?;
    for t_rec in schedule.record_times() {
        while state.t < t_rec {
            state = step_until(&state, params, control, t_rec)?;
        }
        emit(&state, &mut series, observers)?;
    }
    if series.steps.accepted == 0 {
        series.steps.min_dt = 0.0;
        series.steps.max_energy_increase = 0.0;
    }
    Ok((state, series))
}
