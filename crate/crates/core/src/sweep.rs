//! θ-continuation: independent runs over a decreasing θ sequence from shared
//! initial data, compared at matched times.

use std::path::Path;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::diagnostics::{negativity_scale, DiagnosticsRecord, DiagnosticsSeries};
use crate::error::{FchError, Result};
use crate::output::{csv_row, format_f64, run_simulation};
use crate::spectral::Field;
use crate::timestepper::TrajectoryState;

#[derive(Debug, Clone)]
pub struct SweepPlan {
    /// Strictly decreasing, each in `(0, 1)`.
    pub thetas: Vec<f64>,
    /// Shared configuration; its own `theta` is ignored.
    pub config: SimConfig,
    /// Times in `[0, t_end]` at which consecutive runs are compared.
    pub comparison_times: Vec<f64>,
    /// The smallest-θ field passes the lower-bound test when `min u ≥ -lower_bound_tol`.
    pub lower_bound_tol: f64,
    /// ... and the nonzero test when `max |u| ≥ nonzero_floor`.
    pub nonzero_floor: f64,
}

impl SweepPlan {
    pub fn new(thetas: Vec<f64>, config: SimConfig) -> Result<Self> {
        let t_end = config.t_end;
        let plan = SweepPlan {
            thetas,
            config,
            comparison_times: vec![t_end],
            lower_bound_tol: 1e-2,
            nonzero_floor: 0.1,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.thetas.is_empty() {
            return Err(FchError::Config("sweep needs at least one theta".into()));
        }
        if self.thetas.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(FchError::Config("every sweep theta must lie in (0,1)".into()));
        }
        if self.thetas.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(FchError::Config("sweep thetas must be strictly decreasing".into()));
        }
        if self
            .comparison_times
            .iter()
            .any(|&t| !(t >= 0.0 && t <= self.config.t_end))
        {
            return Err(FchError::Config("comparison times must lie in [0, t_end]".into()));
        }
        self.config.with_theta(self.thetas[0]).validate()
    }
}

/// Outcome of one θ run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSummary {
    pub theta: f64,
    pub min_u_final: f64,
    pub max_abs_final: f64,
    pub negativity_sup: f64,
    /// `negativity_sup / (θ² + θ + θ^{1/2})`.
    pub bound_ratio: f64,
    pub series: DiagnosticsSeries,
}

#[derive(Debug, Clone)]
pub struct ThetaRun {
    pub theta: f64,
    pub outcome: std::result::Result<ThetaSummary, String>,
    /// Recorded fields, for time interpolation.
    trajectory: Vec<(f64, Field)>,
}

/// `‖u_{θ_i}(t) - u_{θ_{i+1}}(t)‖_{L²}` per comparison time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairGap {
    pub theta: f64,
    pub theta_next: f64,
    pub distances: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub runs: Vec<ThetaRun>,
    pub gaps: Vec<PairGap>,
    /// Distances at the last comparison time are nonincreasing along the sequence.
    pub cauchy: bool,
    pub lower_bound_ok: bool,
    pub nonzero_ok: bool,
}

impl SweepReport {
    pub fn summaries(&self) -> impl Iterator<Item = &ThetaSummary> {
        self.runs.iter().filter_map(|r| r.outcome.as_ref().ok())
    }

    pub fn all_succeeded(&self) -> bool {
        self.runs.iter().all(|r| r.outcome.is_ok())
    }

    pub fn max_bound_ratio(&self) -> f64 {
        self.summaries().map(|s| s.bound_ratio).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Field of run `i` at time `t`, linear in time between records.
    pub fn field_at(&self, i: usize, t: f64) -> Option<Field> {
        interpolate(&self.runs.get(i)?.trajectory, t)
    }

    /// `theta,min_u_final,negativity_sup,bound_ratio,l2_gap_to_next`, with the
    /// gap taken at the last comparison time; failed runs leave empty cells.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("theta,min_u_final,negativity_sup,bound_ratio,l2_gap_to_next\n");
        for run in &self.runs {
            out.push_str(&format_f64(run.theta));
            match &run.outcome {
                Ok(s) => {
                    out.push(',');
                    out.push_str(&csv_row(&[s.min_u_final, s.negativity_sup, s.bound_ratio]));
                }
                Err(_) => out.push_str(",,,"),
            }
            out.push(',');
            let gap = self.gaps.iter().find(|g| g.theta == run.theta);
            if let Some(d) = gap.and_then(|g| g.distances.last()) {
                out.push_str(&format_f64(d.1));
            }
            out.push('\n');
        }
        out
    }
}

fn interpolate(trajectory: &[(f64, Field)], t: f64) -> Option<Field> {
    let j = trajectory.iter().position(|(tr, _)| *tr >= t)?;
    let (t1, u1) = &trajectory[j];
    if *t1 == t || j == 0 {
        return Some(u1.clone());
    }
    let (t0, u0) = &trajectory[j - 1];
    let s = (t - t0) / (t1 - t0);
    let coeffs: Vec<Complex64> = u0
        .coefficients()
        .iter()
        .zip(u1.coefficients())
        .map(|(a, b)| a * (1.0 - s) + b * s)
        .collect();
    Field::from_spectral(u0.basis(), coeffs).ok()
}

fn summarize(theta: f64, state: &TrajectoryState, series: DiagnosticsSeries) -> ThetaSummary {
    let negativity_sup = series
        .records
        .iter()
        .map(|r| r.negativity)
        .fold(f64::NEG_INFINITY, f64::max);
    ThetaSummary {
        theta,
        min_u_final: state.u.min_value(),
        max_abs_final: state.u.max_abs(),
        negativity_sup,
        bound_ratio: negativity_sup / negativity_scale(theta),
        series,
    }
}

fn theta_dir_name(theta: f64) -> String {
    format!("theta_{theta:e}")
}

fn run_one(plan: &SweepPlan, theta: f64, out: Option<&Path>) -> ThetaRun {
    let config = plan.config.with_theta(theta);
    let mut trajectory = Vec::new();
    let mut keep = |_: &DiagnosticsRecord, s: &TrajectoryState| -> Result<()> {
        trajectory.push((s.t, s.u.clone()));
        Ok(())
    };
    let dir = out.map(|d| d.join(theta_dir_name(theta)));
    let outcome = run_simulation(&config, dir.as_deref(), &mut [&mut keep])
        .map(|(state, series)| summarize(theta, &state, series))
        .map_err(|e| {
            log::error!("theta = {theta}: {e}");
            e.to_string()
        });
    ThetaRun {
        theta,
        outcome,
        trajectory,
    }
}

/// Run every θ independently (in parallel) and compare consecutive runs.
pub fn run_sweep(plan: &SweepPlan, out: Option<&Path>) -> Result<SweepReport> {
    plan.validate()?;
    let runs: Vec<ThetaRun> = plan
        .thetas
        .par_iter()
        .map(|&theta| run_one(plan, theta, out))
        .collect();

    let mut gaps = Vec::new();
    for w in runs.windows(2) {
        if w[0].outcome.is_err() || w[1].outcome.is_err() {
            continue;
        }
        let distances = plan
            .comparison_times
            .iter()
            .filter_map(|&t| {
                let a = interpolate(&w[0].trajectory, t)?;
                let b = interpolate(&w[1].trajectory, t)?;
                Some((t, a.axpy(-1.0, &b).ok()?.l2_norm()))
            })
            .collect();
        gaps.push(PairGap {
            theta: w[0].theta,
            theta_next: w[1].theta,
            distances,
        });
    }
    let last: Vec<f64> = gaps
        .iter()
        .filter_map(|g| g.distances.last().map(|d| d.1))
        .collect();
    let cauchy = last.windows(2).all(|w| w[1] <= w[0]);
    let smallest = runs.last().and_then(|r| r.outcome.as_ref().ok());
    let report = SweepReport {
        lower_bound_ok: smallest.is_some_and(|s| s.min_u_final >= -plan.lower_bound_tol),
        nonzero_ok: smallest.is_some_and(|s| s.max_abs_final >= plan.nonzero_floor),
        runs,
        gaps,
        cauchy,
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("sweep_summary.csv"), report.summary_csv())?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::InitialData;

    fn config(initial: InitialData) -> SimConfig {
        let mut c = SimConfig::from_json(
            r#"{
                "dim": 1, "modes_per_axis": 4, "eta": 1.0, "theta": 0.5,
                "initial": {"kind": "positive_random", "mean": 0.5, "amplitude": 0.3, "seed": 3},
                "t_end": 0.02,
                "step": {"dt_init": 1e-3, "dt_min": 1e-9, "dt_max": 1e-3, "energy_residual_tol": 1e-6, "max_steps": 100000},
                "output": {"cadence": 0.01}
            }"#,
        )
        .unwrap();
        c.initial = initial;
        c
    }

    #[test]
    fn rejects_non_decreasing_thetas() {
        let c = config(InitialData::PositiveRandom { mean: 0.5, amplitude: 0.3, seed: 3 });
        assert!(SweepPlan::new(vec![0.1, 0.2], c.clone()).is_err());
        assert!(SweepPlan::new(vec![0.1, 0.1], c.clone()).is_err());
        assert!(SweepPlan::new(vec![1.5], c).is_err());
    }

    #[test]
    fn constant_data_gives_identical_runs() {
        let c = config(InitialData::ModePerturbation {
            constant: 0.7,
            amplitude: 0.0,
            wavevector: vec![1],
        });
        let plan = SweepPlan::new(vec![0.5, 0.1, 0.01], c).unwrap();
        let r = run_sweep(&plan, None).unwrap();
        assert!(r.all_succeeded());
        for g in &r.gaps {
            assert_eq!(g.distances, vec![(0.02, 0.0)]);
        }
        for s in r.summaries() {
            assert!((s.min_u_final - 0.7).abs() < 1e-14);
            let expected = s.theta * s.theta * 2.0 * std::f64::consts::PI;
            for rec in &s.series.records {
                assert!((rec.negativity - expected).abs() <= 1e-12 * expected);
            }
        }
        assert!(r.cauchy && r.lower_bound_ok && r.nonzero_ok);
    }

    #[test]
    fn single_theta_has_no_pairs() {
        let c = config(InitialData::PositiveRandom { mean: 0.5, amplitude: 0.3, seed: 3 });
        let r = run_sweep(&SweepPlan::new(vec![0.5], c).unwrap(), None).unwrap();
        assert_eq!(r.runs.len(), 1);
        assert!(r.gaps.is_empty());
        let csv = r.summary_csv();
        assert!(csv.lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn runs_are_isolated() {
        let c = config(InitialData::PositiveRandom { mean: 0.3, amplitude: 0.25, seed: 11 });
        let both = run_sweep(&SweepPlan::new(vec![0.5, 0.1], c.clone()).unwrap(), None).unwrap();
        let alone = run_sweep(&SweepPlan::new(vec![0.1], c).unwrap(), None).unwrap();
        assert_eq!(
            both.runs[1].outcome.as_ref().unwrap(),
            alone.runs[0].outcome.as_ref().unwrap()
        );
    }

    #[test]
    fn interpolation_is_linear_in_time() {
        let b = crate::spectral::Basis::new(1, 2, 5).unwrap();
        let traj = vec![(0.0, Field::constant(&b, 1.0)), (1.0, Field::constant(&b, 3.0))];
        assert!((interpolate(&traj, 0.25).unwrap().coefficient(&[0]).re - 1.5).abs() < 1e-15);
        assert!(interpolate(&traj, 2.0).is_none());
    }
}
