//! Run configuration: a single strict JSON document.

use std::path::Path;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::FchParams;
use crate::error::{FchError, Result};
use crate::mobility::MobilitySpec;
use crate::potential::{check_growth_exponent, GrowthConstants, PotentialSpec};
use crate::spectral::{Basis, BasisRef, Field};
use crate::timestepper::{Schedule, StepControl};

/// Version string written into resolved configs.
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// One explicit Fourier coefficient `û_k`; its conjugate partner at `-k` is
/// set automatically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientEntry {
    pub k: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Initial data. Every variant is projected onto the band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `constant + amplitude·cos(k·x)`.
    ModePerturbation {
        constant: f64,
        amplitude: f64,
        wavevector: Vec<i64>,
    },
    /// Explicit coefficients `û_k` (convention `u = Σ û_k e^{ik·x}`).
    Coefficients { entries: Vec<CoefficientEntry> },
    /// `mean` plus a random band-limited perturbation with
    /// `sup|u - mean| ≤ amplitude`, drawn from SplitMix64.
    PositiveRandom { mean: f64, amplitude: f64, seed: u64 },
}

impl InitialData {
    fn validate(&self, dim: usize, modes: usize) -> Result<()> {
        let check_k = |k: &[i64]| -> Result<()> {
            if k.len() != dim {
                return Err(FchError::Config(format!(
                    "initial wavevector {k:?} must have {dim} components"
                )));
            }
            if k.iter().any(|v| v.unsigned_abs() as usize > modes) {
                return Err(FchError::Config(format!(
                    "initial wavevector {k:?} lies outside |k_j| <= modes_per_axis = {modes}"
                )));
            }
            Ok(())
        };
        match self {
            InitialData::ModePerturbation {
                constant,
                amplitude,
                wavevector,
            } => {
                if !constant.is_finite() || !amplitude.is_finite() {
                    return Err(FchError::Config("initial values must be finite".into()));
                }
                check_k(wavevector)
            }
            InitialData::Coefficients { entries } => {
                for e in entries {
                    check_k(&e.k)?;
                    if !e.re.is_finite() || !e.im.is_finite() {
                        return Err(FchError::Config("initial coefficients must be finite".into()));
                    }
                    if e.k.iter().all(|&v| v == 0) && e.im != 0.0 {
                        return Err(FchError::Config(
                            "the k = 0 coefficient must be real".into(),
                        ));
                    }
                }
                Ok(())
            }
            InitialData::PositiveRandom { mean, amplitude, .. } => {
                if !(*amplitude >= 0.0) || !amplitude.is_finite() {
                    return Err(FchError::Config("positive_random amplitude must be >= 0".into()));
                }
                if !(mean - amplitude > 0.0) || !mean.is_finite() {
                    return Err(FchError::Config(format!(
                        "positive_random requires mean - amplitude > 0 (got {} - {})",
                        mean, amplitude
                    )));
                }
                Ok(())
            }
        }
    }

    /// Band-limited initial field on `basis`.
    pub fn build(&self, basis: &BasisRef) -> Result<Field> {
        let zero = Complex64::new(0.0, 0.0);
        let mut coeffs = vec![zero; basis.band_len()];
        let set = |coeffs: &mut Vec<Complex64>, k: &[i64], c: Complex64| -> Result<()> {
            let idx = basis
                .band_index(k)
                .ok_or_else(|| FchError::Config(format!("wavevector {k:?} outside the band")))?;
            coeffs[idx] = c;
            coeffs[basis.mirror(idx)] = c.conj();
            Ok(())
        };
        match self {
            InitialData::ModePerturbation {
                constant,
                amplitude,
                wavevector,
            } => {
                if wavevector.iter().all(|&v| v == 0) {
                    set(&mut coeffs, wavevector, Complex64::new(constant + amplitude, 0.0))?;
                } else {
                    coeffs[basis.zero_index()] = Complex64::new(*constant, 0.0);
                    set(&mut coeffs, wavevector, Complex64::new(0.5 * amplitude, 0.0))?;
                }
            }
            InitialData::Coefficients { entries } => {
                for e in entries {
                    set(&mut coeffs, &e.k, Complex64::new(e.re, e.im))?;
                }
            }
            InitialData::PositiveRandom {
                mean,
                amplitude,
                seed,
            } => coeffs = positive_random_coefficients(basis, *mean, *amplitude, *seed),
        }
        Field::from_spectral(basis, coeffs)
    }
}

/// Uniform draw in `[-1, 1)` from the top 53 bits.
fn unit_interval(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * 2.0 - 1.0
}

/// Random coefficients: for each band index below the zero index, in order,
/// draw real then imaginary part uniformly in `[-1, 1)` and damp by
/// `1/(1 + |k|²)`; the partner at `-k` is the conjugate. The perturbation is
/// then scaled so that `Σ_{k≠0} |û_k| = amplitude`, which bounds
/// `sup|u - mean|` by `amplitude`.
pub fn positive_random_coefficients(basis: &BasisRef, mean: f64, amplitude: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); basis.band_len()];
    let zero = basis.zero_index();
    for idx in 0..zero {
        let damp = 1.0 / (1.0 + basis.k_squared()[idx]);
        let re = unit_interval(&mut rng);
        let im = unit_interval(&mut rng);
        coeffs[idx] = Complex64::new(re, im) * damp;
        coeffs[basis.mirror(idx)] = coeffs[idx].conj();
    }
    let total: f64 = coeffs.iter().map(|c| c.norm()).sum();
    let scale = if total > 0.0 { amplitude / total } else { 0.0 };
    for c in coeffs.iter_mut() {
        *c *= scale;
    }
    coeffs[zero] = Complex64::new(mean, 0.0);
    coeffs
}

fn default_directory() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Time between records.
    pub cadence: f64,
    #[serde(default = "default_directory")]
    pub directory: String,
    /// Write one grid snapshot per record.
    #[serde(default)]
    pub snapshots: bool,
    /// Write `∫∇μ·∇u` and its time integral per record to `entropy_flux.csv`.
    #[serde(default)]
    pub entropy_flux: bool,
}

fn default_h2_growth_limit() -> f64 {
    1e3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dim: usize,
    pub modes_per_axis: usize,
    /// Collocation points per axis; 0 selects the default for the potential.
    #[serde(default)]
    pub grid_per_axis: usize,
    pub eta: f64,
    pub theta: f64,
    #[serde(default = "PotentialSpec::example")]
    pub potential: PotentialSpec,
    pub initial: InitialData,
    pub t_end: f64,
    pub step: StepControl,
    pub output: OutputConfig,
    /// Constants for the growth check; defaults to the verified example set.
    #[serde(default)]
    pub growth_constants: Option<GrowthConstants>,
    #[serde(default = "default_h2_growth_limit")]
    pub h2_growth_limit: f64,
    /// Filled in by [`SimConfig::resolved`]; ignored on input.
    #[serde(default)]
    pub code_version: Option<String>,
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Check every numeric constraint; the error names the first one violated.
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(FchError::Config(format!("dim = {} must be 1, 2 or 3", self.dim)));
        }
        if self.modes_per_axis < 1 {
            return Err(FchError::Config("modes_per_axis must be at least 1".into()));
        }
        if self.grid_per_axis != 0 && self.grid_per_axis < 2 * self.modes_per_axis + 1 {
            return Err(FchError::Config(format!(
                "grid_per_axis = {} must be 0 (auto) or at least 2*modes_per_axis+1 = {}",
                self.grid_per_axis,
                2 * self.modes_per_axis + 1
            )));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(FchError::Config(format!("eta = {} must be > 0", self.eta)));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(FchError::Config(format!(
                "theta = {} must lie in (0,1)",
                self.theta
            )));
        }
        if self.potential.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(FchError::Config("potential coefficients must be finite".into()));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(FchError::Config(format!("t_end = {} must be >= 0", self.t_end)));
        }
        self.step.validate()?;
        if !(self.output.cadence > 0.0) || !self.output.cadence.is_finite() {
            return Err(FchError::Config("output.cadence must be > 0".into()));
        }
        if !(self.h2_growth_limit > 1.0) {
            return Err(FchError::Config("h2_growth_limit must be > 1".into()));
        }
        if let Err(e) = check_growth_exponent(self.potential.p, self.dim) {
            log::warn!("{e}");
        }
        self.initial.validate(self.dim, self.modes_per_axis)
    }

    pub fn grid(&self) -> usize {
        if self.grid_per_axis == 0 {
            Basis::auto_grid(self.modes_per_axis, self.potential.degree())
        } else {
            self.grid_per_axis
        }
    }

    /// The config with defaults made explicit, as echoed to `run.json`.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.grid_per_axis = self.grid();
        c.growth_constants = Some(self.growth_constants.unwrap_or(GrowthConstants::EXAMPLE));
        c.code_version = Some(CODE_VERSION.into());
        c
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        let mut c = self.clone();
        c.theta = theta;
        c
    }

    pub fn basis(&self) -> Result<BasisRef> {
        Basis::new(self.dim, self.modes_per_axis, self.grid())
    }

    pub fn params(&self) -> Result<FchParams> {
        FchParams::new(
            self.eta,
            self.potential.clone(),
            MobilitySpec::regularized(self.theta)?,
        )
    }

    pub fn schedule(&self) -> Schedule {
        Schedule {
            t_end: self.t_end,
            cadence: self.output.cadence,
            h2_growth_limit: self.h2_growth_limit,
        }
    }

    /// Validated basis, parameters and initial field.
    pub fn setup(&self) -> Result<(BasisRef, FchParams, Field)> {
        self.validate()?;
        let basis = self.basis()?;
        let params = self.params()?;
        let u0 = self.initial.build(&basis)?;
        Ok((basis, params, u0))
    }
}
