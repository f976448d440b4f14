//! Polynomial double-well potentials.
//!
//! A potential is stored as its coefficient list, lowest degree first, so
//! `[0, 0, 2, -3, 1]` is `2u² - 3u³ + u⁴ = u²(u-1)(u-2)`. Derivatives are
//! exact polynomial derivatives; nothing here is differentiated numerically.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{FchError, Result};

/// Polynomial potential `W` together with its declared growth exponent `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "PotentialRepr", into = "PotentialRepr")]
pub struct PotentialSpec {
    pub coefficients: Vec<f64>,
    pub p: f64,
    /// Coefficient lists of the first three derivatives.
    derivatives: [Vec<f64>; 3],
}

/// Serialized form: coefficient list (lowest degree first) and `p`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialRepr {
    coefficients: Vec<f64>,
    p: f64,
}

impl From<PotentialRepr> for PotentialSpec {
    fn from(r: PotentialRepr) -> Self {
        PotentialSpec::new(r.coefficients, r.p)
    }
}

impl From<PotentialSpec> for PotentialRepr {
    fn from(s: PotentialSpec) -> Self {
        PotentialRepr {
            coefficients: s.coefficients,
            p: s.p,
        }
    }
}

/// The two positive critical points of `W` besides the left well at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wells {
    /// Local maximum between the wells.
    pub b0: f64,
    /// Right (deeper) well.
    pub b_plus: f64,
}

fn differentiate(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect()
}

#[inline]
fn horner(coeffs: &[f64], z: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
}

impl PotentialSpec {
    pub fn new(coefficients: Vec<f64>, p: f64) -> Self {
        let mut spec = PotentialSpec {
            coefficients,
            p,
            derivatives: Default::default(),
        };
        spec.rebuild();
        spec
    }

    /// `W(u) = u²(u-1)(u-2)` with `p = 2`.
    pub fn example() -> Self {
        Self::new(vec![0.0, 0.0, 2.0, -3.0, 1.0], 2.0)
    }

    /// Quadratic part of `W` at zero, `½W″(0)u²`.
    pub fn quadratic_part(&self) -> Self {
        let a2 = self.coefficients.get(2).copied().unwrap_or(0.0);
        Self::new(vec![0.0, 0.0, a2], self.p)
    }

    fn rebuild(&mut self) {
        let d1 = differentiate(&self.coefficients);
        let d2 = differentiate(&d1);
        let d3 = differentiate(&d2);
        self.derivatives = [d1, d2, d3];
    }

    /// Degree of the polynomial, ignoring trailing zero coefficients.
    pub fn degree(&self) -> usize {
        self.coefficients
            .iter()
            .rposition(|&c| c != 0.0)
            .unwrap_or(0)
    }

    /// `W^{(order)}(z)` for `order` in `0..=3`.
    pub fn eval(&self, z: f64, order: usize) -> Result<f64> {
        match order {
            0 => Ok(self.w(z)),
            1..=3 => Ok(horner(&self.derivatives[order - 1], z)),
            _ => Err(FchError::InvalidOrder(order)),
        }
    }

    #[inline]
    pub fn w(&self, z: f64) -> f64 {
        horner(&self.coefficients, z)
    }

    #[inline]
    pub fn dw(&self, z: f64) -> f64 {
        horner(&self.derivatives[0], z)
    }

    #[inline]
    pub fn d2w(&self, z: f64) -> f64 {
        horner(&self.derivatives[1], z)
    }

    #[inline]
    pub fn d3w(&self, z: f64) -> f64 {
        horner(&self.derivatives[2], z)
    }

    /// Positive roots of `W′`, validated against the double-well hypotheses:
    /// `W(0) = 0`, `W′` has exactly the three real zeros `0 < b0 < b_plus`,
    /// both outer zeros are strict local minima and `W(b_plus) < 0`.
    pub fn find_wells(&self) -> Result<Wells> {
        if self.degree() < 4 {
            return Err(FchError::Structure(format!(
                "W must be a polynomial of degree at least 4, got degree {}",
                self.degree()
            )));
        }
        if self.w(0.0) != 0.0 {
            return Err(FchError::Structure(format!(
                "W(0) must be 0, got {}",
                self.w(0.0)
            )));
        }
        let roots = real_roots(&self.derivatives[0]);
        if roots.len() != 3 {
            return Err(FchError::Structure(format!(
                "W' must have exactly three real zeros, found {} ({roots:?})",
                roots.len()
            )));
        }
        if roots[0].abs() > 1e-10 {
            return Err(FchError::Structure(format!(
                "the smallest zero of W' must be 0, got {}",
                roots[0]
            )));
        }
        let (b0, b_plus) = (roots[1], roots[2]);
        if !(b0 > 0.0 && b0 < b_plus) {
            return Err(FchError::Structure(format!(
                "zeros of W' must satisfy 0 < b0 < b_plus, got b0 = {b0}, b_plus = {b_plus}"
            )));
        }
        if self.d2w(0.0) <= 0.0 || self.d2w(b_plus) <= 0.0 {
            return Err(FchError::Structure(
                "0 and b_plus must be strict local minima of W".into(),
            ));
        }
        if self.w(b_plus) >= 0.0 {
            return Err(FchError::Structure(format!(
                "W(b_plus) must be negative, got W({b_plus}) = {}",
                self.w(b_plus)
            )));
        }
        Ok(Wells { b0, b_plus })
    }

    /// Sampled check of the growth bounds on `W` and its derivatives.
    pub fn verify_growth(
        &self,
        constants: GrowthConstants,
        p: f64,
        range: (f64, f64),
        samples: usize,
    ) -> Result<GrowthReport> {
        let GrowthConstants { c1, c2, c3, c4 } = constants;
        if !(c1 > 0.0 && c2 > 0.0 && c3 > 0.0 && c4 > 0.0) {
            return Err(FchError::Contract(
                "growth constants C1..C4 must be positive".into(),
            ));
        }
        if samples < 2 {
            return Err(FchError::Contract("need at least 2 samples".into()));
        }
        let reach = self
            .find_wells()
            .map(|w| w.b_plus.max(1.0))
            .unwrap_or(1.0);
        if range.0 > -reach || range.1 < reach {
            return Err(FchError::Contract(format!(
                "sample range [{}, {}] must contain [-{reach}, {reach}]",
                range.0, range.1
            )));
        }

        let names = ["grow-1", "grow-2", "grow-3", "grow-4", "grow-5"];
        let mut worst = [(f64::INFINITY, 0.0_f64); 5];
        let step = (range.1 - range.0) / (samples - 1) as f64;
        for i in 0..samples {
            let z = range.0 + step * i as f64;
            let a = z.abs();
            let (w, w1, w2, w3) = (self.w(z), self.dw(z), self.d2w(z), self.d3w(z));
            // Each margin is (bound - value); negative means violated.
            let margins = [
                (w - (c1 * a.powf(2.0 * p) - c2)).min(c3 * a.powf(2.0 * p) + c4 - w),
                c3 * a.powf(2.0 * p - 1.0) + c4 - w1.abs(),
                (w2 - (c1 * a.powf(2.0 * p - 2.0) - c2)).min(c3 * a.powf(2.0 * p - 2.0) + c4 - w2),
                c3 * a.powf(2.0 * p - 3.0) + c4 - w3.abs(),
                w1 * z - (2.0 * c1 * a.powf(2.0 * p) - c2),
            ];
            for (slot, m) in worst.iter_mut().zip(margins) {
                if m < slot.0 {
                    *slot = (m, z);
                }
            }
        }
        let checks = names
            .iter()
            .zip(worst)
            .map(|(&name, (margin, point))| InequalityCheck {
                name,
                passed: margin >= 0.0,
                worst_margin: margin,
                worst_point: point,
            })
            .collect();
        Ok(GrowthReport { checks })
    }
}

/// Admissible growth exponents: `1 < p` for `d = 1, 2` and `1 < p ≤ (d-1)/(d-2)` for `d = 3`.
pub fn check_growth_exponent(p: f64, dim: usize) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(FchError::Structure(format!(
            "growth exponent p = {p} violates 1 < p < inf"
        )));
    }
    if dim == 3 && p > 2.0 {
        return Err(FchError::Structure(format!(
            "growth exponent p = {p} violates p <= (d-1)/(d-2) = 2 for d = 3"
        )));
    }
    Ok(())
}

/// Constants `C1..C4` of the growth bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl GrowthConstants {
    /// Constants verified by brute force for the example potential with `p = 2`.
    pub const EXAMPLE: GrowthConstants = GrowthConstants {
        c1: 0.25,
        c2: 10.0,
        c3: 30.0,
        c4: 30.0,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Smallest `bound - value` over the samples.
    pub worst_margin: f64,
    pub worst_point: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub checks: Vec<InequalityCheck>,
}

impl GrowthReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&InequalityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Real roots of a polynomial (lowest degree first), sorted ascending.
///
/// Exact zero roots are deflated first; the rest come from the eigenvalues
/// of the companion matrix, polished with Newton to 1e-12.
pub fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let top = match coeffs.iter().rposition(|&c| c != 0.0) {
        Some(t) => t,
        None => return Vec::new(),
    };
    let zeros = coeffs.iter().take_while(|&&c| c == 0.0).count();
    let reduced = &coeffs[zeros..=top];
    let mut roots = vec![0.0; zeros.min(1)];

    let n = reduced.len() - 1;
    if n >= 1 {
        let lead = reduced[n];
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            companion[(i, n - 1)] = -reduced[i] / lead;
        }
        let derivative = differentiate(reduced);
        for ev in companion.complex_eigenvalues().iter() {
            if ev.im.abs() > 1e-8 * ev.re.abs().max(1.0) {
                continue;
            }
            let mut x = ev.re;
            for _ in 0..50 {
                let d = horner(&derivative, x);
                if d == 0.0 {
                    break;
                }
                let dx = horner(reduced, x) / d;
                x -= dx;
                if dx.abs() <= 1e-12 * x.abs().max(1.0) {
                    break;
                }
            }
            roots.push(x);
        }
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(1.0));
    roots
}
