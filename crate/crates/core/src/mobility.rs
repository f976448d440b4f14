//! Cutoff mobility, its regularization and the matching entropy densities.

use serde::{Deserialize, Serialize};

use crate::error::{FchError, Result};

/// `M(u) = max(u, 0)` or its regularization `M_θ(u) = max(u, θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MobilitySpec {
    Degenerate,
    Regularized { theta: f64 },
}

/// Below this, `u ln u` is replaced by its limit 0.
const ENTROPY_FLOOR: f64 = 1e-300;

impl MobilitySpec {
    pub fn regularized(theta: f64) -> Result<Self> {
        if theta > 0.0 && theta < 1.0 {
            Ok(MobilitySpec::Regularized { theta })
        } else {
            Err(FchError::Config(format!("theta = {theta} must lie in (0,1)")))
        }
    }

    pub fn theta(&self) -> Option<f64> {
        match *self {
            MobilitySpec::Degenerate => None,
            MobilitySpec::Regularized { theta } => Some(theta),
        }
    }

    /// Lower cutoff of the mobility: 0 or θ.
    #[inline]
    pub fn floor(&self) -> f64 {
        self.theta().unwrap_or(0.0)
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        let floor = self.floor();
        if u > floor {
            u
        } else {
            floor
        }
    }

    /// `Φ` (degenerate) or `Φ_θ` (regularized): the convex density with
    /// `Φ″ = 1/M` and `Φ(1) = Φ′(1) = 0`.
    pub fn entropy(&self, u: f64) -> Result<f64> {
        match *self {
            MobilitySpec::Degenerate => {
                if u > 0.0 {
                    Ok(log_entropy(u))
                } else {
                    Err(FchError::Domain {
                        what: "entropy density Phi",
                        value: u,
                    })
                }
            }
            MobilitySpec::Regularized { theta } => Ok(regularized_entropy(theta, u)),
        }
    }

    /// First and second derivatives of the entropy density.
    pub fn entropy_derivatives(&self, u: f64) -> Result<(f64, f64)> {
        match *self {
            MobilitySpec::Degenerate if u <= 0.0 => Err(FchError::Domain {
                what: "entropy density Phi",
                value: u,
            }),
            _ => Ok((self.entropy_prime(u), 1.0 / self.eval(u))),
        }
    }

    fn entropy_prime(&self, u: f64) -> f64 {
        let theta = self.floor();
        if u > theta {
            u.ln()
        } else {
            u / theta + theta.ln() - 1.0
        }
    }
}

#[inline]
fn log_entropy(u: f64) -> f64 {
    if u < ENTROPY_FLOOR {
        1.0
    } else {
        u * u.ln() - u + 1.0
    }
}

/// `Φ_θ(u)`, defined for every real `u`.
#[inline]
pub fn regularized_entropy(theta: f64, u: f64) -> f64 {
    if u > theta {
        u * u.ln() - u + 1.0
    } else {
        u * u / (2.0 * theta) + (theta.ln() - 1.0) * u + 1.0 - 0.5 * theta
    }
}

/// Both branches of `Φ_θ`, `Φ_θ′`, `Φ_θ″` evaluated at `u`, as
/// `[(log branch), (quadratic branch)]`. Used to certify C² matching at `u = θ`.
pub fn entropy_branches(theta: f64, u: f64) -> [(f64, f64, f64); 2] {
    [
        (u * u.ln() - u + 1.0, u.ln(), 1.0 / u),
        (
            u * u / (2.0 * theta) + (theta.ln() - 1.0) * u + 1.0 - 0.5 * theta,
            u / theta + theta.ln() - 1.0,
            1.0 / theta,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mobility_values() {
        assert_eq!(MobilitySpec::Degenerate.eval(0.5), 0.5);
        assert_eq!(MobilitySpec::Degenerate.eval(-1.0), 0.0);
        let m = MobilitySpec::regularized(0.1).unwrap();
        assert_eq!(m.eval(0.05), 0.1);
        assert_eq!(m.eval(0.1), 0.1);
        assert_eq!(m.eval(0.3), 0.3);
        assert!(MobilitySpec::regularized(1.5).is_err());
        assert!(MobilitySpec::regularized(0.0).is_err());
    }

    #[test]
    fn entropy_values() {
        assert_eq!(MobilitySpec::Degenerate.entropy(1.0).unwrap(), 0.0);
        assert!(MobilitySpec::Degenerate.entropy(0.0).is_err());
        assert_eq!(MobilitySpec::Degenerate.entropy(1e-310).unwrap(), 1.0);
        let m = MobilitySpec::regularized(0.1).unwrap();
        assert!((m.entropy(0.0).unwrap() - 0.95).abs() < 1e-15);
        let at_theta = m.entropy(0.1).unwrap();
        assert!((at_theta - 0.669_741_490_700_595_9).abs() < 1e-12);
        let [a, b] = entropy_branches(0.1, 0.1);
        assert!((a.0 - b.0).abs() < 1e-15);
    }

    #[test]
    fn branches_match_to_second_order() {
        for theta in [0.5, 0.1, 0.01, 1e-3] {
            let [log, quad] = entropy_branches(theta, theta);
            assert!((log.0 - quad.0).abs() <= 1e-12);
            assert!((log.1 - quad.1).abs() <= 1e-12);
            assert!((log.2 - quad.2).abs() <= 1e-12 * log.2);
        }
    }

    #[test]
    fn negative_side_bound() {
        for theta in [0.5, 0.1, 0.01] {
            for i in 0..=1000 {
                let z = -10.0 * i as f64 / 1000.0;
                assert!((z + theta).powi(2) <= 2.0 * theta * regularized_entropy(theta, z) + 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn second_derivative_inverts_mobility(theta in 1e-3f64..0.99, u in -5.0f64..5.0) {
            let m = MobilitySpec::Regularized { theta };
            let (_, phi2) = m.entropy_derivatives(u).unwrap();
            prop_assert!((phi2 * m.eval(u) - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn regularized_entropy_is_below_entropy(theta in 1e-3f64..0.99, u in 1e-6f64..10.0) {
            let phi_t = regularized_entropy(theta, u);
            let phi = MobilitySpec::Degenerate.entropy(u).unwrap();
            prop_assert!(phi_t >= 0.0);
            prop_assert!(phi_t <= phi + 1e-14);
            if u >= theta {
                prop_assert_eq!(phi_t, phi);
            }
        }

        #[test]
        fn regularized_mobility_bounded_below(theta in 1e-3f64..0.99, u in -1e3f64..1e3) {
            let m = MobilitySpec::Regularized { theta };
            prop_assert!(m.eval(u) >= theta);
            prop_assert!(MobilitySpec::Degenerate.eval(u) >= 0.0);
        }
    }
}
