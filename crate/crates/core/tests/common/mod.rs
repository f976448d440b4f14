//! Shared helpers for the integration tests: seeded random fields and an
//! independent direct-summation quadrature oracle for the 1D functionals.

#![allow(dead_code)]

use std::f64::consts::PI;

use fch_core::{BasisRef, FchParams, Field, PotentialSpec};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rustfft::num_complex::Complex64;

pub fn unit(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * 2.0 - 1.0
}

/// Real field with `û_0 = mean` and `û_k = amp·(a + ib)/(1 + |k|)`, `a, b ∈ [-1, 1]`.
pub fn random_field(basis: &BasisRef, seed: u64, mean: f64, amp: f64) -> Field {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let zero = basis.zero_index();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); basis.band_len()];
    for idx in 0..zero {
        let k = basis.k_squared()[idx].sqrt();
        let c = Complex64::new(unit(&mut rng), unit(&mut rng)) * (amp / (1.0 + k));
        coeffs[idx] = c;
        coeffs[basis.mirror(idx)] = c.conj();
    }
    coeffs[zero] = Complex64::new(mean, 0.0);
    Field::from_spectral(basis, coeffs).unwrap()
}

/// Values of `u, u′, …, u⁗` at `q` equispaced points of a 1D field with
/// nonnegative-wavenumber coefficients `c[k]`, summed term by term.
pub struct Samples {
    pub q: usize,
    pub modes: usize,
    pub d: [Vec<f64>; 5],
}

/// `e^{ikx}` for `k = 0..=n`, by repeated multiplication from `e^{ix}`.
fn powers(x: f64, n: usize, out: &mut [Complex64]) {
    let z = Complex64::from_polar(1.0, x);
    out[0] = Complex64::new(1.0, 0.0);
    for k in 1..=n {
        out[k] = out[k - 1] * z;
    }
}

fn point(i: usize, q: usize) -> f64 {
    2.0 * PI * i as f64 / q as f64
}

impl Samples {
    pub fn new(u: &Field, q: usize) -> Self {
        let b = u.basis();
        assert_eq!(b.dim(), 1);
        let n = b.modes();
        let c: Vec<Complex64> = (0..=n).map(|k| u.coefficient(&[k as i64])).collect();
        let mut d: [Vec<f64>; 5] = Default::default();
        for v in d.iter_mut() {
            *v = vec![0.0; q];
        }
        let mut e = vec![Complex64::new(0.0, 0.0); n + 1];
        for i in 0..q {
            powers(point(i, q), n, &mut e);
            d[0][i] = c[0].re;
            for k in 1..=n {
                // Conjugate pairs: û_k e^{ikx} + c.c. = 2 Re(û_k e^{ikx}).
                let mut term = c[k] * e[k] * 2.0;
                let ik = Complex64::new(0.0, k as f64);
                for v in d.iter_mut() {
                    v[i] += term.re;
                    term *= ik;
                }
            }
        }
        Samples { q, modes: n, d }
    }

    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        (0..self.q).map(f).sum::<f64>() * 2.0 * PI / self.q as f64
    }

    pub fn energy(&self, p: &FchParams) -> f64 {
        let w = &p.potential;
        let [u, u1, u2, ..] = &self.d;
        self.integrate(|i| {
            let om = w.dw(u[i]) - u2[i];
            0.5 * om * om - p.eta * (0.5 * u1[i] * u1[i] + w.w(u[i]))
        })
    }

    /// Pointwise `μ = u⁗ - W‴u′² - W″u″ + (W″ - η)ω` from the closed form.
    pub fn mu(&self, w: &PotentialSpec, eta: f64) -> Vec<f64> {
        let [u, u1, u2, _, u4] = &self.d;
        (0..self.q)
            .map(|i| {
                let (w1, w2, w3) = (w.dw(u[i]), w.d2w(u[i]), w.d3w(u[i]));
                let om = w1 - u2[i];
                u4[i] - w3 * u1[i] * u1[i] - w2 * u2[i] + (w2 - eta) * om
            })
            .collect()
    }

    /// `∫ M(u)|∂ₓPμ|²`, with `P` the band projection computed by quadrature.
    pub fn dissipation(&self, p: &FchParams) -> f64 {
        let (q, n) = (self.q, self.modes);
        let mu = self.mu(&p.potential, p.eta);
        let mut e = vec![Complex64::new(0.0, 0.0); n + 1];
        let mut hat = vec![Complex64::new(0.0, 0.0); n + 1];
        for (i, &m) in mu.iter().enumerate() {
            powers(point(i, q), n, &mut e);
            for k in 0..=n {
                hat[k] += e[k].conj() * m;
            }
        }
        for h in hat.iter_mut() {
            *h /= q as f64;
        }
        let u = &self.d[0];
        let mut s = 0.0;
        for (i, &v) in u.iter().enumerate() {
            powers(point(i, q), n, &mut e);
            let g: f64 = (1..=n)
                .map(|k| 2.0 * (hat[k] * e[k] * Complex64::new(0.0, k as f64)).re)
                .sum();
            s += p.mobility.eval(v) * g * g;
        }
        s * 2.0 * PI / q as f64
    }

    pub fn entropy(&self, theta: f64) -> f64 {
        let u = &self.d[0];
        self.integrate(|i| fch_core::mobility::regularized_entropy(theta, u[i]))
    }

    pub fn negativity(&self, theta: f64) -> f64 {
        let u = &self.d[0];
        self.integrate(|i| (u[i].min(0.0) + theta).powi(2))
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
