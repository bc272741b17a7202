//! Independent numerical cross-checks: direct quadrature of the
//! quasi-probability distribution and a truncated number-basis evaluation
//! of the characteristic function.

mod fock;
mod gauss;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_distribution_s, QuasiBellState};
use crate::phasedist::{Branch, Mode};
use crate::quasiprob::MAX_EXPONENT;

pub use fock::{fock_chi_oracle, FockChi, FockCutoff, FOCK_BOUND_LIMIT};
pub use gauss::{gauss_legendre, gauss_legendre_on};

use gauss::compensated_sum;

/// Node counts and radial cutoff for the quadrature oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub n_radial: usize,
    pub n_angular: usize,
    pub radial_cutoff_sigma: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            n_radial: 64,
            n_angular: 64,
            radial_cutoff_sigma: 8.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_radial < 16 {
            return Err(Error::Config(format!(
                "n_radial = {} must be >= 16",
                self.n_radial
            )));
        }
        if self.n_angular < 32 {
            return Err(Error::Config(format!(
                "n_angular = {} must be >= 32",
                self.n_angular
            )));
        }
        if !(self.radial_cutoff_sigma > 0.0 && self.radial_cutoff_sigma.is_finite()) {
            return Err(Error::Config(format!(
                "radial_cutoff_sigma = {} must be positive",
                self.radial_cutoff_sigma
            )));
        }
        Ok(())
    }

    /// Same spec with both node counts doubled.
    pub fn doubled(&self) -> Self {
        Self {
            n_radial: 2 * self.n_radial,
            n_angular: 2 * self.n_angular,
            ..*self
        }
    }
}

/// Radial integrals of the three one-mode factors of W at a fixed mode angle.
///
/// W splits as a sum of products of a gamma-factor and a delta-factor, so at
/// fixed angles the double radial integral is a product of single integrals.
#[derive(Debug, Clone, Copy)]
struct RadialFactors {
    /// `int r exp(-k |r e^{i phi} - a|^2) dr`
    plus: f64,
    /// `int r exp(-k |r e^{i phi} + a|^2) dr`
    minus: f64,
    /// `int r exp(-k r^2) exp(2ik Im(a* r e^{i phi})) dr`
    cross: Complex64,
}

/// Separable form of W at fixed state and ordering.
struct SeparableW {
    alpha: Complex64,
    beta: Complex64,
    k: f64,
    mu_sq: f64,
    nu_sq: f64,
    /// `mu* nu exp(2 s A / (1 - s))`, with the overall prefactor folded into all terms.
    cross: Complex64,
    prefactor: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SeparableW {
    fn new(state: &QuasiBellState, s: f64, spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        let s = check_distribution_s(s)?;
        let one_minus = 1.0 - s;
        let ln_pref = (4.0 * state.norm_sq() / (PI * PI * one_minus * one_minus)).ln();
        let shift = 2.0 * s * state.total_intensity() / one_minus;
        if ln_pref + shift > MAX_EXPONENT {
            return Err(Error::Overflow(format!(
                "interference prefactor exponent {:.1} exceeds {MAX_EXPONENT}",
                ln_pref + shift
            )));
        }
        let radius = state.alpha().norm().max(state.beta().norm())
            + spec.radial_cutoff_sigma * (0.5 * one_minus).sqrt();
        let (nodes, weights) = gauss_legendre_on(spec.n_radial, 0.0, radius);
        Ok(Self {
            alpha: state.alpha(),
            beta: state.beta(),
            k: 2.0 / one_minus,
            mu_sq: state.mu().norm_sqr(),
            nu_sq: state.nu().norm_sqr(),
            cross: state.mu().conj() * state.nu() * (shift + ln_pref).exp(),
            prefactor: ln_pref.exp(),
            nodes,
            weights,
        })
    }

    fn factors(&self, amp: Complex64, phi: f64) -> RadialFactors {
        let dir = Complex64::from_polar(1.0, phi);
        let (mut plus, mut minus) = (0.0, 0.0);
        let mut cross = Complex64::new(0.0, 0.0);
        for (&r, &w) in self.nodes.iter().zip(&self.weights) {
            let z = dir * r;
            let wr = w * r;
            plus += wr * (-self.k * (z - amp).norm_sqr()).exp();
            minus += wr * (-self.k * (z + amp).norm_sqr()).exp();
            let theta = 2.0 * self.k * (amp.conj() * z).im;
            cross += Complex64::from_polar(wr * (-self.k * r * r).exp(), theta);
        }
        RadialFactors { plus, minus, cross }
    }

    fn combine(&self, g: &RadialFactors, d: &RadialFactors) -> f64 {
        self.prefactor * (self.mu_sq * g.plus * d.plus + self.nu_sq * g.minus * d.minus)
            + 2.0 * (self.cross * g.cross * d.cross).re
    }

    /// Radial double integral of the symmetrized distribution at fixed mode angles.
    fn symmetrized(&self, phi_gamma: f64, phi_delta: f64) -> f64 {
        let a = self.combine(
            &self.factors(self.alpha, phi_gamma),
            &self.factors(self.beta, phi_delta),
        );
        let b = self.combine(
            &self.factors(self.alpha, phi_gamma + PI),
            &self.factors(self.beta, phi_delta + PI),
        );
        0.5 * (a + b)
    }

    #[cfg(test)]
    fn pointwise(&self, gamma: Complex64, delta: Complex64) -> f64 {
        let one = |amp: Complex64, z: Complex64| RadialFactors {
            plus: (-self.k * (z - amp).norm_sqr()).exp(),
            minus: (-self.k * (z + amp).norm_sqr()).exp(),
            cross: Complex64::from_polar(
                (-self.k * z.norm_sqr()).exp(),
                2.0 * self.k * (amp.conj() * z).im,
            ),
        };
        self.combine(&one(self.alpha, gamma), &one(self.beta, delta))
    }
}

fn angle_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| TAU * j as f64 / n as f64)
}

/// Phase-sum or phase-difference density at `phi` by direct integration of
/// the symmetrized distribution over both radii and the complementary angle.
pub fn quadrature_phase_dist(
    state: &QuasiBellState,
    s: f64,
    branch: Branch,
    phi: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let sep = SeparableW::new(state, s, spec)?;
    let h = TAU / spec.n_angular as f64;
    let terms = angle_grid(spec.n_angular).map(|other| {
        let (plus, minus) = match branch {
            Branch::Sum => (phi, other),
            Branch::Difference => (other, phi),
        };
        h * sep.symmetrized(0.5 * (plus - minus), 0.5 * (plus + minus))
    });
    Ok(compensated_sum(terms))
}

/// Integral of the symmetrized distribution over all four polar variables.
pub fn quadrature_normalization(
    state: &QuasiBellState,
    s: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let sep = SeparableW::new(state, s, spec)?;
    let n = spec.n_angular;
    // Half-sum and half-difference of two grid angles land on multiples of π/n.
    let half = |m: usize| PI * m as f64 / n as f64;
    let gam: Vec<_> = (0..2 * n)
        .map(|m| sep.factors(sep.alpha, half(m)))
        .collect();
    let del: Vec<_> = (0..2 * n).map(|m| sep.factors(sep.beta, half(m))).collect();
    let h = TAU / n as f64;
    let mut terms = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let ig = (i + 2 * n - j) % (2 * n);
            let id = (i + j) % (2 * n);
            let a = sep.combine(&gam[ig], &del[id]);
            let b = sep.combine(&gam[(ig + n) % (2 * n)], &del[(id + n) % (2 * n)]);
            terms.push(h * h * 0.5 * (a + b));
        }
    }
    Ok(compensated_sum(terms))
}

/// One-mode phase density at `phi`: W integrated over the other mode's plane
/// and this mode's radius.
pub fn quadrature_one_mode(
    state: &QuasiBellState,
    s: f64,
    mode: Mode,
    phi: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let sep = SeparableW::new(state, s, spec)?;
    let (own, other) = match mode {
        Mode::One => (sep.alpha, sep.beta),
        Mode::Two => (sep.beta, sep.alpha),
    };
    let h = TAU / spec.n_angular as f64;
    let per_angle: Vec<_> = angle_grid(spec.n_angular)
        .map(|t| sep.factors(other, t))
        .collect();
    let plane = RadialFactors {
        plus: h * compensated_sum(per_angle.iter().map(|f| f.plus)),
        minus: h * compensated_sum(per_angle.iter().map(|f| f.minus)),
        cross: Complex64::new(
            h * compensated_sum(per_angle.iter().map(|f| f.cross.re)),
            h * compensated_sum(per_angle.iter().map(|f| f.cross.im)),
        ),
    };
    Ok(sep.combine(&sep.factors(own, phi), &plane))
}

/// Nodes of the radial and angular grid, for spot checks of the integrand.
pub fn quadrature_nodes(
    state: &QuasiBellState,
    s: f64,
    spec: &QuadratureSpec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let sep = SeparableW::new(state, s, spec)?;
    Ok((sep.nodes, angle_grid(spec.n_angular).collect()))
}
