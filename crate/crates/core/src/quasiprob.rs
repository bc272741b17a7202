//! Characteristic function and s-ordered quasi-probability distribution of a
//! quasi-Bell state, plus the 2π-symmetrized polar form used for phase-sum
//! and phase-difference marginals.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{check_distribution_s, ComplexValue, QuasiBellState};

/// Largest exponent allowed before a fused term is reported as overflowing.
pub const MAX_EXPONENT: f64 = 700.0;

/// Arguments `(xi, eta)` of the two-mode displacement operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementPoint {
    pub xi: ComplexValue,
    pub eta: ComplexValue,
}

impl DisplacementPoint {
    pub fn new(xi: ComplexValue, eta: ComplexValue) -> Self {
        Self { xi, eta }
    }
}

/// Phase-space coordinates `(gamma, delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpacePoint {
    pub gamma: ComplexValue,
    pub delta: ComplexValue,
}

impl PhaseSpacePoint {
    pub fn new(gamma: ComplexValue, delta: ComplexValue) -> Self {
        Self { gamma, delta }
    }
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative input
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Radii `|gamma|, |delta|` with phase-sum `phi_plus = phi_delta + phi_gamma`
/// and phase-difference `phi_minus = phi_delta - phi_gamma`, both in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    r_gamma: f64,
    r_delta: f64,
    phi_plus: f64,
    phi_minus: f64,
}

impl PolarPoint {
    pub fn new(r_gamma: f64, r_delta: f64, phi_plus: f64, phi_minus: f64) -> Result<Self> {
        if !(r_gamma >= 0.0 && r_delta >= 0.0 && r_gamma.is_finite() && r_delta.is_finite()) {
            return Err(Error::Domain(format!(
                "polar radii must be finite and >= 0 (got {r_gamma}, {r_delta})"
            )));
        }
        if !(phi_plus.is_finite() && phi_minus.is_finite()) {
            return Err(Error::Domain("polar angles must be finite".into()));
        }
        Ok(Self {
            r_gamma,
            r_delta,
            phi_plus: wrap_angle(phi_plus),
            phi_minus: wrap_angle(phi_minus),
        })
    }

    pub fn r_gamma(&self) -> f64 {
        self.r_gamma
    }
    pub fn r_delta(&self) -> f64 {
        self.r_delta
    }
    pub fn phi_plus(&self) -> f64 {
        self.phi_plus
    }
    pub fn phi_minus(&self) -> f64 {
        self.phi_minus
    }

    /// `(phi_gamma, phi_delta) = ((phi_+ - phi_-)/2, (phi_+ + phi_-)/2)`.
    pub fn mode_angles(&self) -> (f64, f64) {
        (
            0.5 * (self.phi_plus - self.phi_minus),
            0.5 * (self.phi_plus + self.phi_minus),
        )
    }

    pub fn to_phase_space(&self) -> PhaseSpacePoint {
        let (pg, pd) = self.mode_angles();
        PhaseSpacePoint::new(
            Complex64::from_polar(self.r_gamma, pg),
            Complex64::from_polar(self.r_delta, pd),
        )
    }
}

/// Characteristic function at a complex ordering parameter.
///
/// Each of the four terms is exponentiated once with its Gaussian prefactor
/// folded in.
pub fn chi_complex_s(
    state: &QuasiBellState,
    point: DisplacementPoint,
    s: Complex64,
) -> Result<Complex64> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::Domain(format!(
            "ordering parameter s = {s} is not finite"
        )));
    }
    let DisplacementPoint { xi, eta } = point;
    let (alpha, beta) = (state.alpha(), state.beta());
    let gauss = -(1.0 - s) * 0.5 * (xi.norm_sqr() + eta.norm_sqr());
    // xi a* - xi* a = 2i Im(xi a*);  xi a* + xi* a = 2 Re(xi a*)
    let z = xi * alpha.conj() + eta * beta.conj();
    let phase = Complex64::new(0.0, 2.0 * z.im);
    let real = 2.0 * z.re;
    let damp = -2.0 * state.total_intensity();
    let mu = state.mu();
    let nu = state.nu();
    let terms = [
        (Complex64::from(mu.norm_sqr()), gauss + phase),
        (Complex64::from(nu.norm_sqr()), gauss - phase),
        (mu.conj() * nu, gauss + damp + real),
        (mu * nu.conj(), gauss + damp - real),
    ];
    let sum: Complex64 = terms.iter().map(|&(c, e)| c * e.exp()).sum();
    Ok(sum * state.norm_sq())
}

/// s-ordered characteristic function `chi(xi, eta; s)`; any finite real `s`.
pub fn chi(state: &QuasiBellState, point: DisplacementPoint, s: f64) -> Result<Complex64> {
    chi_complex_s(state, point, Complex64::new(s, 0.0))
}

/// Pre-computed constants for repeated evaluation of the quasi-probability
/// distribution at fixed state and ordering.
#[derive(Debug, Clone)]
pub struct QuasiProbKernel {
    alpha: Complex64,
    beta: Complex64,
    mu_sq: f64,
    nu_sq: f64,
    /// `mu* nu`
    cross: Complex64,
    inv_width: f64,
    ln_prefactor: f64,
    /// `2 s (|alpha|^2 + |beta|^2) / (1 - s)`
    interference_shift: f64,
}

impl QuasiProbKernel {
    pub fn new(state: &QuasiBellState, s: f64) -> Result<Self> {
        let s = check_distribution_s(s)?;
        let one_minus = 1.0 - s;
        Ok(Self {
            alpha: state.alpha(),
            beta: state.beta(),
            mu_sq: state.mu().norm_sqr(),
            nu_sq: state.nu().norm_sqr(),
            cross: state.mu().conj() * state.nu(),
            inv_width: 1.0 / one_minus,
            ln_prefactor: (4.0 * state.norm_sq() / (PI * PI * one_minus * one_minus)).ln(),
            interference_shift: 2.0 * s * state.total_intensity() / one_minus,
        })
    }

    /// `W(gamma, delta; s)`, with the Gaussian pair and the interference pair
    /// each combined into real expressions before exponentiation.
    pub fn eval(&self, gamma: Complex64, delta: Complex64) -> Result<f64> {
        let k = 2.0 * self.inv_width;
        let g_plus = -k * ((gamma - self.alpha).norm_sqr() + (delta - self.beta).norm_sqr());
        let g_minus = -k * ((gamma + self.alpha).norm_sqr() + (delta + self.beta).norm_sqr());
        let e_int = self.interference_shift - k * (gamma.norm_sqr() + delta.norm_sqr());
        if e_int + self.ln_prefactor > MAX_EXPONENT {
            return Err(Error::Overflow(format!(
                "interference exponent {:.1} at |gamma|^2+|delta|^2 = {:.3}: |alpha|^2+|beta|^2 too large for this s",
                e_int + self.ln_prefactor,
                gamma.norm_sqr() + delta.norm_sqr()
            )));
        }
        let theta = 2.0 * k * (self.alpha.conj() * gamma + self.beta.conj() * delta).im;
        let (sin, cos) = theta.sin_cos();
        // mu* nu e^{i theta} + c.c.
        let osc = 2.0 * (self.cross.re * cos - self.cross.im * sin);
        let lp = self.ln_prefactor;
        Ok(self.mu_sq * (lp + g_plus).exp()
            + self.nu_sq * (lp + g_minus).exp()
            + osc * (lp + e_int).exp())
    }

    /// `½ [W(gamma, delta) + W(-gamma, -delta)]`.
    pub fn eval_symmetrized(&self, gamma: Complex64, delta: Complex64) -> Result<f64> {
        Ok(0.5 * (self.eval(gamma, delta)? + self.eval(-gamma, -delta)?))
    }
}

/// s-ordered quasi-probability distribution `W(gamma, delta; s)`, `s < 1`.
pub fn w(state: &QuasiBellState, point: PhaseSpacePoint, s: f64) -> Result<f64> {
    QuasiProbKernel::new(state, s)?.eval(point.gamma, point.delta)
}

/// The 2π-symmetrized distribution in phase-sum/phase-difference coordinates.
pub fn w_symmetrized(state: &QuasiBellState, point: PolarPoint, s: f64) -> Result<f64> {
    let p = point.to_phase_space();
    QuasiProbKernel::new(state, s)?.eval_symmetrized(p.gamma, p.delta)
}
