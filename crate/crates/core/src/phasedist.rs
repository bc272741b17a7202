//! Phase-sum, phase-difference and one-mode phase distributions as Fourier
//! series, together with their trigonometric and phase moments.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_distribution_s, QuasiBellState};
use crate::quasiprob::{wrap_angle, MAX_EXPONENT};
use crate::specfun::{i_n_combo, Combo, LogScaledValue};

/// Phase-sum (`+`) or phase-difference (`-`) marginal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Sum,
    Difference,
}

impl Branch {
    /// `(+1)^n` or `(-1)^n`.
    fn parity(self, n: u32) -> f64 {
        match self {
            Branch::Sum => 1.0,
            Branch::Difference if n % 2 == 0 => 1.0,
            Branch::Difference => -1.0,
        }
    }

    /// Reference phase `phi_beta +- phi_alpha`, in `[0, 2π)`.
    pub fn reference_phase(self, state: &QuasiBellState) -> f64 {
        let (pa, pb) = (state.alpha().arg(), state.beta().arg());
        wrap_angle(match self {
            Branch::Sum => pb + pa,
            Branch::Difference => pb - pa,
        })
    }

    pub fn tag(self) -> &'static str {
        match self {
            Branch::Sum => "plus",
            Branch::Difference => "minus",
        }
    }
}

/// Which mode a one-mode marginal belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl Mode {
    pub fn index(self) -> u8 {
        match self {
            Mode::One => 1,
            Mode::Two => 2,
        }
    }
}

/// Stopping rule for the infinite coefficient series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub eps_tail: f64,
    pub n_min: u32,
    pub n_max: u32,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            eps_tail: 1e-14,
            n_min: 4,
            n_max: 512,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_tail > 0.0 && self.eps_tail.is_finite()) {
            return Err(Error::Config(format!(
                "eps_tail = {} must be > 0",
                self.eps_tail
            )));
        }
        if self.n_min < 1 || self.n_min > self.n_max {
            return Err(Error::Config(format!(
                "need 1 <= n_min <= n_max (got {}, {})",
                self.n_min, self.n_max
            )));
        }
        Ok(())
    }
}

/// Reduce to `(-π, π]`.
fn centered(theta: f64) -> f64 {
    let t = wrap_angle(theta);
    if t > PI {
        t - TAU
    } else {
        t
    }
}

/// Exponentiate a log-scaled value, refusing magnitudes beyond [`MAX_EXPONENT`].
fn finite_value(v: LogScaledValue, what: &str) -> Result<f64> {
    if v.log_mag() > MAX_EXPONENT {
        return Err(Error::Overflow(format!(
            "{what}: log magnitude {:.1} exceeds {MAX_EXPONENT}",
            v.log_mag()
        )));
    }
    Ok(v.value())
}

/// State quantities shared by all coefficient formulas.
struct CoefficientInputs {
    ln_norm_sq: f64,
    two_re: f64,
    two_im: f64,
    imbalance: f64,
    /// `-2(|alpha|^2 + |beta|^2)`
    damping: f64,
    x_alpha: f64,
    x_beta: f64,
}

impl CoefficientInputs {
    fn new(state: &QuasiBellState, s: f64) -> Result<Self> {
        let s = check_distribution_s(s)?;
        let coh = state.coherence();
        Ok(Self {
            ln_norm_sq: state.norm_sq().ln(),
            two_re: 2.0 * coh.re,
            two_im: 2.0 * coh.im,
            imbalance: state.weight_imbalance(),
            damping: -2.0 * state.total_intensity(),
            x_alpha: state.alpha().norm_sqr() / (1.0 - s),
            x_beta: state.beta().norm_sqr() / (1.0 - s),
        })
    }

    /// `weight * e^{damping} * value` with all exponents fused.
    fn damped(&self, weight: f64, value: LogScaledValue, ln_pref: f64) -> LogScaledValue {
        LogScaledValue::from_f64(weight)
            .mul(value)
            .scale_exp(self.damping + ln_pref)
    }

    fn two_mode(&self, n: u32, branch: Branch) -> Result<f64> {
        let ln_pref = self.ln_norm_sq + FRAC_PI_2.ln();
        let gauss = i_n_combo(n, self.x_alpha, Combo::Sum)?
            .mul(i_n_combo(n, self.x_beta, Combo::Sum)?)
            .scale_exp(ln_pref);
        let interference = i_n_combo(n, self.x_alpha, Combo::Difference)?.mul(i_n_combo(
            n,
            self.x_beta,
            Combo::Difference,
        )?);
        let interference = self.damped(branch.parity(n) * self.two_re, interference, ln_pref);
        Ok(finite_value(gauss, "Gaussian coefficient term")?
            + finite_value(interference, "interference coefficient term")?)
    }

    /// `(c_n, d_n)` of the one-mode series; `d_n = 0` for even `n`.
    fn one_mode(&self, n: u32, mode: Mode) -> Result<(f64, f64)> {
        let x = match mode {
            Mode::One => self.x_alpha,
            Mode::Two => self.x_beta,
        };
        let ln_pref = self.ln_norm_sq + 0.5 * FRAC_PI_2.ln();
        let plus = i_n_combo(n, x, Combo::Sum)?;
        let minus = i_n_combo(n, x, Combo::Difference)?;
        if n % 2 == 0 {
            let g = finite_value(plus.scale_exp(ln_pref), "one-mode coefficient")?;
            let i = finite_value(
                self.damped(self.two_re, minus, ln_pref),
                "one-mode coefficient",
            )?;
            Ok((g + i, 0.0))
        } else {
            let c = LogScaledValue::from_f64(self.imbalance)
                .mul(plus)
                .scale_exp(ln_pref);
            let d = self.damped(self.two_im, minus, ln_pref);
            Ok((
                finite_value(c, "one-mode coefficient")?,
                finite_value(d, "one-mode sine coefficient")?,
            ))
        }
    }
}

/// Fourier coefficient `c_n` of the phase-sum or phase-difference distribution.
pub fn fourier_coefficient(state: &QuasiBellState, s: f64, n: u32, branch: Branch) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("fourier_coefficient: n must be >= 1".into()));
    }
    CoefficientInputs::new(state, s)?.two_mode(n, branch)
}

/// Truncated cosine series `P(phi) = (1/2π)[1 + 2 sum c_n cos n(phi - phi')]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSpectrum {
    branch: Branch,
    phi_prime: f64,
    coeffs: Vec<f64>,
    tail_bound: f64,
    state: QuasiBellState,
    s: f64,
}

impl FourierSpectrum {
    pub fn branch(&self) -> Branch {
        self.branch
    }
    pub fn phi_prime(&self) -> f64 {
        self.phi_prime
    }
    /// `c_1 ..= c_N`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
    pub fn n_used(&self) -> usize {
        self.coeffs.len()
    }
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }
    pub fn state(&self) -> &QuasiBellState {
        &self.state
    }
    pub fn s(&self) -> f64 {
        self.s
    }

    /// `c_n` for any `n >= 0` (`c_0 = 1`); indices past the truncation are computed on demand.
    pub fn coefficient(&self, n: u32) -> Result<f64> {
        match n as usize {
            0 => Ok(1.0),
            k if k <= self.coeffs.len() => Ok(self.coeffs[k - 1]),
            _ => fourier_coefficient(&self.state, self.s, n, self.branch),
        }
    }
}

/// Coefficients until two consecutive ones (from `n_min` on) drop below `eps_tail`.
fn truncate<F>(policy: &TruncationPolicy, mut coefficient: F) -> Result<u32>
where
    F: FnMut(u32) -> Result<f64>,
{
    policy.validate()?;
    let mut prev = f64::INFINITY;
    for n in 1..=policy.n_max {
        let mag = coefficient(n)?;
        if n >= policy.n_min && mag.max(prev) < policy.eps_tail {
            return Ok(n);
        }
        prev = mag;
    }
    Err(Error::NoConvergence {
        what: "phase-distribution coefficient series",
        iterations: policy.n_max as usize,
    })
}

pub fn build_spectrum(
    state: &QuasiBellState,
    s: f64,
    branch: Branch,
    policy: &TruncationPolicy,
) -> Result<FourierSpectrum> {
    let inputs = CoefficientInputs::new(state, s)?;
    let mut coeffs = Vec::new();
    truncate(policy, |n| {
        let c = inputs.two_mode(n, branch)?;
        coeffs.push(c);
        Ok(c.abs())
    })?;
    let k = coeffs.len();
    let tail_bound = coeffs[k - 1]
        .abs()
        .max(if k >= 2 { coeffs[k - 2].abs() } else { 1.0 });
    Ok(FourierSpectrum {
        branch,
        phi_prime: branch.reference_phase(state),
        coeffs,
        tail_bound,
        state: *state,
        s,
    })
}

/// `sum_{n>=1} a_n cos(n theta)` by Clenshaw's recurrence.
fn cosine_sum(coeffs: &[f64], theta: f64) -> f64 {
    let two_cos = 2.0 * theta.cos();
    let (mut b1, mut b2) = (0.0, 0.0);
    for &a in coeffs.iter().rev() {
        let b0 = a + two_cos * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    0.5 * two_cos * b1 - b2
}

/// `sum_{n>=1} a_n sin(n theta)` by Clenshaw's recurrence.
fn sine_sum(coeffs: &[f64], theta: f64) -> f64 {
    let two_cos = 2.0 * theta.cos();
    let (mut b1, mut b2) = (0.0, 0.0);
    for &a in coeffs.iter().rev() {
        let b0 = a + two_cos * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    b1 * theta.sin()
}

/// Phase density at `phi`; any real `phi` is accepted.
pub fn eval_phase_dist(spectrum: &FourierSpectrum, phi: f64) -> f64 {
    let theta = centered(phi - spectrum.phi_prime);
    (1.0 + 2.0 * cosine_sum(&spectrum.coeffs, theta)) / TAU
}

/// One-mode series
/// `(1/2π){1 + 2 sum [c_n cos n(phi - phi_ref) + d_n sin n(phi - phi_ref)]}`,
/// where only odd `n` carry sine terms.
#[derive(Debug, Clone, PartialEq)]
pub struct OneModeSpectrum {
    mode: Mode,
    phi_ref: f64,
    c: Vec<f64>,
    d: Vec<f64>,
}

impl OneModeSpectrum {
    pub fn mode(&self) -> Mode {
        self.mode
    }
    pub fn phi_ref(&self) -> f64 {
        self.phi_ref
    }
    pub fn n_used(&self) -> usize {
        self.c.len()
    }
    /// `c_2, c_4, ...`
    pub fn c_even(&self) -> Vec<f64> {
        self.c.iter().skip(1).step_by(2).copied().collect()
    }
    /// `c_1, c_3, ...`
    pub fn c_odd(&self) -> Vec<f64> {
        self.c.iter().step_by(2).copied().collect()
    }
    /// `d_1, d_3, ...`
    pub fn d_odd(&self) -> Vec<f64> {
        self.d.iter().step_by(2).copied().collect()
    }
    /// All cosine coefficients `c_1 ..= c_N`.
    pub fn cos_coeffs(&self) -> &[f64] {
        &self.c
    }
    /// All sine coefficients `d_1 ..= d_N` (zero at even indices).
    pub fn sin_coeffs(&self) -> &[f64] {
        &self.d
    }
}

pub fn one_mode_coefficients(
    state: &QuasiBellState,
    s: f64,
    mode: Mode,
    policy: &TruncationPolicy,
) -> Result<OneModeSpectrum> {
    let inputs = CoefficientInputs::new(state, s)?;
    let (mut c, mut d) = (Vec::new(), Vec::new());
    truncate(policy, |n| {
        let (cn, dn) = inputs.one_mode(n, mode)?;
        c.push(cn);
        d.push(dn);
        Ok(cn.abs().max(dn.abs()))
    })?;
    let amp = match mode {
        Mode::One => state.alpha(),
        Mode::Two => state.beta(),
    };
    Ok(OneModeSpectrum {
        mode,
        phi_ref: wrap_angle(amp.arg()),
        c,
        d,
    })
}

pub fn eval_one_mode_dist(spectrum: &OneModeSpectrum, phi: f64) -> f64 {
    let theta = centered(phi - spectrum.phi_ref);
    (1.0 + 2.0 * (cosine_sum(&spectrum.c, theta) + sine_sum(&spectrum.d, theta))) / TAU
}

/// Central trigonometric moments of order `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrigMoments {
    pub mean_cos: f64,
    pub mean_sin: f64,
    pub var_cos: f64,
    pub var_sin: f64,
}

pub fn trig_moments(spectrum: &FourierSpectrum, n: u32) -> Result<TrigMoments> {
    if n < 1 {
        return Err(Error::Domain("trig_moments: n must be >= 1".into()));
    }
    let cn = spectrum.coefficient(n)?;
    let c2n = spectrum.coefficient(2 * n)?;
    Ok(TrigMoments {
        mean_cos: cn,
        mean_sin: 0.0,
        var_cos: 0.5 * (1.0 - 2.0 * cn * cn + c2n),
        var_sin: 0.5 * (1.0 - c2n),
    })
}

/// A 2π window `[phi0 - π, phi0 + π)` for phase moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseWindow {
    pub phi0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseMoments {
    pub mean: f64,
    pub variance: f64,
}

/// Mean and variance of the phase over the window, from the truncated series.
pub fn phase_mean_var(spectrum: &FourierSpectrum, window: PhaseWindow) -> PhaseMoments {
    let offset = window.phi0 - spectrum.phi_prime;
    let (mut shift, mut var_sum) = (0.0, 0.0);
    for (i, &c) in spectrum.coeffs.iter().enumerate() {
        let n = (i + 1) as f64;
        let sign = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let (sin, cos) = (n * offset).sin_cos();
        shift += sign * c * sin / n;
        var_sum += sign * c * cos / (n * n);
    }
    let shift = 2.0 * shift;
    PhaseMoments {
        mean: window.phi0 + shift,
        variance: PI * PI / 3.0 - shift * shift + 4.0 * var_sum,
    }
}
