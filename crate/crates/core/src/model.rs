//! Quasi-Bell states `N (mu |alpha, beta> + nu |-alpha, -beta>)` and their parameters.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexValue = Complex64;

/// Allowed deviation of `|mu|^2 + |nu|^2` from one.
pub const WEIGHT_NORM_TOL: f64 = 1e-12;

/// States whose normalization radicand falls to this level are treated as the zero vector.
pub const NULL_STATE_THRESHOLD: f64 = 1e-300;

/// Named superposition weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetKind {
    EvenCat,
    OddCat,
    YurkeStolerPlus,
    YurkeStolerMinus,
}

impl PresetKind {
    pub const ALL: [PresetKind; 4] = [
        PresetKind::EvenCat,
        PresetKind::OddCat,
        PresetKind::YurkeStolerPlus,
        PresetKind::YurkeStolerMinus,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            PresetKind::EvenCat => "even_cat",
            PresetKind::OddCat => "odd_cat",
            PresetKind::YurkeStolerPlus => "yurke_stoler_plus",
            PresetKind::YurkeStolerMinus => "yurke_stoler_minus",
        }
    }

    /// `(mu, nu)` for this preset.
    pub fn weights(self) -> (ComplexValue, ComplexValue) {
        let h = FRAC_1_SQRT_2;
        let mu = Complex64::new(h, 0.0);
        let nu = match self {
            PresetKind::EvenCat => Complex64::new(h, 0.0),
            PresetKind::OddCat => Complex64::new(-h, 0.0),
            PresetKind::YurkeStolerPlus => Complex64::new(0.0, h),
            PresetKind::YurkeStolerMinus => Complex64::new(0.0, -h),
        };
        (mu, nu)
    }
}

impl fmt::Display for PresetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PresetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset '{s}'")))
    }
}

/// Raw, unvalidated state parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateParams {
    pub alpha: ComplexValue,
    pub beta: ComplexValue,
    pub mu: ComplexValue,
    pub nu: ComplexValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    NonFinite,
    WeightNorm,
    NonNormalizable,
}

/// One violated invariant together with the measured residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
    pub residual: f64,
}

fn all_finite(p: &StateParams) -> bool {
    [p.alpha, p.beta, p.mu, p.nu]
        .iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `1 + 2 Re(mu nu*) exp(-2(|alpha|^2 + |beta|^2))`, written so that the
/// odd-cat cancellation near the vacuum keeps its relative accuracy.
fn radicand(p: &StateParams) -> f64 {
    let two_re = 2.0 * (p.mu * p.nu.conj()).re;
    let total = p.alpha.norm_sqr() + p.beta.norm_sqr();
    (1.0 + two_re) * (-2.0 * total).exp() - (-2.0 * total).exp_m1()
}

/// Collect every violated state invariant. An empty list means the parameters are usable.
pub fn validate(params: &StateParams) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if !all_finite(params) {
        out.push(Diagnostic {
            kind: DiagnosticKind::NonFinite,
            message: "non-finite component in alpha, beta, mu or nu".into(),
            residual: f64::NAN,
        });
        return out;
    }
    let weight = params.mu.norm_sqr() + params.nu.norm_sqr();
    if (weight - 1.0).abs() > WEIGHT_NORM_TOL {
        out.push(Diagnostic {
            kind: DiagnosticKind::WeightNorm,
            message: format!("|mu|^2+|nu|^2 = {weight} != 1"),
            residual: weight - 1.0,
        });
    }
    let rad = radicand(params);
    if rad <= NULL_STATE_THRESHOLD {
        out.push(Diagnostic {
            kind: DiagnosticKind::NonNormalizable,
            message: format!("non-normalizable: radicand {rad:e} <= 1e-300"),
            residual: rad,
        });
    }
    out
}

/// A validated quasi-Bell state. Immutable after construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiBellState {
    params: StateParams,
    radicand: f64,
}

impl QuasiBellState {
    pub fn new(
        alpha: ComplexValue,
        beta: ComplexValue,
        mu: ComplexValue,
        nu: ComplexValue,
    ) -> Result<Self> {
        Self::from_params(StateParams {
            alpha,
            beta,
            mu,
            nu,
        })
    }

    /// Like [`QuasiBellState::new`] but rescales `(mu, nu)` to unit weight first.
    pub fn new_renormalized(
        alpha: ComplexValue,
        beta: ComplexValue,
        mu: ComplexValue,
        nu: ComplexValue,
    ) -> Result<Self> {
        let w = (mu.norm_sqr() + nu.norm_sqr()).sqrt();
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::InvalidState(format!(
                "cannot renormalize weights with |mu|^2+|nu|^2 = {}",
                w * w
            )));
        }
        Self::new(alpha, beta, mu / w, nu / w)
    }

    pub fn from_params(params: StateParams) -> Result<Self> {
        let diags = validate(&params);
        if let Some(d) = diags
            .iter()
            .find(|d| d.kind == DiagnosticKind::NonNormalizable)
        {
            if diags.len() == 1 {
                return Err(Error::NullState {
                    radicand: d.residual,
                });
            }
        }
        if !diags.is_empty() {
            let msg: Vec<_> = diags.iter().map(|d| d.message.as_str()).collect();
            return Err(Error::InvalidState(msg.join("; ")));
        }
        Ok(Self {
            params,
            radicand: radicand(&params),
        })
    }

    pub fn preset(kind: PresetKind, alpha: ComplexValue, beta: ComplexValue) -> Result<Self> {
        let (mu, nu) = kind.weights();
        Self::new(alpha, beta, mu, nu)
    }

    pub fn params(&self) -> StateParams {
        self.params
    }
    pub fn alpha(&self) -> ComplexValue {
        self.params.alpha
    }
    pub fn beta(&self) -> ComplexValue {
        self.params.beta
    }
    pub fn mu(&self) -> ComplexValue {
        self.params.mu
    }
    pub fn nu(&self) -> ComplexValue {
        self.params.nu
    }

    /// `|alpha|^2 + |beta|^2`
    pub fn total_intensity(&self) -> f64 {
        self.params.alpha.norm_sqr() + self.params.beta.norm_sqr()
    }

    /// `mu nu*`
    pub fn coherence(&self) -> ComplexValue {
        self.params.mu * self.params.nu.conj()
    }

    /// `|mu|^2 - |nu|^2`
    pub fn weight_imbalance(&self) -> f64 {
        self.params.mu.norm_sqr() - self.params.nu.norm_sqr()
    }

    /// `N^2`, the squared normalization constant.
    pub fn norm_sq(&self) -> f64 {
        1.0 / self.radicand
    }

    pub fn normalization_constant(&self) -> f64 {
        self.radicand.sqrt().recip()
    }

    /// Same state with both coherent amplitudes rotated by the given phases.
    pub fn rotated(&self, theta_alpha: f64, theta_beta: f64) -> Result<Self> {
        let p = self.params;
        Self::new(
            p.alpha * Complex64::from_polar(1.0, theta_alpha),
            p.beta * Complex64::from_polar(1.0, theta_beta),
            p.mu,
            p.nu,
        )
    }
}

pub fn normalization_constant(state: &QuasiBellState) -> f64 {
    state.normalization_constant()
}

pub fn make_preset(
    kind: PresetKind,
    alpha: ComplexValue,
    beta: ComplexValue,
) -> Result<QuasiBellState> {
    QuasiBellState::preset(kind, alpha, beta)
}

/// The ordering parameter `s`. Always finite; individual operations narrow the range.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct OrderingParameter(f64);

/// Distributions need `s < 1 - S_GUARD`.
pub const S_GUARD: f64 = 1e-9;

impl OrderingParameter {
    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::Domain(format!(
                "ordering parameter s = {s} is not finite"
            )));
        }
        Ok(Self(s))
    }

    /// Accepts only values admissible for quasi-probabilities and phase distributions.
    pub fn for_distribution(s: f64) -> Result<Self> {
        let p = Self::new(s)?;
        if s >= 1.0 - S_GUARD {
            return Err(Error::Domain(format!(
                "ordering parameter s = {s} must be below 1 - {S_GUARD:e}"
            )));
        }
        Ok(p)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub(crate) fn check_distribution_s(s: f64) -> Result<f64> {
    OrderingParameter::for_distribution(s).map(OrderingParameter::value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cartesian {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Polar {
    pub abs: f64,
    pub arg: f64,
}

impl From<Polar> for ComplexValue {
    fn from(p: Polar) -> Self {
        Complex64::from_polar(p.abs, p.arg)
    }
}

impl From<Cartesian> for ComplexValue {
    fn from(c: Cartesian) -> Self {
        Complex64::new(c.re, c.im)
    }
}

/// JSON state descriptor: either a preset tag or explicit weights, plus polar amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDescriptor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Cartesian>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Cartesian>,
    pub alpha: Polar,
    pub beta: Polar,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub renormalize: bool,
}

impl StateDescriptor {
    pub fn build(&self) -> Result<QuasiBellState> {
        let alpha = self.alpha.into();
        let beta = self.beta.into();
        if alpha_or_beta_bad(self.alpha) || alpha_or_beta_bad(self.beta) {
            return Err(Error::Config(
                "amplitude abs must be finite and >= 0".into(),
            ));
        }
        let (mu, nu) = match (self.preset, self.mu, self.nu) {
            (Some(kind), None, None) => kind.weights(),
            (None, Some(mu), Some(nu)) => (mu.into(), nu.into()),
            (Some(_), _, _) => {
                return Err(Error::Config(
                    "give either 'preset' or 'mu'/'nu', not both".into(),
                ))
            }
            _ => {
                return Err(Error::Config(
                    "state needs 'preset' or both 'mu' and 'nu'".into(),
                ))
            }
        };
        if self.renormalize {
            QuasiBellState::new_renormalized(alpha, beta, mu, nu)
        } else {
            QuasiBellState::new(alpha, beta, mu, nu)
        }
    }
}

fn alpha_or_beta_bad(p: Polar) -> bool {
    !(p.abs.is_finite() && p.arg.is_finite() && p.abs >= 0.0)
}
