//! Scaled modified Bessel functions, Kummer's function and the Bessel
//! combinations that make up the phase-distribution coefficients.
//!
//! Everything that can overflow is returned as a [`LogScaledValue`].

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};

/// Relative size below which a series term counts as negligible.
const SERIES_REL_TOL: f64 = 1e-17;
/// Consecutive negligible terms required before a series is stopped.
const SERIES_QUIET_TERMS: usize = 3;
/// Hard cap on series terms and continued-fraction steps.
pub const MAX_TERMS: usize = 10_000;
/// Above this argument `I_0` switches from the power series to the asymptotic expansion.
const I0_SERIES_LIMIT: f64 = 30.0;

/// Order `nu = twice_order / 2` of a modified Bessel function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BesselOrder {
    twice_order: u32,
}

impl BesselOrder {
    pub fn from_twice(twice_order: u32) -> Self {
        Self { twice_order }
    }

    pub fn integer(n: u32) -> Self {
        Self { twice_order: 2 * n }
    }

    /// Order `k + 1/2`.
    pub fn half_odd(k: u32) -> Self {
        Self {
            twice_order: 2 * k + 1,
        }
    }

    pub fn twice(self) -> u32 {
        self.twice_order
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice_order) / 2.0
    }

    pub fn is_half_integer(self) -> bool {
        self.twice_order % 2 == 1
    }
}

/// A real number stored as `sign * exp(log_mag)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScaledValue {
    sign: i8,
    log_mag: f64,
}

impl LogScaledValue {
    pub const ZERO: Self = Self {
        sign: 0,
        log_mag: f64::NEG_INFINITY,
    };

    pub fn new(sign: i8, log_mag: f64) -> Self {
        if sign == 0 || log_mag == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        debug_assert!(log_mag.is_finite(), "log magnitude must be finite");
        Self {
            sign: sign.signum(),
            log_mag,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn log_mag(self) -> f64 {
        if self.sign == 0 {
            f64::NEG_INFINITY
        } else {
            self.log_mag
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    /// Plain value; may be `inf` when the magnitude exceeds `f64`.
    pub fn value(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.log_mag.exp()
        }
    }

    /// Multiply by `exp(delta)`.
    pub fn scale_exp(self, delta: f64) -> Self {
        if self.sign == 0 {
            self
        } else {
            Self::new(self.sign, self.log_mag + delta)
        }
    }

    pub fn mul(self, other: Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            Self::ZERO
        } else {
            Self::new(self.sign * other.sign, self.log_mag + other.log_mag)
        }
    }
}

/// Which of the two Bessel combinations `I_n^(+)` / `I_n^(-)` to form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Combo {
    /// `sqrt(x) e^{-x} (I_{(n-1)/2} + I_{(n+1)/2})`
    Sum,
    /// `sqrt(x) e^{+x} (I_{(n-1)/2} - I_{(n+1)/2})`
    Difference,
}

impl Combo {
    fn sign(self) -> f64 {
        match self {
            Combo::Sum => 1.0,
            Combo::Difference => -1.0,
        }
    }
}

fn check_arg(x: f64, what: &str) -> Result<()> {
    if x.is_nan() || x < 0.0 || x.is_infinite() {
        return Err(Error::Domain(format!(
            "{what}: argument x = {x} must be finite and >= 0"
        )));
    }
    Ok(())
}

/// `ln(e^{-x} I_0(x))` for `x > 0`.
fn ln_i0_scaled(x: f64) -> f64 {
    if x <= I0_SERIES_LIMIT {
        // sum (x^2/4)^k / (k!)^2, all terms positive
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= q / (k * k);
            sum += term;
            if term < SERIES_REL_TOL * sum {
                break;
            }
        }
        sum.ln() - x
    } else {
        // e^{-x} I_0(x) ~ (2 pi x)^{-1/2} sum_k ((2k-1)!!)^2 / (k! (8x)^k)
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0.0;
        loop {
            k += 1.0;
            let next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
            if next >= term || next < SERIES_REL_TOL * sum {
                if next < term {
                    sum += next;
                }
                break;
            }
            term = next;
            sum += term;
        }
        sum.ln() - 0.5 * (2.0 * PI * x).ln()
    }
}

/// `ln(e^{-x} I_{1/2}(x))` for `x > 0`, from `I_{1/2}(x) = sqrt(2/(pi x)) sinh x`.
fn ln_i_half_scaled(x: f64) -> f64 {
    0.5 * (2.0 / (PI * x)).ln() + (-0.5 * (-2.0 * x).exp_m1()).ln()
}

/// Continued fraction for `I_{nu+1}(x) / I_nu(x)`, `x > 0`.
fn ratio_cf(nu: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    // f = b_1 + 1/(b_2 + 1/(b_3 + ...)),  b_k = 2(nu + k)/x,  ratio = 1/f
    let b = |k: usize| 2.0 * (nu + k as f64) / x;
    let mut f = b(1);
    let mut c = f;
    let mut d = 0.0;
    for k in 2..MAX_TERMS {
        let bk = b(k);
        d += bk;
        if d.abs() < TINY {
            d = TINY;
        }
        c = bk + 1.0 / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(1.0 / f);
        }
    }
    Err(Error::NoConvergence {
        what: "Bessel ratio continued fraction",
        iterations: MAX_TERMS,
    })
}

/// `I_{nu+1}(x) / I_nu(x)`, which lies in `(0, 1)` for `x > 0`.
pub fn bessel_i_ratio(order: BesselOrder, x: f64) -> Result<f64> {
    check_arg(x, "bessel_i_ratio")?;
    if x == 0.0 {
        return Err(Error::Domain("bessel_i_ratio: x must be > 0".into()));
    }
    ratio_cf(order.value(), x)
}

/// `ln(e^{-x} I_nu(x))`; `-inf` when the value is zero (`x = 0`, `nu > 0`).
///
/// The base order (0 or 1/2) is evaluated directly and raised to `nu` with
/// the ratios `I_{k+1}/I_k`, generated downward from one continued fraction.
pub fn ln_bessel_i_scaled(order: BesselOrder, x: f64) -> Result<f64> {
    check_arg(x, "bessel_i_scaled")?;
    if x == 0.0 {
        return Ok(if order.twice() == 0 {
            0.0
        } else {
            f64::NEG_INFINITY
        });
    }
    let (base_twice, base) = if order.is_half_integer() {
        (1, ln_i_half_scaled(x))
    } else {
        (0, ln_i0_scaled(x))
    };
    let steps = (order.twice() - base_twice) / 2;
    if steps == 0 {
        return Ok(base);
    }
    let nu = order.value();
    // r_k = I_{k+1}/I_k for k = nu-1 down to the base order
    let mut r = ratio_cf(nu - 1.0, x)?;
    let mut prod = r;
    let mut ln_acc = 0.0;
    let mut k = nu - 1.0;
    for _ in 1..steps {
        r = 1.0 / (2.0 * k / x + r);
        k -= 1.0;
        prod *= r;
        if prod < 1e-250 {
            ln_acc += prod.ln();
            prod = 1.0;
        }
    }
    Ok(base + ln_acc + prod.ln())
}

/// `e^{-x} I_nu(x)` for `x >= 0`.
pub fn bessel_i_scaled(order: BesselOrder, x: f64) -> Result<f64> {
    ln_bessel_i_scaled(order, x).map(f64::exp)
}

/// `I_n^(+)(x)` or `I_n^(-)(x)` in log-scaled form.
///
/// The difference combination is formed as `I_{(n-1)/2} (1 - r)` with `r`
/// the order ratio, so no subtraction of nearly equal Bessel values occurs.
pub fn i_n_combo(n: u32, x: f64, combo: Combo) -> Result<LogScaledValue> {
    if n < 1 {
        return Err(Error::Domain("i_n_combo: n must be >= 1".into()));
    }
    check_arg(x, "i_n_combo")?;
    if x == 0.0 {
        return Ok(LogScaledValue::ZERO);
    }
    let low = BesselOrder::from_twice(n - 1);
    let ln_low = ln_bessel_i_scaled(low, x)?;
    let r = ratio_cf(low.value(), x)?;
    let log_mag = match combo {
        Combo::Sum => 0.5 * x.ln() + ln_low + r.ln_1p(),
        Combo::Difference => 0.5 * x.ln() + 2.0 * x + ln_low + (-r).ln_1p(),
    };
    Ok(LogScaledValue::new(1, log_mag))
}

/// `ln Gamma(twice / 2)` for a positive integer or half-integer argument.
pub(crate) fn ln_gamma_half(twice: u32) -> f64 {
    assert!(twice > 0, "ln_gamma_half: argument must be positive");
    if twice % 2 == 0 {
        // (m-1)!
        let m = twice / 2;
        (2..m).map(|j| f64::from(j).ln()).sum()
    } else {
        // sqrt(pi) prod_{j<k} (j + 1/2)
        let k = twice / 2;
        0.5 * PI.ln() + (0..k).map(|j| (f64::from(j) + 0.5).ln()).sum::<f64>()
    }
}

fn is_nonpositive_integer(b: f64) -> bool {
    b <= 0.0 && b.fract() == 0.0
}

/// Kummer's confluent hypergeometric function `M(a, b, x)` in log-scaled form.
///
/// Uses the ascending series for `x >= 0` and `M(a,b,x) = e^x M(b-a,b,-x)` otherwise.
pub fn kummer_m_log(a: f64, b: f64, x: f64) -> Result<LogScaledValue> {
    if !(a.is_finite() && b.is_finite() && x.is_finite()) {
        return Err(Error::Domain(format!(
            "kummer_m: non-finite input ({a}, {b}, {x})"
        )));
    }
    if is_nonpositive_integer(b) {
        return Err(Error::Domain(format!(
            "kummer_m: b = {b} is a non-positive integer"
        )));
    }
    if x < 0.0 {
        return Ok(kummer_series(b - a, b, -x)?.scale_exp(x));
    }
    kummer_series(a, b, x)
}

fn kummer_series(a: f64, b: f64, z: f64) -> Result<LogScaledValue> {
    const RESCALE_AT: f64 = 1e200;
    let ln_rescale = RESCALE_AT.ln();
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut ln_scale = 0.0;
    let mut quiet = 0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf - 1.0) / (b + kf - 1.0) * z / kf;
        sum += term;
        if term == 0.0 {
            // terminating series (a a non-positive integer) or z = 0
            return Ok(LogScaledValue::from_f64(sum).scale_exp(ln_scale));
        }
        if sum.abs() > RESCALE_AT {
            sum /= RESCALE_AT;
            term /= RESCALE_AT;
            ln_scale += ln_rescale;
        }
        if term.abs() < SERIES_REL_TOL * sum.abs() {
            quiet += 1;
            if quiet >= SERIES_QUIET_TERMS {
                return Ok(LogScaledValue::from_f64(sum).scale_exp(ln_scale));
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NoConvergence {
        what: "Kummer series",
        iterations: MAX_TERMS,
    })
}

/// `I_n^(+)(x)` or `I_n^(-)(x)` through Kummer's function:
/// `sqrt(2/pi) Gamma(n/2+1)/Gamma(n+1) (2x)^{n/2} e^{-+2x} M(n/2+1, n+1, +-2x)`.
pub fn i_n_combo_kummer(n: u32, x: f64, combo: Combo) -> Result<LogScaledValue> {
    if n < 1 {
        return Err(Error::Domain("i_n_combo_kummer: n must be >= 1".into()));
    }
    check_arg(x, "i_n_combo_kummer")?;
    if x == 0.0 {
        return Ok(LogScaledValue::ZERO);
    }
    let nf = f64::from(n);
    let ln_gamma_ratio = ln_gamma_half(n + 2) - ln_gamma_half(2 * n + 2);
    let ln_pref = 0.5 * (LN_2 - PI.ln()) + ln_gamma_ratio + 0.5 * nf * (2.0 * x).ln();
    let sg = combo.sign();
    let m = kummer_m_log(0.5 * nf + 1.0, nf + 1.0, sg * 2.0 * x)?;
    Ok(m.scale_exp(ln_pref - sg * 2.0 * x))
}
