//! Characteristic function as a trace in a truncated number basis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::QuasiBellState;
use crate::quasiprob::DisplacementPoint;

/// Largest acceptable truncation bound.
pub const FOCK_BOUND_LIMIT: f64 = 1e-6;

/// Number of Fock states kept per mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockCutoff {
    n_cut: usize,
}

impl FockCutoff {
    pub fn new(n_cut: usize) -> Result<Self> {
        if n_cut < 1 {
            return Err(Error::Config("n_cut must be >= 1".into()));
        }
        Ok(Self { n_cut })
    }

    /// `ceil(4 max(|alpha|^2, |beta|^2) + 20)`.
    pub fn recommended(state: &QuasiBellState) -> Self {
        let m = state.alpha().norm_sqr().max(state.beta().norm_sqr());
        Self {
            n_cut: (4.0 * m + 20.0).ceil() as usize,
        }
    }

    pub fn n_cut(self) -> usize {
        self.n_cut
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockChi {
    pub value: Complex64,
    /// Upper bound on the truncation error of `value`.
    pub bound: f64,
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

/// `e^{-|a|^2/2} a^n / sqrt(n!)` for `n < n_cut`.
fn coherent_coefficients(a: Complex64, n_cut: usize) -> Vec<Complex64> {
    let mut c = Vec::with_capacity(n_cut);
    let mut cur = Complex64::new((-0.5 * a.norm_sqr()).exp(), 0.0);
    for n in 0..n_cut {
        if n > 0 {
            cur = cur * a / (n as f64).sqrt();
        }
        c.push(cur);
    }
    c
}

/// Norm of the discarded part `sqrt(sum_{n >= n_cut} |c_n|^2)`.
fn coherent_tail(a: Complex64, n_cut: usize) -> f64 {
    let x = a.norm_sqr();
    if x == 0.0 {
        return 0.0;
    }
    let lf = ln_factorials(n_cut + 2000);
    let mut sum = 0.0;
    for n in n_cut..n_cut + 2000 {
        let term = (-x + n as f64 * x.ln() - lf[n]).exp();
        sum += term;
        if n as f64 > x && term < 1e-300 {
            break;
        }
    }
    sum.sqrt()
}

/// Matrix `<m|D(xi)|n>` for `m, n < n_cut`, row-major.
fn displacement_matrix(xi: Complex64, n_cut: usize) -> Vec<Complex64> {
    let mut d = vec![Complex64::new(0.0, 0.0); n_cut * n_cut];
    let x = xi.norm_sqr();
    if x == 0.0 {
        for i in 0..n_cut {
            d[i * n_cut + i] = Complex64::new(1.0, 0.0);
        }
        return d;
    }
    let lf = ln_factorials(2 * n_cut);
    let (r, arg) = (xi.norm(), xi.arg());
    for k in 0..n_cut {
        let kf = k as f64;
        // Laguerre L_j^{(k)}(x) by upward recurrence in j.
        let (mut l_prev, mut l_cur) = (0.0, 1.0);
        for j in 0..n_cut - k {
            if j > 0 {
                let jf = j as f64;
                let next = ((2.0 * jf - 1.0 + kf - x) * l_cur - (jf - 1.0 + kf) * l_prev) / jf;
                l_prev = l_cur;
                l_cur = next;
            }
            let mag = (0.5 * (lf[j] - lf[j + k]) + kf * r.ln() - 0.5 * x).exp() * l_cur;
            // m = j + k >= n = j: xi^k; m < n: (-xi*)^k.
            d[(j + k) * n_cut + j] = Complex64::from_polar(mag, kf * arg);
            if k > 0 {
                d[j * n_cut + j + k] =
                    Complex64::from_polar(mag, kf * (std::f64::consts::PI - arg));
            }
        }
    }
    d
}

/// `<bra| D |ket>` in the truncated basis.
fn sandwich(bra: &[Complex64], d: &[Complex64], ket: &[Complex64]) -> Complex64 {
    let n = ket.len();
    (0..n)
        .map(|m| {
            let row: Complex64 = (0..n).map(|j| d[m * n + j] * ket[j]).sum();
            bra[m].conj() * row
        })
        .sum()
}

/// `Tr{rho D(xi, eta)} exp(s(|xi|^2 + |eta|^2)/2)` in a truncated number basis.
pub fn fock_chi_oracle(
    state: &QuasiBellState,
    point: DisplacementPoint,
    s: f64,
    cutoff: FockCutoff,
) -> Result<FockChi> {
    if !s.is_finite() {
        return Err(Error::Domain(format!("s = {s} must be finite")));
    }
    let n = cutoff.n_cut;
    let (a, b) = (state.alpha(), state.beta());
    let (mu, nu) = (state.mu(), state.nu());
    let a_pos = coherent_coefficients(a, n);
    let a_neg = coherent_coefficients(-a, n);
    let b_pos = coherent_coefficients(b, n);
    let b_neg = coherent_coefficients(-b, n);
    let dx = displacement_matrix(point.xi, n);
    let de = displacement_matrix(point.eta, n);

    // rho = N^2 sum c_ij |psi_i><psi_j|, trace term <psi_j|D|psi_i>.
    let branches = [(&a_pos, &b_pos), (&a_neg, &b_neg)];
    let weights = [
        [mu.norm_sqr().into(), mu * nu.conj()],
        [nu * mu.conj(), nu.norm_sqr().into()],
    ];
    let mut trace = Complex64::new(0.0, 0.0);
    for (i, ket) in branches.iter().enumerate() {
        for (j, bra) in branches.iter().enumerate() {
            let c: Complex64 = weights[i][j];
            trace += c * sandwich(bra.0, &dx, ket.0) * sandwich(bra.1, &de, ket.1);
        }
    }
    let norm_sq = state.norm_sq();
    let gauss = (0.5 * s * (point.xi.norm_sqr() + point.eta.norm_sqr())).exp();
    let value = trace * norm_sq * gauss;

    let weight_sum = mu.norm_sqr() + nu.norm_sqr() + 2.0 * (mu * nu.conj()).norm();
    let tails = 2.0 * coherent_tail(a, n) + 2.0 * coherent_tail(b, n);
    let bound = norm_sq * weight_sum * tails * gauss;
    if bound.is_nan() || bound > FOCK_BOUND_LIMIT {
        return Err(Error::CutoffTooSmall { bound });
    }
    Ok(FockChi { value, bound })
}
