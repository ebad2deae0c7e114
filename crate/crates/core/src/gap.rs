//! Gap approximation for uncoded PAM on the single-user AWGN channel.
//!
//! All rates are in bits per real dimension. A PAM constellation with
//! `bits = k` has `M = 2^k` equally spaced amplitudes; `k = 0` is admitted as
//! the silent "constellation" carrying no power and no rate.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{MacError, Result};

/// Relative slack used when deciding whether a power reaches an integer-bit
/// level. Powers read back from files carry rounding noise of this order.
pub const LEVEL_RTOL: f64 = 1e-9;

/// Largest constellation order considered when inverting the power ladder.
pub const MAX_BITS: u32 = 60;

/// Gaussian tail probability `Q(x) = P[N(0,1) > x]`.
pub fn q_func(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(MacError::Domain(format!("q_func argument must be finite, got {x}")));
    }
    Ok(0.5 * libm::erfc(x * FRAC_1_SQRT_2))
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Acklam's rational approximation of the standard normal quantile,
/// relative error around 1e-9. Used only as a starting point.
fn normal_quantile_guess(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Inverse of [`q_func`] on `(0, 1)`.
pub fn q_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(MacError::Domain(format!("q_inv argument must lie in (0,1), got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // Q(x) = p  <=>  Phi(-x) = p.
    let mut x = -normal_quantile_guess(p);
    for _ in 0..50 {
        let err = 0.5 * libm::erfc(x * FRAC_1_SQRT_2) - p;
        let pdf = normal_pdf(x);
        if pdf == 0.0 {
            break;
        }
        // Halley step on f(x) = Q(x) - p, f' = -pdf, f'' = x pdf.
        let u = err / pdf;
        let step = u / (1.0 - 0.5 * x * u);
        x += step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            return Ok(x);
        }
    }
    bisect_q_inv(p)
}

fn bisect_q_inv(p: f64) -> Result<f64> {
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 0.5 * libm::erfc(mid * FRAC_1_SQRT_2) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    if x.is_finite() {
        Ok(x)
    } else {
        Err(MacError::Numerical(format!("q_inv({p}) did not converge")))
    }
}

fn check_bits(bits: u32) -> Result<()> {
    if bits < 1 {
        return Err(MacError::Domain("constellation needs at least one bit".into()));
    }
    if bits > MAX_BITS {
        return Err(MacError::Domain(format!("constellation order {bits} exceeds {MAX_BITS} bits")));
    }
    Ok(())
}

fn levels(bits: u32) -> f64 {
    2f64.powi(bits as i32)
}

/// Minimum distance of `2^bits`-PAM with average power `power`.
pub fn pam_dmin(power: f64, bits: u32) -> Result<f64> {
    check_bits(bits)?;
    if !(power >= 0.0) {
        return Err(MacError::Domain(format!("power must be nonnegative, got {power}")));
    }
    let m = levels(bits);
    Ok((12.0 * power / (m * m - 1.0)).sqrt())
}

/// Symbol-error probability of equiprobable `2^bits`-PAM at the given SNR.
pub fn pam_ser(snr: f64, bits: u32) -> Result<f64> {
    check_bits(bits)?;
    if !(snr >= 0.0) {
        return Err(MacError::Domain(format!("snr must be nonnegative, got {snr}")));
    }
    let m = levels(bits);
    Ok(2.0 * (1.0 - 1.0 / m) * q_func((3.0 * snr / (m * m - 1.0)).sqrt())?)
}

/// Target symbol-error probability and optional coding gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapParams {
    target_pe: f64,
    coding_gain_db: f64,
}

impl GapParams {
    pub fn new(target_pe: f64, coding_gain_db: f64) -> Result<Self> {
        if !(target_pe > 0.0 && target_pe < 1.0) {
            return Err(MacError::Domain(format!("target Pe must lie in (0,1), got {target_pe}")));
        }
        if !(coding_gain_db >= 0.0) || !coding_gain_db.is_finite() {
            return Err(MacError::Domain(format!(
                "coding gain must be a finite nonnegative dB value, got {coding_gain_db}"
            )));
        }
        Ok(Self { target_pe, coding_gain_db })
    }

    /// Uncoded transmission at the given target Pe.
    pub fn uncoded(target_pe: f64) -> Result<Self> {
        Self::new(target_pe, 0.0)
    }

    pub fn target_pe(&self) -> f64 {
        self.target_pe
    }

    pub fn coding_gain_db(&self) -> f64 {
        self.coding_gain_db
    }

    pub fn coding_gain_linear(&self) -> f64 {
        10f64.powf(self.coding_gain_db / 10.0)
    }

    fn apply_coding_gain(&self, raw: f64) -> f64 {
        let gain = self.coding_gain_linear();
        if gain > 1.0 {
            (raw / gain).max(raw.min(1.0))
        } else {
            raw
        }
    }
}

fn raw_gap(m: f64, pe: f64) -> Result<f64> {
    let arg = m * pe / (2.0 * (m - 1.0));
    if !(arg > 0.0 && arg < 1.0) {
        return Err(MacError::Domain(format!(
            "gap undefined: Q^-1 argument {arg} outside (0,1) for M = {m}, Pe = {pe}"
        )));
    }
    let x = q_inv(arg)?;
    Ok(x * x / 3.0)
}

/// SNR gap of `2^bits`-PAM at the target Pe, reduced by the coding gain.
pub fn gap(bits: u32, params: &GapParams) -> Result<f64> {
    check_bits(bits)?;
    Ok(params.apply_coding_gain(raw_gap(levels(bits), params.target_pe)?))
}

/// Gap evaluated at a real-valued rate with `M = 2^rate`.
///
/// Rates below one bit are clamped to the 2-PAM gap, which keeps the
/// extension nondecreasing in the rate.
pub fn gap_continuous(rate: f64, params: &GapParams) -> Result<f64> {
    if !rate.is_finite() {
        return Err(MacError::Domain(format!("rate must be finite, got {rate}")));
    }
    let m = 2f64.powf(rate.max(1.0));
    Ok(params.apply_coding_gain(raw_gap(m, params.target_pe)?))
}

/// Large-constellation limit of the gap.
pub fn gap_inf(params: &GapParams) -> Result<f64> {
    let x = q_inv(params.target_pe / 2.0)?;
    Ok(params.apply_coding_gain(x * x / 3.0))
}

/// `½ log₂(1 + snr/gamma)`.
pub fn rate_with_gap(snr: f64, gamma: f64) -> f64 {
    0.5 * (snr / gamma).ln_1p() / std::f64::consts::LN_2
}

/// Power `Γ(k)(2^{2k} − 1) N₀` needed for `k` bits at the target Pe. Zero for `k = 0`.
pub fn power_for_integer_rate(bits: u32, n0: f64, params: &GapParams) -> Result<f64> {
    if bits == 0 {
        return Ok(0.0);
    }
    let m = levels(bits);
    Ok(gap(bits, params)? * (m * m - 1.0) * n0)
}

/// Largest `k` whose integer-bit power level does not exceed `power`.
pub fn max_integer_rate(power: f64, n0: f64, params: &GapParams) -> Result<u32> {
    if !(power >= 0.0) {
        return Err(MacError::Domain(format!("power must be nonnegative, got {power}")));
    }
    let mut k = 0;
    while k < MAX_BITS && power_for_integer_rate(k + 1, n0, params)? <= power * (1.0 + LEVEL_RTOL) {
        k += 1;
    }
    Ok(k)
}

/// Fixed point of `r = ½ log₂(1 + power / (Γ(r) N₀))` with the rate-dependent
/// gap of [`gap_continuous`]. Solved by bisection to an absolute tolerance of 1e-12.
pub fn rate_fixed_point(power: f64, n0: f64, params: &GapParams) -> Result<f64> {
    if !(power >= 0.0) || !power.is_finite() {
        return Err(MacError::Domain(format!("power must be finite and nonnegative, got {power}")));
    }
    if !(n0 > 0.0) {
        return Err(MacError::Domain(format!("noise variance must be positive, got {n0}")));
    }
    if power == 0.0 {
        return Ok(0.0);
    }
    let snr = power / n0;
    // Γ(r) >= Γ(1) on the clamped extension, so the map never exceeds this.
    let floor_gap = gap_continuous(1.0, params)?.min(1.0);
    let mut lo = 0.0;
    let mut hi = rate_with_gap(snr, floor_gap);
    let residual = |r: f64| -> Result<f64> { Ok(rate_with_gap(snr, gap_continuous(r, params)?) - r) };
    if residual(hi)? > 0.0 {
        return Err(MacError::Numerical(format!("fixed point not bracketed for power {power}")));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if residual(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One user's PAM alphabet inside a phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PamSpec {
    bits: u32,
    power: f64,
    dmin: f64,
}

impl PamSpec {
    pub fn new(bits: u32, power: f64) -> Result<Self> {
        if !(power >= 0.0) || !power.is_finite() {
            return Err(MacError::Domain(format!("power must be finite and nonnegative, got {power}")));
        }
        if bits == 0 {
            if power != 0.0 {
                return Err(MacError::Domain(format!("silent user cannot spend power {power}")));
            }
            return Ok(Self::silent());
        }
        Ok(Self { bits, power, dmin: pam_dmin(power, bits)? })
    }

    pub fn silent() -> Self {
        Self { bits: 0, power: 0.0, dmin: 0.0 }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn dmin(&self) -> f64 {
        self.dmin
    }

    /// Constellation size `M = 2^bits` (1 when silent).
    pub fn size(&self) -> usize {
        1usize << self.bits
    }

    pub fn is_active(&self) -> bool {
        self.bits > 0
    }

    /// Amplitude of symbol `index`, zero-mean and spaced by `dmin`.
    pub fn amplitude(&self, index: usize) -> f64 {
        (index as f64 - (self.size() as f64 - 1.0) / 2.0) * self.dmin
    }
}
