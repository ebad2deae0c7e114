//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use macregion::gap::{pam_dmin, GapParams};
use macregion::Scenario;

/// Target Pe at which the 2-bit level equals 139 (N₀ = 1), frozen from a
/// 40-digit bisection.
pub const REF_PE: f64 = 1.008_945_838_115e-7;

/// Integer levels for 4 and 3 bits at [`REF_PE`], frozen from the same run.
/// They round to 2.4e3 and 5.9e2 at two significant digits.
pub const UNEQUAL_P1: f64 = 2399.704_421_107_267;
pub const UNEQUAL_P2: f64 = 590.063_949_457_984_1;

/// Outer-bound sum rate at P₁ + P₂ = 278: fixed point of r = ½log₂(1 + 278/Γ(r)).
pub const EQUAL_SUM_BOUND: f64 = 2.472_785_017_298_114;
pub const UNEQUAL_SUM_BOUND: f64 = 4.157_693_097_737_801;
pub const UNEQUAL_B1_R1: f64 = 1.083_609_185_029_482;
pub const UNEQUAL_C1_R2: f64 = 0.081_643_251_141_767_86;

/// Q via the libm complementary error function; used as the reference for
/// bisection oracles.
pub fn q_ref(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Adaptive Simpson quadrature of the standard normal density over `[a, b]`.
pub fn gaussian_tail_quadrature(x: f64) -> f64 {
    fn pdf(u: f64) -> f64 {
        (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
    }
    fn simpson(a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (pdf(a) + 4.0 * pdf(0.5 * (a + b)) + pdf(b))
    }
    fn adapt(a: f64, b: f64, whole: f64, eps: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(a, m);
        let right = simpson(m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            left + right + delta / 15.0
        } else {
            adapt(a, m, left, eps / 2.0, depth - 1) + adapt(m, b, right, eps / 2.0, depth - 1)
        }
    }
    let upper = x.max(0.0) + 40.0;
    let mut total = 0.0;
    // integrate in unit pieces so the tolerance stays relative to the local mass
    let mut a = x;
    while a < upper {
        let b = (a + 1.0).min(upper);
        let piece = simpson(a, b);
        total += adapt(a, b, piece, 1e-18_f64.max(piece.abs() * 1e-15), 50);
        a = b;
    }
    total
}

/// `q_inv` by plain bisection over `[-40, 40]`.
pub fn q_inv_bisect(p: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if q_ref(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Gap from the closed form with the bisection inverse.
pub fn gap_oracle(bits: u32, pe: f64) -> f64 {
    let m = 2f64.powi(bits as i32);
    let x = q_inv_bisect(m * pe / (2.0 * (m - 1.0)));
    x * x / 3.0
}

pub fn level_oracle(bits: u32, pe: f64, n0: f64) -> f64 {
    let m = 2f64.powi(bits as i32);
    gap_oracle(bits, pe) * (m * m - 1.0) * n0
}

/// Recovers Pe from `level(bits) = power` by bisection on log10(Pe).
pub fn recover_pe(bits: u32, power: f64, n0: f64) -> f64 {
    let (mut lo, mut hi) = (-14.0_f64, -1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // level decreases as Pe grows
        if level_oracle(bits, 10f64.powf(mid), n0) > power {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    10f64.powf(0.5 * (lo + hi))
}

/// Smallest power at which a `bits`-bit PAM reaches minimum distance `dmin`,
/// found by bisection on [`pam_dmin`].
pub fn power_for_dmin(dmin: f64, bits: u32) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while pam_dmin(hi, bits).unwrap() < dmin {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if pam_dmin(mid, bits).unwrap() < dmin {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Brute-force corner b₁: rebuild user 1's ladder from `d₁ ≥ M₂ d₂` and
/// interpolate linearly on the power budget.
pub fn b1_oracle(p1: f64, p2: f64, r2: u32) -> (f64, f64) {
    let outer = 2f64.powi(r2 as i32) * pam_dmin(p2, r2).unwrap();
    let mut k = 0u32;
    let mut lower = 0.0;
    loop {
        let next = power_for_dmin(outer, k + 1);
        if next > p1 {
            let frac = (p1 - lower) / (next - lower);
            return (k as f64 + frac, r2 as f64);
        }
        k += 1;
        lower = next;
    }
}

/// Brute-force corner c₁: the largest share `f` for which a 2-PAM at
/// `p2 / f` sits `M₁ d₁` apart, found by bisection on `f`.
pub fn c1_oracle(p1: f64, r1: u32, p2: f64) -> (f64, f64) {
    let need = 2f64.powi(r1 as i32) * pam_dmin(p1, r1).unwrap();
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if pam_dmin(p2 / mid, 1).unwrap() >= need {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (r1 as f64, lo)
}

pub fn ref_params() -> GapParams {
    GapParams::uncoded(REF_PE).unwrap()
}

pub fn equal_power() -> Scenario {
    Scenario::new(139.0, 139.0, 1.0, ref_params()).unwrap()
}

pub fn unequal_power() -> Scenario {
    Scenario::new(UNEQUAL_P1, UNEQUAL_P2, 1.0, ref_params()).unwrap()
}

/// Integer-level scenarios with `r1 - r2 <= 1`, which keeps `P1/P2` inside
/// the 1..10 ratio range of [`ratio_grid`].
pub fn integer_level_grid() -> Vec<Scenario> {
    integer_levels(1)
}

/// Every integer-level pair `r1 >= r2 >= 1` up to 6 bits.
pub fn integer_level_grid_wide() -> Vec<Scenario> {
    integer_levels(6)
}

fn integer_levels(max_spread: u32) -> Vec<Scenario> {
    let mut out = Vec::new();
    for pe in [1e-5, 1e-7] {
        let params = GapParams::uncoded(pe).unwrap();
        for r1 in 1..=6u32 {
            for r2 in r1.saturating_sub(max_spread).max(1)..=r1 {
                out.push(Scenario::at_integer_levels(r1, r2, 1.0, params).unwrap());
            }
        }
    }
    out
}

/// User 1 on an integer level, user 2 weaker by a fixed power ratio.
pub fn ratio_grid() -> Vec<Scenario> {
    let mut out = Vec::new();
    for pe in [1e-5, 1e-7] {
        let params = GapParams::uncoded(pe).unwrap();
        for r1 in 1..=6 {
            let p1 = macregion::gap::power_for_integer_rate(r1, 1.0, &params).unwrap();
            for ratio in [1.0, 2.0, 4.0, 10.0] {
                out.push(Scenario::new(p1, p1 / ratio, 1.0, params).unwrap());
            }
        }
    }
    out
}
