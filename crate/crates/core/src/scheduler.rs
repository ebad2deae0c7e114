//! Transmission schedules for the superposition corner points.
//!
//! A schedule is a list of time phases. In each phase every user sends a PAM
//! constellation (possibly silent) at an instantaneous power; averaged over the
//! phases each user must stay within its power budget. When both users are
//! active the larger-distance constellation is the outer (coset-defining) one
//! and must be spaced at least `M_inner` inner minimum distances apart, so the
//! receiver sees a sum constellation whose minimum distance is the inner one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MacError, Result};
use crate::gap::{
    max_integer_rate, pam_dmin, power_for_integer_rate, rate_fixed_point, GapParams, PamSpec, LEVEL_RTOL,
};
use crate::region::RatePoint;

/// Relative tolerance on per-user average power against the budget.
pub const POWER_RTOL: f64 = 1e-9;
/// Relative tolerance on minimum-distance comparisons.
pub const DMIN_RTOL: f64 = 1e-9;
/// Absolute tolerance on the sum of phase fractions.
pub const FRACTION_TOL: f64 = 1e-12;

/// Channel operating point. User 1 is always the stronger user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    p1: f64,
    p2: f64,
    n0: f64,
    gap_params: GapParams,
    swapped: bool,
}

impl Scenario {
    /// Builds a scenario, relabelling the users when `p2 > p1`.
    pub fn new(p1: f64, p2: f64, n0: f64, gap_params: GapParams) -> Result<Self> {
        for (name, v) in [("p1", p1), ("p2", p2), ("n0", n0)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(MacError::InvalidScenario(format!("{name} must be finite and positive, got {v}")));
            }
        }
        let swapped = p2 > p1;
        let (p1, p2) = if swapped { (p2, p1) } else { (p1, p2) };
        Ok(Self { p1, p2, n0, gap_params, swapped })
    }

    /// Scenario whose powers sit exactly on the integer-bit levels `bits1 >= bits2 >= 1`.
    pub fn at_integer_levels(bits1: u32, bits2: u32, n0: f64, gap_params: GapParams) -> Result<Self> {
        if bits2 == 0 || bits1 == 0 {
            return Err(MacError::InvalidScenario("integer-level scenario needs at least one bit per user".into()));
        }
        let p1 = power_for_integer_rate(bits1, n0, &gap_params)?;
        let p2 = power_for_integer_rate(bits2, n0, &gap_params)?;
        Self::new(p1, p2, n0, gap_params)
    }

    /// Restores the relabelling flag of a scenario read back from a file.
    pub fn with_swapped(mut self, swapped: bool) -> Self {
        self.swapped = swapped;
        self
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn gap_params(&self) -> &GapParams {
        &self.gap_params
    }

    /// True when the input listed the weaker user first.
    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn budget(&self, user: User) -> f64 {
        match user {
            User::One => self.p1,
            User::Two => self.p2,
        }
    }

    /// Largest integer rate of user 1 alone.
    pub fn r1(&self) -> Result<u32> {
        max_integer_rate(self.p1, self.n0, &self.gap_params)
    }

    /// Largest integer rate of user 2 alone.
    pub fn r2(&self) -> Result<u32> {
        max_integer_rate(self.p2, self.n0, &self.gap_params)
    }

    /// Single-user power needed for `bits` at the target Pe.
    pub fn level(&self, bits: u32) -> Result<f64> {
        power_for_integer_rate(bits, self.n0, &self.gap_params)
    }

    /// Minimum distance needed by a lone `bits`-bit constellation to meet the target Pe.
    pub fn required_dmin(&self, bits: u32) -> Result<f64> {
        if bits == 0 {
            return Ok(0.0);
        }
        pam_dmin(self.level(bits)?, bits)
    }

    /// True when both powers equal integer-bit levels (within [`LEVEL_RTOL`]).
    pub fn is_integer_level(&self) -> Result<bool> {
        let on_level = |p: f64| -> Result<bool> {
            let k = max_integer_rate(p, self.n0, &self.gap_params)?;
            Ok(k >= 1 && (p - self.level(k)?).abs() <= LEVEL_RTOL * p)
        };
        Ok(on_level(self.p1)? && on_level(self.p2)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum User {
    One,
    Two,
}

impl fmt::Display for User {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            User::One => write!(f, "user 1"),
            User::Two => write!(f, "user 2"),
        }
    }
}

/// One time phase of a schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    fraction: f64,
    user1: PamSpec,
    user2: PamSpec,
}

impl Phase {
    pub fn new(fraction: f64, user1: PamSpec, user2: PamSpec) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0 + FRACTION_TOL) {
            return Err(MacError::InvalidSchedule(format!("phase fraction must lie in (0,1], got {fraction}")));
        }
        Ok(Self { fraction: fraction.min(1.0), user1, user2 })
    }

    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    pub fn user1(&self) -> &PamSpec {
        &self.user1
    }

    pub fn user2(&self) -> &PamSpec {
        &self.user2
    }

    pub fn user(&self, user: User) -> &PamSpec {
        match user {
            User::One => &self.user1,
            User::Two => &self.user2,
        }
    }

    fn scaled(&self, weight: f64) -> Self {
        Self { fraction: self.fraction * weight, ..*self }
    }

    /// `(outer, inner)` users when both are active; the outer one has the
    /// larger minimum distance, user 1 on ties.
    pub fn layering(&self) -> Option<(User, User)> {
        if !(self.user1.is_active() && self.user2.is_active()) {
            return None;
        }
        if self.user1.dmin() >= self.user2.dmin() {
            Some((User::One, User::Two))
        } else {
            Some((User::Two, User::One))
        }
    }

    /// Checks `d_outer >= M_inner · d_inner`; on failure returns `(d_outer, required)`.
    pub fn coset_condition(&self) -> std::result::Result<(), (f64, f64)> {
        let Some((outer, inner)) = self.layering() else {
            return Ok(());
        };
        let outer = self.user(outer);
        let inner = self.user(inner);
        let required = inner.size() as f64 * inner.dmin();
        if outer.dmin() >= required * (1.0 - DMIN_RTOL) {
            Ok(())
        } else {
            Err((outer.dmin(), required))
        }
    }

    pub fn sum_bits(&self) -> u32 {
        self.user1.bits() + self.user2.bits()
    }
}

/// An ordered list of phases for a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    phases: Vec<Phase>,
    scenario: Scenario,
}

impl Schedule {
    pub fn new(scenario: Scenario, phases: Vec<Phase>) -> Result<Self> {
        if phases.is_empty() {
            return Err(MacError::InvalidSchedule("schedule has no phases".into()));
        }
        Ok(Self { phases, scenario })
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Time-averaged rate pair.
    pub fn rates(&self) -> RatePoint {
        let (r1, r2) = self.phases.iter().fold((0.0, 0.0), |(a, b), p| {
            (a + p.fraction * p.user1.bits() as f64, b + p.fraction * p.user2.bits() as f64)
        });
        RatePoint::new_unchecked(r1, r2)
    }

    pub fn average_power(&self, user: User) -> f64 {
        self.phases.iter().map(|p| p.fraction * p.user(user).power()).sum()
    }

    pub fn fraction_sum(&self) -> f64 {
        self.phases.iter().map(|p| p.fraction).sum()
    }

    /// Time-averaged sum of constellation bits.
    pub fn throughput(&self) -> f64 {
        self.phases.iter().map(|p| p.fraction * p.sum_bits() as f64).sum()
    }
}

/// Power levels for user 1 stacked on top of an always-on user 2.
///
/// `level(k) = (M₂ d₂)² (2^{2k} − 1) / 12`: the power at which a `k`-bit
/// constellation for user 1 has minimum distance exactly `M₂ d₂`. With user 2
/// at its integer-bit level this is `2^{2R₂} Γ(R₂) (2^{2k} − 1) N₀`. For
/// `base_bits = 0` the ladder is user 1's single-user power levels.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLadder {
    base_bits: u32,
    outer_dmin: f64,
    levels: Vec<f64>,
}

impl PowerLadder {
    pub fn base_bits(&self) -> u32 {
        self.base_bits
    }

    /// Minimum distance user 1 must keep (`M₂ d₂`); zero for a lone user.
    pub fn outer_dmin(&self) -> f64 {
        self.outer_dmin
    }

    /// Levels for `k = 0..=k_max`, where `level(k_max)` is the first one above `p1`.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn level(&self, k: u32) -> Option<f64> {
        self.levels.get(k as usize).copied()
    }

    /// Largest `k` with `level(k) <= power` (within [`LEVEL_RTOL`]).
    pub fn step_below(&self, power: f64) -> u32 {
        let idx = self.levels.partition_point(|&l| l <= power * (1.0 + LEVEL_RTOL));
        (idx.max(1) - 1) as u32
    }
}

pub fn power_ladder(base_bits: u32, scenario: &Scenario) -> Result<PowerLadder> {
    let outer_dmin = if base_bits == 0 {
        0.0
    } else {
        (1u64 << base_bits) as f64 * pam_dmin(scenario.p2, base_bits)?
    };
    let level = |k: u32| -> Result<f64> {
        if base_bits == 0 {
            scenario.level(k)
        } else {
            let m = 4f64.powi(k as i32);
            Ok(outer_dmin * outer_dmin * (m - 1.0) / 12.0)
        }
    };
    let mut levels = vec![0.0];
    let mut k = 0;
    while *levels.last().unwrap() <= scenario.p1 * (1.0 + LEVEL_RTOL) {
        k += 1;
        if k > crate::gap::MAX_BITS {
            return Err(MacError::Numerical("power ladder does not terminate".into()));
        }
        levels.push(level(k)?);
    }
    Ok(PowerLadder { base_bits, outer_dmin, levels })
}

/// Fraction of time user 2 stays silent at corner `c₁`:
/// `λ₂ = 1 − ((2^{2R₁} − 1)/2^{2R₁}) · P₂/(3P₁)`.
pub fn lambda2(scenario: &Scenario) -> Result<f64> {
    let r1 = scenario.r1()?;
    if r1 == 0 {
        return Err(MacError::NoSuperposition(format!(
            "user 1 cannot carry one bit with power {} (needs {})",
            scenario.p1,
            scenario.level(1)?
        )));
    }
    let m2 = 4f64.powi(r1 as i32);
    Ok(1.0 - (m2 - 1.0) / m2 * scenario.p2 / (3.0 * scenario.p1))
}

/// Corner `c₁`: user 1 at its full integer rate, user 2 sending one bit for a `1 − λ₂` share.
pub fn point_c1(scenario: &Scenario) -> Result<RatePoint> {
    let l2 = lambda2(scenario)?;
    RatePoint::new(scenario.r1()? as f64, 1.0 - l2)
}

/// Corner `b₁` together with the power-control split that reaches it.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerB1 {
    /// Share of time user 1 spends on the lower ladder step.
    pub lambda1: f64,
    pub point: RatePoint,
    /// Lower ladder step `k`; user 1 alternates between `k` and `k + 1` bits.
    pub step: u32,
    pub ladder: PowerLadder,
    /// `⌊rate_fixed_point(P₁ + P₂)⌋`, the no-power-control sum-rate floor.
    pub sum_rate_floor: u32,
    /// Whether `step + R₂` equals `sum_rate_floor`. Holds for integer-level
    /// powers; reported rather than enforced otherwise.
    pub floor_consistent: bool,
}

pub fn lambda1_and_point_b1(scenario: &Scenario) -> Result<CornerB1> {
    let r2 = scenario.r2()?;
    let ladder = power_ladder(r2, scenario)?;
    let step = ladder.step_below(scenario.p1);
    let lower = ladder.level(step).expect("ladder covers p1");
    let upper = ladder.level(step + 1).expect("ladder covers p1");
    let lambda1 = if scenario.p1 <= lower * (1.0 + LEVEL_RTOL) {
        1.0
    } else {
        1.0 - (scenario.p1 - lower) / (upper - lower)
    };
    let point = RatePoint::new(step as f64 + 1.0 - lambda1, r2 as f64)?;
    let sum_rate_floor = sum_rate_floor(scenario)?;
    Ok(CornerB1 {
        lambda1,
        point,
        step,
        ladder,
        sum_rate_floor,
        floor_consistent: sum_rate_floor == step + r2,
    })
}

/// Integer part of the gap-bound sum rate at total power `P₁ + P₂`.
pub fn sum_rate_floor(scenario: &Scenario) -> Result<u32> {
    let s = rate_fixed_point(scenario.p1 + scenario.p2, scenario.n0, &scenario.gap_params)?;
    Ok((s + 1e-9).floor() as u32)
}

/// Corner `b` without power control: user 2 at its full integer rate and
/// user 1 on the highest full ladder step it can afford.
pub fn point_b(scenario: &Scenario) -> Result<RatePoint> {
    let r2 = scenario.r2()?;
    let ladder = power_ladder(r2, scenario)?;
    RatePoint::new(ladder.step_below(scenario.p1) as f64, r2 as f64)
}

/// Corner `c` without power control: user 1 alone at its integer rate.
pub fn point_c(scenario: &Scenario) -> Result<RatePoint> {
    RatePoint::new(scenario.r1()? as f64, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    B,
    C,
    B1,
    C1,
    /// Time sharing `(1 − θ)·b₁ + θ·c₁`.
    Theta(f64),
}

impl FromStr for Target {
    type Err = MacError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "b" => Ok(Target::B),
            "c" => Ok(Target::C),
            "b1" => Ok(Target::B1),
            "c1" => Ok(Target::C1),
            other => {
                let value = other
                    .strip_prefix("theta=")
                    .ok_or_else(|| MacError::Parse(format!("unknown target `{other}`")))?;
                let theta: f64 =
                    value.parse().map_err(|_| MacError::Parse(format!("bad theta value `{value}`")))?;
                Ok(Target::Theta(theta))
            }
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::B => write!(f, "b"),
            Target::C => write!(f, "c"),
            Target::B1 => write!(f, "b1"),
            Target::C1 => write!(f, "c1"),
            Target::Theta(t) => write!(f, "theta={t}"),
        }
    }
}

fn infeasible(bound: impl Into<String>) -> MacError {
    MacError::Infeasible { bound: bound.into() }
}

fn user1_bound(scenario: &Scenario) -> Result<u32> {
    let r1 = scenario.r1()?;
    if r1 == 0 {
        return Err(infeasible(format!(
            "user-1 single-user bound: power {} is below the 1-bit level {}",
            scenario.p1,
            scenario.level(1)?
        )));
    }
    Ok(r1)
}

fn c1_phases(scenario: &Scenario) -> Result<Vec<Phase>> {
    let r1 = user1_bound(scenario)?;
    let l2 = lambda2(scenario)?;
    let strong = PamSpec::new(r1, scenario.p1)?;
    let boosted = PamSpec::new(1, scenario.p2 / (1.0 - l2))?;
    Ok(vec![
        Phase::new(l2, strong, PamSpec::silent())?,
        Phase::new(1.0 - l2, strong, boosted)?,
    ])
}

fn b1_phases(scenario: &Scenario) -> Result<Vec<Phase>> {
    let corner = lambda1_and_point_b1(scenario)?;
    let r2 = corner.ladder.base_bits();
    let weak = if r2 == 0 { PamSpec::silent() } else { PamSpec::new(r2, scenario.p2)? };
    if corner.step == 0 && corner.lambda1 >= 1.0 && r2 == 0 {
        return Err(infeasible("both users are below their 1-bit levels"));
    }
    let low = |k: u32, power: f64| -> Result<PamSpec> {
        if k == 0 {
            Ok(PamSpec::silent())
        } else {
            PamSpec::new(k, power)
        }
    };
    let lower = corner.ladder.level(corner.step).unwrap();
    if corner.lambda1 >= 1.0 {
        return Ok(vec![Phase::new(1.0, low(corner.step, lower.min(scenario.p1))?, weak)?]);
    }
    let upper = corner.ladder.level(corner.step + 1).unwrap();
    Ok(vec![
        Phase::new(corner.lambda1, low(corner.step, lower)?, weak)?,
        Phase::new(1.0 - corner.lambda1, PamSpec::new(corner.step + 1, upper)?, weak)?,
    ])
}

/// Builds a schedule reaching `target`.
pub fn synth_schedule(target: Target, scenario: &Scenario) -> Result<Schedule> {
    let phases = match target {
        Target::C => {
            let r1 = user1_bound(scenario)?;
            vec![Phase::new(1.0, PamSpec::new(r1, scenario.p1)?, PamSpec::silent())?]
        }
        Target::B => {
            let b = point_b(scenario)?;
            let r2 = b.r2 as u32;
            let k = b.r1 as u32;
            if k == 0 && r2 == 0 {
                return Err(infeasible("both users are below their 1-bit levels"));
            }
            let user1 = if k == 0 { PamSpec::silent() } else { PamSpec::new(k, scenario.p1)? };
            let user2 = if r2 == 0 { PamSpec::silent() } else { PamSpec::new(r2, scenario.p2)? };
            vec![Phase::new(1.0, user1, user2)?]
        }
        Target::C1 => c1_phases(scenario)?,
        Target::B1 => b1_phases(scenario)?,
        Target::Theta(theta) => {
            if !(0.0..=1.0).contains(&theta) {
                return Err(infeasible(format!("time-sharing weight theta in [0,1], got {theta}")));
            }
            let mut phases = Vec::new();
            if theta < 1.0 {
                phases.extend(b1_phases(scenario)?.iter().map(|p| p.scaled(1.0 - theta)));
            }
            if theta > 0.0 {
                phases.extend(c1_phases(scenario)?.iter().map(|p| p.scaled(theta)));
            }
            phases
        }
    };
    Schedule::new(*scenario, phases)
}

/// A single failed schedule check.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    FractionRange { phase: usize, fraction: f64 },
    FractionSum { sum: f64 },
    PowerBudget { user: User, average: f64, budget: f64 },
    /// A user's own minimum distance is too small for the target Pe.
    UserDistance { phase: usize, user: User, dmin: f64, required: f64 },
    /// The outer constellation is too tight to keep the inner cosets apart.
    Coset { phase: usize, outer: User, dmin: f64, required: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::FractionRange { phase, fraction } => {
                write!(f, "phase {phase}: fraction {fraction} outside (0,1]")
            }
            Violation::FractionSum { sum } => write!(f, "fractions sum to {sum}, not 1"),
            Violation::PowerBudget { user, average, budget } => {
                write!(f, "power budget: {user} averages {average} over budget {budget}")
            }
            Violation::UserDistance { phase, user, dmin, required } => write!(
                f,
                "d_min condition: phase {phase}, {user} has minimum distance {dmin} below the {required} needed for the target Pe"
            ),
            Violation::Coset { phase, outer, dmin, required } => write!(
                f,
                "d_min condition: phase {phase}, outer {outer} has minimum distance {dmin} below M_inner x d_inner = {required}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

/// Checks fractions, power budgets and the per-phase distance conditions.
pub fn validate_schedule(schedule: &Schedule) -> ValidationReport {
    let mut violations = Vec::new();
    let scenario = schedule.scenario();

    let sum = schedule.fraction_sum();
    if (sum - 1.0).abs() > FRACTION_TOL {
        violations.push(Violation::FractionSum { sum });
    }
    for (i, phase) in schedule.phases().iter().enumerate() {
        if !(phase.fraction > 0.0 && phase.fraction <= 1.0) {
            violations.push(Violation::FractionRange { phase: i, fraction: phase.fraction });
        }
    }
    for user in [User::One, User::Two] {
        let average = schedule.average_power(user);
        let budget = scenario.budget(user);
        if average > budget * (1.0 + POWER_RTOL) {
            violations.push(Violation::PowerBudget { user, average, budget });
        }
    }
    for (i, phase) in schedule.phases().iter().enumerate() {
        for user in [User::One, User::Two] {
            let spec = phase.user(user);
            if !spec.is_active() {
                continue;
            }
            let required = match scenario.required_dmin(spec.bits()) {
                Ok(d) => d,
                Err(_) => f64::INFINITY,
            };
            if spec.dmin() < required * (1.0 - DMIN_RTOL) {
                violations.push(Violation::UserDistance { phase: i, user, dmin: spec.dmin(), required });
            }
        }
        if let Err((dmin, required)) = phase.coset_condition() {
            let (outer, _) = phase.layering().expect("coset failure implies two active users");
            violations.push(Violation::Coset { phase: i, outer, dmin, required });
        }
    }
    ValidationReport { violations }
}
