//! Symbol-level Monte Carlo over the real AWGN MAC.
//!
//! Each phase draws uniform symbols for the active users, superimposes them,
//! adds Gaussian noise and detects the nearest point of the sum constellation.
//! A user's symbol counts as an error only when its own label is wrong.
//!
//! Randomness comes from ChaCha20 keyed by the seed; every shard of
//! [`SHARD_SYMBOLS`] symbols uses its own stream `(phase << 32) | shard`, so
//! results do not depend on how many threads run the shards.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MacError, Result};
use crate::scheduler::{Phase, Schedule};

pub const MIN_SYMBOLS: u64 = 10_000;
pub const SHARD_SYMBOLS: u64 = 1 << 16;
pub const RNG_NAME: &str = "chacha20-stream-per-shard+ziggurat-normal";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumPoint {
    pub amplitude: f64,
    pub label1: usize,
    pub label2: usize,
}

/// Receiver-side superposition of both users' PAM alphabets, sorted by amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct SumConstellation {
    points: Vec<SumPoint>,
    dmin_sum: f64,
}

impl SumConstellation {
    pub fn points(&self) -> &[SumPoint] {
        &self.points
    }

    /// Minimum pairwise distance; infinite for a single point.
    pub fn dmin_sum(&self) -> f64 {
        self.dmin_sum
    }

    pub fn average_power(&self) -> f64 {
        self.points.iter().map(|p| p.amplitude * p.amplitude).sum::<f64>() / self.points.len() as f64
    }
}

pub fn build_sum_constellation(phase: &Phase) -> Result<SumConstellation> {
    if let Err((dmin, required)) = phase.coset_condition() {
        return Err(MacError::Construction(format!(
            "outer minimum distance {dmin} is below the {required} needed to separate the cosets"
        )));
    }
    let (u1, u2) = (phase.user1(), phase.user2());
    let mut points = Vec::with_capacity(u1.size() * u2.size());
    for label1 in 0..u1.size() {
        for label2 in 0..u2.size() {
            points.push(SumPoint { amplitude: u1.amplitude(label1) + u2.amplitude(label2), label1, label2 });
        }
    }
    points.sort_by(|a, b| a.amplitude.total_cmp(&b.amplitude));
    let dmin_sum = points.windows(2).map(|w| w[1].amplitude - w[0].amplitude).fold(f64::INFINITY, f64::min);
    if dmin_sum <= 0.0 {
        return Err(MacError::Construction("sum constellation has coinciding points".into()));
    }
    Ok(SumConstellation { points, dmin_sum })
}

/// Labels of the constellation point nearest to `y`; ties go to the smaller amplitude.
pub fn detect(y: f64, constellation: &SumConstellation) -> (usize, usize) {
    let pts = &constellation.points;
    let idx = pts.partition_point(|p| p.amplitude < y);
    let chosen = if idx == 0 {
        0
    } else if idx == pts.len() {
        pts.len() - 1
    } else if y - pts[idx - 1].amplitude <= pts[idx].amplitude - y {
        idx - 1
    } else {
        idx
    };
    (pts[chosen].label1, pts[chosen].label2)
}

/// Empirical outcome of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub per_user_ser: [f64; 2],
    /// Normal-approximation 95% half-widths.
    pub ser_ci95: [f64; 2],
    pub symbols_run: u64,
    /// Nominal bits per channel use: `Σ fraction · (bits₁ + bits₂)`.
    pub throughput_bits: f64,
    pub seed: u64,
    pub rng: String,
    pub per_user_errors: [u64; 2],
    /// Symbols in which each user was active.
    pub per_user_symbols: [u64; 2],
    /// Rate of symbols where either label was wrong.
    pub joint_ser: f64,
}

impl SimReport {
    /// Whether each active user's SER stays within `pe + 4·sqrt(pe / n)`.
    pub fn complies(&self, pe: f64) -> bool {
        (0..2).all(|u| {
            let n = self.per_user_symbols[u];
            n == 0 || self.per_user_ser[u] <= compliance_threshold(pe, n)
        })
    }
}

/// `pe + 4·sqrt(pe / n)`.
pub fn compliance_threshold(pe: f64, n: u64) -> f64 {
    pe + 4.0 * (pe / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    symbols: u64,
    errors: [u64; 2],
    active: [u64; 2],
    joint_errors: u64,
}

impl Counts {
    fn merge(self, other: Counts) -> Counts {
        Counts {
            symbols: self.symbols + other.symbols,
            errors: [self.errors[0] + other.errors[0], self.errors[1] + other.errors[1]],
            active: [self.active[0] + other.active[0], self.active[1] + other.active[1]],
            joint_errors: self.joint_errors + other.joint_errors,
        }
    }
}

struct Shard<'a> {
    phase: &'a Phase,
    constellation: &'a SumConstellation,
    phase_index: u64,
    shard_index: u64,
    symbols: u64,
}

fn gaussian(rng: &mut ChaCha20Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn draw_label(rng: &mut ChaCha20Rng, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        (rng.next_u64() >> (64 - bits)) as usize
    }
}

fn run_shard(shard: &Shard<'_>, sigma: f64, seed: u64) -> Counts {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream((shard.phase_index << 32) | shard.shard_index);
    let (u1, u2) = (shard.phase.user1(), shard.phase.user2());
    let mut counts = Counts { symbols: shard.symbols, ..Counts::default() };
    for _ in 0..shard.symbols {
        let l1 = draw_label(&mut rng, u1.bits());
        let l2 = draw_label(&mut rng, u2.bits());
        let y = u1.amplitude(l1) + u2.amplitude(l2) + sigma * gaussian(&mut rng);
        let (d1, d2) = detect(y, shard.constellation);
        let e1 = u1.is_active() && d1 != l1;
        let e2 = u2.is_active() && d2 != l2;
        counts.errors[0] += e1 as u64;
        counts.errors[1] += e2 as u64;
        counts.joint_errors += (e1 || e2) as u64;
    }
    counts.active = [
        if u1.is_active() { shard.symbols } else { 0 },
        if u2.is_active() { shard.symbols } else { 0 },
    ];
    counts
}

fn simulate_phases(jobs: &[(usize, &Phase, u64)], n0: f64, seed: u64) -> Result<Counts> {
    if !(n0 >= 0.0) {
        return Err(MacError::Domain(format!("noise variance must be nonnegative, got {n0}")));
    }
    let constellations = jobs
        .iter()
        .map(|(_, phase, _)| build_sum_constellation(phase))
        .collect::<Result<Vec<_>>>()?;
    let mut shards = Vec::new();
    for ((phase_index, phase, symbols), constellation) in jobs.iter().zip(&constellations) {
        let mut remaining = *symbols;
        let mut shard_index = 0;
        while remaining > 0 {
            let n = remaining.min(SHARD_SYMBOLS);
            shards.push(Shard { phase, constellation, phase_index: *phase_index as u64, shard_index, symbols: n });
            remaining -= n;
            shard_index += 1;
        }
    }
    let sigma = n0.sqrt();
    Ok(shards
        .par_iter()
        .map(|s| run_shard(s, sigma, seed))
        .reduce(Counts::default, Counts::merge))
}

fn report(counts: Counts, throughput_bits: f64, seed: u64) -> SimReport {
    let rate = |e: u64, n: u64| if n == 0 { 0.0 } else { e as f64 / n as f64 };
    let ser = [rate(counts.errors[0], counts.active[0]), rate(counts.errors[1], counts.active[1])];
    let ci = |p: f64, n: u64| if n == 0 { 0.0 } else { 1.96 * (p * (1.0 - p) / n as f64).sqrt() };
    SimReport {
        per_user_ser: ser,
        ser_ci95: [ci(ser[0], counts.active[0]), ci(ser[1], counts.active[1])],
        symbols_run: counts.symbols,
        throughput_bits,
        seed,
        rng: RNG_NAME.to_string(),
        per_user_errors: counts.errors,
        per_user_symbols: counts.active,
        joint_ser: rate(counts.joint_errors, counts.symbols),
    }
}

/// Simulates a single phase for `symbols` channel uses.
pub fn run_phase(phase: &Phase, n0: f64, symbols: u64, seed: u64) -> Result<SimReport> {
    if symbols < MIN_SYMBOLS {
        return Err(MacError::Domain(format!("need at least {MIN_SYMBOLS} symbols, got {symbols}")));
    }
    let counts = simulate_phases(&[(0, phase, symbols)], n0, seed)?;
    Ok(report(counts, phase.sum_bits() as f64, seed))
}

/// Simulates a schedule, giving each phase a share of `symbols_total`
/// proportional to its time fraction (at least one symbol per phase).
pub fn run_schedule(schedule: &Schedule, symbols_total: u64, seed: u64) -> Result<SimReport> {
    if symbols_total < MIN_SYMBOLS {
        return Err(MacError::Domain(format!("need at least {MIN_SYMBOLS} symbols, got {symbols_total}")));
    }
    let jobs: Vec<(usize, &Phase, u64)> = schedule
        .phases()
        .iter()
        .enumerate()
        .map(|(i, p)| (i, p, ((p.fraction() * symbols_total as f64).round() as u64).max(1)))
        .collect();
    let counts = simulate_phases(&jobs, schedule.scenario().n0(), seed)?;
    Ok(report(counts, schedule.throughput(), seed))
}
