//! File formats: scenario JSON, region CSV, schedule JSON and report JSON.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MacError, Result};
use crate::gap::{GapParams, PamSpec};
use crate::region::{RatePoint, RateRegion, Scheme};
use crate::scheduler::{Phase, Scenario, Schedule, Target};
use crate::sim::SimReport;

pub const REGION_CSV_HEADER: &str = "scheme,vertex,r1,r2";

/// Scenario input file. Unknown keys are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub p1: f64,
    pub p2: f64,
    pub n0: f64,
    pub pe: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coding_gain_db: Option<f64>,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| MacError::Parse(format!("scenario file: {e}")))
    }

    pub fn to_scenario(&self) -> Result<Scenario> {
        let params = GapParams::new(self.pe, self.coding_gain_db.unwrap_or(0.0))
            .map_err(|e| MacError::InvalidScenario(e.to_string()))?;
        Scenario::new(self.p1, self.p2, self.n0, params)
    }
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        let gain = s.gap_params().coding_gain_db();
        Self {
            p1: s.p1(),
            p2: s.p2(),
            n0: s.n0(),
            pe: s.gap_params().target_pe(),
            coding_gain_db: (gain != 0.0).then_some(gain),
        }
    }
}

pub fn read_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| MacError::Parse(format!("{}: {e}", path.display())))?;
    ScenarioFile::from_json(&text)?.to_scenario()
}

/// Formats `v` in plain decimal notation with 12 significant digits.
pub fn format_sig12(v: f64) -> String {
    let sci = format!("{:.11e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let body = if exp >= 0 {
        let split = exp as usize + 1;
        if split >= digits.len() {
            format!("{}{}", digits, "0".repeat(split - digits.len()))
        } else {
            format!("{}.{}", &digits[..split], &digits[split..])
        }
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    format!("{sign}{body}")
}

pub fn regions_to_csv(regions: &[RateRegion]) -> String {
    let mut out = String::from(REGION_CSV_HEADER);
    out.push('\n');
    for region in regions {
        for (i, v) in region.vertices().iter().enumerate() {
            out.push_str(&format!("{},{},{},{}\n", region.scheme(), i, format_sig12(v.r1), format_sig12(v.r2)));
        }
    }
    out
}

pub fn regions_from_csv(text: &str) -> Result<Vec<RateRegion>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == REGION_CSV_HEADER => {}
        other => return Err(MacError::Parse(format!("bad region CSV header {other:?}"))),
    }
    let mut groups: Vec<(Scheme, Vec<RatePoint>)> = Vec::new();
    for (lineno, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |what: &str| MacError::Parse(format!("region CSV line {}: {what}", lineno + 2));
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(bad("expected 4 fields"));
        }
        let scheme: Scheme = fields[0].parse()?;
        let index: usize = fields[1].trim().parse().map_err(|_| bad("bad vertex index"))?;
        let r1: f64 = fields[2].trim().parse().map_err(|_| bad("bad r1"))?;
        let r2: f64 = fields[3].trim().parse().map_err(|_| bad("bad r2"))?;
        match groups.last_mut() {
            Some((s, pts)) if *s == scheme => {
                if index != pts.len() {
                    return Err(bad("vertices out of order"));
                }
                pts.push(RatePoint::new(r1, r2)?);
            }
            _ => {
                if groups.iter().any(|(s, _)| *s == scheme) {
                    return Err(bad("rows for a scheme are not contiguous"));
                }
                if index != 0 {
                    return Err(bad("first vertex index must be 0"));
                }
                groups.push((scheme, vec![RatePoint::new(r1, r2)?]));
            }
        }
    }
    groups.into_iter().map(|(s, v)| RateRegion::new(s, v)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UserRecord {
    bits: u32,
    power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseRecord {
    fraction: f64,
    user1: UserRecord,
    user2: UserRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleScenarioRecord {
    p1: f64,
    p2: f64,
    n0: f64,
    pe: f64,
    coding_gain_db: f64,
    /// The input file listed the weaker user first; `user1` here is the
    /// file's `p2`.
    swapped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<String>,
    scenario: ScheduleScenarioRecord,
    phases: Vec<PhaseRecord>,
    rates: RatePoint,
}

pub fn schedule_to_json(schedule: &Schedule, target: Option<Target>) -> String {
    let s = schedule.scenario();
    let user = |p: &PamSpec| UserRecord { bits: p.bits(), power: p.power() };
    let record = ScheduleRecord {
        target: target.map(|t| t.to_string()),
        scenario: ScheduleScenarioRecord {
            p1: s.p1(),
            p2: s.p2(),
            n0: s.n0(),
            pe: s.gap_params().target_pe(),
            coding_gain_db: s.gap_params().coding_gain_db(),
            swapped: s.swapped(),
        },
        phases: schedule
            .phases()
            .iter()
            .map(|p| PhaseRecord { fraction: p.fraction(), user1: user(p.user1()), user2: user(p.user2()) })
            .collect(),
        rates: schedule.rates(),
    };
    let mut text = serde_json::to_string_pretty(&record).expect("schedule serializes");
    text.push('\n');
    text
}

/// Parses a schedule file. Structure is checked here; feasibility is left to
/// [`crate::scheduler::validate_schedule`].
pub fn schedule_from_json(text: &str) -> Result<Schedule> {
    let record: ScheduleRecord =
        serde_json::from_str(text).map_err(|e| MacError::Parse(format!("schedule file: {e}")))?;
    let sc = record.scenario;
    if sc.p2 > sc.p1 {
        return Err(MacError::InvalidSchedule("schedule scenario must list the stronger user first".into()));
    }
    let params = GapParams::new(sc.pe, sc.coding_gain_db)?;
    let scenario = Scenario::new(sc.p1, sc.p2, sc.n0, params)?.with_swapped(sc.swapped);
    let phases = record
        .phases
        .iter()
        .map(|p| {
            Phase::new(
                p.fraction,
                PamSpec::new(p.user1.bits, p.user1.power)?,
                PamSpec::new(p.user2.bits, p.user2.power)?,
            )
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| MacError::InvalidSchedule(e.to_string()))?;
    let schedule = Schedule::new(scenario, phases)?;
    let stated = record.rates;
    let actual = schedule.rates();
    if (stated.r1 - actual.r1).abs() > 1e-9 || (stated.r2 - actual.r2).abs() > 1e-9 {
        return Err(MacError::InvalidSchedule(format!("stated rates {stated} disagree with phases {actual}")));
    }
    Ok(schedule)
}

pub fn report_to_json(report: &SimReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

pub fn report_from_json(text: &str) -> Result<SimReport> {
    serde_json::from_str(text).map_err(|e| MacError::Parse(format!("report file: {e}")))
}

/// Writes `contents` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let file_name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{file_name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}
