//! Analytical latency, energy and EDP.
//!
//! Latency is `N * (pulse term + step overhead) / frequency`. The pulse term
//! is either the worst-case multiply length or the one implied by a workload's
//! expected maximum. Power and area are never modeled: they come from a
//! source-tagged [`PowerProfile`] of published post-synthesis figures.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gemm::GemmConfig;
use crate::sparsity::{expected_max, MaxValueHistogram};
use crate::unary::Polarity;

pub type Rational = num_rational::Ratio<i128>;

/// Environment variable naming a profile JSON that replaces the embedded one.
pub const PROFILE_ENV: &str = "TUBGEMM_PROFILE";
pub const DEFAULT_FREQUENCY_HZ: f64 = 4.0e8;
pub const POWER_PROFILE_SCHEMA: &str = "tubgemm.power_profile.v1";

const EMBEDDED_PROFILE: &str = include_str!("../data/power_profile.json");

pub fn to_f64(r: Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Accepts `9/4`, `3`, or a decimal such as `2.25`, exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("`{s}` is not a rational number"));
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let whole: i128 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let scale = 10i128.checked_pow(frac.len() as u32).ok_or_else(bad)?;
        let frac: i128 = frac.parse().map_err(|_| bad())?;
        let magnitude = whole.abs() * scale + frac;
        Ok(Rational::new(if negative { -magnitude } else { magnitude }, scale))
    } else {
        Rational::from_str(s).map_err(|_| bad())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Technology {
    Nangate45,
    TsmcN5,
}

impl fmt::Display for Technology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Technology::Nangate45 => "nangate45",
            Technology::TsmcN5 => "tsmc_n5",
        })
    }
}

impl FromStr for Technology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nangate45" | "45nm" | "45" => Ok(Technology::Nangate45),
            "tsmc_n5" | "n5" | "5nm" | "5" => Ok(Technology::TsmcN5),
            other => Err(Error::Parameter(format!("unknown technology `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerEntry {
    pub array_size: usize,
    pub bitwidth: u32,
    pub polarity: Polarity,
    pub technology: Technology,
    #[serde(default = "default_workload")]
    pub workload: String,
    pub power_w: f64,
    #[serde(default)]
    pub area_um2: Option<f64>,
    pub source: String,
}

fn default_workload() -> String {
    "random".to_string()
}

/// Clock frequency plus published power/area per design point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    #[serde(default = "default_schema")]
    pub schema: String,
    #[serde(default = "default_frequency")]
    pub frequency_hz: f64,
    pub entries: Vec<PowerEntry>,
}

fn default_schema() -> String {
    POWER_PROFILE_SCHEMA.to_string()
}

fn default_frequency() -> f64 {
    DEFAULT_FREQUENCY_HZ
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileQuery {
    pub array_size: usize,
    pub bitwidth: u32,
    pub polarity: Polarity,
    /// `None` takes the first technology that has the point.
    pub technology: Option<Technology>,
    pub workload: String,
}

impl ProfileQuery {
    /// Square arrays are keyed by side length; anything else never matches.
    pub fn for_config(config: &GemmConfig) -> Self {
        ProfileQuery {
            array_size: if config.m == config.p { config.m } else { 0 },
            bitwidth: config.bitwidth,
            polarity: config.polarity,
            technology: None,
            workload: default_workload(),
        }
    }

    pub fn technology(mut self, t: Technology) -> Self {
        self.technology = Some(t);
        self
    }

    pub fn workload(mut self, w: impl Into<String>) -> Self {
        self.workload = w.into();
        self
    }
}

impl PowerProfile {
    pub fn embedded() -> Self {
        Self::from_json_str(EMBEDDED_PROFILE).expect("embedded power profile is valid")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let profile: PowerProfile = serde_json::from_str(s)?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Explicit path, else `$TUBGEMM_PROFILE`, else the embedded dataset.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::from_path(p),
            None => match std::env::var_os(PROFILE_ENV) {
                Some(p) if !p.is_empty() => Self::from_path(p),
                _ => Ok(Self::embedded()),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency_hz.is_finite() && self.frequency_hz > 0.0) {
            return Err(Error::Parameter(format!(
                "frequency {} Hz must be positive",
                self.frequency_hz
            )));
        }
        for e in &self.entries {
            if e.source.trim().is_empty() {
                return Err(Error::Parameter(format!(
                    "entry {}x{} {}-bit {} has no source tag",
                    e.array_size, e.array_size, e.bitwidth, e.polarity
                )));
            }
            if !(e.power_w.is_finite() && e.power_w >= 0.0) {
                return Err(Error::Parameter(format!("negative or invalid power {}", e.power_w)));
            }
        }
        Ok(())
    }

    pub fn lookup(&self, q: &ProfileQuery) -> Result<&PowerEntry> {
        let matches = |e: &&PowerEntry| {
            e.array_size == q.array_size
                && e.bitwidth == q.bitwidth
                && e.polarity == q.polarity
                && e.workload == q.workload
        };
        let found = match q.technology {
            Some(t) => self.entries.iter().filter(matches).find(|e| e.technology == t),
            None => [Technology::TsmcN5, Technology::Nangate45]
                .into_iter()
                .find_map(|t| self.entries.iter().filter(matches).find(|e| e.technology == t)),
        };
        found.ok_or_else(|| {
            Error::ProfileMiss(format!(
                "{0}x{0} {1}-bit {2} ({3}, {4})",
                q.array_size,
                q.bitwidth,
                q.polarity,
                q.technology.map_or("any technology".to_string(), |t| t.to_string()),
                q.workload
            ))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatencyMode {
    #[default]
    WorstCase,
    Expected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatencyModel {
    /// Handshake cycles charged per step. Fractional, since it is a fit to
    /// measured end-to-end latencies rather than a count of real cycles.
    pub step_overhead: Rational,
    pub mode: LatencyMode,
}

impl Default for LatencyModel {
    fn default() -> Self {
        LatencyModel {
            step_overhead: Rational::new(9, 4),
            mode: LatencyMode::WorstCase,
        }
    }
}

impl LatencyModel {
    pub fn with_overhead(step_overhead: Rational) -> Result<Self> {
        if step_overhead < Rational::from_integer(0) {
            return Err(Error::Parameter(format!(
                "step overhead {step_overhead} must be non-negative"
            )));
        }
        Ok(LatencyModel {
            step_overhead,
            ..Default::default()
        })
    }

    pub fn expected(mut self) -> Self {
        self.mode = LatencyMode::Expected;
        self
    }

    /// Latency under this model's mode. Expected mode needs a histogram.
    pub fn latency(
        &self,
        config: &GemmConfig,
        hist: Option<&MaxValueHistogram>,
        profile: &PowerProfile,
    ) -> Result<f64> {
        match (self.mode, hist) {
            (LatencyMode::WorstCase, _) => Ok(analytical_wc_latency(config, self, profile)),
            (LatencyMode::Expected, Some(h)) => expected_latency(config, h, self, profile),
            (LatencyMode::Expected, None) => Err(Error::Empty(
                "expected-latency mode needs a max-value histogram".into(),
            )),
        }
    }
}

fn steps_cycles(config: &GemmConfig, pulse: Rational, model: &LatencyModel) -> Rational {
    Rational::from_integer(config.n as i128) * (pulse + model.step_overhead)
}

/// `N * (worst-case multiply cycles + overhead)`, exact.
pub fn analytical_wc_cycles(config: &GemmConfig, model: &LatencyModel) -> Rational {
    let wc = Rational::from_integer(config.worst_case_mult_cycles() as i128);
    steps_cycles(config, wc, model)
}

pub fn analytical_wc_latency(config: &GemmConfig, model: &LatencyModel, profile: &PowerProfile) -> f64 {
    to_f64(analytical_wc_cycles(config, model)) / profile.frequency_hz
}

fn check_hist(config: &GemmConfig, hist: &MaxValueHistogram) -> Result<()> {
    if hist.bitwidth != config.bitwidth || hist.polarity != config.polarity {
        return Err(Error::Parameter(format!(
            "histogram is {} {}-bit but config is {} {}-bit",
            hist.polarity, hist.bitwidth, config.polarity, config.bitwidth
        )));
    }
    Ok(())
}

/// `N * (ceil(E_max / n) + overhead)` cycles, exact.
pub fn expected_cycles(config: &GemmConfig, hist: &MaxValueHistogram, model: &LatencyModel) -> Result<Rational> {
    check_hist(config, hist)?;
    let e_max = expected_max(hist)?;
    let pulses = (e_max / Rational::from_integer(config.unary_base as i128)).ceil();
    Ok(steps_cycles(config, pulses, model))
}

pub fn expected_latency(
    config: &GemmConfig,
    hist: &MaxValueHistogram,
    model: &LatencyModel,
    profile: &PowerProfile,
) -> Result<f64> {
    Ok(to_f64(expected_cycles(config, hist, model)?) / profile.frequency_hz)
}

/// `sum_v p(v) * N * (ceil(v / n) + overhead)` cycles, exact.
pub fn expected_cycles_full(
    config: &GemmConfig,
    hist: &MaxValueHistogram,
    model: &LatencyModel,
) -> Result<Rational> {
    check_hist(config, hist)?;
    if hist.is_empty() {
        return Err(Error::Empty("histogram has no operations".into()));
    }
    let n = config.unary_base as u64;
    let weighted: i128 = hist
        .bins()
        .map(|(v, c)| v.div_ceil(n) as i128 * c as i128)
        .sum();
    let mean_pulses = Rational::new(weighted, hist.total_ops as i128);
    Ok(steps_cycles(config, mean_pulses, model))
}

pub fn expected_latency_full(
    config: &GemmConfig,
    hist: &MaxValueHistogram,
    model: &LatencyModel,
    profile: &PowerProfile,
) -> Result<f64> {
    Ok(to_f64(expected_cycles_full(config, hist, model)?) / profile.frequency_hz)
}

/// Joules from watts and seconds.
pub fn energy(power_w: f64, latency_s: f64) -> f64 {
    power_w * latency_s
}

/// Energy-delay product in joule-seconds.
pub fn edp(energy_j: f64, latency_s: f64) -> f64 {
    energy_j * latency_s
}
