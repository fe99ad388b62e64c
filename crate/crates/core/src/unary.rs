//! Temporal-unary and n-unary operand encoding.
//!
//! A magnitude `m` is streamed as a run of asserted cycles. Each asserted cycle
//! is worth `n` (the unary base); when `m` is not a multiple of `n` the last
//! asserted cycle carries the remainder instead. The encoder is a single
//! counter stepping by `n` from zero plus one strict greater-than comparator
//! per operand, so `m` produces exactly `ceil(m / n)` asserted cycles.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Supported operand widths.
pub const SUPPORTED_BITWIDTHS: [u32; 3] = [2, 4, 8];
/// Supported unary bases.
pub const SUPPORTED_BASES: [u32; 4] = [1, 2, 4, 8];
/// Base used when none is given.
pub const DEFAULT_UNARY_BASE: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// Unsigned operands in `[0, 2^b - 1]`.
    Unipolar,
    /// Two's-complement operands in `[-2^(b-1), 2^(b-1) - 1]`.
    Bipolar,
}

impl Polarity {
    pub fn min_value(self, bitwidth: u32) -> i64 {
        match self {
            Polarity::Unipolar => 0,
            Polarity::Bipolar => -(1i64 << (bitwidth - 1)),
        }
    }

    pub fn max_value(self, bitwidth: u32) -> i64 {
        match self {
            Polarity::Unipolar => (1i64 << bitwidth) - 1,
            Polarity::Bipolar => (1i64 << (bitwidth - 1)) - 1,
        }
    }

    /// Largest magnitude an operand may take. For bipolar this is `2^(b-1)`,
    /// reached by the most negative value.
    pub fn max_magnitude(self, bitwidth: u32) -> u64 {
        match self {
            Polarity::Unipolar => (1u64 << bitwidth) - 1,
            Polarity::Bipolar => 1u64 << (bitwidth - 1),
        }
    }

    pub fn contains(self, value: i64, bitwidth: u32) -> bool {
        (self.min_value(bitwidth)..=self.max_value(bitwidth)).contains(&value)
    }

    pub fn check(self, value: i64, bitwidth: u32) -> Result<()> {
        if self.contains(value, bitwidth) {
            Ok(())
        } else {
            Err(Error::Range(format!(
                "{value} outside {self} {bitwidth}-bit range [{}, {}]",
                self.min_value(bitwidth),
                self.max_value(bitwidth)
            )))
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Unipolar => "unipolar",
            Polarity::Bipolar => "bipolar",
        })
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unipolar" | "unsigned" | "u" => Ok(Polarity::Unipolar),
            "bipolar" | "signed" | "s" => Ok(Polarity::Bipolar),
            other => Err(Error::Parameter(format!("unknown polarity `{other}`"))),
        }
    }
}

pub fn check_bitwidth(bitwidth: u32) -> Result<()> {
    if SUPPORTED_BITWIDTHS.contains(&bitwidth) {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "bit-width {bitwidth} unsupported (expected one of {SUPPORTED_BITWIDTHS:?})"
        )))
    }
}

pub fn check_unary_base(n: u32) -> Result<()> {
    if SUPPORTED_BASES.contains(&n) {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "unary base {n} unsupported (expected a power of two in {SUPPORTED_BASES:?})"
        )))
    }
}

/// One cycle of a unary stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UnaryCycleEvent {
    pub pulse: bool,
    /// Remainder carried by the final asserted cycle; zero everywhere else.
    pub residue: u32,
}

impl UnaryCycleEvent {
    pub const IDLE: UnaryCycleEvent = UnaryCycleEvent {
        pulse: false,
        residue: 0,
    };

    /// Magnitude this cycle adds under base `n`.
    pub fn weight(&self, n: u32) -> u64 {
        match (self.pulse, self.residue) {
            (false, _) => 0,
            (true, 0) => n as u64,
            (true, r) => r as u64,
        }
    }
}

/// A value in its temporal-unary form: the stream carries the magnitude and
/// the sign travels beside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodedOperand {
    pub value: i64,
    pub magnitude: u64,
    /// `+1` or `-1`. Zero is positive.
    pub sign: i8,
    pub bitwidth: u32,
    pub unary_base: u32,
}

impl EncodedOperand {
    pub fn new(value: i64, bitwidth: u32, n: u32, polarity: Polarity) -> Result<Self> {
        check_bitwidth(bitwidth)?;
        check_unary_base(n)?;
        polarity.check(value, bitwidth)?;
        Ok(EncodedOperand {
            value,
            magnitude: value.unsigned_abs(),
            sign: if value < 0 { -1 } else { 1 },
            bitwidth,
            unary_base: n,
        })
    }

    pub fn pulse_cycles(&self) -> u64 {
        self.magnitude.div_ceil(self.unary_base as u64)
    }

    pub fn residue(&self) -> u32 {
        (self.magnitude % self.unary_base as u64) as u32
    }

    /// Comparator output when the shared counter holds `counter`.
    pub fn event_at_counter(&self, counter: u64) -> UnaryCycleEvent {
        comparator(self.magnitude, counter, self.unary_base)
    }

    /// Event emitted in cycle `cycle` (counter = `cycle * n`).
    pub fn event(&self, cycle: u64) -> UnaryCycleEvent {
        self.event_at_counter(cycle * self.unary_base as u64)
    }

    pub fn events(&self) -> impl Iterator<Item = UnaryCycleEvent> + '_ {
        (0..self.pulse_cycles()).map(move |t| self.event(t))
    }
}

/// Comparator of the shared encoder: high while `magnitude > counter`, and
/// flags the residue when fewer than `n` units remain.
#[inline]
pub fn comparator(magnitude: u64, counter: u64, n: u32) -> UnaryCycleEvent {
    if magnitude > counter {
        let remaining = magnitude - counter;
        let residue = if remaining < n as u64 { remaining as u32 } else { 0 };
        UnaryCycleEvent {
            pulse: true,
            residue,
        }
    } else {
        UnaryCycleEvent::IDLE
    }
}

/// Encode `value` into its asserted cycles. Trailing idle cycles are implied.
pub fn encode(value: i64, bitwidth: u32, n: u32, polarity: Polarity) -> Result<Vec<UnaryCycleEvent>> {
    let op = EncodedOperand::new(value, bitwidth, n, polarity)?;
    Ok(op.events().collect())
}

/// Inverse of [`encode`]. Trailing idle cycles are accepted.
pub fn decode(stream: &[UnaryCycleEvent], n: u32, sign: i8) -> Result<i64> {
    check_unary_base(n)?;
    if sign != 1 && sign != -1 {
        return Err(Error::Parameter(format!("sign must be +1 or -1, got {sign}")));
    }
    let asserted = stream.iter().take_while(|e| e.pulse).count();
    if let Some(pos) = stream[asserted..].iter().position(|e| e.pulse) {
        return Err(Error::Format(format!(
            "pulse at cycle {} after gap at cycle {asserted}",
            asserted + pos
        )));
    }
    let mut magnitude = 0u64;
    for (t, e) in stream.iter().enumerate() {
        if e.residue >= n {
            return Err(Error::Format(format!(
                "residue {} at cycle {t} not below base {n}",
                e.residue
            )));
        }
        if e.residue != 0 && (!e.pulse || t + 1 != asserted) {
            return Err(Error::Format(format!(
                "residue at cycle {t} outside the final asserted cycle"
            )));
        }
        magnitude += e.weight(n);
    }
    Ok(sign as i64 * magnitude as i64)
}

/// Asserted cycles needed for `value` under base `n`: `ceil(|value| / n)`.
pub fn pulse_cycles(value: i64, n: u32) -> u64 {
    value.unsigned_abs().div_ceil(n.max(1) as u64)
}

/// Longest single multiply: the maximum magnitude streamed under base `n`.
pub fn worst_case_mult_cycles(bitwidth: u32, polarity: Polarity, n: u32) -> u64 {
    polarity.max_magnitude(bitwidth).div_ceil(n.max(1) as u64)
}
