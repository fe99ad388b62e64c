//! Multiply-accumulate processing element.
//!
//! The PE sees operand `a` as a unary stream and operand `b` in binary. Every
//! enabled cycle it adds (or subtracts, when the operand signs differ) either
//! `n * |b|` or, in the residue-corrected last cycle, `residue * |b|`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::unary::{check_bitwidth, EncodedOperand, Polarity};

/// Widest accumulator the model carries in an `i64`.
pub const MAX_ACC_WIDTH: u32 = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeState {
    pub accumulator: i64,
    pub acc_width: u32,
}

impl PeState {
    pub fn new(accumulator: i64, acc_width: u32) -> Result<Self> {
        if !(2..=MAX_ACC_WIDTH).contains(&acc_width) {
            return Err(Error::Parameter(format!(
                "accumulator width {acc_width} outside [2, {MAX_ACC_WIDTH}]"
            )));
        }
        let state = PeState {
            accumulator,
            acc_width,
        };
        if !state.fits(accumulator as i128) {
            return Err(Error::Overflow(format!(
                "initial value {accumulator} does not fit {acc_width} signed bits"
            )));
        }
        Ok(state)
    }

    pub fn zeroed(acc_width: u32) -> Result<Self> {
        Self::new(0, acc_width)
    }

    /// `|v| < 2^(acc_width - 1)`.
    #[inline]
    pub fn fits(&self, v: i128) -> bool {
        v.unsigned_abs() < 1u128 << (self.acc_width - 1)
    }
}

/// Signals presented to a PE in one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeCycleInput {
    pub pulse: bool,
    pub residue: u32,
    /// XOR of the two operand sign bits.
    pub sign_flip: bool,
    pub b_operand: i64,
    pub unary_base: u32,
}

impl PeCycleInput {
    #[inline]
    pub fn enabled(&self) -> bool {
        self.pulse || self.residue != 0
    }
}

/// Advance one PE by one cycle.
#[inline]
pub fn pe_cycle(state: PeState, input: &PeCycleInput) -> Result<PeState> {
    if input.residue >= input.unary_base.max(1) || (input.residue != 0 && !input.pulse) {
        return Err(Error::Parameter(format!(
            "residue {} invalid for base {} (pulse = {})",
            input.residue, input.unary_base, input.pulse
        )));
    }
    if !input.enabled() {
        return Ok(state);
    }
    let scale = if input.residue != 0 {
        input.residue
    } else {
        input.unary_base
    };
    let contribution = scale as i128 * input.b_operand.unsigned_abs() as i128;
    let next = if input.sign_flip {
        state.accumulator as i128 - contribution
    } else {
        state.accumulator as i128 + contribution
    };
    if !state.fits(next) {
        return Err(Error::Overflow(format!(
            "{next} exceeds {}-bit accumulator",
            state.acc_width
        )));
    }
    Ok(PeState {
        accumulator: next as i64,
        ..state
    })
}

/// Stream `a` through the PE against a fixed `b`. Returns the new state and
/// the number of cycles consumed, which is `ceil(|a| / n)`.
pub fn pe_multiply(
    state: PeState,
    a: i64,
    b: i64,
    bitwidth: u32,
    n: u32,
    polarity: Polarity,
) -> Result<(PeState, u64)> {
    check_bitwidth(bitwidth)?;
    polarity.check(b, bitwidth)?;
    let op = EncodedOperand::new(a, bitwidth, n, polarity)?;
    let sign_flip = (a < 0) ^ (b < 0);
    let mut state = state;
    let mut cycles = 0;
    for ev in op.events() {
        state = pe_cycle(
            state,
            &PeCycleInput {
                pulse: ev.pulse,
                residue: ev.residue,
                sign_flip,
                b_operand: b,
                unary_base: n,
            },
        )?;
        cycles += 1;
    }
    Ok((state, cycles))
}
