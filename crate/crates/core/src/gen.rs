//! Seeded random operand and trace generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gemm::{GemmConfig, Matrix, MatrixOperands};
use crate::sparsity::TraceRecord;
use crate::unary::{check_bitwidth, Polarity};

/// Deterministic generator for instance `stream` under `seed`. Distinct
/// streams are independent, so batch items can be drawn in any order.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_zero_fraction(zero_fraction: Option<f64>) -> Result<()> {
    match zero_fraction {
        Some(p) if !(0.0..=1.0).contains(&p) => Err(Error::Parameter(format!(
            "zero fraction {p} outside [0, 1]"
        ))),
        _ => Ok(()),
    }
}

/// One operand value. With `zero_fraction = Some(p)` zero is drawn with
/// probability exactly `p` and other values uniformly; otherwise the whole
/// range is uniform.
pub fn random_value<R: Rng>(rng: &mut R, bitwidth: u32, polarity: Polarity, zero_fraction: Option<f64>) -> i64 {
    let (lo, hi) = (polarity.min_value(bitwidth), polarity.max_value(bitwidth));
    match zero_fraction {
        None => rng.random_range(lo..=hi),
        Some(p) => {
            if rng.random_bool(p) {
                0
            } else {
                // skip zero by shifting the upper half down one slot
                let v = rng.random_range(lo..hi);
                if v >= 0 {
                    v + 1
                } else {
                    v
                }
            }
        }
    }
}

pub fn random_matrix<R: Rng>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    bitwidth: u32,
    polarity: Polarity,
    zero_fraction: Option<f64>,
) -> Result<Matrix> {
    check_bitwidth(bitwidth)?;
    check_zero_fraction(zero_fraction)?;
    let data = (0..rows * cols)
        .map(|_| random_value(rng, bitwidth, polarity, zero_fraction))
        .collect();
    Matrix::from_vec(rows, cols, data)
}

/// A, B in operand range and C drawn from the signed `2b`-bit range, which
/// the default accumulator width always absorbs.
pub fn random_operands<R: Rng>(
    rng: &mut R,
    config: &GemmConfig,
    zero_fraction: Option<f64>,
) -> Result<MatrixOperands> {
    let a = random_matrix(rng, config.m, config.n, config.bitwidth, config.polarity, zero_fraction)?;
    let b = random_matrix(rng, config.n, config.p, config.bitwidth, config.polarity, zero_fraction)?;
    let c_bound = (1i64 << (2 * config.bitwidth - 1)) - 1;
    let c = Matrix::from_vec(
        config.m,
        config.p,
        (0..config.m * config.p)
            .map(|_| rng.random_range(-c_bound..=c_bound))
            .collect(),
    )?;
    Ok(MatrixOperands::with_c(a, b, c))
}

/// Per-op maxima as a trace.
pub fn random_trace<R: Rng>(
    rng: &mut R,
    ops: usize,
    bitwidth: u32,
    polarity: Polarity,
    zero_fraction: Option<f64>,
) -> Result<Vec<TraceRecord>> {
    check_bitwidth(bitwidth)?;
    check_zero_fraction(zero_fraction)?;
    let max = polarity.max_magnitude(bitwidth);
    Ok((0..ops)
        .map(|i| {
            let max_abs = match zero_fraction {
                Some(p) if rng.random_bool(p) => 0,
                Some(_) => rng.random_range(1..=max),
                None => rng.random_range(0..=max),
            };
            TraceRecord {
                op_id: format!("op{i}"),
                max_abs,
            }
        })
        .collect())
}
