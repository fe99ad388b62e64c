//! Shipped datasets.

use crate::sparsity::{MaxValueHistogram, WorkloadTrace};
use crate::unary::Polarity;

/// Synthetic unipolar 8-bit max-value histogram: 25% of ops all-zero, every
/// other bin under 2%, 90% of ops at or below 150, mean maximum exactly 82.
/// Hand-shaped to those published summary statistics; it is not measured data.
pub const SYNTHETIC_MAXVAL_HISTOGRAM_CSV: &str = include_str!("../data/synthetic_maxval_histogram.csv");

pub fn synthetic_maxval_histogram() -> MaxValueHistogram {
    match WorkloadTrace::read_binned(SYNTHETIC_MAXVAL_HISTOGRAM_CSV.as_bytes(), 8, Polarity::Unipolar) {
        Ok(WorkloadTrace::Binned(h)) => h,
        other => panic!("shipped histogram fixture is malformed: {other:?}"),
    }
}
