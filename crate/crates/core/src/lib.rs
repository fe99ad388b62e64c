//! Cycle-accurate model of a temporal-unary/binary (tub) GEMM unit.
//!
//! Operand A is streamed as a temporal-unary pulse train (each asserted cycle
//! worth `n`, default 2) while operand B stays binary, so a multiply costs
//! `ceil(|a| / n)` cycles and the array exploits small and zero values
//! directly. Alongside the simulator live an analytical latency/energy model
//! and a max-value sparsity profiler.

pub mod error;
pub mod fixtures;
pub mod gemm;
pub mod gen;
pub mod io;
pub mod par;
pub mod pe;
pub mod perf;
pub mod repro;
pub mod sparsity;
pub mod sweep;
pub mod unary;

pub use error::{Error, Result};
pub use gemm::{
    reference_gemm, simulate_gemm, simulate_gemm_with, step_cycles, vector_generator, Axis,
    CycleReport, GemmConfig, GemmOutput, Matrix, MatrixOperands,
};
pub use par::Execution;
pub use pe::{pe_cycle, pe_multiply, PeCycleInput, PeState};
pub use perf::{
    analytical_wc_latency, edp, energy, expected_latency, LatencyModel, PowerProfile, Rational,
};
pub use sparsity::{cumulative, expected_max, histogram_from_matrices, MaxValueHistogram, WorkloadTrace};
pub use unary::{decode, encode, pulse_cycles, worst_case_mult_cycles, EncodedOperand, Polarity, UnaryCycleEvent};
