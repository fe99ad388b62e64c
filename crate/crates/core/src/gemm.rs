//! The M×P PE array computing `Y = A×B + C` as N column-row outer products.
//!
//! Each step an index counter selects column `k` of A and row `k` of B. A
//! shared encoder turns the A column into M unary streams while the B row is
//! broadcast in binary; the step lasts as long as the longest stream. PEs
//! start out holding C, so after N steps they hold Y.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::pe::{pe_cycle, PeCycleInput, PeState, MAX_ACC_WIDTH};
use crate::unary::{
    check_bitwidth, check_unary_base, comparator, pulse_cycles, worst_case_mult_cycles, Polarity,
    DEFAULT_UNARY_BASE,
};

/// Handshake cycles charged per step by default.
pub const DEFAULT_STEP_OVERHEAD_CYCLES: u64 = 2;
/// Cycles to raise `output_valid` after the last step.
pub const DEFAULT_EPILOGUE_CYCLES: u64 = 4;

/// Dense row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<i64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} elements cannot form a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Matrix::zeros(size, size);
        for i in 0..size {
            m.set(i, i, 1);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.cols.max(1)).map(<[i64]>::to_vec).collect()
    }

    /// Largest absolute entry, 0 for an empty matrix.
    pub fn max_abs(&self) -> u64 {
        self.data.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GemmConfig {
    /// Rows of A, C and Y.
    pub m: usize,
    /// Inner dimension: columns of A, rows of B, and the number of steps.
    pub n: usize,
    /// Columns of B, C and Y.
    pub p: usize,
    pub bitwidth: u32,
    pub polarity: Polarity,
    pub unary_base: u32,
    pub step_overhead_cycles: u64,
    pub epilogue_cycles: u64,
    pub acc_width: u32,
}

impl GemmConfig {
    /// Config with default base, overheads and the default accumulator width.
    pub fn new(m: usize, n: usize, p: usize, bitwidth: u32, polarity: Polarity) -> Self {
        GemmConfig {
            m,
            n,
            p,
            bitwidth,
            polarity,
            unary_base: DEFAULT_UNARY_BASE,
            step_overhead_cycles: DEFAULT_STEP_OVERHEAD_CYCLES,
            epilogue_cycles: DEFAULT_EPILOGUE_CYCLES,
            acc_width: default_acc_width(bitwidth, n),
        }
    }

    pub fn square(size: usize, bitwidth: u32, polarity: Polarity) -> Self {
        Self::new(size, size, size, bitwidth, polarity)
    }

    pub fn with_unary_base(mut self, n: u32) -> Self {
        self.unary_base = n;
        self
    }

    pub fn with_overheads(mut self, step: u64, epilogue: u64) -> Self {
        self.step_overhead_cycles = step;
        self.epilogue_cycles = epilogue;
        self
    }

    pub fn with_acc_width(mut self, acc_width: u32) -> Self {
        self.acc_width = acc_width;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_bitwidth(self.bitwidth)?;
        check_unary_base(self.unary_base)?;
        if self.m == 0 || self.n == 0 || self.p == 0 {
            return Err(Error::Parameter(format!(
                "dimensions must be positive, got {}x{}x{}",
                self.m, self.n, self.p
            )));
        }
        let min = min_acc_width(self.bitwidth, self.n);
        if self.acc_width < min || self.acc_width > MAX_ACC_WIDTH {
            return Err(Error::Parameter(format!(
                "accumulator width {} outside [{min}, {MAX_ACC_WIDTH}]",
                self.acc_width
            )));
        }
        Ok(())
    }

    pub fn worst_case_mult_cycles(&self) -> u64 {
        worst_case_mult_cycles(self.bitwidth, self.polarity, self.unary_base)
    }
}

fn ceil_log2(n: usize) -> u32 {
    n.max(1).next_power_of_two().trailing_zeros()
}

/// `2b + ceil(log2 N) + 1`: room for N products of b-bit operands.
pub fn min_acc_width(bitwidth: u32, inner: usize) -> u32 {
    2 * bitwidth + ceil_log2(inner) + 1
}

/// One bit above [`min_acc_width`] so a C term of the same magnitude fits too.
pub fn default_acc_width(bitwidth: u32, inner: usize) -> u32 {
    (min_acc_width(bitwidth, inner) + 1).min(MAX_ACC_WIDTH)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixOperands {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
}

impl MatrixOperands {
    /// Operands with a zero C.
    pub fn new(a: Matrix, b: Matrix) -> Self {
        let c = Matrix::zeros(a.rows(), b.cols());
        MatrixOperands { a, b, c }
    }

    pub fn with_c(a: Matrix, b: Matrix, c: Matrix) -> Self {
        MatrixOperands { a, b, c }
    }

    pub fn check_shapes(&self) -> Result<(usize, usize, usize)> {
        let (m, n) = self.a.shape();
        let (nb, p) = self.b.shape();
        if n != nb {
            return Err(Error::Shape(format!(
                "A is {m}x{n} but B is {nb}x{p}"
            )));
        }
        if self.c.shape() != (m, p) {
            return Err(Error::Shape(format!(
                "C is {}x{}, expected {m}x{p}",
                self.c.rows(),
                self.c.cols()
            )));
        }
        Ok((m, n, p))
    }

    /// Config whose dimensions match these operands.
    pub fn config(&self, bitwidth: u32, polarity: Polarity) -> Result<GemmConfig> {
        let (m, n, p) = self.check_shapes()?;
        Ok(GemmConfig::new(m, n, p, bitwidth, polarity))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Column,
    Row,
}

/// Vector generator: column `k` of A or row `k` of B.
pub fn vector_generator(matrix: &Matrix, k: usize, axis: Axis) -> Result<Vec<i64>> {
    let bound = match axis {
        Axis::Column => matrix.cols(),
        Axis::Row => matrix.rows(),
    };
    if k >= bound {
        return Err(Error::Range(format!("index {k} out of range 0..{bound}")));
    }
    Ok(match axis {
        Axis::Column => matrix.column(k),
        Axis::Row => matrix.row(k).to_vec(),
    })
}

/// Compute cycles of one step: the longest unary stream in the column.
pub fn step_cycles(column: &[i64], n: u32) -> u64 {
    column.iter().map(|&v| pulse_cycles(v, n)).max().unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleReport {
    pub per_step_cycles: Vec<u64>,
    /// Cycle count at which each step's `done` handshake completes.
    pub done_cycles: Vec<u64>,
    pub step_overhead_cycles: u64,
    pub epilogue_cycles: u64,
    pub total_cycles: u64,
    pub output_valid_cycle: u64,
    pub zero_steps: usize,
}

impl CycleReport {
    fn from_steps(per_step_cycles: Vec<u64>, step_overhead: u64, epilogue: u64) -> Self {
        let mut done_cycles = Vec::with_capacity(per_step_cycles.len());
        let mut t = 0;
        for &c in &per_step_cycles {
            t += c + step_overhead;
            done_cycles.push(t);
        }
        let total_cycles = t + epilogue;
        CycleReport {
            zero_steps: per_step_cycles.iter().filter(|&&c| c == 0).count(),
            per_step_cycles,
            done_cycles,
            step_overhead_cycles: step_overhead,
            epilogue_cycles: epilogue,
            total_cycles,
            output_valid_cycle: total_cycles,
        }
    }

    /// Cycles spent streaming operands, excluding handshakes.
    pub fn compute_cycles(&self) -> u64 {
        self.per_step_cycles.iter().sum()
    }

    pub fn seconds(&self, frequency_hz: f64) -> f64 {
        self.total_cycles as f64 / frequency_hz
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GemmOutput {
    pub y: Matrix,
    pub report: CycleReport,
}

fn validate_operands(config: &GemmConfig, ops: &MatrixOperands) -> Result<()> {
    config.validate()?;
    let dims = ops.check_shapes()?;
    if dims != (config.m, config.n, config.p) {
        return Err(Error::Shape(format!(
            "operands are {dims:?} but config declares {:?}",
            (config.m, config.n, config.p)
        )));
    }
    for (name, mat) in [("A", &ops.a), ("B", &ops.b)] {
        for (idx, &v) in mat.as_slice().iter().enumerate() {
            if !config.polarity.contains(v, config.bitwidth) {
                let (i, j) = (idx / mat.cols(), idx % mat.cols());
                return Err(Error::Range(format!(
                    "{name}[{i}][{j}] = {v} outside {} {}-bit range",
                    config.polarity, config.bitwidth
                )));
            }
        }
    }
    Ok(())
}

/// Run the array cycle by cycle with the default execution mode.
pub fn simulate_gemm(config: &GemmConfig, ops: &MatrixOperands) -> Result<GemmOutput> {
    simulate_gemm_with(config, ops, Execution::default())
}

/// Run the array cycle by cycle. PE rows are independent within a step, so
/// with [`Execution::Parallel`] they are stepped concurrently; the result is
/// identical either way.
pub fn simulate_gemm_with(
    config: &GemmConfig,
    ops: &MatrixOperands,
    exec: Execution,
) -> Result<GemmOutput> {
    validate_operands(config, ops)?;
    let n = config.unary_base;
    let mut pes = ops
        .c
        .as_slice()
        .iter()
        .map(|&c| PeState::new(c, config.acc_width))
        .collect::<Result<Vec<_>>>()?;

    let mut per_step = Vec::with_capacity(config.n);
    let mut b_rows = Vec::with_capacity(config.n);
    for k in 0..config.n {
        per_step.push(step_cycles(&vector_generator(&ops.a, k, Axis::Column)?, n));
        b_rows.push(vector_generator(&ops.b, k, Axis::Row)?);
    }

    // PE rows never interact, so each row can run every step on its own.
    par::try_for_each_row(&mut pes, config.p, exec, |i, row| {
        for (k, (&cycles, b_row)) in per_step.iter().zip(&b_rows).enumerate() {
            let a = ops.a.get(i, k);
            let magnitude = a.unsigned_abs();
            for t in 0..cycles {
                let ev = comparator(magnitude, t * n as u64, n);
                if !ev.pulse {
                    // comparator stays low for the rest of the step
                    break;
                }
                for (pe, &b) in row.iter_mut().zip(b_row) {
                    *pe = pe_cycle(
                        *pe,
                        &PeCycleInput {
                            pulse: ev.pulse,
                            residue: ev.residue,
                            sign_flip: (a < 0) ^ (b < 0),
                            b_operand: b,
                            unary_base: n,
                        },
                    )?;
                }
            }
        }
        Ok(())
    })?;

    let y = Matrix::from_vec(
        config.m,
        config.p,
        pes.iter().map(|pe| pe.accumulator).collect(),
    )?;
    let report = CycleReport::from_steps(per_step, config.step_overhead_cycles, config.epilogue_cycles);
    Ok(GemmOutput { y, report })
}

/// Textbook `A×B + C`, the exactness oracle for [`simulate_gemm`].
pub fn reference_gemm(ops: &MatrixOperands) -> Result<Matrix> {
    let (m, n, p) = ops.check_shapes()?;
    let mut y = ops.c.clone();
    for i in 0..m {
        for j in 0..p {
            let mut acc = y.get(i, j);
            for k in 0..n {
                acc += ops.a.get(i, k) * ops.b.get(k, j);
            }
            y.set(i, j, acc);
        }
    }
    Ok(y)
}

/// Position and values of the first differing cell, row-major.
pub fn first_difference(lhs: &Matrix, rhs: &Matrix) -> Option<(usize, usize, i64, i64)> {
    if lhs.shape() != rhs.shape() {
        return Some((0, 0, lhs.rows() as i64, rhs.rows() as i64));
    }
    lhs.as_slice()
        .iter()
        .zip(rhs.as_slice())
        .position(|(a, b)| a != b)
        .map(|idx| {
            let (i, j) = (idx / lhs.cols(), idx % lhs.cols());
            (i, j, lhs.get(i, j), rhs.get(i, j))
        })
}
