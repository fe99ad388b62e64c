//! Maximum-magnitude histograms over workload traces.
//!
//! A GEMM's latency is bounded by the largest operand magnitude it streams, so
//! a workload is summarized by how often each value shows up as the per-op
//! maximum. From that histogram come the cumulative distribution and the
//! expected maximum that feed the average-case latency model.

use serde::{Deserialize, Serialize};
use std::io::Read;

use crate::error::{Error, Result};
use crate::gemm::{GemmConfig, Matrix};
use crate::perf::{self, LatencyModel, PowerProfile, ProfileQuery, Rational};
use crate::unary::{check_bitwidth, Polarity};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxValueHistogram {
    pub bitwidth: u32,
    pub polarity: Polarity,
    /// `counts[v]` is the number of ops whose maximum magnitude was `v`.
    pub counts: Vec<u64>,
    pub total_ops: u64,
}

impl MaxValueHistogram {
    pub fn new(bitwidth: u32, polarity: Polarity) -> Result<Self> {
        check_bitwidth(bitwidth)?;
        Ok(MaxValueHistogram {
            bitwidth,
            polarity,
            counts: vec![0; polarity.max_magnitude(bitwidth) as usize + 1],
            total_ops: 0,
        })
    }

    pub fn max_magnitude(&self) -> u64 {
        self.polarity.max_magnitude(self.bitwidth)
    }

    pub fn add(&mut self, value: u64, count: u64) -> Result<()> {
        if value > self.max_magnitude() {
            return Err(Error::Range(format!(
                "maximum {value} above {} {}-bit magnitude bound {}",
                self.polarity,
                self.bitwidth,
                self.max_magnitude()
            )));
        }
        self.counts[value as usize] += count;
        self.total_ops += count;
        Ok(())
    }

    pub fn record(&mut self, value: u64) -> Result<()> {
        self.add(value, 1)
    }

    pub fn from_pairs<I: IntoIterator<Item = (u64, u64)>>(
        bitwidth: u32,
        polarity: Polarity,
        pairs: I,
    ) -> Result<Self> {
        let mut h = Self::new(bitwidth, polarity)?;
        for (v, c) in pairs {
            h.add(v, c)?;
        }
        Ok(h)
    }

    pub fn is_empty(&self) -> bool {
        self.total_ops == 0
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::Empty("histogram has no operations".into()))
        } else {
            Ok(())
        }
    }

    /// Largest value with a nonzero count.
    pub fn max_observed(&self) -> Option<u64> {
        self.counts.iter().rposition(|&c| c > 0).map(|v| v as u64)
    }

    /// Nonzero bins as `(value, count)`.
    pub fn bins(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(v, &c)| (v as u64, c))
    }

    pub fn fraction(&self, value: u64) -> f64 {
        self.counts.get(value as usize).copied().unwrap_or(0) as f64 / self.total_ops as f64
    }
}

/// Per-op maximum magnitudes, or an already binned histogram.
#[derive(Debug, Clone, PartialEq)]
pub enum WorkloadTrace {
    PerOp(Vec<TraceRecord>),
    Binned(MaxValueHistogram),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub op_id: String,
    pub max_abs: u64,
}

impl WorkloadTrace {
    pub fn to_histogram(&self, bitwidth: u32, polarity: Polarity) -> Result<MaxValueHistogram> {
        match self {
            WorkloadTrace::PerOp(records) => {
                let mut h = MaxValueHistogram::new(bitwidth, polarity)?;
                for r in records {
                    h.record(r.max_abs)?;
                }
                Ok(h)
            }
            WorkloadTrace::Binned(h) => {
                if h.bitwidth != bitwidth || h.polarity != polarity {
                    return Err(Error::Parameter(format!(
                        "histogram is {} {}-bit, expected {polarity} {bitwidth}-bit",
                        h.polarity, h.bitwidth
                    )));
                }
                Ok(h.clone())
            }
        }
    }

    /// Parse a `op_id,max_abs` CSV stream.
    pub fn read_per_op<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let records = rdr
            .deserialize::<TraceRecord>()
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(WorkloadTrace::PerOp(records))
    }

    /// Parse a `value,count` CSV stream.
    pub fn read_binned<R: Read>(reader: R, bitwidth: u32, polarity: Polarity) -> Result<Self> {
        #[derive(Deserialize)]
        struct Bin {
            value: u64,
            count: u64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut h = MaxValueHistogram::new(bitwidth, polarity)?;
        for bin in rdr.deserialize::<Bin>() {
            let bin = bin?;
            h.add(bin.value, bin.count)?;
        }
        Ok(WorkloadTrace::Binned(h))
    }
}

/// One histogram increment per matrix, at its largest absolute entry.
pub fn histogram_from_matrices(
    ops: &[Matrix],
    bitwidth: u32,
    polarity: Polarity,
) -> Result<MaxValueHistogram> {
    let mut h = MaxValueHistogram::new(bitwidth, polarity)?;
    for (idx, m) in ops.iter().enumerate() {
        if let Some(&bad) = m.as_slice().iter().find(|&&v| !polarity.contains(v, bitwidth)) {
            return Err(Error::Range(format!(
                "matrix {idx} holds {bad}, outside {polarity} {bitwidth}-bit range"
            )));
        }
        h.record(m.max_abs())?;
    }
    Ok(h)
}

/// `(value, percent of ops with maximum <= value)` for every value.
pub fn cumulative(hist: &MaxValueHistogram) -> Result<Vec<(u64, f64)>> {
    hist.require_nonempty()?;
    let mut running = 0u64;
    Ok(hist
        .counts
        .iter()
        .enumerate()
        .map(|(v, &c)| {
            running += c;
            (v as u64, 100.0 * running as f64 / hist.total_ops as f64)
        })
        .collect())
}

/// Mean per-op maximum, exact.
pub fn expected_max(hist: &MaxValueHistogram) -> Result<Rational> {
    hist.require_nonempty()?;
    let weighted: i128 = hist
        .counts
        .iter()
        .enumerate()
        .map(|(v, &c)| v as i128 * c as i128)
        .sum();
    Ok(Rational::new(weighted, hist.total_ops as i128))
}

/// Average-case latency/energy summary for a workload.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparsityReport {
    pub expected_max: f64,
    pub expected_max_exact: String,
    pub avg_latency_s: f64,
    /// Expectation of per-op latency rather than latency at the expected maximum.
    pub avg_latency_full_s: f64,
    pub avg_energy_j: f64,
    pub edp_js: f64,
    pub wc_latency_s: f64,
    pub wc_energy_j: f64,
    pub wc_edp_js: f64,
    /// Worst-case latency over average latency.
    pub wc_ratio: f64,
    pub edp_improvement: f64,
    pub power_w: f64,
    pub zero_fraction: f64,
}

/// Combine the expected-maximum latency with the configured power. `power_w`
/// overrides the profile lookup.
pub fn profile_simulation(
    config: &GemmConfig,
    trace: &WorkloadTrace,
    model: &LatencyModel,
    profile: &PowerProfile,
    power_w: Option<f64>,
) -> Result<SparsityReport> {
    let hist = trace.to_histogram(config.bitwidth, config.polarity)?;
    let e_max = expected_max(&hist)?;
    let power = match power_w {
        Some(p) => p,
        None => profile.lookup(&ProfileQuery::for_config(config))?.power_w,
    };
    let avg_latency = perf::expected_latency(config, &hist, model, profile)?;
    let avg_latency_full = perf::expected_latency_full(config, &hist, model, profile)?;
    let wc_latency = perf::analytical_wc_latency(config, model, profile);
    let avg_energy = perf::energy(power, avg_latency);
    let wc_energy = perf::energy(power, wc_latency);
    let edp = perf::edp(avg_energy, avg_latency);
    let wc_edp = perf::edp(wc_energy, wc_latency);
    Ok(SparsityReport {
        expected_max: perf::to_f64(e_max),
        expected_max_exact: e_max.to_string(),
        avg_latency_s: avg_latency,
        avg_latency_full_s: avg_latency_full,
        avg_energy_j: avg_energy,
        edp_js: edp,
        wc_latency_s: wc_latency,
        wc_energy_j: wc_energy,
        wc_edp_js: wc_edp,
        wc_ratio: wc_latency / avg_latency,
        edp_improvement: wc_edp / edp,
        power_w: power,
        zero_fraction: hist.fraction(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrices_examples() {
        let zero = Matrix::zeros(2, 2);
        let h = histogram_from_matrices(&[zero], 8, Polarity::Bipolar).unwrap();
        assert_eq!(h.counts[0], 1);
        let m = Matrix::from_rows(&[[3, -7], [1, 2]]).unwrap();
        let h = histogram_from_matrices(&[m], 8, Polarity::Bipolar).unwrap();
        assert_eq!(h.counts[7], 1);
        assert_eq!(h.total_ops, 1);

        let bad = Matrix::from_rows(&[[-1]]).unwrap();
        assert!(matches!(
            histogram_from_matrices(&[bad], 8, Polarity::Unipolar),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn cumulative_single_op_is_a_step() {
        let h = MaxValueHistogram::from_pairs(4, Polarity::Unipolar, [(9, 1)]).unwrap();
        let cdf = cumulative(&h).unwrap();
        assert_eq!(cdf.len(), 16);
        assert!(cdf[..9].iter().all(|&(_, p)| p == 0.0));
        assert!(cdf[9..].iter().all(|&(_, p)| p == 100.0));
    }

    #[test]
    fn expected_max_examples() {
        let h = MaxValueHistogram::from_pairs(8, Polarity::Unipolar, [(0, 5)]).unwrap();
        assert_eq!(expected_max(&h).unwrap(), Rational::from_integer(0));
        let h = MaxValueHistogram::from_pairs(8, Polarity::Unipolar, [(10, 3), (20, 3)]).unwrap();
        assert_eq!(expected_max(&h).unwrap(), Rational::from_integer(15));
        let h = MaxValueHistogram::from_pairs(8, Polarity::Unipolar, [(1, 1), (2, 1)]).unwrap();
        assert_eq!(expected_max(&h).unwrap(), Rational::new(3, 2));
    }

    #[test]
    fn empty_and_out_of_range() {
        let h = MaxValueHistogram::new(8, Polarity::Unipolar).unwrap();
        assert!(matches!(cumulative(&h), Err(Error::Empty(_))));
        assert!(matches!(expected_max(&h), Err(Error::Empty(_))));
        let mut h = MaxValueHistogram::new(8, Polarity::Bipolar).unwrap();
        assert!(h.record(128).is_ok());
        assert!(matches!(h.record(129), Err(Error::Range(_))));
    }

    #[test]
    fn trace_csv_parsing() {
        let per_op = "op_id,max_abs\nconv1,3\nconv2, 7\nconv3,3\n";
        let t = WorkloadTrace::read_per_op(per_op.as_bytes()).unwrap();
        let h = t.to_histogram(8, Polarity::Unipolar).unwrap();
        assert_eq!((h.counts[3], h.counts[7], h.total_ops), (2, 1, 3));

        let binned = "value,count\n3,2\n7,1\n";
        let t2 = WorkloadTrace::read_binned(binned.as_bytes(), 8, Polarity::Unipolar).unwrap();
        assert_eq!(t2.to_histogram(8, Polarity::Unipolar).unwrap(), h);
        assert!(t2.to_histogram(4, Polarity::Unipolar).is_err());

        assert!(WorkloadTrace::read_per_op("op_id,max_abs\nx,abc\n".as_bytes()).is_err());
    }
}
