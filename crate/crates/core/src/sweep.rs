//! Randomized exactness sweeps: the simulator against the reference matmul
//! over many seeded instances.

use serde::Serialize;

use crate::error::Result;
use crate::gemm::{first_difference, reference_gemm, simulate_gemm_with, GemmConfig};
use crate::gen::{random_operands, seeded_rng};
use crate::par::{map_indexed, Execution};
use crate::unary::{Polarity, SUPPORTED_BASES, SUPPORTED_BITWIDTHS};
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub seed: u64,
    pub instances: usize,
    pub min_size: usize,
    pub max_size: usize,
    pub zero_fraction: Option<f64>,
    /// Negative control: perturb one output cell so every instance mismatches.
    pub inject_fault: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            seed: 0,
            instances: 1000,
            min_size: 2,
            max_size: 64,
            zero_fraction: None,
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFailure {
    pub instance: usize,
    pub shape: (usize, usize, usize),
    pub bitwidth: u32,
    pub polarity: Polarity,
    pub unary_base: u32,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub seed: u64,
    pub instances: usize,
    pub passed: usize,
    pub failed: usize,
    pub total_cycles: u64,
    pub largest_shape: (usize, usize, usize),
    pub failures: Vec<SweepFailure>,
}

impl SweepSummary {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

/// Config for instance `i`. Bit-width, polarity and base cycle through every
/// combination; dimensions are drawn uniformly from the size range.
pub fn instance_config<R: Rng>(rng: &mut R, i: usize, opts: &SweepOptions) -> GemmConfig {
    let polarities = [Polarity::Unipolar, Polarity::Bipolar];
    let combos = SUPPORTED_BITWIDTHS.len() * polarities.len() * SUPPORTED_BASES.len();
    let c = i % combos;
    let bitwidth = SUPPORTED_BITWIDTHS[c % SUPPORTED_BITWIDTHS.len()];
    let polarity = polarities[(c / SUPPORTED_BITWIDTHS.len()) % polarities.len()];
    let base = SUPPORTED_BASES[c / (SUPPORTED_BITWIDTHS.len() * polarities.len())];
    let mut dim = || rng.random_range(opts.min_size..=opts.max_size);
    let (m, n, p) = (dim(), dim(), dim());
    GemmConfig::new(m, n, p, bitwidth, polarity).with_unary_base(base)
}

fn run_instance(i: usize, opts: &SweepOptions) -> Result<(GemmConfig, u64, Option<String>)> {
    let mut rng = seeded_rng(opts.seed, i as u64);
    let config = instance_config(&mut rng, i, opts);
    let ops = random_operands(&mut rng, &config, opts.zero_fraction)?;
    let mut out = simulate_gemm_with(&config, &ops, Execution::Sequential)?;
    if opts.inject_fault {
        let v = out.y.get(0, 0);
        out.y.set(0, 0, v + 1);
    }
    let expected = reference_gemm(&ops)?;
    let detail = first_difference(&out.y, &expected).map(|(r, c, got, want)| {
        format!("Y[{r}][{c}] = {got}, reference {want}")
    });
    Ok((config, out.report.total_cycles, detail))
}

/// Run the sweep. Instances are independent and fan out across workers under
/// [`Execution::Parallel`]; results do not depend on the execution mode.
pub fn exactness_sweep(opts: &SweepOptions, exec: Execution) -> SweepSummary {
    let results = map_indexed(opts.instances, exec, |i| run_instance(i, opts));
    let mut summary = SweepSummary {
        seed: opts.seed,
        instances: opts.instances,
        passed: 0,
        failed: 0,
        total_cycles: 0,
        largest_shape: (0, 0, 0),
        failures: Vec::new(),
    };
    for (i, r) in results.into_iter().enumerate() {
        let (failure, cfg) = match r {
            Ok((cfg, cycles, detail)) => {
                summary.total_cycles += cycles;
                let shape = (cfg.m, cfg.n, cfg.p);
                if shape.0 * shape.1 * shape.2
                    > summary.largest_shape.0 * summary.largest_shape.1 * summary.largest_shape.2
                {
                    summary.largest_shape = shape;
                }
                (detail, Some(cfg))
            }
            Err(e) => (Some(e.to_string()), None),
        };
        match failure {
            None => summary.passed += 1,
            Some(detail) => {
                summary.failed += 1;
                let cfg = cfg.unwrap_or_else(|| {
                    instance_config(&mut seeded_rng(opts.seed, i as u64), i, opts)
                });
                summary.failures.push(SweepFailure {
                    instance: i,
                    shape: (cfg.m, cfg.n, cfg.p),
                    bitwidth: cfg.bitwidth,
                    polarity: cfg.polarity,
                    unary_base: cfg.unary_base,
                    detail,
                });
            }
        }
    }
    summary
}
