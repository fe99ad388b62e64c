use proptest::prelude::*;
use rand::seq::SliceRandom;

use tubgemm::gemm::{reference_gemm, simulate_gemm, simulate_gemm_with, GemmConfig, Matrix, MatrixOperands};
use tubgemm::gen::{random_matrix, random_operands, seeded_rng};
use tubgemm::pe::{pe_multiply, PeState};
use tubgemm::perf::{self, LatencyModel, PowerProfile, Rational};
use tubgemm::sparsity::{expected_max, histogram_from_matrices, MaxValueHistogram, TraceRecord, WorkloadTrace};
use tubgemm::unary::{pulse_cycles, worst_case_mult_cycles, Polarity};
use tubgemm::Execution;

fn config() -> impl Strategy<Value = (u32, Polarity, u32)> {
    (
        prop::sample::select(vec![2u32, 4, 8]),
        prop::sample::select(vec![Polarity::Unipolar, Polarity::Bipolar]),
        prop::sample::select(vec![1u32, 2, 4, 8]),
    )
}

fn instance(max: usize) -> impl Strategy<Value = (GemmConfig, u64)> {
    (config(), 1..=max, 1..=max, 1..=max, any::<u64>()).prop_map(|((b, pol, n), m, k, p, seed)| {
        (GemmConfig::new(m, k, p, b, pol).with_unary_base(n), seed)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn simulator_matches_reference((cfg, seed) in instance(24)) {
        let ops = random_operands(&mut seeded_rng(seed, 0), &cfg, None).unwrap();
        let out = simulate_gemm(&cfg, &ops).unwrap();
        prop_assert_eq!(out.y, reference_gemm(&ops).unwrap());
        prop_assert!(out.report.compute_cycles() <= cfg.n as u64 * cfg.worst_case_mult_cycles());
    }

    #[test]
    fn execution_modes_agree((cfg, seed) in instance(20)) {
        let ops = random_operands(&mut seeded_rng(seed, 0), &cfg, Some(0.25)).unwrap();
        prop_assert_eq!(
            simulate_gemm_with(&cfg, &ops, Execution::Sequential).unwrap(),
            simulate_gemm_with(&cfg, &ops, Execution::Parallel).unwrap()
        );
    }

    #[test]
    fn row_permutation_keeps_step_cycles((cfg, seed) in instance(12)) {
        let mut rng = seeded_rng(seed, 0);
        let ops = random_operands(&mut rng, &cfg, Some(0.3)).unwrap();
        let mut perm: Vec<usize> = (0..cfg.m).collect();
        perm.shuffle(&mut rng);
        let permute = |mat: &Matrix| {
            Matrix::from_rows(&perm.iter().map(|&i| mat.row(i).to_vec()).collect::<Vec<_>>()).unwrap()
        };
        let shuffled = MatrixOperands::with_c(permute(&ops.a), ops.b.clone(), permute(&ops.c));
        let a = simulate_gemm(&cfg, &ops).unwrap();
        let b = simulate_gemm(&cfg, &shuffled).unwrap();
        prop_assert_eq!(a.report, b.report);
        prop_assert_eq!(permute(&a.y), b.y);
    }

    #[test]
    fn larger_magnitudes_never_shorten_a_step((cfg, seed) in instance(10), col in any::<prop::sample::Index>()) {
        let mut rng = seeded_rng(seed, 0);
        let ops = random_operands(&mut rng, &cfg, Some(0.3)).unwrap();
        let k = col.index(cfg.n);
        let mut bigger = ops.clone();
        let extreme = match cfg.polarity {
            Polarity::Unipolar => cfg.polarity.max_value(cfg.bitwidth),
            Polarity::Bipolar => cfg.polarity.min_value(cfg.bitwidth),
        };
        bigger.a.set(0, k, extreme);
        let before = simulate_gemm(&cfg, &ops).unwrap().report;
        let after = simulate_gemm(&cfg, &bigger).unwrap().report;
        prop_assert!(after.per_step_cycles[k] >= before.per_step_cycles[k]);
        prop_assert_eq!(after.per_step_cycles[k], cfg.worst_case_mult_cycles());
    }

    #[test]
    fn accumulation_order_is_irrelevant(seed in any::<u64>(), len in 1usize..64) {
        let mut rng = seeded_rng(seed, 0);
        let a = random_matrix(&mut rng, 1, len, 8, Polarity::Bipolar, None).unwrap();
        let b = random_matrix(&mut rng, 1, len, 8, Polarity::Bipolar, None).unwrap();
        let mut pairs: Vec<(i64, i64)> = a.as_slice().iter().copied().zip(b.as_slice().iter().copied()).collect();
        let run = |pairs: &[(i64, i64)]| {
            pairs.iter().fold(PeState::zeroed(30).unwrap(), |s, &(x, y)| {
                pe_multiply(s, x, y, 8, 2, Polarity::Bipolar).unwrap().0
            })
        };
        let first = run(&pairs);
        pairs.shuffle(&mut rng);
        prop_assert_eq!(first, run(&pairs));
    }

    #[test]
    fn pe_latency_ignores_b((bits, pol, n) in config(), seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = seeded_rng(seed, 0);
        let a = rng.random_range(pol.min_value(bits)..=pol.max_value(bits));
        let cycles: Vec<u64> = (pol.min_value(bits)..=pol.max_value(bits))
            .map(|b| pe_multiply(PeState::zeroed(24).unwrap(), a, b, bits, n, pol).unwrap().1)
            .collect();
        prop_assert!(cycles.iter().all(|&c| c == pulse_cycles(a, n)));
    }

    #[test]
    fn histogram_matches_binned_trace(seed in any::<u64>(), count in 1usize..40) {
        let mut rng = seeded_rng(seed, 0);
        let mats: Vec<Matrix> = (0..count)
            .map(|_| random_matrix(&mut rng, 3, 4, 8, Polarity::Bipolar, Some(0.5)).unwrap())
            .collect();
        let h = histogram_from_matrices(&mats, 8, Polarity::Bipolar).unwrap();
        let trace = WorkloadTrace::PerOp(
            mats.iter()
                .enumerate()
                .map(|(i, m)| TraceRecord { op_id: i.to_string(), max_abs: m.max_abs() })
                .collect(),
        );
        prop_assert_eq!(&trace.to_histogram(8, Polarity::Bipolar).unwrap(), &h);
        prop_assert_eq!(h.total_ops, count as u64);
        let e = expected_max(&h).unwrap();
        prop_assert!(e >= Rational::from_integer(0));
        prop_assert!(e <= Rational::from_integer(h.max_observed().unwrap() as i128));
    }

    #[test]
    fn analytical_latency_is_monotone(bits in prop::sample::select(vec![2u32, 4, 8]), n1 in 1usize..256, n2 in 1usize..256) {
        let profile = PowerProfile::embedded();
        let model = LatencyModel::default();
        let (lo, hi) = (n1.min(n2), n1.max(n2));
        let l = |k: usize, b: u32| perf::analytical_wc_latency(&GemmConfig::new(16, k, 16, b, Polarity::Bipolar), &model, &profile);
        prop_assert!(l(lo, bits) <= l(hi, bits));
        if bits > 2 {
            prop_assert!(l(lo, bits / 2) <= l(lo, bits));
        }
    }
}

/// Batches whose every A column holds the op's maximum: simulated compute
/// cycles average to the full-expectation model exactly, and sit within one
/// cycle per step of the expected-maximum bound.
#[test]
fn simulation_agrees_with_sparsity_model() {
    let mut rng = seeded_rng(2024, 0);
    let cfg = GemmConfig::new(8, 8, 8, 8, Polarity::Unipolar);
    let model = LatencyModel::default().with_overhead_zero();
    let mut hist = MaxValueHistogram::new(8, Polarity::Unipolar).unwrap();
    let mut sim_cycles = 0u64;
    let ops_count = 200;
    for _ in 0..ops_count {
        use rand::Rng;
        let max: i64 = if rng.random_bool(0.25) { 0 } else { rng.random_range(1..=255) };
        let mut a = random_matrix(&mut rng, 8, 8, 8, Polarity::Unipolar, None).unwrap();
        for i in 0..8 {
            for k in 0..8 {
                a.set(i, k, a.get(i, k).min(max));
            }
        }
        for k in 0..8 {
            a.set(k % 8, k, max);
        }
        let b = random_matrix(&mut rng, 8, 8, 8, Polarity::Unipolar, None).unwrap();
        let ops = MatrixOperands::new(a, b);
        hist.record(ops.a.max_abs()).unwrap();
        sim_cycles += simulate_gemm(&cfg, &ops).unwrap().report.compute_cycles();
    }
    let avg = Rational::new(sim_cycles as i128, ops_count);
    assert_eq!(avg, perf::expected_cycles_full(&cfg, &hist, &model).unwrap());
    let bound = perf::expected_cycles(&cfg, &hist, &model).unwrap();
    let diff = if avg > bound { avg - bound } else { bound - avg };
    assert!(diff < Rational::from_integer(cfg.n as i128));
}

#[test]
fn simulator_never_exceeds_analytical_worst_case() {
    let profile = PowerProfile::embedded();
    let model = LatencyModel::default();
    for (b, pol) in [(8, Polarity::Bipolar), (4, Polarity::Unipolar), (2, Polarity::Bipolar)] {
        let cfg = GemmConfig::square(16, b, pol);
        let ops = random_operands(&mut seeded_rng(1, 0), &cfg, None).unwrap();
        let out = simulate_gemm(&cfg, &ops).unwrap();
        let sim_s = out.report.compute_cycles() as f64 / profile.frequency_hz;
        assert!(sim_s <= perf::analytical_wc_latency(&cfg, &model, &profile));
        assert!(out.report.compute_cycles() <= 16 * worst_case_mult_cycles(b, pol, 2));
    }
}

trait ZeroOverhead {
    fn with_overhead_zero(self) -> Self;
}

impl ZeroOverhead for LatencyModel {
    fn with_overhead_zero(mut self) -> Self {
        self.step_overhead = Rational::from_integer(0);
        self
    }
}
