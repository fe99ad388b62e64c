//! Published reference figures and a pass/fail comparison against the models.

use serde::Serialize;

use crate::error::Result;
use crate::fixtures::synthetic_maxval_histogram;
use crate::gemm::{simulate_gemm, GemmConfig, Matrix, MatrixOperands};
use crate::perf::{self, LatencyModel, PowerProfile, ProfileQuery, Technology};
use crate::sparsity::{profile_simulation, WorkloadTrace};
use crate::unary::Polarity;

/// N5 sweep rows: (array size, bit-width, WC latency µs, WC energy nJ).
pub const N5_WC_TABLE: [(usize, u32, f64, f64); 12] = [
    (16, 8, 2.65, 9.93),
    (16, 4, 0.25, 0.42),
    (16, 2, 0.13, 0.12),
    (32, 8, 5.30, 115.55),
    (32, 4, 0.50, 4.21),
    (32, 2, 0.26, 0.83),
    (64, 8, 10.60, 902.33),
    (64, 4, 1.00, 39.07),
    (64, 2, 0.52, 8.37),
    (128, 8, 21.20, 8855.72),
    (128, 4, 2.00, 419.82),
    (128, 2, 1.04, 100.31),
];

/// 45nm 16x16 8-bit worst-case latency in µs.
pub const WC_45NM_BIPOLAR_US: f64 = 2.65;
pub const WC_45NM_UNIPOLAR_US: f64 = 5.29;

pub const LATENCY_RATIO_8_TO_4: f64 = 10.6;
pub const ENERGY_RATIO_8_TO_4: f64 = 23.9;

/// Average-case unipolar 16x16 figures.
pub const AVG_EXPECTED_MAX: f64 = 82.0;
pub const AVG_LATENCY_US: f64 = 1.72;
pub const AVG_ENERGY_UJ: f64 = 0.021;
pub const AVG_EDP_UJ_US: f64 = 0.036;
pub const WC_TO_AVG_LATENCY_RATIO: f64 = 3.0;
pub const EDP_IMPROVEMENT: f64 = 9.25;

/// 64x64 workload rows: (name, power mW, latency µs, energy µJ).
pub const WORKLOAD_ENERGY: [(&str, f64, f64, f64); 2] = [
    ("mobilenetv2", 49.43, 5.54, 0.27),
    ("resnet50", 56.35, 4.66, 0.26),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    Absolute(f64),
    Relative(f64),
}

impl Tolerance {
    pub fn accepts(&self, expected: f64, actual: f64) -> bool {
        match *self {
            Tolerance::Absolute(t) => (actual - expected).abs() <= t + 1e-12,
            Tolerance::Relative(t) => (actual - expected).abs() <= t * expected.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproCheck {
    pub group: &'static str,
    pub name: String,
    pub unit: &'static str,
    pub published: f64,
    pub modeled: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
}

impl ReproCheck {
    fn new(
        group: &'static str,
        name: impl Into<String>,
        unit: &'static str,
        published: f64,
        modeled: f64,
        tolerance: Tolerance,
    ) -> Self {
        ReproCheck {
            group,
            name: name.into(),
            unit,
            published,
            modeled,
            tolerance,
            pass: tolerance.accepts(published, modeled),
        }
    }
}

fn n5_energy(
    size: usize,
    bits: u32,
    model: &LatencyModel,
    profile: &PowerProfile,
) -> Result<(f64, f64)> {
    let cfg = GemmConfig::square(size, bits, Polarity::Bipolar);
    let latency = perf::analytical_wc_latency(&cfg, model, profile);
    let entry = profile.lookup(&ProfileQuery::for_config(&cfg).technology(Technology::TsmcN5))?;
    Ok((latency, perf::energy(entry.power_w, latency)))
}

/// Cycle-accurate run of a 16x16 8-bit GEMM with every operand at maximum magnitude.
pub fn simulated_wc_latency(polarity: Polarity, profile: &PowerProfile) -> Result<f64> {
    let cfg = GemmConfig::square(16, 8, polarity);
    let extreme = match polarity {
        Polarity::Unipolar => polarity.max_value(8),
        Polarity::Bipolar => polarity.min_value(8),
    };
    let a = Matrix::from_vec(16, 16, vec![extreme; 256])?;
    let b = Matrix::from_vec(16, 16, vec![extreme; 256])?;
    let out = simulate_gemm(&cfg, &MatrixOperands::new(a, b))?;
    Ok(out.report.seconds(profile.frequency_hz))
}

/// Compare every reproducible published figure against the models.
pub fn run(profile: &PowerProfile, model: &LatencyModel) -> Result<Vec<ReproCheck>> {
    let mut checks = Vec::new();

    for &(size, bits, lat_us, _) in &N5_WC_TABLE {
        let (latency, _) = n5_energy(size, bits, model, profile)?;
        checks.push(ReproCheck::new(
            "wc_latency",
            format!("{size}x{size} {bits}-bit"),
            "us",
            lat_us,
            latency * 1e6,
            Tolerance::Absolute(0.01),
        ));
    }
    for &(size, bits, _, e_nj) in &N5_WC_TABLE {
        let (_, energy) = n5_energy(size, bits, model, profile)?;
        checks.push(ReproCheck::new(
            "wc_energy",
            format!("{size}x{size} {bits}-bit"),
            "nJ",
            e_nj,
            energy * 1e9,
            Tolerance::Relative(0.005),
        ));
    }

    for (polarity, published) in [
        (Polarity::Bipolar, WC_45NM_BIPOLAR_US),
        (Polarity::Unipolar, WC_45NM_UNIPOLAR_US),
    ] {
        checks.push(ReproCheck::new(
            "simulated_wc",
            format!("16x16 8-bit {polarity}"),
            "us",
            published,
            simulated_wc_latency(polarity, profile)? * 1e6,
            Tolerance::Relative(0.05),
        ));
    }

    let sizes = [16usize, 32, 64, 128];
    let mut lat_ratios = Vec::new();
    let mut energy_ratios = Vec::new();
    for &size in &sizes {
        let (l8, e8) = n5_energy(size, 8, model, profile)?;
        let (l4, e4) = n5_energy(size, 4, model, profile)?;
        lat_ratios.push(l8 / l4);
        energy_ratios.push(e8 / e4);
    }
    checks.push(ReproCheck::new(
        "precision_scaling",
        "8-bit/4-bit latency at 16x16",
        "x",
        LATENCY_RATIO_8_TO_4,
        lat_ratios[0],
        Tolerance::Relative(0.01),
    ));
    checks.push(ReproCheck::new(
        "precision_scaling",
        "8-bit/4-bit energy mean over sizes",
        "x",
        ENERGY_RATIO_8_TO_4,
        energy_ratios.iter().sum::<f64>() / energy_ratios.len() as f64,
        Tolerance::Relative(0.05),
    ));

    let cfg = GemmConfig::square(16, 8, Polarity::Unipolar);
    let hist = synthetic_maxval_histogram();
    let report = profile_simulation(
        &cfg,
        &WorkloadTrace::Binned(hist),
        model,
        profile,
        None,
    )?;
    let sparsity = [
        ("expected max", "", AVG_EXPECTED_MAX, report.expected_max, Tolerance::Absolute(1.0)),
        ("average latency", "us", AVG_LATENCY_US, report.avg_latency_s * 1e6, Tolerance::Relative(0.05)),
        ("average energy", "uJ", AVG_ENERGY_UJ, report.avg_energy_j * 1e6, Tolerance::Relative(0.05)),
        ("average EDP", "uJ*us", AVG_EDP_UJ_US, report.edp_js * 1e12, Tolerance::Relative(0.10)),
        ("WC/average latency", "x", WC_TO_AVG_LATENCY_RATIO, report.wc_ratio, Tolerance::Relative(0.05)),
        ("EDP improvement", "x", EDP_IMPROVEMENT, report.edp_improvement, Tolerance::Relative(0.05)),
    ];
    for (name, unit, published, modeled, tol) in sparsity {
        checks.push(ReproCheck::new("sparsity", name, unit, published, modeled, tol));
    }

    for &(workload, p_mw, l_us, e_uj) in &WORKLOAD_ENERGY {
        checks.push(ReproCheck::new(
            "workload_energy",
            workload,
            "uJ",
            e_uj,
            perf::energy(p_mw * 1e-3, l_us * 1e-6) * 1e6,
            Tolerance::Relative(0.02),
        ));
    }

    Ok(checks)
}
