//! `tubgemm` command-line driver.
//!
//! Exit codes: 0 success, 1 I/O, 2 usage, 3 parse, 4 domain/range,
//! 5 overflow, 6 mismatch.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use tubgemm::error::{Error, Result};
use tubgemm::gemm::{
    first_difference, reference_gemm, simulate_gemm, CycleReport, GemmConfig, Matrix,
    MatrixOperands, DEFAULT_EPILOGUE_CYCLES, DEFAULT_STEP_OVERHEAD_CYCLES,
};
use tubgemm::gen::{random_matrix, random_operands, random_trace, seeded_rng};
use tubgemm::io::{read_matrix_file, write_matrix_csv, write_matrix_file, OperandMeta};
use tubgemm::par::Execution;
use tubgemm::perf::{
    self, parse_rational, LatencyModel, PowerProfile, ProfileQuery, Technology,
    PROFILE_ENV,
};
use tubgemm::repro;
use tubgemm::sparsity::{cumulative, expected_max, profile_simulation, MaxValueHistogram, WorkloadTrace};
use tubgemm::sweep::{exactness_sweep, SweepOptions};
use tubgemm::unary::{Polarity, DEFAULT_UNARY_BASE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "tubgemm", version, about = "Temporal-unary/binary GEMM simulator and performance model")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the cycle-accurate simulator on matrix files.
    Gemm(GemmArgs),
    /// Check the simulator against the reference matmul.
    Compare(CompareArgs),
    /// Analytical latency/energy/EDP for a design point.
    Estimate(EstimateArgs),
    /// Sparsity profile of a workload trace or histogram.
    Profile(ProfileArgs),
    /// Generate seeded matrices, operand sets or traces.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Compare every reproducible published figure against the models.
    Repro(ReproArgs),
}

#[derive(Debug, Clone, Args)]
struct OperandArgs {
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long)]
    polarity: Option<Polarity>,
    #[arg(long = "unary-base")]
    unary_base: Option<u32>,
    /// JSON sidecar with bitwidth, polarity and unary_base.
    #[arg(long)]
    meta: Option<PathBuf>,
}

impl OperandArgs {
    fn resolve(&self) -> Result<OperandMeta> {
        let side = self.meta.as_deref().map(OperandMeta::from_path).transpose()?;
        Ok(OperandMeta {
            bitwidth: self.bits.or(side.map(|m| m.bitwidth)).unwrap_or(8),
            polarity: self
                .polarity
                .or(side.map(|m| m.polarity))
                .unwrap_or(Polarity::Bipolar),
            unary_base: self
                .unary_base
                .or(side.map(|m| m.unary_base))
                .unwrap_or(DEFAULT_UNARY_BASE),
        })
    }
}

#[derive(Debug, Clone, Args)]
struct MatrixInputs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Initial PE contents; zero when omitted.
    #[arg(long)]
    c: Option<PathBuf>,
}

impl MatrixInputs {
    fn load(&self) -> Result<MatrixOperands> {
        let a = read_matrix_file(&self.a)?;
        let b = read_matrix_file(&self.b)?;
        Ok(match &self.c {
            Some(c) => MatrixOperands::with_c(a, b, read_matrix_file(c)?),
            None => MatrixOperands::new(a, b),
        })
    }
}

#[derive(Debug, Clone, Args)]
struct SimArgs {
    /// Handshake cycles per step.
    #[arg(long, default_value_t = DEFAULT_STEP_OVERHEAD_CYCLES)]
    overhead: u64,
    /// Cycles to raise output_valid after the last step.
    #[arg(long, default_value_t = DEFAULT_EPILOGUE_CYCLES)]
    epilogue: u64,
    #[arg(long = "acc-width")]
    acc_width: Option<u32>,
}

fn build_config(ops: &MatrixOperands, meta: OperandMeta, sim: &SimArgs) -> Result<GemmConfig> {
    let mut cfg = ops
        .config(meta.bitwidth, meta.polarity)?
        .with_unary_base(meta.unary_base)
        .with_overheads(sim.overhead, sim.epilogue);
    if let Some(w) = sim.acc_width {
        cfg = cfg.with_acc_width(w);
    }
    Ok(cfg)
}

#[derive(Debug, Args)]
struct GemmArgs {
    #[command(flatten)]
    inputs: MatrixInputs,
    #[command(flatten)]
    operands: OperandArgs,
    #[command(flatten)]
    sim: SimArgs,
    /// Write Y as CSV here.
    #[arg(long = "y-out")]
    y_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    operands: OperandArgs,
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, requires = "b", conflicts_with = "sweep")]
    a: Option<PathBuf>,
    #[arg(long, requires = "a")]
    b: Option<PathBuf>,
    #[arg(long)]
    c: Option<PathBuf>,
    /// Run this many seeded random instances instead of file inputs.
    #[arg(long)]
    sweep: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "min-size", default_value_t = 2)]
    min_size: usize,
    #[arg(long = "max-size", default_value_t = 64)]
    max_size: usize,
    #[arg(long = "zero-fraction")]
    zero_fraction: Option<f64>,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Debug, Clone, Args)]
struct ModelArgs {
    /// Analytical per-step overhead in cycles, e.g. `9/4` or `2.25`.
    #[arg(long, default_value = "9/4")]
    overhead: String,
    /// Power profile JSON; defaults to $TUBGEMM_PROFILE or the built-in dataset.
    #[arg(long, env = PROFILE_ENV)]
    profile: Option<PathBuf>,
    #[arg(long)]
    technology: Option<Technology>,
    #[arg(long, default_value = "random")]
    workload: String,
    /// Use this power instead of a profile lookup.
    #[arg(long = "power-mw")]
    power_mw: Option<f64>,
}

impl ModelArgs {
    fn model(&self) -> Result<LatencyModel> {
        LatencyModel::with_overhead(parse_rational(&self.overhead)?)
    }

    fn profile(&self) -> Result<PowerProfile> {
        PowerProfile::load(self.profile.as_deref())
    }

    fn power(&self, profile: &PowerProfile, cfg: &GemmConfig) -> Result<(f64, Value)> {
        if let Some(mw) = self.power_mw {
            return Ok((mw * 1e-3, json!({"source": "user"})));
        }
        let mut q = ProfileQuery::for_config(cfg).workload(self.workload.clone());
        if let Some(t) = self.technology {
            q = q.technology(t);
        }
        let e = profile.lookup(&q)?;
        Ok((
            e.power_w,
            json!({"source": e.source, "technology": e.technology, "area_um2": e.area_um2}),
        ))
    }
}

#[derive(Debug, Clone, Args)]
struct ShapeArgs {
    #[arg(long, default_value_t = 16)]
    m: usize,
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 16)]
    p: usize,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[command(flatten)]
    operands: OperandArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Binned `value,count` histogram for expected-case latency.
    #[arg(long)]
    histogram: Option<PathBuf>,
    /// Emit the full N5 worst-case sweep instead of one point.
    #[arg(long)]
    table: bool,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[command(flatten)]
    operands: OperandArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Per-op `op_id,max_abs` CSV.
    #[arg(long, conflicts_with = "histogram", required_unless_present = "histogram")]
    trace: Option<PathBuf>,
    /// Binned `value,count` CSV.
    #[arg(long)]
    histogram: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// One random matrix.
    Matrix {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[command(flatten)]
        gen: GenArgs,
    },
    /// A, B, C and a sidecar in a directory.
    Operands {
        #[command(flatten)]
        shape: ShapeArgs,
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        dir: PathBuf,
    },
    /// A per-op maximum trace.
    Trace {
        #[arg(long)]
        ops: usize,
        #[command(flatten)]
        gen: GenArgs,
    },
}

#[derive(Debug, Clone, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    bits: u32,
    #[arg(long, default_value = "bipolar")]
    polarity: Polarity,
    #[arg(long = "unary-base", default_value_t = DEFAULT_UNARY_BASE)]
    unary_base: u32,
    /// Probability of an exact zero; uniform over the range when omitted.
    #[arg(long = "zero-fraction")]
    zero_fraction: Option<f64>,
}

#[derive(Debug, Args)]
struct ReproArgs {
    #[command(flatten)]
    model: ModelArgs,
}

const CSV_SCHEMA_PREFIX: &str = "# schema: ";

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn csv_header(schema: &str) -> String {
    format!("{CSV_SCHEMA_PREFIX}{schema}\n")
}

fn kv_csv(schema: &str, pairs: &[(&str, String)]) -> String {
    let mut s = csv_header(schema);
    s.push_str("key,value\n");
    for (k, v) in pairs {
        let _ = writeln!(s, "{k},{v}");
    }
    s
}

fn report_json(report: &CycleReport) -> Value {
    serde_json::to_value(report).expect("report serializes")
}

fn report_csv(schema: &str, report: &CycleReport) -> String {
    let mut s = csv_header(schema);
    let _ = writeln!(
        s,
        "# total_cycles={} output_valid_cycle={} zero_steps={} step_overhead_cycles={} epilogue_cycles={}",
        report.total_cycles,
        report.output_valid_cycle,
        report.zero_steps,
        report.step_overhead_cycles,
        report.epilogue_cycles
    );
    s.push_str("step,compute_cycles,done_cycle\n");
    for (k, (c, d)) in report.per_step_cycles.iter().zip(&report.done_cycles).enumerate() {
        let _ = writeln!(s, "{k},{c},{d}");
    }
    s
}

fn cmd_gemm(cli: &Cli, args: &GemmArgs) -> Result<()> {
    let ops = args.inputs.load()?;
    let cfg = build_config(&ops, args.operands.resolve()?, &args.sim)?;
    let out = simulate_gemm(&cfg, &ops)?;
    if let Some(p) = &args.y_out {
        write_matrix_file(p, &out.y)?;
    }
    let text = match cli.format {
        Format::Json => to_json(&json!({
            "schema": "tubgemm.gemm.v1",
            "config": cfg,
            "y": out.y,
            "report": report_json(&out.report),
        })),
        Format::Csv => report_csv("tubgemm.gemm.v1", &out.report),
    };
    emit(cli.out.as_deref(), &text)
}

fn cmd_compare(cli: &Cli, args: &CompareArgs) -> Result<()> {
    if let (Some(a), Some(b)) = (&args.a, &args.b) {
        let inputs = MatrixInputs {
            a: a.clone(),
            b: b.clone(),
            c: args.c.clone(),
        };
        let ops = inputs.load()?;
        let cfg = build_config(&ops, args.operands.resolve()?, &args.sim)?;
        let mut sim = simulate_gemm(&cfg, &ops)?.y;
        if args.inject_fault {
            let v = sim.get(0, 0);
            sim.set(0, 0, v + 1);
        }
        let reference = reference_gemm(&ops)?;
        let diff = first_difference(&sim, &reference);
        let text = match cli.format {
            Format::Json => to_json(&json!({
                "schema": "tubgemm.compare.v1",
                "instances": 1,
                "passed": usize::from(diff.is_none()),
                "failed": usize::from(diff.is_some()),
                "first_difference": diff.map(|(i, j, got, want)| json!({"row": i, "col": j, "simulated": got, "reference": want})),
            })),
            Format::Csv => kv_csv(
                "tubgemm.compare.v1",
                &[
                    ("instances", "1".into()),
                    ("passed", usize::from(diff.is_none()).to_string()),
                ],
            ),
        };
        emit(cli.out.as_deref(), &text)?;
        return match diff {
            None => Ok(()),
            Some((i, j, got, want)) => Err(Error::Mismatch(format!(
                "Y[{i}][{j}]: simulated {got}, reference {want}"
            ))),
        };
    }

    let count = args.sweep.ok_or_else(|| {
        Error::Parameter("compare needs --a/--b files or --sweep <count>".into())
    })?;
    if args.min_size == 0 || args.min_size > args.max_size {
        return Err(Error::Parameter(format!(
            "size range {}..={} is empty",
            args.min_size, args.max_size
        )));
    }
    let opts = SweepOptions {
        seed: args.seed,
        instances: count,
        min_size: args.min_size,
        max_size: args.max_size,
        zero_fraction: args.zero_fraction,
        inject_fault: args.inject_fault,
    };
    let summary = exactness_sweep(&opts, Execution::default());
    let text = match cli.format {
        Format::Json => {
            let mut v = serde_json::to_value(&summary).expect("summary serializes");
            v["schema"] = json!("tubgemm.compare.v1");
            to_json(&v)
        }
        Format::Csv => {
            let mut s = csv_header("tubgemm.compare.v1");
            s.push_str("instance,m,n,p,bitwidth,polarity,unary_base,detail\n");
            for f in &summary.failures {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},\"{}\"",
                    f.instance, f.shape.0, f.shape.1, f.shape.2, f.bitwidth, f.polarity, f.unary_base, f.detail
                );
            }
            s
        }
    };
    emit(cli.out.as_deref(), &text)?;
    match summary.failures.first() {
        None => Ok(()),
        Some(f) => Err(Error::Mismatch(format!(
            "{} of {} instances differ; first: instance {}: {}",
            summary.failed, summary.instances, f.instance, f.detail
        ))),
    }
}

fn estimate_point(
    cfg: &GemmConfig,
    model_args: &ModelArgs,
    model: &LatencyModel,
    profile: &PowerProfile,
    hist: Option<&MaxValueHistogram>,
) -> Result<Value> {
    let (power, power_info) = model_args.power(profile, cfg)?;
    let wc_cycles = perf::analytical_wc_cycles(cfg, model);
    let wc_latency = perf::analytical_wc_latency(cfg, model, profile);
    let wc_energy = perf::energy(power, wc_latency);
    let mut v = json!({
        "config": cfg,
        "frequency_hz": profile.frequency_hz,
        "step_overhead": model.step_overhead.to_string(),
        "power_w": power,
        "power_entry": power_info,
        "wc_cycles": perf::to_f64(wc_cycles),
        "wc_latency_s": wc_latency,
        "wc_energy_j": wc_energy,
        "wc_edp_js": perf::edp(wc_energy, wc_latency),
    });
    if let Some(h) = hist {
        let lat = perf::expected_latency(cfg, h, model, profile)?;
        let e = perf::energy(power, lat);
        v["expected_max"] = json!(perf::to_f64(expected_max(h)?));
        v["expected_latency_s"] = json!(lat);
        v["expected_latency_full_s"] = json!(perf::expected_latency_full(cfg, h, model, profile)?);
        v["expected_energy_j"] = json!(e);
        v["expected_edp_js"] = json!(perf::edp(e, lat));
    }
    Ok(v)
}

fn flat_pairs(v: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    if let Value::Object(map) = v {
        for (k, x) in map {
            match x {
                Value::Object(_) => {
                    for (k2, x2) in flat_pairs(x) {
                        out.push((format!("{k}.{k2}"), x2));
                    }
                }
                Value::String(s) => out.push((k.clone(), s.clone())),
                other => out.push((k.clone(), other.to_string())),
            }
        }
    }
    out
}

fn cmd_estimate(cli: &Cli, args: &EstimateArgs) -> Result<()> {
    let model = args.model.model()?;
    let profile = args.model.profile()?;
    let meta = args.operands.resolve()?;

    if args.table {
        let mut rows = Vec::new();
        for &(size, bits, _, _) in &repro::N5_WC_TABLE {
            let cfg = GemmConfig::square(size, bits, Polarity::Bipolar).with_unary_base(meta.unary_base);
            let mut margs = args.model.clone();
            margs.technology = Some(margs.technology.unwrap_or(Technology::TsmcN5));
            rows.push(estimate_point(&cfg, &margs, &model, &profile, None)?);
        }
        let text = match cli.format {
            Format::Json => to_json(&json!({"schema": "tubgemm.estimate_table.v1", "rows": rows})),
            Format::Csv => {
                let mut s = csv_header("tubgemm.estimate_table.v1");
                s.push_str("array_size,bitwidth,power_w,wc_latency_us,wc_energy_nj,wc_edp_nj_us\n");
                for r in &rows {
                    let _ = writeln!(
                        s,
                        "{},{},{},{:.4},{:.4},{:.4}",
                        r["config"]["m"],
                        r["config"]["bitwidth"],
                        r["power_w"],
                        r["wc_latency_s"].as_f64().unwrap_or(0.0) * 1e6,
                        r["wc_energy_j"].as_f64().unwrap_or(0.0) * 1e9,
                        r["wc_edp_js"].as_f64().unwrap_or(0.0) * 1e15,
                    );
                }
                s
            }
        };
        return emit(cli.out.as_deref(), &text);
    }

    let cfg = GemmConfig::new(args.shape.m, args.shape.n, args.shape.p, meta.bitwidth, meta.polarity)
        .with_unary_base(meta.unary_base);
    cfg.validate()?;
    let hist = args
        .histogram
        .as_ref()
        .map(|p| -> Result<_> {
            let t = WorkloadTrace::read_binned(std::fs::File::open(p)?, cfg.bitwidth, cfg.polarity)?;
            t.to_histogram(cfg.bitwidth, cfg.polarity)
        })
        .transpose()?;
    let mut v = estimate_point(&cfg, &args.model, &model, &profile, hist.as_ref())?;
    v["schema"] = json!("tubgemm.estimate.v1");
    let text = match cli.format {
        Format::Json => to_json(&v),
        Format::Csv => {
            let pairs = flat_pairs(&v);
            let borrowed: Vec<(&str, String)> = pairs.iter().map(|(k, x)| (k.as_str(), x.clone())).collect();
            kv_csv("tubgemm.estimate.v1", &borrowed)
        }
    };
    emit(cli.out.as_deref(), &text)
}

fn cmd_profile(cli: &Cli, args: &ProfileArgs) -> Result<()> {
    let meta = args.operands.resolve()?;
    let cfg = GemmConfig::new(args.shape.m, args.shape.n, args.shape.p, meta.bitwidth, meta.polarity)
        .with_unary_base(meta.unary_base);
    cfg.validate()?;
    let trace = match (&args.trace, &args.histogram) {
        (Some(t), _) => WorkloadTrace::read_per_op(std::fs::File::open(t)?)?,
        (None, Some(h)) => WorkloadTrace::read_binned(std::fs::File::open(h)?, cfg.bitwidth, cfg.polarity)?,
        (None, None) => unreachable!("clap requires one input"),
    };
    let hist = trace.to_histogram(cfg.bitwidth, cfg.polarity)?;
    let cdf = cumulative(&hist)?;
    let model = args.model.model()?;
    let profile = args.model.profile()?;
    let power = args.model.power(&profile, &cfg).map(|(p, _)| p)?;
    let report = profile_simulation(&cfg, &WorkloadTrace::Binned(hist.clone()), &model, &profile, Some(power))?;

    let text = match cli.format {
        Format::Json => to_json(&json!({
            "schema": "tubgemm.profile.v1",
            "config": cfg,
            "step_overhead": model.step_overhead.to_string(),
            "total_ops": hist.total_ops,
            "bins": hist.bins().map(|(v, c)| json!([v, c])).collect::<Vec<_>>(),
            "cdf_percent": cdf.iter().map(|&(_, p)| p).collect::<Vec<_>>(),
            "report": report,
        })),
        Format::Csv => {
            let mut s = csv_header("tubgemm.profile.v1");
            let _ = writeln!(
                s,
                "# expected_max={} avg_latency_s={} avg_energy_j={} edp_js={} wc_ratio={}",
                report.expected_max_exact, report.avg_latency_s, report.avg_energy_j, report.edp_js, report.wc_ratio
            );
            s.push_str("value,count,percent,cumulative_percent\n");
            for (v, cum) in cdf {
                let c = hist.counts[v as usize];
                let _ = writeln!(s, "{v},{c},{},{}", 100.0 * hist.fraction(v), cum);
            }
            s
        }
    };
    emit(cli.out.as_deref(), &text)
}

fn matrix_text(format: Format, schema: &str, m: &Matrix) -> Result<String> {
    Ok(match format {
        Format::Json => to_json(&json!({"schema": schema, "rows": m.rows(), "cols": m.cols(), "data": m})),
        Format::Csv => {
            let mut buf = Vec::new();
            write_matrix_csv(&mut buf, m)?;
            String::from_utf8(buf).expect("csv output is utf-8")
        }
    })
}

fn cmd_gen(cli: &Cli, cmd: &GenCommand) -> Result<()> {
    match cmd {
        GenCommand::Matrix { rows, cols, gen } => {
            let m = random_matrix(&mut seeded_rng(gen.seed, 0), *rows, *cols, gen.bits, gen.polarity, gen.zero_fraction)?;
            emit(cli.out.as_deref(), &matrix_text(cli.format, "tubgemm.matrix.v1", &m)?)
        }
        GenCommand::Operands { shape, gen, dir } => {
            let cfg = GemmConfig::new(shape.m, shape.n, shape.p, gen.bits, gen.polarity)
                .with_unary_base(gen.unary_base);
            cfg.validate()?;
            let ops = random_operands(&mut seeded_rng(gen.seed, 0), &cfg, gen.zero_fraction)?;
            std::fs::create_dir_all(dir)?;
            write_matrix_file(dir.join("a.csv"), &ops.a)?;
            write_matrix_file(dir.join("b.csv"), &ops.b)?;
            write_matrix_file(dir.join("c.csv"), &ops.c)?;
            let meta = OperandMeta {
                bitwidth: gen.bits,
                polarity: gen.polarity,
                unary_base: gen.unary_base,
            };
            std::fs::write(dir.join("meta.json"), to_json(&json!(meta)))?;
            Ok(())
        }
        GenCommand::Trace { ops, gen } => {
            let records = random_trace(&mut seeded_rng(gen.seed, 0), *ops, gen.bits, gen.polarity, gen.zero_fraction)?;
            let text = match cli.format {
                Format::Json => to_json(&json!({"schema": "tubgemm.trace.v1", "records": records})),
                Format::Csv => {
                    let mut s = String::from("op_id,max_abs\n");
                    for r in &records {
                        let _ = writeln!(s, "{},{}", r.op_id, r.max_abs);
                    }
                    s
                }
            };
            emit(cli.out.as_deref(), &text)
        }
    }
}

fn cmd_repro(cli: &Cli, args: &ReproArgs) -> Result<()> {
    let profile = args.model.profile()?;
    let model = args.model.model()?;
    let checks = repro::run(&profile, &model)?;
    let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
    let text = match cli.format {
        Format::Json => to_json(&json!({
            "schema": "tubgemm.repro.v1",
            "step_overhead": model.step_overhead.to_string(),
            "passed": checks.len() - failed.len(),
            "failed": failed.len(),
            "checks": checks,
        })),
        Format::Csv => {
            let mut s = csv_header("tubgemm.repro.v1");
            s.push_str("group,name,unit,published,modeled,tolerance_kind,tolerance,pass\n");
            for c in &checks {
                let (kind, tol) = match c.tolerance {
                    repro::Tolerance::Absolute(t) => ("absolute", t),
                    repro::Tolerance::Relative(t) => ("relative", t),
                };
                let _ = writeln!(
                    s,
                    "{},{},{},{},{:.6},{kind},{tol},{}",
                    c.group, c.name, c.unit, c.published, c.modeled, c.pass
                );
            }
            s
        }
    };
    emit(cli.out.as_deref(), &text)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Mismatch(format!(
            "{} of {} checks outside tolerance: {}",
            failed.len(),
            checks.len(),
            failed
                .iter()
                .map(|c| format!("{} {}", c.group, c.name))
                .collect::<Vec<_>>()
                .join("; ")
        )))
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gemm(a) => cmd_gemm(cli, a),
        Command::Compare(a) => cmd_compare(cli, a),
        Command::Estimate(a) => cmd_estimate(cli, a),
        Command::Profile(a) => cmd_profile(cli, a),
        Command::Gen(g) => cmd_gen(cli, g),
        Command::Repro(a) => cmd_repro(cli, a),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("tubgemm: {e}");
        std::process::exit(e.exit_code());
    }
}
