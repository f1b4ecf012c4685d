use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use pulsescope::evaluation::{align_all, condition_ppg, evaluate_all, load_manifest, ChunkRecord};
use pulsescope::formats::{read_ground_truth, read_trace, write_csv, write_ground_truth, write_ibis, write_peaks, write_trace};
use pulsescope::hrv::{analyze, HrvMetric};
use pulsescope::report::{aggregate, emit_report, write_rows};
use pulsescope::signal::z_normalize;
use pulsescope::synth::{synth_chunk, DatasetSpec};
use pulsescope::vitals::estimate_hr;
use pulsescope::{Config, Metric, MethodKind, RppgMethod, TimeSeries};

/// Exit code for partial or empty results.
const EXIT_PARTIAL: u8 = 1;
/// Exit code for usage, parse and IO errors.
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "pulsescope", version, about = "Remote PPG vitals estimation and benchmarking")]
struct Cli {
    /// Config file (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config value, e.g. `--set hrv.min_confidence=0.4`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate vitals from one RGB trace.
    Estimate {
        trace: PathBuf,
        #[arg(long, default_value = "pos")]
        method: MethodKind,
        /// Output directory for vitals.json and waveform.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Benchmark a method over a chunk manifest.
    Evaluate {
        manifest: PathBuf,
        #[arg(long, default_value = "pos")]
        method: MethodKind,
        #[arg(long, default_value = "report")]
        out_dir: PathBuf,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Generate a synthetic dataset with ground truth and a manifest.
    Synth(SynthArgs),
    /// Write estimated and reference waveforms side by side.
    Compare {
        trace: PathBuf,
        gt: PathBuf,
        /// Comma-separated methods; empty for reference only.
        #[arg(long, value_delimiter = ',', default_value = "pos")]
        methods: Vec<String>,
        #[arg(long, default_value = "waveform_comparison.csv")]
        out: PathBuf,
    },
    /// Configuration helpers.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
}

#[derive(Subcommand)]
enum ConfigAction {
    /// Print the effective configuration as TOML.
    Dump,
}

#[derive(Args)]
struct SynthArgs {
    /// Dataset spec file (TOML, or JSON by extension).
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value = "synth")]
    out_dir: PathBuf,
    #[arg(long)]
    chunks: Option<usize>,
    #[arg(long)]
    participants: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    noise_sigma: Option<f64>,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: EXIT_USAGE, error }
    }
}

impl From<pulsescope::Error> for Failure {
    fn from(error: pulsescope::Error) -> Self {
        Failure { code: EXIT_USAGE, error: error.into() }
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::from_path(p)?,
        None => Config::default(),
    };
    for o in &cli.overrides {
        cfg.set(o)?;
    }
    Ok(cfg)
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("{}: cannot create directory", dir.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).with_context(|| format!("{}: cannot write", path.display()))
}

fn hrv_key(m: HrvMetric) -> &'static str {
    match m {
        HrvMetric::Sdnn => "sdnn_ms",
        HrvMetric::Rmssd => "rmssd_ms",
        HrvMetric::LfHf => "lf_hf",
    }
}

fn estimate(trace: &Path, kind: MethodKind, out: &Path, cfg: &Config) -> Result<u8, Failure> {
    let trace = read_trace(trace)?;
    let pulse = RppgMethod::from_config(kind, cfg).extract(&trace, cfg)?;
    let mut reasons = BTreeMap::new();
    let hr = match estimate_hr(&pulse.ppg, &cfg.vitals) {
        Ok(r) => Some(r.bpm),
        Err(e) => {
            reasons.insert("hr_bpm", e.to_string());
            None
        }
    };
    reasons.insert("rr_bpm", "method produces no RESP".to_string());
    let analysis = analyze(&pulse.ppg, cfg, false);
    let hrv = analysis.result;
    if analysis.mean_ibi_hr_bpm.is_none() {
        let why = hrv.gate_reasons.get(&HrvMetric::Sdnn).cloned().unwrap_or_else(|| "no beats".into());
        reasons.insert("hr_ibi_bpm", why);
    }
    for (m, why) in &hrv.gate_reasons {
        reasons.insert(hrv_key(*m), why.clone());
    }
    let vitals = json!({
        "method": kind.name(),
        "hr_bpm": hr,
        "rr_bpm": Value::Null,
        "sdnn_ms": hrv.sdnn_ms,
        "rmssd_ms": hrv.rmssd_ms,
        "lf_hf": hrv.lf_hf,
        "hr_ibi_bpm": analysis.mean_ibi_hr_bpm,
        "gate_reasons": reasons,
        "low_quality": pulse.low_quality,
        "quality_snr_db": pulse.quality_snr_db,
    });
    create_dir(out)?;
    write_json(&out.join("vitals.json"), &vitals)?;
    let ppg = &pulse.ppg;
    write_csv(&out.join("waveform.csv"), &["time", "ppg"], ppg.len(), |i| {
        vec![format!("{}", ppg.time_at(i)), format!("{}", ppg.values()[i])]
    })?;
    Ok(if hr.is_some() { 0 } else { EXIT_PARTIAL })
}

fn evaluate(manifest: &Path, kind: MethodKind, out_dir: &Path, jobs: usize, cfg: &Config) -> Result<u8, Failure> {
    let records = load_manifest(manifest, cfg)?;
    let method = RppgMethod::from_config(kind, cfg);
    let rows = evaluate_all(&records, &method, cfg, jobs)?;
    let failures: Vec<Value> = rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| json!({"chunk_id": r.chunk_id, "error": e})))
        .collect();
    for f in &failures {
        log::error!("chunk {}: {}", f["chunk_id"], f["error"]);
    }
    let ok: Vec<_> = rows.iter().filter(|r| r.error.is_none()).cloned().collect();
    create_dir(out_dir)?;
    write_rows(&out_dir.join("rows.csv"), kind.name(), &rows, cfg.evaluation.lfhf_log_scale)?;
    let mut gated: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &ok {
        for m in r.gate_reasons.keys() {
            *gated.entry(m.key()).or_default() += 1;
        }
    }
    let mut summary = json!({
        "method": kind.name(),
        "chunks": rows.len(),
        "evaluated": ok.len(),
        "failed": failures.len(),
        "failures": failures,
        "absent_metrics": gated,
        "jobs": jobs,
    });
    if ok.is_empty() {
        write_json(&out_dir.join("summary.json"), &summary)?;
        return Err(Failure { code: EXIT_PARTIAL, error: anyhow::anyhow!("no chunk could be evaluated") });
    }
    let report = aggregate(&ok, kind.name())?;
    emit_report(&report, out_dir)?;
    summary["participants"] = json!(report.per_individual.len());
    summary["overall"] = json!(Metric::ALL
        .iter()
        .map(|m| (m.key(), report.overall.get(*m)))
        .collect::<BTreeMap<_, _>>());
    summary["participants_per_metric"] = json!(report
        .overall
        .participants
        .iter()
        .map(|(m, n)| (m.key(), *n))
        .collect::<BTreeMap<_, _>>());
    write_json(&out_dir.join("summary.json"), &summary)?;
    Ok(0)
}

fn synth(args: &SynthArgs) -> Result<u8, Failure> {
    let mut spec = match &args.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("{}: cannot read", p.display()))?;
            if p.extension().is_some_and(|e| e == "json") {
                serde_json::from_str(&text).with_context(|| format!("{}: invalid dataset spec", p.display()))?
            } else {
                toml::from_str(&text).with_context(|| format!("{}: invalid dataset spec", p.display()))?
            }
        }
        None => DatasetSpec::default(),
    };
    if let Some(n) = args.chunks {
        spec.chunks = n;
    }
    if let Some(n) = args.participants {
        spec.participants = n;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(s) = args.noise_sigma {
        spec.noise_sigma = s;
    }
    // everything is generated and checked before the first file is written
    let plan = spec.plan()?;
    let fs = pulsescope::signal::CANONICAL_FS;
    let chunks = plan
        .iter()
        .map(|p| synth_chunk(&p.spec, fs))
        .collect::<pulsescope::Result<Vec<_>>>()?;

    create_dir(&args.out_dir)?;
    let mut manifest = Vec::with_capacity(plan.len());
    for (p, c) in plan.iter().zip(&chunks) {
        let dir = args.out_dir.join(&p.chunk_id);
        create_dir(&dir)?;
        write_trace(&dir.join("trace.csv"), &c.trace)?;
        write_ground_truth(&dir.join("gt.csv"), &c.ppg, Some(&c.resp))?;
        write_peaks(&dir.join("peaks.csv"), &c.peaks)?;
        write_ibis(&dir.join("ibis.csv"), &c.ibis)?;
        manifest.push(ChunkRecord {
            chunk_id: p.chunk_id.clone(),
            participant_id: p.participant_id.clone(),
            dataset: spec.dataset.clone(),
            trace_path: Path::new(&p.chunk_id).join("trace.csv"),
            gt_path: Path::new(&p.chunk_id).join("gt.csv"),
            duration_s: c.ppg.duration(),
            skin_type: Some(p.skin_type),
            motion_score: None,
            gt_vitals: None,
        });
    }
    write_json(&args.out_dir.join("manifest.json"), &manifest)?;
    std::fs::write(args.out_dir.join("dataset.toml"), toml::to_string(&spec).context("serializing dataset spec")?)
        .with_context(|| format!("{}: cannot write", args.out_dir.display()))?;
    Ok(0)
}

fn compare(trace: &Path, gt: &Path, methods: &[String], out: &Path, cfg: &Config) -> Result<u8, Failure> {
    let kinds = methods
        .iter()
        .filter(|m| !m.trim().is_empty())
        .map(|m| m.trim().parse::<MethodKind>())
        .collect::<pulsescope::Result<Vec<_>>>()?;
    let gt = read_ground_truth(gt)?;
    let trace = read_trace(trace)?;
    let gt_ppg = condition_ppg(&gt.ppg, cfg)?.context("reference PPG is flat")?;
    let mut names = vec!["time".to_string(), "gt_ppg".to_string()];
    let mut series: Vec<TimeSeries> = vec![gt_ppg];
    if let Some(resp) = &gt.resp {
        let z = z_normalize(resp.values(), cfg.methods.flat_std).context("reference RESP is flat")?;
        series.push(resp.with_values(z)?);
        names.push("gt_resp".into());
    }
    for k in kinds {
        series.push(RppgMethod::from_config(k, cfg).extract(&trace, cfg)?.ppg);
        names.push(format!("{}_ppg", k.name()));
    }
    let aligned = align_all(&series)?;
    let columns: Vec<Vec<f64>> = aligned
        .iter()
        .map(|s| z_normalize(s.values(), 0.0).unwrap_or_else(|| vec![0.0; s.len()]))
        .collect();
    let base = &aligned[0];
    let header: Vec<&str> = names.iter().map(String::as_str).collect();
    write_csv(out, &header, base.len(), |i| {
        std::iter::once(format!("{}", base.time_at(i)))
            .chain(columns.iter().map(|c| format!("{}", c[i])))
            .collect()
    })?;
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Estimate { trace, method, out } => estimate(trace, *method, out, &cfg),
        Command::Evaluate { manifest, method, out_dir, jobs } => {
            if *jobs == 0 {
                return Err(anyhow::anyhow!("--jobs must be at least 1").into());
            }
            evaluate(manifest, *method, out_dir, *jobs, &cfg)
        }
        Command::Synth(args) => synth(args),
        Command::Compare { trace, gt, methods, out } => compare(trace, gt, methods, out, &cfg),
        Command::Config { action: ConfigAction::Dump } => {
            print!("{}", cfg.to_toml_string());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            // causes already quoted by the message above them are skipped
            let mut msg = f.error.to_string();
            for cause in f.error.chain().skip(1) {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    msg = format!("{msg}: {c}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(f.code)
        }
    }
}
