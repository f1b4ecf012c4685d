use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pulsescope"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().expect("binary runs")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn synth(dir: &Path, name: &str, spec: &str, extra: &[&str]) -> PathBuf {
    let spec_path = dir.join(format!("{name}.toml"));
    fs::write(&spec_path, spec).unwrap();
    let out_dir = dir.join(name);
    let mut args = vec!["synth", "--spec", spec_path.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    ok(&run(&args, dir));
    out_dir
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn csv_column(p: &Path, name: &str) -> Vec<f64> {
    let text = fs::read_to_string(p).unwrap();
    let mut lines = text.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

const CLEAN_72: &str = "chunks = 1\nparticipants = 1\nduration_s = [60.0, 60.0]\nmean_hr_bpm = [72.0, 72.0]\nsdnn_ms = [30.0, 30.0]\n";

#[test]
fn synth_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = synth(dir.path(), "a", "chunks = 3\n", &["--seed", "11"]);
    let b = synth(dir.path(), "b", "chunks = 3\n", &["--seed", "11"]);
    let c = synth(dir.path(), "c", "chunks = 3\n", &["--seed", "12"]);
    assert_eq!(tree(&a), tree(&b));
    assert_ne!(tree(&a), tree(&c));
}

#[test]
fn synth_durations_follow_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = synth(dir.path(), "d", "chunks = 10\n", &[]);
    let manifest = read_json(&out.join("manifest.json"));
    let recs = manifest.as_array().unwrap();
    assert_eq!(recs.len(), 10);
    for r in recs {
        let d = r["duration_s"].as_f64().unwrap();
        assert!((20.0..=60.0).contains(&d), "{d}");
    }
}

#[test]
fn synth_ibis_reach_sdnn_target() {
    let dir = tempfile::tempdir().unwrap();
    let spec = "chunks = 8\nparticipants = 8\nduration_s = [120.0, 120.0]\nmean_hr_bpm = [60.0, 70.0]\nsdnn_ms = [50.0, 50.0]\n";
    let out = synth(dir.path(), "s", spec, &[]);
    for i in 0..8 {
        let ibis = csv_column(&out.join(format!("chunk_{i:04}/ibis.csv")), "ibi_ms");
        assert!(ibis.len() >= 100);
        let m = ibis.iter().sum::<f64>() / ibis.len() as f64;
        let sd = (ibis.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (ibis.len() - 1) as f64).sqrt();
        assert!((sd - 50.0).abs() <= 7.5, "chunk {i}: {sd}");
    }
}

#[test]
fn synth_rejects_bad_spec_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "sdnn_ms = [80.0, 20.0]\n").unwrap();
    let out = run(&["synth", "--spec", "bad.toml", "--out-dir", "never"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("never").exists());
    fs::write(dir.path().join("typo.toml"), "chunkz = 3\n").unwrap();
    let out = run(&["synth", "--spec", "typo.toml", "--out-dir", "never"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn estimate_clean_trace() {
    let dir = tempfile::tempdir().unwrap();
    let ds = synth(dir.path(), "e", CLEAN_72, &[]);
    let trace = ds.join("chunk_0000/trace.csv");
    ok(&run(&["estimate", trace.to_str().unwrap(), "--out", "est"], dir.path()));
    let v = read_json(&dir.path().join("est/vitals.json"));
    assert!((v["hr_bpm"].as_f64().unwrap() - 72.0).abs() <= 1.0, "{v}");
    assert!(v["sdnn_ms"].is_number());
    assert!(v["rr_bpm"].is_null());
    let wf = fs::read_to_string(dir.path().join("est/waveform.csv")).unwrap();
    assert!(wf.starts_with("time,ppg\n"));
}

#[test]
fn estimate_short_trace_gates_sdnn() {
    let dir = tempfile::tempdir().unwrap();
    let spec = "chunks = 1\nparticipants = 1\nduration_s = [15.0, 15.0]\nmean_hr_bpm = [72.0, 72.0]\n";
    let ds = synth(dir.path(), "short", spec, &[]);
    let trace = ds.join("chunk_0000/trace.csv");
    ok(&run(&["estimate", trace.to_str().unwrap(), "--out", "est"], dir.path()));
    let v = read_json(&dir.path().join("est/vitals.json"));
    assert!(v["sdnn_ms"].is_null());
    assert_eq!(v["gate_reasons"]["sdnn_ms"], "duration < 20 s");
}

#[test]
fn estimate_errors_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["estimate", "missing_trace.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing_trace.csv"));

    fs::write(dir.path().join("bad.csv"), "t,r,g,b\n0,1,1,1\n0.1,1,oops,1\n").unwrap();
    let out = run(&["estimate", "bad.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.csv:3"));

    let out = run(&["estimate", "x.csv", "--method", "nope"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn evaluate_synthetic_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let ds = synth(dir.path(), "ev", "chunks = 20\nparticipants = 10\n", &[]);
    let manifest = ds.join("manifest.json");
    ok(&run(&["evaluate", manifest.to_str().unwrap(), "--out-dir", "rep", "--jobs", "2"], dir.path()));
    let rep = dir.path().join("rep");
    let summary = read_json(&rep.join("summary.json"));
    assert_eq!(summary["participants"], 10);
    assert_eq!(summary["evaluated"], 20);
    let main = fs::read_to_string(rep.join("results_main.csv")).unwrap();
    assert_eq!(main.lines().count(), 2);
    assert!(main.lines().nth(1).unwrap().starts_with("pos,"));
    let rows = fs::read_to_string(rep.join("rows.csv")).unwrap();
    assert_eq!(rows.lines().count(), 21);

    ok(&run(&["evaluate", manifest.to_str().unwrap(), "--out-dir", "rep", "--method", "chrom"], dir.path()));
    let main = fs::read_to_string(rep.join("results_main.csv")).unwrap();
    let methods: Vec<&str> = main.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(methods, ["pos", "chrom"]);
    let mv = fs::read_to_string(rep.join("robustness_movement.csv")).unwrap();
    assert!(mv.starts_with("bin,pos_mae,chrom_mae\n"));
}

#[test]
fn evaluate_survives_one_unreadable_chunk() {
    let dir = tempfile::tempdir().unwrap();
    let ds = synth(dir.path(), "ev", "chunks = 20\nparticipants = 10\nduration_s = [20.0, 25.0]\n", &[]);
    fs::remove_file(ds.join("chunk_0007/trace.csv")).unwrap();
    let manifest = ds.join("manifest.json");
    ok(&run(&["evaluate", manifest.to_str().unwrap(), "--out-dir", "rep"], dir.path()));
    let summary = read_json(&dir.path().join("rep/summary.json"));
    assert_eq!(summary["evaluated"], 19);
    assert_eq!(summary["failed"], 1);
    assert_eq!(summary["failures"][0]["chunk_id"], "chunk_0007");
}

#[test]
fn evaluate_with_nothing_readable_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let ds = synth(dir.path(), "ev", "chunks = 2\nparticipants = 1\nduration_s = [20.0, 20.0]\n", &[]);
    for i in 0..2 {
        fs::remove_file(ds.join(format!("chunk_{i:04}/gt.csv"))).unwrap();
    }
    let out = run(&["evaluate", ds.join("manifest.json").to_str().unwrap(), "--out-dir", "rep"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["evaluate", "no_manifest.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

/// Reference file with only `t,ppg`, optionally keeping rows `keep`.
fn ppg_only_gt(src: &Path, dst: &Path, keep: std::ops::Range<usize>) {
    let text = fs::read_to_string(src).unwrap();
    let mut lines = text.lines();
    lines.next();
    let mut out = String::from("t,ppg\n");
    for l in lines.skip(keep.start).take(keep.len()) {
        let f: Vec<&str> = l.split(',').collect();
        out.push_str(&format!("{},{}\n", f[0], f[1]));
    }
    fs::write(dst, out).unwrap();
}

#[test]
fn compare_writes_aligned_columns() {
    let dir = tempfile::tempdir().unwrap();
    let ds = synth(dir.path(), "cmp", CLEAN_72, &[]);
    let trace = ds.join("chunk_0000/trace.csv");
    let gt = dir.path().join("gt.csv");
    ppg_only_gt(&ds.join("chunk_0000/gt.csv"), &gt, 0..usize::MAX);

    ok(&run(&["compare", trace.to_str().unwrap(), "gt.csv", "--methods", "pos", "--out", "c.csv"], dir.path()));
    let c = dir.path().join("c.csv");
    let header = fs::read_to_string(&c).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "time,gt_ppg,pos_ppg");
    let r = pearson(&csv_column(&c, "gt_ppg"), &csv_column(&c, "pos_ppg"));
    assert!(r >= 0.9, "{r}");

    ok(&run(&["compare", trace.to_str().unwrap(), "gt.csv", "--methods", "", "--out", "g.csv"], dir.path()));
    let g = fs::read_to_string(dir.path().join("g.csv")).unwrap();
    assert!(g.starts_with("time,gt_ppg\n"));

    // reference covering samples 300..1200 only
    ppg_only_gt(&ds.join("chunk_0000/gt.csv"), &gt, 300..1200);
    ok(&run(&["compare", trace.to_str().unwrap(), "gt.csv", "--methods", "pos,chrom", "--out", "m.csv"], dir.path()));
    let t = csv_column(&dir.path().join("m.csv"), "time");
    assert_eq!(t.len(), 900);
    assert!((t[0] - 10.0).abs() < 1e-9);
}

#[test]
fn config_dump_is_a_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let first = run(&["config", "dump", "--set", "hrv.min_confidence=0.4"], dir.path());
    ok(&first);
    fs::write(dir.path().join("cfg.toml"), &first.stdout).unwrap();
    let second = run(&["--config", "cfg.toml", "config", "dump"], dir.path());
    ok(&second);
    assert_eq!(first.stdout, second.stdout);
    assert!(String::from_utf8_lossy(&first.stdout).contains("min_confidence = 0.4"));

    fs::write(dir.path().join("bad.toml"), "[hrv]\nnot_a_key = 1\n").unwrap();
    let out = run(&["--config", "bad.toml", "config", "dump"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn binary_trace_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let ds = synth(dir.path(), "bin", CLEAN_72, &[]);
    let csv = ds.join("chunk_0000/trace.csv");
    let cols: Vec<Vec<f64>> = ["t", "r", "g", "b"].iter().map(|c| csv_column(&csv, c)).collect();
    let mut bytes = b"PSTRACE\0".to_vec();
    bytes.extend_from_slice(&1u16.to_le_bytes());
    bytes.extend_from_slice(&4u16.to_le_bytes());
    bytes.extend_from_slice(&(cols[0].len() as u64).to_le_bytes());
    for c in &cols {
        for v in c {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(dir.path().join("trace.bin"), bytes).unwrap();
    ok(&run(&["estimate", "trace.bin", "--out", "b"], dir.path()));
    ok(&run(&["estimate", csv.to_str().unwrap(), "--out", "c"], dir.path()));
    assert_eq!(fs::read(dir.path().join("b/vitals.json")).unwrap(), fs::read(dir.path().join("c/vitals.json")).unwrap());
}
