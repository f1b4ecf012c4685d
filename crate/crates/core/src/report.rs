//! Two-stage aggregation of chunk rows and CSV report emission.
//!
//! Every summary first averages a participant's chunks, then averages the
//! per-participant values, so participants with many chunks do not dominate.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{Metric, MetricsRow};
use crate::formats::write_csv;

pub const RESULTS_MAIN_HEADER: [&str; 10] = [
    "method",
    "hrmae",
    "hrppgcor",
    "hrppgsnr",
    "rrmae",
    "rrrespcor",
    "rrrespsnr",
    "hrvsdnnmae",
    "hrvrmssdmae",
    "hrvlfhfmae",
];
pub const BY_DATASET_HEADER: [&str; 4] = ["source_dataset", "hr_mae", "rr_mae", "sdnn_mae"];
pub const SCATTER_HEADER: [&str; 2] = ["x_true", "y_est"];
pub const TERCILE_LABELS: [&str; 3] = ["Low", "Medium", "High"];

/// Metric values of one partition together with how many participants
/// contributed to each.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub values: BTreeMap<Metric, f64>,
    pub participants: BTreeMap<Metric, usize>,
}

impl Summary {
    pub fn get(&self, m: Metric) -> Option<f64> {
        self.values.get(&m).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub method: String,
    pub chunks: usize,
    pub per_individual: BTreeMap<String, BTreeMap<Metric, f64>>,
    pub overall: Summary,
    pub by_dataset: BTreeMap<String, Summary>,
    /// Low, Medium, High.
    pub by_movement_tercile: [Summary; 3],
    /// Skin types 1 to 6.
    pub by_skin_type: [Summary; 6],
    pub scatter_hr: Vec<(f64, f64)>,
    pub scatter_rr: Vec<(f64, f64)>,
    pub scatter_sdnn: Vec<(f64, f64)>,
}

/// Sum of `values` in ascending order, so the result does not depend on row order.
fn ordered_mean(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean of each participant's non-absent chunk values.
pub fn per_individual<'a>(rows: impl IntoIterator<Item = &'a MetricsRow>) -> BTreeMap<String, BTreeMap<Metric, f64>> {
    let mut values: BTreeMap<&str, BTreeMap<Metric, Vec<f64>>> = BTreeMap::new();
    for row in rows {
        let entry = values.entry(row.participant_id.as_str()).or_default();
        for m in Metric::ALL {
            if let Some(v) = row.get(m) {
                entry.entry(m).or_default().push(v);
            }
        }
    }
    values
        .into_iter()
        .map(|(p, ms)| (p.to_string(), ms.into_iter().map(|(m, v)| (m, ordered_mean(v))).collect()))
        .collect()
}

/// Unweighted mean over participants of their per-individual values.
fn across_individuals(per: &BTreeMap<String, BTreeMap<Metric, f64>>) -> Summary {
    let mut out = Summary::default();
    for m in Metric::ALL {
        let vals: Vec<f64> = per.values().filter_map(|ms| ms.get(&m).copied()).collect();
        if !vals.is_empty() {
            out.values.insert(m, vals.iter().sum::<f64>() / vals.len() as f64);
            out.participants.insert(m, vals.len());
        }
    }
    out
}

pub fn two_stage<'a>(rows: impl IntoIterator<Item = &'a MetricsRow>) -> Summary {
    across_individuals(&per_individual(rows))
}

/// Splits participants into Low, Medium and High motion terciles: sorted by
/// score (ties by id), cut at `ceil(n/3)` and `ceil(2n/3)`.
pub fn bin_terciles(scores: &BTreeMap<String, f64>) -> [Vec<String>; 3] {
    let mut order: Vec<(&String, f64)> = scores.iter().map(|(p, s)| (p, *s)).collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let n = order.len();
    let (c1, c2) = (n.div_ceil(3), (2 * n).div_ceil(3));
    let ids: Vec<String> = order.into_iter().map(|(p, _)| p.clone()).collect();
    [ids[..c1].to_vec(), ids[c1..c2].to_vec(), ids[c2..].to_vec()]
}

fn participant_motion(rows: &[MetricsRow]) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut missing = BTreeSet::new();
    for r in rows {
        match r.motion_score {
            Some(s) => acc.entry(&r.participant_id).or_default().push(s),
            None => {
                missing.insert(r.participant_id.as_str());
            }
        }
    }
    let missing: Vec<&str> = missing.into_iter().filter(|p| !acc.contains_key(p)).collect();
    if !missing.is_empty() {
        log::warn!("{} participants without motion scores left out of terciles", missing.len());
    }
    acc.into_iter().map(|(p, v)| (p.to_string(), ordered_mean(v))).collect()
}

/// Most frequent skin type of each participant (smallest on ties).
fn participant_skin(rows: &[MetricsRow]) -> BTreeMap<String, u8> {
    let mut counts: BTreeMap<&str, BTreeMap<u8, usize>> = BTreeMap::new();
    for r in rows {
        if let Some(s) = r.skin_type {
            *counts.entry(&r.participant_id).or_default().entry(s).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|(p, c)| {
            let best = c.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(s, _)| *s);
            (p.to_string(), best.expect("non-empty counts"))
        })
        .collect()
}

fn scatter(rows: &[MetricsRow], pick: impl Fn(&MetricsRow) -> (Option<f64>, Option<f64>)) -> Vec<(f64, f64)> {
    rows.iter()
        .filter_map(|r| match pick(r) {
            (Some(t), Some(e)) => Some((t, e)),
            _ => None,
        })
        .collect()
}

pub fn aggregate(rows: &[MetricsRow], method: &str) -> Result<Report> {
    if rows.is_empty() {
        return Err(Error::InsufficientData("no rows to aggregate".into()));
    }
    let per = per_individual(rows);
    let overall = across_individuals(&per);

    let mut by_dataset: BTreeMap<&str, Vec<&MetricsRow>> = BTreeMap::new();
    for r in rows {
        by_dataset.entry(&r.dataset).or_default().push(r);
    }
    let by_dataset = by_dataset
        .into_iter()
        .map(|(d, rs)| (d.to_string(), two_stage(rs)))
        .collect();

    let partition = |members: &BTreeSet<&str>| two_stage(rows.iter().filter(|r| members.contains(r.participant_id.as_str())));
    let motion = participant_motion(rows);
    let by_movement_tercile = bin_terciles(&motion).map(|ids| partition(&ids.iter().map(String::as_str).collect()));
    let skin = participant_skin(rows);
    let by_skin_type = std::array::from_fn(|i| {
        let members = skin
            .iter()
            .filter(|(_, s)| usize::from(**s) == i + 1)
            .map(|(p, _)| p.as_str())
            .collect();
        partition(&members)
    });

    Ok(Report {
        method: method.to_string(),
        chunks: rows.len(),
        per_individual: per,
        overall,
        by_dataset,
        by_movement_tercile,
        by_skin_type,
        scatter_hr: scatter(rows, |r| (r.hr.truth, r.hr.est)),
        scatter_rr: scatter(rows, |r| (r.rr.truth, r.rr.est)),
        scatter_sdnn: scatter(rows, |r| (r.sdnn.truth, r.sdnn.est)),
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn parse_cell(path: &Path, line: u64, s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("`{s}` is not a number"),
    })
}

/// Rows of a CSV as strings, checking the header exactly.
fn read_table(path: &Path, header: Option<&[&str]>) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse { path: path.to_path_buf(), line: 0, message: format!("{other:?}") },
    })?;
    let parse = |e: csv::Error| Error::Parse {
        path: path.to_path_buf(),
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    };
    let found: Vec<String> = reader.headers().map_err(parse)?.iter().map(String::from).collect();
    if let Some(h) = header {
        if found != h {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("unexpected header `{}`", found.join(",")),
            });
        }
    }
    let rows = reader
        .records()
        .map(|r| r.map(|r| r.iter().map(String::from).collect()).map_err(parse))
        .collect::<Result<_>>()?;
    Ok((found, rows))
}

pub type MainRow = (String, [Option<f64>; 9]);

pub fn main_row(report: &Report) -> MainRow {
    (report.method.clone(), Metric::ALL.map(|m| report.overall.get(m)))
}

pub fn read_results_main(path: &Path) -> Result<Vec<MainRow>> {
    let (_, rows) = read_table(path, Some(&RESULTS_MAIN_HEADER))?;
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let line = i as u64 + 2;
            let mut vals = [None; 9];
            for (k, v) in vals.iter_mut().enumerate() {
                *v = parse_cell(path, line, &r[k + 1])?;
            }
            Ok((r[0].clone(), vals))
        })
        .collect()
}

/// Adds or replaces this method's row, keeping other methods in place.
fn merge_results_main(path: &Path, row: MainRow) -> Result<()> {
    let mut rows = if path.exists() { read_results_main(path)? } else { Vec::new() };
    match rows.iter_mut().find(|r| r.0 == row.0) {
        Some(existing) => *existing = row,
        None => rows.push(row),
    }
    write_csv(path, &RESULTS_MAIN_HEADER, rows.len(), |i| {
        let (m, vals) = &rows[i];
        std::iter::once(m.clone()).chain(vals.iter().map(|v| cell(*v))).collect()
    })
}

/// Adds or replaces the `{method}_mae` column of a `bin,...` table.
fn merge_robustness(path: &Path, method: &str, bins: &[String], values: &[Option<f64>]) -> Result<()> {
    let column = format!("{method}_mae");
    let (mut header, mut rows) = if path.exists() {
        read_table(path, None)?
    } else {
        (vec!["bin".to_string()], Vec::new())
    };
    if header.first().map(String::as_str) != Some("bin") {
        return Err(Error::Parse { path: path.to_path_buf(), line: 1, message: "first column must be `bin`".into() });
    }
    let col = match header.iter().position(|h| *h == column) {
        Some(c) => c,
        None => {
            header.push(column);
            rows.iter_mut().for_each(|r| r.push(String::new()));
            header.len() - 1
        }
    };
    for (bin, v) in bins.iter().zip(values) {
        let idx = match rows.iter().position(|r| r[0] == *bin) {
            Some(i) => i,
            None => {
                let mut r = vec![String::new(); header.len()];
                r[0] = bin.clone();
                rows.push(r);
                rows.len() - 1
            }
        };
        rows[idx][col] = cell(*v);
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(path, &header_refs, rows.len(), |i| rows[i].clone())
}

fn write_scatter(path: &Path, points: &[(f64, f64)]) -> Result<()> {
    write_csv(path, &SCATTER_HEADER, points.len(), |i| {
        vec![format!("{}", points[i].0), format!("{}", points[i].1)]
    })
}

/// Writes the report file set into `out_dir`. `results_main.csv` and the
/// robustness tables are merged with any existing files so several methods
/// can share one directory.
pub fn emit_report(report: &Report, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    merge_results_main(&out_dir.join("results_main.csv"), main_row(report))?;

    let ds: Vec<(&String, &Summary)> = report.by_dataset.iter().collect();
    write_csv(&out_dir.join("results_by_dataset.csv"), &BY_DATASET_HEADER, ds.len(), |i| {
        let (name, s) = ds[i];
        vec![
            name.clone(),
            cell(s.get(Metric::HrMae)),
            cell(s.get(Metric::RrMae)),
            cell(s.get(Metric::SdnnMae)),
        ]
    })?;

    write_scatter(&out_dir.join("scatter_hr.csv"), &report.scatter_hr)?;
    write_scatter(&out_dir.join("scatter_rr.csv"), &report.scatter_rr)?;
    write_scatter(&out_dir.join("scatter_sdnn.csv"), &report.scatter_sdnn)?;

    let terciles: Vec<String> = TERCILE_LABELS.iter().map(|s| s.to_string()).collect();
    let tv: Vec<Option<f64>> = report.by_movement_tercile.iter().map(|s| s.get(Metric::SdnnMae)).collect();
    merge_robustness(&out_dir.join("robustness_movement.csv"), &report.method, &terciles, &tv)?;
    let skins: Vec<String> = (1..=6).map(|s| s.to_string()).collect();
    let sv: Vec<Option<f64>> = report.by_skin_type.iter().map(|s| s.get(Metric::SdnnMae)).collect();
    merge_robustness(&out_dir.join("robustness_skin_type.csv"), &report.method, &skins, &sv)
}

pub const ROWS_HEADER: [&str; 30] = [
    "method",
    "chunk_id",
    "participant_id",
    "dataset",
    "skin_type",
    "motion_score",
    "hr_mae",
    "ppg_r",
    "ppg_snr",
    "rr_mae",
    "resp_r",
    "resp_snr",
    "sdnn_mae",
    "rmssd_mae",
    "lfhf_mae",
    "hr_true",
    "hr_est",
    "rr_true",
    "rr_est",
    "sdnn_true",
    "sdnn_est",
    "rmssd_true",
    "rmssd_est",
    "lfhf_true",
    "lfhf_est",
    "hr_ibi_true",
    "hr_ibi_est",
    "lfhf_log_scale",
    "error",
    "gate_reasons",
];

/// Per-chunk dump, one line per row in input order.
pub fn write_rows(path: &Path, method: &str, rows: &[MetricsRow], lfhf_log_scale: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    let io = |e: csv::Error| Error::Parse { path: path.to_path_buf(), line: 0, message: e.to_string() };
    w.write_record(ROWS_HEADER).map_err(io)?;
    for r in rows {
        let mut rec = vec![
            method.to_string(),
            r.chunk_id.clone(),
            r.participant_id.clone(),
            r.dataset.clone(),
            r.skin_type.map(|s| s.to_string()).unwrap_or_default(),
            cell(r.motion_score),
        ];
        rec.extend(Metric::ALL.iter().map(|m| cell(r.get(*m))));
        for p in [r.hr, r.rr, r.sdnn, r.rmssd, r.lf_hf, r.hr_ibi] {
            rec.push(cell(p.truth));
            rec.push(cell(p.est));
        }
        rec.push(lfhf_log_scale.to_string());
        rec.push(r.error.clone().unwrap_or_default());
        rec.push(
            r.gate_reasons
                .iter()
                .map(|(m, why)| format!("{m}: {why}"))
                .collect::<Vec<_>>()
                .join("; "),
        );
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
