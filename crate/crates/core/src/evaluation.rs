//! Per-chunk evaluation against reference waveforms.
//!
//! Reference HR, RR and HRV are recomputed from the reference waveforms with
//! the same pipeline used for estimates (reference peaks trusted at
//! confidence 1), unless the manifest supplies precomputed values.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::formats::{read_ground_truth, read_trace, GroundTruth};
use crate::hrv::{analyze, HrvMetric};
use crate::methods::RppgMethod;
use crate::signal::{bandpass, detrend, mean, pearson_r, z_normalize, RgbTrace, TimeSeries};
use crate::vitals::{estimate_hr, estimate_rr, snr};

pub const NO_GT_RESP: &str = "no ground truth RESP";
pub const NO_EST_RESP: &str = "method produces no RESP";

/// Reference vitals supplied by the manifest; each present value replaces
/// the one recomputed from the reference waveform.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GtVitals {
    #[serde(default)]
    pub hr_bpm: Option<f64>,
    #[serde(default)]
    pub rr_bpm: Option<f64>,
    #[serde(default)]
    pub sdnn_ms: Option<f64>,
    #[serde(default)]
    pub rmssd_ms: Option<f64>,
    #[serde(default)]
    pub lf_hf: Option<f64>,
}

/// One manifest entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChunkRecord {
    pub chunk_id: String,
    pub participant_id: String,
    pub dataset: String,
    pub trace_path: PathBuf,
    pub gt_path: PathBuf,
    pub duration_s: f64,
    /// Fitzpatrick skin type, 1 to 6.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skin_type: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_vitals: Option<GtVitals>,
}

/// Reads a JSON manifest and resolves relative paths against its directory.
pub fn load_manifest(path: &Path, cfg: &Config) -> Result<Vec<ChunkRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records: Vec<ChunkRecord> = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    let [lo, hi] = cfg.evaluation.expected_duration_s;
    for r in &mut records {
        if let Some(s) = r.skin_type {
            if !(1..=6).contains(&s) {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: 0,
                    message: format!("chunk {}: skin type {s} outside 1..6", r.chunk_id),
                });
            }
        }
        if !(lo..=hi).contains(&r.duration_s) {
            log::warn!("chunk {}: duration {} s outside [{lo}, {hi}] s", r.chunk_id, r.duration_s);
        }
        if r.trace_path.is_relative() {
            r.trace_path = base.join(&r.trace_path);
        }
        if r.gt_path.is_relative() {
            r.gt_path = base.join(&r.gt_path);
        }
    }
    Ok(records)
}

/// Reported metrics, in report column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    HrMae,
    PpgR,
    PpgSnr,
    RrMae,
    RespR,
    RespSnr,
    SdnnMae,
    RmssdMae,
    LfHfMae,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::HrMae,
        Metric::PpgR,
        Metric::PpgSnr,
        Metric::RrMae,
        Metric::RespR,
        Metric::RespSnr,
        Metric::SdnnMae,
        Metric::RmssdMae,
        Metric::LfHfMae,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Metric::HrMae => "hr_mae",
            Metric::PpgR => "ppg_r",
            Metric::PpgSnr => "ppg_snr",
            Metric::RrMae => "rr_mae",
            Metric::RespR => "resp_r",
            Metric::RespSnr => "resp_snr",
            Metric::SdnnMae => "sdnn_mae",
            Metric::RmssdMae => "rmssd_mae",
            Metric::LfHfMae => "lfhf_mae",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Reference and estimated value of one vital, kept for scatter plots.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub truth: Option<f64>,
    pub est: Option<f64>,
}

/// Per-chunk results. Every absent metric has an entry in `gate_reasons`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub chunk_id: String,
    pub participant_id: String,
    pub dataset: String,
    pub skin_type: Option<u8>,
    pub motion_score: Option<f64>,
    pub hr_mae: Option<f64>,
    pub rr_mae: Option<f64>,
    pub sdnn_mae: Option<f64>,
    pub rmssd_mae: Option<f64>,
    pub lfhf_mae: Option<f64>,
    pub ppg_r: Option<f64>,
    pub ppg_snr: Option<f64>,
    pub resp_r: Option<f64>,
    pub resp_snr: Option<f64>,
    pub hr: Pair,
    pub rr: Pair,
    pub sdnn: Pair,
    pub rmssd: Pair,
    pub lf_hf: Pair,
    /// Heart rate from the mean cleaned IBI; diagnostic only.
    pub hr_ibi: Pair,
    pub gate_reasons: BTreeMap<Metric, String>,
    /// Set when the chunk could not be evaluated at all.
    pub error: Option<String>,
}

impl MetricsRow {
    pub fn get(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::HrMae => self.hr_mae,
            Metric::PpgR => self.ppg_r,
            Metric::PpgSnr => self.ppg_snr,
            Metric::RrMae => self.rr_mae,
            Metric::RespR => self.resp_r,
            Metric::RespSnr => self.resp_snr,
            Metric::SdnnMae => self.sdnn_mae,
            Metric::RmssdMae => self.rmssd_mae,
            Metric::LfHfMae => self.lfhf_mae,
        }
    }

    fn slot(&mut self, m: Metric) -> &mut Option<f64> {
        match m {
            Metric::HrMae => &mut self.hr_mae,
            Metric::PpgR => &mut self.ppg_r,
            Metric::PpgSnr => &mut self.ppg_snr,
            Metric::RrMae => &mut self.rr_mae,
            Metric::RespR => &mut self.resp_r,
            Metric::RespSnr => &mut self.resp_snr,
            Metric::SdnnMae => &mut self.sdnn_mae,
            Metric::RmssdMae => &mut self.rmssd_mae,
            Metric::LfHfMae => &mut self.lfhf_mae,
        }
    }

    /// Stores `value` or records why it is absent.
    pub fn set(&mut self, m: Metric, value: std::result::Result<f64, String>) {
        match value {
            Ok(v) if v.is_finite() => {
                *self.slot(m) = Some(v);
                self.gate_reasons.remove(&m);
            }
            Ok(v) => {
                *self.slot(m) = None;
                self.gate_reasons.insert(m, format!("non-finite value {v}"));
            }
            Err(reason) => {
                *self.slot(m) = None;
                self.gate_reasons.insert(m, reason);
            }
        }
    }

    fn from_record(record: &ChunkRecord) -> Self {
        Self {
            chunk_id: record.chunk_id.clone(),
            participant_id: record.participant_id.clone(),
            dataset: record.dataset.clone(),
            skin_type: record.skin_type,
            motion_score: record.motion_score,
            ..Self::default()
        }
    }

    fn fail(mut self, error: String) -> Self {
        for m in Metric::ALL {
            self.set(m, Err(format!("chunk error: {error}")));
        }
        self.error = Some(error);
        self
    }
}

/// Estimated waveforms of one chunk; `resp` only when the method makes one.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub ppg: TimeSeries,
    pub resp: Option<TimeSeries>,
}

/// Trims two series to their common time span. Samples of `b` are taken by
/// index when the grids line up, otherwise interpolated onto the grid of `a`.
pub fn common_span(a: &TimeSeries, b: &TimeSeries) -> Result<(TimeSeries, TimeSeries)> {
    if a.fs() != b.fs() {
        return Err(Error::param("common span needs equal sampling rates"));
    }
    let fs = a.fs();
    let start = a.t0().max(b.t0());
    let end = a.t_end().min(b.t_end());
    if end <= start {
        return Err(Error::InsufficientData("series do not overlap in time".into()));
    }
    let tol = 1e-6;
    let i0 = ((start - a.t0()) * fs - tol).ceil().max(0.0) as usize;
    let i1 = (((end - a.t0()) * fs + tol).floor() as usize).min(a.len() - 1);
    if i1 <= i0 {
        return Err(Error::InsufficientData("overlap shorter than two samples".into()));
    }
    let a_cut = a.slice(i0, i1 + 1)?;
    let shift = (a_cut.t0() - b.t0()) * fs;
    let b_vals: Vec<f64> = if (shift - shift.round()).abs() < tol {
        let j0 = shift.round() as usize;
        b.values()[j0..j0 + a_cut.len()].to_vec()
    } else {
        a_cut.times().map(|t| b.value_at(t)).collect()
    };
    Ok((a_cut.clone(), a_cut.with_values(b_vals)?))
}

/// Trims every series to the span they all share, on the grid of the first.
pub fn align_all(series: &[TimeSeries]) -> Result<Vec<TimeSeries>> {
    let Some(first) = series.first() else {
        return Ok(Vec::new());
    };
    let mut base = first.clone();
    for s in &series[1..] {
        base = common_span(&base, s)?.0;
    }
    series.iter().map(|s| Ok(common_span(&base, s)?.1)).collect()
}

/// Detrend, band-pass over the pulse band and z-normalize. `None` if flat.
pub fn condition_ppg(ppg: &TimeSeries, cfg: &Config) -> Result<Option<TimeSeries>> {
    let band = cfg.methods.pulse_band_hz;
    let f = bandpass(&detrend(ppg, cfg.signal.detrend_window_s)?, band[0], band[1])?;
    Ok(match z_normalize(f.values(), cfg.methods.flat_std) {
        Some(v) => Some(f.with_values(v)?),
        None => None,
    })
}

/// Band-pass over the breathing band and z-normalize. `None` if flat.
pub fn condition_resp(resp: &TimeSeries, cfg: &Config) -> Result<Option<TimeSeries>> {
    let band = cfg.vitals.rr_band_hz;
    let f = bandpass(resp, band[0], band[1])?;
    Ok(match z_normalize(f.values(), cfg.methods.flat_std) {
        Some(v) => Some(f.with_values(v)?),
        None => None,
    })
}

/// Fills the metric fields of `row` by comparing estimated waveforms with
/// reference waveforms.
pub fn evaluate_waveforms(
    row: &mut MetricsRow,
    est: &Estimate,
    gt: &GroundTruth,
    given: Option<&GtVitals>,
    cfg: &Config,
) {
    let given = given.cloned().unwrap_or_default();
    let err = |e: Error| e.to_string();

    // PPG, HR and HRV on the common span; both sides go through the same
    // conditioning so identical inputs score exactly
    let spans = common_span(&est.ppg, &gt.ppg).map_err(err).and_then(|(e, g)| {
        let g = condition_ppg(&g, cfg)
            .map_err(err)?
            .ok_or_else(|| "ground truth: PPG is flat".to_string())?;
        let e = condition_ppg(&e, cfg)
            .map_err(err)?
            .ok_or_else(|| "estimated PPG is flat".to_string())?;
        Ok((e, g))
    });
    let (est_ppg, gt_ppg) = match spans {
        Ok(s) => s,
        Err(reason) => {
            for m in [Metric::HrMae, Metric::PpgR, Metric::PpgSnr, Metric::SdnnMae, Metric::RmssdMae, Metric::LfHfMae] {
                row.set(m, Err(reason.clone()));
            }
            evaluate_resp(row, est, gt, &given, cfg);
            return;
        }
    };

    let hr_true = match given.hr_bpm {
        Some(v) => Ok(v),
        None => estimate_hr(&gt_ppg, &cfg.vitals).map(|r| r.bpm).map_err(err),
    };
    let hr_est = estimate_hr(&est_ppg, &cfg.vitals).map(|r| r.bpm).map_err(err);
    row.hr = Pair {
        truth: hr_true.as_ref().ok().copied(),
        est: hr_est.as_ref().ok().copied(),
    };
    row.set(
        Metric::HrMae,
        match &hr_true {
            Err(e) => Err(format!("ground truth: {e}")),
            Ok(t) => hr_est.clone().map(|e| (e - t).abs()),
        },
    );
    row.set(Metric::PpgR, pearson_r(est_ppg.values(), gt_ppg.values()).map_err(err));
    let band = cfg.vitals.hr_band_hz;
    row.set(
        Metric::PpgSnr,
        match &hr_true {
            Err(e) => Err(format!("ground truth: {e}")),
            Ok(t) => snr(&est_ppg, *t, band[0], band[1], cfg.vitals.snr_template_hz).map_err(err),
        },
    );

    let est_analysis = analyze(&est_ppg, cfg, false);
    let gt_analysis = analyze(&gt_ppg, cfg, true);
    row.hr_ibi = Pair { truth: gt_analysis.mean_ibi_hr_bpm, est: est_analysis.mean_ibi_hr_bpm };
    let (est_hrv, gt_hrv) = (est_analysis.result, gt_analysis.result);
    let log_scale = cfg.evaluation.lfhf_log_scale;
    for (metric, hm, given_v) in [
        (Metric::SdnnMae, HrvMetric::Sdnn, given.sdnn_ms),
        (Metric::RmssdMae, HrvMetric::Rmssd, given.rmssd_ms),
        (Metric::LfHfMae, HrvMetric::LfHf, given.lf_hf),
    ] {
        let truth = given_v.or(gt_hrv.get(hm));
        let est_v = est_hrv.get(hm);
        let pair = Pair { truth, est: est_v };
        match metric {
            Metric::SdnnMae => row.sdnn = pair,
            Metric::RmssdMae => row.rmssd = pair,
            _ => row.lf_hf = pair,
        }
        let value = match (truth, est_v) {
            (None, _) => Err(format!(
                "ground truth: {}",
                gt_hrv.gate_reasons.get(&hm).map_or("unavailable", String::as_str)
            )),
            (Some(_), None) => Err(est_hrv
                .gate_reasons
                .get(&hm)
                .cloned()
                .unwrap_or_else(|| "unavailable".into())),
            (Some(t), Some(e)) if hm == HrvMetric::LfHf && log_scale => Ok((e.ln() - t.ln()).abs()),
            (Some(t), Some(e)) => Ok((e - t).abs()),
        };
        row.set(metric, value);
    }
    evaluate_resp(row, est, gt, &given, cfg);
}

fn evaluate_resp(row: &mut MetricsRow, est: &Estimate, gt: &GroundTruth, given: &GtVitals, cfg: &Config) {
    let resp_metrics = [Metric::RrMae, Metric::RespR, Metric::RespSnr];
    let (Some(gt_resp), Some(est_resp)) = (&gt.resp, &est.resp) else {
        let reason = if gt.resp.is_none() { NO_GT_RESP } else { NO_EST_RESP };
        for m in resp_metrics {
            row.set(m, Err(reason.to_string()));
        }
        return;
    };
    let err = |e: Error| e.to_string();
    let spans = common_span(est_resp, gt_resp).map_err(err).and_then(|(e, g)| {
        let g = condition_resp(&g, cfg)
            .map_err(err)?
            .ok_or_else(|| "ground truth RESP is flat".to_string())?;
        let e = condition_resp(&e, cfg)
            .map_err(err)?
            .ok_or_else(|| "estimated RESP is flat".to_string())?;
        Ok((e, g))
    });
    let (e, g) = match spans {
        Ok(s) => s,
        Err(reason) => {
            for m in resp_metrics {
                row.set(m, Err(reason.clone()));
            }
            return;
        }
    };
    let rr_true = match given.rr_bpm {
        Some(v) => Ok(v),
        None => estimate_rr(&g, &cfg.vitals).map(|r| r.bpm).map_err(err),
    };
    let rr_est = estimate_rr(&e, &cfg.vitals).map(|r| r.bpm).map_err(err);
    row.rr = Pair {
        truth: rr_true.as_ref().ok().copied(),
        est: rr_est.as_ref().ok().copied(),
    };
    row.set(
        Metric::RrMae,
        match &rr_true {
            Err(x) => Err(format!("ground truth: {x}")),
            Ok(t) => rr_est.map(|e| (e - t).abs()),
        },
    );
    row.set(Metric::RespR, pearson_r(e.values(), g.values()).map_err(err));
    let band = cfg.vitals.rr_band_hz;
    row.set(
        Metric::RespSnr,
        match &rr_true {
            Err(x) => Err(format!("ground truth: {x}")),
            Ok(t) => snr(&e, *t, band[0], band[1], cfg.vitals.snr_template_hz).map_err(err),
        },
    );
}

/// Motion proxy: mean absolute frame-to-frame change of the common-mode
/// channel, each channel first divided by its mean.
pub fn motion_proxy(trace: &RgbTrace) -> f64 {
    let norm: Vec<f64> = (0..3).map(|c| mean(trace.channel(c))).collect();
    let common: Vec<f64> = (0..trace.len())
        .map(|i| (0..3).map(|c| trace.channel(c)[i] / norm[c]).sum::<f64>() / 3.0)
        .collect();
    common.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (common.len() - 1) as f64
}

/// Reads, extracts and scores one chunk. Failures produce an error row.
pub fn evaluate_chunk(record: &ChunkRecord, method: &RppgMethod, cfg: &Config) -> MetricsRow {
    let row = MetricsRow::from_record(record);
    let loaded = read_trace(&record.trace_path).and_then(|t| Ok((t, read_ground_truth(&record.gt_path)?)));
    let (trace, gt) = match loaded {
        Ok(x) => x,
        Err(e) => return row.fail(e.to_string()),
    };
    let pulse = match method.extract(&trace, cfg) {
        Ok(p) => p,
        Err(e) => return row.fail(e.to_string()),
    };
    let mut row = row;
    if row.motion_score.is_none() {
        row.motion_score = Some(motion_proxy(&trace));
    }
    let est = Estimate { ppg: pulse.ppg, resp: None };
    evaluate_waveforms(&mut row, &est, &gt, record.gt_vitals.as_ref(), cfg);
    row
}

/// Evaluates every chunk on a pool of `jobs` threads; rows keep manifest order.
pub fn evaluate_all(records: &[ChunkRecord], method: &RppgMethod, cfg: &Config, jobs: usize) -> Result<Vec<MetricsRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::param(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(|| records.par_iter().map(|r| evaluate_chunk(r, method, cfg)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::MethodKind;
    use crate::synth::{synth_chunk, Modulation, SynthSpec};

    fn sine(f: f64, secs: f64, t0: f64) -> TimeSeries {
        let n = (secs * 30.0) as usize + 1;
        let v = (0..n).map(|i| (2.0 * std::f64::consts::PI * f * i as f64 / 30.0).sin()).collect();
        TimeSeries::new(v, 30.0, t0).unwrap()
    }

    fn spec(seed: u64) -> SynthSpec {
        SynthSpec {
            mean_hr_bpm: 70.0,
            sdnn_target_ms: 40.0,
            lf_mod: Modulation { freq_hz: 0.1, amp_ms: 40.0 },
            hf_mod: Modulation { freq_hz: 0.25, amp_ms: 20.0 },
            noise_sigma: 0.1,
            duration_s: 60.0,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn identical_waveforms_score_perfectly() {
        let c = synth_chunk(&spec(1), 30.0).unwrap();
        let cfg = Config::default();
        let gt = GroundTruth { ppg: c.ppg.clone(), resp: None };
        let est = Estimate { ppg: c.ppg.clone(), resp: None };
        let mut row = MetricsRow::default();
        evaluate_waveforms(&mut row, &est, &gt, None, &cfg);
        assert_eq!(row.hr_mae, Some(0.0));
        assert!((row.ppg_r.unwrap() - 1.0).abs() < 1e-12);
        // estimate side uses the confidence filter, which keeps every clean peak
        assert!(row.sdnn_mae.unwrap() < 1e-9, "{row:?}");
        assert_eq!(row.rr_mae, None);
        assert_eq!(row.gate_reasons[&Metric::RrMae], NO_GT_RESP);
    }

    #[test]
    fn pos_on_clean_synthetic_chunk() {
        let c = synth_chunk(&spec(2), 30.0).unwrap();
        let cfg = Config::default();
        let method = RppgMethod::from_config(MethodKind::Pos, &cfg);
        let est = Estimate { ppg: method.extract(&c.trace, &cfg).unwrap().ppg, resp: None };
        let gt = GroundTruth { ppg: c.ppg.clone(), resp: Some(c.resp.clone()) };
        let mut row = MetricsRow::default();
        evaluate_waveforms(&mut row, &est, &gt, None, &cfg);
        assert!(row.hr_mae.unwrap() <= 1.0, "{row:?}");
        assert!(row.sdnn_mae.unwrap() <= 10.0, "{row:?}");
        assert_eq!(row.gate_reasons[&Metric::RrMae], NO_EST_RESP);
    }

    #[test]
    fn precomputed_truth_takes_precedence() {
        let cfg = Config::default();
        let gt = GroundTruth { ppg: sine(1.2, 30.0, 0.0), resp: None };
        let est = Estimate { ppg: sine(1.2, 30.0, 0.0), resp: None };
        let given = GtVitals { hr_bpm: Some(70.0), ..Default::default() };
        let mut row = MetricsRow::default();
        evaluate_waveforms(&mut row, &est, &gt, Some(&given), &cfg);
        assert!((row.hr_mae.unwrap() - 2.0).abs() < 0.05);
        assert_eq!(row.hr.truth, Some(70.0));
    }

    #[test]
    fn resp_metrics_when_both_present() {
        let cfg = Config::default();
        let gt = GroundTruth { ppg: sine(1.2, 60.0, 0.0), resp: Some(sine(0.25, 60.0, 0.0)) };
        let est = Estimate { ppg: sine(1.2, 60.0, 0.0), resp: Some(sine(0.25, 60.0, 0.0)) };
        let mut row = MetricsRow::default();
        evaluate_waveforms(&mut row, &est, &gt, None, &cfg);
        assert!(row.rr_mae.unwrap() < 1e-9);
        assert!((row.resp_r.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn common_span_trims_to_overlap() {
        let a = sine(1.0, 20.0, 0.0);
        let b = sine(1.0, 20.0, 5.0);
        let (x, y) = common_span(&a, &b).unwrap();
        assert_eq!(x.len(), 451);
        assert_eq!(y.len(), 451);
        assert_eq!(x.t0(), 5.0);
        assert_eq!(y.values()[0], b.values()[0]);
        // off-grid offset is interpolated
        let c = sine(1.0, 20.0, 5.01);
        let (x, y) = common_span(&a, &c).unwrap();
        assert_eq!(x.len(), y.len());
        assert!(x.t0() >= 5.01);
    }

    #[test]
    fn align_all_uses_shared_span() {
        let out = align_all(&[sine(1.0, 20.0, 0.0), sine(1.0, 20.0, 5.0), sine(1.0, 10.0, 8.0)]).unwrap();
        assert!(out.iter().all(|s| s.len() == 301 && s.t0() == 8.0));
    }

    #[test]
    fn unreadable_chunk_is_an_error_row() {
        let rec = ChunkRecord {
            chunk_id: "c".into(),
            participant_id: "p".into(),
            dataset: "d".into(),
            trace_path: "/nonexistent/trace.csv".into(),
            gt_path: "/nonexistent/gt.csv".into(),
            duration_s: 30.0,
            skin_type: None,
            motion_score: None,
            gt_vitals: None,
        };
        let cfg = Config::default();
        let row = evaluate_chunk(&rec, &RppgMethod::from_config(MethodKind::Pos, &cfg), &cfg);
        assert!(row.error.as_deref().unwrap().contains("/nonexistent/trace.csv"));
        assert!(Metric::ALL.iter().all(|m| row.get(*m).is_none() && row.gate_reasons.contains_key(m)));
    }

    #[test]
    fn motion_proxy_grows_with_motion() {
        let still = synth_chunk(&spec(3), 30.0).unwrap();
        let moving = synth_chunk(&SynthSpec { motion_amp: 5.0, ..spec(3) }, 30.0).unwrap();
        assert!(motion_proxy(&moving.trace) > motion_proxy(&still.trace));
    }
}
