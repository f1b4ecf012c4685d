//! Heart-rate variability from a pulse waveform.
//!
//! Peaks are scored on prominence, half-prominence width and spacing against
//! a rolling heart-rate estimate; low-confidence peaks are dropped; the
//! remaining peak train becomes an inter-beat-interval (IBI) series whose
//! outliers are replaced by interpolation; SDNN, RMSSD and LF/HF are then
//! computed subject to duration and beat-count gates.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::{Config, HrvConfig};
use crate::error::{Error, Result};
use crate::signal::TimeSeries;
use crate::spectral::welch;
use crate::vitals::rolling_hr;

/// Minimum waveform duration for peak detection, in seconds.
pub const MIN_DETECTION_S: f64 = 10.0;

const MAD_TO_SIGMA: f64 = 1.4826;

/// Detected systolic peaks with per-peak confidence in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PeakTrain {
    pub times_s: Vec<f64>,
    pub confidences: Vec<f64>,
}

impl PeakTrain {
    pub fn new(times_s: Vec<f64>, confidences: Vec<f64>) -> Result<Self> {
        if times_s.len() != confidences.len() {
            return Err(Error::param("peak times and confidences differ in length"));
        }
        if times_s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("peak times must be strictly increasing"));
        }
        if confidences.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::param("peak confidences must lie in [0, 1]"));
        }
        Ok(Self { times_s, confidences })
    }

    /// Train with every peak at confidence 1.
    pub fn trusted(times_s: Vec<f64>) -> Result<Self> {
        let n = times_s.len();
        Self::new(times_s, vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.times_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_s.is_empty()
    }
}

/// Successive inter-beat intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IbiSeries {
    pub ibis_ms: Vec<f64>,
    /// Start time of each interval (the earlier of its two beats).
    pub onset_times_s: Vec<f64>,
    /// Intervals whose value was replaced by interpolation.
    pub interpolated: Vec<bool>,
    /// More than the configured fraction of intervals were outliers.
    pub low_quality: bool,
}

impl IbiSeries {
    pub fn new(ibis_ms: Vec<f64>, onset_times_s: Vec<f64>) -> Result<Self> {
        if ibis_ms.len() != onset_times_s.len() {
            return Err(Error::param("IBI values and onset times differ in length"));
        }
        if ibis_ms.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::param("every IBI must be positive and finite"));
        }
        if onset_times_s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("IBI onset times must be strictly increasing"));
        }
        let n = ibis_ms.len();
        Ok(Self {
            ibis_ms,
            onset_times_s,
            interpolated: vec![false; n],
            low_quality: false,
        })
    }

    /// Series starting at `t0` whose onsets follow from accumulating the intervals.
    pub fn from_intervals(ibis_ms: Vec<f64>, t0: f64) -> Result<Self> {
        let mut t = t0;
        let onsets = ibis_ms
            .iter()
            .map(|v| {
                let start = t;
                t += v / 1000.0;
                start
            })
            .collect();
        Self::new(ibis_ms, onsets)
    }

    pub fn len(&self) -> usize {
        self.ibis_ms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ibis_ms.is_empty()
    }

    pub fn interpolated_fraction(&self) -> f64 {
        if self.ibis_ms.is_empty() {
            return 0.0;
        }
        self.interpolated.iter().filter(|f| **f).count() as f64 / self.ibis_ms.len() as f64
    }

    pub fn mean_ms(&self) -> f64 {
        self.ibis_ms.iter().sum::<f64>() / self.ibis_ms.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HrvMetric {
    Sdnn,
    Rmssd,
    LfHf,
}

impl HrvMetric {
    pub const ALL: [HrvMetric; 3] = [HrvMetric::Sdnn, HrvMetric::Rmssd, HrvMetric::LfHf];

    pub fn key(self) -> &'static str {
        match self {
            HrvMetric::Sdnn => "sdnn",
            HrvMetric::Rmssd => "rmssd",
            HrvMetric::LfHf => "lf_hf",
        }
    }
}

/// Why a gated metric was not computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GateReason {
    DurationBelow(f64),
    BeatsBelow(usize),
    InterpolatedAbove(f64),
}

impl fmt::Display for GateReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateReason::DurationBelow(s) => write!(f, "duration < {s} s"),
            GateReason::BeatsBelow(n) => write!(f, "beats < {n}"),
            GateReason::InterpolatedAbove(x) => write!(f, "interpolated fraction > {x}"),
        }
    }
}

/// Duration, beat-count and interpolation gates. SDNN and RMSSD share the
/// time-domain thresholds; LF/HF has its own.
pub fn hrv_gate(
    duration_s: f64,
    n_valid_beats: usize,
    interpolated_fraction: f64,
    metric: HrvMetric,
    cfg: &HrvConfig,
) -> std::result::Result<(), GateReason> {
    let (min_duration, min_beats) = match metric {
        HrvMetric::Sdnn | HrvMetric::Rmssd => (cfg.time_domain_min_duration_s, cfg.time_domain_min_beats),
        HrvMetric::LfHf => (cfg.lfhf_min_duration_s, cfg.lfhf_min_beats),
    };
    if duration_s + 1e-9 < min_duration {
        return Err(GateReason::DurationBelow(min_duration));
    }
    if n_valid_beats < min_beats {
        return Err(GateReason::BeatsBelow(min_beats));
    }
    if interpolated_fraction > cfg.max_interpolated_fraction + 1e-12 {
        return Err(GateReason::InterpolatedAbove(cfg.max_interpolated_fraction));
    }
    Ok(())
}

// ── Peak detection ─────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy)]
struct Candidate {
    time: f64,
    prominence: f64,
    shape_score: f64,
    period: f64,
}

/// Local maxima of `x` as `(first, last)` sample of each top; the two are
/// equal unless the top is flat.
fn local_maxima(x: &[f64]) -> Vec<(usize, usize)> {
    let n = x.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if x[i] > x[i - 1] {
            let mut j = i;
            while j + 1 < n && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < n && x[j + 1] < x[i] {
                out.push((i, j));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Prominence and its left/right base indices.
fn prominence(x: &[f64], p: usize) -> (f64, usize, usize) {
    let h = x[p];
    let (mut left_min, mut left_base) = (h, p);
    let mut j = p;
    while j > 0 {
        j -= 1;
        if x[j] > h {
            break;
        }
        if x[j] < left_min {
            left_min = x[j];
            left_base = j;
        }
    }
    let (mut right_min, mut right_base) = (h, p);
    let mut j = p;
    while j + 1 < x.len() {
        j += 1;
        if x[j] > h {
            break;
        }
        if x[j] < right_min {
            right_min = x[j];
            right_base = j;
        }
    }
    (h - left_min.max(right_min), left_base, right_base)
}

/// Width in samples at half prominence, linearly interpolated.
fn half_prominence_width(x: &[f64], p: usize, prom: f64, left_base: usize, right_base: usize) -> f64 {
    let height = x[p] - 0.5 * prom;
    let mut i = p;
    while left_base < i && height < x[i] {
        i -= 1;
    }
    let mut left = i as f64;
    if x[i] < height {
        left += (height - x[i]) / (x[i + 1] - x[i]);
    }
    let mut i = p;
    while i < right_base && height < x[i] {
        i += 1;
    }
    let mut right = i as f64;
    if x[i] < height {
        right -= (height - x[i]) / (x[i - 1] - x[i]);
    }
    right - left
}

fn median(v: &mut [f64]) -> f64 {
    let n = v.len();
    v.sort_by(f64::total_cmp);
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median absolute deviation scaled to a Gaussian sigma.
fn robust_amplitude(x: &[f64]) -> f64 {
    let mut buf = x.to_vec();
    let med = median(&mut buf);
    buf.iter_mut().for_each(|v| *v = (*v - med).abs());
    MAD_TO_SIGMA * median(&mut buf)
}

/// Linear score that is 1 inside `full` and falls to 0 at the edges of
/// `range`. `None` outside `range`.
fn trapezoid(v: f64, range: [f64; 2], full: [f64; 2]) -> Option<f64> {
    if v < range[0] || v > range[1] {
        return None;
    }
    if v < full[0] {
        return Some((v - range[0]) / (full[0] - range[0]));
    }
    if v > full[1] {
        return Some((range[1] - v) / (range[1] - full[1]));
    }
    Some(1.0)
}

/// Detects systolic peaks in a z-normalized pulse waveform.
///
/// `rolling_hr_bpm` gives the local expected rate and is sampled by time, so
/// it only needs to cover the span of `ppg`.
pub fn detect_peaks(ppg: &TimeSeries, rolling_hr_bpm: &TimeSeries, cfg: &HrvConfig) -> Result<PeakTrain> {
    if ppg.duration() + 1e-9 < MIN_DETECTION_S {
        return Err(Error::InsufficientData(format!(
            "peak detection needs {MIN_DETECTION_S} s, got {:.3} s",
            ppg.duration()
        )));
    }
    let x = ppg.values();
    let fs = ppg.fs();
    let n = x.len();
    let half_win = ((cfg.amplitude_window_s * fs / 2.0).round() as usize).max(1);
    let (t_first, t_last) = (ppg.t0() + cfg.edge_exclusion_s, ppg.t_end() - cfg.edge_exclusion_s);

    let mut candidates = Vec::new();
    for (first, last) in local_maxima(x) {
        let p = (first + last) / 2;
        let (prom, lb, rb) = prominence(x, p);
        if !(prom > 0.0) {
            continue;
        }
        let offset = if first != last {
            (first + last) as f64 / 2.0 - p as f64
        } else {
            let (a, b, c) = (x[p - 1], x[p], x[p + 1]);
            let denom = a - 2.0 * b + c;
            if denom < 0.0 {
                (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
            } else {
                0.0
            }
        };
        let time = ppg.t0() + (p as f64 + offset) / fs;
        if time < t_first || time > t_last {
            continue;
        }
        let amp = robust_amplitude(&x[p.saturating_sub(half_win)..(p + half_win + 1).min(n)]);
        if !(amp > 0.0) {
            continue;
        }
        let ratio = prom / amp;
        if ratio < cfg.prominence_factor {
            continue;
        }
        let prom_score = ((ratio - cfg.prominence_factor) / (cfg.prominence_full - cfg.prominence_factor))
            .clamp(0.0, 1.0);
        let rate = rolling_hr_bpm.value_at(time);
        if !(rate > 0.0) {
            continue;
        }
        let period = 60.0 / rate;
        let width_s = half_prominence_width(x, p, prom, lb, rb) / fs;
        let Some(width_score) = trapezoid(width_s / period, cfg.width_range, cfg.width_full) else {
            continue;
        };
        candidates.push(Candidate {
            time,
            prominence: prom,
            shape_score: prom_score * width_score,
            period,
        });
    }

    // Spacing score against the previous accepted peak; a peak after a gap
    // longer than the accept range starts a new run and scores 1.
    let spacing = |prev: Option<&(Candidate, f64)>, c: &Candidate| -> Option<f64> {
        match prev {
            None => Some(1.0),
            Some((q, _)) => {
                let rel = (c.time - q.time) / c.period;
                if rel > cfg.distance_range[1] {
                    Some(1.0)
                } else {
                    trapezoid(rel, cfg.distance_range, cfg.distance_full)
                }
            }
        }
    };

    let mut accepted: Vec<(Candidate, f64)> = Vec::new();
    for c in candidates {
        match spacing(accepted.last(), &c) {
            Some(score) => accepted.push((c, score)),
            None => {
                // too close: keep whichever of the pair has the better shape
                let last = accepted.last().expect("spacing is Some without a previous peak").0;
                let better = (c.shape_score, c.prominence) > (last.shape_score, last.prominence);
                if better {
                    let before = accepted.len().checked_sub(2).map(|i| &accepted[i]);
                    if let Some(score) = spacing(before, &c) {
                        accepted.pop();
                        accepted.push((c, score));
                    }
                }
            }
        }
    }

    let (times, confidences) = accepted
        .into_iter()
        .map(|(c, spacing_score)| (c.time, (c.shape_score * spacing_score).clamp(0.0, 1.0)))
        .unzip();
    PeakTrain::new(times, confidences)
}

/// Keeps peaks with confidence at or above `min_confidence` (clamped to `[0, 1]`).
pub fn filter_peaks(train: &PeakTrain, min_confidence: f64) -> PeakTrain {
    let threshold = min_confidence.clamp(0.0, 1.0);
    let (times_s, confidences) = train
        .times_s
        .iter()
        .zip(&train.confidences)
        .filter(|(_, c)| **c >= threshold)
        .map(|(t, c)| (*t, *c))
        .unzip();
    PeakTrain { times_s, confidences }
}

pub fn compute_ibis(train: &PeakTrain) -> Result<IbiSeries> {
    if train.len() < 2 {
        return Err(Error::InsufficientBeats {
            needed: 2,
            got: train.len(),
        });
    }
    let ibis = train.times_s.windows(2).map(|w| 1000.0 * (w[1] - w[0])).collect();
    IbiSeries::new(ibis, train.times_s[..train.len() - 1].to_vec())
}

/// Replaces outlier intervals by interpolation between the nearest valid
/// neighbours.
///
/// An interval is an outlier when it falls outside `ibi_range_ms` or deviates
/// from the median of its nearest valid intervals by more than
/// `ibi_relative_tolerance`. Detection repeats until no new outlier appears,
/// so the output is a fixed point. Intervals already flagged on input are
/// treated as outliers.
pub fn clean_ibis(series: &IbiSeries, cfg: &HrvConfig) -> Result<IbiSeries> {
    let n = series.len();
    if n < 3 {
        return Err(Error::InsufficientBeats { needed: 3, got: n });
    }
    let v = &series.ibis_ms;
    let mut flagged = series.interpolated.clone();
    let [lo, hi] = cfg.ibi_range_ms;
    for i in 0..n {
        if v[i] < lo || v[i] > hi {
            flagged[i] = true;
        }
    }
    loop {
        let valid: Vec<usize> = (0..n).filter(|&i| !flagged[i]).collect();
        if valid.is_empty() {
            return Err(Error::Uncleanable);
        }
        let mut fresh = Vec::new();
        for (pos, &i) in valid.iter().enumerate() {
            let mut neigh = nearest_others(&valid, pos, cfg.ibi_median_neighbors)
                .map(|j| v[j])
                .collect::<Vec<_>>();
            if neigh.is_empty() {
                continue;
            }
            let med = median(&mut neigh);
            if (v[i] - med).abs() > cfg.ibi_relative_tolerance * med {
                fresh.push(i);
            }
        }
        if fresh.is_empty() {
            break;
        }
        if fresh.len() == valid.len() {
            return Err(Error::Uncleanable);
        }
        for i in fresh {
            flagged[i] = true;
        }
    }

    let t = &series.onset_times_s;
    let mut out = v.clone();
    for i in (0..n).filter(|&i| flagged[i]) {
        let prev = (0..i).rev().find(|&j| !flagged[j]);
        let next = (i + 1..n).find(|&j| !flagged[j]);
        out[i] = match (prev, next) {
            (Some(a), Some(b)) => v[a] + (v[b] - v[a]) * (t[i] - t[a]) / (t[b] - t[a]),
            (Some(a), None) => v[a],
            (None, Some(b)) => v[b],
            (None, None) => unreachable!("at least one valid interval remains"),
        };
    }
    let fraction = flagged.iter().filter(|f| **f).count() as f64 / n as f64;
    Ok(IbiSeries {
        ibis_ms: out,
        onset_times_s: t.clone(),
        interpolated: flagged,
        low_quality: fraction > cfg.max_interpolated_fraction,
    })
}

/// Up to `k` entries of `valid` nearest to position `pos`, excluding it;
/// on equal distance the earlier one wins.
fn nearest_others(valid: &[usize], pos: usize, k: usize) -> impl Iterator<Item = usize> + '_ {
    let (mut l, mut r) = (pos, pos + 1);
    let mut taken = 0;
    std::iter::from_fn(move || {
        if taken == k {
            return None;
        }
        let anchor = valid[pos] as isize;
        let left = (l > 0).then(|| valid[l - 1]);
        let right = (r < valid.len()).then(|| valid[r]);
        let pick = match (left, right) {
            (Some(a), Some(b)) => {
                if (anchor - a as isize).abs() <= (b as isize - anchor).abs() {
                    l -= 1;
                    a
                } else {
                    r += 1;
                    b
                }
            }
            (Some(a), None) => {
                l -= 1;
                a
            }
            (None, Some(b)) => {
                r += 1;
                b
            }
            (None, None) => return None,
        };
        taken += 1;
        Some(pick)
    })
}

/// Standard deviation of the intervals with divisor `n - ddof`.
pub fn sdnn(series: &IbiSeries, ddof: usize) -> Result<f64> {
    let n = series.len();
    if n <= ddof {
        return Err(Error::InsufficientBeats { needed: ddof + 1, got: n });
    }
    let m = series.mean_ms();
    let ss: f64 = series.ibis_ms.iter().map(|v| (v - m) * (v - m)).sum();
    Ok((ss / (n - ddof) as f64).sqrt())
}

/// Root mean square of successive interval differences.
pub fn rmssd(series: &IbiSeries) -> Result<f64> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InsufficientBeats { needed: 2, got: n });
    }
    let ss: f64 = series.ibis_ms.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok((ss / (n - 1) as f64).sqrt())
}

/// Evenly resampled tachogram: each interval is placed at the time of the
/// beat that ends it, then linearly interpolated at `fs` Hz.
pub fn tachogram(series: &IbiSeries, fs: f64) -> Result<TimeSeries> {
    let times: Vec<f64> = series
        .onset_times_s
        .iter()
        .zip(&series.ibis_ms)
        .map(|(t, v)| t + v / 1000.0)
        .collect();
    crate::signal::resample_timestamps(&times, &series.ibis_ms, fs)
}

/// Ratio of LF to HF power of the mean-removed tachogram (Welch, Hann).
pub fn lf_hf(series: &IbiSeries, cfg: &HrvConfig) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::InsufficientBeats { needed: 3, got: series.len() + 1 });
    }
    let tach = tachogram(series, cfg.tachogram_fs_hz)?;
    let psd = welch(
        tach.values(),
        tach.fs(),
        (cfg.lfhf_segment_s * cfg.tachogram_fs_hz).round() as usize,
    )?;
    let lf = psd.band_power(cfg.lf_band_hz[0], cfg.lf_band_hz[1]);
    let hf = psd.band_power(cfg.hf_band_hz[0], cfg.hf_band_hz[1]);
    if !(hf > 1e-15) {
        return Err(Error::DegenerateSpectrum(format!("HF power {hf:e}")));
    }
    if !(lf > 0.0) {
        return Err(Error::DegenerateSpectrum("LF power is zero".into()));
    }
    Ok(lf / hf)
}

// ── Pipeline ───────────────────────────────────────────────────────────────

/// HRV metrics; an absent value always has a recorded reason.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HrvResult {
    pub sdnn_ms: Option<f64>,
    pub rmssd_ms: Option<f64>,
    pub lf_hf: Option<f64>,
    pub gate_reasons: BTreeMap<HrvMetric, String>,
}

impl HrvResult {
    pub fn get(&self, metric: HrvMetric) -> Option<f64> {
        match metric {
            HrvMetric::Sdnn => self.sdnn_ms,
            HrvMetric::Rmssd => self.rmssd_ms,
            HrvMetric::LfHf => self.lf_hf,
        }
    }

    fn set(&mut self, metric: HrvMetric, value: Result<f64>) {
        match value {
            Ok(v) => {
                match metric {
                    HrvMetric::Sdnn => self.sdnn_ms = Some(v),
                    HrvMetric::Rmssd => self.rmssd_ms = Some(v),
                    HrvMetric::LfHf => self.lf_hf = Some(v),
                }
                self.gate_reasons.remove(&metric);
            }
            Err(e) => {
                self.gate_reasons.insert(metric, e.to_string());
            }
        }
    }

    fn all_absent(reason: &str) -> Self {
        Self {
            gate_reasons: HrvMetric::ALL.iter().map(|m| (*m, reason.to_string())).collect(),
            ..Self::default()
        }
    }
}

/// Everything the HRV pipeline produced for one waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct HrvAnalysis {
    pub result: HrvResult,
    /// Peaks that passed the confidence filter.
    pub peaks: PeakTrain,
    pub ibis: Option<IbiSeries>,
    /// Heart rate from the mean cleaned interval.
    pub mean_ibi_hr_bpm: Option<f64>,
}

/// Runs detection, filtering, IBI cleaning, gating and the metrics.
///
/// With `trust_peaks` every detected peak is kept at confidence 1 (used for
/// reference waveforms).
pub fn analyze(ppg: &TimeSeries, cfg: &Config, trust_peaks: bool) -> HrvAnalysis {
    let empty = |reason: String| HrvAnalysis {
        result: HrvResult::all_absent(&reason),
        peaks: PeakTrain::default(),
        ibis: None,
        mean_ibi_hr_bpm: None,
    };
    let detected = rolling_hr(ppg, cfg.vitals.rolling_window_s, cfg.vitals.rolling_step_s, &cfg.vitals)
        .and_then(|rolling| detect_peaks(ppg, &rolling, &cfg.hrv));
    let detected = match detected {
        Ok(p) => p,
        Err(e) => return empty(format!("peak detection failed: {e}")),
    };
    let peaks = if trust_peaks {
        PeakTrain {
            confidences: vec![1.0; detected.len()],
            times_s: detected.times_s,
        }
    } else {
        filter_peaks(&detected, cfg.hrv.min_confidence)
    };
    let cleaned = compute_ibis(&peaks).and_then(|s| clean_ibis(&s, &cfg.hrv));
    let ibis = match cleaned {
        Ok(s) => s,
        Err(e) => {
            let mut out = empty(e.to_string());
            out.peaks = peaks;
            return out;
        }
    };

    let mut result = HrvResult::default();
    let duration = ppg.duration();
    let beats = peaks.len();
    let frac = ibis.interpolated_fraction();
    for metric in HrvMetric::ALL {
        match hrv_gate(duration, beats, frac, metric, &cfg.hrv) {
            Err(reason) => {
                result.gate_reasons.insert(metric, reason.to_string());
            }
            Ok(()) => {
                let value = match metric {
                    HrvMetric::Sdnn => sdnn(&ibis, cfg.hrv.sdnn_ddof),
                    HrvMetric::Rmssd => rmssd(&ibis),
                    HrvMetric::LfHf => lf_hf(&ibis, &cfg.hrv),
                };
                result.set(metric, value);
            }
        }
    }
    HrvAnalysis {
        result,
        mean_ibi_hr_bpm: Some(60_000.0 / ibis.mean_ms()),
        peaks,
        ibis: Some(ibis),
    }
}
