//! Handcrafted pulse extraction from RGB traces: green channel (G),
//! chrominance (CHROM) and plane-orthogonal-to-skin (POS).
//!
//! All three share the same post-processing chain: moving-average detrend,
//! zero-phase band-pass over the pulse band, and z-normalization. A flat
//! output is returned as zeros and marked low-quality instead of failing.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::signal::{bandpass, detrend, mean, std_pop, z_normalize, RgbTrace, TimeSeries};
use crate::spectral::{band_peak_frequency, periodogram};
use crate::vitals::snr_values;

/// Shortest trace the methods accept, in seconds.
pub const MIN_TRACE_S: f64 = 5.0;

/// Standard deviation below which a projection is treated as zero variance.
const ZERO_VARIANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    G,
    Chrom,
    Pos,
}

impl MethodKind {
    pub const ALL: [MethodKind; 3] = [MethodKind::G, MethodKind::Chrom, MethodKind::Pos];

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::G => "g",
            MethodKind::Chrom => "chrom",
            MethodKind::Pos => "pos",
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "g" | "green" => Ok(MethodKind::G),
            "chrom" => Ok(MethodKind::Chrom),
            "pos" => Ok(MethodKind::Pos),
            other => Err(Error::param(format!("unknown method `{other}` (expected g, chrom or pos)"))),
        }
    }
}

/// A pulse-extraction method with its windowing parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RppgMethod {
    pub kind: MethodKind,
    /// Overlap-add window length in seconds (CHROM and POS only).
    pub window_s: f64,
}

impl RppgMethod {
    pub fn new(kind: MethodKind, window_s: f64) -> Result<Self> {
        if !(window_s > 0.5) {
            return Err(Error::param(format!("method window must exceed 0.5 s, got {window_s}")));
        }
        Ok(Self { kind, window_s })
    }

    /// Method with the window taken from the config.
    pub fn from_config(kind: MethodKind, cfg: &Config) -> Self {
        let window_s = match kind {
            MethodKind::Chrom => cfg.methods.chrom_window_s,
            _ => cfg.methods.pos_window_s,
        };
        Self { kind, window_s }
    }

    fn window_len(&self, fs: f64) -> Result<usize> {
        let n = (self.window_s * fs).round() as usize;
        if n < 8 {
            return Err(Error::param(format!(
                "window of {} s holds {n} samples at {fs} Hz; at least 8 required",
                self.window_s
            )));
        }
        Ok(n)
    }

    pub fn extract(&self, trace: &RgbTrace, cfg: &Config) -> Result<PulseSignal> {
        match self.kind {
            MethodKind::G => g_method(trace, cfg),
            MethodKind::Chrom => chrom(trace, self.window_s, cfg),
            MethodKind::Pos => pos(trace, self.window_s, cfg),
        }
    }
}

/// Output of a pulse-extraction method.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSignal {
    /// Z-normalized pulse waveform (all zeros when `flat`).
    pub ppg: TimeSeries,
    /// The projected signal had no variance; `ppg` is all zeros.
    pub flat: bool,
    /// Windows whose projection was degenerate.
    pub flagged_windows: usize,
    pub total_windows: usize,
    /// SNR of the output around its own spectral peak, when computable.
    pub quality_snr_db: Option<f64>,
    pub low_quality: bool,
}

fn check_duration(trace: &RgbTrace) -> Result<()> {
    if trace.duration() + 1e-9 < MIN_TRACE_S {
        return Err(Error::InsufficientData(format!(
            "trace of {:.3} s is shorter than {MIN_TRACE_S} s",
            trace.duration()
        )));
    }
    Ok(())
}

/// Detrend, band-pass and z-normalize a raw projection.
fn finish(
    raw: TimeSeries,
    flagged_windows: usize,
    total_windows: usize,
    cfg: &Config,
) -> Result<PulseSignal> {
    let band = cfg.methods.pulse_band_hz;
    let filtered = bandpass(&detrend(&raw, cfg.signal.detrend_window_s)?, band[0], band[1])?;
    let (values, flat) = match z_normalize(filtered.values(), cfg.methods.flat_std) {
        Some(v) => (v, false),
        None => (vec![0.0; filtered.len()], true),
    };
    let ppg = filtered.with_values(values)?;
    let quality_snr_db = if flat { None } else { self_snr(&ppg, cfg) };
    let low_quality = flat
        || quality_snr_db.is_none_or(|s| s < cfg.methods.min_quality_snr_db)
        || flagged_windows * 2 > total_windows;
    Ok(PulseSignal {
        ppg,
        flat,
        flagged_windows,
        total_windows,
        quality_snr_db,
        low_quality,
    })
}

fn self_snr(ppg: &TimeSeries, cfg: &Config) -> Option<f64> {
    let band = cfg.vitals.hr_band_hz;
    let psd = periodogram(ppg.values(), ppg.fs()).ok()?;
    let f = band_peak_frequency(&psd, band[0], band[1]).ok()?;
    snr_values(ppg.values(), ppg.fs(), f, band, cfg.vitals.snr_template_hz).ok()
}

/// Green-channel method: the inverted G trace is the pulse estimate.
///
/// Every method's output rises with blood volume, i.e. falls with reflected
/// intensity, so that systolic peaks are maxima.
pub fn g_method(trace: &RgbTrace, cfg: &Config) -> Result<PulseSignal> {
    check_duration(trace)?;
    let inverted = trace.g().iter().map(|v| -v).collect();
    finish(TimeSeries::new(inverted, trace.fs(), trace.t0())?, 0, 1, cfg)
}

/// Channels of one window divided by their window means.
fn normalized_window(trace: &RgbTrace, start: usize, len: usize) -> [Vec<f64>; 3] {
    std::array::from_fn(|c| {
        let seg = &trace.channel(c)[start..start + len];
        let m = mean(seg);
        if m > 0.0 {
            seg.iter().map(|v| v / m).collect()
        } else {
            vec![0.0; len]
        }
    })
}

/// Window start indices with 50% overlap; a final window is aligned to the
/// end of the trace when the regular grid leaves a tail uncovered.
fn half_overlap_starts(n: usize, len: usize) -> Vec<usize> {
    let hop = (len / 2).max(1);
    let mut starts: Vec<usize> = (0..).map(|k| k * hop).take_while(|s| s + len <= n).collect();
    if let Some(&last) = starts.last() {
        if last + len < n {
            starts.push(n - len);
        }
    }
    starts
}

/// Chrominance method with Hann-weighted 50% overlap-add.
pub fn chrom(trace: &RgbTrace, window_s: f64, cfg: &Config) -> Result<PulseSignal> {
    check_duration(trace)?;
    let method = RppgMethod::new(MethodKind::Chrom, window_s)?;
    let len = method.window_len(trace.fs())?.min(trace.len());
    let n = trace.len();
    let weights: Vec<f64> = (0..len)
        .map(|k| (std::f64::consts::PI * (k as f64 + 0.5) / len as f64).sin().powi(2))
        .collect();
    let mut acc = vec![0.0; n];
    let mut wsum = vec![0.0; n];
    let starts = half_overlap_starts(n, len);
    let mut flagged = 0;
    for &start in &starts {
        let [rn, gn, bn] = normalized_window(trace, start, len);
        let x: Vec<f64> = (0..len).map(|k| 3.0 * rn[k] - 2.0 * gn[k]).collect();
        let y: Vec<f64> = (0..len).map(|k| 1.5 * rn[k] + gn[k] - 1.5 * bn[k]).collect();
        let (sx, sy) = (std_pop(&x), std_pop(&y));
        let seg: Vec<f64> = if sy <= ZERO_VARIANCE {
            flagged += 1;
            vec![0.0; len]
        } else {
            let alpha = sx / sy;
            let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - alpha * b).collect();
            let m = mean(&s);
            s.into_iter().map(|v| v - m).collect()
        };
        for k in 0..len {
            acc[start + k] += weights[k] * seg[k];
            wsum[start + k] += weights[k];
        }
    }
    let raw = acc
        .iter()
        .zip(&wsum)
        .map(|(a, w)| if *w > 0.0 { a / w } else { 0.0 })
        .collect();
    finish(TimeSeries::new(raw, trace.fs(), trace.t0())?, flagged, starts.len(), cfg)
}

/// Plane-orthogonal-to-skin method with stride-1 overlap-add. The projection
/// yields the pulse with intensity polarity; it is negated on accumulation.
pub fn pos(trace: &RgbTrace, window_s: f64, cfg: &Config) -> Result<PulseSignal> {
    check_duration(trace)?;
    let method = RppgMethod::new(MethodKind::Pos, window_s)?;
    let len = method.window_len(trace.fs())?.min(trace.len());
    let n = trace.len();
    let mut acc = vec![0.0; n];
    let mut flagged = 0;
    let total = n - len + 1;
    for start in 0..total {
        let [rn, gn, bn] = normalized_window(trace, start, len);
        let s1: Vec<f64> = (0..len).map(|k| gn[k] - bn[k]).collect();
        let s2: Vec<f64> = (0..len).map(|k| gn[k] + bn[k] - 2.0 * rn[k]).collect();
        let sd2 = std_pop(&s2);
        let alpha = if sd2 <= ZERO_VARIANCE {
            flagged += 1;
            0.0
        } else {
            std_pop(&s1) / sd2
        };
        let h: Vec<f64> = s1.iter().zip(&s2).map(|(a, b)| a + alpha * b).collect();
        let m = mean(&h);
        for (slot, v) in acc[start..start + len].iter_mut().zip(&h) {
            *slot -= v - m;
        }
    }
    finish(TimeSeries::new(acc, trace.fs(), trace.t0())?, flagged, total, cfg)
}
