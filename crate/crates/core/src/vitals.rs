//! Spectral heart-rate and respiratory-rate estimation, rolling heart rate,
//! and the template SNR waveform-quality metric.

use serde::{Deserialize, Serialize};

use crate::config::VitalsConfig;
use crate::error::{Error, Result};
use crate::signal::TimeSeries;
use crate::spectral::{band_peak_frequency, periodogram, welch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    SpectralPeak,
}

/// A rate in beats (or breaths) per minute together with the band it was
/// searched in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub bpm: f64,
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
    pub method: RateMethod,
}

fn spectral_rate(
    x: &TimeSeries,
    band: [f64; 2],
    segment_s: f64,
    min_duration_s: f64,
) -> Result<RateEstimate> {
    if x.duration() + 1e-9 < min_duration_s {
        return Err(Error::InsufficientData(format!(
            "rate estimate needs {min_duration_s} s, got {:.3} s",
            x.duration()
        )));
    }
    let seg = (segment_s * x.fs()).round() as usize;
    let psd = welch(x.values(), x.fs(), seg)?;
    let f = band_peak_frequency(&psd, band[0], band[1])?;
    Ok(RateEstimate {
        bpm: 60.0 * f,
        band_lo_hz: band[0],
        band_hi_hz: band[1],
        method: RateMethod::SpectralPeak,
    })
}

/// Heart rate from the Welch peak inside the configured pulse band.
pub fn estimate_hr(ppg: &TimeSeries, cfg: &VitalsConfig) -> Result<RateEstimate> {
    spectral_rate(ppg, cfg.hr_band_hz, cfg.hr_segment_s, cfg.hr_min_duration_s)
}

/// Respiratory rate from the Welch peak inside the configured breathing band.
pub fn estimate_rr(resp: &TimeSeries, cfg: &VitalsConfig) -> Result<RateEstimate> {
    spectral_rate(resp, cfg.rr_band_hz, cfg.rr_segment_s, cfg.rr_min_duration_s)
}

/// Per-window spectral heart rate, one value per window center.
///
/// Windows whose estimate fails take the value of the nearest window that
/// succeeded.
pub fn rolling_hr_windows(
    ppg: &TimeSeries,
    window_s: f64,
    step_s: f64,
    band: [f64; 2],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(window_s >= 8.0) || !(step_s > 0.0) {
        return Err(Error::param(format!(
            "rolling window must be >= 8 s and step > 0 (got {window_s}, {step_s})"
        )));
    }
    if ppg.duration() + 1e-9 < window_s {
        return Err(Error::InsufficientData(format!(
            "rolling heart rate needs {window_s} s, got {:.3} s",
            ppg.duration()
        )));
    }
    let fs = ppg.fs();
    let win_n = (window_s * fs).round() as usize + 1;
    let win_n = win_n.min(ppg.len());
    let step_n = ((step_s * fs).round() as usize).max(1);
    let mut centers = Vec::new();
    let mut rates: Vec<Option<f64>> = Vec::new();
    let mut start = 0;
    while start + win_n <= ppg.len() {
        let seg = &ppg.values()[start..start + win_n];
        let rate = welch(seg, fs, win_n)
            .and_then(|psd| band_peak_frequency(&psd, band[0], band[1]))
            .map(|f| 60.0 * f)
            .ok();
        centers.push(ppg.time_at(start) + (win_n - 1) as f64 / (2.0 * fs));
        rates.push(rate);
        start += step_n;
    }
    let valid: Vec<usize> = (0..rates.len()).filter(|&i| rates[i].is_some()).collect();
    if valid.is_empty() {
        return Err(Error::NoSignal("no window produced a heart-rate estimate".into()));
    }
    let filled = (0..rates.len())
        .map(|i| {
            rates[i].unwrap_or_else(|| {
                let nearest = valid
                    .iter()
                    .min_by_key(|&&j| (j as isize - i as isize).unsigned_abs())
                    .expect("non-empty");
                rates[*nearest].expect("valid index")
            })
        })
        .collect();
    Ok((centers, filled))
}

/// Rolling heart rate (bpm) interpolated onto the sample grid of `ppg`.
pub fn rolling_hr(ppg: &TimeSeries, window_s: f64, step_s: f64, cfg: &VitalsConfig) -> Result<TimeSeries> {
    let (centers, rates) = rolling_hr_windows(ppg, window_s, step_s, cfg.hr_band_hz)?;
    let mut j = 0;
    let values = ppg
        .times()
        .map(|t| {
            if t <= centers[0] {
                return rates[0];
            }
            if t >= centers[centers.len() - 1] {
                return rates[rates.len() - 1];
            }
            while centers[j + 1] < t {
                j += 1;
            }
            let frac = (t - centers[j]) / (centers[j + 1] - centers[j]);
            rates[j] + frac * (rates[j + 1] - rates[j])
        })
        .collect();
    ppg.with_values(values)
}

/// Template SNR in dB computed on raw samples: power within `template_hz`
/// of the fundamental `f` and of `2f`, over the remaining power inside the
/// band. Uses a single Hann periodogram of the mean-removed signal.
pub fn snr_values(
    values: &[f64],
    fs: f64,
    ref_hz: f64,
    band: [f64; 2],
    template_hz: f64,
) -> Result<f64> {
    let psd = periodogram(values, fs)?;
    let eps = psd.df * 1e-9;
    let (mut p_template, mut p_rest) = (0.0, 0.0);
    for k in psd.band_bins(band[0], band[1]) {
        let f = psd.freqs[k];
        let near = |c: f64| (f - c).abs() <= template_hz + eps;
        if near(ref_hz) || near(2.0 * ref_hz) {
            p_template += psd.power[k];
        } else {
            p_rest += psd.power[k];
        }
    }
    if !(p_rest > 0.0) {
        return Err(Error::DegenerateSpectrum(
            "no in-band power outside the SNR template".into(),
        ));
    }
    if !(p_template > 0.0) {
        return Err(Error::DegenerateSpectrum("no power inside the SNR template".into()));
    }
    Ok(10.0 * (p_template / p_rest).log10())
}

/// Waveform SNR relative to a reference rate in bpm.
pub fn snr(
    waveform: &TimeSeries,
    ref_rate_bpm: f64,
    band_lo_hz: f64,
    band_hi_hz: f64,
    template_hz: f64,
) -> Result<f64> {
    if waveform.duration() + 1e-9 < 10.0 {
        return Err(Error::InsufficientData(format!(
            "SNR needs 10 s, got {:.3} s",
            waveform.duration()
        )));
    }
    let f = ref_rate_bpm / 60.0;
    if !(f >= band_lo_hz && f <= band_hi_hz) {
        return Err(Error::param(format!(
            "reference rate {ref_rate_bpm} bpm outside [{band_lo_hz}, {band_hi_hz}] Hz"
        )));
    }
    snr_values(waveform.values(), waveform.fs(), f, [band_lo_hz, band_hi_hz], template_hz)
}
