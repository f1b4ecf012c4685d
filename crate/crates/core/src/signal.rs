//! Sampled series types and the DSP primitives every other module builds on:
//! moving-average detrending, zero-phase band-pass filtering, linear
//! resampling and Pearson correlation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rate every trace and reference waveform is resampled to on ingest.
pub const CANONICAL_FS: f64 = 30.0;

/// Uniformly sampled scalar series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    fs: f64,
    t0: f64,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, fs: f64, t0: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("time series must hold at least one sample"));
        }
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::param(format!("sampling rate must be > 0, got {fs}")));
        }
        if !t0.is_finite() {
            return Err(Error::param("t0 must be finite"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("non-finite sample at index {i}")));
        }
        Ok(Self { values, fs, t0 })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Span between first and last sample, `(len - 1) / fs`.
    pub fn duration(&self) -> f64 {
        (self.values.len() - 1) as f64 / self.fs
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.duration()
    }

    pub fn time_at(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.fs
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.time_at(i))
    }

    /// Linearly interpolated value at time `t`, clamped to the end samples.
    pub fn value_at(&self, t: f64) -> f64 {
        let pos = (t - self.t0) * self.fs;
        let last = self.values.len() - 1;
        if pos <= 0.0 {
            return self.values[0];
        }
        if pos >= last as f64 {
            return self.values[last];
        }
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// Same grid, new sample values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::param("replacement values must keep the series length"));
        }
        Self::new(values, self.fs, self.t0)
    }

    /// Sub-series covering `[start, end)` sample indices.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.values.len() {
            return Err(Error::param(format!(
                "slice {start}..{end} out of range for {} samples",
                self.values.len()
            )));
        }
        Self::new(self.values[start..end].to_vec(), self.fs, self.time_at(start))
    }
}

/// Spatially averaged R, G, B intensities of a skin region, one sample per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbTrace {
    r: Vec<f64>,
    g: Vec<f64>,
    b: Vec<f64>,
    fs: f64,
    t0: f64,
}

impl RgbTrace {
    pub fn new(r: Vec<f64>, g: Vec<f64>, b: Vec<f64>, fs: f64, t0: f64) -> Result<Self> {
        if r.len() != g.len() || r.len() != b.len() {
            return Err(Error::param(format!(
                "channel lengths differ: r={}, g={}, b={}",
                r.len(),
                g.len(),
                b.len()
            )));
        }
        if r.len() < 2 {
            return Err(Error::param("RGB trace needs at least two frames"));
        }
        if !(fs.is_finite() && fs > 0.0) || !t0.is_finite() {
            return Err(Error::param(format!("bad sampling rate {fs} or t0 {t0}")));
        }
        for (name, ch) in [("r", &r), ("g", &g), ("b", &b)] {
            if let Some(i) = ch.iter().position(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::param(format!(
                    "channel {name} sample {i} is negative or non-finite"
                )));
            }
        }
        Ok(Self { r, g, b, fs, t0 })
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn duration(&self) -> f64 {
        (self.r.len() - 1) as f64 / self.fs
    }

    pub fn channel(&self, idx: usize) -> &[f64] {
        match idx {
            0 => &self.r,
            1 => &self.g,
            _ => &self.b,
        }
    }

    pub fn green_series(&self) -> Result<TimeSeries> {
        TimeSeries::new(self.g.clone(), self.fs, self.t0)
    }

    /// Multiplies each channel by a static gain.
    pub fn scaled(&self, gains: [f64; 3]) -> Result<Self> {
        let scale = |ch: &[f64], k: f64| ch.iter().map(|v| v * k).collect::<Vec<_>>();
        Self::new(
            scale(&self.r, gains[0]),
            scale(&self.g, gains[1]),
            scale(&self.b, gains[2]),
            self.fs,
            self.t0,
        )
    }

    /// Resamples all three channels onto a uniform grid at `fs_out`.
    pub fn resample(&self, fs_out: f64) -> Result<Self> {
        let rs = |ch: &[f64]| -> Result<Vec<f64>> {
            Ok(resample(&TimeSeries::new(ch.to_vec(), self.fs, self.t0)?, fs_out)?.into_values())
        };
        Self::new(rs(&self.r)?, rs(&self.g)?, rs(&self.b)?, fs_out, self.t0)
    }
}

// ── Detrending ─────────────────────────────────────────────────────────────

/// Subtracts a centered moving average.
///
/// The averaging window spans `round(window_s * fs) / 2` samples on either side
/// of each sample, so it is always symmetric (odd width); near the edges the
/// window is truncated to the available samples.
pub fn detrend(x: &TimeSeries, window_s: f64) -> Result<TimeSeries> {
    if !(window_s.is_finite() && window_s > 2.0 / x.fs()) {
        return Err(Error::param(format!(
            "detrend window {window_s} s must exceed two sample periods ({} s)",
            2.0 / x.fs()
        )));
    }
    let v = x.values();
    let n = v.len();
    let half = ((window_s * x.fs()).round() as usize / 2).max(1);
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &s in v {
        acc += s;
        prefix.push(acc);
    }
    let out = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let mean = (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64;
            v[i] - mean
        })
        .collect();
    x.with_values(out)
}

// ── Zero-phase band-pass ───────────────────────────────────────────────────

/// Second-order section in transposed direct form II, `a0` normalized to 1.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    fn lowpass(fc: f64, fs: f64, q: f64) -> Self {
        let w0 = 2.0 * std::f64::consts::PI * fc / fs;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        let b0 = (1.0 - cos) / 2.0 / a0;
        Self {
            b: [b0, (1.0 - cos) / a0, b0],
            a: [-2.0 * cos / a0, (1.0 - alpha) / a0],
        }
    }

    fn highpass(fc: f64, fs: f64, q: f64) -> Self {
        let w0 = 2.0 * std::f64::consts::PI * fc / fs;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        let b0 = (1.0 + cos) / 2.0 / a0;
        Self {
            b: [b0, -(1.0 + cos) / a0, b0],
            a: [-2.0 * cos / a0, (1.0 - alpha) / a0],
        }
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// State that makes a constant input `u` produce a constant output.
    fn steady_state(&self, u: f64) -> [f64; 2] {
        let y = self.dc_gain() * u;
        let s2 = self.b[2] * u - self.a[1] * y;
        let s1 = self.b[1] * u - self.a[0] * y + s2;
        [s1, s2]
    }

    fn run(&self, data: &mut [f64], mut s: [f64; 2]) {
        for x in data.iter_mut() {
            let input = *x;
            let y = self.b[0] * input + s[0];
            s[0] = self.b[1] * input - self.a[0] * y + s[1];
            s[1] = self.b[2] * input - self.a[1] * y;
            *x = y;
        }
    }
}

/// Butterworth band-pass as a cascade of biquads (order-4 high-pass followed
/// by order-4 low-pass).
#[derive(Debug, Clone)]
pub struct BandpassDesign {
    sections: Vec<Biquad>,
    pad: usize,
}

const BUTTERWORTH_ORDER: usize = 4;

impl BandpassDesign {
    pub fn new(lo_hz: f64, hi_hz: f64, fs: f64) -> Result<Self> {
        let nyquist = fs / 2.0;
        if !(lo_hz > 0.0 && lo_hz < hi_hz && hi_hz < nyquist) {
            return Err(Error::param(format!(
                "band [{lo_hz}, {hi_hz}] Hz must satisfy 0 < lo < hi < fs/2 = {nyquist}"
            )));
        }
        let mut sections = Vec::with_capacity(BUTTERWORTH_ORDER);
        for k in 0..BUTTERWORTH_ORDER / 2 {
            let theta = std::f64::consts::PI * (2 * k + 1) as f64 / (2 * BUTTERWORTH_ORDER) as f64;
            sections.push(Biquad::highpass(lo_hz, fs, 1.0 / (2.0 * theta.cos())));
        }
        for k in 0..BUTTERWORTH_ORDER / 2 {
            let theta = std::f64::consts::PI * (2 * k + 1) as f64 / (2 * BUTTERWORTH_ORDER) as f64;
            sections.push(Biquad::lowpass(hi_hz, fs, 1.0 / (2.0 * theta.cos())));
        }
        // Reflection padding of ~3 time constants of the slowest pole.
        let pad = (3.0 * fs / lo_hz).round() as usize;
        Ok(Self { sections, pad })
    }

    fn pass(&self, data: &mut [f64]) {
        let mut u = data[0];
        for sec in &self.sections {
            let zi = sec.steady_state(u);
            sec.run(data, zi);
            u *= sec.dc_gain();
        }
    }

    /// Forward-backward application on an odd-reflected extension of `x`.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n < 2 {
            return x.to_vec();
        }
        let pad = self.pad.min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));
        self.pass(&mut ext);
        ext.reverse();
        self.pass(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Zero-phase Butterworth band-pass between `lo_hz` and `hi_hz`.
pub fn bandpass(x: &TimeSeries, lo_hz: f64, hi_hz: f64) -> Result<TimeSeries> {
    let design = BandpassDesign::new(lo_hz, hi_hz, x.fs())?;
    x.with_values(design.filtfilt(x.values()))
}

// ── Resampling ─────────────────────────────────────────────────────────────

/// Linear-interpolation resample onto a uniform grid at `fs_out` that starts
/// at `t0` and holds `floor(duration * fs_out) + 1` samples.
pub fn resample(x: &TimeSeries, fs_out: f64) -> Result<TimeSeries> {
    if !(fs_out.is_finite() && fs_out > 0.0) {
        return Err(Error::param(format!("output rate must be > 0, got {fs_out}")));
    }
    if fs_out == x.fs() {
        return Ok(x.clone());
    }
    let n_out = (x.duration() * fs_out + 1e-9).floor() as usize + 1;
    let values = (0..n_out)
        .map(|k| x.value_at(x.t0() + k as f64 / fs_out))
        .collect();
    TimeSeries::new(values, fs_out, x.t0())
}

/// Interpolates irregularly timestamped samples onto a uniform grid starting
/// at `times[0]`.
pub fn resample_timestamps(times: &[f64], values: &[f64], fs_out: f64) -> Result<TimeSeries> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::param("need at least two timestamped samples"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("timestamps must be strictly increasing"));
    }
    let t0 = times[0];
    let span = times[times.len() - 1] - t0;
    let n_out = (span * fs_out + 1e-6).floor() as usize + 1;
    let mut j = 0;
    let out = (0..n_out)
        .map(|k| {
            let t = t0 + k as f64 / fs_out;
            while j + 2 < times.len() && times[j + 1] < t {
                j += 1;
            }
            let (ta, tb) = (times[j], times[j + 1]);
            let frac = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
            values[j] + frac * (values[j + 1] - values[j])
        })
        .collect();
    TimeSeries::new(out, fs_out, t0)
}

// ── Statistics ─────────────────────────────────────────────────────────────

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population standard deviation (divisor `n`).
pub fn std_pop(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Sample Pearson correlation.
pub fn pearson_r(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::param(format!(
            "correlation inputs differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InsufficientData("correlation needs at least two samples".into()));
    }
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return Err(Error::UndefinedCorrelation("input has zero variance".into()));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Zero-mean, unit-variance copy of `x`. Returns `None` when the standard
/// deviation is at or below `min_std`.
pub fn z_normalize(x: &[f64], min_std: f64) -> Option<Vec<f64>> {
    let m = mean(x);
    let s = std_pop(x);
    if !(s > min_std) {
        return None;
    }
    let mut out: Vec<f64> = x.iter().map(|v| (v - m) / s).collect();
    // second pass removes the residual rounding bias of the first
    let m2 = mean(&out);
    out.iter_mut().for_each(|v| *v -= m2);
    Some(out)
}
