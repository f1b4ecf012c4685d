//! Welch power spectral density and band-limited peak search.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};

/// One-sided PSD estimate on a regular frequency grid.
#[derive(Debug, Clone)]
pub struct Psd {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    pub df: f64,
    pub segments: usize,
}

impl Psd {
    /// Indices of bins whose frequency lies in `[lo, hi]`.
    pub fn band_bins(&self, lo: f64, hi: f64) -> impl Iterator<Item = usize> + '_ {
        let eps = self.df * 1e-9;
        (0..self.freqs.len()).filter(move |&k| self.freqs[k] >= lo - eps && self.freqs[k] <= hi + eps)
    }

    /// Rectangle-rule power integral over `[lo, hi)`.
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        let eps = self.df * 1e-9;
        self.freqs
            .iter()
            .zip(&self.power)
            .filter(|(f, _)| **f >= lo - eps && **f < hi - eps)
            .map(|(_, p)| p * self.df)
            .sum()
    }
}

fn hann_periodic(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / n as f64).cos())
        .collect()
}

/// Welch estimate with Hann-windowed, mean-removed segments of
/// `segment_len` samples and 50% overlap. Signals shorter than one segment
/// are analysed as a single full-length segment.
pub fn welch(x: &[f64], fs: f64, segment_len: usize) -> Result<Psd> {
    if x.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "spectral estimate needs at least 4 samples, got {}",
            x.len()
        )));
    }
    let nseg = segment_len.clamp(4, x.len());
    let hop = (nseg / 2).max(1);
    let window = hann_periodic(nseg);
    let win_power: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(nseg);
    let nbins = nseg / 2 + 1;
    let mut power = vec![0.0; nbins];
    let mut buf = vec![Complex::new(0.0, 0.0); nseg];
    let mut segments = 0;
    let mut start = 0;
    while start + nseg <= x.len() {
        let seg = &x[start..start + nseg];
        let m = seg.iter().sum::<f64>() / nseg as f64;
        for (slot, (v, w)) in buf.iter_mut().zip(seg.iter().zip(&window)) {
            *slot = Complex::new((v - m) * w, 0.0);
        }
        fft.process(&mut buf);
        for (p, c) in power.iter_mut().zip(&buf) {
            *p += c.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let scale = 1.0 / (fs * win_power * segments as f64);
    for (k, p) in power.iter_mut().enumerate() {
        *p *= scale;
        let is_nyquist = nseg.is_multiple_of(2) && k == nseg / 2;
        if k != 0 && !is_nyquist {
            *p *= 2.0;
        }
    }
    let df = fs / nseg as f64;
    Ok(Psd {
        freqs: (0..nbins).map(|k| k as f64 * df).collect(),
        power,
        df,
        segments,
    })
}

/// Single Hann-windowed periodogram over the whole signal.
pub fn periodogram(x: &[f64], fs: f64) -> Result<Psd> {
    welch(x, fs, x.len())
}

/// Frequency of the strongest bin inside `[lo, hi]`, refined by fitting a
/// parabola through the log-power of the peak bin and its two neighbours.
/// The result is clamped to the band.
pub fn band_peak_frequency(psd: &Psd, lo: f64, hi: f64) -> Result<f64> {
    let (k, pk) = psd
        .band_bins(lo, hi)
        .map(|k| (k, psd.power[k]))
        .fold(None, |best: Option<(usize, f64)>, cur| match best {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        })
        .ok_or_else(|| Error::InsufficientData(format!("no spectral bins inside [{lo}, {hi}] Hz")))?;
    if pk <= 1e-12 {
        return Err(Error::NoSignal(format!(
            "peak power {pk:e} inside [{lo}, {hi}] Hz"
        )));
    }
    let mut offset = 0.0;
    if k > 0 && k + 1 < psd.power.len() {
        let (a, b, c) = (psd.power[k - 1], pk, psd.power[k + 1]);
        if a > 0.0 && c > 0.0 {
            let (la, lb, lc) = (a.ln(), b.ln(), c.ln());
            let denom = la - 2.0 * lb + lc;
            if denom < 0.0 {
                offset = (0.5 * (la - lc) / denom).clamp(-0.5, 0.5);
            }
        }
    }
    Ok(((k as f64 + offset) * psd.df).clamp(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(f: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * f * i as f64 / fs).sin()).collect()
    }

    #[test]
    fn welch_parseval_for_white_sine() {
        // a unit sine carries variance 1/2; integrated PSD must match
        let x = sine(3.0, 30.0, 3000);
        let psd = welch(&x, 30.0, 300).unwrap();
        let total: f64 = psd.power.iter().sum::<f64>() * psd.df;
        assert!((total - 0.5).abs() < 0.01, "total power {total}");
        assert_eq!(psd.segments, 19);
    }

    #[test]
    fn peak_interpolation_is_sub_bin() {
        for f in [1.03, 1.17, 1.25, 1.5, 2.21] {
            let x = sine(f, 30.0, 1800);
            let psd = welch(&x, 30.0, 300).unwrap();
            let est = band_peak_frequency(&psd, 0.66, 4.0).unwrap();
            assert!((est - f).abs() < 0.01, "f={f} est={est}");
        }
    }

    #[test]
    fn flat_spectrum_is_no_signal() {
        let psd = welch(&[0.0; 600], 30.0, 300).unwrap();
        assert!(matches!(band_peak_frequency(&psd, 0.66, 4.0), Err(Error::NoSignal(_))));
    }
}
