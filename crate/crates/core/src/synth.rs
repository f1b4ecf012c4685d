//! Synthetic ground truth: IBI sequences with controlled variability, pulse
//! and respiration waveforms rendered from them, and RGB traces with the
//! pulse embedded under noise, channel gain and motion.
//!
//! All randomness derives from `SynthSpec::seed`. Each concern (IBIs, sensor
//! noise, motion) draws from its own ChaCha stream, so changing the noise
//! level does not change the beat sequence.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hrv::{IbiSeries, PeakTrain};
use crate::signal::{z_normalize, RgbTrace, TimeSeries};

/// Skin baseline intensity per channel (R, G, B).
pub const BASELINE_RGB: [f64; 3] = [180.0, 120.0, 100.0];
/// Relative pulse strength per channel (R, G, B). Blood absorbs, so the
/// pulse lowers reflected intensity along this direction.
pub const PULSE_SIGNATURE: [f64; 3] = [0.33, 0.77, 0.53];

const STREAM_IBI: u64 = 1;
const STREAM_NOISE: u64 = 2;
const STREAM_MOTION: u64 = 3;

/// Slow sinusoidal modulation of the IBI sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Modulation {
    pub freq_hz: f64,
    pub amp_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub mean_hr_bpm: f64,
    /// SDNN of the generating process; jitter fills what the modulations leave.
    pub sdnn_target_ms: f64,
    pub lf_mod: Modulation,
    pub hf_mod: Modulation,
    pub rr_bpm: f64,
    pub duration_s: f64,
    /// Std of additive white noise per channel, in intensity units.
    pub noise_sigma: f64,
    pub channel_gains: [f64; 3],
    /// Random-walk motion scale, intensity units per sqrt(second).
    pub motion_amp: f64,
    /// Pulse amplitude as a fraction of the channel baseline.
    pub pulse_strength: f64,
    pub dicrotic: bool,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            mean_hr_bpm: 72.0,
            sdnn_target_ms: 0.0,
            lf_mod: Modulation { freq_hz: 0.1, amp_ms: 0.0 },
            hf_mod: Modulation { freq_hz: 0.25, amp_ms: 0.0 },
            rr_bpm: 15.0,
            duration_s: 60.0,
            noise_sigma: 0.0,
            channel_gains: [1.0; 3],
            motion_amp: 0.0,
            pulse_strength: 0.01,
            dicrotic: true,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn mean_ibi_ms(&self) -> f64 {
        60_000.0 / self.mean_hr_bpm
    }

    /// Std of the white jitter that tops the modulations up to the SDNN target.
    pub fn jitter_sigma_ms(&self) -> Result<f64> {
        let modulated = (self.lf_mod.amp_ms.powi(2) + self.hf_mod.amp_ms.powi(2)) / 2.0;
        let remaining = self.sdnn_target_ms.powi(2) - modulated;
        if remaining < -1e-9 {
            return Err(Error::param(format!(
                "modulation amplitudes already exceed the SDNN target of {} ms",
                self.sdnn_target_ms
            )));
        }
        Ok(remaining.max(0.0).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::param(format!("duration must be > 0, got {}", self.duration_s)));
        }
        if !(30.0..=240.0).contains(&self.mean_hr_bpm) {
            return Err(Error::param(format!("mean HR {} outside [30, 240] bpm", self.mean_hr_bpm)));
        }
        let amps = [
            self.sdnn_target_ms,
            self.lf_mod.amp_ms,
            self.hf_mod.amp_ms,
            self.noise_sigma,
            self.motion_amp,
            self.pulse_strength,
        ];
        if amps.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
            return Err(Error::param("amplitudes must be finite and non-negative"));
        }
        if self.channel_gains.iter().any(|g| !(*g > 0.0)) {
            return Err(Error::param("channel gains must be positive"));
        }
        if 4.0 * self.sdnn_target_ms >= self.mean_ibi_ms() {
            return Err(Error::param(format!(
                "SDNN target {} ms is too large for a mean IBI of {:.1} ms",
                self.sdnn_target_ms,
                self.mean_ibi_ms()
            )));
        }
        self.jitter_sigma_ms()?;
        Ok(())
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// IBI sequence: mean interval plus LF and HF sinusoids plus white jitter.
///
/// The first beat falls at a random phase inside the first mean interval and
/// beats continue until the cumulative time reaches `duration_s`.
pub fn synth_ibis(spec: &SynthSpec) -> Result<IbiSeries> {
    spec.validate()?;
    let mut r = rng(spec.seed, STREAM_IBI);
    let jitter = spec.jitter_sigma_ms()?;
    let mean = spec.mean_ibi_ms();
    let phase_lf = r.random::<f64>() * 2.0 * PI;
    let phase_hf = r.random::<f64>() * 2.0 * PI;
    let mut t = r.random::<f64>() * mean / 1000.0;
    let mut ibis = Vec::new();
    let mut onsets = Vec::new();
    while t < spec.duration_s {
        let z: f64 = StandardNormal.sample(&mut r);
        let ibi = mean
            + spec.lf_mod.amp_ms * (2.0 * PI * spec.lf_mod.freq_hz * t + phase_lf).sin()
            + spec.hf_mod.amp_ms * (2.0 * PI * spec.hf_mod.freq_hz * t + phase_hf).sin()
            + jitter * z;
        onsets.push(t);
        ibis.push(ibi);
        t += ibi / 1000.0;
    }
    IbiSeries::new(ibis, onsets)
}

/// One cardiac cycle between two systolic peaks `interval_s` apart, evaluated
/// `dt` seconds after the first: a squared-cosine decay with an optional
/// dicrotic bump, then a raised-cosine rise over the last 15%.
fn cycle_shape(dt: f64, interval_s: f64, dicrotic: bool) -> f64 {
    let rise = 0.15 * interval_s;
    let decay = interval_s - rise;
    if dt < decay {
        let u = dt / decay;
        let base = (0.5 * (1.0 + (PI * u).cos())).powi(2);
        let bump = if dicrotic {
            0.3 * (-((dt - 0.45 * interval_s) / (0.06 * interval_s)).powi(2)).exp()
        } else {
            0.0
        };
        base + bump
    } else {
        0.5 * (1.0 - (PI * (dt - decay) / rise).cos())
    }
}

/// Renders a z-normalized pulse waveform starting at t = 0 whose systolic
/// peaks sit exactly at the beat times of `ibis`.
pub fn synth_ppg(ibis: &IbiSeries, fs: f64) -> Result<(TimeSeries, PeakTrain)> {
    synth_ppg_shaped(ibis, fs, true)
}

pub fn synth_ppg_shaped(ibis: &IbiSeries, fs: f64, dicrotic: bool) -> Result<(TimeSeries, PeakTrain)> {
    if !(fs >= 10.0) {
        return Err(Error::param(format!("synthetic PPG needs fs >= 10 Hz, got {fs}")));
    }
    if ibis.is_empty() || ibis.onset_times_s[0] < 0.0 {
        return Err(Error::param("IBI series must be non-empty and start at t >= 0"));
    }
    let n_int = ibis.len();
    let mut beats = Vec::with_capacity(n_int + 2);
    beats.push(ibis.onset_times_s[0] - ibis.ibis_ms[0] / 1000.0);
    beats.extend_from_slice(&ibis.onset_times_s);
    let end = ibis.onset_times_s[n_int - 1] + ibis.ibis_ms[n_int - 1] / 1000.0;
    beats.push(end);
    beats.push(end + ibis.ibis_ms[n_int - 1] / 1000.0);

    let n = (end * fs).ceil() as usize + 1;
    let mut k = 0;
    let raw: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            while beats[k + 1] <= t {
                k += 1;
            }
            cycle_shape(t - beats[k], beats[k + 1] - beats[k], dicrotic)
        })
        .collect();
    let values = z_normalize(&raw, 0.0).ok_or_else(|| Error::param("rendered waveform is flat"))?;
    let peaks = PeakTrain::trusted(beats[1..beats.len() - 1].to_vec())?;
    Ok((TimeSeries::new(values, fs, 0.0)?, peaks))
}

/// Subtracts the pulse from per-channel baselines along the blood-volume signature,
/// then white sensor noise and a common-mode random-walk motion artifact.
pub fn embed_in_rgb(ppg: &TimeSeries, spec: &SynthSpec) -> Result<RgbTrace> {
    spec.validate()?;
    let mut noise_rng = rng(spec.seed, STREAM_NOISE);
    let mut motion_rng = rng(spec.seed, STREAM_MOTION);
    let n = ppg.len();
    let step = spec.motion_amp / ppg.fs().sqrt();
    let mut walk = 0.0;
    let motion: Vec<f64> = (0..n)
        .map(|_| {
            let here = walk;
            let z: f64 = StandardNormal.sample(&mut motion_rng);
            walk += step * z;
            here
        })
        .collect();
    let mut channels: [Vec<f64>; 3] = Default::default();
    for (c, ch) in channels.iter_mut().enumerate() {
        let base = BASELINE_RGB[c] * spec.channel_gains[c];
        let pulse = spec.pulse_strength * base * PULSE_SIGNATURE[c];
        *ch = ppg
            .values()
            .iter()
            .zip(&motion)
            .map(|(p, m)| {
                let z: f64 = StandardNormal.sample(&mut noise_rng);
                (base - pulse * p + spec.noise_sigma * z + m).max(0.0)
            })
            .collect();
    }
    let [r, g, b] = channels;
    RgbTrace::new(r, g, b, ppg.fs(), ppg.t0())
}

/// Unit-amplitude respiration sinusoid.
pub fn synth_resp(rr_bpm: f64, duration_s: f64, fs: f64) -> Result<TimeSeries> {
    if !(4.0..=40.0).contains(&rr_bpm) {
        return Err(Error::param(format!("respiratory rate {rr_bpm} outside [4, 40] bpm")));
    }
    if !(duration_s > 0.0) {
        return Err(Error::param(format!("duration must be > 0, got {duration_s}")));
    }
    if !(fs > 0.0) {
        return Err(Error::param(format!("sampling rate must be > 0, got {fs}")));
    }
    let n = (duration_s * fs + 1e-9).floor() as usize + 1;
    let f = rr_bpm / 60.0;
    TimeSeries::new((0..n).map(|i| (2.0 * PI * f * i as f64 / fs).sin()).collect(), fs, 0.0)
}

/// A complete synthetic chunk trimmed to `duration_s`.
#[derive(Debug, Clone)]
pub struct SynthChunk {
    pub trace: RgbTrace,
    pub ppg: TimeSeries,
    pub resp: TimeSeries,
    /// True systolic peaks inside the chunk.
    pub peaks: PeakTrain,
    /// The generating IBI sequence (may extend past the chunk end).
    pub ibis: IbiSeries,
}

/// Generates IBIs, the pulse waveform, respiration and the RGB trace for one
/// chunk of `floor(duration_s * fs) + 1` samples.
pub fn synth_chunk(spec: &SynthSpec, fs: f64) -> Result<SynthChunk> {
    let ibis = synth_ibis(spec)?;
    let (full, peaks) = synth_ppg_shaped(&ibis, fs, spec.dicrotic)?;
    let n = (spec.duration_s * fs + 1e-9).floor() as usize + 1;
    let ppg = full.slice(0, n.min(full.len()))?;
    let t_end = ppg.t_end();
    let kept: Vec<f64> = peaks.times_s.into_iter().filter(|t| *t <= t_end).collect();
    let trace = embed_in_rgb(&ppg, spec)?;
    let resp = synth_resp(spec.rr_bpm, spec.duration_s, fs)?;
    Ok(SynthChunk {
        trace,
        ppg,
        resp,
        peaks: PeakTrain::trusted(kept)?,
        ibis,
    })
}

/// Parameter ranges for a synthetic dataset of many chunks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSpec {
    pub chunks: usize,
    pub participants: usize,
    pub dataset: String,
    pub duration_s: [f64; 2],
    pub mean_hr_bpm: [f64; 2],
    pub sdnn_ms: [f64; 2],
    /// Share of the SDNN variance carried by the LF and HF sinusoids.
    pub lf_variance_share: f64,
    pub hf_variance_share: f64,
    pub lf_hz: [f64; 2],
    pub hf_hz: [f64; 2],
    pub rr_bpm: [f64; 2],
    pub noise_sigma: f64,
    pub motion_amp: [f64; 2],
    /// Per-channel gains are drawn uniformly from this range.
    pub gain_range: [f64; 2],
    pub pulse_strength: f64,
    /// Relative pulse attenuation per Fitzpatrick step above type 1.
    pub skin_attenuation: f64,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            chunks: 10,
            participants: 5,
            dataset: "synth".into(),
            duration_s: [20.0, 60.0],
            mean_hr_bpm: [55.0, 110.0],
            sdnn_ms: [20.0, 80.0],
            lf_variance_share: 0.5,
            hf_variance_share: 0.3,
            lf_hz: [0.08, 0.12],
            hf_hz: [0.2, 0.3],
            rr_bpm: [10.0, 20.0],
            noise_sigma: 0.1,
            motion_amp: [0.0, 0.0],
            gain_range: [0.8, 1.2],
            pulse_strength: 0.01,
            skin_attenuation: 0.0,
            seed: 0,
        }
    }
}

/// One planned chunk of a synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedChunk {
    pub chunk_id: String,
    pub participant_id: String,
    pub skin_type: u8,
    pub spec: SynthSpec,
}

fn uniform(r: &mut ChaCha8Rng, range: [f64; 2]) -> f64 {
    range[0] + (range[1] - range[0]) * r.random::<f64>()
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.chunks == 0 || self.participants == 0 {
            return Err(Error::param("need at least one chunk and one participant"));
        }
        let ranges = [
            ("duration_s", self.duration_s),
            ("mean_hr_bpm", self.mean_hr_bpm),
            ("sdnn_ms", self.sdnn_ms),
            ("lf_hz", self.lf_hz),
            ("hf_hz", self.hf_hz),
            ("rr_bpm", self.rr_bpm),
            ("motion_amp", self.motion_amp),
            ("gain_range", self.gain_range),
        ];
        for (name, r) in ranges {
            if !(r[0] <= r[1] && r[0].is_finite() && r[1].is_finite()) {
                return Err(Error::param(format!("{name}: invalid range [{}, {}]", r[0], r[1])));
            }
        }
        let shares = self.lf_variance_share + self.hf_variance_share;
        if self.lf_variance_share < 0.0 || self.hf_variance_share < 0.0 || shares > 1.0 {
            return Err(Error::param("LF and HF variance shares must be >= 0 and sum to <= 1"));
        }
        if !(0.0..1.0 / 5.0).contains(&self.skin_attenuation) {
            return Err(Error::param("skin attenuation must lie in [0, 0.2)"));
        }
        if !(4.0..=40.0).contains(&self.rr_bpm[0]) || !(4.0..=40.0).contains(&self.rr_bpm[1]) {
            return Err(Error::param("respiratory rates must lie in [4, 40] bpm"));
        }
        Ok(())
    }

    /// Draws every chunk's parameters. Participants keep their mean HR, SDNN
    /// and skin type across chunks; chunk `i` belongs to participant
    /// `i % participants`. All specs are validated before returning.
    pub fn plan(&self) -> Result<Vec<PlannedChunk>> {
        self.validate()?;
        let mut r = rng(self.seed, 0);
        let people: Vec<(f64, f64, u8)> = (0..self.participants)
            .map(|p| {
                let hr = uniform(&mut r, self.mean_hr_bpm);
                let sdnn = uniform(&mut r, self.sdnn_ms);
                (hr, sdnn, (p % 6) as u8 + 1)
            })
            .collect();
        let plan = (0..self.chunks)
            .map(|i| {
                let p = i % self.participants;
                let (hr, sdnn, skin) = people[p];
                let lf_amp = (2.0 * self.lf_variance_share).sqrt() * sdnn;
                let hf_amp = (2.0 * self.hf_variance_share).sqrt() * sdnn;
                let spec = SynthSpec {
                    mean_hr_bpm: hr,
                    sdnn_target_ms: sdnn,
                    lf_mod: Modulation { freq_hz: uniform(&mut r, self.lf_hz), amp_ms: lf_amp },
                    hf_mod: Modulation { freq_hz: uniform(&mut r, self.hf_hz), amp_ms: hf_amp },
                    rr_bpm: uniform(&mut r, self.rr_bpm),
                    duration_s: uniform(&mut r, self.duration_s),
                    noise_sigma: self.noise_sigma,
                    channel_gains: [0; 3].map(|_| uniform(&mut r, self.gain_range)),
                    motion_amp: uniform(&mut r, self.motion_amp),
                    pulse_strength: self.pulse_strength * (1.0 - self.skin_attenuation * f64::from(skin - 1)),
                    dicrotic: true,
                    seed: r.random(),
                };
                spec.validate()?;
                Ok(PlannedChunk {
                    chunk_id: format!("chunk_{i:04}"),
                    participant_id: format!("p{p:03}"),
                    skin_type: skin,
                    spec,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(plan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hrv::{detect_peaks, sdnn};
    use crate::signal::{mean, std_pop};

    fn sample_sdnn(v: &[f64]) -> f64 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    }

    #[test]
    fn constant_ibis_without_variability() {
        let s = synth_ibis(&SynthSpec::default()).unwrap();
        assert!(s.ibis_ms.iter().all(|v| (v - 60_000.0 / 72.0).abs() < 1e-9));
        assert!(sdnn(&s, 1).unwrap() < 1e-9);
        let cum = s.onset_times_s.last().unwrap() + s.ibis_ms.last().unwrap() / 1000.0;
        assert!(cum >= 60.0);
    }

    #[test]
    fn mean_ibi_follows_hr() {
        let spec = SynthSpec { sdnn_target_ms: 30.0, seed: 4, ..Default::default() };
        let s = synth_ibis(&spec).unwrap();
        let m = s.mean_ms();
        let bound = 4.0 * 30.0 / (s.len() as f64).sqrt();
        assert!((m - 833.333).abs() < bound, "{m}");
    }

    #[test]
    fn sdnn_target_reached_over_seeds() {
        for seed in 0..50 {
            let spec = SynthSpec {
                sdnn_target_ms: 50.0,
                lf_mod: Modulation { freq_hz: 0.1, amp_ms: 40.0 },
                hf_mod: Modulation { freq_hz: 0.25, amp_ms: 20.0 },
                duration_s: 300.0,
                seed,
                ..Default::default()
            };
            let s = synth_ibis(&spec).unwrap();
            assert!(s.len() >= 100);
            let sd = sample_sdnn(&s.ibis_ms);
            assert!((sd - 50.0).abs() <= 7.5, "seed {seed}: {sd}");
        }
    }

    #[test]
    fn unreachable_target_rejected() {
        let spec = SynthSpec {
            sdnn_target_ms: 10.0,
            lf_mod: Modulation { freq_hz: 0.1, amp_ms: 40.0 },
            ..Default::default()
        };
        assert!(synth_ibis(&spec).is_err());
        assert!(synth_ibis(&SynthSpec { duration_s: 0.0, ..Default::default() }).is_err());
        assert!(synth_ibis(&SynthSpec { mean_hr_bpm: 250.0, ..Default::default() }).is_err());
    }

    #[test]
    fn ppg_peaks_match_ibis() {
        let ibis = IbiSeries::from_intervals(vec![800.0; 13], 0.3).unwrap();
        let (ppg, peaks) = synth_ppg(&ibis, 30.0).unwrap();
        assert!(mean(ppg.values()).abs() < 1e-9);
        assert!((std_pop(ppg.values()) - 1.0).abs() < 1e-9);
        for (d, ibi) in peaks.times_s.windows(2).map(|w| 1000.0 * (w[1] - w[0])).zip(&ibis.ibis_ms) {
            assert!((d - ibi).abs() < 1e-9);
        }
        assert!(*peaks.times_s.last().unwrap() <= ppg.t_end());
    }

    #[test]
    fn ppg_peaks_are_detectable() {
        let ibis = IbiSeries::from_intervals(vec![800.0; 13], 0.25).unwrap();
        let (ppg, truth) = synth_ppg(&ibis, 30.0).unwrap();
        let ppg = ppg.slice(0, 301).unwrap();
        let inside: Vec<f64> = truth.times_s.iter().copied().filter(|t| *t <= 10.0).collect();
        assert!((11..=13).contains(&inside.len()));
        let hr = ppg.with_values(vec![75.0; ppg.len()]).unwrap();
        let found = detect_peaks(&ppg, &hr, &Default::default()).unwrap();
        for t in &found.times_s {
            let nearest = inside.iter().map(|p| (p - t).abs()).fold(f64::MAX, f64::min);
            assert!(nearest <= 0.033, "{t}");
        }
        let away_from_edges = inside.iter().filter(|t| **t >= 1.0 && **t <= 9.0).count();
        assert_eq!(found.len(), away_from_edges);
    }

    #[test]
    fn seeds_are_deterministic() {
        let spec = SynthSpec {
            sdnn_target_ms: 40.0,
            noise_sigma: 0.5,
            motion_amp: 1.0,
            seed: 99,
            duration_s: 20.0,
            ..Default::default()
        };
        let a = synth_chunk(&spec, 30.0).unwrap();
        let b = synth_chunk(&spec, 30.0).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.ibis, b.ibis);
        let c = synth_chunk(&SynthSpec { seed: 100, ..spec.clone() }, 30.0).unwrap();
        assert_ne!(a.ibis, c.ibis);
        // noise level does not perturb the beat sequence
        let d = synth_chunk(&SynthSpec { noise_sigma: 2.0, ..spec }, 30.0).unwrap();
        assert_eq!(a.ibis, d.ibis);
    }

    #[test]
    fn chunk_length_and_baseline() {
        let spec = SynthSpec { duration_s: 20.0, channel_gains: [1.0, 2.0, 1.0], ..Default::default() };
        let c = synth_chunk(&spec, 30.0).unwrap();
        assert_eq!(c.trace.len(), 601);
        assert_eq!(c.ppg.duration(), 20.0);
        assert!((mean(c.trace.g()) - 240.0).abs() < 0.5);
        assert!((std_pop(c.trace.g()) - 0.01 * 240.0 * 0.77).abs() < 0.05);
    }

    #[test]
    fn dataset_plan_is_deterministic_and_in_range() {
        let ds = DatasetSpec { chunks: 12, participants: 4, seed: 7, ..Default::default() };
        let a = ds.plan().unwrap();
        assert_eq!(a, ds.plan().unwrap());
        assert!(a.iter().all(|c| (20.0..=60.0).contains(&c.spec.duration_s)));
        assert_eq!(a[0].participant_id, a[4].participant_id);
        assert_eq!(a[0].spec.mean_hr_bpm, a[4].spec.mean_hr_bpm);
        assert_ne!(a[0].spec.seed, a[4].spec.seed);
        assert!(DatasetSpec { sdnn_ms: [80.0, 20.0], ..Default::default() }.plan().is_err());
    }

    #[test]
    fn resp_preconditions() {
        assert!(synth_resp(15.0, 0.0, 30.0).is_err());
        assert!(synth_resp(2.0, 10.0, 30.0).is_err());
        assert_eq!(synth_resp(15.0, 60.0, 30.0).unwrap().len(), 1801);
    }
}
