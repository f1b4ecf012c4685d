//! Tunable thresholds for the whole pipeline, loadable from TOML or JSON.
//!
//! Every section rejects unknown keys. Missing keys take their defaults, so a
//! partial file is valid; `to_toml_string` always writes the complete tree.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub signal: SignalConfig,
    pub methods: MethodConfig,
    pub vitals: VitalsConfig,
    pub hrv: HrvConfig,
    pub evaluation: EvaluationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalConfig {
    /// Internal rate every input is resampled to.
    pub fs_hz: f64,
    pub detrend_window_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodConfig {
    /// Band applied to every method output before normalization.
    pub pulse_band_hz: [f64; 2],
    pub pos_window_s: f64,
    pub chrom_window_s: f64,
    /// Output std at or below this is treated as a flat (zero) signal.
    pub flat_std: f64,
    /// Self-SNR below this marks the output low-quality.
    pub min_quality_snr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VitalsConfig {
    pub hr_band_hz: [f64; 2],
    pub rr_band_hz: [f64; 2],
    pub hr_segment_s: f64,
    pub rr_segment_s: f64,
    pub hr_min_duration_s: f64,
    pub rr_min_duration_s: f64,
    pub rolling_window_s: f64,
    pub rolling_step_s: f64,
    /// Half-width of the SNR template around the fundamental and 2nd harmonic.
    pub snr_template_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HrvConfig {
    /// Peaks closer than this to either end of the waveform are dropped.
    pub edge_exclusion_s: f64,
    /// Minimum prominence as a multiple of the rolling robust amplitude.
    pub prominence_factor: f64,
    /// Prominence multiple at which the prominence score saturates at 1.
    pub prominence_full: f64,
    pub amplitude_window_s: f64,
    /// Accepted half-prominence width, as a fraction of the expected period.
    pub width_range: [f64; 2],
    /// Sub-range of `width_range` scored 1.
    pub width_full: [f64; 2],
    /// Accepted spacing to the previous peak, as a fraction of the expected period.
    pub distance_range: [f64; 2],
    pub distance_full: [f64; 2],
    pub min_confidence: f64,
    pub ibi_range_ms: [f64; 2],
    /// Maximum relative deviation from the local median IBI.
    pub ibi_relative_tolerance: f64,
    pub ibi_median_neighbors: usize,
    pub max_interpolated_fraction: f64,
    /// Delta degrees of freedom for SDNN (1 = sample estimator).
    pub sdnn_ddof: usize,
    pub tachogram_fs_hz: f64,
    pub lfhf_segment_s: f64,
    pub lf_band_hz: [f64; 2],
    pub hf_band_hz: [f64; 2],
    pub time_domain_min_duration_s: f64,
    pub time_domain_min_beats: usize,
    pub lfhf_min_duration_s: f64,
    pub lfhf_min_beats: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    /// Compare LF/HF on a natural-log scale instead of the raw ratio.
    pub lfhf_log_scale: bool,
    /// Chunk durations outside this range trigger a warning.
    pub expected_duration_s: [f64; 2],
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self {
            fs_hz: crate::signal::CANONICAL_FS,
            detrend_window_s: 2.0,
        }
    }
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self {
            pulse_band_hz: [0.66, 4.0],
            pos_window_s: 1.6,
            chrom_window_s: 1.6,
            flat_std: 1e-9,
            min_quality_snr_db: 0.0,
        }
    }
}

impl Default for VitalsConfig {
    fn default() -> Self {
        Self {
            hr_band_hz: [0.66, 4.0],
            rr_band_hz: [0.066, 0.65],
            hr_segment_s: 10.0,
            rr_segment_s: 20.0,
            hr_min_duration_s: 10.0,
            rr_min_duration_s: 20.0,
            rolling_window_s: 10.0,
            rolling_step_s: 1.0,
            snr_template_hz: 0.1,
        }
    }
}

impl Default for HrvConfig {
    fn default() -> Self {
        Self {
            edge_exclusion_s: 1.0,
            prominence_factor: 0.3,
            prominence_full: 1.0,
            amplitude_window_s: 10.0,
            width_range: [0.08, 0.8],
            width_full: [0.15, 0.65],
            distance_range: [0.5, 1.8],
            distance_full: [0.8, 1.25],
            min_confidence: 0.5,
            ibi_range_ms: [250.0, 2000.0],
            ibi_relative_tolerance: 0.3,
            ibi_median_neighbors: 5,
            max_interpolated_fraction: 0.2,
            sdnn_ddof: 1,
            tachogram_fs_hz: 4.0,
            lfhf_segment_s: 32.0,
            lf_band_hz: [0.04, 0.15],
            hf_band_hz: [0.15, 0.40],
            time_domain_min_duration_s: 20.0,
            time_domain_min_beats: 15,
            lfhf_min_duration_s: 55.0,
            lfhf_min_beats: 30,
        }
    }
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            lfhf_log_scale: false,
            expected_duration_s: [20.0, 60.0],
        }
    }
}

impl Config {
    /// Loads a `.json` file as JSON and anything else as TOML.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let cfg = if is_json {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config tree is always representable as TOML")
    }

    /// Overrides one value addressed by a dotted path, e.g.
    /// `hrv.min_confidence=0.6`. The value is parsed as a TOML literal.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
        let key = key.trim();
        let value: toml::Value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
        let mut tree = toml::Value::try_from(&*self).map_err(|e| Error::Config(e.to_string()))?;
        let mut node = &mut tree;
        let parts: Vec<&str> = key.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let table = node
                .as_table_mut()
                .ok_or_else(|| Error::Config(format!("`{key}` does not address a config value")))?;
            if !table.contains_key(*part) {
                return Err(Error::Config(format!("unknown config key `{key}`")));
            }
            if i + 1 == parts.len() {
                let slot = table.get_mut(*part).expect("checked above");
                // integer literals are accepted where floats are expected
                *slot = match (&*slot, value) {
                    (toml::Value::Float(_), toml::Value::Integer(n)) => toml::Value::Float(n as f64),
                    (_, v) => v,
                };
                break;
            }
            node = table.get_mut(*part).expect("checked above");
        }
        let updated: Self = tree
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("`{key}`: {e}")))?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let band_ok = |b: [f64; 2]| b[0] > 0.0 && b[0] < b[1];
        if !(self.signal.fs_hz > 0.0) {
            return bad(format!("signal.fs_hz must be > 0, got {}", self.signal.fs_hz));
        }
        for (name, band) in [
            ("methods.pulse_band_hz", self.methods.pulse_band_hz),
            ("vitals.hr_band_hz", self.vitals.hr_band_hz),
            ("vitals.rr_band_hz", self.vitals.rr_band_hz),
            ("hrv.lf_band_hz", self.hrv.lf_band_hz),
            ("hrv.hf_band_hz", self.hrv.hf_band_hz),
        ] {
            if !band_ok(band) {
                return bad(format!("{name} must satisfy 0 < lo < hi, got {band:?}"));
            }
        }
        if self.methods.pulse_band_hz[1] >= self.signal.fs_hz / 2.0 {
            return bad("methods.pulse_band_hz exceeds the Nyquist rate".into());
        }
        if !(0.0..=1.0).contains(&self.hrv.min_confidence) {
            return bad(format!("hrv.min_confidence must be in [0, 1], got {}", self.hrv.min_confidence));
        }
        let r = &self.hrv;
        let nested = |outer: [f64; 2], inner: [f64; 2]| {
            outer[0] < outer[1] && outer[0] <= inner[0] && inner[0] <= inner[1] && inner[1] <= outer[1]
        };
        if !nested(r.width_range, r.width_full) || !nested(r.distance_range, r.distance_full) {
            return bad("hrv width/distance full-score ranges must sit inside their accept ranges".into());
        }
        if !(r.ibi_range_ms[0] > 0.0 && r.ibi_range_ms[0] < r.ibi_range_ms[1]) {
            return bad(format!("hrv.ibi_range_ms invalid: {:?}", r.ibi_range_ms));
        }
        if r.ibi_median_neighbors == 0 {
            return bad("hrv.ibi_median_neighbors must be >= 1".into());
        }
        if !(self.vitals.rolling_step_s > 0.0) || !(self.vitals.rolling_window_s >= 8.0) {
            return bad("vitals.rolling_window_s must be >= 8 and rolling_step_s > 0".into());
        }
        if !(self.methods.pos_window_s > 0.5) || !(self.methods.chrom_window_s > 0.5) {
            return bad("method windows must exceed 0.5 s".into());
        }
        Ok(())
    }
}
