//! Handcrafted rPPG pulse extraction, vitals and HRV estimation, a synthetic
//! ground-truth generator, and a benchmark harness with CSV reports.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod evaluation;
pub mod formats;
pub mod hrv;
pub mod methods;
pub mod report;
pub mod signal;
pub mod spectral;
pub mod synth;
pub mod vitals;

pub use config::Config;
pub use error::{Error, Result};
pub use evaluation::{ChunkRecord, Metric, MetricsRow};
pub use hrv::{HrvMetric, HrvResult, IbiSeries, PeakTrain};
pub use methods::{MethodKind, PulseSignal, RppgMethod};
pub use report::Report;
pub use signal::{RgbTrace, TimeSeries};
pub use synth::SynthSpec;
pub use vitals::RateEstimate;
