use pulsescope::hrv::{clean_ibis, rmssd, sdnn};
use pulsescope::report::{aggregate, bin_terciles};
use pulsescope::signal::{bandpass, detrend, pearson_r, resample, z_normalize};
use pulsescope::*;
use proptest::prelude::*;
use std::collections::BTreeMap;

fn series(v: Vec<f64>) -> TimeSeries {
    TimeSeries::new(v, 30.0, 0.0).unwrap()
}

fn signal(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bandpass_is_linear(x in signal(200..400), seed in any::<u64>(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let y: Vec<f64> = (0..x.len()).map(|i| ((i as u64 ^ seed) % 17) as f64 - 8.0).collect();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let fx = bandpass(&series(x), 0.66, 4.0).unwrap();
        let fy = bandpass(&series(y), 0.66, 4.0).unwrap();
        let fm = bandpass(&series(mix), 0.66, 4.0).unwrap();
        for i in 0..fm.len() {
            let want = a * fx.values()[i] + b * fy.values()[i];
            prop_assert!((fm.values()[i] - want).abs() <= 1e-8 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn pearson_ignores_positive_affine_maps(x in signal(10..100), y in signal(10..100), s in 0.01..100.0f64, c in -50.0..50.0f64) {
        let n = x.len().min(y.len());
        let (x, y) = (&x[..n], &y[..n]);
        prop_assume!(z_normalize(x, 1e-6).is_some() && z_normalize(y, 1e-6).is_some());
        let r = pearson_r(x, y).unwrap();
        let moved: Vec<f64> = x.iter().map(|v| s * v + c).collect();
        let flipped: Vec<f64> = x.iter().map(|v| -s * v + c).collect();
        prop_assert!((pearson_r(&moved, y).unwrap() - r).abs() <= 1e-12);
        prop_assert!((pearson_r(&flipped, y).unwrap() + r).abs() <= 1e-12);
        prop_assert!((-1.0..=1.0).contains(&r));
    }

    #[test]
    fn detrend_removes_any_line_in_the_interior(slope in -5.0..5.0f64, icpt in -100.0..100.0f64, window in 0.5..3.0f64) {
        let x = series((0..300).map(|i| icpt + slope * i as f64).collect());
        let d = detrend(&x, window).unwrap();
        let half = (window * 30.0).round() as usize / 2;
        for v in &d.values()[half..300 - half] {
            prop_assert!(v.abs() < 1e-8);
        }
    }

    // Moving-average subtraction is not a projection, so a second pass is only
    // a no-op where the first one already left zero local mean: away from the
    // edges, for lines plus sinusoids with whole cycles per window.
    #[test]
    fn detrend_is_idempotent_in_the_interior(
        icpt in -50.0..50.0f64,
        slope in -1.0..1.0f64,
        parts in prop::collection::vec((1usize..20, 0.1..5.0f64, 0.0..6.3f64), 1..4),
    ) {
        let width = 61.0;
        let x: Vec<f64> = (0..600)
            .map(|i| {
                let t = i as f64;
                icpt + slope * t + parts.iter().map(|(k, a, ph)| a * (2.0 * std::f64::consts::PI * *k as f64 * t / width + ph).sin()).sum::<f64>()
            })
            .collect();
        let range = x.iter().copied().fold(f64::MIN, f64::max) - x.iter().copied().fold(f64::MAX, f64::min);
        let once = detrend(&series(x), 2.0).unwrap();
        let twice = detrend(&once, 2.0).unwrap();
        for i in 60..540 {
            prop_assert!((once.values()[i] - twice.values()[i]).abs() <= 1e-6 * range);
        }
    }

    #[test]
    fn z_normalize_gives_zero_mean_unit_variance(x in signal(3..200)) {
        if let Some(z) = z_normalize(&x, 1e-9) {
            let m = z.iter().sum::<f64>() / z.len() as f64;
            let v = z.iter().map(|a| (a - m).powi(2)).sum::<f64>() / z.len() as f64;
            prop_assert!(m.abs() < 1e-12);
            prop_assert!((v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn resample_keeps_duration(x in signal(50..300), fs_out in 10.0..60.0f64) {
        let s = series(x);
        let r = resample(&s, fs_out).unwrap();
        prop_assert!((r.duration() - s.duration()).abs() <= 1.0 / fs_out + 1e-9);
    }

    #[test]
    fn clean_ibis_reaches_a_fixed_point(v in prop::collection::vec(300.0..1800.0f64, 5..80)) {
        let cfg = Config::default();
        let s = IbiSeries::from_intervals(v, 0.0).unwrap();
        if let Ok(once) = clean_ibis(&s, &cfg.hrv) {
            let twice = clean_ibis(&once, &cfg.hrv).unwrap();
            prop_assert_eq!(&once.ibis_ms, &twice.ibis_ms);
            prop_assert_eq!(&once.interpolated, &twice.interpolated);
        }
    }

    #[test]
    fn time_domain_metrics_match_definitions(v in prop::collection::vec(300.0..1800.0f64, 3..120)) {
        let s = IbiSeries::from_intervals(v.clone(), 0.0).unwrap();
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let rm = (v.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        prop_assert!((sdnn(&s, 1).unwrap() - sd).abs() <= 1e-9 * sd.max(1.0));
        prop_assert!((rmssd(&s).unwrap() - rm).abs() <= 1e-9 * rm.max(1.0));
    }

    #[test]
    fn time_domain_metrics_ignore_time_shifts(v in prop::collection::vec(300.0..1800.0f64, 3..60), shift in 0.0..1000.0f64) {
        let a = IbiSeries::from_intervals(v.clone(), 0.0).unwrap();
        let b = IbiSeries::from_intervals(v, shift).unwrap();
        prop_assert_eq!(sdnn(&a, 1).unwrap(), sdnn(&b, 1).unwrap());
        prop_assert_eq!(rmssd(&a).unwrap(), rmssd(&b).unwrap());
    }

    #[test]
    fn scaling_ibis_scales_metrics(v in prop::collection::vec(400.0..1200.0f64, 3..60), k in 0.5..1.5f64) {
        let a = IbiSeries::from_intervals(v.clone(), 0.0).unwrap();
        let b = IbiSeries::from_intervals(v.iter().map(|x| x * k).collect(), 0.0).unwrap();
        prop_assert!((sdnn(&b, 1).unwrap() - k * sdnn(&a, 1).unwrap()).abs() < 1e-8);
        prop_assert!((rmssd(&b).unwrap() - k * rmssd(&a).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn terciles_partition_every_participant(scores in prop::collection::vec(0.0..10.0f64, 0..40)) {
        let map: BTreeMap<String, f64> = scores.iter().enumerate().map(|(i, s)| (format!("p{i:02}"), *s)).collect();
        let bins = bin_terciles(&map);
        let n = map.len();
        prop_assert_eq!(bins[0].len(), n.div_ceil(3));
        prop_assert_eq!(bins[0].len() + bins[1].len(), (2 * n).div_ceil(3));
        prop_assert_eq!(bins.iter().map(Vec::len).sum::<usize>(), n);
        let max_low = bins[0].iter().map(|p| map[p]).fold(f64::MIN, f64::max);
        let min_high = bins[2].iter().map(|p| map[p]).fold(f64::MAX, f64::min);
        if !bins[0].is_empty() && !bins[2].is_empty() {
            prop_assert!(max_low <= min_high);
        }
    }

    #[test]
    fn overall_is_bounded_by_participant_means(vals in prop::collection::vec((0usize..6, 0.0..30.0f64), 1..40)) {
        let rows: Vec<MetricsRow> = vals
            .iter()
            .enumerate()
            .map(|(i, (p, v))| MetricsRow {
                chunk_id: format!("c{i}"),
                participant_id: format!("p{p}"),
                hr_mae: Some(*v),
                ..Default::default()
            })
            .collect();
        let r = aggregate(&rows, "m").unwrap();
        let per: Vec<f64> = r.per_individual.values().map(|m| m[&Metric::HrMae]).collect();
        let overall = r.overall.get(Metric::HrMae).unwrap();
        let lo = per.iter().copied().fold(f64::MAX, f64::min);
        let hi = per.iter().copied().fold(f64::MIN, f64::max);
        prop_assert!(overall >= lo - 1e-12 && overall <= hi + 1e-12);
        prop_assert_eq!(r.overall.participants[&Metric::HrMae], per.len());
    }
}
