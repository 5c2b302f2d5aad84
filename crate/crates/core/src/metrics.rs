//! Fidelity metrics: MSE and SSIM on rendered frames, EMD on temporal mass.

use std::io::Write;

use crate::calibration::TransformKind;
use crate::events::EventWindow;
use crate::pruning::WindowDescriptor;
use crate::reconstruct::{frame_from_signals, reconstruct_descriptor, render_original_frame, Frame, TimeGrid};
use crate::{Error, Result};

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub mse: f64,
    pub ssim: f64,
    pub emd: f64,
}

fn check_shapes(a: &Frame, b: &Frame) -> Result<()> {
    if a.height() != b.height() || a.width() != b.width() {
        return Err(Error::contract(format!(
            "frame shapes differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Mean squared error after scaling both frames by `max(1, max|a|)`.
pub fn mse(a: &Frame, b: &Frame) -> Result<f64> {
    check_shapes(a, b)?;
    if a.data().is_empty() {
        return Ok(0.0);
    }
    let scale = a.max_abs().max(1.0);
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| {
            let d = (x - y) / scale;
            d * d
        })
        .sum();
    Ok(sum / a.data().len() as f64)
}

/// Normalized 1-D Gaussian taps.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let center = (size as f64 - 1.0) / 2.0;
    let taps: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - center;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / total).collect()
}

/// Separable "valid" filtering: output is `(h - k + 1) × (w - k + 1)`.
fn filter_valid(data: &[f64], height: usize, width: usize, kernel: &[f64]) -> Vec<f64> {
    let k = kernel.len();
    let (oh, ow) = (height - k + 1, width - k + 1);
    let mut rows = vec![0.0; height * ow];
    for y in 0..height {
        let row = &data[y * width..(y + 1) * width];
        for x in 0..ow {
            rows[y * ow + x] = kernel.iter().zip(&row[x..x + k]).map(|(w, v)| w * v).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = kernel.iter().enumerate().map(|(i, w)| w * rows[(y + i) * ow + x]).sum();
        }
    }
    out
}

/// Mean SSIM over all 11×11 Gaussian windows (σ = 1.5) fully inside the frame.
///
/// The dynamic range is `max(1, max|a|, max|b|)`.
pub fn ssim(a: &Frame, b: &Frame) -> Result<f64> {
    check_shapes(a, b)?;
    let (h, w) = (a.height(), a.width());
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::config(format!(
            "SSIM needs frames of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {w}x{h}"
        )));
    }
    let range = a.max_abs().max(b.max_abs()).max(1.0);
    let c1 = (SSIM_K1 * range).powi(2);
    let c2 = (SSIM_K2 * range).powi(2);
    let kernel = gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA);

    let (xa, xb) = (a.data(), b.data());
    let aa: Vec<f64> = xa.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = xb.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = xa.iter().zip(xb).map(|(x, y)| x * y).collect();

    let mu_a = filter_valid(xa, h, w, &kernel);
    let mu_b = filter_valid(xb, h, w, &kernel);
    let e_aa = filter_valid(&aa, h, w, &kernel);
    let e_bb = filter_valid(&bb, h, w, &kernel);
    let e_ab = filter_valid(&ab, h, w, &kernel);

    let total: f64 = (0..mu_a.len())
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let var_a = e_aa[i] - ma * ma;
            let var_b = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2))
        })
        .sum();
    Ok(total / mu_a.len() as f64)
}

/// Non-negative mass over `G` equal bins of normalized time.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalHistogram {
    masses: Vec<f64>,
}

impl TemporalHistogram {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::validation(None, "histogram needs at least one bin"));
        }
        if let Some(i) = masses.iter().position(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::validation(i, format!("bin mass {} is not finite and non-negative", masses[i])));
        }
        Ok(TemporalHistogram { masses })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }
}

/// 1-D Wasserstein-1 distance between unit-normalized histograms, in
/// normalized-time units: `Σ_g |CDF_a(g) - CDF_b(g)| / G`.
pub fn emd_temporal(original: &TemporalHistogram, reconstructed: &TemporalHistogram) -> Result<f64> {
    if original.bins() != reconstructed.bins() {
        return Err(Error::contract(format!(
            "histograms have {} and {} bins",
            original.bins(),
            reconstructed.bins()
        )));
    }
    let (ta, tb) = (original.total(), reconstructed.total());
    match (ta > 0.0, tb > 0.0) {
        (false, false) => return Ok(0.0),
        (true, false) | (false, true) => {
            return Err(Error::UndefinedMetric(format!(
                "EMD between a histogram of mass {ta} and one of mass {tb}"
            )))
        }
        (true, true) => {}
    }
    let bins = original.bins();
    let (mut cdf_a, mut cdf_b, mut dist) = (0.0, 0.0, 0.0);
    for (ma, mb) in original.masses().iter().zip(reconstructed.masses()) {
        cdf_a += ma / ta;
        cdf_b += mb / tb;
        dist += (cdf_a - cdf_b).abs();
    }
    Ok(dist / bins as f64)
}

/// MSE/SSIM between the net-polarity frame and the reconstructed frame, and
/// EMD between event counts per time bin and rectified reconstructed signal
/// mass per time bin, both pooled over all pixels.
pub fn evaluate_window(window: &EventWindow, descriptor: &WindowDescriptor, grid: TimeGrid) -> Result<MetricsReport> {
    if window.geometry() != descriptor.geometry() {
        return Err(Error::contract(format!(
            "window geometry {} does not match descriptor geometry {}",
            window.geometry(),
            descriptor.geometry()
        )));
    }
    if window.duration() != descriptor.meta().duration {
        return Err(Error::contract("window and descriptor durations differ"));
    }
    let signals = reconstruct_descriptor(descriptor, grid)?;
    let original = render_original_frame(window);
    let reconstructed = frame_from_signals(descriptor.geometry(), &signals);

    let mut counts = vec![0.0; grid.samples()];
    for e in window.events() {
        counts[grid.bin(window.normalize_time(e.t))] += 1.0;
    }
    let mut mass = vec![0.0; grid.samples()];
    for (_, signal) in &signals {
        for (m, s) in mass.iter_mut().zip(&signal.samples) {
            *m += s.abs();
        }
    }
    Ok(MetricsReport {
        mse: mse(&original, &reconstructed)?,
        ssim: ssim(&original, &reconstructed)?,
        emd: emd_temporal(&TemporalHistogram::new(counts)?, &TemporalHistogram::new(mass)?)?,
    })
}

pub const METRICS_CSV_HEADER: &str = "window_index,transform,M,mse,ssim,emd";

/// One metrics CSV row, without the trailing newline.
pub fn metrics_csv_row(window_index: usize, transform: TransformKind, budget: usize, report: &MetricsReport) -> String {
    format!(
        "{window_index},{transform},{budget},{},{},{}",
        report.mse, report.ssim, report.emd
    )
}

pub fn write_metrics_csv<W: Write>(
    mut out: W,
    rows: &[(usize, TransformKind, usize, MetricsReport)],
) -> std::io::Result<()> {
    writeln!(out, "{METRICS_CSV_HEADER}")?;
    for (i, t, m, r) in rows {
        writeln!(out, "{}", metrics_csv_row(*i, *t, *m, r))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn frame(h: usize, w: usize, mut f: impl FnMut(usize, usize) -> f64) -> Frame {
        let mut fr = Frame::zeros(h, w);
        for y in 0..h {
            for x in 0..w {
                fr.set(x, y, f(x, y));
            }
        }
        fr
    }

    fn random_frame(rng: &mut impl Rng, h: usize, w: usize) -> Frame {
        frame(h, w, |_, _| rng.random_range(-3.0..3.0))
    }

    #[test]
    fn mse_examples() {
        let a = frame(2, 2, |_, _| 1.0);
        let b = Frame::zeros(2, 2);
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(mse(&a, &b).unwrap(), 1.0);
        assert!(matches!(mse(&a, &Frame::zeros(3, 2)), Err(Error::Contract(_))));
    }

    #[test]
    fn mse_matches_two_loop_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let a = random_frame(&mut rng, 7, 9);
            let b = random_frame(&mut rng, 7, 9);
            let mut scale = 1.0f64;
            for y in 0..7 {
                for x in 0..9 {
                    scale = scale.max(a.get(x, y).abs());
                }
            }
            let mut acc = 0.0;
            for y in 0..7 {
                for x in 0..9 {
                    acc += ((a.get(x, y) - b.get(x, y)) / scale).powi(2);
                }
            }
            assert!((mse(&a, &b).unwrap() - acc / 63.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ssim_identity_and_inversion() {
        let a = frame(16, 16, |x, y| ((x * 7 + y * 3) % 5) as f64 - 2.0);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-9);
        let neg = frame(16, 16, |x, y| -a.get(x, y));
        assert!(ssim(&a, &neg).unwrap() < 0.2);
    }

    #[test]
    fn ssim_negated_zero_mean_frame_is_negative() {
        // Gaussian-weighted local means of a checkerboard vanish.
        let a = frame(16, 16, |x, y| if (x + y) % 2 == 0 { 1.0 } else { -1.0 });
        let neg = frame(16, 16, |x, y| -a.get(x, y));
        assert!(ssim(&a, &neg).unwrap() < -0.9);
    }

    #[test]
    fn ssim_rejects_small_frames() {
        let a = Frame::zeros(10, 20);
        assert!(matches!(ssim(&a, &a), Err(Error::Config(_))));
    }

    #[test]
    fn gaussian_kernel_is_normalized_and_symmetric() {
        let k = gaussian_kernel(11, 1.5);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for i in 0..11 {
            assert_eq!(k[i], k[10 - i]);
        }
    }

    fn hist(v: &[f64]) -> TemporalHistogram {
        TemporalHistogram::new(v.to_vec()).unwrap()
    }

    #[test]
    fn emd_examples() {
        let a = hist(&[1.0, 2.0, 0.0, 3.0]);
        assert_eq!(emd_temporal(&a, &a).unwrap(), 0.0);
        let mut first = vec![0.0; 128];
        first[0] = 1.0;
        let mut last = vec![0.0; 128];
        last[127] = 1.0;
        assert!((emd_temporal(&hist(&first), &hist(&last)).unwrap() - 127.0 / 128.0).abs() < 1e-15);
        let zero = hist(&[0.0; 4]);
        assert_eq!(emd_temporal(&zero, &zero).unwrap(), 0.0);
        assert!(matches!(emd_temporal(&a, &zero), Err(Error::UndefinedMetric(_))));
        assert!(TemporalHistogram::new(vec![-1.0]).is_err());
    }

    #[test]
    fn emd_is_scale_invariant() {
        let a = hist(&[1.0, 2.0, 0.0, 3.0]);
        let b = hist(&[0.0, 1.0, 1.0, 1.0]);
        let b10 = hist(&[0.0, 10.0, 10.0, 10.0]);
        assert!((emd_temporal(&a, &b).unwrap() - emd_temporal(&a, &b10).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn csv_row_format() {
        let r = MetricsReport { mse: 0.5, ssim: 1.0, emd: 0.25 };
        assert_eq!(metrics_csv_row(3, TransformKind::Dtft, 16, &r), "3,DTFT,16,0.5,1,0.25");
        let mut buf = Vec::new();
        write_metrics_csv(&mut buf, &[(0, TransformKind::Dct, 8, r)]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "window_index,transform,M,mse,ssim,emd\n0,DCT,8,0.5,1,0.25\n");
    }

    proptest! {
        #[test]
        fn mse_symmetric_for_unit_range(seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = frame(4, 5, |_, _| rng.random_range(-1.0..1.0));
            let b = frame(4, 5, |_, _| rng.random_range(-1.0..1.0));
            prop_assert!((mse(&a, &b).unwrap() - mse(&b, &a).unwrap()).abs() < 1e-15);
            prop_assert_eq!(mse(&a, &a).unwrap(), 0.0);
        }

        #[test]
        fn ssim_bounded(seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = random_frame(&mut rng, 12, 13);
            let b = random_frame(&mut rng, 12, 13);
            prop_assert!(ssim(&a, &b).unwrap().abs() <= 1.0 + 1e-9);
        }

        #[test]
        fn emd_symmetric(a in proptest::collection::vec(0.0f64..5.0, 8), b in proptest::collection::vec(0.0f64..5.0, 8)) {
            prop_assume!(a.iter().sum::<f64>() > 0.0 && b.iter().sum::<f64>() > 0.0);
            let (ha, hb) = (hist(&a), hist(&b));
            prop_assert!((emd_temporal(&ha, &hb).unwrap() - emd_temporal(&hb, &ha).unwrap()).abs() < 1e-12);
        }
    }
}
