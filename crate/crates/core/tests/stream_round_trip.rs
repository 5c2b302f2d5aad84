use eecvs_core::io::{decode_descriptor, emulate, encode_descriptor, read_descriptor, write_descriptor, EmulatorConfig, Pattern};
use eecvs_core::metrics::evaluate_window;
use eecvs_core::pipeline::{compress_stream, monitor_summary, windowize};
use eecvs_core::pruning::to_dense_tensor;
use eecvs_core::reconstruct::{render_original_frame, render_reconstructed_frame};
use eecvs_core::{DensityThresholds, EventWindow, PipelineConfig, RetentionPolicy, SensorGeometry, TimeGrid, TransformKind};

fn stream() -> (Vec<eecvs_core::Event>, SensorGeometry) {
    let g = SensorGeometry::new(40, 30).unwrap();
    let mut events = emulate(&EmulatorConfig::new(g, 0.3, 15.0, 21).with_pattern(Pattern::MovingEdge, 120.0)).unwrap();
    events.extend(emulate(&EmulatorConfig { t_start: 0.3, ..EmulatorConfig::new(g, 0.3, 300.0, 22) }).unwrap());
    (events, g)
}

#[test]
fn calibrated_stream_uses_every_regime_and_survives_files() {
    let (events, g) = stream();
    let windows = windowize(&events, 0.033, g).unwrap();
    let th = DensityThresholds::calibrate(&windows.iter().map(EventWindow::density).collect::<Vec<_>>()).unwrap();
    let (descriptors, log) = compress_stream(&events, g, &PipelineConfig::default(), Some(th)).unwrap();
    assert_eq!(descriptors.len(), windows.len());
    let summary = monitor_summary(&log);
    assert!(summary.regime_counts.iter().all(|&c| c > 0), "{:?}", summary.regime_counts);

    let dir = tempfile::tempdir().unwrap();
    for (i, d) in descriptors.iter().enumerate() {
        assert!(d.pixels().iter().all(|p| p.retained.len() <= 16));
        let path = dir.path().join(format!("{i}.eecv"));
        write_descriptor(d, &path).unwrap();
        let back = read_descriptor(&path).unwrap();
        // Values pass through f32; the structure is unchanged.
        assert_eq!(back.transform(), d.transform());
        assert_eq!(back.pixels().len(), d.pixels().len());
        assert_eq!(encode_descriptor(&back).unwrap(), encode_descriptor(&decode_descriptor(&encode_descriptor(d).unwrap()).unwrap()).unwrap());
        let report = evaluate_window(&windows[i], &back, TimeGrid::default()).unwrap();
        assert!(report.mse >= 0.0 && report.ssim <= 1.0 + 1e-9 && report.emd >= 0.0);
    }
}

#[test]
fn full_dct_retention_reproduces_net_polarity_frames() {
    let (events, g) = stream();
    let config = PipelineConfig {
        policy: RetentionPolicy::new(64).unwrap(),
        force_transform: Some(TransformKind::Dct),
        ..PipelineConfig::default()
    };
    let (descriptors, _) = compress_stream(&events, g, &config, None).unwrap();
    let windows = windowize(&events, 0.033, g).unwrap();
    for (w, d) in windows.iter().zip(&descriptors) {
        let a = render_original_frame(w);
        let b = render_reconstructed_frame(d, TimeGrid::default()).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-9);
        }
        let report = evaluate_window(w, d, TimeGrid::default()).unwrap();
        assert!(report.mse < 1e-20);
        assert!((report.ssim - 1.0).abs() < 1e-9);
    }
}

#[test]
fn dense_tensor_channels_follow_descriptor_order() {
    let (events, g) = stream();
    let config = PipelineConfig {
        force_transform: Some(TransformKind::Dtft),
        ..PipelineConfig::default()
    };
    let (descriptors, _) = compress_stream(&events, g, &config, None).unwrap();
    let d = &descriptors[2];
    let t = to_dense_tensor(d);
    assert_eq!((t.height, t.width, t.channels), (30, 40, 16));
    for p in d.pixels() {
        let fiber = t.fiber(p.pixel.x as usize, p.pixel.y as usize);
        for (m, c) in p.retained.iter().enumerate() {
            assert_eq!(fiber[m], c.value.re);
        }
        assert!(fiber[p.retained.len()..].iter().all(|&v| v == 0.0));
    }
}

#[test]
fn larger_dtft_budget_does_not_raise_mse_on_fifty_event_window() {
    let g = SensorGeometry::new(16, 16).unwrap();
    let events = emulate(&EmulatorConfig::new(g, 0.033, 50.0 / (256.0 * 0.033), 3)).unwrap();
    let w = EventWindow::new(events, 0.0, 0.033, g).unwrap();
    let mse = |m| {
        let d = eecvs_core::pipeline::encode_descriptor(&w, TransformKind::Dtft, 64, RetentionPolicy::new(m).unwrap()).unwrap();
        evaluate_window(&w, &d, TimeGrid::default()).unwrap().mse
    };
    let (m8, m24) = (mse(8), mse(24));
    // Equal retained DC sets give equal MSE up to summation roundoff.
    assert!(m24 <= m8 + 1e-12, "{m24} > {m8}");
}
