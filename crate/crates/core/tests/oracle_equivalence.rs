#[path = "support/oracles.rs"]
mod oracles;

use eecvs_core::metrics::{emd_temporal, ssim, TemporalHistogram};
use eecvs_core::pruning::{prune_magnitude, top_positions};
use eecvs_core::transforms::{accumulate, encode_pixel};
use eecvs_core::{AtomGrid, CoefficientValue, CoefficientVector, Frame, Polarity, TransformKind};
use oracles::Family;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn family(t: TransformKind) -> Family {
    match t {
        TransformKind::Dct => Family::Cosine,
        TransformKind::Dtft => Family::Sinusoid,
        TransformKind::Dwt => Family::Haar,
    }
}

#[test]
fn oracle_transport_moves_unit_mass_one_bin() {
    let a = [1.0, 0.0, 0.0, 0.0];
    let b = [0.0, 1.0, 0.0, 0.0];
    assert!((oracles::emd_transport(&a, &b) - 0.25).abs() < 1e-15);
    assert!(oracles::emd_transport(&a, &a).abs() < 1e-15);
}

#[test]
fn oracle_atoms_match_closed_forms() {
    assert_eq!(oracles::atom(Family::Haar, 1, 0.25).0, 1.0);
    assert_eq!(oracles::atom(Family::Haar, 1, 0.75).0, -1.0);
    assert_eq!(oracles::atom(Family::Haar, 3, 0.4).0, 0.0);
    assert!((oracles::atom(Family::Haar, 3, 0.6).0 - 2f64.sqrt()).abs() < 1e-15);
    assert!((oracles::atom(Family::Haar, 3, 0.8).0 + 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(oracles::best_subset_energy(&[1.0, 5.0, 3.0], 2), 8.0);
}

#[test]
fn coefficients_match_dense_binning_for_small_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for t in TransformKind::ALL {
        for cc in [1, 2, 8, 16] {
            let grid = AtomGrid::new(t, cc).unwrap();
            for _ in 0..10 {
                let n = rng.random_range(1..50);
                let taus: Vec<f64> = (0..n).map(|_| rng.random()).collect();
                let pols: Vec<Polarity> = (0..n).map(|_| if rng.random_bool(0.5) { Polarity::Positive } else { Polarity::Negative }).collect();
                let samples: Vec<(f64, f64)> = taus.iter().zip(&pols).map(|(&t, p)| (t, p.sign())).collect();
                let want = oracles::dense_binning_coefficients(&samples, family(t), cc, oracles::ORACLE_BINS);
                let direct = encode_pixel(&taus, &pols, &grid).unwrap();
                let mut fast = vec![CoefficientValue::ZERO; cc];
                accumulate(&grid, samples.iter().copied(), &mut fast);
                let scale = want.iter().map(|&(re, im)| re.hypot(im)).fold(0.0, f64::max);
                for k in 0..cc {
                    for got in [direct.values()[k], fast[k]] {
                        let err = (got.re - want[k].0).hypot(got.im - want[k].1);
                        assert!(err <= 1e-6 * scale, "{t} cc={cc} k={k}: {got:?} vs {:?}", want[k]);
                    }
                }
            }
        }
    }
}

#[test]
fn magnitude_pruning_is_exhaustively_optimal_with_ties() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let cc = rng.random_range(1..=10);
        let grid = AtomGrid::new(TransformKind::Dtft, cc).unwrap();
        let values: Vec<CoefficientValue> = (0..cc)
            .map(|_| CoefficientValue::new(rng.random_range(-2i32..=2) as f64, rng.random_range(-2i32..=2) as f64))
            .collect();
        let coeffs = CoefficientVector::from_values(grid, values.clone()).unwrap();
        let energies: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
        for r in 0..=cc {
            let kept = prune_magnitude(&coeffs, r).unwrap();
            let got = oracles::sorted_sum(kept.iter().map(|c| c.value.norm_sqr()).collect());
            let best = if r == 0 { 0.0 } else { oracles::best_subset_energy(&energies, r) };
            assert_eq!(got, best);
            // Among equal moduli the lower grid positions win.
            let positions = top_positions(&values, r);
            for (p, q) in (0..cc).flat_map(|p| (0..cc).map(move |q| (p, q))) {
                if p < q && energies[p] == energies[q] && positions.contains(&q) {
                    assert!(positions.contains(&p), "tie at {p},{q} broke upward");
                }
            }
        }
    }
}

#[test]
fn ssim_matches_sliding_window_oracle_on_rectangles() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (h, w) in [(11, 11), (12, 17), (20, 13)] {
        let a: Vec<f64> = (0..h * w).map(|_| rng.random_range(-5.0..5.0)).collect();
        let b: Vec<f64> = a.iter().map(|v| v * 0.5 + rng.random_range(-1.0..1.0)).collect();
        let got = ssim(&Frame::from_vec(h, w, a.clone()).unwrap(), &Frame::from_vec(h, w, b.clone()).unwrap()).unwrap();
        assert!((got - oracles::ssim_direct(&a, &b, h, w)).abs() < 1e-9);
    }
}

#[test]
fn emd_matches_transport_and_obeys_triangle_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let hist = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..8).map(|_| rng.random_range(0.0..1.0)).collect() };
    for _ in 0..30 {
        let (a, b, c) = (hist(&mut rng), hist(&mut rng), hist(&mut rng));
        let emd = |x: &[f64], y: &[f64]| emd_temporal(&TemporalHistogram::new(x.to_vec()).unwrap(), &TemporalHistogram::new(y.to_vec()).unwrap()).unwrap();
        assert!((emd(&a, &b) - oracles::emd_transport(&a, &b)).abs() < 1e-9);
        assert!((emd(&a, &b) - emd(&b, &a)).abs() < 1e-15);
        assert!(oracles::emd_transport(&a, &c) <= oracles::emd_transport(&a, &b) + oracles::emd_transport(&b, &c) + 1e-12);
    }
}

#[test]
fn two_point_transport_spans_the_window() {
    let mut a = vec![0.0; 128];
    let mut b = vec![0.0; 128];
    a[0] = 1.0;
    b[127] = 1.0;
    let got = emd_temporal(&TemporalHistogram::new(a.clone()).unwrap(), &TemporalHistogram::new(b.clone()).unwrap()).unwrap();
    assert!((got - 127.0 / 128.0).abs() < 1e-12);
    assert!((oracles::emd_transport(&a, &b) - 127.0 / 128.0).abs() < 1e-12);
}
