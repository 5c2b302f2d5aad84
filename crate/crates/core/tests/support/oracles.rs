//! Slow, independent reference implementations used by the integration tests.
//!
//! None of these call into `eecvs_core`; they work on plain numbers so that a
//! bug in the library cannot cancel out against the same bug here.
#![allow(dead_code)]

use std::f64::consts::PI;

pub const ORACLE_BINS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Cosine,
    Sinusoid,
    Haar,
}

/// Atom `k` of a family at normalized time `tau`, as `(re, im)`.
///
/// Haar atoms use heap order: 0 is the constant, `p ≥ 1` is scale
/// `floor(log2 p)`, shift `p - 2^scale`.
pub fn atom(family: Family, k: usize, tau: f64) -> (f64, f64) {
    match family {
        Family::Cosine => ((PI * k as f64 * tau).cos(), 0.0),
        Family::Sinusoid => {
            let phase = -2.0 * PI * k as f64 * tau;
            (phase.cos(), phase.sin())
        }
        Family::Haar => {
            if k == 0 {
                return (1.0, 0.0);
            }
            let j = usize::BITS - 1 - k.leading_zeros();
            let m = k - (1 << j);
            let width = 1.0 / (1u64 << j) as f64;
            let lo = m as f64 * width;
            let amp = 2f64.powf(j as f64 / 2.0);
            if tau >= lo && tau < lo + width / 2.0 {
                (amp, 0.0)
            } else if tau >= lo + width / 2.0 && tau < lo + width {
                (-amp, 0.0)
            } else {
                (0.0, 0.0)
            }
        }
    }
}

/// Coefficients `c_k = Σ p_i φ_k(τ_i)` from a signal binned onto `bins` cells.
///
/// Smooth atoms: each impulse is split linearly between the two nearest
/// sample points `g / bins`, and the binned signal is projected onto the
/// sampled atoms. Haar atoms: each impulse lands in its cell `floor(τ·bins)`
/// and the atom is read at the cell centre, which is exact whenever every
/// Haar breakpoint lies on a cell edge.
pub fn dense_binning_coefficients(samples: &[(f64, f64)], family: Family, count: usize, bins: usize) -> Vec<(f64, f64)> {
    let mut signal = vec![0.0; bins + 1];
    for &(tau, p) in samples {
        let u = tau * bins as f64;
        match family {
            Family::Haar => signal[(u.floor() as usize).min(bins - 1)] += p,
            _ => {
                let g = (u.floor() as usize).min(bins - 1);
                let frac = u - g as f64;
                signal[g] += p * (1.0 - frac);
                signal[g + 1] += p * frac;
            }
        }
    }
    let occupied: Vec<(usize, f64)> = signal.iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect();
    (0..count)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for &(g, v) in &occupied {
                let tau = match family {
                    Family::Haar => (g as f64 + 0.5) / bins as f64,
                    _ => g as f64 / bins as f64,
                };
                let (a, b) = atom(family, k, tau);
                re += v * a;
                im += v * b;
            }
            (re, im)
        })
        .collect()
}

/// Largest achievable retained energy over every size-`r` subset.
/// Energies are summed in descending order so equal multisets give equal sums.
pub fn best_subset_energy(energies: &[f64], r: usize) -> f64 {
    let n = energies.len();
    assert!(n <= 20 && r <= n);
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != r {
            continue;
        }
        let chosen: Vec<f64> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| energies[i]).collect();
        best = best.max(sorted_sum(chosen));
    }
    best
}

pub fn sorted_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| b.total_cmp(a));
    values.iter().sum()
}

/// Mean SSIM over every 11×11 window fully inside the frames, each window's
/// statistics weighted directly by the 2-D Gaussian. Frames are row-major.
pub fn ssim_direct(a: &[f64], b: &[f64], height: usize, width: usize) -> f64 {
    const WIN: usize = 11;
    const SIGMA: f64 = 1.5;
    let range = a.iter().chain(b).fold(1.0f64, |m, v| m.max(v.abs()));
    let c1 = (0.01 * range).powi(2);
    let c2 = (0.03 * range).powi(2);
    let centre = (WIN - 1) as f64 / 2.0;
    let mut weights = vec![0.0; WIN * WIN];
    for i in 0..WIN {
        for j in 0..WIN {
            let d2 = (i as f64 - centre).powi(2) + (j as f64 - centre).powi(2);
            weights[i * WIN + j] = (-d2 / (2.0 * SIGMA * SIGMA)).exp();
        }
    }
    let norm: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= norm);

    let mut total = 0.0;
    let mut windows = 0;
    for y0 in 0..=height - WIN {
        for x0 in 0..=width - WIN {
            let (mut ma, mut mb) = (0.0, 0.0);
            for i in 0..WIN {
                for j in 0..WIN {
                    let w = weights[i * WIN + j];
                    ma += w * a[(y0 + i) * width + x0 + j];
                    mb += w * b[(y0 + i) * width + x0 + j];
                }
            }
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for i in 0..WIN {
                for j in 0..WIN {
                    let w = weights[i * WIN + j];
                    let da = a[(y0 + i) * width + x0 + j] - ma;
                    let db = b[(y0 + i) * width + x0 + j] - mb;
                    va += w * da * da;
                    vb += w * db * db;
                    cov += w * da * db;
                }
            }
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            windows += 1;
        }
    }
    total / windows as f64
}

/// Optimal transport cost between two histograms rescaled to unit mass, with
/// ground distance `|i - j| / bins`, solved as a min-cost flow by successive
/// shortest paths (Bellman-Ford on the residual graph).
pub fn emd_transport(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    assert_eq!(n, b.len());
    let (ta, tb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    // Nodes: source 0, supplies 1..=n, demands n+1..=2n, sink 2n+1.
    let nodes = 2 * n + 2;
    let (source, sink) = (0, 2 * n + 1);
    struct Edge {
        to: usize,
        cap: f64,
        cost: f64,
    }
    let mut edges: Vec<Edge> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let add = |edges: &mut Vec<Edge>, adj: &mut Vec<Vec<usize>>, from: usize, to: usize, cap: f64, cost: f64| {
        adj[from].push(edges.len());
        edges.push(Edge { to, cap, cost });
        adj[to].push(edges.len());
        edges.push(Edge { to: from, cap: 0.0, cost: -cost });
    };
    for i in 0..n {
        add(&mut edges, &mut adj, source, 1 + i, a[i] / ta, 0.0);
        add(&mut edges, &mut adj, 1 + n + i, sink, b[i] / tb, 0.0);
        for j in 0..n {
            let d = (i as f64 - j as f64).abs() / n as f64;
            add(&mut edges, &mut adj, 1 + i, 1 + n + j, f64::INFINITY, d);
        }
    }
    let eps = 1e-15;
    let mut cost = 0.0;
    loop {
        let mut dist = vec![f64::INFINITY; nodes];
        let mut via: Vec<Option<usize>> = vec![None; nodes];
        dist[source] = 0.0;
        for _ in 0..nodes {
            let mut changed = false;
            for u in 0..nodes {
                if dist[u].is_infinite() {
                    continue;
                }
                for &e in &adj[u] {
                    let edge = &edges[e];
                    if edge.cap > eps && dist[u] + edge.cost < dist[edge.to] - 1e-18 {
                        dist[edge.to] = dist[u] + edge.cost;
                        via[edge.to] = Some(e);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[sink].is_infinite() {
            break;
        }
        let mut push = f64::INFINITY;
        let mut v = sink;
        while let Some(e) = via[v] {
            push = push.min(edges[e].cap);
            v = edges[e ^ 1].to;
        }
        let mut v = sink;
        while let Some(e) = via[v] {
            edges[e].cap -= push;
            edges[e ^ 1].cap += push;
            cost += push * edges[e].cost;
            v = edges[e ^ 1].to;
        }
    }
    cost
}
