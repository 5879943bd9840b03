//! Independent reference implementations used as test oracles. These are
//! written from the definitions, not from the library code, and favour
//! obviousness over speed.
#![allow(dead_code)]

use std::collections::BTreeMap;

use orthoview::memory::Classification;
use orthoview::protocol::{EventKind, TeachingEvent};
use orthoview::{PointCloud, View};

/// Covariance of points sampled uniformly over the surface of an
/// axis-aligned box with full side lengths `a`, `b`, `c`, centred at 0.
pub fn box_surface_covariance(a: f64, b: f64, c: f64) -> [f64; 3] {
    let area = 2.0 * (b * c + a * c + a * b);
    let axis = |len: f64, perp_face: f64, other_faces: f64| {
        (2.0 * perp_face * len * len / 4.0 + 2.0 * other_faces * len * len / 12.0) / area
    };
    [
        axis(a, b * c, a * c + a * b),
        axis(b, a * c, b * c + a * b),
        axis(c, a * b, b * c + a * c),
    ]
}

/// Sample covariance (population normalisation).
pub fn sample_covariance(points: &[[f64; 3]]) -> [[f64; 3]; 3] {
    let n = points.len() as f64;
    let mut mean = [0.0; 3];
    for p in points {
        for i in 0..3 {
            mean[i] += p[i] / n;
        }
    }
    let mut cov = [[0.0; 3]; 3];
    for p in points {
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] += (p[i] - mean[i]) * (p[j] - mean[j]) / n;
            }
        }
    }
    cov
}

fn view_axes(view: View) -> (usize, usize, usize) {
    match view {
        View::Front => (1, 2, 0),
        View::Top => (0, 1, 2),
        View::Right => (0, 2, 1),
    }
}

/// Cell that coordinate `u ∈ [-1, 1]` falls into: the half-open interval
/// `[-1 + 2i/n, -1 + 2(i+1)/n)`, with `u = 1` in the last cell.
fn cell_of(u: f64, n: usize) -> usize {
    for i in 0..n {
        let hi = -1.0 + 2.0 * (i + 1) as f64 / n as f64;
        if u < hi {
            return i;
        }
    }
    n - 1
}

/// Brute-force rasterizer: for every cell, scan every point.
pub fn naive_rasterize(canonical: &PointCloud, view: View, width: usize, height: usize) -> Vec<f64> {
    let (h, v, d) = view_axes(view);
    let mut out = vec![0.0; width * height];
    for row in 0..height {
        for col in 0..width {
            let mut nearest: Option<f64> = None;
            for p in canonical.points() {
                let prow = height - 1 - cell_of(p[v], height);
                if prow != row || cell_of(p[h], width) != col {
                    continue;
                }
                let depth = ((p[d] + 1.0) / 2.0).clamp(0.0, 1.0);
                nearest = Some(nearest.map_or(depth, |n: f64| n.min(depth)));
            }
            if let Some(depth) = nearest {
                out[row * width + col] = (1.0 - depth).max(1e-6);
            }
        }
    }
    out
}

/// Block-gradient descriptor in one pass over the grid, accumulating into
/// per-block slots.
pub fn single_loop_block_grad(values: &[f64], width: usize, height: usize, blocks: usize) -> Vec<f64> {
    let (bw, bh) = (width / blocks, height / blocks);
    let mut out = vec![0.0; blocks * blocks * 10];
    let at = |r: usize, c: usize| values[r * width + c];
    for idx in 0..width * height {
        let (r, c) = (idx / width, idx % width);
        let block = (r / bh) * blocks + c / bw;
        let slot = &mut out[block * 10..block * 10 + 10];
        let v = at(r, c);
        slot[0] += v;
        if v > 0.0 {
            slot[1] += 1.0;
        }
        let interior = r > 0 && c > 0 && r < height - 1 && c < width - 1;
        if interior {
            let gx = (at(r, c + 1) - at(r, c - 1)) / 2.0;
            let gy = (at(r + 1, c) - at(r - 1, c)) / 2.0;
            let m = (gx * gx + gy * gy).sqrt();
            if m > 0.0 {
                let turn = (gy.atan2(gx) + std::f64::consts::PI) / std::f64::consts::TAU;
                let bin = ((turn * 8.0).floor() as usize) % 8;
                slot[2 + bin] += m;
            }
        }
    }
    let cells = (bw * bh) as f64;
    out.iter().map(|v| v / cells).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleMetric {
    Euclidean,
    Cosine,
    ChiSquare,
}

pub fn oracle_distance(metric: OracleMetric, f: &[f64], g: &[f64]) -> f64 {
    match metric {
        OracleMetric::Euclidean => f.iter().zip(g).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt(),
        OracleMetric::Cosine => {
            let dot: f64 = f.iter().zip(g).map(|(a, b)| a * b).sum();
            let nf = f.iter().map(|a| a * a).sum::<f64>().sqrt();
            let ng = g.iter().map(|a| a * a).sum::<f64>().sqrt();
            1.0 - dot / (nf * ng)
        }
        OracleMetric::ChiSquare => f
            .iter()
            .zip(g)
            .map(|(a, b)| (a - b).powi(2) / (a.abs() + b.abs() + 1e-12))
            .sum(),
    }
}

/// Linear scan over every stored instance. Returns `(label, distance)` of
/// the nearest instance with ties broken towards the smallest label, or
/// `None` when it is farther than `tau`.
pub fn brute_force_nn(
    stored: &[(String, Vec<f64>)],
    query: &[f64],
    metric: OracleMetric,
    tau: f64,
) -> Option<(String, f64)> {
    let mut all: Vec<(f64, &str)> = stored
        .iter()
        .map(|(l, v)| (oracle_distance(metric, query, v), l.as_str()))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(b.1)));
    let (d, l) = all[0];
    (d <= tau).then(|| (l.to_owned(), d))
}

pub fn classification_matches(got: &Classification, want: &Option<(String, f64)>, tol: f64) -> bool {
    match (got, want) {
        (Classification::Unknown, None) => true,
        (Classification::Known(p), Some((l, d))) => &p.label == l && (p.distance - d).abs() <= tol,
        _ => false,
    }
}

/// Global accuracy recomputed from the event list.
pub fn oracle_gca(events: &[TeachingEvent]) -> Option<f64> {
    let asks: Vec<bool> = events
        .iter()
        .filter(|e| e.kind == EventKind::Ask)
        .map(|e| e.predicted_label.is_some() && e.predicted_label == e.true_label)
        .collect();
    if asks.is_empty() {
        return None;
    }
    Some(asks.iter().filter(|c| **c).count() as f64 / asks.len() as f64)
}

/// Mean of all sliding-window accuracies, where the window length is
/// `window_factor` times the number of introduced categories and each window
/// covers the most recent questions since the last introduction.
pub fn oracle_apa(events: &[TeachingEvent], window_factor: usize) -> Option<f64> {
    let mut introduced = 0;
    let mut since: Vec<bool> = Vec::new();
    let mut accs: Vec<f64> = Vec::new();
    for e in events {
        match e.kind {
            EventKind::Introduce => {
                introduced += 1;
                since.clear();
            }
            EventKind::Ask => {
                since.push(e.correct.unwrap());
                let w = window_factor * introduced;
                if since.len() >= w {
                    let tail = &since[since.len() - w..];
                    accs.push(tail.iter().filter(|c| **c).count() as f64 / w as f64);
                }
            }
            _ => {}
        }
    }
    if accs.is_empty() {
        return None;
    }
    let mut total = 0.0;
    for a in &accs {
        total += a;
    }
    Some(total / accs.len() as f64)
}

/// Replays teach/correct events into a label → instance-id map.
pub fn taught_instances(events: &[TeachingEvent]) -> BTreeMap<String, Vec<String>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for e in events {
        if matches!(e.kind, EventKind::Teach | EventKind::Correct) {
            out.entry(e.true_label.clone().unwrap())
                .or_default()
                .push(e.instance_id.clone().unwrap());
        }
    }
    out
}
