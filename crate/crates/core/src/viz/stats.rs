//! Small statistics helpers shared by the density and violin builders.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
pub fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Linear-interpolation quantile between order statistics, `h = (n-1)p`.
///
/// Uses selection rather than a full sort; the result is identical to
/// sorting and indexing.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of empty slice");
    let mut v = values.to_vec();
    let n = v.len();
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let (_, lo_val, right) = v.select_nth_unstable_by(lo, f64::total_cmp);
    let lo_val = *lo_val;
    let hi_val = if hi == lo {
        lo_val
    } else {
        right.iter().copied().min_by(f64::total_cmp).expect("non-empty right partition")
    };
    lo_val + (h - lo as f64) * (hi_val - lo_val)
}

fn fallback_bandwidth(v: &[f64]) -> f64 {
    1e-3 * v.iter().fold(1.0_f64, |m, x| m.max(x.abs()))
}

/// Bivariate rule-of-thumb bandwidth for one dimension: `σ n^(-1/6)`.
pub fn silverman_2d(v: &[f64]) -> f64 {
    let h = std_dev(v) * (v.len() as f64).powf(-1.0 / 6.0);
    if h > 0.0 && h.is_finite() {
        h
    } else {
        fallback_bandwidth(v)
    }
}

/// Univariate rule of thumb: `0.9 min(σ, IQR/1.34) n^(-1/5)`.
pub fn silverman_1d(v: &[f64]) -> f64 {
    let sd = std_dev(v);
    let iqr = quantile(v, 0.75) - quantile(v, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let h = 0.9 * spread * (v.len() as f64).powf(-0.2);
    if h > 0.0 && h.is_finite() {
        h
    } else {
        fallback_bandwidth(v)
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn kde_1d(data: &[f64], h: f64, at: &[f64]) -> Vec<f64> {
    let norm = INV_SQRT_2PI / (h * data.len() as f64);
    at.iter().map(|&x| data.iter().map(|&d| (-0.5 * ((x - d) / h).powi(2)).exp()).sum::<f64>() * norm).collect()
}

/// Product-Gaussian KDE on the tensor grid `xs × ys`, as `[iy][ix]`.
///
/// The kernel separates, so the grid is one matrix product of per-axis
/// kernel tables.
pub fn kde_2d_grid(points: &[(f64, f64)], hx: f64, hy: f64, xs: &[f64], ys: &[f64]) -> Vec<Vec<f64>> {
    let n = points.len();
    let kx = DMatrix::from_fn(n, xs.len(), |p, i| (-0.5 * ((xs[i] - points[p].0) / hx).powi(2)).exp());
    let ky = DMatrix::from_fn(ys.len(), n, |j, p| (-0.5 * ((ys[j] - points[p].1) / hy).powi(2)).exp());
    let norm = 1.0 / (2.0 * std::f64::consts::PI * hx * hy * n as f64);
    let grid = ky * kx;
    (0..ys.len()).map(|j| (0..xs.len()).map(|i| grid[(j, i)] * norm).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` bin edges; the last bin is closed on the right.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Histogram over the data range with `ceil(log2 n) + 1` bins.
pub fn sturges_histogram(values: &[f64]) -> Histogram {
    if values.is_empty() {
        return Histogram { edges: vec![0.0, 1.0], counts: vec![0] };
    }
    let bins = ((values.len() as f64).log2().ceil() as usize + 1).max(1);
    let (mut lo, mut hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    histogram(values, lo, hi, bins)
}

pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Histogram {
    let edges = linspace(lo, hi, bins + 1);
    let mut counts = vec![0usize; bins];
    let width = (hi - lo) / bins as f64;
    for &v in values {
        if v < lo || v > hi {
            continue;
        }
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Histogram { edges, counts }
}
