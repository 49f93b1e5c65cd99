//! Marching squares and superlevel-set components on a regular grid.

use serde::{Deserialize, Serialize};

pub type Segment = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourLevel {
    pub level: f64,
    pub segments: Vec<Segment>,
    /// Connected components (4-neighbour) of grid nodes with density ≥ level.
    pub regions: usize,
}

fn lerp(a: f64, b: f64, va: f64, vb: f64, level: f64) -> f64 {
    if va == vb {
        return 0.5 * (a + b);
    }
    a + (level - va) / (vb - va) * (b - a)
}

/// Iso-line segments of `z[iy][ix]` at `level`.
pub fn marching_squares(xs: &[f64], ys: &[f64], z: &[Vec<f64>], level: f64) -> Vec<Segment> {
    let mut out = Vec::new();
    for j in 0..ys.len().saturating_sub(1) {
        for i in 0..xs.len().saturating_sub(1) {
            let (x0, x1, y0, y1) = (xs[i], xs[i + 1], ys[j], ys[j + 1]);
            // corners counter-clockwise from bottom-left
            let v = [z[j][i], z[j][i + 1], z[j + 1][i + 1], z[j + 1][i]];
            let mask = v.iter().enumerate().fold(0u8, |m, (k, &c)| m | (u8::from(c >= level) << k));
            if mask == 0 || mask == 15 {
                continue;
            }
            // edge crossing points: 0 bottom, 1 right, 2 top, 3 left
            let e = |edge: usize| -> [f64; 2] {
                match edge {
                    0 => [lerp(x0, x1, v[0], v[1], level), y0],
                    1 => [x1, lerp(y0, y1, v[1], v[2], level)],
                    2 => [lerp(x0, x1, v[3], v[2], level), y1],
                    _ => [x0, lerp(y0, y1, v[0], v[3], level)],
                }
            };
            let centre_high = (v[0] + v[1] + v[2] + v[3]) / 4.0 >= level;
            let pairs: &[(usize, usize)] = match mask {
                1 | 14 => &[(3, 0)],
                2 | 13 => &[(0, 1)],
                3 | 12 => &[(3, 1)],
                4 | 11 => &[(1, 2)],
                6 | 9 => &[(0, 2)],
                7 | 8 => &[(3, 2)],
                5 if centre_high => &[(3, 2), (0, 1)],
                5 => &[(3, 0), (1, 2)],
                10 if centre_high => &[(3, 0), (1, 2)],
                10 => &[(3, 2), (0, 1)],
                _ => unreachable!(),
            };
            out.extend(pairs.iter().map(|&(a, b)| [e(a), e(b)]));
        }
    }
    out
}

/// Number of 4-connected components of nodes with `z ≥ level`.
pub fn superlevel_regions(z: &[Vec<f64>], level: f64) -> usize {
    let rows = z.len();
    let cols = z.first().map_or(0, Vec::len);
    let mut seen = vec![false; rows * cols];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..rows * cols {
        if seen[start] || z[start / cols][start % cols] < level {
            continue;
        }
        count += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let (r, c) = (idx / cols, idx % cols);
            let neighbours = [
                (r > 0).then(|| idx - cols),
                (r + 1 < rows).then(|| idx + cols),
                (c > 0).then(|| idx - 1),
                (c + 1 < cols).then(|| idx + 1),
            ];
            for n in neighbours.into_iter().flatten() {
                if !seen[n] && z[n / cols][n % cols] >= level {
                    seen[n] = true;
                    stack.push(n);
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_peak_gives_closed_loop() {
        let xs: Vec<f64> = (0..21).map(|i| i as f64 / 10.0 - 1.0).collect();
        let z: Vec<Vec<f64>> =
            xs.iter().map(|&y| xs.iter().map(|&x| (-(x * x + y * y) * 4.0).exp()).collect()).collect();
        let segs = marching_squares(&xs, &xs, &z, 0.5);
        assert!(!segs.is_empty());
        // every endpoint is shared by exactly two segments
        let key = |p: [f64; 2]| ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64);
        let mut counts = std::collections::HashMap::new();
        for s in &segs {
            *counts.entry(key(s[0])).or_insert(0) += 1;
            *counts.entry(key(s[1])).or_insert(0) += 1;
        }
        assert!(counts.values().all(|&c| c == 2));
        assert_eq!(superlevel_regions(&z, 0.5), 1);
    }

    #[test]
    fn two_peaks_two_regions() {
        let z = vec![vec![1.0, 0.0, 1.0], vec![1.0, 0.0, 1.0]];
        assert_eq!(superlevel_regions(&z, 0.5), 2);
        assert_eq!(superlevel_regions(&z, 0.0), 1);
        assert_eq!(superlevel_regions(&z, 2.0), 0);
    }
}
