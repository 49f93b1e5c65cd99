use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use reekit_core::viz::{density_grid, quantile, violin_stats, DensityConfig, MarginalKind, ViolinConfig, ViolinPoint};
use reekit_testkit::{kde2_at, sorted_quantile};

fn cloud(rng: &mut ChaCha8Rng, n: usize, centre: (f64, f64), sd: (f64, f64)) -> Vec<(f64, f64)> {
    let nx = Normal::new(centre.0, sd.0).unwrap();
    let ny = Normal::new(centre.1, sd.1).unwrap();
    (0..n).map(|_| (nx.sample(rng), ny.sample(rng))).collect()
}

#[test]
fn density_integrates_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let n = rng.random_range(60..400);
        let centre = (rng.random_range(-3.0..3.0), 0.0);
        let sd = (rng.random_range(0.1..2.0), 0.05);
        let pts = cloud(&mut rng, n, centre, sd);
        let g = density_grid(&pts, MarginalKind::Histogram, &DensityConfig::default());
        assert!((g.integral - 1.0).abs() <= 1e-3, "n={n} integral {}", g.integral);
        let recomputed: f64 = g.density.iter().flatten().sum::<f64>() * g.dx * g.dy;
        assert_eq!(recomputed, g.integral);
        assert!(g.density.iter().flatten().all(|d| *d >= 0.0));
    }
}

#[test]
fn grid_matches_direct_kernel_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts = cloud(&mut rng, 40, (1.0, -2.0), (0.5, 0.3));
    let g = density_grid(&pts, MarginalKind::Rug, &DensityConfig::default());
    let [hx, hy] = g.bandwidth;
    for j in (0..128).step_by(9) {
        for i in (0..128).step_by(11) {
            let want = kde2_at(&pts, hx, hy, g.x_grid[i], g.y_grid[j]);
            assert!((g.density[j][i] - want).abs() <= 1e-12 * want.max(1e-300) + 1e-300);
        }
    }
}

#[test]
fn separated_clusters_split_top_contour() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut pts = cloud(&mut rng, 100, (0.0, 0.0), (1.0, 1.0));
    pts.extend(cloud(&mut rng, 100, (10.0, 0.0), (1.0, 1.0)));
    let g = density_grid(&pts, MarginalKind::Histogram, &DensityConfig::default());
    let top = g.contour_levels.last().unwrap();
    assert_eq!(top.regions, 2);
    // oracle: the valley between the clusters lies below the top level
    let [hx, hy] = g.bandwidth;
    let valley = kde2_at(&pts, hx, hy, 5.0, 0.0);
    assert!(valley < top.level);
    assert!(kde2_at(&pts, hx, hy, 0.0, 0.0) > top.level);
    assert!(kde2_at(&pts, hx, hy, 10.0, 0.0) > top.level);
}

#[test]
fn single_cluster_contours_are_closed_and_nested() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let pts = cloud(&mut rng, 300, (2.0, 3.0), (0.4, 0.4));
    let g = density_grid(&pts, MarginalKind::Histogram, &DensityConfig::default());
    assert_eq!(g.contour_levels.len(), 8);
    let mut previous_extent = f64::INFINITY;
    for level in &g.contour_levels {
        assert_eq!(level.regions, 1, "level {}", level.level);
        let key = |p: [f64; 2]| ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64);
        let mut degree: HashMap<(i64, i64), usize> = HashMap::new();
        for s in &level.segments {
            *degree.entry(key(s[0])).or_default() += 1;
            *degree.entry(key(s[1])).or_default() += 1;
        }
        assert!(degree.values().all(|&d| d == 2), "open contour at {}", level.level);
        let extent = level
            .segments
            .iter()
            .flat_map(|s| s.iter())
            .map(|p| ((p[0] - 2.0).powi(2) + (p[1] - 3.0).powi(2)).sqrt())
            .fold(0.0, f64::max);
        assert!(extent < previous_extent);
        previous_extent = extent;
    }
    assert!(g.contour_levels.windows(2).all(|w| w[0].level < w[1].level));
    assert!(g.contour_levels.iter().all(|l| l.level > 0.0 && l.level <= g.max_density));
}

#[test]
fn translation_moves_the_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let pts = cloud(&mut rng, 80, (0.0, 0.0), (1.0, 2.0));
    let shifted: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x + 3.25, y - 1.5)).collect();
    let a = density_grid(&pts, MarginalKind::Histogram, &DensityConfig::default());
    let b = density_grid(&shifted, MarginalKind::Histogram, &DensityConfig::default());
    for (xa, xb) in a.x_grid.iter().zip(&b.x_grid) {
        assert!((xb - xa - 3.25).abs() < 1e-9);
    }
    for (ya, yb) in a.y_grid.iter().zip(&b.y_grid) {
        assert!((yb - ya + 1.5).abs() < 1e-9);
    }
    assert!((a.max_density - b.max_density).abs() < 1e-9);
}

#[test]
fn violin_quartiles_equal_sort_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for g in 0..50 {
        let n = rng.random_range(2..=1000);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        for p in [0.25, 0.5, 0.75] {
            assert_eq!(quantile(&values, p), sorted_quantile(&values, p), "group {g} n={n} p={p}");
        }
        let points =
            values.iter().enumerate().map(|(i, &value)| ViolinPoint { sample_id: format!("{g}-{i}"), value }).collect();
        let v = violin_stats("g", points, &ViolinConfig::default());
        assert_eq!(v.q1, sorted_quantile(&values, 0.25));
        assert_eq!(v.median, sorted_quantile(&values, 0.5));
        assert_eq!(v.q3, sorted_quantile(&values, 0.75));
        assert!(v.q1 <= v.median && v.median <= v.q3);
        assert!(v.whiskers[0] >= v.q1 - 1.5 * (v.q3 - v.q1));
        assert!(v.whiskers[1] <= v.q3 + 1.5 * (v.q3 - v.q1));
        assert!(v.kde.densities.iter().all(|d| *d >= 0.0));
    }
}

#[test]
fn standard_normal_violin_median() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let points = (0..1000).map(|i| ViolinPoint { sample_id: i.to_string(), value: normal.sample(&mut rng) }).collect();
    let v = violin_stats("n", points, &ViolinConfig::default());
    assert!(v.median.abs() < 0.1);
    assert!(!v.outliers.is_empty());
    assert_eq!(v.kde.positions.len(), 256);
    let dx = v.kde.positions[1] - v.kde.positions[0];
    let mass: f64 = v.kde.densities.iter().sum::<f64>() * dx;
    assert!((mass - 1.0).abs() < 1e-2);
}
