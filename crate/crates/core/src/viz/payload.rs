use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::contour::{marching_squares, superlevel_regions, ContourLevel};
use super::stats::{
    histogram, kde_1d, kde_2d_grid, linspace, quantile, silverman_1d, silverman_2d, sturges_histogram, Histogram,
};
use super::{lambda_label, VizKind};
use crate::domain::{Dataset, Element, RadiiTable, ReferenceStandard, UNKNOWN_CATEGORY};
use crate::error::VizError;
use crate::lambda::{DatasetFit, LambdaSet};

/// Group name used when no colouring category is requested.
pub const ALL_GROUP: &str = "all";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VizPayload {
    pub kind: VizKind,
    pub series: Series,
    pub axis_labels: Vec<String>,
    /// Category used for colour or grouping, if any.
    pub color_key: Option<String>,
    /// Distinct group values in sorted order; colours are assigned by index.
    pub groups: Vec<String>,
    /// Point index to sample id.
    pub point_refs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Series {
    Spider(SpiderSeries),
    Scatter(ScatterSeries),
    Splom(SplomSeries),
    DensityContour(DensitySeries),
    Violin(ViolinSeries),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpiderSeries {
    pub reference: String,
    pub elements: Vec<Element>,
    pub radii_pm: Vec<f64>,
    pub log_scale: bool,
    pub lines: Vec<SpiderLine>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpiderLine {
    pub sample_id: String,
    pub group: String,
    /// Normalised concentration per element of `elements`; `None` is a gap.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterSeries {
    pub indices: Vec<usize>,
    pub points: Vec<ScatterPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub sample_id: String,
    pub group: String,
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRef {
    pub sample_id: String,
    pub group: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplomSeries {
    pub indices: Vec<usize>,
    /// `[min, max]` per entry of `indices`, shared by every panel.
    pub ranges: Vec<[f64; 2]>,
    pub samples: Vec<SampleRef>,
    pub panels: Vec<SplomPanel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplomPanel {
    pub row: usize,
    pub col: usize,
    pub x_index: usize,
    pub y_index: usize,
    pub content: PanelContent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PanelContent {
    /// `[x, y]` per sample, aligned with `SplomSeries::samples`.
    Scatter {
        points: Vec<[f64; 2]>,
    },
    Histogram(Histogram),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalKind {
    #[default]
    Histogram,
    Rug,
}

impl MarginalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MarginalKind::Histogram => "histogram",
            MarginalKind::Rug => "rug",
        }
    }
}

impl fmt::Display for MarginalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MarginalKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "histogram" | "hist" => Ok(MarginalKind::Histogram),
            "rug" => Ok(MarginalKind::Rug),
            other => Err(format!("unknown marginal '{other}', expected histogram or rug")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisPair<T> {
    pub x: T,
    pub y: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginal {
    pub kind: MarginalKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram: Option<AxisPair<Histogram>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rug: Option<AxisPair<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub x_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    /// `density[iy][ix]`.
    pub density: Vec<Vec<f64>>,
    pub dx: f64,
    pub dy: f64,
    /// `Σ density · dx · dy`.
    pub integral: f64,
    pub max_density: f64,
    pub contour_levels: Vec<ContourLevel>,
    pub bandwidth: [f64; 2],
    pub marginal: Marginal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityLayer {
    pub group: String,
    pub n: usize,
    pub grid: DensityGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedGroup {
    pub group: String,
    pub n: usize,
    pub code: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySeries {
    pub x_index: usize,
    pub y_index: usize,
    pub layers: Vec<DensityLayer>,
    pub skipped: Vec<SkippedGroup>,
    pub points: Vec<ScatterPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeTrace {
    pub positions: Vec<f64>,
    pub densities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolinPoint {
    pub sample_id: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolinStats {
    pub group: String,
    pub n: usize,
    pub bandwidth: f64,
    pub kde: KdeTrace,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Most extreme observations within 1.5 IQR of the box.
    pub whiskers: [f64; 2],
    pub outliers: Vec<ViolinPoint>,
    pub points: Vec<ViolinPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolinSeries {
    pub index: usize,
    pub violins: Vec<ViolinStats>,
    pub skipped: Vec<SkippedGroup>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityConfig {
    pub grid_size: usize,
    pub level_count: usize,
    /// Lowest and highest contour as fractions of the maximum density.
    pub level_range: [f64; 2],
    pub pad_bandwidths: f64,
    pub min_points: usize,
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self { grid_size: 128, level_count: 8, level_range: [0.05, 0.95], pad_bandwidths: 3.0, min_points: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolinConfig {
    pub points: usize,
    pub pad_bandwidths: f64,
    pub whisker_iqr: f64,
    pub min_points: usize,
}

impl Default for ViolinConfig {
    fn default() -> Self {
        Self { points: 256, pad_bandwidths: 3.0, whisker_iqr: 1.5, min_points: 2 }
    }
}

/// Resolves the colour/group value of each sample.
struct Grouping<'a> {
    ds: &'a Dataset,
    key: Option<&'a str>,
}

impl<'a> Grouping<'a> {
    fn new(ds: &'a Dataset, key: Option<&'a str>) -> Result<Self, VizError> {
        if let Some(k) = key {
            ds.require_category(k)?;
        }
        Ok(Self { ds, key })
    }

    fn of(&self, sample_id: &str) -> String {
        match self.key {
            None => ALL_GROUP.to_string(),
            Some(k) => self.ds.pattern(sample_id).and_then(|p| p.category(k)).unwrap_or(UNKNOWN_CATEGORY).to_string(),
        }
    }

    fn color_key(&self) -> Option<String> {
        self.key.map(str::to_string)
    }
}

fn sorted_groups<'s>(groups: impl IntoIterator<Item = &'s String>) -> Vec<String> {
    groups.into_iter().cloned().collect::<BTreeSet<_>>().into_iter().collect()
}

fn check_indices(lambdas: &[LambdaSet], indices: &[usize]) -> Result<(), VizError> {
    let Some(first) = lambdas.first() else {
        return Ok(());
    };
    let degree_count = first.lambdas.len();
    match indices.iter().find(|&&i| i >= degree_count) {
        Some(&index) => Err(VizError::IndexOutOfRange { index, degree_count }),
        None => Ok(()),
    }
}

/// One polyline per sample of normalised concentration over the canonical
/// elements, for a log-scaled y axis. Absent or non-positive values are gaps.
pub fn spider_payload(
    ds: &Dataset,
    standard: &ReferenceStandard,
    radii: &RadiiTable,
    color_by: Option<&str>,
) -> Result<VizPayload, VizError> {
    let grouping = Grouping::new(ds, color_by)?;
    let elements = Element::CANONICAL.to_vec();
    let lines: Vec<SpiderLine> = ds
        .patterns
        .iter()
        .map(|p| SpiderLine {
            sample_id: p.sample_id.clone(),
            group: grouping.of(&p.sample_id),
            values: elements
                .iter()
                .map(|&e| match (p.get(e), standard.get(e)) {
                    (Some(c), Some(r)) if c > 0.0 && r > 0.0 => Some(c / r),
                    _ => None,
                })
                .collect(),
        })
        .collect();
    Ok(VizPayload {
        kind: VizKind::Spider,
        groups: sorted_groups(lines.iter().map(|l| &l.group)),
        point_refs: lines.iter().map(|l| l.sample_id.clone()).collect(),
        axis_labels: vec!["element".to_string(), format!("sample / {}", standard.name)],
        color_key: grouping.color_key(),
        series: Series::Spider(SpiderSeries {
            reference: standard.name.clone(),
            radii_pm: elements.iter().map(|&e| radii.radius(e)).collect(),
            elements,
            log_scale: true,
            lines,
        }),
    })
}

fn scatter_points(lambdas: &[LambdaSet], grouping: &Grouping, indices: &[usize]) -> Vec<ScatterPoint> {
    lambdas
        .iter()
        .map(|l| ScatterPoint {
            sample_id: l.sample_id.clone(),
            group: grouping.of(&l.sample_id),
            x: l.lambdas[indices[0]],
            y: l.lambdas[indices[1]],
            z: indices.get(2).map(|&i| l.lambdas[i]),
        })
        .collect()
}

pub fn scatter_payload(
    ds: &Dataset,
    lambdas: &[LambdaSet],
    x: usize,
    y: usize,
    color_by: Option<&str>,
) -> Result<VizPayload, VizError> {
    scatter_impl(ds, lambdas, &[x, y], color_by)
}

pub fn scatter3d_payload(
    ds: &Dataset,
    lambdas: &[LambdaSet],
    x: usize,
    y: usize,
    z: usize,
    color_by: Option<&str>,
) -> Result<VizPayload, VizError> {
    scatter_impl(ds, lambdas, &[x, y, z], color_by)
}

fn scatter_impl(
    ds: &Dataset,
    lambdas: &[LambdaSet],
    indices: &[usize],
    color_by: Option<&str>,
) -> Result<VizPayload, VizError> {
    check_indices(lambdas, indices)?;
    let grouping = Grouping::new(ds, color_by)?;
    let points = scatter_points(lambdas, &grouping, indices);
    Ok(VizPayload {
        kind: if indices.len() == 3 { VizKind::Scatter3d } else { VizKind::Scatter2d },
        groups: sorted_groups(points.iter().map(|p| &p.group)),
        point_refs: points.iter().map(|p| p.sample_id.clone()).collect(),
        axis_labels: indices.iter().map(|&i| lambda_label(i)).collect(),
        color_key: grouping.color_key(),
        series: Series::Scatter(ScatterSeries { indices: indices.to_vec(), points }),
    })
}

fn value_range(values: impl Iterator<Item = f64>) -> [f64; 2] {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        [0.0, 1.0]
    } else if lo == hi {
        [lo - 0.5, hi + 0.5]
    } else {
        [lo, hi]
    }
}

/// Scatter-plot matrix: panel `(row, col)` plots `indices[col]` against
/// `indices[row]`; the diagonal holds a histogram of that lambda.
pub fn splom_payload(
    ds: &Dataset,
    lambdas: &[LambdaSet],
    indices: &[usize],
    color_by: Option<&str>,
) -> Result<VizPayload, VizError> {
    if indices.len() < 2 {
        return Err(VizError::TooFewIndices);
    }
    check_indices(lambdas, indices)?;
    let grouping = Grouping::new(ds, color_by)?;
    let samples: Vec<SampleRef> = lambdas
        .iter()
        .map(|l| SampleRef { sample_id: l.sample_id.clone(), group: grouping.of(&l.sample_id) })
        .collect();
    let ranges: Vec<[f64; 2]> = indices.iter().map(|&i| value_range(lambdas.iter().map(|l| l.lambdas[i]))).collect();
    let bins = if lambdas.is_empty() { 1 } else { (lambdas.len() as f64).log2().ceil() as usize + 1 };

    let mut panels = Vec::with_capacity(indices.len() * indices.len());
    for (row, &yi) in indices.iter().enumerate() {
        for (col, &xi) in indices.iter().enumerate() {
            let content = if row == col {
                let values: Vec<f64> = lambdas.iter().map(|l| l.lambdas[xi]).collect();
                PanelContent::Histogram(histogram(&values, ranges[col][0], ranges[col][1], bins))
            } else {
                PanelContent::Scatter { points: lambdas.iter().map(|l| [l.lambdas[xi], l.lambdas[yi]]).collect() }
            };
            panels.push(SplomPanel { row, col, x_index: xi, y_index: yi, content });
        }
    }
    Ok(VizPayload {
        kind: VizKind::Splom,
        groups: sorted_groups(samples.iter().map(|s| &s.group)),
        point_refs: samples.iter().map(|s| s.sample_id.clone()).collect(),
        axis_labels: indices.iter().map(|&i| lambda_label(i)).collect(),
        color_key: grouping.color_key(),
        series: Series::Splom(SplomSeries { indices: indices.to_vec(), ranges, samples, panels }),
    })
}

/// Gaussian KDE of one point cloud on a regular grid with contour levels.
pub fn density_grid(points: &[(f64, f64)], marginal: MarginalKind, config: &DensityConfig) -> DensityGrid {
    let xs_data: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys_data: Vec<f64> = points.iter().map(|p| p.1).collect();
    let hx = silverman_2d(&xs_data);
    let hy = silverman_2d(&ys_data);
    let span = |v: &[f64], h: f64| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        linspace(lo - config.pad_bandwidths * h, hi + config.pad_bandwidths * h, config.grid_size)
    };
    let x_grid = span(&xs_data, hx);
    let y_grid = span(&ys_data, hy);
    let dx = x_grid[1] - x_grid[0];
    let dy = y_grid[1] - y_grid[0];
    let density = kde_2d_grid(points, hx, hy, &x_grid, &y_grid);
    let integral = density.iter().flatten().sum::<f64>() * dx * dy;
    let max_density = density.iter().flatten().copied().fold(0.0, f64::max);

    let [lo, hi] = config.level_range;
    let contour_levels = (0..config.level_count)
        .map(|k| {
            let frac =
                if config.level_count == 1 { hi } else { lo + (hi - lo) * k as f64 / (config.level_count - 1) as f64 };
            let level = max_density * frac;
            ContourLevel {
                level,
                segments: marching_squares(&x_grid, &y_grid, &density, level),
                regions: superlevel_regions(&density, level),
            }
        })
        .collect();

    let marginal = match marginal {
        MarginalKind::Histogram => Marginal {
            kind: marginal,
            histogram: Some(AxisPair { x: sturges_histogram(&xs_data), y: sturges_histogram(&ys_data) }),
            rug: None,
        },
        MarginalKind::Rug => {
            Marginal { kind: marginal, histogram: None, rug: Some(AxisPair { x: xs_data, y: ys_data }) }
        }
    };

    DensityGrid {
        x_grid,
        y_grid,
        density,
        dx,
        dy,
        integral,
        max_density,
        contour_levels,
        bandwidth: [hx, hy],
        marginal,
    }
}

pub fn density_contour_payload(
    ds: &Dataset,
    lambdas: &[LambdaSet],
    x: usize,
    y: usize,
    color_by: Option<&str>,
    marginal: MarginalKind,
    config: &DensityConfig,
) -> Result<VizPayload, VizError> {
    check_indices(lambdas, &[x, y])?;
    let grouping = Grouping::new(ds, color_by)?;
    let all = scatter_points(lambdas, &grouping, &[x, y]);
    let groups = sorted_groups(all.iter().map(|p| &p.group));

    let mut layers = Vec::new();
    let mut skipped = Vec::new();
    for g in &groups {
        let pts: Vec<(f64, f64)> = all.iter().filter(|p| &p.group == g).map(|p| (p.x, p.y)).collect();
        if pts.len() < config.min_points {
            skipped.push(SkippedGroup {
                group: g.clone(),
                n: pts.len(),
                code: "TooFewPointsForDensity".to_string(),
                reason: format!("{} point(s), at least {} needed", pts.len(), config.min_points),
            });
            continue;
        }
        layers.push(DensityLayer { group: g.clone(), n: pts.len(), grid: density_grid(&pts, marginal, config) });
    }
    let rendered: BTreeSet<&String> = layers.iter().map(|l| &l.group).collect();
    let points: Vec<ScatterPoint> = all.iter().filter(|p| rendered.contains(&p.group)).cloned().collect();
    Ok(VizPayload {
        kind: VizKind::DensityContour,
        groups,
        point_refs: points.iter().map(|p| p.sample_id.clone()).collect(),
        axis_labels: vec![lambda_label(x), lambda_label(y)],
        color_key: grouping.color_key(),
        series: Series::DensityContour(DensitySeries { x_index: x, y_index: y, layers, skipped, points }),
    })
}

/// Box-plot statistics and a KDE trace for one group of values.
pub fn violin_stats(group: &str, points: Vec<ViolinPoint>, config: &ViolinConfig) -> ViolinStats {
    let values: Vec<f64> = points.iter().map(|p| p.value).collect();
    let q1 = quantile(&values, 0.25);
    let median = quantile(&values, 0.5);
    let q3 = quantile(&values, 0.75);
    let iqr = q3 - q1;
    let (fence_lo, fence_hi) = (q1 - config.whisker_iqr * iqr, q3 + config.whisker_iqr * iqr);
    let inside = values.iter().copied().filter(|v| *v >= fence_lo && *v <= fence_hi);
    let whiskers = [inside.clone().fold(f64::INFINITY, f64::min), inside.fold(f64::NEG_INFINITY, f64::max)];
    let outliers = points.iter().filter(|p| p.value < fence_lo || p.value > fence_hi).cloned().collect();

    let h = silverman_1d(&values);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min) - config.pad_bandwidths * h;
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max) + config.pad_bandwidths * h;
    let positions = linspace(lo, hi, config.points);
    let densities = kde_1d(&values, h, &positions);
    ViolinStats {
        group: group.to_string(),
        n: values.len(),
        bandwidth: h,
        kde: KdeTrace { positions, densities },
        q1,
        median,
        q3,
        whiskers,
        outliers,
        points,
    }
}

pub fn violin_payload(
    ds: &Dataset,
    lambdas: &[LambdaSet],
    index: usize,
    group_by: Option<&str>,
    config: &ViolinConfig,
) -> Result<VizPayload, VizError> {
    check_indices(lambdas, &[index])?;
    let grouping = Grouping::new(ds, group_by)?;
    let tagged: Vec<(String, ViolinPoint)> = lambdas
        .iter()
        .map(|l| (grouping.of(&l.sample_id), ViolinPoint { sample_id: l.sample_id.clone(), value: l.lambdas[index] }))
        .collect();
    let groups = sorted_groups(tagged.iter().map(|(g, _)| g));

    let mut violins = Vec::new();
    let mut skipped = Vec::new();
    for g in &groups {
        let pts: Vec<ViolinPoint> = tagged.iter().filter(|(tg, _)| tg == g).map(|(_, p)| p.clone()).collect();
        if pts.len() < config.min_points {
            skipped.push(SkippedGroup {
                group: g.clone(),
                n: pts.len(),
                code: "TooFewPoints".to_string(),
                reason: format!("{} point(s), at least {} needed", pts.len(), config.min_points),
            });
            continue;
        }
        violins.push(violin_stats(g, pts, config));
    }
    let point_refs = violins.iter().flat_map(|v| v.points.iter().map(|p| p.sample_id.clone())).collect();
    Ok(VizPayload {
        kind: VizKind::Violin,
        groups,
        point_refs,
        axis_labels: vec![group_by.unwrap_or(ALL_GROUP).to_string(), lambda_label(index)],
        color_key: grouping.color_key(),
        series: Series::Violin(ViolinSeries { index, violins, skipped }),
    })
}

/// Everything needed to pick and parameterise a chart.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VizRequest {
    /// Lambda indices; kind-specific defaults apply when empty.
    pub indices: Vec<usize>,
    pub color_by: Option<String>,
    pub marginal: MarginalKind,
    pub density: DensityConfig,
    pub violin: ViolinConfig,
}

impl VizRequest {
    pub fn default_indices(kind: VizKind, degree_count: usize) -> Vec<usize> {
        let d = degree_count.max(1);
        match kind {
            VizKind::Spider => vec![],
            VizKind::Scatter2d | VizKind::DensityContour => vec![0, 1.min(d - 1)],
            VizKind::Scatter3d => vec![0, 1.min(d - 1), 2.min(d - 1)],
            VizKind::Splom => (0..d.min(3)).collect(),
            VizKind::Violin => vec![0],
        }
    }
}

/// Dispatches to the builder for `kind`.
pub fn build_payload(
    kind: VizKind,
    ds: &Dataset,
    fit: &DatasetFit,
    standard: &ReferenceStandard,
    radii: &RadiiTable,
    request: &VizRequest,
) -> Result<VizPayload, VizError> {
    let degree_count = fit.lambdas.first().map_or(4, |l| l.lambdas.len());
    let indices = if request.indices.is_empty() {
        VizRequest::default_indices(kind, degree_count)
    } else {
        request.indices.clone()
    };
    let color = request.color_by.as_deref();
    let need = |n: usize| -> Result<(), VizError> {
        if indices.len() < n {
            Err(VizError::TooFewIndices)
        } else {
            Ok(())
        }
    };
    match kind {
        VizKind::Spider => spider_payload(ds, standard, radii, color),
        VizKind::Scatter2d => {
            need(2)?;
            scatter_payload(ds, &fit.lambdas, indices[0], indices[1], color)
        }
        VizKind::Scatter3d => {
            need(3)?;
            scatter3d_payload(ds, &fit.lambdas, indices[0], indices[1], indices[2], color)
        }
        VizKind::Splom => splom_payload(ds, &fit.lambdas, &indices, color),
        VizKind::DensityContour => {
            need(2)?;
            density_contour_payload(ds, &fit.lambdas, indices[0], indices[1], color, request.marginal, &request.density)
        }
        VizKind::Violin => {
            need(1)?;
            violin_payload(ds, &fit.lambdas, indices[0], color, &request.violin)
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::domain::{builtin_reference, canonical_radii, Provenance, ReePattern};

    fn dataset(n: usize, groups: &[&str]) -> Dataset {
        let ch = builtin_reference("chondrite").unwrap();
        let patterns = (0..n)
            .map(|i| {
                let conc: BTreeMap<Element, f64> =
                    Element::CANONICAL.iter().map(|&e| (e, ch.value(e) * (1.0 + i as f64))).collect();
                let cats = BTreeMap::from([("mineral".to_string(), groups[i % groups.len()].to_string())]);
                ReePattern::new(format!("s{i}"), conc).unwrap().with_categories(cats)
            })
            .collect();
        Dataset::new("t", patterns, Provenance { source_name: "t".into(), imported_at: None }).unwrap()
    }

    fn lambdas(values: &[[f64; 4]]) -> Vec<LambdaSet> {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| LambdaSet {
                sample_id: format!("s{i}"),
                lambdas: v.to_vec(),
                residuals: BTreeMap::new(),
                rms_misfit: 0.0,
                excluded: BTreeSet::new(),
                basis_id: "b".into(),
            })
            .collect()
    }

    #[test]
    fn spider_flat_pattern_and_gaps() {
        let mut ds = dataset(3, &["a", "b"]);
        ds.patterns[2].concentrations_ppm.remove(&Element::Tb);
        let ch = builtin_reference("chondrite").unwrap();
        let p = spider_payload(&ds, &ch, &canonical_radii(), Some("mineral")).unwrap();
        let Series::Spider(s) = &p.series else { panic!() };
        assert_eq!(s.lines.len(), 3);
        assert!(s.lines.iter().all(|l| l.values.len() == 14));
        assert!(s.lines[0].values.iter().all(|v| (v.unwrap() - 1.0).abs() < 1e-12));
        assert_eq!(s.lines[2].values[7], None);
        assert_eq!(p.groups, vec!["a", "b"]);
        assert!(s.log_scale);
    }

    #[test]
    fn unknown_category_is_an_error() {
        let ds = dataset(3, &["a"]);
        let ch = builtin_reference("chondrite").unwrap();
        let err = spider_payload(&ds, &ch, &canonical_radii(), Some("colour")).unwrap_err();
        assert_eq!(crate::ErrorCode::code(&err), "UnknownCategory");
    }

    #[test]
    fn scatter_points_and_refs() {
        let ds = dataset(3, &["a"]);
        let ls = lambdas(&[[1.0, 2.0, 3.0, 4.0], [5.0, 6.0, 7.0, 8.0], [0.0; 4]]);
        let p = scatter_payload(&ds, &ls, 0, 1, None).unwrap();
        let Series::Scatter(s) = &p.series else { panic!() };
        assert_eq!(s.points.len(), 3);
        assert_eq!((s.points[1].x, s.points[1].y), (5.0, 6.0));
        assert_eq!(p.point_refs, vec!["s0", "s1", "s2"]);
        assert_eq!(p.axis_labels[0], "λ0 (REE abundance)");
        let p3 = scatter3d_payload(&ds, &ls, 0, 1, 3, None).unwrap();
        let Series::Scatter(s3) = &p3.series else { panic!() };
        assert_eq!(s3.points[0].z, Some(4.0));
        assert_eq!(
            scatter_payload(&ds, &ls, 0, 4, None).unwrap_err(),
            VizError::IndexOutOfRange { index: 4, degree_count: 4 }
        );
    }

    #[test]
    fn splom_layout() {
        let ds = dataset(4, &["a", "b"]);
        let ls = lambdas(&[[1.0, 2.0, 3.0, 0.0], [2.0, 1.0, 0.0, 0.0], [3.0, 5.0, 1.0, 0.0], [0.5, 0.2, 2.0, 0.0]]);
        let p = splom_payload(&ds, &ls, &[0, 1, 2], Some("mineral")).unwrap();
        let Series::Splom(s) = &p.series else { panic!() };
        assert_eq!(s.panels.len(), 9);
        let scatter: Vec<&SplomPanel> =
            s.panels.iter().filter(|p| matches!(p.content, PanelContent::Scatter { .. })).collect();
        assert_eq!(scatter.len(), 6);
        let pts = |r: usize, c: usize| match &s.panels[r * 3 + c].content {
            PanelContent::Scatter { points } => points.clone(),
            _ => panic!(),
        };
        for (r, c) in [(0, 1), (0, 2), (1, 2)] {
            let a = pts(r, c);
            let b = pts(c, r);
            assert_eq!(a.len(), 4);
            assert!(a.iter().zip(&b).all(|(p, q)| p[0] == q[1] && p[1] == q[0]));
        }
        assert_eq!(s.ranges[1], [0.2, 5.0]);
        assert_eq!(splom_payload(&ds, &ls, &[0], None).unwrap_err(), VizError::TooFewIndices);
    }

    #[test]
    fn violins_per_group_and_degenerate_group() {
        let ds = dataset(5, &["a", "a", "b", "b", "c"]);
        let ls = lambdas(&[[2.0; 4], [2.0; 4], [1.0; 4], [3.0; 4], [9.0; 4]]);
        let p = violin_payload(&ds, &ls, 0, Some("mineral"), &ViolinConfig::default()).unwrap();
        let Series::Violin(v) = &p.series else { panic!() };
        assert_eq!(v.violins.len(), 2);
        assert_eq!(v.skipped.len(), 1);
        assert_eq!(v.skipped[0].group, "c");
        let a = &v.violins[0];
        assert_eq!((a.q1, a.median, a.q3), (2.0, 2.0, 2.0));
        assert_eq!(a.kde.positions.len(), 256);
        assert!(a.kde.densities.iter().all(|d| *d >= 0.0));
        assert_eq!(p.point_refs.len(), 4);
    }

    #[test]
    fn density_skips_small_groups_and_sets_rug() {
        let ds = dataset(8, &["a", "a", "a", "a", "a", "a", "b", "b"]);
        let vals: Vec<[f64; 4]> = (0..8).map(|i| [i as f64, (i * i) as f64 * 0.1, 0.0, 0.0]).collect();
        let ls = lambdas(&vals);
        let p = density_contour_payload(&ds, &ls, 0, 1, Some("mineral"), MarginalKind::Rug, &DensityConfig::default())
            .unwrap();
        let Series::DensityContour(d) = &p.series else { panic!() };
        assert_eq!(d.layers.len(), 1);
        assert_eq!(d.skipped[0].code, "TooFewPointsForDensity");
        let g = &d.layers[0].grid;
        assert_eq!(g.x_grid.len(), 128);
        assert_eq!(g.density.len(), 128);
        assert_eq!(g.marginal.rug.as_ref().unwrap().x.len(), 6);
        assert!(g.contour_levels.windows(2).all(|w| w[0].level < w[1].level));
        assert!(g.contour_levels.iter().all(|l| l.level > 0.0 && l.level <= g.max_density));
        assert_eq!(p.point_refs.len(), 6);
    }
}
