//! Render-agnostic chart payloads and static SVG export.
//!
//! Every number a chart needs (densities, contour segments, quartiles,
//! histogram counts) is computed here so that any front end only draws.

mod contour;
mod payload;
mod stats;
mod svg;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::VizError;

pub use contour::{marching_squares, superlevel_regions, ContourLevel, Segment};
pub use payload::*;
pub use stats::{histogram, kde_1d, kde_2d_grid, quantile, silverman_1d, silverman_2d, sturges_histogram, Histogram};
pub use svg::{export_svg, SvgOptions, Theme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VizKind {
    Spider,
    Scatter2d,
    Scatter3d,
    Splom,
    DensityContour,
    Violin,
}

impl VizKind {
    pub const ALL: [VizKind; 6] = [
        VizKind::Spider,
        VizKind::Scatter2d,
        VizKind::Scatter3d,
        VizKind::Splom,
        VizKind::DensityContour,
        VizKind::Violin,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VizKind::Spider => "spider",
            VizKind::Scatter2d => "scatter2d",
            VizKind::Scatter3d => "scatter3d",
            VizKind::Splom => "splom",
            VizKind::DensityContour => "density_contour",
            VizKind::Violin => "violin",
        }
    }
}

impl fmt::Display for VizKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VizKind {
    type Err = VizError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let kind = match key.as_str() {
            "spider" => VizKind::Spider,
            "scatter" | "scatter2d" => VizKind::Scatter2d,
            "scatter3d" => VizKind::Scatter3d,
            "splom" => VizKind::Splom,
            "density" | "density_contour" | "contour" => VizKind::DensityContour,
            "violin" => VizKind::Violin,
            _ => return Err(VizError::UnknownKind(s.to_string())),
        };
        Ok(kind)
    }
}

/// Axis title for lambda `index`, with a short gloss for the first four.
pub fn lambda_label(index: usize) -> String {
    let gloss = match index {
        0 => Some("REE abundance"),
        1 => Some("heavy or light REE enrichment"),
        2 => Some("enrichment of middle REEs"),
        3 => Some("sinusoidality"),
        _ => None,
    };
    match gloss {
        Some(g) => format!("λ{index} ({g})"),
        None => format!("λ{index}"),
    }
}
