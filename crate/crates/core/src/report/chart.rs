//! SVG charts. Every chart is drawn from a plain data table that is also
//! returned to callers, so tests assert on the numbers rather than pixels.

use std::path::{Path, PathBuf};

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::ClusterModel;
use crate::error::{Error, Result};
use crate::features::{Channel, ColorFeature, BINS};

pub const CHART_EXTENSION: &str = "svg";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSeries {
    pub channel: Channel,
    /// Normalized frequency per intensity; x is the position in the vector.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramChartData {
    pub frame_index: usize,
    pub series: Vec<HistogramSeries>,
}

impl HistogramChartData {
    pub fn series(&self, channel: Channel) -> &HistogramSeries {
        self.series.iter().find(|s| s.channel == channel).expect("all channels present")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub frame_index: usize,
    pub r_mean: f64,
    pub cluster: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterChartData {
    pub points: Vec<ScatterPoint>,
    pub cluster_sizes: Vec<usize>,
}

impl ScatterChartData {
    pub fn singleton_clusters(&self) -> Vec<usize> {
        (0..self.cluster_sizes.len()).filter(|&c| self.cluster_sizes[c] == 1).collect()
    }

    pub fn legend_labels(&self) -> Vec<String> {
        self.cluster_sizes
            .iter()
            .enumerate()
            .map(|(c, n)| {
                let tag = if *n == 1 { ", singleton" } else { "" };
                format!("cluster {c} (n={n}{tag})")
            })
            .collect()
    }
}

pub fn histogram_chart_data(feature: &ColorFeature) -> HistogramChartData {
    HistogramChartData {
        frame_index: feature.frame_index,
        series: Channel::ALL
            .iter()
            .map(|&c| HistogramSeries { channel: c, values: feature.histogram(c).bins.clone() })
            .collect(),
    }
}

pub fn scatter_chart_data(features: &[ColorFeature], model: &ClusterModel) -> ScatterChartData {
    ScatterChartData {
        points: features
            .iter()
            .zip(&model.assignments)
            .map(|(f, &cluster)| ScatterPoint { frame_index: f.frame_index, r_mean: f.mean.r_mean, cluster })
            .collect(),
        cluster_sizes: model.cluster_sizes(),
    }
}

fn render_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Render { path: path.to_path_buf(), reason: e.to_string() }
}

fn channel_color(c: Channel) -> RGBColor {
    match c {
        Channel::R => RGBColor(214, 39, 40),
        Channel::G => RGBColor(44, 160, 44),
        Channel::B => RGBColor(31, 119, 180),
    }
}

const CLUSTER_PALETTE: [RGBColor; 8] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
    RGBColor(227, 119, 194),
    RGBColor(127, 127, 127),
    RGBColor(188, 189, 34),
];

pub fn render_histogram_chart(data: &HistogramChartData, path: &Path) -> Result<()> {
    let err = |e: &dyn std::fmt::Display| render_err(path, e);
    let y_max = data
        .series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .fold(0.0f64, f64::max)
        .max(1e-3)
        * 1.05;

    let root = SVGBackend::new(path, (800, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| err(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("Frame {} RGB histogram", data.frame_index), ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(56)
        .build_cartesian_2d(0u32..(BINS as u32 - 1), 0f64..y_max)
        .map_err(|e| err(&e))?;
    chart
        .configure_mesh()
        .x_desc("intensity")
        .y_desc("normalized frequency")
        .draw()
        .map_err(|e| err(&e))?;

    for s in &data.series {
        let color = channel_color(s.channel);
        chart
            .draw_series(LineSeries::new(
                s.values.iter().enumerate().map(|(x, &y)| (x as u32, y)),
                &color,
            ))
            .map_err(|e| err(&e))?
            .label(s.channel.name())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| err(&e))?;
    root.present().map_err(|e| err(&e))?;
    Ok(())
}

/// Writes `hist_<index>.svg` for every frame.
pub fn render_histograms(features: &[ColorFeature], out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    features
        .iter()
        .map(|f| {
            let path = out_dir.join(format!("hist_{}.{CHART_EXTENSION}", f.frame_index));
            render_histogram_chart(&histogram_chart_data(f), &path)?;
            Ok(path)
        })
        .collect()
}

pub fn render_scatter_chart(data: &ScatterChartData, path: &Path) -> Result<()> {
    let err = |e: &dyn std::fmt::Display| render_err(path, e);
    let x_max = data.points.iter().map(|p| p.frame_index).max().unwrap_or(0) as f64 + 0.5;

    let root = SVGBackend::new(path, (800, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| err(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Keyframe clusters by red channel mean", ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(56)
        .build_cartesian_2d(-0.5f64..x_max, 0f64..255f64)
        .map_err(|e| err(&e))?;
    chart
        .configure_mesh()
        .x_desc("keyframe index")
        .y_desc("red channel mean")
        .draw()
        .map_err(|e| err(&e))?;

    let labels = data.legend_labels();
    for (cluster, label) in labels.into_iter().enumerate() {
        let color = CLUSTER_PALETTE[cluster % CLUSTER_PALETTE.len()];
        let singleton = data.cluster_sizes[cluster] == 1;
        let pts: Vec<(f64, f64)> = data
            .points
            .iter()
            .filter(|p| p.cluster == cluster)
            .map(|p| (p.frame_index as f64, p.r_mean))
            .collect();
        if singleton {
            // singletons get an enlarged triangle with an outline ring
            chart
                .draw_series(pts.iter().map(|&(x, y)| TriangleMarker::new((x, y), 11, color.filled())))
                .map_err(|e| err(&e))?
                .label(label)
                .legend(move |(x, y)| TriangleMarker::new((x + 8, y), 6, color.filled()));
            chart
                .draw_series(pts.iter().map(|&(x, y)| Circle::new((x, y), 16, BLACK.stroke_width(2))))
                .map_err(|e| err(&e))?;
        } else {
            chart
                .draw_series(pts.iter().map(|&(x, y)| Circle::new((x, y), 7, color.filled())))
                .map_err(|e| err(&e))?
                .label(label)
                .legend(move |(x, y)| Circle::new((x + 8, y), 5, color.filled()));
        }
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| err(&e))?;
    root.present().map_err(|e| err(&e))?;
    Ok(())
}

/// Writes `clusters.svg` and returns its path.
pub fn render_cluster_scatter(
    features: &[ColorFeature],
    model: &ClusterModel,
    out_dir: &Path,
) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(format!("clusters.{CHART_EXTENSION}"));
    render_scatter_chart(&scatter_chart_data(features, model), &path)?;
    Ok(path)
}
