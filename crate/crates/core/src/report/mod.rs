//! Run reports: canonical JSON, a flat CSV table and charts.
//!
//! JSON output has lexicographically sorted object keys, arrays in frame
//! order and shortest round-trip float formatting, so identical runs produce
//! identical bytes. The layout is versioned by [`SCHEMA_VERSION`] and
//! documented in `docs/report-schema.md`.

pub mod chart;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterConfig, ClusterModel, Point};
use crate::detect::{AnomalyVerdict, DetectorConfig};
use crate::error::{Error, Result};
use crate::features::{Channel, ColorFeature, HistogramStats, MeanVector};
use crate::ingest::FrameRef;

pub use chart::{
    histogram_chart_data, render_cluster_scatter, render_histograms, scatter_chart_data,
    HistogramChartData, ScatterChartData,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub input: String,
    pub stride: usize,
    pub resize: [u32; 2],
    pub cluster: ClusterConfig,
    pub detector: DetectorConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSummary {
    pub index: usize,
    pub source_id: String,
    pub mean: MeanVector,
    pub stats: BTreeMap<Channel, HistogramStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSection {
    pub centroids: Vec<Point>,
    pub assignments: Vec<usize>,
    pub cluster_sizes: Vec<usize>,
    pub inertia: f64,
    pub iterations_run: usize,
    pub inertia_trace: Vec<f64>,
    pub seed: u64,
}

impl From<&ClusterModel> for ClusterSection {
    fn from(m: &ClusterModel) -> Self {
        ClusterSection {
            centroids: m.centroids.clone(),
            assignments: m.assignments.clone(),
            cluster_sizes: m.cluster_sizes(),
            inertia: m.inertia,
            iterations_run: m.iterations_run,
            inertia_trace: m.inertia_trace.clone(),
            seed: m.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config_echo: ConfigEcho,
    pub frame_summaries: Vec<FrameSummary>,
    pub cluster_section: ClusterSection,
    pub verdicts: Vec<AnomalyVerdict>,
}

impl RunReport {
    pub fn new(
        config_echo: ConfigEcho,
        frames: &[FrameRef],
        features: &[ColorFeature],
        model: &ClusterModel,
        verdicts: Vec<AnomalyVerdict>,
    ) -> Self {
        let frame_summaries = frames
            .iter()
            .zip(features)
            .map(|(f, feat)| FrameSummary {
                index: f.index,
                source_id: f.source_id.clone(),
                mean: feat.mean,
                stats: Channel::ALL.iter().map(|&c| (c, *feat.stats(c))).collect(),
            })
            .collect();
        RunReport {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            config_echo,
            frame_summaries,
            cluster_section: model.into(),
            verdicts,
        }
    }

    pub fn max_grade(&self) -> Option<crate::detect::Grade> {
        self.verdicts.iter().map(|v| v.grade).max()
    }
}

/// Canonical JSON text of a report, newline-terminated.
pub fn to_canonical_json(report: &RunReport) -> Result<String> {
    // serde_json's Map is a BTreeMap here, which sorts keys on the way through.
    let value = serde_json::to_value(report).map_err(|e| Error::Serialize(e.to_string()))?;
    let mut text = serde_json::to_string_pretty(&value).map_err(|e| Error::Serialize(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn from_json(text: &str) -> Result<RunReport> {
    serde_json::from_str(text).map_err(|e| Error::Serialize(e.to_string()))
}

pub fn emit_json(report: &RunReport, destination: &Path) -> Result<()> {
    let text = to_canonical_json(report)?;
    std::fs::write(destination, text).map_err(|e| Error::io(destination, e))
}

pub const CSV_HEADER: [&str; 20] = [
    "index",
    "source_id",
    "r_mean",
    "g_mean",
    "b_mean",
    "cluster",
    "r_peak_value",
    "r_peak_bin",
    "r_high_band_mass",
    "g_peak_value",
    "g_peak_bin",
    "g_high_band_mass",
    "b_peak_value",
    "b_peak_bin",
    "b_high_band_mass",
    "structurally_rare",
    "r_flag",
    "g_flag",
    "b_flag",
    "grade",
];

/// One CSV row per frame. Flag columns of channels outside the rule set are
/// left empty.
pub fn to_csv(report: &RunReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(CSV_HEADER).map_err(ser)?;
    for (s, v) in report.frame_summaries.iter().zip(&report.verdicts) {
        let mut row = vec![
            s.index.to_string(),
            s.source_id.clone(),
            s.mean.r_mean.to_string(),
            s.mean.g_mean.to_string(),
            s.mean.b_mean.to_string(),
            v.cluster.to_string(),
        ];
        for ch in Channel::ALL {
            let st = &s.stats[&ch];
            row.push(st.peak_value.to_string());
            row.push(st.peak_bin.to_string());
            row.push(st.high_band_mass.to_string());
        }
        row.push(v.structurally_rare.to_string());
        for ch in Channel::ALL {
            row.push(v.channel_flags.get(&ch).map(bool::to_string).unwrap_or_default());
        }
        row.push(v.grade.to_string());
        w.write_record(&row).map_err(ser)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
}

pub fn emit_csv(report: &RunReport, destination: &Path) -> Result<()> {
    let text = to_csv(report)?;
    std::fs::write(destination, text).map_err(|e| Error::io(destination, e))
}
