//! End-to-end run: ingest, features, clustering, detection, report.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{kmeans_fit, ClusterConfig, ClusterModel};
use crate::detect::{run_detection, AnomalyVerdict, DetectorConfig, Grade};
use crate::error::{Error, Result};
use crate::features::{extract_features, ColorFeature};
use crate::ingest::{discover_frames, load_and_resize, sample_keyframes, FrameRef, PixelGrid, DEFAULT_RESIZE};
use crate::report::{self, ConfigEcho, RunReport};

/// Exit status for a run that finished and found nothing highly anomalous.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
/// Exit status when at least one frame grades [`Grade::HighlyAnomalous`].
pub const EXIT_HIGHLY_ANOMALOUS: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFormats {
    pub json: bool,
    pub csv: bool,
    pub charts: bool,
}

impl Default for OutputFormats {
    fn default() -> Self {
        OutputFormats { json: true, csv: true, charts: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: String,
    pub stride: usize,
    pub resize: (u32, u32),
    pub cluster: ClusterConfig,
    pub detector: DetectorConfig,
    pub out_dir: PathBuf,
    pub formats: OutputFormats,
}

impl RunConfig {
    pub fn new(input: impl Into<String>) -> Self {
        RunConfig {
            input: input.into(),
            stride: 1,
            resize: DEFAULT_RESIZE,
            cluster: ClusterConfig::default(),
            detector: DetectorConfig::default(),
            out_dir: PathBuf::from("chromasift-out"),
            formats: OutputFormats::default(),
        }
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            input: self.input.clone(),
            stride: self.stride,
            resize: [self.resize.0, self.resize.1],
            cluster: self.cluster.clone(),
            detector: self.detector.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub frames: Vec<FrameRef>,
    pub features: Vec<ColorFeature>,
    pub model: ClusterModel,
    pub verdicts: Vec<AnomalyVerdict>,
}

impl Analysis {
    pub fn max_grade(&self) -> Option<Grade> {
        self.verdicts.iter().map(|v| v.grade).max()
    }
}

/// Clustering and detection over already-decoded frames. `grids` pairs with
/// `frames` by position.
pub fn analyze_grids(
    frames: Vec<FrameRef>,
    grids: &[PixelGrid],
    cluster: &ClusterConfig,
    detector: &DetectorConfig,
) -> Result<Analysis> {
    let features: Vec<ColorFeature> =
        grids.par_iter().enumerate().map(|(i, g)| extract_features(i, g)).collect();
    analyze_features(frames, features, cluster, detector)
}

pub fn analyze_features(
    frames: Vec<FrameRef>,
    features: Vec<ColorFeature>,
    cluster: &ClusterConfig,
    detector: &DetectorConfig,
) -> Result<Analysis> {
    detector.validate()?;
    let means: Vec<_> = features.iter().map(|f| f.mean).collect();
    let model = kmeans_fit(&means, cluster)?;
    let verdicts = run_detection(&features, &model, detector)?;
    Ok(Analysis { frames, features, model, verdicts })
}

/// Discovers, samples, decodes and analyzes the configured input.
pub fn analyze(config: &RunConfig) -> Result<Analysis> {
    config.cluster.validate()?;
    config.detector.validate()?;
    if config.resize.0 == 0 || config.resize.1 == 0 {
        return Err(Error::InvalidDimensions { width: config.resize.0, height: config.resize.1 });
    }
    let all = discover_frames(&config.input)?;
    let frames = sample_keyframes(&all, config.stride)?;
    let features = frames
        .par_iter()
        .map(|f| load_and_resize(f, config.resize).map(|g| extract_features(f.index, &g)))
        .collect::<Result<Vec<_>>>()?;
    analyze_features(frames, features, &config.cluster, &config.detector)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: RunReport,
    pub analysis: Analysis,
    pub written: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        exit_code_for(self.analysis.max_grade())
    }
}

pub fn exit_code_for(max_grade: Option<Grade>) -> i32 {
    if max_grade == Some(Grade::HighlyAnomalous) {
        EXIT_HIGHLY_ANOMALOUS
    } else {
        EXIT_OK
    }
}

pub fn build_report(config: &RunConfig, analysis: &Analysis) -> RunReport {
    RunReport::new(
        config.echo(),
        &analysis.frames,
        &analysis.features,
        &analysis.model,
        analysis.verdicts.clone(),
    )
}

/// Writes the configured outputs under `out_dir`.
pub fn write_outputs(
    report: &RunReport,
    analysis: &Analysis,
    out_dir: &Path,
    formats: OutputFormats,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    if formats.json {
        let p = out_dir.join("report.json");
        report::emit_json(report, &p)?;
        written.push(p);
    }
    if formats.csv {
        let p = out_dir.join("report.csv");
        report::emit_csv(report, &p)?;
        written.push(p);
    }
    if formats.charts {
        written.extend(report::render_histograms(&analysis.features, out_dir)?);
        written.push(report::render_cluster_scatter(&analysis.features, &analysis.model, out_dir)?);
    }
    Ok(written)
}

pub fn run_pipeline(config: &RunConfig) -> Result<RunOutcome> {
    let analysis = analyze(config)?;
    let report = build_report(config, &analysis);
    let written = write_outputs(&report, &analysis, &config.out_dir, config.formats)?;
    Ok(RunOutcome { report, analysis, written })
}
