//! Composite rule system: structural rarity (singleton cluster) combined with
//! a leave-one-out histogram peak response per configured channel.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cluster::{rarity_flags, ClusterModel};
use crate::error::{Error, Result};
use crate::features::{Channel, ColorFeature};

pub const DEFAULT_RESPONSE_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// A frame's peak must exceed `(1 + threshold)` times the mean peak of
    /// the other frames, strictly.
    pub response_threshold: f64,
    pub rule_channels: BTreeSet<Channel>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            response_threshold: DEFAULT_RESPONSE_THRESHOLD,
            rule_channels: BTreeSet::from([Channel::R]),
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.response_threshold.is_finite() || self.response_threshold <= 0.0 {
            return Err(Error::InvalidDetectorConfig(format!(
                "response threshold must be a positive finite number, got {}",
                self.response_threshold
            )));
        }
        if self.rule_channels.is_empty() {
            return Err(Error::InvalidDetectorConfig("at least one rule channel is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Grade {
    Stable,
    Suspicious,
    HighlyAnomalous,
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Grade::Stable => "Stable",
            Grade::Suspicious => "Suspicious",
            Grade::HighlyAnomalous => "HighlyAnomalous",
        })
    }
}

/// Numbers behind one channel-response decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelResponse {
    pub peak_value: f64,
    /// Mean peak value of every other frame.
    pub baseline: f64,
    /// `peak_value / baseline`; absent when the baseline is zero.
    pub ratio: Option<f64>,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyVerdict {
    pub frame_index: usize,
    pub cluster: usize,
    pub cluster_size: usize,
    pub structurally_rare: bool,
    pub channel_flags: BTreeMap<Channel, bool>,
    pub channel_evidence: BTreeMap<Channel, ChannelResponse>,
    pub grade: Grade,
    pub rationale: Vec<String>,
}

impl AnomalyVerdict {
    pub fn any_channel_flag(&self) -> bool {
        self.channel_flags.values().any(|&f| f)
    }
}

/// Leave-one-out peak comparison for every frame on one channel.
pub fn channel_responses(
    features: &[ColorFeature],
    channel: Channel,
    config: &DetectorConfig,
) -> Result<Vec<ChannelResponse>> {
    let peaks: Vec<f64> = features.iter().map(|f| f.stats(channel).peak_value).collect();
    peak_responses(&peaks, config.response_threshold)
}

/// The response rule on bare peak values.
pub fn peak_responses(peaks: &[f64], threshold: f64) -> Result<Vec<ChannelResponse>> {
    let n = peaks.len();
    if n < 2 {
        return Err(Error::TooFewFrames(n));
    }
    let factor = 1.0 + threshold;
    Ok((0..n)
        .map(|i| {
            let others: f64 =
                peaks.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, p)| p).sum();
            let baseline = others / (n - 1) as f64;
            let peak_value = peaks[i];
            let ratio = (baseline > 0.0).then(|| peak_value / baseline);
            ChannelResponse { peak_value, baseline, ratio, flagged: peak_value > factor * baseline }
        })
        .collect())
}

pub fn channel_response_flags(
    features: &[ColorFeature],
    channel: Channel,
    config: &DetectorConfig,
) -> Result<Vec<bool>> {
    Ok(channel_responses(features, channel, config)?.into_iter().map(|r| r.flagged).collect())
}

pub fn grade_frame(structurally_rare: bool, any_channel_flag: bool) -> Grade {
    match (structurally_rare, any_channel_flag) {
        (true, true) => Grade::HighlyAnomalous,
        (true, false) | (false, true) => Grade::Suspicious,
        (false, false) => Grade::Stable,
    }
}

pub fn run_detection(
    features: &[ColorFeature],
    model: &ClusterModel,
    config: &DetectorConfig,
) -> Result<Vec<AnomalyVerdict>> {
    config.validate()?;
    if features.len() != model.assignments.len() {
        return Err(Error::LengthMismatch {
            features: features.len(),
            assignments: model.assignments.len(),
        });
    }
    if features.len() < 2 {
        return Err(Error::TooFewFrames(features.len()));
    }

    let rare = rarity_flags(&model.assignments);
    let sizes = model.cluster_sizes();
    let mut responses = BTreeMap::new();
    for &ch in &config.rule_channels {
        responses.insert(ch, channel_responses(features, ch, config)?);
    }
    let factor = 1.0 + config.response_threshold;

    Ok(features
        .iter()
        .enumerate()
        .map(|(i, feature)| {
            let cluster = model.assignments[i];
            let cluster_size = sizes[cluster];
            let mut rationale = Vec::new();
            if rare[i] {
                rationale.push(format!(
                    "structural rarity: cluster {cluster} has {cluster_size} member"
                ));
            }
            let mut channel_flags = BTreeMap::new();
            let mut channel_evidence = BTreeMap::new();
            for (&ch, rs) in &responses {
                let r = rs[i];
                if r.flagged {
                    let ratio = r.ratio.map_or_else(|| "inf".to_string(), |v| format!("{v:.4}"));
                    rationale.push(format!(
                        "{ch} channel response: peak {:.6} > {factor} x baseline {:.6} (ratio {ratio})",
                        r.peak_value, r.baseline
                    ));
                }
                channel_flags.insert(ch, r.flagged);
                channel_evidence.insert(ch, r);
            }
            let any = channel_flags.values().any(|&f| f);
            let grade = grade_frame(rare[i], any);
            if rationale.is_empty() {
                rationale.push("no rule fired".to_string());
            }
            AnomalyVerdict {
                frame_index: feature.frame_index,
                cluster,
                cluster_size,
                structurally_rare: rare[i],
                channel_flags,
                channel_evidence,
                grade,
                rationale,
            }
        })
        .collect())
}
