//! Per-frame color features: channel means, normalized 256-bin histograms
//! and summary statistics over each histogram.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ingest::PixelGrid;

pub const BINS: usize = 256;

/// Inclusive bin range treated as the high-intensity band.
pub const HIGH_BAND: std::ops::RangeInclusive<usize> = 180..=255;
/// Inclusive bin range treated as the low-intensity band.
pub const LOW_BAND: std::ops::RangeInclusive<usize> = 0..=89;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Channel {
    R,
    G,
    B,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::R, Channel::G, Channel::B];

    pub fn index(self) -> usize {
        match self {
            Channel::R => 0,
            Channel::G => 1,
            Channel::B => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::R => "red",
            Channel::G => "green",
            Channel::B => "blue",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Channel::R => "R",
            Channel::G => "G",
            Channel::B => "B",
        };
        f.write_str(s)
    }
}

impl FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "R" | "r" => Ok(Channel::R),
            "G" | "g" => Ok(Channel::G),
            "B" | "b" => Ok(Channel::B),
            other => Err(format!("unknown channel `{other}` (expected R, G or B)")),
        }
    }
}

/// Average intensity of each channel, in `[0, 255]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanVector {
    pub r_mean: f64,
    pub g_mean: f64,
    pub b_mean: f64,
}

impl MeanVector {
    pub fn new(r: f64, g: f64, b: f64) -> Self {
        MeanVector { r_mean: r, g_mean: g, b_mean: b }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.r_mean, self.g_mean, self.b_mean]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        MeanVector::new(a[0], a[1], a[2])
    }

    pub fn get(&self, channel: Channel) -> f64 {
        self.as_array()[channel.index()]
    }
}

/// Normalized frequencies of one channel's intensities; `bins` has length
/// [`BINS`] and sums to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelHistogram {
    pub channel: Channel,
    pub bins: Vec<f64>,
}

impl ChannelHistogram {
    /// Normalizes raw counts. Returns `None` when the counts are all zero or
    /// the slice is not [`BINS`] long.
    pub fn from_counts(channel: Channel, counts: &[u64]) -> Option<Self> {
        if counts.len() != BINS {
            return None;
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return None;
        }
        let total = total as f64;
        let bins = counts.iter().map(|&c| c as f64 / total).collect();
        Some(ChannelHistogram { channel, bins })
    }

    /// Wraps already-normalized bins. Returns `None` unless there are exactly
    /// [`BINS`] finite non-negative values summing to one within 1e-9.
    pub fn from_bins(channel: Channel, bins: Vec<f64>) -> Option<Self> {
        if bins.len() != BINS || bins.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return None;
        }
        let sum: f64 = bins.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return None;
        }
        Some(ChannelHistogram { channel, bins })
    }

    /// First moment of the distribution; equals the channel mean of the
    /// grid the histogram was built from.
    pub fn expected_intensity(&self) -> f64 {
        self.bins.iter().enumerate().map(|(i, b)| i as f64 * b).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramStats {
    /// Tallest bin's normalized frequency.
    pub peak_value: f64,
    /// Index of the tallest bin; ties resolve to the lowest index.
    pub peak_bin: usize,
    pub high_band_mass: f64,
    pub low_band_mass: f64,
    /// Third standardized moment; zero for a point mass.
    pub skewness: f64,
    /// Sum of absolute differences between neighbouring bins.
    pub total_variation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorFeature {
    pub frame_index: usize,
    pub mean: MeanVector,
    /// Indexed by [`Channel::index`].
    pub histograms: [ChannelHistogram; 3],
    pub stats: [HistogramStats; 3],
}

impl ColorFeature {
    pub fn histogram(&self, channel: Channel) -> &ChannelHistogram {
        &self.histograms[channel.index()]
    }

    pub fn stats(&self, channel: Channel) -> &HistogramStats {
        &self.stats[channel.index()]
    }
}

/// Per-channel mean using integer accumulation; exact for any grid that
/// fits in memory.
pub fn channel_means(grid: &PixelGrid) -> MeanVector {
    let mut sums = [0u64; 3];
    for p in grid.pixels() {
        for c in 0..3 {
            sums[c] += u64::from(p[c]);
        }
    }
    let n = grid.pixel_count() as f64;
    MeanVector::new(sums[0] as f64 / n, sums[1] as f64 / n, sums[2] as f64 / n)
}

/// Unnormalized intensity counts for all three channels in one pass.
pub fn channel_counts(grid: &PixelGrid) -> [[u64; BINS]; 3] {
    let mut counts = [[0u64; BINS]; 3];
    for p in grid.pixels() {
        counts[0][p[0] as usize] += 1;
        counts[1][p[1] as usize] += 1;
        counts[2][p[2] as usize] += 1;
    }
    counts
}

pub fn channel_histogram(grid: &PixelGrid, channel: Channel) -> ChannelHistogram {
    let mut counts = [0u64; BINS];
    let c = channel.index();
    for p in grid.pixels() {
        counts[p[c] as usize] += 1;
    }
    ChannelHistogram::from_counts(channel, &counts).expect("grid is never empty")
}

pub fn histogram_stats(h: &ChannelHistogram) -> HistogramStats {
    let bins = &h.bins;
    let (peak_bin, peak_value) = bins
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });

    let high_band_mass = bins[HIGH_BAND].iter().sum();
    let low_band_mass = bins[LOW_BAND].iter().sum();

    let mean = h.expected_intensity();
    let (mut m2, mut m3) = (0.0, 0.0);
    for (i, &w) in bins.iter().enumerate() {
        let d = i as f64 - mean;
        m2 += w * d * d;
        m3 += w * d * d * d;
    }
    // Variance below this is rounding noise around a point mass.
    let skewness = if m2 > 1e-12 { m3 / m2.powf(1.5) } else { 0.0 };

    let total_variation = bins.windows(2).map(|w| (w[1] - w[0]).abs()).sum();

    HistogramStats { peak_value, peak_bin, high_band_mass, low_band_mass, skewness, total_variation }
}

/// Computes every color feature of one frame.
pub fn extract_features(frame_index: usize, grid: &PixelGrid) -> ColorFeature {
    let counts = channel_counts(grid);
    let histograms = Channel::ALL.map(|ch| {
        ChannelHistogram::from_counts(ch, &counts[ch.index()]).expect("grid is never empty")
    });
    let stats = [
        histogram_stats(&histograms[0]),
        histogram_stats(&histograms[1]),
        histogram_stats(&histograms[2]),
    ];
    ColorFeature { frame_index, mean: channel_means(grid), histograms, stats }
}
