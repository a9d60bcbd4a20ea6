//! Training-free color-feature anomaly screening for keyframe sequences.
//!
//! Each keyframe is reduced to its RGB mean vector and three normalized
//! 256-bin channel histograms. Mean vectors are grouped with seeded Lloyd
//! KMeans; a frame alone in its cluster is *structurally rare*. Independently,
//! a frame whose histogram peak on a rule channel exceeds the mean peak of all
//! other frames by more than the response threshold raises a *channel flag*.
//! Both together grade the frame [`Grade::HighlyAnomalous`], either one alone
//! [`Grade::Suspicious`], neither [`Grade::Stable`].
//!
//! ```no_run
//! use chromasift::pipeline::{run_pipeline, RunConfig};
//!
//! let config = RunConfig::new("frames/");
//! let outcome = run_pipeline(&config)?;
//! for v in &outcome.report.verdicts {
//!     println!("{} {}", v.frame_index, v.grade);
//! }
//! # Ok::<(), chromasift::Error>(())
//! ```

pub mod cli;
pub mod cluster;
pub mod detect;
pub mod error;
pub mod features;
pub mod ingest;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use cluster::{kmeans_fit, ClusterConfig, ClusterModel};
pub use detect::{run_detection, AnomalyVerdict, DetectorConfig, Grade};
pub use error::{Error, Result};
pub use features::{extract_features, Channel, ColorFeature, MeanVector};
pub use ingest::{FrameRef, PixelGrid};
pub use pipeline::{run_pipeline, RunConfig};
pub use report::RunReport;
