//! Deterministic synthetic frames built from per-channel intensity
//! mixtures.
//!
//! [`make_reference_sequence`] produces a five-frame scene with a fixed
//! structure: frames 1 and 3 (indices 0 and 2) are a blue-dominant pair,
//! frames 2 and 4 (indices 1 and 3) are a pair with a narrow red peak in the
//! 180-255 band, and frame 5 (index 4) has a narrow blue peak in the 50-90
//! band and a mean vector far from both pairs. Frame numbers in file names
//! are 1-based; indices everywhere else are 0-based.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::PixelGrid;

/// One component of a channel mixture. `spread` is the standard deviation of
/// a Gaussian around `mean`; zero gives a point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mass {
    pub mean: f64,
    pub spread: f64,
    pub weight: f64,
}

impl Mass {
    pub const fn new(mean: f64, spread: f64, weight: f64) -> Self {
        Mass { mean, spread, weight }
    }

    pub const fn point(mean: f64) -> Self {
        Mass { mean, spread: 0.0, weight: 1.0 }
    }
}

pub type ChannelRecipe = Vec<Mass>;

/// Mixtures for the R, G and B channels of one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecipe {
    pub channels: [ChannelRecipe; 3],
}

impl FrameRecipe {
    pub fn validate(&self) -> Result<()> {
        for (c, recipe) in self.channels.iter().enumerate() {
            if recipe.is_empty() {
                return Err(Error::InvalidRecipe(format!("channel {c} has no components")));
            }
            let mut total = 0.0;
            for m in recipe {
                if !(0.0..=255.0).contains(&m.mean) {
                    return Err(Error::InvalidRecipe(format!(
                        "channel {c}: mean {} outside [0, 255]",
                        m.mean
                    )));
                }
                if !m.spread.is_finite() || m.spread < 0.0 {
                    return Err(Error::InvalidRecipe(format!(
                        "channel {c}: spread {} must be finite and non-negative",
                        m.spread
                    )));
                }
                if !m.weight.is_finite() || m.weight < 0.0 {
                    return Err(Error::InvalidRecipe(format!(
                        "channel {c}: weight {} must be finite and non-negative",
                        m.weight
                    )));
                }
                total += m.weight;
            }
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidRecipe(format!(
                    "channel {c}: weights sum to {total}, expected 1"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub frames: Vec<FrameRecipe>,
    pub width: u32,
    pub height: u32,
    /// Frame `i` is drawn with seed `seed + i`.
    pub seed: u64,
}

impl SceneSpec {
    pub fn render(&self) -> Result<Vec<PixelGrid>> {
        self.frames
            .iter()
            .enumerate()
            .map(|(i, r)| make_frame(r, (self.width, self.height), self.seed.wrapping_add(i as u64)))
            .collect()
    }
}

pub fn make_uniform_frame(color: [u8; 3], dims: (u32, u32)) -> Result<PixelGrid> {
    PixelGrid::filled(dims.0, dims.1, color)
}

fn draw(recipe: &[Mass], rng: &mut ChaCha8Rng) -> u8 {
    let mass = if recipe.len() == 1 {
        &recipe[0]
    } else {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        recipe
            .iter()
            .find(|m| {
                acc += m.weight;
                u < acc
            })
            .unwrap_or(&recipe[recipe.len() - 1])
    };
    let value = if mass.spread == 0.0 {
        mass.mean
    } else {
        let z: f64 = rng.sample(StandardNormal);
        mass.mean + mass.spread * z
    };
    value.round().clamp(0.0, 255.0) as u8
}

/// Draws every pixel's channels independently from the recipe mixtures with a
/// ChaCha8 generator seeded from `seed`.
pub fn make_frame(recipe: &FrameRecipe, dims: (u32, u32), seed: u64) -> Result<PixelGrid> {
    recipe.validate()?;
    let (w, h) = dims;
    if w == 0 || h == 0 {
        return Err(Error::InvalidDimensions { width: w, height: h });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = w as usize * h as usize;
    let mut pixels = Vec::with_capacity(n);
    for _ in 0..n {
        let r = draw(&recipe.channels[0], &mut rng);
        let g = draw(&recipe.channels[1], &mut rng);
        let b = draw(&recipe.channels[2], &mut rng);
        pixels.push([r, g, b]);
    }
    PixelGrid::new(w, h, pixels)
}

pub const REFERENCE_SEQUENCE_SEED: u64 = 2025;
pub const REFERENCE_SEQUENCE_DIMS: (u32, u32) = (256, 256);

fn gauss(mean: f64, spread: f64) -> ChannelRecipe {
    vec![Mass::new(mean, spread, 1.0)]
}

/// Frozen recipes of the five-frame reference scene.
pub fn reference_scene() -> SceneSpec {
    let frames = vec![
        // 1: blue-dominant, stable
        FrameRecipe { channels: [gauss(60.0, 20.0), gauss(100.0, 20.0), gauss(170.0, 20.0)] },
        // 2: narrow red peak at 215
        FrameRecipe {
            channels: [
                vec![Mass::new(215.0, 3.0, 0.35), Mass::new(100.0, 20.0, 0.65)],
                gauss(100.0, 20.0),
                gauss(110.0, 20.0),
            ],
        },
        // 3: near twin of 1
        FrameRecipe { channels: [gauss(66.0, 20.0), gauss(104.0, 20.0), gauss(174.0, 20.0)] },
        // 4: near twin of 2, red peak at 205
        FrameRecipe {
            channels: [
                vec![Mass::new(205.0, 3.0, 0.35), Mass::new(104.0, 20.0, 0.65)],
                gauss(98.0, 20.0),
                gauss(114.0, 20.0),
            ],
        },
        // 5: narrow blue peak at 70 plus a bright blue body
        FrameRecipe {
            channels: [
                gauss(110.0, 20.0),
                gauss(150.0, 20.0),
                vec![Mass::new(70.0, 3.0, 0.45), Mass::new(215.0, 15.0, 0.55)],
            ],
        },
    ];
    SceneSpec {
        frames,
        width: REFERENCE_SEQUENCE_DIMS.0,
        height: REFERENCE_SEQUENCE_DIMS.1,
        seed: REFERENCE_SEQUENCE_SEED,
    }
}

pub fn make_reference_sequence() -> Vec<PixelGrid> {
    reference_scene().render().expect("frozen recipes are valid")
}

/// Writes the reference scene as `frame_01.png` .. `frame_05.png`.
pub fn write_reference_sequence(out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    make_reference_sequence()
        .iter()
        .enumerate()
        .map(|(i, grid)| {
            let path = out_dir.join(format!("frame_{:02}.png", i + 1));
            grid.to_rgb_image()
                .save_with_format(&path, image::ImageFormat::Png)
                .map_err(|e| match e {
                    image::ImageError::IoError(io) => Error::io(&path, io),
                    other => Error::Render { path: path.clone(), reason: other.to_string() },
                })?;
            Ok(path)
        })
        .collect()
}
