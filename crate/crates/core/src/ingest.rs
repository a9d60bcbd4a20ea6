//! Frame discovery, keyframe sampling, decoding and resizing.
//!
//! Inputs are pre-extracted still images (PNG, JPEG or BMP). A video can be
//! turned into such a sequence with an external tool, e.g.
//! `ffmpeg -i clip.mp4 -vf fps=1 frames/frame_%05d.png`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Extensions accepted by [`discover_frames`], compared case-insensitively.
pub const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "bmp"];

/// Default working resolution every frame is resampled to.
pub const DEFAULT_RESIZE: (u32, u32) = (256, 256);

/// A frame's position in the ordered sequence plus where it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRef {
    pub index: usize,
    pub source_id: String,
}

impl FrameRef {
    pub fn path(&self) -> &Path {
        Path::new(&self.source_id)
    }
}

/// Row-major 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelGrid {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl PixelGrid {
    /// Builds a grid, checking that `pixels` holds exactly `width * height`
    /// entries and that the grid is not empty.
    pub fn new(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        if pixels.len() as u64 != u64::from(width) * u64::from(height) {
            return Err(Error::InvalidDimensions { width, height });
        }
        Ok(PixelGrid { width, height, pixels })
    }

    pub fn filled(width: u32, height: u32, color: [u8; 3]) -> Result<Self> {
        let len = (width as usize) * (height as usize);
        Self::new(width, height, vec![color; len])
    }

    /// Builds a grid from a tightly packed `RGBRGB...` byte buffer.
    pub fn from_rgb_bytes(width: u32, height: u32, bytes: &[u8]) -> Result<Self> {
        if bytes.len() as u64 != u64::from(width) * u64::from(height) * 3 {
            return Err(Error::InvalidDimensions { width, height });
        }
        let pixels = bytes.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[(y as usize) * (self.width as usize) + x as usize]
    }

    pub fn into_pixels(self) -> Vec<[u8; 3]> {
        self.pixels
    }

    pub fn to_rgb_image(&self) -> image::RgbImage {
        let raw: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        image::RgbImage::from_raw(self.width, self.height, raw)
            .expect("pixel buffer length matches dimensions")
    }
}

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.iter().any(|known| e.eq_ignore_ascii_case(known)))
        .unwrap_or(false)
}

fn is_glob(spec: &str) -> bool {
    spec.contains(['*', '?', '['])
}

/// Resolves a directory, a glob pattern or a single image file into an
/// ordered frame list.
///
/// Frames are sorted by the byte order of their path string, so zero-padded
/// frame dumps come out in capture order regardless of filesystem listing
/// order.
pub fn discover_frames(path_spec: &str) -> Result<Vec<FrameRef>> {
    let spec_path = Path::new(path_spec);
    let mut paths: Vec<PathBuf> = if spec_path.is_dir() {
        let entries = std::fs::read_dir(spec_path).map_err(|e| Error::io(spec_path, e))?;
        let mut out = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(spec_path, e))?;
            let path = entry.path();
            if path.is_file() && has_image_extension(&path) {
                out.push(path);
            }
        }
        out
    } else if is_glob(path_spec) {
        let matches = glob::glob(path_spec).map_err(|e| Error::InvalidPattern {
            pattern: path_spec.to_string(),
            reason: e.to_string(),
        })?;
        let mut out = Vec::new();
        for m in matches {
            let path = m.map_err(|e| {
                let path = e.path().to_path_buf();
                Error::io(path, e.into())
            })?;
            if path.is_file() && has_image_extension(&path) {
                out.push(path);
            }
        }
        out
    } else if spec_path.is_file() {
        if has_image_extension(spec_path) {
            vec![spec_path.to_path_buf()]
        } else {
            Vec::new()
        }
    } else if spec_path.exists() {
        Vec::new()
    } else {
        return Err(Error::io(
            spec_path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        ));
    };

    if paths.is_empty() {
        return Err(Error::EmptyInput(path_spec.to_string()));
    }
    paths.sort_by(|a, b| a.as_os_str().as_encoded_bytes().cmp(b.as_os_str().as_encoded_bytes()));

    Ok(paths
        .into_iter()
        .enumerate()
        .map(|(index, path)| FrameRef { index, source_id: path.to_string_lossy().into_owned() })
        .collect())
}

/// Keeps every `stride`-th frame starting at the first and renumbers the
/// survivors from zero.
pub fn sample_keyframes(frames: &[FrameRef], stride: usize) -> Result<Vec<FrameRef>> {
    if stride < 1 {
        return Err(Error::InvalidStride(stride));
    }
    Ok(frames
        .iter()
        .step_by(stride)
        .enumerate()
        .map(|(index, f)| FrameRef { index, source_id: f.source_id.clone() })
        .collect())
}

/// Decodes an image file into RGB, dropping alpha and expanding grayscale.
pub fn decode(path: &Path) -> Result<PixelGrid> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let format = image::ImageFormat::from_path(path)
        .or_else(|_| image::guess_format(&bytes))
        .map_err(|e| Error::Decode { path: path.to_path_buf(), reason: e.to_string() })?;
    let img = image::load_from_memory_with_format(&bytes, format)
        .map_err(|e| Error::Decode { path: path.to_path_buf(), reason: e.to_string() })?;
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    let pixels = rgb.pixels().map(|p| p.0).collect();
    PixelGrid::new(w, h, pixels)
        .map_err(|_| Error::Decode { path: path.to_path_buf(), reason: "empty image".into() })
}

pub fn load_and_resize(frame: &FrameRef, target: (u32, u32)) -> Result<PixelGrid> {
    let (width, height) = target;
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    let grid = decode(frame.path())?;
    resize_bilinear(&grid, width, height)
}

/// Source coordinate sampled by output coordinate `dst` under half-pixel
/// centre alignment, clamped to the valid source range. Returns the lower
/// neighbour, the upper neighbour and the weight of the upper one.
fn sample_axis(dst: u32, src_len: u32, dst_len: u32) -> (usize, usize, f64) {
    let scale = f64::from(src_len) / f64::from(dst_len);
    let pos = ((f64::from(dst) + 0.5) * scale - 0.5).clamp(0.0, f64::from(src_len - 1));
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(src_len as usize - 1);
    (lo, hi, pos - lo as f64)
}

/// Bilinear resampling with pixel-centre alignment and edge clamping.
/// Results are rounded to the nearest integer, halves away from zero.
/// Same-size input is returned unchanged.
pub fn resize_bilinear(src: &PixelGrid, width: u32, height: u32) -> Result<PixelGrid> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    if src.width == width && src.height == height {
        return Ok(src.clone());
    }
    let xs: Vec<_> = (0..width).map(|x| sample_axis(x, src.width, width)).collect();
    let sw = src.width as usize;
    let mut pixels = Vec::with_capacity(width as usize * height as usize);
    for y in 0..height {
        let (y0, y1, fy) = sample_axis(y, src.height, height);
        for &(x0, x1, fx) in &xs {
            let p00 = src.pixels[y0 * sw + x0];
            let p10 = src.pixels[y0 * sw + x1];
            let p01 = src.pixels[y1 * sw + x0];
            let p11 = src.pixels[y1 * sw + x1];
            let mut out = [0u8; 3];
            for c in 0..3 {
                let top = f64::from(p00[c]) * (1.0 - fx) + f64::from(p10[c]) * fx;
                let bottom = f64::from(p01[c]) * (1.0 - fx) + f64::from(p11[c]) * fx;
                let v = top * (1.0 - fy) + bottom * fy;
                out[c] = v.round().clamp(0.0, 255.0) as u8;
            }
            pixels.push(out);
        }
    }
    PixelGrid::new(width, height, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn touch(dir: &Path, name: &str) {
        let grid = PixelGrid::filled(2, 2, [1, 2, 3]).unwrap();
        grid.to_rgb_image().save(dir.join(name)).unwrap();
    }

    #[test]
    fn discover_sorts_lexicographically() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["b.png", "a.png", "c.png"] {
            touch(dir.path(), name);
        }
        std::fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let frames = discover_frames(dir.path().to_str().unwrap()).unwrap();
        let names: Vec<_> = frames
            .iter()
            .map(|f| (f.path().file_name().unwrap().to_str().unwrap().to_string(), f.index))
            .collect();
        assert_eq!(
            names,
            vec![("a.png".to_string(), 0), ("b.png".to_string(), 1), ("c.png".to_string(), 2)]
        );
    }

    #[test]
    fn discover_singleton_and_glob() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "f1.png");
        let frames = discover_frames(dir.path().to_str().unwrap()).unwrap();
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].index, 0);

        touch(dir.path(), "f2.bmp");
        let pattern = format!("{}/*.png", dir.path().display());
        let frames = discover_frames(&pattern).unwrap();
        assert_eq!(frames.len(), 1);
        assert!(frames[0].source_id.ends_with("f1.png"));
    }

    #[test]
    fn discover_empty_dir_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = discover_frames(dir.path().to_str().unwrap()).unwrap_err();
        assert!(matches!(err, Error::EmptyInput(_)));
    }

    #[test]
    fn discover_missing_path_is_io_error() {
        let err = discover_frames("/definitely/not/here").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    fn refs(n: usize) -> Vec<FrameRef> {
        (0..n).map(|i| FrameRef { index: i, source_id: format!("f{i:03}.png") }).collect()
    }

    #[test]
    fn stride_sampling() {
        let out = sample_keyframes(&refs(10), 2).unwrap();
        let ids: Vec<_> = out.iter().map(|f| f.source_id.as_str()).collect();
        assert_eq!(ids, ["f000.png", "f002.png", "f004.png", "f006.png", "f008.png"]);
        assert_eq!(out.iter().map(|f| f.index).collect::<Vec<_>>(), [0, 1, 2, 3, 4]);

        assert_eq!(sample_keyframes(&refs(5), 1).unwrap(), refs(5));
        let single = sample_keyframes(&refs(5), 7).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].source_id, "f000.png");

        assert!(matches!(sample_keyframes(&refs(5), 0), Err(Error::InvalidStride(0))));
    }

    #[test]
    fn resize_constant_image_is_constant() {
        let src = PixelGrid::filled(512, 512, [10, 20, 30]).unwrap();
        let out = resize_bilinear(&src, 256, 256).unwrap();
        assert_eq!(out.pixel_count(), 256 * 256);
        assert!(out.pixels().iter().all(|&p| p == [10, 20, 30]));
    }

    #[test]
    fn resize_identity_is_bit_exact() {
        let pixels = (0..256 * 256u32)
            .map(|i| [(i % 251) as u8, (i % 239) as u8, (i / 256) as u8])
            .collect();
        let src = PixelGrid::new(256, 256, pixels).unwrap();
        assert_eq!(resize_bilinear(&src, 256, 256).unwrap(), src);
    }

    #[test]
    fn resize_two_to_four_matches_hand_bilinear() {
        // Output centres x = 0.5, 1.5, 2.5, 3.5 map to source coordinates
        // x * 2/4 - 0.5 = -0.25, 0.25, 0.75, 1.25; clamped to [0, 1] and
        // linearly interpolated between 0 and 255:
        //   0, 0.25*255 = 63.75, 0.75*255 = 191.25, 255
        let src = PixelGrid::new(2, 1, vec![[0, 0, 0], [255, 255, 255]]).unwrap();
        let out = resize_bilinear(&src, 4, 1).unwrap();
        let reds: Vec<u8> = out.pixels().iter().map(|p| p[0]).collect();
        assert_eq!(reds, [0, 64, 191, 255]);
        assert!(out.pixels().iter().all(|p| p[0] == p[1] && p[1] == p[2]));
    }

    #[test]
    fn load_resizes_and_strips_alpha() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgba.png");
        image::RgbaImage::from_pixel(8, 4, image::Rgba([10, 20, 30, 7])).save(&path).unwrap();
        let frame = FrameRef { index: 0, source_id: path.to_string_lossy().into_owned() };
        let grid = load_and_resize(&frame, (4, 4)).unwrap();
        assert_eq!((grid.width(), grid.height()), (4, 4));
        assert!(grid.pixels().iter().all(|&p| p == [10, 20, 30]));

        let gray = dir.path().join("gray.png");
        image::GrayImage::from_pixel(3, 3, image::Luma([77])).save(&gray).unwrap();
        let frame = FrameRef { index: 0, source_id: gray.to_string_lossy().into_owned() };
        let grid = load_and_resize(&frame, (3, 3)).unwrap();
        assert!(grid.pixels().iter().all(|&p| p == [77, 77, 77]));
    }

    #[test]
    fn corrupt_file_is_decode_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.png");
        std::fs::write(&path, b"not a png").unwrap();
        let frame = FrameRef { index: 0, source_id: path.to_string_lossy().into_owned() };
        assert!(matches!(load_and_resize(&frame, (4, 4)), Err(Error::Decode { .. })));
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(PixelGrid::new(0, 1, vec![]).is_err());
        assert!(PixelGrid::new(2, 2, vec![[0; 3]; 3]).is_err());
        assert!(PixelGrid::from_rgb_bytes(1, 1, &[1, 2]).is_err());
    }
}
