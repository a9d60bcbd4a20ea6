//! C ABI over `chromasift`.
//!
//! Every fallible entry point returns a [`CsStatus`]; on anything other than
//! `CS_STATUS_OK` a description is available from [`cs_last_error_message`]
//! on the same thread. Handles are opaque and owned by the caller once
//! returned; release them with the matching `*_free` function. Strings
//! handed out by the library are released with [`cs_string_free`].
//!
//! The generated header lives at `include/chromasift.h`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use chromasift::cluster::ClusterConfig;
use chromasift::detect::{DetectorConfig, Grade};
use chromasift::features::{extract_features, Channel, ColorFeature, BINS};
use chromasift::ingest::{resize_bilinear, FrameRef, PixelGrid};
use chromasift::pipeline::{analyze, analyze_grids, build_report, write_outputs, Analysis, OutputFormats, RunConfig};
use chromasift::report;
use chromasift::{Error, RunReport};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Decode = 4,
    EmptyInput = 5,
    InsufficientPoints = 6,
    TooFewFrames = 7,
    NonFinite = 8,
    Serialize = 9,
    Render = 10,
    Internal = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsGrade {
    Stable = 0,
    Suspicious = 1,
    HighlyAnomalous = 2,
}

impl From<Grade> for CsGrade {
    fn from(g: Grade) -> Self {
        match g {
            Grade::Stable => CsGrade::Stable,
            Grade::Suspicious => CsGrade::Suspicious,
            Grade::HighlyAnomalous => CsGrade::HighlyAnomalous,
        }
    }
}

/// Bits for `CsConfig::rule_channels` and `CsVerdict::channel_flags`.
pub const CS_CHANNEL_R: u32 = 1;
pub const CS_CHANNEL_G: u32 = 2;
pub const CS_CHANNEL_B: u32 = 4;

/// Bits for `cs_report_write`.
pub const CS_OUTPUT_JSON: u32 = 1;
pub const CS_OUTPUT_CSV: u32 = 2;
pub const CS_OUTPUT_CHARTS: u32 = 4;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsConfig {
    pub k: u32,
    pub seed: u64,
    pub max_iterations: u32,
    pub convergence_tolerance: f64,
    pub restarts: u32,
    pub response_threshold: f64,
    /// Bitwise OR of `CS_CHANNEL_*`.
    pub rule_channels: u32,
    pub resize_width: u32,
    pub resize_height: u32,
    /// Only used by `cs_run_directory`.
    pub stride: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsHistogramStats {
    pub peak_value: f64,
    pub peak_bin: u32,
    pub high_band_mass: f64,
    pub low_band_mass: f64,
    pub skewness: f64,
    pub total_variation: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsVerdict {
    pub cluster: u32,
    pub cluster_size: u32,
    pub structurally_rare: bool,
    /// `CS_CHANNEL_*` bits of the rule channels that fired.
    pub channel_flags: u32,
    pub grade: CsGrade,
}

/// One packed RGB8 frame, row-major, `width * height * 3` bytes.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CsFrame {
    pub data: *const u8,
    pub width: u32,
    pub height: u32,
}

/// Features of a single frame.
pub struct CsFeatures {
    inner: ColorFeature,
}

/// Result of a full analysis.
pub struct CsReport {
    report: RunReport,
    analysis: Analysis,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> CsStatus {
    match e {
        Error::EmptyInput(_) => CsStatus::EmptyInput,
        Error::Io { .. } => CsStatus::Io,
        Error::Decode { .. } => CsStatus::Decode,
        Error::InsufficientPoints { .. } => CsStatus::InsufficientPoints,
        Error::TooFewFrames(_) => CsStatus::TooFewFrames,
        Error::NonFiniteInput { .. } => CsStatus::NonFinite,
        Error::Serialize(_) => CsStatus::Serialize,
        Error::Render { .. } => CsStatus::Render,
        Error::LengthMismatch { .. } => CsStatus::Internal,
        Error::InvalidPattern { .. }
        | Error::InvalidStride(_)
        | Error::InvalidDimensions { .. }
        | Error::InvalidClusterConfig(_)
        | Error::InvalidDetectorConfig(_)
        | Error::InvalidRecipe(_) => CsStatus::InvalidArgument,
    }
}

struct Failure(CsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn fail(status: CsStatus, msg: &str) -> Failure {
    Failure(status, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            CsStatus::Internal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(CsStatus::NullPointer, &format!("{what} is null")))
}

fn check_out<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(fail(CsStatus::NullPointer, &format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn channel_from(index: u32) -> Result<Channel, Failure> {
    Channel::ALL
        .get(index as usize)
        .copied()
        .ok_or_else(|| fail(CsStatus::InvalidArgument, &format!("channel index {index} out of range 0..3")))
}

fn channel_bit(ch: Channel) -> u32 {
    match ch {
        Channel::R => CS_CHANNEL_R,
        Channel::G => CS_CHANNEL_G,
        Channel::B => CS_CHANNEL_B,
    }
}

fn run_config(input: &str, c: &CsConfig) -> Result<RunConfig, Failure> {
    if c.rule_channels & !(CS_CHANNEL_R | CS_CHANNEL_G | CS_CHANNEL_B) != 0 {
        return Err(fail(CsStatus::InvalidArgument, "unknown bits in rule_channels"));
    }
    let mut rc = RunConfig::new(input);
    rc.stride = c.stride as usize;
    rc.resize = (c.resize_width, c.resize_height);
    rc.cluster = ClusterConfig {
        k: c.k as usize,
        seed: c.seed,
        max_iterations: c.max_iterations as usize,
        convergence_tolerance: c.convergence_tolerance,
        restarts: c.restarts as usize,
    };
    rc.detector = DetectorConfig {
        response_threshold: c.response_threshold,
        rule_channels: Channel::ALL.into_iter().filter(|&ch| c.rule_channels & channel_bit(ch) != 0).collect(),
    };
    rc.cluster.validate()?;
    rc.detector.validate()?;
    Ok(rc)
}

fn hand_out_string(s: String, out: *mut *mut c_char) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| fail(CsStatus::Internal, "string contains NUL"))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL after a
/// successful one. Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn cs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Reference settings: k 3, seed 42, 300 iterations, tolerance 1e-6,
/// 10 restarts, threshold 0.25, red rule only, 256x256, stride 1.
#[no_mangle]
pub extern "C" fn cs_config_default() -> CsConfig {
    let c = ClusterConfig::default();
    let d = DetectorConfig::default();
    let rc = RunConfig::new("");
    CsConfig {
        k: c.k as u32,
        seed: c.seed,
        max_iterations: c.max_iterations as u32,
        convergence_tolerance: c.convergence_tolerance,
        restarts: c.restarts as u32,
        response_threshold: d.response_threshold,
        rule_channels: d.rule_channels.iter().map(|&ch| channel_bit(ch)).sum(),
        resize_width: rc.resize.0,
        resize_height: rc.resize.1,
        stride: rc.stride as u32,
    }
}

/// Features of one packed RGB8 frame at its native size.
#[no_mangle]
pub unsafe extern "C" fn cs_features_from_rgb(
    data: *const u8,
    width: u32,
    height: u32,
    out: *mut *mut CsFeatures,
) -> CsStatus {
    guard(|| {
        check_out(out, "out")?;
        let grid = unsafe { grid_from_raw(data, width, height)? };
        let f = Box::new(CsFeatures { inner: extract_features(0, &grid) });
        unsafe { *out = Box::into_raw(f) };
        Ok(())
    })
}

unsafe fn grid_from_raw(data: *const u8, width: u32, height: u32) -> Result<PixelGrid, Failure> {
    if data.is_null() {
        return Err(fail(CsStatus::NullPointer, "data is null"));
    }
    let len = (width as usize)
        .checked_mul(height as usize)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| fail(CsStatus::InvalidArgument, "frame too large"))?;
    let bytes = std::slice::from_raw_parts(data, len);
    Ok(PixelGrid::from_rgb_bytes(width, height, bytes)?)
}

/// Writes the R, G, B means into `out[0..3]`.
#[no_mangle]
pub unsafe extern "C" fn cs_features_mean(features: *const CsFeatures, out: *mut f64) -> CsStatus {
    guard(|| {
        let f = unsafe { deref(features, "features")? };
        check_out(out, "out")?;
        let m = f.inner.mean.as_array();
        unsafe { ptr::copy_nonoverlapping(m.as_ptr(), out, 3) };
        Ok(())
    })
}

/// Writes the 256 normalized bins of `channel` (0 = R, 1 = G, 2 = B).
#[no_mangle]
pub unsafe extern "C" fn cs_features_histogram(
    features: *const CsFeatures,
    channel: u32,
    out: *mut f64,
) -> CsStatus {
    guard(|| {
        let f = unsafe { deref(features, "features")? };
        check_out(out, "out")?;
        let bins = &f.inner.histogram(channel_from(channel)?).bins;
        debug_assert_eq!(bins.len(), BINS);
        unsafe { ptr::copy_nonoverlapping(bins.as_ptr(), out, BINS) };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_features_stats(
    features: *const CsFeatures,
    channel: u32,
    out: *mut CsHistogramStats,
) -> CsStatus {
    guard(|| {
        let f = unsafe { deref(features, "features")? };
        check_out(out, "out")?;
        let s = f.inner.stats(channel_from(channel)?);
        unsafe {
            *out = CsHistogramStats {
                peak_value: s.peak_value,
                peak_bin: s.peak_bin as u32,
                high_band_mass: s.high_band_mass,
                low_band_mass: s.low_band_mass,
                skewness: s.skewness,
                total_variation: s.total_variation,
            }
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_features_free(features: *mut CsFeatures) {
    if !features.is_null() {
        drop(Box::from_raw(features));
    }
}

/// Analyzes the image frames found at `input` (directory, glob or file).
/// Nothing is written to disk; see `cs_report_write`.
#[no_mangle]
pub unsafe extern "C" fn cs_run_directory(
    input: *const c_char,
    config: *const CsConfig,
    out: *mut *mut CsReport,
) -> CsStatus {
    guard(|| {
        check_out(out, "out")?;
        if input.is_null() {
            return Err(fail(CsStatus::NullPointer, "input is null"));
        }
        let input = unsafe { CStr::from_ptr(input) }
            .to_str()
            .map_err(|_| fail(CsStatus::InvalidArgument, "input is not UTF-8"))?;
        let rc = run_config(input, unsafe { deref(config, "config")? })?;
        let analysis = analyze(&rc)?;
        let report = build_report(&rc, &analysis);
        unsafe { *out = Box::into_raw(Box::new(CsReport { report, analysis })) };
        Ok(())
    })
}

/// Analyzes in-memory frames in the given order. Frames are resized to the
/// configured size first; their source ids are `frame_<index>`.
#[no_mangle]
pub unsafe extern "C" fn cs_run_frames(
    frames: *const CsFrame,
    count: usize,
    config: *const CsConfig,
    out: *mut *mut CsReport,
) -> CsStatus {
    guard(|| {
        check_out(out, "out")?;
        if frames.is_null() {
            return Err(fail(CsStatus::NullPointer, "frames is null"));
        }
        if count == 0 {
            return Err(fail(CsStatus::EmptyInput, "no frames given"));
        }
        let rc = run_config("<memory>", unsafe { deref(config, "config")? })?;
        let frames = unsafe { std::slice::from_raw_parts(frames, count) };
        let mut grids = Vec::with_capacity(count);
        for f in frames {
            let g = unsafe { grid_from_raw(f.data, f.width, f.height)? };
            grids.push(resize_bilinear(&g, rc.resize.0, rc.resize.1)?);
        }
        let refs = (0..count).map(|i| FrameRef { index: i, source_id: format!("frame_{i}") }).collect();
        let analysis = analyze_grids(refs, &grids, &rc.cluster, &rc.detector)?;
        let report = build_report(&rc, &analysis);
        unsafe { *out = Box::into_raw(Box::new(CsReport { report, analysis })) };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_report_frame_count(report: *const CsReport, out: *mut usize) -> CsStatus {
    guard(|| {
        let r = unsafe { deref(report, "report")? };
        check_out(out, "out")?;
        unsafe { *out = r.report.verdicts.len() };
        Ok(())
    })
}

fn verdict_at(r: &CsReport, index: usize) -> Result<&chromasift::AnomalyVerdict, Failure> {
    r.report.verdicts.get(index).ok_or_else(|| {
        fail(CsStatus::InvalidArgument, &format!("frame {index} out of range 0..{}", r.report.verdicts.len()))
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_report_grade(report: *const CsReport, index: usize, out: *mut CsGrade) -> CsStatus {
    guard(|| {
        let r = unsafe { deref(report, "report")? };
        check_out(out, "out")?;
        unsafe { *out = verdict_at(r, index)?.grade.into() };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_report_cluster(report: *const CsReport, index: usize, out: *mut u32) -> CsStatus {
    guard(|| {
        let r = unsafe { deref(report, "report")? };
        check_out(out, "out")?;
        unsafe { *out = verdict_at(r, index)?.cluster as u32 };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_report_verdict(report: *const CsReport, index: usize, out: *mut CsVerdict) -> CsStatus {
    guard(|| {
        let r = unsafe { deref(report, "report")? };
        check_out(out, "out")?;
        let v = verdict_at(r, index)?;
        let flags = v.channel_flags.iter().filter(|(_, &f)| f).map(|(&ch, _)| channel_bit(ch)).sum();
        unsafe {
            *out = CsVerdict {
                cluster: v.cluster as u32,
                cluster_size: v.cluster_size as u32,
                structurally_rare: v.structurally_rare,
                channel_flags: flags,
                grade: v.grade.into(),
            }
        };
        Ok(())
    })
}

/// Highest grade over all frames.
#[no_mangle]
pub unsafe extern "C" fn cs_report_max_grade(report: *const CsReport, out: *mut CsGrade) -> CsStatus {
    guard(|| {
        let r = unsafe { deref(report, "report")? };
        check_out(out, "out")?;
        unsafe { *out = r.report.max_grade().unwrap_or(Grade::Stable).into() };
        Ok(())
    })
}

/// Canonical JSON report; free with `cs_string_free`.
#[no_mangle]
pub unsafe extern "C" fn cs_report_to_json(report: *const CsReport, out: *mut *mut c_char) -> CsStatus {
    guard(|| {
        let r = unsafe { deref(report, "report")? };
        check_out(out, "out")?;
        hand_out_string(report::to_canonical_json(&r.report)?, out)
    })
}

/// CSV report; free with `cs_string_free`.
#[no_mangle]
pub unsafe extern "C" fn cs_report_to_csv(report: *const CsReport, out: *mut *mut c_char) -> CsStatus {
    guard(|| {
        let r = unsafe { deref(report, "report")? };
        check_out(out, "out")?;
        hand_out_string(report::to_csv(&r.report)?, out)
    })
}

/// Writes the outputs selected by `outputs` (`CS_OUTPUT_*` bits) into `out_dir`.
#[no_mangle]
pub unsafe extern "C" fn cs_report_write(report: *const CsReport, out_dir: *const c_char, outputs: u32) -> CsStatus {
    guard(|| {
        let r = unsafe { deref(report, "report")? };
        if out_dir.is_null() {
            return Err(fail(CsStatus::NullPointer, "out_dir is null"));
        }
        let dir = unsafe { CStr::from_ptr(out_dir) }
            .to_str()
            .map_err(|_| fail(CsStatus::InvalidArgument, "out_dir is not UTF-8"))?;
        let formats = OutputFormats {
            json: outputs & CS_OUTPUT_JSON != 0,
            csv: outputs & CS_OUTPUT_CSV != 0,
            charts: outputs & CS_OUTPUT_CHARTS != 0,
        };
        write_outputs(&r.report, &r.analysis, Path::new(dir), formats)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cs_report_free(report: *mut CsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

#[no_mangle]
pub unsafe extern "C" fn cs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
