/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef CHROMASIFT_H
#define CHROMASIFT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Bits for `CsConfig::rule_channels` and `CsVerdict::channel_flags`.
#define CS_CHANNEL_R 1

#define CS_CHANNEL_G 2

#define CS_CHANNEL_B 4

// Bits for `cs_report_write`.
#define CS_OUTPUT_JSON 1

#define CS_OUTPUT_CSV 2

#define CS_OUTPUT_CHARTS 4

// Status code returned by every fallible call.
typedef enum CsStatus {
  CS_STATUS_OK = 0,
  CS_STATUS_NULL_POINTER = 1,
  CS_STATUS_INVALID_ARGUMENT = 2,
  CS_STATUS_IO = 3,
  CS_STATUS_DECODE = 4,
  CS_STATUS_EMPTY_INPUT = 5,
  CS_STATUS_INSUFFICIENT_POINTS = 6,
  CS_STATUS_TOO_FEW_FRAMES = 7,
  CS_STATUS_NON_FINITE = 8,
  CS_STATUS_SERIALIZE = 9,
  CS_STATUS_RENDER = 10,
  CS_STATUS_INTERNAL = 11,
} CsStatus;

typedef enum CsGrade {
  CS_GRADE_STABLE = 0,
  CS_GRADE_SUSPICIOUS = 1,
  CS_GRADE_HIGHLY_ANOMALOUS = 2,
} CsGrade;

// Features of a single frame.
typedef struct CsFeatures CsFeatures;

// Result of a full analysis.
typedef struct CsReport CsReport;

typedef struct CsConfig {
  uint32_t k;
  uint64_t seed;
  uint32_t max_iterations;
  double convergence_tolerance;
  uint32_t restarts;
  double response_threshold;
  // Bitwise OR of `CS_CHANNEL_*`.
  uint32_t rule_channels;
  uint32_t resize_width;
  uint32_t resize_height;
  // Only used by `cs_run_directory`.
  uint32_t stride;
} CsConfig;

typedef struct CsHistogramStats {
  double peak_value;
  uint32_t peak_bin;
  double high_band_mass;
  double low_band_mass;
  double skewness;
  double total_variation;
} CsHistogramStats;

// One packed RGB8 frame, row-major, `width * height * 3` bytes.
typedef struct CsFrame {
  const uint8_t *data;
  uint32_t width;
  uint32_t height;
} CsFrame;

typedef struct CsVerdict {
  uint32_t cluster;
  uint32_t cluster_size;
  bool structurally_rare;
  // `CS_CHANNEL_*` bits of the rule channels that fired.
  uint32_t channel_flags;
  enum CsGrade grade;
} CsVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static NUL-terminated string.
const char *cs_version(void);

// Message for the last failed call on this thread, or NULL after a
// successful one. Valid until the next call into the library on this thread.
const char *cs_last_error_message(void);

// Reference settings: k 3, seed 42, 300 iterations, tolerance 1e-6,
// 10 restarts, threshold 0.25, red rule only, 256x256, stride 1.
struct CsConfig cs_config_default(void);

// Features of one packed RGB8 frame at its native size.
enum CsStatus cs_features_from_rgb(const uint8_t *data,
                                   uint32_t width,
                                   uint32_t height,
                                   struct CsFeatures **out);

// Writes the R, G, B means into `out[0..3]`.
enum CsStatus cs_features_mean(const struct CsFeatures *features, double *out);

// Writes the 256 normalized bins of `channel` (0 = R, 1 = G, 2 = B).
enum CsStatus cs_features_histogram(const struct CsFeatures *features,
                                    uint32_t channel,
                                    double *out);

enum CsStatus cs_features_stats(const struct CsFeatures *features,
                                uint32_t channel,
                                struct CsHistogramStats *out);

void cs_features_free(struct CsFeatures *features);

// Analyzes the image frames found at `input` (directory, glob or file).
// Nothing is written to disk; see `cs_report_write`.
enum CsStatus cs_run_directory(const char *input,
                               const struct CsConfig *config,
                               struct CsReport **out);

// Analyzes in-memory frames in the given order. Frames are resized to the
// configured size first; their source ids are `frame_<index>`.
enum CsStatus cs_run_frames(const struct CsFrame *frames,
                            size_t count,
                            const struct CsConfig *config,
                            struct CsReport **out);

enum CsStatus cs_report_frame_count(const struct CsReport *report, size_t *out);

enum CsStatus cs_report_grade(const struct CsReport *report, size_t index, enum CsGrade *out);

enum CsStatus cs_report_cluster(const struct CsReport *report, size_t index, uint32_t *out);

enum CsStatus cs_report_verdict(const struct CsReport *report, size_t index, struct CsVerdict *out);

// Highest grade over all frames.
enum CsStatus cs_report_max_grade(const struct CsReport *report, enum CsGrade *out);

// Canonical JSON report; free with `cs_string_free`.
enum CsStatus cs_report_to_json(const struct CsReport *report, char **out);

// CSV report; free with `cs_string_free`.
enum CsStatus cs_report_to_csv(const struct CsReport *report, char **out);

// Writes the outputs selected by `outputs` (`CS_OUTPUT_*` bits) into `out_dir`.
enum CsStatus cs_report_write(const struct CsReport *report, const char *out_dir, uint32_t outputs);

void cs_report_free(struct CsReport *report);

void cs_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHROMASIFT_H */
