/* C interface to the auricle ear-recognition toolbox. */

#ifndef AURICLE_H
#define AURICLE_H

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of a call. Anything but `Ok` leaves a human-readable message
// in `auricle_last_error`.
typedef enum AuricleStatus {
  // The call succeeded.
  AURICLE_STATUS_OK = 0,
  // A required pointer argument was null.
  AURICLE_STATUS_NULL_ARGUMENT = 1,
  // An argument violated a documented precondition.
  AURICLE_STATUS_INVALID_ARGUMENT = 2,
  // Reading or decoding a file failed.
  AURICLE_STATUS_IO_ERROR = 3,
  // The library failed internally.
  AURICLE_STATUS_RUNTIME_ERROR = 4,
} AuricleStatus;

// A reusable extraction context: preprocessing chain, filter banks,
// and convolution plans for one target geometry.
typedef struct AuricleExtractor AuricleExtractor;

// A fixed-length feature vector produced by `auricle_extract`.
typedef struct AuricleFeatures AuricleFeatures;

// A grayscale image held by the library.
typedef struct AuricleImage AuricleImage;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on the calling thread, as
// a NUL-terminated UTF-8 string. Empty when no call has failed yet. The
// pointer stays valid until the next failing call on the same thread.
const char *auricle_last_error(void);

// Library version as a static NUL-terminated string.
const char *auricle_version(void);

// Loads an image file (PNG, JPEG, or BMP) and converts it to grayscale.
// On success stores a new handle in `*out`; free it with
// `auricle_image_free`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum AuricleStatus auricle_image_load(const char *path, struct AuricleImage **out);

// Wraps a row-major 8-bit grayscale buffer of `width * height` pixels.
// The buffer is copied. Free the handle with `auricle_image_free`.
//
// # Safety
// `pixels` must point at `width * height` readable bytes and `out`
// must be a valid pointer.
enum AuricleStatus auricle_image_from_gray(const uint8_t *pixels,
                                           uint32_t width,
                                           uint32_t height,
                                           struct AuricleImage **out);

// Width in pixels, or 0 for a null handle.
//
// # Safety
// `img` must be null or a live handle from this library.
uint32_t auricle_image_width(const struct AuricleImage *img);

// Height in pixels, or 0 for a null handle.
//
// # Safety
// `img` must be null or a live handle from this library.
uint32_t auricle_image_height(const struct AuricleImage *img);

// Releases an image handle. Null is ignored.
//
// # Safety
// `img` must be null or a handle not freed before.
void auricle_image_free(struct AuricleImage *img);

// Builds an extraction context: images are resized to
// `target_width x target_height`, histogram equalized, and passed to
// the descriptors. `bsif_seed` pins the learned sign-code filters.
// Free the handle with `auricle_extractor_free`.
//
// # Safety
// `out` must be a valid pointer.
enum AuricleStatus auricle_extractor_new(uint32_t target_width,
                                         uint32_t target_height,
                                         uint64_t bsif_seed,
                                         struct AuricleExtractor **out);

// Releases an extractor handle. Null is ignored.
//
// # Safety
// `extractor` must be null or a handle not freed before.
void auricle_extractor_free(struct AuricleExtractor *extractor);

// Preprocesses `img` and computes one descriptor. `descriptor` is one
// of: "lbp", "lpq", "rilpq", "bsif", "poem", "hog", "dsift", "gabor"
// (case-insensitive). On success stores a new handle in `*out`; free
// it with `auricle_features_free`.
//
// # Safety
// All pointers must be valid; `descriptor` must be NUL-terminated.
enum AuricleStatus auricle_extract(const struct AuricleExtractor *extractor,
                                   const struct AuricleImage *img,
                                   const char *descriptor,
                                   struct AuricleFeatures **out);

// Number of values in the vector, or 0 for a null handle.
//
// # Safety
// `features` must be null or a live handle from this library.
size_t auricle_features_len(const struct AuricleFeatures *features);

// Borrowed pointer to the values, valid while the handle lives. Null
// for a null handle.
//
// # Safety
// `features` must be null or a live handle from this library.
const double *auricle_features_data(const struct AuricleFeatures *features);

// Copies the vector into `dst`, which must hold exactly
// `auricle_features_len` values.
//
// # Safety
// `dst` must point at `len` writable doubles.
enum AuricleStatus auricle_features_copy(const struct AuricleFeatures *features,
                                         double *dst,
                                         size_t len);

// Releases a feature handle. Null is ignored.
//
// # Safety
// `features` must be null or a handle not freed before.
void auricle_features_free(struct AuricleFeatures *features);

// Chi-square distance between two non-negative histograms of `len`
// values, written to `*out`.
//
// # Safety
// `a` and `b` must point at `len` readable doubles; `out` must be a
// valid pointer.
enum AuricleStatus auricle_chi_square(const double *a, const double *b, size_t len, double *out);

// Cosine distance between two vectors of `len` values, written to
// `*out`.
//
// # Safety
// `a` and `b` must point at `len` readable doubles; `out` must be a
// valid pointer.
enum AuricleStatus auricle_cosine_distance(const double *a,
                                           const double *b,
                                           size_t len,
                                           double *out);

// Equal error rate of a verification experiment: the operating point
// where the false-acceptance and false-rejection rates meet, swept
// over the pooled distance scores and linearly interpolated between
// thresholds. Both pools must be non-empty and free of NaN.
//
// # Safety
// `genuine` and `impostor` must point at `n_genuine` and `n_impostor`
// readable doubles; `out` must be a valid pointer.
enum AuricleStatus auricle_eer(const double *genuine,
                               size_t n_genuine,
                               const double *impostor,
                               size_t n_impostor,
                               double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AURICLE_H */
