#ifndef CBREASON_H
#define CBREASON_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CbrStatus {
  CBR_STATUS_OK = 0,
  CBR_STATUS_NULL_POINTER = 1,
  CBR_STATUS_INVALID_ARGUMENT = 2,
  CBR_STATUS_EMPTY_MASK = 3,
  CBR_STATUS_DEGENERATE_MASK = 4,
  CBR_STATUS_ZERO_GRADIENT = 5,
  CBR_STATUS_IO = 6,
  CBR_STATUS_PARSE = 7,
  CBR_STATUS_BUDGET_EXHAUSTED = 8,
  CBR_STATUS_OUT_OF_RANGE = 9,
  CBR_STATUS_PANIC = 10,
} CbrStatus;

/**
 * Reasoning engine settings.
 */
typedef struct CbrConfig CbrConfig;

/**
 * Result of one discovery run.
 */
typedef struct CbrDiscovery CbrDiscovery;

/**
 * Instance masks of one scene.
 */
typedef struct CbrScene CbrScene;

/**
 * Box, confidence factors and size of one detection.
 */
typedef struct CbrDetection {
  size_t u1;
  size_t v1;
  size_t u2;
  size_t v2;
  double confidence;
  double existence;
  double max_center_norm;
  double max_boundary;
  double area_factor;
  size_t iterations;
  size_t area;
} CbrDetection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *cbr_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cbr_version(void);

/**
 * Exact Euclidean distance of every pixel to the nearest background pixel.
 * `out` holds `height * width` floats.
 *
 * # Safety
 * `mask` and `out` must point to `height * width` elements.
 */
enum CbrStatus cbr_distance_transform(const uint8_t *mask, size_t height, size_t width, float *out);

/**
 * Separately normalized boundary field in `[-1, 1]`.
 *
 * # Safety
 * `mask` and `out` must point to `height * width` elements.
 */
enum CbrStatus cbr_boundary_field(const uint8_t *mask, size_t height, size_t width, float *out);

/**
 * Unit center field, interleaved `(row, col)` pairs: `out` holds
 * `2 * height * width` floats.
 *
 * # Safety
 * `mask` must point to `height * width` bytes and `out` to twice as many floats.
 */
enum CbrStatus cbr_center_field(const uint8_t *mask, size_t height, size_t width, float *out);

/**
 * Maximum interior distance recovered from a boundary field at one pixel.
 *
 * # Safety
 * `field` must point to `height * width` floats and `out` to one double.
 */
enum CbrStatus cbr_recover_max_distance(const float *field,
                                        size_t height,
                                        size_t width,
                                        size_t row,
                                        size_t col,
                                        double *out);

/**
 * Creates an empty scene. Returns null on invalid arguments.
 *
 * # Safety
 * `id` must be a NUL-terminated string.
 */
struct CbrScene *cbr_scene_new(const char *id, size_t height, size_t width);

/**
 * Loads a scene file written by `cbreason synth`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CbrStatus cbr_scene_load(const char *path, struct CbrScene **out);

/**
 * Appends an instance; the mask must match the scene size and be nonempty.
 *
 * # Safety
 * `scene` must come from this library and `mask` point to `height * width` bytes.
 */
enum CbrStatus cbr_scene_add_instance(struct CbrScene *scene, const uint8_t *mask);

/**
 * Number of instances, or 0 for a null scene.
 *
 * # Safety
 * `scene` must be null or come from this library.
 */
size_t cbr_scene_instance_count(const struct CbrScene *scene);

/**
 * # Safety
 * `scene` must be null or come from this library, and not be used afterwards.
 */
void cbr_scene_free(struct CbrScene *scene);

struct CbrConfig *cbr_config_default(void);

/**
 * Parses a TOML settings document; missing keys keep their defaults.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CbrStatus cbr_config_from_toml(const char *text, struct CbrConfig **out);

/**
 * # Safety
 * `config` must come from this library.
 */
enum CbrStatus cbr_config_set_seed(struct CbrConfig *config, uint64_t seed);

/**
 * # Safety
 * `config` must be null or come from this library, and not be used afterwards.
 */
void cbr_config_free(struct CbrConfig *config);

/**
 * Runs discovery with the oracle provider. `threads` 0 uses every core.
 * When the proposal budget runs out the partial result is still stored in
 * `out` and the call returns `BudgetExhausted`.
 *
 * # Safety
 * `scene` and `config` must come from this library (config may be null
 * for defaults) and `out` must be a valid pointer.
 */
enum CbrStatus cbr_discover(const struct CbrScene *scene,
                            const struct CbrConfig *config,
                            size_t threads,
                            struct CbrDiscovery **out);

/**
 * Number of detections, or 0 for a null handle.
 *
 * # Safety
 * `d` must be null or come from this library.
 */
size_t cbr_discovery_count(const struct CbrDiscovery *d);

/**
 * # Safety
 * `d` must come from this library and `out` be a valid pointer.
 */
enum CbrStatus cbr_discovery_get(const struct CbrDiscovery *d,
                                 size_t index,
                                 struct CbrDetection *out);

/**
 * Copies a detection's scene-sized mask (0/1 bytes) into `out`, which
 * holds `len` bytes; `len` must equal the scene's `height * width`.
 *
 * # Safety
 * `d` must come from this library and `out` point to `len` bytes.
 */
enum CbrStatus cbr_discovery_mask(const struct CbrDiscovery *d,
                                  size_t index,
                                  uint8_t *out,
                                  size_t len);

/**
 * Writes the detections in the JSON detection format.
 *
 * # Safety
 * `d` must come from this library and `path` be a NUL-terminated string.
 */
enum CbrStatus cbr_discovery_write_json(const struct CbrDiscovery *d, const char *path);

/**
 * # Safety
 * `d` must be null or come from this library, and not be used afterwards.
 */
void cbr_discovery_free(struct CbrDiscovery *d);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CBREASON_H */
