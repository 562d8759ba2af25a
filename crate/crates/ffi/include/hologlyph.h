#ifndef HOLOGLYPH_H
#define HOLOGLYPH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HgStatus {
  HG_STATUS_OK = 0,
  HG_STATUS_NULL_POINTER = 1,
  HG_STATUS_INVALID_ARGUMENT = 2,
  HG_STATUS_SHAPE = 3,
  HG_STATUS_IO = 4,
  HG_STATUS_FORMAT = 5,
  HG_STATUS_WEIGHTS = 6,
  HG_STATUS_PANIC = 7,
} HgStatus;

typedef enum HgPlane {
  HG_PLANE_HOST = 0,
  HG_PLANE_EMBED = 1,
} HgPlane;

/**
 * Complex hologram plus the parameters it was recorded with.
 */
typedef struct HgHologram HgHologram;

/**
 * Grayscale image, row-major `f64` samples.
 */
typedef struct HgImage HgImage;

/**
 * Restoration network with validated weights.
 */
typedef struct HgNetwork HgNetwork;

/**
 * Embedding parameters. Distances, wavelength and pitch are in metres.
 */
typedef struct HgEmbedConfig {
  double z_host;
  double z_embed;
  double alpha;
  double wavelength;
  double pitch;
  uint64_t phase_seed;
  bool band_limit;
  bool host_random_phase;
} HgEmbedConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hg_version(void);

/**
 * Message for the most recent failed call on this thread, or NULL after a
 * successful call. Valid until the next call into this library on the same
 * thread.
 */
const char *hg_last_error_message(void);

struct HgEmbedConfig hg_embed_config_default(void);

/**
 * Copies `width * height` samples from `data` into a new image.
 *
 * # Safety
 * `data` must point to `width * height` readable `f64`s; `out` must be a
 * valid pointer to write the handle to.
 */
enum HgStatus hg_image_new(size_t width, size_t height, const double *data, struct HgImage **out);

/**
 * Loads any supported raster as grayscale in `[0, 1]`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a valid handle slot.
 */
enum HgStatus hg_image_load(const char *path, struct HgImage **out);

/**
 * Saves as 8-bit grayscale; the format follows the extension (P5 for
 * `.pgm` or none).
 *
 * # Safety
 * `image` must be a live handle and `path` a NUL-terminated string.
 */
enum HgStatus hg_image_save(const struct HgImage *image, const char *path);

/**
 * # Safety
 * `image` must be a live handle or NULL (returns 0).
 */
size_t hg_image_width(const struct HgImage *image);

/**
 * # Safety
 * `image` must be a live handle or NULL (returns 0).
 */
size_t hg_image_height(const struct HgImage *image);

/**
 * Borrowed pointer to the row-major samples; valid until the image is freed.
 *
 * # Safety
 * `image` must be a live handle or NULL (returns NULL).
 */
const double *hg_image_data(const struct HgImage *image);

/**
 * # Safety
 * `image` must have come from this library and not be freed twice.
 */
void hg_image_free(struct HgImage *image);

/**
 * Embeds `payload` into `host` (same size, power-of-two square, values in
 * `[0, 1]`). A NULL `config` uses the defaults.
 *
 * # Safety
 * `host` and `payload` must be live handles; `config` NULL or valid; `out`
 * a valid handle slot.
 */
enum HgStatus hg_embed(const struct HgImage *host,
                       const struct HgImage *payload,
                       const struct HgEmbedConfig *config,
                       struct HgHologram **out);

/**
 * # Safety
 * `hologram` must be a live handle; `out` a valid config slot.
 */
enum HgStatus hg_hologram_config(const struct HgHologram *hologram, struct HgEmbedConfig *out);

/**
 * Amplitude at `plane`, rescaled so the brightest pixel is 1.
 *
 * # Safety
 * `hologram` must be a live handle; `out` a valid handle slot.
 */
enum HgStatus hg_reconstruct(const struct HgHologram *hologram,
                             enum HgPlane plane,
                             struct HgImage **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` a valid handle slot.
 */
enum HgStatus hg_hologram_load(const char *path, struct HgHologram **out);

/**
 * # Safety
 * `hologram` must be a live handle and `path` a NUL-terminated string.
 */
enum HgStatus hg_hologram_save(const struct HgHologram *hologram, const char *path);

/**
 * # Safety
 * `hologram` must have come from this library and not be freed twice.
 */
void hg_hologram_free(struct HgHologram *hologram);

/**
 * Loads a JSON network description and HWF1 weights, validating one
 * against the other.
 *
 * # Safety
 * Both paths must be NUL-terminated strings; `out` a valid handle slot.
 */
enum HgStatus hg_network_load(const char *spec_path,
                              const char *weights_path,
                              struct HgNetwork **out);

/**
 * # Safety
 * `network` must be a live handle or NULL (returns 0).
 */
size_t hg_network_block_size(const struct HgNetwork *network);

/**
 * # Safety
 * `network` must have come from this library and not be freed twice.
 */
void hg_network_free(struct HgNetwork *network);

/**
 * Restores a square frame block by block; the side must be a multiple of
 * the network's block size.
 *
 * # Safety
 * `network` and `frame` must be live handles; `out` a valid handle slot.
 */
enum HgStatus hg_restore_frame(const struct HgNetwork *network,
                               const struct HgImage *frame,
                               struct HgImage **out);

/**
 * PSNR in dB with peak 1, capped at 99 dB for identical images.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` a valid `double` slot.
 */
enum HgStatus hg_psnr(const struct HgImage *a, const struct HgImage *b, double *out);

/**
 * Mean SSIM (11x11 Gaussian window, sigma 1.5); images must be at least
 * 11x11.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` a valid `double` slot.
 */
enum HgStatus hg_ssim(const struct HgImage *a, const struct HgImage *b, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOLOGLYPH_H */
