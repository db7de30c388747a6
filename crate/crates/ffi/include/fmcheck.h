/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef FMCHECK_H
#define FMCHECK_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define FM_BACKEND_AUTO 0

#define FM_BACKEND_BRUTE 1

#define FM_BACKEND_DPLL 2

typedef enum FmStatus {
  FM_STATUS_OK = 0,
  /**
   * A null pointer, invalid UTF-8 or an unknown backend value.
   */
  FM_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The model or configuration text does not parse.
   */
  FM_STATUS_PARSE_ERROR = 2,
  FM_STATUS_UNKNOWN_FEATURE = 3,
  /**
   * A configuration leaves features undecided where a full one is needed.
   */
  FM_STATUS_UNDECIDED = 4,
  /**
   * The model has too many features for exhaustive counting.
   */
  FM_STATUS_TOO_LARGE = 5,
  /**
   * The model has no valid product.
   */
  FM_STATUS_VOID_MODEL = 6,
  /**
   * Propagation found contradictory requirements.
   */
  FM_STATUS_CONFLICT = 7,
  FM_STATUS_INTERNAL = 99,
} FmStatus;

/**
 * A parsed and encoded feature model.
 */
typedef struct FmModel FmModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses and encodes `source`. On success `*out` receives a new handle.
 *
 * # Safety
 * `source` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FmStatus fm_model_parse(const char *source, struct FmModel **out);

/**
 * Releases a handle from `fm_model_parse`. Null is ignored.
 *
 * # Safety
 * `model` must come from `fm_model_parse` and not be used afterwards.
 */
void fm_model_free(struct FmModel *model);

/**
 * Message for the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next fmcheck call on the same thread.
 */
const char *fm_last_error_message(void);

/**
 * Number of features, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t fm_model_feature_count(const struct FmModel *model);

/**
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum FmStatus fm_model_is_void(const struct FmModel *model, int backend_id, bool *out);

/**
 * Dead features, one per line in preorder. Fails with `VoidModel` on a
 * void model.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum FmStatus fm_model_dead_features(const struct FmModel *model, int backend_id, char **out);

/**
 * Core features, one per line in preorder. Fails with `VoidModel` on a
 * void model.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum FmStatus fm_model_core_features(const struct FmModel *model, int backend_id, char **out);

/**
 * Number of valid products, refusing models with more than `cap` features.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum FmStatus fm_model_count_products(const struct FmModel *model, size_t cap, uint64_t *out);

/**
 * Checks a full configuration. `*valid` is set to whether every conjunct
 * holds; a configuration with undecided features fails with `Undecided`.
 *
 * # Safety
 * `model` must be a live handle, `config_text` NUL-terminated and `valid`
 * a valid pointer.
 */
enum FmStatus fm_model_check_config(const struct FmModel *model,
                                    const char *config_text,
                                    bool *valid);

/**
 * Propagates a partial configuration. `*out_json` receives either
 * `{"status":"consistent","decisions":{..},"derivations":[..]}` (status
 * `Ok`) or `{"status":"conflict","conflict":{..}}` (status `Conflict`).
 *
 * # Safety
 * `model` must be a live handle, `config_text` NUL-terminated and
 * `out_json` a valid pointer.
 */
enum FmStatus fm_model_propagate(const struct FmModel *model,
                                 const char *config_text,
                                 char **out_json);

/**
 * DIMACS text of the model's clause form.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum FmStatus fm_model_to_dimacs(const struct FmModel *model, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void fm_string_free(char *s);

/**
 * Library version, a static string.
 */
const char *fm_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FMCHECK_H */
