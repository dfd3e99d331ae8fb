#ifndef LGRE_H
#define LGRE_H

/* Generated by cbindgen. Regenerate from crates/lgre-ffi with:
   cbindgen --config cbindgen.toml --crate lgre-ffi --output include/lgre.h */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every entry point.
 */
typedef enum LgreStatus {
  /**
   * The call succeeded and outputs were written.
   */
  LGRE_STATUS_OK = 0,
  /**
   * A describe call succeeded but no referring expression exists.
   */
  LGRE_STATUS_NO_EXPRESSION = 1,
  /**
   * A pointer was null or a string was not valid UTF-8.
   */
  LGRE_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Model or formula text failed to parse.
   */
  LGRE_STATUS_PARSE_ERROR = 3,
  /**
   * The element, logic, or algorithm is not usable here.
   */
  LGRE_STATUS_UNSUPPORTED = 4,
  /**
   * An internal invariant failed; see the last error message.
   */
  LGRE_STATUS_INTERNAL_ERROR = 5,
} LgreStatus;

/**
 * Target logic for describe and simulator-set queries.
 */
typedef enum LgreLogic {
  LGRE_LOGIC_FOL = 0,
  LGRE_LOGIC_EPFOL = 1,
  LGRE_LOGIC_ALC = 2,
  LGRE_LOGIC_EL = 3,
  LGRE_LOGIC_ELAN = 4,
} LgreLogic;

/**
 * Algorithm used by [`lgre_describe`].
 */
typedef enum LgreAlgo {
  /**
   * Simulator-set refinement (el, elan).
   */
  LGRE_ALGO_SIM = 0,
  /**
   * Branch-and-bound graph search (epfol, el).
   */
  LGRE_ALGO_GRAPH = 1,
  /**
   * Minimize by mutual similarity, then search the quotient.
   */
  LGRE_ALGO_COMBINED = 2,
} LgreAlgo;

/**
 * Opaque handle to a loaded relational model.
 */
typedef struct LgreModel LgreModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The error message for the most recent failing call on this thread.
 *
 * The pointer stays valid until the next failing call on the same
 * thread; do not free it.
 */
const char *lgre_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must have been returned by an lgre function and not freed before.
 */
void lgre_string_free(char *s);

/**
 * Parses a model from its text format.
 *
 * On `Ok`, `*out` owns the model; release it with [`lgre_model_free`].
 *
 * # Safety
 * `text` must be a valid C string and `out` a valid pointer.
 */
enum LgreStatus lgre_model_from_text(const char *text, struct LgreModel **out);

/**
 * Parses a model from its JSON format.
 *
 * # Safety
 * As [`lgre_model_from_text`].
 */
enum LgreStatus lgre_model_from_json(const char *json, struct LgreModel **out);

/**
 * Releases a model handle. Null is ignored.
 *
 * # Safety
 * `model` must come from a model constructor and not be freed twice.
 */
void lgre_model_free(struct LgreModel *model);

/**
 * Number of elements in the model's domain.
 *
 * # Safety
 * `model` must be a live handle.
 */
uintptr_t lgre_model_domain_len(const struct LgreModel *model);

/**
 * Computes a referring expression for `target`.
 *
 * On `Ok`, `*out_formula` holds the formula in the logic's text syntax.
 * Returns `NoExpression` (without touching `out_formula`) when the
 * target cannot be distinguished in the chosen logic.
 *
 * # Safety
 * `model` must be live; `target` a valid C string; `out_formula` valid.
 */
enum LgreStatus lgre_describe(const struct LgreModel *model,
                              const char *target,
                              enum LgreLogic logic,
                              enum LgreAlgo algo,
                              char **out_formula);

/**
 * Evaluates a formula and writes its extension as a space-separated
 * list of element names (empty string for the empty extension).
 *
 * Accepts both formula layers; concept syntax is tried first.
 *
 * # Safety
 * `model` must be live; `formula` a valid C string; `out` valid.
 */
enum LgreStatus lgre_eval(const struct LgreModel *model, const char *formula, char **out);

/**
 * Writes the simulator set of `element` as a space-separated list.
 *
 * # Safety
 * `model` must be live; `element` a valid C string; `out` valid.
 */
enum LgreStatus lgre_simulator_set(const struct LgreModel *model,
                                   const char *element,
                                   enum LgreLogic logic,
                                   char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LGRE_H */
