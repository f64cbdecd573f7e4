#ifndef EQREL_RAMSEY_H
#define EQREL_RAMSEY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a call.
 */
typedef enum {
  ER_STATUS_OK = 0,
  ER_STATUS_NULL_POINTER = 1,
  ER_STATUS_UTF8 = 2,
  ER_STATUS_PARSE = 3,
  ER_STATUS_INVALID_INPUT = 4,
  ER_STATUS_VALIDATION = 5,
  ER_STATUS_NOT_END_EXTENSION = 6,
  ER_STATUS_LETTER_OUTSIDE_ALPHABET = 7,
  ER_STATUS_LIMIT_EXCEEDED = 8,
  ER_STATUS_OVERFLOW = 9,
  ER_STATUS_INTERNAL = 10,
  ER_STATUS_PANIC = 11,
  ER_STATUS_BUFFER_TOO_SMALL = 12,
} ErStatus;

/**
 * A word coding context at a fixed level.
 */
typedef struct ErCoding ErCoding;

/**
 * A finite equivalence relation on an initial segment of ω.
 */
typedef struct ErFinite ErFinite;

/**
 * An equivalence relation on ω, evaluated lazily.
 */
typedef struct ErRelation ErRelation;

/**
 * A partition of ω together with a class constraint.
 */
typedef struct ErSpace ErSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library on this thread.
 */
const char *er_last_error_message(void);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void er_string_free(char *s);

/**
 * Writes `σ(k)`, the block index under the dyadic partition.
 *
 * # Safety
 * `out_value` must be a valid pointer.
 */
ErStatus er_sigma(size_t k, size_t *out_value);

/**
 * Builds a space from a partition spec (`mod:<l>` or `dyadic`), a
 * constraint (`all`, `geq` or `f-geq:<id>`) and the ordinal `beta` used by
 * `f-geq` constraints. `beta` may be null, meaning `w`.
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out_space` must be valid.
 */
ErStatus er_space_new(const char *partition,
                      const char *constraint,
                      const char *beta,
                      ErSpace **out_space);

/**
 * # Safety
 * `space` must be null or a handle from [`er_space_new`] not yet freed.
 */
void er_space_free(ErSpace *space);

/**
 * Parses a finite relation from its text form, such as `"0 1 0 3"`.
 *
 * # Safety
 * `s` must be NUL-terminated; `out_rel` must be valid.
 */
ErStatus er_finite_parse(const char *s, ErFinite **out_rel);

/**
 * Builds a finite relation from a canonical representative array.
 *
 * # Safety
 * `assign` must point to `len` readable values (or be null when `len == 0`).
 */
ErStatus er_finite_from_assign(const size_t *assign, size_t len, ErFinite **out_rel);

/**
 * # Safety
 * `rel` must be null or a live finite handle.
 */
void er_finite_free(ErFinite *rel);

/**
 * Writes the size of the domain and the number of classes.
 *
 * # Safety
 * `rel` must be a live handle; out pointers must be valid or null.
 */
ErStatus er_finite_shape(const ErFinite *rel, size_t *out_domain, size_t *out_classes);

/**
 * Copies the representative array into `buf`. `out_len` always receives the
 * required length; when it exceeds `cap` the call fails with
 * `BufferTooSmall` and nothing is copied.
 *
 * # Safety
 * `buf` must have room for `cap` values; `out_len` must be valid.
 */
ErStatus er_finite_assign(const ErFinite *rel, size_t *buf, size_t cap, size_t *out_len);

/**
 * Text form of a finite relation.
 *
 * # Safety
 * `rel` must be a live handle; `out_str` must be valid.
 */
ErStatus er_finite_to_string(const ErFinite *rel, char **out_str);

/**
 * Writes whether `a` is an initial approximation of `b`.
 *
 * # Safety
 * Both handles must be live; `out_result` must be valid.
 */
ErStatus er_finite_leq(const ErFinite *a, const ErFinite *b, bool *out_result);

/**
 * Builds a relation on ω in `space` from a spec: `canonical`,
 * `random:<seed>[:<keep>]`, or a finite prefix such as `"0 1 0"` that is
 * continued by the canonical member.
 *
 * # Safety
 * `space` must be live; `spec` NUL-terminated; `out_rel` valid.
 */
ErStatus er_relation_new(const ErSpace *space, const char *spec, ErRelation **out_rel);

/**
 * The identity relation on ω.
 *
 * # Safety
 * `out_rel` must be valid.
 */
ErStatus er_relation_identity(ErRelation **out_rel);

/**
 * # Safety
 * `rel` must be null or a live relation handle.
 */
void er_relation_free(ErRelation *rel);

/**
 * Copies the first `count` class representatives into `buf`. Fewer are
 * written when the relation has fewer classes; `out_len` gets the number
 * written.
 *
 * # Safety
 * `buf` must have room for `count` values; `out_len` must be valid.
 */
ErStatus er_relation_reps(const ErRelation *rel, size_t count, size_t *buf, size_t *out_len);

/**
 * The `n`-th approximation: the restriction to `p_n`, as a new finite
 * handle. Fails with `InvalidInput` when the relation has at most `n` classes.
 *
 * # Safety
 * `rel` must be live; `out_approx` valid.
 */
ErStatus er_relation_approx(const ErRelation *rel, size_t n, ErFinite **out_approx);

/**
 * Writes the depth of `a` in `b`, or -1 when `a` is not an approximation of `b`.
 *
 * # Safety
 * Handles must be live; `out_depth` valid.
 */
ErStatus er_depth(const ErFinite *a, const ErRelation *b, int64_t *out_depth);

/**
 * Checks the first `depth` representatives against the alternation pattern
 * of `space`. Returns `Validation` with a message on failure.
 *
 * # Safety
 * Handles must be live.
 */
ErStatus er_validate_alternating(const ErRelation *rel, const ErSpace *space, size_t depth);

/**
 * A coding context for end-extensions of the `n`-th approximation of `rel`.
 *
 * # Safety
 * Handles must be live; `out_ctx` valid.
 */
ErStatus er_coding_new(const ErSpace *space, const ErRelation *rel, size_t n, ErCoding **out_ctx);

/**
 * # Safety
 * `ctx` must be null or a live coding handle.
 */
void er_coding_free(ErCoding *ctx);

/**
 * Encodes an end-extension as a word in text form.
 *
 * # Safety
 * Handles must be live; `out_word` valid.
 */
ErStatus er_coding_encode(const ErCoding *ctx, const ErFinite *extension, char **out_word);

/**
 * Decodes a word, given in text form, into the end-extension it codes.
 *
 * # Safety
 * `ctx` must be live; `word` NUL-terminated; `out_rel` valid.
 */
ErStatus er_coding_decode(const ErCoding *ctx, const char *word, ErFinite **out_rel);

/**
 * Divides an ordinal in Cantor normal form (for example `w^2*3+w`) by ω on
 * the left, returning the quotient in the same text form. Fails with
 * `InvalidInput` unless the ordinal is a limit at least `w^2`.
 *
 * # Safety
 * `ordinal` must be NUL-terminated; `out_str` valid.
 */
ErStatus er_divide_by_omega(const char *ordinal, char **out_str);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* EQREL_RAMSEY_H */
