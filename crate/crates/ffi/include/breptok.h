/* Generated by cbindgen from crates/ffi/src/lib.rs. */

#ifndef BREPTOK_H
#define BREPTOK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BtStatus {
  BT_STATUS_OK = 0,
  BT_STATUS_NULL_POINTER = 1,
  BT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Malformed token stream, binary file or JSON document.
   */
  BT_STATUS_FORMAT = 3,
  BT_STATUS_GEOMETRY = 4,
  BT_STATUS_TOPOLOGY = 5,
  BT_STATUS_TOO_LARGE = 6,
  BT_STATUS_PANIC = 7,
  BT_STATUS_OTHER = 8,
} BtStatus;

/**
 * A solid: sampled faces and edges plus incidence.
 */
typedef struct BtBrep BtBrep;

typedef struct BtTokenStream BtTokenStream;

typedef struct BtValidity {
  bool closed;
  size_t incidence_violations;
  size_t gap_violations;
  size_t dangling_edges;
} BtValidity;

typedef struct BtRoundtrip {
  bool passed;
  bool topology_ok;
  size_t tokens;
  size_t levels;
  double max_placement_error;
} BtRoundtrip;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next call into this library from the same thread.
 */
const char *bt_last_error_message(void);

const char *bt_version(void);

uint32_t bt_vocab_size(void);

/**
 * Parses a solid from the JSON interchange document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum BtStatus bt_brep_from_json(const char *json, struct BtBrep **out);

/**
 * Serializes a solid to JSON. Release the string with [`bt_string_free`].
 *
 * # Safety
 * `brep` must come from this library; `out` must be writable.
 */
enum BtStatus bt_brep_to_json(const struct BtBrep *brep, char **out);

/**
 * # Safety
 * `brep` must come from this library and not be freed twice. NULL is ignored.
 */
void bt_brep_free(struct BtBrep *brep);

/**
 * # Safety
 * `s` must come from this library. NULL is ignored.
 */
void bt_string_free(char *s);

/**
 * Face count, or 0 for NULL.
 *
 * # Safety
 * `brep` must be NULL or come from this library.
 */
size_t bt_brep_face_count(const struct BtBrep *brep);

/**
 * # Safety
 * `brep` must be NULL or come from this library.
 */
size_t bt_brep_edge_count(const struct BtBrep *brep);

/**
 * Tokenizes a solid. `meta` is -1 for no complexity prefix, otherwise
 * 0 easy, 1 medium, 2 hard, 3 random. `stride` is 1 or 2.
 *
 * # Safety
 * `brep` must come from this library; `out` must be writable.
 */
enum BtStatus bt_tokenize(const struct BtBrep *brep,
                          int32_t meta,
                          uint32_t stride,
                          struct BtTokenStream **out);

/**
 * Detokenizes a stream into a solid in the `[-1, 1]^3` frame. `mode` is
 * 0 for unconditional streams, 1 for autocomplete. `dangling` may be NULL;
 * otherwise it receives the number of edges still missing a face.
 *
 * # Safety
 * `stream` must come from this library; `out` must be writable.
 */
enum BtStatus bt_detokenize(const struct BtTokenStream *stream,
                            uint32_t mode,
                            uint32_t stride,
                            struct BtBrep **out,
                            size_t *dangling);

/**
 * Copies raw token ids into a new stream. Ids are checked when decoding.
 *
 * # Safety
 * `tokens` must point at `len` readable values (may be NULL when `len` is 0).
 */
enum BtStatus bt_stream_from_tokens(const uint16_t *tokens, size_t len, struct BtTokenStream **out);

/**
 * Reads a stream from binary or text file contents.
 *
 * # Safety
 * `bytes` must point at `len` readable bytes.
 */
enum BtStatus bt_stream_from_bytes(const uint8_t *bytes, size_t len, struct BtTokenStream **out);

/**
 * Binary file contents for a stream. Release with [`bt_bytes_free`].
 *
 * # Safety
 * `stream` must come from this library; `out` and `out_len` must be writable.
 */
enum BtStatus bt_stream_to_bytes(const struct BtTokenStream *stream,
                                 uint8_t **out,
                                 size_t *out_len);

/**
 * # Safety
 * `bytes` and `len` must be exactly what [`bt_stream_to_bytes`] returned.
 */
void bt_bytes_free(uint8_t *bytes, size_t len);

/**
 * # Safety
 * `stream` must be NULL or come from this library.
 */
size_t bt_stream_len(const struct BtTokenStream *stream);

/**
 * Borrowed token ids, valid while the stream lives.
 *
 * # Safety
 * `stream` must be NULL or come from this library.
 */
const uint16_t *bt_stream_tokens(const struct BtTokenStream *stream);

/**
 * # Safety
 * `stream` must come from this library and not be freed twice. NULL is ignored.
 */
void bt_stream_free(struct BtTokenStream *stream);

/**
 * Checks incidence and edge-to-face gaps; `gap_tol` is in the
 * normalized frame.
 *
 * # Safety
 * `brep` must come from this library; `out` must be writable.
 */
enum BtStatus bt_validate(const struct BtBrep *brep, double gap_tol, struct BtValidity *out);

/**
 * Tokenizes, parses back and compares topology and placement.
 *
 * # Safety
 * `brep` must come from this library; `out` must be writable.
 */
enum BtStatus bt_roundtrip(const struct BtBrep *brep, uint32_t stride, struct BtRoundtrip *out);

/**
 * Quantizes a 4-vector with levels `[8, 5, 5, 5]`; values are clamped
 * to `[-1, 1]` first.
 *
 * # Safety
 * `v` must point at 4 readable values; `index` must be writable.
 */
enum BtStatus bt_fsq_quantize(const double *v, uint32_t *index);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BREPTOK_H */
