/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef TERC_H
#define TERC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum TercStatus {
  TERC_STATUS_OK = 0,
  TERC_STATUS_NULL_ARGUMENT = 1,
  TERC_STATUS_INVALID_ARGUMENT = 2,
  TERC_STATUS_IO = 3,
  TERC_STATUS_SCHEMA = 4,
  TERC_STATUS_INVALID_REPLAY = 5,
  TERC_STATUS_CORRUPT = 6,
  TERC_STATUS_CHECKSUM = 7,
  TERC_STATUS_OUT_OF_RANGE = 8,
  TERC_STATUS_UNKNOWN_FIELD = 9,
  TERC_STATUS_FINALIZED = 10,
  TERC_STATUS_BUFFER_TOO_SMALL = 11,
  TERC_STATUS_PANIC = 12,
} TercStatus;

typedef enum TercReadLevel {
  TERC_READ_LEVEL_METADATA_ONLY = 0,
  TERC_READ_LEVEL_SCALARS = 1,
  TERC_READ_LEVEL_PLANES = 2,
  TERC_READ_LEVEL_FULL = 3,
} TercReadLevel;

typedef struct TercReader TercReader;

// One replay, either under construction or read back.
typedef struct TercReplay TercReplay;

// Entity/scalar/plane layout of replays.
typedef struct TercSchema TercSchema;

typedef struct TercStore TercStore;

typedef struct TercWriter TercWriter;

typedef struct TercVerifyReport {
  uint64_t entries_checked;
  uint64_t entries_ok;
  uint64_t checksum_failures;
  bool index_consistent;
} TercVerifyReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *terc_version(void);

// Message of this thread's most recent failure, or NULL. Valid until the
// next failing call on the same thread.
const char *terc_last_error(void);

// Parse a schema from its canonical text form.
enum TercStatus terc_schema_from_text(const char *text, struct TercSchema **out);

// Schema of the workload spec file at `spec_path`.
enum TercStatus terc_schema_from_spec_file(const char *spec_path, struct TercSchema **out);

uint64_t terc_schema_hash(const struct TercSchema *schema);

// Bytes of one entity record.
size_t terc_schema_record_width(const struct TercSchema *schema);

// Bytes of one row of scalar channel values.
size_t terc_schema_scalar_width(const struct TercSchema *schema);

// Copy the canonical text (NUL-terminated) into `buf`. `needed` receives
// the size including the terminator; with too small a buffer nothing is
// written and BUFFER_TOO_SMALL is returned.
enum TercStatus terc_schema_text(const struct TercSchema *schema,
                                 char *buf,
                                 size_t cap,
                                 size_t *needed);

void terc_schema_free(struct TercSchema *schema);

// Empty replay with zero declared steps.
enum TercStatus terc_replay_new(const struct TercSchema *schema,
                                const char *replay_id,
                                const char *scenario_tag,
                                struct TercReplay **out);

// Generate a replay from a workload spec file; `policy` is one of
// `every_step`, `on_action`, `every_n:N`, `every_n_or_action:N`.
enum TercStatus terc_replay_generate(const char *spec_path,
                                     uint64_t seed,
                                     const char *policy,
                                     struct TercReplay **out);

// Start a new observation at `step` with the given scalar row (may be
// empty when the schema has no scalar channels). Planes start blank.
enum TercStatus terc_replay_push_observation(struct TercReplay *replay,
                                             uint32_t step,
                                             const uint8_t *scalars,
                                             size_t scalars_len);

// Append one entity record to the latest observation.
enum TercStatus terc_replay_push_entity(struct TercReplay *replay,
                                        const uint8_t *record,
                                        size_t len);

// Set plane `channel` of the latest observation, one byte per pixel
// (0/1 for boolean planes).
enum TercStatus terc_replay_set_plane(struct TercReplay *replay,
                                      size_t channel,
                                      const uint8_t *pixels,
                                      size_t len);

// Set the declared step count and action/outcome metadata; recomputes
// duration and peak entity count. `has_outcome` = 0 clears the outcome.
enum TercStatus terc_replay_finish(struct TercReplay *replay,
                                   uint64_t declared_step_count,
                                   uint64_t action_count,
                                   bool has_outcome,
                                   int32_t outcome_label);

// Rewrite instance ids broken by re-observation using positional matching
// within `match_radius`.
enum TercStatus terc_replay_stabilize(struct TercReplay *replay, double match_radius);

// NUL-terminated replay id owned by the replay.
const char *terc_replay_id(const struct TercReplay *replay);

uint64_t terc_replay_declared_steps(const struct TercReplay *replay);

uint64_t terc_replay_action_count(const struct TercReplay *replay);

size_t terc_replay_observation_count(const struct TercReplay *replay);

enum TercStatus terc_replay_observation_step(const struct TercReplay *replay,
                                             size_t k,
                                             uint32_t *step);

enum TercStatus terc_replay_entity_count(const struct TercReplay *replay, size_t k, size_t *count);

// Copy entity `e` of observation `k` into `buf` (record width bytes).
enum TercStatus terc_replay_entity(const struct TercReplay *replay,
                                   size_t k,
                                   size_t e,
                                   uint8_t *buf,
                                   size_t cap);

void terc_replay_free(struct TercReplay *replay);

enum TercStatus terc_writer_create(const char *path,
                                   const struct TercSchema *schema,
                                   struct TercWriter **out);

// Append a replay; `ordinal` (may be NULL) receives its entry number.
enum TercStatus terc_writer_append(struct TercWriter *writer,
                                   const struct TercReplay *replay,
                                   uint64_t *ordinal);

// Write the index and mark the file finalized. Idempotent.
enum TercStatus terc_writer_finalize(struct TercWriter *writer);

// Release a writer. An unfinalized container is left unreadable.
void terc_writer_free(struct TercWriter *writer);

enum TercStatus terc_reader_open(const char *path, struct TercReader **out);

uint64_t terc_reader_entry_count(const struct TercReader *reader);

// Decode `entry` up to `level` into a new replay.
enum TercStatus terc_reader_read(const struct TercReader *reader,
                                 uint64_t entry,
                                 enum TercReadLevel level,
                                 struct TercReplay **out);

// Total bytes decompressed by this reader so far.
uint64_t terc_reader_decompressed_bytes(const struct TercReader *reader);

void terc_reader_free(struct TercReader *reader);

// Recheck all checksums and the index. Returns OK when the report was
// produced; inspect the report for the verdict.
enum TercStatus terc_verify(const char *path, struct TercVerifyReport *report);

// Index `count` containers. Unreadable containers are skipped and
// counted in `failures` (may be NULL).
enum TercStatus terc_store_build(const char *const *paths,
                                 size_t count,
                                 struct TercStore **out,
                                 size_t *failures);

enum TercStatus terc_store_load(const char *path, struct TercStore **out);

enum TercStatus terc_store_save(const struct TercStore *store, const char *path);

size_t terc_store_len(const struct TercStore *store);

// Rows matching every predicate (e.g. `"duration_steps>=5000"`). Row
// positions go to `rows` (up to `cap`), the match count to `matched`;
// when `cap` is too small BUFFER_TOO_SMALL is returned with `matched` set.
enum TercStatus terc_store_query(const struct TercStore *store,
                                 const char *const *predicates,
                                 size_t predicate_count,
                                 size_t *rows,
                                 size_t cap,
                                 size_t *matched);

// Container path of row `row`, owned by the store; NULL when out of range.
const char *terc_store_row_path(const struct TercStore *store, size_t row);

enum TercStatus terc_store_row_ordinal(const struct TercStore *store,
                                       size_t row,
                                       uint64_t *ordinal);

void terc_store_free(struct TercStore *store);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TERC_H */
