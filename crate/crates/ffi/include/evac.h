#ifndef EVAC_H
#define EVAC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EvacOutcome {
  EVAC_OUTCOME_IN_PROGRESS = 0,
  EVAC_OUTCOME_WIN = 1,
  EVAC_OUTCOME_LOSE_DEAD_END = 2,
  EVAC_OUTCOME_LOSE_SHELTER_IGNORED = 3,
  EVAC_OUTCOME_LOSE_FIRE_CONTACT = 4,
} EvacOutcome;

/**
 * Values for the `radio` argument of [`evac_game_step`].
 */
typedef enum EvacRadio {
  EVAC_RADIO_UNCHANGED = 0,
  EVAC_RADIO_OFF = 1,
  EVAC_RADIO_ON = 2,
} EvacRadio;

typedef enum EvacStatus {
  EVAC_STATUS_OK = 0,
  EVAC_STATUS_NULL_ARGUMENT = 1,
  EVAC_STATUS_INVALID_UTF8 = 2,
  EVAC_STATUS_PARSE_ERROR = 3,
  EVAC_STATUS_INVALID_SCENARIO = 4,
  EVAC_STATUS_INVALID_ARGUMENT = 5,
  EVAC_STATUS_BAD_COMMAND = 6,
  EVAC_STATUS_REPLAY_MISMATCH = 7,
  EVAC_STATUS_SEARCH_BOUND_EXCEEDED = 8,
  EVAC_STATUS_PANIC = 99,
} EvacStatus;

/**
 * Values for the `turn` argument of [`evac_game_step`].
 */
typedef enum EvacTurn {
  EVAC_TURN_NONE = 0,
  EVAC_TURN_LEFT = 1,
  EVAC_TURN_STRAIGHT = 2,
  EVAC_TURN_RIGHT = 3,
} EvacTurn;

typedef struct EvacGame EvacGame;

typedef struct EvacScenario EvacScenario;

typedef struct EvacSession EvacSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Owned by the
 * library; valid until the next call on the same thread.
 */
const char *evac_last_error(void);

void evac_string_free(char *s);

/**
 * Parses scenario JSON. Structural checks only; see [`evac_scenario_validate`].
 */
enum EvacStatus evac_scenario_parse(const char *json, struct EvacScenario **out);

void evac_scenario_free(struct EvacScenario *scenario);

/**
 * Writes the validation report as JSON: `{"errors": [...], "warnings": [...]}`.
 * `accepted` is set to 1 when there are no errors.
 */
enum EvacStatus evac_scenario_validate(const struct EvacScenario *scenario,
                                       char **report_json,
                                       int32_t *accepted);

/**
 * Canonical JSON text of the scenario.
 */
enum EvacStatus evac_scenario_serialize(const struct EvacScenario *scenario, char **out);

/**
 * Hex SHA-256 of the canonical text, as used in replay headers.
 */
enum EvacStatus evac_scenario_digest(const struct EvacScenario *scenario, char **out);

/**
 * Sets `out` to 1 if some input sequence wins, else 0.
 */
enum EvacStatus evac_scenario_solvable(const struct EvacScenario *scenario, int32_t *out);

enum EvacStatus evac_game_new(const struct EvacScenario *scenario, struct EvacGame **out);

void evac_game_free(struct EvacGame *game);

/**
 * Advances one tick. `turn` takes an [`EvacTurn`] value and `radio` an
 * [`EvacRadio`] value. Stepping a finished game leaves it unchanged.
 */
enum EvacStatus evac_game_step(struct EvacGame *game, bool brake, uint32_t turn, uint32_t radio);

enum EvacStatus evac_game_restart(struct EvacGame *game);

/**
 * The tick about to be simulated; equals the number of steps taken.
 */
enum EvacStatus evac_game_tick(const struct EvacGame *game, uint64_t *out);

enum EvacStatus evac_game_outcome(const struct EvacGame *game, enum EvacOutcome *out);

enum EvacStatus evac_game_digest(const struct EvacGame *game, char **out);

/**
 * Starts a UI session on `scenario`.
 */
enum EvacStatus evac_session_new(const struct EvacScenario *scenario, struct EvacSession **out);

void evac_session_free(struct EvacSession *session);

/**
 * Queues one UI command given as JSON, e.g.
 * `{"type":"TurnRequest","payload":{"turn":"left"},"wall_time":1.25}`.
 * `accepted` is set to 0 when the command was ignored because the game is over.
 */
enum EvacStatus evac_session_dispatch(struct EvacSession *session,
                                      const char *command_json,
                                      int32_t *accepted);

/**
 * Steps the session once and writes the new snapshot as JSON.
 */
enum EvacStatus evac_session_tick(struct EvacSession *session, char **snapshot_json);

/**
 * The session so far in replay-file format.
 */
enum EvacStatus evac_session_export_replay(const struct EvacSession *session, char **out);

/**
 * Replays `replay_text` against `scenario` and checks the recorded digest.
 */
enum EvacStatus evac_replay_verify(const struct EvacScenario *scenario,
                                   const char *replay_text,
                                   char **final_digest);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVAC_H */
