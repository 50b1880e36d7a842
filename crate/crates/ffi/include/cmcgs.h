#ifndef CMCGS_H
#define CMCGS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CmcgsStatus {
  CMCGS_STATUS_OK = 0,
  CMCGS_STATUS_NULL_POINTER = 1,
  CMCGS_STATUS_INVALID_ARGUMENT = 2,
  CMCGS_STATUS_UNKNOWN_NAME = 3,
  CMCGS_STATUS_BUFFER_TOO_SMALL = 4,
  CMCGS_STATUS_EPISODE_TERMINATED = 5,
  CMCGS_STATUS_PLANNING_FAILED = 6,
  CMCGS_STATUS_PANIC = 7,
} CmcgsStatus;

/**
 * Opaque environment handle.
 */
typedef struct CmcgsEnv CmcgsEnv;

/**
 * Opaque planner handle; owns its generator and hyperparameters.
 */
typedef struct CmcgsPlanner CmcgsPlanner;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to `len`. Returns the full message length excluding the NUL.
 */
size_t cmcgs_last_error(char *buf, size_t len);

/**
 * Creates an environment from a preset name or a layout JSON file path.
 */
enum CmcgsStatus cmcgs_env_new(const char *name, struct CmcgsEnv **out);

/**
 * Creates an environment from an in-memory layout JSON document.
 */
enum CmcgsStatus cmcgs_env_from_layout_json(const char *json, struct CmcgsEnv **out);

void cmcgs_env_free(struct CmcgsEnv *env);

enum CmcgsStatus cmcgs_env_state_dim(const struct CmcgsEnv *env, size_t *out);

enum CmcgsStatus cmcgs_env_action_dim(const struct CmcgsEnv *env, size_t *out);

enum CmcgsStatus cmcgs_env_remaining_steps(const struct CmcgsEnv *env, size_t *out);

/**
 * Resets the episode and writes the initial state into `state[..state_len]`.
 */
enum CmcgsStatus cmcgs_env_reset(struct CmcgsEnv *env,
                                 uint64_t seed,
                                 double *state,
                                 size_t state_len);

/**
 * Applies one action. `state`, `reward` and `terminal` may be null.
 */
enum CmcgsStatus cmcgs_env_step(struct CmcgsEnv *env,
                                const double *action,
                                size_t action_len,
                                double *state,
                                size_t state_len,
                                double *reward,
                                bool *terminal);

/**
 * Creates a planner by name (`cmcgs`, `cem`, `mcts-pw`, `random`) with
 * default hyperparameters and a generator seeded with `seed`.
 */
enum CmcgsStatus cmcgs_planner_new(const char *kind, uint64_t seed, struct CmcgsPlanner **out);

void cmcgs_planner_free(struct CmcgsPlanner *planner);

/**
 * Overrides one hyperparameter by its config key.
 */
enum CmcgsStatus cmcgs_planner_set_param(struct CmcgsPlanner *planner,
                                         const char *key,
                                         double value);

/**
 * Plans from the environment's current state with at most `budget`
 * simulation steps on a private copy. The environment itself is not
 * advanced. Writes the action into `action[..action_len]` and, if
 * `steps_used` is non-null, the number of simulation steps spent.
 */
enum CmcgsStatus cmcgs_planner_plan(struct CmcgsPlanner *planner,
                                    const struct CmcgsEnv *env,
                                    uint64_t budget,
                                    double *action,
                                    size_t action_len,
                                    uint64_t *steps_used);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CMCGS_H */
