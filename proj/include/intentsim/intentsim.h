#ifndef INTENTSIM_H
#define INTENTSIM_H

/* C interface to the intentsim simulation library.
 *
 * Every object is an opaque handle created and destroyed by this API; every
 * fallible call returns a status code and leaves a human-readable message in
 * a thread-local slot readable via intentsim_last_error(). Strings returned
 * through char** out-parameters are owned by the caller and released with
 * intentsim_string_free(). Handles are not thread-safe; distinct handles may
 * be used from distinct threads freely.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(INTENTSIM_BUILD)
#define INTENTSIM_API __declspec(dllexport)
#else
#define INTENTSIM_API __declspec(dllimport)
#endif
#else
#if defined(INTENTSIM_BUILD)
#define INTENTSIM_API __attribute__((visibility("default")))
#else
#define INTENTSIM_API
#endif
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum intentsim_status {
  INTENTSIM_OK = 0,
  INTENTSIM_ERR_INVALID_ARGUMENT = 1, /* bad handle, range, or identifier */
  INTENTSIM_ERR_VALIDATION = 2,       /* structurally invalid scenario input */
  INTENTSIM_ERR_PARSE = 3,            /* malformed file or payload */
  INTENTSIM_ERR_IO = 4,               /* file system failure */
  INTENTSIM_ERR_RUNTIME = 5,          /* internal failure */
  INTENTSIM_ERR_OUT_OF_MEMORY = 6
} intentsim_status;

typedef struct intentsim_scenario intentsim_scenario;
typedef struct intentsim_run intentsim_run;

/* Library version as "major.minor.patch". Static storage, never freed. */
INTENTSIM_API const char* intentsim_version(void);

/* Message of the last failure on this thread, or "" if none. The buffer is
 * overwritten by the next failing call on the same thread. */
INTENTSIM_API const char* intentsim_last_error(void);

/* Releases a string returned through a char** out-parameter. NULL is ok. */
INTENTSIM_API void intentsim_string_free(char* s);

/* ---------------------------------------------------------------- scenario */

/* Parses scenario JSON text into a handle. */
INTENTSIM_API intentsim_status intentsim_scenario_parse(const char* json_text,
                                                        intentsim_scenario** out);

/* Loads a scenario by file path or by installed name (searched under
 * $INTENTSIM_CONFIG_DIR, then the built-in scenario directory). */
INTENTSIM_API intentsim_status intentsim_scenario_load(const char* name_or_path,
                                                       intentsim_scenario** out);

/* Scenario fields. The name pointer stays valid until the handle is freed. */
INTENTSIM_API const char* intentsim_scenario_name(const intentsim_scenario* s);
INTENTSIM_API size_t intentsim_scenario_agent_count(const intentsim_scenario* s);
INTENTSIM_API size_t intentsim_scenario_sensor_count(const intentsim_scenario* s);
INTENTSIM_API double intentsim_scenario_duration(const intentsim_scenario* s);

INTENTSIM_API void intentsim_scenario_free(intentsim_scenario* s);

/* --------------------------------------------------------------------- run */

typedef struct intentsim_run_options {
  /* 0: goal inference reads the true world; 1: it reads one sensor node's
   * fused confirmed tracks. */
  int full_pipeline;

  int has_seed; /* 0 keeps the scenario seed */
  uint64_t seed;

  int has_drop_prob; /* 0 keeps the scenario link model */
  double drop_prob;  /* [0, 1] */

  /* Index (not id) of the sensor node whose output feeds inference. */
  int observer_sensor;

  /* Extra node-death events merged with the scenario's own kill list.
   * kill_nodes[i] dies at kill_times[i]; both arrays hold kill_count
   * entries and may be NULL when kill_count is 0. */
  const uint32_t* kill_nodes;
  const double* kill_times;
  size_t kill_count;
} intentsim_run_options;

/* Fills options with the defaults described above. */
INTENTSIM_API void intentsim_run_options_init(intentsim_run_options* options);

/* Simulates the scenario from t = 0 to its duration. Identical scenario and
 * options produce a bit-identical run. options may be NULL for defaults. */
INTENTSIM_API intentsim_status intentsim_run_scenario(const intentsim_scenario* s,
                                                      const intentsim_run_options* options,
                                                      intentsim_run** out);

INTENTSIM_API size_t intentsim_run_step_count(const intentsim_run* r);

/* Sensor nodes present in the run, addressed by index for enumeration. */
INTENTSIM_API size_t intentsim_run_sensor_count(const intentsim_run* r);
INTENTSIM_API intentsim_status intentsim_run_sensor_id(const intentsim_run* r, size_t index,
                                                       uint32_t* out_id);

INTENTSIM_API void intentsim_run_free(intentsim_run* r);

/* ------------------------------------------------------------------ output */

/* Writes the run's step records to path, one JSON object per line or the
 * same records in MessagePack framing. Equal runs write equal bytes. */
INTENTSIM_API intentsim_status intentsim_run_write_trace_jsonl(const intentsim_run* r,
                                                               const char* path);
INTENTSIM_API intentsim_status intentsim_run_write_trace_msgpack(const intentsim_run* r,
                                                                 const char* path);

/* Per-goal belief trajectories as CSV: time, agent, goal, probability. */
INTENTSIM_API intentsim_status intentsim_run_write_belief_csv(const intentsim_run* r,
                                                              const char* path);

/* Belief concentration of one agent as CSV: per step, the most probable
 * goal, its position, and the mass of the five most probable goals. */
INTENTSIM_API intentsim_status intentsim_run_write_concentration_csv(const intentsim_run* r,
                                                                     uint32_t agent,
                                                                     const char* path);

/* ----------------------------------------------------------------- metrics */

/* CLEAR MOT summary of one sensor node's reported tracks against the run's
 * ground truth, as a JSON object (mota, motp, counts). cutoff is the match
 * gate in meters; pass 0 for the default of 1.0. */
INTENTSIM_API intentsim_status intentsim_run_evaluate(const intentsim_run* r, uint32_t sensor,
                                                      double cutoff, char** out_json);

/* Reads a trace file written by this library and evaluates every sensor it
 * contains, as a JSON object keyed by sensor id. msgpack selects the binary
 * framing; cutoff as above. */
INTENTSIM_API intentsim_status intentsim_trace_evaluate(const char* trace_path, int msgpack,
                                                        double cutoff, char** out_json);

/* ------------------------------------------------------------------- bench */

/* Times full goal-inference iterations on a synthetic scene, as a JSON
 * object (medianMs, worstMs, iterations). */
INTENTSIM_API intentsim_status intentsim_bench(int agents, int goals, int iterations,
                                               char** out_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* INTENTSIM_H */
