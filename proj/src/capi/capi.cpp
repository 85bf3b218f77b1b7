#include "intentsim/intentsim.h"

#include <cstring>
#include <exception>
#include <fstream>
#include <new>
#include <string>
#include <utility>

#include "core/error.hpp"
#include "harness/runner.hpp"
#include "harness/scenario.hpp"
#include "harness/trace.hpp"
#include "json.hpp"
#include "mot/metrics.hpp"

using intentsim::Error;
namespace harness = intentsim::harness;
namespace mot = intentsim::mot;

// The opaque handles are plain wrappers; all state lives in the C++ types.
struct intentsim_scenario {
  harness::Scenario scenario;
};

struct intentsim_run {
  harness::RunResult result;
};

namespace {

thread_local std::string g_lastError;

intentsim_status status_of(Error::Code code) {
  switch (code) {
    case Error::Code::InvalidArgument:
      return INTENTSIM_ERR_INVALID_ARGUMENT;
    case Error::Code::Validation:
      return INTENTSIM_ERR_VALIDATION;
    case Error::Code::Parse:
      return INTENTSIM_ERR_PARSE;
    case Error::Code::Io:
      return INTENTSIM_ERR_IO;
    case Error::Code::Runtime:
      return INTENTSIM_ERR_RUNTIME;
  }
  return INTENTSIM_ERR_RUNTIME;
}

intentsim_status fail(intentsim_status status, const char* message) {
  g_lastError = message;
  return status;
}

// Runs the body and funnels every failure into a status plus message; a
// successful body must leave its results in the out-parameters itself.
template <typename Fn>
intentsim_status guarded(Fn&& body) {
  try {
    std::forward<Fn>(body)();
    return INTENTSIM_OK;
  } catch (const Error& e) {
    g_lastError = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_lastError = "out of memory";
    return INTENTSIM_ERR_OUT_OF_MEMORY;
  } catch (const std::exception& e) {
    g_lastError = e.what();
    return INTENTSIM_ERR_RUNTIME;
  }
}

// Copies a string into caller-owned storage released by intentsim_string_free.
char* copy_out(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

harness::RunOptions convert(const intentsim_run_options* options) {
  harness::RunOptions opts;
  if (options == nullptr) return opts;
  opts.mode = options->full_pipeline != 0 ? harness::RunMode::FullPipeline
                                          : harness::RunMode::InferenceOnly;
  if (options->has_seed != 0) opts.seed = options->seed;
  if (options->has_drop_prob != 0) opts.dropProb = options->drop_prob;
  opts.observerSensor = options->observer_sensor;
  if (options->kill_count > 0 &&
      (options->kill_nodes == nullptr || options->kill_times == nullptr))
    throw Error(Error::Code::InvalidArgument, "kill arrays are null with kill_count > 0");
  for (size_t i = 0; i < options->kill_count; ++i)
    opts.extraKills.push_back({options->kill_nodes[i], options->kill_times[i]});
  return opts;
}

nlohmann::json report_json(const mot::MotReport& r) {
  return nlohmann::json{{"mota", r.mota},
                        {"motp", r.motp},
                        {"meanMatchDistance", r.meanMatchDistance},
                        {"normalizedError", r.normalizedError},
                        {"totalTruth", r.totalTruth},
                        {"totalMatches", r.totalMatches},
                        {"totalMisses", r.totalMisses},
                        {"totalFalsePositives", r.totalFalsePositives},
                        {"totalIdSwitches", r.totalIdSwitches}};
}

template <typename WriteFn>
void write_file(const char* path, WriteFn&& write) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Error::Code::Io, std::string("cannot open for writing: ") + path);
  write(out);
  out.flush();
  if (!out) throw Error(Error::Code::Io, std::string("write failed: ") + path);
}

}  // namespace

extern "C" {

const char* intentsim_version(void) { return "0.1.0"; }

const char* intentsim_last_error(void) { return g_lastError.c_str(); }

void intentsim_string_free(char* s) { delete[] s; }

intentsim_status intentsim_scenario_parse(const char* json_text, intentsim_scenario** out) {
  if (json_text == nullptr || out == nullptr)
    return fail(INTENTSIM_ERR_INVALID_ARGUMENT, "null argument to intentsim_scenario_parse");
  return guarded([&] { *out = new intentsim_scenario{harness::parse_scenario(json_text)}; });
}

intentsim_status intentsim_scenario_load(const char* name_or_path, intentsim_scenario** out) {
  if (name_or_path == nullptr || out == nullptr)
    return fail(INTENTSIM_ERR_INVALID_ARGUMENT, "null argument to intentsim_scenario_load");
  return guarded([&] {
    *out = new intentsim_scenario{
        harness::load_scenario(harness::resolve_scenario_path(name_or_path))};
  });
}

const char* intentsim_scenario_name(const intentsim_scenario* s) {
  return s == nullptr ? "" : s->scenario.name.c_str();
}

size_t intentsim_scenario_agent_count(const intentsim_scenario* s) {
  return s == nullptr ? 0 : s->scenario.agents.size();
}

size_t intentsim_scenario_sensor_count(const intentsim_scenario* s) {
  return s == nullptr ? 0 : s->scenario.sensors.size();
}

double intentsim_scenario_duration(const intentsim_scenario* s) {
  return s == nullptr ? 0.0 : s->scenario.duration;
}

void intentsim_scenario_free(intentsim_scenario* s) { delete s; }

void intentsim_run_options_init(intentsim_run_options* options) {
  if (options == nullptr) return;
  *options = intentsim_run_options{};
}

intentsim_status intentsim_run_scenario(const intentsim_scenario* s,
                                        const intentsim_run_options* options,
                                        intentsim_run** out) {
  if (s == nullptr || out == nullptr)
    return fail(INTENTSIM_ERR_INVALID_ARGUMENT, "null argument to intentsim_run_scenario");
  return guarded([&] {
    *out = new intentsim_run{harness::run_scenario(s->scenario, convert(options))};
  });
}

size_t intentsim_run_step_count(const intentsim_run* r) {
  return r == nullptr ? 0 : r->result.steps.size();
}

size_t intentsim_run_sensor_count(const intentsim_run* r) {
  return r == nullptr ? 0 : r->result.scenario.sensors.size();
}

intentsim_status intentsim_run_sensor_id(const intentsim_run* r, size_t index,
                                         uint32_t* out_id) {
  if (r == nullptr || out_id == nullptr)
    return fail(INTENTSIM_ERR_INVALID_ARGUMENT, "null argument to intentsim_run_sensor_id");
  if (index >= r->result.scenario.sensors.size())
    return fail(INTENTSIM_ERR_INVALID_ARGUMENT, "sensor index out of range");
  *out_id = r->result.scenario.sensors[index].id;
  return INTENTSIM_OK;
}

void intentsim_run_free(intentsim_run* r) { delete r; }

intentsim_status intentsim_run_write_trace_jsonl(const intentsim_run* r, const char* path) {
  if (r == nullptr || path == nullptr)
    return fail(INTENTSIM_ERR_INVALID_ARGUMENT,
                "null argument to intentsim_run_write_trace_jsonl");
  return guarded(
      [&] { write_file(path, [&](std::ostream& out) { write_trace_jsonl(r->result, out); }); });
}

intentsim_status intentsim_run_write_trace_msgpack(const intentsim_run* r, const char* path) {
  if (r == nullptr || path == nullptr)
    return fail(INTENTSIM_ERR_INVALID_ARGUMENT,
                "null argument to intentsim_run_write_trace_msgpack");
  return guarded([&] {
    write_file(path, [&](std::ostream& out) { write_trace_msgpack(r->result, out); });
  });
}

intentsim_status intentsim_run_write_belief_csv(const intentsim_run* r, const char* path) {
  if (r == nullptr || path == nullptr)
    return fail(INTENTSIM_ERR_INVALID_ARGUMENT,
                "null argument to intentsim_run_write_belief_csv");
  return guarded(
      [&] { write_file(path, [&](std::ostream& out) { write_belief_csv(r->result, out); }); });
}

intentsim_status intentsim_run_write_concentration_csv(const intentsim_run* r, uint32_t agent,
                                                       const char* path) {
  if (r == nullptr || path == nullptr)
    return fail(INTENTSIM_ERR_INVALID_ARGUMENT,
                "null argument to intentsim_run_write_concentration_csv");
  return guarded([&] {
    write_file(path,
               [&](std::ostream& out) { write_concentration_csv(r->result, agent, out); });
  });
}

intentsim_status intentsim_run_evaluate(const intentsim_run* r, uint32_t sensor, double cutoff,
                                        char** out_json) {
  if (r == nullptr || out_json == nullptr)
    return fail(INTENTSIM_ERR_INVALID_ARGUMENT, "null argument to intentsim_run_evaluate");
  return guarded([&] {
    const mot::MotReport report =
        harness::evaluate_node(r->result, sensor, cutoff > 0.0 ? cutoff : 1.0);
    *out_json = copy_out(report_json(report).dump());
  });
}

intentsim_status intentsim_trace_evaluate(const char* trace_path, int msgpack, double cutoff,
                                          char** out_json) {
  if (trace_path == nullptr || out_json == nullptr)
    return fail(INTENTSIM_ERR_INVALID_ARGUMENT, "null argument to intentsim_trace_evaluate");
  return guarded([&] {
    std::ifstream in(trace_path, std::ios::binary);
    if (!in) throw Error(Error::Code::Io, std::string("cannot open: ") + trace_path);
    const harness::TraceTables tables = msgpack != 0 ? harness::tables_from_msgpack(in)
                                                     : harness::tables_from_jsonl(in);
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [sensor, frames] : tables.tracks)
      out[std::to_string(sensor)] =
          report_json(mot::evaluate(frames, tables.truth, cutoff > 0.0 ? cutoff : 1.0));
    *out_json = copy_out(out.dump());
  });
}

intentsim_status intentsim_bench(int agents, int goals, int iterations, char** out_json) {
  if (out_json == nullptr)
    return fail(INTENTSIM_ERR_INVALID_ARGUMENT, "null argument to intentsim_bench");
  return guarded([&] {
    const harness::BenchResult r = harness::bench_inference(agents, goals, iterations);
    *out_json = copy_out(nlohmann::json{{"medianMs", r.medianMs},
                                        {"worstMs", r.worstMs},
                                        {"iterations", r.iterations}}
                             .dump());
  });
}

}  // extern "C"
