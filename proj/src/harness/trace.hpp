#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "harness/runner.hpp"
#include "mot/metrics.hpp"

namespace intentsim::harness {

/// One step as a JSON object; keys are emitted in sorted order, so equal
/// records serialize to equal bytes.
std::string step_to_json(const StepRecord& step);

/// Line-delimited JSON, one step per line.
void write_trace_jsonl(const RunResult& run, std::ostream& out);

/// The same records in MessagePack framing, concatenated.
void write_trace_msgpack(const RunResult& run, std::ostream& out);

/// Truth and per-sensor track tables extracted from a run or read back from
/// a trace stream; the shapes the evaluator consumes.
struct TraceTables {
  std::vector<mot::TruthFrame> truth;
  std::map<ptrack::SensorId, std::vector<mot::TrackFrame>> tracks;
};

TraceTables tables_from_run(const RunResult& run);
TraceTables tables_from_jsonl(std::istream& in);
TraceTables tables_from_msgpack(std::istream& in);

/// CLEAR MOT report of one sensor node's output against the truth.
mot::MotReport evaluate_node(const RunResult& run, ptrack::SensorId sensor, double cutoff = 1.0);

/// Per-goal belief trajectories: time, agent, goal, probability.
void write_belief_csv(const RunResult& run, std::ostream& out);

/// Belief concentration of one agent: per step, the argmax goal, its
/// position, and the total mass of the five most probable goals.
void write_concentration_csv(const RunResult& run, AgentId agent, std::ostream& out);

/// One labelled metrics row per report: label, mota, motp, counts.
void write_metrics_csv(const std::vector<std::pair<std::string, mot::MotReport>>& rows,
                       std::ostream& out);

}  // namespace intentsim::harness
