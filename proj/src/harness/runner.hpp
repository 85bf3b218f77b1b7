#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "harness/scenario.hpp"
#include "intent/intent.hpp"
#include "ptrack/tracker.hpp"

namespace intentsim::harness {

enum class RunMode {
  InferenceOnly,  // the inference engine sees the true world
  FullPipeline,   // the inference engine sees one node's fused tracks
};

struct RunOptions {
  RunMode mode = RunMode::InferenceOnly;
  std::optional<std::uint64_t> seed;   // overrides the scenario seed
  std::optional<double> dropProb;      // overrides the network drop probability
  std::vector<KillEvent> extraKills;   // merged with the scenario's kill list
  int observerSensor = 0;              // index of the node whose output feeds inference
};

/// One sensor node's view of one step. A dead node contributes an empty
/// frame with alive = false.
struct SensorFrame {
  ptrack::SensorId sensor = 0;
  bool alive = true;
  std::vector<ptrack::Measurement> measurements;
  std::vector<ptrack::TrackerNode::OutputTrack> tracks;
};

struct StepRecord {
  double time = 0.0;
  WorldState world;  // state after this step
  std::map<AgentId, GoalId> trueGoals;
  std::map<AgentId, Vec2> commands;
  std::vector<SensorFrame> sensors;  // empty in inference-only mode
  std::vector<intent::GoalBelief> beliefs;
  std::vector<std::tuple<AgentId, GoalId, double>> likelihoods;
  std::vector<std::string> diagnostics;
};

struct RunResult {
  Scenario scenario;  // with overrides applied
  RunMode mode = RunMode::InferenceOnly;
  std::vector<StepRecord> steps;
};

/// Advances the scenario from t = 0 in stepDt increments: behaviors pick
/// goals, every agent plans toward its true goal, the world steps, sensors
/// observe, tracker nodes exchange beliefs over the simulated network, and
/// goal inference consumes either the truth or the observer node's tracks.
/// Identical scenario and options reproduce the result exactly.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

struct BenchResult {
  double medianMs = 0.0;
  double worstMs = 0.0;
  int iterations = 0;
};

/// Times full inference iterations on a synthetic circular scene with the
/// given agent and goal counts.
BenchResult bench_inference(int nAgents, int nGoals, int iterations);

}  // namespace intentsim::harness
