#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/world.hpp"
#include "netsim/bus.hpp"
#include "ptrack/tracker.hpp"

namespace intentsim::harness {

enum class BehaviorType {
  Scripted,  // fixed goal schedule
  Planner,   // cycles through a goal list, advancing on arrival
  Switcher,  // jumps to a random goal at random dwell intervals
};

struct ScheduledGoal {
  double at = 0.0;
  GoalId goal = 0;
};

struct BehaviorSpec {
  BehaviorType type = BehaviorType::Scripted;
  std::vector<ScheduledGoal> schedule;  // scripted; strictly increasing times
  std::vector<GoalId> cycle;            // planner; visited in order, wrapping
  double arriveTol = 0.3;               // planner; meters to count as arrived
  double minDwell = 2.0;                // switcher; seconds
  double maxDwell = 4.0;
};

struct AgentSpec {
  AgentState state;
  ptrack::Appearance appearance;
  BehaviorSpec behavior;
};

struct SensorSpec {
  ptrack::SensorId id = 0;
  std::vector<Vec2> fov;  // simple polygon, at least 3 vertices
  double noiseSigma = 0.05;
  double detectionRate = 1.0;
  double clutterRate = 0.0;  // expected false positives per frame
  double appearanceNoise = 0.0;
};

struct KillEvent {
  ptrack::SensorId node = 0;
  double at = 0.0;
};

struct NetworkSpec {
  netsim::LinkModel link;
  std::vector<KillEvent> kills;
  std::vector<KillEvent> revives;
};

/// A complete experiment description. Goal ids are positions in the goal
/// list (or row-major grid cells); agents may be absent entirely, in which
/// case a run produces a trace with no belief records.
struct Scenario {
  std::string name;
  double duration = 10.0;
  double stepDt = 0.1;
  GoalSet goals;
  std::vector<AgentSpec> agents;
  std::vector<SensorSpec> sensors;
  NetworkSpec network;
  std::uint64_t seed = 1;
};

/// Parses and validates scenario JSON text. Throws Error::Code::Parse on
/// malformed JSON and Error::Code::Validation with the offending field's
/// path in the message on schema violations.
Scenario parse_scenario(const std::string& jsonText);

/// Reads the file and parses it. Throws Error::Code::Io when unreadable.
Scenario load_scenario(const std::string& path);

/// Resolves a scenario argument to a readable file: an existing path is
/// taken as-is; otherwise the name (with .json appended when missing) is
/// looked up under $INTENTSIM_CONFIG_DIR and then under the build-time
/// default scenario directory. Throws Error::Code::Io when nothing matches.
std::string resolve_scenario_path(const std::string& nameOrPath);

}  // namespace intentsim::harness
