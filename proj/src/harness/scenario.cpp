#include "harness/scenario.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "intent/intent.hpp"
#include "json.hpp"

namespace intentsim::harness {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(Error::Code::Validation, "scenario." + path + ": " + what);
}

const json& member(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double number_or(const json& j, const std::string& path, const char* key, double fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : number(*it, join(path, key));
}

std::uint64_t uinteger(const json& j, const std::string& path) {
  if (!j.is_number_unsigned()) fail(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

Vec2 vec2(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [x, y]");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

GoalSet parse_goals(const json& j, const std::string& path) {
  GoalSet set;
  if (j.is_object()) {
    const json& grid = member(j, path, "grid");
    const std::string gp = join(path, "grid");
    const Vec2 lo = vec2(member(grid, gp, "min"), join(gp, "min"));
    const Vec2 hi = vec2(member(grid, gp, "max"), join(gp, "max"));
    const auto nx = static_cast<int>(uinteger(member(grid, gp, "nx"), join(gp, "nx")));
    const auto ny = static_cast<int>(uinteger(member(grid, gp, "ny"), join(gp, "ny")));
    if (nx < 1 || ny < 1) fail(gp, "grid must be at least 1x1");
    if (!(hi.x > lo.x) || !(hi.y > lo.y)) fail(gp, "max must exceed min");
    return intent::sample_goal_grid({lo, hi}, nx, ny);
  }
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty goal list or a grid spec");
  for (std::size_t i = 0; i < j.size(); ++i)
    set.goals.push_back({static_cast<GoalId>(i), vec2(j[i], path + "[" + std::to_string(i) + "]")});
  return set;
}

void require_goal(const GoalSet& goals, GoalId id, const std::string& path) {
  if (!goals.find(id)) fail(path, "goal " + std::to_string(id) + " does not exist");
}

BehaviorSpec parse_behavior(const json& j, const std::string& path, const GoalSet& goals) {
  BehaviorSpec b;
  const json& typeJson = member(j, path, "type");
  if (!typeJson.is_string()) fail(join(path, "type"), "expected a string");
  const std::string type = typeJson.get<std::string>();
  if (type == "scripted") {
    b.type = BehaviorType::Scripted;
    const json& sched = member(j, path, "schedule");
    const std::string sp = join(path, "schedule");
    if (!sched.is_array() || sched.empty()) fail(sp, "expected a non-empty array");
    double prev = -1e300;
    for (std::size_t i = 0; i < sched.size(); ++i) {
      const std::string ep = sp + "[" + std::to_string(i) + "]";
      const double at = number(member(sched[i], ep, "at"), join(ep, "at"));
      const auto goal = static_cast<GoalId>(uinteger(member(sched[i], ep, "goal"), join(ep, "goal")));
      require_goal(goals, goal, join(ep, "goal"));
      if (at <= prev) fail(join(ep, "at"), "schedule times must be strictly increasing");
      prev = at;
      b.schedule.push_back({at, goal});
    }
  } else if (type == "planner") {
    b.type = BehaviorType::Planner;
    const json& cycle = member(j, path, "cycle");
    const std::string cp = join(path, "cycle");
    if (!cycle.is_array() || cycle.empty()) fail(cp, "expected a non-empty array");
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      const std::string ep = cp + "[" + std::to_string(i) + "]";
      const auto goal = static_cast<GoalId>(uinteger(cycle[i], ep));
      require_goal(goals, goal, ep);
      b.cycle.push_back(goal);
    }
    b.arriveTol = number_or(j, path, "arriveTol", 0.3);
    if (!(b.arriveTol > 0.0)) fail(join(path, "arriveTol"), "must be > 0");
  } else if (type == "switcher") {
    b.type = BehaviorType::Switcher;
    b.minDwell = number_or(j, path, "minDwell", 2.0);
    b.maxDwell = number_or(j, path, "maxDwell", 4.0);
    if (!(b.minDwell > 0.0)) fail(join(path, "minDwell"), "must be > 0");
    if (b.maxDwell < b.minDwell) fail(join(path, "maxDwell"), "must be >= minDwell");
  } else {
    fail(join(path, "type"), "unknown behavior \"" + type + "\"");
  }
  return b;
}

AgentSpec parse_agent(const json& j, const std::string& path, const GoalSet& goals) {
  AgentSpec a;
  a.state.id = static_cast<AgentId>(uinteger(member(j, path, "id"), join(path, "id")));
  a.state.position = vec2(member(j, path, "position"), join(path, "position"));
  if (auto it = j.find("velocity"); it != j.end()) a.state.velocity = vec2(*it, join(path, "velocity"));
  a.state.radius = number_or(j, path, "radius", 0.4);
  a.state.prefSpeed = number_or(j, path, "prefSpeed", 1.0);
  a.state.maxSpeed = number_or(j, path, "maxSpeed", 1.4);
  a.state.maxAccel = number_or(j, path, "maxAccel", 2.0);
  try {
    a.state.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  if (auto it = j.find("appearance"); it != j.end()) {
    const std::string ap = join(path, "appearance");
    if (!it->is_array()) fail(ap, "expected an array of numbers");
    for (std::size_t i = 0; i < it->size(); ++i)
      a.appearance.push_back(number((*it)[i], ap + "[" + std::to_string(i) + "]"));
  }
  a.behavior = parse_behavior(member(j, path, "behavior"), join(path, "behavior"), goals);
  return a;
}

SensorSpec parse_sensor(const json& j, const std::string& path) {
  SensorSpec s;
  s.id = static_cast<ptrack::SensorId>(uinteger(member(j, path, "id"), join(path, "id")));
  const json& fov = member(j, path, "fov");
  const std::string fp = join(path, "fov");
  if (!fov.is_array() || fov.size() < 3) fail(fp, "expected a polygon with at least 3 vertices");
  for (std::size_t i = 0; i < fov.size(); ++i)
    s.fov.push_back(vec2(fov[i], fp + "[" + std::to_string(i) + "]"));
  s.noiseSigma = number_or(j, path, "noiseSigma", 0.05);
  s.detectionRate = number_or(j, path, "detectionRate", 1.0);
  s.clutterRate = number_or(j, path, "clutterRate", 0.0);
  s.appearanceNoise = number_or(j, path, "appearanceNoise", 0.0);
  if (s.noiseSigma < 0.0) fail(join(path, "noiseSigma"), "must be >= 0");
  if (s.detectionRate < 0.0 || s.detectionRate > 1.0)
    fail(join(path, "detectionRate"), "must be in [0, 1]");
  if (s.clutterRate < 0.0) fail(join(path, "clutterRate"), "must be >= 0");
  if (s.appearanceNoise < 0.0) fail(join(path, "appearanceNoise"), "must be >= 0");
  return s;
}

std::vector<KillEvent> parse_events(const json& j, const std::string& path,
                                    const std::vector<SensorSpec>& sensors) {
  std::vector<KillEvent> events;
  if (!j.is_array()) fail(path, "expected an array");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string ep = path + "[" + std::to_string(i) + "]";
    KillEvent e;
    e.node = static_cast<ptrack::SensorId>(uinteger(member(j[i], ep, "node"), join(ep, "node")));
    e.at = number(member(j[i], ep, "at"), join(ep, "at"));
    bool known = false;
    for (const SensorSpec& s : sensors) known = known || s.id == e.node;
    if (!known) fail(join(ep, "node"), "names no sensor");
    if (e.at < 0.0) fail(join(ep, "at"), "must be >= 0");
    events.push_back(e);
  }
  return events;
}

}  // namespace

Scenario parse_scenario(const std::string& jsonText) {
  json j;
  try {
    j = json::parse(jsonText);
  } catch (const json::parse_error& e) {
    throw Error(Error::Code::Parse, std::string("scenario JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Error::Code::Validation, "scenario: expected a JSON object");

  Scenario s;
  const json& name = member(j, "", "name");
  if (!name.is_string() || name.get<std::string>().empty()) fail("name", "expected a non-empty string");
  s.name = name.get<std::string>();
  s.duration = number(member(j, "", "duration"), "duration");
  s.stepDt = number(member(j, "", "stepDt"), "stepDt");
  if (!(s.stepDt > 0.0)) fail("stepDt", "must be > 0");
  if (s.duration < s.stepDt) fail("duration", "must be >= stepDt");
  if (auto it = j.find("seed"); it != j.end()) s.seed = uinteger(*it, "seed");

  s.goals = parse_goals(member(j, "", "goals"), "goals");

  if (auto it = j.find("agents"); it != j.end()) {
    if (!it->is_array()) fail("agents", "expected an array");
    std::set<AgentId> ids;
    std::size_t appearanceDim = 0;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string ap = "agents[" + std::to_string(i) + "]";
      AgentSpec a = parse_agent((*it)[i], ap, s.goals);
      if (!ids.insert(a.state.id).second) fail(join(ap, "id"), "duplicate agent id");
      if (i == 0) appearanceDim = a.appearance.size();
      if (a.appearance.size() != appearanceDim)
        fail(join(ap, "appearance"), "length differs between agents");
      s.agents.push_back(std::move(a));
    }
  }

  if (auto it = j.find("sensors"); it != j.end()) {
    if (!it->is_array()) fail("sensors", "expected an array");
    std::set<ptrack::SensorId> ids;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string sp = "sensors[" + std::to_string(i) + "]";
      SensorSpec spec = parse_sensor((*it)[i], sp);
      if (!ids.insert(spec.id).second) fail(join(sp, "id"), "duplicate sensor id");
      s.sensors.push_back(std::move(spec));
    }
  }

  if (auto it = j.find("network"); it != j.end()) {
    const json& n = *it;
    s.network.link.latencyMean = number_or(n, "network", "latencyMean", 0.0);
    s.network.link.latencyJitter = number_or(n, "network", "latencyJitter", 0.0);
    s.network.link.dropProb = number_or(n, "network", "dropProb", 0.0);
    if (s.network.link.latencyMean < 0.0) fail("network.latencyMean", "must be >= 0");
    if (s.network.link.latencyJitter < 0.0) fail("network.latencyJitter", "must be >= 0");
    if (s.network.link.dropProb < 0.0 || s.network.link.dropProb > 1.0)
      fail("network.dropProb", "must be in [0, 1]");
    if (auto k = n.find("kill"); k != n.end())
      s.network.kills = parse_events(*k, "network.kill", s.sensors);
    if (auto r = n.find("revive"); r != n.end())
      s.network.revives = parse_events(*r, "network.revive", s.sensors);
  }

  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Error::Code::Io, "cannot open scenario file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

std::string resolve_scenario_path(const std::string& nameOrPath) {
  namespace fs = std::filesystem;
  if (fs::exists(nameOrPath)) return nameOrPath;

  std::string file = nameOrPath;
  if (file.size() < 5 || file.substr(file.size() - 5) != ".json") file += ".json";

  if (const char* dir = std::getenv("INTENTSIM_CONFIG_DIR")) {
    const fs::path candidate = fs::path(dir) / file;
    if (fs::exists(candidate)) return candidate.string();
  }
#ifdef INTENTSIM_SCENARIO_DIR
  {
    const fs::path candidate = fs::path(INTENTSIM_SCENARIO_DIR) / file;
    if (fs::exists(candidate)) return candidate.string();
  }
#endif
  throw Error(Error::Code::Io, "scenario not found: " + nameOrPath);
}

}  // namespace intentsim::harness
