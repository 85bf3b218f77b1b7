#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "doctest.h"
#include "harness/runner.hpp"
#include "harness/scenario.hpp"
#include "harness/sensors.hpp"
#include "harness/trace.hpp"

using namespace intentsim;
using namespace intentsim::harness;

namespace {

std::string scenario_file(const char* name) {
  return std::string(SCENARIO_DIR) + "/" + name;
}

// Parse failure message, or empty when parsing unexpectedly succeeds.
std::string rejection(const std::string& jsonText) {
  try {
    parse_scenario(jsonText);
    return {};
  } catch (const Error& e) {
    return e.what();
  }
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

// Two isolated agents under one exact full-coverage sensor; the pipeline
// sees precisely what the truth adapter sees once tracks confirm.
const char* kConsistencyScenario = R"({
  "name": "consistency",
  "duration": 6.0,
  "stepDt": 0.1,
  "seed": 5,
  "goals": [[6.0, 0.0], [6.0, 10.0], [0.0, 5.0]],
  "agents": [
    {"id": 1, "position": [0.0, 0.0], "appearance": [1.0, 0.0],
     "behavior": {"type": "scripted", "schedule": [{"at": 0.0, "goal": 0}]}},
    {"id": 2, "position": [0.0, 10.0], "appearance": [0.0, 1.0],
     "behavior": {"type": "scripted", "schedule": [{"at": 0.0, "goal": 1}]}}
  ],
  "sensors": [
    {"id": 1, "fov": [[-1.0, -1.0], [8.0, -1.0], [8.0, 11.0], [-1.0, 11.0]],
     "noiseSigma": 0.0, "detectionRate": 1.0, "clutterRate": 0.0, "appearanceNoise": 0.0}
  ]
})";

}  // namespace

TEST_CASE("scenario validation errors name the offending field") {
  CHECK(contains(rejection(R"({"duration": 1, "stepDt": 0.1, "goals": [[0,0]]})"), "name"));
  CHECK(contains(rejection(R"({"name": "x", "duration": 1, "stepDt": 0, "goals": [[0,0]]})"),
                 "stepDt"));
  CHECK(contains(
      rejection(R"({"name": "x", "duration": 0.05, "stepDt": 0.1, "goals": [[0,0]]})"),
      "duration"));
  CHECK(contains(rejection(R"({"name": "x", "duration": 1, "stepDt": 0.1, "goals": []})"),
                 "goals"));

  const std::string badBehavior = rejection(R"({
    "name": "x", "duration": 1, "stepDt": 0.1, "goals": [[0,0]],
    "agents": [{"id": 1, "position": [0,0], "behavior": {"type": "wander"}}]})");
  CHECK(contains(badBehavior, "behavior.type"));
  CHECK(contains(badBehavior, "wander"));

  CHECK(contains(rejection(R"({
    "name": "x", "duration": 1, "stepDt": 0.1, "goals": [[0,0]],
    "agents": [{"id": 1, "position": [0,0],
                "behavior": {"type": "scripted", "schedule": [{"at": 0, "goal": 9}]}}]})"),
                 "schedule[0].goal"));

  CHECK(contains(rejection(R"({
    "name": "x", "duration": 1, "stepDt": 0.1, "goals": [[0,0]],
    "agents": [
      {"id": 1, "position": [0,0],
       "behavior": {"type": "scripted", "schedule": [{"at": 0, "goal": 0}]}},
      {"id": 1, "position": [1,1],
       "behavior": {"type": "scripted", "schedule": [{"at": 0, "goal": 0}]}}]})"),
                 "agents[1].id"));

  CHECK(contains(rejection(R"({
    "name": "x", "duration": 1, "stepDt": 0.1, "goals": [[0,0]],
    "sensors": [{"id": 1, "fov": [[0,0], [1,0]]}]})"),
                 "fov"));

  CHECK(contains(rejection(R"({
    "name": "x", "duration": 1, "stepDt": 0.1, "goals": [[0,0]],
    "sensors": [{"id": 1, "fov": [[0,0], [1,0], [1,1]], "detectionRate": 1.5}]})"),
                 "detectionRate"));

  CHECK(contains(rejection(R"({
    "name": "x", "duration": 1, "stepDt": 0.1, "goals": [[0,0]],
    "network": {"dropProb": -0.1}})"),
                 "network.dropProb"));

  CHECK(contains(rejection(R"({
    "name": "x", "duration": 1, "stepDt": 0.1, "goals": [[0,0]],
    "sensors": [{"id": 1, "fov": [[0,0], [1,0], [1,1]]}],
    "network": {"kill": [{"node": 9, "at": 1.0}]}})"),
                 "network.kill[0].node"));

  // Appearance vectors must agree in length across agents.
  CHECK(contains(rejection(R"({
    "name": "x", "duration": 1, "stepDt": 0.1, "goals": [[0,0]],
    "agents": [
      {"id": 1, "position": [0,0], "appearance": [1.0],
       "behavior": {"type": "scripted", "schedule": [{"at": 0, "goal": 0}]}},
      {"id": 2, "position": [1,1], "appearance": [1.0, 0.0],
       "behavior": {"type": "scripted", "schedule": [{"at": 0, "goal": 0}]}}]})"),
                 "appearance"));

  CHECK_THROWS_AS(parse_scenario("{nope"), Error);
}

TEST_CASE("shipped scenarios parse and validate") {
  for (const char* name :
       {"crossing.json", "lab4.json", "grid100.json", "fusion2.json", "asynch3.json"}) {
    const Scenario s = load_scenario(scenario_file(name));
    CHECK(!s.name.empty());
    CHECK(s.goals.size() >= 3);
  }
  const Scenario grid = load_scenario(scenario_file("grid100.json"));
  CHECK(grid.goals.size() == 100);
  // Row-major cell centers over [0,10]^2.
  CHECK(grid.goals.at(36).position.x == doctest::Approx(6.5));
  CHECK(grid.goals.at(36).position.y == doctest::Approx(3.5));
}

TEST_CASE("scenario lookup honors the config directory override") {
  namespace fs = std::filesystem;
  CHECK(resolve_scenario_path(scenario_file("crossing.json")) == scenario_file("crossing.json"));

  const fs::path dir = fs::temp_directory_path() / "intentsim-test-scenarios";
  fs::create_directories(dir);
  fs::copy_file(scenario_file("crossing.json"), dir / "renamed-crossing.json",
                fs::copy_options::overwrite_existing);
  setenv("INTENTSIM_CONFIG_DIR", dir.c_str(), 1);
  CHECK(resolve_scenario_path("renamed-crossing") == (dir / "renamed-crossing.json").string());
  unsetenv("INTENTSIM_CONFIG_DIR");
  CHECK_THROWS_AS(resolve_scenario_path("renamed-crossing"), Error);
  fs::remove_all(dir);
}

TEST_CASE("point-in-polygon handles convex and concave shapes") {
  const std::vector<Vec2> square{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
  CHECK(point_in_polygon(square, {2, 2}));
  CHECK(point_in_polygon(square, {0.01, 3.99}));
  CHECK_FALSE(point_in_polygon(square, {5, 2}));
  CHECK_FALSE(point_in_polygon(square, {-0.01, 2}));

  // L-shape: the notch on the upper right is outside.
  const std::vector<Vec2> ell{{0, 0}, {4, 0}, {4, 2}, {2, 2}, {2, 4}, {0, 4}};
  CHECK(point_in_polygon(ell, {1, 3}));
  CHECK(point_in_polygon(ell, {3, 1}));
  CHECK_FALSE(point_in_polygon(ell, {3, 3}));
}

TEST_CASE("an exact sensor reproduces the truth and misses outsiders") {
  SensorSpec spec;
  spec.id = 1;
  spec.fov = {{0, 0}, {4, 0}, {4, 4}, {0, 4}};
  spec.noiseSigma = 0.0;
  spec.detectionRate = 1.0;

  WorldState w;
  w.agents.push_back({.id = 1, .position = {2.0, 2.0}, .velocity = {1.0, 0.0}});
  w.agents.push_back({.id = 2, .position = {6.0, 2.0}, .velocity = {0.0, 0.0}});
  std::vector<AgentSpec> specs(2);
  specs[0].state = w.agents[0];
  specs[0].appearance = {0.7, 0.3};
  specs[1].state = w.agents[1];
  specs[1].appearance = {0.1, 0.9};

  auto rng = make_rng(3, "sensor-test");
  const auto z = simulate_sensor(spec, w, specs, 0.5, rng);
  REQUIRE(z.size() == 1);
  CHECK(z[0].position == Vec2{2.0, 2.0});
  CHECK(z[0].appearance == ptrack::Appearance{0.7, 0.3});
  CHECK(z[0].sensor == 1);
  CHECK(z[0].time == doctest::Approx(0.5));
}

TEST_CASE("clutter count follows the configured rate") {
  SensorSpec spec;
  spec.id = 1;
  spec.fov = {{0, 0}, {10, 0}, {10, 10}, {0, 10}};
  spec.clutterRate = 2.0;
  WorldState empty;
  auto rng = make_rng(11, "clutter-test");

  int total = 0;
  for (int frame = 0; frame < 1000; ++frame) {
    const auto z = simulate_sensor(spec, empty, {}, 0.1 * frame, rng);
    total += static_cast<int>(z.size());
    for (const auto& m : z) {
      CHECK(point_in_polygon(spec.fov, m.position));
      CHECK(m.appearance.empty());
    }
  }
  // Poisson(2000): three standard deviations is about 134.
  CHECK(total >= 1866);
  CHECK(total <= 2134);
}

TEST_CASE("an agentless scenario runs and carries no beliefs") {
  const Scenario s = parse_scenario(R"({
    "name": "empty", "duration": 1.0, "stepDt": 0.1, "goals": [[0,0], [1,1]]})");
  const RunResult run = run_scenario(s);
  CHECK(run.steps.size() == 10);
  for (const StepRecord& step : run.steps) {
    CHECK(step.beliefs.empty());
    CHECK(step.world.agents.empty());
  }
  std::ostringstream out;
  write_trace_jsonl(run, out);
  CHECK(run.steps.size() == 10);
  CHECK(contains(out.str(), "\"beliefs\":[]"));
}

TEST_CASE("identical seeds reproduce the trace byte for byte") {
  Scenario s = load_scenario(scenario_file("fusion2.json"));
  s.duration = 6.0;
  RunOptions opts;
  opts.mode = RunMode::FullPipeline;
  opts.seed = 7;

  const RunResult a = run_scenario(s, opts);
  const RunResult b = run_scenario(s, opts);
  std::ostringstream ja, jb, ma, mb;
  write_trace_jsonl(a, ja);
  write_trace_jsonl(b, jb);
  write_trace_msgpack(a, ma);
  write_trace_msgpack(b, mb);
  CHECK(ja.str() == jb.str());
  CHECK(ma.str() == mb.str());

  RunOptions other = opts;
  other.seed = 8;
  std::ostringstream jc;
  write_trace_jsonl(run_scenario(s, other), jc);
  CHECK(ja.str() != jc.str());
}

TEST_CASE("pipeline beliefs settle onto the inference-only beliefs") {
  const Scenario s = parse_scenario(kConsistencyScenario);

  RunOptions io;
  io.mode = RunMode::InferenceOnly;
  const RunResult truthRun = run_scenario(s, io);

  RunOptions fp;
  fp.mode = RunMode::FullPipeline;
  const RunResult pipeRun = run_scenario(s, fp);

  REQUIRE(truthRun.steps.size() == pipeRun.steps.size());
  int compared = 0;
  for (std::size_t k = 0; k < truthRun.steps.size(); ++k) {
    if (truthRun.steps[k].time < 3.0) continue;  // tracker confirmation settling
    const StepRecord& ts = truthRun.steps[k];
    const StepRecord& ps = pipeRun.steps[k];
    for (const AgentState& a : ts.world.agents) {
      // The pipeline names agents by track id; align by position, which the
      // exact sensor preserves.
      const intent::GoalBelief* pipeBelief = nullptr;
      for (const auto& obs : ps.sensors[0].tracks)
        if (distance(obs.position, a.position) < 1e-6)
          for (const intent::GoalBelief& b : ps.beliefs)
            if (b.agent == obs.id) pipeBelief = &b;
      REQUIRE(pipeBelief != nullptr);
      const intent::GoalBelief* truthBelief = nullptr;
      for (const intent::GoalBelief& b : ts.beliefs)
        if (b.agent == a.id) truthBelief = &b;
      REQUIRE(truthBelief != nullptr);
      for (const auto& [goal, p] : truthBelief->posterior) {
        CHECK(std::abs(pipeBelief->prob(goal) - p) <= 1e-3);
      }
      ++compared;
    }
  }
  CHECK(compared >= 60);  // 3 seconds, two agents, every step
}

TEST_CASE("trace tables round-trip through both trace formats") {
  Scenario s = load_scenario(scenario_file("fusion2.json"));
  s.duration = 5.0;
  RunOptions opts;
  opts.mode = RunMode::FullPipeline;
  const RunResult run = run_scenario(s, opts);

  const mot::MotReport direct = evaluate_node(run, 1);

  std::stringstream jsonl;
  write_trace_jsonl(run, jsonl);
  const TraceTables fromJson = tables_from_jsonl(jsonl);
  const mot::MotReport viaJson = mot::evaluate(fromJson.tracks.at(1), fromJson.truth, 1.0);
  CHECK(viaJson.mota == direct.mota);
  CHECK(viaJson.motp == direct.motp);
  CHECK(viaJson.totalIdSwitches == direct.totalIdSwitches);

  std::stringstream packed;
  write_trace_msgpack(run, packed);
  const TraceTables fromPack = tables_from_msgpack(packed);
  const mot::MotReport viaPack = mot::evaluate(fromPack.tracks.at(1), fromPack.truth, 1.0);
  CHECK(viaPack.mota == direct.mota);
  CHECK(viaPack.motp == direct.motp);

  std::istringstream garbage("not json\n");
  CHECK_THROWS_AS(tables_from_jsonl(garbage), Error);
}

TEST_CASE("a noiseless pipeline tracks almost perfectly") {
  const Scenario s = parse_scenario(kConsistencyScenario);
  RunOptions opts;
  opts.mode = RunMode::FullPipeline;
  const RunResult run = run_scenario(s, opts);
  const mot::MotReport r = evaluate_node(run, 1);
  // Tracks confirm on the second detection; only the first frame is missed.
  CHECK(r.mota >= 0.98);
  CHECK(r.motp >= 0.999);
  CHECK(r.totalIdSwitches == 0);
}

TEST_CASE("kill options silence a node mid-run") {
  Scenario s = load_scenario(scenario_file("fusion2.json"));
  s.duration = 6.0;
  RunOptions opts;
  opts.mode = RunMode::FullPipeline;
  opts.extraKills.push_back({2, 3.0});

  const RunResult run = run_scenario(s, opts);
  for (const StepRecord& step : run.steps) {
    REQUIRE(step.sensors.size() == 2);
    const SensorFrame& f = step.sensors[1];
    if (step.time < 3.0) {
      CHECK(f.alive);
    } else {
      CHECK_FALSE(f.alive);
      CHECK(f.tracks.empty());
      CHECK(f.measurements.empty());
    }
    CHECK(step.sensors[0].alive);
  }

  RunOptions bad;
  bad.mode = RunMode::FullPipeline;
  bad.extraKills.push_back({9, 1.0});
  CHECK_THROWS_AS(run_scenario(s, bad), Error);
}

TEST_CASE("csv emitters produce one row per datum") {
  const Scenario s = parse_scenario(R"({
    "name": "tiny", "duration": 1.0, "stepDt": 0.1, "goals": [[3,0], [0,3]],
    "agents": [{"id": 1, "position": [0,0],
                "behavior": {"type": "scripted", "schedule": [{"at": 0, "goal": 0}]}}]})");
  const RunResult run = run_scenario(s);

  std::ostringstream beliefs;
  write_belief_csv(run, beliefs);
  std::istringstream lines(beliefs.str());
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) ++n;
  CHECK(n == 1 + 10 * 2);  // header + steps x goals for the one agent

  std::ostringstream conc;
  write_concentration_csv(run, 1, conc);
  CHECK(contains(conc.str(), "time,argmaxGoal,argmaxX,argmaxY,top5Mass"));

  std::ostringstream metrics;
  write_metrics_csv({{"base", mot::MotReport{}}}, metrics);
  CHECK(contains(metrics.str(), "label,mota"));
  CHECK(contains(metrics.str(), "base,"));
}

TEST_CASE("inference benchmark reports positive timings") {
  const BenchResult r = bench_inference(3, 2, 5);
  CHECK(r.iterations == 5);
  CHECK(r.medianMs > 0.0);
  CHECK(r.worstMs >= r.medianMs);
  CHECK_THROWS_AS(bench_inference(0, 1, 1), Error);
}
