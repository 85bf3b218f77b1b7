#include "harness/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "harness/sensors.hpp"
#include "hrvo/hrvo.hpp"
#include "netsim/bus.hpp"

namespace intentsim::harness {
namespace {

/// Goal selection state of one agent.
class Behavior {
 public:
  Behavior(const AgentSpec& spec, const GoalSet& goals, std::uint64_t seed)
      : spec_(spec.behavior), rng_(make_rng(seed, "behavior", spec.state.id)) {
    switch (spec_.type) {
      case BehaviorType::Scripted:
        goal_ = spec_.schedule.front().goal;
        break;
      case BehaviorType::Planner:
        goal_ = spec_.cycle.front();
        break;
      case BehaviorType::Switcher:
        goal_ = random_goal(goals, std::nullopt);
        nextSwitch_ = dwell();
        break;
    }
  }

  GoalId step(double now, const AgentState& self, const GoalSet& goals) {
    switch (spec_.type) {
      case BehaviorType::Scripted:
        while (scheduleIndex_ + 1 < spec_.schedule.size() &&
               spec_.schedule[scheduleIndex_ + 1].at <= now) {
          ++scheduleIndex_;
          goal_ = spec_.schedule[scheduleIndex_].goal;
        }
        break;
      case BehaviorType::Planner:
        if (distance(self.position, goals.at(goal_).position) <= spec_.arriveTol) {
          cycleIndex_ = (cycleIndex_ + 1) % spec_.cycle.size();
          goal_ = spec_.cycle[cycleIndex_];
        }
        break;
      case BehaviorType::Switcher:
        if (now >= nextSwitch_) {
          goal_ = random_goal(goals, goal_);
          nextSwitch_ = now + dwell();
        }
        break;
    }
    return goal_;
  }

 private:
  double dwell() {
    std::uniform_real_distribution<double> u(spec_.minDwell, spec_.maxDwell);
    return u(rng_);
  }

  GoalId random_goal(const GoalSet& goals, std::optional<GoalId> avoid) {
    std::uniform_int_distribution<std::size_t> pick(0, goals.size() - 1);
    GoalId g = goals.goals[pick(rng_)].id;
    while (goals.size() > 1 && avoid && g == *avoid) g = goals.goals[pick(rng_)].id;
    return g;
  }

  BehaviorSpec spec_;
  std::mt19937_64 rng_;
  GoalId goal_ = 0;
  std::size_t scheduleIndex_ = 0;
  std::size_t cycleIndex_ = 0;
  double nextSwitch_ = 0.0;
};

}  // namespace

RunResult run_scenario(const Scenario& scenarioIn, const RunOptions& options) {
  Scenario scenario = scenarioIn;
  if (options.seed) scenario.seed = *options.seed;
  if (options.dropProb) {
    if (*options.dropProb < 0.0 || *options.dropProb > 1.0)
      throw Error(Error::Code::InvalidArgument, "drop probability must be in [0, 1]");
    scenario.network.link.dropProb = *options.dropProb;
  }
  for (const KillEvent& e : options.extraKills) {
    bool known = false;
    for (const SensorSpec& s : scenario.sensors) known = known || s.id == e.node;
    if (!known)
      throw Error(Error::Code::InvalidArgument,
                  "kill event names no sensor: " + std::to_string(e.node));
    scenario.network.kills.push_back(e);
  }
  scenario.goals.validate();

  const double dt = scenario.stepDt;
  const int steps = std::max(1, static_cast<int>(std::llround(scenario.duration / dt)));

  WorldState world;
  std::vector<Behavior> behaviors;
  for (const AgentSpec& a : scenario.agents) {
    world.agents.push_back(a.state);
    behaviors.emplace_back(a, scenario.goals, scenario.seed);
  }

  const bool pipeline = options.mode == RunMode::FullPipeline && !scenario.sensors.empty();
  if (pipeline &&
      (options.observerSensor < 0 ||
       options.observerSensor >= static_cast<int>(scenario.sensors.size())))
    throw Error(Error::Code::InvalidArgument, "observer sensor index out of range");

  std::vector<ptrack::TrackerNode> nodes;
  std::vector<std::mt19937_64> sensorRngs;
  std::optional<netsim::MessageBus> bus;
  std::vector<char> nodeAlive(scenario.sensors.size(), 1);
  if (pipeline) {
    std::vector<ptrack::SensorId> ids;
    for (const SensorSpec& s : scenario.sensors) {
      nodes.emplace_back(s.id, scenario.seed);
      sensorRngs.push_back(make_rng(scenario.seed, "sensor", s.id));
      ids.push_back(s.id);
    }
    bus.emplace(ids, scenario.seed, scenario.network.link);
  }

  // Kill/revive events fire on the first step whose post-step time reaches
  // them; a killed node neither senses, fuses, nor broadcasts.
  auto kills = scenario.network.kills;
  auto revives = scenario.network.revives;
  std::stable_sort(kills.begin(), kills.end(),
                   [](const KillEvent& a, const KillEvent& b) { return a.at < b.at; });
  std::stable_sort(revives.begin(), revives.end(),
                   [](const KillEvent& a, const KillEvent& b) { return a.at < b.at; });
  std::size_t nextKill = 0;
  std::size_t nextRevive = 0;

  intent::InferenceSnapshot snapshot;
  const intent::InferenceConfig icfg;

  RunResult result;
  result.scenario = scenario;
  result.mode = options.mode;
  result.steps.reserve(steps);

  for (int k = 0; k < steps; ++k) {
    StepRecord rec;

    // Behaviors read the pre-step clock; goal switches scheduled at t fire
    // on the step that starts at t.
    for (std::size_t i = 0; i < behaviors.size(); ++i) {
      const GoalId g = behaviors[i].step(world.time, world.agents[i], scenario.goals);
      rec.trueGoals[world.agents[i].id] = g;
      world.goalAssignment[world.agents[i].id] = g;
    }
    for (const AgentState& a : world.agents) {
      const Vec2 goalPos = scenario.goals.at(rec.trueGoals.at(a.id)).position;
      rec.commands[a.id] = hrvo::plan_velocity(world, a.id, goalPos, dt).velocity;
    }

    StepResult stepped = step_world(world, dt, rec.commands);
    world = std::move(stepped.world);
    const double now = world.time;
    rec.time = now;
    for (const ClampDiagnostic& c : stepped.clamps)
      rec.diagnostics.push_back("agent " + std::to_string(c.agent) + " command clamped");

    if (pipeline) {
      while (nextKill < kills.size() && kills[nextKill].at <= now) {
        for (std::size_t i = 0; i < scenario.sensors.size(); ++i)
          if (scenario.sensors[i].id == kills[nextKill].node) {
            nodeAlive[i] = 0;
            bus->kill(kills[nextKill].node);
          }
        ++nextKill;
      }
      while (nextRevive < revives.size() && revives[nextRevive].at <= now) {
        for (std::size_t i = 0; i < scenario.sensors.size(); ++i)
          if (scenario.sensors[i].id == revives[nextRevive].node) {
            nodeAlive[i] = 1;
            bus->revive(revives[nextRevive].node);
          }
        ++nextRevive;
      }

      for (std::size_t i = 0; i < scenario.sensors.size(); ++i) {
        SensorFrame frame;
        frame.sensor = scenario.sensors[i].id;
        frame.alive = nodeAlive[i] != 0;
        if (frame.alive) {
          frame.measurements =
              simulate_sensor(scenario.sensors[i], world, scenario.agents, now, sensorRngs[i]);
          const ptrack::GmmBelief belief =
              nodes[i].step_local(frame.measurements, now, dt);
          bus->broadcast(frame.sensor, belief, now);
        }
        rec.sensors.push_back(std::move(frame));
      }
      for (std::size_t i = 0; i < scenario.sensors.size(); ++i) {
        if (!nodeAlive[i]) continue;
        const auto received = bus->collect(rec.sensors[i].sensor, now, dt);
        nodes[i].step_global(received, dt, dt, now);
        rec.sensors[i].tracks = nodes[i].output();
        for (std::string& d : nodes[i].drain_diagnostics())
          rec.diagnostics.push_back("sensor " + std::to_string(rec.sensors[i].sensor) + ": " +
                                    std::move(d));
      }
      for (std::string& d : bus->drain_diagnostics()) rec.diagnostics.push_back(std::move(d));
    }

    std::vector<intent::ObservedAgent> observations;
    if (options.mode == RunMode::InferenceOnly) {
      for (const AgentState& a : world.agents)
        observations.push_back({a.id, a.position, a.velocity, a.radius});
    } else if (pipeline && nodeAlive[options.observerSensor]) {
      for (const auto& t : rec.sensors[options.observerSensor].tracks)
        observations.push_back({t.id, t.position, t.velocity, icfg.defaultRadius});
    }
    snapshot = intent::infer_all(snapshot, observations, scenario.goals, dt, icfg);
    rec.beliefs = snapshot.beliefs;
    rec.likelihoods = snapshot.likelihoods;
    for (const std::string& d : snapshot.diagnostics) rec.diagnostics.push_back(d);

    rec.world = world;
    result.steps.push_back(std::move(rec));
  }
  return result;
}

BenchResult bench_inference(int nAgents, int nGoals, int iterations) {
  if (nAgents < 1 || nGoals < 1 || iterations < 1)
    throw Error(Error::Code::InvalidArgument, "bench: counts must be positive");

  GoalSet goals;
  for (int g = 0; g < nGoals; ++g) {
    const double a = 2.0 * M_PI * g / nGoals;
    goals.goals.push_back({static_cast<GoalId>(g), 3.0 * from_angle(a)});
  }
  WorldState world;
  for (int i = 0; i < nAgents; ++i) {
    const double a = 2.0 * M_PI * i / nAgents;
    AgentState s;
    s.id = static_cast<AgentId>(i + 1);
    s.position = 6.0 * from_angle(a);
    s.velocity = s.prefSpeed * normalized(goals.goals[i % nGoals].position - s.position);
    world.agents.push_back(s);
  }

  const double dt = 0.1;
  intent::InferenceSnapshot snapshot;
  std::vector<double> samples;
  samples.reserve(iterations);
  const int warmup = 3;
  for (int it = 0; it < iterations + warmup; ++it) {
    std::vector<intent::ObservedAgent> obs;
    obs.reserve(world.agents.size());
    for (const AgentState& a : world.agents)
      obs.push_back({a.id, a.position, a.velocity, a.radius});

    const auto t0 = std::chrono::steady_clock::now();
    snapshot = intent::infer_all(snapshot, obs, goals, dt);
    const auto t1 = std::chrono::steady_clock::now();
    if (it >= warmup)
      samples.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());

    for (AgentState& a : world.agents) {
      a.position += dt * a.velocity;
      const Vec2 goal = goals.goals[(a.id - 1) % nGoals].position;
      if (distance(a.position, goal) > 0.2)
        a.velocity = a.prefSpeed * normalized(goal - a.position);
      else
        a.velocity = a.prefSpeed * normalized(-1.0 * a.position);
    }
    world.time += dt;
  }

  std::sort(samples.begin(), samples.end());
  BenchResult r;
  r.iterations = iterations;
  r.medianMs = samples[samples.size() / 2];
  r.worstMs = samples.back();
  return r;
}

}  // namespace intentsim::harness
