#include <cstring>
#include <random>

#include "core/rng.hpp"
#include "core/world.hpp"
#include "doctest.h"

using namespace intentsim;

namespace {

WorldState two_agent_world() {
  WorldState w;
  w.agents.push_back({.id = 0, .position = {0.0, 0.0}, .velocity = {1.0, 0.0}});
  w.agents.push_back({.id = 7, .position = {3.0, -1.0}, .velocity = {0.0, 0.5}});
  return w;
}

}  // namespace

TEST_CASE("euler step applies commanded velocity") {
  WorldState w = two_agent_world();
  StepResult r = step_world(w, 0.1, {{0, {1.0, 0.0}}});
  CHECK(r.world.time == doctest::Approx(0.1));
  CHECK(r.world.find(0)->position.x == doctest::Approx(0.1));
  CHECK(r.world.find(0)->position.y == doctest::Approx(0.0));
  // Agent 7 had no command and coasts on its current velocity.
  CHECK(r.world.find(7)->position.y == doctest::Approx(-1.0 + 0.05));
  CHECK(r.clamps.empty());
}

TEST_CASE("zero command halts agents in place") {
  WorldState w = two_agent_world();
  for (AgentState& a : w.agents) a.velocity = {0.0, 0.0};
  StepResult r = step_world(w, 0.1, {{0, {0.0, 0.0}}, {7, {0.0, 0.0}}});
  CHECK(r.world.find(0)->position == Vec2{0.0, 0.0});
  CHECK(r.world.find(7)->position == Vec2{3.0, -1.0});
  CHECK(r.world.time == doctest::Approx(0.1));
}

TEST_CASE("speed-envelope violation is clamped and flagged") {
  WorldState w;
  w.agents.push_back({.id = 1,
                      .position = {0.0, 0.0},
                      .velocity = {0.9, 0.0},
                      .radius = 0.4,
                      .prefSpeed = 1.0,
                      .maxSpeed = 1.0,
                      .maxAccel = 100.0});
  StepResult r = step_world(w, 0.1, {{1, {2.0, 0.0}}});
  REQUIRE(r.clamps.size() == 1);
  CHECK(r.clamps[0].agent == 1);
  CHECK(r.clamps[0].requested.x == doctest::Approx(2.0));
  CHECK(r.world.find(1)->velocity.x == doctest::Approx(1.0));
  CHECK(r.world.find(1)->velocity.y == doctest::Approx(0.0));
}

TEST_CASE("command for unknown agent is rejected") {
  WorldState w = two_agent_world();
  CHECK_THROWS_AS(step_world(w, 0.1, {{42, {0.0, 0.0}}}), Error);
  CHECK_THROWS_AS(step_world(w, 0.0, {}), Error);
}

TEST_CASE("motion parameter update from rest") {
  MotionParams p;
  MotionParams next = update_motion_params(p, {1.0, 0.0}, {0.0, 0.0}, 1.0, 0.9);
  CHECK(next.avgSpeed == doctest::Approx(0.1));
  CHECK(next.maxObservedSpeed == doctest::Approx(1.0));
  CHECK(next.maxObservedAccel == doctest::Approx(1.0));
}

TEST_CASE("running maxima never decrease") {
  std::mt19937_64 rng = make_rng(11, "core-maxima");
  std::normal_distribution<double> gauss(0.0, 1.0);
  MotionParams p;
  Vec2 prev{};
  double lastSpeed = 0.0, lastAccel = 0.0;
  for (int i = 0; i < 200; ++i) {
    Vec2 v{gauss(rng), gauss(rng)};
    p = update_motion_params(p, v, prev, 0.1);
    CHECK(p.maxObservedSpeed >= lastSpeed);
    CHECK(p.maxObservedAccel >= lastAccel);
    CHECK(p.avgSpeed >= 0.0);
    lastSpeed = p.maxObservedSpeed;
    lastAccel = p.maxObservedAccel;
    prev = v;
  }
}

TEST_CASE("stepped velocities always respect the envelope") {
  std::mt19937_64 rng = make_rng(3, "core-envelope");
  std::uniform_real_distribution<double> cmd(-4.0, 4.0);
  WorldState w;
  w.agents.push_back({.id = 0,
                      .position = {0.0, 0.0},
                      .velocity = {0.0, 0.0},
                      .radius = 0.4,
                      .prefSpeed = 1.0,
                      .maxSpeed = 1.3,
                      .maxAccel = 2.0});
  const double dt = 0.1;
  for (int i = 0; i < 500; ++i) {
    const Vec2 before = w.agents[0].velocity;
    StepResult r = step_world(w, dt, {{0, {cmd(rng), cmd(rng)}}});
    w = r.world;
    CHECK(norm(w.agents[0].velocity) <= 1.3 + 1e-9);
    CHECK(norm(w.agents[0].velocity - before) <= 2.0 * dt + 1e-9);
  }
}

TEST_CASE("clamp returns interior points untouched") {
  const Vec2 v{0.3, -0.2};
  const Vec2 out = clamp_to_reachable(v, {0.25, -0.25}, 1.0, 2.0, 0.1);
  CHECK(out == v);  // bitwise: the fast path must not perturb feasible inputs
}

TEST_CASE("clamp lands on the closest reachable point") {
  std::mt19937_64 rng = make_rng(17, "core-clamp");
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec2 current{u(rng) * 0.3, u(rng) * 0.3};
    const Vec2 desired{u(rng), u(rng)};
    const double maxSpeed = 1.2, maxAccel = 2.5, dt = 0.1;
    const Vec2 got = clamp_to_reachable(desired, current, maxSpeed, maxAccel, dt);
    CHECK(norm(got) <= maxSpeed + 1e-9);
    CHECK(norm(got - current) <= maxAccel * dt + 1e-9);
    // No sampled feasible point may beat the projection.
    std::uniform_real_distribution<double> ang(0.0, 2.0 * 3.14159265358979);
    std::uniform_real_distribution<double> rad(0.0, 1.0);
    const double bound = distance(got, desired);
    for (int s = 0; s < 300; ++s) {
      const double r = maxAccel * dt * std::sqrt(rad(rng));
      const Vec2 p = current + r * from_angle(ang(rng));
      if (norm(p) > maxSpeed) continue;
      CHECK(distance(p, desired) >= bound - 1e-9);
    }
  }
}

TEST_CASE("stepping is bit-reproducible") {
  WorldState w = two_agent_world();
  const std::map<AgentId, Vec2> cmds{{0, {0.4, 0.3}}, {7, {-0.2, 0.1}}};
  StepResult a = step_world(w, 0.1, cmds);
  StepResult b = step_world(w, 0.1, cmds);
  REQUIRE(a.world.agents.size() == b.world.agents.size());
  for (std::size_t i = 0; i < a.world.agents.size(); ++i) {
    CHECK(a.world.agents[i].position == b.world.agents[i].position);
    CHECK(a.world.agents[i].velocity == b.world.agents[i].velocity);
  }
}

TEST_CASE("agent and goal validation") {
  AgentState a{.id = 3, .position = {}, .velocity = {}, .radius = -0.1};
  CHECK_THROWS_AS(a.validate(), Error);
  a.radius = 0.4;
  a.prefSpeed = 2.0;
  a.maxSpeed = 1.0;
  CHECK_THROWS_AS(a.validate(), Error);
  a.prefSpeed = 0.8;
  CHECK_NOTHROW(a.validate());

  GoalSet gs;
  CHECK_THROWS_AS(gs.validate(), Error);
  gs.goals = {{1, {0.0, 0.0}}, {1, {1.0, 0.0}}};
  CHECK_THROWS_AS(gs.validate(), Error);
  gs.goals[1].id = 2;
  CHECK_NOTHROW(gs.validate());
  CHECK(gs.at(2).position.x == doctest::Approx(1.0));
  CHECK_THROWS_AS(gs.at(9), Error);
}
