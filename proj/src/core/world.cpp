#include "core/world.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace intentsim {

namespace {

constexpr double kInsideTol = 1e-12;

std::string agent_label(AgentId id) { return "agent " + std::to_string(id); }

}  // namespace

void AgentState::validate() const {
  if (!(radius > 0.0))
    throw Error(Error::Code::Validation, agent_label(id) + ": radius must be > 0");
  if (!(prefSpeed >= 0.0))
    throw Error(Error::Code::Validation, agent_label(id) + ": prefSpeed must be >= 0");
  if (!(maxSpeed > 0.0))
    throw Error(Error::Code::Validation, agent_label(id) + ": maxSpeed must be > 0");
  if (prefSpeed > maxSpeed)
    throw Error(Error::Code::Validation, agent_label(id) + ": prefSpeed must not exceed maxSpeed");
  if (!(maxAccel > 0.0))
    throw Error(Error::Code::Validation, agent_label(id) + ": maxAccel must be > 0");
}

const Goal* GoalSet::find(GoalId id) const {
  for (const Goal& g : goals)
    if (g.id == id) return &g;
  return nullptr;
}

const Goal& GoalSet::at(GoalId id) const {
  if (const Goal* g = find(id)) return *g;
  throw Error(Error::Code::InvalidArgument, "unknown goal " + std::to_string(id));
}

void GoalSet::validate() const {
  if (goals.empty()) throw Error(Error::Code::Validation, "goal set must not be empty");
  std::set<GoalId> seen;
  for (const Goal& g : goals)
    if (!seen.insert(g.id).second)
      throw Error(Error::Code::Validation, "duplicate goal id " + std::to_string(g.id));
}

const AgentState* WorldState::find(AgentId id) const {
  for (const AgentState& a : agents)
    if (a.id == id) return &a;
  return nullptr;
}

AgentState* WorldState::find(AgentId id) {
  for (AgentState& a : agents)
    if (a.id == id) return &a;
  return nullptr;
}

Vec2 clamp_to_reachable(Vec2 desired, Vec2 current, double maxSpeed, double maxAccel, double dt) {
  const double ra = maxAccel * dt;        // acceleration disc around `current`
  const double rb = maxSpeed;             // speed disc around the origin
  const bool inAccel = distance(desired, current) <= ra + kInsideTol;
  const bool inSpeed = norm(desired) <= rb + kInsideTol;
  if (inAccel && inSpeed) return desired;

  const Vec2 projAccel = current + ra * normalized(desired - current);
  if (norm(projAccel) <= rb + kInsideTol) {
    if (!inAccel) return projAccel;
  }
  const Vec2 projSpeed = rb * normalized(desired);
  if (distance(projSpeed, current) <= ra + kInsideTol) {
    if (!inSpeed) return projSpeed;
  }

  // Optimum sits on both circle boundaries; pick the nearer intersection point.
  const double d = norm(current);
  if (d <= kInsideTol) {
    // Concentric discs: the intersection is the smaller disc.
    return std::min(ra, rb) * normalized(desired);
  }
  const double a = (d * d + ra * ra - rb * rb) / (2.0 * d);
  const double h2 = ra * ra - a * a;
  if (h2 < 0.0) {
    // No boundary crossing: one disc contains the other, or they are disjoint
    // (possible only if `current` itself breaches the speed limit).
    if (d + ra <= rb) return projAccel;
    if (d + rb <= ra) return projSpeed;
    return rb * normalized(current);
  }
  const double h = std::sqrt(h2);
  const Vec2 toOrigin = normalized(-current);
  const Vec2 mid = current + a * toOrigin;
  const Vec2 perp{-toOrigin.y, toOrigin.x};
  const Vec2 p1 = mid + h * perp;
  const Vec2 p2 = mid - h * perp;
  return distance(p1, desired) <= distance(p2, desired) ? p1 : p2;
}

StepResult step_world(const WorldState& world, double dt, const std::map<AgentId, Vec2>& commands) {
  if (!(dt > 0.0)) throw Error(Error::Code::InvalidArgument, "dt must be > 0");
  for (const auto& [id, v] : commands) {
    (void)v;
    if (!world.find(id))
      throw Error(Error::Code::InvalidArgument, "command for unknown " + agent_label(id));
  }

  StepResult out;
  out.world = world;
  out.world.time = world.time + dt;
  for (AgentState& agent : out.world.agents) {
    Vec2 commanded = agent.velocity;
    if (auto it = commands.find(agent.id); it != commands.end()) commanded = it->second;
    const Vec2 applied =
        clamp_to_reachable(commanded, agent.velocity, agent.maxSpeed, agent.maxAccel, dt);
    if (distance(applied, commanded) > kInsideTol * (1.0 + norm(commanded)))
      out.clamps.push_back({agent.id, commanded, applied});
    agent.velocity = applied;
    agent.position += applied * dt;
  }
  return out;
}

MotionParams update_motion_params(const MotionParams& params, Vec2 observedVelocity,
                                  Vec2 previousVelocity, double dt, double decay) {
  if (!(dt > 0.0)) throw Error(Error::Code::InvalidArgument, "dt must be > 0");
  if (!(decay >= 0.0 && decay <= 1.0))
    throw Error(Error::Code::InvalidArgument, "decay must lie in [0, 1]");
  const double speed = norm(observedVelocity);
  const double accel = norm(observedVelocity - previousVelocity) / dt;
  MotionParams next;
  next.avgSpeed = decay * params.avgSpeed + (1.0 - decay) * speed;
  next.maxObservedSpeed = std::max(params.maxObservedSpeed, speed);
  next.maxObservedAccel = std::max(params.maxObservedAccel, accel);
  return next;
}

}  // namespace intentsim
