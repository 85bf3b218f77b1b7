#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "core/error.hpp"
#include "core/vec2.hpp"

namespace intentsim {

using AgentId = std::uint32_t;
using GoalId = std::uint32_t;

struct AgentState {
  AgentId id{0};
  Vec2 position;
  Vec2 velocity;
  double radius{0.4};
  double prefSpeed{1.0};
  double maxSpeed{1.4};
  double maxAccel{2.0};

  /// Throws Error::Validation when radius/speeds/accel are out of range.
  void validate() const;
};

struct Goal {
  GoalId id{0};
  Vec2 position;
};

struct GoalSet {
  std::vector<Goal> goals;

  bool empty() const { return goals.empty(); }
  std::size_t size() const { return goals.size(); }
  const Goal* find(GoalId id) const;
  const Goal& at(GoalId id) const;  // throws Error::InvalidArgument when absent

  /// Throws unless non-empty with unique ids.
  void validate() const;
};

/// Online estimate of an agent's driving envelope, fitted from observed motion.
struct MotionParams {
  double avgSpeed{0.0};
  double maxObservedSpeed{0.0};
  double maxObservedAccel{0.0};
};

struct WorldState {
  double time{0.0};
  std::vector<AgentState> agents;
  std::map<AgentId, GoalId> goalAssignment;

  const AgentState* find(AgentId id) const;
  AgentState* find(AgentId id);
};

struct ClampDiagnostic {
  AgentId agent{0};
  Vec2 requested;
  Vec2 applied;
};

struct StepResult {
  WorldState world;
  std::vector<ClampDiagnostic> clamps;
};

/// Closest point to `desired` within the intersection of the acceleration
/// disc (radius maxAccel*dt around `current`) and the speed disc (radius
/// maxSpeed around the origin). Returns `desired` unchanged when already
/// inside both.
Vec2 clamp_to_reachable(Vec2 desired, Vec2 current, double maxSpeed, double maxAccel, double dt);

/// Advances every agent one Euler step with its commanded velocity. Agents
/// without a command keep their current velocity. Commands breaching the
/// speed/acceleration envelope are clamped and reported. A command naming an
/// unknown agent throws Error::InvalidArgument and nothing is advanced.
StepResult step_world(const WorldState& world, double dt, const std::map<AgentId, Vec2>& commands);

/// Exponential-moving-average speed update plus running maxima of speed and
/// per-step acceleration magnitude.
MotionParams update_motion_params(const MotionParams& params, Vec2 observedVelocity,
                                  Vec2 previousVelocity, double dt, double decay = 0.9);

}  // namespace intentsim
