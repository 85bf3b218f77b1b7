#pragma once

#include <optional>
#include <span>
#include <vector>

#include "core/world.hpp"

namespace intentsim::hrvo {

/// Velocity-space cone of forbidden velocities induced by one neighbour. The
/// legs are unit vectors tangent to the Minkowski disc; apex placement makes
/// the cone hybrid-reciprocal (one reciprocal leg, one full-responsibility
/// leg, chosen by which side of the centerline the relative velocity lies).
struct HrvoRegion {
  Vec2 apex;
  Vec2 leftLeg;    // unit, counterclockwise side
  Vec2 rightLeg;   // unit, clockwise side
  AgentId sourceAgent{0};
  AgentId obstacleAgent{0};
};

/// Empty when the Minkowski discs already overlap (degenerate region); the
/// caller is expected to fall back to a pure separation move.
std::optional<HrvoRegion> build_hrvo(const AgentState& self, const AgentState& other);

/// True when the velocity lies strictly inside the cone; boundary points
/// count as outside (they graze the disc, never enter it).
bool contains(const HrvoRegion& region, Vec2 velocity);

/// Distance from an interior velocity to the nearest cone boundary; 0 outside.
double penetration(const HrvoRegion& region, Vec2 velocity);

/// Goal-directed velocity at prefSpeed, shortened so one step of length dt
/// lands exactly on the goal when it is closer than prefSpeed*dt.
Vec2 preferred_velocity(const AgentState& agent, Vec2 goal, double dt);

enum class SelectStatus {
  Unconstrained,  // returned velocity equals the preferred velocity
  Feasible,       // deflected, but outside every region
  Constrained,    // every candidate infeasible; penetration was minimized
};

struct VelocityDecision {
  Vec2 velocity;
  SelectStatus status{SelectStatus::Unconstrained};
};

/// Picks the feasible reachable velocity closest to the preferred velocity
/// (ties broken by smaller clockwise angle from it). When every candidate is
/// blocked, returns the candidate with the smallest maximum penetration.
VelocityDecision select_velocity(const AgentState& agent, Vec2 goal,
                                 std::span<const HrvoRegion> regions, double dt);

struct PlannerConfig {
  // Regions are built only for the nearest neighbours; velocity-obstacle
  // solvers scale quadratically in region count, and far agents seldom bind.
  int maxNeighbors = 4;
};

/// Builds regions against the nearest neighbours of `agent` and selects its
/// velocity toward `goal`. Overlapping neighbours yield no region; instead
/// the agent backs straight away from them (separation fallback).
VelocityDecision plan_velocity(const WorldState& world, AgentId agent, Vec2 goal, double dt,
                               const PlannerConfig& config = {});

}  // namespace intentsim::hrvo
