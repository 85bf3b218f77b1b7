#pragma once

#include <random>
#include <span>
#include <vector>

#include "harness/scenario.hpp"
#include "ptrack/tracker.hpp"

namespace intentsim::harness {

/// Even-odd test against a simple polygon. Points exactly on an edge are
/// resolved by the crossing rule, not specially.
bool point_in_polygon(std::span<const Vec2> polygon, Vec2 p);

/// One sensor frame: every agent inside the polygon is detected with
/// probability detectionRate at its true position plus isotropic Gaussian
/// noise, carrying its appearance plus elementwise Gaussian noise. Clutter
/// detections are Poisson in count, uniform over the polygon, and have an
/// empty appearance. Draws consume `rng` in agent order, then clutter.
std::vector<ptrack::Measurement> simulate_sensor(const SensorSpec& sensor,
                                                 const WorldState& world,
                                                 std::span<const AgentSpec> agents, double now,
                                                 std::mt19937_64& rng);

}  // namespace intentsim::harness
