#include "harness/sensors.hpp"

#include <algorithm>

#include "core/error.hpp"

namespace intentsim::harness {

bool point_in_polygon(std::span<const Vec2> polygon, Vec2 p) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = polygon[i];
    const Vec2 b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y) &&
        p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
      inside = !inside;
  }
  return inside;
}

namespace {

Vec2 uniform_in_polygon(std::span<const Vec2> polygon, std::mt19937_64& rng) {
  Vec2 lo = polygon[0];
  Vec2 hi = polygon[0];
  for (const Vec2& v : polygon) {
    lo.x = std::min(lo.x, v.x);
    lo.y = std::min(lo.y, v.y);
    hi.x = std::max(hi.x, v.x);
    hi.y = std::max(hi.y, v.y);
  }
  std::uniform_real_distribution<double> ux(lo.x, hi.x);
  std::uniform_real_distribution<double> uy(lo.y, hi.y);
  // Rejection from the bounding box; any simple polygon with sane area
  // terminates quickly. The cap guards degenerate slivers.
  for (int tries = 0; tries < 10000; ++tries) {
    const Vec2 p{ux(rng), uy(rng)};
    if (point_in_polygon(polygon, p)) return p;
  }
  return polygon[0];
}

}  // namespace

std::vector<ptrack::Measurement> simulate_sensor(const SensorSpec& sensor,
                                                 const WorldState& world,
                                                 std::span<const AgentSpec> agents, double now,
                                                 std::mt19937_64& rng) {
  std::vector<ptrack::Measurement> out;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (const AgentState& a : world.agents) {
    if (!point_in_polygon(sensor.fov, a.position)) continue;
    if (u01(rng) >= sensor.detectionRate) continue;
    ptrack::Measurement m;
    m.sensor = sensor.id;
    m.time = now;
    m.position = a.position + Vec2{gauss(rng) * sensor.noiseSigma, gauss(rng) * sensor.noiseSigma};
    for (const AgentSpec& spec : agents) {
      if (spec.state.id != a.id) continue;
      m.appearance = spec.appearance;
      for (double& v : m.appearance) v += gauss(rng) * sensor.appearanceNoise;
      break;
    }
    out.push_back(std::move(m));
  }

  if (sensor.clutterRate > 0.0) {
    std::poisson_distribution<int> clutter(sensor.clutterRate);
    const int count = clutter(rng);
    for (int k = 0; k < count; ++k) {
      ptrack::Measurement m;
      m.sensor = sensor.id;
      m.time = now;
      m.position = uniform_in_polygon(sensor.fov, rng);
      out.push_back(std::move(m));
    }
  }
  return out;
}

}  // namespace intentsim::harness
