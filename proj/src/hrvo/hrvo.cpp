#include "hrvo/hrvo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace intentsim::hrvo {

namespace {

constexpr double kNudge = 1e-9;       // pushes boundary candidates just outside
constexpr double kTieTol = 1e-12;     // distance ties resolved by angle
constexpr double kParallelTol = 1e-12;

double dist_to_ray(Vec2 u, Vec2 dir) {
  const double t = dot(u, dir);
  return t <= 0.0 ? norm(u) : std::abs(det(dir, u));
}

/// Clockwise angle from `ref` to `v` in [0, 2*pi).
double clockwise_angle(Vec2 ref, Vec2 v) {
  const double a = signed_angle(ref, v);
  return a <= 0.0 ? -a : 2.0 * std::numbers::pi - a;
}

struct CandidateSet {
  const AgentState& agent;
  double dt;
  std::vector<Vec2> points;

  void add(Vec2 v) {
    points.push_back(clamp_to_reachable(v, agent.velocity, agent.maxSpeed, agent.maxAccel, dt));
  }
  void add_unclamped_if_reachable(Vec2 v) {
    const Vec2 c = clamp_to_reachable(v, agent.velocity, agent.maxSpeed, agent.maxAccel, dt);
    if (distance(c, v) <= 1e-9) points.push_back(v);
  }
};

void add_ray_circle_hits(CandidateSet& set, Vec2 apex, Vec2 dir, Vec2 outward, Vec2 center,
                         double radius) {
  // |apex + t*dir - center|^2 = radius^2, unit dir.
  const Vec2 rel = apex - center;
  const double b = dot(dir, rel);
  const double c = norm_sq(rel) - radius * radius;
  const double disc = b * b - c;
  if (disc < 0.0) return;
  const double root = std::sqrt(disc);
  for (double t : {-b - root, -b + root})
    if (t >= 0.0) set.add_unclamped_if_reachable(apex + t * dir + kNudge * outward);
}

}  // namespace

std::optional<HrvoRegion> build_hrvo(const AgentState& self, const AgentState& other) {
  const Vec2 rel = other.position - self.position;
  const double dist = norm(rel);
  const double sumRadius = self.radius + other.radius;
  if (dist <= sumRadius) return std::nullopt;

  const double heading = angle_of(rel);
  const double halfAngle = std::asin(sumRadius / dist);
  HrvoRegion region;
  region.sourceAgent = self.id;
  region.obstacleAgent = other.id;
  region.leftLeg = from_angle(heading + halfAngle);
  region.rightLeg = from_angle(heading - halfAngle);

  // Apex: intersection of one reciprocal-apex leg (through the velocity
  // midpoint) with the opposite full-velocity leg (through other.velocity).
  const Vec2 w = self.velocity - other.velocity;
  const double sinDouble = std::sin(2.0 * halfAngle);
  if (det(rel, w) > 0.0) {
    // Passing on the left: reciprocal left leg, full right leg.
    const double s = 0.5 * det(w, region.leftLeg) / sinDouble;
    region.apex = other.velocity + s * region.rightLeg;
  } else {
    const double s = -0.5 * det(w, region.rightLeg) / sinDouble;
    region.apex = other.velocity + s * region.leftLeg;
  }
  return region;
}

bool contains(const HrvoRegion& region, Vec2 velocity) {
  const Vec2 u = velocity - region.apex;
  return det(region.rightLeg, u) > 0.0 && det(region.leftLeg, u) < 0.0;
}

double penetration(const HrvoRegion& region, Vec2 velocity) {
  if (!contains(region, velocity)) return 0.0;
  const Vec2 u = velocity - region.apex;
  return std::min(dist_to_ray(u, region.rightLeg), dist_to_ray(u, region.leftLeg));
}

Vec2 preferred_velocity(const AgentState& agent, Vec2 goal, double dt) {
  if (!(dt > 0.0)) throw Error(Error::Code::InvalidArgument, "dt must be > 0");
  const Vec2 offset = goal - agent.position;
  const double dist = norm(offset);
  if (dist == 0.0) return {};
  return std::min(agent.prefSpeed, dist / dt) * (offset / dist);
}

VelocityDecision select_velocity(const AgentState& agent, Vec2 goal,
                                 std::span<const HrvoRegion> regions, double dt) {
  const Vec2 pref = preferred_velocity(agent, goal, dt);
  const Vec2 prefReach =
      clamp_to_reachable(pref, agent.velocity, agent.maxSpeed, agent.maxAccel, dt);

  // Fast path: nothing in the way and the preferred velocity is attainable.
  const bool prefReachable = prefReach == pref;
  if (regions.empty() && prefReachable) return {pref, SelectStatus::Unconstrained};

  CandidateSet set{agent, dt, {}};
  set.points.reserve(16 + 12 * regions.size() + 2 * regions.size() * regions.size());
  set.points.push_back(prefReach);
  set.add(agent.velocity);

  struct Leg { Vec2 origin, dir, outward; };
  std::vector<Leg> legs;
  legs.reserve(2 * regions.size());
  for (const HrvoRegion& r : regions) {
    const Vec2 rightOut{r.rightLeg.y, -r.rightLeg.x};
    const Vec2 leftOut{-r.leftLeg.y, r.leftLeg.x};
    legs.push_back({r.apex, r.rightLeg, rightOut});
    legs.push_back({r.apex, r.leftLeg, leftOut});

    const Vec2 axis = normalized(r.leftLeg + r.rightLeg);
    set.add(r.apex - kNudge * axis);

    for (const Leg& leg : {Leg{r.apex, r.rightLeg, rightOut}, Leg{r.apex, r.leftLeg, leftOut}}) {
      const double t = std::max(0.0, dot(pref - leg.origin, leg.dir));
      set.add(leg.origin + t * leg.dir + kNudge * leg.outward);
    }
  }

  const double accelRadius = agent.maxAccel * dt;
  for (const Leg& leg : legs) {
    add_ray_circle_hits(set, leg.origin, leg.dir, leg.outward, agent.velocity, accelRadius);
    add_ray_circle_hits(set, leg.origin, leg.dir, leg.outward, Vec2{}, agent.maxSpeed);
  }
  for (std::size_t i = 0; i < legs.size(); ++i) {
    for (std::size_t j = i + 1; j < legs.size(); ++j) {
      const double denom = det(legs[i].dir, legs[j].dir);
      if (std::abs(denom) < kParallelTol) continue;
      const Vec2 gap = legs[j].origin - legs[i].origin;
      const double t = det(gap, legs[j].dir) / denom;
      const double s = det(gap, legs[i].dir) / denom;
      if (t < 0.0 || s < 0.0) continue;
      set.add(legs[i].origin + t * legs[i].dir + kNudge * (legs[i].outward + legs[j].outward));
    }
  }

  // Corners of the reachable set and a coarse deterministic fan; the fan only
  // matters when every geometric candidate is blocked.
  {
    const double d = norm(agent.velocity);
    if (d > kParallelTol) {
      const double a = (d * d + accelRadius * accelRadius - agent.maxSpeed * agent.maxSpeed) /
                       (2.0 * d);
      const double h2 = accelRadius * accelRadius - a * a;
      if (h2 >= 0.0) {
        const double h = std::sqrt(h2);
        const Vec2 toOrigin = normalized(-agent.velocity);
        const Vec2 mid = agent.velocity + a * toOrigin;
        const Vec2 perp{-toOrigin.y, toOrigin.x};
        set.add(mid + h * perp);
        set.add(mid - h * perp);
      }
    }
    for (int i = 0; i < 8; ++i) {
      const Vec2 dir = from_angle(i * std::numbers::pi / 4.0);
      for (double f : {0.35, 0.7, 1.0}) set.add(agent.velocity + (f * accelRadius) * dir);
    }
  }

  const Vec2 tieRef = norm_sq(pref) > 0.0 ? pref : Vec2{1.0, 0.0};
  bool haveFeasible = false;
  Vec2 best{};
  double bestDist = std::numeric_limits<double>::infinity();
  double bestAngle = std::numeric_limits<double>::infinity();
  Vec2 leastBad{};
  double leastPenetration = std::numeric_limits<double>::infinity();

  for (const Vec2& c : set.points) {
    double worst = 0.0;
    for (const HrvoRegion& r : regions) worst = std::max(worst, penetration(r, c));
    if (worst > 0.0) {
      if (worst < leastPenetration) {
        leastPenetration = worst;
        leastBad = c;
      }
      continue;
    }
    const double d = distance(c, pref);
    const double tol = kTieTol * (1.0 + d);
    if (d < bestDist - tol) {
      best = c;
      bestDist = d;
      bestAngle = clockwise_angle(tieRef, c);
      haveFeasible = true;
    } else if (d <= bestDist + tol) {
      const double ang = clockwise_angle(tieRef, c);
      if (ang < bestAngle) {
        best = c;
        bestDist = d;
        bestAngle = ang;
      }
    }
  }

  if (!haveFeasible) return {leastBad, SelectStatus::Constrained};
  if (best == pref) return {pref, SelectStatus::Unconstrained};
  return {best, SelectStatus::Feasible};
}

VelocityDecision plan_velocity(const WorldState& world, AgentId agent, Vec2 goal, double dt,
                               const PlannerConfig& config) {
  const AgentState* self = world.find(agent);
  if (!self) throw Error(Error::Code::InvalidArgument, "unknown agent " + std::to_string(agent));

  std::vector<const AgentState*> others;
  others.reserve(world.agents.size());
  for (const AgentState& a : world.agents)
    if (a.id != agent) others.push_back(&a);
  std::sort(others.begin(), others.end(), [&](const AgentState* a, const AgentState* b) {
    const double da = norm_sq(a->position - self->position);
    const double db = norm_sq(b->position - self->position);
    return da != db ? da < db : a->id < b->id;
  });
  if (config.maxNeighbors >= 0 && others.size() > static_cast<std::size_t>(config.maxNeighbors))
    others.resize(static_cast<std::size_t>(config.maxNeighbors));

  std::vector<HrvoRegion> regions;
  regions.reserve(others.size());
  Vec2 overlapPush{};
  bool overlapping = false;
  for (const AgentState* o : others) {
    if (auto region = build_hrvo(*self, *o)) {
      regions.push_back(*region);
    } else {
      overlapping = true;
      overlapPush += normalized(self->position - o->position);
    }
  }

  if (overlapping) {
    // Degenerate region: back out along the summed separation direction.
    Vec2 away = normalized(overlapPush);
    if (norm_sq(away) == 0.0) away = {1.0, 0.0};
    const Vec2 v = clamp_to_reachable(away * self->maxSpeed, self->velocity, self->maxSpeed,
                                      self->maxAccel, dt);
    return {v, SelectStatus::Constrained};
  }
  return select_velocity(*self, goal, regions, dt);
}

}  // namespace intentsim::hrvo
