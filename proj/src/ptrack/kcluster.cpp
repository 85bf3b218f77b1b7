#include "ptrack/kcluster.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "core/error.hpp"

namespace intentsim::ptrack {

namespace {

struct AxisShape {
  double sigma = 0.0;
  double extent = 0.0;    // trimmed max |projection - mean projection|
  double kurtosis = 0.0;  // excess
};

struct ClusterStats {
  double mass = 0.0;
  Vec2 meanPos;
  Vec2 meanVel;
  Sym2 covPos{};
  Sym2 covVel{};
  AxisShape major;
  AxisShape minor;
  Vec2 majorAxis{1.0, 0.0};
};

AxisShape axis_shape(std::span<const Particle> ps, const std::vector<int>& members,
                     const Vec2& mean, Vec2 axis, double mass) {
  AxisShape s;
  double m2 = 0.0, m4 = 0.0;
  std::vector<double> spread;
  spread.reserve(members.size());
  for (int i : members) {
    const double t = dot(ps[i].position - mean, axis);
    const double w = ps[i].weight / mass;
    m2 += w * t * t;
    m4 += w * t * t * t * t;
    spread.push_back(std::abs(t));
  }
  // Extent is an order statistic, not the raw max: the 1 + n/100 most extreme
  // members are discarded so a couple of stragglers cannot flag the whole
  // cluster, while systematic tail mass still does.
  const auto drop = std::min<std::ptrdiff_t>(
      1 + static_cast<std::ptrdiff_t>(spread.size()) / 100,
      static_cast<std::ptrdiff_t>(spread.size()) - 1);
  std::nth_element(spread.begin(), spread.begin() + drop, spread.end(),
                   std::greater<double>());
  s.extent = spread[drop];
  s.sigma = std::sqrt(m2);
  s.kurtosis = m2 > 1e-12 ? m4 / (m2 * m2) - 3.0 : 0.0;
  return s;
}

ClusterStats cluster_stats(std::span<const Particle> ps, const std::vector<int>& members) {
  ClusterStats st;
  for (int i : members) st.mass += ps[i].weight;
  const double mass = st.mass > 0.0 ? st.mass : 1.0;
  for (int i : members) {
    const double w = ps[i].weight / mass;
    st.meanPos += w * ps[i].position;
    st.meanVel += w * ps[i].velocity;
  }
  for (int i : members) {
    const double w = ps[i].weight / mass;
    const Vec2 dp = ps[i].position - st.meanPos;
    const Vec2 dv = ps[i].velocity - st.meanVel;
    st.covPos.xx += w * dp.x * dp.x;
    st.covPos.xy += w * dp.x * dp.y;
    st.covPos.yy += w * dp.y * dp.y;
    st.covVel.xx += w * dv.x * dv.x;
    st.covVel.xy += w * dv.x * dv.y;
    st.covVel.yy += w * dv.y * dv.y;
  }
  const Sym2::Eigen e = st.covPos.eigen();
  st.majorAxis = e.axis;
  st.major = axis_shape(ps, members, st.meanPos, e.axis, mass);
  st.minor = axis_shape(ps, members, st.meanPos, {-e.axis.y, e.axis.x}, mass);
  return st;
}

// Positive sample kurtosis of a true Gaussian is right-skewed at small n, so
// only the positive bound carries a sampling allowance. The negative bound is
// the population one: Gaussian samples essentially never reach it, while rings
// and merged modes sit well past it.
double kurtosis_bound_high(std::size_t n, const KClusterConfig& cfg) {
  return cfg.kurtosisBound +
         cfg.kurtosisSlack * std::sqrt(24.0 / static_cast<double>(n));
}

bool axis_gaussian(const AxisShape& s, std::size_t n, const KClusterConfig& cfg) {
  if (s.sigma < 1e-6) return true;
  return s.extent <= cfg.extentK * s.sigma &&
         s.kurtosis <= kurtosis_bound_high(n, cfg) &&
         s.kurtosis >= -cfg.kurtosisBound;
}

bool gaussian_shaped(const ClusterStats& st, std::size_t n, const KClusterConfig& cfg) {
  if (n <= 3) return true;  // too few samples to judge or to split
  return axis_gaussian(st.major, n, cfg) && axis_gaussian(st.minor, n, cfg);
}

// How badly an axis violates the test; the split happens along the worse one.
double violation(const AxisShape& s, std::size_t n, const KClusterConfig& cfg) {
  if (s.sigma < 1e-6) return 0.0;
  const double kurt = s.kurtosis > 0.0 ? s.kurtosis / kurtosis_bound_high(n, cfg)
                                       : -s.kurtosis / cfg.kurtosisBound;
  return std::max(s.extent / (cfg.extentK * s.sigma), kurt);
}

// Splits a failing cluster at its weighted mean along the worse axis and recurses
// on both halves. Leaves that still fail but cannot split further (depth cap, or
// a half with fewer than 2 members) are emitted as-is.
void decompose(std::span<const Particle> ps, std::vector<int> members, int depth,
               const KClusterConfig& cfg, std::vector<std::vector<int>>& out) {
  const ClusterStats st = cluster_stats(ps, members);
  if (gaussian_shaped(st, members.size(), cfg) || depth <= 0 || members.size() < 4) {
    out.push_back(std::move(members));
    return;
  }

  const Vec2 axis = violation(st.major, members.size(), cfg) >=
                            violation(st.minor, members.size(), cfg)
                        ? st.majorAxis
                        : Vec2{-st.majorAxis.y, st.majorAxis.x};
  std::vector<int> lo, hi;
  for (int i : members)
    (dot(ps[i].position - st.meanPos, axis) < 0.0 ? lo : hi).push_back(i);
  if (lo.size() < 2 || hi.size() < 2) {
    out.push_back(std::move(members));
    return;
  }
  decompose(ps, std::move(lo), depth - 1, cfg, out);
  decompose(ps, std::move(hi), depth - 1, cfg, out);
}

}  // namespace

std::vector<Cluster> kclusterize(std::span<const Particle> particles,
                                 const KClusterConfig& config) {
  if (particles.empty())
    throw Error(Error::Code::InvalidArgument, "kclusterize: empty particle set");

  double total = 0.0;
  for (const Particle& p : particles) {
    if (!(p.weight >= 0.0))
      throw Error(Error::Code::InvalidArgument, "kclusterize: negative particle weight");
    total += p.weight;
  }
  // Weightless input is treated as uniform.
  std::vector<Particle> owned;
  if (total <= 0.0) {
    owned.assign(particles.begin(), particles.end());
    for (Particle& p : owned) p.weight = 1.0 / static_cast<double>(owned.size());
    particles = owned;
    total = 1.0;
  }

  // Linear gating pass onto running weighted centroids.
  struct Seed {
    Vec2 centroid;
    double mass = 0.0;
    std::vector<int> members;
  };
  std::vector<Seed> seeds;
  for (int i = 0; i < static_cast<int>(particles.size()); ++i) {
    const Vec2 p = particles[i].position;
    Seed* best = nullptr;
    double bestDist = config.gate;
    for (Seed& s : seeds) {
      const double d = distance(p, s.centroid);
      if (d <= bestDist) {
        bestDist = d;
        best = &s;
      }
    }
    const double w = std::max(particles[i].weight, 1e-300);
    if (best == nullptr) {
      seeds.push_back({p, w, {i}});
    } else {
      best->centroid = (best->mass * best->centroid + w * p) / (best->mass + w);
      best->mass += w;
      best->members.push_back(i);
    }
  }

  std::vector<Cluster> out;
  for (Seed& s : seeds) {
    std::vector<std::vector<int>> parts;
    decompose(particles, std::move(s.members), config.maxSplitDepth, config, parts);
    for (auto& part : parts) {
      const ClusterStats st = cluster_stats(particles, part);
      Cluster c;
      c.weight = st.mass / total;
      c.meanPosition = st.meanPos;
      c.meanVelocity = st.meanVel;
      c.covPosition = st.covPos.inflated(config.posVarFloor);
      c.covVelocity = st.covVel.inflated(config.velVarFloor);
      c.members = std::move(part);
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace intentsim::ptrack
