#pragma once

#include <span>
#include <vector>

#include "ptrack/gmm.hpp"

namespace intentsim::ptrack {

/// One extracted cluster. Weights across the returned set sum to 1;
/// covariances are kept SPD by a small diagonal floor.
struct Cluster {
  double weight = 0.0;
  Vec2 meanPosition;
  Vec2 meanVelocity;
  Sym2 covPosition = Sym2::isotropic(1e-4);
  Sym2 covVelocity = Sym2::isotropic(1e-4);
  std::vector<int> members;  // indices into the input particle span
};

struct KClusterConfig {
  double gate = 0.5;          // position distance admitting a particle to a cluster
  double extentK = 3.5;       // extent allowed per axis, in axis standard deviations
  double kurtosisBound = 1.2; // population bound on |excess kurtosis| per axis
  double kurtosisSlack = 3.0; // sampling allowance on the positive side, in
                              // asymptotic standard deviations sqrt(24/n)
  int maxSplitDepth = 6;
  double posVarFloor = 1e-4;
  double velVarFloor = 1e-4;
};

/// Groups particles into Gaussian-shaped clusters without a preset count.
/// A linear pass gates particles onto running centroids; clusters whose
/// per-axis shape fails the Gaussianity test are split at the weighted mean
/// along the worst principal axis, recursively, until every piece passes or
/// can no longer be split (depth cap, fewer than 2 members per side).
///
/// The test is applied as a statistical check so that true Gaussian samples
/// are not flagged by sampling noise: the extent statistic drops the
/// 1 + n/100 most extreme members per axis, and the positive kurtosis bound
/// is widened by kurtosisSlack sampling deviations. Negative kurtosis, the
/// signature of rings and merged modes, keeps the hard population bound.
std::vector<Cluster> kclusterize(std::span<const Particle> particles,
                                 const KClusterConfig& config = {});

}  // namespace intentsim::ptrack
