#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "core/world.hpp"
#include "hrvo/hrvo.hpp"

namespace intentsim::intent {

/// Discrete posterior over candidate goals for one agent. Probabilities sum
/// to 1 and never fall below the configured floor.
struct GoalBelief {
  AgentId agent{0};
  std::vector<std::pair<GoalId, double>> posterior;  // goal-set order

  double prob(GoalId goal) const;
  GoalId argmax() const;  // ties resolve to the earliest goal
};

struct CounterfactualResult {
  AgentId agent{0};
  GoalId goal{0};
  Vec2 simulatedVelocity;
};

/// Bivariate normal over velocities. Construction validates the covariance.
struct LikelihoodModel {
  Vec2 mean;
  Sym2 covariance;
  LikelihoodModel(Vec2 mean_, Sym2 covariance_);
};

double likelihood(Vec2 observedVelocity, const LikelihoodModel& model);

struct BeliefUpdate {
  GoalBelief belief;
  bool degenerate{false};  // all likelihoods vanished; prior carried through
};

/// Recursive Bayesian update: posterior ~ likelihood * prior, renormalized,
/// then floored so no goal is ever ruled out irrecoverably. Floored entries
/// hold exactly floorProb and the rest exactly share the remaining mass.
BeliefUpdate update_belief(const GoalBelief& prior, const std::map<GoalId, double>& likelihoods,
                           double floorProb = 1e-3);

/// Position/velocity of one tracked agent as the planner sees it.
struct ObservedAgent {
  AgentId id{0};
  Vec2 position;
  Vec2 velocity;
  double radius{0.4};
};

/// Envelope estimate fitted online from the observation stream.
struct ParamEstimate {
  MotionParams params;
  Vec2 lastVelocity;
  double lastSeen{0.0};
};

struct InferenceConfig {
  double sigmaMin = 0.15;          // m/s, velocity-likelihood floor
  double sigmaSpeedFactor = 0.25;  // scales sigma with the agent's average speed
  double floorProb = 1e-3;
  double graceSec = 2.0;  // beliefs of unseen agents persist this long
  double emaDecay = 0.9;
  // Floors applied to fitted envelopes before counterfactual rollouts; a
  // freshly seen (or stationary) agent must still be able to move in them.
  double minPrefSpeed = 0.3;
  double minMaxSpeed = 0.5;
  double minMaxAccel = 1.0;
  double defaultRadius = 0.4;
  hrvo::PlannerConfig planner{};
};

/// Everything one inference iteration produces; also the sole carrier of
/// state into the next iteration, so iterations stay pure functions.
struct InferenceSnapshot {
  double time{0.0};
  std::vector<ObservedAgent> observations;
  std::vector<GoalBelief> beliefs;
  std::vector<std::tuple<AgentId, GoalId, double>> likelihoods;
  std::map<AgentId, ParamEstimate> params;
  int counterfactualCount{0};
  std::vector<std::string> diagnostics;

  const GoalBelief* find_belief(AgentId agent) const;
};

/// One hypothetical planning step: the target agent plans toward the
/// hypothesized goal inside a copy of `world` (everyone else keeps the goal
/// already assigned there) and its selected velocity is returned.
CounterfactualResult counterfactual_step(const WorldState& world, const GoalSet& goals,
                                         AgentId agent, GoalId hypothesizedGoal, double dt,
                                         const hrvo::PlannerConfig& planner = {});

/// Full inference iteration: fits motion parameters, rolls one counterfactual
/// per (agent, goal) pair from the previous snapshot's observations, scores
/// the observed velocities under the velocity likelihood, and updates every
/// belief. Agents missing from `observations` keep their belief for the
/// grace period and are dropped afterwards.
InferenceSnapshot infer_all(const InferenceSnapshot& prev,
                            const std::vector<ObservedAgent>& observations, const GoalSet& goals,
                            double dt, const InferenceConfig& config = {});

struct Rect {
  Vec2 min;
  Vec2 max;
};

/// Cell-centered nx-by-ny grid of candidate goals covering `bounds`; ids are
/// row-major from 0.
GoalSet sample_goal_grid(const Rect& bounds, int nx, int ny);

}  // namespace intentsim::intent
