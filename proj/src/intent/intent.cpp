#include "intent/intent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace intentsim::intent {

namespace {

GoalBelief uniform_belief(AgentId agent, const GoalSet& goals) {
  GoalBelief b;
  b.agent = agent;
  const double p = 1.0 / static_cast<double>(goals.size());
  b.posterior.reserve(goals.size());
  for (const Goal& g : goals.goals) b.posterior.emplace_back(g.id, p);
  return b;
}

bool covers_goal_set(const GoalBelief& belief, const GoalSet& goals) {
  if (belief.posterior.size() != goals.size()) return false;
  for (std::size_t i = 0; i < goals.size(); ++i)
    if (belief.posterior[i].first != goals.goals[i].id) return false;
  return true;
}

AgentState observation_to_agent(const ObservedAgent& obs, const ParamEstimate& estimate,
                                const InferenceConfig& cfg) {
  AgentState a;
  a.id = obs.id;
  a.position = obs.position;
  a.velocity = obs.velocity;
  a.radius = obs.radius > 0.0 ? obs.radius : cfg.defaultRadius;
  a.prefSpeed = std::max(cfg.minPrefSpeed, estimate.params.avgSpeed);
  a.maxSpeed = std::max({cfg.minMaxSpeed, estimate.params.maxObservedSpeed, a.prefSpeed});
  a.maxAccel = std::max(cfg.minMaxAccel, estimate.params.maxObservedAccel);
  return a;
}

}  // namespace

double GoalBelief::prob(GoalId goal) const {
  for (const auto& [id, p] : posterior)
    if (id == goal) return p;
  throw Error(Error::Code::InvalidArgument, "belief has no goal " + std::to_string(goal));
}

GoalId GoalBelief::argmax() const {
  if (posterior.empty()) throw Error(Error::Code::InvalidArgument, "empty belief");
  std::size_t best = 0;
  for (std::size_t i = 1; i < posterior.size(); ++i)
    if (posterior[i].second > posterior[best].second) best = i;
  return posterior[best].first;
}

LikelihoodModel::LikelihoodModel(Vec2 mean_, Sym2 covariance_)
    : mean(mean_), covariance(covariance_) {
  if (!covariance.spd())
    throw Error(Error::Code::Validation, "likelihood covariance must be positive definite");
}

double likelihood(Vec2 observedVelocity, const LikelihoodModel& model) {
  const Sym2 inv = model.covariance.inverse();
  const Vec2 d = observedVelocity - model.mean;
  const double expo = -0.5 * inv.quad(d);
  return std::exp(expo) / (2.0 * std::numbers::pi * std::sqrt(model.covariance.determinant()));
}

BeliefUpdate update_belief(const GoalBelief& prior, const std::map<GoalId, double>& likelihoods,
                           double floorProb) {
  if (prior.posterior.empty()) throw Error(Error::Code::InvalidArgument, "empty belief");
  const std::size_t n = prior.posterior.size();
  if (!(floorProb >= 0.0) || floorProb * static_cast<double>(n) >= 1.0)
    throw Error(Error::Code::InvalidArgument, "floorProb must satisfy 0 <= floor < 1/goals");

  BeliefUpdate out;
  out.belief.agent = prior.agent;
  out.belief.posterior = prior.posterior;

  double total = 0.0;
  std::vector<double> weighted(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = likelihoods.find(prior.posterior[i].first);
    if (it == likelihoods.end())
      throw Error(Error::Code::InvalidArgument,
                  "missing likelihood for goal " + std::to_string(prior.posterior[i].first));
    if (!(it->second >= 0.0))
      throw Error(Error::Code::InvalidArgument, "likelihoods must be non-negative");
    weighted[i] = it->second * prior.posterior[i].second;
    total += weighted[i];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    out.degenerate = true;  // no evidence; the prior stands
    return out;
  }

  for (std::size_t i = 0; i < n; ++i) out.belief.posterior[i].second = weighted[i] / total;

  // Exact flooring: floored entries hold floorProb itself and the remaining
  // entries are rescaled to the leftover mass, repeated until stable.
  std::vector<bool> floored(n, false);
  for (int pass = 0; pass < static_cast<int>(n) + 1; ++pass) {
    std::size_t clampCount = 0;
    double freeSum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (floored[i] || out.belief.posterior[i].second <= floorProb) {
        floored[i] = true;
        ++clampCount;
      } else {
        freeSum += out.belief.posterior[i].second;
      }
    }
    if (clampCount == 0) break;
    const double freeMass = 1.0 - floorProb * static_cast<double>(clampCount);
    if (clampCount == n || freeSum <= 0.0) {
      for (auto& [id, p] : out.belief.posterior) p = 1.0 / static_cast<double>(n);
      return out;
    }
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (floored[i]) {
        out.belief.posterior[i].second = floorProb;
        continue;
      }
      const double scaled = out.belief.posterior[i].second * freeMass / freeSum;
      if (scaled <= floorProb) changed = true;
      out.belief.posterior[i].second = scaled;
    }
    if (!changed) break;
  }
  return out;
}

const GoalBelief* InferenceSnapshot::find_belief(AgentId agent) const {
  for (const GoalBelief& b : beliefs)
    if (b.agent == agent) return &b;
  return nullptr;
}

CounterfactualResult counterfactual_step(const WorldState& world, const GoalSet& goals,
                                         AgentId agent, GoalId hypothesizedGoal, double dt,
                                         const hrvo::PlannerConfig& planner) {
  const Goal& goal = goals.at(hypothesizedGoal);
  if (!world.find(agent))
    throw Error(Error::Code::InvalidArgument, "unknown agent " + std::to_string(agent));
  // Only the target's selection matters within a single step; other agents'
  // hypothetical choices cannot alter its regions.
  const hrvo::VelocityDecision d = hrvo::plan_velocity(world, agent, goal.position, dt, planner);
  return {agent, hypothesizedGoal, d.velocity};
}

InferenceSnapshot infer_all(const InferenceSnapshot& prev,
                            const std::vector<ObservedAgent>& observations, const GoalSet& goals,
                            double dt, const InferenceConfig& config) {
  goals.validate();
  if (!(dt > 0.0)) throw Error(Error::Code::InvalidArgument, "dt must be > 0");

  InferenceSnapshot next;
  next.time = prev.time + dt;

  // Envelope estimates for everything currently seen, then carry unexpired
  // estimates of agents that vanished (occlusion grace).
  for (const ObservedAgent& o : observations) {
    ParamEstimate pe;
    if (auto it = prev.params.find(o.id); it != prev.params.end()) {
      pe = it->second;
      pe.params = update_motion_params(pe.params, o.velocity, pe.lastVelocity, dt, config.emaDecay);
    } else {
      pe.params.avgSpeed = norm(o.velocity);
      pe.params.maxObservedSpeed = norm(o.velocity);
    }
    pe.lastVelocity = o.velocity;
    pe.lastSeen = next.time;
    next.params[o.id] = pe;
  }
  for (const auto& [id, pe] : prev.params) {
    if (next.params.contains(id)) continue;
    if (next.time - pe.lastSeen <= config.graceSec) next.params[id] = pe;
  }

  // Counterfactual base: the previous iteration's observations, i.e. the
  // world one planner period ago. Agents first seen now enter at their
  // current state.
  const std::vector<ObservedAgent>& base =
      prev.observations.empty() ? observations : prev.observations;
  WorldState sim;
  sim.time = prev.time;
  std::set<AgentId> inSim;
  auto append_agent = [&](const ObservedAgent& o) {
    if (!inSim.insert(o.id).second) return;
    const auto it = next.params.find(o.id);
    const ParamEstimate pe = it != next.params.end() ? it->second : ParamEstimate{};
    sim.agents.push_back(observation_to_agent(o, pe, config));
  };
  for (const ObservedAgent& o : base) append_agent(o);
  for (const ObservedAgent& o : observations) append_agent(o);
  for (const AgentState& a : sim.agents) {
    GoalId g = goals.goals.front().id;
    if (const GoalBelief* b = prev.find_belief(a.id); b && covers_goal_set(*b, goals))
      g = b->argmax();
    sim.goalAssignment[a.id] = g;
  }

  std::set<AgentId> observedIds;
  for (const ObservedAgent& o : observations) {
    observedIds.insert(o.id);

    GoalBelief prior;
    const GoalBelief* carried = prev.find_belief(o.id);
    if (carried && covers_goal_set(*carried, goals)) {
      prior = *carried;
    } else {
      if (carried)
        next.diagnostics.push_back("agent " + std::to_string(o.id) +
                                   ": goal set changed, belief reset to uniform");
      prior = uniform_belief(o.id, goals);
    }

    const double sigma = std::max(config.sigmaMin,
                                  config.sigmaSpeedFactor * next.params[o.id].params.avgSpeed);
    const Sym2 cov = Sym2::isotropic(sigma * sigma);
    std::map<GoalId, double> byGoal;
    for (const Goal& g : goals.goals) {
      const CounterfactualResult cf =
          counterfactual_step(sim, goals, o.id, g.id, dt, config.planner);
      ++next.counterfactualCount;
      const double l = likelihood(o.velocity, LikelihoodModel{cf.simulatedVelocity, cov});
      byGoal[g.id] = l;
      next.likelihoods.emplace_back(o.id, g.id, l);
    }

    BeliefUpdate update = update_belief(prior, byGoal, config.floorProb);
    if (update.degenerate)
      next.diagnostics.push_back("agent " + std::to_string(o.id) +
                                 ": all likelihoods vanished, prior carried");
    next.beliefs.push_back(std::move(update.belief));
  }

  for (const GoalBelief& b : prev.beliefs) {
    if (observedIds.contains(b.agent)) continue;
    if (next.params.contains(b.agent)) {
      next.beliefs.push_back(b);  // unseen but within grace
    } else {
      next.diagnostics.push_back("agent " + std::to_string(b.agent) +
                                 ": dropped after occlusion grace");
    }
  }

  next.observations = observations;
  return next;
}

GoalSet sample_goal_grid(const Rect& bounds, int nx, int ny) {
  if (nx < 1 || ny < 1) throw Error(Error::Code::InvalidArgument, "grid must be at least 1x1");
  if (!(bounds.max.x > bounds.min.x) || !(bounds.max.y > bounds.min.y))
    throw Error(Error::Code::InvalidArgument, "grid bounds must have positive extent");
  const double cellW = (bounds.max.x - bounds.min.x) / static_cast<double>(nx);
  const double cellH = (bounds.max.y - bounds.min.y) / static_cast<double>(ny);
  GoalSet out;
  out.goals.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Goal g;
      g.id = static_cast<GoalId>(j * nx + i);
      g.position = {bounds.min.x + (i + 0.5) * cellW, bounds.min.y + (j + 0.5) * cellH};
      out.goals.push_back(g);
    }
  }
  return out;
}

}  // namespace intentsim::intent
