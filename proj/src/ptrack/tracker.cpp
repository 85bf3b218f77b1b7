#include "ptrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include "common/hungarian.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"

namespace intentsim::ptrack {

namespace {

constexpr double kNeutralAppearanceCost = 10.0;
constexpr double kMaxDiffGap = 0.5;  // seconds; longer gaps reset velocity differencing

double gauss2(const Vec2& d, double sigma) {
  const double s2 = sigma * sigma;
  return std::exp(-0.5 * norm_sq(d) / s2) / (2.0 * std::numbers::pi * s2);
}

double appearance_distance(const Appearance& a, const Appearance& b) {
  if (a.empty() || b.empty() || a.size() != b.size()) return kNeutralAppearanceCost;
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(d2);
}

void blend_appearance(Appearance& into, const Appearance& seen, double alpha) {
  if (seen.empty()) return;
  if (into.size() != seen.size()) {
    into = seen;
    return;
  }
  for (std::size_t i = 0; i < into.size(); ++i)
    into[i] = (1.0 - alpha) * into[i] + alpha * seen[i];
}

std::vector<GroupMember> members_of(const Track& t) {
  if (t.group()) return t.groupMembers;
  return {{t.id, t.appearance}};
}

// Weighted association cost; the heading term only counts when both sides
// are actually moving.
double pair_cost(const Track& t, const TrackCandidate& c, const PtrackConfig& cfg) {
  const double posD = distance(t.position, c.position);
  if (posD > cfg.assocGate) return kUnassignable;
  const double velD = std::abs(norm(t.velocity) - norm(c.velocity));
  double headD = 0.0;
  if (norm(t.velocity) > 0.1 && norm(c.velocity) > 0.1)
    headD = std::abs(signed_angle(t.velocity, c.velocity));
  return cfg.wPosition * posD + cfg.wVelocity * velD + cfg.wHeading * headD;
}

void apply_candidate(Track& t, const TrackCandidate& c, double now, double alpha) {
  const double gap = now - t.lastSeen;
  if (t.hits > 0 && gap > 0.0 && gap <= kMaxDiffGap)
    t.outputVelocity = (c.position - t.lastOutputPosition) / gap;
  else
    t.outputVelocity = c.velocity;
  t.lastOutputPosition = c.position;
  t.position = c.position;
  t.velocity = c.velocity;
  t.covPosition = c.covPosition;
  t.covVelocity = c.covVelocity;
  t.lastSeen = now;
  t.hits += 1;
  blend_appearance(t.appearance, c.appearance, alpha);
}

Track track_from_candidate(TrackId id, const TrackCandidate& c, double now) {
  Track t;
  t.id = id;
  t.position = c.position;
  t.velocity = c.velocity;
  t.covPosition = c.covPosition;
  t.covVelocity = c.covVelocity;
  t.lastSeen = now;
  t.hits = 1;
  t.appearance = c.appearance;
  t.lastOutputPosition = c.position;
  t.outputVelocity = c.velocity;
  return t;
}

// Systematic resampling; one uniform offset, minimal variance, deterministic
// given the generator state.
std::vector<Particle> resample(const std::vector<Particle>& in, int count, double total,
                               std::mt19937_64& rng) {
  std::vector<Particle> out;
  out.reserve(count);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double step = total / count;
  const double offset = u01(rng) * step;
  double cum = 0.0;
  std::size_t i = 0;
  for (int k = 0; k < count; ++k) {
    const double target = offset + k * step;
    while (i + 1 < in.size() && cum + in[i].weight < target) {
      cum += in[i].weight;
      ++i;
    }
    Particle p = in[i];
    p.weight = 1.0 / count;
    out.push_back(p);
  }
  return out;
}

Vec2 sample_gaussian(const Vec2& mean, const Sym2& cov, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  const auto chol = cov.cholesky();
  if (!chol) return mean;
  const Vec2 z{n01(rng), n01(rng)};
  return mean + chol_apply(*chol, z);
}

GmmBelief belief_from_candidates(SensorId sensor, double now,
                                 std::span<const TrackCandidate> candidates,
                                 const std::vector<TrackId>& ids) {
  GmmBelief b;
  b.sensor = sensor;
  b.time = now;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    GmmComponent c;
    c.trackId = ids[i];
    c.weight = candidates[i].weight;
    c.meanPosition = candidates[i].position;
    c.meanVelocity = candidates[i].velocity;
    c.covPosition = candidates[i].covPosition;
    c.covVelocity = candidates[i].covVelocity;
    c.appearance = candidates[i].appearance;
    b.components.push_back(std::move(c));
  }
  return b;
}

// Clusters to candidates. Each measurement claims at most one cluster (the
// closest); that cluster snaps onto the measurement and inherits its
// appearance. A cluster left over but supported by a peer belief component
// counts as detection-backed without snapping and inherits the supporting
// component's appearance, unless that peer component sits inside some own
// measurement's snap gate: such support corroborates the measurement, it
// does not evidence a second object. Everything else is coasting particle
// mass. One detection never backs two candidates, so an over-split blob
// cannot mint a duplicate of the object it came from.
std::vector<TrackCandidate> candidates_from_clusters(
    const std::vector<Cluster>& clusters, std::span<const Measurement> z,
    std::span<const GmmComponent> peerSupport, double snapGate) {
  std::vector<TrackCandidate> out;
  out.reserve(clusters.size());
  for (const Cluster& cl : clusters) {
    TrackCandidate c;
    c.weight = cl.weight;
    c.position = cl.meanPosition;
    c.velocity = cl.meanVelocity;
    c.covPosition = cl.covPosition;
    c.covVelocity = cl.covVelocity;
    out.push_back(std::move(c));
  }

  struct Snap {
    double d;
    int cluster;
    int meas;
  };
  std::vector<Snap> snaps;
  for (int i = 0; i < static_cast<int>(clusters.size()); ++i)
    for (int j = 0; j < static_cast<int>(z.size()); ++j) {
      const double d = distance(z[j].position, clusters[i].meanPosition);
      if (d <= snapGate) snaps.push_back({d, i, j});
    }
  std::sort(snaps.begin(), snaps.end(), [](const Snap& a, const Snap& b) {
    return std::tie(a.d, a.cluster, a.meas) < std::tie(b.d, b.cluster, b.meas);
  });
  std::vector<char> clusterTaken(clusters.size(), 0);
  std::vector<char> measTaken(z.size(), 0);
  for (const Snap& s : snaps) {
    if (clusterTaken[s.cluster] || measTaken[s.meas]) continue;
    clusterTaken[s.cluster] = 1;
    measTaken[s.meas] = 1;
    out[s.cluster].aligned = true;
    out[s.cluster].position = z[s.meas].position;
    out[s.cluster].appearance = z[s.meas].appearance;
  }

  std::vector<char> supportFree(peerSupport.size(), 1);
  for (std::size_t k = 0; k < peerSupport.size(); ++k)
    for (const Measurement& m : z)
      if (distance(peerSupport[k].meanPosition, m.position) <= snapGate) {
        supportFree[k] = 0;
        break;
      }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (clusterTaken[i]) continue;
    int best = -1;
    double bestD = snapGate;
    for (std::size_t k = 0; k < peerSupport.size(); ++k) {
      if (!supportFree[k]) continue;
      const double d = distance(peerSupport[k].meanPosition, clusters[i].meanPosition);
      if (d <= bestD) {
        bestD = d;
        best = static_cast<int>(k);
      }
    }
    if (best >= 0) {
      out[i].aligned = true;
      out[i].appearance = peerSupport[best].appearance;
    }
  }
  return out;
}

TrackSet coasted(const TrackSet& prev, double dt) {
  TrackSet next = prev;
  for (Track& t : next.tracks) t.position += t.velocity * dt;
  return next;
}

}  // namespace

Track* TrackSet::find(TrackId id) {
  for (Track& t : tracks)
    if (t.id == id) return &t;
  return nullptr;
}

const Track* TrackSet::find(TrackId id) const {
  for (const Track& t : tracks)
    if (t.id == id) return &t;
  return nullptr;
}

AssocResult data_associate(std::span<const TrackCandidate> candidates, const TrackSet& prev,
                           double now, const PtrackConfig& config) {
  AssocResult res;
  res.tracks = prev;
  res.candidateTrack.assign(candidates.size(), 0);
  auto& tracks = res.tracks.tracks;

  const int nt = static_cast<int>(tracks.size());
  const int nc = static_cast<int>(candidates.size());

  // Detection-backed candidates claim tracks first; coasting particle mass
  // then labels whatever tracks are left. Were both pooled into one matching,
  // a track's own coasting mass could lure it away from its detection at
  // near-zero cost and hand that detection to a worse-placed rival.
  std::vector<int> match(nt, -1);
  {
    std::vector<int> alignedIdx;
    for (int j = 0; j < nc; ++j)
      if (candidates[j].aligned) alignedIdx.push_back(j);
    const int na = static_cast<int>(alignedIdx.size());
    std::vector<double> cost(static_cast<std::size_t>(nt) * na, kUnassignable);
    for (int i = 0; i < nt; ++i)
      for (int a = 0; a < na; ++a)
        cost[static_cast<std::size_t>(i) * na + a] =
            pair_cost(tracks[i], candidates[alignedIdx[a]], config);
    const std::vector<int> m = solve_assignment(cost, nt, na);
    for (int i = 0; i < nt; ++i)
      if (m[i] >= 0) match[i] = alignedIdx[m[i]];
  }
  {
    std::vector<int> freeTrack;
    for (int i = 0; i < nt; ++i)
      if (match[i] < 0) freeTrack.push_back(i);
    std::vector<int> coastIdx;
    for (int j = 0; j < nc; ++j)
      if (!candidates[j].aligned) coastIdx.push_back(j);
    const int nf = static_cast<int>(freeTrack.size());
    const int nu = static_cast<int>(coastIdx.size());
    std::vector<double> cost(static_cast<std::size_t>(nf) * nu, kUnassignable);
    for (int i = 0; i < nf; ++i)
      for (int u = 0; u < nu; ++u)
        cost[static_cast<std::size_t>(i) * nu + u] =
            pair_cost(tracks[freeTrack[i]], candidates[coastIdx[u]], config);
    const std::vector<int> m = solve_assignment(cost, nf, nu);
    for (int i = 0; i < nf; ++i)
      if (m[i] >= 0) match[freeTrack[i]] = coastIdx[m[i]];
  }

  std::vector<char> candidateUsed(candidates.size(), 0);
  for (int i = 0; i < nt; ++i) {
    const int j = match[i];
    if (j < 0) continue;
    candidateUsed[j] = 1;
    res.candidateTrack[j] = tracks[i].id;
    if (candidates[j].aligned)
      apply_candidate(tracks[i], candidates[j], now, config.appearanceAlpha);
    // An unaligned match is coasting particle mass: the track keeps its
    // prediction and its lastSeen, so retirement still counts from the last
    // real detection.
  }

  // Group separation: spare detections inside a group's gate pull members
  // back out, re-identified by stored appearance. The group's own detection
  // stays with whoever remains.
  std::vector<Track> separated;
  for (int ti = 0; ti < nt; ++ti) {
    Track& g = tracks[ti];
    if (!g.group()) continue;
    std::vector<int> spare;
    for (int j = 0; j < nc; ++j)
      if (!candidateUsed[j] && candidates[j].aligned &&
          distance(candidates[j].position, g.position) <= config.assocGate)
        spare.push_back(j);
    if (spare.empty()) continue;

    const int nm = static_cast<int>(g.groupMembers.size());
    const int ns = static_cast<int>(spare.size());
    std::vector<double> appCost(static_cast<std::size_t>(nm) * ns, 0.0);
    for (int i = 0; i < nm; ++i)
      for (int j = 0; j < ns; ++j)
        appCost[static_cast<std::size_t>(i) * ns + j] =
            appearance_distance(g.groupMembers[i].appearance,
                                candidates[spare[j]].appearance);
    const std::vector<int> assign = solve_assignment(appCost, nm, ns);

    std::vector<GroupMember> remaining;
    for (int i = 0; i < nm; ++i) {
      if (assign[i] < 0) {
        remaining.push_back(g.groupMembers[i]);
        continue;
      }
      const int j = spare[assign[i]];
      Track t = track_from_candidate(g.groupMembers[i].id, candidates[j], now);
      t.appearance = g.groupMembers[i].appearance;
      blend_appearance(t.appearance, candidates[j].appearance, config.appearanceAlpha);
      t.hits = std::max(g.hits, config.confirmHits);
      res.candidateTrack[j] = t.id;
      candidateUsed[j] = 1;
      separated.push_back(std::move(t));
    }
    if (remaining.size() >= 2) {
      // The container is always named after a current member, so a departed
      // host cannot leave its id behind on the group.
      g.groupMembers = std::move(remaining);
      g.id = g.groupMembers[0].id;
      if (match[ti] >= 0) res.candidateTrack[match[ti]] = g.id;
    } else if (remaining.size() == 1) {
      // A group of one is that member again, keeping the group's estimate.
      g.id = remaining[0].id;
      g.appearance = remaining[0].appearance;
      g.groupMembers.clear();
      g.hits = std::max(g.hits, config.confirmHits);
      // The candidate the container matched this frame follows the rename,
      // keeping candidate ids unique when the departed member was the host.
      if (match[ti] >= 0) res.candidateTrack[match[ti]] = g.id;
    } else {
      g.hits = -1;  // everyone left onto a spare detection; container dissolves
      if (match[ti] >= 0) res.candidateTrack[match[ti]] = res.tracks.nextId++;
    }
  }
  std::erase_if(tracks, [](const Track& t) { return t.hits < 0; });
  for (Track& t : separated) tracks.push_back(std::move(t));

  // Duplicate pruning: two tracks inside the merge gate whose signatures
  // match are one object reported twice. The senior id survives; it adopts
  // the fresher state and any group members the junior still held.
  for (std::size_t a = 0; a < tracks.size(); ++a) {
    for (std::size_t b = a + 1; b < tracks.size(); ++b) {
      Track& s = tracks[a].id < tracks[b].id ? tracks[a] : tracks[b];
      Track& j = tracks[a].id < tracks[b].id ? tracks[b] : tracks[a];
      if (s.hits < 0 || j.hits < 0) continue;
      if (distance(s.position, j.position) > config.mergeGate) continue;
      if (!s.appearance.empty() && !j.appearance.empty()) {
        // Matching signatures prove one object; distinct ones prove two.
        if (appearance_distance(s.appearance, j.appearance) >
            config.duplicateAppearanceGate)
          continue;
      } else {
        // Without signature evidence, two detections this frame are the only
        // proof of two objects; a pair trading one detection back and forth
        // is one object reported twice.
        if (s.lastSeen == now && j.lastSeen == now) continue;
      }
      const int seniorHits = s.hits;
      if (j.lastSeen > s.lastSeen) {
        const TrackId keep = s.id;
        const Appearance look = s.appearance;
        std::vector<GroupMember> members = s.groupMembers;
        s = j;
        s.id = keep;
        s.appearance = look;
        s.groupMembers = std::move(members);
      }
      s.hits = std::max(seniorHits, j.hits);
      for (GroupMember& m : j.groupMembers) {
        bool held = false;
        for (const GroupMember& have : s.groupMembers) held = held || have.id == m.id;
        if (!held && m.id != s.id) s.groupMembers.push_back(std::move(m));
      }
      j.hits = -1;  // folded into the senior track
    }
  }
  std::erase_if(tracks, [](const Track& t) { return t.hits < 0; });

  // Group formation: a confirmed track that just lost its detection right
  // next to a detection-backed one has merged with it in measurement space.
  // Only a confirmed host may absorb; a newborn does not get to swallow an
  // established identity.
  for (Track& loser : tracks) {
    if (loser.hits < 0 || loser.lastSeen == now) continue;
    if (loser.hits < config.confirmHits) continue;
    if (now - loser.lastSeen > config.mergeMaxUnseen) continue;
    Track* host = nullptr;
    double best = config.mergeGate;
    for (Track& h : tracks) {
      if (h.hits < 0 || h.hits < config.confirmHits || h.lastSeen != now || &h == &loser)
        continue;
      const double d = distance(loser.position, h.position);
      if (d <= best) {
        best = d;
        host = &h;
      }
    }
    if (host == nullptr) continue;
    // A loser whose signature duplicates one already in the host is that
    // object seen twice, not a merge; it coasts toward retirement instead.
    // One-sided signatures cannot verify distinctness either, so a merge
    // requires both sides to carry appearance evidence or neither to.
    bool duplicate = false;
    bool hostHasApp = false;
    bool loserHasApp = false;
    for (const GroupMember& m : members_of(*host)) {
      hostHasApp = hostHasApp || !m.appearance.empty();
      for (const GroupMember& l : members_of(loser))
        if (appearance_distance(m.appearance, l.appearance) <=
            config.duplicateAppearanceGate)
          duplicate = true;
    }
    for (const GroupMember& l : members_of(loser)) loserHasApp = loserHasApp || !l.appearance.empty();
    if (duplicate || hostHasApp != loserHasApp) continue;
    std::vector<GroupMember> merged = members_of(*host);
    for (GroupMember& m : members_of(loser)) merged.push_back(std::move(m));
    host->groupMembers = std::move(merged);
    loser.hits = -1;  // absorbed
  }
  std::erase_if(tracks, [](const Track& t) { return t.hits < 0; });

  // Stale tracks retire first, then spare detections give birth. A spare
  // inside a surviving track's gate is duplicate mass of that track, not a
  // new object; the gate also covers births made earlier in this pass, so
  // one frame cannot seed two tracks on the same spot.
  std::erase_if(tracks, [&](const Track& t) {
    return now - t.lastSeen > config.retireAfter;
  });
  for (int j = 0; j < nc; ++j) {
    if (candidateUsed[j] || !candidates[j].aligned) continue;
    bool covered = false;
    for (const Track& t : tracks)
      if (distance(t.position, candidates[j].position) <= config.assocGate) {
        covered = true;
        break;
      }
    if (covered) continue;
    const TrackId id = res.tracks.nextId++;
    tracks.push_back(track_from_candidate(id, candidates[j], now));
    res.candidateTrack[j] = id;
  }

  // Whatever still carries no identity is transient particle mass; it gets a
  // fresh id for the outgoing belief without becoming a track.
  for (int j = 0; j < nc; ++j)
    if (res.candidateTrack[j] == 0) res.candidateTrack[j] = res.tracks.nextId++;

  return res;
}

LocalResult local_estimate(std::vector<Particle>& particles,
                           std::span<const Measurement> z, const TrackSet& prevTracks,
                           double dt, double now, SensorId sensor, std::mt19937_64& rng,
                           const PtrackConfig& config) {
  if (!(dt > 0.0)) throw Error(Error::Code::InvalidArgument, "local_estimate: dt must be > 0");
  for (const Measurement& m : z) {
    if (m.sensor != sensor)
      throw Error(Error::Code::InvalidArgument, "local_estimate: foreign-sensor measurement");
    if (!std::isfinite(m.position.x) || !std::isfinite(m.position.y))
      throw Error(Error::Code::Validation, "local_estimate: non-finite measurement");
  }

  LocalResult res;
  std::normal_distribution<double> n01(0.0, 1.0);

  if (particles.empty() && !z.empty()) {
    res.diagnostics.push_back("particle set empty; reinitialized from measurements");
    particles.reserve(config.localParticles);
    for (int i = 0; i < config.localParticles; ++i) {
      const Measurement& m = z[i % z.size()];
      Particle p;
      p.position = m.position + config.measSigma * Vec2{n01(rng), n01(rng)};
      p.velocity = config.birthVelSigma * Vec2{n01(rng), n01(rng)};
      p.weight = 1.0 / config.localParticles;
      particles.push_back(p);
    }
  } else {
    for (Particle& p : particles) {
      p.position += p.velocity * dt + config.posNoise * Vec2{n01(rng), n01(rng)};
      p.velocity += config.velNoise * Vec2{n01(rng), n01(rng)};
    }
  }

  if (!particles.empty()) {
    double total = 0.0;
    for (Particle& p : particles) {
      double w = config.clutterDensity;
      for (const Measurement& m : z) w += gauss2(p.position - m.position, config.measSigma);
      p.weight = w;
      total += w;
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
      res.diagnostics.push_back("zero total particle weight; resample skipped");
      for (Particle& p : particles) p.weight = 1.0 / particles.size();
    } else {
      particles = resample(particles, config.localParticles, total, rng);
    }

    // Detections no particle explains get newborn mass carved from the tail.
    std::vector<const Measurement*> unexplained;
    for (const Measurement& m : z) {
      bool covered = false;
      for (const Particle& p : particles)
        if (distance(p.position, m.position) <= config.cluster.gate) {
          covered = true;
          break;
        }
      if (!covered) unexplained.push_back(&m);
    }
    if (!unexplained.empty()) {
      const int budget =
          std::min<int>(config.localParticles / 2,
                        static_cast<int>(unexplained.size()) * config.localParticles / 10);
      const int per = std::max(1, budget / static_cast<int>(unexplained.size()));
      std::size_t idx = particles.size();
      for (const Measurement* m : unexplained) {
        for (int k = 0; k < per && idx > 0; ++k) {
          Particle& p = particles[--idx];
          p.position = m->position + config.measSigma * Vec2{n01(rng), n01(rng)};
          p.velocity = config.birthVelSigma * Vec2{n01(rng), n01(rng)};
          p.weight = 1.0 / particles.size();
        }
      }
    }
  }

  TrackSet prior = coasted(prevTracks, dt);
  std::vector<TrackCandidate> candidates;
  if (!particles.empty())
    candidates = candidates_from_clusters(kclusterize(particles, config.cluster), z, {},
                                          config.cluster.gate);

  AssocResult assoc = data_associate(candidates, prior, now, config);
  res.tracks = std::move(assoc.tracks);
  for (std::string& d : assoc.diagnostics) res.diagnostics.push_back(std::move(d));

  // Only detection-backed components are broadcast; coasting mass stays a
  // private matter of this node's particle set.
  std::vector<TrackCandidate> alignedCands;
  std::vector<TrackId> alignedIds;
  double alignedMass = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (candidates[i].aligned) {
      alignedCands.push_back(candidates[i]);
      alignedIds.push_back(assoc.candidateTrack[i]);
      alignedMass += candidates[i].weight;
    }
  if (alignedMass > 0.0)
    for (TrackCandidate& c : alignedCands) c.weight /= alignedMass;
  res.belief = belief_from_candidates(sensor, now, alignedCands, alignedIds);
  return res;
}

double fusion_weight(const Vec2& position, std::span<const GmmBelief> beliefs,
                     double floorFrac) {
  double w = 1.0;
  for (const GmmBelief& b : beliefs) {
    if (b.components.empty()) continue;
    // The floor scales with the belief's own density peak, so how strongly a
    // sensor's silence discounts a position is independent of how tight that
    // sensor's covariances happen to be.
    double peak = 0.0;
    double density = 0.0;
    for (const GmmComponent& c : b.components) {
      peak = std::max(peak, c.position_density(c.meanPosition));
      density += c.weight * c.position_density(position);
    }
    w *= floorFrac * peak + density;
  }
  return w;
}

GlobalResult global_estimate(std::span<const GmmBelief> received, const GmmBelief& own,
                             const TrackSet& prevGlobal, double deltaT, double dt, double now,
                             std::span<const Measurement> ownMeasurements,
                             std::mt19937_64& rng, const PtrackConfig& config) {
  if (!(deltaT > 0.0))
    throw Error(Error::Code::InvalidArgument, "global_estimate: deltaT must be > 0");

  GlobalResult res;
  std::vector<GmmBelief> pool;
  if (own.valid()) {
    pool.push_back(own);
  } else {
    res.diagnostics.push_back("own belief malformed; excluded from fusion");
  }
  for (const GmmBelief& b : received) {
    if (b.valid()) {
      pool.push_back(b);
    } else {
      res.diagnostics.push_back("discarded malformed belief from sensor " +
                                std::to_string(b.sensor));
    }
  }

  std::vector<const GmmComponent*> comps;
  std::vector<double> compProb;
  for (const GmmBelief& b : pool)
    for (const GmmComponent& c : b.components) {
      comps.push_back(&c);
      compProb.push_back(c.weight);
    }

  TrackSet prior = coasted(prevGlobal, dt);
  if (comps.empty()) {
    AssocResult assoc = data_associate({}, prior, now, config);
    res.tracks = std::move(assoc.tracks);
    res.fused.sensor = own.sensor;
    res.fused.time = now;
    return res;
  }

  std::discrete_distribution<int> pick(compProb.begin(), compProb.end());
  std::vector<Particle> particles;
  particles.reserve(config.globalParticles);
  for (int i = 0; i < config.globalParticles; ++i) {
    const GmmComponent& c = *comps[pick(rng)];
    Particle p;
    p.position = sample_gaussian(c.meanPosition, c.covPosition, rng);
    p.velocity = sample_gaussian(c.meanVelocity, c.covVelocity, rng);
    p.weight = 1.0;
    particles.push_back(p);
  }

  double total = 0.0;
  for (Particle& p : particles) {
    p.weight = fusion_weight(p.position, pool, config.fusionFloor);
    total += p.weight;
  }
  if (total > 0.0 && std::isfinite(total))
    particles = resample(particles, config.globalParticles, total, rng);
  else
    res.diagnostics.push_back("degenerate fusion weights; resample skipped");

  std::vector<Cluster> clusters = kclusterize(particles, config.cluster);

  // Re-weight the set against the re-clustered pool, then refresh each
  // cluster's share from its members' new weights.
  std::vector<double> reweight(particles.size(), 0.0);
  double rwTotal = 0.0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    double d = 0.0;
    for (const Cluster& cl : clusters) {
      GmmComponent c;
      c.weight = cl.weight;
      c.meanPosition = cl.meanPosition;
      c.covPosition = cl.covPosition;
      d += c.weight * c.position_density(particles[i].position);
    }
    reweight[i] = d;
    rwTotal += d;
  }
  if (rwTotal > 0.0 && std::isfinite(rwTotal)) {
    for (Cluster& cl : clusters) {
      double mass = 0.0;
      for (int idx : cl.members) mass += reweight[idx];
      cl.weight = mass / rwTotal;
    }
  }

  std::vector<GmmComponent> peerSupport;
  for (const GmmBelief& b : pool)
    for (const GmmComponent& c : b.components) peerSupport.push_back(c);
  std::vector<TrackCandidate> candidates = candidates_from_clusters(
      clusters, ownMeasurements, peerSupport, config.cluster.gate);
  AssocResult assoc = data_associate(candidates, prior, now, config);
  res.tracks = std::move(assoc.tracks);
  for (std::string& d : assoc.diagnostics) res.diagnostics.push_back(std::move(d));
  res.fused = belief_from_candidates(own.sensor, now, candidates, assoc.candidateTrack);
  return res;
}

TrackerNode::TrackerNode(SensorId sensor, std::uint64_t seed, PtrackConfig config)
    : sensor_(sensor), config_(config), rng_(make_rng(seed, "ptrack", sensor)) {}

GmmBelief TrackerNode::step_local(std::vector<Measurement> z, double now, double dt) {
  LocalResult r =
      local_estimate(particles_, z, localTracks_, dt, now, sensor_, rng_, config_);
  localTracks_ = std::move(r.tracks);
  for (std::string& d : r.diagnostics) diagnostics_.push_back(std::move(d));
  lastMeasurements_ = std::move(z);
  lastLocalBelief_ = r.belief;
  return r.belief;
}

const TrackSet& TrackerNode::step_global(std::span<const GmmBelief> received, double deltaT,
                                         double dt, double now) {
  GlobalResult r = global_estimate(received, lastLocalBelief_, globalTracks_, deltaT, dt,
                                   now, lastMeasurements_, rng_, config_);
  globalTracks_ = std::move(r.tracks);
  fused_ = std::move(r.fused);
  for (std::string& d : r.diagnostics) diagnostics_.push_back(std::move(d));
  return globalTracks_;
}

std::vector<TrackerNode::OutputTrack> TrackerNode::output() const {
  std::vector<OutputTrack> out;
  for (const Track& t : globalTracks_.tracks) {
    if (t.hits < config_.confirmHits) continue;
    if (t.group()) {
      for (const GroupMember& m : t.groupMembers)
        out.push_back({m.id, t.position, t.outputVelocity});
    } else {
      out.push_back({t.id, t.position, t.outputVelocity});
    }
  }
  return out;
}

std::vector<std::string> TrackerNode::drain_diagnostics() {
  std::vector<std::string> out = std::move(diagnostics_);
  diagnostics_.clear();
  return out;
}

}  // namespace intentsim::ptrack
