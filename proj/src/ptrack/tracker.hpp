#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "ptrack/gmm.hpp"
#include "ptrack/kcluster.hpp"

namespace intentsim::ptrack {

using Appearance = std::vector<double>;

/// One detection delivered by a sensor: a ground-plane point plus an
/// appearance signature (possibly empty, e.g. for clutter).
struct Measurement {
  SensorId sensor = 0;
  double time = 0.0;
  Vec2 position;
  Appearance appearance;
};

struct GroupMember {
  TrackId id = 0;
  Appearance appearance;
};

/// A persistent object hypothesis. Solo tracks have no group members; a
/// group track carries at least two members awaiting re-identification.
struct Track {
  TrackId id = 0;
  Vec2 position;            // filter state, coasted between detections
  Vec2 velocity;
  Sym2 covPosition = Sym2::isotropic(1e-2);
  Sym2 covVelocity = Sym2::isotropic(1e-2);
  double lastSeen = 0.0;    // time of the last detection-backed update
  int hits = 0;             // detection-backed updates so far
  Appearance appearance;
  std::vector<GroupMember> groupMembers;

  // Differenced detection positions; immune to the coasting applied to
  // `position` between detections.
  Vec2 lastOutputPosition;
  Vec2 outputVelocity;

  bool group() const { return !groupMembers.empty(); }
};

struct TrackSet {
  std::vector<Track> tracks;
  TrackId nextId = 1;

  Track* find(TrackId id);
  const Track* find(TrackId id) const;
};

/// A candidate object estimate entering data association. Aligned candidates
/// are backed by a detection this frame; unaligned ones are prediction-only
/// particle mass and never update lastSeen or spawn tracks.
struct TrackCandidate {
  double weight = 0.0;
  Vec2 position;
  Vec2 velocity;
  Sym2 covPosition = Sym2::isotropic(1e-2);
  Sym2 covVelocity = Sym2::isotropic(1e-2);
  bool aligned = false;
  Appearance appearance;
};

struct PtrackConfig {
  int localParticles = 500;
  int globalParticles = 1000;
  double measSigma = 0.1;        // detection likelihood sigma, meters
  double posNoise = 0.05;        // process noise per step, meters
  double velNoise = 0.2;         // process noise per step, m/s
  double clutterDensity = 5e-4;  // uniform false-positive likelihood floor
  double birthVelSigma = 0.5;    // velocity spread of newborn particles
  KClusterConfig cluster;
  double assocGate = 1.0;        // position gate for assignment, meters
  double mergeGate = 0.6;        // lost-track distance that forms a group
  double wPosition = 0.6;
  double wVelocity = 0.25;
  double wHeading = 0.15;
  double retireAfter = 1.0;      // seconds unseen before a track is dropped
  double mergeMaxUnseen = 0.3;   // how freshly-lost a track must be to join a group
  int confirmHits = 2;           // detections before a track is reportable
  double appearanceAlpha = 0.3;  // EMA rate for track appearance updates
  double duplicateAppearanceGate = 0.5;  // a lost track this close in signature
                                         // to its would-be host is the same
                                         // object and retires instead of
                                         // joining the group
  double fusionFloor = 0.05;     // fusion likelihood floor, as a fraction of
                                 // a belief's peak component density
};

struct AssocResult {
  TrackSet tracks;
  std::vector<TrackId> candidateTrack;  // id each candidate ended up under
  std::vector<std::string> diagnostics;
};

/// Assigns candidates to prior tracks by a weighted cost over position,
/// speed and heading, solved as a minimum-cost matching with a position
/// gate. Unmatched aligned candidates clear of every surviving track's gate
/// start new tracks; stale tracks retire; lost tracks adjacent to a matched
/// one collapse into a group; groups whose neighborhood shows several
/// detections separate again, re-identifying members by their stored
/// appearance signatures.
AssocResult data_associate(std::span<const TrackCandidate> candidates, const TrackSet& prev,
                           double now, const PtrackConfig& config = {});

struct LocalResult {
  GmmBelief belief;
  TrackSet tracks;
  std::vector<std::string> diagnostics;
};

/// One local filtering cycle: propagate particles, weight them against the
/// frame's measurements (Gaussian around each detection over a clutter
/// floor), resample, seed newborn particles on unexplained detections,
/// cluster, and associate. An empty particle set is reinitialized from the
/// measurements. The returned belief is what the sensor broadcasts.
LocalResult local_estimate(std::vector<Particle>& particles,
                           std::span<const Measurement> z, const TrackSet& prevTracks,
                           double dt, double now, SensorId sensor, std::mt19937_64& rng,
                           const PtrackConfig& config = {});

struct GlobalResult {
  TrackSet tracks;
  GmmBelief fused;
  std::vector<std::string> diagnostics;
};

/// Product-of-beliefs likelihood of a position under independently observed
/// sensor beliefs: prod over beliefs of (floorFrac * peak density + mixture
/// density). The floor keeps one silent sensor from vetoing mass the others
/// agree on; tying it to the belief's own peak keeps the discount for silence
/// scale-free in the covariance tightness.
double fusion_weight(const Vec2& position, std::span<const GmmBelief> beliefs,
                     double floorFrac);

/// One fusion cycle: sample a particle set from the pooled mixture of own
/// and received beliefs, weight by the belief product, resample, re-cluster,
/// re-weight against the re-clustered pool, and associate against the prior
/// global tracks. Malformed beliefs are discarded with a diagnostic; an
/// empty received set degrades to the own belief alone.
GlobalResult global_estimate(std::span<const GmmBelief> received, const GmmBelief& own,
                             const TrackSet& prevGlobal, double deltaT, double dt, double now,
                             std::span<const Measurement> ownMeasurements,
                             std::mt19937_64& rng, const PtrackConfig& config = {});

/// One sensor's sequential tracking process: owns its particles, local and
/// global track sets, and RNG stream. Local and global phases alternate;
/// distinct nodes share nothing and talk only through GmmBelief messages.
class TrackerNode {
 public:
  TrackerNode(SensorId sensor, std::uint64_t seed, PtrackConfig config = {});

  GmmBelief step_local(std::vector<Measurement> z, double now, double dt);
  const TrackSet& step_global(std::span<const GmmBelief> received, double deltaT,
                              double dt, double now);

  SensorId sensor() const { return sensor_; }
  const TrackSet& local_tracks() const { return localTracks_; }
  const TrackSet& global_tracks() const { return globalTracks_; }
  const GmmBelief& fused_belief() const { return fused_; }
  const std::vector<Particle>& particles() const { return particles_; }

  /// Confirmed global tracks, groups expanded to one hypothesis per member
  /// at the group estimate.
  struct OutputTrack {
    TrackId id;
    Vec2 position;
    Vec2 velocity;
  };
  std::vector<OutputTrack> output() const;

  std::vector<std::string> drain_diagnostics();

 private:
  SensorId sensor_;
  PtrackConfig config_;
  std::mt19937_64 rng_;
  std::vector<Particle> particles_;
  TrackSet localTracks_;
  TrackSet globalTracks_;
  GmmBelief lastLocalBelief_;
  GmmBelief fused_;
  std::vector<Measurement> lastMeasurements_;
  std::vector<std::string> diagnostics_;
};

}  // namespace intentsim::ptrack
