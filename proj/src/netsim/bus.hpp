#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "ptrack/gmm.hpp"

namespace intentsim::netsim {

using ptrack::GmmBelief;
using ptrack::SensorId;

/// Directed-link channel model. Latency is fixed plus a uniform jitter draw;
/// samples never go negative.
struct LinkModel {
  double latencyMean = 0.0;    // seconds
  double latencyJitter = 0.0;  // uniform additional delay in [0, jitter)
  double dropProb = 0.0;       // per-message loss probability
};

struct NetStats {
  std::uint64_t broadcasts = 0;   // accepted broadcast calls
  std::uint64_t enqueued = 0;     // per-recipient copies put on the wire
  std::uint64_t dropped = 0;      // copies lost to the drop draw
  std::uint64_t delivered = 0;    // copies handed out by collect
  std::uint64_t missed = 0;       // copies whose window was never collected
  std::uint64_t bytesOnWire = 0;  // encoded bytes across enqueued copies
};

/// Virtual-time message bus between sensor nodes. Broadcasts encode the
/// belief once and schedule one copy per live peer, each with its own
/// drop/latency draw from that directed link's RNG substream, so outcomes on
/// one link never depend on traffic elsewhere. Collection is a tumbling
/// window (now - deltaT, now]; each copy is delivered at most once, and
/// copies whose window has already passed are discarded as missed.
///
/// Killing a node purges its inbox; messages enqueued while it is dead are
/// never delivered, even after a revive.
class MessageBus {
 public:
  MessageBus(std::vector<SensorId> nodes, std::uint64_t seed, LinkModel defaultLink = {});

  /// Overrides the channel model of one directed link.
  void set_link(SensorId from, SensorId to, LinkModel model);

  void kill(SensorId node);
  void revive(SensorId node);
  bool alive(SensorId node) const;

  /// Schedules the belief to every live peer of `from`; the sender never
  /// hears itself. Returns the number of copies enqueued. A dead sender is a
  /// no-op with a diagnostic.
  int broadcast(SensorId from, const GmmBelief& belief, double now);

  /// Messages to `node` arriving in (now - deltaT, now], oldest first.
  std::vector<GmmBelief> collect(SensorId node, double now, double deltaT);

  const NetStats& stats() const { return stats_; }
  std::vector<std::string> drain_diagnostics();

 private:
  struct Pending {
    double arrival = 0.0;
    std::uint64_t seq = 0;
    std::shared_ptr<const std::vector<std::uint8_t>> wire;
  };
  struct Link {
    LinkModel model;
    std::mt19937_64 rng;
  };

  std::size_t index_of(SensorId node) const;
  Link& link(SensorId from, SensorId to);

  std::vector<SensorId> nodes_;
  std::vector<char> alive_;
  std::vector<std::vector<Pending>> inbox_;
  std::unordered_map<std::uint64_t, Link> links_;
  LinkModel defaultLink_;
  std::uint64_t seed_;
  std::uint64_t nextSeq_ = 0;
  NetStats stats_;
  std::vector<std::string> diagnostics_;
};

}  // namespace intentsim::netsim
