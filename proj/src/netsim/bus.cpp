#include "netsim/bus.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace intentsim::netsim {
namespace {

void validate_link(const LinkModel& m, const char* where) {
  if (!(m.latencyMean >= 0.0))
    throw Error(Error::Code::InvalidArgument, std::string(where) + ": latencyMean must be >= 0");
  if (!(m.latencyJitter >= 0.0))
    throw Error(Error::Code::InvalidArgument, std::string(where) + ": latencyJitter must be >= 0");
  if (!(m.dropProb >= 0.0 && m.dropProb <= 1.0))
    throw Error(Error::Code::InvalidArgument, std::string(where) + ": dropProb must be in [0, 1]");
}

std::uint64_t link_key(SensorId from, SensorId to) {
  return (static_cast<std::uint64_t>(from) << 32) | static_cast<std::uint64_t>(to);
}

}  // namespace

MessageBus::MessageBus(std::vector<SensorId> nodes, std::uint64_t seed, LinkModel defaultLink)
    : nodes_(std::move(nodes)), defaultLink_(defaultLink), seed_(seed) {
  if (nodes_.empty()) throw Error(Error::Code::InvalidArgument, "MessageBus: no nodes");
  validate_link(defaultLink_, "MessageBus");
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    for (std::size_t j = i + 1; j < nodes_.size(); ++j)
      if (nodes_[i] == nodes_[j])
        throw Error(Error::Code::InvalidArgument, "MessageBus: duplicate node id");
  alive_.assign(nodes_.size(), 1);
  inbox_.resize(nodes_.size());
}

std::size_t MessageBus::index_of(SensorId node) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i] == node) return i;
  throw Error(Error::Code::InvalidArgument, "unknown node " + std::to_string(node));
}

MessageBus::Link& MessageBus::link(SensorId from, SensorId to) {
  const auto key = link_key(from, to);
  auto it = links_.find(key);
  if (it == links_.end()) {
    // The substream is keyed by the link alone, so its draw sequence depends
    // only on how many messages crossed this link, not on other traffic.
    Link fresh{defaultLink_, make_rng(seed_, "netlink", key)};
    it = links_.emplace(key, std::move(fresh)).first;
  }
  return it->second;
}

void MessageBus::set_link(SensorId from, SensorId to, LinkModel model) {
  index_of(from);
  index_of(to);
  if (from == to) throw Error(Error::Code::InvalidArgument, "set_link: self link");
  validate_link(model, "set_link");
  link(from, to).model = model;
}

void MessageBus::kill(SensorId node) {
  const auto i = index_of(node);
  alive_[i] = 0;
  inbox_[i].clear();
}

void MessageBus::revive(SensorId node) { alive_[index_of(node)] = 1; }

bool MessageBus::alive(SensorId node) const { return alive_[index_of(node)] != 0; }

int MessageBus::broadcast(SensorId from, const GmmBelief& belief, double now) {
  const auto fromIdx = index_of(from);
  if (!alive_[fromIdx]) {
    diagnostics_.push_back("broadcast from dead sensor " + std::to_string(from) + " ignored");
    return 0;
  }
  if (!std::isfinite(now))
    throw Error(Error::Code::InvalidArgument, "broadcast: non-finite time");

  auto wire = std::make_shared<const std::vector<std::uint8_t>>(ptrack::encode_belief(belief));
  ++stats_.broadcasts;

  int enqueued = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (i == fromIdx || !alive_[i]) continue;
    Link& lk = link(from, nodes_[i]);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    if (u01(lk.rng) < lk.model.dropProb) {
      ++stats_.dropped;
      continue;
    }
    const double delay = lk.model.latencyMean + lk.model.latencyJitter * u01(lk.rng);
    inbox_[i].push_back(Pending{now + std::max(0.0, delay), nextSeq_++, wire});
    ++stats_.enqueued;
    stats_.bytesOnWire += wire->size();
    ++enqueued;
  }
  return enqueued;
}

std::vector<GmmBelief> MessageBus::collect(SensorId node, double now, double deltaT) {
  if (!(deltaT > 0.0)) throw Error(Error::Code::InvalidArgument, "collect: deltaT must be > 0");
  auto& box = inbox_[index_of(node)];

  std::vector<Pending> due;
  std::vector<Pending> keep;
  keep.reserve(box.size());
  for (Pending& p : box) {
    if (p.arrival <= now - deltaT) {
      ++stats_.missed;  // its window has already passed
    } else if (p.arrival <= now) {
      due.push_back(std::move(p));
    } else {
      keep.push_back(std::move(p));
    }
  }
  box = std::move(keep);

  std::sort(due.begin(), due.end(), [](const Pending& a, const Pending& b) {
    return a.arrival != b.arrival ? a.arrival < b.arrival : a.seq < b.seq;
  });

  std::vector<GmmBelief> out;
  out.reserve(due.size());
  for (const Pending& p : due) {
    out.push_back(ptrack::decode_belief(*p.wire));
    ++stats_.delivered;
  }
  return out;
}

std::vector<std::string> MessageBus::drain_diagnostics() {
  return std::exchange(diagnostics_, {});
}

}  // namespace intentsim::netsim
