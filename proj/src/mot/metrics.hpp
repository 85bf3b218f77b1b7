#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/vec2.hpp"
#include "core/world.hpp"
#include "ptrack/tracker.hpp"

namespace intentsim::mot {

/// One reported object position in one frame.
struct TrackSnapshot {
  std::uint32_t id = 0;
  Vec2 position;
};

struct TrackFrame {
  double time = 0.0;
  std::vector<TrackSnapshot> tracks;
};

struct TruthObject {
  std::uint32_t id = 0;
  Vec2 position;
};

struct TruthFrame {
  double time = 0.0;
  std::vector<TruthObject> objects;
};

/// Per-frame evaluation record. Every match distance is within the cutoff.
struct FrameEval {
  double time = 0.0;
  struct Match {
    std::uint32_t trackId = 0;
    std::uint32_t truthId = 0;
    double distance = 0.0;
  };
  std::vector<Match> matches;
  int misses = 0;
  int falsePositives = 0;
  int idSwitches = 0;
};

/// Aggregate CLEAR MOT report. motp is oriented so that higher is better
/// (1 - meanMatchDistance / cutoff); normalizedError is the same quantity in
/// its raw lower-is-better form. With zero matches across the whole trace
/// both meanMatchDistance and motp are reported as 0.
struct MotReport {
  double mota = 0.0;
  double motp = 0.0;
  double meanMatchDistance = 0.0;  // meters, over all matches
  double normalizedError = 0.0;    // meanMatchDistance / cutoff
  std::uint64_t totalTruth = 0;    // truth object appearances across frames
  std::uint64_t totalMatches = 0;
  std::uint64_t totalMisses = 0;
  std::uint64_t totalFalsePositives = 0;
  std::uint64_t totalIdSwitches = 0;
  std::vector<FrameEval> frames;
};

/// Evaluates a track trace against a time-aligned truth trace.
///
/// Per frame, tracks are matched one-to-one to truths under a hard distance
/// gate of `cutoff` meters; a truth keeps its previous track whenever that
/// track is still within the gate, and only the remainder goes through
/// optimal assignment. An id switch is counted when a truth's matched track
/// differs from the last track it was ever matched to. MOTA is
/// 1 - (misses + falsePositives + idSwitches) / totalTruth and is not
/// clamped below zero.
///
/// Throws Error::Code::InvalidArgument when the traces differ in length or
/// timestamps, when cutoff <= 0, or when the truth trace contains no object
/// appearances at all.
MotReport evaluate(std::span<const TrackFrame> tracks, std::span<const TruthFrame> truth,
                   double cutoff = 1.0);

/// Truth frame from a world snapshot: every agent is one ground-truth object.
TruthFrame truth_frame(const WorldState& world);

/// Track frame from a tracker node's confirmed output.
TrackFrame track_frame(double time, std::span<const ptrack::TrackerNode::OutputTrack> tracks);

}  // namespace intentsim::mot
