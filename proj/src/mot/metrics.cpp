#include "mot/metrics.hpp"

#include <cmath>
#include <unordered_map>

#include "common/hungarian.hpp"
#include "core/error.hpp"

namespace intentsim::mot {

MotReport evaluate(std::span<const TrackFrame> tracks, std::span<const TruthFrame> truth,
                   double cutoff) {
  if (!(cutoff > 0.0))
    throw Error(Error::Code::InvalidArgument, "evaluate: cutoff must be > 0");
  if (truth.empty()) throw Error(Error::Code::InvalidArgument, "evaluate: empty truth trace");
  if (tracks.size() != truth.size())
    throw Error(Error::Code::InvalidArgument, "evaluate: trace lengths differ");
  for (std::size_t f = 0; f < truth.size(); ++f)
    if (std::abs(tracks[f].time - truth[f].time) > 1e-9)
      throw Error(Error::Code::InvalidArgument, "evaluate: traces are not time-aligned");

  MotReport report;
  double distanceSum = 0.0;
  // Most recent track ever matched to each truth id; survives frames where
  // the truth goes unmatched, so a switch after a gap still counts.
  std::unordered_map<std::uint32_t, std::uint32_t> lastMatch;

  for (std::size_t f = 0; f < truth.size(); ++f) {
    const auto& reported = tracks[f].tracks;
    const auto& objects = truth[f].objects;
    FrameEval eval;
    eval.time = truth[f].time;

    const int nTracks = static_cast<int>(reported.size());
    const int nTruth = static_cast<int>(objects.size());
    std::vector<char> trackUsed(reported.size(), 0);
    std::vector<char> truthUsed(objects.size(), 0);

    // Continuation pass: a truth keeps its previous track while the pair is
    // still within the gate, regardless of cheaper alternatives.
    for (int i = 0; i < nTruth; ++i) {
      auto prev = lastMatch.find(objects[i].id);
      if (prev == lastMatch.end()) continue;
      for (int j = 0; j < nTracks; ++j) {
        if (trackUsed[j] || reported[j].id != prev->second) continue;
        const double d = distance(reported[j].position, objects[i].position);
        if (d <= cutoff) {
          eval.matches.push_back({reported[j].id, objects[i].id, d});
          trackUsed[j] = 1;
          truthUsed[i] = 1;
        }
        break;
      }
    }

    // Optimal assignment over whatever the continuation pass left open.
    std::vector<int> freeTracks;
    std::vector<int> freeTruth;
    for (int j = 0; j < nTracks; ++j)
      if (!trackUsed[j]) freeTracks.push_back(j);
    for (int i = 0; i < nTruth; ++i)
      if (!truthUsed[i]) freeTruth.push_back(i);
    if (!freeTracks.empty() && !freeTruth.empty()) {
      std::vector<double> cost(freeTracks.size() * freeTruth.size());
      for (std::size_t r = 0; r < freeTracks.size(); ++r)
        for (std::size_t c = 0; c < freeTruth.size(); ++c) {
          const double d =
              distance(reported[freeTracks[r]].position, objects[freeTruth[c]].position);
          cost[r * freeTruth.size() + c] = d <= cutoff ? d : kUnassignable;
        }
      const auto picked = solve_assignment(cost, static_cast<int>(freeTracks.size()),
                                           static_cast<int>(freeTruth.size()));
      for (std::size_t r = 0; r < freeTracks.size(); ++r) {
        if (picked[r] < 0) continue;
        const int j = freeTracks[r];
        const int i = freeTruth[picked[r]];
        eval.matches.push_back({reported[j].id, objects[i].id,
                                distance(reported[j].position, objects[i].position)});
        trackUsed[j] = 1;
        truthUsed[i] = 1;
      }
    }

    for (const auto& m : eval.matches) {
      auto prev = lastMatch.find(m.truthId);
      if (prev != lastMatch.end() && prev->second != m.trackId) ++eval.idSwitches;
      lastMatch[m.truthId] = m.trackId;
      distanceSum += m.distance;
    }
    for (int i = 0; i < nTruth; ++i)
      if (!truthUsed[i]) ++eval.misses;
    for (int j = 0; j < nTracks; ++j)
      if (!trackUsed[j]) ++eval.falsePositives;

    report.totalTruth += nTruth;
    report.totalMatches += eval.matches.size();
    report.totalMisses += eval.misses;
    report.totalFalsePositives += eval.falsePositives;
    report.totalIdSwitches += eval.idSwitches;
    report.frames.push_back(std::move(eval));
  }

  if (report.totalTruth == 0)
    throw Error(Error::Code::InvalidArgument, "evaluate: truth trace has no objects");

  const double errors = static_cast<double>(report.totalMisses + report.totalFalsePositives +
                                            report.totalIdSwitches);
  report.mota = 1.0 - errors / static_cast<double>(report.totalTruth);
  if (report.totalMatches > 0) {
    report.meanMatchDistance = distanceSum / static_cast<double>(report.totalMatches);
    report.normalizedError = report.meanMatchDistance / cutoff;
    report.motp = 1.0 - report.normalizedError;
  }
  return report;
}

TruthFrame truth_frame(const WorldState& world) {
  TruthFrame f;
  f.time = world.time;
  f.objects.reserve(world.agents.size());
  for (const AgentState& a : world.agents)
    f.objects.push_back({static_cast<std::uint32_t>(a.id), a.position});
  return f;
}

TrackFrame track_frame(double time, std::span<const ptrack::TrackerNode::OutputTrack> tracks) {
  TrackFrame f;
  f.time = time;
  f.tracks.reserve(tracks.size());
  for (const auto& t : tracks) f.tracks.push_back({t.id, t.position});
  return f;
}

}  // namespace intentsim::mot
