#include "harness/trace.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>

#include "core/error.hpp"
#include "json.hpp"

namespace intentsim::harness {
namespace {

using nlohmann::json;

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

json step_json(const StepRecord& step) {
  json j;
  j["time"] = step.time;

  json truth = json::array();
  for (const AgentState& a : step.world.agents) {
    json row;
    row["id"] = a.id;
    row["position"] = vec_json(a.position);
    row["velocity"] = vec_json(a.velocity);
    if (auto it = step.trueGoals.find(a.id); it != step.trueGoals.end()) row["goal"] = it->second;
    truth.push_back(std::move(row));
  }
  j["truth"] = std::move(truth);

  json commands = json::array();
  for (const auto& [agent, v] : step.commands)
    commands.push_back(json{{"agent", agent}, {"velocity", vec_json(v)}});
  j["commands"] = std::move(commands);

  json sensors = json::array();
  for (const SensorFrame& f : step.sensors) {
    json detections = json::array();
    for (const ptrack::Measurement& m : f.measurements) {
      json d;
      d["position"] = vec_json(m.position);
      d["appearance"] = m.appearance;
      detections.push_back(std::move(d));
    }
    json tracks = json::array();
    for (const auto& t : f.tracks)
      tracks.push_back(json{
          {"id", t.id}, {"position", vec_json(t.position)}, {"velocity", vec_json(t.velocity)}});
    sensors.push_back(json{{"sensor", f.sensor},
                           {"alive", f.alive},
                           {"detections", std::move(detections)},
                           {"tracks", std::move(tracks)}});
  }
  j["sensors"] = std::move(sensors);

  json beliefs = json::array();
  for (const intent::GoalBelief& b : step.beliefs) {
    json posterior = json::array();
    for (const auto& [goal, p] : b.posterior) posterior.push_back(json::array({goal, p}));
    beliefs.push_back(json{{"agent", b.agent}, {"posterior", std::move(posterior)}});
  }
  j["beliefs"] = std::move(beliefs);

  json likelihoods = json::array();
  for (const auto& [agent, goal, value] : step.likelihoods)
    likelihoods.push_back(json::array({agent, goal, value}));
  j["likelihoods"] = std::move(likelihoods);

  j["diagnostics"] = step.diagnostics;
  return j;
}

void append_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                  static_cast<unsigned char>(v >> 16),
                                  static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

TraceTables tables_from_records(const std::vector<json>& records) {
  TraceTables tables;
  for (const json& j : records) {
    if (!j.is_object() || !j.contains("time") || !j.contains("truth"))
      throw Error(Error::Code::Parse, "trace record lacks time or truth");
    const double time = j.at("time").get<double>();
    mot::TruthFrame tf;
    tf.time = time;
    for (const json& row : j.at("truth"))
      tf.objects.push_back({row.at("id").get<std::uint32_t>(),
                            {row.at("position")[0].get<double>(),
                             row.at("position")[1].get<double>()}});
    tables.truth.push_back(std::move(tf));

    if (!j.contains("sensors")) continue;
    for (const json& f : j.at("sensors")) {
      const auto sensor = f.at("sensor").get<ptrack::SensorId>();
      mot::TrackFrame kf;
      kf.time = time;
      for (const json& t : f.at("tracks"))
        kf.tracks.push_back({t.at("id").get<std::uint32_t>(),
                             {t.at("position")[0].get<double>(),
                              t.at("position")[1].get<double>()}});
      tables.tracks[sensor].push_back(std::move(kf));
    }
  }
  return tables;
}

void write_csv_double(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  out << buf;
}

}  // namespace

std::string step_to_json(const StepRecord& step) { return step_json(step).dump(); }

void write_trace_jsonl(const RunResult& run, std::ostream& out) {
  for (const StepRecord& step : run.steps) out << step_json(step).dump() << '\n';
}

void write_trace_msgpack(const RunResult& run, std::ostream& out) {
  for (const StepRecord& step : run.steps) {
    const std::vector<std::uint8_t> bytes = json::to_msgpack(step_json(step));
    append_u32(out, static_cast<std::uint32_t>(bytes.size()));
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
}

TraceTables tables_from_run(const RunResult& run) {
  TraceTables tables;
  for (const StepRecord& step : run.steps) {
    tables.truth.push_back(mot::truth_frame(step.world));
    tables.truth.back().time = step.time;
    for (const SensorFrame& f : step.sensors)
      tables.tracks[f.sensor].push_back(mot::track_frame(step.time, f.tracks));
  }
  return tables;
}

TraceTables tables_from_jsonl(std::istream& in) {
  std::vector<json> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      records.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw Error(Error::Code::Parse, std::string("trace line: ") + e.what());
    }
  }
  return tables_from_records(records);
}

TraceTables tables_from_msgpack(std::istream& in) {
  std::vector<json> records;
  for (;;) {
    unsigned char head[4];
    in.read(reinterpret_cast<char*>(head), 4);
    if (in.gcount() == 0) break;
    if (in.gcount() != 4) throw Error(Error::Code::Parse, "trace record header truncated");
    const std::uint32_t n = std::uint32_t(head[0]) | std::uint32_t(head[1]) << 8 |
                            std::uint32_t(head[2]) << 16 | std::uint32_t(head[3]) << 24;
    std::vector<std::uint8_t> bytes(n);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n))
      throw Error(Error::Code::Parse, "trace record truncated");
    try {
      records.push_back(json::from_msgpack(bytes));
    } catch (const json::parse_error& e) {
      throw Error(Error::Code::Parse, std::string("trace record: ") + e.what());
    }
  }
  return tables_from_records(records);
}

mot::MotReport evaluate_node(const RunResult& run, ptrack::SensorId sensor, double cutoff) {
  const TraceTables tables = tables_from_run(run);
  auto it = tables.tracks.find(sensor);
  if (it == tables.tracks.end())
    throw Error(Error::Code::InvalidArgument,
                "run has no output for sensor " + std::to_string(sensor));
  return mot::evaluate(it->second, tables.truth, cutoff);
}

void write_belief_csv(const RunResult& run, std::ostream& out) {
  out << "time,agent,goal,probability\n";
  for (const StepRecord& step : run.steps)
    for (const intent::GoalBelief& b : step.beliefs)
      for (const auto& [goal, p] : b.posterior) {
        write_csv_double(out, step.time);
        out << ',' << b.agent << ',' << goal << ',';
        write_csv_double(out, p);
        out << '\n';
      }
}

void write_concentration_csv(const RunResult& run, AgentId agent, std::ostream& out) {
  out << "time,argmaxGoal,argmaxX,argmaxY,top5Mass\n";
  for (const StepRecord& step : run.steps) {
    const intent::GoalBelief* belief = nullptr;
    for (const intent::GoalBelief& b : step.beliefs)
      if (b.agent == agent) belief = &b;
    if (!belief) continue;
    const GoalId top = belief->argmax();
    std::vector<double> probs;
    probs.reserve(belief->posterior.size());
    for (const auto& [goal, p] : belief->posterior) probs.push_back(p);
    std::sort(probs.begin(), probs.end(), std::greater<>());
    double mass = 0.0;
    for (std::size_t i = 0; i < probs.size() && i < 5; ++i) mass += probs[i];
    const Vec2 pos = run.scenario.goals.at(top).position;
    write_csv_double(out, step.time);
    out << ',' << top << ',';
    write_csv_double(out, pos.x);
    out << ',';
    write_csv_double(out, pos.y);
    out << ',';
    write_csv_double(out, mass);
    out << '\n';
  }
}

void write_metrics_csv(const std::vector<std::pair<std::string, mot::MotReport>>& rows,
                       std::ostream& out) {
  out << "label,mota,motp,meanMatchDistance,misses,falsePositives,idSwitches,truthCount\n";
  for (const auto& [label, r] : rows) {
    out << label << ',';
    write_csv_double(out, r.mota);
    out << ',';
    write_csv_double(out, r.motp);
    out << ',';
    write_csv_double(out, r.meanMatchDistance);
    out << ',' << r.totalMisses << ',' << r.totalFalsePositives << ',' << r.totalIdSwitches << ','
        << r.totalTruth << '\n';
  }
}

}  // namespace intentsim::harness
