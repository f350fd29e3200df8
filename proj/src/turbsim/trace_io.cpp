#include "windfd/turbsim/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace windfd::turbsim {

using nlohmann::json;

json scenario_to_json(const FaultScenario& s) {
  json j;
  j["kind"] = std::string(fault_name(s.kind));
  j["label"] = static_cast<int>(s.kind);
  if (s.pitch_damping) j["pitch_damping"] = *s.pitch_damping;
  if (s.pitch_natural_freq) j["pitch_natural_freq"] = *s.pitch_natural_freq;
  if (s.sensor_gain) j["sensor_gain"] = *s.sensor_gain;
  if (s.fixed_pitch_value) j["fixed_pitch_value"] = *s.fixed_pitch_value;
  if (s.torque_offset) j["torque_offset"] = *s.torque_offset;
  if (s.blade) j["blade"] = *s.blade;
  if (s.interval) j["active_interval"] = {s.interval->start, s.interval->end};
  return j;
}

FaultScenario scenario_from_json(const json& j) {
  FaultScenario s;
  s.kind = parse_fault_kind(j.at("kind").get<std::string>());
  if (j.contains("pitch_damping")) s.pitch_damping = j["pitch_damping"].get<double>();
  if (j.contains("pitch_natural_freq")) s.pitch_natural_freq = j["pitch_natural_freq"].get<double>();
  if (j.contains("sensor_gain")) s.sensor_gain = j["sensor_gain"].get<double>();
  if (j.contains("fixed_pitch_value")) s.fixed_pitch_value = j["fixed_pitch_value"].get<double>();
  if (j.contains("torque_offset")) s.torque_offset = j["torque_offset"].get<double>();
  if (j.contains("blade")) s.blade = j["blade"].get<int>();
  if (j.contains("active_interval"))
    s.interval = ActiveInterval{j["active_interval"].at(0).get<double>(),
                                j["active_interval"].at(1).get<double>()};
  return s;
}

namespace {

constexpr const char* kTraceTag = "# windfd-trace 1";

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

void write_trace(const std::filesystem::path& path, const SensorTrace& trace,
                 const std::string& config_hash) {
  json header;
  header["run_id"] = trace.run_id;
  header["label"] = trace.label();
  header["sample_rate"] = trace.sample_rate;
  header["rows"] = trace.rows();
  header["wind_seed"] = trace.wind_seed;
  header["scenario"] = scenario_to_json(trace.scenario);
  json channels = json::array();
  for (int c = 0; c < kNumChannels; ++c)
    channels.push_back({{"name", kChannelNames[c]}, {"unit", kChannelUnits[c]}});
  header["channels"] = channels;
  if (!config_hash.empty()) header["config_hash"] = config_hash;

  std::string body;
  body.reserve(trace.values.size() * 20 + 256);
  body += kTraceTag;
  body += "\n# ";
  body += header.dump();
  body += '\n';
  for (int c = 0; c < kNumChannels; ++c) {
    if (c) body += ',';
    body += kChannelNames[c];
  }
  body += '\n';
  for (std::size_t r = 0; r < trace.rows(); ++r) {
    for (int c = 0; c < kNumChannels; ++c) {
      if (c) body += ',';
      append_number(body, trace.at(r, c));
    }
    body += '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace " + path.string());
  out << body;
  if (!out) throw std::runtime_error("write failed for trace " + path.string());
}

SensorTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kTraceTag) throw std::runtime_error("not a trace file: " + path.string());
  std::getline(in, line);
  if (line.rfind("# ", 0) != 0) throw std::runtime_error("missing trace header in " + path.string());
  const json header = json::parse(line.substr(2));
  std::getline(in, line);  // column names

  SensorTrace trace;
  trace.run_id = header.at("run_id").get<std::string>();
  trace.sample_rate = header.at("sample_rate").get<double>();
  trace.wind_seed = header.at("wind_seed").get<std::uint64_t>();
  trace.scenario = scenario_from_json(header.at("scenario"));
  const auto rows = header.at("rows").get<std::size_t>();
  trace.values.reserve(rows * kNumChannels);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int c = 0; c < kNumChannels; ++c) {
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) throw std::runtime_error("malformed row in trace " + path.string());
      trace.values.push_back(v);
      p = res.ptr;
      if (c + 1 < kNumChannels) {
        if (p == end || *p != ',') throw std::runtime_error("malformed row in trace " + path.string());
        ++p;
      }
    }
  }
  if (trace.rows() != rows) throw std::runtime_error("truncated trace " + path.string());
  return trace;
}

void write_manifest(const std::filesystem::path& path, const CorpusManifest& manifest) {
  json j;
  j["config_hash"] = manifest.config_hash;
  j["sample_rate"] = manifest.sample_rate;
  json runs = json::array();
  for (const auto& e : manifest.runs)
    runs.push_back({{"run_id", e.run_id},
                    {"file", e.file},
                    {"label", e.label},
                    {"wind_seed", e.wind_seed},
                    {"duration", e.duration}});
  j["runs"] = runs;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
}

CorpusManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  const json j = json::parse(in);
  CorpusManifest m;
  m.config_hash = j.value("config_hash", "");
  m.sample_rate = j.value("sample_rate", 80.0);
  for (const auto& r : j.at("runs"))
    m.runs.push_back({r.at("run_id").get<std::string>(), r.at("file").get<std::string>(),
                      r.at("label").get<int>(), r.at("wind_seed").get<std::uint64_t>(),
                      r.at("duration").get<double>()});
  return m;
}

}  // namespace windfd::turbsim
