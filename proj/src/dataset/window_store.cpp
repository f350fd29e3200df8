#include "windfd/dataset/window_store.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "windfd/common/errors.hpp"
#include "windfd/common/hashing.hpp"
#include "windfd/turbsim/fault.hpp"

namespace windfd::dataset {

namespace {

constexpr char kMagic[8] = {'W', 'F', 'D', 'W', 'I', 'N', '1', '\0'};

template <class T>
void put(std::string& buf, const T* data, std::size_t n) {
  buf.append(reinterpret_cast<const char*>(data), n * sizeof(T));
}

template <class T>
void get(const std::string& buf, std::size_t& pos, T* data, std::size_t n) {
  const std::size_t bytes = n * sizeof(T);
  if (pos + bytes > buf.size()) throw ChecksumError("window tensor file is truncated");
  std::memcpy(data, buf.data() + pos, bytes);
  pos += bytes;
}

}  // namespace

std::vector<NormalizationStats> fit_fold_stats(const WindowSet& set, const FoldPlan& plan) {
  std::vector<NormalizationStats> stats;
  for (int f = 0; f < plan.k; ++f) stats.push_back(fit_normalizer(set, plan.train_indices(set, f)));
  return stats;
}

void save_dataset(const std::filesystem::path& dir, const StoredDataset& data) {
  const WindowSet& s = data.set;
  s.validate();
  std::filesystem::create_directories(dir);

  std::string buf;
  buf.append(kMagic, sizeof(kMagic));
  const std::uint64_t dims[3] = {s.size(), static_cast<std::uint64_t>(s.window_length), kChannels};
  put(buf, dims, 3);
  put(buf, s.windows.data(), s.windows.size());
  std::vector<std::int32_t> labels(s.labels.begin(), s.labels.end());
  std::vector<std::int32_t> groups(s.groups.begin(), s.groups.end());
  put(buf, labels.data(), labels.size());
  put(buf, groups.data(), groups.size());
  {
    std::ofstream out(dir / "windows.bin", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / "windows.bin").string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  Fnv1a h;
  h.update(buf.data(), buf.size());

  nlohmann::json j;
  j["format"] = "windfd-windows 1";
  j["config_hash"] = data.config_hash;
  j["tensor"] = {{"file", "windows.bin"},
                 {"dtype", "float32"},
                 {"shape", {s.size(), s.window_length, kChannels}},
                 {"checksum", to_hex(h.digest())}};
  j["window_length"] = s.window_length;
  j["stride"] = s.stride;
  j["channels"] = turbsim::kChannelNames;
  nlohmann::json label_map = nlohmann::json::object();
  for (int c = 0; c < turbsim::kNumClasses; ++c)
    label_map[std::to_string(c)] = std::string(turbsim::fault_name(turbsim::fault_from_label(c)));
  j["label_map"] = label_map;
  j["class_histogram"] = s.class_histogram();
  j["runs"] = nlohmann::json::array();
  for (std::size_t r = 0; r < s.run_ids.size(); ++r)
    j["runs"].push_back({{"run_id", s.run_ids[r]}, {"label", s.run_labels[r]}});
  j["fold_plan"] = data.plan.to_json();
  j["normalization"] = nlohmann::json::array();
  for (const auto& st : data.fold_stats) j["normalization"].push_back(st.to_json());

  std::ofstream side(dir / "dataset.json");
  if (!side) throw std::runtime_error("cannot write " + (dir / "dataset.json").string());
  side << j.dump(2) << '\n';
}

StoredDataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream side(dir / "dataset.json");
  if (!side) throw std::runtime_error("cannot open " + (dir / "dataset.json").string());
  const nlohmann::json j = nlohmann::json::parse(side);

  std::ifstream in(dir / "windows.bin", std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + (dir / "windows.bin").string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Fnv1a h;
  h.update(buf.data(), buf.size());
  if (to_hex(h.digest()) != j.at("tensor").at("checksum").get<std::string>())
    throw ChecksumError("window tensor checksum mismatch in " + dir.string());
  if (buf.size() < sizeof(kMagic) || std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
    throw ChecksumError("not a window tensor file: " + (dir / "windows.bin").string());

  StoredDataset d;
  WindowSet& s = d.set;
  std::size_t pos = sizeof(kMagic);
  std::uint64_t dims[3];
  get(buf, pos, dims, 3);
  if (dims[2] != kChannels) throw ChecksumError("unexpected channel count in window tensor");
  s.window_length = static_cast<int>(dims[1]);
  s.stride = j.at("stride").get<int>();
  s.windows.resize(dims[0] * dims[1] * dims[2]);
  get(buf, pos, s.windows.data(), s.windows.size());
  std::vector<std::int32_t> labels(dims[0]), groups(dims[0]);
  get(buf, pos, labels.data(), labels.size());
  get(buf, pos, groups.data(), groups.size());
  s.labels.assign(labels.begin(), labels.end());
  s.groups.assign(groups.begin(), groups.end());
  for (const auto& r : j.at("runs")) {
    s.run_ids.push_back(r.at("run_id").get<std::string>());
    s.run_labels.push_back(r.at("label").get<int>());
  }
  s.validate();
  d.plan = FoldPlan::from_json(j.at("fold_plan"));
  for (const auto& st : j.at("normalization")) d.fold_stats.push_back(NormalizationStats::from_json(st));
  d.config_hash = j.value("config_hash", "");
  return d;
}

}  // namespace windfd::dataset
