#include "windfd/models/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "windfd/common/errors.hpp"
#include "windfd/common/hashing.hpp"

namespace windfd::models {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'W', 'F', 'D', 'C', 'K', 'P', 'T', '1'};

}  // namespace

json TrainingMetadata::to_json() const {
  return {{"epochs", epochs},         {"batch_size", batch_size}, {"optimizer", optimizer},
          {"learning_rate", learning_rate}, {"seed", seed},   {"fold", fold},
          {"train_loss", train_loss}, {"val_loss", val_loss}, {"config_hash", config_hash}};
}

TrainingMetadata TrainingMetadata::from_json(const json& j) {
  TrainingMetadata m;
  m.epochs = j.at("epochs").get<int>();
  m.batch_size = j.at("batch_size").get<int>();
  m.optimizer = j.at("optimizer").get<std::string>();
  m.learning_rate = j.at("learning_rate").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.fold = j.at("fold").get<int>();
  m.train_loss = j.at("train_loss").get<std::vector<double>>();
  m.val_loss = j.at("val_loss").get<std::vector<double>>();
  m.config_hash = j.value("config_hash", "");
  return m;
}

Checkpoint capture(Network& net, std::uint64_t init_seed, TrainingMetadata metadata,
                   const dataset::NormalizationStats& normalization) {
  Checkpoint c;
  c.spec = net.spec();
  c.init_seed = init_seed;
  c.metadata = std::move(metadata);
  c.normalization = normalization;
  for (const auto& p : net.params()) {
    c.names.push_back(p.name);
    c.tensors.emplace_back(p.value->data(), p.value->data() + p.value->size());
  }
  const auto bufs = net.buffers();
  for (std::size_t k = 0; k < bufs.size(); ++k) {
    c.names.push_back("buffer." + std::to_string(k));
    c.tensors.emplace_back(bufs[k]->data(), bufs[k]->data() + bufs[k]->size());
  }
  return c;
}

Network restore(const Checkpoint& ckpt) {
  Network net(ckpt.spec, ckpt.init_seed);
  std::vector<Matf*> targets;
  for (const auto& p : net.params()) targets.push_back(p.value);
  for (auto* b : net.buffers()) targets.push_back(b);
  if (targets.size() != ckpt.tensors.size())
    throw std::invalid_argument("checkpoint holds " + std::to_string(ckpt.tensors.size()) +
                                " tensors, network expects " + std::to_string(targets.size()));
  for (std::size_t k = 0; k < targets.size(); ++k) {
    if (static_cast<std::size_t>(targets[k]->size()) != ckpt.tensors[k].size())
      throw std::invalid_argument("checkpoint tensor '" + ckpt.names[k] + "' has the wrong size");
    std::memcpy(targets[k]->data(), ckpt.tensors[k].data(), sizeof(float) * ckpt.tensors[k].size());
  }
  return net;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  json header;
  header["spec"] = ckpt.spec.to_json();
  header["spec_hash"] = ckpt.spec.hash();
  header["init_seed"] = ckpt.init_seed;
  header["metadata"] = ckpt.metadata.to_json();
  header["normalization"] = ckpt.normalization.to_json();
  header["tensors"] = json::array();
  for (std::size_t k = 0; k < ckpt.tensors.size(); ++k)
    header["tensors"].push_back({{"name", ckpt.names[k]}, {"size", ckpt.tensors[k].size()}});
  const std::string text = header.dump();

  std::string buf(kMagic, sizeof(kMagic));
  const std::uint64_t len = text.size();
  buf.append(reinterpret_cast<const char*>(&len), sizeof(len));
  buf += text;
  for (const auto& t : ckpt.tensors) buf.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(float));
  Fnv1a h;
  h.update(buf.data(), buf.size());
  const std::uint64_t digest = h.digest();
  buf.append(reinterpret_cast<const char*>(&digest), sizeof(digest));

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<std::string>& expected_spec_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < sizeof(kMagic) + 16 || std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
    throw ChecksumError("not a checkpoint file: " + path.string());
  std::uint64_t stored;
  std::memcpy(&stored, buf.data() + buf.size() - sizeof(stored), sizeof(stored));
  Fnv1a h;
  h.update(buf.data(), buf.size() - sizeof(stored));
  if (h.digest() != stored) throw ChecksumError("checkpoint checksum mismatch: " + path.string());

  std::size_t pos = sizeof(kMagic);
  std::uint64_t len;
  std::memcpy(&len, buf.data() + pos, sizeof(len));
  pos += sizeof(len);
  if (pos + len > buf.size()) throw ChecksumError("checkpoint header is truncated");
  const json header = json::parse(buf.substr(pos, len));
  pos += len;

  Checkpoint c;
  c.spec = ModelSpec::from_json(header.at("spec"));
  const auto recorded = header.at("spec_hash").get<std::string>();
  if (c.spec.hash() != recorded) throw ChecksumError("checkpoint spec does not match its recorded hash");
  if (expected_spec_hash && *expected_spec_hash != recorded)
    throw std::invalid_argument("checkpoint spec hash " + recorded + " does not match expected " +
                                *expected_spec_hash);
  c.init_seed = header.at("init_seed").get<std::uint64_t>();
  c.metadata = TrainingMetadata::from_json(header.at("metadata"));
  c.normalization = dataset::NormalizationStats::from_json(header.at("normalization"));
  const std::size_t end = buf.size() - sizeof(stored);
  for (const auto& t : header.at("tensors")) {
    const auto n = t.at("size").get<std::size_t>();
    if (pos + n * sizeof(float) > end) throw ChecksumError("checkpoint tensor data is truncated");
    std::vector<float> v(n);
    std::memcpy(v.data(), buf.data() + pos, n * sizeof(float));
    pos += n * sizeof(float);
    c.names.push_back(t.at("name").get<std::string>());
    c.tensors.push_back(std::move(v));
  }
  if (pos != end) throw ChecksumError("checkpoint has trailing bytes");
  return c;
}

}  // namespace windfd::models
