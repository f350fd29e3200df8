#include "windfd/models/model_spec.hpp"

#include <stdexcept>

#include "windfd/common/hashing.hpp"

namespace windfd::models {

using nlohmann::json;

Architecture parse_architecture(std::string_view text) {
  if (text == "simple-cnn" || text == "simple_cnn" || text == "SimpleCNN") return Architecture::SimpleCnn;
  if (text == "multi-headed" || text == "multi_headed" || text == "MultiHeaded") return Architecture::MultiHeaded;
  if (text == "casu2net" || text == "CASU2Net") return Architecture::Casu2Net;
  throw std::invalid_argument("unknown architecture '" + std::string(text) + "'");
}

std::string_view architecture_name(Architecture arch) {
  switch (arch) {
    case Architecture::SimpleCnn: return "simple-cnn";
    case Architecture::MultiHeaded: return "multi-headed";
    case Architecture::Casu2Net: return "casu2net";
  }
  throw std::invalid_argument("unknown architecture");
}

json LayerSpec::to_json() const {
  json j{{"type", type}};
  if (type == "conv2d" || type == "convlstm") {
    j["filters"] = units;
    j["kernel"] = {kernel_h, kernel_w};
  }
  if (type == "conv2d") j["padding"] = padding;
  if (type == "conv2d" || type == "dense" || type == "convlstm") j["activation"] = activation;
  if (type == "dense") j["units"] = units;
  if (type == "dropout") j["rate"] = rate;
  if (type == "convlstm") j["peepholes"] = peepholes;
  return j;
}

LayerSpec LayerSpec::from_json(const json& j) {
  LayerSpec l;
  l.type = j.at("type").get<std::string>();
  if (j.contains("filters")) l.units = j["filters"].get<int>();
  if (j.contains("units")) l.units = j["units"].get<int>();
  if (j.contains("kernel")) {
    l.kernel_h = j["kernel"].at(0).get<int>();
    l.kernel_w = j["kernel"].at(1).get<int>();
  }
  l.padding = j.value("padding", "same");
  l.activation = j.value("activation", l.type == "convlstm" ? "tanh" : "linear");
  l.rate = j.value("rate", 0.0);
  l.peepholes = j.value("peepholes", true);
  return l;
}

namespace {

LayerSpec conv(int f, int kh, int kw, const char* padding) {
  return {"conv2d", f, kh, kw, padding, "relu", 0.0, true};
}
LayerSpec convlstm(int f, int kw) { return {"convlstm", f, 1, kw, "same", "tanh", 0.0, true}; }
LayerSpec dense(int u, const char* act) { return {"dense", u, 1, 1, "same", act, 0.0, true}; }
LayerSpec dropout(double r) { return {"dropout", 0, 1, 1, "same", "linear", r, true}; }
LayerSpec batchnorm() { return {"batchnorm", 0, 1, 1, "same", "linear", 0.0, true}; }
LayerSpec flatten() { return {"flatten", 0, 1, 1, "same", "linear", 0.0, true}; }

std::vector<LayerSpec> fc_block() { return {batchnorm(), dense(128, "relu"), dropout(0.5), dense(64, "relu")}; }

}  // namespace

ModelSpec ModelSpec::simple_cnn() {
  ModelSpec s;
  s.architecture = Architecture::SimpleCnn;
  s.input = {1, 5, 125, 1};
  s.branches = {{conv(32, 3, 1, "same"), conv(32, 3, 1, "same"), batchnorm(), conv(64, 3, 1, "same"),
                 conv(64, 3, 1, "same"), dropout(0.8), flatten()}};
  s.fusion = "single";
  s.head = fc_block();
  s.head.push_back(dense(s.n_classes, "linear"));
  return s;
}

ModelSpec ModelSpec::multi_headed() {
  ModelSpec s;
  s.architecture = Architecture::MultiHeaded;
  s.input = {1, 1, 125, 5};
  for (auto [f, kh] : {std::pair{100, 1}, {90, 7}, {80, 20}})
    s.branches.push_back({conv(f, kh, 5, "valid"), batchnorm(), dropout(0.2), flatten()});
  s.fusion = "single";
  s.head = fc_block();
  s.head.push_back(dense(s.n_classes, "linear"));
  return s;
}

ModelSpec ModelSpec::casu2net() {
  ModelSpec s;
  s.architecture = Architecture::Casu2Net;
  s.input = {5, 5, 1, 25};
  s.branches = {{convlstm(32, 5), convlstm(32, 5), flatten()},
                {convlstm(32, 5), convlstm(32, 5), convlstm(64, 5), flatten()},
                {convlstm(32, 5), convlstm(32, 5), convlstm(64, 3), convlstm(64, 3), flatten()}};
  s.fusion = "two_step";
  s.block = fc_block();
  s.head = {dense(s.n_classes, "linear")};
  return s;
}

ModelSpec ModelSpec::for_architecture(Architecture arch) {
  switch (arch) {
    case Architecture::SimpleCnn: return simple_cnn();
    case Architecture::MultiHeaded: return multi_headed();
    case Architecture::Casu2Net: return casu2net();
  }
  throw std::invalid_argument("unknown architecture");
}

ModelSpec ModelSpec::with_dropout(double rate) const {
  ModelSpec s = *this;
  auto set = [rate](std::vector<LayerSpec>& layers) {
    for (auto& l : layers)
      if (l.type == "dropout") l.rate = rate;
  };
  for (auto& b : s.branches) set(b);
  set(s.block);
  set(s.head);
  return s;
}

void ModelSpec::validate() const {
  if (n_classes < 2) throw std::invalid_argument("n_classes must be at least 2");
  if (input.steps <= 0 || input.channels <= 0 || input.height <= 0 || input.width <= 0)
    throw std::invalid_argument("input dimensions must be positive");
  if (branches.empty()) throw std::invalid_argument("model has no branches");
  if (fusion != "single" && fusion != "two_step")
    throw std::invalid_argument("fusion must be 'single' or 'two_step', got '" + fusion + "'");
  if (fusion == "two_step" && block.empty()) throw std::invalid_argument("two_step fusion needs a block");
  if (head.empty() || head.back().type != "dense" || head.back().units != n_classes ||
      head.back().activation != "linear")
    throw std::invalid_argument("head must end with a linear dense layer of n_classes units");

  auto check = [](const LayerSpec& l, const std::string& where) {
    const std::string tag = where + " (" + l.type + ")";
    if (l.type == "conv2d" || l.type == "convlstm") {
      if (l.units <= 0) throw std::invalid_argument(tag + ": filters must be positive");
      if (l.kernel_h <= 0 || l.kernel_w <= 0) throw std::invalid_argument(tag + ": kernel must be positive");
      if (l.type == "conv2d" && l.padding != "same" && l.padding != "valid")
        throw std::invalid_argument(tag + ": padding must be 'same' or 'valid'");
    } else if (l.type == "dense") {
      if (l.units <= 0) throw std::invalid_argument(tag + ": units must be positive");
    } else if (l.type == "dropout") {
      if (!(l.rate >= 0.0 && l.rate < 1.0)) throw std::invalid_argument(tag + ": rate must be in [0, 1)");
    } else if (l.type != "batchnorm" && l.type != "flatten") {
      throw std::invalid_argument(tag + ": unknown layer type");
    }
    if ((l.type == "conv2d" || l.type == "dense") && l.activation != "relu" && l.activation != "linear")
      throw std::invalid_argument(tag + ": activation must be 'relu' or 'linear'");
    if (l.type == "convlstm" && l.activation != "tanh" && l.activation != "relu")
      throw std::invalid_argument(tag + ": activation must be 'tanh' or 'relu'");
  };
  for (std::size_t b = 0; b < branches.size(); ++b) {
    if (branches[b].empty()) throw std::invalid_argument("branch " + std::to_string(b + 1) + " is empty");
    bool matrix_seen = false;
    for (std::size_t k = 0; k < branches[b].size(); ++k) {
      const auto& l = branches[b][k];
      const std::string where = "branch " + std::to_string(b + 1) + " layer " + std::to_string(k + 1);
      check(l, where);
      if (l.type == "convlstm" && matrix_seen)
        throw std::invalid_argument(where + " (convlstm): recurrent layers must lead the branch");
      if (l.type != "convlstm") matrix_seen = true;
      if (l.type == "conv2d" && input.steps != 1)
        throw std::invalid_argument(where + " (conv2d): needs a single-step input");
    }
  }
  for (std::size_t k = 0; k < block.size(); ++k) check(block[k], "block layer " + std::to_string(k + 1));
  for (std::size_t k = 0; k < head.size(); ++k) check(head[k], "head layer " + std::to_string(k + 1));
}

json ModelSpec::to_json() const {
  auto list = [](const std::vector<LayerSpec>& ls) {
    json a = json::array();
    for (const auto& l : ls) a.push_back(l.to_json());
    return a;
  };
  json j;
  j["architecture"] = std::string(architecture_name(architecture));
  j["n_classes"] = n_classes;
  j["input"] = {{"steps", input.steps}, {"channels", input.channels}, {"height", input.height},
                {"width", input.width}};
  j["branches"] = json::array();
  for (const auto& b : branches) j["branches"].push_back(list(b));
  j["fusion"] = fusion;
  j["block"] = list(block);
  j["head"] = list(head);
  return j;
}

ModelSpec ModelSpec::from_json(const json& j) {
  auto list = [](const json& a) {
    std::vector<LayerSpec> ls;
    for (const auto& l : a) ls.push_back(LayerSpec::from_json(l));
    return ls;
  };
  ModelSpec s;
  s.architecture = parse_architecture(j.at("architecture").get<std::string>());
  s.n_classes = j.at("n_classes").get<int>();
  const auto& in = j.at("input");
  s.input = {in.at("steps").get<int>(), in.at("channels").get<int>(), in.at("height").get<int>(),
             in.at("width").get<int>()};
  for (const auto& b : j.at("branches")) s.branches.push_back(list(b));
  s.fusion = j.at("fusion").get<std::string>();
  s.block = list(j.value("block", json::array()));
  s.head = list(j.at("head"));
  return s;
}

std::string ModelSpec::hash() const { return to_hex(fnv1a(to_json().dump())); }

}  // namespace windfd::models
