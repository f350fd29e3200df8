#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace windfd::models {

enum class Architecture { SimpleCnn, MultiHeaded, Casu2Net };

Architecture parse_architecture(std::string_view text);  // "simple-cnn", "multi-headed", "casu2net"
std::string_view architecture_name(Architecture arch);

struct LayerSpec {
  std::string type;             // conv2d | convlstm | batchnorm | dense | dropout | flatten
  int units = 0;                // filters (conv2d, convlstm) or units (dense)
  int kernel_h = 1, kernel_w = 1;
  std::string padding = "same"; // conv2d only; convlstm is always same
  std::string activation = "linear";  // convlstm: tanh | relu
  double rate = 0.0;            // dropout
  bool peepholes = true;        // convlstm

  nlohmann::json to_json() const;
  static LayerSpec from_json(const nlohmann::json& j);
  bool operator==(const LayerSpec&) const = default;
};

/// Network input: `steps` frames of (channels, height, width), each frame a
/// contiguous row-major (height, width, channels) block of one sample.
struct InputSpec {
  int steps = 1;
  int channels = 5;
  int height = 125;
  int width = 1;
  int frame_values() const { return channels * height * width; }
  int sample_values() const { return steps * frame_values(); }
  bool operator==(const InputSpec&) const = default;
};

/// Graph template shared by the three classifiers. Every branch consumes the
/// input, runs its recurrent layers (if any) then its matrix layers, and ends
/// flat. "single" fusion concatenates the branches into `head`. "two_step"
/// concatenates the branches (fusion1), runs a copy of `block` on each branch
/// output and on fusion1, concatenates those (fusion2) and feeds `head`.
/// `head` ends with the class logits; softmax is applied outside the graph.
struct ModelSpec {
  Architecture architecture = Architecture::Casu2Net;
  int n_classes = 8;
  InputSpec input;
  std::vector<std::vector<LayerSpec>> branches;
  std::string fusion = "single";
  std::vector<LayerSpec> block;
  std::vector<LayerSpec> head;

  static ModelSpec simple_cnn();
  static ModelSpec multi_headed();
  static ModelSpec casu2net();
  static ModelSpec for_architecture(Architecture arch);

  /// Same graph with every dropout rate replaced.
  ModelSpec with_dropout(double rate) const;

  /// Throws std::invalid_argument naming the offending layer.
  void validate() const;

  nlohmann::json to_json() const;
  static ModelSpec from_json(const nlohmann::json& j);
  /// FNV-1a of the canonical JSON dump, as 16 hex digits.
  std::string hash() const;
  bool operator==(const ModelSpec&) const = default;
};

}  // namespace windfd::models
