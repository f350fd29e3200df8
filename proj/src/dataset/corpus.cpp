#include "windfd/dataset/corpus.hpp"

#include <sstream>
#include <stdexcept>

#include "windfd/common/logging.hpp"

namespace windfd::dataset {

WindowSet build_corpus(const turbsim::CorpusManifest& manifest,
                       const std::filesystem::path& manifest_dir, int window_length, int stride) {
  if (manifest.runs.empty()) throw std::invalid_argument("corpus manifest lists no runs");
  window_count(window_length, window_length, stride);  // validates W and stride

  WindowSet set;
  set.window_length = window_length;
  set.stride = stride;
  for (const auto& entry : manifest.runs) {
    const auto path = manifest_dir / entry.file;
    if (!std::filesystem::exists(path))
      throw std::runtime_error("trace file for run '" + entry.run_id + "' not found: " + path.string());
    turbsim::SensorTrace trace;
    try {
      trace = turbsim::read_trace(path);
    } catch (const std::exception& e) {
      throw std::runtime_error("run '" + entry.run_id + "': " + e.what());
    }
    if (trace.label() != entry.label)
      throw std::runtime_error("run '" + entry.run_id + "': trace label " + std::to_string(trace.label()) +
                               " differs from manifest label " + std::to_string(entry.label));
    trace.run_id = entry.run_id;
    set.add_run(trace);
  }

  const auto hist = set.class_histogram();
  std::ostringstream msg;
  msg << "corpus: " << set.run_ids.size() << " runs, " << set.size() << " windows; per class";
  for (std::size_t c = 0; c < hist.size(); ++c) {
    msg << ' ' << c << ':' << hist[c];
    if (hist[c] == 0) log::warn("corpus has no windows of class " + std::to_string(c));
  }
  log::info(msg.str());
  return set;
}

}  // namespace windfd::dataset
