#pragma once

#include <filesystem>

#include "windfd/dataset/windows.hpp"
#include "windfd/turbsim/trace_io.hpp"

namespace windfd::dataset {

/// Windows every run listed in `manifest` (trace paths relative to
/// `manifest_dir`) and logs the class histogram. Throws std::invalid_argument
/// for an empty manifest and std::runtime_error naming the run when a trace
/// file is missing or unreadable.
WindowSet build_corpus(const turbsim::CorpusManifest& manifest,
                       const std::filesystem::path& manifest_dir, int window_length = kDefaultWindow,
                       int stride = kDefaultWindow);

}  // namespace windfd::dataset
