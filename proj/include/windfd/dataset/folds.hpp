#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "windfd/dataset/windows.hpp"

namespace windfd::dataset {

/// Run-level assignment of every run to one of k folds.
struct FoldPlan {
  int k = 10;
  std::uint64_t seed = 0;
  std::map<std::string, int> assignments;  // run_id -> fold

  std::vector<std::string> runs_in_fold(int fold) const;

  /// Window indices whose run is in / not in `fold`.
  std::vector<std::size_t> test_indices(const WindowSet& set, int fold) const;
  std::vector<std::size_t> train_indices(const WindowSet& set, int fold) const;

  nlohmann::json to_json() const;
  static FoldPlan from_json(const nlohmann::json& j);
  bool operator==(const FoldPlan&) const = default;
};

/// Stratified, group-aware split. Runs of each class are shuffled with a
/// seeded stream and dealt round-robin; the deal position carries over from
/// one class to the next so fold sizes differ by at most one. A class with
/// fewer than k runs is still dealt the same way (with a warning) and then
/// leaves some folds without that class. Throws std::invalid_argument when
/// k < 2 or k exceeds the run count.
FoldPlan make_folds(const std::vector<std::string>& run_ids, const std::vector<int>& run_labels,
                    int k, std::uint64_t seed);
FoldPlan make_folds(const WindowSet& set, int k, std::uint64_t seed);

}  // namespace windfd::dataset
