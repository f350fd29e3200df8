#include "windfd/dataset/folds.hpp"

#include <algorithm>
#include <stdexcept>

#include "windfd/common/logging.hpp"
#include "windfd/common/random.hpp"

namespace windfd::dataset {

std::vector<std::string> FoldPlan::runs_in_fold(int fold) const {
  std::vector<std::string> out;
  for (const auto& [run, f] : assignments)
    if (f == fold) out.push_back(run);
  return out;
}

namespace {

std::vector<int> fold_of_groups(const FoldPlan& plan, const WindowSet& set) {
  std::vector<int> f(set.run_ids.size());
  for (std::size_t g = 0; g < set.run_ids.size(); ++g) {
    const auto it = plan.assignments.find(set.run_ids[g]);
    if (it == plan.assignments.end())
      throw std::invalid_argument("run '" + set.run_ids[g] + "' is not in the fold plan");
    f[g] = it->second;
  }
  return f;
}

std::vector<std::size_t> select(const FoldPlan& plan, const WindowSet& set, int fold, bool in_fold) {
  if (fold < 0 || fold >= plan.k) throw std::invalid_argument("fold index out of range");
  const auto f = fold_of_groups(plan, set);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < set.size(); ++i)
    if ((f[static_cast<std::size_t>(set.groups[i])] == fold) == in_fold) out.push_back(i);
  return out;
}

}  // namespace

std::vector<std::size_t> FoldPlan::test_indices(const WindowSet& set, int fold) const {
  return select(*this, set, fold, true);
}

std::vector<std::size_t> FoldPlan::train_indices(const WindowSet& set, int fold) const {
  return select(*this, set, fold, false);
}

nlohmann::json FoldPlan::to_json() const {
  return {{"k", k}, {"seed", seed}, {"assignments", assignments}};
}

FoldPlan FoldPlan::from_json(const nlohmann::json& j) {
  FoldPlan p;
  p.k = j.at("k").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.assignments = j.at("assignments").get<std::map<std::string, int>>();
  return p;
}

FoldPlan make_folds(const std::vector<std::string>& run_ids, const std::vector<int>& run_labels,
                    int k, std::uint64_t seed) {
  if (run_ids.size() != run_labels.size()) throw std::invalid_argument("run ids and labels differ in length");
  if (k < 2) throw std::invalid_argument("fold count must be at least 2, got " + std::to_string(k));
  if (static_cast<std::size_t>(k) > run_ids.size())
    throw std::invalid_argument("fold count " + std::to_string(k) + " exceeds the run count " +
                                std::to_string(run_ids.size()));

  std::map<int, std::vector<std::string>> by_class;
  for (std::size_t r = 0; r < run_ids.size(); ++r) by_class[run_labels[r]].push_back(run_ids[r]);

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  int next = 0;
  for (auto& [label, runs] : by_class) {
    if (runs.size() < static_cast<std::size_t>(k))
      log::warn("class " + std::to_string(label) + " has " + std::to_string(runs.size()) +
                " runs for " + std::to_string(k) + " folds; some folds will not test it");
    std::sort(runs.begin(), runs.end());
    Rng rng(derive_seed(seed, "folds", static_cast<std::uint64_t>(label)));
    std::shuffle(runs.begin(), runs.end(), rng);
    for (const auto& run : runs) {
      if (!plan.assignments.emplace(run, next).second)
        throw std::invalid_argument("duplicate run id '" + run + "'");
      next = (next + 1) % k;
    }
  }
  return plan;
}

FoldPlan make_folds(const WindowSet& set, int k, std::uint64_t seed) {
  return make_folds(set.run_ids, set.run_labels, k, seed);
}

}  // namespace windfd::dataset
