// Copyright 2026 The tirforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tirforge/answer_equiv.hpp"
#include "tirforge/error.hpp"
#include "tirforge/sandbox.hpp"
#include "tirforge/schema.hpp"

namespace tirforge {

enum class FilterLevel { kNone, kExecOk, kExecAndCorrect };
enum class FilterScope { kChosenOnly, kBoth };

struct FilterPolicy {
  FilterLevel level = FilterLevel::kExecOk;
  FilterScope applies_to = FilterScope::kChosenOnly;
};

std::string_view to_string(FilterLevel level) noexcept;
std::string_view to_string(FilterScope scope) noexcept;
std::optional<FilterLevel> parse_filter_level(std::string_view text);
std::optional<FilterScope> parse_filter_scope(std::string_view text);

using ProblemIndex = std::unordered_map<std::string, Problem>;

// Throws DuplicateId.
ProblemIndex index_problems(std::span<const Problem> problems);

struct BuildContext {
  const ProblemIndex* problems = nullptr;
  FilterPolicy policy;
  // Required unless policy.level is kNone.
  const Sandbox* sandbox = nullptr;
  ExecLimits limits;
  EquivConfig equiv;
  std::size_t workers = 1;
};

// Why a record was kept or dropped; order matches the input records.
struct FilterDecision {
  std::string problem_id;
  bool kept = true;
  std::string reason;
};

// Transcript layout: reasoning paragraph, one ```python block, an "Outputs:"
// section with one claimed line per row, then "Final answer: \boxed{...}".
// Deterministic.
std::string render_solution(const Problem& problem, const Solution& solution);

std::vector<FilterDecision> apply_filter(std::span<const TeacherRecord> records,
                                         const BuildContext& ctx);

// Two rows per kept record, chosen first, ids "<problem id>#<A|B>".
std::vector<SFTExample> build_sft_dataset(std::span<const TeacherRecord> records,
                                          const BuildContext& ctx,
                                          std::vector<FilterDecision>* decisions = nullptr);

// One pair per kept record: rendered chosen solution wins over the rendered
// counter solution.
std::vector<PreferencePair> build_dpo_pairs(std::span<const TeacherRecord> records,
                                            const BuildContext& ctx,
                                            std::vector<FilterDecision>* decisions = nullptr);

// Problem id an SFT row was generated from.
std::string problem_id_of(const SFTExample& example);
inline const std::string& problem_id_of(const PreferencePair& pair) { return pair.id; }

// Deterministic permutation of [0, n) driven by mt19937_64 with unbiased
// bounded draws, identical across standard library implementations.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

template <class T>
struct Split {
  std::vector<T> train;
  std::vector<T> val;
};

// Groups rows by problem id (first-appearance order), optionally shuffles the
// groups with `seed`, and puts the first ceil(ratio * groups) groups in
// train. Rows of one problem never straddle the split.
template <class T, class KeyFn>
Split<T> split_train_val(std::span<const T> rows, double ratio, std::optional<std::uint64_t> seed,
                         KeyFn key) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw PreconditionError("split ratio must be in (0, 1)");
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string k = key(rows[i]);
    auto [it, fresh] = members.try_emplace(k);
    if (fresh) order.push_back(k);
    it->second.push_back(i);
  }
  if (seed) {
    auto perm = seeded_permutation(order.size(), *seed);
    std::vector<std::string> shuffled;
    shuffled.reserve(order.size());
    for (auto p : perm) shuffled.push_back(order[p]);
    order = std::move(shuffled);
  }
  // The epsilon keeps 0.9 * 10000 from rounding up to 9001.
  auto n_train = static_cast<std::size_t>(
      std::ceil(ratio * static_cast<double>(order.size()) - 1e-9));
  Split<T> out;
  for (std::size_t g = 0; g < order.size(); ++g) {
    auto& dest = g < n_train ? out.train : out.val;
    for (auto i : members[order[g]]) dest.push_back(rows[i]);
  }
  return out;
}

template <class T>
Split<T> split_train_val(std::span<const T> rows, double ratio,
                         std::optional<std::uint64_t> seed = std::nullopt) {
  return split_train_val(rows, ratio, seed,
                         [](const T& r) { return std::string(problem_id_of(r)); });
}

struct Manifest {
  std::size_t records = 0;
  std::size_t kept_records = 0;
  std::size_t sft_examples = 0;
  std::size_t dpo_pairs = 0;
  std::size_t train = 0;
  std::size_t val = 0;
  double split_ratio = 0.9;
  std::optional<std::uint64_t> seed;
  FilterPolicy policy;
  std::map<std::string, std::string> tool_versions;
};

// Stable, timestamp-free JSON so identical runs produce identical bytes. The
// manifest holds one section per stage ("sft", "dpo"); writing a stage keeps
// the other sections of an existing file.
std::string render_manifest(std::string_view existing, std::string_view stage, const Manifest& m);
void write_manifest(const std::filesystem::path& path, std::string_view stage, const Manifest& m);

}  // namespace tirforge
