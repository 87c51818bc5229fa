#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "incat/schema.hpp"

namespace incat {

enum class InitMethod { Huang, Random };

std::string_view to_string(InitMethod m);
InitMethod init_method_from_string(std::string_view s);  // "huang" | "random", any case

struct ClusterModel {
  std::size_t k = 0;
  std::vector<CategoricalVector> modes;
  std::vector<std::size_t> assignments;
  std::uint64_t cost = 0;
  std::uint64_t seed = 0;
  InitMethod init = InitMethod::Huang;
  std::size_t iterations = 0;
  // Total cost after each iteration's reassignment step.
  std::vector<std::uint64_t> cost_trace;

  std::vector<std::size_t> cluster_sizes() const;
};

struct FitOptions {
  std::size_t k = 10;
  InitMethod init = InitMethod::Huang;
  std::uint64_t seed = 0;
  std::size_t max_iter = 100;
};

// Number of positions where the vectors differ. Throws ValidationError if
// the lengths differ.
std::size_t hamming_dissimilarity(std::span<const CategoryCode> a, std::span<const CategoryCode> b);
inline std::size_t hamming_dissimilarity(const CategoricalVector& a, const CategoricalVector& b) {
  return hamming_dissimilarity(std::span<const CategoryCode>(a.codes),
                               std::span<const CategoryCode>(b.codes));
}

std::size_t count_distinct_rows(const CategoricalMatrix& rows);

/// Initial modes for k-modes.
///
/// Random: k distinct rows drawn uniformly without replacement.
/// Huang: provisional modes whose values are drawn per attribute in
/// proportion to category frequency (the first provisional mode takes the
/// per-attribute plurality instead), each then replaced by the nearest
/// distinct data row not already taken.
///
/// Requires 1 <= k <= distinct rows.
std::vector<CategoricalVector> init_modes(const CategoricalMatrix& rows, std::size_t k,
                                          InitMethod method, std::uint64_t seed);

/// Lloyd-style k-modes: assign to the nearest mode (ties to the lowest
/// cluster index), recompute modes as per-attribute pluralities (ties to the
/// lowest code), repeat until assignments stop changing or max_iter.
/// An empty cluster takes the row with the largest dissimilarity to its own
/// mode before the modes are recomputed.
ClusterModel fit(const CategoricalMatrix& rows, const FitOptions& opts);

// Lowest-cost model over seeds seed, seed+1, ..., seed+restarts-1. Ties keep
// the earliest restart.
ClusterModel fit_best(const CategoricalMatrix& rows, const FitOptions& opts, std::size_t restarts);

struct ElbowEntry {
  std::size_t k = 0;
  std::uint64_t cost = 0;
  std::size_t restarts = 0;
  std::uint64_t seed = 0;
};

struct ElbowReport {
  InitMethod init = InitMethod::Huang;
  std::vector<ElbowEntry> entries;

  // Running minimum of cost over increasing k.
  std::vector<std::uint64_t> running_min() const;
};

ElbowReport sweep_k(const CategoricalMatrix& rows, std::size_t k_min, std::size_t k_max,
                    InitMethod method, std::uint64_t seed, std::size_t restarts,
                    std::size_t max_iter = 100);

// {k, init, seed, cost, iterations, modes:[{...}], assignments:[...]}
nlohmann::json model_to_json(const ClusterModel& model, const FeatureSchema& schema);
ClusterModel model_from_json(const nlohmann::json& j, const FeatureSchema& schema);
nlohmann::json elbow_to_json(const ElbowReport& report);
ElbowReport elbow_from_json(const nlohmann::json& j);

} // namespace incat
