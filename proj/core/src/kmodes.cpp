#include "incat/kmodes.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "incat/error.hpp"
#include "incat/rng.hpp"

namespace incat {

using nlohmann::json;

namespace {

std::size_t distance(std::span<const CategoryCode> a, std::span<const CategoryCode> b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

// Indices of the first occurrence of every distinct row, in row order.
struct DistinctRows {
  std::vector<std::size_t> first;     // index of the first occurrence
  std::vector<std::size_t> multiplicity;
};

DistinctRows distinct_rows(const CategoricalMatrix& rows) {
  std::unordered_map<std::string, std::size_t> seen;
  DistinctRows out;
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    auto r = rows.row(i);
    auto [it, fresh] = seen.emplace(std::string(reinterpret_cast<const char*>(r.data()), r.size()), out.first.size());
    if (fresh) {
      out.first.push_back(i);
      out.multiplicity.push_back(0);
    }
    ++out.multiplicity[it->second];
  }
  return out;
}

std::vector<std::size_t> distinct_row_indices(const CategoricalMatrix& rows) { return distinct_rows(rows).first; }

void check_k(const CategoricalMatrix& rows, std::size_t k, std::size_t distinct) {
  if (rows.empty()) throw ValidationError("k-modes: no rows");
  if (k < 1) throw ValidationError("k-modes: k must be at least 1");
  if (k > distinct)
    throw ValidationError("k-modes: k=" + std::to_string(k) + " exceeds the " + std::to_string(distinct) +
                          " distinct rows");
}

// Most frequent code per column among `members`; ties go to the lowest code.
CategoricalVector plurality(const CategoricalMatrix& rows, std::span<const std::size_t> members,
                            const std::vector<std::size_t>& cardinality) {
  CategoricalVector mode;
  mode.codes.resize(rows.cols());
  std::vector<std::size_t> counts;
  for (std::size_t c = 0; c < rows.cols(); ++c) {
    counts.assign(cardinality[c], 0);
    for (auto m : members) ++counts[rows.row(m)[c]];
    const auto best = std::max_element(counts.begin(), counts.end());  // first max = lowest code
    mode.codes[c] = static_cast<CategoryCode>(best - counts.begin());
  }
  return mode;
}

std::size_t nearest_mode(std::span<const CategoryCode> row, const std::vector<CategoricalVector>& modes) {
  std::size_t best = 0;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (std::size_t j = 0; j < modes.size(); ++j) {
    const auto d = distance(row, modes[j].codes);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

std::vector<std::size_t> assign_all(const CategoricalMatrix& rows, const std::vector<CategoricalVector>& modes) {
  std::vector<std::size_t> out(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) out[i] = nearest_mode(rows.row(i), modes);
  return out;
}

std::uint64_t total_cost(const CategoricalMatrix& rows, const std::vector<std::size_t>& assign,
                         const std::vector<CategoricalVector>& modes) {
  std::uint64_t cost = 0;
  for (std::size_t i = 0; i < rows.rows(); ++i) cost += distance(rows.row(i), modes[assign[i]].codes);
  return cost;
}

std::vector<std::vector<std::size_t>> members_of(const std::vector<std::size_t>& assign, std::size_t k) {
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < assign.size(); ++i) members[assign[i]].push_back(i);
  return members;
}

} // namespace

std::string_view to_string(InitMethod m) { return m == InitMethod::Huang ? "huang" : "random"; }

InitMethod init_method_from_string(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "huang") return InitMethod::Huang;
  if (lower == "random") return InitMethod::Random;
  throw ValidationError("unknown init method '" + std::string(s) + "' (expected huang or random)");
}

std::vector<std::size_t> ClusterModel::cluster_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (auto a : assignments) ++sizes.at(a);
  return sizes;
}

std::size_t hamming_dissimilarity(std::span<const CategoryCode> a, std::span<const CategoryCode> b) {
  if (a.size() != b.size())
    throw ValidationError("hamming: vectors of width " + std::to_string(a.size()) + " and " +
                          std::to_string(b.size()) + " come from different schemas");
  return distance(a, b);
}

std::size_t count_distinct_rows(const CategoricalMatrix& rows) { return distinct_row_indices(rows).size(); }

std::vector<CategoricalVector> init_modes(const CategoricalMatrix& rows, std::size_t k, InitMethod method,
                                          std::uint64_t seed) {
  const auto unique = distinct_rows(rows);
  auto distinct = unique.first;
  check_k(rows, k, distinct.size());
  Rng rng(seed);
  std::vector<CategoricalVector> modes;
  modes.reserve(k);

  if (method == InitMethod::Random) {
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(distinct.size() - i));
      std::swap(distinct[i], distinct[j]);
      modes.push_back(rows.vector(distinct[i]));
    }
    return modes;
  }

  // Huang: frequency-weighted provisional modes snapped to real rows.
  const auto card = rows.column_cardinalities();
  const std::size_t n = rows.rows();
  std::vector<std::vector<std::size_t>> freq(rows.cols());
  for (std::size_t c = 0; c < rows.cols(); ++c) {
    freq[c].assign(card[c], 0);
    for (std::size_t i = 0; i < n; ++i) ++freq[c][rows.row(i)[c]];
  }

  std::vector<CategoricalVector> provisional(k);
  for (std::size_t m = 0; m < k; ++m) {
    auto& codes = provisional[m].codes;
    codes.resize(rows.cols());
    for (std::size_t c = 0; c < rows.cols(); ++c) {
      // k=1: no randomness to spend, so use the plurality outright.
      if (k == 1) {
        codes[c] = static_cast<CategoryCode>(std::max_element(freq[c].begin(), freq[c].end()) - freq[c].begin());
        continue;
      }
      auto draw = rng.below(n);
      std::size_t code = 0;
      while (draw >= freq[c][code]) draw -= freq[c][code++];
      codes[c] = static_cast<CategoryCode>(code);
    }
  }

  std::vector<bool> taken(distinct.size(), false);
  for (const auto& p : provisional) {
    std::size_t best = distinct.size();
    std::size_t best_d = std::numeric_limits<std::size_t>::max();
    for (std::size_t d = 0; d < distinct.size(); ++d) {
      if (taken[d]) continue;
      const auto dist = distance(rows.row(distinct[d]), p.codes);
      // Equally near rows: the most duplicated wins, then the earliest.
      if (dist < best_d || (dist == best_d && unique.multiplicity[d] > unique.multiplicity[best])) {
        best_d = dist;
        best = d;
      }
    }
    taken[best] = true;
    modes.push_back(rows.vector(distinct[best]));
  }
  return modes;
}

ClusterModel fit(const CategoricalMatrix& rows, const FitOptions& opts) {
  const std::size_t distinct = count_distinct_rows(rows);
  check_k(rows, opts.k, distinct);
  const std::size_t k = opts.k;
  const auto card = rows.column_cardinalities();

  ClusterModel model;
  model.k = k;
  model.seed = opts.seed;
  model.init = opts.init;
  model.modes = init_modes(rows, k, opts.init, opts.seed);
  model.assignments = assign_all(rows, model.modes);
  model.cost_trace.push_back(total_cost(rows, model.assignments, model.modes));

  auto& modes = model.modes;
  auto& assign = model.assignments;
  while (model.iterations < opts.max_iter) {
    ++model.iterations;

    auto members = members_of(assign, k);
    for (std::size_t j = 0; j < k; ++j) {
      if (!members[j].empty()) modes[j] = plurality(rows, members[j], card);
    }

    // Empty clusters take the worst-fitting row from a cluster that can spare one.
    for (std::size_t j = 0; j < k; ++j) {
      if (!members[j].empty()) continue;
      std::size_t worst = rows.rows();
      std::size_t worst_d = 0;
      for (std::size_t i = 0; i < rows.rows(); ++i) {
        if (members[assign[i]].size() < 2) continue;
        const auto d = distance(rows.row(i), modes[assign[i]].codes);
        if (worst == rows.rows() || d > worst_d) {
          worst = i;
          worst_d = d;
        }
      }
      if (worst == rows.rows()) break;
      const std::size_t donor = assign[worst];
      auto& donor_members = members[donor];
      donor_members.erase(std::find(donor_members.begin(), donor_members.end(), worst));
      members[j].push_back(worst);
      assign[worst] = j;
      modes[j] = rows.vector(worst);
      modes[donor] = plurality(rows, donor_members, card);
    }

    auto next = assign_all(rows, modes);
    model.cost_trace.push_back(total_cost(rows, next, modes));
    const bool stable = next == assign;
    assign = std::move(next);
    if (stable) break;
  }
  model.cost = model.cost_trace.back();
  return model;
}

ClusterModel fit_best(const CategoricalMatrix& rows, const FitOptions& opts, std::size_t restarts) {
  if (restarts < 1) throw ValidationError("fit_best: restarts must be at least 1");
  ClusterModel best;
  for (std::size_t r = 0; r < restarts; ++r) {
    FitOptions o = opts;
    o.seed = opts.seed + r;
    auto model = fit(rows, o);
    if (r == 0 || model.cost < best.cost) best = std::move(model);
  }
  return best;
}

std::vector<std::uint64_t> ElbowReport::running_min() const {
  std::vector<std::uint64_t> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(out.empty() ? e.cost : std::min(out.back(), e.cost));
  return out;
}

ElbowReport sweep_k(const CategoricalMatrix& rows, std::size_t k_min, std::size_t k_max, InitMethod method,
                    std::uint64_t seed, std::size_t restarts, std::size_t max_iter) {
  const auto distinct = count_distinct_rows(rows);
  if (k_min < 1 || k_min > k_max || k_max > distinct)
    throw ValidationError("sweep_k: need 1 <= kmin <= kmax <= " + std::to_string(distinct) + " (distinct rows), got [" +
                          std::to_string(k_min) + ", " + std::to_string(k_max) + "]");
  ElbowReport report;
  report.init = method;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    const auto model = fit_best(rows, {k, method, seed, max_iter}, restarts);
    report.entries.push_back({k, model.cost, restarts, seed});
  }
  return report;
}

json model_to_json(const ClusterModel& model, const FeatureSchema& schema) {
  json modes = json::array();
  for (const auto& m : model.modes) modes.push_back(vector_to_json(m, schema));
  return json{{"k", model.k},
              {"init", to_string(model.init)},
              {"seed", model.seed},
              {"cost", model.cost},
              {"iterations", model.iterations},
              {"modes", std::move(modes)},
              {"assignments", model.assignments}};
}

ClusterModel model_from_json(const json& j, const FeatureSchema& schema) {
  ClusterModel m;
  try {
    m.k = j.at("k").get<std::size_t>();
    m.init = init_method_from_string(j.at("init").get<std::string>());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.cost = j.at("cost").get<std::uint64_t>();
    m.iterations = j.at("iterations").get<std::size_t>();
    for (const auto& mode : j.at("modes")) m.modes.push_back(vector_from_json(mode, schema));
    m.assignments = j.at("assignments").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("cluster model: ") + e.what());
  }
  if (m.modes.size() != m.k) throw ValidationError("cluster model: mode count does not match k");
  for (auto a : m.assignments) {
    if (a >= m.k) throw ValidationError("cluster model: assignment out of range");
  }
  return m;
}

json elbow_to_json(const ElbowReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries)
    entries.push_back({{"k", e.k}, {"cost", e.cost}, {"restarts", e.restarts}, {"seed", e.seed}});
  return json{{"init", to_string(report.init)}, {"entries", std::move(entries)}, {"running_min", report.running_min()}};
}

ElbowReport elbow_from_json(const json& j) {
  ElbowReport r;
  try {
    r.init = init_method_from_string(j.at("init").get<std::string>());
    for (const auto& e : j.at("entries")) {
      r.entries.push_back({e.at("k").get<std::size_t>(), e.at("cost").get<std::uint64_t>(),
                           e.at("restarts").get<std::size_t>(), e.at("seed").get<std::uint64_t>()});
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("elbow report: ") + e.what());
  }
  return r;
}

} // namespace incat
