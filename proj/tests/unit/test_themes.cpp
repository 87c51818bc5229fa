#include <map>
#include <set>
#include <numeric>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "incat/error.hpp"
#include "incat/rng.hpp"
#include "incat/themes.hpp"
#include "synthetic.hpp"

using namespace incat;

TEST(CombinationStats, IdenticalRows) {
  CategoricalMatrix m(7);
  for (int i = 0; i < 5; ++i) m.push_back(incat::testing::published_mode_vectors()[0]);
  const auto s = combination_stats(m);
  ASSERT_EQ(s.combos.size(), 1u);
  EXPECT_EQ(s.combos[0].count, 5u);
  EXPECT_EQ(s.total_rows, 5u);
}

TEST(CombinationStats, OrderingAndSums) {
  CategoricalMatrix m(2);
  for (auto r : std::vector<std::vector<CategoryCode>>{{1, 1}, {0, 2}, {1, 1}, {0, 1}, {0, 2}, {2, 0}}) m.push_back(r);
  const auto s = combination_stats(m);
  ASSERT_EQ(s.combos.size(), 4u);
  // Two combos with count 2, ordered canonically; then two singletons.
  EXPECT_EQ(s.combos[0].vector, (CategoricalVector{{0, 2}}));
  EXPECT_EQ(s.combos[1].vector, (CategoricalVector{{1, 1}}));
  EXPECT_EQ(s.combos[2].vector, (CategoricalVector{{0, 1}}));
  EXPECT_EQ(s.combos[3].vector, (CategoricalVector{{2, 0}}));
}

TEST(CombinationStats, PropertiesOnSyntheticSample) {
  const auto sample = incat::testing::sample_published_modes(3000, 0.1, 12);
  const auto s = combination_stats(sample.rows);
  std::size_t sum = 0;
  for (const auto& c : s.combos) sum += c.count;
  EXPECT_EQ(sum, s.total_rows);
  EXPECT_LE(s.combos.size(), std::min<std::uint64_t>(3000, FeatureSchema::cvss_v3().combination_count()));
  double previous = 0.0;
  for (std::size_t m = 0; m <= s.combos.size() + 2; ++m) {
    const auto c = coverage_top_m(s, m);
    EXPECT_GE(c, previous);
    previous = c;
  }
  EXPECT_DOUBLE_EQ(coverage_top_m(s, 0), 0.0);
  EXPECT_DOUBLE_EQ(coverage_top_m(s, s.combos.size()), 1.0);
}

TEST(Coverage, EmptyTableThrows) {
  EXPECT_THROW(coverage_top_m(combination_stats(CategoricalMatrix(7)), 3), ValidationError);
}

TEST(CombosReport, Shape) {
  const auto sample = incat::testing::sample_published_modes(500, 0.05, 3);
  const auto s = combination_stats(sample.rows);
  const auto j = combos_report(s, FeatureSchema::cvss_v3(), 5);
  EXPECT_EQ(j.at("possible"), 1296);
  EXPECT_EQ(j.at("observed"), s.combos.size());
  EXPECT_EQ(j.at("total"), 500);
  EXPECT_EQ(j.at("combos").size(), 5u);
  EXPECT_EQ(j.at("coverage_curve").back().at(1).get<double>(), 1.0);

  const auto empty = combos_report(combination_stats(CategoricalMatrix(7)), FeatureSchema::cvss_v3());
  EXPECT_TRUE(empty.at("coverage_curve").empty());
  EXPECT_EQ(empty.at("possible"), 1296);
}

TEST(ProfileClusters, SingleCluster) {
  const auto sample = incat::testing::sample_published_modes(100, 0.05, 3);
  const auto model = fit(sample.rows, {.k = 1});
  const auto p = profile_clusters(model, sample.rows);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].count, 100u);
}

TEST(ProfileClusters, SortedAndSumsToRows) {
  const auto sample = incat::testing::sample_published_modes(700, 0.1, 8);
  const auto model = fit(sample.rows, {.k = 7, .seed = 2});
  const auto p = profile_clusters(model, sample.rows);
  ASSERT_EQ(p.size(), 7u);
  std::size_t sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sum += p[i].count;
    if (i) EXPECT_GE(p[i - 1].count, p[i].count);
    EXPECT_EQ(p[i].mode, model.modes[p[i].cluster]);
  }
  EXPECT_EQ(sum, 700u);

  CategoricalMatrix shorter(7);
  shorter.push_back(sample.rows.row(0));
  EXPECT_THROW(profile_clusters(model, shorter), ValidationError);
}

TEST(ProfileClusters, RecoversWellSeparatedModes) {
  // Four modes at pairwise distance >= 4, equal sizes, 5% mutation.
  const std::vector<CategoricalVector> modes = {
      {{0, 0, 0, 0, 0, 0, 0}}, {{2, 1, 1, 1, 1, 1, 1}}, {{0, 0, 2, 1, 2, 2, 2}}, {{3, 1, 0, 0, 1, 2, 0}}};
  for (std::size_t i = 0; i < modes.size(); ++i)
    for (std::size_t j = i + 1; j < modes.size(); ++j) ASSERT_GE(hamming_dissimilarity(modes[i], modes[j]), 4u);
  const auto& schema = FeatureSchema::cvss_v3();
  Rng rng(17);
  CategoricalMatrix rows(7);
  for (int i = 0; i < 1200; ++i) {
    auto v = modes[i % modes.size()];
    for (std::size_t f = 0; f < 7; ++f) {
      if (rng.unit() >= 0.05) continue;
      auto other = static_cast<CategoryCode>(rng.below(schema.feature(f).domain.size() - 1));
      if (other >= v.codes[f]) ++other;
      v.codes[f] = other;
    }
    rows.push_back(v);
  }
  const auto model = fit_best(rows, {.k = 4, .init = InitMethod::Huang, .seed = 0}, 10);
  std::set<CategoricalVector> got;
  for (const auto& p : profile_clusters(model, rows)) got.insert(p.mode);
  EXPECT_EQ(got, std::set<CategoricalVector>(modes.begin(), modes.end()));
}

TEST(TagMap, DefaultRules) {
  const auto tags = TagMap::defaults();
  const auto& schema = FeatureSchema::cvss_v3();
  // Published row 5: NETWORK, LOW, PR NONE, UI REQUIRED, LOW, LOW, NONE.
  const auto row5 = incat::testing::published_mode_vectors()[4];
  EXPECT_EQ(tags.tags_for(row5, schema),
            (std::vector<std::string>{"network-attack-vector", "user-interaction-required", "no-privileges-needed"}));
  const auto row1 = incat::testing::published_mode_vectors()[0];
  EXPECT_EQ(tags.tags_for(row1, schema),
            (std::vector<std::string>{"network-attack-vector", "no-privileges-needed", "confidentiality-impact-high",
                                      "integrity-impact-high", "availability-impact-high"}));
  const auto local = incat::testing::published_mode_vectors()[5];
  const auto t = tags.tags_for(local, schema);
  EXPECT_EQ(std::count(t.begin(), t.end(), "network-attack-vector"), 0);
}

TEST(TagMap, JsonValidationAndDedup) {
  const auto& schema = FeatureSchema::cvss_v3();
  const auto j = nlohmann::json::parse(R"({"rules":[
    {"feature":"userInteraction","value":"required","tag":"ui"},
    {"feature":"attackVector","value":"NETWORK","tag":"ui"}]})");
  const auto map = TagMap::from_json(j, schema);
  EXPECT_EQ(map.tags_for(incat::testing::published_mode_vectors()[4], schema), (std::vector<std::string>{"ui"}));
  EXPECT_THROW(TagMap::from_json(nlohmann::json::parse(R"({"rules":[{"feature":"scope","value":"X","tag":"t"}]})"), schema),
               ValidationError);
  EXPECT_THROW(
      TagMap::from_json(nlohmann::json::parse(R"({"rules":[{"feature":"attackVector","value":"MARS","tag":"t"}]})"), schema),
      ValidationError);
  EXPECT_EQ(TagMap::from_json(TagMap::defaults().to_json(), schema).rules().size(), TagMap::defaults().rules().size());
}

TEST(Themes, OnePerNonEmptyCluster) {
  const auto sample = incat::testing::sample_published_modes(1000, 0.05, 4);
  const auto model = fit_best(sample.rows, {.k = 10}, 3);
  const auto themes = themes_from_model(model, sample.rows, TagMap::defaults());
  std::size_t non_empty = 0;
  for (auto s : model.cluster_sizes()) non_empty += s > 0;
  EXPECT_EQ(themes.size(), non_empty);
  for (const auto& t : themes) {
    EXPECT_GT(t.count, 0u);
    EXPECT_EQ(t.theme_id, theme_id_for_cluster(t.source_cluster));
    EXPECT_EQ(t.tags, TagMap::defaults().tags_for(t.mode, FeatureSchema::cvss_v3()));
    const auto back = theme_from_json(theme_to_json(t, FeatureSchema::cvss_v3()), FeatureSchema::cvss_v3());
    EXPECT_EQ(back.mode, t.mode);
    EXPECT_EQ(back.tags, t.tags);
    EXPECT_EQ(back.count, t.count);
  }
  const auto bare = themes_from_model(model, sample.rows, TagMap{});
  for (const auto& t : bare) EXPECT_TRUE(t.tags.empty());
}
