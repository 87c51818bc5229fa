#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "incat/annotate.hpp"
#include "incat/error.hpp"
#include "incat/rng.hpp"

using namespace incat;

namespace {

const TypeSystem& ts() { return TypeSystem::defaults(); }

Mention mention(const std::string& doc, std::size_t s, std::size_t e, const std::string& type,
                const std::string& who = "a") {
  return {doc, s, e, type, who, Provenance::Human};
}

std::vector<std::string> ids(std::size_t n, const std::string& prefix = "doc-") {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// Straightforward reference matcher: at each position try every form,
// keep the longest (first type in key order on equal length).
std::vector<std::tuple<std::size_t, std::size_t, std::string>> naive_matches(
    const std::string& text, const std::map<std::string, std::vector<std::string>>& dict) {
  auto word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  auto lower = [](char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); };
  auto boundary = [&](std::size_t p) {
    return p == 0 || p >= text.size() || !word(text[p - 1]) || !word(text[p]);
  };
  std::vector<std::tuple<std::size_t, std::size_t, std::string>> out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t best_len = 0;
    std::string best_type;
    if (boundary(i)) {
      for (const auto& [type, forms] : dict)
        for (const auto& f : forms) {
          if (f.size() <= best_len || i + f.size() > text.size()) continue;
          bool eq = true;
          for (std::size_t k = 0; k < f.size() && eq; ++k) eq = lower(text[i + k]) == lower(f[k]);
          if (eq && boundary(i + f.size())) {
            best_len = f.size();
            best_type = type;
          }
        }
    }
    if (best_len == 0) {
      ++i;
    } else {
      out.emplace_back(i, i + best_len, best_type);
      i += best_len;
    }
  }
  return out;
}

} // namespace

TEST(Preannotate, LiteralOffsets) {
  const Dictionary dict({{"ImpactMethod", {"SQL injection"}}, {"Product", {"Windows"}}}, ts());
  const auto out = preannotate({"d1", DocumentSource::ThreatReport, "SQL injection in Windows server"}, dict, ts());
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], (Mention{"d1", 0, 13, "ImpactMethod", "dictionary", Provenance::Dictionary}));
  EXPECT_EQ(out[1], (Mention{"d1", 17, 24, "Product", "dictionary", Provenance::Dictionary}));
}

TEST(Preannotate, EmptyDictionary) {
  EXPECT_TRUE(preannotate({"d", DocumentSource::ThreatReport, "remote code execution"}, Dictionary{}, ts()).empty());
}

TEST(Preannotate, LongestFormWins) {
  const Dictionary dict({{"CodeExecution", {"remote code", "remote code execution"}}}, ts());
  const auto out = preannotate({"d", DocumentSource::ThreatReport, "Allows Remote Code Execution."}, dict, ts());
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].start, 7u);
  EXPECT_EQ(out[0].end, 28u);
}

TEST(Preannotate, RespectsTokenBoundaries) {
  const Dictionary dict({{"ServiceInterrupt", {"DoS"}}, {"Product", {"Windows"}}}, ts());
  const auto out = preannotate({"d", DocumentSource::ThreatReport, "Windowsill DOS-attack, undoso dos"}, dict, ts());
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].start, 11u);
  EXPECT_EQ(out[1].start, 30u);
}

TEST(Preannotate, DefaultDictionaryOnRealisticText) {
  const std::string text =
      "SQL injection in the login form of Example CMS allows remote attackers to execute arbitrary code.";
  const auto out = preannotate({"d", DocumentSource::ThreatReport, text}, Dictionary::defaults(), ts());
  ASSERT_FALSE(out.empty());
  EXPECT_EQ(out[0].entity_type, "Injection");
  for (const auto& m : out) EXPECT_TRUE(ts().has_entity(m.entity_type));
  EXPECT_NO_THROW(validate_mentions(out, std::vector<Document>{{"d", DocumentSource::ThreatReport, text}}, ts()));
}

TEST(Preannotate, FuzzAgainstNaiveMatcher) {
  Rng rng(99);
  const std::vector<std::string> alphabet = {"ab", "a", "b", "ab c", "c", " ", " ", "-", "AB", "x", ".", "b c"};
  const std::vector<std::string> types = {"Product", "Vendor", "Remote", "Injection"};
  for (int round = 0; round < 300; ++round) {
    std::map<std::string, std::vector<std::string>> entries;
    std::set<std::string> used;
    const auto n_forms = rng.below(6);
    for (std::uint64_t f = 0; f < n_forms; ++f) {
      std::string form;
      const auto parts = 1 + rng.below(3);
      for (std::uint64_t p = 0; p < parts; ++p) form += alphabet[rng.below(alphabet.size())];
      if (fold_case(form).find_first_not_of(' ') == std::string::npos) continue;
      if (!used.insert(fold_case(form)).second) continue;
      entries[types[rng.below(types.size())]].push_back(form);
    }
    std::string text;
    const auto len = rng.below(25);
    for (std::uint64_t p = 0; p < len; ++p) text += alphabet[rng.below(alphabet.size())];
    if (text.empty()) text = "x";

    const Dictionary dict(entries, ts());
    const auto got = preannotate({"d", DocumentSource::ThreatReport, text}, dict, ts());
    const auto want = naive_matches(text, entries);
    ASSERT_EQ(got.size(), want.size()) << "text=[" << text << "]";
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].start, std::get<0>(want[i]));
      EXPECT_EQ(got[i].end, std::get<1>(want[i]));
      EXPECT_EQ(got[i].entity_type, std::get<2>(want[i]));
      if (i) EXPECT_LE(got[i - 1].end, got[i].start);
    }
  }
}

TEST(Apportion, Examples) {
  EXPECT_EQ(apportion(100, kDefaultSplitRatios), (std::array<std::size_t, 3>{70, 23, 7}));
  EXPECT_EQ(apportion(3, kDefaultSplitRatios), (std::array<std::size_t, 3>{2, 1, 0}));
  EXPECT_EQ(apportion(10, {0.5, 0.25, 0.25}), (std::array<std::size_t, 3>{5, 3, 2}));
}

TEST(SplitCorpus, DefaultRatiosOnHundredDocs) {
  const auto docs = ids(100);
  const auto s = split_corpus(docs, kDefaultSplitRatios, 7);
  EXPECT_EQ(s.train.size(), 70u);
  EXPECT_EQ(s.test.size(), 23u);
  EXPECT_EQ(s.blind.size(), 7u);
}

TEST(SplitCorpus, Errors) {
  EXPECT_THROW(split_corpus(ids(10), {1.0, 0.0, 0.0}, 0), ValidationError);
  EXPECT_THROW(split_corpus(ids(10), {0.5, 0.3, 0.3}, 0), ValidationError);
  EXPECT_THROW(split_corpus(ids(0), kDefaultSplitRatios, 0), ValidationError);
  const std::vector<std::string> dup = {"a", "b", "a"};
  EXPECT_THROW(split_corpus(dup, kDefaultSplitRatios, 0), ValidationError);
}

TEST(SplitCorpus, PartitionProperty) {
  Rng rng(4);
  for (int round = 0; round < 200; ++round) {
    const auto n = 1 + rng.below(400);
    double a = 0.05 + rng.unit(), b = 0.05 + rng.unit(), c = 0.05 + rng.unit();
    const double total = a + b + c;
    const std::array<double, 3> r{a / total, b / total, 1.0 - a / total - b / total};
    const auto docs = ids(n);
    const auto seed = rng.next();
    const auto s = split_corpus(docs, r, seed);
    std::multiset<std::string> all(s.train.begin(), s.train.end());
    all.insert(s.test.begin(), s.test.end());
    all.insert(s.blind.begin(), s.blind.end());
    EXPECT_EQ(all, std::multiset<std::string>(docs.begin(), docs.end()));
    const auto sizes = apportion(n, r);
    EXPECT_EQ(s.train.size(), sizes[0]);
    EXPECT_EQ(s.test.size(), sizes[1]);
    EXPECT_EQ(s.blind.size(), sizes[2]);
    // Largest remainder keeps each share within one of its quota.
    for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(std::abs(static_cast<double>(sizes[i]) - r[i] * n), 1.0);
    const auto again = split_corpus(docs, r, seed);
    EXPECT_EQ(again.train, s.train);
    EXPECT_EQ(again.blind, s.blind);
  }
}

TEST(AssignOverlap, FiftyDocsHalfShared) {
  const auto docs = ids(80);
  const std::vector<std::string> who = {"alice", "bob"};
  const auto a = assign_overlap(docs, who, 0.5, 50, 3);
  EXPECT_EQ(a.shared.size(), 25u);
  ASSERT_EQ(a.per_annotator.size(), 2u);
  EXPECT_EQ(a.per_annotator[0].second.size(), 25u + 13u);
  EXPECT_EQ(a.per_annotator[1].second.size(), 25u + 12u);
  std::set<std::string> first(a.per_annotator[0].second.begin(), a.per_annotator[0].second.end());
  std::size_t both = 0;
  for (const auto& d : a.per_annotator[1].second) both += first.count(d);
  EXPECT_EQ(both, 25u);
}

TEST(AssignOverlap, Extremes) {
  const auto docs = ids(20);
  const std::vector<std::string> who = {"a", "b"};
  const auto full = assign_overlap(docs, who, 1.0, 10, 1);
  EXPECT_EQ(full.per_annotator[0].second, full.per_annotator[1].second);
  const auto none = assign_overlap(docs, who, 0.0, 10, 1);
  EXPECT_EQ(none.per_annotator[0].second.size(), 5u);
  EXPECT_EQ(none.per_annotator[1].second.size(), 5u);
  for (const auto& d : none.per_annotator[0].second)
    EXPECT_EQ(std::count(none.per_annotator[1].second.begin(), none.per_annotator[1].second.end(), d), 0);
}

TEST(AssignOverlap, Errors) {
  const auto docs = ids(5);
  const std::vector<std::string> two = {"a", "b"}, three = {"a", "b", "c"}, same = {"a", "a"};
  EXPECT_THROW(assign_overlap(docs, two, 0.5, 6, 0), ValidationError);
  EXPECT_THROW(assign_overlap(docs, three, 0.5, 4, 0), ValidationError);
  EXPECT_THROW(assign_overlap(docs, same, 0.5, 4, 0), ValidationError);
  EXPECT_THROW(assign_overlap(docs, two, 1.5, 4, 0), ValidationError);
}

TEST(Agreement, IdenticalAndDisjoint) {
  const std::vector<std::string> shared = {"d1", "d2"};
  const std::vector<Mention> a = {mention("d1", 0, 5, "Product"), mention("d2", 3, 9, "Vendor")};
  EXPECT_DOUBLE_EQ(pairwise_agreement(a, a, MatchMode::Exact, shared).overall, 1.0);
  const std::vector<Mention> b = {mention("d1", 10, 15, "Product")};
  EXPECT_DOUBLE_EQ(pairwise_agreement(a, b, MatchMode::Exact, shared).overall, 0.0);
  EXPECT_DOUBLE_EQ(pairwise_agreement(a, b, MatchMode::Overlap, shared).overall, 0.0);
}

TEST(Agreement, TwoThirds) {
  const std::vector<std::string> shared = {"d1"};
  const std::vector<Mention> a = {mention("d1", 0, 5, "Product"), mention("d1", 8, 12, "Vendor")};
  const std::vector<Mention> b = {mention("d1", 0, 5, "Product", "b")};
  const auto r = pairwise_agreement(a, b, MatchMode::Exact, shared);
  EXPECT_NEAR(r.overall, 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.per_type.at("Product"), 1.0);
  EXPECT_DOUBLE_EQ(r.per_type.at("Vendor"), 0.0);
}

TEST(Agreement, UnsharedDocumentIsError) {
  const std::vector<std::string> shared = {"d1"};
  const std::vector<Mention> a = {mention("d2", 0, 5, "Product")};
  EXPECT_THROW(pairwise_agreement(a, a, MatchMode::Exact, shared), ValidationError);
}

TEST(Agreement, SymmetricBoundedAndExactBelowOverlap) {
  Rng rng(12);
  const std::vector<std::string> types = {"Product", "Vendor", "Remote"};
  const std::vector<std::string> shared = {"d0", "d1", "d2"};
  auto random_set = [&](const std::string& who) {
    std::vector<Mention> out;
    for (const auto& d : shared) {
      std::size_t pos = 0;
      while (rng.below(3) != 0) {
        pos += rng.below(4);
        const auto len = 1 + rng.below(5);
        out.push_back(mention(d, pos, pos + len, types[rng.below(types.size())], who));
        pos += len;
      }
    }
    return out;
  };
  for (int round = 0; round < 300; ++round) {
    const auto a = random_set("a"), b = random_set("b");
    const auto ab = pairwise_agreement(a, b, MatchMode::Exact, shared);
    const auto ba = pairwise_agreement(b, a, MatchMode::Exact, shared);
    const auto ov = pairwise_agreement(a, b, MatchMode::Overlap, shared);
    EXPECT_DOUBLE_EQ(ab.overall, ba.overall);
    EXPECT_LE(ab.overall, ov.overall + 1e-12);
    for (double v : {ab.overall, ov.overall}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    for (const auto& [t, v] : ov.per_type) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Agreement, RelationsInExactModeOnly) {
  const std::vector<std::string> shared = {"d1"};
  const auto s = mention("d1", 0, 13, "Injection"), o = mention("d1", 17, 24, "Product");
  const std::vector<Mention> a = {s, o};
  const std::vector<RelationMention> rel = {{"affects", s, o, "a"}};
  const auto exact = pairwise_agreement(a, a, MatchMode::Exact, shared, rel, rel);
  ASSERT_TRUE(exact.relations.has_value());
  EXPECT_DOUBLE_EQ(*exact.relations, 1.0);
  EXPECT_FALSE(pairwise_agreement(a, a, MatchMode::Overlap, shared, rel, rel).relations.has_value());
  EXPECT_NO_THROW(validate_relation_mention(rel[0], ts()));
  EXPECT_THROW(validate_relation_mention({"affects", o, s, "a"}, ts()), ValidationError);
}

TEST(Evaluate, Examples) {
  const std::vector<Mention> gold = {mention("d", 0, 3, "Product"), mention("d", 5, 9, "Vendor"),
                                     mention("d", 12, 15, "Remote")};
  const auto same = evaluate(gold, gold, MatchMode::Exact);
  EXPECT_DOUBLE_EQ(same.precision, 1.0);
  EXPECT_DOUBLE_EQ(same.recall, 1.0);
  EXPECT_DOUBLE_EQ(same.f1, 1.0);

  const std::vector<Mention> pred = {gold[0], gold[1], mention("d", 20, 22, "Vendor")};
  const auto r = evaluate(pred, gold, MatchMode::Exact);
  EXPECT_NEAR(r.precision, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.recall, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(r.true_pos, 2u);

  const auto empty = evaluate({}, gold, MatchMode::Overlap);
  EXPECT_EQ(empty.precision, 0.0);
  EXPECT_EQ(empty.recall, 0.0);
  EXPECT_EQ(empty.f1, 0.0);

  const std::vector<Mention> shifted = {mention("d", 1, 4, "Product")};
  EXPECT_EQ(evaluate(shifted, gold, MatchMode::Exact).true_pos, 0u);
  EXPECT_EQ(evaluate(shifted, gold, MatchMode::Overlap).true_pos, 1u);
}

TEST(Evaluate, F1IsHarmonicMean) {
  Rng rng(8);
  for (int round = 0; round < 100; ++round) {
    std::vector<Mention> pred, gold;
    for (std::size_t p = 0; p < 30; p += 3) {
      if (rng.below(2)) gold.push_back(mention("d", p, p + 2, "Product"));
      if (rng.below(2)) pred.push_back(mention("d", p + rng.below(2), p + 2, "Product"));
    }
    const auto r = evaluate(pred, gold, MatchMode::Exact);
    if (r.precision > 0 && r.recall > 0)
      EXPECT_NEAR(r.f1, 2 * r.precision * r.recall / (r.precision + r.recall), 1e-12);
    else
      EXPECT_EQ(r.f1, 0.0);
  }
}

TEST(ValidateMentions, Rules) {
  const std::vector<Document> docs = {{"d", DocumentSource::ThreatReport, "Windows server"}};
  EXPECT_NO_THROW(validate_mentions(std::vector<Mention>{mention("d", 0, 7, "Product")}, docs, ts()));
  EXPECT_THROW(validate_mentions(std::vector<Mention>{mention("d", 0, 99, "Product")}, docs, ts()), ValidationError);
  EXPECT_THROW(validate_mentions(std::vector<Mention>{mention("d", 3, 3, "Product")}, docs, ts()), ValidationError);
  EXPECT_THROW(validate_mentions(std::vector<Mention>{mention("d", 0, 7, "Planet")}, docs, ts()), ValidationError);
  EXPECT_THROW(validate_mentions(std::vector<Mention>{mention("x", 0, 7, "Product")}, docs, ts()), ValidationError);
  EXPECT_THROW(validate_mentions(std::vector<Mention>{mention("d", 0, 7, "Product"), mention("d", 5, 9, "Vendor")}, docs, ts()),
               ValidationError);
  EXPECT_NO_THROW(validate_mentions(
      std::vector<Mention>{mention("d", 0, 7, "Product", "a"), mention("d", 5, 9, "Vendor", "b")}, docs, ts()));
}

TEST(Standoff, RoundTrip) {
  const auto s = mention("d1", 0, 13, "Injection"), o = mention("d1", 17, 24, "Product");
  const std::vector<Mention> mentions = {s, o};
  const std::vector<RelationMention> rel = {{"affects", s, o, "a"}};
  std::stringstream buf;
  write_standoff_jsonl(buf, mentions, rel);
  const auto back = read_standoff_jsonl(buf);
  EXPECT_EQ(back.mentions, mentions);
  ASSERT_EQ(back.relations.size(), 1u);
  EXPECT_EQ(back.relations[0].subject, s);
  EXPECT_EQ(back.relations[0].object.end, 24u);

  const std::vector<Document> docs = {{"a", DocumentSource::ThreatReport, "x"},
                                      {"b", DocumentSource::AssessmentResponse, "y z"}};
  std::stringstream dbuf;
  write_documents_jsonl(dbuf, docs);
  EXPECT_EQ(read_documents_jsonl(dbuf), docs);
  std::stringstream dup("{\"doc_id\":\"a\",\"source\":\"THREAT_REPORT\",\"text\":\"x\"}\n"
                        "{\"doc_id\":\"a\",\"source\":\"THREAT_REPORT\",\"text\":\"y\"}\n");
  EXPECT_THROW(read_documents_jsonl(dup), ValidationError);
}
