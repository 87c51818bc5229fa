#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "incat/store.hpp"
#include "synthetic.hpp"

using namespace incat;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    static int counter = 0;
    dir = fs::temp_directory_path() / ("incat-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), {"--store", (dir / "store").string()});
    out.str("");
    err.str("");
    return cli::run(args, out, err);
  }

  json output() const { return json::parse(out.str()); }

  std::string write(const std::string& name, const std::string& content) {
    const auto p = dir / name;
    std::ofstream(p, std::ios::binary) << content;
    return p.string();
  }

  std::string feed_file(std::size_t rows = 300) {
    const auto sample = incat::testing::sample_published_modes(rows, 0.05, 21);
    return write("feed.json", incat::testing::make_feed(sample.rows, 10));
  }

  fs::path dir;
  std::ostringstream out, err;
};

} // namespace

TEST_F(CliTest, IngestFixture) {
  ASSERT_EQ(run({"ingest", "--feed", std::string(INCAT_FIXTURE_DIR) + "/nvd_3items.json"}), 0) << err.str();
  const auto j = output();
  EXPECT_EQ(j.at("records"), 3);
  EXPECT_EQ(j.at("with_metrics"), 2);
  EXPECT_EQ(j.at("rejects").size(), 0u);

  ASSERT_EQ(run({"ingest", "--feed", std::string(INCAT_FIXTURE_DIR) + "/nvd_malformed_value.json"}), 0);
  ASSERT_EQ(output().at("rejects").size(), 1u);
  EXPECT_EQ(output().at("rejects")[0].at("field"), "attackVector");
}

TEST_F(CliTest, CombosReportsPossibleCount) {
  ASSERT_EQ(run({"ingest", "--feed", std::string(INCAT_FIXTURE_DIR) + "/nvd_3items.json"}), 0);
  ASSERT_EQ(run({"combos"}), 0) << err.str();
  EXPECT_EQ(output().at("possible"), 1296);
  EXPECT_EQ(output().at("observed"), 2);
}

TEST_F(CliTest, ClusterIsByteIdenticalAcrossRuns) {
  ASSERT_EQ(run({"ingest", "--feed", feed_file()}), 0) << err.str();
  const auto a = (dir / "a.json").string(), b = (dir / "b.json").string();
  ASSERT_EQ(run({"cluster", "--k", "10", "--init", "huang", "--seed", "42", "--restarts", "3", "--out", a}), 0) << err.str();
  ASSERT_EQ(run({"cluster", "--k", "10", "--init", "huang", "--seed", "42", "--restarts", "3", "--out", b}), 0);
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  EXPECT_FALSE(sa.str().empty());
  EXPECT_EQ(sa.str(), sb.str());
  Store store(dir / "store");
  EXPECT_EQ(store.read(Collection::Models).size(), 2u);
}

TEST_F(CliTest, PipelineThroughReadiness) {
  ASSERT_EQ(run({"ingest", "--feed", feed_file()}), 0);
  ASSERT_EQ(run({"cluster", "--restarts", "2"}), 0) << err.str();
  ASSERT_EQ(run({"themes"}), 0) << err.str();
  const auto themes = output();
  ASSERT_FALSE(themes.empty());
  const std::string theme_id = themes[0].at("theme_id");
  ASSERT_EQ(run({"gen-assessment", "--theme", theme_id, "--n", "4", "--seed", "3"}), 0) << err.str();
  const auto assessment = assessment_from_json(output());
  EXPECT_EQ(assessment.items.size(), 4u);

  const auto responses = incat::testing::synthetic_responses({assessment}, 12, 5);
  std::string lines;
  for (const auto& r : responses) lines += response_to_json(r).dump() + "\n";
  const auto file = write("responses.jsonl", lines);
  ASSERT_EQ(run({"score", "--responses", file, "--persist"}), 0) << err.str();
  ASSERT_EQ(run({"readiness", "--target", theme_id, "--quota", "2"}), 0) << err.str();
  auto report = output();
  const auto direct = aggregate_readiness(responses, std::vector<Assessment>{assessment});
  const auto targeting = report.at("targeting");
  report.erase("targeting");
  EXPECT_EQ(report, readiness_to_json(direct));
  EXPECT_EQ(targeting.at("groups").get<std::vector<std::string>>(), target_groups(direct, theme_id, 2));

  ASSERT_EQ(run({"elbow", "--kmin", "2", "--kmax", "5", "--restarts", "1"}), 0) << err.str();
  EXPECT_EQ(output().at("entries").size(), 4u);
  ASSERT_EQ(run({"preannotate"}), 0) << err.str();
  EXPECT_GT(output().at("mentions").size(), 0u);
}

TEST_F(CliTest, SplitHundredDocs) {
  std::string ids;
  for (int i = 0; i < 100; ++i) ids += "doc-" + std::to_string(i) + "\n";
  ASSERT_EQ(run({"split", "--ratios", "0.70,0.23,0.07", "--seed", "1", "--ids", write("ids.txt", ids)}), 0) << err.str();
  const auto j = output();
  EXPECT_EQ(j.at("train").size(), 70u);
  EXPECT_EQ(j.at("test").size(), 23u);
  EXPECT_EQ(j.at("blind").size(), 7u);

  EXPECT_EQ(run({"split", "--ratios", "1.0,0,0", "--ids", write("ids2.txt", ids)}), 2);
  EXPECT_EQ(run({"split", "--ratios", "banana", "--ids", write("ids3.txt", ids)}), 1);
}

TEST_F(CliTest, AssignAgreeEval) {
  std::string ids;
  for (int i = 0; i < 60; ++i) ids += "doc-" + std::to_string(i) + "\n";
  ASSERT_EQ(run({"assign", "--ids", write("ids.txt", ids), "--seed", "2"}), 0) << err.str();
  EXPECT_EQ(output().at("shared").size(), 25u);

  const auto a = write("a.jsonl", R"({"doc":"d1","start":0,"end":5,"type":"Product","annotator":"a","provenance":"HUMAN"}
{"doc":"d1","start":8,"end":12,"type":"Vendor","annotator":"a","provenance":"HUMAN"}
)");
  const auto b = write("b.jsonl", R"({"doc":"d1","start":0,"end":5,"type":"Product","annotator":"b","provenance":"HUMAN"}
)");
  ASSERT_EQ(run({"agree", "--a", a, "--b", b, "--mode", "exact"}), 0) << err.str();
  EXPECT_NEAR(output().at("overall").get<double>(), 2.0 / 3.0, 1e-12);
  ASSERT_EQ(run({"eval", "--pred", a, "--gold", b}), 0) << err.str();
  EXPECT_DOUBLE_EQ(output().at("precision").get<double>(), 0.5);
  EXPECT_DOUBLE_EQ(output().at("recall").get<double>(), 1.0);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({}), 1);
  EXPECT_EQ(run({"frobnicate"}), 1);
  EXPECT_EQ(run({"cluster", "--k", "ten"}), 1);
  EXPECT_EQ(run({"ingest", "--feed", (dir / "missing.json").string()}), 2);
  EXPECT_NE(err.str().find("missing.json"), std::string::npos);
  EXPECT_EQ(run({"ingest", "--feed", write("bad.json", "{\"CVE_Items\": [")}), 2);
  // No records yet: clustering cannot run.
  EXPECT_EQ(run({"cluster"}), 2);
  EXPECT_EQ(run({"gen-assessment", "--theme", "theme-0"}), 2);
}
