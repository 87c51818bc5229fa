#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "incat/annotate.hpp"
#include "incat/api.hpp"
#include "incat/assess.hpp"
#include "incat/error.hpp"
#include "incat/kmodes.hpp"
#include "incat/nvd.hpp"
#include "incat/service.hpp"
#include "incat/store.hpp"
#include "incat/themes.hpp"
#include "incat/typesystem.hpp"

namespace incat::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json read_json_file(const std::string& path) {
  const auto text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path + "': " + e.what(), e.byte);
  }
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Simple aligned table for stderr.
void print_table(std::ostream& err, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      err << std::left << std::setw(static_cast<int>(width[c])) << cells[c] << (c + 1 < cells.size() ? "  " : "");
    }
    err << '\n';
  };
  line(header);
  std::vector<std::string> rule;
  for (auto w : width) rule.emplace_back(w, '-');
  line(rule);
  for (const auto& r : rows) line(r);
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::vector<double> parse_ratios(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--ratios: '" + part + "' is not a number");
    }
  }
  if (out.size() != 3) throw CLI::ValidationError("--ratios: expected three comma-separated values");
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

StandoffSet read_standoff(const std::string& path) {
  std::istringstream in(read_file(path));
  return read_standoff_jsonl(in);
}

// Options shared by commands that take an optional clustering input file.
struct MatrixSource {
  std::string input;

  bool from_store() const { return input.empty(); }

  CategoricalMatrix load(const Store& store) const {
    const auto& schema = FeatureSchema::cvss_v3();
    if (input.empty()) return categorical_matrix(store.records(schema), schema).rows;
    std::istringstream in(read_file(input));
    return ends_with(input, ".csv") ? read_matrix_csv(in, schema) : read_matrix_jsonl(in, schema);
  }
};

// Documents from a corpus file, or the store's records plus stored
// free-text response documents.
std::vector<Document> load_documents(const Store& store, const std::string& corpus) {
  if (!corpus.empty()) {
    std::istringstream in(read_file(corpus));
    return read_documents_jsonl(in);
  }
  std::vector<Document> docs;
  for (const auto& r : store.records()) docs.push_back({r.id, DocumentSource::ThreatReport, r.description});
  for (const auto& j : store.read(Collection::Corpora)) {
    if (j.value("kind", std::string()) == "document") docs.push_back(document_from_json(j.at("document")));
  }
  return docs;
}

std::vector<std::string> load_doc_ids(const Store& store, const std::string& corpus, const std::string& ids_file) {
  if (!ids_file.empty()) return read_lines(ids_file);
  std::vector<std::string> ids;
  for (const auto& d : load_documents(store, corpus)) ids.push_back(d.doc_id);
  return ids;
}

std::vector<ResponseSet> read_responses(const std::string& path) {
  const auto text = read_file(path);
  std::vector<ResponseSet> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    json arr;
    try {
      arr = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError("'" + path + "': " + e.what(), e.byte);
    }
    for (const auto& j : arr) out.push_back(response_from_json(j));
    return out;
  }
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      out.push_back(response_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ParseError("'" + path + "' line " + std::to_string(lineno) + ": " + e.what(), e.byte);
    } catch (const ValidationError& e) {
      throw ValidationError("'" + path + "' line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void emit(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

} // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"incat: threat-driven security awareness pipeline", "incat"};
  app.require_subcommand(1);
  std::string store_dir = env_or("INCAT_STORE", "incat-store");
  app.add_option("--store", store_dir, "Store directory (env INCAT_STORE)");

  const auto& schema = FeatureSchema::cvss_v3();
  std::function<void()> action;
  auto open_store = [&] { return std::make_unique<Store>(store_dir); };

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse an NVD JSON 1.0 feed into the store");
  std::string feed;
  ingest->add_option("--feed", feed, "NVD JSON feed file")->required();
  ingest->callback([&] {
    action = [&] {
      const auto result = parse_nvd_feed(read_file(feed), schema);
      auto store = open_store();
      store->put_records(result.records, schema);
      json rejects = json::array();
      for (const auto& r : result.rejects)
        rejects.push_back({{"item_index", r.item_index}, {"id", r.id}, {"field", r.field}, {"value", r.value},
                           {"reason", r.reason}});
      emit(out, {{"feed", feed},
                 {"items", result.item_count},
                 {"records", result.records.size()},
                 {"with_metrics", result.with_metrics()},
                 {"rejects", rejects}});
      print_table(err, {"items", "records", "with metrics", "rejects"},
                  {{std::to_string(result.item_count), std::to_string(result.records.size()),
                    std::to_string(result.with_metrics()), std::to_string(result.rejects.size())}});
      for (const auto& r : result.rejects)
        err << "reject item " << r.item_index << " " << r.id << ": " << r.field << " '" << r.value << "' " << r.reason
            << '\n';
    };
  });

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Fit k-modes to the categorical metrics");
  FitOptions fit_opts;
  std::string init_name = "huang";
  std::size_t restarts = 10;
  MatrixSource cluster_src;
  std::string model_out;
  cluster->add_option("--k", fit_opts.k, "Number of clusters")->capture_default_str();
  cluster->add_option("--init", init_name, "huang | random")->capture_default_str();
  cluster->add_option("--seed", fit_opts.seed, "Seed for initialization")->capture_default_str();
  cluster->add_option("--restarts", restarts, "Restarts; the lowest-cost model wins")->capture_default_str();
  cluster->add_option("--max-iter", fit_opts.max_iter, "Iteration cap per restart")->capture_default_str();
  cluster->add_option("--input", cluster_src.input, "JSONL or .csv matrix instead of the store");
  cluster->add_option("--out", model_out, "Also write the model JSON to this file");
  cluster->callback([&] {
    action = [&] {
      fit_opts.init = init_method_from_string(init_name);
      auto store = open_store();
      const auto rows = cluster_src.load(*store);
      const auto model = fit_best(rows, fit_opts, restarts);
      const auto j = model_to_json(model, schema);
      if (cluster_src.from_store()) store->append(Collection::Models, j);
      if (!model_out.empty()) {
        std::ofstream f(model_out, std::ios::binary);
        f << j.dump(2) << '\n';
        if (!f) throw StoreError("cannot write '" + model_out + "'");
      }
      emit(out, j);
      std::vector<std::vector<std::string>> table;
      for (const auto& p : profile_clusters(model, rows))
        table.push_back({std::to_string(p.cluster), vector_label(p.mode, schema), std::to_string(p.count)});
      print_table(err, {"cluster", "mode", "count"}, table);
      err << "cost " << model.cost << " over " << rows.rows() << " rows (" << fixed(rows.rows() ? double(model.cost) / double(rows.rows()) : 0.0)
          << " per row), seed " << model.seed << ", " << model.iterations << " iterations\n";
    };
  });

  // elbow
  auto* elbow = app.add_subcommand("elbow", "Sweep k and report the best cost per k");
  std::size_t kmin = 2, kmax = 20, elbow_restarts = 5;
  std::uint64_t elbow_seed = 0;
  std::string elbow_init = "huang";
  MatrixSource elbow_src;
  elbow->add_option("--kmin", kmin)->capture_default_str();
  elbow->add_option("--kmax", kmax)->capture_default_str();
  elbow->add_option("--init", elbow_init)->capture_default_str();
  elbow->add_option("--seed", elbow_seed)->capture_default_str();
  elbow->add_option("--restarts", elbow_restarts)->capture_default_str();
  elbow->add_option("--input", elbow_src.input, "JSONL or .csv matrix instead of the store");
  elbow->callback([&] {
    action = [&] {
      auto store = open_store();
      const auto rows = elbow_src.load(*store);
      const auto report = sweep_k(rows, kmin, kmax, init_method_from_string(elbow_init), elbow_seed, elbow_restarts);
      auto j = elbow_to_json(report);
      if (elbow_src.from_store()) {
        json stored = j;
        stored["kind"] = "elbow";
        store->append(Collection::Reports, stored);
      }
      emit(out, j);
      std::vector<std::vector<std::string>> table;
      const auto run_min = report.running_min();
      for (std::size_t i = 0; i < report.entries.size(); ++i)
        table.push_back({std::to_string(report.entries[i].k), std::to_string(report.entries[i].cost),
                         std::to_string(run_min[i])});
      print_table(err, {"k", "cost", "running min"}, table);
    };
  });

  // combos
  auto* combos = app.add_subcommand("combos", "Frequency table of observed metric combinations");
  std::optional<std::size_t> top;
  MatrixSource combos_src;
  combos->add_option("--top", top, "List only the M most frequent combinations and report their coverage");
  combos->add_option("--input", combos_src.input, "JSONL or .csv matrix instead of the store");
  combos->callback([&] {
    action = [&] {
      auto store = open_store();
      const auto rows = combos_src.load(*store);
      const auto stats = combination_stats(rows);
      auto j = combos_report(stats, schema, top.value_or(0));
      if (top && stats.total_rows > 0) j["coverage_top_m"] = {{"m", *top}, {"fraction", coverage_top_m(stats, *top)}};
      emit(out, j);
      std::vector<std::vector<std::string>> table;
      const auto listed = std::min<std::size_t>(top.value_or(16), stats.combos.size());
      for (std::size_t i = 0; i < listed; ++i)
        table.push_back({std::to_string(i + 1), vector_label(stats.combos[i].vector, schema),
                         std::to_string(stats.combos[i].count), fixed(coverage_top_m(stats, i + 1))});
      err << "possible " << schema.combination_count() << ", observed " << stats.combos.size() << ", rows "
          << stats.total_rows << '\n';
      print_table(err, {"rank", "combination", "count", "cumulative"}, table);
    };
  });

  // themes
  auto* themes_cmd = app.add_subcommand("themes", "Turn the latest cluster model into tagged themes");
  std::string tagmap_file;
  themes_cmd->add_option("--tagmap", tagmap_file, "Tag map JSON (defaults to the shipped map)");
  themes_cmd->callback([&] {
    action = [&] {
      auto store = open_store();
      const auto model = store->latest_model(schema);
      if (!model) throw NotFoundError("no cluster model in store; run `incat cluster` first");
      const auto tag_map = tagmap_file.empty() ? TagMap::defaults() : TagMap::from_json(read_json_file(tagmap_file), schema);
      const auto matrix = categorical_matrix(store->records(schema), schema);
      const auto themes = themes_from_model(*model, matrix.rows, tag_map, schema);
      std::vector<json> lines;
      for (const auto& t : themes) lines.push_back(theme_to_json(t, schema));
      store->replace(Collection::Themes, lines);
      emit(out, json(lines));
      std::vector<std::vector<std::string>> table;
      for (const auto& t : themes) {
        std::string tags;
        for (const auto& tag : t.tags) tags += (tags.empty() ? "" : ",") + tag;
        table.push_back({t.theme_id, vector_label(t.mode, schema), std::to_string(t.count), tags});
      }
      print_table(err, {"theme", "mode", "count", "tags"}, table);
    };
  });

  // preannotate
  auto* pre = app.add_subcommand("preannotate", "Dictionary pre-annotation of threat reports");
  std::string dict_file, ts_file, pre_corpus, pre_out;
  pre->add_option("--dict", dict_file, "Dictionary JSON (defaults to the shipped dictionary)");
  pre->add_option("--typesystem", ts_file, "Type system JSON (defaults to the shipped type system)");
  pre->add_option("--corpus", pre_corpus, "Document JSONL (defaults to store records)");
  pre->add_option("--out", pre_out, "Write standoff mention JSONL here");
  pre->callback([&] {
    action = [&] {
      const auto ts = ts_file.empty() ? TypeSystem::defaults() : TypeSystem::load(ts_file);
      const auto dict = dict_file.empty() ? Dictionary::defaults() : Dictionary::load(dict_file, ts);
      auto store = open_store();
      const auto docs = load_documents(*store, pre_corpus);
      std::vector<Mention> all;
      std::map<std::string, std::size_t> by_type;
      for (const auto& d : docs) {
        for (auto& m : preannotate(d, dict, ts)) {
          ++by_type[m.entity_type];
          all.push_back(std::move(m));
        }
      }
      std::vector<json> lines;
      for (const auto& m : all) lines.push_back(mention_to_json(m));
      store->append_all(Collection::Mentions, lines);
      if (!pre_out.empty()) {
        std::ofstream f(pre_out, std::ios::binary);
        write_standoff_jsonl(f, all);
        if (!f) throw StoreError("cannot write '" + pre_out + "'");
      }
      emit(out, {{"documents", docs.size()}, {"mentions", lines}, {"by_type", by_type}});
      std::vector<std::vector<std::string>> table;
      for (const auto& [type, n] : by_type) table.push_back({type, std::to_string(n)});
      print_table(err, {"entity type", "mentions"}, table);
    };
  });

  // split
  auto* split = app.add_subcommand("split", "Seeded train/test/blind split of a corpus");
  std::string ratios_text = "0.70,0.23,0.07", split_corpus_file, split_ids;
  std::uint64_t split_seed = 0;
  split->add_option("--ratios", ratios_text)->capture_default_str();
  split->add_option("--seed", split_seed)->capture_default_str();
  split->add_option("--corpus", split_corpus_file, "Document JSONL (defaults to store documents)");
  split->add_option("--ids", split_ids, "File with one doc id per line");
  split->callback([&] {
    action = [&] {
      const auto r = parse_ratios(ratios_text);
      auto store = open_store();
      const auto ids = load_doc_ids(*store, split_corpus_file, split_ids);
      const auto result = split_corpus(ids, {r[0], r[1], r[2]}, split_seed);
      auto j = split_to_json(result);
      json stored = j;
      stored["kind"] = "split";
      store->append(Collection::Corpora, stored);
      emit(out, j);
      print_table(err, {"train", "test", "blind"},
                  {{std::to_string(result.train.size()), std::to_string(result.test.size()),
                    std::to_string(result.blind.size())}});
    };
  });

  // assign
  auto* assign = app.add_subcommand("assign", "Draw an overlapping annotation batch for two annotators");
  double overlap = 0.5;
  std::size_t batch = 50;
  std::uint64_t assign_seed = 0;
  std::vector<std::string> annotators{"annotator-a", "annotator-b"};
  std::string assign_corpus, assign_ids;
  assign->add_option("--overlap", overlap)->capture_default_str();
  assign->add_option("--batch", batch)->capture_default_str();
  assign->add_option("--seed", assign_seed)->capture_default_str();
  assign->add_option("--annotators", annotators, "Two annotator ids")->delimiter(',')->capture_default_str();
  assign->add_option("--corpus", assign_corpus, "Document JSONL (defaults to store documents)");
  assign->add_option("--ids", assign_ids, "File with one doc id per line");
  assign->callback([&] {
    action = [&] {
      auto store = open_store();
      const auto ids = load_doc_ids(*store, assign_corpus, assign_ids);
      const auto result = assign_overlap(ids, annotators, overlap, batch, assign_seed);
      auto j = assignment_to_json(result);
      json stored = j;
      stored["kind"] = "assignment";
      store->append(Collection::Corpora, stored);
      emit(out, j);
      std::vector<std::vector<std::string>> table;
      for (const auto& [name, docs] : result.per_annotator)
        table.push_back({name, std::to_string(docs.size()), std::to_string(result.shared.size())});
      print_table(err, {"annotator", "documents", "shared"}, table);
    };
  });

  // agree
  auto* agree = app.add_subcommand("agree", "Inter-annotator agreement between two standoff files");
  std::string file_a, file_b, agree_mode = "exact", docs_file;
  agree->add_option("--a", file_a)->required();
  agree->add_option("--b", file_b)->required();
  agree->add_option("--mode", agree_mode, "exact | overlap")->capture_default_str();
  agree->add_option("--docs", docs_file, "Shared doc ids, one per line (defaults to every doc in either file)");
  agree->callback([&] {
    action = [&] {
      const auto a = read_standoff(file_a);
      const auto b = read_standoff(file_b);
      std::vector<std::string> shared;
      if (!docs_file.empty()) {
        shared = read_lines(docs_file);
      } else {
        std::set<std::string> ids;
        for (const auto* set : {&a.mentions, &b.mentions})
          for (const auto& m : *set) ids.insert(m.doc_id);
        shared.assign(ids.begin(), ids.end());
      }
      const auto report =
          pairwise_agreement(a.mentions, b.mentions, match_mode_from_string(agree_mode), shared, a.relations, b.relations);
      emit(out, agreement_to_json(report));
      std::vector<std::vector<std::string>> table;
      for (const auto& [type, f1] : report.per_type) table.push_back({type, fixed(f1)});
      table.push_back({"overall", fixed(report.overall)});
      print_table(err, {"entity type", "F1"}, table);
    };
  });

  // eval
  auto* eval = app.add_subcommand("eval", "Score predicted mentions against gold");
  std::string pred_file, gold_file, eval_mode = "exact";
  eval->add_option("--pred", pred_file)->required();
  eval->add_option("--gold", gold_file)->required();
  eval->add_option("--mode", eval_mode, "exact | overlap")->capture_default_str();
  eval->callback([&] {
    action = [&] {
      const auto report =
          evaluate(read_standoff(pred_file).mentions, read_standoff(gold_file).mentions, match_mode_from_string(eval_mode));
      emit(out, eval_to_json(report));
      print_table(err, {"precision", "recall", "f1", "tp", "pred", "gold"},
                  {{fixed(report.precision), fixed(report.recall), fixed(report.f1), std::to_string(report.true_pos),
                    std::to_string(report.pred_total), std::to_string(report.gold_total)}});
    };
  });

  // gen-assessment
  auto* gen = app.add_subcommand("gen-assessment", "Build a theme-targeted assessment from an item bank");
  std::string theme_id, bank_file;
  std::size_t n_items = 5;
  std::uint64_t gen_seed = 0;
  gen->add_option("--theme", theme_id)->required();
  gen->add_option("--bank", bank_file, "Item bank JSON (defaults to the shipped bank)");
  gen->add_option("--n", n_items)->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->callback([&] {
    action = [&] {
      auto store = open_store();
      const auto themes = store->themes(schema);
      auto it = std::find_if(themes.begin(), themes.end(), [&](const Theme& t) { return t.theme_id == theme_id; });
      if (it == themes.end()) throw NotFoundError("unknown theme '" + theme_id + "'");
      const auto bank = bank_file.empty() ? default_item_bank() : load_item_bank(read_json_file(bank_file));
      const auto a = generate_assessment(*it, bank, n_items, gen_seed);
      const auto j = assessment_to_json(a);
      if (!store->assessment(a.assessment_id)) store->append(Collection::Assessments, j);
      emit(out, j);
      std::vector<std::vector<std::string>> table;
      for (const auto& item : a.items) {
        std::string tags;
        for (const auto& t : item.tags) tags += (tags.empty() ? "" : ",") + t;
        table.push_back({item.item_id, tags});
      }
      err << a.assessment_id << " for " << a.theme_id << '\n';
      print_table(err, {"item", "tags"}, table);
    };
  });

  // score
  auto* score = app.add_subcommand("score", "Score responses against stored assessments");
  std::string responses_file;
  bool persist = false;
  score->add_option("--responses", responses_file, "Response JSONL or JSON array")->required();
  score->add_flag("--persist", persist, "Store the responses and their free-text documents");
  score->callback([&] {
    action = [&] {
      auto store = open_store();
      const auto responses = read_responses(responses_file);
      std::map<std::string, Assessment> assessments;
      for (auto& a : store->assessments()) assessments.emplace(a.assessment_id, std::move(a));
      json results = json::array();
      std::vector<json> docs;
      for (std::size_t i = 0; i < responses.size(); ++i) {
        const auto& r = responses[i];
        auto a = assessments.find(r.assessment_id);
        if (a == assessments.end())
          throw NotFoundError("response " + std::to_string(i) + ": unknown assessment '" + r.assessment_id + "'");
        std::map<std::string, TagScore> scores;
        try {
          scores = score_response(r, a->second);
        } catch (const ValidationError& e) {
          throw ValidationError("response " + std::to_string(i) + " (user '" + r.user_id + "'): " + e.what());
        }
        results.push_back(
            {{"user_id", r.user_id}, {"assessment_id", r.assessment_id}, {"scores", tag_scores_to_json(scores)}});
        for (const auto& d : response_documents(r)) docs.push_back({{"kind", "document"}, {"document", document_to_json(d)}});
      }
      if (persist) {
        std::vector<json> lines;
        for (const auto& r : responses) lines.push_back(response_to_json(r));
        store->append_all(Collection::Responses, lines);
        if (!docs.empty()) store->append_all(Collection::Corpora, docs);
      }
      emit(out, results);
      err << responses.size() << " responses scored" << (persist ? " and stored" : "") << '\n';
    };
  });

  // readiness
  auto* ready = app.add_subcommand("readiness", "Per-group readiness per theme from stored responses");
  std::string target_theme;
  std::optional<std::size_t> quota;
  ready->add_option("--target", target_theme, "Also rank groups for this theme");
  ready->add_option("--quota", quota, "Number of groups to target");
  ready->callback([&] {
    action = [&] {
      auto store = open_store();
      auto j = api::readiness(*store);
      json stored = j;
      stored["kind"] = "readiness";
      store->append(Collection::Reports, stored);
      if (!target_theme.empty()) j["targeting"] = api::targeting(*store, target_theme, quota);
      emit(out, j);
      std::vector<std::vector<std::string>> table;
      for (const auto& cell : j.at("matrix"))
        table.push_back({cell.at("theme_id").get<std::string>(), cell.at("group_id").get<std::string>(),
                         fixed(cell.at("score").get<double>()), std::to_string(cell.at("support").get<std::size_t>())});
      print_table(err, {"theme", "group", "readiness", "responses"}, table);
    };
  });

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API over the store");
  int port = std::atoi(env_or("INCAT_PORT", "8080").c_str());
  ServiceConfig service_config;
  service_config.bearer_token = env_or("INCAT_TOKEN", "");
  serve->add_option("--port", port, "Port (env INCAT_PORT)")->capture_default_str();
  serve->add_option("--host", service_config.host)->capture_default_str();
  serve->add_option("--token", service_config.bearer_token, "Bearer token (env INCAT_TOKEN)");
  serve->add_option("--cors-origin", service_config.cors_origin)->capture_default_str();
  serve->callback([&] {
    action = [&] {
      auto store = open_store();
      Service service(*store, service_config);
      err << "serving " << store->root().string() << " on " << service_config.host << ":" << port << '\n';
      service.run(port);
    };
  });

  std::vector<std::string> argv;
  argv.reserve(args.size());
  for (auto it = args.rbegin(); it != args.rend(); ++it) argv.push_back(*it);  // CLI11 takes reversed args
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (action) action();
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}

} // namespace incat::cli
