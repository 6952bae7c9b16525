#ifndef CFGADV_PIPELINE_HPP
#define CFGADV_PIPELINE_HPP

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfgadv/attacks.hpp"
#include "cfgadv/config.hpp"
#include "cfgadv/corpus.hpp"
#include "cfgadv/dataset.hpp"
#include "cfgadv/error.hpp"
#include "cfgadv/features.hpp"
#include "cfgadv/gea.hpp"
#include "cfgadv/model.hpp"
#include "cfgadv/parallel.hpp"

namespace cfgadv {

#ifndef CFGADV_VERSION
#define CFGADV_VERSION "0.1.0"
#endif

/// Settings shared by every subcommand.
struct RunContext {
  PipelineConfig config;
  std::filesystem::path out = "out";
  std::uint64_t seed = 42;
  unsigned threads = 1;
  std::string config_path;  // empty when built-in defaults are used
};

/// Relative artifact paths under the output directory.
namespace artifact {
inline const std::filesystem::path kCorpus = "corpus";
inline const std::filesystem::path kCorpusManifest = "corpus/manifest.json";
inline const std::filesystem::path kTrainCsv = "features/train.csv";
inline const std::filesystem::path kTestCsv = "features/test.csv";
inline const std::filesystem::path kNormalizer = "features/normalizer.json";
inline const std::filesystem::path kModel = "model/model.json";
inline const std::filesystem::path kTrainLog = "model/train_log.csv";
inline const std::filesystem::path kMetrics = "model/metrics.json";
inline const std::filesystem::path kOsaaCsv = "results/osaa.csv";
inline const std::filesystem::path kOsaaSamples = "results/osaa_samples.jsonl";
inline const std::filesystem::path kGeaCsv = "results/gea.csv";
inline const std::filesystem::path kGeaSamples = "results/gea_samples.jsonl";
inline const std::filesystem::path kDensityCsv = "results/density.csv";
inline const std::filesystem::path kDensitySamples = "results/density_samples.jsonl";
inline const std::filesystem::path kReport = "report/report.txt";
inline const std::filesystem::path kTables = "report/tables.txt";

inline std::filesystem::path manifest_for(const std::string& command) {
  return std::filesystem::path("manifests") / (command + ".json");
}
}  // namespace artifact

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Provenance record written to manifests/<subcommand>.json.
struct RunManifest {
  std::string subcommand;
  std::string config_path;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string version = CFGADV_VERSION;
  std::string started_at;
  std::string finished_at;
  nlohmann::json summary = nlohmann::json::object();

  nlohmann::json to_json() const {
    return {{"subcommand", subcommand}, {"config", config_path.empty() ? nlohmann::json() : nlohmann::json(config_path)},
            {"seed", seed},             {"threads", threads},
            {"inputs", inputs},         {"outputs", outputs},
            {"version", version},       {"started_at", started_at},
            {"finished_at", finished_at}, {"summary", summary}};
  }
};

namespace detail {

inline void require(const RunContext& ctx, const std::filesystem::path& rel, const std::string& producer) {
  if (!std::filesystem::exists(ctx.out / rel))
    throw DataError("missing artifact " + (ctx.out / rel).string() + ": run '" + producer + "' first");
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw DataError("cannot write " + p.string());
  return os;
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) { open_out(p) << j.dump(2) << '\n'; }

inline nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

/// Comma-separated table with a fixed header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const std::string& origin) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw DataError(origin + ": missing column " + name);
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string c;
  while (std::getline(ss, c, ',')) cells.push_back(c);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline CsvTable read_csv(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw DataError(p.string() + ": empty file");
  t.header = split_csv_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != t.header.size())
      throw DataError(p.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                      " columns");
    t.rows.push_back(std::move(cells));
  }
  return t;
}

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// Runs `body` and writes the manifest with timing and listed artifacts.
inline RunManifest run_step(const RunContext& ctx, const std::string& command, std::vector<std::string> inputs,
                            const std::function<void(RunManifest&)>& body) {
  RunManifest m;
  m.subcommand = command;
  m.config_path = ctx.config_path;
  m.seed = ctx.seed;
  m.threads = ctx.threads;
  m.inputs = std::move(inputs);
  m.started_at = utc_timestamp();
  body(m);
  m.finished_at = utc_timestamp();
  write_json(ctx.out / artifact::manifest_for(command), m.to_json());
  return m;
}

inline std::vector<LabeledVector> normalize_rows(const std::vector<FeatureRow>& rows, const Normalizer& norm) {
  std::vector<LabeledVector> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({to_vec(norm.apply(r.features)), r.label});
  return out;
}

struct LoadedModel {
  Model model;
  Normalizer normalizer;
};

inline LoadedModel load_model(const RunContext& ctx) {
  require(ctx, artifact::kModel, "train");
  const auto j = read_json(ctx.out / artifact::kModel);
  try {
    return {Model::from_json(j), Normalizer::from_json(j.at("normalizer"))};
  } catch (const nlohmann::json::exception& e) {
    throw DataError((ctx.out / artifact::kModel).string() + ": " + e.what());
  }
}

/// Test-split samples of one class, in corpus order.
inline std::vector<Sample> test_samples(const std::vector<Sample>& corpus, const std::set<std::string>& test_ids,
                                        Label cls) {
  std::vector<Sample> out;
  for (const auto& s : corpus)
    if (s.label == cls && test_ids.count(s.id)) out.push_back(s);
  return out;
}

inline std::set<std::string> test_ids(const RunContext& ctx, const std::vector<Sample>& corpus) {
  require(ctx, artifact::kTestCsv, "extract");
  std::set<std::string> ids;
  for (const auto& r : read_feature_csv((ctx.out / artifact::kTestCsv).string())) ids.insert(r.sample_id);
  std::set<std::string> known;
  for (const auto& s : corpus) known.insert(s.id);
  for (const auto& id : ids)
    if (!known.count(id)) throw DataError("test split names sample '" + id + "' that is not in the corpus");
  return ids;
}

inline std::vector<Sample> load_pipeline_corpus(const RunContext& ctx) {
  require(ctx, artifact::kCorpusManifest, "gen-corpus");
  return load_corpus(ctx.out / artifact::kCorpus);
}

inline std::uint64_t density_seed(std::uint64_t seed) { return mix_seed(seed, 0x64656e73ULL); }

}  // namespace detail

inline RunManifest cmd_gen_corpus(const RunContext& ctx) {
  return detail::run_step(ctx, "gen-corpus", {}, [&](RunManifest& m) {
    CorpusSpec spec = ctx.config.corpus;
    spec.seed = ctx.seed;
    const auto corpus = generate_corpus(spec);
    nlohmann::json manifest = {{"spec", spec.to_json()},
                               {"seed", ctx.seed},
                               {"samples", corpus.size()},
                               {"manifest", artifact::manifest_for("gen-corpus").string()}};
    write_corpus(ctx.out / artifact::kCorpus, corpus, manifest);
    m.outputs = {artifact::kCorpus.string(), artifact::kCorpusManifest.string()};
    m.summary = {{"benign", spec.benign.count}, {"malicious", spec.malicious.count}};
  });
}

inline RunManifest cmd_extract(const RunContext& ctx) {
  return detail::run_step(ctx, "extract", {artifact::kCorpus.string()}, [&](RunManifest& m) {
    const auto corpus = detail::load_pipeline_corpus(ctx);
    if (corpus.empty()) throw DataError("corpus directory holds no samples");
    std::vector<FeatureRow> rows(corpus.size());
    parallel_for(corpus.size(), ctx.threads, [&](std::size_t i) {
      rows[i] = {corpus[i].id, corpus[i].label, extract_features(corpus[i].graph)};
    });
    const Split split = stratified_split(corpus, ctx.config.train_ratio, ctx.seed);
    std::vector<FeatureRow> train, test;
    std::vector<FeatureVector> train_vectors;
    for (auto i : split.train) {
      train.push_back(rows[i]);
      train_vectors.push_back(rows[i].features);
    }
    for (auto i : split.test) test.push_back(rows[i]);
    const Normalizer norm = Normalizer::fit(train_vectors);

    auto os = detail::open_out(ctx.out / artifact::kTrainCsv);
    write_feature_csv(os, train);
    os.close();
    os = detail::open_out(ctx.out / artifact::kTestCsv);
    write_feature_csv(os, test);
    os.close();
    nlohmann::json nj = norm.to_json();
    nj["manifest"] = artifact::manifest_for("extract").string();
    detail::write_json(ctx.out / artifact::kNormalizer, nj);
    m.outputs = {artifact::kTrainCsv.string(), artifact::kTestCsv.string(), artifact::kNormalizer.string()};
    m.summary = {{"train", train.size()}, {"test", test.size()}, {"train_ratio", ctx.config.train_ratio}};
  });
}

inline RunManifest cmd_train(const RunContext& ctx) {
  return detail::run_step(
      ctx, "train", {artifact::kTrainCsv.string(), artifact::kTestCsv.string(), artifact::kNormalizer.string()},
      [&](RunManifest& m) {
        detail::require(ctx, artifact::kTrainCsv, "extract");
        detail::require(ctx, artifact::kTestCsv, "extract");
        detail::require(ctx, artifact::kNormalizer, "extract");
        Normalizer norm;
        try {
          norm = Normalizer::from_json(detail::read_json(ctx.out / artifact::kNormalizer));
        } catch (const nlohmann::json::exception& e) {
          throw DataError((ctx.out / artifact::kNormalizer).string() + ": " + e.what());
        }
        const auto train_set = detail::normalize_rows(read_feature_csv((ctx.out / artifact::kTrainCsv).string()), norm);
        const auto test = detail::normalize_rows(read_feature_csv((ctx.out / artifact::kTestCsv).string()), norm);

        TrainConfig tc = ctx.config.train;
        tc.seed = ctx.seed;
        const TrainResult res = train(train_set, tc);
        const Metrics met = evaluate(res.model, test);

        nlohmann::json mj = res.model.to_json();
        mj["normalizer"] = norm.to_json();
        mj["normalizer_ref"] = artifact::kNormalizer.string();
        mj["manifest"] = artifact::manifest_for("train").string();
        detail::write_json(ctx.out / artifact::kModel, mj);

        auto log = detail::open_out(ctx.out / artifact::kTrainLog);
        log << "epoch,loss,train_acc\n";
        for (const auto& e : res.log)
          log << e.epoch << ',' << format_double(e.loss) << ',' << format_double(e.train_accuracy) << '\n';
        log.close();

        nlohmann::json metrics = met.to_json();
        metrics["test_samples"] = met.total();
        metrics["manifest"] = artifact::manifest_for("train").string();
        detail::write_json(ctx.out / artifact::kMetrics, metrics);

        m.outputs = {artifact::kModel.string(), artifact::kTrainLog.string(), artifact::kMetrics.string()};
        m.summary = met.to_json();
      });
}

/// Feature-space attacks on the test-split malware.
inline RunManifest cmd_attack_osaa(const RunContext& ctx) {
  return detail::run_step(ctx, "attack-osaa", {artifact::kModel.string(), artifact::kTestCsv.string()},
                          [&](RunManifest& m) {
    const auto loaded = detail::load_model(ctx);
    detail::require(ctx, artifact::kTestCsv, "extract");
    std::vector<FeatureRow> malware;
    for (auto& r : read_feature_csv((ctx.out / artifact::kTestCsv).string()))
      if (r.label == Label::Malicious) malware.push_back(std::move(r));
    if (malware.empty()) throw DataError("test split holds no malicious samples");
    const auto inputs = detail::normalize_rows(malware, loaded.normalizer);
    std::vector<std::string> ids;
    for (const auto& r : malware) ids.push_back(r.sample_id);

    const SuiteResult suite = run_attack_suite(loaded.model, inputs, ctx.config.attacks, ids, ctx.threads);

    auto csv = detail::open_out(ctx.out / artifact::kOsaaCsv);
    csv << "method,samples,MR_percent,avg_fg,mean_ct_ms\n";
    for (const auto& r : suite.rows)
      csv << to_string(r.method) << ',' << r.samples << ',' << format_double(r.mr_percent) << ','
          << (r.avg_fg_defined ? format_double(r.avg_fg) : std::string("NA")) << ',' << format_double(r.mean_ct_ms)
          << '\n';
    csv.close();
    auto jl = detail::open_out(ctx.out / artifact::kOsaaSamples);
    for (const auto& o : suite.outcomes) jl << o.to_json().dump() << '\n';
    jl.close();

    m.outputs = {artifact::kOsaaCsv.string(), artifact::kOsaaSamples.string()};
    m.summary = {{"attacked", suite.rows.empty() ? 0 : suite.rows.front().samples},
                 {"skipped_misclassified", suite.skipped}};
  });
}

/// Min/median/max target sizes in both directions; originals are the test
/// split, targets come from the whole corpus.
inline RunManifest cmd_attack_gea(const RunContext& ctx) {
  return detail::run_step(
      ctx, "attack-gea", {artifact::kModel.string(), artifact::kCorpus.string(), artifact::kTestCsv.string()},
      [&](RunManifest& m) {
        const auto loaded = detail::load_model(ctx);
        const auto corpus = detail::load_pipeline_corpus(ctx);
        const auto ids = detail::test_ids(ctx, corpus);

        auto csv = detail::open_out(ctx.out / artifact::kGeaCsv);
        auto jl = detail::open_out(ctx.out / artifact::kGeaSamples);
        csv << "direction,target_strategy,target_nodes,MR_percent,mean_ct_ms\n";
        std::size_t splices = 0, violations = 0;
        for (Label source : {Label::Malicious, Label::Benign}) {
          const auto originals = detail::test_samples(corpus, ids, source);
          if (originals.empty())
            throw DataError("test split holds no " + std::string(to_string(source)) + " samples");
          for (const auto& row : gea_size_experiment(loaded.model, loaded.normalizer, originals, corpus, ctx.threads)) {
            csv << row.direction << ',' << to_string(row.strategy) << ',' << row.target_nodes << ','
                << format_double(row.result.mr_percent) << ',' << format_double(row.result.mean_ct_ms) << '\n';
            for (const auto& o : row.result.outcomes) {
              auto j = o.to_json();
              j["direction"] = row.direction;
              j["target_strategy"] = to_string(row.strategy);
              jl << j.dump() << '\n';
            }
            splices += row.result.attacked;
            violations += row.result.violations;
          }
        }
        csv.close();
        jl.close();
        m.outputs = {artifact::kGeaCsv.string(), artifact::kGeaSamples.string()};
        m.summary = {{"splices", splices}, {"violations", violations}};
        if (violations)
          throw InvariantError(std::to_string(violations) + " of " + std::to_string(splices) +
                               " splices failed functionality verification; see " +
                               (ctx.out / artifact::kGeaSamples).string());
      });
}

/// Mal2Ben with extra edges added to one benign target at fixed node count.
inline RunManifest cmd_density_sweep(const RunContext& ctx) {
  return detail::run_step(
      ctx, "density-sweep", {artifact::kModel.string(), artifact::kCorpus.string(), artifact::kTestCsv.string()},
      [&](RunManifest& m) {
        const auto loaded = detail::load_model(ctx);
        const auto corpus = detail::load_pipeline_corpus(ctx);
        const auto ids = detail::test_ids(ctx, corpus);
        const auto originals = detail::test_samples(corpus, ids, Label::Malicious);
        if (originals.empty()) throw DataError("test split holds no malicious samples");
        const Sample& base = select_target(corpus, Label::Benign, {ctx.config.density_target, {}});
        const auto levels = density_experiment(loaded.model, loaded.normalizer, originals, base,
                                               ctx.config.density_levels, detail::density_seed(ctx.seed), ctx.threads);

        auto csv = detail::open_out(ctx.out / artifact::kDensityCsv);
        auto jl = detail::open_out(ctx.out / artifact::kDensitySamples);
        csv << "edges_added,target_nodes,target_density,MR_percent,mean_density,mean_ct_ms\n";
        std::size_t violations = 0, splices = 0;
        for (const auto& lv : levels) {
          csv << lv.edges_added << ',' << base.graph.node_count() << ',' << format_double(lv.target_density) << ','
              << format_double(lv.result.mr_percent) << ',' << format_double(lv.result.mean_density) << ','
              << format_double(lv.result.mean_ct_ms) << '\n';
          for (const auto& o : lv.result.outcomes) {
            auto j = o.to_json();
            j["edges_added"] = lv.edges_added;
            jl << j.dump() << '\n';
          }
          violations += lv.result.violations;
          splices += lv.result.attacked;
        }
        csv.close();
        jl.close();
        m.outputs = {artifact::kDensityCsv.string(), artifact::kDensitySamples.string()};
        m.summary = {{"target", base.id}, {"target_strategy", to_string(ctx.config.density_target)},
                     {"splices", splices}, {"violations", violations}};
        if (violations)
          throw InvariantError(std::to_string(violations) + " density-sweep splices failed functionality verification");
        for (std::size_t i = 1; i < levels.size(); ++i)
          if (!(levels[i].target_density > levels[i - 1].target_density))
            throw InvariantError("target density did not increase between sweep levels");
      });
}

namespace detail {

/// Left-aligned first column, right-aligned rest.
inline std::string render_table(const std::vector<std::string>& header,
                                const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) w[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) w[c] = std::max(w[c], r[c].size());
  std::string out;
  auto line = [&](const std::vector<std::string>& r) {
    std::string s;
    for (std::size_t c = 0; c < r.size(); ++c) {
      const std::string pad(w[c] - r[c].size(), ' ');
      s += c == 0 ? r[c] + pad : "  " + pad + r[c];
    }
    out += s + '\n';
  };
  line(header);
  std::size_t total = 0;
  for (auto x : w) total += x;
  out += std::string(total + 2 * (w.size() - 1), '-') + '\n';
  for (const auto& r : rows) line(r);
  return out;
}

inline std::string number_cell(const std::string& raw, int digits) {
  if (raw == "NA") return raw;
  try {
    return fixed(std::stod(raw), digits);
  } catch (const std::exception&) {
    throw DataError("report: bad number '" + raw + "'");
  }
}

inline std::string build_report(const RunContext& ctx, bool with_timing) {
  std::string out;
  const auto met = read_json(ctx.out / artifact::kMetrics);
  out += "Classifier (held-out test split, malware = positive)\n";
  try {
    out += render_table({"metric", "value"},
                        {{"accuracy", fixed(met.at("accuracy").get<double>(), 4)},
                         {"FNR", fixed(met.at("fnr").get<double>(), 4)},
                         {"FPR", fixed(met.at("fpr").get<double>(), 4)},
                         {"test samples", std::to_string(met.at("test_samples").get<std::size_t>())}});
  } catch (const nlohmann::json::exception& e) {
    throw DataError((ctx.out / artifact::kMetrics).string() + ": " + e.what());
  }

  const auto osaa = read_csv(ctx.out / artifact::kOsaaCsv);
  const std::string op = (ctx.out / artifact::kOsaaCsv).string();
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : osaa.rows) {
    std::vector<std::string> row{r[osaa.column("method", op)], r[osaa.column("samples", op)],
                                 number_cell(r[osaa.column("MR_percent", op)], 2),
                                 number_cell(r[osaa.column("avg_fg", op)], 2)};
    if (with_timing) row.push_back(number_cell(r[osaa.column("mean_ct_ms", op)], 3));
    rows.push_back(std::move(row));
  }
  std::vector<std::string> header{"Method", "Samples", "MR(%)", "Avg.FG"};
  if (with_timing) header.push_back("CT(ms)");
  out += "\nFeature-space attacks on test malware\n" + render_table(header, rows);

  const auto gea = read_csv(ctx.out / artifact::kGeaCsv);
  const std::string gp = (ctx.out / artifact::kGeaCsv).string();
  rows.clear();
  for (const auto& r : gea.rows) {
    std::vector<std::string> row{r[gea.column("direction", gp)], r[gea.column("target_strategy", gp)],
                                 r[gea.column("target_nodes", gp)], number_cell(r[gea.column("MR_percent", gp)], 2)};
    if (with_timing) row.push_back(number_cell(r[gea.column("mean_ct_ms", gp)], 3));
    rows.push_back(std::move(row));
  }
  header = {"Direction", "Target", "#Nodes", "MR(%)"};
  if (with_timing) header.push_back("CT(ms)");
  out += "\nGraph embedding attacks by target size\n" + render_table(header, rows);

  if (std::filesystem::exists(ctx.out / artifact::kDensityCsv)) {
    const auto den = read_csv(ctx.out / artifact::kDensityCsv);
    const std::string dp = (ctx.out / artifact::kDensityCsv).string();
    rows.clear();
    for (const auto& r : den.rows) {
      std::vector<std::string> row{r[den.column("edges_added", dp)], r[den.column("target_nodes", dp)],
                                   number_cell(r[den.column("target_density", dp)], 5),
                                   number_cell(r[den.column("MR_percent", dp)], 2)};
      if (with_timing) row.push_back(number_cell(r[den.column("mean_ct_ms", dp)], 3));
      rows.push_back(std::move(row));
    }
    header = {"Edges added", "#Nodes", "Target density", "MR(%)"};
    if (with_timing) header.push_back("CT(ms)");
    out += "\nMal2Ben density sweep\n" + render_table(header, rows);
  }
  return out;
}

}  // namespace detail

/// Writes report.txt (with CT columns) and tables.txt (without them, so two
/// runs with the same seed compare byte-equal).
inline RunManifest cmd_report(const RunContext& ctx) {
  return detail::run_step(ctx, "report",
                          {artifact::kOsaaCsv.string(), artifact::kGeaCsv.string(), artifact::kMetrics.string()},
                          [&](RunManifest& m) {
    detail::require(ctx, artifact::kOsaaCsv, "attack-osaa");
    detail::require(ctx, artifact::kGeaCsv, "attack-gea");
    detail::require(ctx, artifact::kMetrics, "train");
    detail::open_out(ctx.out / artifact::kReport) << detail::build_report(ctx, true);
    detail::open_out(ctx.out / artifact::kTables) << detail::build_report(ctx, false);
    m.outputs = {artifact::kReport.string(), artifact::kTables.string()};
  });
}

inline const std::vector<std::pair<std::string, std::function<RunManifest(const RunContext&)>>>& subcommands() {
  static const std::vector<std::pair<std::string, std::function<RunManifest(const RunContext&)>>> all = {
      {"gen-corpus", cmd_gen_corpus},   {"extract", cmd_extract},           {"train", cmd_train},
      {"attack-osaa", cmd_attack_osaa}, {"attack-gea", cmd_attack_gea},     {"density-sweep", cmd_density_sweep},
      {"report", cmd_report}};
  return all;
}

/// Every subcommand in pipeline order.
inline void run_all(const RunContext& ctx) {
  for (const auto& [name, fn] : subcommands()) fn(ctx);
}

}  // namespace cfgadv

#endif  // CFGADV_PIPELINE_HPP
