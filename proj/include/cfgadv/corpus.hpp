#ifndef CFGADV_CORPUS_HPP
#define CFGADV_CORPUS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfgadv/error.hpp"
#include "cfgadv/graph.hpp"

namespace cfgadv {

/// Shape parameters of one class of synthetic CFGs.
struct ClassProfile {
  std::size_t count = 1;
  double median_nodes = 20;  // median of the log-normal node-count distribution
  double dispersion = 0.8;   // sigma of log(node count)
  double p_branch = 0.3;     // chance a block opens a diamond
  double p_back = 0.0;       // chance a block carries a loop back-edge
  std::size_t max_nodes = 600;

  void check(const char* what) const {
    if (count < 1) throw UsageError(std::string(what) + ": count must be >= 1");
    if (!(median_nodes > 0) || !(dispersion > 0))
      throw UsageError(std::string(what) + ": node distribution parameters must be positive");
    if (p_branch < 0 || p_branch > 1 || p_back < 0 || p_back > 1)
      throw UsageError(std::string(what) + ": probabilities must lie in [0,1]");
    if (max_nodes < 1) throw UsageError(std::string(what) + ": max_nodes must be >= 1");
  }

  nlohmann::json to_json() const {
    return {{"count", count},       {"median_nodes", median_nodes}, {"dispersion", dispersion},
            {"p_branch", p_branch}, {"p_back", p_back},             {"max_nodes", max_nodes}};
  }
};

struct CorpusSpec {
  ClassProfile benign{276, 20, 1.15, 0.3, 0.0, 600};
  ClassProfile malicious{2281, 60, 0.75, 0.5, 0.15, 600};
  std::uint64_t seed = 42;

  void check() const {
    benign.check("benign");
    malicious.check("malicious");
  }

  const ClassProfile& profile(Label l) const { return l == Label::Benign ? benign : malicious; }

  nlohmann::json to_json() const {
    return {{"benign", benign.to_json()}, {"malicious", malicious.to_json()}, {"seed", seed}};
  }
};

struct Sample {
  std::string id;
  Label label = Label::Benign;
  Cfg graph;
};

/// SplitMix64 finalizer; mixes the corpus seed with a per-sample index.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::string block_id(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "bb%04zu", i);
  return buf;
}

/// Structured skeleton: a chain of basic blocks in which each block may open
/// a diamond (cond -> then/else -> join) and may carry a back-edge to an
/// earlier block. The last block is the single exit; every block is
/// reachable from the entry.
inline Cfg make_skeleton(std::string name, std::size_t n, double p_branch, double p_back, std::mt19937_64& rng) {
  std::vector<NodeId> nodes;
  nodes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) nodes.push_back(block_id(i));
  std::vector<Edge> edges;
  std::set<std::pair<std::size_t, std::size_t>> present;
  auto link = [&](std::size_t a, std::size_t b) {
    if (present.insert({a, b}).second) edges.emplace_back(nodes[a], nodes[b]);
  };

  std::bernoulli_distribution branch(p_branch), back(p_back);
  std::size_t i = 0;
  while (i + 1 < n) {
    if (i + 3 < n && branch(rng)) {
      link(i, i + 1);
      link(i, i + 2);
      link(i + 1, i + 3);
      link(i + 2, i + 3);
      i += 3;
    } else {
      link(i, i + 1);
      i += 1;
    }
  }
  // Back-edges never leave the final block, so it stays the unique exit.
  for (std::size_t v = 1; v + 1 < n; ++v) {
    if (!back(rng)) continue;
    std::uniform_int_distribution<std::size_t> to(0, v - 1);
    link(v, to(rng));
  }
  NodeId entry = nodes.front();
  return Cfg::build(std::move(name), std::move(entry), std::move(nodes), std::move(edges));
}

inline std::string sample_id(Label l, std::size_t index) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s-%05zu", l == Label::Benign ? "benign" : "malicious", index);
  return buf;
}

/// Benign samples first, then malicious; index 0 of each class is a
/// single-block program.
inline std::vector<Sample> generate_corpus(const CorpusSpec& spec) {
  spec.check();
  std::vector<Sample> out;
  out.reserve(spec.benign.count + spec.malicious.count);
  for (Label l : {Label::Benign, Label::Malicious}) {
    const auto& p = spec.profile(l);
    const std::uint64_t class_salt = l == Label::Benign ? 0x62656e69676eULL : 0x6d616c6963ULL;
    for (std::size_t k = 0; k < p.count; ++k) {
      std::mt19937_64 rng(mix_seed(spec.seed ^ class_salt, k));
      std::size_t n = 1;
      if (k > 0) {
        std::lognormal_distribution<double> size(std::log(p.median_nodes), p.dispersion);
        n = static_cast<std::size_t>(std::clamp(std::llround(size(rng)), 1LL, static_cast<long long>(p.max_nodes)));
      }
      Sample s{sample_id(l, k), l, make_skeleton(sample_id(l, k), n, p.p_branch, p.p_back, rng)};
      s.graph.label = l;
      out.push_back(std::move(s));
    }
  }
  return out;
}

inline std::filesystem::path sample_path(const std::filesystem::path& dir, const Sample& s) {
  return dir / std::string(to_string(s.label)) / (s.id + ".cfg");
}

inline void write_corpus(const std::filesystem::path& dir, const std::vector<Sample>& corpus,
                         const nlohmann::json& manifest = {}) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "benign");
  fs::create_directories(dir / "malicious");
  for (const auto& s : corpus) {
    std::ofstream os(sample_path(dir, s), std::ios::binary);
    if (!os) throw DataError("cannot write " + sample_path(dir, s).string());
    os << serialize_cfg(s.graph);
  }
  if (!manifest.is_null()) {
    std::ofstream os(dir / "manifest.json", std::ios::binary);
    os << manifest.dump(2) << '\n';
  }
}

/// Reads corpus/{benign,malicious}/*.cfg; the directory decides the label and
/// the file stem is the sample id. Samples are returned sorted by id.
inline std::vector<Sample> load_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("corpus directory not found: " + dir.string());
  std::vector<Sample> out;
  for (Label l : {Label::Benign, Label::Malicious}) {
    fs::path sub = dir / std::string(to_string(l));
    if (!fs::is_directory(sub)) continue;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(sub))
      if (e.is_regular_file() && e.path().extension() == ".cfg") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      Cfg g;
      try {
        g = parse_cfg(ss.str());
      } catch (const ParseError& e) {
        throw DataError(f.string() + ": " + e.what());
      }
      if (g.label && *g.label != l) throw DataError(f.string() + ": label header disagrees with directory");
      g.label = l;
      out.push_back({f.stem().string(), l, std::move(g)});
    }
  }
  std::sort(out.begin(), out.end(), [](const Sample& a, const Sample& b) { return a.id < b.id; });
  return out;
}

struct Split {
  std::vector<std::size_t> train;  // indices into the corpus
  std::vector<std::size_t> test;
};

/// Stratified split: each class contributes round(ratio * n_c) samples to
/// train, chosen by a seeded shuffle and clamped so that every class keeps at
/// least one sample on each side.
inline Split stratified_split(const std::vector<Label>& labels, double train_ratio, std::uint64_t seed) {
  if (!(train_ratio > 0 && train_ratio < 1)) throw UsageError("split ratio must lie in (0,1)");
  Split out;
  for (Label l : {Label::Benign, Label::Malicious}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == l) idx.push_back(i);
    if (idx.size() < 2)
      throw DataError(std::string("class ") + std::string(to_string(l)) + " is absent from one side of the split");
    std::mt19937_64 rng(mix_seed(seed, l == Label::Benign ? 0 : 1));
    std::shuffle(idx.begin(), idx.end(), rng);
    auto n_train = static_cast<std::size_t>(std::llround(train_ratio * static_cast<double>(idx.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<long>(n_train));
    out.test.insert(out.test.end(), idx.begin() + static_cast<long>(n_train), idx.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

inline Split stratified_split(const std::vector<Sample>& corpus, double train_ratio, std::uint64_t seed) {
  std::vector<Label> labels;
  labels.reserve(corpus.size());
  for (const auto& s : corpus) labels.push_back(s.label);
  return stratified_split(labels, train_ratio, seed);
}

}  // namespace cfgadv

#endif  // CFGADV_CORPUS_HPP
