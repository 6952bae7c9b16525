#ifndef CFGADV_GEA_HPP
#define CFGADV_GEA_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfgadv/corpus.hpp"
#include "cfgadv/error.hpp"
#include "cfgadv/features.hpp"
#include "cfgadv/graph.hpp"
#include "cfgadv/model.hpp"
#include "cfgadv/parallel.hpp"

namespace cfgadv {

inline constexpr std::string_view kOrgPrefix = "org:";
inline constexpr std::string_view kSelPrefix = "sel:";
inline const NodeId kGlueEntry = "glue:entry";
inline const NodeId kGlueExit = "glue:exit";

/// An original graph and a selected target joined by two glue blocks. The
/// glue entry branches to both entries (an opaque predicate that always takes
/// the original side); every exit of either part falls through to the glue
/// exit.
struct GeaSplice {
  Cfg combined;
  std::set<NodeId> org_nodes;
  std::set<NodeId> sel_nodes;
  std::set<NodeId> glue_nodes;
  std::optional<Label> source;
  std::string target_id;
};

inline GeaSplice splice(const Cfg& org, const Cfg& sel) {
  GeaSplice s;
  s.source = org.label;
  s.target_id = sel.name;
  Cfg& g = s.combined;
  g.name = org.name + "+" + sel.name;
  g.entry = kGlueEntry;
  g.nodes.reserve(org.nodes.size() + sel.nodes.size() + 2);
  g.edges.reserve(org.edges.size() + sel.edges.size() + 2 + org.exits.size() + sel.exits.size());

  g.add_node(kGlueEntry);
  for (const auto& n : org.nodes) {
    g.add_node(std::string(kOrgPrefix) + n);
    s.org_nodes.insert(g.nodes.back());
  }
  for (const auto& n : sel.nodes) {
    g.add_node(std::string(kSelPrefix) + n);
    s.sel_nodes.insert(g.nodes.back());
  }
  g.add_node(kGlueExit);
  s.glue_nodes = {kGlueEntry, kGlueExit};

  g.add_edge(kGlueEntry, std::string(kOrgPrefix) + org.entry);
  g.add_edge(kGlueEntry, std::string(kSelPrefix) + sel.entry);
  for (const auto& [a, b] : org.edges) g.add_edge(std::string(kOrgPrefix) + a, std::string(kOrgPrefix) + b);
  for (const auto& [a, b] : sel.edges) g.add_edge(std::string(kSelPrefix) + a, std::string(kSelPrefix) + b);
  for (const auto& x : org.exits) g.add_edge(std::string(kOrgPrefix) + x, kGlueExit);
  for (const auto& x : sel.exits) g.add_edge(std::string(kSelPrefix) + x, kGlueExit);
  g.label = org.label;
  g.recompute_exits();
  return s;
}

namespace detail {

inline std::optional<std::string> strip(std::string_view id, std::string_view prefix) {
  if (id.substr(0, prefix.size()) != prefix) return std::nullopt;
  return std::string(id.substr(prefix.size()));
}

/// Induced subgraph on `part`, mapped back through prefix stripping, must
/// equal `original` exactly.
inline void check_embedding(const Cfg& combined, const std::set<NodeId>& part, std::string_view prefix,
                            const Cfg& original, std::vector<std::string>& out) {
  const std::string tag(prefix.substr(0, prefix.size() - 1));
  std::set<NodeId> nodes;
  for (const auto& n : part) {
    auto s = strip(n, prefix);
    if (!s) {
      out.push_back(tag + "-prefix: " + n);
      continue;
    }
    nodes.insert(*s);
  }
  if (nodes != std::set<NodeId>(original.nodes.begin(), original.nodes.end()))
    out.push_back(tag + "-node-set-mismatch: " + original.name);
  std::set<Edge> edges;
  for (const auto& [a, b] : combined.edges)
    if (part.count(a) && part.count(b)) edges.insert({*strip(a, prefix), *strip(b, prefix)});
  if (edges != std::set<Edge>(original.edges.begin(), original.edges.end()))
    out.push_back(tag + "-induced-edges-mismatch: " + original.name);
}

}  // namespace detail

/// Graph-level functionality check of a splice against its inputs. Returns
/// one message per violated property; empty means the original's execution
/// path provably survives.
inline std::vector<std::string> verify_splice(const GeaSplice& s, const Cfg& org, const Cfg& sel) {
  std::vector<std::string> out;
  const Cfg& g = s.combined;
  for (auto& v : validate(g)) out.push_back("combined-invalid: " + v);

  // Partition.
  std::set<NodeId> all(g.nodes.begin(), g.nodes.end());
  std::set<NodeId> uni;
  std::size_t total = 0;
  for (const auto* part : {&s.org_nodes, &s.sel_nodes, &s.glue_nodes}) {
    uni.insert(part->begin(), part->end());
    total += part->size();
  }
  if (uni != all || total != all.size()) out.push_back("partition: node sets do not partition the combined graph");
  if (s.glue_nodes != std::set<NodeId>{kGlueEntry, kGlueExit}) out.push_back("glue-nodes: unexpected glue set");

  detail::check_embedding(g, s.org_nodes, kOrgPrefix, org, out);
  detail::check_embedding(g, s.sel_nodes, kSelPrefix, sel, out);

  // Wiring.
  if (g.entry != kGlueEntry) out.push_back("entry: combined entry is " + g.entry);
  std::set<NodeId> entry_succ;
  std::size_t entry_out = 0;
  std::set<NodeId> into_exit;
  for (const auto& [a, b] : g.edges) {
    if (a == kGlueEntry) {
      entry_succ.insert(b);
      ++entry_out;
    }
    if (b == kGlueExit) into_exit.insert(a);
  }
  const std::set<NodeId> want_succ{std::string(kOrgPrefix) + org.entry, std::string(kSelPrefix) + sel.entry};
  if (entry_out != 2 || entry_succ != want_succ) out.push_back("glue-entry: must branch to both entries");
  for (const auto& x : org.exits)
    if (!into_exit.count(std::string(kOrgPrefix) + x)) out.push_back("exit-unrouted: org:" + x);
  for (const auto& x : sel.exits)
    if (!into_exit.count(std::string(kSelPrefix) + x)) out.push_back("exit-unrouted: sel:" + x);
  if (g.exits != std::set<NodeId>{kGlueExit}) out.push_back("unique-exit: glue:exit is not the only exit");

  // Preserved path: glue:entry reaches glue:exit through org blocks only.
  {
    std::unordered_map<std::string_view, std::vector<std::string_view>> adj;
    for (const auto& [a, b] : g.edges) adj[a].push_back(b);
    std::set<std::string_view> seen{kGlueEntry};
    std::queue<std::string_view> q;
    q.push(kGlueEntry);
    bool reached = false;
    while (!q.empty() && !reached) {
      auto v = q.front();
      q.pop();
      for (auto w : adj[v]) {
        if (w == kGlueExit) {
          reached = true;
          break;
        }
        if (!s.org_nodes.count(NodeId(w)) || !seen.insert(w).second) continue;
        q.push(w);
      }
    }
    if (!reached) out.push_back("preserved-path: no org-only path from glue:entry to glue:exit");
  }

  // Count laws.
  if (g.node_count() != org.node_count() + sel.node_count() + 2) out.push_back("count-law: node count");
  if (g.edge_count() != org.edge_count() + sel.edge_count() + 2 + org.exits.size() + sel.exits.size())
    out.push_back("count-law: edge count");
  return out;
}

enum class TargetStrategy { MinSize, MedianSize, MaxSize, Explicit };

inline std::string_view to_string(TargetStrategy s) {
  switch (s) {
    case TargetStrategy::MinSize: return "minimum";
    case TargetStrategy::MedianSize: return "median";
    case TargetStrategy::MaxSize: return "maximum";
    case TargetStrategy::Explicit: return "explicit";
  }
  return "?";
}

struct TargetSelection {
  TargetStrategy strategy = TargetStrategy::MedianSize;
  std::string explicit_id;
};

/// Picks one graph of class `cls` from the pool by node count. Sizes are
/// ordered ascending with ties broken by sample id; the median is the lower
/// median; the maximum prefers the smaller id among equal sizes.
inline const Sample& select_target(std::span<const Sample> pool, Label cls, const TargetSelection& sel) {
  std::vector<const Sample*> c;
  for (const auto& s : pool)
    if (s.label == cls) c.push_back(&s);
  if (c.empty()) throw DataError("target pool has no " + std::string(to_string(cls)) + " graphs");
  if (sel.strategy == TargetStrategy::Explicit) {
    for (const auto* s : c)
      if (s->id == sel.explicit_id) return *s;
    throw DataError("target '" + sel.explicit_id + "' not found in pool");
  }
  std::sort(c.begin(), c.end(), [](const Sample* a, const Sample* b) {
    if (a->graph.node_count() != b->graph.node_count()) return a->graph.node_count() < b->graph.node_count();
    return a->id < b->id;
  });
  switch (sel.strategy) {
    case TargetStrategy::MinSize: return *c.front();
    case TargetStrategy::MedianSize: return *c[(c.size() - 1) / 2];
    default: {
      const auto top = c.back()->graph.node_count();
      auto it = std::find_if(c.begin(), c.end(), [top](const Sample* s) { return s->graph.node_count() == top; });
      return **it;
    }
  }
}

struct GeaOutcome {
  std::string sample_id;
  std::string target_id;
  Label source = Label::Malicious;
  Label predicted = Label::Malicious;
  bool success = false;
  double wall_ms = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  double density = 0;
  std::vector<std::string> violations;
  bool functionality_preserving = false;  // true iff violations is empty

  nlohmann::json to_json() const {
    return {{"sample_id", sample_id},
            {"target_id", target_id},
            {"source", to_string(source)},
            {"predicted", to_string(predicted)},
            {"success", success},
            {"ct_ms", wall_ms},
            {"nodes", nodes},
            {"edges", edges},
            {"density", density},
            {"functionality_preserving", functionality_preserving},
            {"violations", violations}};
  }
};

struct GeaResult {
  std::size_t attacked = 0;
  std::size_t flipped = 0;
  std::size_t skipped = 0;  // originals the model already misclassifies
  double mr_percent = 0;
  double mean_ct_ms = 0;
  double mean_density = 0;
  std::size_t violations = 0;  // splices failing verify_splice
  std::vector<GeaOutcome> outcomes;
};

/// Splices `target` into every correctly classified original and classifies
/// the result. CT covers splice, feature extraction, normalization and
/// inference; verification runs outside the timed region.
inline GeaResult gea_attack(const Model& m, const Normalizer& norm, std::span<const Sample> originals,
                            const Sample& target, unsigned threads = 1) {
  if (originals.empty()) throw DataError("GEA needs at least one original sample");
  const Label cls = originals.front().label;
  for (const auto& o : originals)
    if (o.label != cls) throw DataError("GEA originals must all belong to one class");

  std::vector<std::size_t> attacked;
  for (std::size_t i = 0; i < originals.size(); ++i)
    if (m.predict(to_vec(norm.apply(extract_features(originals[i].graph)))) == cls) attacked.push_back(i);

  GeaResult r;
  r.skipped = originals.size() - attacked.size();
  r.attacked = attacked.size();
  r.outcomes.resize(attacked.size());
  parallel_for(attacked.size(), threads, [&](std::size_t k) {
    const auto& org = originals[attacked[k]];
    GeaOutcome& o = r.outcomes[k];
    Stopwatch sw;
    GeaSplice s = splice(org.graph, target.graph);
    const FeatureVector f = extract_features(s.combined);
    o.predicted = m.predict(to_vec(norm.apply(f)));
    o.wall_ms = sw.elapsed_ms();
    o.sample_id = org.id;
    o.target_id = target.id;
    o.source = cls;
    o.success = o.predicted != cls;
    o.nodes = s.combined.node_count();
    o.edges = s.combined.edge_count();
    o.density = f[kDensity];
    o.violations = verify_splice(s, org.graph, target.graph);
    o.functionality_preserving = o.violations.empty();
  });
  double ct = 0, dens = 0;
  for (const auto& o : r.outcomes) {
    r.flipped += o.success;
    r.violations += !o.functionality_preserving;
    ct += o.wall_ms;
    dens += o.density;
  }
  if (r.attacked) {
    r.mr_percent = 100.0 * static_cast<double>(r.flipped) / static_cast<double>(r.attacked);
    r.mean_ct_ms = ct / static_cast<double>(r.attacked);
    r.mean_density = dens / static_cast<double>(r.attacked);
  }
  return r;
}

struct SizeRow {
  std::string direction;  // "Mal2Ben" or "Ben2Mal"
  TargetStrategy strategy = TargetStrategy::MinSize;
  std::string target_id;
  std::size_t target_nodes = 0;
  GeaResult result;
};

inline std::string direction_name(Label source) { return source == Label::Malicious ? "Mal2Ben" : "Ben2Mal"; }

/// Minimum, median and maximum opposite-class targets against one class of
/// originals.
inline std::vector<SizeRow> gea_size_experiment(const Model& m, const Normalizer& norm,
                                                std::span<const Sample> originals, std::span<const Sample> pool,
                                                unsigned threads = 1) {
  if (originals.empty()) throw DataError("GEA needs at least one original sample");
  const Label source = originals.front().label;
  std::vector<SizeRow> rows;
  for (auto st : {TargetStrategy::MinSize, TargetStrategy::MedianSize, TargetStrategy::MaxSize}) {
    const Sample& t = select_target(pool, opposite(source), {st, {}});
    rows.push_back({direction_name(source), st, t.id, t.graph.node_count(), gea_attack(m, norm, originals, t, threads)});
  }
  return rows;
}

/// Adds the first `count` edges of a seeded shuffle of the absent pairs
/// (u, v), u != v, whose source u already has a successor. Exits and the
/// node set are unchanged, so density grows strictly with count.
inline Cfg augment_edges(const Cfg& g, std::size_t count, std::uint64_t seed) {
  std::set<Edge> present(g.edges.begin(), g.edges.end());
  std::vector<NodeId> nodes = g.nodes;
  std::sort(nodes.begin(), nodes.end());
  std::vector<Edge> candidates;
  for (const auto& u : nodes) {
    if (g.exits.count(u)) continue;
    for (const auto& v : nodes)
      if (u != v && !present.count({u, v})) candidates.emplace_back(u, v);
  }
  if (count > candidates.size())
    throw DataError("cannot add " + std::to_string(count) + " edges to " + g.name + ": only " +
                    std::to_string(candidates.size()) + " absent pairs");
  std::mt19937_64 rng(seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  Cfg out = g;
  out.edges.insert(out.edges.end(), candidates.begin(), candidates.begin() + static_cast<long>(count));
  out.recompute_exits();
  return out;
}

struct DensityLevel {
  std::size_t edges_added = 0;
  double target_density = 0;
  GeaResult result;
};

/// Sweeps increasing edge counts added to the target with its node count
/// fixed. Every level reuses one shuffle, so level k+1 extends level k.
inline std::vector<DensityLevel> density_experiment(const Model& m, const Normalizer& norm,
                                                    std::span<const Sample> originals, const Sample& base_target,
                                                    std::span<const std::size_t> levels, std::uint64_t seed,
                                                    unsigned threads = 1) {
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (levels[i] <= levels[i - 1]) throw UsageError("density levels must be strictly increasing");
  std::vector<DensityLevel> out;
  for (auto k : levels) {
    Sample t = base_target;
    t.graph = augment_edges(base_target.graph, k, seed);
    out.push_back({k, density(t.graph), gea_attack(m, norm, originals, t, threads)});
  }
  return out;
}

}  // namespace cfgadv

#endif  // CFGADV_GEA_HPP
