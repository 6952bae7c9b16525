#ifndef CFGADV_FEATURES_HPP
#define CFGADV_FEATURES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfgadv/error.hpp"
#include "cfgadv/graph.hpp"

namespace cfgadv {

inline constexpr std::size_t kFeatureCount = 23;

/// Layout: four five-stat groups {min, max, mean, median, std} for
/// betweenness, closeness, degree centrality and shortest-path length,
/// followed by density, edge count and node count.
enum FeatureIndex : std::size_t {
  kBetweenness = 0,
  kCloseness = 5,
  kDegree = 10,
  kShortestPath = 15,
  kDensity = 20,
  kEdgeCount = 21,
  kNodeCount = 22,
};

using FeatureVector = std::array<double, kFeatureCount>;

inline const std::array<const char*, kFeatureCount>& feature_names() {
  static const std::array<const char*, kFeatureCount> names = {
      "betweenness_min", "betweenness_max", "betweenness_mean", "betweenness_median", "betweenness_std",
      "closeness_min",   "closeness_max",   "closeness_mean",   "closeness_median",   "closeness_std",
      "degree_min",      "degree_max",      "degree_mean",      "degree_median",      "degree_std",
      "path_min",        "path_max",        "path_mean",        "path_median",        "path_std",
      "density",         "edges",           "nodes"};
  return names;
}

struct SummaryStats {
  double min = 0, max = 0, mean = 0, median = 0, std = 0;
};

/// Population statistics; even-length medians average the two central values.
/// An empty sample yields all zeros.
inline SummaryStats summarize(std::vector<double> values) {
  SummaryStats s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  s.min = values.front();
  s.max = values.back();
  s.median = (n % 2 == 1) ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  double sum = std::accumulate(values.begin(), values.end(), 0.0);
  s.mean = std::clamp(sum / static_cast<double>(n), s.min, s.max);
  double ss = 0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(n));
  return s;
}

/// Directed, unnormalized betweenness (Brandes accumulation over BFS DAGs).
/// Values are in declaration order of g.nodes.
inline std::vector<double> betweenness(const Cfg& g) {
  IndexedGraph ig(g);
  const std::size_t n = ig.size();
  std::vector<double> cb(n, 0.0);
  std::vector<double> sigma(n), delta(n);
  std::vector<long> dist(n);
  std::vector<std::vector<std::size_t>> preds(n);
  std::vector<std::size_t> order;
  order.reserve(n);
  std::queue<std::size_t> q;

  for (std::size_t s = 0; s < n; ++s) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    for (auto& p : preds) p.clear();
    order.clear();

    sigma[s] = 1.0;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      auto v = q.front();
      q.pop();
      order.push_back(v);
      for (auto w : ig.out[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      auto w = *it;
      for (auto v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) cb[w] += delta[w];
    }
  }
  return cb;
}

namespace detail {

/// BFS hop distances from src; -1 marks unreachable nodes.
inline std::vector<long> bfs_distances(const IndexedGraph& ig, std::size_t src) {
  std::vector<long> dist(ig.size(), -1);
  std::queue<std::size_t> q;
  dist[src] = 0;
  q.push(src);
  while (!q.empty()) {
    auto v = q.front();
    q.pop();
    for (auto w : ig.out[v])
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        q.push(w);
      }
  }
  return dist;
}

}  // namespace detail

/// Harmonic closeness: sum of 1/d(v,u) over nodes u reachable from v.
inline std::vector<double> closeness(const Cfg& g) {
  IndexedGraph ig(g);
  std::vector<double> c(ig.size(), 0.0);
  for (std::size_t v = 0; v < ig.size(); ++v) {
    auto dist = detail::bfs_distances(ig, v);
    for (std::size_t u = 0; u < ig.size(); ++u)
      if (u != v && dist[u] > 0) c[v] += 1.0 / static_cast<double>(dist[u]);
  }
  return c;
}

inline std::vector<double> degree_centrality(const Cfg& g) {
  IndexedGraph ig(g);
  const std::size_t n = ig.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  for (std::size_t v = 0; v < n; ++v)
    d[v] = static_cast<double>(ig.in[v].size() + ig.out[v].size()) / static_cast<double>(n - 1);
  return d;
}

/// Summary of all finite directed distances d(u,v), u != v.
inline SummaryStats shortest_path_stats(const Cfg& g) {
  IndexedGraph ig(g);
  std::vector<double> lengths;
  for (std::size_t v = 0; v < ig.size(); ++v) {
    auto dist = detail::bfs_distances(ig, v);
    for (std::size_t u = 0; u < ig.size(); ++u)
      if (u != v && dist[u] > 0) lengths.push_back(static_cast<double>(dist[u]));
  }
  return summarize(std::move(lengths));
}

inline double density(const Cfg& g) {
  const double n = static_cast<double>(g.node_count());
  if (g.node_count() < 2) return 0.0;
  return static_cast<double>(g.edge_count()) / (n * (n - 1));
}

inline FeatureVector extract_features(const Cfg& g) {
  FeatureVector f{};
  auto put = [&f](std::size_t base, const SummaryStats& s) {
    f[base + 0] = s.min;
    f[base + 1] = s.max;
    f[base + 2] = s.mean;
    f[base + 3] = s.median;
    f[base + 4] = s.std;
  };
  put(kBetweenness, summarize(betweenness(g)));
  put(kCloseness, summarize(closeness(g)));
  put(kDegree, summarize(degree_centrality(g)));
  put(kShortestPath, shortest_path_stats(g));
  f[kDensity] = density(g);
  f[kEdgeCount] = static_cast<double>(g.edge_count());
  f[kNodeCount] = static_cast<double>(g.node_count());
  return f;
}

/// Per-feature min-max bounds fitted on a training split.
class Normalizer {
 public:
  Normalizer() { bounds_.fill({0.0, 0.0}); }

  static Normalizer fit(std::span<const FeatureVector> vectors) {
    if (vectors.empty()) throw DataError("cannot fit a normalizer on an empty training set");
    Normalizer n;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& v : vectors) {
        lo = std::min(lo, v[i]);
        hi = std::max(hi, v[i]);
      }
      n.bounds_[i] = {lo, hi};
    }
    return n;
  }

  /// Maps into [0,1]^23, clipping values outside the fitted range.
  /// Constant features map to 0.
  FeatureVector apply(const FeatureVector& v) const {
    FeatureVector out{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      const auto [lo, hi] = bounds_[i];
      out[i] = hi > lo ? std::clamp((v[i] - lo) / (hi - lo), 0.0, 1.0) : 0.0;
    }
    return out;
  }

  const std::array<std::pair<double, double>, kFeatureCount>& bounds() const { return bounds_; }

  nlohmann::json to_json() const {
    auto arr = nlohmann::json::array();
    for (const auto& [lo, hi] : bounds_) arr.push_back({lo, hi});
    return {{"features", kFeatureCount}, {"bounds", arr}};
  }

  static Normalizer from_json(const nlohmann::json& j) {
    Normalizer n;
    const auto& arr = j.at("bounds");
    if (!arr.is_array() || arr.size() != kFeatureCount)
      throw DataError("normalizer must hold " + std::to_string(kFeatureCount) + " (lo, hi) pairs");
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      double lo = arr[i].at(0).get<double>(), hi = arr[i].at(1).get<double>();
      if (!(hi >= lo)) throw DataError("normalizer bound " + std::to_string(i) + " has hi < lo");
      n.bounds_[i] = {lo, hi};
    }
    return n;
  }

 private:
  std::array<std::pair<double, double>, kFeatureCount> bounds_;
};

}  // namespace cfgadv

#endif  // CFGADV_FEATURES_HPP
