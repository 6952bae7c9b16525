// Test-only reference computations. Nothing here shares code paths with the
// library implementations they check.
#ifndef CFGADV_TESTS_ORACLES_HPP
#define CFGADV_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cfgadv/graph.hpp"
#include "cfgadv/model.hpp"

namespace oracle {

/// Adjacency matrix in the node order of g.nodes.
inline std::vector<std::vector<bool>> adjacency(const cfgadv::Cfg& g) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) idx[g.nodes[i]] = i;
  std::vector<std::vector<bool>> a(g.nodes.size(), std::vector<bool>(g.nodes.size(), false));
  for (const auto& [s, d] : g.edges) a[idx[s]][idx[d]] = true;
  return a;
}

/// All simple paths from s to t by exhaustive DFS.
inline void simple_paths(const std::vector<std::vector<bool>>& a, std::size_t s, std::size_t t,
                         std::vector<std::size_t>& stack, std::vector<bool>& on,
                         std::vector<std::vector<std::size_t>>& out) {
  if (s == t) {
    out.push_back(stack);
    return;
  }
  for (std::size_t w = 0; w < a.size(); ++w) {
    if (!a[s][w] || on[w]) continue;
    on[w] = true;
    stack.push_back(w);
    simple_paths(a, w, t, stack, on, out);
    stack.pop_back();
    on[w] = false;
  }
}

/// Betweenness by enumerating every simple path of every ordered pair and
/// keeping the shortest ones.
inline std::vector<double> betweenness(const cfgadv::Cfg& g) {
  auto a = adjacency(g);
  const std::size_t n = a.size();
  std::vector<double> cb(n, 0.0);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t t = 0; t < n; ++t) {
      if (s == t) continue;
      std::vector<std::vector<std::size_t>> paths;
      std::vector<std::size_t> stack{s};
      std::vector<bool> on(n, false);
      on[s] = true;
      simple_paths(a, s, t, stack, on, paths);
      if (paths.empty()) continue;
      std::size_t best = std::numeric_limits<std::size_t>::max();
      for (const auto& p : paths) best = std::min(best, p.size());
      double sigma = 0;
      std::vector<double> through(n, 0.0);
      for (const auto& p : paths) {
        if (p.size() != best) continue;
        sigma += 1;
        for (std::size_t k = 1; k + 1 < p.size(); ++k) through[p[k]] += 1;
      }
      for (std::size_t v = 0; v < n; ++v) cb[v] += through[v] / sigma;
    }
  return cb;
}

inline constexpr long kInf = std::numeric_limits<long>::max() / 4;

/// Floyd-Warshall hop distances; kInf marks unreachable pairs.
inline std::vector<std::vector<long>> floyd_warshall(const cfgadv::Cfg& g) {
  auto a = adjacency(g);
  const std::size_t n = a.size();
  std::vector<std::vector<long>> d(n, std::vector<long>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) {
    d[i][i] = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (a[i][j] && i != j) d[i][j] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

inline std::vector<double> closeness(const cfgadv::Cfg& g) {
  auto d = floyd_warshall(g);
  std::vector<double> c(d.size(), 0.0);
  for (std::size_t v = 0; v < d.size(); ++v)
    for (std::size_t u = 0; u < d.size(); ++u)
      if (u != v && d[v][u] < kInf) c[v] += 1.0 / static_cast<double>(d[v][u]);
  return c;
}

/// {min, max, mean, median, std} with population std; zeros when empty.
inline std::vector<double> stats(std::vector<double> v) {
  if (v.empty()) return {0, 0, 0, 0, 0};
  std::sort(v.begin(), v.end());
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  const std::size_t n = v.size();
  double median = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
  return {v.front(), v.back(), mean, median, std::sqrt(var)};
}

inline std::vector<double> shortest_path_stats(const cfgadv::Cfg& g) {
  auto d = floyd_warshall(g);
  std::vector<double> lens;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j)
      if (i != j && d[i][j] < kInf) lens.push_back(static_cast<double>(d[i][j]));
  return stats(lens);
}

/// Random valid graph with 1..max_nodes nodes and arbitrary (possibly
/// cyclic, possibly disconnected) edges.
inline cfgadv::Cfg random_graph(std::mt19937_64& rng, std::size_t max_nodes, double p_edge = -1) {
  std::uniform_int_distribution<std::size_t> nd(1, max_nodes);
  const std::size_t n = nd(rng);
  std::uniform_real_distribution<double> u(0, 1);
  const double p = p_edge >= 0 ? p_edge : u(rng) * 0.6;
  std::vector<std::string> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back("n" + std::to_string(i));
  std::vector<cfgadv::Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j && i == 0) continue;
      if (u(rng) < p) edges.emplace_back(nodes[i], nodes[j]);
    }
  std::shuffle(nodes.begin(), nodes.end(), rng);
  return cfgadv::Cfg::build("rand", "n0", nodes, edges);
}

/// True if some exit is reachable from the entry.
inline bool entry_reaches_exit(const cfgadv::Cfg& g) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& [a, b] : g.edges) adj[a].push_back(b);
  std::set<std::string> seen{g.entry};
  std::vector<std::string> stack{g.entry};
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    if (g.exits.count(v)) return true;
    for (const auto& w : adj[v])
      if (seen.insert(w).second) stack.push_back(w);
  }
  return false;
}

/// Random graph resampled until the entry can reach an exit.
inline cfgadv::Cfg random_program(std::mt19937_64& rng, std::size_t max_nodes, double p_edge = -1) {
  for (;;) {
    cfgadv::Cfg g = random_graph(rng, max_nodes, p_edge);
    if (entry_reaches_exit(g)) return g;
  }
}

/// Same graph under a random injective renaming of node ids.
inline cfgadv::Cfg relabel(const cfgadv::Cfg& g, std::mt19937_64& rng) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) names.push_back("x" + std::to_string(i * 7 + 3));
  std::shuffle(names.begin(), names.end(), rng);
  std::map<std::string, std::string> m;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) m[g.nodes[i]] = names[i];
  std::vector<std::string> nodes;
  for (const auto& n : g.nodes) nodes.push_back(m[n]);
  std::shuffle(nodes.begin(), nodes.end(), rng);
  std::vector<cfgadv::Edge> edges;
  for (const auto& [s, d] : g.edges) edges.emplace_back(m[s], m[d]);
  std::shuffle(edges.begin(), edges.end(), rng);
  return cfgadv::Cfg::build(g.name, m[g.entry], nodes, edges);
}

/// Plain nested-loop forward pass over a Model's raw parameters.
inline std::vector<double> forward_probs(const cfgadv::Model& m, const std::vector<double>& x) {
  std::vector<double> a = x;
  const auto& layers = m.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& W = layers[l].weights;
    std::vector<double> z(static_cast<std::size_t>(W.rows()), 0.0);
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      double acc = layers[l].bias(r);
      for (Eigen::Index c = 0; c < W.cols(); ++c) acc += W(r, c) * a[static_cast<std::size_t>(c)];
      z[static_cast<std::size_t>(r)] = (l + 1 < layers.size()) ? std::max(acc, 0.0) : acc;
    }
    a = z;
  }
  double mx = *std::max_element(a.begin(), a.end()), sum = 0;
  for (double& v : a) sum += (v = std::exp(v - mx));
  for (double& v : a) v /= sum;
  return a;
}

/// Central finite differences of f at x with step h.
inline Eigen::VectorXd finite_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                         const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd p = x, q = x;
    p(i) += h;
    q(i) -= h;
    g(i) = (f(p) - f(q)) / (2 * h);
  }
  return g;
}

}  // namespace oracle

#endif  // CFGADV_TESTS_ORACLES_HPP
