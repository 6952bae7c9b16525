#include <gtest/gtest.h>

#include <random>

#include "cfgadv/gea.hpp"
#include "oracles.hpp"

using namespace cfgadv;

namespace {

/// Chain n0..n(m-1) where m = n - exits, the last chain block fanning out to
/// `exits` sinks, plus `skips` edges i -> i+2 along the chain.
Cfg shaped(const std::string& name, int n, int exits, int skips) {
  std::vector<NodeId> nodes;
  for (int i = 0; i < n; ++i) nodes.push_back("n" + std::to_string(i));
  std::vector<Edge> edges;
  const int m = std::max(1, n - exits);
  for (int i = 0; i + 1 < m; ++i) edges.emplace_back(nodes[i], nodes[i + 1]);
  for (int e = m; e < n; ++e) edges.emplace_back(nodes[m - 1], nodes[e]);
  for (int i = 0; i < skips; ++i) edges.emplace_back(nodes[i], nodes[i + 2]);
  return Cfg::build(name, nodes[0], nodes, edges);
}

Sample sized(const std::string& id, Label l, int n) {
  Sample s{id, l, shaped(id, n, 1, 0)};
  s.graph.label = l;
  return s;
}

}  // namespace

TEST(Splice, SingleNodes) {
  const Cfg a = Cfg::build("a", "A", {"A"}, {}), b = Cfg::build("b", "B", {"B"}, {});
  const auto s = splice(a, b);
  EXPECT_EQ(s.combined.node_count(), 4u);
  EXPECT_EQ(s.combined.edge_count(), 4u);
  const std::set<Edge> want{{kGlueEntry, "org:A"}, {kGlueEntry, "sel:B"}, {"org:A", kGlueExit}, {"sel:B", kGlueExit}};
  EXPECT_EQ(std::set<Edge>(s.combined.edges.begin(), s.combined.edges.end()), want);
  EXPECT_EQ(s.combined.entry, kGlueEntry);
  EXPECT_EQ(s.combined.exits, std::set<NodeId>{kGlueExit});
  EXPECT_TRUE(verify_splice(s, a, b).empty());
}

TEST(Splice, CountLawExample) {
  const Cfg org = shaped("o", 10, 2, 3), sel = shaped("s", 24, 3, 7);
  ASSERT_EQ(org.edge_count(), 12u);
  ASSERT_EQ(org.exits.size(), 2u);
  ASSERT_EQ(sel.edge_count(), 30u);
  ASSERT_EQ(sel.exits.size(), 3u);
  const auto s = splice(org, sel);
  EXPECT_EQ(s.combined.node_count(), 36u);
  EXPECT_EQ(s.combined.edge_count(), 49u);
  EXPECT_TRUE(verify_splice(s, org, sel).empty());
}

TEST(Splice, SelfSplice) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const Cfg g = oracle::random_program(rng, 15);
    const auto s = splice(g, g);
    EXPECT_EQ(s.combined.node_count(), 2 * g.node_count() + 2);
    EXPECT_TRUE(verify_splice(s, g, g).empty());
  }
}

TEST(Splice, PartitionAndPrefixes) {
  const Cfg org = shaped("o", 6, 1, 2), sel = shaped("s", 4, 2, 0);
  const auto s = splice(org, sel);
  EXPECT_EQ(s.org_nodes.size(), 6u);
  EXPECT_EQ(s.sel_nodes.size(), 4u);
  EXPECT_EQ(s.glue_nodes, (std::set<NodeId>{kGlueEntry, kGlueExit}));
  for (const auto& n : s.org_nodes) EXPECT_EQ(n.rfind("org:", 0), 0u);
  for (const auto& n : s.sel_nodes) EXPECT_EQ(n.rfind("sel:", 0), 0u);
}

TEST(Splice, DeterministicSerialization) {
  std::mt19937_64 rng(2);
  const Cfg a = oracle::random_graph(rng, 20), b = oracle::random_graph(rng, 20);
  EXPECT_EQ(serialize_cfg(splice(a, b).combined), serialize_cfg(splice(a, b).combined));
  const Cfg back = parse_cfg(serialize_cfg(splice(a, b).combined));
  EXPECT_TRUE(structurally_equal(back, splice(a, b).combined));
}

TEST(Splice, SizeFeaturesDominate) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const Cfg a = oracle::random_graph(rng, 12), b = oracle::random_graph(rng, 12);
    const auto fa = extract_features(a), fs = extract_features(splice(a, b).combined);
    EXPECT_GT(fs[kNodeCount], fa[kNodeCount]);
    EXPECT_GT(fs[kEdgeCount], fa[kEdgeCount]);
  }
}

// Each verifier rule fires when the splice is tampered with.
TEST(VerifySplice, DetectsTampering) {
  const Cfg org = shaped("o", 5, 1, 1), sel = shaped("s", 4, 1, 0);
  auto has = [](const std::vector<std::string>& v, const std::string& prefix) {
    for (const auto& s : v)
      if (s.rfind(prefix, 0) == 0) return true;
    return false;
  };
  {
    auto s = splice(org, sel);
    s.combined.edges.erase(std::find(s.combined.edges.begin(), s.combined.edges.end(), Edge{"org:n0", "org:n1"}));
    s.combined.recompute_exits();
    const auto v = verify_splice(s, org, sel);
    EXPECT_TRUE(has(v, "org-induced-edges-mismatch")) << ::testing::PrintToString(v);
    EXPECT_TRUE(has(v, "count-law"));
  }
  {
    auto s = splice(org, sel);
    s.combined.edges.erase(
        std::find(s.combined.edges.begin(), s.combined.edges.end(), Edge{kGlueEntry, "org:n0"}));
    s.combined.recompute_exits();
    EXPECT_TRUE(has(verify_splice(s, org, sel), "glue-entry"));
  }
  {
    auto s = splice(org, sel);
    s.combined.edges.erase(std::find(s.combined.edges.begin(), s.combined.edges.end(), Edge{"org:n4", kGlueExit}));
    s.combined.recompute_exits();
    const auto v = verify_splice(s, org, sel);
    EXPECT_TRUE(has(v, "preserved-path"));
    EXPECT_TRUE(has(v, "unique-exit") || has(v, "combined-invalid"));
  }
  {
    auto s = splice(org, sel);
    s.sel_nodes.insert("org:n0");
    EXPECT_TRUE(has(verify_splice(s, org, sel), "partition"));
  }
}

TEST(VerifySplice, ManyRandomSplicesPass) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    const Cfg a = oracle::random_program(rng, 14), b = oracle::random_graph(rng, 14);
    const auto s = splice(a, b);
    const auto v = verify_splice(s, a, b);
    EXPECT_TRUE(v.empty()) << "splice " << i << ": " << ::testing::PrintToString(v);
  }
}

TEST(VerifySplice, OriginalWithoutTerminatingPathIsReported) {
  // Entry loops forever; the lone exit is unreachable.
  const Cfg org = Cfg::build("loop", "A", {"A", "B", "Z"}, {{"A", "B"}, {"B", "A"}});
  const Cfg sel = Cfg::build("s", "S", {"S"}, {});
  const auto v = verify_splice(splice(org, sel), org, sel);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rfind("preserved-path", 0), 0u);
}

TEST(SelectTarget, MedianOfThree) {
  const std::vector<Sample> pool{sized("b", Label::Benign, 9), sized("a", Label::Benign, 3), sized("c", Label::Benign, 7)};
  EXPECT_EQ(select_target(pool, Label::Benign, {TargetStrategy::MedianSize, {}}).graph.node_count(), 7u);
  EXPECT_EQ(select_target(pool, Label::Benign, {TargetStrategy::MinSize, {}}).graph.node_count(), 3u);
  EXPECT_EQ(select_target(pool, Label::Benign, {TargetStrategy::MaxSize, {}}).graph.node_count(), 9u);
}

TEST(SelectTarget, LowerMedianOfFour) {
  const std::vector<Sample> pool{sized("a", Label::Benign, 12), sized("b", Label::Benign, 3),
                                 sized("c", Label::Benign, 9), sized("d", Label::Benign, 7)};
  EXPECT_EQ(select_target(pool, Label::Benign, {TargetStrategy::MedianSize, {}}).graph.node_count(), 7u);
}

TEST(SelectTarget, MaxTieBreaksBySmallerId) {
  const std::vector<Sample> pool{sized("zeta", Label::Benign, 9), sized("alpha", Label::Benign, 9),
                                 sized("mid", Label::Benign, 4)};
  EXPECT_EQ(select_target(pool, Label::Benign, {TargetStrategy::MaxSize, {}}).id, "alpha");
}

TEST(SelectTarget, ClassFilterExplicitAndErrors) {
  const std::vector<Sample> pool{sized("m1", Label::Malicious, 50), sized("b1", Label::Benign, 2)};
  EXPECT_EQ(select_target(pool, Label::Benign, {TargetStrategy::MaxSize, {}}).id, "b1");
  EXPECT_EQ(select_target(pool, Label::Malicious, {TargetStrategy::Explicit, "m1"}).id, "m1");
  EXPECT_THROW(select_target(pool, Label::Benign, {TargetStrategy::Explicit, "m1"}), DataError);
  EXPECT_THROW(select_target(std::vector<Sample>{}, Label::Benign, {}), DataError);
}

TEST(Augment, AddsExactlyAndKeepsNodes) {
  const Cfg g = shaped("t", 8, 1, 0);
  const Cfg h = augment_edges(g, 5, 7);
  EXPECT_EQ(h.node_count(), g.node_count());
  EXPECT_EQ(h.edge_count(), g.edge_count() + 5);
  EXPECT_EQ(h.exits, g.exits);
  EXPECT_TRUE(validate(h).empty());
  EXPECT_GT(density(h), density(g));
  // A larger level extends a smaller one under the same seed.
  const Cfg k = augment_edges(g, 9, 7);
  const std::set<Edge> eh(h.edges.begin(), h.edges.end()), ek(k.edges.begin(), k.edges.end());
  EXPECT_TRUE(std::includes(ek.begin(), ek.end(), eh.begin(), eh.end()));
  EXPECT_TRUE(structurally_equal(augment_edges(g, 0, 7), g));
}

TEST(Augment, RejectsTooManyEdges) {
  const Cfg g = shaped("t", 3, 1, 0);  // n0->n1->n2: absent pairs from non-exits are n0->n2, n1->n0
  EXPECT_NO_THROW(augment_edges(g, 2, 1));
  EXPECT_THROW(augment_edges(g, 3, 1), DataError);
}

namespace {

/// Halfspace on the normalized node-count feature: more than half the
/// training range reads as malicious.
struct SizeModel {
  Model model;
  Normalizer norm;
};

SizeModel size_model(const std::vector<Sample>& fit_on) {
  std::vector<FeatureVector> f;
  for (const auto& s : fit_on) f.push_back(extract_features(s.graph));
  Mat W = Mat::Zero(2, kFeatureCount);
  W(1, kNodeCount) = 1.0;
  Vec b(2);
  b << 0, -0.5;
  return {Model::from_layers({DenseLayer{W, b}}), Normalizer::fit(f)};
}

}  // namespace

TEST(GeaAttack, FlipsWithLargeTargetAndVerifiesAll) {
  std::vector<Sample> benign, all;
  for (int i = 0; i < 6; ++i) benign.push_back(sized("b" + std::to_string(i), Label::Benign, 3 + i));
  all = benign;
  all.push_back(sized("m-big", Label::Malicious, 40));
  all.push_back(sized("m-small", Label::Malicious, 1));
  const auto sm = size_model(all);

  const auto big = gea_attack(sm.model, sm.norm, benign, all[6], 2);
  EXPECT_EQ(big.attacked, 6u);
  EXPECT_EQ(big.flipped, 6u);
  EXPECT_EQ(big.mr_percent, 100.0);
  EXPECT_EQ(big.violations, 0u);
  for (const auto& o : big.outcomes) {
    EXPECT_TRUE(o.functionality_preserving);
    EXPECT_EQ(o.target_id, "m-big");
  }
  const auto small = gea_attack(sm.model, sm.norm, benign, all[7]);
  EXPECT_EQ(small.mr_percent, 0.0);

  const auto rows = gea_size_experiment(sm.model, sm.norm, benign, all);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].target_nodes, 1u);
  EXPECT_EQ(rows[2].target_nodes, 40u);
  EXPECT_EQ(rows[0].direction, "Ben2Mal");
  EXPECT_LE(rows[0].result.mr_percent, rows[2].result.mr_percent);
}

TEST(GeaAttack, SkipsMisclassifiedAndRejectsBadInput) {
  std::vector<Sample> pool{sized("b0", Label::Benign, 2), sized("b1", Label::Benign, 30), sized("m", Label::Malicious, 3)};
  const auto sm = size_model(pool);
  const std::vector<Sample> originals{pool[0], pool[1]};
  const auto r = gea_attack(sm.model, sm.norm, originals, pool[2]);
  EXPECT_EQ(r.skipped, 1u);
  EXPECT_EQ(r.attacked, 1u);
  EXPECT_THROW(gea_attack(sm.model, sm.norm, std::vector<Sample>{}, pool[2]), DataError);
  EXPECT_THROW(gea_attack(sm.model, sm.norm, pool, pool[2]), DataError);
}

TEST(GeaAttack, SelfTargetSmoke) {
  std::vector<Sample> pool{sized("b0", Label::Benign, 2), sized("b1", Label::Benign, 3), sized("m", Label::Malicious, 30)};
  const auto sm = size_model(pool);
  const std::vector<Sample> originals{pool[0], pool[1]};
  const auto r = gea_attack(sm.model, sm.norm, originals, pool[1]);
  EXPECT_EQ(r.attacked, 2u);
  EXPECT_EQ(r.violations, 0u);
  for (const auto& o : r.outcomes) EXPECT_EQ(o.success, o.predicted != Label::Benign);
}

TEST(Density, LevelsIncreaseAndLevelZeroMatchesPlainAttack) {
  std::vector<Sample> mal;
  for (int i = 0; i < 5; ++i) mal.push_back(sized("m" + std::to_string(i), Label::Malicious, 20 + 5 * i));
  std::vector<Sample> all = mal;
  all.push_back(sized("b", Label::Benign, 10));
  // Malicious iff density is high: benign side pulls hard on density.
  std::vector<FeatureVector> f;
  for (const auto& s : all) f.push_back(extract_features(s.graph));
  Mat W = Mat::Zero(2, kFeatureCount);
  W(1, kNodeCount) = 1.0;
  W(0, kDensity) = 0.5;
  const Model m = Model::from_layers({DenseLayer{W, Vec::Zero(2)}});
  const Normalizer norm = Normalizer::fit(f);

  const std::vector<std::size_t> levels{0, 5, 20, 60};
  const auto out = density_experiment(m, norm, mal, all.back(), levels, 9);
  ASSERT_EQ(out.size(), 4u);
  const auto plain = gea_attack(m, norm, mal, all.back());
  EXPECT_EQ(out[0].result.mr_percent, plain.mr_percent);
  for (std::size_t i = 1; i < out.size(); ++i) {
    EXPECT_GT(out[i].target_density, out[i - 1].target_density);
    EXPECT_GT(out[i].result.mean_density, out[i - 1].result.mean_density);
    EXPECT_EQ(out[i].result.violations, 0u);
  }
  const std::vector<std::size_t> bad{5, 5};
  EXPECT_THROW(density_experiment(m, norm, mal, all.back(), bad, 9), UsageError);
  const std::vector<std::size_t> huge{1000};
  EXPECT_THROW(density_experiment(m, norm, mal, all.back(), huge, 9), DataError);
}
