#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "../support.hpp"
#include "locksmith/explain.hpp"
#include "locksmith/gnn.hpp"
#include "locksmith/graph.hpp"
#include "locksmith/lock.hpp"
#include "locksmith/netlist.hpp"

using namespace locksmith;
using graph::CircuitGraph;
using graph::FeatureMap;

namespace {

struct Trained {
  gnn::GinModel model;
  FeatureMap fmap;
  std::vector<gnn::TrainSample> samples;
};

// Kind-rule model over xor-locked fixtures; explanations should gravitate to
// the edges that touch the center.
Trained trained_model() {
  static Trained cache = [] {
    Trained t;
    t.fmap = FeatureMap::random_assignment(1);
    for (const char* name : {"c17.bench", "adder4.bench", "cmp4.bench"}) {
      Netlist nl = testsup::load_fixture(name);
      for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL, 6ULL}) {
        LockedCircuit lc = lock_xor(nl, 4, seed);
        for (int i = 0; i < 4; ++i) {
          gnn::TrainSample s;
          s.graph = graph::extract_subgraph(lc.netlist, t.fmap, lc.key.provenance.at(i), 2,
                                            lc.key);
          s.bit = *s.graph.center_bit;
          t.samples.push_back(std::move(s));
        }
      }
    }
    gnn::GinHyper h;
    h.hidden_dim = 16;
    h.num_layers = 2;
    h.seed = 17;
    gnn::TrainConfig cfg;
    cfg.max_epochs = 80;
    cfg.patience = 80;
    cfg.seed = 5;
    cfg.weights.er = 0.0;
    t.model = gnn::GinModel::init(h);
    gnn::train(t.model, t.samples, {}, cfg);
    return t;
  }();
  return cache;
}

}  // namespace

TEST_CASE("explanations require a trained model and a sane budget") {
  Trained t = trained_model();
  const CircuitGraph& g = t.samples.front().graph;

  gnn::GinModel untrained = gnn::GinModel::init(t.model.hyper);
  CHECK_THROWS_AS(explain::explain_graph(untrained, g), NetlistError);

  explain::ExplainOptions bad;
  bad.budget_k = 0;
  CHECK_THROWS_AS(explain::explain_graph(t.model, g, bad), NetlistError);
  bad.budget_k = static_cast<int>(g.edges.size()) + 1;
  CHECK_THROWS_AS(explain::explain_graph(t.model, g, bad), NetlistError);
  bad = {};
  bad.steps = 0;
  CHECK_THROWS_AS(explain::explain_graph(t.model, g, bad), NetlistError);
}

TEST_CASE("explanation scores stay in (0,1) and top-k is deterministic") {
  Trained t = trained_model();
  const CircuitGraph& g = t.samples.front().graph;

  explain::ExplainOptions opts;
  opts.budget_k = 4;
  explain::Explanation e1 = explain::explain_graph(t.model, g, opts);
  REQUIRE(e1.edge_scores.size() == g.edges.size());
  for (double s : e1.edge_scores) {
    CHECK(s > 0.0);
    CHECK(s < 1.0);
  }
  REQUIRE(e1.top_k.size() == 4);
  // top_k is sorted by score descending, ties by edge index.
  for (std::size_t i = 1; i < e1.top_k.size(); ++i) {
    const double a = e1.edge_scores[static_cast<std::size_t>(e1.top_k[i - 1])];
    const double b = e1.edge_scores[static_cast<std::size_t>(e1.top_k[i])];
    CHECK((a > b || (a == b && e1.top_k[i - 1] < e1.top_k[i])));
  }
  const double total =
      std::accumulate(e1.edge_scores.begin(), e1.edge_scores.end(), 0.0);
  CHECK(e1.mask_total == doctest::Approx(total).epsilon(1e-12));

  // The unmasked argmax matches a direct forward pass.
  auto pred = gnn::forward(t.model, g);
  CHECK(e1.predicted_label == (pred.logit1 > pred.logit0 ? 1 : 0));

  explain::Explanation e2 = explain::explain_graph(t.model, g, opts);
  CHECK(e2.edge_scores == e1.edge_scores);
  CHECK(e2.top_k == e1.top_k);
}

TEST_CASE("sparsity pressure drains mass from irrelevant edges") {
  Trained t = trained_model();
  const CircuitGraph& g = t.samples.front().graph;
  explain::ExplainOptions light, heavy;
  light.lambda = 0.01;
  heavy.lambda = 0.2;
  const double m_light = explain::explain_graph(t.model, g, light).mask_total;
  const double m_heavy = explain::explain_graph(t.model, g, heavy).mask_total;
  CHECK(m_heavy < m_light);
}

TEST_CASE("explanation accuracy scores intersections against the truth") {
  explain::Explanation a;
  a.top_k = {0, 3, 5};
  explain::Explanation b;
  b.top_k = {1, 2, 4};
  const std::vector<std::vector<int>> truth{{0, 5, 7}, {0, 5, 7}};
  // |{0,3,5} ∩ {0,5,7}| / 3 = 2/3; second one scores 0.
  CHECK(explain::explanation_accuracy({a, b}, truth) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK_THROWS_AS(explain::explanation_accuracy({a}, {{}}), NetlistError);
  CHECK_THROWS_AS(explain::explanation_accuracy({a, b}, {{0}}), NetlistError);

  // Budget larger than the truth set normalizes by the truth size.
  explain::Explanation c;
  c.top_k = {0, 1, 2, 3, 4};
  CHECK(explain::explanation_accuracy({c}, {{0, 1}}) == 1.0);
}

TEST_CASE("explanations serialize to json and dot") {
  Trained t = trained_model();
  const CircuitGraph& g = t.samples.front().graph;
  explain::ExplainOptions opts;
  opts.budget_k = 3;
  explain::Explanation e = explain::explain_graph(t.model, g, opts);

  const std::string js = explain::explanation_to_json(e, g);
  CHECK(js.find("edge_scores") != std::string::npos);
  CHECK(js.find("top_k") != std::string::npos);

  const std::string dot = explain::explanation_to_dot(e, g);
  CHECK(dot.rfind("graph", 0) == 0);
  CHECK(dot.find("peripheries=2") != std::string::npos);  // the center stands out
  CHECK(dot.find("style=bold") != std::string::npos);     // top-k edges highlighted
  CHECK(dot.find(g.ids[static_cast<std::size_t>(g.center)]) != std::string::npos);
}
