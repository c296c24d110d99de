#include "locksmith/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "locksmith/rng.hpp"

namespace locksmith::explain {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Explanation explain_graph(const gnn::GinModel& model, const graph::CircuitGraph& g,
                          const ExplainOptions& opts) {
  if (!model.trained)
    throw NetlistError("cannot explain an untrained model; train or load a trained checkpoint");
  if (opts.budget_k <= 0) throw NetlistError("explanation budget k must be positive");
  if (static_cast<std::size_t>(opts.budget_k) > g.edges.size())
    throw NetlistError("explanation budget k exceeds the graph's " +
                       std::to_string(g.edges.size()) + " edges");
  if (opts.steps < 1 || opts.lr <= 0.0 || opts.lambda < 0.0)
    throw NetlistError("bad explanation options");

  const gnn::Prediction base = gnn::forward(model, g);
  const int label = base.logit1 > base.logit0 ? 1 : 0;

  const std::size_t ecount = g.edges.size();
  rng::Engine eng(opts.seed);
  std::vector<double> theta(ecount);
  for (double& t : theta) t = rng::symmetric(eng, 1e-3);

  gnn::TrainSample sample;
  sample.graph = g;
  sample.bit = label;
  const gnn::LossWeights agreement{1.0, 0.0};

  std::vector<double> mask(ecount), param_grad, edge_grad;
  for (int step = 0; step < opts.steps; ++step) {
    for (std::size_t e = 0; e < ecount; ++e) mask[e] = sigmoid(theta[e]);
    param_grad.assign(gnn::parameter_count(model.hyper), 0.0);
    edge_grad.assign(ecount, 0.0);
    gnn::sample_loss_and_grad(model, sample, agreement, param_grad, &edge_grad, &mask);
    for (std::size_t e = 0; e < ecount; ++e) {
      const double dmask = edge_grad[e] + opts.lambda;
      theta[e] -= opts.lr * dmask * mask[e] * (1.0 - mask[e]);
    }
  }
  for (std::size_t e = 0; e < ecount; ++e) mask[e] = sigmoid(theta[e]);

  Explanation out;
  out.graph_ref = g.name;
  out.edge_scores = mask;
  out.predicted_label = label;
  out.mask_total = std::accumulate(mask.begin(), mask.end(), 0.0);

  std::vector<int> ranked(ecount);
  std::iota(ranked.begin(), ranked.end(), 0);
  std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
    return mask[static_cast<std::size_t>(a)] > mask[static_cast<std::size_t>(b)];
  });
  out.top_k.assign(ranked.begin(), ranked.begin() + opts.budget_k);
  return out;
}

double explanation_accuracy(const std::vector<Explanation>& explanations,
                            const std::vector<std::vector<int>>& truth) {
  if (explanations.empty()) throw NetlistError("no explanations to score");
  if (explanations.size() != truth.size())
    throw NetlistError("explanations and ground-truth sets differ in count");
  double acc = 0.0;
  for (std::size_t i = 0; i < explanations.size(); ++i) {
    if (truth[i].empty())
      throw NetlistError("empty ground-truth edge set for '" + explanations[i].graph_ref + "'");
    const std::set<int> t(truth[i].begin(), truth[i].end());
    std::size_t hit = 0;
    for (const int e : explanations[i].top_k) hit += t.count(e);
    acc += static_cast<double>(hit) /
           static_cast<double>(std::min(explanations[i].top_k.size(), t.size()));
  }
  return acc / static_cast<double>(explanations.size());
}

std::string explanation_to_json(const Explanation& e, const graph::CircuitGraph& g) {
  nlohmann::json j;
  j["graph"] = e.graph_ref;
  j["predicted_label"] = e.predicted_label;
  j["mask_total"] = e.mask_total;
  j["edge_scores"] = e.edge_scores;
  j["top_k"] = e.top_k;
  if (e.accuracy >= 0.0) j["accuracy"] = e.accuracy;
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : g.edges)
    edges.push_back({g.ids[static_cast<std::size_t>(a)], g.ids[static_cast<std::size_t>(b)]});
  j["edges"] = std::move(edges);
  return j.dump();
}

std::string explanation_to_dot(const Explanation& e, const graph::CircuitGraph& g) {
  const std::set<int> marked(e.top_k.begin(), e.top_k.end());
  std::ostringstream os;
  os << "graph explanation {\n";
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    os << "  n" << v << " [label=\"" << g.ids[v] << '"';
    if (static_cast<std::int32_t>(v) == g.center) os << " peripheries=2";
    os << "];\n";
  }
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    os << "  n" << g.edges[i].first << " -- n" << g.edges[i].second;
    if (marked.count(static_cast<int>(i))) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", e.edge_scores[i]);
      os << " [style=bold label=\"" << buf << "\"]";
    }
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace locksmith::explain
