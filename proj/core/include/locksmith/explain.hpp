#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "locksmith/gnn.hpp"
#include "locksmith/graph.hpp"

namespace locksmith::explain {

struct ExplainOptions {
  int budget_k = 5;
  int steps = 300;
  double lambda = 0.05;  // sparsity pressure on the total mask mass
  double lr = 0.01;      // mask gradient step
  std::uint64_t seed = 1;
};

struct Explanation {
  std::string graph_ref;
  std::vector<double> edge_scores;  // one per graph edge, in (0, 1)
  std::vector<int> top_k;           // best-scored edge indices; ties keep edge order
  int predicted_label = -1;         // unmasked key-head argmax
  double mask_total = 0.0;          // sum of the final scores
  double accuracy = -1.0;           // set once scored against ground truth
};

// Per-edge soft mask trained by gradient descent: each edge weight is the
// sigmoid of a learned logit starting at 0.5 (plus a tiny seeded jitter so
// symmetric edges can separate). The objective keeps the masked key
// prediction in agreement with the unmasked one while `lambda` pushes total
// mask mass down. Requires a trained model and 0 < budget_k <= edge count.
Explanation explain_graph(const gnn::GinModel& model, const graph::CircuitGraph& g,
                          const ExplainOptions& opts = {});

// Mean over graphs of |top_k intersect truth| / min(k, |truth|). `truth`
// holds edge indices into the matching explained graph; an empty truth set
// is an error.
double explanation_accuracy(const std::vector<Explanation>& explanations,
                            const std::vector<std::vector<int>>& truth);

std::string explanation_to_json(const Explanation& e, const graph::CircuitGraph& g);

// DOT rendering of the explained graph; top-k edges are bold and labeled
// with their scores, the center node is double-circled.
std::string explanation_to_dot(const Explanation& e, const graph::CircuitGraph& g);

}  // namespace locksmith::explain
