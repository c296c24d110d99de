#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "locksmith/graph.hpp"
#include "locksmith/netlist.hpp"

namespace locksmith::gnn {

// Dense row-major matrix; the few shapes involved are tiny, so everything is
// explicit loops over this.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

struct Affine {
  Matrix w;               // fan_in x fan_out
  std::vector<double> b;  // fan_out
};

// One aggregation step: h_v = MLP((1 + eps) h_v + sum_u w_uv h_u) with a
// two-affine MLP joined by LeakyReLU(0.01).
struct GinLayer {
  double epsilon = 0.0;
  Affine a1, a2;
};

struct GinHyper {
  int feature_dim = graph::kFeatureDim;
  int hidden_dim = 32;
  int num_layers = 3;
  bool concat_layers = false;   // heads read all layer embeddings, not just the last
  std::string readout = "mean"; // or "sum"
  std::uint64_t seed = 1;
};

// Two-headed graph network: a 2-class key-bit head and a sigmoid
// corruptibility head. On a graph with a center node the key head reads the
// center's embedding (subgraph mode); otherwise it reads the pooled readout.
// The corruptibility head always reads the readout.
struct GinModel {
  GinHyper hyper;
  std::vector<GinLayer> layers;
  Affine key_head;  // embed_dim x 2
  Affine er_head;   // embed_dim x 1
  bool trained = false;

  int embed_dim() const {
    return hyper.concat_layers ? hyper.hidden_dim * hyper.num_layers : hyper.hidden_dim;
  }

  // Seeded init: every affine's weights and bias uniform in +-1/sqrt(fan_in),
  // epsilons zero.
  static GinModel init(const GinHyper& hyper);
};

struct Prediction {
  double logit0 = 0.0, logit1 = 0.0;  // key-bit scores
  double er = 0.0;                    // corruptibility in (0, 1)
  bool key_from_center = false;
};

// `edge_weights`, when given, scales each message along the matching edge of
// g.edges (both directions); missing means all-ones.
Prediction forward(const GinModel& model, const graph::CircuitGraph& g,
                   const std::vector<double>* edge_weights = nullptr);

// A training item: a graph plus whichever labels it carries. Subgraph samples
// carry the center's key bit; whole-graph samples carry the measured error
// rate of the key assignment encoded in their features.
struct TrainSample {
  graph::CircuitGraph graph;
  std::optional<int> bit;
  std::optional<double> er;
};

struct LossWeights {
  double key = 1.0;
  double er = 1.0;
};

// Flat parameter order: per layer epsilon, a1.w, a1.b, a2.w, a2.b; then
// key_head.w, key_head.b, er_head.w, er_head.b. Matrices row-major.
std::size_t parameter_count(const GinHyper& hyper);
std::vector<double> copy_parameters(const GinModel& model);
void load_parameters(GinModel& model, const std::vector<double>& flat);

// Loss of one sample: key_weight * cross-entropy + er_weight * squared
// error, each term present only when the matching label is. Throws on a
// label-free sample and on non-finite loss.
double sample_loss(const GinModel& model, const TrainSample& sample, const LossWeights& weights,
                   const std::vector<double>* edge_weights = nullptr);

// Same loss; accumulates (+=) the analytic gradient into `param_grad`
// (parameter_count-sized) and, when `edge_grad` is given, the gradient with
// respect to each edge weight.
double sample_loss_and_grad(const GinModel& model, const TrainSample& sample,
                            const LossWeights& weights, std::vector<double>& param_grad,
                            std::vector<double>* edge_grad = nullptr,
                            const std::vector<double>* edge_weights = nullptr);

// Warm-up schedule: epochs 1..99 climb linearly from 1e-3 toward 1e-2, from
// epoch 100 on the rate is exactly 0.01.
double lr_for_epoch(int epoch);

// Stop signal: fires when `patience` consecutive observations fail to beat
// the best accuracy seen so far, or immediately when the loss reaches
// `loss_ceiling`.
class EarlyStopper {
 public:
  EarlyStopper(int patience, double loss_ceiling)
      : patience_(patience), loss_ceiling_(loss_ceiling) {}

  bool observe(double accuracy, double loss);
  double best_accuracy() const { return best_; }
  int streak() const { return streak_; }
  const std::string& reason() const { return reason_; }

 private:
  int patience_;
  double loss_ceiling_;
  double best_ = -1.0;
  int streak_ = 0;
  std::string reason_;
};

struct TrainConfig {
  int max_epochs = 200;
  int batch_size = 8;
  LossWeights weights;
  int patience = 5;
  double loss_ceiling = 1.0;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct EpochStats {
  int epoch = 0;
  double lr = 0.0;
  double loss = 0.0;     // mean train loss
  double key_acc = 0.0;  // monitored key-bit accuracy
  double er_mse = 0.0;   // mean squared error over er-labeled train samples
};

struct TrainResult {
  std::vector<EpochStats> history;
  int stopped_epoch = 0;
  std::string stop_reason;  // "plateau", "loss_ceiling" or "max_epochs"
};

// Mini-batch SGD with the schedule above; deterministic for a fixed config
// (ordered reductions, seeded shuffle). Accuracy is monitored on
// `validation` when it carries key-bit labels, else on the training set.
// Marks the model trained.
TrainResult train(GinModel& model, const std::vector<TrainSample>& train_set,
                  const std::vector<TrainSample>& validation, const TrainConfig& config);

std::string history_to_csv(const std::vector<EpochStats>& history);

// Versioned binary checkpoint (little-endian): magic "LSCK", version, hyper,
// trained flag, the feature map, then all parameters in flat order.
void save_model(const GinModel& model, const graph::FeatureMap& fmap,
                const std::filesystem::path& path);
std::pair<GinModel, graph::FeatureMap> load_model(const std::filesystem::path& path);

enum class AttackMode { StructureOnly, CorruptibilityRefined };

struct AttackOptions {
  AttackMode mode = AttackMode::StructureOnly;
  int hops = 2;
  int sweeps = 2;  // refinement passes over the bits
  // Key gates in bit order; empty falls back to each key input's first
  // consumer. Must match the key width when given.
  std::vector<std::string> gates;
};

struct AttackResult {
  Key key;
  std::vector<double> confidence;  // |logit1 - logit0| per bit
  std::vector<std::string> gates;  // centers actually used
  int flips = 0;                   // refinement flips accepted
};

// Oracle-less key recovery: per key gate, the key head's argmax over its
// extracted subgraph. Corruptibility refinement then greedily flips bits
// (ascending, `sweeps` passes) whenever the er head's whole-graph prediction
// strictly drops. Throws when a key input has no consuming gate.
AttackResult attack(const GinModel& model, const graph::FeatureMap& fmap, const Netlist& locked,
                    const AttackOptions& opts = {});

}  // namespace locksmith::gnn
