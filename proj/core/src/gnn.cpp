#include "locksmith/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "bytes.hpp"
#include "locksmith/lock.hpp"
#include "locksmith/rng.hpp"

namespace locksmith::gnn {

namespace {

constexpr double kLeakySlope = 0.01;

double leaky(double x) { return x >= 0.0 ? x : kLeakySlope * x; }
double leaky_grad(double x) { return x >= 0.0 ? 1.0 : kLeakySlope; }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y = x W + b over row-major matrices.
Matrix affine_forward(const Matrix& x, const Affine& f) {
  Matrix y(x.rows, f.w.cols);
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t k = 0; k < f.w.rows; ++k) {
      const double xv = x(r, k);
      if (xv == 0.0) continue;
      for (std::size_t c = 0; c < f.w.cols; ++c) y(r, c) += xv * f.w(k, c);
    }
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t c = 0; c < f.w.cols; ++c) y(r, c) += f.b[c];
  return y;
}

void check_graph(const GinModel& model, const graph::CircuitGraph& g,
                 const std::vector<double>* edge_weights) {
  if (g.node_count() == 0) throw NetlistError("cannot run the model on an empty graph");
  if (g.x.size() != g.node_count() * static_cast<std::size_t>(model.hyper.feature_dim))
    throw NetlistError("graph feature width does not match the model's input dim");
  if (edge_weights && edge_weights->size() != g.edges.size())
    throw NetlistError("edge weight vector does not match the graph's edge count");
}

struct Cache {
  std::vector<Matrix> H;         // H[0] = X, H[l] = output of layer l (1-based)
  std::vector<Matrix> S, Z1, U;  // per layer: pre-MLP aggregate, pre/post activation
  std::vector<double> readout;
  std::vector<double> key_in;  // what the key head read
  bool key_from_center = false;
  double z_er = 0.0;
  Prediction pred;
};

Cache run_forward(const GinModel& model, const graph::CircuitGraph& g,
                  const std::vector<double>* edge_weights) {
  check_graph(model, g, edge_weights);
  const std::size_t n = g.node_count();
  const auto fdim = static_cast<std::size_t>(model.hyper.feature_dim);
  const auto hidden = static_cast<std::size_t>(model.hyper.hidden_dim);
  const auto nlayers = static_cast<std::size_t>(model.hyper.num_layers);

  Cache c;
  c.H.resize(nlayers + 1);
  c.S.resize(nlayers);
  c.Z1.resize(nlayers);
  c.U.resize(nlayers);

  c.H[0] = Matrix(n, fdim);
  c.H[0].a = g.x;

  for (std::size_t l = 0; l < nlayers; ++l) {
    const Matrix& h = c.H[l];
    Matrix s(n, h.cols);
    const double self = 1.0 + model.layers[l].epsilon;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t k = 0; k < h.cols; ++k) s(r, k) = self * h(r, k);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const auto [a, b] = g.edges[e];
      const double w = edge_weights ? (*edge_weights)[e] : 1.0;
      const auto ra = static_cast<std::size_t>(a);
      const auto rb = static_cast<std::size_t>(b);
      for (std::size_t k = 0; k < h.cols; ++k) {
        s(rb, k) += w * h(ra, k);
        s(ra, k) += w * h(rb, k);
      }
    }
    c.Z1[l] = affine_forward(s, model.layers[l].a1);
    Matrix u = c.Z1[l];
    for (double& v : u.a) v = leaky(v);
    c.H[l + 1] = affine_forward(u, model.layers[l].a2);
    c.S[l] = std::move(s);
    c.U[l] = std::move(u);
  }

  const bool mean = model.hyper.readout != "sum";
  const auto embed = static_cast<std::size_t>(model.embed_dim());
  const std::size_t first = model.hyper.concat_layers ? 1 : nlayers;
  c.readout.assign(embed, 0.0);
  for (std::size_t l = first; l <= nlayers; ++l) {
    const std::size_t off = model.hyper.concat_layers ? (l - 1) * hidden : 0;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t k = 0; k < hidden; ++k) c.readout[off + k] += c.H[l](r, k);
  }
  if (mean)
    for (double& v : c.readout) v /= static_cast<double>(n);

  c.key_from_center = g.center >= 0;
  if (c.key_from_center) {
    c.key_in.assign(embed, 0.0);
    const auto row = static_cast<std::size_t>(g.center);
    for (std::size_t l = first; l <= nlayers; ++l) {
      const std::size_t off = model.hyper.concat_layers ? (l - 1) * hidden : 0;
      for (std::size_t k = 0; k < hidden; ++k) c.key_in[off + k] = c.H[l](row, k);
    }
  } else {
    c.key_in = c.readout;
  }

  c.pred.logit0 = model.key_head.b[0];
  c.pred.logit1 = model.key_head.b[1];
  for (std::size_t k = 0; k < embed; ++k) {
    c.pred.logit0 += c.key_in[k] * model.key_head.w(k, 0);
    c.pred.logit1 += c.key_in[k] * model.key_head.w(k, 1);
  }
  c.z_er = model.er_head.b[0];
  for (std::size_t k = 0; k < embed; ++k) c.z_er += c.readout[k] * model.er_head.w(k, 0);
  c.pred.er = sigmoid(c.z_er);
  c.pred.key_from_center = c.key_from_center;
  return c;
}

double loss_from_cache(const Cache& c, const TrainSample& sample, const LossWeights& weights) {
  if (!sample.bit && !sample.er) throw NetlistError("training sample carries no labels");
  double loss = 0.0;
  if (sample.bit) {
    if (*sample.bit != 0 && *sample.bit != 1) throw NetlistError("key-bit label must be 0 or 1");
    const double m = std::max(c.pred.logit0, c.pred.logit1);
    const double lse = m + std::log(std::exp(c.pred.logit0 - m) + std::exp(c.pred.logit1 - m));
    loss += weights.key * (lse - (*sample.bit ? c.pred.logit1 : c.pred.logit0));
  }
  if (sample.er) {
    const double d = c.pred.er - *sample.er;
    loss += weights.er * d * d;
  }
  if (!std::isfinite(loss)) throw NetlistError("non-finite loss");
  return loss;
}

// Gradient buffers shaped like the model; flattened into the public order at
// the end of a backward pass.
struct Grads {
  std::vector<double> eps;
  std::vector<Affine> a1, a2;
  Affine key_head, er_head;
};

Affine zero_like(const Affine& f) {
  Affine z;
  z.w = Matrix(f.w.rows, f.w.cols);
  z.b.assign(f.b.size(), 0.0);
  return z;
}

Grads zero_grads(const GinModel& model) {
  Grads g;
  g.eps.assign(model.layers.size(), 0.0);
  for (const GinLayer& l : model.layers) {
    g.a1.push_back(zero_like(l.a1));
    g.a2.push_back(zero_like(l.a2));
  }
  g.key_head = zero_like(model.key_head);
  g.er_head = zero_like(model.er_head);
  return g;
}

void backward(const GinModel& model, const graph::CircuitGraph& g, const Cache& c,
              const TrainSample& sample, const LossWeights& weights, Grads& gr,
              std::vector<double>* edge_grad, const std::vector<double>* edge_weights) {
  const std::size_t n = g.node_count();
  const auto fdim = static_cast<std::size_t>(model.hyper.feature_dim);
  const auto hidden = static_cast<std::size_t>(model.hyper.hidden_dim);
  const auto nlayers = static_cast<std::size_t>(model.hyper.num_layers);
  const auto embed = static_cast<std::size_t>(model.embed_dim());
  const bool mean = model.hyper.readout != "sum";
  const std::size_t first = model.hyper.concat_layers ? 1 : nlayers;

  double dlog0 = 0.0, dlog1 = 0.0, dz_er = 0.0;
  if (sample.bit) {
    const double m = std::max(c.pred.logit0, c.pred.logit1);
    const double e0 = std::exp(c.pred.logit0 - m);
    const double e1 = std::exp(c.pred.logit1 - m);
    const double z = e0 + e1;
    dlog0 = weights.key * (e0 / z - (*sample.bit == 0 ? 1.0 : 0.0));
    dlog1 = weights.key * (e1 / z - (*sample.bit == 1 ? 1.0 : 0.0));
  }
  if (sample.er) {
    const double d = 2.0 * weights.er * (c.pred.er - *sample.er);
    dz_er = d * c.pred.er * (1.0 - c.pred.er);
  }

  std::vector<double> dkey_in(embed, 0.0), dreadout(embed, 0.0);
  for (std::size_t k = 0; k < embed; ++k) {
    gr.key_head.w(k, 0) += c.key_in[k] * dlog0;
    gr.key_head.w(k, 1) += c.key_in[k] * dlog1;
    dkey_in[k] = dlog0 * model.key_head.w(k, 0) + dlog1 * model.key_head.w(k, 1);
    gr.er_head.w(k, 0) += c.readout[k] * dz_er;
    dreadout[k] = dz_er * model.er_head.w(k, 0);
  }
  gr.key_head.b[0] += dlog0;
  gr.key_head.b[1] += dlog1;
  gr.er_head.b[0] += dz_er;
  if (!c.key_from_center)
    for (std::size_t k = 0; k < embed; ++k) dreadout[k] += dkey_in[k];

  std::vector<Matrix> dH(nlayers + 1);
  dH[0] = Matrix(n, fdim);
  for (std::size_t l = 1; l <= nlayers; ++l) dH[l] = Matrix(n, hidden);

  const double pool_scale = mean ? 1.0 / static_cast<double>(n) : 1.0;
  for (std::size_t l = first; l <= nlayers; ++l) {
    const std::size_t off = model.hyper.concat_layers ? (l - 1) * hidden : 0;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t k = 0; k < hidden; ++k) dH[l](r, k) += dreadout[off + k] * pool_scale;
    if (c.key_from_center) {
      const auto row = static_cast<std::size_t>(g.center);
      for (std::size_t k = 0; k < hidden; ++k) dH[l](row, k) += dkey_in[off + k];
    }
  }

  for (std::size_t l = nlayers; l >= 1; --l) {
    const std::size_t lz = l - 1;
    const Matrix& dHl = dH[l];
    const Matrix& u = c.U[lz];
    const Matrix& z1 = c.Z1[lz];
    const Matrix& s = c.S[lz];
    const Matrix& hprev = c.H[lz];
    const GinLayer& layer = model.layers[lz];

    // H_l = U W2 + b2
    Matrix dU(n, hidden);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t k = 0; k < hidden; ++k) {
        const double uv = u(r, k);
        double acc = 0.0;
        for (std::size_t cc = 0; cc < hidden; ++cc) {
          gr.a2[lz].w(k, cc) += uv * dHl(r, cc);
          acc += dHl(r, cc) * layer.a2.w(k, cc);
        }
        dU(r, k) = acc;
      }
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t cc = 0; cc < hidden; ++cc) gr.a2[lz].b[cc] += dHl(r, cc);

    // U = leaky(Z1), Z1 = S W1 + b1
    Matrix dZ1 = dU;
    for (std::size_t i = 0; i < dZ1.a.size(); ++i) dZ1.a[i] *= leaky_grad(z1.a[i]);

    const std::size_t in_dim = s.cols;
    Matrix dS(n, in_dim);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t k = 0; k < in_dim; ++k) {
        const double sv = s(r, k);
        double acc = 0.0;
        for (std::size_t cc = 0; cc < hidden; ++cc) {
          gr.a1[lz].w(k, cc) += sv * dZ1(r, cc);
          acc += dZ1(r, cc) * layer.a1.w(k, cc);
        }
        dS(r, k) = acc;
      }
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t cc = 0; cc < hidden; ++cc) gr.a1[lz].b[cc] += dZ1(r, cc);

    // S = (1 + eps) H_{l-1} + sum over edges of w * neighbor rows
    double deps = 0.0;
    for (std::size_t i = 0; i < dS.a.size(); ++i) deps += dS.a[i] * hprev.a[i];
    gr.eps[lz] += deps;

    const double self = 1.0 + layer.epsilon;
    Matrix& dHprev = dH[lz];
    for (std::size_t i = 0; i < dS.a.size(); ++i) dHprev.a[i] += self * dS.a[i];
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const auto [a, b] = g.edges[e];
      const double w = edge_weights ? (*edge_weights)[e] : 1.0;
      const auto ra = static_cast<std::size_t>(a);
      const auto rb = static_cast<std::size_t>(b);
      for (std::size_t k = 0; k < in_dim; ++k) {
        dHprev(ra, k) += w * dS(rb, k);
        dHprev(rb, k) += w * dS(ra, k);
      }
      if (edge_grad) {
        double dot = 0.0;
        for (std::size_t k = 0; k < in_dim; ++k)
          dot += dS(rb, k) * hprev(ra, k) + dS(ra, k) * hprev(rb, k);
        (*edge_grad)[e] += dot;
      }
    }
  }
}

void append_affine(const Affine& f, std::vector<double>& out) {
  out.insert(out.end(), f.w.a.begin(), f.w.a.end());
  out.insert(out.end(), f.b.begin(), f.b.end());
}

std::vector<double> flatten_grads(const GinModel& model, const Grads& gr) {
  std::vector<double> flat;
  flat.reserve(parameter_count(model.hyper));
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    flat.push_back(gr.eps[l]);
    append_affine(gr.a1[l], flat);
    append_affine(gr.a2[l], flat);
  }
  append_affine(gr.key_head, flat);
  append_affine(gr.er_head, flat);
  return flat;
}

}  // namespace

std::size_t parameter_count(const GinHyper& hyper) {
  const auto f = static_cast<std::size_t>(hyper.feature_dim);
  const auto h = static_cast<std::size_t>(hyper.hidden_dim);
  const auto L = static_cast<std::size_t>(hyper.num_layers);
  const auto d = static_cast<std::size_t>(hyper.concat_layers ? h * L : h);
  std::size_t count = 0;
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t in = l == 0 ? f : h;
    count += 1 + (in * h + h) + (h * h + h);
  }
  count += d * 2 + 2;  // key head
  count += d + 1;      // er head
  return count;
}

std::vector<double> copy_parameters(const GinModel& model) {
  std::vector<double> flat;
  flat.reserve(parameter_count(model.hyper));
  for (const GinLayer& l : model.layers) {
    flat.push_back(l.epsilon);
    append_affine(l.a1, flat);
    append_affine(l.a2, flat);
  }
  append_affine(model.key_head, flat);
  append_affine(model.er_head, flat);
  return flat;
}

void load_parameters(GinModel& model, const std::vector<double>& flat) {
  if (flat.size() != parameter_count(model.hyper))
    throw NetlistError("parameter vector has size " + std::to_string(flat.size()) +
                       ", model expects " + std::to_string(parameter_count(model.hyper)));
  std::size_t pos = 0;
  const auto take_affine = [&](Affine& f) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
              flat.begin() + static_cast<std::ptrdiff_t>(pos + f.w.a.size()), f.w.a.begin());
    pos += f.w.a.size();
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
              flat.begin() + static_cast<std::ptrdiff_t>(pos + f.b.size()), f.b.begin());
    pos += f.b.size();
  };
  for (GinLayer& l : model.layers) {
    l.epsilon = flat[pos++];
    take_affine(l.a1);
    take_affine(l.a2);
  }
  take_affine(model.key_head);
  take_affine(model.er_head);
}

GinModel GinModel::init(const GinHyper& hyper) {
  if (hyper.feature_dim < 1 || hyper.hidden_dim < 1 || hyper.num_layers < 1)
    throw NetlistError("model dimensions must be positive");
  if (hyper.readout != "mean" && hyper.readout != "sum")
    throw NetlistError("readout must be 'mean' or 'sum'");

  GinModel m;
  m.hyper = hyper;
  rng::Engine eng(hyper.seed);
  const auto fill = [&](Affine& f, std::size_t in, std::size_t out) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    f.w = Matrix(in, out);
    for (double& v : f.w.a) v = rng::symmetric(eng, bound);
    f.b.resize(out);
    for (double& v : f.b) v = rng::symmetric(eng, bound);
  };

  const auto h = static_cast<std::size_t>(hyper.hidden_dim);
  for (int l = 0; l < hyper.num_layers; ++l) {
    GinLayer layer;
    layer.epsilon = 0.0;
    fill(layer.a1, l == 0 ? static_cast<std::size_t>(hyper.feature_dim) : h, h);
    fill(layer.a2, h, h);
    m.layers.push_back(std::move(layer));
  }
  const auto d = static_cast<std::size_t>(m.embed_dim());
  fill(m.key_head, d, 2);
  fill(m.er_head, d, 1);
  return m;
}

Prediction forward(const GinModel& model, const graph::CircuitGraph& g,
                   const std::vector<double>* edge_weights) {
  return run_forward(model, g, edge_weights).pred;
}

double sample_loss(const GinModel& model, const TrainSample& sample, const LossWeights& weights,
                   const std::vector<double>* edge_weights) {
  return loss_from_cache(run_forward(model, sample.graph, edge_weights), sample, weights);
}

double sample_loss_and_grad(const GinModel& model, const TrainSample& sample,
                            const LossWeights& weights, std::vector<double>& param_grad,
                            std::vector<double>* edge_grad,
                            const std::vector<double>* edge_weights) {
  const Cache c = run_forward(model, sample.graph, edge_weights);
  const double loss = loss_from_cache(c, sample, weights);

  if (param_grad.empty()) param_grad.assign(parameter_count(model.hyper), 0.0);
  if (param_grad.size() != parameter_count(model.hyper))
    throw NetlistError("gradient buffer has the wrong size");
  if (edge_grad) {
    if (edge_grad->empty()) edge_grad->assign(sample.graph.edges.size(), 0.0);
    if (edge_grad->size() != sample.graph.edges.size())
      throw NetlistError("edge gradient buffer has the wrong size");
  }

  Grads gr = zero_grads(model);
  backward(model, sample.graph, c, sample, weights, gr, edge_grad, edge_weights);
  const std::vector<double> flat = flatten_grads(model, gr);
  for (std::size_t i = 0; i < flat.size(); ++i) param_grad[i] += flat[i];
  return loss;
}

double lr_for_epoch(int epoch) {
  if (epoch < 1) throw NetlistError("epochs are 1-based");
  if (epoch >= 100) return 0.01;
  return 0.001 + (0.01 - 0.001) * (static_cast<double>(epoch - 1) / 99.0);
}

bool EarlyStopper::observe(double accuracy, double loss) {
  if (loss >= loss_ceiling_) {
    reason_ = "loss_ceiling";
    return true;
  }
  if (accuracy > best_) {
    best_ = accuracy;
    streak_ = 0;
    return false;
  }
  if (++streak_ >= patience_) {
    reason_ = "plateau";
    return true;
  }
  return false;
}

namespace {

double monitored_accuracy(const GinModel& model, const std::vector<const TrainSample*>& bits,
                          const std::vector<const TrainSample*>& ers) {
  if (!bits.empty()) {
    std::size_t hit = 0;
    for (const TrainSample* s : bits) {
      const Prediction p = forward(model, s->graph);
      const int guess = p.logit1 > p.logit0 ? 1 : 0;
      hit += guess == *s->bit;
    }
    return static_cast<double>(hit) / static_cast<double>(bits.size());
  }
  if (!ers.empty()) {
    // No key-bit labels anywhere: improvement is tracked as 1 - er mse.
    double sq = 0.0;
    for (const TrainSample* s : ers) {
      const double d = forward(model, s->graph).er - *s->er;
      sq += d * d;
    }
    return 1.0 - sq / static_cast<double>(ers.size());
  }
  return 0.0;
}

}  // namespace

TrainResult train(GinModel& model, const std::vector<TrainSample>& train_set,
                  const std::vector<TrainSample>& validation, const TrainConfig& config) {
  if (train_set.empty()) throw NetlistError("training set is empty");
  if (config.max_epochs < 1 || config.batch_size < 1 || config.patience < 1 ||
      config.threads < 1)
    throw NetlistError("bad training configuration");

  // Monitor on validation key bits when available, else on the train set.
  std::vector<const TrainSample*> mon_bits, mon_ers;
  for (const TrainSample& s : validation)
    if (s.bit) mon_bits.push_back(&s);
  if (mon_bits.empty())
    for (const TrainSample& s : train_set)
      if (s.bit) mon_bits.push_back(&s);
  if (mon_bits.empty()) {
    for (const TrainSample& s : validation)
      if (s.er) mon_ers.push_back(&s);
    if (mon_ers.empty())
      for (const TrainSample& s : train_set)
        if (s.er) mon_ers.push_back(&s);
  }

  rng::Engine eng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  EarlyStopper stopper(config.patience, config.loss_ceiling);
  TrainResult result;
  const std::size_t pcount = parameter_count(model.hyper);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double lr = lr_for_epoch(epoch);
    rng::shuffle(eng, order);

    double loss_sum = 0.0, er_sq = 0.0;
    std::size_t er_n = 0;

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const std::size_t bn = stop - start;

      // Per-sample gradients land in their own slot and are merged in sample
      // order, so thread count never changes the result.
      std::vector<std::vector<double>> slot(bn);
      std::vector<double> slot_loss(bn, 0.0);
      std::vector<double> slot_er(bn, -1.0);
      const auto work = [&](std::size_t j) {
        const TrainSample& s = train_set[order[start + j]];
        const Cache c = run_forward(model, s.graph, nullptr);
        slot_loss[j] = loss_from_cache(c, s, config.weights);
        if (s.er) {
          const double d = c.pred.er - *s.er;
          slot_er[j] = d * d;
        }
        Grads gr = zero_grads(model);
        backward(model, s.graph, c, s, config.weights, gr, nullptr, nullptr);
        slot[j] = flatten_grads(model, gr);
      };
      if (config.threads == 1 || bn == 1) {
        for (std::size_t j = 0; j < bn; ++j) work(j);
      } else {
        std::vector<std::thread> pool;
        const auto tcount = std::min<std::size_t>(static_cast<std::size_t>(config.threads), bn);
        for (std::size_t t = 0; t < tcount; ++t)
          pool.emplace_back([&, t]() {
            for (std::size_t j = t; j < bn; j += tcount) work(j);
          });
        for (std::thread& t : pool) t.join();
      }

      std::vector<double> grad(pcount, 0.0);
      for (std::size_t j = 0; j < bn; ++j) {
        loss_sum += slot_loss[j];
        if (slot_er[j] >= 0.0) {
          er_sq += slot_er[j];
          ++er_n;
        }
        for (std::size_t i = 0; i < pcount; ++i) grad[i] += slot[j][i];
      }

      std::vector<double> params = copy_parameters(model);
      const double scale = lr / static_cast<double>(bn);
      for (std::size_t i = 0; i < pcount; ++i) params[i] -= scale * grad[i];
      load_parameters(model, params);
    }

    EpochStats st;
    st.epoch = epoch;
    st.lr = lr;
    st.loss = loss_sum / static_cast<double>(train_set.size());
    st.er_mse = er_n ? er_sq / static_cast<double>(er_n) : 0.0;
    st.key_acc = monitored_accuracy(model, mon_bits, mon_ers);
    result.history.push_back(st);

    if (stopper.observe(st.key_acc, st.loss)) {
      result.stopped_epoch = epoch;
      result.stop_reason = stopper.reason();
      break;
    }
  }
  if (result.stopped_epoch == 0) {
    result.stopped_epoch = config.max_epochs;
    result.stop_reason = "max_epochs";
  }
  model.trained = true;
  return result;
}

namespace {

// Shortest decimal form that parses back to the same double.
std::string exact(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

}  // namespace

std::string history_to_csv(const std::vector<EpochStats>& history) {
  std::ostringstream os;
  os << "epoch,lr,loss,key_acc,er_mse\n";
  for (const EpochStats& st : history)
    os << st.epoch << ',' << exact(st.lr) << ',' << exact(st.loss) << ',' << exact(st.key_acc)
       << ',' << exact(st.er_mse) << '\n';
  return os.str();
}

namespace {

constexpr char kCkptMagic[4] = {'L', 'S', 'C', 'K'};
constexpr std::uint32_t kCkptVersion = 1;

}  // namespace

void save_model(const GinModel& model, const graph::FeatureMap& fmap,
                const std::filesystem::path& path) {
  std::string out;
  out.append(kCkptMagic, sizeof kCkptMagic);
  bytes::put_u32(out, kCkptVersion);
  bytes::put_u32(out, static_cast<std::uint32_t>(model.hyper.feature_dim));
  bytes::put_u32(out, static_cast<std::uint32_t>(model.hyper.hidden_dim));
  bytes::put_u32(out, static_cast<std::uint32_t>(model.hyper.num_layers));
  out.push_back(model.hyper.concat_layers ? 1 : 0);
  out.push_back(model.hyper.readout == "sum" ? 1 : 0);
  bytes::put_u64(out, model.hyper.seed);
  out.push_back(model.trained ? 1 : 0);
  for (const int c : fmap.column) bytes::put_u32(out, static_cast<std::uint32_t>(c));
  bytes::put_str(out, fmap.policy);
  const std::vector<double> flat = copy_parameters(model);
  bytes::put_u64(out, flat.size());
  for (const double v : flat) bytes::put_f64(out, v);

  std::ofstream f(path, std::ios::binary);
  if (!f) throw NetlistError("cannot write '" + path.string() + "'");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw NetlistError("write failed for '" + path.string() + "'");
}

std::pair<GinModel, graph::FeatureMap> load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw NetlistError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string buf = ss.str();

  bytes::Reader r{buf, "checkpoint"};
  r.need(sizeof kCkptMagic);
  if (std::memcmp(buf.data(), kCkptMagic, sizeof kCkptMagic) != 0)
    throw NetlistError("'" + path.string() + "' is not a model checkpoint");
  r.pos = sizeof kCkptMagic;
  if (r.u32() != kCkptVersion) throw NetlistError("unsupported checkpoint version");

  GinHyper hyper;
  hyper.feature_dim = static_cast<int>(r.u32());
  hyper.hidden_dim = static_cast<int>(r.u32());
  hyper.num_layers = static_cast<int>(r.u32());
  hyper.concat_layers = r.u8() != 0;
  hyper.readout = r.u8() ? "sum" : "mean";
  hyper.seed = r.u64();
  const bool trained = r.u8() != 0;

  graph::FeatureMap fmap;
  for (int k = 0; k < kGateKindCount; ++k)
    fmap.column[static_cast<std::size_t>(k)] = static_cast<int>(r.u32());
  fmap.policy = r.str();

  GinModel model = GinModel::init(hyper);
  const std::uint64_t count = r.u64();
  if (count != parameter_count(hyper))
    throw NetlistError("checkpoint parameter count does not match its hyperparameters");
  std::vector<double> flat(count);
  for (double& v : flat) v = r.f64();
  load_parameters(model, flat);
  model.trained = trained;
  return {std::move(model), fmap};
}

AttackResult attack(const GinModel& model, const graph::FeatureMap& fmap, const Netlist& locked,
                    const AttackOptions& opts) {
  const std::size_t p = locked.p();
  if (p == 0) throw NetlistError("netlist has no key inputs to attack");

  std::vector<std::string> gates = opts.gates;
  if (gates.empty()) {
    gates = key_gates(locked, Key{});
  } else if (gates.size() != p) {
    throw NetlistError("key gate list does not match the key width");
  }

  AttackResult res;
  res.gates = gates;
  res.key.bits.resize(p);
  res.confidence.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    const graph::CircuitGraph sub = graph::extract_subgraph(locked, fmap, gates[i], opts.hops);
    const Prediction pr = forward(model, sub);
    res.key.bits[i] = pr.logit1 > pr.logit0 ? 1 : 0;
    res.confidence[i] = std::abs(pr.logit1 - pr.logit0);
    res.key.provenance[static_cast<int>(i)] = gates[i];
  }

  if (opts.mode == AttackMode::CorruptibilityRefined) {
    graph::CircuitGraph g = graph::to_graph(locked, fmap, Key{res.key.bits, {}});
    std::vector<std::size_t> key_row(p);
    for (std::size_t i = 0; i < p; ++i) key_row[i] = locked.node_index(locked.key_inputs[i]);

    double er_now = forward(model, g).er;
    for (int sweep = 0; sweep < opts.sweeps; ++sweep) {
      bool improved = false;
      for (std::size_t i = 0; i < p; ++i) {
        const double old = g.at(key_row[i], graph::kColKeyValue);
        g.at(key_row[i], graph::kColKeyValue) = old == 1.0 ? 0.0 : 1.0;
        const double er_new = forward(model, g).er;
        if (er_new < er_now) {
          er_now = er_new;
          res.key.bits[i] ^= 1;
          ++res.flips;
          improved = true;
        } else {
          g.at(key_row[i], graph::kColKeyValue) = old;
        }
      }
      if (!improved) break;
    }
  }
  return res;
}

}  // namespace locksmith::gnn
