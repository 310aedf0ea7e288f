#include "seqbounds/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace seqbounds {

std::string to_string(Activation a) { return a == Activation::kRelu ? "relu" : "identity"; }

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "identity") return Activation::kIdentity;
  throw std::invalid_argument("unknown activation '" + s + "' (expected relu or identity)");
}

void ModelConfig::validate() const {
  if (seq_len < 1 || d < 1 || k < 1 || heads < 1 || layers < 1)
    throw std::invalid_argument("ModelConfig: T, d, k, H and L must all be >= 1");
}

TransformerParams TransformerParams::zeros(const ModelConfig& config) {
  config.validate();
  TransformerParams p;
  p.layers.resize(config.layers);
  for (auto& layer : p.layers) {
    layer.heads.resize(config.heads);
    for (auto& h : layer.heads) {
      h.w_qk = Matrix(config.d, config.d);
      h.w_v = Matrix(config.d, config.k);
      h.w_c = Matrix(config.k, config.d);
    }
  }
  p.readout.assign(config.d, 0.0);
  return p;
}

std::size_t TransformerParams::parameter_count() const {
  std::size_t n = readout.size();
  for (const auto& layer : layers)
    for (const auto& h : layer.heads) n += h.w_qk.size() + h.w_v.size() + h.w_c.size();
  return n;
}

void TransformerParams::for_each_value(const std::function<void(double&)>& fn) {
  for (auto& layer : layers) {
    for (auto& h : layer.heads) {
      for (double& x : h.w_qk.data()) fn(x);
      for (double& x : h.w_v.data()) fn(x);
      for (double& x : h.w_c.data()) fn(x);
    }
  }
  for (double& x : readout) fn(x);
}

void TransformerParams::for_each_value(const std::function<void(double)>& fn) const {
  for (const auto& layer : layers) {
    for (const auto& h : layer.heads) {
      for (double x : h.w_qk.data()) fn(x);
      for (double x : h.w_v.data()) fn(x);
      for (double x : h.w_c.data()) fn(x);
    }
  }
  for (double x : readout) fn(x);
}

void TransformerParams::check_shapes(const ModelConfig& config) const {
  auto fail = [](const char* what) {
    throw std::invalid_argument(std::string("TransformerParams: ") + what);
  };
  if (layers.size() != config.layers) fail("layer count does not match config");
  if (readout.size() != config.d) fail("readout length does not match d");
  for (const auto& layer : layers) {
    if (layer.heads.size() != config.heads) fail("head count does not match config");
    for (const auto& h : layer.heads) {
      if (h.w_qk.rows() != config.d || h.w_qk.cols() != config.d) fail("W_QK must be d x d");
      if (h.w_v.rows() != config.d || h.w_v.cols() != config.k) fail("W_v must be d x k");
      if (h.w_c.rows() != config.k || h.w_c.cols() != config.d) fail("W_c must be k x d");
    }
  }
}

TransformerParams init_params(const ModelConfig& config) {
  auto p = TransformerParams::zeros(config);
  std::mt19937_64 rng(config.seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.d));
  std::uniform_real_distribution<double> unif(-bound, bound);
  p.for_each_value([&](double& x) { x = unif(rng); });
  return p;
}

namespace {

double activate(Activation a, double z) { return a == Activation::kRelu ? std::max(z, 0.0) : z; }
double activate_grad(Activation a, double z) {
  return a == Activation::kRelu ? (z > 0.0 ? 1.0 : 0.0) : 1.0;
}

Matrix activate(Activation a, const Matrix& m) {
  if (a == Activation::kIdentity) return m;
  Matrix out = m;
  for (double& x : out.data()) x = std::max(x, 0.0);
  return out;
}

// dz = dy * sigma'(z), in place on dy.
void activate_backward(Activation a, const Matrix& z, Matrix& dy) {
  if (a == Activation::kIdentity) return;
  auto zd = z.data();
  auto dd = dy.data();
  for (std::size_t i = 0; i < dd.size(); ++i) dd[i] *= activate_grad(a, zd[i]);
}

// Backward of the row-wise unit-ball projection; `pre` is the input.
Matrix project_rows_backward(const Matrix& pre, const Matrix& d_out) {
  Matrix d_in = d_out;
  for (std::size_t r = 0; r < pre.rows(); ++r) {
    const double rho = vector_norm(pre.row(r), Exponent{2.0});
    if (rho <= 1.0) continue;
    auto row = pre.row(r);
    auto g = d_in.row(r);
    double y_dot_g = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) y_dot_g += row[j] / rho * g[j];
    for (std::size_t j = 0; j < row.size(); ++j) g[j] = (g[j] - row[j] / rho * y_dot_g) / rho;
  }
  return d_in;
}

void check_input(const Matrix& x, const TransformerParams& params, const ModelConfig& config) {
  config.validate();
  if (x.rows() != config.seq_len + 1 || x.cols() != config.d)
    throw std::invalid_argument("forward: X must be (T+1) x d with the [CLS] row first");
  params.check_shapes(config);
}

// ---------------------------------------------------------------------------
// Direct single-layer form:
//   Y_[CLS] = sum_h W_c^T sigma(W_v^T X^T softmax(X W_QK^T x_[CLS]))
// ---------------------------------------------------------------------------

struct DirectHeadCache {
  std::vector<double> q, attn, pooled, pre, act;
};

double direct_forward(const Matrix& x, const TransformerParams& params, const ModelConfig& config,
                      std::vector<DirectHeadCache>* caches, std::vector<double>* y_out) {
  const auto cls = x.row(0);
  std::vector<double> y(config.d, 0.0);
  const auto& layer = params.layers.front();
  if (caches) caches->resize(layer.heads.size());
  for (std::size_t h = 0; h < layer.heads.size(); ++h) {
    const auto& hp = layer.heads[h];
    DirectHeadCache local;
    DirectHeadCache& c = caches ? (*caches)[h] : local;
    c.q = matvec_t(hp.w_qk, cls);
    c.attn = softmax(matvec(x, c.q));
    c.pooled = matvec_t(x, c.attn);
    c.pre = matvec_t(hp.w_v, c.pooled);
    c.act.resize(c.pre.size());
    for (std::size_t i = 0; i < c.pre.size(); ++i) c.act[i] = activate(config.activation, c.pre[i]);
    const auto yh = matvec_t(hp.w_c, c.act);
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += yh[j];
  }
  const double s = dot(params.readout, y);
  if (y_out) *y_out = std::move(y);
  return s;
}

void direct_backward(const Matrix& x, const TransformerParams& params, const ModelConfig& config,
                     const std::vector<DirectHeadCache>& caches, const std::vector<double>& y,
                     double upstream, TransformerParams& grad) {
  const auto cls = x.row(0);
  for (std::size_t j = 0; j < y.size(); ++j) grad.readout[j] += upstream * y[j];
  std::vector<double> dy(params.readout.size());
  for (std::size_t j = 0; j < dy.size(); ++j) dy[j] = upstream * params.readout[j];

  const auto& layer = params.layers.front();
  auto& glayer = grad.layers.front();
  for (std::size_t h = 0; h < layer.heads.size(); ++h) {
    const auto& hp = layer.heads[h];
    auto& gh = glayer.heads[h];
    const auto& c = caches[h];
    // y_h = W_c^T act
    for (std::size_t i = 0; i < c.act.size(); ++i)
      for (std::size_t j = 0; j < dy.size(); ++j) gh.w_c(i, j) += c.act[i] * dy[j];
    std::vector<double> dpre = matvec(hp.w_c, dy);
    for (std::size_t i = 0; i < dpre.size(); ++i) dpre[i] *= activate_grad(config.activation, c.pre[i]);
    // pre = W_v^T pooled
    for (std::size_t r = 0; r < c.pooled.size(); ++r)
      for (std::size_t i = 0; i < dpre.size(); ++i) gh.w_v(r, i) += c.pooled[r] * dpre[i];
    const std::vector<double> dpooled = matvec(hp.w_v, dpre);
    // pooled = X^T attn
    const std::vector<double> dattn = matvec(x, dpooled);
    const double mean = dot(c.attn, dattn);
    std::vector<double> dlogits(c.attn.size());
    for (std::size_t t = 0; t < dlogits.size(); ++t) dlogits[t] = c.attn[t] * (dattn[t] - mean);
    // logits = X q, q = W_QK^T cls
    const std::vector<double> dq = matvec_t(x, dlogits);
    for (std::size_t i = 0; i < cls.size(); ++i)
      for (std::size_t j = 0; j < dq.size(); ++j) gh.w_qk(i, j) += cls[i] * dq[j];
  }
}

// ---------------------------------------------------------------------------
// Block recursion:
//   G_{l+1} = Pi(sum_h sigma(Pi(sigma(RowSoftmax(G W_QK G^T) G W_v))) W_c)
// ---------------------------------------------------------------------------

struct BlockHeadCache {
  Matrix attn, values, pre, act, normed, act2;
};

struct BlockLayerCache {
  Matrix input;
  std::vector<BlockHeadCache> heads;
  Matrix summed;
  Matrix output;
};

std::vector<BlockLayerCache> block_forward(const Matrix& x, const TransformerParams& params,
                                           const ModelConfig& config) {
  std::vector<BlockLayerCache> caches(params.layers.size());
  Matrix g = x;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& lc = caches[l];
    lc.input = g;
    lc.summed = Matrix(g.rows(), config.d);
    for (const auto& hp : params.layers[l].heads) {
      BlockHeadCache hc;
      hc.attn = row_softmax(matmul_nt(matmul(g, hp.w_qk), g));
      hc.values = matmul(g, hp.w_v);
      hc.pre = matmul(hc.attn, hc.values);
      hc.act = activate(config.activation, hc.pre);
      hc.normed = project(hc.act, Projection::rows_unit_l2());
      hc.act2 = activate(config.activation, hc.normed);
      lc.summed += matmul(hc.act2, hp.w_c);
      lc.heads.push_back(std::move(hc));
    }
    lc.output = project(lc.summed, Projection::rows_unit_l2());
    g = lc.output;
  }
  return caches;
}

void block_backward(const TransformerParams& params, const ModelConfig& config,
                    const std::vector<BlockLayerCache>& caches, double upstream,
                    TransformerParams& grad) {
  const Matrix& last = caches.back().output;
  for (std::size_t j = 0; j < config.d; ++j) grad.readout[j] += upstream * last(0, j);
  Matrix d_out(last.rows(), last.cols());
  for (std::size_t j = 0; j < config.d; ++j) d_out(0, j) = upstream * params.readout[j];

  for (std::size_t l = caches.size(); l-- > 0;) {
    const auto& lc = caches[l];
    const Matrix& g = lc.input;
    const Matrix d_summed = project_rows_backward(lc.summed, d_out);
    Matrix d_g(g.rows(), g.cols());
    for (std::size_t h = 0; h < lc.heads.size(); ++h) {
      const auto& hp = params.layers[l].heads[h];
      const auto& hc = lc.heads[h];
      auto& gh = grad.layers[l].heads[h];

      gh.w_c += matmul_tn(hc.act2, d_summed);
      Matrix d_act2 = matmul_nt(d_summed, hp.w_c);
      activate_backward(config.activation, hc.normed, d_act2);
      Matrix d_pre = project_rows_backward(hc.act, d_act2);
      activate_backward(config.activation, hc.pre, d_pre);

      const Matrix d_attn = matmul_nt(d_pre, hc.values);
      const Matrix d_values = matmul_tn(hc.attn, d_pre);
      gh.w_v += matmul_tn(g, d_values);
      d_g += matmul_nt(d_values, hp.w_v);

      Matrix d_scores(d_attn.rows(), d_attn.cols());
      for (std::size_t r = 0; r < d_attn.rows(); ++r) {
        const double mean = dot(hc.attn.row(r), d_attn.row(r));
        for (std::size_t c = 0; c < d_attn.cols(); ++c)
          d_scores(r, c) = hc.attn(r, c) * (d_attn(r, c) - mean);
      }
      // scores = G W_QK G^T
      const Matrix ds_g = matmul(d_scores, g);
      gh.w_qk += matmul_tn(g, ds_g);
      d_g += matmul_nt(ds_g, hp.w_qk);
      d_g += matmul(matmul_tn(d_scores, g), hp.w_qk);
    }
    d_out = std::move(d_g);
  }
}

}  // namespace

ForwardResult forward(const Matrix& x, const TransformerParams& params, const ModelConfig& config) {
  check_input(x, params, config);
  ForwardResult out;
  if (config.uses_block_form()) {
    auto caches = block_forward(x, params, config);
    for (auto& lc : caches) out.block_outputs.push_back(std::move(lc.output));
    out.scalar = dot(params.readout, out.block_outputs.back().row(0));
    return out;
  }
  // Direct form: every row of sum_h sigma(A_h X W_v) W_c; the [CLS] row feeds the readout.
  const auto& layer = params.layers.front();
  Matrix y(x.rows(), config.d);
  for (const auto& hp : layer.heads) {
    const Matrix attn = row_softmax(matmul_nt(matmul(x, hp.w_qk), x));
    y += matmul(activate(config.activation, matmul(attn, matmul(x, hp.w_v))), hp.w_c);
  }
  out.scalar = direct_forward(x, params, config, nullptr, nullptr);
  out.block_outputs.push_back(std::move(y));
  return out;
}

double forward_scalar(const Matrix& x, const TransformerParams& params, const ModelConfig& config) {
  check_input(x, params, config);
  if (config.uses_block_form()) {
    auto caches = block_forward(x, params, config);
    return dot(params.readout, caches.back().output.row(0));
  }
  return direct_forward(x, params, config, nullptr, nullptr);
}

double forward_backward(const Matrix& x, const TransformerParams& params, const ModelConfig& config,
                        const std::function<double(double)>& upstream_of, TransformerParams& grad) {
  check_input(x, params, config);
  grad.check_shapes(config);
  if (config.uses_block_form()) {
    auto caches = block_forward(x, params, config);
    const double s = dot(params.readout, caches.back().output.row(0));
    block_backward(params, config, caches, upstream_of(s), grad);
    return s;
  }
  std::vector<DirectHeadCache> caches;
  std::vector<double> y;
  const double s = direct_forward(x, params, config, &caches, &y);
  direct_backward(x, params, config, caches, y, upstream_of(s), grad);
  return s;
}

double forward_backward(const Matrix& x, const TransformerParams& params, const ModelConfig& config,
                        double upstream, TransformerParams& grad) {
  return forward_backward(x, params, config, [upstream](double) { return upstream; }, grad);
}

CrossEntropy ce_loss_grad(std::span<const double> logits, std::span<const double> one_hot) {
  if (logits.size() != one_hot.size() || logits.empty())
    throw std::invalid_argument("ce_loss_grad: logits and label must have the same nonzero length");
  std::size_t label = one_hot.size();
  for (std::size_t i = 0; i < one_hot.size(); ++i) {
    if (one_hot[i] == 1.0) {
      if (label != one_hot.size()) throw std::invalid_argument("ce_loss_grad: label is not one-hot");
      label = i;
    } else if (one_hot[i] != 0.0) {
      throw std::invalid_argument("ce_loss_grad: label is not one-hot");
    }
  }
  if (label == one_hot.size()) throw std::invalid_argument("ce_loss_grad: label is not one-hot");

  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) total += std::exp(z - mx);
  const double log_norm = mx + std::log(total);
  CrossEntropy out;
  out.loss = log_norm - logits[label];
  out.grad.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i)
    out.grad[i] = std::exp(logits[i] - log_norm) - one_hot[i];
  return out;
}

std::vector<double> binary_logits(double scalar) { return {0.0, scalar}; }

Matrix positional_encoding(std::size_t length, std::size_t d) {
  if (d == 0 || d % 2 != 0) throw std::invalid_argument("positional_encoding: d must be even");
  Matrix pe(length, d);
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i < d / 2; ++i) {
      const double freq = std::pow(10000.0, 2.0 * static_cast<double>(i) / static_cast<double>(d));
      const double angle = static_cast<double>(pos) / freq;
      pe(pos, 2 * i) = std::sin(angle);
      pe(pos, 2 * i + 1) = std::cos(angle);
    }
  }
  return pe;
}

double total_weight_l1(const TransformerParams& params) {
  double total = 0.0;
  params.for_each_value([&](double x) { total += std::abs(x); });
  return total;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

struct SampleLoss {
  double loss;
  bool correct;
};

SampleLoss binary_loss(double scalar, int label, std::vector<double>* dlogits) {
  const auto logits = binary_logits(scalar);
  const std::vector<double> y = label == 1 ? std::vector<double>{0.0, 1.0} : std::vector<double>{1.0, 0.0};
  auto ce = ce_loss_grad(logits, y);
  if (dlogits) *dlogits = std::move(ce.grad);
  const int predicted = scalar > 0.0 ? 1 : 0;
  return {ce.loss, predicted == label};
}

void check_dataset(const LabeledDataset& data, const char* name) {
  if (data.inputs.size() != data.labels.size())
    throw std::invalid_argument(std::string(name) + ": inputs and labels differ in length");
  for (int y : data.labels)
    if (y != 0 && y != 1) throw std::invalid_argument(std::string(name) + ": labels must be 0 or 1");
}

bool better_epoch(const EpochMetrics& a, const EpochMetrics& b) {
  if (a.val_accuracy != b.val_accuracy) return a.val_accuracy > b.val_accuracy;
  return a.val_loss < b.val_loss;
}

}  // namespace

Evaluation evaluate(const TransformerParams& params, const ModelConfig& config,
                    const LabeledDataset& data) {
  check_dataset(data, "evaluate");
  Evaluation e;
  if (data.size() == 0) return e;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = binary_loss(forward_scalar(data.inputs[i], params, config), data.labels[i], nullptr);
    e.loss += r.loss;
    correct += r.correct ? 1 : 0;
  }
  e.loss /= static_cast<double>(data.size());
  e.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return e;
}

std::size_t select_best_epoch(std::span<const EpochMetrics> history) {
  if (history.empty()) throw std::invalid_argument("select_best_epoch: empty history");
  std::size_t best = 0;
  for (std::size_t e = 1; e < history.size(); ++e)
    if (better_epoch(history[e], history[best])) best = e;
  return best;
}

TrainResult train(const ModelConfig& config, const LabeledDataset& train_set,
                  const LabeledDataset& val_set, const TrainHyper& hyper,
                  const std::function<void(std::size_t, const EpochMetrics&)>& on_epoch) {
  config.validate();
  check_dataset(train_set, "train");
  check_dataset(val_set, "validation");
  if (train_set.size() == 0) throw std::invalid_argument("train: empty training set");
  if (hyper.batch_size == 0 || hyper.batch_size > train_set.size())
    throw std::invalid_argument("train: batch size must be in [1, training set size]");
  if (!(hyper.learning_rate >= 0.0)) throw std::invalid_argument("train: negative learning rate");

  TrainResult result;
  result.params = init_params(config);
  result.best_params = result.params;

  const std::size_t n_params = result.params.parameter_count();
  std::vector<double> m1(n_params, 0.0), m2(n_params, 0.0), flat_grad(n_params, 0.0);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::size_t step = 0;
  std::vector<double> dlogits;

  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t stop = std::min(order.size(), start + hyper.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      auto grad = TransformerParams::zeros(config);
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t i = order[b];
        const int label = train_set.labels[i];
        forward_backward(
            train_set.inputs[i], result.params, config,
            [&](double s) {
              binary_loss(s, label, &dlogits);
              return dlogits[1] * inv_batch;
            },
            grad);
      }
      std::size_t idx = 0;
      grad.for_each_value([&](double g) { flat_grad[idx++] = g; });

      ++step;
      idx = 0;
      if (hyper.optimizer == OptimizerKind::kSgd) {
        result.params.for_each_value([&](double& w) { w -= hyper.learning_rate * flat_grad[idx++]; });
      } else {
        const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(step));
        result.params.for_each_value([&](double& w) {
          const double g = flat_grad[idx];
          m1[idx] = hyper.beta1 * m1[idx] + (1.0 - hyper.beta1) * g;
          m2[idx] = hyper.beta2 * m2[idx] + (1.0 - hyper.beta2) * g * g;
          const double mhat = m1[idx] / c1;
          const double vhat = m2[idx] / c2;
          w -= hyper.learning_rate * mhat / (std::sqrt(vhat) + hyper.adam_eps);
          ++idx;
        });
      }
    }

    const auto tr = evaluate(result.params, config, train_set);
    const auto va = evaluate(result.params, config, val_set);
    EpochMetrics metrics{tr.loss, tr.accuracy, va.loss, va.accuracy};
    result.history.push_back(metrics);
    if (epoch == 0 || better_epoch(metrics, result.history[result.best_epoch - 1])) {
      result.best_epoch = epoch + 1;
      result.best_params = result.params;
    }
    if (on_epoch) on_epoch(epoch + 1, metrics);
  }
  return result;
}

}  // namespace seqbounds
