#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "seqbounds/linalg.hpp"

namespace seqbounds {

enum class Activation { kRelu, kIdentity };

std::string to_string(Activation a);
Activation parse_activation(const std::string& s);

/// kAuto: one layer uses the direct scalar form (no row projection), more
/// layers use the projected block recursion. kBlock forces the block recursion.
enum class LayerForm { kAuto, kBlock };

struct ModelConfig {
  std::size_t seq_len = 8;  // T, tokens excluding [CLS]
  std::size_t d = 8;        // embedding dimension
  std::size_t k = 8;        // hidden dimension
  std::size_t heads = 1;
  std::size_t layers = 1;
  Activation activation = Activation::kRelu;
  LayerForm form = LayerForm::kAuto;
  std::uint64_t seed = 0;

  void validate() const;
  bool uses_block_form() const { return form == LayerForm::kBlock || layers > 1; }
};

struct HeadParams {
  Matrix w_qk;  // d x d
  Matrix w_v;   // d x k
  Matrix w_c;   // k x d
  friend bool operator==(const HeadParams&, const HeadParams&) = default;
};

struct LayerParams {
  std::vector<HeadParams> heads;
  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct TransformerParams {
  std::vector<LayerParams> layers;
  std::vector<double> readout;  // w, length d

  /// Zero-valued parameters with the shapes `config` implies.
  static TransformerParams zeros(const ModelConfig& config);

  std::size_t parameter_count() const;
  /// Visits every trainable entry in a fixed order (layer, head, QK, V, C, then w).
  void for_each_value(const std::function<void(double&)>& fn);
  void for_each_value(const std::function<void(double)>& fn) const;
  /// Throws std::invalid_argument if shapes disagree with `config`.
  void check_shapes(const ModelConfig& config) const;

  friend bool operator==(const TransformerParams&, const TransformerParams&) = default;
};

/// Entries i.i.d. uniform on [-1/sqrt(d), 1/sqrt(d)] from the config seed.
TransformerParams init_params(const ModelConfig& config);

struct ForwardResult {
  std::vector<Matrix> block_outputs;  // one (T+1) x d matrix per layer
  double scalar = 0.0;                // w . Y_[CLS]
};

/// Full forward pass. X is (T+1) x d with the [CLS] row first.
ForwardResult forward(const Matrix& x, const TransformerParams& params, const ModelConfig& config);

/// Scalar output only; for one layer in the direct form this touches only the
/// [CLS] row of attention.
double forward_scalar(const Matrix& x, const TransformerParams& params, const ModelConfig& config);

/// Returns the scalar output and accumulates upstream * d(scalar)/d(params)
/// into `grad` (which must have the parameter shapes).
double forward_backward(const Matrix& x, const TransformerParams& params, const ModelConfig& config,
                        double upstream, TransformerParams& grad);
/// Same, with the upstream derived from the scalar output (e.g. a loss slope).
double forward_backward(const Matrix& x, const TransformerParams& params, const ModelConfig& config,
                        const std::function<double(double)>& upstream_of, TransformerParams& grad);

struct CrossEntropy {
  double loss = 0.0;
  std::vector<double> grad;  // softmax(logits) - y
};

/// -log softmax(logits)[label] and its gradient. Throws std::invalid_argument
/// unless y is one-hot of the same length as logits.
CrossEntropy ce_loss_grad(std::span<const double> logits, std::span<const double> one_hot);

/// Binary head used for training: logits are (0, s) for scalar output s.
std::vector<double> binary_logits(double scalar);

/// PE(pos, 2i) = sin(pos / 10000^{2i/d}), PE(pos, 2i+1) = cos(pos / 10000^{2i/d}).
Matrix positional_encoding(std::size_t length, std::size_t d);

/// Sum of |entry| over every trainable value including the readout.
double total_weight_l1(const TransformerParams& params);

// --- training -------------------------------------------------------------

struct LabeledDataset {
  std::vector<Matrix> inputs;
  std::vector<int> labels;  // 0 or 1

  std::size_t size() const { return inputs.size(); }
};

enum class OptimizerKind { kAdam, kSgd };

struct TrainHyper {
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
};

struct EpochMetrics {
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct TrainResult {
  TransformerParams params;       // after the last epoch
  TransformerParams best_params;  // at best_epoch (initial params when epochs == 0)
  std::size_t best_epoch = 0;     // 1-based; 0 means untrained
  std::vector<EpochMetrics> history;
};

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

Evaluation evaluate(const TransformerParams& params, const ModelConfig& config,
                    const LabeledDataset& data);

/// Index (0-based) of the best epoch: highest validation accuracy, then lowest
/// validation loss, then earliest. Throws on an empty history.
std::size_t select_best_epoch(std::span<const EpochMetrics> history);

/// Mini-batch training of the binary cross-entropy objective. Shuffling uses a
/// generator seeded from config.seed, so runs are bitwise reproducible.
/// `on_epoch`, when set, is called after every epoch.
TrainResult train(const ModelConfig& config, const LabeledDataset& train_set,
                  const LabeledDataset& val_set, const TrainHyper& hyper,
                  const std::function<void(std::size_t, const EpochMetrics&)>& on_epoch = {});

// --- weight files -----------------------------------------------------------

/// JSON {config, layers:[{heads:[{W_QK, W_v, W_c}]}], w}; matrices store their
/// entries as hex-float strings so loading is bit-exact.
std::string params_to_json(const ModelConfig& config, const TransformerParams& params);
void params_from_json(const std::string& text, ModelConfig& config, TransformerParams& params);

}  // namespace seqbounds
