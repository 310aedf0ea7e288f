#include "seqbounds/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "json.hpp"
#include "seqbounds/seeding.hpp"

namespace seqbounds {

void SparseMajorityConfig::validate() const {
  if (d < 4 || d % 2 != 0) throw std::invalid_argument("sparse majority: d must be even and >= 4");
  if (seq_len < 1) throw std::invalid_argument("sparse majority: T must be >= 1");
  if (index_set_size % 2 == 0) throw std::invalid_argument("sparse majority: |I| must be odd");
  if (index_set_size > seq_len) throw std::invalid_argument("sparse majority: |I| must be <= T");
}

int majority_label(std::span<const int> bits, std::span<const std::size_t> index_set) {
  std::size_t ones = 0;
  for (std::size_t i : index_set) {
    if (i >= bits.size()) throw std::invalid_argument("majority_label: index out of range");
    ones += bits[i] != 0 ? 1 : 0;
  }
  return 2 * ones > index_set.size() ? 1 : 0;
}

Matrix embed_bits(std::span<const int> bits, std::size_t d) {
  if (d < 4 || d % 2 != 0) throw std::invalid_argument("embed_bits: d must be even and >= 4");
  Matrix x = positional_encoding(bits.size() + 1, d);
  x(0, 2) += 1.0;
  for (std::size_t t = 0; t < bits.size(); ++t) x(t + 1, bits[t] != 0 ? 1 : 0) += 1.0;
  return x;
}

SparseMajorityData gen_sparse_majority(const SparseMajorityConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(derive_seed(cfg.seed, {0x5ba75e}));
  SparseMajorityData out;

  std::vector<std::size_t> positions(cfg.seq_len);
  std::iota(positions.begin(), positions.end(), 0);
  std::shuffle(positions.begin(), positions.end(), rng);
  out.index_set.assign(positions.begin(), positions.begin() + static_cast<std::ptrdiff_t>(cfg.index_set_size));
  std::sort(out.index_set.begin(), out.index_set.end());

  std::vector<int> bits(cfg.seq_len);
  auto fill = [&](LabeledDataset& set, std::size_t n) {
    set.inputs.reserve(n);
    set.labels.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
      for (int& b : bits) b = static_cast<int>(rng() >> 63);
      set.inputs.push_back(embed_bits(bits, cfg.d));
      set.labels.push_back(majority_label(bits, out.index_set));
    }
  };
  fill(out.train, cfg.n_train);
  fill(out.val, cfg.n_val);
  return out;
}

// --- sweep configuration ------------------------------------------------------

SweepConfig::SweepConfig() {
  model.d = data.d;
  model.k = data.d;
  model.heads = 1;
  model.layers = 1;
  hyper.epochs = 2000;
  hyper.batch_size = 128;
}

SweepConfig SweepConfig::full_scale() {
  SweepConfig c;
  c.seq_lens.clear();
  for (std::size_t t = 20; t <= 200; t += 20) c.seq_lens.push_back(t);
  c.reps = 5;
  c.data.index_set_size = 9;
  c.data.n_train = 300;
  c.data.n_val = 10000;
  c.data.d = 64;
  c.model.d = 64;
  c.model.k = 64;
  c.model.heads = 2;
  c.hyper.epochs = 200000;
  return c;
}

void SweepConfig::validate() const {
  if (seq_lens.empty()) throw std::invalid_argument("sweep: T list is empty");
  if (reps < 1) throw std::invalid_argument("sweep: reps must be >= 1");
  if (model.d != data.d) throw std::invalid_argument("sweep: model d must equal data d");
  if (threads < 1) throw std::invalid_argument("sweep: threads must be >= 1");
  if (hyper.batch_size < 1 || hyper.batch_size > data.n_train)
    throw std::invalid_argument("sweep: batch size must be in [1, n_train]");
  for (std::size_t t : seq_lens) {
    SparseMajorityConfig d = data;
    d.seq_len = t;
    d.validate();
  }
  ModelConfig m = model;
  m.validate();
}

namespace {

using nlohmann::json;

template <typename T>
void read_field(const json& obj, const char* key, T& dst) {
  if (auto it = obj.find(key); it != obj.end()) dst = it->template get<T>();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
      throw std::invalid_argument("sweep config: unknown field '" + it.key() + "' in " + where);
  }
}

}  // namespace

SweepConfig sweep_config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("sweep config: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("sweep config: expected a JSON object");
  SweepConfig c;
  try {
    reject_unknown(doc,
                   {"T_list", "reps", "index_set_size", "n_train", "n_val", "d", "k", "heads",
                    "activation", "epochs", "batch_size", "learning_rate", "optimizer", "seed",
                    "threads", "full_scale"},
                   "top level");
    if (doc.value("full_scale", false)) c = SweepConfig::full_scale();
    read_field(doc, "T_list", c.seq_lens);
    read_field(doc, "reps", c.reps);
    read_field(doc, "index_set_size", c.data.index_set_size);
    read_field(doc, "n_train", c.data.n_train);
    read_field(doc, "n_val", c.data.n_val);
    if (doc.contains("d")) {
      c.data.d = doc.at("d").get<std::size_t>();
      c.model.d = c.data.d;
      c.model.k = c.data.d;
    }
    read_field(doc, "k", c.model.k);
    read_field(doc, "heads", c.model.heads);
    if (doc.contains("activation")) c.model.activation = parse_activation(doc.at("activation").get<std::string>());
    read_field(doc, "epochs", c.hyper.epochs);
    read_field(doc, "batch_size", c.hyper.batch_size);
    read_field(doc, "learning_rate", c.hyper.learning_rate);
    if (doc.contains("optimizer")) {
      const auto o = doc.at("optimizer").get<std::string>();
      if (o == "adam") c.hyper.optimizer = OptimizerKind::kAdam;
      else if (o == "sgd") c.hyper.optimizer = OptimizerKind::kSgd;
      else throw std::invalid_argument("sweep config: optimizer must be 'adam' or 'sgd'");
    }
    read_field(doc, "seed", c.master_seed);
    read_field(doc, "threads", c.threads);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("sweep config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string sweep_config_to_json(const SweepConfig& c) {
  json doc = {{"T_list", c.seq_lens},
              {"reps", c.reps},
              {"index_set_size", c.data.index_set_size},
              {"n_train", c.data.n_train},
              {"n_val", c.data.n_val},
              {"d", c.data.d},
              {"k", c.model.k},
              {"heads", c.model.heads},
              {"activation", to_string(c.model.activation)},
              {"epochs", c.hyper.epochs},
              {"batch_size", c.hyper.batch_size},
              {"learning_rate", c.hyper.learning_rate},
              {"optimizer", c.hyper.optimizer == OptimizerKind::kAdam ? "adam" : "sgd"},
              {"seed", c.master_seed},
              {"threads", c.threads}};
  return doc.dump(2);
}

// --- sweep --------------------------------------------------------------------

std::uint64_t run_seed(std::uint64_t master, std::size_t seq_len, std::size_t rep) {
  return derive_seed(master, {seq_len, rep});
}

ExperimentRecord run_cell(const SweepConfig& sweep, std::size_t seq_len, std::size_t rep) {
  ExperimentRecord r;
  r.seq_len = seq_len;
  r.rep = rep;
  r.seed = run_seed(sweep.master_seed, seq_len, rep);

  SparseMajorityConfig dc = sweep.data;
  dc.seq_len = seq_len;
  dc.seed = derive_seed(r.seed, {1});
  const auto data = gen_sparse_majority(dc);

  ModelConfig mc = sweep.model;
  mc.seq_len = seq_len;
  mc.d = dc.d;
  mc.seed = derive_seed(r.seed, {2});

  const auto result = train(mc, data.train, data.val, sweep.hyper);
  r.best_epoch = result.best_epoch;
  if (result.best_epoch == 0) {
    const auto tr = evaluate(result.best_params, mc, data.train);
    const auto va = evaluate(result.best_params, mc, data.val);
    r.train_ce = tr.loss;
    r.val_ce = va.loss;
    r.val_accuracy = va.accuracy;
  } else {
    const auto& m = result.history[result.best_epoch - 1];
    r.train_ce = m.train_loss;
    r.val_ce = m.val_loss;
    r.val_accuracy = m.val_accuracy;
  }
  r.gen_gap = r.val_ce - r.train_ce;
  r.gen_gap_abs = std::abs(r.gen_gap);
  r.total_weight_l1 = total_weight_l1(result.best_params);
  return r;
}

std::vector<ExperimentRecord> run_sweep(const SweepConfig& sweep,
                                        const std::function<void(const ExperimentRecord&)>& on_record) {
  sweep.validate();
  struct Cell {
    std::size_t seq_len, rep;
  };
  std::vector<Cell> cells;
  for (std::size_t t : sweep.seq_lens)
    for (std::size_t r = 0; r < sweep.reps; ++r) cells.push_back({t, r});

  std::vector<ExperimentRecord> records(cells.size());
  std::vector<std::string> errors(cells.size());
  std::mutex callback_mutex;
  auto run = [&](std::size_t i) {
    try {
      records[i] = run_cell(sweep, cells[i].seq_len, cells[i].rep);
      if (on_record) {
        std::lock_guard lock(callback_mutex);
        on_record(records[i]);
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  };

  const std::size_t workers = std::min(sweep.threads, cells.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      run(i);
      if (!errors[i].empty()) break;
    }
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < cells.size(); i += workers) run(i);
      });
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!errors[i].empty())
      throw std::runtime_error("sweep cell (T=" + std::to_string(cells[i].seq_len) +
                               ", rep=" + std::to_string(cells[i].rep) + ") failed: " + errors[i]);
  }

  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return a.seq_len != b.seq_len ? a.seq_len < b.seq_len : a.rep < b.rep;
  });
  return records;
}

}  // namespace seqbounds
