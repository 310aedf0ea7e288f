#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "seqbounds/transformer.hpp"

namespace seqbounds {

struct SparseMajorityConfig {
  std::size_t seq_len = 10;         // T
  std::size_t index_set_size = 5;   // |I|, odd
  std::size_t n_train = 200;
  std::size_t n_val = 2000;
  std::size_t d = 16;               // even, >= 4
  std::uint64_t seed = 0;

  void validate() const;
};

struct SparseMajorityData {
  LabeledDataset train;
  LabeledDataset val;
  std::vector<std::size_t> index_set;  // sorted, 0-based bit positions
};

/// Label of a bit string: 1 iff more than half of the bits at `index_set` are 1.
int majority_label(std::span<const int> bits, std::span<const std::size_t> index_set);

/// Embeds bits as rows 1..T of a (T+1) x d matrix: bit 0 -> e_0, bit 1 -> e_1,
/// [CLS] = e_2 in row 0, positional encoding added to every row.
Matrix embed_bits(std::span<const int> bits, std::size_t d);

SparseMajorityData gen_sparse_majority(const SparseMajorityConfig& cfg);

struct ExperimentRecord {
  std::size_t seq_len = 0;
  std::size_t rep = 0;
  std::size_t best_epoch = 0;
  double val_accuracy = 0.0;
  double gen_gap = 0.0;      // val CE - train CE at the best epoch
  double gen_gap_abs = 0.0;
  double total_weight_l1 = 0.0;
  double train_ce = 0.0;
  double val_ce = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

struct SweepConfig {
  std::vector<std::size_t> seq_lens{10, 20, 30, 40};
  std::size_t reps = 3;
  SparseMajorityConfig data;   // seq_len and seed are set per run
  ModelConfig model;           // seq_len, d and seed are set per run
  TrainHyper hyper;
  std::uint64_t master_seed = 20240601;
  std::size_t threads = 1;

  SweepConfig();
  void validate() const;

  /// Settings of the original large-scale runs.
  static SweepConfig full_scale();
};

/// Reads a sweep JSON object; missing fields keep their defaults, unknown
/// fields are rejected. Throws std::invalid_argument on malformed input.
SweepConfig sweep_config_from_json(const std::string& text);
std::string sweep_config_to_json(const SweepConfig& cfg);

/// Seed for run (T, rep) under `master`.
std::uint64_t run_seed(std::uint64_t master, std::size_t seq_len, std::size_t rep);

/// One sweep cell: fresh data, training, best-epoch metrics.
ExperimentRecord run_cell(const SweepConfig& sweep, std::size_t seq_len, std::size_t rep);

/// Records ordered by (T, rep). `on_record` is called as cells finish.
std::vector<ExperimentRecord> run_sweep(
    const SweepConfig& sweep,
    const std::function<void(const ExperimentRecord&)>& on_record = {});

// --- reports ----------------------------------------------------------------

inline constexpr const char* kRecordsHeader =
    "T,rep,best_epoch,val_accuracy,gen_gap,gen_gap_abs,total_weight_l1,train_ce,val_ce,seed";

std::string records_to_csv(std::span<const ExperimentRecord> records);
std::vector<ExperimentRecord> records_from_csv(const std::string& text);

struct SeriesPoint {
  double x = 0.0;
  double y = 0.0;
};

enum class RecordField { kGenGap, kTotalWeightL1, kValAccuracy };

/// Per-T maximum of `field`, sorted by T.
std::vector<SeriesPoint> per_t_max(std::span<const ExperimentRecord> records, RecordField field);

std::string line_chart_svg(std::span<const SeriesPoint> points, const std::string& title,
                           const std::string& x_label, const std::string& y_label);

/// Writes records.csv, max_gen_gap.svg, max_weight_l1.svg and
/// max_val_accuracy.svg into `out_dir` (created if missing). Returns the paths.
std::vector<std::filesystem::path> emit_report(std::span<const ExperimentRecord> records,
                                               const std::filesystem::path& out_dir);

double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace seqbounds
