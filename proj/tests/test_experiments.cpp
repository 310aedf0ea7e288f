#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "seqbounds/experiments.hpp"

using namespace seqbounds;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path data_dir() { return SEQBOUNDS_TEST_DATA_DIR; }

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("seqbounds_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::vector<ExperimentRecord> golden_records() {
  auto rec = [](std::size_t t, std::size_t rep, std::size_t best, double acc, double gap, double gap_abs, double l1,
                double tr, double va, std::uint64_t seed) {
    ExperimentRecord r;
    r.seq_len = t;
    r.rep = rep;
    r.best_epoch = best;
    r.val_accuracy = acc;
    r.gen_gap = gap;
    r.gen_gap_abs = gap_abs;
    r.total_weight_l1 = l1;
    r.train_ce = tr;
    r.val_ce = va;
    r.seed = seed;
    return r;
  };
  return {rec(10, 0, 12, 0.875, 0.125, 0.125, 3.5, 0.25, 0.375, 1),
          rec(10, 1, 0, 0.5, -0.0625, 0.0625, 1.0 / 3.0, 0.6931471805599453, 0.6306471805599453,
              18446744073709551615ULL),
          rec(20, 0, 7, 0.9, 0.1, 0.1, std::sqrt(2.0), 0.2, 0.3, 42),
          rec(20, 1, 1999, 1.0, 1e-17, 1e-17, 123456.789, 1e-300, 2.5e-300, 7)};
}

SweepConfig tiny_sweep() {
  SweepConfig s;
  s.seq_lens = {4, 6};
  s.reps = 2;
  s.data.index_set_size = 3;
  s.data.n_train = 32;
  s.data.n_val = 64;
  s.data.d = 8;
  s.model.d = 8;
  s.model.k = 8;
  s.hyper.epochs = 5;
  s.hyper.batch_size = 16;
  s.hyper.learning_rate = 1e-2;
  s.master_seed = 2024;
  return s;
}

}  // namespace

TEST(SparseMajority, LabelRule) {
  const std::vector<int> bits{1, 1, 0, 0, 1};
  const std::vector<std::size_t> idx{0, 1, 2};
  EXPECT_EQ(majority_label(bits, idx), 1);
  const std::vector<std::size_t> idx2{2, 3, 4};
  EXPECT_EQ(majority_label(bits, idx2), 0);
  const std::vector<std::size_t> bad{9};
  EXPECT_THROW(majority_label(bits, bad), std::invalid_argument);
}

TEST(SparseMajority, Embedding) {
  const std::vector<int> bits{0, 1, 1};
  const Matrix x = embed_bits(bits, 6);
  const Matrix pe = positional_encoding(4, 6);
  ASSERT_EQ(x.rows(), 4u);
  const Matrix raw = x - pe;
  std::vector<double> e0(raw.row(1).begin(), raw.row(1).end());
  std::vector<double> e1(raw.row(2).begin(), raw.row(2).end());
  std::vector<double> cls(raw.row(0).begin(), raw.row(0).end());
  EXPECT_NEAR(dot(e0, e1), 0.0, 1e-15);
  EXPECT_NEAR(dot(e0, cls), 0.0, 1e-15);
  for (std::size_t r = 0; r < 4; ++r) EXPECT_NEAR(vector_norm(raw.row(r), Exponent(2)), 1.0, 1e-12);
  EXPECT_THROW(embed_bits(bits, 5), std::invalid_argument);
  EXPECT_THROW(embed_bits(bits, 2), std::invalid_argument);
}

TEST(SparseMajority, ConfigValidation) {
  SparseMajorityConfig c;
  c.index_set_size = 4;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.index_set_size = 11;
  c.seq_len = 10;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.index_set_size = 5;
  c.d = 6;
  EXPECT_NO_THROW(c.validate());
  c.d = 7;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(SparseMajority, DeterministicAndConsistent) {
  SparseMajorityConfig c;
  c.seq_len = 12;
  c.n_train = 50;
  c.n_val = 30;
  c.d = 8;
  c.seed = 99;
  const auto a = gen_sparse_majority(c);
  const auto b = gen_sparse_majority(c);
  EXPECT_EQ(a.index_set, b.index_set);
  EXPECT_EQ(a.train.labels, b.train.labels);
  EXPECT_EQ(a.val.inputs, b.val.inputs);
  EXPECT_EQ(a.index_set.size(), 5u);
  EXPECT_EQ(a.train.size(), 50u);
  EXPECT_EQ(a.val.size(), 30u);

  // Recover bits from the embedding and re-derive each label.
  const Matrix pe = positional_encoding(13, 8);
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    const Matrix raw = a.train.inputs[i] - pe;
    std::vector<int> bits(12);
    for (std::size_t t = 0; t < 12; ++t) {
      EXPECT_NEAR(vector_norm(raw.row(t + 1), Exponent(2)), 1.0, 1e-12);
      bits[t] = raw(t + 1, 1) > 0.5 ? 1 : 0;
    }
    EXPECT_EQ(majority_label(bits, a.index_set), a.train.labels[i]);
  }
  c.seed = 100;
  EXPECT_NE(gen_sparse_majority(c).train.labels, a.train.labels);
}

TEST(SparseMajority, LabelBalance) {
  SparseMajorityConfig c;
  c.seq_len = 9;
  c.index_set_size = 5;
  c.n_train = 10000;
  c.n_val = 0;
  c.d = 4;
  c.seed = 5;
  const auto data = gen_sparse_majority(c);
  double mean = 0.0;
  for (int y : data.train.labels) mean += y;
  mean /= 10000.0;
  EXPECT_NEAR(mean, 0.5, 0.02);
}

TEST(Csv, GoldenFile) {
  const auto recs = golden_records();
  EXPECT_EQ(records_to_csv(recs), read_file(data_dir() / "golden_records.csv"));
}

TEST(Csv, RoundTrip) {
  const auto recs = golden_records();
  EXPECT_EQ(records_from_csv(records_to_csv(recs)), recs);
  EXPECT_THROW(records_from_csv(""), std::invalid_argument);
  EXPECT_THROW(records_from_csv("T,rep\n1,2\n"), std::invalid_argument);
  EXPECT_THROW(records_from_csv(std::string(kRecordsHeader) + "\n1,2,3\n"), std::invalid_argument);
  EXPECT_THROW(records_from_csv(std::string(kRecordsHeader) + "\n1,0,3,x,0,0,0,0,0,1\n"), std::invalid_argument);
}

TEST(Report, PerTMaxMatchesScan) {
  const auto recs = golden_records();
  for (auto f : {RecordField::kGenGap, RecordField::kTotalWeightL1, RecordField::kValAccuracy}) {
    const auto series = per_t_max(recs, f);
    ASSERT_EQ(series.size(), 2u);
    for (const auto& p : series) {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& r : recs) {
        if (static_cast<double>(r.seq_len) != p.x) continue;
        const double v = f == RecordField::kGenGap ? r.gen_gap
                         : f == RecordField::kTotalWeightL1 ? r.total_weight_l1
                                                            : r.val_accuracy;
        best = std::max(best, v);
      }
      EXPECT_EQ(p.y, best);
    }
  }
}

TEST(Report, EmitsCsvAndCharts) {
  const auto dir = scratch("report");
  auto recs = golden_records();
  recs.resize(2);
  recs[1].seq_len = 20;
  const auto paths = emit_report(recs, dir);
  ASSERT_EQ(paths.size(), 4u);
  const std::string csv = read_file(paths[0]);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  for (std::size_t i = 1; i < 4; ++i) {
    const std::string svg = read_file(paths[i]);
    EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    std::size_t points = 0;
    for (std::size_t pos = 0; (pos = svg.find("class=\"point\"", pos)) != std::string::npos; ++pos) ++points;
    EXPECT_EQ(points, 2u);
  }
  EXPECT_THROW(emit_report(std::vector<ExperimentRecord>{}, dir), std::invalid_argument);
  std::filesystem::remove_all(dir);
}

TEST(Report, SvgEscapesText) {
  const std::vector<SeriesPoint> pts{{1, 2}};
  const auto svg = line_chart_svg(pts, "a<b & c", "x", "y");
  EXPECT_NE(svg.find("a&lt;b &amp; c"), std::string::npos);
}

TEST(Spearman, Values) {
  const std::vector<double> x{1, 2, 3, 4}, up{10, 20, 30, 40}, down{4, 3, 2, 1}, tied{1, 1, 2, 2};
  EXPECT_NEAR(spearman(x, up), 1.0, 1e-15);
  EXPECT_NEAR(spearman(x, down), -1.0, 1e-15);
  EXPECT_NEAR(spearman(x, tied), 0.8944271909999159, 1e-12);
  const std::vector<double> constant{5, 5, 5, 5};
  EXPECT_EQ(spearman(x, constant), 0.0);
}

TEST(SweepConfig, JsonDefaultsAndOverrides) {
  const SweepConfig d = sweep_config_from_json("{}");
  EXPECT_EQ(d.seq_lens, (std::vector<std::size_t>{10, 20, 30, 40}));
  EXPECT_EQ(d.reps, 3u);
  EXPECT_EQ(d.data.d, 16u);
  EXPECT_EQ(d.model.heads, 1u);
  EXPECT_EQ(d.data.index_set_size, 5u);
  EXPECT_EQ(d.hyper.epochs, 2000u);
  const SweepConfig c = sweep_config_from_json(R"({"T_list":[5,7],"reps":2,"d":8,"epochs":3,"seed":9})");
  EXPECT_EQ(c.seq_lens, (std::vector<std::size_t>{5, 7}));
  EXPECT_EQ(c.model.d, 8u);
  EXPECT_EQ(c.model.k, 8u);
  EXPECT_EQ(c.master_seed, 9u);
  EXPECT_EQ(sweep_config_from_json(sweep_config_to_json(c)).seq_lens, c.seq_lens);
  const SweepConfig p = sweep_config_from_json(R"({"full_scale":true})");
  EXPECT_EQ(p.data.index_set_size, 9u);
  EXPECT_EQ(p.data.n_val, 10000u);
  EXPECT_EQ(p.model.heads, 2u);
  EXPECT_THROW(sweep_config_from_json(R"({"bogus":1})"), std::invalid_argument);
  EXPECT_THROW(sweep_config_from_json(R"({"reps":"x"})"), std::invalid_argument);
  EXPECT_THROW(sweep_config_from_json(R"({"index_set_size":4})"), std::invalid_argument);
  EXPECT_THROW(sweep_config_from_json("[1"), std::invalid_argument);
}

TEST(Sweep, CountsOrderAndDeterminism) {
  auto s = tiny_sweep();
  const auto a = run_sweep(s);
  ASSERT_EQ(a.size(), 4u);
  EXPECT_EQ(a[0].seq_len, 4u);
  EXPECT_EQ(a[1].rep, 1u);
  EXPECT_EQ(a[2].seq_len, 6u);
  for (const auto& r : a) {
    EXPECT_GE(r.val_accuracy, 0.0);
    EXPECT_LE(r.val_accuracy, 1.0);
    EXPECT_TRUE(std::isfinite(r.gen_gap));
    EXPECT_EQ(r.gen_gap_abs, std::abs(r.gen_gap));
    EXPECT_GE(r.best_epoch, 1u);
    EXPECT_EQ(r.seed, run_seed(s.master_seed, r.seq_len, r.rep));
  }
  s.threads = 3;
  EXPECT_EQ(run_sweep(s), a);
  EXPECT_EQ(records_to_csv(a), read_file(data_dir() / "tiny_sweep.csv"));
}

TEST(Sweep, ZeroEpochs) {
  auto s = tiny_sweep();
  s.seq_lens = {10, 20};
  s.reps = 3;
  s.hyper.epochs = 0;
  const auto recs = run_sweep(s);
  ASSERT_EQ(recs.size(), 6u);
  for (const auto& r : recs) {
    EXPECT_EQ(r.best_epoch, 0u);
    EXPECT_GT(r.val_ce, 0.0);
  }
}

TEST(Sweep, InvalidSweepRejected) {
  auto s = tiny_sweep();
  s.seq_lens = {4, 2};
  EXPECT_THROW(run_sweep(s), std::invalid_argument);
  s.seq_lens = {4};
  s.data.n_train = 8;
  EXPECT_THROW(run_sweep(s), std::invalid_argument);
  s = tiny_sweep();
  s.reps = 0;
  EXPECT_THROW(run_sweep(s), std::invalid_argument);
  s = tiny_sweep();
  s.seq_lens.clear();
  EXPECT_THROW(run_sweep(s), std::invalid_argument);
}
