#include "cli.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "seqbounds/bounds.hpp"
#include "seqbounds/covering.hpp"
#include "seqbounds/experiments.hpp"
#include "seqbounds/linalg.hpp"
#include "seqbounds/rademacher.hpp"
#include "seqbounds/seeding.hpp"
#include "seqbounds/transformer.hpp"

namespace seqbounds::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr const char* kVerbs[] = {"norms",        "cover-build", "cover-verify", "bound", "allocate",
                                  "multilayer",   "estimate-rad", "train",       "sweep", "report"};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << body)) throw std::runtime_error("cannot write '" + path + "'");
}

json parse_json_arg(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string(what) + ": " + e.what());
  }
}

Matrix parse_matrix(const std::string& text) {
  const json j = parse_json_arg(text, "--matrix");
  if (!j.is_array() || j.empty()) throw UsageError("--matrix must be a nonempty array of rows");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) throw UsageError("--matrix rows must be nonempty arrays");
  std::vector<double> data;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != cols) throw UsageError("--matrix rows must have equal length");
    for (const auto& v : row) {
      if (!v.is_number()) throw UsageError("--matrix entries must be numbers");
      data.push_back(v.get<double>());
    }
  }
  try {
    return Matrix(j.size(), cols, std::move(data));
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--matrix: ") + e.what());
  }
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cell.size()) throw UsageError(std::string(what) + ": bad number '" + cell + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string(what) + ": empty list");
  return out;
}

Exponent parse_exponent(const std::string& s) {
  if (s == "inf" || s == "infinity") return Exponent::infinity();
  try {
    std::size_t used = 0;
    const double p = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return Exponent{p};
  } catch (const std::exception&) {
    throw UsageError("exponent must be a number >= 1 or 'inf', got '" + s + "'");
  }
}

std::string exponent_str(Exponent e) {
  if (e.is_infinite()) return "inf";
  std::ostringstream ss;
  ss << e.value();
  return ss.str();
}

LemmaId parse_lemma(const std::string& s) {
  try {
    return parse_lemma_id(s);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("SEQBOUNDS_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used, 0);
    if (s[used] != '\0' || s[0] == '-') throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("SEQBOUNDS_SEED must be an unsigned integer, got '") + s + "'");
  }
}

/// Explicit --seed wins, then SEQBOUNDS_SEED, then the fallback.
std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t flag_value, std::uint64_t fallback) {
  if (flag->count() > 0) return flag_value;
  if (auto e = env_seed()) return *e;
  return fallback;
}

void emit(std::ostream& out, bool as_json, const json& j) {
  if (as_json) {
    out << j.dump(2) << '\n';
    return;
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    out << it.key() << ": ";
    if (it->is_string()) out << it->get<std::string>();
    else out << it->dump();
    out << '\n';
  }
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  bool json_out = false;
};

// ---------------------------------------------------------------------------

struct NormsArgs {
  std::string matrix;
  std::string q, p;
};

void run_norms(Context& ctx, const NormsArgs& a) {
  const Matrix w = parse_matrix(a.matrix);
  json j = {{"rows", w.rows()},
            {"cols", w.cols()},
            {"l1_inf", matrix_norm(w, NormKind::qp(Exponent{1.0}, Exponent::infinity()))},
            {"l2_1", matrix_norm(w, NormKind::qp(Exponent{2.0}, Exponent{1.0}))},
            {"l1_1", matrix_norm(w, NormKind::qp(Exponent{1.0}, Exponent{1.0}))},
            {"frobenius", matrix_norm(w, NormKind::frobenius())},
            {"operator2", matrix_norm(w, NormKind::operator2())}};
  if (!a.q.empty() || !a.p.empty()) {
    if (a.q.empty() || a.p.empty()) throw UsageError("--q and --p must be given together");
    const Exponent q = parse_exponent(a.q), p = parse_exponent(a.p);
    j["q"] = exponent_str(q);
    j["p"] = exponent_str(p);
    j["qp"] = matrix_norm(w, NormKind::qp(q, p));
  }
  emit(ctx.out, ctx.json_out, j);
}

struct CoverArgs {
  std::string lemma = "L3";
  std::size_t d = 2, k = 2;
  double bw = 1.0, bx = 1.0, eps = 0.5;
  std::string out_path;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

json cover_summary(const CoverArgs& a, LemmaId lemma, const Cover& cover) {
  const double c = covering_constant(lemma, a.d, a.k, a.bw, a.bx).value;
  return {{"lemma", to_string(lemma)},
          {"d", a.d},
          {"k", a.k},
          {"epsilon", a.eps},
          {"sparsity", maurey_sparsity(a.bw, a.bx, a.eps)},
          {"points", cover.points.size()},
          {"log_size", cover.log_size()},
          {"log_size_bound", c / (a.eps * a.eps)}};
}

void run_cover_build(Context& ctx, const CoverArgs& a) {
  const LemmaId lemma = parse_lemma(a.lemma);
  const Cover cover = build_cover(lemma, a.d, a.k, a.bw, a.bx, a.eps);
  json j = cover_summary(a, lemma, cover);
  if (!a.out_path.empty()) {
    json pts = json::array();
    for (const auto& p : cover.points) pts.push_back(matrix_json(p));
    write_text(a.out_path, json{{"summary", j}, {"points", std::move(pts)}}.dump());
    j["written"] = a.out_path;
  }
  emit(ctx.out, ctx.json_out, j);
}

void run_cover_verify(Context& ctx, const CoverArgs& a) {
  const LemmaId lemma = parse_lemma(a.lemma);
  if (a.samples == 0) throw UsageError("--samples must be positive");
  const std::uint64_t seed = resolve_seed(a.seed_opt, a.seed, 0);
  const Cover cover = build_cover(lemma, a.d, a.k, a.bw, a.bx, a.eps);
  std::vector<Matrix> samples;
  samples.reserve(a.samples);
  for (std::size_t i = 0; i < a.samples; ++i)
    samples.push_back(random_budget_matrix(lemma, a.d, a.k, a.bw, derive_seed(seed, {i})));
  const auto v = verify_cover(cover, samples, a.eps);
  json j = cover_summary(a, lemma, cover);
  j["samples"] = a.samples;
  j["seed"] = seed;
  j["max_deviation"] = v.max_deviation;
  j["worst_sample"] = v.worst_sample;
  j["certified"] = v.certified;
  emit(ctx.out, ctx.json_out, j);
}

struct BoundArgs {
  std::string lemma = "L3";
  std::size_t d = 1, k = 1;
  double bw = 1.0, bx = 1.0;
  double eps = 0.0;
  std::size_t m = 0;
  double delta = 0.05, c = 1.0, c_loss = 1.0;
  double bwc = 1.0, bwv = 1.0, bqk = 1.0, l_sigma = 1.0;
  std::size_t heads = 1;
};

void run_bound(Context& ctx, const BoundArgs& a) {
  const LemmaId lemma = parse_lemma(a.lemma);
  const auto cc = covering_constant(lemma, a.d, a.k, a.bw, a.bx);
  json j = {{"lemma", to_string(lemma)}, {"d", a.d}, {"k", a.k}, {"C", cc.value}, {"approximate", cc.approximate}};
  if (a.eps > 0.0) j["log_cover_bound"] = cc.value / (a.eps * a.eps);
  if (a.m > 0) {
    NormBudget b;
    b.b_x = a.bx;
    b.b_w = a.bw;
    b.b_wc = a.bwc;
    b.b_wv = a.bwv;
    b.b_qk = a.bqk;
    b.l_sigma = a.l_sigma;
    const double c_qk = covering_constant(lemma, a.d, a.d, a.bqk, 1.0).value;
    const double rad = multihead_scale(theorem1_rad_bound(b, c_qk, a.m, a.d, a.c), a.heads);
    j["m"] = a.m;
    j["C_qk"] = c_qk;
    j["rad_bound"] = rad;
    j["gen_gap_bound"] = gen_gap_bound(rad, a.c_loss, a.delta, a.m);
  }
  emit(ctx.out, ctx.json_out, j);
}

struct AllocateArgs {
  std::string c, beta;
  double eps = 1.0;
};

void run_allocate(Context& ctx, const AllocateArgs& a) {
  const auto c = parse_list(a.c, "--C");
  const auto beta = parse_list(a.beta, "--beta");
  const auto r = allocate_epsilons(c, beta, a.eps);
  emit(ctx.out, ctx.json_out, {{"eps", r.eps}, {"gamma", r.gamma}, {"min_value", r.min_value}});
}

struct MultilayerArgs {
  std::size_t layers = 1;
  double all = 1.0;
  std::optional<double> bx, bw, bc2, bv2, bqk2, l_sigma;
  double c1 = 1.0, cbx = 1.0;
};

void run_multilayer(Context& ctx, const MultilayerArgs& a) {
  NormBudget b = NormBudget::uniform(a.all);
  if (a.bx) b.b_x = *a.bx;
  if (a.bw) b.b_w = *a.bw;
  if (a.bc2) b.b_c2 = *a.bc2;
  if (a.bv2) b.b_v2 = *a.bv2;
  if (a.bqk2) b.b_qk2 = *a.bqk2;
  if (a.l_sigma) b.l_sigma = *a.l_sigma;
  const auto r = theorem2_constant(a.layers, b, a.c1, a.cbx);
  emit(ctx.out, ctx.json_out,
       {{"L", a.layers}, {"alpha", r.alpha}, {"tau", r.tau}, {"gamma", r.gamma}, {"eta", r.eta},
        {"C_total", r.c_total}});
}

struct RadArgs {
  std::string table;
  std::size_t seq_len = 8, d = 4, k = 4, heads = 1, m = 32;
  std::string lemma = "L3";
  double bx = 1.0, bw = 1.0, bwc = 1.0, bwv = 1.0, bqk = 1.0;
  std::string activation = "relu";
  std::size_t n_sigma = 64, threads = 1;
  AscentOptions ascent;
  bool exact = false;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

void run_estimate_rad(Context& ctx, const RadArgs& a) {
  const std::uint64_t seed = resolve_seed(a.seed_opt, a.seed, 0);
  ClassSpec spec;
  std::vector<Matrix> data;
  json j;
  if (!a.table.empty()) {
    const Matrix table = parse_matrix(a.table);
    spec.kind = FiniteClass{table};
    j["kind"] = "finite";
    j["hypotheses"] = table.rows();
    j["m"] = table.cols();
    if (a.exact) j["exact"] = exact_rademacher_finite(table);
  } else {
    if (a.exact) throw UsageError("--exact applies only to --table");
    TransformerClass cls;
    cls.config.seq_len = a.seq_len;
    cls.config.d = a.d;
    cls.config.k = a.k;
    cls.config.heads = a.heads;
    try {
      cls.config.activation = parse_activation(a.activation);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    cls.qk_lemma = parse_lemma(a.lemma);
    cls.budget.b_x = a.bx;
    cls.budget.b_w = a.bw;
    cls.budget.b_wc = a.bwc;
    cls.budget.b_wv = a.bwv;
    cls.budget.b_qk = a.bqk;
    data = random_sphere_inputs(a.m, a.seq_len, a.d, a.bx, derive_seed(seed, {0xda7a}));
    spec.kind = cls;
    j["kind"] = "transformer";
    j["T"] = a.seq_len;
    j["m"] = a.m;
  }
  const auto est = empirical_rademacher(spec, data, a.n_sigma, seed, a.ascent, a.threads);
  j["n_sigma"] = a.n_sigma;
  j["seed"] = seed;
  j["estimate"] = est.estimate;
  j["standard_error"] = est.standard_error;
  emit(ctx.out, ctx.json_out, j);
}

struct TrainArgs {
  SparseMajorityConfig data;
  ModelConfig model;
  TrainHyper hyper;
  std::string activation = "relu", optimizer = "adam";
  bool block = false, quiet = false;
  std::string out_path;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

void run_train(Context& ctx, TrainArgs a) {
  const std::uint64_t seed = resolve_seed(a.seed_opt, a.seed, 0);
  try {
    a.model.activation = parse_activation(a.activation);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.optimizer == "adam") a.hyper.optimizer = OptimizerKind::kAdam;
  else if (a.optimizer == "sgd") a.hyper.optimizer = OptimizerKind::kSgd;
  else throw UsageError("--optimizer must be 'adam' or 'sgd'");
  a.model.form = a.block ? LayerForm::kBlock : LayerForm::kAuto;
  a.model.seq_len = a.data.seq_len;
  a.model.d = a.data.d;
  a.data.seed = derive_seed(seed, {1});
  a.model.seed = derive_seed(seed, {2});

  const auto data = gen_sparse_majority(a.data);
  const auto result = train(a.model, data.train, data.val, a.hyper, [&](std::size_t e, const EpochMetrics& m) {
    if (!a.quiet)
      ctx.err << "epoch " << e << " train_ce " << m.train_loss << " train_acc " << m.train_accuracy
              << " val_ce " << m.val_loss << " val_acc " << m.val_accuracy << '\n';
  });
  json j = {{"seed", seed}, {"epochs", a.hyper.epochs}, {"best_epoch", result.best_epoch},
            {"index_set", data.index_set}};
  const auto tr = evaluate(result.best_params, a.model, data.train);
  const auto va = evaluate(result.best_params, a.model, data.val);
  j["train_ce"] = tr.loss;
  j["train_accuracy"] = tr.accuracy;
  j["val_ce"] = va.loss;
  j["val_accuracy"] = va.accuracy;
  j["gen_gap"] = va.loss - tr.loss;
  j["total_weight_l1"] = total_weight_l1(result.best_params);
  if (!a.out_path.empty()) {
    write_text(a.out_path, params_to_json(a.model, result.best_params));
    j["written"] = a.out_path;
  }
  emit(ctx.out, ctx.json_out, j);
}

struct SweepArgs {
  std::string config_path, out_dir = "sweep_out";
  bool full_scale = false, quiet = false;
  std::optional<std::size_t> threads, epochs;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

void run_sweep_verb(Context& ctx, const SweepArgs& a) {
  SweepConfig cfg = a.full_scale ? SweepConfig::full_scale() : SweepConfig{};
  if (!a.config_path.empty()) {
    try {
      cfg = sweep_config_from_json(read_text(a.config_path));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (a.full_scale) throw UsageError("--full-scale conflicts with --config (set full_scale in the file)");
  }
  if (a.seed_opt->count() > 0) cfg.master_seed = a.seed;
  else if (auto e = env_seed()) cfg.master_seed = *e;
  if (a.threads) cfg.threads = *a.threads;
  if (a.epochs) cfg.hyper.epochs = *a.epochs;
  const auto records = run_sweep(cfg, [&](const ExperimentRecord& r) {
    if (!a.quiet)
      ctx.err << "T=" << r.seq_len << " rep=" << r.rep << " best_epoch=" << r.best_epoch
              << " val_acc=" << r.val_accuracy << " gen_gap=" << r.gen_gap << '\n';
  });
  const auto paths = emit_report(records, a.out_dir);
  json files = json::array();
  for (const auto& p : paths) files.push_back(p.string());
  emit(ctx.out, ctx.json_out, {{"records", records.size()}, {"seed", cfg.master_seed}, {"files", files}});
}

struct ReportArgs {
  std::string records_path, out_dir = "report_out";
};

void run_report(Context& ctx, const ReportArgs& a) {
  std::vector<ExperimentRecord> records;
  try {
    records = records_from_csv(read_text(a.records_path));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto paths = emit_report(records, a.out_dir);
  auto series = [&](RecordField f) {
    json arr = json::array();
    for (const auto& p : per_t_max(records, f)) arr.push_back({{"T", p.x}, {"max", p.y}});
    return arr;
  };
  json files = json::array();
  for (const auto& p : paths) files.push_back(p.string());
  emit(ctx.out, ctx.json_out,
       {{"records", records.size()},
        {"max_gen_gap", series(RecordField::kGenGap)},
        {"max_total_weight_l1", series(RecordField::kTotalWeightL1)},
        {"max_val_accuracy", series(RecordField::kValAccuracy)},
        {"files", files}});
}

std::string usage_text() {
  std::string s =
      "usage: seqbounds <verb> [options] [--json]\n\n"
      "verbs:\n"
      "  norms         matrix norms of --matrix '[[..],[..]]'\n"
      "  cover-build   construct a covering set of linear maps\n"
      "  cover-verify  check a covering set against random budget matrices\n"
      "  bound         covering constants and Rademacher / generalization bounds\n"
      "  allocate      optimal per-layer epsilon allocation\n"
      "  multilayer    multi-layer covering constant\n"
      "  estimate-rad  empirical Rademacher complexity\n"
      "  train         train a transformer on sparse-majority data\n"
      "  sweep         sequence-length sweep with CSV and SVG report\n"
      "  report        regenerate charts from records.csv\n\n"
      "Run 'seqbounds <verb> --help' for verb options.\n"
      "Exit status: 0 success, 1 usage error, 2 computation error.\n"
      "SEQBOUNDS_SEED overrides default and config-file seeds.\n";
  return s;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty()) {
    err << usage_text();
    return kExitUsage;
  }
  if (args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    out << usage_text();
    return kExitOk;
  }

  Context ctx{out, err};
  CLI::App app{"seqbounds", "seqbounds"};
  app.require_subcommand(1);
  auto add_json = [&](CLI::App* sub) { sub->add_flag("--json", ctx.json_out, "Print JSON on stdout"); };

  NormsArgs norms;
  auto* s_norms = app.add_subcommand("norms", "Matrix norms");
  s_norms->add_option("--matrix", norms.matrix, "JSON array of rows")->required();
  s_norms->add_option("--q", norms.q, "Column exponent (number or inf)");
  s_norms->add_option("--p", norms.p, "Outer exponent (number or inf)");

  CoverArgs cover;
  auto* s_build = app.add_subcommand("cover-build", "Construct a covering set");
  auto* s_verify = app.add_subcommand("cover-verify", "Verify a covering set");
  for (auto* s : {s_build, s_verify}) {
    s->add_option("--lemma", cover.lemma, "L3 | L4 | L5");
    s->add_option("--d", cover.d)->check(CLI::PositiveNumber);
    s->add_option("--k", cover.k)->check(CLI::PositiveNumber);
    s->add_option("--bw", cover.bw);
    s->add_option("--bx", cover.bx);
    s->add_option("--eps", cover.eps);
  }
  s_build->add_option("--out", cover.out_path, "Write the cover points as JSON");
  s_verify->add_option("--samples", cover.samples);
  cover.seed_opt = s_verify->add_option("--seed", cover.seed);

  BoundArgs bound;
  auto* s_bound = app.add_subcommand("bound", "Covering constants and bounds");
  s_bound->add_option("--lemma", bound.lemma);
  s_bound->add_option("--d", bound.d)->check(CLI::PositiveNumber);
  s_bound->add_option("--k", bound.k)->check(CLI::PositiveNumber);
  s_bound->add_option("--bw", bound.bw);
  s_bound->add_option("--bx", bound.bx);
  s_bound->add_option("--eps", bound.eps, "Also report C / eps^2");
  s_bound->add_option("--m", bound.m, "Sample count; enables the Rademacher bound");
  s_bound->add_option("--delta", bound.delta);
  s_bound->add_option("--c", bound.c, "Dudley constant");
  s_bound->add_option("--closs", bound.c_loss, "Loss bound");
  s_bound->add_option("--bwc", bound.bwc);
  s_bound->add_option("--bwv", bound.bwv);
  s_bound->add_option("--bqk", bound.bqk);
  s_bound->add_option("--lsigma", bound.l_sigma);
  s_bound->add_option("--heads", bound.heads);

  AllocateArgs alloc;
  auto* s_alloc = app.add_subcommand("allocate", "Epsilon allocation");
  s_alloc->add_option("--C", alloc.c, "Comma-separated constants")->required();
  s_alloc->add_option("--beta", alloc.beta, "Comma-separated weights")->required();
  s_alloc->add_option("--eps", alloc.eps);

  MultilayerArgs ml;
  auto* s_ml = app.add_subcommand("multilayer", "Multi-layer covering constant");
  s_ml->add_option("--L", ml.layers)->check(CLI::PositiveNumber);
  s_ml->add_option("--budget", ml.all, "Value for every budget entry");
  s_ml->add_option("--bx", ml.bx);
  s_ml->add_option("--bw", ml.bw);
  s_ml->add_option("--bc2", ml.bc2);
  s_ml->add_option("--bv2", ml.bv2);
  s_ml->add_option("--bqk2", ml.bqk2);
  s_ml->add_option("--lsigma", ml.l_sigma);
  s_ml->add_option("--c1", ml.c1);
  s_ml->add_option("--cbx", ml.cbx);

  RadArgs rad;
  auto* s_rad = app.add_subcommand("estimate-rad", "Empirical Rademacher complexity");
  s_rad->add_option("--table", rad.table, "Finite class as a JSON array of value rows");
  s_rad->add_flag("--exact", rad.exact, "Also enumerate the exact value (finite, m <= 15)");
  s_rad->add_option("--T", rad.seq_len)->check(CLI::PositiveNumber);
  s_rad->add_option("--d", rad.d)->check(CLI::PositiveNumber);
  s_rad->add_option("--k", rad.k)->check(CLI::PositiveNumber);
  s_rad->add_option("--heads", rad.heads)->check(CLI::PositiveNumber);
  s_rad->add_option("--m", rad.m)->check(CLI::PositiveNumber);
  s_rad->add_option("--lemma", rad.lemma);
  s_rad->add_option("--activation", rad.activation);
  s_rad->add_option("--bx", rad.bx);
  s_rad->add_option("--bw", rad.bw);
  s_rad->add_option("--bwc", rad.bwc);
  s_rad->add_option("--bwv", rad.bwv);
  s_rad->add_option("--bqk", rad.bqk);
  s_rad->add_option("--n-sigma", rad.n_sigma);
  s_rad->add_option("--steps", rad.ascent.steps);
  s_rad->add_option("--restarts", rad.ascent.restarts);
  s_rad->add_option("--lr", rad.ascent.learning_rate);
  s_rad->add_option("--threads", rad.threads)->check(CLI::PositiveNumber);
  rad.seed_opt = s_rad->add_option("--seed", rad.seed);

  TrainArgs tr;
  tr.hyper.epochs = 200;
  auto* s_train = app.add_subcommand("train", "Train on sparse-majority data");
  s_train->add_option("--T", tr.data.seq_len);
  s_train->add_option("--index-set", tr.data.index_set_size);
  s_train->add_option("--n-train", tr.data.n_train);
  s_train->add_option("--n-val", tr.data.n_val);
  s_train->add_option("--d", tr.data.d);
  s_train->add_option("--k", tr.model.k)->check(CLI::PositiveNumber);
  s_train->add_option("--heads", tr.model.heads)->check(CLI::PositiveNumber);
  s_train->add_option("--layers", tr.model.layers)->check(CLI::PositiveNumber);
  s_train->add_option("--activation", tr.activation);
  s_train->add_flag("--block", tr.block, "Use the projected block form even for one layer");
  s_train->add_option("--epochs", tr.hyper.epochs);
  s_train->add_option("--batch", tr.hyper.batch_size);
  s_train->add_option("--lr", tr.hyper.learning_rate);
  s_train->add_option("--optimizer", tr.optimizer);
  s_train->add_option("--out", tr.out_path, "Write best weights as JSON");
  s_train->add_flag("--quiet", tr.quiet, "Suppress per-epoch logs");
  tr.seed_opt = s_train->add_option("--seed", tr.seed);

  SweepArgs sw;
  auto* s_sweep = app.add_subcommand("sweep", "Sequence-length sweep");
  s_sweep->add_option("--config", sw.config_path, "Sweep JSON file");
  s_sweep->add_option("--out", sw.out_dir, "Output directory");
  s_sweep->add_flag("--full-scale", sw.full_scale, "Use the large-scale settings");
  s_sweep->add_option("--threads", sw.threads);
  s_sweep->add_option("--epochs", sw.epochs);
  s_sweep->add_flag("--quiet", sw.quiet);
  sw.seed_opt = s_sweep->add_option("--seed", sw.seed);

  ReportArgs rep;
  auto* s_report = app.add_subcommand("report", "Charts from records.csv");
  s_report->add_option("--records", rep.records_path)->required();
  s_report->add_option("--out", rep.out_dir);

  for (auto* s : app.get_subcommands({})) add_json(s);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      const bool verb_help = std::any_of(std::begin(kVerbs), std::end(kVerbs), [&](const char* v) { return args[0] == v; });
      out << (verb_help ? app.get_subcommand(args[0])->help() : usage_text());
      return kExitOk;
    }
    const bool known = std::any_of(std::begin(kVerbs), std::end(kVerbs), [&](const char* v) { return args[0] == v; });
    if (!known) err << "unknown verb '" << args[0] << "'\n" << usage_text();
    else err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (s_norms->parsed()) run_norms(ctx, norms);
    else if (s_build->parsed()) run_cover_build(ctx, cover);
    else if (s_verify->parsed()) run_cover_verify(ctx, cover);
    else if (s_bound->parsed()) run_bound(ctx, bound);
    else if (s_alloc->parsed()) run_allocate(ctx, alloc);
    else if (s_ml->parsed()) run_multilayer(ctx, ml);
    else if (s_rad->parsed()) run_estimate_rad(ctx, rad);
    else if (s_train->parsed()) run_train(ctx, tr);
    else if (s_sweep->parsed()) run_sweep_verb(ctx, sw);
    else if (s_report->parsed()) run_report(ctx, rep);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCompute;
  }
  return kExitOk;
}

}  // namespace seqbounds::cli
