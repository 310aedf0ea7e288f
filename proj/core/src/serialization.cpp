#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "seqbounds/transformer.hpp"

namespace seqbounds {

namespace {

using nlohmann::json;

std::string hex_float(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double parse_hex_float(const std::string& s) {
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw std::invalid_argument("bad hex-float '" + s + "'");
  return x;
}

json matrix_to_json(const Matrix& m) {
  json data = json::array();
  for (double x : m.data()) data.push_back(hex_float(x));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  std::vector<double> data;
  for (const auto& e : j.at("data")) data.push_back(parse_hex_float(e.get<std::string>()));
  return Matrix(rows, cols, std::move(data));
}

}  // namespace

std::string params_to_json(const ModelConfig& config, const TransformerParams& params) {
  params.check_shapes(config);
  json cfg = {{"T", config.seq_len},
              {"d", config.d},
              {"k", config.k},
              {"H", config.heads},
              {"L", config.layers},
              {"activation", to_string(config.activation)},
              {"form", config.form == LayerForm::kBlock ? "block" : "auto"},
              {"seed", config.seed}};
  json layers = json::array();
  for (const auto& layer : params.layers) {
    json heads = json::array();
    for (const auto& h : layer.heads) {
      heads.push_back({{"W_QK", matrix_to_json(h.w_qk)},
                       {"W_v", matrix_to_json(h.w_v)},
                       {"W_c", matrix_to_json(h.w_c)}});
    }
    layers.push_back({{"heads", std::move(heads)}});
  }
  json w = json::array();
  for (double x : params.readout) w.push_back(hex_float(x));
  json doc = {{"config", std::move(cfg)}, {"layers", std::move(layers)}, {"w", std::move(w)}};
  return doc.dump(2);
}

void params_from_json(const std::string& text, ModelConfig& config, TransformerParams& params) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("weights file: ") + e.what());
  }
  try {
    const auto& cfg = doc.at("config");
    ModelConfig c;
    c.seq_len = cfg.at("T").get<std::size_t>();
    c.d = cfg.at("d").get<std::size_t>();
    c.k = cfg.at("k").get<std::size_t>();
    c.heads = cfg.at("H").get<std::size_t>();
    c.layers = cfg.at("L").get<std::size_t>();
    c.activation = parse_activation(cfg.value("activation", "relu"));
    c.form = cfg.value("form", "auto") == "block" ? LayerForm::kBlock : LayerForm::kAuto;
    c.seed = cfg.value("seed", std::uint64_t{0});
    c.validate();

    TransformerParams p;
    for (const auto& lj : doc.at("layers")) {
      LayerParams layer;
      for (const auto& hj : lj.at("heads")) {
        layer.heads.push_back({matrix_from_json(hj.at("W_QK")), matrix_from_json(hj.at("W_v")),
                               matrix_from_json(hj.at("W_c"))});
      }
      p.layers.push_back(std::move(layer));
    }
    for (const auto& e : doc.at("w")) p.readout.push_back(parse_hex_float(e.get<std::string>()));
    p.check_shapes(c);
    config = c;
    params = std::move(p);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("weights file: ") + e.what());
  }
}

}  // namespace seqbounds
