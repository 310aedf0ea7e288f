#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "seqbounds/experiments.hpp"

namespace seqbounds {

namespace {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_short(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty())
    throw std::invalid_argument("records csv line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    if (!s.empty() && s[0] != '-') v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty())
    throw std::invalid_argument("records csv line " + std::to_string(line) + ": bad integer '" + s + "'");
  return v;
}

double field_value(const ExperimentRecord& r, RecordField f) {
  switch (f) {
    case RecordField::kGenGap: return r.gen_gap;
    case RecordField::kTotalWeightL1: return r.total_weight_l1;
    case RecordField::kValAccuracy: return r.val_accuracy;
  }
  return 0.0;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

std::string records_to_csv(std::span<const ExperimentRecord> records) {
  std::string out = kRecordsHeader;
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.seq_len) + ',' + std::to_string(r.rep) + ',' + std::to_string(r.best_epoch) + ',' +
           fmt17(r.val_accuracy) + ',' + fmt17(r.gen_gap) + ',' + fmt17(r.gen_gap_abs) + ',' +
           fmt17(r.total_weight_l1) + ',' + fmt17(r.train_ce) + ',' + fmt17(r.val_ce) + ',' +
           std::to_string(r.seed) + '\n';
  }
  return out;
}

std::vector<ExperimentRecord> records_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("records csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecordsHeader) throw std::invalid_argument("records csv: unexpected header");
  std::vector<ExperimentRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (cols.size() != 10)
      throw std::invalid_argument("records csv line " + std::to_string(line_no) + ": expected 10 columns");
    ExperimentRecord r;
    r.seq_len = parse_uint(cols[0], line_no);
    r.rep = parse_uint(cols[1], line_no);
    r.best_epoch = parse_uint(cols[2], line_no);
    r.val_accuracy = parse_double(cols[3], line_no);
    r.gen_gap = parse_double(cols[4], line_no);
    r.gen_gap_abs = parse_double(cols[5], line_no);
    r.total_weight_l1 = parse_double(cols[6], line_no);
    r.train_ce = parse_double(cols[7], line_no);
    r.val_ce = parse_double(cols[8], line_no);
    r.seed = parse_uint(cols[9], line_no);
    out.push_back(r);
  }
  return out;
}

std::vector<SeriesPoint> per_t_max(std::span<const ExperimentRecord> records, RecordField field) {
  std::map<std::size_t, double> best;
  for (const auto& r : records) {
    const double v = field_value(r, field);
    auto [it, inserted] = best.try_emplace(r.seq_len, v);
    if (!inserted) it->second = std::max(it->second, v);
  }
  std::vector<SeriesPoint> out;
  for (const auto& [t, v] : best) out.push_back({static_cast<double>(t), v});
  return out;
}

std::string line_chart_svg(std::span<const SeriesPoint> points, const std::string& title,
                           const std::string& x_label, const std::string& y_label) {
  constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!points.empty()) {
    x0 = x1 = points[0].x;
    y0 = y1 = points[0].y;
    for (const auto& p : points) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
  }
  if (x1 - x0 <= 0) { x0 -= 1; x1 += 1; }
  if (y1 - y0 <= 0) { y0 -= 1; y1 += 1; }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); };
  auto sy = [&](double y) { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n"
    << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "  <text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
    << xml_escape(title) << "</text>\n"
    << "  <line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight << "\" y2=\""
    << kH - kBottom << "\" stroke=\"black\"/>\n"
    << "  <line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kH - kBottom
    << "\" stroke=\"black\"/>\n"
    << "  <text x=\"" << kW / 2 << "\" y=\"" << kH - 10
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(x_label)
    << "</text>\n"
    << "  <text x=\"16\" y=\"" << kH / 2 << "\" transform=\"rotate(-90 16 " << kH / 2
    << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(y_label)
    << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = y0 + (y1 - y0) * i / 4.0;
    o << "  <text x=\"" << kLeft - 6 << "\" y=\"" << sy(y) + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << fmt_short(y) << "</text>\n";
  }
  if (!points.empty()) {
    o << "  <polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < points.size(); ++i)
      o << (i ? " " : "") << sx(points[i].x) << ',' << sy(points[i].y);
    o << "\"/>\n";
  }
  for (const auto& p : points) {
    o << "  <circle class=\"point\" cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.y)
      << "\" r=\"4\" fill=\"steelblue\"/>\n"
      << "  <text x=\"" << sx(p.x) << "\" y=\"" << kH - kBottom + 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << fmt_short(p.x)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<std::filesystem::path> emit_report(std::span<const ExperimentRecord> records,
                                               const std::filesystem::path& out_dir) {
  if (records.empty()) throw std::invalid_argument("emit_report: no records");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> paths;
  paths.push_back(out_dir / "records.csv");
  write_file(paths.back(), records_to_csv(records));

  struct Chart {
    RecordField field;
    const char* file;
    const char* title;
    const char* y_label;
  };
  const Chart charts[] = {
      {RecordField::kGenGap, "max_gen_gap.svg", "Max generalization gap per sequence length", "max gen_gap"},
      {RecordField::kTotalWeightL1, "max_weight_l1.svg", "Max total weight l1 norm per sequence length",
       "max total_weight_l1"},
      {RecordField::kValAccuracy, "max_val_accuracy.svg", "Max validation accuracy per sequence length",
       "max val_accuracy"},
  };
  for (const auto& c : charts) {
    const auto series = per_t_max(records, c.field);
    paths.push_back(out_dir / c.file);
    write_file(paths.back(), line_chart_svg(series, c.title, "sequence length T", c.y_label));
  }
  return paths;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("spearman: need two equal series of length >= 2");
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0 || sbb == 0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace seqbounds
