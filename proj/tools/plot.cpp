#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

#include "fplab/error.hpp"

namespace fplab::cli {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

bool drawable(double y, bool log_y) { return std::isfinite(y) && (!log_y || y > 0.0); }

Series column_series(const CsvTable& t, const std::string& x_col, const std::string& y_col, std::string name) {
  return Series{std::move(name), t.column(x_col), t.column(y_col)};
}

void require_columns(const CsvTable& t, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    if (!t.find_column(n)) throw ParseError(std::string("csv has no '") + n + "' column", 0);
  }
}

}  // namespace

std::optional<PlotKind> parse_plot_kind(const std::string& name) {
  for (auto k : {PlotKind::kDeltaF, PlotKind::kLoss, PlotKind::kParamStats, PlotKind::kSpectrum}) {
    if (name == plot_kind_name(k)) return k;
  }
  return std::nullopt;
}

const char* plot_kind_name(PlotKind kind) {
  switch (kind) {
    case PlotKind::kDeltaF:
      return "delta_f";
    case PlotKind::kLoss:
      return "loss";
    case PlotKind::kParamStats:
      return "param_stats";
    case PlotKind::kSpectrum:
      return "spectrum";
  }
  return "?";
}

PlotSpec plot_spec(const CsvTable& table, PlotKind kind) {
  if (table.rows.empty()) throw ParseError("csv has a header but no data rows", 0);
  PlotSpec spec;
  switch (kind) {
    case PlotKind::kDeltaF: {
      require_columns(table, {"epoch"});
      spec = {"relative spectral error at tracked peaks", "epoch", "Delta_F", true, {}};
      const TrainTrace trace = trace_from_table(table);
      const auto epochs = table.column("epoch");
      for (std::size_t k : trace.peaks()) {
        spec.series.push_back(Series{"k=" + std::to_string(k), epochs, trace.delta_f_series(k)});
      }
      if (spec.series.empty()) throw ParseError("csv has no delta_f_k<index> columns", 0);
      break;
    }
    case PlotKind::kLoss:
      require_columns(table, {"epoch", "train_loss"});
      spec = {"loss", "epoch", "loss", true, {}};
      spec.series.push_back(column_series(table, "epoch", "train_loss", "train"));
      if (table.find_column("test_loss")) spec.series.push_back(column_series(table, "epoch", "test_loss", "test"));
      break;
    case PlotKind::kParamStats:
      require_columns(table, {"epoch", "mean_abs_weight", "std_abs_weight", "mean_abs_bias", "std_abs_bias"});
      spec = {"parameter magnitudes", "epoch", "value", false, {}};
      for (const char* n : {"mean_abs_weight", "std_abs_weight", "mean_abs_bias", "std_abs_bias"}) {
        spec.series.push_back(column_series(table, "epoch", n, n));
      }
      break;
    case PlotKind::kSpectrum:
      require_columns(table, {"index", "magnitude"});
      spec = {"DFT magnitude", "frequency index", "|F|", false, {}};
      spec.series.push_back(column_series(table, "index", "magnitude", "magnitude"));
      break;
  }
  return spec;
}

std::string render_svg(const PlotSpec& spec) {
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : spec.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !drawable(s.y[i], spec.log_y)) continue;
      const double y = spec.log_y ? std::log10(s.y[i]) : s.y[i];
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (!std::isfinite(x_lo)) {
    x_lo = 0;
    x_hi = 1;
    y_lo = 0;
    y_hi = 1;
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(spec.title) << "</text>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << num(plot_w) << "\" height=\"" << num(plot_h)
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double fx = x_lo + (x_hi - x_lo) * i / kTicks;
    const double fy = y_lo + (y_hi - y_lo) * i / kTicks;
    o << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(kTop + plot_h + 18) << "\" text-anchor=\"middle\">"
      << tick_label(fx) << "</text>\n";
    o << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(fy) + 4) << "\" text-anchor=\"end\">"
      << tick_label(spec.log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  o << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 14) << "\" text-anchor=\"middle\">"
    << escape(spec.x_label) << "</text>\n";
  o << "<text x=\"18\" y=\"" << num(kTop + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << num(kTop + plot_h / 2) << ")\">" << escape(spec.y_label + (spec.log_y ? " (log)" : "")) << "</text>\n";

  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const Series& s = spec.series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !drawable(s.y[i], spec.log_y)) continue;
      const double y = spec.log_y ? std::log10(s.y[i]) : s.y[i];
      o << (first ? "" : " ") << num(px(s.x[i])) << ',' << num(py(y));
      first = false;
    }
    o << "\"/>\n";
  }

  o << "<g class=\"legend\">\n";
  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const double y = kTop + 14 + 18.0 * static_cast<double>(si);
    const double x = kLeft + plot_w + 14;
    o << "<line x1=\"" << num(x) << "\" y1=\"" << num(y - 4) << "\" x2=\"" << num(x + 20) << "\" y2=\"" << num(y - 4)
      << "\" stroke=\"" << kPalette[si % std::size(kPalette)] << "\" stroke-width=\"2\"/>";
    o << "<text x=\"" << num(x + 26) << "\" y=\"" << num(y) << "\">" << escape(spec.series[si].name) << "</text>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

void plot_trace(const std::filesystem::path& csv, PlotKind kind, const std::filesystem::path& svg) {
  const std::string text = render_svg(plot_spec(read_csv_file(csv), kind));
  std::ofstream out(svg, std::ios::binary);
  if (!out) throw IoError("cannot open " + svg.string() + " for writing");
  out << text;
}

}  // namespace fplab::cli
