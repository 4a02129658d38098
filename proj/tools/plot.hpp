#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fplab/trace.hpp"

namespace fplab::cli {

enum class PlotKind { kDeltaF, kLoss, kParamStats, kSpectrum };

std::optional<PlotKind> parse_plot_kind(const std::string& name);
const char* plot_kind_name(PlotKind kind);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<Series> series;  // legend order
};

/// Series for one plot kind. delta_f: one series per delta_f_k<index> column,
/// ascending index. loss: train_loss and test_loss. param_stats: the four
/// mean/std columns. spectrum: magnitude against index of a spectrum CSV.
/// Throws ParseError when the table has no rows or lacks the needed columns.
PlotSpec plot_spec(const CsvTable& table, PlotKind kind);

/// Static SVG: frame, axis ticks, one polyline per series, legend. Points
/// that cannot be drawn (NaN, or <= 0 on a log axis) are skipped.
std::string render_svg(const PlotSpec& spec);

/// Reads a CSV, renders it and writes the SVG.
void plot_trace(const std::filesystem::path& csv, PlotKind kind, const std::filesystem::path& svg);

}  // namespace fplab::cli
