#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fplab/network.hpp"

namespace fplab {

/// Numeric CSV with optional leading '#' comment lines and one header row.
/// Empty cells and "nan" read back as NaN.
struct CsvTable {
  std::vector<std::string> comments;  // without the leading '#'
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::optional<std::size_t> find_column(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;  // throws InvalidArgument if absent
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);
void write_csv(std::ostream& out, const CsvTable& table);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// One observation of the training state.
struct TraceRecord {
  long epoch = 0;
  double train_loss = 0.0;
  std::optional<double> test_loss;
  std::optional<double> train_accuracy;
  std::optional<double> test_accuracy;
  std::optional<ParamStats> stats;
  std::vector<double> spectral_norms;     // per layer
  std::map<std::size_t, double> delta_f;  // frequency index -> relative spectral error
};

struct TrainTrace {
  std::vector<TraceRecord> records;

  bool empty() const noexcept { return records.empty(); }
  std::size_t size() const noexcept { return records.size(); }

  // Peak indices present in any record, ascending.
  std::vector<std::size_t> peaks() const;
  // Delta_F series of one peak (NaN where a record lacks it).
  std::vector<double> delta_f_series(std::size_t peak) const;
  std::vector<long> epochs() const;
};

/// Columns: epoch, train_loss, then whichever of test_loss, train_accuracy,
/// test_accuracy, mean_abs_weight, std_abs_weight, mean_abs_bias,
/// std_abs_bias, spectral_norm_l<i>, delta_f_k<index> any record carries.
/// Each comment string is written as its own "# ..." line before the header.
CsvTable trace_to_table(const TrainTrace& trace, std::vector<std::string> comments = {});
TrainTrace trace_from_table(const CsvTable& table);

void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace,
                     std::vector<std::string> comments = {});
TrainTrace read_trace_csv(const std::filesystem::path& path);

}  // namespace fplab
