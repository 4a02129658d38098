#include "fplab/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <string_view>

#include "fplab/error.hpp"

namespace fplab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_cell(std::string_view cell, std::size_t offset) {
  cell = trim(cell);
  if (cell.empty()) return kNaN;
  double v = 0.0;
  const auto* first = cell.data();
  // from_chars does not accept a leading '+'.
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError("csv: cannot parse '" + std::string(cell) + "' as a number", offset);
  }
  return v;
}

}  // namespace

std::optional<std::size_t> CsvTable::find_column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const auto idx = find_column(name);
  if (!idx) throw InvalidArgument("csv: no column named '" + name + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[*idx]);
  return out;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t offset = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      view.remove_prefix(1);
      if (!view.empty() && view.front() == ' ') view.remove_prefix(1);
      table.comments.emplace_back(view);
      continue;
    }
    const auto cells = split_commas(view);
    if (!have_header) {
      for (auto c : cells) table.header.emplace_back(trim(c));
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ParseError("csv: row has " + std::to_string(cells.size()) + " cells, header has " +
                           std::to_string(table.header.size()),
                       line_offset);
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto c : cells) row.push_back(parse_cell(c, line_offset));
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError("csv: missing header row", offset);
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_csv(in);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const CsvTable& table) {
  for (const auto& c : table.comments) out << "# " << c << '\n';
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
}

std::vector<std::size_t> TrainTrace::peaks() const {
  std::set<std::size_t> s;
  for (const auto& r : records) {
    for (const auto& [k, v] : r.delta_f) s.insert(k);
  }
  return {s.begin(), s.end()};
}

std::vector<double> TrainTrace::delta_f_series(std::size_t peak) const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const auto it = r.delta_f.find(peak);
    out.push_back(it == r.delta_f.end() ? kNaN : it->second);
  }
  return out;
}

std::vector<long> TrainTrace::epochs() const {
  std::vector<long> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.epoch);
  return out;
}

CsvTable trace_to_table(const TrainTrace& trace, std::vector<std::string> comments) {
  bool test_loss = false, train_acc = false, test_acc = false, stats = false;
  std::size_t norms = 0;
  for (const auto& r : trace.records) {
    test_loss |= r.test_loss.has_value();
    train_acc |= r.train_accuracy.has_value();
    test_acc |= r.test_accuracy.has_value();
    stats |= r.stats.has_value();
    norms = std::max(norms, r.spectral_norms.size());
  }
  const auto peaks = trace.peaks();

  CsvTable t;
  t.comments = std::move(comments);
  t.header = {"epoch", "train_loss"};
  if (test_loss) t.header.push_back("test_loss");
  if (train_acc) t.header.push_back("train_accuracy");
  if (test_acc) t.header.push_back("test_accuracy");
  if (stats) {
    for (const char* n : {"mean_abs_weight", "std_abs_weight", "mean_abs_bias", "std_abs_bias"}) t.header.push_back(n);
  }
  for (std::size_t i = 0; i < norms; ++i) t.header.push_back("spectral_norm_l" + std::to_string(i));
  for (std::size_t k : peaks) t.header.push_back("delta_f_k" + std::to_string(k));

  for (const auto& r : trace.records) {
    std::vector<double> row{static_cast<double>(r.epoch), r.train_loss};
    if (test_loss) row.push_back(r.test_loss.value_or(kNaN));
    if (train_acc) row.push_back(r.train_accuracy.value_or(kNaN));
    if (test_acc) row.push_back(r.test_accuracy.value_or(kNaN));
    if (stats) {
      const ParamStats s = r.stats.value_or(ParamStats{kNaN, kNaN, kNaN, kNaN});
      row.insert(row.end(), {s.mean_abs_weight, s.std_abs_weight, s.mean_abs_bias, s.std_abs_bias});
    }
    for (std::size_t i = 0; i < norms; ++i) row.push_back(i < r.spectral_norms.size() ? r.spectral_norms[i] : kNaN);
    for (std::size_t k : peaks) {
      const auto it = r.delta_f.find(k);
      row.push_back(it == r.delta_f.end() ? kNaN : it->second);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

TrainTrace trace_from_table(const CsvTable& table) {
  const auto epoch_col = table.find_column("epoch");
  const auto loss_col = table.find_column("train_loss");
  if (!epoch_col || !loss_col) throw ParseError("trace csv: needs 'epoch' and 'train_loss' columns", 0);

  auto opt_col = [&](const char* name) { return table.find_column(name); };
  const auto test_loss = opt_col("test_loss");
  const auto train_acc = opt_col("train_accuracy");
  const auto test_acc = opt_col("test_accuracy");
  const auto maw = opt_col("mean_abs_weight"), saw = opt_col("std_abs_weight");
  const auto mab = opt_col("mean_abs_bias"), sab = opt_col("std_abs_bias");

  std::vector<std::pair<std::size_t, std::size_t>> norm_cols, peak_cols;  // (index, column)
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const std::string& h = table.header[c];
    auto numeric_suffix = [&](std::string_view prefix) -> std::optional<std::size_t> {
      if (h.size() <= prefix.size() || h.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
      std::size_t v = 0;
      const auto [ptr, ec] = std::from_chars(h.data() + prefix.size(), h.data() + h.size(), v);
      if (ec != std::errc() || ptr != h.data() + h.size()) return std::nullopt;
      return v;
    };
    if (auto i = numeric_suffix("spectral_norm_l")) norm_cols.emplace_back(*i, c);
    if (auto k = numeric_suffix("delta_f_k")) peak_cols.emplace_back(*k, c);
  }
  std::ranges::sort(norm_cols);

  TrainTrace trace;
  for (const auto& row : table.rows) {
    TraceRecord r;
    r.epoch = static_cast<long>(row[*epoch_col]);
    r.train_loss = row[*loss_col];
    auto get = [&](const std::optional<std::size_t>& c) -> std::optional<double> {
      if (!c || std::isnan(row[*c])) return std::nullopt;
      return row[*c];
    };
    r.test_loss = get(test_loss);
    r.train_accuracy = get(train_acc);
    r.test_accuracy = get(test_acc);
    if (maw && saw && mab && sab) r.stats = ParamStats{row[*maw], row[*saw], row[*mab], row[*sab]};
    for (const auto& [i, c] : norm_cols) r.spectral_norms.push_back(row[c]);
    for (const auto& [k, c] : peak_cols) {
      if (!std::isnan(row[c])) r.delta_f[k] = row[c];
    }
    trace.records.push_back(std::move(r));
  }
  return trace;
}

void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace, std::vector<std::string> comments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_csv(out, trace_to_table(trace, std::move(comments)));
}

TrainTrace read_trace_csv(const std::filesystem::path& path) { return trace_from_table(read_csv_file(path)); }

}  // namespace fplab
