#include "fplab/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

#include "fplab/error.hpp"
#include "fplab/spectral.hpp"
#include "fplab/trace.hpp"

namespace fplab {

namespace {

std::string read_all(std::istream& in) { return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()}; }

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_all(in);
}

void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Dataset grid_dataset(const Grid1d& grid, std::span<const double> targets, std::string provenance) {
  Dataset d;
  d.inputs = Matrix(grid.count, 1);
  d.targets = Matrix(grid.count, 1);
  for (std::size_t i = 0; i < grid.count; ++i) {
    d.inputs(i, 0) = grid.at(i);
    d.targets(i, 0) = targets[i];
  }
  d.grid = grid;
  d.provenance = std::move(provenance);
  return d;
}

Grid1d even_grid(std::size_t n, double lo, double hi) {
  if (n < 2) throw InvalidArgument("1-d target needs at least 2 samples, got " + std::to_string(n));
  if (!(lo < hi)) throw InvalidArgument("1-d target needs lo < hi");
  return Grid1d{lo, (hi - lo) / static_cast<double>(n - 1), n};
}

// Centered coordinate of index i among n positions, mapped onto [-1, 1].
double unit_coordinate(std::size_t i, std::size_t n) {
  if (n <= 1) return 0.0;
  return -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
}

std::uint32_t read_be32(const std::string& bytes, std::size_t offset, const std::string& what) {
  if (bytes.size() < offset + 4) throw ParseError(what + ": truncated header", bytes.size());
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<std::uint8_t>(bytes[offset + i]);
  return v;
}

void append_be32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

// PGM header tokenizer: skips whitespace and '#' comments.
class PgmHeader {
 public:
  explicit PgmHeader(const std::string& bytes) : bytes_(bytes) {}

  std::size_t position() const noexcept { return pos_; }
  std::size_t token_start() const noexcept { return token_start_; }

  void expect_magic() {
    if (bytes_.size() < 2 || bytes_[0] != 'P' || bytes_[1] != '5') throw ParseError("pgm: expected magic 'P5'", 0);
    pos_ = 2;
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) throw ParseError("pgm: expected whitespace after magic", pos_);
  }

  std::size_t read_uint(const char* name) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    token_start_ = start;
    std::size_t v = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      v = v * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (v > (std::size_t{1} << 32)) throw ParseError(std::string("pgm: ") + name + " is too large", start);
      ++pos_;
    }
    if (pos_ == start) throw ParseError(std::string("pgm: expected ") + name, start);
    return v;
  }

  // Exactly one whitespace byte separates maxval from the payload.
  void end_header() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) throw ParseError("pgm: expected whitespace after maxval", pos_);
    ++pos_;
  }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t token_start_ = 0;
  std::size_t pos_ = 0;
};

}  // namespace

Dataset make_1d_target(TargetKind kind, std::size_t n, double lo, double hi) {
  const Grid1d grid = even_grid(n, lo, hi);
  std::vector<double> y(n);
  std::string name;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.at(i);
    switch (kind) {
      case TargetKind::kLinear:
        y[i] = x;
        break;
      case TargetKind::kLowFrequency:
        y[i] = std::sin(x) + 0.5 * std::sin(3.0 * x) + 0.25 * std::sin(5.0 * x);
        break;
    }
  }
  name = kind == TargetKind::kLinear ? "linear" : "lowfreq";
  return grid_dataset(grid, y,
                      name + " n=" + std::to_string(n) + " lo=" + format_double(lo) + " hi=" + format_double(hi));
}

Dataset make_1d_target(std::span<const double> samples, double lo, double hi) {
  const Grid1d grid = even_grid(samples.size(), lo, hi);
  return grid_dataset(grid, samples,
                      "custom n=" + std::to_string(samples.size()) + " lo=" + format_double(lo) +
                          " hi=" + format_double(hi));
}

std::optional<Grid1d> detect_uniform_grid(const Matrix& inputs) {
  if (inputs.cols() != 1 || inputs.rows() < 2) return std::nullopt;
  const std::size_t n = inputs.rows();
  const double spacing = (inputs(n - 1, 0) - inputs(0, 0)) / static_cast<double>(n - 1);
  if (!(spacing > 0.0)) return std::nullopt;
  const double tol = 1e-9 * std::max(std::abs(spacing), std::max(std::abs(inputs(0, 0)), std::abs(inputs(n - 1, 0))));
  for (std::size_t i = 0; i < n; ++i) {
    const double expected = inputs(0, 0) + static_cast<double>(i) * spacing;
    if (std::abs(inputs(i, 0) - expected) > tol) return std::nullopt;
  }
  return Grid1d{inputs(0, 0), spacing, n};
}

Dataset make_flipped_target(const Dataset& base) {
  validate(base);
  if (base.input_dim() != 1 || base.target_dim() != 1) {
    throw InvalidArgument("make_flipped_target: needs 1-d inputs and targets");
  }
  const auto grid = base.grid ? base.grid : detect_uniform_grid(base.inputs);
  if (!grid) throw InvalidArgument("make_flipped_target: inputs are not on a uniform grid");

  const std::size_t n = base.size();
  const Spectrum f = dft(base.targets.values(), grid->spacing, grid->origin);
  Spectrum g = f;
  // Bins k with k < N - k; DC and (even N) Nyquist stay in place.
  const std::size_t m = (n + 1) / 2 - 1;
  for (std::size_t k = 1; k <= m; ++k) {
    g.coefficients[k] = f.coefficients[m + 1 - k];
    g.coefficients[n - k] = std::conj(g.coefficients[k]);
  }
  const auto y = inverse_dft_real(g);

  Dataset out = base;
  for (std::size_t i = 0; i < n; ++i) out.targets(i, 0) = y[i];
  out.grid = grid;
  out.provenance = "flipped(" + base.provenance + ")";
  return out;
}

GrayImage read_pgm(std::istream& in) {
  const std::string bytes = read_all(in);
  PgmHeader header(bytes);
  header.expect_magic();
  const std::size_t width = header.read_uint("width");
  const std::size_t width_start = header.token_start();
  const std::size_t height = header.read_uint("height");
  const std::size_t height_start = header.token_start();
  const std::size_t maxval = header.read_uint("maxval");
  const std::size_t maxval_start = header.token_start();
  if (width == 0) throw ParseError("pgm: width must be positive", width_start);
  if (height == 0) throw ParseError("pgm: height must be positive", height_start);
  if (maxval == 0 || maxval > 255) {
    throw ParseError("pgm: maxval " + std::to_string(maxval) + " outside 1..255", maxval_start);
  }
  header.end_header();

  const std::size_t payload = header.position();
  const std::size_t count = width * height;
  if (bytes.size() - payload < count) {
    throw ParseError("pgm: payload truncated, expected " + std::to_string(count) + " bytes", bytes.size());
  }
  GrayImage image{height, width, std::vector<std::uint8_t>(count)};
  for (std::size_t i = 0; i < count; ++i) {
    image.pixels[i] = static_cast<std::uint8_t>(bytes[payload + i]);
    if (image.pixels[i] > maxval) throw ParseError("pgm: sample exceeds maxval", payload + i);
  }
  return image;
}

GrayImage read_pgm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_pgm(in);
}

void write_pgm(std::ostream& out, const GrayImage& image) {
  if (image.pixels.size() != image.rows * image.cols) throw InvalidArgument("write_pgm: pixel count mismatch");
  out << "P5\n" << image.cols << ' ' << image.rows << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
}

void write_pgm_file(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_pgm(out, image);
}

std::vector<double> normalized_pixels(const GrayImage& image) {
  std::vector<double> v(image.pixels.begin(), image.pixels.end());
  if (v.empty()) return v;
  double mean = 0.0;
  for (double p : v) mean += p;
  mean /= static_cast<double>(v.size());
  double max_abs = 0.0;
  for (double& p : v) {
    p -= mean;
    max_abs = std::max(max_abs, std::abs(p));
  }
  for (double& p : v) p = max_abs == 0.0 ? 0.0 : p / max_abs;
  return v;
}

Dataset image_dataset(const GrayImage& image, std::string provenance) {
  const auto values = normalized_pixels(image);
  const std::size_t n = image.rows * image.cols;
  Dataset d;
  d.inputs = Matrix(n, 2);
  d.targets = Matrix(n, 1);
  d.image_rows = image.rows;
  d.image_cols = image.cols;
  d.row_index.reserve(n);
  d.column_index.reserve(n);
  for (std::size_t r = 0; r < image.rows; ++r) {
    for (std::size_t c = 0; c < image.cols; ++c) {
      const std::size_t i = r * image.cols + c;
      d.inputs(i, 0) = unit_coordinate(c, image.cols);
      d.inputs(i, 1) = unit_coordinate(r, image.rows);
      d.targets(i, 0) = values[i];
      d.row_index.push_back(r);
      d.column_index.push_back(c);
    }
  }
  d.provenance = std::move(provenance);
  return d;
}

Dataset image_row_dataset(const GrayImage& image, std::size_t row, std::string provenance) {
  if (row >= image.rows) {
    throw InvalidArgument("image row " + std::to_string(row) + " out of range (image has " +
                          std::to_string(image.rows) + " rows)");
  }
  const auto values = normalized_pixels(image);
  Dataset d;
  d.inputs = Matrix(image.cols, 1);
  d.targets = Matrix(image.cols, 1);
  d.image_rows = 1;
  d.image_cols = image.cols;
  for (std::size_t c = 0; c < image.cols; ++c) {
    d.inputs(c, 0) = unit_coordinate(c, image.cols);
    d.targets(c, 0) = values[row * image.cols + c];
    d.row_index.push_back(row);
    d.column_index.push_back(c);
  }
  d.grid = detect_uniform_grid(d.inputs);
  d.provenance = std::move(provenance);
  return d;
}

ImageData load_pgm(const std::filesystem::path& path) {
  ImageData data;
  data.image = read_pgm_file(path);
  data.dataset = image_dataset(data.image, "pgm " + path.filename().string() + " fnv1a=" + file_checksum(path));
  return data;
}

std::pair<Dataset, Dataset> split_odd_columns(const Dataset& image) {
  if (image.column_index.size() != image.size()) {
    throw InvalidArgument("split_odd_columns: dataset carries no pixel column indices");
  }
  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < image.size(); ++i) {
    // 1-based odd columns are 0-based even ones.
    (image.column_index[i] % 2 == 0 ? train_idx : test_idx).push_back(i);
  }
  auto train = image.subset(train_idx);
  auto test = image.subset(test_idx);
  train.split = Split::kTrain;
  test.split = Split::kTest;
  if (image.grid) {
    train.grid = detect_uniform_grid(train.inputs);
    test.grid = detect_uniform_grid(test.inputs);
  }
  return {std::move(train), std::move(test)};
}

Dataset load_mnist(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                   std::size_t limit) {
  const std::string images = read_file_bytes(images_path);
  const std::string labels = read_file_bytes(labels_path);

  if (read_be32(images, 0, "mnist images") != kIdxImagesMagic) {
    throw ParseError("mnist images: bad magic in " + images_path.string() + " (expected 0x00000803)", 0);
  }
  if (read_be32(labels, 0, "mnist labels") != kIdxLabelsMagic) {
    throw ParseError("mnist labels: bad magic in " + labels_path.string() + " (expected 0x00000801)", 0);
  }
  const std::size_t count = read_be32(images, 4, "mnist images");
  const std::size_t rows = read_be32(images, 8, "mnist images");
  const std::size_t cols = read_be32(images, 12, "mnist images");
  const std::size_t label_count = read_be32(labels, 4, "mnist labels");
  if (count != label_count) {
    throw ParseError("mnist: " + std::to_string(count) + " images but " + std::to_string(label_count) + " labels", 4);
  }
  const std::size_t pixels = rows * cols;
  if (images.size() < 16 + count * pixels) throw ParseError("mnist images: payload truncated", images.size());
  if (labels.size() < 8 + count) throw ParseError("mnist labels: payload truncated", labels.size());

  const std::size_t n = limit > 0 ? std::min(limit, count) : count;
  Dataset d;
  d.inputs = Matrix(n, pixels);
  d.targets = Matrix(n, 10);
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = static_cast<std::uint8_t>(labels[8 + i]);
    if (label > 9) throw ParseError("mnist labels: label " + std::to_string(label) + " > 9", 8 + i);
    d.targets(i, label) = 1.0;
    const char* src = images.data() + 16 + i * pixels;
    for (std::size_t p = 0; p < pixels; ++p) d.inputs(i, p) = static_cast<std::uint8_t>(src[p]) / 255.0;
  }
  d.provenance = "mnist " + images_path.filename().string() + " fnv1a=" + file_checksum(images_path) + " " +
                 labels_path.filename().string() + " fnv1a=" + file_checksum(labels_path) +
                 " limit=" + std::to_string(limit);
  return d;
}

void write_idx_images(const std::filesystem::path& path, std::size_t count, std::size_t rows, std::size_t cols,
                      std::span<const std::uint8_t> pixels) {
  if (pixels.size() != count * rows * cols) throw InvalidArgument("write_idx_images: pixel count mismatch");
  std::string out;
  append_be32(out, kIdxImagesMagic);
  append_be32(out, static_cast<std::uint32_t>(count));
  append_be32(out, static_cast<std::uint32_t>(rows));
  append_be32(out, static_cast<std::uint32_t>(cols));
  out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
  write_file_bytes(path, out);
}

void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels) {
  std::string out;
  append_be32(out, kIdxLabelsMagic);
  append_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.append(reinterpret_cast<const char*>(labels.data()), labels.size());
  write_file_bytes(path, out);
}

std::string file_checksum(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fplab
