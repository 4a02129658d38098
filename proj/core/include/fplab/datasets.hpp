#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fplab/dataset.hpp"

namespace fplab {

// ---------------------------------------------------------------------------
// Synthetic 1-d targets
// ---------------------------------------------------------------------------

enum class TargetKind {
  kLinear,        // f(x) = x
  kLowFrequency,  // f(x) = sin(x) + 0.5 sin(3x) + 0.25 sin(5x)
};

/// n evenly spaced inputs on [lo, hi] (both ends included) with targets of
/// the given kind. Throws InvalidArgument for n < 2 or lo >= hi.
Dataset make_1d_target(TargetKind kind, std::size_t n, double lo, double hi);

/// Evenly spaced inputs on [lo, hi] paired with the given target samples.
Dataset make_1d_target(std::span<const double> samples, double lo, double hi);

/// Reverses the order of the DFT coefficients of the targets over the bins
/// 1..ceil(N/2)-1, mirrors the conjugates into N-k and keeps the DC (and for
/// even N the Nyquist) bin. The result is real, has the same energy and
/// flipping twice restores the input. Throws InvalidArgument unless the
/// dataset is 1-d in and out on a uniform grid.
Dataset make_flipped_target(const Dataset& base);

/// Uniform spacing of 1-d inputs (relative tolerance 1e-9), if any.
std::optional<Grid1d> detect_uniform_grid(const Matrix& inputs);

// ---------------------------------------------------------------------------
// Grayscale images
// ---------------------------------------------------------------------------

struct GrayImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(std::size_t r, std::size_t c) const { return pixels[r * cols + c]; }
};

/// Binary PGM ("P5", maxval <= 255, '#' comments allowed in the header).
/// Throws ParseError with the byte offset of a malformed header or truncated payload.
GrayImage read_pgm(std::istream& in);
GrayImage read_pgm_file(const std::filesystem::path& path);
void write_pgm(std::ostream& out, const GrayImage& image);
void write_pgm_file(const std::filesystem::path& path, const GrayImage& image);

/// Gray values minus their mean, divided by the largest absolute deviation
/// (all zeros for a constant image), row-major.
std::vector<double> normalized_pixels(const GrayImage& image);

/// One sample per pixel: input (x, y) with x from the column and y from the
/// row, each mapped onto [-1, 1] (a single row or column maps to 0), target
/// the normalized gray value.
Dataset image_dataset(const GrayImage& image, std::string provenance = {});

/// The pixels of one row as a 1-d regression on x in [-1, 1], normalized
/// with the statistics of the whole image.
Dataset image_row_dataset(const GrayImage& image, std::size_t row, std::string provenance = {});

struct ImageData {
  GrayImage image;
  Dataset dataset;
};

/// read_pgm_file + image_dataset with a path-and-checksum provenance.
ImageData load_pgm(const std::filesystem::path& path);

/// Train: pixels in the first, third, ... columns. Test: the rest. A 1-d
/// grid is kept where the selected pixels are evenly spaced.
/// Throws InvalidArgument when the dataset has no column indices.
std::pair<Dataset, Dataset> split_odd_columns(const Dataset& image);

// ---------------------------------------------------------------------------
// MNIST
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Images flattened to rows*cols values scaled to [0, 1]; targets are
/// length-10 one-hot label vectors. limit > 0 keeps the first `limit`
/// samples in file order. Throws ParseError for wrong magic numbers, label
/// values above 9, truncated payloads and image/label count mismatch; IoError
/// for unreadable files.
Dataset load_mnist(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                   std::size_t limit = 0);

void write_idx_images(const std::filesystem::path& path, std::size_t count, std::size_t rows, std::size_t cols,
                      std::span<const std::uint8_t> pixels);
void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels);

/// FNV-1a 64-bit hash of a file's bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

}  // namespace fplab
