#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fplab/numerics.hpp"

namespace fplab {

enum class Split { kTrain, kTest };

/// Uniform 1-d sampling grid: x_n = origin + n * spacing, n = 0..count-1.
struct Grid1d {
  double origin = 0.0;
  double spacing = 1.0;
  std::size_t count = 0;

  double at(std::size_t n) const { return origin + static_cast<double>(n) * spacing; }
};

struct Dataset {
  Matrix inputs;   // one sample per row
  Matrix targets;  // one sample per row
  Split split = Split::kTrain;
  std::string provenance;

  // Present when the inputs are a uniform 1-d grid.
  std::optional<Grid1d> grid;

  // Present for image-derived datasets (0-based pixel coordinates of each sample).
  std::vector<std::size_t> row_index;
  std::vector<std::size_t> column_index;
  std::size_t image_rows = 0;
  std::size_t image_cols = 0;

  std::size_t size() const noexcept { return inputs.rows(); }
  bool empty() const noexcept { return inputs.rows() == 0; }
  std::size_t input_dim() const noexcept { return inputs.cols(); }
  std::size_t target_dim() const noexcept { return targets.cols(); }

  // Samples at the given row indices, in order. Grid metadata is dropped.
  Dataset subset(std::span<const std::size_t> indices) const;
};

// Throws InvalidArgument if counts differ.
void validate(const Dataset& d);

}  // namespace fplab
