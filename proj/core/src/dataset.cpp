#include "fplab/dataset.hpp"

#include <algorithm>
#include <string>

#include "fplab/error.hpp"

namespace fplab {

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.split = split;
  out.provenance = provenance;
  out.image_rows = image_rows;
  out.image_cols = image_cols;
  out.inputs = Matrix(indices.size(), inputs.cols());
  out.targets = Matrix(indices.size(), targets.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t src = indices[i];
    if (src >= size()) throw InvalidArgument("Dataset::subset: index " + std::to_string(src) + " out of range");
    std::ranges::copy(inputs.row(src), out.inputs.row(i).begin());
    std::ranges::copy(targets.row(src), out.targets.row(i).begin());
    if (!row_index.empty()) out.row_index.push_back(row_index[src]);
    if (!column_index.empty()) out.column_index.push_back(column_index[src]);
  }
  return out;
}

void validate(const Dataset& d) {
  if (d.inputs.rows() != d.targets.rows()) {
    throw InvalidArgument("dataset has " + std::to_string(d.inputs.rows()) + " inputs but " +
                          std::to_string(d.targets.rows()) + " targets");
  }
  if (d.grid && d.grid->count != d.size()) throw InvalidArgument("dataset grid size disagrees with sample count");
}

}  // namespace fplab
