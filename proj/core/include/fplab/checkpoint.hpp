#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "fplab/network.hpp"

namespace fplab {

/// Network checkpoints are text files: the magic line "FPLAB-NET-v1" followed
/// by a JSON object {"layer_dims", "init", "layers": [{"weights", "bias"}, ...]}.
/// Weights are stored row-major (out_dim x in_dim). Doubles are written with
/// round-trip precision, so save -> load reproduces the parameters bit for bit.
inline constexpr std::string_view kCheckpointMagic = "FPLAB-NET-v1";

void write_checkpoint(std::ostream& out, const NetworkParams& net);
NetworkParams read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const NetworkParams& net);
NetworkParams load_checkpoint(const std::filesystem::path& path);

}  // namespace fplab
