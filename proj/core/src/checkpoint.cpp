#include "fplab/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "fplab/error.hpp"

namespace fplab {

using nlohmann::ordered_json;

void write_checkpoint(std::ostream& out, const NetworkParams& net) {
  ordered_json doc;
  doc["layer_dims"] = net.layer_dims();
  doc["init"] = {{"weight_std", net.init.weight_std},
                 {"bias_std", net.init.bias_std},
                 {"mean", net.init.mean},
                 {"seed", net.init.seed}};
  ordered_json layers = ordered_json::array();
  for (const auto& l : net.layers) {
    layers.push_back({{"weights", std::vector<double>(l.weights.values().begin(), l.weights.values().end())},
                      {"bias", l.bias}});
  }
  doc["layers"] = std::move(layers);
  out << kCheckpointMagic << '\n' << doc.dump() << '\n';
}

NetworkParams read_checkpoint(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic)) throw ParseError("checkpoint: missing magic line", 0);
  if (magic != kCheckpointMagic) {
    throw ParseError("checkpoint: bad magic '" + magic + "', expected " + std::string(kCheckpointMagic), 0);
  }
  const std::size_t body_offset = magic.size() + 1;
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(std::string("checkpoint: ") + e.what(), body_offset + e.byte);
  }
  try {
    const auto dims = doc.at("layer_dims").get<std::vector<std::size_t>>();
    NetworkParams net = make_network(dims);
    const auto& init = doc.at("init");
    net.init.weight_std = init.at("weight_std").get<double>();
    net.init.bias_std = init.at("bias_std").get<double>();
    net.init.mean = init.at("mean").get<double>();
    net.init.seed = init.at("seed").get<std::uint64_t>();
    const auto& layers = doc.at("layers");
    if (layers.size() != net.layers.size()) throw ParseError("checkpoint: layer count disagrees with layer_dims", body_offset);
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      auto w = layers[i].at("weights").get<std::vector<double>>();
      auto b = layers[i].at("bias").get<std::vector<double>>();
      Layer& l = net.layers[i];
      if (w.size() != l.weights.size() || b.size() != l.bias.size()) {
        throw ParseError("checkpoint: layer " + std::to_string(i) + " has the wrong number of values", body_offset);
      }
      l.weights = Matrix(l.weights.rows(), l.weights.cols(), std::move(w));
      l.bias = std::move(b);
    }
    return net;
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what(), body_offset);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("checkpoint: ") + e.what(), body_offset);
  }
}

void save_checkpoint(const std::filesystem::path& path, const NetworkParams& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, net);
}

NetworkParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace fplab
