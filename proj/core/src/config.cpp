#include "fplab/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fplab/error.hpp"

namespace fplab {

namespace {

using Json = nlohmann::ordered_json;

// Reads typed fields out of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(label() + " must be a JSON object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config key '" + qualified(key) + "' has the wrong type");
    }
  }

  // Nested object; returns nullptr when absent.
  const Json* object(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError("unknown config key '" + qualified(k) + "'");
    }
  }

 private:
  std::string label() const { return path_.empty() ? "config" : "config key '" + path_ + "'"; }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

std::string dump(const Json& j, int indent) { return indent < 0 ? j.dump() : j.dump(indent) + "\n"; }

template <typename Enum>
Enum parse_enum(const std::string& key, const std::string& value, std::initializer_list<std::pair<const char*, Enum>> names) {
  std::string allowed;
  for (const auto& [name, e] : names) {
    if (value == name) return e;
    allowed += allowed.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError("config key '" + key + "' must be one of " + allowed + ", got '" + value + "'");
}

const char* optimizer_name(OptimizerKind k) { return k == OptimizerKind::kAdam ? "adam" : "gd"; }
const char* reduction_name(Reduction r) { return r == Reduction::kMean ? "mean" : "sum"; }
const char* bias_form_name(BiasGradientForm f) { return f == BiasGradientForm::kPlusOne ? "plus-one" : "minus-one"; }
const char* constants_name(CrossingConstants c) { return c == CrossingConstants::kFullDecay ? "full-decay" : "half-decay"; }

BiasGradientForm parse_bias_form(const std::string& key, const std::string& v) {
  return parse_enum<BiasGradientForm>(key, v,
                                      {{"plus-one", BiasGradientForm::kPlusOne}, {"minus-one", BiasGradientForm::kMinusOne}});
}

Json scenario_json(const TheoremScenario& s) {
  return Json{{"k1", s.k1},         {"k2", s.k2},         {"A1", s.amplitude1},
              {"A2", s.amplitude2}, {"theta1", s.theta1}, {"theta2", s.theta2},
              {"a", s.a},           {"b", s.b},           {"target_abs_k1", s.target_abs_k1}};
}

void read_scenario(ObjectReader& parent, TheoremScenario& s) {
  const Json* j = parent.object("scenario");
  if (!j) return;
  ObjectReader r(*j, parent.qualified("scenario"));
  r.read("k1", s.k1);
  r.read("k2", s.k2);
  r.read("A1", s.amplitude1);
  r.read("A2", s.amplitude2);
  r.read("theta1", s.theta1);
  r.read("theta2", s.theta2);
  r.read("a", s.a);
  r.read("b", s.b);
  r.read("target_abs_k1", s.target_abs_k1);
  r.finish();
}

// The "experiment" tag of theorem-style documents is optional.
void check_tag(ObjectReader& r, const char* expected) {
  std::string tag = expected;
  r.read("experiment", tag);
  if (tag != expected) throw ConfigError(std::string("config names experiment '") + tag + "', expected '" + expected + "'");
}

}  // namespace

std::string config_to_json(const ExperimentConfig& c, int indent) {
  const DatasetRecipe& d = c.dataset;
  Json dataset = Json::object();
  switch (c.kind) {
    case ExperimentKind::kFit1d:
    case ExperimentKind::kFlip:
      dataset = Json{{"target", d.target}, {"count", d.count}, {"lo", d.lo}, {"hi", d.hi}};
      if (d.target == "custom") dataset["samples"] = d.samples;
      break;
    case ExperimentKind::kFitImage:
      dataset = Json{{"image", d.image}, {"row", d.row}, {"row_only", d.row_only}};
      break;
    case ExperimentKind::kFitMnist:
      dataset = Json{{"train_images", d.train_images}, {"train_labels", d.train_labels},
                     {"test_images", d.test_images},   {"test_labels", d.test_labels},
                     {"train_limit", d.train_limit},   {"test_limit", d.test_limit}};
      break;
  }
  Json j{
      {"experiment", experiment_name(c.kind)},
      {"seed", c.seed},
      {"dataset", dataset},
      {"layer_dims", c.layer_dims},
      {"init", Json{{"weight_std", c.weight_std}, {"bias_std", c.bias_std}, {"mean", c.init_mean}}},
      {"optimizer", Json{{"kind", optimizer_name(c.optimizer.kind)},
                         {"learning_rate", c.optimizer.learning_rate},
                         {"batch_size", c.optimizer.batch_size},
                         {"epochs", c.optimizer.epochs},
                         {"reduction", reduction_name(c.optimizer.reduction)},
                         {"stop_at_loss", c.optimizer.stop_at_loss}}},
      {"recording_interval", c.recording_interval},
      {"peaks", Json{{"track", c.peaks.track},
                     {"max_peaks", c.peaks.max_peaks},
                     {"rel_threshold", c.peaks.rel_threshold},
                     {"indices", c.peaks.indices}}},
      {"convergence", Json{{"threshold", c.convergence.threshold}, {"sustain", c.convergence.sustain}}},
      {"spectral_norms", c.spectral_norms},
      {"power_iterations", c.power_iterations},
      {"checkpoint_interval", c.checkpoint_interval},
      {"output_dir", c.output_dir},
  };
  return dump(j, indent);
}

ExperimentConfig config_from_json(const std::string& text, std::optional<ExperimentKind> expected) {
  const Json j = parse(text);
  ObjectReader root(j, "");
  std::string name;
  root.read("experiment", name);
  if (name.empty()) {
    if (!expected) throw ConfigError("config must name its experiment under 'experiment'");
    name = experiment_name(*expected);
  }
  const auto kind = parse_experiment_kind(name);
  if (!kind) throw ConfigError("unknown experiment '" + name + "'");
  if (expected && *kind != *expected) {
    throw ConfigError("config is for '" + name + "', expected '" + experiment_name(*expected) + "'");
  }

  ExperimentConfig c = default_config(*kind);
  root.read("seed", c.seed);
  root.read("layer_dims", c.layer_dims);
  root.read("recording_interval", c.recording_interval);
  root.read("spectral_norms", c.spectral_norms);
  root.read("power_iterations", c.power_iterations);
  root.read("checkpoint_interval", c.checkpoint_interval);
  root.read("output_dir", c.output_dir);

  if (const Json* o = root.object("dataset")) {
    ObjectReader r(*o, "dataset");
    DatasetRecipe& d = c.dataset;
    r.read("target", d.target);
    r.read("samples", d.samples);
    r.read("count", d.count);
    r.read("lo", d.lo);
    r.read("hi", d.hi);
    r.read("image", d.image);
    r.read("row", d.row);
    r.read("row_only", d.row_only);
    r.read("train_images", d.train_images);
    r.read("train_labels", d.train_labels);
    r.read("test_images", d.test_images);
    r.read("test_labels", d.test_labels);
    r.read("train_limit", d.train_limit);
    r.read("test_limit", d.test_limit);
    r.finish();
    if (d.target == "custom" && !d.samples.empty()) d.count = d.samples.size();
  }
  if (const Json* o = root.object("init")) {
    ObjectReader r(*o, "init");
    r.read("weight_std", c.weight_std);
    r.read("bias_std", c.bias_std);
    r.read("mean", c.init_mean);
    r.finish();
  }
  if (const Json* o = root.object("optimizer")) {
    ObjectReader r(*o, "optimizer");
    std::string kind_name = optimizer_name(c.optimizer.kind);
    std::string reduction = reduction_name(c.optimizer.reduction);
    r.read("kind", kind_name);
    r.read("learning_rate", c.optimizer.learning_rate);
    r.read("batch_size", c.optimizer.batch_size);
    r.read("epochs", c.optimizer.epochs);
    r.read("reduction", reduction);
    r.read("stop_at_loss", c.optimizer.stop_at_loss);
    r.finish();
    c.optimizer.kind = parse_enum<OptimizerKind>("optimizer.kind", kind_name,
                                                 {{"adam", OptimizerKind::kAdam}, {"gd", OptimizerKind::kGradientDescent}});
    c.optimizer.reduction =
        parse_enum<Reduction>("optimizer.reduction", reduction, {{"mean", Reduction::kMean}, {"sum", Reduction::kSum}});
  }
  if (const Json* o = root.object("peaks")) {
    ObjectReader r(*o, "peaks");
    r.read("track", c.peaks.track);
    r.read("max_peaks", c.peaks.max_peaks);
    r.read("rel_threshold", c.peaks.rel_threshold);
    r.read("indices", c.peaks.indices);
    r.finish();
  }
  if (const Json* o = root.object("convergence")) {
    ObjectReader r(*o, "convergence");
    r.read("threshold", c.convergence.threshold);
    r.read("sustain", c.convergence.sustain);
    r.finish();
  }
  root.finish();
  validate(c);
  return c;
}

std::vector<double> CrossingConfig::resolved_grid() const {
  if (!w_grid.empty()) return w_grid;
  std::vector<double> g(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) g[i] = std::ldexp(0.5, -static_cast<int>(i));
  return g;
}

std::string config_to_json(const DominanceConfig& c, int indent) {
  Json j{{"experiment", "theorem1"},
         {"scenario", scenario_json(c.scenario)},
         {"deltas", c.deltas},
         {"samples_per_delta", c.options.samples_per_delta},
         {"seed", c.options.seed},
         {"mirror_negative", c.options.mirror_negative},
         {"bias_form", bias_form_name(c.options.bias_form)},
         {"output_dir", c.output_dir}};
  return dump(j, indent);
}

std::string config_to_json(const CrossingConfig& c, int indent) {
  Json j{{"experiment", "crossing"},
         {"scenario", scenario_json(c.scenario)},
         {"w_grid", c.w_grid},
         {"grid_points", c.grid_points},
         {"phase_floor", c.options.phase_floor},
         {"constants", constants_name(c.options.constants)},
         {"bias_form", bias_form_name(c.options.bias_form)},
         {"output_dir", c.output_dir}};
  return dump(j, indent);
}

DominanceConfig dominance_config_from_json(const std::string& text) {
  const Json j = parse(text);
  ObjectReader r(j, "");
  DominanceConfig c;
  check_tag(r, "theorem1");
  read_scenario(r, c.scenario);
  r.read("deltas", c.deltas);
  r.read("samples_per_delta", c.options.samples_per_delta);
  r.read("seed", c.options.seed);
  r.read("mirror_negative", c.options.mirror_negative);
  std::string form = bias_form_name(c.options.bias_form);
  r.read("bias_form", form);
  r.read("output_dir", c.output_dir);
  r.finish();
  c.options.bias_form = parse_bias_form("bias_form", form);
  try {
    validate(c.scenario);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (c.deltas.empty()) throw ConfigError("deltas must not be empty");
  if (c.options.samples_per_delta == 0) throw ConfigError("samples_per_delta must be > 0");
  return c;
}

CrossingConfig crossing_config_from_json(const std::string& text) {
  const Json j = parse(text);
  ObjectReader r(j, "");
  CrossingConfig c;
  check_tag(r, "crossing");
  read_scenario(r, c.scenario);
  r.read("w_grid", c.w_grid);
  r.read("grid_points", c.grid_points);
  r.read("phase_floor", c.options.phase_floor);
  std::string constants = constants_name(c.options.constants);
  std::string form = bias_form_name(c.options.bias_form);
  r.read("constants", constants);
  r.read("bias_form", form);
  r.read("output_dir", c.output_dir);
  r.finish();
  c.options.constants = parse_enum<CrossingConstants>(
      "constants", constants, {{"full-decay", CrossingConstants::kFullDecay}, {"half-decay", CrossingConstants::kHalfDecay}});
  c.options.bias_form = parse_bias_form("bias_form", form);
  if (!(c.scenario.k1 > 0.0 && c.scenario.k2 > c.scenario.k1)) throw ConfigError("scenario needs k2 > k1 > 0");
  if (!(c.options.phase_floor > 0.0)) throw ConfigError("phase_floor must be > 0");
  return c;
}

std::string read_config_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace fplab
