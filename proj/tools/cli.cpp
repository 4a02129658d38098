#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "fplab/config.hpp"
#include "fplab/error.hpp"
#include "fplab/experiment.hpp"
#include "fplab/theory.hpp"
#include "fplab/trace.hpp"
#include "plot.hpp"

namespace fplab::cli {

namespace {

struct CommonFlags {
  std::vector<std::string> configs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<long> epochs;
  unsigned jobs = 1;
};

// --out, then the config's output_dir, then $FPLAB_OUT, then ./fplab-out.
std::filesystem::path resolve_out(const CommonFlags& flags, const std::string& config_dir) {
  if (flags.out) return *flags.out;
  if (!config_dir.empty()) return config_dir;
  if (const char* env = std::getenv("FPLAB_OUT"); env && *env) return env;
  return "fplab-out";
}

void add_common(CLI::App* app, CommonFlags& flags, bool multi_config) {
  if (multi_config) {
    app->add_option("--config", flags.configs, "JSON config file (repeat to run several)");
    app->add_option("--jobs", flags.jobs, "Run up to N configs concurrently")->check(CLI::PositiveNumber);
  } else {
    app->add_option("--config", flags.configs, "JSON config file")->expected(0, 1);
  }
  app->add_option("--seed", flags.seed, "Override the config seed");
  app->add_option("--out", flags.out, "Output directory (default: config output_dir, $FPLAB_OUT, ./fplab-out)");
  app->add_option("--epochs", flags.epochs, "Override the number of training epochs")->check(CLI::NonNegativeNumber);
}

// Runs fn and maps exceptions onto exit codes.
int guarded(const std::function<void()>& fn, std::ostream& err) {
  try {
    fn();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitData;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

void write_text(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  body(f);
}

void report_order(std::ostream& out, const ConvergenceOrder& order) {
  out << "convergence:";
  for (const auto& p : order.peaks) {
    out << " k" << p.peak << '@' << (p.epoch ? std::to_string(*p.epoch) : std::string("never"));
  }
  out << (order.in_order ? "  in order" : "  out of order");
  if (order.violation) out << " (k" << order.violation->second << " before k" << order.violation->first << ')';
  out << '\n';
}

int run_experiments(ExperimentKind kind, const CommonFlags& flags, std::ostream& out, std::ostream& err) {
  std::vector<std::string> sources = flags.configs;
  if (sources.empty()) sources.emplace_back();  // family defaults

  std::vector<ExperimentConfig> configs;
  for (const auto& src : sources) {
    const int status = guarded(
        [&] {
          ExperimentConfig c =
              src.empty() ? default_config(kind) : config_from_json(read_config_text(src), kind);
          if (flags.seed) c.seed = *flags.seed;
          if (flags.epochs) c.optimizer.epochs = *flags.epochs;
          std::filesystem::path dir = resolve_out(flags, c.output_dir);
          if (sources.size() > 1) dir /= std::filesystem::path(src).stem();
          c.output_dir = dir.string();
          validate(c);
          configs.push_back(std::move(c));
        },
        err);
    if (status != kExitOk) return status;
  }

  std::mutex io;
  std::vector<int> status(configs.size(), kExitOk);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      std::ostringstream log, errs;
      status[i] = guarded(
          [&] {
            const ExperimentResult r = run_experiment(configs[i]);
            const auto& last = r.trace.records.back();
            log << experiment_name(configs[i].kind) << ": " << r.epochs_run << " epochs, train loss "
                << format_double(last.train_loss);
            if (last.test_loss) log << ", test loss " << format_double(*last.test_loss);
            if (last.test_accuracy) log << ", test accuracy " << format_double(*last.test_accuracy);
            log << '\n';
            if (r.order) report_order(log, *r.order);
            for (const auto& p : r.written) log << "wrote " << p.string() << '\n';
          },
          errs);
      const std::lock_guard lock(io);
      out << log.str();
      err << errs.str();
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(flags.jobs, static_cast<unsigned>(configs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return *std::ranges::max_element(status);
}

int run_theorem1(const CommonFlags& flags, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        DominanceConfig c;
        if (!flags.configs.empty()) c = dominance_config_from_json(read_config_text(flags.configs.front()));
        if (flags.seed) c.options.seed = *flags.seed;
        const auto dir = resolve_out(flags, c.output_dir);
        std::filesystem::create_directories(dir);
        DominanceCurve curve;
        try {
          curve = theorem1_fraction(c.scenario, c.deltas, c.options);
        } catch (const InvalidArgument& e) {
          throw ConfigError(e.what());
        }
        const auto path = dir / "theorem1.csv";
        write_text(path, [&](std::ostream& f) { write_dominance_csv(f, c.scenario, curve); });
        for (const auto& p : curve.points) {
          out << "delta " << format_double(p.delta) << ": fraction " << format_double(p.fraction) << '\n';
        }
        out << (curve.non_decreasing() ? "non-decreasing" : "DECREASES") << " along the ladder; estimates "
            << (curve.estimates_agree() ? "agree" : "DISAGREE") << " within 0.01\n";
        out << "wrote " << path.string() << '\n';
      },
      err);
}

int run_crossing(const CommonFlags& flags, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        CrossingConfig c;
        if (!flags.configs.empty()) c = crossing_config_from_json(read_config_text(flags.configs.front()));
        const auto dir = resolve_out(flags, c.output_dir);
        std::filesystem::create_directories(dir);
        CrossingResult result;
        try {
          result = crossing_delta_f(c.scenario, c.resolved_grid(), c.options);
        } catch (const InvalidArgument& e) {
          throw ConfigError(e.what());
        }
        const auto path = dir / "crossing.csv";
        write_text(path, [&](std::ostream& f) { write_crossing_csv(f, c.scenario, result); });
        const char* names[] = {"a", "w", "b"};
        for (std::size_t b = 0; b < 3; ++b) {
          bool decreasing = true;
          for (std::size_t i = 1; i < result.points.size(); ++i) {
            const auto& prev = result.points[i - 1];
            const auto& cur = result.points[i];
            if (std::abs(cur.w) < std::abs(prev.w) && !(cur.branch_delta_f[b] <= prev.branch_delta_f[b])) decreasing = false;
          }
          out << "branch " << names[b] << ": Delta_F(k1) " << (decreasing ? "does not increase" : "INCREASES")
              << " as |w| shrinks\n";
        }
        out << "wrote " << path.string() << '\n';
      },
      err);
}

int run_analyze(const std::string& trace_path, const CommonFlags& flags, std::optional<double> threshold,
                std::optional<std::size_t> sustain, std::size_t max_peaks, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        ConvergenceRule rule;
        if (!flags.configs.empty()) {
          const auto j = read_config_text(flags.configs.front());
          rule = config_from_json(j).convergence;
        }
        if (threshold) rule.threshold = *threshold;
        if (sustain) rule.sustain = *sustain;
        const TrainTrace trace = read_trace_csv(trace_path);
        if (trace.empty()) throw ParseError("trace " + trace_path + " has no records", 0);
        const ConvergenceOrder order = convergence_order(trace, rule.threshold, rule.sustain, max_peaks);
        report_order(out, order);

        const auto dir = resolve_out(flags, {});
        std::filesystem::create_directories(dir);
        CsvTable t;
        t.comments.push_back("trace " + trace_path + " threshold=" + format_double(rule.threshold) +
                             " sustain=" + std::to_string(rule.sustain));
        t.header = {"peak", "epoch", "converged"};
        for (const auto& p : order.peaks) {
          t.rows.push_back({static_cast<double>(p.peak), p.epoch ? static_cast<double>(*p.epoch) : std::nan(""),
                            p.epoch ? 1.0 : 0.0});
        }
        const auto path = dir / "convergence.csv";
        write_text(path, [&](std::ostream& f) { write_csv(f, t); });
        out << "wrote " << path.string() << '\n';
      },
      err);
}

int run_plot(const std::string& csv, const std::string& kind_name, const std::optional<std::string>& output,
             const CommonFlags& flags, std::ostream& out, std::ostream& err) {
  const auto kind = parse_plot_kind(kind_name);
  if (!kind) {
    err << "config error: --kind must be delta_f, loss, param_stats or spectrum\n";
    return kExitConfig;
  }
  return guarded(
      [&] {
        std::filesystem::path svg;
        if (output) {
          svg = *output;
        } else {
          const std::filesystem::path dir = flags.out ? std::filesystem::path(*flags.out)
                                                      : std::filesystem::path(csv).parent_path();
          svg = dir / (std::filesystem::path(csv).stem().string() + "-" + kind_name + ".svg");
        }
        if (svg.has_parent_path()) std::filesystem::create_directories(svg.parent_path());
        plot_trace(csv, *kind, svg);
        out << "wrote " << svg.string() << '\n';
      },
      err);
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frequency-principle experiments for tanh networks", "fplab"};
  app.require_subcommand(1);

  struct Family {
    const char* name;
    ExperimentKind kind;
    const char* help;
  };
  const Family families[] = {
      {"fit-1d", ExperimentKind::kFit1d, "Fit a synthetic 1-d target and track Delta_F at its peaks"},
      {"fit-image", ExperimentKind::kFitImage, "Fit a grayscale image (odd columns train, even test)"},
      {"fit-mnist", ExperimentKind::kFitMnist, "Classify an MNIST subset with MSE loss"},
      {"flip-experiment", ExperimentKind::kFlip, "Fit a target whose spectrum has been reversed"},
  };

  CommonFlags flags;
  std::optional<ExperimentKind> chosen;
  for (const auto& f : families) {
    auto* sub = app.add_subcommand(f.name, f.help);
    add_common(sub, flags, true);
    sub->callback([&chosen, kind = f.kind] { chosen = kind; });
  }
  auto* theorem1 = app.add_subcommand("theorem1", "Dominance fraction of low-frequency gradients at small weights");
  add_common(theorem1, flags, false);
  auto* crossing = app.add_subcommand("crossing", "Delta_F(k1) at gradient-magnitude crossings");
  add_common(crossing, flags, false);

  auto* analyze = app.add_subcommand("analyze-trace", "Convergence order of the peaks in a trace CSV");
  add_common(analyze, flags, false);
  std::string trace_path;
  std::optional<double> threshold;
  std::optional<std::size_t> sustain;
  std::size_t max_peaks = 0;
  analyze->add_option("trace", trace_path, "trace.csv written by a fit subcommand")->required();
  analyze->add_option("--threshold", threshold, "Delta_F convergence threshold (default 0.3)");
  analyze->add_option("--sustain", sustain, "Consecutive recordings below the threshold (default 5)");
  analyze->add_option("--max-peaks", max_peaks, "Only check the lowest N peaks (0 = all)");

  auto* plot = app.add_subcommand("plot", "Render a trace or spectrum CSV as SVG");
  add_common(plot, flags, false);
  std::string plot_csv, plot_kind = "delta_f";
  std::optional<std::string> plot_output;
  plot->add_option("csv", plot_csv, "trace or spectrum CSV")->required();
  plot->add_option("--kind", plot_kind, "delta_f | loss | param_stats | spectrum");
  plot->add_option("--output", plot_output, "SVG path (default: next to the CSV)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  }

  if (chosen) return run_experiments(*chosen, flags, out, err);
  if (theorem1->parsed()) return run_theorem1(flags, out, err);
  if (crossing->parsed()) return run_crossing(flags, out, err);
  if (analyze->parsed()) return run_analyze(trace_path, flags, threshold, sustain, max_peaks, out, err);
  if (plot->parsed()) return run_plot(plot_csv, plot_kind, plot_output, flags, out, err);
  err << app.help();
  return kExitConfig;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace fplab::cli
