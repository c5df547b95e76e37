#include "tsaug_cli/app.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "tsaug/data_io.hpp"
#include "tsaug/error.hpp"
#include "tsaug/svg.hpp"
#include "tsaug_cli/artifacts.hpp"
#include "tsaug_cli/experiments.hpp"
#include "tsaug_cli/run_config.hpp"

namespace tsaug::cli {
namespace {

namespace fs = std::filesystem;

void setup_logging() {
  static const auto logger = [] {
    auto l = spdlog::stderr_logger_mt("tsaug");
    l->set_pattern("[%l] %v");
    return l;
  }();
  spdlog::set_default_logger(logger);
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv("TSAUG_LOG")) level = spdlog::level::from_str(env);
  spdlog::set_level(level);
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
  std::optional<int> repeats;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Run config JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Override the config seed");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--repeats", c.repeats, "Override the number of seeds")->check(CLI::PositiveNumber);
}

RunConfig resolve(const Common& c) {
  auto cfg = RunConfig::load(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.out) cfg.out = *c.out;
  if (c.threads) cfg.threads = *c.threads;
  if (c.repeats) cfg.repeats = *c.repeats;
  spdlog::info("config {} hash {} seed {} repeats {} threads {}", c.config, cfg.hash(), cfg.seed, cfg.repeats,
               cfg.threads);
  return cfg;
}

std::uint64_t seed_or_entropy(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  const auto s = entropy_seed();
  spdlog::warn("no --seed given; using {}", s);
  return s;
}

void write_failures(const fs::path& path, const std::string& header, const std::vector<CellFailure>& failures) {
  std::ostringstream os;
  os << header << "\nbackbone,augmentation,seed,message\n";
  for (const auto& f : failures) {
    std::string msg = f.message;
    for (auto& ch : msg) {
      if (ch == ',' || ch == '\n') ch = ' ';
    }
    os << f.backbone << ',' << f.augmentation << ',' << f.seed << ',' << msg << '\n';
  }
  write_text(path, os.str());
}

int cmd_grid(const Common& common) {
  const auto cfg = resolve(common);
  const auto data = cfg.load_data();
  const auto result =
      run_grid(cfg, data, cfg.threads, [](const std::string& msg) { spdlog::debug("grid {}", msg); });
  const auto header = artifact_header(cfg.hash(), cfg.seed);
  std::ostringstream os;
  os << header << "\nbackbone,augmentation,mean_acc,std_acc,seeds\n";
  for (const auto& r : result.rows) {
    os << r.backbone << ',' << r.augmentation << ',' << format_number(r.mean_acc) << ','
       << format_number(r.std_acc) << ',' << join_seeds(r.seeds) << '\n';
  }
  const auto path = artifact_path(cfg.out, "grid", cfg.seed, "csv");
  write_text(path, os.str());
  write_failures(artifact_path(cfg.out, "grid_failures", cfg.seed, "csv"), header, result.failures);
  for (const auto& r : result.rows) {
    std::cout << r.backbone << '\t' << r.augmentation << '\t' << format_number(r.mean_acc) << " +- "
              << format_number(r.std_acc) << '\n';
  }
  std::cout << "wrote " << path.string() << '\n';
  if (!result.failures.empty()) spdlog::warn("{} grid cells failed", result.failures.size());
  return kExitOk;
}

int cmd_sweep(const Common& common) {
  const auto cfg = resolve(common);
  const auto data = cfg.load_data();
  const auto result =
      run_sweep(cfg, data, cfg.threads, [](const std::string& msg) { spdlog::debug("sweep {}", msg); });
  const auto header = artifact_header(cfg.hash(), cfg.seed);
  std::ostringstream os;
  os << header << "\nsweep,backbone,J,M,mean_acc,std_acc,seeds\n";
  for (const auto& r : result.rows) {
    os << r.sweep << ',' << r.backbone << ',' << r.num_ops << ',' << r.magnitude << ',' << format_number(r.mean_acc)
       << ',' << format_number(r.std_acc) << ',' << join_seeds(r.seeds) << '\n';
  }
  const auto path = artifact_path(cfg.out, "sweep_jm", cfg.seed, "csv");
  write_text(path, os.str());
  write_failures(artifact_path(cfg.out, "sweep_jm_failures", cfg.seed, "csv"), header, result.failures);

  for (const std::string which : {"J", "M"}) {
    svg::LineChart chart;
    chart.title = which == "J" ? "Accuracy vs number of ops J (M=" + std::to_string(cfg.sweep.fixed_magnitude) + ")"
                               : "Accuracy vs magnitude M (J=" + std::to_string(cfg.sweep.fixed_ops) + ")";
    chart.x_label = which;
    chart.y_label = "test accuracy";
    chart.markers = true;
    for (auto kind : cfg.backbones) {
      svg::LineSeries s;
      s.name = std::string(to_string(kind));
      for (const auto& r : result.rows) {
        if (r.sweep != which || r.backbone != s.name) continue;
        s.x.push_back(which == "J" ? r.num_ops : r.magnitude);
        s.y.push_back(r.mean_acc);
      }
      chart.series.push_back(std::move(s));
    }
    write_text(artifact_path(cfg.out, "sweep_" + which, cfg.seed, "svg"), svg::render(chart));
  }
  for (const auto& r : result.rows) {
    std::cout << r.sweep << '\t' << r.backbone << "\tJ=" << r.num_ops << "\tM=" << r.magnitude << '\t'
              << format_number(r.mean_acc) << '\n';
  }
  std::cout << "wrote " << path.string() << '\n';
  return kExitOk;
}

int cmd_search(const Common& common) {
  const auto cfg = resolve(common);
  const auto data = cfg.load_data();
  const auto hash = cfg.hash();
  for (auto seed : cfg.seeds()) {
    spdlog::info("search seed {}", seed);
    const auto outcome = run_search(cfg, data, seed);
    const auto& policy = outcome.report.policy;
    nlohmann::json j{{"config_hash", hash},
                     {"seed", seed},
                     {"test_accuracy", outcome.test_accuracy},
                     {"policy", policy.to_json()}};
    write_text(artifact_path(cfg.out, "policy", seed, "json"), j.dump(2) + "\n");

    const auto table = export_trajectory(outcome.report.trajectory);
    std::ostringstream os;
    os << artifact_header(hash, seed) << '\n';
    write_trajectory_csv(table, os);
    write_text(artifact_path(cfg.out, "trajectory", seed, "csv"), os.str());

    svg::LineChart chart;
    chart.title = "Sub-policy selection probability";
    chart.x_label = "epoch";
    chart.y_label = "probability";
    for (std::size_t k = 0; k < policy.size(); ++k) {
      svg::LineSeries s;
      s.name = "sub-policy " + std::to_string(k);
      for (std::size_t e = 0; e < table.epochs.size(); ++e) {
        s.x.push_back(table.epochs[e]);
        s.y.push_back(table.probabilities[e][k]);
      }
      chart.series.push_back(std::move(s));
    }
    write_text(artifact_path(cfg.out, "trajectory", seed, "svg"), svg::render(chart));

    std::cout << "seed " << seed << " test_accuracy " << format_number(outcome.test_accuracy) << '\n';
    const auto probs = policy.selection_probabilities();
    for (std::size_t k = 0; k < policy.size(); ++k) {
      std::cout << "  " << k << '\t' << format_number(probs[k]);
      for (const auto& op : policy.subpolicies[k].ops) std::cout << '\t' << to_string(op.kind);
      std::cout << '\n';
    }
  }
  return kExitOk;
}

int cmd_metrics(const Common& common) {
  const auto cfg = resolve(common);
  const auto data = cfg.load_data();
  const auto rows = run_metrics(cfg, data, cfg.threads);
  std::ostringstream os;
  os << artifact_header(cfg.hash(), cfg.seed) << "\naug_name,params,affinity,diversity,acc_delta,seed\n";
  svg::ScatterChart chart;
  chart.title = "Affinity vs diversity";
  chart.x_label = "affinity";
  chart.y_label = "diversity";
  chart.color_label = "test accuracy delta";
  for (const auto& r : rows) {
    os << r.aug_name << ',' << r.params << ',' << format_number(r.affinity) << ',' << format_number(r.diversity)
       << ',' << format_number(r.test_acc_delta) << ',' << join_seeds(r.seeds) << '\n';
    chart.points.push_back({r.affinity, r.diversity, r.test_acc_delta, r.aug_name + " " + r.params});
    std::cout << r.aug_name << '\t' << r.params << "\taffinity=" << format_number(r.affinity)
              << "\tdiversity=" << format_number(r.diversity) << "\tdelta=" << format_number(r.test_acc_delta) << '\n';
  }
  const auto path = artifact_path(cfg.out, "metrics", cfg.seed, "csv");
  write_text(path, os.str());
  write_text(artifact_path(cfg.out, "metrics", cfg.seed, "svg"), svg::render(chart));
  std::cout << "wrote " << path.string() << '\n';
  return kExitOk;
}

struct TransformArgs {
  std::string input;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::string svg;
  std::string magnitude_table;
};

void add_transform_args(CLI::App* cmd, TransformArgs& a) {
  cmd->add_option("--input", a.input, "Long-form CSV")->required();
  cmd->add_option("--output", a.output, "Augmented CSV")->required();
  cmd->add_option("--seed", a.seed, "Random seed");
  cmd->add_option("--svg", a.svg, "Overlay plot of the first series");
  cmd->add_option("--magnitude-table", a.magnitude_table, "Magnitude table JSON");
}

int write_transformed(const TransformArgs& a, const AugmentationRef& tau, const nlohmann::json& description) {
  const auto table = a.magnitude_table.empty() ? MagnitudeTable::builtin() : MagnitudeTable::load(a.magnitude_table);
  const auto input = load_csv(a.input, {});
  const auto seed = seed_or_entropy(a.seed);
  const auto out = augment_dataset(input, tau, RngStream(seed, 0), table);
  std::ostringstream os;
  os << artifact_header(hex64(fnv1a64(description.dump())), seed) << '\n';
  write_csv(out, os);
  write_text(a.output, os.str());
  if (!a.svg.empty() && !input.empty()) {
    write_text(a.svg, svg::render_overlay(input[0], out[0], tau.name + " " + tau.params));
  }
  spdlog::info("{} {} on {} series -> {}", tau.name, tau.params, input.size(), a.output);
  return kExitOk;
}

struct AugmentArgs {
  TransformArgs io;
  std::string op;
  std::optional<double> level;
  std::optional<double> sigma;
  std::optional<int> segments;
  bool variable = false;
  std::optional<int> knots;
  std::optional<double> frac;
  std::optional<double> stretch;
};

int cmd_augment(const AugmentArgs& a) {
  const auto kind = parse_op(a.op);
  if (!kind) throw ValidationError("unknown op \"" + a.op + "\"");
  const auto table = a.io.magnitude_table.empty() ? MagnitudeTable::builtin() : MagnitudeTable::load(a.io.magnitude_table);
  const bool explicit_params = a.sigma || a.segments || a.variable || a.knots || a.frac || a.stretch;
  if (a.level && explicit_params) throw ValidationError("--level cannot be combined with explicit parameters");
  AugmentationRef tau;
  if (a.level) {
    tau = AugmentationRef::op_at_level(*kind, *a.level, table);
  } else {
    OpParams p = table.default_params(*kind);
    if (a.sigma) p.sigma = *a.sigma;
    if (a.segments) p.num_segments = *a.segments;
    if (a.variable) p.equal_sized = false;
    if (a.knots) p.num_knots = *a.knots;
    if (a.frac) p.window_frac = *a.frac;
    if (a.stretch) p.stretch = *a.stretch;
    tau = AugmentationRef::op(*kind, p);
  }
  return write_transformed(a.io, tau, {{"command", "augment"}, {"op", tau.name}, {"params", tau.params}});
}

struct RandAugArgs {
  TransformArgs io;
  int num_ops = 2;
  int magnitude = 12;
};

int cmd_randaug(const RandAugArgs& a) {
  RandAugmentConfig cfg;
  cfg.num_ops = a.num_ops;
  cfg.magnitude = a.magnitude;
  cfg.validate();
  const auto tau = AugmentationRef::rand_augment(cfg);
  return write_transformed(a.io, tau, {{"command", "randaug"}, {"J", cfg.num_ops}, {"M", cfg.magnitude}});
}

struct SyntheticArgs {
  std::string kind = "sine-vs-frequency";
  std::size_t length = 64;
  std::size_t channels = 1;
  std::size_t samples_per_class = 100;
  double noise = 0.1;
  std::uint64_t seed = 0;
  std::string out = "data";
  std::string name;
  bool no_normalize = false;
};

int cmd_gen_synthetic(const SyntheticArgs& a) {
  SyntheticSpec spec;
  const auto kind = parse_synthetic_kind(a.kind);
  if (!kind) throw ValidationError("unknown generator \"" + a.kind + "\"");
  spec.kind = *kind;
  spec.length = a.length;
  spec.channels = a.channels;
  spec.samples_per_class = a.samples_per_class;
  spec.noise = a.noise;
  spec.seed = a.seed;
  spec.validate();
  const auto name = a.name.empty() ? std::string(to_string(spec.kind)) : a.name;
  const auto manifest = save_dataset(generate_synthetic(spec), a.out, name, !a.no_normalize);
  std::cout << manifest.string() << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  setup_logging();
  CLI::App app{"Time-series augmentation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tsaug 1.0.0");

  AugmentArgs augment;
  auto* c_augment = app.add_subcommand("augment", "Apply one op to every series of a CSV");
  add_transform_args(c_augment, augment.io);
  c_augment->add_option("--op", augment.op, "jitter, scale, rotate, permute, magwarp, timewarp, window_slice, window_warp")
      ->required();
  c_augment->add_option("--level", augment.level, "Magnitude level in [0, 30]");
  c_augment->add_option("--sigma", augment.sigma, "Noise or curve standard deviation");
  c_augment->add_option("--segments", augment.segments, "Permute segment count");
  c_augment->add_flag("--variable", augment.variable, "Permute with random segment boundaries");
  c_augment->add_option("--knots", augment.knots, "Warp curve knot count");
  c_augment->add_option("--frac", augment.frac, "Window fraction");
  c_augment->add_option("--stretch", augment.stretch, "Window warp factor");

  RandAugArgs randaug;
  auto* c_randaug = app.add_subcommand("randaug", "Apply randaugment(J, M) to every series of a CSV");
  add_transform_args(c_randaug, randaug.io);
  c_randaug->add_option("-J,--num-ops", randaug.num_ops, "Ops per sample");
  c_randaug->add_option("-M,--magnitude", randaug.magnitude, "Shared magnitude level");

  Common grid, search, metrics, sweep;
  add_common(app.add_subcommand("grid", "Backbone x augmentation accuracy grid"), grid);
  add_common(app.add_subcommand("search", "Learn an augmentation policy"), search);
  add_common(app.add_subcommand("metrics", "Affinity / diversity scatter"), metrics);
  add_common(app.add_subcommand("sweep-jm", "randaugment J and M sweeps"), sweep);

  SyntheticArgs synth;
  auto* c_synth = app.add_subcommand("gen-synthetic", "Write a synthetic dataset and its manifest");
  c_synth->add_option("--kind", synth.kind, "sine-vs-frequency, trend-vs-flat or sign-of-mean");
  c_synth->add_option("--length", synth.length, "Series length");
  c_synth->add_option("--channels", synth.channels, "Channel count");
  c_synth->add_option("--samples-per-class", synth.samples_per_class, "Samples per class");
  c_synth->add_option("--noise", synth.noise, "Noise standard deviation");
  c_synth->add_option("--seed", synth.seed, "Generator seed");
  c_synth->add_option("--out", synth.out, "Output directory");
  c_synth->add_option("--name", synth.name, "Dataset name");
  c_synth->add_flag("--no-normalize", synth.no_normalize, "Skip z-score normalization");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (app.got_subcommand(c_augment)) return cmd_augment(augment);
    if (app.got_subcommand(c_randaug)) return cmd_randaug(randaug);
    if (app.got_subcommand("grid")) return cmd_grid(grid);
    if (app.got_subcommand("search")) return cmd_search(search);
    if (app.got_subcommand("metrics")) return cmd_metrics(metrics);
    if (app.got_subcommand("sweep-jm")) return cmd_sweep(sweep);
    if (app.got_subcommand(c_synth)) return cmd_gen_synthetic(synth);
  } catch (const ValidationError& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const NumericError& e) {
    spdlog::error("{}", e.what());
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  }
  return kExitValidation;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("tsaug");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace tsaug::cli
