#include "tsaug_cli/experiments.hpp"

#include <cmath>
#include <mutex>
#include <optional>

#include "tsaug/error.hpp"
#include "tsaug/parallel.hpp"

namespace tsaug::cli {
namespace {

void require_test_split(const DatasetSplits& data) {
  if (data.test.empty()) throw ValidationError("dataset has no test split");
  if (data.val.empty()) throw ValidationError("dataset has no validation split");
}

struct Summary {
  double mean = std::nan("");
  double stddev = std::nan("");
  std::vector<std::uint64_t> seeds;
};

Summary summarize(const std::vector<std::optional<double>>& acc, const std::vector<std::uint64_t>& seeds) {
  Summary s;
  std::vector<double> ok;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (!acc[i]) continue;
    ok.push_back(*acc[i]);
    s.seeds.push_back(seeds[i]);
  }
  if (ok.empty()) return s;
  double sum = 0.0;
  for (double v : ok) sum += v;
  s.mean = sum / static_cast<double>(ok.size());
  double ss = 0.0;
  for (double v : ok) ss += (v - s.mean) * (v - s.mean);
  s.stddev = ok.size() > 1 ? std::sqrt(ss / static_cast<double>(ok.size() - 1)) : 0.0;
  return s;
}

double train_cell(const RunConfig& cfg, const DatasetSplits& data, std::size_t backbone_index, std::uint64_t seed,
                  const Augmenter& augmenter) {
  const auto cell = RngStream(seed, kGridStream).derive(backbone_index);
  auto model = Model::create(cfg.model_spec(cfg.backbones[backbone_index], data), cell.derive(0));
  train(model, data.train, data.val, cfg.train, cell.derive(1), augmenter);
  return accuracy(model, data.test);
}

struct Cell {
  std::size_t row = 0;
  std::size_t seed_index = 0;
};

template <typename CellFn, typename Describe>
std::vector<std::vector<std::optional<double>>> run_cells(std::size_t num_rows, const std::vector<std::uint64_t>& seeds,
                                                         std::size_t threads, CellFn&& fn, Describe&& describe,
                                                         std::vector<CellFailure>& failures,
                                                         const ProgressFn& progress) {
  std::vector<Cell> cells;
  for (std::size_t r = 0; r < num_rows; ++r) {
    for (std::size_t s = 0; s < seeds.size(); ++s) cells.push_back({r, s});
  }
  std::vector<std::vector<std::optional<double>>> acc(num_rows, std::vector<std::optional<double>>(seeds.size()));
  std::vector<std::optional<std::string>> errors(cells.size());
  std::mutex progress_mutex;
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    const auto [r, s] = cells[i];
    try {
      acc[r][s] = fn(r, seeds[s]);
    } catch (const NumericError& e) {
      errors[i] = e.what();
    }
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(describe(r) + " seed " + std::to_string(seeds[s]) + (errors[i] ? " failed: " + *errors[i] : " done"));
    }
  });
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!errors[i]) continue;
    CellFailure f;
    f.seed = seeds[cells[i].seed_index];
    f.message = *errors[i];
    f.augmentation = describe(cells[i].row);
    failures.push_back(f);
  }
  return acc;
}

}  // namespace

Policy initial_policy(const RunConfig& cfg, RngStream rng) {
  const auto& search = cfg.policy.search;
  if (cfg.policy.subpolicies.empty()) {
    return init_policy(search.ops_per_subpolicy, search.num_subpolicies, search.pool, rng);
  }
  Policy p;
  for (const auto& ops : cfg.policy.subpolicies) {
    SubPolicy sp;
    for (auto kind : ops) sp.ops.push_back(PolicyOp{kind, 0.0, 0.0});
    p.subpolicies.push_back(sp);
  }
  p.weights.assign(p.subpolicies.size(), 0.0);
  p.magnitude_noise = search.magnitude_noise;
  p.validate();
  return p;
}

double run_grid_cell(const RunConfig& cfg, const DatasetSplits& data, const MagnitudeTable& table,
                     std::size_t backbone_index, const std::string& augmentation, std::uint64_t seed) {
  if (augmentation == "none") return train_cell(cfg, data, backbone_index, seed, {});
  if (augmentation == "identity") return train_cell(cfg, data, backbone_index, seed, AugmentationRef::identity().as_augmenter(table));
  if (augmentation == "randaugment") {
    return train_cell(cfg, data, backbone_index, seed, AugmentationRef::rand_augment(cfg.randaugment).as_augmenter(table));
  }
  if (augmentation == "auto") {
    const auto cell = RngStream(seed, kGridStream).derive(backbone_index);
    auto model = Model::create(cfg.model_spec(cfg.backbones[backbone_index], data), cell.derive(0));
    search_policy(initial_policy(cfg, cell.derive(2)), model, data.train, data.val, cfg.train, cfg.policy.search,
                  cell.derive(1), table);
    return accuracy(model, data.test);
  }
  const auto kind = parse_op(augmentation);
  if (!kind) throw ValidationError("unknown grid augmentation \"" + augmentation + "\"");
  return train_cell(cfg, data, backbone_index, seed, AugmentationRef::op(*kind, table.default_params(*kind)).as_augmenter(table));
}

GridResult run_grid(const RunConfig& cfg, const DatasetSplits& data, std::size_t threads, const ProgressFn& progress) {
  require_test_split(data);
  const auto table = cfg.load_magnitude_table();
  const auto seeds = cfg.seeds();
  const std::size_t num_augs = cfg.grid_augmentations.size();
  const std::size_t num_rows = cfg.backbones.size() * num_augs;
  auto name = [&](std::size_t r) {
    return std::string(to_string(cfg.backbones[r / num_augs])) + "/" + cfg.grid_augmentations[r % num_augs];
  };
  GridResult result;
  const auto acc = run_cells(
      num_rows, seeds, threads,
      [&](std::size_t r, std::uint64_t seed) {
        return run_grid_cell(cfg, data, table, r / num_augs, cfg.grid_augmentations[r % num_augs], seed);
      },
      name, result.failures, progress);
  for (auto& f : result.failures) {
    const auto slash = f.augmentation.find('/');
    f.backbone = f.augmentation.substr(0, slash);
    f.augmentation = f.augmentation.substr(slash + 1);
  }
  for (std::size_t r = 0; r < num_rows; ++r) {
    const auto s = summarize(acc[r], seeds);
    result.rows.push_back({std::string(to_string(cfg.backbones[r / num_augs])), cfg.grid_augmentations[r % num_augs],
                           s.mean, s.stddev, s.seeds});
  }
  return result;
}

SweepResult run_sweep(const RunConfig& cfg, const DatasetSplits& data, std::size_t threads, const ProgressFn& progress) {
  require_test_split(data);
  const auto table = cfg.load_magnitude_table();
  const auto seeds = cfg.seeds();
  struct Setting {
    std::string sweep;
    std::size_t backbone;
    int num_ops;
    int magnitude;
  };
  std::vector<Setting> settings;
  for (std::size_t b = 0; b < cfg.backbones.size(); ++b) {
    for (int j : cfg.sweep.j_values) settings.push_back({"J", b, j, cfg.sweep.fixed_magnitude});
    for (int m : cfg.sweep.m_values) settings.push_back({"M", b, cfg.sweep.fixed_ops, m});
  }
  auto name = [&](std::size_t r) {
    const auto& s = settings[r];
    return std::string(to_string(cfg.backbones[s.backbone])) + "/J=" + std::to_string(s.num_ops) +
           " M=" + std::to_string(s.magnitude);
  };
  SweepResult result;
  const auto acc = run_cells(
      settings.size(), seeds, threads,
      [&](std::size_t r, std::uint64_t seed) {
        const auto& s = settings[r];
        RandAugmentConfig ra = cfg.randaugment;
        ra.num_ops = s.num_ops;
        ra.magnitude = s.magnitude;
        return train_cell(cfg, data, s.backbone, seed, AugmentationRef::rand_augment(ra).as_augmenter(table));
      },
      name, result.failures, progress);
  for (auto& f : result.failures) {
    const auto slash = f.augmentation.find('/');
    f.backbone = f.augmentation.substr(0, slash);
    f.augmentation = "randaugment " + f.augmentation.substr(slash + 1);
  }
  for (std::size_t r = 0; r < settings.size(); ++r) {
    const auto s = summarize(acc[r], seeds);
    const auto& st = settings[r];
    result.rows.push_back({st.sweep, std::string(to_string(cfg.backbones[st.backbone])), st.num_ops, st.magnitude,
                           s.mean, s.stddev, s.seeds});
  }
  return result;
}

SearchOutcome run_search(const RunConfig& cfg, const DatasetSplits& data, std::uint64_t seed) {
  require_test_split(data);
  const auto table = cfg.load_magnitude_table();
  const RngStream root(seed, kSearchStream);
  auto model = Model::create(cfg.model_spec(cfg.backbones.front(), data), root.derive(1));
  SearchOutcome out;
  out.seed = seed;
  out.report = search_policy(initial_policy(cfg, root.derive(0)), model, data.train, data.val, cfg.train,
                             cfg.policy.search, root.derive(2), table, &data.test);
  out.test_accuracy = accuracy(model, data.test);
  return out;
}

std::vector<MetricReport> run_metrics(const RunConfig& cfg, const DatasetSplits& data, std::size_t threads) {
  require_test_split(data);
  const auto table = cfg.load_magnitude_table();
  return scatter_sweep(data, cfg.model_spec(cfg.backbones.front(), data), cfg.metric_augmentations(table), cfg.train,
                       cfg.seeds(), threads, table);
}

}  // namespace tsaug::cli
