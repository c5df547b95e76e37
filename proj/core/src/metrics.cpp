#include "tsaug/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <optional>

#include "tsaug/error.hpp"
#include "tsaug/parallel.hpp"

namespace tsaug {
namespace {

std::string fmt_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string describe_params(AugOpKind kind, const OpParams& p) {
  switch (kind) {
    case AugOpKind::Jitter:
    case AugOpKind::Scale:
      return "sigma=" + fmt_number(p.sigma);
    case AugOpKind::Rotate:
      return "";
    case AugOpKind::Permute:
      return "segments=" + std::to_string(p.num_segments) + (p.equal_sized ? "" : " variable");
    case AugOpKind::MagWarp:
    case AugOpKind::TimeWarp:
      return "sigma=" + fmt_number(p.sigma) + " knots=" + std::to_string(p.num_knots);
    case AugOpKind::WindowSlice:
      return "frac=" + fmt_number(p.window_frac);
    case AugOpKind::WindowWarp:
      return "frac=" + fmt_number(p.window_frac) + " K=" + fmt_number(p.stretch);
  }
  return "";
}

AugmentationRef AugmentationRef::identity() { return {"identity", "", std::vector<ChainStep>{}}; }

AugmentationRef AugmentationRef::op(AugOpKind kind, const OpParams& params) {
  return {std::string(to_string(kind)), describe_params(kind, params), std::vector<ChainStep>{{kind, params}}};
}

AugmentationRef AugmentationRef::op_at_level(AugOpKind kind, double level, const MagnitudeTable& table) {
  return {std::string(to_string(kind)), "level=" + fmt_number(level),
          std::vector<ChainStep>{{kind, table.params_for_level(kind, level)}}};
}

AugmentationRef AugmentationRef::chain(std::string name, std::vector<ChainStep> steps) {
  std::string params;
  for (const auto& s : steps) {
    if (!params.empty()) params += "+";
    params += std::string(to_string(s.kind));
    const auto d = describe_params(s.kind, s.params);
    if (!d.empty()) params += "(" + d + ")";
  }
  return {std::move(name), std::move(params), std::move(steps)};
}

AugmentationRef AugmentationRef::rand_augment(const RandAugmentConfig& cfg) {
  cfg.validate();
  return {"randaugment", "J=" + std::to_string(cfg.num_ops) + " M=" + std::to_string(cfg.magnitude), cfg};
}

bool AugmentationRef::is_identity() const {
  if (const auto* steps = std::get_if<std::vector<ChainStep>>(&transform)) return steps->empty();
  return std::get<RandAugmentConfig>(transform).num_ops == 0;
}

TimeSeries AugmentationRef::apply(const TimeSeries& x, RngStream rng, const MagnitudeTable& table) const {
  if (const auto* steps = std::get_if<std::vector<ChainStep>>(&transform)) {
    std::vector<ChainStep> fitted = *steps;
    for (auto& s : fitted) s.params = fit_to_length(s.kind, s.params, x.length());
    return apply_chain(x, fitted, rng);
  }
  return tsaug::rand_augment(x, std::get<RandAugmentConfig>(transform), rng, table);
}

Augmenter AugmentationRef::as_augmenter(const MagnitudeTable& table) const {
  return [tau = *this, &table](const TimeSeries& x, RngStream rng) { return tau.apply(x, rng, table); };
}

Dataset augment_dataset(const Dataset& d, const AugmentationRef& tau, RngStream rng, const MagnitudeTable& table) {
  std::vector<TimeSeries> out;
  out.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out.push_back(tau.apply(d[i], rng.derive(i), table));
  return d.with_samples(std::move(out));
}

double affinity(const Model& clean_model, const Dataset& val, const AugmentationRef& tau, RngStream rng,
                const MagnitudeTable& table) {
  const double clean = accuracy(clean_model, val);
  if (clean == 0.0) throw NumericError("affinity undefined: clean validation accuracy is 0");
  if (tau.is_identity()) return 1.0;
  return accuracy(clean_model, augment_dataset(val, tau, rng, table)) / clean;
}

namespace {

double loss_ratio(double augmented, double clean) {
  if (!(clean >= 1e-12)) throw NumericError("diversity undefined: clean final training loss below 1e-12");
  return augmented / clean;
}

struct TrainedRun {
  Model model;
  TrainReport report;
};

TrainedRun train_run(const ModelSpec& spec, const DatasetSplits& data, const TrainConfig& cfg, RngStream rng,
                     const Augmenter& augmenter) {
  TrainedRun run{Model::create(spec, rng.derive(0)), {}};
  run.report = train(run.model, data.train, data.val, cfg, rng.derive(1), augmenter,
                     data.test.empty() ? nullptr : &data.test);
  return run;
}

}  // namespace

DiversityRun diversity_run(const ModelSpec& spec, const Dataset& train_set, const Dataset& val_set,
                           const TrainConfig& cfg, const AugmentationRef& tau, RngStream rng,
                           const MagnitudeTable& table) {
  DiversityRun out;
  Model clean = Model::create(spec, rng.derive(0));
  out.clean = train(clean, train_set, val_set, cfg, rng.derive(1));
  Model augmented = Model::create(spec, rng.derive(0));
  out.augmented = train(augmented, train_set, val_set, cfg, rng.derive(1), tau.as_augmenter(table));
  out.diversity = loss_ratio(out.augmented.final_train_loss, out.clean.final_train_loss);
  return out;
}

double diversity(const ModelSpec& spec, const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg,
                 const AugmentationRef& tau, RngStream rng, const MagnitudeTable& table) {
  return diversity_run(spec, train_set, val_set, cfg, tau, rng, table).diversity;
}

std::vector<MetricReport> scatter_sweep(const DatasetSplits& data, const ModelSpec& spec,
                                        const std::vector<AugmentationRef>& augmentations, const TrainConfig& cfg,
                                        const std::vector<std::uint64_t>& seeds, std::size_t threads,
                                        const MagnitudeTable& table) {
  if (augmentations.empty()) throw ValidationError("scatter sweep needs at least one augmentation");
  if (seeds.empty()) throw ValidationError("scatter sweep needs at least one seed");
  if (data.test.empty()) throw ValidationError("scatter sweep needs a test split");

  std::vector<std::optional<TrainedRun>> clean(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t s) {
    clean[s] = train_run(spec, data, cfg, RngStream(seeds[s], 0), {});
  });

  struct Cell {
    double affinity, diversity, delta;
  };
  const std::size_t n_aug = augmentations.size();
  std::vector<Cell> cells(seeds.size() * n_aug);
  parallel_for(cells.size(), threads, [&](std::size_t idx) {
    const std::size_t s = idx / n_aug;
    const std::size_t a = idx % n_aug;
    const RngStream rng(seeds[s], 0);
    const auto& base = *clean[s];
    const auto& tau = augmentations[a];
    Cell cell{};
    cell.affinity = affinity(base.model, data.val, tau, rng.derive(2).derive(a), table);
    const auto aug = tau.is_identity() ? base : train_run(spec, data, cfg, rng, tau.as_augmenter(table));
    cell.diversity = loss_ratio(aug.report.final_train_loss, base.report.final_train_loss);
    cell.delta = accuracy(aug.model, data.test) - accuracy(base.model, data.test);
    cells[idx] = cell;
  });

  std::vector<MetricReport> rows;
  rows.reserve(n_aug);
  const double count = static_cast<double>(seeds.size());
  for (std::size_t a = 0; a < n_aug; ++a) {
    MetricReport r{augmentations[a].name, augmentations[a].params, 0.0, 0.0, 0.0, seeds};
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const auto& c = cells[s * n_aug + a];
      r.affinity += c.affinity / count;
      r.diversity += c.diversity / count;
      r.test_acc_delta += c.delta / count;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<AugmentationRef> default_sweep(const MagnitudeTable& table) {
  std::vector<AugmentationRef> out{AugmentationRef::identity()};
  for (auto kind : kAllOps) {
    for (int level = 2; level <= 30; level += 4) out.push_back(AugmentationRef::op_at_level(kind, level, table));
  }
  return out;
}

}  // namespace tsaug
