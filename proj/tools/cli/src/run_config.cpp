#include "tsaug_cli/run_config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "tsaug/error.hpp"

namespace tsaug::cli {
namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) throw ValidationError(where + ": unknown key \"" + key + "\"");
  }
}

template <typename T>
T get(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + "." + key + ": wrong type (" + obj.at(key).dump() + ")");
  }
}

double get_number(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) throw ValidationError(where + "." + key + ": expected a number");
  return obj.at(key).get<double>();
}

std::int64_t get_int(const json& obj, const char* key, std::int64_t fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer()) throw ValidationError(where + "." + key + ": expected an integer");
  return obj.at(key).get<std::int64_t>();
}

AugOpKind op_named(const std::string& name, const std::string& where) {
  const auto k = parse_op(name);
  if (!k) throw ValidationError(where + ": unknown op \"" + name + "\"");
  return *k;
}

std::vector<AugOpKind> op_list(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.empty()) throw ValidationError(where + ": expected a non-empty array of op names");
  std::vector<AugOpKind> out;
  for (const auto& e : arr) {
    if (!e.is_string()) throw ValidationError(where + ": expected op names");
    out.push_back(op_named(e.get<std::string>(), where));
  }
  return out;
}

json op_names(std::span<const AugOpKind> ops) {
  json arr = json::array();
  for (auto k : ops) arr.push_back(std::string(to_string(k)));
  return arr;
}

std::vector<int> int_list(const json& obj, const char* key, std::vector<int> fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& arr = obj.at(key);
  if (!arr.is_array() || arr.empty()) throw ValidationError(where + "." + key + ": expected a non-empty array");
  std::vector<int> out;
  for (const auto& e : arr) {
    if (!e.is_number_integer()) throw ValidationError(where + "." + key + ": expected integers");
    out.push_back(e.get<int>());
  }
  return out;
}

OpParams params_from_json(AugOpKind kind, const json& j, const MagnitudeTable& table, const std::string& where) {
  check_keys(j, {"sigma", "segments", "equal_sized", "knots", "frac", "stretch"}, where);
  OpParams p = table.default_params(kind);
  p.sigma = get_number(j, "sigma", p.sigma, where);
  p.num_segments = static_cast<int>(get_int(j, "segments", p.num_segments, where));
  p.equal_sized = get<bool>(j, "equal_sized", p.equal_sized, where);
  p.num_knots = static_cast<int>(get_int(j, "knots", p.num_knots, where));
  p.window_frac = get_number(j, "frac", p.window_frac, where);
  p.stretch = get_number(j, "stretch", p.stretch, where);
  return p;
}

void validate_metric_augmentations(const json& spec) {
  const std::string where = "metrics.augmentations";
  if (spec.is_string()) {
    const auto s = spec.get<std::string>();
    if (s != "default" && s != "identity") throw ValidationError(where + ": expected \"default\", \"identity\" or a list");
    return;
  }
  if (!spec.is_array() || spec.empty()) throw ValidationError(where + ": expected a non-empty list");
  const auto& table = MagnitudeTable::builtin();
  for (const auto& e : spec) {
    check_keys(e, {"op", "level", "params"}, where + "[]");
    if (!e.contains("op") || !e.at("op").is_string()) throw ValidationError(where + "[]: missing \"op\"");
    const auto name = e.at("op").get<std::string>();
    if (name == "identity") continue;
    const auto kind = op_named(name, where);
    if (e.contains("level") && e.contains("params")) throw ValidationError(where + "[]: give level or params, not both");
    if (e.contains("level")) {
      const double level = get_number(e, "level", 0.0, where);
      table.value_for_level(kind, level);
    } else if (e.contains("params")) {
      params_from_json(kind, e.at("params"), table, where);
    }
  }
}

}  // namespace

std::vector<std::string> default_grid_augmentations() {
  std::vector<std::string> out{"none"};
  for (auto k : kAllOps) out.emplace_back(to_string(k));
  return out;
}

RunConfig RunConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  check_keys(j, {"version", "seed", "repeats", "dataset", "train", "backbones", "width_multiplier", "magnitude_table",
                 "grid", "randaugment", "policy", "sweep", "metrics", "out", "threads"},
             "config");
  if (!j.contains("version") || !j.at("version").is_number_integer() || j.at("version").get<int>() != kVersion) {
    throw ValidationError("config: expected \"version\": " + std::to_string(kVersion));
  }
  RunConfig c;
  if (j.contains("seed")) {
    const auto& v = j.at("seed");
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ValidationError("config.seed: expected a non-negative integer");
    }
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  c.repeats = static_cast<int>(get_int(j, "repeats", c.repeats, "config"));
  if (c.repeats < 1) throw ValidationError("config.repeats: must be >= 1");

  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };

  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    check_keys(d, {"manifest", "synthetic"}, "dataset");
    if (d.contains("manifest") == d.contains("synthetic")) {
      throw ValidationError("dataset: give exactly one of \"manifest\" or \"synthetic\"");
    }
    if (d.contains("manifest")) {
      c.dataset.manifest = resolve(get<std::string>(d, "manifest", "", "dataset"));
    } else {
      const auto& s = d.at("synthetic");
      const std::string w = "dataset.synthetic";
      check_keys(s, {"kind", "length", "channels", "samples_per_class", "noise", "seed"}, w);
      auto& spec = c.dataset.synthetic;
      const auto kind = get<std::string>(s, "kind", std::string(to_string(spec.kind)), w);
      const auto parsed = parse_synthetic_kind(kind);
      if (!parsed) throw ValidationError(w + ".kind: unknown generator \"" + kind + "\"");
      spec.kind = *parsed;
      auto positive = [&](const char* key, std::size_t fallback) {
        const auto v = get_int(s, key, static_cast<std::int64_t>(fallback), w);
        if (v < 1) throw ValidationError(w + "." + key + ": must be positive");
        return static_cast<std::size_t>(v);
      };
      spec.length = positive("length", spec.length);
      spec.channels = positive("channels", spec.channels);
      spec.samples_per_class = positive("samples_per_class", spec.samples_per_class);
      spec.noise = get_number(s, "noise", spec.noise, w);
      const auto data_seed = get_int(s, "seed", 0, w);
      if (data_seed < 0) throw ValidationError(w + ".seed: must be non-negative");
      spec.seed = static_cast<std::uint64_t>(data_seed);
      spec.validate();
    }
  }

  if (j.contains("train")) {
    const auto& t = j.at("train");
    check_keys(t, {"lr0", "lr_decay", "decay_every", "batch_size", "epochs"}, "train");
    c.train.lr0 = get_number(t, "lr0", c.train.lr0, "train");
    c.train.lr_decay = get_number(t, "lr_decay", c.train.lr_decay, "train");
    c.train.decay_every = static_cast<int>(get_int(t, "decay_every", c.train.decay_every, "train"));
    const auto batch = get_int(t, "batch_size", static_cast<std::int64_t>(c.train.batch_size), "train");
    if (batch < 1) throw ValidationError("train.batch_size: must be positive");
    c.train.batch_size = static_cast<std::size_t>(batch);
    c.train.epochs = static_cast<int>(get_int(t, "epochs", c.train.epochs, "train"));
  }
  c.train.validate();

  if (j.contains("backbones")) {
    const auto& b = j.at("backbones");
    if (!b.is_array() || b.empty()) throw ValidationError("backbones: expected a non-empty array");
    c.backbones.clear();
    for (const auto& e : b) {
      const auto name = e.is_string() ? e.get<std::string>() : e.dump();
      const auto kind = parse_model_kind(name);
      if (!kind) throw ValidationError("backbones: unknown model \"" + name + "\" (expected mlp or conv1d)");
      c.backbones.push_back(*kind);
    }
  }
  c.width_multiplier = get_number(j, "width_multiplier", c.width_multiplier, "config");
  if (!(c.width_multiplier > 0.0)) throw ValidationError("width_multiplier: must be positive");
  if (j.contains("magnitude_table")) c.magnitude_table = resolve(get<std::string>(j, "magnitude_table", "", "config"));

  c.grid_augmentations = default_grid_augmentations();
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    check_keys(g, {"augmentations"}, "grid");
    if (g.contains("augmentations")) {
      const auto& arr = g.at("augmentations");
      if (!arr.is_array() || arr.empty()) throw ValidationError("grid.augmentations: expected a non-empty array");
      c.grid_augmentations.clear();
      for (const auto& e : arr) {
        if (!e.is_string()) throw ValidationError("grid.augmentations: expected strings");
        const auto name = e.get<std::string>();
        if (name != "none" && name != "identity" && name != "randaugment" && name != "auto") {
          op_named(name, "grid.augmentations");
        }
        c.grid_augmentations.push_back(name);
      }
    }
  }

  if (j.contains("randaugment")) {
    const auto& r = j.at("randaugment");
    check_keys(r, {"J", "M", "pool"}, "randaugment");
    c.randaugment.num_ops = static_cast<int>(get_int(r, "J", c.randaugment.num_ops, "randaugment"));
    c.randaugment.magnitude = static_cast<int>(get_int(r, "M", c.randaugment.magnitude, "randaugment"));
    if (r.contains("pool")) c.randaugment.pool = op_list(r.at("pool"), "randaugment.pool");
  }
  c.randaugment.validate();

  if (j.contains("policy")) {
    const auto& p = j.at("policy");
    const std::string w = "policy";
    check_keys(p, {"K", "J", "policy_lr", "baseline_decay", "magnitude_noise", "pool", "subpolicies"}, w);
    auto& s = c.policy.search;
    s.num_subpolicies = static_cast<int>(get_int(p, "K", s.num_subpolicies, w));
    s.ops_per_subpolicy = static_cast<int>(get_int(p, "J", s.ops_per_subpolicy, w));
    s.policy_lr = get_number(p, "policy_lr", s.policy_lr, w);
    s.baseline_decay = get_number(p, "baseline_decay", s.baseline_decay, w);
    s.magnitude_noise = get_number(p, "magnitude_noise", s.magnitude_noise, w);
    if (p.contains("pool")) s.pool = op_list(p.at("pool"), "policy.pool");
    if (p.contains("subpolicies")) {
      const auto& subs = p.at("subpolicies");
      if (!subs.is_array() || subs.empty()) throw ValidationError("policy.subpolicies: expected a non-empty array");
      for (const auto& sp : subs) c.policy.subpolicies.push_back(op_list(sp, "policy.subpolicies"));
      s.num_subpolicies = static_cast<int>(c.policy.subpolicies.size());
    }
  }
  c.policy.search.validate();

  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    check_keys(s, {"J_values", "M_values", "fixed_M", "fixed_J"}, "sweep");
    c.sweep.j_values = int_list(s, "J_values", c.sweep.j_values, "sweep");
    c.sweep.m_values = int_list(s, "M_values", c.sweep.m_values, "sweep");
    c.sweep.fixed_magnitude = static_cast<int>(get_int(s, "fixed_M", c.sweep.fixed_magnitude, "sweep"));
    c.sweep.fixed_ops = static_cast<int>(get_int(s, "fixed_J", c.sweep.fixed_ops, "sweep"));
  }
  for (int jv : c.sweep.j_values) {
    RandAugmentConfig r{jv, c.sweep.fixed_magnitude, {kAllOps.begin(), kAllOps.end()}};
    r.validate();
  }
  for (int mv : c.sweep.m_values) {
    RandAugmentConfig r{c.sweep.fixed_ops, mv, {kAllOps.begin(), kAllOps.end()}};
    r.validate();
  }

  if (j.contains("metrics")) {
    const auto& m = j.at("metrics");
    check_keys(m, {"augmentations"}, "metrics");
    if (m.contains("augmentations")) c.metrics_augmentations = m.at("augmentations");
  }
  validate_metric_augmentations(c.metrics_augmentations);

  if (j.contains("out")) c.out = get<std::string>(j, "out", "results", "config");
  const auto threads = get_int(j, "threads", 1, "config");
  if (threads < 1) throw ValidationError("config.threads: must be >= 1");
  c.threads = static_cast<std::size_t>(threads);
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

json RunConfig::canonical() const {
  json j;
  j["version"] = kVersion;
  j["seed"] = seed;
  j["repeats"] = repeats;
  if (dataset.manifest) {
    j["dataset"] = {{"manifest", dataset.manifest->lexically_normal().generic_string()}};
  } else {
    const auto& s = dataset.synthetic;
    j["dataset"] = {{"synthetic",
                     {{"kind", std::string(to_string(s.kind))},
                      {"length", s.length},
                      {"channels", s.channels},
                      {"samples_per_class", s.samples_per_class},
                      {"noise", s.noise},
                      {"seed", s.seed}}}};
  }
  j["train"] = {{"lr0", train.lr0},
                {"lr_decay", train.lr_decay},
                {"decay_every", train.decay_every},
                {"batch_size", train.batch_size},
                {"epochs", train.epochs}};
  json backs = json::array();
  for (auto b : backbones) backs.push_back(std::string(to_string(b)));
  j["backbones"] = backs;
  j["width_multiplier"] = width_multiplier;
  j["magnitude_table"] = load_magnitude_table().to_json();
  j["grid"] = {{"augmentations", grid_augmentations}};
  j["randaugment"] = {{"J", randaugment.num_ops}, {"M", randaugment.magnitude}, {"pool", op_names(randaugment.pool)}};
  const auto& s = policy.search;
  j["policy"] = {{"K", s.num_subpolicies},
                 {"J", s.ops_per_subpolicy},
                 {"policy_lr", s.policy_lr},
                 {"baseline_decay", s.baseline_decay},
                 {"magnitude_noise", s.magnitude_noise},
                 {"pool", op_names(s.pool)}};
  if (!policy.subpolicies.empty()) {
    json subs = json::array();
    for (const auto& sp : policy.subpolicies) subs.push_back(op_names(sp));
    j["policy"]["subpolicies"] = subs;
  }
  j["sweep"] = {{"J_values", sweep.j_values},
                {"M_values", sweep.m_values},
                {"fixed_M", sweep.fixed_magnitude},
                {"fixed_J", sweep.fixed_ops}};
  j["metrics"] = {{"augmentations", metrics_augmentations}};
  return j;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string RunConfig::hash() const { return hex64(fnv1a64(canonical().dump())); }

std::vector<std::uint64_t> RunConfig::seeds() const {
  std::vector<std::uint64_t> out;
  for (int r = 0; r < repeats; ++r) out.push_back(seed + static_cast<std::uint64_t>(r));
  return out;
}

MagnitudeTable RunConfig::load_magnitude_table() const {
  return magnitude_table ? MagnitudeTable::load(*magnitude_table) : MagnitudeTable::builtin();
}

DatasetSplits RunConfig::load_data() const {
  if (dataset.manifest) return load_dataset(DatasetManifest::load(*dataset.manifest));
  return generate_synthetic(dataset.synthetic);
}

ModelSpec RunConfig::model_spec(ModelKind kind, const DatasetSplits& data) const {
  return ModelSpec::make(kind, data.train.length(), data.train.channels(), data.train.num_classes(), width_multiplier);
}

std::vector<AugmentationRef> RunConfig::metric_augmentations(const MagnitudeTable& table) const {
  const auto& spec = metrics_augmentations;
  if (spec.is_string()) {
    if (spec.get<std::string>() == "identity") return {AugmentationRef::identity()};
    return default_sweep(table);
  }
  std::vector<AugmentationRef> out;
  for (const auto& e : spec) {
    const auto name = e.at("op").get<std::string>();
    if (name == "identity") {
      out.push_back(AugmentationRef::identity());
      continue;
    }
    const auto kind = *parse_op(name);
    if (e.contains("level")) {
      out.push_back(AugmentationRef::op_at_level(kind, e.at("level").get<double>(), table));
    } else if (e.contains("params")) {
      out.push_back(AugmentationRef::op(kind, params_from_json(kind, e.at("params"), table, "metrics")));
    } else {
      out.push_back(AugmentationRef::op(kind, table.default_params(kind)));
    }
  }
  return out;
}

}  // namespace tsaug::cli
