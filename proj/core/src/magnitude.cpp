#include "tsaug/magnitude.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "tsaug/error.hpp"

namespace tsaug {

const MagnitudeTable& MagnitudeTable::builtin() {
  static const MagnitudeTable table = [] {
    MagnitudeTable t;
    auto set = [&t](AugOpKind kind, MagnitudeRange r) { t.ranges_[static_cast<std::size_t>(kind)] = r; };
    set(AugOpKind::Jitter, {true, 0.0, 0.2, 0.03});
    set(AugOpKind::Scale, {true, 0.0, 0.5, 0.1});
    set(AugOpKind::Rotate, {false, 0.0, 0.0, 0.0});
    set(AugOpKind::Permute, {true, 0.0, 8.0, 5.0});
    set(AugOpKind::MagWarp, {true, 0.0, 0.5, 0.2});
    set(AugOpKind::TimeWarp, {true, 0.0, 0.5, 0.2});
    set(AugOpKind::WindowSlice, {true, 0.5, 1.0, 0.9});
    set(AugOpKind::WindowWarp, {true, 0.0, 0.3, 0.1});
    return t;
  }();
  return table;
}

MagnitudeTable MagnitudeTable::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("version") || j.at("version") != kSchemaVersion) {
    throw ValidationError("magnitude table: expected \"version\": " + std::to_string(kSchemaVersion));
  }
  if (!j.contains("ops") || !j.at("ops").is_object()) throw ValidationError("magnitude table: missing \"ops\" object");
  MagnitudeTable t;
  const auto& ops = j.at("ops");
  for (auto kind : kAllOps) {
    const std::string name(to_string(kind));
    if (!ops.contains(name)) throw ValidationError("magnitude table: missing entry for " + name);
    const auto& entry = ops.at(name);
    MagnitudeRange r;
    if (entry.is_null()) {
      r.has_magnitude = false;
    } else {
      try {
        r.lo = entry.at("range_lo").get<double>();
        r.hi = entry.at("range_hi").get<double>();
        r.default_value = entry.at("default").get<double>();
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError("magnitude table: bad entry for " + name + ": " + e.what());
      }
      if (!(r.lo <= r.hi) || r.default_value < r.lo || r.default_value > r.hi) {
        throw ValidationError("magnitude table: inconsistent range for " + name);
      }
    }
    t.ranges_[static_cast<std::size_t>(kind)] = r;
  }
  return t;
}

MagnitudeTable MagnitudeTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open magnitude table " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("magnitude table " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json MagnitudeTable::to_json() const {
  nlohmann::json ops = nlohmann::json::object();
  for (auto kind : kAllOps) {
    const auto& r = range(kind);
    const std::string name(to_string(kind));
    if (!r.has_magnitude) {
      ops[name] = nullptr;
    } else {
      ops[name] = {{"range_lo", r.lo}, {"range_hi", r.hi}, {"default", r.default_value}};
    }
  }
  return {{"version", kSchemaVersion}, {"ops", ops}};
}

double MagnitudeTable::value_for_level(AugOpKind kind, double level) const {
  if (!(level >= 0.0 && level <= kMaxMagnitudeLevel)) {
    throw ValidationError("magnitude level must lie in [0, 30], got " + std::to_string(level));
  }
  const auto& r = range(kind);
  return r.lo + (level / kMaxMagnitudeLevel) * (r.hi - r.lo);
}

namespace {

OpParams with_value(AugOpKind kind, double value) {
  OpParams p;
  switch (kind) {
    case AugOpKind::Jitter:
    case AugOpKind::Scale:
    case AugOpKind::MagWarp:
    case AugOpKind::TimeWarp:
      p.sigma = value;
      break;
    case AugOpKind::Permute:
      p.num_segments = std::max(1, static_cast<int>(std::lround(value)));
      break;
    case AugOpKind::WindowSlice:
    case AugOpKind::WindowWarp:
      p.window_frac = value;
      break;
    case AugOpKind::Rotate:
      break;
  }
  return p;
}

}  // namespace

OpParams MagnitudeTable::params_for_level(AugOpKind kind, double level) const {
  return with_value(kind, value_for_level(kind, level));
}

OpParams MagnitudeTable::default_params(AugOpKind kind) const { return with_value(kind, range(kind).default_value); }

OpParams fit_to_length(AugOpKind kind, OpParams params, std::size_t length) {
  if (kind == AugOpKind::Permute) {
    params.num_segments = std::clamp(params.num_segments, 1, static_cast<int>(length));
  }
  return params;
}

}  // namespace tsaug
