#include "tsaug/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsaug/error.hpp"
#include "tsaug/rng.hpp"

namespace tsaug {
namespace {

void append_double(std::string& out, double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), res.ptr);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

void write_csv(const Dataset& d, std::ostream& out) {
  std::string line = "series_id,label,t";
  for (std::size_t c = 0; c < std::max<std::size_t>(d.channels(), 1); ++c) line += ",ch" + std::to_string(c);
  out << line << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& s = d[i];
    const std::string prefix =
        std::to_string(i) + "," + (s.label() ? std::to_string(*s.label()) : std::string()) + ",";
    for (std::size_t t = 0; t < s.length(); ++t) {
      line = prefix + std::to_string(t);
      for (double v : s.row(t)) {
        line += ',';
        append_double(line, v);
      }
      out << line << '\n';
    }
  }
}

void save_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  write_csv(d, out);
  if (!out) throw ValidationError("failed writing " + path.string());
}

Dataset read_csv(std::istream& in, const CsvOptions& options, std::string_view source) {
  const std::string where(source);
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) -> ValidationError {
    return ValidationError(where + ":" + std::to_string(line_no) + ": " + msg);
  };

  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (!body.empty() && body.front() != '#') {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw ValidationError(where + ": empty file");
  const auto header = split_fields(trim(line));
  if (header.size() < 4 || trim(header[0]) != "series_id" || trim(header[1]) != "label" || trim(header[2]) != "t") {
    throw fail("header must be series_id,label,t,ch0,...");
  }
  const std::size_t channels = header.size() - 3;
  for (std::size_t c = 0; c < channels; ++c) {
    if (trim(header[3 + c]) != "ch" + std::to_string(c)) throw fail("expected column ch" + std::to_string(c));
  }
  if (options.channels && *options.channels != channels) {
    throw fail("file has " + std::to_string(channels) + " channels, expected " + std::to_string(*options.channels));
  }

  struct Pending {
    std::string id;
    std::optional<int> label;
    std::vector<double> values;
    std::size_t steps = 0;
    std::size_t first_line = 0;
  };
  std::vector<Pending> series;
  std::unordered_set<std::string> seen;

  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = split_fields(body);
    if (fields.size() != 3 + channels) {
      throw fail("expected " + std::to_string(3 + channels) + " fields, found " + std::to_string(fields.size()));
    }
    const std::string id(trim(fields[0]));
    if (id.empty()) throw fail("empty series_id");
    std::optional<int> label;
    if (!trim(fields[1]).empty()) {
      int v = 0;
      if (!parse_number(fields[1], v) || v < 0) throw fail("bad label '" + std::string(fields[1]) + "'");
      if (options.num_classes != 0 && static_cast<std::size_t>(v) >= options.num_classes) {
        throw fail("unknown label " + std::to_string(v) + " (num_classes " + std::to_string(options.num_classes) + ")");
      }
      label = v;
    }
    std::size_t t = 0;
    if (!parse_number(fields[2], t)) throw fail("bad time index '" + std::string(fields[2]) + "'");

    if (series.empty() || series.back().id != id) {
      if (!seen.insert(id).second) throw fail("rows of series " + id + " are not contiguous");
      series.push_back({id, label, {}, 0, line_no});
    }
    auto& cur = series.back();
    if (cur.label != label) throw fail("series " + id + " changes label mid-series");
    if (t != cur.steps) {
      throw fail("series " + id + ": expected t=" + std::to_string(cur.steps) + ", found t=" + std::to_string(t));
    }
    for (std::size_t c = 0; c < channels; ++c) {
      double v = 0.0;
      if (!parse_number(fields[3 + c], v) || !std::isfinite(v)) {
        throw fail("bad value '" + std::string(fields[3 + c]) + "' in column ch" + std::to_string(c));
      }
      cur.values.push_back(v);
    }
    ++cur.steps;
  }

  std::vector<TimeSeries> samples;
  samples.reserve(series.size());
  std::size_t max_label = 0;
  for (auto& p : series) {
    const std::size_t expected = options.length.value_or(series.front().steps);
    if (p.steps != expected) {
      throw ValidationError(where + ": series " + p.id + " has " + std::to_string(p.steps) + " steps, expected T=" +
                            std::to_string(expected));
    }
    if (p.label) max_label = std::max(max_label, static_cast<std::size_t>(*p.label));
    try {
      samples.emplace_back(p.steps, channels, std::move(p.values), p.label);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": series " + p.id + ": " + e.what());
    }
  }
  const std::size_t classes = options.num_classes != 0 ? options.num_classes : max_label + 1;
  return Dataset(std::move(samples), classes, options.split);
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return read_csv(in, options, path.string());
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("manifest " + path.string() + ": " + e.what());
  }
  DatasetManifest m;
  try {
    if (j.at("version").get<int>() != kVersion) throw ValidationError("manifest: unsupported version");
    m.name = j.at("name").get<std::string>();
    m.length = j.at("T").get<std::size_t>();
    m.channels = j.at("C").get<std::size_t>();
    m.num_classes = j.at("num_classes").get<std::size_t>();
    const auto base = path.parent_path();
    m.train_path = base / j.at("train").get<std::string>();
    m.val_path = base / j.at("val").get<std::string>();
    m.test_path = base / j.at("test").get<std::string>();
    m.normalize = j.value("normalize", true);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("manifest " + path.string() + ": " + e.what());
  }
  if (m.length < 2 || m.channels < 1 || m.num_classes < 1) {
    throw ValidationError("manifest " + path.string() + ": T >= 2, C >= 1 and num_classes >= 1 required");
  }
  return m;
}

void DatasetManifest::save(const std::filesystem::path& path) const {
  const auto base = path.parent_path();
  auto rel = [&](const std::filesystem::path& p) { return p.lexically_relative(base).generic_string(); };
  const nlohmann::json j = {{"version", kVersion}, {"name", name},         {"T", length},
                            {"C", channels},       {"num_classes", num_classes}, {"train", rel(train_path)},
                            {"val", rel(val_path)}, {"test", rel(test_path)},    {"normalize", normalize}};
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

DatasetSplits load_dataset(const DatasetManifest& manifest) {
  auto load = [&](const std::filesystem::path& p, Split split) {
    return load_csv(p, CsvOptions{manifest.length, manifest.channels, manifest.num_classes, split});
  };
  DatasetSplits splits{load(manifest.train_path, Split::Train), load(manifest.val_path, Split::Val),
                       load(manifest.test_path, Split::Test)};
  if (manifest.normalize) {
    const auto stats = fit_zscore(splits.train);
    splits.train = apply_zscore(splits.train, stats);
    splits.val = apply_zscore(splits.val, stats);
    splits.test = apply_zscore(splits.test, stats);
  }
  return splits;
}

std::string_view to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::SineVsFrequency: return "sine-vs-frequency";
    case SyntheticKind::TrendVsFlat: return "trend-vs-flat";
    case SyntheticKind::SignOfMean: return "sign-of-mean";
  }
  return "unknown";
}

std::optional<SyntheticKind> parse_synthetic_kind(std::string_view name) {
  for (auto k : {SyntheticKind::SineVsFrequency, SyntheticKind::TrendVsFlat, SyntheticKind::SignOfMean}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

void SyntheticSpec::validate() const {
  if (length < 2 || channels < 1 || samples_per_class < 1) {
    throw ValidationError("synthetic spec needs T >= 2, C >= 1 and at least one sample per class");
  }
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ValidationError("synthetic noise must be finite and >= 0");
}

namespace {

TimeSeries synthesize(const SyntheticSpec& spec, int cls, RngStream rng) {
  const std::size_t n = spec.length;
  std::vector<double> values(n * spec.channels);
  const double len = static_cast<double>(n);
  for (std::size_t t = 0; t < n; ++t) {
    double base = 0.0;
    switch (spec.kind) {
      case SyntheticKind::SineVsFrequency: {
        const double f = cls == 0 ? 2.0 : 5.0;
        base = std::sin(2.0 * std::numbers::pi * f * static_cast<double>(t) / len);
        break;
      }
      case SyntheticKind::TrendVsFlat:
        base = cls == 0 ? 0.0 : 2.0 * static_cast<double>(t) / static_cast<double>(n - 1) - 1.0;
        break;
      case SyntheticKind::SignOfMean:
        base = cls == 0 ? -0.5 : 0.5;
        break;
    }
    for (std::size_t c = 0; c < spec.channels; ++c) values[t * spec.channels + c] = base + rng.normal(0.0, spec.noise);
  }
  int label = cls;
  if (spec.kind == SyntheticKind::SignOfMean) {
    double sum = 0.0;
    for (double v : values) sum += v;
    label = sum > 0.0 ? 1 : 0;
  }
  return TimeSeries(n, spec.channels, std::move(values), label);
}

}  // namespace

DatasetSplits generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const RngStream root(spec.seed, 0x5EED);
  std::array<std::vector<TimeSeries>, 3> parts;
  const std::size_t n = spec.samples_per_class;
  const auto n_train = static_cast<std::size_t>(std::llround(0.6 * static_cast<double>(n)));
  const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(n))));
  for (int cls = 0; cls < 2; ++cls) {
    const RngStream class_rng = root.derive(static_cast<std::uint64_t>(cls));
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t part = j < n_train ? 0 : (j < n_train + n_val ? 1 : 2);
      parts[part].push_back(synthesize(spec, cls, class_rng.derive(j)));
    }
  }
  for (std::size_t p = 0; p < parts.size(); ++p) {
    RngStream shuffle = root.derive(100 + p);
    auto& v = parts[p];
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[shuffle.uniform_index(i)]);
  }
  return {Dataset(std::move(parts[0]), 2, Split::Train), Dataset(std::move(parts[1]), 2, Split::Val),
          Dataset(std::move(parts[2]), 2, Split::Test)};
}

std::filesystem::path save_dataset(const DatasetSplits& splits, const std::filesystem::path& dir,
                                   const std::string& name, bool normalize) {
  std::filesystem::create_directories(dir);
  DatasetManifest m;
  m.name = name;
  m.length = splits.train.length();
  m.channels = splits.train.channels();
  m.num_classes = splits.train.num_classes();
  m.train_path = dir / (name + "_train.csv");
  m.val_path = dir / (name + "_val.csv");
  m.test_path = dir / (name + "_test.csv");
  m.normalize = normalize;
  save_csv(splits.train, m.train_path);
  save_csv(splits.val, m.val_path);
  save_csv(splits.test, m.test_path);
  const auto manifest_path = dir / (name + ".json");
  m.save(manifest_path);
  return manifest_path;
}

}  // namespace tsaug
