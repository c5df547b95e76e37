#include "tsaug_cli/artifacts.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "tsaug/error.hpp"

namespace tsaug::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string artifact_header(const std::string& config_hash, std::uint64_t seed) {
  return "# config_hash=" + config_hash + " seed=" + std::to_string(seed);
}

std::filesystem::path artifact_path(const std::filesystem::path& dir, const std::string& stem, std::uint64_t seed,
                                    const std::string& ext) {
  return dir / (stem + "_seed" + std::to_string(seed) + "." + ext);
}

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(seeds[i]);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw ValidationError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out << contents;
    if (!out) throw ValidationError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ValidationError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace tsaug::cli
