#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tsaug::cli {

// Shortest round-trip decimal; "nan" / "inf" / "-inf" for non-finite values.
std::string format_number(double v);

// `# config_hash=<hex> seed=<S>`
std::string artifact_header(const std::string& config_hash, std::uint64_t seed);

// <dir>/<stem>_seed<S>.<ext>
std::filesystem::path artifact_path(const std::filesystem::path& dir, const std::string& stem, std::uint64_t seed,
                                    const std::string& ext);

std::string join_seeds(const std::vector<std::uint64_t>& seeds);

// Writes via a temporary sibling and a rename. Throws ValidationError on I/O
// failure.
void write_text(const std::filesystem::path& path, const std::string& contents);

}  // namespace tsaug::cli
