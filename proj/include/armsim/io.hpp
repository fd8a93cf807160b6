#pragma once

#include <string>
#include <vector>

namespace armsim::io {

inline constexpr const char* kToolVersion = "armsim 0.1.0";

// FNV-1a, for tagging artifacts with their configuration.
unsigned long long fnv1a(const std::string& text);

// CSV with '#' metadata header lines (tool version, seed, config hash) and a
// named column row. Values are written with full precision.
void write_csv(const std::string& path, const std::vector<std::string>& metadata,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

void write_text(const std::string& path, const std::string& text);

std::string artifact_header(unsigned long long seed, const std::string& config_text);

}  // namespace armsim::io
