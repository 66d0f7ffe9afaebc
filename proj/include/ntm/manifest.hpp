#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ntm {

inline constexpr const char* kArtifactVersion = "ntm-0.1.0";

// One manifest per artifact-producing run; the recorded config is the fully
// resolved one, sufficient to reproduce the run.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;  // insertion order kept
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> input_hashes;  // path -> fnv1a64 hex
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;

  void add(const std::string& key, const std::string& value) { config.emplace_back(key, value); }
  void add(const std::string& key, double value);
  void add(const std::string& key, std::uint64_t value);
  void add_input(const std::string& path);  // hashes the file
  void write(const std::string& path) const;
};

std::uint64_t fnv1a_file(const std::string& path);

}  // namespace ntm
