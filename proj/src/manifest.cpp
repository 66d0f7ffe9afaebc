#include "ntm/manifest.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "ntm/error.hpp"

namespace ntm {

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot hash input: " + path);
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  return h;
}

void RunManifest::add(const std::string& key, double value) {
  std::ostringstream ss;
  ss << std::setprecision(17) << value;
  config.emplace_back(key, ss.str());
}

void RunManifest::add(const std::string& key, std::uint64_t value) {
  config.emplace_back(key, std::to_string(value));
}

void RunManifest::add_input(const std::string& path) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << fnv1a_file(path);
  input_hashes.emplace_back(path, ss.str());
}

void RunManifest::write(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw Error("cannot write manifest: " + path);
  os << "artifact: " << kArtifactVersion << "\n";
  os << "command: " << command << "\n";
  os << "seed: " << seed << "\n";
  os << "wall_seconds: " << std::setprecision(6) << wall_seconds << "\n";
  os << "config:\n";
  for (const auto& [k, v] : config) os << "  " << k << ": " << v << "\n";
  os << "inputs:\n";
  for (const auto& [p, h] : input_hashes) os << "  " << p << " fnv1a64=" << h << "\n";
  os << "outputs:\n";
  for (const auto& o : outputs) os << "  " << o << "\n";
}

}  // namespace ntm
