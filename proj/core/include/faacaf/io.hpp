#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace faacaf {

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

/// Records every emitted artifact with a content hash; written last so the
/// manifest always describes a complete output set.
class Manifest {
 public:
  Manifest(std::string config_hash, std::uint64_t seed);

  void add_file(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;

 private:
  std::string config_hash_;
  std::uint64_t seed_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

void write_text_file(const std::filesystem::path& path,
                     const std::string& contents);

}  // namespace faacaf
