#include "faacaf/io.hpp"

#include <cstdio>
#include <fstream>

#include "faacaf/types.hpp"
#include "json.hpp"

namespace faacaf {

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeFailure("cannot open file for hashing: " +
                                path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

Manifest::Manifest(std::string config_hash, std::uint64_t seed)
    : config_hash_(std::move(config_hash)), seed_(seed) {}

void Manifest::add_file(const std::filesystem::path& path) {
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a64_file(path)));
  entries_.push_back({path.filename().string(), hash});
}

void Manifest::write(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["tool_version"] = "0.1.0";
  j["config_hash"] = config_hash_;
  j["seed"] = seed_;
  auto& files = j["files"];
  files = nlohmann::json::object();
  for (const auto& [name, hash] : entries_) files[name] = hash;
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write file: " + path.string());
  out << contents;
}

}  // namespace faacaf
