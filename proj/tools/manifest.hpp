#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace hybridspin::cli {

std::string sha256_hex(std::string_view bytes);

/// Collects what one command read and wrote, then emits
/// `<command>.manifest.json` next to the outputs.
class RunManifest {
 public:
  RunManifest(std::string command, std::filesystem::path out_dir);

  void set_config(nlohmann::json resolved) { config_ = std::move(resolved); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  /// Records an input file by content digest; the path itself is not hashed.
  void add_input(std::string_view role, std::string_view contents);
  /// Writes `contents` atomically to out_dir/name and records it.
  void write_output(const std::string& name, std::string_view contents);

  std::string config_hash() const;
  void finish() const;

 private:
  std::string command_;
  std::filesystem::path out_dir_;
  nlohmann::json config_ = nlohmann::json::object();
  nlohmann::json inputs_ = nlohmann::json::array();
  nlohmann::json outputs_ = nlohmann::json::array();
  std::uint64_t seed_ = 0;
};

}  // namespace hybridspin::cli
