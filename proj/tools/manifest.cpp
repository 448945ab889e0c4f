#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

#include "hybridspin/io.hpp"
#include "hybridspin/random.hpp"

namespace hybridspin::cli {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

RunManifest::RunManifest(std::string command, std::filesystem::path out_dir)
    : command_(std::move(command)), out_dir_(std::move(out_dir)) {
  std::filesystem::create_directories(out_dir_);
}

void RunManifest::add_input(std::string_view role, std::string_view contents) {
  inputs_.push_back({{"role", role}, {"sha256", sha256_hex(contents)}});
}

void RunManifest::write_output(const std::string& name, std::string_view contents) {
  io::write_file_atomic(out_dir_ / name, contents);
  outputs_.push_back({{"file", name}, {"sha256", sha256_hex(contents)}});
}

std::string RunManifest::config_hash() const {
  // nlohmann::json keeps object keys sorted, and doubles print as shortest
  // round-trip decimals, so this text is platform independent.
  const nlohmann::json canonical{{"command", command_}, {"config", config_}, {"inputs", inputs_}, {"seed", seed_}};
  return sha256_hex(canonical.dump());
}

void RunManifest::finish() const {
  const nlohmann::json manifest{{"command", command_},
                                {"version", HYBRIDSPIN_VERSION},
                                {"seed", seed_},
                                {"rng_algorithm", rng::kAlgorithm},
                                {"config_hash", config_hash()},
                                {"config", config_},
                                {"inputs", inputs_},
                                {"outputs", outputs_}};
  io::write_file_atomic(out_dir_ / (command_ + ".manifest.json"), manifest.dump(2) + "\n");
}

}  // namespace hybridspin::cli
