#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <nlohmann/json.hpp>

#include "copred/common.hpp"

namespace copred {

inline std::string sha1_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    fail_runtime("sha1 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

// Git blob hash of a file's bytes: sha1("blob <size>\0<content>").
inline std::string git_blob_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_validation("cannot open input for hashing: ", path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob += content;
  return sha1_hex(blob);
}

// One manifest per run: the command, the fully resolved configuration, the
// seed, and content hashes of every input. Deterministic commands re-run
// from an identical manifest produce identical outputs.
struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;  // path -> git blob hash
  std::vector<std::string> outputs;

  void add_input(const std::string& path) { inputs.emplace_back(path, git_blob_hash(path)); }
  void add_output(const std::string& path) { outputs.push_back(path); }

  nlohmann::json to_json() const {
    nlohmann::json in = nlohmann::json::object();
    for (const auto& [path, hash] : inputs) in[path] = hash;
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    return {{"format", "copred.manifest.v1"}, {"command", command}, {"config", config},
            {"seed", seed},                   {"inputs", in},       {"outputs", outputs},
            {"timestamp", stamp}};
  }

  void write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) fail_runtime("cannot write manifest: ", path);
    out << to_json().dump(2) << '\n';
  }
};

}  // namespace copred
