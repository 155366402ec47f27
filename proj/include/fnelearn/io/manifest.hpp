#pragma once

// Run manifests: one JSON file per artifact-producing command, recording
// enough to replay the run and check its inputs/outputs by content hash.

#include <openssl/evp.h>

#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "fnelearn/errors.hpp"
#include "fnelearn/io/json_io.hpp"

namespace fnelearn::io {

inline constexpr const char* kManifestSchema = "fne-learn/1";

inline std::string read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string sha1_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr) != 1) throw IoError("sha1 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

// Same id `git hash-object` prints.
inline std::string git_blob_sha1(const std::string& content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob += content;
  return sha1_hex(blob);
}

inline std::string git_blob_sha1_file(const std::string& path) { return git_blob_sha1(read_binary_file(path)); }

struct FileRecord {
  std::string path;
  std::string sha1;
};

struct RunManifest {
  std::string command;
  json config = json::object();
  std::vector<FileRecord> inputs;
  std::vector<FileRecord> outputs;
  std::uint64_t seed = 0;
  double seconds = 0.0;

  void add_input(const std::string& path) { inputs.push_back({path, git_blob_sha1_file(path)}); }
  void add_output(const std::string& path) { outputs.push_back({path, git_blob_sha1_file(path)}); }

  json to_json() const {
    auto files = [](const std::vector<FileRecord>& v) {
      json a = json::array();
      for (const auto& f : v) a.push_back({{"path", f.path}, {"sha1", f.sha1}});
      return a;
    };
    return {{"schema", kManifestSchema}, {"command", command}, {"config", config},
            {"inputs", files(inputs)},   {"outputs", files(outputs)}, {"seed", seed},
            {"seconds", seconds}};
  }

  void write(const std::string& path) const { write_json_file(path, to_json()); }
};

inline RunManifest manifest_from_json(const json& j) {
  try {
    if (j.at("schema").get<std::string>() != kManifestSchema) throw IoError("manifest: unknown schema");
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config");
    for (const auto& f : j.at("inputs")) m.inputs.push_back({f.at("path"), f.at("sha1")});
    for (const auto& f : j.at("outputs")) m.outputs.push_back({f.at("path"), f.at("sha1")});
    m.seed = j.at("seed").get<std::uint64_t>();
    m.seconds = j.at("seconds").get<double>();
    return m;
  } catch (const json::exception& e) {
    throw IoError(std::string("manifest: ") + e.what());
  }
}

}  // namespace fnelearn::io
