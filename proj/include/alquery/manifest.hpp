#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace alquery {

// Replay record written atomically next to every command output.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, std::string> config;  // fully resolved settings
  std::uint64_t seed = 0;
};

// Writes `<output>.manifest.json` beside the named output (temp file +
// rename, so readers never observe a partial manifest).
void write_manifest(const std::filesystem::path& output_path, const RunManifest& manifest);

std::filesystem::path manifest_path_for(const std::filesystem::path& output_path);

}  // namespace alquery
