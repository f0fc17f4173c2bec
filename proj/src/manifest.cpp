#include "alquery/manifest.hpp"

#include "alquery/types.hpp"
#include "alquery/version.hpp"

#include <json.hpp>

#include <fstream>

namespace alquery {

std::filesystem::path manifest_path_for(const std::filesystem::path& output_path) {
  std::filesystem::path p = output_path;
  p += ".manifest.json";
  return p;
}

void write_manifest(const std::filesystem::path& output_path, const RunManifest& manifest) {
  nlohmann::json j;
  j["command"] = manifest.command;
  j["version"] = kVersion;
  j["seed"] = manifest.seed;
  j["inputs"] = manifest.inputs;
  j["outputs"] = manifest.outputs;
  j["config"] = manifest.config;

  const std::filesystem::path dest = manifest_path_for(output_path);
  std::filesystem::path tmp = dest;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("manifest: cannot write " + tmp.string());
    out << j.dump(2) << "\n";
    if (!out) throw IoError("manifest: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, dest);
}

}  // namespace alquery
