#pragma once

#include "alquery/simulate.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace alquery {

inline constexpr const char* kLogSchema = "alquery-log/1";

// JSON log layout: top-level `schema`, `version`, `config`, `exhausted` and
// an `iterations` array of records with `iter`, `queried_ids`, `n_annotated`,
// `entropy`, `g_an_mean`, `g_an_std`, `mmd` and optional `dice`, `msd`.
// Serialization is deterministic, so equal runs produce byte-equal files.
nlohmann::json log_to_json(const ExperimentLog& log);
ExperimentLog log_from_json(const nlohmann::json& j);

std::string serialize_log(const ExperimentLog& log);

void write_log(const std::filesystem::path& path, const ExperimentLog& log);
ExperimentLog read_log(const std::filesystem::path& path);

}  // namespace alquery
