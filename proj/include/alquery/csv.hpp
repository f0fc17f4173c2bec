#pragma once

#include "alquery/pool.hpp"
#include "alquery/types.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace alquery {

// Matrix CSV surface: header `id,dim0,...,dim{k-1}[,label][,group]`, UTF-8,
// '.' decimal separator, one row per sample. Doubles are written with
// shortest-round-trip formatting, so write -> read is value-exact.
struct CsvMatrix {
  Matrix values;
  std::vector<SampleId> ids;
  std::optional<std::vector<int>> labels;
  std::optional<std::vector<int>> groups;

  SamplePool to_pool() const;
};

CsvMatrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const CsvMatrix& csv);
CsvMatrix csv_from_pool(const SamplePool& pool);

}  // namespace alquery
