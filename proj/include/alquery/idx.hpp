#pragma once

#include "alquery/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace alquery {

// Row-major unsigned 8-bit tensor, the only element type the IDX surface
// supports (sufficient for MNIST/EMNIST and binary masks).
struct RawTensor {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;

  std::size_t element_count() const;
};

// IDX layout: bytes 00 00, element-type byte (0x08 = unsigned 8-bit), ndim
// byte, then ndim big-endian uint32 dimension sizes, then row-major payload.
RawTensor parse_idx(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_idx(const RawTensor& tensor);

RawTensor read_idx_file(const std::filesystem::path& path);
void write_idx_file(const std::filesystem::path& path, const RawTensor& tensor);

// Flattens each leading-dimension sample to a row. Values are scaled to
// [0, 1]; per-sample standardization (zero mean, unit variance) optional.
Matrix tensor_to_matrix(const RawTensor& tensor, bool standardize_rows = false);

}  // namespace alquery
