#include "alquery/idx.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace alquery {

namespace {
constexpr std::uint8_t kU8Type = 0x08;
constexpr std::size_t kMaxElements = 1ull << 31;  // refuse absurd headers before allocating
}  // namespace

std::size_t RawTensor::element_count() const {
  std::size_t n = 1;
  for (std::uint32_t d : dims) n *= d;
  return n;
}

RawTensor parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw FormatError("idx: stream shorter than header");
  if (bytes[0] != 0x00 || bytes[1] != 0x00) throw FormatError("idx: bad magic prefix");
  if (bytes[2] != kU8Type) throw FormatError("idx: unsupported element type");
  const std::size_t ndim = bytes[3];
  if (ndim == 0) throw FormatError("idx: zero-dimensional tensor");
  if (bytes.size() < 4 + 4 * ndim) throw FormatError("idx: truncated dimension table");

  RawTensor tensor;
  tensor.dims.resize(ndim);
  std::size_t total = 1;
  for (std::size_t d = 0; d < ndim; ++d) {
    const std::size_t off = 4 + 4 * d;
    const std::uint32_t size = (static_cast<std::uint32_t>(bytes[off]) << 24) |
                               (static_cast<std::uint32_t>(bytes[off + 1]) << 16) |
                               (static_cast<std::uint32_t>(bytes[off + 2]) << 8) |
                               static_cast<std::uint32_t>(bytes[off + 3]);
    if (size == 0) throw FormatError("idx: zero-sized dimension");
    tensor.dims[d] = size;
    total *= size;
    if (total > kMaxElements) throw FormatError("idx: tensor too large");
  }

  const std::size_t payload_off = 4 + 4 * ndim;
  if (bytes.size() < payload_off + total) throw FormatError("idx: truncated payload");
  if (bytes.size() > payload_off + total) throw FormatError("idx: trailing bytes after payload");
  tensor.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(payload_off), bytes.end());
  return tensor;
}

std::vector<std::uint8_t> serialize_idx(const RawTensor& tensor) {
  if (tensor.dims.empty() || tensor.dims.size() > 255) throw FormatError("idx: ndim must be in [1, 255]");
  for (std::uint32_t d : tensor.dims) {
    if (d == 0) throw FormatError("idx: zero-sized dimension");
  }
  if (tensor.element_count() != tensor.data.size()) throw FormatError("idx: dims do not match payload size");

  std::vector<std::uint8_t> out;
  out.reserve(4 + 4 * tensor.dims.size() + tensor.data.size());
  out.push_back(0x00);
  out.push_back(0x00);
  out.push_back(kU8Type);
  out.push_back(static_cast<std::uint8_t>(tensor.dims.size()));
  for (std::uint32_t d : tensor.dims) {
    out.push_back(static_cast<std::uint8_t>((d >> 24) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((d >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((d >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>(d & 0xFF));
  }
  out.insert(out.end(), tensor.data.begin(), tensor.data.end());
  return out;
}

RawTensor read_idx_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("idx: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_idx(bytes);
}

void write_idx_file(const std::filesystem::path& path, const RawTensor& tensor) {
  const std::vector<std::uint8_t> bytes = serialize_idx(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("idx: cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("idx: write failed for " + path.string());
}

Matrix tensor_to_matrix(const RawTensor& tensor, bool standardize_rows) {
  const Index rows = static_cast<Index>(tensor.dims[0]);
  const Index cols = static_cast<Index>(tensor.element_count() / tensor.dims[0]);
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      m(r, c) = static_cast<double>(tensor.data[static_cast<std::size_t>(r * cols + c)]) / 255.0;
    }
  }
  if (standardize_rows) {
    for (Index r = 0; r < rows; ++r) {
      const double mean = m.row(r).mean();
      const double var = (m.row(r).array() - mean).square().mean();
      const double std = std::sqrt(var);
      m.row(r).array() -= mean;
      if (std > 0.0) m.row(r).array() /= std;
    }
  }
  return m;
}

}  // namespace alquery
