#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "alquery/csv.hpp"
#include "alquery/idx.hpp"
#include "alquery/rng.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace alquery;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("alquery_test_" + name);
}

struct FileGuard {
  std::filesystem::path path;
  ~FileGuard() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("parse_idx reads the hand-encoded one-dimensional example") {
  const std::vector<std::uint8_t> bytes{0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x03, 0x05, 0x00, 0xFF};
  const RawTensor t = parse_idx(bytes);
  CHECK(t.dims == std::vector<std::uint32_t>{3});
  CHECK(t.data == std::vector<std::uint8_t>{5, 0, 255});
}

TEST_CASE("parse_idx rejects malformed streams") {
  const std::vector<std::uint8_t> good{0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x01, 0x2A};

  std::vector<std::uint8_t> bad_magic = good;
  bad_magic[0] = 0x01;
  CHECK_THROWS_AS(parse_idx(bad_magic), FormatError);
  bad_magic = good;
  bad_magic[1] = 0xFF;
  CHECK_THROWS_AS(parse_idx(bad_magic), FormatError);

  std::vector<std::uint8_t> bad_type = good;
  bad_type[2] = 0x0D;  // 32-bit float, unsupported
  CHECK_THROWS_AS(parse_idx(bad_type), FormatError);

  std::vector<std::uint8_t> truncated = good;
  truncated.pop_back();
  CHECK_THROWS_AS(parse_idx(truncated), FormatError);

  std::vector<std::uint8_t> trailing = good;
  trailing.push_back(0x00);
  CHECK_THROWS_AS(parse_idx(trailing), FormatError);
}

TEST_CASE("idx round trip over random tensors") {
  rng::Engine eng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    RawTensor t;
    const std::size_t ndim = 1 + eng.below(4);
    std::size_t total = 1;
    for (std::size_t d = 0; d < ndim; ++d) {
      const std::uint32_t size = 1 + static_cast<std::uint32_t>(eng.below(6));
      t.dims.push_back(size);
      total *= size;
    }
    t.data.resize(total);
    for (auto& b : t.data) b = static_cast<std::uint8_t>(eng.below(256));

    const RawTensor back = parse_idx(serialize_idx(t));
    CHECK(back.dims == t.dims);
    CHECK(back.data == t.data);
  }
}

TEST_CASE("idx file io round trips bytes exactly") {
  const FileGuard guard{temp_file("roundtrip.idx")};
  RawTensor t;
  t.dims = {2, 3};
  t.data = {1, 2, 3, 4, 5, 250};
  write_idx_file(guard.path, t);
  const RawTensor back = read_idx_file(guard.path);
  CHECK(back.dims == t.dims);
  CHECK(back.data == t.data);
}

TEST_CASE("tensor_to_matrix flattens and scales to unit range") {
  RawTensor t;
  t.dims = {2, 2, 2};
  t.data = {0, 255, 51, 102, 255, 255, 0, 0};
  const Matrix m = tensor_to_matrix(t);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 4);
  CHECK(m(0, 0) == doctest::Approx(0.0));
  CHECK(m(0, 1) == doctest::Approx(1.0));
  CHECK(m(0, 2) == doctest::Approx(0.2));
  CHECK(m(1, 3) == doctest::Approx(0.0));
}

TEST_CASE("matrix csv reads a minimal labeled file") {
  const FileGuard guard{temp_file("mini.csv")};
  {
    std::ofstream out(guard.path);
    out << "id,dim0,dim1\n0,1.5,-2\n1,0.25,1e-3\n";
  }
  const CsvMatrix csv = read_matrix_csv(guard.path);
  CHECK(csv.values.rows() == 2);
  CHECK(csv.values.cols() == 2);
  CHECK(csv.values(0, 0) == 1.5);
  CHECK(csv.values(1, 1) == 1e-3);
  CHECK(csv.ids == std::vector<SampleId>{0, 1});
  CHECK_FALSE(csv.labels.has_value());
}

TEST_CASE("matrix csv write then read reproduces values exactly") {
  const FileGuard guard{temp_file("roundtrip.csv")};
  rng::Engine eng(7);
  CsvMatrix csv;
  csv.values.resize(10, 5);
  for (Index r = 0; r < 10; ++r) {
    csv.ids.push_back(r * 3 + 1);
    for (Index c = 0; c < 5; ++c) csv.values(r, c) = eng.normal() * std::pow(10.0, eng.uniform(-8, 8));
  }
  csv.labels = std::vector<int>{0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
  csv.groups = std::vector<int>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  write_matrix_csv(guard.path, csv);
  const CsvMatrix back = read_matrix_csv(guard.path);
  CHECK(back.ids == csv.ids);
  CHECK(back.labels == csv.labels);
  CHECK(back.groups == csv.groups);
  for (Index r = 0; r < 10; ++r) {
    for (Index c = 0; c < 5; ++c) {
      const double rel = std::abs(back.values(r, c) - csv.values(r, c)) /
                         std::max(1.0, std::abs(csv.values(r, c)));
      CHECK(rel < 1e-12);
    }
  }
}

TEST_CASE("matrix csv rejects ragged and malformed rows") {
  const FileGuard guard{temp_file("bad.csv")};
  {
    std::ofstream out(guard.path);
    out << "id,dim0,dim1,dim2\n0,1,2\n";  // 3 cells under a 4-column header
  }
  CHECK_THROWS_AS(read_matrix_csv(guard.path), FormatError);
  {
    std::ofstream out(guard.path, std::ios::trunc);
    out << "id,dim0\n0,abc\n";
  }
  CHECK_THROWS_AS(read_matrix_csv(guard.path), FormatError);
  {
    std::ofstream out(guard.path, std::ios::trunc);
    out << "sample,dim0\n0,1\n";
  }
  CHECK_THROWS_AS(read_matrix_csv(guard.path), FormatError);
  {
    std::ofstream out(guard.path, std::ios::trunc);
    out << "id,dim0,bogus\n0,1,2\n";
  }
  CHECK_THROWS_AS(read_matrix_csv(guard.path), FormatError);
}

TEST_CASE("official MNIST training header parses when the file is present") {
  const char* candidates[] = {"data/train-images-idx3-ubyte", "data/train-images.idx3-ubyte"};
  std::filesystem::path found;
  for (const char* c : candidates) {
    if (std::filesystem::exists(c)) found = c;
  }
  if (const char* env = std::getenv("ALQUERY_MNIST_IMAGES")) {
    if (std::filesystem::exists(env)) found = env;
  }
  if (found.empty()) {
    MESSAGE("MNIST image file not present; skipping");
    return;
  }
  const RawTensor t = read_idx_file(found);
  CHECK(t.dims == std::vector<std::uint32_t>{60000, 28, 28});
}
