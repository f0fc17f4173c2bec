#include "alquery/csv.hpp"

#include <charconv>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace alquery {

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

double parse_double(std::string_view cell, std::size_t line_no) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw FormatError("csv: line " + std::to_string(line_no) + ": cell '" + std::string(cell) + "' is not numeric");
  }
  return value;
}

long long parse_int(std::string_view cell, std::size_t line_no) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw FormatError("csv: line " + std::to_string(line_no) + ": cell '" + std::string(cell) + "' is not an integer");
  }
  return value;
}

void append_double(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, static_cast<std::size_t>(ptr - buf));
  (void)ec;
}

}  // namespace

SamplePool CsvMatrix::to_pool() const {
  return create_pool(values, labels, groups, ids);
}

CsvMatrix csv_from_pool(const SamplePool& pool) {
  CsvMatrix csv;
  csv.values = pool.embeddings;
  csv.ids = pool.sample_ids;
  if (pool.has_labels()) csv.labels = pool.labels;
  if (pool.has_groups()) csv.groups = pool.groups;
  return csv;
}

CsvMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("csv: cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw FormatError("csv: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string_view> header = split_line(line);
  if (header.empty() || header[0] != "id") throw FormatError("csv: header must start with 'id'");
  std::size_t n_dims = 0;
  std::size_t col = 1;
  while (col < header.size() && header[col] == "dim" + std::to_string(n_dims)) {
    ++n_dims;
    ++col;
  }
  if (n_dims == 0) throw FormatError("csv: header declares no dim columns");
  bool has_label = false;
  bool has_group = false;
  if (col < header.size() && header[col] == "label") {
    has_label = true;
    ++col;
  }
  if (col < header.size() && header[col] == "group") {
    has_group = true;
    ++col;
  }
  if (col != header.size()) throw FormatError("csv: unrecognized header column '" + std::string(header[col]) + "'");
  const std::size_t n_cols = col;

  std::vector<SampleId> ids;
  std::vector<double> values;
  std::vector<int> labels;
  std::vector<int> groups;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string_view> cells = split_line(line);
    if (cells.size() != n_cols) {
      throw FormatError("csv: line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(n_cols));
    }
    ids.push_back(parse_int(cells[0], line_no));
    for (std::size_t d = 0; d < n_dims; ++d) values.push_back(parse_double(cells[1 + d], line_no));
    if (has_label) labels.push_back(static_cast<int>(parse_int(cells[1 + n_dims], line_no)));
    if (has_group) groups.push_back(static_cast<int>(parse_int(cells[1 + n_dims + (has_label ? 1 : 0)], line_no)));
  }
  if (ids.empty()) throw FormatError("csv: no data rows");

  CsvMatrix csv;
  const Index rows = static_cast<Index>(ids.size());
  const Index cols = static_cast<Index>(n_dims);
  csv.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, cols);
  csv.ids = std::move(ids);
  if (has_label) csv.labels = std::move(labels);
  if (has_group) csv.groups = std::move(groups);
  return csv;
}

void write_matrix_csv(const std::filesystem::path& path, const CsvMatrix& csv) {
  const Index rows = csv.values.rows();
  const Index cols = csv.values.cols();
  if (static_cast<Index>(csv.ids.size()) != rows) throw ShapeError("csv: id count does not match rows");
  if (csv.labels && static_cast<Index>(csv.labels->size()) != rows) throw ShapeError("csv: label count does not match rows");
  if (csv.groups && static_cast<Index>(csv.groups->size()) != rows) throw ShapeError("csv: group count does not match rows");

  std::string out;
  out += "id";
  for (Index d = 0; d < cols; ++d) out += ",dim" + std::to_string(d);
  if (csv.labels) out += ",label";
  if (csv.groups) out += ",group";
  out += '\n';
  for (Index r = 0; r < rows; ++r) {
    out += std::to_string(csv.ids[static_cast<std::size_t>(r)]);
    for (Index c = 0; c < cols; ++c) {
      out += ',';
      append_double(out, csv.values(r, c));
    }
    if (csv.labels) out += ',' + std::to_string((*csv.labels)[static_cast<std::size_t>(r)]);
    if (csv.groups) out += ',' + std::to_string((*csv.groups)[static_cast<std::size_t>(r)]);
    out += '\n';
  }

  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("csv: cannot write " + path.string());
  file << out;
  if (!file) throw IoError("csv: write failed for " + path.string());
}

}  // namespace alquery
