#include "alquery/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace alquery {

PredictionStack::PredictionStack(std::vector<Matrix> slices, SampleId sample_id)
    : slices_(std::move(slices)), sample_id_(sample_id) {
  if (slices_.size() < 2) throw ConfigError("prediction stack: need at least two stochastic passes");
  const Index pixels = slices_.front().rows();
  const Index labels = slices_.front().cols();
  if (pixels < 1 || labels < 1) throw ShapeError("prediction stack: empty slice");
  for (const Matrix& s : slices_) {
    if (s.rows() != pixels || s.cols() != labels) throw ShapeError("prediction stack: ragged slices");
    if (!s.allFinite() || (s.array() < 0.0).any() || (s.array() > 1.0).any()) {
      throw DataError("prediction stack: values must lie in [0, 1]");
    }
  }
}

double label_uncertainty(const PredictionStack& stack, Index label, bool binarize_first) {
  if (label < 0 || label >= stack.n_labels()) throw ConfigError("uncertainty: label index out of range");
  const Index n_mc = stack.n_mc();
  const Index n_pixels = stack.n_pixels();

  Vector mean = Vector::Zero(n_pixels);
  for (Index m = 0; m < n_mc; ++m) {
    if (binarize_first) {
      mean += (stack.slice(m).col(label).array() >= 0.5).cast<double>().matrix();
    } else {
      mean += stack.slice(m).col(label);
    }
  }
  mean /= static_cast<double>(n_mc);

  Vector var = Vector::Zero(n_pixels);
  for (Index m = 0; m < n_mc; ++m) {
    Vector v = binarize_first ? Vector((stack.slice(m).col(label).array() >= 0.5).cast<double>().matrix())
                              : Vector(stack.slice(m).col(label));
    var += (v - mean).cwiseAbs2();
  }
  var /= static_cast<double>(n_mc);  // population variance
  return var.mean();
}

double multiclass_uncertainty(std::span<const double> per_label) {
  if (per_label.empty()) throw ConfigError("uncertainty: empty per-label vector");
  return std::accumulate(per_label.begin(), per_label.end(), 0.0) / static_cast<double>(per_label.size());
}

double multiclass_uncertainty(const PredictionStack& stack, bool binarize_first) {
  std::vector<double> per_label(static_cast<std::size_t>(stack.n_labels()));
  for (Index l = 0; l < stack.n_labels(); ++l) {
    per_label[static_cast<std::size_t>(l)] = label_uncertainty(stack, l, binarize_first);
  }
  return multiclass_uncertainty(per_label);
}

std::vector<Index> top_k_uncertain(const Vector& scores, Index k) {
  if (k < 1) throw ConfigError("top-k: k must be >= 1");
  std::vector<Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return a < b;
  });
  order.resize(static_cast<std::size_t>(std::min<Index>(k, scores.size())));
  return order;
}

Vector image_descriptor(std::span<const double> features, Index height, Index width, Index channels) {
  if (height < 1 || width < 1 || channels < 1) throw ShapeError("descriptor: dims must be >= 1");
  if (static_cast<Index>(features.size()) != height * width * channels) {
    throw ShapeError("descriptor: feature size does not match dims");
  }
  Vector out = Vector::Zero(channels);
  for (Index h = 0; h < height; ++h) {
    for (Index w = 0; w < width; ++w) {
      for (Index c = 0; c < channels; ++c) {
        out(c) += features[static_cast<std::size_t>((h * width + w) * channels + c)];
      }
    }
  }
  return out / static_cast<double>(height * width);
}

std::vector<Index> greedy_set_cover(const Matrix& candidates, const Matrix& universe, Index n_rep) {
  const Index n_cand = candidates.rows();
  const Index n_universe = universe.rows();
  if (n_cand == 0) throw ConfigError("set-cover: empty candidate set");
  if (candidates.cols() != universe.cols()) throw ShapeError("set-cover: descriptor dimension mismatch");
  n_rep = std::min(n_rep, n_cand);

  Matrix sim(n_universe, n_cand);
  for (Index j = 0; j < n_cand; ++j) {
    for (Index i = 0; i < n_universe; ++i) sim(i, j) = cosine_sim(universe.row(i), candidates.row(j));
  }

  std::vector<Index> selected;
  selected.reserve(static_cast<std::size_t>(n_rep));
  std::vector<bool> taken(static_cast<std::size_t>(n_cand), false);
  Vector best_sim = Vector::Constant(n_universe, -std::numeric_limits<double>::infinity());
  for (Index step = 0; step < n_rep; ++step) {
    Index best = -1;
    double best_value = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < n_cand; ++j) {
      if (taken[static_cast<std::size_t>(j)]) continue;
      const double value = best_sim.cwiseMax(sim.col(j)).sum();
      if (value > best_value) {
        best_value = value;
        best = j;
      }
    }
    taken[static_cast<std::size_t>(best)] = true;
    best_sim = best_sim.cwiseMax(sim.col(best));
    selected.push_back(best);
  }
  return selected;
}

namespace {

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::map<SampleId, PredictionStack> read_prediction_stacks_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("stacks: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("stacks: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "sample_id,mc_index,pixel_index,label,probability") {
    throw FormatError("stacks: unexpected header '" + line + "'");
  }

  struct Cell {
    Index mc, pixel, label;
    double p;
  };
  std::map<SampleId, std::vector<Cell>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_cells(line);
    if (cells.size() != 5) throw FormatError("stacks: line " + std::to_string(line_no) + " needs 5 cells");
    try {
      rows[std::stoll(cells[0])].push_back(
          {std::stoll(cells[1]), std::stoll(cells[2]), std::stoll(cells[3]), std::stod(cells[4])});
    } catch (const std::exception&) {
      throw FormatError("stacks: line " + std::to_string(line_no) + " is not numeric");
    }
  }

  std::map<SampleId, PredictionStack> stacks;
  for (auto& [id, cells] : rows) {
    Index n_mc = 0, n_pixels = 0, n_labels = 0;
    for (const Cell& c : cells) {
      n_mc = std::max(n_mc, c.mc + 1);
      n_pixels = std::max(n_pixels, c.pixel + 1);
      n_labels = std::max(n_labels, c.label + 1);
    }
    if (static_cast<Index>(cells.size()) != n_mc * n_pixels * n_labels) {
      throw FormatError("stacks: incomplete stack for sample " + std::to_string(id));
    }
    std::vector<Matrix> slices(static_cast<std::size_t>(n_mc),
                               Matrix::Constant(n_pixels, n_labels, std::numeric_limits<double>::quiet_NaN()));
    for (const Cell& c : cells) {
      if (c.mc < 0 || c.pixel < 0 || c.label < 0) throw FormatError("stacks: negative index");
      slices[static_cast<std::size_t>(c.mc)](c.pixel, c.label) = c.p;
    }
    for (const Matrix& s : slices) {
      if (!s.allFinite()) throw FormatError("stacks: duplicate or missing cell for sample " + std::to_string(id));
    }
    stacks.emplace(id, PredictionStack(std::move(slices), id));
  }
  return stacks;
}

void write_prediction_stacks_csv(const std::filesystem::path& path, std::span<const PredictionStack> stacks) {
  std::string out = "sample_id,mc_index,pixel_index,label,probability\n";
  char buf[32];
  for (const PredictionStack& stack : stacks) {
    for (Index m = 0; m < stack.n_mc(); ++m) {
      for (Index p = 0; p < stack.n_pixels(); ++p) {
        for (Index l = 0; l < stack.n_labels(); ++l) {
          out += std::to_string(stack.sample_id()) + ',' + std::to_string(m) + ',' + std::to_string(p) + ',' +
                 std::to_string(l) + ',';
          const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), stack.slice(m)(p, l));
          (void)ec;
          out.append(buf, static_cast<std::size_t>(ptr - buf));
          out += '\n';
        }
      }
    }
  }
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("stacks: cannot write " + path.string());
  file << out;
  if (!file) throw IoError("stacks: write failed for " + path.string());
}

}  // namespace alquery
