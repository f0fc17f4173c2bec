#include "alquery/metrics.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace alquery {

BinaryMask BinaryMask::from_tensor(const RawTensor& tensor) {
  if (tensor.dims.size() != 3) throw ShapeError("mask: expected a 3-D tensor");
  BinaryMask mask;
  mask.dims = {static_cast<Index>(tensor.dims[0]), static_cast<Index>(tensor.dims[1]),
               static_cast<Index>(tensor.dims[2])};
  mask.voxels.reserve(tensor.data.size());
  for (std::uint8_t v : tensor.data) {
    if (v > 1) throw DataError("mask: payload must be 0/1");
    mask.voxels.push_back(v);
  }
  return mask;
}

std::optional<double> dice(const BinaryMask& m_s, const BinaryMask& m_g) {
  if (m_s.dims != m_g.dims) throw ShapeError("dice: mask dims differ");
  std::size_t n_s = 0, n_g = 0, n_both = 0;
  for (std::size_t i = 0; i < m_s.voxels.size(); ++i) {
    const bool s = m_s.voxels[i] != 0;
    const bool g = m_g.voxels[i] != 0;
    n_s += s;
    n_g += g;
    n_both += s && g;
  }
  if (n_s + n_g == 0) return std::nullopt;  // no foreground anywhere
  return 2.0 * static_cast<double>(n_both) / static_cast<double>(n_s + n_g);
}

ContourSet extract_contour(const BinaryMask& mask) {
  ContourSet contour;
  contour.dims = mask.dims;
  const auto [D, H, W] = mask.dims;
  for (Index d = 0; d < D; ++d) {
    for (Index h = 0; h < H; ++h) {
      for (Index w = 0; w < W; ++w) {
        if (!mask.at(d, h, w)) continue;
        bool survives_erosion = true;
        for (Index dd = d - 1; dd <= d + 1 && survives_erosion; ++dd) {
          for (Index hh = h - 1; hh <= h + 1 && survives_erosion; ++hh) {
            for (Index ww = w - 1; ww <= w + 1 && survives_erosion; ++ww) {
              if (dd < 0 || dd >= D || hh < 0 || hh >= H || ww < 0 || ww >= W || !mask.at(dd, hh, ww)) {
                survives_erosion = false;
              }
            }
          }
        }
        if (!survives_erosion) contour.points.push_back({d, h, w});
      }
    }
  }
  return contour;
}

namespace {

double min_distance(const std::array<Index, 3>& p, const std::vector<std::array<Index, 3>>& set,
                    const std::array<double, 3>& spacing) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : set) {
    const double dz = static_cast<double>(p[0] - q[0]) * spacing[0];
    const double dy = static_cast<double>(p[1] - q[1]) * spacing[1];
    const double dx = static_cast<double>(p[2] - q[2]) * spacing[2];
    best = std::min(best, dz * dz + dy * dy + dx * dx);
  }
  return std::sqrt(best);
}

}  // namespace

double msd(const ContourSet& c_s, const ContourSet& c_g, const std::array<double, 3>& spacing) {
  if (c_s.points.empty() || c_g.points.empty()) throw DataError("msd: empty contour has no distance");
  double forward = 0.0;
  double backward = 0.0;
  for (const auto& p : c_s.points) forward += min_distance(p, c_g.points, spacing);
  for (const auto& p : c_g.points) backward += min_distance(p, c_s.points, spacing);
  return (forward + backward) / static_cast<double>(c_s.points.size() + c_g.points.size());
}

double class_entropy(std::span<const int> labels, double log_base) {
  if (labels.empty()) throw ConfigError("entropy: empty label set");
  std::map<int, std::size_t> counts;
  for (int l : labels) ++counts[l];
  const double n = static_cast<double>(labels.size());
  double h = 0.0;
  for (const auto& [label, count] : counts) {
    const double p = static_cast<double>(count) / n;
    if (p > 0.0) h -= p * std::log(p);
  }
  if (log_base > 0.0) h /= std::log(log_base);
  return h;
}

}  // namespace alquery
