#pragma once

#include "alquery/idx.hpp"
#include "alquery/types.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace alquery {

// 3-D binary mask, row-major over (depth, height, width).
struct BinaryMask {
  std::array<Index, 3> dims{};  // D, H, W
  std::vector<std::uint8_t> voxels;

  static BinaryMask from_tensor(const RawTensor& tensor);

  Index volume() const { return dims[0] * dims[1] * dims[2]; }
  bool at(Index d, Index h, Index w) const {
    return voxels[static_cast<std::size_t>((d * dims[1] + h) * dims[2] + w)] != 0;
  }
};

struct ContourSet {
  std::array<Index, 3> dims{};
  std::vector<std::array<Index, 3>> points;
};

// Overlap coefficient 2|S n G| / (|S| + |G|). Empty-vs-empty has no defined
// value and returns nullopt.
std::optional<double> dice(const BinaryMask& m_s, const BinaryMask& m_g);

// Mask minus its erosion under the full 3x3x3 structuring element;
// outside-volume neighborhoods count as background, so foreground voxels on
// the volume border are always contour.
ContourSet extract_contour(const BinaryMask& mask);

// Symmetric mean closest-point distance between two contours, in voxel units
// unless a physical spacing per axis is given.
double msd(const ContourSet& c_s, const ContourSet& c_g,
           const std::array<double, 3>& spacing = {1.0, 1.0, 1.0});

// Entropy of the empirical class proportions, natural log by default.
double class_entropy(std::span<const int> labels, double log_base = 0.0);

}  // namespace alquery
