#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "alquery/metrics.hpp"
#include "alquery/rng.hpp"

#include <cmath>
#include <set>

using namespace alquery;

namespace {

BinaryMask empty_mask(Index d, Index h, Index w) {
  return BinaryMask{{d, h, w}, std::vector<std::uint8_t>(static_cast<std::size_t>(d * h * w), 0)};
}

void set_voxel(BinaryMask& mask, Index d, Index h, Index w) {
  mask.voxels[static_cast<std::size_t>((d * mask.dims[1] + h) * mask.dims[2] + w)] = 1;
}

BinaryMask random_mask(Index side, double fill, rng::Engine& eng) {
  BinaryMask mask = empty_mask(side, side, side);
  for (auto& v : mask.voxels) v = eng.uniform() < fill ? 1 : 0;
  return mask;
}

// Straight double-loop oracle for the symmetric mean surface distance.
double msd_oracle(const ContourSet& a, const ContourSet& b) {
  const auto one_way = [](const auto& from, const auto& to) {
    double sum = 0.0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) {
        const double dz = static_cast<double>(p[0] - q[0]);
        const double dy = static_cast<double>(p[1] - q[1]);
        const double dx = static_cast<double>(p[2] - q[2]);
        best = std::min(best, std::sqrt(dz * dz + dy * dy + dx * dx));
      }
      sum += best;
    }
    return sum;
  };
  return (one_way(a.points, b.points) + one_way(b.points, a.points)) /
         static_cast<double>(a.points.size() + b.points.size());
}

}  // namespace

TEST_CASE("dice anchor cases") {
  BinaryMask a = empty_mask(2, 2, 2);
  set_voxel(a, 0, 0, 0);
  set_voxel(a, 0, 0, 1);
  CHECK(dice(a, a) == doctest::Approx(1.0));

  BinaryMask b = empty_mask(2, 2, 2);
  set_voxel(b, 1, 1, 0);
  CHECK(dice(a, b) == doctest::Approx(0.0));

  // |S| = 4, |G| = 4, |S n G| = 2
  BinaryMask s = empty_mask(1, 2, 4);
  BinaryMask g = empty_mask(1, 2, 4);
  for (Index w = 0; w < 4; ++w) set_voxel(s, 0, 0, w);
  set_voxel(g, 0, 0, 0);
  set_voxel(g, 0, 0, 1);
  set_voxel(g, 0, 1, 2);
  set_voxel(g, 0, 1, 3);
  CHECK(dice(s, g) == doctest::Approx(0.5));
}

TEST_CASE("dice on two empty masks reports the no-foreground sentinel") {
  const BinaryMask a = empty_mask(2, 2, 2);
  CHECK_FALSE(dice(a, a).has_value());
  CHECK_THROWS_AS(dice(a, empty_mask(2, 2, 3)), ShapeError);
}

TEST_CASE("dice is symmetric on random masks") {
  rng::Engine eng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const BinaryMask a = random_mask(4, 0.4, eng);
    const BinaryMask b = random_mask(4, 0.4, eng);
    const auto ab = dice(a, b);
    const auto ba = dice(b, a);
    REQUIRE(ab.has_value() == ba.has_value());
    if (ab) CHECK(*ab == doctest::Approx(*ba));
  }
}

TEST_CASE("contour of an isolated voxel is the voxel itself") {
  BinaryMask mask = empty_mask(3, 3, 3);
  set_voxel(mask, 1, 1, 1);
  const ContourSet contour = extract_contour(mask);
  REQUIRE(contour.points.size() == 1);
  CHECK(contour.points[0] == std::array<Index, 3>{1, 1, 1});
}

TEST_CASE("contour of a solid 3-cube inside a 5-cube is its 26-voxel shell") {
  BinaryMask mask = empty_mask(5, 5, 5);
  for (Index d = 1; d <= 3; ++d) {
    for (Index h = 1; h <= 3; ++h) {
      for (Index w = 1; w <= 3; ++w) set_voxel(mask, d, h, w);
    }
  }
  const ContourSet contour = extract_contour(mask);
  CHECK(contour.points.size() == 26);
  for (const auto& p : contour.points) CHECK(p != std::array<Index, 3>{2, 2, 2});
}

TEST_CASE("contour of an empty mask is empty, border foreground is contour") {
  CHECK(extract_contour(empty_mask(4, 4, 4)).points.empty());

  // full 3-cube: only the center voxel survives erosion
  BinaryMask full = empty_mask(3, 3, 3);
  for (auto& v : full.voxels) v = 1;
  CHECK(extract_contour(full).points.size() == 26);
}

TEST_CASE("contour is a subset of the mask and excludes interior voxels") {
  rng::Engine eng(44);
  for (int trial = 0; trial < 10; ++trial) {
    const BinaryMask mask = random_mask(6, 0.55, eng);
    const ContourSet contour = extract_contour(mask);
    std::set<std::array<Index, 3>> contour_set(contour.points.begin(), contour.points.end());
    CHECK(contour_set.size() == contour.points.size());
    for (const auto& p : contour.points) CHECK(mask.at(p[0], p[1], p[2]));

    for (Index d = 1; d < 5; ++d) {
      for (Index h = 1; h < 5; ++h) {
        for (Index w = 1; w < 5; ++w) {
          bool interior = mask.at(d, h, w);
          for (Index dd = d - 1; dd <= d + 1 && interior; ++dd) {
            for (Index hh = h - 1; hh <= h + 1 && interior; ++hh) {
              for (Index ww = w - 1; ww <= w + 1 && interior; ++ww) interior = mask.at(dd, hh, ww);
            }
          }
          if (interior) CHECK_FALSE(contour_set.contains({d, h, w}));
        }
      }
    }
  }
}

TEST_CASE("msd anchor cases") {
  ContourSet a{{4, 4, 4}, {{0, 0, 0}}};
  CHECK(msd(a, a) == doctest::Approx(0.0));

  ContourSet b{{4, 4, 4}, {{3, 0, 0}}};
  CHECK(msd(a, b) == doctest::Approx(3.0));

  ContourSet c{{4, 4, 4}, {{1, 1, 1}}};
  CHECK(msd(a, c) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));

  CHECK_THROWS_AS(msd(a, ContourSet{{4, 4, 4}, {}}), DataError);
}

TEST_CASE("msd honors physical spacing") {
  ContourSet a{{4, 4, 4}, {{0, 0, 0}}};
  ContourSet b{{4, 4, 4}, {{1, 0, 0}}};
  CHECK(msd(a, b, {3.0, 1.0, 1.0}) == doctest::Approx(3.0));
}

TEST_CASE("msd matches the brute-force oracle on random small masks") {
  rng::Engine eng(123);
  for (int trial = 0; trial < 40; ++trial) {
    const Index side = 2 + static_cast<Index>(eng.below(7));  // up to 8^3
    const ContourSet a = extract_contour(random_mask(side, 0.5, eng));
    const ContourSet b = extract_contour(random_mask(side, 0.5, eng));
    if (a.points.empty() || b.points.empty()) continue;
    CHECK(msd(a, b) == msd_oracle(a, b));  // same arithmetic, exact match
    CHECK(msd(a, b) == doctest::Approx(msd(b, a)).epsilon(1e-12));
  }
}

TEST_CASE("class_entropy anchor cases") {
  const std::vector<int> single{3, 3, 3, 3};
  CHECK(class_entropy(single) == doctest::Approx(0.0));

  const std::vector<int> two{0, 0, 1, 1};
  CHECK(class_entropy(two) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(class_entropy(two) == doctest::Approx(0.69315).epsilon(1e-4));

  std::vector<int> ten;
  for (int c = 0; c < 10; ++c) {
    for (int i = 0; i < 7; ++i) ten.push_back(c);
  }
  CHECK(class_entropy(ten) == doctest::Approx(std::log(10.0)).epsilon(1e-9));
  CHECK(class_entropy(ten) == doctest::Approx(2.30259).epsilon(1e-4));

  CHECK_THROWS_AS(class_entropy(std::vector<int>{}), ConfigError);
}

TEST_CASE("class_entropy is invariant under relabeling and bounded by log of class count") {
  rng::Engine eng(77);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<int> labels;
    const int n_classes = 2 + static_cast<int>(eng.below(6));
    for (int i = 0; i < 50; ++i) labels.push_back(static_cast<int>(eng.below(static_cast<std::uint64_t>(n_classes))));
    const double base = class_entropy(labels);

    std::vector<int> relabeled(labels);
    for (int& l : relabeled) l = 100 - l * 7;  // injective relabeling
    CHECK(class_entropy(relabeled) == doctest::Approx(base).epsilon(1e-12));

    rng::shuffle(relabeled, eng);
    CHECK(class_entropy(relabeled) == doctest::Approx(base).epsilon(1e-12));

    std::set<int> distinct(labels.begin(), labels.end());
    CHECK(base <= std::log(static_cast<double>(distinct.size())) + 1e-12);
  }
}

TEST_CASE("class_entropy supports a configurable base") {
  const std::vector<int> two{0, 1};
  CHECK(class_entropy(two, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("masks load from idx tensors with 0/1 payloads") {
  RawTensor t;
  t.dims = {1, 2, 2};
  t.data = {0, 1, 1, 0};
  const BinaryMask mask = BinaryMask::from_tensor(t);
  CHECK(mask.at(0, 0, 1));
  CHECK_FALSE(mask.at(0, 0, 0));

  t.data = {0, 1, 2, 0};
  CHECK_THROWS_AS(BinaryMask::from_tensor(t), DataError);
  t.dims = {4};
  t.data = {0, 1, 1, 0};
  CHECK_THROWS_AS(BinaryMask::from_tensor(t), ShapeError);
}
