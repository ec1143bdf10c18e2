#include <doctest.h>

#include "spadcorr/errors.hpp"
#include "spadcorr/frame.hpp"
#include "spadcorr/geometry.hpp"

using namespace spadcorr;

TEST_CASE("centred geometry uses the largest odd symmetric roi") {
  const auto g = SensorGeometry::centered(16, 16);
  CHECK(g.origin() == ArrayPixel{8, 8});
  CHECK(g.roi() == Roi{1, 1, 15, 15});
  CHECK(g.roi_size() == 225);
  CHECK(g.half_width() == 7);

  const auto odd = SensorGeometry::centered(15, 9);
  CHECK(odd.roi() == Roi{0, 0, 15, 9});
}

TEST_CASE("asymmetric roi is rejected") {
  CHECK_THROWS_AS(SensorGeometry(16, 16, {8, 8}, {0, 0, 16, 16}), ConfigError);
  CHECK_THROWS_AS(SensorGeometry(16, 16, {8, 8}, {2, 1, 15, 15}), ConfigError);
  CHECK_THROWS_AS(SensorGeometry(16, 16, {20, 8}, {0, 0, 3, 3}), ConfigError);
  CHECK_THROWS_AS(SensorGeometry::centered(1, 8), ConfigError);
}

TEST_CASE("mirror is an involution and matches the roi mirror index") {
  const auto g = SensorGeometry::centered(12, 10);
  for (std::size_t i = 0; i < g.roi_size(); ++i) {
    const PixelCoord r = g.roi_coord(i);
    CHECK(g.roi_index(r) == i);
    CHECK(g.mirror(g.mirror(r)) == r);
    CHECK(g.roi_index(-r) == g.roi_mirror_index(i));
    const ArrayPixel a = g.to_array(r);
    CHECK(g.mirror(a) == g.to_array(-r));
  }
  CHECK(mirror_pixel(PixelCoord{3, -2}) == PixelCoord{-3, 2});
}

TEST_CASE("mirror off the sensor throws") {
  // Even width: column 0 has no mirror partner.
  const auto g = SensorGeometry::centered(8, 8);
  CHECK(g.origin() == ArrayPixel{4, 4});
  CHECK_THROWS_AS(static_cast<void>(g.mirror(PixelCoord{-4, 0})), OutOfRangeError);
  CHECK_THROWS_AS(mirror_pixel(PixelCoord{0, -4}, g), OutOfRangeError);
  CHECK(g.mirror(PixelCoord{3, 0}) == PixelCoord{-3, 0});
}

TEST_CASE("frame values are bounded by the bit depth") {
  const auto g = SensorGeometry::centered(5, 5);
  FrameBuffer one(g, 1);
  CHECK_THROWS_AS(one.set(ArrayPixel{0, 0}, 2), OutOfRangeError);
  CHECK_THROWS_AS(one.set(ArrayPixel{5, 0}, 1), OutOfRangeError);
  one.increment(3);
  one.increment(3);
  CHECK(one.values()[3] == 1);
  CHECK(one.is_binary());

  FrameBuffer eight(g, 8);
  eight.set(PixelCoord{1, 1}, 255);
  eight.increment(g.sensor_index(PixelCoord{1, 1}));
  CHECK(eight.at(PixelCoord{1, 1}) == 255);
  eight.set(PixelCoord{0, 0}, 7);
  CHECK_FALSE(eight.is_binary());
  CHECK(eight.count_nonzero() == 2);
  CHECK_THROWS_AS(FrameBuffer(g, 4), ConfigError);
}

TEST_CASE("active list is sorted roi indices") {
  const auto g = SensorGeometry::centered(6, 6);  // roi 5x5 at (1,1)
  FrameBuffer f(g, 1);
  f.set(ArrayPixel{0, 0}, 1);  // outside the roi
  f.set(PixelCoord{2, 2}, 1);
  f.set(PixelCoord{-2, -2}, 1);
  f.set(PixelCoord{0, 0}, 1);
  std::vector<std::uint32_t> active;
  collect_active_roi(f, active);
  CHECK(active == std::vector<std::uint32_t>{0, 12, 24});
}
