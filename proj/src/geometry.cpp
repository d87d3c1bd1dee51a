#include "aue/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "aue/error.hpp"

namespace aue {
namespace {

Point midpoint(Point a, Point b) { return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0}; }

Point centroid(const FaceLandmarks& lm, std::size_t first, std::size_t last) {
  double x = 0.0;
  double y = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    x += lm[i].x;
    y += lm[i].y;
  }
  const double n = static_cast<double>(last - first + 1);
  return {x / n, y / n};
}

Point shifted(Point p, double dy) { return {p.x, p.y + dy}; }

// Mirror partner of every index in the 68-point scheme.
constexpr std::array<std::size_t, kLandmarkCount> kMirrorIndex = [] {
  std::array<std::size_t, kLandmarkCount> m{};
  for (std::size_t i = 0; i < kLandmarkCount; ++i) m[i] = i;
  const auto pair = [&m](std::size_t a, std::size_t b) {
    m[a] = b;
    m[b] = a;
  };
  for (std::size_t i = 0; i < 8; ++i) pair(i, 16 - i);  // jaw
  for (std::size_t i = 0; i < 5; ++i) pair(17 + i, 26 - i);  // brows
  pair(31, 35);
  pair(32, 34);
  pair(36, 45);
  pair(37, 44);
  pair(38, 43);
  pair(39, 42);
  pair(40, 47);
  pair(41, 46);
  pair(48, 54);
  pair(49, 53);
  pair(50, 52);
  pair(55, 59);
  pair(56, 58);
  pair(60, 64);
  pair(61, 63);
  pair(65, 67);
  return m;
}();

int clamp_start(double center, int extent) {
  const long start = std::lround(std::clamp(center, -1e9, 1e9)) - kRegionSide / 2;
  return static_cast<int>(std::clamp<long>(start, 0, extent - kRegionSide));
}

}  // namespace

std::pair<Point, Point> eye_centers(const FaceLandmarks& landmarks) {
  return {centroid(landmarks, 36, 41), centroid(landmarks, 42, 47)};
}

double interocular_scale(const FaceLandmarks& landmarks) {
  const auto [left, right] = eye_centers(landmarks);
  const double d = std::hypot(right.x - left.x, right.y - left.y);
  if (!(d >= 1.0)) {
    throw DegenerateFaceError("degenerate face: eye centers " + std::to_string(d) + " px apart");
  }
  return d;
}

AUCenter au_center(const FaceLandmarks& lm, AUId au) {
  const double scale = interocular_scale(lm);
  const auto [left_eye, right_eye] = eye_centers(lm);
  const Point left_eye_bottom = midpoint(lm[40], lm[41]);
  const Point right_eye_bottom = midpoint(lm[46], lm[47]);

  AUCenter c{au, {}};
  switch (au) {
    case AUId::AU1:
      c.points = {shifted(lm[21], -scale / 2.0), shifted(lm[22], -scale / 2.0)};
      break;
    case AUId::AU2:
      c.points = {shifted(lm[17], -scale / 3.0), shifted(lm[26], -scale / 3.0)};
      break;
    case AUId::AU4:
      c.points = {shifted(lm[19], scale / 3.0), shifted(lm[24], scale / 3.0)};
      break;
    case AUId::AU6:
      c.points = {shifted(left_eye_bottom, scale), shifted(right_eye_bottom, scale)};
      break;
    case AUId::AU7:
    case AUId::AU43:
      c.points = {left_eye, right_eye};
      break;
    case AUId::AU9:
      c.points = {lm[31], lm[35]};
      break;
    case AUId::AU10:
      c.points = {lm[51]};
      break;
    case AUId::AU12:
      c.points = {lm[48], lm[54]};
      break;
    case AUId::AU20:
      c.points = {shifted(lm[48], scale), shifted(lm[54], scale)};
      break;
    case AUId::AU25:
      c.points = {midpoint(lm[62], lm[66])};
      break;
    case AUId::AU27:
      c.points = {centroid(lm, 48, 67)};
      break;
  }
  return c;
}

RegionRect au_region(Point center, Dims map_dims) {
  if (map_dims.width < kRegionSide || map_dims.height < kRegionSide) {
    throw DataError("map " + std::to_string(map_dims.width) + "x" + std::to_string(map_dims.height) +
                    " is smaller than the 10x10 AU region");
  }
  if (!std::isfinite(center.x) || !std::isfinite(center.y)) {
    throw DataError("AU center is not finite");
  }
  const int x = clamp_start(center.x, map_dims.width);
  const int y = clamp_start(center.y, map_dims.height);
  return {x, x + kRegionSide, y, y + kRegionSide};
}

Point scale_to_map(Point point, Dims image_dims, Dims map_dims) {
  return {point.x * map_dims.width / image_dims.width, point.y * map_dims.height / image_dims.height};
}

FaceLandmarks mirror_landmarks(const FaceLandmarks& landmarks) {
  FaceLandmarks out = landmarks;
  const double w = landmarks.image_width;
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    const Point& p = landmarks[kMirrorIndex[i]];
    out[i] = {w - p.x, p.y};
  }
  return out;
}

}  // namespace aue
