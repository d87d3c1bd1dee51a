#pragma once

// Landmark-anchored AU centers and the fixed-size regions around them.
//
// Anchors on the 68-point scheme: inner brows 21/22, outer brows 17/26,
// brow centers 19/24, eye contours 36-41/42-47, eye bottoms = midpoints of
// (40,41)/(46,47), nose alae 31/35, upper-lip center 51, lip corners 48/54,
// inner-lip centers 62/66, mouth = points 48-67. Offsets are multiples of the
// inter-ocular scale; "above" means decreasing y.

#include <utility>
#include <vector>

#include "aue/types.hpp"

namespace aue {

inline constexpr int kRegionSide = 10;
inline constexpr int kRegionArea = kRegionSide * kRegionSide;

struct AUCenter {
  AUId au = AUId::AU1;
  // Image-left side first for bilateral AUs; a single point otherwise.
  std::vector<Point> points;
};

// Half-open pixel rectangle [x_left, x_right) x [y_top, y_bottom).
struct RegionRect {
  int x_left = 0;
  int x_right = 0;
  int y_top = 0;
  int y_bottom = 0;

  int width() const { return x_right - x_left; }
  int height() const { return y_bottom - y_top; }
  int area() const { return width() * height(); }

  friend bool operator==(const RegionRect&, const RegionRect&) = default;
};

struct Dims {
  int width = 0;
  int height = 0;
};

// Centroids of the two six-point eye contours (image-left eye first).
std::pair<Point, Point> eye_centers(const FaceLandmarks& landmarks);

// Distance between the eye centers. Throws DegenerateFaceError below 1 px.
double interocular_scale(const FaceLandmarks& landmarks);

AUCenter au_center(const FaceLandmarks& landmarks, AUId au);

// 10x10 region around the rounded center, translated (never shrunk) to fit
// inside the map. Throws DataError for maps smaller than 10x10.
RegionRect au_region(Point center, Dims map_dims);

Point scale_to_map(Point point, Dims image_dims, Dims map_dims);

// Reflects the face about the image's vertical midline and relabels the
// points so that index semantics (left brow, right eye corner, ...) hold.
FaceLandmarks mirror_landmarks(const FaceLandmarks& landmarks);

}  // namespace aue
