#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aue {

// The twelve pain-related facial action units handled by this toolkit. The
// enumerator value is the FACS number.
enum class AUId : std::uint8_t {
  AU1 = 1,
  AU2 = 2,
  AU4 = 4,
  AU6 = 6,
  AU7 = 7,
  AU9 = 9,
  AU10 = 10,
  AU12 = 12,
  AU20 = 20,
  AU25 = 25,
  AU27 = 27,
  AU43 = 43,
};

inline constexpr std::size_t kAUCount = 12;

// Ascending FACS order. Every per-AU array in the library uses this indexing.
inline constexpr std::array<AUId, kAUCount> kAllAUs = {
    AUId::AU1,  AUId::AU2,  AUId::AU4,  AUId::AU6,  AUId::AU7,  AUId::AU9,
    AUId::AU10, AUId::AU12, AUId::AU20, AUId::AU25, AUId::AU27, AUId::AU43,
};

constexpr int au_number(AUId au) { return static_cast<int>(au); }

constexpr std::size_t au_index(AUId au) {
  for (std::size_t i = 0; i < kAUCount; ++i) {
    if (kAllAUs[i] == au) return i;
  }
  return kAUCount;
}

// Parses "27", "AU27" or "au27". Returns nullopt for numbers outside the set.
std::optional<AUId> parse_au(std::string_view text);
std::string au_name(AUId au);  // "AU27"

// True for AUs whose center rule yields one point per side of the face.
constexpr bool is_bilateral(AUId au) {
  switch (au) {
    case AUId::AU10:
    case AUId::AU25:
    case AUId::AU27:
      return false;
    default:
      return true;
  }
}

// Per-frame intensities in [0, 5] for all twelve AUs.
class AUIntensityVector {
 public:
  AUIntensityVector() { values_.fill(0.0); }
  explicit AUIntensityVector(const std::array<double, kAUCount>& values) : values_(values) {}

  double operator[](AUId au) const { return values_[au_index(au)]; }
  double& operator[](AUId au) { return values_[au_index(au)]; }

  const std::array<double, kAUCount>& values() const { return values_; }

  friend bool operator==(const AUIntensityVector&, const AUIntensityVector&) = default;

 private:
  std::array<double, kAUCount> values_;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline constexpr std::size_t kLandmarkCount = 68;

// 68-point facial landmarks in face-crop pixel coordinates (y grows down).
struct FaceLandmarks {
  std::array<Point, kLandmarkCount> points{};
  int image_width = 0;
  int image_height = 0;

  const Point& operator[](std::size_t i) const { return points[i]; }
  Point& operator[](std::size_t i) { return points[i]; }

  friend bool operator==(const FaceLandmarks&, const FaceLandmarks&) = default;
};

// Throws DataError when the landmark invariants do not hold.
void validate(const FaceLandmarks& landmarks);

// Dense saliency grid, row-major, every cell in [0, 1].
class ActivationMap {
 public:
  ActivationMap() = default;
  ActivationMap(int width, int height, double fill = 0.0);
  ActivationMap(int width, int height, std::vector<double> cells);

  int width() const { return width_; }
  int height() const { return height_; }

  double at(int x, int y) const { return cells_[static_cast<std::size_t>(y) * width_ + x]; }
  double& at(int x, int y) { return cells_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<const double> cells() const { return cells_; }
  std::span<double> cells() { return cells_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> cells_;
};

enum class LabelScheme { FLACC4, NFCS2, BINARY };

std::string_view scheme_name(LabelScheme scheme);
std::optional<LabelScheme> parse_scheme(std::string_view text);

// Number of pain levels the scheme bins into.
int level_count(LabelScheme scheme);
// Closed label range of the scheme.
double scheme_min(LabelScheme scheme);
double scheme_max(LabelScheme scheme);

struct PainLevel {
  int index = 0;
  std::string name;

  friend bool operator==(const PainLevel&, const PainLevel&) = default;
};

}  // namespace aue
