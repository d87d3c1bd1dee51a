#include "aue/types.hpp"

#include <algorithm>
#include <cmath>

#include "aue/error.hpp"
#include "text.hpp"

namespace aue {

std::optional<AUId> parse_au(std::string_view text) {
  text = text::trim(text);
  if (text.size() > 2 && (text[0] == 'A' || text[0] == 'a') && (text[1] == 'U' || text[1] == 'u')) {
    text.remove_prefix(2);
  }
  const auto number = text::parse_int<int>(text);
  if (!number) return std::nullopt;
  for (AUId au : kAllAUs) {
    if (au_number(au) == *number) return au;
  }
  return std::nullopt;
}

std::string au_name(AUId au) { return "AU" + std::to_string(au_number(au)); }

void validate(const FaceLandmarks& landmarks) {
  if (landmarks.image_width <= 0 || landmarks.image_height <= 0) {
    throw DataError("landmark image dimensions must be positive");
  }
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    if (!std::isfinite(landmarks[i].x) || !std::isfinite(landmarks[i].y)) {
      throw DataError("landmark " + std::to_string(i) + " is not finite");
    }
  }
}

ActivationMap::ActivationMap(int width, int height, double fill)
    : ActivationMap(width, height,
                    std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                            static_cast<std::size_t>(std::max(height, 0)),
                                        fill)) {}

ActivationMap::ActivationMap(int width, int height, std::vector<double> cells)
    : width_(width), height_(height), cells_(std::move(cells)) {
  if (width <= 0 || height <= 0) throw DataError("activation map dimensions must be positive");
  if (cells_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw DataError("activation map cell count does not match its dimensions");
  }
  for (double v : cells_) {
    if (!(v >= 0.0 && v <= 1.0)) throw RangeError("activation value outside [0, 1]");
  }
}

std::string_view scheme_name(LabelScheme scheme) {
  switch (scheme) {
    case LabelScheme::FLACC4: return "FLACC4";
    case LabelScheme::NFCS2: return "NFCS2";
    case LabelScheme::BINARY: return "BINARY";
  }
  return "?";
}

std::optional<LabelScheme> parse_scheme(std::string_view text) {
  text = text::trim(text);
  if (text == "FLACC4") return LabelScheme::FLACC4;
  if (text == "NFCS2") return LabelScheme::NFCS2;
  if (text == "BINARY") return LabelScheme::BINARY;
  return std::nullopt;
}

int level_count(LabelScheme scheme) { return scheme == LabelScheme::FLACC4 ? 4 : 2; }

double scheme_min(LabelScheme) { return 0.0; }

double scheme_max(LabelScheme scheme) {
  switch (scheme) {
    case LabelScheme::FLACC4: return 10.0;
    case LabelScheme::NFCS2: return 4.0;
    case LabelScheme::BINARY: return 1.0;
  }
  return 0.0;
}

}  // namespace aue
