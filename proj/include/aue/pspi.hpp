#pragma once

// PSPI baseline: AU4 + max(AU6, AU7) + max(AU9, AU10) + eye closure, and a
// quantile calibration that maps scores onto pain levels.

#include <span>
#include <vector>

#include "aue/types.hpp"

namespace aue {

enum class EyeClosureMode {
  Binary,     // AU43 counts 1 when its intensity is >= 1, else 0 (range 0-16)
  Intensity,  // AU43 contributes its intensity (range 0-20)
};

double pspi(const AUIntensityVector& v, EyeClosureMode mode = EyeClosureMode::Binary);

struct ThresholdSet {
  // Strictly ascending; level = number of cut points <= score.
  std::vector<double> cut_points;
};

// Places cut points so the share of training scores assigned to each level
// matches the share of training labels at that level. Each cut sits midway
// between the neighbouring sorted scores. Labels are level indices in
// [0, level_count). Throws DataError for single-class input.
ThresholdSet calibrate_thresholds(std::span<const double> scores, std::span<const int> labels,
                                  int level_count);

int pspi_classify(double score, const ThresholdSet& thresholds);

}  // namespace aue
