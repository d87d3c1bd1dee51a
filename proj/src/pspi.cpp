#include "aue/pspi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "aue/error.hpp"

namespace aue {

double pspi(const AUIntensityVector& v, EyeClosureMode mode) {
  const double eye = mode == EyeClosureMode::Binary ? (v[AUId::AU43] >= 1.0 ? 1.0 : 0.0) : v[AUId::AU43];
  return v[AUId::AU4] + std::max(v[AUId::AU6], v[AUId::AU7]) + std::max(v[AUId::AU9], v[AUId::AU10]) + eye;
}

ThresholdSet calibrate_thresholds(std::span<const double> scores, std::span<const int> labels,
                                  int level_count) {
  if (scores.size() != labels.size()) throw DataError("scores and labels differ in length");
  if (level_count < 2) throw UsageError("calibration needs at least two levels");
  std::vector<std::size_t> per_level(static_cast<std::size_t>(level_count), 0);
  std::set<int> distinct;
  for (int label : labels) {
    if (label < 0 || label >= level_count) throw RangeError("label level out of range");
    ++per_level[static_cast<std::size_t>(label)];
    distinct.insert(label);
  }
  if (distinct.size() < 2) throw DataError("threshold calibration needs at least two distinct labels");
  for (double s : scores) {
    if (!std::isfinite(s)) throw NumericError("non-finite score in calibration");
  }

  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  ThresholdSet t;
  std::size_t below = 0;
  for (int level = 0; level + 1 < level_count; ++level) {
    below += per_level[static_cast<std::size_t>(level)];
    double cut;
    if (below == 0) {
      cut = sorted.front();
    } else if (below == n) {
      cut = std::nextafter(sorted.back(), std::numeric_limits<double>::infinity());
    } else {
      cut = sorted[below - 1] + (sorted[below] - sorted[below - 1]) / 2.0;
    }
    if (!t.cut_points.empty() && cut <= t.cut_points.back()) {
      cut = std::nextafter(t.cut_points.back(), std::numeric_limits<double>::infinity());
    }
    t.cut_points.push_back(cut);
  }
  return t;
}

int pspi_classify(double score, const ThresholdSet& thresholds) {
  return static_cast<int>(std::count_if(thresholds.cut_points.begin(), thresholds.cut_points.end(),
                                        [score](double cut) { return cut <= score; }));
}

}  // namespace aue
