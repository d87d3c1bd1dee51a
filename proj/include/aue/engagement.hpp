#pragma once

// AU engagement: mean activation inside each AU's landmark-anchored region,
// averaged over the correctly classified frames.

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aue/geometry.hpp"
#include "aue/ingestion.hpp"
#include "aue/types.hpp"

namespace aue {

struct EngagementProfile {
  std::array<double, kAUCount> raw{};
  std::array<double, kAUCount> normalized{};
  // Descending raw engagement; ties broken by ascending AU number.
  std::vector<AUId> ranking;
  std::size_t frame_count = 0;

  double raw_of(AUId au) const { return raw[au_index(au)]; }
  double normalized_of(AUId au) const { return normalized[au_index(au)]; }

  // Fills normalized (raw / max raw, or zeros) and ranking from raw values.
  static EngagementProfile from_raw(const std::array<double, kAUCount>& raw, std::size_t frame_count);
};

double region_mean(const ActivationMap& map, const RegionRect& region);

// Single-frame engagement; bilateral AUs average the two side regions.
double frame_engagement(const ActivationMap& map, const FaceLandmarks& landmarks, AUId au);
std::array<double, kAUCount> frame_engagements(const ActivationMap& map, const FaceLandmarks& landmarks);

// Running per-AU sums with compensated addition, so the final means do not
// depend on the order frames arrive in beyond rounding of the last bit.
class EngagementAccumulator {
 public:
  void add(const ActivationMap& map, const FaceLandmarks& landmarks);
  void add(const std::array<double, kAUCount>& engagements);
  std::size_t frame_count() const { return count_; }
  // Throws DataError if no frame was added.
  EngagementProfile profile() const;

 private:
  std::array<double, kAUCount> sum_{};
  std::array<double, kAUCount> compensation_{};
  std::size_t count_ = 0;
};

struct EngagementFrame {
  const ActivationMap* map = nullptr;
  const FaceLandmarks* landmarks = nullptr;
  bool correctly_classified = true;
};

// Mean engagement over frames flagged correct. DataError when none pass.
EngagementProfile aggregate_engagement(std::span<const EngagementFrame> frames);

// Engagement over the selected dataset frames, reading each frame's map from
// disk. Frames without a map or flagged incorrect are skipped.
EngagementProfile dataset_engagement(const Dataset& dataset, std::span<const std::size_t> frame_indices);
EngagementProfile dataset_engagement(const Dataset& dataset);

// First k entries of the ranking; 1 <= k <= 12.
std::vector<AUId> top_k(const EngagementProfile& profile, int k);

// "au_id raw normalized rank" per line, in rank order.
std::string format_profile(const EngagementProfile& profile);
EngagementProfile parse_profile(std::string_view content, const std::string& source = "profile");
EngagementProfile load_profile(const std::filesystem::path& path);
void write_profile(const EngagementProfile& profile, const std::filesystem::path& path);

}  // namespace aue
