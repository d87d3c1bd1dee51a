#include "aue/engagement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aue/error.hpp"
#include "text.hpp"

namespace aue {

EngagementProfile EngagementProfile::from_raw(const std::array<double, kAUCount>& raw,
                                              std::size_t frame_count) {
  EngagementProfile p;
  p.raw = raw;
  p.frame_count = frame_count;
  const double top = *std::max_element(raw.begin(), raw.end());
  for (std::size_t i = 0; i < kAUCount; ++i) p.normalized[i] = top > 0.0 ? raw[i] / top : 0.0;
  p.ranking.assign(kAllAUs.begin(), kAllAUs.end());
  // kAllAUs is ascending, so a stable sort keeps lower AU numbers first on ties.
  std::stable_sort(p.ranking.begin(), p.ranking.end(),
                   [&](AUId a, AUId b) { return raw[au_index(a)] > raw[au_index(b)]; });
  return p;
}

double region_mean(const ActivationMap& map, const RegionRect& region) {
  double sum = 0.0;
  for (int y = region.y_top; y < region.y_bottom; ++y) {
    for (int x = region.x_left; x < region.x_right; ++x) sum += map.at(x, y);
  }
  return sum / region.area();
}

namespace {

double engagement_at(const ActivationMap& map, const FaceLandmarks& landmarks, const AUCenter& center) {
  const Dims image{landmarks.image_width, landmarks.image_height};
  const Dims grid{map.width(), map.height()};
  double total = 0.0;
  for (const Point& p : center.points) {
    total += region_mean(map, au_region(scale_to_map(p, image, grid), grid));
  }
  return total / static_cast<double>(center.points.size());
}

}  // namespace

double frame_engagement(const ActivationMap& map, const FaceLandmarks& landmarks, AUId au) {
  validate(landmarks);
  return engagement_at(map, landmarks, au_center(landmarks, au));
}

std::array<double, kAUCount> frame_engagements(const ActivationMap& map, const FaceLandmarks& landmarks) {
  validate(landmarks);
  std::array<double, kAUCount> out{};
  for (std::size_t i = 0; i < kAUCount; ++i) {
    out[i] = engagement_at(map, landmarks, au_center(landmarks, kAllAUs[i]));
  }
  return out;
}

void EngagementAccumulator::add(const ActivationMap& map, const FaceLandmarks& landmarks) {
  add(frame_engagements(map, landmarks));
}

void EngagementAccumulator::add(const std::array<double, kAUCount>& engagements) {
  // Neumaier summation.
  for (std::size_t i = 0; i < kAUCount; ++i) {
    const double v = engagements[i];
    const double t = sum_[i] + v;
    if (std::abs(sum_[i]) >= std::abs(v)) {
      compensation_[i] += (sum_[i] - t) + v;
    } else {
      compensation_[i] += (v - t) + sum_[i];
    }
    sum_[i] = t;
  }
  ++count_;
}

EngagementProfile EngagementAccumulator::profile() const {
  if (count_ == 0) throw DataError("no correctly classified frame with an activation map");
  std::array<double, kAUCount> raw{};
  for (std::size_t i = 0; i < kAUCount; ++i) {
    raw[i] = (sum_[i] + compensation_[i]) / static_cast<double>(count_);
  }
  return EngagementProfile::from_raw(raw, count_);
}

EngagementProfile aggregate_engagement(std::span<const EngagementFrame> frames) {
  EngagementAccumulator acc;
  for (const auto& f : frames) {
    if (!f.correctly_classified) continue;
    acc.add(*f.map, *f.landmarks);
  }
  return acc.profile();
}

EngagementProfile dataset_engagement(const Dataset& dataset, std::span<const std::size_t> frame_indices) {
  EngagementAccumulator acc;
  for (std::size_t i : frame_indices) {
    const FrameRecord& f = dataset.frames.at(i);
    if (f.cam_path.empty() || f.correctly_classified == false) continue;
    acc.add(load_activation_map(f.cam_path), f.landmarks);
  }
  return acc.profile();
}

EngagementProfile dataset_engagement(const Dataset& dataset) {
  std::vector<std::size_t> all(dataset.frames.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return dataset_engagement(dataset, all);
}

std::vector<AUId> top_k(const EngagementProfile& profile, int k) {
  if (k < 1 || k > static_cast<int>(kAUCount)) {
    throw UsageError("k must be in [1, 12], got " + std::to_string(k));
  }
  if (profile.ranking.size() != kAUCount) throw DataError("engagement profile has no ranking");
  return {profile.ranking.begin(), profile.ranking.begin() + k};
}

std::string format_profile(const EngagementProfile& profile) {
  std::string out = "# frames " + std::to_string(profile.frame_count) + "\n# au_id raw normalized rank\n";
  for (std::size_t r = 0; r < profile.ranking.size(); ++r) {
    const AUId au = profile.ranking[r];
    out += std::to_string(au_number(au)) + ' ' + text::format_exact(profile.raw_of(au)) + ' ' +
           text::format_exact(profile.normalized_of(au)) + ' ' + std::to_string(r + 1) + '\n';
  }
  return out;
}

EngagementProfile parse_profile(std::string_view content, const std::string& source) {
  std::array<double, kAUCount> raw{};
  std::array<bool, kAUCount> seen{};
  std::size_t frames = 0;
  const auto rows = text::lines(content);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string_view line = text::trim(rows[i]);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = text::trim(line.substr(1));
      if (body.starts_with("frames ")) {
        const auto n = text::parse_int<std::size_t>(body.substr(7));
        if (!n) throw ParseError(source, i + 1, "invalid frame count");
        frames = *n;
      }
      continue;
    }
    std::vector<std::string_view> fields;
    for (auto f : text::split(line, ' ')) {
      if (!f.empty()) fields.push_back(f);
    }
    if (fields.size() != 4) throw ParseError(source, i + 1, "expected: au_id raw normalized rank");
    const auto au = parse_au(fields[0]);
    const auto value = text::parse_double(fields[1]);
    if (!au) throw ParseError(source, i + 1, "unknown AU '" + std::string(fields[0]) + "'");
    if (!value || !(*value >= 0.0) || !std::isfinite(*value)) {
      throw ParseError(source, i + 1, "raw engagement must be a finite non-negative number");
    }
    if (seen[au_index(*au)]) throw ParseError(source, i + 1, "duplicate " + au_name(*au));
    seen[au_index(*au)] = true;
    raw[au_index(*au)] = *value;
  }
  for (std::size_t i = 0; i < kAUCount; ++i) {
    if (!seen[i]) throw ParseError(source + ": missing " + au_name(kAllAUs[i]));
  }
  return EngagementProfile::from_raw(raw, frames);
}

EngagementProfile load_profile(const std::filesystem::path& path) {
  return parse_profile(text::read_file(path), path.string());
}

void write_profile(const EngagementProfile& profile, const std::filesystem::path& path) {
  text::write_file(path, format_profile(profile));
}

}  // namespace aue
