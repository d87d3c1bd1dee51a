#pragma once

// Readers and writers for the on-disk inputs: dataset manifests, AU
// intensity tables, landmark tables and activation maps. Also label binning
// and subject-disjoint fold assignment.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aue/types.hpp"

namespace aue {

struct FrameEntry {
  std::string frame_id;
  std::string subject_id;
  double label = 0.0;
  LabelScheme scheme = LabelScheme::FLACC4;
  // Paths exactly as written in the manifest; relative paths resolve
  // against the manifest's directory.
  std::string au_path;
  std::string landmark_path;
  std::string cam_path;  // may be empty
  std::optional<bool> correctly_classified;

  friend bool operator==(const FrameEntry&, const FrameEntry&) = default;
};

struct DatasetManifest {
  std::filesystem::path base_dir;
  std::vector<FrameEntry> entries;

  std::filesystem::path resolve(const std::string& path) const;
  // Distinct subject ids, sorted.
  std::vector<std::string> subjects() const;
};

// Record layout, one per line:
//   frame_id|subject_id|label|scheme|au_path|landmark_path|cam_path|correct_flag
// Lines starting with '#' and blank lines are ignored. Every referenced path
// must exist when check_paths is set.
DatasetManifest parse_manifest(std::string_view content, const std::filesystem::path& base_dir,
                               const std::string& source = "manifest", bool check_paths = true);
DatasetManifest load_manifest(const std::filesystem::path& path);
std::string format_manifest(const DatasetManifest& manifest);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// Maps detector column names onto the twelve AUs.
struct AuColumnMapping {
  // Candidate column names per AU (indexed like kAllAUs); the first one
  // present in the header wins.
  std::array<std::vector<std::string>, kAUCount> columns;
  // AUs that are zero-filled, with a warning, when no candidate column exists.
  std::array<bool, kAUCount> zero_fill{};
  // Clamp intensities into [0, 5] instead of rejecting them.
  bool clamp = false;

  // AU06_r / AU06 / AU6_r / AU6 style names; AU27 and AU43 zero-filled.
  static AuColumnMapping defaults();
  // key = value lines over the defaults:
  //   AU6 = my_column      (single explicit column, no zero fill)
  //   zero_fill = 27, 43   (AUs that may be absent)
  //   clamp = true
  static AuColumnMapping parse(std::string_view content, const std::string& source = "au-map");
  static AuColumnMapping load(const std::filesystem::path& path);
};

// AU intensities keyed by frame id, in file order.
struct AuTable {
  std::vector<std::string> frame_ids;
  std::vector<AUIntensityVector> vectors;
  std::vector<std::string> warnings;

  const AUIntensityVector* find(const std::string& frame_id) const;
  // Returns false (and stores nothing) when the frame id is already present.
  bool add(std::string frame_id, const AUIntensityVector& vector);

 private:
  std::map<std::string, std::size_t, std::less<>> index_;
};

AuTable parse_au_intensities(std::string_view content, const AuColumnMapping& mapping,
                             const std::string& source = "au-table");
AuTable load_au_intensities(const std::filesystem::path& path,
                            const AuColumnMapping& mapping = AuColumnMapping::defaults());

// Header row then frame_id,x0,y0,...,x67,y67,img_w,img_h per frame.
std::map<std::string, FaceLandmarks> parse_landmarks(std::string_view content,
                                                     const std::string& source = "landmarks");
std::map<std::string, FaceLandmarks> load_landmarks(const std::filesystem::path& path);
std::string format_landmarks(const std::map<std::string, FaceLandmarks>& table);

// CAM1 ("CAM1", u32 LE width, u32 LE height, width*height f32 LE row-major)
// or binary PGM (P5, maxval 255; values divided by 255).
ActivationMap parse_activation_map(std::string_view bytes, const std::string& source = "map");
ActivationMap load_activation_map(const std::filesystem::path& path);
std::string encode_cam1(const ActivationMap& map);
void write_activation_map(const ActivationMap& map, const std::filesystem::path& path);

std::string level_name(LabelScheme scheme, int index);
// Table-driven pain-level binning. FLACC: [0,2.5) [2.5,5) [5,7.5) [7.5,10].
// NFCS: only 0 and 4 occur. BINARY: 0 or 1.
PainLevel bin_label(double score, LabelScheme scheme);
// Validates that label is inside the scheme's closed range.
void check_label_range(double label, LabelScheme scheme);

struct FoldSpec {
  std::vector<std::vector<std::string>> folds;
  std::uint64_t seed = 0;

  // Fold index for every subject. Throws LeakageError if a subject appears in
  // more than one fold.
  std::map<std::string, std::size_t> assignment() const;
};

FoldSpec subject_folds(const DatasetManifest& manifest, std::span<const int> fold_sizes,
                       std::uint64_t seed);
FoldSpec subject_folds(std::vector<std::string> subjects, std::span<const int> fold_sizes,
                       std::uint64_t seed);

// "fold<TAB>subject" per line after a "# seed N" header.
std::string format_folds(const FoldSpec& folds);
FoldSpec parse_folds(std::string_view content, const std::string& source = "folds");
FoldSpec load_folds(const std::filesystem::path& path);
void write_folds(const FoldSpec& folds, const std::filesystem::path& path);

// A manifest entry joined with its AU vector and landmarks.
struct FrameRecord {
  std::string frame_id;
  std::string subject_id;
  double label = 0.0;
  LabelScheme scheme = LabelScheme::FLACC4;
  AUIntensityVector au;
  FaceLandmarks landmarks;
  std::filesystem::path cam_path;  // empty when the frame has no map
  std::optional<bool> correctly_classified;
};

struct Dataset {
  std::vector<FrameRecord> frames;
  std::vector<std::string> warnings;

  std::vector<std::string> subjects() const;
};

// Loads every AU and landmark file the manifest references (each file once)
// and joins them by frame id.
Dataset load_dataset(const DatasetManifest& manifest,
                     const AuColumnMapping& mapping = AuColumnMapping::defaults());

}  // namespace aue
