#include "aue/ingestion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <set>
#include <sstream>

#include "aue/error.hpp"
#include "aue/random.hpp"
#include "text.hpp"

namespace aue {
namespace {

std::string located(const std::string& source, std::size_t line, const std::string& what) {
  return source + ":" + std::to_string(line) + ": " + what;
}

std::optional<bool> parse_flag(std::string_view s) {
  s = text::trim(s);
  if (s == "1" || s == "true" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "no") return false;
  return std::nullopt;
}

std::uint32_t read_u32_le(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) {
    v = (v << 8) | static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(i)]);
  }
  return v;
}

void append_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

ActivationMap parse_cam1(std::string_view bytes, const std::string& source) {
  constexpr std::size_t kHeader = 12;
  if (bytes.size() < kHeader) throw ParseError(source + ": truncated CAM1 header");
  const std::uint32_t width = read_u32_le(bytes, 4);
  const std::uint32_t height = read_u32_le(bytes, 8);
  if (width == 0 || height == 0 || width > 1u << 15 || height > 1u << 15) {
    throw ParseError(source + ": implausible CAM1 dimensions " + std::to_string(width) + "x" +
                     std::to_string(height));
  }
  const std::size_t cells = static_cast<std::size_t>(width) * height;
  const std::size_t payload = bytes.size() - kHeader;
  if (payload < cells * 4) {
    throw ParseError(source + ": truncated CAM1 payload, header declares " + std::to_string(width) +
                     "x" + std::to_string(height) + " (" + std::to_string(cells * 4) +
                     " bytes) but only " + std::to_string(payload) + " bytes follow");
  }
  if (payload > cells * 4) {
    throw ParseError(source + ": CAM1 payload has " + std::to_string(payload - cells * 4) +
                     " bytes beyond the declared dimensions");
  }
  std::vector<double> values(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const float f = std::bit_cast<float>(read_u32_le(bytes, kHeader + 4 * i));
    if (!(f >= 0.0f && f <= 1.0f)) {
      throw RangeError(source + ": CAM1 cell " + std::to_string(i) + " value " +
                       text::format_exact(static_cast<double>(f)) + " outside [0, 1]");
    }
    values[i] = static_cast<double>(f);
  }
  return ActivationMap(static_cast<int>(width), static_cast<int>(height), std::move(values));
}

// Reads one whitespace-delimited PGM header token, skipping '#' comments.
std::string_view pgm_token(std::string_view bytes, std::size_t& pos, const std::string& source) {
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  if (start == pos) throw ParseError(source + ": truncated PGM header");
  return bytes.substr(start, pos - start);
}

ActivationMap parse_pgm(std::string_view bytes, const std::string& source) {
  std::size_t pos = 2;
  const auto width = text::parse_int<int>(pgm_token(bytes, pos, source));
  const auto height = text::parse_int<int>(pgm_token(bytes, pos, source));
  const auto maxval = text::parse_int<int>(pgm_token(bytes, pos, source));
  if (!width || !height || *width <= 0 || *height <= 0) {
    throw ParseError(source + ": invalid PGM dimensions");
  }
  if (!maxval || *maxval != 255) throw ParseError(source + ": PGM maxval must be 255");
  if (pos >= bytes.size()) throw ParseError(source + ": PGM has no pixel data");
  ++pos;  // single whitespace byte after maxval
  const std::size_t cells = static_cast<std::size_t>(*width) * static_cast<std::size_t>(*height);
  const std::size_t payload = bytes.size() - pos;
  if (payload < cells) {
    throw ParseError(source + ": truncated PGM payload, expected " + std::to_string(cells) +
                     " bytes, found " + std::to_string(payload));
  }
  if (payload > cells) throw ParseError(source + ": PGM payload longer than declared dimensions");
  std::vector<double> values(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    values[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
  }
  return ActivationMap(*width, *height, std::move(values));
}

std::vector<std::string> default_columns(AUId au) {
  const int n = au_number(au);
  char padded[8];
  std::snprintf(padded, sizeof padded, "AU%02d", n);
  const std::string plain = "AU" + std::to_string(n);
  std::vector<std::string> names = {std::string(padded) + "_r", padded};
  if (plain != padded) {
    names.push_back(plain + "_r");
    names.push_back(plain);
  }
  return names;
}

}  // namespace

// ---------------------------------------------------------------------------
// Manifest

std::filesystem::path DatasetManifest::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

std::vector<std::string> DatasetManifest::subjects() const {
  std::set<std::string> unique;
  for (const auto& e : entries) unique.insert(e.subject_id);
  return {unique.begin(), unique.end()};
}

void check_label_range(double label, LabelScheme scheme) {
  if (!(label >= scheme_min(scheme) && label <= scheme_max(scheme))) {
    throw RangeError("label " + text::format_exact(label) + " outside " +
                     std::string(scheme_name(scheme)) + " range [" +
                     text::format_exact(scheme_min(scheme)) + ", " +
                     text::format_exact(scheme_max(scheme)) + "]");
  }
  if (scheme == LabelScheme::BINARY && label != 0.0 && label != 1.0) {
    throw RangeError("BINARY label must be 0 or 1, got " + text::format_exact(label));
  }
}

DatasetManifest parse_manifest(std::string_view content, const std::filesystem::path& base_dir,
                               const std::string& source, bool check_paths) {
  DatasetManifest manifest;
  manifest.base_dir = base_dir;
  std::set<std::string> seen_ids;
  std::set<std::filesystem::path> existing;
  const auto require_path = [&](const std::string& p, std::size_t line, const char* field) {
    if (!check_paths || p.empty()) return;
    const auto resolved = manifest.resolve(p);
    if (existing.contains(resolved)) return;
    if (!std::filesystem::exists(resolved)) {
      throw DataError(located(source, line, std::string(field) + " '" + p + "' does not exist"));
    }
    existing.insert(resolved);
  };

  const auto rows = text::lines(content);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t line = i + 1;
    const std::string_view raw = text::trim(rows[i]);
    if (raw.empty() || raw.front() == '#') continue;
    const auto fields = text::split(raw, '|');
    if (fields.size() < 6 || fields.size() > 8) {
      throw ParseError(source, line,
                       "expected 8 '|'-separated fields, found " + std::to_string(fields.size()));
    }
    FrameEntry e;
    e.frame_id = std::string(text::trim(fields[0]));
    e.subject_id = std::string(text::trim(fields[1]));
    if (e.frame_id.empty()) throw ParseError(source, line, "field frame_id is empty");
    if (e.subject_id.empty()) throw ParseError(source, line, "field subject_id is empty");
    const auto label = text::parse_double(fields[2]);
    if (!label || !std::isfinite(*label)) {
      throw ParseError(source, line, "field label is not a number: '" + std::string(fields[2]) + "'");
    }
    e.label = *label;
    const auto scheme = parse_scheme(fields[3]);
    if (!scheme) {
      throw ParseError(source, line, "field scheme must be FLACC4, NFCS2 or BINARY, got '" +
                                         std::string(text::trim(fields[3])) + "'");
    }
    e.scheme = *scheme;
    try {
      check_label_range(e.label, e.scheme);
    } catch (const RangeError& err) {
      throw RangeError(located(source, line, err.what()));
    }
    e.au_path = std::string(text::trim(fields[4]));
    e.landmark_path = std::string(text::trim(fields[5]));
    if (e.au_path.empty()) throw ParseError(source, line, "field au_path is empty");
    if (e.landmark_path.empty()) throw ParseError(source, line, "field landmark_path is empty");
    if (fields.size() > 6) e.cam_path = std::string(text::trim(fields[6]));
    if (fields.size() > 7 && !text::trim(fields[7]).empty()) {
      e.correctly_classified = parse_flag(fields[7]);
      if (!e.correctly_classified) {
        throw ParseError(source, line, "field correct_flag must be 0/1, got '" +
                                           std::string(text::trim(fields[7])) + "'");
      }
    }
    if (!seen_ids.insert(e.frame_id).second) {
      throw DataError(located(source, line, "duplicate frame_id '" + e.frame_id + "'"));
    }
    require_path(e.au_path, line, "au_path");
    require_path(e.landmark_path, line, "landmark_path");
    require_path(e.cam_path, line, "cam_path");
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(text::read_file(path), path.parent_path(), path.string(), true);
}

std::string format_manifest(const DatasetManifest& manifest) {
  std::string out = "# frame_id|subject_id|label|scheme|au_path|landmark_path|cam_path|correct_flag\n";
  for (const auto& e : manifest.entries) {
    out += e.frame_id + '|' + e.subject_id + '|' + text::format_exact(e.label) + '|' +
           std::string(scheme_name(e.scheme)) + '|' + e.au_path + '|' + e.landmark_path + '|' +
           e.cam_path + '|';
    if (e.correctly_classified) out += *e.correctly_classified ? "1" : "0";
    out += '\n';
  }
  return out;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  text::write_file(path, format_manifest(manifest));
}

// ---------------------------------------------------------------------------
// AU intensities

AuColumnMapping AuColumnMapping::defaults() {
  AuColumnMapping m;
  for (std::size_t i = 0; i < kAUCount; ++i) m.columns[i] = default_columns(kAllAUs[i]);
  m.zero_fill[au_index(AUId::AU27)] = true;
  m.zero_fill[au_index(AUId::AU43)] = true;
  return m;
}

AuColumnMapping AuColumnMapping::parse(std::string_view content, const std::string& source) {
  AuColumnMapping m = defaults();
  const auto rows = text::lines(content);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string_view raw = text::trim(rows[i]);
    if (raw.empty() || raw.front() == '#') continue;
    const auto eq = raw.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, i + 1, "expected key = value");
    const std::string_view key = text::trim(raw.substr(0, eq));
    const std::string_view value = text::trim(raw.substr(eq + 1));
    if (key == "clamp") {
      const auto flag = parse_flag(value);
      if (!flag) throw ParseError(source, i + 1, "clamp must be true or false");
      m.clamp = *flag;
    } else if (key == "zero_fill") {
      m.zero_fill.fill(false);
      for (auto item : text::split(value, ',')) {
        if (text::trim(item).empty()) continue;
        const auto au = parse_au(item);
        if (!au) throw ParseError(source, i + 1, "unknown AU '" + std::string(item) + "'");
        m.zero_fill[au_index(*au)] = true;
      }
    } else if (const auto au = parse_au(key)) {
      if (value.empty()) throw ParseError(source, i + 1, "empty column name for " + au_name(*au));
      m.columns[au_index(*au)] = {std::string(value)};
      m.zero_fill[au_index(*au)] = false;
    } else {
      throw ParseError(source, i + 1, "unknown key '" + std::string(key) + "'");
    }
  }
  return m;
}

AuColumnMapping AuColumnMapping::load(const std::filesystem::path& path) {
  return parse(text::read_file(path), path.string());
}

const AUIntensityVector* AuTable::find(const std::string& frame_id) const {
  const auto it = index_.find(frame_id);
  return it == index_.end() ? nullptr : &vectors[it->second];
}

bool AuTable::add(std::string frame_id, const AUIntensityVector& vector) {
  if (index_.contains(frame_id)) return false;
  index_.emplace(frame_id, vectors.size());
  frame_ids.push_back(std::move(frame_id));
  vectors.push_back(vector);
  return true;
}

AuTable parse_au_intensities(std::string_view content, const AuColumnMapping& mapping,
                             const std::string& source) {
  AuTable table;
  const auto rows = text::lines(content);
  std::size_t header_line = 0;
  while (header_line < rows.size() && text::trim(rows[header_line]).empty()) ++header_line;
  if (header_line == rows.size()) throw ParseError(source + ": missing header row");

  std::vector<std::string> header;
  for (auto cell : text::split(rows[header_line], ',')) header.emplace_back(text::trim(cell));
  const auto column_of = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto id_column = column_of("frame_id");
  if (!id_column) throw ParseError(source, header_line + 1, "missing frame_id column");

  std::array<std::optional<std::size_t>, kAUCount> au_columns;
  for (std::size_t a = 0; a < kAUCount; ++a) {
    for (const auto& candidate : mapping.columns[a]) {
      if ((au_columns[a] = column_of(candidate))) break;
    }
    if (au_columns[a]) continue;
    if (!mapping.zero_fill[a]) {
      std::string tried;
      for (const auto& c : mapping.columns[a]) tried += (tried.empty() ? "" : ", ") + c;
      throw ParseError(source, header_line + 1,
                       "missing mapped column for " + au_name(kAllAUs[a]) + " (tried " + tried + ")");
    }
    table.warnings.push_back(source + ": no column for " + au_name(kAllAUs[a]) + "; zero-filled");
  }

  for (std::size_t r = header_line + 1; r < rows.size(); ++r) {
    const std::size_t line = r + 1;
    if (text::trim(rows[r]).empty()) continue;
    const auto cells = text::split(rows[r], ',');
    if (cells.size() != header.size()) {
      throw ParseError(source, line, "expected " + std::to_string(header.size()) + " cells, found " +
                                         std::to_string(cells.size()));
    }
    std::string frame_id(text::trim(cells[*id_column]));
    if (frame_id.empty()) throw ParseError(source, line, "empty frame_id");
    AUIntensityVector v;
    for (std::size_t a = 0; a < kAUCount; ++a) {
      if (!au_columns[a]) continue;
      const auto& column = header[*au_columns[a]];
      const auto value = text::parse_double(cells[*au_columns[a]]);
      if (!value || std::isnan(*value)) {
        throw ParseError(source, line, "column " + column + " is not numeric: '" +
                                           std::string(text::trim(cells[*au_columns[a]])) + "'");
      }
      double x = *value;
      if (!(x >= 0.0 && x <= 5.0)) {
        if (!mapping.clamp) {
          throw RangeError(located(source, line, "column " + column + " intensity " +
                                                     text::format_exact(x) + " outside [0, 5]"));
        }
        x = std::min(std::max(x, 0.0), 5.0);
      }
      v[kAllAUs[a]] = x;
    }
    if (!table.add(frame_id, v)) {
      throw DataError(located(source, line, "duplicate frame_id '" + frame_id + "'"));
    }
  }
  return table;
}

AuTable load_au_intensities(const std::filesystem::path& path, const AuColumnMapping& mapping) {
  return parse_au_intensities(text::read_file(path), mapping, path.string());
}

// ---------------------------------------------------------------------------
// Landmarks

std::map<std::string, FaceLandmarks> parse_landmarks(std::string_view content,
                                                     const std::string& source) {
  constexpr std::size_t kColumns = 1 + 2 * kLandmarkCount + 2;
  std::map<std::string, FaceLandmarks> table;
  const auto rows = text::lines(content);
  std::size_t r = 0;
  while (r < rows.size() && text::trim(rows[r]).empty()) ++r;
  if (r == rows.size()) throw ParseError(source + ": missing header row");
  const auto header = text::split(rows[r], ',');
  if (header.size() != kColumns || text::trim(header[0]) != "frame_id") {
    throw ParseError(source, r + 1,
                     "header must be frame_id,x0,y0,...,x67,y67,img_w,img_h (" +
                         std::to_string(kColumns) + " columns)");
  }
  for (++r; r < rows.size(); ++r) {
    const std::size_t line = r + 1;
    if (text::trim(rows[r]).empty()) continue;
    const auto cells = text::split(rows[r], ',');
    if (cells.size() != kColumns) {
      throw ParseError(source, line, "expected " + std::to_string(kColumns) + " cells, found " +
                                         std::to_string(cells.size()));
    }
    FaceLandmarks lm;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      const auto x = text::parse_double(cells[1 + 2 * i]);
      const auto y = text::parse_double(cells[2 + 2 * i]);
      if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y)) {
        throw ParseError(source, line, "landmark " + std::to_string(i) + " is not a finite number");
      }
      lm[i] = {*x, *y};
    }
    const auto w = text::parse_int<int>(cells[kColumns - 2]);
    const auto h = text::parse_int<int>(cells[kColumns - 1]);
    if (!w || !h || *w <= 0 || *h <= 0) {
      throw ParseError(source, line, "img_w and img_h must be positive integers");
    }
    lm.image_width = *w;
    lm.image_height = *h;
    std::string id(text::trim(cells[0]));
    if (id.empty()) throw ParseError(source, line, "empty frame_id");
    if (!table.emplace(id, lm).second) {
      throw DataError(located(source, line, "duplicate frame_id '" + id + "'"));
    }
  }
  return table;
}

std::map<std::string, FaceLandmarks> load_landmarks(const std::filesystem::path& path) {
  return parse_landmarks(text::read_file(path), path.string());
}

std::string format_landmarks(const std::map<std::string, FaceLandmarks>& table) {
  std::string out = "frame_id";
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    out += ",x" + std::to_string(i) + ",y" + std::to_string(i);
  }
  out += ",img_w,img_h\n";
  for (const auto& [id, lm] : table) {
    out += id;
    for (const auto& p : lm.points) out += ',' + text::format_exact(p.x) + ',' + text::format_exact(p.y);
    out += ',' + std::to_string(lm.image_width) + ',' + std::to_string(lm.image_height) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Activation maps

ActivationMap parse_activation_map(std::string_view bytes, const std::string& source) {
  if (bytes.size() >= 4 && bytes.substr(0, 4) == "CAM1") return parse_cam1(bytes, source);
  if (bytes.size() >= 2 && bytes.substr(0, 2) == "P5") return parse_pgm(bytes, source);
  throw ParseError(source + ": bad magic, expected CAM1 or P5");
}

ActivationMap load_activation_map(const std::filesystem::path& path) {
  return parse_activation_map(text::read_file(path), path.string());
}

std::string encode_cam1(const ActivationMap& map) {
  std::string out = "CAM1";
  append_u32_le(out, static_cast<std::uint32_t>(map.width()));
  append_u32_le(out, static_cast<std::uint32_t>(map.height()));
  out.reserve(out.size() + map.cells().size() * 4);
  for (double v : map.cells()) append_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

void write_activation_map(const ActivationMap& map, const std::filesystem::path& path) {
  text::write_file(path, encode_cam1(map));
}

// ---------------------------------------------------------------------------
// Pain levels

std::string level_name(LabelScheme scheme, int index) {
  static constexpr std::array<const char*, 4> kFlacc = {"No pain", "Weak pain", "Mid pain",
                                                        "Strong pain"};
  if (index < 0 || index >= level_count(scheme)) {
    throw RangeError("level " + std::to_string(index) + " outside " +
                     std::string(scheme_name(scheme)));
  }
  switch (scheme) {
    case LabelScheme::FLACC4: return kFlacc[static_cast<std::size_t>(index)];
    case LabelScheme::NFCS2: return index == 0 ? "No pain" : "Strong pain";
    case LabelScheme::BINARY: return index == 0 ? "No pain" : "Pain";
  }
  return {};
}

PainLevel bin_label(double score, LabelScheme scheme) {
  check_label_range(score, scheme);
  int index = 0;
  switch (scheme) {
    case LabelScheme::FLACC4:
      index = score < 2.5 ? 0 : score < 5.0 ? 1 : score < 7.5 ? 2 : 3;
      break;
    case LabelScheme::NFCS2:
      if (score != 0.0 && score != 4.0) {
        throw RangeError("NFCS score " + text::format_exact(score) +
                         " unsupported; only 0 (no pain) and 4 (strong pain) are binned");
      }
      index = score == 0.0 ? 0 : 1;
      break;
    case LabelScheme::BINARY:
      index = static_cast<int>(score);
      break;
  }
  return {index, level_name(scheme, index)};
}

// ---------------------------------------------------------------------------
// Folds

std::map<std::string, std::size_t> FoldSpec::assignment() const {
  std::map<std::string, std::size_t> out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (const auto& s : folds[f]) {
      const auto [it, inserted] = out.emplace(s, f);
      if (!inserted) {
        throw LeakageError("subject '" + s + "' appears in folds " + std::to_string(it->second) +
                           " and " + std::to_string(f));
      }
    }
  }
  return out;
}

FoldSpec subject_folds(std::vector<std::string> subjects, std::span<const int> fold_sizes,
                       std::uint64_t seed) {
  std::sort(subjects.begin(), subjects.end());
  subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
  long long total = 0;
  for (int size : fold_sizes) {
    if (size <= 0) throw DataError("fold sizes must be positive");
    total += size;
  }
  if (fold_sizes.empty() || total != static_cast<long long>(subjects.size())) {
    throw DataError("fold sizes sum to " + std::to_string(total) + " but there are " +
                    std::to_string(subjects.size()) + " subjects");
  }
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(subjects));
  FoldSpec spec;
  spec.seed = seed;
  auto next = subjects.begin();
  for (int size : fold_sizes) {
    std::vector<std::string> fold(next, next + size);
    std::sort(fold.begin(), fold.end());
    spec.folds.push_back(std::move(fold));
    next += size;
  }
  return spec;
}

FoldSpec subject_folds(const DatasetManifest& manifest, std::span<const int> fold_sizes,
                       std::uint64_t seed) {
  return subject_folds(manifest.subjects(), fold_sizes, seed);
}

std::string format_folds(const FoldSpec& spec) {
  std::string out = "# seed " + std::to_string(spec.seed) + "\n# fold\tsubject\n";
  for (std::size_t f = 0; f < spec.folds.size(); ++f) {
    for (const auto& s : spec.folds[f]) out += std::to_string(f) + '\t' + s + '\n';
  }
  return out;
}

FoldSpec parse_folds(std::string_view content, const std::string& source) {
  FoldSpec spec;
  const auto rows = text::lines(content);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string_view raw = text::trim(rows[i]);
    if (raw.empty()) continue;
    if (raw.front() == '#') {
      const std::string_view body = text::trim(raw.substr(1));
      if (body.starts_with("seed ")) {
        const auto seed = text::parse_int<std::uint64_t>(body.substr(5));
        if (!seed) throw ParseError(source, i + 1, "invalid seed");
        spec.seed = *seed;
      }
      continue;
    }
    const auto tab = raw.find('\t');
    if (tab == std::string_view::npos) throw ParseError(source, i + 1, "expected fold<TAB>subject");
    const auto fold = text::parse_int<std::size_t>(raw.substr(0, tab));
    const std::string subject(text::trim(raw.substr(tab + 1)));
    if (!fold || *fold > 10000) throw ParseError(source, i + 1, "invalid fold index");
    if (subject.empty()) throw ParseError(source, i + 1, "empty subject id");
    if (spec.folds.size() <= *fold) spec.folds.resize(*fold + 1);
    spec.folds[*fold].push_back(subject);
  }
  for (std::size_t f = 0; f < spec.folds.size(); ++f) {
    if (spec.folds[f].empty()) throw ParseError(source + ": fold " + std::to_string(f) + " is empty");
  }
  spec.assignment();  // rejects overlapping folds
  return spec;
}

FoldSpec load_folds(const std::filesystem::path& path) {
  return parse_folds(text::read_file(path), path.string());
}

void write_folds(const FoldSpec& folds, const std::filesystem::path& path) {
  text::write_file(path, format_folds(folds));
}

// ---------------------------------------------------------------------------
// Joined dataset

std::vector<std::string> Dataset::subjects() const {
  std::set<std::string> unique;
  for (const auto& f : frames) unique.insert(f.subject_id);
  return {unique.begin(), unique.end()};
}

Dataset load_dataset(const DatasetManifest& manifest, const AuColumnMapping& mapping) {
  Dataset dataset;
  std::map<std::filesystem::path, AuTable> au_files;
  std::map<std::filesystem::path, std::map<std::string, FaceLandmarks>> landmark_files;
  for (const auto& e : manifest.entries) {
    const auto au_path = manifest.resolve(e.au_path);
    auto au_it = au_files.find(au_path);
    if (au_it == au_files.end()) {
      au_it = au_files.emplace(au_path, load_au_intensities(au_path, mapping)).first;
      for (const auto& w : au_it->second.warnings) dataset.warnings.push_back(w);
    }
    const auto lm_path = manifest.resolve(e.landmark_path);
    auto lm_it = landmark_files.find(lm_path);
    if (lm_it == landmark_files.end()) lm_it = landmark_files.emplace(lm_path, load_landmarks(lm_path)).first;

    const AUIntensityVector* au = au_it->second.find(e.frame_id);
    if (!au) throw DataError(au_path.string() + ": no row for frame '" + e.frame_id + "'");
    const auto lm = lm_it->second.find(e.frame_id);
    if (lm == lm_it->second.end()) {
      throw DataError(lm_path.string() + ": no row for frame '" + e.frame_id + "'");
    }
    FrameRecord record;
    record.frame_id = e.frame_id;
    record.subject_id = e.subject_id;
    record.label = e.label;
    record.scheme = e.scheme;
    record.au = *au;
    record.landmarks = lm->second;
    if (!e.cam_path.empty()) record.cam_path = manifest.resolve(e.cam_path);
    record.correctly_classified = e.correctly_classified;
    dataset.frames.push_back(std::move(record));
  }
  return dataset;
}

}  // namespace aue
