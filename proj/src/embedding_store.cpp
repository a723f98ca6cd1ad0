#include "medcal/embedding_store.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace medcal {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'M', 'C', 'A', 'L', 'F', 'B', '1', '\0'};
constexpr std::size_t kHeaderBytes = 24;
constexpr std::uint32_t kBinaryVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "binary codec assumes a little-endian host");

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  std::memcpy(&v, bytes.data() + offset, 4);
  return v;
}

json manifest_to_json(const Manifest& m) {
  return json{{"source_model", m.source_model},
              {"created_at", m.created_at},
              {"format_version", m.format_version},
              {"normalization", std::string(to_string(m.normalization))},
              {"extra", m.extra}};
}

Manifest manifest_from_json(const json& j) {
  Manifest m;
  m.source_model = j.value("source_model", m.source_model);
  m.created_at = j.value("created_at", m.created_at);
  m.format_version = j.value("format_version", m.format_version);
  if (j.contains("normalization")) {
    m.normalization = parse_normalization(j.at("normalization").get<std::string>());
  }
  if (j.contains("extra")) {
    m.extra = j.at("extra").get<std::map<std::string, std::string>>();
  }
  if (m.format_version != kFormatVersion) {
    throw Error(ErrorCode::kMalformedHeader,
                "unrecognized manifest format_version '" + m.format_version + "'");
  }
  return m;
}

std::string format_float(float v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> csv_split(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) {
    throw Error(ErrorCode::kMalformedHeader,
                "unterminated quote on line " + std::to_string(line_no));
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoFailure, "cannot open '" + path.string() + "'");
  }
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw Error(ErrorCode::kIoFailure, "read failed for '" + path.string() + "'");
  }
  return bytes;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoFailure, "cannot open '" + path.string() + "' for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) {
    throw Error(ErrorCode::kIoFailure, "write failed for '" + path.string() + "'");
  }
}

FeatureBank decode_csv(std::string_view text, std::optional<Manifest> manifest, bool strict) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  if (lines.empty()) throw Error(ErrorCode::kMalformedHeader, "empty csv file");

  auto header = csv_split(lines[0], 1);
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);
  if (header.empty() || header[0] != "id") {
    throw Error(ErrorCode::kMalformedHeader, "csv header must start with 'id'");
  }
  const bool has_group = header.size() > 1 && header[1] == "group";
  const std::size_t first_feature = has_group ? 2 : 1;
  const std::size_t dim = header.size() - first_feature;
  for (std::size_t j = 0; j < dim; ++j) {
    if (header[first_feature + j] != "f" + std::to_string(j)) {
      throw Error(ErrorCode::kMalformedHeader,
                  "expected column 'f" + std::to_string(j) + "', found '" +
                      header[first_feature + j] + "'");
    }
  }

  const std::size_t n = lines.size() - 1;
  std::vector<float> features;
  features.reserve(n * dim);
  std::vector<std::string> ids;
  std::vector<std::string> groups;
  for (std::size_t r = 0; r < n; ++r) {
    auto fields = csv_split(lines[r + 1], r + 2);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "row " + std::to_string(r) + " has " + std::to_string(fields.size()) +
                      " fields, header declares " + std::to_string(header.size()));
    }
    ids.push_back(fields[0]);
    if (has_group) groups.push_back(fields[1]);
    for (std::size_t j = 0; j < dim; ++j) {
      const std::string& f = fields[first_feature + j];
      float v = 0.0f;
      auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw Error(ErrorCode::kMalformedHeader, "unparseable value '" + f + "' at row " +
                                                     std::to_string(r) + ", column " +
                                                     std::to_string(j));
      }
      features.push_back(v);
    }
  }

  Manifest m = manifest.value_or(Manifest{});
  std::optional<std::vector<std::string>> group_ids;
  if (has_group) group_ids = std::move(groups);
  FeatureBank bank(n, dim, std::move(features), std::move(ids), std::move(group_ids),
                   m.normalization, m);
  if (strict) require_valid(bank);
  return bank;
}

std::string encode_csv(const FeatureBank& bank) {
  std::string out = "id";
  const bool has_group = bank.group_ids().has_value();
  if (has_group) out += ",group";
  for (std::size_t j = 0; j < bank.dim(); ++j) out += ",f" + std::to_string(j);
  out += '\n';
  for (std::size_t i = 0; i < bank.n_samples(); ++i) {
    out += csv_quote(bank.sample_ids()[i]);
    if (has_group) out += "," + csv_quote((*bank.group_ids())[i]);
    for (float v : bank.row(i)) {
      out += ',';
      out += format_float(v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace

std::string_view to_string(Normalization mode) {
  switch (mode) {
    case Normalization::kRaw: return "raw";
    case Normalization::kL2: return "l2";
    case Normalization::kZScore: return "zscore";
  }
  return "raw";
}

Normalization parse_normalization(std::string_view name) {
  if (name == "raw") return Normalization::kRaw;
  if (name == "l2") return Normalization::kL2;
  if (name == "zscore") return Normalization::kZScore;
  throw Error(ErrorCode::kInvalidArgument, "unknown normalization '" + std::string(name) + "'");
}

std::string_view to_string(FileFormat format) {
  return format == FileFormat::kCsv ? "csv" : "binary";
}

FileFormat parse_file_format(std::string_view name) {
  if (name == "binary") return FileFormat::kBinary;
  if (name == "csv") return FileFormat::kCsv;
  throw Error(ErrorCode::kInvalidArgument, "unknown file format '" + std::string(name) + "'");
}

FileFormat infer_file_format(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".csv" ? FileFormat::kCsv : FileFormat::kBinary;
}

FeatureBank::FeatureBank(std::size_t n_samples, std::size_t dim, std::vector<float> features,
                         std::vector<std::string> sample_ids,
                         std::optional<std::vector<std::string>> group_ids,
                         Normalization normalization, Manifest manifest)
    : n_samples_(n_samples),
      dim_(dim),
      features_(std::move(features)),
      sample_ids_(std::move(sample_ids)),
      group_ids_(std::move(group_ids)),
      normalization_(normalization),
      manifest_(std::move(manifest)) {
  if (features_.size() != n_samples_ * dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "declared " + std::to_string(n_samples_) + " x " + std::to_string(dim_) +
                    " but payload holds " + std::to_string(features_.size()) + " values");
  }
  if (sample_ids_.size() != n_samples_) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(sample_ids_.size()) + " sample ids for " +
                    std::to_string(n_samples_) + " samples");
  }
  manifest_.normalization = normalization_;
}

FeatureBank FeatureBank::from_rows(const std::vector<std::vector<float>>& rows) {
  const std::size_t n = rows.size();
  const std::size_t dim = n == 0 ? 0 : rows.front().size();
  std::vector<float> features;
  features.reserve(n * dim);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch, "ragged row " + std::to_string(i));
    }
    features.insert(features.end(), rows[i].begin(), rows[i].end());
    ids.push_back(std::to_string(i));
  }
  return FeatureBank(n, dim, std::move(features), std::move(ids));
}

FeatureBank FeatureBank::with_features(std::vector<float> features,
                                       Normalization normalization) const {
  return FeatureBank(n_samples_, dim_, std::move(features), sample_ids_, group_ids_,
                     normalization, manifest_);
}

FeatureBank FeatureBank::with_manifest(Manifest manifest) const {
  return FeatureBank(n_samples_, dim_, features_, sample_ids_, group_ids_, normalization_,
                     std::move(manifest));
}

std::optional<std::vector<bool>> FeatureBank::foreground() const {
  auto it = manifest_.extra.find(std::string(kForegroundKey));
  if (it == manifest_.extra.end()) return std::nullopt;
  const std::string& flags = it->second;
  if (flags.size() != n_samples_) return std::nullopt;
  std::vector<bool> out(n_samples_);
  for (std::size_t i = 0; i < n_samples_; ++i) {
    if (flags[i] != '0' && flags[i] != '1') return std::nullopt;
    out[i] = flags[i] == '1';
  }
  return out;
}

ValidationReport validate(const FeatureBank& bank) {
  ValidationReport report;
  const std::size_t n = bank.n_samples();
  const std::size_t d = bank.dim();
  if (n == 0 || d == 0) {
    report.violations.push_back({ErrorCode::kDimensionMismatch, {}, std::nullopt,
                                 "bank must have at least one sample and one dimension"});
  }
  if (bank.features().size() != n * d) {
    report.violations.push_back({ErrorCode::kDimensionMismatch, {}, std::nullopt,
                                 "payload size does not match n_samples x dim"});
    return report;
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto row = bank.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      if (!std::isfinite(row[j])) {
        report.violations.push_back({ErrorCode::kNonFiniteValue, {i}, j,
                                     "non-finite value at row " + std::to_string(i) +
                                         ", column " + std::to_string(j)});
      }
    }
  }

  std::unordered_map<std::string_view, std::size_t> first_seen;
  for (std::size_t i = 0; i < bank.sample_ids().size(); ++i) {
    const std::string& id = bank.sample_ids()[i];
    auto [it, inserted] = first_seen.emplace(id, i);
    if (!inserted) {
      report.violations.push_back({ErrorCode::kDuplicateId, {it->second, i}, std::nullopt,
                                   "duplicate id '" + id + "' at rows " +
                                       std::to_string(it->second) + " and " +
                                       std::to_string(i)});
    }
  }

  if (bank.group_ids() && bank.group_ids()->size() != n) {
    report.violations.push_back({ErrorCode::kDimensionMismatch, {}, std::nullopt,
                                 std::to_string(bank.group_ids()->size()) +
                                     " group ids for " + std::to_string(n) + " samples"});
  }

  if (bank.manifest().format_version != kFormatVersion) {
    report.violations.push_back({ErrorCode::kMalformedHeader, {}, std::nullopt,
                                 "unrecognized format_version '" +
                                     bank.manifest().format_version + "'"});
  }

  if (bank.normalization() == Normalization::kL2) {
    for (std::size_t i = 0; i < n; ++i) {
      double sq = 0.0;
      bool zero = true;
      for (float v : bank.row(i)) {
        sq += static_cast<double>(v) * v;
        zero = zero && v == 0.0f;
      }
      if (zero) {
        report.warnings.push_back({ErrorCode::kZeroVector, {i}, std::nullopt,
                                   "row " + std::to_string(i) + " is all zero"});
      } else if (std::isfinite(sq) && std::abs(std::sqrt(sq) - 1.0) > kUnitNormTolerance) {
        report.violations.push_back({ErrorCode::kNormalizationMismatch, {i}, std::nullopt,
                                     "row " + std::to_string(i) +
                                         " is not unit norm in an l2 bank"});
      }
    }
  }
  return report;
}

void require_valid(const FeatureBank& bank) {
  auto report = validate(bank);
  if (!report.clean()) {
    const auto& v = report.violations.front();
    throw Error(v.code, v.message);
  }
}

std::string encode_binary(const FeatureBank& bank) {
  std::string out;
  out.reserve(kHeaderBytes + bank.features().size() * 4 + 64);
  out.append(kMagic, 8);
  put_u32(out, kBinaryVersion);
  put_u32(out, static_cast<std::uint32_t>(bank.n_samples()));
  put_u32(out, static_cast<std::uint32_t>(bank.dim()));
  out.push_back(static_cast<char>(bank.normalization()));
  out.append(3, '\0');
  const auto features = bank.features();
  out.append(reinterpret_cast<const char*>(features.data()), features.size() * sizeof(float));

  json trailer;
  trailer["sample_ids"] = bank.sample_ids();
  if (bank.group_ids()) trailer["group_ids"] = *bank.group_ids();
  trailer["manifest"] = manifest_to_json(bank.manifest());
  const std::string text = trailer.dump();
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  return out;
}

FeatureBank decode_binary(std::string_view bytes, bool strict) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw Error(ErrorCode::kMalformedHeader, "bad magic bytes");
  }
  const std::uint32_t version = get_u32(bytes, 8);
  if (version != kBinaryVersion) {
    throw Error(ErrorCode::kMalformedHeader,
                "unsupported format version " + std::to_string(version));
  }
  const std::uint64_t n = get_u32(bytes, 12);
  const std::uint64_t d = get_u32(bytes, 16);
  const auto norm_code = static_cast<std::uint8_t>(bytes[20]);
  if (norm_code > 2) {
    throw Error(ErrorCode::kMalformedHeader,
                "unknown normalization code " + std::to_string(norm_code));
  }
  if (bytes[21] != 0 || bytes[22] != 0 || bytes[23] != 0) {
    throw Error(ErrorCode::kMalformedHeader, "reserved header bytes are not zero");
  }

  const std::uint64_t available = bytes.size() - kHeaderBytes;
  // Division first: n * d * 4 can overflow for hostile headers.
  const bool too_big = d != 0 && n > (available / sizeof(float)) / d;
  const std::uint64_t payload = too_big ? 0 : n * d * sizeof(float);
  if (too_big || payload + 4 > available) {
    throw Error(ErrorCode::kDimensionMismatch,
                "declared " + std::to_string(n) + " x " + std::to_string(d) +
                    " floats but file is too short");
  }
  const std::uint64_t trailer_len = get_u32(bytes, kHeaderBytes + payload);
  if (payload + 4 + trailer_len != available) {
    throw Error(ErrorCode::kDimensionMismatch,
                "declared " + std::to_string(n) + " x " + std::to_string(d) +
                    " floats do not match the file length");
  }

  std::vector<float> features(n * d);
  std::memcpy(features.data(), bytes.data() + kHeaderBytes, payload);

  json trailer;
  try {
    trailer = json::parse(bytes.substr(kHeaderBytes + payload + 4, trailer_len));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedHeader, std::string("invalid JSON trailer: ") + e.what());
  }

  std::vector<std::string> ids;
  std::optional<std::vector<std::string>> groups;
  Manifest manifest;
  try {
    ids = trailer.at("sample_ids").get<std::vector<std::string>>();
    if (trailer.contains("group_ids")) {
      groups = trailer.at("group_ids").get<std::vector<std::string>>();
    }
    if (trailer.contains("manifest")) manifest = manifest_from_json(trailer.at("manifest"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedHeader, std::string("invalid JSON trailer: ") + e.what());
  }
  if (ids.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, std::to_string(ids.size()) +
                                                   " sample ids for " + std::to_string(n) +
                                                   " samples");
  }
  const auto normalization = static_cast<Normalization>(norm_code);
  if (trailer.contains("manifest") && manifest.normalization != normalization) {
    throw Error(ErrorCode::kMalformedHeader,
                "manifest normalization disagrees with header normalization code");
  }

  FeatureBank bank(n, d, std::move(features), std::move(ids), std::move(groups), normalization,
                   std::move(manifest));
  if (strict) require_valid(bank);
  return bank;
}

std::filesystem::path csv_manifest_path(const std::filesystem::path& csv_path) {
  return std::filesystem::path(csv_path.string() + ".manifest.json");
}

FeatureBank load_feature_bank(const std::filesystem::path& path, FileFormat format,
                              bool strict) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kIoFailure, "no such file '" + path.string() + "'");
  }
  const std::string bytes = read_file(path);
  if (format == FileFormat::kBinary) return decode_binary(bytes, strict);

  std::optional<Manifest> manifest;
  const auto sidecar = csv_manifest_path(path);
  if (std::filesystem::exists(sidecar)) {
    try {
      manifest = manifest_from_json(json::parse(read_file(sidecar)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedHeader,
                  "invalid manifest sidecar '" + sidecar.string() + "': " + e.what());
    }
  }
  return decode_csv(bytes, std::move(manifest), strict);
}

void save_feature_bank(const FeatureBank& bank, const std::filesystem::path& path,
                       FileFormat format) {
  if (format == FileFormat::kBinary) {
    write_file(path, encode_binary(bank));
    return;
  }
  write_file(path, encode_csv(bank));
  json sidecar = manifest_to_json(bank.manifest());
  if (bank.group_ids()) {
    json groups = json::object();
    for (std::size_t i = 0; i < bank.n_samples(); ++i) {
      groups[(*bank.group_ids())[i]].push_back(bank.sample_ids()[i]);
    }
    sidecar["groups"] = std::move(groups);
  }
  write_file(csv_manifest_path(path), sidecar.dump(2) + "\n");
}

FeatureBank normalize(const FeatureBank& bank, Normalization mode, NormalizeNotes* notes) {
  if (mode == Normalization::kRaw) {
    throw Error(ErrorCode::kInvalidArgument, "normalize needs mode l2 or zscore");
  }
  if (bank.normalization() != Normalization::kRaw && bank.normalization() != mode) {
    throw Error(ErrorCode::kAlreadyNormalized,
                "bank is already " + std::string(to_string(bank.normalization())) +
                    ", refusing " + std::string(to_string(mode)));
  }
  const std::size_t n = bank.n_samples();
  const std::size_t d = bank.dim();
  std::vector<float> out(bank.features().begin(), bank.features().end());
  NormalizeNotes local;

  if (mode == Normalization::kL2) {
    for (std::size_t i = 0; i < n; ++i) {
      double sq = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double v = out[i * d + j];
        sq += v * v;
      }
      if (sq == 0.0) {
        local.zero_rows.push_back(i);
        continue;
      }
      const double norm = std::sqrt(sq);
      for (std::size_t j = 0; j < d; ++j) {
        out[i * d + j] = static_cast<float>(out[i * d + j] / norm);
      }
    }
  } else {
    for (std::size_t j = 0; j < d; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += out[i * d + j];
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double c = out[i * d + j] - mean;
        var += c * c;
      }
      const double sd = std::sqrt(var / static_cast<double>(n));
      // Relative guard so that float noise in a constant column is not
      // blown up to unit variance.
      if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
        local.constant_columns.push_back(j);
        for (std::size_t i = 0; i < n; ++i) out[i * d + j] = 0.0f;
        continue;
      }
      for (std::size_t i = 0; i < n; ++i) {
        out[i * d + j] = static_cast<float>((out[i * d + j] - mean) / sd);
      }
    }
  }
  if (notes) *notes = std::move(local);
  return bank.with_features(std::move(out), mode);
}

}  // namespace medcal
