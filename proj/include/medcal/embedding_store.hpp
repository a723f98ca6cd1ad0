#pragma once

// Feature banks: the N x d matrix of per-sample embeddings produced by a
// frozen feature extractor, plus ids, optional group ids and a manifest.
//
// Binary layout (little-endian):
//   0   char[8]  magic "MCALFB1\0"
//   8   u32      format_version (1)
//   12  u32      n_samples
//   16  u32      dim
//   20  u8       normalization (0 raw, 1 l2, 2 zscore)
//   21  u8[3]    reserved, zero
//   24  f32[n_samples * dim] row-major features
//   ..  u32      trailer length L
//   ..  u8[L]    UTF-8 JSON: {"sample_ids": [...], "group_ids": [...]?,
//                             "manifest": {...}}
//
// CSV layout: header `id[,group],f0,...,f{d-1}`, one row per sample. An
// optional `<file>.manifest.json` sidecar carries the manifest and, when
// group ids exist, a "groups" object mapping each group to its sample ids.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "medcal/error.hpp"

namespace medcal {

enum class Normalization : std::uint8_t { kRaw = 0, kL2 = 1, kZScore = 2 };

std::string_view to_string(Normalization mode);
Normalization parse_normalization(std::string_view name);

inline constexpr std::string_view kFormatVersion = "1";
inline constexpr double kUnitNormTolerance = 1e-6;

struct Manifest {
  std::string source_model = "unknown";
  std::string created_at = "1970-01-01T00:00:00Z";
  std::string format_version = std::string(kFormatVersion);
  Normalization normalization = Normalization::kRaw;
  std::map<std::string, std::string> extra;

  bool operator==(const Manifest&) const = default;
};

/// Manifest key for an optional per-sample foreground flag: a string of
/// '0'/'1' characters, one per sample in row order.
inline constexpr std::string_view kForegroundKey = "foreground";

/// Immutable feature matrix with sample identities.
///
/// Construction only checks the structural shape (payload and id counts).
/// Value-level invariants (finite entries, unique ids, unit rows for l2
/// banks, group count) are checked by validate() so that broken banks can
/// still be inspected; load_feature_bank() enforces them.
class FeatureBank {
 public:
  FeatureBank() = default;
  FeatureBank(std::size_t n_samples, std::size_t dim, std::vector<float> features,
              std::vector<std::string> sample_ids,
              std::optional<std::vector<std::string>> group_ids = std::nullopt,
              Normalization normalization = Normalization::kRaw,
              Manifest manifest = {});

  /// Bank from explicit rows with ids "0", "1", ...
  static FeatureBank from_rows(const std::vector<std::vector<float>>& rows);

  std::size_t n_samples() const noexcept { return n_samples_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const float> features() const noexcept { return features_; }
  std::span<const float> row(std::size_t i) const noexcept {
    return {features_.data() + i * dim_, dim_};
  }
  const std::vector<std::string>& sample_ids() const noexcept { return sample_ids_; }
  const std::optional<std::vector<std::string>>& group_ids() const noexcept {
    return group_ids_;
  }
  Normalization normalization() const noexcept { return normalization_; }
  const Manifest& manifest() const noexcept { return manifest_; }

  /// Same ids and manifest, new matrix of identical shape.
  FeatureBank with_features(std::vector<float> features,
                            Normalization normalization) const;
  FeatureBank with_manifest(Manifest manifest) const;

  /// Per-sample foreground flags if the manifest carries them.
  std::optional<std::vector<bool>> foreground() const;

 private:
  std::size_t n_samples_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> features_;
  std::vector<std::string> sample_ids_;
  std::optional<std::vector<std::string>> group_ids_;
  Normalization normalization_ = Normalization::kRaw;
  Manifest manifest_;
};

enum class FileFormat { kBinary, kCsv };

std::string_view to_string(FileFormat format);
FileFormat parse_file_format(std::string_view name);
/// `.csv` (any case) maps to csv, everything else to binary.
FileFormat infer_file_format(const std::filesystem::path& path);

struct Violation {
  ErrorCode code;
  std::vector<std::size_t> rows;
  std::optional<std::size_t> column;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  /// Non-fatal findings, e.g. all-zero rows in an l2 bank.
  std::vector<Violation> warnings;

  bool clean() const noexcept { return violations.empty(); }
};

ValidationReport validate(const FeatureBank& bank);

/// Throws the first violation of validate() as an Error.
void require_valid(const FeatureBank& bank);

/// In-memory binary codec. decode_binary() with `strict` set rejects banks
/// that fail validate(); otherwise only structural errors are raised.
std::string encode_binary(const FeatureBank& bank);
FeatureBank decode_binary(std::string_view bytes, bool strict = true);

FeatureBank load_feature_bank(const std::filesystem::path& path, FileFormat format,
                              bool strict = true);
void save_feature_bank(const FeatureBank& bank, const std::filesystem::path& path,
                       FileFormat format);

std::filesystem::path csv_manifest_path(const std::filesystem::path& csv_path);

struct NormalizeNotes {
  std::vector<std::size_t> zero_rows;
  std::vector<std::size_t> constant_columns;
};

/// l2: each nonzero row scaled to unit norm, zero rows kept as is.
/// zscore: column-wise (x - mean) / sd with population sd; constant
/// columns become 0. Re-applying the bank's current mode is allowed;
/// asking for a different mode on an already normalized bank throws
/// AlreadyNormalized.
FeatureBank normalize(const FeatureBank& bank, Normalization mode,
                      NormalizeNotes* notes = nullptr);

}  // namespace medcal
