#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "medcal/harness.hpp"
#include "medcal/rng.hpp"

namespace medcal {

namespace {

constexpr std::uint64_t kMeanStream = 1;
constexpr std::uint64_t kSampleStreamBase = 2;

std::vector<double> class_means(const SyntheticSpec& spec) {
  const std::size_t k = spec.n_classes;
  const std::size_t d = spec.dim;
  std::vector<double> means(k * d, 0.0);
  if (k < 2) return means;

  Rng rng(spec.seed, kMeanStream);
  for (double& v : means) v = rng.normal();

  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      double sq = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = means[a * d + j] - means[b * d + j];
        sq += diff * diff;
      }
      closest = std::min(closest, std::sqrt(sq));
    }
  }
  const double target = spec.class_separation * spec.within_class_sd;
  const double scale = closest > 0.0 ? target / closest : 0.0;
  for (double& v : means) v *= scale;
  return means;
}

}  // namespace

LabeledBank generate_mixture(const SyntheticSpec& spec, std::uint64_t sample_stream) {
  if (spec.n_classes < 1 || spec.samples_per_class < 1 || spec.dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic spec counts must be at least 1");
  }
  if (!(spec.within_class_sd > 0.0) || !(spec.class_separation >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "within_class_sd must be positive and class_separation nonnegative");
  }
  const std::size_t d = spec.dim;
  const auto means = class_means(spec);
  const std::size_t n = spec.n_classes * spec.samples_per_class;

  Rng rng(spec.seed, kSampleStreamBase + sample_stream);
  std::vector<float> features(n * d);
  std::vector<std::size_t> labels(n);
  std::vector<std::string> ids(n);
  const std::string prefix = sample_stream == 0 ? "s" : "t" + std::to_string(sample_stream) + "_";
  for (std::size_t c = 0, i = 0; c < spec.n_classes; ++c) {
    for (std::size_t s = 0; s < spec.samples_per_class; ++s, ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        features[i * d + j] =
            static_cast<float>(means[c * d + j] + spec.within_class_sd * rng.normal());
      }
      labels[i] = c;
      ids[i] = prefix + std::to_string(i);
    }
  }
  Manifest manifest;
  manifest.source_model = "synthetic-gaussian-mixture";
  manifest.extra = {{"n_classes", std::to_string(spec.n_classes)},
                    {"seed", std::to_string(spec.seed)},
                    {"sample_stream", std::to_string(sample_stream)}};
  return {FeatureBank(n, d, std::move(features), std::move(ids), std::nullopt,
                      Normalization::kRaw, std::move(manifest)),
          std::move(labels)};
}

}  // namespace medcal
