#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtcx/data.hpp"
#include "dtcx/metrics.hpp"
#include "dtcx/neural.hpp"

// Model persistence: a single canonical JSON document (sorted keys,
// shortest round-trip doubles) so that save -> load -> save is byte-stable.
namespace dtcx::cli {

inline constexpr int kFormatVersion = 1;

struct SplitInfo {
  std::uint64_t seed = 0;
  double ratio = 0.8;
  bool stratified = false;
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  std::uint64_t train_digest = 0;
  std::uint64_t test_digest = 0;

  friend bool operator==(const SplitInfo&, const SplitInfo&) = default;
};

struct ModelArtifact {
  int format_version = kFormatVersion;
  data::FeatureSchema schema;
  data::Scaler scaler;
  neural::Mlp model;
  std::vector<std::size_t> hidden;
  neural::TrainConfig train_config;
  SplitInfo split;
  metrics::ConfusionMatrix train_confusion;
  metrics::ConfusionMatrix test_confusion;
  metrics::MetricsReport train_metrics;
  metrics::MetricsReport test_metrics;
};

nlohmann::json metrics_to_json(const metrics::MetricsReport& m);
nlohmann::json confusion_to_json(const metrics::ConfusionMatrix& cm);
nlohmann::json schema_to_json(const data::FeatureSchema& schema);

nlohmann::json to_json(const ModelArtifact& artifact);
// Throws UnsupportedVersion, MissingField or CorruptArtifact.
ModelArtifact from_json(const nlohmann::json& doc);

std::string serialize(const ModelArtifact& artifact);
ModelArtifact deserialize(const std::string& text);

void save_model(const ModelArtifact& artifact, const std::filesystem::path& path);
ModelArtifact load_model(const std::filesystem::path& path);

// Canonical JSON text used for every emitted document.
std::string dump_canonical(const nlohmann::json& doc);

}  // namespace dtcx::cli
