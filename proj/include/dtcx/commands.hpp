#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dtcx/artifact.hpp"
#include "dtcx/error.hpp"
#include "dtcx/lime.hpp"
#include "dtcx/morris.hpp"

// Pipeline orchestration behind the `dtcx` subcommands. The run_* functions
// compute; the cmd_* functions also write their report files.
namespace dtcx::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kDataError = 3, kArtifactError = 4 };

int exit_code_for(ErrorCode code) noexcept;

enum class Partition { Train, Test, All };
Partition parse_partition(const std::string& name);
const char* partition_name(Partition p) noexcept;

struct RunReport {
  neural::TrainHistory history;
  metrics::ConfusionMatrix train_confusion;
  metrics::ConfusionMatrix test_confusion;
  metrics::MetricsReport train_metrics;
  metrics::MetricsReport test_metrics;
  double elapsed_ms = 0.0;
};

struct TrainOptions {
  std::filesystem::path data;
  std::filesystem::path out;
  std::uint64_t seed = 1;
  neural::TrainConfig config;
  std::vector<std::size_t> hidden{128, 64, 32};
  double split_ratio = 0.8;
  bool stratify = false;
};

struct TrainOutcome {
  ModelArtifact artifact;
  RunReport report;
};

TrainOutcome run_train(const TrainOptions& options);
int cmd_train(const TrainOptions& options, std::ostream& out);

// Encoded, scaled partitions of a data file reconstructed from an artifact.
struct PreparedData {
  Matrix x_all;  // scaled
  std::vector<int> y_all;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

// Re-encodes `data` with the artifact's schema and recomputes its split,
// checking the split digests recorded at training time.
PreparedData prepare(const ModelArtifact& artifact, const std::filesystem::path& data);

struct EvaluateOptions {
  std::filesystem::path model;
  std::filesystem::path data;
  Partition partition = Partition::Test;
  std::optional<std::filesystem::path> out;
};

struct EvaluateResult {
  metrics::ConfusionMatrix confusion;
  metrics::MetricsReport metrics;
};

EvaluateResult run_evaluate(const EvaluateOptions& options);
int cmd_evaluate(const EvaluateOptions& options, std::ostream& out);

struct ExplainOptions {
  std::filesystem::path model;
  std::filesystem::path data;
  std::filesystem::path out;
  Partition partition = Partition::Test;
  std::size_t index = 0;
  lime::LimeConfig lime;
};

struct ExplainResult {
  lime::Explanation explanation;
  std::size_t dataset_row = 0;
  std::vector<std::string> feature_names;
};

ExplainResult run_explain(const ExplainOptions& options);
int cmd_explain(const ExplainOptions& options, std::ostream& out);

struct SensitivityOptions {
  std::filesystem::path model;
  std::filesystem::path data;
  std::filesystem::path out;
  morris::MorrisConfig morris;
};

morris::MorrisResult run_sensitivity(const SensitivityOptions& options);
int cmd_sensitivity(const SensitivityOptions& options, std::ostream& out);

// Report renderers, exposed for tests.
std::string history_csv(const neural::TrainHistory& history);
std::string metrics_table(const metrics::MetricsReport& train, const metrics::MetricsReport& test);
nlohmann::json report_to_json(const RunReport& report);
nlohmann::json explanation_to_json(const ExplainResult& result);
std::string explanation_bars_csv(const lime::Explanation& explanation);
nlohmann::json morris_to_json(const morris::MorrisResult& result);
std::string morris_table_csv(const morris::MorrisResult& result);
std::string morris_scatter_csv(const morris::MorrisResult& result);

// Shortest round-trip decimal for a double.
std::string format_double(double v);

}  // namespace dtcx::cli
