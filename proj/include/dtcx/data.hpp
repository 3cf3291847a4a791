#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dtcx/matrix.hpp"

// Tabular loading, label encoding, train/test split and standardization.
namespace dtcx::data {

enum class FeatureKind { Numeric, Categorical };

struct Feature {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;
  std::vector<std::string> vocab;  // sorted; empty for Numeric

  friend bool operator==(const Feature&, const Feature&) = default;
};

struct FeatureSchema {
  std::vector<Feature> features;
  std::string target_name;
  std::string negative_label;  // target_vocab[0]
  std::string positive_label;  // target_vocab[1], lexicographically later

  std::size_t dim() const noexcept { return features.size(); }
  // Index of a feature by name, or dim() when absent.
  std::size_t index_of(std::string_view name) const noexcept;
  // Throws InvalidConfig when an invariant is violated.
  void validate() const;

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;
};

// Raw CSV contents: header plus string cells, target column split off.
struct RawTable {
  std::vector<std::string> header;           // feature columns then target
  std::vector<std::vector<std::string>> rows;  // feature cells only
  std::vector<std::string> targets;
};

struct Dataset {
  FeatureSchema schema;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> targets;

  std::size_t size() const noexcept { return rows.size(); }
};

struct EncodedDataset {
  Matrix x;
  std::vector<int> y;
  FeatureSchema schema;
};

struct Scaler {
  std::vector<double> means;
  std::vector<double> stds;

  std::size_t dim() const noexcept { return means.size(); }
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
  double ratio = 0.8;
};

// RFC-4180 parsing of one record set; quoted fields may contain commas,
// doubled quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

RawTable read_table(const std::filesystem::path& path);
Dataset load_csv(const std::filesystem::path& path);

FeatureSchema build_schema(const std::vector<std::string>& header,
                           const std::vector<std::vector<std::string>>& rows,
                           const std::vector<std::string>& targets);

EncodedDataset label_encode(const Dataset& dataset);

// Encodes a raw table against an existing schema; throws SchemaMismatch when
// the column names differ or a cell is outside the schema's vocabulary.
EncodedDataset encode_with_schema(const RawTable& table, const FeatureSchema& schema);

// Train size is n - round((1 - ratio) * n). With `stratify`, each class is
// permuted separately and contributes to the test side in proportion to its
// size (largest-remainder allocation), keeping the same total sizes.
SplitIndices split(std::size_t n, double ratio, std::uint64_t seed);
SplitIndices split_stratified(std::span<const int> labels, double ratio, std::uint64_t seed);

Scaler fit_scaler(const Matrix& x_train);
Matrix apply_scaler(const Scaler& scaler, const Matrix& x);

// Order-sensitive FNV-1a digest of an index list, for artifact provenance.
std::uint64_t index_digest(std::span<const std::size_t> indices) noexcept;

}  // namespace dtcx::data
