#include "dtcx/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dtcx/error.hpp"
#include "dtcx/random.hpp"

namespace dtcx::data {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc{} && ptr == cell.data() + cell.size() && std::isfinite(out);
}

std::size_t vocab_index(const std::vector<std::string>& vocab, const std::string& value) {
  const auto it = std::lower_bound(vocab.begin(), vocab.end(), value);
  if (it == vocab.end() || *it != value) return vocab.size();
  return static_cast<std::size_t>(it - vocab.begin());
}

}  // namespace

std::size_t FeatureSchema::index_of(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].name == name) return i;
  }
  return features.size();
}

void FeatureSchema::validate() const {
  std::set<std::string> seen;
  for (const auto& f : features) {
    if (f.name.empty()) throw Error(ErrorCode::InvalidConfig, "empty feature name");
    if (!seen.insert(f.name).second) {
      throw Error(ErrorCode::InvalidConfig, "duplicate feature name '" + f.name + "'");
    }
    if (f.kind == FeatureKind::Categorical) {
      if (f.vocab.empty() || !std::is_sorted(f.vocab.begin(), f.vocab.end()) ||
          std::adjacent_find(f.vocab.begin(), f.vocab.end()) != f.vocab.end()) {
        throw Error(ErrorCode::InvalidConfig, "vocab of '" + f.name + "' not sorted/unique");
      }
    } else if (!f.vocab.empty()) {
      throw Error(ErrorCode::InvalidConfig, "numeric feature '" + f.name + "' has a vocab");
    }
  }
  if (negative_label.empty() || positive_label.empty() || !(negative_label < positive_label)) {
    throw Error(ErrorCode::InvalidConfig, "target vocab must be two sorted distinct labels");
  }
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;  // current record has content

  auto end_record = [&] {
    if (any || !field.empty() || !record.empty()) {
      record.push_back(std::move(field));
      records.push_back(std::move(record));
    }
    record.clear();
    field.clear();
    any = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        any = true;
    }
  }
  end_record();
  return records;
}

RawTable read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  auto records = parse_csv(buf.str());
  if (records.empty()) throw Error(ErrorCode::EmptyDataset, path.string() + ": no header");

  RawTable table;
  table.header = std::move(records.front());
  if (table.header.size() < 2) {
    throw Error(ErrorCode::RaggedRow, "line 1: need at least one feature and a target");
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    auto& rec = records[r];
    if (rec.size() != table.header.size()) {
      throw Error(ErrorCode::RaggedRow, "line " + std::to_string(r + 1) + ": " +
                                            std::to_string(rec.size()) + " cells, expected " +
                                            std::to_string(table.header.size()));
    }
    table.targets.push_back(std::move(rec.back()));
    rec.pop_back();
    table.rows.push_back(std::move(rec));
  }
  if (table.rows.empty()) throw Error(ErrorCode::EmptyDataset, path.string());
  return table;
}

Dataset load_csv(const std::filesystem::path& path) {
  RawTable table = read_table(path);
  Dataset ds;
  ds.schema = build_schema(table.header, table.rows, table.targets);
  ds.rows = std::move(table.rows);
  ds.targets = std::move(table.targets);
  return ds;
}

FeatureSchema build_schema(const std::vector<std::string>& header,
                           const std::vector<std::vector<std::string>>& rows,
                           const std::vector<std::string>& targets) {
  if (rows.empty()) throw Error(ErrorCode::EmptyDataset, "no data rows");
  if (header.size() != rows.front().size() + 1) {
    throw Error(ErrorCode::RaggedRow, "header width does not match rows");
  }
  FeatureSchema schema;
  const std::size_t d = header.size() - 1;
  for (std::size_t j = 0; j < d; ++j) {
    Feature f;
    f.name = header[j];
    bool numeric = true;
    double v = 0.0;
    for (const auto& row : rows) {
      if (!parse_number(row[j], v)) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      f.kind = FeatureKind::Categorical;
      std::set<std::string> values;
      for (const auto& row : rows) values.insert(row[j]);
      f.vocab.assign(values.begin(), values.end());
    }
    schema.features.push_back(std::move(f));
  }
  schema.target_name = header.back();
  const std::set<std::string> labels(targets.begin(), targets.end());
  if (labels.size() != 2) {
    throw Error(ErrorCode::TargetNotBinary,
                std::to_string(labels.size()) + " distinct target values");
  }
  schema.negative_label = *labels.begin();
  schema.positive_label = *labels.rbegin();
  schema.validate();
  return schema;
}

EncodedDataset encode_with_schema(const RawTable& table, const FeatureSchema& schema) {
  const std::size_t d = schema.dim();
  if (table.header.size() != d + 1) {
    throw Error(ErrorCode::SchemaMismatch, std::to_string(table.header.size() - 1) +
                                               " feature columns, model expects " +
                                               std::to_string(d));
  }
  for (std::size_t j = 0; j < d; ++j) {
    if (table.header[j] != schema.features[j].name) {
      throw Error(ErrorCode::SchemaMismatch, "column " + std::to_string(j) + " is '" +
                                                 table.header[j] + "', expected '" +
                                                 schema.features[j].name + "'");
    }
  }
  if (table.header.back() != schema.target_name) {
    throw Error(ErrorCode::SchemaMismatch, "target column '" + table.header.back() + "'");
  }

  EncodedDataset enc;
  enc.schema = schema;
  enc.x = Matrix(table.rows.size(), d);
  enc.y.resize(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const auto& f = schema.features[j];
      const auto& cell = table.rows[i][j];
      if (f.kind == FeatureKind::Numeric) {
        double v = 0.0;
        if (!parse_number(cell, v)) {
          throw Error(ErrorCode::SchemaMismatch, "non-numeric '" + cell + "' in " + f.name);
        }
        enc.x(i, j) = v;
      } else {
        const std::size_t k = vocab_index(f.vocab, cell);
        if (k == f.vocab.size()) {
          throw Error(ErrorCode::SchemaMismatch, "unknown category '" + cell + "' in " + f.name);
        }
        enc.x(i, j) = static_cast<double>(k);
      }
    }
    const auto& t = table.targets[i];
    if (t == schema.positive_label) {
      enc.y[i] = 1;
    } else if (t == schema.negative_label) {
      enc.y[i] = 0;
    } else {
      throw Error(ErrorCode::SchemaMismatch, "unknown target '" + t + "'");
    }
  }
  return enc;
}

EncodedDataset label_encode(const Dataset& dataset) {
  RawTable table;
  for (const auto& f : dataset.schema.features) table.header.push_back(f.name);
  table.header.push_back(dataset.schema.target_name);
  table.rows = dataset.rows;
  table.targets = dataset.targets;
  return encode_with_schema(table, dataset.schema);
}

namespace {

void check_split_args(std::size_t n, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::DegenerateSplit, "ratio must lie in (0, 1)");
  }
  const auto n_test = static_cast<std::size_t>(std::llround((1.0 - ratio) * static_cast<double>(n)));
  if (n < 2 || n_test == 0 || n_test >= n) {
    throw Error(ErrorCode::DegenerateSplit,
                "n=" + std::to_string(n) + " ratio=" + std::to_string(ratio));
  }
}

}  // namespace

SplitIndices split(std::size_t n, double ratio, std::uint64_t seed) {
  check_split_args(n, ratio);
  const auto n_test = static_cast<std::size_t>(std::llround((1.0 - ratio) * static_cast<double>(n)));
  Rng rng = make_rng(seed, 0x5917);
  const auto perm = permutation(n, rng);
  SplitIndices s;
  s.seed = seed;
  s.ratio = ratio;
  s.train.assign(perm.begin(), perm.end() - static_cast<std::ptrdiff_t>(n_test));
  s.test.assign(perm.end() - static_cast<std::ptrdiff_t>(n_test), perm.end());
  return s;
}

SplitIndices split_stratified(std::span<const int> labels, double ratio, std::uint64_t seed) {
  const std::size_t n = labels.size();
  check_split_args(n, ratio);
  const auto n_test = static_cast<std::size_t>(std::llround((1.0 - ratio) * static_cast<double>(n)));

  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < n; ++i) by_class[labels[i] != 0 ? 1 : 0].push_back(i);

  Rng rng = make_rng(seed, 0x5917);
  for (auto& members : by_class) shuffle(std::span<std::size_t>(members), rng);

  // Largest-remainder allocation of the test quota; ties go to class 0.
  std::size_t quota[2];
  double remainder[2];
  for (int c = 0; c < 2; ++c) {
    const double exact = static_cast<double>(n_test) * static_cast<double>(by_class[c].size()) /
                         static_cast<double>(n);
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(quota[c]);
  }
  if (quota[0] + quota[1] < n_test) {
    ++quota[remainder[1] > remainder[0] ? 1 : 0];
  }

  SplitIndices s;
  s.seed = seed;
  s.ratio = ratio;
  for (int c = 0; c < 2; ++c) {
    const auto& m = by_class[c];
    const auto cut = m.end() - static_cast<std::ptrdiff_t>(std::min(quota[c], m.size()));
    s.train.insert(s.train.end(), m.begin(), cut);
    s.test.insert(s.test.end(), cut, m.end());
  }
  // Mix the classes so the train order carries no label information.
  shuffle(std::span<std::size_t>(s.train), rng);
  shuffle(std::span<std::size_t>(s.test), rng);
  return s;
}

Scaler fit_scaler(const Matrix& x_train) {
  if (x_train.rows() < 2) throw Error(ErrorCode::EmptyInput, "fit_scaler needs >= 2 rows");
  const std::size_t n = x_train.rows();
  const std::size_t d = x_train.cols();
  Scaler s;
  s.means.assign(d, 0.0);
  s.stds.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += x_train(i, j);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dev = x_train(i, j) - mean;
      ss += dev * dev;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    s.means[j] = mean;
    s.stds[j] = sd < 1e-12 ? 1.0 : sd;
  }
  return s;
}

Matrix apply_scaler(const Scaler& scaler, const Matrix& x) {
  if (x.cols() != scaler.dim() || scaler.stds.size() != scaler.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "scaler has " + std::to_string(scaler.dim()) +
                                                  " columns, input has " +
                                                  std::to_string(x.cols()));
  }
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      out(i, j) = (x(i, j) - scaler.means[j]) / scaler.stds[j];
    }
  }
  return out;
}

std::uint64_t index_digest(std::span<const std::size_t> indices) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const std::size_t idx : indices) {
    auto v = static_cast<std::uint64_t>(idx);
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace dtcx::data
