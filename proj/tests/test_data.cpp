#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "dtcx/data.hpp"
#include "dtcx/error.hpp"
#include "dtcx/synthetic.hpp"

namespace dtcx::data {
namespace {

namespace fs = std::filesystem;

fs::path write_temp(const std::string& name, const std::string& text) {
  const fs::path dir = fs::path(DTCX_TEST_TMP) / "data";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no dtcx::Error thrown";
  return ErrorCode::Io;
}

TEST(Csv, ParsesQuotedFieldsAndCrlf) {
  const auto rec = parse_csv("a,\"b,c\",\"say \"\"hi\"\"\"\r\n1,2,3\r\n");
  ASSERT_EQ(rec.size(), 2u);
  EXPECT_EQ(rec[0], (std::vector<std::string>{"a", "b,c", "say \"hi\""}));
  EXPECT_EQ(rec[1], (std::vector<std::string>{"1", "2", "3"}));
}

TEST(LoadCsv, SmallSyntheticFile) {
  const auto p = write_temp("three.csv", "Age,Gender,Recurred\n27,F,No\n52,M,Yes\n31,F,No\n");
  const Dataset ds = load_csv(p);
  EXPECT_EQ(ds.size(), 3u);
  ASSERT_EQ(ds.schema.dim(), 2u);
  EXPECT_EQ(ds.schema.features[0].kind, FeatureKind::Numeric);
  EXPECT_EQ(ds.schema.features[1].kind, FeatureKind::Categorical);
  EXPECT_EQ(ds.schema.features[1].vocab, (std::vector<std::string>{"F", "M"}));
  EXPECT_EQ(ds.schema.target_name, "Recurred");
  EXPECT_EQ(ds.schema.negative_label, "No");
  EXPECT_EQ(ds.schema.positive_label, "Yes");
}

TEST(LoadCsv, ErrorPaths) {
  EXPECT_EQ(code_of([] { load_csv(fs::path(DTCX_TEST_TMP) / "nope.csv"); }), ErrorCode::MissingFile);
  const auto header_only = write_temp("header.csv", "Age,Gender,Recurred\n");
  EXPECT_EQ(code_of([&] { load_csv(header_only); }), ErrorCode::EmptyDataset);
  const auto ragged = write_temp("ragged.csv", "Age,Gender,Recurred\n27,F,No\n52,Yes\n");
  EXPECT_EQ(code_of([&] { load_csv(ragged); }), ErrorCode::RaggedRow);
  const auto three = write_temp("three_targets.csv", "Age,Recurred\n1,No\n2,Yes\n3,Maybe\n");
  EXPECT_EQ(code_of([&] { load_csv(three); }), ErrorCode::TargetNotBinary);
  const auto one = write_temp("one_target.csv", "Age,Recurred\n1,No\n2,No\n");
  EXPECT_EQ(code_of([&] { load_csv(one); }), ErrorCode::TargetNotBinary);
}

TEST(Schema, NumericRequiresEveryCellToParse) {
  const std::vector<std::string> header{"A", "B", "Y"};
  const std::vector<std::vector<std::string>> rows{{"1", "2"}, {"2.5", "x"}, {"-3e2", "4"}};
  const auto s = build_schema(header, rows, {"No", "Yes", "No"});
  EXPECT_EQ(s.features[0].kind, FeatureKind::Numeric);
  EXPECT_EQ(s.features[1].kind, FeatureKind::Categorical);
  EXPECT_EQ(s.features[1].vocab, (std::vector<std::string>{"2", "4", "x"}));
}

TEST(LabelEncode, SortedVocabularyIndex) {
  Dataset ds;
  ds.schema.features = {{"Risk", FeatureKind::Categorical, {"High", "Intermediate", "Low"}},
                        {"Smoking", FeatureKind::Categorical, {"No", "Yes"}}};
  ds.schema.target_name = "Recurred";
  ds.schema.negative_label = "No";
  ds.schema.positive_label = "Yes";
  ds.rows = {{"Low", "Yes"}, {"High", "No"}};
  ds.targets = {"Yes", "No"};
  const auto enc = label_encode(ds);
  EXPECT_EQ(enc.x(0, 0), 2.0);
  EXPECT_EQ(enc.x(0, 1), 1.0);
  EXPECT_EQ(enc.x(1, 0), 0.0);
  EXPECT_EQ(enc.y, (std::vector<int>{1, 0}));
}

TEST(LabelEncode, DecodingRecoversEveryCell) {
  const auto table = synthetic::thyroid_cohort(200, 5);
  const auto schema = build_schema(table.header, table.rows, table.targets);
  const auto enc = encode_with_schema(table, schema);
  ASSERT_EQ(enc.x.cols(), 16u);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < schema.dim(); ++j) {
      const auto& f = schema.features[j];
      if (f.kind != FeatureKind::Categorical) continue;
      const double code = enc.x(i, j);
      ASSERT_EQ(code, std::floor(code));
      ASSERT_LT(code, static_cast<double>(f.vocab.size()));
      EXPECT_EQ(f.vocab[static_cast<std::size_t>(code)], table.rows[i][j]);
    }
    EXPECT_EQ(enc.y[i], table.targets[i] == "Yes" ? 1 : 0);
  }
}

TEST(EncodeWithSchema, RejectsForeignColumnsAndCategories) {
  auto table = synthetic::thyroid_cohort(50, 1);
  const auto schema = build_schema(table.header, table.rows, table.targets);
  auto renamed = table;
  renamed.header[3] = "Hx Smokes";
  EXPECT_EQ(code_of([&] { encode_with_schema(renamed, schema); }), ErrorCode::SchemaMismatch);
  auto unknown = table;
  unknown.rows[0][1] = "X";
  EXPECT_EQ(code_of([&] { encode_with_schema(unknown, schema); }), ErrorCode::SchemaMismatch);
  auto narrow = table;
  narrow.header.erase(narrow.header.begin());
  for (auto& r : narrow.rows) r.erase(r.begin());
  EXPECT_EQ(code_of([&] { encode_with_schema(narrow, schema); }), ErrorCode::SchemaMismatch);
}

TEST(Split, SizesMatchHeldOutFraction) {
  const auto s = split(383, 0.8, 42);
  EXPECT_EQ(s.train.size(), 306u);
  EXPECT_EQ(s.test.size(), 77u);
  const auto small = split(10, 0.8, 42);
  EXPECT_EQ(small.train.size(), 8u);
  EXPECT_EQ(small.test.size(), 2u);
}

TEST(Split, DeterministicAndSeedSensitive) {
  const auto a = split(100, 0.8, 7);
  const auto b = split(100, 0.8, 7);
  const auto c = split(100, 0.8, 8);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(a.train, c.train);
}

TEST(Split, IsAPartitionForManySeeds) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t n = 2 + seed % 50;
    const double ratio = 0.5 + 0.4 * static_cast<double>(seed % 5) / 4.0;
    SplitIndices s;
    try {
      s = split(n, ratio, seed);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::DegenerateSplit);
      continue;
    }
    std::vector<std::size_t> all = s.train;
    all.insert(all.end(), s.test.begin(), s.test.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expect(n);
    std::iota(expect.begin(), expect.end(), std::size_t{0});
    ASSERT_EQ(all, expect) << "seed " << seed;
    EXPECT_EQ(s.test.size(),
              static_cast<std::size_t>(std::llround((1.0 - ratio) * static_cast<double>(n))));
  }
}

TEST(Split, DegenerateInputs) {
  EXPECT_EQ(code_of([] { split(1, 0.8, 1); }), ErrorCode::DegenerateSplit);
  EXPECT_EQ(code_of([] { split(10, 0.0, 1); }), ErrorCode::DegenerateSplit);
  EXPECT_EQ(code_of([] { split(10, 1.0, 1); }), ErrorCode::DegenerateSplit);
  EXPECT_EQ(code_of([] { split(2, 0.9, 1); }), ErrorCode::DegenerateSplit);
}

TEST(Split, StratifiedKeepsClassBalance) {
  std::vector<int> labels(383, 0);
  for (std::size_t i = 0; i < 108; ++i) labels[i * 3] = 1;
  const auto s = split_stratified(labels, 0.8, 3);
  EXPECT_EQ(s.test.size(), 77u);
  EXPECT_EQ(s.train.size(), 306u);
  const auto pos = std::count_if(s.test.begin(), s.test.end(), [&](auto i) { return labels[i] == 1; });
  EXPECT_NEAR(static_cast<double>(pos), 77.0 * 108.0 / 383.0, 1.0);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  EXPECT_EQ(std::adjacent_find(all.begin(), all.end()), all.end());
  EXPECT_EQ(all.size(), 383u);
}

TEST(Scaler, PopulationStatistics) {
  Matrix x(3, 2);
  x(0, 0) = 1; x(1, 0) = 2; x(2, 0) = 3;
  x(0, 1) = 5; x(1, 1) = 5; x(2, 1) = 5;
  const Scaler s = fit_scaler(x);
  EXPECT_DOUBLE_EQ(s.means[0], 2.0);
  EXPECT_NEAR(s.stds[0], 0.816496580927726, 1e-15);  // sqrt(2/3)
  EXPECT_DOUBLE_EQ(s.means[1], 5.0);
  EXPECT_DOUBLE_EQ(s.stds[1], 1.0);
}

TEST(Scaler, IdenticalRowsGiveUnitStds) {
  Matrix x(2, 3, 4.25);
  const Scaler s = fit_scaler(x);
  for (const double sd : s.stds) EXPECT_EQ(sd, 1.0);
}

TEST(Scaler, ApplyExamples) {
  Scaler s{{2.0}, {0.5}};
  Matrix x(1, 1, 3.0);
  EXPECT_DOUBLE_EQ(apply_scaler(s, x)(0, 0), 2.0);
  Scaler means{{1.5, -2.0}, {3.0, 0.25}};
  Matrix row(1, 2);
  row(0, 0) = 1.5;
  row(0, 1) = -2.0;
  const Matrix z = apply_scaler(means, row);
  EXPECT_EQ(z(0, 0), 0.0);
  EXPECT_EQ(z(0, 1), 0.0);
  EXPECT_EQ(code_of([&] { apply_scaler(s, row); }), ErrorCode::DimensionMismatch);
}

TEST(Scaler, StandardizesTheFittingMatrix) {
  const auto table = synthetic::thyroid_cohort(383, 11);
  const auto schema = build_schema(table.header, table.rows, table.targets);
  const auto enc = encode_with_schema(table, schema);
  const auto sp = split(enc.x.rows(), 0.8, 11);
  const Matrix train = select_rows(enc.x, sp.train);
  const Scaler s = fit_scaler(train);
  const Matrix z = apply_scaler(s, train);
  for (std::size_t j = 0; j < z.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < z.rows(); ++i) mean += z(i, j);
    mean /= static_cast<double>(z.rows());
    double var = 0.0;
    for (std::size_t i = 0; i < z.rows(); ++i) var += (z(i, j) - mean) * (z(i, j) - mean);
    const double sd = std::sqrt(var / static_cast<double>(z.rows()));
    EXPECT_LT(std::abs(mean), 1e-10) << schema.features[j].name;
    if (s.stds[j] != 1.0 || sd > 0.0) EXPECT_NEAR(sd, 1.0, 1e-8) << schema.features[j].name;
  }
}

TEST(Scaler, FitIgnoresTestRows) {
  const auto table = synthetic::thyroid_cohort(120, 2);
  const auto schema = build_schema(table.header, table.rows, table.targets);
  auto enc = encode_with_schema(table, schema);
  const auto sp = split(enc.x.rows(), 0.8, 9);
  const Scaler before = fit_scaler(select_rows(enc.x, sp.train));
  for (const auto i : sp.test)
    for (double& v : enc.x.row(i)) v = 1e6;
  const Scaler after = fit_scaler(select_rows(enc.x, sp.train));
  EXPECT_EQ(before.means, after.means);
  EXPECT_EQ(before.stds, after.stds);
}

TEST(Synthetic, MatchesUciLayout) {
  const auto table = synthetic::thyroid_cohort();
  EXPECT_EQ(table.rows.size(), 383u);
  const auto schema = build_schema(table.header, table.rows, table.targets);
  EXPECT_EQ(schema.dim(), 16u);
  EXPECT_EQ(schema.features[0].name, "Age");
  EXPECT_EQ(schema.features[0].kind, FeatureKind::Numeric);
  EXPECT_EQ(schema.features[15].name, "Response");
  EXPECT_EQ(schema.target_name, "Recurred");
  EXPECT_EQ(schema.positive_label, "Yes");
  // Round trip through CSV text.
  const auto p = write_temp("synthetic.csv", synthetic::to_csv(table));
  const auto ds = load_csv(p);
  EXPECT_EQ(ds.rows, table.rows);
  EXPECT_EQ(ds.targets, table.targets);
}

}  // namespace
}  // namespace dtcx::data
