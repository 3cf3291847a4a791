#include "dtcx/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "dtcx/error.hpp"
#include "dtcx/random.hpp"

namespace dtcx::synthetic {
namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

template <std::size_t N>
const char* pick(Rng& rng, const std::array<const char*, N>& labels,
                 const std::array<double, N>& weights) {
  double total = 0.0;
  for (const double w : weights) total += w;
  double u = uniform01(rng) * total;
  for (std::size_t k = 0; k < N; ++k) {
    if (u < weights[k]) return labels[k];
    u -= weights[k];
  }
  return labels[N - 1];
}

std::string quote_if_needed(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (const char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<std::string> thyroid_header() {
  // "Radiothreapy" is spelled as in the UCI file.
  return {"Age",        "Gender",    "Smoking", "Hx Smoking", "Hx Radiothreapy",
          "Thyroid Function", "Physical Examination", "Adenopathy", "Pathology",
          "Focality",   "Risk",      "T",       "N",          "M",
          "Stage",      "Response",  "Recurred"};
}

data::RawTable thyroid_cohort(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0xC0407);
  data::RawTable table;
  table.header = thyroid_header();
  for (std::size_t i = 0; i < n; ++i) {
    const double severity = standard_normal(rng);
    const bool recurred = bernoulli(rng, logistic(2.4 * severity - 1.6));

    const int age = std::clamp(
        static_cast<int>(std::lround(22.0 + 40.0 * uniform01(rng) + 6.0 * severity)), 15, 82);
    std::vector<std::string> row;
    row.push_back(std::to_string(age));
    row.push_back(bernoulli(rng, logistic(-1.5 + 0.7 * severity)) ? "M" : "F");
    row.push_back(bernoulli(rng, logistic(-2.0 + 0.6 * severity)) ? "Yes" : "No");
    row.push_back(bernoulli(rng, 0.07) ? "Yes" : "No");
    row.push_back(bernoulli(rng, 0.02) ? "Yes" : "No");
    row.push_back(pick<5>(rng,
                          {"Euthyroid", "Clinical Hyperthyroidism", "Clinical Hypothyroidism",
                           "Subclinical Hyperthyroidism", "Subclinical Hypothyroidism"},
                          {0.82, 0.05, 0.03, 0.02, 0.08}));
    row.push_back(pick<5>(rng,
                          {"Multinodular goiter", "Single nodular goiter-right",
                           "Single nodular goiter-left", "Normal", "Diffuse goiter"},
                          {0.37, 0.36, 0.23, 0.02, 0.02}));
    const bool nodes = severity + 0.5 * standard_normal(rng) > 0.75;
    row.push_back(nodes ? pick<5>(rng, {"Right", "Bilateral", "Left", "Extensive", "Posterior"},
                                  {0.35, 0.30, 0.20, 0.10, 0.05})
                        : "No");
    row.push_back(severity < -0.6 && bernoulli(rng, 0.5)
                      ? "Micropapillary"
                      : pick<3>(rng, {"Papillary", "Follicular", "Hurthel cell"},
                                {0.82, 0.13, 0.05}));
    row.push_back(bernoulli(rng, logistic(-0.4 + 1.1 * severity)) ? "Multi-Focal" : "Uni-Focal");

    const double risk_score = severity + 0.4 * standard_normal(rng);
    row.push_back(risk_score < 0.1 ? "Low" : (risk_score < 1.3 ? "Intermediate" : "High"));

    static const std::array<const char*, 7> t_stages{"T1a", "T1b", "T2", "T3a",
                                                     "T3b", "T4a", "T4b"};
    const double t_score = 0.9 * severity + 0.6 * standard_normal(rng);
    const auto t_idx = static_cast<std::size_t>(std::clamp(
        static_cast<int>(std::floor(2.6 + 1.5 * t_score)), 0, 6));
    row.push_back(t_stages[t_idx]);

    row.push_back(nodes ? (bernoulli(rng, 0.6) ? "N1b" : "N1a") : "N0");
    const bool metastasis = severity + 0.4 * standard_normal(rng) > 2.0;
    row.push_back(metastasis ? "M1" : "M0");

    std::string stage = "I";
    if (metastasis) {
      stage = age >= 55 ? "IVB" : "II";
    } else if (age >= 55) {
      stage = t_idx >= 5 ? "IVA" : (t_idx >= 3 || nodes ? "III" : "II");
    }
    row.push_back(stage);

    row.push_back(recurred
                      ? pick<4>(rng,
                                {"Structural Incomplete", "Biochemical Incomplete",
                                 "Indeterminate", "Excellent"},
                                {0.66, 0.17, 0.12, 0.05})
                      : pick<4>(rng,
                                {"Excellent", "Indeterminate", "Biochemical Incomplete",
                                 "Structural Incomplete"},
                                {0.70, 0.22, 0.06, 0.02}));
    table.rows.push_back(std::move(row));
    table.targets.push_back(recurred ? "Yes" : "No");
  }
  return table;
}

std::string to_csv(const data::RawTable& table) {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& cells, const std::string* last) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k > 0) out += ',';
      out += quote_if_needed(cells[k]);
    }
    if (last != nullptr) out += ',' + quote_if_needed(*last);
    out += '\n';
  };
  emit(table.header, nullptr);
  for (std::size_t i = 0; i < table.rows.size(); ++i) emit(table.rows[i], &table.targets[i]);
  return out;
}

void write_csv(const data::RawTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << to_csv(table);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace dtcx::synthetic
