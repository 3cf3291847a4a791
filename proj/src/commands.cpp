#include "dtcx/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "dtcx/error.hpp"

namespace dtcx::cli {

using nlohmann::json;

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

std::vector<int> gather(std::span<const int> v, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (const auto i : idx) out.push_back(v[i]);
  return out;
}

std::vector<std::string> feature_names(const data::FeatureSchema& schema) {
  std::vector<std::string> names;
  for (const auto& f : schema.features) names.push_back(f.name);
  return names;
}

data::SplitIndices make_split(std::span<const int> labels, double ratio, std::uint64_t seed,
                              bool stratify) {
  return stratify ? data::split_stratified(labels, ratio, seed)
                  : data::split(labels.size(), ratio, seed);
}

std::string table_rows(const std::vector<std::pair<std::string, const metrics::MetricsReport*>>& cols) {
  std::ostringstream os;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-12s", "metric");
  os << buf;
  for (const auto& [label, _] : cols) {
    std::snprintf(buf, sizeof buf, " %10s", label.c_str());
    os << buf;
  }
  os << '\n';
  using Getter = metrics::Metric metrics::MetricsReport::*;
  const std::pair<const char*, Getter> rows[] = {
      {"accuracy", &metrics::MetricsReport::accuracy},
      {"sensitivity", &metrics::MetricsReport::sensitivity},
      {"specificity", &metrics::MetricsReport::specificity},
      {"ppv", &metrics::MetricsReport::ppv},
      {"npv", &metrics::MetricsReport::npv},
  };
  for (const auto& [name, member] : rows) {
    std::snprintf(buf, sizeof buf, "%-12s", name);
    os << buf;
    for (const auto& [_, report] : cols) {
      std::snprintf(buf, sizeof buf, " %10s", metrics::format_metric(report->*member).c_str());
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

std::string confusion_line(const char* label, const metrics::ConfusionMatrix& cm) {
  std::ostringstream os;
  os << label << " confusion: tp=" << cm.tp << " fp=" << cm.fp << " tn=" << cm.tn
     << " fn=" << cm.fn << '\n';
  return os.str();
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidConfig:
      return kUsage;
    case ErrorCode::UnsupportedVersion:
    case ErrorCode::CorruptArtifact:
    case ErrorCode::MissingField:
      return kArtifactError;
    default:
      return kDataError;
  }
}

Partition parse_partition(const std::string& name) {
  if (name == "train") return Partition::Train;
  if (name == "test") return Partition::Test;
  if (name == "all") return Partition::All;
  throw Error(ErrorCode::InvalidConfig, "partition must be train, test or all");
}

const char* partition_name(Partition p) noexcept {
  switch (p) {
    case Partition::Train: return "train";
    case Partition::Test: return "test";
    case Partition::All: return "all";
  }
  return "?";
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

TrainOutcome run_train(const TrainOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  neural::TrainConfig config = options.config;
  config.seed = options.seed;
  config.validate();

  const data::RawTable table = data::read_table(options.data);
  const data::FeatureSchema schema = data::build_schema(table.header, table.rows, table.targets);
  const data::EncodedDataset enc = data::encode_with_schema(table, schema);
  const data::SplitIndices split =
      make_split(enc.y, options.split_ratio, options.seed, options.stratify);

  const data::Scaler scaler = data::fit_scaler(select_rows(enc.x, split.train));
  const Matrix x_train = data::apply_scaler(scaler, select_rows(enc.x, split.train));
  const Matrix x_test = data::apply_scaler(scaler, select_rows(enc.x, split.test));
  const auto y_train = gather(enc.y, split.train);
  const auto y_test = gather(enc.y, split.test);

  neural::Mlp mlp = neural::init_mlp(schema.dim(), options.hidden, options.seed, config.dropout);

  std::optional<neural::ValidationData> validation;
  Matrix val_x;
  std::vector<int> val_y;
  if (config.validation_source == neural::ValidationSource::FromTestAsPaper &&
      config.validation_fraction > 0.0) {
    // Literal reading: a fraction of the held-out test rows monitors training.
    Rng rng = make_rng(options.seed, 4);
    const auto perm = permutation(split.test.size(), rng);
    const auto n_val = static_cast<std::size_t>(
        std::llround(config.validation_fraction * static_cast<double>(split.test.size())));
    std::vector<std::size_t> rows(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::sort(rows.begin(), rows.end());
    val_x = select_rows(x_test, rows);
    val_y = gather(y_test, rows);
    validation = neural::ValidationData{&val_x, val_y};
  }

  neural::TrainResult trained = neural::train(std::move(mlp), x_train, y_train, config, validation);

  TrainOutcome outcome;
  auto& report = outcome.report;
  report.history = std::move(trained.history);
  report.train_confusion = metrics::confusion(
      y_train, neural::predict_labels(neural::predict_proba(trained.model, x_train)));
  report.test_confusion = metrics::confusion(
      y_test, neural::predict_labels(neural::predict_proba(trained.model, x_test)));
  report.train_metrics = metrics::compute_metrics(report.train_confusion);
  report.test_metrics = metrics::compute_metrics(report.test_confusion);

  auto& a = outcome.artifact;
  a.schema = schema;
  a.scaler = scaler;
  a.model = std::move(trained.model);
  a.hidden = options.hidden;
  a.train_config = config;
  a.split = {options.seed,       options.split_ratio,
             options.stratify,   split.train.size(),
             split.test.size(),  data::index_digest(split.train),
             data::index_digest(split.test)};
  a.train_confusion = report.train_confusion;
  a.test_confusion = report.test_confusion;
  a.train_metrics = report.train_metrics;
  a.test_metrics = report.test_metrics;

  report.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return outcome;
}

std::string history_csv(const neural::TrainHistory& history) {
  std::string out = "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (std::size_t e = 0; e < history.epochs.size(); ++e) {
    const auto& r = history.epochs[e];
    out += std::to_string(e + 1) + ',' + format_double(r.train_loss) + ',' +
           format_double(r.train_accuracy) + ',';
    if (history.has_validation) {
      out += format_double(r.val_loss) + ',' + format_double(r.val_accuracy);
    } else {
      out += ',';
    }
    out += '\n';
  }
  return out;
}

std::string metrics_table(const metrics::MetricsReport& train, const metrics::MetricsReport& test) {
  return table_rows({{"train", &train}, {"test", &test}});
}

json report_to_json(const RunReport& report) {
  json history = json::array();
  for (const auto& r : report.history.epochs) {
    json rec = {{"train_loss", r.train_loss}, {"train_acc", r.train_accuracy}};
    if (report.history.has_validation) {
      rec["val_loss"] = r.val_loss;
      rec["val_acc"] = r.val_accuracy;
    }
    history.push_back(rec);
  }
  return {{"history", history},
          {"confusion",
           {{"train", confusion_to_json(report.train_confusion)},
            {"test", confusion_to_json(report.test_confusion)}}},
          {"metrics",
           {{"train", metrics_to_json(report.train_metrics)},
            {"test", metrics_to_json(report.test_metrics)}}}};
}

int cmd_train(const TrainOptions& options, std::ostream& out) {
  const TrainOutcome outcome = run_train(options);
  ensure_dir(options.out);
  save_model(outcome.artifact, options.out / "model.json");
  write_file(options.out / "report.json", dump_canonical(report_to_json(outcome.report)));
  write_file(options.out / "history.csv", history_csv(outcome.report.history));
  const std::string table = metrics_table(outcome.report.train_metrics, outcome.report.test_metrics);
  write_file(options.out / "metrics.txt",
             table + confusion_line("train", outcome.report.train_confusion) +
                 confusion_line("test", outcome.report.test_confusion));
  // Wall-clock timing lives apart from the deterministic reports.
  write_file(options.out / "timing.json",
             dump_canonical(json{{"train_ms", outcome.report.elapsed_ms}}));

  out << table << confusion_line("test", outcome.report.test_confusion);
  out << "wrote " << (options.out / "model.json").string() << '\n';
  return kOk;
}

PreparedData prepare(const ModelArtifact& artifact, const std::filesystem::path& data_path) {
  const data::RawTable table = data::read_table(data_path);
  const data::EncodedDataset enc = data::encode_with_schema(table, artifact.schema);
  const auto& sp = artifact.split;
  const data::SplitIndices split = make_split(enc.y, sp.ratio, sp.seed, sp.stratified);
  if (split.train.size() != sp.train_count || split.test.size() != sp.test_count ||
      data::index_digest(split.train) != sp.train_digest ||
      data::index_digest(split.test) != sp.test_digest) {
    throw Error(ErrorCode::SchemaMismatch,
                "data file does not reproduce the training split recorded in the model");
  }
  PreparedData p;
  p.x_all = data::apply_scaler(artifact.scaler, enc.x);
  p.y_all = enc.y;
  p.train_rows = split.train;
  p.test_rows = split.test;
  return p;
}

namespace {

std::vector<std::size_t> rows_of(const PreparedData& p, Partition partition) {
  switch (partition) {
    case Partition::Train: return p.train_rows;
    case Partition::Test: return p.test_rows;
    case Partition::All: break;
  }
  std::vector<std::size_t> all(p.x_all.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return all;
}

}  // namespace

EvaluateResult run_evaluate(const EvaluateOptions& options) {
  const ModelArtifact artifact = load_model(options.model);
  const PreparedData prepared = prepare(artifact, options.data);
  const auto rows = rows_of(prepared, options.partition);
  const Matrix x = select_rows(prepared.x_all, rows);
  const auto y = gather(prepared.y_all, rows);
  EvaluateResult r;
  r.confusion = metrics::confusion(y, neural::predict_labels(neural::predict_proba(artifact.model, x)));
  r.metrics = metrics::compute_metrics(r.confusion);
  return r;
}

int cmd_evaluate(const EvaluateOptions& options, std::ostream& out) {
  const EvaluateResult r = run_evaluate(options);
  const std::string label = partition_name(options.partition);
  out << table_rows({{label, &r.metrics}}) << confusion_line(label.c_str(), r.confusion);
  if (options.out) {
    ensure_dir(*options.out);
    write_file(*options.out / ("evaluate_" + label + ".json"),
               dump_canonical({{"partition", label},
                               {"confusion", confusion_to_json(r.confusion)},
                               {"metrics", metrics_to_json(r.metrics)}}));
  }
  return kOk;
}

ExplainResult run_explain(const ExplainOptions& options) {
  const ModelArtifact artifact = load_model(options.model);
  const PreparedData prepared = prepare(artifact, options.data);
  const auto rows = rows_of(prepared, options.partition);
  if (options.index >= rows.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(options.index) + " but " +
                                                std::string(partition_name(options.partition)) +
                                                " partition has " + std::to_string(rows.size()) +
                                                " rows");
  }
  const Matrix x_train = select_rows(prepared.x_all, prepared.train_rows);
  const auto& schema = artifact.schema;
  std::vector<lime::FeatureInfo> features;
  for (const auto& f : schema.features) {
    features.push_back({f.name, f.kind == data::FeatureKind::Categorical});
  }
  const auto& scaler = artifact.scaler;
  const lime::ValueFormatter formatter = [&](std::size_t j, double v) -> std::string {
    const auto code = std::llround(v * scaler.stds[j] + scaler.means[j]);
    const auto& vocab = schema.features[j].vocab;
    if (code >= 0 && static_cast<std::size_t>(code) < vocab.size()) {
      return vocab[static_cast<std::size_t>(code)];
    }
    return format_double(v);
  };
  const auto& model = artifact.model;
  const lime::BatchPredictor predict = [&model](const Matrix& x) {
    return neural::predict_proba(model, x);
  };

  lime::LimeConfig config = options.lime;
  config.num_features = std::min(config.num_features, schema.dim());

  ExplainResult result;
  result.dataset_row = rows[options.index];
  result.explanation =
      lime::explain(predict, prepared.x_all.row(result.dataset_row), x_train, features, config,
                    formatter);
  result.explanation.instance_index = options.index;
  result.feature_names = feature_names(schema);
  return result;
}

json explanation_to_json(const ExplainResult& result) {
  const auto& ex = result.explanation;
  json weights = json::array();
  for (const auto& w : ex.feature_weights) {
    weights.push_back({{"feature", result.feature_names.at(w.feature)},
                       {"descriptor", w.descriptor},
                       {"weight", w.weight}});
  }
  return {{"instance_index", ex.instance_index},
          {"dataset_row", result.dataset_row},
          {"explained_class", 1},
          {"class_probabilities", {ex.class_probabilities.first, ex.class_probabilities.second}},
          {"feature_weights", weights},
          {"intercept", ex.intercept},
          {"local_r2", ex.local_r2},
          {"surrogate_prediction", ex.surrogate_prediction},
          {"kernel_width", ex.kernel_width},
          {"num_samples", ex.num_samples}};
}

std::string explanation_bars_csv(const lime::Explanation& explanation) {
  std::string out = "feature,weight\n";
  for (const auto& w : explanation.feature_weights) {
    std::string d = w.descriptor;
    if (d.find_first_of(",\"") != std::string::npos) {
      std::string q = "\"";
      for (const char c : d) {
        if (c == '"') q += '"';
        q += c;
      }
      d = q + "\"";
    }
    out += d + ',' + format_double(w.weight) + '\n';
  }
  return out;
}

int cmd_explain(const ExplainOptions& options, std::ostream& out) {
  const ExplainResult r = run_explain(options);
  ensure_dir(options.out);
  write_file(options.out / "explanation.json", dump_canonical(explanation_to_json(r)));
  write_file(options.out / "explanation_bars.csv", explanation_bars_csv(r.explanation));

  const auto& ex = r.explanation;
  char buf[128];
  std::snprintf(buf, sizeof buf, "row %zu: P(no recurrence)=%.4f P(recurrence)=%.4f local R2=%.4f\n",
                r.dataset_row, ex.class_probabilities.first, ex.class_probabilities.second,
                ex.local_r2);
  out << buf;
  for (const auto& w : ex.feature_weights) {
    std::snprintf(buf, sizeof buf, "  %+.4f  %s\n", w.weight, w.descriptor.c_str());
    out << buf;
  }
  return kOk;
}

morris::MorrisResult run_sensitivity(const SensitivityOptions& options) {
  const ModelArtifact artifact = load_model(options.model);
  const PreparedData prepared = prepare(artifact, options.data);
  const Matrix x_train = select_rows(prepared.x_all, prepared.train_rows);
  const auto& model = artifact.model;
  const morris::BatchFunction f = [&model](const Matrix& x) {
    return neural::predict_proba(model, x);
  };
  const auto names = feature_names(artifact.schema);
  return morris::analyze(f, x_train, names, options.morris);
}

json morris_to_json(const morris::MorrisResult& result) {
  json features = json::array();
  for (const auto& f : result.features) {
    features.push_back(
        {{"feature", f.name}, {"mu", f.mu}, {"mu_star", f.mu_star}, {"sigma", f.sigma}});
  }
  return {{"features", features}, {"ranking", result.ranking}, {"evaluations", result.evaluations}};
}

std::string morris_table_csv(const morris::MorrisResult& result) {
  std::string out = "feature,mu,mu_star,sigma\n";
  for (const auto& f : result.features) {
    out += f.name + ',' + format_double(f.mu) + ',' + format_double(f.mu_star) + ',' +
           format_double(f.sigma) + '\n';
  }
  return out;
}

std::string morris_scatter_csv(const morris::MorrisResult& result) {
  std::string out = "feature,mu_star,sigma\n";
  for (const auto& name : result.ranking) {
    const auto it = std::find_if(result.features.begin(), result.features.end(),
                                 [&](const auto& f) { return f.name == name; });
    out += name + ',' + format_double(it->mu_star) + ',' + format_double(it->sigma) + '\n';
  }
  return out;
}

int cmd_sensitivity(const SensitivityOptions& options, std::ostream& out) {
  const morris::MorrisResult r = run_sensitivity(options);
  ensure_dir(options.out);
  write_file(options.out / "morris.json", dump_canonical(morris_to_json(r)));
  write_file(options.out / "morris_table.csv", morris_table_csv(r));
  write_file(options.out / "morris_scatter.csv", morris_scatter_csv(r));

  char buf[160];
  std::snprintf(buf, sizeof buf, "%-22s %10s %10s %10s\n", "feature", "mu", "mu_star", "sigma");
  out << buf;
  for (const auto& name : r.ranking) {
    const auto it = std::find_if(r.features.begin(), r.features.end(),
                                 [&](const auto& f) { return f.name == name; });
    std::snprintf(buf, sizeof buf, "%-22s %10.4f %10.4f %10.4f\n", name.c_str(), it->mu,
                  it->mu_star, it->sigma);
    out << buf;
  }
  return kOk;
}

}  // namespace dtcx::cli
