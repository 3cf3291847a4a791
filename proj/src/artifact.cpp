#include "dtcx/artifact.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dtcx/error.hpp"

namespace dtcx::cli {

using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::CorruptArtifact, "bad digest '" + s + "'");
  }
  return v;
}

const json& field(const json& obj, const char* key) {
  if (!obj.is_object()) throw Error(ErrorCode::CorruptArtifact, std::string("expected object around '") + key + "'");
  const auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::MissingField, key);
  return *it;
}

template <typename T>
T get(const json& obj, const char* key) {
  try {
    return field(obj, key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptArtifact, std::string(key) + ": " + e.what());
  }
}

metrics::Metric metric_from(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) throw Error(ErrorCode::CorruptArtifact, key);
  return v.get<double>();
}

metrics::MetricsReport metrics_from(const json& obj) {
  return {metric_from(obj, "accuracy"), metric_from(obj, "sensitivity"),
          metric_from(obj, "specificity"), metric_from(obj, "ppv"), metric_from(obj, "npv")};
}

metrics::ConfusionMatrix confusion_from(const json& obj) {
  return {get<std::size_t>(obj, "tp"), get<std::size_t>(obj, "fp"), get<std::size_t>(obj, "tn"),
          get<std::size_t>(obj, "fn")};
}

const char* validation_name(neural::ValidationSource s) {
  return s == neural::ValidationSource::FromTrain ? "train" : "test-as-paper";
}

}  // namespace

json metrics_to_json(const metrics::MetricsReport& m) {
  auto v = [](const metrics::Metric& x) { return x ? json(*x) : json(nullptr); };
  return {{"accuracy", v(m.accuracy)}, {"sensitivity", v(m.sensitivity)},
          {"specificity", v(m.specificity)}, {"ppv", v(m.ppv)}, {"npv", v(m.npv)}};
}

json confusion_to_json(const metrics::ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}};
}

json schema_to_json(const data::FeatureSchema& schema) {
  json features = json::array();
  for (const auto& f : schema.features) {
    features.push_back({{"name", f.name},
                        {"kind", f.kind == data::FeatureKind::Numeric ? "numeric" : "categorical"},
                        {"vocab", f.vocab}});
  }
  return {{"features", features},
          {"target_name", schema.target_name},
          {"target_vocab", {schema.negative_label, schema.positive_label}}};
}

json to_json(const ModelArtifact& a) {
  json layers = json::array();
  for (const auto& layer : a.model.layers) {
    layers.push_back(
        {{"in", layer.in_dim()},
         {"out", layer.out_dim()},
         {"activation", layer.activation == neural::Activation::ReLU ? "relu" : "sigmoid"},
         {"dropout", layer.dropout},
         {"weights", std::vector<double>(layer.weights.flat().begin(), layer.weights.flat().end())},
         {"bias", layer.bias}});
  }
  const auto& c = a.train_config;
  return {
      {"format_version", a.format_version},
      {"schema", schema_to_json(a.schema)},
      {"scaler", {{"means", a.scaler.means}, {"stds", a.scaler.stds}}},
      {"hidden", a.hidden},
      {"layers", layers},
      {"train_config",
       {{"learning_rate", c.learning_rate},
        {"beta1", c.beta1},
        {"beta2", c.beta2},
        {"epsilon", c.epsilon},
        {"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"dropout", c.dropout},
        {"validation_fraction", c.validation_fraction},
        {"validation_source", validation_name(c.validation_source)},
        {"seed", c.seed}}},
      {"split",
       {{"seed", a.split.seed},
        {"ratio", a.split.ratio},
        {"stratified", a.split.stratified},
        {"train_count", a.split.train_count},
        {"test_count", a.split.test_count},
        {"train_digest", hex64(a.split.train_digest)},
        {"test_digest", hex64(a.split.test_digest)}}},
      {"final_metrics",
       {{"train", metrics_to_json(a.train_metrics)}, {"test", metrics_to_json(a.test_metrics)}}},
      {"confusion",
       {{"train", confusion_to_json(a.train_confusion)},
        {"test", confusion_to_json(a.test_confusion)}}},
  };
}

ModelArtifact from_json(const json& doc) {
  ModelArtifact a;
  a.format_version = get<int>(doc, "format_version");
  if (a.format_version != kFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion,
                "format_version " + std::to_string(a.format_version) + " (supported: " +
                    std::to_string(kFormatVersion) + ")");
  }

  const json& schema = field(doc, "schema");
  for (const auto& f : field(schema, "features")) {
    data::Feature feat;
    feat.name = get<std::string>(f, "name");
    const auto kind = get<std::string>(f, "kind");
    if (kind == "numeric") {
      feat.kind = data::FeatureKind::Numeric;
    } else if (kind == "categorical") {
      feat.kind = data::FeatureKind::Categorical;
    } else {
      throw Error(ErrorCode::CorruptArtifact, "feature kind '" + kind + "'");
    }
    feat.vocab = get<std::vector<std::string>>(f, "vocab");
    a.schema.features.push_back(std::move(feat));
  }
  a.schema.target_name = get<std::string>(schema, "target_name");
  const auto tv = get<std::vector<std::string>>(schema, "target_vocab");
  if (tv.size() != 2) throw Error(ErrorCode::CorruptArtifact, "target_vocab must have 2 entries");
  a.schema.negative_label = tv[0];
  a.schema.positive_label = tv[1];
  try {
    a.schema.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptArtifact, e.what());
  }

  const json& scaler = field(doc, "scaler");
  a.scaler.means = get<std::vector<double>>(scaler, "means");
  a.scaler.stds = get<std::vector<double>>(scaler, "stds");
  if (a.scaler.means.size() != a.schema.dim() || a.scaler.stds.size() != a.schema.dim()) {
    throw Error(ErrorCode::CorruptArtifact, "scaler dimension does not match schema");
  }
  for (const double s : a.scaler.stds) {
    if (!(s > 0.0)) throw Error(ErrorCode::CorruptArtifact, "non-positive scaler std");
  }

  a.hidden = get<std::vector<std::size_t>>(doc, "hidden");
  for (const auto& l : field(doc, "layers")) {
    neural::DenseLayer layer;
    const auto in = get<std::size_t>(l, "in");
    const auto out = get<std::size_t>(l, "out");
    const auto weights = get<std::vector<double>>(l, "weights");
    layer.bias = get<std::vector<double>>(l, "bias");
    if (weights.size() != in * out || layer.bias.size() != out) {
      throw Error(ErrorCode::CorruptArtifact, "layer arrays do not match declared shape");
    }
    layer.weights = Matrix(in, out);
    std::copy(weights.begin(), weights.end(), layer.weights.flat().begin());
    const auto act = get<std::string>(l, "activation");
    if (act == "relu") {
      layer.activation = neural::Activation::ReLU;
    } else if (act == "sigmoid") {
      layer.activation = neural::Activation::Sigmoid;
    } else {
      throw Error(ErrorCode::CorruptArtifact, "activation '" + act + "'");
    }
    layer.dropout = get<double>(l, "dropout");
    a.model.layers.push_back(std::move(layer));
  }
  try {
    a.model.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptArtifact, e.what());
  }
  if (a.model.in_dim() != a.schema.dim()) {
    throw Error(ErrorCode::CorruptArtifact, "network input width does not match schema");
  }

  const json& tc = field(doc, "train_config");
  auto& c = a.train_config;
  c.learning_rate = get<double>(tc, "learning_rate");
  c.beta1 = get<double>(tc, "beta1");
  c.beta2 = get<double>(tc, "beta2");
  c.epsilon = get<double>(tc, "epsilon");
  c.epochs = get<std::size_t>(tc, "epochs");
  c.batch_size = get<std::size_t>(tc, "batch_size");
  c.dropout = get<double>(tc, "dropout");
  c.validation_fraction = get<double>(tc, "validation_fraction");
  const auto vs = get<std::string>(tc, "validation_source");
  if (vs == "train") {
    c.validation_source = neural::ValidationSource::FromTrain;
  } else if (vs == "test-as-paper") {
    c.validation_source = neural::ValidationSource::FromTestAsPaper;
  } else {
    throw Error(ErrorCode::CorruptArtifact, "validation_source '" + vs + "'");
  }
  c.seed = get<std::uint64_t>(tc, "seed");

  const json& sp = field(doc, "split");
  a.split.seed = get<std::uint64_t>(sp, "seed");
  a.split.ratio = get<double>(sp, "ratio");
  a.split.stratified = get<bool>(sp, "stratified");
  a.split.train_count = get<std::size_t>(sp, "train_count");
  a.split.test_count = get<std::size_t>(sp, "test_count");
  a.split.train_digest = parse_hex64(get<std::string>(sp, "train_digest"));
  a.split.test_digest = parse_hex64(get<std::string>(sp, "test_digest"));

  const json& fm = field(doc, "final_metrics");
  a.train_metrics = metrics_from(field(fm, "train"));
  a.test_metrics = metrics_from(field(fm, "test"));
  const json& cm = field(doc, "confusion");
  a.train_confusion = confusion_from(field(cm, "train"));
  a.test_confusion = confusion_from(field(cm, "test"));
  return a;
}

std::string dump_canonical(const json& doc) { return doc.dump(2) + "\n"; }

std::string serialize(const ModelArtifact& artifact) {
  return dump_canonical(to_json(artifact));
}

ModelArtifact deserialize(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::CorruptArtifact, e.what());
  }
  return from_json(doc);
}

void save_model(const ModelArtifact& artifact, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << serialize(artifact);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

ModelArtifact load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

}  // namespace dtcx::cli
