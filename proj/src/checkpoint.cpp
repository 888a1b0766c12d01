#include "plcp/checkpoint.hpp"

#include <cmath>
#include <fstream>

#include "plcp/error.hpp"

namespace plcp {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json threshold_to_json(double t) {
  if (std::isinf(t)) return t > 0 ? "inf" : "-inf";
  return t;
}

double threshold_from_json(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return kInfinity;
    if (s == "-inf") return -kInfinity;
    throw DataError("bad threshold '" + s + "' in model file");
  }
  return v.get<double>();
}

}  // namespace

ScoreSpec make_score_spec(ScoreKind kind, const PredictorSpec& predictor, std::vector<Vector> table) {
  ScoreSpec spec;
  spec.kind = kind;
  if (predictor.kind == "linear") {
    if (kind != ScoreKind::AbsoluteResidual) throw ConfigError("a linear predictor needs absolute_residual scores");
    spec.point = [w = predictor.weights, b = predictor.intercept](std::span<const double> x) {
      if (x.size() != w.size()) throw DataError("predictor dimension mismatch");
      double value = b;
      for (std::size_t k = 0; k < w.size(); ++k) value += w[k] * x[k];
      return value;
    };
  } else if (predictor.kind == "columns") {
    if (kind == ScoreKind::Precomputed) throw ConfigError("precomputed scores take no predictor");
    spec.table = std::move(table);
  } else if (predictor.kind != "none") {
    throw ConfigError("unknown predictor kind '" + predictor.kind + "'");
  }
  return spec;
}

json rule_to_json(const SavedRule& saved) {
  const PlcpRule& rule = saved.rule;
  const Architecture& arch = rule.model.arch();
  json q = json::array();
  for (double t : rule.q.values) q.push_back(threshold_to_json(t));
  json predictor = {{"kind", saved.predictor.kind}};
  if (saved.predictor.kind == "linear") {
    predictor["weights"] = saved.predictor.weights;
    predictor["intercept"] = saved.predictor.intercept;
  }
  if (saved.predictor.kind == "columns") predictor["columns"] = saved.predictor.columns;
  json doc = {
      {"format", "plcp-rule"},
      {"version", kFormatVersion},
      {"arch",
       {{"kind", arch.kind == ArchKind::SoftmaxLinear ? "linear" : "mlp"},
        {"widths", arch.widths},
        {"temperature", arch.temperature}}},
      {"seed", rule.model.seed()},
      {"params", rule.model.params()},
      {"q", q},
      {"alpha", saved.alpha},
      {"score", to_string(rule.score.kind)},
      {"predictor", predictor},
      {"assignment",
       {{"mode", rule.assignment.mode == AssignmentMode::Argmax ? "argmax" : "randomized"},
        {"seed", rule.assignment.seed}}},
      {"features", saved.feature_names},
      {"label", saved.label},
      {"classes", saved.classes},
  };
  if (saved.normalizer) doc["normalizer"] = {{"lo", saved.normalizer->lo}, {"hi", saved.normalizer->hi}};
  return doc;
}

SavedRule rule_from_json(const json& doc) {
  try {
    if (doc.value("format", std::string{}) != "plcp-rule") throw DataError("not a plcp rule file");
    if (doc.at("version").get<int>() != kFormatVersion) throw DataError("unsupported rule file version");
    const json& a = doc.at("arch");
    Architecture arch;
    const auto kind = a.at("kind").get<std::string>();
    if (kind != "linear" && kind != "mlp") throw DataError("unknown architecture '" + kind + "'");
    arch.kind = kind == "linear" ? ArchKind::SoftmaxLinear : ArchKind::SoftmaxMlp;
    arch.widths = a.at("widths").get<std::vector<std::size_t>>();
    arch.temperature = a.at("temperature").get<double>();

    SavedRule saved;
    saved.alpha = doc.at("alpha").get<double>();
    const json& p = doc.at("predictor");
    saved.predictor.kind = p.at("kind").get<std::string>();
    if (p.contains("weights")) saved.predictor.weights = p.at("weights").get<Vector>();
    if (p.contains("intercept")) saved.predictor.intercept = p.at("intercept").get<double>();
    if (p.contains("columns")) saved.predictor.columns = p.at("columns").get<std::vector<std::string>>();
    const ScoreKind score = score_kind_from_string(doc.at("score").get<std::string>());

    QuantileVector q;
    for (const auto& v : doc.at("q")) q.values.push_back(threshold_from_json(v));
    const json& asg = doc.at("assignment");
    const auto mode = asg.at("mode").get<std::string>();
    if (mode != "argmax" && mode != "randomized") throw DataError("unknown assignment mode '" + mode + "'");
    Assignment assignment{mode == "argmax" ? AssignmentMode::Argmax : AssignmentMode::Randomized,
                          asg.at("seed").get<std::uint64_t>()};

    PartitionModel model(arch, doc.at("params").get<Vector>(), doc.at("seed").get<std::uint64_t>());
    saved.rule = PlcpRule{std::move(model), std::move(q), make_score_spec(score, saved.predictor), assignment};
    saved.rule.validate();
    saved.feature_names = doc.at("features").get<std::vector<std::string>>();
    saved.label = doc.at("label").get<std::string>();
    saved.classes = doc.at("classes").get<std::size_t>();
    if (doc.contains("normalizer")) {
      saved.normalizer = ScoreNormalizer{doc.at("normalizer").at("lo").get<double>(),
                                         doc.at("normalizer").at("hi").get<double>()};
    }
    return saved;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed rule file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("malformed rule file: ") + e.what());
  }
}

void save_rule(const std::filesystem::path& path, const SavedRule& saved) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << rule_to_json(saved).dump(2) << '\n';
}

SavedRule load_rule(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("rule file " + path.string() + " is not valid JSON: " + e.what());
  }
  return rule_from_json(doc);
}

}  // namespace plcp
