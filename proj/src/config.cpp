#include "plcp/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "plcp/error.hpp"
#include "plcp/rng.hpp"

namespace plcp {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
  }
}

const char* noise_name(IntroNoise noise) { return noise == IntroNoise::Variance ? "variance" : "stddev"; }

const char* arch_name(ArchKind kind) { return kind == ArchKind::SoftmaxLinear ? "linear" : "mlp"; }

MethodConfig parse_method(const json& obj, std::size_t index, double alpha, std::uint64_t seed) {
  const std::string where = "methods[" + std::to_string(index) + "]";
  reject_unknown(obj, {"name", "label", "m", "arch", "hidden", "lr", "epochs", "batch", "tol",
                       "patience", "seed", "init_scale", "temperature", "groups"},
                 where);
  MethodConfig method;
  read(obj, "name", method.name, where);
  if (method.name != "split" && method.name != "group" && method.name != "plcp") {
    throw ConfigError(where + ": method name must be split, group or plcp");
  }
  read(obj, "label", method.label, where);
  read(obj, "groups", method.groups, where);
  if (method.groups != "sign" && method.groups != "bits") {
    throw ConfigError(where + ": groups must be sign or bits");
  }
  TrainConfig& t = method.train;
  t.alpha = alpha;
  t.seed = seed;
  read(obj, "m", t.m, where);
  std::string arch = "linear";
  read(obj, "arch", arch, where);
  if (arch == "linear") {
    t.arch = ArchKind::SoftmaxLinear;
  } else if (arch == "mlp") {
    t.arch = ArchKind::SoftmaxMlp;
  } else {
    throw ConfigError(where + ": arch must be linear or mlp");
  }
  read(obj, "hidden", t.hidden, where);
  read(obj, "lr", t.lr, where);
  read(obj, "epochs", t.epochs, where);
  read(obj, "batch", t.batch, where);
  read(obj, "tol", t.tol, where);
  read(obj, "patience", t.patience, where);
  read(obj, "seed", t.seed, where);
  read(obj, "init_scale", t.init_scale, where);
  read(obj, "temperature", t.temperature, where);
  if (method.label.empty()) {
    method.label = method.name == "plcp" ? "plcp_m" + std::to_string(t.m) : method.name;
  }
  if (method.name == "plcp") t.validate();
  return method;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  double total = 0.0;
  for (double f : split) {
    if (!(f >= 0.0)) throw ConfigError("split fractions must be nonnegative");
    total += f;
  }
  if (!(split[1] > 0.0 && split[2] > 0.0)) throw ConfigError("calibration and test fractions must be positive");
  if (total > 1.0 + 1e-9) throw ConfigError("split fractions must sum to at most 1");
  if (data.source != "intro" && data.source != "linear_scale" && data.source != "highdim" &&
      data.source != "csv") {
    throw ConfigError("data.source must be intro, linear_scale, highdim or csv");
  }
  if (data.source == "csv" && data.path.empty()) throw ConfigError("data.path is required for csv data");
  if (data.source != "csv" && data.n < 3) throw ConfigError("data.n must be at least 3");
  if (predictor != "oracle" && predictor != "ols" && predictor != "columns" && predictor != "none") {
    throw ConfigError("predictor must be oracle, ols, columns or none");
  }
  if (predictor == "oracle" && data.source == "csv") throw ConfigError("csv data has no oracle predictor");
  if (predictor == "ols" && !(split[0] > 0.0)) throw ConfigError("the ols predictor needs a training split");
  if (score == ScoreKind::AbsoluteResidual && predictor == "none") {
    throw ConfigError("absolute_residual scores need a predictor");
  }
  if (score == ScoreKind::Precomputed && predictor != "none") {
    throw ConfigError("precomputed scores take predictor none");
  }
  if ((score == ScoreKind::SoftmaxComplement || score == ScoreKind::CumulativeSoftmax) &&
      predictor != "columns") {
    throw ConfigError("classification scores need predictor columns");
  }
  if (eval_groups != "auto" && eval_groups != "sign" && eval_groups != "bits" && eval_groups != "none") {
    throw ConfigError("eval_groups must be auto, sign, bits or none");
  }
  if (methods.empty()) throw ConfigError("at least one method is required");
  if (select_m_start < 1) throw ConfigError("select_m_start must be at least 1");
  if (!(holdout_frac > 0.0 && holdout_frac < 1.0)) throw ConfigError("holdout_frac must lie in (0, 1)");
  std::set<std::string> labels;
  for (const auto& m : methods) {
    if (!labels.insert(m.label).second) throw ConfigError("duplicate method label '" + m.label + "'");
  }
}

ExperimentConfig parse_config(const json& doc, std::optional<std::uint64_t> seed) {
  reject_unknown(doc, {"name", "seed", "alpha", "data", "split", "score", "predictor", "methods",
                       "eval_groups", "normalize_scores", "classes", "select_m_start",
                       "holdout_frac", "m_max"},
                 "config");
  ExperimentConfig cfg;
  read(doc, "name", cfg.name, "config");
  read(doc, "seed", cfg.seed, "config");
  if (seed) cfg.seed = *seed;
  read(doc, "alpha", cfg.alpha, "config");
  read(doc, "predictor", cfg.predictor, "config");
  read(doc, "eval_groups", cfg.eval_groups, "config");
  read(doc, "normalize_scores", cfg.normalize_scores, "config");
  read(doc, "classes", cfg.classes, "config");
  read(doc, "select_m_start", cfg.select_m_start, "config");
  read(doc, "holdout_frac", cfg.holdout_frac, "config");
  read(doc, "m_max", cfg.m_max, "config");
  if (doc.contains("split")) {
    std::vector<double> split;
    read(doc, "split", split, "config");
    if (split.size() != 3) throw ConfigError("split must list three fractions");
    cfg.split = {split[0], split[1], split[2]};
  }
  if (doc.contains("score")) {
    std::string score;
    read(doc, "score", score, "config");
    cfg.score = score_kind_from_string(score);
  }
  if (doc.contains("data")) {
    const json& d = doc.at("data");
    reject_unknown(d, {"source", "n", "noise", "sigma_x", "theta", "path", "label", "features",
                       "predictions"},
                   "data");
    read(d, "source", cfg.data.source, "data");
    read(d, "n", cfg.data.n, "data");
    read(d, "sigma_x", cfg.data.sigma_x, "data");
    read(d, "theta", cfg.data.theta, "data");
    read(d, "path", cfg.data.path, "data");
    read(d, "label", cfg.data.schema.label, "data");
    read(d, "features", cfg.data.schema.features, "data");
    read(d, "predictions", cfg.data.schema.predictions, "data");
    if (d.contains("noise")) {
      std::string noise;
      read(d, "noise", noise, "data");
      if (noise == "variance") {
        cfg.data.noise = IntroNoise::Variance;
      } else if (noise == "stddev") {
        cfg.data.noise = IntroNoise::StdDev;
      } else {
        throw ConfigError("data.noise must be variance or stddev");
      }
    }
  }
  if (doc.contains("methods")) {
    const json& methods = doc.at("methods");
    if (!methods.is_array()) throw ConfigError("methods must be an array");
    for (std::size_t i = 0; i < methods.size(); ++i) {
      cfg.methods.push_back(parse_method(methods[i], i, cfg.alpha, cfg.seed));
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, seed);
}

json to_json(const ExperimentConfig& cfg) {
  json data = {{"source", cfg.data.source}};
  if (cfg.data.source == "csv") {
    data["path"] = cfg.data.path;
    data["label"] = cfg.data.schema.label;
    data["features"] = cfg.data.schema.features;
    data["predictions"] = cfg.data.schema.predictions;
  } else {
    data["n"] = cfg.data.n;
    if (cfg.data.source == "intro") data["noise"] = noise_name(cfg.data.noise);
    if (cfg.data.source == "highdim") {
      data["sigma_x"] = cfg.data.sigma_x;
      data["theta"] = cfg.data.theta;
    }
  }
  json methods = json::array();
  for (const auto& m : cfg.methods) {
    json method = {{"name", m.name}, {"label", m.label}};
    if (m.name == "group") method["groups"] = m.groups;
    if (m.name == "plcp") {
      const TrainConfig& t = m.train;
      method["m"] = t.m;
      method["arch"] = arch_name(t.arch);
      if (t.arch == ArchKind::SoftmaxMlp) method["hidden"] = t.hidden;
      method["lr"] = t.effective_lr();
      method["epochs"] = t.epochs;
      method["batch"] = t.batch;
      method["tol"] = t.tol;
      method["patience"] = t.patience;
      method["seed"] = t.seed;
      method["init_scale"] = t.effective_init_scale();
      method["temperature"] = t.temperature;
    }
    methods.push_back(std::move(method));
  }
  return json{{"name", cfg.name},
              {"seed", cfg.seed},
              {"alpha", cfg.alpha},
              {"data", data},
              {"split", {cfg.split[0], cfg.split[1], cfg.split[2]}},
              {"score", to_string(cfg.score)},
              {"predictor", cfg.predictor},
              {"methods", methods},
              {"eval_groups", cfg.eval_groups},
              {"normalize_scores", cfg.normalize_scores},
              {"classes", cfg.classes},
              {"select_m_start", cfg.select_m_start},
              {"holdout_frac", cfg.holdout_frac},
              {"m_max", cfg.m_max}};
}

SplitSizes split_sizes(std::size_t n, const std::array<double, 3>& fractions) {
  // The slack keeps 0.6 * 10 from flooring to 5.
  auto part = [n](double f) {
    return static_cast<std::size_t>(std::floor(f * static_cast<double>(n) + 1e-9));
  };
  SplitSizes sizes{part(fractions[0]), part(fractions[1]), 0};
  if (sizes.train + sizes.cal > n) throw DataError("split fractions exceed the dataset");
  sizes.test = n - sizes.train - sizes.cal;
  return sizes;
}

std::vector<std::size_t> split_permutation(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return shuffled_indices(n, rng);
}

Split<LabeledSample> split_dataset(std::span<const LabeledSample> data,
                                   const std::array<double, 3>& fractions, std::uint64_t seed) {
  const SplitSizes sizes = split_sizes(data.size(), fractions);
  if ((fractions[0] > 0.0 && sizes.train == 0) || sizes.cal == 0 || sizes.test == 0) {
    throw DataError("a split of " + std::to_string(data.size()) + " samples came out empty");
  }
  const auto order = split_permutation(data.size(), seed);
  Split<LabeledSample> out;
  for (std::size_t r = 0; r < order.size(); ++r) {
    auto& part = r < sizes.train ? out.train : (r < sizes.train + sizes.cal ? out.cal : out.test);
    part.push_back(data[order[r]]);
  }
  return out;
}

}  // namespace plcp
