#include "plcp/experiment.hpp"

#include <cmath>
#include <fstream>
#include <spdlog/spdlog.h>

#include "plcp/error.hpp"
#include "plcp/rng.hpp"
#include "plcp/synth.hpp"

namespace plcp {

namespace {

enum Stream : std::uint64_t { kDataStream = 10, kSplitStream = 11, kAssignStream = 12 };

std::uint64_t stream_seed(std::uint64_t seed, Stream stream) { return Rng(seed).substream(stream).seed(); }

std::vector<LabeledSample> generate(const ExperimentConfig& cfg) {
  const std::uint64_t seed = stream_seed(cfg.seed, kDataStream);
  const DataConfig& d = cfg.data;
  if (d.source == "intro") return gen_intro(d.n, seed, d.noise);
  if (d.source == "linear_scale") return gen_linear_scale(d.n, seed);
  if (d.source == "highdim") {
    HighDimParams params;
    params.sigma_x = d.sigma_x;
    params.theta.assign(kHighDimDim, d.theta);
    return gen_highdim(d.n, params, seed);
  }
  throw ConfigError("data source '" + d.source + "' is not synthetic");
}

std::vector<EvalGroup> eval_groups(const ExperimentConfig& cfg) {
  std::string kind = cfg.eval_groups;
  if (kind == "auto") {
    if (cfg.data.source == "intro" || cfg.data.source == "linear_scale") {
      kind = "sign";
    } else if (cfg.data.source == "highdim") {
      kind = "bits";
    } else {
      kind = "none";
    }
  }
  if (kind == "sign") return halves(0, 0.0, "x");
  if (kind == "bits") {
    std::vector<std::size_t> cols(kHighDimBinary);
    for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = i;
    return binary_digit_groups(cols);
  }
  return {};
}

GroupSpec group_spec(const MethodConfig& method) {
  if (method.groups == "sign") return GroupSpec::by_cuts(0, {0.0});
  std::vector<std::size_t> cols(kHighDimBinary);
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = i;
  return GroupSpec::by_bits(cols);
}

Vector to_raw(const std::optional<ScoreNormalizer>& normalizer, Vector thresholds) {
  if (normalizer) {
    for (double& t : thresholds) t = normalizer->to_raw(t);
  }
  return thresholds;
}

std::vector<Vector> covariates(std::span<const LabeledSample> samples) {
  std::vector<Vector> xs(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) xs[j] = samples[j].x;
  return xs;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

const MethodConfig* first_plcp(const ExperimentConfig& cfg) {
  for (const auto& m : cfg.methods) {
    if (m.name == "plcp") return &m;
  }
  return nullptr;
}

}  // namespace

PreparedData prepare_data(const ExperimentConfig& cfg) {
  cfg.validate();
  PreparedData prepared;
  std::vector<LabeledSample> all;
  std::vector<Vector> all_predictions;
  if (cfg.data.source == "csv") {
    LabeledTable table = to_labeled(load_csv(cfg.data.path), cfg.data.schema);
    all = std::move(table.samples);
    all_predictions = std::move(table.predictions);
    prepared.feature_names = std::move(table.feature_names);
    prepared.label = cfg.data.schema.label;
  } else {
    all = generate(cfg);
    for (std::size_t k = 0; k < all.front().x.size(); ++k) prepared.feature_names.push_back("x" + std::to_string(k));
  }

  // Split indices once so prediction columns follow their samples.
  const SplitSizes sizes = split_sizes(all.size(), cfg.split);
  if ((cfg.split[0] > 0.0 && sizes.train == 0) || sizes.cal == 0 || sizes.test == 0) {
    throw DataError("a split of " + std::to_string(all.size()) + " samples came out empty");
  }
  const auto order = split_permutation(all.size(), stream_seed(cfg.seed, kSplitStream));
  Split<Vector> preds;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const bool is_train = r < sizes.train;
    const bool is_cal = !is_train && r < sizes.train + sizes.cal;
    auto& part = is_train ? prepared.parts.train : (is_cal ? prepared.parts.cal : prepared.parts.test);
    part.push_back(all[order[r]]);
    if (!all_predictions.empty()) {
      auto& ppart = is_train ? preds.train : (is_cal ? preds.cal : preds.test);
      ppart.push_back(all_predictions[order[r]]);
    }
  }

  PredictorSpec& predictor = prepared.predictor;
  if (cfg.predictor == "oracle") {
    predictor.kind = "linear";
    if (cfg.data.source == "highdim") {
      predictor.weights.assign(kHighDimDim, cfg.data.theta);
    } else {
      predictor.weights = {1.0};
    }
  } else if (cfg.predictor == "ols") {
    const LinearFit fit = ols_fit(prepared.parts.train);
    predictor.kind = "linear";
    predictor.weights = fit.theta;
    predictor.intercept = fit.intercept;
  } else if (cfg.predictor == "columns") {
    if (cfg.data.schema.predictions.empty()) throw ConfigError("predictor columns needs data.predictions");
    predictor.kind = "columns";
    predictor.columns = cfg.data.schema.predictions;
  }
  prepared.cal_score = make_score_spec(cfg.score, predictor, preds.cal);
  prepared.test_score = make_score_spec(cfg.score, predictor, preds.test);

  Vector scores = compute_scores(prepared.cal_score, prepared.parts.cal);
  if (cfg.normalize_scores) {
    prepared.normalizer = ScoreNormalizer::fit(scores);
    for (double& s : scores) s = prepared.normalizer->apply(s);
  }
  prepared.calibration.reserve(scores.size());
  for (std::size_t j = 0; j < scores.size(); ++j) {
    prepared.calibration.push_back({prepared.parts.cal[j].x, scores[j]});
  }

  if (cfg.predictor == "oracle") {
    if (cfg.data.source == "intro") prepared.oracle = intro_oracle(cfg.alpha, cfg.data.noise);
    if (cfg.data.source == "linear_scale") prepared.oracle = linear_scale_oracle(cfg.alpha);
    if (cfg.data.source == "highdim") prepared.oracle = highdim_oracle(cfg.data.sigma_x, cfg.alpha);
  }
  prepared.groups = eval_groups(cfg);
  if (cfg.score == ScoreKind::SoftmaxComplement || cfg.score == ScoreKind::CumulativeSoftmax) {
    if (cfg.classes == 0) throw ConfigError("classification scores need 'classes'");
    prepared.domain = LabelDomain{cfg.classes};
  }
  return prepared;
}

ExperimentResult run_methods(const ExperimentConfig& cfg, const RunOptions& options) {
  ExperimentResult result;
  result.data = prepare_data(cfg);
  const PreparedData& data = result.data;
  const std::vector<Vector> test_x = covariates(data.parts.test);
  Vector cal_scores(data.calibration.size());
  for (std::size_t j = 0; j < cal_scores.size(); ++j) cal_scores[j] = data.calibration[j].s;

  for (const auto& method : cfg.methods) {
    MethodOutcome outcome;
    outcome.name = method.name;
    outcome.label = method.label;
    Vector thresholds;
    if (method.name == "split") {
      thresholds = rule_thresholds(split_conformal(cal_scores, cfg.alpha), test_x);
    } else if (method.name == "group") {
      thresholds = rule_thresholds(group_conditional(data.calibration, group_spec(method), cfg.alpha), test_x);
    } else {
      FitResult fit = fit_plcp(data.calibration, method.train, data.cal_score);
      if (options.randomized) {
        fit.rule.assignment = {AssignmentMode::Randomized, stream_seed(cfg.seed, kAssignStream)};
      }
      thresholds = rule_thresholds(fit.rule, test_x, options.threads);
      spdlog::info("{}: {} epochs, objective {:.10g}", method.label, fit.trace.epochs_run,
                   fit.trace.final_objective());
      outcome.fit = std::move(fit);
    }
    outcome.thresholds = to_raw(data.normalizer, std::move(thresholds));
    outcome.report = evaluate_thresholds(data.parts.test, data.test_score, outcome.thresholds,
                                         data.groups, data.oracle ? &*data.oracle : nullptr,
                                         data.domain);
    spdlog::info("{}: marginal coverage {:.4f}, mean length {:.4f}", method.label,
                 outcome.report.coverage.marginal, outcome.report.coverage.mean_length);
    result.methods.push_back(std::move(outcome));
  }
  return result;
}

std::string metrics_csv(const std::vector<MethodOutcome>& methods) {
  std::string out = "method,group,count,coverage,mean_length,msce,pearson,hsic\n";
  for (const auto& m : methods) {
    const CoverageReport& cov = m.report.coverage;
    for (const auto& g : cov.groups) {
      out += m.label + "," + g.name + "," + std::to_string(g.count) + ",";
      if (g.absent()) {
        out += "absent,absent,,,\n";
      } else {
        out += format_double(g.coverage) + "," + format_double(g.mean_length) + ",,,\n";
      }
    }
    out += m.label + ",all," + std::to_string(cov.count) + "," + format_double(cov.marginal) + "," +
           format_double(cov.mean_length) + "," + (m.report.msce ? format_double(*m.report.msce) : "") +
           "," + format_double(m.report.pearson_r) + "," + format_double(m.report.hsic) + "\n";
  }
  return out;
}

std::string trace_csv(const TrainTrace& trace) {
  std::string out = "epoch,objective\n";
  for (std::size_t e = 0; e < trace.objective.size(); ++e) {
    out += std::to_string(e) + "," + format_double(trace.objective[e]) + "\n";
  }
  return out;
}

std::string select_m_csv(const SelectMReport& report) {
  std::string out = "m,validation_loss\n";
  for (std::size_t i = 0; i < report.candidates.size(); ++i) {
    out += std::to_string(report.candidates[i]) + "," + format_double(report.validation_loss[i]) + "\n";
  }
  return out;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                   const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  write_text(out / "metrics.csv", metrics_csv(result.methods));
  write_text(out / "config.echo", to_json(cfg).dump(2) + "\n");
  const MethodOutcome* plcp = nullptr;
  for (const auto& m : result.methods) {
    if (m.fit) {
      plcp = &m;
      break;
    }
  }
  if (plcp == nullptr) {
    write_text(out / "trace.csv", "epoch,objective\n");
    spdlog::info("no plcp method configured; rule.model not written");
    return;
  }
  write_text(out / "trace.csv", trace_csv(plcp->fit->trace));
  SavedRule saved;
  saved.rule = plcp->fit->rule;
  saved.predictor = result.data.predictor;
  saved.alpha = cfg.alpha;
  saved.normalizer = result.data.normalizer;
  saved.feature_names = result.data.feature_names;
  saved.label = result.data.label;
  saved.classes = cfg.classes;
  save_rule(out / "rule.model", saved);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options,
                                const std::filesystem::path& out) {
  ExperimentResult result = run_methods(cfg, options);
  write_outputs(cfg, result, out);
  return result;
}

SelectMReport run_select_m(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  const MethodConfig* method = first_plcp(cfg);
  if (method == nullptr) throw ConfigError("select-m needs a plcp method in the config");
  const PreparedData data = prepare_data(cfg);
  SelectMReport report = select_m(data.calibration, method->train, cfg.select_m_start,
                                  cfg.holdout_frac, cfg.m_max);
  std::filesystem::create_directories(out);
  write_text(out / "select_m.csv", select_m_csv(report));
  SavedRule saved;
  saved.rule = report.final_fit.rule;
  saved.rule.score = data.cal_score;
  saved.predictor = data.predictor;
  saved.alpha = cfg.alpha;
  saved.normalizer = data.normalizer;
  saved.feature_names = data.feature_names;
  saved.label = data.label;
  saved.classes = cfg.classes;
  save_rule(out / "rule.model", saved);
  return report;
}

void run_generate(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  const auto samples = generate(cfg);
  std::filesystem::create_directories(out);
  save_csv(out / "data.csv", from_labeled(samples));
}

MethodOutcome run_evaluate(const SavedRule& saved, const Table& table, const RunOptions& options,
                           const std::filesystem::path& out) {
  CsvSchema schema;
  schema.label = saved.label;
  schema.features = saved.feature_names;
  schema.predictions = saved.predictor.columns;
  const LabeledTable data = to_labeled(table, schema);
  const ScoreSpec score = make_score_spec(saved.rule.score.kind, saved.predictor, data.predictions);
  PlcpRule rule = saved.rule;
  if (options.randomized && rule.assignment.mode == AssignmentMode::Argmax) {
    rule.assignment.mode = AssignmentMode::Randomized;
  }
  const std::vector<Vector> xs = covariates(data.samples);
  MethodOutcome outcome;
  outcome.name = "plcp";
  outcome.label = "plcp_m" + std::to_string(rule.q.m());
  outcome.thresholds = to_raw(saved.normalizer, rule_thresholds(rule, xs, options.threads));
  SetDomain domain = IntervalDomain{};
  if (score.is_classification()) domain = LabelDomain{saved.classes};
  outcome.report = evaluate_thresholds(data.samples, score, outcome.thresholds, {}, nullptr, domain);
  std::filesystem::create_directories(out);
  write_text(out / "metrics.csv", metrics_csv({outcome}));
  return outcome;
}

}  // namespace plcp
