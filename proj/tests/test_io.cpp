#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "plcp/checkpoint.hpp"
#include "plcp/config.hpp"
#include "plcp/csv.hpp"
#include "plcp/error.hpp"
#include "plcp/experiment.hpp"

using namespace plcp;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("plcp_test_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string message_of(const std::string& text) {
  try {
    parse_csv(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

nlohmann::json small_intro() {
  return nlohmann::json::parse(R"({
    "name": "small", "seed": 3, "alpha": 0.1,
    "data": {"source": "intro", "n": 4000},
    "split": [0.0, 0.5, 0.5],
    "methods": [{"name": "split"}, {"name": "plcp", "m": 2, "epochs": 50}]
  })");
}

}  // namespace

TEST_CASE("csv round trip") {
  Table t;
  t.header = {"x0", "y"};
  t.rows = {{0.1, -2.5}, {1e-300, kInfinity}, {-0.0, 3.0}};
  const Table back = parse_csv(format_csv(t));
  CHECK(back.header == t.header);
  REQUIRE(back.rows.size() == 3);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 2; ++c) CHECK(back.rows[r][c] == t.rows[r][c]);
  }
  CHECK(back.column("y") == 1);
  CHECK_THROWS_AS(back.column("z"), DataError);
}

TEST_CASE("csv errors") {
  CHECK(message_of("a,b\n1,2\n3,4\n5,6\n7,8\n9\n").find("missing value at row 5") !=
        std::string::npos);
  CHECK(message_of("a,b\n1,x\n").find("cannot parse") != std::string::npos);
  CHECK(message_of("a,b\n1,2,3\n").find("too many values at row 1") != std::string::npos);
  CHECK(message_of("").find("empty file") != std::string::npos);
  CHECK(message_of("a,b\n").find("empty dataset") != std::string::npos);
}

TEST_CASE("labeled tables") {
  const Table t = parse_csv("x0,p,y\n1,0.5,2\n3,0.25,4\n");
  CsvSchema schema;
  schema.predictions = {"p"};
  const LabeledTable lt = to_labeled(t, schema);
  CHECK(lt.feature_names == std::vector<std::string>{"x0"});
  CHECK(lt.samples[1].x == Vector{3});
  CHECK(lt.samples[1].y == 4);
  CHECK(lt.predictions[0] == Vector{0.5});
  const Table back = from_labeled(lt.samples);
  CHECK(back.header == std::vector<std::string>{"x0", "y"});
}

TEST_CASE("split sizes and permutation") {
  const auto a = split_sizes(10, {0.6, 0.2, 0.2});
  CHECK(a.train == 6);
  CHECK(a.cal == 2);
  CHECK(a.test == 2);
  const auto b = split_sizes(7, {0.6, 0.2, 0.2});
  CHECK(b.train == 4);
  CHECK(b.cal == 1);
  CHECK(b.test == 2);

  CHECK(split_permutation(100, 5) == split_permutation(100, 5));
  CHECK(split_permutation(100, 5) != split_permutation(100, 6));
  auto perm = split_permutation(50, 1);
  std::sort(perm.begin(), perm.end());
  for (std::size_t i = 0; i < perm.size(); ++i) CHECK(perm[i] == i);

  std::vector<LabeledSample> tiny(3, LabeledSample{{0.0}, 0.0});
  CHECK_THROWS_AS(split_dataset(tiny, {0.6, 0.2, 0.2}, 1), DataError);
}

TEST_CASE("config parsing") {
  auto doc = small_intro();
  const ExperimentConfig cfg = parse_config(doc);
  CHECK(cfg.seed == 3);
  REQUIRE(cfg.methods.size() == 2);
  CHECK(cfg.methods[1].label == "plcp_m2");
  CHECK(cfg.methods[1].train.seed == 3);
  CHECK(cfg.methods[1].train.epochs == 50);

  const ExperimentConfig overridden = parse_config(doc, 11);
  CHECK(overridden.seed == 11);
  CHECK(overridden.methods[1].train.seed == 11);

  const ExperimentConfig echoed = parse_config(to_json(cfg));
  CHECK(to_json(echoed) == to_json(cfg));

  auto bad = doc;
  bad["learning_rate"] = 1;
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = doc;
  bad["methods"][1]["momentum"] = 0.9;
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = doc;
  bad["alpha"] = 1.5;
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = doc;
  bad["methods"] = nlohmann::json::array();
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
}

TEST_CASE("checkpoint round trip") {
  SavedRule saved;
  const Architecture arch = Architecture::softmax_mlp(2, {3}, 3);
  saved.rule.model = PartitionModel::init(arch, 9, 0.5);
  saved.rule.q.values = {0.5, kInfinity, 2.25};
  saved.rule.score.kind = ScoreKind::AbsoluteResidual;
  saved.rule.assignment = {AssignmentMode::Randomized, 17};
  saved.predictor = {"linear", {1.0, -0.5}, 0.25, {}};
  saved.alpha = 0.2;
  saved.normalizer = ScoreNormalizer{0.5, 4.0};
  saved.feature_names = {"a", "b"};

  const fs::path dir = scratch_dir("checkpoint");
  save_rule(dir / "rule.model", saved);
  const SavedRule back = load_rule(dir / "rule.model");
  CHECK(back.rule.q.values == saved.rule.q.values);
  CHECK(back.rule.model.params() == saved.rule.model.params());
  CHECK(back.rule.model.arch().widths == arch.widths);
  CHECK(back.rule.assignment.mode == AssignmentMode::Randomized);
  CHECK(back.rule.assignment.seed == 17);
  CHECK(back.predictor.weights == saved.predictor.weights);
  CHECK(back.alpha == 0.2);
  REQUIRE(back.normalizer.has_value());
  CHECK(back.normalizer->hi == 4.0);
  CHECK(back.feature_names == saved.feature_names);
  const Vector x = {0.3, -1.0};
  CHECK(back.rule.model.forward(x) == saved.rule.model.forward(x));

  auto doc = rule_to_json(saved);
  doc["format"] = "something-else";
  CHECK_THROWS_AS(rule_from_json(doc), DataError);
  CHECK_THROWS_AS(load_rule(dir / "missing.model"), DataError);
}

TEST_CASE("experiment outputs are deterministic") {
  const ExperimentConfig cfg = parse_config(small_intro());
  const fs::path a = scratch_dir("run_a");
  const fs::path b = scratch_dir("run_b");
  run_experiment(cfg, {}, a);
  run_experiment(cfg, {2, false}, b);
  CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
  CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
  CHECK(fs::exists(a / "rule.model"));
  CHECK(fs::exists(a / "config.echo"));

  std::istringstream lines(slurp(a / "metrics.csv"));
  std::vector<std::string> rows;
  for (std::string line; std::getline(lines, line);) rows.push_back(line);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == "method,group,count,coverage,mean_length,msce,pearson,hsic");
  CHECK(rows[1].rfind("split,x<0,", 0) == 0);
  CHECK(rows[2].rfind("split,x>=0,", 0) == 0);
  CHECK(rows[3].rfind("split,all,2000,", 0) == 0);
  CHECK(rows[4].rfind("plcp_m2,x<0,", 0) == 0);
  CHECK(rows[6].rfind("plcp_m2,all,2000,", 0) == 0);
}
