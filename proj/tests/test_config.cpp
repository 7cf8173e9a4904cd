#include <catch2/catch_amalgamated.hpp>

#include "ujmmd/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

using namespace ujmmd;

namespace {

std::string scratch(const std::string& name) { return "test_config_" + name; }

std::string write_cfg(const std::string& name, const std::string& text) {
    const std::string path = scratch(name);
    std::ofstream out(path);
    out << text;
    return path;
}

}  // namespace

TEST_CASE("config files parse into experiment settings") {
    const std::string path = write_cfg("full.cfg",
                                       "# comment line\n"
                                       "[synthetic]\n"
                                       "classes = 3\n"
                                       "per_class_source = 4, 5, 6\n"
                                       "per_class_target = 6, 5, 4\n"
                                       "dim = 7\n"
                                       "separation = 3.5\n"
                                       "shift = 1.25  ; trailing comment\n"
                                       "\n"
                                       "[run]\n"
                                       "preset = KNN-baseline, WC*\n"
                                       "seed = 11\n"
                                       "repeats = 4\n"
                                       "out = rows.csv\n"
                                       "format = json\n"
                                       "\n"
                                       "[method]\n"
                                       "delta = 0.3\n"
                                       "lambda = 0.7\n"
                                       "dim = 9\n"
                                       "iters = 2\n"
                                       "kernel = rbf\n"
                                       "bandwidth = 1.5\n"
                                       "knn_k = 3\n"
                                       "ridge = 1e-7\n");
    const ExperimentConfig cfg = parse_config_file(path);
    REQUIRE_NOTHROW(cfg.validate());

    REQUIRE(cfg.synthetic.has_value());
    REQUIRE(cfg.synthetic->num_classes == 3);
    REQUIRE(cfg.synthetic->per_class_source == std::vector<int>{4, 5, 6});
    REQUIRE(cfg.synthetic->per_class_target == std::vector<int>{6, 5, 4});
    REQUIRE(cfg.synthetic->dim == 7);
    REQUIRE(cfg.synthetic->class_separation == 3.5);
    REQUIRE(cfg.synthetic->domain_shift == 1.25);

    REQUIRE(cfg.presets == std::vector<std::string>{"KNN-baseline", "WC*"});
    REQUIRE(cfg.seed == 11);
    REQUIRE(cfg.repeats.has_value());
    REQUIRE(*cfg.repeats == 4);
    REQUIRE(cfg.out_path.has_value());
    REQUIRE(*cfg.out_path == "rows.csv");
    REQUIRE(cfg.format == "json");

    const MethodSpec method = make_method("WC*", cfg.method);
    REQUIRE(method.label_kernel_variant == 3);
    REQUIRE(method.delta == 0.3);  // override wins over the preset's 0.1
    REQUIRE(method.lambda == 0.7);
    REQUIRE(method.dim == 9);
    REQUIRE(method.iterations == 2);
    REQUIRE(method.kernel.family == KernelFamily::Rbf);
    REQUIRE(method.kernel.bandwidth.has_value());
    REQUIRE(*method.kernel.bandwidth == 1.5);
    REQUIRE(method.knn_k == 3);
    REQUIRE(method.ridge.has_value());
    REQUIRE(*method.ridge == 1e-7);
}

TEST_CASE("config defaults apply when sections are sparse") {
    const std::string path = write_cfg("sparse.cfg",
                                       "[synthetic]\n"
                                       "classes = 2\n"
                                       "per_class_source = 3, 3\n"
                                       "per_class_target = 3, 3\n"
                                       "dim = 2\n");
    const ExperimentConfig cfg = parse_config_file(path);
    REQUIRE(cfg.presets == std::vector<std::string>{"WC"});
    REQUIRE(cfg.seed == 0);
    REQUIRE_FALSE(cfg.repeats.has_value());
    REQUIRE(cfg.format == "csv");
    const MethodSpec method = make_method("WC", cfg.method);
    REQUIRE(method.dim == 20);
}

TEST_CASE("config errors carry file and line") {
    const std::string unknown_key = write_cfg("bad_key.cfg",
                                              "[synthetic]\n"
                                              "classes = 2\n"
                                              "colour = blue\n");
    REQUIRE_THROWS_WITH(parse_config_file(unknown_key),
                        Catch::Matchers::ContainsSubstring(":3") &&
                            Catch::Matchers::ContainsSubstring("colour"));

    const std::string bad_section = write_cfg("bad_section.cfg", "[general]\n");
    REQUIRE_THROWS_WITH(parse_config_file(bad_section),
                        Catch::Matchers::ContainsSubstring("unknown section"));

    const std::string no_section = write_cfg("no_section.cfg", "classes = 2\n");
    REQUIRE_THROWS_WITH(parse_config_file(no_section),
                        Catch::Matchers::ContainsSubstring("outside"));

    const std::string no_eq = write_cfg("no_eq.cfg",
                                        "[run]\n"
                                        "seed\n");
    REQUIRE_THROWS_WITH(parse_config_file(no_eq),
                        Catch::Matchers::ContainsSubstring("key = value"));

    const std::string neg_seed = write_cfg("neg_seed.cfg",
                                           "[run]\n"
                                           "seed = -4\n");
    REQUIRE_THROWS_WITH(parse_config_file(neg_seed),
                        Catch::Matchers::ContainsSubstring("nonnegative"));

    const std::string bad_int = write_cfg("bad_int.cfg",
                                          "[run]\n"
                                          "repeats = soon\n");
    REQUIRE_THROWS_AS(parse_config_file(bad_int), std::runtime_error);

    REQUIRE_THROWS_WITH(parse_config_file(scratch("absent.cfg")),
                        Catch::Matchers::ContainsSubstring("cannot open"));
}

TEST_CASE("exactly one input source is required") {
    ExperimentConfig cfg;
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg.synthetic = SyntheticSpec{};
    cfg.synthetic->per_class_source = {2, 2};
    cfg.synthetic->per_class_target = {2, 2};
    cfg.data = DataPaths{};
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("unknown presets are rejected with the valid set named") {
    ExperimentConfig cfg;
    cfg.synthetic = SyntheticSpec{};
    cfg.synthetic->per_class_source = {2, 2};
    cfg.synthetic->per_class_target = {2, 2};
    cfg.presets = {"WCX"};
    REQUIRE_THROWS_WITH(cfg.validate(),
                        Catch::Matchers::ContainsSubstring("WCX") &&
                            Catch::Matchers::ContainsSubstring("KNN-baseline"));

    cfg.presets = {"WC"};
    cfg.format = "yaml";
    REQUIRE_THROWS_WITH(cfg.validate(),
                        Catch::Matchers::ContainsSubstring("format"));
}

TEST_CASE("task names derive from the input source") {
    ExperimentConfig cfg;
    cfg.synthetic = SyntheticSpec{};
    REQUIRE(task_name(cfg) == "synthetic");

    cfg.synthetic.reset();
    cfg.data = DataPaths{};
    cfg.data->source_features = "feats/amazon.csv";
    cfg.data->target_features = "feats/webcam.csv";
    REQUIRE(task_name(cfg) == "amazon->webcam");

    cfg.data->name = "A->W";
    REQUIRE(task_name(cfg) == "A->W");
}

TEST_CASE("synthetic pairs honor the run seed") {
    ExperimentConfig cfg;
    cfg.synthetic = SyntheticSpec{};
    cfg.synthetic->num_classes = 2;
    cfg.synthetic->per_class_source = {4, 4};
    cfg.synthetic->per_class_target = {4, 4};
    cfg.synthetic->dim = 3;

    const DomainPair pair = load_pair(cfg, 5);
    SyntheticSpec direct = *cfg.synthetic;
    direct.seed = 5;
    const DomainPair expected = generate_synthetic(direct);
    REQUIRE((pair.source_features.array() == expected.source_features.array()).all());
    REQUIRE((pair.target_features.array() == expected.target_features.array()).all());
}

TEST_CASE("aggregate rows append mean then spread") {
    ResultTable table;
    ResultRow a{"t", "WC", "0", "run", 0.5, 2.0, 0.01, {0.4, 0.5}};
    ResultRow b{"t", "WC", "1", "run", 0.7, 4.0, 0.03, {0.6, 0.7}};
    table.rows = {a, b};
    table.append_aggregates("t", "WC", {a, b});

    REQUIRE(table.rows.size() == 4);
    const ResultRow& mean = table.rows[2];
    const ResultRow& dev = table.rows[3];
    REQUIRE(mean.statistic == "mean");
    REQUIRE(mean.seed == "aggregate");
    REQUIRE(mean.final_accuracy == Catch::Approx(0.6));
    REQUIRE(mean.feature_distance == Catch::Approx(3.0));
    REQUIRE(mean.hsi == Catch::Approx(0.02));
    REQUIRE(dev.statistic == "std");
    REQUIRE(dev.seed == "aggregate");
    // Population deviation over {0.5, 0.7} is exactly 0.1.
    REQUIRE(dev.final_accuracy == Catch::Approx(0.1));
    REQUIRE(dev.feature_distance == Catch::Approx(1.0));
    REQUIRE(dev.hsi == Catch::Approx(0.01));
}

TEST_CASE("csv output pins the header and row shape") {
    ResultTable table;
    table.rows.push_back(ResultRow{"syn", "WC", "3", "run", 0.75, 1.5, 0.125, {}});
    table.rows.push_back(ResultRow{"syn", "KNN-baseline", "3", "run",
                                   std::numeric_limits<double>::quiet_NaN(), 2.5,
                                   0.25, {}});
    std::ostringstream out;
    write_csv(table, out);

    std::istringstream lines(out.str());
    std::string line;
    REQUIRE(std::getline(lines, line));
    REQUIRE(line == "task,preset,seed,final_accuracy,feature_distance,hsi");
    REQUIRE(std::getline(lines, line));
    REQUIRE(line == "syn,WC,3,0.75,1.5,0.125");
    REQUIRE(std::getline(lines, line));
    // Missing accuracy (no ground truth) renders as nan.
    REQUIRE(line == "syn,KNN-baseline,3,nan,2.5,0.25");
    REQUIRE_FALSE(std::getline(lines, line));
}

TEST_CASE("json output records run statistics explicitly") {
    ResultTable table;
    table.rows.push_back(ResultRow{"syn", "WC", "0", "run", 0.5, 1.0, 0.1, {0.25, 0.5}});
    table.rows.push_back(ResultRow{"syn", "WC", "aggregate", "mean",
                                   std::numeric_limits<double>::quiet_NaN(), 1.0,
                                   0.1, {}});
    std::ostringstream out;
    write_json(table, out);

    const nlohmann::json parsed = nlohmann::json::parse(out.str());
    REQUIRE(parsed.is_array());
    REQUIRE(parsed.size() == 2);
    REQUIRE(parsed[0]["task"] == "syn");
    REQUIRE(parsed[0]["preset"] == "WC");
    REQUIRE(parsed[0]["seed"] == "0");
    REQUIRE(parsed[0]["statistic"] == "run");
    REQUIRE(parsed[0]["final_accuracy"] == 0.5);
    REQUIRE(parsed[0]["per_iteration_accuracy"] ==
            nlohmann::json::array({0.25, 0.5}));
    REQUIRE(parsed[1]["statistic"] == "mean");
    REQUIRE(parsed[1]["final_accuracy"].is_null());
    REQUIRE_FALSE(parsed[1].contains("per_iteration_accuracy"));
}
