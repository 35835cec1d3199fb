#include <filesystem>
#include <regex>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "json.hpp"
#include "qmlbench/bench.hpp"
#include "qmlbench/vqc.hpp"

using namespace qmlbench;
using namespace qmlbench::bench;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string field_of(std::string_view text) {
    try {
        parse_configs(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<no error>";
}

ExperimentConfig blobs_config(ModelKind model, std::size_t n = 40, double noise = 0.0) {
    ExperimentConfig c;
    SyntheticSource s;
    s.kind = data::SyntheticKind::blobs;
    s.n = n;
    s.noise = noise;
    s.seed = 3;
    c.dataset.synthetic = s;
    c.dataset.provenance = data::Provenance::synthetic;
    c.model = model;
    c.pca_components = 2;
    c.epochs = 2;
    c.seed = 11;
    return c;
}

BenchmarkReport zero_seconds(BenchmarkReport r) {
    for (auto& row : r.rows) {
        row.seconds = 0.0;
    }
    return r;
}

}  // namespace

TEST_CASE("model names", "[bench]") {
    CHECK(kAllModels.size() == 7);
    std::vector<std::string> names;
    for (ModelKind m : kAllModels) {
        names.emplace_back(display_name(m));
        CHECK(parse_model(model_key(m)) == m);
    }
    CHECK(names == std::vector<std::string>{"QNN", "Hybrid-QNN_V1", "Hybrid-QNN_V2", "Classical NN",
                                            "Classical NN-Fair", "QSVM", "Classical SVM"});
    CHECK(is_quantum(ModelKind::qsvm));
    CHECK_FALSE(is_quantum(ModelKind::classical_nn));
    CHECK(is_svm(ModelKind::classical_svm));
    CHECK_FALSE(is_svm(ModelKind::hybrid_v2));
    CHECK_THROWS_AS(parse_model("rf"), std::invalid_argument);
}

TEST_CASE("parse_configs expands models and fractions", "[bench][config]") {
    const auto configs = parse_configs(R"({
        "dataset": {"synthetic": {"kind": "annulus", "n": 60, "noise": 0.05, "seed": 4}},
        "models": ["qnn", "hybrid_v1", "hybrid_v2", "classical_nn", "classical_nn_fair", "qsvm", "classical_svm"],
        "fractions": [1.0, 0.75, 0.5],
        "seed": 9, "epochs": 3, "qubits": 2
    })");
    REQUIRE(configs.size() == 21);
    for (const auto& c : configs) {
        CHECK(c.seed == 9);
        CHECK(c.epochs == 3);
        CHECK(c.feature_count() == 2);
        CHECK(c.dataset.synthetic->kind == data::SyntheticKind::annulus);
        CHECK(c.dataset.synthetic->n == 60);
    }
    CHECK(configs.front().dataset.descriptor() == configs.back().dataset.descriptor());

    const auto single = parse_configs(R"([{"dataset": {"path": "d/x.csv", "kind": "reveal"}, "model": "qsvm"}])",
                                      "/data");
    REQUIRE(single.size() == 1);
    CHECK(*single[0].dataset.path == std::filesystem::path("/data/d/x.csv"));
    CHECK(single[0].dataset.provenance == data::Provenance::reveal);
    CHECK(single[0].subsample_fraction == 1.0);
    CHECK(single[0].pca_components == 16);
    CHECK(single[0].dataset.descriptor() == "reveal:x.csv");
}

TEST_CASE("config errors name the field", "[bench][config]") {
    CHECK(field_of(R"({"model": "qnn"})") == "dataset");
    CHECK(field_of(R"({"dataset": {"path": "a.csv"}, "model": "qnn", "epoch": 3})") == "epoch");
    CHECK(field_of(R"({"dataset": {"path": "a.csv"}, "model": "perceptron"})") == "model");
    CHECK(field_of(R"({"dataset": {"path": "a.csv"}, "model": "qnn", "fraction": 0.3})") == "fraction");
    CHECK(field_of(R"({"dataset": {"path": "a.csv"}, "model": "qnn", "fraction": 0.3,
                       "allow_any_fraction": true})") == "<no error>");
    CHECK(field_of(R"({"dataset": {"synthetic": {"kind": "moons"}}, "model": "qnn"})") ==
          "dataset.synthetic.kind");
    CHECK(field_of(R"({"dataset": {"path": "a.csv"}, "model": "qnn", "learning_rate": 0})") == "learning_rate");
    CHECK(field_of(R"({"dataset": {"path": "a.csv"}, "model": "qnn", "epochs": "many"})") == "epochs");
    CHECK(field_of(R"({"dataset": {"path": "a.csv"}, "model": "qnn", "qubits": 24})").find("qubits") !=
          std::string::npos);
    CHECK(field_of(R"([{"dataset": {"path": "a.csv"}, "model": "qnn"}, {"model": "qsvm"}])").find("dataset") !=
          std::string::npos);
    CHECK_THROWS_AS(parse_configs("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_configs("[]"), ConfigError);
    CHECK_THROWS_AS(run_suite({}), ConfigError);
    CHECK_THROWS_AS(load_configs("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("classical SVM separates noiseless blobs", "[bench][run]") {
    const auto row = run_experiment(blobs_config(ModelKind::classical_svm));
    CHECK(row.accuracy == 100.0);
    CHECK_FALSE(row.parameters.has_value());
    CHECK(row.train_size + row.test_size == 40);
    CHECK(row.features == 2);
    CHECK(row.explained_variance == Catch::Approx(100.0));
    CHECK_FALSE(row.error.has_value());
    const std::string md = render_report({{row}}, ReportFormat::markdown);
    CHECK_THAT(md, ContainsSubstring("| Classical SVM | - | 100.00 |"));
}

TEST_CASE("reported parameter counts", "[bench][run]") {
    CHECK(vqc::count_parameters(vqc::VqcModel::create(16, 0)) == 32);
    auto qnn = blobs_config(ModelKind::qnn, 40, 0.3);
    qnn.dataset.synthetic->dim = 16;
    qnn.qubits = 16;
    qnn.epochs = 1;
    qnn.batch_size = 64;
    const auto row = run_experiment(qnn);
    CHECK(row.parameters == std::optional<std::size_t>{32});
    CHECK(row.features == 16);

    auto nn = blobs_config(ModelKind::classical_nn, 60, 0.3);
    nn.dataset.synthetic->dim = 16;
    nn.qubits = 16;
    CHECK(run_experiment(nn).parameters == std::optional<std::size_t>{177});
    nn.model = ModelKind::classical_nn_fair;
    CHECK(run_experiment(nn).parameters == std::optional<std::size_t>{73});
    nn.dataset.provenance = data::Provenance::reveal;
    const auto fair = run_experiment(nn);
    CHECK(fair.parameters == std::optional<std::size_t>{55});
    CHECK_THAT(fair.note, ContainsSubstring("51"));

    auto hybrid = blobs_config(ModelKind::hybrid_v1);
    hybrid.qubits = 1;
    CHECK(run_experiment(hybrid).parameters == std::optional<std::size_t>{2 + 13});
}

TEST_CASE("suite ordering, failures and determinism", "[bench][run]") {
    std::vector<ExperimentConfig> configs;
    for (ModelKind m : {ModelKind::classical_svm, ModelKind::qsvm, ModelKind::classical_nn, ModelKind::qnn}) {
        configs.push_back(blobs_config(m, 30, 0.2));
    }
    auto missing = blobs_config(ModelKind::classical_svm);
    missing.dataset.synthetic.reset();
    missing.dataset.path = "/nonexistent/data.csv";
    configs.push_back(missing);

    const auto report = run_suite(configs);
    REQUIRE(report.rows.size() == 5);
    CHECK(report.rows[0].model == "qnn");
    CHECK(report.rows[1].model == "classical_nn");
    CHECK(report.rows[2].model == "qsvm");
    CHECK(report.rows[3].model == "classical_svm");
    CHECK_FALSE(report.ok());
    REQUIRE(report.rows[4].error.has_value());
    CHECK(report.rows[4].error->rfind("load:", 0) == 0);

    const auto again = run_suite(configs);
    CHECK(zero_seconds(again) == zero_seconds(report));
    CHECK(render_report(zero_seconds(again), ReportFormat::json) ==
          render_report(zero_seconds(report), ReportFormat::json));

    auto wide = blobs_config(ModelKind::qsvm);
    wide.qubits = 30;
    const auto failed = run_suite({wide});
    REQUIRE(failed.rows.size() == 1);
    CHECK(failed.rows[0].error->rfind("config:", 0) == 0);
    CHECK_THAT(render_report(failed, ReportFormat::markdown), ContainsSubstring("| QSVM | - | failed | - |"));
}

TEST_CASE("report rendering", "[bench][report]") {
    ReportRow a;
    a.model = "qnn";
    a.display_name = "QNN";
    a.parameters = 32;
    a.accuracy = 100.0 * 2635.0 / 4999.0;
    a.seconds = 1234.5678;
    a.explained_variance = 87.654;
    a.seed = 5;
    a.dataset = "clamp:ClaMP_Integrated-5210.csv";
    a.fraction = 0.75;
    a.train_size = 2734;
    a.test_size = 1173;
    a.features = 16;
    ReportRow b = a;
    b.model = "classical_svm";
    b.display_name = "Classical SVM";
    b.parameters.reset();
    b.accuracy = 91.0;
    b.note = "check";
    const BenchmarkReport report{{a, b}};

    const std::string md = render_report(report, ReportFormat::markdown);
    CHECK_THAT(md, ContainsSubstring("### clamp:ClaMP_Integrated-5210.csv, fraction 0.75"));
    CHECK_THAT(md, ContainsSubstring("| Model | Parameters | Accuracy (%) | Time (s) |"));
    CHECK_THAT(md, ContainsSubstring("| QNN | 32 | 52.71 | 1234.57 |"));
    CHECK_THAT(md, ContainsSubstring("| Classical SVM | - | 91.00 |"));
    CHECK_THAT(md, ContainsSubstring("Train/test rows: 2734/1173"));
    CHECK_THAT(md, ContainsSubstring("- Classical SVM: check"));
    // Every table line has exactly four cells.
    const std::regex table_line(R"(^\|[^|]*\|[^|]*\|[^|]*\|[^|]*\|$)");
    std::istringstream lines(md);
    std::string line;
    int table_lines = 0;
    while (std::getline(lines, line)) {
        if (!line.empty() && line[0] == '|') {
            CHECK(std::regex_match(line, table_line));
            ++table_lines;
        }
    }
    CHECK(table_lines == 4);

    const std::string js = render_report(report, ReportFormat::json);
    const auto parsed = nlohmann::json::parse(js);
    CHECK(parsed["rows"][1]["parameters"].is_null());
    CHECK(parsed["rows"][0]["error"].is_null());
    CHECK(report_from_json(js) == report);
    CHECK(parse_format("md") == ReportFormat::markdown);
    CHECK_THROWS_AS(parse_format("csv"), std::invalid_argument);
}
