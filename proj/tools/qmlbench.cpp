// qmlbench: run benchmark suites, generate synthetic data, validate configs.
//
// Exit codes: 0 success, 1 usage or config error, 2 pipeline failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qmlbench/bench.hpp"
#include "qmlbench/datapipe.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kPipeline = 2;

int run(const std::string& config_path, const std::string& out_path, const std::string& format_name) {
    using namespace qmlbench::bench;
    ReportFormat format;
    std::vector<ExperimentConfig> configs;
    try {
        format = parse_format(format_name);
        configs = load_configs(config_path);
    } catch (const std::exception& e) {
        std::cerr << "qmlbench: " << e.what() << '\n';
        return kUsage;
    }
    const BenchmarkReport report = run_suite(configs);
    const std::string text = render_report(report, format);
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        out << text;
        if (!out) {
            std::cerr << "qmlbench: cannot write " << out_path << '\n';
            return kPipeline;
        }
    }
    for (const auto& row : report.rows) {
        if (row.error) {
            std::cerr << "qmlbench: " << row.display_name << " failed: " << *row.error << '\n';
        }
    }
    return report.ok() ? kOk : kPipeline;
}

int gen(const std::string& kind_name, std::size_t n, double noise, std::uint64_t seed, std::size_t dim,
        const std::string& out_path) {
    using namespace qmlbench::data;
    Dataset ds;
    try {
        ds = generate_synthetic(parse_synthetic_kind(kind_name), n, noise, seed, dim);
    } catch (const std::invalid_argument& e) {
        std::cerr << "qmlbench: " << e.what() << '\n';
        return kUsage;
    }
    try {
        write_csv(ds, out_path);
    } catch (const std::exception& e) {
        std::cerr << "qmlbench: " << e.what() << '\n';
        return kPipeline;
    }
    return kOk;
}

int validate(const std::string& config_path) {
    try {
        const auto configs = qmlbench::bench::load_configs(config_path);
        std::cout << config_path << ": ok (" << configs.size() << " experiment"
                  << (configs.size() == 1 ? "" : "s") << ")\n";
        return kOk;
    } catch (const std::exception& e) {
        std::cerr << "qmlbench: " << e.what() << '\n';
        return kUsage;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum vs classical classifier benchmark"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string format = "markdown";
    auto* run_cmd = app.add_subcommand("run", "Run the experiments in a config file");
    run_cmd->add_option("--config", config_path, "JSON config file")->required();
    run_cmd->add_option("--out", out_path, "Write the report here instead of stdout");
    run_cmd->add_option("--format", format, "json or markdown")->check(CLI::IsMember({"json", "markdown"}));

    std::string kind;
    std::size_t n = 0;
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::size_t dim = 2;
    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("gen", "Write a synthetic dataset as CSV");
    gen_cmd->add_option("--kind", kind, "blobs or annulus")->required()->check(CLI::IsMember({"blobs", "annulus"}));
    gen_cmd->add_option("--n", n, "Number of rows")->required();
    gen_cmd->add_option("--noise", noise, "Gaussian noise scale")->required();
    gen_cmd->add_option("--seed", seed, "RNG seed")->required();
    gen_cmd->add_option("--dim", dim, "Feature columns (extra ones are nuisance)");
    gen_cmd->add_option("--out", gen_out, "Output CSV")->required();

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "Check a config file without running it");
    validate_cmd->add_option("--config", validate_path, "JSON config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    if (*run_cmd) {
        return run(config_path, out_path, format);
    }
    if (*gen_cmd) {
        return gen(kind, n, noise, seed, dim, gen_out);
    }
    return validate(validate_path);
}
