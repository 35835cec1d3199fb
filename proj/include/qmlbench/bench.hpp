#pragma once

// Config-driven experiment runner and report rendering.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qmlbench/datapipe.hpp"

namespace qmlbench::bench {

enum class ModelKind { qnn, hybrid_v1, hybrid_v2, classical_nn, classical_nn_fair, qsvm, classical_svm };

// Report row order.
inline constexpr std::array<ModelKind, 7> kAllModels{
    ModelKind::qnn,          ModelKind::hybrid_v1,         ModelKind::hybrid_v2,   ModelKind::classical_nn,
    ModelKind::classical_nn_fair, ModelKind::qsvm, ModelKind::classical_svm};

std::string_view model_key(ModelKind kind);
std::string_view display_name(ModelKind kind);
ModelKind parse_model(std::string_view key);
bool is_quantum(ModelKind kind);
bool is_svm(ModelKind kind);

// Thrown for schema problems; `field` is the offending JSON path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)), message_(message) {}
    const std::string& field() const { return field_; }
    const std::string& message() const { return message_; }

private:
    std::string field_;
    std::string message_;
};

// Thrown by run_experiment; `stage` names the pipeline step that failed.
class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string stage, const std::string& message)
        : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct SyntheticSource {
    data::SyntheticKind kind = data::SyntheticKind::blobs;
    std::size_t n = 200;
    double noise = 0.1;
    std::uint64_t seed = 0;
    std::size_t dim = 2;
};

struct DatasetSource {
    std::optional<std::filesystem::path> path;  // CSV input
    std::optional<SyntheticSource> synthetic;   // generated in memory
    std::string label_column = "label";
    data::Provenance provenance = data::Provenance::clamp;
    // Free-text column tokenized and embedded with fallback_embed.
    std::optional<std::string> text_column;
    std::size_t embedding_dim = 100;
    bool balance = false;

    std::string descriptor() const;
};

struct ExperimentConfig {
    DatasetSource dataset;
    ModelKind model = ModelKind::qnn;
    double subsample_fraction = 1.0;
    bool allow_any_fraction = false;
    double train_fraction = 0.7;
    std::uint64_t seed = 0;
    std::size_t pca_components = 16;  // 0 keeps the standardized features
    int epochs = 20;
    double learning_rate = 0.02;
    std::size_t batch_size = 32;
    std::size_t shots = 0;  // QSVM kernel; 0 = exact
    std::size_t feature_map_depth = 2;
    double svm_c = 1.0;
    std::optional<double> svm_gamma;  // default 1 / (d * variance)
    // Replaces pca_components for every model, so all rows of a suite see
    // the same features and the quantum models use this many data qubits.
    std::optional<std::size_t> qubits;

    std::size_t feature_count() const { return qubits.value_or(pca_components); }
    // Throws ConfigError.
    void validate() const;
};

struct ReportRow {
    std::string model;         // model key
    std::string display_name;  // table label
    std::optional<std::size_t> parameters;  // empty for SVMs
    double accuracy = 0.0;     // test accuracy in percent
    double seconds = 0.0;      // train + predict wall clock
    double explained_variance = 0.0;  // percent; 100 without PCA
    std::uint64_t seed = 0;
    std::string dataset;
    double fraction = 1.0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::size_t features = 0;
    std::string note;
    std::optional<std::string> error;  // set when the row failed

    bool operator==(const ReportRow&) const = default;
};

struct BenchmarkReport {
    std::vector<ReportRow> rows;

    bool ok() const;
    bool operator==(const BenchmarkReport&) const = default;
};

// A config file holds one experiment object or an array of them. An
// object may list "models" and "fractions" instead of "model" and
// "fraction"; it expands to their cross product. Relative dataset paths
// resolve against `base_dir`.
std::vector<ExperimentConfig> parse_configs(std::string_view json_text, const std::filesystem::path& base_dir = {});
std::vector<ExperimentConfig> load_configs(const std::filesystem::path& path);

// Loads and preprocesses once, then trains and evaluates the configured model.
ReportRow run_experiment(const ExperimentConfig& config);

// Sequential. Rows are grouped by config order and fraction, then sorted by
// model; failed experiments become rows with `error` set.
BenchmarkReport run_suite(const std::vector<ExperimentConfig>& configs);

enum class ReportFormat { json, markdown };
ReportFormat parse_format(std::string_view name);

std::string render_report(const BenchmarkReport& report, ReportFormat format);
BenchmarkReport report_from_json(std::string_view json_text);

}  // namespace qmlbench::bench
