#pragma once

// Dataset ingestion and preprocessing: CSV loading, dummy encoding,
// train-only standardization and PCA, class balancing, stratified sampling
// and splitting, plus synthetic data and a hashed bag-of-tokens embedder.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qmlbench::data {

enum class Provenance { clamp, reveal, synthetic };

std::string_view provenance_name(Provenance p);

struct CategoricalColumn {
    std::string name;
    std::vector<std::string> values;  // one per row
};

struct Dataset {
    Eigen::MatrixXd features;               // numeric columns only
    std::vector<int> labels;                // 0 or 1
    std::vector<std::string> column_names;  // one per feature column
    std::vector<CategoricalColumn> categorical;
    Provenance provenance = Provenance::synthetic;

    std::size_t size() const { return labels.size(); }
    std::size_t count_label(int label) const;
    // Rows in the given order, categorical columns included.
    Dataset select(std::span<const std::size_t> rows) const;
    // Throws if row counts disagree, labels are not binary or a value is NaN.
    void validate() const;
};

// Header row required. A column is numeric when every cell parses as a
// finite decimal; any other column is kept as categorical. Quoted fields
// follow RFC 4180, including embedded newlines. Errors name the 1-based
// data row.
Dataset load_csv(const std::filesystem::path& path, std::string_view label_column,
                 Provenance provenance = Provenance::clamp);

void write_csv(const Dataset& dataset, const std::filesystem::path& path,
               std::string_view label_column = "label");

// k categories become k-1 indicator columns named "column=value"; the
// lexicographically first category is dropped.
Dataset one_hot_encode(Dataset dataset, std::string_view column);

struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;  // population standard deviation

    Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
};

Standardizer fit_standardizer(const Eigen::MatrixXd& train_rows);
Eigen::MatrixXd apply_standardizer(const Standardizer& standardizer, const Eigen::MatrixXd& rows);

struct PcaTransform {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;  // k x d, orthonormal rows
    Eigen::VectorXd explained_variance_ratio;

    std::size_t num_components() const { return static_cast<std::size_t>(components.rows()); }
    Eigen::MatrixXd transform(const Eigen::MatrixXd& rows) const;
    Eigen::MatrixXd inverse_transform(const Eigen::MatrixXd& reduced) const;
};

// Eigendecomposition of the training covariance. Each component's
// largest-magnitude loading is made positive.
PcaTransform pca_fit(const Eigen::MatrixXd& train_rows, std::size_t k = 16);
Eigen::MatrixXd pca_transform(const PcaTransform& pca, const Eigen::MatrixXd& rows);

// Undersamples the majority class without replacement to the minority count;
// the result is shuffled.
Dataset balance_classes(const Dataset& dataset, std::uint64_t seed);

// floor(N * fraction) rows, split across classes by largest remainder.
// Selected rows keep their original relative order.
Dataset stratified_subsample(const Dataset& dataset, double fraction, std::uint64_t seed);

struct SplitSpec {
    double train_fraction = 0.7;
    double subsample_fraction = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Stratified, disjoint, covering. Every class keeps at least one row on
// each side.
std::pair<Dataset, Dataset> train_test_split(const Dataset& dataset, const SplitSpec& spec);

// Per-class allocation used by the samplers: floor(total * fraction) rows
// in all, floor per class first, the remainder to the largest fractional
// parts (lower class index on ties).
std::vector<std::size_t> allocate_stratified(std::span<const std::size_t> class_sizes, double fraction);

std::vector<std::string> tokenize(std::string_view text);

struct Embedding {
    Eigen::MatrixXd vectors;              // one L2-normalized row per document
    std::vector<std::size_t> empty_rows;  // documents without tokens (zero rows)
};

// Hashed bag of tokens: each token adds +-1 at (hash mod dim).
Embedding fallback_embed(const std::vector<std::vector<std::string>>& documents, std::size_t dim = 100,
                         std::uint64_t seed = 0);

enum class SyntheticKind { blobs, annulus };

SyntheticKind parse_synthetic_kind(std::string_view name);
std::string_view synthetic_kind_name(SyntheticKind kind);

// blobs: two disks of radius 0.5 centred at (-1,-1) and (1,1).
// annulus: disk of radius 0.5 (label 0) inside a ring 1 <= r <= 1.5 (label 1).
// Both are shifted by noise * N(0, I). Columns beyond the first two are
// standard-normal nuisance features. Labels are balanced and rows shuffled.
Dataset generate_synthetic(SyntheticKind kind, std::size_t n, double noise, std::uint64_t seed,
                           std::size_t dim = 2);

}  // namespace qmlbench::data
