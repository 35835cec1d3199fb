#include "qmlbench/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "qmlbench/dense.hpp"
#include "qmlbench/encode.hpp"
#include "qmlbench/parallel.hpp"
#include "qmlbench/qkernel.hpp"
#include "qmlbench/random.hpp"
#include "qmlbench/svm.hpp"
#include "qmlbench/vqc.hpp"

namespace qmlbench::bench {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::string_view kFairNnNote =
    "ReVeal fair NN: the published 51-parameter topology cannot be rebuilt from 16 inputs; "
    "[16,3,1] (55 parameters) is used instead";

// Stream tags for derive_seed, one per consumer of the experiment seed.
enum SeedStream : std::uint64_t {
    kBalanceStream = 1,
    kSubsampleStream,
    kSplitStream,
    kEmbedStream,
    kModelInitStream,
    kTrainStream,
    kKernelStream,
};

// ---- config parsing ----

class Reader {
public:
    Reader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
        if (!object_.is_object()) {
            throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
        }
    }

    void allow(std::initializer_list<std::string_view> keys) const {
        for (const auto& [key, value] : object_.items()) {
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                throw ConfigError(field(key), "unknown key");
            }
        }
    }

    bool has(std::string_view key) const {
        const auto it = object_.find(key);
        return it != object_.end() && !it->is_null();
    }

    std::string field(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    const json& at(std::string_view key) const { return object_.at(key); }

    std::string string(std::string_view key) const {
        const json& v = at(key);
        if (!v.is_string()) {
            throw ConfigError(field(key), "expected a string");
        }
        return v.get<std::string>();
    }

    double number(std::string_view key) const {
        const json& v = at(key);
        if (!v.is_number()) {
            throw ConfigError(field(key), "expected a number");
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            throw ConfigError(field(key), "must be finite");
        }
        return d;
    }

    std::uint64_t unsigned_integer(std::string_view key) const {
        const json& v = at(key);
        if (!v.is_number_unsigned()) {
            throw ConfigError(field(key), "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    bool boolean(std::string_view key) const {
        const json& v = at(key);
        if (!v.is_boolean()) {
            throw ConfigError(field(key), "expected true or false");
        }
        return v.get<bool>();
    }

    template <typename T, typename Get>
    void optional_into(std::string_view key, T& out, Get get) const {
        if (has(key)) {
            out = static_cast<T>((this->*get)(key));
        }
    }

private:
    const json& object_;
    std::string path_;
};

data::Provenance parse_provenance(const std::string& name, const std::string& field) {
    if (name == "clamp") {
        return data::Provenance::clamp;
    }
    if (name == "reveal") {
        return data::Provenance::reveal;
    }
    if (name == "synthetic") {
        return data::Provenance::synthetic;
    }
    throw ConfigError(field, "unknown dataset kind '" + name + "' (expected clamp, reveal or synthetic)");
}

DatasetSource parse_dataset(const json& j, const std::filesystem::path& base_dir) {
    const Reader r(j, "dataset");
    r.allow({"path", "synthetic", "label_column", "kind", "text_column", "embedding_dim", "balance"});
    DatasetSource src;
    if (r.has("path")) {
        std::filesystem::path p = r.string("path");
        if (p.is_relative() && !base_dir.empty()) {
            p = base_dir / p;
        }
        src.path = p;
    }
    if (r.has("synthetic")) {
        const Reader s(r.at("synthetic"), "dataset.synthetic");
        s.allow({"kind", "n", "noise", "seed", "dim"});
        SyntheticSource syn;
        if (s.has("kind")) {
            try {
                syn.kind = data::parse_synthetic_kind(s.string("kind"));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(s.field("kind"), e.what());
            }
        }
        s.optional_into("n", syn.n, &Reader::unsigned_integer);
        s.optional_into("noise", syn.noise, &Reader::number);
        s.optional_into("seed", syn.seed, &Reader::unsigned_integer);
        s.optional_into("dim", syn.dim, &Reader::unsigned_integer);
        src.synthetic = syn;
        src.provenance = data::Provenance::synthetic;
    }
    r.optional_into("label_column", src.label_column, &Reader::string);
    if (r.has("kind")) {
        src.provenance = parse_provenance(r.string("kind"), r.field("kind"));
    }
    if (r.has("text_column")) {
        src.text_column = r.string("text_column");
    }
    r.optional_into("embedding_dim", src.embedding_dim, &Reader::unsigned_integer);
    r.optional_into("balance", src.balance, &Reader::boolean);
    return src;
}

template <typename T, typename Parse>
std::vector<T> one_or_many(const Reader& r, std::string_view single, std::string_view many, T fallback, Parse parse) {
    if (r.has(single) && r.has(many)) {
        throw ConfigError(r.field(many), "give either '" + std::string(single) + "' or '" + std::string(many) + "'");
    }
    if (r.has(single)) {
        return {parse(r.at(single), r.field(single))};
    }
    if (!r.has(many)) {
        return {fallback};
    }
    const json& list = r.at(many);
    if (!list.is_array() || list.empty()) {
        throw ConfigError(r.field(many), "expected a non-empty array");
    }
    std::vector<T> out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        out.push_back(parse(list[i], r.field(many) + "[" + std::to_string(i) + "]"));
    }
    return out;
}

std::vector<ExperimentConfig> parse_experiment(const json& j, const std::string& path,
                                               const std::filesystem::path& base_dir) {
    const Reader r(j, path);
    r.allow({"dataset", "model", "models", "fraction", "fractions", "allow_any_fraction", "train_fraction", "seed",
             "pca_components", "epochs", "learning_rate", "batch_size", "shots", "feature_map_depth", "svm_c",
             "svm_gamma", "qubits"});
    if (!r.has("dataset")) {
        throw ConfigError(r.field("dataset"), "missing");
    }
    ExperimentConfig base;
    try {
        base.dataset = parse_dataset(r.at("dataset"), base_dir);
    } catch (const ConfigError& e) {
        throw ConfigError(path.empty() ? e.field() : path + "." + e.field(), e.message());
    }
    r.optional_into("allow_any_fraction", base.allow_any_fraction, &Reader::boolean);
    r.optional_into("train_fraction", base.train_fraction, &Reader::number);
    r.optional_into("seed", base.seed, &Reader::unsigned_integer);
    r.optional_into("pca_components", base.pca_components, &Reader::unsigned_integer);
    if (r.has("epochs")) {
        const auto e = r.unsigned_integer("epochs");
        if (e > 1000000) {
            throw ConfigError(r.field("epochs"), "too large");
        }
        base.epochs = static_cast<int>(e);
    }
    r.optional_into("learning_rate", base.learning_rate, &Reader::number);
    r.optional_into("batch_size", base.batch_size, &Reader::unsigned_integer);
    r.optional_into("shots", base.shots, &Reader::unsigned_integer);
    r.optional_into("feature_map_depth", base.feature_map_depth, &Reader::unsigned_integer);
    r.optional_into("svm_c", base.svm_c, &Reader::number);
    if (r.has("svm_gamma")) {
        base.svm_gamma = r.number("svm_gamma");
    }
    if (r.has("qubits")) {
        base.qubits = static_cast<std::size_t>(r.unsigned_integer("qubits"));
    }

    const auto models = one_or_many<ModelKind>(r, "model", "models", ModelKind::qnn,
                                               [](const json& v, const std::string& field) {
                                                   if (!v.is_string()) {
                                                       throw ConfigError(field, "expected a model name");
                                                   }
                                                   try {
                                                       return parse_model(v.get<std::string>());
                                                   } catch (const std::invalid_argument& e) {
                                                       throw ConfigError(field, e.what());
                                                   }
                                               });
    if (!r.has("model") && !r.has("models")) {
        throw ConfigError(r.field("model"), "missing");
    }
    const auto fractions = one_or_many<double>(r, "fraction", "fractions", 1.0,
                                               [](const json& v, const std::string& field) {
                                                   if (!v.is_number()) {
                                                       throw ConfigError(field, "expected a number");
                                                   }
                                                   return v.get<double>();
                                               });
    std::vector<ExperimentConfig> out;
    for (double f : fractions) {
        for (ModelKind m : models) {
            ExperimentConfig c = base;
            c.model = m;
            c.subsample_fraction = f;
            try {
                c.validate();
            } catch (const ConfigError& e) {
                throw ConfigError(path.empty() ? e.field() : path + "." + e.field(), e.message());
            }
            out.push_back(std::move(c));
        }
    }
    return out;
}

// ---- pipeline ----

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(name, e.what());
    }
}

struct Prepared {
    Eigen::MatrixXd train;
    Eigen::MatrixXd test;
    std::vector<int> train_labels;  // -1/+1
    std::vector<int> test_labels;
    double explained_variance = 100.0;
};

std::vector<int> signed_labels(const std::vector<int>& labels) {
    std::vector<int> out;
    out.reserve(labels.size());
    for (int y : labels) {
        out.push_back(y == 1 ? 1 : -1);
    }
    return out;
}

data::Dataset load_source(const ExperimentConfig& config) {
    const DatasetSource& src = config.dataset;
    if (src.synthetic) {
        const auto& s = *src.synthetic;
        return data::generate_synthetic(s.kind, s.n, s.noise, s.seed, s.dim);
    }
    return data::load_csv(*src.path, src.label_column, src.provenance);
}

void embed_text(data::Dataset& ds, const std::string& column, std::size_t dim, std::uint64_t seed) {
    const auto it = std::find_if(ds.categorical.begin(), ds.categorical.end(),
                                 [&](const data::CategoricalColumn& c) { return c.name == column; });
    if (it == ds.categorical.end()) {
        throw std::runtime_error("text column '" + column + "' not found among non-numeric columns");
    }
    std::vector<std::vector<std::string>> docs;
    docs.reserve(it->values.size());
    for (const auto& text : it->values) {
        docs.push_back(data::tokenize(text));
    }
    const auto embedding = data::fallback_embed(docs, dim, seed);
    if (!embedding.empty_rows.empty()) {
        std::fprintf(stderr, "warning: %zu documents in '%s' have no tokens; embedded as zero vectors\n",
                     embedding.empty_rows.size(), column.c_str());
    }
    const Eigen::Index base = ds.features.cols();
    Eigen::MatrixXd widened(ds.features.rows(), base + embedding.vectors.cols());
    widened << ds.features, embedding.vectors;
    ds.features = std::move(widened);
    for (std::size_t i = 0; i < dim; ++i) {
        ds.column_names.push_back(column + "_" + std::to_string(i));
    }
    ds.categorical.erase(it);
}

Prepared prepare(const ExperimentConfig& config, ReportRow& row) {
    data::Dataset ds = stage("load", [&] { return load_source(config); });
    ds = stage("preprocess", [&] {
        if (config.dataset.text_column) {
            embed_text(ds, *config.dataset.text_column, config.dataset.embedding_dim,
                       derive_seed(config.seed, kEmbedStream));
        }
        std::vector<std::string> names;
        for (const auto& c : ds.categorical) {
            names.push_back(c.name);
        }
        for (const auto& name : names) {
            ds = data::one_hot_encode(std::move(ds), name);
        }
        ds.validate();
        if (config.dataset.balance) {
            ds = data::balance_classes(ds, derive_seed(config.seed, kBalanceStream));
        }
        return std::move(ds);
    });
    if (config.subsample_fraction < 1.0) {
        ds = stage("subsample", [&] {
            return data::stratified_subsample(ds, config.subsample_fraction,
                                              derive_seed(config.seed, kSubsampleStream));
        });
    }
    auto [train, test] = stage("split", [&] {
        data::SplitSpec spec;
        spec.train_fraction = config.train_fraction;
        spec.subsample_fraction = config.subsample_fraction;
        spec.seed = derive_seed(config.seed, kSplitStream);
        return data::train_test_split(ds, spec);
    });

    Prepared out;
    out.train_labels = signed_labels(train.labels);
    out.test_labels = signed_labels(test.labels);
    const auto standardizer = stage("standardize", [&] { return data::fit_standardizer(train.features); });
    out.train = standardizer.apply(train.features);
    out.test = standardizer.apply(test.features);
    const std::size_t k = config.feature_count();
    if (k > 0) {
        stage("pca", [&] {
            const auto pca = data::pca_fit(out.train, k);
            out.train = pca.transform(out.train);
            out.test = pca.transform(out.test);
            out.explained_variance = 100.0 * pca.explained_variance_ratio.sum();
            return 0;
        });
    }
    row.train_size = train.size();
    row.test_size = test.size();
    row.features = static_cast<std::size_t>(out.train.cols());
    row.explained_variance = out.explained_variance;
    return out;
}

double percent_correct(const std::vector<int>& predicted, const std::vector<int>& truth) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        hits += predicted[i] == truth[i];
    }
    return truth.empty() ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(truth.size());
}

TrainConfig train_config(const ExperimentConfig& config) {
    TrainConfig tc;
    tc.epochs = config.epochs;
    tc.learning_rate = config.learning_rate;
    tc.batch_size = config.batch_size;
    tc.seed = derive_seed(config.seed, kTrainStream);
    return tc;
}

std::vector<encode::EncodedSample> encode_rows(const Eigen::MatrixXd& rows, const encode::FeatureScaler& scaler) {
    std::vector<encode::EncodedSample> out;
    out.reserve(static_cast<std::size_t>(rows.rows()));
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        out.push_back(encode::angle_encode(rows.row(r).transpose(), scaler));
    }
    return out;
}

void check_width(std::size_t qubits) {
    if (qubits > sim::kMaxQubits) {
        throw std::invalid_argument("model needs " + std::to_string(qubits) + " qubits; the simulator supports " +
                                    std::to_string(sim::kMaxQubits));
    }
}

template <typename Model>
std::vector<int> predict_all(const Model& model, const std::vector<encode::EncodedSample>& samples) {
    std::vector<int> out(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) { out[i] = vqc::predict_class(model, samples[i]); });
    return out;
}

std::vector<int> train_and_predict(const ExperimentConfig& config, const Prepared& data, ReportRow& row) {
    const auto d = static_cast<std::size_t>(data.train.cols());
    const std::uint64_t init_seed = derive_seed(config.seed, kModelInitStream, static_cast<std::uint64_t>(config.model));
    switch (config.model) {
        case ModelKind::qnn:
        case ModelKind::hybrid_v1:
        case ModelKind::hybrid_v2: {
            check_width(d + 1);
            const auto scaler = encode::fit_feature_scaler(data.train);
            const auto train = encode_rows(data.train, scaler);
            const auto test = encode_rows(data.test, scaler);
            if (config.model == ModelKind::qnn) {
                auto [model, history] =
                    vqc::train(vqc::VqcModel::create(d, init_seed), train, data.train_labels, train_config(config));
                row.parameters = vqc::count_parameters(model);
                return predict_all(model, test);
            }
            const std::size_t hidden = config.model == ModelKind::hybrid_v1 ? 4 : 10;
            auto [model, history] = vqc::train(vqc::HybridModel::create(d, hidden, init_seed), train,
                                               data.train_labels, train_config(config));
            row.parameters = vqc::count_parameters(model);
            return predict_all(model, test);
        }
        case ModelKind::classical_nn:
        case ModelKind::classical_nn_fair: {
            std::vector<std::size_t> widths{d, 8, 4, 1};
            if (config.model == ModelKind::classical_nn_fair) {
                const bool reveal = config.dataset.provenance == data::Provenance::reveal;
                widths = {d, reveal ? std::size_t{3} : std::size_t{4}, 1};
                if (reveal) {
                    row.note = kFairNnNote;
                }
            }
            auto [net, history] = baseline::dense_train(baseline::DenseNetwork::initialized(widths, init_seed),
                                                        data.train, data.train_labels, train_config(config));
            row.parameters = baseline::count_parameters(net);
            std::vector<int> out(static_cast<std::size_t>(data.test.rows()));
            for (Eigen::Index r = 0; r < data.test.rows(); ++r) {
                out[static_cast<std::size_t>(r)] = baseline::predict_class(net, data.test.row(r).transpose());
            }
            return out;
        }
        case ModelKind::qsvm: {
            check_width(d);
            const auto scaler = encode::fit_feature_scaler(data.train);
            const Eigen::MatrixXd train = scaler.transform_rows(data.train);
            const Eigen::MatrixXd test = scaler.transform_rows(data.test);
            qkernel::FeatureMapSpec spec;
            spec.num_qubits = d;
            spec.depth = config.feature_map_depth;
            const qkernel::KernelMode mode{config.shots, derive_seed(config.seed, kKernelStream)};
            const auto gram = qkernel::kernel_matrix(train, spec, mode);
            baseline::SvmParams params;
            params.c = config.svm_c;
            const auto model = baseline::svm_train(gram.values, data.train_labels, params);
            const Eigen::MatrixXd cross = qkernel::cross_kernel(test, train, spec, mode);
            std::vector<int> out(static_cast<std::size_t>(test.rows()));
            std::vector<double> krow(static_cast<std::size_t>(train.rows()));
            for (Eigen::Index r = 0; r < cross.rows(); ++r) {
                Eigen::VectorXd::Map(krow.data(), cross.cols()) = cross.row(r).transpose();
                out[static_cast<std::size_t>(r)] = baseline::svm_predict_row(model, krow);
            }
            return out;
        }
        case ModelKind::classical_svm: {
            const double gamma = config.svm_gamma.value_or(baseline::default_rbf_gamma(data.train));
            baseline::SvmParams params;
            params.c = config.svm_c;
            const auto model =
                baseline::svm_train(data.train, data.train_labels, baseline::RbfKernel{gamma}, params);
            std::vector<int> out(static_cast<std::size_t>(data.test.rows()));
            for (Eigen::Index r = 0; r < data.test.rows(); ++r) {
                out[static_cast<std::size_t>(r)] = baseline::svm_predict(model, data.test.row(r).transpose());
            }
            return out;
        }
    }
    throw std::logic_error("unhandled model kind");
}

ReportRow row_skeleton(const ExperimentConfig& config) {
    ReportRow row;
    row.model = model_key(config.model);
    row.display_name = display_name(config.model);
    row.seed = config.seed;
    row.dataset = config.dataset.descriptor();
    row.fraction = config.subsample_fraction;
    return row;
}

// ---- rendering ----

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fraction_text(double f) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", f);
    return buf;
}

ordered_json row_to_json(const ReportRow& row) {
    ordered_json j;
    j["model"] = row.model;
    j["display_name"] = row.display_name;
    j["parameters"] = row.parameters ? ordered_json(*row.parameters) : ordered_json(nullptr);
    j["accuracy"] = row.accuracy;
    j["seconds"] = row.seconds;
    j["explained_variance"] = row.explained_variance;
    j["seed"] = row.seed;
    j["dataset"] = row.dataset;
    j["fraction"] = row.fraction;
    j["train_size"] = row.train_size;
    j["test_size"] = row.test_size;
    j["features"] = row.features;
    j["note"] = row.note;
    j["error"] = row.error ? ordered_json(*row.error) : ordered_json(nullptr);
    return j;
}

std::string render_markdown(const BenchmarkReport& report) {
    std::ostringstream out;
    std::size_t i = 0;
    bool first_group = true;
    while (i < report.rows.size()) {
        const ReportRow& head = report.rows[i];
        std::size_t end = i;
        while (end < report.rows.size() && report.rows[end].dataset == head.dataset &&
               report.rows[end].fraction == head.fraction && report.rows[end].seed == head.seed) {
            ++end;
        }
        if (!first_group) {
            out << '\n';
        }
        first_group = false;
        out << "### " << head.dataset << ", fraction " << fraction_text(head.fraction) << "\n\n";
        out << "| Model | Parameters | Accuracy (%) | Time (s) |\n";
        out << "|---|---:|---:|---:|\n";
        std::vector<std::string> notes;
        const ReportRow* meta = nullptr;
        for (std::size_t k = i; k < end; ++k) {
            const ReportRow& r = report.rows[k];
            const std::string params = r.parameters ? std::to_string(*r.parameters) : "-";
            if (r.error) {
                out << "| " << r.display_name << " | " << params << " | failed | - |\n";
                notes.push_back(r.display_name + " failed: " + *r.error);
                continue;
            }
            if (!meta) {
                meta = &r;
            }
            out << "| " << r.display_name << " | " << params << " | " << fixed2(r.accuracy) << " | "
                << fixed2(r.seconds) << " |\n";
            if (!r.note.empty()) {
                notes.push_back(r.display_name + ": " + r.note);
            }
        }
        out << '\n';
        if (meta) {
            out << "Train/test rows: " << meta->train_size << "/" << meta->test_size << ". Features: "
                << meta->features << ". PCA explained variance: " << fixed2(meta->explained_variance)
                << "%. Seed: " << meta->seed << ".\n";
        } else {
            out << "Seed: " << head.seed << ".\n";
        }
        for (const auto& note : notes) {
            out << "\n- " << note;
        }
        if (!notes.empty()) {
            out << '\n';
        }
        i = end;
    }
    return out.str();
}

}  // namespace

std::string_view model_key(ModelKind kind) {
    switch (kind) {
        case ModelKind::qnn: return "qnn";
        case ModelKind::hybrid_v1: return "hybrid_v1";
        case ModelKind::hybrid_v2: return "hybrid_v2";
        case ModelKind::classical_nn: return "classical_nn";
        case ModelKind::classical_nn_fair: return "classical_nn_fair";
        case ModelKind::qsvm: return "qsvm";
        case ModelKind::classical_svm: return "classical_svm";
    }
    return "?";
}

std::string_view display_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::qnn: return "QNN";
        case ModelKind::hybrid_v1: return "Hybrid-QNN_V1";
        case ModelKind::hybrid_v2: return "Hybrid-QNN_V2";
        case ModelKind::classical_nn: return "Classical NN";
        case ModelKind::classical_nn_fair: return "Classical NN-Fair";
        case ModelKind::qsvm: return "QSVM";
        case ModelKind::classical_svm: return "Classical SVM";
    }
    return "?";
}

ModelKind parse_model(std::string_view key) {
    for (ModelKind m : kAllModels) {
        if (model_key(m) == key) {
            return m;
        }
    }
    throw std::invalid_argument("unknown model '" + std::string(key) +
                                "' (expected qnn, hybrid_v1, hybrid_v2, classical_nn, classical_nn_fair, qsvm "
                                "or classical_svm)");
}

bool is_quantum(ModelKind kind) {
    return kind == ModelKind::qnn || kind == ModelKind::hybrid_v1 || kind == ModelKind::hybrid_v2 ||
           kind == ModelKind::qsvm;
}

bool is_svm(ModelKind kind) { return kind == ModelKind::qsvm || kind == ModelKind::classical_svm; }

std::string DatasetSource::descriptor() const {
    if (synthetic) {
        std::ostringstream out;
        out << "synthetic:" << data::synthetic_kind_name(synthetic->kind) << "(n=" << synthetic->n
            << ",noise=" << synthetic->noise << ",seed=" << synthetic->seed << ",dim=" << synthetic->dim << ")";
        return out.str();
    }
    return std::string(data::provenance_name(provenance)) + ":" + (path ? path->filename().string() : "?");
}

void ExperimentConfig::validate() const {
    if (dataset.path.has_value() == dataset.synthetic.has_value()) {
        throw ConfigError("dataset", "give exactly one of 'path' and 'synthetic'");
    }
    if (dataset.synthetic) {
        if (dataset.synthetic->n < 4) {
            throw ConfigError("dataset.synthetic.n", "must be >= 4");
        }
        if (dataset.synthetic->dim < 2) {
            throw ConfigError("dataset.synthetic.dim", "must be >= 2");
        }
        if (dataset.synthetic->noise < 0.0) {
            throw ConfigError("dataset.synthetic.noise", "must be >= 0");
        }
    }
    if (dataset.label_column.empty()) {
        throw ConfigError("dataset.label_column", "must not be empty");
    }
    if (dataset.embedding_dim == 0) {
        throw ConfigError("dataset.embedding_dim", "must be >= 1");
    }
    if (allow_any_fraction) {
        if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0)) {
            throw ConfigError("fraction", "must lie in (0, 1]");
        }
    } else if (subsample_fraction != 1.0 && subsample_fraction != 0.75 && subsample_fraction != 0.5) {
        throw ConfigError("fraction", "must be 1.0, 0.75 or 0.5 (set allow_any_fraction to override)");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train_fraction", "must lie in (0, 1)");
    }
    if (epochs < 1) {
        throw ConfigError("epochs", "must be >= 1");
    }
    if (!(learning_rate > 0.0)) {
        throw ConfigError("learning_rate", "must be > 0");
    }
    if (batch_size == 0) {
        throw ConfigError("batch_size", "must be >= 1");
    }
    if (feature_map_depth == 0) {
        throw ConfigError("feature_map_depth", "must be >= 1");
    }
    if (!(svm_c > 0.0)) {
        throw ConfigError("svm_c", "must be > 0");
    }
    if (svm_gamma && !(*svm_gamma > 0.0)) {
        throw ConfigError("svm_gamma", "must be > 0");
    }
    if (qubits && *qubits == 0) {
        throw ConfigError("qubits", "must be >= 1");
    }
    const std::size_t width = feature_count() + (model == ModelKind::qsvm ? 0 : 1);
    if (is_quantum(model) && feature_count() > 0 && width > sim::kMaxQubits) {
        throw ConfigError(qubits ? "qubits" : "pca_components",
                          "needs " + std::to_string(width) + " qubits; at most " + std::to_string(sim::kMaxQubits) +
                              " are supported");
    }
}

bool BenchmarkReport::ok() const {
    return std::none_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.error.has_value(); });
}

std::vector<ExperimentConfig> parse_configs(std::string_view json_text, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    std::vector<ExperimentConfig> out;
    if (root.is_array()) {
        if (root.empty()) {
            throw ConfigError("<root>", "empty experiment list");
        }
        for (std::size_t i = 0; i < root.size(); ++i) {
            auto expanded = parse_experiment(root[i], "[" + std::to_string(i) + "]", base_dir);
            out.insert(out.end(), expanded.begin(), expanded.end());
        }
    } else {
        out = parse_experiment(root, "", base_dir);
    }
    return out;
}

std::vector<ExperimentConfig> load_configs(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("<file>", "cannot open " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_configs(text.str(), path.parent_path());
}

ReportRow run_experiment(const ExperimentConfig& config) {
    try {
        config.validate();
    } catch (const ConfigError& e) {
        throw PipelineError("config", e.what());
    }
    ReportRow row = row_skeleton(config);
    const Prepared prepared = prepare(config, row);
    // Timed window: model construction, encoding, kernel matrices, training
    // and prediction. Loading and preprocessing are excluded.
    const auto start = std::chrono::steady_clock::now();
    const auto predicted = stage("train", [&] { return train_and_predict(config, prepared, row); });
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    row.accuracy = percent_correct(predicted, prepared.test_labels);
    return row;
}

BenchmarkReport run_suite(const std::vector<ExperimentConfig>& configs) {
    if (configs.empty()) {
        throw ConfigError("<root>", "no experiments to run");
    }
    // Stable grouping: first appearance of (dataset, fraction, seed), then model order.
    std::vector<std::size_t> group(configs.size());
    std::vector<std::tuple<std::string, double, std::uint64_t>> keys;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto key = std::make_tuple(configs[i].dataset.descriptor(), configs[i].subsample_fraction, configs[i].seed);
        const auto it = std::find(keys.begin(), keys.end(), key);
        group[i] = static_cast<std::size_t>(it - keys.begin());
        if (it == keys.end()) {
            keys.push_back(key);
        }
    }
    std::vector<std::size_t> order(configs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::make_pair(group[a], static_cast<int>(configs[a].model)) <
               std::make_pair(group[b], static_cast<int>(configs[b].model));
    });
    BenchmarkReport report;
    for (std::size_t idx : order) {
        try {
            report.rows.push_back(run_experiment(configs[idx]));
        } catch (const std::exception& e) {
            ReportRow row = row_skeleton(configs[idx]);
            row.error = e.what();
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

ReportFormat parse_format(std::string_view name) {
    if (name == "json") {
        return ReportFormat::json;
    }
    if (name == "markdown" || name == "md") {
        return ReportFormat::markdown;
    }
    throw std::invalid_argument("unknown format '" + std::string(name) + "' (expected json or markdown)");
}

std::string render_report(const BenchmarkReport& report, ReportFormat format) {
    if (format == ReportFormat::markdown) {
        return render_markdown(report);
    }
    ordered_json root;
    root["rows"] = ordered_json::array();
    for (const auto& row : report.rows) {
        root["rows"].push_back(row_to_json(row));
    }
    return root.dump(2) + "\n";
}

BenchmarkReport report_from_json(std::string_view json_text) {
    const json root = json::parse(json_text);
    BenchmarkReport report;
    for (const auto& j : root.at("rows")) {
        ReportRow row;
        row.model = j.at("model").get<std::string>();
        row.display_name = j.at("display_name").get<std::string>();
        if (!j.at("parameters").is_null()) {
            row.parameters = j.at("parameters").get<std::size_t>();
        }
        row.accuracy = j.at("accuracy").get<double>();
        row.seconds = j.at("seconds").get<double>();
        row.explained_variance = j.at("explained_variance").get<double>();
        row.seed = j.at("seed").get<std::uint64_t>();
        row.dataset = j.at("dataset").get<std::string>();
        row.fraction = j.at("fraction").get<double>();
        row.train_size = j.at("train_size").get<std::size_t>();
        row.test_size = j.at("test_size").get<std::size_t>();
        row.features = j.at("features").get<std::size_t>();
        row.note = j.at("note").get<std::string>();
        if (!j.at("error").is_null()) {
            row.error = j.at("error").get<std::string>();
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace qmlbench::bench
