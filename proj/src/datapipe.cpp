#include "qmlbench/datapipe.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qmlbench/random.hpp"

namespace qmlbench::data {

namespace {

using Table = std::vector<std::vector<std::string>>;

Table parse_csv(std::istream& in) {
    Table rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    char ch;
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        if (!(row.size() == 1 && row[0].empty())) {
            rows.push_back(std::move(row));
        }
        row.clear();
    };
    while (in.get(ch)) {
        if (quoted) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get(ch);
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        if (ch == '"' && !field_started) {
            quoted = true;
            field_started = true;
        } else if (ch == ',') {
            end_field();
        } else if (ch == '\n') {
            end_row();
        } else if (ch == '\r') {
            // CRLF line endings
        } else {
            field.push_back(ch);
            field_started = true;
        }
    }
    if (quoted) {
        throw std::runtime_error("unterminated quoted field at end of file");
    }
    if (field_started || !row.empty()) {
        end_row();
    }
    return rows;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t");
    return std::string(s.substr(first, last - first + 1));
}

enum class CellKind { number, non_finite, text, empty };

CellKind classify(const std::string& raw, double& value) {
    const std::string cell = trim(raw);
    if (cell.empty()) {
        return CellKind::empty;
    }
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    if (*begin == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        return CellKind::text;
    }
    return std::isfinite(value) ? CellKind::number : CellKind::non_finite;
}

std::string quote_csv(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

std::vector<std::vector<std::size_t>> indices_by_class(const Dataset& dataset) {
    std::vector<std::vector<std::size_t>> by_class(2);
    for (std::size_t i = 0; i < dataset.labels.size(); ++i) {
        by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(i);
    }
    return by_class;
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::string_view provenance_name(Provenance p) {
    switch (p) {
        case Provenance::clamp: return "clamp";
        case Provenance::reveal: return "reveal";
        case Provenance::synthetic: return "synthetic";
    }
    return "?";
}

std::size_t Dataset::count_label(int label) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

Dataset Dataset::select(std::span<const std::size_t> rows) const {
    Dataset out;
    out.provenance = provenance;
    out.column_names = column_names;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    out.labels.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] >= size()) {
            throw std::out_of_range("row index out of range");
        }
        out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(rows[r]));
        out.labels.push_back(labels[rows[r]]);
    }
    for (const auto& column : categorical) {
        CategoricalColumn c{column.name, {}};
        c.values.reserve(rows.size());
        for (std::size_t r : rows) {
            c.values.push_back(column.values[r]);
        }
        out.categorical.push_back(std::move(c));
    }
    return out;
}

void Dataset::validate() const {
    if (static_cast<std::size_t>(features.rows()) != labels.size()) {
        throw std::invalid_argument("feature rows and labels differ in count");
    }
    if (static_cast<std::size_t>(features.cols()) != column_names.size()) {
        throw std::invalid_argument("feature columns and column names differ in count");
    }
    for (const auto& c : categorical) {
        if (c.values.size() != labels.size()) {
            throw std::invalid_argument("categorical column '" + c.name + "' has the wrong length");
        }
    }
    for (int y : labels) {
        if (y != 0 && y != 1) {
            throw std::invalid_argument("labels must be 0 or 1");
        }
    }
    if (features.hasNaN()) {
        throw std::invalid_argument("features contain NaN");
    }
}

Dataset load_csv(const std::filesystem::path& path, std::string_view label_column, Provenance provenance) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    Table table = parse_csv(in);
    if (table.empty()) {
        throw std::runtime_error(path.string() + ": missing header row");
    }
    std::vector<std::string> header;
    for (const auto& h : table.front()) {
        header.push_back(trim(h));
    }
    const auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end()) {
        throw std::runtime_error(path.string() + ": label column '" + std::string(label_column) + "' not found");
    }
    const auto label_index = static_cast<std::size_t>(label_it - header.begin());
    const std::size_t rows = table.size() - 1;
    const std::size_t cols = header.size();

    Dataset ds;
    ds.provenance = provenance;
    ds.labels.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& row = table[r + 1];
        if (row.size() != cols) {
            throw std::runtime_error(path.string() + ": row " + std::to_string(r + 1) + " has " +
                                     std::to_string(row.size()) + " fields, expected " + std::to_string(cols));
        }
        double v = 0.0;
        if (classify(row[label_index], v) != CellKind::number || (v != 0.0 && v != 1.0)) {
            throw std::runtime_error(path.string() + ": row " + std::to_string(r + 1) + " has label '" +
                                     row[label_index] + "', expected 0 or 1");
        }
        ds.labels[r] = static_cast<int>(v);
    }

    std::vector<std::vector<double>> numeric;
    for (std::size_t c = 0; c < cols; ++c) {
        if (c == label_index) {
            continue;
        }
        std::vector<double> values(rows);
        std::size_t text_cells = 0;
        std::ptrdiff_t first_empty = -1;
        for (std::size_t r = 0; r < rows; ++r) {
            switch (classify(table[r + 1][c], values[r])) {
                case CellKind::number: break;
                case CellKind::non_finite:
                    throw std::runtime_error(path.string() + ": row " + std::to_string(r + 1) + " column '" +
                                             header[c] + "' is not finite");
                case CellKind::text: ++text_cells; break;
                case CellKind::empty:
                    if (first_empty < 0) {
                        first_empty = static_cast<std::ptrdiff_t>(r);
                    }
                    break;
            }
        }
        if (text_cells == 0 && first_empty >= 0) {
            throw std::runtime_error(path.string() + ": row " + std::to_string(first_empty + 1) +
                                     " has no value in numeric column '" + header[c] + "'");
        }
        if (text_cells == 0) {
            numeric.push_back(std::move(values));
            ds.column_names.push_back(header[c]);
        } else {
            CategoricalColumn cat{header[c], {}};
            cat.values.reserve(rows);
            for (std::size_t r = 0; r < rows; ++r) {
                cat.values.push_back(trim(table[r + 1][c]));
            }
            ds.categorical.push_back(std::move(cat));
        }
    }
    ds.features.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(numeric.size()));
    for (std::size_t c = 0; c < numeric.size(); ++c) {
        for (std::size_t r = 0; r < rows; ++r) {
            ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = numeric[c][r];
        }
    }
    return ds;
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path, std::string_view label_column) {
    dataset.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    std::vector<std::string> header = dataset.column_names;
    for (const auto& c : dataset.categorical) {
        header.push_back(c.name);
    }
    header.emplace_back(label_column);
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << (i ? "," : "") << quote_csv(header[i]);
    }
    out << '\n';
    char buf[32];
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        for (Eigen::Index c = 0; c < dataset.features.cols(); ++c) {
            const auto res = std::to_chars(buf, buf + sizeof(buf),
                                           dataset.features(static_cast<Eigen::Index>(r), c));
            out << (c ? "," : "") << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        }
        bool first = dataset.features.cols() == 0;
        for (const auto& cat : dataset.categorical) {
            out << (first ? "" : ",") << quote_csv(cat.values[r]);
            first = false;
        }
        out << (first ? "" : ",") << dataset.labels[r] << '\n';
    }
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

Dataset one_hot_encode(Dataset dataset, std::string_view column) {
    const auto it = std::find_if(dataset.categorical.begin(), dataset.categorical.end(),
                                 [&](const CategoricalColumn& c) { return c.name == column; });
    if (it == dataset.categorical.end()) {
        throw std::invalid_argument("categorical column '" + std::string(column) + "' not found");
    }
    const std::set<std::string> distinct(it->values.begin(), it->values.end());
    if (distinct.size() < 2) {
        throw std::invalid_argument("column '" + std::string(column) + "' has fewer than two categories");
    }
    // std::set iterates lexicographically; skip the first category.
    std::map<std::string, Eigen::Index> slot;
    const Eigen::Index base = dataset.features.cols();
    Eigen::Index next = base;
    for (auto c = std::next(distinct.begin()); c != distinct.end(); ++c) {
        slot[*c] = next++;
        dataset.column_names.push_back(it->name + "=" + *c);
    }
    Eigen::MatrixXd widened = Eigen::MatrixXd::Zero(dataset.features.rows(), next);
    widened.leftCols(base) = dataset.features;
    for (std::size_t r = 0; r < it->values.size(); ++r) {
        if (const auto s = slot.find(it->values[r]); s != slot.end()) {
            widened(static_cast<Eigen::Index>(r), s->second) = 1.0;
        }
    }
    dataset.features = std::move(widened);
    dataset.categorical.erase(it);
    return dataset;
}

Standardizer fit_standardizer(const Eigen::MatrixXd& train_rows) {
    if (train_rows.rows() == 0) {
        throw std::invalid_argument("cannot fit a standardizer on zero rows");
    }
    Standardizer s;
    s.mean = train_rows.colwise().mean().transpose();
    const Eigen::MatrixXd centered = train_rows.rowwise() - s.mean.transpose();
    s.stddev = (centered.array().square().colwise().sum() / static_cast<double>(train_rows.rows()))
                   .sqrt()
                   .transpose();
    return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& rows) const {
    if (rows.cols() != mean.size()) {
        throw std::invalid_argument("standardizer fitted on " + std::to_string(mean.size()) +
                                    " columns, got " + std::to_string(rows.cols()));
    }
    Eigen::MatrixXd out = rows.rowwise() - mean.transpose();
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        if (stddev(c) > 0.0) {
            out.col(c) /= stddev(c);
        } else {
            out.col(c).setZero();
        }
    }
    return out;
}

Eigen::MatrixXd apply_standardizer(const Standardizer& standardizer, const Eigen::MatrixXd& rows) {
    return standardizer.apply(rows);
}

PcaTransform pca_fit(const Eigen::MatrixXd& train_rows, std::size_t k) {
    const auto n = static_cast<std::size_t>(train_rows.rows());
    const auto d = static_cast<std::size_t>(train_rows.cols());
    if (k == 0 || n < 2 || k > std::min(n - 1, d)) {
        throw std::invalid_argument("PCA with " + std::to_string(k) + " components needs k <= min(rows - 1, columns) = " +
                                    std::to_string(n < 1 ? 0 : std::min(n - 1, d)));
    }
    PcaTransform pca;
    pca.mean = train_rows.colwise().mean().transpose();
    const Eigen::MatrixXd centered = train_rows.rowwise() - pca.mean.transpose();
    const Eigen::MatrixXd covariance = centered.transpose() * centered / static_cast<double>(n - 1);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("PCA eigendecomposition failed");
    }
    // Eigen returns ascending eigenvalues.
    const Eigen::VectorXd eigenvalues = solver.eigenvalues().cwiseMax(0.0);
    const double total = eigenvalues.sum();
    pca.components.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
    pca.explained_variance_ratio.resize(static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < k; ++c) {
        const auto src = static_cast<Eigen::Index>(d - 1 - c);
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) {
            v = -v;
        }
        pca.components.row(static_cast<Eigen::Index>(c)) = v.transpose();
        pca.explained_variance_ratio(static_cast<Eigen::Index>(c)) = total > 0.0 ? eigenvalues(src) / total : 0.0;
    }
    return pca;
}

Eigen::MatrixXd PcaTransform::transform(const Eigen::MatrixXd& rows) const {
    if (rows.cols() != mean.size()) {
        throw std::invalid_argument("PCA fitted on " + std::to_string(mean.size()) + " columns, got " +
                                    std::to_string(rows.cols()));
    }
    return (rows.rowwise() - mean.transpose()) * components.transpose();
}

Eigen::MatrixXd PcaTransform::inverse_transform(const Eigen::MatrixXd& reduced) const {
    if (reduced.cols() != components.rows()) {
        throw std::invalid_argument("reduced rows have the wrong width");
    }
    return (reduced * components).rowwise() + mean.transpose();
}

Eigen::MatrixXd pca_transform(const PcaTransform& pca, const Eigen::MatrixXd& rows) {
    return pca.transform(rows);
}

Dataset balance_classes(const Dataset& dataset, std::uint64_t seed) {
    auto by_class = indices_by_class(dataset);
    if (by_class[0].empty() || by_class[1].empty()) {
        throw std::invalid_argument("balance_classes needs both classes present");
    }
    const std::size_t minority = std::min(by_class[0].size(), by_class[1].size());
    Rng rng(seed);
    std::vector<std::size_t> keep;
    for (auto& members : by_class) {
        shuffle(members, rng);
        keep.insert(keep.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(minority));
    }
    shuffle(keep, rng);
    return dataset.select(keep);
}

std::vector<std::size_t> allocate_stratified(std::span<const std::size_t> class_sizes, double fraction) {
    constexpr double kSlack = 1e-9;
    const std::size_t total = std::accumulate(class_sizes.begin(), class_sizes.end(), std::size_t{0});
    const auto target = static_cast<std::size_t>(std::floor(static_cast<double>(total) * fraction + kSlack));
    std::vector<std::size_t> counts(class_sizes.size());
    std::vector<double> remainders(class_sizes.size());
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < class_sizes.size(); ++c) {
        const double exact = static_cast<double>(class_sizes[c]) * fraction;
        counts[c] = std::min(class_sizes[c], static_cast<std::size_t>(std::floor(exact + kSlack)));
        remainders[c] = exact - static_cast<double>(counts[c]);
        assigned += counts[c];
    }
    std::vector<std::size_t> order(class_sizes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
    for (std::size_t k = 0; assigned < target && k < order.size(); ++k) {
        if (counts[order[k]] < class_sizes[order[k]]) {
            ++counts[order[k]];
            ++assigned;
        }
    }
    return counts;
}

Dataset stratified_subsample(const Dataset& dataset, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("subsample fraction must lie in (0, 1]");
    }
    auto by_class = indices_by_class(dataset);
    const std::vector<std::size_t> sizes{by_class[0].size(), by_class[1].size()};
    const auto counts = allocate_stratified(sizes, fraction);
    Rng rng(seed);
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        shuffle(by_class[c], rng);
        keep.insert(keep.end(), by_class[c].begin(), by_class[c].begin() + static_cast<std::ptrdiff_t>(counts[c]));
    }
    std::sort(keep.begin(), keep.end());
    return dataset.select(keep);
}

void SplitSpec::validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("train_fraction must lie in (0, 1)");
    }
    if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0)) {
        throw std::invalid_argument("subsample_fraction must lie in (0, 1]");
    }
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& dataset, const SplitSpec& spec) {
    spec.validate();
    auto by_class = indices_by_class(dataset);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (by_class[c].size() < 2) {
            throw std::invalid_argument("class " + std::to_string(c) + " has fewer than two rows");
        }
    }
    const std::vector<std::size_t> sizes{by_class[0].size(), by_class[1].size()};
    auto counts = allocate_stratified(sizes, spec.train_fraction);
    for (std::size_t c = 0; c < counts.size(); ++c) {
        counts[c] = std::clamp<std::size_t>(counts[c], 1, sizes[c] - 1);
    }
    Rng rng(derive_seed(spec.seed, 0x7e57));
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        shuffle(by_class[c], rng);
        const auto cut = by_class[c].begin() + static_cast<std::ptrdiff_t>(counts[c]);
        train.insert(train.end(), by_class[c].begin(), cut);
        test.insert(test.end(), cut, by_class[c].end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {dataset.select(train), dataset.select(test)};
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string word;
    auto flush = [&] {
        if (!word.empty()) {
            tokens.push_back(std::move(word));
            word.clear();
        }
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || ch == '_') {
            word.push_back(ch);
        } else {
            flush();
            if (!std::isspace(c)) {
                tokens.emplace_back(1, ch);
            }
        }
    }
    flush();
    return tokens;
}

Embedding fallback_embed(const std::vector<std::vector<std::string>>& documents, std::size_t dim,
                         std::uint64_t seed) {
    if (dim == 0) {
        throw std::invalid_argument("embedding dimension must be >= 1");
    }
    Embedding out;
    out.vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(documents.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < documents.size(); ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        for (const auto& token : documents[r]) {
            const std::uint64_t h = mix64(fnv1a(token) ^ mix64(seed));
            const auto col = static_cast<Eigen::Index>(h % dim);
            out.vectors(row, col) += (h >> 63) ? -1.0 : 1.0;
        }
        const double norm = out.vectors.row(row).norm();
        if (norm > 0.0) {
            out.vectors.row(row) /= norm;
        } else {
            out.empty_rows.push_back(r);
        }
    }
    return out;
}

SyntheticKind parse_synthetic_kind(std::string_view name) {
    if (name == "blobs") {
        return SyntheticKind::blobs;
    }
    if (name == "annulus") {
        return SyntheticKind::annulus;
    }
    throw std::invalid_argument("unknown synthetic kind '" + std::string(name) + "' (expected blobs or annulus)");
}

std::string_view synthetic_kind_name(SyntheticKind kind) {
    return kind == SyntheticKind::blobs ? "blobs" : "annulus";
}

Dataset generate_synthetic(SyntheticKind kind, std::size_t n, double noise, std::uint64_t seed, std::size_t dim) {
    if (n < 4) {
        throw std::invalid_argument("synthetic datasets need n >= 4");
    }
    if (!(noise >= 0.0) || !std::isfinite(noise)) {
        throw std::invalid_argument("noise must be finite and non-negative");
    }
    if (dim < 2) {
        throw std::invalid_argument("synthetic datasets need dim >= 2");
    }
    Rng rng(seed);
    Dataset ds;
    ds.provenance = Provenance::synthetic;
    ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    ds.labels.resize(n);
    for (std::size_t c = 0; c < dim; ++c) {
        ds.column_names.push_back("x" + std::to_string(c));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, rng);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = i < n / 2 ? 0 : 1;
        double px = 0.0;
        double py = 0.0;
        const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        if (kind == SyntheticKind::blobs) {
            const double r = 0.5 * std::sqrt(uniform01(rng));
            const double centre = label == 0 ? -1.0 : 1.0;
            px = centre + r * std::cos(angle);
            py = centre + r * std::sin(angle);
        } else {
            // Area-uniform radius in the disk and in the ring.
            const double r = label == 0 ? 0.5 * std::sqrt(uniform01(rng))
                                        : std::sqrt(uniform(rng, 1.0, 2.25));
            px = r * std::cos(angle);
            py = r * std::sin(angle);
        }
        px += noise * standard_normal(rng);
        py += noise * standard_normal(rng);
        const auto row = static_cast<Eigen::Index>(order[i]);
        ds.features(row, 0) = px;
        ds.features(row, 1) = py;
        for (std::size_t c = 2; c < dim; ++c) {
            ds.features(row, static_cast<Eigen::Index>(c)) = standard_normal(rng);
        }
        ds.labels[order[i]] = label;
    }
    return ds;
}

}  // namespace qmlbench::data
