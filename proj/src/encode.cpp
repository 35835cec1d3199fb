#include "qmlbench/encode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qmlbench::encode {

namespace {

void require_finite(const Eigen::VectorXd& v, const char* what) {
    if (!v.allFinite()) {
        throw std::invalid_argument(std::string(what) + " contains non-finite values");
    }
}

}  // namespace

FeatureScaler fit_feature_scaler(const Eigen::MatrixXd& train_rows) {
    if (train_rows.rows() == 0 || train_rows.cols() == 0) {
        throw std::invalid_argument("cannot fit a feature scaler on an empty matrix");
    }
    if (!train_rows.allFinite()) {
        throw std::invalid_argument("feature scaler input contains non-finite values");
    }
    return {train_rows.colwise().minCoeff().transpose(), train_rows.colwise().maxCoeff().transpose()};
}

Eigen::VectorXd FeatureScaler::transform(const Eigen::VectorXd& features) const {
    if (static_cast<std::size_t>(features.size()) != arity()) {
        throw std::invalid_argument("expected " + std::to_string(arity()) + " features, got " +
                                    std::to_string(features.size()));
    }
    require_finite(features, "feature vector");
    Eigen::VectorXd scaled(features.size());
    for (Eigen::Index i = 0; i < features.size(); ++i) {
        const double range = max(i) - min(i);
        scaled(i) = range > 0.0 ? std::clamp((features(i) - min(i)) / range, 0.0, 1.0) : 0.0;
    }
    return scaled;
}

Eigen::MatrixXd FeatureScaler::transform_rows(const Eigen::MatrixXd& rows) const {
    Eigen::MatrixXd out(rows.rows(), rows.cols());
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        out.row(r) = transform(rows.row(r).transpose()).transpose();
    }
    return out;
}

EncodedSample angle_encode(const Eigen::VectorXd& features, const FeatureScaler& scaler) {
    const Eigen::VectorXd scaled = scaler.transform(features);
    sim::Circuit circuit(static_cast<std::size_t>(scaled.size()));
    for (Eigen::Index i = 0; i < scaled.size(); ++i) {
        circuit.add(sim::Gate::rx(static_cast<std::size_t>(i), std::numbers::pi * scaled(i)));
    }
    return {std::move(circuit), features};
}

sim::StateVector amplitude_encode(const Eigen::VectorXd& features) {
    if (features.size() == 0) {
        throw std::invalid_argument("cannot amplitude-encode an empty vector");
    }
    require_finite(features, "feature vector");
    const double norm = features.norm();
    if (norm == 0.0) {
        throw std::invalid_argument("cannot amplitude-encode an all-zero vector");
    }
    std::size_t dim = 2;
    while (dim < static_cast<std::size_t>(features.size())) {
        dim *= 2;
    }
    std::vector<sim::Complex> amps(dim);
    for (Eigen::Index i = 0; i < features.size(); ++i) {
        amps[static_cast<std::size_t>(i)] = features(i) / norm;
    }
    return sim::StateVector::from_amplitudes(std::move(amps));
}

}  // namespace qmlbench::encode
