#pragma once

// Classical feature vectors to quantum data.

#include <Eigen/Dense>

#include "qmlbench/simcore.hpp"

namespace qmlbench::encode {

// Per-feature min/max learned on the training split. transform() maps
// training values into [0, 1] and clamps anything outside that range.
// A constant feature (max == min) always maps to 0.
struct FeatureScaler {
    Eigen::VectorXd min;
    Eigen::VectorXd max;

    std::size_t arity() const { return static_cast<std::size_t>(min.size()); }
    Eigen::VectorXd transform(const Eigen::VectorXd& features) const;
    Eigen::MatrixXd transform_rows(const Eigen::MatrixXd& rows) const;
};

FeatureScaler fit_feature_scaler(const Eigen::MatrixXd& train_rows);

struct EncodedSample {
    sim::Circuit circuit;
    Eigen::VectorXd source_features;
};

// One RX(pi * scaled_i) on qubit i.
EncodedSample angle_encode(const Eigen::VectorXd& features, const FeatureScaler& scaler);

// Zero-pads to the next power of two and L2-normalizes. A length-1 input is
// padded to two amplitudes so the result is always a valid register.
sim::StateVector amplitude_encode(const Eigen::VectorXd& features);

}  // namespace qmlbench::encode
