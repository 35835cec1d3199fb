#pragma once

// Fully connected tanh networks with a single output, trained on hinge loss.

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "qmlbench/optim.hpp"

namespace qmlbench::baseline {

class DenseNetwork {
public:
    // widths = {inputs, hidden..., 1}. Weights are drawn per entry from
    // U(-r, r) with r = sqrt(6 / (fan_in + fan_out)); biases start at zero.
    static DenseNetwork initialized(std::vector<std::size_t> widths, std::uint64_t seed);

    const std::vector<std::size_t>& widths() const { return widths_; }
    std::size_t input_width() const { return widths_.front(); }
    std::size_t num_parameters() const;

    // Flat layout: for each layer, weights row-major (out x in) then biases.
    std::vector<double> flatten() const;
    void assign(std::span<const double> params);

    double forward(const Eigen::VectorXd& input) const;

    struct Gradient {
        double output = 0.0;
        std::vector<double> params;  // flat layout
        Eigen::VectorXd input;       // d(loss)/d(input)
    };
    // Backpropagates d(loss)/d(output) = output_grad.
    Gradient backward(const Eigen::VectorXd& input, double output_grad) const;

private:
    std::vector<std::size_t> widths_;
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
};

std::size_t count_parameters(const DenseNetwork& net);
std::size_t count_parameters(std::span<const std::size_t> widths);

// Sign of the output, ties to +1.
int predict_class(const DenseNetwork& net, const Eigen::VectorXd& input);

// Minibatch Adam on mean hinge loss. Labels are -1/+1.
std::pair<DenseNetwork, TrainHistory> dense_train(DenseNetwork net, const Eigen::MatrixXd& data,
                                                  std::span<const int> labels,
                                                  const TrainConfig& config);

}  // namespace qmlbench::baseline
