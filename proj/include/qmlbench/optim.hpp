#pragma once

// Loss, optimizer and training configuration shared by the quantum and
// classical trainers, so both run the identical update rule.

#include <cstdint>
#include <span>
#include <vector>

namespace qmlbench {

// max(0, 1 - label * prediction); label must be -1 or +1.
double hinge_loss(double prediction, int label);

// d/d(prediction) of hinge_loss. Zero at and beyond the margin.
double hinge_loss_derivative(double prediction, int label);

struct TrainConfig {
    int epochs = 20;
    double learning_rate = 0.02;
    std::size_t batch_size = 32;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
    std::uint64_t seed = 0;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct EpochRecord {
    double mean_loss = 0.0;
    double train_accuracy = 0.0;
    double seconds = 0.0;
};

using TrainHistory = std::vector<EpochRecord>;

namespace optim {

struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::uint64_t step = 0;

    static AdamState zeros(std::size_t n) { return {std::vector<double>(n), std::vector<double>(n), 0}; }
};

struct AdamResult {
    std::vector<double> params;
    AdamState state;
};

// One bias-corrected Adam step.
AdamResult adam_update(std::vector<double> params, std::span<const double> gradients,
                       AdamState state, const TrainConfig& config);

// Minibatch order for one epoch, derived from (seed, epoch) only.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch);

}  // namespace optim

}  // namespace qmlbench
