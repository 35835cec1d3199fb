#include "qmlbench/optim.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "qmlbench/random.hpp"

namespace qmlbench {

namespace {

void check_label(int label) {
    if (label != -1 && label != 1) {
        throw std::invalid_argument("hinge loss label must be -1 or +1, got " + std::to_string(label));
    }
}

}  // namespace

double hinge_loss(double prediction, int label) {
    check_label(label);
    return std::max(0.0, 1.0 - label * prediction);
}

double hinge_loss_derivative(double prediction, int label) {
    check_label(label);
    return 1.0 - label * prediction > 0.0 ? -static_cast<double>(label) : 0.0;
}

void TrainConfig::validate() const {
    if (epochs < 1) {
        throw std::invalid_argument("epochs must be >= 1");
    }
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("learning_rate must be finite and non-negative");
    }
    if (batch_size == 0) {
        throw std::invalid_argument("batch_size must be >= 1");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw std::invalid_argument("beta1 and beta2 must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("epsilon must be positive");
    }
}

namespace optim {

AdamResult adam_update(std::vector<double> params, std::span<const double> gradients,
                       AdamState state, const TrainConfig& config) {
    if (gradients.size() != params.size() || state.first_moment.size() != params.size() ||
        state.second_moment.size() != params.size()) {
        throw std::invalid_argument("adam_update: parameter, gradient and moment lengths differ");
    }
    for (double g : gradients) {
        if (!std::isfinite(g)) {
            throw std::invalid_argument("adam_update: non-finite gradient");
        }
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(config.beta1, t);
    const double correction2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = gradients[i];
        state.first_moment[i] = config.beta1 * state.first_moment[i] + (1.0 - config.beta1) * g;
        state.second_moment[i] = config.beta2 * state.second_moment[i] + (1.0 - config.beta2) * g * g;
        const double m_hat = state.first_moment[i] / correction1;
        const double v_hat = state.second_moment[i] / correction2;
        params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
    return {std::move(params), std::move(state)};
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(epoch), 0x5eed));
    shuffle(order, rng);
    return order;
}

}  // namespace optim

}  // namespace qmlbench
