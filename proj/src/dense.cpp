#include "qmlbench/dense.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qmlbench/random.hpp"

namespace qmlbench::baseline {

DenseNetwork DenseNetwork::initialized(std::vector<std::size_t> widths, std::uint64_t seed) {
    if (widths.size() < 2) {
        throw std::invalid_argument("a dense network needs at least an input and an output layer");
    }
    if (widths.back() != 1) {
        throw std::invalid_argument("dense network output width must be 1");
    }
    for (std::size_t w : widths) {
        if (w == 0) {
            throw std::invalid_argument("layer widths must be positive");
        }
    }
    DenseNetwork net;
    net.widths_ = std::move(widths);
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < net.widths_.size(); ++l) {
        const auto in = static_cast<Eigen::Index>(net.widths_[l]);
        const auto out = static_cast<Eigen::Index>(net.widths_[l + 1]);
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        Eigen::MatrixXd w(out, in);
        for (Eigen::Index r = 0; r < out; ++r) {
            for (Eigen::Index c = 0; c < in; ++c) {
                w(r, c) = uniform(rng, -limit, limit);
            }
        }
        net.weights_.push_back(std::move(w));
        net.biases_.push_back(Eigen::VectorXd::Zero(out));
    }
    return net;
}

std::size_t count_parameters(std::span<const std::size_t> widths) {
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        total += widths[l] * widths[l + 1] + widths[l + 1];
    }
    return total;
}

std::size_t DenseNetwork::num_parameters() const { return count_parameters(widths_); }

std::size_t count_parameters(const DenseNetwork& net) { return net.num_parameters(); }

std::vector<double> DenseNetwork::flatten() const {
    std::vector<double> flat;
    flat.reserve(num_parameters());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        for (Eigen::Index r = 0; r < weights_[l].rows(); ++r) {
            for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) {
                flat.push_back(weights_[l](r, c));
            }
        }
        for (Eigen::Index r = 0; r < biases_[l].size(); ++r) {
            flat.push_back(biases_[l](r));
        }
    }
    return flat;
}

void DenseNetwork::assign(std::span<const double> params) {
    if (params.size() != num_parameters()) {
        throw std::invalid_argument("expected " + std::to_string(num_parameters()) +
                                    " parameters, got " + std::to_string(params.size()));
    }
    std::size_t k = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        for (Eigen::Index r = 0; r < weights_[l].rows(); ++r) {
            for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) {
                weights_[l](r, c) = params[k++];
            }
        }
        for (Eigen::Index r = 0; r < biases_[l].size(); ++r) {
            biases_[l](r) = params[k++];
        }
    }
}

double DenseNetwork::forward(const Eigen::VectorXd& input) const {
    if (static_cast<std::size_t>(input.size()) != input_width()) {
        throw std::invalid_argument("network expects " + std::to_string(input_width()) +
                                    " inputs, got " + std::to_string(input.size()));
    }
    Eigen::VectorXd a = input;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        a = (weights_[l] * a + biases_[l]).array().tanh().matrix();
    }
    return a(0);
}

DenseNetwork::Gradient DenseNetwork::backward(const Eigen::VectorXd& input, double output_grad) const {
    if (static_cast<std::size_t>(input.size()) != input_width()) {
        throw std::invalid_argument("network expects " + std::to_string(input_width()) +
                                    " inputs, got " + std::to_string(input.size()));
    }
    // activations[l] is the input to layer l; activations.back() is the output.
    std::vector<Eigen::VectorXd> activations{input};
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        activations.push_back((weights_[l] * activations.back() + biases_[l]).array().tanh().matrix());
    }
    Gradient grad;
    grad.output = activations.back()(0);
    grad.params.assign(num_parameters(), 0.0);

    Eigen::VectorXd upstream = Eigen::VectorXd::Constant(1, output_grad);
    std::size_t offset = grad.params.size();
    for (std::size_t l = weights_.size(); l-- > 0;) {
        const Eigen::VectorXd& out = activations[l + 1];
        const Eigen::VectorXd delta = upstream.array() * (1.0 - out.array().square());
        const Eigen::MatrixXd dw = delta * activations[l].transpose();
        offset -= static_cast<std::size_t>(dw.size() + delta.size());
        std::size_t k = offset;
        for (Eigen::Index r = 0; r < dw.rows(); ++r) {
            for (Eigen::Index c = 0; c < dw.cols(); ++c) {
                grad.params[k++] = dw(r, c);
            }
        }
        for (Eigen::Index r = 0; r < delta.size(); ++r) {
            grad.params[k++] = delta(r);
        }
        upstream = weights_[l].transpose() * delta;
    }
    grad.input = std::move(upstream);
    return grad;
}

int predict_class(const DenseNetwork& net, const Eigen::VectorXd& input) {
    return net.forward(input) >= 0.0 ? 1 : -1;
}

std::pair<DenseNetwork, TrainHistory> dense_train(DenseNetwork net, const Eigen::MatrixXd& data,
                                                  std::span<const int> labels,
                                                  const TrainConfig& config) {
    config.validate();
    if (data.rows() == 0) {
        throw std::invalid_argument("dense_train: empty training set");
    }
    if (static_cast<std::size_t>(data.rows()) != labels.size()) {
        throw std::invalid_argument("dense_train: row and label counts differ");
    }
    if (static_cast<std::size_t>(data.cols()) != net.input_width()) {
        throw std::invalid_argument("dense_train: data has " + std::to_string(data.cols()) +
                                    " columns but the network expects " +
                                    std::to_string(net.input_width()));
    }
    for (int y : labels) {
        if (y != -1 && y != 1) {
            throw std::invalid_argument("dense_train: labels must be -1 or +1");
        }
    }
    const auto n = static_cast<std::size_t>(data.rows());
    std::vector<double> params = net.flatten();
    auto adam = optim::AdamState::zeros(params.size());
    TrainHistory history;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        const auto order = optim::epoch_order(n, config.seed, epoch);
        double loss_sum = 0.0;
        for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
            const std::size_t end = std::min(n, begin + config.batch_size);
            std::vector<double> grad(params.size(), 0.0);
            for (std::size_t b = begin; b < end; ++b) {
                const std::size_t row = order[b];
                const Eigen::VectorXd x = data.row(static_cast<Eigen::Index>(row)).transpose();
                const double out = net.forward(x);
                loss_sum += hinge_loss(out, labels[row]);
                const double d_out = hinge_loss_derivative(out, labels[row]);
                if (d_out == 0.0) {
                    continue;
                }
                const auto g = net.backward(x, d_out);
                for (std::size_t k = 0; k < grad.size(); ++k) {
                    grad[k] += g.params[k];
                }
            }
            const auto batch = static_cast<double>(end - begin);
            for (double& g : grad) {
                g /= batch;
            }
            auto step = optim::adam_update(std::move(params), grad, std::move(adam), config);
            params = std::move(step.params);
            adam = std::move(step.state);
            net.assign(params);
        }
        std::size_t correct = 0;
        for (std::size_t r = 0; r < n; ++r) {
            correct += predict_class(net, data.row(static_cast<Eigen::Index>(r)).transpose()) == labels[r];
        }
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        history.push_back({loss_sum / static_cast<double>(n),
                           static_cast<double>(correct) / static_cast<double>(n), elapsed.count()});
    }
    return {std::move(net), std::move(history)};
}

}  // namespace qmlbench::baseline
