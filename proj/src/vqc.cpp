#include "qmlbench/vqc.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qmlbench/parallel.hpp"
#include "qmlbench/random.hpp"

namespace qmlbench::vqc {

namespace {

constexpr double kShift = std::numbers::pi / 2.0;

void check_sample(const VqcModel& model, const encode::EncodedSample& sample) {
    if (sample.circuit.num_qubits() != model.num_data_qubits) {
        throw std::invalid_argument("sample encodes " + std::to_string(sample.circuit.num_qubits()) +
                                    " qubits but the model has " + std::to_string(model.num_data_qubits));
    }
    if (model.theta.size() != model.ansatz.num_free_parameters()) {
        throw std::invalid_argument("model has " + std::to_string(model.theta.size()) +
                                    " parameters but the ansatz expects " +
                                    std::to_string(model.ansatz.num_free_parameters()));
    }
}

double evaluate(const VqcModel& model, sim::StateVector state, std::span<const double> theta) {
    sim::apply_circuit_in_place(state, model.ansatz, theta);
    return sim::expectation(state, model.readout);
}

}  // namespace

LossGradient loss_gradient(const VqcModel& model, const encode::EncodedSample& sample, int label) {
    LossGradient out;
    out.output = forward(model, sample);
    out.loss = hinge_loss(out.output, label);
    out.grad.assign(model.theta.size(), 0.0);
    const double d_out = hinge_loss_derivative(out.output, label);
    if (d_out != 0.0) {
        const auto shift = parameter_shift_gradients(model, sample);
        for (std::size_t k = 0; k < shift.size(); ++k) {
            out.grad[k] = d_out * shift[k];
        }
    }
    return out;
}

LossGradient loss_gradient(const HybridModel& model, const encode::EncodedSample& sample, int label) {
    LossGradient out;
    const double q = forward(model.quantum, sample);
    const Eigen::VectorXd head_input = Eigen::VectorXd::Constant(1, q);
    const double y_hat = model.head.forward(head_input);
    out.output = y_hat;
    out.loss = hinge_loss(y_hat, label);
    const std::size_t nq = model.quantum.theta.size();
    out.grad.assign(nq + model.head.num_parameters(), 0.0);
    const double d_out = hinge_loss_derivative(y_hat, label);
    if (d_out == 0.0) {
        return out;
    }
    const auto head_grad = model.head.backward(head_input, d_out);
    std::copy(head_grad.params.begin(), head_grad.params.end(), out.grad.begin() + static_cast<std::ptrdiff_t>(nq));
    // Chain rule through the single scalar the circuit hands to the head.
    const double d_q = head_grad.input(0);
    if (d_q != 0.0) {
        const auto shift = parameter_shift_gradients(model.quantum, sample);
        for (std::size_t k = 0; k < nq; ++k) {
            out.grad[k] = d_q * shift[k];
        }
    }
    return out;
}

namespace {

void set_parameters(VqcModel& model, const std::vector<double>& params) { model.theta = params; }

void set_parameters(HybridModel& model, const std::vector<double>& params) {
    const std::size_t nq = model.quantum.theta.size();
    model.quantum.theta.assign(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(nq));
    model.head.assign(std::span(params).subspan(nq));
}

std::size_t data_qubits(const VqcModel& m) { return m.num_data_qubits; }
std::size_t data_qubits(const HybridModel& m) { return m.quantum.num_data_qubits; }

template <typename Model>
std::pair<Model, TrainHistory> train_impl(Model model, std::span<const encode::EncodedSample> samples,
                                          std::span<const int> labels, const TrainConfig& config) {
    config.validate();
    if (samples.empty()) {
        throw std::invalid_argument("train: empty training set");
    }
    if (samples.size() != labels.size()) {
        throw std::invalid_argument("train: sample and label counts differ");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (labels[i] != -1 && labels[i] != 1) {
            throw std::invalid_argument("train: label at index " + std::to_string(i) + " is not -1 or +1");
        }
        if (samples[i].circuit.num_qubits() != data_qubits(model)) {
            throw std::invalid_argument("train: sample " + std::to_string(i) + " has the wrong qubit count");
        }
    }
    const std::size_t n = samples.size();
    std::vector<double> params = trainable_parameters(model);
    auto adam = optim::AdamState::zeros(params.size());
    TrainHistory history;
    std::vector<LossGradient> slots;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        const auto order = optim::epoch_order(n, config.seed, epoch);
        double loss_sum = 0.0;
        for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
            const std::size_t end = std::min(n, begin + config.batch_size);
            slots.assign(end - begin, {});
            parallel_for(end - begin, [&](std::size_t b) {
                const std::size_t idx = order[begin + b];
                slots[b] = loss_gradient(model, samples[idx], labels[idx]);
            });
            // Fixed reduction order: sample position, then parameter index.
            std::vector<double> grad(params.size(), 0.0);
            for (const auto& s : slots) {
                loss_sum += s.loss;
                for (std::size_t k = 0; k < grad.size(); ++k) {
                    grad[k] += s.grad[k];
                }
            }
            const auto batch = static_cast<double>(end - begin);
            for (double& g : grad) {
                g /= batch;
            }
            auto step = adam_update(std::move(params), grad, std::move(adam), config);
            params = std::move(step.params);
            adam = std::move(step.state);
            set_parameters(model, params);
        }
        std::vector<int> hits(n, 0);
        parallel_for(n, [&](std::size_t i) { hits[i] = predict_class(model, samples[i]) == labels[i]; });
        std::size_t correct = 0;
        for (int h : hits) {
            correct += static_cast<std::size_t>(h);
        }
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        history.push_back({loss_sum / static_cast<double>(n),
                           static_cast<double>(correct) / static_cast<double>(n), elapsed.count()});
    }
    return {std::move(model), std::move(history)};
}

}  // namespace

sim::Circuit build_ansatz(std::size_t num_data_qubits) {
    if (num_data_qubits == 0) {
        throw std::invalid_argument("ansatz needs at least one data qubit");
    }
    const std::size_t n = num_data_qubits;
    sim::Circuit circuit(n + 1, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        circuit.add(sim::Gate::xx(i, n, sim::Param{i}));
    }
    for (std::size_t i = 0; i < n; ++i) {
        circuit.add(sim::Gate::zz(i, n, sim::Param{n + i}));
    }
    return circuit;
}

VqcModel VqcModel::with_theta(std::size_t num_data_qubits, std::vector<double> theta) {
    VqcModel model{num_data_qubits, build_ansatz(num_data_qubits), std::move(theta),
                   {{{num_data_qubits, sim::Pauli::Y}}}};
    if (model.theta.size() != model.ansatz.num_free_parameters()) {
        throw std::invalid_argument("expected " + std::to_string(model.ansatz.num_free_parameters()) +
                                    " parameters, got " + std::to_string(model.theta.size()));
    }
    return model;
}

VqcModel VqcModel::create(std::size_t num_data_qubits, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> theta(2 * num_data_qubits);
    for (double& t : theta) {
        t = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    }
    return with_theta(num_data_qubits, std::move(theta));
}

HybridModel HybridModel::create(std::size_t num_data_qubits, std::size_t hidden, std::uint64_t seed) {
    return {VqcModel::create(num_data_qubits, derive_seed(seed, 1)),
            baseline::DenseNetwork::initialized({1, hidden, 1}, derive_seed(seed, 2))};
}

sim::StateVector prepare_state(const VqcModel& model, const encode::EncodedSample& sample) {
    check_sample(model, sample);
    auto state = sim::StateVector::zero(model.num_data_qubits + 1);
    sim::apply_circuit_in_place(state, sample.circuit.widened(model.num_data_qubits + 1), {});
    sim::apply_gate_in_place(state, sim::Gate::h(model.readout_qubit()));
    return state;
}

double forward(const VqcModel& model, const encode::EncodedSample& sample) {
    return evaluate(model, prepare_state(model, sample), model.theta);
}

double forward(const HybridModel& model, const encode::EncodedSample& sample) {
    return model.head.forward(Eigen::VectorXd::Constant(1, forward(model.quantum, sample)));
}

double parameter_shift_gradient(const VqcModel& model, const encode::EncodedSample& sample, std::size_t k) {
    if (k >= model.theta.size()) {
        throw std::out_of_range("parameter index " + std::to_string(k) + " out of range");
    }
    const auto prepared = prepare_state(model, sample);
    std::vector<double> shifted = model.theta;
    shifted[k] = model.theta[k] + kShift;
    const double plus = evaluate(model, prepared, shifted);
    shifted[k] = model.theta[k] - kShift;
    const double minus = evaluate(model, prepared, shifted);
    return (plus - minus) / 2.0;
}

std::vector<double> parameter_shift_gradients(const VqcModel& model, const encode::EncodedSample& sample) {
    auto prefix = prepare_state(model, sample);
    const auto& gates = model.ansatz.gates();
    std::vector<double> grad(model.theta.size(), 0.0);
    // Shifts one gate occurrence at a time, so a parameter shared by several
    // gates accumulates one term per occurrence.
    auto shifted_tail = [&](std::size_t g, double angle) {
        auto state = prefix;
        sim::Gate bound = gates[g];
        bound.angle = angle;
        sim::apply_gate_in_place(state, bound);
        for (std::size_t t = g + 1; t < gates.size(); ++t) {
            sim::apply_gate_in_place(state, gates[t], model.theta);
        }
        return sim::expectation(state, model.readout);
    };
    for (std::size_t g = 0; g < gates.size(); ++g) {
        if (const auto* p = std::get_if<sim::Param>(&gates[g].angle)) {
            const double angle = model.theta[p->index];
            grad[p->index] += (shifted_tail(g, angle + kShift) - shifted_tail(g, angle - kShift)) / 2.0;
        }
        sim::apply_gate_in_place(prefix, gates[g], model.theta);
    }
    return grad;
}

int predict_class(double output) { return output >= 0.0 ? 1 : -1; }

int predict_class(const VqcModel& model, const encode::EncodedSample& sample) {
    return predict_class(forward(model, sample));
}

int predict_class(const HybridModel& model, const encode::EncodedSample& sample) {
    return predict_class(forward(model, sample));
}

std::size_t count_parameters(const VqcModel& model) { return model.ansatz.num_free_parameters(); }

std::size_t count_parameters(const HybridModel& model) {
    return count_parameters(model.quantum) + baseline::count_parameters(model.head);
}

std::vector<double> trainable_parameters(const VqcModel& model) { return model.theta; }

std::vector<double> trainable_parameters(const HybridModel& model) {
    std::vector<double> flat = model.quantum.theta;
    const auto head = model.head.flatten();
    flat.insert(flat.end(), head.begin(), head.end());
    return flat;
}

std::pair<VqcModel, TrainHistory> train(VqcModel model, std::span<const encode::EncodedSample> samples,
                                        std::span<const int> labels, const TrainConfig& config) {
    return train_impl(std::move(model), samples, labels, config);
}

std::pair<HybridModel, TrainHistory> train(HybridModel model, std::span<const encode::EncodedSample> samples,
                                           std::span<const int> labels, const TrainConfig& config) {
    return train_impl(std::move(model), samples, labels, config);
}

}  // namespace qmlbench::vqc
