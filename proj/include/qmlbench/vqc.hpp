#pragma once

// Variational quantum classifier over angle-encoded samples, plus hybrid
// models that feed the quantum output through a small dense head.
//
// Register layout: data qubits 0..n-1, readout qubit n. The readout is
// rotated to |+> by a Hadamard before the ansatz and read out as <Y>.
// With a bare |0> readout and a Z measurement the XX/ZZ ansatz output would
// be prod_i cos(theta_i), independent of the data.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "qmlbench/dense.hpp"
#include "qmlbench/encode.hpp"
#include "qmlbench/optim.hpp"
#include "qmlbench/simcore.hpp"

namespace qmlbench::vqc {

using optim::adam_update;
using qmlbench::hinge_loss;

// XX(theta_i) on (i, readout) for i ascending, then ZZ(theta_{n+i}) likewise.
sim::Circuit build_ansatz(std::size_t num_data_qubits);

struct VqcModel {
    std::size_t num_data_qubits;
    sim::Circuit ansatz;
    std::vector<double> theta;
    sim::PauliObservable readout;

    std::size_t readout_qubit() const { return num_data_qubits; }

    // theta drawn uniformly from [0, 2 pi).
    static VqcModel create(std::size_t num_data_qubits, std::uint64_t seed);
    static VqcModel with_theta(std::size_t num_data_qubits, std::vector<double> theta);
};

struct HybridModel {
    VqcModel quantum;
    baseline::DenseNetwork head;  // widths {1, hidden, 1}

    static HybridModel create(std::size_t num_data_qubits, std::size_t hidden, std::uint64_t seed);
};

// Encoded sample on the full register with the readout prepared.
sim::StateVector prepare_state(const VqcModel& model, const encode::EncodedSample& sample);

double forward(const VqcModel& model, const encode::EncodedSample& sample);
double forward(const HybridModel& model, const encode::EncodedSample& sample);

// [E(theta_k + pi/2) - E(theta_k - pi/2)] / 2
double parameter_shift_gradient(const VqcModel& model, const encode::EncodedSample& sample, std::size_t k);

// All components at once; shares the circuit prefix between shifts.
std::vector<double> parameter_shift_gradients(const VqcModel& model, const encode::EncodedSample& sample);

struct LossGradient {
    double output = 0.0;
    double loss = 0.0;
    std::vector<double> grad;  // d(loss)/d(trainable_parameters())
};

// Hinge loss of one sample; zero gradient when the margin is met.
LossGradient loss_gradient(const VqcModel& model, const encode::EncodedSample& sample, int label);
LossGradient loss_gradient(const HybridModel& model, const encode::EncodedSample& sample, int label);

// Sign of the output; 0 maps to +1.
int predict_class(double output);
int predict_class(const VqcModel& model, const encode::EncodedSample& sample);
int predict_class(const HybridModel& model, const encode::EncodedSample& sample);

std::size_t count_parameters(const VqcModel& model);
std::size_t count_parameters(const HybridModel& model);

// Flattened trainable vector: theta, then the head in DenseNetwork layout.
std::vector<double> trainable_parameters(const VqcModel& model);
std::vector<double> trainable_parameters(const HybridModel& model);

std::pair<VqcModel, TrainHistory> train(VqcModel model, std::span<const encode::EncodedSample> samples,
                                        std::span<const int> labels, const TrainConfig& config);
std::pair<HybridModel, TrainHistory> train(HybridModel model, std::span<const encode::EncodedSample> samples,
                                           std::span<const int> labels, const TrainConfig& config);

}  // namespace qmlbench::vqc
