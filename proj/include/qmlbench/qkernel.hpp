#pragma once

// Fidelity kernels K(x, y) = |<phi(y)|phi(x)>|^2 over a ZZ-style feature map.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "qmlbench/simcore.hpp"

namespace qmlbench::qkernel {

// Per repetition: H on every qubit, RZ(2 pi x_i) on qubit i, then
// ZZ(pi x_i x_{i+1}) along the linear chain.
struct FeatureMapSpec {
    std::size_t num_qubits = 16;
    std::size_t depth = 2;

    void validate() const;
};

// shots == 0 selects the exact kernel. Otherwise the entry is the
// all-zeros frequency of U(y)^-1 U(x)|0...0>, seeded per entry.
struct KernelMode {
    std::size_t shots = 0;
    std::uint64_t seed = 0;

    bool exact() const { return shots == 0; }
    static KernelMode exact_mode() { return {}; }
    static KernelMode sampled(std::size_t shots, std::uint64_t seed) { return {shots, seed}; }
};

struct KernelMatrix {
    Eigen::MatrixXd values;
    bool sampled = false;
    std::size_t shots = 0;  // 0 for exact matrices and for sampled caches

    Eigen::Index size() const { return values.rows(); }
};

// x is expected to be pre-scaled to [0, 1].
sim::Circuit feature_map_circuit(const Eigen::VectorXd& x, const FeatureMapSpec& spec);

sim::StateVector feature_state(const Eigen::VectorXd& x, const FeatureMapSpec& spec);

// Sampled mode draws from mode.seed directly.
double kernel_entry(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const FeatureMapSpec& spec,
                    const KernelMode& mode);

// Seed for entry (i, j) of a matrix built under `mode`.
std::uint64_t entry_seed(const KernelMode& mode, std::size_t i, std::size_t j);

// Upper triangle computed, mirrored; sampled diagonal fixed at 1.
KernelMatrix kernel_matrix(const Eigen::MatrixXd& rows, const FeatureMapSpec& spec, const KernelMode& mode);

// K(a_i, b_j) for every row of `a` against every row of `b` (test rows
// against training rows). In sampled mode the seed stream is disjoint from
// kernel_matrix's.
Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const FeatureMapSpec& spec,
                             const KernelMode& mode);

// Cache file: "QKM1", n as u64 little-endian, mode byte (0 exact,
// 1 sampled), then n*n little-endian f64 in row-major order.
void write_kernel_cache(const KernelMatrix& kernel, std::ostream& out);
void write_kernel_cache(const KernelMatrix& kernel, const std::filesystem::path& path);
// The shot count is not stored, so sampled matrices load with shots == 0.
KernelMatrix read_kernel_cache(std::istream& in);
KernelMatrix read_kernel_cache(const std::filesystem::path& path);

}  // namespace qmlbench::qkernel
