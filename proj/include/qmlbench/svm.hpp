#pragma once

// Binary soft-margin SVM trained with SMO on the dual problem. The kernel
// is either computed from stored support vectors (RBF, linear) or supplied
// by the caller as a precomputed Gram matrix (quantum kernels).

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace qmlbench::baseline {

struct RbfKernel {
    double gamma;
};
struct LinearKernel {};
struct PrecomputedKernel {};

using KernelSpec = std::variant<PrecomputedKernel, RbfKernel, LinearKernel>;

// exp(-gamma * |x - y|^2)
double rbf_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double gamma);
double linear_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// 1 / (num_features * variance of all entries); 1 / num_features when the
// data has no spread.
double default_rbf_gamma(const Eigen::MatrixXd& rows);

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& rows, const KernelSpec& kernel);
// K(a_i, b_j) for every row of a against every row of b.
Eigen::MatrixXd cross_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const KernelSpec& kernel);

struct SvmParams {
    double c = 1.0;
    double tol = 1e-3;
    std::size_t max_iterations = 100000;
};

struct SvmModel {
    KernelSpec kernel;
    double c = 1.0;
    std::vector<double> alpha;        // one per training point, in [0, C]
    std::vector<int> labels;          // -1/+1, one per training point
    std::vector<std::size_t> support; // indices with alpha > 0
    std::vector<double> dual_coef;    // alpha_i * y_i for each support index
    double bias = 0.0;
    Eigen::MatrixXd support_vectors;  // rows aligned with `support`; empty for precomputed
    std::size_t iterations = 0;
    bool converged = false;

    std::size_t num_training_points() const { return alpha.size(); }
};

// Precomputed kernel: `gram` is the symmetric training Gram matrix.
SvmModel svm_train(const Eigen::MatrixXd& gram, std::span<const int> labels, const SvmParams& params = {});

// Computed kernel: builds the Gram matrix from `rows`.
SvmModel svm_train(const Eigen::MatrixXd& rows, std::span<const int> labels, const KernelSpec& kernel,
                   const SvmParams& params = {});

// kernel_row[i] = K(x_i, x) over all training points.
double decision_value_from_row(const SvmModel& model, std::span<const double> kernel_row);
// kernel_to_train(i) = K(x_i, x); only queried for support indices.
double decision_value(const SvmModel& model, const std::function<double(std::size_t)>& kernel_to_train);
// Computed-kernel models only.
double decision_value(const SvmModel& model, const Eigen::VectorXd& x);

// Sign of the decision value, ties to +1.
int svm_predict_row(const SvmModel& model, std::span<const double> kernel_row);
int svm_predict(const SvmModel& model, const Eigen::VectorXd& x);

// Largest first-order KKT violation max_{I_up}(-y G) - min_{I_low}(-y G),
// recomputed from the Gram matrix; <= tol for a converged model.
double kkt_violation(const SvmModel& model, const Eigen::MatrixXd& gram);

}  // namespace qmlbench::baseline
