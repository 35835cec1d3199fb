#include "qmlbench/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qmlbench::baseline {

namespace {

constexpr double kTau = 1e-12;

void check_arity(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("kernel arguments differ in length (" + std::to_string(x.size()) +
                                    " vs " + std::to_string(y.size()) + ")");
    }
}

double evaluate(const KernelSpec& kernel, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (const auto* rbf = std::get_if<RbfKernel>(&kernel)) {
        return rbf_kernel(x, y, rbf->gamma);
    }
    if (std::holds_alternative<LinearKernel>(kernel)) {
        return linear_kernel(x, y);
    }
    throw std::invalid_argument("a precomputed kernel cannot be evaluated on feature vectors");
}

bool in_up(int y, double a, double c) { return (y == 1 && a < c) || (y == -1 && a > 0.0); }
bool in_low(int y, double a, double c) { return (y == 1 && a > 0.0) || (y == -1 && a < c); }

// -y_t G_t extremes over I_up and I_low.
struct Violation {
    std::ptrdiff_t up = -1;
    std::ptrdiff_t low = -1;
    double gap = 0.0;
};

Violation max_violating_pair(std::span<const double> alpha, std::span<const int> y,
                             std::span<const double> grad, double c) {
    double best_up = -std::numeric_limits<double>::infinity();
    double best_low = std::numeric_limits<double>::infinity();
    Violation v;
    for (std::size_t t = 0; t < alpha.size(); ++t) {
        const double score = -y[t] * grad[t];
        if (in_up(y[t], alpha[t], c) && score > best_up) {
            best_up = score;
            v.up = static_cast<std::ptrdiff_t>(t);
        }
        if (in_low(y[t], alpha[t], c) && score < best_low) {
            best_low = score;
            v.low = static_cast<std::ptrdiff_t>(t);
        }
    }
    v.gap = (v.up < 0 || v.low < 0) ? 0.0 : best_up - best_low;
    return v;
}

// Offset rho such that f(x) = sum alpha_i y_i K(x_i, x) - rho.
double compute_rho(std::span<const double> alpha, std::span<const int> y, std::span<const double> grad,
                   double c) {
    double upper = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < alpha.size(); ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= c) {
            if (y[t] == -1) {
                upper = std::min(upper, yg);
            } else {
                lower = std::max(lower, yg);
            }
        } else if (alpha[t] <= 0.0) {
            if (y[t] == 1) {
                upper = std::min(upper, yg);
            } else {
                lower = std::max(lower, yg);
            }
        } else {
            free_sum += yg;
            ++free_count;
        }
    }
    if (free_count > 0) {
        return free_sum / static_cast<double>(free_count);
    }
    return (upper + lower) / 2.0;
}

void validate_training_input(const Eigen::MatrixXd& gram, std::span<const int> labels) {
    const auto n = static_cast<std::size_t>(gram.rows());
    if (gram.rows() != gram.cols()) {
        throw std::invalid_argument("Gram matrix must be square");
    }
    if (labels.size() != n) {
        throw std::invalid_argument("Gram matrix has " + std::to_string(n) + " rows but " +
                                    std::to_string(labels.size()) + " labels were given");
    }
    if (n < 2) {
        throw std::invalid_argument("SVM training needs at least two points");
    }
    bool has_pos = false;
    bool has_neg = false;
    for (int y : labels) {
        if (y != 1 && y != -1) {
            throw std::invalid_argument("SVM labels must be -1 or +1");
        }
        has_pos |= y == 1;
        has_neg |= y == -1;
    }
    if (!has_pos || !has_neg) {
        throw std::invalid_argument("SVM training needs both classes present");
    }
    if (!gram.allFinite()) {
        throw std::invalid_argument("Gram matrix contains non-finite entries");
    }
    for (Eigen::Index i = 0; i < gram.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < gram.cols(); ++j) {
            const double scale = std::max({1.0, std::abs(gram(i, j)), std::abs(gram(j, i))});
            if (std::abs(gram(i, j) - gram(j, i)) > 1e-9 * scale) {
                throw std::invalid_argument("Gram matrix is not symmetric at (" + std::to_string(i) +
                                            ", " + std::to_string(j) + ")");
            }
        }
    }
}

}  // namespace

double rbf_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double gamma) {
    check_arity(x, y);
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("RBF gamma must be positive");
    }
    return std::exp(-gamma * (x - y).squaredNorm());
}

double linear_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    check_arity(x, y);
    return x.dot(y);
}

double default_rbf_gamma(const Eigen::MatrixXd& rows) {
    if (rows.size() == 0) {
        throw std::invalid_argument("cannot derive gamma from an empty matrix");
    }
    const double mean = rows.mean();
    const double variance = (rows.array() - mean).square().mean();
    const auto d = static_cast<double>(rows.cols());
    return variance > 0.0 ? 1.0 / (d * variance) : 1.0 / d;
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& rows, const KernelSpec& kernel) {
    const Eigen::Index n = rows.rows();
    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd xi = rows.row(i).transpose();
        for (Eigen::Index j = i; j < n; ++j) {
            gram(i, j) = gram(j, i) = evaluate(kernel, xi, rows.row(j).transpose());
        }
    }
    return gram;
}

Eigen::MatrixXd cross_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const KernelSpec& kernel) {
    Eigen::MatrixXd out(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const Eigen::VectorXd x = a.row(i).transpose();
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            out(i, j) = evaluate(kernel, x, b.row(j).transpose());
        }
    }
    return out;
}

SvmModel svm_train(const Eigen::MatrixXd& gram, std::span<const int> labels, const SvmParams& params) {
    if (!(params.c > 0.0)) {
        throw std::invalid_argument("SVM C must be positive");
    }
    validate_training_input(gram, labels);
    const auto n = static_cast<std::size_t>(gram.rows());
    const double c = params.c;
    std::vector<int> y(labels.begin(), labels.end());
    std::vector<double> alpha(n, 0.0);
    // G = Q alpha - 1 with Q_ij = y_i y_j K_ij
    std::vector<double> grad(n, -1.0);

    SvmModel model;
    model.kernel = PrecomputedKernel{};
    model.c = c;
    for (; model.iterations < params.max_iterations; ++model.iterations) {
        const Violation v = max_violating_pair(alpha, y, grad, c);
        if (v.up < 0 || v.low < 0 || v.gap <= params.tol) {
            model.converged = true;
            break;
        }
        const auto i = static_cast<Eigen::Index>(v.up);
        const auto j = static_cast<Eigen::Index>(v.low);
        const auto ui = static_cast<std::size_t>(i);
        const auto uj = static_cast<std::size_t>(j);
        const double qij = y[ui] * y[uj] * gram(i, j);
        const double old_i = alpha[ui];
        const double old_j = alpha[uj];
        if (y[ui] != y[uj]) {
            double quad = gram(i, i) + gram(j, j) + 2.0 * qij;
            if (quad <= 0.0) {
                quad = kTau;
            }
            const double delta = (-grad[ui] - grad[uj]) / quad;
            const double diff = alpha[ui] - alpha[uj];
            alpha[ui] += delta;
            alpha[uj] += delta;
            if (diff > 0.0) {
                if (alpha[uj] < 0.0) {
                    alpha[uj] = 0.0;
                    alpha[ui] = diff;
                }
            } else if (alpha[ui] < 0.0) {
                alpha[ui] = 0.0;
                alpha[uj] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[ui] > c) {
                    alpha[ui] = c;
                    alpha[uj] = c - diff;
                }
            } else if (alpha[uj] > c) {
                alpha[uj] = c;
                alpha[ui] = c + diff;
            }
        } else {
            double quad = gram(i, i) + gram(j, j) - 2.0 * qij;
            if (quad <= 0.0) {
                quad = kTau;
            }
            const double delta = (grad[ui] - grad[uj]) / quad;
            const double sum = alpha[ui] + alpha[uj];
            alpha[ui] -= delta;
            alpha[uj] += delta;
            if (sum > c) {
                if (alpha[ui] > c) {
                    alpha[ui] = c;
                    alpha[uj] = sum - c;
                }
            } else if (alpha[uj] < 0.0) {
                alpha[uj] = 0.0;
                alpha[ui] = sum;
            }
            if (sum > c) {
                if (alpha[uj] > c) {
                    alpha[uj] = c;
                    alpha[ui] = sum - c;
                }
            } else if (alpha[ui] < 0.0) {
                alpha[ui] = 0.0;
                alpha[uj] = sum;
            }
        }
        const double di = alpha[ui] - old_i;
        const double dj = alpha[uj] - old_j;
        for (std::size_t t = 0; t < n; ++t) {
            const auto ti = static_cast<Eigen::Index>(t);
            grad[t] += y[t] * (y[ui] * gram(ti, i) * di + y[uj] * gram(ti, j) * dj);
        }
    }

    model.bias = -compute_rho(alpha, y, grad, c);
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            model.support.push_back(t);
            model.dual_coef.push_back(alpha[t] * y[t]);
        }
    }
    model.alpha = std::move(alpha);
    model.labels = std::move(y);
    return model;
}

SvmModel svm_train(const Eigen::MatrixXd& rows, std::span<const int> labels, const KernelSpec& kernel,
                   const SvmParams& params) {
    if (std::holds_alternative<PrecomputedKernel>(kernel)) {
        throw std::invalid_argument("use the Gram-matrix overload for precomputed kernels");
    }
    SvmModel model = svm_train(gram_matrix(rows, kernel), labels, params);
    model.kernel = kernel;
    model.support_vectors.resize(static_cast<Eigen::Index>(model.support.size()), rows.cols());
    for (std::size_t s = 0; s < model.support.size(); ++s) {
        model.support_vectors.row(static_cast<Eigen::Index>(s)) =
            rows.row(static_cast<Eigen::Index>(model.support[s]));
    }
    return model;
}

double decision_value_from_row(const SvmModel& model, std::span<const double> kernel_row) {
    if (kernel_row.size() != model.num_training_points()) {
        throw std::invalid_argument("kernel row has " + std::to_string(kernel_row.size()) +
                                    " entries but the model was trained on " +
                                    std::to_string(model.num_training_points()) + " points");
    }
    double f = model.bias;
    for (std::size_t s = 0; s < model.support.size(); ++s) {
        f += model.dual_coef[s] * kernel_row[model.support[s]];
    }
    return f;
}

double decision_value(const SvmModel& model, const std::function<double(std::size_t)>& kernel_to_train) {
    double f = model.bias;
    for (std::size_t s = 0; s < model.support.size(); ++s) {
        f += model.dual_coef[s] * kernel_to_train(model.support[s]);
    }
    return f;
}

double decision_value(const SvmModel& model, const Eigen::VectorXd& x) {
    if (std::holds_alternative<PrecomputedKernel>(model.kernel)) {
        throw std::invalid_argument("precomputed-kernel models predict from kernel rows");
    }
    if (model.support_vectors.rows() > 0 && model.support_vectors.cols() != x.size()) {
        throw std::invalid_argument("expected " + std::to_string(model.support_vectors.cols()) +
                                    " features, got " + std::to_string(x.size()));
    }
    double f = model.bias;
    for (std::size_t s = 0; s < model.support.size(); ++s) {
        f += model.dual_coef[s] *
             evaluate(model.kernel, model.support_vectors.row(static_cast<Eigen::Index>(s)).transpose(), x);
    }
    return f;
}

int svm_predict_row(const SvmModel& model, std::span<const double> kernel_row) {
    return decision_value_from_row(model, kernel_row) >= 0.0 ? 1 : -1;
}

int svm_predict(const SvmModel& model, const Eigen::VectorXd& x) {
    return decision_value(model, x) >= 0.0 ? 1 : -1;
}

double kkt_violation(const SvmModel& model, const Eigen::MatrixXd& gram) {
    const std::size_t n = model.num_training_points();
    if (static_cast<std::size_t>(gram.rows()) != n || gram.rows() != gram.cols()) {
        throw std::invalid_argument("Gram matrix does not match the model");
    }
    std::vector<double> grad(n, -1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            grad[i] += model.labels[i] * model.labels[j] *
                       gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * model.alpha[j];
        }
    }
    return max_violating_pair(model.alpha, model.labels, grad, model.c).gap;
}

}  // namespace qmlbench::baseline
