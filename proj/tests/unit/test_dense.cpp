#include <cmath>
#include <random>

#include "catch_amalgamated.hpp"
#include "qmlbench/datapipe.hpp"
#include "qmlbench/dense.hpp"

using namespace qmlbench;
using baseline::DenseNetwork;

TEST_CASE("dense parameter counts", "[dense]") {
    const std::vector<std::size_t> nn{16, 8, 4, 1};
    const std::vector<std::size_t> fair{16, 4, 1};
    const std::vector<std::size_t> head{1, 4, 1};
    const std::vector<std::size_t> reveal{16, 3, 1};
    CHECK(baseline::count_parameters(nn) == 177);
    CHECK(baseline::count_parameters(fair) == 73);
    CHECK(baseline::count_parameters(head) == 13);
    CHECK(baseline::count_parameters(reveal) == 55);
    // 18h + 1 = 51 has no integer solution, so no [16, h, 1] net has 51 parameters.
    for (std::size_t h = 1; h < 10; ++h) {
        const std::vector<std::size_t> w{16, h, 1};
        CHECK(baseline::count_parameters(w) != 51);
    }
    for (const auto& widths : {nn, fair, head, reveal}) {
        const auto net = DenseNetwork::initialized(widths, 1);
        CHECK(net.num_parameters() == baseline::count_parameters(widths));
        CHECK(net.flatten().size() == net.num_parameters());
    }
}

TEST_CASE("Glorot initialization is bounded and seeded", "[dense]") {
    const auto a = DenseNetwork::initialized({16, 8, 4, 1}, 42);
    const auto b = DenseNetwork::initialized({16, 8, 4, 1}, 42);
    const auto c = DenseNetwork::initialized({16, 8, 4, 1}, 43);
    CHECK(a.flatten() == b.flatten());
    CHECK(a.flatten() != c.flatten());

    const auto flat = a.flatten();
    const std::size_t widths[] = {16, 8, 4, 1};
    std::size_t offset = 0;
    for (int l = 0; l < 3; ++l) {
        const std::size_t in = widths[l];
        const std::size_t out = widths[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        for (std::size_t k = 0; k < in * out; ++k) {
            CHECK(std::abs(flat[offset + k]) <= limit);
        }
        offset += in * out;
        for (std::size_t k = 0; k < out; ++k) {
            CHECK(flat[offset + k] == 0.0);
        }
        offset += out;
    }
    CHECK_THROWS_AS(DenseNetwork::initialized({4, 2}, 0), std::invalid_argument);
    CHECK_THROWS_AS(DenseNetwork::initialized({4}, 0), std::invalid_argument);
    CHECK_THROWS_AS(DenseNetwork::initialized({4, 0, 1}, 0), std::invalid_argument);
}

TEST_CASE("flatten and assign round trip", "[dense]") {
    auto net = DenseNetwork::initialized({3, 2, 1}, 7);
    std::vector<double> p(net.num_parameters());
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = 0.1 * static_cast<double>(i);
    }
    net.assign(p);
    CHECK(net.flatten() == p);
    // Layout: W1 row-major (2x3), b1, W2 (1x2), b2.
    Eigen::VectorXd x(3);
    x << 1.0, -1.0, 0.5;
    const double h0 = std::tanh(0.0 * 1 + 0.1 * -1 + 0.2 * 0.5 + 0.6);
    const double h1 = std::tanh(0.3 * 1 + 0.4 * -1 + 0.5 * 0.5 + 0.7);
    CHECK(net.forward(x) == Catch::Approx(std::tanh(0.8 * h0 + 0.9 * h1 + 1.0)));
    CHECK_THROWS_AS(net.assign(std::vector<double>(3)), std::invalid_argument);
    CHECK_THROWS_AS(net.forward(Eigen::VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("backprop matches finite differences", "[dense][gradient]") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    double worst = 0.0;
    for (int probe = 0; probe < 20; ++probe) {
        auto net = DenseNetwork::initialized({2, 3, 1}, static_cast<std::uint64_t>(probe));
        auto p = net.flatten();
        for (double& v : p) {
            v = u(rng);
        }
        net.assign(p);
        Eigen::VectorXd x(2);
        x << u(rng), u(rng);
        const double upstream = u(rng);
        const auto g = net.backward(x, upstream);
        CHECK(g.output == Catch::Approx(net.forward(x)));
        const double h = 1e-5;
        for (std::size_t k = 0; k < p.size(); ++k) {
            auto q = p;
            q[k] += h;
            net.assign(q);
            const double plus = net.forward(x);
            q[k] -= 2 * h;
            net.assign(q);
            const double minus = net.forward(x);
            worst = std::max(worst, std::abs(upstream * (plus - minus) / (2 * h) - g.params[k]));
        }
        net.assign(p);
        for (Eigen::Index i = 0; i < 2; ++i) {
            Eigen::VectorXd xp = x;
            Eigen::VectorXd xm = x;
            xp(i) += h;
            xm(i) -= h;
            worst = std::max(worst, std::abs(upstream * (net.forward(xp) - net.forward(xm)) / (2 * h) - g.input(i)));
        }
    }
    CHECK(worst <= 1e-6);
}

namespace {

std::vector<int> signed_labels(const std::vector<int>& labels01) {
    std::vector<int> out;
    for (int y : labels01) {
        out.push_back(y == 1 ? 1 : -1);
    }
    return out;
}

// Plain logistic regression by full-batch gradient descent.
double logistic_accuracy(const Eigen::MatrixXd& x, const std::vector<int>& y) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
    double b = 0.0;
    for (int it = 0; it < 2000; ++it) {
        Eigen::VectorXd gw = Eigen::VectorXd::Zero(x.cols());
        double gb = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double yi = y[static_cast<std::size_t>(i)];
            const double z = yi * (x.row(i).dot(w) + b);
            const double s = -yi / (1.0 + std::exp(z));
            gw += s * x.row(i).transpose();
            gb += s;
        }
        w -= 0.1 * gw / static_cast<double>(x.rows());
        b -= 0.1 * gb / static_cast<double>(x.rows());
    }
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        hits += ((x.row(i).dot(w) + b) >= 0 ? 1 : -1) == y[static_cast<std::size_t>(i)];
    }
    return static_cast<double>(hits) / static_cast<double>(x.rows());
}

}  // namespace

TEST_CASE("dense training on separable blobs", "[dense][training]") {
    const auto ds = data::generate_synthetic(data::SyntheticKind::blobs, 40, 0.0, 2);
    const auto y = signed_labels(ds.labels);
    CHECK(logistic_accuracy(ds.features, y) == 1.0);

    TrainConfig config;
    config.seed = 1;
    const auto [net, history] = baseline::dense_train(DenseNetwork::initialized({2, 4, 1}, 9), ds.features, y, config);
    REQUIRE(history.size() == 20);
    CHECK(history.back().train_accuracy >= 0.95);
    CHECK(history.back().mean_loss < history.front().mean_loss);

    const auto [again, history2] =
        baseline::dense_train(DenseNetwork::initialized({2, 4, 1}, 9), ds.features, y, config);
    CHECK(again.flatten() == net.flatten());
}

TEST_CASE("dense training edge cases", "[dense][training]") {
    const auto ds = data::generate_synthetic(data::SyntheticKind::blobs, 20, 0.1, 4);
    const auto y = signed_labels(ds.labels);
    const auto net = DenseNetwork::initialized({2, 3, 1}, 5);
    TrainConfig config;
    config.learning_rate = 0.0;
    config.epochs = 3;
    const auto [same, history] = baseline::dense_train(net, ds.features, y, config);
    CHECK(same.flatten() == net.flatten());
    CHECK(history[0].mean_loss == history[2].mean_loss);

    config = {};
    CHECK_THROWS_AS(baseline::dense_train(DenseNetwork::initialized({3, 2, 1}, 0), ds.features, y, config),
                    std::invalid_argument);
    auto bad = y;
    bad[0] = 0;
    CHECK_THROWS_AS(baseline::dense_train(net, ds.features, bad, config), std::invalid_argument);
    config.epochs = 0;
    CHECK_THROWS_AS(baseline::dense_train(net, ds.features, y, config), std::invalid_argument);
}
