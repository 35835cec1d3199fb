#include <cmath>
#include <limits>
#include <numeric>

#include "catch_amalgamated.hpp"
#include "qmlbench/dense.hpp"
#include "qmlbench/optim.hpp"
#include "qmlbench/vqc.hpp"

using namespace qmlbench;

// The quantum and classical trainers must use the same update rule.
static_assert(&vqc::adam_update == &optim::adam_update);
static_assert(&vqc::hinge_loss == &qmlbench::hinge_loss);

TEST_CASE("hinge loss values", "[optim]") {
    CHECK(hinge_loss(1.0, 1) == 0.0);
    CHECK(hinge_loss(0.0, 1) == 1.0);
    CHECK(hinge_loss(-0.5, 1) == 1.5);
    CHECK(hinge_loss(0.3, -1) == Catch::Approx(1.3));
    CHECK(hinge_loss(-2.0, -1) == 0.0);
    CHECK_THROWS_AS(hinge_loss(0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(hinge_loss(0.0, 2), std::invalid_argument);
}

TEST_CASE("hinge loss is non-negative and zero exactly beyond the margin", "[optim][property]") {
    for (int label : {-1, 1}) {
        for (double p = -3.0; p <= 3.0; p += 0.125) {
            const double loss = hinge_loss(p, label);
            CHECK(loss >= 0.0);
            CHECK((loss == 0.0) == (label * p >= 1.0));
            // Derivative agrees with a central difference away from the kink.
            if (std::abs(label * p - 1.0) > 1e-3) {
                const double h = 1e-6;
                const double fd = (hinge_loss(p + h, label) - hinge_loss(p - h, label)) / (2 * h);
                CHECK(hinge_loss_derivative(p, label) == Catch::Approx(fd).margin(1e-6));
            }
        }
    }
}

TEST_CASE("train config validation", "[optim]") {
    TrainConfig c;
    CHECK(c.epochs == 20);
    CHECK(c.learning_rate == 0.02);
    CHECK(c.batch_size == 32);
    CHECK(c.beta1 == 0.9);
    CHECK(c.beta2 == 0.999);
    CHECK(c.epsilon == 1e-7);
    CHECK_NOTHROW(c.validate());
    c.epochs = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.learning_rate = -0.1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.beta2 = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("adam first step moves by about -lr * sign(g)", "[optim]") {
    TrainConfig c;
    c.learning_rate = 0.01;
    const auto r = optim::adam_update({1.0, 1.0}, std::vector<double>{2.0, -3.0}, optim::AdamState::zeros(2), c);
    CHECK(r.params[0] == Catch::Approx(1.0 - 0.01).margin(1e-8));
    CHECK(r.params[1] == Catch::Approx(1.0 + 0.01).margin(1e-8));
    CHECK(r.state.step == 1);
    // Closed form of the first step: lr * g / (|g| + eps).
    CHECK(r.params[0] == Catch::Approx(1.0 - 0.01 * 2.0 / (2.0 + 1e-7)).epsilon(1e-14));
}

TEST_CASE("adam matches a hand-rolled reference over several steps", "[optim]") {
    TrainConfig c;
    c.learning_rate = 0.05;
    std::vector<double> p{0.5, -1.0, 2.0};
    auto state = optim::AdamState::zeros(3);
    double m[3] = {0, 0, 0};
    double v[3] = {0, 0, 0};
    double ref[3] = {0.5, -1.0, 2.0};
    const double grads[4][3] = {{1, -2, 0.5}, {0.3, 0.1, -4}, {-1, 0, 2}, {2, 2, 2}};
    for (int t = 1; t <= 4; ++t) {
        std::vector<double> g(grads[t - 1], grads[t - 1] + 3);
        auto r = optim::adam_update(p, g, state, c);
        p = r.params;
        state = r.state;
        for (int i = 0; i < 3; ++i) {
            m[i] = 0.9 * m[i] + 0.1 * g[i];
            v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
            const double mh = m[i] / (1 - std::pow(0.9, t));
            const double vh = v[i] / (1 - std::pow(0.999, t));
            ref[i] -= 0.05 * mh / (std::sqrt(vh) + 1e-7);
        }
    }
    for (int i = 0; i < 3; ++i) {
        CHECK(p[i] == Catch::Approx(ref[i]).epsilon(1e-13));
    }
}

TEST_CASE("adam edge cases", "[optim]") {
    TrainConfig c;
    const auto zero = optim::adam_update({0.25, -0.5}, std::vector<double>{0.0, 0.0}, optim::AdamState::zeros(2), c);
    CHECK(zero.params == std::vector<double>{0.25, -0.5});

    const std::vector<double> g{0.1, -0.7};
    const auto a = optim::adam_update({1, 2}, g, optim::AdamState::zeros(2), c);
    const auto b = optim::adam_update({1, 2}, g, optim::AdamState::zeros(2), c);
    CHECK(a.params == b.params);
    CHECK(a.state.first_moment == b.state.first_moment);
    CHECK(a.state.second_moment == b.state.second_moment);

    CHECK_THROWS_AS(optim::adam_update({1}, std::vector<double>{std::numeric_limits<double>::quiet_NaN()},
                                       optim::AdamState::zeros(1), c),
                    std::invalid_argument);
    CHECK_THROWS_AS(optim::adam_update({1, 2}, std::vector<double>{1.0}, optim::AdamState::zeros(2), c),
                    std::invalid_argument);
}

TEST_CASE("epoch order is a seeded permutation", "[optim]") {
    const auto a = optim::epoch_order(50, 9, 0);
    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> iota(50);
    std::iota(iota.begin(), iota.end(), std::size_t{0});
    CHECK(sorted == iota);
    CHECK(a == optim::epoch_order(50, 9, 0));
    CHECK(a != optim::epoch_order(50, 9, 1));
    CHECK(a != optim::epoch_order(50, 10, 0));
}

// Shared gradient fixture: one full-batch epoch of each trainer must equal
// a single adam_update applied to the mean per-sample gradient.
TEST_CASE("quantum and classical trainers apply the same Adam step", "[optim][cross-module]") {
    TrainConfig c;
    c.epochs = 1;
    c.batch_size = 64;
    c.learning_rate = 0.07;
    c.seed = 3;

    SECTION("dense network") {
        auto net = baseline::DenseNetwork::initialized({2, 3, 1}, 17);
        Eigen::MatrixXd x(4, 2);
        x << 0.2, -0.4, 1.0, 0.5, -0.7, 0.1, 0.3, 0.9;
        const std::vector<int> y{1, -1, -1, 1};
        std::vector<double> grad(net.num_parameters(), 0.0);
        for (Eigen::Index r = 0; r < 4; ++r) {
            const Eigen::VectorXd xr = x.row(r).transpose();
            const double d = hinge_loss_derivative(net.forward(xr), y[static_cast<std::size_t>(r)]);
            const auto g = net.backward(xr, d);
            for (std::size_t k = 0; k < grad.size(); ++k) {
                grad[k] += g.params[k] / 4.0;
            }
        }
        const auto expected = optim::adam_update(net.flatten(), grad, optim::AdamState::zeros(grad.size()), c);
        const auto [trained, history] = baseline::dense_train(net, x, y, c);
        const auto got = trained.flatten();
        REQUIRE(got.size() == expected.params.size());
        for (std::size_t k = 0; k < got.size(); ++k) {
            CHECK(got[k] == Catch::Approx(expected.params[k]).epsilon(1e-12));
        }
        CHECK(history.size() == 1);
    }

    SECTION("variational circuit") {
        const auto model = vqc::VqcModel::with_theta(2, {0.3, 1.1, -0.4, 2.0});
        Eigen::MatrixXd x(3, 2);
        x << 0.0, 0.0, 1.0, 0.3, 0.5, 1.0;
        const auto scaler = encode::fit_feature_scaler(x);
        std::vector<encode::EncodedSample> samples;
        for (Eigen::Index r = 0; r < 3; ++r) {
            samples.push_back(encode::angle_encode(x.row(r).transpose(), scaler));
        }
        const std::vector<int> y{1, -1, 1};
        std::vector<double> grad(4, 0.0);
        for (std::size_t i = 0; i < 3; ++i) {
            const double d = hinge_loss_derivative(vqc::forward(model, samples[i]), y[i]);
            const auto g = vqc::parameter_shift_gradients(model, samples[i]);
            for (std::size_t k = 0; k < 4; ++k) {
                grad[k] += d * g[k] / 3.0;
            }
        }
        const auto expected = optim::adam_update(model.theta, grad, optim::AdamState::zeros(4), c);
        const auto [trained, history] = vqc::train(model, samples, y, c);
        for (std::size_t k = 0; k < 4; ++k) {
            CHECK(trained.theta[k] == Catch::Approx(expected.params[k]).epsilon(1e-12));
        }
    }
}
