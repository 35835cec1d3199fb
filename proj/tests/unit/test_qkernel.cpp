#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "qmlbench/qkernel.hpp"

using namespace qmlbench;
using qkernel::FeatureMapSpec;
using qkernel::KernelMode;

namespace {

Eigen::MatrixXd random_rows(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::uniform_real_distribution<double> u(0, 1);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = u(rng);
    }
    return m;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) {
        out(i++) = x;
    }
    return out;
}

}  // namespace

TEST_CASE("feature map structure", "[qkernel]") {
    const FeatureMapSpec spec{3, 2};
    const auto c = qkernel::feature_map_circuit(vec({0.1, 0.2, 0.3}), spec);
    CHECK(c.num_free_parameters() == 0);
    // Per repetition: 3 H, 3 RZ, 2 ZZ.
    REQUIRE(c.size() == 16);
    const auto& g = c.gates();
    for (std::size_t rep = 0; rep < 2; ++rep) {
        const std::size_t base = rep * 8;
        for (std::size_t q = 0; q < 3; ++q) {
            CHECK(g[base + q].kind == sim::GateKind::H);
            CHECK(g[base + 3 + q].kind == sim::GateKind::RZ);
            CHECK(std::get<double>(g[base + 3 + q].angle) == Catch::Approx(2 * std::numbers::pi * 0.1 * (q + 1)));
        }
        CHECK(g[base + 6].kind == sim::GateKind::ZZ);
        CHECK(g[base + 6].qubits[0] == 0);
        CHECK(g[base + 6].qubits[1] == 1);
        CHECK(std::get<double>(g[base + 6].angle) == Catch::Approx(std::numbers::pi * 0.1 * 0.2));
        CHECK(g[base + 7].qubits[0] == 1);
        CHECK(g[base + 7].qubits[1] == 2);
    }
    CHECK(c.same_structure(qkernel::feature_map_circuit(vec({0.9, 0.0, 0.5}), spec)));

    // One qubit has no chain.
    const auto single = qkernel::feature_map_circuit(vec({0.4}), {1, 3});
    for (const auto& gate : single.gates()) {
        CHECK(gate.arity() == 1);
    }
    CHECK_THROWS_AS(qkernel::feature_map_circuit(vec({0.1, 0.2}), spec), std::invalid_argument);
    CHECK_THROWS_AS(FeatureMapSpec({0, 1}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(FeatureMapSpec({2, 0}).validate(), std::invalid_argument);
}

TEST_CASE("zero input gives a uniform superposition", "[qkernel]") {
    const auto s = qkernel::feature_state(vec({0, 0, 0}), {3, 1});
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(std::abs(s[i] - sim::Complex(1 / std::sqrt(8.0), 0)) < 1e-12);
    }
}

TEST_CASE("single-qubit kernel closed form", "[qkernel]") {
    // H then RZ(2 pi x): K(x, y) = cos^2(pi (x - y)).
    const FeatureMapSpec spec{1, 1};
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 20; ++i) {
        const double x = u(rng);
        const double y = u(rng);
        const double want = std::pow(std::cos(std::numbers::pi * (x - y)), 2);
        CHECK(qkernel::kernel_entry(vec({x}), vec({y}), spec, {}) == Catch::Approx(want).margin(1e-12));
    }
    CHECK(qkernel::kernel_entry(vec({0.75}), vec({0.25}), spec, {}) == Catch::Approx(0.0).margin(1e-12));
    CHECK(qkernel::kernel_entry(vec({0.3}), vec({0.3}), spec, {}) == Catch::Approx(1.0));
    CHECK_THROWS_AS(qkernel::kernel_entry(vec({0.3}), vec({0.3, 0.1}), spec, {}), std::invalid_argument);
}

TEST_CASE("exact kernel matrix properties", "[qkernel][property]") {
    std::mt19937_64 rng(17);
    for (std::size_t q : {2, 4, 6}) {
        const Eigen::MatrixXd x = random_rows(rng, 24, static_cast<Eigen::Index>(q));
        const auto k = qkernel::kernel_matrix(x, {q, 2}, KernelMode::exact_mode());
        CHECK_FALSE(k.sampled);
        CHECK((k.values - k.values.transpose()).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((k.values.diagonal().array() - 1.0).abs().maxCoeff() < 1e-9);
        CHECK(k.values.minCoeff() >= 0.0);
        CHECK(k.values.maxCoeff() <= 1.0 + 1e-12);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k.values);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
        // Entry-wise agreement with kernel_entry in both argument orders.
        for (Eigen::Index i = 0; i < 4; ++i) {
            for (Eigen::Index j = 0; j < 4; ++j) {
                const double a = qkernel::kernel_entry(x.row(i).transpose(), x.row(j).transpose(), {q, 2}, {});
                const double b = qkernel::kernel_entry(x.row(j).transpose(), x.row(i).transpose(), {q, 2}, {});
                CHECK(std::abs(a - b) < 1e-10);
                CHECK(std::abs(a - k.values(i, j)) < 1e-12);
            }
        }
    }
}

TEST_CASE("kernel matrix degenerate inputs", "[qkernel]") {
    const auto one = qkernel::kernel_matrix(Eigen::MatrixXd::Constant(1, 2, 0.3), {2, 2}, {});
    REQUIRE(one.size() == 1);
    CHECK(one.values(0, 0) == Catch::Approx(1.0));

    const auto dup = qkernel::kernel_matrix(Eigen::MatrixXd::Constant(2, 2, 0.6), {2, 2}, {});
    CHECK((dup.values.array() - 1.0).abs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(qkernel::kernel_matrix(Eigen::MatrixXd(0, 2), {2, 2}, {}), std::invalid_argument);
    CHECK_THROWS_AS(qkernel::kernel_matrix(Eigen::MatrixXd::Zero(3, 3), {2, 2}, {}), std::invalid_argument);
}

TEST_CASE("sampled kernel stays within binomial bounds", "[qkernel][sampling]") {
    std::mt19937_64 rng(23);
    const FeatureMapSpec spec{3, 2};
    const std::size_t shots = 8192;
    int inside = 0;
    for (int pair = 0; pair < 20; ++pair) {
        const Eigen::MatrixXd xy = random_rows(rng, 2, 3);
        const Eigen::VectorXd x = xy.row(0).transpose();
        const Eigen::VectorXd y = xy.row(1).transpose();
        const double exact = qkernel::kernel_entry(x, y, spec, {});
        const double sampled = qkernel::kernel_entry(x, y, spec, KernelMode::sampled(shots, 1000 + pair));
        const double sigma = std::sqrt(exact * (1 - exact) / shots);
        inside += std::abs(sampled - exact) <= 3 * sigma + 1e-12;
        // Counts are integers, so the estimate is a multiple of 1/shots.
        CHECK(sampled * shots == Catch::Approx(std::round(sampled * shots)).margin(1e-6));
    }
    CHECK(inside >= 19);
}

TEST_CASE("sampled error shrinks as shots quadruple", "[qkernel][sampling]") {
    std::mt19937_64 rng(31);
    const FeatureMapSpec spec{2, 2};
    const Eigen::MatrixXd x = random_rows(rng, 16, 2);
    const auto exact = qkernel::kernel_matrix(x, spec, {});
    const auto coarse = qkernel::kernel_matrix(x, spec, KernelMode::sampled(1024, 4));
    const auto fine = qkernel::kernel_matrix(x, spec, KernelMode::sampled(4096, 4));
    CHECK(coarse.sampled);
    CHECK(coarse.shots == 1024);
    CHECK(coarse.values.diagonal().isOnes());
    CHECK(coarse.values == coarse.values.transpose());
    const double err_coarse = (coarse.values - exact.values).cwiseAbs().mean();
    const double err_fine = (fine.values - exact.values).cwiseAbs().mean();
    CHECK(err_fine < err_coarse);
}

TEST_CASE("kernels are deterministic across thread counts", "[qkernel][determinism]") {
    std::mt19937_64 rng(41);
    const Eigen::MatrixXd x = random_rows(rng, 12, 3);
    const Eigen::MatrixXd y = random_rows(rng, 5, 3);
    const FeatureMapSpec spec{3, 2};
    const auto mode = KernelMode::sampled(256, 99);

    setenv("QMLBENCH_THREADS", "1", 1);
    const auto serial = qkernel::kernel_matrix(x, spec, mode);
    const Eigen::MatrixXd serial_cross = qkernel::cross_kernel(y, x, spec, mode);
    const auto serial_exact = qkernel::kernel_matrix(x, spec, {});
    setenv("QMLBENCH_THREADS", "4", 1);
    const auto threaded = qkernel::kernel_matrix(x, spec, mode);
    const Eigen::MatrixXd threaded_cross = qkernel::cross_kernel(y, x, spec, mode);
    const auto threaded_exact = qkernel::kernel_matrix(x, spec, {});
    unsetenv("QMLBENCH_THREADS");

    CHECK(serial.values == threaded.values);
    CHECK(serial_cross == threaded_cross);
    CHECK(serial_exact.values == threaded_exact.values);
    CHECK(serial.values == qkernel::kernel_matrix(x, spec, mode).values);

    // Entry (i, j) of a sampled matrix is the single-entry estimate under its derived seed.
    const double direct = qkernel::kernel_entry(x.row(2).transpose(), x.row(7).transpose(), spec,
                                                KernelMode::sampled(256, qkernel::entry_seed(mode, 2, 7)));
    CHECK(serial.values(2, 7) == direct);
}

TEST_CASE("cross kernel agrees with kernel entries", "[qkernel]") {
    std::mt19937_64 rng(43);
    const Eigen::MatrixXd a = random_rows(rng, 4, 3);
    const Eigen::MatrixXd b = random_rows(rng, 6, 3);
    const Eigen::MatrixXd k = qkernel::cross_kernel(a, b, {3, 2}, {});
    REQUIRE(k.rows() == 4);
    REQUIRE(k.cols() == 6);
    for (Eigen::Index i = 0; i < 4; ++i) {
        for (Eigen::Index j = 0; j < 6; ++j) {
            CHECK(std::abs(k(i, j) - qkernel::kernel_entry(a.row(i).transpose(), b.row(j).transpose(), {3, 2}, {})) <
                  1e-12);
        }
    }
}

TEST_CASE("kernel cache round trip and layout", "[qkernel][io]") {
    std::mt19937_64 rng(47);
    const auto k = qkernel::kernel_matrix(random_rows(rng, 3, 2), {2, 1}, {});
    std::stringstream buf;
    qkernel::write_kernel_cache(k, buf);
    const std::string bytes = buf.str();
    REQUIRE(bytes.size() == 4 + 8 + 1 + 9 * 8);
    CHECK(bytes.substr(0, 4) == "QKM1");
    CHECK(static_cast<unsigned char>(bytes[4]) == 3);
    for (int i = 5; i < 12; ++i) {
        CHECK(bytes[static_cast<std::size_t>(i)] == 0);
    }
    CHECK(bytes[12] == 0);
    // Row-major little-endian doubles: entry (0, 1) starts at offset 13 + 8.
    double v01 = 0.0;
    unsigned char raw[8];
    for (int i = 0; i < 8; ++i) {
        raw[i] = static_cast<unsigned char>(bytes[21 + static_cast<std::size_t>(i)]);
    }
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) {
        bits = (bits << 8) | raw[i];
    }
    std::memcpy(&v01, &bits, 8);
    CHECK(v01 == k.values(0, 1));

    const auto back = qkernel::read_kernel_cache(buf);
    CHECK(back.values == k.values);
    CHECK_FALSE(back.sampled);

    const auto sampled = qkernel::kernel_matrix(random_rows(rng, 3, 2), {2, 1}, KernelMode::sampled(64, 1));
    const auto path = std::filesystem::temp_directory_path() / "qmlbench_cache_test.qkm";
    qkernel::write_kernel_cache(sampled, path);
    const auto loaded = qkernel::read_kernel_cache(path);
    CHECK(loaded.sampled);
    CHECK(loaded.values == sampled.values);
    std::filesystem::remove(path);

    std::stringstream bad("QKM2xxxxxxxxx");
    CHECK_THROWS(qkernel::read_kernel_cache(bad));
    std::stringstream truncated(bytes.substr(0, 30));
    CHECK_THROWS(qkernel::read_kernel_cache(truncated));
}
