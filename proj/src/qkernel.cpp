#include "qmlbench/qkernel.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmlbench/parallel.hpp"
#include "qmlbench/random.hpp"

namespace qmlbench::qkernel {

namespace {

constexpr std::array<char, 4> kMagic{'Q', 'K', 'M', '1'};
constexpr std::uint64_t kCrossStream = 0xc705'5000'0000'0001ULL;

void check_arity(const Eigen::VectorXd& x, const FeatureMapSpec& spec) {
    if (static_cast<std::size_t>(x.size()) != spec.num_qubits) {
        throw std::invalid_argument("feature map expects " + std::to_string(spec.num_qubits) +
                                    " features, got " + std::to_string(x.size()));
    }
}

double sampled_overlap(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const FeatureMapSpec& spec,
                       std::size_t shots, std::uint64_t seed) {
    sim::Circuit test = feature_map_circuit(x, spec);
    test.append(feature_map_circuit(y, spec).inverse());
    const auto state = sim::run_circuit(test, {});
    const auto counts = sim::sample_indices(state, shots, seed);
    const auto zeros = counts.find(0);
    const std::size_t hits = zeros == counts.end() ? 0 : zeros->second;
    return static_cast<double>(hits) / static_cast<double>(shots);
}

template <typename T>
void write_le(std::ostream& out, T value) {
    static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes.begin(), bytes.end());
    }
    out.write(bytes.data(), bytes.size());
}

template <typename T>
T read_le(std::istream& in) {
    std::array<char, sizeof(T)> bytes;
    if (!in.read(bytes.data(), bytes.size())) {
        throw std::runtime_error("kernel cache truncated");
    }
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes.begin(), bytes.end());
    }
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

}  // namespace

void FeatureMapSpec::validate() const {
    if (num_qubits == 0) {
        throw std::invalid_argument("feature map needs at least one qubit");
    }
    if (depth == 0) {
        throw std::invalid_argument("feature map depth must be >= 1");
    }
}

sim::Circuit feature_map_circuit(const Eigen::VectorXd& x, const FeatureMapSpec& spec) {
    spec.validate();
    check_arity(x, spec);
    const std::size_t n = spec.num_qubits;
    sim::Circuit circuit(n);
    for (std::size_t rep = 0; rep < spec.depth; ++rep) {
        for (std::size_t q = 0; q < n; ++q) {
            circuit.add(sim::Gate::h(q));
        }
        for (std::size_t q = 0; q < n; ++q) {
            circuit.add(sim::Gate::rz(q, 2.0 * std::numbers::pi * x(static_cast<Eigen::Index>(q))));
        }
        for (std::size_t q = 0; q + 1 < n; ++q) {
            const double product = x(static_cast<Eigen::Index>(q)) * x(static_cast<Eigen::Index>(q + 1));
            circuit.add(sim::Gate::zz(q, q + 1, std::numbers::pi * product));
        }
    }
    return circuit;
}

sim::StateVector feature_state(const Eigen::VectorXd& x, const FeatureMapSpec& spec) {
    return sim::run_circuit(feature_map_circuit(x, spec), {});
}

std::uint64_t entry_seed(const KernelMode& mode, std::size_t i, std::size_t j) {
    return derive_seed(mode.seed, i, j);
}

double kernel_entry(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const FeatureMapSpec& spec,
                    const KernelMode& mode) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("kernel arguments differ in length");
    }
    if (mode.exact()) {
        return sim::fidelity_overlap(feature_state(x, spec), feature_state(y, spec));
    }
    return sampled_overlap(x, y, spec, mode.shots, mode.seed);
}

KernelMatrix kernel_matrix(const Eigen::MatrixXd& rows, const FeatureMapSpec& spec, const KernelMode& mode) {
    if (rows.rows() == 0) {
        throw std::invalid_argument("kernel_matrix: no input rows");
    }
    spec.validate();
    const auto n = static_cast<std::size_t>(rows.rows());
    KernelMatrix out{Eigen::MatrixXd::Identity(rows.rows(), rows.rows()), !mode.exact(), mode.shots};
    if (mode.exact()) {
        std::vector<std::optional<sim::StateVector>> states(n);
        parallel_for(n, [&](std::size_t i) {
            states[i] = feature_state(rows.row(static_cast<Eigen::Index>(i)).transpose(), spec);
        });
        parallel_for(n, [&](std::size_t i) {
            const auto ii = static_cast<Eigen::Index>(i);
            for (std::size_t j = i; j < n; ++j) {
                out.values(ii, static_cast<Eigen::Index>(j)) = sim::fidelity_overlap(*states[i], *states[j]);
            }
        });
    } else {
        // Row i covers j > i, so each row writes its own slots.
        parallel_for(n, [&](std::size_t i) {
            const auto ii = static_cast<Eigen::Index>(i);
            const Eigen::VectorXd xi = rows.row(ii).transpose();
            for (std::size_t j = i + 1; j < n; ++j) {
                const auto jj = static_cast<Eigen::Index>(j);
                out.values(ii, jj) =
                    sampled_overlap(xi, rows.row(jj).transpose(), spec, mode.shots, entry_seed(mode, i, j));
            }
        });
    }
    out.values.triangularView<Eigen::StrictlyLower>() = out.values.transpose();
    return out;
}

Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const FeatureMapSpec& spec,
                             const KernelMode& mode) {
    spec.validate();
    const auto na = static_cast<std::size_t>(a.rows());
    const auto nb = static_cast<std::size_t>(b.rows());
    Eigen::MatrixXd out(a.rows(), b.rows());
    if (mode.exact()) {
        std::vector<std::optional<sim::StateVector>> sa(na);
        std::vector<std::optional<sim::StateVector>> sb(nb);
        parallel_for(na, [&](std::size_t i) { sa[i] = feature_state(a.row(static_cast<Eigen::Index>(i)).transpose(), spec); });
        parallel_for(nb, [&](std::size_t j) { sb[j] = feature_state(b.row(static_cast<Eigen::Index>(j)).transpose(), spec); });
        parallel_for(na, [&](std::size_t i) {
            for (std::size_t j = 0; j < nb; ++j) {
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sim::fidelity_overlap(*sa[i], *sb[j]);
            }
        });
        return out;
    }
    const KernelMode stream{mode.shots, derive_seed(mode.seed, kCrossStream)};
    parallel_for(na, [&](std::size_t i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const Eigen::VectorXd x = a.row(ii).transpose();
        for (std::size_t j = 0; j < nb; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            out(ii, jj) = sampled_overlap(x, b.row(jj).transpose(), spec, mode.shots, entry_seed(stream, i, j));
        }
    });
    return out;
}

void write_kernel_cache(const KernelMatrix& kernel, std::ostream& out) {
    out.write(kMagic.data(), kMagic.size());
    const auto n = static_cast<std::uint64_t>(kernel.values.rows());
    write_le<std::uint64_t>(out, n);
    const std::uint8_t mode = kernel.sampled ? 1 : 0;
    out.put(static_cast<char>(mode));
    for (Eigen::Index i = 0; i < kernel.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < kernel.values.cols(); ++j) {
            write_le<double>(out, kernel.values(i, j));
        }
    }
    if (!out) {
        throw std::runtime_error("failed to write kernel cache");
    }
}

void write_kernel_cache(const KernelMatrix& kernel, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    write_kernel_cache(kernel, out);
}

KernelMatrix read_kernel_cache(std::istream& in) {
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
        throw std::runtime_error("not a kernel cache file (bad magic)");
    }
    const auto n = read_le<std::uint64_t>(in);
    // 2^16 rows is already a 32 GiB matrix.
    if (n == 0 || n > (std::uint64_t{1} << 16)) {
        throw std::runtime_error("kernel cache has an implausible size " + std::to_string(n));
    }
    const int mode_byte = in.get();
    if (mode_byte != 0 && mode_byte != 1) {
        throw std::runtime_error("kernel cache has an unknown mode byte");
    }
    KernelMatrix kernel;
    kernel.sampled = mode_byte == 1;
    const auto size = static_cast<Eigen::Index>(n);
    kernel.values.resize(size, size);
    for (Eigen::Index i = 0; i < size; ++i) {
        for (Eigen::Index j = 0; j < size; ++j) {
            kernel.values(i, j) = read_le<double>(in);
        }
    }
    return kernel;
}

KernelMatrix read_kernel_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return read_kernel_cache(in);
}

}  // namespace qmlbench::qkernel
