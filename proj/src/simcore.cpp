#include "qmlbench/simcore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qmlbench/random.hpp"

namespace qmlbench::sim {

namespace {

void check_register_size(std::size_t num_qubits) {
    if (num_qubits == 0) {
        throw std::invalid_argument("register must have at least one qubit");
    }
    if (num_qubits > kMaxQubits) {
        throw std::invalid_argument("register of " + std::to_string(num_qubits) +
                                    " qubits exceeds the supported maximum of " +
                                    std::to_string(kMaxQubits));
    }
}

void check_targets(const Gate& gate, std::size_t num_qubits) {
    for (std::size_t q : gate.targets()) {
        if (q >= num_qubits) {
            throw std::out_of_range(std::string(gate_name(gate.kind)) + " target qubit " +
                                    std::to_string(q) + " out of range for " +
                                    std::to_string(num_qubits) + " qubits");
        }
    }
}

// 2x2 matrix stored row-major.
using Matrix2 = std::array<Complex, 4>;

void apply_single(std::span<Complex> amps, std::size_t q, const Matrix2& m) {
    const std::size_t bit = std::size_t{1} << q;
    const std::size_t dim = amps.size();
    for (std::size_t base = 0; base < dim; base += 2 * bit) {
        for (std::size_t i = base; i < base + bit; ++i) {
            const Complex a = amps[i];
            const Complex b = amps[i | bit];
            amps[i] = m[0] * a + m[1] * b;
            amps[i | bit] = m[2] * a + m[3] * b;
        }
    }
}

void apply_cnot(std::span<Complex> amps, std::size_t control, std::size_t target) {
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t tbit = std::size_t{1} << target;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & cbit) && !(i & tbit)) {
            std::swap(amps[i], amps[i | tbit]);
        }
    }
}

void apply_cz(std::span<Complex> amps, std::size_t a, std::size_t b) {
    const std::size_t mask = (std::size_t{1} << a) | (std::size_t{1} << b);
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & mask) == mask) {
            amps[i] = -amps[i];
        }
    }
}

// exp(-i t/2 Z(x)Z): phase e^{-it/2} on even parity, e^{+it/2} on odd parity.
void apply_zz(std::span<Complex> amps, std::size_t a, std::size_t b, double theta) {
    const Complex even = std::polar(1.0, -theta / 2.0);
    const Complex odd = std::polar(1.0, theta / 2.0);
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const bool parity = (((i >> a) ^ (i >> b)) & 1U) != 0;
        amps[i] *= parity ? odd : even;
    }
}

// exp(-i t/2 X(x)X) = cos(t/2) I - i sin(t/2) X(x)X; mixes i with i ^ mask.
void apply_xx(std::span<Complex> amps, std::size_t a, std::size_t b, double theta) {
    const std::size_t abit = std::size_t{1} << a;
    const std::size_t mask = abit | (std::size_t{1} << b);
    const double c = std::cos(theta / 2.0);
    const Complex mis{0.0, -std::sin(theta / 2.0)};
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if (i & abit) {
            continue;
        }
        const std::size_t j = i ^ mask;
        const Complex u = amps[i];
        const Complex v = amps[j];
        amps[i] = c * u + mis * v;
        amps[j] = c * v + mis * u;
    }
}

}  // namespace

StateVector StateVector::zero(std::size_t num_qubits) {
    return basis(num_qubits, 0);
}

StateVector StateVector::basis(std::size_t num_qubits, std::uint64_t index) {
    check_register_size(num_qubits);
    const std::size_t dim = std::size_t{1} << num_qubits;
    if (index >= dim) {
        throw std::out_of_range("basis index out of range");
    }
    std::vector<Complex> amps(dim);
    amps[index] = 1.0;
    return StateVector(num_qubits, std::move(amps));
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
    const std::size_t dim = amplitudes.size();
    if (dim < 2 || (dim & (dim - 1)) != 0) {
        throw std::invalid_argument("amplitude count must be a power of two >= 2, got " +
                                    std::to_string(dim));
    }
    const auto num_qubits = static_cast<std::size_t>(std::countr_zero(dim));
    check_register_size(num_qubits);
    double norm = 0.0;
    for (const auto& a : amplitudes) {
        norm += std::norm(a);
    }
    if (std::abs(norm - 1.0) > kNormTolerance) {
        throw std::invalid_argument("amplitudes are not normalized (squared norm " +
                                    std::to_string(norm) + ")");
    }
    return StateVector(num_qubits, std::move(amplitudes));
}

double StateVector::norm_squared() const {
    double total = 0.0;
    for (const auto& a : amplitudes_) {
        total += std::norm(a);
    }
    return total;
}

std::string_view gate_name(GateKind kind) {
    switch (kind) {
        case GateKind::H: return "H";
        case GateKind::X: return "X";
        case GateKind::Z: return "Z";
        case GateKind::RX: return "RX";
        case GateKind::RY: return "RY";
        case GateKind::RZ: return "RZ";
        case GateKind::CNOT: return "CNOT";
        case GateKind::CZ: return "CZ";
        case GateKind::XX: return "XX";
        case GateKind::ZZ: return "ZZ";
    }
    return "?";
}

std::size_t gate_arity(GateKind kind) {
    switch (kind) {
        case GateKind::CNOT:
        case GateKind::CZ:
        case GateKind::XX:
        case GateKind::ZZ:
            return 2;
        default:
            return 1;
    }
}

bool gate_is_parametric(GateKind kind) {
    switch (kind) {
        case GateKind::RX:
        case GateKind::RY:
        case GateKind::RZ:
        case GateKind::XX:
        case GateKind::ZZ:
            return true;
        default:
            return false;
    }
}

Gate Gate::make(GateKind kind, std::span<const std::size_t> targets, Angle angle) {
    if (targets.size() != gate_arity(kind)) {
        throw std::invalid_argument(std::string(gate_name(kind)) + " takes " +
                                    std::to_string(gate_arity(kind)) + " target(s)");
    }
    if (targets.size() == 2 && targets[0] == targets[1]) {
        throw std::invalid_argument(std::string(gate_name(kind)) + " targets must be distinct");
    }
    const bool has_angle = !std::holds_alternative<std::monostate>(angle);
    if (gate_is_parametric(kind) != has_angle) {
        throw std::invalid_argument(std::string(gate_name(kind)) +
                                    (has_angle ? " takes no parameter" : " requires a parameter"));
    }
    Gate g{kind, {}, angle};
    std::copy(targets.begin(), targets.end(), g.qubits.begin());
    return g;
}

Gate Gate::h(std::size_t q) { return make(GateKind::H, std::array{q}); }
Gate Gate::x(std::size_t q) { return make(GateKind::X, std::array{q}); }
Gate Gate::z(std::size_t q) { return make(GateKind::Z, std::array{q}); }
Gate Gate::rx(std::size_t q, Angle angle) { return make(GateKind::RX, std::array{q}, angle); }
Gate Gate::ry(std::size_t q, Angle angle) { return make(GateKind::RY, std::array{q}, angle); }
Gate Gate::rz(std::size_t q, Angle angle) { return make(GateKind::RZ, std::array{q}, angle); }
Gate Gate::cnot(std::size_t control, std::size_t target) {
    return make(GateKind::CNOT, std::array{control, target});
}
Gate Gate::cz(std::size_t a, std::size_t b) { return make(GateKind::CZ, std::array{a, b}); }
Gate Gate::xx(std::size_t a, std::size_t b, Angle angle) {
    return make(GateKind::XX, std::array{a, b}, angle);
}
Gate Gate::zz(std::size_t a, std::size_t b, Angle angle) {
    return make(GateKind::ZZ, std::array{a, b}, angle);
}

Circuit::Circuit(std::size_t num_qubits, std::size_t num_free_parameters)
    : num_qubits_(num_qubits), num_free_parameters_(num_free_parameters) {
    check_register_size(num_qubits);
}

Circuit& Circuit::add(const Gate& gate) {
    check_targets(gate, num_qubits_);
    if (const auto* p = std::get_if<Param>(&gate.angle); p && p->index >= num_free_parameters_) {
        throw std::out_of_range("symbolic parameter " + std::to_string(p->index) +
                                " out of range for " + std::to_string(num_free_parameters_) +
                                " free parameters");
    }
    gates_.push_back(gate);
    return *this;
}

Circuit Circuit::inverse() const {
    Circuit inv(num_qubits_, num_free_parameters_);
    inv.gates_.reserve(gates_.size());
    for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) {
        Gate g = *it;
        if (!g.is_bound()) {
            throw std::invalid_argument("cannot invert a circuit with unbound parameters");
        }
        if (const auto* a = std::get_if<double>(&g.angle)) {
            g.angle = -*a;
        }
        inv.gates_.push_back(g);
    }
    return inv;
}

Circuit Circuit::widened(std::size_t num_qubits) const {
    if (num_qubits < num_qubits_) {
        throw std::invalid_argument("cannot narrow a circuit");
    }
    Circuit wide(num_qubits, num_free_parameters_);
    wide.gates_ = gates_;
    return wide;
}

Circuit& Circuit::append(const Circuit& other) {
    if (other.num_qubits_ > num_qubits_) {
        throw std::invalid_argument("appended circuit is wider than the target circuit");
    }
    const std::size_t offset = num_free_parameters_;
    num_free_parameters_ += other.num_free_parameters_;
    for (Gate g : other.gates_) {
        if (auto* p = std::get_if<Param>(&g.angle)) {
            p->index += offset;
        }
        gates_.push_back(g);
    }
    return *this;
}

bool Circuit::same_structure(const Circuit& other) const {
    if (num_qubits_ != other.num_qubits_ || gates_.size() != other.gates_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < gates_.size(); ++i) {
        if (gates_[i].kind != other.gates_[i].kind || gates_[i].qubits != other.gates_[i].qubits) {
            return false;
        }
    }
    return true;
}

double resolve_angle(const Gate& gate, std::span<const double> parameter_values) {
    if (const auto* a = std::get_if<double>(&gate.angle)) {
        return *a;
    }
    if (const auto* p = std::get_if<Param>(&gate.angle)) {
        if (p->index >= parameter_values.size()) {
            throw std::invalid_argument("unbound symbolic parameter " + std::to_string(p->index));
        }
        return parameter_values[p->index];
    }
    return 0.0;
}

void apply_gate_in_place(StateVector& state, const Gate& gate,
                         std::span<const double> parameter_values) {
    check_targets(gate, state.num_qubits());
    auto amps = state.data();
    const std::size_t q0 = gate.qubits[0];
    const std::size_t q1 = gate.qubits[1];
    const double theta = resolve_angle(gate, parameter_values);
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    switch (gate.kind) {
        case GateKind::H: {
            const double r = 1.0 / std::sqrt(2.0);
            apply_single(amps, q0, {r, r, r, -r});
            break;
        }
        case GateKind::X:
            apply_single(amps, q0, {0.0, 1.0, 1.0, 0.0});
            break;
        case GateKind::Z:
            apply_single(amps, q0, {1.0, 0.0, 0.0, -1.0});
            break;
        case GateKind::RX:
            apply_single(amps, q0, {c, Complex{0, -s}, Complex{0, -s}, c});
            break;
        case GateKind::RY:
            apply_single(amps, q0, {c, -s, s, c});
            break;
        case GateKind::RZ:
            apply_single(amps, q0, {std::polar(1.0, -theta / 2.0), 0.0, 0.0,
                                    std::polar(1.0, theta / 2.0)});
            break;
        case GateKind::CNOT:
            apply_cnot(amps, q0, q1);
            break;
        case GateKind::CZ:
            apply_cz(amps, q0, q1);
            break;
        case GateKind::XX:
            apply_xx(amps, q0, q1, theta);
            break;
        case GateKind::ZZ:
            apply_zz(amps, q0, q1, theta);
            break;
    }
}

StateVector apply_gate(StateVector state, const Gate& gate) {
    if (!gate.is_bound()) {
        throw std::invalid_argument("apply_gate requires a bound parameter");
    }
    apply_gate_in_place(state, gate);
    return state;
}

void apply_circuit_in_place(StateVector& state, const Circuit& circuit,
                            std::span<const double> parameter_values) {
    if (state.num_qubits() != circuit.num_qubits()) {
        throw std::invalid_argument("circuit acts on " + std::to_string(circuit.num_qubits()) +
                                    " qubits but the state has " +
                                    std::to_string(state.num_qubits()));
    }
    if (parameter_values.size() != circuit.num_free_parameters()) {
        throw std::invalid_argument("expected " + std::to_string(circuit.num_free_parameters()) +
                                    " parameter values, got " +
                                    std::to_string(parameter_values.size()));
    }
    for (const auto& gate : circuit.gates()) {
        apply_gate_in_place(state, gate, parameter_values);
    }
}

StateVector run_circuit(const Circuit& circuit, std::span<const double> parameter_values,
                        const std::optional<StateVector>& initial) {
    StateVector state = initial ? *initial : StateVector::zero(circuit.num_qubits());
    apply_circuit_in_place(state, circuit, parameter_values);
    return state;
}

double expectation(const StateVector& state, const PauliObservable& obs) {
    // <psi|P|psi> = sum_j conj(psi[j ^ flip]) * phase(j) * psi[j]
    std::uint64_t flip = 0;
    std::uint64_t z_mask = 0;
    std::uint64_t y_mask = 0;
    for (const auto& [q, p] : obs.factors) {
        if (q >= state.num_qubits()) {
            throw std::out_of_range("observable qubit " + std::to_string(q) + " out of range");
        }
        const std::uint64_t bit = std::uint64_t{1} << q;
        switch (p) {
            case Pauli::X: flip |= bit; break;
            case Pauli::Y: flip |= bit; y_mask |= bit; break;
            case Pauli::Z: z_mask |= bit; break;
        }
    }
    const auto amps = state.amplitudes();
    // Y|0> = i|1>, Y|1> = -i|0>
    const int num_y = std::popcount(y_mask);
    const Complex y_base = std::pow(Complex{0.0, 1.0}, num_y);
    Complex total = 0.0;
    for (std::uint64_t j = 0; j < amps.size(); ++j) {
        int sign_bits = std::popcount(j & z_mask) + std::popcount(j & y_mask);
        Complex phase = y_base;
        if (sign_bits & 1) {
            phase = -phase;
        }
        total += std::conj(amps[j ^ flip]) * phase * amps[j];
    }
    return total.real();
}

double fidelity_overlap(const StateVector& a, const StateVector& b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw std::invalid_argument("fidelity of states with different qubit counts");
    }
    Complex inner = 0.0;
    const auto x = a.amplitudes();
    const auto y = b.amplitudes();
    for (std::size_t i = 0; i < x.size(); ++i) {
        inner += std::conj(y[i]) * x[i];
    }
    return std::clamp(std::norm(inner), 0.0, 1.0);
}

std::vector<double> probabilities(const StateVector& state) {
    std::vector<double> p(state.dimension());
    const auto amps = state.amplitudes();
    std::transform(amps.begin(), amps.end(), p.begin(), [](const Complex& a) { return std::norm(a); });
    return p;
}

std::map<std::uint64_t, std::size_t> sample_indices(const StateVector& state, std::size_t shots,
                                                    std::uint64_t seed) {
    if (shots == 0) {
        throw std::invalid_argument("shots must be positive");
    }
    std::vector<double> cumulative = probabilities(state);
    std::partial_sum(cumulative.begin(), cumulative.end(), cumulative.begin());
    const double total = cumulative.back();
    Rng rng(seed);
    std::map<std::uint64_t, std::size_t> counts;
    for (std::size_t s = 0; s < shots; ++s) {
        // upper_bound skips zero-probability outcomes, whose cumulative value
        // equals their predecessor's.
        const double u = uniform01(rng) * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) {
            --it;
        }
        auto index = static_cast<std::uint64_t>(it - cumulative.begin());
        ++counts[index];
    }
    return counts;
}

std::string bitstring(std::uint64_t index, std::size_t num_qubits) {
    std::string bits(num_qubits, '0');
    for (std::size_t q = 0; q < num_qubits; ++q) {
        if ((index >> q) & 1U) {
            bits[num_qubits - 1 - q] = '1';
        }
    }
    return bits;
}

std::map<std::string, std::size_t> sample_measurements(const StateVector& state, std::size_t shots,
                                                        std::uint64_t seed) {
    std::map<std::string, std::size_t> counts;
    for (const auto& [index, count] : sample_indices(state, shots, seed)) {
        counts[bitstring(index, state.num_qubits())] = count;
    }
    return counts;
}

}  // namespace qmlbench::sim
