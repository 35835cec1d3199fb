#pragma once

// Exact statevector simulation of small circuits.
//
// Conventions used throughout the project:
//  * qubit q is bit q of the amplitude index (qubit 0 is least significant);
//  * rotations are half-angle: R_P(t) = exp(-i t/2 P), XX(t) = exp(-i t/2 X(x)X),
//    ZZ(t) = exp(-i t/2 Z(x)Z);
//  * CNOT(control, target) lists the control first.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace qmlbench::sim {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 24;
inline constexpr double kNormTolerance = 1e-9;

class StateVector {
public:
    // |0...0>
    static StateVector zero(std::size_t num_qubits);
    static StateVector basis(std::size_t num_qubits, std::uint64_t index);
    // Length must be a power of two and the vector normalized within 1e-9.
    static StateVector from_amplitudes(std::vector<Complex> amplitudes);

    std::size_t num_qubits() const { return num_qubits_; }
    std::size_t dimension() const { return amplitudes_.size(); }
    std::span<const Complex> amplitudes() const { return amplitudes_; }
    const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }
    double norm_squared() const;

    // Raw access for gate kernels. Callers are responsible for keeping the
    // state normalized.
    std::span<Complex> data() { return amplitudes_; }

private:
    StateVector(std::size_t num_qubits, std::vector<Complex> amplitudes)
        : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {}

    std::size_t num_qubits_;
    std::vector<Complex> amplitudes_;
};

enum class GateKind { H, X, Z, RX, RY, RZ, CNOT, CZ, XX, ZZ };

std::string_view gate_name(GateKind kind);
std::size_t gate_arity(GateKind kind);
bool gate_is_parametric(GateKind kind);

// Symbolic angle: resolved as parameter_values[index] at run time.
struct Param {
    std::size_t index;
    bool operator==(const Param&) const = default;
};

using Angle = std::variant<std::monostate, double, Param>;

struct Gate {
    GateKind kind;
    std::array<std::size_t, 2> qubits{};
    Angle angle;

    std::size_t arity() const { return gate_arity(kind); }
    std::span<const std::size_t> targets() const { return {qubits.data(), arity()}; }
    bool is_bound() const { return !std::holds_alternative<Param>(angle); }

    static Gate h(std::size_t q);
    static Gate x(std::size_t q);
    static Gate z(std::size_t q);
    static Gate rx(std::size_t q, Angle angle);
    static Gate ry(std::size_t q, Angle angle);
    static Gate rz(std::size_t q, Angle angle);
    static Gate cnot(std::size_t control, std::size_t target);
    static Gate cz(std::size_t a, std::size_t b);
    static Gate xx(std::size_t a, std::size_t b, Angle angle);
    static Gate zz(std::size_t a, std::size_t b, Angle angle);

    // Checked constructor used by the named factories.
    static Gate make(GateKind kind, std::span<const std::size_t> targets, Angle angle = {});

    bool operator==(const Gate&) const = default;
};

class Circuit {
public:
    explicit Circuit(std::size_t num_qubits, std::size_t num_free_parameters = 0);

    std::size_t num_qubits() const { return num_qubits_; }
    std::size_t num_free_parameters() const { return num_free_parameters_; }
    const std::vector<Gate>& gates() const { return gates_; }
    std::size_t size() const { return gates_.size(); }

    // Throws if a target or symbolic index is out of range.
    Circuit& add(const Gate& gate);

    // Gates in reverse order with negated angles. Requires a bound circuit.
    Circuit inverse() const;
    // Same gates on a register of at least num_qubits() qubits.
    Circuit widened(std::size_t num_qubits) const;
    // Appends `other`, whose symbolic indices are offset by num_free_parameters().
    Circuit& append(const Circuit& other);

    // True when both circuits have the same gate kinds and targets in the
    // same order, regardless of angle values.
    bool same_structure(const Circuit& other) const;

    bool operator==(const Circuit&) const = default;

private:
    std::size_t num_qubits_;
    std::size_t num_free_parameters_;
    std::vector<Gate> gates_;
};

enum class Pauli { X, Y, Z };

struct PauliObservable {
    std::map<std::size_t, Pauli> factors;

    static PauliObservable z(std::size_t q) { return {{{q, Pauli::Z}}}; }
};

// Resolves a gate's angle against parameter_values. Throws on an unbound
// symbol when parameter_values is too short.
double resolve_angle(const Gate& gate, std::span<const double> parameter_values);

void apply_gate_in_place(StateVector& state, const Gate& gate,
                         std::span<const double> parameter_values = {});

StateVector apply_gate(StateVector state, const Gate& gate);

// Applies the circuit's gates to an existing register of matching width.
void apply_circuit_in_place(StateVector& state, const Circuit& circuit,
                            std::span<const double> parameter_values);

StateVector run_circuit(const Circuit& circuit, std::span<const double> parameter_values,
                        const std::optional<StateVector>& initial = std::nullopt);

double expectation(const StateVector& state, const PauliObservable& obs);

// |<b|a>|^2
double fidelity_overlap(const StateVector& a, const StateVector& b);

std::vector<double> probabilities(const StateVector& state);

// Outcome counts keyed by basis index.
std::map<std::uint64_t, std::size_t> sample_indices(const StateVector& state, std::size_t shots,
                                                    std::uint64_t seed);

// Bitstrings are written most-significant qubit first, so qubit 0 is the
// rightmost character.
std::string bitstring(std::uint64_t index, std::size_t num_qubits);

std::map<std::string, std::size_t> sample_measurements(const StateVector& state, std::size_t shots,
                                                        std::uint64_t seed);

}  // namespace qmlbench::sim
