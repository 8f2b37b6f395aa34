// Copyright 2026 The qgt Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// Dense statevector simulation.
//
// Bit order: qubit 0 is the most significant bit of a basis index, so the
// basis label |q0 q1 ... q_{n-1}> reads left to right as a binary number.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgt/random.hpp"

namespace qgt {

inline constexpr int kMaxQubits = 26;

enum class Pauli { X, Y, Z };

template <typename Scalar>
using Matrix2 = Eigen::Matrix<std::complex<Scalar>, 2, 2>;
template <typename Scalar>
using Matrix4 = Eigen::Matrix<std::complex<Scalar>, 4, 4>;

/// exp(-i angle P / 2).
template <typename Scalar>
Matrix2<Scalar> rotation_matrix(Pauli axis, Scalar angle) {
  using C = std::complex<Scalar>;
  const Scalar c = std::cos(angle / 2);
  const Scalar s = std::sin(angle / 2);
  Matrix2<Scalar> u;
  switch (axis) {
    case Pauli::X:
      u << C(c, 0), C(0, -s), C(0, -s), C(c, 0);
      break;
    case Pauli::Y:
      u << C(c, 0), C(-s, 0), C(s, 0), C(c, 0);
      break;
    case Pauli::Z:
      u << std::polar(Scalar(1), -angle / 2), C(0, 0), C(0, 0),
          std::polar(Scalar(1), angle / 2);
      break;
  }
  return u;
}

/// Two-qubit gate commuting with the excitation number: phases on |00> and
/// |11>, and a general U(2) block on span{|01>, |10>}.
/// angles = {phi00, phi11, delta, alpha, beta, t}; block is
/// e^{i delta} [[e^{i alpha} cos t, -e^{-i beta} sin t], [e^{i beta} sin t, e^{-i alpha} cos t]].
template <typename Scalar>
Matrix4<Scalar> number_conserving_matrix(const std::array<Scalar, 6>& angles) {
  using C = std::complex<Scalar>;
  const auto [phi00, phi11, delta, alpha, beta, t] = angles;
  const C g = std::polar(Scalar(1), delta);
  Matrix4<Scalar> u = Matrix4<Scalar>::Zero();
  u(0, 0) = std::polar(Scalar(1), phi00);
  u(1, 1) = g * std::polar(std::cos(t), alpha);
  u(1, 2) = -g * std::polar(std::sin(t), -beta);
  u(2, 1) = g * std::polar(std::sin(t), beta);
  u(2, 2) = g * std::polar(std::cos(t), -alpha);
  u(3, 3) = std::polar(Scalar(1), phi11);
  return u;
}

template <typename Scalar>
Matrix4<Scalar> controlled_z_matrix() {
  Matrix4<Scalar> u = Matrix4<Scalar>::Identity();
  u(3, 3) = -1;
  return u;
}

template <typename Scalar>
class BasicState {
 public:
  using Complex = std::complex<Scalar>;
  using Vector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
  using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  /// |0...0> on n qubits.
  explicit BasicState(int n) : n_(check_qubits(n)), amps_(Vector::Zero(dim_of(n))) {
    amps_(0) = Complex(1);
  }

  static BasicState basis(int n, std::uint64_t index) {
    BasicState s(n);
    if (index >= s.dimension()) throw std::invalid_argument("basis index out of range");
    s.amps_(0) = Complex(0);
    s.amps_(static_cast<Eigen::Index>(index)) = Complex(1);
    return s;
  }

  /// Takes ownership of an amplitude vector; it must have length 2^n and unit
  /// norm.
  static BasicState from_amplitudes(int n, Vector amps) {
    BasicState s(n);
    if (amps.size() != s.amps_.size())
      throw std::invalid_argument("amplitude vector length must be 2^n");
    if (std::abs(amps.norm() - Scalar(1)) > Scalar(1e-8))
      throw std::invalid_argument("amplitude vector must be normalized");
    s.amps_ = std::move(amps);
    return s;
  }

  int num_qubits() const { return n_; }
  std::uint64_t dimension() const { return static_cast<std::uint64_t>(amps_.size()); }
  const Vector& amplitudes() const { return amps_; }
  Scalar norm() const { return amps_.norm(); }
  RealVector probabilities() const { return amps_.cwiseAbs2(); }

  void apply_single(const Matrix2<Scalar>& u, int q) {
    check_target(q);
    const std::uint64_t stride = bit_of(q);
    const std::uint64_t dim = dimension();
    for (std::uint64_t base = 0; base < dim; base += 2 * stride) {
      for (std::uint64_t i = base; i < base + stride; ++i) {
        const Complex a0 = amps_(i);
        const Complex a1 = amps_(i + stride);
        amps_(i) = u(0, 0) * a0 + u(0, 1) * a1;
        amps_(i + stride) = u(1, 0) * a0 + u(1, 1) * a1;
      }
    }
  }

  /// Applies u in the local basis |q0 q1> with q0 as the high bit.
  void apply_pair(const Matrix4<Scalar>& u, int q0, int q1) {
    check_target(q0);
    check_target(q1);
    if (q0 == q1) throw std::invalid_argument("two-qubit gate needs distinct targets");
    const std::uint64_t b0 = bit_of(q0);
    const std::uint64_t b1 = bit_of(q1);
    const std::uint64_t dim = dimension();
    for (std::uint64_t i = 0; i < dim; ++i) {
      if ((i & b0) || (i & b1)) continue;
      const std::array<std::uint64_t, 4> idx{i, i | b1, i | b0, i | b0 | b1};
      Eigen::Matrix<Complex, 4, 1> v;
      for (int k = 0; k < 4; ++k) v(k) = amps_(idx[k]);
      const Eigen::Matrix<Complex, 4, 1> w = u * v;
      for (int k = 0; k < 4; ++k) amps_(idx[k]) = w(k);
    }
  }

  void apply_controlled_z(int q0, int q1) {
    check_target(q0);
    check_target(q1);
    if (q0 == q1) throw std::invalid_argument("two-qubit gate needs distinct targets");
    const std::uint64_t mask = bit_of(q0) | bit_of(q1);
    const std::uint64_t dim = dimension();
    for (std::uint64_t i = 0; i < dim; ++i)
      if ((i & mask) == mask) amps_(i) = -amps_(i);
  }

 private:
  static int check_qubits(int n) {
    if (n < 1 || n > kMaxQubits)
      throw std::invalid_argument("qubit count must be in [1, " +
                                  std::to_string(kMaxQubits) + "]");
    return n;
  }
  static Eigen::Index dim_of(int n) { return Eigen::Index(1) << n; }
  std::uint64_t bit_of(int q) const { return std::uint64_t(1) << (n_ - 1 - q); }
  void check_target(int q) const {
    if (q < 0 || q >= n_) throw std::invalid_argument("target qubit out of range");
  }

  int n_;
  Vector amps_;
};

using QuantumState = BasicState<double>;

enum class GateKind { Rotation, NumberConserving, ControlledZ };

struct Gate {
  GateKind kind = GateKind::Rotation;
  Pauli axis = Pauli::Z;  // rotations only
  std::array<int, 2> targets{-1, -1};
  std::optional<int> param_index;
  std::vector<double> fixed_angles;

  static Gate rotation(Pauli axis, int qubit, int param) {
    return Gate{GateKind::Rotation, axis, {qubit, -1}, param, {}};
  }
  static Gate fixed_rotation(Pauli axis, int qubit, double angle) {
    return Gate{GateKind::Rotation, axis, {qubit, -1}, std::nullopt, {angle}};
  }
  static Gate number_conserving(int q0, int q1, const std::array<double, 6>& angles) {
    return Gate{GateKind::NumberConserving, Pauli::Z, {q0, q1}, std::nullopt,
                {angles.begin(), angles.end()}};
  }
  static Gate controlled_z(int q0, int q1) {
    return Gate{GateKind::ControlledZ, Pauli::Z, {q0, q1}, std::nullopt, {}};
  }

  int arity() const { return kind == GateKind::Rotation ? 1 : 2; }
  bool operator==(const Gate&) const = default;
};

enum class CircuitRole { Teacher, Student };

struct ParamCircuit {
  int num_qubits = 0;
  std::vector<Gate> gates;
  int num_params = 0;
  CircuitRole role = CircuitRole::Student;

  /// Throws std::invalid_argument on malformed targets, parameter indices out
  /// of range, unused parameters or parameterized non-rotation gates.
  void validate() const;
  bool operator==(const ParamCircuit&) const = default;
};

/// Teacher brickwork depth ceil((n/4)^2).
int teacher_depth(int n);

/// |1..10..0> with ones on qubits 0..n/2-1.
QuantumState domain_wall_state(int n);

/// Brickwork of number-conserving gates on alternating even/odd bonds,
/// teacher_depth(n) layers, angles drawn from `seed`.
ParamCircuit build_teacher(int n, std::uint64_t seed);

/// Hardware-efficient layers: RY and RZ on every qubit (each its own
/// parameter), then a CZ ladder on bonds (i, i+1). P = 2 n depth.
ParamCircuit build_student(int n, int depth);

/// Uniform draw from [0, 2 pi)^P.
Eigen::VectorXd initial_parameters(const ParamCircuit& circuit, std::uint64_t seed);

template <typename Scalar>
void apply_gate(BasicState<Scalar>& state, const Gate& gate, const Eigen::VectorXd& theta) {
  switch (gate.kind) {
    case GateKind::Rotation: {
      const double angle =
          gate.param_index ? theta(*gate.param_index) : gate.fixed_angles.at(0);
      state.apply_single(rotation_matrix<Scalar>(gate.axis, static_cast<Scalar>(angle)),
                         gate.targets[0]);
      break;
    }
    case GateKind::NumberConserving: {
      if (gate.fixed_angles.size() != 6)
        throw std::invalid_argument("number-conserving gate needs 6 angles");
      std::array<Scalar, 6> a;
      for (int k = 0; k < 6; ++k) a[k] = static_cast<Scalar>(gate.fixed_angles[k]);
      state.apply_pair(number_conserving_matrix<Scalar>(a), gate.targets[0], gate.targets[1]);
      break;
    }
    case GateKind::ControlledZ:
      state.apply_controlled_z(gate.targets[0], gate.targets[1]);
      break;
  }
}

/// Applies every gate of `circuit` in order to a copy of `input`.
template <typename Scalar>
BasicState<Scalar> run(const ParamCircuit& circuit, BasicState<Scalar> input,
                       const Eigen::VectorXd& theta) {
  if (theta.size() != circuit.num_params)
    throw std::invalid_argument("parameter vector length does not match circuit");
  if (input.num_qubits() != circuit.num_qubits)
    throw std::invalid_argument("input state qubit count does not match circuit");
  for (const Gate& g : circuit.gates) apply_gate(input, g, theta);
  return input;
}

using Histogram = std::map<std::uint64_t, std::uint64_t>;

/// `shots` i.i.d. computational-basis outcomes; only observed outcomes are
/// keyed.
template <typename Scalar>
Histogram sample(const BasicState<Scalar>& state, std::uint64_t shots, Rng& rng) {
  if (shots < 1) throw std::invalid_argument("sample: shot count must be >= 1");
  const Eigen::VectorXd probs = state.probabilities().template cast<double>();
  const std::vector<std::uint64_t> counts = multinomial(probs, shots, rng);
  Histogram h;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0) h.emplace(i, counts[i]);
  return h;
}

/// Parses an n-character string of '0'/'1' into a basis index (qubit 0
/// leftmost).
std::uint64_t parse_bitstring(const std::string& bits);
std::string format_bitstring(std::uint64_t index, int n);

}  // namespace qgt
