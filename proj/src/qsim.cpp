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
#include "qgt/qsim.hpp"

#include <numbers>

namespace qgt {

void ParamCircuit::validate() const {
  if (num_qubits < 1 || num_qubits > kMaxQubits)
    throw std::invalid_argument("circuit qubit count out of range");
  if (num_params < 0) throw std::invalid_argument("negative parameter count");
  std::vector<int> uses(num_params, 0);
  for (const Gate& g : gates) {
    for (int k = 0; k < g.arity(); ++k) {
      if (g.targets[k] < 0 || g.targets[k] >= num_qubits)
        throw std::invalid_argument("gate target out of range");
    }
    if (g.arity() == 2 && g.targets[0] == g.targets[1])
      throw std::invalid_argument("two-qubit gate targets must be distinct");
    if (g.param_index) {
      if (g.kind != GateKind::Rotation)
        throw std::invalid_argument("only single-qubit rotations may be trainable");
      if (*g.param_index < 0 || *g.param_index >= num_params)
        throw std::invalid_argument("gate parameter index out of range");
      ++uses[*g.param_index];
    } else if (g.kind == GateKind::Rotation && g.fixed_angles.size() != 1) {
      throw std::invalid_argument("fixed rotation needs exactly one angle");
    } else if (g.kind == GateKind::NumberConserving && g.fixed_angles.size() != 6) {
      throw std::invalid_argument("number-conserving gate needs 6 angles");
    }
  }
  for (int k = 0; k < num_params; ++k)
    if (uses[k] == 0)
      throw std::invalid_argument("parameter " + std::to_string(k) + " is never used");
}

int teacher_depth(int n) {
  // ceil((n/4)^2) = ceil(n^2 / 16) in integers.
  return (n * n + 15) / 16;
}

QuantumState domain_wall_state(int n) {
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("domain wall needs an even qubit count >= 2");
  std::uint64_t index = 0;
  for (int q = 0; q < n / 2; ++q) index |= std::uint64_t(1) << (n - 1 - q);
  return QuantumState::basis(n, index);
}

ParamCircuit build_teacher(int n, std::uint64_t seed) {
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("teacher needs an even n >= 4");
  ParamCircuit c;
  c.num_qubits = n;
  c.role = CircuitRole::Teacher;
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const int depth = teacher_depth(n);
  for (int layer = 0; layer < depth; ++layer) {
    for (int q = layer % 2; q + 1 < n; q += 2) {
      std::array<double, 6> a;
      for (double& x : a) x = angle(rng);
      c.gates.push_back(Gate::number_conserving(q, q + 1, a));
    }
  }
  return c;
}

ParamCircuit build_student(int n, int depth) {
  if (n < 2) throw std::invalid_argument("student needs n >= 2");
  if (depth < 1) throw std::invalid_argument("student depth must be >= 1");
  ParamCircuit c;
  c.num_qubits = n;
  c.role = CircuitRole::Student;
  int p = 0;
  for (int layer = 0; layer < depth; ++layer) {
    for (int q = 0; q < n; ++q) {
      c.gates.push_back(Gate::rotation(Pauli::Y, q, p++));
      c.gates.push_back(Gate::rotation(Pauli::Z, q, p++));
    }
    for (int q = 0; q + 1 < n; ++q) c.gates.push_back(Gate::controlled_z(q, q + 1));
  }
  c.num_params = p;
  return c;
}

Eigen::VectorXd initial_parameters(const ParamCircuit& circuit, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  Eigen::VectorXd theta(circuit.num_params);
  for (Eigen::Index k = 0; k < theta.size(); ++k) theta(k) = angle(rng);
  return theta;
}

std::uint64_t parse_bitstring(const std::string& bits) {
  if (bits.empty() || bits.size() > 64) throw std::invalid_argument("bad bitstring length");
  std::uint64_t index = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("bitstring must be 0/1");
    index = (index << 1) | static_cast<std::uint64_t>(c == '1');
  }
  return index;
}

std::string format_bitstring(std::uint64_t index, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int q = 0; q < n; ++q)
    if ((index >> (n - 1 - q)) & 1U) s[static_cast<std::size_t>(q)] = '1';
  return s;
}

}  // namespace qgt
