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
#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <complex>
#include <numbers>

#include "qgt/qsim.hpp"

using namespace qgt;
using Cd = std::complex<double>;

namespace {

// Dense 2^n operator for a gate, built by enumerating basis states.
Eigen::MatrixXcd embed_pair(const Matrix4<double>& u, int n, int q0, int q1) {
  const Eigen::Index dim = Eigen::Index(1) << n;
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const int b0 = (col >> (n - 1 - q0)) & 1;
    const int b1 = (col >> (n - 1 - q1)) & 1;
    const int in = 2 * b0 + b1;
    for (int out = 0; out < 4; ++out) {
      Eigen::Index row = col;
      row &= ~(Eigen::Index(1) << (n - 1 - q0));
      row &= ~(Eigen::Index(1) << (n - 1 - q1));
      row |= Eigen::Index(out >> 1) << (n - 1 - q0);
      row |= Eigen::Index(out & 1) << (n - 1 - q1);
      full(row, col) += u(out, in);
    }
  }
  return full;
}

Eigen::MatrixXcd embed_single(const Matrix2<double>& u, int n, int q) {
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Ones(1, 1);
  for (int k = 0; k < n; ++k) {
    const Eigen::MatrixXcd f = k == q ? Eigen::MatrixXcd(u) : Eigen::MatrixXcd::Identity(2, 2);
    Eigen::MatrixXcd next(full.rows() * 2, full.cols() * 2);
    for (Eigen::Index i = 0; i < full.rows(); ++i)
      for (Eigen::Index j = 0; j < full.cols(); ++j)
        next.block(2 * i, 2 * j, 2, 2) = full(i, j) * f;
    full = next;
  }
  return full;
}

Eigen::VectorXcd random_amplitudes(int n, Rng& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(Eigen::Index(1) << n);
  for (auto& a : v) a = Cd(g(rng), g(rng));
  return v / v.norm();
}

}  // namespace

TEST(DomainWall, FourQubits) {
  const QuantumState s = domain_wall_state(4);
  EXPECT_EQ(s.amplitudes()(parse_bitstring("1100")), Cd(1.0));
  EXPECT_DOUBLE_EQ(s.norm(), 1.0);
}

TEST(DomainWall, TwoQubits) {
  EXPECT_EQ(domain_wall_state(2).amplitudes()(parse_bitstring("10")), Cd(1.0));
}

TEST(DomainWall, EightQubitsWeightFourOnLeft) {
  const QuantumState s = domain_wall_state(8);
  EXPECT_EQ(s.amplitudes()(parse_bitstring("11110000")), Cd(1.0));
}

TEST(DomainWall, RejectsOddOrNonpositive) {
  EXPECT_THROW(domain_wall_state(3), std::invalid_argument);
  EXPECT_THROW(domain_wall_state(0), std::invalid_argument);
  EXPECT_THROW(domain_wall_state(-2), std::invalid_argument);
}

TEST(Teacher, DepthFormula) {
  EXPECT_EQ(teacher_depth(8), 4);
  EXPECT_EQ(teacher_depth(24), 36);
  EXPECT_EQ(teacher_depth(12), 9);
  EXPECT_EQ(teacher_depth(10), 7);  // ceil(6.25)
  for (int n = 4; n <= 26; n += 2)
    EXPECT_EQ(teacher_depth(n), static_cast<int>(std::ceil(std::pow(n / 4.0, 2)))) << n;
}

TEST(Teacher, BrickworkLayout) {
  const ParamCircuit t = build_teacher(8, 3);
  EXPECT_EQ(t.num_params, 0);
  EXPECT_EQ(t.role, CircuitRole::Teacher);
  // layers alternate 4 even bonds and 3 odd bonds
  EXPECT_EQ(t.gates.size(), 4u + 3u + 4u + 3u);
  EXPECT_EQ(t.gates[0].targets[0], 0);
  EXPECT_EQ(t.gates[4].targets[0], 1);
  for (const auto& g : t.gates) EXPECT_EQ(g.kind, GateKind::NumberConserving);
  t.validate();
}

TEST(Teacher, PreservesWeightSector) {
  for (int n : {4, 6, 8}) {
    const QuantumState out = run(build_teacher(n, 11), domain_wall_state(n), Eigen::VectorXd());
    const Eigen::VectorXd p = out.probabilities();
    double off_sector = 0.0;
    for (Eigen::Index x = 0; x < p.size(); ++x)
      if (std::popcount(static_cast<std::uint64_t>(x)) != n / 2) off_sector += p(x);
    EXPECT_LT(off_sector, 1e-20) << n;
    EXPECT_NEAR(out.norm(), 1.0, 1e-10);
  }
}

TEST(Teacher, SeedDeterminesGates) {
  EXPECT_EQ(build_teacher(8, 5), build_teacher(8, 5));
  EXPECT_NE(build_teacher(8, 5), build_teacher(8, 6));
}

TEST(Student, ParameterCount) {
  EXPECT_EQ(build_student(4, 3).num_params, 24);
  EXPECT_EQ(build_student(8, 4).num_params, 64);
  build_student(4, 3).validate();
}

TEST(Student, GateListIsDeterministic) {
  EXPECT_EQ(build_student(6, 2), build_student(6, 2));
  EXPECT_EQ(initial_parameters(build_student(6, 2), 9), initial_parameters(build_student(6, 2), 9));
}

TEST(Student, InitialParametersInRange) {
  const Eigen::VectorXd th = initial_parameters(build_student(6, 3), 1);
  EXPECT_GE(th.minCoeff(), 0.0);
  EXPECT_LT(th.maxCoeff(), 2 * std::numbers::pi);
}

TEST(Student, ZeroAnglesLeaveOnlyTheEntanglerLadder) {
  const int n = 4;
  const ParamCircuit c = build_student(n, 1);
  Rng rng = make_rng(2);
  const QuantumState in = QuantumState::from_amplitudes(n, random_amplitudes(n, rng));
  const QuantumState out = run(c, in, Eigen::VectorXd::Zero(c.num_params));
  QuantumState ladder = in;
  for (int q = 0; q + 1 < n; ++q) ladder.apply_controlled_z(q, q + 1);
  EXPECT_LT((out.amplitudes() - ladder.amplitudes()).norm(), 1e-14);
}

TEST(Student, RejectsBadShape) {
  EXPECT_THROW(build_student(1, 1), std::invalid_argument);
  EXPECT_THROW(build_student(4, 0), std::invalid_argument);
}

TEST(Run, EmptyCircuitIsIdentity) {
  ParamCircuit c;
  c.num_qubits = 3;
  Rng rng = make_rng(4);
  const QuantumState in = QuantumState::from_amplitudes(3, random_amplitudes(3, rng));
  EXPECT_EQ(run(c, in, Eigen::VectorXd()).amplitudes(), in.amplitudes());
}

TEST(Run, XRotationByPiFlipsQubit) {
  ParamCircuit c;
  c.num_qubits = 1;
  c.num_params = 1;
  c.gates.push_back(Gate::rotation(Pauli::X, 0, 0));
  const QuantumState out = run(c, QuantumState(1), Eigen::VectorXd::Constant(1, std::numbers::pi));
  EXPECT_NEAR(std::abs(out.amplitudes()(1)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(out.amplitudes()(0)), 0.0, 1e-15);
}

TEST(Run, TeacherSupportAtEightQubits) {
  const QuantumState out = run(build_teacher(8, 0), domain_wall_state(8), Eigen::VectorXd());
  const Eigen::VectorXd p = out.probabilities();
  for (Eigen::Index x = 0; x < p.size(); ++x)
    if (p(x) > 1e-20) EXPECT_EQ(std::popcount(static_cast<std::uint64_t>(x)), 4);
}

TEST(Run, DimensionMismatch) {
  const ParamCircuit c = build_student(4, 1);
  EXPECT_THROW(run(c, QuantumState(4), Eigen::VectorXd::Zero(3)), std::invalid_argument);
  EXPECT_THROW(run(c, QuantumState(3), Eigen::VectorXd::Zero(8)), std::invalid_argument);
}

TEST(Run, NormPreservedOnRandomCircuits) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int n = 2 + static_cast<int>(seed % 6);
    const ParamCircuit c = build_student(n, 1 + static_cast<int>(seed % 3));
    const QuantumState out = run(c, QuantumState(n), initial_parameters(c, seed));
    EXPECT_NEAR(out.norm(), 1.0, 1e-10);
  }
}

TEST(Kernels, SingleQubitMatchesKroneckerOracle) {
  Rng rng = make_rng(7);
  std::uniform_real_distribution<double> angle(0, 2 * std::numbers::pi);
  const int n = 4;
  for (Pauli axis : {Pauli::X, Pauli::Y, Pauli::Z}) {
    for (int q = 0; q < n; ++q) {
      const Matrix2<double> u = rotation_matrix<double>(axis, angle(rng));
      const Eigen::VectorXcd v = random_amplitudes(n, rng);
      QuantumState s = QuantumState::from_amplitudes(n, v);
      s.apply_single(u, q);
      EXPECT_LT((s.amplitudes() - embed_single(u, n, q) * v).norm(), 1e-13);
    }
  }
}

TEST(Kernels, PairMatchesEnumerationOracle) {
  Rng rng = make_rng(8);
  std::uniform_real_distribution<double> angle(0, 2 * std::numbers::pi);
  const int n = 5;
  for (auto [q0, q1] : {std::pair{0, 1}, {3, 1}, {0, 4}, {2, 3}}) {
    std::array<double, 6> a;
    for (double& x : a) x = angle(rng);
    const Matrix4<double> u = number_conserving_matrix<double>(a);
    const Eigen::VectorXcd v = random_amplitudes(n, rng);
    QuantumState s = QuantumState::from_amplitudes(n, v);
    s.apply_pair(u, q0, q1);
    EXPECT_LT((s.amplitudes() - embed_pair(u, n, q0, q1) * v).norm(), 1e-13);

    QuantumState z = QuantumState::from_amplitudes(n, v);
    z.apply_controlled_z(q0, q1);
    EXPECT_LT((z.amplitudes() - embed_pair(controlled_z_matrix<double>(), n, q0, q1) * v).norm(),
              1e-14);
  }
}

TEST(Kernels, GateMatricesAreUnitary) {
  Rng rng = make_rng(9);
  std::uniform_real_distribution<double> angle(0, 2 * std::numbers::pi);
  for (int trial = 0; trial < 50; ++trial) {
    for (Pauli axis : {Pauli::X, Pauli::Y, Pauli::Z}) {
      const Matrix2<double> u = rotation_matrix<double>(axis, angle(rng));
      EXPECT_LT((u.adjoint() * u - Matrix2<double>::Identity()).norm(), 1e-12);
    }
    std::array<double, 6> a;
    for (double& x : a) x = angle(rng);
    const Matrix4<double> u = number_conserving_matrix<double>(a);
    EXPECT_LT((u.adjoint() * u - Matrix4<double>::Identity()).norm(), 1e-12);
  }
  const Matrix4<double> cz = controlled_z_matrix<double>();
  EXPECT_LT((cz.adjoint() * cz - Matrix4<double>::Identity()).norm(), 1e-12);
}

TEST(Kernels, NumberConservingGateKeepsWeight) {
  std::array<double, 6> a{0.3, 1.1, -0.4, 2.0, 0.7, 0.9};
  const Matrix4<double> u = number_conserving_matrix<double>(a);
  // weight sectors {00}, {01,10}, {11} are invariant
  EXPECT_EQ(u(1, 0), Cd(0));
  EXPECT_EQ(u(3, 1), Cd(0));
  EXPECT_EQ(u(0, 3), Cd(0));
  EXPECT_EQ(u(2, 3), Cd(0));
}

TEST(Kernels, RotationMatchesMatrixExponential) {
  // exp(-i t P / 2) = cos(t/2) I - i sin(t/2) P
  Matrix2<double> x, y, z;
  x << 0, 1, 1, 0;
  y << 0, Cd(0, -1), Cd(0, 1), 0;
  z << 1, 0, 0, -1;
  const double t = 0.83;
  const Matrix2<double> id = Matrix2<double>::Identity();
  for (auto [axis, p] : {std::pair{Pauli::X, x}, {Pauli::Y, y}, {Pauli::Z, z}}) {
    const Matrix2<double> expected = std::cos(t / 2) * id - Cd(0, std::sin(t / 2)) * p;
    EXPECT_LT((rotation_matrix<double>(axis, t) - expected).norm(), 1e-15);
  }
}

TEST(Kernels, TemplatedOnScalar) {
  BasicState<float> s(3);
  s.apply_single(rotation_matrix<float>(Pauli::Y, 1.0f), 1);
  EXPECT_NEAR(s.norm(), 1.0f, 1e-6f);
  const BasicState<float> out = run(build_student(3, 1), BasicState<float>(3),
                                    initial_parameters(build_student(3, 1), 3));
  const QuantumState ref =
      run(build_student(3, 1), QuantumState(3), initial_parameters(build_student(3, 1), 3));
  EXPECT_LT((out.probabilities().cast<double>() - ref.probabilities()).norm(), 1e-5);
}

TEST(Circuit, ValidateRejectsMalformed) {
  ParamCircuit c;
  c.num_qubits = 2;
  c.num_params = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);  // parameter 0 unused
  c.gates.push_back(Gate::rotation(Pauli::Y, 2, 0));
  EXPECT_THROW(c.validate(), std::invalid_argument);  // target out of range
  c.gates = {Gate::controlled_z(1, 1)};
  c.num_params = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);  // repeated target
  Gate g = Gate::number_conserving(0, 1, {0, 0, 0, 0, 0, 0});
  g.param_index = 0;
  c.gates = {g};
  c.num_params = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);  // trainable two-qubit gate
}

TEST(Sample, PointMass) {
  Rng rng = make_rng(1);
  const Histogram h = sample(domain_wall_state(4), 100, rng);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h.at(parse_bitstring("1100")), 100u);
}

TEST(Sample, UniformTwoQubitFrequencies) {
  QuantumState s(2);
  s.apply_single(rotation_matrix<double>(Pauli::Y, std::numbers::pi / 2), 0);
  s.apply_single(rotation_matrix<double>(Pauli::Y, std::numbers::pi / 2), 1);
  Rng rng = make_rng(2);
  const std::uint64_t shots = 400000;
  const Histogram h = sample(s, shots, rng);
  std::uint64_t total = 0;
  const double sigma = std::sqrt(0.25 * 0.75 / shots);
  for (std::uint64_t x = 0; x < 4; ++x) {
    total += h.at(x);
    EXPECT_NEAR(static_cast<double>(h.at(x)) / shots, 0.25, 5 * sigma);
  }
  EXPECT_EQ(total, shots);
}

TEST(Sample, ZeroShotsRejected) {
  Rng rng = make_rng(3);
  EXPECT_THROW(sample(QuantumState(2), 0, rng), std::invalid_argument);
}

TEST(Sample, DeterministicGivenSeed) {
  const QuantumState out = run(build_teacher(6, 1), domain_wall_state(6), Eigen::VectorXd());
  Rng a = make_rng(42), b = make_rng(42);
  EXPECT_EQ(sample(out, 5000, a), sample(out, 5000, b));
}

TEST(Bitstrings, RoundTrip) {
  EXPECT_EQ(parse_bitstring("1011"), 11u);
  EXPECT_EQ(format_bitstring(11, 4), "1011");
  EXPECT_EQ(format_bitstring(parse_bitstring("00101"), 5), "00101");
  EXPECT_THROW(parse_bitstring("10a"), std::invalid_argument);
}
