// Copyright 2026 The ntcorr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cmath>

#include <gtest/gtest.h>

#include "ntcorr/gates.hpp"
#include "ntcorr/oracle.hpp"
#include "ntcorr/protocol.hpp"
#include "ntcorr/rng.hpp"
#include "ntcorr/verification.hpp"

namespace ntcorr {
namespace {

using oracle::fermion_matrix;
using oracle::gibbs_state;
using oracle::hadamard_test_baseline;
using oracle::heisenberg_correlator;

TEST(HeisenbergCorrelator, SingleSigmaZ) {
    const auto sys = SystemLayout::of(1);
    const Complex v = heisenberg_correlator(
        {sys, {pauli_matrix::z()}, {0.0}, Schedule::constant(pauli("X0")), make_state(sys.layout(), {0}).amplitudes()});
    EXPECT_EQ(v, Complex(1.0));
}

TEST(HeisenbergCorrelator, PrecessingSigmaX) {
    const auto sys = SystemLayout::of(1);
    const double w = 0.8;
    for (double t : {0.2, 1.0, 2.5}) {
        const Complex v = heisenberg_correlator({sys, {pauli_matrix::x(), pauli_matrix::x()}, {0.0, t},
                                                 Schedule::constant(0.5 * w * pauli("Z0")),
                                                 make_state(sys.layout(), {0}).amplitudes()});
        EXPECT_LT(std::abs(v - std::exp(Complex(0.0, w * t))), 1e-13);
    }
}

TEST(HeisenbergCorrelator, PositionAutocorrelationOnVacuum) {
    const auto sys = SystemLayout(HilbertLayout::system(0, {12}));
    const double w = 1.4;
    const Matrix x = quadrature(0).to_dense(sys);
    for (double t : {0.5, 1.7}) {
        const Complex v = heisenberg_correlator({sys, {x, x}, {0.0, t}, Schedule::constant(w * quadrature(0, QuadratureForm::number)),
                                                 make_state(sys.layout(), {0}).amplitudes()});
        EXPECT_LT(std::abs(v - std::exp(Complex(0.0, -w * t))), 1e-8);
    }
}

TEST(HeisenbergCorrelator, Validation) {
    const auto sys = SystemLayout::of(1);
    const auto psi = make_state(sys.layout(), {0}).amplitudes();
    const auto h = Schedule::constant(pauli("Z0"));
    EXPECT_THROW(heisenberg_correlator({sys, {}, {}, h, psi}), InvalidArgument);
    EXPECT_THROW(heisenberg_correlator({sys, {pauli_matrix::x(), pauli_matrix::x()}, {1.0, 0.0}, h, psi}), InvalidArgument);
    EXPECT_THROW(heisenberg_correlator({sys, {Matrix::Identity(4, 4)}, {0.0}, h, psi}), DimensionError);
    EXPECT_THROW(heisenberg_correlator({sys, {pauli_matrix::x()}, {0.0}, h, Vector(Vector::Zero(4))}), DimensionError);
}

TEST(HeisenbergCorrelator, IdentityProductIsOne) {
    CounterRng rng(3);
    const auto sys = SystemLayout(HilbertLayout::system(2, {3}));
    const Matrix id = Matrix::Identity(12, 12);
    const auto h = Schedule::constant(verification::random_spin_hamiltonian(rng, sys, 2));
    const auto psi = verification::random_state(rng, sys.layout());
    const auto rho = DensityMatrix::maximally_mixed(sys.layout());
    for (std::size_t n = 1; n <= 4; ++n) {
        const std::vector<Matrix> ops(n, id);
        const std::vector<double> times(n, 0.7);
        EXPECT_LT(std::abs(heisenberg_correlator({sys, ops, times, h, psi.amplitudes()}) - 1.0), 1e-14);
        EXPECT_LT(std::abs(heisenberg_correlator({sys, ops, times, h, rho.elements()}) - 1.0), 1e-14);
    }
}

TEST(HeisenbergCorrelator, CyclicTraceAtTimeZero) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        CounterRng rng(seed + 40);
        const std::size_t q = 1 + rng.below(3);
        const auto sys = SystemLayout::of(q);
        const auto h = verification::random_spin_hamiltonian(rng, sys, q);
        const auto rho = gibbs_state(sys, h.to_dense(sys), rng.uniform(0.1, 2.0));
        const Matrix a = verification::random_pauli_string(rng, q).to_dense(sys);
        const Matrix b = verification::random_pauli_string(rng, q).to_dense(sys);
        const Complex direct = (a * b * rho.elements()).trace();
        const Complex cyclic = (b * rho.elements() * a).trace();
        const Complex path = heisenberg_correlator({sys, {b, a}, {0.0, 0.0}, Schedule::constant(h), rho.elements()});
        EXPECT_LT(std::abs(direct - path), 1e-12);
        EXPECT_LT(std::abs(cyclic - path), 1e-12);
    }
}

TEST(Evolution, PadeAgreesWithEigenPath) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        CounterRng rng(seed);
        const std::size_t q = 1 + rng.below(4);
        const auto sys = SystemLayout::of(q);
        const Matrix h = verification::random_spin_hamiltonian(rng, sys, q).to_dense(sys);
        const double t = rng.uniform(0.0, 2.0);
        EXPECT_LT(detail::max_abs(oracle::pade_evolution(h, t) - matrix_exponential(h, t)), 1e-12);
    }
}

TEST(Evolution, FollowsPiecewiseHistory) {
    const auto sys = SystemLayout::of(1);
    const Schedule history({{pauli("Z0"), 0.5}, {pauli("X0"), std::numeric_limits<double>::infinity()}});
    const Matrix expected = matrix_exponential(pauli_matrix::x(), 0.7) * matrix_exponential(pauli_matrix::z(), 0.3);
    EXPECT_LT(detail::max_abs(oracle::evolution(sys, history, 0.2, 1.2) - expected), 1e-13);
    EXPECT_EQ(oracle::evolution(sys, history, 0.4, 0.4), Matrix(Matrix::Identity(2, 2)));
}

TEST(GibbsState, Examples) {
    const auto sys = SystemLayout::of(2);
    CounterRng rng(8);
    const Matrix h = verification::random_spin_hamiltonian(rng, sys, 2).to_dense(sys);
    EXPECT_LT(detail::max_abs(gibbs_state(sys, h, 0.0).elements() - 0.25 * Matrix::Identity(4, 4)), 1e-15);

    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const Vector g = es.eigenvectors().col(0);
    const double gap = es.eigenvalues()(1) - es.eigenvalues()(0);
    ASSERT_GT(gap, 0.1);
    const double beta = 40.0 / gap;
    EXPECT_LT(detail::max_abs(gibbs_state(sys, h, beta).elements() - g * g.adjoint()), 1e-10);

    // H = sigma_z, beta = 1: |0> has energy +1, |1> has energy -1.
    const auto one = SystemLayout::of(1);
    const Matrix rho = gibbs_state(one, pauli_matrix::z(), 1.0).elements();
    const double z = std::exp(-1.0) + std::exp(1.0);
    EXPECT_NEAR(rho(0, 0).real(), std::exp(-1.0) / z, 1e-15);
    EXPECT_NEAR(rho(1, 1).real(), std::exp(1.0) / z, 1e-15);
    EXPECT_EQ(rho(0, 1), Complex(0.0));
}

TEST(GibbsState, Validation) {
    const auto sys = SystemLayout::of(1);
    EXPECT_THROW(gibbs_state(sys, pauli_matrix::z(), -1.0), InvalidArgument);
    EXPECT_THROW(gibbs_state(sys, pauli_matrix::z(), std::nan("")), InvalidArgument);
    EXPECT_THROW(gibbs_state(sys, Matrix::Identity(4, 4), 1.0), DimensionError);
    EXPECT_THROW(gibbs_state(sys, Complex(0.0, 1.0) * pauli_matrix::z(), 1.0), HermiticityError);
}

TEST(FermionMatrix, SingleMode) {
    // Index 0 is the occupied level (qubit |0>), index 1 the empty level.
    // In (empty, occupied) ordering this is [[0,0],[1,0]].
    Matrix cdag = Matrix::Zero(2, 2);
    cdag(0, 1) = 1.0;
    EXPECT_EQ(fermion_matrix(1, FermionKind::creation, 1), cdag);
    EXPECT_EQ(fermion_matrix(1, FermionKind::annihilation, 1), Matrix(cdag.adjoint()));
}

TEST(FermionMatrix, StringSignOnSecondMode) {
    // The sign on mode 2 is +1 when mode 1 is occupied and -1 when it is empty,
    // matching sigma_z on qubit 0 with sigma_z|0> = +|0>.
    const Matrix c2 = fermion_matrix(2, FermionKind::creation, 2);
    EXPECT_EQ(c2(0, 1), Complex(1.0));   // |occ, empty> -> |occ, occ>
    EXPECT_EQ(c2(2, 3), Complex(-1.0));  // |empty, empty> -> |empty, occ>
    EXPECT_EQ(c2.cwiseAbs().sum(), 2.0);
    const auto sys = SystemLayout::of(2);
    EXPECT_EQ(c2, jordan_wigner(2, FermionKind::creation, 2).to_dense(sys));
}

TEST(FermionMatrix, ExactlyEqualsJordanWigner) {
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto sys = SystemLayout::of(n);
        for (std::size_t p = 1; p <= n; ++p) {
            for (const auto kind : {FermionKind::creation, FermionKind::annihilation}) {
                EXPECT_EQ(fermion_matrix(p, kind, n), jordan_wigner(p, kind, n).to_dense(sys)) << "n=" << n << " p=" << p;
            }
        }
    }
}

TEST(FermionMatrix, CanonicalAnticommutation) {
    const std::size_t n = 4;
    const auto d = static_cast<Eigen::Index>(std::size_t{1} << n);
    for (std::size_t p = 1; p <= n; ++p) {
        for (std::size_t q = 1; q <= n; ++q) {
            const Matrix bp = fermion_matrix(p, FermionKind::annihilation, n);
            const Matrix bq = fermion_matrix(q, FermionKind::annihilation, n);
            const Matrix bqd = fermion_matrix(q, FermionKind::creation, n);
            const Matrix delta = p == q ? Matrix(Matrix::Identity(d, d)) : Matrix(Matrix::Zero(d, d));
            EXPECT_EQ(Matrix(bp * bqd + bqd * bp), delta);
            EXPECT_EQ(Matrix(bp * bq + bq * bp), Matrix(Matrix::Zero(d, d)));
        }
    }
}

TEST(FermionMatrix, RangeChecks) {
    EXPECT_THROW(fermion_matrix(0, FermionKind::creation, 2), DimensionError);
    EXPECT_THROW(fermion_matrix(3, FermionKind::creation, 2), DimensionError);
    EXPECT_THROW(fermion_matrix(1, FermionKind::creation, 7), DimensionError);
}

TEST(HadamardTest, Examples) {
    CounterRng rng(2);
    const auto psi = verification::random_state(rng, HilbertLayout::system(2));
    EXPECT_LT(std::abs(hadamard_test_baseline(psi.amplitudes(), Matrix::Identity(4, 4)) - 1.0), 1e-14);
    const Vector zero = make_state(HilbertLayout::system(1), {0}).amplitudes();
    EXPECT_LT(std::abs(hadamard_test_baseline(zero, pauli_matrix::x())), 1e-15);
    EXPECT_LT(std::abs(hadamard_test_baseline(zero, Complex(0.0, 1.0) * pauli_matrix::z()) - Complex(0.0, 1.0)), 1e-15);
    EXPECT_THROW(hadamard_test_baseline(zero, 2.0 * pauli_matrix::x()), InvalidArgument);
    EXPECT_THROW(hadamard_test_baseline(zero, Matrix::Identity(4, 4)), DimensionError);
}

TEST(HadamardTest, ThreeWayAgreementOnPrecessingQubit) {
    // (-i)^2 sigma_x(t) sigma_x(0) is unitary; its expectation times i^2 is the correlator.
    const auto sys = SystemLayout::of(1);
    const double w = 1.1;
    const double t = 0.9;
    const auto history = Schedule::constant(0.5 * w * pauli("Z0"));
    const auto psi = make_state(sys.layout(), {0});
    const Matrix u = oracle::pade_evolution(0.5 * w * pauli_matrix::z(), t);
    const Matrix w_op = -1.0 * (u.adjoint() * pauli_matrix::x() * u * pauli_matrix::x());
    const Complex baseline = -1.0 * hadamard_test_baseline(psi.amplitudes(), w_op);
    const Complex protocol = correlate_spin(psi, {pauli("X0"), pauli("X0")}, {0.0, t}, history).value;
    const Complex exact = heisenberg_correlator(
        {sys, {pauli_matrix::x(), pauli_matrix::x()}, {0.0, t}, history, psi.amplitudes()});
    EXPECT_LT(std::abs(baseline - exact), 1e-12);
    EXPECT_LT(std::abs(protocol - exact), 1e-12);
}

TEST(HadamardTest, MixedStateIsTraceOfU) {
    CounterRng rng(77);
    const auto sys = SystemLayout::of(2);
    const Matrix h = verification::random_spin_hamiltonian(rng, sys, 2).to_dense(sys);
    const auto rho = gibbs_state(sys, h, 0.8);
    const Matrix u = oracle::pade_evolution(h, 0.6) * pauli("X0 Y1").to_dense(sys);
    EXPECT_LT(std::abs(hadamard_test_baseline(rho, u) - (u * rho.elements()).trace()), 1e-12);
}

} // namespace
} // namespace ntcorr
