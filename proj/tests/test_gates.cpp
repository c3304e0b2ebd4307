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
#include "ntcorr/rng.hpp"
#include "ntcorr/verification.hpp"

namespace ntcorr {
namespace {

const Complex kMinusI(0.0, -1.0);

TEST(MatrixExponential, Examples) {
    EXPECT_LT(detail::max_abs(matrix_exponential(pauli_matrix::x(), kPi / 2) - kMinusI * pauli_matrix::x()), 1e-15);
    EXPECT_LT(detail::max_abs(matrix_exponential(Matrix::Zero(3, 3), 1.7) - Matrix::Identity(3, 3)), 0.0 + 1e-300);
    const double t = 0.83;
    const Matrix u = matrix_exponential(ladder::number(8), t);
    for (Eigen::Index n = 0; n < 8; ++n) {
        for (Eigen::Index m = 0; m < 8; ++m) {
            const Complex expected = n == m ? std::exp(Complex(0.0, -static_cast<double>(n) * t)) : 0.0;
            EXPECT_LT(std::abs(u(n, m) - expected), 1e-13);
        }
    }
}

TEST(MatrixExponential, RejectsNonHermitian) {
    EXPECT_THROW(matrix_exponential(pauli_matrix::raising(), 1.0), HermiticityError);
    EXPECT_THROW(matrix_exponential(Matrix::Identity(2, 3), 1.0), DimensionError);
}

TEST(MatrixExponential, AgreesWithPade) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        CounterRng rng(seed);
        const auto sys = SystemLayout::of(3);
        const Matrix h = verification::random_spin_hamiltonian(rng, sys, 3).to_dense(sys);
        const double t = rng.uniform(-2.0, 2.0);
        EXPECT_LT(detail::max_abs(matrix_exponential(h, t) - oracle::pade_evolution(h, t)), 1e-12);
    }
}

TEST(ControlledGate, Examples) {
    const auto layout = HilbertLayout::system(1).with_ancilla();
    const Matrix cz = controlled_gate(layout, {pauli("Z0"), kPi / 2});
    const auto g0 = make_state(layout, {kAncillaGround, 0});
    EXPECT_LT((g0.apply(cz).amplitudes() - kMinusI * g0.amplitudes()).norm(), 1e-15);
    const auto e0 = make_state(layout, {kAncillaExcited, 0});
    EXPECT_LT((e0.apply(cz).amplitudes() - e0.amplitudes()).norm(), 1e-15);

    const Matrix cx = controlled_gate(layout, {pauli("X0"), kPi / 2});
    EXPECT_LT(detail::max_abs(cx.block(2, 2, 2, 2) - kMinusI * pauli_matrix::x()), 1e-15);
    EXPECT_LT(detail::max_abs(cx.block(0, 0, 2, 2) - Matrix::Identity(2, 2)), 0.0 + 1e-300);
    EXPECT_LT(detail::max_abs(cx.block(0, 2, 2, 2)), 1e-300);
}

TEST(ControlledGate, RequiresAncillaAndHermitianGenerator) {
    EXPECT_THROW(controlled_gate(HilbertLayout::system(1), {pauli("Z0")}), InvalidArgument);
    EXPECT_THROW(controlled_gate(HilbertLayout::system(1).with_ancilla(), {quadrature(0, QuadratureForm::lowering)}),
                 HermiticityError);
}

TEST(ControlledGate, OppositeAnglesAreInverse) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        CounterRng rng(seed);
        const std::size_t q = 1 + rng.below(3);
        const auto layout = HilbertLayout::system(q, {4}).with_ancilla();
        const OperatorSpec gen = rng.bernoulli(0.5)
                                     ? verification::random_pauli_string(rng, q)
                                     : OperatorSpec::spin_boson(
                                           verification::random_pauli_string(rng, q).terms().front().pauli,
                                           {q, QuadratureForm::position});
        const double theta = rng.uniform(-3.0, 3.0);
        const Matrix prod = controlled_gate(layout, {gen, theta}) * controlled_gate(layout, {gen, -theta});
        EXPECT_LT(detail::max_abs(prod - Matrix::Identity(prod.rows(), prod.cols())), 1e-12);
    }
}

TEST(ControlledGate, HalfPiLinearizationForPauliStrings) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        CounterRng rng(seed);
        const std::size_t q = 1 + rng.below(4);
        const auto sys = SystemLayout::of(q);
        const auto op = verification::random_pauli_string(rng, q);
        EXPECT_LT(detail::max_abs(controlled_gate_block(sys, {op, kPi / 2}) - kMinusI * op.to_dense(sys)), 1e-12);
    }
}

TEST(ControlledGate, DerivativeLinearizationIsSecondOrder) {
    const auto sys = SystemLayout(HilbertLayout::system(1, {6}));
    const std::vector<OperatorSpec> generators{
        quadrature(1), quadrature(1, QuadratureForm::momentum),
        OperatorSpec::spin_boson(PauliString::parse("X0"), {1, QuadratureForm::position})};
    for (const auto &gen : generators) {
        const Matrix target = kMinusI * gen.to_dense(sys);
        auto error = [&](double h) {
            const Matrix d =
                (controlled_gate_block(sys, {gen, h}) - controlled_gate_block(sys, {gen, -h})) / (2.0 * h);
            return detail::max_abs(d - target);
        };
        const double e1 = error(1e-2);
        const double e2 = error(5e-3);
        EXPECT_GE(e1 / e2, 3.8) << gen.label();
        EXPECT_LT(error(1e-3), 1e-4);
    }
}

TEST(Evolve, Examples) {
    const auto layout = HilbertLayout::system(1);
    const double rt = 1.0 / std::sqrt(2.0);
    const StateVector plus(layout, (Vector(2) << rt, rt).finished());
    EXPECT_EQ(evolve(plus, Schedule()).amplitudes(), plus.amplitudes());

    const double w = 1.7;
    const double t = 0.9;
    const auto out = evolve(plus, Schedule({{0.5 * w * pauli("Z0"), t}}));
    const Complex relative = out.amplitudes()(1) / out.amplitudes()(0);
    EXPECT_LT(std::abs(relative - std::exp(Complex(0.0, w * t))), 1e-13);

    // Commuting segments compose additively.
    const auto h1 = 0.4 * pauli("Z0 Z1");
    const auto h2 = 1.3 * pauli("Z0") - 0.2 * pauli("Z1");
    const auto psi = make_state(HilbertLayout::system(2), {0, 0});
    CounterRng rng(11);
    const auto rnd = verification::random_state(rng, HilbertLayout::system(2));
    const auto two = evolve(rnd, Schedule({{h1, 0.7}, {h2, 1.1}}));
    const auto one = evolve(rnd, Schedule({{(0.7 / 1.8) * h1 + (1.1 / 1.8) * h2, 1.8}}));
    EXPECT_LT((two.amplitudes() - one.amplitudes()).norm(), 1e-13);
    (void)psi;
}

TEST(Evolve, ActsOnSystemOnlyWithAncilla) {
    CounterRng rng(5);
    const auto layout = HilbertLayout::system(2).with_ancilla();
    const auto psi = verification::random_state(rng, layout);
    const auto h = 0.8 * pauli("X0 Y1");
    const auto out = evolve(psi, Schedule({{h, 0.6}}));
    const Matrix u = detail::kron(pauli_matrix::identity(), matrix_exponential(h.to_dense(SystemLayout::of(2)), 0.6));
    EXPECT_LT((out.amplitudes() - u * psi.amplitudes()).norm(), 1e-13);
}

TEST(Schedule, ValidationAndSlicing) {
    EXPECT_THROW(Schedule({{pauli("Z0"), -1.0}}), InvalidArgument);
    EXPECT_THROW(Schedule({{pauli("Z0"), std::numeric_limits<double>::infinity()}, {pauli("X0"), 1.0}}),
                 InvalidArgument);
    EXPECT_THROW(Schedule({{quadrature(0, QuadratureForm::lowering), 1.0}}), HermiticityError);
    const Schedule s({{pauli("Z0"), 1.0}, {pauli("X0"), 2.0}});
    EXPECT_DOUBLE_EQ(s.total_duration(), 3.0);
    const auto slice = s.slice(0.5, 2.0);
    ASSERT_EQ(slice.segments().size(), 2u);
    EXPECT_DOUBLE_EQ(slice.segments()[0].duration, 0.5);
    EXPECT_DOUBLE_EQ(slice.segments()[1].duration, 1.0);
    EXPECT_THROW(s.slice(1.0, 3.5), InvalidArgument);
    EXPECT_THROW(s.slice(2.0, 1.0), InvalidArgument);
    EXPECT_TRUE(Schedule::constant(pauli("Z0")).is_time_independent());
}

TEST(JordanWigner, Examples) {
    const auto sys1 = SystemLayout::of(1);
    EXPECT_LT(detail::max_abs(jordan_wigner(1, FermionKind::creation, 1).to_dense(sys1) - pauli_matrix::raising()),
              1e-15);
    const auto sys2 = SystemLayout::of(2);
    const Matrix expected = detail::kron(pauli_matrix::z(), pauli_matrix::raising());
    EXPECT_LT(detail::max_abs(jordan_wigner(2, FermionKind::creation, 2).to_dense(sys2) - expected), 1e-15);
    EXPECT_THROW(jordan_wigner(0, FermionKind::creation, 2), DimensionError);
    EXPECT_THROW(jordan_wigner(3, FermionKind::creation, 2), DimensionError);
}

TEST(JordanWigner, CanonicalAnticommutationRelations) {
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto sys = SystemLayout::of(n);
        const auto dim = static_cast<Eigen::Index>(sys.total_dim());
        for (std::size_t p = 1; p <= n; ++p) {
            for (std::size_t q = 1; q <= n; ++q) {
                const Matrix bp = jordan_wigner(p, FermionKind::annihilation, n).to_dense(sys);
                const Matrix bq = jordan_wigner(q, FermionKind::annihilation, n).to_dense(sys);
                const Matrix bqd = jordan_wigner(q, FermionKind::creation, n).to_dense(sys);
                const Matrix delta = p == q ? Matrix(Matrix::Identity(dim, dim)) : Matrix(Matrix::Zero(dim, dim));
                EXPECT_LT(detail::max_abs(bp * bqd + bqd * bp - delta), 1e-14);
                EXPECT_LT(detail::max_abs(bp * bq + bq * bp), 1e-14);
            }
        }
    }
}

TEST(GateCount, Formula) {
    EXPECT_EQ(gate_count(3, 4, 1), 14);
    EXPECT_EQ(gate_count(2, 4, 2), 10);
    for (long long m = 1; m <= 5; ++m) {
        for (long long q = 0; q <= 5; ++q) {
            EXPECT_EQ(gate_count(1, m, q), m);
        }
    }
    EXPECT_THROW(gate_count(0, 1, 1), InvalidArgument);
    EXPECT_THROW(gate_count(1, 0, 1), InvalidArgument);
    EXPECT_THROW(gate_count(1, 1, -1), InvalidArgument);
}

} // namespace
} // namespace ntcorr
