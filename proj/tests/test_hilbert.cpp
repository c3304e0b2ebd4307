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
#include "ntcorr/hilbert.hpp"
#include "ntcorr/oracle.hpp"
#include "ntcorr/rng.hpp"
#include "ntcorr/verification.hpp"

namespace ntcorr {
namespace {

const double kRt2 = 1.0 / std::sqrt(2.0);

TEST(HilbertLayout, TotalDimIsProductOfDims) {
    const auto layout = HilbertLayout::system(2, {3, 5}).with_ancilla();
    EXPECT_EQ(layout.total_dim(), 2u * 2u * 2u * 3u * 5u);
    EXPECT_TRUE(layout.has_ancilla());
    EXPECT_EQ(layout[0].kind, SubsystemKind::ancilla);
    EXPECT_EQ(layout.count(SubsystemKind::boson_mode), 2u);
    EXPECT_EQ(layout.system_part(), HilbertLayout::system(2, {3, 5}));
}

TEST(HilbertLayout, RejectsAncillaAwayFromIndexZeroAndSmallCutoffs) {
    EXPECT_THROW(HilbertLayout({Subsystem::qubit(), Subsystem::ancilla()}), InvalidArgument);
    EXPECT_THROW(HilbertLayout({Subsystem::ancilla(), Subsystem::ancilla()}), InvalidArgument);
    EXPECT_THROW(HilbertLayout::system(1, {1}), DimensionError);
    EXPECT_THROW(HilbertLayout::system(1).with_ancilla().with_ancilla(), InvalidArgument);
}

TEST(HilbertLayout, RowMajorStrides) {
    const auto layout = HilbertLayout::system(2, {3});
    EXPECT_EQ(layout.stride(0), 6u);
    EXPECT_EQ(layout.stride(1), 3u);
    EXPECT_EQ(layout.stride(2), 1u);
    EXPECT_EQ(layout.level(11, 0), 1u);
    EXPECT_EQ(layout.level(11, 1), 1u);
    EXPECT_EQ(layout.level(11, 2), 2u);
}

TEST(MakeState, BasisStates) {
    const auto one = make_state(HilbertLayout::system(1), {0});
    EXPECT_EQ(one.amplitudes(), (Vector(2) << 1.0, 0.0).finished());

    const auto two = make_state(HilbertLayout::system(2), {1, 0});
    Vector expected = Vector::Zero(4);
    expected(2) = 1.0;
    EXPECT_EQ(two.amplitudes(), expected);

    const auto fock = make_state(HilbertLayout::system(0, {3}), {2});
    EXPECT_EQ(fock.amplitudes(), (Vector(3) << 0.0, 0.0, 1.0).finished());
}

TEST(MakeState, RejectsBadOccupations) {
    EXPECT_THROW(make_state(HilbertLayout::system(1), {2}), DimensionError);
    EXPECT_THROW(make_state(HilbertLayout::system(2), {0}), DimensionError);
}

TEST(StateVector, RejectsUnnormalizedAmplitudes) {
    EXPECT_THROW(StateVector(HilbertLayout::system(1), (Vector(2) << 1.0, 1.0).finished()), InvalidArgument);
    const auto psi = StateVector::normalized(HilbertLayout::system(1), (Vector(2) << 1.0, 1.0).finished());
    EXPECT_NEAR(psi.amplitudes().norm(), 1.0, 1e-15);
    EXPECT_THROW(psi.apply(2.0 * Matrix::Identity(2, 2)), NumericalError);
}

TEST(DensityMatrix, Validation) {
    const auto layout = HilbertLayout::system(1);
    Matrix bad_trace = Matrix::Identity(2, 2);
    EXPECT_THROW(DensityMatrix(layout, bad_trace), InvalidArgument);
    Matrix non_hermitian = 0.5 * Matrix::Identity(2, 2);
    non_hermitian(0, 1) = 0.1;
    EXPECT_THROW(DensityMatrix(layout, non_hermitian), HermiticityError);
    Matrix negative(2, 2);
    negative << 1.5, 0.0, 0.0, -0.5;
    EXPECT_THROW(DensityMatrix(layout, negative), InvalidArgument);
    EXPECT_NO_THROW(DensityMatrix::maximally_mixed(layout));
}

TEST(Expectation, Examples) {
    const auto layout = HilbertLayout::system(1);
    EXPECT_DOUBLE_EQ(expectation(make_state(layout, {0}), pauli_matrix::z()), 1.0);
    const auto plus = StateVector(layout, (Vector(2) << kRt2, kRt2).finished());
    EXPECT_NEAR(expectation(plus, pauli_matrix::x()), 1.0, 1e-15);

    // Thermal qubit with H = sigma_z approaches the ground state |1> as beta grows.
    const auto sys = SystemLayout::of(1);
    const auto rho = oracle::gibbs_state(sys, pauli_matrix::z(), 40.0);
    EXPECT_NEAR(expectation(rho, pauli_matrix::z()), -1.0, 1e-12);
}

TEST(Expectation, RejectsNonHermitianObservables) {
    const Matrix iz = Complex(0.0, 1.0) * pauli_matrix::z();
    EXPECT_THROW(expectation(make_state(HilbertLayout::system(1), {0}), iz), HermiticityError);
}

TEST(AncillaCoherence, Examples) {
    const auto layout = HilbertLayout::system(1).with_ancilla();
    // (|e> + |g>)/sqrt2 (x) |0>
    Vector v = Vector::Zero(4);
    v(0) = kRt2;
    v(2) = kRt2;
    EXPECT_NEAR(std::abs(ancilla_coherence(StateVector(layout, v)) - 0.5), 0.0, 1e-15);

    // |e> (x) anything
    Vector e = Vector::Zero(4);
    e(0) = 0.6;
    e(1) = Complex(0.0, 0.8);
    EXPECT_EQ(ancilla_coherence(StateVector(layout, e)), Complex(0.0));

    // (|e>|0> - i |g>|0>)/sqrt2 -> -i/2
    Vector w = Vector::Zero(4);
    w(0) = kRt2;
    w(2) = Complex(0.0, -kRt2);
    EXPECT_NEAR(std::abs(ancilla_coherence(StateVector(layout, w)) - Complex(0.0, -0.5)), 0.0, 1e-15);
}

TEST(AncillaCoherence, RequiresAncilla) {
    EXPECT_THROW(ancilla_coherence(make_state(HilbertLayout::system(1), {0})), InvalidArgument);
}

TEST(AncillaCoherence, TwoRoutesAgreeOnRandomStates) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        CounterRng rng(seed);
        const auto layout = HilbertLayout::system(1 + rng.below(3), {3}).with_ancilla();
        const auto psi = verification::random_state(rng, layout);
        const auto [sx, sy] = ancilla_pauli_expectations(psi);
        EXPECT_NEAR(std::abs(detail::coherence_direct(psi) - 0.5 * Complex(sx, sy)), 0.0, 1e-12);

        const auto phi = verification::random_state(rng, layout);
        const Matrix mix = 0.3 * psi.amplitudes() * psi.amplitudes().adjoint() +
                           0.7 * phi.amplitudes() * phi.amplitudes().adjoint();
        const DensityMatrix rho(layout, mix);
        const auto [rx, ry] = ancilla_pauli_expectations(rho);
        EXPECT_NEAR(std::abs(detail::coherence_direct(rho) - 0.5 * Complex(rx, ry)), 0.0, 1e-12);
    }
}

TEST(EmbedOperator, Examples) {
    const auto layout = HilbertLayout::system(1).with_ancilla();
    EXPECT_EQ(embed_operator(layout, {{1, pauli_matrix::x()}}), detail::kron(pauli_matrix::identity(), pauli_matrix::x()));

    const Matrix adag = embed_operator(HilbertLayout::system(0, {3}), {{0, ladder::raising(3)}});
    EXPECT_DOUBLE_EQ(adag(1, 0).real(), 1.0);
    EXPECT_DOUBLE_EQ(adag(2, 1).real(), std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(adag.cwiseAbs().sum(), 1.0 + std::sqrt(2.0));

    // sigma_z (x) sigma_z on qubits 1 and 2 of a 3-qubit layout.
    const Matrix zz = embed_operator(HilbertLayout::system(3), {{1, pauli_matrix::z()}, {2, pauli_matrix::z()}});
    const Matrix direct =
        detail::kron(pauli_matrix::identity(), detail::kron(pauli_matrix::z(), pauli_matrix::z()));
    EXPECT_EQ(zz, direct);
}

TEST(EmbedOperator, RejectsBadSitesAndShapes) {
    const auto layout = HilbertLayout::system(2);
    EXPECT_THROW(embed_operator(layout, {{2, pauli_matrix::x()}}), DimensionError);
    EXPECT_THROW(embed_operator(layout, {{0, ladder::lowering(3)}}), DimensionError);
    EXPECT_THROW(embed_operator(layout, {{0, pauli_matrix::x()}, {0, pauli_matrix::z()}}), InvalidArgument);
}

TEST(EmbedOperator, CompositionOnDisjointSites) {
    CounterRng rng(7);
    const auto layout = HilbertLayout::system(2, {3});
    auto random_matrix = [&](Eigen::Index d) {
        Matrix m(d, d);
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) {
                m(i, j) = Complex(rng.normal(), rng.normal());
            }
        }
        return m;
    };
    const Matrix a = random_matrix(2);
    const Matrix b = random_matrix(3);
    const Matrix separate = embed_operator(layout, {{0, a}}) * embed_operator(layout, {{2, b}});
    const Matrix joint = embed_operator(layout, {{0, a}, {2, b}});
    EXPECT_LT(detail::max_abs(separate - joint), 1e-13);
}

TEST(Ladder, TruncatedCommutatorArtifact) {
    for (std::size_t d : {2u, 3u, 8u, 12u}) {
        const Matrix a = ladder::lowering(d);
        const Matrix ad = ladder::raising(d);
        Matrix expected = Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        expected(static_cast<Eigen::Index>(d - 1), static_cast<Eigen::Index>(d - 1)) -= static_cast<double>(d);
        EXPECT_LT(detail::max_abs(a * ad - ad * a - expected), 1e-12) << "d=" << d;
        EXPECT_LT(detail::max_abs(ad * a - ladder::number(d)), 1e-12);
    }
}

TEST(FockLeakage, TopLevelPopulation) {
    const auto layout = HilbertLayout::system(1, {6});
    EXPECT_EQ(fock_leakage(make_state(layout, {0, 3})), 0.0);
    EXPECT_EQ(fock_leakage(make_state(layout, {1, 4})), 1.0);
    EXPECT_EQ(fock_leakage(make_state(layout, {0, 5})), 1.0);
    EXPECT_EQ(fock_leakage(make_state(HilbertLayout::system(2), {0, 1})), 0.0);
}

TEST(NormPreservation, GateUnitariesKeepUnitNorm) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        CounterRng rng(seed);
        const std::size_t q = 1 + rng.below(3);
        const auto sys = SystemLayout::of(q);
        const auto h = verification::random_spin_hamiltonian(rng, sys, q);
        const auto psi = verification::random_state(rng, sys.layout());
        const auto out = psi.apply(matrix_exponential(h.to_dense(sys), rng.uniform(0.0, 5.0)));
        EXPECT_NEAR(out.amplitudes().norm(), 1.0, 1e-12);
        const auto gate = controlled_gate(sys.layout().with_ancilla(),
                                          {verification::random_pauli_string(rng, q), rng.uniform(-3.0, 3.0)});
        const auto with_anc = verification::random_state(rng, sys.layout().with_ancilla());
        EXPECT_NEAR(with_anc.apply(gate).amplitudes().norm(), 1.0, 1e-12);
    }
}

TEST(PartialTrace, TensorThenTraceRoundTrips) {
    CounterRng rng(3);
    const auto sys = HilbertLayout::system(2);
    const auto psi = verification::random_state(rng, sys);
    const auto rho = DensityMatrix::pure(psi);
    const Vector plus = plus_state_amplitudes();
    const auto joint = tensor_with_ancilla(plus * plus.adjoint(), rho);
    EXPECT_TRUE(joint.layout().has_ancilla());
    EXPECT_LT(detail::max_abs(trace_out_ancilla(joint).elements() - rho.elements()), 1e-15);
}

} // namespace
} // namespace ntcorr
