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

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "ntcorr/core.hpp"
#include "ntcorr/gates.hpp"
#include "ntcorr/hilbert.hpp"
#include "ntcorr/operators.hpp"

/// Brute-force ground truth that never builds the ancilla. Evolutions are
/// computed with Pade scaling-and-squaring (Eigen's MatrixFunctions), not
/// with the eigendecomposition path used by the protocol; only the Kronecker
/// embedding of operators is shared.
namespace ntcorr::oracle {

/// <phi| O_{n-1}(t_{n-1}) ... O_0(t_0) |phi> or Tr(... rho_0), with
/// O_k(t_k) = U^dag(t_k; t_0) O_k U(t_k; t_0).
struct HeisenbergRequest {
    SystemLayout layout;
    std::vector<Matrix> operators;
    std::vector<double> times;
    Schedule history;
    std::variant<Vector, Matrix> state;
};

/// exp(-i H dt) by Pade approximation.
inline Matrix pade_evolution(const Matrix &h, double dt) {
    const Matrix gen = Complex(0.0, -dt) * h;
    return gen.exp();
}

/// U(to; from) along the piecewise-constant history.
inline Matrix evolution(const SystemLayout &layout, const Schedule &history, double from, double to) {
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    Matrix u = Matrix::Identity(d, d);
    if (to == from) {
        return u;
    }
    const Schedule slice = history.slice(from, to);
    for (const auto &seg : slice.segments()) {
        u = pade_evolution(seg.hamiltonian.to_dense(layout), seg.duration) * u;
    }
    return u;
}

inline Complex heisenberg_correlator(const HeisenbergRequest &req) {
    const auto d = static_cast<Eigen::Index>(req.layout.total_dim());
    const std::size_t n = req.operators.size();
    if (n == 0 || req.times.size() != n) {
        throw InvalidArgument("heisenberg_correlator: need one time per operator and n >= 1");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (req.operators[k].rows() != d || req.operators[k].cols() != d) {
            throw DimensionError("heisenberg_correlator: operator " + std::to_string(k) + " has wrong dimension");
        }
        if (k > 0 && req.times[k] < req.times[k - 1]) {
            throw InvalidArgument("heisenberg_correlator: times must be non-decreasing");
        }
    }
    Matrix product = Matrix::Identity(d, d);
    Matrix u = Matrix::Identity(d, d);  // U(t_k; t_0), advanced incrementally
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) {
            u = evolution(req.layout, req.history, req.times[k - 1], req.times[k]) * u;
        }
        product = (u.adjoint() * req.operators[k] * u) * product;
    }
    return std::visit(
        [&](const auto &s) -> Complex {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Vector>) {
                if (s.size() != d) {
                    throw DimensionError("heisenberg_correlator: state has wrong dimension");
                }
                return s.dot(product * s);
            } else {
                if (s.rows() != d || s.cols() != d) {
                    throw DimensionError("heisenberg_correlator: density matrix has wrong dimension");
                }
                return (product * s).trace();
            }
        },
        req.state);
}

/// exp(-beta H) / Tr exp(-beta H).
inline DensityMatrix gibbs_state(const SystemLayout &layout, const Matrix &h, double beta) {
    if (!std::isfinite(beta) || beta < 0.0) {
        throw InvalidArgument("gibbs_state: beta must be finite and >= 0");
    }
    if (static_cast<std::size_t>(h.rows()) != layout.total_dim()) {
        throw DimensionError("gibbs_state: Hamiltonian dimension does not match layout");
    }
    detail::require_hermitian(h, 1e-10, "gibbs_state");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
    const RealVector &e = es.eigenvalues();
    const double e0 = e.minCoeff();
    RealVector w(e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        w(i) = std::exp(-beta * (e(i) - e0));
    }
    w /= w.sum();
    Matrix rho = es.eigenvectors() * w.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    rho = 0.5 * (rho + rho.adjoint());
    return DensityMatrix(layout.layout(), std::move(rho));
}

/// Fermionic ladder operator on n_modes modes in the occupation basis,
/// written directly from occupation numbers. Mode r is qubit r-1 and an
/// occupied mode is qubit level 0; the string sign is the parity of empty
/// modes below p, which is what the Pauli string sigma_z^1 ... sigma_z^{p-1}
/// evaluates to in that basis.
inline Matrix fermion_matrix(std::size_t p, FermionKind kind, std::size_t n_modes) {
    if (n_modes < 1 || n_modes > 6 || p < 1 || p > n_modes) {
        throw DimensionError("fermion_matrix: need 1 <= p <= n_modes <= 6");
    }
    const std::size_t dim = std::size_t{1} << n_modes;
    auto bit_of = [n_modes](std::size_t mode) { return n_modes - mode; };  // qubit site mode-1 is bit n-mode
    auto occupied = [&](std::size_t index, std::size_t mode) { return ((index >> bit_of(mode)) & 1U) == 0; };
    Matrix cdag = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t col = 0; col < dim; ++col) {
        if (occupied(col, p)) {
            continue;
        }
        int empties_below = 0;
        for (std::size_t r = 1; r < p; ++r) {
            empties_below += occupied(col, r) ? 0 : 1;
        }
        const std::size_t row = col & ~(std::size_t{1} << bit_of(p));
        cdag(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = (empties_below % 2 == 0) ? 1.0 : -1.0;
    }
    return kind == FermionKind::creation ? cdag : Matrix(cdag.adjoint());
}

/// <phi|U|phi> through a textbook Hadamard test with its own control qubit
/// (|0> idle, |1> applies U): H, controlled-U, [S^dag for the imaginary
/// part], H, then <Z> on the control.
inline Complex hadamard_test_baseline(const Vector &phi, const Matrix &u) {
    const auto d = phi.size();
    if (u.rows() != d || u.cols() != d) {
        throw DimensionError("hadamard_test_baseline: unitary dimension does not match state");
    }
    if (detail::unitarity_defect(u) > 1e-10) {
        throw InvalidArgument("hadamard_test_baseline: operator is not unitary");
    }
    Matrix had(2, 2);
    had << 1.0, 1.0, 1.0, -1.0;
    had /= std::sqrt(2.0);
    const Matrix id = Matrix::Identity(d, d);
    const Matrix h_full = detail::kron(had, id);
    Matrix cu = Matrix::Zero(2 * d, 2 * d);
    cu.block(0, 0, d, d) = id;
    cu.block(d, d, d, d) = u;
    Matrix sdag = Matrix::Identity(2, 2);
    sdag(1, 1) = Complex(0.0, -1.0);
    Matrix z_full = Matrix::Zero(2 * d, 2 * d);
    z_full.block(0, 0, d, d) = id;
    z_full.block(d, d, d, d) = -id;

    Vector start = Vector::Zero(2 * d);
    start.head(d) = phi;
    auto measure = [&](const Matrix &phase) {
        const Vector out = h_full * detail::kron(phase, id) * cu * h_full * start;
        return out.dot(z_full * out).real();
    };
    return {measure(Matrix::Identity(2, 2)), measure(sdag)};
}

/// Mixed-state Hadamard test: Tr(U rho).
inline Complex hadamard_test_baseline(const DensityMatrix &rho, const Matrix &u) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.elements());
    Complex acc = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double w = es.eigenvalues()(i);
        if (w > 1e-15) {
            acc += w * hadamard_test_baseline(Vector(es.eigenvectors().col(i)), u);
        }
    }
    return acc;
}

} // namespace ntcorr::oracle
