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

#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ntcorr {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = std::numbers::pi;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Subsystem/operator/state dimensions disagree, or an index is out of range.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// An operator required to be Hermitian (or unitary) is not, within tolerance.
class HermiticityError : public Error {
  public:
    using Error::Error;
};

/// A caller-supplied argument violates a documented precondition.
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// A numerical procedure failed its own self-check (non-convergence, drift,
/// unmatched decomposition).
class NumericalError : public Error {
  public:
    using Error::Error;
};

/// Population in the top Fock levels exceeds the configured threshold.
class TruncationError : public NumericalError {
  public:
    TruncationError(const std::string &what, double leakage, std::size_t suggested_cutoff)
        : NumericalError(what), leakage_(leakage), suggested_cutoff_(suggested_cutoff) {}

    double leakage() const noexcept { return leakage_; }
    std::size_t suggested_cutoff() const noexcept { return suggested_cutoff_; }

  private:
    double leakage_;
    std::size_t suggested_cutoff_;
};

namespace detail {

inline double max_abs(const Matrix &m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const Matrix &m) {
    return max_abs(m - m.adjoint());
}

inline void require_square(const Matrix &m, const char *what) {
    if (m.rows() != m.cols()) {
        throw DimensionError(std::string(what) + ": matrix is not square");
    }
}

inline void require_hermitian(const Matrix &m, double tol, const char *what) {
    require_square(m, what);
    const double defect = hermiticity_defect(m);
    if (defect > tol) {
        throw HermiticityError(std::string(what) + ": operator is not Hermitian (defect " +
                               std::to_string(defect) + ")");
    }
}

inline double unitarity_defect(const Matrix &u) {
    return max_abs(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols()));
}

/// i^n for integer n >= 0, exact.
inline Complex i_pow(int n) {
    switch (((n % 4) + 4) % 4) {
    case 0:
        return {1.0, 0.0};
    case 1:
        return {0.0, 1.0};
    case 2:
        return {-1.0, 0.0};
    default:
        return {0.0, -1.0};
    }
}

inline Matrix kron(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

} // namespace detail

/// Single-qubit matrices in the level basis (|0>, |1>), with sigma_z|0> = +|0>.
namespace pauli_matrix {

inline Matrix identity() { return Matrix::Identity(2, 2); }

inline Matrix x() {
    Matrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

inline Matrix y() {
    Matrix m(2, 2);
    m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return m;
}

inline Matrix z() {
    Matrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

/// sigma_+ = (sigma_x + i sigma_y)/2 = |0><1|.
inline Matrix raising() { return 0.5 * (x() + kI * y()); }

/// sigma_- = (sigma_x - i sigma_y)/2 = |1><0|.
inline Matrix lowering() { return 0.5 * (x() - kI * y()); }

} // namespace pauli_matrix

} // namespace ntcorr
