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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ntcorr/core.hpp"

/// Composite Hilbert spaces: one optional ancilla qubit, system qubits and
/// truncated bosonic modes, with dense states and density matrices.
///
/// Conventions fixed for the whole library:
///   * the ancilla, when present, is subsystem 0;
///   * ancilla |e> is level 0 and |g> is level 1;
///   * sigma_z|0> = +|0> for every qubit;
///   * basis ordering is row-major over the subsystem list (subsystem 0 is
///     the slowest-varying index);
///   * hbar = 1.
namespace ntcorr {

enum class SubsystemKind { ancilla, qubit, boson_mode };

struct Subsystem {
    SubsystemKind kind = SubsystemKind::qubit;
    std::size_t dim = 2;

    static Subsystem ancilla() { return {SubsystemKind::ancilla, 2}; }
    static Subsystem qubit() { return {SubsystemKind::qubit, 2}; }
    static Subsystem mode(std::size_t cutoff) { return {SubsystemKind::boson_mode, cutoff}; }

    bool operator==(const Subsystem &) const = default;
};

inline constexpr std::size_t kAncillaExcited = 0;
inline constexpr std::size_t kAncillaGround = 1;

class HilbertLayout {
  public:
    HilbertLayout() = default;

    explicit HilbertLayout(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems)) {
        for (std::size_t i = 0; i < subsystems_.size(); ++i) {
            const auto &s = subsystems_[i];
            switch (s.kind) {
            case SubsystemKind::ancilla:
                if (i != 0) {
                    throw InvalidArgument("HilbertLayout: the ancilla must be subsystem 0");
                }
                [[fallthrough]];
            case SubsystemKind::qubit:
                if (s.dim != 2) {
                    throw DimensionError("HilbertLayout: qubit subsystems have dimension 2");
                }
                break;
            case SubsystemKind::boson_mode:
                if (s.dim < 2) {
                    throw DimensionError("HilbertLayout: Fock cutoff must be >= 2");
                }
                break;
            }
        }
    }

    /// `qubits` system qubits followed by one mode per entry of `cutoffs`.
    static HilbertLayout system(std::size_t qubits, std::span<const std::size_t> cutoffs = {}) {
        std::vector<Subsystem> subs(qubits, Subsystem::qubit());
        for (auto d : cutoffs) {
            subs.push_back(Subsystem::mode(d));
        }
        return HilbertLayout(std::move(subs));
    }

    static HilbertLayout system(std::size_t qubits, std::initializer_list<std::size_t> cutoffs) {
        std::vector<std::size_t> c(cutoffs);
        return system(qubits, std::span<const std::size_t>(c));
    }

    bool has_ancilla() const {
        return !subsystems_.empty() && subsystems_.front().kind == SubsystemKind::ancilla;
    }

    HilbertLayout with_ancilla() const {
        if (has_ancilla()) {
            throw InvalidArgument("HilbertLayout: layout already has an ancilla");
        }
        std::vector<Subsystem> subs;
        subs.reserve(subsystems_.size() + 1);
        subs.push_back(Subsystem::ancilla());
        subs.insert(subs.end(), subsystems_.begin(), subsystems_.end());
        return HilbertLayout(std::move(subs));
    }

    HilbertLayout system_part() const {
        if (!has_ancilla()) {
            return *this;
        }
        return HilbertLayout(std::vector<Subsystem>(subsystems_.begin() + 1, subsystems_.end()));
    }

    std::size_t size() const { return subsystems_.size(); }
    const Subsystem &operator[](std::size_t i) const { return subsystems_.at(i); }
    const std::vector<Subsystem> &subsystems() const { return subsystems_; }

    std::size_t total_dim() const {
        return std::accumulate(subsystems_.begin(), subsystems_.end(), std::size_t{1},
                               [](std::size_t acc, const Subsystem &s) { return acc * s.dim; });
    }

    /// Distance in the flat index between consecutive levels of subsystem i.
    std::size_t stride(std::size_t i) const {
        std::size_t s = 1;
        for (std::size_t j = i + 1; j < subsystems_.size(); ++j) {
            s *= subsystems_[j].dim;
        }
        return s;
    }

    std::size_t level(std::size_t flat_index, std::size_t subsystem) const {
        return (flat_index / stride(subsystem)) % subsystems_.at(subsystem).dim;
    }

    std::size_t count(SubsystemKind kind) const {
        return static_cast<std::size_t>(std::count_if(
            subsystems_.begin(), subsystems_.end(), [kind](const Subsystem &s) { return s.kind == kind; }));
    }

    bool operator==(const HilbertLayout &) const = default;

  private:
    std::vector<Subsystem> subsystems_;
};

/// A layout that by construction carries no ancilla. Everything that must
/// stay independent of the ancilla protocol works on this type.
class SystemLayout {
  public:
    SystemLayout() = default;

    explicit SystemLayout(HilbertLayout layout) : layout_(std::move(layout)) {
        if (layout_.has_ancilla()) {
            throw InvalidArgument("SystemLayout: an ancilla is not allowed here");
        }
    }

    static SystemLayout of(std::size_t qubits, std::initializer_list<std::size_t> cutoffs = {}) {
        return SystemLayout(HilbertLayout::system(qubits, cutoffs));
    }

    const HilbertLayout &layout() const { return layout_; }
    std::size_t size() const { return layout_.size(); }
    std::size_t total_dim() const { return layout_.total_dim(); }
    const Subsystem &operator[](std::size_t i) const { return layout_[i]; }

    bool operator==(const SystemLayout &) const = default;

  private:
    HilbertLayout layout_;
};

namespace detail {
inline constexpr double kNormTol = 1e-12;
inline constexpr double kApplyNormTol = 1e-10;
inline constexpr double kDensityTol = 1e-12;
inline constexpr double kPositivityTol = 1e-10;
inline constexpr double kObservableTol = 1e-10;
} // namespace detail

class StateVector {
  public:
    /// Requires unit norm within 1e-12.
    StateVector(HilbertLayout layout, Vector amplitudes)
        : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
        if (static_cast<std::size_t>(amplitudes_.size()) != layout_.total_dim()) {
            throw DimensionError("StateVector: amplitude count does not match layout dimension");
        }
        if (std::abs(amplitudes_.norm() - 1.0) > detail::kNormTol) {
            throw InvalidArgument("StateVector: amplitudes are not normalized");
        }
    }

    /// Normalizes `amplitudes` first; rejects the zero vector.
    static StateVector normalized(HilbertLayout layout, Vector amplitudes) {
        const double n = amplitudes.norm();
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw InvalidArgument("StateVector: cannot normalize a zero or non-finite vector");
        }
        amplitudes /= n;
        return StateVector(std::move(layout), std::move(amplitudes));
    }

    const HilbertLayout &layout() const { return layout_; }
    const Vector &amplitudes() const { return amplitudes_; }
    std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }

    /// Returns U|psi>; U must be unitary, which is checked through the norm.
    StateVector apply(const Matrix &u) const {
        if (u.rows() != amplitudes_.size() || u.cols() != amplitudes_.size()) {
            throw DimensionError("StateVector::apply: operator dimension mismatch");
        }
        Vector out = u * amplitudes_;
        if (std::abs(out.norm() - 1.0) > detail::kApplyNormTol) {
            throw NumericalError("StateVector::apply: norm not preserved (operator not unitary?)");
        }
        return StateVector(layout_, std::move(out), Unchecked{});
    }

  private:
    struct Unchecked {};
    StateVector(HilbertLayout layout, Vector amplitudes, Unchecked)
        : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {}

    HilbertLayout layout_;
    Vector amplitudes_;
};

class DensityMatrix {
  public:
    /// Validates Hermiticity, unit trace and positivity.
    DensityMatrix(HilbertLayout layout, Matrix elements)
        : layout_(std::move(layout)), elements_(std::move(elements)) {
        const auto d = static_cast<Eigen::Index>(layout_.total_dim());
        if (elements_.rows() != d || elements_.cols() != d) {
            throw DimensionError("DensityMatrix: matrix dimension does not match layout");
        }
        if (detail::hermiticity_defect(elements_) > detail::kDensityTol) {
            throw HermiticityError("DensityMatrix: not Hermitian");
        }
        if (std::abs(elements_.trace() - Complex(1.0)) > detail::kDensityTol) {
            throw InvalidArgument("DensityMatrix: trace is not 1");
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(elements_, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -detail::kPositivityTol) {
            throw InvalidArgument("DensityMatrix: negative eigenvalue");
        }
    }

    static DensityMatrix pure(const StateVector &psi) {
        Matrix rho = psi.amplitudes() * psi.amplitudes().adjoint();
        return DensityMatrix(psi.layout(), std::move(rho), Unchecked{});
    }

    static DensityMatrix maximally_mixed(const HilbertLayout &layout) {
        const auto d = static_cast<Eigen::Index>(layout.total_dim());
        return DensityMatrix(layout, Matrix::Identity(d, d) / static_cast<double>(d), Unchecked{});
    }

    const HilbertLayout &layout() const { return layout_; }
    const Matrix &elements() const { return elements_; }
    std::size_t dim() const { return static_cast<std::size_t>(elements_.rows()); }

    /// Returns U rho U^dagger.
    DensityMatrix apply(const Matrix &u) const {
        if (u.rows() != elements_.rows() || u.cols() != elements_.cols()) {
            throw DimensionError("DensityMatrix::apply: operator dimension mismatch");
        }
        Matrix out = u * elements_ * u.adjoint();
        if (std::abs(out.trace() - Complex(1.0)) > detail::kApplyNormTol) {
            throw NumericalError("DensityMatrix::apply: trace not preserved (operator not unitary?)");
        }
        return DensityMatrix(layout_, std::move(out), Unchecked{});
    }

  private:
    struct Unchecked {};
    DensityMatrix(HilbertLayout layout, Matrix elements, Unchecked)
        : layout_(std::move(layout)), elements_(std::move(elements)) {}

    friend DensityMatrix tensor_with_ancilla(const Matrix &, const DensityMatrix &);
    friend DensityMatrix trace_out_ancilla(const DensityMatrix &);

    HilbertLayout layout_;
    Matrix elements_;
};

/// Computational / Fock basis state with the given level on every subsystem.
inline StateVector make_state(const HilbertLayout &layout, std::span<const std::size_t> occupation) {
    if (occupation.size() != layout.size()) {
        throw DimensionError("make_state: need one level index per subsystem");
    }
    std::size_t index = 0;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (occupation[i] >= layout[i].dim) {
            throw DimensionError("make_state: level " + std::to_string(occupation[i]) +
                                 " out of range for subsystem " + std::to_string(i));
        }
        index = index * layout[i].dim + occupation[i];
    }
    Vector amps = Vector::Zero(static_cast<Eigen::Index>(layout.total_dim()));
    amps(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(layout, std::move(amps));
}

inline StateVector make_state(const HilbertLayout &layout, std::initializer_list<std::size_t> occupation) {
    std::vector<std::size_t> occ(occupation);
    return make_state(layout, std::span<const std::size_t>(occ));
}

/// <psi|A|psi> for Hermitian A; the imaginary residue is checked, then dropped.
inline double expectation(const StateVector &psi, const Matrix &op) {
    if (static_cast<std::size_t>(op.rows()) != psi.dim()) {
        throw DimensionError("expectation: operator dimension does not match state");
    }
    detail::require_hermitian(op, detail::kObservableTol, "expectation");
    const Complex v = psi.amplitudes().dot(op * psi.amplitudes());
    if (std::abs(v.imag()) > detail::kObservableTol * std::max(1.0, detail::max_abs(op))) {
        throw NumericalError("expectation: imaginary residue above tolerance");
    }
    return v.real();
}

/// Tr(A rho) for Hermitian A.
inline double expectation(const DensityMatrix &rho, const Matrix &op) {
    if (static_cast<std::size_t>(op.rows()) != rho.dim()) {
        throw DimensionError("expectation: operator dimension does not match state");
    }
    detail::require_hermitian(op, detail::kObservableTol, "expectation");
    const Complex v = op.transpose().cwiseProduct(rho.elements()).sum();
    if (std::abs(v.imag()) > detail::kObservableTol * std::max(1.0, detail::max_abs(op))) {
        throw NumericalError("expectation: imaginary residue above tolerance");
    }
    return v.real();
}

struct LocalOperator {
    std::size_t site = 0;
    Matrix matrix;
};

/// Kronecker embedding of site-local operators; identity on every other site.
inline Matrix embed_operator(const HilbertLayout &layout, std::span<const LocalOperator> locals) {
    std::vector<const Matrix *> by_site(layout.size(), nullptr);
    for (const auto &l : locals) {
        if (l.site >= layout.size()) {
            throw DimensionError("embed_operator: site " + std::to_string(l.site) + " out of range");
        }
        if (by_site[l.site] != nullptr) {
            throw InvalidArgument("embed_operator: site " + std::to_string(l.site) + " used twice");
        }
        const auto d = static_cast<Eigen::Index>(layout[l.site].dim);
        if (l.matrix.rows() != d || l.matrix.cols() != d) {
            throw DimensionError("embed_operator: local operator dimension does not match site " +
                                 std::to_string(l.site));
        }
        by_site[l.site] = &l.matrix;
    }
    Matrix out = Matrix::Identity(1, 1);
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const auto d = static_cast<Eigen::Index>(layout[i].dim);
        out = by_site[i] ? detail::kron(out, *by_site[i]) : detail::kron(out, Matrix::Identity(d, d));
    }
    return out;
}

inline Matrix embed_operator(const HilbertLayout &layout, std::initializer_list<LocalOperator> locals) {
    std::vector<LocalOperator> v(locals);
    return embed_operator(layout, std::span<const LocalOperator>(v));
}

/// Truncated ladder operators in the Fock basis |0>,...,|d-1>.
namespace ladder {

inline Matrix lowering(std::size_t d) {
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t n = 1; n < d; ++n) {
        a(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n)) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

inline Matrix raising(std::size_t d) { return lowering(d).adjoint(); }

inline Matrix number(std::size_t d) {
    Matrix n = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
        n(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = static_cast<double>(k);
    }
    return n;
}

/// a + a^dagger
inline Matrix position(std::size_t d) { return lowering(d) + raising(d); }

/// i (a^dagger - a)
inline Matrix momentum(std::size_t d) { return kI * (raising(d) - lowering(d)); }

} // namespace ladder

namespace detail {

/// Flat indices belonging to the "leakage" levels of a mode: the top two
/// (top one for d < 4, where two would cover half the space).
inline bool is_leakage_level(std::size_t level, std::size_t d) {
    const std::size_t top = d >= 4 ? 2 : 1;
    return level + top >= d;
}

inline double leakage_from_populations(const HilbertLayout &layout, const RealVector &pops) {
    double worst = 0.0;
    for (std::size_t s = 0; s < layout.size(); ++s) {
        if (layout[s].kind != SubsystemKind::boson_mode) {
            continue;
        }
        double p = 0.0;
        for (Eigen::Index i = 0; i < pops.size(); ++i) {
            if (is_leakage_level(layout.level(static_cast<std::size_t>(i), s), layout[s].dim)) {
                p += pops(i);
            }
        }
        worst = std::max(worst, p);
    }
    return worst;
}

} // namespace detail

/// Largest population, over all modes, in the top Fock levels. Zero without modes.
inline double fock_leakage(const StateVector &psi) {
    return detail::leakage_from_populations(psi.layout(), psi.amplitudes().cwiseAbs2());
}

inline double fock_leakage(const DensityMatrix &rho) {
    return detail::leakage_from_populations(rho.layout(), rho.elements().diagonal().real());
}

namespace detail {

inline void require_ancilla(const HilbertLayout &layout, const char *what) {
    if (!layout.has_ancilla()) {
        throw InvalidArgument(std::string(what) + ": layout has no ancilla at subsystem 0");
    }
}

inline Complex ancilla_coherence_via_paulis(double sx, double sy) { return 0.5 * Complex(sx, sy); }

} // namespace detail

/// Expectations of sigma_x and sigma_y on the ancilla.
template <class State>
std::pair<double, double> ancilla_pauli_expectations(const State &state) {
    detail::require_ancilla(state.layout(), "ancilla_pauli_expectations");
    const LocalOperator sx{0, pauli_matrix::x()};
    const LocalOperator sy{0, pauli_matrix::y()};
    return {expectation(state, embed_operator(state.layout(), {sx})),
            expectation(state, embed_operator(state.layout(), {sy}))};
}

namespace detail {

inline Complex coherence_direct(const StateVector &psi) {
    const auto half = static_cast<Eigen::Index>(psi.dim() / 2);
    const auto &a = psi.amplitudes();
    // sum_s <g,s|psi><psi|e,s>
    return a.head(half).dot(a.tail(half));
}

inline Complex coherence_direct(const DensityMatrix &rho) {
    const auto half = static_cast<Eigen::Index>(rho.dim() / 2);
    return rho.elements().block(half, 0, half, half).trace();
}

} // namespace detail

/// Tr(|e><g| rho). Computed directly and through (<sigma_x> + i<sigma_y>)/2;
/// the two routes must agree within 1e-12.
template <class State>
Complex ancilla_coherence(const State &state) {
    detail::require_ancilla(state.layout(), "ancilla_coherence");
    const Complex direct = detail::coherence_direct(state);
    const auto [sx, sy] = ancilla_pauli_expectations(state);
    const Complex via_paulis = detail::ancilla_coherence_via_paulis(sx, sy);
    if (std::abs(direct - via_paulis) > 1e-12) {
        throw NumericalError("ancilla_coherence: direct and Pauli routes disagree");
    }
    return direct;
}

/// |+><+| (x) rho_system with |+> = (|e> + |g>)/sqrt(2).
inline DensityMatrix tensor_with_ancilla(const Matrix &ancilla_rho, const DensityMatrix &system) {
    return DensityMatrix(system.layout().with_ancilla(), detail::kron(ancilla_rho, system.elements()),
                         DensityMatrix::Unchecked{});
}

/// Partial trace over the ancilla.
inline DensityMatrix trace_out_ancilla(const DensityMatrix &rho) {
    detail::require_ancilla(rho.layout(), "trace_out_ancilla");
    const auto half = static_cast<Eigen::Index>(rho.dim() / 2);
    Matrix sys = rho.elements().block(0, 0, half, half) + rho.elements().block(half, half, half, half);
    return DensityMatrix(rho.layout().system_part(), std::move(sys), DensityMatrix::Unchecked{});
}

inline Vector plus_state_amplitudes() {
    Vector plus(2);
    plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    return plus;
}

} // namespace ntcorr
