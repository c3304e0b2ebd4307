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
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ntcorr/core.hpp"
#include "ntcorr/hilbert.hpp"
#include "ntcorr/operators.hpp"

namespace ntcorr {

namespace detail {
inline constexpr double kGeneratorHermitianTol = 1e-10;
inline constexpr double kUnitarityTol = 1e-11;
} // namespace detail

/// exp(-i H t) for a fixed Hermitian H, from one eigendecomposition that is
/// reused for every t.
class HermitianPropagator {
  public:
    HermitianPropagator() = default;

    explicit HermitianPropagator(const Matrix &h) {
        detail::require_hermitian(h, detail::kGeneratorHermitianTol, "HermitianPropagator");
        const Matrix sym = 0.5 * (h + h.adjoint());
        Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
        if (es.info() != Eigen::Success) {
            throw NumericalError("HermitianPropagator: eigendecomposition failed");
        }
        eigenvalues_ = es.eigenvalues();
        eigenvectors_ = es.eigenvectors();
    }

    Eigen::Index dim() const { return eigenvectors_.rows(); }
    const RealVector &eigenvalues() const { return eigenvalues_; }
    const Matrix &eigenvectors() const { return eigenvectors_; }

    Matrix at(double t) const {
        Vector phases(eigenvalues_.size());
        for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i) {
            phases(i) = std::exp(Complex(0.0, -eigenvalues_(i) * t));
        }
        Matrix u = eigenvectors_ * phases.asDiagonal() * eigenvectors_.adjoint();
        if (detail::unitarity_defect(u) > detail::kUnitarityTol) {
            throw NumericalError("HermitianPropagator: result is not unitary within 1e-11");
        }
        return u;
    }

  private:
    RealVector eigenvalues_;
    Matrix eigenvectors_;
};

/// exp(-i H t) for Hermitian H.
inline Matrix matrix_exponential(const Matrix &h, double t) { return HermitianPropagator(h).at(t); }

/// The ancilla-controlled gate exp(-i |g><g| (x) angle * generator).
struct ControlledGateSpec {
    OperatorSpec generator;
    double angle = kPi / 2;
};

namespace detail {

inline void require_hermitian_generator(const OperatorSpec &op, const char *what) {
    if (!op.is_hermitian()) {
        throw HermiticityError(std::string(what) + ": generator is not Hermitian: " + op.label());
    }
}

/// Identity on the |e> block, `g_block` on the |g> block.
inline Matrix controlled_block(const Matrix &g_block) {
    const auto d = g_block.rows();
    Matrix u = Matrix::Zero(2 * d, 2 * d);
    u.block(0, 0, d, d).setIdentity();
    u.block(d, d, d, d) = g_block;
    return u;
}

/// I_ancilla (x) u_system.
inline Matrix uncontrolled(const Matrix &u_system) {
    const auto d = u_system.rows();
    Matrix u = Matrix::Zero(2 * d, 2 * d);
    u.block(0, 0, d, d) = u_system;
    u.block(d, d, d, d) = u_system;
    return u;
}

} // namespace detail

/// Dense unitary of the controlled gate on a layout with ancilla.
inline Matrix controlled_gate(const HilbertLayout &layout, const ControlledGateSpec &spec) {
    detail::require_ancilla(layout, "controlled_gate");
    detail::require_hermitian_generator(spec.generator, "controlled_gate");
    const Matrix g = spec.generator.to_dense(SystemLayout(layout.system_part()));
    return detail::controlled_block(matrix_exponential(g, spec.angle));
}

/// The |g>-block exp(-i angle O) of the controlled gate.
inline Matrix controlled_gate_block(const SystemLayout &system, const ControlledGateSpec &spec) {
    detail::require_hermitian_generator(spec.generator, "controlled_gate_block");
    return matrix_exponential(spec.generator.to_dense(system), spec.angle);
}

/// Piecewise-constant Hamiltonian history. The final segment may have
/// infinite duration, which describes open-ended time-independent dynamics;
/// such a schedule can be sliced but not evolved as a whole.
class Schedule {
  public:
    struct Segment {
        OperatorSpec hamiltonian;
        double duration = 0.0;
    };

    Schedule() = default;

    explicit Schedule(std::vector<Segment> segments) : segments_(std::move(segments)) {
        for (std::size_t i = 0; i < segments_.size(); ++i) {
            const auto &s = segments_[i];
            if (!(s.duration >= 0.0) || std::isnan(s.duration)) {
                throw InvalidArgument("Schedule: durations must be >= 0");
            }
            if (std::isinf(s.duration) && i + 1 != segments_.size()) {
                throw InvalidArgument("Schedule: only the final segment may be open-ended");
            }
            detail::require_hermitian_generator(s.hamiltonian, "Schedule");
        }
    }

    /// Time-independent H for all t >= 0.
    static Schedule constant(const OperatorSpec &h) {
        return Schedule({{h, std::numeric_limits<double>::infinity()}});
    }

    const std::vector<Segment> &segments() const { return segments_; }
    bool empty() const { return segments_.empty(); }

    double total_duration() const {
        double t = 0.0;
        for (const auto &s : segments_) {
            t += s.duration;
        }
        return t;
    }

    bool is_time_independent() const { return segments_.size() <= 1; }

    /// The part of the history between absolute times `from` <= `to`.
    Schedule slice(double from, double to) const {
        if (!(from <= to) || from < 0.0) {
            throw InvalidArgument("Schedule::slice: need 0 <= from <= to");
        }
        if (to > total_duration() + 1e-12) {
            throw InvalidArgument("Schedule::slice: interval extends past the end of the schedule");
        }
        std::vector<Segment> out;
        double start = 0.0;
        for (const auto &s : segments_) {
            const double end = start + s.duration;
            const double lo = std::max(start, from);
            const double hi = std::min(end, to);
            if (hi > lo) {
                out.push_back({s.hamiltonian, hi - lo});
            }
            start = end;
            if (start >= to) {
                break;
            }
        }
        return Schedule(std::move(out));
    }

  private:
    std::vector<Segment> segments_;
};

/// Caches one eigendecomposition per schedule segment for a given layout.
class SchedulePropagator {
  public:
    SchedulePropagator(const SystemLayout &layout, const Schedule &schedule) : schedule_(schedule) {
        props_.reserve(schedule_.segments().size());
        for (const auto &s : schedule_.segments()) {
            props_.emplace_back(s.hamiltonian.to_dense(layout));
        }
        dim_ = static_cast<Eigen::Index>(layout.total_dim());
    }

    /// U(to; from), product of segment exponentials (later segments on the left).
    Matrix unitary(double from, double to) const {
        if (!(from <= to) || from < 0.0) {
            throw InvalidArgument("SchedulePropagator: need 0 <= from <= to");
        }
        if (to > schedule_.total_duration() + 1e-12) {
            throw InvalidArgument("SchedulePropagator: interval extends past the end of the schedule");
        }
        Matrix u = Matrix::Identity(dim_, dim_);
        double start = 0.0;
        for (std::size_t i = 0; i < props_.size(); ++i) {
            const double end = start + schedule_.segments()[i].duration;
            const double lo = std::max(start, from);
            const double hi = std::min(end, to);
            if (hi > lo) {
                u = props_[i].at(hi - lo) * u;
            }
            start = end;
            if (start >= to) {
                break;
            }
        }
        return u;
    }

  private:
    Schedule schedule_;
    std::vector<HermitianPropagator> props_;
    Eigen::Index dim_ = 0;
};

namespace detail {

inline Matrix schedule_unitary(const SystemLayout &system, const Schedule &schedule) {
    if (std::isinf(schedule.total_duration())) {
        throw InvalidArgument("evolve: schedule is open-ended; slice it first");
    }
    return SchedulePropagator(system, schedule).unitary(0.0, schedule.total_duration());
}

template <class State>
Matrix full_evolution(const State &state, const Schedule &schedule) {
    const auto &layout = state.layout();
    if (layout.has_ancilla()) {
        return uncontrolled(schedule_unitary(SystemLayout(layout.system_part()), schedule));
    }
    return schedule_unitary(SystemLayout(layout), schedule);
}

} // namespace detail

/// Applies the schedule's segments in order. On a layout with ancilla the
/// Hamiltonians act on the system part only.
inline StateVector evolve(const StateVector &psi, const Schedule &schedule) {
    if (schedule.empty()) {
        return psi;
    }
    return psi.apply(detail::full_evolution(psi, schedule));
}

inline DensityMatrix evolve(const DensityMatrix &rho, const Schedule &schedule) {
    if (schedule.empty()) {
        return rho;
    }
    return rho.apply(detail::full_evolution(rho, schedule));
}

enum class FermionKind { creation, annihilation };

/// Jordan-Wigner image of b^dag_p / b_p on `n_modes` modes (p is 1-based;
/// mode r lives on qubit site r-1):
///   b^dag_p = sigma_+^p prod_{r<p} sigma_z^r,  sigma_+ = (X + iY)/2.
/// With sigma_+ = |0><1|, an occupied mode is qubit level 0.
inline OperatorSpec jordan_wigner(std::size_t p, FermionKind kind, std::size_t n_modes) {
    if (p < 1 || p > n_modes) {
        throw DimensionError("jordan_wigner: mode index " + std::to_string(p) + " outside 1.." +
                             std::to_string(n_modes));
    }
    std::vector<PauliString::Factor> tail;
    for (std::size_t r = 1; r < p; ++r) {
        tail.emplace_back(r - 1, PauliAxis::Z);
    }
    auto with = [&](PauliAxis axis) {
        auto f = tail;
        f.emplace_back(p - 1, axis);
        return OperatorSpec(PauliString(std::move(f)));
    };
    const Complex y_coef = kind == FermionKind::creation ? 0.5 * kI : -0.5 * kI;
    return OperatorSpec::weighted_sum({{0.5, with(PauliAxis::X)}, {y_coef, with(PauliAxis::Y)}});
}

/// Gates used by an order-n correlator with m gates per controlled operation
/// and q gates per free evolution: (m+q)n - q.
inline long long gate_count(long long n, long long m, long long q) {
    if (n < 1 || m < 1 || q < 0) {
        throw InvalidArgument("gate_count: need n >= 1, m >= 1, q >= 0");
    }
    return (m + q) * n - q;
}

} // namespace ntcorr
