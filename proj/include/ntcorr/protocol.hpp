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
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ntcorr/core.hpp"
#include "ntcorr/gates.hpp"
#include "ntcorr/hilbert.hpp"
#include "ntcorr/operators.hpp"
#include "ntcorr/rng.hpp"

/// The ancilla protocol for n-time correlators.
///
/// The ancilla starts in (|e> + |g>)/sqrt(2). Controlled gates
/// exp(-i |g><g| (x) angle O_k) alternate with free system evolutions
/// U(t_k; t_{k-1}) that never touch the ancilla. The final coherence
/// Tr(|e><g| rho) equals (1/2) (-i)^n <O_{n-1}(t_{n-1}) ... O_0(t_0)>
/// when every angle is pi/2 and every O_k is a Pauli string; bosonic
/// generators are handled by differentiating in their angle at 0.
namespace ntcorr {

enum class AngleMode { fixed, derivative };

struct ControlledStep {
    OperatorSpec generator;
    AngleMode mode = AngleMode::fixed;
};

/// Free evolution of the system between absolute times `from` and `to`.
struct EvolutionStep {
    double from = 0.0;
    double to = 0.0;
    Schedule segment;
};

using PlanStep = std::variant<ControlledStep, EvolutionStep>;

class ProtocolPlan {
  public:
    /// `history` is the system Hamiltonian as a function of absolute time;
    /// the initial state is the state at times[0]. Fixed-mode generators
    /// must be single Pauli strings with coefficient 1; derivative-mode
    /// generators must be Hermitian.
    ProtocolPlan(SystemLayout system, std::vector<ControlledStep> controls, std::vector<double> times,
                 Schedule history)
        : system_(std::move(system)), controls_(std::move(controls)), times_(std::move(times)),
          history_(std::move(history)) {
        if (controls_.empty()) {
            throw InvalidArgument("ProtocolPlan: need at least one controlled step");
        }
        if (times_.size() != controls_.size()) {
            throw InvalidArgument("ProtocolPlan: need exactly one time per controlled step");
        }
        for (std::size_t k = 0; k < times_.size(); ++k) {
            if (!std::isfinite(times_[k]) || times_[k] < 0.0) {
                throw InvalidArgument("ProtocolPlan: times must be finite and >= 0");
            }
            if (k > 0 && times_[k] < times_[k - 1]) {
                throw InvalidArgument("ProtocolPlan: times must be non-decreasing");
            }
        }
        if (times_.back() > history_.total_duration() + 1e-12 && times_.back() > times_.front()) {
            throw InvalidArgument("ProtocolPlan: Hamiltonian history does not cover the time grid");
        }
        for (const auto &c : controls_) {
            if (c.mode == AngleMode::fixed && !c.generator.is_unit_pauli()) {
                throw InvalidArgument("ProtocolPlan: fixed-angle steps need a unit Pauli string, got " +
                                      c.generator.label());
            }
            detail::require_hermitian_generator(c.generator, "ProtocolPlan");
            (void)c.generator.to_dense(system_);  // site validation
        }
    }

    /// Convenience: one fixed-angle step per Pauli string.
    static ProtocolPlan spin(SystemLayout system, const std::vector<OperatorSpec> &operators,
                             std::vector<double> times, Schedule history) {
        std::vector<ControlledStep> steps;
        for (const auto &op : operators) {
            steps.push_back({op, AngleMode::fixed});
        }
        return ProtocolPlan(std::move(system), std::move(steps), std::move(times), std::move(history));
    }

    std::size_t order() const { return controls_.size(); }
    const SystemLayout &system() const { return system_; }
    HilbertLayout layout() const { return system_.layout().with_ancilla(); }
    const std::vector<ControlledStep> &controls() const { return controls_; }
    const std::vector<double> &times() const { return times_; }
    const Schedule &history() const { return history_; }

    std::size_t derivative_steps() const {
        return static_cast<std::size_t>(std::count_if(controls_.begin(), controls_.end(), [](const ControlledStep &c) {
            return c.mode == AngleMode::derivative;
        }));
    }

    /// pi/2 for fixed steps, 0 for derivative steps.
    std::vector<double> default_angles() const {
        std::vector<double> a;
        for (const auto &c : controls_) {
            a.push_back(c.mode == AngleMode::fixed ? kPi / 2 : 0.0);
        }
        return a;
    }

    /// Interleaved sequence C_0, E(t_0 -> t_1), C_1, ..., C_{n-1}.
    std::vector<PlanStep> steps() const {
        std::vector<PlanStep> out;
        for (std::size_t k = 0; k < controls_.size(); ++k) {
            if (k > 0) {
                out.emplace_back(EvolutionStep{times_[k - 1], times_[k], history_.slice(times_[k - 1], times_[k])});
            }
            out.emplace_back(controls_[k]);
        }
        return out;
    }

  private:
    SystemLayout system_;
    std::vector<ControlledStep> controls_;
    std::vector<double> times_;
    Schedule history_;
};

struct ProtocolOutcome {
    Complex coherence;
    double leakage = 0.0;
    std::variant<StateVector, DensityMatrix> final_state;
};

namespace detail {

/// System-level evolution unitaries between consecutive grid times.
inline std::vector<Matrix> gap_unitaries(const SystemLayout &system, const Schedule &history,
                                         const std::vector<double> &times) {
    std::vector<Matrix> gaps;
    if (times.size() < 2 || times.back() == times.front()) {
        const auto d = static_cast<Eigen::Index>(system.total_dim());
        gaps.assign(times.empty() ? 0 : times.size() - 1, Matrix::Identity(d, d));
        return gaps;
    }
    const SchedulePropagator prop(system, history);
    for (std::size_t k = 1; k < times.size(); ++k) {
        gaps.push_back(prop.unitary(times[k - 1], times[k]));
    }
    return gaps;
}

/// Runs one plan repeatedly at different angles with all eigensystems
/// computed once.
class PlanExecutor {
  public:
    explicit PlanExecutor(const ProtocolPlan &plan)
        : PlanExecutor(plan, gap_unitaries(plan.system(), plan.history(), plan.times())) {}

    PlanExecutor(const ProtocolPlan &plan, const std::vector<Matrix> &system_gaps) : layout_(plan.layout()) {
        for (const auto &c : plan.controls()) {
            Matrix dense = c.generator.to_dense(plan.system());
            if (c.mode == AngleMode::fixed) {
                // Unit Pauli string: exp(-i a O) = cos(a) I - i sin(a) O.
                generators_.push_back({std::nullopt, std::move(dense)});
            } else {
                generators_.push_back({HermitianPropagator(dense), Matrix()});
            }
        }
        for (const auto &g : system_gaps) {
            gaps_.push_back(uncontrolled(g));
        }
    }

    const HilbertLayout &layout() const { return layout_; }

    template <class State>
    ProtocolOutcome run(const State &prepared, std::span<const double> angles) const {
        if (angles.size() != generators_.size()) {
            throw InvalidArgument("run_protocol: need one angle per controlled step");
        }
        State state = prepared;
        double leak = fock_leakage(state);
        for (std::size_t k = 0; k < generators_.size(); ++k) {
            if (k > 0) {
                state = state.apply(gaps_[k - 1]);
            }
            state = state.apply(controlled_block(generators_[k].at(angles[k])));
            leak = std::max(leak, fock_leakage(state));
        }
        const Complex coh = ancilla_coherence(state);
        return ProtocolOutcome{coh, leak, std::move(state)};
    }

  private:
    struct Generator {
        std::optional<HermitianPropagator> propagator;
        Matrix pauli;

        Matrix at(double angle) const {
            if (propagator) {
                return propagator->at(angle);
            }
            // Exact at pi/2, where the block is -i O.
            const double c = angle == kPi / 2 ? 0.0 : std::cos(angle);
            const double s = angle == kPi / 2 ? 1.0 : std::sin(angle);
            return c * Matrix::Identity(pauli.rows(), pauli.cols()) - Complex(0.0, s) * pauli;
        }
    };

    HilbertLayout layout_;
    std::vector<Generator> generators_;
    std::vector<Matrix> gaps_;
};

inline Vector kron(const Vector &a, const Vector &b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

inline StateVector prepare_pure(const StateVector &system) {
    return StateVector(system.layout().with_ancilla(), kron(plus_state_amplitudes(), system.amplitudes()));
}

inline DensityMatrix prepare_mixed(const DensityMatrix &system) {
    const Vector plus = plus_state_amplitudes();
    return tensor_with_ancilla(plus * plus.adjoint(), system);
}

/// The system part of an initial state, with any ancilla reset.
inline std::variant<StateVector, DensityMatrix> system_part(const StateVector &initial) {
    if (!initial.layout().has_ancilla()) {
        return initial;
    }
    const DensityMatrix reduced = trace_out_ancilla(DensityMatrix::pure(initial));
    Eigen::SelfAdjointEigenSolver<Matrix> es(reduced.elements());
    const Eigen::Index top = es.eigenvalues().size() - 1;
    if (es.eigenvalues()(top) > 1.0 - 1e-12) {
        return StateVector::normalized(reduced.layout(), es.eigenvectors().col(top));
    }
    return reduced;
}

inline std::variant<StateVector, DensityMatrix> system_part(const DensityMatrix &initial) {
    if (!initial.layout().has_ancilla()) {
        return initial;
    }
    return trace_out_ancilla(initial);
}

} // namespace detail

/// Prepares the ancilla in (|e>+|g>)/sqrt(2) next to the system part of
/// `initial` (an ancilla already present in `initial` is reset), applies the
/// plan and reads out the ancilla coherence. `angles` defaults to
/// plan.default_angles().
template <class State>
ProtocolOutcome run_protocol(const State &initial, const ProtocolPlan &plan, std::span<const double> angles = {}) {
    const auto system = detail::system_part(initial);
    const auto defaults = plan.default_angles();
    if (angles.empty()) {
        angles = defaults;
    }
    const detail::PlanExecutor exec(plan);
    return std::visit(
        [&](const auto &s) -> ProtocolOutcome {
            if (!(s.layout() == plan.system().layout())) {
                throw DimensionError("run_protocol: state layout does not match the plan");
            }
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, StateVector>) {
                return exec.run(detail::prepare_pure(s), angles);
            } else {
                return exec.run(detail::prepare_mixed(s), angles);
            }
        },
        system);
}

/// Correlator from the measured coherence: 2 i^n * coherence. The factor 2
/// undoes the 1/2 carried by the ancilla superposition.
inline Complex decode_spin_correlator(Complex coherence, int n) {
    if (n < 1) {
        throw InvalidArgument("decode_spin_correlator: need n >= 1");
    }
    return 2.0 * detail::i_pow(n) * coherence;
}

enum class ResultMode { exact, sampled };

inline const char *mode_name(ResultMode m) { return m == ResultMode::exact ? "exact" : "sampled"; }

struct DerivativeMeta {
    double h = 0.0;
    std::string stencil = "central";
    std::size_t derivative_order = 0;  // number of differentiated angles
    bool richardson = false;
};

struct CorrelationResult {
    Complex value;
    int order = 0;
    ResultMode mode = ResultMode::exact;
    std::size_t shots_per_observable = 0;
    std::optional<DerivativeMeta> derivative;
    double leakage = 0.0;
    std::size_t protocol_runs = 0;
};

/// Central mixed differences in the derivative angles.
struct FiniteDifference {
    double h = 1e-3;
    bool richardson = false;
    double leakage_threshold = 1e-3;
};

namespace detail {

using InitialState = std::variant<StateVector, DensityMatrix>;

inline InitialState prepared(const InitialState &initial) {
    return std::visit(
        [](const auto &s) -> InitialState {
            const auto sys = system_part(s);
            return std::visit(
                [](const auto &x) -> InitialState {
                    using X = std::decay_t<decltype(x)>;
                    if constexpr (std::is_same_v<X, StateVector>) {
                        return prepare_pure(x);
                    } else {
                        return prepare_mixed(x);
                    }
                },
                sys);
        },
        initial);
}

inline SystemLayout system_layout_of(const InitialState &s) {
    return std::visit([](const auto &x) { return SystemLayout(x.layout().system_part()); }, s);
}

struct StencilValue {
    Complex coherence_derivative;
    double leakage = 0.0;
    std::size_t runs = 0;
};

/// k-th order central mixed difference of the coherence over the
/// derivative-mode angles; fixed angles stay at pi/2.
inline StencilValue coherence_derivative(const PlanExecutor &exec, const InitialState &prepared_state,
                                         const ProtocolPlan &plan, double h) {
    std::vector<std::size_t> dims;
    for (std::size_t i = 0; i < plan.controls().size(); ++i) {
        if (plan.controls()[i].mode == AngleMode::derivative) {
            dims.push_back(i);
        }
    }
    auto angles = plan.default_angles();
    StencilValue out{};
    const std::size_t k = dims.size();
    const std::size_t points = std::size_t{1} << k;
    Complex acc = 0.0;
    for (std::size_t mask = 0; mask < points; ++mask) {
        double sign = 1.0;
        for (std::size_t j = 0; j < k; ++j) {
            const bool plus = ((mask >> j) & 1U) == 0;
            angles[dims[j]] = plus ? h : -h;
            sign *= plus ? 1.0 : -1.0;
        }
        const auto outcome = std::visit([&](const auto &s) { return exec.run(s, angles); }, prepared_state);
        acc += sign * outcome.coherence;
        out.leakage = std::max(out.leakage, outcome.leakage);
        ++out.runs;
    }
    out.coherence_derivative = k == 0 ? acc : acc / std::pow(2.0 * h, static_cast<double>(k));
    return out;
}

inline std::size_t largest_cutoff(const SystemLayout &layout) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (layout[i].kind == SubsystemKind::boson_mode) {
            d = std::max(d, layout[i].dim);
        }
    }
    return d;
}

} // namespace detail

/// General correlator <O_{n-1}(t_{n-1}) ... O_0(t_0)> through the protocol.
/// Each operator is expanded by linearity into Hermitian unit terms; every
/// combination is one protocol plan (Pauli terms at pi/2, bosonic terms by
/// finite differences at angle 0), and the decoded values are recombined.
inline CorrelationResult correlate(const detail::InitialState &initial, const std::vector<OperatorSpec> &operators,
                                   const std::vector<double> &times, const Schedule &history,
                                   const FiniteDifference &fd = {}) {
    if (operators.empty()) {
        throw InvalidArgument("correlate: need at least one operator");
    }
    if (!(fd.h > 0.0)) {
        throw InvalidArgument("correlate: finite-difference step must be > 0");
    }
    const SystemLayout system = detail::system_layout_of(initial);
    const auto prepared = detail::prepared(initial);
    const std::vector<Matrix> gaps = detail::gap_unitaries(system, history, times);
    const int n = static_cast<int>(operators.size());

    std::vector<std::vector<std::pair<Complex, OperatorSpec>>> expansions;
    for (const auto &op : operators) {
        expansions.push_back(op.hermitian_expansion());
        if (expansions.back().empty()) {
            // Zero operator: the correlator vanishes.
            return CorrelationResult{0.0, n, ResultMode::exact, 0, std::nullopt, 0.0, 0};
        }
    }

    CorrelationResult result;
    result.order = n;
    std::size_t max_k = 0;
    std::vector<std::size_t> idx(expansions.size(), 0);
    while (true) {
        Complex coef = 1.0;
        std::vector<ControlledStep> steps;
        for (std::size_t j = 0; j < expansions.size(); ++j) {
            const auto &[c, unit] = expansions[j][idx[j]];
            coef *= c;
            steps.push_back({unit, unit.has_bosons() ? AngleMode::derivative : AngleMode::fixed});
        }
        const ProtocolPlan plan(system, std::move(steps), times, history);
        const detail::PlanExecutor exec(plan, gaps);
        max_k = std::max(max_k, plan.derivative_steps());
        auto value = detail::coherence_derivative(exec, prepared, plan, fd.h);
        Complex d = value.coherence_derivative;
        if (fd.richardson && plan.derivative_steps() > 0) {
            const auto half = detail::coherence_derivative(exec, prepared, plan, fd.h / 2);
            d = (4.0 * half.coherence_derivative - d) / 3.0;
            value.leakage = std::max(value.leakage, half.leakage);
            value.runs += half.runs;
        }
        result.value += coef * decode_spin_correlator(d, n);
        result.leakage = std::max(result.leakage, value.leakage);
        result.protocol_runs += value.runs;

        std::size_t j = 0;
        while (j < idx.size() && ++idx[j] == expansions[j].size()) {
            idx[j] = 0;
            ++j;
        }
        if (j == idx.size()) {
            break;
        }
    }
    if (max_k > 0) {
        result.derivative = DerivativeMeta{fd.h, "central", max_k, fd.richardson};
    }
    if (result.leakage > fd.leakage_threshold) {
        const std::size_t d = detail::largest_cutoff(system);
        throw TruncationError("correlate: Fock leakage " + std::to_string(result.leakage) + " exceeds threshold " +
                                  std::to_string(fd.leakage_threshold) + "; try a cutoff of " +
                                  std::to_string(2 * d),
                              result.leakage, 2 * d);
    }
    return result;
}

/// Spin (and Jordan-Wigner fermionic) correlators: Pauli-string operators
/// or sums of them; no bosonic content.
inline CorrelationResult correlate_spin(const detail::InitialState &initial, const std::vector<OperatorSpec> &operators,
                                        const std::vector<double> &times, const Schedule &history) {
    for (const auto &op : operators) {
        if (op.has_bosons()) {
            throw InvalidArgument("correlate_spin: operator " + op.label() +
                                  " has bosonic content; use correlate_boson");
        }
    }
    return correlate(initial, operators, times, history);
}

/// Correlators with bosonic or spin-boson operators, via parametric derivatives.
inline CorrelationResult correlate_boson(const detail::InitialState &initial,
                                         const std::vector<OperatorSpec> &operators,
                                         const std::vector<double> &times, const Schedule &history,
                                         const FiniteDifference &fd = {}) {
    return correlate(initial, operators, times, history, fd);
}

/// Mixed initial state rho_0: the ancilla starts as |+><+| (x) rho_0.
inline CorrelationResult correlate_mixed(const DensityMatrix &rho0, const std::vector<OperatorSpec> &operators,
                                         const std::vector<double> &times, const Schedule &history,
                                         const FiniteDifference &fd = {}) {
    return correlate(rho0, operators, times, history, fd);
}

/// Bernstein-type shot count: L = ceil(4 (1 + c) / delta^2) gives precision
/// delta with probability >= 1 - e^{-c} for +-1 outcomes.
struct ShotPlan {
    double delta = 0.1;
    double c = 3.0;
    std::size_t shots = 0;
};

inline ShotPlan plan_shots(double delta, double c) {
    if (!(delta > 0.0 && delta <= 2.0)) {
        throw InvalidArgument("plan_shots: delta must lie in (0, 2]");
    }
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw InvalidArgument("plan_shots: c must be > 0");
    }
    const double bound = 4.0 * (1.0 + c) / (delta * delta);
    // Guard against bound landing a few ulps above an integer.
    const double shots = std::ceil(bound * (1.0 - 1e-12));
    return {delta, c, static_cast<std::size_t>(shots)};
}

namespace detail {

inline double sample_pm1_mean(CounterRng &rng, double expectation, std::size_t shots) {
    const double p_plus = std::clamp(0.5 * (1.0 + expectation), 0.0, 1.0);
    long long sum = 0;
    for (std::size_t i = 0; i < shots; ++i) {
        sum += rng.bernoulli(p_plus) ? 1 : -1;
    }
    return static_cast<double>(sum) / static_cast<double>(shots);
}

} // namespace detail

/// Simulates L projective +-1 measurements of each ancilla observable
/// (sigma_x, sigma_y) and decodes the averaged coherence.
template <class State>
CorrelationResult sample_correlator(const State &initial, const ProtocolPlan &plan, const ShotPlan &shots,
                                    std::uint64_t seed) {
    if (plan.derivative_steps() > 0) {
        throw InvalidArgument("sample_correlator: derivative-mode plans cannot be sampled");
    }
    if (shots.shots == 0) {
        throw InvalidArgument("sample_correlator: need at least one shot");
    }
    const auto outcome = run_protocol(initial, plan);
    const auto [sx, sy] =
        std::visit([](const auto &s) { return ancilla_pauli_expectations(s); }, outcome.final_state);
    CounterRng x_stream(seed, 0);
    CounterRng y_stream(seed, 1);
    const double mx = detail::sample_pm1_mean(x_stream, sx, shots.shots);
    const double my = detail::sample_pm1_mean(y_stream, sy, shots.shots);
    CorrelationResult r;
    r.value = decode_spin_correlator(0.5 * Complex(mx, my), static_cast<int>(plan.order()));
    r.order = static_cast<int>(plan.order());
    r.mode = ResultMode::sampled;
    r.shots_per_observable = shots.shots;
    r.leakage = outcome.leakage;
    r.protocol_runs = 1;
    return r;
}

} // namespace ntcorr
