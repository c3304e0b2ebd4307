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
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "ntcorr/core.hpp"
#include "ntcorr/gates.hpp"
#include "ntcorr/hilbert.hpp"
#include "ntcorr/operators.hpp"
#include "ntcorr/protocol.hpp"

/// Linear response built on protocol-measured two-time correlators.
///
/// Sign convention: the external field couples as H - f(t) B (the usual
/// Kubo coupling), so that the response function
///     phi(u) = i <[A(u), B(0)]> = -2 Im <A(u) B(0)>
/// and chi(w) = int_0^t phi(u) e^{-i w u} du give
///     <A(t)> = <A(t)>_0 + f chi(w) e^{i w t}
/// for a drive f e^{i w t}, to first order in f.
namespace ntcorr {

enum class ResponseKind { spin_spin, quadrature_spin };

inline const char *response_kind_name(ResponseKind k) {
    return k == ResponseKind::spin_spin ? "spin-spin" : "quadrature-spin";
}

struct ResponseFunction {
    std::vector<double> lags;  // j * step, j = 0..intervals
    std::vector<Complex> values;
    double step = 0.0;
    ResponseKind kind = ResponseKind::spin_spin;
};

struct ResponseOptions {
    /// Time t in rho = U(t) rho_0 U^dag(t); negative means the end of the
    /// lag grid. Ignored when rho_0 commutes with H.
    double observation_time = -1.0;
    FiniteDifference fd{};
    double commute_tol = 1e-12;
};

namespace detail {

inline bool commutes_with(const InitialState &state, const Matrix &h, double tol) {
    return std::visit(
        [&](const auto &s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, StateVector>) {
                const Matrix rho = s.amplitudes() * s.amplitudes().adjoint();
                return max_abs(h * rho - rho * h) <= tol;
            } else {
                return max_abs(h * s.elements() - s.elements() * h) <= tol;
            }
        },
        state);
}

inline InitialState evolved(const InitialState &state, const Matrix &u) {
    return std::visit([&](const auto &s) -> InitialState { return s.apply(u); }, state);
}

inline void require_single_hermitian_term(const OperatorSpec &op, const char *what) {
    if (op.terms().size() != 1 || !op.is_hermitian()) {
        throw InvalidArgument(std::string(what) + ": need a single Hermitian product term, got " + op.label());
    }
}

} // namespace detail

/// phi(u) at u = j * step for j = 0..intervals. The probe may be a Pauli
/// string (spin-spin) or carry a quadrature factor (quadrature-spin); the
/// drive must be a Pauli string.
inline ResponseFunction response_function(const detail::InitialState &initial, const OperatorSpec &hamiltonian,
                                          const OperatorSpec &probe, const OperatorSpec &drive, double step,
                                          std::size_t intervals, const ResponseOptions &options = {}) {
    if (!(step > 0.0) || intervals == 0) {
        throw InvalidArgument("response_function: need step > 0 and at least one interval");
    }
    detail::require_single_hermitian_term(probe, "response_function probe");
    detail::require_single_hermitian_term(drive, "response_function drive");
    if (drive.has_bosons()) {
        throw InvalidArgument("response_function: the drive must be a Pauli string");
    }
    const SystemLayout system = detail::system_layout_of(initial);
    const Matrix h = hamiltonian.to_dense(system);
    const Schedule history = Schedule::constant(hamiltonian);
    const double horizon = step * static_cast<double>(intervals);

    detail::InitialState state = initial;
    if (!detail::commutes_with(initial, h, options.commute_tol)) {
        const double t_obs = options.observation_time < 0.0 ? horizon : options.observation_time;
        state = detail::evolved(initial, matrix_exponential(h, t_obs));
    }

    ResponseFunction rf;
    rf.step = step;
    rf.kind = probe.has_bosons() ? ResponseKind::quadrature_spin : ResponseKind::spin_spin;
    for (std::size_t j = 0; j <= intervals; ++j) {
        const double u = step * static_cast<double>(j);
        const auto c = correlate(state, {drive, probe}, {0.0, u}, history, options.fd);
        rf.lags.push_back(u);
        rf.values.push_back(Complex(-2.0 * c.value.imag(), 0.0));
    }
    return rf;
}

struct SusceptibilityTable {
    std::vector<double> omegas;
    std::vector<Complex> chi;
    double t = 0.0;
    std::string rule = "trapezoid";
    double step = 0.0;
    double refinement_delta = 0.0;  // max |chi(step) - chi(2 step)|
    double tolerance = 0.0;
    bool converged = false;

    void require_converged() const {
        if (!converged) {
            throw NumericalError("susceptibility: grid refinement changed chi by " + std::to_string(refinement_delta) +
                                 " (tolerance " + std::to_string(tolerance) + "); use a finer lag grid");
        }
    }
};

namespace detail {

inline Complex trapezoid_chi(const ResponseFunction &rf, std::size_t m, std::size_t stride, double omega) {
    const double h = rf.step * static_cast<double>(stride);
    Complex acc = 0.0;
    for (std::size_t j = 0; j <= m; j += stride) {
        const double w = (j == 0 || j == m) ? 0.5 : 1.0;
        acc += w * rf.values[j] * std::exp(Complex(0.0, -omega * rf.lags[j]));
    }
    return acc * h;
}

} // namespace detail

/// chi(w) = int_0^t phi(t - s) e^{i w (s - t)} ds = int_0^t phi(u) e^{-i w u} du
/// by the composite trapezoid rule, with a grid-halving error estimate.
inline SusceptibilityTable susceptibility(const ResponseFunction &rf, const std::vector<double> &omegas, double t,
                                          double tolerance = 1e-6) {
    if (rf.lags.size() < 2 || rf.values.size() != rf.lags.size()) {
        throw InvalidArgument("susceptibility: response function needs at least two samples");
    }
    const double mf = t / rf.step;
    const auto m = static_cast<std::size_t>(std::llround(mf));
    if (std::abs(mf - static_cast<double>(m)) > 1e-9 * std::max(1.0, mf) || m == 0) {
        throw InvalidArgument("susceptibility: t must be a positive multiple of the lag step");
    }
    if (m >= rf.lags.size()) {
        throw InvalidArgument("susceptibility: response function does not span [0, t]");
    }
    if (m % 2 != 0) {
        throw InvalidArgument("susceptibility: need an even number of intervals for the refinement check");
    }
    SusceptibilityTable table;
    table.omegas = omegas;
    table.t = t;
    table.step = rf.step;
    table.tolerance = tolerance;
    for (double w : omegas) {
        const Complex fine = detail::trapezoid_chi(rf, m, 1, w);
        const Complex coarse = detail::trapezoid_chi(rf, m, 2, w);
        table.chi.push_back(fine);
        table.refinement_delta = std::max(table.refinement_delta, std::abs(fine - coarse));
    }
    table.converged = table.refinement_delta < tolerance;
    return table;
}

/// <A(t)> = base + chi f e^{i w t}.
inline Complex first_order_prediction(Complex base, Complex chi, double f, double omega, double t) {
    return base + chi * f * std::exp(Complex(0.0, omega * t));
}

/// Prediction for the Hermitian drive 2 f cos(w t) = f e^{iwt} + f e^{-iwt}.
inline Complex cosine_drive_prediction(Complex base, Complex chi_plus, Complex chi_minus, double f, double omega,
                                       double t) {
    return first_order_prediction(first_order_prediction(base, chi_plus, f, omega, t), chi_minus, f, -omega, t);
}

/// base + int_{w0}^{w0+delta} chi(w) f(w) e^{i w t} dw, trapezoid over the
/// table samples inside the band. The samples must reach both band edges;
/// a single sample inside a band is integrated as a rectangle of width delta.
inline Complex bandwidth_prediction(Complex base, const SusceptibilityTable &table,
                                    const std::function<double(double)> &spectral_density, double omega0,
                                    double delta, double t) {
    if (!(delta >= 0.0)) {
        throw InvalidArgument("bandwidth_prediction: delta must be >= 0");
    }
    const double lo = omega0;
    const double hi = omega0 + delta;
    const double edge_tol = 1e-9 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    std::vector<std::size_t> inside;
    for (std::size_t i = 0; i < table.omegas.size(); ++i) {
        if (i > 0 && table.omegas[i] <= table.omegas[i - 1]) {
            throw InvalidArgument("bandwidth_prediction: susceptibility omegas must be increasing");
        }
        if (table.omegas[i] >= lo - edge_tol && table.omegas[i] <= hi + edge_tol) {
            inside.push_back(i);
        }
    }
    auto integrand = [&](std::size_t i) {
        const double w = table.omegas[i];
        return table.chi[i] * spectral_density(w) * std::exp(Complex(0.0, w * t));
    };
    if (inside.size() == 1) {
        return base + integrand(inside.front()) * delta;
    }
    if (inside.empty() || std::abs(table.omegas[inside.front()] - lo) > edge_tol ||
        std::abs(table.omegas[inside.back()] - hi) > edge_tol) {
        throw InvalidArgument("bandwidth_prediction: susceptibility samples do not cover the band edges");
    }
    Complex acc = 0.0;
    for (std::size_t j = 1; j < inside.size(); ++j) {
        const double dw = table.omegas[inside[j]] - table.omegas[inside[j - 1]];
        acc += 0.5 * dw * (integrand(inside[j]) + integrand(inside[j - 1]));
    }
    return base + acc;
}

/// One monochromatic component of the drive, entering as -2 f cos(w t) B.
struct DriveComponent {
    double f = 0.0;
    double omega = 0.0;
};

struct PerturbedConfig {
    std::size_t initial_steps = 64;
    double tolerance = 1e-10;
    std::size_t max_doublings = 16;
};

struct PerturbedResult {
    Complex value;
    std::size_t steps = 0;
    double self_consistency = 0.0;  // |value(steps) - value(steps/2)|
};

namespace detail {

inline Complex driven_expectation(const InitialState &initial, const Matrix &h, const Matrix &b, const Matrix &a,
                                  const std::vector<DriveComponent> &drives, double t, std::size_t steps) {
    const double dt = t / static_cast<double>(steps);
    InitialState state = initial;
    for (std::size_t k = 0; k < steps; ++k) {
        const double mid = (static_cast<double>(k) + 0.5) * dt;
        double amp = 0.0;
        for (const auto &d : drives) {
            amp += 2.0 * d.f * std::cos(d.omega * mid);
        }
        state = evolved(state, matrix_exponential(h - amp * b, dt));
    }
    return std::visit([&](const auto &s) { return Complex(expectation(s, a), 0.0); }, state);
}

} // namespace detail

/// <A(t)> under H - sum_k 2 f_k cos(w_k s) B, integrated with midpoint
/// piecewise-constant exponentials; the step count doubles until two
/// successive results agree within config.tolerance.
inline PerturbedResult perturbed_evolution(const detail::InitialState &initial, const OperatorSpec &hamiltonian,
                                           const OperatorSpec &observable, const OperatorSpec &drive,
                                           const std::vector<DriveComponent> &drives, double t,
                                           const PerturbedConfig &config = {}) {
    if (!(t >= 0.0)) {
        throw InvalidArgument("perturbed_evolution: t must be >= 0");
    }
    if (!drive.is_hermitian() || !observable.is_hermitian()) {
        throw HermiticityError("perturbed_evolution: drive and observable must be Hermitian");
    }
    const SystemLayout system = detail::system_layout_of(initial);
    const Matrix h = hamiltonian.to_dense(system);
    const Matrix b = drive.to_dense(system);
    const Matrix a = observable.to_dense(system);
    std::size_t steps = std::max<std::size_t>(1, config.initial_steps);
    Complex previous = detail::driven_expectation(initial, h, b, a, drives, t, steps);
    for (std::size_t i = 0; i < config.max_doublings; ++i) {
        steps *= 2;
        const Complex current = detail::driven_expectation(initial, h, b, a, drives, t, steps);
        const double change = std::abs(current - previous);
        if (change < config.tolerance) {
            return {current, steps, change};
        }
        previous = current;
    }
    throw NumericalError("perturbed_evolution: no convergence under step doubling");
}

/// <A(t)>_0 by direct unperturbed evolution.
inline Complex unperturbed_expectation(const detail::InitialState &initial, const OperatorSpec &hamiltonian,
                                       const OperatorSpec &observable, double t) {
    const SystemLayout system = detail::system_layout_of(initial);
    const auto state = detail::evolved(initial, matrix_exponential(hamiltonian.to_dense(system), t));
    const Matrix a = observable.to_dense(system);
    return std::visit([&](const auto &s) { return Complex(expectation(s, a), 0.0); }, state);
}

} // namespace ntcorr
