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
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ntcorr/core.hpp"
#include "ntcorr/gates.hpp"
#include "ntcorr/hilbert.hpp"
#include "ntcorr/operators.hpp"
#include "ntcorr/oracle.hpp"
#include "ntcorr/protocol.hpp"
#include "ntcorr/rng.hpp"

/// Randomized protocol-versus-oracle suites. Instance i of a suite draws
/// from CounterRng(seed, i), so reports do not depend on the job count.
namespace ntcorr::verification {

struct InstanceRecord {
    std::size_t index = 0;
    std::string description;
    Complex protocol;
    Complex reference;
    double error = 0.0;
    bool pass = false;
    /// Third independent value (Hadamard test) when present.
    std::optional<Complex> baseline;
    /// Error ratio under h-halving (bosonic suite only; 0 when unused).
    double halving_ratio = 0.0;
    /// Error at the coarse step of that check.
    double coarse_error = 0.0;
};

struct SuiteReport {
    std::string name;
    double tolerance = 0.0;
    std::vector<InstanceRecord> records;
    double seconds = 0.0;

    std::size_t passed() const {
        return static_cast<std::size_t>(
            std::count_if(records.begin(), records.end(), [](const InstanceRecord &r) { return r.pass; }));
    }
    std::size_t failed() const { return records.size() - passed(); }
    bool ok() const { return !records.empty() && failed() == 0; }
    double max_error() const {
        double m = 0.0;
        for (const auto &r : records) {
            m = std::max(m, r.error);
        }
        return m;
    }
};

struct SuiteOptions {
    std::size_t instances = 0;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

/// Runs body(i) for i in [0, count) on up to `jobs` threads. The first
/// exception is rethrown after all workers stop.
inline void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)> &body) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                    next = count;
                }
            }
        });
    }
    for (auto &w : workers) {
        w.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

// ---------------------------------------------------------------- generators

/// Pauli string on `qubits` sites with at least one non-identity factor.
inline OperatorSpec random_pauli_string(CounterRng &rng, std::size_t qubits) {
    std::vector<PauliString::Factor> factors;
    while (factors.empty()) {
        for (std::size_t s = 0; s < qubits; ++s) {
            const auto axis = static_cast<PauliAxis>(rng.below(4));
            if (axis != PauliAxis::I) {
                factors.emplace_back(s, axis);
            }
        }
    }
    return OperatorSpec(PauliString(std::move(factors)));
}

/// Largest |eigenvalue| of a Hermitian matrix.
inline double spectral_norm(const Matrix &h) {
    const Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Real combination of random Pauli strings rescaled to spectral norm
/// uniform in [0.5, max_norm].
inline OperatorSpec random_spin_hamiltonian(CounterRng &rng, const SystemLayout &layout, std::size_t qubits,
                                            double max_norm = 5.0) {
    const std::size_t terms = 1 + rng.below(2 * qubits + 2);
    OperatorSpec h = OperatorSpec::zero();
    for (std::size_t k = 0; k < terms; ++k) {
        h = h + rng.normal() * random_pauli_string(rng, qubits);
    }
    const double norm = spectral_norm(h.to_dense(layout));
    if (norm < 1e-9) {
        return rng.uniform(0.5, max_norm) * pauli("Z0");
    }
    return (rng.uniform(0.5, max_norm) / norm) * h;
}

/// Gaussian random pure state.
inline StateVector random_state(CounterRng &rng, const HilbertLayout &layout) {
    Vector v(static_cast<Eigen::Index>(layout.total_dim()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = Complex(rng.normal(), rng.normal());
    }
    return StateVector::normalized(layout, v);
}

/// n sorted times in [0, horizon].
inline std::vector<double> random_times(CounterRng &rng, std::size_t n, double horizon = 2.0) {
    std::vector<double> t(n);
    for (auto &x : t) {
        x = rng.uniform(0.0, horizon);
    }
    std::sort(t.begin(), t.end());
    return t;
}

/// One to three constant segments covering exactly [0, horizon].
inline Schedule random_schedule(CounterRng &rng, const SystemLayout &layout, std::size_t qubits,
                                double horizon = 2.0) {
    const std::size_t pieces = 1 + rng.below(3);
    std::vector<double> cuts{0.0, horizon};
    for (std::size_t k = 1; k < pieces; ++k) {
        cuts.push_back(rng.uniform(0.0, horizon));
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<Schedule::Segment> segments;
    for (std::size_t k = 1; k < cuts.size(); ++k) {
        segments.push_back({random_spin_hamiltonian(rng, layout, qubits), cuts[k] - cuts[k - 1]});
    }
    return Schedule(std::move(segments));
}

inline std::vector<Matrix> dense_all(const std::vector<OperatorSpec> &ops, const SystemLayout &layout) {
    std::vector<Matrix> out;
    for (const auto &op : ops) {
        out.push_back(op.to_dense(layout));
    }
    return out;
}

inline std::string describe(const std::vector<OperatorSpec> &ops, const std::vector<double> &times) {
    std::string s;
    for (std::size_t k = ops.size(); k-- > 0;) {
        s += "(" + ops[k].label() + ")@" + std::to_string(times[k]) + (k ? " " : "");
    }
    return s;
}

namespace detail {

template <class Instance>
SuiteReport run_suite(std::string name, double tolerance, const SuiteOptions &options, Instance instance) {
    const auto start = std::chrono::steady_clock::now();
    SuiteReport report;
    report.name = std::move(name);
    report.tolerance = tolerance;
    report.records.resize(options.instances);
    parallel_for(options.instances, options.jobs, [&](std::size_t i) {
        CounterRng rng(options.seed, i);
        InstanceRecord r = instance(rng, i);
        r.index = i;
        r.error = std::abs(r.protocol - r.reference);
        if (r.baseline) {
            r.error = std::max({r.error, std::abs(*r.baseline - r.reference), std::abs(*r.baseline - r.protocol)});
        }
        r.pass = std::isfinite(r.error) && r.error <= tolerance;
        report.records[i] = std::move(r);
    });
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

} // namespace detail

// -------------------------------------------------------------------- suites

/// Pure spin states: N <= 4 qubits, n <= 4 Pauli strings, piecewise-constant
/// random H with norm <= 5, times in [0, 2].
inline SuiteReport spin_suite(const SuiteOptions &options, double tolerance = 1e-9) {
    return detail::run_suite("spin", tolerance, options, [](CounterRng &rng, std::size_t) {
        const std::size_t qubits = 1 + rng.below(4);
        const std::size_t n = 1 + rng.below(4);
        const auto layout = SystemLayout::of(qubits);
        const auto history = random_schedule(rng, layout, qubits);
        const auto psi = random_state(rng, layout.layout());
        std::vector<OperatorSpec> ops;
        for (std::size_t k = 0; k < n; ++k) {
            ops.push_back(random_pauli_string(rng, qubits));
        }
        const auto times = random_times(rng, n);
        InstanceRecord r;
        r.description = describe(ops, times);
        r.protocol = correlate_spin(psi, ops, times, history).value;
        r.reference = oracle::heisenberg_correlator({layout, dense_all(ops, layout), times, history, psi.amplitudes()});
        return r;
    });
}

/// Random operator with bosonic content on mode site `mode`.
inline OperatorSpec random_bosonic_operator(CounterRng &rng, std::size_t qubits, std::size_t mode) {
    static constexpr QuadratureForm kForms[] = {QuadratureForm::position, QuadratureForm::momentum,
                                                QuadratureForm::lowering, QuadratureForm::raising};
    const auto form = kForms[rng.below(4)];
    if (rng.bernoulli(0.5)) {
        return quadrature(mode, form);
    }
    const auto p = random_pauli_string(rng, qubits);
    return OperatorSpec::spin_boson(p.terms().front().pauli, BosonQuadrature{mode, form});
}

/// Spin-boson model: omega a^dag a + spin terms + g Z_j x couplings.
inline OperatorSpec random_spin_boson_hamiltonian(CounterRng &rng, const SystemLayout &layout, std::size_t qubits,
                                                  std::size_t mode) {
    OperatorSpec h = rng.uniform(0.1, 0.4) * quadrature(mode, QuadratureForm::number);
    h = h + (rng.uniform(0.3, 1.5) / std::sqrt(static_cast<double>(qubits))) *
                random_spin_hamiltonian(rng, SystemLayout::of(qubits), qubits, 1.0);
    for (std::size_t s = 0; s < qubits; ++s) {
        const auto p = PauliString::single(s, static_cast<PauliAxis>(1 + rng.below(3)));
        h = h + rng.uniform(-0.1, 0.1) * OperatorSpec::spin_boson(p, {mode, QuadratureForm::position});
    }
    const double norm = spectral_norm(h.to_dense(layout));
    return norm > 5.0 ? (5.0 / norm) * h : h;
}

struct BosonSuiteConfig {
    std::size_t cutoff = 12;
    FiniteDifference fd{};
    /// Steps for the h-halving order check; large enough that truncation
    /// error dominates round-off in the mixed differences.
    double coarse_h = 2e-2;
    std::size_t max_bosonic_operators = 3;
};

/// One mode plus 1..4 qubits; n <= 4 operators with 1..3 bosonic factors
/// (quadratures a+a^dag, i(a^dag-a), a, a^dag and spin-boson products).
/// The initial state is a random qubit state times Fock |0> or |1>.
inline SuiteReport boson_suite(const SuiteOptions &options, const BosonSuiteConfig &config = {},
                               double tolerance = 1e-5) {
    return detail::run_suite("boson", tolerance, options, [config](CounterRng &rng, std::size_t) {
        const std::size_t qubits = 1 + rng.below(4);
        const std::size_t mode = qubits;
        const auto layout = SystemLayout(HilbertLayout::system(qubits, {config.cutoff}));
        const auto h = random_spin_boson_hamiltonian(rng, layout, qubits, mode);
        const auto history = Schedule::constant(h);

        const auto spins = random_state(rng, SystemLayout::of(qubits).layout());
        Vector fock = Vector::Zero(static_cast<Eigen::Index>(config.cutoff));
        fock(static_cast<Eigen::Index>(rng.below(2))) = 1.0;
        const auto psi = StateVector::normalized(layout.layout(), ntcorr::detail::kron(spins.amplitudes(), fock));

        const std::size_t n = 1 + rng.below(4);
        const std::size_t bosonic = 1 + rng.below(std::min(n, config.max_bosonic_operators));
        std::vector<OperatorSpec> ops;
        for (std::size_t k = 0; k < n; ++k) {
            ops.push_back(k < bosonic ? random_bosonic_operator(rng, qubits, mode) : random_pauli_string(rng, qubits));
        }
        // Shuffle the bosonic positions.
        for (std::size_t k = n; k > 1; --k) {
            std::swap(ops[k - 1], ops[rng.below(k)]);
        }
        const auto times = random_times(rng, n);

        InstanceRecord r;
        r.description = describe(ops, times);
        r.reference = oracle::heisenberg_correlator({layout, dense_all(ops, layout), times, history, psi.amplitudes()});
        r.protocol = correlate_boson(psi, ops, times, history, config.fd).value;
        FiniteDifference coarse = config.fd;
        coarse.h = config.coarse_h;
        coarse.richardson = false;
        const double e1 = std::abs(correlate_boson(psi, ops, times, history, coarse).value - r.reference);
        coarse.h /= 2;
        const double e2 = std::abs(correlate_boson(psi, ops, times, history, coarse).value - r.reference);
        r.coarse_error = e1;
        r.halving_ratio = e2 > 0.0 ? e1 / e2 : 0.0;
        return r;
    });
}

/// Gibbs states of random spin Hamiltonians (beta in [0.1, 2]).
inline SuiteReport gibbs_suite(const SuiteOptions &options, double tolerance = 1e-9) {
    return detail::run_suite("gibbs", tolerance, options, [](CounterRng &rng, std::size_t) {
        const std::size_t qubits = 1 + rng.below(4);
        const std::size_t n = 1 + rng.below(4);
        const auto layout = SystemLayout::of(qubits);
        const auto h = random_spin_hamiltonian(rng, layout, qubits);
        const double beta = rng.uniform(0.1, 2.0);
        const auto rho = oracle::gibbs_state(layout, h.to_dense(layout), beta);
        std::vector<OperatorSpec> ops;
        for (std::size_t k = 0; k < n; ++k) {
            ops.push_back(random_pauli_string(rng, qubits));
        }
        const auto times = random_times(rng, n);
        const auto history = Schedule::constant(h);
        InstanceRecord r;
        r.description = describe(ops, times) + " beta=" + std::to_string(beta);
        r.protocol = correlate_mixed(rho, ops, times, history).value;
        r.reference = oracle::heisenberg_correlator({layout, dense_all(ops, layout), times, history, rho.elements()});
        return r;
    });
}

/// Random number-conserving fermionic Hamiltonian built twice: through
/// Jordan-Wigner Pauli strings and directly from occupation-basis matrices.
struct FermionModel {
    OperatorSpec pauli_form;
    Matrix occupation_form;
};

inline FermionModel random_fermion_model(CounterRng &rng, std::size_t modes) {
    OperatorSpec h = OperatorSpec::zero();
    const auto d = static_cast<Eigen::Index>(std::size_t{1} << modes);
    Matrix dense = Matrix::Zero(d, d);
    auto cdag = [&](std::size_t p) { return jordan_wigner(p, FermionKind::creation, modes); };
    auto c = [&](std::size_t p) { return jordan_wigner(p, FermionKind::annihilation, modes); };
    auto cdag_m = [&](std::size_t p) { return oracle::fermion_matrix(p, FermionKind::creation, modes); };
    auto c_m = [&](std::size_t p) { return oracle::fermion_matrix(p, FermionKind::annihilation, modes); };
    for (std::size_t p = 1; p <= modes; ++p) {
        const double eps = rng.uniform(-1.0, 1.0);
        h = h + eps * (cdag(p) * c(p));
        dense += eps * cdag_m(p) * c_m(p);
        for (std::size_t q = p + 1; q <= modes; ++q) {
            const Complex t(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6));
            h = h + t * (cdag(p) * c(q)) + std::conj(t) * (cdag(q) * c(p));
            dense += t * cdag_m(p) * c_m(q) + std::conj(t) * cdag_m(q) * c_m(p);
        }
        if (p + 1 <= modes) {
            const double u = rng.uniform(-1.0, 1.0);
            h = h + u * (cdag(p) * c(p) * cdag(p + 1) * c(p + 1));
            dense += u * cdag_m(p) * c_m(p) * cdag_m(p + 1) * c_m(p + 1);
        }
    }
    return {h, dense};
}

/// <b^dag_p(t) b_q(0)> for every p, q on 1..4 modes; the protocol expands
/// each ladder operator into its two Pauli strings (four runs), the
/// reference uses occupation-basis matrices and Pade evolution.
inline SuiteReport fermion_suite(const SuiteOptions &options, std::size_t max_modes = 4, double tolerance = 1e-9) {
    std::vector<std::array<std::size_t, 3>> cases;  // modes, p, q
    for (std::size_t m = 1; m <= max_modes; ++m) {
        for (std::size_t p = 1; p <= m; ++p) {
            for (std::size_t q = 1; q <= m; ++q) {
                cases.push_back({m, p, q});
            }
        }
    }
    SuiteOptions all = options;
    all.instances = cases.size();
    return detail::run_suite("fermion", tolerance, all, [cases](CounterRng &rng, std::size_t index) {
        const auto [modes, p, q] = cases[index];
        const auto layout = SystemLayout::of(modes);
        const auto model = random_fermion_model(rng, modes);
        const auto psi = random_state(rng, layout.layout());
        const double t = rng.uniform(0.0, 2.0);
        const std::vector<OperatorSpec> ops{jordan_wigner(q, FermionKind::annihilation, modes),
                                            jordan_wigner(p, FermionKind::creation, modes)};
        const std::vector<double> times{0.0, t};
        const Matrix u = oracle::pade_evolution(model.occupation_form, t);
        const Matrix bdag_t = u.adjoint() * oracle::fermion_matrix(p, FermionKind::creation, modes) * u;
        InstanceRecord r;
        r.description = "modes=" + std::to_string(modes) + " <b+_" + std::to_string(p) + "(" + std::to_string(t) +
                        ") b_" + std::to_string(q) + "(0)>";
        r.protocol = correlate_spin(psi, ops, times, Schedule::constant(model.pauli_form)).value;
        r.reference = psi.amplitudes().dot(bdag_t * oracle::fermion_matrix(q, FermionKind::annihilation, modes) *
                                           psi.amplitudes());
        return r;
    });
}

/// Unitary Pauli correlators three ways: protocol, a Hadamard test on the
/// composite unitary W = O_{n-1}(t_{n-1}) ... O_0(t_0), and the oracle.
/// The record's error is the largest pairwise disagreement.
inline SuiteReport three_way_suite(const SuiteOptions &options, double tolerance = 1e-12) {
    return detail::run_suite("three-way", tolerance, options, [](CounterRng &rng, std::size_t) {
        const std::size_t qubits = 1 + rng.below(3);
        const std::size_t n = 1 + rng.below(4);
        const auto layout = SystemLayout::of(qubits);
        const auto h = random_spin_hamiltonian(rng, layout, qubits);
        const auto history = Schedule::constant(h);
        const auto psi = random_state(rng, layout.layout());
        std::vector<OperatorSpec> ops;
        for (std::size_t k = 0; k < n; ++k) {
            ops.push_back(random_pauli_string(rng, qubits));
        }
        const auto times = random_times(rng, n);
        const Matrix hd = h.to_dense(layout);
        const auto d = static_cast<Eigen::Index>(layout.total_dim());
        Matrix w = Matrix::Identity(d, d);
        for (std::size_t k = 0; k < n; ++k) {
            const Matrix u = oracle::pade_evolution(hd, times[k] - times[0]);
            w = u.adjoint() * ops[k].to_dense(layout) * u * w;
        }
        const Complex protocol = correlate_spin(psi, ops, times, history).value;
        const Complex hadamard = oracle::hadamard_test_baseline(psi.amplitudes(), w);
        const Complex exact =
            oracle::heisenberg_correlator({layout, dense_all(ops, layout), times, history, psi.amplitudes()});
        InstanceRecord r;
        r.description = describe(ops, times);
        r.protocol = protocol;
        r.reference = exact;
        r.baseline = hadamard;
        return r;
    });
}

} // namespace ntcorr::verification
