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
#include <cctype>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ntcorr/core.hpp"
#include "ntcorr/gates.hpp"
#include "ntcorr/hilbert.hpp"
#include "ntcorr/operators.hpp"

namespace ntcorr {

struct GateOp {
    std::string name;
    std::vector<std::size_t> sites;
    double angle = 0.0;
    Matrix unitary;  // on the full decomposition layout
};

/// U = exp(i * sign * phi * pattern), times (a + a^dag) on `boson_site`
/// when boson_coupled is set.
struct PauliExponent {
    PauliString pattern;
    int sign = 1;
    bool boson_coupled = false;
    std::size_t boson_site = 0;

    std::string label() const {
        std::string s = std::string("exp(") + (sign > 0 ? "+" : "-") + "i*phi*" + pattern.label();
        if (boson_coupled) {
            s += " (a+a^dag)" + std::to_string(boson_site);
        }
        return s + ")";
    }
};

struct Decomposition {
    std::vector<GateOp> sequence;  // time order: sequence[0] acts first
    Matrix unitary;
    PauliExponent exponent;
    double max_error = 0.0;  // max-norm distance to the identified exponential
    std::size_t entangling_gates = 0;
    std::size_t candidates_matched = 0;
};

/// U_MS(theta, phi) = exp[-i theta (cos(phi) S_x + sin(phi) S_y)^2 / 4] on
/// `sites`, identity elsewhere.
inline Matrix ms_gate(const SystemLayout &layout, const std::vector<std::size_t> &sites, double theta,
                      double phi) {
    if (sites.empty()) {
        throw InvalidArgument("ms_gate: need at least one site");
    }
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    Matrix s = Matrix::Zero(d, d);
    const Matrix local = std::cos(phi) * pauli_matrix::x() + std::sin(phi) * pauli_matrix::y();
    for (auto site : sites) {
        if (site >= layout.size() || layout[site].kind != SubsystemKind::qubit) {
            throw InvalidArgument("ms_gate: site " + std::to_string(site) + " is not a qubit");
        }
        s += embed_operator(layout.layout(), {LocalOperator{site, local}});
    }
    return matrix_exponential(0.25 * s * s, theta);
}

namespace detail {

inline Matrix cz_matrix(const SystemLayout &layout, std::size_t a, std::size_t b) {
    const Matrix za = embed_operator(layout.layout(), {LocalOperator{a, pauli_matrix::z()}});
    const Matrix zb = embed_operator(layout.layout(), {LocalOperator{b, pauli_matrix::z()}});
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    return 0.5 * (Matrix::Identity(d, d) + za + zb - za * zb);
}

inline PauliString pauli_from_index(std::size_t index, std::size_t k) {
    std::vector<PauliString::Factor> f;
    for (std::size_t q = 0; q < k; ++q) {
        const auto axis = static_cast<PauliAxis>((index >> (2 * (k - 1 - q))) & 3U);
        f.emplace_back(q, axis);
    }
    return PauliString(std::move(f));
}

} // namespace detail

/// Exhaustive search over every Pauli string on the first k qubits of
/// `layout` and both signs for exp(i s phi P) [or exp(i s phi P (a+a^dag))]
/// equal to `u` within `tol`. Candidates use the closed form valid for P^2 = I:
///   exp(i a P (x) Q) = (I+P)/2 (x) exp(i a Q) + (I-P)/2 (x) exp(-i a Q).
inline std::vector<std::pair<PauliExponent, double>> match_pauli_exponent(const SystemLayout &layout,
                                                                          std::size_t k, const Matrix &u,
                                                                          double phi, bool boson_coupled,
                                                                          double tol = 1e-12) {
    const std::size_t n_pauli = std::size_t{1} << (2 * k);
    std::vector<std::pair<PauliExponent, double>> matches;
    const auto qubit_dim = static_cast<Eigen::Index>(std::size_t{1} << k);
    const SystemLayout qubits = SystemLayout::of(k);
    Matrix q_plus;
    Matrix q_minus;
    std::size_t boson_site = k;
    if (boson_coupled) {
        if (layout.size() != k + 1 || layout[k].kind != SubsystemKind::boson_mode) {
            throw InvalidArgument("match_pauli_exponent: expected k qubits followed by one mode");
        }
        const HermitianPropagator qprop(ladder::position(layout[k].dim));
        q_plus = qprop.at(-phi);  // exp(+i phi Q)
        q_minus = qprop.at(phi);
    } else if (layout.total_dim() != static_cast<std::size_t>(qubit_dim)) {
        throw InvalidArgument("match_pauli_exponent: expected a k-qubit layout");
    }
    const Matrix id_q = Matrix::Identity(qubit_dim, qubit_dim);
    for (std::size_t idx = 0; idx < n_pauli; ++idx) {
        const PauliString p = detail::pauli_from_index(idx, k);
        const Matrix pd = p.to_dense(qubits);
        for (int sign : {1, -1}) {
            Matrix cand;
            if (boson_coupled) {
                const Matrix &ep = sign > 0 ? q_plus : q_minus;
                const Matrix &em = sign > 0 ? q_minus : q_plus;
                cand = detail::kron(0.5 * (id_q + pd), ep) + detail::kron(0.5 * (id_q - pd), em);
            } else {
                cand = std::cos(phi) * id_q + Complex(0.0, sign * std::sin(phi)) * pd;
            }
            const double err = detail::max_abs(cand - u);
            if (err <= tol) {
                matches.push_back({PauliExponent{p, sign, boson_coupled, boson_site}, err});
            }
        }
    }
    return matches;
}

namespace detail {

inline Matrix sequence_product(const SystemLayout &layout, const std::vector<GateOp> &seq) {
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    Matrix u = Matrix::Identity(d, d);
    for (const auto &g : seq) {
        u = g.unitary * u;
    }
    return u;
}

/// Builds the sequence at `phi` and identifies its exponent. When sin(phi)
/// vanishes every candidate coincides, so the pattern is identified at a
/// generic probe angle and then checked at `phi`.
template <class Builder>
Decomposition finish_decomposition(const SystemLayout &layout, std::size_t k, Builder &&build, double phi,
                                   bool boson_coupled, std::size_t two_qubit) {
    constexpr double kProbe = 0.3711;
    const bool degenerate = std::abs(std::sin(phi)) < 1e-9;
    const double id_phi = degenerate ? kProbe : phi;
    std::vector<GateOp> seq = build(phi);
    Matrix u = sequence_product(layout, seq);
    const Matrix u_id = degenerate ? sequence_product(layout, build(id_phi)) : u;
    auto matches = match_pauli_exponent(layout, k, u_id, id_phi, boson_coupled);
    if (matches.size() != 1) {
        throw NumericalError("decomposition: expected exactly one matching Pauli exponential, found " +
                             std::to_string(matches.size()));
    }
    Decomposition out;
    out.exponent = matches.front().first;
    out.max_error = matches.front().second;
    if (degenerate) {
        auto check = match_pauli_exponent(layout, k, u, phi, boson_coupled);
        const auto it = std::find_if(check.begin(), check.end(), [&](const auto &m) {
            return m.first.sign == out.exponent.sign && m.first.pattern.same_factors(out.exponent.pattern);
        });
        if (it == check.end()) {
            throw NumericalError("decomposition: identified exponent does not hold at the requested angle");
        }
        out.max_error = it->second;
    }
    out.sequence = std::move(seq);
    out.unitary = std::move(u);
    out.entangling_gates = two_qubit;
    out.candidates_matched = matches.size();
    return out;
}

} // namespace detail

/// U_MS(-pi/2, 0) * C(phi) * U_MS(pi/2, 0), where the central gate is
/// exp(i phi sigma^center_1) or, when boson_coupled, exp(i phi sigma^center_1 (a+a^dag)).
/// The resulting many-body exponential (pattern and sign) is identified by
/// exhaustive matching; phi must be generic (sin(phi) != 0) for uniqueness.
inline Decomposition ms_conjugation_decomposition(std::size_t k, double phi, PauliAxis center,
                                                  bool boson_coupled, std::size_t cutoff = 6) {
    if (k < 1) {
        throw InvalidArgument("ms_conjugation_decomposition: need k >= 1");
    }
    if (center != PauliAxis::Z && center != PauliAxis::Y) {
        throw InvalidArgument("ms_conjugation_decomposition: center axis must be z or y");
    }
    const SystemLayout layout = boson_coupled ? SystemLayout(HilbertLayout::system(k, {cutoff}))
                                              : SystemLayout::of(k);
    std::vector<std::size_t> sites(k);
    for (std::size_t i = 0; i < k; ++i) {
        sites[i] = i;
    }
    OperatorSpec gen = OperatorSpec(PauliString::single(0, center));
    std::string name = std::string("R") + static_cast<char>(std::tolower(axis_char(center)));
    std::vector<std::size_t> center_sites{0};
    if (boson_coupled) {
        gen = OperatorSpec::spin_boson(PauliString::single(0, center), {k, QuadratureForm::position});
        name += "(a+a^dag)";
        center_sites.push_back(k);
    }
    const Matrix gen_dense = gen.to_dense(layout);
    const Matrix ms_fwd = ms_gate(layout, sites, kPi / 2, 0.0);
    const Matrix ms_back = ms_gate(layout, sites, -kPi / 2, 0.0);
    auto build = [&](double angle) {
        std::vector<GateOp> seq;
        seq.push_back({"MS", sites, kPi / 2, ms_fwd});
        // exp(i angle G) = exp(-i (-G) angle)
        seq.push_back({name, center_sites, angle, matrix_exponential(-gen_dense, angle)});
        seq.push_back({"MS", sites, -kPi / 2, ms_back});
        return seq;
    };
    const std::size_t two_qubit = k > 1 ? 2 : 0;
    return detail::finish_decomposition(layout, k, build, phi, boson_coupled, two_qubit);
}

/// CZ_{1,k} ... CZ_{1,2} exp(-i phi sigma^y_1) CZ_{1,2} ... CZ_{1,k}
///   = exp(-i phi sigma^y (x) sigma^z (x) ... (x) sigma^z), with 2(k-1) CZ gates.
inline Decomposition cz_decomposition(std::size_t k, double phi) {
    if (k < 2) {
        throw InvalidArgument("cz_decomposition: need k >= 2");
    }
    const SystemLayout layout = SystemLayout::of(k);
    const Matrix y1 = PauliString::single(0, PauliAxis::Y).to_dense(layout);
    auto build = [&](double angle) {
        std::vector<GateOp> seq;
        for (std::size_t j = k - 1; j >= 1; --j) {
            seq.push_back({"CZ", {0, j}, 0.0, detail::cz_matrix(layout, 0, j)});
        }
        seq.push_back({"Ry", {0}, angle, matrix_exponential(y1, angle)});
        for (std::size_t j = 1; j < k; ++j) {
            seq.push_back({"CZ", {0, j}, 0.0, detail::cz_matrix(layout, 0, j)});
        }
        return seq;
    };
    return detail::finish_decomposition(layout, k, build, phi, false, 2 * (k - 1));
}

} // namespace ntcorr
