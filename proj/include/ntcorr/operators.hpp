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
#include <cstddef>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "ntcorr/core.hpp"
#include "ntcorr/hilbert.hpp"

namespace ntcorr {

enum class PauliAxis : unsigned char { I = 0, X = 1, Y = 2, Z = 3 };

inline char axis_char(PauliAxis a) { return "IXYZ"[static_cast<int>(a)]; }

inline Matrix axis_matrix(PauliAxis a) {
    switch (a) {
    case PauliAxis::X:
        return pauli_matrix::x();
    case PauliAxis::Y:
        return pauli_matrix::y();
    case PauliAxis::Z:
        return pauli_matrix::z();
    default:
        return pauli_matrix::identity();
    }
}

/// Product of single-qubit Pauli matrices times a complex coefficient.
/// Sites index the system subsystem list; identity factors are not stored.
class PauliString {
  public:
    using Factor = std::pair<std::size_t, PauliAxis>;

    PauliString() = default;

    PauliString(std::vector<Factor> factors, Complex coefficient = 1.0) : coefficient_(coefficient) {
        std::sort(factors.begin(), factors.end());
        for (std::size_t i = 0; i < factors.size(); ++i) {
            if (i > 0 && factors[i].first == factors[i - 1].first) {
                throw InvalidArgument("PauliString: site " + std::to_string(factors[i].first) +
                                      " appears twice");
            }
            if (factors[i].second != PauliAxis::I) {
                factors_.push_back(factors[i]);
            }
        }
    }

    static PauliString single(std::size_t site, PauliAxis axis, Complex coefficient = 1.0) {
        return PauliString({{site, axis}}, coefficient);
    }

    /// Parses "X0 Z2", "Y1", "I" or "" (identity). Optional leading sign '-'.
    static PauliString parse(std::string_view text) {
        std::vector<Factor> factors;
        Complex coef = 1.0;
        std::size_t i = 0;
        auto skip_ws = [&] {
            while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
                ++i;
            }
        };
        skip_ws();
        if (i < text.size() && text[i] == '-') {
            coef = -1.0;
            ++i;
        }
        while (true) {
            skip_ws();
            if (i >= text.size()) {
                break;
            }
            const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(text[i++])));
            PauliAxis axis;
            switch (c) {
            case 'I':
                axis = PauliAxis::I;
                break;
            case 'X':
                axis = PauliAxis::X;
                break;
            case 'Y':
                axis = PauliAxis::Y;
                break;
            case 'Z':
                axis = PauliAxis::Z;
                break;
            default:
                throw InvalidArgument("PauliString::parse: unexpected character '" + std::string(1, c) + "'");
            }
            std::size_t start = i;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
                ++i;
            }
            if (start == i) {
                if (axis == PauliAxis::I) {
                    continue;
                }
                throw InvalidArgument("PauliString::parse: axis without site index");
            }
            factors.emplace_back(std::stoul(std::string(text.substr(start, i - start))), axis);
        }
        return PauliString(std::move(factors), coef);
    }

    const std::vector<Factor> &factors() const { return factors_; }
    Complex coefficient() const { return coefficient_; }
    std::size_t weight() const { return factors_.size(); }

    PauliString with_coefficient(Complex c) const {
        PauliString p = *this;
        p.coefficient_ = c;
        return p;
    }

    PauliAxis axis_at(std::size_t site) const {
        for (const auto &[s, a] : factors_) {
            if (s == site) {
                return a;
            }
        }
        return PauliAxis::I;
    }

    /// Exact product; the phase lands in the coefficient.
    friend PauliString operator*(const PauliString &lhs, const PauliString &rhs) {
        std::vector<Factor> out;
        Complex phase = lhs.coefficient_ * rhs.coefficient_;
        std::size_t i = 0;
        std::size_t j = 0;
        const auto &a = lhs.factors_;
        const auto &b = rhs.factors_;
        while (i < a.size() || j < b.size()) {
            if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
                out.push_back(a[i++]);
            } else if (i == a.size() || b[j].first < a[i].first) {
                out.push_back(b[j++]);
            } else {
                auto [axis, ph] = multiply_axes(a[i].second, b[j].second);
                phase *= ph;
                if (axis != PauliAxis::I) {
                    out.emplace_back(a[i].first, axis);
                }
                ++i;
                ++j;
            }
        }
        return PauliString(std::move(out), phase);
    }

    std::string label() const {
        if (factors_.empty()) {
            return "I";
        }
        std::string s;
        for (const auto &[site, axis] : factors_) {
            if (!s.empty()) {
                s += ' ';
            }
            s += axis_char(axis);
            s += std::to_string(site);
        }
        return s;
    }

    std::vector<LocalOperator> locals() const {
        std::vector<LocalOperator> v;
        v.reserve(factors_.size());
        for (const auto &[site, axis] : factors_) {
            v.push_back({site, axis_matrix(axis)});
        }
        return v;
    }

    /// Dense matrix including the coefficient.
    Matrix to_dense(const SystemLayout &layout) const {
        for (const auto &[site, axis] : factors_) {
            if (site >= layout.size() || layout[site].kind != SubsystemKind::qubit) {
                throw DimensionError("PauliString: site " + std::to_string(site) + " is not a qubit");
            }
        }
        const auto locs = locals();
        return coefficient_ * embed_operator(layout.layout(), std::span<const LocalOperator>(locs));
    }

    bool same_factors(const PauliString &o) const { return factors_ == o.factors_; }

  private:
    static std::pair<PauliAxis, Complex> multiply_axes(PauliAxis a, PauliAxis b) {
        if (a == PauliAxis::I) {
            return {b, 1.0};
        }
        if (b == PauliAxis::I || a == b) {
            return {a == b ? PauliAxis::I : a, 1.0};
        }
        const int ia = static_cast<int>(a);
        const int ib = static_cast<int>(b);
        const auto c = static_cast<PauliAxis>(6 - ia - ib);
        // X*Y = iZ, Y*Z = iX, Z*X = iY; reversed order gives -i.
        const bool cyclic = (ib - ia + 3) % 3 == 1;
        return {c, cyclic ? kI : -kI};
    }

    std::vector<Factor> factors_;
    Complex coefficient_ = 1.0;
};

enum class QuadratureForm { position, momentum, lowering, raising, number };

inline const char *form_name(QuadratureForm f) {
    switch (f) {
    case QuadratureForm::position:
        return "a+a^dag";
    case QuadratureForm::momentum:
        return "i(a^dag-a)";
    case QuadratureForm::lowering:
        return "a";
    case QuadratureForm::raising:
        return "a^dag";
    default:
        return "a^dag a";
    }
}

inline bool form_is_hermitian(QuadratureForm f) {
    return f == QuadratureForm::position || f == QuadratureForm::momentum || f == QuadratureForm::number;
}

struct BosonQuadrature {
    std::size_t site = 0;
    QuadratureForm form = QuadratureForm::position;

    Matrix local_matrix(std::size_t d) const {
        switch (form) {
        case QuadratureForm::position:
            return ladder::position(d);
        case QuadratureForm::momentum:
            return ladder::momentum(d);
        case QuadratureForm::lowering:
            return ladder::lowering(d);
        case QuadratureForm::raising:
            return ladder::raising(d);
        default:
            return ladder::number(d);
        }
    }

    auto operator<=>(const BosonQuadrature &) const = default;
};

/// One product term: coefficient * PauliString factors * boson factors.
struct OperatorTerm {
    Complex coefficient = 1.0;
    PauliString pauli;  // coefficient kept at 1
    std::vector<BosonQuadrature> bosons;  // sorted by site

    bool same_structure(const OperatorTerm &o) const {
        return pauli.same_factors(o.pauli) && bosons == o.bosons;
    }
};

/// Operators used as correlator arguments, controlled-gate generators and
/// Hamiltonians. Stored flattened as a weighted sum of product terms.
class OperatorSpec {
  public:
    enum class Kind { pauli_string, boson_quadrature, spin_boson_product, weighted_sum };

    OperatorSpec() = default;

    OperatorSpec(const PauliString &p) {
        terms_.push_back({p.coefficient(), p.with_coefficient(1.0), {}});
    }

    OperatorSpec(const BosonQuadrature &q) { terms_.push_back({1.0, PauliString(), {q}}); }

    static OperatorSpec spin_boson(const PauliString &p, const BosonQuadrature &q) {
        if (p.axis_at(q.site) != PauliAxis::I) {
            throw InvalidArgument("spin_boson: Pauli and quadrature factors share a site");
        }
        OperatorSpec s;
        s.terms_.push_back({p.coefficient(), p.with_coefficient(1.0), {q}});
        return s;
    }

    static OperatorSpec weighted_sum(const std::vector<std::pair<Complex, OperatorSpec>> &parts) {
        OperatorSpec s;
        for (const auto &[c, op] : parts) {
            for (auto t : op.terms_) {
                t.coefficient *= c;
                s.terms_.push_back(std::move(t));
            }
        }
        s.simplify();
        return s;
    }

    static OperatorSpec zero() { return OperatorSpec(std::vector<OperatorTerm>{}); }

    static OperatorSpec identity(Complex c = 1.0) { return OperatorSpec(PauliString({}, c)); }

    const std::vector<OperatorTerm> &terms() const { return terms_; }

    Kind kind() const {
        if (terms_.size() != 1) {
            return Kind::weighted_sum;
        }
        const auto &t = terms_.front();
        if (t.bosons.empty()) {
            return Kind::pauli_string;
        }
        if (t.pauli.weight() == 0 && t.bosons.size() == 1 && t.coefficient == Complex(1.0)) {
            return Kind::boson_quadrature;
        }
        return Kind::spin_boson_product;
    }

    bool has_bosons() const {
        return std::any_of(terms_.begin(), terms_.end(), [](const OperatorTerm &t) { return !t.bosons.empty(); });
    }

    /// Structural Hermiticity: every term has a real coefficient and only
    /// Hermitian boson factors. Sums such as sigma_+ + sigma_- are reported
    /// non-Hermitian even though their matrix is Hermitian.
    bool is_hermitian() const {
        for (const auto &t : terms_) {
            if (std::abs(t.coefficient.imag()) > 1e-12 * std::max(1.0, std::abs(t.coefficient))) {
                return false;
            }
            for (const auto &b : t.bosons) {
                if (!form_is_hermitian(b.form)) {
                    return false;
                }
            }
        }
        return true;
    }

    /// A single Pauli string with coefficient +1: Hermitian and unitary.
    bool is_unit_pauli() const {
        return terms_.size() == 1 && terms_.front().bosons.empty() && terms_.front().coefficient == Complex(1.0);
    }

    Matrix to_dense(const SystemLayout &layout) const {
        const auto d = static_cast<Eigen::Index>(layout.total_dim());
        Matrix out = Matrix::Zero(d, d);
        for (const auto &t : terms_) {
            std::vector<LocalOperator> locs = t.pauli.locals();
            for (const auto &[site, axis] : t.pauli.factors()) {
                if (site >= layout.size() || layout[site].kind != SubsystemKind::qubit) {
                    throw DimensionError("OperatorSpec: Pauli site " + std::to_string(site) + " is not a qubit");
                }
            }
            for (const auto &b : t.bosons) {
                if (b.site >= layout.size() || layout[b.site].kind != SubsystemKind::boson_mode) {
                    throw DimensionError("OperatorSpec: boson site " + std::to_string(b.site) + " is not a mode");
                }
                locs.push_back({b.site, b.local_matrix(layout[b.site].dim)});
            }
            out += t.coefficient * embed_operator(layout.layout(), std::span<const LocalOperator>(locs));
        }
        return out;
    }

    OperatorSpec adjoint() const {
        OperatorSpec s = *this;
        for (auto &t : s.terms_) {
            t.coefficient = std::conj(t.coefficient);
            for (auto &b : t.bosons) {
                if (b.form == QuadratureForm::lowering) {
                    b.form = QuadratureForm::raising;
                } else if (b.form == QuadratureForm::raising) {
                    b.form = QuadratureForm::lowering;
                }
            }
        }
        return s;
    }

    /// Rewrites the operator as sum_k c_k U_k where each U_k is a single
    /// Hermitian product with coefficient 1 (a -> (x + i p)/2 and
    /// a^dag -> (x - i p)/2 on every boson factor).
    std::vector<std::pair<Complex, OperatorSpec>> hermitian_expansion() const {
        std::vector<std::pair<Complex, OperatorSpec>> out;
        for (const auto &t : terms_) {
            std::vector<std::pair<Complex, std::vector<BosonQuadrature>>> partial{{t.coefficient, {}}};
            for (const auto &b : t.bosons) {
                std::vector<std::pair<Complex, BosonQuadrature>> options;
                if (form_is_hermitian(b.form)) {
                    options.push_back({1.0, b});
                } else {
                    const double sign = b.form == QuadratureForm::lowering ? 1.0 : -1.0;
                    options.push_back({0.5, {b.site, QuadratureForm::position}});
                    options.push_back({0.5 * sign * kI, {b.site, QuadratureForm::momentum}});
                }
                std::vector<std::pair<Complex, std::vector<BosonQuadrature>>> next;
                for (const auto &[c, bs] : partial) {
                    for (const auto &[oc, ob] : options) {
                        auto nb = bs;
                        nb.push_back(ob);
                        next.push_back({c * oc, std::move(nb)});
                    }
                }
                partial = std::move(next);
            }
            for (auto &[c, bs] : partial) {
                OperatorSpec unit;
                unit.terms_.push_back({1.0, t.pauli, std::move(bs)});
                out.push_back({c, std::move(unit)});
            }
        }
        return out;
    }

    friend OperatorSpec operator+(const OperatorSpec &a, const OperatorSpec &b) {
        OperatorSpec s = a;
        s.terms_.insert(s.terms_.end(), b.terms_.begin(), b.terms_.end());
        s.simplify();
        return s;
    }

    friend OperatorSpec operator-(const OperatorSpec &a, const OperatorSpec &b) { return a + (-1.0) * b; }

    friend OperatorSpec operator*(Complex c, const OperatorSpec &a) {
        OperatorSpec s = a;
        for (auto &t : s.terms_) {
            t.coefficient *= c;
        }
        s.simplify();
        return s;
    }

    friend OperatorSpec operator*(double c, const OperatorSpec &a) { return Complex(c) * a; }

    /// Operator product. Boson factors of the two sides must sit on distinct
    /// modes (products on one mode are not representable).
    friend OperatorSpec operator*(const OperatorSpec &a, const OperatorSpec &b) {
        OperatorSpec s;
        for (const auto &ta : a.terms_) {
            for (const auto &tb : b.terms_) {
                const PauliString p = ta.pauli * tb.pauli;
                OperatorTerm t{ta.coefficient * tb.coefficient * p.coefficient(), p.with_coefficient(1.0), ta.bosons};
                for (const auto &q : tb.bosons) {
                    for (const auto &existing : t.bosons) {
                        if (existing.site == q.site) {
                            throw InvalidArgument("OperatorSpec product: two boson factors on one mode");
                        }
                    }
                    t.bosons.push_back(q);
                }
                std::sort(t.bosons.begin(), t.bosons.end());
                s.terms_.push_back(std::move(t));
            }
        }
        s.simplify();
        return s;
    }

    std::string label() const {
        if (terms_.empty()) {
            return "0";
        }
        std::ostringstream os;
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            const auto &t = terms_[i];
            if (i > 0) {
                os << " + ";
            }
            if (t.coefficient != Complex(1.0)) {
                os << "(" << t.coefficient.real() << (t.coefficient.imag() < 0 ? "" : "+") << t.coefficient.imag()
                   << "i)*";
            }
            os << t.pauli.label();
            for (const auto &b : t.bosons) {
                os << " [" << form_name(b.form) << "]" << b.site;
            }
        }
        return os.str();
    }

  private:
    explicit OperatorSpec(std::vector<OperatorTerm> terms) : terms_(std::move(terms)) {}

    void simplify() {
        std::vector<OperatorTerm> merged;
        for (auto &t : terms_) {
            auto it = std::find_if(merged.begin(), merged.end(),
                                   [&](const OperatorTerm &m) { return m.same_structure(t); });
            if (it == merged.end()) {
                merged.push_back(std::move(t));
            } else {
                it->coefficient += t.coefficient;
            }
        }
        std::erase_if(merged, [](const OperatorTerm &t) { return std::abs(t.coefficient) < 1e-15; });
        for (auto &t : merged) {
            // Cancel round-off that would break structural Hermiticity.
            if (std::abs(t.coefficient.imag()) < 1e-15) {
                t.coefficient = t.coefficient.real();
            }
            if (std::abs(t.coefficient.real()) < 1e-15) {
                t.coefficient = Complex(0.0, t.coefficient.imag());
            }
        }
        terms_ = std::move(merged);
    }

    std::vector<OperatorTerm> terms_;
};

inline OperatorSpec pauli(std::string_view text) { return OperatorSpec(PauliString::parse(text)); }

inline OperatorSpec quadrature(std::size_t site, QuadratureForm form = QuadratureForm::position) {
    return OperatorSpec(BosonQuadrature{site, form});
}

} // namespace ntcorr
