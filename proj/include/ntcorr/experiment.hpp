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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "ntcorr/core.hpp"
#include "ntcorr/decompositions.hpp"
#include "ntcorr/gates.hpp"
#include "ntcorr/hilbert.hpp"
#include "ntcorr/operators.hpp"
#include "ntcorr/oracle.hpp"
#include "ntcorr/protocol.hpp"
#include "ntcorr/response.hpp"
#include "ntcorr/rng.hpp"
#include "ntcorr/verification.hpp"
#include "ntcorr/version.hpp"

/// Declarative experiment runner behind the `ntcorr` command line tool:
/// strict JSON configs, dispatch to the library, JSON/CSV writers and run
/// manifests.
namespace ntcorr::experiment {

using json = nlohmann::json;

// ------------------------------------------------------------------ errors

enum class ExitCode : int { ok = 0, failed = 1, parse = 2, validation = 3, numerical = 4 };

/// Malformed JSON, unreadable config, bad command line.
class ParseError : public Error {
  public:
    using Error::Error;
};

/// Well-formed input that breaks the schema or a library precondition.
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Exit status for an exception escaping a run.
inline ExitCode exit_code_for(const std::exception &e) {
    if (dynamic_cast<const ParseError *>(&e) != nullptr) {
        return ExitCode::parse;
    }
    if (dynamic_cast<const NumericalError *>(&e) != nullptr) {
        return ExitCode::numerical;
    }
    if (dynamic_cast<const Error *>(&e) != nullptr) {
        return ExitCode::validation;  // ValidationError, InvalidArgument, DimensionError, HermiticityError
    }
    return ExitCode::failed;
}

// ----------------------------------------------------------------- logging

enum class LogLevel { error = 0, info = 1, debug = 2 };

inline LogLevel parse_log_level(const char *value) {
    if (value == nullptr || *value == '\0') {
        return LogLevel::error;
    }
    const std::string v(value);
    if (v == "error") {
        return LogLevel::error;
    }
    if (v == "info") {
        return LogLevel::info;
    }
    if (v == "debug") {
        return LogLevel::debug;
    }
    throw ParseError("NTCORR_LOG must be one of error, info, debug; got '" + v + "'");
}

class Logger {
  public:
    explicit Logger(LogLevel level = LogLevel::error, std::ostream *sink = &std::cerr) : level_(level), sink_(sink) {}

    void log(LogLevel at, const std::string &message) const {
        if (at <= level_ && sink_ != nullptr) {
            static constexpr const char *kNames[] = {"error", "info", "debug"};
            const std::lock_guard<std::mutex> lock(mutex_);
            *sink_ << "ntcorr [" << kNames[static_cast<int>(at)] << "] " << message << '\n';
        }
    }
    void error(const std::string &m) const { log(LogLevel::error, m); }
    void info(const std::string &m) const { log(LogLevel::info, m); }
    void debug(const std::string &m) const { log(LogLevel::debug, m); }

  private:
    LogLevel level_;
    std::ostream *sink_;
    mutable std::mutex mutex_;
};

// ------------------------------------------------------------ strict reader

/// Reads one JSON object; every key must be consumed before finish().
class Fields {
  public:
    Fields(const json &j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) {
            throw ValidationError(path_ + ": expected an object");
        }
    }

    const json *optional(const std::string &key) {
        seen_.push_back(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const json &required(const std::string &key) {
        const json *v = optional(key);
        if (v == nullptr) {
            throw ValidationError(path_ + ": missing required field '" + key + "'");
        }
        return *v;
    }

    std::string at(const std::string &key) const { return path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
                throw ValidationError(path_ + ": unknown field '" + it.key() + "'");
            }
        }
    }

  private:
    const json &j_;
    std::string path_;
    std::vector<std::string> seen_;
};

inline double as_double(const json &j, const std::string &path) {
    if (!j.is_number()) {
        throw ValidationError(path + ": expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw ValidationError(path + ": expected a finite number");
    }
    return v;
}

inline std::uint64_t as_u64(const json &j, const std::string &path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
        throw ValidationError(path + ": expected a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

inline std::size_t as_size(const json &j, const std::string &path) {
    return static_cast<std::size_t>(as_u64(j, path));
}

inline bool as_bool(const json &j, const std::string &path) {
    if (!j.is_boolean()) {
        throw ValidationError(path + ": expected true or false");
    }
    return j.get<bool>();
}

inline std::string as_string(const json &j, const std::string &path) {
    if (!j.is_string()) {
        throw ValidationError(path + ": expected a string");
    }
    return j.get<std::string>();
}

/// A real number or a [re, im] pair.
inline Complex as_complex(const json &j, const std::string &path) {
    if (j.is_number()) {
        return {as_double(j, path), 0.0};
    }
    if (j.is_array() && j.size() == 2) {
        return {as_double(j[0], path + "[0]"), as_double(j[1], path + "[1]")};
    }
    throw ValidationError(path + ": expected a number or a [re, im] pair");
}

inline const json &as_array(const json &j, const std::string &path) {
    if (!j.is_array()) {
        throw ValidationError(path + ": expected an array");
    }
    return j;
}

inline std::vector<double> as_doubles(const json &j, const std::string &path) {
    std::vector<double> out;
    for (std::size_t i = 0; i < as_array(j, path).size(); ++i) {
        out.push_back(as_double(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

/// Entries of a task block: one object or a non-empty array of objects.
inline std::vector<std::pair<const json *, std::string>> entries_of(const json &j, const std::string &path) {
    std::vector<std::pair<const json *, std::string>> out;
    if (j.is_array()) {
        if (j.empty()) {
            throw ValidationError(path + ": expected at least one entry");
        }
        for (std::size_t i = 0; i < j.size(); ++i) {
            out.emplace_back(&j[i], path + "[" + std::to_string(i) + "]");
        }
    } else {
        out.emplace_back(&j, path);
    }
    return out;
}

// ------------------------------------------------------------------ config

enum class Task { correlate, respond, sample, verify, decompose };

inline const char *task_name(Task t) {
    static constexpr const char *kNames[] = {"correlate", "respond", "sample", "verify", "decompose"};
    return kNames[static_cast<int>(t)];
}

inline Task parse_task(const std::string &name) {
    for (Task t : {Task::correlate, Task::respond, Task::sample, Task::verify, Task::decompose}) {
        if (name == task_name(t)) {
            return t;
        }
    }
    throw ValidationError("unknown task '" + name + "'");
}

struct CorrelateEntry {
    std::vector<OperatorSpec> operators;
    std::vector<double> times;
    FiniteDifference fd{};
};

struct KuboCheck {
    std::vector<double> amplitudes;
    double omega = 0.0;
};

struct RespondEntry {
    OperatorSpec probe;
    OperatorSpec drive;
    double step = 0.0;
    std::size_t intervals = 0;
    std::vector<double> omegas;
    double observation_time = -1.0;
    double tolerance = 1e-6;
    FiniteDifference fd{};
    std::optional<KuboCheck> kubo_check;
};

struct SampleEntry {
    std::vector<OperatorSpec> operators;
    std::vector<double> times;
    double delta = 0.1;
    double c = 3.0;
};

struct VerifyEntry {
    std::vector<std::pair<std::string, std::size_t>> suites;  // name, instance count
};

struct DecomposeEntry {
    std::string kind = "cz";
    std::size_t k = 0;
    double phi = 0.0;
    std::optional<PauliAxis> center;
    bool boson_coupled = false;
    std::size_t cutoff = 6;
};

using Entry = std::variant<CorrelateEntry, RespondEntry, SampleEntry, VerifyEntry, DecomposeEntry>;

struct InitialSpec {
    enum class Kind { occupation, thermal, amplitudes } kind = Kind::occupation;
    std::vector<std::size_t> occupation;
    double beta = 0.0;
    Vector amplitudes;
};

struct ExperimentConfig {
    Task task = Task::correlate;
    std::uint64_t seed = 0;
    std::optional<SystemLayout> system;
    std::size_t qubits = 0;
    Schedule history;
    std::optional<OperatorSpec> hamiltonian;  // set when time-independent
    std::optional<InitialSpec> initial;
    std::vector<Entry> entries;
    /// FNV-1a of the canonical (key-sorted) config text.
    std::string config_hash;
};

inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

namespace detail {

inline QuadratureForm parse_form(const std::string &name, const std::string &path) {
    static const std::pair<const char *, QuadratureForm> kForms[] = {
        {"position", QuadratureForm::position}, {"momentum", QuadratureForm::momentum},
        {"lowering", QuadratureForm::lowering}, {"raising", QuadratureForm::raising},
        {"number", QuadratureForm::number}};
    for (const auto &[key, form] : kForms) {
        if (name == key) {
            return form;
        }
    }
    throw ValidationError(path + ": unknown quadrature form '" + name +
                          "' (position, momentum, lowering, raising, number)");
}

/// Term := "X0 Z1" | {coefficient?, pauli?, boson?, fermion?}, read as the
/// product coefficient * pauli * boson * fermion.
inline OperatorSpec parse_term(const json &j, const std::string &path, std::size_t qubits) {
    if (j.is_string()) {
        return pauli(j.get<std::string>());
    }
    Fields f(j, path);
    OperatorSpec op = OperatorSpec::identity();
    if (const auto *c = f.optional("coefficient")) {
        op = as_complex(*c, f.at("coefficient")) * op;
    }
    if (const auto *p = f.optional("pauli")) {
        op = op * pauli(as_string(*p, f.at("pauli")));
    }
    if (const auto *b = f.optional("boson")) {
        Fields bf(*b, f.at("boson"));
        const auto site = as_size(bf.required("site"), bf.at("site"));
        const auto form = bf.optional("form");
        const auto qf = form ? parse_form(as_string(*form, bf.at("form")), bf.at("form")) : QuadratureForm::position;
        bf.finish();
        op = op * quadrature(site, qf);
    }
    if (const auto *fe = f.optional("fermion")) {
        Fields ff(*fe, f.at("fermion"));
        const auto mode = as_size(ff.required("mode"), ff.at("mode"));
        const auto kind = as_string(ff.required("kind"), ff.at("kind"));
        ff.finish();
        if (kind != "creation" && kind != "annihilation") {
            throw ValidationError(ff.at("kind") + ": expected creation or annihilation");
        }
        op = op * jordan_wigner(mode, kind == "creation" ? FermionKind::creation : FermionKind::annihilation, qubits);
    }
    f.finish();
    return op;
}

/// Operator := Term | [Term, ...] (a sum).
inline OperatorSpec parse_operator(const json &j, const std::string &path, const SystemLayout &layout,
                                   std::size_t qubits) {
    OperatorSpec op = OperatorSpec::zero();
    try {
        if (j.is_array()) {
            if (j.empty()) {
                throw ValidationError(path + ": empty operator sum");
            }
            for (std::size_t i = 0; i < j.size(); ++i) {
                op = op + parse_term(j[i], path + "[" + std::to_string(i) + "]", qubits);
            }
        } else {
            op = parse_term(j, path, qubits);
        }
        (void)op.to_dense(layout);  // site and kind checks
    } catch (const ValidationError &) {
        throw;
    } catch (const Error &e) {
        throw ValidationError(path + ": " + e.what());
    }
    return op;
}

inline std::vector<OperatorSpec> parse_operator_list(const json &j, const std::string &path,
                                                     const SystemLayout &layout, std::size_t qubits) {
    std::vector<OperatorSpec> out;
    for (std::size_t i = 0; i < as_array(j, path).size(); ++i) {
        out.push_back(parse_operator(j[i], path + "[" + std::to_string(i) + "]", layout, qubits));
    }
    if (out.empty()) {
        throw ValidationError(path + ": need at least one operator");
    }
    return out;
}

inline FiniteDifference parse_fd(const json *j, const std::string &path) {
    FiniteDifference fd;
    if (j == nullptr) {
        return fd;
    }
    Fields f(*j, path);
    if (const auto *h = f.optional("h")) {
        fd.h = as_double(*h, f.at("h"));
        if (!(fd.h > 0.0)) {
            throw ValidationError(f.at("h") + ": must be > 0");
        }
    }
    if (const auto *r = f.optional("richardson")) {
        fd.richardson = as_bool(*r, f.at("richardson"));
    }
    if (const auto *l = f.optional("leakage_threshold")) {
        fd.leakage_threshold = as_double(*l, f.at("leakage_threshold"));
    }
    f.finish();
    return fd;
}

inline void check_times(const std::vector<double> &times, std::size_t n, const std::string &path,
                        const Schedule &history) {
    if (times.size() != n) {
        throw ValidationError(path + ": need exactly one time per operator");
    }
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < 0.0 || (k > 0 && times[k] < times[k - 1])) {
            throw ValidationError(path + ": times must be >= 0 and non-decreasing");
        }
    }
    if (times.back() > history.total_duration() + 1e-12 && times.back() > times.front()) {
        throw ValidationError(path + ": the Hamiltonian schedule does not cover the last time");
    }
}

inline const std::vector<std::pair<std::string, std::size_t>> &default_suites() {
    static const std::vector<std::pair<std::string, std::size_t>> suites{
        {"spin", 200}, {"boson", 50}, {"gibbs", 50}, {"fermion", 0}, {"three-way", 20}};
    return suites;
}

} // namespace detail

/// Validates and converts a parsed config. `seed_override` replaces the
/// config-level seed.
inline ExperimentConfig parse_config(const json &root, std::optional<Task> task_override = std::nullopt,
                                     std::optional<std::uint64_t> seed_override = std::nullopt) {
    ExperimentConfig cfg;
    cfg.config_hash = "fnv1a64:" + hex64(fnv1a64(root.dump()));
    Fields top(root, "config");

    if (const auto *t = top.optional("task")) {
        cfg.task = parse_task(as_string(*t, "config.task"));
        if (task_override && *task_override != cfg.task) {
            throw ValidationError(std::string("config.task is '") + task_name(cfg.task) + "' but the subcommand is '" +
                                  task_name(*task_override) + "'");
        }
    } else if (task_override) {
        cfg.task = *task_override;
    } else {
        throw ValidationError("config: missing required field 'task'");
    }
    if (const auto *s = top.optional("seed")) {
        cfg.seed = as_u64(*s, "config.seed");
    }
    if (seed_override) {
        cfg.seed = *seed_override;
    }

    const bool needs_system = cfg.task == Task::correlate || cfg.task == Task::respond || cfg.task == Task::sample;
    const json *system = top.optional("system");
    const json *hamiltonian = top.optional("hamiltonian");
    const json *schedule = top.optional("schedule");
    const json *initial = top.optional("initial_state");
    if (!needs_system) {
        for (const auto &[key, v] : {std::pair{"system", system}, std::pair{"hamiltonian", hamiltonian},
                                     std::pair{"schedule", schedule}, std::pair{"initial_state", initial}}) {
            if (v != nullptr) {
                throw ValidationError(std::string("config.") + key + " is not used by task '" + task_name(cfg.task) +
                                      "'");
            }
        }
    } else {
        if (system == nullptr) {
            throw ValidationError("config: missing required field 'system'");
        }
        Fields sf(*system, "config.system");
        cfg.qubits = as_size(sf.required("qubits"), sf.at("qubits"));
        std::vector<std::size_t> cutoffs;
        if (const auto *m = sf.optional("modes")) {
            for (std::size_t i = 0; i < as_array(*m, sf.at("modes")).size(); ++i) {
                const auto d = as_size((*m)[i], sf.at("modes") + "[" + std::to_string(i) + "]");
                if (d < 2) {
                    throw ValidationError(sf.at("modes") + ": Fock cutoffs must be >= 2");
                }
                cutoffs.push_back(d);
            }
        }
        sf.finish();
        if (cfg.qubits + cutoffs.size() == 0) {
            throw ValidationError("config.system: need at least one qubit or mode");
        }
        cfg.system = SystemLayout(HilbertLayout::system(cfg.qubits, std::span<const std::size_t>(cutoffs)));
        if (cfg.system->total_dim() > 4096) {
            throw ValidationError("config.system: Hilbert space dimension above 4096 is out of scope");
        }

        if ((hamiltonian == nullptr) == (schedule == nullptr)) {
            throw ValidationError("config: give exactly one of 'hamiltonian' and 'schedule'");
        }
        try {
            if (hamiltonian != nullptr) {
                cfg.hamiltonian = detail::parse_operator(*hamiltonian, "config.hamiltonian", *cfg.system, cfg.qubits);
                cfg.history = Schedule::constant(*cfg.hamiltonian);
            } else {
                std::vector<Schedule::Segment> segments;
                for (std::size_t i = 0; i < as_array(*schedule, "config.schedule").size(); ++i) {
                    const std::string path = "config.schedule[" + std::to_string(i) + "]";
                    Fields seg((*schedule)[i], path);
                    const double duration = as_double(seg.required("duration"), seg.at("duration"));
                    auto h = detail::parse_operator(seg.required("hamiltonian"), seg.at("hamiltonian"), *cfg.system,
                                                    cfg.qubits);
                    seg.finish();
                    segments.push_back({std::move(h), duration});
                }
                if (segments.empty()) {
                    throw ValidationError("config.schedule: need at least one segment");
                }
                cfg.history = Schedule(std::move(segments));
            }
        } catch (const ValidationError &) {
            throw;
        } catch (const Error &e) {
            throw ValidationError(std::string("config: ") + e.what());
        }

        if (initial == nullptr) {
            throw ValidationError("config: missing required field 'initial_state'");
        }
        Fields inf(*initial, "config.initial_state");
        InitialSpec spec;
        const json *occ = inf.optional("occupation");
        const json *thermal = inf.optional("thermal");
        const json *amps = inf.optional("amplitudes");
        inf.finish();
        if ((occ != nullptr) + (thermal != nullptr) + (amps != nullptr) != 1) {
            throw ValidationError("config.initial_state: give exactly one of occupation, thermal, amplitudes");
        }
        if (occ != nullptr) {
            spec.kind = InitialSpec::Kind::occupation;
            for (std::size_t i = 0; i < as_array(*occ, "config.initial_state.occupation").size(); ++i) {
                spec.occupation.push_back(
                    as_size((*occ)[i], "config.initial_state.occupation[" + std::to_string(i) + "]"));
            }
        } else if (thermal != nullptr) {
            spec.kind = InitialSpec::Kind::thermal;
            Fields tf(*thermal, "config.initial_state.thermal");
            spec.beta = as_double(tf.required("beta"), tf.at("beta"));
            tf.finish();
            if (spec.beta < 0.0) {
                throw ValidationError("config.initial_state.thermal.beta: must be >= 0");
            }
        } else {
            spec.kind = InitialSpec::Kind::amplitudes;
            const auto &arr = as_array(*amps, "config.initial_state.amplitudes");
            spec.amplitudes = Vector(static_cast<Eigen::Index>(arr.size()));
            for (std::size_t i = 0; i < arr.size(); ++i) {
                spec.amplitudes(static_cast<Eigen::Index>(i)) =
                    as_complex(arr[i], "config.initial_state.amplitudes[" + std::to_string(i) + "]");
            }
        }
        cfg.initial = std::move(spec);
    }

    const std::string block_name = task_name(cfg.task);
    const json *block = top.optional(block_name);
    for (Task other : {Task::correlate, Task::respond, Task::sample, Task::verify, Task::decompose}) {
        if (other != cfg.task && top.optional(task_name(other)) != nullptr) {
            throw ValidationError(std::string("config.") + task_name(other) + " is not used by task '" + block_name +
                                  "'");
        }
    }
    top.finish();

    if (block == nullptr) {
        if (cfg.task == Task::verify) {
            cfg.entries.emplace_back(VerifyEntry{detail::default_suites()});
            return cfg;
        }
        throw ValidationError("config: missing the '" + block_name + "' block");
    }

    for (const auto &[ej, path] : entries_of(*block, "config." + block_name)) {
        Fields f(*ej, path);
        switch (cfg.task) {
        case Task::correlate: {
            CorrelateEntry e;
            e.operators = detail::parse_operator_list(f.required("operators"), f.at("operators"), *cfg.system,
                                                      cfg.qubits);
            e.times = as_doubles(f.required("times"), f.at("times"));
            e.fd = detail::parse_fd(f.optional("finite_difference"), f.at("finite_difference"));
            detail::check_times(e.times, e.operators.size(), f.at("times"), cfg.history);
            cfg.entries.emplace_back(std::move(e));
            break;
        }
        case Task::sample: {
            SampleEntry e;
            e.operators = detail::parse_operator_list(f.required("operators"), f.at("operators"), *cfg.system,
                                                      cfg.qubits);
            e.times = as_doubles(f.required("times"), f.at("times"));
            e.delta = as_double(f.required("delta"), f.at("delta"));
            e.c = as_double(f.required("c"), f.at("c"));
            detail::check_times(e.times, e.operators.size(), f.at("times"), cfg.history);
            for (std::size_t i = 0; i < e.operators.size(); ++i) {
                if (!e.operators[i].is_unit_pauli()) {
                    throw ValidationError(f.at("operators") + "[" + std::to_string(i) +
                                          "]: sampling needs unit Pauli strings");
                }
            }
            try {
                (void)plan_shots(e.delta, e.c);
            } catch (const InvalidArgument &err) {
                throw ValidationError(path + ": " + err.what());
            }
            cfg.entries.emplace_back(std::move(e));
            break;
        }
        case Task::respond: {
            if (!cfg.hamiltonian) {
                throw ValidationError("config: task 'respond' needs a time-independent 'hamiltonian'");
            }
            RespondEntry e;
            e.probe = detail::parse_operator(f.required("probe"), f.at("probe"), *cfg.system, cfg.qubits);
            e.drive = detail::parse_operator(f.required("drive"), f.at("drive"), *cfg.system, cfg.qubits);
            e.step = as_double(f.required("step"), f.at("step"));
            e.intervals = as_size(f.required("intervals"), f.at("intervals"));
            e.omegas = as_doubles(f.required("omegas"), f.at("omegas"));
            if (const auto *o = f.optional("observation_time")) {
                e.observation_time = as_double(*o, f.at("observation_time"));
                if (e.observation_time < 0.0) {
                    throw ValidationError(f.at("observation_time") + ": must be >= 0");
                }
            }
            if (const auto *t = f.optional("tolerance")) {
                e.tolerance = as_double(*t, f.at("tolerance"));
            }
            e.fd = detail::parse_fd(f.optional("finite_difference"), f.at("finite_difference"));
            if (const auto *k = f.optional("kubo_check")) {
                Fields kf(*k, f.at("kubo_check"));
                KuboCheck check;
                check.amplitudes = as_doubles(kf.required("amplitudes"), kf.at("amplitudes"));
                check.omega = as_double(kf.required("omega"), kf.at("omega"));
                kf.finish();
                if (check.amplitudes.empty()) {
                    throw ValidationError(kf.at("amplitudes") + ": need at least one drive amplitude");
                }
                e.kubo_check = check;
            }
            if (!(e.step > 0.0) || e.intervals < 2 || e.intervals % 2 != 0) {
                throw ValidationError(path + ": need step > 0 and an even number of intervals >= 2");
            }
            if (e.omegas.empty()) {
                throw ValidationError(f.at("omegas") + ": need at least one frequency");
            }
            cfg.entries.emplace_back(std::move(e));
            break;
        }
        case Task::verify: {
            VerifyEntry e;
            const json *suites = f.optional("suites");
            if (suites == nullptr) {
                e.suites = detail::default_suites();
            } else {
                Fields sf(*suites, f.at("suites"));
                for (const auto &[name, count] : detail::default_suites()) {
                    if (const auto *n = sf.optional(name)) {
                        e.suites.emplace_back(name, as_size(*n, sf.at(name)));
                    }
                }
                sf.finish();
                if (e.suites.empty()) {
                    throw ValidationError(f.at("suites") + ": select at least one suite");
                }
            }
            cfg.entries.emplace_back(std::move(e));
            break;
        }
        case Task::decompose: {
            DecomposeEntry e;
            if (const auto *kind = f.optional("kind")) {
                e.kind = as_string(*kind, f.at("kind"));
            }
            if (e.kind != "cz" && e.kind != "ms") {
                throw ValidationError(f.at("kind") + ": expected 'cz' or 'ms'");
            }
            e.k = as_size(f.required("k"), f.at("k"));
            if (const auto *phi = f.optional("phi")) {
                e.phi = as_double(*phi, f.at("phi"));
            }
            if (const auto *center = f.optional("center")) {
                const auto c = as_string(*center, f.at("center"));
                if (c != "z" && c != "y") {
                    throw ValidationError(f.at("center") + ": expected 'z' or 'y'");
                }
                e.center = c == "z" ? PauliAxis::Z : PauliAxis::Y;
            }
            if (const auto *b = f.optional("boson_coupled")) {
                e.boson_coupled = as_bool(*b, f.at("boson_coupled"));
            }
            if (const auto *d = f.optional("cutoff")) {
                e.cutoff = as_size(*d, f.at("cutoff"));
            }
            const std::size_t k_min = e.kind == "cz" ? 2 : 1;
            if (e.k < k_min || e.k > 6) {
                throw ValidationError(f.at("k") + ": must lie in " + std::to_string(k_min) + "..6 for '" + e.kind +
                                      "'");
            }
            if (e.kind == "cz" && (e.center || e.boson_coupled)) {
                throw ValidationError(path + ": 'center' and 'boson_coupled' apply to kind 'ms' only");
            }
            if (e.cutoff < 2 || e.cutoff > 16) {
                throw ValidationError(f.at("cutoff") + ": must lie in 2..16");
            }
            cfg.entries.emplace_back(std::move(e));
            break;
        }
        }
        f.finish();
    }
    return cfg;
}

inline json read_json_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot read config file '" + path.string() + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw ParseError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

// --------------------------------------------------------------- execution

struct Table {
    std::string name;  // file suffix, e.g. "response"
    std::vector<std::pair<double, Complex>> rows;
};

struct EntryResult {
    json payload;  // includes wall_time_ms
    std::vector<Table> tables;
    std::string summary;  // one human-readable line
    bool passed = true;   // verify suites
};

struct RunReport {
    Task task = Task::correlate;
    std::vector<EntryResult> entries;
    double wall_time_ms = 0.0;
    bool all_passed() const {
        return std::all_of(entries.begin(), entries.end(), [](const EntryResult &e) { return e.passed; });
    }
};

namespace detail {

inline json complex_pair(Complex z) { return json::array({z.real(), z.imag()}); }

inline std::string format_complex(Complex z) {
    std::ostringstream s;
    s << std::setprecision(12) << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
    return s.str();
}

inline ntcorr::detail::InitialState build_initial(const ExperimentConfig &cfg) {
    const auto &spec = *cfg.initial;
    const auto &layout = cfg.system->layout();
    try {
        switch (spec.kind) {
        case InitialSpec::Kind::occupation:
            return make_state(layout, std::span<const std::size_t>(spec.occupation));
        case InitialSpec::Kind::thermal: {
            const auto &h0 = cfg.history.segments().front().hamiltonian;
            return oracle::gibbs_state(*cfg.system, h0.to_dense(*cfg.system), spec.beta);
        }
        case InitialSpec::Kind::amplitudes:
            return StateVector(layout, spec.amplitudes);
        }
    } catch (const NumericalError &) {
        throw;
    } catch (const Error &e) {
        throw ValidationError(std::string("config.initial_state: ") + e.what());
    }
    throw ValidationError("config.initial_state: unsupported kind");
}

inline json result_record(const CorrelationResult &r) {
    json j;
    j["schema_version"] = kResultSchemaVersion;
    j["value_re"] = r.value.real();
    j["value_im"] = r.value.imag();
    j["n"] = r.order;
    j["mode"] = mode_name(r.mode);
    j["shots"] = r.shots_per_observable;
    j["h"] = r.derivative ? json(r.derivative->h) : json(nullptr);
    j["leakage"] = r.leakage;
    if (r.derivative) {
        j["derivative"] = {{"stencil", r.derivative->stencil},
                           {"order", r.derivative->derivative_order},
                           {"richardson", r.derivative->richardson}};
    }
    j["protocol_runs"] = r.protocol_runs;
    return j;
}

inline EntryResult run_correlate(const ExperimentConfig &cfg, const CorrelateEntry &e) {
    const auto r = correlate(build_initial(cfg), e.operators, e.times, cfg.history, e.fd);
    EntryResult out;
    out.payload = result_record(r);
    out.payload["times"] = e.times;
    out.tables.push_back({"correlate", {{e.times.back(), r.value}}});
    out.summary = "value = " + format_complex(r.value) + " (n=" + std::to_string(r.order) + ", exact)";
    return out;
}

inline EntryResult run_sample(const ExperimentConfig &cfg, const SampleEntry &e, std::uint64_t seed) {
    const auto initial = build_initial(cfg);
    const auto plan = ProtocolPlan::spin(*cfg.system, e.operators, e.times, cfg.history);
    const auto shots = plan_shots(e.delta, e.c);
    const auto r = std::visit([&](const auto &s) { return sample_correlator(s, plan, shots, seed); }, initial);
    const auto exact = correlate(initial, e.operators, e.times, cfg.history);
    EntryResult out;
    out.payload = result_record(r);
    out.payload["times"] = e.times;
    out.payload["delta"] = e.delta;
    out.payload["c"] = e.c;
    out.payload["seed"] = seed;
    out.payload["exact_re"] = exact.value.real();
    out.payload["exact_im"] = exact.value.imag();
    out.tables.push_back({"sample", {{e.times.back(), r.value}}});
    out.summary = "sampled value = " + format_complex(r.value) + " (L=" + std::to_string(shots.shots) +
                  " per observable, exact " + format_complex(exact.value) + ")";
    return out;
}

inline EntryResult run_respond(const ExperimentConfig &cfg, const RespondEntry &e) {
    const auto initial = build_initial(cfg);
    ResponseOptions options;
    options.observation_time = e.observation_time;
    options.fd = e.fd;
    const auto rf = response_function(initial, *cfg.hamiltonian, e.probe, e.drive, e.step, e.intervals, options);
    const double horizon = e.step * static_cast<double>(e.intervals);
    const auto table = susceptibility(rf, e.omegas, horizon, e.tolerance);
    table.require_converged();

    EntryResult out;
    json &j = out.payload;
    j["schema_version"] = kResultSchemaVersion;
    j["kind"] = response_kind_name(rf.kind);
    j["step"] = rf.step;
    j["intervals"] = e.intervals;
    Table response{"response", {}};
    json rows = json::array();
    for (std::size_t i = 0; i < rf.lags.size(); ++i) {
        rows.push_back({{"lag", rf.lags[i]}, {"re", rf.values[i].real()}, {"im", rf.values[i].imag()}});
        response.rows.emplace_back(rf.lags[i], rf.values[i]);
    }
    j["response"] = rows;
    Table chi{"susceptibility", {}};
    json chi_rows = json::array();
    for (std::size_t i = 0; i < table.omegas.size(); ++i) {
        chi_rows.push_back({{"omega", table.omegas[i]}, {"re", table.chi[i].real()}, {"im", table.chi[i].imag()}});
        chi.rows.emplace_back(table.omegas[i], table.chi[i]);
    }
    j["susceptibility"] = {{"t", table.t},
                           {"rule", table.rule},
                           {"refinement_delta", table.refinement_delta},
                           {"tolerance", table.tolerance},
                           {"converged", table.converged},
                           {"rows", chi_rows}};
    out.tables.push_back(std::move(response));
    out.tables.push_back(std::move(chi));
    out.summary = std::to_string(rf.lags.size()) + " response samples, " + std::to_string(table.omegas.size()) +
                  " susceptibility samples (refinement delta " + std::to_string(table.refinement_delta) + ")";

    if (e.kubo_check) {
        const auto &k = *e.kubo_check;
        const auto pm = susceptibility(rf, {-k.omega, k.omega}, horizon, e.tolerance);
        const Complex base = unperturbed_expectation(initial, *cfg.hamiltonian, e.probe, horizon);
        json checks = json::array();
        double previous = 0.0;
        for (double f : k.amplitudes) {
            const auto pe = perturbed_evolution(initial, *cfg.hamiltonian, e.probe, e.drive, {{f, k.omega}}, horizon);
            const Complex pred = cosine_drive_prediction(base, pm.chi[1], pm.chi[0], f, k.omega, horizon);
            const double residual = std::abs(pe.value - pred);
            json row = {{"f", f},
                        {"perturbed_re", pe.value.real()},
                        {"predicted_re", pred.real()},
                        {"residual", residual}};
            row["ratio_to_previous"] = previous > 0.0 && residual > 0.0 ? json(previous / residual) : json(nullptr);
            checks.push_back(row);
            previous = residual;
        }
        j["kubo_check"] = {{"omega", k.omega}, {"t", horizon}, {"unperturbed_re", base.real()}, {"rows", checks}};
    }
    return out;
}

inline EntryResult run_verify(const VerifyEntry &e, std::uint64_t seed, std::size_t jobs, const Logger &log) {
    EntryResult out;
    json suites = json::array();
    std::ostringstream summary;
    for (std::size_t i = 0; i < e.suites.size(); ++i) {
        const auto &[name, count] = e.suites[i];
        verification::SuiteOptions options{count, CounterRng(seed, 1000 + i).next_u64(), jobs};
        log.info("verify: running suite '" + name + "'");
        verification::SuiteReport report;
        if (name == "spin") {
            report = verification::spin_suite(options);
        } else if (name == "boson") {
            report = verification::boson_suite(options);
        } else if (name == "gibbs") {
            report = verification::gibbs_suite(options);
        } else if (name == "fermion") {
            report = verification::fermion_suite(options);
        } else {
            report = verification::three_way_suite(options);
        }
        json failures = json::array();
        for (const auto &r : report.records) {
            if (!r.pass) {
                failures.push_back({{"index", r.index}, {"description", r.description}, {"error", r.error}});
                log.error("verify: " + name + " instance " + std::to_string(r.index) + " failed: " + r.description);
            }
        }
        suites.push_back({{"suite", name},
                          {"instances", report.records.size()},
                          {"passed", report.passed()},
                          {"failed", report.failed()},
                          {"tolerance", report.tolerance},
                          {"max_error", report.max_error()},
                          {"failures", failures}});
        out.passed = out.passed && report.ok();
        summary << (i ? "; " : "") << name << ": " << report.passed() << "/" << report.records.size() << " passed";
    }
    out.payload["schema_version"] = kResultSchemaVersion;
    out.payload["suites"] = suites;
    out.payload["all_passed"] = out.passed;
    out.summary = summary.str();
    return out;
}

inline EntryResult run_decompose(const DecomposeEntry &e) {
    const Decomposition d = e.kind == "cz"
                                ? cz_decomposition(e.k, e.phi)
                                : ms_conjugation_decomposition(e.k, e.phi,
                                                               e.center.value_or(e.k % 2 ? PauliAxis::Z : PauliAxis::Y),
                                                               e.boson_coupled, e.cutoff);
    EntryResult out;
    json &j = out.payload;
    j["schema_version"] = kResultSchemaVersion;
    j["kind"] = e.kind;
    j["k"] = e.k;
    j["phi"] = e.phi;
    j["exponent"] = d.exponent.label();
    j["pattern"] = d.exponent.pattern.label();
    j["sign"] = d.exponent.sign;
    j["boson_coupled"] = d.exponent.boson_coupled;
    j["max_error"] = d.max_error;
    j["entangling_gates"] = d.entangling_gates;
    json seq = json::array();
    for (const auto &g : d.sequence) {
        seq.push_back({{"gate", g.name}, {"sites", g.sites}, {"angle", g.angle}});
    }
    j["sequence"] = seq;
    std::ostringstream s;
    s << e.kind << " k=" << e.k << ": " << d.exponent.label() << ", max error " << std::scientific
      << std::setprecision(2) << d.max_error << ", " << d.entangling_gates << (e.kind == "cz" ? " CZ" : " MS")
      << " gates";
    out.summary = s.str();
    return out;
}

} // namespace detail

struct RunOptions {
    std::size_t jobs = 1;
    const Logger *log = nullptr;
};

/// Runs every entry of the config; entries are independent and may run in
/// parallel. Results are ordered as in the config.
inline RunReport run(const ExperimentConfig &cfg, const RunOptions &options = {}) {
    static const Logger kQuiet(LogLevel::error, nullptr);
    const Logger &log = options.log ? *options.log : kQuiet;
    const auto start = std::chrono::steady_clock::now();
    RunReport report;
    report.task = cfg.task;
    report.entries.resize(cfg.entries.size());
    // Verification suites parallelize internally; other tasks across entries.
    const bool inner_parallel = cfg.task == Task::verify;
    verification::parallel_for(cfg.entries.size(), inner_parallel ? 1 : options.jobs, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        log.debug(std::string(task_name(cfg.task)) + "[" + std::to_string(i) + "] started");
        EntryResult r = std::visit(
            [&](const auto &e) -> EntryResult {
                using E = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<E, CorrelateEntry>) {
                    return detail::run_correlate(cfg, e);
                } else if constexpr (std::is_same_v<E, SampleEntry>) {
                    return detail::run_sample(cfg, e, CounterRng(cfg.seed, i).next_u64());
                } else if constexpr (std::is_same_v<E, RespondEntry>) {
                    return detail::run_respond(cfg, e);
                } else if constexpr (std::is_same_v<E, VerifyEntry>) {
                    return detail::run_verify(e, cfg.seed, options.jobs, log);
                } else {
                    return detail::run_decompose(e);
                }
            },
            cfg.entries[i]);
        r.payload["task"] = task_name(cfg.task);
        r.payload["entry"] = i;
        r.payload["wall_time_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        log.info(std::string(task_name(cfg.task)) + "[" + std::to_string(i) + "] " + r.summary);
        report.entries[i] = std::move(r);
    });
    report.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return report;
}

// ----------------------------------------------------------------- writing

enum class Format { json, csv };

inline json manifest(const ExperimentConfig &cfg, const RunReport &report, const std::vector<std::string> &files) {
    return {{"schema_version", kResultSchemaVersion},
            {"library_version", kVersion},
            {"task", task_name(cfg.task)},
            {"config_hash", cfg.config_hash},
            {"seed", cfg.seed},
            {"entries", report.entries.size()},
            {"files", files},
            {"wall_time_ms", report.wall_time_ms}};
}

/// "lag_or_omega,re,im" rows with round-trip precision.
inline std::string to_csv(const std::vector<std::pair<double, Complex>> &rows) {
    std::ostringstream s;
    s << "lag_or_omega,re,im\n" << std::setprecision(17);
    for (const auto &[x, v] : rows) {
        s << x << ',' << v.real() << ',' << v.imag() << '\n';
    }
    return s.str();
}

/// Writes through a temporary file and a rename.
inline void write_atomically(const std::filesystem::path &path, const std::string &content) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write '" + tmp.string() + "'");
        }
        out << content;
        if (!out) {
            throw Error("write to '" + tmp.string() + "' failed");
        }
    }
    std::filesystem::rename(tmp, path);
}

/// Result files under `dir`: `<task>-<i>.json` per entry (json), or CSV
/// tables (`<task>.csv` with one row per entry for correlate and sample,
/// `respond-<i>-response.csv` and `respond-<i>-susceptibility.csv`), plus
/// `manifest.json`. Returns the written file names.
inline std::vector<std::string> write_outputs(const ExperimentConfig &cfg, const RunReport &report,
                                              const std::filesystem::path &dir, Format format) {
    std::filesystem::create_directories(dir);
    const std::string task = task_name(cfg.task);
    std::vector<std::string> files;
    if (format == Format::json) {
        for (std::size_t i = 0; i < report.entries.size(); ++i) {
            const std::string name = task + "-" + std::to_string(i) + ".json";
            write_atomically(dir / name, report.entries[i].payload.dump(2) + "\n");
            files.push_back(name);
        }
    } else if (cfg.task == Task::respond) {
        for (std::size_t i = 0; i < report.entries.size(); ++i) {
            for (const auto &t : report.entries[i].tables) {
                const std::string name = task + "-" + std::to_string(i) + "-" + t.name + ".csv";
                write_atomically(dir / name, to_csv(t.rows));
                files.push_back(name);
            }
        }
    } else {
        std::vector<std::pair<double, Complex>> rows;
        for (const auto &e : report.entries) {
            rows.insert(rows.end(), e.tables.front().rows.begin(), e.tables.front().rows.end());
        }
        const std::string name = task + ".csv";
        write_atomically(dir / name, to_csv(rows));
        files.push_back(name);
    }
    write_atomically(dir / "manifest.json", manifest(cfg, report, files).dump(2) + "\n");
    return files;
}

/// Single JSON document with every result and the manifest.
inline json combined_document(const ExperimentConfig &cfg, const RunReport &report) {
    json results = json::array();
    for (const auto &e : report.entries) {
        results.push_back(e.payload);
    }
    return {{"schema_version", kResultSchemaVersion}, {"results", results}, {"manifest", manifest(cfg, report, {})}};
}

// ------------------------------------------------------- result schema

namespace detail {

inline void check_version(Fields &f) {
    if (as_u64(f.required("schema_version"), f.at("schema_version")) != kResultSchemaVersion) {
        throw ValidationError(f.at("schema_version") + ": unsupported schema version");
    }
}

inline void check_one_of(const std::string &value, std::initializer_list<const char *> allowed, const std::string &path) {
    for (const char *a : allowed) {
        if (value == a) {
            return;
        }
    }
    throw ValidationError(path + ": unexpected value '" + value + "'");
}

inline void check_rows(const json &rows, const char *x, const std::string &path) {
    for (std::size_t i = 0; i < as_array(rows, path).size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        Fields r(rows[i], p);
        as_double(r.required(x), r.at(x));
        as_double(r.required("re"), r.at("re"));
        as_double(r.required("im"), r.at("im"));
        r.finish();
    }
}

inline void check_correlation_record(Fields &f, bool sampled) {
    as_double(f.required("value_re"), f.at("value_re"));
    as_double(f.required("value_im"), f.at("value_im"));
    if (as_u64(f.required("n"), f.at("n")) < 1) {
        throw ValidationError(f.at("n") + ": must be >= 1");
    }
    check_one_of(as_string(f.required("mode"), f.at("mode")), {sampled ? "sampled" : "exact"}, f.at("mode"));
    as_u64(f.required("shots"), f.at("shots"));
    const json &h = f.required("h");
    if (!h.is_null() && !(as_double(h, f.at("h")) > 0.0)) {
        throw ValidationError(f.at("h") + ": must be null or positive");
    }
    if (as_double(f.required("leakage"), f.at("leakage")) < 0.0) {
        throw ValidationError(f.at("leakage") + ": must be >= 0");
    }
    if (const json *d = f.optional("derivative")) {
        Fields g(*d, f.at("derivative"));
        as_string(g.required("stencil"), g.at("stencil"));
        as_u64(g.required("order"), g.at("order"));
        as_bool(g.required("richardson"), g.at("richardson"));
        g.finish();
    }
    as_u64(f.required("protocol_runs"), f.at("protocol_runs"));
    as_doubles(f.required("times"), f.at("times"));
    if (sampled) {
        as_double(f.required("delta"), f.at("delta"));
        as_double(f.required("c"), f.at("c"));
        as_u64(f.required("seed"), f.at("seed"));
        as_double(f.required("exact_re"), f.at("exact_re"));
        as_double(f.required("exact_im"), f.at("exact_im"));
    }
}

inline void check_respond_record(Fields &f) {
    check_one_of(as_string(f.required("kind"), f.at("kind")), {"spin-spin", "quadrature-spin"}, f.at("kind"));
    as_double(f.required("step"), f.at("step"));
    as_u64(f.required("intervals"), f.at("intervals"));
    check_rows(f.required("response"), "lag", f.at("response"));
    Fields s(f.required("susceptibility"), f.at("susceptibility"));
    as_double(s.required("t"), s.at("t"));
    as_string(s.required("rule"), s.at("rule"));
    as_double(s.required("refinement_delta"), s.at("refinement_delta"));
    as_double(s.required("tolerance"), s.at("tolerance"));
    as_bool(s.required("converged"), s.at("converged"));
    check_rows(s.required("rows"), "omega", s.at("rows"));
    s.finish();
    if (const json *k = f.optional("kubo_check")) {
        Fields g(*k, f.at("kubo_check"));
        as_double(g.required("omega"), g.at("omega"));
        as_double(g.required("t"), g.at("t"));
        as_double(g.required("unperturbed_re"), g.at("unperturbed_re"));
        const json &rows = g.required("rows");
        for (std::size_t i = 0; i < as_array(rows, g.at("rows")).size(); ++i) {
            Fields r(rows[i], g.at("rows") + "[" + std::to_string(i) + "]");
            for (const char *key : {"f", "perturbed_re", "predicted_re", "residual"}) {
                as_double(r.required(key), r.at(key));
            }
            const json &ratio = r.required("ratio_to_previous");
            if (!ratio.is_null()) {
                as_double(ratio, r.at("ratio_to_previous"));
            }
            r.finish();
        }
        g.finish();
    }
}

inline void check_verify_record(Fields &f) {
    const json &suites = f.required("suites");
    for (std::size_t i = 0; i < as_array(suites, f.at("suites")).size(); ++i) {
        Fields s(suites[i], f.at("suites") + "[" + std::to_string(i) + "]");
        as_string(s.required("suite"), s.at("suite"));
        for (const char *key : {"instances", "passed", "failed"}) {
            as_u64(s.required(key), s.at(key));
        }
        as_double(s.required("tolerance"), s.at("tolerance"));
        as_double(s.required("max_error"), s.at("max_error"));
        const json &failures = s.required("failures");
        for (std::size_t k = 0; k < as_array(failures, s.at("failures")).size(); ++k) {
            Fields x(failures[k], s.at("failures") + "[" + std::to_string(k) + "]");
            as_u64(x.required("index"), x.at("index"));
            as_string(x.required("description"), x.at("description"));
            as_double(x.required("error"), x.at("error"));
            x.finish();
        }
        s.finish();
    }
    as_bool(f.required("all_passed"), f.at("all_passed"));
}

inline void check_decompose_record(Fields &f) {
    check_one_of(as_string(f.required("kind"), f.at("kind")), {"cz", "ms"}, f.at("kind"));
    as_u64(f.required("k"), f.at("k"));
    as_double(f.required("phi"), f.at("phi"));
    as_string(f.required("exponent"), f.at("exponent"));
    as_string(f.required("pattern"), f.at("pattern"));
    const json &sign = f.required("sign");
    if (!sign.is_number_integer() || (sign.get<int>() != 1 && sign.get<int>() != -1)) {
        throw ValidationError(f.at("sign") + ": expected +1 or -1");
    }
    as_bool(f.required("boson_coupled"), f.at("boson_coupled"));
    as_double(f.required("max_error"), f.at("max_error"));
    as_u64(f.required("entangling_gates"), f.at("entangling_gates"));
    const json &seq = f.required("sequence");
    for (std::size_t i = 0; i < as_array(seq, f.at("sequence")).size(); ++i) {
        Fields g(seq[i], f.at("sequence") + "[" + std::to_string(i) + "]");
        as_string(g.required("gate"), g.at("gate"));
        const json &sites = g.required("sites");
        for (std::size_t k = 0; k < as_array(sites, g.at("sites")).size(); ++k) {
            as_u64(sites[k], g.at("sites"));
        }
        as_double(g.required("angle"), g.at("angle"));
        g.finish();
    }
}

} // namespace detail

/// Structural check of one result record (the JSON written per entry).
/// Throws ValidationError naming the offending field; unknown fields fail.
inline void validate_result(const json &record, const std::string &path = "result") {
    Fields f(record, path);
    detail::check_version(f);
    const Task task = parse_task(as_string(f.required("task"), f.at("task")));
    as_u64(f.required("entry"), f.at("entry"));
    if (as_double(f.required("wall_time_ms"), f.at("wall_time_ms")) < 0.0) {
        throw ValidationError(f.at("wall_time_ms") + ": must be >= 0");
    }
    switch (task) {
    case Task::correlate:
        detail::check_correlation_record(f, false);
        break;
    case Task::sample:
        detail::check_correlation_record(f, true);
        break;
    case Task::respond:
        detail::check_respond_record(f);
        break;
    case Task::verify:
        detail::check_verify_record(f);
        break;
    case Task::decompose:
        detail::check_decompose_record(f);
        break;
    }
    f.finish();
}

/// Structural check of a run manifest.
inline void validate_manifest(const json &m, const std::string &path = "manifest") {
    Fields f(m, path);
    detail::check_version(f);
    as_string(f.required("library_version"), f.at("library_version"));
    as_string(f.required("task"), f.at("task"));
    const std::string hash = as_string(f.required("config_hash"), f.at("config_hash"));
    if (hash.rfind("fnv1a64:", 0) != 0 || hash.size() != 24) {
        throw ValidationError(f.at("config_hash") + ": expected 'fnv1a64:' and 16 hex digits");
    }
    as_u64(f.required("seed"), f.at("seed"));
    as_u64(f.required("entries"), f.at("entries"));
    const json &files = f.required("files");
    for (std::size_t i = 0; i < as_array(files, f.at("files")).size(); ++i) {
        as_string(files[i], f.at("files"));
    }
    as_double(f.required("wall_time_ms"), f.at("wall_time_ms"));
    f.finish();
}

/// Structural check of the combined document printed for `--out -`.
inline void validate_document(const json &doc) {
    Fields f(doc, "document");
    detail::check_version(f);
    const json &results = f.required("results");
    for (std::size_t i = 0; i < as_array(results, f.at("results")).size(); ++i) {
        validate_result(results[i], f.at("results") + "[" + std::to_string(i) + "]");
    }
    validate_manifest(f.required("manifest"), f.at("manifest"));
    f.finish();
}

/// Structural check of a CSV table: the fixed header and three finite
/// numbers per row.
inline void validate_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "lag_or_omega,re,im") {
        throw ValidationError("csv: expected header 'lag_or_omega,re,im'");
    }
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        std::istringstream cells(line);
        std::string cell;
        std::size_t count = 0;
        while (std::getline(cells, cell, ',')) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception &) {
                used = 0;
            }
            if (used != cell.size() || cell.empty() || !std::isfinite(v)) {
                throw ValidationError("csv row " + std::to_string(row) + ": '" + cell + "' is not a finite number");
            }
            ++count;
        }
        if (count != 3) {
            throw ValidationError("csv row " + std::to_string(row) + ": expected 3 columns");
        }
    }
}

} // namespace ntcorr::experiment
