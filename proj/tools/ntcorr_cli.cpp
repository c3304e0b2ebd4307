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


// Command line front end: `ntcorr <task> --config FILE [--out DIR|-]
// [--format json|csv] [--seed N] [--jobs N]`.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ntcorr/experiment.hpp"
#include "ntcorr/version.hpp"

namespace {

namespace ex = ntcorr::experiment;

struct Options {
    std::string config;
    std::string out;
    std::string format = "json";
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 1;
};

int execute(ex::Task task, const Options &opt, const ex::Logger &log) {
    const auto format = opt.format == "csv" ? ex::Format::csv : ex::Format::json;
    const auto root = ex::read_json_file(opt.config);
    const auto cfg = ex::parse_config(root, task, opt.seed);
    if (format == ex::Format::csv) {
        if (task == ex::Task::verify || task == ex::Task::decompose) {
            throw ex::ValidationError(std::string("--format csv is not available for task '") + ex::task_name(task) +
                                      "'");
        }
        if (opt.out.empty() || opt.out == "-") {
            throw ex::ValidationError("--format csv needs an output directory (--out DIR)");
        }
    }
    log.info("config " + opt.config + " (" + cfg.config_hash + "), seed " + std::to_string(cfg.seed) + ", " +
             std::to_string(cfg.entries.size()) + " entries, " + std::to_string(opt.jobs) + " jobs");

    const auto report = ex::run(cfg, {opt.jobs, &log});

    if (opt.out == "-") {
        std::cout << ex::combined_document(cfg, report).dump(2) << '\n';
    } else {
        for (std::size_t i = 0; i < report.entries.size(); ++i) {
            std::cout << ex::task_name(task) << '[' << i << "] " << report.entries[i].summary << '\n';
        }
        if (!opt.out.empty()) {
            const auto files = ex::write_outputs(cfg, report, opt.out, format);
            log.info("wrote " + std::to_string(files.size()) + " result files and manifest.json to " + opt.out);
        }
    }
    if (!report.all_passed()) {
        log.error("verification failures; see the result records");
        return static_cast<int>(ex::ExitCode::failed);
    }
    return static_cast<int>(ex::ExitCode::ok);
}

} // namespace

int main(int argc, char **argv) {
    ex::LogLevel level = ex::LogLevel::error;
    try {
        level = ex::parse_log_level(std::getenv("NTCORR_LOG"));
    } catch (const std::exception &e) {
        std::cerr << "ntcorr: " << e.what() << '\n';
        return static_cast<int>(ex::ExitCode::parse);
    }
    const ex::Logger log(level);

    CLI::App app{"ntcorr: n-time correlation functions through an ancilla-qubit protocol, checked against a "
                 "Heisenberg-picture oracle"};
    app.set_version_flag("--version", std::string(ntcorr::kVersion));
    app.require_subcommand(1, 1);

    Options opt;
    const std::pair<ex::Task, const char *> tasks[] = {
        {ex::Task::correlate, "Exact n-time correlators through the protocol"},
        {ex::Task::respond, "Response function, susceptibility table and optional Kubo check"},
        {ex::Task::sample, "Shot-noise sampled correlators with a planned sample size"},
        {ex::Task::verify, "Randomized protocol-versus-oracle suites"},
        {ex::Task::decompose, "Gate decompositions of many-body Pauli exponentials"},
    };
    std::optional<ex::Task> chosen;
    for (const auto &[task, description] : tasks) {
        auto *sub = app.add_subcommand(ex::task_name(task), description);
        sub->add_option("--config", opt.config, "Experiment config (JSON)")->required();
        sub->add_option("--out", opt.out, "Output directory, or '-' for one JSON document on stdout");
        sub->add_option("--format", opt.format, "Result format")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--seed", opt.seed, "Seed overriding the config-level seed");
        sub->add_option("--jobs", opt.jobs, "Worker threads")->check(CLI::Range(std::size_t{1}, std::size_t{256}));
        sub->callback([&chosen, task = task] { chosen = task; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return static_cast<int>(ex::ExitCode::parse);
    }

    try {
        return execute(*chosen, opt, log);
    } catch (const std::exception &e) {
        const auto code = ex::exit_code_for(e);
        std::cerr << "ntcorr: " << e.what() << '\n';
        return static_cast<int>(code);
    }
}
