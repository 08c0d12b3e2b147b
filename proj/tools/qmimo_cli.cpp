// SPDX-License-Identifier: Apache-2.0
//
// qmimo: multicell massive MIMO with variable-resolution ADCs
// Copyright (C) 2026 The qmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "qmimo/experiment.hpp"
#include "qmimo/se_montecarlo.hpp"
#include "qmimo/spatial_correlation.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct RunArgs {
    std::string spec;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
    bool paper_scale = false;
    bool dry_run = false;
    bool verbose = false;
};

qmimo::ExperimentSpec load(const RunArgs& a) {
    qmimo::ExperimentSpec s = qmimo::load_spec(a.spec);
    if (a.paper_scale) qmimo::apply_paper_scale(s);
    if (a.seed) s.network.rng_seed = *a.seed;
    if (a.threads) s.threads = *a.threads;
    if (a.out) s.out_dir = *a.out;
    s.verbose = s.verbose || a.verbose;
    qmimo::refresh_canonical(s);
    return s;
}

int cmd_run(const RunArgs& a) {
    const qmimo::ExperimentSpec s = load(a);
    if (a.dry_run) {
        std::cout << qmimo::describe(s);
        return qmimo::validate(s).empty() ? 0 : kExitConfig;
    }
    const qmimo::RunSummary r = qmimo::run(s, std::cout);
    for (const std::string& f : r.files) std::cerr << "wrote " << f << '\n';
    return 0;
}

int cmd_validate(const RunArgs& a) {
    const std::vector<std::string> problems = qmimo::validate(load(a));
    for (const std::string& p : problems) std::cout << p << '\n';
    if (problems.empty()) std::cout << "ok\n";
    return problems.empty() ? 0 : kExitConfig;
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw qmimo::ConfigError("cannot write '" + path + "'");
    out << text;
}

int cmd_drop(const RunArgs& a, std::uint64_t drop_id, const std::string& path) {
    const qmimo::ExperimentSpec s = load(a);
    const qmimo::NetworkConfig& cfg = s.network;
    cfg.validate();
    qmimo::Rng rng = qmimo::make_stream(s.seed(), qmimo::drop_stream(drop_id));
    const qmimo::Grid grid = qmimo::build_grid(cfg);
    const qmimo::UserDrop drop = qmimo::drop_users(cfg, grid, rng);
    emit(qmimo::drop_to_csv(cfg, drop, qmimo::build_pilot_book(cfg, grid)), path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Uplink massive MIMO spectral and energy efficiency with low-resolution ADCs"};
    app.require_subcommand(1);

    RunArgs args;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("spec", args.spec, "experiment JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", args.seed, "override the RNG seed");
        sub->add_flag("--paper-scale", args.paper_scale, "L=9, K=5, M=30, 100 drops x 100 trials");
    };

    CLI::App* run = app.add_subcommand("run", "run an experiment and write CSV files");
    add_common(run);
    run->add_option("--threads", args.threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    run->add_option("--out", args.out, "output directory");
    run->add_flag("--dry-run", args.dry_run, "print derived quantities and exit");
    run->add_flag("--verbose", args.verbose, "log solver iterations");

    CLI::App* val = app.add_subcommand("validate", "list configuration problems");
    add_common(val);

    std::uint64_t drop_id = 0;
    std::string drop_out;
    CLI::App* drop = app.add_subcommand("drop", "export user positions and pilots of one drop as CSV");
    add_common(drop);
    drop->add_option("--drop-id", drop_id, "drop index");
    drop->add_option("-o,--output", drop_out, "CSV file (default: stdout)");

    double beta = 1.0, angle_deg = 30.0, asd_deg = 10.0;
    int antennas = 16, order = 50;
    std::string corr_out;
    CLI::App* corr = app.add_subcommand("correlation", "dump one local scattering correlation matrix");
    corr->add_option("--antennas", antennas, "array size")->check(CLI::PositiveNumber);
    corr->add_option("--angle-deg", angle_deg, "nominal angle of arrival");
    corr->add_option("--asd-deg", asd_deg, "angular standard deviation")->check(CLI::NonNegativeNumber);
    corr->add_option("--beta", beta, "large-scale gain")->check(CLI::NonNegativeNumber);
    corr->add_option("--order", order, "Gauss-Hermite order")->check(CLI::PositiveNumber);
    corr->add_option("-o,--output", corr_out, "CSV file (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(args);
        if (*val) return cmd_validate(args);
        if (*drop) return cmd_drop(args, drop_id, drop_out);
        if (*corr) {
            emit(qmimo::matrix_to_csv(qmimo::local_scattering_matrix(beta, qmimo::deg_to_rad(angle_deg),
                                                                     qmimo::deg_to_rad(asd_deg), antennas, order)),
                 corr_out);
            return 0;
        }
    } catch (const qmimo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const qmimo::DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const qmimo::SolverError& e) {
        std::cerr << "solver error: " << e.what() << " (residual " << e.residual() << ")\n";
        return kExitSolver;
    }
    return 1;
}
