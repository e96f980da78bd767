#include "convlab/cli.hpp"

#include "convlab/errors.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace convlab::cli {

namespace {

struct GlobalFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> horizon;
    std::optional<std::uint64_t> trials;
    std::string out;
};

/// Everything that goes wrong before work starts is a config error.
struct ConfigPhase : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Experiment load_experiment(const std::string& path, const GlobalFlags& flags) {
    try {
        ExperimentConfig cfg = load_config(path);
        if (flags.seed) cfg.seed = *flags.seed;
        if (flags.horizon) cfg.mode.horizon = *flags.horizon;
        if (flags.trials) cfg.engine.trials = *flags.trials;
        cfg.engine.seed = cfg.seed;
        return prepare(cfg);
    } catch (const std::exception& e) {
        throw ConfigPhase(e.what());
    }
}

/// Writes to --out (a directory) under `name`, or to stdout without it.
void emit(const GlobalFlags& flags, const std::string& name, const std::string& bytes) {
    if (flags.out.empty()) {
        std::cout << bytes;
        return;
    }
    const std::filesystem::path path = std::filesystem::path(flags.out) / name;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << bytes)) throw ResourceError("cannot write " + path.string());
    std::cout << path.string() << "\n";
}

void print_summary(const convergence::Verdict& v) {
    std::cout << "mode " << convergence::to_string(v.mode) << " at T = " << v.horizon << ": "
              << convergence::to_string(v.status) << "\n";
    for (const auto& w : v.worlds) {
        std::cout << "  " << w.world_id << "  N=" << (w.threshold ? std::to_string(*w.threshold) : "-") << "  "
                  << w.note << "\n";
    }
    if (v.witness) std::cout << "  witness: " << v.witness->description << "\n";
    for (const auto& note : v.notes) std::cout << "  note: " << note << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"convlab: finite-horizon checks of convergence modes for inductive inference methods"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags flags;
    std::uint64_t seed = 0;
    std::size_t horizon = 0;
    std::uint64_t trials = 0;
    auto* seed_opt = app.add_option("--seed", seed, "override the experiment seed");
    auto* horizon_opt = app.add_option("--horizon", horizon, "override the horizon T");
    auto* trials_opt = app.add_option("--trials", trials, "override the Monte Carlo trials per stage");
    app.add_option("--out", flags.out, "output directory");

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "run an experiment; writes the curve CSV and the run record");
    run_cmd->add_option("config", config_path, "experiment config (JSON)")->required();

    auto* verify_cmd = app.add_subcommand("verify", "check the configured mode and print the verdict as JSON");
    verify_cmd->add_option("config", config_path, "experiment config (JSON)")->required();

    auto* curve_cmd = app.add_subcommand("curve", "tabulate the success curve as CSV");
    curve_cmd->add_option("config", config_path, "experiment config (JSON)")->required();

    std::string problem_name;
    std::string method_name;
    std::size_t depth = 12;
    auto* witness_cmd = app.add_subcommand("witness", "search for a witness against a mode of convergence");
    witness_cmd->add_option("--problem", problem_name, "catalog problem")->required();
    witness_cmd->add_option("--method", method_name, "catalog method");
    witness_cmd->add_option("--depth", depth, "longest input enumerated by the cardinality witness")
        ->check(CLI::Range(0, 24));

    std::vector<double> eps_list{0.05, 0.1, 0.2, 0.3};
    std::size_t n_min = 1;
    std::size_t n_max = 100;
    auto* bound_cmd = app.add_subcommand("bound", "tabulate 1 - 1/(4 n eps^2), clamped at 0");
    bound_cmd->add_option("--eps", eps_list, "eps values")->delimiter(',');
    bound_cmd->add_option("--n-min", n_min, "first n");
    bound_cmd->add_option("--n-max", n_max, "last n");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    if (*seed_opt) flags.seed = seed;
    if (*horizon_opt) flags.horizon = horizon;
    if (*trials_opt) flags.trials = trials;

    try {
        if (*run_cmd) {
            const Experiment exp = load_experiment(config_path, flags);
            const RunRecord record = run(exp, flags.out.empty() ? "." : flags.out);
            print_summary(record.verdicts.front());
            std::cout << "curve:  " << record.curves.front().path << "\n"
                      << "record: " << (std::filesystem::path(flags.out.empty() ? "." : flags.out) /
                                        exp.config.record_path).string()
                      << "\n";
            return kExitOk;
        }
        if (*verify_cmd) {
            const Experiment exp = load_experiment(config_path, flags);
            const auto verdict = convergence::check_mode(exp.problem, exp.method, exp.config.mode, exp.config.engine);
            emit(flags, "verdict.json", to_json(verdict).dump(2) + "\n");
            return kExitOk;
        }
        if (*curve_cmd) {
            const Experiment exp = load_experiment(config_path, flags);
            const auto check =
                convergence::check_mode_with_curve(exp.problem, exp.method, exp.config.mode, exp.config.engine);
            std::ostringstream csv;
            write_curve_csv(csv, check.curve);
            emit(flags, exp.config.curve_path, csv.str());
            return kExitOk;
        }
        if (*witness_cmd) {
            std::optional<EmpiricalProblem> problem;
            std::optional<InferenceMethod> method;
            try {
                problem = make_problem(problem_name, nlohmann::json::object(), flags.seed.value_or(0));
                if (!method_name.empty()) method = make_method(method_name, nlohmann::json::object(), *problem);
            } catch (const std::exception& e) {
                throw ConfigPhase(e.what());
            }
            const auto doc = emit_witness(*problem, method ? &*method : nullptr, depth, flags.horizon.value_or(64));
            emit(flags, "witness.json", doc.dump(2) + "\n");
            return kExitOk;
        }
        if (*bound_cmd) {
            std::ostringstream csv;
            try {
                emit_bound_table(csv, eps_list, n_min, n_max);
            } catch (const std::exception& e) {
                throw ConfigPhase(e.what());
            }
            emit(flags, "bound.csv", csv.str());
            return kExitOk;
        }
    } catch (const ConfigPhase& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}

} // namespace convlab::cli
