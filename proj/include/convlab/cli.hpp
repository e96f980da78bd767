#pragma once

// Batch front end: experiment configs, run records, curve CSVs, bound
// tables and witness documents.
//
// A config is a JSON document with a single "experiment" object:
//
//   {"experiment": {
//      "problem": {"name": "easy-raven", "params": {"max_first_zero": 20}},
//      "method":  {"name": "raven-rule"},
//      "mode":    {"mode": "I", "horizon": 100},
//      "engine":  {"trials": 10000},
//      "seed": 7,
//      "output":  {"curve": "curve.csv", "record": "record.json"}}}

#include "convlab/convergence.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace convlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

extern const char* const kVersion;

/// The exact curve CSV header.
extern const char* const kCurveHeader;

struct ExperimentConfig {
    std::string problem;
    nlohmann::json problem_params = nlohmann::json::object();
    std::string method;
    nlohmann::json method_params = nlohmann::json::object();
    convergence::ModeParams mode;
    convergence::EngineOptions engine;
    std::uint64_t seed = 0;
    std::string curve_path = "curve.csv";
    std::string record_path = "record.json";
    /// Hex SHA-256 of the config file bytes.
    std::string digest;
};

/// Parses config text. Errors are ConfigError carrying "origin:line: message".
ExperimentConfig parse_config(std::string_view text, const std::string& origin = "config");
ExperimentConfig load_config(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

/// Catalog lookups; unknown names and bad parameter blocks are ConfigError.
EmpiricalProblem make_problem(const std::string& name, const nlohmann::json& params, std::uint64_t seed);
InferenceMethod make_method(const std::string& name, const nlohmann::json& params, const EmpiricalProblem& problem);

/// Resolves the problem and method and checks the mode parameters, so that
/// every config error surfaces before any work starts.
struct Experiment {
    ExperimentConfig config;
    EmpiricalProblem problem;
    InferenceMethod method;
};
Experiment prepare(const ExperimentConfig& config);

struct CurveRef {
    std::string path;
    std::string criterion;
    std::size_t rows = 0;
};

struct RunRecord {
    std::string config_digest;
    std::uint64_t seed = 0;
    std::string version;
    std::string problem;
    std::string method;
    std::vector<std::string> hypothesis_order;
    std::vector<convergence::Verdict> verdicts;
    std::vector<CurveRef> curves;
    std::int64_t duration_ms = 0;
    std::string timestamp;
};

nlohmann::json to_json(const convergence::Verdict& verdict);
nlohmann::json to_json(const RunRecord& record);

void write_curve_csv(std::ostream& out, const convergence::SuccessCurve& curve);

/// Runs the mode check, writes the curve CSV and the record JSON under
/// `out_dir`, and returns the record.
RunRecord run(const Experiment& experiment, const std::filesystem::path& out_dir);

/// Rows "n,eps,bound" for every n in [n_lo, n_hi] and eps in the list.
void emit_bound_table(std::ostream& out, const std::vector<double>& eps, std::size_t n_lo, std::size_t n_hi);

/// A shared-branch world pair when the problem has one; otherwise, for a
/// method with real outputs, a value it never outputs up to `depth`;
/// otherwise a document saying no witness was found.
nlohmann::json emit_witness(const EmpiricalProblem& problem, const InferenceMethod* method, std::size_t depth,
                            std::size_t horizon);

/// Entry point of the convlab tool; returns the process exit code.
int main(int argc, char** argv);

} // namespace convlab::cli
