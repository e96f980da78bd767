#include "convlab/cli.hpp"

#include "convlab/errors.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

namespace convlab::cli {

using nlohmann::json;

const char* const kVersion = CONVLAB_VERSION;
const char* const kCurveHeader = "problem,method,world_id,n,criterion,estimate,stderr,exact,bound";

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ResourceError("cannot write " + path.string());
    out << bytes;
    if (!out) throw ResourceError("write failed: " + path.string());
}

json world_json(const World& w) {
    json j{{"id", w.id}, {"branch", w.branch.id()}, {"truth", w.truth.to_string()}};
    if (w.extras.theta) j["theta"] = format_rational(*w.extras.theta);
    return j;
}

} // namespace

json to_json(const convergence::Verdict& verdict) {
    json worlds = json::array();
    for (const auto& w : verdict.worlds) {
        json entry{{"world_id", w.world_id}, {"N", nullptr}, {"note", w.note}};
        if (w.threshold) entry["N"] = *w.threshold;
        worlds.push_back(std::move(entry));
    }
    json j{{"mode", convergence::to_string(verdict.mode)},
           {"status", convergence::to_string(verdict.status)},
           {"horizon", verdict.horizon},
           {"worlds", std::move(worlds)},
           {"witness", nullptr},
           {"notes", verdict.notes}};
    if (verdict.witness) {
        j["witness"] = json{{"world_ids", verdict.witness->world_ids},
                            {"failing_stages", verdict.witness->failing_stages},
                            {"description", verdict.witness->description}};
    }
    return j;
}

json to_json(const RunRecord& record) {
    json verdicts = json::array();
    for (const auto& v : record.verdicts) verdicts.push_back(to_json(v));
    json curves = json::array();
    for (const auto& c : record.curves) {
        curves.push_back(json{{"path", c.path}, {"criterion", c.criterion}, {"rows", c.rows}});
    }
    json experiment{{"problem", record.problem}, {"method", record.method}};
    if (!record.hypothesis_order.empty()) experiment["hypothesis_order"] = record.hypothesis_order;
    return json{{"config_digest", record.config_digest},
                {"seed", record.seed},
                {"version", record.version},
                {"experiment", std::move(experiment)},
                {"verdicts", std::move(verdicts)},
                {"curves", std::move(curves)},
                {"duration_ms", record.duration_ms},
                {"timestamp", record.timestamp}};
}

void write_curve_csv(std::ostream& out, const convergence::SuccessCurve& curve) {
    out << kCurveHeader << '\n';
    for (const auto& p : curve.points) {
        out << csv_field(curve.problem) << ',' << csv_field(curve.method) << ',' << csv_field(p.world_id) << ','
            << p.n << ',' << csv_field(curve.criterion) << ',' << format_double(p.value.estimate) << ','
            << format_double(p.value.standard_error) << ',' << (p.value.exact ? "true" : "false") << ',';
        if (p.bound) out << format_double(*p.bound);
        out << '\n';
    }
}

RunRecord run(const Experiment& experiment, const std::filesystem::path& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    const ExperimentConfig& cfg = experiment.config;
    const auto check = convergence::check_mode_with_curve(experiment.problem, experiment.method, cfg.mode, cfg.engine);

    std::ostringstream csv;
    write_curve_csv(csv, check.curve);
    const std::filesystem::path curve_path = out_dir / cfg.curve_path;
    write_file(curve_path, csv.str());

    RunRecord record;
    record.config_digest = cfg.digest;
    record.seed = cfg.seed;
    record.version = kVersion;
    record.problem = cfg.problem;
    record.method = cfg.method;
    if (experiment.problem.hypotheses.kind() == HypothesisSpace::Kind::Classifiers) {
        const auto& order = cfg.method_params.contains("hypothesis_order")
                                ? cfg.method_params.at("hypothesis_order").get<std::vector<std::string>>()
                                : std::vector<std::string>{};
        if (!order.empty()) {
            record.hypothesis_order = order;
        } else {
            for (const auto& c : experiment.problem.hypotheses.classifier_members()) record.hypothesis_order.push_back(c.name);
        }
    }
    record.verdicts.push_back(check.verdict);
    record.curves.push_back(CurveRef{curve_path.string(), check.curve.criterion, check.curve.points.size()});
    record.duration_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    record.timestamp = utc_timestamp();

    write_file(out_dir / cfg.record_path, to_json(record).dump(2) + "\n");
    return record;
}

void emit_bound_table(std::ostream& out, const std::vector<double>& eps, std::size_t n_lo, std::size_t n_hi) {
    if (n_lo == 0 || n_lo > n_hi) throw ConfigError("bound table needs 1 <= n_min <= n_max");
    for (double e : eps) {
        if (!(e > 0)) throw ConfigError("bound table needs positive eps values");
    }
    out << "n,eps,bound\n";
    for (std::size_t n = n_lo; n <= n_hi; ++n) {
        for (double e : eps) {
            out << n << ',' << format_double(e) << ',' << format_double(convergence::bernoulli_bound(n, e)) << '\n';
        }
    }
}

json emit_witness(const EmpiricalProblem& problem, const InferenceMethod* method, std::size_t depth,
                  std::size_t horizon) {
    json doc{{"problem", problem.name}, {"method", method ? json(method->name()) : json(nullptr)}};

    // A real-valued method over an interval of hypotheses: exhibit a value it
    // never outputs.
    if (method && problem.hypotheses.kind() == HypothesisSpace::Kind::RealInterval) {
        const auto w = convergence::cardinality_witness(*method, depth);
        doc["kind"] = "cardinality";
        doc["depth"] = depth;
        doc["value"] = format_rational(w.value);
        doc["gap"] = json::array({format_rational(w.gap_lo), format_rational(w.gap_hi)});
        doc["distinct_outputs"] = w.distinct_outputs;
        doc["inputs"] = w.inputs;
        doc["description"] = "'" + method->name() + "' never outputs " + format_rational(w.value) + " on the " +
                             std::to_string(w.inputs) + " binary inputs of length at most " + std::to_string(depth);
        return doc;
    }

    if (const auto pair = convergence::underdetermination_witness(problem, horizon)) {
        const auto& [a, b] = *pair;
        doc["kind"] = "underdetermination";
        doc["horizon"] = horizon;
        doc["worlds"] = json::array({world_json(a), world_json(b)});
        doc["shared_prefix"] = a.branch.id();
        doc["prefix_equal_through"] = horizon;
        doc["description"] = "worlds '" + a.id + "' and '" + b.id + "' share branch " + a.branch.id() +
                             " but have truths " + a.truth.to_string() + " and " + b.truth.to_string();
        if (method) doc["refutes_method"] = convergence::witness_refutes(problem, *method, *pair, horizon);
        return doc;
    }

    doc["kind"] = "none";
    doc["description"] = "no two worlds of '" + problem.name +
                         "' share a branch with different truths, so there is no underdetermination witness";
    return doc;
}

} // namespace convlab::cli
