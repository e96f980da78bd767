#include "convlab/cli.hpp"

#include "convlab/errors.hpp"
#include "convlab/methods.hpp"
#include "convlab/problems.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace convlab::cli {

using nlohmann::json;

namespace {

std::size_t line_at(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

/// Builds "origin:line: message" diagnostics by locating the offending key
/// or value in the raw text.
class Diagnostics {
public:
    Diagnostics(std::string_view text, std::string origin) : text_(text), origin_(std::move(origin)) {}

    [[noreturn]] void fail(const std::string& message, std::initializer_list<std::string_view> needles = {}) const {
        std::size_t line = 1;
        for (auto needle : needles) {
            const std::string quoted = "\"" + std::string(needle) + "\"";
            if (auto pos = text_.find(quoted); pos != std::string_view::npos) {
                line = line_at(text_, pos);
                break;
            }
        }
        throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + message);
    }

    [[noreturn]] void fail_at(std::size_t offset, const std::string& message) const {
        throw ConfigError(origin_ + ":" + std::to_string(line_at(text_, offset)) + ": " + message);
    }

private:
    std::string_view text_;
    std::string origin_;
};

void only_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where,
               const Diagnostics& diag) {
    if (!obj.is_object()) diag.fail(where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            diag.fail("unknown key '" + key + "' in " + where, {key});
        }
    }
}

std::uint64_t get_count(const json& obj, const char* key, std::uint64_t fallback, const Diagnostics& diag) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_unsigned()) diag.fail(std::string(key) + " must be a non-negative integer", {key});
    return v.get<std::uint64_t>();
}

Rational get_rational(const json& v, const std::string& what, std::string_view key, const Diagnostics& diag) {
    try {
        if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
        if (v.is_number_float()) return rationalize(v.get<double>());
        if (v.is_string()) return parse_rational(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
        diag.fail(what + ": " + e.what(), {key});
    }
    diag.fail(what + " must be a number or a numeric string", {key});
}

std::vector<Rational> get_grid(const json& params, const char* key, std::vector<Rational> fallback,
                               const Diagnostics& diag) {
    if (!params.contains(key)) return fallback;
    const json& v = params.at(key);
    if (!v.is_array() || v.empty()) diag.fail(std::string(key) + " must be a non-empty array", {key});
    std::vector<Rational> grid;
    for (const auto& x : v) grid.push_back(get_rational(x, key, key, diag));
    return grid;
}

std::vector<std::size_t> parse_stages(const json& v, const Diagnostics& diag) {
    std::vector<std::size_t> stages;
    if (v.is_array()) {
        for (const auto& x : v) {
            if (!x.is_number_unsigned()) diag.fail("stages must be non-negative integers", {"stages"});
            stages.push_back(x.get<std::size_t>());
        }
    } else if (v.is_object()) {
        only_keys(v, {"from", "to", "step"}, "stages", diag);
        const auto from = get_count(v, "from", 1, diag);
        const auto to = get_count(v, "to", 0, diag);
        const auto step = get_count(v, "step", 1, diag);
        if (!v.contains("to") || step == 0 || from > to) diag.fail("stages need from <= to and step >= 1", {"stages"});
        for (auto n = from; n <= to; n += step) stages.push_back(n);
        if (stages.back() != to) stages.push_back(to);
    } else {
        diag.fail("stages must be an array or a {from, to, step} object", {"stages"});
    }
    std::sort(stages.begin(), stages.end());
    stages.erase(std::unique(stages.begin(), stages.end()), stages.end());
    return stages;
}

problems::ClassificationTask parse_task(const json& params, const Diagnostics& diag) {
    if (params.empty()) return problems::two_feature_task();
    if (params.contains("task")) {
        only_keys(params, {"task"}, "binary-classification params", diag);
        if (params.at("task") != "two-feature") diag.fail("unknown task (expected \"two-feature\")", {"task"});
        return problems::two_feature_task();
    }
    only_keys(params, {"features", "classifiers", "distributions"}, "binary-classification params", diag);
    for (const char* key : {"features", "classifiers", "distributions"}) {
        if (!params.contains(key) || !params.at(key).is_array()) diag.fail(std::string(key) + " must be an array", {key});
    }
    problems::ClassificationTask task;
    for (const auto& f : params.at("features")) {
        if (!f.is_string()) diag.fail("features must be strings", {"features"});
        task.features.push_back(f.get<std::string>());
    }
    for (const auto& c : params.at("classifiers")) {
        if (!c.is_object() || !c.contains("name") || !c.contains("labels") || !c.at("name").is_string() ||
            !c.at("labels").is_array()) {
            diag.fail("each classifier needs a name and a labels array", {"classifiers"});
        }
        Classifier classifier;
        classifier.name = c.at("name").get<std::string>();
        for (const auto& y : c.at("labels")) {
            if (!y.is_number_unsigned() || y.get<unsigned>() > 1) diag.fail("labels must be 0 or 1", {classifier.name});
            classifier.labels.push_back(static_cast<std::uint8_t>(y.get<unsigned>()));
        }
        task.classifiers.push_back(std::move(classifier));
    }
    for (const auto& d : params.at("distributions")) {
        if (!d.is_array()) diag.fail("each distribution must be an array", {"distributions"});
        problems::Distribution dist;
        for (const auto& p : d) dist.push_back(get_rational(p, "distribution mass", "distributions", diag));
        task.distributions.push_back(std::move(dist));
    }
    return task;
}

EmpiricalProblem build_problem(const std::string& name, const json& params, std::uint64_t seed,
                               const Diagnostics& diag) {
    if (!params.is_object()) diag.fail("problem params must be an object", {"params"});
    if (name == "easy-raven") {
        only_keys(params, {"max_first_zero", "literal_worlds"}, "easy-raven params", diag);
        const auto k = get_count(params, "max_first_zero", 20, diag);
        if (k == 0) diag.fail("max_first_zero must be at least 1", {"max_first_zero"});
        bool literal = false;
        if (params.contains("literal_worlds")) {
            if (!params.at("literal_worlds").is_boolean()) diag.fail("literal_worlds must be a boolean", {"literal_worlds"});
            literal = params.at("literal_worlds").get<bool>();
        }
        return problems::easy_raven(k, literal);
    }
    if (name == "fine-grained-raven") {
        only_keys(params, {"p_grid"}, "fine-grained-raven params", diag);
        const std::vector<Rational> fallback{Rational(3, 10), Rational(1, 2), Rational(9, 10), Rational(1)};
        return problems::fine_grained_raven(get_grid(params, "p_grid", fallback, diag), seed);
    }
    if (name == "fair-coin" || name == "coin-bias") {
        only_keys(params, {"theta_grid"}, name + " params", diag);
        const auto grid = get_grid(params, "theta_grid", problems::default_theta_grid(), diag);
        return name == "fair-coin" ? problems::fair_coin(grid, seed) : problems::coin_bias(grid, seed);
    }
    if (name == "binary-classification") {
        return problems::binary_classification(parse_task(params, diag), seed);
    }
    diag.fail("unknown problem '" + name +
                  "' (expected easy-raven, fine-grained-raven, fair-coin, coin-bias or binary-classification)",
              {name});
}

InferenceMethod build_method(const std::string& name, const json& params, const EmpiricalProblem& problem,
                             const Diagnostics& diag) {
    if (!params.is_object()) diag.fail("method params must be an object", {"params"});
    auto check_alphabet = [&](const InferenceMethod& m) {
        if (m.alphabet_size() != problem.alphabet.size()) {
            diag.fail("method '" + name + "' reads an alphabet of size " + std::to_string(m.alphabet_size()) +
                          " but problem '" + problem.name + "' has " + std::to_string(problem.alphabet.size()),
                      {name});
        }
        return m;
    };
    if (name == "raven-rule" || name == "fair-coin-test" || name == "frequency-estimator") {
        only_keys(params, {}, name + " params", diag);
        if (name == "raven-rule") return check_alphabet(methods::raven_rule());
        if (name == "fair-coin-test") return check_alphabet(methods::fair_coin_test());
        return check_alphabet(methods::frequency_estimator());
    }
    if (name == "erm") {
        only_keys(params, {"hypothesis_order"}, "erm params", diag);
        if (problem.hypotheses.kind() != HypothesisSpace::Kind::Classifiers) {
            diag.fail("erm needs a classification problem", {name});
        }
        const auto& pool = problem.hypotheses.classifier_members();
        methods::ErmConfig cfg;
        cfg.feature_count = problem.alphabet.size() / 2;
        if (!params.contains("hypothesis_order")) {
            cfg.hypothesis_order = pool;
        } else {
            const json& order = params.at("hypothesis_order");
            if (!order.is_array() || order.empty()) diag.fail("hypothesis_order must be a non-empty array", {"hypothesis_order"});
            std::set<std::string> seen;
            for (const auto& entry : order) {
                if (!entry.is_string()) diag.fail("hypothesis_order lists classifier names", {"hypothesis_order"});
                const auto label = entry.get<std::string>();
                const auto it = std::find_if(pool.begin(), pool.end(), [&](const Classifier& c) { return c.name == label; });
                if (it == pool.end()) diag.fail("unknown classifier '" + label + "' in hypothesis_order", {label});
                if (!seen.insert(label).second) diag.fail("classifier '" + label + "' listed twice", {label});
                cfg.hypothesis_order.push_back(*it);
            }
        }
        return methods::erm(std::move(cfg));
    }
    diag.fail("unknown method '" + name + "' (expected raven-rule, fair-coin-test, frequency-estimator or erm)",
              {name});
}

} // namespace

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw ResourceError("SHA-256 digest failed");
    }
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    for (unsigned i = 0; i < length; ++i) os << std::setw(2) << static_cast<unsigned>(digest[i]);
    return os.str();
}

ExperimentConfig parse_config(std::string_view text, const std::string& origin) {
    const Diagnostics diag(text, origin);
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        diag.fail_at(e.byte == 0 ? 0 : e.byte - 1, std::string("malformed JSON: ") + e.what());
    }

    only_keys(doc, {"experiment"}, "the top level", diag);
    if (!doc.contains("experiment")) diag.fail("missing top-level \"experiment\" object");
    const json& exp = doc.at("experiment");
    only_keys(exp, {"problem", "method", "mode", "engine", "seed", "output"}, "experiment", diag);

    ExperimentConfig cfg;
    cfg.digest = sha256_hex(text);

    auto named_block = [&](const char* key, std::string& name, json& params) {
        if (!exp.contains(key)) diag.fail(std::string("experiment needs a \"") + key + "\" block", {"experiment"});
        const json& block = exp.at(key);
        only_keys(block, {"name", "params"}, key, diag);
        if (!block.contains("name") || !block.at("name").is_string()) {
            diag.fail(std::string(key) + " needs a string \"name\"", {key});
        }
        name = block.at("name").get<std::string>();
        if (block.contains("params")) params = block.at("params");
    };
    named_block("problem", cfg.problem, cfg.problem_params);
    named_block("method", cfg.method, cfg.method_params);

    if (exp.contains("seed")) {
        if (!exp.at("seed").is_number_unsigned()) diag.fail("seed must be a non-negative 64-bit integer", {"seed"});
        cfg.seed = exp.at("seed").get<std::uint64_t>();
    }

    if (exp.contains("mode")) {
        const json& m = exp.at("mode");
        only_keys(m, {"mode", "delta", "epsilon", "horizon", "worlds", "stages"}, "mode", diag);
        if (m.contains("mode")) {
            const json& v = m.at("mode");
            try {
                if (v.is_string()) {
                    cfg.mode.mode = convergence::parse_mode(v.get<std::string>());
                } else if (v.is_number_unsigned()) {
                    cfg.mode.mode = convergence::parse_mode(std::to_string(v.get<unsigned>()));
                } else {
                    diag.fail("mode must be I, II or III", {"mode"});
                }
            } catch (const ConfigError& e) {
                diag.fail(e.what(), {"mode"});
            }
        }
        if (m.contains("delta")) cfg.mode.delta = get_rational(m.at("delta"), "delta", "delta", diag);
        if (m.contains("epsilon")) cfg.mode.epsilon = get_rational(m.at("epsilon"), "epsilon", "epsilon", diag);
        cfg.mode.horizon = get_count(m, "horizon", cfg.mode.horizon, diag);
        if (m.contains("worlds")) {
            const json& w = m.at("worlds");
            if (!w.is_array()) diag.fail("worlds must be an array of world ids", {"worlds"});
            for (const auto& id : w) {
                if (!id.is_string()) diag.fail("worlds must be an array of world ids", {"worlds"});
                cfg.mode.world_ids.push_back(id.get<std::string>());
            }
        }
        if (m.contains("stages")) cfg.mode.stages = parse_stages(m.at("stages"), diag);
    }

    if (exp.contains("engine")) {
        const json& e = exp.at("engine");
        only_keys(e, {"exact_cap", "symmetric_cap", "rational_cap", "trials", "force_monte_carlo", "force_enumeration"},
                  "engine", diag);
        cfg.engine.exact_cap = get_count(e, "exact_cap", cfg.engine.exact_cap, diag);
        cfg.engine.symmetric_cap = get_count(e, "symmetric_cap", cfg.engine.symmetric_cap, diag);
        cfg.engine.rational_cap = get_count(e, "rational_cap", cfg.engine.rational_cap, diag);
        cfg.engine.trials = get_count(e, "trials", cfg.engine.trials, diag);
        for (const char* flag : {"force_monte_carlo", "force_enumeration"}) {
            if (!e.contains(flag)) continue;
            if (!e.at(flag).is_boolean()) diag.fail(std::string(flag) + " must be a boolean", {flag});
            (std::string_view(flag) == "force_monte_carlo" ? cfg.engine.force_monte_carlo
                                                           : cfg.engine.force_enumeration) = e.at(flag).get<bool>();
        }
    }
    cfg.engine.threads = convergence::default_threads();

    if (exp.contains("output")) {
        const json& o = exp.at("output");
        only_keys(o, {"curve", "record"}, "output", diag);
        for (const char* key : {"curve", "record"}) {
            if (!o.contains(key)) continue;
            if (!o.at(key).is_string() || o.at(key).get<std::string>().empty()) {
                diag.fail(std::string("output.") + key + " must be a non-empty path", {key});
            }
            (std::string_view(key) == "curve" ? cfg.curve_path : cfg.record_path) = o.at(key).get<std::string>();
        }
    }

    // Resolve the catalog references now so that a bad name points at its line.
    const EmpiricalProblem problem = [&] {
        try {
            return build_problem(cfg.problem, cfg.problem_params, cfg.seed, diag);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            diag.fail(e.what(), {"problem"});
        }
    }();
    try {
        (void)build_method(cfg.method, cfg.method_params, problem, diag);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        diag.fail(e.what(), {"method"});
    }
    for (const auto& id : cfg.mode.world_ids) {
        const auto& members = problem.worlds.members;
        if (std::none_of(members.begin(), members.end(), [&](const World& w) { return w.id == id; })) {
            diag.fail("no world '" + id + "' in problem '" + cfg.problem + "'", {id});
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.string());
}

EmpiricalProblem make_problem(const std::string& name, const json& params, std::uint64_t seed) {
    const std::string text = params.dump();
    const Diagnostics diag(text, "problem");
    try {
        return build_problem(name, params, seed, diag);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("problem '") + name + "': " + e.what());
    }
}

// Cheap compatibility probe: every output on inputs of length <= 2 must be
// "?" or a member of H.
static void check_outputs_in_h(const InferenceMethod& method, const EmpiricalProblem& problem) {
    const std::size_t k = method.alphabet_size();
    std::vector<DataSequence> inputs{{}};
    for (std::size_t len = 1; len <= 2; ++len) {
        std::vector<DataSequence> next;
        for (const auto& s : inputs) {
            if (s.size() != len - 1) continue;
            for (std::size_t t = 0; t < k; ++t) {
                next.push_back(s);
                next.back().push_back(static_cast<Token>(t));
            }
        }
        inputs.insert(inputs.end(), next.begin(), next.end());
    }
    for (const auto& s : inputs) {
        const auto out = apply_method(method, s);
        if (!out.is_suspend() && !problem.hypotheses.contains(out.hypothesis())) {
            throw ConfigError("method '" + method.name() + "' outputs " + out.to_string() + ", which is not in H of '" +
                              problem.name + "'");
        }
    }
}

InferenceMethod make_method(const std::string& name, const json& params, const EmpiricalProblem& problem) {
    const std::string text = params.dump();
    const Diagnostics diag(text, "method");
    try {
        InferenceMethod method = build_method(name, params, problem, diag);
        check_outputs_in_h(method, problem);
        return method;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("method '") + name + "': " + e.what());
    }
}

Experiment prepare(const ExperimentConfig& config) {
    EmpiricalProblem problem = make_problem(config.problem, config.problem_params, config.seed);
    InferenceMethod method = make_method(config.method, config.method_params, problem);
    try {
        config.mode.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("mode parameters: ") + e.what());
    }
    for (const auto& id : config.mode.world_ids) {
        const auto& members = problem.worlds.members;
        if (std::none_of(members.begin(), members.end(), [&](const World& w) { return w.id == id; })) {
            throw ConfigError("no world '" + id + "' in problem '" + config.problem + "'");
        }
    }
    if (config.mode.mode != convergence::Mode::I) {
        for (const auto& w : problem.worlds.members) {
            const bool selected = config.mode.world_ids.empty() ||
                                  std::find(config.mode.world_ids.begin(), config.mode.world_ids.end(), w.id) !=
                                      config.mode.world_ids.end();
            if (selected && !w.measure) {
                throw ConfigError("mode " + convergence::to_string(config.mode.mode) + " needs a measure, but world '" +
                                  w.id + "' of '" + config.problem + "' has none");
            }
        }
    }
    if (config.engine.trials == 0) throw ConfigError("engine.trials must be at least 1");
    return Experiment{config, std::move(problem), std::move(method)};
}

} // namespace convlab::cli
