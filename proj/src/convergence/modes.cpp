#include "convlab/convergence.hpp"

#include "convlab/errors.hpp"

#include <cmath>
#include <sstream>

namespace convlab::convergence {

std::string to_string(Mode mode) {
    switch (mode) {
    case Mode::I: return "I";
    case Mode::II: return "II";
    case Mode::III: return "III";
    }
    return "?";
}

Mode parse_mode(std::string_view text) {
    if (text == "I" || text == "i" || text == "1") return Mode::I;
    if (text == "II" || text == "ii" || text == "2") return Mode::II;
    if (text == "III" || text == "iii" || text == "3") return Mode::III;
    throw ConfigError("unknown mode '" + std::string(text) + "' (expected I, II or III)");
}

std::string to_string(VerdictStatus status) {
    switch (status) {
    case VerdictStatus::SupportedAtHorizon: return "SUPPORTED_AT_HORIZON";
    case VerdictStatus::RefutedAtHorizon: return "REFUTED_AT_HORIZON";
    case VerdictStatus::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

void ModeParams::validate() const {
    if (horizon == 0) throw DomainError("horizon T must be at least 1");
    if (mode != Mode::I && (delta <= 0 || delta >= 1)) throw DomainError("delta must lie in (0,1)");
    if (mode == Mode::III && epsilon <= 0) throw DomainError("epsilon must be positive");
    for (auto n : stages) {
        if (n == 0 || n > horizon) throw DomainError("stages must lie in 1..T");
    }
}

const WorldVerdict& Verdict::world(std::string_view id) const {
    for (const auto& w : worlds) {
        if (w.world_id == id) return w;
    }
    throw DomainError("verdict has no world '" + std::string(id) + "'");
}

namespace {

/// "0, 16-64" style rendering of a sorted stage list.
std::string describe_stages(const std::vector<std::size_t>& stages) {
    std::ostringstream os;
    for (std::size_t i = 0; i < stages.size();) {
        std::size_t j = i;
        while (j + 1 < stages.size() && stages[j + 1] == stages[j] + 1) ++j;
        if (i) os << ", ";
        os << stages[i];
        if (j > i) os << "-" << stages[j];
        i = j + 1;
    }
    return os.str();
}

std::vector<World> selected_worlds(const EmpiricalProblem& problem, const ModeParams& params) {
    if (params.world_ids.empty()) return problem.worlds.members;
    std::vector<World> worlds;
    for (const auto& id : params.world_ids) worlds.push_back(problem.world(id));
    return worlds;
}

ModeCheck check_identification(const EmpiricalProblem& problem, const InferenceMethod& method,
                               const ModeParams& params, const std::vector<World>& worlds) {
    const std::size_t horizon = params.horizon;
    ModeCheck result;
    result.verdict.mode = Mode::I;
    result.verdict.horizon = horizon;
    result.curve = SuccessCurve{problem.name, method.name(), SuccessCriterion::exact().to_string(), {}};

    std::vector<std::vector<std::size_t>> failing(worlds.size());
    for (std::size_t wi = 0; wi < worlds.size(); ++wi) {
        const World& world = worlds[wi];
        const DataSequence prefix = world.branch.prefix(horizon);
        std::vector<char> zero(horizon + 1);
        for (std::size_t n = 0; n <= horizon; ++n) {
            const MethodOutput out = apply_method(method, std::span<const Token>(prefix).first(n));
            zero[n] = loss_of(problem, out, world).is_zero() ? 1 : 0;
            if (!zero[n]) failing[wi].push_back(n);

            CurvePoint point;
            point.world_id = world.id;
            point.n = n;
            point.value.estimate = zero[n] ? 1.0 : 0.0;
            point.value.exact = true;
            point.value.exact_value = Rational(zero[n] ? 1 : 0);
            result.curve.points.push_back(std::move(point));
        }

        WorldVerdict wv;
        wv.world_id = world.id;
        if (zero[horizon]) {
            std::size_t lock = horizon;
            while (lock > 0 && zero[lock - 1]) --lock;
            wv.threshold = lock;
            wv.note = "outputs the truth at every stage from " + std::to_string(lock) + " through " +
                      std::to_string(horizon);
        } else {
            wv.note = "misses the truth at stages " + describe_stages(failing[wi]);
        }
        result.verdict.worlds.push_back(std::move(wv));
    }

    const bool all_locked = std::all_of(result.verdict.worlds.begin(), result.verdict.worlds.end(),
                                        [](const WorldVerdict& w) { return w.threshold.has_value(); });
    if (all_locked) {
        result.verdict.status = VerdictStatus::SupportedAtHorizon;
        return result;
    }

    // An unlocked world whose branch also carries a different truth refutes
    // mode I for every method: outputs coincide on the shared branch.
    for (std::size_t i = 0; i < worlds.size(); ++i) {
        if (result.verdict.worlds[i].threshold) continue;
        for (std::size_t j = 0; j < worlds.size(); ++j) {
            if (i == j || worlds[i].branch.id() != worlds[j].branch.id()) continue;
            if (problem.loss(worlds[i].truth, worlds[j]) == 0) continue;
            if (worlds[i].branch.prefix(horizon) != worlds[j].branch.prefix(horizon)) continue;

            RefutationWitness witness;
            witness.world_ids = {worlds[i].id, worlds[j].id};
            witness.failing_stages = failing[i];
            witness.description = "worlds '" + worlds[i].id + "' and '" + worlds[j].id + "' share branch " +
                                  worlds[i].branch.id() + " with truths " + worlds[i].truth.to_string() + " and " +
                                  worlds[j].truth.to_string() + "; the method misses the truth of '" +
                                  worlds[i].id + "' at stages " + describe_stages(failing[i]);
            result.verdict.status = VerdictStatus::RefutedAtHorizon;
            result.verdict.witness = std::move(witness);
            return result;
        }
    }

    result.verdict.status = VerdictStatus::Inconclusive;
    result.verdict.notes.emplace_back("some worlds are not locked by T = " + std::to_string(horizon) +
                                      " and no shared-branch witness explains it");
    return result;
}

/// A stage counts as a success when it exceeds 1 - delta; Monte Carlo
/// stages must clear the threshold by three standard errors.
bool claimed(const SuccessEstimate& e, const Rational& target) {
    if (e.exact) return e.exact_value ? *e.exact_value > target : e.estimate > to_double(target);
    return e.estimate - 3.0 * e.standard_error > to_double(target);
}

/// Fails the raw threshold by more than the Monte Carlo margin.
bool clearly_failed(const SuccessEstimate& e, const Rational& target) {
    if (e.exact) return e.exact_value ? !(*e.exact_value > target) : !(e.estimate > to_double(target));
    return e.estimate + 3.0 * e.standard_error <= to_double(target);
}

void add_certificates(const EmpiricalProblem& problem, const InferenceMethod& method, const ModeParams& params,
                      const std::vector<World>& worlds, Verdict& verdict) {
    if (params.mode == Mode::III && problem.name == "coin-bias" && method.name() == "frequency-estimator") {
        const std::size_t n = required_sample_size(params.epsilon, params.delta);
        verdict.notes.push_back("Bernoulli bound certifies success probability > 1 - delta for every n >= " +
                                std::to_string(n) + " in every world");
    }
    if (params.mode == Mode::II && problem.name == "fair-coin" && method.name() == "fair-coin-test") {
        // 1 - 1/(4 sqrt n) > 1 - delta  <=>  n > 1/(16 delta^2); off the fair
        // world the bound also needs n > 16 / (theta - 1/2)^4.
        for (const auto& w : worlds) {
            if (!w.extras.theta) continue;
            Rational need = 1 / (16 * params.delta * params.delta);
            const Rational gap = abs(*w.extras.theta - Rational(1, 2));
            if (gap != 0) need = std::max(need, Rational(16) / (gap * gap * gap * gap));
            const BigInt floor = boost::multiprecision::numerator(need) / boost::multiprecision::denominator(need);
            verdict.notes.push_back("world '" + w.id + "': Bernoulli bound certifies every n >= " +
                                    BigInt(floor + 1).str());
        }
    }
}

ModeCheck check_stochastic(const EmpiricalProblem& problem, const InferenceMethod& method, const ModeParams& params,
                           const std::vector<World>& worlds, const EngineOptions& options) {
    for (const auto& w : worlds) {
        if (!w.measure) {
            throw PreconditionError("mode " + to_string(params.mode) + " needs a probability measure in world '" +
                                    w.id + "'");
        }
    }
    const SuccessCriterion crit =
        params.mode == Mode::II ? SuccessCriterion::exact() : SuccessCriterion::within(params.epsilon);
    const Rational target = 1 - params.delta;

    ModeCheck result;
    result.verdict.mode = params.mode;
    result.verdict.horizon = params.horizon;
    result.curve = success_curve(problem, method, worlds, crit, params.horizon, options, params.stages);

    const std::size_t per_world = result.curve.points.size() / std::max<std::size_t>(1, worlds.size());
    std::optional<std::size_t> refuted;
    for (std::size_t wi = 0; wi < worlds.size(); ++wi) {
        const auto first = result.curve.points.begin() + static_cast<std::ptrdiff_t>(wi * per_world);
        const std::span<const CurvePoint> row(&*first, per_world);

        WorldVerdict wv;
        wv.world_id = worlds[wi].id;
        std::size_t start = row.size();
        while (start > 0 && claimed(row[start - 1].value, target)) --start;
        if (start < row.size()) {
            wv.threshold = row[start].n;
            wv.note = "success probability above 1 - delta from stage " + std::to_string(row[start].n);
        } else {
            const auto& last = row.back().value;
            wv.note = "stage " + std::to_string(row.back().n) + " estimate " + format_double(last.estimate);
            if (!last.exact) wv.note += " (stderr " + format_double(last.standard_error) + ")";
            if (clearly_failed(last, target)) {
                wv.note += " fails 1 - delta";
                if (!refuted) refuted = wi;
            } else {
                wv.note += " within the Monte Carlo margin of 1 - delta";
            }
        }
        result.verdict.worlds.push_back(std::move(wv));
    }

    const bool all_supported = std::all_of(result.verdict.worlds.begin(), result.verdict.worlds.end(),
                                           [](const WorldVerdict& w) { return w.threshold.has_value(); });
    if (all_supported) {
        result.verdict.status = VerdictStatus::SupportedAtHorizon;
    } else if (refuted) {
        result.verdict.status = VerdictStatus::RefutedAtHorizon;
        RefutationWitness witness;
        witness.world_ids = {worlds[*refuted].id};
        for (std::size_t k = 0; k < per_world; ++k) {
            const auto& p = result.curve.points[*refuted * per_world + k];
            if (clearly_failed(p.value, target)) witness.failing_stages.push_back(p.n);
        }
        witness.description = "success probability in '" + worlds[*refuted].id +
                              "' stays at or below 1 - delta at stages " + describe_stages(witness.failing_stages);
        result.verdict.witness = std::move(witness);
    } else {
        result.verdict.status = VerdictStatus::Inconclusive;
    }
    add_certificates(problem, method, params, worlds, result.verdict);
    return result;
}

} // namespace

ModeCheck check_mode_with_curve(const EmpiricalProblem& problem, const InferenceMethod& method,
                                const ModeParams& params, const EngineOptions& options) {
    params.validate();
    const std::vector<World> worlds = selected_worlds(problem, params);
    if (worlds.empty()) throw ConfigError("mode check over an empty world family");
    if (params.mode == Mode::I) return check_identification(problem, method, params, worlds);
    return check_stochastic(problem, method, params, worlds, options);
}

Verdict check_mode(const EmpiricalProblem& problem, const InferenceMethod& method, const ModeParams& params,
                   const EngineOptions& options) {
    return check_mode_with_curve(problem, method, params, options).verdict;
}

} // namespace convlab::convergence
