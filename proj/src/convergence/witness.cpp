#include "convlab/convergence.hpp"

#include "convlab/errors.hpp"
#include "convlab/problems.hpp"
#include "convlab/rng.hpp"
#include "detail.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace convlab::convergence {

namespace {

constexpr std::uint64_t kSuccessSetSalt = 0xbb67ae8584caa73bULL;

bool is_yes_no(const Hypothesis& h) {
    return h.is_label() && (h.label_name() == problems::kYes || h.label_name() == problems::kNo);
}

/// Zero-loss indicator at each stage 0..horizon along `prefix`.
std::vector<std::uint8_t> zero_loss_flags(const EmpiricalProblem& problem, const InferenceMethod& method,
                                          const World& world, std::span<const Token> prefix) {
    std::vector<std::uint8_t> flags(prefix.size() + 1);
    for (std::size_t m = 0; m <= prefix.size(); ++m) {
        flags[m] = loss_of(problem, apply_method(method, prefix.first(m)), world).is_zero() ? 1 : 0;
    }
    return flags;
}

/// Horizon-relative lock computed from the first 0 on the prefix; agrees
/// with the generic scan for the raven rule under 0/1 loss.
std::optional<std::size_t> raven_lock_on_prefix(const World& world, std::span<const Token> prefix) {
    const auto zero = std::find(prefix.begin(), prefix.end(), Token{0});
    const bool found = zero != prefix.end();
    if (world.truth.label_name() == problems::kNo) {
        if (!found) return std::nullopt;
        return static_cast<std::size_t>(zero - prefix.begin()) + 1;
    }
    return found ? std::nullopt : std::optional<std::size_t>(0);
}

void require_branch_uniqueness(const EmpiricalProblem& problem) {
    const auto& worlds = problem.worlds.members;
    for (std::size_t i = 0; i < worlds.size(); ++i) {
        for (std::size_t j = i + 1; j < worlds.size(); ++j) {
            if (worlds[i].branch.id() == worlds[j].branch.id() && !(worlds[i].truth == worlds[j].truth)) {
                throw PreconditionError("success sets need one world per branch; '" + worlds[i].id + "' and '" +
                                        worlds[j].id + "' share a branch");
            }
        }
    }
}

void require_success_set_measure(const World& world) {
    if (!world.measure) throw PreconditionError("world '" + world.id + "' carries no probability measure");
    if (!world.measure->countably_additive()) {
        throw PreconditionError("world '" + world.id + "' has a measure that is not countably additive");
    }
}

} // namespace

// ------------------------------------------------------------- lock times

std::optional<std::size_t> lock_time(const EmpiricalProblem& problem, const InferenceMethod& method,
                                     const World& world, std::size_t horizon) {
    if (horizon == 0) throw DomainError("lock_time needs a horizon T >= 1");
    const DataSequence prefix = world.branch.prefix(horizon);
    if (detail::is_raven_rule(method) && is_yes_no(world.truth)) {
        for (Token t : prefix) {
            if (t > 1) throw DomainError("raven-rule: non-binary token " + std::to_string(t));
        }
        return raven_lock_on_prefix(world, prefix);
    }

    const auto flags = zero_loss_flags(problem, method, world, prefix);
    if (!flags[horizon]) return std::nullopt;
    std::size_t lock = horizon;
    while (lock > 0 && flags[lock - 1]) --lock;
    return lock;
}

std::optional<std::size_t> raven_lock_time(const World& world, std::size_t scan_limit) {
    if (!is_yes_no(world.truth)) throw TypeError("raven lock time needs a Yes/No truth");
    if (world.truth.label_name() == problems::kYes) {
        const bool all_ones = world.branch.id() == Branch::constant(1).id() ||
                              (world.measure && world.measure->kind() == MeasureKind::PointMass &&
                               world.measure->mass_point().id() == Branch::constant(1).id());
        return all_ones ? std::optional<std::size_t>(0) : std::nullopt;
    }
    for (std::size_t i = 1; i <= scan_limit; ++i) {
        if (world.branch.at(i) == 0) return i;
    }
    return std::nullopt;
}

// ---------------------------------------------------------- success sets

SuccessSetSample SuccessSetSample::draw(const EmpiricalProblem& problem, const InferenceMethod& method,
                                        const World& world, std::size_t horizon, const EngineOptions& options) {
    require_success_set_measure(world);
    if (horizon == 0) throw DomainError("success sets need a horizon T >= 1");
    if (options.trials == 0) throw DomainError("success sets need at least one trial");

    SuccessSetSample sample;
    sample.trials_ = options.trials;
    sample.horizon_ = horizon;
    sample.members_.assign(options.trials * (horizon + 1), 0);

    const Measure& measure = *world.measure;
    detail::parallel_count(options.trials, options.threads, [&](std::uint64_t trial) {
        const std::uint64_t key = rng::substream(options.seed ^ kSuccessSetSalt, world.id, 0, trial);
        const Branch branch = measure.sample(key, world.id + "#" + std::to_string(trial));
        const World sampled = world.rebranched(branch, branch.id());
        const DataSequence prefix = branch.prefix(horizon);
        std::uint8_t* row = &sample.members_[trial * (horizon + 1)];
        // Member of Success(n) iff zero loss at every stage in [n, horizon].
        const auto flags = zero_loss_flags(problem, method, sampled, prefix);
        bool suffix = true;
        for (std::size_t n = horizon + 1; n-- > 0;) {
            suffix = suffix && flags[n];
            row[n] = suffix ? 1 : 0;
        }
        return false;
    });
    return sample;
}

bool SuccessSetSample::contains(std::uint64_t trial, std::size_t n) const {
    if (trial >= trials_ || n > horizon_) throw DomainError("success set index out of range");
    return members_[trial * (horizon_ + 1) + n] != 0;
}

SuccessEstimate SuccessSetSample::probability(std::size_t n) const {
    if (n > horizon_) throw DomainError("stage beyond the sampled horizon");
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < trials_; ++t) hits += members_[t * (horizon_ + 1) + n];
    SuccessEstimate e;
    e.trials = trials_;
    e.estimate = static_cast<double>(hits) / static_cast<double>(trials_);
    e.standard_error = std::sqrt(e.estimate * (1.0 - e.estimate) / static_cast<double>(trials_));
    e.degenerate = e.standard_error == 0.0;
    return e;
}

bool SuccessSetSample::included(std::size_t n, std::size_t n_prime) const {
    if (n > n_prime || n_prime > horizon_) throw DomainError("inclusion check needs n <= n' <= T");
    for (std::uint64_t t = 0; t < trials_; ++t) {
        const std::uint8_t* row = &members_[t * (horizon_ + 1)];
        if (row[n] && !row[n_prime]) return false;
    }
    return true;
}

SuccessEstimate success_set_prob(const EmpiricalProblem& problem, const InferenceMethod& method,
                                 const World& world, std::size_t n, std::size_t horizon,
                                 const EngineOptions& options) {
    require_success_set_measure(world);
    require_branch_uniqueness(problem);
    if (n > horizon) throw DomainError("success_set_prob needs n <= T");

    if (!options.force_monte_carlo && detail::is_raven_rule(method) && is_yes_no(world.truth)) {
        const Measure& measure = *world.measure;
        SuccessEstimate e;
        e.exact = true;
        if (measure.kind() == MeasureKind::PointMass) {
            const World on_mass = world.rebranched(measure.mass_point(), measure.mass_point().id());
            const auto lock = raven_lock_time(on_mass, n);
            e.exact_value = Rational(lock && *lock <= n ? 1 : 0);
        } else if (measure.kind() == MeasureKind::IidBernoulli && measure.theta() < 1 &&
                   world.truth.label_name() == problems::kNo) {
            // Locked by n iff a 0 occurred among the first n tosses.
            e.exact_value = 1 - convlab::pow(measure.theta(), static_cast<unsigned>(n));
        }
        if (e.exact_value) {
            e.estimate = to_double(*e.exact_value);
            return e;
        }
    }
    return SuccessSetSample::draw(problem, method, world, horizon, options).probability(n);
}

bool success_set_monotone(const EmpiricalProblem& problem, const InferenceMethod& method, const World& world,
                          std::size_t n, std::size_t n_prime, std::size_t horizon, const EngineOptions& options) {
    if (n > n_prime || n_prime > horizon) throw DomainError("success_set_monotone needs n <= n' <= T");
    require_branch_uniqueness(problem);
    return SuccessSetSample::draw(problem, method, world, horizon, options).included(n, n_prime);
}

// ------------------------------------------------------------- witnesses

std::optional<std::pair<World, World>> underdetermination_witness(const EmpiricalProblem& problem,
                                                                  std::size_t horizon) {
    const auto& worlds = problem.worlds.members;
    for (std::size_t i = 0; i < worlds.size(); ++i) {
        for (std::size_t j = i + 1; j < worlds.size(); ++j) {
            const World& a = worlds[i];
            const World& b = worlds[j];
            if (a.branch.id() != b.branch.id()) continue;
            if (problem.loss(a.truth, b) == 0) continue;
            if (a.branch.prefix(horizon) != b.branch.prefix(horizon)) continue;
            return std::make_pair(a, b);
        }
    }
    return std::nullopt;
}

bool witness_refutes(const EmpiricalProblem& problem, const InferenceMethod& method,
                     const std::pair<World, World>& pair, std::size_t horizon) {
    const auto& [a, b] = pair;
    const DataSequence prefix_a = a.branch.prefix(horizon);
    if (prefix_a != b.branch.prefix(horizon)) return false;
    for (std::size_t n = 0; n <= horizon; ++n) {
        const MethodOutput out = apply_method(method, std::span<const Token>(prefix_a).first(n));
        if (loss_of(problem, out, a).is_zero() && loss_of(problem, out, b).is_zero()) return false;
    }
    return true;
}

CardinalityWitness cardinality_witness(const InferenceMethod& method, std::size_t depth) {
    if (method.alphabet_size() != 2) throw TypeError("cardinality witness enumerates binary inputs");
    if (depth > 24) throw ResourceError("cardinality witness depth " + std::to_string(depth) + " exceeds 24");

    std::set<Rational> outputs;
    std::uint64_t inputs = 0;
    DataSequence seq;
    for (std::size_t len = 0; len <= depth; ++len) {
        seq.assign(len, 0);
        for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << len); ++bits) {
            for (std::size_t i = 0; i < len; ++i) seq[i] = static_cast<Token>((bits >> i) & 1U);
            ++inputs;
            const MethodOutput out = apply_method(method, seq);
            if (out.is_suspend()) continue;
            if (!out.hypothesis().is_real()) {
                throw TypeError("method '" + method.name() + "' outputs non-real hypothesis " + out.to_string());
            }
            const Rational& value = out.hypothesis().real_value();
            if (value < 0 || value > 1) throw DomainError("cardinality witness needs outputs in [0,1]");
            outputs.insert(value);
        }
    }

    std::set<Rational> points = outputs;
    points.insert(0);
    points.insert(1);

    CardinalityWitness w;
    w.distinct_outputs = outputs.size();
    w.inputs = inputs;
    Rational widest = -1;
    for (auto it = points.begin(); std::next(it) != points.end(); ++it) {
        const Rational width = *std::next(it) - *it;
        if (width > widest) {
            widest = width;
            w.gap_lo = *it;
            w.gap_hi = *std::next(it);
        }
    }
    w.value = (w.gap_lo + w.gap_hi) / 2;
    return w;
}

} // namespace convlab::convergence
