#include "convlab/convergence.hpp"

#include "convlab/errors.hpp"
#include "convlab/methods.hpp"
#include "detail.hpp"

#include <cmath>
#include <cstdlib>
#include <map>
#include <thread>

namespace convlab::convergence {

// ------------------------------------------------------------- criterion

SuccessCriterion SuccessCriterion::within(Rational eps) {
    if (eps <= 0) throw DomainError("success tolerance must be positive, got " + format_rational(eps));
    return SuccessCriterion(std::move(eps));
}

const Rational& SuccessCriterion::epsilon() const {
    if (!epsilon_) throw PreconditionError("exact criterion has no tolerance");
    return *epsilon_;
}

bool SuccessCriterion::met_by(const LossValue& loss) const { return epsilon_ ? loss.below(*epsilon_) : loss.is_zero(); }

std::string SuccessCriterion::to_string() const {
    return epsilon_ ? "within:" + format_rational(*epsilon_) : std::string("exact");
}

unsigned default_threads() {
    if (const char* env = std::getenv("CONVLAB_THREADS")) {
        char* end = nullptr;
        const long value = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && value >= 1) return static_cast<unsigned>(value);
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------- bounds

double bernoulli_bound(std::size_t n, double eps) {
    if (n == 0) throw DomainError("bernoulli_bound needs n >= 1");
    if (!(eps > 0)) throw DomainError("bernoulli_bound needs eps > 0");
    return std::max(0.0, 1.0 - 1.0 / (4.0 * static_cast<double>(n) * eps * eps));
}

Rational bernoulli_bound(std::size_t n, const Rational& eps) {
    if (n == 0) throw DomainError("bernoulli_bound needs n >= 1");
    if (eps <= 0) throw DomainError("bernoulli_bound needs eps > 0");
    Rational bound = 1 - 1 / (4 * Rational(static_cast<long long>(n)) * eps * eps);
    return bound < 0 ? Rational(0) : bound;
}

std::size_t required_sample_size(const Rational& eps, const Rational& delta) {
    if (eps <= 0) throw DomainError("required_sample_size needs eps > 0");
    if (delta <= 0 || delta >= 1) throw DomainError("required_sample_size needs 0 < delta < 1");
    const Rational q = 1 / (4 * delta * eps * eps);
    const BigInt floor = boost::multiprecision::numerator(q) / boost::multiprecision::denominator(q);
    return floor.convert_to<std::size_t>() + 1;
}

std::size_t required_sample_size(double eps, double delta) {
    if (!(eps > 0) || !(delta > 0) || !(delta < 1)) throw DomainError("required_sample_size needs eps > 0, 0 < delta < 1");
    return required_sample_size(rationalize(eps), rationalize(delta));
}

std::optional<double> analytic_bound(const EmpiricalProblem& problem, const InferenceMethod& method,
                                     const World& world, std::size_t n, const SuccessCriterion& crit) {
    if (n == 0 || !world.extras.theta) return std::nullopt;
    if (problem.name == "coin-bias" && method.name() == "frequency-estimator" && !crit.is_exact()) {
        return bernoulli_bound(n, to_double(crit.epsilon()));
    }
    if (problem.name == "fair-coin" && method.name() == "fair-coin-test") {
        const double on_truth = std::max(0.0, 1.0 - 1.0 / (4.0 * std::sqrt(static_cast<double>(n))));
        const Rational& theta = *world.extras.theta;
        if (theta == Rational(1, 2)) return on_truth;
        // Off the fair world the bound needs n^(-1/4) < |theta - 1/2| / 2, i.e. 16 < n (theta - 1/2)^4.
        const Rational gap = abs(theta - Rational(1, 2));
        if (Rational(static_cast<long long>(n)) * gap * gap * gap * gap > 16) return on_truth;
    }
    return std::nullopt;
}

// ----------------------------------------------------------- exact paths

namespace detail {

bool is_raven_rule(const InferenceMethod& method) { return method.name() == "raven-rule"; }

std::vector<MethodOutput> symmetric_outputs(const InferenceMethod& method, std::size_t n) {
    std::vector<MethodOutput> outputs;
    outputs.reserve(n + 1);
    DataSequence seq(n, 0);
    for (std::size_t k = 0; k <= n; ++k) {
        if (k > 0) seq[k - 1] = 1;
        outputs.push_back(apply_method(method, seq));
    }
    return outputs;
}

namespace {

/// Exact sum of C(n,k) a^k b^(n-k) over successful k, where theta = a / (a + b).
Rational integer_binomial_sum(const std::vector<char>& success, std::size_t n, const Rational& theta) {
    const BigInt a = boost::multiprecision::numerator(theta);
    const BigInt d = boost::multiprecision::denominator(theta);
    const BigInt b = d - a;
    if (a == 0) return success[0] ? 1 : 0;
    if (b == 0) return success[n] ? 1 : 0;

    BigInt term = boost::multiprecision::pow(b, static_cast<unsigned>(n));
    BigInt total = 0;
    for (std::size_t k = 0; k <= n; ++k) {
        if (success[k]) total += term;
        if (k < n) {
            term *= static_cast<unsigned long long>(n - k);
            term *= a;
            term /= BigInt(static_cast<unsigned long long>(k + 1)) * b;
        }
    }
    return Rational(total, boost::multiprecision::pow(d, static_cast<unsigned>(n)));
}

double floating_binomial_sum(const std::vector<char>& success, std::size_t n, double theta) {
    if (theta <= 0.0) return success[0] ? 1.0 : 0.0;
    if (theta >= 1.0) return success[n] ? 1.0 : 0.0;
    const long double log_theta = std::log(static_cast<long double>(theta));
    const long double log_rest = std::log1p(-static_cast<long double>(theta));
    const long double lg_n = std::lgamma(static_cast<long double>(n) + 1);
    // Neumaier summation.
    long double sum = 0;
    long double compensation = 0;
    for (std::size_t k = 0; k <= n; ++k) {
        if (!success[k]) continue;
        const auto kk = static_cast<long double>(k);
        const auto rest = static_cast<long double>(n - k);
        const long double term =
            std::exp(lg_n - std::lgamma(kk + 1) - std::lgamma(rest + 1) + kk * log_theta + rest * log_rest);
        const long double t = sum + term;
        if (std::fabs(sum) >= std::fabs(term)) {
            compensation += (sum - t) + term;
        } else {
            compensation += (term - t) + sum;
        }
        sum = t;
    }
    return static_cast<double>(std::min<long double>(1, sum + compensation));
}

SuccessEstimate exact_estimate(Rational value) {
    SuccessEstimate e;
    e.estimate = to_double(value);
    e.exact = true;
    e.exact_value = std::move(value);
    return e;
}

/// |support|^n, or UINT64_MAX once it exceeds `cap`.
std::uint64_t leaf_count(std::size_t support, std::size_t n, std::uint64_t cap) {
    std::uint64_t leaves = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (support != 0 && leaves > cap / support) return UINT64_MAX;
        leaves *= support;
    }
    return leaves;
}

std::vector<Token> support_of(const Measure& measure) {
    std::vector<Token> support;
    if (measure.is_iid()) {
        const auto& probs = measure.token_probs();
        for (std::size_t t = 0; t < probs.size(); ++t) {
            if (probs[t] > 0) support.push_back(static_cast<Token>(t));
        }
    } else {
        for (std::size_t t = 0; t < measure.alphabet_size(); ++t) support.push_back(static_cast<Token>(t));
    }
    return support;
}

/// Enumerates every length-n sequence over the IID measure's support and
/// groups the successful ones by token composition; each composition is then
/// weighted by prod p_t^(c_t) once.
Rational enumerate_iid(const EmpiricalProblem& problem, const InferenceMethod& method, const World& world,
                       std::size_t n, const SuccessCriterion& crit) {
    const Measure& measure = *world.measure;
    const std::vector<Token> support = support_of(measure);
    const std::size_t m = support.size();

    std::map<std::vector<std::uint32_t>, std::uint64_t> compositions;
    std::vector<std::size_t> digits(n, 0);
    DataSequence seq(n, support[0]);
    std::vector<std::uint32_t> counts(m, 0);
    while (true) {
        if (crit.met_by(loss_of(problem, apply_method(method, seq), world))) {
            std::fill(counts.begin(), counts.end(), 0);
            for (std::size_t d : digits) ++counts[d];
            ++compositions[counts];
        }
        std::size_t pos = 0;
        while (pos < n && digits[pos] + 1 == m) {
            digits[pos] = 0;
            seq[pos] = support[0];
            ++pos;
        }
        if (pos == n) break;
        ++digits[pos];
        seq[pos] = support[digits[pos]];
    }

    const auto& probs = measure.token_probs();
    Rational total = 0;
    for (const auto& [composition, count] : compositions) {
        Rational weight = static_cast<unsigned long long>(count);
        for (std::size_t i = 0; i < m; ++i) {
            weight *= convlab::pow(probs[support[i]], composition[i]);
        }
        total += weight;
    }
    return total;
}

/// Depth-first enumeration for tree measures without IID structure; prunes
/// zero-probability nodes.
Rational enumerate_tree(const EmpiricalProblem& problem, const InferenceMethod& method, const World& world,
                        std::size_t n, const SuccessCriterion& crit) {
    const Measure& measure = *world.measure;
    const std::vector<Token> support = support_of(measure);
    DataSequence prefix;
    Rational total = 0;

    auto visit = [&](auto&& self) -> void {
        const Rational mass = measure.prefix_prob(prefix);
        if (mass == 0) return;
        if (prefix.size() == n) {
            if (crit.met_by(loss_of(problem, apply_method(method, prefix), world))) total += mass;
            return;
        }
        for (Token t : support) {
            prefix.push_back(t);
            self(self);
            prefix.pop_back();
        }
    };
    visit(visit);
    return total;
}

} // namespace

SuccessEstimate binomial_success(const EmpiricalProblem& problem, const World& world, std::size_t n,
                                 const SuccessCriterion& crit, const std::vector<MethodOutput>& outputs,
                                 const EngineOptions& options) {
    std::vector<char> success(n + 1);
    for (std::size_t k = 0; k <= n; ++k) success[k] = crit.met_by(loss_of(problem, outputs[k], world)) ? 1 : 0;

    const Rational& theta = world.measure->theta();
    if (n <= options.rational_cap) return exact_estimate(integer_binomial_sum(success, n, theta));

    SuccessEstimate e;
    e.estimate = floating_binomial_sum(success, n, to_double(theta));
    e.exact = true;
    return e;
}

ExactPath choose_exact_path(const InferenceMethod& method, const World& world, std::size_t n,
                            const EngineOptions& options) {
    if (!world.measure) return ExactPath::None;
    const Measure& measure = *world.measure;
    if (measure.kind() == MeasureKind::PointMass) return ExactPath::PointMass;
    if (options.force_monte_carlo) return ExactPath::None;
    if (!options.force_enumeration && method.count_symmetric() && measure.kind() == MeasureKind::IidBernoulli &&
        n <= options.symmetric_cap) {
        return ExactPath::Binomial;
    }
    if (leaf_count(support_of(measure).size(), n, options.exact_cap) <= options.exact_cap) {
        return ExactPath::Enumeration;
    }
    return ExactPath::None;
}

} // namespace detail

SuccessEstimate exact_success_prob(const EmpiricalProblem& problem, const InferenceMethod& method,
                                   const World& world, std::size_t n, const SuccessCriterion& crit,
                                   const EngineOptions& options) {
    if (!world.measure) throw PreconditionError("world '" + world.id + "' carries no probability measure");

    EngineOptions exact_options = options;
    exact_options.force_monte_carlo = false;
    switch (detail::choose_exact_path(method, world, n, exact_options)) {
    case detail::ExactPath::PointMass: {
        const DataSequence prefix = world.measure->mass_point().prefix(n);
        const bool ok = crit.met_by(loss_of(problem, apply_method(method, prefix), world));
        return detail::exact_estimate(ok ? 1 : 0);
    }
    case detail::ExactPath::Binomial:
        return detail::binomial_success(problem, world, n, crit, detail::symmetric_outputs(method, n), options);
    case detail::ExactPath::Enumeration:
        return detail::exact_estimate(world.measure->is_iid() ? detail::enumerate_iid(problem, method, world, n, crit)
                                                               : detail::enumerate_tree(problem, method, world, n, crit));
    case detail::ExactPath::None:
        break;
    }
    throw ResourceError("exact success probability for '" + method.name() + "' in world '" + world.id +
                        "' at n = " + std::to_string(n) + " exceeds the budget; use mc_success_prob");
}

} // namespace convlab::convergence
