#pragma once

// Success probabilities, finite-horizon mode checks and the witnesses used
// to argue that a mode is unachievable.
//
// Every probability here is P_w[Loss(M(e_1..e_n), w) meets the criterion]
// for a fixed world w. Exact values come from enumerating the evidence tree
// to depth n (or from a binomial sum when the method only looks at the count
// of 1s); everything else is Monte Carlo over counter-based streams keyed by
// (seed, world id, n, trial), so results do not depend on thread count.

#include "convlab/core.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace convlab::convergence {

class SuccessCriterion {
public:
    /// Success means zero loss.
    static SuccessCriterion exact() { return SuccessCriterion(std::nullopt); }
    /// Success means loss < eps; eps must be positive.
    static SuccessCriterion within(Rational eps);

    bool is_exact() const noexcept { return !epsilon_; }
    const Rational& epsilon() const;
    bool met_by(const LossValue& loss) const;
    /// "exact" or "within:<eps>".
    std::string to_string() const;

private:
    explicit SuccessCriterion(std::optional<Rational> eps) : epsilon_(std::move(eps)) {}
    std::optional<Rational> epsilon_;
};

enum class Mode { I, II, III };

std::string to_string(Mode mode);
Mode parse_mode(std::string_view text);

struct ModeParams {
    Mode mode = Mode::I;
    Rational delta = Rational(1, 20);
    Rational epsilon = Rational(1, 10);
    std::size_t horizon = 100;
    /// Worlds to check; empty means every world of the problem.
    std::vector<std::string> world_ids;
    /// Stages evaluated by the stochastic modes; empty means 1..horizon.
    /// Mode I always inspects every stage 0..horizon.
    std::vector<std::size_t> stages;

    /// Throws DomainError on T = 0, delta outside (0,1) or eps <= 0.
    void validate() const;
};

struct EngineOptions {
    /// Largest number of length-n sequences the enumeration path may visit.
    std::uint64_t exact_cap = std::uint64_t{1} << 20U;
    /// Largest n handled by the binomial path for count-symmetric methods.
    std::size_t symmetric_cap = 1'000'000;
    /// Binomial sums up to this n use exact integers; beyond it they use
    /// compensated long-double summation.
    std::size_t rational_cap = 256;
    std::uint64_t trials = 10'000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    /// Skip the exact paths and always sample.
    bool force_monte_carlo = false;
    /// For exact computation, enumerate sequences even when the binomial
    /// path applies.
    bool force_enumeration = false;
};

/// Worker count from CONVLAB_THREADS, else the hardware concurrency.
unsigned default_threads();

struct SuccessEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
    /// No sampling error (enumeration, binomial sum or closed form).
    bool exact = false;
    /// Present when the exact value was computed in rational arithmetic.
    std::optional<Rational> exact_value;
    std::uint64_t trials = 0;
    /// Standard error is zero only because the sample is degenerate
    /// (a single trial, or all trials agreeing).
    bool degenerate = false;
};

/// max(0, 1 - 1/(4 n eps^2)).
double bernoulli_bound(std::size_t n, double eps);
Rational bernoulli_bound(std::size_t n, const Rational& eps);

/// Smallest n with 1 - 1/(4 n eps^2) > 1 - delta, i.e. floor(1/(4 delta eps^2)) + 1.
std::size_t required_sample_size(const Rational& eps, const Rational& delta);
std::size_t required_sample_size(double eps, double delta);

SuccessEstimate exact_success_prob(const EmpiricalProblem& problem, const InferenceMethod& method,
                                   const World& world, std::size_t n, const SuccessCriterion& crit,
                                   const EngineOptions& options = {});

SuccessEstimate mc_success_prob(const EmpiricalProblem& problem, const InferenceMethod& method, const World& world,
                                std::size_t n, const SuccessCriterion& crit, std::uint64_t trials,
                                std::uint64_t seed, unsigned threads = 1);

/// Analytic lower bound on the success probability where one is known: the
/// Bernoulli bound for the frequency estimator on coin worlds, and
/// 1 - 1/(4 sqrt n) for the fair coin test once n^(-1/4) is small enough.
std::optional<double> analytic_bound(const EmpiricalProblem& problem, const InferenceMethod& method,
                                     const World& world, std::size_t n, const SuccessCriterion& crit);

struct CurvePoint {
    std::string world_id;
    std::size_t n = 0;
    SuccessEstimate value;
    std::optional<double> bound;
};

struct SuccessCurve {
    std::string problem;
    std::string method;
    std::string criterion;
    std::vector<CurvePoint> points;
};

/// Tabulates success probabilities for every world and stage, exact when
/// affordable and Monte Carlo otherwise. Stages default to 1..horizon.
SuccessCurve success_curve(const EmpiricalProblem& problem, const InferenceMethod& method,
                           std::span<const World> worlds, const SuccessCriterion& crit, std::size_t horizon,
                           const EngineOptions& options, std::span<const std::size_t> stages = {});

enum class VerdictStatus { SupportedAtHorizon, RefutedAtHorizon, Inconclusive };

std::string to_string(VerdictStatus status);

struct WorldVerdict {
    std::string world_id;
    /// Smallest stage from which the criterion held through the horizon.
    std::optional<std::size_t> threshold;
    std::string note;
};

struct RefutationWitness {
    std::vector<std::string> world_ids;
    /// Stages at which the refuted world fails the criterion.
    std::vector<std::size_t> failing_stages;
    std::string description;
};

struct Verdict {
    Mode mode = Mode::I;
    VerdictStatus status = VerdictStatus::Inconclusive;
    std::size_t horizon = 0;
    std::vector<WorldVerdict> worlds;
    std::optional<RefutationWitness> witness;
    std::vector<std::string> notes;

    const WorldVerdict& world(std::string_view id) const;
};

struct ModeCheck {
    Verdict verdict;
    /// The per-stage success values the verdict was read from. For mode I
    /// these are 0/1 indicators along each world's own branch.
    SuccessCurve curve;
};

/// Finite-horizon check of a mode of convergence.
///
/// Mode I locks each world's branch; it is refuted when an unlocked world
/// shares its branch with a world of different truth (no method can converge
/// on both), and inconclusive otherwise. Modes II and III read the success
/// curve: a Monte Carlo stage counts as a success only when
/// estimate - 3 stderr > 1 - delta, and a world is refuted only when the
/// horizon stage fails with estimate + 3 stderr <= 1 - delta.
ModeCheck check_mode_with_curve(const EmpiricalProblem& problem, const InferenceMethod& method,
                                const ModeParams& params, const EngineOptions& options = {});

Verdict check_mode(const EmpiricalProblem& problem, const InferenceMethod& method, const ModeParams& params,
                   const EngineOptions& options = {});

/// Smallest n <= horizon such that the output has zero loss at every stage
/// in [n, horizon]; nullopt if there is none.
std::optional<std::size_t> lock_time(const EmpiricalProblem& problem, const InferenceMethod& method,
                                     const World& world, std::size_t horizon);

/// Lock time of the raven rule without a horizon: the position of the first
/// 0 on a branch whose truth is No, or 0 when the truth is Yes and the branch
/// is the all-1 branch. Searches at most `scan_limit` tokens.
std::optional<std::size_t> raven_lock_time(const World& world, std::size_t scan_limit);

/// Branches sampled from a world's measure, each tagged with its membership
/// in Success(M, n) for n = 0..horizon: the method outputs the truth at
/// every stage from n through the horizon.
class SuccessSetSample {
public:
    static SuccessSetSample draw(const EmpiricalProblem& problem, const InferenceMethod& method, const World& world,
                                 std::size_t horizon, const EngineOptions& options);

    std::uint64_t trials() const noexcept { return trials_; }
    std::size_t horizon() const noexcept { return horizon_; }
    bool contains(std::uint64_t trial, std::size_t n) const;
    /// Fraction of sampled branches in Success(n), with binomial stderr.
    SuccessEstimate probability(std::size_t n) const;
    /// Success(n) is a subset of Success(n_prime) on every sampled branch.
    bool included(std::size_t n, std::size_t n_prime) const;

private:
    std::uint64_t trials_ = 0;
    std::size_t horizon_ = 0;
    /// Row-major trials x (horizon + 1) membership flags.
    std::vector<std::uint8_t> members_;
};

/// P_w(Success(n)): the probability that the method has locked onto the
/// truth by stage n. Closed form 1 - p^n for the raven rule under
/// IID-Bernoulli(p) (1 under the point mass on the all-1 branch); otherwise
/// Monte Carlo over branches with horizon-relative locking.
SuccessEstimate success_set_prob(const EmpiricalProblem& problem, const InferenceMethod& method,
                                 const World& world, std::size_t n, std::size_t horizon,
                                 const EngineOptions& options);

/// Checks Success(n) is a subset of Success(n') on the branches sampled for
/// success_set_prob with the same seed.
bool success_set_monotone(const EmpiricalProblem& problem, const InferenceMethod& method, const World& world,
                          std::size_t n, std::size_t n_prime, std::size_t horizon, const EngineOptions& options);

/// Two worlds of the problem sharing one branch but with different truths,
/// with prefix equality verified through `horizon`.
std::optional<std::pair<World, World>> underdetermination_witness(const EmpiricalProblem& problem,
                                                                  std::size_t horizon = 64);

/// At every stage up to `horizon`, at most one world of the pair sees the
/// method output its truth.
bool witness_refutes(const EmpiricalProblem& problem, const InferenceMethod& method,
                     const std::pair<World, World>& pair, std::size_t horizon);

struct CardinalityWitness {
    Rational value;
    Rational gap_lo;
    Rational gap_hi;
    std::size_t distinct_outputs = 0;
    std::uint64_t inputs = 0;
};

/// A value in [0,1] the method never outputs on binary inputs of length
/// <= depth: the midpoint of the widest gap (lowest on ties) among its
/// outputs together with 0 and 1.
CardinalityWitness cardinality_witness(const InferenceMethod& method, std::size_t depth);

} // namespace convlab::convergence
