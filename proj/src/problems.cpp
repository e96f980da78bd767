#include "convlab/problems.hpp"

#include "convlab/errors.hpp"
#include "convlab/rng.hpp"

#include <algorithm>

namespace convlab::problems {

namespace {

constexpr std::uint64_t kFrozenBranchSalt = 0x6a09e667f3bcc909ULL;

/// Stream key of the branch frozen into a stochastic world.
std::uint64_t frozen_key(std::uint64_t seed, const std::string& world_id) {
    return rng::substream(seed ^ kFrozenBranchSalt, world_id, 0, 0);
}

Rational zero_one_loss(const Hypothesis& h, const World& w) { return h == w.truth ? 0 : 1; }

std::string theta_id(const Rational& theta) { return "theta=" + format_rational(theta); }

void check_unit(const Rational& value, const char* what) {
    if (value < 0 || value > 1) {
        throw DomainError(std::string(what) + " outside [0,1]: " + format_rational(value));
    }
}

/// Worlds shared by the fair coin and coin bias problems. Every theta is
/// paired with the alternating branch, the all-1 branch and a branch sampled
/// from P_theta; deterministic branches with probability zero under P_theta
/// are left out. The fair world theta = 0.5 is listed first in each group.
std::vector<World> coin_worlds(std::vector<Rational> grid, std::uint64_t seed,
                               const std::function<Hypothesis(const Rational&)>& truth_of) {
    const Rational half(1, 2);
    std::stable_partition(grid.begin(), grid.end(), [&](const Rational& t) { return t == half; });

    std::vector<World> worlds;
    auto add = [&](const Rational& theta, Branch branch, const std::string& suffix) {
        Measure measure = Measure::iid_bernoulli(theta);
        if (measure.prefix_prob(branch.prefix(2)) == 0) return;
        WorldExtras extras;
        extras.theta = theta;
        worlds.push_back(World{theta_id(theta) + "/" + suffix, std::move(branch), truth_of(theta), std::move(measure),
                               std::move(extras), {}});
    };
    for (const auto& theta : grid) add(theta, Branch::periodic({1, 0}), "alt");
    for (const auto& theta : grid) add(theta, Branch::constant(1), "all-1");
    for (const auto& theta : grid) {
        const std::string id = theta_id(theta) + "/sample";
        add(theta, Measure::iid_bernoulli(theta).sample(frozen_key(seed, id), "sample:" + id), "sample");
    }
    return worlds;
}

void check_coin_grid(const std::vector<Rational>& grid) {
    if (grid.empty()) throw ConfigError("theta grid is empty");
    for (const auto& t : grid) {
        if (t < 0 || t > 1) throw ConfigError("theta outside [0,1]: " + format_rational(t));
    }
}

std::string describe_grid(const std::vector<Rational>& grid, const char* symbol) {
    std::string s = std::string(symbol) + " in {";
    for (std::size_t i = 0; i < grid.size(); ++i) s += (i ? ", " : "") + format_rational(grid[i]);
    return s + "}";
}

} // namespace

// ---------------------------------------------------------- classification

void ClassificationTask::validate() const {
    if (features.empty()) throw ConfigError("classification task has an empty feature set X");
    if (classifiers.empty()) throw ConfigError("classification task has an empty classifier set H");
    if (distributions.empty()) throw ConfigError("classification task has no distributions");
    for (const auto& c : classifiers) {
        if (c.labels.size() != features.size()) throw ConfigError("classifier '" + c.name + "' is not total on X");
        if (std::any_of(c.labels.begin(), c.labels.end(), [](auto l) { return l > 1; })) {
            throw ConfigError("classifier '" + c.name + "' predicts a non-binary label");
        }
    }
    for (std::size_t i = 0; i < classifiers.size(); ++i) {
        for (std::size_t j = i + 1; j < classifiers.size(); ++j) {
            if (classifiers[i] == classifiers[j]) throw ConfigError("classifier listed twice: " + classifiers[j].name);
        }
    }
    for (const auto& d : distributions) {
        if (d.size() != 2 * features.size()) throw ConfigError("distribution must have one mass per (x, y) pair");
        Rational total = 0;
        for (const auto& p : d) {
            if (p < 0) throw ConfigError("negative probability mass in distribution");
            total += p;
        }
        if (abs(total - 1) > Rational(1, 1'000'000'000'000LL)) {
            throw ConfigError("distribution sums to " + format_rational(total) + ", not 1");
        }
    }
}

Rational risk(const Classifier& h, const Distribution& d) {
    Rational total = 0;
    for (std::size_t x = 0; x < h.labels.size(); ++x) {
        const std::uint8_t wrong = 1 - h.predict(x);
        total += d.at(example_token(x, wrong));
    }
    return total;
}

std::size_t risk_minimizer(const Distribution& d, const std::vector<Classifier>& pool) {
    if (pool.empty()) throw ConfigError("empty classifier pool");
    std::size_t best = 0;
    Rational best_risk = risk(pool[0], d);
    for (std::size_t i = 1; i < pool.size(); ++i) {
        Rational r = risk(pool[i], d);
        if (r < best_risk) {
            best = i;
            best_risk = std::move(r);
        }
    }
    return best;
}

Rational excess_risk(const Classifier& h, const Distribution& d, const std::vector<Classifier>& pool) {
    return risk(h, d) - risk(pool[risk_minimizer(d, pool)], d);
}

EmpiricalProblem binary_classification(const ClassificationTask& task, std::uint64_t seed) {
    task.validate();

    std::vector<std::string> symbols;
    for (const auto& x : task.features) {
        symbols.push_back(x + "/0");
        symbols.push_back(x + "/1");
    }

    // Normalize to an exact probability vector (inputs may be off by 1e-12).
    auto distributions = std::make_shared<std::vector<Distribution>>();
    for (const auto& d : task.distributions) {
        Rational total = 0;
        for (const auto& p : d) total += p;
        Distribution normalized;
        for (const auto& p : d) normalized.push_back(p / total);
        distributions->push_back(std::move(normalized));
    }

    WorldFamily family;
    for (std::size_t i = 0; i < distributions->size(); ++i) {
        const auto& d = (*distributions)[i];
        const std::string id = "D" + std::to_string(i) + "/sample";
        Measure measure = Measure::iid(d);
        Branch branch = measure.sample(frozen_key(seed, id), "sample:" + id);
        WorldExtras extras;
        extras.distribution = i;
        const auto& truth = task.classifiers[risk_minimizer(d, task.classifiers)];
        family.members.push_back(
            World{id, std::move(branch), Hypothesis::classifier(truth), std::move(measure), std::move(extras), {}});
    }
    family.grid = std::to_string(distributions->size()) + " distributions over X x {0,1}";

    auto pool = task.classifiers;
    LossFunction loss = [distributions, pool](const Hypothesis& h, const World& w) {
        if (!w.extras.distribution) throw PreconditionError("classification world without a distribution");
        return excess_risk(h.classifier_value(), (*distributions)[*w.extras.distribution], pool);
    };

    std::vector<Hypothesis> probes;
    for (const auto& c : task.classifiers) probes.push_back(Hypothesis::classifier(c));

    return EmpiricalProblem{"binary-classification",
                            HypothesisSpace::classifiers(task.classifiers, task.features.size()),
                            Alphabet(std::move(symbols)),
                            std::move(family),
                            std::move(loss),
                            std::move(probes)};
}

ClassificationTask two_feature_task() {
    ClassificationTask task;
    task.features = {"a", "b"};
    task.classifiers = {Classifier{"all-0", {0, 0}}, Classifier{"all-1", {1, 1}}, Classifier{"identity", {1, 0}}};
    // Token order: a/0, a/1, b/0, b/1.
    task.distributions = {
        {Rational(1, 10), Rational(4, 10), Rational(4, 10), Rational(1, 10)}, // identity 0.2, others 0.5
        {Rational(1, 10), Rational(5, 10), Rational(1, 10), Rational(3, 10)}, // all-1 0.2, identity 0.4
        {Rational(5, 10), Rational(1, 10), Rational(3, 10), Rational(1, 10)}, // all-0 0.2, identity 0.6
    };
    return task;
}

// ------------------------------------------------------------------ ravens

EmpiricalProblem easy_raven(std::size_t max_first_zero, bool literal_worlds) {
    WorldFamily family;
    family.members.push_back(World{"all-1", Branch::constant(1), Hypothesis::label(kYes), std::nullopt, {}, {}});
    for (std::size_t k = 1; k <= max_first_zero; ++k) {
        Branch b = Branch::first_zero_at(k);
        family.members.push_back(World{b.id(), b, Hypothesis::label(kNo), std::nullopt, {}, {}});
        if (literal_worlds) {
            family.members.push_back(World{b.id() + "/yes", b, Hypothesis::label(kYes), std::nullopt, {}, {}});
        }
    }
    family.grid = "first 0 at k in 1.." + std::to_string(max_first_zero) + " plus the all-1 branch" +
                  (literal_worlds ? " (literal reading)" : "");

    return EmpiricalProblem{literal_worlds ? "easy-raven-literal" : "easy-raven",
                            HypothesisSpace::labels({kYes, kNo}),
                            Alphabet::binary(),
                            std::move(family),
                            zero_one_loss,
                            {Hypothesis::label(kYes), Hypothesis::label(kNo)}};
}

EmpiricalProblem fine_grained_raven(const std::vector<Rational>& p_grid, std::uint64_t seed) {
    if (p_grid.empty()) throw DomainError("p grid is empty");
    WorldFamily family;
    for (const auto& p : p_grid) {
        check_unit(p, "raven probability p");
        const std::string id = "raven/p=" + format_rational(p);
        WorldExtras extras;
        extras.theta = p;
        if (p == 1) {
            Branch all_ones = Branch::constant(1);
            family.members.push_back(World{id, all_ones, Hypothesis::label(kYes), Measure::point_mass(all_ones),
                                           std::move(extras), [](const Branch&) { return Hypothesis::label(kYes); }});
        } else {
            Measure measure = Measure::iid_bernoulli(p);
            Branch branch = measure.sample(frozen_key(seed, id), "sample:" + id);
            family.members.push_back(World{id, std::move(branch), Hypothesis::label(kNo), std::move(measure),
                                           std::move(extras), [](const Branch&) { return Hypothesis::label(kNo); }});
        }
    }
    family.grid = describe_grid(p_grid, "p");

    return EmpiricalProblem{"fine-grained-raven",
                            HypothesisSpace::labels({kYes, kNo}),
                            Alphabet::binary(),
                            std::move(family),
                            zero_one_loss,
                            {Hypothesis::label(kYes), Hypothesis::label(kNo)}};
}

// ------------------------------------------------------------------- coins

std::vector<Rational> default_theta_grid() {
    std::vector<Rational> grid;
    for (int i = 0; i <= 10; ++i) grid.emplace_back(i, 10);
    grid.emplace_back(45, 100);
    grid.emplace_back(55, 100);
    return grid;
}

EmpiricalProblem fair_coin(const std::vector<Rational>& theta_grid, std::uint64_t seed) {
    check_coin_grid(theta_grid);
    const Rational half(1, 2);
    const bool has_fair = std::find(theta_grid.begin(), theta_grid.end(), half) != theta_grid.end();
    const bool has_unfair = std::any_of(theta_grid.begin(), theta_grid.end(), [&](const auto& t) { return t != half; });
    if (!has_fair || !has_unfair) throw ConfigError("fair coin grid must contain 0.5 and some theta != 0.5");

    WorldFamily family;
    family.members = coin_worlds(theta_grid, seed, [half](const Rational& theta) {
        return Hypothesis::label(theta == half ? kFair : kUnfair);
    });
    family.grid = describe_grid(theta_grid, "theta");

    return EmpiricalProblem{"fair-coin",
                            HypothesisSpace::labels({kFair, kUnfair}),
                            Alphabet::binary(),
                            std::move(family),
                            zero_one_loss,
                            {Hypothesis::label(kFair), Hypothesis::label(kUnfair)}};
}

EmpiricalProblem coin_bias(const std::vector<Rational>& theta_grid, std::uint64_t seed) {
    check_coin_grid(theta_grid);

    WorldFamily family;
    family.members = coin_worlds(theta_grid, seed, [](const Rational& theta) { return Hypothesis::real(theta); });
    family.grid = describe_grid(theta_grid, "theta");

    LossFunction loss = [](const Hypothesis& h, const World& w) {
        if (!w.extras.theta) throw PreconditionError("coin world without a bias");
        return abs(h.real_value() - *w.extras.theta);
    };

    std::vector<Hypothesis> probes = {Hypothesis::real(0), Hypothesis::real(Rational(1, 2)), Hypothesis::real(1)};
    for (const auto& t : theta_grid) {
        probes.push_back(Hypothesis::real(t));
        if (t + Rational(1, 100) <= 1) probes.push_back(Hypothesis::real(t + Rational(1, 100)));
    }

    return EmpiricalProblem{"coin-bias",
                            HypothesisSpace::interval(0, 1),
                            Alphabet::binary(),
                            std::move(family),
                            std::move(loss),
                            std::move(probes)};
}

} // namespace convlab::problems
