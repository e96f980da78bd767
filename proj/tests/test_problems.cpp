#include "convlab/errors.hpp"
#include "convlab/problems.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace convlab;
using namespace convlab::problems;

namespace {

bool has_world(const EmpiricalProblem& p, const std::string& branch_id, const std::string& truth) {
    for (const auto& w : p.worlds.members) {
        if (w.branch.id() == branch_id && w.truth.to_string() == truth) return true;
    }
    return false;
}

Classifier by_name(const ClassificationTask& task, const std::string& name) {
    for (const auto& c : task.classifiers) {
        if (c.name == name) return c;
    }
    throw std::runtime_error("no classifier " + name);
}

/// X = {a, b}, D uniform on {(a,1), (b,0)}.
Distribution uniform_a1_b0() { return {0, Rational(1, 2), Rational(1, 2), 0}; }

std::vector<Distribution> random_distributions(std::mt19937_64& gen, std::size_t count, std::size_t features) {
    std::vector<Distribution> out;
    for (std::size_t i = 0; i < count; ++i) {
        Distribution d(2 * features);
        long long total = 0;
        std::vector<long long> w(d.size());
        for (auto& x : w) total += (x = static_cast<long long>(gen() % 10));
        if (total == 0) {
            w[0] = 1;
            total = 1;
        }
        for (std::size_t j = 0; j < d.size(); ++j) d[j] = Rational(w[j], total);
        out.push_back(std::move(d));
    }
    return out;
}

} // namespace

TEST(EasyRaven, ContainsTheAllOnesYesWorld) {
    const auto p = easy_raven();
    EXPECT_TRUE(has_world(p, "const-1", "Yes"));
    EXPECT_EQ(p.world("all-1").truth.to_string(), "Yes");
}

TEST(EasyRaven, ExcludesTheAllOnesNoWorld) {
    EXPECT_FALSE(has_world(easy_raven(), "const-1", "No"));
    EXPECT_FALSE(has_world(easy_raven(20, true), "const-1", "No"));
}

TEST(EasyRaven, ZeroOneLoss) {
    const auto p = easy_raven();
    EXPECT_EQ(p.loss(Hypothesis::label(kNo), p.world("all-1")), 1);
    EXPECT_EQ(p.loss(Hypothesis::label(kYes), p.world("first0@4")), 1);
    EXPECT_EQ(p.loss(Hypothesis::label(kNo), p.world("first0@4")), 0);
}

TEST(EasyRaven, WorldsCarryTheirFirstZero) {
    const auto p = easy_raven(20);
    EXPECT_EQ(p.worlds.members.size(), 21U);
    for (std::size_t k = 1; k <= 20; ++k) {
        const auto& w = p.world("first0@" + std::to_string(k));
        EXPECT_EQ(w.branch.at(k), 0U);
        for (std::size_t i = 1; i < k; ++i) EXPECT_EQ(w.branch.at(i), 1U);
        EXPECT_EQ(w.truth.to_string(), kNo);
    }
}

TEST(EasyRaven, LiteralReadingAddsIncoherentWorlds) {
    const auto p = easy_raven(5, true);
    EXPECT_TRUE(has_world(p, "first0@3", "Yes"));
    EXPECT_TRUE(has_world(p, "first0@3", "No"));
}

TEST(FineGrainedRaven, PointMassWorldAtPEqualsOne) {
    const auto p = fine_grained_raven({Rational(1)});
    const World& w = p.world("raven/p=1");
    EXPECT_EQ(w.branch.id(), "const-1");
    EXPECT_EQ(w.truth.to_string(), kYes);
    ASSERT_TRUE(w.measure);
    EXPECT_EQ(w.measure->kind(), MeasureKind::PointMass);
}

TEST(FineGrainedRaven, HalfWorldPrefixProbability) {
    const auto p = fine_grained_raven({Rational(1, 2)});
    EXPECT_EQ(p.world("raven/p=0.5").measure->prefix_prob(Alphabet::binary().parse("11")), Rational(1, 4));
}

TEST(FineGrainedRaven, LossMatchesTheEasyProblem) {
    const auto fine = fine_grained_raven({Rational(3, 10), Rational(1)});
    const auto easy = easy_raven();
    for (const auto& h : {Hypothesis::label(kYes), Hypothesis::label(kNo)}) {
        EXPECT_EQ(fine.loss(h, fine.world("raven/p=1")), easy.loss(h, easy.world("all-1")));
        EXPECT_EQ(fine.loss(h, fine.world("raven/p=0.3")), easy.loss(h, easy.world("first0@3")));
    }
}

TEST(FineGrainedRaven, SampledBranchIsFrozenPerSeed) {
    const auto a = fine_grained_raven({Rational(1, 2)}, 5);
    const auto b = fine_grained_raven({Rational(1, 2)}, 5);
    const auto c = fine_grained_raven({Rational(1, 2)}, 6);
    EXPECT_EQ(a.world("raven/p=0.5").branch.prefix(200), b.world("raven/p=0.5").branch.prefix(200));
    EXPECT_NE(a.world("raven/p=0.5").branch.prefix(200), c.world("raven/p=0.5").branch.prefix(200));
}

TEST(FineGrainedRaven, RejectsProbabilitiesOutsideTheUnitInterval) {
    EXPECT_THROW(fine_grained_raven({Rational(-1, 10)}), DomainError);
    EXPECT_THROW(fine_grained_raven({}), DomainError);
}

TEST(FairCoin, AdmitsAlternatingAndAllOnesFairWorlds) {
    const auto p = fair_coin(default_theta_grid());
    const World& alt = p.world("theta=0.5/alt");
    EXPECT_EQ(alt.branch.id(), "periodic-10");
    EXPECT_EQ(*alt.extras.theta, Rational(1, 2));
    EXPECT_EQ(alt.measure->theta(), Rational(1, 2));
    const World& ones = p.world("theta=0.5/all-1");
    EXPECT_EQ(ones.branch.id(), "const-1");
    EXPECT_EQ(ones.truth.to_string(), kFair);
}

TEST(FairCoin, ZeroOneLoss) {
    const auto p = fair_coin(default_theta_grid());
    EXPECT_EQ(p.loss(Hypothesis::label(kUnfair), p.world("theta=0.5/alt")), 1);
    EXPECT_EQ(p.loss(Hypothesis::label(kUnfair), p.world("theta=0.7/alt")), 0);
}

TEST(FairCoin, GridMustHaveBothTruths) {
    EXPECT_THROW(fair_coin({Rational(1, 2)}), ConfigError);
    EXPECT_THROW(fair_coin({Rational(3, 10)}), ConfigError);
}

TEST(FairCoin, SkipsBranchesOutsideTheSupport) {
    const auto p = fair_coin(default_theta_grid());
    for (const auto& w : p.worlds.members) EXPECT_GT(w.measure->prefix_prob(w.branch.prefix(64)), 0) << w.id;
    EXPECT_THROW(p.world("theta=0/all-1"), ConfigError);
}

TEST(CoinBias, LossIsDistanceToTheBias) {
    const auto p = coin_bias(default_theta_grid());
    const World& w = p.world("theta=0.5/alt");
    EXPECT_EQ(p.loss(Hypothesis::real(Rational(1, 2)), w), 0);
    EXPECT_EQ(p.loss(Hypothesis::real(Rational(7, 10)), w), Rational(1, 5));
    EXPECT_EQ(p.world("theta=0.3/alt").truth, Hypothesis::real(Rational(3, 10)));
}

TEST(CoinBias, SharesTheFairCoinWorldFamily) {
    const auto grid = default_theta_grid();
    const auto fair = fair_coin(grid, 3);
    const auto bias = coin_bias(grid, 3);
    ASSERT_EQ(fair.worlds.members.size(), bias.worlds.members.size());
    EXPECT_EQ(fair.alphabet.size(), bias.alphabet.size());
    for (std::size_t i = 0; i < fair.worlds.members.size(); ++i) {
        const auto& a = fair.worlds.members[i];
        const auto& b = bias.worlds.members[i];
        EXPECT_EQ(a.id, b.id);
        EXPECT_EQ(a.branch.prefix(128), b.branch.prefix(128));
        EXPECT_EQ(a.measure->theta(), b.measure->theta());
    }
}

TEST(BinaryClassification, WorldsCarryTheirDistribution) {
    const auto task = two_feature_task();
    const auto p = binary_classification(task);
    ASSERT_EQ(p.worlds.members.size(), task.distributions.size());
    for (std::size_t i = 0; i < task.distributions.size(); ++i) {
        const World& w = p.worlds.members[i];
        EXPECT_EQ(w.extras.distribution, i);
        EXPECT_EQ(w.measure->token_probs(), task.distributions[i]);
        EXPECT_EQ(p.loss(w.truth, w), 0);
    }
}

TEST(BinaryClassification, ExcessRiskOfAllZeroOnTheUniformTask) {
    ClassificationTask task = two_feature_task();
    task.distributions = {uniform_a1_b0()};
    const auto p = binary_classification(task);
    const World& w = p.worlds.members.front();
    EXPECT_EQ(p.loss(Hypothesis::classifier(by_name(task, "all-0")), w), Rational(1, 2));
    EXPECT_EQ(w.truth, Hypothesis::classifier(by_name(task, "identity")));
}

TEST(BinaryClassification, RejectsBadTasks) {
    ClassificationTask task = two_feature_task();
    task.distributions = {{Rational(1, 2), Rational(1, 4), 0, 0}};
    EXPECT_THROW(binary_classification(task), ConfigError);
    task = two_feature_task();
    task.classifiers.push_back(Classifier{"short", {1}});
    EXPECT_THROW(binary_classification(task), ConfigError);
}

TEST(Risk, UniformTaskExamples) {
    const auto task = two_feature_task();
    EXPECT_EQ(risk(by_name(task, "identity"), uniform_a1_b0()), 0);
    EXPECT_EQ(risk(by_name(task, "all-0"), uniform_a1_b0()), Rational(1, 2));
    // All mass on pairs all-1 gets right.
    EXPECT_EQ(risk(by_name(task, "all-1"), Distribution{0, Rational(1, 3), 0, Rational(2, 3)}), 0);
}

TEST(Risk, TwoFeatureTaskHasSeparatedMinimizers) {
    const auto task = two_feature_task();
    const std::vector<std::string> expected{"identity", "all-1", "all-0"};
    for (std::size_t i = 0; i < task.distributions.size(); ++i) {
        const auto best = risk_minimizer(task.distributions[i], task.classifiers);
        EXPECT_EQ(task.classifiers[best].name, expected[i]);
        for (std::size_t j = 0; j < task.classifiers.size(); ++j) {
            if (j == best) continue;
            EXPECT_GE(risk(task.classifiers[j], task.distributions[i]) - risk(task.classifiers[best], task.distributions[i]),
                      Rational(1, 10));
        }
    }
}

// ------------------------------------------------------------- properties

TEST(ProblemsProperty, EveryCatalogProblemValidates) {
    const std::vector<EmpiricalProblem> catalog{
        easy_raven(), fine_grained_raven({0, Rational(3, 10), Rational(1, 2), Rational(9, 10), 1}),
        fair_coin(default_theta_grid()), coin_bias(default_theta_grid()), binary_classification(two_feature_task())};
    for (const auto& p : catalog) {
        const auto report = validate_problem(p, p.worlds.members);
        EXPECT_TRUE(report.ok()) << p.name << ": "
                                 << (report.violations().empty() ? "" : report.violations().front());
    }
}

TEST(ProblemsProperty, RiskMatchesTheOracleAndIsAdditive) {
    std::mt19937_64 gen(21);
    const auto task = two_feature_task();
    for (const auto& d : random_distributions(gen, 200, 2)) {
        for (const auto& h : task.classifiers) {
            const Rational r = risk(h, d);
            EXPECT_GE(r, 0);
            EXPECT_LE(r, 1);
            EXPECT_EQ(r, oracle::risk(h, d));
            // Split the misclassification event by feature.
            Rational by_feature = 0;
            for (std::size_t x = 0; x < 2; ++x) {
                Distribution part(4, Rational(0));
                part[2 * x] = d[2 * x];
                part[2 * x + 1] = d[2 * x + 1];
                by_feature += oracle::risk(h, part);
            }
            EXPECT_EQ(r, by_feature);
        }
    }
}

TEST(ProblemsProperty, ExcessRiskHasMinimumZeroOverH) {
    std::mt19937_64 gen(22);
    // Every classifier on three features.
    std::vector<Classifier> pool;
    for (unsigned bits = 0; bits < 8; ++bits) {
        pool.push_back(Classifier{"h" + std::to_string(bits),
                                  {std::uint8_t(bits & 1U), std::uint8_t((bits >> 1) & 1U), std::uint8_t((bits >> 2) & 1U)}});
    }
    for (const auto& d : random_distributions(gen, 100, 3)) {
        Rational lowest = 2;
        for (const auto& h : pool) {
            const Rational e = excess_risk(h, d, pool);
            EXPECT_GE(e, 0);
            lowest = std::min(lowest, e);
        }
        EXPECT_EQ(lowest, 0);
        EXPECT_EQ(excess_risk(pool[risk_minimizer(d, pool)], d, pool), 0);
    }
}

TEST(ProblemsProperty, FineGrainedPointMassReproducesTheEasyWorld) {
    const auto fine = fine_grained_raven({Rational(1)});
    const auto easy = easy_raven();
    const auto& a = fine.world("raven/p=1").branch;
    const auto& b = easy.world("all-1").branch;
    for (std::size_t i = 1; i <= 10000; i += 7) EXPECT_EQ(a.at(i), b.at(i));
    EXPECT_EQ(a.prefix(1000), b.prefix(1000));
}
