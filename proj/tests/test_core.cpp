#include "convlab/core.hpp"
#include "convlab/errors.hpp"
#include "convlab/methods.hpp"
#include "convlab/problems.hpp"
#include "convlab/rng.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace convlab;

namespace {

const Alphabet kBin = Alphabet::binary();

DataSequence seq(std::string_view text) { return kBin.parse(text); }

std::vector<InferenceMethod> binary_methods() {
    return {methods::raven_rule(), methods::fair_coin_test(), methods::frequency_estimator()};
}

} // namespace

TEST(ApplyMethod, RavenRuleOnAllOnes) {
    EXPECT_EQ(apply_method(methods::raven_rule(), seq("111")).to_string(), "Yes");
}

TEST(ApplyMethod, RavenRuleOnEmptyInput) {
    EXPECT_EQ(apply_method(methods::raven_rule(), seq("")).to_string(), "Yes");
}

TEST(ApplyMethod, FrequencyEstimatorCountsOnes) {
    const auto out = apply_method(methods::frequency_estimator(), seq("1101"));
    ASSERT_FALSE(out.is_suspend());
    EXPECT_EQ(out.hypothesis().real_value(), Rational(3, 4));
}

TEST(ApplyMethod, RejectsTokensOutsideTheAlphabet) {
    const DataSequence bad{1, 2, 1};
    EXPECT_THROW(apply_method(methods::raven_rule(), bad), DomainError);
}

TEST(OutputAt, ReadsThePrefixOfTheBranch) {
    const auto rule = methods::raven_rule();
    const World all_ones{"w", Branch::constant(1), Hypothesis::label("Yes"), std::nullopt, {}, {}};
    EXPECT_EQ(output_at(rule, all_ones, 5).to_string(), "Yes");

    const World first0{"w3", Branch::first_zero_at(3), Hypothesis::label("No"), std::nullopt, {}, {}};
    EXPECT_EQ(output_at(rule, first0, 2).to_string(), "Yes");
    EXPECT_EQ(output_at(rule, first0, 3).to_string(), "No");
}

TEST(LossOf, EasyRavenTruthHasZeroLoss) {
    const auto p = problems::easy_raven();
    const World& w = p.world("all-1");
    EXPECT_TRUE(loss_of(p, Hypothesis::label("Yes"), w).is_zero());
    EXPECT_EQ(loss_of(p, Hypothesis::label("No"), w).value(), 1);
}

TEST(LossOf, CoinBiasIsAbsoluteDifference) {
    const auto p = problems::coin_bias({Rational(1, 2)});
    const World& w = p.world("theta=0.5/alt");
    EXPECT_EQ(loss_of(p, Hypothesis::real(Rational(7, 10)), w).value(), Rational(1, 5));
}

TEST(LossOf, SuspendIsInfinite) {
    for (const auto& p : {problems::easy_raven(), problems::fair_coin(problems::default_theta_grid())}) {
        for (const auto& w : p.worlds.members) {
            const auto loss = loss_of(p, MethodOutput::suspend(), w);
            EXPECT_TRUE(loss.is_infinite());
            EXPECT_FALSE(loss.below(Rational(1000000)));
        }
    }
}

TEST(LossOf, HypothesisOutsideTheSpaceIsRejected) {
    const auto p = problems::easy_raven();
    EXPECT_THROW(loss_of(p, Hypothesis::real(Rational(1, 2)), p.world("all-1")), DomainError);
}

TEST(ValidateProblem, EasyRavenPasses) {
    const auto p = problems::easy_raven();
    const auto report = validate_problem(p, p.worlds.members);
    EXPECT_TRUE(report.ok()) << (report.violations().empty() ? "" : report.violations().front());
}

TEST(ValidateProblem, FlagsALossWithTwoZeroHypotheses) {
    auto p = problems::easy_raven(3);
    p.loss = [](const Hypothesis&, const World&) { return Rational(0); };
    const auto report = validate_problem(p, p.worlds.members);
    EXPECT_FALSE(report.ok());
    EXPECT_TRUE(report.worlds.front().rival.has_value());
}

TEST(ValidateProblem, FlagsTokensOutsideTheAlphabet) {
    auto p = problems::easy_raven(3);
    const World bad{"emits-2", Branch("twos", [](std::size_t) { return Token{2}; }), Hypothesis::label("No"),
                    std::nullopt, {}, {}};
    const auto report = validate_problem(p, std::vector<World>{bad});
    EXPECT_FALSE(report.ok());
    EXPECT_FALSE(report.worlds.front().alphabet_ok);
}

TEST(ValidateProblem, FlagsABranchTheMeasureExcludes) {
    const World w{"w", Branch::constant(1), Hypothesis::label("No"), Measure::iid_bernoulli(0), {}, {}};
    const auto report = validate_problem(problems::easy_raven(3), std::vector<World>{w});
    EXPECT_FALSE(report.worlds.front().measure_consistent);
}

TEST(Branch, FactoriesAreOneBased) {
    const auto b = Branch::first_zero_at(4);
    EXPECT_EQ(b.prefix(6), seq("111011"));
    EXPECT_EQ(Branch::periodic({1, 0}).prefix(5), seq("10101"));
    EXPECT_EQ(Branch::constant(1).id(), "const-1");
    EXPECT_EQ(Branch::periodic({1, 0}).id(), "periodic-10");
}

TEST(Measure, PrefixProbabilities) {
    EXPECT_EQ(Measure::iid_bernoulli(Rational(1, 2)).prefix_prob(seq("11")), Rational(1, 4));
    EXPECT_EQ(Measure::iid_bernoulli(Rational(3, 10)).prefix_prob(seq("101")), Rational(63, 1000));
    const auto pm = Measure::point_mass(Branch::constant(1));
    EXPECT_EQ(pm.prefix_prob(seq("111")), 1);
    EXPECT_EQ(pm.prefix_prob(seq("110")), 0);
}

TEST(Measure, RejectsProbabilitiesOutsideTheUnitInterval) {
    EXPECT_THROW(Measure::iid_bernoulli(Rational(3, 2)), DomainError);
    EXPECT_THROW(Measure::iid({Rational(1, 2), Rational(1, 3)}), DomainError);
}

TEST(Measure, SamplingIsKeyedAndReproducible) {
    const auto m = Measure::iid_bernoulli(Rational(1, 2));
    EXPECT_EQ(m.sample(42, "a").prefix(64), m.sample(42, "b").prefix(64));
    EXPECT_NE(m.sample(42, "a").prefix(64), m.sample(43, "a").prefix(64));
    DataSequence direct;
    m.sample_prefix(42, 64, direct);
    EXPECT_EQ(direct, m.sample(42, "a").prefix(64));
}

TEST(Measure, DegenerateThetaGivesConstantSamples) {
    DataSequence out;
    Measure::iid_bernoulli(1).sample_prefix(9, 100, out);
    EXPECT_TRUE(std::all_of(out.begin(), out.end(), [](Token t) { return t == 1; }));
    Measure::iid_bernoulli(0).sample_prefix(9, 100, out);
    EXPECT_TRUE(std::all_of(out.begin(), out.end(), [](Token t) { return t == 0; }));
}

// ------------------------------------------------------------- properties

TEST(CoreProperty, ApplyMethodIsDeterministic) {
    std::mt19937_64 gen(11);
    for (const auto& m : binary_methods()) {
        for (int trial = 0; trial < 200; ++trial) {
            DataSequence s(gen() % 40);
            for (auto& t : s) t = static_cast<Token>(gen() & 1U);
            EXPECT_EQ(apply_method(m, s), apply_method(m, s));
        }
    }
}

TEST(CoreProperty, OutputDependsOnlyOnThePrefix) {
    std::mt19937_64 gen(12);
    for (const auto& m : binary_methods()) {
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = gen() % 30;
            DataSequence shared(n);
            for (auto& t : shared) t = static_cast<Token>(gen() & 1U);
            const std::uint64_t tail_a = gen();
            const std::uint64_t tail_b = gen();
            auto make = [&](std::uint64_t tail, const char* id) {
                return Branch(id, [shared, tail](std::size_t i) {
                    if (i <= shared.size()) return shared[i - 1];
                    return static_cast<Token>(rng::draw(tail, i) & 1U);
                });
            };
            const World a{"a", make(tail_a, "a"), Hypothesis::label("Yes"), std::nullopt, {}, {}};
            const World b{"b", make(tail_b, "b"), Hypothesis::label("No"), std::nullopt, {}, {}};
            EXPECT_EQ(output_at(m, a, n), output_at(m, b, n));
        }
    }
}

TEST(CoreProperty, LossIsNonnegativeAndZeroAtTheTruth) {
    const std::vector<EmpiricalProblem> catalog{
        problems::easy_raven(), problems::fine_grained_raven({Rational(3, 10), Rational(1)}),
        problems::fair_coin(problems::default_theta_grid()), problems::coin_bias(problems::default_theta_grid()),
        problems::binary_classification(problems::two_feature_task())};
    for (const auto& p : catalog) {
        for (const auto& w : p.worlds.members) {
            EXPECT_EQ(p.loss(w.truth, w), 0) << p.name << " " << w.id;
            for (const auto& h : p.probes) EXPECT_GE(p.loss(h, w), 0) << p.name << " " << w.id;
        }
    }
}

TEST(CoreProperty, CountSymmetricMethodsIgnoreOrderExhaustively) {
    for (const auto& m : binary_methods()) {
        ASSERT_TRUE(m.count_symmetric());
        for (std::size_t n = 0; n <= 12; ++n) {
            std::vector<std::optional<MethodOutput>> by_count(n + 1);
            DataSequence s(n);
            for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
                for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<Token>((bits >> i) & 1U);
                const auto out = apply_method(m, s);
                auto& slot = by_count[oracle::ones(s)];
                if (!slot) slot = out;
                ASSERT_EQ(*slot, out) << m.name() << " n=" << n;
            }
        }
    }
}

TEST(CoreProperty, CountSymmetricMethodsIgnoreOrderOnLongRandomInputs) {
    std::mt19937_64 gen(13);
    for (const auto& m : binary_methods()) {
        for (int trial = 0; trial < 300; ++trial) {
            DataSequence s(13 + gen() % 200);
            for (auto& t : s) t = static_cast<Token>(gen() & 1U);
            DataSequence shuffled = s;
            std::shuffle(shuffled.begin(), shuffled.end(), gen);
            EXPECT_EQ(apply_method(m, s), apply_method(m, shuffled));
        }
    }
}

TEST(CoreProperty, ErmIsNotCountSymmetric) {
    const auto task = problems::two_feature_task();
    EXPECT_FALSE(methods::erm({task.classifiers, 2}).count_symmetric());
}

TEST(CoreProperty, MeasureAdditivityOnTheTree) {
    std::mt19937_64 gen(14);
    std::vector<Measure> measures{Measure::iid_bernoulli(Rational(3, 10)), Measure::iid_bernoulli(Rational(1, 2)),
                                  Measure::iid_bernoulli(Rational(9, 10)), Measure::point_mass(Branch::constant(1)),
                                  Measure::point_mass(Branch::periodic({1, 0}))};
    for (const auto& d : problems::two_feature_task().distributions) measures.push_back(Measure::iid(d));
    for (const auto& m : measures) {
        for (int trial = 0; trial < 100; ++trial) {
            DataSequence node(gen() % 12);
            for (auto& t : node) t = static_cast<Token>(gen() % m.alphabet_size());
            Rational children = 0;
            for (Token t = 0; t < m.alphabet_size(); ++t) {
                DataSequence child = node;
                child.push_back(t);
                children += m.prefix_prob(child);
            }
            EXPECT_EQ(children, m.prefix_prob(node));
        }
        EXPECT_EQ(m.prefix_prob(DataSequence{}), 1);
    }
}

TEST(CoreProperty, IidPrefixProbabilityIsAProduct) {
    std::mt19937_64 gen(15);
    const Rational theta(7, 10);
    const auto m = Measure::iid_bernoulli(theta);
    for (int trial = 0; trial < 100; ++trial) {
        DataSequence s(gen() % 20);
        for (auto& t : s) t = static_cast<Token>(gen() & 1U);
        EXPECT_EQ(m.prefix_prob(s), oracle::bernoulli_prob(theta, s));
    }
}
