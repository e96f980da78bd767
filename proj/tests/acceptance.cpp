// Acceptance suite: one line per criterion with its tolerance and runtime
// limit. Exit status is nonzero if any criterion fails.

#include "convlab/cli.hpp"
#include "convlab/convergence.hpp"
#include "convlab/methods.hpp"
#include "convlab/problems.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace convlab;
using namespace convlab::convergence;

namespace {

const Rational kHalf(1, 2);
constexpr std::uint64_t kSeed = 20261019;

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) detail = what;
        ok = ok && cond;
    }
};

struct Criterion {
    int id;
    const char* title;
    const char* tolerance;
    double limit_s;
    std::function<Outcome()> body;
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

World coin_world(const EmpiricalProblem& p, const Rational& theta, const char* branch) {
    return p.world("theta=" + format_rational(theta) + "/" + branch);
}

// Curve builders shared by criteria 3, 7 and 9 and the determinism rerun.

std::string curve3(unsigned threads, SuccessEstimate* out = nullptr) {
    const auto p = problems::fair_coin({kHalf, Rational(9, 10)}, kSeed);
    const World w = coin_world(p, Rational(9, 10), "sample");
    const std::size_t n = 1296;
    SuccessCurve curve{p.name, "fair-coin-test", SuccessCriterion::exact().to_string(), {}};
    CurvePoint pt;
    pt.world_id = w.id;
    pt.n = n;
    pt.value = mc_success_prob(p, methods::fair_coin_test(), w, n, SuccessCriterion::exact(), 100000, kSeed, threads);
    pt.bound = analytic_bound(p, methods::fair_coin_test(), w, n, SuccessCriterion::exact());
    if (out) *out = pt.value;
    curve.points.push_back(pt);
    std::ostringstream os;
    cli::write_curve_csv(os, curve);
    return os.str();
}

const std::vector<Rational>& raven_grid() {
    static const std::vector<Rational> grid{Rational(3, 10), kHalf, Rational(9, 10)};
    return grid;
}

/// Success-set probabilities for n = 0..30 from 10^5 sampled branches per world.
std::string curve7(unsigned threads, Outcome* check = nullptr) {
    const auto p = problems::fine_grained_raven(raven_grid(), kSeed);
    const auto m = methods::raven_rule();
    EngineOptions mc;
    mc.force_monte_carlo = true;
    mc.trials = 100000;
    mc.seed = kSeed;
    mc.threads = threads;
    SuccessCurve curve{p.name, m.name(), "success-set", {}};
    for (const auto& w : p.worlds.members) {
        const auto sample = SuccessSetSample::draw(p, m, w, 30, mc);
        for (std::size_t n = 0; n <= 30; ++n) {
            CurvePoint pt;
            pt.world_id = w.id;
            pt.n = n;
            pt.value = sample.probability(n);
            curve.points.push_back(pt);
            if (!check) continue;
            const Rational closed = oracle::first_zero_by(w.measure->theta(), n);
            const double q = to_double(closed);
            const double gap = std::abs(pt.value.estimate - q);
            // Sampling sd at the true q; the plug-in se is 0 once every trial succeeds.
            const double sd = std::sqrt(q * (1 - q) / static_cast<double>(mc.trials));
            check->require(gap <= 4 * sd, w.id + " n=" + std::to_string(n) + ": MC " + fmt(pt.value.estimate) +
                                              " vs exact " + fmt(q) + " (4 sd = " + fmt(4 * sd) + ")");
            for (std::size_t n2 = n; n2 <= 30; ++n2) {
                check->require(sample.included(n, n2), w.id + ": Success(" + std::to_string(n) + ") not inside Success(" +
                                                           std::to_string(n2) + ")");
            }
        }
    }
    std::ostringstream os;
    cli::write_curve_csv(os, curve);
    return os.str();
}

const std::vector<std::size_t>& erm_stages() {
    static const std::vector<std::size_t> stages{10, 25, 50, 100, 200, 300, 400, 500};
    return stages;
}

std::string curve9(unsigned threads, Verdict* verdict = nullptr) {
    const auto task = problems::two_feature_task();
    const auto p = problems::binary_classification(task, kSeed);
    const auto m = methods::erm({task.classifiers, task.features.size()});
    ModeParams params;
    params.mode = Mode::III;
    params.epsilon = Rational(1, 20);
    params.delta = Rational(1, 10);
    params.horizon = 500;
    params.stages = erm_stages();
    EngineOptions opts;
    opts.trials = 10000;
    opts.seed = kSeed;
    opts.threads = threads;
    const auto check = check_mode_with_curve(p, m, params, opts);
    if (verdict) *verdict = check.verdict;
    std::ostringstream os;
    cli::write_curve_csv(os, check.curve);
    return os.str();
}

// ------------------------------------------------------------- criteria

Outcome c1_bound_dominance() {
    Outcome o;
    const std::vector<Rational> thetas{Rational(3, 10), kHalf, Rational(7, 10)};
    const auto p = problems::coin_bias(thetas, kSeed);
    const auto m = methods::frequency_estimator();
    std::size_t checked = 0;
    for (const auto& theta : thetas) {
        const World w = coin_world(p, theta, "alt");
        for (std::size_t n = 1; n <= 20; ++n) {
            for (const Rational& eps : {Rational(1, 20), Rational(1, 10), Rational(1, 5), Rational(3, 10)}) {
                const auto e = exact_success_prob(p, m, w, n, SuccessCriterion::within(eps));
                o.require(e.exact_value.has_value(), "no exact rational value");
                if (!e.exact_value) continue;
                o.require(*e.exact_value >= bernoulli_bound(n, eps),
                          "theta=" + format_rational(theta) + " n=" + std::to_string(n) + " eps=" + format_rational(eps));
                ++checked;
            }
        }
    }
    o.detail = o.ok ? std::to_string(checked) + " (theta, n, eps) cases" : o.detail;
    return o;
}

Outcome c2_fair_coin_on_truth() {
    Outcome o;
    const auto p = problems::fair_coin(problems::default_theta_grid(), kSeed);
    const auto m = methods::fair_coin_test();
    const World w = coin_world(p, kHalf, "alt");
    for (std::size_t n = 1; n <= 20; ++n) {
        const auto e = exact_success_prob(p, m, w, n, SuccessCriterion::exact());
        o.require(e.exact_value.has_value(), "no exact rational value");
        if (!e.exact_value) continue;
        // p >= 1 - 1/(4 sqrt n)  <=>  16 n (1 - p)^2 <= 1.
        const Rational miss = 1 - *e.exact_value;
        o.require(16 * Rational(static_cast<long long>(n)) * miss * miss <= 1, "n=" + std::to_string(n));
    }
    const auto at = [&](std::size_t n) { return *exact_success_prob(p, m, w, n, SuccessCriterion::exact()).exact_value; };
    const auto brute = [](std::size_t n) {
        return oracle::binary_enumeration(kHalf, n, [n](const std::vector<Token>& s) {
            return oracle::fair_coin_rule(n, oracle::ones(s));
        });
    };
    o.require(at(4) == 1 && brute(4) == 1, "n=4 is not 1");
    const Rational want16 = 1 - Rational(1, 32768);
    o.require(at(16) == want16 && brute(16) == want16, "n=16 is not 1 - 2^-15");
    if (o.ok) o.detail = "n=4 -> 1, n=16 -> " + format_rational(at(16));
    return o;
}

Outcome c3_fair_coin_off_truth() {
    Outcome o;
    SuccessEstimate e;
    curve3(1, &e);
    const double target = 1.0 - 1.0 / (4.0 * 36.0) - 4.0 * e.standard_error;
    o.require(e.trials == 100000, "wrong trial count");
    o.require(e.estimate >= target, "estimate " + fmt(e.estimate) + " < " + fmt(target));
    if (o.ok) o.detail = "P(Unfair) = " + fmt(e.estimate) + " (se " + fmt(e.standard_error) + ") >= " + fmt(target);
    return o;
}

Outcome c4_easy_raven_mode_one() {
    Outcome o;
    const auto p = problems::easy_raven(20);
    ModeParams params;
    params.mode = Mode::I;
    params.horizon = 100;
    const auto v = check_mode(p, methods::raven_rule(), params);
    o.require(v.status == VerdictStatus::SupportedAtHorizon, "status " + to_string(v.status));
    o.require(v.worlds.size() == 21, "expected 21 worlds");
    o.require(v.world("all-1").threshold == std::optional<std::size_t>(0), "N(all-1) != 0");
    for (std::size_t k = 1; k <= 20; ++k) {
        o.require(v.world("first0@" + std::to_string(k)).threshold == std::optional<std::size_t>(k),
                  "N(first0@" + std::to_string(k) + ") != " + std::to_string(k));
    }
    if (o.ok) o.detail = "SUPPORTED_AT_HORIZON, N(first0@k) = k, N(all-1) = 0";
    return o;
}

Outcome c5_fair_coin_refuted() {
    Outcome o;
    const auto p = problems::fair_coin(problems::default_theta_grid(), kSeed);
    bool has_all_ones_fair = false;
    for (const auto& w : p.worlds.members) has_all_ones_fair |= w.id == "theta=0.5/all-1";
    o.require(has_all_ones_fair, "grid lacks the all-1 fair world");
    ModeParams params;
    params.mode = Mode::I;
    params.horizon = 64;
    const auto v = check_mode(p, methods::fair_coin_test(), params);
    o.require(v.status == VerdictStatus::RefutedAtHorizon, "status " + to_string(v.status));
    o.require(!v.world("theta=0.5/all-1").threshold.has_value(), "all-1 fair world locked");

    const auto pair = underdetermination_witness(p, 64);
    o.require(pair.has_value(), "no witness");
    if (!pair) return o;
    const auto& [a, b] = *pair;
    o.require(a.branch.id() == b.branch.id(), "branches differ");
    o.require(!(a.truth == b.truth), "truths coincide");
    for (std::size_t n = 0; n <= 64; ++n) {
        o.require(a.branch.prefix(n) == b.branch.prefix(n), "prefixes differ at n=" + std::to_string(n));
    }
    if (o.ok) o.detail = "witness " + a.id + " (" + a.truth.to_string() + ") / " + b.id + " (" + b.truth.to_string() + ")";
    return o;
}

Outcome c6_cardinality() {
    Outcome o;
    const auto m = methods::frequency_estimator();
    const auto w = cardinality_witness(m, 15);
    o.require(w.inputs == (std::uint64_t{1} << 16) - 1, "wrong input count");
    std::uint64_t inputs = 0;
    DataSequence s;
    for (std::size_t len = 0; len <= 15; ++len) {
        s.assign(len, 0);
        for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << len); ++bits) {
            for (std::size_t i = 0; i < len; ++i) s[i] = static_cast<Token>((bits >> i) & 1U);
            ++inputs;
            const auto out = apply_method(m, s);
            if (out.is_suspend()) continue;
            // k/n differs from the witness.
            o.require(out.hypothesis().real_value() != w.value, "witness output on some input");
        }
    }
    o.require(inputs == 65535, "enumerated " + std::to_string(inputs));
    const auto w4 = cardinality_witness(m, 4);
    o.require(w4.value == Rational(1, 8), "d=4 value " + format_rational(w4.value));
    if (o.ok) o.detail = "d=15 value " + format_rational(w.value) + " avoided on 65535 inputs; d=4 value 0.125";
    return o;
}

Outcome c7_success_sets() {
    Outcome o;
    const auto p = problems::fine_grained_raven(raven_grid(), kSeed);
    const auto m = methods::raven_rule();
    for (const auto& w : p.worlds.members) {
        const Rational theta = w.measure->theta();
        Rational power = 1;
        for (std::size_t n = 0; n <= 30; ++n) {
            const auto e = success_set_prob(p, m, w, n, 30, {});
            o.require(e.exact_value == std::optional<Rational>(1 - power), w.id + " n=" + std::to_string(n));
            power *= theta;
        }
    }
    curve7(1, &o);
    EngineOptions opts;
    opts.trials = 100000;
    opts.seed = kSeed;
    for (const auto& w : p.worlds.members) {
        o.require(success_set_monotone(p, m, w, 0, 30, 30, opts), "success_set_monotone failed on " + w.id);
    }
    if (o.ok) o.detail = "exact 1 - p^n for n <= 30; MC (1e5) within 4 sd; inclusion for all n <= n' <= 30";
    return o;
}

Outcome c8_hierarchy() {
    Outcome o;
    const std::vector<std::vector<Rational>> grids{
        {Rational(3, 10), kHalf, Rational(9, 10), 1}, {Rational(1, 10), Rational(7, 10), 1}, {0, Rational(4, 5)}};
    std::size_t nonvacuous = 0;
    for (const auto& grid : grids) {
        const auto p = problems::fine_grained_raven(grid, kSeed);
        const auto m = methods::raven_rule();
        ModeParams params;
        params.horizon = 60;
        params.mode = Mode::I;
        const auto v1 = check_mode(p, m, params);
        if (v1.status != VerdictStatus::SupportedAtHorizon) continue;
        ++nonvacuous;
        params.mode = Mode::II;
        params.delta = Rational(1, 20);
        const auto v2 = check_mode(p, m, params);
        params.mode = Mode::III;
        params.epsilon = Rational(1, 2);
        const auto v3 = check_mode(p, m, params);
        o.require(v2.status == VerdictStatus::SupportedAtHorizon, "mode II " + to_string(v2.status) + " on " + p.worlds.grid);
        o.require(v3.status == VerdictStatus::SupportedAtHorizon, "mode III " + to_string(v3.status) + " on " + p.worlds.grid);
    }
    o.require(nonvacuous > 0, "mode I never supported, implication untested");
    if (o.ok) o.detail = std::to_string(nonvacuous) + " of " + std::to_string(grids.size()) + " grids with mode I supported";
    return o;
}

Outcome c9_erm_mode_three() {
    Outcome o;
    Verdict v;
    curve9(1, &v);
    o.require(v.status == VerdictStatus::SupportedAtHorizon, "status " + to_string(v.status));
    std::string ns;
    for (const auto& w : v.worlds) ns += " " + w.world_id + ":N=" + (w.threshold ? std::to_string(*w.threshold) : "-");
    o.detail = o.ok ? "SUPPORTED_AT_HORIZON;" + ns : o.detail + ";" + ns;
    return o;
}

Outcome c10_determinism() {
    Outcome o;
    o.require(curve3(1) == curve3(8), "criterion 3 curve differs between 1 and 8 threads");
    o.require(curve7(1) == curve7(8), "criterion 7 curve differs between 1 and 8 threads");
    o.require(curve9(1) == curve9(8), "criterion 9 curve differs between 1 and 8 threads");
    if (o.ok) o.detail = "curve CSVs of criteria 3, 7, 9 byte-identical";
    return o;
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "Bernoulli bound dominance, frequency estimator", "exact rationals, no tolerance", 5, c1_bound_dominance},
        {2, "fair-coin test on-truth curve", "exact rationals, no tolerance", 5, c2_fair_coin_on_truth},
        {3, "fair-coin test off-truth at theta=0.9, n=1296", "MC 1e5 trials, 4 stderr", 60, c3_fair_coin_off_truth},
        {4, "easy raven mode I at T=100", "exact", 1, c4_easy_raven_mode_one},
        {5, "fair coin mode I refuted, witness through n=64", "exact", 1, c5_fair_coin_refuted},
        {6, "cardinality witness at d=15 and d=4", "exact rationals", 30, c6_cardinality},
        {7, "success-set law 1 - p^n, n <= 30", "exact; MC 1e5 trials, 4 sd at the exact probability", 60, c7_success_sets},
        {8, "mode I implies modes II and III on fine-grained raven, T=60", "MC margin 3 stderr", 60, c8_hierarchy},
        {9, "ERM mode III, eps=0.05, delta=0.1, T=500", "1e4 trials/stage, MC margin 3 stderr", 120,
         c9_erm_mode_three},
        {10, "determinism under 1 and 8 threads", "byte-identical CSV", 600, c10_determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.limit_s;
        const bool pass = o.ok && in_time;
        failures += !pass;
        std::printf("[%s] criterion %2d: %s | tolerance: %s | runtime %.2f s (limit %.0f s)%s | %s\n",
                    pass ? "PASS" : "FAIL", c.id, c.title, c.tolerance, secs, c.limit_s,
                    in_time ? "" : " OVER LIMIT", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
