#include "convlab/methods.hpp"

#include "convlab/errors.hpp"
#include "convlab/problems.hpp"

#include <algorithm>
#include <cmath>

namespace convlab::methods {

namespace {

void require_binary(std::span<const Token> seq, const char* method) {
    for (Token t : seq) {
        if (t > 1) throw DomainError(std::string(method) + ": non-binary token " + std::to_string(t));
    }
}

/// Sign-free comparison of |2k - n|^4 against 16 n^3.
int compare_deviation(std::size_t n, std::size_t ones) {
    if (n < (std::size_t{1} << 30U)) {
        // Both sides stay below 2^126.
        using u128 = unsigned __int128;
        const u128 d = 2 * ones >= n ? u128(2 * ones - n) : u128(n - 2 * ones);
        const u128 lhs = d * d * d * d;
        const u128 rhs = u128(16) * n * n * n;
        return lhs < rhs ? -1 : (lhs == rhs ? 0 : 1);
    }
    const BigInt deviation = BigInt(2 * ones) - BigInt(n);
    const BigInt lhs = deviation * deviation * deviation * deviation;
    const BigInt rhs = BigInt(16) * BigInt(n) * BigInt(n) * BigInt(n);
    return lhs < rhs ? -1 : (lhs == rhs ? 0 : 1);
}

} // namespace

std::size_t count_ones(std::span<const Token> seq) {
    return static_cast<std::size_t>(std::count(seq.begin(), seq.end(), Token{1}));
}

bool fair_coin_accepts(std::size_t n, std::size_t ones) {
    if (n == 0) throw DomainError("fair coin test is undefined at n = 0");
    return compare_deviation(n, ones) < 0;
}

bool fair_coin_on_boundary(std::size_t n, std::size_t ones) { return n > 0 && compare_deviation(n, ones) == 0; }

double fair_coin_threshold(std::size_t n) {
    if (n == 0) throw DomainError("threshold undefined at n = 0");
    return std::pow(static_cast<double>(n), -0.25);
}

InferenceMethod raven_rule() {
    return InferenceMethod("raven-rule", 2, true, [](std::span<const Token> seq) -> MethodOutput {
        require_binary(seq, "raven-rule");
        const bool saw_zero = std::find(seq.begin(), seq.end(), Token{0}) != seq.end();
        return Hypothesis::label(saw_zero ? problems::kNo : problems::kYes);
    });
}

InferenceMethod fair_coin_test() {
    return InferenceMethod("fair-coin-test", 2, true, [](std::span<const Token> seq) -> MethodOutput {
        require_binary(seq, "fair-coin-test");
        if (seq.empty()) return MethodOutput::suspend();
        return Hypothesis::label(fair_coin_accepts(seq.size(), count_ones(seq)) ? problems::kFair : problems::kUnfair);
    });
}

InferenceMethod frequency_estimator() {
    return InferenceMethod("frequency-estimator", 2, true, [](std::span<const Token> seq) -> MethodOutput {
        require_binary(seq, "frequency-estimator");
        if (seq.empty()) return MethodOutput::suspend();
        return Hypothesis::real(Rational(static_cast<long long>(count_ones(seq)), static_cast<long long>(seq.size())));
    });
}

InferenceMethod erm(ErmConfig cfg) {
    if (cfg.hypothesis_order.empty()) throw ConfigError("erm needs a nonempty hypothesis order");
    if (cfg.feature_count == 0) throw ConfigError("erm needs a nonempty feature space");
    for (std::size_t i = 0; i < cfg.hypothesis_order.size(); ++i) {
        if (cfg.hypothesis_order[i].labels.size() != cfg.feature_count) {
            throw ConfigError("classifier '" + cfg.hypothesis_order[i].name + "' is not total on X");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (cfg.hypothesis_order[i] == cfg.hypothesis_order[j]) {
                throw ConfigError("hypothesis order lists a classifier twice: " + cfg.hypothesis_order[i].name);
            }
        }
    }

    const std::size_t features = cfg.feature_count;
    return InferenceMethod(
        "erm", 2 * features, false, [order = std::move(cfg.hypothesis_order), features](std::span<const Token> seq) {
            // counts[t] = occurrences of example token t.
            std::vector<std::size_t> counts(2 * features, 0);
            for (Token t : seq) {
                if (problems::token_feature(t) >= features) {
                    throw DomainError("erm: feature index " + std::to_string(problems::token_feature(t)) +
                                      " outside X");
                }
                ++counts[t];
            }
            std::size_t best = 0;
            std::size_t best_errors = seq.size() + 1;
            for (std::size_t i = 0; i < order.size(); ++i) {
                std::size_t errors = 0;
                for (std::size_t x = 0; x < features; ++x) {
                    errors += counts[problems::example_token(x, static_cast<std::uint8_t>(1 - order[i].predict(x)))];
                }
                if (errors < best_errors) {
                    best = i;
                    best_errors = errors;
                }
            }
            return MethodOutput(Hypothesis::classifier(order[best]));
        });
}

} // namespace convlab::methods
