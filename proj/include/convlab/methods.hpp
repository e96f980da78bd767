#pragma once

// The catalog inference methods.

#include "convlab/core.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace convlab::methods {

/// Yes exactly when the input contains no 0. Outputs Yes on the empty input.
InferenceMethod raven_rule();

/// Fair iff |k/n - 1/2| < n^(-1/4), Unfair otherwise, Suspend at n = 0.
InferenceMethod fair_coin_test();

/// The observed frequency of 1s as an exact rational; Suspend at n = 0.
InferenceMethod frequency_estimator();

struct ErmConfig {
    /// Candidate classifiers in tie-breaking order.
    std::vector<Classifier> hypothesis_order;
    std::size_t feature_count = 0;
};

/// Empirical risk minimization over a finite classifier set. Examples are
/// tokens 2x + y. Not count symmetric.
InferenceMethod erm(ErmConfig cfg);

std::size_t count_ones(std::span<const Token> seq);

/// The acceptance rule of fair_coin_test on n >= 1 tosses with `ones` heads,
/// decided in integer arithmetic: |2k - n|^4 < 16 n^3.
bool fair_coin_accepts(std::size_t n, std::size_t ones);

/// |k/n - 1/2| equals n^(-1/4) exactly, e.g. n = 16, k = 16.
bool fair_coin_on_boundary(std::size_t n, std::size_t ones);

/// n^(-1/4).
double fair_coin_threshold(std::size_t n);

} // namespace convlab::methods
