#pragma once

// Constructors for the catalog problems: the easy raven problem and its
// fine-grained version, the fair coin and coin bias problems, and binary
// classification over a finite feature space.

#include "convlab/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace convlab::problems {

inline constexpr const char* kYes = "Yes";
inline constexpr const char* kNo = "No";
inline constexpr const char* kFair = "Fair";
inline constexpr const char* kUnfair = "Unfair";

/// D(x, y) stored at index example_token(x, y).
using Distribution = std::vector<Rational>;

constexpr Token example_token(std::size_t feature, std::uint8_t label) {
    return static_cast<Token>(2 * feature + label);
}
constexpr std::size_t token_feature(Token t) { return t / 2; }
constexpr std::uint8_t token_label(Token t) { return static_cast<std::uint8_t>(t % 2); }

struct ClassificationTask {
    std::vector<std::string> features;
    std::vector<Classifier> classifiers;
    std::vector<Distribution> distributions;

    /// Throws ConfigError unless every classifier is total on X and every
    /// distribution is a probability vector over X x {0,1}.
    void validate() const;
};

/// Probability of misclassification, summed exactly over {(x,y): h(x) != y}.
Rational risk(const Classifier& h, const Distribution& d);

/// Risk(h, D) - min over the pool of Risk(., D).
Rational excess_risk(const Classifier& h, const Distribution& d, const std::vector<Classifier>& pool);

/// Index of the lowest-index risk minimizer in `pool`.
std::size_t risk_minimizer(const Distribution& d, const std::vector<Classifier>& pool);

/// Coherent worlds: (first0@k, No) for k = 1..max_first_zero and
/// (all-1, Yes). With `literal_worlds`, the incoherent (first0@k, Yes)
/// worlds are added as well.
EmpiricalProblem easy_raven(std::size_t max_first_zero = 20, bool literal_worlds = false);

/// One world per p (the probability of a black raven, token 1). p = 1 gives
/// the point-mass extension of (all-1, Yes); p < 1 gives an IID world whose
/// truth is No, since the all-1 branch is a null event there.
EmpiricalProblem fine_grained_raven(const std::vector<Rational>& p_grid, std::uint64_t seed = 0);

/// {0, 0.1, ..., 1} together with 0.45 and 0.55.
std::vector<Rational> default_theta_grid();

EmpiricalProblem fair_coin(const std::vector<Rational>& theta_grid, std::uint64_t seed = 0);
EmpiricalProblem coin_bias(const std::vector<Rational>& theta_grid, std::uint64_t seed = 0);

EmpiricalProblem binary_classification(const ClassificationTask& task, std::uint64_t seed = 0);

/// X = {a, b}, H = [all-0, all-1, identity] and three distributions whose
/// unique risk minimizers are identity, all-1 and all-0 respectively, each
/// ahead of the runner-up by at least 0.2.
ClassificationTask two_feature_task();

} // namespace convlab::problems
