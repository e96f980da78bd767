#pragma once

#include "convlab/convergence.hpp"

#include <vector>

namespace convlab::convergence::detail {

/// Outputs of a count-symmetric method on the canonical sequences 1^k 0^(n-k),
/// k = 0..n.
std::vector<MethodOutput> symmetric_outputs(const InferenceMethod& method, std::size_t n);

/// Binomial-sum success probability given precomputed symmetric outputs.
SuccessEstimate binomial_success(const EmpiricalProblem& problem, const World& world, std::size_t n,
                                 const SuccessCriterion& crit, const std::vector<MethodOutput>& outputs,
                                 const EngineOptions& options);

enum class ExactPath { None, PointMass, Binomial, Enumeration };

ExactPath choose_exact_path(const InferenceMethod& method, const World& world, std::size_t n,
                            const EngineOptions& options);

bool is_raven_rule(const InferenceMethod& method);

} // namespace convlab::convergence::detail
