#include "convlab/convergence.hpp"

#include "convlab/errors.hpp"
#include "convlab/rng.hpp"
#include "detail.hpp"
#include "parallel.hpp"

#include <cmath>
#include <map>

namespace convlab::convergence {

SuccessEstimate mc_success_prob(const EmpiricalProblem& problem, const InferenceMethod& method, const World& world,
                                std::size_t n, const SuccessCriterion& crit, std::uint64_t trials,
                                std::uint64_t seed, unsigned threads) {
    if (!world.measure) throw PreconditionError("world '" + world.id + "' carries no probability measure");
    if (trials == 0) throw DomainError("mc_success_prob needs at least one trial");

    const Measure& measure = *world.measure;
    const std::uint64_t hits = detail::parallel_count(trials, threads, [&](std::uint64_t trial) {
        thread_local DataSequence buffer;
        measure.sample_prefix(rng::substream(seed, world.id, n, trial), n, buffer);
        return crit.met_by(loss_of(problem, apply_method(method, buffer), world));
    });

    SuccessEstimate e;
    e.trials = trials;
    e.estimate = static_cast<double>(hits) / static_cast<double>(trials);
    e.standard_error = std::sqrt(e.estimate * (1.0 - e.estimate) / static_cast<double>(trials));
    e.degenerate = e.standard_error == 0.0;
    return e;
}

SuccessCurve success_curve(const EmpiricalProblem& problem, const InferenceMethod& method,
                           std::span<const World> worlds, const SuccessCriterion& crit, std::size_t horizon,
                           const EngineOptions& options, std::span<const std::size_t> stages) {
    std::vector<std::size_t> stage_list(stages.begin(), stages.end());
    if (stage_list.empty()) {
        for (std::size_t n = 1; n <= horizon; ++n) stage_list.push_back(n);
    }
    for (const auto& w : worlds) {
        if (!w.measure) throw PreconditionError("world '" + w.id + "' carries no probability measure");
    }

    // points[w][s] filled stage by stage so that symmetric outputs and exact
    // values shared by worlds with the same measure and truth are computed once.
    std::vector<std::vector<CurvePoint>> grid(worlds.size(), std::vector<CurvePoint>(stage_list.size()));
    for (std::size_t s = 0; s < stage_list.size(); ++s) {
        const std::size_t n = stage_list[s];
        std::optional<std::vector<MethodOutput>> symmetric;
        std::map<std::pair<std::string, std::string>, SuccessEstimate> shared;

        for (std::size_t wi = 0; wi < worlds.size(); ++wi) {
            const World& world = worlds[wi];
            CurvePoint& point = grid[wi][s];
            point.world_id = world.id;
            point.n = n;
            point.bound = analytic_bound(problem, method, world, n, crit);

            switch (detail::choose_exact_path(method, world, n, options)) {
            case detail::ExactPath::Binomial: {
                const auto key = std::make_pair(format_rational(world.measure->theta()), world.truth.to_string());
                if (auto it = shared.find(key); it != shared.end()) {
                    point.value = it->second;
                    break;
                }
                if (!symmetric) symmetric = detail::symmetric_outputs(method, n);
                point.value = detail::binomial_success(problem, world, n, crit, *symmetric, options);
                shared.emplace(key, point.value);
                break;
            }
            case detail::ExactPath::PointMass:
            case detail::ExactPath::Enumeration:
                point.value = exact_success_prob(problem, method, world, n, crit, options);
                break;
            case detail::ExactPath::None:
                point.value =
                    mc_success_prob(problem, method, world, n, crit, options.trials, options.seed, options.threads);
                break;
            }
        }
    }

    SuccessCurve curve{problem.name, method.name(), crit.to_string(), {}};
    for (auto& row : grid) {
        for (auto& point : row) curve.points.push_back(std::move(point));
    }
    return curve;
}

} // namespace convlab::convergence
