#pragma once

// D1: active-learning prioritization (TERMINATOR).
//
// Tests run in seeded random order until the first failure. From then on a
// linear classifier over each test's recent outcome history is refit after
// every reveal. Revealed failures are positives; revealed passes are
// negatives, and while there are none a few unexecuted tests are presumed
// negative. Until n1 failures have been seen the next test is the one whose
// predicted probability is closest to 0.5 (uncertainty sampling); afterwards
// it is the most probable failure (certainty sampling).

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "tcpbench/prioritizers/common.hpp"
#include "tcpbench/prioritizers/linear_svm.hpp"

namespace tcpbench {

struct TerminatorConfig {
    std::size_t n1 = 2;
    std::size_t feature_window = 10;
    /// Upper bound on presumed negatives per round; the round uses
    /// min(revealed failures, this).
    std::size_t presumed_negatives = 10;
    LinearSvm::Params svm{};
    bool keep_trace = false;

    void validate() const {
        if (n1 < 1) throw Error("n1 must be at least 1");
        if (feature_window < 1) throw Error("feature_window must be at least 1");
    }
};

enum class SamplingMode { Random, Uncertainty, Certainty, Fallback };

struct TerminatorStep {
    TestId chosen;
    SamplingMode mode;
    Outcome outcome;
    /// Predicted failure probabilities of the candidates at selection time.
    std::vector<std::pair<TestId, double>> probabilities;
};

struct TerminatorResult {
    Ordering ordering;
    std::vector<TerminatorStep> trace;
};

template <class Model>
TerminatorResult terminator_prioritize(const HistoryPrefix& prior, ExecutionOracle& oracle,
                                       const TerminatorConfig& cfg, std::uint64_t seed, Model& model,
                                       const Deadline& deadline = {}) {
    cfg.validate();
    auto tests = oracle.tests();
    const auto n_registry = prior.registry().test_count();

    Rng rng(seed);
    auto prio = tie_priorities(n_registry, tests, rng);

    std::vector<std::vector<double>> features(n_registry);
    std::vector<double> norm(n_registry, 0.0);
    for (auto t : tests) {
        features[t] = prior.recent_outcomes(t, cfg.feature_window);
        double s = 0.0;
        for (double x : features[t]) s += x * x;
        norm[t] = std::sqrt(s);
    }

    std::vector<TestId> pending(tests.begin(), tests.end());
    std::sort(pending.begin(), pending.end(), [&](TestId a, TestId b) { return prio[a] < prio[b]; });
    std::vector<TestId> fails, passes;
    TerminatorResult result;
    result.ordering.tests.reserve(tests.size());
    std::vector<TrainingExample> train;
    std::vector<std::pair<TestId, double>> probs;

    // Index into `pending` of the best candidate under `better`, ties going
    // to the lower random priority.
    auto pick = [&](auto&& key) {
        std::size_t best = 0;
        double kb = detail::tie_key(key(pending[0]));
        for (std::size_t i = 1; i < pending.size(); ++i) {
            double ki = detail::tie_key(key(pending[i]));
            if (ki > kb || (ki == kb && prio[pending[i]] < prio[pending[best]])) {
                best = i;
                kb = ki;
            }
        }
        return best;
    };

    while (!pending.empty()) {
        deadline.check();
        std::size_t idx = 0;
        SamplingMode mode = SamplingMode::Random;
        probs.clear();

        if (!fails.empty()) {
            train.clear();
            for (auto t : fails) train.push_back({t, features[t], +1});
            for (auto t : passes) train.push_back({t, features[t], -1});
            if (passes.empty()) {
                std::size_t want = std::min({fails.size(), cfg.presumed_negatives, pending.size()});
                std::vector<TestId> pool(pending);
                for (std::size_t k = 0; k < want; ++k) {
                    auto j = k + static_cast<std::size_t>(rng.below(pool.size() - k));
                    std::swap(pool[k], pool[j]);
                    train.push_back({pool[k], features[pool[k]], -1});
                }
            }
            bool two_classes = std::any_of(train.begin(), train.end(), [](const auto& e) { return e.label < 0; });
            if (!two_classes) {
                mode = SamplingMode::Fallback;
                idx = pick([&](TestId t) { return norm[t]; });
            } else {
                model.fit(std::span<const TrainingExample>(train));
                std::vector<double> p(n_registry, 0.0);
                for (auto t : pending) {
                    p[t] = model.probability(t, features[t]);
                    if (cfg.keep_trace) probs.emplace_back(t, p[t]);
                }
                if (fails.size() < cfg.n1) {
                    mode = SamplingMode::Uncertainty;
                    idx = pick([&](TestId t) { return -std::abs(p[t] - 0.5); });
                } else {
                    mode = SamplingMode::Certainty;
                    idx = pick([&](TestId t) { return p[t]; });
                }
            }
        }

        TestId chosen = pending[idx];
        pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(idx));
        Outcome got = oracle.reveal(chosen);
        (got == Outcome::Fail ? fails : passes).push_back(chosen);
        result.ordering.tests.push_back(chosen);
        if (cfg.keep_trace) result.trace.push_back({chosen, mode, got, probs});
    }
    return result;
}

inline TerminatorResult terminator_prioritize(const HistoryPrefix& prior, ExecutionOracle& oracle,
                                              const TerminatorConfig& cfg, std::uint64_t seed,
                                              const Deadline& deadline = {}) {
    LinearSvm model(cfg.svm);
    return terminator_prioritize(prior, oracle, cfg, seed, model, deadline);
}

} // namespace tcpbench
