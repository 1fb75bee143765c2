#pragma once

// C1: co-failure scoring. Scores carry over between builds; within a build,
// each revealed failure shifts every unexecuted test t by
//   P(t fails | just-executed test failed) - 0.5
// with P estimated from prior builds in which both tests were present.

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcpbench/prioritizers/common.hpp"

namespace tcpbench {

struct CoFailureState {
    std::map<std::string, double> scores;

    double score(const std::string& test) const {
        auto it = scores.find(test);
        return it == scores.end() ? 0.0 : it->second;
    }

    friend bool operator==(const CoFailureState&, const CoFailureState&) = default;
};

inline void to_json(nlohmann::json& j, const CoFailureState& s) { j = nlohmann::json{{"scores", s.scores}}; }
inline void from_json(const nlohmann::json& j, CoFailureState& s) { j.at("scores").get_to(s.scores); }

struct CoFailureOptions {
    /// Also shift scores after passing reveals, using P(t fails | it passed).
    bool update_on_pass = false;
};

struct CoFailureStep {
    TestId executed;
    Outcome outcome;
    /// Scores of the still-unexecuted tests after the update.
    std::vector<std::pair<TestId, double>> scores;
};

struct CoFailureResult {
    Ordering ordering;
    CoFailureState state;
    std::vector<CoFailureStep> trace;
};

/// Empirical P(t == Fail | given == given_outcome) over the visible builds
/// where both tests are present; 0.5 when there is no such build.
inline double conditional_failure(const HistoryPrefix& prior, TestId t, TestId given, Outcome given_outcome) {
    std::size_t cond = 0, both = 0;
    for (std::size_t j = 0; j < prior.size(); ++j) {
        const auto& b = prior.build(j);
        if (b.outcome(given) != given_outcome) continue;
        auto o = b.outcome(t);
        if (o == Outcome::Absent) continue;
        ++cond;
        if (o == Outcome::Fail) ++both;
    }
    return cond == 0 ? 0.5 : static_cast<double>(both) / static_cast<double>(cond);
}

inline CoFailureResult cofailure_prioritize(const HistoryPrefix& prior, ExecutionOracle& oracle,
                                            CoFailureState state, std::uint64_t seed,
                                            const CoFailureOptions& opts = {}, const Deadline& deadline = {}) {
    const auto& reg = prior.registry();
    auto tests = oracle.tests();
    Rng rng(seed);
    auto prio = tie_priorities(reg.test_count(), tests, rng);

    std::vector<double> score(reg.test_count(), 0.0);
    for (auto t : tests) score[t] = state.score(reg.test_name(t));

    std::vector<TestId> pending(tests.begin(), tests.end());
    CoFailureResult result;
    result.ordering.tests.reserve(tests.size());

    while (!pending.empty()) {
        deadline.check();
        std::size_t best = 0;
        for (std::size_t i = 1; i < pending.size(); ++i) {
            auto ki = detail::tie_key(score[pending[i]]);
            auto kb = detail::tie_key(score[pending[best]]);
            if (ki > kb || (ki == kb && prio[pending[i]] < prio[pending[best]])) best = i;
        }
        TestId chosen = pending[best];
        pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(best));
        result.ordering.tests.push_back(chosen);

        Outcome got = oracle.reveal(chosen);
        if (got != Outcome::Fail && !opts.update_on_pass) continue;

        CoFailureStep step{chosen, got, {}};
        for (auto t : pending) {
            score[t] += conditional_failure(prior, t, chosen, got) - 0.5;
            step.scores.emplace_back(t, score[t]);
        }
        result.trace.push_back(std::move(step));
    }

    for (auto t : tests) state.scores[reg.test_name(t)] = score[t];
    result.state = std::move(state);
    return result;
}

} // namespace tcpbench
