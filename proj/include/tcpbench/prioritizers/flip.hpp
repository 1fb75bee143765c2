#pragma once

// C2: flip correlation. A flip is a test changing outcome between two
// consecutive builds in which it was present. Two tests are correlated by the
// number of transitions where both flipped. The first test is the ROCKET
// maximum; each subsequent test is the one that flipped most often together
// with the test executed just before it.

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "tcpbench/prioritizers/history_metrics.hpp"

namespace tcpbench {

/// Per-test bitsets over transitions (j-1 -> j), j = 1..size-1.
class FlipIndex {
public:
    FlipIndex(const HistoryPrefix& prior, std::span<const TestId> tests)
        : words_(prior.size() > 1 ? (prior.size() - 1 + 63) / 64 : 0),
          bits_(prior.registry().test_count()) {
        for (auto t : tests) {
            auto& row = bits_[t];
            row.assign(words_, 0);
            for (std::size_t j = 1; j < prior.size(); ++j) {
                auto a = prior.outcome(j - 1, t);
                auto b = prior.outcome(j, t);
                if (a != Outcome::Absent && b != Outcome::Absent && a != b)
                    row[(j - 1) / 64] |= std::uint64_t{1} << ((j - 1) % 64);
            }
        }
    }

    std::size_t together(TestId a, TestId b) const {
        const auto& x = bits_[a];
        const auto& y = bits_[b];
        std::size_t n = 0;
        for (std::size_t w = 0; w < words_; ++w) n += static_cast<std::size_t>(std::popcount(x[w] & y[w]));
        return n;
    }

private:
    std::size_t words_;
    std::vector<std::vector<std::uint64_t>> bits_;
};

inline std::size_t simultaneous_flips(const HistoryPrefix& prior, TestId a, TestId b) {
    TestId pair[] = {a, b};
    return FlipIndex(prior, pair).together(a, b);
}

struct FlipStep {
    TestId anchor;
    std::vector<std::pair<TestId, std::size_t>> counts;
    TestId chosen;
};

struct FlipResult {
    Ordering ordering;
    std::vector<FlipStep> trace;
};

inline FlipResult flip_correlation_prioritize(const HistoryPrefix& prior, ExecutionOracle& oracle,
                                              const RocketWeights& w, std::uint64_t seed,
                                              const Deadline& deadline = {}) {
    w.validate();
    auto tests = oracle.tests();
    FlipResult result;
    if (tests.empty()) return result;

    auto first = rank_by_metric(tests, [&](TestId t) { return rocket_score(prior, t, w); }, Direction::Descending,
                                derive_seed(seed, 1));
    Rng rng(derive_seed(seed, 2));
    auto prio = tie_priorities(prior.registry().test_count(), tests, rng);
    FlipIndex flips(prior, tests);

    TestId anchor = first.tests.front();
    oracle.reveal(anchor);
    result.ordering.tests.push_back(anchor);
    std::vector<TestId> pending;
    for (auto t : tests)
        if (t != anchor) pending.push_back(t);

    while (!pending.empty()) {
        deadline.check();
        FlipStep step{anchor, {}, anchor};
        std::size_t best = 0, best_count = 0;
        for (std::size_t i = 0; i < pending.size(); ++i) {
            auto c = flips.together(anchor, pending[i]);
            step.counts.emplace_back(pending[i], c);
            if (i == 0 || c > best_count || (c == best_count && prio[pending[i]] < prio[pending[best]])) {
                best = i;
                best_count = c;
            }
        }
        anchor = pending[best];
        step.chosen = anchor;
        pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(best));
        oracle.reveal(anchor);
        result.ordering.tests.push_back(anchor);
        result.trace.push_back(std::move(step));
    }
    return result;
}

} // namespace tcpbench
