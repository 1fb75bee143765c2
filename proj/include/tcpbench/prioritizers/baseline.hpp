#pragma once

// Group A baselines: random (A1) and omniscient (A2).

#include <span>

#include "tcpbench/prioritizers/common.hpp"

namespace tcpbench {

inline Ordering prioritize_random(std::span<const TestId> tests, std::uint64_t seed) {
    Ordering o{std::vector<TestId>(tests.begin(), tests.end())};
    Rng rng(seed);
    rng.shuffle(o.tests);
    return o;
}

/// Failing tests first, each group internally shuffled.
inline Ordering prioritize_optimal(std::span<const TestId> tests, std::span<const TestId> failing,
                                   std::uint64_t seed) {
    return rank_by_metric(
        tests,
        [&](TestId t) { return std::find(failing.begin(), failing.end(), t) != failing.end() ? 1.0 : 0.0; },
        Direction::Descending, seed);
}

inline Ordering prioritize_optimal(const ExecutionOracle& oracle, std::uint64_t seed) {
    auto failing = oracle.omniscient_failures();
    return prioritize_optimal(oracle.tests(), failing, seed);
}

} // namespace tcpbench
