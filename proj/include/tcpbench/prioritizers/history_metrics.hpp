#pragma once

// Group B: rank tests by a metric over their own prior outcomes.
//
// Every metric is defined on the binary outcome vector of a test (1 = Fail,
// oldest first, builds where the test was absent skipped). A test with no
// prior presence gets the neutral value: +inf for time-since-last-failure
// (ranked last), 0 for the others.

#include <cstdint>
#include <limits>
#include <span>

#include "tcpbench/prioritizers/common.hpp"

namespace tcpbench {

struct DecayParams {
    double alpha = 0.9;

    void validate() const {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must lie in [0, 1]");
    }
};

/// Recency weights: w1 for the previous build, w2 for the one before, w_rest
/// for everything older.
struct RocketWeights {
    double w1 = 0.7;
    double w2 = 0.2;
    double w_rest = 0.1;

    void validate() const {
        if (!(w1 > 0 && w2 > 0 && w_rest > 0)) throw Error("ROCKET weights must be positive");
    }

    double at_distance(std::size_t d) const { return d == 1 ? w1 : d == 2 ? w2 : w_rest; }
};

/// Number of trailing passes; the full length if the test never failed.
inline double time_since_last_failure(std::span<const std::uint8_t> v) {
    if (v.empty()) return std::numeric_limits<double>::infinity();
    std::size_t n = 0;
    for (auto it = v.rbegin(); it != v.rend() && *it == 0; ++it) ++n;
    return static_cast<double>(n);
}

inline double failure_rate(std::span<const std::uint8_t> v) {
    if (v.empty()) return 0.0;
    std::size_t fails = 0;
    for (auto b : v) fails += b;
    return static_cast<double>(fails) / static_cast<double>(v.size());
}

/// P = v[0], then P = alpha * v[k] + (1 - alpha) * P for each later record.
inline double exp_decay(std::span<const std::uint8_t> v, const DecayParams& p = {}) {
    if (v.empty()) return 0.0;
    double acc = v[0];
    for (std::size_t k = 1; k < v.size(); ++k) acc = p.alpha * v[k] + (1.0 - p.alpha) * acc;
    return acc;
}

inline double rocket_score(std::span<const std::uint8_t> v, const RocketWeights& w = {}) {
    double s = 0.0;
    for (std::size_t d = 1; d <= v.size(); ++d)
        if (v[v.size() - d]) s += w.at_distance(d);
    return s;
}

inline double time_since_last_failure(const HistoryPrefix& prior, TestId t) {
    return time_since_last_failure(prior.outcome_vector(t));
}
inline double failure_rate(const HistoryPrefix& prior, TestId t) { return failure_rate(prior.outcome_vector(t)); }
inline double exp_decay(const HistoryPrefix& prior, TestId t, const DecayParams& p = {}) {
    return exp_decay(prior.outcome_vector(t), p);
}
inline double rocket_score(const HistoryPrefix& prior, TestId t, const RocketWeights& w = {}) {
    return rocket_score(prior.outcome_vector(t), w);
}

// B1
inline Ordering prioritize_time_since_last_failure(const HistoryPrefix& prior, std::span<const TestId> tests,
                                                   std::uint64_t seed) {
    return rank_by_metric(tests, [&](TestId t) { return time_since_last_failure(prior, t); }, Direction::Ascending,
                          seed);
}

// B2
inline Ordering prioritize_failure_rate(const HistoryPrefix& prior, std::span<const TestId> tests,
                                        std::uint64_t seed) {
    return rank_by_metric(tests, [&](TestId t) { return failure_rate(prior, t); }, Direction::Descending, seed);
}

// B3
inline Ordering prioritize_exp_decay(const HistoryPrefix& prior, std::span<const TestId> tests,
                                     const DecayParams& p, std::uint64_t seed) {
    p.validate();
    return rank_by_metric(tests, [&](TestId t) { return exp_decay(prior, t, p); }, Direction::Descending, seed);
}

// B4
inline Ordering prioritize_rocket(const HistoryPrefix& prior, std::span<const TestId> tests,
                                  const RocketWeights& w, std::uint64_t seed) {
    w.validate();
    return rank_by_metric(tests, [&](TestId t) { return rocket_score(prior, t, w); }, Direction::Descending, seed);
}

} // namespace tcpbench
