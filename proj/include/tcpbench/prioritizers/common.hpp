#pragma once

// Shared vocabulary for prioritizers: orderings, the per-build execution
// oracle, deadlines and seeded metric ranking.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcpbench/history.hpp"
#include "tcpbench/rng.hpp"

namespace tcpbench {

/// Execution order for the tests of one build.
struct Ordering {
    std::vector<TestId> tests;

    std::size_t size() const noexcept { return tests.size(); }

    std::vector<std::string> names(const BuildHistory& h) const {
        std::vector<std::string> out;
        out.reserve(tests.size());
        for (auto t : tests) out.push_back(h.test_name(t));
        return out;
    }

    /// 1-based position of `t`, or 0 when absent.
    std::size_t rank_of(TestId t) const {
        auto it = std::find(tests.begin(), tests.end(), t);
        return it == tests.end() ? 0 : static_cast<std::size_t>(it - tests.begin()) + 1;
    }

    friend bool operator==(const Ordering&, const Ordering&) = default;
};

/// True when `o` lists every test in `members` exactly once and nothing else.
inline bool is_permutation_of(const Ordering& o, std::span<const TestId> members) {
    if (o.tests.size() != members.size()) return false;
    std::vector<TestId> a(o.tests), b(members.begin(), members.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

class TimedOut : public Error {
public:
    TimedOut() : Error("deadline exceeded") {}
};

class Deadline {
public:
    using clock = std::chrono::steady_clock;

    Deadline() = default;
    explicit Deadline(clock::duration budget) : at_(clock::now() + budget) {}

    bool expired() const { return at_ && clock::now() >= *at_; }

    void check() const {
        if (expired()) throw TimedOut();
    }

private:
    std::optional<clock::time_point> at_;
};

/// Hidden ground truth for the build being prioritized. Adaptive schemes
/// learn outcomes one test at a time, each at most once.
class ExecutionOracle {
public:
    explicit ExecutionOracle(const BuildRecord& build)
        : truth_(build.outcomes), revealed_(build.outcomes.size(), false), tests_(build.present_tests()) {}

    std::span<const TestId> tests() const noexcept { return tests_; }
    std::size_t size() const noexcept { return tests_.size(); }

    Outcome reveal(TestId t) {
        if (t >= truth_.size() || truth_[t] == Outcome::Absent)
            throw Error("reveal of a test that is not part of this build");
        if (revealed_[t]) throw Error("test revealed twice");
        revealed_[t] = true;
        ++reveals_;
        return truth_[t];
    }

    bool revealed(TestId t) const { return t < revealed_.size() && revealed_[t]; }
    std::size_t reveal_count() const noexcept { return reveals_; }

    /// Full ground truth. Only the omniscient baseline may call this.
    std::vector<TestId> omniscient_failures() const {
        std::vector<TestId> out;
        for (auto t : tests_)
            if (truth_[t] == Outcome::Fail) out.push_back(t);
        return out;
    }

private:
    std::vector<Outcome> truth_;
    std::vector<bool> revealed_;
    std::vector<TestId> tests_;
    std::size_t reveals_ = 0;
};

namespace detail {

/// Collapses floating-point noise so mathematically equal metrics tie.
inline double tie_key(double x) {
    if (!std::isfinite(x)) return x;
    return std::round(x * 1e12);
}

} // namespace detail

enum class Direction { Ascending, Descending };

/// Sorts `tests` by `metric`, breaking ties uniformly at random under `seed`.
template <class Metric>
Ordering rank_by_metric(std::span<const TestId> tests, Metric&& metric, Direction dir, std::uint64_t seed) {
    struct Keyed {
        TestId t;
        double key;
    };
    std::vector<Keyed> items;
    items.reserve(tests.size());
    for (auto t : tests) items.push_back({t, detail::tie_key(metric(t))});
    Rng rng(seed);
    rng.shuffle(items);
    if (dir == Direction::Descending)
        std::stable_sort(items.begin(), items.end(), [](const Keyed& a, const Keyed& b) { return a.key > b.key; });
    else
        std::stable_sort(items.begin(), items.end(), [](const Keyed& a, const Keyed& b) { return a.key < b.key; });
    Ordering o;
    o.tests.reserve(items.size());
    for (const auto& k : items) o.tests.push_back(k.t);
    return o;
}

/// Random priority for tie-breaking inside adaptive selection loops: lower
/// value wins among equal scores.
inline std::vector<std::uint32_t> tie_priorities(std::size_t n_registry, std::span<const TestId> tests, Rng& rng) {
    std::vector<TestId> perm(tests.begin(), tests.end());
    rng.shuffle(perm);
    std::vector<std::uint32_t> prio(n_registry, std::numeric_limits<std::uint32_t>::max());
    for (std::size_t i = 0; i < perm.size(); ++i) prio[perm[i]] = static_cast<std::uint32_t>(i);
    return prio;
}

} // namespace tcpbench
