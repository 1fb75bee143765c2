#pragma once

// APFD, mean fault-detection curves and median/IQR summaries.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "tcpbench/prioritizers/common.hpp"

namespace tcpbench {

/// One prioritized run: its size and the sorted 1-based ranks at which
/// failing tests were executed.
struct ApfdInput {
    std::size_t n = 0;
    std::vector<std::size_t> fault_positions;

    std::size_t m() const noexcept { return fault_positions.size(); }

    void validate() const {
        if (fault_positions.empty()) throw Error("no faults in run");
        if (n < 1 || fault_positions.size() > n) throw Error("fault count exceeds run size");
        for (std::size_t i = 0; i < fault_positions.size(); ++i) {
            auto p = fault_positions[i];
            if (p < 1 || p > n) throw Error("fault position outside 1..n");
            if (i > 0 && p <= fault_positions[i - 1]) throw Error("fault positions must be strictly increasing");
        }
    }
};

/// 1 - sum(TC_i) / (n m) + 1 / (2 n)
inline double apfd(const ApfdInput& in) {
    in.validate();
    const double n = static_cast<double>(in.n);
    const double m = static_cast<double>(in.m());
    const double sum = static_cast<double>(std::accumulate(in.fault_positions.begin(), in.fault_positions.end(),
                                                           std::size_t{0}));
    return 1.0 - sum / (n * m) + 1.0 / (2.0 * n);
}

inline ApfdInput fault_ranks(const Ordering& ordering, const BuildRecord& truth) {
    ApfdInput in{ordering.size(), {}};
    for (std::size_t i = 0; i < ordering.tests.size(); ++i)
        if (truth.outcome(ordering.tests[i]) == Outcome::Fail) in.fault_positions.push_back(i + 1);
    return in;
}

inline double apfd_from_ordering(const Ordering& ordering, const BuildRecord& truth) {
    return apfd(fault_ranks(ordering, truth));
}

struct DetectionCurve {
    std::vector<std::size_t> x;  // tests executed, 1..max run size
    std::vector<double> y;       // mean fraction of failures found
};

/// Pointwise mean over runs of (failures found in the first k)/(failures in
/// the run). A run shorter than k contributes 1.
inline DetectionCurve detection_curve(std::span<const ApfdInput> runs) {
    DetectionCurve c;
    if (runs.empty()) return c;
    std::size_t kmax = 0;
    for (const auto& r : runs) kmax = std::max(kmax, r.n);
    c.x.resize(kmax);
    c.y.assign(kmax, 0.0);
    std::iota(c.x.begin(), c.x.end(), std::size_t{1});
    for (const auto& r : runs) {
        r.validate();
        std::size_t found = 0;
        for (std::size_t k = 1; k <= kmax; ++k) {
            while (found < r.m() && r.fault_positions[found] <= k) ++found;
            c.y[k - 1] += static_cast<double>(found) / static_cast<double>(r.m());
        }
    }
    for (auto& v : c.y) v /= static_cast<double>(runs.size());
    return c;
}

/// Percentile with linear interpolation between closest ranks
/// (h = (N - 1) q, the "type 7" rule). `sorted` must be ascending.
inline double percentile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw Error("percentile of an empty list");
    double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    auto lo = static_cast<std::size_t>(std::floor(h));
    auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct Summary {
    double median = 0.0;
    double iqr = 0.0;
};

inline Summary summarize(std::span<const double> values) {
    if (values.empty()) throw Error("cannot summarize an empty list");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    return {percentile_sorted(v, 0.5), percentile_sorted(v, 0.75) - percentile_sorted(v, 0.25)};
}

inline double median(std::span<const double> values) { return summarize(values).median; }

} // namespace tcpbench
