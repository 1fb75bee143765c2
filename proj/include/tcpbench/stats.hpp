#pragma once

// Scott-Knott ranking of treatments, with Cliff's delta as the test that
// decides whether a split is kept.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tcpbench/metrics.hpp"

namespace tcpbench {

/// Cliff's delta magnitude below which an effect counts as "small".
inline constexpr double kSmallEffect = 0.147;

struct Treatment {
    std::string id;
    std::vector<double> observations;
};

/// (#{x > y} - #{x < y}) / (|a| |b|) over all pairs x in a, y in b.
inline double cliffs_delta(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw Error("cliffs_delta needs two nonempty lists");
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sb.begin(), sb.end());
    long long net = 0;
    for (double x : a) {
        auto less = std::lower_bound(sb.begin(), sb.end(), x) - sb.begin();
        auto greater = sb.end() - std::upper_bound(sb.begin(), sb.end(), x);
        net += static_cast<long long>(less) - static_cast<long long>(greater);
    }
    return static_cast<double>(net) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

struct SkSplit {
    std::vector<Treatment> left;
    std::vector<Treatment> right;
    double delta_gain = 0.0;
};

namespace detail {

inline std::vector<double> pooled(std::span<const Treatment> ts) {
    std::vector<double> out;
    for (const auto& t : ts) out.insert(out.end(), t.observations.begin(), t.observations.end());
    return out;
}

inline double mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Index of the first right-hand treatment in the best split and its gain.
inline std::pair<std::size_t, double> best_cut(std::span<const Treatment> ts) {
    if (ts.size() < 2) throw Error("a split needs at least two treatments");
    for (const auto& t : ts)
        if (t.observations.empty()) throw Error("treatment '" + t.id + "' has no observations");
    auto all = pooled(ts);
    const double mu = mean(all);
    const double n = static_cast<double>(all.size());
    std::size_t best = 1;
    double best_gain = -1.0;
    for (std::size_t cut = 1; cut < ts.size(); ++cut) {
        auto l = pooled(ts.first(cut));
        auto r = pooled(ts.subspan(cut));
        double dl = mean(l) - mu;
        double dr = mean(r) - mu;
        double gain = static_cast<double>(l.size()) / n * std::abs(dl * dl) +
                      static_cast<double>(r.size()) / n * std::abs(dr * dr);
        if (gain > best_gain) {
            best_gain = gain;
            best = cut;
        }
    }
    return {best, best_gain};
}

} // namespace detail

/// Every prefix/suffix division of n ordered treatments, as (|l1|, |l2|).
inline std::vector<std::pair<std::size_t, std::size_t>> candidate_splits(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t k = 1; k < n; ++k) out.emplace_back(k, n - k);
    return out;
}

/// Split of median-sorted treatments maximising
///   |l1|/|l| * abs(mean(l1) - mean(l))^2 + |l2|/|l| * abs(mean(l2) - mean(l))^2
/// with sizes and means over pooled observations. First maximum wins.
inline SkSplit best_split(std::span<const Treatment> sorted) {
    auto [cut, gain] = detail::best_cut(sorted);
    return {{sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(cut)},
            {sorted.begin() + static_cast<std::ptrdiff_t>(cut), sorted.end()},
            gain};
}

struct RankEntry {
    std::string what;
    bool available = true;  // false for schemes that did not finish
    int rank = 0;
    double median = 0.0;
    double iqr = 0.0;
};

struct RankReport {
    std::vector<RankEntry> rows;

    const RankEntry& at(std::string_view what) const {
        for (const auto& r : rows)
            if (r.what == what) return r;
        throw Error("no treatment '" + std::string(what) + "' in report");
    }
    int rank_of(std::string_view what) const { return at(what).rank; }
    int group_count() const {
        int g = 0;
        for (const auto& r : rows)
            if (r.available) g = std::max(g, r.rank);
        return g;
    }
};

/// Ranks ascend from the worst median (rank 1).
inline RankReport scott_knott(std::vector<Treatment> treatments, double small_effect = kSmallEffect) {
    RankReport report;
    if (treatments.empty()) return report;
    for (const auto& t : treatments)
        if (t.observations.empty()) throw Error("treatment '" + t.id + "' has no observations");
    std::vector<std::size_t> order(treatments.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<Summary> s(treatments.size());
    for (std::size_t i = 0; i < treatments.size(); ++i) s[i] = summarize(treatments[i].observations);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (s[a].median != s[b].median) return s[a].median < s[b].median;
        return treatments[a].id < treatments[b].id;
    });
    std::vector<Treatment> sorted;
    std::vector<Summary> sorted_summary;
    for (auto i : order) {
        sorted.push_back(std::move(treatments[i]));
        sorted_summary.push_back(s[i]);
    }

    // Group boundaries as start indices, filled by recursive splitting.
    std::vector<std::size_t> starts;
    auto recurse = [&](auto&& self, std::size_t lo, std::size_t hi) -> void {
        if (hi - lo >= 2) {
            std::span<const Treatment> part(sorted.data() + lo, hi - lo);
            auto [cut, gain] = detail::best_cut(part);
            auto l = detail::pooled(part.first(cut));
            auto r = detail::pooled(part.subspan(cut));
            if (std::abs(cliffs_delta(l, r)) >= small_effect) {
                self(self, lo, lo + cut);
                self(self, lo + cut, hi);
                return;
            }
        }
        starts.push_back(lo);
    };
    recurse(recurse, 0, sorted.size());

    int rank = 0;
    std::size_t next = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (next < starts.size() && starts[next] == i) {
            ++rank;
            ++next;
        }
        report.rows.push_back({sorted[i].id, true, rank, sorted_summary[i].median, sorted_summary[i].iqr});
    }
    return report;
}

namespace detail {

inline std::string fixed(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

} // namespace detail

/// Aligned table in rank / what / med / IQR columns.
inline void write_rank_table(std::ostream& out, const RankReport& r) {
    out << std::left << std::setw(6) << "rank" << std::setw(6) << "what" << std::setw(7) << "med" << "IQR\n";
    for (const auto& e : r.rows) {
        if (!e.available) {
            out << std::setw(6) << "n/a" << std::setw(6) << e.what << std::setw(7) << "n/a" << "n/a\n";
            continue;
        }
        out << std::setw(6) << e.rank << std::setw(6) << e.what << std::setw(7) << detail::fixed(e.median, 2)
            << detail::fixed(e.iqr, 2) << '\n';
    }
}

inline void write_rank_csv(std::ostream& out, const RankReport& r) {
    out << "rank,what,med,iqr\n";
    for (const auto& e : r.rows) {
        if (!e.available) {
            out << "n/a," << e.what << ",n/a,n/a\n";
            continue;
        }
        out << e.rank << ',' << e.what << ',' << detail::fixed(e.median, 6) << ',' << detail::fixed(e.iqr, 6)
            << '\n';
    }
}

} // namespace tcpbench
