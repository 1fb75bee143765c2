#pragma once

// Seeded synthetic build histories in two failure regimes.
//
// open_like   Each test alternates between passing gaps and failure streaks.
//             Streak lengths are geometric with mean `run_length`, so a
//             failure tends to persist over consecutive builds. A streak is
//             always followed by at least one passing build.
//             Streaks start with probability p = d / (L (1 - d)) per eligible
//             build, which makes the stationary failing fraction d. The
//             rescue below adds to that when d * n_tests is small.
// closed_like Tests are partitioned into fixed co-failure clusters of size
//             round(c d n). Every build one cluster, chosen uniformly, fails
//             as a block, and every test also fails independently with
//             probability (1 - c) d. Nothing persists from build to build.
//
// Either way a build that would come out failure-free gets one failing test
// (a new streak for open_like), so every emitted build is useful.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcpbench/history.hpp"
#include "tcpbench/rng.hpp"

namespace tcpbench {

enum class ProfileKind { OpenLike, ClosedLike };

struct GenProfile {
    ProfileKind kind = ProfileKind::OpenLike;
    std::size_t n_tests = 50;
    std::size_t n_builds = 500;
    double fail_density = 0.04;
    double run_length = 5.0;      // open_like only
    double cofail_cluster = 0.8;  // closed_like only: share of failures from cluster events
    std::uint64_t seed = 1;

    void validate() const {
        if (n_tests < 1 || n_builds < 1) throw Error("n_tests and n_builds must be at least 1");
        if (!(fail_density > 0.0 && fail_density <= 1.0)) throw Error("fail_density must lie in (0, 1]");
        if (fail_density == 1.0) return;
        if (kind == ProfileKind::OpenLike) {
            if (!(run_length >= 1.0)) throw Error("run_length must be at least 1");
            double cap = run_length / (run_length + 1.0);
            if (fail_density >= cap)
                throw Error("fail_density " + std::to_string(fail_density) +
                            " is unreachable: streaks of mean length " + std::to_string(run_length) +
                            " separated by at least one pass cap the density below " + std::to_string(cap));
        } else {
            if (!(cofail_cluster >= 0.0 && cofail_cluster <= 1.0)) throw Error("cofail_cluster must lie in [0, 1]");
            if (cofail_cluster > 0.0) {
                auto size = cluster_size();
                if (size < 2)
                    throw Error("cluster size round(cofail_cluster * fail_density * n_tests) = " +
                                std::to_string(size) + " is below 2; a single test cannot co-fail");
                if (size > n_tests) throw Error("cluster size exceeds n_tests");
            }
        }
    }

    std::size_t cluster_size() const {
        return static_cast<std::size_t>(std::llround(cofail_cluster * fail_density * static_cast<double>(n_tests)));
    }
};

inline std::string_view to_string(ProfileKind k) { return k == ProfileKind::OpenLike ? "open_like" : "closed_like"; }

inline void to_json(nlohmann::json& j, const GenProfile& p) {
    j = nlohmann::json{{"kind", to_string(p.kind)},          {"n_tests", p.n_tests},
                       {"n_builds", p.n_builds},              {"fail_density", p.fail_density},
                       {"run_length", p.run_length},          {"cofail_cluster", p.cofail_cluster},
                       {"seed", p.seed}};
}

inline void from_json(const nlohmann::json& j, GenProfile& p) {
    auto kind = j.at("kind").get<std::string>();
    if (kind == "open_like") p.kind = ProfileKind::OpenLike;
    else if (kind == "closed_like") p.kind = ProfileKind::ClosedLike;
    else throw Error("unknown profile kind '" + kind + "'");
    p.n_tests = j.at("n_tests").get<std::size_t>();
    p.n_builds = j.at("n_builds").get<std::size_t>();
    p.fail_density = j.at("fail_density").get<double>();
    if (j.contains("run_length")) p.run_length = j.at("run_length").get<double>();
    if (j.contains("cofail_cluster")) p.cofail_cluster = j.at("cofail_cluster").get<double>();
    if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
}

namespace detail {

inline std::string padded(char prefix, std::size_t i, std::size_t total) {
    int width = 1;
    for (std::size_t v = total > 0 ? total - 1 : 0; v >= 10; v /= 10) ++width;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, i);
    return buf;
}

inline std::size_t geometric_length(Rng& rng, double mean) {
    const double keep = 1.0 - 1.0 / mean;
    std::size_t len = 1;
    while (rng.bernoulli(keep)) ++len;
    return len;
}

} // namespace detail

inline BuildHistory generate(const GenProfile& p) {
    p.validate();
    BuildHistory h(p.kind == ProfileKind::OpenLike ? "synthetic-open" : "synthetic-closed");
    for (std::size_t t = 0; t < p.n_tests; ++t) h.add_test(detail::padded('t', t, p.n_tests));
    Rng rng(p.seed);
    std::vector<Outcome> row(p.n_tests);

    auto emit = [&](std::size_t b) { h.append_build(detail::padded('b', b, p.n_builds), row); };

    if (p.fail_density == 1.0) {
        std::fill(row.begin(), row.end(), Outcome::Fail);
        for (std::size_t b = 0; b < p.n_builds; ++b) emit(b);
        return h;
    }

    if (p.kind == ProfileKind::OpenLike) {
        const double start = p.fail_density / (p.run_length * (1.0 - p.fail_density));
        std::vector<std::size_t> remaining(p.n_tests, 0);
        std::vector<bool> failed_last(p.n_tests, false);
        for (std::size_t b = 0; b < p.n_builds; ++b) {
            bool any = false;
            for (std::size_t t = 0; t < p.n_tests; ++t) {
                bool fail = false;
                if (remaining[t] > 0) {
                    fail = true;
                    --remaining[t];
                } else if (!failed_last[t] && rng.bernoulli(start)) {
                    fail = true;
                    remaining[t] = detail::geometric_length(rng, p.run_length) - 1;
                }
                row[t] = fail ? Outcome::Fail : Outcome::Pass;
                any = any || fail;
            }
            if (!any) {
                std::vector<std::size_t> eligible;
                for (std::size_t t = 0; t < p.n_tests; ++t)
                    if (!failed_last[t]) eligible.push_back(t);
                auto t = eligible.empty() ? static_cast<std::size_t>(rng.below(p.n_tests))
                                          : eligible[static_cast<std::size_t>(rng.below(eligible.size()))];
                row[t] = Outcome::Fail;
                remaining[t] = detail::geometric_length(rng, p.run_length) - 1;
            }
            for (std::size_t t = 0; t < p.n_tests; ++t) failed_last[t] = row[t] == Outcome::Fail;
            emit(b);
        }
        return h;
    }

    // closed_like
    std::vector<std::vector<std::size_t>> clusters;
    if (p.cofail_cluster > 0.0) {
        std::vector<std::size_t> ids(p.n_tests);
        for (std::size_t t = 0; t < p.n_tests; ++t) ids[t] = t;
        rng.shuffle(ids);
        const auto size = p.cluster_size();
        for (std::size_t k = 0; k + size <= ids.size(); k += size)
            clusters.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(k),
                                  ids.begin() + static_cast<std::ptrdiff_t>(k + size));
    }
    const double background = (1.0 - p.cofail_cluster) * p.fail_density;
    for (std::size_t b = 0; b < p.n_builds; ++b) {
        std::fill(row.begin(), row.end(), Outcome::Pass);
        bool any = false;
        if (!clusters.empty()) {
            for (auto t : clusters[static_cast<std::size_t>(rng.below(clusters.size()))]) row[t] = Outcome::Fail;
            any = true;
        }
        for (std::size_t t = 0; t < p.n_tests; ++t) {
            if (rng.bernoulli(background)) {
                row[t] = Outcome::Fail;
                any = true;
            }
        }
        if (!any) row[static_cast<std::size_t>(rng.below(p.n_tests))] = Outcome::Fail;
        emit(b);
    }
    return h;
}

} // namespace tcpbench
