#pragma once

// Replays a build history through one scheme, build by build, and turns the
// per-scheme results into rank reports, detection curves and runtimes.

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "tcpbench/metrics.hpp"
#include "tcpbench/prioritizers/scheme.hpp"
#include "tcpbench/stats.hpp"

namespace tcpbench {

struct ApfdSample {
    SchemeId scheme;
    std::size_t build_index;
    double apfd;
    std::chrono::nanoseconds elapsed{0};
};

enum class RunStatus { Completed, TimedOut, Skipped };

inline std::string_view to_string(RunStatus s) {
    switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::TimedOut: return "timed_out";
    case RunStatus::Skipped: return "skipped";
    }
    return "?";
}

/// C1 is not run on projects with more than 800 builds or more than 1500
/// distinct failing tests.
struct CoFailureGuard {
    bool enabled = true;
    std::size_t max_builds = 800;
    std::size_t max_failed_tests = 1500;

    bool blocks(const BuildHistory& h) const {
        return enabled && (h.size() > max_builds || h.failed_test_count() > max_failed_tests);
    }
};

struct ReplayOptions {
    SchemeParams params{};
    std::uint64_t seed = 0;
    std::chrono::milliseconds timeout{std::chrono::minutes(10)};
    CoFailureGuard guard{};
};

struct ReplayResult {
    SchemeId scheme = SchemeId::A1;
    RunStatus status = RunStatus::Completed;
    std::string note;
    std::vector<ApfdSample> samples;
    /// Fault ranks per evaluated build, parallel to `samples`.
    std::vector<ApfdInput> runs;
    double seconds = 0.0;

    std::vector<double> apfd_values() const {
        std::vector<double> v;
        v.reserve(samples.size());
        for (const auto& s : samples) v.push_back(s.apfd);
        return v;
    }
};

/// Seed for one scheme on one build:
///   derive_seed(derive_seed(master, fnv1a(scheme id)), build index)
inline std::uint64_t build_seed(std::uint64_t master, SchemeId scheme, std::size_t build) {
    return derive_seed(derive_seed(master, seed_label(scheme)), build);
}

/// Core replay loop. Builds without failures are skipped (APFD undefined);
/// each evaluated build is prioritized from the builds before it only.
inline ReplayResult replay(const BuildHistory& h, Prioritizer& p, const ReplayOptions& opt) {
    using clock = std::chrono::steady_clock;
    ReplayResult r;
    r.scheme = p.id();
    const auto started = clock::now();
    const Deadline deadline(opt.timeout);
    try {
        for (std::size_t k = 0; k < h.size(); ++k) {
            deadline.check();
            const auto& build = h.build(k);
            if (!build.has_failure()) continue;
            const auto t0 = clock::now();
            ExecutionOracle oracle(build);
            HistoryPrefix prior(h, k);
            auto order = p.prioritize(prior, oracle, build_seed(opt.seed, p.id(), k), deadline);
            const auto t1 = clock::now();
            if (!is_permutation_of(order, oracle.tests()))
                throw Error(std::string(to_string(p.id())) + " produced an invalid ordering");
            if (p.adaptive() && oracle.reveal_count() != oracle.size())
                throw Error(std::string(to_string(p.id())) + " did not execute every test");
            auto ranks = fault_ranks(order, build);
            r.samples.push_back({p.id(), k, apfd(ranks), t1 - t0});
            r.runs.push_back(std::move(ranks));
        }
    } catch (const TimedOut&) {
        r.status = RunStatus::TimedOut;
        r.note = "exceeded " + std::to_string(opt.timeout.count()) + " ms after " +
                 std::to_string(r.samples.size()) + " builds";
    }
    r.seconds = std::chrono::duration<double>(clock::now() - started).count();
    return r;
}

inline ReplayResult replay(const BuildHistory& h, SchemeId scheme, const ReplayOptions& opt) {
    if (scheme == SchemeId::C1 && opt.guard.blocks(h)) {
        ReplayResult r;
        r.scheme = scheme;
        r.status = RunStatus::Skipped;
        r.note = "project exceeds " + std::to_string(opt.guard.max_builds) + " builds or " +
                 std::to_string(opt.guard.max_failed_tests) + " failed test cases";
        return r;
    }
    auto p = make_prioritizer(scheme, opt.params);
    return replay(h, *p, opt);
}

struct SchemeCurve {
    SchemeId scheme;
    DetectionCurve curve;
};

struct RuntimeRow {
    SchemeId scheme;
    RunStatus status;
    double seconds;
    std::size_t builds;
};

struct RunReport {
    RankReport ranks;
    std::vector<SchemeCurve> curves;
    std::vector<RuntimeRow> runtime;
};

/// Ranks the schemes that completed; timed-out or skipped ones get n/a rows
/// ahead of the ranked rows.
inline RunReport report(const std::vector<ReplayResult>& results, double small_effect = kSmallEffect) {
    RunReport out;
    std::vector<Treatment> treatments;
    std::vector<RankEntry> unavailable;
    for (const auto& r : results) {
        out.runtime.push_back({r.scheme, r.status, r.seconds, r.samples.size()});
        if (r.status == RunStatus::Completed && !r.samples.empty()) {
            treatments.push_back({std::string(to_string(r.scheme)), r.apfd_values()});
            out.curves.push_back({r.scheme, detection_curve(r.runs)});
        } else {
            unavailable.push_back({std::string(to_string(r.scheme)), false, 0, 0.0, 0.0});
        }
    }
    if (treatments.empty()) throw Error("no scheme produced results to rank");
    out.ranks = scott_knott(std::move(treatments), small_effect);
    out.ranks.rows.insert(out.ranks.rows.begin(), unavailable.begin(), unavailable.end());
    return out;
}

} // namespace tcpbench
