// Acceptance gate: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "fixtures.hpp"
#include "tcpbench/artifacts.hpp"
#include "tcpbench/prioritizers/baseline.hpp"
#include "tcpbench/prioritizers/cofailure.hpp"
#include "tcpbench/prioritizers/flip.hpp"
#include "tcpbench/prioritizers/history_metrics.hpp"
#include "tcpbench/replay.hpp"
#include "tcpbench/simgen.hpp"

using namespace tcpbench;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

namespace {

int failures = 0;

// Collects sub-check results for one criterion.
struct Criterion {
    int number;
    std::string title;
    std::vector<std::string> problems{};
    clock_type::time_point start = clock_type::now();

    Criterion(int n, std::string t) : number(n), title(std::move(t)) {}

    void expect(bool ok, const std::string& what) {
        if (!ok) problems.push_back(what);
    }

    double seconds() const { return std::chrono::duration<double>(clock_type::now() - start).count(); }

    void finish(const std::string& detail = {}) {
        bool ok = problems.empty();
        if (!ok) ++failures;
        std::cout << "criterion " << number << ": " << (ok ? "PASS" : "FAIL") << "  " << title;
        std::ostringstream t;
        t << std::fixed << std::setprecision(2) << seconds();
        std::cout << " (" << t.str() << " s" << (detail.empty() ? "" : "; " + detail) << ")\n";
        for (const auto& p : problems) std::cout << "    " << p << '\n';
    }
};

struct Last {
    BuildHistory h;
    HistoryPrefix prior;
    ExecutionOracle oracle;
    explicit Last(BuildHistory hist) : h(std::move(hist)), prior(h, h.size() - 1), oracle(h.build(h.size() - 1)) {}
};

using Names = std::vector<std::string>;

std::string join(const Names& v) {
    std::string s = "{";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s + "}";
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string fmt(double v, int digits = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

// 1. Worked examples.
void worked_examples() {
    Criterion c{1, "worked-example fixtures"};

    {
        Last f(fixtures::b1());
        for (std::uint64_t seed = 0; seed < 16; ++seed) {
            auto o = prioritize_time_since_last_failure(f.prior, f.oracle.tests(), seed).names(f.h);
            std::set<std::string> head(o.begin(), o.begin() + 2);
            c.expect(head == std::set<std::string>{"T2", "T4"} && o[2] == "T3" && o[3] == "T1",
                     "B1 order " + join(o));
        }
    }
    {
        Last f(fixtures::b2());
        std::vector<double> want{0.25, 0.75, 0.5, 1.0};
        for (TestId t = 0; t < 4; ++t)
            c.expect(failure_rate(f.prior, t) == want[t], "B2 metric of T" + std::to_string(t + 1));
    }
    {
        Last f(fixtures::b3());
        auto o = prioritize_exp_decay(f.prior, f.oracle.tests(), {0.9}, 0).names(f.h);
        c.expect(o == Names{"T1", "T2", "T4", "T3"}, "B3 order " + join(o));
        c.expect(near(exp_decay(f.prior, 0, {0.9}), 0.901, 1e-12), "B3 T1 metric");
        // T3 history [0,1,1,0] unrolled by hand.
        double p = 0.0;
        p = 0.9 * 1.0 + 0.1 * p;
        p = 0.9 * 1.0 + 0.1 * p;
        p = 0.9 * 0.0 + 0.1 * p;
        c.expect(near(exp_decay(f.prior, 2, {0.9}), p, 1e-12), "B3 T3 metric " + fmt(exp_decay(f.prior, 2)));
    }
    {
        Last f(fixtures::b4());
        std::vector<double> want{0.1, 0.2, 0.9, 0.4};
        for (TestId t = 0; t < 4; ++t)
            c.expect(near(rocket_score(f.prior, t), want[t], 1e-12), "B4 metric of T" + std::to_string(t + 1));
    }
    {
        // The first pick is a seeded tie among equal carried scores; take the
        // first seed that starts with T1.
        bool seen = false;
        for (std::uint64_t seed = 0; seed < 64 && !seen; ++seed) {
            Last f(fixtures::c1());
            auto r = cofailure_prioritize(f.prior, f.oracle, {}, seed);
            if (r.ordering.tests.front() != 0) continue;
            seen = true;
            auto o = r.ordering.names(f.h);
            c.expect(o == Names{"T1", "T2", "T3", "T4"}, "C1 order " + join(o));
            bool shape = r.trace.size() == 2 && r.trace[0].scores.size() == 3 && r.trace[1].scores.size() == 2;
            c.expect(shape, "C1 trace shape");
            if (shape) {
                auto& s0 = r.trace[0].scores;
                auto& s1 = r.trace[1].scores;
                c.expect(near(s0[0].second, 0.5, 1e-9) && near(s0[1].second, 0.0, 1e-9) &&
                             near(s0[2].second, -0.5, 1e-9),
                         "C1 first update");
                c.expect(near(s1[0].second, -1.0 / 6.0, 1e-9) && near(s1[1].second, -2.0 / 3.0, 1e-9),
                         "C1 second update " + fmt(s1[0].second) + "," + fmt(s1[1].second));
            }
        }
        c.expect(seen, "C1: no seed put T1 first");
    }
    {
        bool seen = false;
        for (std::uint64_t seed = 0; seed < 64; ++seed) {
            Last f(fixtures::c2());
            auto r = flip_correlation_prioritize(f.prior, f.oracle, {}, seed);
            std::vector<std::size_t> counts;
            for (auto [t, n] : r.trace.front().counts) counts.push_back(n);
            c.expect(counts == std::vector<std::size_t>{1, 2, 1}, "C2 first-step counts");
            auto o = r.ordering.names(f.h);
            c.expect(o[0] == "T1" && o[1] == "T3", "C2 head " + join(o));
            seen = seen || o == Names{"T1", "T3", "T4", "T2"};
        }
        c.expect(seen, "C2 final order {T1,T3,T4,T2} never produced");
    }
    {
        Last f(fixtures::a2());
        for (std::uint64_t seed = 0; seed < 16; ++seed) {
            auto o = prioritize_optimal(f.oracle, seed).names(f.h);
            std::set<std::string> head(o.begin(), o.begin() + 2);
            c.expect(head == std::set<std::string>{"T1", "T3"}, "A2 head " + join(o));
        }
    }
    c.expect(c.seconds() < 1.0, "took longer than 1 s");
    c.finish();
}

// Area under the piecewise-linear detection curve through
// (i/n, detected_i/m), i = 0..n.
double area_under_curve(const std::vector<bool>& fault_at, std::size_t m) {
    const double n = double(fault_at.size());
    double area = 0.0, prev = 0.0, found = 0.0;
    for (bool f : fault_at) {
        found += f;
        double y = found / double(m);
        area += (prev + y) / 2.0 / n;
        prev = y;
    }
    return area;
}

// 2. APFD against the area oracle, and A2 at the maximum.
void apfd_oracle() {
    Criterion c{2, "APFD oracle equivalence, n <= 6"};
    std::size_t checked = 0;
    for (std::size_t n = 1; n <= 6; ++n) {
        std::vector<TestId> all(n);
        std::iota(all.begin(), all.end(), 0);
        for (unsigned mask = 1; mask < (1u << n); ++mask) {
            std::vector<TestId> failing;
            for (TestId t = 0; t < n; ++t)
                if (mask & (1u << t)) failing.push_back(t);
            auto ranks_of = [&](const std::vector<TestId>& perm) {
                ApfdInput in{n, {}};
                for (std::size_t i = 0; i < n; ++i)
                    if (mask & (1u << perm[i])) in.fault_positions.push_back(i + 1);
                return in;
            };
            double best = -1.0;
            std::vector<TestId> perm = all;
            do {
                std::vector<bool> at(n);
                for (std::size_t i = 0; i < n; ++i) at[i] = mask & (1u << perm[i]);
                double a = apfd(ranks_of(perm));
                double area = area_under_curve(at, failing.size());
                if (!near(a, area, 1e-12)) c.expect(false, "n=" + std::to_string(n) + " mask " + std::to_string(mask));
                best = std::max(best, a);
                ++checked;
            } while (std::next_permutation(perm.begin(), perm.end()));
            for (std::uint64_t seed = 0; seed < 3; ++seed) {
                auto o = prioritize_optimal(all, failing, seed);
                if (apfd(ranks_of(o.tests)) != best) c.expect(false, "A2 below maximum, n=" + std::to_string(n));
            }
        }
    }
    c.expect(c.seconds() < 30.0, "took longer than 30 s");
    c.finish(std::to_string(checked) + " orderings");
}

// 3. Random baseline.
void random_baseline() {
    Criterion c{3, "A1 mean APFD matches the analytic expectation"};
    const std::size_t n = 20;
    BuildHistory h("a1");
    std::vector<Outcome> row(n, Outcome::Pass);
    for (std::size_t t = 0; t < n; ++t) h.add_test("t" + std::to_string(t));
    row[3] = row[9] = row[15] = Outcome::Fail;
    h.append_build("only", row);

    // Exact mean over every placement of the 3 faults.
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t a = 1; a <= n; ++a)
        for (std::size_t b = a + 1; b <= n; ++b)
            for (std::size_t d = b + 1; d <= n; ++d, ++count) total += apfd({n, {a, b, d}});
    const double expected = total / double(count);

    double sum = 0.0;
    const int runs = 2000;
    for (int s = 0; s < runs; ++s) {
        ReplayOptions opt;
        opt.seed = std::uint64_t(s);
        sum += replay(h, SchemeId::A1, opt).samples.at(0).apfd;
    }
    double mean = sum / runs;
    c.expect(near(mean, expected, 0.01), "mean " + fmt(mean) + " vs " + fmt(expected));
    c.finish("mean " + fmt(mean) + ", expected " + fmt(expected));
}

double brute_delta(const std::vector<double>& a, const std::vector<double>& b) {
    long long s = 0;
    for (double x : a)
        for (double y : b) s += (x > y) - (x < y);
    return double(s) / double(a.size() * b.size());
}

// 4. Scott-Knott and Cliff's delta.
void scott_knott_checks() {
    Criterion c{4, "Scott-Knott / Cliff's delta"};
    std::vector<double> a{1, 2}, b{1, 3};
    c.expect(cliffs_delta(a, b) == -0.25, "hand case");
    std::mt19937_64 gen(8);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> x(1 + gen() % 9), y(1 + gen() % 9);
        for (auto& v : x) v = double(gen() % 5);
        for (auto& v : y) v = double(gen() % 5);
        if (cliffs_delta(x, y) != -cliffs_delta(y, x) || cliffs_delta(x, y) != brute_delta(x, y))
            c.expect(false, "antisymmetry / brute force");
    }

    auto draw = [](std::uint64_t seed, double mu) {
        std::mt19937_64 g(seed);
        std::normal_distribution<double> d(mu, 0.01);
        std::vector<double> v(200);
        for (auto& x : v) x = d(g);
        return v;
    };
    auto apart = scott_knott({{"low", draw(1, 0.5)}, {"high", draw(2, 0.9)}});
    c.expect(apart.rank_of("low") != apart.rank_of("high"), "N(0.5) vs N(0.9) share a rank");
    auto same = scott_knott({{"x", draw(3, 0.5)}, {"y", draw(4, 0.5)}});
    c.expect(same.rank_of("x") == same.rank_of("y"), "same distribution split");

    std::vector<double> base(40);
    std::iota(base.begin(), base.end(), 1.0);
    auto with_low = [](int k) {
        std::vector<double> v(k, 22.5);
        v.resize(25, 23.5);
        return v;
    };
    auto weak = with_low(2), strong = with_low(1);
    double dw = std::abs(brute_delta(base, weak)), ds = std::abs(brute_delta(base, strong));
    c.expect(near(dw, 0.146, 1e-12) && near(ds, 0.148, 1e-12), "boundary construction");
    c.expect(scott_knott({{"b", base}, {"a", weak}}).group_count() == 1, "|delta| 0.146 split");
    c.expect(scott_knott({{"b", base}, {"a", strong}}).group_count() == 2, "|delta| 0.148 not split");
    c.finish("boundary |delta| " + fmt(dw, 3) + " / " + fmt(ds, 3));
}

std::vector<ReplayResult> replay_all(const BuildHistory& h, const ReplayOptions& opt) {
    std::vector<ReplayResult> out;
    for (auto id : all_schemes) out.push_back(replay(h, id, opt));
    return out;
}

// 5. Open- vs closed-source pattern.
void directional() {
    Criterion c{5, "open_like favours B1/B3, closed_like favours D1"};
    ReplayOptions opt;
    opt.seed = 1;

    GenProfile open;
    open.kind = ProfileKind::OpenLike;
    open.n_tests = 50;
    open.n_builds = 500;
    open.fail_density = 0.04;
    open.run_length = 5;
    open.seed = 7;
    auto ro = report(replay_all(generate(open), opt)).ranks;
    const auto &b1 = ro.at("B1"), &b3 = ro.at("B3"), &d1 = ro.at("D1");
    c.expect(b1.rank > d1.rank && b3.rank > d1.rank,
             "open ranks B1 " + std::to_string(b1.rank) + ", B3 " + std::to_string(b3.rank) + ", D1 " +
                 std::to_string(d1.rank));
    c.expect(b1.median >= 0.9 && b3.median >= 0.9, "open medians B1 " + fmt(b1.median) + ", B3 " + fmt(b3.median));

    GenProfile closed;
    closed.kind = ProfileKind::ClosedLike;
    closed.n_tests = 200;
    closed.n_builds = 300;
    closed.fail_density = 0.1;
    closed.cofail_cluster = 0.8;
    closed.seed = 7;
    auto rc = report(replay_all(generate(closed), opt)).ranks;
    double margin = rc.at("D1").median - std::max(rc.at("B1").median, rc.at("B3").median);
    c.expect(margin >= 0.03, "closed D1 margin " + fmt(margin));
    c.expect(c.seconds() < 300.0, "took longer than 5 min");
    c.finish("open B1/B3/D1 rank " + std::to_string(b1.rank) + "/" + std::to_string(b3.rank) + "/" +
             std::to_string(d1.rank) + ", closed D1 - max(B1,B3) = " + fmt(margin, 3));
}

// 6. C1 guard and timeout.
void guard_and_timeout() {
    Criterion c{6, "C1 guard and timeout on 801 builds"};
    GenProfile p;
    p.kind = ProfileKind::OpenLike;
    p.n_tests = 300;
    p.n_builds = 801;
    p.fail_density = 0.8;
    p.run_length = 10;
    p.seed = 7;
    auto h = filter_useful_builds(generate(p));
    c.expect(h.size() == 801, "dataset lost builds");

    ReplayOptions opt;
    opt.seed = 1;
    opt.timeout = std::chrono::seconds(10);
    auto guarded = replay(h, SchemeId::C1, opt);
    c.expect(guarded.status == RunStatus::Skipped, "guarded C1 not skipped");

    opt.guard.enabled = false;
    auto results = replay_all(h, opt);
    const auto& c1 = results[6];
    c.expect(c1.scheme == SchemeId::C1 && c1.status == RunStatus::TimedOut,
             "unguarded C1 status " + std::string(to_string(c1.status)));
    for (const auto& r : results)
        if (r.scheme != SchemeId::C1)
            c.expect(r.status == RunStatus::Completed, std::string(to_string(r.scheme)) + " did not complete");

    for (auto* first : {&guarded, &results[6]}) {
        auto rows = results;
        rows[6] = *first;
        try {
            auto rep = report(rows);
            c.expect(!rep.ranks.at("C1").available, "C1 not reported n/a");
            std::size_t ranked = 0;
            for (const auto& row : rep.ranks.rows) ranked += row.available && row.rank >= 1;
            c.expect(ranked == 8, "ranked " + std::to_string(ranked) + " schemes");
        } catch (const std::exception& e) {
            c.expect(false, std::string("report failed: ") + e.what());
        }
    }
    c.finish("C1 " + std::string(to_string(c1.status)) + " after " + std::to_string(c1.samples.size()) + " builds");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// 7. Byte-identical reruns of the CLI.
void determinism() {
    Criterion c{7, "run is byte-identical for equal config and seed"};
    auto dir = fs::temp_directory_path() / "tcpbench-acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string args = " run --kind open_like --tests 50 --builds 500 --density 0.04 --run-length 5 "
                       "--gen-seed 7 --seed 1 --out ";
    for (auto sub : {"a", "b"}) {
        std::string cmd = std::string("\"") + TCPBENCH_CLI + "\"" + args + (dir / sub).string() + " >/dev/null 2>&1";
        int rc = std::system(cmd.c_str());
        c.expect(WIFEXITED(rc) && WEXITSTATUS(rc) == 0, std::string("run ") + sub + " failed");
    }
    for (auto f : {"samples.csv", "rank_report.txt", "rank_report.csv"}) {
        auto a = slurp(dir / "a" / f), b = slurp(dir / "b" / f);
        c.expect(!a.empty() && a == b, std::string(f) + " differs");
    }
    fs::remove_all(dir);
    c.finish();
}

} // namespace

int main() {
    worked_examples();
    apfd_oracle();
    random_baseline();
    scott_knott_checks();
    directional();
    guard_and_timeout();
    determinism();
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
    return failures == 0 ? 0 : 1;
}
