#pragma once

// Build-to-test outcome matrices: the data model every prioritizer reads.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

namespace tcpbench {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

enum class Outcome : std::uint8_t { Absent, Pass, Fail };

using TestId = std::uint32_t;

inline std::string_view to_string(Outcome o) {
    switch (o) {
    case Outcome::Pass: return "pass";
    case Outcome::Fail: return "fail";
    case Outcome::Absent: break;
    }
    return "absent";
}

namespace detail {

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::string_view trim(std::string_view s) {
    auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

} // namespace detail

inline std::optional<Outcome> parse_outcome(std::string_view token) {
    auto t = detail::lower(detail::trim(token));
    if (t == "pass") return Outcome::Pass;
    if (t == "fail") return Outcome::Fail;
    if (t == "absent") return Outcome::Absent;
    return std::nullopt;
}

struct BuildRecord {
    std::string build_id;
    std::size_t index = 0;
    /// Indexed by TestId. Tests registered after this build was appended
    /// fall off the end and read as Absent.
    std::vector<Outcome> outcomes;

    Outcome outcome(TestId t) const {
        return t < outcomes.size() ? outcomes[t] : Outcome::Absent;
    }

    std::size_t failure_count() const {
        return static_cast<std::size_t>(std::count(outcomes.begin(), outcomes.end(), Outcome::Fail));
    }

    bool has_failure() const { return failure_count() > 0; }

    /// A build in which no test produced a result.
    bool broken() const {
        return std::all_of(outcomes.begin(), outcomes.end(),
                           [](Outcome o) { return o == Outcome::Absent; });
    }

    std::vector<TestId> present_tests() const {
        std::vector<TestId> out;
        for (std::size_t t = 0; t < outcomes.size(); ++t)
            if (outcomes[t] != Outcome::Absent) out.push_back(static_cast<TestId>(t));
        return out;
    }

    std::vector<TestId> failing_tests() const {
        std::vector<TestId> out;
        for (std::size_t t = 0; t < outcomes.size(); ++t)
            if (outcomes[t] == Outcome::Fail) out.push_back(static_cast<TestId>(t));
        return out;
    }
};

/// Chronological test-outcome matrix for one project. Build order is the
/// replay order and is never changed after load.
class BuildHistory {
public:
    BuildHistory() = default;
    explicit BuildHistory(std::string project_name) : project_(std::move(project_name)) {}

    const std::string& project_name() const noexcept { return project_; }
    void set_project_name(std::string name) { project_ = std::move(name); }

    /// Registers a test, returning the existing id when already known.
    TestId add_test(std::string_view name) {
        std::string key(name);
        if (auto it = ids_.find(key); it != ids_.end()) return it->second;
        auto id = static_cast<TestId>(tests_.size());
        tests_.push_back(key);
        ids_.emplace(std::move(key), id);
        return id;
    }

    std::optional<TestId> find_test(std::string_view name) const {
        auto it = ids_.find(std::string(name));
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }

    TestId test_id(std::string_view name) const {
        auto id = find_test(name);
        if (!id) throw Error("unknown test '" + std::string(name) + "'");
        return *id;
    }

    const std::string& test_name(TestId t) const { return tests_.at(t); }
    std::span<const std::string> tests() const noexcept { return tests_; }
    std::size_t test_count() const noexcept { return tests_.size(); }

    void append_build(std::string build_id, std::vector<Outcome> outcomes) {
        if (!build_ids_.insert(build_id).second)
            throw Error("duplicate build_id '" + build_id + "'");
        if (outcomes.size() > tests_.size())
            throw Error("build '" + build_id + "' has more outcomes than registered tests");
        outcomes.resize(tests_.size(), Outcome::Absent);
        builds_.push_back(BuildRecord{std::move(build_id), builds_.size(), std::move(outcomes)});
    }

    void append_build(std::string build_id, const std::map<std::string, Outcome>& by_name) {
        std::vector<Outcome> row;
        for (const auto& [name, o] : by_name) {
            auto id = add_test(name);
            if (row.size() <= id) row.resize(id + 1, Outcome::Absent);
            row[id] = o;
        }
        append_build(std::move(build_id), std::move(row));
    }

    std::size_t size() const noexcept { return builds_.size(); }
    bool empty() const noexcept { return builds_.empty(); }
    const BuildRecord& build(std::size_t i) const { return builds_.at(i); }
    std::span<const BuildRecord> builds() const noexcept { return builds_; }

    Outcome outcome(std::size_t build, TestId t) const { return builds_[build].outcome(t); }

    /// Number of distinct tests that failed at least once.
    std::size_t failed_test_count() const {
        std::vector<bool> seen(tests_.size(), false);
        for (const auto& b : builds_)
            for (std::size_t t = 0; t < b.outcomes.size(); ++t)
                if (b.outcomes[t] == Outcome::Fail) seen[t] = true;
        return static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
    }

    std::size_t useful_build_count() const {
        return static_cast<std::size_t>(
            std::count_if(builds_.begin(), builds_.end(), [](const BuildRecord& b) { return b.has_failure(); }));
    }

    friend bool operator==(const BuildHistory& a, const BuildHistory& b) {
        if (a.tests_ != b.tests_ || a.builds_.size() != b.builds_.size()) return false;
        for (std::size_t i = 0; i < a.builds_.size(); ++i) {
            const auto& x = a.builds_[i];
            const auto& y = b.builds_[i];
            if (x.build_id != y.build_id) return false;
            for (std::size_t t = 0; t < a.tests_.size(); ++t)
                if (x.outcome(static_cast<TestId>(t)) != y.outcome(static_cast<TestId>(t))) return false;
        }
        return true;
    }

private:
    std::string project_;
    std::vector<std::string> tests_;
    std::unordered_map<std::string, TestId> ids_;
    std::vector<BuildRecord> builds_;
    std::unordered_set<std::string> build_ids_;
};

/// Read-only window over the builds strictly before `end`. Prioritizers see
/// history only through this, so the build being prioritized cannot leak in.
class HistoryPrefix {
public:
    HistoryPrefix(const BuildHistory& h, std::size_t end) : h_(&h), end_(end) {
        if (end > h.size()) throw Error("history prefix past the last build");
    }

    std::size_t size() const noexcept { return end_; }
    const BuildHistory& registry() const noexcept { return *h_; }

    const BuildRecord& build(std::size_t i) const {
        if (i >= end_) throw std::out_of_range("build outside the visible history");
        return h_->build(i);
    }

    Outcome outcome(std::size_t i, TestId t) const { return build(i).outcome(t); }

    /// Prior binary outcomes of `t` (1 = Fail), oldest first, Absent skipped.
    std::vector<std::uint8_t> outcome_vector(TestId t) const {
        std::vector<std::uint8_t> v;
        for (std::size_t i = 0; i < end_; ++i) {
            auto o = h_->outcome(i, t);
            if (o != Outcome::Absent) v.push_back(o == Outcome::Fail ? 1 : 0);
        }
        return v;
    }

    /// The most recent `window` present outcomes of `t`, oldest first,
    /// zero-padded on the left.
    std::vector<double> recent_outcomes(TestId t, std::size_t window) const {
        std::vector<double> v(window, 0.0);
        std::size_t filled = 0;
        for (std::size_t i = end_; i-- > 0 && filled < window;) {
            auto o = h_->outcome(i, t);
            if (o == Outcome::Absent) continue;
            v[window - 1 - filled] = o == Outcome::Fail ? 1.0 : 0.0;
            ++filled;
        }
        return v;
    }

private:
    const BuildHistory* h_;
    std::size_t end_;
};

inline std::vector<std::uint8_t> outcome_vector(const BuildHistory& h, std::string_view test,
                                                std::size_t before_build) {
    auto id = h.test_id(test);
    return HistoryPrefix(h, before_build).outcome_vector(id);
}

// ---------------------------------------------------------------------------
// Ingestion

enum class MatrixFormat { Csv, Jsonl };

inline BuildHistory parse_csv(std::istream& in, std::string project = {}) {
    BuildHistory h(std::move(project));
    std::string line;
    std::size_t lineno = 0;
    std::size_t columns = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split(line, ',');
        if (!have_header) {
            if (detail::lower(cells.front()) != "build_id")
                throw ParseError(lineno, "header must start with build_id");
            for (std::size_t c = 1; c < cells.size(); ++c) {
                if (cells[c].empty()) throw ParseError(lineno, "empty test name in header");
                if (h.find_test(cells[c]))
                    throw ParseError(lineno, "duplicate test name '" + std::string(cells[c]) + "'");
                h.add_test(cells[c]);
            }
            columns = cells.size();
            have_header = true;
            continue;
        }
        if (cells.size() != columns)
            throw ParseError(lineno, "expected " + std::to_string(columns) + " columns, found " +
                                         std::to_string(cells.size()));
        if (cells.front().empty()) throw ParseError(lineno, "empty build_id");
        std::vector<Outcome> row;
        row.reserve(columns - 1);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            auto o = parse_outcome(cells[c]);
            if (!o) throw ParseError(lineno, "unknown cell token '" + std::string(cells[c]) + "'");
            row.push_back(*o);
        }
        try {
            h.append_build(std::string(cells.front()), std::move(row));
        } catch (const Error& e) {
            throw ParseError(lineno, e.what());
        }
    }
    if (h.empty()) throw Error("no builds");
    return h;
}

inline BuildHistory parse_jsonl(std::istream& in, std::string project = {}) {
    BuildHistory h(std::move(project));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object() || !obj.contains("build_id"))
            throw ParseError(lineno, "expected an object with build_id");
        const auto& bid = obj["build_id"];
        std::string build_id = bid.is_string() ? bid.get<std::string>() : bid.dump();
        std::vector<Outcome> row;
        if (obj.contains("outcomes")) {
            if (!obj["outcomes"].is_object()) throw ParseError(lineno, "outcomes must be an object");
            for (const auto& [name, value] : obj["outcomes"].items()) {
                if (!value.is_string()) throw ParseError(lineno, "outcome for '" + name + "' must be a string");
                auto o = parse_outcome(value.get<std::string>());
                if (!o) throw ParseError(lineno, "unknown cell token '" + value.get<std::string>() + "'");
                auto id = h.add_test(name);
                if (row.size() <= id) row.resize(id + 1, Outcome::Absent);
                row[id] = *o;
            }
        }
        try {
            h.append_build(std::move(build_id), std::move(row));
        } catch (const Error& e) {
            throw ParseError(lineno, e.what());
        }
    }
    if (h.empty()) throw Error("no builds");
    return h;
}

inline BuildHistory parse_matrix(std::istream& in, MatrixFormat format, std::string project = {}) {
    return format == MatrixFormat::Csv ? parse_csv(in, std::move(project))
                                       : parse_jsonl(in, std::move(project));
}

inline void write_csv(std::ostream& out, const BuildHistory& h) {
    out << "build_id";
    for (const auto& t : h.tests()) out << ',' << t;
    out << '\n';
    for (const auto& b : h.builds()) {
        out << b.build_id;
        for (std::size_t t = 0; t < h.test_count(); ++t) out << ',' << to_string(b.outcome(static_cast<TestId>(t)));
        out << '\n';
    }
}

inline std::string to_csv(const BuildHistory& h) {
    std::ostringstream os;
    write_csv(os, h);
    return os.str();
}

// ---------------------------------------------------------------------------
// Screening

/// Keeps builds with at least one failure; broken (all-Absent) builds go
/// too. Order is preserved and indices are renumbered from 0.
inline BuildHistory filter_useful_builds(const BuildHistory& h) {
    BuildHistory out(h.project_name());
    for (const auto& t : h.tests()) out.add_test(t);
    for (const auto& b : h.builds()) {
        if (b.broken() || !b.has_failure()) continue;
        out.append_build(b.build_id, b.outcomes);
    }
    return out;
}

/// Repository facts that are not derivable from the outcome matrix. Supplied
/// as an optional sidecar.
struct RepoMetadata {
    std::optional<long long> developers;
    std::optional<long long> pull_requests;
    std::optional<long long> commits;
    std::optional<long long> releases;
    std::optional<long long> issues;
    std::optional<double> duration_weeks;
    std::optional<bool> has_ci;
};

inline RepoMetadata parse_metadata(const nlohmann::json& j) {
    RepoMetadata m;
    auto num = [&](const char* key, std::optional<long long>& dst) {
        if (j.contains(key)) dst = j.at(key).get<long long>();
    };
    num("developers", m.developers);
    num("pull_requests", m.pull_requests);
    num("commits", m.commits);
    num("releases", m.releases);
    num("issues", m.issues);
    if (j.contains("duration_weeks")) m.duration_weeks = j.at("duration_weeks").get<double>();
    if (j.contains("has_ci")) m.has_ci = j.at("has_ci").get<bool>();
    return m;
}

struct SanityCriteria {
    long long min_total_builds = 500;
    long long min_useful_builds = 100;
    long long min_failed_test_cases = 50;
    // Metadata thresholds. Developers >= 7; the rest are strict (> value).
    long long min_developers = 7;
    long long pull_requests_above = 0;
    long long commits_above = 20;
    long long releases_above = 1;
    long long issues_above = 10;
    double duration_weeks_above = 52.0;

    void validate() const {
        if (min_total_builds < 0 || min_useful_builds < 0 || min_failed_test_cases < 0 || min_developers < 0 ||
            pull_requests_above < 0 || commits_above < 0 || releases_above < 0 || issues_above < 0 ||
            duration_weeks_above < 0)
            throw Error("sanity thresholds must be nonnegative");
    }
};

enum class CheckStatus { Passed, Failed, NotEvaluated };

struct SanityEntry {
    std::string criterion;
    std::string observed;  // "-" when not evaluated
    std::string threshold;
    CheckStatus status = CheckStatus::NotEvaluated;
};

struct SanityReport {
    std::vector<SanityEntry> entries;

    /// Entries that were not evaluated do not block an overall pass.
    bool passed() const {
        return std::none_of(entries.begin(), entries.end(),
                            [](const SanityEntry& e) { return e.status == CheckStatus::Failed; });
    }

    const SanityEntry& at(std::string_view criterion) const {
        for (const auto& e : entries)
            if (e.criterion == criterion) return e;
        throw Error("no sanity criterion '" + std::string(criterion) + "'");
    }
};

inline SanityReport sanity_check(const BuildHistory& h, const SanityCriteria& c,
                                 const RepoMetadata& meta = {}) {
    c.validate();
    SanityReport r;
    auto add = [&](std::string name, std::string observed, std::string threshold, bool ok) {
        r.entries.push_back({std::move(name), std::move(observed), std::move(threshold),
                             ok ? CheckStatus::Passed : CheckStatus::Failed});
    };
    auto skip = [&](std::string name, std::string threshold) {
        r.entries.push_back({std::move(name), "-", std::move(threshold), CheckStatus::NotEvaluated});
    };
    auto at_least = [&](const char* name, long long observed, long long min) {
        add(name, std::to_string(observed), ">= " + std::to_string(min), observed >= min);
    };
    auto above = [&](const char* name, const std::optional<long long>& observed, long long bound) {
        if (!observed) return skip(name, "> " + std::to_string(bound));
        add(name, std::to_string(*observed), "> " + std::to_string(bound), *observed > bound);
    };

    if (meta.developers)
        at_least("Developers", *meta.developers, c.min_developers);
    else
        skip("Developers", ">= " + std::to_string(c.min_developers));
    above("Pull Requests", meta.pull_requests, c.pull_requests_above);
    above("Commits", meta.commits, c.commits_above);
    above("Releases", meta.releases, c.releases_above);
    above("Issues", meta.issues, c.issues_above);
    if (meta.duration_weeks) {
        std::ostringstream os;
        os << *meta.duration_weeks;
        std::ostringstream th;
        th << "> " << c.duration_weeks_above << " weeks";
        add("Duration", os.str(), th.str(), *meta.duration_weeks > c.duration_weeks_above);
    } else {
        std::ostringstream th;
        th << "> " << c.duration_weeks_above << " weeks";
        skip("Duration", th.str());
    }
    if (meta.has_ci)
        add("Has CI", *meta.has_ci ? "true" : "false", "true", *meta.has_ci);
    else
        skip("Has CI", "true");

    at_least("Total Builds", static_cast<long long>(h.size()), c.min_total_builds);
    at_least("Useful Builds", static_cast<long long>(h.useful_build_count()), c.min_useful_builds);
    at_least("Failed Test Cases", static_cast<long long>(h.failed_test_count()), c.min_failed_test_cases);
    return r;
}

} // namespace tcpbench
