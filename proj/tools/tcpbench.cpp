// tcpbench: ingest, generate, replay and rank regression-test prioritization
// runs from the command line.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tcpbench/artifacts.hpp"
#include "tcpbench/simgen.hpp"

namespace fs = std::filesystem;
using namespace tcpbench;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot open '" + p.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    out << content;
}

MatrixFormat guess_format(const fs::path& p, const std::string& flag) {
    if (flag == "csv") return MatrixFormat::Csv;
    if (flag == "jsonl") return MatrixFormat::Jsonl;
    if (!flag.empty() && flag != "auto") throw Error("unknown format '" + flag + "'");
    return p.extension() == ".jsonl" ? MatrixFormat::Jsonl : MatrixFormat::Csv;
}

BuildHistory load_history(const fs::path& p, const std::string& format) {
    std::istringstream in(read_file(p));
    return parse_matrix(in, guess_format(p, format), p.stem().string());
}

GenProfile load_profile(const fs::path& p) {
    try {
        return nlohmann::json::parse(read_file(p)).get<GenProfile>();
    } catch (const nlohmann::json::exception& e) {
        throw Error("invalid profile '" + p.string() + "': " + e.what());
    }
}

std::vector<SchemeId> parse_schemes(const std::string& list) {
    std::vector<SchemeId> out;
    if (list == "all") return {all_schemes.begin(), all_schemes.end()};
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (detail::trim(item).empty()) continue;
        auto id = parse_scheme(item);
        if (!id) throw Error("unknown scheme '" + item + "'");
        if (std::find(out.begin(), out.end(), *id) == out.end()) out.push_back(*id);
    }
    if (out.empty()) throw Error("no schemes selected");
    return out;
}

void print_sanity(const SanityReport& r) {
    std::cout << std::left << std::setw(20) << "criterion" << std::setw(12) << "observed" << std::setw(16)
              << "threshold" << "result\n";
    for (const auto& e : r.entries) {
        std::cout << std::setw(20) << e.criterion << std::setw(12) << e.observed << std::setw(16) << e.threshold
                  << (e.status == CheckStatus::Passed   ? "pass"
                      : e.status == CheckStatus::Failed ? "FAIL"
                                                        : "not evaluated")
                  << '\n';
    }
    std::cout << "overall: " << (r.passed() ? "pass" : "FAIL") << '\n';
}

struct IngestArgs {
    std::string input, format = "auto", metadata, filtered_out;
    bool strict = false;
};

int cmd_ingest(const IngestArgs& a) {
    auto h = load_history(a.input, a.format);
    RepoMetadata meta;
    if (!a.metadata.empty()) meta = parse_metadata(nlohmann::json::parse(read_file(a.metadata)));
    auto report = sanity_check(h, SanityCriteria{}, meta);
    auto useful = filter_useful_builds(h);
    std::cout << "project: " << h.project_name() << "\ntests: " << h.test_count() << "\nbuilds: " << h.size()
              << "\nuseful builds: " << useful.size() << "\n\n";
    print_sanity(report);
    if (!a.filtered_out.empty()) write_file(a.filtered_out, to_csv(useful));
    return a.strict && !report.passed() ? 1 : 0;
}

struct GenArgs {
    std::string profile, output;
    std::optional<std::string> kind;
    std::optional<std::size_t> tests, builds;
    std::optional<double> density, run_length, cluster;
    std::optional<std::uint64_t> seed;
};

GenProfile resolve_profile(const GenArgs& a) {
    GenProfile p = a.profile.empty() ? GenProfile{} : load_profile(a.profile);
    if (a.kind) {
        if (*a.kind == "open_like") p.kind = ProfileKind::OpenLike;
        else if (*a.kind == "closed_like") p.kind = ProfileKind::ClosedLike;
        else throw Error("unknown profile kind '" + *a.kind + "'");
    }
    if (a.tests) p.n_tests = *a.tests;
    if (a.builds) p.n_builds = *a.builds;
    if (a.density) p.fail_density = *a.density;
    if (a.run_length) p.run_length = *a.run_length;
    if (a.cluster) p.cofail_cluster = *a.cluster;
    if (a.seed) p.seed = *a.seed;
    return p;
}

int cmd_gen(const GenArgs& a) {
    auto h = generate(resolve_profile(a));
    if (a.output.empty() || a.output == "-") write_csv(std::cout, h);
    else write_file(a.output, to_csv(h));
    return 0;
}

struct RunArgs {
    std::string input, format = "auto", out = "tcpbench-out", schemes = "all";
    GenArgs gen;
    std::uint64_t seed = 0;
    double alpha = 0.9;
    std::size_t n1 = 2, feature_window = 10, presumed = 10;
    std::vector<double> rocket{0.7, 0.2, 0.1};
    double timeout_s = 600.0;
    bool no_c1_guard = false, timing = false;
};

int cmd_run(const RunArgs& a) {
    const bool generated = !a.gen.profile.empty() || a.gen.kind.has_value();
    if (a.input.empty() == !generated)
        throw Error("run needs either --input or a generator profile (--profile / --kind)");
    if (!(a.timeout_s > 0)) throw Error("--timeout must be positive");
    if (a.rocket.size() != 3) throw Error("--rocket takes three weights");

    nlohmann::json manifest;
    manifest["tool"] = std::string("tcpbench ") + kVersion;
    BuildHistory raw;
    if (!a.input.empty()) {
        raw = load_history(a.input, a.format);
        manifest["input"] = {{"path", a.input}, {"fnv1a", fnv1a(read_file(a.input))}};
    } else {
        auto profile = resolve_profile(a.gen);
        raw = generate(profile);
        manifest["profile"] = profile;
    }
    auto h = filter_useful_builds(raw);
    std::cerr << "loaded " << raw.size() << " builds, " << h.size() << " useful, " << h.test_count()
              << " tests\n";
    if (h.empty()) throw Error("history has no useful builds");

    ReplayOptions opt;
    opt.seed = a.seed;
    opt.timeout = std::chrono::milliseconds(static_cast<long long>(a.timeout_s * 1000.0));
    opt.guard.enabled = !a.no_c1_guard;
    opt.params.decay.alpha = a.alpha;
    opt.params.rocket = {a.rocket[0], a.rocket[1], a.rocket[2]};
    opt.params.terminator.n1 = a.n1;
    opt.params.terminator.feature_window = a.feature_window;
    opt.params.terminator.presumed_negatives = a.presumed;
    opt.params.decay.validate();
    opt.params.rocket.validate();
    opt.params.terminator.validate();

    auto schemes = parse_schemes(a.schemes);
    std::vector<ReplayResult> results;
    for (auto s : schemes) {
        std::cerr << "replaying " << to_string(s) << "... " << std::flush;
        results.push_back(replay(h, s, opt));
        const auto& r = results.back();
        std::cerr << to_string(r.status) << " (" << std::fixed << std::setprecision(2) << r.seconds << " s)"
                  << std::defaultfloat << (r.note.empty() ? "" : ": " + r.note) << '\n';
    }
    auto rep = report(results);

    fs::create_directories(a.out);
    std::ostringstream samples, table, csv, runtime;
    write_samples_csv(samples, results, a.timing);
    write_rank_table(table, rep.ranks);
    write_rank_csv(csv, rep.ranks);
    write_runtime_csv(runtime, rep.runtime);
    write_file(fs::path(a.out) / "samples.csv", samples.str());
    write_file(fs::path(a.out) / "rank_report.txt", table.str());
    write_file(fs::path(a.out) / "rank_report.csv", csv.str());
    write_file(fs::path(a.out) / "runtime.csv", runtime.str());
    for (const auto& c : rep.curves) {
        std::ostringstream os;
        write_curve_csv(os, c.curve);
        write_file(fs::path(a.out) / ("curve_" + std::string(to_string(c.scheme)) + ".csv"), os.str());
    }

    manifest["seed"] = a.seed;
    nlohmann::json ids = nlohmann::json::array();
    for (auto s : schemes) ids.push_back(std::string(to_string(s)));
    manifest["schemes"] = ids;
    manifest["params"] = {{"alpha", a.alpha},
                          {"rocket", a.rocket},
                          {"n1", a.n1},
                          {"feature_window", a.feature_window},
                          {"presumed_negatives", a.presumed}};
    manifest["timeout_seconds"] = a.timeout_s;
    manifest["c1_guard"] = {{"enabled", opt.guard.enabled},
                            {"max_builds", opt.guard.max_builds},
                            {"max_failed_tests", opt.guard.max_failed_tests}};
    manifest["timing_in_samples"] = a.timing;
    manifest["seed_rule"] = "derive_seed(derive_seed(master, fnv1a(scheme)), build_index)";
    write_file(fs::path(a.out) / "manifest.json", manifest.dump(2) + "\n");

    std::cout << table.str() << '\n';
    write_runtime_table(std::cout, rep.runtime);
    return 0;
}

struct RankArgs {
    std::string samples, out;
};

int cmd_rank(const RankArgs& a) {
    std::istringstream in(read_file(a.samples));
    auto ranks = scott_knott(read_samples_csv(in));
    std::ostringstream table, csv;
    write_rank_table(table, ranks);
    write_rank_csv(csv, ranks);
    if (!a.out.empty()) {
        fs::create_directories(a.out);
        write_file(fs::path(a.out) / "rank_report.txt", table.str());
        write_file(fs::path(a.out) / "rank_report.csv", csv.str());
    }
    std::cout << table.str();
    return 0;
}

void add_gen_options(CLI::App* cmd, GenArgs& g, const std::string& seed_flag) {
    cmd->add_option("--profile", g.profile, "Generator profile (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--kind", g.kind, "open_like or closed_like");
    cmd->add_option("--tests", g.tests, "Number of tests");
    cmd->add_option("--builds", g.builds, "Number of builds");
    cmd->add_option("--density", g.density, "Fraction of failing cells");
    cmd->add_option("--run-length", g.run_length, "Mean failure streak (open_like)");
    cmd->add_option("--cluster", g.cluster, "Share of failures from co-failure clusters (closed_like)");
    cmd->add_option(seed_flag, g.seed, "Generator seed");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regression test prioritization workbench"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Validate a build history and print its sanity report");
    c_ingest->add_option("input", ingest.input, "CSV or JSONL build history")->required()->check(CLI::ExistingFile);
    c_ingest->add_option("--format", ingest.format, "csv, jsonl or auto");
    c_ingest->add_option("--metadata", ingest.metadata, "Repository metadata sidecar (JSON)")
        ->check(CLI::ExistingFile);
    c_ingest->add_option("--write-useful", ingest.filtered_out, "Write the useful builds as CSV");
    c_ingest->add_flag("--strict", ingest.strict, "Exit nonzero when the sanity check fails");

    GenArgs gen;
    auto* c_gen = app.add_subcommand("gen", "Generate a synthetic build history as CSV");
    add_gen_options(c_gen, gen, "--seed");
    c_gen->add_option("-o,--output", gen.output, "Output CSV (default stdout)");

    RunArgs run;
    auto* c_run = app.add_subcommand("run", "Replay a history through schemes and rank them");
    c_run->add_option("--input", run.input, "CSV or JSONL build history")->check(CLI::ExistingFile);
    c_run->add_option("--format", run.format, "csv, jsonl or auto");
    add_gen_options(c_run, run.gen, "--gen-seed");
    c_run->add_option("--schemes", run.schemes, "Comma-separated ids (a1,a2,b1,b2,b3,b4,c1,c2,d1) or all");
    c_run->add_option("--seed", run.seed, "Master seed");
    c_run->add_option("--alpha", run.alpha, "Exponential decay rate for B3")->check(CLI::Range(0.0, 1.0));
    c_run->add_option("--n1", run.n1, "D1 failures before switching to certainty sampling")
        ->check(CLI::PositiveNumber);
    c_run->add_option("--feature-window", run.feature_window, "D1 history length used as features")
        ->check(CLI::PositiveNumber);
    c_run->add_option("--presumed-negatives", run.presumed, "D1 cap on presumed negatives per round");
    c_run->add_option("--rocket", run.rocket, "ROCKET weights w1 w2 w_rest")->expected(3)->delimiter(',');
    c_run->add_option("--timeout", run.timeout_s, "Per-scheme timeout in seconds");
    c_run->add_option("--out", run.out, "Output directory");
    c_run->add_flag("--no-c1-guard", run.no_c1_guard, "Run C1 even on projects above the size guard");
    c_run->add_flag("--timing", run.timing, "Record per-build wall-clock in samples.csv");

    RankArgs rank;
    auto* c_rank = app.add_subcommand("rank", "Scott-Knott rank an existing samples CSV");
    c_rank->add_option("samples", rank.samples, "samples.csv from a previous run")
        ->required()
        ->check(CLI::ExistingFile);
    c_rank->add_option("--out", rank.out, "Directory for rank_report.{txt,csv}");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*c_ingest) return cmd_ingest(ingest);
        if (*c_gen) return cmd_gen(gen);
        if (*c_run) return cmd_run(run);
        if (*c_rank) return cmd_rank(rank);
    } catch (const std::exception& e) {
        std::cerr << "tcpbench: error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
