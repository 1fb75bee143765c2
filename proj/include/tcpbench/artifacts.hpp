#pragma once

// CSV renderings of replay output.
//
//   samples   algorithm,build_index,apfd,elapsed_ms
//   curve     k,mean_recall
//   runtime   algorithm,status,seconds,builds

#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "tcpbench/replay.hpp"

namespace tcpbench {

/// `with_timing` fills elapsed_ms with wall-clock per build; otherwise the
/// column is left empty so the file depends only on the configuration.
inline void write_samples_csv(std::ostream& out, const std::vector<ReplayResult>& results, bool with_timing) {
    out << "algorithm,build_index,apfd,elapsed_ms\n";
    for (const auto& r : results) {
        if (r.status != RunStatus::Completed) continue;
        for (const auto& s : r.samples) {
            out << to_string(s.scheme) << ',' << s.build_index << ',' << std::setprecision(15) << s.apfd << ',';
            if (with_timing)
                out << std::fixed << std::setprecision(3)
                    << std::chrono::duration<double, std::milli>(s.elapsed).count() << std::defaultfloat;
            out << '\n';
        }
    }
}

/// Groups the apfd column by algorithm, in first-seen order.
inline std::vector<Treatment> read_samples_csv(std::istream& in) {
    std::vector<Treatment> out;
    std::map<std::string, std::size_t> index;
    std::string line;
    std::size_t lineno = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split(line, ',');
        if (header) {
            if (cells.size() < 3 || cells[0] != "algorithm" || cells[2] != "apfd")
                throw ParseError(lineno, "expected header algorithm,build_index,apfd[,elapsed_ms]");
            header = false;
            continue;
        }
        if (cells.size() < 3) throw ParseError(lineno, "expected at least 3 columns");
        double v = 0.0;
        try {
            std::size_t used = 0;
            v = std::stod(std::string(cells[2]), &used);
            if (used != cells[2].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError(lineno, "invalid apfd value '" + std::string(cells[2]) + "'");
        }
        std::string id(cells[0]);
        auto [it, fresh] = index.emplace(id, out.size());
        if (fresh) out.push_back({id, {}});
        out[it->second].observations.push_back(v);
    }
    if (out.empty()) throw Error("no samples");
    return out;
}

inline void write_curve_csv(std::ostream& out, const DetectionCurve& c) {
    out << "k,mean_recall\n";
    for (std::size_t i = 0; i < c.x.size(); ++i) out << c.x[i] << ',' << std::setprecision(15) << c.y[i] << '\n';
}

inline void write_runtime_csv(std::ostream& out, const std::vector<RuntimeRow>& rows) {
    out << "algorithm,status,seconds,builds\n";
    for (const auto& r : rows)
        out << to_string(r.scheme) << ',' << to_string(r.status) << ',' << std::fixed << std::setprecision(3)
            << r.seconds << std::defaultfloat << ',' << r.builds << '\n';
}

/// Table of total wall-clock seconds per scheme; n/a for schemes that did
/// not finish.
inline void write_runtime_table(std::ostream& out, const std::vector<RuntimeRow>& rows) {
    out << std::left << std::setw(6) << "what" << "seconds\n";
    for (const auto& r : rows) {
        out << std::setw(6) << to_string(r.scheme);
        if (r.status == RunStatus::Completed)
            out << std::fixed << std::setprecision(1) << r.seconds << std::defaultfloat << '\n';
        else
            out << "n/a (" << to_string(r.status) << ")\n";
    }
}

} // namespace tcpbench
