#pragma once

// The four-test, five-build tables used to illustrate each scheme. One row
// per test, one character per build: 'x' fail, '.' pass, ' ' absent.
// The last column is the build being prioritized.

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "tcpbench/history.hpp"

namespace fixtures {

inline tcpbench::BuildHistory table(const std::vector<std::string_view>& rows) {
    using tcpbench::Outcome;
    tcpbench::BuildHistory h("fixture");
    for (std::size_t t = 0; t < rows.size(); ++t) h.add_test("T" + std::to_string(t + 1));
    const std::size_t builds = rows.front().size();
    for (std::size_t b = 0; b < builds; ++b) {
        std::vector<Outcome> row;
        for (auto r : rows) row.push_back(r[b] == 'x' ? Outcome::Fail : r[b] == '.' ? Outcome::Pass : Outcome::Absent);
        h.append_build("B" + std::to_string(b + 1), std::move(row));
    }
    return h;
}

inline tcpbench::BuildHistory a2() { return table({"x..xx", "...x.", ".x..x", "xxxx."}); }
inline tcpbench::BuildHistory b1() { return table({"xx...", "...xx", "..x..", "x..xx"}); }
inline tcpbench::BuildHistory b2() { return table({"x....", ".xxxx", "x.x..", "xxxxx"}); }
inline tcpbench::BuildHistory b3() { return table({"x..xx", "...x.", ".xx..", "xxx.x"}); }
inline tcpbench::BuildHistory b4() { return table({".x...", "xx...", "..xxx", "xxx.."}); }
inline tcpbench::BuildHistory c1() { return table({".xx.x", "xxx.x", ".x...", "x..x."}); }
inline tcpbench::BuildHistory c2() { return table({"x..xx", "...x.", ".xx.x", "xxx.x"}); }
inline tcpbench::BuildHistory d1() { return table({"...x.", ".xx.x", "xxx.x", "xx.xx"}); }

inline std::vector<std::string> names(std::initializer_list<const char*> l) { return {l.begin(), l.end()}; }

} // namespace fixtures
