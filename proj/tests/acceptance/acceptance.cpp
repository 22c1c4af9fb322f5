// One PASS/FAIL line per acceptance criterion. Sizes, seeds and time limits
// are fixed here.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>

#include "criteria.hpp"

namespace {

using Clock = std::chrono::steady_clock;

int failed = 0;

void line(int id, const char* name, const criteria::Tally& t, double seconds, double limit,
          const std::string& extra = {}) {
    bool pass = t.ok() && seconds < limit;
    if (!pass) ++failed;
    std::string checks = t.checks > 0 ? " checks=" + std::to_string(t.checks) : "";
    std::printf("%s %2d %-24s cases=%d%s failures=%d time=%.2fs limit=%.0fs%s\n", pass ? "PASS" : "FAIL", id, name,
                t.cases, checks.c_str(), t.failures, seconds, limit, extra.c_str());
    for (const auto& n : t.notes) std::printf("       %s\n", n.c_str());
}

template <class F>
auto timed(F&& f, double& seconds) {
    auto start = Clock::now();
    auto out = f();
    seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return out;
}

}  // namespace

int main() {
    namespace fs = std::filesystem;
    fs::path scratch = fs::temp_directory_path() / ("sqpo-acceptance-" + std::to_string(::getpid()));
    double s = 0;

    auto c1 = timed([] { return criteria::universal_properties(101, 100); }, s);
    line(1, "universal properties", c1, s, 60);

    auto c2 = timed([] { return criteria::final_complements(202, 100); }, s);
    line(2, "final complements", c2, s, 120);

    auto c3 = timed([] { return criteria::rule_composition(303, 200); }, s);
    line(3, "rule composition", c3.exact, s, 120);
    line(4, "reversible composition", c3.reversible, s, 120);

    auto c5 = timed([] { return criteria::irreversible_merge(); }, s);
    line(5, "irreversible merge", c5, s, 10);

    auto c6 = timed([] { return criteria::hierarchy_composition(606, 100); }, s);
    line(6, "hierarchy composition", c6, s, 180);

    auto c7 = timed([] { return criteria::hierarchy_reversibility(); }, s);
    line(7, "hierarchy reversibility", c7, s, 10);

    auto c8 = timed([] { return criteria::propagation(808, 100); }, s);
    line(8, "propagation", c8, s, 60);

    auto c9 = timed([] { return criteria::audit_round_trips(909, 50); }, s);
    line(9, "audit round trips", c9, s, 120);

    auto c10 = timed([] { return criteria::merge_symmetry(1010, 50); }, s);
    line(10, "merge symmetry", c10, s, 120);

    auto c11 = timed([&] { return criteria::storage_size(1111, 500, 50, scratch / "storage"); }, s);
    double budget = 0.2 * 50 * static_cast<double>(c11.host_bytes);
    criteria::Tally t11 = c11.tally;
    if (static_cast<double>(c11.bytes) >= budget) t11.fail("store too large");
    line(11, "storage size", t11, s, 30,
         " bytes=" + std::to_string(c11.bytes) + " budget=" + std::to_string(static_cast<long long>(budget)));

    auto c12 = timed([&] { return criteria::cli_equivalence(scratch / "cli"); }, s);
    line(12, "cli equivalence", c12, s, 30);

    fs::remove_all(scratch);
    std::printf("%s\n", failed == 0 ? "ALL PASS" : "SOME FAILED");
    return failed == 0 ? 0 : 1;
}
