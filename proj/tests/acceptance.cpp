// Acceptance runner: one line per criterion, nonzero exit if any fails.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "suite.hpp"

int main(int argc, char** argv) {
    perfprism::u64 seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20240611;
    int failed = 0;
    for (const auto& e : perfprism::suite::registry()) {
        auto o = perfprism::suite::run(e, seed);
        std::printf("criterion %2d %-20s %s  (%.2fs%s)  %s\n", e.id, e.name, o.pass ? "PASS" : "FAIL", o.seconds,
                    o.limit > 0 ? (", limit " + std::to_string(int(o.limit)) + "s").c_str() : "", o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d of %zu criteria passed\n", int(perfprism::suite::registry().size()) - failed,
                perfprism::suite::registry().size());
    return failed ? 1 : 0;
}
