// End-to-end verification suite: runs every acceptance criterion and prints
// one line per criterion. Exit 0 iff all pass.
#include <cstdio>
#include <string>

#include "qrlab/verify.hpp"

int main(int argc, char** argv) {
    std::string only;
    int jobs = 4;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--only" && i + 1 < argc)
            only = argv[++i];
        else if (a == "--jobs" && i + 1 < argc)
            jobs = std::atoi(argv[++i]);
        else {
            std::fprintf(stderr, "usage: %s [--only TAG] [--jobs N]\n", argv[0]);
            return 2;
        }
    }
    auto results = qrlab::run_verification(only, jobs);
    std::fputs(qrlab::verification_table(results).c_str(), stdout);
    for (const auto& r : results)
        if (!r.pass) return 1;
    return 0;
}
