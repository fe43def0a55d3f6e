#include <cstdio>

#include "mlshe/acceptance.hpp"

int main() {
    const auto results = mlshe::acceptance::run_all();
    bool all = true;
    for (const auto& r : results) {
        std::printf("[%s] %2d %-44s %7.2fs  %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                    r.seconds, r.details.c_str());
        all = all && r.pass;
    }
    std::printf("%s\n", all ? "acceptance: all criteria passed" : "acceptance: FAILURES present");
    return all ? 0 : 1;
}
