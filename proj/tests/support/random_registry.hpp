#pragma once

#include "fixtures.hpp"

#include <random>
#include <set>
#include <string>

namespace vulngraph::testing {

struct RandomRegistryShape {
    int max_libraries = 6;
    int max_versions = 4;
    int max_deps = 3;
    bool prereleases = true;
    bool yanked = true;
    bool optional = true;
    bool dangling = true;
};

/// Small random registry: libraries l0..lN, self and mutual cycles allowed,
/// feature tables restricted to plain names.
inline RegistrySnapshot random_registry(std::mt19937& rng, const RandomRegistryShape& shape = {}) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    static const char* versions[] = {"0.1.0", "0.1.3", "0.2.0", "0.2.5", "1.0.0", "1.2.0", "1.4.1", "2.0.0"};
    static const char* pres[] = {"1.0.0-alpha", "2.0.0-rc.1", "0.2.0-beta"};
    static const char* reqs[] = {"^0.1", "^1", "~1.2", "*", ">=0.2, <2", "=1.0.0", "^0.2.0", ">1.0.0-alpha, <1.1",
                                 "^2.0.0-rc.1", "<0.2", "1.4", "^3"};
    RegistryBuilder b;
    int libs = pick(1, shape.max_libraries);
    for (int l = 0; l < libs; ++l) {
        b.lib("l" + std::to_string(l));
        std::set<std::string> used;
        int n = pick(1, shape.max_versions);
        for (int v = 0; v < n; ++v) {
            std::string num = shape.prereleases && pick(0, 5) == 0 ? pres[pick(0, 2)] : versions[pick(0, 7)];
            if (!used.insert(num).second) continue;
            b.ver(num, shape.yanked && pick(0, 6) == 0);
            std::vector<std::string> optional_names;
            for (int d = pick(0, shape.max_deps); d > 0; --d) {
                std::string target =
                    shape.dangling && pick(0, 12) == 0 ? "ghost" : "l" + std::to_string(pick(0, libs - 1));
                int k = pick(0, 9);
                auto kind = k == 0 ? ingest::DependencyKind::dev
                            : k == 1 ? ingest::DependencyKind::build
                                     : ingest::DependencyKind::normal;
                bool optional = shape.optional && pick(0, 3) == 0;
                if (optional) optional_names.push_back(target);
                b.dep(target, reqs[pick(0, 11)], kind, optional, pick(0, 3) != 0);
            }
            if (!optional_names.empty() && pick(0, 1)) {
                std::vector<std::string> defaults;
                std::vector<std::string> extra;
                for (const auto& o : optional_names) (pick(0, 1) ? defaults : extra).push_back(o);
                if (!extra.empty()) {
                    b.feature("extra", extra);
                    if (pick(0, 1)) defaults.push_back("extra");
                }
                b.feature("default", defaults);
            }
        }
    }
    return b.build();
}

} // namespace vulngraph::testing
