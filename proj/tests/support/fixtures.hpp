#pragma once

#include <vulngraph/ingest.hpp>

#include <string>
#include <vector>

namespace vulngraph::testing {

using ingest::Advisory;
using ingest::DependencyKind;
using ingest::RegistrySnapshot;

/// Fluent construction of registry snapshots for tests.
class RegistryBuilder {
public:
    RegistryBuilder& lib(std::string name) {
        ingest::LibraryRecord r;
        r.id = name;
        r.name = std::move(name);
        r.created_at = "2020-01-01T00:00:00Z";
        r.updated_at = "2021-01-01T00:00:00Z";
        _snap.libraries.push_back(std::move(r));
        return *this;
    }

    RegistryBuilder& ver(const std::string& num, bool yanked = false) {
        ingest::VersionRecord v;
        v.num = semver::parse_version(num);
        v.yanked = yanked;
        current().versions.push_back(std::move(v));
        return *this;
    }

    RegistryBuilder& dep(std::string target, const std::string& req, DependencyKind kind = DependencyKind::normal,
                         bool optional = false, bool default_features = true,
                         std::vector<std::string> features = {}) {
        current().versions.back().dependencies.push_back(ingest::DependencyDecl{
            std::move(target), semver::parse_requirement(req), kind, optional, default_features,
            std::move(features)});
        return *this;
    }

    RegistryBuilder& feature(const std::string& name, std::vector<std::string> enables) {
        current().versions.back().features[name] = std::move(enables);
        return *this;
    }

    RegistryBuilder& newest(std::string num) {
        current().newest_version = std::move(num);
        return *this;
    }

    RegistryBuilder& downloads(std::uint64_t n) {
        current().downloads = n;
        return *this;
    }

    RegistrySnapshot build() const {
        auto snap = _snap;
        for (auto& r : snap.libraries) {
            if (r.newest_version.empty() && !r.versions.empty()) {
                auto best = r.versions.front().num;
                for (const auto& v : r.versions) {
                    if (v.num > best) best = v.num;
                }
                r.newest_version = best.to_string();
                r.max_version = r.newest_version;
            }
        }
        return snap;
    }

private:
    ingest::LibraryRecord& current() { return _snap.libraries.back(); }

    RegistrySnapshot _snap;
};

inline Advisory make_advisory(std::int64_t id, std::string cve, std::string package, const std::string& range,
                              ingest::Severity severity = ingest::Severity::high, double cvss = 7.5,
                              std::optional<std::string> patched = std::nullopt,
                              std::optional<std::vector<std::string>> cwes = std::nullopt) {
    return Advisory{.database_id = id,
                    .value = std::move(cve),
                    .severity = severity,
                    .cvss = cvss,
                    .published_at = "2021-01-01T00:00:00Z",
                    .updated_at = "2021-01-02T00:00:00Z",
                    .summary = "test advisory",
                    .vulnerable_version_range = semver::parse_requirement(range),
                    .first_patched_version = std::move(patched),
                    .ecosystem = "RUST",
                    .package_name = std::move(package),
                    .cwe_ids = std::move(cwes)};
}

/// The rand 0.8.5 dependency shape, with two rand_core releases available.
inline RegistrySnapshot rand_registry() {
    return RegistryBuilder()
        .lib("rand")
        .ver("0.8.5")
        .feature("default", {"std", "std_rng"})
        .feature("std", {"rand_core/std", "rand_chacha/std", "alloc", "libc"})
        .feature("alloc", {"rand_core/alloc"})
        .feature("std_rng", {"rand_chacha"})
        .feature("small_rng", {})
        .dep("rand_core", "^0.6.0")
        .dep("rand_chacha", "^0.3.0", DependencyKind::normal, true, false)
        .dep("libc", "^0.2.22", DependencyKind::normal, true, false)
        .dep("rand_pcg", "^0.3.0", DependencyKind::dev)
        .dep("bincode", "^1.2.1", DependencyKind::dev)
        .lib("rand_core")
        .ver("0.6.0")
        .feature("std", {"alloc"})
        .feature("alloc", {})
        .ver("0.6.3")
        .feature("std", {"alloc", "getrandom", "getrandom/std"})
        .feature("alloc", {})
        .dep("getrandom", "^0.2", DependencyKind::normal, true)
        .lib("rand_chacha")
        .ver("0.3.1")
        .feature("default", {"std"})
        .feature("std", {"ppv-lite86/std"})
        .dep("ppv-lite86", "^0.2.8", DependencyKind::normal, false, false, {"simd"})
        .dep("rand_core", "^0.6.0")
        .lib("ppv-lite86")
        .ver("0.2.16")
        .feature("default", {"std"})
        .feature("std", {})
        .feature("simd", {})
        .lib("libc")
        .ver("0.2.121")
        .ver("0.2.124")
        .lib("getrandom")
        .ver("0.2.6")
        .dep("libc", "^0.2.120")
        .dep("cfg-if", "^1")
        .lib("cfg-if")
        .ver("1.0.0")
        .lib("rand_pcg")
        .ver("0.3.1")
        .dep("rand_core", "^0.6.0")
        .lib("bincode")
        .ver("1.3.3")
        .build();
}

/// beef vulnerable below 0.5.0; audiotags 0.3.0 pulls an affected beef while
/// audiotags 0.2.7182 (pinned by allaudiotags) resolves beef 0.5.0.
inline RegistrySnapshot beef_registry() {
    return RegistryBuilder()
        .lib("beef")
        .ver("0.4.4")
        .ver("0.5.0")
        .lib("audiotags")
        .ver("0.2.7182")
        .dep("beef", "^0.5")
        .ver("0.3.0")
        .dep("beef", "^0.4")
        .lib("allaudiotags")
        .ver("0.1.0")
        .dep("audiotags", "=0.2.7182")
        .build();
}

inline Advisory beef_advisory() {
    return make_advisory(9001, "CVE-2020-36442", "beef", "<0.5.0", ingest::Severity::critical, 9.8,
                         std::string("0.5.0"), std::vector<std::string>{"CWE-362"});
}

/// Ten libraries, three advisories, hand-enumerated ground truth:
///  - direct: vulnA@1.0.0, vulnB@0.1.0, vulnB@0.2.0, vulnC@2.0.0
///  - transitive: app1@1.0.0, app2@1.0.0, app3@0.5.0, app4@1.0.0
///  - excluded: app1@1.1.0 (resolves vulnA 1.1.0), app5 (dev only),
///    app6 (optional, not activated)
///  - newest still affected: vulnB (yanked), vulnC
inline RegistrySnapshot stats_fixture_registry() {
    return RegistryBuilder()
        .lib("vulnA").ver("1.0.0").ver("1.1.0")
        .lib("vulnB").ver("0.1.0").ver("0.2.0", true)
        .lib("vulnC").ver("2.0.0")
        .lib("app1").ver("1.0.0").dep("vulnA", "=1.0.0").ver("1.1.0").dep("vulnA", "^1")
        .lib("app2").ver("1.0.0").dep("vulnB", "^0.1")
        .lib("app3").ver("0.5.0").dep("app2", "^1")
        .lib("app4").ver("1.0.0").dep("vulnC", "^2")
        .lib("app5").ver("1.0.0").dep("vulnC", "^2", DependencyKind::dev)
        .lib("util").ver("1.0.0")
        .lib("app6").ver("1.0.0").dep("util", "^1").dep("vulnB", "^0.1", DependencyKind::normal, true)
        .build();
}

inline std::vector<Advisory> stats_fixture_advisories() {
    return {make_advisory(1, "CVE-2021-1001", "vulnA", "<1.1.0", ingest::Severity::high, 7.5, std::string("1.1.0"),
                          std::vector<std::string>{"CWE-416"}),
            make_advisory(2, "CVE-2021-1002", "vulnB", "<=0.2.0", ingest::Severity::critical, 9.8, std::nullopt,
                          std::vector<std::string>{"CWE-416", "CWE-908"}),
            make_advisory(3, "CVE-2021-1003", "vulnC", ">=2.0.0, <3", ingest::Severity::low, 3.1, std::string("3.0.0"))};
}

} // namespace vulngraph::testing
