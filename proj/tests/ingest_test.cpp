#include "support/fixtures.hpp"
#include "support/temp_dir.hpp"

#include <gtest/gtest.h>

#include <vulngraph/ingest.hpp>

#include <filesystem>
#include <random>

using namespace vulngraph;
using namespace vulngraph::ingest;
using vulngraph::testing::RegistryBuilder;
using vulngraph::testing::TempDir;

namespace {

const char* abort_record =
    R"j({"id":"abort","name":"abort","created_at":"2018-01-09T17:32:09.879845+00:00",)j"
    R"j("updated_at":"2021-01-12T22:27:17.016095+00:00","description":"Abnormal termination (stable, no_std)",)j"
    R"j("downloads":3506,"recent_downloads":1972,"max_stable_version":"0.1.3","max_version":"0.1.3",)j"
    R"j("newest_version":"0.1.3","versions":[{"num":"0.1.0","yanked":false},{"num":"0.1.3","yanked":false}]})j";

const char* frontier_advisory =
    R"j({"databaseId":9045,"severity":"MODERATE","cvss":0.0,"publishedAt":"2022-01-14T21:03:36Z",)j"
    R"j("summary":"Integer underflow in Frontier","updatedAt":"2022-01-15T00:03:46Z","value":"CVE-2022-21685",)j"
    R"j("vulnerableVersionRange":"<= 0.1.0","firstPatchedVersion":null,"ecosystem":"RUST","package_name":"frontier"})j";

std::string lib_line(const std::string& name, const std::string& version = "1.0.0") {
    return R"j({"name":")j" + name + R"j(","newest_version":")j" + version + R"j(","versions":[{"num":")j" + version +
           R"j("}]})j";
}

} // namespace

TEST(LoadRegistry, LibraryMetadataRecord) {
    TempDir dir;
    auto snap = load_registry(dir.file("r.ndjson", std::string(abort_record) + "\n"));
    ASSERT_EQ(snap.libraries.size(), 1u);
    const auto& r = snap.libraries[0];
    EXPECT_EQ(r.name, "abort");
    EXPECT_EQ(r.newest_version, "0.1.3");
    EXPECT_EQ(r.downloads, 3506u);
    EXPECT_EQ(r.recent_downloads, 1972u);
    EXPECT_EQ(r.description, "Abnormal termination (stable, no_std)");
    EXPECT_EQ(r.versions.size(), 2u);
}

TEST(LoadRegistry, EmptyFileGivesEmptySnapshot) {
    TempDir dir;
    EXPECT_TRUE(load_registry(dir.file("r.ndjson", "")).libraries.empty());
    EXPECT_TRUE(load_registry(dir.file("r2.ndjson", "\n\n")).libraries.empty());
}

TEST(LoadRegistry, MissingFileIsAnIoError) {
    EXPECT_THROW(load_registry("/nonexistent/registry.ndjson"), io_error);
}

TEST(LoadRegistry, DuplicateNameRejectedInStrictMode) {
    std::string text;
    for (auto name : {"a", "b", "c", "b", "d"}) text += lib_line(name) + "\n";
    try {
        parse_registry(text, LoadMode::strict);
        FAIL() << "expected validation_error";
    } catch (const validation_error& e) {
        ASSERT_EQ(e.issues().size(), 1u);
        EXPECT_EQ(e.issues()[0].line, 4u);
        EXPECT_NE(e.issues()[0].message.find("'b'"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
    }
    auto lenient = parse_registry(text, LoadMode::lenient);
    EXPECT_EQ(lenient.records.size(), 4u);
    EXPECT_EQ(lenient.issues.size(), 1u);
}

TEST(LoadRegistry, CollectsEveryFailureWithLineNumbers) {
    std::string text = lib_line("ok") + "\n" + "{not json\n" +
                       R"j({"name":"nover","newest_version":"1.0.0","versions":[]})j" + "\n" +
                       R"j({"name":"badnewest","newest_version":"2.0.0","versions":[{"num":"1.0.0"}]})j" + "\n" +
                       R"j({"name":"badreq","newest_version":"1.0.0","versions":[{"num":"1.0.0","dependencies":[{"target_name":"x","requirement":"!!"}]}]})j" +
                       "\n" +
                       R"j({"name":"badkind","newest_version":"1.0.0","versions":[{"num":"1.0.0","dependencies":[{"target_name":"x","requirement":"1","kind":"peer"}]}]})j" +
                       "\n" +
                       R"j({"name":"dupver","newest_version":"1.0.0","versions":[{"num":"1.0.0"},{"num":"1.0.0+b"}]})j" +
                       "\n" +
                       R"j({"name":"badfeat","newest_version":"1.0.0","versions":[{"num":"1.0.0","features":{"default":["nope"]}}]})j" +
                       "\n";
    auto result = parse_registry(text, LoadMode::lenient);
    EXPECT_EQ(result.records.size(), 1u);
    ASSERT_EQ(result.issues.size(), 7u);
    std::vector<std::size_t> lines;
    for (const auto& i : result.issues) lines.push_back(i.line);
    EXPECT_EQ(lines, (std::vector<std::size_t>{2, 3, 4, 5, 6, 7, 8}));
    EXPECT_EQ(result.issues[2].record, "badnewest");
    EXPECT_THROW(parse_registry(text, LoadMode::strict), validation_error);
}

TEST(LoadRegistry, FeatureGraphAcceptsDependencyReferences) {
    auto line =
        R"j({"name":"f","newest_version":"1.0.0","versions":[{"num":"1.0.0","features":{"default":["std"],"std":["dep:serde","log/std","serde?/alloc"]},)j"
        R"j("dependencies":[{"target_name":"serde","requirement":"1","optional":true},{"target_name":"log","requirement":"0.4"}]}]})j";
    auto result = parse_registry(line, LoadMode::strict);
    ASSERT_EQ(result.records.size(), 1u);
    const auto& deps = result.records[0].versions[0].dependencies;
    EXPECT_TRUE(deps[0].optional);
    EXPECT_TRUE(deps[0].default_features);
    EXPECT_EQ(deps[1].kind, DependencyKind::normal);
}

TEST(LoadRegistry, SerializeLoadIsIdentity) {
    std::mt19937 rng(3);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    for (int round = 0; round < 30; ++round) {
        RegistryBuilder b;
        int libs = pick(0, 6);
        for (int l = 0; l < libs; ++l) {
            b.lib("lib" + std::to_string(l)).downloads(std::uint64_t(pick(0, 100000)));
            int vers = pick(1, 4);
            for (int v = 0; v < vers; ++v) {
                b.ver("0." + std::to_string(v) + "." + std::to_string(pick(0, 9)) + (pick(0, 3) == 0 ? "-rc.1" : ""),
                      pick(0, 5) == 0);
                for (int d = pick(0, 3); d > 0; --d) {
                    b.dep("lib" + std::to_string(pick(0, 6)), pick(0, 1) ? "^0." + std::to_string(pick(0, 3)) : ">=0.1, <0.3",
                          DependencyKind(pick(0, 2)), pick(0, 1) == 1, pick(0, 1) == 1);
                }
            }
        }
        auto snap = b.build();
        auto text = serialize_registry(snap);
        auto again = parse_registry(text, LoadMode::strict);
        EXPECT_EQ(RegistrySnapshot{again.records}, snap);
        EXPECT_EQ(serialize_registry(RegistrySnapshot{again.records}), text);
    }
}

TEST(LoadAdvisories, AdvisoryFieldRecord) {
    TempDir dir;
    auto list = load_advisories(dir.file("a.ndjson", std::string(frontier_advisory) + "\n"));
    ASSERT_EQ(list.size(), 1u);
    const auto& a = list[0];
    EXPECT_EQ(a.database_id, 9045);
    EXPECT_EQ(a.value, "CVE-2022-21685");
    EXPECT_EQ(a.severity, Severity::moderate);
    EXPECT_EQ(a.cvss, 0.0);
    EXPECT_EQ(a.vulnerable_version_range.source(), "<= 0.1.0");
    EXPECT_FALSE(a.first_patched_version.has_value());
    EXPECT_EQ(a.package_name, "frontier");
    EXPECT_FALSE(a.cwe_ids.has_value());
}

TEST(LoadAdvisories, EmptyAndNormalization) {
    EXPECT_TRUE(parse_advisories("").records.empty());
    std::string line = frontier_advisory;
    line.replace(line.find("MODERATE"), 8, "high");
    auto list = parse_advisories(line).records;
    ASSERT_EQ(list.size(), 1u);
    EXPECT_EQ(list[0].severity, Severity::high);
    EXPECT_EQ(to_json(list[0])["severity"], "HIGH");
}

TEST(LoadAdvisories, PerRecordFailures) {
    auto with = [](std::string from, std::string to) {
        std::string line = frontier_advisory;
        line.replace(line.find(from), from.size(), to);
        return line;
    };
    std::string text = with("<= 0.1.0", "<= zero") + "\n" + with("CVE-2022-21685", "GHSA-xxxx") + "\n" +
                       with("MODERATE", "SEVERE") + "\n" + with("\"cvss\":0.0", "\"cvss\":11") + "\n" +
                       with("\"firstPatchedVersion\":null", "\"firstPatchedVersion\":{\"identifier\":\"0.2.0\"}") +
                       "\n" + with("\"databaseId\":9045", "\"databaseId\":9046") + "\n";
    auto result = parse_advisories(text, LoadMode::lenient);
    ASSERT_EQ(result.issues.size(), 4u);
    EXPECT_EQ(result.issues[0].line, 1u);
    EXPECT_NE(result.issues[0].message.find("vulnerableVersionRange"), std::string::npos);
    ASSERT_EQ(result.records.size(), 2u);
    EXPECT_EQ(result.records[0].first_patched_version, std::optional<std::string>("0.2.0"));
}

TEST(LoadAdvisories, CweEnrichment) {
    std::string line = frontier_advisory;
    line.insert(line.size() - 1, R"j(,"cwe_ids":["CWE-416","CWE-908"])j");
    auto a = parse_advisories(line).records.at(0);
    ASSERT_TRUE(a.cwe_ids);
    EXPECT_EQ(a.cwe_ids->size(), 2u);
    auto round = parse_advisories(serialize_advisories({a})).records.at(0);
    EXPECT_EQ(round, a);
}

class IncrementalUpdate : public ::testing::Test {
protected:
    std::string base = lib_line("a") + "\n" + lib_line("b") + "\n";
    RegistrySnapshot old = RegistrySnapshot{parse_registry(base).records};
    RecordHashes hashes = record_hashes(old);
};

TEST_F(IncrementalUpdate, IdenticalBytesGiveEmptyChangeset) {
    auto u = incremental_update(old, base, hashes);
    EXPECT_TRUE(u.changes.empty());
    EXPECT_EQ(u.snapshot, old);
    EXPECT_EQ(u.hashes, hashes);
    EXPECT_EQ(u.changes.content_hash, sha256_hex(base));
}

TEST_F(IncrementalUpdate, WhitespaceAndKeyOrderDoNotCountAsChanges) {
    std::string reordered = R"j({ "versions": [ {"num": "1.0.0"} ], "newest_version": "1.0.0", "name": "a" })j"
                            "\n" +
                            lib_line("b") + "\n";
    EXPECT_TRUE(incremental_update(old, reordered, hashes).changes.empty());
}

TEST_F(IncrementalUpdate, NewVersionMarksModified) {
    std::string changed =
        R"j({"name":"a","newest_version":"1.1.0","versions":[{"num":"1.0.0"},{"num":"1.1.0"}]})j"
        "\n" +
        lib_line("b") + "\n";
    auto u = incremental_update(old, changed, hashes);
    EXPECT_EQ(u.changes.modified, std::vector<std::string>{"a"});
    EXPECT_TRUE(u.changes.added.empty());
    EXPECT_TRUE(u.changes.removed.empty());
    EXPECT_EQ(u.snapshot.find("a")->versions.size(), 2u);
}

TEST_F(IncrementalUpdate, AppendedAndDroppedLibraries) {
    auto u = incremental_update(old, lib_line("a") + "\n" + lib_line("c") + "\n", hashes);
    EXPECT_EQ(u.changes.added, std::vector<std::string>{"c"});
    EXPECT_EQ(u.changes.removed, std::vector<std::string>{"b"});
    EXPECT_EQ(u.snapshot.libraries.size(), 2u);
}

TEST_F(IncrementalUpdate, IsIdempotent) {
    std::string next = base + lib_line("c") + "\n";
    auto first = incremental_update(old, next, hashes);
    EXPECT_FALSE(first.changes.empty());
    auto second = incremental_update(first.snapshot, next, first.hashes);
    EXPECT_TRUE(second.changes.empty());
    EXPECT_EQ(second.snapshot, first.snapshot);
}

TEST_F(IncrementalUpdate, CorruptFeedAbortsWithoutTouchingOldSnapshot) {
    auto before = old;
    EXPECT_THROW(incremental_update(old, lib_line("a") + "\n{oops\n", hashes), validation_error);
    EXPECT_EQ(old, before);
}

TEST(IncrementalAdvisoryUpdate, KeyedByDatabaseId) {
    std::string line = frontier_advisory;
    auto old = parse_advisories(line).records;
    auto hashes = record_hashes(old);
    std::string changed = line;
    changed.replace(changed.find("MODERATE"), 8, "HIGH");
    auto u = incremental_update_advisories(old, changed, hashes);
    EXPECT_EQ(u.changes.modified_advisories, std::vector<std::string>{"9045"});
    EXPECT_EQ(u.snapshot.at(0).severity, Severity::high);
    EXPECT_TRUE(incremental_update_advisories(u.snapshot, changed, u.hashes).changes.empty());
}

TEST(Lockfile, SingleStanza) {
    auto entries = parse_lockfile_text("[[package]]\nname = \"rand\"\nversion = \"0.8.5\"\n");
    ASSERT_EQ(entries.size(), 1u);
    EXPECT_EQ(entries[0].name, "rand");
    EXPECT_EQ(entries[0].version, semver::parse_version("0.8.5"));
}

TEST(Lockfile, EmptyFile) { EXPECT_TRUE(parse_lockfile_text("").empty()); }

TEST(Lockfile, KeepsDuplicateMajors) {
    auto entries = parse_lockfile_text(
        "# This file is automatically @generated by Cargo.\n"
        "version = 3\n\n"
        "[[package]]\nname = \"rand\"\nversion = \"0.7.3\"\n"
        "source = \"registry+https://github.com/rust-lang/crates.io-index\"\n"
        "dependencies = [\n \"getrandom 0.1.16\",\n \"libc\",\n]\n\n"
        "[[package]]\nname = \"rand\"\nversion = \"0.8.5\"\nchecksum = \"abc\"\n\n"
        "[metadata]\n\"checksum foo\" = \"x\"\n");
    ASSERT_EQ(entries.size(), 2u);
    EXPECT_EQ(entries[0].version, semver::parse_version("0.7.3"));
    EXPECT_EQ(entries[1].version, semver::parse_version("0.8.5"));
}

TEST(Lockfile, MissingVersionNamesTheStanza) {
    try {
        parse_lockfile_text("[[package]]\nname = \"a\"\nversion = \"1.0.0\"\n[[package]]\nname = \"b\"\n");
        FAIL() << "expected lockfile_error";
    } catch (const lockfile_error& e) {
        EXPECT_EQ(e.stanza(), 2u);
        EXPECT_NE(std::string(e.what()).find("missing version"), std::string::npos);
    }
    EXPECT_THROW(parse_lockfile_text("[[package]]\nversion = \"1.0.0\"\n"), lockfile_error);
    EXPECT_THROW(parse_lockfile_text("[[package]]\nname = \"a\"\nversion = \"x\"\n"), lockfile_error);
}
