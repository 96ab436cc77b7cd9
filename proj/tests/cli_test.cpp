#include "support/fixtures.hpp"
#include "support/temp_dir.hpp"

#include <gtest/gtest.h>

#include <vulngraph/cli.hpp>

#include <cstdlib>
#include <sstream>

using namespace vulngraph;
using vulngraph::testing::TempDir;
namespace vt = vulngraph::testing;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

struct Workspace {
    TempDir dir{"cli"};
    std::string registry;
    std::string advisories;
    std::string out;

    Workspace() {
        registry = dir.file("registry.ndjson", ingest::serialize_registry(vt::stats_fixture_registry())).string();
        advisories =
            dir.file("advisories.ndjson", ingest::serialize_advisories(vt::stats_fixture_advisories())).string();
        out = (dir.path / "out").string();
    }

    Run ingest() { return run({"--out", out, "ingest", "--registry", registry, "--advisories", advisories}); }
};

nlohmann::json load_json(const std::filesystem::path& p) { return nlohmann::json::parse(read_file(p)); }

} // namespace

TEST(Cli, IngestBuildWritesManifestWithMatchingDigests) {
    Workspace ws;
    ASSERT_EQ(ws.ingest().code, 0);
    auto r = run({"--out", ws.out, "build"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto build = std::filesystem::path(ws.out) / "build";
    auto manifest = load_json(build / "manifest.json");
    ASSERT_EQ(manifest["files"].size(), 3u);
    for (const auto& f : manifest["files"]) {
        EXPECT_EQ(sha256_hex(read_file(build / f["path"].get<std::string>())), f["sha256"]);
    }
    auto stats = load_json(build / "stats.json");
    EXPECT_EQ(stats["counts"]["nodes"]["library"], 10);
    EXPECT_EQ(stats["counts"]["edges"]["version_depends"], 8);
    ASSERT_EQ(stats["provenance"]["inputs"].size(), 2u);
    EXPECT_EQ(stats["provenance"]["inputs"][0]["sha256"],
              sha256_hex(read_file(std::filesystem::path(ws.out) / "ingest" / "registry.ndjson")));
}

TEST(Cli, StrictIngestRejectsBadRecordsWithExitTwo) {
    Workspace ws;
    auto bad = ws.dir.file("bad.ndjson", read_file(ws.registry) + "{\"name\":\"broken\"}\n");
    auto strict = run({"--out", ws.out, "--strict", "ingest", "--registry", bad.string()});
    EXPECT_EQ(strict.code, 2);
    EXPECT_NE(strict.err.find("line 11"), std::string::npos) << strict.err;
    EXPECT_FALSE(std::filesystem::exists(std::filesystem::path(ws.out) / "ingest" / "registry.ndjson"));

    auto lenient = run({"--out", ws.out, "ingest", "--registry", bad.string()});
    EXPECT_EQ(lenient.code, 0);
    EXPECT_NE(lenient.err.find("warning"), std::string::npos);
    auto validation = load_json(std::filesystem::path(ws.out) / "ingest" / "validation.json");
    EXPECT_FALSE(validation["valid"].get<bool>());
    EXPECT_EQ(validation["report"]["registry"]["records"], 10);
}

TEST(Cli, UpdateReportsNoChangesForIdenticalFeed) {
    Workspace ws;
    EXPECT_EQ(run({"--out", ws.out, "update", "--registry", ws.registry}).code, 1);
    ASSERT_EQ(ws.ingest().code, 0);
    auto r = run({"--out", ws.out, "update", "--registry", ws.registry, "--advisories", ws.advisories});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "no changes\n");
}

TEST(Cli, UpdateAppliesChangesAndRefusesCorruptFeeds) {
    Workspace ws;
    ASSERT_EQ(ws.ingest().code, 0);
    auto stored = std::filesystem::path(ws.out) / "ingest" / "registry.ndjson";
    auto before = read_file(stored);

    auto corrupt = ws.dir.file("corrupt.ndjson", "{not json\n");
    auto r = run({"--out", ws.out, "update", "--registry", corrupt.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(read_file(stored), before);

    auto snap = vt::stats_fixture_registry();
    snap.libraries[0].downloads = 42;
    snap.libraries.pop_back();
    auto fresh = ws.dir.file("fresh.ndjson", ingest::serialize_registry(snap));
    r = run({"--out", ws.out, "update", "--registry", fresh.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto changes = load_json(std::filesystem::path(ws.out) / "update" / "changeset.json")["changes"];
    EXPECT_EQ(changes["modified"], nlohmann::json::array({"vulnA"}));
    EXPECT_EQ(changes["removed"], nlohmann::json::array({"app6"}));
    EXPECT_TRUE(changes["added"].empty());
    EXPECT_NE(read_file(stored), before);

    r = run({"--out", ws.out, "update", "--registry", fresh.string()});
    EXPECT_EQ(r.out, "no changes\n");
}

TEST(Cli, ResolveWritesTreeAndRejectsUnknownRoots) {
    Workspace ws;
    ASSERT_EQ(ws.ingest().code, 0);
    auto r = run({"--out", ws.out, "resolve", "app3", "0.5.0"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto tree = nlohmann::json::parse(r.out);
    EXPECT_EQ(tree["nodes"].size(), 3u);
    EXPECT_EQ(read_file(std::filesystem::path(ws.out) / "resolve" / "app3-0.5.0.json"), r.out);

    EXPECT_EQ(run({"--out", ws.out, "resolve", "nosuch", "1.0.0"}).code, 1);
    EXPECT_EQ(run({"--out", ws.out, "resolve", "app3", "9.9.9"}).code, 1);
    EXPECT_EQ(run({"--out", ws.out, "resolve", "app3", "not-a-version"}).code, 1);
}

TEST(Cli, ResolveVerifiesAgainstLockfile) {
    Workspace ws;
    ASSERT_EQ(ws.ingest().code, 0);
    auto lock = ws.dir.file("Cargo.lock",
                            "version = 3\n\n[[package]]\nname = \"app2\"\nversion = \"1.0.0\"\n\n"
                            "[[package]]\nname = \"vulnB\"\nversion = \"0.1.1\"\n\n"
                            "[[package]]\nname = \"extra\"\nversion = \"1.0.0\"\n");
    auto r = run({"--out", ws.out, "resolve", "app2", "1.0.0", "--verify-lock", lock.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_FALSE(j["identical"].get<bool>());
    EXPECT_EQ(j["diff"]["in_lock_only"].size(), 1u);
    ASSERT_EQ(j["diff"]["version_mismatch"].size(), 1u);
    EXPECT_EQ(j["diff"]["version_mismatch"][0]["name"], "vulnB");
}

TEST(Cli, PropagateSingleAndAll) {
    Workspace ws;
    ASSERT_EQ(ws.ingest().code, 0);
    auto one = run({"--out", ws.out, "propagate", "CVE-2021-1002"});
    ASSERT_EQ(one.code, 0) << one.err;
    auto j = nlohmann::json::parse(one.out);
    ASSERT_EQ(j["results"].size(), 1u);
    EXPECT_EQ(j["results"][0]["transitively_affected"].size(), 2u);

    auto all = run({"--out", ws.out, "propagate", "--all"});
    ASSERT_EQ(all.code, 0) << all.err;
    auto eco = load_json(std::filesystem::path(ws.out) / "propagate" / "ecosystem.json")["ecosystem"];
    EXPECT_EQ(eco["propagated_versions"], 4);
    EXPECT_EQ(eco["propagated_libraries"], 4);

    EXPECT_EQ(run({"--out", ws.out, "propagate", "CVE-1999-0001"}).code, 1);
    EXPECT_EQ(run({"--out", ws.out, "propagate"}).code, 1);
    EXPECT_EQ(run({"--out", ws.out, "propagate", "CVE-2021-1002", "--all"}).code, 1);
}

TEST(Cli, OutputsAreDeterministicAcrossRunsAndJobCounts) {
    Workspace ws;
    auto a = (ws.dir.path / "a").string();
    auto b = (ws.dir.path / "b").string();
    for (const auto& [out, jobs] : {std::pair{a, "1"}, std::pair{b, "4"}}) {
        for (std::vector<std::string> cmd : {std::vector<std::string>{"build"},
                                             std::vector<std::string>{"propagate", "--all"},
                                             std::vector<std::string>{"stats", "--svg"}}) {
            std::vector<std::string> args{"--out", out, "--jobs", jobs, "--registry", ws.registry, "--advisories",
                                          ws.advisories};
            args.insert(args.end(), cmd.begin(), cmd.end());
            ASSERT_EQ(run(args).code, 0);
        }
    }
    for (const auto* f : {"build/nodes.csv", "build/edges.csv", "build/stats.json", "build/manifest.json",
                          "propagate/results.json", "propagate/ecosystem.json", "propagate/top_impact.csv",
                          "propagate/manifest.json", "stats/report.json", "stats/cvss.svg"}) {
        EXPECT_EQ(read_file(std::filesystem::path(a) / f), read_file(std::filesystem::path(b) / f)) << f;
    }
}

TEST(Cli, GlobalOptionsMayFollowTheSubcommand) {
    Workspace ws;
    auto r = run({"build", "--registry", ws.registry, "--out", ws.out, "--format", "text"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("version_depends  8"), std::string::npos) << r.out;
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(ws.out) / "build" / "nodes.csv"));
}

TEST(Cli, OutputDirectoryFallsBackToEnvironment) {
    Workspace ws;
    ::setenv("VULNGRAPH_OUT", ws.out.c_str(), 1);
    auto r = run({"--registry", ws.registry, "build"});
    ::unsetenv("VULNGRAPH_OUT");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(ws.out) / "build" / "manifest.json"));
}

TEST(Cli, ArgumentErrorsAndHelp) {
    Workspace ws;
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({"--version"}).out, std::string(cli::tool_version) + "\n");
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"--format", "xml", "build"}).code, 1);
    EXPECT_EQ(run({"--out", ws.out, "--jobs", "0", "build"}).code, 1);
    EXPECT_EQ(run({"--out", ws.out, "build"}).code, 1);
    EXPECT_EQ(run({"--out", ws.out, "--registry", ws.registry, "stats", "--bin-width", "0"}).code, 1);
    EXPECT_EQ(run({"--out", ws.out, "--registry", (ws.dir.path / "missing").string(), "build"}).code, 1);
}

TEST(Cli, StatsFormats) {
    Workspace ws;
    ASSERT_EQ(ws.ingest().code, 0);
    auto j = run({"--out", ws.out, "stats"});
    ASSERT_EQ(j.code, 0);
    auto report = nlohmann::json::parse(j.out);
    EXPECT_NEAR(report["patchless_proportion"].get<double>(), 1.0 / 3.0, 1e-12);
    auto csv = run({"--out", ws.out, "--format", "csv", "stats"});
    EXPECT_NE(csv.out.find("severity_HIGH,"), std::string::npos) << csv.out;
    auto text = run({"--out", ws.out, "--format", "text", "stats"});
    EXPECT_NE(text.out.find("Latest version still affected: 0.6667 (2/3)"), std::string::npos);
}
