#pragma once

/**
 * @file cli.hpp
 * @brief The `vulngraph` command line.
 *
 * Subcommands: ingest, update, build, resolve, propagate, stats.
 * Every command writes under `<out>/<command>/` together with a
 * manifest.json listing the files and their digests. JSON outputs carry a
 * `provenance` object with the SHA-256 of every input file.
 *
 * Exit codes: 0 success, 1 input or environment error, 2 validation
 * failure under --strict.
 */

#include <vulngraph/common.hpp>
#include <vulngraph/graph.hpp>
#include <vulngraph/ingest.hpp>
#include <vulngraph/propagate.hpp>
#include <vulngraph/resolve.hpp>
#include <vulngraph/semver.hpp>
#include <vulngraph/stats.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace vulngraph::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

inline constexpr const char* tool_version = "0.1.0";

enum class Format { json, csv, text };

struct Config {
    std::string registry_path;
    std::string advisories_path;
    std::string output_dir;
    resolve::ResolveLimits limits;
    bool strict = false;
    bool allow_yanked = false;
    unsigned jobs = 1;
    Format format = Format::json;
};

/// Carries an exit code out of a command.
class exit_error : public std::runtime_error {
    int _code;

public:
    exit_error(int code, const std::string& what) : std::runtime_error(what), _code(code) {}
    int code() const noexcept { return _code; }
};

namespace detail {

inline ojson ordered(const nlohmann::json& j) { return ojson::parse(j.dump()); }

struct Input {
    std::string role;
    fs::path path;
    std::string sha256;
};

struct Context {
    Config config;
    std::ostream& out;
    std::ostream& err;
    std::vector<Input> inputs;

    ojson provenance() const {
        ojson p;
        p["tool"] = "vulngraph";
        p["version"] = tool_version;
        auto ins = ojson::array();
        for (const auto& i : inputs) {
            ins.push_back({{"role", i.role}, {"path", i.path.generic_string()}, {"sha256", i.sha256}});
        }
        p["inputs"] = std::move(ins);
        p["limits"] = {{"max_nodes_per_path", config.limits.max_nodes_per_path},
                       {"max_total_nodes", config.limits.max_total_nodes}};
        p["allow_yanked"] = config.allow_yanked;
        return p;
    }

    std::string read_input(const std::string& role, const fs::path& path) {
        if (!fs::exists(path)) {
            throw exit_error(1, "input file not found: " + path.string());
        }
        auto text = read_file(path);
        inputs.push_back({role, path, sha256_hex(text)});
        return text;
    }
};

/// Writes files for one command and the manifest that lists them.
class OutputDir {
public:
    OutputDir(Context& ctx, const std::string& command) : _ctx(ctx), _command(command) {
        _dir = fs::path(ctx.config.output_dir) / command;
        std::error_code ec;
        fs::create_directories(_dir, ec);
        if (ec) {
            throw exit_error(1, "cannot create output directory " + _dir.string() + ": " + ec.message());
        }
    }

    fs::path path(const std::string& name) const { return _dir / name; }

    void write(const std::string& name, const std::string& content) { write_at(_dir / name, content); }

    void write_at(const fs::path& target, const std::string& content) {
        write_file(target, content);
        _files.push_back({target, sha256_hex(content)});
    }

    void json(const std::string& name, ojson body) {
        ojson doc;
        doc["provenance"] = _ctx.provenance();
        for (auto& [k, v] : body.items()) {
            doc[k] = std::move(v);
        }
        write(name, doc.dump(2) + "\n");
    }

    void finish() {
        ojson m;
        m["command"] = _command;
        m["provenance"] = _ctx.provenance();
        auto files = ojson::array();
        for (const auto& [p, digest] : _files) {
            auto rel = p.lexically_relative(_dir);
            auto shown = rel.empty() || rel.native().rfind("..", 0) == 0 ? p : rel;
            files.push_back({{"path", shown.generic_string()}, {"sha256", digest}});
        }
        m["files"] = std::move(files);
        write_file(_dir / "manifest.json", m.dump(2) + "\n");
    }

    const fs::path& dir() const { return _dir; }

private:
    Context& _ctx;
    std::string _command;
    fs::path _dir;
    std::vector<std::pair<fs::path, std::string>> _files;
};

inline ingest::LoadMode mode(const Config& c) { return c.strict ? ingest::LoadMode::strict : ingest::LoadMode::lenient; }

inline void report_issues(Context& ctx, const std::string& what, const std::vector<ingest::ValidationIssue>& issues) {
    for (const auto& i : issues) {
        ctx.err << "warning: " << what << ": " << ingest::to_string(i) << '\n';
    }
}

inline ojson issues_json(const std::vector<ingest::ValidationIssue>& issues) {
    auto a = ojson::array();
    for (const auto& i : issues) {
        a.push_back({{"line", i.line}, {"record", i.record}, {"message", i.message}});
    }
    return a;
}

inline fs::path ingest_dir(const Config& c) { return fs::path(c.output_dir) / "ingest"; }

/// Registry and advisories for the analysis commands: explicit paths win,
/// otherwise the snapshot written by `ingest`.
struct Inputs {
    ingest::RegistrySnapshot registry;
    std::vector<ingest::Advisory> advisories;
};

inline Inputs load_inputs(Context& ctx) {
    const auto& c = ctx.config;
    auto registry = c.registry_path.empty() ? ingest_dir(c) / "registry.ndjson" : fs::path(c.registry_path);
    auto advisories = c.advisories_path.empty() ? ingest_dir(c) / "advisories.ndjson" : fs::path(c.advisories_path);
    if (!fs::exists(registry)) {
        throw exit_error(1, "registry not found: " + registry.string() +
                                (c.registry_path.empty() ? " (run ingest or pass --registry)" : ""));
    }
    if (!c.advisories_path.empty() && !fs::exists(advisories)) {
        throw exit_error(1, "advisories not found: " + advisories.string());
    }

    Inputs in;
    auto reg = ingest::parse_registry(ctx.read_input("registry", registry), mode(c));
    report_issues(ctx, registry.string(), reg.issues);
    in.registry.libraries = std::move(reg.records);
    if (fs::exists(advisories)) {
        auto adv = ingest::parse_advisories(ctx.read_input("advisories", advisories), mode(c));
        report_issues(ctx, advisories.string(), adv.issues);
        in.advisories = std::move(adv.records);
    }
    return in;
}

inline ojson hashes_json(const ingest::RecordHashes& libs, const ingest::RecordHashes& advs) {
    ojson j;
    j["libraries"] = libs;
    j["advisories"] = advs;
    return j;
}

// ---------------------------------------------------------------------------
// Commands

inline int cmd_ingest(Context& ctx) {
    const auto& c = ctx.config;
    if (c.registry_path.empty()) {
        throw exit_error(1, "ingest needs --registry");
    }
    auto reg_text = ctx.read_input("registry", c.registry_path);
    std::string adv_text;
    if (!c.advisories_path.empty()) {
        adv_text = ctx.read_input("advisories", c.advisories_path);
    }
    auto reg = ingest::parse_registry(reg_text, ingest::LoadMode::lenient);
    auto adv = ingest::parse_advisories(adv_text, ingest::LoadMode::lenient);

    ojson report;
    report["registry"] = {{"records", reg.records.size()}, {"issues", issues_json(reg.issues)}};
    report["advisories"] = {{"records", adv.records.size()}, {"issues", issues_json(adv.issues)}};

    OutputDir dir(ctx, "ingest");
    if (c.strict && (!reg.issues.empty() || !adv.issues.empty())) {
        for (const auto& i : reg.issues) {
            ctx.err << "error: " << c.registry_path << ": " << ingest::to_string(i) << '\n';
        }
        for (const auto& i : adv.issues) {
            ctx.err << "error: " << c.advisories_path << ": " << ingest::to_string(i) << '\n';
        }
        dir.json("validation.json", {{"valid", false}, {"report", report}});
        dir.finish();
        return 2;
    }
    report_issues(ctx, c.registry_path, reg.issues);
    report_issues(ctx, c.advisories_path, adv.issues);

    ingest::RegistrySnapshot snap{std::move(reg.records)};
    dir.write("registry.ndjson", ingest::serialize_registry(snap));
    dir.write("advisories.ndjson", ingest::serialize_advisories(adv.records));
    dir.json("hashes.json", hashes_json(ingest::record_hashes(snap), ingest::record_hashes(adv.records)));
    dir.json("validation.json", {{"valid", reg.issues.empty() && adv.issues.empty()}, {"report", report}});
    dir.finish();
    ctx.out << "ingested " << snap.libraries.size() << " libraries and " << adv.records.size() << " advisories into "
            << dir.dir().generic_string() << '\n';
    return 0;
}

inline int cmd_update(Context& ctx) {
    const auto& c = ctx.config;
    if (c.registry_path.empty() && c.advisories_path.empty()) {
        throw exit_error(1, "update needs --registry and/or --advisories");
    }
    auto stored = ingest_dir(c);
    auto hashes_path = stored / "hashes.json";
    if (!fs::exists(hashes_path)) {
        throw exit_error(1, "no stored snapshot under " + stored.string() + " (run ingest first)");
    }
    auto hashes = nlohmann::json::parse(ctx.read_input("hashes", hashes_path));
    auto old_reg = ingest::RegistrySnapshot{
        ingest::parse_registry(ctx.read_input("stored-registry", stored / "registry.ndjson")).records};
    auto old_adv = ingest::parse_advisories(ctx.read_input("stored-advisories", stored / "advisories.ndjson")).records;
    auto old_lib_hashes = hashes.at("libraries").get<ingest::RecordHashes>();
    auto old_adv_hashes = hashes.at("advisories").get<ingest::RecordHashes>();

    ingest::Changeset changes;
    auto new_reg = old_reg;
    auto new_adv = old_adv;
    auto new_lib_hashes = old_lib_hashes;
    auto new_adv_hashes = old_adv_hashes;
    try {
        if (!c.registry_path.empty()) {
            auto u = ingest::incremental_update(old_reg, ctx.read_input("registry", c.registry_path), old_lib_hashes);
            changes.added = u.changes.added;
            changes.modified = u.changes.modified;
            changes.removed = u.changes.removed;
            changes.content_hash = u.changes.content_hash;
            new_reg = std::move(u.snapshot);
            new_lib_hashes = std::move(u.hashes);
        }
        if (!c.advisories_path.empty()) {
            auto u = ingest::incremental_update_advisories(old_adv, ctx.read_input("advisories", c.advisories_path),
                                                           old_adv_hashes);
            changes.added_advisories = u.changes.added_advisories;
            changes.modified_advisories = u.changes.modified_advisories;
            changes.removed_advisories = u.changes.removed_advisories;
            changes.content_hash += (changes.content_hash.empty() ? "" : "+") + u.changes.content_hash;
            new_adv = std::move(u.snapshot);
            new_adv_hashes = std::move(u.hashes);
        }
    } catch (const ingest::validation_error& e) {
        for (const auto& i : e.issues()) {
            ctx.err << "error: " << ingest::to_string(i) << '\n';
        }
        throw exit_error(1, "update aborted, stored snapshot left untouched: " + std::string(e.what()));
    }

    OutputDir dir(ctx, "update");
    dir.json("changeset.json", {{"changes", ordered(ingest::to_json(changes))}});
    if (!changes.empty()) {
        // Rewrite the stored snapshot only once everything parsed.
        write_file(stored / "registry.ndjson", ingest::serialize_registry(new_reg));
        write_file(stored / "advisories.ndjson", ingest::serialize_advisories(new_adv));
        ojson h;
        h["provenance"] = ctx.provenance();
        auto fresh_hashes = hashes_json(new_lib_hashes, new_adv_hashes);
        for (auto& [k, v] : fresh_hashes.items()) {
            h[k] = v;
        }
        write_file(hashes_path, h.dump(2) + "\n");
    }
    dir.finish();
    if (changes.empty()) {
        ctx.out << "no changes\n";
    } else {
        ctx.out << ordered(ingest::to_json(changes)).dump(2) << '\n';
    }
    return 0;
}

inline int cmd_build(Context& ctx) {
    auto in = load_inputs(ctx);
    auto g = graph::build_graph(std::move(in.registry), std::move(in.advisories));
    auto problems = graph::validate_graph(g);
    if (!problems.empty()) {
        for (const auto& p : problems) {
            ctx.err << "error: " << p << '\n';
        }
        throw exit_error(1, "graph failed validation");
    }
    auto stats = graph::graph_stats(g);
    OutputDir dir(ctx, "build");
    auto csv = graph::render_csv(g);
    dir.write("nodes.csv", csv.nodes);
    dir.write("edges.csv", csv.edges);
    dir.json("stats.json", ordered(graph::to_json(g.report(), stats)));
    dir.finish();

    if (ctx.config.format == Format::text) {
        std::vector<std::vector<std::string>> rows{{"Kind", "Count"}};
        for (auto [name, n] : {std::pair{"library", stats.library},
                               {"library_version", stats.library_version},
                               {"cve", stats.cve},
                               {"has", stats.has},
                               {"library_affects", stats.library_affects},
                               {"version_affects", stats.version_affects},
                               {"version_depends", stats.version_depends}}) {
            rows.push_back({name, std::to_string(n)});
        }
        ctx.out << propagate::aligned_table(rows);
    } else if (ctx.config.format == Format::csv) {
        ctx.out << "kind,count\n";
        auto j = ordered(graph::to_json(stats));
        for (const auto* group : {"nodes", "edges"}) {
            for (auto& [k, v] : j[group].items()) {
                ctx.out << group << '.' << k << ',' << v << '\n';
            }
        }
    } else {
        ctx.out << ordered(graph::to_json(stats)).dump(2) << '\n';
    }
    for (const auto& u : g.report().unresolved_advisories) {
        ctx.err << "warning: advisory " << u.database_id << " (" << u.cve << ") names unknown package "
                << u.package_name << '\n';
    }
    return 0;
}

inline std::string safe_name(std::string s) {
    for (auto& ch : s) {
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_' && ch != '.') {
            ch = '_';
        }
    }
    return s;
}

inline int cmd_resolve(Context& ctx, const std::string& name, const std::string& version_text,
                       const std::string& output, const std::string& lock_path) {
    semver::Version version;
    try {
        version = semver::parse_version(version_text);
    } catch (const semver::parse_error& e) {
        throw exit_error(1, e.what());
    }
    std::vector<ingest::LockEntry> lock;
    if (!lock_path.empty()) {
        try {
            lock = ingest::parse_lockfile_text(ctx.read_input("lockfile", lock_path));
        } catch (const ingest::lockfile_error& e) {
            throw exit_error(1, lock_path + ": " + e.what());
        }
    }
    auto in = load_inputs(ctx);
    auto g = graph::build_graph(std::move(in.registry), std::move(in.advisories));
    auto tree = resolve::resolve_tree(g, name, version, ctx.config.limits, ctx.config.allow_yanked);

    OutputDir dir(ctx, "resolve");
    auto stem = safe_name(name + "-" + version.to_string());
    auto tree_json = resolve::tree_to_json(tree, 2) + "\n";
    if (!output.empty()) {
        dir.write_at(output, tree_json);
    } else {
        dir.write(stem + ".json", tree_json);
    }
    if (!lock_path.empty()) {
        auto diff = resolve::verify_against_lockfile(tree, lock);
        ojson body;
        body["root"] = {{"name", name}, {"version", version.to_string()}};
        body["identical"] = diff.empty();
        body["diff"] = resolve::to_json(diff);
        dir.json(stem + ".lockdiff.json", body);
        ctx.out << body.dump(2) << '\n';
    } else if (output.empty()) {
        ctx.out << tree_json;
    }
    dir.finish();
    if (tree.truncated) {
        ctx.err << "warning: resolution truncated by limits\n";
    }
    return 0;
}

inline int cmd_propagate(Context& ctx, const std::string& cve, bool all, std::size_t top) {
    if (all == !cve.empty()) {
        throw exit_error(1, "propagate needs exactly one of <cve> or --all");
    }
    auto in = load_inputs(ctx);
    auto g = graph::build_graph(std::move(in.registry), std::move(in.advisories));
    std::vector<ingest::Advisory> selected;
    for (const auto& a : g.advisories()) {
        if (all || a.value == cve) {
            selected.push_back(a);
        }
    }
    if (!all && selected.empty()) {
        throw exit_error(1, "unknown CVE: " + cve);
    }

    Diagnostics diag;
    propagate::TreeCache cache(g, ctx.config.limits, ctx.config.allow_yanked);
    auto results = propagate::propagate_all(cache, selected, ctx.config.jobs, &diag);
    auto eco = propagate::merge_results(g, results);
    auto rows = propagate::top_impact_table(g, results, top);

    OutputDir dir(ctx, "propagate");
    auto list = ojson::array();
    for (const auto& r : results) {
        list.push_back(propagate::to_json(g, r));
    }
    dir.json("results.json", {{"results", list}});
    dir.json("ecosystem.json", {{"ecosystem", propagate::to_json(eco)}});
    dir.write("top_impact.csv", propagate::impact_csv(rows));
    dir.write("top_impact.txt", propagate::impact_text(rows));
    dir.finish();

    for (const auto& w : diag.warnings) {
        ctx.err << "warning: " << w << '\n';
    }
    switch (ctx.config.format) {
    case Format::csv: ctx.out << propagate::impact_csv(rows); break;
    case Format::text: {
        std::vector<std::vector<std::string>> cells{
            {"Directly affected libraries", std::to_string(eco.directly_affected_libraries)},
            {"Directly affected versions", std::to_string(eco.directly_affected_versions)},
            {"Propagated libraries", std::to_string(eco.propagated_libraries) + " / " + std::to_string(eco.total_libraries) +
                                         " (" + stats::format_fraction(eco.library_ratio) + ")"},
            {"Propagated versions", std::to_string(eco.propagated_versions) + " / " + std::to_string(eco.total_versions) +
                                        " (" + stats::format_fraction(eco.version_ratio) + ")"}};
        ctx.out << propagate::aligned_table(cells) << '\n' << propagate::impact_text(rows);
        break;
    }
    case Format::json: {
        ojson j;
        j["ecosystem"] = propagate::to_json(eco);
        if (!all) {
            j["results"] = list;
        }
        j["top_impact"] = ojson::array();
        for (const auto& r : rows) {
            j["top_impact"].push_back({{"cve", r.cve},
                                       {"library", r.library},
                                       {"libraries_reached", r.libraries_reached},
                                       {"versions_reached", r.versions_reached}});
        }
        ctx.out << j.dump(2) << '\n';
        break;
    }
    }
    return 0;
}

inline int cmd_stats(Context& ctx, double bin_width, std::size_t top, bool svg) {
    if (!(bin_width > 0.0)) {
        throw exit_error(1, "--bin-width must be positive");
    }
    auto in = load_inputs(ctx);
    auto g = graph::build_graph(std::move(in.registry), std::move(in.advisories));
    Diagnostics diag;
    auto report = stats::compute_report(g, g.advisories(), bin_width, top, &diag);

    OutputDir dir(ctx, "stats");
    dir.json("report.json", {{"report", stats::to_json(report)}});
    dir.write("report.txt", stats::to_text(report));
    if (svg) {
        dir.write("cvss.svg", stats::histogram_svg(report.cvss));
    }
    dir.finish();
    for (const auto& w : diag.warnings) {
        ctx.err << "warning: " << w << '\n';
    }
    if (ctx.config.format == Format::text) {
        ctx.out << stats::to_text(report);
    } else if (ctx.config.format == Format::csv) {
        ctx.out << graph::csv_row({"metric", "value"});
        for (auto s : ingest::all_severities) {
            ctx.out << graph::csv_row({"severity_" + ingest::to_string(s), std::to_string(report.severity.of(s))});
        }
        ctx.out << graph::csv_row({"patchless_proportion", std::to_string(report.patchless)});
        ctx.out << graph::csv_row({"latest_version_still_affected", std::to_string(report.latest.fraction)});
        ctx.out << graph::csv_row({"yanked_latest_affected", std::to_string(report.yanked_latest)});
    } else {
        ctx.out << stats::to_json(report).dump(2) << '\n';
    }
    return 0;
}

} // namespace detail

/// Runs the command line; args excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cargo dependency and vulnerability knowledge graph toolkit", "vulngraph"};
    app.set_version_flag("--version", tool_version);
    app.require_subcommand(1);
    app.fallthrough();

    Config config;
    if (const char* env = std::getenv("VULNGRAPH_OUT"); env && *env) {
        config.output_dir = env;
    } else {
        config.output_dir = "vulngraph-out";
    }
    std::string format = "json";
    app.add_option("--registry", config.registry_path, "Registry snapshot (NDJSON)");
    app.add_option("--advisories", config.advisories_path, "Advisory list (NDJSON)");
    app.add_option("--out", config.output_dir, "Output directory (default $VULNGRAPH_OUT or vulngraph-out)");
    app.add_flag("--strict", config.strict, "Fail on any invalid record");
    app.add_option("--jobs", config.jobs, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--max-path-nodes", config.limits.max_nodes_per_path, "Maximum nodes on one dependency path")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--max-total-nodes", config.limits.max_total_nodes, "Maximum nodes in one resolved tree")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_flag("--allow-yanked", config.allow_yanked, "Let resolution select yanked versions");
    app.add_option("--format", format, "Standard output format")
        ->check(CLI::IsMember({"json", "csv", "text"}))
        ->capture_default_str();

    auto* ingest_cmd = app.add_subcommand("ingest", "Validate and normalize registry and advisory snapshots");
    auto* update_cmd = app.add_subcommand("update", "Compare fresh feeds with the stored snapshot");
    auto* build_cmd = app.add_subcommand("build", "Build the knowledge graph and export it as CSV");

    auto* resolve_cmd = app.add_subcommand("resolve", "Resolve the dependency tree of one library version");
    std::string name, version, output, lock;
    resolve_cmd->add_option("name", name, "Library name")->required();
    resolve_cmd->add_option("version", version, "Exact version")->required();
    resolve_cmd->add_option("--output", output, "Write the tree here instead of the output directory");
    resolve_cmd->add_option("--verify-lock", lock, "Compare the tree with a Cargo.lock");

    auto* propagate_cmd = app.add_subcommand("propagate", "Propagation paths of one CVE or of all advisories");
    std::string cve;
    bool all = false;
    std::size_t top = 5;
    propagate_cmd->add_option("cve", cve, "CVE id");
    propagate_cmd->add_flag("--all", all, "Every advisory");
    propagate_cmd->add_option("--top", top, "Rows in the impact table")->capture_default_str();

    auto* stats_cmd = app.add_subcommand("stats", "Severity, CVSS, CWE, patch and latest-version statistics");
    double bin_width = 1.0;
    std::size_t cwe_top = 10;
    bool svg = false;
    stats_cmd->add_option("--bin-width", bin_width, "CVSS histogram bin width")->capture_default_str();
    stats_cmd->add_option("--top", cwe_top, "Rows in the CWE ranking")->capture_default_str();
    stats_cmd->add_flag("--svg", svg, "Also write the CVSS histogram as SVG");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << tool_version << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    config.format = format == "csv" ? Format::csv : format == "text" ? Format::text : Format::json;

    detail::Context ctx{config, out, err, {}};
    try {
        if (*ingest_cmd) return detail::cmd_ingest(ctx);
        if (*update_cmd) return detail::cmd_update(ctx);
        if (*build_cmd) return detail::cmd_build(ctx);
        if (*resolve_cmd) return detail::cmd_resolve(ctx, name, version, output, lock);
        if (*propagate_cmd) return detail::cmd_propagate(ctx, cve, all, top);
        if (*stats_cmd) return detail::cmd_stats(ctx, bin_width, cwe_top, svg);
    } catch (const exit_error& e) {
        err << "error: " << e.what() << '\n';
        return e.code();
    } catch (const ingest::validation_error& e) {
        for (const auto& i : e.issues()) {
            err << "error: " << ingest::to_string(i) << '\n';
        }
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const io_error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const not_found& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

} // namespace vulngraph::cli
