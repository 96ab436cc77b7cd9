#pragma once

/**
 * @file graph.hpp
 * @brief The dependency-vulnerability knowledge graph.
 *
 * Node kinds: `library`, `library_version`, `cve`.
 * Edge kinds:
 *  - `has`              library -> library_version (same library)
 *  - `version_depends`  library_version -> library (the declaration, not a resolved version)
 *  - `library_affects`  cve -> library
 *  - `version_affects`  cve -> library_version, for every version inside the advisory range
 *
 * The graph is immutable once built. Indices are dense and stable for the
 * lifetime of the graph.
 */

#include <vulngraph/common.hpp>
#include <vulngraph/ingest.hpp>
#include <vulngraph/semver.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace vulngraph::graph {

using json = nlohmann::json;
using ingest::Advisory;
using ingest::DependencyDecl;
using ingest::LibraryRecord;
using ingest::RegistrySnapshot;
using ingest::VersionRecord;

enum class NodeKind { library, library_version, cve };
enum class EdgeKind { has, library_affects, version_affects, version_depends };

inline std::string to_string(NodeKind k) {
    switch (k) {
    case NodeKind::library: return "library";
    case NodeKind::library_version: return "library_version";
    case NodeKind::cve: return "cve";
    }
    return "library";
}

inline std::string to_string(EdgeKind k) {
    switch (k) {
    case EdgeKind::has: return "has";
    case EdgeKind::library_affects: return "library_affects";
    case EdgeKind::version_affects: return "version_affects";
    case EdgeKind::version_depends: return "version_depends";
    }
    return "has";
}

/// Textual node identity: "library:<name>", "library_version:<name>@<version>", "cve:<id>".
struct NodeId {
    NodeKind kind;
    std::string key;

    static NodeId library(std::string_view name) { return {NodeKind::library, std::string(name)}; }
    static NodeId version(std::string_view name, const semver::Version& v) {
        return {NodeKind::library_version, std::string(name) + "@" + v.to_string()};
    }
    static NodeId cve(std::string_view id) { return {NodeKind::cve, std::string(id)}; }

    std::string to_string() const { return graph::to_string(kind) + ":" + key; }

    friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

using LibraryIndex = std::uint32_t;
using VersionIndex = std::uint32_t;
using CveIndex = std::uint32_t;
using EdgeIndex = std::uint32_t;

struct LibraryNode {
    std::string name;
    std::size_t record = 0;
    /// Ascending by version.
    std::vector<VersionIndex> versions;
    /// Reverse version_depends: edges whose target is this library.
    std::vector<EdgeIndex> dependents;
    std::vector<CveIndex> affected_by;
};

struct VersionNode {
    LibraryIndex library = 0;
    std::size_t record = 0;  // position in the library record's versions
    std::vector<EdgeIndex> depends;
    std::vector<CveIndex> affected_by;
};

struct CveNode {
    std::string id;
    std::vector<std::size_t> advisories;
    std::vector<LibraryIndex> libraries;
    /// Ascending by index.
    std::vector<VersionIndex> versions;
};

struct DependsEdge {
    VersionIndex from = 0;
    LibraryIndex to = 0;
    std::size_t decl = 0;  // position in the declaring version's dependencies
};

struct GraphStats {
    std::size_t library = 0;
    std::size_t library_version = 0;
    std::size_t cve = 0;
    std::size_t has = 0;
    std::size_t library_affects = 0;
    std::size_t version_affects = 0;
    std::size_t version_depends = 0;

    std::size_t nodes() const noexcept { return library + library_version + cve; }
    std::size_t edges() const noexcept { return has + library_affects + version_affects + version_depends; }

    friend bool operator==(const GraphStats&, const GraphStats&) = default;
};

inline json to_json(const GraphStats& s) {
    return json{{"nodes",
                 {{"library", s.library}, {"library_version", s.library_version}, {"cve", s.cve}, {"total", s.nodes()}}},
                {"edges",
                 {{"has", s.has},
                  {"library_affects", s.library_affects},
                  {"version_affects", s.version_affects},
                  {"version_depends", s.version_depends},
                  {"total", s.edges()}}}};
}

struct BuildReport {
    struct UnresolvedAdvisory {
        std::int64_t database_id;
        std::string cve;
        std::string package_name;
    };
    struct DanglingDependency {
        std::string from;  // name@version
        std::string target;
    };
    std::vector<UnresolvedAdvisory> unresolved_advisories;
    std::vector<DanglingDependency> dangling_dependencies;
};

class KnowledgeGraph;
KnowledgeGraph build_graph(RegistrySnapshot snapshot, std::vector<Advisory> advisories);

class KnowledgeGraph {
public:
    KnowledgeGraph() = default;

    const RegistrySnapshot& registry() const noexcept { return _registry; }
    const std::vector<Advisory>& advisories() const noexcept { return _advisories; }
    const BuildReport& report() const noexcept { return _report; }

    const std::vector<LibraryNode>& libraries() const noexcept { return _libraries; }
    const std::vector<VersionNode>& versions() const noexcept { return _versions; }
    const std::vector<CveNode>& cves() const noexcept { return _cves; }
    const std::vector<DependsEdge>& depends_edges() const noexcept { return _depends; }

    const LibraryNode& library(LibraryIndex i) const { return _libraries.at(i); }
    const VersionNode& version(VersionIndex i) const { return _versions.at(i); }
    const CveNode& cve(CveIndex i) const { return _cves.at(i); }
    const DependsEdge& depends_edge(EdgeIndex i) const { return _depends.at(i); }

    const LibraryRecord& library_record(LibraryIndex i) const { return _registry.libraries[library(i).record]; }
    const VersionRecord& version_record(VersionIndex i) const {
        const auto& v = version(i);
        return _registry.libraries[_libraries[v.library].record].versions[v.record];
    }
    const semver::Version& version_num(VersionIndex i) const { return version_record(i).num; }
    const std::string& version_library_name(VersionIndex i) const { return _libraries[version(i).library].name; }
    const DependencyDecl& decl(EdgeIndex e) const {
        const auto& edge = depends_edge(e);
        return version_record(edge.from).dependencies[edge.decl];
    }

    std::optional<LibraryIndex> find_library(std::string_view name) const {
        auto it = _library_by_name.find(std::string(name));
        if (it == _library_by_name.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    std::optional<VersionIndex> find_version(std::string_view name, const semver::Version& v) const {
        auto lib = find_library(name);
        if (!lib) {
            return std::nullopt;
        }
        const auto& vs = _libraries[*lib].versions;
        auto it = std::lower_bound(vs.begin(), vs.end(), v,
                                   [&](VersionIndex i, const semver::Version& x) { return version_num(i) < x; });
        if (it == vs.end() || version_num(*it) != v) {
            return std::nullopt;
        }
        return *it;
    }

    std::optional<CveIndex> find_cve(std::string_view id) const {
        auto it = _cve_by_id.find(std::string(id));
        if (it == _cve_by_id.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    /// version_affects targets contributed by one advisory, ascending by index.
    const std::vector<VersionIndex>& advisory_targets(std::size_t advisory) const {
        return _advisory_targets.at(advisory);
    }

    NodeId version_id(VersionIndex i) const { return NodeId::version(version_library_name(i), version_num(i)); }

private:
    friend KnowledgeGraph build_graph(RegistrySnapshot snapshot, std::vector<Advisory> advisories);

    RegistrySnapshot _registry;
    std::vector<Advisory> _advisories;
    BuildReport _report;
    std::vector<LibraryNode> _libraries;
    std::vector<VersionNode> _versions;
    std::vector<CveNode> _cves;
    std::vector<DependsEdge> _depends;
    std::vector<std::vector<VersionIndex>> _advisory_targets;
    std::unordered_map<std::string, LibraryIndex> _library_by_name;
    std::unordered_map<std::string, CveIndex> _cve_by_id;
};

/// Materializes the graph. Advisories naming absent packages yield isolated
/// cve nodes; declarations targeting absent libraries get no edge. Both are
/// listed in the build report.
inline KnowledgeGraph build_graph(RegistrySnapshot snapshot, std::vector<Advisory> advisories) {
    KnowledgeGraph g;
    g._registry = std::move(snapshot);
    g._advisories = std::move(advisories);

    const auto& libs = g._registry.libraries;
    g._libraries.reserve(libs.size());
    for (std::size_t r = 0; r < libs.size(); ++r) {
        auto li = LibraryIndex(g._libraries.size());
        g._library_by_name.emplace(libs[r].name, li);
        LibraryNode node;
        node.name = libs[r].name;
        node.record = r;
        for (std::size_t v = 0; v < libs[r].versions.size(); ++v) {
            node.versions.push_back(VersionIndex(g._versions.size()));
            g._versions.push_back(VersionNode{li, v, {}, {}});
        }
        std::sort(node.versions.begin(), node.versions.end(), [&](VersionIndex a, VersionIndex b) {
            return libs[r].versions[g._versions[a].record].num < libs[r].versions[g._versions[b].record].num;
        });
        g._libraries.push_back(std::move(node));
    }

    for (VersionIndex vi = 0; vi < g._versions.size(); ++vi) {
        const auto& rec = g.version_record(vi);
        for (std::size_t d = 0; d < rec.dependencies.size(); ++d) {
            const auto& decl = rec.dependencies[d];
            auto target = g.find_library(decl.target_name);
            if (!target) {
                g._report.dangling_dependencies.push_back(
                    {g.version_library_name(vi) + "@" + rec.num.to_string(), decl.target_name});
                continue;
            }
            auto e = EdgeIndex(g._depends.size());
            g._depends.push_back(DependsEdge{vi, *target, d});
            g._versions[vi].depends.push_back(e);
            g._libraries[*target].dependents.push_back(e);
        }
    }

    g._advisory_targets.resize(g._advisories.size());
    for (std::size_t a = 0; a < g._advisories.size(); ++a) {
        const auto& adv = g._advisories[a];
        auto [it, fresh] = g._cve_by_id.emplace(adv.value, CveIndex(g._cves.size()));
        if (fresh) {
            g._cves.push_back(CveNode{adv.value, {}, {}, {}});
        }
        auto ci = it->second;
        auto& cve = g._cves[ci];
        cve.advisories.push_back(a);

        auto lib = g.find_library(adv.package_name);
        if (!lib) {
            g._report.unresolved_advisories.push_back({adv.database_id, adv.value, adv.package_name});
            continue;
        }
        if (std::find(cve.libraries.begin(), cve.libraries.end(), *lib) == cve.libraries.end()) {
            cve.libraries.push_back(*lib);
            g._libraries[*lib].affected_by.push_back(ci);
        }
        for (auto vi : g._libraries[*lib].versions) {
            if (!semver::matches(adv.vulnerable_version_range, g.version_num(vi))) {
                continue;
            }
            g._advisory_targets[a].push_back(vi);
            auto pos = std::lower_bound(cve.versions.begin(), cve.versions.end(), vi);
            if (pos == cve.versions.end() || *pos != vi) {
                cve.versions.insert(pos, vi);
                g._versions[vi].affected_by.push_back(ci);
            }
        }
        std::sort(g._advisory_targets[a].begin(), g._advisory_targets[a].end());
    }
    return g;
}

/// Counts the actual node and edge sets.
inline GraphStats graph_stats(const KnowledgeGraph& g) {
    GraphStats s;
    s.library = g.libraries().size();
    s.library_version = g.versions().size();
    s.cve = g.cves().size();
    for (const auto& l : g.libraries()) {
        s.has += l.versions.size();
    }
    for (const auto& c : g.cves()) {
        s.library_affects += c.libraries.size();
        s.version_affects += c.versions.size();
    }
    s.version_depends = g.depends_edges().size();
    return s;
}

inline json to_json(const BuildReport& r, const GraphStats& stats) {
    json unresolved = json::array();
    for (const auto& u : r.unresolved_advisories) {
        unresolved.push_back({{"databaseId", u.database_id}, {"cve", u.cve}, {"package_name", u.package_name}});
    }
    json dangling = json::array();
    for (const auto& d : r.dangling_dependencies) {
        dangling.push_back({{"from", d.from}, {"target", d.target}});
    }
    return json{{"unresolved_advisories", unresolved}, {"dangling_dependencies", dangling}, {"counts", to_json(stats)}};
}

/// Every violated structural invariant, as a message. Empty means valid.
inline std::vector<std::string> validate_graph(const KnowledgeGraph& g) {
    std::vector<std::string> out;
    auto fail = [&](std::string m) { out.push_back(std::move(m)); };
    const auto nl = g.libraries().size();
    const auto nv = g.versions().size();

    std::vector<std::size_t> owners(nv, 0);
    for (LibraryIndex li = 0; li < nl; ++li) {
        const auto& lib = g.library(li);
        for (auto vi : lib.versions) {
            if (vi >= nv) {
                fail("has edge from " + lib.name + " to missing version node");
                continue;
            }
            ++owners[vi];
            if (g.version(vi).library != li) {
                fail("has edge " + lib.name + " -> " + g.version_id(vi).to_string() + " crosses libraries");
            }
        }
        for (std::size_t k = 1; k < lib.versions.size(); ++k) {
            if (!(g.version_num(lib.versions[k - 1]) < g.version_num(lib.versions[k]))) {
                fail("versions of " + lib.name + " are not strictly ascending");
            }
        }
    }
    for (VersionIndex vi = 0; vi < nv; ++vi) {
        if (owners[vi] != 1) {
            fail(g.version_id(vi).to_string() + " has " + std::to_string(owners[vi]) + " incoming has edges");
        }
    }

    std::map<EdgeIndex, int> forward, reverse;
    for (VersionIndex vi = 0; vi < nv; ++vi) {
        for (auto e : g.version(vi).depends) {
            ++forward[e];
            if (e >= g.depends_edges().size() || g.depends_edge(e).from != vi) {
                fail("forward version_depends adjacency of " + g.version_id(vi).to_string() + " is inconsistent");
            }
        }
    }
    for (LibraryIndex li = 0; li < nl; ++li) {
        for (auto e : g.library(li).dependents) {
            ++reverse[e];
            if (e >= g.depends_edges().size() || g.depends_edge(e).to != li) {
                fail("reverse version_depends adjacency of " + g.library(li).name + " is inconsistent");
            }
        }
    }
    for (EdgeIndex e = 0; e < g.depends_edges().size(); ++e) {
        const auto& edge = g.depends_edge(e);
        if (edge.from >= nv || edge.to >= nl) {
            fail("version_depends edge " + std::to_string(e) + " has an endpoint of the wrong kind");
            continue;
        }
        if (forward[e] != 1 || reverse[e] != 1) {
            fail("version_depends edge " + std::to_string(e) + " is not mirrored exactly once");
        }
        if (g.decl(e).target_name != g.library(edge.to).name) {
            fail("version_depends edge " + std::to_string(e) + " targets the wrong library");
        }
    }

    for (CveIndex ci = 0; ci < g.cves().size(); ++ci) {
        const auto& cve = g.cve(ci);
        for (auto li : cve.libraries) {
            const auto& back = g.library(li).affected_by;
            if (std::find(back.begin(), back.end(), ci) == back.end()) {
                fail("library_affects " + cve.id + " -> " + g.library(li).name + " lacks its reverse entry");
            }
        }
        for (auto vi : cve.versions) {
            const auto& back = g.version(vi).affected_by;
            if (std::find(back.begin(), back.end(), ci) == back.end()) {
                fail("version_affects " + cve.id + " -> " + g.version_id(vi).to_string() + " lacks its reverse entry");
            }
            auto owner = g.version(vi).library;
            if (std::find(cve.libraries.begin(), cve.libraries.end(), owner) == cve.libraries.end()) {
                fail("version_affects " + cve.id + " -> " + g.version_id(vi).to_string() +
                     " without library_affects to its library");
            }
        }
        // Re-derive version_affects from the advisory ranges.
        std::set<VersionIndex> expected;
        for (auto a : cve.advisories) {
            const auto& adv = g.advisories()[a];
            if (auto li = g.find_library(adv.package_name)) {
                for (auto vi : g.library(*li).versions) {
                    if (semver::matches(adv.vulnerable_version_range, g.version_num(vi))) {
                        expected.insert(vi);
                    }
                }
            }
        }
        if (std::vector<VersionIndex>(expected.begin(), expected.end()) != cve.versions) {
            fail("version_affects of " + cve.id + " disagree with its vulnerable ranges");
        }
    }
    for (VersionIndex vi = 0; vi < nv; ++vi) {
        for (auto ci : g.version(vi).affected_by) {
            const auto& vs = g.cve(ci).versions;
            if (!std::binary_search(vs.begin(), vs.end(), vi)) {
                fail("reverse version_affects of " + g.version_id(vi).to_string() + " is inconsistent");
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV export

/// RFC 4180 field quoting.
inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(s);
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

inline std::string csv_row(std::initializer_list<std::string_view> fields) {
    std::string out;
    bool first = true;
    for (auto f : fields) {
        if (!first) {
            out += ',';
        }
        first = false;
        out += csv_field(f);
    }
    out += "\r\n";
    return out;
}

struct CsvExport {
    std::string nodes;
    std::string edges;
};

inline json node_properties(const LibraryRecord& r) {
    return json{{"id", r.id},
                {"name", r.name},
                {"created_at", r.created_at},
                {"updated_at", r.updated_at},
                {"description", r.description},
                {"downloads", r.downloads},
                {"recent_downloads", r.recent_downloads},
                {"max_version", r.max_version},
                {"max_stable_version", r.max_stable_version},
                {"newest_version", r.newest_version}};
}

/// Renders both tables; rows sorted by id, and by (src, dst, kind) for edges.
inline CsvExport render_csv(const KnowledgeGraph& g) {
    std::vector<std::tuple<std::string, std::string, std::string>> nodes;
    for (LibraryIndex li = 0; li < g.libraries().size(); ++li) {
        nodes.emplace_back(NodeId::library(g.library(li).name).to_string(), "library",
                           node_properties(g.library_record(li)).dump());
    }
    for (VersionIndex vi = 0; vi < g.versions().size(); ++vi) {
        const auto& rec = g.version_record(vi);
        json features = json::object();
        for (const auto& [k, v] : rec.features) {
            features[k] = v;
        }
        json props{{"name", g.version_library_name(vi)},
                   {"num", rec.num.to_string()},
                   {"yanked", rec.yanked},
                   {"features", features}};
        nodes.emplace_back(g.version_id(vi).to_string(), "library_version", props.dump());
    }
    for (const auto& cve : g.cves()) {
        json advisories = json::array();
        for (auto a : cve.advisories) {
            advisories.push_back(ingest::to_json(g.advisories()[a]));
        }
        nodes.emplace_back(NodeId::cve(cve.id).to_string(), "cve", json{{"advisories", advisories}}.dump());
    }
    std::sort(nodes.begin(), nodes.end());

    std::vector<std::tuple<std::string, std::string, std::string, std::string>> edges;
    for (LibraryIndex li = 0; li < g.libraries().size(); ++li) {
        auto src = NodeId::library(g.library(li).name).to_string();
        for (auto vi : g.library(li).versions) {
            edges.emplace_back(src, g.version_id(vi).to_string(), "has", "{}");
        }
    }
    for (EdgeIndex e = 0; e < g.depends_edges().size(); ++e) {
        const auto& edge = g.depends_edge(e);
        auto props = ingest::to_json(g.decl(e));
        props.erase("target_name");
        edges.emplace_back(g.version_id(edge.from).to_string(), NodeId::library(g.library(edge.to).name).to_string(),
                           "version_depends", props.dump());
    }
    for (const auto& cve : g.cves()) {
        auto src = NodeId::cve(cve.id).to_string();
        for (auto li : cve.libraries) {
            json ids = json::array();
            for (auto a : cve.advisories) {
                if (g.advisories()[a].package_name == g.library(li).name) {
                    ids.push_back(g.advisories()[a].database_id);
                }
            }
            edges.emplace_back(src, NodeId::library(g.library(li).name).to_string(), "library_affects",
                               json{{"advisories", ids}}.dump());
        }
        for (auto vi : cve.versions) {
            edges.emplace_back(src, g.version_id(vi).to_string(), "version_affects", "{}");
        }
    }
    std::sort(edges.begin(), edges.end());

    CsvExport out;
    out.nodes = csv_row({"id", "kind", "properties"});
    for (const auto& [id, kind, props] : nodes) {
        out.nodes += csv_row({id, kind, props});
    }
    out.edges = csv_row({"src", "dst", "kind", "properties"});
    for (const auto& [src, dst, kind, props] : edges) {
        out.edges += csv_row({src, dst, kind, props});
    }
    return out;
}

/// Writes nodes.csv and edges.csv into out_dir (created if needed).
inline std::vector<std::filesystem::path> export_graph(const KnowledgeGraph& g, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw io_error(out_dir, "cannot create directory");
    }
    auto csv = render_csv(g);
    auto nodes = out_dir / "nodes.csv";
    auto edges = out_dir / "edges.csv";
    write_file(nodes, csv.nodes);
    write_file(edges, csv.edges);
    return {nodes, edges};
}

} // namespace vulngraph::graph
