#pragma once

/**
 * @file propagate.hpp
 * @brief Vulnerability propagation over resolved dependency trees.
 *
 * The versions an advisory names directly are its version_affects targets.
 * Walking version_depends edges backwards from the vulnerable library gives
 * every version that could pull it in; each such candidate is then resolved
 * and counts as transitively affected only if its tree really selects a
 * directly affected version.
 */

#include <vulngraph/common.hpp>
#include <vulngraph/graph.hpp>
#include <vulngraph/resolve.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <deque>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace vulngraph::propagate {

using graph::KnowledgeGraph;
using graph::VersionIndex;
using ingest::Advisory;
using resolve::ResolveLimits;

inline constexpr const char* reason_outside_range = "resolved-version-outside-range";
inline constexpr const char* reason_truncated = "truncated";

/// Orders versions by (library name, version).
struct VersionOrder {
    const KnowledgeGraph* g;
    bool operator()(VersionIndex a, VersionIndex b) const {
        const auto& na = g->version_library_name(a);
        const auto& nb = g->version_library_name(b);
        if (na != nb) {
            return na < nb;
        }
        return g->version_num(a) < g->version_num(b);
    }
};

inline void sort_versions(const KnowledgeGraph& g, std::vector<VersionIndex>& vs) {
    std::sort(vs.begin(), vs.end(), VersionOrder{&g});
}

struct ExcludedCandidate {
    VersionIndex version;
    std::string reason;
};

struct PropagationResult {
    std::string advisory;  // CVE id
    std::int64_t database_id = 0;
    std::string package;
    std::vector<VersionIndex> direct;
    std::vector<VersionIndex> transitive;
    /// Parallel to transitive: path from that version to a direct one.
    std::vector<std::vector<VersionIndex>> witness_paths;
    std::vector<ExcludedCandidate> excluded;
    bool truncated = false;
};

/// Exactly the advisory's version_affects targets, ascending by version.
inline std::vector<VersionIndex> affected_versions(const KnowledgeGraph& g, const Advisory& advisory,
                                                   Diagnostics* diag = nullptr) {
    auto lib = g.find_library(advisory.package_name);
    if (!lib) {
        if (diag) {
            diag->warn("advisory " + std::to_string(advisory.database_id) + " (" + advisory.value +
                       ") names unknown package " + advisory.package_name);
        }
        return {};
    }
    std::vector<VersionIndex> out;
    for (auto vi : g.library(*lib).versions) {
        if (semver::matches(advisory.vulnerable_version_range, g.version_num(vi))) {
            out.push_back(vi);
        }
    }
    return out;
}

/// Every version that declares a dependency on library_name, directly or
/// through other libraries' declarations. Sorted by (name, version).
inline std::vector<VersionIndex> reverse_dependents(const KnowledgeGraph& g, std::string_view library_name) {
    auto start = g.find_library(library_name);
    if (!start) {
        return {};
    }
    std::vector<char> seen_lib(g.libraries().size(), 0);
    std::unordered_set<VersionIndex> found;
    std::vector<graph::LibraryIndex> work{*start};
    seen_lib[*start] = 1;
    while (!work.empty()) {
        auto li = work.back();
        work.pop_back();
        for (auto e : g.library(li).dependents) {
            auto from = g.depends_edge(e).from;
            found.insert(from);
            auto owner = g.version(from).library;
            if (!seen_lib[owner]) {
                seen_lib[owner] = 1;
                work.push_back(owner);
            }
        }
    }
    std::vector<VersionIndex> out(found.begin(), found.end());
    sort_versions(g, out);
    return out;
}

/// Vertex-level view of one resolved tree: distinct (parent, child) pairs in
/// compressed adjacency form, children ordered by (name, version).
struct ResolvedSummary {
    VersionIndex root = 0;
    /// Distinct vertices of the tree, ascending by index.
    std::vector<VersionIndex> vertices;
    /// Children of vertices[i] are children[offsets[i] .. offsets[i + 1]), as positions in vertices.
    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> children;
    bool truncated = false;

    std::optional<std::uint32_t> position(VersionIndex v) const {
        auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
        if (it == vertices.end() || *it != v) {
            return std::nullopt;
        }
        return std::uint32_t(it - vertices.begin());
    }

    std::size_t edge_count() const noexcept { return children.size(); }
};

inline ResolvedSummary summarize(const KnowledgeGraph& g, const resolve::ResolvedTree& tree) {
    ResolvedSummary s;
    s.root = *tree.root().vertex;
    s.truncated = tree.truncated;
    std::vector<std::pair<VersionIndex, VersionIndex>> edges;
    for (const auto& n : tree.nodes) {
        if (n.vertex) {
            s.vertices.push_back(*n.vertex);
            if (n.parent) {
                edges.emplace_back(*tree.nodes[*n.parent].vertex, *n.vertex);
            }
        }
    }
    std::sort(s.vertices.begin(), s.vertices.end());
    s.vertices.erase(std::unique(s.vertices.begin(), s.vertices.end()), s.vertices.end());
    VersionOrder order{&g};
    std::sort(edges.begin(), edges.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first < b.first;
        }
        return order(a.second, b.second);
    });
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    s.offsets.assign(s.vertices.size() + 1, 0);
    s.children.reserve(edges.size());
    for (const auto& [from, to] : edges) {
        ++s.offsets[*s.position(from) + 1];
        s.children.push_back(*s.position(to));
    }
    for (std::size_t i = 1; i < s.offsets.size(); ++i) {
        s.offsets[i] += s.offsets[i - 1];
    }
    return s;
}

/// Resolved trees keyed by root version; safe for concurrent use.
class TreeCache {
public:
    TreeCache(const KnowledgeGraph& g, ResolveLimits limits, bool allow_yanked = false)
        : _g(g), _limits(limits), _allow_yanked(allow_yanked), _slots(g.versions().size()) {
        _limits.validate();
    }

    const ResolvedSummary& get(VersionIndex vi) {
        {
            std::lock_guard lock(_mutex);
            if (_slots[vi]) {
                return *_slots[vi];
            }
        }
        auto tree = resolve::resolve_tree(_g, _g.version_library_name(vi), _g.version_num(vi), _limits, _allow_yanked);
        auto summary = std::make_unique<ResolvedSummary>(summarize(_g, tree));
        std::lock_guard lock(_mutex);
        if (!_slots[vi]) {
            _slots[vi] = std::move(summary);
        }
        return *_slots[vi];
    }

    const KnowledgeGraph& graph() const noexcept { return _g; }
    const ResolveLimits& limits() const noexcept { return _limits; }

private:
    const KnowledgeGraph& _g;
    ResolveLimits _limits;
    bool _allow_yanked;
    std::mutex _mutex;
    std::vector<std::unique_ptr<ResolvedSummary>> _slots;
};

/// Shortest, then lexicographically least, path from the tree root to any
/// vertex in targets. Empty when none is reachable.
inline std::vector<VersionIndex> witness_path(const ResolvedSummary& tree, const std::vector<VersionIndex>& targets) {
    constexpr auto unseen = std::numeric_limits<std::uint32_t>::max();
    std::vector<char> is_target(tree.vertices.size(), 0);
    bool any = false;
    for (auto t : targets) {
        if (auto p = tree.position(t)) {
            is_target[*p] = 1;
            any = true;
        }
    }
    auto root = *tree.position(tree.root);
    if (!any || is_target[root]) {
        return {};
    }
    std::vector<std::uint32_t> via(tree.vertices.size(), unseen);
    std::deque<std::uint32_t> queue{root};
    via[root] = root;
    while (!queue.empty()) {
        auto at = queue.front();
        queue.pop_front();
        for (auto k = tree.offsets[at]; k < tree.offsets[at + 1]; ++k) {
            auto next = tree.children[k];
            if (via[next] != unseen) {
                continue;
            }
            via[next] = at;
            if (is_target[next]) {
                std::vector<VersionIndex> path{tree.vertices[next]};
                for (auto p = next; p != root;) {
                    p = via[p];
                    path.push_back(tree.vertices[p]);
                }
                std::reverse(path.begin(), path.end());
                return path;
            }
            queue.push_back(next);
        }
    }
    return {};
}

inline PropagationResult propagation_paths(TreeCache& cache, const Advisory& advisory, Diagnostics* diag = nullptr) {
    const auto& g = cache.graph();
    PropagationResult r;
    r.advisory = advisory.value;
    r.database_id = advisory.database_id;
    r.package = advisory.package_name;
    r.direct = affected_versions(g, advisory, diag);
    std::unordered_set<VersionIndex> direct(r.direct.begin(), r.direct.end());

    for (auto c : reverse_dependents(g, advisory.package_name)) {
        if (direct.count(c)) {
            continue;
        }
        const auto& tree = cache.get(c);
        r.truncated |= tree.truncated;
        auto path = witness_path(tree, r.direct);
        if (path.empty()) {
            r.excluded.push_back({c, tree.truncated ? reason_truncated : reason_outside_range});
            continue;
        }
        r.transitive.push_back(c);
        r.witness_paths.push_back(std::move(path));
    }
    return r;
}

inline PropagationResult propagation_paths(const KnowledgeGraph& g, const Advisory& advisory,
                                           const ResolveLimits& limits = {}, bool allow_yanked = false,
                                           Diagnostics* diag = nullptr) {
    TreeCache cache(g, limits, allow_yanked);
    return propagation_paths(cache, advisory, diag);
}

struct EcosystemStats {
    std::size_t directly_affected_libraries = 0;
    std::size_t directly_affected_versions = 0;
    std::size_t propagated_libraries = 0;
    std::size_t propagated_versions = 0;
    std::size_t total_libraries = 0;
    std::size_t total_versions = 0;
    double library_ratio = 0.0;
    double version_ratio = 0.0;
    /// Advisories with at least one truncated candidate resolution.
    std::size_t truncated_advisories = 0;
};

/// Union of per-advisory results. A version both directly and transitively
/// affected counts as direct; likewise a library.
inline EcosystemStats merge_results(const KnowledgeGraph& g, const std::vector<PropagationResult>& results) {
    std::unordered_set<VersionIndex> direct, reached;
    for (const auto& r : results) {
        direct.insert(r.direct.begin(), r.direct.end());
        reached.insert(r.transitive.begin(), r.transitive.end());
    }
    std::unordered_set<graph::LibraryIndex> direct_libs, reached_libs;
    for (auto v : direct) {
        direct_libs.insert(g.version(v).library);
    }
    std::size_t propagated = 0;
    for (auto v : reached) {
        if (direct.count(v)) {
            continue;
        }
        ++propagated;
        if (!direct_libs.count(g.version(v).library)) {
            reached_libs.insert(g.version(v).library);
        }
    }
    auto stats = graph::graph_stats(g);
    EcosystemStats s;
    s.directly_affected_libraries = direct_libs.size();
    s.directly_affected_versions = direct.size();
    s.propagated_libraries = reached_libs.size();
    s.propagated_versions = propagated;
    s.total_libraries = stats.library;
    s.total_versions = stats.library_version;
    s.library_ratio = stats.library ? double(s.propagated_libraries) / double(stats.library) : 0.0;
    s.version_ratio = stats.library_version ? double(s.propagated_versions) / double(stats.library_version) : 0.0;
    for (const auto& r : results) {
        s.truncated_advisories += r.truncated;
    }
    return s;
}

/// Runs every advisory on `jobs` threads; results keep advisory order.
inline std::vector<PropagationResult> propagate_all(TreeCache& cache, const std::vector<Advisory>& advisories,
                                                    unsigned jobs = 1, Diagnostics* diag = nullptr) {
    std::vector<PropagationResult> results(advisories.size());
    std::vector<Diagnostics> local(advisories.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < advisories.size(); i = next++) {
            results[i] = propagation_paths(cache, advisories[i], &local[i]);
        }
    };
    jobs = std::max(1u, jobs);
    if (jobs == 1 || advisories.size() < 2) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < std::min<std::size_t>(jobs, advisories.size()); ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (diag) {
        for (auto& d : local) {
            for (auto& w : d.warnings) {
                diag->warn(std::move(w));
            }
        }
    }
    return results;
}

inline EcosystemStats ecosystem_propagation_stats(const KnowledgeGraph& g, const std::vector<Advisory>& advisories,
                                                  const ResolveLimits& limits = {}, unsigned jobs = 1,
                                                  bool allow_yanked = false,
                                                  std::vector<PropagationResult>* results_out = nullptr) {
    TreeCache cache(g, limits, allow_yanked);
    auto results = propagate_all(cache, advisories, jobs);
    auto stats = merge_results(g, results);
    if (results_out) {
        *results_out = std::move(results);
    }
    return stats;
}

// ---------------------------------------------------------------------------
// Reporting

struct ImpactRow {
    std::string cve;
    std::string library;
    std::size_t libraries_reached = 0;
    std::size_t versions_reached = 0;
};

inline std::vector<ImpactRow> top_impact_table(const KnowledgeGraph& g, const std::vector<PropagationResult>& results,
                                               std::size_t k) {
    std::vector<ImpactRow> rows;
    for (const auto& r : results) {
        std::set<graph::LibraryIndex> libs;
        for (auto v : r.transitive) {
            libs.insert(g.version(v).library);
        }
        rows.push_back({r.advisory, r.package, libs.size(), r.transitive.size()});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ImpactRow& a, const ImpactRow& b) {
        if (a.versions_reached != b.versions_reached) {
            return a.versions_reached > b.versions_reached;
        }
        return a.cve < b.cve;
    });
    if (rows.size() > k) {
        rows.resize(k);
    }
    return rows;
}

inline std::string impact_csv(const std::vector<ImpactRow>& rows) {
    std::string out = graph::csv_row({"cve", "library", "libraries_reached", "versions_reached"});
    for (const auto& r : rows) {
        out += graph::csv_row({r.cve, r.library, std::to_string(r.libraries_reached), std::to_string(r.versions_reached)});
    }
    return out;
}

/// Fixed-width table, columns padded to their widest cell.
inline std::string aligned_table(const std::vector<std::vector<std::string>>& cells) {
    std::vector<std::size_t> width;
    for (const auto& row : cells) {
        width.resize(std::max(width.size(), row.size()), 0);
        for (std::size_t c = 0; c < row.size(); ++c) {
            width[c] = std::max(width[c], row[c].size());
        }
    }
    std::ostringstream out;
    for (const auto& row : cells) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            line += row[c];
            if (c + 1 < row.size()) {
                line += std::string(width[c] - row[c].size() + 2, ' ');
            }
        }
        out << line << '\n';
    }
    return out.str();
}

inline std::string impact_text(const std::vector<ImpactRow>& rows) {
    std::vector<std::vector<std::string>> cells{{"CVE", "Library", "Libraries reached", "Versions reached"}};
    for (const auto& r : rows) {
        cells.push_back({r.cve, r.library, std::to_string(r.libraries_reached), std::to_string(r.versions_reached)});
    }
    return aligned_table(cells);
}

inline nlohmann::ordered_json version_ref(const KnowledgeGraph& g, VersionIndex v) {
    return {{"name", g.version_library_name(v)}, {"version", g.version_num(v).to_string()}};
}

inline nlohmann::ordered_json to_json(const KnowledgeGraph& g, const PropagationResult& r) {
    using oj = nlohmann::ordered_json;
    auto refs = [&](const std::vector<VersionIndex>& vs) {
        auto a = oj::array();
        for (auto v : vs) {
            a.push_back(version_ref(g, v));
        }
        return a;
    };
    auto paths = oj::array();
    for (std::size_t i = 0; i < r.transitive.size(); ++i) {
        paths.push_back({{"from", version_ref(g, r.transitive[i])}, {"path", refs(r.witness_paths[i])}});
    }
    auto excluded = oj::array();
    for (const auto& e : r.excluded) {
        auto j = version_ref(g, e.version);
        j["reason"] = e.reason;
        excluded.push_back(std::move(j));
    }
    oj j;
    j["advisory"] = r.advisory;
    j["databaseId"] = r.database_id;
    j["package"] = r.package;
    j["direct"] = refs(r.direct);
    j["transitively_affected"] = refs(r.transitive);
    j["witness_paths"] = std::move(paths);
    j["excluded_candidates"] = std::move(excluded);
    j["truncated"] = r.truncated;
    return j;
}

inline nlohmann::ordered_json to_json(const EcosystemStats& s) {
    nlohmann::ordered_json j;
    j["directly_affected_libraries"] = s.directly_affected_libraries;
    j["directly_affected_versions"] = s.directly_affected_versions;
    j["propagated_libraries"] = s.propagated_libraries;
    j["propagated_versions"] = s.propagated_versions;
    j["total_libraries"] = s.total_libraries;
    j["total_versions"] = s.total_versions;
    j["library_ratio"] = s.library_ratio;
    j["version_ratio"] = s.version_ratio;
    j["truncated_advisories"] = s.truncated_advisories;
    return j;
}

} // namespace vulngraph::propagate
