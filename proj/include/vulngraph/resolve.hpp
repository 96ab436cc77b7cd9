#pragma once

/**
 * @file resolve.hpp
 * @brief Dependency-tree resolution over the knowledge graph.
 *
 * Starting from one (library, version), every included dependency
 * declaration is resolved to the greatest selectable version of its target
 * and expanded depth-first. A (library, version) pair is expanded at most
 * once per call; later occurrences become `shared` leaves, which keeps the
 * output a finite tree even when the registry contains cycles.
 *
 * Inclusion rules:
 *  - dev and build dependencies are skipped;
 *  - optional dependencies are followed only when switched on by the
 *    declaring version's enabled features (default set plus whatever the
 *    parent requested). Features are not unified across the whole tree.
 */

#include <vulngraph/common.hpp>
#include <vulngraph/graph.hpp>
#include <vulngraph/ingest.hpp>
#include <vulngraph/semver.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace vulngraph::resolve {

using ingest::DependencyDecl;
using ingest::DependencyKind;
using ingest::LockEntry;
using ingest::VersionRecord;

/// Caps on a single resolution. Hitting either marks the tree truncated.
struct ResolveLimits {
    /// Maximum number of nodes on a root-to-leaf path, root included.
    std::size_t max_nodes_per_path = 100;
    std::size_t max_total_nodes = 1'000'000;

    void validate() const {
        if (max_nodes_per_path == 0 || max_total_nodes == 0) {
            throw std::invalid_argument("resolve limits must be positive");
        }
    }
};

/// Feature state of one version being expanded.
struct RuleContext {
    /// Closed under the version's feature table.
    std::set<std::string> enabled_features;
    /// Optional dependencies switched on by the enabled features.
    std::set<std::string> activated;
    /// Features requested on a dependency through "dep/feature".
    std::map<std::string, std::set<std::string>> dep_features;
    /// Features requested through "dep?/feature"; they apply only if dep is in.
    std::map<std::string, std::set<std::string>> weak_dep_features;
    /// Dependency kinds followed.
    std::set<DependencyKind> kinds{DependencyKind::normal};

    /// Features to request on the target of decl.
    std::vector<std::string> features_for(const DependencyDecl& decl) const {
        std::set<std::string> out(decl.features.begin(), decl.features.end());
        if (auto it = dep_features.find(decl.target_name); it != dep_features.end()) {
            out.insert(it->second.begin(), it->second.end());
        }
        if (!decl.optional || activated.count(decl.target_name)) {
            if (auto it = weak_dep_features.find(decl.target_name); it != weak_dep_features.end()) {
                out.insert(it->second.begin(), it->second.end());
            }
        }
        return {out.begin(), out.end()};
    }
};

/// Feature closure for target, seeded from its "default" feature (when
/// default_features) and the requested names.
inline RuleContext make_rule_context(const VersionRecord& target, bool default_features,
                                     const std::vector<std::string>& requested) {
    RuleContext ctx;
    std::vector<std::string> work;
    if (default_features && target.features.count("default")) {
        work.push_back("default");
    }
    work.insert(work.end(), requested.rbegin(), requested.rend());
    while (!work.empty()) {
        auto entry = std::move(work.back());
        work.pop_back();
        if (entry.rfind("dep:", 0) == 0) {
            ctx.activated.insert(entry.substr(4));
            continue;
        }
        if (auto slash = entry.find('/'); slash != std::string::npos) {
            auto dep = entry.substr(0, slash);
            auto feature = entry.substr(slash + 1);
            if (!dep.empty() && dep.back() == '?') {
                dep.pop_back();
                ctx.weak_dep_features[dep].insert(feature);
            } else {
                ctx.activated.insert(dep);
                ctx.dep_features[dep].insert(feature);
            }
            continue;
        }
        if (!ctx.enabled_features.insert(entry).second) {
            continue;
        }
        if (auto it = target.features.find(entry); it != target.features.end()) {
            work.insert(work.end(), it->second.rbegin(), it->second.rend());
        } else {
            // Not a declared feature: the implicit feature of an optional dependency.
            ctx.activated.insert(entry);
        }
    }
    return ctx;
}

inline bool include_dependency(const DependencyDecl& decl, const RuleContext& ctx) {
    if (!ctx.kinds.count(decl.kind)) {
        return false;
    }
    if (decl.optional && !ctx.activated.count(decl.target_name)) {
        return false;
    }
    return true;
}

struct TreeNode {
    std::string name;
    /// Absent for unresolvable leaves.
    std::optional<semver::Version> version;
    std::optional<std::size_t> parent;
    /// The requirement that selected this node; empty for the root.
    std::string requirement;
    std::size_t depth = 0;
    bool shared = false;
    bool unresolvable = false;
    std::vector<std::size_t> children;
    std::optional<graph::VersionIndex> vertex;
};

/// Nodes in depth-first preorder; nodes[0] is the root.
struct ResolvedTree {
    std::vector<TreeNode> nodes;
    bool truncated = false;

    const TreeNode& root() const { return nodes.at(0); }
};

/// Greatest version of lib that req selects, or nothing.
inline std::optional<graph::VersionIndex> select_version(const graph::KnowledgeGraph& g, graph::LibraryIndex lib,
                                                         const semver::Requirement& req, bool allow_yanked = false) {
    const auto& vs = g.library(lib).versions;
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) {
        if (semver::selectable(req, g.version_num(*it), g.version_record(*it).yanked, allow_yanked)) {
            return *it;
        }
    }
    return std::nullopt;
}

inline ResolvedTree resolve_tree(const graph::KnowledgeGraph& g, std::string_view name, const semver::Version& version,
                                 const ResolveLimits& limits = {}, bool allow_yanked = false) {
    limits.validate();
    auto root = g.find_version(name, version);
    if (!root) {
        throw not_found("unknown library version " + std::string(name) + "@" + version.to_string());
    }

    ResolvedTree tree;
    TreeNode first;
    first.name = std::string(name);
    first.version = g.version_num(*root);
    first.vertex = *root;
    tree.nodes.push_back(std::move(first));

    struct Frame {
        std::size_t node;
        graph::VersionIndex vertex;
        RuleContext ctx;
        std::size_t next = 0;
    };
    std::unordered_set<graph::VersionIndex> expanded{*root};
    std::vector<Frame> stack;
    stack.push_back({0, *root, make_rule_context(g.version_record(*root), true, {})});

    while (!stack.empty()) {
        auto& top = stack.back();
        const auto& deps = g.version_record(top.vertex).dependencies;
        if (top.next == deps.size()) {
            stack.pop_back();
            continue;
        }
        const auto& decl = deps[top.next++];
        if (!include_dependency(decl, top.ctx)) {
            continue;
        }
        auto parent = top.node;
        auto depth = tree.nodes[parent].depth + 1;
        if (depth + 1 > limits.max_nodes_per_path || tree.nodes.size() >= limits.max_total_nodes) {
            tree.truncated = true;
            continue;
        }

        TreeNode child;
        child.name = decl.target_name;
        child.parent = parent;
        child.requirement = decl.requirement.source().empty() ? decl.requirement.to_string() : decl.requirement.source();
        child.depth = depth;
        auto index = tree.nodes.size();
        tree.nodes[parent].children.push_back(index);

        std::optional<graph::VersionIndex> pick;
        if (auto lib = g.find_library(decl.target_name)) {
            pick = select_version(g, *lib, decl.requirement, allow_yanked);
        }
        if (!pick) {
            child.unresolvable = true;
            tree.nodes.push_back(std::move(child));
            continue;
        }
        child.version = g.version_num(*pick);
        child.vertex = *pick;
        if (!expanded.insert(*pick).second) {
            child.shared = true;
            tree.nodes.push_back(std::move(child));
            continue;
        }
        auto ctx = make_rule_context(g.version_record(*pick), decl.default_features, top.ctx.features_for(decl));
        tree.nodes.push_back(std::move(child));
        stack.push_back({index, *pick, std::move(ctx)});
    }
    return tree;
}

namespace detail {

inline nlohmann::ordered_json nested(const ResolvedTree& tree, std::size_t i) {
    const auto& n = tree.nodes[i];
    nlohmann::ordered_json j;
    j["name"] = n.name;
    j["version"] = n.version ? nlohmann::ordered_json(n.version->to_string()) : nlohmann::ordered_json(nullptr);
    if (n.parent) {
        j["requirement"] = n.requirement;
    }
    if (n.shared) {
        j["shared"] = true;
    }
    if (n.unresolvable) {
        j["unresolvable"] = true;
    }
    auto children = nlohmann::ordered_json::array();
    for (auto c : n.children) {
        children.push_back(nested(tree, c));
    }
    j["children"] = std::move(children);
    return j;
}

} // namespace detail

/// Nested parent-child document plus the flat preorder node list.
inline nlohmann::ordered_json tree_to_json_value(const ResolvedTree& tree) {
    auto doc = detail::nested(tree, 0);
    auto flat = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const auto& n = tree.nodes[i];
        nlohmann::ordered_json j;
        j["index"] = i;
        j["name"] = n.name;
        j["version"] = n.version ? nlohmann::ordered_json(n.version->to_string()) : nlohmann::ordered_json(nullptr);
        j["parent"] = n.parent ? nlohmann::ordered_json(*n.parent) : nlohmann::ordered_json(nullptr);
        j["requirement"] = n.requirement;
        j["depth"] = n.depth;
        if (n.shared) {
            j["shared"] = true;
        }
        if (n.unresolvable) {
            j["unresolvable"] = true;
        }
        flat.push_back(std::move(j));
    }
    doc["nodes"] = std::move(flat);
    doc["truncated"] = tree.truncated;
    return doc;
}

inline std::string tree_to_json(const ResolvedTree& tree, int indent = -1) {
    return tree_to_json_value(tree).dump(indent);
}

// ---------------------------------------------------------------------------
// Lockfile comparison

struct VersionMismatch {
    std::string name;
    semver::Version tree_version;
    semver::Version lock_version;

    friend bool operator==(const VersionMismatch&, const VersionMismatch&) = default;
};

struct LockDiff {
    std::vector<LockEntry> tree_only;
    std::vector<LockEntry> lock_only;
    std::vector<VersionMismatch> mismatched;

    bool empty() const noexcept { return tree_only.empty() && lock_only.empty() && mismatched.empty(); }
};

/// Compares resolved (name, version) pairs with a lockfile. Entries are
/// paired by name and compatibility bucket, so several majors of one
/// library are compared independently.
inline LockDiff verify_against_lockfile(const ResolvedTree& tree, const std::vector<LockEntry>& lock) {
    using Key = std::pair<std::string, std::string>;
    std::map<Key, std::set<semver::Version>> in_tree, in_lock;
    for (const auto& n : tree.nodes) {
        if (n.version) {
            in_tree[{n.name, semver::compatibility_bucket(*n.version)}].insert(*n.version);
        }
    }
    for (const auto& e : lock) {
        in_lock[{e.name, semver::compatibility_bucket(e.version)}].insert(e.version);
    }

    LockDiff diff;
    for (const auto& [key, versions] : in_tree) {
        auto it = in_lock.find(key);
        if (it == in_lock.end()) {
            for (const auto& v : versions) {
                diff.tree_only.push_back({key.first, v});
            }
            continue;
        }
        std::vector<semver::Version> only_tree, only_lock;
        std::set_difference(versions.begin(), versions.end(), it->second.begin(), it->second.end(),
                            std::back_inserter(only_tree));
        std::set_difference(it->second.begin(), it->second.end(), versions.begin(), versions.end(),
                            std::back_inserter(only_lock));
        std::size_t paired = std::min(only_tree.size(), only_lock.size());
        for (std::size_t i = 0; i < paired; ++i) {
            diff.mismatched.push_back({key.first, only_tree[i], only_lock[i]});
        }
        for (std::size_t i = paired; i < only_tree.size(); ++i) {
            diff.tree_only.push_back({key.first, only_tree[i]});
        }
        for (std::size_t i = paired; i < only_lock.size(); ++i) {
            diff.lock_only.push_back({key.first, only_lock[i]});
        }
    }
    for (const auto& [key, versions] : in_lock) {
        if (!in_tree.count(key)) {
            for (const auto& v : versions) {
                diff.lock_only.push_back({key.first, v});
            }
        }
    }
    return diff;
}

inline nlohmann::ordered_json to_json(const LockDiff& d) {
    auto entries = [](const std::vector<LockEntry>& list) {
        auto a = nlohmann::ordered_json::array();
        for (const auto& e : list) {
            a.push_back({{"name", e.name}, {"version", e.version.to_string()}});
        }
        return a;
    };
    auto mismatched = nlohmann::ordered_json::array();
    for (const auto& m : d.mismatched) {
        mismatched.push_back(
            {{"name", m.name}, {"tree_version", m.tree_version.to_string()}, {"lock_version", m.lock_version.to_string()}});
    }
    nlohmann::ordered_json j;
    j["in_tree_only"] = entries(d.tree_only);
    j["in_lock_only"] = entries(d.lock_only);
    j["version_mismatch"] = std::move(mismatched);
    return j;
}

} // namespace vulngraph::resolve
