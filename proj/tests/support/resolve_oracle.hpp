#pragma once

// Exhaustive reference resolver. Works on the raw snapshot rather than the
// graph, evaluates requirements through interval membership, and only
// understands feature tables whose entries are plain names.

#include "semver_oracle.hpp"

#include <vulngraph/ingest.hpp>

#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace vulngraph::testing {

struct OracleNode {
    std::string name;
    std::string version;  // empty when unresolvable
    long parent;          // -1 for the root
    std::string requirement;
    std::size_t depth;
    bool shared;
    bool unresolvable;

    friend bool operator==(const OracleNode&, const OracleNode&) = default;
};

class OracleResolver {
public:
    explicit OracleResolver(const ingest::RegistrySnapshot& snap) : _snap(snap) {}

    std::vector<OracleNode> resolve(const std::string& name, const semver::Version& v) {
        _out.clear();
        _seen.clear();
        _seen.insert({name, v.to_string()});
        _out.push_back({name, v.to_string(), -1, "", 0, false, false});
        expand(0, record(name, v), true);
        return _out;
    }

private:
    const ingest::VersionRecord& record(const std::string& name, const semver::Version& v) const {
        for (const auto& l : _snap.libraries) {
            if (l.name != name) continue;
            for (const auto& r : l.versions) {
                if (oracle_compare(r.num, v) == 0) return r;
            }
        }
        throw std::logic_error("oracle: missing " + name);
    }

    static std::set<std::string> closure(const ingest::VersionRecord& r, bool defaults) {
        std::set<std::string> on;
        std::vector<std::string> todo;
        if (defaults) todo.push_back("default");
        while (!todo.empty()) {
            auto f = todo.back();
            todo.pop_back();
            if (!on.insert(f).second) continue;
            auto it = r.features.find(f);
            if (it != r.features.end()) todo.insert(todo.end(), it->second.begin(), it->second.end());
        }
        return on;
    }

    void expand(std::size_t node, const ingest::VersionRecord& rec, bool defaults) {
        auto on = closure(rec, defaults);
        for (const auto& d : rec.dependencies) {
            if (d.kind != ingest::DependencyKind::normal) continue;
            if (d.optional && !on.count(d.target_name)) continue;

            // Every satisfying version of the target; keep the greatest.
            std::vector<semver::Candidate> cands;
            for (const auto& l : _snap.libraries) {
                if (l.name != d.target_name) continue;
                for (const auto& r : l.versions) cands.push_back({r.num, r.yanked});
            }
            auto best = brute_max(cands, d.requirement);
            auto index = long(_out.size());
            auto depth = _out[node].depth + 1;
            if (!best) {
                _out.push_back({d.target_name, "", long(node), d.requirement.source(), depth, false, true});
                continue;
            }
            bool fresh = _seen.insert({d.target_name, best->to_string()}).second;
            _out.push_back({d.target_name, best->to_string(), long(node), d.requirement.source(), depth, !fresh, false});
            if (fresh) expand(std::size_t(index), record(d.target_name, *best), d.default_features);
        }
    }

    const ingest::RegistrySnapshot& _snap;
    std::vector<OracleNode> _out;
    std::set<std::pair<std::string, std::string>> _seen;
};

} // namespace vulngraph::testing
