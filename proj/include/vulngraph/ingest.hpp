#pragma once

/**
 * @file ingest.hpp
 * @brief Registry and advisory snapshots: loading, validation, incremental
 * updates, and lockfile parsing.
 *
 * Both feeds are newline-delimited JSON, one record per line. Library records
 * use the crates.io metadata field names (`id`, `name`, `created_at`, ...)
 * plus a `versions` array; advisory records use the GitHub advisory field
 * names (`databaseId`, `severity`, `vulnerableVersionRange`, ...). The JSON
 * schemas live in `schema/`.
 */

#include <vulngraph/common.hpp>
#include <vulngraph/semver.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vulngraph::ingest {

using json = nlohmann::json;

enum class DependencyKind { normal, dev, build };

inline std::string to_string(DependencyKind k) {
    switch (k) {
    case DependencyKind::normal: return "normal";
    case DependencyKind::dev: return "dev";
    case DependencyKind::build: return "build";
    }
    return "normal";
}

struct DependencyDecl {
    std::string target_name;
    semver::Requirement requirement;
    DependencyKind kind = DependencyKind::normal;
    bool optional = false;
    bool default_features = true;
    std::vector<std::string> features;

    friend bool operator==(const DependencyDecl& a, const DependencyDecl& b) {
        return a.target_name == b.target_name && a.requirement.source() == b.requirement.source() &&
               a.kind == b.kind && a.optional == b.optional && a.default_features == b.default_features &&
               a.features == b.features;
    }
};

struct VersionRecord {
    semver::Version num;
    bool yanked = false;
    std::map<std::string, std::vector<std::string>> features;
    std::vector<DependencyDecl> dependencies;

    friend bool operator==(const VersionRecord& a, const VersionRecord& b) {
        return a.num == b.num && a.num.build == b.num.build && a.yanked == b.yanked && a.features == b.features &&
               a.dependencies == b.dependencies;
    }
};

struct LibraryRecord {
    std::string id;
    std::string name;
    std::string created_at;
    std::string updated_at;
    std::string description;
    std::uint64_t downloads = 0;
    std::uint64_t recent_downloads = 0;
    std::string max_version;
    std::string max_stable_version;
    std::string newest_version;
    std::vector<VersionRecord> versions;

    friend bool operator==(const LibraryRecord&, const LibraryRecord&) = default;
};

enum class Severity { low, moderate, high, critical };

inline constexpr Severity all_severities[] = {Severity::low, Severity::moderate, Severity::high, Severity::critical};

inline std::string to_string(Severity s) {
    switch (s) {
    case Severity::low: return "LOW";
    case Severity::moderate: return "MODERATE";
    case Severity::high: return "HIGH";
    case Severity::critical: return "CRITICAL";
    }
    return "LOW";
}

struct Advisory {
    std::int64_t database_id = 0;
    std::string value;  // CVE id
    Severity severity = Severity::low;
    double cvss = 0.0;
    std::string published_at;
    std::string updated_at;
    std::string summary;
    semver::Requirement vulnerable_version_range;
    std::optional<std::string> first_patched_version;
    std::string ecosystem;
    std::string package_name;
    std::optional<std::vector<std::string>> cwe_ids;

    friend bool operator==(const Advisory& a, const Advisory& b) {
        return a.database_id == b.database_id && a.value == b.value && a.severity == b.severity &&
               a.cvss == b.cvss && a.published_at == b.published_at && a.updated_at == b.updated_at &&
               a.summary == b.summary && a.vulnerable_version_range.source() == b.vulnerable_version_range.source() &&
               a.first_patched_version == b.first_patched_version && a.ecosystem == b.ecosystem &&
               a.package_name == b.package_name && a.cwe_ids == b.cwe_ids;
    }
};

struct RegistrySnapshot {
    std::vector<LibraryRecord> libraries;

    const LibraryRecord* find(std::string_view name) const {
        auto it = std::find_if(libraries.begin(), libraries.end(), [&](const auto& l) { return l.name == name; });
        return it == libraries.end() ? nullptr : &*it;
    }

    friend bool operator==(const RegistrySnapshot&, const RegistrySnapshot&) = default;
};

struct ValidationIssue {
    std::size_t line = 0;  // 1-based; 0 when not tied to a line
    std::string record;    // name or id, when known
    std::string message;
};

inline std::string to_string(const ValidationIssue& i) {
    std::string out = "line " + std::to_string(i.line);
    if (!i.record.empty()) {
        out += " (" + i.record + ")";
    }
    return out + ": " + i.message;
}

/// Strict loading found invalid records. Carries every failure.
class validation_error : public std::runtime_error {
    std::vector<ValidationIssue> _issues;

    static std::string summarize(const std::vector<ValidationIssue>& issues) {
        std::string out = std::to_string(issues.size()) + " invalid record(s)";
        if (!issues.empty()) {
            out += "; first: " + to_string(issues.front());
        }
        return out;
    }

public:
    explicit validation_error(std::vector<ValidationIssue> issues)
        : std::runtime_error(summarize(issues)), _issues(std::move(issues)) {}

    const std::vector<ValidationIssue>& issues() const noexcept { return _issues; }
};

enum class LoadMode { strict, lenient };

template <typename T>
struct LoadResult {
    std::vector<T> records;
    std::vector<ValidationIssue> issues;

    bool clean() const noexcept { return issues.empty(); }
};

namespace detail {

struct record_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline const json& field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw record_error(std::string("missing field '") + key + "'");
    }
    return *it;
}

inline std::string string_field(const json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_string()) {
        throw record_error(std::string("field '") + key + "' must be a string");
    }
    return v.get<std::string>();
}

inline std::string optional_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return {};
    }
    if (!it->is_string()) {
        throw record_error(std::string("field '") + key + "' must be a string");
    }
    return it->get<std::string>();
}

inline std::uint64_t optional_count(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return 0;
    }
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
        throw record_error(std::string("field '") + key + "' must be a non-negative integer");
    }
    return it->get<std::uint64_t>();
}

inline bool optional_bool(const json& j, const char* key, bool fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return fallback;
    }
    if (!it->is_boolean()) {
        throw record_error(std::string("field '") + key + "' must be a boolean");
    }
    return it->get<bool>();
}

inline std::vector<std::string> string_list(const json& j, const char* what) {
    if (!j.is_array()) {
        throw record_error(std::string(what) + " must be an array of strings");
    }
    std::vector<std::string> out;
    for (const auto& e : j) {
        if (!e.is_string()) {
            throw record_error(std::string(what) + " must be an array of strings");
        }
        out.push_back(e.get<std::string>());
    }
    return out;
}

inline void check_timestamp(const std::string& value, const char* key) {
    static const std::regex iso(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:\d{2}))");
    if (!value.empty() && !std::regex_match(value, iso)) {
        throw record_error(std::string("field '") + key + "' is not an ISO-8601 timestamp: " + value);
    }
}

inline semver::Version version_field(const std::string& text, const char* what) {
    try {
        return semver::parse_version(text);
    } catch (const semver::parse_error& e) {
        throw record_error(std::string(what) + ": " + e.what());
    }
}

inline semver::Requirement requirement_field(const std::string& text, const char* what) {
    try {
        return semver::parse_requirement(text);
    } catch (const semver::parse_error& e) {
        throw record_error(std::string(what) + ": " + e.what());
    }
}

/// Non-blank lines with their 1-based numbers.
inline std::vector<std::pair<std::size_t, std::string_view>> lines_of(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string_view>> out;
    std::size_t number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        ++number;
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.find_first_not_of(" \t") != std::string_view::npos) {
            out.emplace_back(number, line);
        }
        start = end + 1;
    }
    return out;
}

inline bool is_cve_id(const std::string& s) {
    static const std::regex cve(R"(CVE-\d{4}-\d+)");
    return std::regex_match(s, cve);
}

inline bool is_cwe_id(const std::string& s) {
    static const std::regex cwe(R"(CWE-\d+)");
    return std::regex_match(s, cwe);
}

} // namespace detail

inline DependencyDecl dependency_from_json(const json& j) {
    using namespace detail;
    if (!j.is_object()) {
        throw record_error("dependency must be an object");
    }
    auto target = string_field(j, "target_name");
    if (target.empty()) {
        throw record_error("dependency target_name is empty");
    }
    auto req = requirement_field(string_field(j, "requirement"), ("requirement of " + target).c_str());
    DependencyDecl d{target, std::move(req), DependencyKind::normal, false, true, {}};
    auto kind = optional_string(j, "kind");
    if (kind.empty() || kind == "normal") {
        d.kind = DependencyKind::normal;
    } else if (kind == "dev") {
        d.kind = DependencyKind::dev;
    } else if (kind == "build") {
        d.kind = DependencyKind::build;
    } else {
        throw record_error("dependency kind must be normal, dev or build, got '" + kind + "'");
    }
    d.optional = optional_bool(j, "optional", false);
    d.default_features = optional_bool(j, "default_features", true);
    if (auto it = j.find("features"); it != j.end() && !it->is_null()) {
        d.features = string_list(*it, "dependency features");
    }
    return d;
}

/// Feature values may name features, dependencies, "dep:x", "x/feat" or "x?/feat".
inline void check_feature_graph(const VersionRecord& v) {
    std::set<std::string> deps;
    for (const auto& d : v.dependencies) {
        deps.insert(d.target_name);
    }
    for (const auto& [feature, enables] : v.features) {
        for (const auto& item : enables) {
            std::string_view ref = item;
            bool ok = false;
            if (ref.starts_with("dep:")) {
                ok = deps.count(std::string(ref.substr(4))) > 0;
            } else if (auto slash = ref.find('/'); slash != std::string_view::npos) {
                auto dep = ref.substr(0, slash);
                if (dep.ends_with('?')) {
                    dep.remove_suffix(1);
                }
                ok = deps.count(std::string(dep)) > 0 && slash + 1 < ref.size();
            } else {
                ok = v.features.count(item) > 0 || deps.count(item) > 0;
            }
            if (!ok) {
                throw detail::record_error("version " + v.num.to_string() + ": feature '" + feature +
                                           "' references undeclared name '" + item + "'");
            }
        }
    }
}

inline VersionRecord version_from_json(const json& j) {
    using namespace detail;
    if (!j.is_object()) {
        throw record_error("version entry must be an object");
    }
    VersionRecord v;
    v.num = version_field(string_field(j, "num"), "version num");
    v.yanked = optional_bool(j, "yanked", false);
    if (auto it = j.find("features"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) {
            throw record_error("features must be an object");
        }
        for (const auto& [name, list] : it->items()) {
            v.features[name] = string_list(list, ("feature '" + name + "'").c_str());
        }
    }
    if (auto it = j.find("dependencies"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) {
            throw record_error("dependencies must be an array");
        }
        for (const auto& d : *it) {
            v.dependencies.push_back(dependency_from_json(d));
        }
    }
    check_feature_graph(v);
    return v;
}

inline LibraryRecord library_from_json(const json& j) {
    using namespace detail;
    if (!j.is_object()) {
        throw record_error("record must be a JSON object");
    }
    LibraryRecord r;
    r.name = string_field(j, "name");
    if (r.name.empty()) {
        throw record_error("name is empty");
    }
    if (auto it = j.find("id"); it != j.end() && !it->is_null()) {
        if (it->is_string()) {
            r.id = it->get<std::string>();
        } else if (it->is_number_integer()) {
            r.id = std::to_string(it->get<std::int64_t>());
        } else {
            throw record_error("field 'id' must be a string or integer");
        }
    } else {
        r.id = r.name;
    }
    r.created_at = optional_string(j, "created_at");
    r.updated_at = optional_string(j, "updated_at");
    check_timestamp(r.created_at, "created_at");
    check_timestamp(r.updated_at, "updated_at");
    r.description = optional_string(j, "description");
    r.downloads = optional_count(j, "downloads");
    r.recent_downloads = optional_count(j, "recent_downloads");
    r.max_version = optional_string(j, "max_version");
    r.max_stable_version = optional_string(j, "max_stable_version");
    r.newest_version = string_field(j, "newest_version");

    const auto& versions = field(j, "versions");
    if (!versions.is_array() || versions.empty()) {
        throw record_error("versions must be a non-empty array");
    }
    for (const auto& v : versions) {
        r.versions.push_back(version_from_json(v));
    }
    std::vector<semver::Version> seen;
    for (const auto& v : r.versions) {
        if (std::find(seen.begin(), seen.end(), v.num) != seen.end()) {
            throw record_error("duplicate version " + v.num.to_string());
        }
        seen.push_back(v.num);
    }
    auto newest = version_field(r.newest_version, "newest_version");
    if (std::find(seen.begin(), seen.end(), newest) == seen.end()) {
        throw record_error("newest_version " + r.newest_version + " is not among versions");
    }
    if (!r.max_version.empty()) {
        version_field(r.max_version, "max_version");
    }
    if (!r.max_stable_version.empty()) {
        version_field(r.max_stable_version, "max_stable_version");
    }
    return r;
}

inline json to_json(const DependencyDecl& d) {
    return json{{"target_name", d.target_name},
                {"requirement", d.requirement.source()},
                {"kind", to_string(d.kind)},
                {"optional", d.optional},
                {"default_features", d.default_features},
                {"features", d.features}};
}

inline json to_json(const VersionRecord& v) {
    json deps = json::array();
    for (const auto& d : v.dependencies) {
        deps.push_back(to_json(d));
    }
    json features = json::object();
    for (const auto& [k, list] : v.features) {
        features[k] = list;
    }
    return json{{"num", v.num.to_string()}, {"yanked", v.yanked}, {"features", features}, {"dependencies", deps}};
}

inline json to_json(const LibraryRecord& r) {
    json versions = json::array();
    for (const auto& v : r.versions) {
        versions.push_back(to_json(v));
    }
    return json{{"id", r.id},
                {"name", r.name},
                {"created_at", r.created_at},
                {"updated_at", r.updated_at},
                {"description", r.description},
                {"downloads", r.downloads},
                {"recent_downloads", r.recent_downloads},
                {"max_version", r.max_version},
                {"max_stable_version", r.max_stable_version},
                {"newest_version", r.newest_version},
                {"versions", versions}};
}

inline Advisory advisory_from_json(const json& j) {
    using namespace detail;
    if (!j.is_object()) {
        throw record_error("record must be a JSON object");
    }
    const auto& id = field(j, "databaseId");
    if (!id.is_number_integer()) {
        throw record_error("field 'databaseId' must be an integer");
    }
    auto value = string_field(j, "value");
    if (!is_cve_id(value)) {
        throw record_error("value '" + value + "' is not a CVE identifier");
    }
    auto severity_text = string_field(j, "severity");
    std::transform(severity_text.begin(), severity_text.end(), severity_text.begin(),
                   [](unsigned char c) { return char(std::toupper(c)); });
    std::optional<Severity> severity;
    for (auto s : all_severities) {
        if (to_string(s) == severity_text) {
            severity = s;
        }
    }
    if (!severity) {
        throw record_error("unknown severity '" + severity_text + "'");
    }
    const auto& cvss = field(j, "cvss");
    if (!cvss.is_number() || cvss.get<double>() < 0.0 || cvss.get<double>() > 10.0) {
        throw record_error("cvss must be a number in [0, 10]");
    }
    auto range = requirement_field(string_field(j, "vulnerableVersionRange"), "vulnerableVersionRange");
    Advisory a{.database_id = id.get<std::int64_t>(),
               .value = value,
               .severity = *severity,
               .cvss = cvss.get<double>(),
               .published_at = optional_string(j, "publishedAt"),
               .updated_at = optional_string(j, "updatedAt"),
               .summary = optional_string(j, "summary"),
               .vulnerable_version_range = std::move(range),
               .first_patched_version = std::nullopt,
               .ecosystem = optional_string(j, "ecosystem"),
               .package_name = string_field(j, "package_name"),
               .cwe_ids = std::nullopt};
    check_timestamp(a.published_at, "publishedAt");
    check_timestamp(a.updated_at, "updatedAt");
    if (a.package_name.empty()) {
        throw record_error("package_name is empty");
    }
    if (auto it = j.find("firstPatchedVersion"); it != j.end() && !it->is_null()) {
        std::string text;
        if (it->is_string()) {
            text = it->get<std::string>();
        } else if (it->is_object() && it->contains("identifier") && (*it)["identifier"].is_string()) {
            text = (*it)["identifier"].get<std::string>();
        } else {
            throw record_error("firstPatchedVersion must be null, a string or {identifier}");
        }
        version_field(text, "firstPatchedVersion");
        a.first_patched_version = text;
    }
    if (auto it = j.find("cwe_ids"); it != j.end() && !it->is_null()) {
        auto ids = string_list(*it, "cwe_ids");
        for (const auto& c : ids) {
            if (!is_cwe_id(c)) {
                throw record_error("'" + c + "' is not a CWE identifier");
            }
        }
        a.cwe_ids = std::move(ids);
    }
    return a;
}

inline json to_json(const Advisory& a) {
    json j{{"databaseId", a.database_id},
           {"value", a.value},
           {"severity", to_string(a.severity)},
           {"cvss", a.cvss},
           {"publishedAt", a.published_at},
           {"updatedAt", a.updated_at},
           {"summary", a.summary},
           {"vulnerableVersionRange", a.vulnerable_version_range.source()},
           {"firstPatchedVersion", a.first_patched_version ? json(*a.first_patched_version) : json(nullptr)},
           {"ecosystem", a.ecosystem},
           {"package_name", a.package_name}};
    if (a.cwe_ids) {
        j["cwe_ids"] = *a.cwe_ids;
    }
    return j;
}

/// Keys sorted, no insignificant whitespace.
inline std::string canonical_json(const json& j) { return j.dump(); }

inline std::string record_digest(const LibraryRecord& r) { return sha256_hex(canonical_json(to_json(r))); }
inline std::string record_digest(const Advisory& a) { return sha256_hex(canonical_json(to_json(a))); }

namespace detail {

template <typename T, typename FromJson, typename KeyOf>
LoadResult<T> parse_ndjson(std::string_view text, LoadMode mode, FromJson from_json, KeyOf key_of,
                           const char* key_label) {
    LoadResult<T> out;
    std::unordered_map<std::string, std::size_t> first_line;
    for (const auto& [number, line] : lines_of(text)) {
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            out.issues.push_back({number, {}, std::string("invalid JSON: ") + e.what()});
            continue;
        }
        std::string label;
        if (j.is_object()) {
            for (const char* k : {"name", "value"}) {
                if (auto it = j.find(k); it != j.end() && it->is_string()) {
                    label = it->get<std::string>();
                    break;
                }
            }
        }
        try {
            T record = from_json(j);
            std::string key = key_of(record);
            if (auto [it, fresh] = first_line.emplace(key, number); !fresh) {
                out.issues.push_back({number, label,
                                      std::string("duplicate ") + key_label + " '" + key + "' (first on line " +
                                          std::to_string(it->second) + ")"});
                continue;
            }
            out.records.push_back(std::move(record));
        } catch (const record_error& e) {
            out.issues.push_back({number, label, e.what()});
        } catch (const json::exception& e) {
            out.issues.push_back({number, label, e.what()});
        }
    }
    if (mode == LoadMode::strict && !out.issues.empty()) {
        throw validation_error(out.issues);
    }
    return out;
}

} // namespace detail

inline LoadResult<LibraryRecord> parse_registry(std::string_view text, LoadMode mode = LoadMode::strict) {
    return detail::parse_ndjson<LibraryRecord>(
        text, mode, library_from_json, [](const LibraryRecord& r) { return r.name; }, "library name");
}

inline LoadResult<Advisory> parse_advisories(std::string_view text, LoadMode mode = LoadMode::strict) {
    return detail::parse_ndjson<Advisory>(
        text, mode, advisory_from_json, [](const Advisory& a) { return std::to_string(a.database_id); },
        "databaseId");
}

/// Throws io_error if unreadable and validation_error in strict mode.
inline RegistrySnapshot load_registry(const std::filesystem::path& path, LoadMode mode = LoadMode::strict,
                                      std::vector<ValidationIssue>* issues = nullptr) {
    auto result = parse_registry(read_file(path), mode);
    if (issues) {
        *issues = std::move(result.issues);
    }
    return RegistrySnapshot{std::move(result.records)};
}

inline std::vector<Advisory> load_advisories(const std::filesystem::path& path, LoadMode mode = LoadMode::strict,
                                             std::vector<ValidationIssue>* issues = nullptr) {
    auto result = parse_advisories(read_file(path), mode);
    if (issues) {
        *issues = std::move(result.issues);
    }
    return std::move(result.records);
}

inline std::string serialize_registry(const RegistrySnapshot& snapshot) {
    std::string out;
    for (const auto& r : snapshot.libraries) {
        out += canonical_json(to_json(r));
        out += '\n';
    }
    return out;
}

inline std::string serialize_advisories(const std::vector<Advisory>& advisories) {
    std::string out;
    for (const auto& a : advisories) {
        out += canonical_json(to_json(a));
        out += '\n';
    }
    return out;
}

/// Record key to digest of its canonical JSON.
using RecordHashes = std::map<std::string, std::string>;

inline RecordHashes record_hashes(const RegistrySnapshot& snapshot) {
    RecordHashes out;
    for (const auto& r : snapshot.libraries) {
        out[r.name] = record_digest(r);
    }
    return out;
}

inline RecordHashes record_hashes(const std::vector<Advisory>& advisories) {
    RecordHashes out;
    for (const auto& a : advisories) {
        out[std::to_string(a.database_id)] = record_digest(a);
    }
    return out;
}

struct Changeset {
    std::vector<std::string> added;
    std::vector<std::string> modified;
    std::vector<std::string> removed;
    std::vector<std::string> added_advisories;
    std::vector<std::string> modified_advisories;
    std::vector<std::string> removed_advisories;
    std::string content_hash;

    bool empty() const noexcept {
        return added.empty() && modified.empty() && removed.empty() && added_advisories.empty() &&
               modified_advisories.empty() && removed_advisories.empty();
    }
};

inline json to_json(const Changeset& c) {
    return json{{"added", c.added},
                {"modified", c.modified},
                {"removed", c.removed},
                {"added_advisories", c.added_advisories},
                {"modified_advisories", c.modified_advisories},
                {"removed_advisories", c.removed_advisories},
                {"content_hash", c.content_hash}};
}

template <typename Snapshot>
struct UpdateResult {
    Changeset changes;
    Snapshot snapshot;
    RecordHashes hashes;
};

namespace detail {

/// Diff keyed records; unchanged records are carried over from `old`.
template <typename T, typename KeyOf>
std::vector<T> diff_records(const std::vector<T>& old, std::vector<T> fresh, const RecordHashes& old_hashes,
                            KeyOf key_of, std::vector<std::string>& added, std::vector<std::string>& modified,
                            std::vector<std::string>& removed, RecordHashes& new_hashes) {
    std::unordered_map<std::string, const T*> old_by_key;
    for (const auto& r : old) {
        old_by_key.emplace(key_of(r), &r);
    }
    std::vector<T> merged;
    merged.reserve(fresh.size());
    for (auto& r : fresh) {
        auto key = key_of(r);
        auto digest = record_digest(r);
        new_hashes[key] = digest;
        auto known = old_hashes.find(key);
        if (known == old_hashes.end()) {
            added.push_back(key);
            merged.push_back(std::move(r));
        } else if (known->second != digest) {
            modified.push_back(key);
            merged.push_back(std::move(r));
        } else if (auto it = old_by_key.find(key); it != old_by_key.end()) {
            merged.push_back(*it->second);
        } else {
            merged.push_back(std::move(r));
        }
    }
    for (const auto& [key, digest] : old_hashes) {
        if (!new_hashes.count(key)) {
            removed.push_back(key);
        }
    }
    std::sort(added.begin(), added.end());
    std::sort(modified.begin(), modified.end());
    return merged;
}

} // namespace detail

/// Compares a freshly fetched registry feed against the stored hash table.
/// A feed that fails validation aborts the update by throwing; `old` is never touched.
inline UpdateResult<RegistrySnapshot> incremental_update(const RegistrySnapshot& old, std::string_view new_raw,
                                                         const RecordHashes& old_hashes) {
    auto fresh = parse_registry(new_raw, LoadMode::strict);
    UpdateResult<RegistrySnapshot> out;
    out.changes.content_hash = sha256_hex(new_raw);
    out.snapshot.libraries = detail::diff_records(
        old.libraries, std::move(fresh.records), old_hashes, [](const LibraryRecord& r) { return r.name; },
        out.changes.added, out.changes.modified, out.changes.removed, out.hashes);
    return out;
}

inline UpdateResult<std::vector<Advisory>> incremental_update_advisories(const std::vector<Advisory>& old,
                                                                         std::string_view new_raw,
                                                                         const RecordHashes& old_hashes) {
    auto fresh = parse_advisories(new_raw, LoadMode::strict);
    UpdateResult<std::vector<Advisory>> out;
    out.changes.content_hash = sha256_hex(new_raw);
    out.snapshot = detail::diff_records(
        old, std::move(fresh.records), old_hashes, [](const Advisory& a) { return std::to_string(a.database_id); },
        out.changes.added_advisories, out.changes.modified_advisories, out.changes.removed_advisories, out.hashes);
    return out;
}

// ---------------------------------------------------------------------------
// Lockfiles

struct LockEntry {
    std::string name;
    semver::Version version;

    friend bool operator==(const LockEntry&, const LockEntry&) = default;
};

class lockfile_error : public std::runtime_error {
    std::size_t _stanza;

public:
    lockfile_error(std::size_t stanza, const std::string& what)
        : std::runtime_error("lockfile [[package]] #" + std::to_string(stanza) + ": " + what), _stanza(stanza) {}

    /// 1-based index of the offending [[package]] stanza.
    std::size_t stanza() const noexcept { return _stanza; }
};

/// Reads `name` and `version` from each [[package]] stanza; other keys and
/// tables are skipped.
inline std::vector<LockEntry> parse_lockfile_text(std::string_view text) {
    std::vector<LockEntry> out;
    std::size_t stanza = 0;
    bool in_package = false;
    std::optional<std::string> name;
    std::optional<std::string> version;

    auto finish = [&] {
        if (!in_package) {
            return;
        }
        if (!name) {
            throw lockfile_error(stanza, "missing name");
        }
        if (!version) {
            throw lockfile_error(stanza, "missing version");
        }
        try {
            out.push_back({*name, semver::parse_version(*version)});
        } catch (const semver::parse_error& e) {
            throw lockfile_error(stanza, std::string("bad version: ") + e.what());
        }
        in_package = false;
    };

    auto unquote = [&](std::string_view v) -> std::optional<std::string> {
        if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
            return std::string(v.substr(1, v.size() - 2));
        }
        return std::nullopt;
    };

    for (const auto& [number, raw] : detail::lines_of(text)) {
        std::string_view line = semver::detail::trim(raw);
        if (line.starts_with('#')) {
            continue;
        }
        if (line.starts_with('[')) {
            finish();
            if (line == "[[package]]") {
                ++stanza;
                in_package = true;
                name.reset();
                version.reset();
            }
            continue;
        }
        if (!in_package) {
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            continue;
        }
        auto key = semver::detail::trim(line.substr(0, eq));
        auto value = semver::detail::trim(line.substr(eq + 1));
        if (key == "name" || key == "version") {
            auto s = unquote(value);
            if (!s) {
                throw lockfile_error(stanza, std::string(key) + " must be a quoted string");
            }
            (key == "name" ? name : version) = *s;
        }
    }
    finish();
    return out;
}

inline std::vector<LockEntry> parse_lockfile(const std::filesystem::path& path) {
    return parse_lockfile_text(read_file(path));
}

} // namespace vulngraph::ingest
