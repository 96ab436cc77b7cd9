#pragma once

/**
 * @file stats.hpp
 * @brief Descriptive statistics over advisories and the graph.
 *
 * Every fraction with an empty denominator is reported as 0.
 */

#include <vulngraph/common.hpp>
#include <vulngraph/graph.hpp>
#include <vulngraph/ingest.hpp>
#include <vulngraph/propagate.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace vulngraph::stats {

using graph::KnowledgeGraph;
using ingest::Advisory;
using ingest::Severity;

inline double ratio(std::size_t num, std::size_t den) { return den ? double(num) / double(den) : 0.0; }

struct SeverityDistribution {
    std::array<std::size_t, 4> counts{};
    std::array<double, 4> fractions{};
    std::size_t total = 0;
    bool empty = true;

    double of(Severity s) const { return fractions[std::size_t(s)]; }
};

inline SeverityDistribution severity_distribution(const std::vector<Advisory>& advisories) {
    SeverityDistribution d;
    for (const auto& a : advisories) {
        ++d.counts[std::size_t(a.severity)];
    }
    d.total = advisories.size();
    d.empty = d.total == 0;
    for (std::size_t i = 0; i < 4; ++i) {
        d.fractions[i] = ratio(d.counts[i], d.total);
    }
    return d;
}

struct HistogramBin {
    double lo;
    double hi;
    std::size_t count;
};

struct CvssHistogram {
    double bin_width = 1.0;
    std::vector<HistogramBin> bins;
    /// Extremes over non-zero scores; a 0.0 score means "not scored".
    std::optional<double> min;
    std::optional<double> max;
    std::size_t zero_scores = 0;
};

/// Bins of bin_width over [0, 10]; the last bin is closed so 10.0 lands in it.
inline CvssHistogram cvss_histogram(const std::vector<Advisory>& advisories, double bin_width) {
    if (!(bin_width > 0.0)) {
        throw std::invalid_argument("bin width must be positive");
    }
    CvssHistogram h;
    h.bin_width = bin_width;
    if (advisories.empty()) {
        return h;
    }
    auto n = std::size_t(std::ceil(10.0 / bin_width - 1e-9));
    for (std::size_t i = 0; i < n; ++i) {
        h.bins.push_back({double(i) * bin_width, std::min(10.0, double(i + 1) * bin_width), 0});
    }
    for (const auto& a : advisories) {
        auto idx = std::size_t(std::floor((a.cvss + 1e-9) / bin_width));
        ++h.bins[std::min(idx, n - 1)].count;
        if (a.cvss == 0.0) {
            ++h.zero_scores;
            continue;
        }
        h.min = h.min ? std::min(*h.min, a.cvss) : a.cvss;
        h.max = h.max ? std::max(*h.max, a.cvss) : a.cvss;
    }
    return h;
}

/// Short names for weakness classes common in advisories.
inline std::string cwe_description(const std::string& id) {
    static const std::map<std::string, std::string> names{
        {"CWE-20", "Improper Input Validation"},
        {"CWE-22", "Path Traversal"},
        {"CWE-77", "Command Injection"},
        {"CWE-79", "Cross-site Scripting"},
        {"CWE-119", "Improper Restriction of Operations within the Bounds of a Memory Buffer"},
        {"CWE-120", "Classic Buffer Overflow"},
        {"CWE-125", "Out-of-bounds Read"},
        {"CWE-134", "Use of Externally-Controlled Format String"},
        {"CWE-190", "Integer Overflow or Wraparound"},
        {"CWE-191", "Integer Underflow"},
        {"CWE-295", "Improper Certificate Validation"},
        {"CWE-362", "Race Condition"},
        {"CWE-400", "Uncontrolled Resource Consumption"},
        {"CWE-401", "Missing Release of Memory after Effective Lifetime"},
        {"CWE-415", "Double Free"},
        {"CWE-416", "Use After Free"},
        {"CWE-476", "NULL Pointer Dereference"},
        {"CWE-617", "Reachable Assertion"},
        {"CWE-662", "Improper Synchronization"},
        {"CWE-674", "Uncontrolled Recursion"},
        {"CWE-770", "Allocation of Resources Without Limits or Throttling"},
        {"CWE-787", "Out-of-bounds Write"},
        {"CWE-824", "Access of Uninitialized Pointer"},
        {"CWE-835", "Infinite Loop"},
        {"CWE-843", "Type Confusion"},
        {"CWE-908", "Use of Uninitialized Resource"},
    };
    auto it = names.find(id);
    return it == names.end() ? std::string() : it->second;
}

struct CweEntry {
    std::string id;
    std::string description;
    std::size_t count;

    friend bool operator==(const CweEntry&, const CweEntry&) = default;
};

using CweRanking = std::vector<CweEntry>;

inline unsigned long cwe_number(const std::string& id) { return std::stoul(id.substr(4)); }

/// Each CWE counts once per advisory that lists it. Advisories without CWE
/// data are skipped with a warning. Ties go to the lower CWE number.
inline CweRanking cwe_top_k(const std::vector<Advisory>& advisories, std::size_t k, Diagnostics* diag = nullptr) {
    std::map<std::string, std::size_t> counts;
    std::size_t missing = 0;
    for (const auto& a : advisories) {
        if (!a.cwe_ids) {
            ++missing;
            continue;
        }
        std::set<std::string> unique(a.cwe_ids->begin(), a.cwe_ids->end());
        for (const auto& id : unique) {
            ++counts[id];
        }
    }
    if (missing && diag) {
        diag->warn(std::to_string(missing) + " advisories carry no CWE data and were left out of the CWE ranking");
    }
    CweRanking out;
    for (const auto& [id, n] : counts) {
        out.push_back({id, cwe_description(id), n});
    }
    std::sort(out.begin(), out.end(), [](const CweEntry& a, const CweEntry& b) {
        if (a.count != b.count) {
            return a.count > b.count;
        }
        return cwe_number(a.id) < cwe_number(b.id);
    });
    if (out.size() > k) {
        out.resize(k);
    }
    return out;
}

inline double patchless_proportion(const std::vector<Advisory>& advisories) {
    std::size_t n = 0;
    for (const auto& a : advisories) {
        n += !a.first_patched_version.has_value();
    }
    return ratio(n, advisories.size());
}

struct LatestAffectedRow {
    std::string cve;
    std::string library;
    std::string range;
    std::string latest_version;
    std::string published_at;
};

struct LatestAffected {
    /// Libraries in the graph named by at least one advisory.
    std::size_t libraries_with_advisories = 0;
    std::size_t still_affected = 0;
    double fraction = 0.0;
    std::vector<std::string> affected_libraries;
    std::vector<LatestAffectedRow> rows;
};

namespace detail {

inline std::optional<semver::Version> newest_of(const KnowledgeGraph& g, graph::LibraryIndex li, Diagnostics* diag) {
    const auto& rec = g.library_record(li);
    std::optional<semver::Version> newest;
    try {
        newest = semver::parse_version(rec.newest_version);
    } catch (const semver::parse_error&) {
        if (diag) {
            diag->warn(rec.name + ": newest_version '" + rec.newest_version + "' does not parse");
        }
        return std::nullopt;
    }
    const auto& vs = g.library(li).versions;
    if (diag && !vs.empty() && g.version_num(vs.back()) != *newest) {
        diag->warn(rec.name + ": newest_version " + newest->to_string() + " differs from greatest listed version " +
                   g.version_num(vs.back()).to_string());
    }
    return newest;
}

} // namespace detail

/// Over libraries with at least one advisory, the share whose newest_version
/// still lies inside some advisory's vulnerable range. Membership is read
/// off the graph's version_affects edges and cross-checked against a direct
/// range evaluation.
inline LatestAffected latest_version_still_affected(const KnowledgeGraph& g, const std::vector<Advisory>& advisories,
                                                    Diagnostics* diag = nullptr) {
    std::map<std::int64_t, std::size_t> graph_advisory;
    for (std::size_t i = 0; i < g.advisories().size(); ++i) {
        graph_advisory.emplace(g.advisories()[i].database_id, i);
    }
    std::map<std::string, std::vector<const Advisory*>> by_library;
    for (const auto& a : advisories) {
        if (g.find_library(a.package_name)) {
            by_library[a.package_name].push_back(&a);
        }
    }

    LatestAffected out;
    out.libraries_with_advisories = by_library.size();
    for (const auto& [name, list] : by_library) {
        auto li = *g.find_library(name);
        auto newest = detail::newest_of(g, li, diag);
        if (!newest) {
            continue;
        }
        auto vi = g.find_version(name, *newest);
        bool any = false;
        for (const auto* a : list) {
            bool direct = semver::matches(a->vulnerable_version_range, *newest);
            bool via_edges = direct;
            auto it = graph_advisory.find(a->database_id);
            if (vi && it != graph_advisory.end() && g.advisories()[it->second] == *a) {
                const auto& targets = g.advisory_targets(it->second);
                via_edges = std::binary_search(targets.begin(), targets.end(), *vi);
            }
            if (via_edges != direct) {
                throw std::logic_error("version_affects edges disagree with range evaluation for " + a->value +
                                       " on " + name);
            }
            if (direct) {
                any = true;
                out.rows.push_back({a->value, name, a->vulnerable_version_range.source(), newest->to_string(),
                                    a->published_at});
            }
        }
        if (any) {
            ++out.still_affected;
            out.affected_libraries.push_back(name);
        }
    }
    out.fraction = ratio(out.still_affected, out.libraries_with_advisories);
    std::sort(out.rows.begin(), out.rows.end(), [](const LatestAffectedRow& a, const LatestAffectedRow& b) {
        return std::tie(a.published_at, a.cve, a.library) < std::tie(b.published_at, b.cve, b.library);
    });
    return out;
}

/// Among libraries whose newest version is still affected, the share whose
/// newest version is yanked.
inline double yanked_latest_affected(const KnowledgeGraph& g, const std::vector<Advisory>& advisories,
                                     Diagnostics* diag = nullptr) {
    auto latest = latest_version_still_affected(g, advisories, diag);
    std::size_t yanked = 0;
    for (const auto& name : latest.affected_libraries) {
        auto li = *g.find_library(name);
        auto newest = semver::parse_version(g.library_record(li).newest_version);
        if (auto vi = g.find_version(name, newest)) {
            yanked += g.version_record(*vi).yanked;
        }
    }
    return ratio(yanked, latest.affected_libraries.size());
}

// ---------------------------------------------------------------------------
// Rendering

inline nlohmann::ordered_json to_json(const SeverityDistribution& d) {
    nlohmann::ordered_json j;
    j["total"] = d.total;
    j["empty"] = d.empty;
    for (auto s : ingest::all_severities) {
        j["counts"][to_string(s)] = d.counts[std::size_t(s)];
    }
    for (auto s : ingest::all_severities) {
        j["fractions"][to_string(s)] = d.of(s);
    }
    return j;
}

inline nlohmann::ordered_json to_json(const CvssHistogram& h) {
    nlohmann::ordered_json j;
    j["bin_width"] = h.bin_width;
    auto bins = nlohmann::ordered_json::array();
    for (const auto& b : h.bins) {
        bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}});
    }
    j["bins"] = std::move(bins);
    j["min_nonzero"] = h.min ? nlohmann::ordered_json(*h.min) : nlohmann::ordered_json(nullptr);
    j["max_nonzero"] = h.max ? nlohmann::ordered_json(*h.max) : nlohmann::ordered_json(nullptr);
    j["zero_scores"] = h.zero_scores;
    return j;
}

inline nlohmann::ordered_json to_json(const CweRanking& r) {
    auto a = nlohmann::ordered_json::array();
    for (const auto& e : r) {
        a.push_back({{"cwe", e.id}, {"description", e.description}, {"count", e.count}});
    }
    return a;
}

inline nlohmann::ordered_json to_json(const LatestAffected& l) {
    nlohmann::ordered_json j;
    j["libraries_with_advisories"] = l.libraries_with_advisories;
    j["still_affected"] = l.still_affected;
    j["fraction"] = l.fraction;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : l.rows) {
        rows.push_back({{"cve", r.cve},
                        {"library", r.library},
                        {"range", r.range},
                        {"latest_version", r.latest_version},
                        {"published_at", r.published_at}});
    }
    j["rows"] = std::move(rows);
    return j;
}

/// Bar chart of the histogram as a standalone SVG document.
inline std::string histogram_svg(const CvssHistogram& h) {
    const int width = 640, height = 320, margin = 40;
    std::size_t peak = 1;
    for (const auto& b : h.bins) {
        peak = std::max(peak, b.count);
    }
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">CVSS score distribution</text>\n";
    double plot_w = width - 2 * margin, plot_h = height - 2 * margin;
    double bar_w = h.bins.empty() ? 0 : plot_w / double(h.bins.size());
    for (std::size_t i = 0; i < h.bins.size(); ++i) {
        double bh = plot_h * double(h.bins[i].count) / double(peak);
        double x = margin + bar_w * double(i);
        double y = margin + plot_h - bh;
        svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << std::max(0.0, bar_w - 2) << "\" height=\"" << bh
            << "\" fill=\"#4a6fa5\"><title>[" << h.bins[i].lo << ", " << h.bins[i].hi << "): " << h.bins[i].count
            << "</title></rect>\n";
        svg << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << height - margin + 14
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << h.bins[i].lo << "</text>\n";
    }
    svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    svg << "</svg>\n";
    return svg.str();
}

struct Report {
    SeverityDistribution severity;
    CvssHistogram cvss;
    CweRanking cwe;
    double patchless = 0.0;
    LatestAffected latest;
    double yanked_latest = 0.0;
    bool empty = true;
};

inline Report compute_report(const KnowledgeGraph& g, const std::vector<Advisory>& advisories, double bin_width = 1.0,
                             std::size_t top_k = 10, Diagnostics* diag = nullptr) {
    Report r;
    r.severity = severity_distribution(advisories);
    r.cvss = cvss_histogram(advisories, bin_width);
    r.cwe = cwe_top_k(advisories, top_k, diag);
    r.patchless = patchless_proportion(advisories);
    r.latest = latest_version_still_affected(g, advisories, diag);
    r.yanked_latest = yanked_latest_affected(g, advisories);
    r.empty = advisories.empty();
    return r;
}

inline nlohmann::ordered_json to_json(const Report& r) {
    nlohmann::ordered_json j;
    j["empty"] = r.empty;
    j["severity"] = to_json(r.severity);
    j["cvss"] = to_json(r.cvss);
    j["cwe_top"] = to_json(r.cwe);
    j["patchless_proportion"] = r.patchless;
    j["latest_version_still_affected"] = to_json(r.latest);
    j["yanked_latest_affected"] = r.yanked_latest;
    return j;
}

inline std::string format_fraction(double x) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << x;
    return s.str();
}

inline std::string to_text(const Report& r) {
    std::ostringstream out;
    out << "Severity (" << r.severity.total << " advisories)\n";
    std::vector<std::vector<std::string>> sev{{"Class", "Count", "Fraction"}};
    for (auto s : ingest::all_severities) {
        sev.push_back({to_string(s), std::to_string(r.severity.counts[std::size_t(s)]), format_fraction(r.severity.of(s))});
    }
    out << propagate::aligned_table(sev) << '\n';

    out << "CVSS";
    if (r.cvss.min && r.cvss.max) {
        out << " (non-zero scores span [" << *r.cvss.min << ", " << *r.cvss.max << "])";
    }
    out << '\n';
    std::vector<std::vector<std::string>> bins{{"Bin", "Count"}};
    for (const auto& b : r.cvss.bins) {
        std::ostringstream label;
        label << '[' << b.lo << ", " << b.hi << (b.hi >= 10.0 ? "]" : ")");
        bins.push_back({label.str(), std::to_string(b.count)});
    }
    out << propagate::aligned_table(bins) << '\n';

    out << "Top CWE\n";
    std::vector<std::vector<std::string>> cwe{{"CWE", "Description", "Count"}};
    for (const auto& e : r.cwe) {
        cwe.push_back({e.id, e.description, std::to_string(e.count)});
    }
    out << propagate::aligned_table(cwe) << '\n';

    out << "Without patch: " << format_fraction(r.patchless) << '\n';
    out << "Latest version still affected: " << format_fraction(r.latest.fraction) << " (" << r.latest.still_affected
        << "/" << r.latest.libraries_with_advisories << ")\n";
    std::vector<std::vector<std::string>> rows{{"CVE", "Library", "Range", "Latest", "Published"}};
    for (const auto& row : r.latest.rows) {
        rows.push_back({row.cve, row.library, row.range, row.latest_version, row.published_at});
    }
    out << propagate::aligned_table(rows);
    out << "Yanked among still-affected latest versions: " << format_fraction(r.yanked_latest) << '\n';
    return out.str();
}

} // namespace vulngraph::stats
