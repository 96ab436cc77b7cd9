#pragma once

/**
 * @file semver.hpp
 * @brief Versions and version requirements under Cargo's compatibility rules.
 *
 * A bare requirement such as "1.0.16" is a caret requirement: it admits every
 * version that is semver-compatible with 1.0.16, i.e. [1.0.16, 2.0.0).
 * Compatibility is decided by the leftmost non-zero component, so "0.0.16"
 * admits only [0.0.16, 0.0.17).
 *
 * ```cpp
 * auto req = vulngraph::semver::parse_requirement(">=1.3, <1.5");
 * auto v = vulngraph::semver::parse_version("1.4.2");
 * bool ok = vulngraph::semver::matches(req, v);  // true
 * ```
 */

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace vulngraph::semver {

/// Raised for malformed version or requirement text. Carries the offending span.
class parse_error : public std::runtime_error {
    std::string _input;
    std::size_t _offset;
    std::size_t _length;

public:
    parse_error(std::string_view input, std::size_t offset, std::size_t length, const std::string& what)
        : std::runtime_error(what + " at offset " + std::to_string(offset) + " in \"" + std::string(input) + "\"")
        , _input(input)
        , _offset(offset)
        , _length(length) {}

    const std::string& input() const noexcept { return _input; }
    std::size_t offset() const noexcept { return _offset; }
    std::size_t length() const noexcept { return _length; }
    std::string_view span() const noexcept {
        return std::string_view(_input).substr(std::min(_offset, _input.size()), _length);
    }
};

/// One dot-separated prerelease identifier.
struct Identifier {
    std::string text;
    bool numeric = false;

    static Identifier number(std::uint64_t n) { return {std::to_string(n), true}; }

    friend bool operator==(const Identifier&, const Identifier&) = default;

    friend std::strong_ordering operator<=>(const Identifier& a, const Identifier& b) {
        if (a.numeric && b.numeric) {
            // No leading zeros, so length orders first.
            if (auto c = a.text.size() <=> b.text.size(); c != 0) {
                return c;
            }
            return a.text.compare(b.text) <=> 0;
        }
        if (a.numeric != b.numeric) {
            return a.numeric ? std::strong_ordering::less : std::strong_ordering::greater;
        }
        return a.text.compare(b.text) <=> 0;
    }
};

using Prerelease = std::vector<Identifier>;

/// Orders prerelease tags; an empty tag (a release) is above every non-empty one.
inline std::strong_ordering compare_prerelease(const Prerelease& a, const Prerelease& b) {
    if (a.empty() || b.empty()) {
        return a.empty() <=> b.empty();
    }
    return std::lexicographical_compare_three_way(a.begin(), a.end(), b.begin(), b.end());
}

struct Version {
    std::uint64_t major = 0;
    std::uint64_t minor = 0;
    std::uint64_t patch = 0;
    Prerelease pre;
    /// Preserved for rendering, ignored by comparison.
    std::string build;

    Version() = default;
    Version(std::uint64_t ma, std::uint64_t mi, std::uint64_t pa, Prerelease p = {}, std::string b = {})
        : major(ma), minor(mi), patch(pa), pre(std::move(p)), build(std::move(b)) {}

    bool is_prerelease() const noexcept { return !pre.empty(); }
    auto triple() const noexcept { return std::tuple{major, minor, patch}; }

    /// The least version sharing this major.minor.patch (X.Y.Z-0).
    Version floor() const { return Version(major, minor, patch, {Identifier::number(0)}); }
    bool is_floor() const noexcept { return pre.size() == 1 && pre.front().numeric && pre.front().text == "0"; }

    std::string to_string() const {
        std::string out = std::to_string(major) + '.' + std::to_string(minor) + '.' + std::to_string(patch);
        for (std::size_t i = 0; i < pre.size(); ++i) {
            out += (i == 0 ? '-' : '.');
            out += pre[i].text;
        }
        if (!build.empty()) {
            out += '+';
            out += build;
        }
        return out;
    }

    friend bool operator==(const Version& a, const Version& b) {
        return a.triple() == b.triple() && a.pre == b.pre;
    }

    friend std::strong_ordering operator<=>(const Version& a, const Version& b) {
        if (auto c = a.triple() <=> b.triple(); c != 0) {
            return c;
        }
        return compare_prerelease(a.pre, b.pre);
    }
};

enum class Op { caret, tilde, wildcard, exact, greater, greater_eq, less, less_eq };

/// A single clause of a requirement, over a partial version of 0-3 components.
struct Comparator {
    Op op = Op::caret;
    std::uint64_t major = 0;
    std::optional<std::uint64_t> minor;
    std::optional<std::uint64_t> patch;
    Prerelease pre;
    /// Only for wildcard "*": no numeric component at all.
    bool any = false;

    int components() const noexcept { return any ? 0 : 1 + int(minor.has_value()) + int(patch.has_value()); }
    bool full() const noexcept { return components() == 3; }
    Version base() const { return Version(major, minor.value_or(0), patch.value_or(0), pre); }

    std::string to_string() const;

    friend bool operator==(const Comparator&, const Comparator&) = default;
};

class Requirement {
    std::vector<Comparator> _comparators;
    std::string _source;

public:
    Requirement(std::vector<Comparator> comparators, std::string source)
        : _comparators(std::move(comparators)), _source(std::move(source)) {
        if (_comparators.empty()) {
            throw std::invalid_argument("requirement needs at least one comparator");
        }
    }

    const std::vector<Comparator>& comparators() const noexcept { return _comparators; }
    /// The text the requirement was parsed from, verbatim.
    const std::string& source() const noexcept { return _source; }
    /// Canonical rendering of the comparator list.
    std::string to_string() const {
        std::string out;
        for (const auto& c : _comparators) {
            if (!out.empty()) {
                out += ", ";
            }
            out += c.to_string();
        }
        return out;
    }

    friend bool operator==(const Requirement& a, const Requirement& b) { return a._comparators == b._comparators; }
};

struct Bound {
    Version version;
    bool inclusive = true;

    friend bool operator==(const Bound&, const Bound&) = default;
};

/// A non-empty, possibly unbounded, interval of the version order.
class Interval {
    std::optional<Bound> _lower;
    std::optional<Bound> _upper;

    Interval(std::optional<Bound> lo, std::optional<Bound> hi) : _lower(std::move(lo)), _upper(std::move(hi)) {}

public:
    static bool is_empty(const std::optional<Bound>& lo, const std::optional<Bound>& hi) {
        if (!lo || !hi) {
            return false;
        }
        auto c = lo->version <=> hi->version;
        return c > 0 || (c == 0 && !(lo->inclusive && hi->inclusive));
    }

    /// Throws std::invalid_argument when the bounds describe an empty set.
    static Interval create(std::optional<Bound> lo, std::optional<Bound> hi) {
        if (is_empty(lo, hi)) {
            throw std::invalid_argument("empty version interval");
        }
        return Interval(std::move(lo), std::move(hi));
    }

    static std::optional<Interval> try_create(std::optional<Bound> lo, std::optional<Bound> hi) {
        if (is_empty(lo, hi)) {
            return std::nullopt;
        }
        return Interval(std::move(lo), std::move(hi));
    }

    static Interval everything() { return Interval(std::nullopt, std::nullopt); }

    const std::optional<Bound>& lower() const noexcept { return _lower; }
    const std::optional<Bound>& upper() const noexcept { return _upper; }

    bool contains(const Version& v) const {
        if (_lower) {
            auto c = v <=> _lower->version;
            if (c < 0 || (c == 0 && !_lower->inclusive)) {
                return false;
            }
        }
        if (_upper) {
            auto c = v <=> _upper->version;
            if (c > 0 || (c == 0 && !_upper->inclusive)) {
                return false;
            }
        }
        return true;
    }

    /// Renders as ">=1.0.16, <2.0.0". X.Y.Z-0 bounds print as X.Y.Z.
    std::string to_string() const {
        auto show = [](const Version& v) {
            if (v.is_floor()) {
                return Version(v.major, v.minor, v.patch).to_string();
            }
            return v.to_string();
        };
        if (_lower && _upper && _lower->inclusive && _upper->inclusive && _lower->version == _upper->version) {
            return "=" + _lower->version.to_string();
        }
        std::string out;
        if (_lower) {
            out += (_lower->inclusive ? ">=" : ">") + show(_lower->version);
        }
        if (_upper) {
            if (!out.empty()) {
                out += ", ";
            }
            out += (_upper->inclusive ? "<=" : "<") + show(_upper->version);
        }
        return out.empty() ? "*" : out;
    }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Interval form of a requirement. Prerelease versions are admitted only on
/// the triples listed in `prerelease_triples`.
struct NormalizedRequirement {
    std::vector<Interval> intervals;
    std::vector<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>> prerelease_triples;
    bool unsatisfiable = false;

    bool contains(const Version& v) const {
        if (v.is_prerelease() &&
            std::find(prerelease_triples.begin(), prerelease_triples.end(), v.triple()) == prerelease_triples.end()) {
            return false;
        }
        return std::any_of(intervals.begin(), intervals.end(), [&](const Interval& i) { return i.contains(v); });
    }

    std::string to_string() const {
        if (unsatisfiable) {
            return "<unsatisfiable>";
        }
        std::string out;
        for (const auto& i : intervals) {
            if (!out.empty()) {
                out += " || ";
            }
            out += i.to_string();
        }
        return out;
    }
};

namespace detail {

constexpr std::uint64_t max_component = std::numeric_limits<std::uint64_t>::max();

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_ident_char(char c) {
    return is_digit(c) || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '-';
}

class Cursor {
public:
    Cursor(std::string_view text, std::size_t base = 0, std::string_view whole = {})
        : _text(text), _base(base), _whole(whole.empty() ? text : whole) {}

    bool done() const { return _pos >= _text.size(); }
    char peek() const { return done() ? '\0' : _text[_pos]; }
    std::size_t pos() const { return _pos; }
    void advance(std::size_t n = 1) { _pos += n; }
    bool consume(char c) {
        if (peek() == c) {
            ++_pos;
            return true;
        }
        return false;
    }
    bool consume(std::string_view s) {
        if (_text.substr(_pos).starts_with(s)) {
            _pos += s.size();
            return true;
        }
        return false;
    }
    void skip_spaces() {
        while (!done() && (peek() == ' ' || peek() == '\t')) {
            ++_pos;
        }
    }

    [[noreturn]] void fail(const std::string& what, std::size_t at, std::size_t len = 1) const {
        throw parse_error(_whole, _base + at, len, what);
    }
    [[noreturn]] void fail(const std::string& what) const { fail(what, _pos, 1); }

    std::uint64_t number() {
        std::size_t start = _pos;
        while (!done() && is_digit(peek())) {
            ++_pos;
        }
        if (start == _pos) {
            fail("expected a number", start);
        }
        auto digits = _text.substr(start, _pos - start);
        if (digits.size() > 1 && digits.front() == '0') {
            fail("leading zero in numeric component", start, digits.size());
        }
        std::uint64_t value = 0;
        for (char c : digits) {
            std::uint64_t d = std::uint64_t(c - '0');
            if (value > (max_component - d) / 10) {
                fail("numeric component overflows 64 bits", start, digits.size());
            }
            value = value * 10 + d;
        }
        return value;
    }

    Prerelease prerelease() {
        Prerelease out;
        do {
            std::size_t start = _pos;
            while (!done() && is_ident_char(peek())) {
                ++_pos;
            }
            auto ident = _text.substr(start, _pos - start);
            if (ident.empty()) {
                fail("empty prerelease identifier", start);
            }
            bool numeric = std::all_of(ident.begin(), ident.end(), is_digit);
            if (numeric && ident.size() > 1 && ident.front() == '0') {
                fail("leading zero in numeric prerelease identifier", start, ident.size());
            }
            out.push_back({std::string(ident), numeric});
        } while (consume('.'));
        return out;
    }

    std::string build() {
        std::size_t start = _pos;
        do {
            std::size_t part = _pos;
            while (!done() && is_ident_char(peek())) {
                ++_pos;
            }
            if (part == _pos) {
                fail("empty build identifier", part);
            }
        } while (consume('.'));
        return std::string(_text.substr(start, _pos - start));
    }

private:
    std::string_view _text;
    std::size_t _pos = 0;
    std::size_t _base;
    std::string_view _whole;
};

inline std::string_view trim(std::string_view s, std::size_t* offset = nullptr) {
    std::size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) {
        ++b;
    }
    std::size_t e = s.size();
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) {
        --e;
    }
    if (offset) {
        *offset = b;
    }
    return s.substr(b, e - b);
}

inline bool is_wild(char c) { return c == '*' || c == 'x' || c == 'X'; }

inline Comparator parse_comparator(std::string_view whole, std::string_view clause, std::size_t base) {
    Cursor cur(clause, base, whole);
    Comparator cmp;
    bool explicit_op = true;
    if (cur.consume(">=")) {
        cmp.op = Op::greater_eq;
    } else if (cur.consume("<=")) {
        cmp.op = Op::less_eq;
    } else if (cur.consume('>')) {
        cmp.op = Op::greater;
    } else if (cur.consume('<')) {
        cmp.op = Op::less;
    } else if (cur.consume('=')) {
        cmp.op = Op::exact;
    } else if (cur.consume('^')) {
        cmp.op = Op::caret;
    } else if (cur.consume('~')) {
        cmp.op = Op::tilde;
    } else if (is_digit(cur.peek()) || is_wild(cur.peek())) {
        cmp.op = Op::caret;
        explicit_op = false;
    } else {
        cur.fail("unknown operator");
    }
    cur.skip_spaces();

    std::size_t version_start = cur.pos();
    std::vector<std::optional<std::uint64_t>> parts;  // nullopt marks a wildcard
    do {
        if (parts.size() == 3) {
            cur.fail("more than three numeric components", version_start, clause.size() - version_start);
        }
        if (is_wild(cur.peek())) {
            cur.advance();
            parts.push_back(std::nullopt);
        } else {
            if (!parts.empty() && !parts.back()) {
                cur.fail("numeric component after wildcard");
            }
            parts.push_back(cur.number());
        }
    } while (cur.consume('.'));

    bool wildcard = std::any_of(parts.begin(), parts.end(), [](const auto& p) { return !p; });
    if (wildcard) {
        if (explicit_op && cmp.op != Op::exact) {
            cur.fail("wildcard is not allowed after this operator", version_start);
        }
        cmp.op = Op::wildcard;
        if (!parts.front()) {
            cmp.any = true;
        } else {
            cmp.major = *parts[0];
            if (parts.size() > 1 && parts[1]) {
                cmp.minor = *parts[1];
            }
        }
    } else {
        cmp.major = *parts[0];
        if (parts.size() > 1) {
            cmp.minor = parts[1];
        }
        if (parts.size() > 2) {
            cmp.patch = parts[2];
        }
    }

    if (cur.consume('-')) {
        if (!cmp.full() || wildcard) {
            cur.fail("prerelease requires a full major.minor.patch version", cur.pos() - 1);
        }
        cmp.pre = cur.prerelease();
    }
    if (cur.consume('+')) {
        cur.build();  // accepted and ignored
    }
    cur.skip_spaces();
    if (!cur.done()) {
        cur.fail("unexpected character", cur.pos());
    }
    return cmp;
}

/// X.Y.Z-0 of the next major/minor/patch, carrying on overflow; nullopt past the top.
inline std::optional<Version> next_floor(std::uint64_t major, std::uint64_t minor, std::uint64_t patch, int level) {
    if (level >= 2 && patch != max_component) {
        return Version(major, minor, patch + 1).floor();
    }
    if (level >= 1 && minor != max_component) {
        return Version(major, minor + 1, 0).floor();
    }
    if (major != max_component) {
        return Version(major + 1, 0, 0).floor();
    }
    return std::nullopt;
}

/// Least version strictly above v.
inline std::optional<Version> successor(const Version& v) {
    if (v.is_prerelease()) {
        Version next(v.major, v.minor, v.patch, v.pre);
        next.pre.push_back(Identifier::number(0));
        return next;
    }
    return next_floor(v.major, v.minor, v.patch, 2);
}

struct Span {
    std::optional<Bound> lower;
    std::optional<Bound> upper;
    bool empty = false;
};

inline Span incl_from(std::optional<Version> lo) {
    if (!lo) {
        return {std::nullopt, std::nullopt, true};
    }
    return {Bound{*lo, true}, std::nullopt};
}

inline std::optional<Bound> excl(std::optional<Version> v) {
    if (!v) {
        return std::nullopt;
    }
    return Bound{*v, false};
}

/// Interval denoted by one comparator, ignoring the prerelease gate.
inline Span comparator_span(const Comparator& c) {
    const int n = c.components();
    const std::uint64_t mi = c.minor.value_or(0);
    const std::uint64_t pa = c.patch.value_or(0);
    auto prefix_floor = [&] { return Version(c.major, mi, pa).floor(); };
    // Least version above every version sharing the comparator's prefix.
    auto past_prefix = [&] { return next_floor(c.major, mi, pa, n - 1); };

    if (n == 0) {
        return {};
    }
    switch (c.op) {
    case Op::exact:
    case Op::wildcard:
        if (n == 3) {
            return {Bound{c.base(), true}, Bound{c.base(), true}};
        }
        return {Bound{prefix_floor(), true}, excl(past_prefix())};
    case Op::greater:
        return incl_from(n == 3 ? successor(c.base()) : past_prefix());
    case Op::greater_eq:
        return {Bound{n == 3 ? c.base() : prefix_floor(), true}, std::nullopt};
    case Op::less:
        return {std::nullopt, Bound{n == 3 ? c.base() : prefix_floor(), false}};
    case Op::less_eq:
        if (n == 3) {
            return {std::nullopt, Bound{c.base(), true}};
        }
        if (auto up = past_prefix()) {
            return {std::nullopt, Bound{*up, false}};
        }
        return {};
    case Op::tilde: {
        Version lo = n == 3 ? c.base() : prefix_floor();
        return {Bound{lo, true}, excl(next_floor(c.major, mi, pa, n >= 2 ? 1 : 0))};
    }
    case Op::caret: {
        Version lo = n == 3 ? c.base() : prefix_floor();
        int level = 0;
        if (c.major == 0 && n >= 2) {
            level = (mi == 0 && n == 3) ? 2 : 1;
        }
        return {Bound{lo, true}, excl(next_floor(c.major, mi, pa, level))};
    }
    }
    return {};
}

/// Whether v agrees with the comparator's components, -1/0/1 style.
inline int prefix_compare(const Comparator& c, const Version& v) {
    auto cmp = [](std::uint64_t a, std::uint64_t b) { return a < b ? -1 : (a > b ? 1 : 0); };
    if (int r = cmp(v.major, c.major); r != 0 || !c.minor) {
        return r;
    }
    if (int r = cmp(v.minor, *c.minor); r != 0 || !c.patch) {
        return r;
    }
    return cmp(v.patch, *c.patch);
}

/// Component-wise evaluation of one comparator, without the prerelease gate.
inline bool comparator_admits(const Comparator& c, const Version& v) {
    if (c.any) {
        return true;
    }
    const bool full = c.full();
    const int prefix = prefix_compare(c, v);
    switch (c.op) {
    case Op::exact:
    case Op::wildcard:
        return full ? v == c.base() : prefix == 0;
    case Op::greater:
        return full ? v > c.base() : prefix > 0;
    case Op::greater_eq:
        return full ? v >= c.base() : prefix >= 0;
    case Op::less:
        return full ? v < c.base() : prefix < 0;
    case Op::less_eq:
        return full ? v <= c.base() : prefix <= 0;
    case Op::tilde:
        if (v.major != c.major || (c.minor && v.minor != *c.minor)) {
            return false;
        }
        return !full || v >= c.base();
    case Op::caret:
        if (v.major != c.major) {
            return false;
        }
        if (!c.minor) {
            return true;
        }
        if (!full) {
            return c.major > 0 ? v.minor >= *c.minor : v.minor == *c.minor;
        }
        if (c.major == 0) {
            if (v.minor != *c.minor) {
                return false;
            }
            if (*c.minor == 0 && v.patch != *c.patch) {
                return false;
            }
        }
        return v >= c.base();
    }
    return false;
}

inline bool names_prerelease_of(const Comparator& c, const Version& v) {
    return c.full() && !c.pre.empty() && c.major == v.major && c.minor == v.minor && c.patch == v.patch;
}

} // namespace detail

inline std::string Comparator::to_string() const {
    if (any) {
        return "*";
    }
    std::string core = std::to_string(major);
    if (minor) {
        core += '.' + std::to_string(*minor);
    }
    if (patch) {
        core += '.' + std::to_string(*patch);
    }
    for (std::size_t i = 0; i < pre.size(); ++i) {
        core += (i == 0 ? '-' : '.');
        core += pre[i].text;
    }
    switch (op) {
    case Op::caret: return "^" + core;
    case Op::tilde: return "~" + core;
    case Op::wildcard: return core + ".*";
    case Op::exact: return "=" + core;
    case Op::greater: return ">" + core;
    case Op::greater_eq: return ">=" + core;
    case Op::less: return "<" + core;
    case Op::less_eq: return "<=" + core;
    }
    return core;
}

inline Version parse_version(std::string_view text) {
    if (text.empty()) {
        throw parse_error(text, 0, 0, "empty version");
    }
    detail::Cursor cur(text);
    Version v;
    v.major = cur.number();
    if (!cur.consume('.')) {
        cur.fail("expected '.' after major version");
    }
    v.minor = cur.number();
    if (!cur.consume('.')) {
        cur.fail("expected '.' after minor version");
    }
    v.patch = cur.number();
    if (cur.consume('-')) {
        v.pre = cur.prerelease();
    }
    if (cur.consume('+')) {
        v.build = cur.build();
    }
    if (!cur.done()) {
        cur.fail("unexpected character", cur.pos());
    }
    return v;
}

/// Comma-separated comparators. Bare partial versions become caret comparators.
inline Requirement parse_requirement(std::string_view text) {
    std::size_t lead = 0;
    if (detail::trim(text, &lead).empty()) {
        throw parse_error(text, 0, text.size(), "empty requirement");
    }
    std::vector<Comparator> comparators;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = text.find(',', start);
        std::string_view raw = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        std::size_t off = 0;
        std::string_view clause = detail::trim(raw, &off);
        if (clause.empty()) {
            throw parse_error(text, start, raw.size(), "empty comparator clause");
        }
        comparators.push_back(detail::parse_comparator(text, clause, start + off));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return Requirement(std::move(comparators), std::string(text));
}

inline NormalizedRequirement normalize_requirement(const Requirement& req) {
    NormalizedRequirement out;
    std::optional<Bound> lower;
    std::optional<Bound> upper;
    for (const auto& c : req.comparators()) {
        if (c.full() && !c.pre.empty()) {
            auto t = c.base().triple();
            if (std::find(out.prerelease_triples.begin(), out.prerelease_triples.end(), t) ==
                out.prerelease_triples.end()) {
                out.prerelease_triples.push_back(t);
            }
        }
        auto span = detail::comparator_span(c);
        if (span.empty) {
            out.unsatisfiable = true;
            continue;
        }
        if (span.lower && (!lower || span.lower->version > lower->version)) {
            lower = span.lower;  // lower bounds are always inclusive here
        }
        if (span.upper) {
            if (!upper || span.upper->version < upper->version ||
                (span.upper->version == upper->version && !span.upper->inclusive)) {
                upper = span.upper;
            }
        }
    }
    std::sort(out.prerelease_triples.begin(), out.prerelease_triples.end());
    if (out.unsatisfiable) {
        return out;
    }
    auto interval = Interval::try_create(lower, upper);
    if (!interval) {
        out.unsatisfiable = true;
        return out;
    }
    // Non-empty as an order interval, but it may hold only gated prereleases.
    auto least_release = lower ? std::optional<Version>(Version(lower->version.major, lower->version.minor,
                                                                lower->version.patch))
                               : std::optional<Version>(Version());
    bool has_member = interval->contains(*least_release);
    for (const auto& [ma, mi, pa] : out.prerelease_triples) {
        if (has_member) {
            break;
        }
        // Prereleases of a triple span [X.Y.Z-0, X.Y.Z).
        auto lo = Bound{Version(ma, mi, pa).floor(), true};
        if (lower && lower->version > lo.version) {
            lo = *lower;
        }
        auto hi = Bound{Version(ma, mi, pa), false};
        if (upper && (upper->version < hi.version || (upper->version == hi.version && !upper->inclusive))) {
            hi = *upper;
        }
        has_member = !Interval::is_empty(lo, hi);
    }
    if (!has_member) {
        out.unsatisfiable = true;
        return out;
    }
    out.intervals.push_back(std::move(*interval));
    return out;
}

/// True iff v satisfies every comparator. A prerelease version additionally
/// needs some comparator naming a prerelease of the same major.minor.patch.
inline bool matches(const Requirement& req, const Version& v) {
    const auto& cs = req.comparators();
    if (!std::all_of(cs.begin(), cs.end(), [&](const Comparator& c) { return detail::comparator_admits(c, v); })) {
        return false;
    }
    if (!v.is_prerelease()) {
        return true;
    }
    return std::any_of(cs.begin(), cs.end(), [&](const Comparator& c) { return detail::names_prerelease_of(c, v); });
}

/// Agreement up to and including the leftmost non-zero component of the
/// smaller version's triple (all three components when that triple is 0.0.0).
inline bool compatible(const Version& a, const Version& b) {
    const Version& low = (a <= b) ? a : b;
    if (a.major != b.major) {
        return false;
    }
    if (low.major != 0) {
        return true;
    }
    if (a.minor != b.minor) {
        return false;
    }
    if (low.minor != 0) {
        return true;
    }
    return a.patch == b.patch;
}

/// Key shared by all versions compatible with v: "1", "0.6" or "0.0.3".
inline std::string compatibility_bucket(const Version& v) {
    if (v.major != 0) {
        return std::to_string(v.major);
    }
    if (v.minor != 0) {
        return "0." + std::to_string(v.minor);
    }
    return "0.0." + std::to_string(v.patch);
}

struct Candidate {
    Version version;
    bool yanked = false;
};

/// Whether a yanked release may still be picked: only when pinned by "=".
inline bool pins_exactly(const Requirement& req, const Version& v) {
    return std::any_of(req.comparators().begin(), req.comparators().end(),
                       [&](const Comparator& c) { return c.op == Op::exact && c.full() && c.base() == v; });
}

inline bool selectable(const Requirement& req, const Version& v, bool yanked, bool allow_yanked) {
    if (yanked && !allow_yanked && !pins_exactly(req, v)) {
        return false;
    }
    return matches(req, v);
}

inline std::optional<Version> max_satisfying(std::span<const Candidate> candidates, const Requirement& req,
                                             bool allow_yanked = false) {
    const Candidate* best = nullptr;
    for (const auto& c : candidates) {
        if (selectable(req, c.version, c.yanked, allow_yanked) && (!best || c.version > best->version)) {
            best = &c;
        }
    }
    if (!best) {
        return std::nullopt;
    }
    return best->version;
}

} // namespace vulngraph::semver
