#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hetreg/errors.hpp"
#include "hetreg/grid_basis.hpp"
#include "hetreg/scale_model.hpp"

namespace hetreg {

#ifndef HETREG_VERSION
#define HETREG_VERSION "0.1.0"
#endif

inline constexpr std::string_view library_version = HETREG_VERSION;

/// Shortest text that parses back to the same double.
inline std::string format_exact(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Fixed significant digits for report columns.
inline std::string format_number(double v, int digits = 10) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

// ---------------------------------------------------------------------------
// Delimited tables

/// Header-labeled table preceded by a "# key = value" provenance block.
struct Table {
    std::vector<std::pair<std::string, std::string>> provenance;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void note(std::string key, std::string value) { provenance.emplace_back(std::move(key), std::move(value)); }

    void add_row(std::vector<std::string> row) {
        if (row.size() != columns.size()) {
            std::ostringstream os;
            os << "table row has " << row.size() << " fields, header has " << columns.size();
            throw dimension_error(os.str());
        }
        rows.push_back(std::move(row));
    }
};

inline void write_table(std::ostream& out, const Table& t, char delim = '\t') {
    for (const auto& [k, v] : t.provenance) out << "# " << k << " = " << v << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? std::string(1, delim) : "") << t.columns[i];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? std::string(1, delim) : "") << row[i];
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Signal files

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::optional<double> parse_double(std::string_view s) {
    const std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) return std::nullopt;
    return v;
}

// Fields split on whitespace, commas or tabs.
inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ' ' || c == '\t' || c == ',' || c == '\r') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

}  // namespace detail

/// Observations from single-column y or two-column (x, y) text. Blank lines
/// and lines starting with '#' are skipped; a first line that is not numeric
/// is taken as a header. With an x column, x_j must equal j/n within 1e-9.
inline Observations parse_signal(std::istream& in, const std::string& origin = "input") {
    std::string line;
    std::size_t line_no = 0, width = 0;
    bool header_allowed = true;
    std::vector<double> xs, ys;
    std::vector<std::size_t> lines;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto fields = detail::split_fields(t);
        std::vector<double> vals;
        bool numeric = true;
        for (const auto& f : fields) {
            const auto v = detail::parse_double(f);
            if (!v) {
                numeric = false;
                break;
            }
            vals.push_back(*v);
        }
        if (!numeric && header_allowed) {
            header_allowed = false;
            continue;
        }
        header_allowed = false;
        std::ostringstream where;
        where << origin << ":" << line_no << " (row " << ys.size() + 1 << ")";
        if (!numeric) throw config_error(where.str() + ": not a number");
        if (vals.size() != 1 && vals.size() != 2) throw config_error(where.str() + ": expected 1 or 2 columns");
        if (width == 0) width = vals.size();
        if (vals.size() != width) throw config_error(where.str() + ": column count changed");
        if (width == 2) xs.push_back(vals[0]);
        ys.push_back(vals.back());
        lines.push_back(line_no);
    }
    const std::size_t n = ys.size();
    if (n == 0) throw config_error(origin + ": no data rows");
    if (n % 2 == 0) throw config_error(origin + ": n must be odd (found " + std::to_string(n) + " rows)");
    if (n < 3) throw config_error(origin + ": n must be at least 3");
    const DesignGrid grid(n);
    for (std::size_t j = 1; j <= xs.size(); ++j)
        if (std::abs(xs[j - 1] - grid.x(j)) > 1e-9) {
            std::ostringstream os;
            os << origin << ":" << lines[j - 1] << ": row " << j << " has x = " << format_exact(xs[j - 1])
               << ", expected j/n = " << format_exact(grid.x(j));
            throw config_error(os.str());
        }
    return Observations(grid, std::move(ys));
}

inline Observations load_signal(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open signal file '" + path + "'");
    return parse_signal(in, path);
}

/// Two-column (x, y) text; values are written so they reload bit-exactly.
inline void write_observations(std::ostream& out, const Observations& obs) {
    out << "# n = " << obs.grid.size() << '\n';
    out << "# seed = " << obs.seed << '\n';
    out << "x\ty\n";
    for (std::size_t l = 1; l <= obs.grid.size(); ++l)
        out << format_exact(obs.grid.x(l)) << '\t' << format_exact(obs.y[l - 1]) << '\n';
}

inline void save_observations(const std::string& path, const Observations& obs) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write '" + path + "'");
    write_observations(out, obs);
}

// ---------------------------------------------------------------------------
// Key-value configuration

/// "key = value" lines; '#' starts a comment. Every lookup error names the
/// file, line and key.
class KeyValueConfig {
public:
    struct Entry {
        std::string value;
        std::size_t line = 0;
        mutable bool used = false;
    };

    static KeyValueConfig parse(std::istream& in, const std::string& origin = "config") {
        KeyValueConfig c;
        c.origin_ = origin;
        std::string line;
        std::size_t no = 0;
        while (std::getline(in, line)) {
            ++no;
            const auto hash = line.find('#');
            const std::string t = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
            if (t.empty()) continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw config_error(origin + ":" + std::to_string(no) + ": expected 'key = value'");
            const std::string key = detail::trim(t.substr(0, eq));
            const std::string value = detail::trim(t.substr(eq + 1));
            if (key.empty()) throw config_error(origin + ":" + std::to_string(no) + ": empty key");
            if (c.entries_.count(key))
                throw config_error(origin + ":" + std::to_string(no) + ": key '" + key + "' repeated (first on line " +
                                   std::to_string(c.entries_[key].line) + ")");
            c.entries_[key] = Entry{value, no};
        }
        return c;
    }

    static KeyValueConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw config_error("cannot open config file '" + path + "'");
        return parse(in, path);
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    // Command-line override; replaces any value read from the file.
    void set(const std::string& key, std::string value) { entries_[key] = Entry{std::move(value), 0}; }

    std::optional<std::string> string(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        it->second.used = true;
        return it->second.value;
    }

    std::optional<double> real(const std::string& key) const {
        const auto s = string(key);
        if (!s) return std::nullopt;
        const auto v = detail::parse_double(*s);
        if (!v) fail(key, "'" + *s + "' is not a number");
        return v;
    }

    std::optional<long long> integer(const std::string& key) const {
        const auto s = string(key);
        if (!s) return std::nullopt;
        long long v = 0;
        const auto res = std::from_chars(s->data(), s->data() + s->size(), v);
        if (res.ec != std::errc{} || res.ptr != s->data() + s->size()) fail(key, "'" + *s + "' is not an integer");
        return v;
    }

    std::optional<std::vector<double>> reals(const std::string& key) const {
        const auto s = string(key);
        if (!s) return std::nullopt;
        std::vector<double> out;
        for (const auto& f : detail::split_fields(*s)) {
            const auto v = detail::parse_double(f);
            if (!v) fail(key, "'" + f + "' is not a number");
            out.push_back(*v);
        }
        if (out.empty()) fail(key, "empty list");
        return out;
    }

    std::optional<std::vector<std::string>> words(const std::string& key) const {
        const auto s = string(key);
        if (!s) return std::nullopt;
        auto out = detail::split_fields(*s);
        if (out.empty()) fail(key, "empty list");
        return out;
    }

    std::vector<std::string> unused() const {
        std::vector<std::string> out;
        for (const auto& [k, e] : entries_)
            if (!e.used) out.push_back(k);
        return out;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        const auto it = entries_.find(key);
        std::string where = origin_.empty() ? "command line" : origin_;
        if (it != entries_.end())
            where = it->second.line == 0 ? "command line" : origin_ + ":" + std::to_string(it->second.line);
        throw config_error(where + ": field '" + key + "': " + what);
    }

    const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

private:
    std::string origin_;
    std::map<std::string, Entry> entries_;
};

}  // namespace hetreg
