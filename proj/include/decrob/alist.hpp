#pragma once

// MacKay alist parity-check files (1-based indices, zero padding allowed).
//
//   n m
//   max_col_degree max_row_degree
//   col_degree[0] ... col_degree[n-1]
//   row_degree[0] ... row_degree[m-1]
//   n lines: row indices of each column
//   m lines: column indices of each row

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "decrob/code.hpp"
#include "decrob/errors.hpp"

namespace decrob {

namespace detail {

struct NumberLine {
    std::size_t line_no;
    std::vector<long long> values;
};

inline std::vector<NumberLine> split_number_lines(std::string_view text) {
    std::vector<NumberLine> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        ++line_no;
        NumberLine nl{line_no, {}};
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
            if (i >= line.size()) break;
            std::size_t j = i;
            while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
            long long v = 0;
            const auto [p, ec] = std::from_chars(line.data() + i, line.data() + j, v);
            if (ec != std::errc{} || p != line.data() + j)
                throw ParseError(line_no, "expected an integer, got '" + std::string(line.substr(i, j - i)) + "'");
            nl.values.push_back(v);
            i = j;
        }
        if (!nl.values.empty()) out.push_back(std::move(nl));
        if (end == text.size()) break;
        pos = end + 1;
    }
    return out;
}

}  // namespace detail

/// Parses alist text into a parity-check matrix. Column and row lists must
/// describe the same matrix.
inline BitMatrix parse_alist_matrix(std::string_view text) {
    const auto lines = detail::split_number_lines(text);
    std::size_t cursor = 0;
    auto next = [&](std::size_t expected, const char* what) -> const detail::NumberLine& {
        if (cursor >= lines.size()) {
            const std::size_t last = lines.empty() ? 1 : lines.back().line_no + 1;
            throw ParseError(last, std::string("unexpected end of file while reading ") + what);
        }
        const auto& l = lines[cursor++];
        if (expected != 0 && l.values.size() != expected)
            throw ParseError(l.line_no, std::string(what) + ": expected " + std::to_string(expected) +
                                            " values, got " + std::to_string(l.values.size()));
        return l;
    };

    const auto& header = next(2, "header (n m)");
    if (header.values[0] <= 0 || header.values[1] <= 0) throw ParseError(header.line_no, "n and m must be positive");
    const auto n = static_cast<std::size_t>(header.values[0]);
    const auto m = static_cast<std::size_t>(header.values[1]);

    const auto& maxdeg = next(2, "max degrees");
    const long long max_col = maxdeg.values[0];
    const long long max_row = maxdeg.values[1];
    if (max_col <= 0 || max_row <= 0) throw ParseError(maxdeg.line_no, "max degrees must be positive");

    const auto& col_deg = next(n, "column degrees");
    const auto& row_deg = next(m, "row degrees");
    long long col_sum = 0, row_sum = 0;
    for (auto d : col_deg.values) {
        if (d < 0 || d > max_col) throw ParseError(col_deg.line_no, "column degree out of range");
        col_sum += d;
    }
    for (auto d : row_deg.values) {
        if (d < 0 || d > max_row) throw ParseError(row_deg.line_no, "row degree out of range");
        row_sum += d;
    }
    if (col_sum != row_sum)
        throw ParseError(row_deg.line_no, "column degrees sum to " + std::to_string(col_sum) +
                                              " but row degrees sum to " + std::to_string(row_sum));

    BitMatrix from_cols(m, n);
    for (std::size_t c = 0; c < n; ++c) {
        const auto& l = next(0, "column list");
        if (l.values.size() > static_cast<std::size_t>(max_col))
            throw ParseError(l.line_no, "column list longer than max column degree");
        std::size_t count = 0;
        for (auto v : l.values) {
            if (v == 0) continue;
            if (v < 0 || v > static_cast<long long>(m)) throw ParseError(l.line_no, "row index out of range");
            if (from_cols.get(v - 1, c)) throw ParseError(l.line_no, "duplicate row index");
            from_cols.set(v - 1, c, true);
            ++count;
        }
        if (count != static_cast<std::size_t>(col_deg.values[c]))
            throw ParseError(l.line_no, "column " + std::to_string(c + 1) + " lists " + std::to_string(count) +
                                            " entries, degree says " + std::to_string(col_deg.values[c]));
    }

    BitMatrix from_rows(m, n);
    for (std::size_t r = 0; r < m; ++r) {
        const auto& l = next(0, "row list");
        if (l.values.size() > static_cast<std::size_t>(max_row))
            throw ParseError(l.line_no, "row list longer than max row degree");
        std::size_t count = 0;
        for (auto v : l.values) {
            if (v == 0) continue;
            if (v < 0 || v > static_cast<long long>(n)) throw ParseError(l.line_no, "column index out of range");
            if (from_rows.get(r, v - 1)) throw ParseError(l.line_no, "duplicate column index");
            from_rows.set(r, v - 1, true);
            ++count;
        }
        if (count != static_cast<std::size_t>(row_deg.values[r]))
            throw ParseError(l.line_no, "row " + std::to_string(r + 1) + " lists " + std::to_string(count) +
                                            " entries, degree says " + std::to_string(row_deg.values[r]));
        if (!std::ranges::equal(from_rows.row(r), from_cols.row(r)))
            throw ParseError(l.line_no, "row " + std::to_string(r + 1) + " disagrees with the column lists");
    }
    if (cursor != lines.size()) throw ParseError(lines[cursor].line_no, "trailing data after row lists");
    return from_cols;
}

inline LinearCode load_alist(std::string_view text, std::string id = "custom",
                             CodeFamily family = CodeFamily::ldpc) {
    return LinearCode::from_parity_check(parse_alist_matrix(text), family, std::move(id));
}

inline LinearCode load_alist_file(const std::string& path, std::string id,
                                  CodeFamily family = CodeFamily::ldpc) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open alist file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_alist(ss.str(), std::move(id), family);
}

/// Canonical alist text: lists zero-padded to the maximum degree.
inline std::string to_alist(const BitMatrix& h) {
    const std::size_t m = h.rows(), n = h.cols();
    std::vector<std::vector<std::size_t>> cols(n), rows(m);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c)
            if (h.get(r, c)) {
                cols[c].push_back(r + 1);
                rows[r].push_back(c + 1);
            }
    std::size_t max_col = 1, max_row = 1;
    for (const auto& c : cols) max_col = std::max(max_col, c.size());
    for (const auto& r : rows) max_row = std::max(max_row, r.size());

    std::ostringstream os;
    auto emit_list = [&os](const std::vector<std::size_t>& v, std::size_t width) {
        for (std::size_t i = 0; i < width; ++i) os << (i ? " " : "") << (i < v.size() ? v[i] : 0);
        os << '\n';
    };
    os << n << ' ' << m << '\n' << max_col << ' ' << max_row << '\n';
    for (std::size_t c = 0; c < n; ++c) os << (c ? " " : "") << cols[c].size();
    os << '\n';
    for (std::size_t r = 0; r < m; ++r) os << (r ? " " : "") << rows[r].size();
    os << '\n';
    for (const auto& c : cols) emit_list(c, max_col);
    for (const auto& r : rows) emit_list(r, max_row);
    return os.str();
}

inline std::string to_alist(const LinearCode& code) { return to_alist(code.parity_check()); }

}  // namespace decrob
