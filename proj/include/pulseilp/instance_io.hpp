#pragma once

#include <cctype>
#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "pulseilp/errors.hpp"
#include "pulseilp/instance.hpp"

namespace pulseilp {

// Text format (UTF-8):
//   line 1:        M N
//   lines 2..M+1:  N space-separated integer coefficients, then '|', then d_m
//   lines whose first non-blank character is '#' are comments
//
// Example (3 constraints, 5 variables):
//   3 5
//   3 10 6 14 8 | 17
//   7 4 30 0 1 | 38
//   19 4 0 5 9 | 28

namespace detail {

// Scanner over one line; keeps 1-based column positions for error messages.
class LineScanner {
public:
    LineScanner(const std::string& text, std::size_t line_no) : s_(text), line_(line_no) {}

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool at_end() {
        skip_ws();
        return pos_ >= s_.size();
    }

    // True and consumed if the next token is a '|' separator.
    bool try_bar() {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == '|') {
            ++pos_;
            return true;
        }
        return false;
    }

    std::int64_t read_int(const char* what) {
        skip_ws();
        const std::size_t start = pos_;
        if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
        std::size_t digits = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            ++pos_;
            ++digits;
        }
        if (digits == 0) {
            throw ParseError(std::string("expected ") + what, line_, start + 1);
        }
        errno = 0;
        const std::string tok = s_.substr(start, pos_ - start);
        char* end = nullptr;
        const long long v = std::strtoll(tok.c_str(), &end, 10);
        if (errno == ERANGE) {
            throw ParseError("integer out of range: " + tok, line_, start + 1);
        }
        return static_cast<std::int64_t>(v);
    }

    std::size_t col() {
        skip_ws();
        return pos_ + 1;
    }

private:
    const std::string& s_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

inline bool is_blank_or_comment(const std::string& line) {
    for (char ch : line) {
        if (std::isspace(static_cast<unsigned char>(ch))) continue;
        return ch == '#';
    }
    return true;
}

}  // namespace detail

inline Instance read_instance(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    // Header: M N.
    std::size_t m = 0;
    std::size_t n = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::is_blank_or_comment(line)) continue;
        detail::LineScanner sc(line, line_no);
        const std::int64_t mv = sc.read_int("constraint count M");
        const std::int64_t nv = sc.read_int("variable count N");
        if (!sc.at_end()) {
            throw ParseError("unexpected trailing text after header", line_no, sc.col());
        }
        if (mv < 1 || nv < 1) {
            throw ParseError("header values must be positive", line_no, 1);
        }
        m = static_cast<std::size_t>(mv);
        n = static_cast<std::size_t>(nv);
        have_header = true;
        break;
    }
    if (!have_header) {
        throw ParseError("missing header line 'M N'", line_no + 1, 1);
    }

    std::vector<std::vector<std::int64_t>> c;
    std::vector<std::int64_t> d;
    c.reserve(m);
    d.reserve(m);
    while (c.size() < m && std::getline(in, line)) {
        ++line_no;
        if (detail::is_blank_or_comment(line)) continue;
        detail::LineScanner sc(line, line_no);
        std::vector<std::int64_t> row(n);
        for (std::size_t i = 0; i < n; ++i) {
            row[i] = sc.read_int("coefficient");
        }
        if (!sc.try_bar()) {
            throw ParseError("expected '|' before the target value", line_no, sc.col());
        }
        const std::int64_t dm = sc.read_int("target d_m");
        if (!sc.at_end()) {
            throw ParseError("unexpected trailing text after target", line_no, sc.col());
        }
        c.push_back(std::move(row));
        d.push_back(dm);
    }
    if (c.size() < m) {
        throw ParseError("header promised " + std::to_string(m) + " constraint rows, found " +
                             std::to_string(c.size()),
                         line_no + 1, 1);
    }
    // Anything after the last row must be blank/comments.
    while (std::getline(in, line)) {
        ++line_no;
        if (!detail::is_blank_or_comment(line)) {
            throw ParseError("unexpected content after the last constraint row", line_no, 1);
        }
    }
    return make_instance(std::move(c), std::move(d));
}

inline std::string write_instance(const Instance& inst) {
    std::ostringstream out;
    out << inst.m << ' ' << inst.n << '\n';
    for (std::size_t m = 0; m < inst.m; ++m) {
        for (std::size_t i = 0; i < inst.n; ++i) {
            out << inst.c[m][i] << ' ';
        }
        out << "| " << inst.d[m] << '\n';
    }
    return out.str();
}

}  // namespace pulseilp
