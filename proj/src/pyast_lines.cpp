// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0

#include "nbstat/pyast.hpp"

#include "nbstat/util.hpp"

namespace nbstat::pyast {

namespace {

// Tracks whether a physical line ends inside a triple-quoted string.
// Single-quoted strings reset at end of line (error tolerance), which is
// enough for classification purposes.
struct StringState {
    bool in_triple = false;
    char quote = 0;
};

enum class LineKind { Blank, Comment, Sloc };

LineKind scan_line(std::string_view line, StringState& st) {
    size_t i = 0;

    if (!st.in_triple) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        if (i == line.size()) return LineKind::Blank;
        if (line[i] == '#') return LineKind::Comment;
    }

    bool in_single = false;
    char single_quote = 0;
    while (i < line.size()) {
        char c = line[i];
        if (st.in_triple) {
            if (c == '\\') { i += 2; continue; }
            if (c == st.quote && line.size() - i >= 3 && line[i + 1] == st.quote &&
                line[i + 2] == st.quote) {
                st.in_triple = false;
                i += 3;
                continue;
            }
            ++i;
            continue;
        }
        if (in_single) {
            if (c == '\\') { i += 2; continue; }
            if (c == single_quote) in_single = false;
            ++i;
            continue;
        }
        if (c == '#') break;  // trailing comment; line already counted as sloc
        if (c == '\'' || c == '"') {
            if (line.size() - i >= 3 && line[i + 1] == c && line[i + 2] == c) {
                st.in_triple = true;
                st.quote = c;
                i += 3;
            } else {
                in_single = true;
                single_quote = c;
                ++i;
            }
            continue;
        }
        ++i;
    }

    return LineKind::Sloc;
}

}  // namespace

LineCounts classify_lines(std::string_view source) {
    LineCounts counts;
    StringState st;
    for (std::string_view line : util::split_lines(source)) {
        switch (scan_line(line, st)) {
            case LineKind::Blank: ++counts.blank; break;
            case LineKind::Comment: ++counts.comment; break;
            case LineKind::Sloc: ++counts.sloc; break;
        }
    }
    return counts;
}

}  // namespace nbstat::pyast
