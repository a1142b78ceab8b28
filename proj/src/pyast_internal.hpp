// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nbstat/pyast.hpp"

namespace nbstat::pyast {

enum class TokKind {
    Name,      // identifier or keyword (keyword flag set separately)
    Number,
    String,    // one string literal token, prefix included in `text`
    Op,        // operator or delimiter, text is the exact spelling
    Newline,   // end of a logical line
    Indent,
    Dedent,
    End,
};

struct Token {
    TokKind kind;
    std::string text;
    Location loc;
    bool is_keyword = false;
    bool is_fstring = false;

    bool is_op(std::string_view s) const { return kind == TokKind::Op && text == s; }
    bool is_kw(std::string_view s) const { return is_keyword && text == s; }
    bool is_name(std::string_view s) const {
        return kind == TokKind::Name && !is_keyword && text == s;
    }
};

// Internal to the module; parse_cell converts it into a ParseFailure value.
struct ParseError : std::runtime_error {
    Location loc;
    ParseError(Location l, const std::string& msg) : std::runtime_error(msg), loc(l) {}
};

std::vector<Token> tokenize(std::string_view source);

}  // namespace nbstat::pyast
