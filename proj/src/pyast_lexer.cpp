// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0
//
// Python tokenizer: indentation-aware, with implicit bracket continuation,
// explicit backslash continuation, string prefixes, and triple quotes.
// F-strings are emitted as single string tokens; their embedded
// expressions are not tokenized.

#include "pyast_internal.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <unordered_set>

namespace nbstat::pyast {

namespace {

const std::unordered_set<std::string_view> kKeywords = {
    "False", "None", "True", "and", "as", "assert", "async", "await", "break",
    "class", "continue", "def", "del", "elif", "else", "except", "finally",
    "for", "from", "global", "if", "import", "in", "is", "lambda", "nonlocal",
    "not", "or", "pass", "raise", "return", "try", "while", "with", "yield",
};

// Longest-match operator table.
const std::array<std::string_view, 46> kOps = {
    "**=", "//=", ">>=", "<<=", "...", "!=", ">=", "<=", "==", "->", ":=",
    "+=", "-=", "*=", "/=", "%=", "@=", "&=", "|=", "^=", "**", "//", "<<",
    ">>", "<", ">", "=", "+", "-", "*", "/", "%", "@", "&", "|", "^", "~",
    "(", ")", "[", "]", "{", "}", ",", ":", ".",
};

bool is_ident_start(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}

bool is_ident_cont(unsigned char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9');
}

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

// Recognized string prefixes, case-insensitive: r b u f rb br fr rf (any case mix).
bool is_string_prefix(std::string_view s) {
    if (s.size() > 2) return false;
    for (char c : s) {
        char l = char(std::tolower(static_cast<unsigned char>(c)));
        if (l != 'r' && l != 'b' && l != 'u' && l != 'f') return false;
    }
    return true;
}

bool prefix_has_f(std::string_view s) {
    return s.find('f') != std::string_view::npos || s.find('F') != std::string_view::npos;
}

struct Lexer {
    std::string_view src;
    size_t pos = 0;
    int line = 1;
    int col = 1;
    int paren_depth = 0;
    bool at_line_start = true;
    std::vector<int> indents{0};
    std::vector<Token> out;

    explicit Lexer(std::string_view s) : src(s) {}

    [[noreturn]] void fail(const std::string& msg) { throw ParseError({line, col}, msg); }
    [[noreturn]] void fail_at(Location loc, const std::string& msg) { throw ParseError(loc, msg); }

    char peek(size_t ahead = 0) const {
        return pos + ahead < src.size() ? src[pos + ahead] : '\0';
    }
    bool eof() const { return pos >= src.size(); }

    void advance() {
        if (src[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }

    void push(TokKind kind, std::string text, Location loc) {
        Token t{kind, std::move(text), loc};
        if (kind == TokKind::Name && kKeywords.count(t.text)) t.is_keyword = true;
        out.push_back(std::move(t));
    }

    void run() {
        while (!eof()) {
            if (at_line_start && paren_depth == 0) {
                if (!handle_indentation()) continue;  // blank/comment line consumed
            }
            if (eof()) break;
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\f') {
                advance();
                continue;
            }
            if (c == '#') {
                while (!eof() && peek() != '\n') advance();
                continue;
            }
            if (c == '\n') {
                advance();
                if (paren_depth == 0) {
                    push(TokKind::Newline, "\n", {line - 1, col});
                    at_line_start = true;
                }
                continue;
            }
            if (c == '\\') {
                if (peek(1) == '\n') {
                    advance();
                    advance();
                    continue;
                }
                fail("unexpected character after line continuation");
            }
            lex_token();
        }
        if (!out.empty() && out.back().kind != TokKind::Newline)
            push(TokKind::Newline, "\n", {line, col});
        while (indents.back() > 0) {
            indents.pop_back();
            push(TokKind::Dedent, "", {line, 1});
        }
        push(TokKind::End, "", {line, col});
    }

    // Returns false when the physical line was blank/comment-only and has
    // been consumed (no tokens emitted for it).
    bool handle_indentation() {
        size_t scan = pos;
        int width = 0;
        while (scan < src.size() && (src[scan] == ' ' || src[scan] == '\t' || src[scan] == '\f')) {
            width = src[scan] == '\t' ? (width / 8 + 1) * 8 : width + 1;
            ++scan;
        }
        if (scan >= src.size() || src[scan] == '\n' || src[scan] == '#') {
            // Blank or comment-only line: skip it without touching indents.
            while (!eof() && peek() != '\n') advance();
            if (!eof()) advance();
            return false;
        }
        while (pos < scan) advance();
        at_line_start = false;
        if (width > indents.back()) {
            indents.push_back(width);
            push(TokKind::Indent, "", {line, 1});
        } else {
            while (width < indents.back()) {
                indents.pop_back();
                push(TokKind::Dedent, "", {line, 1});
            }
            if (width != indents.back()) fail("unindent does not match any outer level");
        }
        return true;
    }

    void lex_token() {
        Location loc{line, col};
        char c = peek();

        if (is_ident_start(c)) {
            size_t start = pos;
            while (!eof() && is_ident_cont(peek())) advance();
            std::string word(src.substr(start, pos - start));
            // A quote right after a short prefix word starts a string literal.
            if ((peek() == '\'' || peek() == '"') && is_string_prefix(word)) {
                lex_string(loc, word);
                return;
            }
            push(TokKind::Name, std::move(word), loc);
            return;
        }
        if (is_digit(c) || (c == '.' && is_digit(peek(1)))) {
            lex_number(loc);
            return;
        }
        if (c == '\'' || c == '"') {
            lex_string(loc, "");
            return;
        }
        if (c == '!') {
            if (peek(1) == '=') {
                advance();
                advance();
                push(TokKind::Op, "!=", loc);
                return;
            }
            fail("invalid character '!'");
        }
        if (c == ';') {
            advance();
            push(TokKind::Op, ";", loc);
            return;
        }
        for (std::string_view op : kOps) {
            if (src.substr(pos).substr(0, op.size()) == op) {
                if (op == "(" || op == "[" || op == "{") ++paren_depth;
                if (op == ")" || op == "]" || op == "}") {
                    if (paren_depth == 0) fail("unmatched closing bracket");
                    --paren_depth;
                }
                for (size_t i = 0; i < op.size(); ++i) advance();
                push(TokKind::Op, std::string(op), loc);
                return;
            }
        }
        fail(std::string("invalid character '") + c + "'");
    }

    void lex_number(Location loc) {
        size_t start = pos;
        if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X' || peek(1) == 'o' ||
                              peek(1) == 'O' || peek(1) == 'b' || peek(1) == 'B')) {
            advance();
            advance();
            while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
                advance();
        } else {
            bool seen_dot = false;
            while (!eof()) {
                char c = peek();
                if (is_digit(c) || c == '_') {
                    advance();
                } else if (c == '.' && !seen_dot) {
                    seen_dot = true;
                    advance();
                } else if (c == 'e' || c == 'E') {
                    if (peek(1) == '+' || peek(1) == '-') {
                        if (!is_digit(peek(2))) break;
                        advance();
                        advance();
                    } else if (!is_digit(peek(1))) {
                        break;
                    } else {
                        advance();
                    }
                } else if (c == 'j' || c == 'J') {
                    advance();
                    break;
                } else {
                    break;
                }
            }
        }
        push(TokKind::Number, std::string(src.substr(start, pos - start)), loc);
    }

    void lex_string(Location loc, const std::string& prefix) {
        char quote = peek();
        bool triple = peek(1) == quote && peek(2) == quote;
        size_t start = pos;
        advance();
        if (triple) {
            advance();
            advance();
        }
        while (true) {
            if (eof()) fail_at(loc, "unterminated string literal");
            char c = peek();
            if (c == '\\') {
                advance();
                if (eof()) fail_at(loc, "unterminated string literal");
                advance();
                continue;
            }
            if (c == '\n' && !triple) fail_at(loc, "EOL while scanning string literal");
            if (c == quote) {
                if (!triple) {
                    advance();
                    break;
                }
                if (peek(1) == quote && peek(2) == quote) {
                    advance();
                    advance();
                    advance();
                    break;
                }
                advance();
                continue;
            }
            advance();
        }
        Token t{TokKind::String, prefix + std::string(src.substr(start, pos - start)), loc};
        t.is_fstring = prefix_has_f(prefix);
        out.push_back(std::move(t));
    }
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) {
    Lexer lexer(source);
    lexer.run();
    return lexer.out;
}

}  // namespace nbstat::pyast
