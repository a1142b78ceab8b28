// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0

#include "nbstat/lint.hpp"

#include <algorithm>
#include <functional>
#include <unordered_set>

#include "nbstat/util.hpp"

namespace nbstat::lint {

using ingest::CellDocument;
using ingest::CellType;
using pyast::Node;
using pyast::NodeKind;

std::string category_name(RuleCategory c) {
    switch (c) {
        case RuleCategory::ErrorProneness: return "error-proneness";
        case RuleCategory::CodeStyle: return "code-style";
        case RuleCategory::BestPractices: return "best-practices";
    }
    return "";
}

const std::vector<LintRule>& rule_catalog() {
    static const std::vector<LintRule> catalog = {
        {"WPS440", RuleCategory::ErrorProneness,
         "block construct rebinds a name already bound in the same scope"},
        {"NOEFFECT", RuleCategory::ErrorProneness,
         "expression statement that is not a call, await, yield, or docstring"},
        {"WPS442", RuleCategory::ErrorProneness,
         "binding inside a function shadows an earlier module-level name"},
        {"E0602", RuleCategory::ErrorProneness,
         "name read at module level with no earlier binding"},
        {"I201", RuleCategory::CodeStyle,
         "no blank line between top-level imports and following code"},
        {"E231", RuleCategory::CodeStyle,
         "missing whitespace after ',', ';', or ':'"},
        {"WPS301", RuleCategory::CodeStyle, "dotted import without alias"},
        {"E226", RuleCategory::CodeStyle,
         "missing whitespace around arithmetic operator"},
        {"C812", RuleCategory::CodeStyle,
         "multi-line bracketed construct without trailing comma"},
        {"F401", RuleCategory::BestPractices, "plain import binding never referenced"},
        {"W0611", RuleCategory::BestPractices, "aliased import binding never referenced"},
        {"W0621", RuleCategory::BestPractices,
         "function parameter or local rebinds a module-level name"},
        {"WPS336", RuleCategory::BestPractices,
         "explicit string concatenation with '+'"},
        {"R504", RuleCategory::BestPractices,
         "variable assigned and immediately returned"},
    };
    return catalog;
}

const LintRule* find_rule(const std::string& rule_id) {
    for (const LintRule& r : rule_catalog())
        if (r.rule_id == rule_id) return &r;
    return nullptr;
}

FlatSource flatten(const CellDocument& doc) {
    FlatSource flat;
    flat.boundary_map.emplace_back(-1, -1);  // flat lines are 1-based
    bool first_chunk = true;
    for (const ingest::Cell& cell : doc.cells) {
        if (cell.cell_type != CellType::Code) continue;
        auto lines = util::split_lines(cell.source);
        if (lines.empty()) continue;
        for (size_t k = 0; k < lines.size(); ++k) {
            if (!first_chunk || k > 0) flat.text += '\n';
            flat.text.append(lines[k].data(), lines[k].size());
            flat.boundary_map.emplace_back(cell.index, int(k) + 1);
        }
        first_chunk = false;
    }
    return flat;
}

namespace {

// ---------------------------------------------------------------------------
// Lexical view: string contents masked to 'x', comments to spaces, with a
// per-character innermost-bracket tag and per-line bracket depth.

struct MaskedText {
    std::vector<std::string> lines;             // masked
    std::vector<std::string> innermost;         // '(', '[', '{', or 0 per char
    std::vector<int> eol_depth;                 // total bracket depth at EOL
    std::vector<bool> raw_blank;                // raw line is whitespace-only
    std::vector<bool> ends_backslash;           // continuation outside strings
};

MaskedText mask_text(const std::string& text) {
    MaskedText m;
    auto raw_lines = util::split_lines(text);
    bool in_triple = false;
    char triple_quote = 0;
    std::vector<char> bracket_stack;

    for (std::string_view raw : raw_lines) {
        std::string masked(raw.size(), ' ');
        std::string inner(raw.size(), '\0');
        bool in_single = false;
        char single_quote = 0;
        bool backslash_eol = false;

        for (size_t i = 0; i < raw.size(); ++i) {
            char c = raw[i];
            char tag = bracket_stack.empty() ? '\0' : bracket_stack.back();
            if (in_triple) {
                masked[i] = 'x';
                inner[i] = tag;
                if (c == '\\') {
                    if (i + 1 < raw.size()) { masked[i + 1] = 'x'; inner[i + 1] = tag; ++i; }
                    continue;
                }
                if (c == triple_quote && raw.size() - i >= 3 && raw[i + 1] == c &&
                    raw[i + 2] == c) {
                    masked[i + 1] = 'x';
                    masked[i + 2] = 'x';
                    inner[i + 1] = tag;
                    inner[i + 2] = tag;
                    i += 2;
                    in_triple = false;
                }
                continue;
            }
            if (in_single) {
                masked[i] = 'x';
                inner[i] = tag;
                if (c == '\\') {
                    if (i + 1 < raw.size()) { masked[i + 1] = 'x'; inner[i + 1] = tag; ++i; }
                    continue;
                }
                if (c == single_quote) in_single = false;
                continue;
            }
            if (c == '#') break;  // rest of line stays spaces
            if (c == '\'' || c == '"') {
                masked[i] = 'x';
                inner[i] = tag;
                if (raw.size() - i >= 3 && raw[i + 1] == c && raw[i + 2] == c) {
                    in_triple = true;
                    triple_quote = c;
                    masked[i + 1] = 'x';
                    masked[i + 2] = 'x';
                    inner[i + 1] = tag;
                    inner[i + 2] = tag;
                    i += 2;
                } else {
                    in_single = true;
                    single_quote = c;
                }
                continue;
            }
            masked[i] = c;
            if (c == '(' || c == '[' || c == '{') {
                inner[i] = tag;
                bracket_stack.push_back(c);
                continue;
            }
            if (c == ')' || c == ']' || c == '}') {
                if (!bracket_stack.empty()) bracket_stack.pop_back();
                inner[i] = bracket_stack.empty() ? '\0' : bracket_stack.back();
                continue;
            }
            inner[i] = tag;
            if (c == '\\' && i + 1 == raw.size()) backslash_eol = true;
        }
        in_single = false;

        size_t last_non_space = masked.find_last_not_of(' ');
        bool blank = true;
        for (char c : raw)
            if (c != ' ' && c != '\t' && c != '\f') { blank = false; break; }

        (void)last_non_space;
        m.lines.push_back(std::move(masked));
        m.innermost.push_back(std::move(inner));
        m.eol_depth.push_back(int(bracket_stack.size()));
        m.raw_blank.push_back(blank);
        m.ends_backslash.push_back(backslash_eol);
    }
    return m;
}

const std::unordered_set<std::string_view> kPyKeywords = {
    "False", "None", "True", "and", "as", "assert", "async", "await", "break",
    "class", "continue", "def", "del", "elif", "else", "except", "finally",
    "for", "from", "global", "if", "import", "in", "is", "lambda", "nonlocal",
    "not", "or", "pass", "raise", "return", "try", "while", "with", "yield",
};

// Names E0602 accepts beyond the function registry: module dunders,
// singleton constants, and the standard exception hierarchy.
const std::unordered_set<std::string_view>& extended_builtin_names() {
    static const std::unordered_set<std::string_view> names = {
        "__name__", "__file__", "__doc__", "__builtins__", "__spec__",
        "__loader__", "__package__", "__debug__", "__annotations__",
        "__dict__", "__all__",
        "NotImplemented", "Ellipsis",
        "BaseException", "Exception", "ArithmeticError", "AssertionError",
        "AttributeError", "BlockingIOError", "BrokenPipeError", "BufferError",
        "BytesWarning", "ChildProcessError", "ConnectionAbortedError",
        "ConnectionError", "ConnectionRefusedError", "ConnectionResetError",
        "DeprecationWarning", "EOFError", "EnvironmentError", "FileExistsError",
        "FileNotFoundError", "FloatingPointError", "FutureWarning",
        "GeneratorExit", "IOError", "ImportError", "ImportWarning",
        "IndentationError", "IndexError", "InterruptedError",
        "IsADirectoryError", "KeyError", "KeyboardInterrupt", "LookupError",
        "MemoryError", "ModuleNotFoundError", "NameError",
        "NotADirectoryError", "NotImplementedError", "OSError",
        "OverflowError", "PendingDeprecationWarning", "PermissionError",
        "ProcessLookupError", "RecursionError", "ReferenceError",
        "ResourceWarning", "RuntimeError", "RuntimeWarning", "StopAsyncIteration",
        "StopIteration", "SyntaxError", "SyntaxWarning", "SystemError",
        "SystemExit", "TabError", "TimeoutError", "TypeError",
        "UnboundLocalError", "UnicodeDecodeError", "UnicodeEncodeError",
        "UnicodeError", "UnicodeTranslateError", "UnicodeWarning",
        "UserWarning", "ValueError", "Warning", "ZeroDivisionError",
    };
    return names;
}

struct Collector {
    std::vector<LintFinding> findings;

    void add(const std::string& rule_id, int flat_line, std::string message,
             std::string symbol = "") {
        LintFinding f;
        f.rule_id = rule_id;
        f.flat_line = flat_line;
        f.message = std::move(message);
        f.symbol = std::move(symbol);
        findings.push_back(std::move(f));
    }
};

// ---------------------------------------------------------------------------
// E231 / E226: purely lexical.

void check_e231(const MaskedText& m, Collector& out) {
    for (size_t li = 0; li < m.lines.size(); ++li) {
        const std::string& line = m.lines[li];
        size_t last = line.find_last_not_of(" \t");
        for (size_t i = 0; i < line.size(); ++i) {
            char c = line[i];
            if (c != ',' && c != ';' && c != ':') continue;
            if (i + 1 >= line.size()) continue;
            char next = line[i + 1];
            if (next == ' ' || next == '\t') continue;
            if (c == ',' && (next == ')' || next == ']' || next == '}')) continue;
            if (c == ':') {
                if (next == '=') continue;                  // walrus
                if (m.innermost[li][i] == '[') continue;    // slice approximation
                if (i == last) continue;                    // block header colon
            }
            if (i + 1 > last) continue;  // only trailing comment/whitespace follows
            out.add("E231", int(li) + 1,
                    std::string("missing whitespace after '") + c + "'");
        }
    }
}

bool is_word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_';
}

void check_e226(const MaskedText& m, Collector& out) {
    static const std::string op_chars = "+-*/%@&|^~<>=!";
    for (size_t li = 0; li < m.lines.size(); ++li) {
        const std::string& line = m.lines[li];
        for (size_t i = 0; i < line.size(); ++i) {
            char c = line[i];
            if (c != '+' && c != '-' && c != '*' && c != '/') continue;
            char next = i + 1 < line.size() ? line[i + 1] : '\0';
            // Two-char operators are not plain arithmetic.
            if (next == '=') { ++i; continue; }            // += -= *= /=
            if (c == '*' && next == '*') { ++i; continue; }  // ** and **=
            if (c == '/' && next == '/') { ++i; continue; }  // // and //=
            if (c == '-' && next == '>') { ++i; continue; }  // ->

            // Unary context: previous significant char is an opener,
            // separator, operator, or a keyword ending.
            size_t p = i;
            while (p > 0 && (line[p - 1] == ' ' || line[p - 1] == '\t')) --p;
            if (p == 0) continue;  // line-leading operator (continuation)
            char prev = line[p - 1];
            if (op_chars.find(prev) != std::string::npos) continue;
            if (prev == '(' || prev == '[' || prev == '{' || prev == ',' || prev == ':' ||
                prev == ';')
                continue;
            if (is_word_char(prev)) {
                size_t w = p - 1;
                while (w > 0 && is_word_char(line[w - 1])) --w;
                std::string word = line.substr(w, p - w);
                if (kPyKeywords.count(word)) continue;
                // Float exponents: 1e-5 / 2E+10.
                if ((c == '-' || c == '+') && (prev == 'e' || prev == 'E') && p >= 2 &&
                    (std::isdigit(static_cast<unsigned char>(line[p - 2])) ||
                     line[p - 2] == '.') &&
                    i + 1 < line.size() && std::isdigit(static_cast<unsigned char>(next)))
                    continue;
            }

            // Binary operator: flag only when both neighbours are tight.
            if (i == 0) continue;
            if (line[i - 1] == ' ' || next == ' ' || next == '\0') continue;
            out.add("E226", int(li) + 1, "missing whitespace around arithmetic operator");
        }
    }
}

// ---------------------------------------------------------------------------
// Tree-based rules.

struct TreeRules {
    const pyast::SyntaxTree& tree;
    const MaskedText& masked;
    const metrics::BuiltinRegistry& registry;
    Collector& out;

    // --- NOEFFECT ---------------------------------------------------------

    static bool has_effect(const Node& expr) {
        switch (expr.kind) {
            case NodeKind::Call:
            case NodeKind::Await:
            case NodeKind::Yield:
            case NodeKind::YieldFrom:
            case NodeKind::Walrus: return true;
            default: return false;
        }
    }

    void check_noeffect(const Node& n) {
        if (n.kind == NodeKind::ExprStmt) {
            if (!n.flag && !has_effect(n.children[0]))
                out.add("NOEFFECT", n.loc.line, "statement has no effect");
        }
        for (const Node& c : n.children) check_noeffect(c);
    }

    // --- WPS336 -----------------------------------------------------------

    void check_string_concat(const Node& n) {
        if (n.kind == NodeKind::BinOp && n.text == "+") {
            if (n.children[0].kind == NodeKind::StringLit ||
                n.children[1].kind == NodeKind::StringLit)
                out.add("WPS336", n.loc.line, "explicit string concatenation");
        }
        for (const Node& c : n.children) check_string_concat(c);
    }

    // --- R504 -------------------------------------------------------------

    void check_return_assign(const Node& n) {
        if (n.kind == NodeKind::Block || n.kind == NodeKind::Module) {
            for (size_t k = 0; k + 1 < n.children.size(); ++k) {
                const Node& a = n.children[k];
                const Node& r = n.children[k + 1];
                if (a.kind != NodeKind::Assign || a.children.size() != 2) continue;
                if (a.children[0].kind != NodeKind::Name) continue;
                if (r.kind != NodeKind::Return || r.children[0].kind != NodeKind::Name)
                    continue;
                if (a.children[0].text == r.children[0].text)
                    out.add("R504", r.loc.line, "variable assigned and immediately returned",
                            r.children[0].text);
            }
        }
        for (const Node& c : n.children) check_return_assign(c);
    }

    // --- Imports: F401 / W0611 / WPS301 ------------------------------------

    void check_imports(const pyast::CellFacts& facts) {
        std::unordered_set<std::string> used(facts.names_read.begin(),
                                             facts.names_read.end());
        for (const pyast::CallSite& c : facts.calls)
            if (!c.head.empty() && c.head != "?") used.insert(c.head);

        for (const pyast::ImportBinding& b : facts.imports) {
            if (b.kind == pyast::ImportBinding::Kind::ModuleImport && b.is_dotted)
                out.add("WPS301", b.loc.line,
                        "dotted import without alias: '" + b.source_module + "'",
                        b.source_module);
            if (b.bound_name.empty()) continue;  // star import
            if (used.count(b.bound_name)) continue;
            if (b.aliased)
                out.add("W0611", b.loc.line,
                        "aliased import '" + b.bound_name + "' is never used",
                        b.bound_name);
            else
                out.add("F401", b.loc.line,
                        "import '" + b.bound_name + "' is never used", b.bound_name);
        }
    }

    // --- I201 ---------------------------------------------------------------

    bool is_import_stmt(const Node& n) const {
        return n.kind == NodeKind::Import || n.kind == NodeKind::ImportFrom;
    }

    int statement_end_line(int start_line) const {
        int li = start_line;  // 1-based
        int max_line = int(masked.lines.size());
        while (li <= max_line &&
               (masked.eol_depth[li - 1] > 0 || masked.ends_backslash[li - 1]))
            ++li;
        return std::min(li, max_line);
    }

    void check_import_gap() {
        const auto& stmts = tree.root.children;
        for (size_t k = 0; k + 1 < stmts.size(); ++k) {
            if (!is_import_stmt(stmts[k]) || is_import_stmt(stmts[k + 1])) continue;
            int end = statement_end_line(stmts[k].loc.line);
            int next_start = stmts[k + 1].loc.line;
            bool blank_between = false;
            for (int l = end + 1; l < next_start; ++l)
                if (masked.raw_blank[l - 1]) { blank_between = true; break; }
            if (!blank_between)
                out.add("I201", next_start, "missing blank line after imports");
        }
    }

    // --- C812 ---------------------------------------------------------------

    void check_trailing_comma() {
        for (const pyast::BracketSpan& span : tree.bracket_spans) {
            if (span.is_comprehension || span.element_count == 0) continue;
            if (span.close.line <= span.open.line) continue;
            if (span.trailing_comma) continue;
            out.add("C812", span.close.line, "missing trailing comma in multi-line construct");
        }
    }

    // --- Scope rules: WPS440 / WPS442 / W0621 / E0602 -----------------------

    struct ModuleEnv {
        std::map<std::string, int> first_bind_line;  // all module-level bindings
        std::set<std::string> bound_so_far;          // ordered walk state
        bool star_import = false;
    };
    ModuleEnv env;

    void collect_binding_names(const Node& n, std::vector<const Node*>& names) const {
        switch (n.kind) {
            case NodeKind::Name:
                if (n.store_ctx) names.push_back(&n);
                return;
            case NodeKind::Tuple:
            case NodeKind::List:
            case NodeKind::Starred:
            case NodeKind::Pattern:
                for (const Node& c : n.children) collect_binding_names(c, names);
                return;
            default: return;
        }
    }

    // Pre-pass: every module-level binding with its first line.
    void prescan_module_bindings(const std::vector<Node>& stmts) {
        auto note = [&](const std::string& name, int line) {
            auto it = env.first_bind_line.find(name);
            if (it == env.first_bind_line.end()) env.first_bind_line.emplace(name, line);
        };
        std::function<void(const Node&)> scan_expr_binds = [&](const Node& n) {
            if (n.kind == NodeKind::Lambda) return;
            if (n.kind == NodeKind::ListComp || n.kind == NodeKind::SetComp ||
                n.kind == NodeKind::DictComp || n.kind == NodeKind::GeneratorExp)
                return;  // comprehension targets live in their own scope
            if (n.kind == NodeKind::Walrus) note(n.children[0].text, n.children[0].loc.line);
            for (const Node& c : n.children) scan_expr_binds(c);
        };
        std::function<void(const Node&)> scan = [&](const Node& stmt) {
            switch (stmt.kind) {
                case NodeKind::FunctionDef:
                case NodeKind::ClassDef: note(stmt.text, stmt.loc.line); return;
                case NodeKind::Import:
                case NodeKind::ImportFrom: {
                    pyast::SyntaxTree sub;
                    sub.root = make_wrapper(stmt);
                    for (const auto& b : pyast::extract_facts(sub).imports)
                        if (!b.bound_name.empty()) note(b.bound_name, b.loc.line);
                    return;
                }
                case NodeKind::Assign:
                case NodeKind::AugAssign:
                case NodeKind::AnnAssign:
                case NodeKind::For:
                case NodeKind::With:
                case NodeKind::WithItem:
                case NodeKind::ExprStmt:
                case NodeKind::Return:
                case NodeKind::Delete:
                case NodeKind::Assert:
                case NodeKind::Raise: {
                    std::vector<const Node*> names;
                    collect_binding_names_shallow(stmt, names);
                    for (const Node* n : names) note(n->text, n->loc.line);
                    // recurse into nested blocks / walrus
                    for (const Node& c : stmt.children) {
                        if (c.kind == NodeKind::Block) {
                            for (const Node& s : c.children) scan(s);
                        } else {
                            scan_expr_binds(c);
                        }
                    }
                    return;
                }
                case NodeKind::If:
                case NodeKind::While:
                case NodeKind::Try:
                case NodeKind::Match: {
                    std::vector<const Node*> names;
                    collect_binding_names_shallow(stmt, names);
                    for (const Node* n : names) note(n->text, n->loc.line);
                    std::function<void(const Node&)> walk_blocks = [&](const Node& n) {
                        for (const Node& c : n.children) {
                            if (c.kind == NodeKind::Block) {
                                for (const Node& s : c.children) scan(s);
                            } else if (c.kind != NodeKind::FunctionDef &&
                                       c.kind != NodeKind::ClassDef &&
                                       c.kind != NodeKind::Lambda) {
                                std::vector<const Node*> sub;
                                collect_binding_names(c, sub);
                                for (const Node* nn : sub) note(nn->text, nn->loc.line);
                                scan_expr_binds(c);
                                walk_blocks(c);
                            }
                        }
                    };
                    walk_blocks(stmt);
                    if (stmt.kind == NodeKind::Try) {
                        const Node& handlers = stmt.children[1];
                        for (const Node& h : handlers.children)
                            if (!h.text.empty()) note(h.text, h.loc.line);
                    }
                    return;
                }
                default: return;
            }
        };
        for (const Node& stmt : stmts) scan(stmt);
    }

    // Direct binding targets of one statement (not entering nested blocks).
    void collect_binding_names_shallow(const Node& stmt,
                                       std::vector<const Node*>& names) const {
        switch (stmt.kind) {
            case NodeKind::Assign:
                for (size_t k = 0; k + 1 < stmt.children.size(); ++k)
                    collect_binding_names(stmt.children[k], names);
                return;
            case NodeKind::AugAssign:
            case NodeKind::AnnAssign:
                collect_binding_names(stmt.children[0], names);
                return;
            case NodeKind::For: collect_binding_names(stmt.children[0], names); return;
            case NodeKind::With:
                for (const Node& c : stmt.children)
                    if (c.kind == NodeKind::WithItem)
                        collect_binding_names(c.children[1], names);
                return;
            case NodeKind::Match:
                for (const Node& c : stmt.children)
                    if (c.kind == NodeKind::MatchCase)
                        collect_binding_names(c.children[0], names);
                return;
            default: return;
        }
    }

    static Node make_wrapper(const Node& stmt) {
        Node mod;
        mod.kind = NodeKind::Module;
        mod.children.push_back(stmt);
        return mod;
    }

    // Scope for WPS440 checks (module or one function body).
    struct BlockScope {
        std::set<std::string> bound;
    };

    void bind_block_name(const Node& name_node, BlockScope& scope) {
        if (scope.bound.count(name_node.text))
            out.add("WPS440", name_node.loc.line,
                    "block variable overlaps an existing binding: '" + name_node.text + "'",
                    name_node.text);
        scope.bound.insert(name_node.text);
    }

    void bind_plain_name(const std::string& name, BlockScope& scope) {
        scope.bound.insert(name);
    }

    // -- function-scope analysis (no E0602 inside functions) --

    struct FunctionCheck {
        int def_line;
        std::string def_name;
        std::set<std::string> wps442_reported;
        std::set<std::string> w0621_names;
    };

    void function_binding(const Node& name_node, BlockScope& scope, FunctionCheck& fc,
                          bool block_construct) {
        const std::string& name = name_node.text;
        auto it = env.first_bind_line.find(name);
        if (it != env.first_bind_line.end()) {
            if (it->second < fc.def_line && !fc.wps442_reported.count(name)) {
                out.add("WPS442", name_node.loc.line,
                        "binding shadows a module-level name: '" + name + "'", name);
                fc.wps442_reported.insert(name);
            }
            if (name != fc.def_name) fc.w0621_names.insert(name);
        }
        if (block_construct) bind_block_name(name_node, scope);
        else bind_plain_name(name, scope);
    }

    void walk_function_body(const Node& block, BlockScope& scope, FunctionCheck& fc) {
        for (const Node& stmt : block.children) walk_function_stmt(stmt, scope, fc);
    }

    void walk_function_stmt(const Node& stmt, BlockScope& scope, FunctionCheck& fc) {
        switch (stmt.kind) {
            case NodeKind::FunctionDef: {
                Node name_node = stmt;  // bind the nested def's name locally
                name_node.kind = NodeKind::Name;
                function_binding(name_node, scope, fc, false);
                analyze_function(stmt);
                return;
            }
            case NodeKind::ClassDef: {
                Node name_node = stmt;
                name_node.kind = NodeKind::Name;
                function_binding(name_node, scope, fc, false);
                walk_class_body(stmt.children[2]);
                return;
            }
            case NodeKind::Import:
            case NodeKind::ImportFrom: {
                pyast::SyntaxTree sub;
                sub.root = make_wrapper(stmt);
                for (const auto& b : pyast::extract_facts(sub).imports) {
                    if (b.bound_name.empty()) continue;
                    Node fake;
                    fake.kind = NodeKind::Name;
                    fake.text = b.bound_name;
                    fake.loc = b.loc;
                    function_binding(fake, scope, fc, false);
                }
                return;
            }
            default: break;
        }

        // Block-construct bindings first, then plain ones, then recurse.
        std::vector<const Node*> block_names;
        bool is_block_construct = stmt.kind == NodeKind::For || stmt.kind == NodeKind::With;
        if (is_block_construct) collect_binding_names_shallow(stmt, block_names);
        std::vector<const Node*> plain_names;
        if (stmt.kind == NodeKind::Assign || stmt.kind == NodeKind::AugAssign ||
            stmt.kind == NodeKind::AnnAssign || stmt.kind == NodeKind::Match)
            collect_binding_names_shallow(stmt, plain_names);

        for (const Node* n : block_names) function_binding(*n, scope, fc, true);
        for (const Node* n : plain_names) function_binding(*n, scope, fc, false);

        if (stmt.kind == NodeKind::Try) {
            const Node& handlers = stmt.children[1];
            for (const Node& h : handlers.children) {
                if (!h.text.empty()) {
                    Node fake;
                    fake.kind = NodeKind::Name;
                    fake.text = h.text;
                    fake.loc = h.loc;
                    function_binding(fake, scope, fc, true);
                }
            }
        }

        // Walrus targets anywhere in the statement's expressions.
        std::function<void(const Node&)> scan_walrus = [&](const Node& n) {
            if (n.kind == NodeKind::Lambda || n.kind == NodeKind::FunctionDef ||
                n.kind == NodeKind::ClassDef)
                return;
            if (n.kind == NodeKind::Walrus) function_binding(n.children[0], scope, fc, false);
            for (const Node& c : n.children)
                if (c.kind != NodeKind::Block) scan_walrus(c);
        };
        for (const Node& c : stmt.children)
            if (c.kind != NodeKind::Block) scan_walrus(c);

        for (const Node& c : stmt.children) {
            if (c.kind == NodeKind::Block) {
                walk_function_body(c, scope, fc);
            } else if (c.kind == NodeKind::HandlerList) {
                for (const Node& h : c.children)
                    for (const Node& hc : h.children)
                        if (hc.kind == NodeKind::Block) walk_function_body(hc, scope, fc);
            } else if (c.kind == NodeKind::MatchCase) {
                for (const Node& mc : c.children)
                    if (mc.kind == NodeKind::Block) walk_function_body(mc, scope, fc);
            }
        }
    }

    void analyze_function(const Node& def) {
        FunctionCheck fc{def.loc.line, def.text, {}, {}};
        BlockScope scope;
        for (const Node& p : def.children[0].children) {
            Node fake;
            fake.kind = NodeKind::Name;
            fake.text = p.text;
            fake.loc = p.loc;
            function_binding(fake, scope, fc, false);
        }
        walk_function_body(def.children[2], scope, fc);
        for (const std::string& name : fc.w0621_names)
            out.add("W0621", def.loc.line,
                    "function binding '" + name + "' redefines a module-level name", name);
    }

    void walk_class_body(const Node& block) {
        for (const Node& stmt : block.children) {
            if (stmt.kind == NodeKind::FunctionDef) analyze_function(stmt);
            else if (stmt.kind == NodeKind::ClassDef) walk_class_body(stmt.children[2]);
        }
    }

    // -- module-level ordered walk: E0602 + WPS440 at module scope --

    BlockScope module_scope;
    std::vector<std::set<std::string>> comp_scopes;

    bool name_is_known(const std::string& name) const {
        if (env.star_import) return true;
        if (env.bound_so_far.count(name)) return true;
        if (registry.contains(name)) return true;
        if (extended_builtin_names().count(name)) return true;
        for (const auto& s : comp_scopes)
            if (s.count(name)) return true;
        return false;
    }

    void check_read(const std::string& name, pyast::Location loc) {
        if (name_is_known(name)) return;
        out.add("E0602", loc.line, "undefined name '" + name + "'", name);
    }

    void module_bind(const std::string& name) { env.bound_so_far.insert(name); }

    // Expression walk in evaluation order; store-context names bind.
    void process_expr(const Node& n) {
        switch (n.kind) {
            case NodeKind::Empty: return;
            case NodeKind::Name:
                if (n.store_ctx) module_bind(n.text);
                else check_read(n.text, n.loc);
                return;
            case NodeKind::Lambda:
                for (const Node& p : n.children[0].children) {
                    process_expr(p.children[0]);
                    process_expr(p.children[1]);
                }
                return;  // body is function level
            case NodeKind::FunctionDef:
            case NodeKind::ClassDef: return;  // handled at statement level
            case NodeKind::Walrus:
                process_expr(n.children[1]);
                module_bind(n.children[0].text);
                return;
            case NodeKind::ListComp:
            case NodeKind::SetComp:
            case NodeKind::DictComp:
            case NodeKind::GeneratorExp: {
                comp_scopes.emplace_back();
                for (size_t k = 1; k < n.children.size(); ++k) {
                    const Node& clause = n.children[k];
                    process_expr(clause.children[1]);  // iterable
                    std::vector<const Node*> targets;
                    collect_binding_names(clause.children[0], targets);
                    for (const Node* t : targets) comp_scopes.back().insert(t->text);
                    for (size_t q = 2; q < clause.children.size(); ++q)
                        process_expr(clause.children[q].children[0]);
                }
                process_expr(n.children[0]);  // element
                comp_scopes.pop_back();
                return;
            }
            default:
                for (const Node& c : n.children) process_expr(c);
                return;
        }
    }

    void process_module_stmt(const Node& stmt) {
        switch (stmt.kind) {
            case NodeKind::Assign: {
                process_expr(stmt.children.back());
                for (size_t k = 0; k + 1 < stmt.children.size(); ++k)
                    process_target(stmt.children[k], false);
                return;
            }
            case NodeKind::AugAssign:
                process_expr(stmt.children[1]);
                if (stmt.children[0].kind == NodeKind::Name)
                    check_read(stmt.children[0].text, stmt.children[0].loc);
                process_target(stmt.children[0], false);
                return;
            case NodeKind::AnnAssign:
                process_expr(stmt.children[1]);
                process_expr(stmt.children[2]);
                process_target(stmt.children[0], false);
                return;
            case NodeKind::ExprStmt:
            case NodeKind::Return:
            case NodeKind::Raise:
            case NodeKind::Assert:
            case NodeKind::Delete:
                for (const Node& c : stmt.children) process_expr(c);
                return;
            case NodeKind::If:
            case NodeKind::While:
                process_expr(stmt.children[0]);
                process_block(stmt.children[1]);
                process_block(stmt.children[2]);
                return;
            case NodeKind::For:
                process_expr(stmt.children[1]);
                process_target(stmt.children[0], true);
                process_block(stmt.children[2]);
                process_block(stmt.children[3]);
                return;
            case NodeKind::With:
                for (const Node& c : stmt.children) {
                    if (c.kind == NodeKind::WithItem) {
                        process_expr(c.children[0]);
                        process_target(c.children[1], true);
                    }
                }
                process_block(stmt.children.back());
                return;
            case NodeKind::Try: {
                process_block(stmt.children[0]);
                for (const Node& h : stmt.children[1].children) {
                    process_expr(h.children[0]);
                    if (!h.text.empty()) {
                        Node fake;
                        fake.kind = NodeKind::Name;
                        fake.text = h.text;
                        fake.loc = h.loc;
                        fake.store_ctx = true;
                        process_target(fake, true);
                    }
                    process_block(h.children[1]);
                }
                process_block(stmt.children[2]);
                process_block(stmt.children[3]);
                return;
            }
            case NodeKind::Match:
                process_expr(stmt.children[0]);
                for (size_t k = 1; k < stmt.children.size(); ++k) {
                    const Node& mc = stmt.children[k];
                    process_target(mc.children[0], false);  // pattern bindings
                    process_expr(mc.children[1]);           // guard
                    process_block(mc.children[2]);
                }
                return;
            case NodeKind::FunctionDef: {
                process_expr(stmt.children[1]);  // decorators
                for (const Node& p : stmt.children[0].children) {
                    process_expr(p.children[0]);
                    process_expr(p.children[1]);
                }
                process_expr(stmt.children[3]);  // return annotation
                module_bind(stmt.text);
                bind_plain_name(stmt.text, module_scope);
                analyze_function(stmt);
                return;
            }
            case NodeKind::ClassDef:
                process_expr(stmt.children[0]);
                process_expr(stmt.children[1]);
                walk_class_body(stmt.children[2]);
                module_bind(stmt.text);
                bind_plain_name(stmt.text, module_scope);
                return;
            case NodeKind::Import:
            case NodeKind::ImportFrom: {
                pyast::SyntaxTree sub;
                sub.root = make_wrapper(stmt);
                for (const auto& b : pyast::extract_facts(sub).imports) {
                    if (b.kind == pyast::ImportBinding::Kind::StarImport)
                        env.star_import = true;
                    if (!b.bound_name.empty()) {
                        module_bind(b.bound_name);
                        bind_plain_name(b.bound_name, module_scope);
                    }
                }
                return;
            }
            default: return;
        }
    }

    // Binds all store-context names of a target; block constructs get the
    // WPS440 overlap check.
    void process_target(const Node& target, bool block_construct) {
        std::function<void(const Node&)> walk = [&](const Node& n) {
            switch (n.kind) {
                case NodeKind::Name:
                    if (n.store_ctx) {
                        if (block_construct) bind_block_name(n, module_scope);
                        else bind_plain_name(n.text, module_scope);
                        module_bind(n.text);
                    } else {
                        check_read(n.text, n.loc);  // bases of a.b = / a[i] =
                    }
                    return;
                case NodeKind::Attribute:
                case NodeKind::Subscript:
                    for (const Node& c : n.children) process_expr(c);
                    return;
                case NodeKind::Pattern:
                case NodeKind::Tuple:
                case NodeKind::List:
                case NodeKind::Starred:
                    for (const Node& c : n.children) walk(c);
                    return;
                case NodeKind::Empty: return;
                default: process_expr(n); return;
            }
        };
        walk(target);
    }

    void process_block(const Node& block) {
        for (const Node& stmt : block.children) process_module_stmt(stmt);
    }

    void run_scope_rules() {
        prescan_module_bindings(tree.root.children);
        for (const Node& stmt : tree.root.children) process_module_stmt(stmt);
    }
};

}  // namespace

std::vector<LintFinding> run_checks(const FlatSource& flat,
                                    const metrics::BuiltinRegistry& registry,
                                    RunStats* stats) {
    Collector out;
    MaskedText masked = mask_text(flat.text);

    check_e231(masked, out);
    check_e226(masked, out);

    pyast::ParseResult parsed = pyast::parse_cell(flat.text);
    if (stats) {
        stats->flat_parse_ok = parsed.ok();
        stats->skipped_ast_rules = parsed.ok() ? 0 : 12;
    }
    if (parsed.ok()) {
        TreeRules rules{*parsed.tree, masked, registry, out, {}, {}, {}};
        rules.check_noeffect(parsed.tree->root);
        rules.check_string_concat(parsed.tree->root);
        rules.check_return_assign(parsed.tree->root);
        rules.check_imports(pyast::extract_facts(*parsed.tree));
        rules.check_import_gap();
        rules.check_trailing_comma();
        rules.run_scope_rules();
    }

    // Locations via the boundary map, then a stable deterministic order.
    for (LintFinding& f : out.findings) {
        auto [cell, local] = flat.locate(f.flat_line);
        f.cell_index = cell;
        f.local_line = local;
    }
    std::sort(out.findings.begin(), out.findings.end(),
              [](const LintFinding& a, const LintFinding& b) {
                  if (a.flat_line != b.flat_line) return a.flat_line < b.flat_line;
                  if (a.rule_id != b.rule_id) return a.rule_id < b.rule_id;
                  return a.message < b.message;
              });
    return out.findings;
}

std::vector<LintFinding> run_checks(const FlatSource& flat,
                                    const std::vector<LintRule>& rules,
                                    const metrics::BuiltinRegistry& registry,
                                    RunStats* stats) {
    std::vector<LintFinding> all = run_checks(flat, registry, stats);
    std::set<std::string> enabled;
    for (const LintRule& r : rules) enabled.insert(r.rule_id);
    std::vector<LintFinding> kept;
    for (LintFinding& f : all)
        if (enabled.count(f.rule_id)) kept.push_back(std::move(f));
    return kept;
}

std::vector<LintFinding> apply_notebook_context(
    std::vector<LintFinding> findings, const FlatSource& flat, const CellDocument& doc,
    const std::vector<std::set<std::string>>& names_bound_by_cell) {
    if (doc.kind != ingest::DocKind::Notebook) return findings;

    // Statement start lines of the flat parse, for cell-tail detection.
    std::set<int> stmt_lines;
    pyast::ParseResult parsed = pyast::parse_cell(flat.text);
    if (parsed.ok()) {
        std::function<void(const Node&)> collect = [&](const Node& n) {
            switch (n.kind) {
                case NodeKind::ExprStmt:
                case NodeKind::Assign:
                case NodeKind::AugAssign:
                case NodeKind::AnnAssign:
                case NodeKind::Return:
                case NodeKind::Raise:
                case NodeKind::Assert:
                case NodeKind::Delete:
                case NodeKind::Pass:
                case NodeKind::Break:
                case NodeKind::Continue:
                case NodeKind::Global:
                case NodeKind::Nonlocal:
                case NodeKind::Import:
                case NodeKind::ImportFrom:
                case NodeKind::If:
                case NodeKind::While:
                case NodeKind::For:
                case NodeKind::Try:
                case NodeKind::With:
                case NodeKind::Match:
                case NodeKind::FunctionDef:
                case NodeKind::ClassDef:
                    stmt_lines.insert(n.loc.line);
                    break;
                default: break;
            }
            for (const Node& c : n.children) collect(c);
        };
        collect(parsed.tree->root);
    }

    // Last flat line of each cell.
    std::map<int, int> cell_last_line;
    for (int l = 1; l <= flat.line_count(); ++l)
        cell_last_line[flat.boundary_map[l].first] = l;

    for (LintFinding& f : findings) {
        if (f.rule_id == "NOEFFECT") {
            int cell_end = cell_last_line[f.cell_index];
            bool later_stmt = false;
            for (auto it = stmt_lines.upper_bound(f.flat_line);
                 it != stmt_lines.end() && *it <= cell_end; ++it) {
                later_stmt = true;
                break;
            }
            if (!later_stmt) {
                f.suppressed = true;
                f.suppression_reason = "cell-tail-display";
            }
        } else if (f.rule_id == "E0602" && !f.symbol.empty()) {
            for (size_t c = size_t(f.cell_index) + 1; c < names_bound_by_cell.size(); ++c) {
                if (names_bound_by_cell[c].count(f.symbol)) {
                    f.suppressed = true;
                    f.suppression_reason = "out-of-order-definition";
                    break;
                }
            }
        }
    }
    return findings;
}

ErrorRates error_rates(const std::vector<LintFinding>& findings, int document_sloc) {
    ErrorRates rates;
    for (const LintFinding& f : findings)
        if (!f.suppressed) ++rates.total;
    if (document_sloc > 0) rates.per_line = double(rates.total) / double(document_sloc);
    return rates;
}

ErrorRates error_rates(const std::vector<LintFinding>& findings,
                       const metrics::DocumentMetrics& doc_metrics) {
    return error_rates(findings, doc_metrics.sloc);
}

std::string format_finding(const std::string& path, const LintFinding& f) {
    std::string line = path + ":" + std::to_string(f.cell_index) + ":" +
                       std::to_string(f.local_line) + " " + f.rule_id + " " + f.message;
    if (f.suppressed) line += " [suppressed:" + f.suppression_reason + "]";
    return line;
}

}  // namespace nbstat::lint
