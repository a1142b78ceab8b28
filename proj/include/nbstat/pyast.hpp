// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0
//
// Lexical line classification and a self-contained Python parser that
// extracts the syntactic facts (calls, imports, definitions, bound and
// read names, decision points) the metrics and lint layers consume.
// Cells that fail to parse are reported as a ParseFailure value, never
// an exception, so callers can keep the lexical metrics for them.

#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace nbstat::pyast {

struct LineCounts {
    int sloc = 0;
    int blank = 0;
    int comment = 0;

    int total() const { return sloc + blank + comment; }
    bool operator==(const LineCounts&) const = default;
};

// Physical-line buckets: blank, comment (first non-space char is '#'),
// everything else sloc. Lines inside triple-quoted strings are sloc.
// Tolerates syntactically invalid code.
LineCounts classify_lines(std::string_view source);

// 1-based line, 1-based column, cell-local.
struct Location {
    int line = 0;
    int col = 0;
    bool operator==(const Location&) const = default;
};

enum class NodeKind {
    Module,
    // statements
    FunctionDef, ClassDef, If, While, For, Try, ExceptHandler, With, WithItem,
    Match, MatchCase, Return, Delete, Assign, AugAssign, AnnAssign, Raise,
    Assert, Import, ImportFrom, ImportAlias, Global, Nonlocal, ExprStmt,
    Pass, Break, Continue,
    // structural wrappers
    Block, ParamList, Param, DecoratorList, ArgList, KeywordArg, HandlerList,
    // expressions
    BoolOp, BinOp, UnaryOp, Lambda, IfExp, Compare, Call, Attribute,
    Subscript, Name, NumberLit, StringLit, ConstLit, Tuple, List, Dict,
    DictItem, Set, ListComp, SetComp, DictComp, GeneratorExp, CompFor, CompIf,
    Yield, YieldFrom, Await, Starred, DoubleStarred, Slice, Walrus, Pattern,
    Empty,
};

// One tagged node type for the whole tree; the child layout per kind is
// fixed by the parser (see pyast_parser.cpp). `text` holds the name,
// operator, or literal text; `text2` holds secondary names (alias,
// attribute chains do not use it). Name nodes use `store_ctx`/`del_ctx`
// to mark binding and deletion targets.
struct Node {
    NodeKind kind = NodeKind::Empty;
    Location loc;
    std::string text;
    std::string text2;
    std::vector<Node> children;
    bool flag = false;       // is_async / is_fstring / docstring-position / star-import
    bool store_ctx = false;  // Name appears as a binding target
    bool del_ctx = false;    // Name appears under `del`

    bool is(NodeKind k) const { return kind == k; }
};

// Bracketed spans recorded during parsing; the trailing-comma lint rule
// reads these instead of re-walking the tree.
struct BracketSpan {
    enum class Kind { CallArgs, ListDisplay, TupleDisplay, DictDisplay, SetDisplay };
    Kind kind;
    Location open;
    Location close;
    int element_count = 0;
    bool trailing_comma = false;
    bool is_comprehension = false;
};

struct ParseFailure {
    Location loc;
    std::string message;
};

struct SyntaxTree {
    Node root;  // kind == Module
    std::vector<BracketSpan> bracket_spans;
};

struct ParseResult {
    std::optional<SyntaxTree> tree;
    std::optional<ParseFailure> failure;

    bool ok() const { return tree.has_value(); }
};

ParseResult parse_cell(std::string_view source);

struct CallSite {
    enum class Shape { PlainName, DottedPath };
    Shape shape;
    std::string head;       // leftmost identifier; "" when the root is not a name
    std::string full_name;  // dotted path, plain name, or "?"-prefixed when unresolved
    Location loc;
};

struct ImportBinding {
    enum class Kind { ModuleImport, FromImport, StarImport };
    Kind kind;
    std::string bound_name;  // name introduced into scope; "" for star imports
    std::string source_module;
    bool is_dotted = false;  // `import a.b` without alias
    bool aliased = false;    // bound through `as`
    Location loc;
};

struct FunctionDefInfo {
    std::string name;
    int param_count = 0;
    std::set<std::string> calls_inside;  // full_names of calls lexically in the body
    Location loc;
};

struct CellFacts {
    std::vector<CallSite> calls;
    std::vector<ImportBinding> imports;
    std::vector<FunctionDefInfo> defs;
    std::set<std::string> names_read;      // loads, excluding call heads
    std::set<std::string> names_bound;     // targets, params, def/class names, aliases
    std::set<std::string> def_class_names;
    std::set<std::string> top_level_bound;  // bound outside any def/lambda/class body
    int decision_count = 0;
};

CellFacts extract_facts(const SyntaxTree& tree);

}  // namespace nbstat::pyast
