// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0
//
// Recursive-descent parser over the token stream. Child layout per kind:
//
//   Module        [stmt...]
//   FunctionDef   [ParamList, DecoratorList, Block, ret-ann|Empty]   text=name, flag=async
//   ClassDef      [DecoratorList, ArgList, Block]                    text=name
//   If/While     [test, Block, Block(else)]
//   For           [target, iter, Block, Block(else)]                 flag=async
//   Try           [Block, HandlerList, Block(else), Block(finally)]
//   ExceptHandler [type|Empty, Block]                                text=as-name
//   With          [WithItem..., Block]                               flag=async
//   WithItem      [context-expr, target|Empty]
//   Match         [subject, MatchCase...]
//   MatchCase     [Pattern, guard|Empty, Block]
//   Return/Yield  [value|Empty]; YieldFrom/Await/Starred [value]
//   Assign        [target..., value]; AugAssign [target, value] text=op
//   AnnAssign     [target, annotation, value|Empty]
//   Import        [ImportAlias...]; ImportFrom [ImportAlias...] text=module
//   ImportAlias   []  text=dotted name or "*", text2=asname
//   ExprStmt      [expr]                                             flag=docstring position
//   BoolOp        [operand...] text=and|or; BinOp/UnaryOp [..] text=op
//   Lambda        [ParamList, body]; IfExp [body, test, orelse]
//   Compare       [left, comparator...]
//   Call          [callee, ArgList]; KeywordArg [value] text=name
//   Attribute     [value] text=attr; Subscript [value, index]
//   Slice         [lower|Empty, upper|Empty, step|Empty]
//   Tuple/List/Set [elem...]; Dict [DictItem...]; DictItem [key|Empty, value]
//   ListComp/SetComp/GeneratorExp [elem, CompFor...]; DictComp [DictItem, CompFor...]
//   CompFor       [target, iter, CompIf...] flag=async; CompIf [cond]
//   Walrus        [target, value]; Param [default|Empty, ann|Empty] text=name

#include <functional>

#include "pyast_internal.hpp"

namespace nbstat::pyast {

namespace {

Node make(NodeKind kind, Location loc) {
    Node n;
    n.kind = kind;
    n.loc = loc;
    return n;
}

Node empty_node(Location loc) { return make(NodeKind::Empty, loc); }

const char* const kAugOps[] = {"+=", "-=", "*=", "/=", "//=", "%=", "@=",
                               "&=", "|=", "^=", ">>=", "<<=", "**="};

struct Parser {
    const std::vector<Token>& toks;
    size_t i = 0;
    std::vector<BracketSpan> spans;
    int depth = 0;

    // Bounds recursion so pathological nesting (thousands of parentheses
    // or indent levels) reports a ParseFailure instead of overrunning the
    // stack.
    static constexpr int kMaxDepth = 400;
    struct DepthGuard {
        Parser& parser;
        explicit DepthGuard(Parser& p) : parser(p) {
            if (++parser.depth > kMaxDepth) {
                --parser.depth;
                parser.fail("nesting too deep");
            }
        }
        ~DepthGuard() { --parser.depth; }
    };

    explicit Parser(const std::vector<Token>& t) : toks(t) {}

    const Token& cur() const { return toks[i]; }
    const Token& ahead(size_t n) const {
        size_t j = i + n;
        return j < toks.size() ? toks[j] : toks.back();
    }
    void next() {
        if (i + 1 < toks.size()) ++i;
    }

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(cur().loc, msg); }

    bool accept_op(std::string_view s) {
        if (cur().is_op(s)) {
            next();
            return true;
        }
        return false;
    }
    bool accept_kw(std::string_view s) {
        if (cur().is_kw(s)) {
            next();
            return true;
        }
        return false;
    }
    void expect_op(std::string_view s) {
        if (!accept_op(s)) fail(std::string("expected '") + std::string(s) + "'");
    }
    void expect_kw(std::string_view s) {
        if (!accept_kw(s)) fail(std::string("expected '") + std::string(s) + "'");
    }
    void expect_newline() {
        if (cur().kind != TokKind::Newline && cur().kind != TokKind::End)
            fail("invalid syntax");
        if (cur().kind == TokKind::Newline) next();
    }
    std::string expect_name() {
        if (cur().kind != TokKind::Name || cur().is_keyword) fail("expected identifier");
        std::string s = cur().text;
        next();
        return s;
    }

    bool is_aug_op() const {
        if (cur().kind != TokKind::Op) return false;
        for (const char* op : kAugOps)
            if (cur().text == op) return true;
        return false;
    }

    // ---- target contexts -------------------------------------------------

    void set_store(Node& n) {
        switch (n.kind) {
            case NodeKind::Name: n.store_ctx = true; break;
            case NodeKind::Tuple:
            case NodeKind::List:
                for (Node& c : n.children) set_store(c);
                break;
            case NodeKind::Starred: set_store(n.children[0]); break;
            case NodeKind::Attribute:
            case NodeKind::Subscript:
                break;  // base stays a load
            default: throw ParseError(n.loc, "cannot assign to this expression");
        }
    }

    void set_del(Node& n) {
        switch (n.kind) {
            case NodeKind::Name: n.del_ctx = true; break;
            case NodeKind::Tuple:
            case NodeKind::List:
                for (Node& c : n.children) set_del(c);
                break;
            case NodeKind::Attribute:
            case NodeKind::Subscript: break;
            default: throw ParseError(n.loc, "cannot delete this expression");
        }
    }

    static void flag_docstring(std::vector<Node>& stmts) {
        if (!stmts.empty() && stmts[0].kind == NodeKind::ExprStmt &&
            stmts[0].children[0].kind == NodeKind::StringLit)
            stmts[0].flag = true;
    }

    // ---- module ----------------------------------------------------------

    Node parse_module() {
        Node mod = make(NodeKind::Module, {1, 1});
        while (cur().kind != TokKind::End) {
            if (cur().kind == TokKind::Newline) {
                next();
                continue;
            }
            if (cur().kind == TokKind::Indent) fail("unexpected indent");
            if (cur().kind == TokKind::Dedent) {
                next();
                continue;
            }
            parse_statement(mod.children);
        }
        flag_docstring(mod.children);
        return mod;
    }

    // ---- statements --------------------------------------------------------

    void parse_statement(std::vector<Node>& out) {
        const Token& t = cur();
        if (t.is_kw("if")) { out.push_back(parse_if()); return; }
        if (t.is_kw("while")) { out.push_back(parse_while()); return; }
        if (t.is_kw("for")) { out.push_back(parse_for(false)); return; }
        if (t.is_kw("try")) { out.push_back(parse_try()); return; }
        if (t.is_kw("with")) { out.push_back(parse_with(false)); return; }
        if (t.is_kw("def")) { out.push_back(parse_funcdef(false, decorator_list(t.loc))); return; }
        if (t.is_kw("class")) { out.push_back(parse_classdef(decorator_list(t.loc))); return; }
        if (t.is_op("@")) { out.push_back(parse_decorated()); return; }
        if (t.is_kw("async")) { out.push_back(parse_async()); return; }
        if (t.is_name("match")) {
            if (try_parse_match(out)) return;
        }
        parse_simple_line(out);
    }

    Node decorator_list(Location loc) { return make(NodeKind::DecoratorList, loc); }

    Node parse_decorated() {
        Node decorators = decorator_list(cur().loc);
        while (accept_op("@")) {
            decorators.children.push_back(parse_namedexpr());
            expect_newline();
        }
        if (cur().is_kw("def")) return parse_funcdef(false, std::move(decorators));
        if (cur().is_kw("class")) return parse_classdef(std::move(decorators));
        if (cur().is_kw("async")) {
            next();
            return parse_funcdef(true, std::move(decorators));
        }
        fail("expected function or class after decorators");
    }

    Node parse_async() {
        expect_kw("async");
        if (cur().is_kw("def")) return parse_funcdef(true, decorator_list(cur().loc));
        if (cur().is_kw("for")) return parse_for(true);
        if (cur().is_kw("with")) return parse_with(true);
        fail("expected def, for, or with after async");
    }

    void parse_simple_line(std::vector<Node>& out) {
        out.push_back(parse_small_stmt());
        while (accept_op(";")) {
            if (cur().kind == TokKind::Newline || cur().kind == TokKind::End) break;
            out.push_back(parse_small_stmt());
        }
        expect_newline();
    }

    Node parse_small_stmt() {
        const Token& t = cur();
        if (t.is_kw("pass")) { next(); return make(NodeKind::Pass, t.loc); }
        if (t.is_kw("break")) { next(); return make(NodeKind::Break, t.loc); }
        if (t.is_kw("continue")) { next(); return make(NodeKind::Continue, t.loc); }
        if (t.is_kw("return")) return parse_return();
        if (t.is_kw("raise")) return parse_raise();
        if (t.is_kw("del")) return parse_del();
        if (t.is_kw("assert")) return parse_assert();
        if (t.is_kw("global")) return parse_scope_decl(NodeKind::Global);
        if (t.is_kw("nonlocal")) return parse_scope_decl(NodeKind::Nonlocal);
        if (t.is_kw("import")) return parse_import();
        if (t.is_kw("from")) return parse_import_from();
        return parse_expr_or_assign();
    }

    bool at_stmt_end() const {
        return cur().kind == TokKind::Newline || cur().kind == TokKind::End || cur().is_op(";");
    }

    Node parse_return() {
        Node n = make(NodeKind::Return, cur().loc);
        expect_kw("return");
        n.children.push_back(at_stmt_end() ? empty_node(n.loc) : parse_testlist(true));
        return n;
    }

    Node parse_raise() {
        Node n = make(NodeKind::Raise, cur().loc);
        expect_kw("raise");
        if (at_stmt_end()) {
            n.children.push_back(empty_node(n.loc));
            n.children.push_back(empty_node(n.loc));
            return n;
        }
        n.children.push_back(parse_ternary());
        n.children.push_back(accept_kw("from") ? parse_ternary() : empty_node(n.loc));
        return n;
    }

    Node parse_del() {
        Node n = make(NodeKind::Delete, cur().loc);
        expect_kw("del");
        Node target = parse_testlist(false);
        set_del(target);
        n.children.push_back(std::move(target));
        return n;
    }

    Node parse_assert() {
        Node n = make(NodeKind::Assert, cur().loc);
        expect_kw("assert");
        n.children.push_back(parse_ternary());
        n.children.push_back(accept_op(",") ? parse_ternary() : empty_node(n.loc));
        return n;
    }

    Node parse_scope_decl(NodeKind kind) {
        Node n = make(kind, cur().loc);
        next();  // global / nonlocal
        do {
            Node name = make(NodeKind::Name, cur().loc);
            name.text = expect_name();
            n.children.push_back(std::move(name));
        } while (accept_op(","));
        return n;
    }

    std::string parse_dotted_name() {
        std::string path = expect_name();
        while (cur().is_op(".")) {
            next();
            path += '.';
            path += expect_name();
        }
        return path;
    }

    Node parse_import() {
        Node n = make(NodeKind::Import, cur().loc);
        expect_kw("import");
        do {
            Node alias = make(NodeKind::ImportAlias, cur().loc);
            alias.text = parse_dotted_name();
            if (accept_kw("as")) alias.text2 = expect_name();
            n.children.push_back(std::move(alias));
        } while (accept_op(","));
        return n;
    }

    Node parse_import_from() {
        Node n = make(NodeKind::ImportFrom, cur().loc);
        expect_kw("from");
        std::string module;
        while (cur().is_op(".") || cur().is_op("...")) {
            module += cur().text;
            next();
        }
        if (!cur().is_kw("import")) module += parse_dotted_name();
        n.text = std::move(module);
        expect_kw("import");
        if (accept_op("*")) {
            Node alias = make(NodeKind::ImportAlias, cur().loc);
            alias.text = "*";
            n.children.push_back(std::move(alias));
            return n;
        }
        bool parens = accept_op("(");
        do {
            if (parens && cur().is_op(")")) break;  // trailing comma
            Node alias = make(NodeKind::ImportAlias, cur().loc);
            alias.text = expect_name();
            if (accept_kw("as")) alias.text2 = expect_name();
            n.children.push_back(std::move(alias));
        } while (accept_op(","));
        if (parens) expect_op(")");
        return n;
    }

    Node parse_expr_or_assign() {
        Location loc = cur().loc;
        Node first = parse_testlist(true);

        if (cur().is_op("=")) {
            Node assign = make(NodeKind::Assign, loc);
            Node current = std::move(first);
            while (accept_op("=")) {
                set_store(current);
                assign.children.push_back(std::move(current));
                current = cur().is_kw("yield") ? parse_yield() : parse_testlist(true);
            }
            assign.children.push_back(std::move(current));
            return assign;
        }
        if (is_aug_op()) {
            Node aug = make(NodeKind::AugAssign, loc);
            aug.text = cur().text;
            next();
            if (first.kind != NodeKind::Name && first.kind != NodeKind::Attribute &&
                first.kind != NodeKind::Subscript)
                throw ParseError(first.loc, "illegal target for augmented assignment");
            set_store(first);
            aug.children.push_back(std::move(first));
            aug.children.push_back(cur().is_kw("yield") ? parse_yield() : parse_testlist(true));
            return aug;
        }
        if (cur().is_op(":")) {
            next();
            Node ann = make(NodeKind::AnnAssign, loc);
            if (first.kind != NodeKind::Name && first.kind != NodeKind::Attribute &&
                first.kind != NodeKind::Subscript)
                throw ParseError(first.loc, "illegal target for annotation");
            set_store(first);
            ann.children.push_back(std::move(first));
            ann.children.push_back(parse_ternary());
            ann.children.push_back(accept_op("=") ? parse_testlist(true) : empty_node(loc));
            return ann;
        }
        Node stmt = make(NodeKind::ExprStmt, loc);
        stmt.children.push_back(std::move(first));
        return stmt;
    }

    // ---- compound statements ----------------------------------------------

    Node parse_block() {
        DepthGuard guard(*this);
        expect_op(":");
        Node block = make(NodeKind::Block, cur().loc);
        if (cur().kind == TokKind::Newline) {
            next();
            if (cur().kind != TokKind::Indent) fail("expected an indented block");
            next();
            while (cur().kind != TokKind::Dedent && cur().kind != TokKind::End) {
                if (cur().kind == TokKind::Newline) {
                    next();
                    continue;
                }
                parse_statement(block.children);
            }
            if (cur().kind == TokKind::Dedent) next();
        } else {
            parse_simple_line(block.children);
        }
        if (block.children.empty()) fail("expected statements in block");
        return block;
    }

    Node parse_if() {
        Node n = make(NodeKind::If, cur().loc);
        next();  // if / elif
        n.children.push_back(parse_namedexpr());
        n.children.push_back(parse_block());
        Node else_block = make(NodeKind::Block, cur().loc);
        if (cur().is_kw("elif")) {
            else_block.children.push_back(parse_if());
        } else if (accept_kw("else")) {
            else_block = parse_block();
        }
        n.children.push_back(std::move(else_block));
        return n;
    }

    Node parse_while() {
        Node n = make(NodeKind::While, cur().loc);
        expect_kw("while");
        n.children.push_back(parse_namedexpr());
        n.children.push_back(parse_block());
        n.children.push_back(accept_kw("else") ? parse_block() : make(NodeKind::Block, cur().loc));
        return n;
    }

    Node parse_for(bool is_async) {
        Node n = make(NodeKind::For, cur().loc);
        n.flag = is_async;
        expect_kw("for");
        // Targets parse at postfix level so `in` stays the loop keyword.
        Node target = parse_testlist_no_cond(true);
        set_store(target);
        n.children.push_back(std::move(target));
        expect_kw("in");
        n.children.push_back(parse_testlist(true));
        n.children.push_back(parse_block());
        n.children.push_back(accept_kw("else") ? parse_block() : make(NodeKind::Block, cur().loc));
        return n;
    }

    Node parse_try() {
        Node n = make(NodeKind::Try, cur().loc);
        expect_kw("try");
        n.children.push_back(parse_block());
        Node handlers = make(NodeKind::HandlerList, cur().loc);
        while (cur().is_kw("except")) {
            Node handler = make(NodeKind::ExceptHandler, cur().loc);
            next();
            accept_op("*");  // except* groups count like plain handlers
            if (cur().is_op(":")) {
                handler.children.push_back(empty_node(handler.loc));
            } else {
                handler.children.push_back(parse_ternary());
                if (accept_kw("as")) handler.text = expect_name();
            }
            handler.children.push_back(parse_block());
            handlers.children.push_back(std::move(handler));
        }
        bool has_handlers = !handlers.children.empty();
        n.children.push_back(std::move(handlers));
        n.children.push_back(accept_kw("else") ? parse_block() : make(NodeKind::Block, cur().loc));
        if (accept_kw("finally")) {
            n.children.push_back(parse_block());
        } else {
            if (!has_handlers) fail("expected 'except' or 'finally'");
            n.children.push_back(make(NodeKind::Block, cur().loc));
        }
        return n;
    }

    Node parse_with_item() {
        Node item = make(NodeKind::WithItem, cur().loc);
        item.children.push_back(parse_ternary());
        if (accept_kw("as")) {
            Node target = parse_postfix_target();
            set_store(target);
            item.children.push_back(std::move(target));
        } else {
            item.children.push_back(empty_node(item.loc));
        }
        return item;
    }

    Node parse_with(bool is_async) {
        Node n = make(NodeKind::With, cur().loc);
        n.flag = is_async;
        expect_kw("with");
        // Parenthesized item lists are ambiguous with tuple expressions;
        // try the item-list reading first and back off on failure.
        if (cur().is_op("(")) {
            size_t mark = i;
            size_t span_mark = spans.size();
            try {
                next();
                std::vector<Node> items;
                items.push_back(parse_with_item());
                while (accept_op(",")) {
                    if (cur().is_op(")")) break;
                    items.push_back(parse_with_item());
                }
                expect_op(")");
                if (!cur().is_op(":")) fail("expected ':'");
                for (Node& item : items) n.children.push_back(std::move(item));
                n.children.push_back(parse_block());
                return n;
            } catch (const ParseError&) {
                i = mark;
                spans.resize(span_mark);
            }
        }
        n.children.push_back(parse_with_item());
        while (accept_op(",")) n.children.push_back(parse_with_item());
        n.children.push_back(parse_block());
        return n;
    }

    // A with/except target: generally a name, occasionally an attribute
    // or subscript.
    Node parse_postfix_target() { return parse_postfix(); }

    Node parse_funcdef(bool is_async, Node decorators) {
        Node n = make(NodeKind::FunctionDef, cur().loc);
        n.flag = is_async;
        expect_kw("def");
        n.text = expect_name();
        expect_op("(");
        n.children.push_back(parse_param_list(/*lambda_form=*/false));
        expect_op(")");
        Node ret_ann = accept_op("->") ? parse_ternary() : empty_node(n.loc);
        n.children.push_back(std::move(decorators));
        Node body = parse_block();
        flag_docstring(body.children);
        n.children.push_back(std::move(body));
        n.children.push_back(std::move(ret_ann));
        return n;
    }

    Node parse_classdef(Node decorators) {
        Node n = make(NodeKind::ClassDef, cur().loc);
        expect_kw("class");
        n.text = expect_name();
        n.children.push_back(std::move(decorators));
        Node bases = make(NodeKind::ArgList, cur().loc);
        if (accept_op("(")) {
            while (!cur().is_op(")")) {
                bases.children.push_back(parse_call_arg());
                if (!accept_op(",")) break;
            }
            expect_op(")");
        }
        n.children.push_back(std::move(bases));
        Node body = parse_block();
        flag_docstring(body.children);
        n.children.push_back(std::move(body));
        return n;
    }

    Node parse_param_list(bool lambda_form) {
        Node params = make(NodeKind::ParamList, cur().loc);
        auto at_end = [&] { return lambda_form ? cur().is_op(":") : cur().is_op(")"); };
        while (!at_end()) {
            if (accept_op("/")) {
                if (!accept_op(",")) break;
                continue;
            }
            if (accept_op("*")) {
                if (cur().kind == TokKind::Name && !cur().is_keyword) {
                    params.children.push_back(parse_param(lambda_form));
                }
                if (!accept_op(",")) break;
                continue;
            }
            if (accept_op("**")) {
                params.children.push_back(parse_param(lambda_form));
                accept_op(",");
                break;
            }
            params.children.push_back(parse_param(lambda_form));
            if (!accept_op(",")) break;
        }
        return params;
    }

    Node parse_param(bool lambda_form) {
        Node p = make(NodeKind::Param, cur().loc);
        p.text = expect_name();
        Node ann = empty_node(p.loc);
        if (!lambda_form && accept_op(":")) ann = parse_ternary();
        Node def = accept_op("=") ? parse_ternary() : empty_node(p.loc);
        p.children.push_back(std::move(def));
        p.children.push_back(std::move(ann));
        return p;
    }

    bool try_parse_match(std::vector<Node>& out) {
        size_t mark = i;
        size_t span_mark = spans.size();
        try {
            Node n = make(NodeKind::Match, cur().loc);
            next();  // 'match'
            n.children.push_back(parse_testlist(true));
            expect_op(":");
            if (cur().kind != TokKind::Newline) fail("expected newline after match subject");
            next();
            if (cur().kind != TokKind::Indent) fail("expected an indented block");
            next();
            if (!cur().is_name("case")) fail("expected 'case'");
            while (cur().is_name("case")) {
                Node c = make(NodeKind::MatchCase, cur().loc);
                next();
                c.children.push_back(parse_patterns());
                c.children.push_back(accept_kw("if") ? parse_namedexpr() : empty_node(c.loc));
                c.children.push_back(parse_block());
                while (cur().kind == TokKind::Newline) next();
                n.children.push_back(std::move(c));
            }
            if (cur().kind == TokKind::Dedent) next();
            out.push_back(std::move(n));
            return true;
        } catch (const ParseError&) {
            i = mark;
            spans.resize(span_mark);
            return false;
        }
    }

    // ---- match patterns (loose) --------------------------------------------

    Node parse_patterns() {
        Node pat = make(NodeKind::Pattern, cur().loc);
        pat.children.push_back(parse_or_pattern());
        while (accept_op(",")) {
            if (cur().is_op(":") || cur().is_kw("if")) break;
            pat.children.push_back(parse_or_pattern());
        }
        return pat;
    }

    Node parse_or_pattern() {
        Node p = parse_as_pattern();
        if (!cur().is_op("|")) return p;
        Node alt = make(NodeKind::Pattern, p.loc);
        alt.children.push_back(std::move(p));
        while (accept_op("|")) alt.children.push_back(parse_as_pattern());
        return alt;
    }

    Node parse_as_pattern() {
        Node p = parse_closed_pattern();
        if (accept_kw("as")) {
            Node wrapper = make(NodeKind::Pattern, p.loc);
            wrapper.children.push_back(std::move(p));
            Node bind = make(NodeKind::Name, cur().loc);
            bind.text = expect_name();
            bind.store_ctx = true;
            wrapper.children.push_back(std::move(bind));
            return wrapper;
        }
        return p;
    }

    Node parse_closed_pattern() {
        const Token& t = cur();
        if (t.is_op("(") || t.is_op("[")) {
            std::string close = t.is_op("(") ? ")" : "]";
            next();
            Node seq = make(NodeKind::Pattern, t.loc);
            while (!cur().is_op(close)) {
                seq.children.push_back(parse_or_pattern());
                if (!accept_op(",")) break;
            }
            expect_op(close);
            return seq;
        }
        if (t.is_op("{")) {
            next();
            Node map = make(NodeKind::Pattern, t.loc);
            while (!cur().is_op("}")) {
                if (accept_op("**")) {
                    Node bind = make(NodeKind::Name, cur().loc);
                    bind.text = expect_name();
                    bind.store_ctx = true;
                    map.children.push_back(std::move(bind));
                } else {
                    map.children.push_back(parse_atom_pattern_value());
                    expect_op(":");
                    map.children.push_back(parse_or_pattern());
                }
                if (!accept_op(",")) break;
            }
            expect_op("}");
            return map;
        }
        if (t.is_op("*")) {
            next();
            if (cur().is_name("_")) {  // *_ discards, binds nothing
                Node wild = make(NodeKind::ConstLit, cur().loc);
                wild.text = "_";
                next();
                return wild;
            }
            Node bind = make(NodeKind::Name, cur().loc);
            bind.text = expect_name();
            bind.store_ctx = true;
            return bind;
        }
        if (t.kind == TokKind::Name && !t.is_keyword) {
            // capture, value (dotted), or class pattern
            if (ahead(1).is_op(".") || ahead(1).is_op("(")) {
                Node value = make(NodeKind::Name, t.loc);
                value.text = expect_name();
                Node expr = std::move(value);
                while (cur().is_op(".")) {
                    next();
                    Node attr = make(NodeKind::Attribute, expr.loc);
                    attr.text = expect_name();
                    attr.children.push_back(std::move(expr));
                    expr = std::move(attr);
                }
                if (accept_op("(")) {
                    Node cls = make(NodeKind::Pattern, t.loc);
                    cls.children.push_back(std::move(expr));
                    while (!cur().is_op(")")) {
                        if (cur().kind == TokKind::Name && !cur().is_keyword &&
                            ahead(1).is_op("=")) {
                            next();
                            next();
                        }
                        cls.children.push_back(parse_or_pattern());
                        if (!accept_op(",")) break;
                    }
                    expect_op(")");
                    return cls;
                }
                return expr;
            }
            if (t.text == "_") {  // wildcard pattern binds nothing
                Node wild = make(NodeKind::ConstLit, t.loc);
                wild.text = "_";
                next();
                return wild;
            }
            Node bind = make(NodeKind::Name, t.loc);
            bind.text = expect_name();
            bind.store_ctx = true;
            return bind;
        }
        return parse_atom_pattern_value();
    }

    // Literal-ish pattern atoms: numbers (optionally signed), strings,
    // None/True/False.
    Node parse_atom_pattern_value() {
        const Token& t = cur();
        if (t.is_op("-") || t.is_op("+")) {
            Node op = make(NodeKind::UnaryOp, t.loc);
            op.text = t.text;
            next();
            op.children.push_back(parse_atom_pattern_value());
            return op;
        }
        if (t.kind == TokKind::Number) {
            Node num = make(NodeKind::NumberLit, t.loc);
            num.text = t.text;
            next();
            return num;
        }
        if (t.kind == TokKind::String) {
            Node s = make(NodeKind::StringLit, t.loc);
            s.text = t.text;
            s.flag = t.is_fstring;
            next();
            return s;
        }
        if (t.is_kw("None") || t.is_kw("True") || t.is_kw("False")) {
            Node c = make(NodeKind::ConstLit, t.loc);
            c.text = t.text;
            next();
            return c;
        }
        if (t.kind == TokKind::Name && !t.is_keyword) {
            Node value = make(NodeKind::Name, t.loc);
            value.text = expect_name();
            while (cur().is_op(".")) {
                next();
                Node attr = make(NodeKind::Attribute, value.loc);
                attr.text = expect_name();
                attr.children.push_back(std::move(value));
                value = std::move(attr);
            }
            return value;
        }
        fail("invalid pattern");
    }

    // ---- expressions -------------------------------------------------------

    bool could_start_expr() const {
        const Token& t = cur();
        switch (t.kind) {
            case TokKind::Name:
                if (!t.is_keyword) return true;
                return t.is_kw("lambda") || t.is_kw("not") || t.is_kw("None") ||
                       t.is_kw("True") || t.is_kw("False") || t.is_kw("await");
            case TokKind::Number:
            case TokKind::String: return true;
            case TokKind::Op:
                return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "+" ||
                       t.text == "-" || t.text == "~" || t.text == "*" || t.text == "**" ||
                       t.text == "...";
            default: return false;
        }
    }

    // testlist: element (',' element)* — builds a Tuple when a comma appears.
    Node parse_testlist(bool allow_star) {
        Location loc = cur().loc;
        Node first = parse_star_or_namedexpr(allow_star);
        if (!cur().is_op(",")) return first;
        Node tuple = make(NodeKind::Tuple, loc);
        tuple.children.push_back(std::move(first));
        while (accept_op(",")) {
            if (!could_start_expr()) break;
            tuple.children.push_back(parse_star_or_namedexpr(allow_star));
        }
        return tuple;
    }

    Node parse_star_or_namedexpr(bool allow_star) {
        if (allow_star && cur().is_op("*")) {
            Node star = make(NodeKind::Starred, cur().loc);
            next();
            star.children.push_back(parse_or_expr_chain());
            return star;
        }
        return parse_namedexpr();
    }

    Node parse_yield() {
        Node n = make(NodeKind::Yield, cur().loc);
        expect_kw("yield");
        if (accept_kw("from")) {
            Node yf = make(NodeKind::YieldFrom, n.loc);
            yf.children.push_back(parse_ternary());
            return yf;
        }
        if (at_stmt_end() || cur().is_op(")") || cur().is_op("]") || cur().is_op("}")) {
            n.children.push_back(empty_node(n.loc));
            return n;
        }
        n.children.push_back(parse_testlist(true));
        return n;
    }

    Node parse_namedexpr() {
        if (cur().is_kw("yield")) return parse_yield();
        Node expr = parse_ternary();
        if (cur().is_op(":=")) {
            if (expr.kind != NodeKind::Name) fail("invalid walrus target");
            next();
            Node walrus = make(NodeKind::Walrus, expr.loc);
            expr.store_ctx = true;
            walrus.children.push_back(std::move(expr));
            walrus.children.push_back(parse_ternary());
            return walrus;
        }
        return expr;
    }

    Node parse_ternary() {
        DepthGuard guard(*this);
        if (cur().is_kw("lambda")) return parse_lambda();
        Node body = parse_or_expr_chain();
        if (!cur().is_kw("if")) return body;
        next();
        Node n = make(NodeKind::IfExp, body.loc);
        n.children.push_back(std::move(body));
        n.children.push_back(parse_or_expr_chain());
        expect_kw("else");
        n.children.push_back(parse_ternary());
        return n;
    }

    Node parse_lambda() {
        Node n = make(NodeKind::Lambda, cur().loc);
        expect_kw("lambda");
        n.children.push_back(parse_param_list(/*lambda_form=*/true));
        expect_op(":");
        n.children.push_back(parse_ternary());
        return n;
    }

    Node parse_or_expr_chain() { return parse_bool_chain("or", [&] { return parse_and_chain(); }); }
    Node parse_and_chain() { return parse_bool_chain("and", [&] { return parse_not(); }); }

    Node parse_bool_chain(const char* op, const std::function<Node()>& sub) {
        Node first = sub();
        if (!cur().is_kw(op)) return first;
        Node chain = make(NodeKind::BoolOp, first.loc);
        chain.text = op;
        chain.children.push_back(std::move(first));
        while (accept_kw(op)) chain.children.push_back(sub());
        return chain;
    }

    Node parse_not() {
        if (cur().is_kw("not")) {
            Node n = make(NodeKind::UnaryOp, cur().loc);
            n.text = "not";
            next();
            n.children.push_back(parse_not());
            return n;
        }
        return parse_comparison();
    }

    Node parse_comparison() {
        Node left = parse_bitor();
        Node cmp = make(NodeKind::Compare, left.loc);
        bool any = false;
        while (true) {
            std::string op;
            if (cur().is_op("<") || cur().is_op(">") || cur().is_op("<=") || cur().is_op(">=") ||
                cur().is_op("==") || cur().is_op("!=")) {
                op = cur().text;
                next();
            } else if (cur().is_kw("in")) {
                op = "in";
                next();
            } else if (cur().is_kw("not") && ahead(1).is_kw("in")) {
                op = "not in";
                next();
                next();
            } else if (cur().is_kw("is")) {
                next();
                op = accept_kw("not") ? "is not" : "is";
            } else {
                break;
            }
            if (!any) {
                cmp.children.push_back(std::move(left));
                any = true;
            }
            if (!cmp.text.empty()) cmp.text += ',';
            cmp.text += op;
            cmp.children.push_back(parse_bitor());
        }
        return any ? std::move(cmp) : std::move(left);
    }

    Node parse_binop_level(const std::vector<std::string_view>& ops,
                           const std::function<Node()>& sub) {
        Node left = sub();
        int chain = 0;
        while (cur().kind == TokKind::Op) {
            bool matched = false;
            for (std::string_view op : ops) {
                if (cur().text == op) {
                    if (++chain > 2000) fail("operator chain too long");
                    Node bin = make(NodeKind::BinOp, left.loc);
                    bin.text = cur().text;
                    next();
                    bin.children.push_back(std::move(left));
                    bin.children.push_back(sub());
                    left = std::move(bin);
                    matched = true;
                    break;
                }
            }
            if (!matched) break;
        }
        return left;
    }

    Node parse_bitor() { return parse_binop_level({"|"}, [&] { return parse_bitxor(); }); }
    Node parse_bitxor() { return parse_binop_level({"^"}, [&] { return parse_bitand(); }); }
    Node parse_bitand() { return parse_binop_level({"&"}, [&] { return parse_shift(); }); }
    Node parse_shift() { return parse_binop_level({"<<", ">>"}, [&] { return parse_arith(); }); }
    Node parse_arith() { return parse_binop_level({"+", "-"}, [&] { return parse_term(); }); }
    Node parse_term() {
        return parse_binop_level({"*", "/", "//", "%", "@"}, [&] { return parse_factor(); });
    }

    Node parse_factor() {
        DepthGuard guard(*this);
        if (cur().is_op("+") || cur().is_op("-") || cur().is_op("~")) {
            Node n = make(NodeKind::UnaryOp, cur().loc);
            n.text = cur().text;
            next();
            n.children.push_back(parse_factor());
            return n;
        }
        return parse_power();
    }

    Node parse_power() {
        Node base = parse_await_or_postfix();
        if (cur().is_op("**")) {
            Node n = make(NodeKind::BinOp, base.loc);
            n.text = "**";
            next();
            n.children.push_back(std::move(base));
            n.children.push_back(parse_factor());
            return n;
        }
        return base;
    }

    Node parse_await_or_postfix() {
        if (cur().is_kw("await")) {
            Node n = make(NodeKind::Await, cur().loc);
            next();
            n.children.push_back(parse_await_or_postfix());
            return n;
        }
        return parse_postfix();
    }

    Node parse_postfix() {
        Node expr = parse_atom();
        while (true) {
            if (cur().is_op("(")) {
                expr = parse_call(std::move(expr));
            } else if (cur().is_op("[")) {
                expr = parse_subscript(std::move(expr));
            } else if (cur().is_op(".")) {
                next();
                Node attr = make(NodeKind::Attribute, expr.loc);
                attr.text = expect_name();
                attr.children.push_back(std::move(expr));
                expr = std::move(attr);
            } else {
                break;
            }
        }
        return expr;
    }

    Node parse_call_arg() {
        if (cur().is_op("*")) {
            Node star = make(NodeKind::Starred, cur().loc);
            next();
            star.children.push_back(parse_ternary());
            return star;
        }
        if (cur().is_op("**")) {
            Node dstar = make(NodeKind::DoubleStarred, cur().loc);
            next();
            dstar.children.push_back(parse_ternary());
            return dstar;
        }
        if (cur().kind == TokKind::Name && !cur().is_keyword && ahead(1).is_op("=")) {
            Node kw = make(NodeKind::KeywordArg, cur().loc);
            kw.text = expect_name();
            expect_op("=");
            kw.children.push_back(parse_ternary());
            return kw;
        }
        return parse_namedexpr();
    }

    Node parse_call(Node callee) {
        Location open = cur().loc;
        expect_op("(");
        Node call = make(NodeKind::Call, callee.loc);
        Node args = make(NodeKind::ArgList, open);
        bool comprehension = false;
        while (!cur().is_op(")")) {
            Node arg = parse_call_arg();
            if (cur().is_kw("for") || (cur().is_kw("async") && ahead(1).is_kw("for"))) {
                Node gen = make(NodeKind::GeneratorExp, arg.loc);
                gen.children.push_back(std::move(arg));
                parse_comp_clauses(gen);
                args.children.push_back(std::move(gen));
                comprehension = true;
                break;
            }
            args.children.push_back(std::move(arg));
            if (!accept_op(",")) break;
        }
        bool trailing = i > 0 && toks[i - 1].is_op(",");
        Location close = cur().loc;
        expect_op(")");
        spans.push_back({BracketSpan::Kind::CallArgs, open, close,
                         int(args.children.size()), trailing, comprehension});
        call.children.push_back(std::move(callee));
        call.children.push_back(std::move(args));
        return call;
    }

    Node parse_subscript(Node value) {
        expect_op("[");
        Node sub = make(NodeKind::Subscript, value.loc);
        std::vector<Node> items;
        while (!cur().is_op("]")) {
            items.push_back(parse_slice_item());
            if (!accept_op(",")) break;
        }
        expect_op("]");
        Node index;
        if (items.size() == 1) {
            index = std::move(items[0]);
        } else {
            index = make(NodeKind::Tuple, sub.loc);
            index.children = std::move(items);
        }
        sub.children.push_back(std::move(value));
        sub.children.push_back(std::move(index));
        return sub;
    }

    Node parse_slice_item() {
        Location loc = cur().loc;
        Node lower = empty_node(loc);
        bool is_slice = false;
        if (!cur().is_op(":")) {
            if (cur().is_op("*")) {
                Node star = make(NodeKind::Starred, loc);
                next();
                star.children.push_back(parse_ternary());
                return star;
            }
            lower = parse_namedexpr();
        }
        if (cur().is_op(":")) {
            is_slice = true;
            next();
            Node upper = (cur().is_op(":") || cur().is_op("]") || cur().is_op(","))
                             ? empty_node(cur().loc)
                             : parse_ternary();
            Node step = empty_node(cur().loc);
            if (accept_op(":")) {
                if (!cur().is_op("]") && !cur().is_op(",")) step = parse_ternary();
            }
            Node slice = make(NodeKind::Slice, loc);
            slice.children.push_back(std::move(lower));
            slice.children.push_back(std::move(upper));
            slice.children.push_back(std::move(step));
            return slice;
        }
        (void)is_slice;
        return lower;
    }

    void parse_comp_clauses(Node& comp) {
        while (true) {
            bool is_async = false;
            if (cur().is_kw("async") && ahead(1).is_kw("for")) {
                next();
                is_async = true;
            }
            if (!cur().is_kw("for")) break;
            Node clause = make(NodeKind::CompFor, cur().loc);
            clause.flag = is_async;
            next();
            Node target = parse_testlist_no_cond(false);
            set_store(target);
            clause.children.push_back(std::move(target));
            expect_kw("in");
            clause.children.push_back(parse_or_no_cond());
            while (cur().is_kw("if")) {
                Node cond = make(NodeKind::CompIf, cur().loc);
                next();
                cond.children.push_back(parse_or_no_cond_with_walrus());
                clause.children.push_back(std::move(cond));
            }
            comp.children.push_back(std::move(clause));
        }
    }

    // Comprehension iterables/targets must stop before 'if' and 'for'
    // keywords; plain or-chains do that naturally.
    Node parse_or_no_cond() { return parse_or_expr_chain(); }
    Node parse_or_no_cond_with_walrus() {
        Node expr = parse_or_expr_chain();
        if (cur().is_op(":=")) {
            if (expr.kind != NodeKind::Name) fail("invalid walrus target");
            next();
            Node walrus = make(NodeKind::Walrus, expr.loc);
            expr.store_ctx = true;
            walrus.children.push_back(std::move(expr));
            walrus.children.push_back(parse_ternary());
            return walrus;
        }
        return expr;
    }

    Node parse_testlist_no_cond(bool allow_star) {
        Location loc = cur().loc;
        auto elem = [&]() -> Node {
            if (allow_star || cur().is_op("*")) {
                if (cur().is_op("*")) {
                    Node star = make(NodeKind::Starred, cur().loc);
                    next();
                    star.children.push_back(parse_postfix());
                    return star;
                }
            }
            return parse_postfix();
        };
        Node first = elem();
        if (!cur().is_op(",")) return first;
        Node tuple = make(NodeKind::Tuple, loc);
        tuple.children.push_back(std::move(first));
        while (accept_op(",")) {
            if (cur().is_kw("in")) break;
            tuple.children.push_back(elem());
        }
        return tuple;
    }

    Node parse_atom() {
        const Token& t = cur();
        switch (t.kind) {
            case TokKind::Name: {
                if (t.is_kw("None") || t.is_kw("True") || t.is_kw("False")) {
                    Node c = make(NodeKind::ConstLit, t.loc);
                    c.text = t.text;
                    next();
                    return c;
                }
                // `lambda` lives at conditional-expression level only;
                // accepting it here would let it bind as a binary operand.
                if (t.is_keyword) fail("unexpected keyword '" + t.text + "'");
                Node name = make(NodeKind::Name, t.loc);
                name.text = t.text;
                next();
                return name;
            }
            case TokKind::Number: {
                Node num = make(NodeKind::NumberLit, t.loc);
                num.text = t.text;
                next();
                return num;
            }
            case TokKind::String: {
                Node s = make(NodeKind::StringLit, t.loc);
                s.text = t.text;
                s.flag = t.is_fstring;
                next();
                // Implicit concatenation folds into a single literal node.
                while (cur().kind == TokKind::String) {
                    s.flag = s.flag || cur().is_fstring;
                    s.text += cur().text;
                    next();
                }
                return s;
            }
            case TokKind::Op: {
                if (t.text == "(") return parse_paren_atom();
                if (t.text == "[") return parse_list_atom();
                if (t.text == "{") return parse_brace_atom();
                if (t.text == "...") {
                    Node c = make(NodeKind::ConstLit, t.loc);
                    c.text = "...";
                    next();
                    return c;
                }
                fail("unexpected token '" + t.text + "'");
            }
            default: fail("unexpected end of input");
        }
    }

    Node parse_paren_atom() {
        Location open = cur().loc;
        expect_op("(");
        if (cur().is_op(")")) {
            Location close = cur().loc;
            next();
            spans.push_back({BracketSpan::Kind::TupleDisplay, open, close, 0, false, false});
            return make(NodeKind::Tuple, open);
        }
        if (cur().is_kw("yield")) {
            Node y = parse_yield();
            expect_op(")");
            return y;
        }
        Node first = parse_star_or_namedexpr(true);
        if (cur().is_kw("for") || (cur().is_kw("async") && ahead(1).is_kw("for"))) {
            Node gen = make(NodeKind::GeneratorExp, open);
            gen.children.push_back(std::move(first));
            parse_comp_clauses(gen);
            expect_op(")");
            return gen;
        }
        if (cur().is_op(",")) {
            Node tuple = make(NodeKind::Tuple, open);
            tuple.children.push_back(std::move(first));
            while (accept_op(",")) {
                if (cur().is_op(")")) break;
                tuple.children.push_back(parse_star_or_namedexpr(true));
            }
            bool trailing = toks[i - 1].is_op(",");
            Location close = cur().loc;
            expect_op(")");
            spans.push_back({BracketSpan::Kind::TupleDisplay, open, close,
                             int(tuple.children.size()), trailing, false});
            return tuple;
        }
        expect_op(")");
        return first;  // plain grouping parentheses
    }

    Node parse_list_atom() {
        Location open = cur().loc;
        expect_op("[");
        if (cur().is_op("]")) {
            Location close = cur().loc;
            next();
            spans.push_back({BracketSpan::Kind::ListDisplay, open, close, 0, false, false});
            return make(NodeKind::List, open);
        }
        Node first = parse_star_or_namedexpr(true);
        if (cur().is_kw("for") || (cur().is_kw("async") && ahead(1).is_kw("for"))) {
            Node comp = make(NodeKind::ListComp, open);
            comp.children.push_back(std::move(first));
            parse_comp_clauses(comp);
            Location close = cur().loc;
            expect_op("]");
            spans.push_back({BracketSpan::Kind::ListDisplay, open, close, 1, false, true});
            return comp;
        }
        Node list = make(NodeKind::List, open);
        list.children.push_back(std::move(first));
        while (accept_op(",")) {
            if (cur().is_op("]")) break;
            list.children.push_back(parse_star_or_namedexpr(true));
        }
        bool trailing = toks[i - 1].is_op(",");
        Location close = cur().loc;
        expect_op("]");
        spans.push_back({BracketSpan::Kind::ListDisplay, open, close,
                         int(list.children.size()), trailing, false});
        return list;
    }

    Node parse_brace_atom() {
        Location open = cur().loc;
        expect_op("{");
        if (cur().is_op("}")) {
            Location close = cur().loc;
            next();
            spans.push_back({BracketSpan::Kind::DictDisplay, open, close, 0, false, false});
            return make(NodeKind::Dict, open);
        }
        // Disambiguate dict vs set by the first element.
        if (cur().is_op("**")) {
            Node dict = make(NodeKind::Dict, open);
            parse_dict_items(dict, open);
            return dict;
        }
        Node first = parse_star_or_namedexpr(true);
        if (cur().is_op(":")) {
            next();
            Node item = make(NodeKind::DictItem, first.loc);
            item.children.push_back(std::move(first));
            item.children.push_back(parse_ternary());
            if (cur().is_kw("for") || (cur().is_kw("async") && ahead(1).is_kw("for"))) {
                Node comp = make(NodeKind::DictComp, open);
                comp.children.push_back(std::move(item));
                parse_comp_clauses(comp);
                Location close = cur().loc;
                expect_op("}");
                spans.push_back({BracketSpan::Kind::DictDisplay, open, close, 1, false, true});
                return comp;
            }
            Node dict = make(NodeKind::Dict, open);
            dict.children.push_back(std::move(item));
            if (accept_op(",")) parse_dict_items(dict, open);
            else finish_dict(dict, open);
            return dict;
        }
        if (cur().is_kw("for") || (cur().is_kw("async") && ahead(1).is_kw("for"))) {
            Node comp = make(NodeKind::SetComp, open);
            comp.children.push_back(std::move(first));
            parse_comp_clauses(comp);
            Location close = cur().loc;
            expect_op("}");
            spans.push_back({BracketSpan::Kind::SetDisplay, open, close, 1, false, true});
            return comp;
        }
        Node set = make(NodeKind::Set, open);
        set.children.push_back(std::move(first));
        while (accept_op(",")) {
            if (cur().is_op("}")) break;
            set.children.push_back(parse_star_or_namedexpr(true));
        }
        bool trailing = toks[i - 1].is_op(",");
        Location close = cur().loc;
        expect_op("}");
        spans.push_back({BracketSpan::Kind::SetDisplay, open, close,
                         int(set.children.size()), trailing, false});
        return set;
    }

    void parse_dict_items(Node& dict, Location open) {
        while (!cur().is_op("}")) {
            Node item = make(NodeKind::DictItem, cur().loc);
            if (accept_op("**")) {
                item.children.push_back(empty_node(item.loc));
                item.children.push_back(parse_or_expr_chain());
            } else {
                item.children.push_back(parse_ternary());
                expect_op(":");
                item.children.push_back(parse_ternary());
            }
            dict.children.push_back(std::move(item));
            if (!accept_op(",")) break;
        }
        finish_dict(dict, open);
    }

    void finish_dict(Node& dict, Location open) {
        bool trailing = i > 0 && toks[i - 1].is_op(",");
        Location close = cur().loc;
        expect_op("}");
        spans.push_back({BracketSpan::Kind::DictDisplay, open, close,
                         int(dict.children.size()), trailing, false});
    }
};

}  // namespace

ParseResult parse_cell(std::string_view source) {
    ParseResult result;
    try {
        std::vector<Token> toks = tokenize(source);
        Parser parser(toks);
        SyntaxTree tree;
        tree.root = parser.parse_module();
        tree.bracket_spans = std::move(parser.spans);
        result.tree = std::move(tree);
    } catch (const ParseError& e) {
        result.failure = ParseFailure{e.loc, e.what()};
    }
    return result;
}

}  // namespace nbstat::pyast
