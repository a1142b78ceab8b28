// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0
//
// Single-pass tree walk collecting calls, imports, function definitions,
// name usage, and decision points. Decision points follow the McCabe
// convention used by the metrics layer: if/elif, for, while, except
// handler, assert, conditional expression, comprehension `if` clauses,
// extra operands of boolean-operator chains, and match cases.

#include "nbstat/pyast.hpp"

namespace nbstat::pyast {

namespace {

struct FactWalker {
    CellFacts facts;
    std::vector<size_t> def_stack;  // indices into facts.defs, innermost last
    int function_depth = 0;         // def or lambda bodies
    int class_depth = 0;

    bool at_top_level() const { return function_depth == 0 && class_depth == 0; }

    void bind(const std::string& name) {
        facts.names_bound.insert(name);
        if (at_top_level()) facts.top_level_bound.insert(name);
    }

    void read(const std::string& name) { facts.names_read.insert(name); }

    void record_call_name(const std::string& full) {
        for (size_t idx : def_stack) facts.defs[idx].calls_inside.insert(full);
    }

    // Reduces `a.b.c` chains to (head, dotted path); nullopt when the root
    // is not a plain name.
    static std::optional<std::pair<std::string, std::string>> dotted_chain(const Node& callee) {
        std::vector<const std::string*> attrs;
        const Node* n = &callee;
        while (n->kind == NodeKind::Attribute) {
            attrs.push_back(&n->text);
            n = &n->children[0];
        }
        if (n->kind != NodeKind::Name) return std::nullopt;
        std::string full = n->text;
        for (auto it = attrs.rbegin(); it != attrs.rend(); ++it) {
            full += '.';
            full += **it;
        }
        return std::make_pair(n->text, std::move(full));
    }

    void handle_call(const Node& call) {
        const Node& callee = call.children[0];
        CallSite site;
        site.loc = callee.loc;
        if (auto chain = dotted_chain(callee)) {
            site.head = chain->first;
            site.full_name = chain->second;
            site.shape = site.full_name.find('.') == std::string::npos
                             ? CallSite::Shape::PlainName
                             : CallSite::Shape::DottedPath;
            // The head name lives in the call site, not in names_read.
        } else {
            // Callee rooted in something other than a name; classify later
            // as Other. A trailing attribute chain is kept for uniqueness.
            std::vector<const std::string*> attrs;
            const Node* n = &callee;
            while (n->kind == NodeKind::Attribute) {
                attrs.push_back(&n->text);
                n = &n->children[0];
            }
            if (attrs.empty()) {
                site.head = "?";
                site.full_name = "?";
                site.shape = CallSite::Shape::PlainName;
            } else {
                site.head = "";
                site.full_name = "?";
                for (auto it = attrs.rbegin(); it != attrs.rend(); ++it) {
                    site.full_name += '.';
                    site.full_name += **it;
                }
                site.shape = CallSite::Shape::DottedPath;
            }
            walk(*n);  // the non-name root still contributes reads
        }
        record_call_name(site.full_name);
        facts.calls.push_back(std::move(site));
        walk(call.children[1]);  // arguments
    }

    void handle_import(const Node& stmt) {
        if (stmt.kind == NodeKind::Import) {
            for (const Node& alias : stmt.children) {
                ImportBinding b;
                b.kind = ImportBinding::Kind::ModuleImport;
                b.source_module = alias.text;
                b.loc = alias.loc;
                if (!alias.text2.empty()) {
                    b.bound_name = alias.text2;
                    b.aliased = true;
                } else {
                    b.bound_name = alias.text.substr(0, alias.text.find('.'));
                    b.is_dotted = alias.text.find('.') != std::string::npos;
                }
                if (at_top_level()) facts.top_level_bound.insert(b.bound_name);
                facts.imports.push_back(std::move(b));
            }
            return;
        }
        for (const Node& alias : stmt.children) {
            ImportBinding b;
            b.source_module = stmt.text;
            b.loc = alias.loc;
            if (alias.text == "*") {
                b.kind = ImportBinding::Kind::StarImport;
            } else {
                b.kind = ImportBinding::Kind::FromImport;
                b.bound_name = alias.text2.empty() ? alias.text : alias.text2;
                b.aliased = !alias.text2.empty();
                if (at_top_level()) facts.top_level_bound.insert(b.bound_name);
            }
            facts.imports.push_back(std::move(b));
        }
    }

    void handle_function(const Node& def) {
        const Node& params = def.children[0];
        walk(def.children[1]);  // decorators evaluate in the enclosing scope
        for (const Node& p : params.children) {
            walk(p.children[0]);  // default
            walk(p.children[1]);  // annotation
        }
        walk(def.children[3]);  // return annotation
        bind(def.text);
        facts.def_class_names.insert(def.text);

        FunctionDefInfo info;
        info.name = def.text;
        info.param_count = int(params.children.size());
        info.loc = def.loc;
        facts.defs.push_back(std::move(info));
        def_stack.push_back(facts.defs.size() - 1);
        ++function_depth;
        for (const Node& p : params.children) facts.names_bound.insert(p.text);
        walk(def.children[2]);  // body
        --function_depth;
        def_stack.pop_back();
    }

    void handle_lambda(const Node& lam) {
        const Node& params = lam.children[0];
        for (const Node& p : params.children) {
            walk(p.children[0]);
            walk(p.children[1]);
        }
        ++function_depth;
        for (const Node& p : params.children) facts.names_bound.insert(p.text);
        walk(lam.children[1]);
        --function_depth;
    }

    void handle_class(const Node& cls) {
        walk(cls.children[0]);  // decorators
        walk(cls.children[1]);  // bases
        bind(cls.text);
        facts.def_class_names.insert(cls.text);
        ++class_depth;
        walk(cls.children[2]);
        --class_depth;
    }

    void walk_children(const Node& n) {
        for (const Node& c : n.children) walk(c);
    }

    void walk(const Node& n) {
        switch (n.kind) {
            case NodeKind::Empty: return;
            case NodeKind::Name:
                if (n.store_ctx) bind(n.text);
                else read(n.text);  // del targets count as reads
                return;
            case NodeKind::Call: handle_call(n); return;
            case NodeKind::Import:
            case NodeKind::ImportFrom: handle_import(n); return;
            case NodeKind::FunctionDef: handle_function(n); return;
            case NodeKind::Lambda: handle_lambda(n); return;
            case NodeKind::ClassDef: handle_class(n); return;
            case NodeKind::Global:
            case NodeKind::Nonlocal: return;  // declarations, not uses
            case NodeKind::ExceptHandler:
                ++facts.decision_count;
                if (!n.text.empty()) bind(n.text);
                walk_children(n);
                return;
            case NodeKind::If:
            case NodeKind::While:
            case NodeKind::For:
            case NodeKind::Assert:
            case NodeKind::IfExp:
            case NodeKind::CompIf:
            case NodeKind::MatchCase:
                ++facts.decision_count;
                walk_children(n);
                return;
            case NodeKind::BoolOp:
                facts.decision_count += int(n.children.size()) - 1;
                walk_children(n);
                return;
            case NodeKind::AugAssign:
                // The target is both read and rebound.
                if (n.children[0].kind == NodeKind::Name) read(n.children[0].text);
                walk_children(n);
                return;
            default: walk_children(n); return;
        }
    }
};

}  // namespace

CellFacts extract_facts(const SyntaxTree& tree) {
    FactWalker walker;
    walker.walk(tree.root);
    return walker.facts;
}

}  // namespace nbstat::pyast
