// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0

#include "nbstat/builtins.hpp"

namespace nbstat::metrics {

const BuiltinRegistry& BuiltinRegistry::standard() {
    // The "Built-in Functions" table of the Python 3.10 reference.
    static const BuiltinRegistry registry(
        "python-3.10",
        {
            "abs",        "aiter",     "all",        "any",       "anext",
            "ascii",      "bin",       "bool",       "breakpoint", "bytearray",
            "bytes",      "callable",  "chr",        "classmethod", "compile",
            "complex",    "delattr",   "dict",       "dir",       "divmod",
            "enumerate",  "eval",      "exec",       "filter",    "float",
            "format",     "frozenset", "getattr",    "globals",   "hasattr",
            "hash",       "help",      "hex",        "id",        "input",
            "int",        "isinstance", "issubclass", "iter",     "len",
            "list",       "locals",    "map",        "max",       "memoryview",
            "min",        "next",      "object",     "oct",       "open",
            "ord",        "pow",       "print",      "property",  "range",
            "repr",       "reversed",  "round",      "set",       "setattr",
            "slice",      "sorted",    "staticmethod", "str",     "sum",
            "super",      "tuple",     "type",       "vars",      "zip",
            "__import__",
        });
    return registry;
}

}  // namespace nbstat::metrics
