// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0
//
// Parses notebook JSON and plain scripts into the uniform CellDocument
// model. A script becomes a document with a single code cell, so the
// rest of the pipeline sees one shape.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nbstat::ingest {

enum class CellType { Code, Markdown, Raw };
enum class DocKind { Notebook, Script };

struct Cell {
    int index = 0;
    CellType cell_type = CellType::Code;
    std::string source;  // newline-normalized, otherwise verbatim
    int line_count = 0;
};

struct CellDocument {
    std::string doc_id;       // SHA-256 of the raw bytes, hex
    std::string origin_path;
    DocKind kind = DocKind::Script;
    std::string language_tag;  // lowercased; "python" for scripts
    std::vector<Cell> cells;
    long long byte_size = 0;
};

enum class IngestErrorKind { MalformedJson, UnsupportedFormat, EncodingError };

struct IngestError : std::runtime_error {
    IngestErrorKind kind;
    IngestError(IngestErrorKind k, const std::string& msg)
        : std::runtime_error(msg), kind(k) {}
};

CellDocument parse_notebook(std::string_view bytes, const std::string& path);
CellDocument parse_script(std::string_view bytes, const std::string& path);

// True for scripts and for notebooks that declare Python as their
// language; documents with unknown or empty language metadata are
// excluded from analysis.
bool is_analyzable(const CellDocument& doc);

}  // namespace nbstat::ingest
