// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "nbstat/ingest.hpp"

using namespace nbstat;
using ingest::CellDocument;
using ingest::CellType;
using ingest::DocKind;
using ingest::IngestError;
using ingest::IngestErrorKind;

namespace {

IngestErrorKind error_kind_of(const char* payload) {
    try {
        ingest::parse_notebook(payload, "x.ipynb");
    } catch (const IngestError& e) {
        return e.kind;
    }
    FAIL("expected IngestError");
    return IngestErrorKind::MalformedJson;
}

}  // namespace

TEST_CASE("minimal v4 notebook") {
    CellDocument doc =
        ingest::parse_notebook(R"({"nbformat":4,"cells":[],"metadata":{}})", "min.ipynb");
    CHECK(doc.kind == DocKind::Notebook);
    CHECK(doc.cells.empty());
    CHECK(doc.language_tag.empty());
}

TEST_CASE("code cell with list source concatenates without separators") {
    const char* payload = R"({
        "nbformat": 4,
        "metadata": {"kernelspec": {"language": "python"}},
        "cells": [{"cell_type": "code", "source": ["a=1\n", "b=2"]}]
    })";
    CellDocument doc = ingest::parse_notebook(payload, "nb.ipynb");
    REQUIRE(doc.cells.size() == 1);
    CHECK(doc.cells[0].cell_type == CellType::Code);
    CHECK(doc.cells[0].source == "a=1\nb=2");
    CHECK(doc.cells[0].line_count == 2);
    CHECK(doc.language_tag == "python");
}

TEST_CASE("string source and cell type mapping") {
    const char* payload = R"({
        "nbformat": 4, "metadata": {},
        "cells": [
            {"cell_type": "markdown", "source": "# Title\ntext"},
            {"cell_type": "code", "source": "x = 1"},
            {"cell_type": "raw", "source": "raw"},
            {"cell_type": "unknown", "source": ""}
        ]
    })";
    CellDocument doc = ingest::parse_notebook(payload, "nb.ipynb");
    REQUIRE(doc.cells.size() == 4);
    CHECK(doc.cells[0].cell_type == CellType::Markdown);
    CHECK(doc.cells[0].line_count == 2);
    CHECK(doc.cells[1].cell_type == CellType::Code);
    CHECK(doc.cells[2].cell_type == CellType::Raw);
    CHECK(doc.cells[3].cell_type == CellType::Raw);
    for (size_t i = 0; i < doc.cells.size(); ++i) CHECK(doc.cells[i].index == int(i));
}

TEST_CASE("notebook error taxonomy") {
    CHECK(error_kind_of("not json at all") == IngestErrorKind::MalformedJson);
    CHECK(error_kind_of("[1, 2]") == IngestErrorKind::UnsupportedFormat);
    CHECK(error_kind_of(R"({"nbformat":3,"worksheets":[]})") ==
          IngestErrorKind::UnsupportedFormat);
    CHECK(error_kind_of(R"({"nbformat":4,"metadata":{}})") ==
          IngestErrorKind::UnsupportedFormat);  // no cells array
    CHECK(error_kind_of("{\"nbformat\":4,\"cells\":[],\"x\":\"\xff\xfe\"}") ==
          IngestErrorKind::EncodingError);
}

TEST_CASE("language fallback order") {
    const char* with_info = R"({
        "nbformat": 4, "cells": [],
        "metadata": {"language_info": {"name": "Python"}}
    })";
    CHECK(ingest::parse_notebook(with_info, "a.ipynb").language_tag == "python");

    const char* kernel_wins = R"({
        "nbformat": 4, "cells": [],
        "metadata": {"kernelspec": {"language": "R"},
                     "language_info": {"name": "python"}}
    })";
    CHECK(ingest::parse_notebook(kernel_wins, "b.ipynb").language_tag == "r");
}

TEST_CASE("scripts become one-code-cell documents") {
    CellDocument empty = ingest::parse_script("", "e.py");
    REQUIRE(empty.cells.size() == 1);
    CHECK(empty.cells[0].cell_type == CellType::Code);
    CHECK(empty.cells[0].source.empty());
    CHECK(empty.cells[0].line_count == 0);
    CHECK(empty.language_tag == "python");
    CHECK(empty.kind == DocKind::Script);

    CellDocument one = ingest::parse_script("x = 1\n", "one.py");
    CHECK(one.cells[0].line_count == 1);  // trailing empty segment dropped

    CellDocument three = ingest::parse_script("a = 1\nb = 2\nc = 3\n", "three.py");
    CHECK(three.cells[0].line_count == 3);
}

TEST_CASE("script totality on arbitrary valid UTF-8") {
    CellDocument doc = ingest::parse_script("this is not python (at all", "junk.py");
    CHECK(doc.cells.size() == 1);
    CHECK_THROWS_AS(ingest::parse_script("\xff\xff", "bad.py"), IngestError);
}

TEST_CASE("doc_id is deterministic and content-addressed") {
    CellDocument a = ingest::parse_script("x = 1", "a.py");
    CellDocument b = ingest::parse_script("x = 1", "b.py");
    CellDocument c = ingest::parse_script("x = 2", "c.py");
    CHECK(a.doc_id == b.doc_id);
    CHECK(a.doc_id != c.doc_id);
    CHECK(a.doc_id.size() == 64);
}

TEST_CASE("notebook parsing is reproducible") {
    const char* payload = R"({
        "nbformat": 4, "metadata": {"kernelspec": {"language": "python"}},
        "cells": [{"cell_type": "code", "source": "x=1"},
                  {"cell_type": "markdown", "source": "hi"}]
    })";
    CellDocument a = ingest::parse_notebook(payload, "p.ipynb");
    CellDocument b = ingest::parse_notebook(payload, "p.ipynb");
    CHECK(a.doc_id == b.doc_id);
    REQUIRE(a.cells.size() == b.cells.size());
    for (size_t i = 0; i < a.cells.size(); ++i) {
        CHECK(a.cells[i].source == b.cells[i].source);
        CHECK(a.cells[i].cell_type == b.cells[i].cell_type);
    }
}

TEST_CASE("CRLF sources are normalized before line counting") {
    const char* payload = "{\"nbformat\":4,\"metadata\":{},"
                          "\"cells\":[{\"cell_type\":\"code\",\"source\":\"a=1\\r\\nb=2\"}]}";
    CellDocument doc = ingest::parse_notebook(payload, "crlf.ipynb");
    CHECK(doc.cells[0].source == "a=1\nb=2");
    CHECK(doc.cells[0].line_count == 2);
}

TEST_CASE("BOM is stripped before parsing") {
    std::string payload = "\xef\xbb\xbf{\"nbformat\":4,\"cells\":[],\"metadata\":{}}";
    CHECK_NOTHROW(ingest::parse_notebook(payload, "bom.ipynb"));
}

TEST_CASE("is_analyzable keeps python notebooks and every script") {
    auto notebook = [](const char* lang) {
        CellDocument d;
        d.kind = DocKind::Notebook;
        d.language_tag = lang;
        return d;
    };
    CHECK(ingest::is_analyzable(notebook("python")));
    CHECK_FALSE(ingest::is_analyzable(notebook("r")));
    CHECK_FALSE(ingest::is_analyzable(notebook("")));
    CHECK_FALSE(ingest::is_analyzable(notebook("julia")));

    CellDocument script = ingest::parse_script("pass", "s.py");
    CHECK(ingest::is_analyzable(script));
}
