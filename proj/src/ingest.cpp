// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0

#include "nbstat/ingest.hpp"

#include <json.hpp>

#include "nbstat/util.hpp"

namespace nbstat::ingest {

namespace {

using nlohmann::json;

int count_lines(std::string_view source) {
    return int(util::split_lines(source).size());
}

std::string cell_source_text(const json& cell) {
    auto it = cell.find("source");
    if (it == cell.end()) return "";
    if (it->is_string()) return it->get<std::string>();
    if (it->is_array()) {
        // List-of-strings sources are concatenated without separators.
        std::string out;
        for (const auto& part : *it)
            if (part.is_string()) out += part.get<std::string>();
        return out;
    }
    return "";
}

CellType cell_type_of(const json& cell) {
    auto it = cell.find("cell_type");
    if (it == cell.end() || !it->is_string()) return CellType::Raw;
    std::string t = it->get<std::string>();
    if (t == "code") return CellType::Code;
    if (t == "markdown") return CellType::Markdown;
    return CellType::Raw;
}

std::string language_of(const json& root) {
    auto meta = root.find("metadata");
    if (meta == root.end() || !meta->is_object()) return "";
    auto kernelspec = meta->find("kernelspec");
    if (kernelspec != meta->end() && kernelspec->is_object()) {
        auto lang = kernelspec->find("language");
        if (lang != kernelspec->end() && lang->is_string())
            return util::to_lower(lang->get<std::string>());
    }
    auto info = meta->find("language_info");
    if (info != meta->end() && info->is_object()) {
        auto name = info->find("name");
        if (name != info->end() && name->is_string())
            return util::to_lower(name->get<std::string>());
    }
    return "";
}

}  // namespace

CellDocument parse_notebook(std::string_view bytes, const std::string& path) {
    std::string_view content = util::strip_bom(bytes);
    if (!util::is_valid_utf8(content))
        throw IngestError(IngestErrorKind::EncodingError, path + ": invalid UTF-8");

    json root;
    try {
        root = json::parse(content);
    } catch (const json::parse_error& e) {
        throw IngestError(IngestErrorKind::MalformedJson, path + ": " + e.what());
    }
    if (!root.is_object())
        throw IngestError(IngestErrorKind::UnsupportedFormat,
                          path + ": top level is not an object");

    auto nbformat = root.find("nbformat");
    if (nbformat == root.end() || !nbformat->is_number_integer() ||
        nbformat->get<int>() != 4)
        throw IngestError(IngestErrorKind::UnsupportedFormat,
                          path + ": only nbformat v4 is supported");

    auto cells_it = root.find("cells");
    if (cells_it == root.end() || !cells_it->is_array())
        throw IngestError(IngestErrorKind::UnsupportedFormat,
                          path + ": no top-level cells array");

    CellDocument doc;
    doc.doc_id = util::sha256_hex(bytes);
    doc.origin_path = path;
    doc.kind = DocKind::Notebook;
    doc.language_tag = language_of(root);
    doc.byte_size = (long long)(bytes.size());

    int index = 0;
    for (const auto& cell_json : *cells_it) {
        if (!cell_json.is_object()) continue;
        Cell cell;
        cell.index = index++;
        cell.cell_type = cell_type_of(cell_json);
        cell.source = util::normalize_newlines(cell_source_text(cell_json));
        cell.line_count = count_lines(cell.source);
        doc.cells.push_back(std::move(cell));
    }
    return doc;
}

CellDocument parse_script(std::string_view bytes, const std::string& path) {
    std::string_view content = util::strip_bom(bytes);
    if (!util::is_valid_utf8(content))
        throw IngestError(IngestErrorKind::EncodingError, path + ": invalid UTF-8");

    CellDocument doc;
    doc.doc_id = util::sha256_hex(bytes);
    doc.origin_path = path;
    doc.kind = DocKind::Script;
    doc.language_tag = "python";
    doc.byte_size = (long long)(bytes.size());

    Cell cell;
    cell.index = 0;
    cell.cell_type = CellType::Code;
    cell.source = util::normalize_newlines(content);
    cell.line_count = count_lines(cell.source);
    doc.cells.push_back(std::move(cell));
    return doc;
}

bool is_analyzable(const CellDocument& doc) {
    if (doc.kind == DocKind::Script) return true;
    return util::to_lower(doc.language_tag) == "python";
}

}  // namespace nbstat::ingest
