// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nbstat::util {

// SHA-256 of the raw bytes, lowercase hex.
std::string sha256_hex(std::string_view bytes);

// True when the byte sequence is well-formed UTF-8 (overlongs and
// surrogate encodings rejected).
bool is_valid_utf8(std::string_view bytes);

// Strips a leading UTF-8 BOM, if present.
std::string_view strip_bom(std::string_view bytes);

// Replaces every CRLF with LF.
std::string normalize_newlines(std::string_view text);

// LF-split; a single trailing empty segment is dropped, so "" -> {} and
// "a\n" -> {"a"}.
std::vector<std::string_view> split_lines(std::string_view text);

// Shell-style glob: '*' matches any run (including '/'), '?' one char.
bool glob_match(std::string_view pattern, std::string_view text);

std::string to_lower(std::string_view s);

// Formats a real with 6 significant digits, the store/CSV convention.
std::string format_real(double v);

// Quotes a CSV field if it contains comma, quote, or newline.
std::string csv_escape(std::string_view field);

std::string csv_real(const std::optional<double>& v);

}  // namespace nbstat::util
