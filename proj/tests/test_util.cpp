// Copyright contributors to the nbstat project
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "nbstat/util.hpp"

using namespace nbstat;

TEST_CASE("sha256 known vectors") {
    // FIPS 180-2 test vectors.
    CHECK(util::sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(util::sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(util::sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("sha256 is stable across calls") {
    std::string payload(100000, 'q');
    CHECK(util::sha256_hex(payload) == util::sha256_hex(payload));
}

TEST_CASE("utf8 validation") {
    CHECK(util::is_valid_utf8("plain ascii"));
    CHECK(util::is_valid_utf8("caf\xc3\xa9"));
    CHECK(util::is_valid_utf8("\xe2\x82\xac"));       // euro sign
    CHECK(util::is_valid_utf8("\xf0\x9f\x98\x80"));   // emoji
    CHECK_FALSE(util::is_valid_utf8("\xff"));
    CHECK_FALSE(util::is_valid_utf8("\xc3"));          // truncated
    CHECK_FALSE(util::is_valid_utf8("\xc0\xaf"));      // overlong
    CHECK_FALSE(util::is_valid_utf8("\xed\xa0\x80"));  // surrogate
}

TEST_CASE("line splitting drops one trailing empty segment") {
    CHECK(util::split_lines("").size() == 0);
    CHECK(util::split_lines("a").size() == 1);
    CHECK(util::split_lines("a\n").size() == 1);
    CHECK(util::split_lines("a\n\n").size() == 2);
    CHECK(util::split_lines("a\nb").size() == 2);
    CHECK(util::split_lines("\n").size() == 1);  // one empty line
}

TEST_CASE("newline normalization") {
    CHECK(util::normalize_newlines("a\r\nb") == "a\nb");
    CHECK(util::normalize_newlines("a\nb") == "a\nb");
    CHECK(util::normalize_newlines("a\rb") == "a\rb");  // lone CR untouched
}

TEST_CASE("glob matching") {
    CHECK(util::glob_match("*.py", "foo.py"));
    CHECK(util::glob_match("*.py", "dir/foo.py"));
    CHECK_FALSE(util::glob_match("*.py", "foo.ipynb"));
    CHECK(util::glob_match("data/*", "data/x/y.py"));
    CHECK(util::glob_match("?.py", "a.py"));
    CHECK_FALSE(util::glob_match("?.py", "ab.py"));
}

TEST_CASE("real formatting uses 6 significant digits") {
    CHECK(util::format_real(0.5) == "0.5");
    CHECK(util::format_real(1.0 / 3.0) == "0.333333");
    CHECK(util::format_real(1234567.0) == "1.23457e+06");
}

TEST_CASE("csv escaping") {
    CHECK(util::csv_escape("plain") == "plain");
    CHECK(util::csv_escape("a,b") == "\"a,b\"");
    CHECK(util::csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
}
